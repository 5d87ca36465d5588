//! Brute-force reference solvers.
//!
//! For a fixed Rx factor `a` the AirComp MSE separates into independent scalar
//! quadratics `(a h_k b_k - 1)^2`, each minimized over `[0, sqrt(P)]` by
//! clamping `1/(a h_k)`. Scanning `a` on a grid therefore gives the global
//! minimum up to grid resolution without any interval bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelState, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a_max: f64,
    pub resolution: usize,
}

impl GridSpec {
    /// `a_max = 2 / (h_1 sqrt(P))`.
    pub fn for_instance(params: &SystemParams, channels: &ChannelState, resolution: usize) -> Self {
        Self {
            a_max: 2.0 * params.rx_threshold(channels.gains()[0]),
            resolution,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return Err(Error::Config(format!(
                "a_max must be positive, got {}",
                self.a_max
            )));
        }
        if self.resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.a_max / (self.resolution - 1) as f64
    }

    /// Upper bound on `oracle mse - true minimum` when the minimizer lies in
    /// `[0, a_max]`. Each clamped term is C^1 in `a` with second derivative at
    /// most `2 P h_k^2`, so the objective's curvature is at most
    /// `2 (sigma^2 + P sum h_k^2)` and the nearest grid point is within half a step.
    pub fn error_bound(&self, params: &SystemParams, channels: &ChannelState) -> f64 {
        let energy: f64 = channels.gains().iter().map(|h| h * h).sum();
        let curvature = 2.0 * (params.noise_power + params.peak_power * energy);
        0.5 * curvature * (0.5 * self.step()).powi(2)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.a_max * (j as f64 / (self.resolution - 1) as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleAirComp {
    pub rx_scale: f64,
    pub tx_scales: Vec<f64>,
    pub mse: f64,
}

fn mse_at(params: &SystemParams, gains: &[f64], a: f64) -> f64 {
    let cap = params.max_tx_scale();
    let distortion: f64 = gains
        .iter()
        .map(|h| {
            let b = if a > 0.0 {
                (1.0 / (a * h)).clamp(0.0, cap)
            } else {
                cap
            };
            let e = a * h * b - 1.0;
            e * e
        })
        .sum();
    distortion + params.noise_power * a * a
}

/// Grid minimum of the AirComp MSE over `a`, with per-sensor clamped `b_k`.
/// Ties keep the smallest `a`.
pub fn oracle_aircomp(
    params: &SystemParams,
    channels: &ChannelState,
    grid: &GridSpec,
) -> Result<OracleAirComp> {
    params.check_len(channels.len())?;
    grid.validate()?;
    let gains = channels.gains();
    let (best_j, best_mse) = (0..grid.resolution)
        .map(|j| (j, mse_at(params, gains, grid.point(j))))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        );
    let a = grid.point(best_j);
    let cap = params.max_tx_scale();
    let tx_scales = gains
        .iter()
        .map(|h| {
            if a > 0.0 {
                (1.0 / (a * h)).clamp(0.0, cap)
            } else {
                cap
            }
        })
        .collect();
    Ok(OracleAirComp {
        rx_scale: a,
        tx_scales,
        mse: best_mse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleMac {
    pub tx_scales: Vec<f64>,
    pub sum_mse: f64,
}

fn mac_sum_mse(params: &SystemParams, gains: &[f64], tx: &[f64]) -> f64 {
    let received: f64 = gains.iter().zip(tx).map(|(h, b)| (h * b) * (h * b)).sum();
    let denom = params.noise_power + received;
    if denom > 0.0 {
        gains.len() as f64 - received / denom
    } else {
        gains.len() as f64
    }
}

/// Exhaustive grid over `b ∈ [0, sqrt(P)]^K` of the MMSE sum of per-sensor MSEs.
pub fn oracle_mac(
    params: &SystemParams,
    channels: &ChannelState,
    resolution: usize,
) -> Result<OracleMac> {
    params.check_len(channels.len())?;
    let k = channels.len();
    if k > 3 {
        return Err(Error::Unsupported(format!(
            "MAC grid oracle supports at most 3 sensors, got {k}"
        )));
    }
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let cap = params.max_tx_scale();
    let level = |j: usize| cap * (j as f64 / (resolution - 1) as f64);
    let total = resolution.pow(k as u32);
    let mut best = OracleMac {
        tx_scales: vec![0.0; k],
        sum_mse: f64::INFINITY,
    };
    let mut tx = vec![0.0; k];
    for flat in 0..total {
        let mut rest = flat;
        for b in tx.iter_mut() {
            *b = level(rest % resolution);
            rest /= resolution;
        }
        let value = mac_sum_mse(params, channels.gains(), &tx);
        if value < best.sum_mse {
            best.sum_mse = value;
            best.tx_scales.copy_from_slice(&tx);
        }
    }
    Ok(best)
}

/// A reproducible random instance for oracle comparisons.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomInstance {
    pub params: SystemParams,
    pub channels: ChannelState,
}

/// `K` uniform in `1..=max_sensors`, `P` log-uniform on `[0.1, 100]`,
/// `sigma^2` log-uniform on `[0.01, 10]`, gains unit-power Rayleigh.
pub fn random_instance(max_sensors: usize, seed: u64, index: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let k = rng.random_range(1..=max_sensors);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
    };
    let peak_power = log_uniform(&mut rng, 0.1, 100.0);
    let noise_power = log_uniform(&mut rng, 0.01, 10.0);
    let gains: Vec<f64> = (0..k)
        .map(|_| {
            let u: f64 = rng.sample(rand::distr::Open01);
            (-u.ln()).sqrt()
        })
        .collect();
    RandomInstance {
        params: SystemParams {
            sensor_count: k,
            peak_power,
            noise_power,
        },
        channels: ChannelState::from_gains(&gains).expect("Rayleigh gains are positive"),
    }
}
