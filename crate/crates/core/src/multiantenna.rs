//! Multi-antenna receiver: single-antenna sensors, an `N`-antenna receiver.
//!
//! Writing the receive vector as `|a| v` with `v` a unit vector, a fixed `v`
//! reduces the problem to the single-antenna one with effective gains
//! `|v^T h_k|`. The direction itself is chosen by antenna selection
//! (`v = e_n`) or by best-of-`trials` random search.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compute_mse, compute_power, ChannelState, SystemParams};
use crate::policies::computation_optimal;

/// Channel vectors `h_k ∈ C^N`, one per sensor.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiAntennaChannel {
    antennas: usize,
    columns: Vec<Vec<Complex64>>,
}

impl MultiAntennaChannel {
    pub fn new(antennas: usize, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        if antennas == 0 || columns.is_empty() {
            return Err(Error::InvalidInstance(
                "need at least one antenna and one sensor".into(),
            ));
        }
        for (k, col) in columns.iter().enumerate() {
            if col.len() != antennas {
                return Err(Error::DimensionMismatch {
                    expected: antennas,
                    got: col.len(),
                });
            }
            if col.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "channel vector of sensor {k} is all zero"
                )));
            }
        }
        Ok(Self { antennas, columns })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn sensors(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.columns[k]
    }
}

/// Unit-norm receive direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<Complex64>);

impl Direction {
    /// Normalizes `raw`; fails on a zero vector.
    pub fn new(raw: Vec<Complex64>) -> Result<Self> {
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInstance("direction must be non-zero".into()));
        }
        Ok(Self(raw.into_iter().map(|z| z / norm).collect()))
    }

    /// Standard basis vector `e_n` (0-based) in `C^antennas`.
    pub fn basis(n: usize, antennas: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); antennas];
        v[n] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    /// Uniform on the complex unit sphere, keyed by `(seed, index)`.
    pub fn random(antennas: usize, seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        loop {
            let raw: Vec<Complex64> = (0..antennas)
                .map(|_| {
                    Complex64::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    )
                })
                .collect();
            if let Ok(d) = Self::new(raw) {
                return d;
            }
        }
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }
}

fn project(v: &Direction, column: &[Complex64]) -> Complex64 {
    v.0.iter().zip(column).map(|(a, h)| a * h).sum()
}

/// Sorted `|v^T h_k|` as a single-antenna channel state.
pub fn effective_channels(ch: &MultiAntennaChannel, v: &Direction) -> Result<ChannelState> {
    if v.0.len() != ch.antennas {
        return Err(Error::DimensionMismatch {
            expected: ch.antennas,
            got: v.0.len(),
        });
    }
    let gains: Vec<f64> = ch
        .columns
        .iter()
        .map(|col| project(v, col).norm())
        .collect();
    if let Some(k) = gains.iter().position(|g| *g == 0.0) {
        return Err(Error::InvalidInstance(format!(
            "direction is orthogonal to the channel of sensor {k}"
        )));
    }
    ChannelState::from_gains(&gains)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiAntennaSolution {
    pub direction: Direction,
    /// `|a| v`.
    pub rx_vector: Vec<Complex64>,
    /// Phase-compensated transmit scales in original sensor order.
    pub tx_scales: Vec<Complex64>,
    pub critical_number: usize,
    pub mse: f64,
    pub power: f64,
    /// Position of the chosen direction among the evaluated candidates.
    pub candidate: usize,
}

/// Optimal `|a|` and `b` for a fixed direction.
pub fn solve_for_direction(
    params: &SystemParams,
    ch: &MultiAntennaChannel,
    v: &Direction,
) -> Result<MultiAntennaSolution> {
    params.check_len(ch.sensors())?;
    let eff = effective_channels(ch, v)?;
    let sol = computation_optimal(params, &eff)?;
    let mse = compute_mse(params, &eff, &sol.policy)?;
    let power = compute_power(&sol.policy);
    let magnitudes = eff.to_sensor_order(&sol.policy.tx_scales);
    let tx_scales = ch
        .columns
        .iter()
        .zip(&magnitudes)
        .map(|(col, b)| {
            let phase = project(v, col).arg();
            Complex64::from_polar(*b, -phase)
        })
        .collect();
    let rx_vector = v.0.iter().map(|z| z * sol.policy.rx_scale).collect();
    Ok(MultiAntennaSolution {
        direction: v.clone(),
        rx_vector,
        tx_scales,
        critical_number: sol.critical_number,
        mse,
        power,
        candidate: 0,
    })
}

/// `sum_k |a^T h_k b_k - 1|^2 + sigma^2 ||a||^2` with complex `a` and `b`.
pub fn complex_form_mse(
    params: &SystemParams,
    ch: &MultiAntennaChannel,
    rx_vector: &[Complex64],
    tx_scales: &[Complex64],
) -> Result<f64> {
    params.check_len(ch.sensors())?;
    params.check_len(tx_scales.len())?;
    if rx_vector.len() != ch.antennas {
        return Err(Error::DimensionMismatch {
            expected: ch.antennas,
            got: rx_vector.len(),
        });
    }
    let distortion: f64 = ch
        .columns
        .iter()
        .zip(tx_scales)
        .map(|(col, b)| {
            let gain: Complex64 = rx_vector.iter().zip(col).map(|(a, h)| a * h).sum();
            (gain * b - 1.0).norm_sqr()
        })
        .sum();
    let rx_norm: f64 = rx_vector.iter().map(|z| z.norm_sqr()).sum();
    Ok(distortion + params.noise_power * rx_norm)
}

/// Keeps the first candidate with the lowest MSE; candidates that are
/// orthogonal to some sensor's channel are skipped.
fn best_of(
    params: &SystemParams,
    ch: &MultiAntennaChannel,
    candidates: Vec<Direction>,
) -> Result<MultiAntennaSolution> {
    let scores: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|v| solve_for_direction(params, ch, v).ok().map(|s| s.mse))
        .collect();
    let (best, _) = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|m| (i, m)))
        .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
            Some(a) if a.1 <= cur.1 => Some(a),
            _ => Some(cur),
        })
        .ok_or_else(|| Error::InvalidInstance("every candidate direction was degenerate".into()))?;
    let mut sol = solve_for_direction(params, ch, &candidates[best])?;
    sol.candidate = best;
    Ok(sol)
}

/// Best single receive antenna; ties keep the lowest antenna index.
pub fn antenna_selection(
    params: &SystemParams,
    ch: &MultiAntennaChannel,
) -> Result<MultiAntennaSolution> {
    params.check_len(ch.sensors())?;
    let candidates = (0..ch.antennas)
        .map(|n| Direction::basis(n, ch.antennas))
        .collect();
    best_of(params, ch, candidates)
}

/// Best of `trials` random directions drawn from the `(seed, trial)` streams.
/// With `include_basis`, the `N` basis vectors are evaluated first.
pub fn random_direction_search(
    params: &SystemParams,
    ch: &MultiAntennaChannel,
    trials: usize,
    seed: u64,
    include_basis: bool,
) -> Result<MultiAntennaSolution> {
    params.check_len(ch.sensors())?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut candidates: Vec<Direction> = Vec::with_capacity(trials + ch.antennas);
    if include_basis {
        candidates.extend((0..ch.antennas).map(|n| Direction::basis(n, ch.antennas)));
    }
    candidates.extend((0..trials as u64).map(|t| Direction::random(ch.antennas, seed, t)));
    best_of(params, ch, candidates)
}

/// How the multi-antenna receive direction is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionMethod {
    Select,
    Random { trials: usize, include_basis: bool },
}

impl FromStr for DirectionMethod {
    type Err = Error;

    /// `select` or `random:<trials>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "select" {
            return Ok(Self::Select);
        }
        match s.strip_prefix("random:").map(str::parse::<usize>) {
            Some(Ok(trials)) if trials > 0 => Ok(Self::Random {
                trials,
                include_basis: false,
            }),
            _ => Err(Error::Config(format!(
                "unknown method {s:?} (expected select | random:<trials>)"
            ))),
        }
    }
}

impl fmt::Display for DirectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionMethod::Select => write!(f, "select"),
            DirectionMethod::Random {
                trials,
                include_basis: false,
            } => write!(f, "random:{trials}"),
            DirectionMethod::Random { trials, .. } => write!(f, "random+basis:{trials}"),
        }
    }
}

impl DirectionMethod {
    /// `seed` keys the random-direction streams and is ignored by `Select`.
    pub fn solve(
        &self,
        params: &SystemParams,
        ch: &MultiAntennaChannel,
        seed: u64,
    ) -> Result<MultiAntennaSolution> {
        match *self {
            DirectionMethod::Select => antenna_selection(params, ch),
            DirectionMethod::Random {
                trials,
                include_basis,
            } => random_direction_search(params, ch, trials, seed, include_basis),
        }
    }
}
