//! Ergodic performance under i.i.d. unit-power Rayleigh fading.
//!
//! Every trial draws its channels from its own ChaCha stream keyed by
//! `(seed, trial_index)`, and per-trial results are reduced in trial order,
//! so estimates are bit-identical for any rayon thread count.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compute_mse, compute_power, ChannelState, SystemParams};
use crate::multiantenna::{DirectionMethod, MultiAntennaChannel};
use crate::policies::PolicyKind;
use crate::record::Record;

/// Relative change between successive checkpoint means that counts as divergence.
pub const DIVERGENCE_TOLERANCE: f64 = 0.10;
/// First running-mean checkpoint; later ones are at each further decade.
pub const FIRST_CHECKPOINT: usize = 1_000;
pub const DEFAULT_TRIALS: usize = 100_000;

pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// `K` gains `h = sqrt(U)` with `U ~ Exp(1)`, sorted.
pub fn sample_channels(sensor_count: usize, seed: u64, trial_index: u64) -> ChannelState {
    let mut rng = trial_rng(seed, trial_index);
    let gains: Vec<f64> = (0..sensor_count)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            (-u.ln()).sqrt()
        })
        .collect();
    ChannelState::from_gains(&gains).expect("Open01 draws give positive finite gains")
}

/// `N x K` entries i.i.d. circularly-symmetric `CN(0, 1)`.
pub fn sample_multiantenna_channel(
    antennas: usize,
    sensor_count: usize,
    seed: u64,
    trial_index: u64,
) -> MultiAntennaChannel {
    let mut rng = trial_rng(seed, trial_index);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let columns = (0..sensor_count)
        .map(|_| {
            (0..antennas)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    MultiAntennaChannel::new(antennas, columns).expect("Gaussian columns are non-zero a.s.")
}

/// Pairwise (tree) summation in slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let (left, right) = values.split_at(values.len() / 2);
        pairwise_sum(left) + pairwise_sum(right)
    }
}

/// Sample mean and (n - 1)-normalized standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0)).sqrt())
}

/// Running means at `FIRST_CHECKPOINT`, then every further decade, then the
/// final count.
pub fn running_mean_checkpoints(values: &[f64]) -> Vec<(usize, f64)> {
    let mut marks = Vec::new();
    let mut mark = FIRST_CHECKPOINT;
    while mark < values.len() {
        marks.push(mark);
        mark *= 10;
    }
    if !values.is_empty() {
        marks.push(values.len());
    }
    marks
        .into_iter()
        .map(|m| (m, pairwise_sum(&values[..m]) / m as f64))
        .collect()
}

/// True when some pair of successive checkpoint means differs by more than
/// `DIVERGENCE_TOLERANCE` relative to the earlier one.
pub fn fails_cauchy_check(checkpoints: &[(usize, f64)]) -> bool {
    checkpoints.windows(2).any(|w| {
        let (prev, next) = (w[0].1, w[1].1);
        (next - prev).abs() > DIVERGENCE_TOLERANCE * prev.abs()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    pub policy: String,
    pub sensor_count: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_mse_per_k: f64,
    pub std_mse_per_k: f64,
    pub mean_pw_per_k: f64,
    pub std_pw_per_k: f64,
    pub mean_istar: f64,
    pub std_istar: f64,
    pub mse_checkpoints: Vec<(usize, f64)>,
    /// Running mean of `MSE/K` did not settle; the mean is likely infinite.
    pub mse_diverging: bool,
}

impl ErgodicEstimate {
    pub fn mse_std_error(&self) -> f64 {
        self.std_mse_per_k / (self.trials as f64).sqrt()
    }

    pub fn pw_std_error(&self) -> f64 {
        self.std_pw_per_k / (self.trials as f64).sqrt()
    }

    /// Columns `policy,K,trials,seed,acm,acm_std,apc,apc_std,mean_istar,std_istar`.
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push_text("policy", self.policy.clone())
            .push_int("K", self.sensor_count as i64)
            .push_int("trials", self.trials as i64)
            .push_int("seed", self.seed as i64)
            .push_float("acm", self.mean_mse_per_k)
            .push_float("acm_std", self.std_mse_per_k)
            .push_float("apc", self.mean_pw_per_k)
            .push_float("apc_std", self.std_pw_per_k)
            .push_float("mean_istar", self.mean_istar)
            .push_float("std_istar", self.std_istar);
        r
    }

    fn from_samples(
        policy: String,
        params: &SystemParams,
        seed: u64,
        samples: Vec<[f64; 3]>,
    ) -> Self {
        let column = |j: usize| samples.iter().map(|s| s[j]).collect::<Vec<_>>();
        let (mse, pw, istar) = (column(0), column(1), column(2));
        let (mean_mse, std_mse) = mean_std(&mse);
        let (mean_pw, std_pw) = mean_std(&pw);
        let (mean_i, std_i) = mean_std(&istar);
        let checkpoints = running_mean_checkpoints(&mse);
        Self {
            policy,
            sensor_count: params.sensor_count,
            trials: samples.len(),
            seed,
            mean_mse_per_k: mean_mse,
            std_mse_per_k: std_mse,
            mean_pw_per_k: mean_pw,
            std_pw_per_k: std_pw,
            mean_istar: mean_i,
            std_istar: std_i,
            mse_diverging: fails_cauchy_check(&checkpoints),
            mse_checkpoints: checkpoints,
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::Config(
            "ergodic evaluation needs at least 2 trials".into(),
        ));
    }
    Ok(())
}

/// Average `MSE/K`, `PW/K` and critical number of `policy` over `trials`
/// independent channel draws with `K = params.sensor_count`.
pub fn ergodic_evaluate(
    params: &SystemParams,
    policy: &PolicyKind,
    trials: usize,
    seed: u64,
) -> Result<ErgodicEstimate> {
    params.validate()?;
    check_trials(trials)?;
    let k = params.sensor_count;
    let kf = k as f64;
    // Fail fast on configuration errors such as an out-of-range iota.
    if let PolicyKind::FirstIota(iota) = policy {
        iota.eval(k)?;
    }
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let channels = sample_channels(k, seed, t);
            let sol = policy.solve(params, &channels)?;
            let mse = compute_mse(params, &channels, &sol.policy)?;
            let pw = compute_power(&sol.policy);
            Ok([mse / kf, pw / kf, sol.critical_number as f64])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErgodicEstimate::from_samples(
        policy.to_string(),
        params,
        seed,
        samples,
    ))
}

/// Seed of the random-direction streams used for channel draw `trial_index`.
pub fn direction_seed(seed: u64, trial_index: u64) -> u64 {
    const DIRECTION_KEY: u64 = 0x9E37_79B9_7F4A_7C15;
    (seed ^ DIRECTION_KEY).wrapping_add(trial_index)
}

/// Multi-antenna counterpart of [`ergodic_evaluate`] with `CN(0, 1)` channels.
pub fn ergodic_evaluate_multiantenna(
    params: &SystemParams,
    antennas: usize,
    method: DirectionMethod,
    trials: usize,
    seed: u64,
) -> Result<ErgodicEstimate> {
    params.validate()?;
    check_trials(trials)?;
    if antennas == 0 {
        return Err(Error::Config("antenna count must be at least 1".into()));
    }
    let k = params.sensor_count;
    let kf = k as f64;
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ch = sample_multiantenna_channel(antennas, k, seed, t);
            let sol = method.solve(params, &ch, direction_seed(seed, t))?;
            Ok([sol.mse / kf, sol.power / kf, sol.critical_number as f64])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErgodicEstimate::from_samples(
        format!("multiantenna-{method}-N{antennas}"),
        params,
        seed,
        samples,
    ))
}

/// Ergodic estimates over increasing sensor counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSeries {
    pub policy: String,
    pub k_values: Vec<usize>,
    pub estimates: Vec<ErgodicEstimate>,
    /// Least-squares slope of `log ACM` against `log K`.
    pub acm_slope: f64,
    /// Least-squares slope of `log APC` against `log K`.
    pub apc_slope: f64,
}

/// Least-squares slope of `ln y` on `ln x`; NaN when undefined.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

pub fn scaling_sweep(
    policy: &PolicyKind,
    k_values: &[usize],
    trials: usize,
    seed: u64,
    template: &SystemParams,
) -> Result<ScalingSeries> {
    if k_values.is_empty() {
        return Err(Error::Config("k_values must not be empty".into()));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("k_values must be strictly increasing".into()));
    }
    let estimates = k_values
        .iter()
        .map(|&k| ergodic_evaluate(&template.with_sensor_count(k), policy, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<f64> = k_values.iter().map(|&k| k as f64).collect();
    let acm: Vec<f64> = estimates.iter().map(|e| e.mean_mse_per_k).collect();
    let apc: Vec<f64> = estimates.iter().map(|e| e.mean_pw_per_k).collect();
    Ok(ScalingSeries {
        policy: policy.to_string(),
        k_values: k_values.to_vec(),
        acm_slope: loglog_slope(&ks, &acm),
        apc_slope: loglog_slope(&ks, &apc),
        estimates,
    })
}

/// `x/(1-x) - ln(1-x) - 2 sqrt(x/(1-x)) asin(sqrt(x))` on `[0, 1)`; below
/// `1e-4`, where the direct form cancels badly, the series `x^2/6 + 4x^3/15`.
pub fn mu(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("mu is defined on [0, 1), got {x}")));
    }
    if x < 1e-4 {
        return Ok(x * x * (1.0 / 6.0 + 4.0 * x / 15.0));
    }
    let ratio = x / (1.0 - x);
    Ok(ratio - (-x).ln_1p() - 2.0 * ratio.sqrt() * x.sqrt().asin())
}

/// Asymptotic ACM floor `mu(c/(1+c)) / c` for critical numbers growing like `cK`.
pub fn proportional_iota_acm_floor(c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Domain(format!("ratio must lie in (0, 1], got {c}")));
    }
    Ok(mu(c / (1.0 + c))? / c)
}

/// Asymptotic ACM floor `sigma^2 / (3P)` for critical numbers stuck at 1 or 2.
pub fn small_iota_acm_floor(params: &SystemParams) -> f64 {
    params.noise_power / (3.0 * params.peak_power)
}

/// Closed-form channel-inversion APC `P ln K / (K - 1)` (equal to `P` at `K = 1`).
pub fn inversion_apc(params: &SystemParams) -> f64 {
    let k = params.sensor_count as f64;
    if params.sensor_count == 1 {
        params.peak_power
    } else {
        params.peak_power * k.ln() / (k - 1.0)
    }
}

/// Upper bound `1 + ln 2` on the energy-greedy ACM.
pub const GREEDY_ACM_BOUND: f64 = 1.0 + std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Vanishing,
    NonVanishing,
    Inconclusive,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Vanishing => "vanishing",
            Trend::NonVanishing => "non-vanishing",
            Trend::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    /// Trend of the average computation MSE.
    pub computation_effective: Trend,
    /// Trend of the average power consumption.
    pub energy_efficient: Trend,
}

/// Log-log slope over the two largest `K` at or below which a metric counts
/// as vanishing.
pub const VANISHING_SLOPE: f64 = -0.2;
/// Log-log slope at or above which a metric counts as non-vanishing.
pub const FLAT_SLOPE: f64 = -0.05;

fn tail_trend(ks: &[f64], ys: &[f64]) -> Trend {
    let n = ks.len();
    let slope = loglog_slope(&ks[n - 2..], &ys[n - 2..]);
    if slope.is_nan() {
        // Zero averages vanish trivially.
        if ys[n - 1] == 0.0 {
            Trend::Vanishing
        } else {
            Trend::Inconclusive
        }
    } else if slope <= VANISHING_SLOPE {
        Trend::Vanishing
    } else if slope >= FLAT_SLOPE {
        Trend::NonVanishing
    } else {
        Trend::Inconclusive
    }
}

/// Heuristic trend of ACM and APC from the tail of a sweep. A divergent
/// running mean of `MSE/K` at any `K` marks the ACM as non-vanishing.
pub fn classify(series: &ScalingSeries) -> Classification {
    let inconclusive = Classification {
        computation_effective: Trend::Inconclusive,
        energy_efficient: Trend::Inconclusive,
    };
    let ks: Vec<f64> = series.k_values.iter().map(|&k| k as f64).collect();
    if ks.len() < 3 || ks[ks.len() - 1] < 10.0 * ks[0] {
        return inconclusive;
    }
    let acm: Vec<f64> = series.estimates.iter().map(|e| e.mean_mse_per_k).collect();
    let apc: Vec<f64> = series.estimates.iter().map(|e| e.mean_pw_per_k).collect();
    let computation_effective = if series.estimates.iter().any(|e| e.mse_diverging) {
        Trend::NonVanishing
    } else {
        tail_trend(&ks, &acm)
    };
    Classification {
        computation_effective,
        energy_efficient: tail_trend(&ks, &apc),
    }
}
