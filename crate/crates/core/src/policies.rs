//! Tx-Rx scaling policy constructors.
//!
//! The computation-optimal policy works on the partition `S_0..S_K` of the
//! Rx-scaling axis (see [`interval_of`]). Inside `S_i` the `i` weakest sensors
//! transmit at `sqrt(P)` and the rest invert their channel exactly, so the MSE
//! is a scalar quadratic in `a` whose unconstrained minimizer is `g_i`. The
//! optimal critical number is the index of the largest `g_i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{interval_of, ChannelState, SystemParams, TxRxPolicy};

/// Relative offset used to step just above the open left end of `S_i`.
pub const OPEN_BOUNDARY_EPS: f64 = 1.0 / (1u64 << 40) as f64;

/// `g_i = sqrt(P) sum_{k<=i} h_k / (sigma^2 + P sum_{k<=i} h_k^2)` for `i = 1..K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GSequence {
    values: Vec<f64>,
}

impl GSequence {
    /// `values()[i - 1]` holds `g_i`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `g_i` for `1 <= i <= K`; `g_0 = 0`.
    pub fn get(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// All `i` (1-based) attaining the maximum, ascending.
    pub fn maximizers(&self) -> Vec<usize> {
        let max = self.max();
        (1..=self.values.len())
            .filter(|&i| self.values[i - 1] == max)
            .collect()
    }
}

pub fn g_sequence(params: &SystemParams, channels: &ChannelState) -> Result<GSequence> {
    params.check_len(channels.len())?;
    let sqrt_p = params.max_tx_scale();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let values = channels
        .gains()
        .iter()
        .map(|h| {
            sum += h;
            sum_sq += h * h;
            sqrt_p * sum / (params.noise_power + params.peak_power * sum_sq)
        })
        .collect();
    Ok(GSequence { values })
}

/// Where a candidate Rx factor sits relative to `S_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// At or below the left end `1/(h_{i+1} sqrt(P))`.
    Below,
    Inside,
    /// Above the right end `1/(h_i sqrt(P))`.
    Above,
}

/// Placement of `value` relative to `S_i`, `1 <= i <= K`.
pub fn placement(
    params: &SystemParams,
    channels: &ChannelState,
    i: usize,
    value: f64,
) -> Placement {
    let h = channels.gains();
    if value > params.rx_threshold(h[i - 1]) {
        Placement::Above
    } else if i < h.len() && value <= params.rx_threshold(h[i]) {
        Placement::Below
    } else {
        Placement::Inside
    }
}

/// Best Rx factor restricted to `S_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClampedRx {
    pub value: f64,
    /// Placement of the unconstrained minimizer `g_i`.
    pub placement: Placement,
}

impl ClampedRx {
    /// True when `g_i` fell below `S_i` and the open left end was approximated.
    pub fn boundary_degenerate(&self) -> bool {
        self.placement == Placement::Below
    }
}

/// Projects `g_i` onto `S_i`. Below the interval the left end is open, so the
/// value returned is `1/(h_{i+1} sqrt(P)) * (1 + 2^-40)`.
pub fn clamp_a(
    params: &SystemParams,
    channels: &ChannelState,
    i: usize,
    g_i: f64,
) -> Result<ClampedRx> {
    params.check_len(channels.len())?;
    let k = channels.len();
    if i == 0 || i > k {
        return Err(Error::Config(format!(
            "critical number {i} outside 1..={k}"
        )));
    }
    let h = channels.gains();
    let placement = placement(params, channels, i, g_i);
    let value = match placement {
        Placement::Inside => g_i,
        Placement::Above => params.rx_threshold(h[i - 1]),
        Placement::Below => params.rx_threshold(h[i]) * (1.0 + OPEN_BOUNDARY_EPS),
    };
    Ok(ClampedRx { value, placement })
}

/// Best transmit scales for a fixed Rx factor: `b_k = min(sqrt(P), 1/(a h_k))`,
/// with the `interval_of(a)` weakest sensors pinned to exactly `sqrt(P)`.
pub fn optimal_b_given_a(
    params: &SystemParams,
    channels: &ChannelState,
    a: f64,
) -> Result<TxRxPolicy> {
    params.check_len(channels.len())?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::ConstraintViolation(format!(
            "rx scale must be non-negative, got {a}"
        )));
    }
    let sqrt_p = params.max_tx_scale();
    let full = interval_of(params, channels, a).get();
    let tx_scales = channels
        .gains()
        .iter()
        .enumerate()
        .map(|(k, h)| {
            if k < full {
                sqrt_p
            } else {
                (1.0 / (a * h)).min(sqrt_p)
            }
        })
        .collect();
    Ok(TxRxPolicy::new(a, tx_scales))
}

/// MSE restricted to `S_i`: `sum_{k<=i} (a h_k sqrt(P) - 1)^2 + sigma^2 a^2`.
pub fn critical_mse(params: &SystemParams, channels: &ChannelState, i: usize, a: f64) -> f64 {
    let sqrt_p = params.max_tx_scale();
    let distortion: f64 = channels.gains()[..i]
        .iter()
        .map(|h| {
            let e = a * h * sqrt_p - 1.0;
            e * e
        })
        .sum();
    distortion + params.noise_power * a * a
}

/// `MSE_i` at the per-interval optimum `a_i`, for `i = 1..K`.
pub fn critical_mse_profile(params: &SystemParams, channels: &ChannelState) -> Result<Vec<f64>> {
    let g = g_sequence(params, channels)?;
    (1..=channels.len())
        .map(|i| {
            let a = clamp_a(params, channels, i, g.get(i))?.value;
            Ok(critical_mse(params, channels, i, a))
        })
        .collect()
}

/// A constructed policy together with its critical number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub policy: TxRxPolicy,
    pub critical_number: usize,
    /// Set when the Rx factor approximates an open interval end.
    pub boundary_degenerate: bool,
}

pub fn computation_optimal(params: &SystemParams, channels: &ChannelState) -> Result<Solution> {
    let g = g_sequence(params, channels)?;
    // Ties in the argmax: take the smallest maximizer whose g_i lies in S_i;
    // failing that, the maximizer with the lowest restricted MSE.
    let candidates = g
        .maximizers()
        .into_iter()
        .map(|i| Ok((i, clamp_a(params, channels, i, g.get(i))?)))
        .collect::<Result<Vec<_>>>()?;
    let (i_star, rx) = match candidates
        .iter()
        .find(|(_, c)| c.placement == Placement::Inside)
    {
        Some(found) => *found,
        None => candidates
            .iter()
            .map(|&(i, c)| (i, c, critical_mse(params, channels, i, c.value)))
            .reduce(|best, cand| if cand.2 < best.2 { cand } else { best })
            .map(|(i, c, _)| (i, c))
            .expect("g has at least one maximizer"),
    };
    Ok(Solution {
        policy: optimal_b_given_a(params, channels, rx.value)?,
        critical_number: i_star,
        boundary_degenerate: rx.boundary_degenerate(),
    })
}

/// Critical number 1: `a = 1/(sqrt(P) h_1)`, `b_k = sqrt(P) h_1 / h_k`.
pub fn channel_inversion(params: &SystemParams, channels: &ChannelState) -> Result<Solution> {
    params.check_len(channels.len())?;
    let sqrt_p = params.max_tx_scale();
    let h1 = channels.gains()[0];
    let tx_scales = channels.gains().iter().map(|h| sqrt_p * (h1 / h)).collect();
    Ok(Solution {
        policy: TxRxPolicy::new(params.rx_threshold(h1), tx_scales),
        critical_number: 1,
        boundary_degenerate: false,
    })
}

/// Critical number K: every sensor at `sqrt(P)`, `a = min(1/(sqrt(P) h_K), g_K)`.
pub fn energy_greedy(params: &SystemParams, channels: &ChannelState) -> Result<Solution> {
    let g = g_sequence(params, channels)?;
    let k = channels.len();
    let h_max = channels.gains()[k - 1];
    let a = params.rx_threshold(h_max).min(g.get(k));
    Ok(Solution {
        policy: TxRxPolicy::new(a, vec![params.max_tx_scale(); k]),
        critical_number: k,
        boundary_degenerate: false,
    })
}

/// Rule mapping the sensor count to a fixed critical number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IotaFunction {
    /// `max(1, floor(sqrt(K)))`
    Sqrt,
    /// `max(1, floor(K / 2))`
    Half,
    Constant(usize),
    /// `table[K - 1]`
    Table(Vec<usize>),
}

impl IotaFunction {
    pub fn eval(&self, k: usize) -> Result<usize> {
        if k == 0 {
            return Err(Error::Config("sensor count must be at least 1".into()));
        }
        let value = match self {
            IotaFunction::Sqrt => k.isqrt().max(1),
            IotaFunction::Half => (k / 2).max(1),
            IotaFunction::Constant(n) => *n,
            IotaFunction::Table(table) => *table
                .get(k - 1)
                .ok_or_else(|| Error::Config(format!("iota table has no entry for K = {k}")))?,
        };
        if value == 0 || value > k {
            return Err(Error::Config(format!(
                "iota({k}) = {value} outside 1..={k}"
            )));
        }
        Ok(value)
    }
}

impl FromStr for IotaFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(Self::Sqrt),
            "half" => Ok(Self::Half),
            _ => {
                if let Some(n) = s.strip_prefix("const:") {
                    let n = n
                        .parse()
                        .map_err(|_| Error::Config(format!("bad iota constant {n:?}")))?;
                    Ok(Self::Constant(n))
                } else if let Some(list) = s.strip_prefix("table:") {
                    list.split(',')
                        .map(|t| {
                            t.trim()
                                .parse()
                                .map_err(|_| Error::Config(format!("bad iota table entry {t:?}")))
                        })
                        .collect::<Result<Vec<usize>>>()
                        .map(Self::Table)
                } else {
                    Err(Error::Config(format!(
                        "unknown iota {s:?} (expected sqrt | half | const:<n> | table:<i1,i2,...>)"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for IotaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IotaFunction::Sqrt => write!(f, "sqrt"),
            IotaFunction::Half => write!(f, "half"),
            IotaFunction::Constant(n) => write!(f, "const:{n}"),
            IotaFunction::Table(t) => {
                let entries: Vec<String> = t.iter().map(usize::to_string).collect();
                write!(f, "table:{}", entries.join(","))
            }
        }
    }
}

/// First-iota policy with the Rx factor at the midpoint of `S_i`.
pub fn first_iota(
    params: &SystemParams,
    channels: &ChannelState,
    iota: &IotaFunction,
) -> Result<Solution> {
    first_iota_at(params, channels, iota, 0.5)
}

/// First-iota policy with `a = t_{i+1} + position * (t_i - t_{i+1})`, where
/// `t_k = 1/(h_k sqrt(P))`, `t_{K+1} = 0` and `position` lies in `(0, 1]`.
/// `position = 0.5` is `(1/h_{i+1} + 1/h_i) / (2 sqrt(P))`.
pub fn first_iota_at(
    params: &SystemParams,
    channels: &ChannelState,
    iota: &IotaFunction,
    position: f64,
) -> Result<Solution> {
    params.check_len(channels.len())?;
    if !(position > 0.0 && position <= 1.0) {
        return Err(Error::Config(format!(
            "rx position {position} outside (0, 1]"
        )));
    }
    let k = channels.len();
    let i = iota.eval(k)?;
    let h = channels.gains();
    let upper = params.rx_threshold(h[i - 1]);
    let lower = if i < k {
        params.rx_threshold(h[i])
    } else {
        0.0
    };
    let a = if position == 0.5 {
        (upper + lower) / 2.0
    } else {
        (lower + position * (upper - lower)).min(upper)
    };
    Ok(Solution {
        policy: optimal_b_given_a(params, channels, a)?,
        critical_number: i,
        boundary_degenerate: false,
    })
}

/// Policy selector used by the Monte Carlo driver and the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyKind {
    Optimal,
    Inversion,
    Greedy,
    FirstIota(IotaFunction),
}

impl PolicyKind {
    /// Parses a tag (`optimal | inversion | greedy | first-iota`) plus the
    /// iota spelling required by `first-iota`. `first-iota:<iota>` is also accepted.
    pub fn from_tag(tag: &str, iota: Option<&str>) -> Result<Self> {
        match tag {
            "optimal" => Ok(Self::Optimal),
            "inversion" => Ok(Self::Inversion),
            "greedy" => Ok(Self::Greedy),
            "first-iota" => {
                let iota = iota.ok_or_else(|| {
                    Error::Config("policy first-iota requires an iota function".into())
                })?;
                Ok(Self::FirstIota(iota.parse()?))
            }
            other => match other.strip_prefix("first-iota:") {
                Some(rule) => Ok(Self::FirstIota(rule.parse()?)),
                None => Err(Error::Config(format!(
                    "unknown policy {other:?} (expected optimal | inversion | greedy | first-iota)"
                ))),
            },
        }
    }

    pub fn solve(&self, params: &SystemParams, channels: &ChannelState) -> Result<Solution> {
        match self {
            PolicyKind::Optimal => computation_optimal(params, channels),
            PolicyKind::Inversion => channel_inversion(params, channels),
            PolicyKind::Greedy => energy_greedy(params, channels),
            PolicyKind::FirstIota(iota) => first_iota(params, channels, iota),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_tag(s, None)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Optimal => write!(f, "optimal"),
            PolicyKind::Inversion => write!(f, "inversion"),
            PolicyKind::Greedy => write!(f, "greedy"),
            PolicyKind::FirstIota(iota) => write!(f, "first-iota:{iota}"),
        }
    }
}

/// Per-sensor Rx factors and Tx scales of the MAC remote-estimation system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacPolicy {
    pub rx_scales: Vec<f64>,
    pub tx_scales: Vec<f64>,
}

fn check_tx_box(params: &SystemParams, channels: &ChannelState, tx_scales: &[f64]) -> Result<()> {
    params.check_len(channels.len())?;
    params.check_len(tx_scales.len())?;
    let cap = params.max_tx_scale();
    if let Some((k, b)) = tx_scales
        .iter()
        .enumerate()
        .find(|(_, b)| !(**b >= 0.0 && **b <= cap))
    {
        return Err(Error::ConstraintViolation(format!(
            "tx scale {k} = {b} outside [0, {cap}]"
        )));
    }
    Ok(())
}

/// `sigma^2 + sum_j (h_j b_j)^2`.
fn received_power(params: &SystemParams, channels: &ChannelState, tx_scales: &[f64]) -> f64 {
    params.noise_power
        + channels
            .gains()
            .iter()
            .zip(tx_scales)
            .map(|(h, b)| (h * b) * (h * b))
            .sum::<f64>()
}

/// MMSE Rx factors for given Tx scales: `a_k = h_k b_k / (sigma^2 + sum_j (h_j b_j)^2)`.
pub fn mac_rx_scales(
    params: &SystemParams,
    channels: &ChannelState,
    tx_scales: &[f64],
) -> Result<Vec<f64>> {
    check_tx_box(params, channels, tx_scales)?;
    let denom = received_power(params, channels, tx_scales);
    Ok(channels
        .gains()
        .iter()
        .zip(tx_scales)
        .map(|(h, b)| if denom > 0.0 { h * b / denom } else { 0.0 })
        .collect())
}

/// Per-sensor estimation MSE with MMSE receivers:
/// `1 - (h_k b_k)^2 / (sigma^2 + sum_j (h_j b_j)^2)`.
pub fn mac_mse_tuple(
    params: &SystemParams,
    channels: &ChannelState,
    tx_scales: &[f64],
) -> Result<Vec<f64>> {
    check_tx_box(params, channels, tx_scales)?;
    let denom = received_power(params, channels, tx_scales);
    Ok(channels
        .gains()
        .iter()
        .zip(tx_scales)
        .map(|(h, b)| {
            if denom > 0.0 {
                1.0 - (h * b) * (h * b) / denom
            } else {
                1.0
            }
        })
        .collect())
}

/// Per-sensor MSE for arbitrary Rx factors:
/// `(a_k h_k b_k - 1)^2 + a_k^2 sum_{j != k} (h_j b_j)^2 + a_k^2 sigma^2`.
pub fn mac_mse_with_rx(
    params: &SystemParams,
    channels: &ChannelState,
    policy: &MacPolicy,
) -> Result<Vec<f64>> {
    check_tx_box(params, channels, &policy.tx_scales)?;
    params.check_len(policy.rx_scales.len())?;
    let total = received_power(params, channels, &policy.tx_scales) - params.noise_power;
    Ok(channels
        .gains()
        .iter()
        .zip(&policy.tx_scales)
        .zip(&policy.rx_scales)
        .map(|((h, b), a)| {
            let own = (h * b) * (h * b);
            let e = a * h * b - 1.0;
            e * e + a * a * (total - own) + a * a * params.noise_power
        })
        .collect())
}

/// Minimizer of the sum of per-sensor MSEs: all sensors at `sqrt(P)`.
pub fn mac_optimal(params: &SystemParams, channels: &ChannelState) -> Result<MacPolicy> {
    params.check_len(channels.len())?;
    let tx_scales = vec![params.max_tx_scale(); channels.len()];
    let rx_scales = mac_rx_scales(params, channels, &tx_scales)?;
    Ok(MacPolicy {
        rx_scales,
        tx_scales,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_mse, compute_power};

    fn inst(h: &[f64], p: f64, s2: f64) -> (SystemParams, ChannelState) {
        (
            SystemParams::new(h.len(), p, s2).unwrap(),
            ChannelState::from_gains(h).unwrap(),
        )
    }

    #[test]
    fn b_given_a_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        assert_eq!(
            optimal_b_given_a(&p, &ch, 1.0).unwrap().tx_scales,
            vec![1.0, 0.5]
        );
        assert_eq!(
            optimal_b_given_a(&p, &ch, 0.4).unwrap().tx_scales,
            vec![1.0, 1.0]
        );
        assert_eq!(
            optimal_b_given_a(&p, &ch, 0.0).unwrap().tx_scales,
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn b_given_a_is_pointwise_scan_minimizer() {
        let (p, ch) = inst(&[0.3, 0.9, 1.7], 2.0, 0.5);
        for &a in &[0.1, 0.5, 0.9, 1.3, 3.0] {
            let pol = optimal_b_given_a(&p, &ch, a).unwrap();
            for (h, b) in ch.gains().iter().zip(&pol.tx_scales) {
                let f = |x: f64| (a * h * x - 1.0).powi(2);
                let cap = p.max_tx_scale();
                let scan_min = (0..=20_000)
                    .map(|j| f(cap * j as f64 / 20_000.0))
                    .fold(f64::INFINITY, f64::min);
                assert!(f(*b) <= scan_min + 1e-12);
            }
        }
    }

    #[test]
    fn g_sequence_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        assert_eq!(g_sequence(&p, &ch).unwrap().values(), &[0.5, 0.5]);
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 0.0);
        assert_eq!(g_sequence(&p, &ch).unwrap().values(), &[1.0, 0.6]);
        let (p, ch) = inst(&[1.0], 1.0, 0.0);
        assert_eq!(g_sequence(&p, &ch).unwrap().values(), &[1.0]);
    }

    #[test]
    fn clamp_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let c = clamp_a(&p, &ch, 2, 0.5).unwrap();
        assert_eq!((c.value, c.placement), (0.5, Placement::Inside));
        let c = clamp_a(&p, &ch, 1, 2.0).unwrap();
        assert_eq!((c.value, c.placement), (1.0, Placement::Above));
        let c = clamp_a(&p, &ch, 1, 0.3).unwrap();
        assert!(c.boundary_degenerate());
        assert!(c.value > 0.5 && c.value < 0.5 + 1e-9);
        assert!(clamp_a(&p, &ch, 0, 0.3).is_err());
        assert!(clamp_a(&p, &ch, 3, 0.3).is_err());
    }

    #[test]
    fn optimal_worked_example_noisy() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let sol = computation_optimal(&p, &ch).unwrap();
        assert_eq!(sol.critical_number, 2);
        assert_eq!(sol.policy.rx_scale, 0.5);
        assert_eq!(sol.policy.tx_scales, vec![1.0, 1.0]);
        assert!(!sol.boundary_degenerate);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 0.5);
        assert_eq!(compute_power(&sol.policy), 2.0);
    }

    #[test]
    fn optimal_worked_example_noiseless() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 0.0);
        let sol = computation_optimal(&p, &ch).unwrap();
        assert_eq!(sol.critical_number, 1);
        assert_eq!(sol.policy.rx_scale, 1.0);
        assert_eq!(sol.policy.tx_scales, vec![1.0, 0.5]);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 0.0);
        assert_eq!(compute_power(&sol.policy), 1.25);
    }

    #[test]
    fn optimal_single_sensor() {
        let (p, ch) = inst(&[1.0], 1.0, 1.0);
        let sol = computation_optimal(&p, &ch).unwrap();
        assert_eq!(sol.policy.rx_scale, 0.5);
        assert_eq!(sol.policy.tx_scales, vec![1.0]);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 0.5);
    }

    #[test]
    fn inversion_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let sol = channel_inversion(&p, &ch).unwrap();
        assert_eq!(sol.policy.rx_scale, 1.0);
        assert_eq!(sol.policy.tx_scales, vec![1.0, 0.5]);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 1.0);
        assert_eq!(compute_power(&sol.policy), 1.25);

        let (p, ch) = inst(&[0.7, 1.3, 2.9], 3.0, 0.0);
        let sol = channel_inversion(&p, &ch).unwrap();
        assert!(compute_mse(&p, &ch, &sol.policy).unwrap() < 1e-28);

        let (p, ch) = inst(&[1.5, 1.5, 1.5], 4.0, 1.0);
        let sol = channel_inversion(&p, &ch).unwrap();
        assert_eq!(sol.policy.tx_scales, vec![2.0; 3]);
    }

    #[test]
    fn greedy_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let sol = energy_greedy(&p, &ch).unwrap();
        assert_eq!(sol.policy.rx_scale, 0.5);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 0.5);

        let (p, ch) = inst(&[1.0, 1.0], 4.0, 0.0);
        let sol = energy_greedy(&p, &ch).unwrap();
        assert_eq!(sol.policy.rx_scale, 0.5);
        assert_eq!(compute_mse(&p, &ch, &sol.policy).unwrap(), 0.0);

        let (p, ch) = inst(&[1.0], 1.0, 1.0);
        assert_eq!(
            energy_greedy(&p, &ch).unwrap().policy,
            computation_optimal(&p, &ch).unwrap().policy
        );
    }

    #[test]
    fn first_iota_examples() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let sol = first_iota(&p, &ch, &IotaFunction::Constant(1)).unwrap();
        assert_eq!(sol.policy.rx_scale, 0.75);
        assert_eq!(sol.policy.tx_scales, vec![1.0, 1.0 / 1.5]);
        assert_eq!(interval_of(&p, &ch, 0.75).get(), 1);

        let (p, ch) = inst(&[0.5, 1.0, 2.0], 4.0, 1.0);
        let sol = first_iota(&p, &ch, &IotaFunction::Constant(3)).unwrap();
        assert_eq!(sol.policy.rx_scale, 1.0 / (2.0 * 2.0 * 2.0));
        assert_eq!(sol.policy.tx_scales, vec![2.0; 3]);

        assert!(first_iota(&p, &ch, &IotaFunction::Constant(4)).is_err());
        assert!(first_iota(&p, &ch, &IotaFunction::Constant(0)).is_err());
    }

    #[test]
    fn iota_functions() {
        assert_eq!(IotaFunction::Sqrt.eval(4).unwrap(), 2);
        assert_eq!(IotaFunction::Sqrt.eval(1).unwrap(), 1);
        assert_eq!(IotaFunction::Sqrt.eval(99).unwrap(), 9);
        assert_eq!(IotaFunction::Half.eval(1).unwrap(), 1);
        assert_eq!(IotaFunction::Half.eval(7).unwrap(), 3);
        assert_eq!(IotaFunction::Table(vec![1, 1, 2]).eval(3).unwrap(), 2);
        assert!(IotaFunction::Table(vec![1]).eval(2).is_err());
        assert_eq!(
            "const:3".parse::<IotaFunction>().unwrap(),
            IotaFunction::Constant(3)
        );
        let table: IotaFunction = "table:1, 1,2".parse().unwrap();
        assert_eq!(table, IotaFunction::Table(vec![1, 1, 2]));
        assert_eq!(table.to_string().parse::<IotaFunction>().unwrap(), table);
        assert!("cube".parse::<IotaFunction>().is_err());
        assert!("const:x".parse::<IotaFunction>().is_err());
        assert!("table:1,x".parse::<IotaFunction>().is_err());
    }

    #[test]
    fn policy_tags() {
        assert_eq!(
            PolicyKind::from_tag("optimal", None).unwrap(),
            PolicyKind::Optimal
        );
        assert_eq!(
            PolicyKind::from_tag("first-iota", Some("half")).unwrap(),
            PolicyKind::FirstIota(IotaFunction::Half)
        );
        assert_eq!(
            "first-iota:sqrt".parse::<PolicyKind>().unwrap(),
            PolicyKind::FirstIota(IotaFunction::Sqrt)
        );
        assert!(PolicyKind::from_tag("first-iota", None).is_err());
        assert!(PolicyKind::from_tag("bogus", None).is_err());
        assert_eq!(
            PolicyKind::FirstIota(IotaFunction::Constant(2)).to_string(),
            "first-iota:const:2"
        );
    }

    #[test]
    fn mac_worked_example() {
        let (p, ch) = inst(&[1.0, 2.0], 1.0, 1.0);
        let mac = mac_optimal(&p, &ch).unwrap();
        assert!((mac.rx_scales[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((mac.rx_scales[1] - 2.0 / 6.0).abs() < 1e-15);
        let mse = mac_mse_tuple(&p, &ch, &mac.tx_scales).unwrap();
        assert!((mse[0] - 5.0 / 6.0).abs() < 1e-15);
        assert!((mse[1] - 1.0 / 3.0).abs() < 1e-15);
        let direct = mac_mse_with_rx(&p, &ch, &mac).unwrap();
        for (x, y) in mse.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn mac_tuple_edge_cases() {
        let (p, ch) = inst(&[0.4, 1.1, 2.0], 2.0, 0.7);
        assert_eq!(mac_mse_tuple(&p, &ch, &[0.0; 3]).unwrap(), vec![1.0; 3]);
        let s = p.max_tx_scale();
        let mse = mac_mse_tuple(&p, &ch, &[0.0, s, 0.0]).unwrap();
        let expect = 0.7 / (0.7 + 2.0 * 1.1 * 1.1);
        assert!((mse[1] - expect).abs() < 1e-15);
        assert!(matches!(
            mac_mse_tuple(&p, &ch, &[0.0, 2.0, 0.0]),
            Err(Error::ConstraintViolation(_))
        ));

        let (p, ch) = inst(&[1.3], 1.0, 0.0);
        let mac = mac_optimal(&p, &ch).unwrap();
        assert!(mac_mse_tuple(&p, &ch, &mac.tx_scales).unwrap()[0].abs() < 1e-15);
    }
}
