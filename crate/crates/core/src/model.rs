//! Problem instances and the instantaneous metrics of a Tx-Rx scaling policy.
//!
//! All per-sensor quantities are held in *sorted-channel order*: index `0` is the
//! sensor with the weakest channel. [`ChannelState::permutation`] maps a sorted
//! index back to the caller's original sensor index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Record;

/// Scalars of one AirComp instance: sensor count `K`, normalized peak power `P`
/// and receiver noise power `sigma^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub sensor_count: usize,
    pub peak_power: f64,
    pub noise_power: f64,
}

impl SystemParams {
    pub fn new(sensor_count: usize, peak_power: f64, noise_power: f64) -> Result<Self> {
        let params = Self {
            sensor_count,
            peak_power,
            noise_power,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensor_count == 0 {
            return Err(Error::InvalidInstance(
                "sensor count must be at least 1".into(),
            ));
        }
        if !(self.peak_power > 0.0 && self.peak_power.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "peak power must be positive and finite, got {}",
                self.peak_power
            )));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "noise power must be non-negative and finite, got {}",
                self.noise_power
            )));
        }
        Ok(())
    }

    /// Same power and noise, different sensor count.
    pub fn with_sensor_count(&self, sensor_count: usize) -> Self {
        Self {
            sensor_count,
            ..*self
        }
    }

    #[inline]
    pub fn max_tx_scale(&self) -> f64 {
        self.peak_power.sqrt()
    }

    /// The Rx-scaling value `1 / (h * sqrt(P))` at which a sensor with gain `h`
    /// transmitting at full power is exactly inverted.
    ///
    /// Every interval bound in the crate goes through this function so that
    /// membership tests stay consistent bit for bit.
    #[inline]
    pub fn rx_threshold(&self, gain: f64) -> f64 {
        1.0 / (gain * self.max_tx_scale())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.sensor_count {
            return Err(Error::DimensionMismatch {
                expected: self.sensor_count,
                got: len,
            });
        }
        Ok(())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            sensor_count: 10,
            peak_power: 10.0,
            noise_power: 1.0,
        }
    }
}

/// Channel magnitudes sorted ascending, with the map back to sensor identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    sorted_gains: Vec<f64>,
    permutation: Vec<usize>,
}

impl ChannelState {
    /// Builds a state from gains in original sensor order. Gains must be
    /// strictly positive and finite.
    pub fn from_gains(gains: &[f64]) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidInstance("no channel gains".into()));
        }
        if let Some((idx, g)) = gains
            .iter()
            .enumerate()
            .find(|(_, g)| !(**g > 0.0 && g.is_finite()))
        {
            return Err(Error::ConstraintViolation(format!(
                "channel gain of sensor {idx} must be positive and finite, got {g}"
            )));
        }
        let mut permutation: Vec<usize> = (0..gains.len()).collect();
        permutation.sort_by(|&i, &j| gains[i].total_cmp(&gains[j]));
        let sorted_gains = permutation.iter().map(|&i| gains[i]).collect();
        Ok(Self {
            sorted_gains,
            permutation,
        })
    }

    /// Parses one gain per line. Blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut gains = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let value: f64 = content.parse().map_err(|_| {
                Error::Parse(format!("line {}: not a number: {content:?}", lineno + 1))
            })?;
            gains.push(value);
        }
        Self::from_gains(&gains)
    }

    pub fn len(&self) -> usize {
        self.sorted_gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_gains.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.sorted_gains
    }

    /// `permutation()[k]` is the original index of the `k`-th weakest sensor.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Reorders per-sensor values from sorted order to original sensor order.
    pub fn to_sensor_order<T: Clone>(&self, sorted_values: &[T]) -> Vec<T> {
        assert_eq!(sorted_values.len(), self.len());
        let mut out = sorted_values.to_vec();
        for (k, &orig) in self.permutation.iter().enumerate() {
            out[orig] = sorted_values[k].clone();
        }
        out
    }
}

/// Receiver scale `a` and per-sensor transmit scales `b_k` (sorted order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TxRxPolicy {
    pub rx_scale: f64,
    pub tx_scales: Vec<f64>,
}

impl TxRxPolicy {
    pub fn new(rx_scale: f64, tx_scales: Vec<f64>) -> Self {
        Self {
            rx_scale,
            tx_scales,
        }
    }

    /// Checks `a >= 0` and `0 <= b_k <= sqrt(P)`.
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        params.check_len(self.tx_scales.len())?;
        if !(self.rx_scale >= 0.0 && self.rx_scale.is_finite()) {
            return Err(Error::ConstraintViolation(format!(
                "rx scale must be non-negative, got {}",
                self.rx_scale
            )));
        }
        let cap = params.max_tx_scale();
        if let Some((k, b)) = self
            .tx_scales
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

    pub fn to_record(&self, channels: &ChannelState, metrics: &PolicyMetrics) -> Record {
        let mut record = Record::new();
        record.push_float("a", self.rx_scale);
        for (k, b) in channels.to_sensor_order(&self.tx_scales).iter().enumerate() {
            record.push_float(format!("b{}", k + 1), *b);
        }
        record.push_float("mse", metrics.mse);
        record.push_float("pw", metrics.power);
        record
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetrics {
    pub mse: f64,
    pub power: f64,
}

impl PolicyMetrics {
    pub fn evaluate(
        params: &SystemParams,
        channels: &ChannelState,
        policy: &TxRxPolicy,
    ) -> Result<Self> {
        Ok(Self {
            mse: compute_mse(params, channels, policy)?,
            power: compute_power(policy),
        })
    }
}

/// Index `i` of the interval `S_i` holding an Rx-scaling factor; equal to the
/// number of sensors that must transmit at peak power for that factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntervalIndex(pub usize);

impl IntervalIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

/// `sum_k (a h_k b_k - 1)^2 + sigma^2 a^2`.
pub fn compute_mse(
    params: &SystemParams,
    channels: &ChannelState,
    policy: &TxRxPolicy,
) -> Result<f64> {
    params.check_len(channels.len())?;
    params.check_len(policy.tx_scales.len())?;
    let a = policy.rx_scale;
    let distortion: f64 = channels
        .gains()
        .iter()
        .zip(&policy.tx_scales)
        .map(|(h, b)| {
            let e = a * h * b - 1.0;
            e * e
        })
        .sum();
    Ok(distortion + params.noise_power * a * a)
}

pub fn compute_power(policy: &TxRxPolicy) -> f64 {
    policy.tx_scales.iter().map(|b| b * b).sum()
}

/// Locates `a` in the partition `S_0, ..., S_K` of the non-negative reals.
///
/// `S_0 = (t_1, inf)`, `S_i = (t_{i+1}, t_i]`, `S_K = [0, t_K]` with
/// `t_k = 1 / (h_k sqrt(P))`. Because `t_k` is non-increasing in `k`, the
/// index is the length of the prefix of sensors with `a <= t_k`.
pub fn interval_of(params: &SystemParams, channels: &ChannelState, a: f64) -> IntervalIndex {
    IntervalIndex(
        channels
            .gains()
            .partition_point(|&h| a <= params.rx_threshold(h)),
    )
}

/// Sample statistics of `|r - sum x_k|^2` from the signal-level simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMse {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Half-width of the uniform signal support; gives unit variance.
pub const SIGNAL_BOUND: f64 = 1.732_050_807_568_877_2;

/// Draws signals `x_k ~ U[-sqrt(3), sqrt(3)]` and noise `n ~ N(0, sigma^2)`,
/// forms `r = a (sum_k h_k b_k x_k + n)` and averages `|r - sum_k x_k|^2`.
pub fn simulate_empirical_mse(
    params: &SystemParams,
    channels: &ChannelState,
    policy: &TxRxPolicy,
    num_samples: usize,
    seed: u64,
) -> Result<EmpiricalMse> {
    if num_samples == 0 {
        return Err(Error::Config("num_samples must be at least 1".into()));
    }
    params.check_len(channels.len())?;
    params.check_len(policy.tx_scales.len())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal = Uniform::new_inclusive(-SIGNAL_BOUND, SIGNAL_BOUND)
        .map_err(|e| Error::Config(e.to_string()))?;
    let noise =
        Normal::new(0.0, params.noise_power.sqrt()).map_err(|e| Error::Config(e.to_string()))?;
    let gains: Vec<f64> = channels
        .gains()
        .iter()
        .zip(&policy.tx_scales)
        .map(|(h, b)| h * b)
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..num_samples {
        let mut received = 0.0;
        let mut target = 0.0;
        for g in &gains {
            let x = signal.sample(&mut rng);
            received += g * x;
            target += x;
        }
        let r = policy.rx_scale * (received + noise.sample(&mut rng));
        let err = (r - target) * (r - target);
        sum += err;
        sum_sq += err * err;
    }
    let n = num_samples as f64;
    let mean = sum / n;
    let var = if num_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(EmpiricalMse {
        mean,
        std_error: (var / n).sqrt(),
        samples: num_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(h: &[f64]) -> ChannelState {
        ChannelState::from_gains(h).unwrap()
    }

    #[test]
    fn mse_exact_inversion_is_zero() {
        let p = SystemParams::new(1, 1.0, 0.0).unwrap();
        let pol = TxRxPolicy::new(1.0, vec![1.0]);
        assert_eq!(compute_mse(&p, &state(&[1.0]), &pol).unwrap(), 0.0);
    }

    #[test]
    fn mse_worked_example() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        let pol = TxRxPolicy::new(0.5, vec![1.0, 1.0]);
        assert_eq!(compute_mse(&p, &state(&[1.0, 2.0]), &pol).unwrap(), 0.5);
    }

    #[test]
    fn mse_zero_rx_scale_is_k() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        let pol = TxRxPolicy::new(0.0, vec![0.3, 0.9]);
        assert_eq!(compute_mse(&p, &state(&[1.0, 2.0]), &pol).unwrap(), 2.0);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let p = SystemParams::new(3, 1.0, 1.0).unwrap();
        let pol = TxRxPolicy::new(0.5, vec![1.0, 1.0]);
        assert!(matches!(
            compute_mse(&p, &state(&[1.0, 2.0]), &pol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_examples() {
        let p10 = 10f64.sqrt();
        assert!((compute_power(&TxRxPolicy::new(1.0, vec![p10, p10])) - 20.0).abs() < 1e-12);
        assert_eq!(compute_power(&TxRxPolicy::new(1.0, vec![1.0, 0.5])), 1.25);
        assert_eq!(compute_power(&TxRxPolicy::new(1.0, vec![0.0; 4])), 0.0);
    }

    #[test]
    fn interval_examples() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        let ch = state(&[1.0, 2.0]);
        assert_eq!(interval_of(&p, &ch, 0.75), IntervalIndex(1));
        assert_eq!(interval_of(&p, &ch, 0.5), IntervalIndex(2));
        assert_eq!(interval_of(&p, &ch, 1.5), IntervalIndex(0));
        assert_eq!(interval_of(&p, &ch, 1.0), IntervalIndex(1));
        assert_eq!(interval_of(&p, &ch, 0.0), IntervalIndex(2));
    }

    #[test]
    fn interval_with_ties_skips_empty_sets() {
        let p = SystemParams::new(3, 1.0, 1.0).unwrap();
        let ch = state(&[1.0, 1.0, 2.0]);
        // S_1 = (1, 1] is empty.
        assert_eq!(interval_of(&p, &ch, 1.0), IntervalIndex(2));
        assert_eq!(interval_of(&p, &ch, 0.75), IntervalIndex(2));
    }

    #[test]
    fn channel_state_sorts_and_maps_back() {
        let ch = state(&[3.0, 1.0, 2.0]);
        assert_eq!(ch.gains(), &[1.0, 2.0, 3.0]);
        assert_eq!(ch.permutation(), &[1, 2, 0]);
        assert_eq!(ch.to_sensor_order(&[10, 20, 30]), vec![30, 10, 20]);
    }

    #[test]
    fn rejects_nonpositive_gains() {
        assert!(matches!(
            ChannelState::from_gains(&[1.0, 0.0]),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(ChannelState::from_gains(&[-1.0]).is_err());
        assert!(ChannelState::from_gains(&[f64::NAN]).is_err());
        assert!(ChannelState::from_gains(&[]).is_err());
    }

    #[test]
    fn parses_channel_file() {
        let ch = ChannelState::parse_text("# gains\n2.0\n\n1.0  # weak\n").unwrap();
        assert_eq!(ch.gains(), &[1.0, 2.0]);
        assert!(matches!(
            ChannelState::parse_text("1.0\nabc\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1, 0.0, 1.0).is_err());
        assert!(SystemParams::new(1, 1.0, -0.1).is_err());
        assert!(SystemParams::new(1, 1.0, 0.0).is_ok());
    }

    #[test]
    fn policy_validation() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        assert!(TxRxPolicy::new(0.5, vec![1.0, 0.2]).validate(&p).is_ok());
        assert!(TxRxPolicy::new(0.5, vec![1.1, 0.2]).validate(&p).is_err());
        assert!(TxRxPolicy::new(-0.5, vec![1.0, 0.2]).validate(&p).is_err());
        assert!(TxRxPolicy::new(0.5, vec![1.0]).validate(&p).is_err());
    }

    #[test]
    fn empirical_zero_noise_exact_inversion() {
        let p = SystemParams::new(2, 1.0, 0.0).unwrap();
        let pol = TxRxPolicy::new(1.0, vec![1.0, 0.5]);
        let est = simulate_empirical_mse(&p, &state(&[1.0, 2.0]), &pol, 1000, 3).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn empirical_worked_example() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        let pol = TxRxPolicy::new(0.5, vec![1.0, 1.0]);
        let est = simulate_empirical_mse(&p, &state(&[1.0, 2.0]), &pol, 1_000_000, 11).unwrap();
        assert!((est.mean - 0.5).abs() < 0.01, "{est:?}");
    }

    #[test]
    fn empirical_requires_samples() {
        let p = SystemParams::new(1, 1.0, 1.0).unwrap();
        let pol = TxRxPolicy::new(0.5, vec![1.0]);
        assert!(simulate_empirical_mse(&p, &state(&[1.0]), &pol, 0, 0).is_err());
    }
}
