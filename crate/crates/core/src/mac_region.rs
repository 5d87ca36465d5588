//! Achievable per-sensor MSE region of the MAC estimation system.
//!
//! With MMSE receivers a tuple `(MSE_1, ..., MSE_K)` is produced by the
//! transmit powers `b_k^2 = sigma^2 (1 - MSE_k) / (h_k^2 (sum_j MSE_j - (K - 1)))`.
//! The peak-power limit turns into the linear inner boundaries
//! `MSE_k + (P h_k^2 / sigma^2)(sum_j MSE_j - (K - 1)) >= 1` and the outer
//! boundaries `MSE_k <= 1`. Tuples are indexed in sorted-channel order.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelState, SystemParams};
use crate::policies::mac_mse_tuple;
use crate::record::Record;

/// Absolute tolerance for boundary equalities and feasibility checks.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseTuple(pub Vec<f64>);

impl MseTuple {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn midpoint(&self, other: &MseTuple) -> MseTuple {
        MseTuple(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| 0.5 * (x + y))
                .collect(),
        )
    }
}

impl From<Vec<f64>> for MseTuple {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

fn check_instance(params: &SystemParams, channels: &ChannelState, tuple: &MseTuple) -> Result<()> {
    params.check_len(channels.len())?;
    params.check_len(tuple.0.len())?;
    if params.noise_power == 0.0 {
        return Err(Error::Unsupported(
            "MSE region is degenerate for zero noise power".into(),
        ));
    }
    Ok(())
}

/// `sum_j MSE_j - (K - 1)`.
fn excess(tuple: &MseTuple) -> f64 {
    tuple.0.iter().sum::<f64>() - (tuple.0.len() as f64 - 1.0)
}

/// Left side minus right side of each inner-boundary inequality.
pub fn inner_slack(
    params: &SystemParams,
    channels: &ChannelState,
    tuple: &MseTuple,
) -> Result<Vec<f64>> {
    check_instance(params, channels, tuple)?;
    let d = excess(tuple);
    Ok(channels
        .gains()
        .iter()
        .zip(&tuple.0)
        .map(|(h, m)| m + params.peak_power * h * h / params.noise_power * d - 1.0)
        .collect())
}

/// Transmit powers `b_k^2` that realize the tuple.
pub fn reconstruct_tx_power(
    params: &SystemParams,
    channels: &ChannelState,
    tuple: &MseTuple,
) -> Result<Vec<f64>> {
    check_instance(params, channels, tuple)?;
    let d = excess(tuple);
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Domain(format!(
            "sum of MSEs must exceed K - 1 (excess {d})"
        )));
    }
    Ok(channels
        .gains()
        .iter()
        .zip(&tuple.0)
        .map(|(h, m)| params.noise_power * (1.0 - m) / (h * h * d))
        .collect())
}

pub fn is_achievable(
    params: &SystemParams,
    channels: &ChannelState,
    tuple: &MseTuple,
) -> Result<bool> {
    check_instance(params, channels, tuple)?;
    if tuple
        .0
        .iter()
        .any(|m| !m.is_finite() || *m > 1.0 + BOUNDARY_TOL)
    {
        return Ok(false);
    }
    let d = excess(tuple);
    if d.is_nan() || d <= 0.0 {
        return Ok(false);
    }
    if inner_slack(params, channels, tuple)?
        .iter()
        .any(|s| *s < -BOUNDARY_TOL)
    {
        return Ok(false);
    }
    let cap = params.peak_power * (1.0 + BOUNDARY_TOL);
    Ok(reconstruct_tx_power(params, channels, tuple)?
        .iter()
        .all(|b2| *b2 >= -BOUNDARY_TOL && *b2 <= cap))
}

/// Sorted-order indices `k` whose inner boundary holds with equality.
pub fn pareto_membership(
    params: &SystemParams,
    channels: &ChannelState,
    tuple: &MseTuple,
) -> Result<BTreeSet<usize>> {
    Ok(inner_slack(params, channels, tuple)?
        .iter()
        .enumerate()
        .filter(|(_, s)| s.abs() <= BOUNDARY_TOL)
        .map(|(k, _)| k)
        .collect())
}

pub fn on_pareto_front(
    params: &SystemParams,
    channels: &ChannelState,
    tuple: &MseTuple,
) -> Result<bool> {
    Ok(is_achievable(params, channels, tuple)?
        && !pareto_membership(params, channels, tuple)?.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Weaker sensor at peak power.
    Inner1,
    /// Stronger sensor at peak power.
    Inner2,
    Outer,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Inner1 => "inner1",
            Boundary::Inner2 => "inner2",
            Boundary::Outer => "outer",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub tuple: MseTuple,
    pub tx_scales: [f64; 2],
    pub boundary: Boundary,
}

/// Closed polyline around the two-sensor region, starting and ending at the
/// all-silent corner `(1, 1)`: outer edge `b_2 = 0`, inner edge `b_1 = sqrt(P)`,
/// inner edge `b_2 = sqrt(P)`, outer edge `b_1 = 0`.
pub fn boundary_trace(
    params: &SystemParams,
    channels: &ChannelState,
    grid_points: usize,
) -> Result<Vec<BoundaryPoint>> {
    params.check_len(channels.len())?;
    if channels.len() != 2 {
        return Err(Error::Unsupported(format!(
            "boundary tracing needs exactly 2 sensors, got {}",
            channels.len()
        )));
    }
    if grid_points < 2 {
        return Err(Error::Config("grid_points must be at least 2".into()));
    }
    if params.noise_power == 0.0 {
        return Err(Error::Unsupported(
            "MSE region is degenerate for zero noise power".into(),
        ));
    }
    let cap = params.max_tx_scale();
    let step = |j: usize| cap * j as f64 / (grid_points - 1) as f64;
    let rising: Vec<f64> = (0..grid_points).map(step).collect();
    let falling: Vec<f64> = rising.iter().rev().copied().collect();

    let edges: [(Boundary, Vec<[f64; 2]>); 4] = [
        (Boundary::Outer, rising.iter().map(|&b| [b, 0.0]).collect()),
        (Boundary::Inner1, rising.iter().map(|&b| [cap, b]).collect()),
        (
            Boundary::Inner2,
            falling.iter().map(|&b| [b, cap]).collect(),
        ),
        (Boundary::Outer, falling.iter().map(|&b| [0.0, b]).collect()),
    ];
    let mut points = Vec::with_capacity(4 * grid_points);
    for (boundary, configs) in edges {
        for tx in configs {
            let tuple = MseTuple(mac_mse_tuple(params, channels, &tx)?);
            points.push(BoundaryPoint {
                tuple,
                tx_scales: tx,
                boundary,
            });
        }
    }
    Ok(points)
}

/// CSV rows `mse1,mse2,boundary` in original sensor order.
pub fn boundary_records(channels: &ChannelState, points: &[BoundaryPoint]) -> Vec<Record> {
    let swapped = channels.permutation()[0] == 1;
    points
        .iter()
        .map(|p| {
            let mse = channels.to_sensor_order(p.tuple.values());
            let label = match (p.boundary, swapped) {
                (Boundary::Inner1, true) => Boundary::Inner2,
                (Boundary::Inner2, true) => Boundary::Inner1,
                (b, _) => b,
            };
            let mut r = Record::new();
            r.push_float("mse1", mse[0])
                .push_float("mse2", mse[1])
                .push_text("boundary", label.to_string());
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::mac_optimal;

    fn inst() -> (SystemParams, ChannelState) {
        (
            SystemParams::new(2, 1.0, 1.0).unwrap(),
            ChannelState::from_gains(&[1.0, 2.0]).unwrap(),
        )
    }

    #[test]
    fn optimal_tuple_is_on_both_inner_boundaries() {
        let (p, ch) = inst();
        let t = MseTuple(vec![5.0 / 6.0, 1.0 / 3.0]);
        assert!(is_achievable(&p, &ch, &t).unwrap());
        assert_eq!(
            pareto_membership(&p, &ch, &t).unwrap(),
            BTreeSet::from([0, 1])
        );
    }

    #[test]
    fn silent_corner_is_achievable_but_not_pareto() {
        let (p, ch) = inst();
        let t = MseTuple(vec![1.0, 1.0]);
        assert!(is_achievable(&p, &ch, &t).unwrap());
        assert!(pareto_membership(&p, &ch, &t).unwrap().is_empty());
        assert!(!on_pareto_front(&p, &ch, &t).unwrap());
    }

    #[test]
    fn origin_is_not_achievable() {
        let (p, ch) = inst();
        assert!(!is_achievable(&p, &ch, &MseTuple(vec![0.0, 0.0])).unwrap());
    }

    #[test]
    fn half_power_strong_sensor_sits_on_one_boundary() {
        let (p, ch) = inst();
        let t = MseTuple(mac_mse_tuple(&p, &ch, &[1.0, 0.5]).unwrap());
        assert!(is_achievable(&p, &ch, &t).unwrap());
        assert_eq!(pareto_membership(&p, &ch, &t).unwrap(), BTreeSet::from([0]));
    }

    #[test]
    fn zero_noise_is_unsupported() {
        let p = SystemParams::new(2, 1.0, 0.0).unwrap();
        let ch = ChannelState::from_gains(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            is_achievable(&p, &ch, &MseTuple(vec![1.0, 1.0])),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn reconstruction_recovers_powers() {
        let (p, ch) = inst();
        let b = [0.3, 0.8];
        let t = MseTuple(mac_mse_tuple(&p, &ch, &b).unwrap());
        let b2 = reconstruct_tx_power(&p, &ch, &t).unwrap();
        for (x, y) in b.iter().zip(&b2) {
            assert!((x * x - y).abs() <= 1e-9 * (x * x));
        }
    }

    #[test]
    fn trace_is_closed_and_achievable() {
        let (p, ch) = inst();
        let pts = boundary_trace(&p, &ch, 50).unwrap();
        assert_eq!(pts.len(), 200);
        assert_eq!(pts.first().unwrap().tuple.0, vec![1.0, 1.0]);
        assert_eq!(pts.last().unwrap().tuple.0, vec![1.0, 1.0]);
        for pt in &pts {
            assert!(is_achievable(&p, &ch, &pt.tuple).unwrap(), "{pt:?}");
        }
        let mac = mac_optimal(&p, &ch).unwrap();
        let opt = mac_mse_tuple(&p, &ch, &mac.tx_scales).unwrap();
        let corner = pts
            .iter()
            .rfind(|pt| pt.boundary == Boundary::Inner1)
            .unwrap();
        for (x, y) in corner.tuple.0.iter().zip(&opt) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_rejects_other_sizes() {
        let p = SystemParams::new(3, 1.0, 1.0).unwrap();
        let ch = ChannelState::from_gains(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            boundary_trace(&p, &ch, 10),
            Err(Error::Unsupported(_))
        ));
        let (p, ch) = inst();
        assert!(boundary_trace(&p, &ch, 1).is_err());
    }

    #[test]
    fn records_follow_sensor_order() {
        let p = SystemParams::new(2, 1.0, 1.0).unwrap();
        let ch = ChannelState::from_gains(&[2.0, 1.0]).unwrap();
        let pts = boundary_trace(&p, &ch, 3).unwrap();
        let recs = boundary_records(&ch, &pts);
        // Trace point 5 is (b_weak, b_strong) = (sqrt(P), sqrt(P) / 2) on the weak sensor's boundary.
        assert_eq!(pts[4].boundary, Boundary::Inner1);
        let rec = &recs[4];
        assert_eq!(
            rec.get("boundary"),
            Some(&crate::record::Field::Text("inner2".into()))
        );
        assert_eq!(
            rec.get("mse2"),
            Some(&crate::record::Field::Float(pts[4].tuple.0[0]))
        );
    }
}
