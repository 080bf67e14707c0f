//! Closed-form Haar-ensemble averages of the sector and interference
//! contributions, used as ground truth for ensemble tests.
//!
//! Both kinds of term share the finite-size correction factor
//! `(1 - d^(1-n)) / (1 + d^(-n))`, which tends to one from below as the
//! particle count grows. At desk scale these expressions are exact in double
//! precision to well below 1e-14, so no extended precision is used.

use std::collections::BTreeMap;

use crate::error::{Result, SrqError};
use crate::symmetry::ChargePartition;

/// Finite-size correction factor `(1 - d^(1-n)) / (1 + d^(-n))`.
pub fn correction_factor(n: usize, d: usize) -> Result<f64> {
    check_args(n, d)?;
    let d = d as f64;
    let n = n as i32;
    Ok((1.0 - d.powi(1 - n)) / (1.0 + d.powi(-n)))
}

/// Haar average of a single sector's contribution:
/// `d_alpha (d_alpha - 1) / (d (d - 1))` times the correction factor.
pub fn expected_q_sector(n: usize, d: usize, d_alpha: usize) -> Result<f64> {
    check_args(n, d)?;
    if d_alpha < 1 || d_alpha > d {
        return Err(SrqError::Domain(format!(
            "sector dimension {d_alpha} out of range for d = {d}"
        )));
    }
    let leading = (d_alpha * (d_alpha - 1)) as f64 / (d * (d - 1)) as f64;
    Ok(leading * correction_factor(n, d)?)
}

/// Haar average of a sector pair's interference contribution:
/// `2 d_alpha d_beta / (d (d - 1))` times the correction factor.
pub fn expected_q_interference(n: usize, d: usize, d_alpha: usize, d_beta: usize) -> Result<f64> {
    check_args(n, d)?;
    if d_alpha < 1 || d_beta < 1 || d_alpha + d_beta > d {
        return Err(SrqError::Domain(format!(
            "sector dimensions ({d_alpha}, {d_beta}) are invalid for d = {d}"
        )));
    }
    let leading = (2 * d_alpha * d_beta) as f64 / (d * (d - 1)) as f64;
    Ok(leading * correction_factor(n, d)?)
}

/// Haar average of the total Q, summed over a partition's sector and
/// interference terms. Since `sum d_a(d_a - 1) + 2 sum_{a<b} d_a d_b = d(d-1)`,
/// this equals the bare correction factor for every partition.
pub fn expected_q_total(n: usize, d: usize, partition: &ChargePartition) -> Result<f64> {
    if partition.d() != d {
        return Err(SrqError::Domain(format!(
            "partition is over d = {}, expected {d}",
            partition.d()
        )));
    }
    let dims = partition.dims();
    let mut total = 0.0;
    for &da in &dims {
        total += expected_q_sector(n, d, da)?;
    }
    for (a, b) in partition.sector_pairs() {
        total += expected_q_interference(n, d, dims[a], dims[b])?;
    }
    Ok(total)
}

fn check_args(n: usize, d: usize) -> Result<()> {
    if n < 2 {
        return Err(SrqError::Domain(format!(
            "ensemble averages require n >= 2, got {n}"
        )));
    }
    if d < 2 {
        return Err(SrqError::Domain(format!(
            "local dimension must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// Theory values for one `(n, d, partition)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarPrediction {
    pub n: usize,
    pub d: usize,
    pub partition: ChargePartition,
    pub q_sector_theory: Vec<f64>,
    pub q_interference_theory: BTreeMap<(usize, usize), f64>,
    pub correction_factor: f64,
}

impl HaarPrediction {
    pub fn new(n: usize, partition: &ChargePartition) -> Result<Self> {
        let d = partition.d();
        let dims = partition.dims();
        let q_sector_theory = dims
            .iter()
            .map(|&da| expected_q_sector(n, d, da))
            .collect::<Result<Vec<_>>>()?;
        let mut q_interference_theory = BTreeMap::new();
        for (a, b) in partition.sector_pairs() {
            q_interference_theory.insert((a, b), expected_q_interference(n, d, dims[a], dims[b])?);
        }
        Ok(Self {
            n,
            d,
            partition: partition.clone(),
            q_sector_theory,
            q_interference_theory,
            correction_factor: correction_factor(n, d)?,
        })
    }

    pub fn total(&self) -> f64 {
        self.q_sector_theory.iter().sum::<f64>() + self.q_interference_theory.values().sum::<f64>()
    }
}
