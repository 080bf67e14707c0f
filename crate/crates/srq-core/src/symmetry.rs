//! Charge-sector bookkeeping for a locally acting symmetry.
//!
//! The effect of the symmetry on the entanglement decomposition is fully
//! determined by the ordered partition of the local dimension into sector
//! dimensions, so the group itself is represented only by that data. The
//! finite Abelian case acting through its regular representation maps to a
//! partition whose sectors all carry one-dimensional irreps with
//! multiplicity `d_alpha`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, SrqError};
use crate::linalg::ComplexMatrix;

/// One charge sector: its label, subspace dimension `d_alpha`, and the
/// (irrep dimension, multiplicity) factorization `d_alpha = chi * dim_irrep`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpec {
    pub label: String,
    pub dim: usize,
    pub dim_irrep: usize,
    pub multiplicity: usize,
}

impl SectorSpec {
    /// Sector with a one-dimensional irrep of multiplicity `dim`.
    pub fn abelian(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
            dim_irrep: 1,
            multiplicity: dim,
        }
    }
}

/// Ordered partition `d = sum_alpha d_alpha` of the local dimension into
/// charge-sector dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargePartition {
    d: usize,
    sectors: Vec<SectorSpec>,
}

impl ChargePartition {
    pub fn new(d: usize, sectors: Vec<SectorSpec>) -> Result<Self> {
        if sectors.is_empty() {
            return Err(SrqError::Domain(
                "a partition needs at least one sector".into(),
            ));
        }
        for s in &sectors {
            if s.dim < 1 {
                return Err(SrqError::Domain(format!(
                    "sector '{}' has dimension 0",
                    s.label
                )));
            }
            if s.dim != s.dim_irrep * s.multiplicity {
                return Err(SrqError::Domain(format!(
                    "sector '{}': d_alpha = {} does not equal dim_irrep * multiplicity = {} * {}",
                    s.label, s.dim, s.dim_irrep, s.multiplicity
                )));
            }
        }
        let total: usize = sectors.iter().map(|s| s.dim).sum();
        if total != d {
            return Err(SrqError::Domain(format!(
                "sector dimensions sum to {total}, expected d = {d}"
            )));
        }
        Ok(Self { d, sectors })
    }

    /// Partition from sector dimensions alone, with sectors labeled by
    /// position and annotated as one-dimensional irreps.
    pub fn from_dims(d: usize, dims: &[usize]) -> Result<Self> {
        let sectors = dims
            .iter()
            .enumerate()
            .map(|(i, &dim)| SectorSpec::abelian(i.to_string(), dim))
            .collect();
        Self::new(d, sectors)
    }

    /// Single trivial sector covering the whole local space.
    pub fn trivial(d: usize) -> Result<Self> {
        Self::from_dims(d, &[d])
    }

    /// Parses the CLI partition syntax `d=6 sectors=3,2,1`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut d: Option<usize> = None;
        let mut dims: Option<Vec<usize>> = None;
        for field in text.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| SrqError::Parse {
                line: 1,
                message: format!("expected key=value in partition spec, got '{field}'"),
            })?;
            match key {
                "d" => {
                    d = Some(value.parse().map_err(|_| SrqError::Parse {
                        line: 1,
                        message: format!("cannot parse d from '{value}'"),
                    })?);
                }
                "sectors" => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        value.split(',').map(|v| v.parse()).collect();
                    dims = Some(parsed.map_err(|_| SrqError::Parse {
                        line: 1,
                        message: format!("cannot parse sector dimensions from '{value}'"),
                    })?);
                }
                other => {
                    return Err(SrqError::Parse {
                        line: 1,
                        message: format!("unknown partition field '{other}'"),
                    });
                }
            }
        }
        let d = d.ok_or_else(|| SrqError::Parse {
            line: 1,
            message: "partition spec is missing d=".into(),
        })?;
        let dims = dims.ok_or_else(|| SrqError::Parse {
            line: 1,
            message: "partition spec is missing sectors=".into(),
        })?;
        Self::from_dims(d, &dims)
    }

    /// Parses the compact `a+b+c` form used in CSV output; `d` is the sum.
    pub fn parse_dims(text: &str) -> Result<Self> {
        let dims: std::result::Result<Vec<usize>, _> =
            text.split('+').map(|v| v.trim().parse()).collect();
        let dims = dims.map_err(|_| SrqError::Parse {
            line: 1,
            message: format!("cannot parse partition '{text}' (expected e.g. 2+1+1)"),
        })?;
        let d = dims.iter().sum();
        Self::from_dims(d, &dims)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sectors(&self) -> &[SectorSpec] {
        &self.sectors
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.dim).collect()
    }

    /// Unordered sector pairs `(alpha, beta)` with `alpha < beta`.
    pub fn sector_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.sectors.len();
        let mut pairs = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
        for a in 0..m {
            for b in (a + 1)..m {
                pairs.push((a, b));
            }
        }
        pairs
    }

    /// Partition with two sectors swapped; used for relabeling covariance.
    pub fn with_sectors_swapped(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.sectors.len() || j >= self.sectors.len() {
            return Err(SrqError::Index(format!(
                "sector index out of range (have {} sectors)",
                self.sectors.len()
            )));
        }
        let mut sectors = self.sectors.clone();
        sectors.swap(i, j);
        Self::new(self.d, sectors)
    }
}

impl fmt::Display for ChargePartition {
    /// Compact `a+b+c` form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.sectors.iter().map(|s| s.dim.to_string()).collect();
        f.write_str(&dims.join("+"))
    }
}

/// All ordered partitions (compositions) of `d`, in lexicographic order:
/// `[1,1,1], [1,2], [2,1], [3]` for `d = 3`. There are `2^(d-1)` of them.
pub fn all_ordered_partitions(d: usize) -> Vec<Vec<usize>> {
    fn extend(remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for first in 1..=remaining {
            prefix.push(first);
            extend(remaining - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(d, &mut Vec::new(), &mut out);
    out
}

/// The family `{P_alpha}` of charge-sector projectors for a partition.
///
/// Each projector is diagonal with ones exactly on the contiguous index block
/// assigned to its sector, blocks in partition order starting at index 0.
/// A family conjugated into another basis is available via [`ProjectorFamily::rotated`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    partition: ChargePartition,
    projectors: Vec<ComplexMatrix>,
}

/// Builds the diagonal projector family of a partition.
pub fn projectors(partition: &ChargePartition) -> ProjectorFamily {
    let d = partition.d();
    let mut out = Vec::with_capacity(partition.num_sectors());
    let mut offset = 0;
    for sector in partition.sectors() {
        let mut p = ComplexMatrix::zeros(d, d);
        for i in offset..offset + sector.dim {
            p.set(i, i, Complex64::ONE);
        }
        out.push(p);
        offset += sector.dim;
    }
    ProjectorFamily {
        partition: partition.clone(),
        projectors: out,
    }
}

impl ProjectorFamily {
    pub fn partition(&self) -> &ChargePartition {
        &self.partition
    }

    pub fn d(&self) -> usize {
        self.partition.d()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, alpha: usize) -> Result<&ComplexMatrix> {
        self.projectors.get(alpha).ok_or_else(|| {
            SrqError::Index(format!(
                "sector {alpha} out of range (have {} sectors)",
                self.projectors.len()
            ))
        })
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// Conjugates every projector into the basis given by `u`: `P -> U P U^dag`.
    /// Hook for symmetries whose charge basis is not the computational one.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<ProjectorFamily> {
        let d = self.d();
        if u.rows() != d || u.cols() != d {
            return Err(SrqError::Dimension(format!(
                "basis rotation must be {d}x{d}, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        let u_dag = u.adjoint();
        let rotated = self
            .projectors
            .iter()
            .map(|p| u.mul(p)?.mul(&u_dag))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectorFamily {
            partition: self.partition.clone(),
            projectors: rotated,
        })
    }

    /// Charge-measurement probabilities `p_alpha = Tr(P_alpha rho)`, in sector
    /// order. `rho` may be sub-normalized (projected); its trace must not
    /// exceed one.
    pub fn sector_probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        let d = self.d();
        if rho.rows() != d || rho.cols() != d {
            return Err(SrqError::Dimension(format!(
                "density operator must be {d}x{d}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let trace = rho.trace().re;
        if trace > 1.0 + 1e-12 {
            return Err(SrqError::Domain(format!(
                "density operator trace {trace} exceeds 1"
            )));
        }
        self.projectors
            .iter()
            .map(|p| Ok(p.trace_product(rho)?.re))
            .collect()
    }
}
