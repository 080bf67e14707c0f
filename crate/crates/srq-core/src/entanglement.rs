//! The global entanglement Q, computed three independent ways, and its
//! resolution into charge-sector and inter-sector interference contributions.
//!
//! The three routes:
//!   1. the original wedge-product form over single-site deletion maps
//!      (qubits only),
//!   2. the average single-site linear entropy `d/(d-1) <1 - Tr rho_k^2>_k`
//!      (any local dimension),
//!   3. the sum of sector terms `Q_a = (2d/(d-1)) <f2(rho_{k,a})>_k` and
//!      interference terms
//!      `Q_ab = (2d/(d-1)) <p_{k,a} p_{k,b} + f2(rho_{k,ab})>_k`.
//!
//! Routes 2 and 3 agree identically in exact arithmetic; the decomposition
//! treats a residual beyond tolerance as an internal fault rather than data.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Result, SrqError};
use crate::linalg::{f2, single_site_rdms, ComplexMatrix};
use crate::states::PureState;
use crate::symmetry::{projectors, ChargePartition, ProjectorFamily};

/// Tolerance on the sum rule `Q = sum_a Q_a + sum_{a<b} Q_ab`.
pub const SUM_RULE_TOL: f64 = 1e-10;

/// Total Q with its sector and interference contributions.
///
/// `q_total` is computed from the linear-entropy route, independently of the
/// parts, so the stored `sum_rule_residual` is a genuine cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct QDecomposition {
    pub q_total: f64,
    /// Sector contributions in partition order; exactly zero whenever the
    /// sector is one-dimensional.
    pub q_sector: Vec<f64>,
    /// Interference contributions keyed by `(alpha, beta)` with `alpha < beta`.
    pub q_interference: BTreeMap<(usize, usize), f64>,
    pub sum_rule_residual: f64,
}

impl QDecomposition {
    pub fn parts_total(&self) -> f64 {
        self.q_sector.iter().sum::<f64>() + self.q_interference.values().sum::<f64>()
    }
}

/// Per-site ingredients of the decomposition; exposed for the measurement
/// circuit cross-checks and for ensemble sweeps that reuse one set of RDMs
/// across many partitions.
#[derive(Debug, Clone)]
pub struct SiteTerms {
    pub site: usize,
    pub purity: f64,
    pub probabilities: Vec<f64>,
    pub sector_f2: Vec<f64>,
    pub interference_f2: BTreeMap<(usize, usize), f64>,
}

/// Deletes site `site` against level `level`: the output amplitude at the
/// reduced index equals the input amplitude whose digit at `site` is `level`.
/// Outputs are unnormalized; their squared norms over all levels sum to one.
pub fn iota(psi: &PureState, site: usize, level: usize) -> Result<Vec<Complex64>> {
    let n = psi.n();
    let d = psi.d();
    if n < 2 {
        return Err(SrqError::Domain(
            "cannot remove a particle from a single-particle state".into(),
        ));
    }
    if site >= n {
        return Err(SrqError::Index(format!(
            "site {site} out of range for {n} particles"
        )));
    }
    if level >= d {
        return Err(SrqError::Index(format!(
            "level {level} out of range for local dimension {d}"
        )));
    }
    let amps = psi.amplitudes();
    let stride = d.pow((n - 1 - site) as u32);
    let outer = psi.dim() / (d * stride);
    let mut out = Vec::with_capacity(outer * stride);
    for hi in 0..outer {
        let base = hi * d * stride + level * stride;
        out.extend_from_slice(&amps[base..base + stride]);
    }
    Ok(out)
}

/// Squared norm of the wedge product, `sum_{x<y} |u_x v_y - u_y v_x|^2`.
///
/// For normalized inputs this equals one minus the fidelity `|<u|v>|^2`.
pub fn wedge_distance(u: &[Complex64], v: &[Complex64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(SrqError::Dimension(format!(
            "wedge distance needs equal lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut total = 0.0;
    for x in 0..u.len() {
        for y in (x + 1)..u.len() {
            total += (u[x] * v[y] - u[y] * v[x]).norm_sqr();
        }
    }
    Ok(total)
}

/// Original wedge form of Q for qubit systems:
/// `(4/n) sum_j D(iota_j(0) psi, iota_j(1) psi)`.
pub fn q_wedge(psi: &PureState) -> Result<f64> {
    if psi.d() != 2 {
        return Err(SrqError::Domain(format!(
            "the wedge form of Q is defined for qubits (d = 2), got d = {}; \
             use the linear-entropy form for qudits",
            psi.d()
        )));
    }
    if psi.n() < 2 {
        return Err(SrqError::Domain("Q requires at least two particles".into()));
    }
    let mut total = 0.0;
    for j in 0..psi.n() {
        let u = iota(psi, j, 0)?;
        let v = iota(psi, j, 1)?;
        total += wedge_distance(&u, &v)?;
    }
    Ok(4.0 / psi.n() as f64 * total)
}

/// Q as the scaled average single-site linear entropy:
/// `d/(d-1) <1 - Tr rho_k^2>_k`.
pub fn q_linear_entropy(psi: &PureState) -> Result<f64> {
    if psi.n() < 2 {
        return Err(SrqError::Domain("Q requires at least two particles".into()));
    }
    let purities = single_site_rdms(psi)
        .iter()
        .map(site_purity)
        .collect::<Result<Vec<_>>>()?;
    Ok(q_from_purities(psi.d(), &purities))
}

fn site_purity(rho: &ComplexMatrix) -> Result<f64> {
    Ok(rho.trace_product(rho)?.re)
}

fn q_from_purities(d: usize, purities: &[f64]) -> f64 {
    let mean: f64 = purities.iter().map(|p| 1.0 - p).sum::<f64>() / purities.len() as f64;
    d as f64 / (d as f64 - 1.0) * mean
}

/// Sector component of an RDM: `P rho P`.
pub fn sector_rdm(rho: &ComplexMatrix, projector: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(rho, projector)?;
    projector.mul(rho)?.mul(projector)
}

/// Cross-sector interference component of an RDM:
/// `P_a rho P_b + P_b rho P_a`. Hermitian and traceless.
pub fn interference_rdm(
    rho: &ComplexMatrix,
    p_alpha: &ComplexMatrix,
    p_beta: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_same_square(rho, p_alpha)?;
    check_same_square(rho, p_beta)?;
    if p_alpha == p_beta {
        return Err(SrqError::Domain(
            "interference requires two distinct sectors".into(),
        ));
    }
    let ab = p_alpha.mul(rho)?.mul(p_beta)?;
    let ba = p_beta.mul(rho)?.mul(p_alpha)?;
    ab.add(&ba)
}

fn check_same_square(rho: &ComplexMatrix, p: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() || rho.rows() != p.rows() || rho.cols() != p.cols() {
        return Err(SrqError::Dimension(format!(
            "operator dimensions do not match: {}x{} vs {}x{}",
            rho.rows(),
            rho.cols(),
            p.rows(),
            p.cols()
        )));
    }
    Ok(())
}

/// Per-site probabilities and f2 values for every sector and sector pair,
/// computed from precomputed RDMs.
pub fn site_terms_from_rdms(
    rdms: &[ComplexMatrix],
    family: &ProjectorFamily,
) -> Result<Vec<SiteTerms>> {
    let pairs = family.partition().sector_pairs();
    let mut out = Vec::with_capacity(rdms.len());
    for (site, rho) in rdms.iter().enumerate() {
        let probabilities = family.sector_probabilities(rho)?;
        let mut sector_f2 = Vec::with_capacity(family.len());
        for p in family.projectors() {
            sector_f2.push(f2(&sector_rdm(rho, p)?)?.re);
        }
        let mut interference_f2 = BTreeMap::new();
        for &(a, b) in &pairs {
            let int = interference_rdm(rho, family.projector(a)?, family.projector(b)?)?;
            interference_f2.insert((a, b), f2(&int)?.re);
        }
        out.push(SiteTerms {
            site,
            purity: site_purity(rho)?,
            probabilities,
            sector_f2,
            interference_f2,
        });
    }
    Ok(out)
}

/// Per-site decomposition ingredients of a state under a partition.
pub fn site_terms(psi: &PureState, partition: &ChargePartition) -> Result<Vec<SiteTerms>> {
    check_partition(psi, partition)?;
    site_terms_from_rdms(&single_site_rdms(psi), &projectors(partition))
}

/// Full symmetry-resolved decomposition of Q under the partition's canonical
/// (computational-basis) projector family.
pub fn decompose(psi: &PureState, partition: &ChargePartition) -> Result<QDecomposition> {
    check_partition(psi, partition)?;
    decompose_with_family(psi, &projectors(partition))
}

/// [`decompose`] against an explicit projector family, e.g. one rotated into
/// a non-computational charge basis.
pub fn decompose_with_family(psi: &PureState, family: &ProjectorFamily) -> Result<QDecomposition> {
    if psi.n() < 2 {
        return Err(SrqError::Domain("Q requires at least two particles".into()));
    }
    if family.d() != psi.d() {
        return Err(SrqError::Domain(format!(
            "projector family is over d = {}, state has d = {}",
            family.d(),
            psi.d()
        )));
    }
    decompose_from_rdms(psi.d(), &single_site_rdms(psi), family)
}

/// Core of [`decompose`], reusable across partitions once the RDMs are known.
pub fn decompose_from_rdms(
    d: usize,
    rdms: &[ComplexMatrix],
    family: &ProjectorFamily,
) -> Result<QDecomposition> {
    let terms = site_terms_from_rdms(rdms, family)?;
    let n = terms.len() as f64;
    let scale = 2.0 * d as f64 / (d as f64 - 1.0);

    let mut q_sector = vec![0.0; family.len()];
    for t in &terms {
        for (acc, &val) in q_sector.iter_mut().zip(&t.sector_f2) {
            *acc += val;
        }
    }
    for acc in &mut q_sector {
        *acc *= scale / n;
    }

    let mut q_interference = BTreeMap::new();
    for &(a, b) in &family.partition().sector_pairs() {
        let mut acc = 0.0;
        for t in &terms {
            acc += t.probabilities[a] * t.probabilities[b] + t.interference_f2[&(a, b)];
        }
        q_interference.insert((a, b), scale * acc / n);
    }

    let purities: Vec<f64> = terms.iter().map(|t| t.purity).collect();
    let q_total = q_from_purities(d, &purities);

    let decomposition = QDecomposition {
        q_total,
        q_sector,
        q_interference,
        sum_rule_residual: 0.0,
    };
    let residual = (q_total - decomposition.parts_total()).abs();
    if residual > SUM_RULE_TOL {
        return Err(SrqError::Consistency(format!(
            "sum rule violated: |Q - sum of parts| = {residual:e} exceeds {SUM_RULE_TOL:e}"
        )));
    }
    Ok(QDecomposition {
        sum_rule_residual: residual,
        ..decomposition
    })
}

/// Q of the state after projecting every site's RDM with `P_mu + P_nu`,
/// without renormalization. Equals `Q_mu + Q_nu + Q_munu` of the original
/// state, which is how the interference term is isolated experimentally.
pub fn projected_q(
    psi: &PureState,
    partition: &ChargePartition,
    mu: usize,
    nu: usize,
) -> Result<f64> {
    check_partition(psi, partition)?;
    if mu == nu {
        return Err(SrqError::Domain(
            "projected Q requires two distinct sectors".into(),
        ));
    }
    let family = projectors(partition);
    let p_mu = family.projector(mu)?;
    let p_nu = family.projector(nu)?;
    let p_sum = p_mu.add(p_nu)?;

    let d = psi.d() as f64;
    let scale = 2.0 * d / (d - 1.0);
    let mut total = 0.0;
    let rdms = single_site_rdms(psi);
    for rho in &rdms {
        let projected = p_sum.mul(rho)?.mul(&p_sum)?;
        let p_m = p_mu.trace_product(&projected)?.re;
        let p_n = p_nu.trace_product(&projected)?.re;
        let f_mu = f2(&sector_rdm(&projected, p_mu)?)?.re;
        let f_nu = f2(&sector_rdm(&projected, p_nu)?)?.re;
        let f_int = f2(&interference_rdm(&projected, p_mu, p_nu)?)?.re;
        total += f_mu + f_nu + p_m * p_n + f_int;
    }
    Ok(scale * total / rdms.len() as f64)
}

fn check_partition(psi: &PureState, partition: &ChargePartition) -> Result<()> {
    if psi.n() < 2 {
        return Err(SrqError::Domain("Q requires at least two particles".into()));
    }
    if partition.d() != psi.d() {
        return Err(SrqError::Domain(format!(
            "partition is over d = {}, state has d = {}",
            partition.d(),
            psi.d()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{correction_factor, expected_q_sector};
    use crate::linalg::partial_trace_single_site;
    use crate::states::{child_seed, haar_random, named_state, NamedState};
    use crate::symmetry::all_ordered_partitions;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn iota_on_ghz() {
        let ghz = named_state(NamedState::Ghz, 3, 2).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let zero_branch = iota(&ghz, 0, 0).unwrap();
        assert!((zero_branch[0].re - inv).abs() < TOL);
        assert!(zero_branch[1..].iter().all(|z| z.norm() < TOL));
        let one_branch = iota(&ghz, 0, 1).unwrap();
        assert!((one_branch[3].re - inv).abs() < TOL);
        assert!(one_branch[..3].iter().all(|z| z.norm() < TOL));
    }

    #[test]
    fn iota_annihilates_on_mismatch() {
        let psi = named_state(NamedState::ProductZero, 2, 2).unwrap();
        let out = iota(&psi, 1, 1).unwrap();
        assert!(out.iter().all(|z| *z == Complex64::ZERO));
    }

    #[test]
    fn iota_branches_carry_total_norm() {
        for seed in 0..5 {
            let psi = haar_random(3, 4, seed).unwrap();
            for j in 0..3 {
                let total: f64 = (0..4)
                    .map(|b| {
                        iota(&psi, j, b)
                            .unwrap()
                            .iter()
                            .map(|z| z.norm_sqr())
                            .sum::<f64>()
                    })
                    .sum();
                assert!((total - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn iota_rejects_single_particle() {
        let psi = PureState::from_amplitudes(1, 2, vec![Complex64::ONE, Complex64::ZERO]).unwrap();
        assert!(matches!(iota(&psi, 0, 0), Err(SrqError::Domain(_))));
    }

    #[test]
    fn wedge_of_equal_vectors_vanishes() {
        let u = vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.5, 0.0)];
        assert!(wedge_distance(&u, &u).unwrap() < TOL);
    }

    #[test]
    fn wedge_of_orthogonal_basis_vectors() {
        let u = vec![Complex64::ONE, Complex64::ZERO];
        let v = vec![Complex64::ZERO, Complex64::ONE];
        assert!((wedge_distance(&u, &v).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn wedge_equals_one_minus_fidelity_when_normalized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        for _ in 0..20 {
            let draw = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<Complex64> {
                let mut v: Vec<Complex64> = (0..6)
                    .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.iter_mut().for_each(|z| *z /= norm);
                v
            };
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let expected = 1.0 - overlap.norm_sqr();
            assert!((wedge_distance(&u, &v).unwrap() - expected).abs() < TOL);
        }
    }

    #[test]
    fn wedge_rejects_length_mismatch() {
        let u = vec![Complex64::ONE];
        let v = vec![Complex64::ONE, Complex64::ZERO];
        assert!(matches!(
            wedge_distance(&u, &v),
            Err(SrqError::Dimension(_))
        ));
    }

    #[test]
    fn q_wedge_on_benchmarks() {
        for n in 2..=5 {
            let product = named_state(NamedState::ProductZero, n, 2).unwrap();
            assert!(q_wedge(&product).unwrap().abs() < TOL);
            let ghz = named_state(NamedState::Ghz, n, 2).unwrap();
            assert!((q_wedge(&ghz).unwrap() - 1.0).abs() < TOL);
        }
        let w3 = named_state(NamedState::W, 3, 2).unwrap();
        // single-site RDM eigenvalues {2/3, 1/3}: Q = 2 (1 - 5/9) = 8/9
        assert!((q_wedge(&w3).unwrap() - 8.0 / 9.0).abs() < TOL);
    }

    #[test]
    fn q_wedge_rejects_qudits() {
        let psi = named_state(NamedState::Ghz, 2, 3).unwrap();
        assert!(matches!(q_wedge(&psi), Err(SrqError::Domain(_))));
    }

    #[test]
    fn q_linear_entropy_on_benchmarks() {
        for (n, d) in [(2, 2), (3, 2), (2, 3), (3, 4)] {
            let product = named_state(NamedState::ProductZero, n, d).unwrap();
            assert!(q_linear_entropy(&product).unwrap().abs() < TOL);
        }
        let ghz = named_state(NamedState::Ghz, 3, 2).unwrap();
        assert!((q_linear_entropy(&ghz).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn q_linear_entropy_haar_mean_matches_correction_factor() {
        let samples = 500;
        let mut acc = 0.0;
        for j in 0..samples {
            let psi = haar_random(3, 2, child_seed(0xAB, j)).unwrap();
            acc += q_linear_entropy(&psi).unwrap();
        }
        let mean = acc / samples as f64;
        // (1 - 2^-2)/(1 + 2^-3) = 2/3
        let theory = correction_factor(3, 2).unwrap();
        assert!((theory - 2.0 / 3.0).abs() < 1e-15);
        assert!(
            (mean - theory).abs() < 3e-2,
            "mean {mean} vs theory {theory}"
        );
    }

    #[test]
    fn sector_rdm_examples() {
        let rho = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let out = sector_rdm(&rho, &p).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.0])) < TOL);

        let id = ComplexMatrix::identity(2);
        assert!(sector_rdm(&rho, &id).unwrap().max_abs_diff(&rho) < TOL);
    }

    #[test]
    fn one_dimensional_sector_rdm_has_no_pairwise_spectrum() {
        // rk(P rho P) <= rk(P) = 1, so f2 must vanish identically
        for seed in 0..10 {
            let psi = haar_random(2, 4, seed).unwrap();
            let rho = partial_trace_single_site(&psi, 0).unwrap();
            let part = ChargePartition::from_dims(4, &[1, 3]).unwrap();
            let fam = projectors(&part);
            let s = sector_rdm(&rho, fam.projector(0).unwrap()).unwrap();
            assert!(f2(&s).unwrap().norm() <= TOL);
        }
    }

    #[test]
    fn interference_rdm_examples() {
        let part = ChargePartition::from_dims(2, &[1, 1]).unwrap();
        let fam = projectors(&part);
        let p0 = fam.projector(0).unwrap();
        let p1 = fam.projector(1).unwrap();

        let diag = ComplexMatrix::from_real_diagonal(&[0.3, 0.7]);
        let out = interference_rdm(&diag, p0, p1).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::zeros(2, 2)) < TOL);

        let plus = ComplexMatrix::new(
            2,
            2,
            vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)],
        )
        .unwrap();
        let out = interference_rdm(&plus, p0, p1).unwrap();
        assert!(out.get(0, 0).norm() < TOL && out.get(1, 1).norm() < TOL);
        assert!((out.get(0, 1).re - 0.5).abs() < TOL);
        assert!((out.get(1, 0).re - 0.5).abs() < TOL);
        assert!(out.trace().norm() < TOL);
        assert!(out.hermiticity_error() < TOL);
    }

    #[test]
    fn interference_f2_matches_index_sum_oracle() {
        // f2(rho_ab) = -Tr(rho P_a rho P_b) = -sum_{i in a, j in b} |rho_ij|^2
        for seed in 0..10 {
            let psi = haar_random(2, 5, seed).unwrap();
            let rho = partial_trace_single_site(&psi, 1).unwrap();
            let part = ChargePartition::from_dims(5, &[2, 3]).unwrap();
            let fam = projectors(&part);
            let int = interference_rdm(&rho, fam.projector(0).unwrap(), fam.projector(1).unwrap())
                .unwrap();
            let via_f2 = f2(&int).unwrap().re;
            let mut oracle = 0.0;
            for i in 0..2 {
                for j in 2..5 {
                    oracle -= rho.get(i, j).norm_sqr();
                }
            }
            assert!((via_f2 - oracle).abs() < TOL);
        }
    }

    #[test]
    fn interference_rejects_equal_sectors() {
        let rho = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            interference_rdm(&rho, &p, &p),
            Err(SrqError::Domain(_))
        ));
    }

    #[test]
    fn qubit_sectors_never_contribute() {
        let part = ChargePartition::from_dims(2, &[1, 1]).unwrap();
        for seed in 0..20 {
            let psi = haar_random(3, 2, seed).unwrap();
            let dec = decompose(&psi, &part).unwrap();
            assert!(dec.q_sector.iter().all(|&q| q.abs() <= TOL));
        }
    }

    #[test]
    fn ghz_is_pure_interference() {
        let ghz = named_state(NamedState::Ghz, 3, 2).unwrap();
        let part = ChargePartition::from_dims(2, &[1, 1]).unwrap();
        let dec = decompose(&ghz, &part).unwrap();
        assert!((dec.q_total - 1.0).abs() < TOL);
        assert!(dec.q_sector[0].abs() < TOL && dec.q_sector[1].abs() < TOL);
        assert!((dec.q_interference[&(0, 1)] - 1.0).abs() < TOL);
    }

    #[test]
    fn trivial_partition_puts_everything_in_one_sector() {
        for seed in 0..5 {
            let psi = haar_random(3, 3, seed).unwrap();
            let part = ChargePartition::trivial(3).unwrap();
            let dec = decompose(&psi, &part).unwrap();
            assert!(dec.q_interference.is_empty());
            assert!((dec.q_sector[0] - dec.q_total).abs() <= SUM_RULE_TOL);
        }
    }

    #[test]
    fn haar_mean_sector_term_matches_closed_form() {
        // (n, d, d_alpha) = (3, 3, 2) has theory value 2/7
        let part = ChargePartition::from_dims(3, &[2, 1]).unwrap();
        let samples = 500;
        let mut acc = 0.0;
        for j in 0..samples {
            let psi = haar_random(3, 3, child_seed(0x5EC7, j)).unwrap();
            acc += decompose(&psi, &part).unwrap().q_sector[0];
        }
        let mean = acc / samples as f64;
        let theory = expected_q_sector(3, 3, 2).unwrap();
        assert!((theory - 2.0 / 7.0).abs() < 1e-15);
        assert!(
            (mean - theory).abs() < 3e-3,
            "mean {mean} vs theory {theory}"
        );
    }

    #[test]
    fn three_routes_agree_on_qubits() {
        for seed in 0..20 {
            for n in 2..=5 {
                let psi = haar_random(n, 2, 1000 + seed * 10 + n as u64).unwrap();
                let wedge = q_wedge(&psi).unwrap();
                let linear = q_linear_entropy(&psi).unwrap();
                assert!(
                    (wedge - linear).abs() <= 1e-10,
                    "n={n} seed={seed}: {wedge} vs {linear}"
                );
                for dims in all_ordered_partitions(2) {
                    let part = ChargePartition::from_dims(2, &dims).unwrap();
                    let dec = decompose(&psi, &part).unwrap();
                    assert!((linear - dec.q_total).abs() <= 1e-10);
                    assert!(dec.sum_rule_residual <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn purity_relation_and_anticommutators() {
        for seed in 0..10 {
            let psi = haar_random(3, 4, 300 + seed).unwrap();
            let part = ChargePartition::from_dims(4, &[2, 1, 1]).unwrap();
            let fam = projectors(&part);
            for k in 0..3 {
                let rho = partial_trace_single_site(&psi, k).unwrap();
                let purity = rho.trace_product(&rho).unwrap().re;

                let mut parts = 0.0;
                for p in fam.projectors() {
                    let s = sector_rdm(&rho, p).unwrap();
                    parts += s.trace_product(&s).unwrap().re;
                }
                let pairs = part.sector_pairs();
                for &(a, b) in &pairs {
                    let int = interference_rdm(
                        &rho,
                        fam.projector(a).unwrap(),
                        fam.projector(b).unwrap(),
                    )
                    .unwrap();
                    parts += int.trace_product(&int).unwrap().re;
                }
                assert!(
                    (purity - parts).abs() <= TOL,
                    "purity relation violated at site {k}"
                );

                // Tr {rho_gamma, rho_ab} = 0 for every gamma and a < b
                for g in 0..fam.len() {
                    let s = sector_rdm(&rho, fam.projector(g).unwrap()).unwrap();
                    for &(a, b) in &pairs {
                        let int = interference_rdm(
                            &rho,
                            fam.projector(a).unwrap(),
                            fam.projector(b).unwrap(),
                        )
                        .unwrap();
                        let anti = s.trace_product(&int).unwrap() + int.trace_product(&s).unwrap();
                        assert!(anti.norm() <= TOL, "anticommutator at gamma={g} ({a},{b})");
                    }
                }
            }
        }
    }

    #[test]
    fn squared_probabilities_sum_to_one() {
        for seed in 0..10 {
            let psi = haar_random(3, 5, 400 + seed).unwrap();
            let part = ChargePartition::from_dims(5, &[2, 2, 1]).unwrap();
            let fam = projectors(&part);
            for k in 0..3 {
                let rho = partial_trace_single_site(&psi, k).unwrap();
                let p = fam.sector_probabilities(&rho).unwrap();
                let mut total: f64 = p.iter().map(|x| x * x).sum();
                for (a, b) in part.sector_pairs() {
                    total += 2.0 * p[a] * p[b];
                }
                assert!((total - 1.0).abs() <= TOL);
            }
        }
    }

    #[test]
    fn vanishing_sector_theorem() {
        let mut count = 0;
        let mut seed = 0;
        'outer: for rep in 0..3u64 {
            for n in 2..=4usize {
                for d in 2..=5usize {
                    for dims in all_ordered_partitions(d) {
                        if !dims.contains(&1) {
                            continue;
                        }
                        seed += 1;
                        let psi = haar_random(n, d, 7000 + rep * 1000 + seed).unwrap();
                        let part = ChargePartition::from_dims(d, &dims).unwrap();
                        let dec = decompose(&psi, &part).unwrap();
                        for (s, &dim) in dec.q_sector.iter().zip(&dims) {
                            if dim == 1 {
                                assert!(s.abs() <= TOL, "n={n} d={d} dims={dims:?}");
                            }
                        }
                        count += 1;
                        if count >= 100 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        assert!(count >= 100);
    }

    #[test]
    fn qubit_f2_is_a_determinant() {
        for seed in 0..20 {
            let psi = haar_random(4, 2, 600 + seed).unwrap();
            let part = ChargePartition::from_dims(2, &[1, 1]).unwrap();
            let fam = projectors(&part);
            for k in 0..4 {
                let rho = partial_trace_single_site(&psi, k).unwrap();
                for p in fam.projectors() {
                    let s = sector_rdm(&rho, p).unwrap();
                    let det = s.get(0, 0) * s.get(1, 1) - s.get(0, 1) * s.get(1, 0);
                    assert!((f2(&s).unwrap() - det).norm() <= TOL);
                }
            }
        }
    }

    #[test]
    fn q_total_is_bounded_and_zero_on_products() {
        for seed in 0..20 {
            let psi = haar_random(3, 3, 800 + seed).unwrap();
            let q = q_linear_entropy(&psi).unwrap();
            assert!((0.0..=1.0 + 1e-10).contains(&q));
        }
        let product = named_state(NamedState::PlusProduct, 4, 3).unwrap();
        assert!(q_linear_entropy(&product).unwrap().abs() <= TOL);
    }

    #[test]
    fn projected_q_reduces_to_total_for_two_sector_partitions() {
        for seed in 0..5 {
            let psi = haar_random(3, 4, 900 + seed).unwrap();
            let part = ChargePartition::from_dims(4, &[2, 2]).unwrap();
            let q_prime = projected_q(&psi, &part, 0, 1).unwrap();
            let total = q_linear_entropy(&psi).unwrap();
            assert!((q_prime - total).abs() <= 1e-10);
        }
    }

    #[test]
    fn projected_q_matches_decomposition_parts() {
        for seed in 0..10 {
            let psi = haar_random(3, 4, 950 + seed).unwrap();
            let part = ChargePartition::from_dims(4, &[2, 1, 1]).unwrap();
            let dec = decompose(&psi, &part).unwrap();
            for (mu, nu) in part.sector_pairs() {
                let q_prime = projected_q(&psi, &part, mu, nu).unwrap();
                let expected = dec.q_sector[mu] + dec.q_sector[nu] + dec.q_interference[&(mu, nu)];
                assert!(
                    (q_prime - expected).abs() <= 1e-10,
                    "seed={seed} pair=({mu},{nu})"
                );
            }
        }
    }

    #[test]
    fn projected_q_on_unit_sectors_is_pure_interference() {
        // diagonal-RDM state with d_mu = d_nu = 1: Q' collapses to Q_munu
        let ghz = named_state(NamedState::Ghz, 3, 3).unwrap();
        let part = ChargePartition::from_dims(3, &[1, 1, 1]).unwrap();
        let dec = decompose(&ghz, &part).unwrap();
        let q_prime = projected_q(&ghz, &part, 0, 1).unwrap();
        assert!((q_prime - dec.q_interference[&(0, 1)]).abs() <= 1e-10);
    }

    #[test]
    fn projected_q_rejects_equal_sectors() {
        let psi = named_state(NamedState::Ghz, 3, 2).unwrap();
        let part = ChargePartition::from_dims(2, &[1, 1]).unwrap();
        assert!(matches!(
            projected_q(&psi, &part, 1, 1),
            Err(SrqError::Domain(_))
        ));
    }

    #[test]
    fn decompose_accepts_rotated_families() {
        // the sum rule only needs the projector axioms, not a diagonal basis
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let d = 3;
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..d {
            let mut v: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            for prev in &cols {
                let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        let mut u = ComplexMatrix::zeros(d, d);
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                u.set(i, j, *z);
            }
        }

        let part = ChargePartition::from_dims(3, &[2, 1]).unwrap();
        let rotated = projectors(&part).rotated(&u).unwrap();
        for seed in 0..5 {
            let psi = haar_random(3, 3, 1200 + seed).unwrap();
            let dec = decompose_with_family(&psi, &rotated).unwrap();
            assert!(dec.sum_rule_residual <= SUM_RULE_TOL);
            assert!((dec.q_total - q_linear_entropy(&psi).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn decompose_rejects_mismatched_partition() {
        let psi = named_state(NamedState::Ghz, 3, 2).unwrap();
        let part = ChargePartition::from_dims(3, &[2, 1]).unwrap();
        assert!(matches!(decompose(&psi, &part), Err(SrqError::Domain(_))));
    }
}
