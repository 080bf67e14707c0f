//! Runtime self-check: every invariant of the library, bundled into named
//! suites with pass/fail counts. Backs the `validate` CLI subcommand.
//!
//! Grids shrink automatically under a reduced dimension cap so the suites
//! stay runnable in constrained environments.

use num_complex::Complex64;

use crate::circuit::{ancilla_statistics, interference_trace, run_interference_circuit};
use crate::entanglement::{
    decompose_from_rdms, interference_rdm, q_linear_entropy, q_wedge, sector_rdm, wedge_distance,
};
use crate::error::Result;
use crate::haar::{correction_factor, expected_q_interference, expected_q_sector};
use crate::linalg::{f2, partial_trace_raw, partial_trace_single_site, ComplexMatrix};
use crate::states::{child_seed, haar_random_with_cap, hilbert_dim, PureState};
use crate::symmetry::{all_ordered_partitions, projectors, ChargePartition};

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    /// Largest deviation seen, where the suite has a numeric residual.
    pub worst: f64,
    pub detail: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failing_suites(&self) -> Vec<&'static str> {
        self.suites
            .iter()
            .filter(|s| !s.passed())
            .map(|s| s.name)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    pub dim_cap: usize,
    /// Fault injection: feed unsymmetrized RDMs to the identity suites.
    pub skip_symmetrization: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            dim_cap: crate::states::DEFAULT_DIM_CAP,
            skip_symmetrization: false,
        }
    }
}

struct Suite {
    name: &'static str,
    checks: usize,
    failures: usize,
    worst: f64,
    detail: Option<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: 0,
            worst: 0.0,
            detail: None,
        }
    }

    fn check(&mut self, deviation: f64, tol: f64, context: &str) {
        self.checks += 1;
        self.worst = self.worst.max(deviation);
        // NaN deviations must count as failures
        if deviation.is_nan() || deviation > tol {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(format!("{context}: deviation {deviation:e} > {tol:e}"));
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            checks: self.checks,
            failures: self.failures,
            worst: self.worst,
            detail: self.detail,
        }
    }
}

fn rdm(psi: &PureState, site: usize, opts: &ValidateOptions) -> ComplexMatrix {
    if opts.skip_symmetrization {
        partial_trace_raw(psi, site).expect("site in range")
    } else {
        partial_trace_single_site(psi, site).expect("site in range")
    }
}

fn grid(opts: &ValidateOptions, max_n: usize, max_d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for d in 2..=max_d {
            if hilbert_dim(n, d, opts.dim_cap).is_ok() {
                out.push((n, d));
            }
        }
    }
    out
}

/// Runs every suite and returns the per-suite results.
pub fn run_validation(opts: &ValidateOptions) -> Result<ValidationReport> {
    let suites = vec![
        projector_axioms(opts),
        partial_trace_oracle(opts),
        rdm_properties(opts),
        wedge_identity(opts),
        three_way_agreement(opts),
        decomposition_identities(opts),
        vanishing_sectors(opts),
        qubit_determinant_form(opts),
        haar_oracle_consistency(opts),
        circuit_exactness(opts),
        moment_identities(opts),
    ];
    Ok(ValidationReport { suites })
}

fn projector_axioms(_opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("projector-axioms");
    for d in 2..=6 {
        for dims in all_ordered_partitions(d) {
            let part = ChargePartition::from_dims(d, &dims).expect("valid composition");
            let fam = projectors(&part);
            let mut sum = ComplexMatrix::zeros(d, d);
            for (a, p) in fam.projectors().iter().enumerate() {
                let idem = p.mul(p).expect("square").max_abs_diff(p);
                suite.check(idem, 1e-15, &format!("idempotence d={d} {dims:?} a={a}"));
                let rank = (p.trace().re - dims[a] as f64).abs();
                suite.check(rank, 1e-15, &format!("rank d={d} {dims:?} a={a}"));
                for (b, q) in fam.projectors().iter().enumerate() {
                    if a != b {
                        let orth = p
                            .mul(q)
                            .expect("square")
                            .max_abs_diff(&ComplexMatrix::zeros(d, d));
                        suite.check(orth, 1e-15, &format!("orthogonality d={d} {dims:?}"));
                    }
                }
                sum = sum.add(p).expect("same dims");
            }
            let complete = sum.max_abs_diff(&ComplexMatrix::identity(d));
            suite.check(complete, 1e-15, &format!("completeness d={d} {dims:?}"));
        }
    }
    suite.finish()
}

/// Brute-force reference: form the full density matrix and sum over the
/// complementary indices.
fn brute_force_rdm(psi: &PureState, site: usize) -> ComplexMatrix {
    let n = psi.n();
    let d = psi.d();
    let dim = psi.dim();
    let digit = |index: usize, k: usize| -> usize { index / d.pow((n - 1 - k) as u32) % d };
    let amps = psi.amplitudes();
    let mut rho = ComplexMatrix::zeros(d, d);
    for i in 0..dim {
        for j in 0..dim {
            if (0..n)
                .filter(|&k| k != site)
                .all(|k| digit(i, k) == digit(j, k))
            {
                let a = digit(i, site);
                let b = digit(j, site);
                let v = rho.get(a, b) + amps[i] * amps[j].conj();
                rho.set(a, b, v);
            }
        }
    }
    rho
}

fn partial_trace_oracle(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("partial-trace-oracle");
    let mut seed = opts.seed;
    for d in 2..=6usize {
        for n in 1..=8usize {
            let dim = match hilbert_dim(n, d, opts.dim_cap.min(256)) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let _ = dim;
            seed += 1;
            let psi = haar_random_with_cap(n, d, seed, opts.dim_cap.min(256)).expect("in cap");
            for k in 0..n {
                let fast = rdm(&psi, k, opts);
                let slow = brute_force_rdm(&psi, k);
                suite.check(
                    fast.max_abs_diff(&slow),
                    1e-12,
                    &format!("oracle n={n} d={d} k={k}"),
                );
            }
        }
    }
    suite.finish()
}

fn rdm_properties(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("rdm-properties");
    for (i, (n, d)) in grid(opts, 5, 5).into_iter().enumerate() {
        let psi = haar_random_with_cap(n, d, child_seed(opts.seed, i as u64), opts.dim_cap)
            .expect("in cap");
        for k in 0..n {
            let rho = rdm(&psi, k, opts);
            suite.check(
                (rho.trace().re - 1.0).abs(),
                1e-12,
                &format!("trace n={n} d={d}"),
            );
            suite.check(rho.trace().im.abs(), 1e-12, "trace imag");
            suite.check(rho.hermiticity_error(), 1e-12, "hermiticity");
            let purity = rho.trace_product(&rho).expect("square").re;
            suite.check((purity - 1.0).max(0.0), 1e-12, "purity bound");
        }
    }
    suite.finish()
}

fn wedge_identity(opts: &ValidateOptions) -> SuiteResult {
    use rand::{Rng, SeedableRng};
    let mut suite = Suite::new("wedge-fidelity-identity");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(opts.seed);
    for _ in 0..50 {
        let mut draw = || -> Vec<Complex64> {
            let mut v: Vec<Complex64> = (0..8)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            v
        };
        let u = draw();
        let v = draw();
        let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        let lhs = wedge_distance(&u, &v).expect("equal lengths");
        suite.check((lhs - (1.0 - overlap.norm_sqr())).abs(), 1e-12, "D = 1 - F");
    }
    suite.finish()
}

fn three_way_agreement(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("three-way-agreement");
    let part_a = ChargePartition::from_dims(2, &[1, 1]).expect("qubit partition");
    let part_b = ChargePartition::trivial(2).expect("qubit partition");
    for n in 2..=6 {
        if hilbert_dim(n, 2, opts.dim_cap).is_err() {
            continue;
        }
        for trial in 0..20u64 {
            let psi = haar_random_with_cap(
                n,
                2,
                child_seed(opts.seed ^ 0x33, n as u64 * 100 + trial),
                opts.dim_cap,
            )
            .expect("in cap");
            let wedge = q_wedge(&psi).expect("qubits");
            let linear = q_linear_entropy(&psi).expect("n >= 2");
            suite.check(
                (wedge - linear).abs(),
                1e-10,
                &format!("wedge vs linear n={n}"),
            );
            for part in [&part_a, &part_b] {
                let rdms: Vec<_> = (0..n).map(|k| rdm(&psi, k, opts)).collect();
                match decompose_from_rdms(2, &rdms, &projectors(part)) {
                    Ok(dec) => {
                        suite.check((linear - dec.q_total).abs(), 1e-10, "linear vs decompose");
                        suite.check(dec.sum_rule_residual, 1e-10, "sum rule");
                    }
                    Err(e) => suite.check(f64::INFINITY, 1e-10, &format!("decompose failed: {e}")),
                }
            }
        }
    }
    suite.finish()
}

fn decomposition_identities(opts: &ValidateOptions) -> SuiteResult {
    use rand::{Rng, SeedableRng};
    let mut suite = Suite::new("rdm-decomposition-identities");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(opts.seed ^ 0x44);
    let points = grid(opts, 4, 6);
    for trial in 0..60usize {
        let (n, d) = points[rng.random_range(0..points.len())];
        let compositions = all_ordered_partitions(d);
        let dims = compositions[rng.random_range(0..compositions.len())].clone();
        let part = ChargePartition::from_dims(d, &dims).expect("composition");
        let fam = projectors(&part);
        let psi = haar_random_with_cap(
            n,
            d,
            child_seed(opts.seed ^ 0x55, trial as u64),
            opts.dim_cap,
        )
        .expect("in cap");
        for k in 0..n {
            let rho = rdm(&psi, k, opts);
            let purity = rho.trace_product(&rho).expect("square").re;

            // purity relation
            let mut parts = 0.0;
            for p in fam.projectors() {
                let s = sector_rdm(&rho, p).expect("dims");
                parts += s.trace_product(&s).expect("square").re;
            }
            let pairs = part.sector_pairs();
            for &(a, b) in &pairs {
                let int = interference_rdm(
                    &rho,
                    fam.projector(a).expect("index"),
                    fam.projector(b).expect("index"),
                )
                .expect("dims");
                parts += int.trace_product(&int).expect("square").re;
                // interference RDMs are traceless
                suite.check(int.trace().norm(), 1e-12, "traceless interference");
            }
            suite.check(
                (purity - parts).abs(),
                1e-12,
                &format!("purity relation d={d}"),
            );

            // anticommutator cancellation
            for g in 0..fam.len() {
                let s = sector_rdm(&rho, fam.projector(g).expect("index")).expect("dims");
                for &(a, b) in &pairs {
                    let int = interference_rdm(
                        &rho,
                        fam.projector(a).expect("index"),
                        fam.projector(b).expect("index"),
                    )
                    .expect("dims");
                    let anti = s.trace_product(&int).expect("square")
                        + int.trace_product(&s).expect("square");
                    suite.check(anti.norm(), 1e-12, "anticommutator");
                }
            }

            // squared probability normalization
            let p = fam.sector_probabilities(&rho).expect("dims");
            let mut total: f64 = p.iter().map(|x| x * x).sum();
            for &(a, b) in &pairs {
                total += 2.0 * p[a] * p[b];
            }
            suite.check((total - 1.0).abs(), 1e-12, "squared probabilities");
        }

        // sum rule through the full decomposition
        let rdms: Vec<_> = (0..n).map(|k| rdm(&psi, k, opts)).collect();
        match decompose_from_rdms(d, &rdms, &fam) {
            Ok(dec) => suite.check(dec.sum_rule_residual, 1e-10, "sum rule"),
            Err(e) => suite.check(f64::INFINITY, 1e-10, &format!("decompose failed: {e}")),
        }
    }
    suite.finish()
}

fn vanishing_sectors(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("vanishing-unit-sectors");
    let mut trial = 0u64;
    for (n, d) in grid(opts, 4, 5) {
        for dims in all_ordered_partitions(d) {
            if !dims.contains(&1) {
                continue;
            }
            trial += 1;
            let part = ChargePartition::from_dims(d, &dims).expect("composition");
            let psi = haar_random_with_cap(n, d, child_seed(opts.seed ^ 0x66, trial), opts.dim_cap)
                .expect("in cap");
            let rdms: Vec<_> = (0..n).map(|k| rdm(&psi, k, opts)).collect();
            if let Ok(dec) = decompose_from_rdms(d, &rdms, &projectors(&part)) {
                for (q, &dim) in dec.q_sector.iter().zip(&dims) {
                    if dim == 1 {
                        suite.check(q.abs(), 1e-12, &format!("d_alpha=1 in {dims:?}"));
                    }
                }
            }
        }
    }
    suite.finish()
}

fn qubit_determinant_form(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("qubit-determinant-form");
    let part = ChargePartition::from_dims(2, &[1, 1]).expect("qubit partition");
    let fam = projectors(&part);
    for trial in 0..30u64 {
        let n = 2 + (trial % 3) as usize;
        if hilbert_dim(n, 2, opts.dim_cap).is_err() {
            continue;
        }
        let psi = haar_random_with_cap(n, 2, child_seed(opts.seed ^ 0x77, trial), opts.dim_cap)
            .expect("in cap");
        for k in 0..n {
            let rho = rdm(&psi, k, opts);
            for p in fam.projectors() {
                let s = sector_rdm(&rho, p).expect("dims");
                let det = s.get(0, 0) * s.get(1, 1) - s.get(0, 1) * s.get(1, 0);
                let f = f2(&s).expect("square");
                suite.check((f - det).norm(), 1e-12, "f2 = det at d=2");
            }
        }
    }
    suite.finish()
}

fn haar_oracle_consistency(_opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("haar-oracle-consistency");
    for d in 2..=6 {
        for n in 2..=6 {
            let cf = correction_factor(n, d).expect("valid args");
            for dims in all_ordered_partitions(d) {
                let part = ChargePartition::from_dims(d, &dims).expect("composition");
                let total = crate::haar::expected_q_total(n, d, &part).expect("valid args");
                suite.check((total - cf).abs(), 1e-14, &format!("total d={d} {dims:?}"));
            }
        }
        // equipartition ratio cancels the correction factor
        for n in 2..=6 {
            for da in 2..d {
                for db in 1..=(d - da) {
                    let ratio = expected_q_sector(n, d, da).expect("valid")
                        / expected_q_interference(n, d, da, db).expect("valid");
                    let expected = (da as f64 - 1.0) / (2.0 * db as f64);
                    suite.check((ratio - expected).abs(), 1e-14, "equipartition ratio");
                }
            }
        }
        let mut prev = correction_factor(2, d).expect("valid");
        for n in 3..=10 {
            let cf = correction_factor(n, d).expect("valid");
            suite.check(if cf > prev { 0.0 } else { 1.0 }, 0.5, "monotone in n");
            prev = cf;
        }
    }
    suite.finish()
}

fn circuit_exactness(opts: &ValidateOptions) -> SuiteResult {
    use rand::{Rng, SeedableRng};
    let mut suite = Suite::new("circuit-exactness");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(opts.seed ^ 0x88);
    for d in 2..=6usize {
        let compositions: Vec<Vec<usize>> = all_ordered_partitions(d)
            .into_iter()
            .filter(|dims| dims.len() >= 2)
            .collect();
        for _ in 0..20 {
            // random single-site mixed state from a two-site pure state
            let psi = haar_random_with_cap(2, d, rng.random::<u64>(), opts.dim_cap.max(64))
                .expect("in cap");
            let rho = rdm(&psi, 0, opts);
            let dims = compositions[rng.random_range(0..compositions.len())].clone();
            let part = ChargePartition::from_dims(d, &dims).expect("composition");
            let fam = projectors(&part);
            let a = 0;
            let b = 1 + rng.random_range(0..part.num_sectors() - 1);
            let pa = fam.projector(a).expect("index");
            let pb = fam.projector(b).expect("index");
            match run_interference_circuit(&rho, pa, pb) {
                Ok(z) => {
                    let direct = interference_trace(&rho, pa, pb).expect("dims");
                    suite.check((z - direct).abs(), 1e-12, &format!("circuit d={d}"));
                    suite.check((-z).max(0.0), 1e-14, "positivity");
                    match ancilla_statistics(z) {
                        Ok((p0, p1)) => {
                            suite.check((p0 + p1 - 1.0).abs(), 1e-12, "p0 + p1 = 1");
                            suite.check((-p0).max(p0 - 1.0).max(0.0), 0.0, "p0 in [0,1]");
                        }
                        Err(e) => suite.check(f64::INFINITY, 1.0, &format!("statistics: {e}")),
                    }
                }
                Err(e) => suite.check(f64::INFINITY, 1e-12, &format!("circuit failed: {e}")),
            }
        }
    }
    suite.finish()
}

fn moment_identities(opts: &ValidateOptions) -> SuiteResult {
    let mut suite = Suite::new("haar-moment-identities");
    let samples = 10_000usize;
    let dim = 4usize;
    let mut second = vec![Complex64::ZERO; dim * dim];
    let mut second_sq = vec![0.0f64; dim * dim];
    let mut fourth = vec![0.0f64; dim * dim];
    let mut fourth_sq = vec![0.0f64; dim * dim];
    for j in 0..samples {
        let psi = haar_random_with_cap(2, 2, child_seed(opts.seed ^ 0x99, j as u64), opts.dim_cap)
            .expect("small state");
        let q = psi.amplitudes();
        for a in 0..dim {
            for b in 0..dim {
                let v = q[a] * q[b].conj();
                second[a * dim + b] += v;
                second_sq[a * dim + b] += v.norm_sqr();
                let w = q[a].norm_sqr() * q[b].norm_sqr();
                fourth[a * dim + b] += w;
                fourth_sq[a * dim + b] += w * w;
            }
        }
    }
    let m = samples as f64;
    let nn = dim as f64;
    for a in 0..dim {
        for b in 0..dim {
            let mean = second[a * dim + b] / m;
            let var = (second_sq[a * dim + b] / m - mean.norm_sqr()).max(0.0);
            let se = (var / m).sqrt().max(1e-12);
            let theory = if a == b { 1.0 / nn } else { 0.0 };
            suite.check(
                (mean - Complex64::new(theory, 0.0)).norm() / se,
                5.0,
                &format!("second moment ({a},{b})"),
            );
            let mean4 = fourth[a * dim + b] / m;
            let var4 = (fourth_sq[a * dim + b] / m - mean4 * mean4).max(0.0);
            let se4 = (var4 / m).sqrt().max(1e-12);
            let theory4 = if a == b { 2.0 } else { 1.0 } / (nn * (nn + 1.0));
            suite.check(
                (mean4 - theory4).abs() / se4,
                5.0,
                &format!("fourth moment ({a},{b})"),
            );
        }
    }
    suite.finish()
}
