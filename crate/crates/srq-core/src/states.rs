//! Pure-state construction: seeded Haar-random sampling and named benchmark
//! states, plus the plain-text state file format.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SrqError};

/// Default cap on the Hilbert space dimension `d^n`.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Tolerance for the normalization invariant `sum |q_i|^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Name of the pseudo-random generator behind [`haar_random`], recorded in
/// CSV metadata so ensemble outputs are self-describing.
pub const GENERATOR_NAME: &str = "chacha12";

/// Normalized state of `n` distinguishable `d`-level particles.
///
/// Amplitudes are indexed with site 0 as the most significant digit in base
/// `d`: basis state `|b_0 b_1 ... b_{n-1}>` sits at `sum_k b_k d^(n-1-k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    d: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector, enforcing length `d^n` and unit norm.
    pub fn from_amplitudes(n: usize, d: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n < 1 {
            return Err(SrqError::Domain("particle count must be at least 1".into()));
        }
        if d < 2 {
            return Err(SrqError::Domain(format!(
                "local dimension must be at least 2, got {d}"
            )));
        }
        let dim = hilbert_dim(n, d, usize::MAX)?;
        if amplitudes.len() != dim {
            return Err(SrqError::Dimension(format!(
                "amplitude vector has length {}, expected d^n = {}",
                amplitudes.len(),
                dim
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(SrqError::Domain(format!(
                "state is not normalized: sum |q_i|^2 = {norm_sqr}"
            )));
        }
        Ok(Self { n, d, amplitudes })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Hilbert space dimension `N = d^n`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Checked `d^n`, capped.
pub fn hilbert_dim(n: usize, d: usize, cap: usize) -> Result<usize> {
    let dim = (d as u128)
        .checked_pow(n as u32)
        .ok_or_else(|| SrqError::Resource(format!("d^n overflows for n={n}, d={d}")))?;
    if dim > cap as u128 {
        return Err(SrqError::Resource(format!(
            "d^n = {dim} exceeds the dimension cap {cap} at (n, d) = ({n}, {d})"
        )));
    }
    Ok(dim as usize)
}

/// Child seed for sample `index` of an ensemble keyed by `master`.
///
/// This is the splitmix64 output at stream position `index + 1`, so ensembles
/// can be generated in any order (or concurrently) and still reproduce
/// bit-identically.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-random pure state: independent standard complex Gaussian amplitudes,
/// normalized. This realizes the uniform measure on the unit sphere of the
/// full Hilbert space. Identical `(n, d, seed)` yields bit-identical output.
pub fn haar_random(n: usize, d: usize, seed: u64) -> Result<PureState> {
    haar_random_with_cap(n, d, seed, DEFAULT_DIM_CAP)
}

/// [`haar_random`] with an explicit dimension cap.
pub fn haar_random_with_cap(n: usize, d: usize, seed: u64, cap: usize) -> Result<PureState> {
    if n < 1 {
        return Err(SrqError::Domain("particle count must be at least 1".into()));
    }
    if d < 2 {
        return Err(SrqError::Domain(format!(
            "local dimension must be at least 2, got {d}"
        )));
    }
    let dim = hilbert_dim(n, d, cap)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let mut amplitudes = Vec::with_capacity(dim);
        for _ in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            amplitudes.push(Complex64::new(re, im));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in &mut amplitudes {
                *z /= norm;
            }
            return Ok(PureState { n, d, amplitudes });
        }
        // all-zero draw has probability zero; redraw keeps determinism
    }
}

/// Benchmark states with known entanglement values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    /// `|0...0>`
    ProductZero,
    /// `(|0...0> + |1...1>) / sqrt(2)` using levels 0 and 1 of each qudit
    Ghz,
    /// `(|10...0> + |01...0> + ... + |0...01>) / sqrt(n)`, qubits only
    W,
    /// `(|00> + |11>) / sqrt(2)`, two qubits
    Bell,
    /// Uniform-superposition product `(sum_b |b> / sqrt(d))^(x n)`
    PlusProduct,
}

impl FromStr for NamedState {
    type Err = SrqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product-zero" => Ok(Self::ProductZero),
            "ghz" => Ok(Self::Ghz),
            "w" => Ok(Self::W),
            "bell" => Ok(Self::Bell),
            "plus-product" => Ok(Self::PlusProduct),
            other => Err(SrqError::Domain(format!(
                "unknown state kind '{other}' (expected product-zero, ghz, w, bell, plus-product)"
            ))),
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::ProductZero => "product-zero",
            Self::Ghz => "ghz",
            Self::W => "w",
            Self::Bell => "bell",
            Self::PlusProduct => "plus-product",
        };
        f.write_str(s)
    }
}

/// Builds the standard normalized form of a named state.
pub fn named_state(kind: NamedState, n: usize, d: usize) -> Result<PureState> {
    if n < 1 {
        return Err(SrqError::Domain("particle count must be at least 1".into()));
    }
    if d < 2 {
        return Err(SrqError::Domain(format!(
            "local dimension must be at least 2, got {d}"
        )));
    }
    let dim = hilbert_dim(n, d, DEFAULT_DIM_CAP)?;
    let mut amplitudes = vec![Complex64::ZERO; dim];
    match kind {
        NamedState::ProductZero => {
            amplitudes[0] = Complex64::ONE;
        }
        NamedState::Ghz => {
            let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            // |1...1> in levels {0,1} sits at sum_k d^(n-1-k) = (d^n - 1)/(d - 1)
            amplitudes[0] = inv;
            amplitudes[(dim - 1) / (d - 1)] = inv;
        }
        NamedState::W => {
            if d != 2 {
                return Err(SrqError::Domain(format!(
                    "the W state is defined for qubits (d = 2), got d = {d}"
                )));
            }
            let inv = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            for k in 0..n {
                amplitudes[1 << (n - 1 - k)] = inv;
            }
        }
        NamedState::Bell => {
            if d != 2 || n != 2 {
                return Err(SrqError::Domain(format!(
                    "the Bell state requires n = 2, d = 2, got n = {n}, d = {d}"
                )));
            }
            let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            amplitudes[0] = inv;
            amplitudes[3] = inv;
        }
        NamedState::PlusProduct => {
            let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
            amplitudes.fill(amp);
        }
    }
    PureState::from_amplitudes(n, d, amplitudes)
}

/// Serializes a state in the plain-text format: first line `n d`, then one
/// line `index re im` per nonzero amplitude with 17 significant digits,
/// indices ascending. Omitted indices are zero.
pub fn format_state(psi: &PureState) -> String {
    let mut out = format!("{} {}\n", psi.n(), psi.d());
    for (i, z) in psi.amplitudes().iter().enumerate() {
        if *z != Complex64::ZERO {
            out.push_str(&format!("{} {:.16e} {:.16e}\n", i, z.re, z.im));
        }
    }
    out
}

/// Parses the state file format produced by [`format_state`].
pub fn parse_state(text: &str) -> Result<PureState> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| SrqError::Parse {
        line: 1,
        message: "empty state file".into(),
    })?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_field(parts.next(), 1, "particle count n")?;
    let d: usize = parse_field(parts.next(), 1, "local dimension d")?;
    if parts.next().is_some() {
        return Err(SrqError::Parse {
            line: 1,
            message: "expected exactly two fields: n d".into(),
        });
    }
    if n < 1 || d < 2 {
        return Err(SrqError::Parse {
            line: 1,
            message: format!("invalid header n={n} d={d}"),
        });
    }
    let dim = hilbert_dim(n, d, DEFAULT_DIM_CAP).map_err(|e| SrqError::Parse {
        line: 1,
        message: e.to_string(),
    })?;

    let mut amplitudes = vec![Complex64::ZERO; dim];
    let mut last_index: Option<usize> = None;
    for (lineno, line) in lines {
        let line_number = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let index: usize = parse_field(fields.next(), line_number, "index")?;
        let re: f64 = parse_field(fields.next(), line_number, "real part")?;
        let im: f64 = parse_field(fields.next(), line_number, "imaginary part")?;
        if fields.next().is_some() {
            return Err(SrqError::Parse {
                line: line_number,
                message: "expected exactly three fields: index re im".into(),
            });
        }
        if index >= dim {
            return Err(SrqError::Parse {
                line: line_number,
                message: format!("index {index} out of range for dimension {dim}"),
            });
        }
        if let Some(prev) = last_index {
            if index <= prev {
                return Err(SrqError::Parse {
                    line: line_number,
                    message: format!("indices must be strictly ascending ({prev} then {index})"),
                });
            }
        }
        last_index = Some(index);
        amplitudes[index] = Complex64::new(re, im);
    }
    PureState::from_amplitudes(n, d, amplitudes)
}

fn parse_field<T: FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let raw = field.ok_or_else(|| SrqError::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| SrqError::Parse {
        line,
        message: format!("cannot parse {what} from '{raw}'"),
    })
}

pub fn write_state_file<P: AsRef<Path>>(path: P, psi: &PureState) -> Result<()> {
    fs::write(path, format_state(psi))?;
    Ok(())
}

pub fn read_state_file<P: AsRef<Path>>(path: P) -> Result<PureState> {
    let text = fs::read_to_string(path)?;
    parse_state(&text)
}
