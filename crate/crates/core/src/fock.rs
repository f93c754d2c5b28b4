//! Fock-space building blocks: nonlinearity functions, model parameters,
//! truncated coherent states and the joint atom-field amplitude record.
//!
//! Everything is in scaled units with the second coupling constant set to 1
//! and time measured as `tau = lambda2 * t`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance for field and passage states.
pub const NORM_TOL: f64 = 1e-10;

/// Default Poisson tail tolerance used to pick the Fock cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Smallest cutoff `choose_truncation` ever returns.
pub const MIN_TRUNCATION: usize = 8;

type CustomFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Intensity-dependent coupling profile `f(n)`, so that `R = a f(n)`.
#[derive(Clone)]
pub enum NonlinearityFn {
    /// `f(n) = 1`, the ordinary Jaynes-Cummings coupling.
    ConstantOne,
    /// `f(n) = sqrt(n)`.
    SquareRoot,
    /// Arbitrary real-valued profile.
    Custom { name: String, f: CustomFn },
}

impl NonlinearityFn {
    pub fn custom(name: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        NonlinearityFn::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Evaluates `f(n)`. Custom profiles that return a non-finite value are rejected.
    pub fn eval(&self, n: usize) -> Result<f64> {
        match self {
            NonlinearityFn::ConstantOne => Ok(1.0),
            NonlinearityFn::SquareRoot => Ok((n as f64).sqrt()),
            NonlinearityFn::Custom { name, f } => {
                let v = f(n);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::InvalidParameters(format!(
                        "nonlinearity `{name}` returned {v} at n = {n}"
                    )))
                }
            }
        }
    }

    /// Short label used in config files and manifests.
    pub fn label(&self) -> &str {
        match self {
            NonlinearityFn::ConstantOne => "one",
            NonlinearityFn::SquareRoot => "sqrt",
            NonlinearityFn::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for NonlinearityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearityFn::ConstantOne => f.write_str("ConstantOne"),
            NonlinearityFn::SquareRoot => f.write_str("SquareRoot"),
            NonlinearityFn::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Free function form of [`NonlinearityFn::eval`].
pub fn nonlinearity_eval(f: &NonlinearityFn, n: usize) -> Result<f64> {
    f.eval(n)
}

/// Hamiltonian parameters in units of `lambda2`.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub nonlinearity: NonlinearityFn,
    /// Highest Fock level `n` whose block `(|e,n>, |i,n>, |g,n+1>)` is kept.
    pub n_max: usize,
}

impl ModelParams {
    /// Parameters with `lambda1 / lambda2 = 0.9` and the given detunings.
    pub fn scaled(delta1: f64, delta2: f64, nonlinearity: NonlinearityFn, n_max: usize) -> Self {
        ModelParams {
            lambda1: 0.9,
            lambda2: 1.0,
            delta1,
            delta2,
            nonlinearity,
            n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_couplings()?;
        if self.n_max < 1 {
            return Err(Error::InvalidParameters("n_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks couplings and detunings only; engines size themselves from the field.
    pub fn validate_couplings(&self) -> Result<()> {
        let finite = [self.lambda1, self.lambda2, self.delta1, self.delta2]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameters("non-finite coupling or detuning".into()));
        }
        if self.lambda1 <= 0.0 || self.lambda2 <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "couplings must be positive (lambda1 = {}, lambda2 = {})",
                self.lambda1, self.lambda2
            )));
        }
        Ok(())
    }

    /// `(n+1) f^2(n+1)`, the squared photon factor of block `n`.
    pub fn photon_factor(&self, n: usize) -> Result<f64> {
        let f = self.nonlinearity.eval(n + 1)?;
        Ok((n + 1) as f64 * f * f)
    }

    /// `sqrt(n+1) f(n+1)`, the matrix element of `R` between `|n+1>` and `|n>`.
    pub fn coupling(&self, n: usize) -> Result<f64> {
        let f = self.nonlinearity.eval(n + 1)?;
        Ok(((n + 1) as f64).sqrt() * f)
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        ModelParams {
            n_max,
            ..self.clone()
        }
    }
}

/// Pure single-mode field state in the Fock basis, `coeffs[n] = <n|psi>`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCoeffs {
    coeffs: Vec<Complex64>,
}

impl FieldCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameters("empty field vector".into()));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameters(format!(
                "field vector is not normalized (norm^2 = {norm})"
            )));
        }
        Ok(FieldCoeffs { coeffs })
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalized(mut coeffs: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameters("cannot normalize a zero field vector".into()));
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        Ok(FieldCoeffs { coeffs })
    }

    /// Number state `|n>` embedded in levels `0..=n_max`.
    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidParameters(format!("Fock level {n} exceeds n_max {n_max}")));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Ok(FieldCoeffs { coeffs })
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        FieldCoeffs { coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }
}

/// Joint atom-field amplitudes at one scaled time:
/// `|psi> = sum_n a[n] |e,n> + b[n] |i,n> + c[n] |g,n+1>`.
///
/// Note that `c[n]` holds `C(n+1)`, the amplitude of `|g, n+1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PassageState {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub time: f64,
}

impl PassageState {
    pub fn zeros(levels: usize, time: f64) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); levels];
        PassageState {
            a: z.clone(),
            b: z.clone(),
            c: z,
            time,
        }
    }

    /// Number of blocks, i.e. `n_max + 1`.
    pub fn levels(&self) -> usize {
        self.a.len()
    }

    /// Dimension of the field space the state lives in (levels `0..=n_max+1`).
    pub fn field_dim(&self) -> usize {
        self.levels() + 1
    }

    /// `sum_n |A_n|^2 + |B_n|^2 + |C_{n+1}|^2`.
    pub fn norm_sqr(&self) -> f64 {
        (0..self.levels()).map(|n| self.block_norm_sqr(n)).sum()
    }

    pub fn block_norm_sqr(&self, n: usize) -> f64 {
        self.a[n].norm_sqr() + self.b[n].norm_sqr() + self.c[n].norm_sqr()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > tol {
            return Err(Error::Numerical(format!(
                "passage state at tau = {} has norm^2 {norm}",
                self.time
            )));
        }
        Ok(())
    }

    /// Field vectors conditioned on the atom in `|e>`, `|i>`, `|g>`, each indexed by
    /// photon number over `0..field_dim()`.
    pub fn field_components(&self) -> [Vec<Complex64>; 3] {
        let dim = self.field_dim();
        let zero = Complex64::new(0.0, 0.0);
        let mut e = vec![zero; dim];
        let mut i = vec![zero; dim];
        let mut g = vec![zero; dim];
        for n in 0..self.levels() {
            e[n] = self.a[n];
            i[n] = self.b[n];
            g[n + 1] = self.c[n];
        }
        [e, i, g]
    }
}

/// `ln(n!)` by direct summation.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln` of the Poisson weight `e^{-nbar} nbar^n / n!`; `nbar = 0` is handled exactly.
fn ln_poisson(nbar: f64, n: usize, ln_fact: f64) -> f64 {
    if nbar == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -nbar + n as f64 * nbar.ln() - ln_fact
}

/// Poisson mass strictly above `n_max`, summed term by term.
pub fn poisson_tail(nbar: f64, n_max: usize) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    let mut ln_fact = ln_factorial(n_max);
    let mut tail = 0.0;
    let mut n = n_max;
    loop {
        n += 1;
        ln_fact += (n as f64).ln();
        let term = ln_poisson(nbar, n, ln_fact).exp();
        tail += term;
        // past the mode the terms fall geometrically
        if (n as f64) > nbar && term <= tail * 1e-17 {
            break;
        }
        if term == 0.0 && (n as f64) > nbar {
            break;
        }
    }
    tail
}

/// Smallest cutoff whose Poisson tail mass is below `tail_tol`, never less than
/// [`MIN_TRUNCATION`].
pub fn choose_truncation(nbar: f64, tail_tol: f64) -> Result<usize> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameters(format!("mean photon number {nbar} must be >= 0")));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameters(format!("tail tolerance {tail_tol} not in (0, 1)")));
    }
    let mut n_max = nbar.floor() as usize;
    while poisson_tail(nbar, n_max) >= tail_tol {
        n_max += 1;
    }
    // walk back in case the starting point was already past the answer
    while n_max > 0 && poisson_tail(nbar, n_max - 1) < tail_tol {
        n_max -= 1;
    }
    Ok(n_max.max(MIN_TRUNCATION))
}

/// Closed-form cutoff `ceil(nbar + 10 sqrt(nbar) + 10)`, no search.
pub fn truncation_heuristic(nbar: f64) -> usize {
    (nbar + 10.0 * nbar.sqrt() + 10.0).ceil() as usize
}

/// Coherent state `|alpha>` on levels `0..=n_max`, renormalized over the
/// truncated basis. Fails when the discarded tail mass exceeds `tail_tol`.
pub fn coherent_coeffs(alpha: Complex64, n_max: usize, tail_tol: f64) -> Result<FieldCoeffs> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameters("non-finite coherent amplitude".into()));
    }
    let nbar = alpha.norm_sqr();
    let tail = poisson_tail(nbar, n_max);
    if tail > tail_tol {
        return Err(Error::Truncation(format!(
            "coherent tail mass {tail:e} above n_max = {n_max} exceeds tolerance {tail_tol:e}"
        )));
    }
    let phase = alpha.arg();
    let mut ln_fact = 0.0;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_mag = 0.5 * ln_poisson(nbar, n, ln_fact);
        coeffs.push(Complex64::from_polar(ln_mag.exp(), n as f64 * phase));
    }
    FieldCoeffs::normalized(coeffs)
}
