use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::cubic::{trig_cubic_roots, CubicCoeffs};
use crate::error::{Error, Result};
use crate::fock::PassageState;

/// Eigenvalues down to this are clipped to zero; anything lower is rejected.
pub const EIGEN_CLIP: f64 = 1e-10;

/// Gap under which two trig-cubic eigenvalues are re-resolved by deflation.
const CLUSTER_GAP: f64 = 1e-4;

/// Population inversion `(rho_ee + rho_ii) - rho_gg`.
pub fn inversion(state: &PassageState) -> f64 {
    let excited: f64 = state.a.iter().chain(&state.b).map(|z| z.norm_sqr()).sum();
    let ground: f64 = state.c.iter().map(|z| z.norm_sqr()).sum();
    excited - ground
}

/// Reduced atomic state in the ordered basis `(e, i, g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomDensityMatrix {
    pub entries: Matrix3<Complex64>,
}

impl AtomDensityMatrix {
    /// Validates hermiticity (1e-12) and unit trace (1e-10).
    pub fn new(entries: Matrix3<Complex64>) -> Result<Self> {
        let herm = (entries - entries.adjoint()).iter().fold(0f64, |m, z| m.max(z.norm()));
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace} is not 1")));
        }
        Ok(AtomDensityMatrix { entries })
    }

    pub fn ee(&self) -> f64 {
        self.entries[(0, 0)].re
    }
    pub fn ii(&self) -> f64 {
        self.entries[(1, 1)].re
    }
    pub fn gg(&self) -> f64 {
        self.entries[(2, 2)].re
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (self.entries * self.entries).trace().re
    }

    /// Characteristic-polynomial coefficients `(beta1, beta2, beta3)` of
    /// `gamma^3 + beta1 gamma^2 + beta2 gamma + beta3`.
    pub fn betas(&self) -> (f64, f64, f64) {
        let r = |i: usize, j: usize| self.entries[(i, j)];
        let (ee, ei, eg) = (r(0, 0), r(0, 1), r(0, 2));
        let (ie, ii, ig) = (r(1, 0), r(1, 1), r(1, 2));
        let (ge, gi, gg) = (r(2, 0), r(2, 1), r(2, 2));
        let beta1 = -(ee + ii + gg);
        let beta2 = ee * ii + ii * gg + gg * ee - ei * ie - ig * gi - ge * eg;
        let beta3 = -ee * ii * gg - ei * ig * ge - eg * gi * ie + ee * ig * gi + ii * ge * eg + gg * ei * ie;
        (beta1.re, beta2.re, beta3.re)
    }
}

/// Builds every element from the amplitudes, e.g. `rho_eg = sum_n A(n+1) C*(n+1)`.
pub fn reduced_rho(state: &PassageState) -> AtomDensityMatrix {
    let levels = state.levels();
    let zero = Complex64::new(0.0, 0.0);
    let (mut ee, mut ii, mut gg) = (0.0, 0.0, 0.0);
    let (mut ei, mut eg, mut ig) = (zero, zero, zero);
    for n in 0..levels {
        ee += state.a[n].norm_sqr();
        ii += state.b[n].norm_sqr();
        gg += state.c[n].norm_sqr();
        ei += state.a[n] * state.b[n].conj();
        if n + 1 < levels {
            // c[n] holds C(n+1), which pairs with A(n+1) and B(n+1)
            eg += state.a[n + 1] * state.c[n].conj();
            ig += state.b[n + 1] * state.c[n].conj();
        }
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    #[rustfmt::skip]
    let entries = Matrix3::new(
        re(ee),     ei,         eg,
        ei.conj(),  re(ii),     ig,
        eg.conj(),  ig.conj(),  re(gg),
    );
    AtomDensityMatrix { entries }
}

/// `-sum gamma ln gamma` with `0 ln 0 = 0`; eigenvalues in `(-1e-10, 0)` are clipped.
pub fn shannon_of_spectrum(gammas: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &g in gammas {
        if !(g >= -EIGEN_CLIP) {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {g:e} is negative")));
        }
        if g > 1.0 + EIGEN_CLIP {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {g} exceeds 1")));
        }
        if g > 0.0 {
            s -= g * g.ln();
        }
    }
    Ok(s)
}

/// Bilinear cross product: `u . (u x w) = 0` without conjugation.
fn cross(u: &Vector3<Complex64>, w: &Vector3<Complex64>) -> Vector3<Complex64> {
    Vector3::new(
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    )
}

/// Re-resolves a clustered eigenvalue pair on the complement of the isolated
/// eigenvector. `gammas` is sorted ascending.
fn refine_cluster(rho: &Matrix3<Complex64>, gammas: [f64; 3]) -> [f64; 3] {
    let low_pair = gammas[1] - gammas[0] < CLUSTER_GAP;
    let high_pair = gammas[2] - gammas[1] < CLUSTER_GAP;
    let isolated = match (low_pair, high_pair) {
        (true, false) => 2,
        (false, true) => 0,
        _ => return gammas,
    };
    let lambda = gammas[isolated];
    let m = rho - Matrix3::from_diagonal_element(Complex64::new(lambda, 0.0));
    let rows: Vec<Vector3<Complex64>> = (0..3).map(|i| m.row(i).transpose()).collect();
    let v = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])]
        .into_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let vn = v.norm();
    if !(vn > 1e-30) {
        return gammas;
    }
    let v = v / Complex64::new(vn, 0.0);
    let k = (0..3).min_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())).unwrap();
    let mut u2 = Vector3::zeros();
    u2[k] = Complex64::new(1.0, 0.0);
    u2 -= v * v[k].conj();
    let u2 = u2 / Complex64::new(u2.norm(), 0.0);
    let u3 = cross(&v, &u2).map(|z| z.conj());
    let u3 = u3 / Complex64::new(u3.norm(), 0.0);
    let a = (u2.adjoint() * rho * u2)[0].re;
    let d = (u3.adjoint() * rho * u3)[0].re;
    let b = (u2.adjoint() * rho * u3)[0];
    let mid = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b.norm());
    let mut out = [lambda, mid - rad, mid + rad];
    out.sort_by(|x, y| x.total_cmp(y));
    out
}

/// Eigenvalues of the reduced atomic state from the trigonometric cubic solution.
pub fn atom_spectrum_cubic(rho: &AtomDensityMatrix) -> Result<[f64; 3]> {
    let (b1, b2, b3) = rho.betas();
    let roots = trig_cubic_roots(CubicCoeffs::new(b1, b2, b3)).map_err(|e| match e {
        Error::InvalidParameters(msg) => Error::InvalidDensityMatrix(msg),
        other => other,
    })?;
    Ok(refine_cluster(&rho.entries, roots.mu))
}

/// Von Neumann entropy of the atom via the trigonometric eigenvalue formula.
pub fn entropy_cubic(rho: &AtomDensityMatrix) -> Result<f64> {
    shannon_of_spectrum(&atom_spectrum_cubic(rho)?)
}

/// Von Neumann entropy of the field, from the spectrum of the 3x3 Gram matrix of
/// the conditional field vectors `(A_n)`, `(B_n)`, `(C_{n+1})`.
pub fn entropy_field(state: &PassageState) -> Result<f64> {
    let comps = state.field_components();
    let mut gram = Matrix3::<Complex64>::zeros();
    for k in 0..3 {
        for l in k..3 {
            let g: Complex64 = comps[k].iter().zip(&comps[l]).map(|(x, y)| x.conj() * y).sum();
            gram[(k, l)] = g;
            gram[(l, k)] = g.conj();
        }
    }
    let eig = SymmetricEigen::new(gram);
    shannon_of_spectrum(eig.eigenvalues.as_slice())
}
