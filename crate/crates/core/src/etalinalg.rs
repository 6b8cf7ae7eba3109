//! Linear algebra relative to a diagonal signature matrix eta: the k/p split
//! of square matrices, the generalized polar decomposition, the distinguished
//! vielbein square root, and the three-index symmetry solver.

use crate::error::{Error, Result};
use crate::numkit::matrix::{identity, mat_inv, mat_mul, max_abs_diff, norm_inf, transpose};
use crate::numkit::Scalar;
use nalgebra::DMatrix;

/// Diagonal signature matrix with entries +-1. It is its own inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMatrix {
    diag: Vec<f64>,
}

impl SignatureMatrix {
    /// diag(-1, 1, ..., 1).
    pub fn lorentzian(m: usize) -> Self {
        let mut diag = vec![1.0; m];
        diag[0] = -1.0;
        SignatureMatrix { diag }
    }

    pub fn euclidean(m: usize) -> Self {
        SignatureMatrix { diag: vec![1.0; m] }
    }

    pub fn from_diag(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|&d| d != 1.0 && d != -1.0) {
            return Err(Error::domain("signature entries must be +1 or -1"));
        }
        Ok(SignatureMatrix { diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            0.0
        }
    }

    /// Dense m*m matrix of eta (equal to its inverse).
    pub fn dense(&self) -> Vec<f64> {
        let m = self.dim();
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = self.diag[i];
        }
        a
    }

    /// eta * a (row scaling).
    pub fn left_mul(&self, a: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut out = a.to_vec();
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] *= self.diag[i];
            }
        }
        out
    }

    /// a * eta (column scaling).
    pub fn right_mul(&self, a: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut out = a.to_vec();
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] *= self.diag[j];
            }
        }
        out
    }

    /// eta * a with generic scalar entries.
    pub fn left_mul_s<S: Scalar>(&self, a: &[S]) -> Vec<S> {
        let m = self.dim();
        let mut out = a.to_vec();
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = out[i * m + j].clone() * S::from_f64(self.diag[i]);
            }
        }
        out
    }
}

/// Element of the Lie algebra k of the eta-preserving subgroup K.
#[derive(Debug, Clone, PartialEq)]
pub struct KAlgebraElement {
    xi: Vec<f64>,
    m: usize,
}

impl KAlgebraElement {
    /// Validates xi^T eta + eta xi = 0.
    pub fn new(xi: Vec<f64>, eta: &SignatureMatrix, tol: f64) -> Result<Self> {
        let m = eta.dim();
        if xi.len() != m * m {
            return Err(Error::domain("k-algebra element has wrong shape"));
        }
        let lhs = {
            let xit_eta = eta.right_mul(&transpose(m, &xi));
            let eta_xi = eta.left_mul(&xi);
            xit_eta
                .iter()
                .zip(eta_xi.iter())
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max)
        };
        if lhs > tol {
            return Err(Error::domain(format!(
                "matrix is not in the k algebra (deviation {lhs:.3e})"
            )));
        }
        Ok(KAlgebraElement { xi, m })
    }

    /// Projects an arbitrary matrix onto k and wraps it.
    pub fn project(a: &[f64], eta: &SignatureMatrix) -> Self {
        let (k, _) = cartan_split(a, eta);
        KAlgebraElement {
            xi: k,
            m: eta.dim(),
        }
    }

    pub fn matrix(&self) -> &[f64] {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Group element exp(xi), which lies in K.
    pub fn exp(&self) -> Vec<f64> {
        mat_exp(self.m, &self.xi)
    }
}

/// Split A = A_k + A_p with A_k = (A - eta A^T eta)/2 and A_p = (A + eta A^T eta)/2.
pub fn cartan_split(a: &[f64], eta: &SignatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let m = eta.dim();
    let conj = eta.left_mul(&eta.right_mul(&transpose(m, a)));
    let mut k = vec![0.0; m * m];
    let mut p = vec![0.0; m * m];
    for i in 0..m * m {
        k[i] = 0.5 * (a[i] - conj[i]);
        p[i] = 0.5 * (a[i] + conj[i]);
    }
    (k, p)
}

/// Checks k^T eta k = eta within `tol`.
pub fn is_in_k(k: &[f64], eta: &SignatureMatrix, tol: f64) -> std::result::Result<(), f64> {
    let m = eta.dim();
    let ktek = mat_mul(m, &eta.right_mul(&transpose(m, k)), k);
    // transpose(k) * eta * k: right_mul scales columns of k^T, i.e. rows of k.
    let dev = max_abs_diff(&ktek, &eta.dense());
    if dev <= tol {
        Ok(())
    } else {
        Err(dev)
    }
}

/// Matrix exponential by scaling and squaring with a Taylor tail.
pub fn mat_exp(m: usize, a: &[f64]) -> Vec<f64> {
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * m as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled: Vec<f64> = a.iter().map(|x| x * scale).collect();
    let mut term = identity::<f64>(m);
    let mut sum = identity::<f64>(m);
    for k in 1..=20 {
        term = mat_mul(m, &term, &scaled);
        for t in &mut term {
            *t /= k as f64;
        }
        for (s, t) in sum.iter_mut().zip(term.iter()) {
            *s += t;
        }
        if norm_inf(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = mat_mul(m, &sum, &sum);
    }
    sum
}

/// Outcome of the generalized polar decomposition g = Q s.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    /// eta-isometric factor: Q^T eta Q = eta.
    pub q: Vec<f64>,
    /// eta-selfadjoint factor: eta s symmetric, principal spectrum.
    pub s: Vec<f64>,
}

fn spectrum_check(m: usize, x: &[f64]) -> Result<()> {
    let scale = norm_inf(x).max(1.0);
    let tol = 1e-10 * scale;
    let mat = DMatrix::from_row_slice(m, m, x);
    let eigs = mat.complex_eigenvalues();
    for e in eigs.iter() {
        let on_nonpositive_axis = e.im.abs() <= tol && e.re <= tol;
        let on_imaginary_axis = e.re.abs() <= tol;
        if on_nonpositive_axis || on_imaginary_axis {
            return Err(Error::Spectrum { re: e.re, im: e.im });
        }
    }
    Ok(())
}

/// Scaled distance of the spectrum of eta * g_contra from the forbidden set
/// (nonpositive real axis and imaginary axis). Zero or negative means the
/// polar gauge is unavailable; callers clip chart domains by requiring a
/// positive margin.
pub fn polar_margin(g_contra: &[f64], eta: &SignatureMatrix) -> f64 {
    let m = eta.dim();
    let x = eta.left_mul(g_contra);
    let scale = norm_inf(&x).max(1.0);
    let mat = DMatrix::from_row_slice(m, m, &x);
    let eigs = mat.complex_eigenvalues();
    eigs.iter()
        .map(|e| {
            if e.re > 0.0 {
                // right half plane: distance to the imaginary axis
                e.re
            } else {
                // left half plane: distance to the real axis, capped at zero
                // on the axis itself
                e.im.abs().min(e.re.abs())
            }
        })
        .fold(f64::INFINITY, f64::min)
        / scale
}

/// Iteration scheme for the principal matrix square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtScheme {
    /// Coupled Denman-Beavers iteration (stabilized Newton).
    DenmanBeavers,
    /// Plain Newton iteration X <- (X + X^-1 B)/2 seeded with (B + I)/2.
    NewtonCommuting,
}

/// Principal square root of `b`. Fails with SpectrumError when the iteration
/// does not settle within 100 steps (eigenvalues on the nonpositive axis).
pub fn sqrtm(m: usize, b: &[f64], scheme: SqrtScheme) -> Result<Vec<f64>> {
    let scale = norm_inf(b).max(1.0);
    match scheme {
        SqrtScheme::DenmanBeavers => {
            let mut y = b.to_vec();
            let mut z = identity::<f64>(m);
            for _ in 0..100 {
                let y_inv = mat_inv(m, &y).map_err(|_| bad_sqrt_spectrum(m, b))?;
                let z_inv = mat_inv(m, &z).map_err(|_| bad_sqrt_spectrum(m, b))?;
                let mut y_next = vec![0.0; m * m];
                let mut z_next = vec![0.0; m * m];
                for i in 0..m * m {
                    y_next[i] = 0.5 * (y[i] + z_inv[i]);
                    z_next[i] = 0.5 * (z[i] + y_inv[i]);
                }
                let delta = max_abs_diff(&y_next, &y);
                y = y_next;
                z = z_next;
                if !norm_inf(&y).is_finite() {
                    return Err(bad_sqrt_spectrum(m, b));
                }
                if delta < 1e-15 * scale {
                    let resid = max_abs_diff(&mat_mul(m, &y, &y), b);
                    if resid < 1e-9 * scale {
                        return Ok(y);
                    }
                    return Err(bad_sqrt_spectrum(m, b));
                }
            }
            Err(bad_sqrt_spectrum(m, b))
        }
        SqrtScheme::NewtonCommuting => {
            let mut x: Vec<f64> = b
                .iter()
                .zip(identity::<f64>(m).iter())
                .map(|(bi, ii)| 0.5 * (bi + ii))
                .collect();
            for _ in 0..100 {
                let x_inv = mat_inv(m, &x).map_err(|_| bad_sqrt_spectrum(m, b))?;
                let xib = mat_mul(m, &x_inv, b);
                let mut next = vec![0.0; m * m];
                for i in 0..m * m {
                    next[i] = 0.5 * (x[i] + xib[i]);
                }
                let delta = max_abs_diff(&next, &x);
                x = next;
                if !norm_inf(&x).is_finite() {
                    return Err(bad_sqrt_spectrum(m, b));
                }
                if delta < 1e-15 * scale {
                    let resid = max_abs_diff(&mat_mul(m, &x, &x), b);
                    if resid < 1e-9 * scale {
                        return Ok(x);
                    }
                    return Err(bad_sqrt_spectrum(m, b));
                }
            }
            Err(bad_sqrt_spectrum(m, b))
        }
    }
}

fn bad_sqrt_spectrum(m: usize, b: &[f64]) -> Error {
    let mat = DMatrix::from_row_slice(m, m, b);
    let eigs = mat.complex_eigenvalues();
    let worst = eigs
        .iter()
        .min_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal))
        .copied()
        .unwrap_or_default();
    Error::Spectrum {
        re: worst.re,
        im: worst.im,
    }
}

/// Principal square root over generic scalars (Denman-Beavers); jets converge
/// along with the value part. Assumes the value-part spectrum is admissible.
pub fn sqrtm_generic<S: Scalar>(m: usize, b: &[S]) -> Result<Vec<S>> {
    let scale = b
        .iter()
        .map(|x| x.value().abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut y = b.to_vec();
    let mut z = identity::<S>(m);
    let mut last = f64::INFINITY;
    for _ in 0..100 {
        let y_inv = mat_inv(m, &y)?;
        let z_inv = mat_inv(m, &z)?;
        let mut y_next = Vec::with_capacity(m * m);
        let mut z_next = Vec::with_capacity(m * m);
        let half = S::from_f64(0.5);
        for i in 0..m * m {
            y_next.push(half.clone() * (y[i].clone() + z_inv[i].clone()));
            z_next.push(half.clone() * (z[i].clone() + y_inv[i].clone()));
        }
        let delta = y
            .iter()
            .zip(y_next.iter())
            .map(|(a, b)| jet_abs_diff(a, b))
            .fold(0.0, f64::max);
        y = y_next;
        z = z_next;
        if delta < 1e-14 * scale && last < 1e-14 * scale {
            return Ok(y);
        }
        last = delta;
    }
    Err(bad_sqrt_spectrum_values(m, b))
}

fn jet_abs_diff<S: Scalar>(a: &S, b: &S) -> f64 {
    // The full jet distance is not observable through the Scalar trait; the
    // value distance drives convergence and one extra settled sweep is
    // demanded so derivative parts lock in too.
    (a.value() - b.value()).abs()
}

fn bad_sqrt_spectrum_values<S: Scalar>(m: usize, b: &[S]) -> Error {
    let vals: Vec<f64> = b.iter().map(|x| x.value()).collect();
    bad_sqrt_spectrum(m, &vals)
}

/// Generalized polar decomposition of a covariant metric: g = Q s with
/// Q^T eta Q = eta and eta s symmetric, unique with principal spectrum.
///
/// SpectrumError signals that the point lies outside the polar-decomposable
/// neighborhood (eigenvalue of eta g on the nonpositive real axis, or on the
/// imaginary axis where the principal root of (eta g)^2 stops existing).
pub fn generalized_polar_decompose(g_cov: &[f64], eta: &SignatureMatrix) -> Result<PolarFactors> {
    let m = eta.dim();
    if g_cov.len() != m * m {
        return Err(Error::domain("metric has wrong shape"));
    }
    let x = eta.left_mul(g_cov);
    spectrum_check(m, &x)?;
    let b = mat_mul(m, &x, &x);
    let s = sqrtm(m, &b, SqrtScheme::DenmanBeavers)?;
    let s_inv = mat_inv(m, &s).map_err(|_| bad_sqrt_spectrum(m, &b))?;
    let q = mat_mul(m, g_cov, &s_inv);
    Ok(PolarFactors { q, s })
}

/// Residuals of the three polar factor conditions, for tests and diagnostics.
pub fn polar_factor_residuals(
    g_cov: &[f64],
    f: &PolarFactors,
    eta: &SignatureMatrix,
) -> (f64, f64, f64) {
    let m = eta.dim();
    let recomb = max_abs_diff(&mat_mul(m, &f.q, &f.s), g_cov);
    let iso = max_abs_diff(
        &mat_mul(m, &eta.right_mul(&transpose(m, &f.q)), &f.q),
        &eta.dense(),
    );
    let es = eta.left_mul(&f.s);
    let sym = max_abs_diff(&es, &transpose(m, &es));
    (recomb, iso, sym)
}

/// Distinguished (polar-gauge) vielbein for a contravariant metric:
/// the unique e with eta^{kl} e_k^mu e_l^nu = g^{mu nu}, eta e symmetric and
/// principal spectrum. Stored frame-index first: e[k][mu].
pub fn vielbein_from_metric(g_contra: &[f64], eta: &SignatureMatrix) -> Result<Vec<f64>> {
    let m = eta.dim();
    if g_contra.len() != m * m {
        return Err(Error::domain("metric has wrong shape"));
    }
    let x = eta.left_mul(g_contra);
    spectrum_check(m, &x)?;
    sqrtm(m, &x, SqrtScheme::DenmanBeavers)
}

/// Same gauge over generic scalars, so frame fields differentiate through it.
pub fn vielbein_from_metric_generic<S: Scalar>(
    g_contra: &[S],
    eta: &SignatureMatrix,
) -> Result<Vec<S>> {
    let m = eta.dim();
    let x = eta.left_mul_s(g_contra);
    let vals: Vec<f64> = x.iter().map(|v| v.value()).collect();
    spectrum_check(m, &vals)?;
    sqrtm_generic(m, &x)
}

/// Unique c with c_{ijk} + s c_{jik} = b_{ijk} and c_{ijk} - s c_{ikj} = a_{ijk},
/// where s is the sign parameter. The data must satisfy the matching symmetry
/// hypotheses b_{ijk} - s b_{jik} = 0 and a_{ijk} + s a_{ikj} = 0.
///
/// The closed form is c_{ijk} = (a_{ijk} + a_{jki} - a_{kij}
///                               + b_{ijk} + b_{kij} - b_{jki}) / 2.
pub fn unique_solution_solver(
    m: usize,
    a: &[f64],
    b: &[f64],
    sign: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    assert!(sign == 1.0 || sign == -1.0, "sign must be +1 or -1");
    let n = m * m * m;
    if a.len() != n || b.len() != n {
        return Err(Error::domain("solver data has wrong shape"));
    }
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                worst_a = worst_a.max((a[idx(i, j, k)] + sign * a[idx(i, k, j)]).abs());
                worst_b = worst_b.max((b[idx(i, j, k)] - sign * b[idx(j, i, k)]).abs());
            }
        }
    }
    if worst_a > tol {
        return Err(Error::Consistency {
            what: "a",
            magnitude: worst_a,
        });
    }
    if worst_b > tol {
        return Err(Error::Consistency {
            what: "b",
            magnitude: worst_b,
        });
    }
    let mut c = vec![0.0; n];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                c[idx(i, j, k)] = 0.5
                    * (a[idx(i, j, k)] + a[idx(j, k, i)] - a[idx(k, i, j)]
                        + b[idx(i, j, k)]
                        + b[idx(k, i, j)]
                        - b[idx(j, k, i)]);
            }
        }
    }
    Ok(c)
}
