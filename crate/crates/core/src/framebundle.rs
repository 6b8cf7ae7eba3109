//! Vielbein and metric jets on a chart, the K-action on frames, the
//! metric-from-vielbein quotient map and adjoint-bundle coordinates.
//!
//! Storage conventions: frames are stored frame-index first, `e[k][mu]`, so a
//! constant gauge transformation acts by a left matrix product. Derivative
//! indices always come last.

use crate::error::{Error, Result};
use crate::etalinalg::{is_in_k, SignatureMatrix};
use crate::numkit::matrix::mat_inv;
use crate::numkit::ChartPoint;

/// Frame components e_k^mu and their first derivatives at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct VielbeinJet1 {
    m: usize,
    /// e[k * m + mu] = e_k^mu
    e: Vec<f64>,
    /// de[(k * m + mu) * m + sigma] = derivative of e_k^mu along x^sigma
    de: Vec<f64>,
    at: ChartPoint,
}

impl VielbeinJet1 {
    pub fn new(e: Vec<f64>, de: Vec<f64>, at: ChartPoint) -> Result<Self> {
        let m = at.dim();
        if e.len() != m * m || de.len() != m * m * m {
            return Err(Error::domain("vielbein jet has wrong shape"));
        }
        let v = VielbeinJet1 { m, e, de, at };
        v.inverse_frame()?;
        Ok(v)
    }

    pub fn identity(at: ChartPoint) -> Self {
        let m = at.dim();
        let mut e = vec![0.0; m * m];
        for k in 0..m {
            e[k * m + k] = 1.0;
        }
        VielbeinJet1 {
            m,
            e,
            de: vec![0.0; m * m * m],
            at,
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self) -> &ChartPoint {
        &self.at
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn de(&self) -> &[f64] {
        &self.de
    }

    pub fn e_at(&self, k: usize, mu: usize) -> f64 {
        self.e[k * self.m + mu]
    }

    pub fn de_at(&self, k: usize, mu: usize, sigma: usize) -> f64 {
        self.de[(k * self.m + mu) * self.m + sigma]
    }

    /// Inverse frame ei[i][mu] = e^i_mu with e^i_mu e_k^mu = delta^i_k.
    pub fn inverse_frame(&self) -> Result<Vec<f64>> {
        inverse_frame_components(self.m, &self.e)
    }

    /// Condition number (infinity norm) of the frame matrix.
    pub fn condition_number(&self) -> f64 {
        match self.inverse_frame() {
            Ok(inv) => mat_norm_inf(self.m, &self.e) * mat_norm_inf(self.m, &inv),
            Err(_) => f64::INFINITY,
        }
    }
}

/// ei[i * m + mu] = e^i_mu, the inverse of the frame array e[k * m + mu].
pub fn inverse_frame_components(m: usize, e: &[f64]) -> Result<Vec<f64>> {
    // As a matrix equation: sum_mu ei[i][mu] e[k][mu] = delta_ik, so the
    // inverse-frame array is the transpose of the matrix inverse of e.
    let inv = mat_inv(m, e).map_err(|_| Error::SingularFrame)?;
    let mut ei = vec![0.0; m * m];
    for i in 0..m {
        for mu in 0..m {
            ei[i * m + mu] = inv[mu * m + i];
        }
    }
    Ok(ei)
}

fn mat_norm_inf(m: usize, a: &[f64]) -> f64 {
    (0..m)
        .map(|i| (0..m).map(|j| a[i * m + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Contravariant metric components with first (and optionally second)
/// coordinate derivatives at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet2 {
    m: usize,
    /// g[mu * m + nu] = g^{mu nu}
    g: Vec<f64>,
    /// dg[(mu * m + nu) * m + sigma]
    dg: Vec<f64>,
    /// ddg[((mu * m + nu) * m + sigma) * m + rho], symmetric in (sigma, rho)
    ddg: Option<Vec<f64>>,
    at: ChartPoint,
}

impl MetricJet2 {
    pub fn new(g: Vec<f64>, dg: Vec<f64>, ddg: Option<Vec<f64>>, at: ChartPoint) -> Result<Self> {
        let m = at.dim();
        if g.len() != m * m || dg.len() != m * m * m {
            return Err(Error::domain("metric jet has wrong shape"));
        }
        if let Some(d) = &ddg {
            if d.len() != m * m * m * m {
                return Err(Error::domain("metric second derivatives have wrong shape"));
            }
        }
        let mut out = MetricJet2 { m, g, dg, ddg, at };
        out.symmetrize();
        mat_inv(m, &out.g).map_err(|_| Error::SingularMetric)?;
        Ok(out)
    }

    fn symmetrize(&mut self) {
        let m = self.m;
        for mu in 0..m {
            for nu in (mu + 1)..m {
                let avg = 0.5 * (self.g[mu * m + nu] + self.g[nu * m + mu]);
                self.g[mu * m + nu] = avg;
                self.g[nu * m + mu] = avg;
                for s in 0..m {
                    let a = 0.5 * (self.dg[(mu * m + nu) * m + s] + self.dg[(nu * m + mu) * m + s]);
                    self.dg[(mu * m + nu) * m + s] = a;
                    self.dg[(nu * m + mu) * m + s] = a;
                }
            }
        }
        if let Some(dd) = &mut self.ddg {
            for mu in 0..m {
                for nu in 0..m {
                    for s in 0..m {
                        for r in (s + 1)..m {
                            let i = ((mu * m + nu) * m + s) * m + r;
                            let j = ((mu * m + nu) * m + r) * m + s;
                            let avg = 0.5 * (dd[i] + dd[j]);
                            dd[i] = avg;
                            dd[j] = avg;
                        }
                    }
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self) -> &ChartPoint {
        &self.at
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn dg(&self) -> &[f64] {
        &self.dg
    }

    pub fn ddg(&self) -> Option<&[f64]> {
        self.ddg.as_deref()
    }

    pub fn g_at(&self, mu: usize, nu: usize) -> f64 {
        self.g[mu * self.m + nu]
    }

    pub fn dg_at(&self, mu: usize, nu: usize, sigma: usize) -> f64 {
        self.dg[(mu * self.m + nu) * self.m + sigma]
    }

    pub fn ddg_at(&self, mu: usize, nu: usize, sigma: usize, rho: usize) -> f64 {
        let m = self.m;
        self.ddg.as_ref().expect("ddg absent")[((mu * m + nu) * m + sigma) * m + rho]
    }

    /// Covariant components (matrix inverse of the contravariant block).
    pub fn covariant(&self) -> Result<Vec<f64>> {
        mat_inv(self.m, &self.g).map_err(|_| Error::SingularMetric)
    }

    /// Verifies the eigenvalue signs of g match the signature of eta.
    pub fn check_signature(&self, eta: &SignatureMatrix) -> Result<()> {
        let m = self.m;
        let mat = nalgebra::DMatrix::from_row_slice(m, m, &self.g);
        let eig = mat.symmetric_eigenvalues();
        let neg_expected = eta.diag().iter().filter(|&&d| d < 0.0).count();
        let neg_found = eig.iter().filter(|&&v| v < 0.0).count();
        let zero_found = eig.iter().filter(|&&v| v == 0.0).count();
        if zero_found > 0 || neg_found != neg_expected {
            return Err(Error::domain(format!(
                "metric signature mismatch: expected {neg_expected} negative directions, found {neg_found}"
            )));
        }
        Ok(())
    }
}

/// Vertical k-valued coordinates A^mu_{rho sigma} of the adjoint-bundle
/// factor; the last index is the base direction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointCoeffs {
    m: usize,
    /// a[(mu * m + rho) * m + sigma] = A^mu_{rho sigma}
    a: Vec<f64>,
}

impl AdjointCoeffs {
    /// Validates the verticality constraint
    /// g^{sigma alpha} A^rho_{alpha s} + g^{rho alpha} A^sigma_{alpha s} = 0.
    pub fn new(a: Vec<f64>, g: &MetricJet2, tol: f64) -> Result<Self> {
        let m = g.dim();
        if a.len() != m * m * m {
            return Err(Error::domain("adjoint coefficients have wrong shape"));
        }
        let out = AdjointCoeffs { m, a };
        let dev = out.verticality_residual(g);
        if dev > tol {
            return Err(Error::domain(format!(
                "adjoint coefficients are not vertical (deviation {dev:.3e})"
            )));
        }
        Ok(out)
    }

    pub fn zero(m: usize) -> Self {
        AdjointCoeffs {
            m,
            a: vec![0.0; m * m * m],
        }
    }

    pub fn from_raw(m: usize, a: Vec<f64>) -> Self {
        AdjointCoeffs { m, a }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn raw(&self) -> &[f64] {
        &self.a
    }

    pub fn at(&self, mu: usize, rho: usize, sigma: usize) -> f64 {
        self.a[(mu * self.m + rho) * self.m + sigma]
    }

    pub fn verticality_residual(&self, g: &MetricJet2) -> f64 {
        let m = self.m;
        let mut worst = 0.0f64;
        for sigma in 0..m {
            for rho in 0..m {
                for s in 0..m {
                    let mut sum = 0.0;
                    for alpha in 0..m {
                        sum += g.g_at(sigma, alpha) * self.at(rho, alpha, s)
                            + g.g_at(rho, alpha) * self.at(sigma, alpha, s);
                    }
                    worst = worst.max(sum.abs());
                }
            }
        }
        worst
    }
}

/// Quotient map to metric data: g^{mu nu} = eta^{kl} e_k^mu e_l^nu together
/// with its first-order jet part. A first-order frame jet cannot produce
/// second derivatives, so the result carries none.
pub fn metric_from_vielbein(v: &VielbeinJet1, eta: &SignatureMatrix) -> MetricJet2 {
    let m = v.dim();
    let mut g = vec![0.0; m * m];
    let mut dg = vec![0.0; m * m * m];
    for mu in 0..m {
        for nu in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += eta.diag()[k] * v.e_at(k, mu) * v.e_at(k, nu);
            }
            g[mu * m + nu] = s;
            for sigma in 0..m {
                let mut d = 0.0;
                for k in 0..m {
                    d += eta.diag()[k]
                        * (v.de_at(k, mu, sigma) * v.e_at(k, nu)
                            + v.e_at(k, mu) * v.de_at(k, nu, sigma));
                }
                dg[(mu * m + nu) * m + sigma] = d;
            }
        }
    }
    MetricJet2 {
        m,
        g,
        dg,
        ddg: None,
        at: v.at().clone(),
    }
}

/// Right action of a constant gauge transformation k on the frame index:
/// e'_j^mu = e_l^mu k^l_j, and de transforms the same way.
pub fn k_action(v: &VielbeinJet1, k: &[f64], eta: &SignatureMatrix) -> Result<VielbeinJet1> {
    let m = v.dim();
    if k.len() != m * m {
        return Err(Error::domain("gauge matrix has wrong shape"));
    }
    if let Err(dev) = is_in_k(k, eta, 1e-10) {
        return Err(Error::NotInK { deviation: dev });
    }
    let mut e = vec![0.0; m * m];
    let mut de = vec![0.0; m * m * m];
    for j in 0..m {
        for mu in 0..m {
            let mut s = 0.0;
            for l in 0..m {
                s += k[l * m + j] * v.e_at(l, mu);
            }
            e[j * m + mu] = s;
            for sigma in 0..m {
                let mut d = 0.0;
                for l in 0..m {
                    d += k[l * m + j] * v.de_at(l, mu, sigma);
                }
                de[(j * m + mu) * m + sigma] = d;
            }
        }
    }
    VielbeinJet1::new(e, de, v.at().clone())
}

/// Adjoint-bundle coordinates of the vertical vector generated by B at the
/// frame e: A^sigma_rho = -e^i_rho B_i^j e_j^sigma, returned with the upper
/// index first, A[sigma * m + rho].
pub fn adjoint_coords(m: usize, e: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let ei = inverse_frame_components(m, e)?;
    let mut a = vec![0.0; m * m];
    for up in 0..m {
        for lo in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                for l in 0..m {
                    s -= e[k * m + up] * b[k * m + l] * ei[l * m + lo];
                }
            }
            a[up * m + lo] = s;
        }
    }
    Ok(a)
}

/// Max deviation of the 2-index verticality identity
/// g^{rho alpha} A^sigma_alpha + g^{sigma alpha} A^rho_alpha = 0.
pub fn adjoint_verticality_residual(m: usize, a: &[f64], g: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for rho in 0..m {
        for sigma in 0..m {
            let mut s = 0.0;
            for alpha in 0..m {
                s += g[rho * m + alpha] * a[sigma * m + alpha]
                    + g[sigma * m + alpha] * a[rho * m + alpha];
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}
