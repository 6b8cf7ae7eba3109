//! Christoffel coefficients, torsion and metricity residuals, curvature and
//! the vacuum field-equation residuals.

use crate::error::{Error, Result};
use crate::etalinalg::SignatureMatrix;
use crate::framebundle::{metric_from_vielbein, MetricJet2, VielbeinJet1};
use serde::Serialize;

/// Christoffel-type coefficients. Convention: upper index first,
/// `gamma[mu][rho][sigma]` is Gamma^mu_{rho sigma}; on frame jets the second
/// lower index is the derivative direction (Gamma^mu_{rho sigma} =
/// -e^k_rho e^mu_{k sigma}). The optional derivative block stores
/// `dgamma[mu][rho][sigma][beta]` = d Gamma^mu_{rho sigma} / d x^beta.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    m: usize,
    gamma: Vec<f64>,
    dgamma: Option<Vec<f64>>,
}

impl ConnectionCoeffs {
    pub fn new(m: usize, gamma: Vec<f64>, dgamma: Option<Vec<f64>>) -> Result<Self> {
        if gamma.len() != m * m * m {
            return Err(Error::domain("connection coefficients have wrong shape"));
        }
        if let Some(d) = &dgamma {
            if d.len() != m * m * m * m {
                return Err(Error::domain("connection derivatives have wrong shape"));
            }
        }
        if gamma.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("connection coefficients must be finite"));
        }
        Ok(ConnectionCoeffs { m, gamma, dgamma })
    }

    pub fn zero(m: usize) -> Self {
        ConnectionCoeffs {
            m,
            gamma: vec![0.0; m * m * m],
            dgamma: Some(vec![0.0; m * m * m * m]),
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn dgamma(&self) -> Option<&[f64]> {
        self.dgamma.as_deref()
    }

    pub fn at(&self, mu: usize, rho: usize, sigma: usize) -> f64 {
        self.gamma[(mu * self.m + rho) * self.m + sigma]
    }

    pub fn d_at(&self, mu: usize, rho: usize, sigma: usize, beta: usize) -> f64 {
        let m = self.m;
        self.dgamma.as_ref().expect("dgamma absent")[((mu * m + rho) * m + sigma) * m + beta]
    }

    /// Max deviation from symmetry in the lower index pair.
    pub fn torsion_deviation(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0f64;
        for mu in 0..m {
            for rho in 0..m {
                for sigma in (rho + 1)..m {
                    worst = worst.max((self.at(mu, rho, sigma) - self.at(mu, sigma, rho)).abs());
                }
            }
        }
        worst
    }
}

/// Named residual tensor with norms against a tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub name: String,
    #[serde(skip)]
    pub tensor: Vec<f64>,
    #[serde(skip)]
    pub shape: Vec<usize>,
    pub max_abs: f64,
    pub frobenius: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, tensor: Vec<f64>, shape: Vec<usize>, tol: f64) -> Self {
        let max_abs = tensor.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let frobenius = tensor.iter().map(|x| x * x).sum::<f64>().sqrt();
        ResidualReport {
            name: name.into(),
            tensor,
            shape,
            max_abs,
            frobenius,
            tolerance: tol,
            pass: max_abs <= tol,
        }
    }
}

/// Gamma^mu_{rho sigma} = -e^k_rho e^mu_{k sigma}.
pub fn christoffel_from_jet(v: &VielbeinJet1) -> Result<ConnectionCoeffs> {
    let m = v.dim();
    let ei = v.inverse_frame()?;
    let mut gamma = vec![0.0; m * m * m];
    for mu in 0..m {
        for rho in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s -= ei[k * m + rho] * v.de_at(k, mu, sigma);
                }
                gamma[(mu * m + rho) * m + sigma] = s;
            }
        }
    }
    ConnectionCoeffs::new(m, gamma, None)
}

/// Torsion tensor of a frame jet: e^k_mu e^sigma_{k nu} - e^k_nu e^sigma_{k mu},
/// stored tensor[sigma][mu][nu]. Zero exactly on the torsionless submanifold.
pub fn torsion_residual(v: &VielbeinJet1, tol: f64) -> Result<ResidualReport> {
    let m = v.dim();
    let ei = v.inverse_frame()?;
    let mut t = vec![0.0; m * m * m];
    for sigma in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += ei[k * m + mu] * v.de_at(k, sigma, nu)
                        - ei[k * m + nu] * v.de_at(k, sigma, mu);
                }
                t[(sigma * m + mu) * m + nu] = s;
            }
        }
    }
    Ok(ResidualReport::new("torsion", t, vec![m, m, m], tol))
}

/// Metricity tensor
/// tensor[mu][nu][gamma] = g^{mu nu}_gamma
///                         + g^{mu sigma} Gamma^nu_{sigma gamma}
///                         + g^{nu sigma} Gamma^mu_{sigma gamma};
/// the contraction runs over the first lower slot of Gamma so the identity is
/// exact for any vertical (k-valued) correction of the connection.
pub fn metricity_residual(g: &MetricJet2, c: &ConnectionCoeffs, tol: f64) -> ResidualReport {
    let m = g.dim();
    let mut t = vec![0.0; m * m * m];
    for mu in 0..m {
        for nu in 0..m {
            for ga in 0..m {
                let mut s = g.dg_at(mu, nu, ga);
                for sigma in 0..m {
                    s += g.g_at(mu, sigma) * c.at(nu, sigma, ga)
                        + g.g_at(nu, sigma) * c.at(mu, sigma, ga);
                }
                t[(mu * m + nu) * m + ga] = s;
            }
        }
    }
    ResidualReport::new("metricity", t, vec![m, m, m], tol)
}

/// Lowered first derivatives g_{mu nu, sigma} = -g_{mu a} g_{nu b} g^{ab}_sigma.
pub fn lowered_dg(g: &MetricJet2) -> Result<Vec<f64>> {
    let m = g.dim();
    let cov = g.covariant()?;
    let mut out = vec![0.0; m * m * m];
    for mu in 0..m {
        for nu in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        s -= cov[mu * m + a] * cov[nu * m + b] * g.dg_at(a, b, sigma);
                    }
                }
                out[(mu * m + nu) * m + sigma] = s;
            }
        }
    }
    Ok(out)
}

/// Levi-Civita connection of a metric jet. Derivative coefficients are filled
/// in whenever the jet carries second derivatives.
pub fn levi_civita(g: &MetricJet2) -> Result<ConnectionCoeffs> {
    let m = g.dim();
    let cov = g.covariant()?;
    let dcov = lowered_dg(g)?;
    let dc = |mu: usize, nu: usize, s: usize| dcov[(mu * m + nu) * m + s];

    let mut gamma = vec![0.0; m * m * m];
    for sigma in 0..m {
        for mu in 0..m {
            for nu in 0..m {
                let mut s = 0.0;
                for rho in 0..m {
                    s += g.g_at(sigma, rho) * (dc(rho, mu, nu) + dc(rho, nu, mu) - dc(mu, nu, rho));
                }
                gamma[(sigma * m + mu) * m + nu] = 0.5 * s;
            }
        }
    }

    let dgamma = if g.ddg().is_some() {
        // Second derivatives of the covariant block via the product rule on
        // g_{mu nu, sigma} = -g_{mu a} g_{nu b} g^{ab}_sigma.
        let mut ddcov = vec![0.0; m * m * m * m];
        for mu in 0..m {
            for nu in 0..m {
                for sigma in 0..m {
                    for beta in 0..m {
                        let mut s = 0.0;
                        for a in 0..m {
                            for b in 0..m {
                                s -= dc(mu, a, beta) * cov[nu * m + b] * g.dg_at(a, b, sigma)
                                    + cov[mu * m + a] * dc(nu, b, beta) * g.dg_at(a, b, sigma)
                                    + cov[mu * m + a]
                                        * cov[nu * m + b]
                                        * g.ddg_at(a, b, sigma, beta);
                            }
                        }
                        ddcov[((mu * m + nu) * m + sigma) * m + beta] = s;
                    }
                }
            }
        }
        let ddc = |mu: usize, nu: usize, s: usize, b: usize| ddcov[((mu * m + nu) * m + s) * m + b];
        let mut dgamma = vec![0.0; m * m * m * m];
        for sigma in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    for beta in 0..m {
                        let mut s = 0.0;
                        for rho in 0..m {
                            s += g.dg_at(sigma, rho, beta)
                                * (dc(rho, mu, nu) + dc(rho, nu, mu) - dc(mu, nu, rho));
                            s += g.g_at(sigma, rho)
                                * (ddc(rho, mu, nu, beta) + ddc(rho, nu, mu, beta)
                                    - ddc(mu, nu, rho, beta));
                        }
                        dgamma[((sigma * m + mu) * m + nu) * m + beta] = 0.5 * s;
                    }
                }
            }
        }
        Some(dgamma)
    } else {
        None
    };

    ConnectionCoeffs::new(m, gamma, dgamma)
}

/// Ricci tensor
/// R_{mu nu} = d Gamma^b_{mu nu}/dx^b - d Gamma^b_{mu b}/dx^nu
///             + Gamma^b_{sigma b} Gamma^sigma_{mu nu}
///             - Gamma^b_{sigma nu} Gamma^sigma_{mu b},
/// exactly in this index arrangement with no symmetrization.
pub fn ricci(c: &ConnectionCoeffs) -> Result<Vec<f64>> {
    let m = c.dim();
    if c.dgamma().is_none() {
        return Err(Error::MissingDgamma);
    }
    let mut r = vec![0.0; m * m];
    for mu in 0..m {
        for nu in 0..m {
            let mut s = 0.0;
            for b in 0..m {
                s += c.d_at(b, mu, nu, b) - c.d_at(b, mu, b, nu);
                for sigma in 0..m {
                    s += c.at(b, sigma, b) * c.at(sigma, mu, nu)
                        - c.at(b, sigma, nu) * c.at(sigma, mu, b);
                }
            }
            r[mu * m + nu] = s;
        }
    }
    Ok(r)
}

/// Scalar curvature g^{mu nu} R_{mu nu}.
pub fn scalar_curvature(g: &MetricJet2, ricci_tensor: &[f64]) -> f64 {
    let m = g.dim();
    let mut s = 0.0;
    for mu in 0..m {
        for nu in 0..m {
            s += g.g_at(mu, nu) * ricci_tensor[mu * m + nu];
        }
    }
    s
}

/// Ricci of the Levi-Civita connection; vanishes exactly on vacuum solutions.
pub fn vacuum_einstein_residual(g: &MetricJet2, tol: f64) -> Result<ResidualReport> {
    let m = g.dim();
    if g.ddg().is_none() {
        return Err(Error::MissingDdg);
    }
    let lc = levi_civita(g)?;
    let r = ricci(&lc)?;
    Ok(ResidualReport::new("einstein", r, vec![m, m], tol))
}

/// The four residual families of the first-order field equations on a frame
/// jet: curvature of the connection, compatibility of the connection with the
/// frame jet, torsion and metricity.
///
/// `frame_dgamma` supplies x-derivatives of the frame-induced Christoffels
/// (needed for the curvature family when no independent connection is given).
pub fn palatini_residual(
    v: &VielbeinJet1,
    eta: &SignatureMatrix,
    frame_dgamma: Option<&[f64]>,
    c_independent: Option<&ConnectionCoeffs>,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let m = v.dim();
    let frame_gamma = christoffel_from_jet(v)?;

    let effective: ConnectionCoeffs = match c_independent {
        Some(c) => c.clone(),
        None => {
            let d = frame_dgamma.ok_or(Error::MissingDgamma)?;
            ConnectionCoeffs::new(m, frame_gamma.gamma().to_vec(), Some(d.to_vec()))?
        }
    };

    let ricci_tensor = ricci(&effective)?;
    let ricci_report = ResidualReport::new("ricci", ricci_tensor, vec![m, m], tol);

    let compat: Vec<f64> = effective
        .gamma()
        .iter()
        .zip(frame_gamma.gamma().iter())
        .map(|(a, b)| a - b)
        .collect();
    let compat_report = ResidualReport::new("compatibility", compat, vec![m, m, m], tol);

    let torsion_report = torsion_residual(v, tol)?;

    let g = metric_from_vielbein(v, eta);
    let metricity_report = metricity_residual(&g, &effective, tol);

    Ok(vec![
        ricci_report,
        compat_report,
        torsion_report,
        metricity_report,
    ])
}
