//! The reduction map from frame jets to metric jets, horizontal lifts for the
//! connection on the frame-over-metric bundle, the quotient-coordinates
//! connection formula, and the torsionless vertical-correction solver.

use crate::connections::{ConnectionCoeffs, ResidualReport};
use crate::error::{Error, Result};
use crate::etalinalg::{cartan_split, unique_solution_solver, SignatureMatrix};
use crate::framebundle::{
    inverse_frame_components, metric_from_vielbein, AdjointCoeffs, MetricJet2, VielbeinJet1,
};

/// Christoffel symbols of an auxiliary background connection on the frame
/// bundle. No symmetry is assumed. Stored gammabar[sigma][rho][mu] with the
/// last index the base direction.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundConnection {
    m: usize,
    gammabar: Vec<f64>,
}

impl BackgroundConnection {
    pub fn new(m: usize, gammabar: Vec<f64>) -> Result<Self> {
        if gammabar.len() != m * m * m {
            return Err(Error::domain("background connection has wrong shape"));
        }
        if gammabar.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("background connection must be finite"));
        }
        Ok(BackgroundConnection { m, gammabar })
    }

    /// Flat coordinate connection (all Christoffels zero), the default.
    pub fn flat(m: usize) -> Self {
        BackgroundConnection {
            m,
            gammabar: vec![0.0; m * m * m],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn at(&self, sigma: usize, rho: usize, mu: usize) -> f64 {
        self.gammabar[(sigma * self.m + rho) * self.m + mu]
    }

    /// Local connection functions f^sigma_{k mu} = -e_k^rho Gammabar^sigma_{rho mu}.
    pub fn frame_coefficients(&self, e: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut f = vec![0.0; m * m * m];
        for sigma in 0..m {
            for k in 0..m {
                for mu in 0..m {
                    let mut s = 0.0;
                    for rho in 0..m {
                        s -= e[k * m + rho] * self.at(sigma, rho, mu);
                    }
                    f[(sigma * m + k) * m + mu] = s;
                }
            }
        }
        f
    }
}

/// The reduction map on first jets: identical to the metric-from-vielbein
/// quotient, kept as its own entry point for traceability.
pub fn reduce_f_omega(v: &VielbeinJet1, eta: &SignatureMatrix) -> MetricJet2 {
    metric_from_vielbein(v, eta)
}

/// Shared bracket of the lift and quotient formulas:
/// h[mu][beta][sigma] = dg^{mu beta}_sigma
///                      + g^{alpha mu} Gb^beta_{alpha sigma}
///                      - g^{alpha beta} Gb^mu_{alpha sigma}.
fn lift_bracket(g: &[f64], dg: Option<&MetricJet2>, bc: &BackgroundConnection) -> Vec<f64> {
    let m = bc.dim();
    let mut h = vec![0.0; m * m * m];
    for mu in 0..m {
        for beta in 0..m {
            for sigma in 0..m {
                let mut s = match dg {
                    Some(j) => j.dg_at(mu, beta, sigma),
                    None => 0.0,
                };
                for alpha in 0..m {
                    s += g[alpha * m + mu] * bc.at(beta, alpha, sigma)
                        - g[alpha * m + beta] * bc.at(mu, alpha, sigma);
                }
                h[(mu * m + beta) * m + sigma] = s;
            }
        }
    }
    h
}

/// Horizontal lift of a chart basis vector d/dx^mu:
/// N^sigma_{mu k} = (1/2) g_{beta rho} e^rho_k
///                  (g^{alpha sigma} Gb^beta_{alpha mu} - g^{alpha beta} Gb^sigma_{alpha mu}),
/// returned as N[sigma][k].
pub fn horizontal_lift_base(
    mu: usize,
    e: &[f64],
    g: &MetricJet2,
    bc: &BackgroundConnection,
) -> Result<Vec<f64>> {
    let m = bc.dim();
    check_frame_metric_consistency(m, e, g)?;
    let cov = g.covariant()?;
    let h = lift_bracket(g.g(), None, bc);
    let mut n = vec![0.0; m * m];
    for sigma in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for beta in 0..m {
                for rho in 0..m {
                    s += cov[beta * m + rho] * e[k * m + rho] * h[(sigma * m + beta) * m + mu];
                }
            }
            n[sigma * m + k] = 0.5 * s;
        }
    }
    Ok(n)
}

/// Horizontal lift of a metric fiber direction d/dg^{mu nu}:
/// Q^alpha_{mu nu k} = (1/4) g_{rho beta} e^beta_k
///                     (delta_mu^alpha delta^rho_nu + delta_nu^alpha delta^rho_mu),
/// returned as Q[alpha][k].
pub fn horizontal_lift_fiber(mu: usize, nu: usize, e: &[f64], g: &MetricJet2) -> Result<Vec<f64>> {
    let m = g.dim();
    check_frame_metric_consistency(m, e, g)?;
    let cov = g.covariant()?;
    let mut q = vec![0.0; m * m];
    for alpha in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for beta in 0..m {
                if alpha == mu {
                    s += cov[nu * m + beta] * e[k * m + beta];
                }
                if alpha == nu {
                    s += cov[mu * m + beta] * e[k * m + beta];
                }
            }
            q[alpha * m + k] = 0.25 * s;
        }
    }
    Ok(q)
}

/// Lift of the holonomic direction d/dx^sigma + g^{mu nu}_sigma d/dg^{mu nu}:
/// assembles a full frame jet whose reduction reproduces the metric jet.
pub fn holonomic_lift(
    g: &MetricJet2,
    e: &[f64],
    bc: &BackgroundConnection,
) -> Result<VielbeinJet1> {
    let m = g.dim();
    check_frame_metric_consistency(m, e, g)?;
    let cov = g.covariant()?;
    let h = lift_bracket(g.g(), Some(g), bc);
    let mut de = vec![0.0; m * m * m];
    for k in 0..m {
        for kappa in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for beta in 0..m {
                    for rho in 0..m {
                        s += cov[beta * m + rho]
                            * e[k * m + rho]
                            * h[(kappa * m + beta) * m + sigma];
                    }
                }
                de[(k * m + kappa) * m + sigma] = 0.5 * s;
            }
        }
    }
    VielbeinJet1::new(e.to_vec(), de, g.at().clone())
}

fn check_frame_metric_consistency(m: usize, e: &[f64], g: &MetricJet2) -> Result<()> {
    let scale = g.g().iter().map(|x| x.abs()).fold(1.0, f64::max);
    // The frame must reproduce the metric for one diagonal +-1 signature,
    // consistently across all entries.
    let worst_for = |eta: &SignatureMatrix| -> f64 {
        let mut worst = 0.0f64;
        for mu in 0..m {
            for nu in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    s += eta.diag()[k] * e[k * m + mu] * e[k * m + nu];
                }
                worst = worst.max((s - g.g_at(mu, nu)).abs());
            }
        }
        worst
    };
    let worst =
        worst_for(&SignatureMatrix::lorentzian(m)).min(worst_for(&SignatureMatrix::euclidean(m)));
    if worst > 1e-6 * scale {
        return Err(Error::domain(format!(
            "frame and metric are inconsistent (deviation {worst:.3e})"
        )));
    }
    Ok(())
}

/// Quotient-coordinates connection formula:
/// Gamma^mu_{rho sigma} = -(1/2) g_{beta rho} [ g^{mu beta}_sigma
///   + g^{alpha mu} Gb^beta_{alpha sigma} - g^{alpha beta} Gb^mu_{alpha sigma} ]
///   + A^mu_{rho sigma}.
pub fn gamma_from_quotient(
    g: &MetricJet2,
    bc: &BackgroundConnection,
    a: &AdjointCoeffs,
) -> Result<ConnectionCoeffs> {
    let m = g.dim();
    let cov = g.covariant()?;
    let h = lift_bracket(g.g(), Some(g), bc);
    let mut gamma = vec![0.0; m * m * m];
    for mu in 0..m {
        for rho in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for beta in 0..m {
                    s -= 0.5 * cov[beta * m + rho] * h[(mu * m + beta) * m + sigma];
                }
                gamma[(mu * m + rho) * m + sigma] = s + a.at(mu, rho, sigma);
            }
        }
    }
    ConnectionCoeffs::new(m, gamma, None)
}

/// The unique vertical correction making the quotient connection symmetric in
/// its lower indices. Solved by the closed-form three-index solver applied to
/// the antisymmetrized horizontal part.
pub fn torsionless_a(g: &MetricJet2, bc: &BackgroundConnection) -> Result<AdjointCoeffs> {
    let m = g.dim();
    let cov = g.covariant()?;
    let h = lift_bracket(g.g(), Some(g), bc);

    // Horizontal part H^mu_{rho sigma} and its lowered form.
    let mut hlow = vec![0.0; m * m * m];
    for mu in 0..m {
        for rho in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for beta in 0..m {
                    s -= 0.5 * cov[beta * m + rho] * h[(mu * m + beta) * m + sigma];
                }
                // lowered on the upper slot: H_{mu rho sigma} = g_{mu nu} H^nu_{rho sigma}
                hlow[(mu * m + rho) * m + sigma] = s;
            }
        }
    }
    let mut lowered = vec![0.0; m * m * m];
    for mu in 0..m {
        for rho in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for nu in 0..m {
                    s += cov[mu * m + nu] * hlow[(nu * m + rho) * m + sigma];
                }
                lowered[(mu * m + rho) * m + sigma] = s;
            }
        }
    }

    // Data for the solver: c antisymmetric in its first two indices (b = 0,
    // sign +1) and c_{i j k} - c_{i k j} = D_{i j k} with
    // D_{i j k} = H_{i k j} - H_{i j k} (antisymmetric in the last two).
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let mut d = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                d[idx(i, j, k)] = lowered[idx(i, k, j)] - lowered[idx(i, j, k)];
            }
        }
    }
    let b = vec![0.0; m * m * m];
    let c = unique_solution_solver(m, &d, &b, 1.0, 1e-10)?;

    // Raise the first index back: A^rho_{nu sigma} = g^{rho mu} c_{mu nu sigma}.
    let mut a = vec![0.0; m * m * m];
    for rho in 0..m {
        for nu in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for mu in 0..m {
                    s += g.g_at(rho, mu) * c[idx(mu, nu, sigma)];
                }
                a[idx(rho, nu, sigma)] = s;
            }
        }
    }
    AdjointCoeffs::new(a, g, 1e-8)
}

/// Raw coordinate-increment tangent data on the frame-jet space: a base
/// displacement and a frame displacement (the derivative slot never enters
/// the metricity forms).
#[derive(Debug, Clone)]
pub struct TangentData {
    pub dx: Vec<f64>,
    /// de[k * m + mu]
    pub de: Vec<f64>,
}

/// Evaluates both sides of the metricity-horizontality identity on a tangent
/// vector and reports their difference:
/// eta^{ik} w^j_k + eta^{jk} w^i_k  =  e^i_mu e^j_nu (dg^{mu nu} - g^{mu nu}_sigma dx^sigma),
/// with w^j_k = e^j_mu (de^mu_k - e^mu_{k sigma} dx^sigma) the canonical
/// connection form in adapted coordinates.
pub fn metricity_horizontality_check(
    v: &VielbeinJet1,
    eta: &SignatureMatrix,
    tangent: &TangentData,
    tol: f64,
) -> Result<ResidualReport> {
    let m = v.dim();
    if tangent.dx.len() != m || tangent.de.len() != m * m {
        return Err(Error::domain("tangent data has wrong shape"));
    }
    let ei = v.inverse_frame()?;

    // Connection form applied to the tangent.
    let mut w = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for mu in 0..m {
                let mut vertical = tangent.de[k * m + mu];
                for sigma in 0..m {
                    vertical -= v.de_at(k, mu, sigma) * tangent.dx[sigma];
                }
                s += ei[j * m + mu] * vertical;
            }
            w[j * m + k] = s;
        }
    }

    // Left side: symmetrized-in-eta combination of w.
    let mut lhs = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += eta.entry(i, k) * w[j * m + k] + eta.entry(j, k) * w[i * m + k];
            }
            lhs[i * m + j] = s;
        }
    }

    // Right side: pushforward of the tangent through the quotient, minus the
    // jet part of the induced metric along the base displacement.
    let g = metric_from_vielbein(v, eta);
    let mut rhs = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for mu in 0..m {
                for nu in 0..m {
                    let mut dgv = 0.0;
                    for k in 0..m {
                        dgv += eta.diag()[k]
                            * (tangent.de[k * m + mu] * v.e_at(k, nu)
                                + v.e_at(k, mu) * tangent.de[k * m + nu]);
                    }
                    for sigma in 0..m {
                        dgv -= g.dg_at(mu, nu, sigma) * tangent.dx[sigma];
                    }
                    s += ei[i * m + mu] * ei[j * m + nu] * dgv;
                }
            }
            rhs[i * m + j] = s;
        }
    }

    let diff: Vec<f64> = lhs.iter().zip(rhs.iter()).map(|(a, b)| a - b).collect();
    Ok(ResidualReport::new(
        "metricity_horizontality",
        diff,
        vec![m, m],
        tol,
    ))
}

/// First display of the same identity, with the connection contraction
/// written through the frame Christoffels; used as a second route in tests.
pub fn metricity_horizontality_via_christoffel(
    v: &VielbeinJet1,
    eta: &SignatureMatrix,
    tangent: &TangentData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = v.dim();
    let ei = v.inverse_frame()?;
    let g = metric_from_vielbein(v, eta);
    let c = crate::connections::christoffel_from_jet(v)?;

    let mut w = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for mu in 0..m {
                let mut vertical = tangent.de[k * m + mu];
                for sigma in 0..m {
                    vertical -= v.de_at(k, mu, sigma) * tangent.dx[sigma];
                }
                s += ei[j * m + mu] * vertical;
            }
            w[j * m + k] = s;
        }
    }
    let mut lhs = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += eta.entry(i, k) * w[j * m + k] + eta.entry(j, k) * w[i * m + k];
            }
            lhs[i * m + j] = s;
        }
    }

    let mut rhs = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for mu in 0..m {
                for nu in 0..m {
                    let mut dgv = 0.0;
                    for k in 0..m {
                        dgv += eta.diag()[k]
                            * (tangent.de[k * m + mu] * v.e_at(k, nu)
                                + v.e_at(k, mu) * tangent.de[k * m + nu]);
                    }
                    for rho in 0..m {
                        let mut contraction = 0.0;
                        for sigma in 0..m {
                            contraction += g.g_at(mu, sigma) * c.at(nu, sigma, rho)
                                + g.g_at(nu, sigma) * c.at(mu, sigma, rho);
                        }
                        dgv += contraction * tangent.dx[rho];
                    }
                    s += ei[i * m + mu] * ei[j * m + nu] * dgv;
                }
            }
            rhs[i * m + j] = s;
        }
    }
    Ok((lhs, rhs))
}

/// Residual of the projection condition for a lift of d/dx^mu: the
/// pushforward of the fiber displacement through the quotient must vanish.
pub fn lift_projection_residual_base(n: &[f64], e: &[f64], eta: &SignatureMatrix) -> f64 {
    let m = eta.dim();
    let mut worst = 0.0f64;
    for sigma in 0..m {
        for rho in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                // displacement of e_k^sigma is N^sigma_k
                s += eta.diag()[k]
                    * (n[sigma * m + k] * e[k * m + rho] + e[k * m + sigma] * n[rho * m + k]);
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Residual of the connection condition for a lift of d/dx^mu: the k-part of
/// -e^l_sigma (N^sigma_k - f^sigma_{k mu}) must vanish.
pub fn lift_connection_residual_base(
    mu: usize,
    n: &[f64],
    e: &[f64],
    bc: &BackgroundConnection,
    eta: &SignatureMatrix,
) -> Result<f64> {
    let m = eta.dim();
    let ei = inverse_frame_components(m, e)?;
    let f = bc.frame_coefficients(e);
    let mut w = vec![0.0; m * m];
    for l in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for sigma in 0..m {
                s -= ei[l * m + sigma] * (n[sigma * m + k] - f[(sigma * m + k) * m + mu]);
            }
            w[l * m + k] = s;
        }
    }
    let (kpart, _) = cartan_split(&w, eta);
    Ok(kpart.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Residual of the projection condition for a lift of d/dg^{mu nu}: the
/// pushforward must equal the symmetric unit displacement of g^{mu nu}.
pub fn lift_projection_residual_fiber(
    mu: usize,
    nu: usize,
    q: &[f64],
    e: &[f64],
    eta: &SignatureMatrix,
) -> f64 {
    let m = eta.dim();
    let mut worst = 0.0f64;
    for sigma in 0..m {
        for rho in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += eta.diag()[k]
                    * (q[sigma * m + k] * e[k * m + rho] + e[k * m + sigma] * q[rho * m + k]);
            }
            let mut target = 0.0;
            if sigma == mu && rho == nu {
                target += 0.5;
            }
            if sigma == nu && rho == mu {
                target += 0.5;
            }
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

/// Residual of the connection condition for a fiber lift: the k-part of
/// -e^l_alpha Q^alpha_k must vanish.
pub fn lift_connection_residual_fiber(q: &[f64], e: &[f64], eta: &SignatureMatrix) -> Result<f64> {
    let m = eta.dim();
    let ei = inverse_frame_components(m, e)?;
    let mut w = vec![0.0; m * m];
    for l in 0..m {
        for k in 0..m {
            let mut s = 0.0;
            for alpha in 0..m {
                s -= ei[l * m + alpha] * q[alpha * m + k];
            }
            w[l * m + k] = s;
        }
    }
    let (kpart, _) = cartan_split(&w, eta);
    Ok(kpart.iter().map(|x| x.abs()).fold(0.0, f64::max))
}
