//! Lagrangian densities: the gravity density in connection variables, its
//! first-order form in metric-jet variables, and the brute-force
//! epsilon-contraction that pins the normalization constant per dimension.

use crate::connections::{levi_civita, ricci, scalar_curvature, ConnectionCoeffs};
use crate::error::{Error, Result};
use crate::framebundle::MetricJet2;
use crate::numkit::matrix::det;

/// Density value together with the per-dimension normalization constant that
/// relates the epsilon-contraction form to sqrt|det g| g^{mu nu} R_{mu nu}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianValue {
    /// Coefficient of dx^1 ^ ... ^ dx^m after pullback.
    pub density: f64,
    pub normalization: f64,
}

/// Normalization constant kappa_m, pinned by the epsilon-contraction oracle:
/// (m-2)! for every dimension, in particular 1, 1, 2 for m = 2, 3, 4.
pub fn kappa(m: usize) -> f64 {
    assert!(m >= 2, "chart dimension must be at least 2");
    (1..=m.saturating_sub(2)).map(|k| k as f64).product()
}

fn sqrt_abs_det_cov(g: &MetricJet2) -> Result<f64> {
    let m = g.dim();
    let d = det(m, g.g());
    if d == 0.0 || !d.is_finite() {
        return Err(Error::SingularMetric);
    }
    // covariant determinant is the reciprocal of the contravariant one
    Ok((1.0 / d.abs()).sqrt())
}

/// Density kappa_m sqrt|det g_cov| g^{mu nu} R_{mu nu}(c).
pub fn palatini_density(g: &MetricJet2, c: &ConnectionCoeffs) -> Result<LagrangianValue> {
    if c.dgamma().is_none() {
        return Err(Error::MissingDgamma);
    }
    let r = ricci(c)?;
    let k = kappa(g.dim());
    let density = k * sqrt_abs_det_cov(g)? * scalar_curvature(g, &r);
    Ok(LagrangianValue {
        density,
        normalization: k,
    })
}

/// First-order density in metric-jet variables: the same expression evaluated
/// on the Levi-Civita connection of the jet. Along holonomic jets this equals
/// the second-order scalar-curvature density.
pub fn eh_first_order_density(g: &MetricJet2) -> Result<LagrangianValue> {
    if g.ddg().is_none() {
        return Err(Error::MissingDdg);
    }
    let lc = levi_civita(g)?;
    palatini_density(g, &lc)
}

/// Sign of the permutation sending 0..m to `perm`; 0 when entries repeat.
pub fn permutation_sign(perm: &[usize]) -> i32 {
    let n = perm.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if perm[i] == perm[j] {
                return 0;
            }
        }
    }
    let mut sign = 1;
    let mut p = perm.to_vec();
    for i in 0..n {
        while p[i] != i {
            let t = p[i];
            p.swap(i, t);
            sign = -sign;
        }
    }
    sign
}

/// Literal evaluation of the epsilon-contraction form
/// eps_{mu_1 ... mu_{m-2} gamma kappa} sqrt|det g| g^{kappa phi}
///   dx^{mu_1} ^ ... ^ dx^{mu_{m-2}} ^ (dGamma^gamma_{rho phi} ^ dx^rho
///      + Gamma^sigma_{delta phi} Gamma^gamma_{beta sigma} dx^beta ^ dx^delta)
/// pulled back along a section, by brute-force permutation sum. Returns the
/// coefficient of the volume form. Intended for m <= 4.
pub fn epsilon_contraction_oracle(g: &MetricJet2, c: &ConnectionCoeffs) -> Result<f64> {
    let m = g.dim();
    if m > 4 {
        return Err(Error::domain(
            "epsilon-contraction oracle is limited to m <= 4",
        ));
    }
    if c.dgamma().is_none() {
        return Err(Error::MissingDgamma);
    }
    let root = sqrt_abs_det_cov(g)?;

    // Enumerate all m^m assignments of the epsilon slots
    // (mu_1 ... mu_{m-2}, gamma, kappa); the symbol kills repeats.
    let mut total = 0.0;
    let tuples = m.pow(m as u32);
    let mut eps_indices = vec![0usize; m];
    for code in 0..tuples {
        let mut rem = code;
        for slot in eps_indices.iter_mut() {
            *slot = rem % m;
            rem /= m;
        }
        let eps_sign = permutation_sign(&eps_indices);
        if eps_sign == 0 {
            continue;
        }
        let wedge = &eps_indices[..m - 2];
        let gamma = eps_indices[m - 2];
        let kappa_idx = eps_indices[m - 1];
        for phi in 0..m {
            let gkf = g.g_at(kappa_idx, phi);
            if gkf == 0.0 {
                continue;
            }
            // first term: dGamma^gamma_{rho phi} ^ dx^rho pulled back along
            // the section gives dGamma/dx^beta dx^beta ^ dx^rho
            for beta in 0..m {
                for rho in 0..m {
                    let mut slots = wedge.to_vec();
                    slots.push(beta);
                    slots.push(rho);
                    let wsign = permutation_sign(&slots);
                    if wsign == 0 {
                        continue;
                    }
                    total += (eps_sign * wsign) as f64 * root * gkf * c.d_at(gamma, rho, phi, beta);
                }
            }
            // second term: Gamma^sigma_{delta phi} Gamma^gamma_{beta sigma}
            // dx^beta ^ dx^delta
            for beta in 0..m {
                for delta in 0..m {
                    let mut slots = wedge.to_vec();
                    slots.push(beta);
                    slots.push(delta);
                    let wsign = permutation_sign(&slots);
                    if wsign == 0 {
                        continue;
                    }
                    let mut quad = 0.0;
                    for sigma in 0..m {
                        quad += c.at(sigma, delta, phi) * c.at(gamma, beta, sigma);
                    }
                    total += (eps_sign * wsign) as f64 * root * gkf * quad;
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etalinalg::SignatureMatrix;
    use crate::numkit::ChartPoint;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rng() -> StdRng {
        StdRng::seed_from_u64(0x1a6)
    }

    fn random_metric_jet(r: &mut StdRng, m: usize, eta: &SignatureMatrix) -> MetricJet2 {
        let at = ChartPoint::new(vec![0.2; m]).unwrap();
        let mut g = eta.dense();
        for i in 0..m {
            for j in i..m {
                let d = r.gen_range(-0.1..0.1);
                g[i * m + j] += d;
                if i != j {
                    g[j * m + i] += d;
                }
            }
        }
        let mut dg = vec![0.0; m * m * m];
        let mut ddg = vec![0.0; m * m * m * m];
        for i in 0..m {
            for j in i..m {
                for s in 0..m {
                    let d = r.gen_range(-0.3..0.3);
                    dg[(i * m + j) * m + s] = d;
                    dg[(j * m + i) * m + s] = d;
                    for t in s..m {
                        let dd = r.gen_range(-0.3..0.3);
                        for (a, b) in [(i, j), (j, i)] {
                            ddg[((a * m + b) * m + s) * m + t] = dd;
                            ddg[((a * m + b) * m + t) * m + s] = dd;
                        }
                    }
                }
            }
        }
        MetricJet2::new(g, dg, Some(ddg), at).unwrap()
    }

    /// Random connection symmetric in its lower indices, with symmetric
    /// derivatives, as carried by the torsionless bundle.
    fn random_symmetric_connection(r: &mut StdRng, m: usize) -> ConnectionCoeffs {
        let mut gamma = vec![0.0; m * m * m];
        let mut dgamma = vec![0.0; m * m * m * m];
        for mu in 0..m {
            for a in 0..m {
                for b in a..m {
                    let v = r.gen_range(-0.5..0.5);
                    gamma[(mu * m + a) * m + b] = v;
                    gamma[(mu * m + b) * m + a] = v;
                    for s in 0..m {
                        let d = r.gen_range(-0.5..0.5);
                        dgamma[((mu * m + a) * m + b) * m + s] = d;
                        dgamma[((mu * m + b) * m + a) * m + s] = d;
                    }
                }
            }
        }
        ConnectionCoeffs::new(m, gamma, Some(dgamma)).unwrap()
    }

    #[test]
    fn zero_connection_gives_zero_density_and_oracle() {
        let mut r = rng();
        let eta = SignatureMatrix::lorentzian(4);
        let g = random_metric_jet(&mut r, 4, &eta);
        let c = ConnectionCoeffs::zero(4);
        let v = palatini_density(&g, &c).unwrap();
        assert_eq!(v.density, 0.0);
        let o = epsilon_contraction_oracle(&g, &c).unwrap();
        assert_eq!(o, 0.0);
    }

    #[test]
    fn oracle_ratio_is_kappa_for_m3_and_m4() {
        let mut r = rng();
        for (m, eta) in [
            (3usize, SignatureMatrix::lorentzian(3)),
            (3usize, SignatureMatrix::euclidean(3)),
            (4usize, SignatureMatrix::lorentzian(4)),
        ] {
            let mut ratios = Vec::new();
            for _ in 0..40 {
                let g = random_metric_jet(&mut r, m, &eta);
                let c = random_symmetric_connection(&mut r, m);
                let oracle = epsilon_contraction_oracle(&g, &c).unwrap();
                let direct = palatini_density(&g, &c).unwrap();
                let unnormalized = direct.density / direct.normalization;
                if unnormalized.abs() < 1e-6 {
                    continue;
                }
                ratios.push(oracle / unnormalized);
            }
            assert!(ratios.len() > 20);
            let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let sd: f64 = (ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                / ratios.len() as f64)
                .sqrt();
            assert!(sd < 1e-10, "m={m}: ratio stddev {sd}");
            assert!(
                (mean - kappa(m)).abs() < 1e-10,
                "m={m}: oracle pins kappa at {mean}, expected {}",
                kappa(m)
            );
        }
    }

    #[test]
    fn kappa_values_are_factorials() {
        assert_eq!(kappa(2), 1.0);
        assert_eq!(kappa(3), 1.0);
        assert_eq!(kappa(4), 2.0);
    }

    #[test]
    fn eh_first_order_equals_palatini_on_levi_civita() {
        let mut r = rng();
        let eta = SignatureMatrix::lorentzian(4);
        let g = random_metric_jet(&mut r, 4, &eta);
        let lc = levi_civita(&g).unwrap();
        let a = eh_first_order_density(&g).unwrap();
        let b = palatini_density(&g, &lc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn minkowski_density_vanishes() {
        let m = 4;
        let eta = SignatureMatrix::lorentzian(m);
        let at = ChartPoint::new(vec![0.0; m]).unwrap();
        let g = MetricJet2::new(
            eta.dense(),
            vec![0.0; m * m * m],
            Some(vec![0.0; m * m * m * m]),
            at,
        )
        .unwrap();
        let v = eh_first_order_density(&g).unwrap();
        assert_eq!(v.density, 0.0);
    }
}
