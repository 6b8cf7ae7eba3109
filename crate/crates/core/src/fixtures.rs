//! Built-in analytic metric fields with closed-form Christoffel oracles, plus
//! a coefficient-driven synthetic family for randomized testing.

use crate::error::{Error, Result};
use crate::etalinalg::SignatureMatrix;
use crate::framebundle::MetricJet2;
use crate::numkit::matrix::mat_inv;
use crate::numkit::{
    eval_jet2, seed_point, ChartPoint, DerivativeContract, DerivativeMode, Jet2, Scalar,
    ScalarField,
};
use std::collections::HashMap;

/// Smooth perturbation of a constant signature matrix by symmetric
/// low-frequency waves: g_cov(x) = eta + sum_a amp_a S_a sin(w_a . x + p_a).
/// Coefficients are supplied by the caller, so the family stays deterministic
/// inside the library while tests drive it with random draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMetric {
    m: usize,
    eta: SignatureMatrix,
    /// (symmetric matrix, wave vector, phase) per term
    terms: Vec<(Vec<f64>, Vec<f64>, f64)>,
}

impl SyntheticMetric {
    pub fn new(eta: SignatureMatrix, terms: Vec<(Vec<f64>, Vec<f64>, f64)>) -> Result<Self> {
        let m = eta.dim();
        let mut total = 0.0f64;
        for (s, w, _) in &terms {
            if s.len() != m * m || w.len() != m {
                return Err(Error::domain("synthetic metric term has wrong shape"));
            }
            total += s.iter().map(|x| x.abs()).fold(0.0, f64::max);
        }
        if total > 0.45 {
            return Err(Error::domain(
                "synthetic metric perturbation too large to guarantee the signature",
            ));
        }
        Ok(SyntheticMetric { m, eta, terms })
    }

    fn covariant<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let m = self.m;
        let mut g: Vec<S> = self.eta.dense().into_iter().map(S::from_f64).collect();
        for (sym, wave, phase) in &self.terms {
            let mut arg = S::from_f64(*phase);
            for (i, w) in wave.iter().enumerate() {
                arg = arg + x[i].clone() * S::from_f64(*w);
            }
            let osc = arg.sin();
            for i in 0..m * m {
                if sym[i] != 0.0 {
                    g[i] = g[i].clone() + osc.clone() * S::from_f64(sym[i]);
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MetricKind {
    Minkowski,
    Schwarzschild { mass: f64 },
    DeSitterStatic { hubble: f64 },
    Sphere2,
    FlatPolar,
    PerturbedSchwarzschild { mass: f64, eps: f64 },
    Synthetic(SyntheticMetric),
}

/// A named analytic metric field on its chart, with parameters, signature,
/// coordinate names, a default sample point and an optional Christoffel
/// oracle.
#[derive(Debug, Clone)]
pub struct NamedMetric {
    pub name: String,
    pub dim: usize,
    pub eta: SignatureMatrix,
    pub params: HashMap<String, f64>,
    pub coords: Vec<&'static str>,
    pub default_point: Vec<f64>,
    pub vacuum: bool,
    kind: MetricKind,
}

/// Catalog lookup. Known names: minkowski, schwarzschild, desitter_static,
/// sphere2, flat_polar, perturbed_schwarzschild.
pub fn get_fixture(name: &str, params: &HashMap<String, f64>) -> Result<NamedMetric> {
    let mut used = params.clone();
    let mut take = |key: &str, default: f64| used.remove(key).unwrap_or(default);
    let fixture = match name {
        "minkowski" => NamedMetric {
            name: name.into(),
            dim: 4,
            eta: SignatureMatrix::lorentzian(4),
            params: HashMap::new(),
            coords: vec!["t", "x", "y", "z"],
            default_point: vec![0.0, 0.0, 0.0, 0.0],
            vacuum: true,
            kind: MetricKind::Minkowski,
        },
        "schwarzschild" => {
            let mass = take("M", 1.0);
            NamedMetric {
                name: name.into(),
                dim: 4,
                eta: SignatureMatrix::lorentzian(4),
                params: HashMap::from([("M".into(), mass)]),
                coords: vec!["t", "r", "theta", "phi"],
                default_point: vec![0.0, 6.0 * mass, std::f64::consts::FRAC_PI_2, 0.0],
                vacuum: true,
                kind: MetricKind::Schwarzschild { mass },
            }
        }
        "desitter_static" => {
            let hubble = take("H", 0.1);
            NamedMetric {
                name: name.into(),
                dim: 4,
                eta: SignatureMatrix::lorentzian(4),
                params: HashMap::from([("H".into(), hubble)]),
                coords: vec!["t", "r", "theta", "phi"],
                default_point: vec![0.0, 0.3 / hubble, std::f64::consts::FRAC_PI_2, 0.0],
                vacuum: false,
                kind: MetricKind::DeSitterStatic { hubble },
            }
        }
        "sphere2" => NamedMetric {
            name: name.into(),
            dim: 2,
            eta: SignatureMatrix::euclidean(2),
            params: HashMap::new(),
            coords: vec!["theta", "phi"],
            default_point: vec![1.0, 0.0],
            vacuum: false,
            kind: MetricKind::Sphere2,
        },
        "flat_polar" => NamedMetric {
            name: name.into(),
            dim: 2,
            eta: SignatureMatrix::euclidean(2),
            params: HashMap::new(),
            coords: vec!["r", "theta"],
            default_point: vec![1.5, 0.7],
            vacuum: true,
            kind: MetricKind::FlatPolar,
        },
        "perturbed_schwarzschild" => {
            let mass = take("M", 1.0);
            let eps = take("eps", 0.1);
            NamedMetric {
                name: name.into(),
                dim: 4,
                eta: SignatureMatrix::lorentzian(4),
                params: HashMap::from([("M".into(), mass), ("eps".into(), eps)]),
                coords: vec!["t", "r", "theta", "phi"],
                default_point: vec![0.0, 6.0 * mass, std::f64::consts::FRAC_PI_2, 0.0],
                vacuum: false,
                kind: MetricKind::PerturbedSchwarzschild { mass, eps },
            }
        }
        other => {
            return Err(Error::domain(format!(
                "unknown fixture '{other}'; known: minkowski, schwarzschild, desitter_static, sphere2, flat_polar, perturbed_schwarzschild"
            )))
        }
    };
    if !used.is_empty() {
        let keys: Vec<&String> = used.keys().collect();
        return Err(Error::domain(format!(
            "unknown parameters {keys:?} for fixture '{name}'"
        )));
    }
    Ok(fixture)
}

/// Wraps a synthetic metric in the catalog type so the whole tool chain
/// (jets, reconstruction, CLI-free verification) runs on it.
pub fn synthetic_fixture(name: impl Into<String>, metric: SyntheticMetric) -> NamedMetric {
    NamedMetric {
        name: name.into(),
        dim: metric.m,
        eta: metric.eta.clone(),
        params: HashMap::new(),
        coords: vec!["x0", "x1", "x2", "x3", "x4", "x5"],
        default_point: vec![0.0; metric.m],
        vacuum: false,
        kind: MetricKind::Synthetic(metric),
    }
}

fn diag4<S: Scalar>(a: S, b: S, c: S, d: S) -> Vec<S> {
    let z = || S::from_f64(0.0);
    vec![
        a,
        z(),
        z(),
        z(),
        z(),
        b,
        z(),
        z(),
        z(),
        z(),
        c,
        z(),
        z(),
        z(),
        z(),
        d,
    ]
}

impl NamedMetric {
    /// Covariant components as a generic-scalar matrix.
    pub fn covariant<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match &self.kind {
            MetricKind::Minkowski => diag4(
                S::from_f64(-1.0),
                S::from_f64(1.0),
                S::from_f64(1.0),
                S::from_f64(1.0),
            ),
            MetricKind::Schwarzschild { mass } => {
                let r = x[1].clone();
                let th = x[2].clone();
                let f = S::from_f64(1.0) - S::from_f64(2.0 * mass) * r.clone().recip();
                let r2 = r.clone() * r;
                let s = th.sin();
                diag4(-f.clone(), f.recip(), r2.clone(), r2 * s.clone() * s)
            }
            MetricKind::DeSitterStatic { hubble } => {
                let r = x[1].clone();
                let th = x[2].clone();
                let f = S::from_f64(1.0) - S::from_f64(hubble * hubble) * r.clone() * r.clone();
                let r2 = r.clone() * r;
                let s = th.sin();
                diag4(-f.clone(), f.recip(), r2.clone(), r2 * s.clone() * s)
            }
            MetricKind::Sphere2 => {
                let th = x[0].clone();
                let s = th.sin();
                vec![
                    S::from_f64(1.0),
                    S::from_f64(0.0),
                    S::from_f64(0.0),
                    s.clone() * s,
                ]
            }
            MetricKind::FlatPolar => {
                let r = x[0].clone();
                vec![
                    S::from_f64(1.0),
                    S::from_f64(0.0),
                    S::from_f64(0.0),
                    r.clone() * r,
                ]
            }
            MetricKind::PerturbedSchwarzschild { mass, eps } => {
                let r = x[1].clone();
                let th = x[2].clone();
                let mr = S::from_f64(*mass) * (S::from_f64(1.0) + S::from_f64(*eps) * r.clone());
                let f = S::from_f64(1.0) - S::from_f64(2.0) * mr * r.clone().recip();
                let r2 = r.clone() * r;
                let s = th.sin();
                diag4(-f.clone(), f.recip(), r2.clone(), r2 * s.clone() * s)
            }
            MetricKind::Synthetic(sm) => sm.covariant(x),
        }
    }

    /// Covariant components on plain floats.
    pub fn covariant_at(&self, x: &[f64]) -> Vec<f64> {
        self.covariant::<f64>(x)
    }

    /// Contravariant second-order jet at a chart point under the contract.
    pub fn jet_at(&self, x: &[f64], contract: &DerivativeContract) -> Result<MetricJet2> {
        let m = self.dim;
        if x.len() != m {
            return Err(Error::domain(format!(
                "point has {} coordinates, fixture '{}' needs {m}",
                x.len(),
                self.name
            )));
        }
        let at = ChartPoint::new(x.to_vec())?;
        match contract.mode {
            DerivativeMode::AutomaticForward => {
                let seeds = seed_point(&at);
                let cov = self.covariant::<Jet2>(&seeds);
                let contra = mat_inv(m, &cov)?;
                let mut g = vec![0.0; m * m];
                let mut dg = vec![0.0; m * m * m];
                let mut ddg = vec![0.0; m * m * m * m];
                for mu in 0..m {
                    for nu in 0..m {
                        let mut raw = contra[mu * m + nu].clone();
                        raw.promote(m);
                        let jet = raw.into_jet_scalar();
                        if !jet.value.is_finite() {
                            return Err(Error::Evaluation { index: 0 });
                        }
                        g[mu * m + nu] = jet.value;
                        for s in 0..m {
                            dg[(mu * m + nu) * m + s] = jet.grad[s];
                            for t in 0..m {
                                ddg[((mu * m + nu) * m + s) * m + t] = jet.hess_at(s, t);
                            }
                        }
                    }
                }
                MetricJet2::new(g, dg, Some(ddg), at)
            }
            DerivativeMode::CentralDifference => {
                let entry_field = |mu: usize, nu: usize| ContravariantEntry { def: self, mu, nu };
                let mut g = vec![0.0; m * m];
                let mut dg = vec![0.0; m * m * m];
                let mut ddg = vec![0.0; m * m * m * m];
                for mu in 0..m {
                    for nu in mu..m {
                        let jet = eval_jet2(&entry_field(mu, nu), &at, contract)?;
                        for (a, b) in [(mu, nu), (nu, mu)] {
                            g[a * m + b] = jet.value;
                            for s in 0..m {
                                dg[(a * m + b) * m + s] = jet.grad[s];
                                for t in 0..m {
                                    ddg[((a * m + b) * m + s) * m + t] = jet.hess_at(s, t);
                                }
                            }
                        }
                    }
                }
                MetricJet2::new(g, dg, Some(ddg), at)
            }
        }
    }

    /// Closed-form Christoffel oracle, populated for schwarzschild, sphere2
    /// and flat_polar. Index layout matches ConnectionCoeffs:
    /// out[(up * m + lo1) * m + lo2].
    pub fn oracle_christoffels(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            MetricKind::Schwarzschild { mass } => {
                let m = 4;
                let (r, th) = (x[1], x[2]);
                let f = 1.0 - 2.0 * mass / r;
                let mut g = vec![0.0; 64];
                let mut set = |up: usize, a: usize, b: usize, v: f64| {
                    g[(up * m + a) * m + b] = v;
                    g[(up * m + b) * m + a] = v;
                };
                set(0, 0, 1, mass / (r * r * f));
                set(1, 0, 0, mass * f / (r * r));
                set(1, 1, 1, -mass / (r * r * f));
                set(1, 2, 2, -(r - 2.0 * mass));
                set(1, 3, 3, -(r - 2.0 * mass) * th.sin() * th.sin());
                set(2, 1, 2, 1.0 / r);
                set(2, 3, 3, -th.sin() * th.cos());
                set(3, 1, 3, 1.0 / r);
                set(3, 2, 3, th.cos() / th.sin());
                Some(g)
            }
            MetricKind::Sphere2 => {
                let m = 2;
                let th = x[0];
                let mut g = vec![0.0; 8];
                let mut set = |up: usize, a: usize, b: usize, v: f64| {
                    g[(up * m + a) * m + b] = v;
                    g[(up * m + b) * m + a] = v;
                };
                set(0, 1, 1, -th.sin() * th.cos());
                set(1, 0, 1, th.cos() / th.sin());
                Some(g)
            }
            MetricKind::FlatPolar => {
                let m = 2;
                let r = x[0];
                let mut g = vec![0.0; 8];
                let mut set = |up: usize, a: usize, b: usize, v: f64| {
                    g[(up * m + a) * m + b] = v;
                    g[(up * m + b) * m + a] = v;
                };
                set(0, 1, 1, -r);
                set(1, 0, 1, 1.0 / r);
                Some(g)
            }
            _ => None,
        }
    }
}

struct ContravariantEntry<'a> {
    def: &'a NamedMetric,
    mu: usize,
    nu: usize,
}

impl ScalarField for ContravariantEntry<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let m = self.def.dim;
        let cov = self.def.covariant::<S>(x);
        match mat_inv(m, &cov) {
            Ok(inv) => inv[self.mu * m + self.nu].clone(),
            Err(_) => S::from_f64(f64::NAN),
        }
    }
}
