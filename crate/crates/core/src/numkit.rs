//! Second-order forward-mode jet arithmetic and a central-difference fallback.
//!
//! The jet type [`Jet2`] carries a value, an m-gradient and an m-by-m Hessian
//! and propagates both through arithmetic exactly (to machine precision).
//! Curvature needs precisely two derivative orders, so the arithmetic is
//! truncated there.

use crate::error::{Error, Result};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point of a coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::domain("chart dimension must be at least 2"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("chart coordinates must be finite"));
        }
        Ok(ChartPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// How derivatives of analytic field definitions are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    AutomaticForward,
    CentralDifference,
}

/// Derivative evaluation contract: exact forward jets or finite differences.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeContract {
    pub mode: DerivativeMode,
    pub fd_step: f64,
    pub fd_richardson: bool,
}

impl Default for DerivativeContract {
    fn default() -> Self {
        DerivativeContract {
            mode: DerivativeMode::AutomaticForward,
            fd_step: 1e-5,
            fd_richardson: false,
        }
    }
}

impl DerivativeContract {
    pub fn automatic() -> Self {
        Self::default()
    }

    pub fn central(step: f64, richardson: bool) -> Self {
        assert!(step > 0.0, "finite difference step must be positive");
        DerivativeContract {
            mode: DerivativeMode::CentralDifference,
            fd_step: step,
            fd_richardson: richardson,
        }
    }
}

/// Value, gradient and symmetric Hessian of a scalar field at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2Scalar {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2Scalar {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, s: usize, r: usize) -> f64 {
        self.hess[s * self.grad.len() + r]
    }

    fn check_finite(self) -> Result<Self> {
        if !self.value.is_finite() {
            return Err(Error::Evaluation { index: 0 });
        }
        let m = self.grad.len();
        for (s, g) in self.grad.iter().enumerate() {
            if !g.is_finite() {
                return Err(Error::Evaluation { index: 1 + s });
            }
        }
        for (i, h) in self.hess.iter().enumerate() {
            if !h.is_finite() {
                return Err(Error::Evaluation { index: 1 + m + i });
            }
        }
        Ok(self)
    }
}

/// Scalar arithmetic shared by plain floats and second-order jets, so a field
/// written once can be evaluated exactly (jets) or sampled (floats).
pub trait Scalar:
    Clone
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        f64::recip(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Order-2 truncated Taylor number over an m-dimensional chart.
///
/// Constants are stored with empty gradient/Hessian and broadcast against
/// sized jets, so `Jet2::constant` needs no knowledge of the chart dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: Vec::new(),
            h: Vec::new(),
        }
    }

    /// Seed for the coordinate direction `dir` of an `m`-dimensional chart.
    pub fn variable(v: f64, dir: usize, m: usize) -> Self {
        let mut g = vec![0.0; m];
        g[dir] = 1.0;
        Jet2 {
            v,
            g,
            h: vec![0.0; m * m],
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn grad_at(&self, s: usize) -> f64 {
        if self.g.is_empty() {
            0.0
        } else {
            self.g[s]
        }
    }

    fn hess_at(&self, s: usize, r: usize, m: usize) -> f64 {
        if self.h.is_empty() {
            0.0
        } else {
            self.h[s * m + r]
        }
    }

    /// Chain rule for a unary function with derivatives f', f''.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.dim();
        let mut g = vec![0.0; m];
        let mut h = vec![0.0; m * m];
        for s in 0..m {
            g[s] = f1 * self.g[s];
            for r in 0..m {
                h[s * m + r] = f2 * self.g[s] * self.g[r] + f1 * self.h[s * m + r];
            }
        }
        if m == 0 {
            return Jet2::constant(f0);
        }
        Jet2 { v: f0, g, h }
    }

    /// Expands a constant (broadcast) jet to full size m.
    pub fn promote(&mut self, m: usize) {
        if self.g.len() != m {
            self.g = vec![0.0; m];
        }
        if self.h.len() != m * m {
            self.h = vec![0.0; m * m];
        }
    }

    pub fn into_jet_scalar(self) -> Jet2Scalar {
        let m = self.g.len();
        Jet2Scalar {
            value: self.v,
            grad: self.g,
            hess: if self.h.is_empty() && m > 0 {
                vec![0.0; m * m]
            } else {
                self.h
            },
        }
    }
}

fn binary_dims(a: &Jet2, b: &Jet2) -> usize {
    a.dim().max(b.dim())
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let m = binary_dims(&self, &rhs);
        let mut g = vec![0.0; m];
        let mut h = vec![0.0; m * m];
        for s in 0..m {
            g[s] = self.grad_at(s) + rhs.grad_at(s);
            for r in 0..m {
                h[s * m + r] = self.hess_at(s, r, m) + rhs.hess_at(s, r, m);
            }
        }
        if m == 0 {
            return Jet2::constant(self.v + rhs.v);
        }
        Jet2 {
            v: self.v + rhs.v,
            g,
            h,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        self.v = -self.v;
        for g in &mut self.g {
            *g = -*g;
        }
        for h in &mut self.h {
            *h = -*h;
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let m = binary_dims(&self, &rhs);
        if m == 0 {
            return Jet2::constant(self.v * rhs.v);
        }
        let mut g = vec![0.0; m];
        let mut h = vec![0.0; m * m];
        for s in 0..m {
            g[s] = self.grad_at(s) * rhs.v + self.v * rhs.grad_at(s);
            for r in 0..m {
                h[s * m + r] = self.hess_at(s, r, m) * rhs.v
                    + self.grad_at(s) * rhs.grad_at(r)
                    + self.grad_at(r) * rhs.grad_at(s)
                    + self.v * rhs.hess_at(s, r, m);
            }
        }
        Jet2 {
            v: self.v * rhs.v,
            g,
            h,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)] // quotient rule via reciprocal
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Scalar for Jet2 {
    fn from_f64(c: f64) -> Self {
        Jet2::constant(c)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let v = self.v;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }

    fn recip(self) -> Self {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn abs(self) -> Self {
        let sign = if self.v >= 0.0 { 1.0 } else { -1.0 };
        let av = self.v.abs();
        self.chain(av, sign, 0.0)
    }

    fn powi(self, n: i32) -> Self {
        let v = self.v;
        let f0 = v.powi(n);
        let f1 = f64::from(n) * v.powi(n - 1);
        let f2 = f64::from(n) * f64::from(n - 1) * v.powi(n - 2);
        self.chain(f0, f1, f2)
    }
}

/// A scalar field written generically so it can run on floats or on jets.
pub trait ScalarField {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// Seed the chart coordinates of `p` as jet variables.
pub fn seed_point(p: &ChartPoint) -> Vec<Jet2> {
    let m = p.dim();
    p.coords()
        .iter()
        .enumerate()
        .map(|(i, &c)| Jet2::variable(c, i, m))
        .collect()
}

/// Evaluate value, gradient and Hessian of `field` at `p` under `contract`.
pub fn eval_jet2<F: ScalarField>(
    field: &F,
    p: &ChartPoint,
    contract: &DerivativeContract,
) -> Result<Jet2Scalar> {
    match contract.mode {
        DerivativeMode::AutomaticForward => {
            let jet = field.eval::<Jet2>(&seed_point(p));
            let m = p.dim();
            let mut out = jet.into_jet_scalar();
            if out.grad.len() != m {
                out.grad = vec![0.0; m];
                out.hess = vec![0.0; m * m];
            }
            symmetrize_hess(&mut out.hess, m);
            out.check_finite()
        }
        DerivativeMode::CentralDifference => {
            let f = |x: &[f64]| field.eval::<f64>(x);
            fd_jet2(&f, p.coords(), contract.fd_step, contract.fd_richardson)
                .and_then(Jet2Scalar::check_finite)
        }
    }
}

fn symmetrize_hess(h: &mut [f64], m: usize) {
    for s in 0..m {
        for r in (s + 1)..m {
            let avg = 0.5 * (h[s * m + r] + h[r * m + s]);
            h[s * m + r] = avg;
            h[r * m + s] = avg;
        }
    }
}

/// Central-difference jet of a plain function, O(h^2), or O(h^4) with one
/// Richardson extrapolation level.
pub fn fd_jet2<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    h: f64,
    richardson: bool,
) -> Result<Jet2Scalar> {
    let m = x.len();
    let value = f(x);
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m * m];

    let eval_shift = |shifts: &[(usize, f64)]| -> f64 {
        let mut y = x.to_vec();
        for &(i, d) in shifts {
            y[i] += d;
        }
        f(&y)
    };

    let grad_estimate = |s: usize, step: f64| -> f64 {
        (eval_shift(&[(s, step)]) - eval_shift(&[(s, -step)])) / (2.0 * step)
    };
    let diag_estimate = |s: usize, step: f64| -> f64 {
        (eval_shift(&[(s, step)]) - 2.0 * value + eval_shift(&[(s, -step)])) / (step * step)
    };
    let mixed_estimate = |s: usize, r: usize, step: f64| -> f64 {
        (eval_shift(&[(s, step), (r, step)])
            - eval_shift(&[(s, step), (r, -step)])
            - eval_shift(&[(s, -step), (r, step)])
            + eval_shift(&[(s, -step), (r, -step)]))
            / (4.0 * step * step)
    };
    // Error is c*h^2 + O(h^4) for all three stencils, so one extrapolation
    // level against step 2h removes the leading term.
    let extrapolate = |d_h: f64, d_2h: f64| (4.0 * d_h - d_2h) / 3.0;

    for s in 0..m {
        grad[s] = if richardson {
            extrapolate(grad_estimate(s, h), grad_estimate(s, 2.0 * h))
        } else {
            grad_estimate(s, h)
        };
        for r in s..m {
            let v = if s == r {
                if richardson {
                    extrapolate(diag_estimate(s, h), diag_estimate(s, 2.0 * h))
                } else {
                    diag_estimate(s, h)
                }
            } else if richardson {
                extrapolate(mixed_estimate(s, r, h), mixed_estimate(s, r, 2.0 * h))
            } else {
                mixed_estimate(s, r, h)
            };
            hess[s * m + r] = v;
            hess[r * m + s] = v;
        }
    }

    Ok(Jet2Scalar { value, grad, hess })
}

// ---------------------------------------------------------------------------
// Dense matrix helpers, generic over the scalar so jets flow through matrix
// inverses unchanged.
// ---------------------------------------------------------------------------

pub mod matrix {
    use super::Scalar;
    use crate::error::{Error, Result};

    pub fn zeros<S: Scalar>(m: usize) -> Vec<S> {
        vec![S::from_f64(0.0); m * m]
    }

    pub fn identity<S: Scalar>(m: usize) -> Vec<S> {
        let mut a = zeros::<S>(m);
        for i in 0..m {
            a[i * m + i] = S::from_f64(1.0);
        }
        a
    }

    pub fn mat_mul<S: Scalar>(m: usize, a: &[S], b: &[S]) -> Vec<S> {
        let mut c = zeros::<S>(m);
        for i in 0..m {
            for k in 0..m {
                let aik = a[i * m + k].clone();
                for j in 0..m {
                    c[i * m + j] = c[i * m + j].clone() + aik.clone() * b[k * m + j].clone();
                }
            }
        }
        c
    }

    pub fn transpose<S: Scalar>(m: usize, a: &[S]) -> Vec<S> {
        let mut t = zeros::<S>(m);
        for i in 0..m {
            for j in 0..m {
                t[j * m + i] = a[i * m + j].clone();
            }
        }
        t
    }

    /// Gauss-Jordan inverse with partial pivoting on the value part.
    pub fn mat_inv<S: Scalar>(m: usize, a: &[S]) -> Result<Vec<S>> {
        let mut w = a.to_vec();
        let mut inv = identity::<S>(m);
        for col in 0..m {
            let mut pivot = col;
            let mut best = w[col * m + col].value().abs();
            for row in (col + 1)..m {
                let c = w[row * m + col].value().abs();
                if c > best {
                    best = c;
                    pivot = row;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMetric);
            }
            if pivot != col {
                for j in 0..m {
                    w.swap(col * m + j, pivot * m + j);
                    inv.swap(col * m + j, pivot * m + j);
                }
            }
            let d = w[col * m + col].clone().recip();
            for j in 0..m {
                w[col * m + j] = w[col * m + j].clone() * d.clone();
                inv[col * m + j] = inv[col * m + j].clone() * d.clone();
            }
            for row in 0..m {
                if row == col {
                    continue;
                }
                let factor = w[row * m + col].clone();
                for j in 0..m {
                    w[row * m + j] =
                        w[row * m + j].clone() - factor.clone() * w[col * m + j].clone();
                    inv[row * m + j] =
                        inv[row * m + j].clone() - factor.clone() * inv[col * m + j].clone();
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by LU elimination with partial pivoting (value part only).
    pub fn det(m: usize, a: &[f64]) -> f64 {
        let mut w = a.to_vec();
        let mut d = 1.0;
        for col in 0..m {
            let mut pivot = col;
            let mut best = w[col * m + col].abs();
            for row in (col + 1)..m {
                if w[row * m + col].abs() > best {
                    best = w[row * m + col].abs();
                    pivot = row;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..m {
                    w.swap(col * m + j, pivot * m + j);
                }
                d = -d;
            }
            d *= w[col * m + col];
            for row in (col + 1)..m {
                let factor = w[row * m + col] / w[col * m + col];
                for j in col..m {
                    w[row * m + j] -= factor * w[col * m + j];
                }
            }
        }
        d
    }

    pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(a: &[f64]) -> f64 {
        a.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}
