//! The order-2 jet kernel: exact forward-mode derivatives of field
//! definitions, with the central-difference fallback for comparison.
//!
//!     cargo run --example jet_arithmetic

use palatini_routh::numkit::{eval_jet2, ChartPoint, DerivativeContract, Scalar, ScalarField};

/// f(x) = exp(x0 * x1) * sin(x1) + x0^3
struct Demo;

impl ScalarField for Demo {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let (u, v) = (x[0].clone(), x[1].clone());
        (u.clone() * v.clone()).exp() * v.sin() + u.clone() * u.clone() * u
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ChartPoint::new(vec![0.7, 1.1])?;
    let ad = eval_jet2(&Demo, &p, &DerivativeContract::automatic())?;
    println!("f(0.7, 1.1)         = {:.15}", ad.value);
    println!(
        "grad f              = [{:.15}, {:.15}]",
        ad.grad[0], ad.grad[1]
    );
    println!(
        "hess f              = [[{:.12}, {:.12}], [{:.12}, {:.12}]]",
        ad.hess_at(0, 0),
        ad.hess_at(0, 1),
        ad.hess_at(1, 0),
        ad.hess_at(1, 1)
    );

    // closed form for the (0,0) second derivative:
    // d2/du2 [e^{uv} sin v + u^3] = v^2 e^{uv} sin v + 6u
    let (u, v): (f64, f64) = (0.7, 1.1);
    let expect = v * v * (u * v).exp() * v.sin() + 6.0 * u;
    println!("closed-form d2f/du2 = {expect:.15}");
    assert!((ad.hess_at(0, 0) - expect).abs() < 1e-13);

    for (step, richardson) in [(1e-3, false), (1e-2, true)] {
        let fd = eval_jet2(&Demo, &p, &DerivativeContract::central(step, richardson))?;
        let mut worst = (ad.value - fd.value).abs();
        for s in 0..2 {
            worst = worst.max((ad.grad[s] - fd.grad[s]).abs());
            for r in 0..2 {
                worst = worst.max((ad.hess_at(s, r) - fd.hess_at(s, r)).abs());
            }
        }
        println!(
            "central differences, step {step:.0e}, richardson {richardson}: max |fd - ad| = {worst:.2e}"
        );
    }
    Ok(())
}
