//! The generalized polar decomposition relative to an indefinite signature,
//! and the distinguished vielbein it selects for a metric.
//!
//!     cargo run --example polar_gauge

use palatini_routh::etalinalg::{
    generalized_polar_decompose, polar_factor_residuals, vielbein_from_metric, SignatureMatrix,
};
use palatini_routh::numkit::matrix::{mat_mul, max_abs_diff, transpose};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eta = SignatureMatrix::lorentzian(4);

    // diagonal covariant metric: factors can be written down by hand
    let (a, b) = (1.4, 0.8);
    let mut g = vec![0.0; 16];
    g[0] = -a * a;
    g[5] = b * b;
    g[10] = b * b;
    g[15] = b * b;
    let f = generalized_polar_decompose(&g, &eta)?;
    let (recomb, iso, sym) = polar_factor_residuals(&g, &f, &eta);
    println!("diag(-a^2, b^2, b^2, b^2) with a = {a}, b = {b}:");
    println!(
        "  s diagonal  = [{:.4}, {:.4}, {:.4}, {:.4}]",
        f.s[0], f.s[5], f.s[10], f.s[15]
    );
    println!(
        "  Q diagonal  = [{:.4}, {:.4}, {:.4}, {:.4}]",
        f.q[0], f.q[5], f.q[10], f.q[15]
    );
    println!(
        "  residuals: recombination {recomb:.1e}, isometry {iso:.1e}, selfadjointness {sym:.1e}"
    );

    // random metrics near the signature matrix
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut g = eta.dense();
        for i in 0..4 {
            for j in i..4 {
                let d = rng.gen_range(-0.02..0.02);
                g[i * 4 + j] += d;
                if i != j {
                    g[j * 4 + i] += d;
                }
            }
        }
        let f = generalized_polar_decompose(&g, &eta)?;
        let (r1, r2, r3) = polar_factor_residuals(&g, &f, &eta);
        worst = worst.max(r1).max(r2).max(r3);
    }
    println!("\n200 random metrics near eta: worst factor residual {worst:.2e}");

    // the vielbein the polar gauge distinguishes
    let mut g_contra = vec![0.0; 16];
    g_contra[0] = -1.0 / (a * a);
    g_contra[5] = 1.0 / (b * b);
    g_contra[10] = 1.0 / (b * b);
    g_contra[15] = 1.0 / (b * b);
    let e = vielbein_from_metric(&g_contra, &eta)?;
    println!("\npolar-gauge vielbein of diag(-1/a^2, 1/b^2, ...):");
    println!(
        "  e diagonal  = [{:.4}, {:.4}, {:.4}, {:.4}]",
        e[0], e[5], e[10], e[15]
    );
    let back = mat_mul(4, &eta.right_mul(&transpose(4, &e)), &e);
    println!(
        "  frame reproduces the metric to {:.2e}",
        max_abs_diff(&back, &g_contra)
    );

    // outside the admissible neighborhood the factorization refuses to guess
    let eta2 = SignatureMatrix::lorentzian(2);
    match generalized_polar_decompose(&[0.0, 1.0, 1.0, 0.0], &eta2) {
        Err(err) => println!("\nboundary case [[0,1],[1,0]]: {err}"),
        Ok(_) => panic!("boundary case must be rejected"),
    }
    Ok(())
}
