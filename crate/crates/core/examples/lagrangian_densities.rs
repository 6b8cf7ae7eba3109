//! Compare the gravity density in connection variables with its first-order
//! form in metric-jet variables, and let the brute-force epsilon-contraction
//! determine the normalization constant per dimension.
//!
//!     cargo run --example lagrangian_densities

use palatini_routh::connections::levi_civita;
use palatini_routh::etalinalg::SignatureMatrix;
use palatini_routh::fixtures::{get_fixture, synthetic_fixture, SyntheticMetric};
use palatini_routh::lagrangians::{
    eh_first_order_density, epsilon_contraction_oracle, kappa, palatini_density,
};
use palatini_routh::numkit::DerivativeContract;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::HashMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = DerivativeContract::automatic();

    // unit sphere: scalar curvature 2, so the density is kappa_2 sqrt|g| * 2
    let sphere = get_fixture("sphere2", &HashMap::new())?;
    let theta = 0.9f64;
    let jet = sphere.jet_at(&[theta, 0.3], &contract)?;
    let d = eh_first_order_density(&jet)?;
    println!("unit sphere at theta = {theta}:");
    println!("  density        = {:.12}", d.density);
    println!("  kappa_2*sin*2  = {:.12}", kappa(2) * theta.sin() * 2.0);

    // vacuum solution: density vanishes
    let schw = get_fixture("schwarzschild", &HashMap::new())?;
    let jet = schw.jet_at(&[0.0, 5.0, 1.2, 0.3], &contract)?;
    let lc = levi_civita(&jet)?;
    let pal = palatini_density(&jet, &lc)?;
    let eh = eh_first_order_density(&jet)?;
    println!("\nschwarzschild at r = 5:");
    println!("  connection-variable density = {:+.3e}", pal.density);
    println!("  first-order jet density     = {:+.3e}", eh.density);
    println!(
        "  difference                  = {:+.3e}",
        (pal.density - eh.density).abs()
    );

    // epsilon-contraction oracle pins the per-dimension constant
    let mut rng = StdRng::seed_from_u64(42);
    for m in [2usize, 3, 4] {
        let mut ratios = Vec::new();
        while ratios.len() < 20 {
            let mut terms = Vec::new();
            for _ in 0..3 {
                let mut sym = vec![0.0; m * m];
                for i in 0..m {
                    for j in i..m {
                        let a = rng.gen_range(-0.04..0.04);
                        sym[i * m + j] = a;
                        sym[j * m + i] = a;
                    }
                }
                let wave: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                terms.push((sym, wave, rng.gen_range(0.0..std::f64::consts::TAU)));
            }
            let fixture = synthetic_fixture(
                "random",
                SyntheticMetric::new(SignatureMatrix::lorentzian(m), terms)?,
            );
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let jet = fixture.jet_at(&x, &contract)?;
            let lc = levi_civita(&jet)?;
            let oracle = epsilon_contraction_oracle(&jet, &lc)?;
            let direct = palatini_density(&jet, &lc)?;
            let unnormalized = direct.density / direct.normalization;
            if unnormalized.abs() > 1e-4 {
                ratios.push(oracle / unnormalized);
            }
        }
        let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let sd =
            (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64).sqrt();
        println!(
            "\nm = {m}: oracle/density ratio = {mean:.12} (stddev {sd:.1e}), kappa_{m} = {}",
            kappa(m)
        );
        assert!((mean - kappa(m)).abs() < 1e-9 && sd < 1e-10);
    }
    Ok(())
}
