//! Evaluate the vacuum field-equation residual of built-in metrics over a
//! chart grid, with exact forward-mode jets and with finite differences.
//!
//!     cargo run --example verify_vacuum

use palatini_routh::connections::vacuum_einstein_residual;
use palatini_routh::fixtures::get_fixture;
use palatini_routh::numkit::DerivativeContract;
use std::collections::HashMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schwarzschild = get_fixture("schwarzschild", &HashMap::from([("M".into(), 1.0)]))?;
    let perturbed = get_fixture(
        "perturbed_schwarzschild",
        &HashMap::from([("M".into(), 1.0), ("eps".into(), 0.1)]),
    )?;

    let mut grid = Vec::new();
    for i in 0..25 {
        for j in 0..10 {
            grid.push(vec![
                0.0,
                3.0 + 7.0 * i as f64 / 24.0,
                0.1 + 2.9 * j as f64 / 9.0,
                0.0,
            ]);
        }
    }

    for (fixture, label) in [(&schwarzschild, "schwarzschild"), (&perturbed, "perturbed")] {
        for contract in [
            DerivativeContract::automatic(),
            DerivativeContract::central(5e-4, true),
        ] {
            let mode = match contract.mode {
                palatini_routh::numkit::DerivativeMode::AutomaticForward => "ad",
                palatini_routh::numkit::DerivativeMode::CentralDifference => "fd",
            };
            let mut worst = 0.0f64;
            for x in &grid {
                let jet = fixture.jet_at(x, &contract)?;
                let rep = vacuum_einstein_residual(&jet, 1e-8)?;
                worst = worst.max(rep.max_abs);
            }
            println!(
                "{label:>13} [{mode}]  max |Ricci| over {} points: {worst:.3e}",
                grid.len()
            );
        }
    }

    let jet = schwarzschild.jet_at(&[0.0, 5.0, 1.2, 0.3], &DerivativeContract::automatic())?;
    let rep = vacuum_einstein_residual(&jet, 1e-8)?;
    assert!(rep.pass, "schwarzschild must verify as a vacuum solution");
    println!("\nschwarzschild is a vacuum solution, the perturbed mass profile is not.");
    Ok(())
}
