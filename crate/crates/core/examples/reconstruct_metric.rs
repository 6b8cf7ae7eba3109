//! Lift a metric back to frame-plus-connection data in the polar gauge and
//! check the whole round trip: the lifted section solves the first-order
//! field-equation families exactly when the metric is a vacuum solution, and
//! its reduction reproduces the metric jet.
//!
//!     cargo run --example reconstruct_metric

use palatini_routh::numkit::DerivativeContract;
use palatini_routh::reconstruction::{
    reconstruct, round_trip_reduce_reconstruct, section_continuity_residual, verify_section_point,
};
use std::collections::HashMap;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contract = DerivativeContract::automatic();

    for name in ["schwarzschild", "desitter_static"] {
        let fixture = palatini_routh::fixtures::get_fixture(name, &HashMap::new())?;
        let n = 60;
        let (lo, hi) = if name == "schwarzschild" {
            (3.0, 10.0)
        } else {
            (0.5, 5.0)
        };
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![0.0, lo + (hi - lo) * i as f64 / (n - 1) as f64, 1.2, 0.3])
            .collect();

        let sections = reconstruct(&fixture, &points, &contract)?;
        let mut worst = HashMap::<String, f64>::new();
        for s in &sections {
            for rep in verify_section_point(s, &fixture.eta, 1e-8)? {
                let w = worst.entry(rep.name.clone()).or_insert(0.0);
                *w = w.max(rep.max_abs);
            }
        }
        println!("{name}: residual families of the reconstructed section over {n} radial points");
        for family in ["ricci", "compatibility", "torsion", "metricity"] {
            println!("  {family:>14}: {:.3e}", worst[family]);
        }

        let rt = round_trip_reduce_reconstruct(&fixture, &points, &contract, 1e-9)?;
        println!(
            "  reduction of the section vs analytic jet: {:.3e}",
            rt.max_abs
        );
        assert!(rt.pass);

        let cont = section_continuity_residual(&sections, &fixture.eta, 1)?;
        println!("  polar gauge continuity along the path:    {cont:.3e}\n");
    }

    println!("the curvature family vanishes only for the vacuum solution;");
    println!("torsion, compatibility and metricity vanish for both, as the");
    println!("section is built from the metric connection either way.");
    Ok(())
}
