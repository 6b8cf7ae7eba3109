//! Horizontal lifts of base and fiber directions for the connection induced
//! on the frame-over-metric bundle, checked against their two defining
//! conditions: projecting back to the lifted direction and annihilation by
//! the k-valued connection form.
//!
//!     cargo run --example horizontal_lifts

use palatini_routh::etalinalg::SignatureMatrix;
use palatini_routh::framebundle::{metric_from_vielbein, VielbeinJet1};
use palatini_routh::numkit::ChartPoint;
use palatini_routh::reduction::{
    holonomic_lift, horizontal_lift_base, horizontal_lift_fiber, lift_connection_residual_base,
    lift_connection_residual_fiber, lift_projection_residual_base, lift_projection_residual_fiber,
    reduce_f_omega, BackgroundConnection,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = StdRng::seed_from_u64(23);
    for m in [2usize, 3, 4] {
        let eta = SignatureMatrix::lorentzian(m);
        let mut worst_proj = 0.0f64;
        let mut worst_conn = 0.0f64;
        for _ in 0..50 {
            // a frame near identity and its induced metric
            let at = ChartPoint::new(vec![0.0; m])?;
            let mut e = vec![0.0; m * m];
            for k in 0..m {
                for mu in 0..m {
                    e[k * m + mu] = if k == mu { 1.0 } else { 0.0 } + rng.gen_range(-0.2..0.2);
                }
            }
            let v = VielbeinJet1::new(e, vec![0.0; m * m * m], at)?;
            let g = metric_from_vielbein(&v, &eta);
            let gb: Vec<f64> = (0..m * m * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let bc = BackgroundConnection::new(m, gb)?;

            for mu in 0..m {
                let n = horizontal_lift_base(mu, v.e(), &g, &bc)?;
                worst_proj = worst_proj.max(lift_projection_residual_base(&n, v.e(), &eta));
                worst_conn =
                    worst_conn.max(lift_connection_residual_base(mu, &n, v.e(), &bc, &eta)?);
                for nu in 0..m {
                    let q = horizontal_lift_fiber(mu, nu, v.e(), &g)?;
                    worst_proj =
                        worst_proj.max(lift_projection_residual_fiber(mu, nu, &q, v.e(), &eta));
                    worst_conn = worst_conn.max(lift_connection_residual_fiber(&q, v.e(), &eta)?);
                }
            }
        }
        println!(
            "m = {m}: 50 random (frame, background) draws; projection {worst_proj:.2e}, connection {worst_conn:.2e}"
        );
        assert!(worst_proj < 1e-12 && worst_conn < 1e-12);
    }

    // the holonomic combination lifts a full metric jet to a frame jet whose
    // reduction gives the jet back, for any background
    let m = 4;
    let eta = SignatureMatrix::lorentzian(m);
    let at = ChartPoint::new(vec![0.0; m])?;
    let mut e = vec![0.0; m * m];
    for k in 0..m {
        e[k * m + k] = 1.0 + rng.gen_range(-0.1..0.1);
    }
    let v = VielbeinJet1::new(e.clone(), vec![0.0; m * m * m], at.clone())?;
    let mut g = metric_from_vielbein(&v, &eta);
    let mut dg = vec![0.0; m * m * m];
    for i in 0..m {
        for j in i..m {
            for s in 0..m {
                let d = rng.gen_range(-0.3..0.3);
                dg[(i * m + j) * m + s] = d;
                dg[(j * m + i) * m + s] = d;
            }
        }
    }
    g = palatini_routh::framebundle::MetricJet2::new(g.g().to_vec(), dg, None, at)?;
    let gb: Vec<f64> = (0..m * m * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let bc = BackgroundConnection::new(m, gb)?;
    let lifted = holonomic_lift(&g, &e, &bc)?;
    let back = reduce_f_omega(&lifted, &eta);
    let dev = palatini_routh::numkit::matrix::max_abs_diff(back.dg(), g.dg());
    println!("\nholonomic lift round trip through the reduction map: {dev:.2e}");
    assert!(dev < 1e-11);
    Ok(())
}
