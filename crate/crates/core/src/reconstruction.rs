//! Lifting a metric field on a chart to a frame-plus-connection section in
//! the distinguished polar gauge, and round-trip verification against the
//! reduction map.

use crate::connections::{levi_civita, palatini_residual, ConnectionCoeffs, ResidualReport};
use crate::error::{Error, Result};
use crate::etalinalg::{cartan_split, vielbein_from_metric, SignatureMatrix};
use crate::fixtures::NamedMetric;
use crate::framebundle::{inverse_frame_components, MetricJet2, VielbeinJet1};
use crate::numkit::matrix::max_abs_diff;
use crate::numkit::DerivativeContract;
use crate::reduction::reduce_f_omega;

/// One chart point of a reconstructed section: the polar-gauge frame jet and
/// the compatible torsionless metric connection, alongside the metric jet the
/// point was built from.
#[derive(Debug, Clone)]
pub struct SectionPoint {
    pub metric: MetricJet2,
    pub vielbein: VielbeinJet1,
    pub connection: ConnectionCoeffs,
}

/// Core pointwise reconstruction: polar-gauge frame from the metric, jet
/// coordinates from the Levi-Civita connection, e^mu_{k sigma} = -e_k^rho
/// Gamma^mu_{rho sigma}. SpectrumError is tagged with the chart point.
pub fn palatini_section_from_jet(g: &MetricJet2, eta: &SignatureMatrix) -> Result<SectionPoint> {
    let m = g.dim();
    let e = vielbein_from_metric(g.g(), eta).map_err(|err| match err {
        Error::Spectrum { re, im } => Error::SpectrumAtPoint {
            coords: g.at().coords().to_vec(),
            re,
            im,
        },
        other => other,
    })?;
    let lc = levi_civita(g)?;
    let mut de = vec![0.0; m * m * m];
    for k in 0..m {
        for mu in 0..m {
            for sigma in 0..m {
                let mut s = 0.0;
                for rho in 0..m {
                    s -= e[k * m + rho] * lc.at(mu, rho, sigma);
                }
                de[(k * m + mu) * m + sigma] = s;
            }
        }
    }
    let vielbein = VielbeinJet1::new(e, de, g.at().clone())?;
    Ok(SectionPoint {
        metric: g.clone(),
        vielbein,
        connection: lc,
    })
}

/// Reconstructs the section of a named metric field over a set of points.
pub fn reconstruct(
    def: &NamedMetric,
    points: &[Vec<f64>],
    contract: &DerivativeContract,
) -> Result<Vec<SectionPoint>> {
    points
        .iter()
        .map(|x| {
            let jet = def.jet_at(x, contract)?;
            palatini_section_from_jet(&jet, &def.eta)
        })
        .collect()
}

/// The four field-equation residual families of a reconstructed point.
pub fn verify_section_point(
    p: &SectionPoint,
    eta: &SignatureMatrix,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    palatini_residual(&p.vielbein, eta, None, Some(&p.connection), tol)
}

/// Max over the grid of the difference between the reduced section jet and
/// the analytic metric jet: || F_omega(Z) - j^1 zeta ||.
pub fn round_trip_reduce_reconstruct(
    def: &NamedMetric,
    points: &[Vec<f64>],
    contract: &DerivativeContract,
    tol: f64,
) -> Result<ResidualReport> {
    let mut worst = vec![0.0f64; 2];
    for x in points {
        let jet = def.jet_at(x, contract)?;
        let section = palatini_section_from_jet(&jet, &def.eta)?;
        let reduced = reduce_f_omega(&section.vielbein, &def.eta);
        worst[0] = worst[0].max(max_abs_diff(reduced.g(), jet.g()));
        worst[1] = worst[1].max(max_abs_diff(reduced.dg(), jet.dg()));
    }
    Ok(ResidualReport::new("round_trip", worst, vec![2], tol))
}

/// Gauge-coherence check along a path of section points with a uniformly
/// varying coordinate: the p-part of e^-1 (de/dx) from centered differences
/// of the frame field must match the p-part of e^-1 de from the section jet.
/// The k-parts may differ (they carry the gauge rotation rate); the p-part is
/// gauge-independent.
pub fn section_continuity_residual(
    points: &[SectionPoint],
    eta: &SignatureMatrix,
    axis: usize,
) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::domain(
            "continuity check needs at least three points",
        ));
    }
    let m = eta.dim();
    let mut worst = 0.0f64;
    for w in points.windows(3) {
        let (prev, mid, next) = (&w[0], &w[1], &w[2]);
        let h1 = mid.metric.at().coords()[axis] - prev.metric.at().coords()[axis];
        let h2 = next.metric.at().coords()[axis] - mid.metric.at().coords()[axis];
        if (h1 - h2).abs() > 1e-12 * h1.abs().max(1.0) || h1 == 0.0 {
            return Err(Error::domain("continuity check needs a uniform grid"));
        }
        let ei = inverse_frame_components(m, mid.vielbein.e())?;
        // finite-difference log-derivative of the frame field along the axis
        let mut fd = vec![0.0; m * m];
        for l in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for mu in 0..m {
                    let d =
                        (next.vielbein.e()[k * m + mu] - prev.vielbein.e()[k * m + mu]) / (h1 + h2);
                    s += ei[l * m + mu] * d;
                }
                fd[l * m + k] = s;
            }
        }
        // jet-based log-derivative along the same axis
        let mut jet = vec![0.0; m * m];
        for l in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for mu in 0..m {
                    s += ei[l * m + mu] * mid.vielbein.de_at(k, mu, axis);
                }
                jet[l * m + k] = s;
            }
        }
        let (_, fd_p) = cartan_split(&fd, eta);
        let (_, jet_p) = cartan_split(&jet, eta);
        worst = worst.max(max_abs_diff(&fd_p, &jet_p));
    }
    Ok(worst)
}
