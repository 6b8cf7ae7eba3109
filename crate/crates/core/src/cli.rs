//! Command-line driver: residual verification, reduction of frame files,
//! reconstruction of named metrics, and Lagrangian evaluation, all emitting
//! machine-readable JSON reports.
//!
//! Exit codes: 0 all residuals pass, 1 residual failure, 2 usage or domain
//! error. `PALATINI_ROUTH_THREADS` caps the worker pool.

use crate::connections::{palatini_residual, vacuum_einstein_residual, ResidualReport};
use crate::error::{Error, Result};
use crate::fixtures::{get_fixture, NamedMetric};
use crate::framebundle::{metric_from_vielbein, MetricJet2, VielbeinJet1};
use crate::lagrangians::{eh_first_order_density, palatini_density};
use crate::numkit::{ChartPoint, DerivativeContract};
use crate::reconstruction::{palatini_section_from_jet, reconstruct};
use crate::reduction::reduce_f_omega;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct PointReport {
    pub coords: Vec<f64>,
    pub residuals: Vec<ResidualReport>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total_points: usize,
    pub max_residual: f64,
    pub all_pass: bool,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub points: Vec<PointReport>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub densities: Option<Densities>,
}

#[derive(Debug, Serialize)]
pub struct Densities {
    pub palatini: f64,
    pub eh_first_order: f64,
    pub difference: f64,
    pub normalization: f64,
}

impl Report {
    fn assemble(command: &str, points: Vec<PointReport>, tolerance: f64) -> Report {
        let max_residual = points
            .iter()
            .flat_map(|p| p.residuals.iter())
            .map(|r| r.max_abs)
            .fold(0.0, f64::max);
        let all_pass = points.iter().all(|p| p.residuals.iter().all(|r| r.pass));
        Report {
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            summary: Summary {
                total_points: points.len(),
                max_residual,
                all_pass,
                tolerance,
            },
            points,
            densities: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Sampled-field record formats (JSON lines, one record per point)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub x: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRecord {
    pub x: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dg: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddg: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

pub fn flatten2(v: &[Vec<f64>]) -> Vec<f64> {
    v.iter().flatten().copied().collect()
}

pub fn flatten3(v: &[Vec<Vec<f64>>]) -> Vec<f64> {
    v.iter().flatten().flatten().copied().collect()
}

pub fn flatten4(v: &[Vec<Vec<Vec<f64>>>]) -> Vec<f64> {
    v.iter().flatten().flatten().flatten().copied().collect()
}

pub fn nest2(m: usize, a: &[f64]) -> Vec<Vec<f64>> {
    (0..m).map(|i| a[i * m..(i + 1) * m].to_vec()).collect()
}

pub fn nest3(m: usize, a: &[f64]) -> Vec<Vec<Vec<f64>>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| a[(i * m + j) * m..(i * m + j) * m + m].to_vec())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Grid mini-language: name=lo..hi:count fixed values as name=v, comma joined
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum GridAxis {
    Fixed(f64),
    Range { lo: f64, hi: f64, count: usize },
}

#[derive(Debug, Clone, Default)]
pub struct GridSpec {
    axes: Vec<(String, GridAxis)>,
}

impl GridSpec {
    pub fn parse(spec: &str) -> Result<GridSpec> {
        let mut axes = Vec::new();
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (name, rest) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("grid axis '{part}' lacks '='")))?;
            let axis = if let Some((range, count)) = rest.split_once(':') {
                let (lo, hi) = range
                    .split_once("..")
                    .ok_or_else(|| Error::parse(format!("grid range '{rest}' lacks '..'")))?;
                let lo: f64 = lo
                    .parse()
                    .map_err(|_| Error::parse(format!("bad grid bound '{lo}'")))?;
                let hi: f64 = hi
                    .parse()
                    .map_err(|_| Error::parse(format!("bad grid bound '{hi}'")))?;
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::parse(format!("bad grid count '{count}'")))?;
                if count == 0 {
                    return Err(Error::parse("grid count must be positive"));
                }
                GridAxis::Range { lo, hi, count }
            } else {
                let v: f64 = rest
                    .parse()
                    .map_err(|_| Error::parse(format!("bad grid value '{rest}'")))?;
                GridAxis::Fixed(v)
            };
            axes.push((name.to_string(), axis));
        }
        Ok(GridSpec { axes })
    }

    /// Cartesian product over the fixture's coordinate order; unnamed
    /// coordinates stay at the fixture default. Deterministic row-major
    /// ordering with the last coordinate fastest.
    pub fn expand(&self, fixture: &NamedMetric) -> Result<Vec<Vec<f64>>> {
        for (name, _) in &self.axes {
            if !fixture.coords.contains(&name.as_str()) {
                return Err(Error::parse(format!(
                    "grid axis '{name}' is not a coordinate of fixture '{}' (coords: {:?})",
                    fixture.name, fixture.coords
                )));
            }
        }
        let mut axis_values: Vec<Vec<f64>> = Vec::with_capacity(fixture.dim);
        for (i, coord) in fixture.coords.iter().enumerate() {
            let axis = self
                .axes
                .iter()
                .find(|(name, _)| name == coord)
                .map(|(_, a)| a.clone())
                .unwrap_or(GridAxis::Fixed(fixture.default_point[i]));
            let values = match axis {
                GridAxis::Fixed(v) => vec![v],
                GridAxis::Range { lo, hi, count } => {
                    if count == 1 {
                        vec![0.5 * (lo + hi)]
                    } else {
                        (0..count)
                            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                            .collect()
                    }
                }
            };
            axis_values.push(values);
        }
        let total: usize = axis_values.iter().map(|v| v.len()).product();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; fixture.dim];
        for _ in 0..total {
            points.push(
                idx.iter()
                    .enumerate()
                    .map(|(axis, &k)| axis_values[axis][k])
                    .collect(),
            );
            for pos in (0..fixture.dim).rev() {
                idx[pos] += 1;
                if idx[pos] < axis_values[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Ok(points)
    }
}

// ---------------------------------------------------------------------------
// Worker pool: deterministic ordering, thread count capped by the env var
// ---------------------------------------------------------------------------

pub fn worker_count(n_items: usize) -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("PALATINI_ROUTH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(available);
    cap.min(available).min(n_items.max(1))
}

pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = worker_count(items.len());
    if threads <= 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let mut results: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    let fref = &f;
    std::thread::scope(|scope| {
        for (item_chunk, result_chunk) in items.chunks(chunk).zip(results.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (t, slot) in item_chunk.iter().zip(result_chunk.iter_mut()) {
                    *slot = Some(fref(t));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("worker filled slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// Tensor-product grids over sampled records (for absent derivatives)
// ---------------------------------------------------------------------------

/// Reconstructs a full tensor-product grid from scattered records and offers
/// centered finite differences of any per-record quantity along the axes.
pub struct RecordGrid {
    dim: usize,
    axes: Vec<Vec<f64>>,
    /// record index per grid node, row-major (last axis fastest)
    nodes: Vec<usize>,
}

impl RecordGrid {
    pub fn build(points: &[Vec<f64>]) -> Result<RecordGrid> {
        if points.is_empty() {
            return Err(Error::domain("no records"));
        }
        let dim = points[0].len();
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for p in points {
            if p.len() != dim {
                return Err(Error::domain("records have inconsistent dimensions"));
            }
            for (axis, &v) in p.iter().enumerate() {
                if !axes[axis]
                    .iter()
                    .any(|&a| (a - v).abs() <= 1e-12 * v.abs().max(1.0))
                {
                    axes[axis].push(v);
                }
            }
        }
        for a in &mut axes {
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        }
        let total: usize = axes.iter().map(|a| a.len()).product();
        if total != points.len() {
            return Err(Error::domain(format!(
                "records do not form a full tensor-product grid ({} records, {} grid nodes)",
                points.len(),
                total
            )));
        }
        let mut nodes = vec![usize::MAX; total];
        for (rec, p) in points.iter().enumerate() {
            let mut flat = 0;
            for (axis, &v) in p.iter().enumerate() {
                let k = axes[axis]
                    .iter()
                    .position(|&a| (a - v).abs() <= 1e-12 * v.abs().max(1.0))
                    .expect("value indexed during axis collection");
                flat = flat * axes[axis].len() + k;
            }
            if nodes[flat] != usize::MAX {
                return Err(Error::domain("duplicate record coordinates"));
            }
            nodes[flat] = rec;
        }
        Ok(RecordGrid { dim, axes, nodes })
    }

    fn node(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (axis, &k) in idx.iter().enumerate() {
            flat = flat * self.axes[axis].len() + k;
        }
        self.nodes[flat]
    }

    fn index_of(&self, rec: usize) -> Vec<usize> {
        let flat = self.nodes.iter().position(|&n| n == rec).expect("record");
        let mut idx = vec![0usize; self.dim];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rem % self.axes[axis].len();
            rem /= self.axes[axis].len();
        }
        idx
    }

    /// d(values)/dx^axis at the given record by centered differences
    /// (one-sided at the boundary). `values` maps a record index to a flat
    /// tensor; the derivative is entrywise. An axis sampled at a single value
    /// is treated as a symmetry direction: the derivative along it is zero.
    pub fn fd_axis(
        &self,
        rec: usize,
        axis: usize,
        values: &dyn Fn(usize) -> Vec<f64>,
    ) -> Result<Vec<f64>> {
        let idx = self.index_of(rec);
        let n = self.axes[axis].len();
        if n < 2 {
            return Ok(vec![0.0; values(rec).len()]);
        }
        let k = idx[axis];
        let at = |pos: usize| {
            let mut j = idx.clone();
            j[axis] = pos;
            (self.axes[axis][pos], values(self.node(&j)))
        };
        if k > 0 && k < n - 1 {
            let (x_lo, v_lo) = at(k - 1);
            let (x_hi, v_hi) = at(k + 1);
            return Ok(v_lo
                .iter()
                .zip(v_hi.iter())
                .map(|(a, b)| (b - a) / (x_hi - x_lo))
                .collect());
        }
        if n == 2 {
            let (x_lo, v_lo) = at(0);
            let (x_hi, v_hi) = at(1);
            return Ok(v_lo
                .iter()
                .zip(v_hi.iter())
                .map(|(a, b)| (b - a) / (x_hi - x_lo))
                .collect());
        }
        // second-order one-sided stencil at the boundary
        let (p0, p1, p2) = if k == 0 {
            (0, 1, 2)
        } else {
            (n - 1, n - 2, n - 3)
        };
        let (x0, v0) = at(p0);
        let (x1, v1) = at(p1);
        let (x2, v2) = at(p2);
        let c0 = (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let c1 = (x0 - x2) / ((x1 - x0) * (x1 - x2));
        let c2 = (x0 - x1) / ((x2 - x0) * (x2 - x1));
        Ok((0..v0.len())
            .map(|i| c0 * v0[i] + c1 * v1[i] + c2 * v2[i])
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------------

struct Flags {
    values: HashMap<String, String>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> Result<Flags> {
        let mut values = HashMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| Error::parse(format!("expected a --flag, got '{arg}'")))?;
            if !allowed.contains(&key) {
                return Err(Error::parse(format!(
                    "unknown flag --{key}; allowed: {}",
                    allowed
                        .iter()
                        .map(|a| format!("--{a}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                )));
            }
            let value = it
                .next()
                .ok_or_else(|| Error::parse(format!("flag --{key} needs a value")))?;
            values.insert(key.to_string(), value.clone());
        }
        Ok(Flags { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::parse(format!("missing required flag --{key}")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::parse(format!("bad value for --{key}: '{v}'"))),
        }
    }
}

fn parse_params(raw: Option<&str>) -> Result<HashMap<String, f64>> {
    let mut params = HashMap::new();
    if let Some(raw) = raw {
        for pair in raw.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("bad parameter '{pair}'")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::parse(format!("bad parameter value '{pair}'")))?;
            params.insert(k.to_string(), v);
        }
    }
    Ok(params)
}

fn parse_contract(flags: &Flags) -> Result<DerivativeContract> {
    match flags.get("mode").unwrap_or("ad") {
        "ad" => Ok(DerivativeContract::automatic()),
        "fd" => {
            // Richardson-extrapolated stencil at a step suited to order-one
            // chart scales; override with --fd-step.
            let step = flags.f64_or("fd-step", 5e-4)?;
            Ok(DerivativeContract::central(step, true))
        }
        other => Err(Error::parse(format!(
            "bad --mode '{other}', expected ad|fd"
        ))),
    }
}

fn read_jsonl(path: &str) -> Result<Vec<serde_json::Value>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::parse(format!("{path}:{}: {e}", lineno + 1)))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::parse(format!("{path}: no records")));
    }
    Ok(out)
}

fn write_output(path: Option<&str>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_verify(args: &[String]) -> Result<Report> {
    let flags = Flags::parse(
        args,
        &[
            "metric", "input", "params", "grid", "mode", "tol", "fd-step", "out",
        ],
    )?;
    let tol = flags.f64_or("tol", 1e-8)?;
    let report = match (flags.get("metric"), flags.get("input")) {
        (Some(name), None) => {
            let fixture = get_fixture(name, &parse_params(flags.get("params"))?)?;
            let grid = GridSpec::parse(flags.get("grid").unwrap_or(""))?;
            let points = grid.expand(&fixture)?;
            let contract = parse_contract(&flags)?;
            let results: Vec<Result<PointReport>> = parallel_map(&points, |x| {
                let jet = fixture.jet_at(x, &contract)?;
                let rep = vacuum_einstein_residual(&jet, tol)?;
                Ok(PointReport {
                    coords: x.clone(),
                    residuals: vec![rep],
                })
            });
            let points = results.into_iter().collect::<Result<Vec<_>>>()?;
            Report::assemble("verify", points, tol)
        }
        (None, Some(path)) => verify_input_file(path, tol)?,
        _ => {
            return Err(Error::parse(
                "verify needs exactly one of --metric NAME or --input FILE",
            ))
        }
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(out) = flags.get("out") {
        write_output(Some(out), &json)?;
        println!("{json}");
    } else {
        println!("{json}");
    }
    Ok(report)
}

fn verify_input_file(path: &str, tol: f64) -> Result<Report> {
    let raw = read_jsonl(path)?;
    let is_frame = raw[0].get("e").is_some();
    if is_frame {
        let records: Vec<FrameRecord> = raw
            .into_iter()
            .map(|v| serde_json::from_value(v).map_err(|e| Error::parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        verify_frame_records(&records, tol)
    } else {
        let records: Vec<MetricRecord> = raw
            .into_iter()
            .map(|v| serde_json::from_value(v).map_err(|e| Error::parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        verify_metric_records(&records, tol)
    }
}

fn infer_eta(m: usize, g: &[f64]) -> Result<crate::etalinalg::SignatureMatrix> {
    let mat = nalgebra::DMatrix::from_row_slice(m, m, g);
    let eig = mat.symmetric_eigenvalues();
    let neg = eig.iter().filter(|&&v| v < 0.0).count();
    if eig.iter().any(|&v| v == 0.0) {
        return Err(Error::SingularMetric);
    }
    let mut diag = vec![1.0; m];
    for d in diag.iter_mut().take(neg) {
        *d = -1.0;
    }
    crate::etalinalg::SignatureMatrix::from_diag(diag)
}

fn frame_jets(records: &[FrameRecord]) -> Result<Vec<VielbeinJet1>> {
    let m = records[0].x.len();
    let need_fd = records.iter().any(|r| r.de.is_none());
    let grid = if need_fd {
        let pts: Vec<Vec<f64>> = records.iter().map(|r| r.x.clone()).collect();
        Some(RecordGrid::build(&pts)?)
    } else {
        None
    };
    let e_of = |rec: usize| flatten2(&records[rec].e);
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let e = flatten2(&r.e);
            if e.len() != m * m {
                return Err(Error::parse(format!("record {i}: frame has wrong shape")));
            }
            let de = match &r.de {
                Some(de) => {
                    // stored de[k][mu][sigma]
                    let flat = flatten3(de);
                    if flat.len() != m * m * m {
                        return Err(Error::parse(format!(
                            "record {i}: frame derivatives have wrong shape"
                        )));
                    }
                    flat
                }
                None => {
                    let grid = grid.as_ref().expect("grid built when de absent");
                    let mut de = vec![0.0; m * m * m];
                    for sigma in 0..m {
                        let d = grid.fd_axis(i, sigma, &e_of)?;
                        for k in 0..m {
                            for mu in 0..m {
                                de[(k * m + mu) * m + sigma] = d[k * m + mu];
                            }
                        }
                    }
                    de
                }
            };
            VielbeinJet1::new(e, de, ChartPoint::new(r.x.clone())?)
        })
        .collect()
}

fn verify_frame_records(records: &[FrameRecord], tol: f64) -> Result<Report> {
    let m = records[0].x.len();
    let jets = frame_jets(records)?;
    let eta = {
        let g0 = metric_from_vielbein_infer(&jets[0])?;
        infer_eta(m, &g0)?
    };
    // Christoffels per record, then grid finite differences for the curvature
    // family.
    let gammas: Vec<Vec<f64>> = jets
        .iter()
        .map(|v| crate::connections::christoffel_from_jet(v).map(|c| c.gamma().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<Vec<f64>> = records.iter().map(|r| r.x.clone()).collect();
    let grid = RecordGrid::build(&pts)?;
    let gamma_of = |rec: usize| gammas[rec].clone();

    let mut points = Vec::with_capacity(records.len());
    for (i, v) in jets.iter().enumerate() {
        let mut dgamma = vec![0.0; m * m * m * m];
        for beta in 0..m {
            let d = grid.fd_axis(i, beta, &gamma_of)?;
            for j in 0..m * m * m {
                dgamma[j * m + beta] = d[j];
            }
        }
        let residuals = palatini_residual(v, &eta, Some(&dgamma), None, tol)?;
        points.push(PointReport {
            coords: records[i].x.clone(),
            residuals,
        });
    }
    Ok(Report::assemble("verify", points, tol))
}

fn metric_from_vielbein_infer(v: &VielbeinJet1) -> Result<Vec<f64>> {
    // e^T eta e needs eta; estimate the signature from the lorentzian guess
    // first, falling back to euclidean when that fails to be consistent.
    let m = v.dim();
    for eta in [
        crate::etalinalg::SignatureMatrix::lorentzian(m),
        crate::etalinalg::SignatureMatrix::euclidean(m),
    ] {
        let g = metric_from_vielbein(v, &eta);
        if infer_eta(m, g.g()).map(|e| e == eta).unwrap_or(false) {
            return Ok(g.g().to_vec());
        }
    }
    Err(Error::domain(
        "could not infer a diagonal +-1 signature from the frame records",
    ))
}

fn verify_metric_records(records: &[MetricRecord], tol: f64) -> Result<Report> {
    let jets = metric_record_jets(records)?;
    let mut points = Vec::with_capacity(records.len());
    for (r, jet) in records.iter().zip(jets.iter()) {
        let rep = vacuum_einstein_residual(jet, tol)?;
        points.push(PointReport {
            coords: r.x.clone(),
            residuals: vec![rep],
        });
    }
    Ok(Report::assemble("verify", points, tol))
}

fn metric_record_jets(records: &[MetricRecord]) -> Result<Vec<MetricJet2>> {
    let m = records[0].x.len();
    let need_fd = records.iter().any(|r| r.dg.is_none() || r.ddg.is_none());
    let grid = if need_fd {
        let pts: Vec<Vec<f64>> = records.iter().map(|r| r.x.clone()).collect();
        Some(RecordGrid::build(&pts)?)
    } else {
        None
    };
    let g_of = |rec: usize| flatten2(&records[rec].g);

    // first derivatives per record (from the file or the grid)
    let dgs: Vec<Vec<f64>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| match &r.dg {
            Some(dg) => Ok(flatten3(dg)),
            None => {
                let grid = grid.as_ref().expect("grid");
                let mut dg = vec![0.0; m * m * m];
                for sigma in 0..m {
                    let d = grid.fd_axis(i, sigma, &g_of)?;
                    for j in 0..m * m {
                        dg[j * m + sigma] = d[j];
                    }
                }
                Ok(dg)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let dg_of = |rec: usize| dgs[rec].clone();

    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let g = flatten2(&r.g);
            if g.len() != m * m {
                return Err(Error::parse(format!("record {i}: metric has wrong shape")));
            }
            let ddg = match &r.ddg {
                Some(dd) => flatten4(dd),
                None => {
                    let grid = grid.as_ref().expect("grid");
                    let mut ddg = vec![0.0; m * m * m * m];
                    for beta in 0..m {
                        let d = grid.fd_axis(i, beta, &dg_of)?;
                        for j in 0..m * m * m {
                            ddg[j * m + beta] = d[j];
                        }
                    }
                    ddg
                }
            };
            MetricJet2::new(g, dgs[i].clone(), Some(ddg), ChartPoint::new(r.x.clone())?)
        })
        .collect()
}

fn cmd_reduce(args: &[String]) -> Result<Report> {
    let flags = Flags::parse(args, &["frame-input", "out"])?;
    let path = flags.require("frame-input")?;
    let out = flags.require("out")?;
    let raw = read_jsonl(path)?;
    let records: Vec<FrameRecord> = raw
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| Error::parse(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let m = records[0].x.len();
    let jets = frame_jets(&records)?;
    let eta = {
        let g0 = metric_from_vielbein_infer(&jets[0])?;
        infer_eta(m, &g0)?
    };
    let mut lines = String::new();
    for v in &jets {
        let g = reduce_f_omega(v, &eta);
        let rec = MetricRecord {
            x: v.at().coords().to_vec(),
            g: nest2(m, g.g()),
            dg: Some(nest3(m, g.dg())),
            ddg: None,
        };
        lines.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        lines.push('\n');
    }
    std::fs::write(out, lines)?;
    let report = Report::assemble(
        "reduce",
        jets.iter()
            .map(|v| PointReport {
                coords: v.at().coords().to_vec(),
                residuals: Vec::new(),
            })
            .collect(),
        0.0,
    );
    println!("{}", serde_json::to_string_pretty(&report).expect("report"));
    Ok(report)
}

fn cmd_reconstruct(args: &[String]) -> Result<Report> {
    let flags = Flags::parse(
        args,
        &[
            "metric", "params", "grid", "mode", "tol", "fd-step", "out", "margin",
        ],
    )?;
    let name = flags.require("metric")?;
    let out = flags.require("out")?;
    let tol = flags.f64_or("tol", 1e-9)?;
    let fixture = get_fixture(name, &parse_params(flags.get("params"))?)?;
    let grid = GridSpec::parse(flags.get("grid").unwrap_or(""))?;
    let mut points = grid.expand(&fixture)?;
    let contract = parse_contract(&flags)?;
    // optional domain clipping: drop grid points too close to the boundary
    // of the polar-decomposable neighborhood
    if let Some(margin) = flags.get("margin") {
        let margin: f64 = margin
            .parse()
            .map_err(|_| Error::parse(format!("bad value for --margin: '{margin}'")))?;
        let kept: Vec<Vec<f64>> = points
            .into_iter()
            .filter(|x| match fixture.jet_at(x, &contract) {
                Ok(jet) => crate::etalinalg::polar_margin(jet.g(), &fixture.eta) > margin,
                Err(_) => false,
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::domain(
                "all grid points were clipped by the polar margin",
            ));
        }
        points = kept;
    }
    let sections = reconstruct(&fixture, &points, &contract)?;

    let m = fixture.dim;
    let mut lines = String::new();
    let mut reports = Vec::with_capacity(sections.len());
    for s in &sections {
        let rec = FrameRecord {
            x: s.metric.at().coords().to_vec(),
            e: nest2(m, s.vielbein.e()),
            de: Some(nest3(m, s.vielbein.de())),
            gamma: Some(nest3(m, s.connection.gamma())),
        };
        lines.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        lines.push('\n');
        let reduced = reduce_f_omega(&s.vielbein, &fixture.eta);
        let mut diff: Vec<f64> = reduced
            .g()
            .iter()
            .zip(s.metric.g().iter())
            .map(|(a, b)| a - b)
            .collect();
        diff.extend(
            reduced
                .dg()
                .iter()
                .zip(s.metric.dg().iter())
                .map(|(a, b)| a - b),
        );
        reports.push(PointReport {
            coords: s.metric.at().coords().to_vec(),
            residuals: vec![ResidualReport::new(
                "round_trip",
                diff,
                vec![m * m + m * m * m],
                tol,
            )],
        });
    }
    std::fs::write(out, lines)?;
    let report = Report::assemble("reconstruct", reports, tol);
    println!("{}", serde_json::to_string_pretty(&report).expect("report"));
    Ok(report)
}

fn cmd_lagrangian(args: &[String]) -> Result<Report> {
    let flags = Flags::parse(args, &["metric", "params", "point", "tol"])?;
    let name = flags.require("metric")?;
    let fixture = get_fixture(name, &parse_params(flags.get("params"))?)?;
    let tol = flags.f64_or("tol", 1e-12)?;
    let point: Vec<f64> = match flags.get("point") {
        None => fixture.default_point.clone(),
        Some(raw) => raw
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(format!("bad coordinate '{v}'")))
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    let jet = fixture.jet_at(&point, &DerivativeContract::automatic())?;
    let section = palatini_section_from_jet(&jet, &fixture.eta)?;
    let pal = palatini_density(&jet, &section.connection)?;
    let eh = eh_first_order_density(&jet)?;
    let difference = (pal.density - eh.density).abs();
    let mut report = Report::assemble(
        "lagrangian",
        vec![PointReport {
            coords: point,
            residuals: vec![ResidualReport::new(
                "routhian_identity",
                vec![difference],
                vec![1],
                tol,
            )],
        }],
        tol,
    );
    report.densities = Some(Densities {
        palatini: pal.density,
        eh_first_order: eh.density,
        difference,
        normalization: pal.normalization,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report"));
    Ok(report)
}

const USAGE: &str = "palatini-routh <command> [flags]

commands:
  verify      --metric NAME | --input FILE  [--params k=v,..] [--grid SPEC]
              [--mode ad|fd] [--fd-step H] [--tol T] [--out FILE]
  reduce      --frame-input FILE --out FILE
  reconstruct --metric NAME --out FILE [--params k=v,..] [--grid SPEC]
              [--mode ad|fd] [--tol T] [--margin M]
  lagrangian  --metric NAME [--params k=v,..] [--point x0,x1,..] [--tol T]

grid SPEC:   comma-joined axes, each 'name=lo..hi:count' or 'name=value';
             unnamed coordinates sit at the fixture default.
fixtures:    minkowski, schwarzschild (M), desitter_static (H), sphere2,
             flat_polar, perturbed_schwarzschild (M, eps)
environment: PALATINI_ROUTH_THREADS caps the worker pool.

exit codes:  0 all residuals pass, 1 residual failure, 2 usage/domain error";

/// Entry point used by the binary: returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    let rest = &args[1..];
    let outcome = match command.as_str() {
        "verify" => cmd_verify(rest),
        "reduce" => cmd_reduce(rest),
        "reconstruct" => cmd_reconstruct(rest),
        "lagrangian" => cmd_lagrangian(rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            return 0;
        }
        other => {
            eprintln!("unknown command '{other}'\n{USAGE}");
            return 2;
        }
    };
    match outcome {
        Ok(report) => {
            if report.summary.all_pass {
                0
            } else {
                1
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}
