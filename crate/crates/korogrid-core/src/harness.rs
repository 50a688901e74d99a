//! Benchmark targets, sup-norm measurement, count tables, and scaling
//! experiments.
//!
//! Everything here is deterministic: sup-norm estimates scan a fixed
//! Halton sequence united with dyadic tensor grids and the sparse-grid
//! nodes themselves, so repeated runs measure identical numbers. The
//! experiment table row is the unit of reporting; rows serialize to a
//! fixed-column CSV and to JSON, losslessly in both directions.

use std::f64::consts::PI;
use std::time::Instant;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hierarchy::{binom, count_indices, enumerate_indices, error_bound, error_bound_profile};
use crate::network::ActivationKind;
use crate::synthesis::{
    synth_korobov_deep, synth_korobov_shallow, synth_korobov_shallow_general, ActivationFamily,
    SynthesisReport,
};

/// A benchmark target on the unit cube with a known bound on its mixed
/// second derivatives.
#[derive(Clone, Copy, Debug)]
pub struct KorobovTarget {
    /// Registry name.
    pub name: &'static str,
    /// Dimension the target is instantiated at.
    pub dimension: usize,
    evaluator: fn(&[f64]) -> f64,
    /// Sup-norm bound on all derivatives of order at most 2 per
    /// coordinate.
    pub seminorm: f64,
    /// Whether the target vanishes on the boundary of the cube.
    pub vanishes_on_boundary: bool,
}

impl KorobovTarget {
    /// Evaluate the target at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension, "input dimension mismatch");
        (self.evaluator)(x)
    }
}

fn eval_parabola(x: &[f64]) -> f64 {
    x.iter().map(|&t| 4.0 * t * (1.0 - t)).product()
}

fn eval_sine(x: &[f64]) -> f64 {
    x.iter().map(|&t| (PI * t).sin()).product()
}

fn eval_zero(_: &[f64]) -> f64 {
    0.0
}

/// The built-in targets at dimension `d`: the product parabola
/// (per-factor derivative sups 1, 4, 8, hence seminorm `8^d`), the
/// product sine (per-factor derivative sups bounded by `pi^2`, hence
/// seminorm `pi^(2d)`), and the zero function.
pub fn registry(d: usize) -> Result<Vec<KorobovTarget>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(vec![
        KorobovTarget {
            name: "parabola",
            dimension: d,
            evaluator: eval_parabola,
            seminorm: 8f64.powi(d as i32),
            vanishes_on_boundary: true,
        },
        KorobovTarget {
            name: "sine",
            dimension: d,
            evaluator: eval_sine,
            seminorm: PI.powi(2 * d as i32),
            vanishes_on_boundary: true,
        },
        KorobovTarget {
            name: "zero",
            dimension: d,
            evaluator: eval_zero,
            seminorm: 0.0,
            vanishes_on_boundary: true,
        },
    ])
}

/// Look up a registry target by name (case-insensitive; the first letter
/// works as an abbreviation) at dimension `d`.
pub fn find_target(name: &str, d: usize) -> Result<KorobovTarget> {
    let lowered = name.to_ascii_lowercase();
    for t in registry(d)? {
        if t.name == lowered || (lowered.len() == 1 && t.name.starts_with(&lowered)) {
            return Ok(t);
        }
    }
    Err(Error::UnknownTarget {
        name: name.to_string(),
        known: "parabola, sine, zero".to_string(),
    })
}

const HALTON_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn halton_radical(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Finest dyadic tensor-grid level the sup-norm estimator affords per
/// dimension.
pub fn tensor_level_cap(d: usize) -> u32 {
    match d {
        0 | 1 => 17,
        2 => 8,
        3 => 5,
        4 => 4,
        5 => 3,
        _ => 2,
    }
}

/// A measured sup-norm discrepancy with the point attaining it.
#[derive(Clone, Debug)]
pub struct SupErrorReport {
    /// Largest observed `|a - b|`.
    pub value: f64,
    /// First point attaining the maximum, in scan order.
    pub argmax: Vec<f64>,
    /// Number of points scanned.
    pub points: u64,
}

/// Estimate `sup |a - b|` over the unit cube on the union of `samples`
/// Halton points, the full dyadic tensor grid at level
/// `min(level + 2, tensor_level_cap(d))`, and all sparse-grid nodes of
/// budget `level`. Deterministic; `samples` must be at least 10^4.
pub fn sup_error_leveled<A, B>(
    a: A,
    b: B,
    d: usize,
    samples: usize,
    level: u32,
) -> Result<SupErrorReport>
where
    A: Fn(&[f64]) -> f64,
    B: Fn(&[f64]) -> f64,
{
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if d > HALTON_PRIMES.len() {
        return Err(Error::BadParameter {
            name: "dimension",
            value: d as f64,
            range: "1..=10 for sup-norm sampling",
        });
    }
    if samples < 10_000 {
        return Err(Error::BadParameter {
            name: "samples",
            value: samples as f64,
            range: "at least 10000",
        });
    }
    if level == 0 {
        return Err(Error::ZeroLevel);
    }

    let mut best = f64::NEG_INFINITY;
    let mut argmax = vec![0.0; d];
    let mut points = 0u64;
    let mut consider = |x: &[f64]| {
        let gap = (a(x) - b(x)).abs();
        points += 1;
        if gap > best {
            best = gap;
            argmax.copy_from_slice(x);
        }
    };

    let mut x = vec![0.0; d];
    for k in 1..=samples as u64 {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = halton_radical(k, HALTON_PRIMES[j]);
        }
        consider(&x);
    }

    let t = (level + 2).min(tensor_level_cap(d));
    let m = (1u64 << t) - 1;
    let scale = 1.0 / (1u64 << t) as f64;
    let mut idx = vec![1u64; d];
    'tensor: loop {
        for (xj, &i) in x.iter_mut().zip(&idx) {
            *xj = i as f64 * scale;
        }
        consider(&x);
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] <= m {
                break;
            }
            idx[j] = 1;
            j += 1;
            if j == d {
                break 'tensor;
            }
        }
    }

    for li in enumerate_indices(d, level)? {
        consider(&li.node());
    }

    Ok(SupErrorReport {
        value: best,
        argmax,
        points,
    })
}

/// [`sup_error_leveled`] with the finest tensor grid the dimension
/// affords.
pub fn sup_error<A, B>(a: A, b: B, d: usize, samples: usize) -> Result<SupErrorReport>
where
    A: Fn(&[f64]) -> f64,
    B: Fn(&[f64]) -> f64,
{
    let level = tensor_level_cap(d).saturating_sub(2).max(1);
    sup_error_leveled(a, b, d, samples, level)
}

/// One row of a synthesis experiment table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub d: usize,
    /// Sparse-grid level the synthesis selected.
    pub n: u32,
    pub eps_target: f64,
    pub synthesizer: String,
    pub activation: String,
    pub neurons_by_layer: Vec<u64>,
    pub depth: usize,
    pub trainable: u64,
    pub sup_error_measured: f64,
    pub bound_theoretical: f64,
    /// Synthesis wall time in seconds.
    pub wall_time: f64,
}

/// Column names of the experiment CSV, in emission order.
pub const CSV_HEADER: &str = "d,n,eps_target,synthesizer,activation,neurons_by_layer,depth,\
                              trainable,sup_error_measured,bound_theoretical,wall_time";

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(s: &str, field: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::BadExperiment(format!("bad {field} value {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str, field: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::BadExperiment(format!("bad {field} value {s:?}")))
}

impl ExperimentRow {
    /// One CSV line in [`CSV_HEADER`] order; floats carry 17 significant
    /// digits so parsing them back is exact.
    pub fn to_csv_line(&self) -> String {
        let widths = self
            .neurons_by_layer
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.d,
            self.n,
            fmt_float(self.eps_target),
            self.synthesizer,
            self.activation,
            widths,
            self.depth,
            self.trainable,
            fmt_float(self.sup_error_measured),
            fmt_float(self.bound_theoretical),
            fmt_float(self.wall_time),
        )
    }

    /// Parse one CSV line in [`CSV_HEADER`] order.
    pub fn from_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() != 11 {
            return Err(Error::BadExperiment(format!(
                "expected 11 CSV fields, found {}",
                fields.len()
            )));
        }
        let neurons_by_layer = if fields[5].is_empty() {
            Vec::new()
        } else {
            fields[5]
                .split(';')
                .map(|s| parse_int::<u64>(s, "neurons_by_layer"))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Self {
            d: parse_int(fields[0], "d")?,
            n: parse_int(fields[1], "n")?,
            eps_target: parse_float(fields[2], "eps_target")?,
            synthesizer: fields[3].to_string(),
            activation: fields[4].to_string(),
            neurons_by_layer,
            depth: parse_int(fields[6], "depth")?,
            trainable: parse_int(fields[7], "trainable")?,
            sup_error_measured: parse_float(fields[8], "sup_error_measured")?,
            bound_theoretical: parse_float(fields[9], "bound_theoretical")?,
            wall_time: parse_float(fields[10], "wall_time")?,
        })
    }

    /// JSON object mirroring the CSV columns.
    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "n": self.n,
            "eps_target": self.eps_target,
            "synthesizer": self.synthesizer,
            "activation": self.activation,
            "neurons_by_layer": self.neurons_by_layer,
            "depth": self.depth,
            "trainable": self.trainable,
            "sup_error_measured": self.sup_error_measured,
            "bound_theoretical": self.bound_theoretical,
            "wall_time": self.wall_time,
        })
    }

    /// Parse the JSON form produced by [`ExperimentRow::to_json`].
    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |k: &str| -> Result<&Value> {
            value
                .get(k)
                .ok_or_else(|| Error::BadExperiment(format!("missing row field {k:?}")))
        };
        let as_u64 = |k: &str| -> Result<u64> {
            field(k)?
                .as_u64()
                .ok_or_else(|| Error::BadExperiment(format!("row field {k:?} must be an integer")))
        };
        let as_f64 = |k: &str| -> Result<f64> {
            field(k)?
                .as_f64()
                .ok_or_else(|| Error::BadExperiment(format!("row field {k:?} must be a number")))
        };
        let as_str = |k: &str| -> Result<String> {
            Ok(field(k)?
                .as_str()
                .ok_or_else(|| Error::BadExperiment(format!("row field {k:?} must be a string")))?
                .to_string())
        };
        let neurons_by_layer = field("neurons_by_layer")?
            .as_array()
            .ok_or_else(|| Error::BadExperiment("neurons_by_layer must be an array".into()))?
            .iter()
            .map(|v| {
                v.as_u64().ok_or_else(|| {
                    Error::BadExperiment("neurons_by_layer entries must be integers".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: as_u64("d")? as usize,
            n: as_u64("n")? as u32,
            eps_target: as_f64("eps_target")?,
            synthesizer: as_str("synthesizer")?,
            activation: as_str("activation")?,
            neurons_by_layer,
            depth: as_u64("depth")? as usize,
            trainable: as_u64("trainable")?,
            sup_error_measured: as_f64("sup_error_measured")?,
            bound_theoretical: as_f64("bound_theoretical")?,
            wall_time: as_f64("wall_time")?,
        })
    }
}

/// Header plus one line per row.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Parse a table produced by [`rows_to_csv`]; the header must match.
pub fn rows_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end_matches('\r') == CSV_HEADER => {}
        other => {
            return Err(Error::BadExperiment(format!(
                "bad CSV header: {other:?}"
            )))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(ExperimentRow::from_csv_line)
        .collect()
}

/// Which synthesizer a scaling experiment exercises.
#[derive(Clone, Debug)]
pub enum SynthesizerKind {
    /// Two-layer exact-rectifier synthesis.
    Shallow,
    /// Two-layer synthesis with a general activation family.
    ShallowGeneral(ActivationFamily),
    /// Deep product-tree synthesis with the given gadget activation.
    Deep(ActivationKind),
}

fn run_synthesizer(
    kind: &SynthesizerKind,
    target: &KorobovTarget,
    d: usize,
    eps: f64,
) -> Result<SynthesisReport> {
    match kind {
        SynthesizerKind::Shallow => {
            synth_korobov_shallow(|x: &[f64]| target.eval(x), d, eps, target.seminorm)
        }
        SynthesizerKind::ShallowGeneral(family) => synth_korobov_shallow_general(
            |x: &[f64]| target.eval(x),
            d,
            eps,
            target.seminorm,
            family.clone(),
        ),
        SynthesizerKind::Deep(sigma) => synth_korobov_deep(
            |x: &[f64]| target.eval(x),
            d,
            eps,
            target.seminorm,
            sigma.clone(),
        ),
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(px, py) in points {
        num += (px - mx) * (py - my);
        den += (px - mx) * (px - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// A scaling experiment: one row per accuracy, plus the fitted growth
/// exponent of the trainable-parameter count.
#[derive(Clone, Debug)]
pub struct ScalingExperiment {
    pub rows: Vec<ExperimentRow>,
    /// Least-squares slope of `log(trainable)` against `log(1/eps)`
    /// after dividing out `(log 1/eps)^(3(d-1)/2)`, fitted on the last
    /// half of the series.
    pub slope: f64,
}

/// Synthesize `target` at every accuracy in `eps_list` (strictly
/// decreasing, at least 4 values, all below 1), measure each network
/// against the target on 10^4-sample sup-norm scans, and fit the growth
/// exponent. Wall time per row covers the synthesis only.
pub fn scaling_experiment(
    target: &KorobovTarget,
    d: usize,
    synthesizer: &SynthesizerKind,
    eps_list: &[f64],
) -> Result<ScalingExperiment> {
    if d != target.dimension {
        return Err(Error::BadExperiment(format!(
            "dimension {d} does not match target dimension {}",
            target.dimension
        )));
    }
    if eps_list.len() < 4 {
        return Err(Error::BadExperiment(format!(
            "need at least 4 accuracies, got {}",
            eps_list.len()
        )));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadExperiment(
            "accuracies must be strictly decreasing".into(),
        ));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::BadExperiment(
            "accuracies must lie in (0, 1)".into(),
        ));
    }

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let start = Instant::now();
        let report = run_synthesizer(synthesizer, target, d, eps)?;
        let wall_time = start.elapsed().as_secs_f64();
        let n = report.level.unwrap_or(1);
        let measured = sup_error_leveled(
            |x: &[f64]| report.eval(x),
            |x: &[f64]| target.eval(x),
            d,
            10_000,
            n,
        )?;
        rows.push(ExperimentRow {
            d,
            n,
            eps_target: eps,
            synthesizer: report.synthesizer.to_string(),
            activation: report.activation.clone(),
            neurons_by_layer: report.widths.clone(),
            depth: report.depth(),
            trainable: report.trainable,
            sup_error_measured: measured.value,
            bound_theoretical: error_bound(d, n, target.seminorm)?,
            wall_time,
        });
    }

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let l = (1.0 / r.eps_target).ln();
            let corrected = (r.trainable.max(1) as f64).ln() - 1.5 * (d as f64 - 1.0) * l.ln();
            (l, corrected)
        })
        .collect();
    let slope = least_squares_slope(&pts[pts.len() / 2..]);
    Ok(ScalingExperiment { rows, slope })
}

/// One row of the bound/count table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundTableRow {
    pub d: usize,
    pub n: u32,
    /// Combinatorial error-bound factor.
    pub profile: u64,
    /// Index count by the recursive formula.
    pub count: u64,
    /// Index count by the alternating closed form.
    pub count_closed_form: u64,
}

/// Alternating closed form for the sparse-grid index count:
/// `(-1)^d + 2^n sum_{i=0}^{d-1} C(n+d-1, i) (-2)^(d-1-i)`.
pub fn count_indices_closed_form(d: usize, n: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let overflow = || Error::CountOverflow { dim: d, level: n };
    let mut sum: i128 = 0;
    for i in 0..d as u64 {
        let c = binom(n as u64 + d as u64 - 1, i).ok_or_else(overflow)?;
        let c = i128::try_from(c).map_err(|_| overflow())?;
        let sign_pow = (-2i128).checked_pow(d as u32 - 1 - i as u32).ok_or_else(overflow)?;
        sum = sum.checked_add(c.checked_mul(sign_pow).ok_or_else(overflow)?).ok_or_else(overflow)?;
    }
    let pow2 = 1i128.checked_shl(n).ok_or_else(overflow)?;
    let total = pow2
        .checked_mul(sum)
        .and_then(|v| v.checked_add(if d.is_multiple_of(2) { 1 } else { -1 }))
        .ok_or_else(overflow)?;
    u64::try_from(total).map_err(|_| overflow())
}

/// Tabulate the error-bound factor and both index-count formulas for all
/// `d <= d_max`, `n <= n_max` (desk-scale caps 6 and 12).
pub fn bound_table(d_max: usize, n_max: u32) -> Result<Vec<BoundTableRow>> {
    if d_max == 0 || d_max > 6 {
        return Err(Error::BadParameter {
            name: "d_max",
            value: d_max as f64,
            range: "1..=6",
        });
    }
    if n_max == 0 || n_max > 12 {
        return Err(Error::BadParameter {
            name: "n_max",
            value: n_max as f64,
            range: "1..=12",
        });
    }
    let mut rows = Vec::with_capacity(d_max * n_max as usize);
    for d in 1..=d_max {
        for n in 1..=n_max {
            rows.push(BoundTableRow {
                d,
                n,
                profile: error_bound_profile(d, n)?,
                count: count_indices(d, n)?,
                count_closed_form: count_indices_closed_form(d, n)?,
            });
        }
    }
    Ok(rows)
}

/// Constant-free lower-bound comparator
/// `eps^(-1/2) (ln 1/eps)^((d-1)/2)` printed beside trainable counts.
pub fn lower_bound_params(d: usize, eps: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            range: "(0, 1)",
        });
    }
    Ok(eps.powf(-0.5) * (1.0 / eps).ln().powf((d as f64 - 1.0) / 2.0))
}
