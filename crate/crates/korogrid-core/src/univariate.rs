//! One-dimensional approximation builders.
//!
//! Everything here produces either a continuous piecewise-affine function
//! ([`PiecewiseAffine`]) or a sum of shifted step activations
//! ([`StepFragment`]). Both compile directly into single layers of a
//! network: a piecewise-affine function with `p` pieces becomes `p`
//! rectifier neurons via [`pwl_to_relu`], and a step sum is already a
//! layer of threshold neurons.
//!
//! Builders and their piece budgets for a tolerance `eps`:
//!
//! * [`approx_increasing`]: any nondecreasing `f` with values in `[c, d]`,
//!   at most `ceil((d - c) / eps)` pieces regardless of smoothness, by
//!   slicing the *range* into steps of `eps` and locating the slice
//!   boundaries with bisection.
//! * [`approx_c2_uniform`]: any `f` with bounded second derivative, using
//!   `ceil((b - a) sqrt(sup|f''| / (2 eps)))` equal pieces, since a chord
//!   over a cell of width `h` deviates by at most `h^2 sup|f''| / 8`.
//! * [`approx_c2_riemann`]: the same guarantee with cells sized against a
//!   Riemann sum of `sqrt(|f''|)`, so regions of low curvature get long
//!   pieces; the piece count is at most
//!   `(1 + mu) * integral(sqrt|f''|) / sqrt(2 eps)` plus one piece per
//!   partition cell.
//! * [`approx_log_truncated`]: `max(ln x, ln delta)` on `(0, 1]` with
//!   geometrically spaced breakpoints, `O(log(1/delta) / sqrt(eps))`
//!   pieces.
//! * [`approx_increasing_heaviside`]: a nondecreasing `f` as a staircase
//!   of at most `2 (d - c) / eps` threshold neurons, with total error at
//!   most `2 eps` outside tiny exclusion zones around the jumps; any
//!   bounded sigmoid-shaped activation may play the role of the step.

use crate::error::{Error, Result};
use crate::network::{scale_sigmoid_like, ActivationKind};

/// A continuous piecewise-affine function on the whole real line.
#[derive(Clone, Debug, PartialEq)]
pub enum PiecewiseAffine {
    /// A single affine piece.
    Affine { slope: f64, intercept: f64 },
    /// Breakpoints with values, extended by rays on both sides. Between
    /// consecutive breakpoints the function interpolates linearly.
    Pieces {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    },
}

impl PiecewiseAffine {
    /// The affine function `slope * x + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self::Affine { slope, intercept }
    }

    /// Build from breakpoint/value pairs and the two outer ray slopes.
    /// Breakpoints must be finite and strictly increasing.
    pub fn from_nodes(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::BadPieces("no breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::BadPieces(format!(
                "{} breakpoints vs {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|v| !v.is_finite())
            || values.iter().any(|v| !v.is_finite())
            || !left_slope.is_finite()
            || !right_slope.is_finite()
        {
            return Err(Error::BadPieces("non-finite node data".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadPieces(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self::Pieces {
            breakpoints,
            values,
            left_slope,
            right_slope,
        })
    }

    /// Evaluate at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Affine { slope, intercept } => slope * x + intercept,
            Self::Pieces {
                breakpoints,
                values,
                left_slope,
                right_slope,
            } => {
                let n = breakpoints.len();
                if x < breakpoints[0] {
                    return values[0] + left_slope * (x - breakpoints[0]);
                }
                if x >= breakpoints[n - 1] {
                    return values[n - 1] + right_slope * (x - breakpoints[n - 1]);
                }
                let hi = breakpoints.partition_point(|&b| b <= x);
                let lo = hi - 1;
                let t = (x - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
                values[lo] + t * (values[hi] - values[lo])
            }
        }
    }

    /// Number of affine pieces (one more than the number of breakpoints).
    pub fn piece_count(&self) -> usize {
        match self {
            Self::Affine { .. } => 1,
            Self::Pieces { breakpoints, .. } => breakpoints.len() + 1,
        }
    }

    /// Breakpoint locations; empty for a single affine piece.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            Self::Affine { .. } => &[],
            Self::Pieces { breakpoints, .. } => breakpoints,
        }
    }

    /// Values at the breakpoints; empty for a single affine piece.
    pub fn values(&self) -> &[f64] {
        match self {
            Self::Affine { .. } => &[],
            Self::Pieces { values, .. } => values,
        }
    }

    /// Slopes of all pieces from left to right; length [`piece_count`].
    ///
    /// [`piece_count`]: Self::piece_count
    pub fn slopes(&self) -> Vec<f64> {
        match self {
            Self::Affine { slope, .. } => vec![*slope],
            Self::Pieces {
                breakpoints,
                values,
                left_slope,
                right_slope,
            } => {
                let mut s = Vec::with_capacity(breakpoints.len() + 1);
                s.push(*left_slope);
                for k in 1..breakpoints.len() {
                    s.push((values[k] - values[k - 1]) / (breakpoints[k] - breakpoints[k - 1]));
                }
                s.push(*right_slope);
                s
            }
        }
    }
}

/// One rectifier neuron: `output_weight * max(input_weight * x + bias, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluNeuron {
    pub input_weight: f64,
    pub bias: f64,
    pub output_weight: f64,
}

/// A constant plus a sum of rectifier neurons over a single scalar input;
/// one layer of a network restricted to one input coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluFragment {
    pub constant: f64,
    pub neurons: Vec<ReluNeuron>,
}

impl ReluFragment {
    /// Evaluate at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.constant;
        for n in &self.neurons {
            acc += n.output_weight * (n.input_weight * x + n.bias).max(0.0);
        }
        acc
    }

    /// Number of neurons in the fragment.
    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }
}

/// Compile a piecewise-affine function into rectifier neurons, exactly.
///
/// A function with `p >= 2` pieces becomes `p` neurons: one guard neuron
/// `(b_1 - x)_+` carrying the leftmost slope and one neuron `(x - b_k)_+`
/// per breakpoint carrying the slope increment across it. A single affine
/// piece becomes two neurons splitting `x` into its positive and negative
/// parts (none if the slope is zero).
pub fn pwl_to_relu(p: &PiecewiseAffine) -> ReluFragment {
    match p {
        PiecewiseAffine::Affine { slope, intercept } => {
            let neurons = if *slope == 0.0 {
                Vec::new()
            } else {
                vec![
                    ReluNeuron {
                        input_weight: 1.0,
                        bias: 0.0,
                        output_weight: *slope,
                    },
                    ReluNeuron {
                        input_weight: -1.0,
                        bias: 0.0,
                        output_weight: -*slope,
                    },
                ]
            };
            ReluFragment {
                constant: *intercept,
                neurons,
            }
        }
        PiecewiseAffine::Pieces {
            breakpoints,
            values,
            left_slope,
            ..
        } => {
            let slopes = p.slopes();
            let mut neurons = Vec::with_capacity(breakpoints.len() + 1);
            neurons.push(ReluNeuron {
                input_weight: -1.0,
                bias: breakpoints[0],
                output_weight: -left_slope,
            });
            let mut prev = 0.0;
            for (k, &b) in breakpoints.iter().enumerate() {
                let s = slopes[k + 1];
                neurons.push(ReluNeuron {
                    input_weight: 1.0,
                    bias: -b,
                    output_weight: s - prev,
                });
                prev = s;
            }
            ReluFragment {
                constant: values[0],
                neurons,
            }
        }
    }
}

/// Verify on a 1000-point grid that `f` never decreases by more than
/// rounding noise.
fn monotone_guard<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<()> {
    let samples = 1000;
    let mut prev = f(a);
    for i in 1..samples {
        let x = a + (b - a) * i as f64 / (samples - 1) as f64;
        let y = f(x);
        let slack = 1e-12 * (1.0 + prev.abs());
        if y < prev - slack {
            return Err(Error::NotMonotone {
                at: x,
                drop: prev - y,
            });
        }
        prev = y;
    }
    Ok(())
}

fn check_interval(name: &'static str, lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::BadParameter {
            name,
            value: hi - lo,
            range: "a finite interval with positive length",
        });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            range: "(0, inf)",
        });
    }
    Ok(())
}

/// Largest value `x` in `[a, b]` with `f(x) <= y`, assuming `f`
/// nondecreasing, found by bisection down to an interval of width 1e-14.
fn level_crossing<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, y: f64) -> f64 {
    if f(a) > y {
        return a;
    }
    if f(b) <= y {
        return b;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) <= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Locations where a nondecreasing `f` crosses the levels
/// `c + eps, c + 2 eps, ...` up to `d`, deduplicated at jumps. Returns
/// `(positions, levels)` with strictly increasing positions.
fn level_nodes<F: Fn(f64) -> f64>(
    f: &F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    eps: f64,
) -> (Vec<f64>, Vec<f64>) {
    let m = ((d - c) / eps).floor() as usize;
    let mut xs: Vec<f64> = Vec::with_capacity(m);
    let mut ys: Vec<f64> = Vec::with_capacity(m);
    for k in 1..=m {
        let y = c + k as f64 * eps;
        let x = level_crossing(f, a, b, y);
        if let Some(&last) = xs.last() {
            if x - last < 1e-13 {
                // A jump crosses several levels at once; keep the topmost.
                *ys.last_mut().expect("nonempty") = y;
                continue;
            }
        }
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

/// Approximate a nondecreasing function `f` on `[a, b]` with values in
/// `[c, d]` to uniform error `eps`, using at most `ceil((d - c) / eps)`
/// pieces. No smoothness is required; monotonicity is checked on a
/// 1000-point grid.
pub fn approx_increasing<F: Fn(f64) -> f64>(
    f: F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    eps: f64,
) -> Result<PiecewiseAffine> {
    check_interval("interval", a, b)?;
    check_eps(eps)?;
    if !(c <= d) || !c.is_finite() || !d.is_finite() {
        return Err(Error::BadParameter {
            name: "range",
            value: d - c,
            range: "a finite range with c <= d",
        });
    }
    monotone_guard(&f, a, b)?;
    if d - c <= eps {
        return Ok(PiecewiseAffine::affine(0.0, 0.5 * (c + d)));
    }
    let (mut xs, mut ys) = level_nodes(&f, (a, b), (c, d), eps);
    // A trailing node at the right endpoint carries no plateau; replace it
    // with a ray so the final piece interpolates instead.
    let mut right_slope = 0.0;
    if let Some(&last) = xs.last() {
        if last >= b - 1e-12 * (1.0 + b.abs()) {
            let (x_top, y_top) = (xs.pop().expect("nonempty"), ys.pop().expect("nonempty"));
            match (xs.last(), ys.last()) {
                (Some(&x_prev), Some(&y_prev)) => {
                    right_slope = (y_top - y_prev) / (x_top - x_prev);
                }
                _ => return Ok(PiecewiseAffine::affine(0.0, y_top)),
            }
        }
    }
    if xs.is_empty() {
        return Ok(PiecewiseAffine::affine(0.0, 0.5 * (c + d)));
    }
    PiecewiseAffine::from_nodes(xs, ys, 0.0, right_slope)
}

fn sampled_curvature_sup<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> f64 {
    let samples = 10_000;
    let mut sup = 0.0f64;
    for i in 0..=samples {
        let x = a + (b - a) * i as f64 / samples as f64;
        sup = sup.max(g(x).abs());
    }
    sup * 1.1
}

const PIECE_CAP: usize = 1 << 26;

fn interpolating_pwl<F: Fn(f64) -> f64>(f: &F, nodes: &[f64]) -> Result<PiecewiseAffine> {
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let n = nodes.len();
    if n == 2 {
        let slope = (values[1] - values[0]) / (nodes[1] - nodes[0]);
        return Ok(PiecewiseAffine::affine(slope, values[0] - slope * nodes[0]));
    }
    let left = (values[1] - values[0]) / (nodes[1] - nodes[0]);
    let right = (values[n - 1] - values[n - 2]) / (nodes[n - 1] - nodes[n - 2]);
    PiecewiseAffine::from_nodes(
        nodes[1..n - 1].to_vec(),
        values[1..n - 1].to_vec(),
        left,
        right,
    )
}

/// Interpolate a twice-differentiable `f` on `[a, b]` to uniform error
/// `eps` with `ceil((b - a) sqrt(sup|f''| / (2 eps)))` equal pieces. The
/// curvature bound is `curvature_sup` if given, otherwise the sampled
/// maximum of `|second_derivative|` over 10000 points with a 10% margin.
pub fn approx_c2_uniform<F, G>(
    f: F,
    second_derivative: G,
    (a, b): (f64, f64),
    eps: f64,
    curvature_sup: Option<f64>,
) -> Result<PiecewiseAffine>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_interval("interval", a, b)?;
    check_eps(eps)?;
    let m = match curvature_sup {
        Some(m) => {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::BadParameter {
                    name: "curvature_sup",
                    value: m,
                    range: "[0, inf)",
                });
            }
            m
        }
        None => sampled_curvature_sup(&second_derivative, a, b),
    };
    let pieces_f = ((b - a) * (m / (2.0 * eps)).sqrt()).ceil().max(1.0);
    if pieces_f > PIECE_CAP as f64 {
        return Err(Error::BadParameter {
            name: "pieces",
            value: pieces_f,
            range: "at most 2^26; raise eps or shrink the interval",
        });
    }
    let pieces = pieces_f as usize;
    let nodes: Vec<f64> = (0..=pieces)
        .map(|k| a + (b - a) * k as f64 / pieces as f64)
        .collect();
    interpolating_pwl(&f, &nodes)
}

/// Result of [`approx_c2_riemann`]: the interpolant plus the partition size
/// and the piece budget it was built against.
#[derive(Clone, Debug)]
pub struct RiemannPwl {
    pub pwl: PiecewiseAffine,
    /// Number of cells in the curvature-adapted partition.
    pub cells: usize,
    /// Midpoint-rule estimate of `integral sqrt(|f''|)` over the interval.
    pub integral_estimate: f64,
    /// Guaranteed ceiling on the piece count:
    /// `integral_estimate * (1 + mu) / sqrt(2 eps) + cells`.
    pub piece_bound: f64,
}

/// Interpolate a twice-differentiable `f` on `[a, b]` to uniform error
/// `eps`, spending pieces in proportion to local `sqrt(|f''|)`. The piece
/// count is at most `(1 + mu) integral(sqrt|f''|) / sqrt(2 eps)` plus one
/// piece per partition cell, which beats the uniform budget whenever the
/// curvature is unevenly distributed.
pub fn approx_c2_riemann<F, G>(
    f: F,
    second_derivative: G,
    (a, b): (f64, f64),
    eps: f64,
    mu: f64,
) -> Result<RiemannPwl>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_interval("interval", a, b)?;
    check_eps(eps)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::BadParameter {
            name: "mu",
            value: mu,
            range: "(0, inf)",
        });
    }
    let fine = 16_384;
    let h_fine = (b - a) / fine as f64;
    let mut integral = 0.0;
    for i in 0..fine {
        let x = a + (i as f64 + 0.5) * h_fine;
        integral += second_derivative(x).abs().sqrt();
    }
    integral *= h_fine;

    if integral <= 1e-12 * (b - a) {
        let slope = (f(b) - f(a)) / (b - a);
        return Ok(RiemannPwl {
            pwl: PiecewiseAffine::affine(slope, f(a) - slope * a),
            cells: 1,
            integral_estimate: integral,
            piece_bound: integral * (1.0 + mu) / (2.0 * eps).sqrt() + 1.0,
        });
    }

    let cell_sup = |lo: f64, hi: f64| -> f64 {
        let probes = 64;
        let mut sup = 0.0f64;
        for i in 0..=probes {
            let x = lo + (hi - lo) * i as f64 / probes as f64;
            sup = sup.max(second_derivative(x).abs());
        }
        sup * 1.02
    };

    let mut cells = 4usize;
    loop {
        let h = (b - a) / cells as f64;
        let sups: Vec<f64> = (0..cells)
            .map(|k| cell_sup(a + k as f64 * h, a + (k + 1) as f64 * h))
            .collect();
        let upper_sum: f64 = sups.iter().map(|s| h * s.sqrt()).sum();
        if upper_sum <= (1.0 + 0.9 * mu) * integral {
            let mut nodes = vec![a];
            for (k, &sup) in sups.iter().enumerate() {
                let lo = a + k as f64 * h;
                let p = ((h * (sup / (2.0 * eps)).sqrt()).ceil() as usize).max(1);
                for j in 1..=p {
                    nodes.push(lo + h * j as f64 / p as f64);
                }
            }
            let total = nodes.len() - 1;
            if total > PIECE_CAP {
                return Err(Error::BadParameter {
                    name: "pieces",
                    value: total as f64,
                    range: "at most 2^26; raise eps or shrink the interval",
                });
            }
            let pwl = interpolating_pwl(&f, &nodes)?;
            return Ok(RiemannPwl {
                pwl,
                cells,
                integral_estimate: integral,
                piece_bound: integral * (1.0 + mu) / (2.0 * eps).sqrt() + cells as f64,
            });
        }
        cells *= 2;
        if cells > 65_536 {
            return Err(Error::ScalingFailed {
                name: "curvature partition".into(),
                reason: format!(
                    "upper sums did not approach the curvature integral within margin mu = {mu}"
                ),
            });
        }
    }
}

/// Approximate `max(ln x, ln delta)` on `(0, 1]` to uniform error `eps`:
/// constant `ln delta` below `delta`, chords between geometrically spaced
/// breakpoints `delta * r^k` above it, with ratio `r = 1 + sqrt(2 eps)`.
pub fn approx_log_truncated(delta: f64, eps: f64) -> Result<PiecewiseAffine> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadParameter {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        });
    }
    check_eps(eps)?;
    let step = (1.0 + (2.0 * eps).sqrt()).ln();
    let count = ((1.0 / delta).ln() / step).floor() as usize;
    let mut xs = Vec::with_capacity(count + 1);
    let mut ys = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let x = delta * (k as f64 * step).exp();
        if x >= 1.0 - 1e-12 {
            break;
        }
        xs.push(x);
        ys.push(x.ln());
    }
    match (xs.last(), ys.last()) {
        (Some(&x_top), Some(&y_top)) => {
            let right_slope = -y_top / (1.0 - x_top);
            PiecewiseAffine::from_nodes(xs, ys, 0.0, right_slope)
        }
        _ => Ok(PiecewiseAffine::affine(0.0, 0.0)),
    }
}

/// A constant plus a weighted sum of step activations
/// `act(x - threshold)`; one layer of threshold neurons over one scalar
/// input.
#[derive(Clone, Debug)]
pub struct StepFragment {
    constant: f64,
    thresholds: Vec<f64>,
    weights: Vec<f64>,
    prefix: Vec<f64>,
    activation: ActivationKind,
}

impl StepFragment {
    /// Build from ascending thresholds and their weights. The activation
    /// must be the exact step or a bounded sigmoid compressed toward it.
    pub fn new(
        constant: f64,
        thresholds: Vec<f64>,
        weights: Vec<f64>,
        activation: ActivationKind,
    ) -> Result<Self> {
        if thresholds.len() != weights.len() {
            return Err(Error::BadPieces(format!(
                "{} thresholds vs {} weights",
                thresholds.len(),
                weights.len()
            )));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadPieces(
                "thresholds must be strictly increasing".into(),
            ));
        }
        if !matches!(
            activation,
            ActivationKind::Heaviside | ActivationKind::ScaledSigmoidLike { .. }
        ) {
            return Err(Error::BadActivation {
                name: activation.name().to_string(),
                reason: "step fragments need a step or a compressed sigmoid",
            });
        }
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        let mut acc = constant;
        prefix.push(acc);
        for &w in &weights {
            acc += w;
            prefix.push(acc);
        }
        Ok(Self {
            constant,
            thresholds,
            weights,
            prefix,
            activation,
        })
    }

    /// Evaluate at `x`. The exact step takes a prefix-sum fast path.
    pub fn eval(&self, x: f64) -> f64 {
        if matches!(self.activation, ActivationKind::Heaviside) {
            let idx = self.thresholds.partition_point(|&t| t <= x);
            return self.prefix[idx];
        }
        let mut acc = self.constant;
        for (&t, &w) in self.thresholds.iter().zip(&self.weights) {
            acc += w * self.activation.apply(x - t);
        }
        acc
    }

    /// Number of threshold neurons.
    pub fn neuron_count(&self) -> usize {
        self.thresholds.len()
    }

    /// The value taken left of all thresholds.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Ascending jump locations.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Jump sizes, aligned with [`thresholds`].
    ///
    /// [`thresholds`]: Self::thresholds
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The step activation in use.
    pub fn activation(&self) -> &ActivationKind {
        &self.activation
    }
}

/// Approximate a nondecreasing `f` on `[a, b]` with values in `[c, d]` by
/// a staircase of at most `2 (d - c) / eps` step neurons. With the exact
/// step the error is at most `eps`; with a compressed sigmoid it stays
/// below `2 eps` for inputs further than 1e-9 from every threshold.
pub fn approx_increasing_heaviside<F: Fn(f64) -> f64>(
    f: F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    eps: f64,
    activation: ActivationKind,
) -> Result<StepFragment> {
    check_interval("interval", a, b)?;
    check_eps(eps)?;
    if !(c <= d) || !c.is_finite() || !d.is_finite() {
        return Err(Error::BadParameter {
            name: "range",
            value: d - c,
            range: "a finite range with c <= d",
        });
    }
    if activation.sigmoid_limits().is_none() {
        return Err(Error::BadActivation {
            name: activation.name().to_string(),
            reason: "staircase synthesis needs a bounded sigmoid-shaped activation",
        });
    }
    monotone_guard(&f, a, b)?;
    let m = ((d - c) / eps).floor() as usize;
    if m <= 1 {
        return StepFragment::new(
            0.5 * (c + d),
            Vec::new(),
            Vec::new(),
            ActivationKind::Heaviside,
        );
    }
    let (xs, ys) = level_nodes(&f, (a, b), (c, d), eps);
    let constant = ys[0];
    let mut thresholds: Vec<f64> = Vec::with_capacity(xs.len().saturating_sub(1));
    let mut weights: Vec<f64> = Vec::with_capacity(thresholds.capacity());
    for i in 1..xs.len() {
        let t = 0.5 * (xs[i - 1] + xs[i]);
        let jump = ys[i] - ys[i - 1];
        match thresholds.last() {
            Some(&prev) if t - prev < 1e-12 => {
                *weights.last_mut().expect("nonempty") += jump;
            }
            _ => {
                thresholds.push(t);
                weights.push(jump);
            }
        }
    }
    if thresholds.is_empty() {
        return StepFragment::new(constant, thresholds, weights, ActivationKind::Heaviside);
    }
    let activation = match activation {
        ActivationKind::Heaviside => ActivationKind::Heaviside,
        base => {
            let min_gap = thresholds
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
                .min(2.0 * (b - a));
            let exclusion = (0.25 * min_gap).max(1e-9);
            let tol = (1.0 / thresholds.len() as f64).min(0.49);
            scale_sigmoid_like(base, exclusion, tol)?
        }
    };
    StepFragment::new(constant, thresholds, weights, activation)
}
