//! Compilation of sparse-grid interpolants into explicit networks.
//!
//! Every synthesizer here writes all weights in closed form; nothing is
//! trained. The common trick is to realize each multivariate basis
//! function `phi(x) = prod_j hat(2^(l_j) x_j - i_j)` through logarithms:
//!
//! ```text
//! phi(x) = exp( sum_j ln hat(2^(l_j) x_j - i_j) ),
//! ```
//!
//! where the logarithms are truncated at a floor `ln(tol/3)` so that all
//! quantities stay bounded. Layer one approximates the truncated
//! log-factors per coordinate, layer two exponentiates the sum, and the
//! interpolation coefficients enter only through the linear output. The
//! same plan with plain logarithms multiplies `d` raw inputs
//! ([`synth_product_shallow`]). The deep variant
//! ([`synth_korobov_deep`]) instead represents every hat factor exactly
//! with four rectifier neurons and multiplies them in a balanced tree of
//! four-neuron product gadgets.
//!
//! Reports carry a structured evaluator that computes exactly the
//! function the materialized network computes; the [`NetSpec`] itself is
//! attached when its weight count is moderate and can always be forced
//! via [`SynthesisReport::to_netspec`].

use crate::error::{Error, Result};
use crate::hierarchy::{hat_eval, hierarchize_hat, select_level_for, ErrorBudget};
use crate::network::{
    push_gadget, require_curvature, scale_relu_like, scale_sigmoid_like, ActivationKind,
    AffineExpr, NetBuilder, NetSpec,
};
use crate::univariate::{
    approx_log_truncated, pwl_to_relu, PiecewiseAffine, ReluFragment, StepFragment,
};

/// Above this many stored weights a synthesized network is reported
/// without a materialized [`NetSpec`] (the structured evaluator still
/// computes it exactly); [`SynthesisReport::to_netspec`] overrides.
pub const MATERIALIZE_NNZ_CAP: u128 = 20_000_000;

/// Activation family driving a synthesis.
#[derive(Clone, Debug)]
pub enum ActivationFamily {
    /// The exact rectifier.
    ExactRelu,
    /// An asymptotically linear activation, compressed toward the
    /// rectifier with an inner scale chosen so the substitution costs at
    /// most 10% of the error budget.
    ReluLike(ActivationKind),
    /// A bounded sigmoid-shaped activation; the synthesis switches to
    /// staircase blocks of threshold neurons.
    SigmoidLike(ActivationKind),
}

impl ActivationFamily {
    fn label(&self) -> String {
        match self {
            Self::ExactRelu => "relu".into(),
            Self::ReluLike(a) => format!("relu_like:{}", a.name()),
            Self::SigmoidLike(a) => format!("sigmoid_like:{}", a.name()),
        }
    }
}

/// Internal tolerance used when the target's seminorm is zero and the
/// error split `eps / (2 seminorm)` degenerates; any positive value works
/// since all output weights vanish.
const ZERO_SEMINORM_TOL: f64 = 0.25;

fn working_tolerance(eps: f64, seminorm: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            range: "(0, inf)",
        });
    }
    if !(seminorm >= 0.0) || !seminorm.is_finite() {
        return Err(Error::BadParameter {
            name: "seminorm",
            value: seminorm,
            range: "[0, inf)",
        });
    }
    if seminorm == 0.0 {
        Ok(ZERO_SEMINORM_TOL)
    } else {
        Ok(ErrorBudget::new(eps, seminorm)?.eps_tilde())
    }
}

/// All one-dimensional (level, position) pairs up to level `n`, ordered by
/// level then position; `pair_id` inverts the ordering.
fn all_pairs(n: u32) -> Vec<(u32, u64)> {
    let mut pairs = Vec::with_capacity((1usize << n) - 1);
    for l in 1..=n {
        let mut i = 1u64;
        while i < (1u64 << l) {
            pairs.push((l, i));
            i += 2;
        }
    }
    pairs
}

fn pair_id(l: u32, i: u64) -> usize {
    (1usize << (l - 1)) - 1 + ((i - 1) / 2) as usize
}

/// Input map sending `x_j` to the local hat coordinate `2^l x_j - i`.
fn pair_maps(pairs: &[(u32, u64)]) -> Vec<(f64, f64)> {
    pairs
        .iter()
        .map(|&(l, i)| ((1u64 << l) as f64, i as f64))
        .collect()
}

/// Piecewise-affine `max(ln hat(y), ln(tol/3))` on the hat coordinate:
/// flat at the floor outside the support, chords between geometrically
/// spaced hat values inside, exact zero at the peak. Chord error at most
/// `tol / (12 d)`; `2m + 4` pieces for `m = floor(ln(3/tol) / step)`.
fn log_hat_pwl(tol: f64, d: usize) -> Result<PiecewiseAffine> {
    let span = (3.0 / tol).ln();
    let step = (1.0 + (2.0 * tol / (3.0 * d as f64)).sqrt()).ln();
    let count = (span / step).floor() as usize;
    let mut ts = Vec::with_capacity(count + 1);
    let mut logs = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let t = (tol / 3.0) * (k as f64 * step).exp();
        if t >= 1.0 - 1e-12 {
            break;
        }
        ts.push(t);
        logs.push(k as f64 * step - span);
    }
    let mut xs = Vec::with_capacity(2 * ts.len() + 1);
    let mut vs = Vec::with_capacity(2 * ts.len() + 1);
    for (&t, &v) in ts.iter().zip(&logs) {
        xs.push(t - 1.0);
        vs.push(v);
    }
    xs.push(0.0);
    vs.push(0.0);
    for (&t, &v) in ts.iter().zip(&logs).rev() {
        xs.push(1.0 - t);
        vs.push(v);
    }
    PiecewiseAffine::from_nodes(xs, vs, 0.0, 0.0)
}

/// Piecewise-affine interpolant of `exp` on `[floor_log, 0]` with chord
/// step `step`, flat at `exp(floor_log)` on the left and exactly 1 at 0.
/// `1 + ceil(-floor_log / step)` pieces.
fn exp_chord_pwl(floor_log: f64, step: f64) -> Result<PiecewiseAffine> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    let mut k = 0u32;
    loop {
        let y = floor_log + k as f64 * step;
        if y >= -1e-12 {
            break;
        }
        xs.push(y);
        vs.push(y.exp());
        k += 1;
    }
    match (xs.last(), vs.last()) {
        (Some(&y_top), Some(&v_top)) => {
            let right = (1.0 - v_top) / (0.0 - y_top);
            PiecewiseAffine::from_nodes(xs, vs, 0.0, right)
        }
        _ => Ok(PiecewiseAffine::affine(0.0, 1.0)),
    }
}

/// Number of neurons in the exponential chord block for working
/// tolerance `tol`: `1 + ceil(sqrt(3 / (2 tol)) * ln(3 / tol))`.
pub fn exp_block_neurons(tol: f64) -> u64 {
    let z = (3.0 / (2.0 * tol)).sqrt() * (3.0 / tol).ln();
    1 + z.ceil() as u64
}

/// Number of neurons in one truncated log-hat block at working tolerance
/// `tol` in dimension `d`: `2m + 4` with
/// `m = floor(ln(3/tol) / ln(1 + sqrt(2 tol / (3 d))))`.
pub fn log_hat_block_neurons(tol: f64, d: usize) -> u64 {
    let span = (3.0 / tol).ln();
    let step = (1.0 + (2.0 * tol / (3.0 * d as f64)).sqrt()).ln();
    let m = (span / step).floor() as u64;
    2 * m + 4
}

/// Hidden-layer widths of the shallow rectifier synthesis at level `n`:
/// `d (2^n - 1)` log-hat blocks, one exponential block per index in the
/// sparse set.
pub fn predicted_shallow_widths(d: usize, n: u32, tol: f64) -> Result<[u64; 2]> {
    let pairs = (1u64 << n) - 1;
    let terms = crate::hierarchy::count_indices(d, n)?;
    Ok([
        d as u64 * pairs * log_hat_block_neurons(tol, d),
        terms * exp_block_neurons(tol),
    ])
}

/// Per-half staircase resolution of the threshold log-hat block:
/// `floor((6 d / tol) ln(3 / tol))` step neurons each for the rising and
/// falling halves.
pub fn staircase_half_neurons(tol: f64, d: usize) -> u64 {
    let span = (3.0 / tol).ln();
    let step_v = tol / (6.0 * d as f64);
    (span / step_v).floor() as u64
}

/// Number of threshold neurons exponentiating one basis function:
/// exactly `ceil(6 / tol)`.
pub fn staircase_exp_neurons(tol: f64) -> u64 {
    (6.0 / tol).ceil() as u64
}

/// Hidden-layer widths of the threshold-activation synthesis at level `n`.
pub fn predicted_staircase_widths(d: usize, n: u32, tol: f64) -> Result<[u64; 2]> {
    let pairs = (1u64 << n) - 1;
    let terms = crate::hierarchy::count_indices(d, n)?;
    Ok([
        d as u64 * pairs * 2 * staircase_half_neurons(tol, d),
        terms * staircase_exp_neurons(tol),
    ])
}

/// Widths of the product network hidden layers for a target accuracy
/// `eps`: `d` truncated-log blocks and one exponential block, both sized
/// for the internal tolerance `eps / 3`.
pub fn predicted_product_widths(d: usize, eps: f64) -> Result<[u64; 2]> {
    check_product_params(d, eps)?;
    let tol = eps / 3.0;
    let eps_inner = tol / d as f64;
    let step = (1.0 + (2.0 * eps_inner).sqrt()).ln();
    let m = ((1.0 / tol).ln() / step).floor() as u64;
    let z = (1.0 / tol).ln() / (2.0 * tol).sqrt();
    Ok([d as u64 * (m + 2), 1 + z.ceil() as u64])
}

/// Per-round neuron counts of one balanced product tree over `d` factors
/// (four per gadget, one per passed-through odd leftover).
pub fn product_tree_round_widths(d: usize) -> Vec<u64> {
    let mut widths = Vec::new();
    let mut nodes = d;
    while nodes > 1 {
        widths.push(4 * (nodes / 2) as u64 + (nodes % 2) as u64);
        nodes = nodes.div_ceil(2);
    }
    widths
}

/// Hidden-layer widths of the deep synthesis at level `n`: one exact
/// four-neuron hat block per coordinate and univariate pair, then the
/// tree rounds replicated per index in the sparse set.
pub fn predicted_deep_widths(d: usize, n: u32) -> Result<Vec<u64>> {
    let pairs = (1u64 << n) - 1;
    let terms = crate::hierarchy::count_indices(d, n)?;
    let mut widths = vec![4 * d as u64 * pairs];
    for w in product_tree_round_widths(d) {
        widths.push(terms * w);
    }
    Ok(widths)
}

fn frag_eval_with<F: Fn(f64) -> f64>(frag: &ReluFragment, act: F, y: f64) -> f64 {
    let mut acc = frag.constant;
    for n in &frag.neurons {
        acc += n.output_weight * act(n.input_weight * y + n.bias);
    }
    acc
}

fn frag_weight_sum(frag: &ReluFragment) -> f64 {
    frag.neurons.iter().map(|n| n.output_weight.abs()).sum()
}

/// Shallow network for the product of all coordinates.
#[derive(Clone, Debug)]
pub struct ShallowProductNet {
    dimension: usize,
    log_pwl: PiecewiseAffine,
    exp_pwl: PiecewiseAffine,
    log_frag: ReluFragment,
    exp_frag: ReluFragment,
    act: Option<ActivationKind>,
}

impl ShallowProductNet {
    /// Evaluate the network.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension, "input dimension mismatch");
        match &self.act {
            None => {
                let s: f64 = x.iter().map(|&v| self.log_pwl.eval(v)).sum();
                self.exp_pwl.eval(s)
            }
            Some(act) => {
                let s: f64 = x
                    .iter()
                    .map(|&v| frag_eval_with(&self.log_frag, |u| act.apply(u), v))
                    .sum();
                frag_eval_with(&self.exp_frag, |u| act.apply(u), s)
            }
        }
    }

    fn activation(&self) -> ActivationKind {
        self.act.clone().unwrap_or(ActivationKind::ReLU)
    }

    fn nnz_estimate(&self) -> u128 {
        let w1 = self.dimension as u128 * self.log_frag.neurons.len() as u128;
        let w2 = self.exp_frag.neurons.len() as u128;
        2 * w1 + w2 * (w1 + 2) + w2 + 1
    }

    fn to_netspec(&self) -> Result<NetSpec> {
        let d = self.dimension;
        let mut builder = NetBuilder::new(d);
        builder.begin_layer(self.activation());
        for j in 0..d {
            for n in &self.log_frag.neurons {
                builder.add_neuron(vec![(j, n.input_weight)], n.bias);
            }
        }
        let block = self.log_frag.neurons.len();
        let base = d as f64 * self.log_frag.constant;
        builder.begin_layer(self.activation());
        for n2 in &self.exp_frag.neurons {
            let mut row = Vec::with_capacity(d * block);
            for j in 0..d {
                for (k, n1) in self.log_frag.neurons.iter().enumerate() {
                    let w = n2.input_weight * n1.output_weight;
                    if w != 0.0 {
                        row.push((j * block + k, w));
                    }
                }
            }
            builder.add_neuron(row, n2.bias + n2.input_weight * base);
        }
        let out: Vec<f64> = self.exp_frag.neurons.iter().map(|n| n.output_weight).collect();
        builder.finish(out, self.exp_frag.constant, 0)
    }
}

/// Shallow network realizing a sparse-grid interpolant through truncated
/// log-hat blocks and per-index exponential blocks.
#[derive(Clone, Debug)]
pub struct ShallowKorobovNet {
    dimension: usize,
    log_pwl: PiecewiseAffine,
    exp_pwl: PiecewiseAffine,
    log_frag: ReluFragment,
    exp_frag: ReluFragment,
    act: Option<ActivationKind>,
    maps: Vec<(f64, f64)>,
    terms: Vec<(Vec<usize>, f64)>,
}

impl ShallowKorobovNet {
    /// Evaluate the network.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        assert_eq!(x.len(), d, "input dimension mismatch");
        let pairs = self.maps.len();
        let mut table = vec![0.0f64; d * pairs];
        for j in 0..d {
            for (p, &(scale, shift)) in self.maps.iter().enumerate() {
                let y = scale * x[j] - shift;
                table[j * pairs + p] = match &self.act {
                    None => self.log_pwl.eval(y),
                    Some(act) => frag_eval_with(&self.log_frag, |u| act.apply(u), y),
                };
            }
        }
        let mut acc = 0.0;
        for (ids, v) in &self.terms {
            if *v == 0.0 {
                continue;
            }
            let s: f64 = ids
                .iter()
                .enumerate()
                .map(|(j, &p)| table[j * pairs + p])
                .sum();
            let e = match &self.act {
                None => self.exp_pwl.eval(s),
                Some(act) => frag_eval_with(&self.exp_frag, |u| act.apply(u), s),
            };
            acc += v * e;
        }
        acc
    }

    fn activation(&self) -> ActivationKind {
        self.act.clone().unwrap_or(ActivationKind::ReLU)
    }

    fn nnz_estimate(&self) -> u128 {
        let d = self.dimension as u128;
        let block1 = self.log_frag.neurons.len() as u128;
        let w1 = d * self.maps.len() as u128 * block1;
        let block2 = self.exp_frag.neurons.len() as u128;
        let rows2 = self.terms.len() as u128 * block2 * (d * block1 + 1);
        2 * w1 + rows2 + self.terms.len() as u128 * block2 + 1
    }

    fn to_netspec(&self) -> Result<NetSpec> {
        let d = self.dimension;
        let pairs = self.maps.len();
        let block1 = self.log_frag.neurons.len();
        let mut builder = NetBuilder::new(d);
        builder.begin_layer(self.activation());
        for j in 0..d {
            for &(scale, shift) in &self.maps {
                for n in &self.log_frag.neurons {
                    builder.add_neuron(
                        vec![(j, n.input_weight * scale)],
                        n.bias - n.input_weight * shift,
                    );
                }
            }
        }
        let base = d as f64 * self.log_frag.constant;
        builder.begin_layer(self.activation());
        let mut out = Vec::with_capacity(self.terms.len() * self.exp_frag.neurons.len());
        let mut out_bias = 0.0;
        for (ids, v) in &self.terms {
            for n2 in &self.exp_frag.neurons {
                let mut row = Vec::with_capacity(d * block1);
                for (j, &p) in ids.iter().enumerate() {
                    let start = (j * pairs + p) * block1;
                    for (k, n1) in self.log_frag.neurons.iter().enumerate() {
                        let w = n2.input_weight * n1.output_weight;
                        if w != 0.0 {
                            row.push((start + k, w));
                        }
                    }
                }
                builder.add_neuron(row, n2.bias + n2.input_weight * base);
                out.push(v * n2.output_weight);
            }
            out_bias += v * self.exp_frag.constant;
        }
        builder.finish(out, out_bias, self.terms.len() as u64)
    }
}

/// Shallow network of threshold neurons realizing a sparse-grid
/// interpolant through staircase blocks.
#[derive(Clone, Debug)]
pub struct StepKorobovNet {
    dimension: usize,
    l1: StepFragment,
    l2: StepFragment,
    maps: Vec<(f64, f64)>,
    terms: Vec<(Vec<usize>, f64)>,
}

impl StepKorobovNet {
    /// Evaluate the network.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        assert_eq!(x.len(), d, "input dimension mismatch");
        let pairs = self.maps.len();
        let mut table = vec![0.0f64; d * pairs];
        for j in 0..d {
            for (p, &(scale, shift)) in self.maps.iter().enumerate() {
                table[j * pairs + p] = self.l1.eval(scale * x[j] - shift);
            }
        }
        let mut acc = 0.0;
        for (ids, v) in &self.terms {
            if *v == 0.0 {
                continue;
            }
            let s: f64 = ids
                .iter()
                .enumerate()
                .map(|(j, &p)| table[j * pairs + p])
                .sum();
            acc += v * self.l2.eval(s);
        }
        acc
    }

    fn nnz_estimate(&self) -> u128 {
        let d = self.dimension as u128;
        let block1 = self.l1.neuron_count() as u128;
        let w1 = d * self.maps.len() as u128 * block1;
        let block2 = self.l2.neuron_count() as u128;
        let rows2 = self.terms.len() as u128 * block2 * (d * block1 + 1);
        2 * w1 + rows2 + self.terms.len() as u128 * block2 + 1
    }

    fn to_netspec(&self) -> Result<NetSpec> {
        let d = self.dimension;
        let pairs = self.maps.len();
        let block1 = self.l1.neuron_count();
        let mut builder = NetBuilder::new(d);
        builder.begin_layer(self.l1.activation().clone());
        for j in 0..d {
            for &(scale, shift) in &self.maps {
                for &t in self.l1.thresholds() {
                    builder.add_neuron(vec![(j, scale)], -shift - t);
                }
            }
        }
        let base = d as f64 * self.l1.constant();
        builder.begin_layer(self.l2.activation().clone());
        let mut out = Vec::with_capacity(self.terms.len() * block1.max(1));
        let mut out_bias = 0.0;
        for (ids, v) in &self.terms {
            for &t2 in self.l2.thresholds() {
                let mut row = Vec::with_capacity(d * block1);
                for (j, &p) in ids.iter().enumerate() {
                    let start = (j * pairs + p) * block1;
                    for (k, &w1) in self.l1.weights().iter().enumerate() {
                        row.push((start + k, w1));
                    }
                }
                builder.add_neuron(row, base - t2);
            }
            for &w2 in self.l2.weights() {
                out.push(v * w2);
            }
            out_bias += v * self.l2.constant();
        }
        builder.finish(out, out_bias, self.terms.len() as u64)
    }
}

/// Deep network: exact hat factors multiplied in balanced gadget trees.
#[derive(Clone, Debug)]
pub struct DeepKorobovNet {
    dimension: usize,
    sigma: ActivationKind,
    curvature: f64,
    lambda: f64,
    maps: Vec<(f64, f64)>,
    terms: Vec<(Vec<usize>, f64)>,
}

impl DeepKorobovNet {
    /// Evaluate the network.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        assert_eq!(x.len(), d, "input dimension mismatch");
        let pairs = self.maps.len();
        let mut table = vec![0.0f64; d * pairs];
        for j in 0..d {
            for (p, &(scale, shift)) in self.maps.iter().enumerate() {
                table[j * pairs + p] = hat_eval(scale * x[j] - shift);
            }
        }
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(d);
        let mut next = Vec::with_capacity(d.div_ceil(2));
        for (ids, v) in &self.terms {
            if *v == 0.0 {
                continue;
            }
            values.clear();
            values.extend(ids.iter().enumerate().map(|(j, &p)| table[j * pairs + p]));
            while values.len() > 1 {
                next.clear();
                for pair in values.chunks(2) {
                    if let [a, b] = pair {
                        next.push(gadget_value(
                            &self.sigma,
                            self.curvature,
                            self.lambda,
                            *a,
                            *b,
                        ));
                    } else {
                        next.push(pair[0]);
                    }
                }
                std::mem::swap(&mut values, &mut next);
            }
            acc += v * values[0];
        }
        acc
    }

    fn to_netspec(&self) -> Result<NetSpec> {
        let d = self.dimension;
        let mut builder = NetBuilder::new(d);
        builder.begin_layer(ActivationKind::ReLU);
        let mut hat_exprs: Vec<AffineExpr> = Vec::with_capacity(d * self.maps.len());
        for j in 0..d {
            for &(scale, shift) in &self.maps {
                let width = 1.0 / scale;
                let center = shift / scale;
                let pwl = PiecewiseAffine::from_nodes(
                    vec![center - width, center, center + width],
                    vec![0.0, 1.0, 0.0],
                    0.0,
                    0.0,
                )?;
                let frag = pwl_to_relu(&pwl);
                let mut terms = Vec::with_capacity(frag.neurons.len());
                for n in &frag.neurons {
                    let idx = builder.add_neuron(vec![(j, n.input_weight)], n.bias);
                    terms.push((idx, n.output_weight));
                }
                hat_exprs.push(AffineExpr { terms, bias: 0.0 });
            }
        }
        let pairs = self.maps.len();
        let mut nodes: Vec<Vec<AffineExpr>> = self
            .terms
            .iter()
            .map(|(ids, _)| {
                ids.iter()
                    .enumerate()
                    .map(|(j, &p)| hat_exprs[j * pairs + p].clone())
                    .collect()
            })
            .collect();
        while nodes.iter().any(|n| n.len() > 1) {
            builder.begin_layer(self.sigma.clone());
            for node_list in nodes.iter_mut() {
                let mut next = Vec::with_capacity(node_list.len().div_ceil(2));
                for pair in node_list.chunks(2) {
                    if let [a, b] = pair {
                        next.push(push_gadget(&mut builder, self.curvature, self.lambda, a, b));
                    } else {
                        let idx =
                            builder.add_linear_neuron(pair[0].terms.clone(), pair[0].bias);
                        next.push(AffineExpr::var(idx));
                    }
                }
                *node_list = next;
            }
        }
        let mut out = vec![0.0f64; builder.current_width()];
        let mut out_bias = 0.0;
        for ((_, v), node_list) in self.terms.iter().zip(&nodes) {
            let root = &node_list[0];
            for &(c, w) in &root.terms {
                out[c] += v * w;
            }
            out_bias += v * root.bias;
        }
        builder.finish(out, out_bias, self.terms.len() as u64)
    }
}

/// Structured evaluator attached to a synthesis report; computes exactly
/// the function the materialized network computes.
#[derive(Clone, Debug)]
pub enum SynthEvaluator {
    Product(ShallowProductNet),
    Shallow(ShallowKorobovNet),
    Staircase(StepKorobovNet),
    Deep(DeepKorobovNet),
}

impl SynthEvaluator {
    /// Evaluate at `x` (length must match the synthesis dimension).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Product(n) => n.eval(x),
            Self::Shallow(n) => n.eval(x),
            Self::Staircase(n) => n.eval(x),
            Self::Deep(n) => n.eval(x),
        }
    }

    fn to_netspec(&self) -> Result<NetSpec> {
        match self {
            Self::Product(n) => n.to_netspec(),
            Self::Shallow(n) => n.to_netspec(),
            Self::Staircase(n) => n.to_netspec(),
            Self::Deep(n) => n.to_netspec(),
        }
    }
}

/// Everything a synthesis produces: shape, counts, the structured
/// evaluator, and (when small enough) the materialized network.
#[derive(Clone, Debug)]
pub struct SynthesisReport {
    /// Which synthesizer produced this report.
    pub synthesizer: &'static str,
    pub dimension: usize,
    /// Sparse-grid level, if the synthesis interpolates a target.
    pub level: Option<u32>,
    /// Requested accuracy.
    pub eps_target: f64,
    /// Internal working tolerance derived from the error split.
    pub eps_tilde: f64,
    /// Label of the activation family in use.
    pub activation: String,
    /// Hidden-layer widths.
    pub widths: Vec<u64>,
    /// Output weights that depend on the synthesized function.
    pub trainable: u64,
    /// Sum of absolute interpolation coefficients (0 for product nets).
    pub sum_abs_coeff: f64,
    /// Whether the target vanished on the sampled boundary.
    pub boundary_vanishing: bool,
    /// Materialized network, present when its size is moderate.
    pub net: Option<NetSpec>,
    /// Structured evaluator, always present.
    pub evaluator: SynthEvaluator,
}

impl SynthesisReport {
    /// Evaluate the synthesized network at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.evaluator.eval(x)
    }

    /// Total hidden neurons.
    pub fn neurons(&self) -> u64 {
        self.widths.iter().sum()
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// Materialize the network regardless of size.
    pub fn to_netspec(&self) -> Result<NetSpec> {
        self.evaluator.to_netspec()
    }
}

fn gadget_value(sigma: &ActivationKind, curvature: f64, lambda: f64, a: f64, b: f64) -> f64 {
    let c = 1.0 / (4.0 * lambda * lambda * curvature);
    (sigma.apply(lambda * (a + b)) + sigma.apply(-lambda * (a + b))
        - sigma.apply(lambda * (a - b))
        - sigma.apply(-lambda * (a - b)))
        * c
}

fn check_product_params(d: usize, eps: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::BadParameter {
            name: "dimension",
            value: d as f64,
            range: "at least 2 for product synthesis",
        });
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            range: "(0, 0.25)",
        });
    }
    Ok(())
}

/// Inner scale tolerance so that swapping the exact rectifier for the
/// rescaled activation costs at most 10% of `eps`: each neuron's value
/// moves by at most `tol`, amplified once through the second layer's
/// weights and once by the output weights.
fn relu_like_tolerance(
    eps: f64,
    coeff_sum: f64,
    log_frag: &ReluFragment,
    exp_frag: &ReluFragment,
    d: usize,
) -> f64 {
    let a1 = frag_weight_sum(log_frag);
    let a2 = frag_weight_sum(exp_frag);
    let gain = coeff_sum * a2 * (1.0 + d as f64 * a1);
    0.1 * eps / gain.max(1e-300)
}

/// Synthesize a two-layer network computing the product of all `d`
/// coordinates on the unit cube to uniform error `eps`: one truncated-log
/// block per coordinate and one exponential block on the sum. `eps` must
/// lie in `(0, 1/4)` and `d` must be at least 2.
pub fn synth_product_shallow(
    d: usize,
    eps: f64,
    family: ActivationFamily,
) -> Result<SynthesisReport> {
    check_product_params(d, eps)?;
    let tol = eps / 3.0;
    let log_pwl = approx_log_truncated(tol, tol / d as f64)?;
    let exp_pwl = exp_chord_pwl(tol.ln(), (2.0 * tol).sqrt())?;
    let log_frag = pwl_to_relu(&log_pwl);
    let exp_frag = pwl_to_relu(&exp_pwl);
    let act = match &family {
        ActivationFamily::ExactRelu => None,
        ActivationFamily::ReluLike(base) => {
            let tol_act = relu_like_tolerance(eps, 1.0, &log_frag, &exp_frag, d);
            Some(scale_relu_like(base.clone(), tol_act)?)
        }
        ActivationFamily::SigmoidLike(base) => {
            return Err(Error::BadActivation {
                name: base.name().to_string(),
                reason: "product synthesis uses chord blocks and needs a rectifier family",
            })
        }
    };
    let widths = vec![
        (d * log_frag.neurons.len()) as u64,
        exp_frag.neurons.len() as u64,
    ];
    let net = ShallowProductNet {
        dimension: d,
        log_pwl,
        exp_pwl,
        log_frag,
        exp_frag,
        act,
    };
    let spec = if net.nnz_estimate() <= MATERIALIZE_NNZ_CAP {
        Some(net.to_netspec()?)
    } else {
        None
    };
    Ok(SynthesisReport {
        synthesizer: "product-shallow",
        dimension: d,
        level: None,
        eps_target: eps,
        eps_tilde: tol,
        activation: family.label(),
        widths,
        trainable: 0,
        sum_abs_coeff: 0.0,
        boundary_vanishing: true,
        net: spec,
        evaluator: SynthEvaluator::Product(net),
    })
}

struct InterpolantParts {
    level: u32,
    tol: f64,
    maps: Vec<(f64, f64)>,
    terms: Vec<(Vec<usize>, f64)>,
    sum_abs: f64,
    boundary_vanishing: bool,
}

fn interpolate_target<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
) -> Result<InterpolantParts> {
    let tol = working_tolerance(eps, seminorm)?;
    let level = select_level_for(d, eps, seminorm)?;
    let interp = hierarchize_hat(f, d, level)?;
    let pairs = all_pairs(level);
    let terms: Vec<(Vec<usize>, f64)> = interp
        .coefficients()
        .map(|(li, v)| {
            let ids = (0..d)
                .map(|j| pair_id(li.level()[j], li.position()[j]))
                .collect();
            (ids, v)
        })
        .collect();
    Ok(InterpolantParts {
        level,
        tol,
        maps: pair_maps(&pairs),
        terms,
        sum_abs: interp.sum_abs(),
        boundary_vanishing: interp.boundary_vanishing(),
    })
}

/// Synthesize a two-layer rectifier network approximating `f` on the unit
/// cube to uniform error `eps`, given a bound `seminorm` on the target's
/// mixed second derivatives. The level is chosen so interpolation spends
/// half the budget; truncated log-hat blocks and per-index exponential
/// blocks spend the rest.
pub fn synth_korobov_shallow<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
) -> Result<SynthesisReport> {
    synth_shallow_impl(f, d, eps, seminorm, ActivationFamily::ExactRelu)
}

/// Synthesize a two-layer network for `f` with a general activation
/// family: rectifier-like activations reuse the chord blocks under an
/// inner rescaling, sigmoid-like activations switch to staircase blocks
/// of threshold neurons.
pub fn synth_korobov_shallow_general<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
    family: ActivationFamily,
) -> Result<SynthesisReport> {
    match family {
        ActivationFamily::SigmoidLike(base) => synth_staircase_impl(f, d, eps, seminorm, base),
        other => synth_shallow_impl(f, d, eps, seminorm, other),
    }
}

fn synth_shallow_impl<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
    family: ActivationFamily,
) -> Result<SynthesisReport> {
    let parts = interpolate_target(f, d, eps, seminorm)?;
    let tol = parts.tol;
    let log_pwl = log_hat_pwl(tol, d)?;
    let exp_pwl = exp_chord_pwl((tol / 3.0).ln(), (2.0 * tol / 3.0).sqrt())?;
    let log_frag = pwl_to_relu(&log_pwl);
    let exp_frag = pwl_to_relu(&exp_pwl);
    let act = match &family {
        ActivationFamily::ExactRelu => None,
        ActivationFamily::ReluLike(base) => {
            let tol_act =
                relu_like_tolerance(eps, parts.sum_abs.max(1.0), &log_frag, &exp_frag, d);
            Some(scale_relu_like(base.clone(), tol_act)?)
        }
        ActivationFamily::SigmoidLike(_) => unreachable!("routed to the staircase synthesis"),
    };
    let widths = vec![
        (d * parts.maps.len() * log_frag.neurons.len()) as u64,
        (parts.terms.len() * exp_frag.neurons.len()) as u64,
    ];
    let net = ShallowKorobovNet {
        dimension: d,
        log_pwl,
        exp_pwl,
        log_frag,
        exp_frag,
        act,
        maps: parts.maps,
        terms: parts.terms,
    };
    let spec = if net.nnz_estimate() <= MATERIALIZE_NNZ_CAP {
        Some(net.to_netspec()?)
    } else {
        None
    };
    Ok(SynthesisReport {
        synthesizer: if matches!(family, ActivationFamily::ExactRelu) {
            "korobov-shallow"
        } else {
            "korobov-shallow-general"
        },
        dimension: d,
        level: Some(parts.level),
        eps_target: eps,
        eps_tilde: tol,
        activation: family.label(),
        widths,
        trainable: net.terms.len() as u64,
        sum_abs_coeff: parts.sum_abs,
        boundary_vanishing: parts.boundary_vanishing,
        net: spec,
        evaluator: SynthEvaluator::Shallow(net),
    })
}

/// Staircase block for the truncated log-hat: a rising and a falling
/// flight of step neurons with analytically placed thresholds.
fn tent_staircase(tol: f64, d: usize, act: &ActivationKind) -> Result<StepFragment> {
    let span = (3.0 / tol).ln();
    let floor = -span;
    let step_v = tol / (6.0 * d as f64);
    let m = (span / step_v).floor() as usize;
    let crossing = |k: usize| (floor + k as f64 * step_v).exp() - 1.0;
    let mut thresholds = Vec::with_capacity(2 * m);
    let mut weights = Vec::with_capacity(2 * m);
    for k in 1..=m {
        thresholds.push(0.5 * (crossing(k - 1) + crossing(k)));
        weights.push(step_v);
    }
    for k in (1..=m).rev() {
        thresholds.push(-0.5 * (crossing(k - 1) + crossing(k)));
        weights.push(-step_v);
    }
    let act = finalize_step_activation(act, &thresholds, tol / (12.0 * d as f64), 2.0 * span)?;
    StepFragment::new(floor, thresholds, weights, act)
}

/// Staircase block for the exponential on `[ln(tol/3), 0]`: exactly
/// `ceil(6 / tol)` step neurons with jump `h = (1 - tol/3) / (count + 1)`,
/// reaching exactly 1 above the last threshold.
fn exp_staircase(tol: f64, act: &ActivationKind) -> Result<StepFragment> {
    let count = (6.0 / tol).ceil() as usize;
    let lo = tol / 3.0;
    let h = (1.0 - lo) / (count + 1) as f64;
    let level = |k: usize| {
        if k == count + 1 {
            1.0
        } else {
            lo + k as f64 * h
        }
    };
    let mut thresholds = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in 1..=count {
        thresholds.push(0.5 * (level(k).ln() + level(k + 1).ln()));
        weights.push(h);
    }
    let act = finalize_step_activation(act, &thresholds, tol / 6.0, 1.0 - lo)?;
    StepFragment::new(level(1), thresholds, weights, act)
}

/// Compress a sigmoid base toward the step tightly enough that the whole
/// fragment (total jump mass `weight_mass`) deviates by at most
/// `error_share` outside exclusion zones of a quarter threshold gap
/// (never below 1e-9).
fn finalize_step_activation(
    act: &ActivationKind,
    thresholds: &[f64],
    error_share: f64,
    weight_mass: f64,
) -> Result<ActivationKind> {
    if matches!(act, ActivationKind::Heaviside) {
        return Ok(ActivationKind::Heaviside);
    }
    let min_gap = thresholds
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let exclusion = if min_gap.is_finite() {
        (0.25 * min_gap).max(1e-9)
    } else {
        1e-9
    };
    let tol = (error_share / weight_mass).min(0.49);
    scale_sigmoid_like(act.clone(), exclusion, tol)
}

fn synth_staircase_impl<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
    base: ActivationKind,
) -> Result<SynthesisReport> {
    if base.sigmoid_limits().is_none() {
        return Err(Error::BadActivation {
            name: base.name().to_string(),
            reason: "staircase synthesis needs a bounded sigmoid-shaped activation",
        });
    }
    let parts = interpolate_target(f, d, eps, seminorm)?;
    let tol = parts.tol;
    let l1 = tent_staircase(tol, d, &base)?;
    let l2 = exp_staircase(tol, &base)?;
    let widths = vec![
        (d * parts.maps.len() * l1.neuron_count()) as u64,
        (parts.terms.len() * l2.neuron_count()) as u64,
    ];
    let net = StepKorobovNet {
        dimension: d,
        l1,
        l2,
        maps: parts.maps,
        terms: parts.terms,
    };
    let spec = if net.nnz_estimate() <= MATERIALIZE_NNZ_CAP {
        Some(net.to_netspec()?)
    } else {
        None
    };
    Ok(SynthesisReport {
        synthesizer: "korobov-shallow-general",
        dimension: d,
        level: Some(parts.level),
        eps_target: eps,
        eps_tilde: tol,
        activation: format!("sigmoid_like:{}", base.name()),
        widths,
        trainable: net.terms.len() as u64,
        sum_abs_coeff: parts.sum_abs,
        boundary_vanishing: parts.boundary_vanishing,
        net: spec,
        evaluator: SynthEvaluator::Staircase(net),
    })
}

/// Grid-measured worst gadget error over the slightly inflated unit box.
fn gadget_error(sigma: &ActivationKind, curvature: f64, lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    let pts = 24;
    for i in 0..=pts {
        let a = -0.1 + 1.2 * i as f64 / pts as f64;
        for k in 0..=pts {
            let b = -0.1 + 1.2 * k as f64 / pts as f64;
            worst = worst.max((gadget_value(sigma, curvature, lambda, a, b) - a * b).abs());
        }
    }
    worst
}

/// Choose the gadget scale: extrapolate from a reference measurement via
/// the quadratic error law, then verify and halve until the target is met.
fn calibrate_lambda(sigma: &ActivationKind, curvature: f64, target: f64) -> Result<f64> {
    let lambda_ref = 1e-2;
    let e_ref = gadget_error(sigma, curvature, lambda_ref);
    let mut lambda = if e_ref > 0.0 {
        (0.5 * (target / (e_ref / (lambda_ref * lambda_ref))).sqrt()).min(0.25)
    } else {
        0.25
    };
    for _ in 0..80 {
        if gadget_error(sigma, curvature, lambda) <= target {
            return Ok(lambda);
        }
        lambda *= 0.5;
    }
    Err(Error::ScalingFailed {
        name: sigma.name().to_string(),
        reason: format!("no gadget scale reached error {target}"),
    })
}

/// Largest deep network the synthesizer will materialize.
const DEEP_NEURON_CAP: u64 = 5_000_000;

/// Synthesize a deep network approximating `f` on the unit cube to
/// uniform error `eps`: every hat factor is represented exactly by four
/// rectifier neurons, then one balanced tree of product gadgets per
/// sparse-grid index multiplies the factors in `ceil(log2 d)` activation
/// layers. The gadget activation needs nonzero curvature at the origin.
pub fn synth_korobov_deep<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    eps: f64,
    seminorm: f64,
    sigma: ActivationKind,
) -> Result<SynthesisReport> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let curvature = if d >= 2 { require_curvature(&sigma)? } else { 0.25 };
    let parts = interpolate_target(f, d, eps, seminorm)?;
    let gadgets_per_tree = (1u64 << ((d as f64).log2().ceil() as u32)) - 1;
    let lambda = if d >= 2 {
        let budget = if parts.sum_abs > 0.0 {
            (eps / 2.0) / parts.sum_abs / gadgets_per_tree as f64
        } else {
            0.25
        };
        calibrate_lambda(&sigma, curvature, budget)?
    } else {
        1.0
    };
    let widths = predicted_deep_widths(d, parts.level)?;
    let total: u64 = widths.iter().sum();
    if total > DEEP_NEURON_CAP {
        return Err(Error::BadExperiment(format!(
            "deep synthesis would need {total} neurons; the cap is {DEEP_NEURON_CAP}"
        )));
    }
    let net = DeepKorobovNet {
        dimension: d,
        sigma: sigma.clone(),
        curvature,
        lambda,
        maps: parts.maps,
        terms: parts.terms,
    };
    let spec = net.to_netspec()?;
    debug_assert_eq!(
        spec.widths().iter().map(|&w| w as u64).collect::<Vec<_>>(),
        widths
    );
    Ok(SynthesisReport {
        synthesizer: "korobov-deep",
        dimension: d,
        level: Some(parts.level),
        eps_target: eps,
        eps_tilde: parts.tol,
        activation: sigma.name().to_string(),
        widths,
        trainable: net.terms.len() as u64,
        sum_abs_coeff: parts.sum_abs,
        boundary_vanishing: parts.boundary_vanishing,
        net: Some(spec),
        evaluator: SynthEvaluator::Deep(net),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::count_indices;

    fn unit_parabola(d: usize) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| {
            debug_assert_eq!(x.len(), d);
            x.iter().map(|&t| 4.0 * t * (1.0 - t)).product()
        }
    }

    fn halton(index: u64, base: u64) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        let mut i = index;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }

    fn sample_points(d: usize, count: usize) -> Vec<Vec<f64>> {
        const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
        (1..=count)
            .map(|k| (0..d).map(|j| halton(k as u64, PRIMES[j])).collect())
            .collect()
    }

    #[test]
    fn product_net_meets_counts_and_error() {
        let report = synth_product_shallow(2, 0.1, ActivationFamily::ExactRelu).unwrap();
        let predicted = predicted_product_widths(2, 0.1).unwrap();
        assert_eq!(report.widths, predicted);
        assert_eq!(report.depth(), 2);
        assert_eq!(report.trainable, 0);
        let mut worst = 0.0f64;
        for x in sample_points(2, 4000) {
            let want: f64 = x.iter().product();
            worst = worst.max((report.eval(&x) - want).abs());
        }
        assert!(worst <= 0.1, "sup error {worst}");
        assert!((report.eval(&[1.0, 1.0]) - 1.0).abs() < 1e-12);
        let net = report.net.as_ref().expect("small product net materializes");
        for x in sample_points(2, 100) {
            assert!((net.eval(&x).unwrap() - report.eval(&x)).abs() < 1e-9);
        }
        assert_eq!(net.neuron_count(), report.neurons());
    }

    #[test]
    fn product_net_rejects_bad_parameters() {
        assert!(synth_product_shallow(1, 0.1, ActivationFamily::ExactRelu).is_err());
        assert!(synth_product_shallow(2, 0.25, ActivationFamily::ExactRelu).is_err());
        assert!(synth_product_shallow(2, 0.0, ActivationFamily::ExactRelu).is_err());
        assert!(synth_product_shallow(
            2,
            0.1,
            ActivationFamily::SigmoidLike(ActivationKind::Logistic)
        )
        .is_err());
    }

    #[test]
    fn product_net_relu_like_family() {
        let report = synth_product_shallow(
            2,
            0.1,
            ActivationFamily::ReluLike(ActivationKind::Softplus),
        )
        .unwrap();
        assert_eq!(report.activation, "relu_like:softplus");
        let mut worst = 0.0f64;
        for x in sample_points(2, 2000) {
            let want: f64 = x.iter().product();
            worst = worst.max((report.eval(&x) - want).abs());
        }
        assert!(worst <= 0.1, "sup error {worst}");
    }

    #[test]
    fn shallow_net_small_case_matches_interpolant_structure() {
        let f = |x: &[f64]| 0.01 * x.iter().map(|&t| 4.0 * t * (1.0 - t)).product::<f64>();
        let report = synth_korobov_shallow(f, 2, 0.011, 0.64).unwrap();
        assert_eq!(report.level, Some(2));
        assert_eq!(report.trainable, count_indices(2, 2).unwrap());
        let tol = report.eps_tilde;
        assert!((tol - 0.011 / (2.0 * 0.64)).abs() < 1e-15);
        let predicted = predicted_shallow_widths(2, 2, tol).unwrap();
        assert_eq!(report.widths.to_vec(), predicted.to_vec());
        let net = report.net.as_ref().expect("small shallow net materializes");
        assert_eq!(net.neuron_count(), report.neurons());
        assert_eq!(net.trainable, report.trainable);
        for x in sample_points(2, 300) {
            assert!((net.eval(&x).unwrap() - report.eval(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn shallow_net_meets_target_error() {
        let f = unit_parabola(2);
        let report = synth_korobov_shallow(f, 2, 0.2, 64.0).unwrap();
        assert_eq!(report.level, Some(4));
        assert!(report.boundary_vanishing);
        let g = unit_parabola(2);
        let mut worst = 0.0f64;
        for x in sample_points(2, 20_000) {
            worst = worst.max((report.eval(&x) - g(&x)).abs());
        }
        assert!(worst <= 0.2, "sup error {worst}");
    }

    #[test]
    fn shallow_net_zero_target() {
        let report = synth_korobov_shallow(|_| 0.0, 2, 0.1, 0.0).unwrap();
        assert_eq!(report.level, Some(1));
        assert_eq!(report.sum_abs_coeff, 0.0);
        assert_eq!(report.eps_tilde, 0.25);
        for x in sample_points(2, 50) {
            assert_eq!(report.eval(&x), 0.0);
        }
        let net = report.net.as_ref().expect("tiny net materializes");
        for x in sample_points(2, 50) {
            assert_eq!(net.eval(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn shallow_net_skips_materialization_when_large() {
        let f = unit_parabola(2);
        let report = synth_korobov_shallow(f, 2, 0.05, 64.0).unwrap();
        assert_eq!(report.level, Some(5));
        assert!(report.net.is_none(), "net of {} neurons", report.neurons());
        let g = unit_parabola(2);
        let mut worst = 0.0f64;
        for x in sample_points(2, 3000) {
            worst = worst.max((report.eval(&x) - g(&x)).abs());
        }
        assert!(worst <= 0.05, "sup error {worst}");
    }

    #[test]
    fn shallow_net_relu_like_family() {
        let f = |x: &[f64]| 4.0 * x[0] * (1.0 - x[0]);
        let report = synth_korobov_shallow_general(
            f,
            1,
            0.2,
            8.0,
            ActivationFamily::ReluLike(ActivationKind::Softplus),
        )
        .unwrap();
        assert_eq!(report.activation, "relu_like:softplus");
        let mut worst = 0.0f64;
        for k in 0..=2000 {
            let x = [k as f64 / 2000.0];
            worst = worst.max((report.eval(&x) - 4.0 * x[0] * (1.0 - x[0])).abs());
        }
        assert!(worst <= 0.2, "sup error {worst}");
    }

    #[test]
    fn staircase_net_counts_and_error() {
        let f = |x: &[f64]| 4.0 * x[0] * (1.0 - x[0]);
        let report = synth_korobov_shallow_general(
            f,
            1,
            0.2,
            8.0,
            ActivationFamily::SigmoidLike(ActivationKind::Heaviside),
        )
        .unwrap();
        assert_eq!(report.level, Some(3));
        let tol = report.eps_tilde;
        assert!((tol - 0.0125).abs() < 1e-15);
        let predicted = predicted_staircase_widths(1, 3, tol).unwrap();
        assert_eq!(report.widths.to_vec(), predicted.to_vec());
        assert_eq!(staircase_exp_neurons(tol), 480);
        let mut worst = 0.0f64;
        for x in sample_points(1, 2000) {
            worst = worst.max((report.eval(&x) - 4.0 * x[0] * (1.0 - x[0])).abs());
        }
        assert!(worst <= 0.2, "sup error {worst}");
    }

    #[test]
    fn staircase_net_materializes_small_case() {
        let f = |x: &[f64]| 4.0 * x[0] * (1.0 - x[0]);
        let report = synth_korobov_shallow_general(
            f,
            1,
            0.45,
            8.0,
            ActivationFamily::SigmoidLike(ActivationKind::Heaviside),
        )
        .unwrap();
        let net = report.net.as_ref().expect("small staircase materializes");
        for x in sample_points(1, 200) {
            assert!((net.eval(&x).unwrap() - report.eval(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn deep_net_shape_and_error() {
        let f = unit_parabola(2);
        let report = synth_korobov_deep(f, 2, 0.2, 64.0, ActivationKind::Softplus).unwrap();
        assert_eq!(report.level, Some(4));
        assert_eq!(report.depth(), 2);
        let terms = count_indices(2, 4).unwrap();
        assert_eq!(report.widths, predicted_deep_widths(2, 4).unwrap());
        assert!(report.neurons() <= 2u64 * (1u64 << 6) + 16 * terms);
        let net = report.net.as_ref().expect("deep nets always materialize");
        assert_eq!(net.depth(), 2);
        let g = unit_parabola(2);
        let mut worst = 0.0f64;
        let mut worst_gap = 0.0f64;
        for x in sample_points(2, 4000) {
            let structured = report.eval(&x);
            worst = worst.max((structured - g(&x)).abs());
            worst_gap = worst_gap.max((net.eval(&x).unwrap() - structured).abs());
        }
        assert!(worst <= 0.2, "sup error {worst}");
        assert!(worst_gap < 1e-9, "evaluator mismatch {worst_gap}");
    }

    #[test]
    fn deep_net_one_dimension_is_exact_interpolation() {
        let f = |x: &[f64]| 4.0 * x[0] * (1.0 - x[0]);
        let report = synth_korobov_deep(f, 1, 0.1, 8.0, ActivationKind::Softplus).unwrap();
        assert_eq!(report.depth(), 1);
        let mut worst = 0.0f64;
        for k in 0..=1000 {
            let x = [k as f64 / 1000.0];
            worst = worst.max((report.eval(&x) - 4.0 * x[0] * (1.0 - x[0])).abs());
        }
        assert!(worst <= 0.05, "interpolation error {worst}");
    }

    #[test]
    fn deep_net_rejects_flat_activations() {
        let f = unit_parabola(2);
        assert!(synth_korobov_deep(f, 2, 0.2, 64.0, ActivationKind::Logistic).is_err());
        let f = unit_parabola(2);
        assert!(synth_korobov_deep(f, 2, 0.2, 64.0, ActivationKind::Tanh).is_err());
    }

    #[test]
    fn deep_net_zero_target() {
        let report = synth_korobov_deep(|_| 0.0, 2, 0.1, 0.0, ActivationKind::Softplus).unwrap();
        assert_eq!(report.sum_abs_coeff, 0.0);
        for x in sample_points(2, 20) {
            assert_eq!(report.eval(&x), 0.0);
        }
    }

    #[test]
    fn predicted_width_helpers_are_consistent() {
        assert_eq!(product_tree_round_widths(4), vec![8, 4]);
        assert_eq!(product_tree_round_widths(5), vec![9, 5, 4]);
        assert_eq!(product_tree_round_widths(1), Vec::<u64>::new());
        let z = (3.0f64 / (2.0 * 0.01)).sqrt() * (3.0f64 / 0.01).ln();
        assert_eq!(exp_block_neurons(0.01), 1 + z.ceil() as u64);
    }
}
