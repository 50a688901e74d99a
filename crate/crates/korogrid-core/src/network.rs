//! Explicit feed-forward network descriptions and activation tooling.
//!
//! A [`NetSpec`] is a plain record of hidden layers (sparse weight rows,
//! biases, one activation per layer, optional identity pass-through
//! neurons) followed by a single linear output. Nothing here is trained;
//! synthesis routines write all weights in closed form.
//!
//! Activation rescaling turns qualitative activations into quantitative
//! ones: [`scale_sigmoid_like`] compresses any bounded sigmoid-shaped
//! function into a unit step up to a tolerance outside a dead zone, and
//! [`scale_relu_like`] rescales functions with linear growth on one side
//! into the rectifier up to a uniform tolerance.
//!
//! [`product_gadget`] multiplies two numbers with four neurons of any
//! activation with nonzero curvature at the origin, using
//!
//! ```text
//! x*y = [s(L(x+y)) + s(-L(x+y)) - s(L(x-y)) - s(-L(x-y))] / (4 L^2 s''(0)) + O(L^2),
//! ```
//!
//! and [`product_tree`] folds `d` inputs through a balanced binary tree of
//! such gadgets in `ceil(log2 d)` layers and at most `8d` neurons.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Activation functions understood by [`NetSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum ActivationKind {
    /// `max(x, 0)`.
    ReLU,
    /// `1` for `x >= 0`, else `0`.
    Heaviside,
    /// `1 / (1 + exp(-x))`.
    Logistic,
    /// `tanh(x)`.
    Tanh,
    /// `ln(1 + exp(x))`.
    Softplus,
    /// `x` for `x > 0`, else `exp(x) - 1`.
    Elu,
    /// `(base(m x) - lo) / (hi - lo)`: a bounded activation compressed
    /// toward the unit step; `lo`/`hi` are the limits of `base`.
    ScaledSigmoidLike {
        base: Box<ActivationKind>,
        m: f64,
        lo: f64,
        hi: f64,
    },
    /// `base(m x) / (m * slope)`: an asymptotically linear activation
    /// compressed toward the rectifier; `slope` is the growth rate of
    /// `base` at `+inf`.
    ScaledReluLike {
        base: Box<ActivationKind>,
        m: f64,
        slope: f64,
    },
}

impl ActivationKind {
    /// Apply the activation; numerically stable over all of `f64`.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Self::ReLU => x.max(0.0),
            Self::Heaviside => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Self::Tanh => x.tanh(),
            Self::Softplus => x.max(0.0) + (-x.abs()).exp().ln_1p(),
            Self::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Self::ScaledSigmoidLike { base, m, lo, hi } => (base.apply(m * x) - lo) / (hi - lo),
            Self::ScaledReluLike { base, m, slope } => base.apply(m * x) / (m * slope),
        }
    }

    /// Tag used in JSON and CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ReLU => "relu",
            Self::Heaviside => "heaviside",
            Self::Logistic => "logistic",
            Self::Tanh => "tanh",
            Self::Softplus => "softplus",
            Self::Elu => "elu",
            Self::ScaledSigmoidLike { .. } => "scaled_sigmoid_like",
            Self::ScaledReluLike { .. } => "scaled_relu_like",
        }
    }

    /// Parse one of the base activation names.
    pub fn parse_base(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Self::ReLU),
            "heaviside" => Ok(Self::Heaviside),
            "logistic" => Ok(Self::Logistic),
            "tanh" => Ok(Self::Tanh),
            "softplus" => Ok(Self::Softplus),
            "elu" => Ok(Self::Elu),
            other => Err(Error::BadActivation {
                name: other.to_string(),
                reason: "not a base activation name",
            }),
        }
    }

    /// Limits `(lo, hi)` at `-inf`/`+inf` for bounded sigmoid-shaped
    /// activations; `None` otherwise.
    pub fn sigmoid_limits(&self) -> Option<(f64, f64)> {
        match self {
            Self::Heaviside | Self::Logistic => Some((0.0, 1.0)),
            Self::Tanh => Some((-1.0, 1.0)),
            _ => None,
        }
    }

    /// Growth rate at `+inf` for activations with `base(x)/x -> slope` and
    /// `base(x) -> 0` at `-inf`; `None` otherwise.
    pub fn relu_like_slope(&self) -> Option<f64> {
        match self {
            Self::ReLU | Self::Softplus | Self::Elu => Some(1.0),
            _ => None,
        }
    }

    /// Second derivative at the origin, `0.0` where undefined or zero.
    pub fn curvature_at_zero(&self) -> f64 {
        match self {
            Self::Softplus => 0.25,
            _ => 0.0,
        }
    }

    fn params_json(&self) -> Map<String, Value> {
        let mut p = Map::new();
        match self {
            Self::ScaledSigmoidLike { base, m, lo, hi } => {
                p.insert("base".into(), json!(base.name()));
                p.insert("m".into(), json!(m));
                p.insert("lo".into(), json!(lo));
                p.insert("hi".into(), json!(hi));
            }
            Self::ScaledReluLike { base, m, slope } => {
                p.insert("base".into(), json!(base.name()));
                p.insert("m".into(), json!(m));
                p.insert("slope".into(), json!(slope));
            }
            _ => {}
        }
        p
    }

    fn from_json(name: &str, params: &Map<String, Value>) -> Result<Self> {
        let field = |key: &str| -> Result<f64> {
            params
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::BadJson(format!("missing numeric act_params.{key}")))
        };
        let base = || -> Result<Box<ActivationKind>> {
            let tag = params
                .get("base")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::BadJson("missing act_params.base".into()))?;
            Ok(Box::new(Self::parse_base(tag)?))
        };
        match name {
            "scaled_sigmoid_like" => Ok(Self::ScaledSigmoidLike {
                base: base()?,
                m: field("m")?,
                lo: field("lo")?,
                hi: field("hi")?,
            }),
            "scaled_relu_like" => Ok(Self::ScaledReluLike {
                base: base()?,
                m: field("m")?,
                slope: field("slope")?,
            }),
            other => Self::parse_base(other),
        }
    }
}

/// Largest pre-activation scale tried by the doubling searches.
const SCALE_CAP: f64 = 1e9;

/// Compress a bounded sigmoid-shaped activation toward the unit step:
/// find `m` (doubling from 1) such that the rescaled activation is within
/// `tol` of its limits for all `|x| >= delta`. Fails if the limits are not
/// attained numerically for inner scale up to 1e9.
pub fn scale_sigmoid_like(base: ActivationKind, delta: f64, tol: f64) -> Result<ActivationKind> {
    let (lo, hi) = base.sigmoid_limits().ok_or_else(|| Error::BadActivation {
        name: base.name().to_string(),
        reason: "has no finite sigmoid limits",
    })?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::BadParameter {
            name: "delta",
            value: delta,
            range: "(0, inf)",
        });
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::BadParameter {
            name: "tol",
            value: tol,
            range: "(0, 0.5)",
        });
    }
    let span = hi - lo;
    let mut m = 1.0f64;
    while m * delta <= SCALE_CAP {
        let up = base.apply(m * delta);
        let down = base.apply(-m * delta);
        if up >= hi - tol * span && down <= lo + tol * span {
            return Ok(ActivationKind::ScaledSigmoidLike {
                base: Box::new(base),
                m,
                lo,
                hi,
            });
        }
        m *= 2.0;
    }
    Err(Error::ScalingFailed {
        name: base.name().to_string(),
        reason: format!("limits not attained within tolerance {tol} for inner scale up to 1e9 at delta {delta}"),
    })
}

/// Compress an asymptotically linear activation toward the rectifier: find
/// `m` (doubling from 1) such that `base(m x)/(m slope)` is within `tol` of
/// `max(x, 0)` on a logarithmic grid spanning `|x|` from 1e-9 to 1e6 plus
/// the origin. Fails if no scale up to 1e9 suffices.
pub fn scale_relu_like(base: ActivationKind, tol: f64) -> Result<ActivationKind> {
    let slope = base.relu_like_slope().ok_or_else(|| Error::BadActivation {
        name: base.name().to_string(),
        reason: "does not approach the rectifier under rescaling",
    })?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::BadParameter {
            name: "tol",
            value: tol,
            range: "(0, inf)",
        });
    }
    let mut grid = vec![0.0f64];
    let points = 60;
    for k in 0..=points {
        let mag = 10f64.powf(-9.0 + 15.0 * k as f64 / points as f64);
        grid.push(mag);
        grid.push(-mag);
    }
    let mut m = 1.0f64;
    while m <= SCALE_CAP {
        let wrapped = ActivationKind::ScaledReluLike {
            base: Box::new(base.clone()),
            m,
            slope,
        };
        let ok = grid
            .iter()
            .all(|&x| (wrapped.apply(x) - x.max(0.0)).abs() <= tol);
        if ok {
            return Ok(wrapped);
        }
        m *= 2.0;
    }
    Err(Error::ScalingFailed {
        name: base.name().to_string(),
        reason: format!("no inner scale up to 1e9 reaches uniform tolerance {tol}"),
    })
}

/// One hidden layer: sparse weight rows over the previous layer's outputs,
/// biases, a shared activation, and an optional sorted list of neurons that
/// pass their pre-activation through unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub biases: Vec<f64>,
    pub activation: ActivationKind,
    pub linear_neurons: Vec<usize>,
}

impl Layer {
    /// Number of neurons.
    pub fn width(&self) -> usize {
        self.biases.len()
    }
}

/// An explicit feed-forward network with a single linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct NetSpec {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    pub out_weights: Vec<f64>,
    pub out_bias: f64,
    /// Number of weights that depend on the synthesized function (the rest
    /// are fixed by the architecture alone).
    pub trainable: u64,
}

impl NetSpec {
    /// Check structural consistency: row indices in range, matching widths,
    /// sorted unique pass-through lists, output width.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::BadNetwork("input_dim must be positive".into()));
        }
        let mut prev = self.input_dim;
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.rows.len() != layer.biases.len() {
                return Err(Error::BadNetwork(format!(
                    "layer {li}: {} rows vs {} biases",
                    layer.rows.len(),
                    layer.biases.len()
                )));
            }
            for (ni, row) in layer.rows.iter().enumerate() {
                if row.iter().any(|&(c, _)| c >= prev) {
                    return Err(Error::BadNetwork(format!(
                        "layer {li} neuron {ni}: weight index out of range (width {prev})"
                    )));
                }
            }
            if layer.linear_neurons.windows(2).any(|w| w[0] >= w[1])
                || layer.linear_neurons.iter().any(|&i| i >= layer.width())
            {
                return Err(Error::BadNetwork(format!(
                    "layer {li}: pass-through list must be sorted, unique and in range"
                )));
            }
            prev = layer.width();
        }
        if self.out_weights.len() != prev {
            return Err(Error::BadNetwork(format!(
                "output reads {} values but the last layer has {prev}",
                self.out_weights.len()
            )));
        }
        Ok(())
    }

    /// Evaluate the network at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::BadNetwork(format!(
                "expected {} inputs, got {}",
                self.input_dim,
                x.len()
            )));
        }
        let mut current: Vec<f64> = x.to_vec();
        for layer in &self.layers {
            let mut next = Vec::with_capacity(layer.width());
            for (ni, (row, &bias)) in layer.rows.iter().zip(&layer.biases).enumerate() {
                let mut pre = bias;
                for &(c, w) in row {
                    pre += w * current[c];
                }
                if layer.linear_neurons.binary_search(&ni).is_ok() {
                    next.push(pre);
                } else {
                    next.push(layer.activation.apply(pre));
                }
            }
            current = next;
        }
        let mut out = self.out_bias;
        for (w, v) in self.out_weights.iter().zip(&current) {
            out += w * v;
        }
        Ok(out)
    }

    /// Total number of hidden neurons (the linear output does not count).
    pub fn neuron_count(&self) -> u64 {
        self.layers.iter().map(|l| l.width() as u64).sum()
    }

    /// Hidden-layer widths, input first.
    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::width).collect()
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Nonzero stored weights, including biases and the output row.
    pub fn nonzeros(&self) -> u64 {
        let hidden: u64 = self
            .layers
            .iter()
            .map(|l| (l.rows.iter().map(Vec::len).sum::<usize>() + l.width()) as u64)
            .sum();
        hidden + self.out_weights.len() as u64 + 1
    }

    /// Serialize to the JSON network schema (dense weight matrices).
    pub fn to_json(&self) -> Value {
        let mut prev = self.input_dim;
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let w: Vec<Vec<f64>> = layer
                .rows
                .iter()
                .map(|row| {
                    let mut dense = vec![0.0; prev];
                    for &(c, v) in row {
                        dense[c] = v;
                    }
                    dense
                })
                .collect();
            let mut act_params = layer.activation.params_json();
            if !layer.linear_neurons.is_empty() {
                act_params.insert("linear_neurons".into(), json!(layer.linear_neurons));
            }
            layers.push(json!({
                "w": w,
                "b": layer.biases,
                "act": layer.activation.name(),
                "act_params": Value::Object(act_params),
            }));
            prev = layer.width();
        }
        json!({
            "input_dim": self.input_dim,
            "layers": layers,
            "out_w": self.out_weights,
            "out_b": self.out_bias,
            "meta": {
                "neurons": self.neuron_count(),
                "trainable": self.trainable,
                "depth": self.depth(),
            },
        })
    }

    /// Parse a network from the JSON schema, validating structure and meta
    /// counts.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::BadJson("top level must be an object".into()))?;
        let input_dim = obj
            .get("input_dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::BadJson("missing input_dim".into()))? as usize;
        let layers_json = obj
            .get("layers")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::BadJson("missing layers array".into()))?;
        let mut layers = Vec::with_capacity(layers_json.len());
        for (li, lj) in layers_json.iter().enumerate() {
            let lobj = lj
                .as_object()
                .ok_or_else(|| Error::BadJson(format!("layer {li} must be an object")))?;
            let w = lobj
                .get("w")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::BadJson(format!("layer {li}: missing w")))?;
            let mut rows = Vec::with_capacity(w.len());
            for row in w {
                let row = row
                    .as_array()
                    .ok_or_else(|| Error::BadJson(format!("layer {li}: w rows must be arrays")))?;
                let mut sparse = Vec::new();
                for (c, v) in row.iter().enumerate() {
                    let v = v.as_f64().ok_or_else(|| {
                        Error::BadJson(format!("layer {li}: non-numeric weight"))
                    })?;
                    if v != 0.0 {
                        sparse.push((c, v));
                    }
                }
                rows.push(sparse);
            }
            let biases: Vec<f64> = lobj
                .get("b")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::BadJson(format!("layer {li}: missing b")))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::BadJson(format!("layer {li}: non-numeric bias")))
                })
                .collect::<Result<_>>()?;
            let act_name = lobj
                .get("act")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::BadJson(format!("layer {li}: missing act")))?;
            let empty = Map::new();
            let params = lobj
                .get("act_params")
                .and_then(Value::as_object)
                .unwrap_or(&empty);
            let activation = ActivationKind::from_json(act_name, params)?;
            let linear_neurons: Vec<usize> = match params.get("linear_neurons") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .ok_or_else(|| {
                        Error::BadJson(format!("layer {li}: linear_neurons must be an array"))
                    })?
                    .iter()
                    .map(|v| {
                        v.as_u64().map(|u| u as usize).ok_or_else(|| {
                            Error::BadJson(format!("layer {li}: non-integer pass-through index"))
                        })
                    })
                    .collect::<Result<_>>()?,
            };
            layers.push(Layer {
                rows,
                biases,
                activation,
                linear_neurons,
            });
        }
        let out_weights: Vec<f64> = obj
            .get("out_w")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::BadJson("missing out_w".into()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::BadJson("non-numeric output weight".into()))
            })
            .collect::<Result<_>>()?;
        let out_bias = obj
            .get("out_b")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::BadJson("missing out_b".into()))?;
        let meta = obj
            .get("meta")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::BadJson("missing meta".into()))?;
        let trainable = meta
            .get("trainable")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::BadJson("missing meta.trainable".into()))?;
        let net = NetSpec {
            input_dim,
            layers,
            out_weights,
            out_bias,
            trainable,
        };
        net.validate()?;
        for (key, got) in [
            ("neurons", net.neuron_count()),
            ("depth", net.depth() as u64),
        ] {
            let claimed = meta
                .get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::BadJson(format!("missing meta.{key}")))?;
            if claimed != got {
                return Err(Error::BadJson(format!(
                    "meta.{key} = {claimed} but the structure has {got}"
                )));
            }
        }
        Ok(net)
    }
}

/// Incremental [`NetSpec`] assembly.
pub struct NetBuilder {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl NetBuilder {
    /// Start a network with the given input width.
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            layers: Vec::new(),
        }
    }

    /// Open a new hidden layer using `activation`.
    pub fn begin_layer(&mut self, activation: ActivationKind) {
        self.layers.push(Layer {
            rows: Vec::new(),
            biases: Vec::new(),
            activation,
            linear_neurons: Vec::new(),
        });
    }

    /// Append a neuron to the current layer; returns its index.
    pub fn add_neuron(&mut self, row: Vec<(usize, f64)>, bias: f64) -> usize {
        let layer = self.layers.last_mut().expect("no open layer");
        layer.rows.push(row);
        layer.biases.push(bias);
        layer.width() - 1
    }

    /// Append an identity pass-through neuron to the current layer.
    pub fn add_linear_neuron(&mut self, row: Vec<(usize, f64)>, bias: f64) -> usize {
        let idx = self.add_neuron(row, bias);
        let layer = self.layers.last_mut().expect("no open layer");
        layer.linear_neurons.push(idx);
        idx
    }

    /// Width of the layer currently being filled.
    pub fn current_width(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Layer::width)
    }

    /// Close the network with its linear output.
    pub fn finish(self, out_weights: Vec<f64>, out_bias: f64, trainable: u64) -> Result<NetSpec> {
        let net = NetSpec {
            input_dim: self.input_dim,
            layers: self.layers,
            out_weights,
            out_bias,
            trainable,
        };
        net.validate()?;
        Ok(net)
    }
}

/// An affine expression over the outputs of the layer currently under
/// construction (or the inputs, before any layer exists).
#[derive(Clone, Debug)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub bias: f64,
}

impl AffineExpr {
    /// The `j`-th raw value of the current layer.
    pub fn var(j: usize) -> Self {
        Self {
            terms: vec![(j, 1.0)],
            bias: 0.0,
        }
    }

    /// `scale_a * a + scale_b * b`, merging duplicate columns.
    fn combine(a: &Self, scale_a: f64, b: &Self, scale_b: f64) -> Self {
        let mut merged = std::collections::BTreeMap::new();
        for &(c, w) in &a.terms {
            *merged.entry(c).or_insert(0.0) += scale_a * w;
        }
        for &(c, w) in &b.terms {
            *merged.entry(c).or_insert(0.0) += scale_b * w;
        }
        Self {
            terms: merged.into_iter().filter(|&(_, w)| w != 0.0).collect(),
            bias: scale_a * a.bias + scale_b * b.bias,
        }
    }
}

pub(crate) fn require_curvature(sigma: &ActivationKind) -> Result<f64> {
    let s2 = sigma.curvature_at_zero();
    if s2.abs() < 1e-6 {
        return Err(Error::BadActivation {
            name: sigma.name().to_string(),
            reason: "needs nonzero second derivative at the origin for product gadgets",
        });
    }
    Ok(s2)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadParameter {
            name: "lambda",
            value: lambda,
            range: "(0, inf)",
        });
    }
    Ok(())
}

/// Append four `sigma` neurons computing `value_a * value_b` up to
/// `O(lambda^2)`; returns the gadget output as an affine expression over the
/// new layer. The caller must have opened the layer.
pub(crate) fn push_gadget(
    builder: &mut NetBuilder,
    sigma_curvature: f64,
    lambda: f64,
    a: &AffineExpr,
    b: &AffineExpr,
) -> AffineExpr {
    let coeff = 1.0 / (4.0 * lambda * lambda * sigma_curvature);
    let sum = AffineExpr::combine(a, lambda, b, lambda);
    let diff = AffineExpr::combine(a, lambda, b, -lambda);
    let mut out = AffineExpr {
        terms: Vec::with_capacity(4),
        bias: 0.0,
    };
    for (expr, sign) in [(&sum, 1.0), (&diff, -1.0)] {
        for flip in [1.0, -1.0] {
            let row: Vec<(usize, f64)> = expr.terms.iter().map(|&(c, w)| (c, flip * w)).collect();
            let idx = builder.add_neuron(row, flip * expr.bias);
            out.terms.push((idx, sign * coeff));
        }
    }
    out
}

/// A four-neuron, one-layer network multiplying its two inputs up to an
/// error of order `lambda^2` near the origin-centered unit box.
pub fn product_gadget(sigma: ActivationKind, lambda: f64) -> Result<NetSpec> {
    let s2 = require_curvature(&sigma)?;
    check_lambda(lambda)?;
    let mut builder = NetBuilder::new(2);
    builder.begin_layer(sigma);
    let out = push_gadget(
        &mut builder,
        s2,
        lambda,
        &AffineExpr::var(0),
        &AffineExpr::var(1),
    );
    let mut out_weights = vec![0.0; 4];
    for (c, w) in out.terms {
        out_weights[c] = w;
    }
    builder.finish(out_weights, out.bias, 0)
}

/// A balanced binary tree of product gadgets multiplying all `d` inputs:
/// `ceil(log2 d)` layers, at most `8 d` neurons, odd leftovers passed
/// through identity neurons.
pub fn product_tree(d: usize, sigma: ActivationKind, lambda: f64) -> Result<NetSpec> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    check_lambda(lambda)?;
    if d == 1 {
        let net = NetSpec {
            input_dim: 1,
            layers: Vec::new(),
            out_weights: vec![1.0],
            out_bias: 0.0,
            trainable: 0,
        };
        return Ok(net);
    }
    let s2 = require_curvature(&sigma)?;
    let mut builder = NetBuilder::new(d);
    let mut nodes: Vec<AffineExpr> = (0..d).map(AffineExpr::var).collect();
    while nodes.len() > 1 {
        builder.begin_layer(sigma.clone());
        let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
        for pair in nodes.chunks(2) {
            if let [a, b] = pair {
                next.push(push_gadget(&mut builder, s2, lambda, a, b));
            } else {
                let idx = builder.add_linear_neuron(pair[0].terms.clone(), pair[0].bias);
                next.push(AffineExpr::var(idx));
            }
        }
        nodes = next;
    }
    let root = nodes.pop().expect("tree has a root");
    let mut out_weights = vec![0.0; builder.current_width()];
    for (c, w) in root.terms {
        out_weights[c] = w;
    }
    let net = builder.finish(out_weights, root.bias, 0)?;
    debug_assert!(net.neuron_count() <= 8 * d as u64);
    debug_assert_eq!(net.depth(), (d as f64).log2().ceil() as usize);
    Ok(net)
}
