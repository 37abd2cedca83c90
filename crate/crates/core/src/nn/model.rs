use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::lstm;
use crate::autodiff::{Gradients, Tape, Tensor, Var};
use crate::data::Scaler;
use crate::error::{Error, Result};

/// Which side of the embedding layer a parameter lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    /// Parameters of the embedding network `h`.
    Embed,
    /// Parameters of the prediction head `g`.
    Head,
}

impl std::fmt::Display for ParamGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParamGroup::Embed => "embed",
            ParamGroup::Head => "head",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub group: ParamGroup,
    pub value: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedSpec {
    /// Dense layers of the given widths, each followed by `activation`; the
    /// embedding is the post-activation output of the last one.
    Mlp {
        widths: Vec<usize>,
        activation: Activation,
    },
    /// Single-layer LSTM over `d_x / input_size` steps; the embedding is the
    /// final hidden state.
    Lstm { input_size: usize, hidden: usize },
}

/// Head layers: optional hidden layers, then a linear map to `d_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSpec {
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for HeadSpec {
    fn default() -> Self {
        Self {
            hidden: Vec::new(),
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub embed: EmbedSpec,
    pub head: HeadSpec,
}

impl ModelSpec {
    /// The (100, 50) ReLU network used for the tabular benchmarks.
    pub fn tabular() -> Self {
        Self {
            embed: EmbedSpec::Mlp {
                widths: vec![100, 50],
                activation: Activation::Relu,
            },
            head: HeadSpec::default(),
        }
    }

    pub fn lstm(hidden: usize) -> Self {
        Self {
            embed: EmbedSpec::Lstm {
                input_size: 1,
                hidden,
            },
            head: HeadSpec::default(),
        }
    }

    pub fn embed_dim(&self) -> Result<usize> {
        let d = match &self.embed {
            EmbedSpec::Mlp { widths, .. } => widths.last().copied(),
            EmbedSpec::Lstm { hidden, .. } => Some(*hidden),
        };
        d.filter(|&d| d > 0)
            .ok_or_else(|| Error::InvalidParameter("embedding network needs a positive final width".into()))
    }
}

/// A regressor factored as `predict(x) = head(embed(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitModel {
    spec: ModelSpec,
    d_x: usize,
    d_z: usize,
    d_y: usize,
    params: Vec<Param>,
    scaler: Option<Scaler>,
}

fn uniform_init(rng: &mut impl Rng, shape: &[usize], fan_in: usize) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
    Tensor::from_parts(shape.to_vec(), data)
}

impl SplitModel {
    /// Fresh parameters: uniform(±1/√fan_in) everywhere, LSTM forget-gate bias 1.
    pub fn init(spec: ModelSpec, d_x: usize, d_y: usize, rng: &mut impl Rng) -> Result<Self> {
        if d_x == 0 || d_y == 0 {
            return Err(Error::InvalidParameter(format!(
                "model needs positive input/output widths, got d_x={d_x}, d_y={d_y}"
            )));
        }
        let d_z = spec.embed_dim()?;
        let mut params = Vec::new();
        let dense = |params: &mut Vec<Param>, prefix: &str, group, fan_in, fan_out, rng: &mut _| {
            params.push(Param {
                name: format!("{prefix}.weight"),
                group,
                value: uniform_init(rng, &[fan_in, fan_out], fan_in),
            });
            params.push(Param {
                name: format!("{prefix}.bias"),
                group,
                value: uniform_init(rng, &[1, fan_out], fan_in),
            });
        };

        match &spec.embed {
            EmbedSpec::Mlp { widths, .. } => {
                if widths.iter().any(|&w| w == 0) {
                    return Err(Error::InvalidParameter("layer widths must be positive".into()));
                }
                let mut fan_in = d_x;
                for (l, &w) in widths.iter().enumerate() {
                    dense(&mut params, &format!("embed.{l}"), ParamGroup::Embed, fan_in, w, rng);
                    fan_in = w;
                }
            }
            EmbedSpec::Lstm { input_size, hidden } => {
                if *input_size == 0 || d_x % input_size != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "LSTM input width {d_x} is not a multiple of the step size {input_size}"
                    )));
                }
                params.extend(lstm::init_params(*input_size, *hidden, rng));
            }
        }
        let mut fan_in = d_z;
        for (l, &w) in spec.head.hidden.iter().enumerate() {
            if w == 0 {
                return Err(Error::InvalidParameter("layer widths must be positive".into()));
            }
            dense(&mut params, &format!("head.{l}"), ParamGroup::Head, fan_in, w, rng);
            fan_in = w;
        }
        dense(&mut params, "head.out", ParamGroup::Head, fan_in, d_y, rng);

        Ok(Self {
            spec,
            d_x,
            d_z,
            d_y,
            params,
            scaler: None,
        })
    }

    /// Reassembles a model from stored parts, validating parameter shapes.
    pub fn from_parts(
        spec: ModelSpec,
        d_x: usize,
        d_y: usize,
        values: Vec<Tensor>,
        scaler: Option<Scaler>,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut model = Self::init(spec, d_x, d_y, &mut rng)?;
        if values.len() != model.params.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameter tensors, got {}",
                model.params.len(),
                values.len()
            )));
        }
        for (p, v) in model.params.iter_mut().zip(values) {
            if p.value.shape() != v.shape() {
                return Err(Error::shape(
                    "load",
                    format!("{}: expected {:?}, got {:?}", p.name, p.value.shape(), v.shape()),
                ));
            }
            p.value = v;
        }
        model.scaler = scaler;
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn d_y(&self) -> usize {
        self.d_y
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    pub fn set_scaler(&mut self, scaler: Option<Scaler>) {
        self.scaler = scaler;
    }

    /// Records the parameters on `tape`, trainable or not.
    pub fn bind<'m, 't>(&'m self, tape: &'t Tape, trainable: bool) -> Bound<'m, 't> {
        let vars = self
            .params
            .iter()
            .map(|p| tape.var(p.value.clone().with_requires_grad(trainable)))
            .collect();
        Bound { model: self, tape, vars }
    }

    /// `head(embed(x))` on already standardized inputs.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let bound = self.bind(&tape, false);
        let (_, y) = bound.forward(tape.constant(x.clone()))?;
        Ok(y.to_tensor())
    }

    /// Embeddings `embed(x)` on already standardized inputs.
    pub fn embed(&self, x: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let bound = self.bind(&tape, false);
        Ok(bound.embed(tape.constant(x.clone()))?.to_tensor())
    }

    /// Predictions in original target units for raw (unstandardized) features.
    pub fn predict_raw(&self, x: &Tensor) -> Result<Tensor> {
        match &self.scaler {
            Some(s) => s.inverse_y(&self.predict(&s.transform_x(x)?)?),
            None => self.predict(x),
        }
    }

    /// Embeddings of raw (unstandardized) features.
    pub fn embed_raw(&self, x: &Tensor) -> Result<Tensor> {
        match &self.scaler {
            Some(s) => self.embed(&s.transform_x(x)?),
            None => self.embed(x),
        }
    }
}

/// A model whose parameters are recorded on a tape.
pub struct Bound<'m, 't> {
    model: &'m SplitModel,
    tape: &'t Tape,
    vars: Vec<Var<'t>>,
}

impl<'m, 't> Bound<'m, 't> {
    pub fn model(&self) -> &'m SplitModel {
        self.model
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn vars(&self) -> &[Var<'t>] {
        &self.vars
    }

    fn check_width(&self, op: &'static str, x: Var<'t>, want: usize) -> Result<()> {
        let shape = x.shape();
        if shape.len() != 2 || shape[1] != want {
            return Err(Error::shape(op, format!("expected [batch, {want}] input, got {shape:?}")));
        }
        Ok(())
    }

    /// The embedding network `h`.
    pub fn embed(&self, x: Var<'t>) -> Result<Var<'t>> {
        self.check_width("embed", x, self.model.d_x)?;
        match &self.model.spec.embed {
            EmbedSpec::Mlp { widths, activation } => {
                let mut h = x;
                for l in 0..widths.len() {
                    let (w, b) = (self.vars[2 * l], self.vars[2 * l + 1]);
                    h = activation.apply(h.matmul(w)?.add(b)?);
                }
                Ok(h)
            }
            EmbedSpec::Lstm { input_size, hidden } => {
                lstm::forward(x, &self.vars[..3], *input_size, *hidden)
            }
        }
    }

    /// The prediction head `g`.
    pub fn head(&self, z: Var<'t>) -> Result<Var<'t>> {
        self.check_width("head", z, self.model.d_z)?;
        let head = &self.model.spec.head;
        let first = self.vars.len() - 2 * (head.hidden.len() + 1);
        let mut h = z;
        for l in 0..head.hidden.len() {
            let (w, b) = (self.vars[first + 2 * l], self.vars[first + 2 * l + 1]);
            h = head.activation.apply(h.matmul(w)?.add(b)?);
        }
        let (w, b) = (self.vars[self.vars.len() - 2], self.vars[self.vars.len() - 1]);
        h.matmul(w)?.add(b)
    }

    /// Returns `(z, y_hat)` with `z = h(x)` and `y_hat = g(z)`.
    pub fn forward(&self, x: Var<'t>) -> Result<(Var<'t>, Var<'t>)> {
        let z = self.embed(x)?;
        let y = self.head(z)?;
        Ok((z, y))
    }

    /// Gradients aligned with [`SplitModel::params`].
    pub fn grads(&self, grads: &Gradients) -> Vec<Tensor> {
        self.vars
            .iter()
            .zip(&self.model.params)
            .map(|(v, p)| grads.get(*v).cloned().unwrap_or_else(|| Tensor::zeros(p.value.shape())))
            .collect()
    }
}
