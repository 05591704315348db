//! The full classifier: augmentation affine, reshaped to a 32x32x3 grid,
//! five 5x5 convolutions in four channel groups, max pooling, three fully
//! connected layers with dropout, and a softmax head.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, NUM_CLASSES};
use crate::layers::{self, AffineParams, ConvParams, DropoutSpec, Padding, PoolSpec, FILTER_SIZE};
use crate::rng::Prng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::text::{ByteSequence, SEQUENCE_LEN};

pub use crate::layers::Mode;

/// Side of the square grid the augmentation layer produces.
pub const GRID_SIDE: usize = 32;
pub const GRID_CHANNELS: usize = 3;
pub const AUGMENTATION_WIDTH: usize = GRID_SIDE * GRID_SIDE * GRID_CHANNELS;
/// Width of the flattened conv output feeding the first FC layer (6*6*256).
pub const FC_INPUT_WIDTH: usize = 9216;
pub const FC_HIDDEN: usize = 1024;

/// `s_output + n_layers * (s_filter - stride)`: the input side needed for
/// `n_layers` valid convolutions to end at `s_output`.
///
/// Panics if `stride > s_filter`.
pub fn compute_augmentation_size(
    s_output: usize,
    n_layers: usize,
    s_filter: usize,
    stride: usize,
) -> usize {
    assert!(stride <= s_filter, "stride larger than filter");
    s_output + n_layers * (s_filter - stride)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    A,
    B,
    C,
    D,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::A, Variant::B, Variant::C, Variant::D];

    /// Conv output channels, grouped by the pool that follows each group.
    pub fn conv_groups(self) -> [&'static [usize]; 4] {
        match self {
            Variant::A => [&[32, 32], &[64], &[128], &[256]],
            Variant::B => [&[32], &[64, 64], &[128], &[256]],
            Variant::C => [&[32], &[64], &[128, 128], &[256]],
            Variant::D => [&[32], &[64], &[128], &[256, 256]],
        }
    }

    /// Flat list of conv output channels.
    pub fn channel_plan(self) -> Vec<usize> {
        self.conv_groups().concat()
    }

    pub fn as_char(self) -> char {
        match self {
            Variant::A => 'A',
            Variant::B => 'B',
            Variant::C => 'C',
            Variant::D => 'D',
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            "C" | "c" => Ok(Variant::C),
            "D" | "d" => Ok(Variant::D),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

/// Weight initialization. Biases always start at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Every weight drawn from `N(mean, std^2)`.
    Gaussian { mean: f64, std: f64 },
    /// Zero-mean normal with `std = sqrt(2 / fan_in)` per layer.
    He,
}

impl Init {
    fn mean_std(self, fan_in: usize) -> (f64, f64) {
        match self {
            Init::Gaussian { mean, std } => (mean, std),
            Init::He => (0.0, num_traits::Float::sqrt(2.0 / fan_in as f64)),
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Gaussian { mean, std } => write!(f, "gaussian:{mean}:{std}"),
            Init::He => f.write_str("he"),
        }
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "he" {
            return Ok(Init::He);
        }
        let bad = || {
            Error::invalid(format!(
                "bad init {s:?} (expected he or gaussian:<mean>:<std>)"
            ))
        };
        let mut parts = s.split(':');
        if parts.next() != Some("gaussian") {
            return Err(bad());
        }
        let mean = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let std: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() || std.is_nan() || std < 0.0 {
            return Err(bad());
        }
        Ok(Init::Gaussian { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub variant: Variant,
    pub init: Init,
    pub dropout_keep_input: f64,
    pub dropout_keep_hidden: f64,
    /// Coefficient of the squared-weight penalty.
    pub l2_strength: f64,
}

impl NetworkConfig {
    pub fn new(variant: Variant) -> Self {
        NetworkConfig {
            variant,
            init: Init::Gaussian {
                mean: 0.0,
                std: 0.01,
            },
            dropout_keep_input: 1.0,
            dropout_keep_hidden: 0.3,
            l2_strength: 1.5e-4,
        }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::new(Variant::B)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<T> {
    Affine {
        name: String,
        params: AffineParams<T>,
    },
    Conv {
        name: String,
        params: ConvParams<T>,
    },
    Relu,
    MaxPool(PoolSpec),
    Dropout(DropoutSpec),
    /// Per-example target shape (the batch axis is kept).
    Reshape(Vec<usize>),
    Flatten,
}

impl<T> Layer<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Affine { .. } => "affine",
            Layer::Conv { .. } => "conv",
            Layer::Relu => "relu",
            Layer::MaxPool(_) => "maxpool",
            Layer::Dropout(_) => "dropout",
            Layer::Reshape(_) => "reshape",
            Layer::Flatten => "flatten",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, Layer::Affine { .. } | Layer::Conv { .. })
    }
}

/// Activations entering each layer (plus the output) and dropout masks.
type ForwardCache<T> = (Vec<Tensor<T>>, Vec<Option<Tensor<T>>>);

/// Output of [`Model::loss_and_grads`].
#[derive(Debug, Clone)]
pub struct LossAndGrads<T> {
    /// Cross-entropy plus the L2 penalty.
    pub loss: T,
    pub data_loss: T,
    pub logits: Tensor<T>,
    /// One tensor per parameter, in [`Model::params`] order.
    pub grads: Vec<Tensor<T>>,
}

/// An ordered layer stack with validated dimension flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    layers: Vec<Layer<T>>,
    input_width: usize,
    /// Per-example shape entering each layer, plus the final output.
    shapes: Vec<Vec<usize>>,
    l2_strength: f64,
    config: Option<NetworkConfig>,
}

fn fail<T>(index: usize, layer: &Layer<T>, reason: impl Into<String>) -> Error {
    Error::Construction {
        index,
        layer: layer.kind().to_string(),
        reason: reason.into(),
    }
}

fn infer_shapes<T: Scalar>(layers: &[Layer<T>], input_width: usize) -> Result<Vec<Vec<usize>>> {
    let mut shapes = vec![vec![input_width]];
    for (i, layer) in layers.iter().enumerate() {
        let cur = shapes.last().unwrap().clone();
        let next = match layer {
            Layer::Affine { params, .. } => {
                if cur != [params.in_dim()] {
                    return Err(fail(
                        i,
                        layer,
                        format!("expects [{}], got {cur:?}", params.in_dim()),
                    ));
                }
                vec![params.out_dim()]
            }
            Layer::Conv { params, .. } => match *cur.as_slice() {
                [h, w, c] if c == params.in_channels() && h >= 5 && w >= 5 => {
                    vec![h - 4, w - 4, params.out_channels()]
                }
                _ => {
                    return Err(fail(
                        i,
                        layer,
                        format!(
                            "cannot apply {:?} filters to {cur:?}",
                            params.filters.shape()
                        ),
                    ))
                }
            },
            Layer::MaxPool(spec) => match *cur.as_slice() {
                [h, w, c] => {
                    let (oh, ow) = spec
                        .output_hw(h, w)
                        .map_err(|e| fail(i, layer, e.to_string()))?;
                    vec![oh, ow, c]
                }
                _ => return Err(fail(i, layer, format!("needs [H,W,C], got {cur:?}"))),
            },
            Layer::Reshape(target) => {
                if target.iter().product::<usize>() != cur.iter().product::<usize>() {
                    return Err(fail(i, layer, format!("{cur:?} -> {target:?}")));
                }
                target.clone()
            }
            Layer::Flatten => vec![cur.iter().product()],
            Layer::Relu | Layer::Dropout(_) => cur,
        };
        shapes.push(next);
    }
    Ok(shapes)
}

impl<T: Scalar> Model<T> {
    /// Validates the dimension flow of an arbitrary stack.
    pub fn new(layers: Vec<Layer<T>>, input_width: usize, l2_strength: f64) -> Result<Self> {
        if l2_strength.is_nan() || l2_strength < 0.0 {
            return Err(Error::invalid("l2 strength must be >= 0"));
        }
        let shapes = infer_shapes(&layers, input_width)?;
        Ok(Model {
            layers,
            input_width,
            shapes,
            l2_strength,
            config: None,
        })
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn config(&self) -> Option<&NetworkConfig> {
        self.config.as_ref()
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.shapes.last().unwrap().iter().product()
    }

    /// Per-example shapes: the input, then the output of every layer.
    pub fn shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn l2_strength(&self) -> f64 {
        self.l2_strength
    }

    pub fn set_l2_strength(&mut self, l2: f64) {
        self.l2_strength = l2;
        if let Some(c) = self.config.as_mut() {
            c.l2_strength = l2;
        }
    }

    pub fn weighted_layer_count(&self) -> usize {
        self.layers.iter().filter(|l| l.is_weighted()).count()
    }

    /// Spatial side entering the first conv, then after each conv and pool.
    pub fn spatial_trace(&self) -> Vec<usize> {
        let mut trace = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            if matches!(layer, Layer::Conv { .. } | Layer::MaxPool(_)) {
                if trace.is_empty() {
                    trace.push(self.shapes[i][0]);
                }
                trace.push(self.shapes[i + 1][0]);
            }
        }
        trace
    }

    /// Names in [`Model::params`] order (`<layer>.weight`, `<layer>.bias`).
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Affine { name, .. } | Layer::Conv { name, .. } => {
                    names.push(format!("{name}.weight"));
                    names.push(format!("{name}.bias"));
                }
                _ => {}
            }
        }
        names
    }

    pub fn params(&self) -> Vec<&Tensor<T>> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Affine { params, .. } => {
                    out.push(&params.weight);
                    out.push(&params.bias);
                }
                Layer::Conv { params, .. } => {
                    out.push(&params.filters);
                    out.push(&params.bias);
                }
                _ => {}
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Affine { params, .. } => {
                    out.push(&mut params.weight);
                    out.push(&mut params.bias);
                }
                Layer::Conv { params, .. } => {
                    out.push(&mut params.filters);
                    out.push(&mut params.bias);
                }
                _ => {}
            }
        }
        out
    }

    /// Whether each parameter is subject to the L2 penalty (weights and
    /// filters are, biases are not).
    pub fn param_is_weight(&self) -> Vec<bool> {
        self.params()
            .iter()
            .enumerate()
            .map(|(i, _)| i % 2 == 0)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// `l2 * sum ||W||^2` over weights and filters.
    pub fn regularization(&self) -> T {
        let l2 = T::from_f64_lossy(self.l2_strength);
        let total: T = self
            .params()
            .into_iter()
            .zip(self.param_is_weight())
            .filter(|(_, w)| *w)
            .map(|(p, _)| p.sum_squares())
            .sum();
        l2 * total
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<usize> {
        match *x.shape() {
            [b, w] if w == self.input_width => Ok(b),
            _ => Err(Error::shape(
                "model input",
                x.shape(),
                &[0, self.input_width],
            )),
        }
    }

    /// Runs the stack, keeping every layer's input and any dropout masks.
    fn forward_cached(&self, x: &Tensor<T>, mode: Mode, rng: &mut Prng) -> Result<ForwardCache<T>> {
        let batch = self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut masks = Vec::with_capacity(self.layers.len());
        acts.push(x.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = acts.last().unwrap();
            let mut mask = None;
            let out = match layer {
                Layer::Affine { params, .. } => layers::affine_forward(input, params)?,
                Layer::Conv { params, .. } => layers::conv2d_forward(input, params)?,
                Layer::Relu => layers::relu(input),
                Layer::MaxPool(spec) => layers::maxpool_forward(input, spec)?,
                Layer::Dropout(spec) => {
                    let (y, m) = layers::dropout_forward(input, spec, mode, rng);
                    mask = Some(m);
                    y
                }
                Layer::Reshape(_) | Layer::Flatten => {
                    let mut shape = vec![batch];
                    shape.extend_from_slice(&self.shapes[i + 1]);
                    input.clone().reshape(&shape)?
                }
            };
            masks.push(mask);
            acts.push(out);
        }
        Ok((acts, masks))
    }

    /// Logits `[B, classes]`. Test mode never touches `rng`.
    pub fn forward(&self, x: &Tensor<T>, mode: Mode, rng: &mut Prng) -> Result<Tensor<T>> {
        let (mut acts, _) = self.forward_cached(x, mode, rng)?;
        Ok(acts.pop().unwrap())
    }

    /// Deterministic inference.
    pub fn forward_test(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.forward(x, Mode::Test, &mut Prng::new(0))
    }

    /// Softmax cross-entropy plus L2 penalty, and gradients for every
    /// parameter.
    pub fn loss_and_grads(
        &self,
        x: &Tensor<T>,
        labels: &[usize],
        mode: Mode,
        rng: &mut Prng,
    ) -> Result<LossAndGrads<T>> {
        let (acts, masks) = self.forward_cached(x, mode, rng)?;
        let logits = acts.last().unwrap();
        let head = layers::softmax_cross_entropy(logits, labels)?;

        let mut grads_rev: Vec<Tensor<T>> = Vec::new();
        let mut dy = head.dlogits;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[i];
            dy = match layer {
                Layer::Affine { params, .. } => {
                    let g = layers::affine_backward(&dy, input, params)?;
                    grads_rev.push(g.dbias);
                    grads_rev.push(g.dweight);
                    g.dx
                }
                Layer::Conv { params, .. } => {
                    let g = layers::conv2d_backward(&dy, input, params)?;
                    grads_rev.push(g.dbias);
                    grads_rev.push(g.dfilters);
                    g.dx
                }
                Layer::Relu => layers::relu_backward(&dy, input)?,
                Layer::MaxPool(spec) => layers::maxpool_backward(&dy, input, spec)?,
                Layer::Dropout(spec) => {
                    layers::dropout_backward(&dy, masks[i].as_ref().unwrap(), spec)?
                }
                Layer::Reshape(_) | Layer::Flatten => dy.reshape(input.shape())?,
            };
        }
        grads_rev.reverse();
        let mut grads = grads_rev;

        let l2 = T::from_f64_lossy(self.l2_strength);
        let two_l2 = l2 + l2;
        if self.l2_strength != 0.0 {
            for ((g, p), is_weight) in grads
                .iter_mut()
                .zip(self.params())
                .zip(self.param_is_weight())
            {
                if is_weight {
                    for (gv, &pv) in g.data_mut().iter_mut().zip(p.data()) {
                        *gv += two_l2 * pv;
                    }
                }
            }
        }
        let reg = self.regularization();
        Ok(LossAndGrads {
            loss: head.loss + reg,
            data_loss: head.loss,
            logits: logits.clone(),
            grads,
        })
    }

    /// Class and probabilities for one encoded dialogue.
    pub fn predict(&self, seq: &ByteSequence) -> Result<(EmotionLabel, [f64; NUM_CLASSES])> {
        let x = batch_input::<T>(core::slice::from_ref(seq));
        let logits = self.forward_test(&x)?;
        let probs = layers::softmax(&logits)?;
        let mut out = [0.0; NUM_CLASSES];
        for (o, p) in out.iter_mut().zip(probs.data()) {
            *o = p.to_f64_lossless();
        }
        Ok((EmotionLabel::from_index(argmax(&out))?, out))
    }

    /// Predicted class index per row, evaluated in test mode.
    pub fn classify_batch(&self, seqs: &[ByteSequence]) -> Result<Vec<usize>> {
        let logits = self.forward_test(&batch_input::<T>(seqs))?;
        let width = self.output_width();
        Ok(logits.data().chunks_exact(width).map(argmax).collect())
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `[B, 144]` network input with codes scaled into `[0, 1]`.
pub fn batch_input<T: Scalar>(seqs: &[ByteSequence]) -> Tensor<T> {
    let data = seqs.iter().flat_map(|s| s.scaled::<T>()).collect();
    Tensor::from_vec(&[seqs.len(), SEQUENCE_LEN], data).unwrap()
}

/// Builds one of the four configurations with Gaussian weights and zero
/// biases.
pub fn build_model<T: Scalar>(config: &NetworkConfig, rng: &mut Prng) -> Result<Model<T>> {
    let init = config.init;
    let hidden_drop = DropoutSpec::new(config.dropout_keep_hidden)?;
    let mut layers = vec![
        Layer::Dropout(DropoutSpec::new(config.dropout_keep_input)?),
        Layer::Affine {
            name: "augment".into(),
            params: {
                let (mean, std) = init.mean_std(SEQUENCE_LEN);
                AffineParams::init(SEQUENCE_LEN, AUGMENTATION_WIDTH, mean, std, rng)?
            },
        },
        Layer::Reshape(vec![GRID_SIDE, GRID_SIDE, GRID_CHANNELS]),
    ];
    let mut in_ch = GRID_CHANNELS;
    let mut conv_index = 0;
    let groups = config.variant.conv_groups();
    for (g, group) in groups.iter().enumerate() {
        for &out_ch in group.iter() {
            conv_index += 1;
            let (mean, std) = init.mean_std(FILTER_SIZE * FILTER_SIZE * in_ch);
            layers.push(Layer::Conv {
                name: format!("conv{conv_index}"),
                params: ConvParams::init(in_ch, out_ch, mean, std, rng)?,
            });
            layers.push(Layer::Relu);
            in_ch = out_ch;
        }
        let pool = if g + 1 < groups.len() {
            PoolSpec::new(5, 1, Padding::Same)?
        } else {
            PoolSpec::new(2, 2, Padding::None)?
        };
        layers.push(Layer::MaxPool(pool));
    }
    layers.push(Layer::Flatten);
    let fc_sizes = [FC_HIDDEN, FC_HIDDEN, NUM_CLASSES];
    let mut in_dim = FC_INPUT_WIDTH;
    for (j, &out_dim) in fc_sizes.iter().enumerate() {
        let (mean, std) = init.mean_std(in_dim);
        layers.push(Layer::Affine {
            name: format!("fc{}", j + 1),
            params: AffineParams::init(in_dim, out_dim, mean, std, rng)?,
        });
        if j + 1 < fc_sizes.len() {
            layers.push(Layer::Relu);
            layers.push(Layer::Dropout(hidden_drop));
        }
        in_dim = out_dim;
    }

    let mut model = Model::new(layers, SEQUENCE_LEN, config.l2_strength)?;
    let flatten_at = model
        .layers
        .iter()
        .position(|l| matches!(l, Layer::Flatten))
        .unwrap();
    let flat = model.shapes[flatten_at + 1][0];
    if flat != FC_INPUT_WIDTH {
        return Err(fail(
            flatten_at,
            &model.layers[flatten_at],
            format!("flattened width {flat}, first FC layer needs {FC_INPUT_WIDTH}"),
        ));
    }
    model.config = Some(config.clone());
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn augmentation_size() {
        assert_eq!(compute_augmentation_size(12, 5, 5, 1), 32);
        assert_eq!(compute_augmentation_size(12, 0, 5, 1), 12);
        assert_eq!(compute_augmentation_size(10, 3, 3, 1), 16);
    }

    #[test]
    fn variant_b_dimension_flow() {
        let m: Model<f32> =
            build_model(&NetworkConfig::new(Variant::B), &mut Prng::new(0)).unwrap();
        assert_eq!(m.spatial_trace(), [32, 28, 28, 24, 20, 20, 16, 16, 12, 6]);
        assert_eq!(m.weighted_layer_count(), 9);
        assert_eq!(m.output_width(), 5);
    }

    #[test]
    fn every_variant_builds() {
        for v in Variant::ALL {
            let m: Model<f32> = build_model(&NetworkConfig::new(v), &mut Prng::new(1)).unwrap();
            assert_eq!(m.weighted_layer_count(), 9, "variant {v}");
            assert_eq!(m.channel_count(), 5);
            let trace = m.spatial_trace();
            assert_eq!(trace.first(), Some(&32));
            assert_eq!(trace.last(), Some(&6));
        }
    }

    impl<T> Model<T> {
        fn channel_count(&self) -> usize {
            self.layers
                .iter()
                .filter(|l| matches!(l, Layer::Conv { .. }))
                .count()
        }
    }

    #[test]
    fn variant_b_parameter_count() {
        // Hand-summed: augmentation, five convs (5x5xCin x Cout + Cout), three FCs.
        let aug = 144 * 3072 + 3072;
        let convs = [(3, 32), (32, 64), (64, 64), (64, 128), (128, 256)]
            .iter()
            .map(|&(i, o)| 25 * i * o + o)
            .sum::<usize>();
        let fcs = 9216 * 1024 + 1024 + 1024 * 1024 + 1024 + 1024 * 5 + 5;
        let m: Model<f32> =
            build_model(&NetworkConfig::new(Variant::B), &mut Prng::new(0)).unwrap();
        assert_eq!(m.param_count(), aug + convs + fcs);
    }

    #[test]
    fn bad_stack_names_offending_layer() {
        let mut rng = Prng::new(0);
        let layers = vec![
            Layer::Affine {
                name: "a".into(),
                params: AffineParams::<f64>::init(4, 9, 0.0, 0.1, &mut rng).unwrap(),
            },
            Layer::Reshape(vec![3, 3, 1]),
            Layer::Conv {
                name: "c".into(),
                params: ConvParams::init(1, 2, 0.0, 0.1, &mut rng).unwrap(),
            },
        ];
        match Model::new(layers, 4, 0.0) {
            Err(Error::Construction { index, layer, .. }) => {
                assert_eq!(index, 2);
                assert_eq!(layer, "conv");
            }
            other => panic!("expected construction error, got {other:?}"),
        }
    }

    #[test]
    fn init_parses() {
        assert_eq!("he".parse::<Init>().unwrap(), Init::He);
        let g: Init = "gaussian:0:0.01".parse().unwrap();
        assert_eq!(
            g,
            Init::Gaussian {
                mean: 0.0,
                std: 0.01
            }
        );
        assert_eq!(g.to_string().parse::<Init>().unwrap(), g);
        assert!("gaussian:0:-1".parse::<Init>().is_err());
        assert!("uniform".parse::<Init>().is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.2, 0.2]), 0);
        assert_eq!(argmax(&[0.1, 0.3, 0.3]), 1);
    }

    #[test]
    fn zero_model_predicts_uniform() {
        let mut m: Model<f64> =
            build_model(&NetworkConfig::new(Variant::B), &mut Prng::new(0)).unwrap();
        for p in m.params_mut() {
            p.fill(0.0);
        }
        assert_eq!(m.regularization(), 0.0);
        let (label, probs) = m.predict(&ByteSequence::default()).unwrap();
        assert_eq!(label, EmotionLabel::Positive);
        assert!(probs.iter().all(|&p| (p - 0.2).abs() < 1e-12));
    }

    #[test]
    fn wrong_input_width() {
        let m: Model<f32> =
            build_model(&NetworkConfig::new(Variant::A), &mut Prng::new(0)).unwrap();
        assert!(m.forward_test(&Tensor::zeros(&[1, 143])).is_err());
    }

    fn small(rng: &mut Prng, l2: f64) -> Model<f64> {
        let layers = vec![
            Layer::Affine {
                name: "augment".into(),
                params: layers::AffineParams::init(144, 50, 0.0, 0.2, rng).unwrap(),
            },
            Layer::Reshape(vec![5, 5, 2]),
            Layer::Conv {
                name: "conv1".into(),
                params: layers::ConvParams::init(2, 4, 0.0, 0.2, rng).unwrap(),
            },
            Layer::Relu,
            Layer::Flatten,
            Layer::Affine {
                name: "fc1".into(),
                params: layers::AffineParams::init(4, 5, 0.0, 0.2, rng).unwrap(),
            },
        ];
        Model::new(layers, 144, l2).unwrap()
    }

    #[test]
    fn test_mode_forward_is_pure() {
        let m = small(&mut Prng::new(4), 0.0);
        let x = Tensor::gaussian(&[3, 144], 0.5, 0.2, &mut Prng::new(5)).unwrap();
        let a = m.forward(&x, Mode::Test, &mut Prng::new(1)).unwrap();
        let b = m.forward(&x, Mode::Test, &mut Prng::new(2)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn regularization_monotone_in_l2(seed in any::<u64>(), lo in 0.0f64..1.0, extra in 0.0f64..1.0) {
            let mut m = small(&mut Prng::new(seed), lo);
            let low = m.regularization();
            m.set_l2_strength(lo + extra);
            prop_assert!(m.regularization() >= low);
        }

        #[test]
        fn argmax_shift_invariant(v in proptest::collection::vec(-100.0f64..100.0, 5), c in -1e3f64..1e3) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let probs = layers::softmax(&Tensor::from_vec(&[1, 5], v.clone()).unwrap()).unwrap();
            prop_assert_eq!(argmax(&v), argmax(&shifted));
            prop_assert_eq!(argmax(&v), argmax(probs.data()));
        }
    }
}
