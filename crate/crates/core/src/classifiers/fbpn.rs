//! Feed-forward network with one hidden layer, trained by backpropagation.
//!
//! Both layers use the logistic sigmoid. Targets are one-hot, the loss is
//! `sum_n sum_o (y_o - t_o)^2 / (2 N)`, and training is full-batch gradient
//! descent with early stopping on a held-out validation split.
//!
//! Inputs pass through a fixed per-feature affine map to `[-1, 1]` fitted
//! on the training split; it is part of the model but not a trained
//! parameter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Classifier, FeatureMatrix};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq)]
pub struct FbpnConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Share of the training data held out for early stopping, in `[0, 0.5]`.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for FbpnConfig {
    fn default() -> Self {
        Self {
            hidden: 30,
            learning_rate: 2.0,
            max_epochs: 300,
            validation_fraction: 0.2,
            patience: 30,
            seed: 1,
        }
    }
}

impl FbpnConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::BadConfig("hidden layer needs at least one neuron".into()));
        }
        if !(0.0..=0.5).contains(&self.validation_fraction) {
            return Err(Error::BadConfig(format!(
                "validation fraction {} outside [0, 0.5]",
                self.validation_fraction
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::BadConfig(format!("learning rate {} must be positive", self.learning_rate)));
        }
        Ok(())
    }
}

/// `x' = (x - center) * factor`, mapping each training feature's range
/// onto `[-1, 1]`. Constant features map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaling {
    pub center: Vec<f64>,
    pub factor: Vec<f64>,
}

impl InputScaling {
    pub fn identity(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            factor: vec![1.0; dim],
        }
    }

    fn fit(rows: &[f64], dim: usize) -> Self {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for row in rows.chunks_exact(dim) {
            for ((l, h), &x) in lo.iter_mut().zip(hi.iter_mut()).zip(row) {
                *l = l.min(x);
                *h = h.max(x);
            }
        }
        let center = lo.iter().zip(&hi).map(|(l, h)| (l + h) / 2.0).collect();
        let factor = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h > l { 2.0 / (h - l) } else { 0.0 })
            .collect();
        Self { center, factor }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (((o, &v), &c), &f) in out.iter_mut().zip(x).zip(&self.center).zip(&self.factor) {
            *o = (v - c) * f;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingHistory {
    /// Training loss at the start of each epoch.
    pub train_loss: Vec<f64>,
    /// Validation loss at the start of each epoch (empty without a split).
    pub validation_loss: Vec<f64>,
    /// Epoch whose weights were kept.
    pub best_epoch: usize,
    pub train_samples: usize,
    pub validation_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbpnModel {
    pub(crate) input_dim: usize,
    pub(crate) hidden: usize,
    pub(crate) outputs: usize,
    /// `hidden x input_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `outputs x hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub scaling: InputScaling,
    pub history: TrainingHistory,
}

/// Gradient with the same layout as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FbpnGradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl FbpnGradient {
    /// Concatenation `w1, b1, w2, b2`, matching [`FbpnModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl FbpnModel {
    /// Network with weights and biases drawn uniformly from `[-0.5, 0.5]`
    /// and identity input scaling.
    pub fn random(input_dim: usize, hidden: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect() };
        let w1 = draw(hidden * input_dim);
        let b1 = draw(hidden);
        let w2 = draw(outputs * hidden);
        let b2 = draw(outputs);
        Self {
            input_dim,
            hidden,
            outputs,
            w1,
            b1,
            w2,
            b2,
            scaling: InputScaling::identity(input_dim),
            history: TrainingHistory::default(),
        }
    }

    /// Network from explicit parameters.
    pub fn from_parameters(
        input_dim: usize,
        hidden: usize,
        outputs: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
        scaling: InputScaling,
    ) -> Result<Self> {
        let shapes = [
            (w1.len(), hidden * input_dim),
            (b1.len(), hidden),
            (w2.len(), outputs * hidden),
            (b2.len(), outputs),
            (scaling.center.len(), input_dim),
            (scaling.factor.len(), input_dim),
        ];
        if let Some(&(found, expected)) = shapes.iter().find(|(f, e)| f != e) {
            return Err(Error::DimensionMismatch { expected, found });
        }
        if input_dim == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::BadConfig("layers must be nonempty".into()));
        }
        Ok(Self {
            input_dim,
            hidden,
            outputs,
            w1,
            b1,
            w2,
            b2,
            scaling,
            history: TrainingHistory::default(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// All trainable parameters: `w1, b1, w2, b2`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_parameters(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len());
        let (w1, rest) = flat.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2.copy_from_slice(b2);
    }

    /// Forward pass on an already scaled input.
    fn forward(&self, x: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        for (h, (w, b)) in hidden.iter_mut().zip(self.w1.chunks_exact(self.input_dim).zip(&self.b1)) {
            *h = sigmoid(b + dot(w, x));
        }
        for (o, (w, b)) in out.iter_mut().zip(self.w2.chunks_exact(self.hidden).zip(&self.b2)) {
            *o = sigmoid(b + dot(w, hidden));
        }
    }

    /// Output activations for a raw (unscaled) input.
    pub fn activations(&self, query: &[f64]) -> Result<Vec<f64>> {
        if query.len() != self.input_dim {
            return Err(Error::LengthMismatch {
                left: self.input_dim,
                right: query.len(),
            });
        }
        let mut x = vec![0.0; self.input_dim];
        self.scaling.apply(query, &mut x);
        let mut h = vec![0.0; self.hidden];
        let mut o = vec![0.0; self.outputs];
        self.forward(&x, &mut h, &mut o);
        Ok(o)
    }

    /// Loss and gradient over scaled inputs `xs` (row-major) with labels.
    fn loss_and_gradient(&self, xs: &[f64], labels: &[usize], grad: Option<&mut FbpnGradient>) -> f64 {
        let n = labels.len();
        let mut h = vec![0.0; self.hidden];
        let mut o = vec![0.0; self.outputs];
        let mut delta_o = vec![0.0; self.outputs];
        let mut delta_h = vec![0.0; self.hidden];
        let mut loss = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            for v in [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2] {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        let inv_n = 1.0 / n as f64;
        for (x, &label) in xs.chunks_exact(self.input_dim).zip(labels) {
            self.forward(x, &mut h, &mut o);
            for (k, (&y, d)) in o.iter().zip(delta_o.iter_mut()).enumerate() {
                let t = if k == label { 1.0 } else { 0.0 };
                let e = y - t;
                loss += e * e;
                *d = e * y * (1.0 - y) * inv_n;
            }
            let Some(g) = grad.as_deref_mut() else { continue };
            delta_h.iter_mut().for_each(|d| *d = 0.0);
            for (k, &dk) in delta_o.iter().enumerate() {
                if dk == 0.0 {
                    continue;
                }
                let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
                let grow = &mut g.w2[k * self.hidden..(k + 1) * self.hidden];
                for j in 0..self.hidden {
                    grow[j] += dk * h[j];
                    delta_h[j] += dk * row[j];
                }
                g.b2[k] += dk;
            }
            for (j, dh) in delta_h.iter_mut().enumerate() {
                *dh *= h[j] * (1.0 - h[j]);
                if *dh == 0.0 {
                    continue;
                }
                g.b1[j] += *dh;
                let grow = &mut g.w1[j * self.input_dim..(j + 1) * self.input_dim];
                for (gw, &xi) in grow.iter_mut().zip(x) {
                    *gw += *dh * xi;
                }
            }
        }
        loss * inv_n / 2.0
    }

    fn zero_gradient(&self) -> FbpnGradient {
        FbpnGradient {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
        }
    }

    fn descend(&mut self, g: &FbpnGradient, rate: f64) {
        for (p, d) in [
            (&mut self.w1, &g.w1),
            (&mut self.b1, &g.b1),
            (&mut self.w2, &g.w2),
            (&mut self.b2, &g.b2),
        ] {
            for (w, dw) in p.iter_mut().zip(d) {
                *w -= rate * dw;
            }
        }
    }

    fn scale_batch(&self, batch: &[(Vec<f64>, usize)]) -> Result<(Vec<f64>, Vec<usize>)> {
        let mut xs = vec![0.0; batch.len() * self.input_dim];
        let mut labels = Vec::with_capacity(batch.len());
        for ((x, label), dst) in batch.iter().zip(xs.chunks_exact_mut(self.input_dim)) {
            if x.len() != self.input_dim {
                return Err(Error::LengthMismatch {
                    left: self.input_dim,
                    right: x.len(),
                });
            }
            if *label >= self.outputs {
                return Err(Error::BadLabel {
                    label: *label,
                    class_count: self.outputs,
                });
            }
            self.scaling.apply(x, dst);
            labels.push(*label);
        }
        Ok((xs, labels))
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean-squared-error loss on raw inputs.
pub fn fbpn_loss(model: &FbpnModel, batch: &[(Vec<f64>, usize)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let (xs, labels) = model.scale_batch(batch)?;
    Ok(model.loss_and_gradient(&xs, &labels, None))
}

/// Backpropagated gradient of [`fbpn_loss`] with respect to every weight
/// and bias.
pub fn fbpn_gradient(model: &FbpnModel, batch: &[(Vec<f64>, usize)]) -> Result<FbpnGradient> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let (xs, labels) = model.scale_batch(batch)?;
    let mut g = model.zero_gradient();
    model.loss_and_gradient(&xs, &labels, Some(&mut g));
    Ok(g)
}

/// Trains a network on `data` (binary features are expanded to 0/1).
///
/// A seeded shuffle holds out `round(n * validation_fraction)` samples;
/// training stops once validation loss has not improved for `patience`
/// epochs and the best weights seen are restored. Without a validation
/// split all epochs run and the final weights are kept.
pub fn fbpn_train(data: &FeatureMatrix, config: &FbpnConfig) -> Result<FbpnModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let n = data.len();
    let dim = data.dim();
    if dim == 0 {
        return Err(Error::BadConfig("feature vectors are empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = FbpnModel::random(dim, config.hidden, data.class_count(), &mut rng);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((n as f64 * config.validation_fraction).round() as usize).min(n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);

    let gather = |idx: &[usize]| -> (Vec<f64>, Vec<usize>) {
        let mut xs = Vec::with_capacity(idx.len() * dim);
        let mut ls = Vec::with_capacity(idx.len());
        for &i in idx {
            xs.extend(data.row_real(i));
            ls.push(data.labels()[i]);
        }
        (xs, ls)
    };
    let (mut train_x, train_y) = gather(train_idx);
    let (mut val_x, val_y) = gather(val_idx);

    model.scaling = InputScaling::fit(&train_x, dim);
    let scale_in_place = |xs: &mut Vec<f64>| {
        let raw = std::mem::take(xs);
        let mut out = vec![0.0; raw.len()];
        for (src, dst) in raw.chunks_exact(dim).zip(out.chunks_exact_mut(dim)) {
            model.scaling.apply(src, dst);
        }
        *xs = out;
    };
    scale_in_place(&mut train_x);
    scale_in_place(&mut val_x);

    let mut history = TrainingHistory {
        train_samples: train_y.len(),
        validation_samples: val_y.len(),
        ..Default::default()
    };
    let mut grad = model.zero_gradient();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut stale = 0;

    let mut epoch = 0;
    while epoch < config.max_epochs {
        let loss = model.loss_and_gradient(&train_x, &train_y, Some(&mut grad));
        history.train_loss.push(loss);
        if n_val > 0 {
            let val = model.loss_and_gradient(&val_x, &val_y, None);
            history.validation_loss.push(val);
            if best.as_ref().is_none_or(|b| val < b.0) {
                best = Some((val, model.parameters(), epoch));
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.patience {
                    break;
                }
            }
        }
        model.descend(&grad, config.learning_rate);
        epoch += 1;
    }

    history.best_epoch = epoch;
    if n_val > 0 && epoch == config.max_epochs && config.max_epochs > 0 {
        // weights after the last update have not been validated yet
        let val = model.loss_and_gradient(&val_x, &val_y, None);
        if best.as_ref().is_none_or(|b| val < b.0) {
            best = Some((val, model.parameters(), epoch));
        }
    }
    if let Some((_, params, at)) = best {
        model.set_parameters(&params);
        history.best_epoch = at;
    }
    model.history = history;
    Ok(model)
}

/// Index of the largest output activation; ties go to the smaller class id.
pub fn fbpn_predict(model: &FbpnModel, query: &FeatureVector) -> Result<usize> {
    let x = super::real_query(query);
    let out = model.activations(&x)?;
    let mut best = 0;
    for (k, &v) in out.iter().enumerate().skip(1) {
        if v > out[best] {
            best = k;
        }
    }
    Ok(best)
}

impl Classifier for FbpnModel {
    fn class_count(&self) -> usize {
        self.outputs
    }

    fn classify(&self, query: &FeatureVector) -> Result<usize> {
        fbpn_predict(self, query)
    }
}
