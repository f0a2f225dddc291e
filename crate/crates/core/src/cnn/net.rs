//! The convolutional sentence classifier: parallel 1-D convolutions over the
//! embedding and lexicon channels, masked max-over-time pooling, dropout and
//! a dense softmax head, trained with mini-batch Adam.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encode::EncodedSentence;
use super::{CnnConfig, CnnError};
use crate::classifiers::Label;
use crate::linalg::Mat;
use crate::scalar::{cast, Real};

/// Full-height filters of one width over one channel.
#[derive(Debug, Clone)]
pub(crate) struct ConvLayer<S> {
    pub(crate) width: usize,
    pub(crate) in_dim: usize,
    pub(crate) maps: usize,
    /// `maps × (width · in_dim)`.
    pub(crate) weights: Mat<S>,
    pub(crate) bias: Vec<S>,
}

impl<S: Real> ConvLayer<S> {
    fn init(width: usize, in_dim: usize, maps: usize, rng: &mut ChaCha8Rng) -> Self {
        let fan_in = (width * in_dim) as f64;
        let bound = (6.0 / (fan_in + maps as f64)).sqrt();
        let mut weights = Mat::zeros(maps, width * in_dim);
        for w in weights.as_mut_slice() {
            *w = cast(rng.gen_range(-bound..bound));
        }
        ConvLayer { width, in_dim, maps, weights, bias: vec![S::zero(); maps] }
    }

    fn zeros_like(&self) -> (Mat<S>, Vec<S>) {
        (Mat::zeros(self.maps, self.width * self.in_dim), vec![S::zero(); self.maps])
    }
}

/// Lexicon-integrated CNN parameters.
#[derive(Debug, Clone)]
pub struct CnnModel<S> {
    pub config: CnnConfig,
    pub(crate) n_lexicons: usize,
    pub(crate) embed_convs: Vec<ConvLayer<S>>,
    pub(crate) lex_convs: Vec<ConvLayer<S>>,
    /// `2 × pooled_len`.
    pub(crate) dense_w: Mat<S>,
    pub(crate) dense_b: Vec<S>,
    /// Fine-tuned embedding rows, keyed by token hash. `None` while frozen.
    pub(crate) tuned: Option<HashMap<u64, Vec<S>>>,
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

/// Renders metrics as the `epoch,train_loss,train_acc,test_acc` CSV.
pub fn metrics_csv(metrics: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,train_loss,train_acc,test_acc\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            m.epoch, m.train_loss, m.train_acc, m.test_acc
        ));
    }
    out
}

/// Per-example activations: pooled-slot argmax/pre-activation, the
/// post-dropout pooled vector and the class probabilities.
type ExampleActivations<S> = (Vec<Option<(usize, S)>>, Vec<S>, [S; 2]);

/// Cached activations of one forward pass, needed for backpropagation.
pub struct ForwardCache<S> {
    /// Per example, per pooled slot: argmax position and pre-activation.
    pub(crate) argmax: Vec<Vec<Option<(usize, S)>>>,
    /// Per example, post-dropout pooled vector.
    pub(crate) z_dropped: Vec<Vec<S>>,
    /// Per example, dropout scale per slot (1/keep or 0; all-ones in eval).
    pub(crate) drop_scale: Vec<Vec<S>>,
    pub(crate) probs: Vec<[S; 2]>,
}

impl<S: Real> ForwardCache<S> {
    pub fn probabilities(&self) -> &[[S; 2]] {
        &self.probs
    }
}

pub(crate) struct Gradients<S> {
    embed_convs: Vec<(Mat<S>, Vec<S>)>,
    lex_convs: Vec<(Mat<S>, Vec<S>)>,
    dense_w: Mat<S>,
    dense_b: Vec<S>,
    /// Per example, per valid position: gradient on the embedding row.
    pub(crate) embed_input: Option<Vec<Mat<S>>>,
}

struct AdamState<S> {
    t: u64,
    moments: Vec<(Vec<S>, Vec<S>)>,
}

impl<S: Real> AdamState<S> {
    fn new(shapes: &[usize]) -> Self {
        AdamState {
            t: 0,
            moments: shapes.iter().map(|&n| (vec![S::zero(); n], vec![S::zero(); n])).collect(),
        }
    }

    fn step(&mut self, lr: f64, params: Vec<&mut [S]>, grads: Vec<&[S]>) {
        self.t += 1;
        let b1 = cast::<S>(0.9);
        let b2 = cast::<S>(0.999);
        let eps = cast::<S>(1e-8);
        let one = S::one();
        let bc1 = one - cast::<S>(0.9f64.powi(self.t as i32));
        let bc2 = one - cast::<S>(0.999f64.powi(self.t as i32));
        let lr = cast::<S>(lr);
        for ((param, grad), (m, v)) in params.into_iter().zip(grads).zip(&mut self.moments) {
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = b1 * m[i] + (one - b1) * g;
                v[i] = b2 * v[i] + (one - b2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                param[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

impl<S: Real> CnnModel<S> {
    /// Allocates a model for inputs with `n_lexicons` lexicon columns.
    /// Weights are Glorot-uniform, biases zero.
    pub fn new(config: CnnConfig, n_lexicons: usize) -> Result<Self, CnnError> {
        config.validate()?;
        if n_lexicons == 0 {
            return Err(CnnError::InvalidConfig {
                reason: "at least one lexicon channel is required".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let embed_convs: Vec<ConvLayer<S>> = config
            .filter_widths
            .iter()
            .map(|&w| ConvLayer::init(w, config.embed_dim, config.embed_feature_maps, &mut rng))
            .collect();
        let lex_convs: Vec<ConvLayer<S>> = config
            .filter_widths
            .iter()
            .map(|&w| ConvLayer::init(w, n_lexicons, config.lex_feature_maps, &mut rng))
            .collect();
        let pooled = config.pooled_len();
        let mut dense_w = Mat::zeros(2, pooled);
        let bound = (6.0 / (pooled as f64 + 2.0)).sqrt();
        for w in dense_w.as_mut_slice() {
            *w = cast(rng.gen_range(-bound..bound));
        }
        let tuned = config.embeddings_trainable.then(HashMap::new);
        Ok(CnnModel {
            config,
            n_lexicons,
            embed_convs,
            lex_convs,
            dense_w,
            dense_b: vec![S::zero(); 2],
            tuned,
        })
    }

    pub fn n_lexicons(&self) -> usize {
        self.n_lexicons
    }

    fn check_dims(&self, enc: &EncodedSentence<S>) -> Result<(), CnnError> {
        if enc.embed_channel().cols() != self.config.embed_dim {
            return Err(CnnError::DimensionMismatch {
                what: "embedding channel",
                expected: self.config.embed_dim,
                found: enc.embed_channel().cols(),
            });
        }
        if enc.lex_channel().cols() != self.n_lexicons {
            return Err(CnnError::DimensionMismatch {
                what: "lexicon channel",
                expected: self.n_lexicons,
                found: enc.lex_channel().cols(),
            });
        }
        Ok(())
    }

    fn effective_embed_row<'a>(&'a self, enc: &'a EncodedSentence<S>, pos: usize) -> &'a [S] {
        if let Some(tuned) = &self.tuned {
            if let Some(row) = tuned.get(&enc.token_keys()[pos]) {
                return row;
            }
        }
        enc.embed_row(pos)
    }

    /// Pooled slot layout: embedding maps for every width, then lexicon maps
    /// for every width.
    fn slot_location(&self, slot: usize) -> (bool, usize, usize) {
        let me = self.config.embed_feature_maps;
        let embed_total = self.config.filter_widths.len() * me;
        if slot < embed_total {
            (true, slot / me, slot % me)
        } else {
            let ml = self.config.lex_feature_maps;
            let j = slot - embed_total;
            (false, j / ml, j % ml)
        }
    }

    fn conv_at<'a>(
        &self,
        layer: &ConvLayer<S>,
        map: usize,
        pos: usize,
        row_at: &impl Fn(usize) -> &'a [S],
    ) -> S
    where
        S: 'a,
    {
        let mut acc = layer.bias[map];
        let wrow = layer.weights.row(map);
        for j in 0..layer.width {
            let input = row_at(pos + j);
            let wslice = &wrow[j * layer.in_dim..(j + 1) * layer.in_dim];
            acc += wslice.iter().zip(input).fold(S::zero(), |a, (&w, &x)| a + w * x);
        }
        acc
    }

    fn forward_one(&self, enc: &EncodedSentence<S>, drop_scale: &[S]) -> ExampleActivations<S> {
        let n_valid = enc.n_valid();
        let pooled_len = self.config.pooled_len();
        let mut argmax: Vec<Option<(usize, S)>> = vec![None; pooled_len];
        let mut z = vec![S::zero(); pooled_len];

        for slot in 0..pooled_len {
            let (is_embed, w_idx, map) = self.slot_location(slot);
            let layer =
                if is_embed { &self.embed_convs[w_idx] } else { &self.lex_convs[w_idx] };
            if n_valid < layer.width {
                continue;
            }
            let mut best: Option<(usize, S)> = None;
            for pos in 0..=(n_valid - layer.width) {
                let pre = if is_embed {
                    self.conv_at(layer, map, pos, &|p| self.effective_embed_row(enc, p))
                } else {
                    self.conv_at(layer, map, pos, &|p| enc.lex_row(p))
                };
                match best {
                    Some((_, b)) if pre <= b => {}
                    _ => best = Some((pos, pre)),
                }
            }
            if let Some((pos, pre)) = best {
                argmax[slot] = Some((pos, pre));
                if pre > S::zero() {
                    z[slot] = pre;
                }
            }
        }

        let z_dropped: Vec<S> = z.iter().zip(drop_scale).map(|(&v, &s)| v * s).collect();
        let mut logits = [self.dense_b[0], self.dense_b[1]];
        for k in 0..2 {
            let row = self.dense_w.row(k);
            logits[k] += row.iter().zip(&z_dropped).fold(S::zero(), |a, (&w, &x)| a + w * x);
        }
        let m = logits[0].max(logits[1]);
        let e0 = (logits[0] - m).exp();
        let e1 = (logits[1] - m).exp();
        let zsum = e0 + e1;
        (argmax, z_dropped, [e0 / zsum, e1 / zsum])
    }

    /// Forward pass in evaluation mode (no dropout): class probabilities
    /// plus the cached activations.
    pub fn forward(
        &self,
        batch: &[&EncodedSentence<S>],
    ) -> Result<(Vec<[S; 2]>, ForwardCache<S>), CnnError> {
        self.forward_mode(batch, None)
    }

    fn forward_mode(
        &self,
        batch: &[&EncodedSentence<S>],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Vec<[S; 2]>, ForwardCache<S>), CnnError> {
        let pooled_len = self.config.pooled_len();
        let keep = self.config.dropout_keep;
        let mut rng = dropout_rng;
        let mut cache = ForwardCache {
            argmax: Vec::with_capacity(batch.len()),
            z_dropped: Vec::with_capacity(batch.len()),
            drop_scale: Vec::with_capacity(batch.len()),
            probs: Vec::with_capacity(batch.len()),
        };
        for enc in batch {
            self.check_dims(enc)?;
            let scale: Vec<S> = match (&mut rng, keep < 1.0) {
                (Some(r), true) => {
                    let inv = cast::<S>(1.0 / keep);
                    (0..pooled_len)
                        .map(|_| if r.gen::<f64>() < keep { inv } else { S::zero() })
                        .collect()
                }
                _ => vec![S::one(); pooled_len],
            };
            let (argmax, z_dropped, probs) = self.forward_one(enc, &scale);
            cache.argmax.push(argmax);
            cache.z_dropped.push(z_dropped);
            cache.drop_scale.push(scale);
            cache.probs.push(probs);
        }
        let probs = cache.probs.clone();
        Ok((probs, cache))
    }

    /// Class probabilities `[positive, negative]` for one sentence.
    pub fn predict_proba(&self, enc: &EncodedSentence<S>) -> Result<[S; 2], CnnError> {
        Ok(self.forward(&[enc])?.0[0])
    }

    /// Mean cross-entropy of the cached predictions against `labels`.
    fn mean_loss(cache: &ForwardCache<S>, labels: &[Label]) -> f64 {
        let mut sum = 0.0f64;
        for (p, &label) in cache.probs.iter().zip(labels) {
            let py = match label {
                Label::Positive => p[0],
                Label::Negative => p[1],
            };
            sum -= py.to_f64().unwrap_or(f64::NAN).max(1e-300).ln();
        }
        sum / labels.len() as f64
    }

    fn backward(
        &self,
        batch: &[&EncodedSentence<S>],
        labels: &[Label],
        cache: &ForwardCache<S>,
        want_input_grads: bool,
    ) -> Gradients<S> {
        let pooled_len = self.config.pooled_len();
        let inv_n = cast::<S>(1.0 / batch.len() as f64);
        let mut g = Gradients {
            embed_convs: self.embed_convs.iter().map(|l| l.zeros_like()).collect(),
            lex_convs: self.lex_convs.iter().map(|l| l.zeros_like()).collect(),
            dense_w: Mat::zeros(2, pooled_len),
            dense_b: vec![S::zero(); 2],
            embed_input: want_input_grads.then(|| {
                batch
                    .iter()
                    .map(|e| Mat::zeros(e.max_len(), self.config.embed_dim))
                    .collect()
            }),
        };

        for (ex, (enc, &label)) in batch.iter().zip(labels).enumerate() {
            let probs = cache.probs[ex];
            let target = match label {
                Label::Positive => 0usize,
                Label::Negative => 1usize,
            };
            let mut dlogit = [probs[0], probs[1]];
            dlogit[target] -= S::one();
            dlogit[0] *= inv_n;
            dlogit[1] *= inv_n;

            let z_dropped = &cache.z_dropped[ex];
            for k in 0..2 {
                g.dense_b[k] += dlogit[k];
                let grow = g.dense_w.row_mut(k);
                for (gi, &zi) in grow.iter_mut().zip(z_dropped) {
                    *gi += dlogit[k] * zi;
                }
            }

            for slot in 0..pooled_len {
                let Some((pos, pre)) = cache.argmax[ex][slot] else { continue };
                if pre <= S::zero() {
                    continue;
                }
                let dz = (self.dense_w.get(0, slot) * dlogit[0]
                    + self.dense_w.get(1, slot) * dlogit[1])
                    * cache.drop_scale[ex][slot];
                if dz == S::zero() {
                    continue;
                }
                let (is_embed, w_idx, map) = self.slot_location(slot);
                let (layer, grad) = if is_embed {
                    (&self.embed_convs[w_idx], &mut g.embed_convs[w_idx])
                } else {
                    (&self.lex_convs[w_idx], &mut g.lex_convs[w_idx])
                };
                grad.1[map] += dz;
                let wgrad_row = grad.0.row_mut(map);
                for j in 0..layer.width {
                    let input = if is_embed {
                        self.effective_embed_row(enc, pos + j)
                    } else {
                        enc.lex_row(pos + j)
                    };
                    let seg = &mut wgrad_row[j * layer.in_dim..(j + 1) * layer.in_dim];
                    for (gi, &xi) in seg.iter_mut().zip(input) {
                        *gi += dz * xi;
                    }
                }
                if is_embed {
                    if let Some(input_grads) = &mut g.embed_input {
                        let wrow = self.embed_convs[w_idx].weights.row(map);
                        let dim = self.config.embed_dim;
                        for j in 0..layer.width {
                            let seg = &wrow[j * dim..(j + 1) * dim];
                            let target_row = input_grads[ex].row_mut(pos + j);
                            for (ti, &wi) in target_row.iter_mut().zip(seg) {
                                *ti += dz * wi;
                            }
                        }
                    }
                }
            }
        }
        g
    }

    fn param_shapes(&self) -> Vec<usize> {
        let mut shapes = Vec::new();
        for l in self.embed_convs.iter().chain(&self.lex_convs) {
            shapes.push(l.weights.as_slice().len());
            shapes.push(l.bias.len());
        }
        shapes.push(self.dense_w.as_slice().len());
        shapes.push(self.dense_b.len());
        shapes
    }

    fn params_mut(&mut self) -> Vec<&mut [S]> {
        let mut out: Vec<&mut [S]> = Vec::new();
        for l in self.embed_convs.iter_mut().chain(self.lex_convs.iter_mut()) {
            out.push(l.weights.as_mut_slice());
            out.push(&mut l.bias);
        }
        out.push(self.dense_w.as_mut_slice());
        out.push(&mut self.dense_b);
        out
    }

    fn all_params_finite(&self) -> bool {
        self.embed_convs
            .iter()
            .chain(&self.lex_convs)
            .all(|l| l.weights.all_finite() && l.bias.iter().all(|b| b.is_finite()))
            && self.dense_w.all_finite()
            && self.dense_b.iter().all(|b| b.is_finite())
    }

    /// Accuracy of the model over labeled examples (evaluation mode).
    pub fn accuracy(&self, examples: &[(EncodedSentence<S>, Label)]) -> Result<f64, CnnError> {
        if examples.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0usize;
        for (enc, label) in examples {
            let p = self.predict_proba(enc)?;
            let predicted = if p[0] >= p[1] { Label::Positive } else { Label::Negative };
            if predicted == *label {
                hits += 1;
            }
        }
        Ok(hits as f64 / examples.len() as f64)
    }
}

fn grads_flat<S: Real>(g: &Gradients<S>) -> Vec<&[S]> {
    let mut out: Vec<&[S]> = Vec::new();
    for (w, b) in g.embed_convs.iter().chain(&g.lex_convs) {
        out.push(w.as_slice());
        out.push(b);
    }
    out.push(g.dense_w.as_slice());
    out.push(&g.dense_b);
    out
}

/// Trains in place over mini-batches with Adam (β₁ 0.9, β₂ 0.999, ε 1e-8).
/// Deterministic for a fixed seed. Per-epoch metrics report the running
/// training loss plus train/test accuracy in evaluation mode.
pub fn train<S: Real>(
    model: &mut CnnModel<S>,
    train_set: &[(EncodedSentence<S>, Label)],
    test_set: &[(EncodedSentence<S>, Label)],
) -> Result<Vec<EpochMetrics>, CnnError> {
    if train_set.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    let has_pos = train_set.iter().any(|(_, l)| *l == Label::Positive);
    let has_neg = train_set.iter().any(|(_, l)| *l == Label::Negative);
    if !has_pos || !has_neg {
        return Err(CnnError::SingleClass);
    }

    let cfg = model.config.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC0FFEE);
    let mut adam = AdamState::new(&model.param_shapes());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let batch: Vec<&EncodedSentence<S>> =
                chunk.iter().map(|&i| &train_set[i].0).collect();
            let labels: Vec<Label> = chunk.iter().map(|&i| train_set[i].1).collect();
            let (_, cache) = model.forward_mode(&batch, Some(&mut rng))?;
            let loss = CnnModel::mean_loss(&cache, &labels);
            if !loss.is_finite() {
                return Err(CnnError::NonFiniteLoss { epoch });
            }
            loss_sum += loss * labels.len() as f64;
            seen += labels.len();

            let grads =
                model.backward(&batch, &labels, &cache, model.config.embeddings_trainable);
            adam.step(cfg.learning_rate, model.params_mut(), grads_flat(&grads));

            if let Some(input_grads) = &grads.embed_input {
                apply_embedding_updates(model, &batch, input_grads, cfg.learning_rate);
            }
        }
        if !model.all_params_finite() {
            return Err(CnnError::NonFiniteLoss { epoch });
        }
        let train_acc = model.accuracy(train_set)?;
        let test_acc = model.accuracy(test_set)?;
        metrics.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / seen as f64,
            train_acc,
            test_acc,
        });
    }
    Ok(metrics)
}

/// Scatter-add of embedding-row gradients into the fine-tuned table,
/// keyed by token hash; rows are copied from the encoded batch on first
/// touch. Plain SGD is used for this table.
fn apply_embedding_updates<S: Real>(
    model: &mut CnnModel<S>,
    batch: &[&EncodedSentence<S>],
    input_grads: &[Mat<S>],
    lr: f64,
) {
    let lr = cast::<S>(lr);
    let dim = model.config.embed_dim;
    for (enc, grads) in batch.iter().zip(input_grads) {
        for pos in 0..enc.n_valid() {
            let grow = grads.row(pos);
            if grow.iter().all(|&v| v == S::zero()) {
                continue;
            }
            let key = enc.token_keys()[pos];
            let tuned = model.tuned.as_mut().expect("trainable embeddings");
            let entry = tuned.entry(key).or_insert_with(|| enc.embed_row(pos).to_vec());
            debug_assert_eq!(entry.len(), dim);
            for (w, &g) in entry.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
    }
}

/// Compares analytic gradients against central finite differences for every
/// parameter group (and the embedding rows when fine-tuning is enabled) and
/// returns the maximum relative error. Dropout must be disabled.
pub fn gradient_check<S: Real>(
    model: &mut CnnModel<S>,
    example: &(EncodedSentence<S>, Label),
    step: f64,
) -> Result<f64, CnnError> {
    if model.config.dropout_keep < 1.0 {
        return Err(CnnError::DropoutEnabled);
    }
    let (enc, label) = example;
    let labels = [*label];

    let (_, cache) = model.forward(&[enc])?;
    let analytic = model.backward(&[enc], &labels, &cache, true);

    let mut max_rel = 0.0f64;
    let mut check = |analytic_value: f64, loss_at: &mut dyn FnMut(f64) -> f64, base: f64| {
        let lp = loss_at(base + step);
        let lm = loss_at(base - step);
        loss_at(base); // restore
        let numeric = (lp - lm) / (2.0 * step);
        let denom = analytic_value.abs().max(numeric.abs());
        if denom < 1e-10 {
            return;
        }
        let rel = (analytic_value - numeric).abs() / denom.max(1e-8);
        if rel > max_rel {
            max_rel = rel;
        }
    };

    let shapes = model.param_shapes();
    let flat_analytic: Vec<Vec<f64>> = grads_flat(&analytic)
        .into_iter()
        .map(|g| g.iter().map(|v| v.to_f64().unwrap()).collect())
        .collect();

    for (tensor_idx, len) in shapes.iter().enumerate() {
        for i in 0..*len {
            let base = model.params_mut()[tensor_idx][i].to_f64().unwrap();
            let mut loss_at = |x: f64| -> f64 {
                model.params_mut()[tensor_idx][i] = cast(x);
                let (_, c) = model.forward(&[enc]).expect("forward in gradient check");
                CnnModel::mean_loss(&c, &labels)
            };
            check(flat_analytic[tensor_idx][i], &mut loss_at, base);
        }
    }

    // Embedding-row gradients (the fine-tuning path).
    if model.config.embeddings_trainable {
        let input_grads = analytic.embed_input.as_ref().expect("input grads requested");
        let mut enc_mut = enc.clone();
        for pos in 0..enc.n_valid() {
            for d in 0..model.config.embed_dim {
                let a = input_grads[0].get(pos, d).to_f64().unwrap();
                let base = enc.embed_channel().get(pos, d).to_f64().unwrap();
                let mut loss_at = |x: f64| -> f64 {
                    enc_mut.set_embed(pos, d, cast::<S>(x));
                    let (_, c) =
                        model.forward(&[&enc_mut]).expect("forward in gradient check");
                    CnnModel::mean_loss(&c, &labels)
                };
                check(a, &mut loss_at, base);
            }
        }
    }

    Ok(max_rel)
}
