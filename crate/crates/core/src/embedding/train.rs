//! Negative-sampling SGD for CBOW and Skip-gram.
//!
//! The step math lives in [`ns_step_loss`] / [`ns_step_gradients`] so the
//! training loop and the finite-difference checks share one implementation.

use std::cell::UnsafeCell;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Architecture, Corpus, EmbeddingError, EmbeddingModel, TrainingConfig, Vocabulary};
use crate::linalg::{axpy, dot, Mat};
use crate::scalar::{cast, sigmoid, Real};

/// Draws negative samples from the unigram distribution raised to 0.75,
/// by binary search over the cumulative mass (exact probabilities).
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut cumulative = Vec::with_capacity(vocab.len());
        let mut acc = 0.0f64;
        for i in 0..vocab.len() {
            acc += (vocab.count(i) as f64).powf(0.75);
            cumulative.push(acc);
        }
        NegativeSampler { cumulative }
    }

    /// Probability of drawing word `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        if total == 0.0 {
            return 0.0;
        }
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - prev) / total
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty sampler");
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }

    /// Samples a word different from `exclude` (up to a bounded number of
    /// retries, so a single-word vocabulary cannot loop forever).
    fn sample_excluding(&self, rng: &mut impl Rng, exclude: usize) -> Option<usize> {
        for _ in 0..16 {
            let s = self.sample(rng);
            if s != exclude {
                return Some(s);
            }
        }
        None
    }
}

/// Gradients of one negative-sampling step, keyed by parameter row.
/// Duplicate context words or repeated negative draws accumulate.
#[derive(Debug, Clone)]
pub struct StepGradients<S> {
    pub loss: f64,
    pub input_rows: Vec<(usize, Vec<S>)>,
    pub output_rows: Vec<(usize, Vec<S>)>,
}

/// `-ln σ(x)` computed stably in f64.
fn softplus_neg(x: f64) -> f64 {
    // -ln σ(x) = ln(1 + e^{-x})
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn hidden_vector<S: Real>(input: &Mat<S>, hidden_words: &[usize]) -> Vec<S> {
    let dim = input.cols();
    let mut h = vec![S::zero(); dim];
    for &w in hidden_words {
        axpy(S::one(), input.row(w), &mut h);
    }
    let inv = cast::<S>(1.0 / hidden_words.len() as f64);
    for v in &mut h {
        *v *= inv;
    }
    h
}

/// Loss of one step: hidden vector is the mean of the `hidden_words` input
/// rows (a single row for Skip-gram), scored against `target` and the
/// `negatives` output rows.
pub fn ns_step_loss<S: Real>(
    input: &Mat<S>,
    output: &Mat<S>,
    hidden_words: &[usize],
    target: usize,
    negatives: &[usize],
) -> f64 {
    let h = hidden_vector(input, hidden_words);
    let s_pos = dot(&h, output.row(target)).to_f64().unwrap();
    let mut loss = softplus_neg(s_pos);
    for &n in negatives {
        let s = dot(&h, output.row(n)).to_f64().unwrap();
        loss += softplus_neg(-s);
    }
    loss
}

/// Analytic gradients of [`ns_step_loss`] with respect to every involved
/// input and output row, evaluated at the current parameters.
pub fn ns_step_gradients<S: Real>(
    input: &Mat<S>,
    output: &Mat<S>,
    hidden_words: &[usize],
    target: usize,
    negatives: &[usize],
) -> StepGradients<S> {
    let dim = input.cols();
    let h = hidden_vector(input, hidden_words);

    let mut loss = 0.0f64;
    let mut grad_h = vec![S::zero(); dim];
    let mut output_rows: Vec<(usize, Vec<S>)> = Vec::with_capacity(1 + negatives.len());

    let accumulate_output = |row: usize, coeff: S, rows: &mut Vec<(usize, Vec<S>)>| {
        if let Some((_, g)) = rows.iter_mut().find(|(r, _)| *r == row) {
            axpy(coeff, &h, g);
        } else {
            let mut g = vec![S::zero(); dim];
            axpy(coeff, &h, &mut g);
            rows.push((row, g));
        }
    };

    let s_pos = dot(&h, output.row(target)).to_f64().unwrap();
    loss += softplus_neg(s_pos);
    let g_pos = sigmoid(cast::<S>(s_pos)) - S::one();
    accumulate_output(target, g_pos, &mut output_rows);
    axpy(g_pos, output.row(target), &mut grad_h);

    for &n in negatives {
        let s = dot(&h, output.row(n)).to_f64().unwrap();
        loss += softplus_neg(-s);
        let g = sigmoid(cast::<S>(s));
        accumulate_output(n, g, &mut output_rows);
        axpy(g, output.row(n), &mut grad_h);
    }

    // d h / d v_c = 1/|H| for each occurrence of c among the hidden words.
    let inv = cast::<S>(1.0 / hidden_words.len() as f64);
    let mut input_rows: Vec<(usize, Vec<S>)> = Vec::with_capacity(hidden_words.len());
    for &c in hidden_words {
        if let Some((_, g)) = input_rows.iter_mut().find(|(r, _)| *r == c) {
            axpy(inv, &grad_h, g);
        } else {
            let mut g = vec![S::zero(); dim];
            axpy(inv, &grad_h, &mut g);
            input_rows.push((c, g));
        }
    }

    StepGradients { loss, input_rows, output_rows }
}

/// A trained model plus the mean step loss of each epoch.
pub struct Trained<S> {
    pub model: EmbeddingModel<S>,
    pub epoch_loss: Vec<f64>,
}

struct RacyModel<S> {
    input: UnsafeCell<Mat<S>>,
    output: UnsafeCell<Mat<S>>,
}

// Hogwild contract: workers update disjoint-ish rows without locks and lost
// updates are tolerated. The UnsafeCell sharing is the standard lock-free
// SGD pattern; see Niu et al. 2011.
unsafe impl<S> Sync for RacyModel<S> {}

impl<S: Real> RacyModel<S> {
    #[allow(clippy::mut_from_ref)]
    unsafe fn input_mut(&self) -> &mut Mat<S> {
        &mut *self.input.get()
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn output_mut(&self) -> &mut Mat<S> {
        &mut *self.output.get()
    }
}

struct EpochContext<'a, S> {
    shared: &'a RacyModel<S>,
    vocab: &'a Vocabulary,
    sampler: &'a NegativeSampler,
    cfg: &'a TrainingConfig,
    words_done: &'a AtomicU64,
    total_words: u64,
}

/// Keep-probability of the word2vec frequent-word subsampler.
fn keep_probability(count: u64, total: u64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let f = count as f64 / total as f64;
    ((t / f).sqrt() + t / f).min(1.0)
}

fn run_worker<S: Real>(
    ctx: &EpochContext<'_, S>,
    corpus: &dyn Corpus,
    worker: usize,
    rng: &mut ChaCha8Rng,
) -> std::io::Result<(f64, u64)> {
    let cfg = ctx.cfg;
    let lr_span = cfg.lr_initial - cfg.lr_final;
    let mut loss_sum = 0.0f64;
    let mut steps = 0u64;
    let mut sentence_idx = 0usize;
    let mut ids: Vec<usize> = Vec::new();
    let mut negatives: Vec<usize> = Vec::new();

    corpus.for_each_sentence(&mut |sentence| {
        let mine = sentence_idx % cfg.workers == worker;
        sentence_idx += 1;
        if !mine {
            return;
        }
        ids.clear();
        let mut in_vocab = 0u64;
        for word in sentence {
            if let Some(i) = ctx.vocab.get(word) {
                in_vocab += 1;
                let keep = keep_probability(ctx.vocab.count(i), ctx.vocab.total_tokens(), cfg.subsample_t);
                if keep >= 1.0 || rng.gen::<f64>() < keep {
                    ids.push(i);
                }
            }
        }
        let done = ctx.words_done.fetch_add(in_vocab, Ordering::Relaxed) + in_vocab;
        let progress = done as f64 / ctx.total_words as f64;
        let alpha = (cfg.lr_initial - lr_span * progress).max(cfg.lr_final);
        let alpha_s = cast::<S>(-alpha);

        if ids.len() < 2 {
            return;
        }
        // Safety: Hogwild — concurrent row updates are tolerated by contract.
        let input = unsafe { ctx.shared.input_mut() };
        let output = unsafe { ctx.shared.output_mut() };

        for center_pos in 0..ids.len() {
            let center = ids[center_pos];
            let reduced = rng.gen_range(0..cfg.window);
            let radius = cfg.window - reduced;
            let lo = center_pos.saturating_sub(radius);
            let hi = (center_pos + radius).min(ids.len() - 1);
            match cfg.architecture {
                Architecture::Cbow => {
                    let context: Vec<usize> = (lo..=hi)
                        .filter(|&p| p != center_pos)
                        .map(|p| ids[p])
                        .collect();
                    if context.is_empty() {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..cfg.negatives {
                        if let Some(n) = ctx.sampler.sample_excluding(rng, center) {
                            negatives.push(n);
                        }
                    }
                    let grads = ns_step_gradients(input, output, &context, center, &negatives);
                    loss_sum += grads.loss;
                    steps += 1;
                    for (row, g) in &grads.input_rows {
                        axpy(alpha_s, g, input.row_mut(*row));
                    }
                    for (row, g) in &grads.output_rows {
                        axpy(alpha_s, g, output.row_mut(*row));
                    }
                }
                Architecture::SkipGram => {
                    for p in lo..=hi {
                        if p == center_pos {
                            continue;
                        }
                        let target = ids[p];
                        negatives.clear();
                        for _ in 0..cfg.negatives {
                            if let Some(n) = ctx.sampler.sample_excluding(rng, target) {
                                negatives.push(n);
                            }
                        }
                        let grads =
                            ns_step_gradients(input, output, &[center], target, &negatives);
                        loss_sum += grads.loss;
                        steps += 1;
                        for (row, g) in &grads.input_rows {
                            axpy(alpha_s, g, input.row_mut(*row));
                        }
                        for (row, g) in &grads.output_rows {
                            axpy(alpha_s, g, output.row_mut(*row));
                        }
                    }
                }
            }
        }
    })?;
    Ok((loss_sum, steps))
}

fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    let mix = seed
        ^ (epoch as u64).wrapping_mul(0x9E3779B97F4A7C15)
        ^ (worker as u64).wrapping_mul(0xD1B54A32D192ED03);
    ChaCha8Rng::seed_from_u64(mix)
}

/// Trains a model over `corpus`. Builds the vocabulary, then runs
/// `cfg.epochs` passes of negative-sampling SGD with a linearly decaying
/// learning rate. With `workers == 1` the result is bit-deterministic for a
/// fixed seed; with more workers, updates race benignly (Hogwild).
pub fn train<S: Real>(corpus: &dyn Corpus, cfg: &TrainingConfig) -> Result<Trained<S>, EmbeddingError> {
    cfg.validate()?;
    let vocab = build_vocab_checked(corpus, cfg)?;
    let sampler = NegativeSampler::new(&vocab);
    let total_words = (vocab.total_tokens() * cfg.epochs as u64).max(1);
    let model = EmbeddingModel::<S>::init(vocab, cfg.clone());
    let EmbeddingModel { vocab, input, output, config } = model;
    let shared = RacyModel { input: UnsafeCell::new(input), output: UnsafeCell::new(output) };
    let words_done = AtomicU64::new(0);

    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let ctx = EpochContext {
            shared: &shared,
            vocab: &vocab,
            sampler: &sampler,
            cfg,
            words_done: &words_done,
            total_words,
        };
        let (loss_sum, steps) = if cfg.workers == 1 {
            let mut rng = worker_rng(cfg.seed, epoch, 0);
            run_worker(&ctx, corpus, 0, &mut rng)?
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..cfg.workers)
                    .map(|w| {
                        let ctx = &ctx;
                        scope.spawn(move || {
                            let mut rng = worker_rng(ctx.cfg.seed, epoch, w);
                            run_worker(ctx, corpus, w, &mut rng)
                        })
                    })
                    .collect();
                let mut sum = 0.0;
                let mut n = 0u64;
                for h in handles {
                    let (s, k) = h.join().expect("worker panicked")?;
                    sum += s;
                    n += k;
                }
                Ok::<(f64, u64), std::io::Error>((sum, n))
            })?
        };
        epoch_loss.push(if steps > 0 { loss_sum / steps as f64 } else { 0.0 });

        let finite = unsafe { shared.input_mut().all_finite() && shared.output_mut().all_finite() };
        if !finite {
            return Err(EmbeddingError::NonFiniteParameter { epoch });
        }
    }

    let model = EmbeddingModel::from_parts(
        vocab,
        shared.input.into_inner(),
        shared.output.into_inner(),
        config,
    );
    Ok(Trained { model, epoch_loss })
}

fn build_vocab_checked(corpus: &dyn Corpus, cfg: &TrainingConfig) -> Result<Vocabulary, EmbeddingError> {
    super::vocab::build_vocabulary(corpus, cfg.min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::MemoryCorpus;

    fn tiny_corpus() -> MemoryCorpus {
        let mut sentences = Vec::new();
        for i in 0..120 {
            let a = format!("ك{}", i % 6);
            let b = format!("ك{}", (i + 1) % 6);
            let c = format!("ك{}", (i + 2) % 6);
            sentences.push(vec![a, b, c]);
        }
        MemoryCorpus::new(sentences)
    }

    fn small_cfg() -> TrainingConfig {
        TrainingConfig {
            dim: 8,
            window: 2,
            negatives: 3,
            epochs: 2,
            min_count: 1,
            subsample_t: 0.0,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn single_worker_is_bit_deterministic() {
        let corpus = tiny_corpus();
        let cfg = small_cfg();
        let a = train::<f32>(&corpus, &cfg).unwrap();
        let b = train::<f32>(&corpus, &cfg).unwrap();
        assert_eq!(a.model.input_vectors().as_slice(), b.model.input_vectors().as_slice());
        assert_eq!(a.model.output_vectors().as_slice(), b.model.output_vectors().as_slice());
        assert_eq!(a.epoch_loss, b.epoch_loss);
    }

    #[test]
    fn multi_worker_trains_without_panicking() {
        let corpus = tiny_corpus();
        let cfg = TrainingConfig { workers: 3, ..small_cfg() };
        let t = train::<f32>(&corpus, &cfg).unwrap();
        assert!(t.model.all_finite());
        assert_eq!(t.epoch_loss.len(), 2);
    }

    #[test]
    fn skip_gram_trains() {
        let corpus = tiny_corpus();
        let cfg = TrainingConfig { architecture: Architecture::SkipGram, ..small_cfg() };
        let t = train::<f64>(&corpus, &cfg).unwrap();
        assert!(t.model.all_finite());
        assert!(t.epoch_loss[1] <= t.epoch_loss[0]);
    }

    #[test]
    fn empty_vocab_is_reported() {
        let corpus = MemoryCorpus::new(vec![vec!["ا".into()]]);
        let cfg = TrainingConfig { min_count: 5, ..small_cfg() };
        assert!(matches!(train::<f32>(&corpus, &cfg), Err(EmbeddingError::EmptyVocabulary)));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let corpus = tiny_corpus();
        let cfg = TrainingConfig { lr_initial: 0.0001, lr_final: 0.01, ..small_cfg() };
        assert!(matches!(train::<f32>(&corpus, &cfg), Err(EmbeddingError::InvalidConfig { .. })));
    }

    #[test]
    fn step_gradients_match_finite_differences() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = 12;
        let dim = 7;
        let mut input = Mat::<f64>::zeros(v, dim);
        let mut output = Mat::<f64>::zeros(v, dim);
        for x in input.as_mut_slice() {
            *x = rng.gen_range(-0.8..0.8);
        }
        for x in output.as_mut_slice() {
            *x = rng.gen_range(-0.8..0.8);
        }

        let mut max_rel = 0.0f64;
        for _ in 0..100 {
            let target = rng.gen_range(0..v);
            let n_hidden = rng.gen_range(1..5);
            let hidden: Vec<usize> = (0..n_hidden).map(|_| rng.gen_range(0..v)).collect();
            let negatives: Vec<usize> = (0..4).map(|_| rng.gen_range(0..v)).collect();

            let grads = ns_step_gradients(&input, &output, &hidden, target, &negatives);
            let eps = 1e-6;
            let mut check = |mat_is_input: bool, row: usize, col: usize, analytic: f64| {
                let m = if mat_is_input { &mut input } else { &mut output };
                let orig = m.get(row, col);
                m.set(row, col, orig + eps);
                let lp = ns_step_loss(&input, &output, &hidden, target, &negatives);
                let m = if mat_is_input { &mut input } else { &mut output };
                m.set(row, col, orig - eps);
                let lm = ns_step_loss(&input, &output, &hidden, target, &negatives);
                let m = if mat_is_input { &mut input } else { &mut output };
                m.set(row, col, orig);
                let numeric = (lp - lm) / (2.0 * eps);
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                let rel = (analytic - numeric).abs() / denom;
                if rel > max_rel {
                    max_rel = rel;
                }
            };
            for (row, g) in &grads.input_rows {
                for (col, &a) in g.iter().enumerate() {
                    check(true, *row, col, a);
                }
            }
            for (row, g) in &grads.output_rows {
                for (col, &a) in g.iter().enumerate() {
                    check(false, *row, col, a);
                }
            }
        }
        assert!(max_rel < 1e-5, "max relative gradient error {max_rel}");
    }

    #[test]
    fn sampler_matches_pow075_distribution() {
        // Near-uniform counts keep the per-word 1% band comfortably above
        // sampling noise at 10^6 draws while still separating count^0.75
        // from the raw unigram distribution.
        let counts: Vec<u64> = (0..10).map(|i| 300 + 20 * i).collect();
        let entries: Vec<(String, u64)> =
            counts.iter().enumerate().map(|(i, &c)| (format!("w{i}"), c)).collect();
        let vocab = Vocabulary::from_entries(entries, 1).unwrap();
        let sampler = NegativeSampler::new(&vocab);

        let total: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000usize;
        let mut hist = vec![0u64; counts.len()];
        for _ in 0..n {
            hist[sampler.sample(&mut rng)] += 1;
        }
        let mut chi2 = 0.0f64;
        for i in 0..counts.len() {
            let expected = (counts[i] as f64).powf(0.75) / total;
            let observed = hist[i] as f64 / n as f64;
            let rel = (observed - expected).abs() / expected;
            assert!(rel < 0.01, "word {i}: observed {observed}, expected {expected}");
            let en = expected * n as f64;
            chi2 += (hist[i] as f64 - en).powi(2) / en;
            assert!((sampler.probability(i) - expected).abs() < 1e-12);
        }
        // chi-square with 9 degrees of freedom: 27.9 is the 0.1% tail.
        assert!(chi2 < 27.9, "chi2 {chi2}");
    }

    #[test]
    fn keep_probability_bounds() {
        assert_eq!(keep_probability(100, 1000, 0.0), 1.0);
        let p = keep_probability(500, 1000, 1e-3);
        assert!(p > 0.0 && p < 0.1);
        let q = keep_probability(1, 1_000_000, 1e-3);
        assert_eq!(q, 1.0);
    }
}
