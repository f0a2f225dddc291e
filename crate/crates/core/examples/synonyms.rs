//! Checks the planted-synonym separation used by the acceptance suite.

use mashaer::embedding::{self, Architecture, MemoryCorpus, TrainingConfig};
use mashaer::synth;
use rand::{Rng, SeedableRng};

fn main() {
    let (sentences, pairs) = synth::planted_synonym_corpus(3);
    let corpus = MemoryCorpus::new(sentences);
    let cfg = TrainingConfig {
        architecture: Architecture::Cbow,
        dim: 50,
        window: 2,
        negatives: 5,
        epochs: 15,
        min_count: 1,
        subsample_t: 0.0,
        seed: 11,
        ..Default::default()
    };
    let t = std::time::Instant::now();
    let trained = embedding::train::<f32>(&corpus, &cfg).unwrap();
    let model = trained.model;
    let planted: f64 = pairs
        .iter()
        .map(|(a, b)| model.cosine(a, b).unwrap())
        .sum::<f64>()
        / pairs.len() as f64;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let v = model.vocab().len();
    let mut random_sum = 0.0;
    let mut n = 0;
    while n < 100 {
        let i = rng.gen_range(0..v);
        let j = rng.gen_range(0..v);
        if i == j {
            continue;
        }
        random_sum +=
            model.cosine(model.vocab().word(i), model.vocab().word(j)).unwrap();
        n += 1;
    }
    let random = random_sum / 100.0;
    println!(
        "planted {planted:.4}, random {random:.4}, gap {:.4} (need >= 0.3), losses {:?}, {:.1?}",
        planted - random,
        trained.epoch_loss.iter().map(|l| (l * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
        t.elapsed()
    );
}
