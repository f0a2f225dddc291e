//! Command-line front end: corpus normalization, embedding training and
//! queries, lexicon expansion, model audits, the cross-validation grid and
//! the convolutional classifier.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mashaer::classifiers::Label;
use mashaer::cnn::{self, CnnConfig, EncodedSentence};
use mashaer::embedding::{
    self, Architecture, EmbeddingModel, TextFileCorpus, TrainingConfig, VectorFormat,
};
use mashaer::features::{parse_tagged_docs, FeatureMode};
use mashaer::lexicon::{
    audit_model, expand_auto_lexicon, load_annotations, Lexicon, LexiconKind, SeedSet,
};
use mashaer::normalizer::{
    corpus_stats, normalize, CorpusFormat, MarkupStripper, NormalizationConfig,
};
use mashaer::pipeline::{
    emit_report, load_dataset, parse_report, run_grid, train_test_split, ClassifierKind, Dataset,
    DatasetName, GridConfig, ReportFormat, ALL_FEATURES,
};
use mashaer::synth;

#[derive(Parser)]
#[command(name = "mashaer", about = "Arabic sentiment-analysis toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a raw (optionally XML) Arabic corpus into one sentence per line.
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Input container: plain|xml.
        #[arg(long, default_value = "plain")]
        format: CorpusFormat,
        /// Write a 4-field TSV (before, after, removed, fraction) here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Train word vectors with CBOW or Skip-gram negative sampling.
    W2vTrain {
        /// Normalized corpus, one sentence per line.
        #[arg(long)]
        corpus: PathBuf,
        /// cbow|sg.
        #[arg(long, default_value = "cbow")]
        arch: Architecture,
        #[arg(long, default_value_t = 200)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negative: usize,
        #[arg(long, default_value_t = 5)]
        min_count: u64,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        subsample: f64,
        #[arg(long, default_value_t = 0.025)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        lr_final: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output path; a `.bin` extension selects the binary format,
        /// anything else the text format.
        #[arg(long)]
        out: PathBuf,
    },
    /// Nearest neighbors of a word; prints TSV `rank word score`.
    W2vQuery {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10)]
        topn: usize,
    },
    /// Expand a ±1 lexicon from two seed words over a trained model.
    LexExpand {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "جيد")]
        pos_seed: String,
        #[arg(long, default_value = "سيئ")]
        neg_seed: String,
        #[arg(long, default_value_t = 10)]
        fanout1: usize,
        #[arg(long, default_value_t = 5)]
        fanout2: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a model's seed neighborhoods against human annotations.
    Audit {
        #[arg(long)]
        model: PathBuf,
        /// Seed file: TSV lines `pos<TAB>word`, `neg<TAB>word`, and
        /// optional `fanout1`/`fanout2` overrides.
        #[arg(long)]
        seeds: PathBuf,
        /// Annotations TSV: `word<TAB>positive|negative|neutral|variant-of-seed`.
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the lexicon-integrated CNN and record per-epoch metrics.
    CnnTrain {
        /// Labeled dataset TSV (`pos|neg<TAB>text`).
        #[arg(long)]
        dataset: PathBuf,
        /// Pretrained vectors (.vec or .bin). Mutually exclusive with
        /// --random-dim.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Use random per-word vectors of this dimensionality instead of a
        /// pretrained model.
        #[arg(long)]
        random_dim: Option<usize>,
        /// Comma-separated lexicon TSVs; each becomes one channel column.
        #[arg(long, value_delimiter = ',')]
        lexicons: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Train fraction of the stratified split.
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0.5)]
        dropout_keep: f64,
        /// Sentence length cap; 0 derives it from the dataset.
        #[arg(long, default_value_t = 0)]
        max_len: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5])]
        filter_widths: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        embed_maps: usize,
        #[arg(long, default_value_t = 9)]
        lex_maps: usize,
        /// Fine-tune embeddings during training.
        #[arg(long, default_value_t = false)]
        trainable_embeddings: bool,
        /// Per-epoch metrics CSV (epoch, train_loss, train_acc, test_acc).
        #[arg(long)]
        metrics: PathBuf,
    },
    /// Run the classifier × feature grid with stratified k-fold CV.
    ClassifyCv {
        #[arg(long)]
        dataset: PathBuf,
        /// Verify published row counts: main|sub.
        #[arg(long)]
        expected: Option<DatasetName>,
        /// Comma-separated feature modes, or `all`.
        #[arg(long, default_value = "all")]
        features: String,
        /// Comma-separated classifiers, or `all`.
        #[arg(long, default_value = "all")]
        clf: String,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Manual lexicon TSV for the `lex` column.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Auto-expanded lexicon TSV for the `autolex` column.
        #[arg(long)]
        auto_lexicon: Option<PathBuf>,
        /// POS-tagged documents (one `token/TAG ...` line per dataset row).
        #[arg(long)]
        tagged: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a grid report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Generate a synthetic dataset with the published class counts.
    SynthDataset {
        /// main|sub.
        #[arg(long)]
        kind: DatasetName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the generator's discriminative ±1 lexicon.
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Normalize { input, output, format, stats } => {
            cmd_normalize(&input, &output, format, stats.as_deref())
        }
        Command::W2vTrain {
            corpus,
            arch,
            dim,
            window,
            negative,
            min_count,
            epochs,
            subsample,
            lr,
            lr_final,
            seed,
            workers,
            out,
        } => {
            let cfg = TrainingConfig {
                architecture: arch,
                dim,
                window,
                negatives: negative,
                min_count,
                epochs,
                subsample_t: subsample,
                lr_initial: lr,
                lr_final,
                seed,
                workers,
            };
            cmd_w2v_train(&corpus, &cfg, &out)
        }
        Command::W2vQuery { model, word, topn } => cmd_w2v_query(&model, &word, topn),
        Command::LexExpand { model, pos_seed, neg_seed, fanout1, fanout2, out } => {
            let seeds = SeedSet {
                positive_seed: pos_seed,
                negative_seed: neg_seed,
                first_fanout: fanout1,
                second_fanout: fanout2,
            };
            cmd_lex_expand(&model, &seeds, &out)
        }
        Command::Audit { model, seeds, annotations, out } => {
            cmd_audit(&model, &seeds, &annotations, &out)
        }
        Command::CnnTrain {
            dataset,
            model,
            random_dim,
            lexicons,
            epochs,
            split,
            seed,
            batch_size,
            lr,
            dropout_keep,
            max_len,
            filter_widths,
            embed_maps,
            lex_maps,
            trainable_embeddings,
            metrics,
        } => {
            let cfg = CnnConfig {
                filter_widths,
                embed_feature_maps: embed_maps,
                lex_feature_maps: lex_maps,
                embed_dim: 0, // filled once the embedding source is known
                epochs,
                train_fraction: split,
                batch_size,
                learning_rate: lr,
                dropout_keep,
                seed,
                embeddings_trainable: trainable_embeddings,
            };
            cmd_cnn_train(&dataset, model.as_deref(), random_dim, &lexicons, cfg, max_len, &metrics)
        }
        Command::ClassifyCv {
            dataset,
            expected,
            features,
            clf,
            folds,
            seed,
            lexicon,
            auto_lexicon,
            tagged,
            out,
        } => cmd_classify_cv(
            &dataset,
            expected,
            &features,
            &clf,
            folds,
            seed,
            lexicon.as_deref(),
            auto_lexicon.as_deref(),
            tagged.as_deref(),
            &out,
        ),
        Command::Report { input, format } => {
            let tsv = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let report = parse_report(&tsv)?;
            print!("{}", emit_report(&report, format));
            Ok(())
        }
        Command::SynthDataset { kind, seed, out, lexicon_out } => {
            let rows = match kind {
                DatasetName::Main => synth::main_dataset(seed),
                DatasetName::Sub => synth::sub_dataset(seed),
                DatasetName::Custom => bail!("--kind must be main or sub"),
            };
            mashaer::pipeline::write_dataset_tsv(&out, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            if let Some(path) = lexicon_out {
                let lex = synth::sentiment_lexicon();
                lex.save(&path)?;
                eprintln!("wrote {}-entry lexicon to {}", lex.len(), path.display());
            }
            Ok(())
        }
    }
}

fn cmd_normalize(
    input: &Path,
    output: &Path,
    format: CorpusFormat,
    stats: Option<&Path>,
) -> Result<()> {
    let cfg = NormalizationConfig::default();
    let reader = BufReader::new(
        File::open(input).with_context(|| format!("opening {}", input.display()))?,
    );
    let mut writer = BufWriter::new(
        File::create(output).with_context(|| format!("creating {}", output.display()))?,
    );
    let mut before = 0u64;
    let mut after = 0u64;
    let mut emit = |line: &str, writer: &mut BufWriter<File>| -> Result<()> {
        before += line.split_whitespace().count() as u64;
        let normalized = normalize(line, &cfg);
        if !normalized.is_empty() {
            after += normalized.split_whitespace().count() as u64;
            writeln!(writer, "{normalized}")?;
        }
        Ok(())
    };

    match format {
        CorpusFormat::Plain => {
            for line in reader.lines() {
                emit(&line?, &mut writer)?;
            }
        }
        CorpusFormat::AbuElKhairXml => {
            // Stream: feed lines to the tag stripper, normalize each
            // completed article line.
            let mut stripper = MarkupStripper::new();
            let mut pending = String::new();
            for line in reader.lines() {
                let line = line?;
                stripper.feed(&line)?;
                stripper.feed("\n")?;
                pending.push_str(&stripper.take_text());
                while let Some(idx) = pending.find('\n') {
                    let head: String = pending.drain(..=idx).collect();
                    emit(head.trim_end(), &mut writer)?;
                }
            }
            pending.push_str(&stripper.finish()?);
            for line in pending.lines() {
                emit(line, &mut writer)?;
            }
        }
    }
    writer.flush()?;

    let stats_row = corpus_stats(before, after)?;
    eprintln!("{stats_row}");
    if let Some(path) = stats {
        std::fs::write(path, format!("{}\n", stats_row.tsv_row()))?;
    }
    Ok(())
}

fn cmd_w2v_train(corpus: &Path, cfg: &TrainingConfig, out: &Path) -> Result<()> {
    let source = TextFileCorpus::new(corpus);
    let t = std::time::Instant::now();
    let trained = embedding::train::<f32>(&source, cfg)?;
    eprintln!(
        "trained {} words x {} dims in {:.1?}; per-epoch loss: {}",
        trained.model.vocab().len(),
        cfg.dim,
        t.elapsed(),
        trained
            .epoch_loss
            .iter()
            .map(|l| format!("{l:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let format = match out.extension().and_then(|e| e.to_str()) {
        Some("bin") => VectorFormat::Binary,
        _ => VectorFormat::Text,
    };
    trained.model.save(out, format)?;
    eprintln!("saved model to {}", out.display());
    Ok(())
}

fn cmd_w2v_query(model: &Path, word: &str, topn: usize) -> Result<()> {
    let model = EmbeddingModel::<f32>::load(model)?;
    let hits = model.most_similar(word, topn)?;
    for (rank, hit) in hits.iter().enumerate() {
        println!("{}\t{}\t{:.6}", rank + 1, hit.word, hit.score);
    }
    Ok(())
}

fn cmd_lex_expand(model: &Path, seeds: &SeedSet, out: &Path) -> Result<()> {
    let model = EmbeddingModel::<f32>::load(model)?;
    let lexicon = expand_auto_lexicon(&model, seeds)?;
    lexicon.save(out)?;
    eprintln!(
        "expanded {} entries (bound {}) to {}",
        lexicon.len(),
        seeds.max_lexicon_size(),
        out.display()
    );
    Ok(())
}

fn parse_seeds_file(path: &Path) -> Result<SeedSet> {
    let mut seeds = SeedSet::default();
    for (i, raw) in std::fs::read_to_string(path)?.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let (key, value) = raw
            .split_once('\t')
            .with_context(|| format!("seeds line {}: expected 'key<TAB>value'", i + 1))?;
        match key.trim() {
            "pos" => seeds.positive_seed = value.trim().to_string(),
            "neg" => seeds.negative_seed = value.trim().to_string(),
            "fanout1" => seeds.first_fanout = value.trim().parse()?,
            "fanout2" => seeds.second_fanout = value.trim().parse()?,
            other => bail!("seeds line {}: unknown key '{other}'", i + 1),
        }
    }
    Ok(seeds)
}

fn cmd_audit(model: &Path, seeds: &Path, annotations: &Path, out: &Path) -> Result<()> {
    let model = EmbeddingModel::<f32>::load(model)?;
    let seeds = parse_seeds_file(seeds)?;
    let annotations = load_annotations(annotations)?;
    let report = audit_model(&model, &seeds, &annotations)?;
    std::fs::write(out, report.to_tsv())?;
    let flags: Vec<String> = report.flags.iter().map(|f| f.to_string()).collect();
    eprintln!(
        "verdict: {}; flags: [{}]",
        if report.verdict == mashaer::lexicon::Verdict::Accept { "accept" } else { "reject" },
        flags.join(", ")
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_cnn_train(
    dataset_path: &Path,
    model_path: Option<&Path>,
    random_dim: Option<usize>,
    lexicon_paths: &[PathBuf],
    mut cfg: CnnConfig,
    max_len_arg: usize,
    metrics_path: &Path,
) -> Result<()> {
    let dataset = load_dataset(dataset_path, None)?;
    let model: EmbeddingModel<f32> = match (model_path, random_dim) {
        (Some(path), None) => EmbeddingModel::load(path)?,
        (None, Some(dim)) => {
            let mut words: Vec<String> =
                dataset.tokens.iter().flatten().cloned().collect();
            words.sort();
            words.dedup();
            EmbeddingModel::with_random_vectors(words, dim, cfg.seed)?
        }
        _ => bail!("provide exactly one of --model or --random-dim"),
    };
    cfg.embed_dim = model.dim();

    let mut lexicons = Vec::new();
    for path in lexicon_paths {
        lexicons.push(
            Lexicon::load(path, LexiconKind::Weighted)
                .with_context(|| format!("loading lexicon {}", path.display()))?,
        );
    }
    if lexicons.is_empty() {
        bail!("at least one --lexicons file is required (the lexicon channel)");
    }

    let max_len = if max_len_arg > 0 {
        max_len_arg
    } else {
        dataset.tokens.iter().map(Vec::len).max().unwrap_or(1).clamp(1, 64)
    };

    let encoded: Vec<(EncodedSentence<f32>, Label)> = dataset
        .tokens
        .iter()
        .zip(&dataset.labels)
        .map(|(tokens, &label)| (cnn::encode(tokens, &model, &lexicons, max_len, cfg.seed), label))
        .collect();

    let (train_idx, test_idx) = train_test_split(&dataset.labels, cfg.train_fraction, cfg.seed)?;
    let train_set: Vec<_> = train_idx.iter().map(|&i| encoded[i].clone()).collect();
    let test_set: Vec<_> = test_idx.iter().map(|&i| encoded[i].clone()).collect();
    eprintln!(
        "training on {} examples, testing on {} (max_len {max_len}, dim {})",
        train_set.len(),
        test_set.len(),
        cfg.embed_dim
    );

    let mut net = cnn::CnnModel::new(cfg, lexicons.len())?;
    let t = std::time::Instant::now();
    let metrics = cnn::train(&mut net, &train_set, &test_set)?;
    std::fs::write(metrics_path, cnn::metrics_csv(&metrics))?;
    let last = metrics.last().expect("at least one epoch");
    let best = metrics.iter().map(|m| m.test_acc).fold(0.0, f64::max);
    eprintln!(
        "done in {:.1?}: final train_acc {:.4}, final test_acc {:.4}, best test_acc {:.4}",
        t.elapsed(),
        last.train_acc,
        last.test_acc,
        best
    );
    Ok(())
}

fn parse_classifiers(spec: &str) -> Result<Vec<ClassifierKind>> {
    if spec == "all" {
        return Ok(ClassifierKind::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<ClassifierKind>().map_err(anyhow::Error::msg))
        .collect()
}

fn parse_features(spec: &str) -> Result<Vec<FeatureMode>> {
    if spec == "all" {
        return Ok(ALL_FEATURES.to_vec());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<FeatureMode>().map_err(anyhow::Error::msg))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify_cv(
    dataset_path: &Path,
    expected: Option<DatasetName>,
    features: &str,
    clf: &str,
    folds: usize,
    seed: u64,
    lexicon: Option<&Path>,
    auto_lexicon: Option<&Path>,
    tagged: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let dataset: Dataset = load_dataset(dataset_path, expected)?;
    let (pos, neg) = dataset.class_counts();
    eprintln!(
        "loaded {} '{:?}' rows ({pos} pos / {neg} neg), majority baseline {:.3}",
        dataset.len(),
        expected.unwrap_or(DatasetName::Custom),
        dataset.majority_baseline()
    );

    let cfg = GridConfig {
        classifiers: parse_classifiers(clf)?,
        features: parse_features(features)?,
        folds,
        seed,
        lexicon: match lexicon {
            Some(p) => Some(Lexicon::load(p, LexiconKind::Weighted)?),
            None => None,
        },
        auto_lexicon: match auto_lexicon {
            Some(p) => Some(Lexicon::load(p, LexiconKind::Weighted)?),
            None => None,
        },
        tagged: match tagged {
            Some(p) => Some(parse_tagged_docs(&std::fs::read_to_string(p)?)?),
            None => None,
        },
        allowed_tags: Vec::new(),
    };
    let t = std::time::Instant::now();
    let report = run_grid(&dataset, &cfg)?;
    std::fs::write(out, emit_report(&report, ReportFormat::Tsv))?;
    eprint!("{}", emit_report(&report, ReportFormat::Markdown));
    eprintln!("grid finished in {:.1?}; TSV written to {}", t.elapsed(), out.display());
    Ok(())
}
