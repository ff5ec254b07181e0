use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use softdd_core::{
    convergence_report, importance_scores, learn_penalties, prune, ConstraintSet, DdConfig,
    PenaltyLearnerConfig, PerceptronConfig,
};

use crate::config::RunConfig;
use crate::constraint_io::{format_constraints, load_constraints};
use crate::corpus::{format_corpus, read_corpus};
use crate::model_io::{format_model, load_model};
use crate::pipeline::{self, InferenceMode};
use crate::report;
use crate::synth::{generate, GeneratorConfig, SchemaTemplate};
use crate::write_atomic;

#[derive(Debug, Parser)]
#[command(
    name = "softdd",
    version,
    about = "Sequence labeling with soft global constraints"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train/dev/test corpora.
    Gen(GenArgs),
    /// Train the base perceptron model.
    Train(TrainArgs),
    /// Instantiate all constraint templates, score them on dev and prune.
    Constraints(ConstraintArgs),
    /// Learn soft-constraint penalties on dev.
    Learn(LearnArgs),
    /// Label a corpus.
    Predict(PredictArgs),
    /// Segment F1 and, optionally, an early-stopping convergence table.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub dev_size: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    #[arg(long)]
    pub min_words: Option<usize>,
    #[arg(long)]
    pub max_words: Option<usize>,
    /// flat | hierarchical
    #[arg(long)]
    pub template: Option<SchemaTemplate>,
    #[arg(long)]
    pub confusion: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep constraints scoring at least this; `inf` keeps none.
    #[arg(long)]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Defaults to overwriting the input constraint file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub averaging: Option<bool>,
    #[arg(long)]
    pub inner_max_iters: Option<usize>,
    #[arg(long)]
    pub step0: Option<f64>,
    #[arg(long)]
    pub initial_penalty: Option<f64>,
    /// Shuffle dev order each epoch, seeded with `--seed`.
    #[arg(long)]
    pub shuffle: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Corpus to label; labels in it are ignored.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// unconstrained | hard-dd | soft-dd
    #[arg(long)]
    pub mode: Option<InferenceMode>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step0: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a per-iteration trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// With `--model` and `--constraints`, also run soft-DD on the gold
    /// corpus under each cap, e.g. `--caps 1,2,5,10`.
    #[arg(long, value_delimiter = ',')]
    pub caps: Option<Vec<usize>>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long)]
    pub step0: Option<f64>,
}

fn need(flag: Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    flag.or_else(|| cfg.clone())
        .with_context(|| format!("missing --{name} (flag or config)"))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    write_atomic(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Gen(a) => gen(a, &cfg),
        Command::Train(a) => train(a, &cfg),
        Command::Constraints(a) => constraints(a, &cfg),
        Command::Learn(a) => learn(a, &cfg),
        Command::Predict(a) => predict(a, &cfg),
        Command::Eval(a) => eval(a, &cfg),
    }
}

pub const DEFAULT_SPLITS: (usize, usize, usize) = (1000, 400, 600);

fn gen(a: GenArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let g = &cfg.gen;
    let out = need(a.out_dir, &cfg.paths.output_dir, "out-dir")?;
    let sizes = [
        (
            "train",
            a.train_size.or(g.train_size).unwrap_or(DEFAULT_SPLITS.0),
        ),
        ("dev", a.dev_size.or(g.dev_size).unwrap_or(DEFAULT_SPLITS.1)),
        (
            "test",
            a.test_size.or(g.test_size).unwrap_or(DEFAULT_SPLITS.2),
        ),
    ];
    let defaults = GeneratorConfig::default();
    let config = GeneratorConfig {
        seed: a.seed.or(cfg.seed).unwrap_or(defaults.seed),
        sequences: sizes.iter().map(|s| s.1).sum(),
        min_words: a.min_words.or(g.min_words).unwrap_or(defaults.min_words),
        max_words: a.max_words.or(g.max_words).unwrap_or(defaults.max_words),
        template: a.template.or(g.template).unwrap_or(defaults.template),
        confusion: a.confusion.or(g.confusion).unwrap_or(defaults.confusion),
    };
    let corpus = generate(&config).map_err(anyhow::Error::msg)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut rest = &corpus[..];
    for (name, n) in sizes {
        let (split, tail) = rest.split_at(n);
        rest = tail;
        write(&out.join(format!("{name}.txt")), &format_corpus(split))?;
        println!("{name}\t{n} sequences");
    }
    Ok(())
}

fn train(a: TrainArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let train_path = need(a.train, &cfg.paths.train, "train")?;
    let model_path = need(a.model, &cfg.paths.model, "model")?;
    let defaults = PerceptronConfig::default();
    let config = PerceptronConfig {
        epochs: a.epochs.or(cfg.train.epochs).unwrap_or(defaults.epochs),
        learning_rate: a
            .learning_rate
            .or(cfg.train.learning_rate)
            .unwrap_or(defaults.learning_rate),
    };
    let corpus = read_corpus(&train_path)?;
    let tagger = pipeline::train(&corpus, &config)
        .with_context(|| format!("training on {}", train_path.display()))?;
    write(&model_path, &format_model(&tagger))?;
    println!(
        "labels\t{}\nfeatures\t{}",
        tagger.schema().len(),
        tagger.features.len()
    );
    if let Some(dev_path) = a.dev.or_else(|| cfg.paths.dev.clone()) {
        let dev = read_corpus(&dev_path)?;
        let pred = pipeline::predict(
            &tagger,
            &ConstraintSet::empty(tagger.schema()),
            InferenceMode::Unconstrained,
            &DdConfig::default(),
            &dev,
        )?;
        let labels: Vec<Vec<String>> = pred.into_iter().map(|p| p.labels).collect();
        println!(
            "dev token accuracy\t{}",
            pipeline::token_accuracy(&dev, &labels)
        );
    }
    Ok(())
}

fn constraints(a: ConstraintArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let tagger = load_model(&need(a.model, &cfg.paths.model, "model")?)?;
    let dev_path = need(a.dev, &cfg.paths.dev, "dev")?;
    let out = need(a.out, &cfg.paths.constraints, "out")?;
    let cutoff = a.cutoff.or(cfg.constraints.cutoff).unwrap_or(2.75);
    if cutoff.is_nan() {
        bail!("cutoff must be a number");
    }
    let dev = pipeline::encode_labeled(&tagger, &read_corpus(&dev_path)?)
        .with_context(|| format!("encoding {}", dev_path.display()))?;
    let all = pipeline::full_union(tagger.schema());
    let scores = importance_scores(&all, &dev, &tagger.chain)?;
    let keep: Vec<usize> = if cutoff == f64::INFINITY {
        Vec::new()
    } else {
        (0..scores.len()).filter(|&i| scores[i] >= cutoff).collect()
    };
    let kept = prune(&all, &scores, cutoff)?;
    let kept_scores: Vec<f64> = keep.iter().map(|&i| scores[i]).collect();
    write(&out, &format_constraints(&kept, Some(&kept_scores)))?;
    println!("instantiated\t{}\nkept\t{}", all.len(), kept.len());
    Ok(())
}

fn learn(a: LearnArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let tagger = load_model(&need(a.model, &cfg.paths.model, "model")?)?;
    let dev_path = need(a.dev, &cfg.paths.dev, "dev")?;
    let input = need(a.constraints, &cfg.paths.constraints, "constraints")?;
    let out = a.out.unwrap_or_else(|| input.clone());
    let set = load_constraints(&input, tagger.schema())?;
    let dev = pipeline::encode_labeled(&tagger, &read_corpus(&dev_path)?)?;
    let l = &cfg.learner;
    let d = PenaltyLearnerConfig::default();
    let shuffle = a.shuffle.or(l.shuffle).unwrap_or(false);
    let config = PenaltyLearnerConfig {
        epochs: a.epochs.or(l.epochs).unwrap_or(d.epochs),
        learning_rate: a
            .learning_rate
            .or(l.learning_rate)
            .unwrap_or(d.learning_rate),
        averaging: a.averaging.or(l.averaging).unwrap_or(d.averaging),
        inner_max_iters: a
            .inner_max_iters
            .or(l.inner_max_iters)
            .unwrap_or(d.inner_max_iters),
        step0: a.step0.or(l.step0).unwrap_or(d.step0),
        initial_penalty: a
            .initial_penalty
            .or(l.initial_penalty)
            .unwrap_or(d.initial_penalty),
        shuffle_seed: shuffle.then(|| a.seed.or(cfg.seed).unwrap_or(0)),
    };
    let penalties = learn_penalties(&dev, &set, &tagger.chain, &config)?;
    let learned = set.with_soft_penalties(&penalties)?;
    write(&out, &format_constraints(&learned, None))?;
    let zero = penalties.iter().filter(|&&p| p == 0.0).count();
    println!(
        "constraints\t{}\nzero penalty\t{zero}\npositive penalty\t{}",
        penalties.len(),
        penalties.len() - zero
    );
    Ok(())
}

fn dd_config(max_iters: Option<usize>, step0: Option<f64>, cfg: &RunConfig) -> DdConfig {
    let d = DdConfig::default();
    DdConfig {
        max_iters: max_iters.or(cfg.inference.max_iters).unwrap_or(d.max_iters),
        step0: step0.or(cfg.inference.step0).unwrap_or(d.step0),
        ..d
    }
}

fn predict(a: PredictArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let tagger = load_model(&need(a.model, &cfg.paths.model, "model")?)?;
    let input = need(a.input, &cfg.paths.test, "input")?;
    let out = need(a.out, &cfg.paths.predictions, "out")?;
    let mode = a.mode.or(cfg.inference.mode).unwrap_or_default();
    let set = match (
        a.constraints.or_else(|| cfg.paths.constraints.clone()),
        mode,
    ) {
        (Some(p), _) => load_constraints(&p, tagger.schema())?,
        (None, InferenceMode::Unconstrained) => ConstraintSet::empty(tagger.schema()),
        (None, _) => bail!("missing --constraints (required for mode {mode:?})"),
    };
    let trace_path = a.trace.or_else(|| cfg.paths.trace.clone());
    let mut config = dd_config(a.max_iters, a.step0, cfg);
    config.trace = trace_path.is_some();
    let corpus = read_corpus(&input)?;
    let preds = pipeline::predict(&tagger, &set, mode, &config, &corpus)?;
    write(
        &out,
        &format_corpus(&pipeline::with_labels(&corpus, &preds)),
    )?;
    if let Some(p) = trace_path {
        let mut s = String::from(report::TRACE_HEADER);
        for (i, pr) in preds.iter().enumerate() {
            report::trace_rows(&mut s, i, &pr.trace);
        }
        write(&p, &s)?;
    }
    let n = preds.len().max(1) as f64;
    let converged = preds.iter().filter(|p| p.converged).count() as f64 / n;
    let iters = preds.iter().map(|p| p.iterations).sum::<usize>() as f64 / n;
    println!(
        "sequences\t{}\nconverged\t{converged}\nmean iterations\t{iters}",
        preds.len()
    );
    Ok(())
}

fn eval(a: EvalArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let gold_path = need(a.gold, &cfg.paths.test, "gold")?;
    let pred_path = need(a.pred, &cfg.paths.predictions, "pred")?;
    let out = need(a.out_dir, &cfg.paths.output_dir, "out-dir")?;
    let gold = read_corpus(&gold_path)?;
    let pred = read_corpus(&pred_path)?;
    let r = pipeline::evaluate(&gold, &pred).with_context(|| {
        format!(
            "comparing {} with {}",
            gold_path.display(),
            pred_path.display()
        )
    })?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("eval.tsv"), &report::eval_tsv(&r))?;
    write(
        &out.join("eval.json"),
        &format!("{:#}\n", report::eval_json(&r)),
    )?;
    let m = r.micro();
    println!(
        "precision\t{}\nrecall\t{}\nf1\t{}",
        m.precision(),
        m.recall(),
        m.f1()
    );

    if let Some(caps) = a.caps.or_else(|| cfg.eval.caps.clone()) {
        let tagger = load_model(&need(a.model, &cfg.paths.model, "model")?)?;
        let set = load_constraints(
            &need(a.constraints, &cfg.paths.constraints, "constraints")?,
            tagger.schema(),
        )?;
        let corpus = pipeline::encode_labeled(&tagger, &gold)?;
        let step0 = a
            .step0
            .or(cfg.inference.step0)
            .unwrap_or(DdConfig::default().step0);
        let c = convergence_report(&corpus, &tagger.chain, &set, &caps, step0)?;
        write(&out.join("convergence.tsv"), &report::convergence_tsv(&c))?;
        write(
            &out.join("convergence.json"),
            &format!("{:#}\n", report::convergence_json(&c)),
        )?;
        print!("{}", report::convergence_tsv(&c));
    }
    Ok(())
}
