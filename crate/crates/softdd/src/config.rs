//! Optional TOML run configuration. Every field can also be given as a
//! command-line flag; flags win. Relative paths are resolved against the
//! directory holding the config file.
//!
//! ```toml
//! seed = 7
//!
//! [paths]
//! train = "data/train.txt"
//! dev = "data/dev.txt"
//! test = "data/test.txt"
//! model = "out/model.txt"
//! constraints = "out/constraints.txt"
//! output_dir = "out"
//!
//! [inference]
//! mode = "soft-dd"
//! max_iters = 100
//! step0 = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pipeline::InferenceMode;
use crate::synth::SchemaTemplate;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub train_size: Option<usize>,
    pub dev_size: Option<usize>,
    pub test_size: Option<usize>,
    pub min_words: Option<usize>,
    pub max_words: Option<usize>,
    pub template: Option<SchemaTemplate>,
    pub confusion: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceSection {
    pub mode: Option<InferenceMode>,
    pub max_iters: Option<usize>,
    pub step0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerSection {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub averaging: Option<bool>,
    pub inner_max_iters: Option<usize>,
    pub step0: Option<f64>,
    pub initial_penalty: Option<f64>,
    pub shuffle: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub caps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub paths: Paths,
    pub gen: GenSection,
    pub train: TrainSection,
    pub inference: InferenceSection,
    pub constraints: ConstraintSection,
    pub learner: LearnerSection,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        let p = &mut cfg.paths;
        for path in [
            &mut p.train,
            &mut p.dev,
            &mut p.test,
            &mut p.model,
            &mut p.constraints,
            &mut p.output_dir,
            &mut p.predictions,
            &mut p.trace,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            e => e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let text = "seed = 3\n[paths]\nmodel = \"m.txt\"\n[inference]\nmode = \"hard-dd\"\n[gen]\ntemplate = \"flat\"\n";
        let cfg = RunConfig::parse(text, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.paths.model, Some(PathBuf::from("/tmp/x/m.txt")));
        assert_eq!(cfg.inference.mode, Some(InferenceMode::HardDd));
        assert_eq!(cfg.gen.template, Some(SchemaTemplate::Flat));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("[paths]\nmodle = \"x\"\n", Path::new(".")).is_err());
    }
}
