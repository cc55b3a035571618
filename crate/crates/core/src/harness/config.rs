use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boost::Constants;
use crate::error::{Error, Result};
use crate::model::{Instance, InstanceFile};
use crate::sampling::{Mode, SamplerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// One boosting run with the base oracle.
    Boost,
    /// The level-`depth` recursive learner.
    Recursive,
    /// Grid search over OPT guesses around the recursive learner.
    #[serde(alias = "opt-free")]
    OptFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptKeyword {
    /// Use the brute-force OPT of the instance.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptPrime {
    Value(f64),
    Keyword(OptKeyword),
}

impl Default for OptPrime {
    fn default() -> Self {
        OptPrime::Keyword(OptKeyword::Exact)
    }
}

fn one() -> usize {
    1
}

/// A run, fully described. Reports echo it, so a report can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Instance file, resolved relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub sampler: SamplerKind,
    pub eps: f64,
    pub delta: f64,
    /// Ignored by the OPT-free pipeline.
    #[serde(default)]
    pub opt_prime: OptPrime,
    #[serde(default = "one")]
    pub depth: usize,
    #[serde(default = "one")]
    pub search_depth: usize,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict_assumptions: bool,
    /// Explicit VC dimension; computed exhaustively when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vc_dimension: Option<usize>,
}

impl RunConfig {
    pub fn new(pipeline: Pipeline, eps: f64, delta: f64) -> Self {
        RunConfig {
            instance_path: None,
            instance: None,
            pipeline,
            mode: Mode::Sampled,
            sampler: SamplerKind::default(),
            eps,
            delta,
            opt_prime: OptPrime::default(),
            depth: 1,
            search_depth: 1,
            constants: Constants::default(),
            seed: 0,
            strict_assumptions: false,
            vc_dimension: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_json_str(&text)?;
        if let (Some(rel), Some(dir)) = (&config.instance_path, path.parent()) {
            if rel.is_relative() {
                config.instance_path = Some(dir.join(rel));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::config("eps", format!("must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if let OptPrime::Value(v) = self.opt_prime {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config("opt_prime", format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.depth == 0 {
            return Err(Error::config("depth", "must be at least 1"));
        }
        if self.pipeline == Pipeline::Boost && self.depth != 1 {
            return Err(Error::config("depth", "the boost pipeline runs at depth 1; use `recursive`"));
        }
        if self.search_depth == 0 {
            return Err(Error::config("search_depth", "must be at least 1"));
        }
        self.constants
            .validate()
            .map_err(|e| Error::config("constants", e.to_string()))?;
        match (&self.instance_path, &self.instance) {
            (None, None) => Err(Error::config(
                "instance_path",
                "missing field `instance_path` (or inline `instance`)",
            )),
            (Some(_), Some(_)) => Err(Error::config("instance", "give either `instance_path` or `instance`, not both")),
            _ => Ok(()),
        }
    }

    pub fn load_instance(&self) -> Result<Instance> {
        match (&self.instance_path, &self.instance) {
            (_, Some(file)) => Instance::from_file(file),
            (Some(path), None) => Instance::load(path),
            (None, None) => Err(Error::config("instance_path", "no instance given")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"instance_path": "i.json", "pipeline": "recursive", "eps": 0.1, "delta": 0.1"#;

    fn parse(extra: &str) -> Result<RunConfig> {
        RunConfig::from_json_str(&format!("{BASE}{extra}}}"))
    }

    #[test]
    fn defaults() {
        let c = parse("").unwrap();
        assert_eq!(c.mode, Mode::Sampled);
        assert_eq!(c.opt_prime, OptPrime::Keyword(OptKeyword::Exact));
        assert_eq!((c.depth, c.search_depth, c.seed), (1, 1, 0));
        assert_eq!(c.constants, Constants::default());
    }

    #[test]
    fn opt_prime_forms() {
        assert_eq!(parse(r#", "opt_prime": 0.25"#).unwrap().opt_prime, OptPrime::Value(0.25));
        assert_eq!(parse(r#", "opt_prime": "exact""#).unwrap().opt_prime, OptPrime::default());
        assert!(parse(r#", "opt_prime": 1.5"#).is_err());
    }

    #[test]
    fn missing_field_names_it() {
        let err = RunConfig::from_json_str(r#"{"instance_path": "i.json", "pipeline": "boost", "delta": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("eps"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for extra in [
            r#", "mode": "exhaustive""#,
            r#", "sampler": "fast""#,
            r#", "depth": 0"#,
            r#", "constants": {"c1": -1}"#,
            r#", "colour": 1"#,
        ] {
            assert!(parse(extra).is_err(), "{extra}");
        }
        for (eps, delta) in [(0.0, 0.1), (-0.1, 0.1), (0.1, 0.0), (0.1, 1.0)] {
            let text = format!(r#"{{"instance_path": "i", "pipeline": "boost", "eps": {eps}, "delta": {delta}}}"#);
            assert!(matches!(RunConfig::from_json_str(&text), Err(Error::Config { .. })));
        }
    }

    #[test]
    fn nested_error_path() {
        let err = parse(r#", "constants": {"c1": "big"}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "constants.c1"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn pipeline_spellings() {
        let t = |p: &str| format!(r#"{{"instance_path": "i", "pipeline": "{p}", "eps": 0.1, "delta": 0.1}}"#);
        assert_eq!(RunConfig::from_json_str(&t("opt_free")).unwrap().pipeline, Pipeline::OptFree);
        assert_eq!(RunConfig::from_json_str(&t("opt-free")).unwrap().pipeline, Pipeline::OptFree);
        assert!(RunConfig::from_json_str(&t("bagging")).is_err());
    }
}
