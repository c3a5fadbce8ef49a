//! Run configuration: TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smdpen_core::benchmarks::{ExperimentKind, Overrides};

/// Output directory used when neither the file nor the flags name one.
pub const DEFAULT_OUT: &str = "results";

/// A single experiment or the whole suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Target {
    All,
    One(ExperimentKind),
}

impl Target {
    pub fn experiments(&self) -> Vec<ExperimentKind> {
        match self {
            Target::All => ExperimentKind::ALL.to_vec(),
            Target::One(k) => vec![*k],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::All => f.write_str("all"),
            Target::One(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(Target::All);
        }
        s.parse::<ExperimentKind>().map(Target::One).map_err(|_| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            format!(
                "unknown experiment `{s}` (expected all, {})",
                names.join(", ")
            )
        })
    }
}

impl TryFrom<String> for Target {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Target> for String {
    fn from(t: Target) -> String {
        t.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantFlag {
    Plain,
    DualAveraging,
}

/// Every setting the runner accepts. Unset fields keep the experiment's
/// shipped value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Target>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Leading constant of the step schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    /// Standard deviation of the gradient-oracle noise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<VariantFlag>,
    /// Also run the long regression rows and the largest Rosenbrock case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_large: Option<bool>,
}

/// A rejected configuration, naming the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("malformed config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("missing `experiment`: name one on the command line or in the config file")]
    MissingExperiment,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text, path)
    }

    /// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    /// Fields set in `later` replace those in `self`.
    pub fn merged(self, later: RunConfig) -> RunConfig {
        RunConfig {
            experiment: later.experiment.or(self.experiment),
            iterations: later.iterations.or(self.iterations),
            seed: later.seed.or(self.seed),
            gamma0: later.gamma0.or(self.gamma0),
            beta: later.beta.or(self.beta),
            p0: later.p0.or(self.p0),
            kappa: later.kappa.or(self.kappa),
            p_max: later.p_max.or(self.p_max),
            sigma: later.sigma.or(self.sigma),
            record_every: later.record_every.or(self.record_every),
            out: later.out.or(self.out),
            variant: later.variant.or(self.variant),
            include_large: later.include_large.or(self.include_large),
        }
    }

    /// Checks every set field against its documented range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(
            key: &'static str,
            value: Option<f64>,
            ok: impl Fn(f64) -> bool,
            range: &str,
        ) -> Result<(), ConfigError> {
            match value {
                Some(v) if !ok(v) => Err(ConfigError::Invalid {
                    key,
                    message: format!("{v} is outside {range}"),
                }),
                _ => Ok(()),
            }
        }
        check("beta", self.beta, |v| v > 1.0 && v <= 100.0, "(1, 100]")?;
        check("kappa", self.kappa, |v| v > 1.0 && v <= 10.0, "(1, 10]")?;
        check("p0", self.p0, |v| v > 0.0 && v.is_finite(), "(0, inf)")?;
        check(
            "p_max",
            self.p_max,
            |v| v > 0.0 && v.is_finite(),
            "(0, inf)",
        )?;
        check(
            "gamma0",
            self.gamma0,
            |v| v > 0.0 && v.is_finite(),
            "(0, inf)",
        )?;
        check(
            "sigma",
            self.sigma,
            |v| v >= 0.0 && v.is_finite(),
            "[0, inf)",
        )?;
        if let (Some(p0), Some(p_max)) = (self.p0, self.p_max) {
            if p_max < p0 {
                return Err(ConfigError::Invalid {
                    key: "p_max",
                    message: format!("{p_max} is below p0 = {p0}"),
                });
            }
        }
        if self.iterations == Some(0) {
            return Err(ConfigError::Invalid {
                key: "iterations",
                message: "must be at least 1".into(),
            });
        }
        if self.record_every == Some(0) {
            return Err(ConfigError::Invalid {
                key: "record_every",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Target, ConfigError> {
        self.experiment.ok_or(ConfigError::MissingExperiment)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn overrides(&self) -> Overrides {
        Overrides {
            iterations: self.iterations,
            seed: self.seed,
            beta: self.beta,
            p0: self.p0,
            kappa: self.kappa,
            p_max: self.p_max,
            gamma0: self.gamma0,
            sigma: self.sigma,
            record_every: self.record_every,
            dual_averaging: self.variant.map(|v| v == VariantFlag::DualAveraging),
            include_large: self.include_large.unwrap_or(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_input_keeps_shipped_values() {
        let c = parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.overrides(), Overrides::default());
        assert_eq!(c.out_dir(), PathBuf::from(DEFAULT_OUT));
    }

    #[test]
    fn later_values_win() {
        let file = parse("kappa = 2.0\nseed = 5\n").unwrap();
        let flags = RunConfig {
            kappa: Some(1.1),
            ..Default::default()
        };
        let c = file.merged(flags);
        assert_eq!(c.kappa, Some(1.1));
        assert_eq!(c.seed, Some(5));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("kapa = 2.0").unwrap_err();
        assert!(err.to_string().contains("kapa"), "{err}");
    }

    #[test]
    fn out_of_range_values_are_named() {
        for (text, key) in [
            ("beta = 1.0", "beta"),
            ("beta = 101.0", "beta"),
            ("kappa = 10.5", "kappa"),
            ("kappa = 1.0", "kappa"),
            ("iterations = 0", "iterations"),
            ("sigma = -0.1", "sigma"),
            ("p0 = 5.0\np_max = 1.0", "p_max"),
        ] {
            let err = parse(text).unwrap().validate().unwrap_err();
            assert!(
                matches!(err, ConfigError::Invalid { key: k, .. } if k == key),
                "{text}: {err}"
            );
        }
        parse("beta = 100.0\nkappa = 10.0\niterations = 1")
            .unwrap()
            .validate()
            .unwrap();
    }

    #[test]
    fn round_trip() {
        let c = RunConfig {
            experiment: Some(Target::One(ExperimentKind::BetaVsL1)),
            iterations: Some(1234),
            seed: Some(1 << 40),
            gamma0: Some(0.1),
            beta: Some(2.5),
            p0: Some(1e-3),
            kappa: Some(1.1),
            p_max: Some(1e9),
            sigma: Some(0.0),
            record_every: Some(3),
            out: Some(PathBuf::from("some/dir")),
            variant: Some(VariantFlag::DualAveraging),
            include_large: Some(true),
        };
        assert_eq!(parse(&c.to_toml().unwrap()).unwrap(), c);
        let all = RunConfig {
            experiment: Some(Target::All),
            ..Default::default()
        };
        assert_eq!(parse(&all.to_toml().unwrap()).unwrap(), all);
        assert_eq!(
            parse(&RunConfig::default().to_toml().unwrap()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn experiment_names() {
        assert_eq!(
            parse("experiment = \"all\"").unwrap().target().unwrap(),
            Target::All
        );
        assert_eq!(
            parse("experiment = \"penalty-demo-1d\"")
                .unwrap()
                .target()
                .unwrap(),
            Target::One(ExperimentKind::PenaltyDemo1d)
        );
        assert!(parse("experiment = \"nope\"").is_err());
        assert_eq!(
            parse("").unwrap().target(),
            Err(ConfigError::MissingExperiment)
        );
    }
}
