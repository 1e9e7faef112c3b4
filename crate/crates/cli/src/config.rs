//! Experiment configuration (TOML).
//!
//! ```toml
//! suite = "bm"
//! algebra = "octonion"
//! n = 2
//! seed = 1
//! samples = 1000
//! functions = ["cubic.json"]    # StemPolynomial JSON, relative to this file
//! record_timing = false
//!
//! [tolerances]
//! "bm.reproduction" = 1e-8
//!
//! [quadrature]
//! angular_nodes = 64
//! radial_nodes = 32
//! volume_refinement = 3
//! ```
//!
//! Every key is optional. Validation errors name the field and its line.

use crate::suites::{self, Suite};
use hyperslice::integral::QuadratureSpec;
use hyperslice::stem::StemPolynomial;
use hyperslice::AlgebraTag;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use toml::Spanned;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("{origin}:{line}:{column}: field `{field}`: {message}")]
    Invalid {
        origin: String,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub algebra: AlgebraTag,
    /// Number of variables for the quadrature suites (bm, off-slice, hartogs).
    pub n: usize,
    pub seed: u64,
    /// Random samples per arity for the sampled identities.
    pub samples: usize,
    /// Overrides of the default tolerances, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub quadrature: QuadratureSpec,
    pub functions: Vec<StemPolynomial>,
    /// Record wall-clock times in reports; off by default so reports are reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            algebra: AlgebraTag::Octonion,
            n: 2,
            seed: 1,
            samples: 1000,
            tolerances: BTreeMap::new(),
            quadrature: QuadratureSpec::default(),
            functions: Vec::new(),
            record_timing: false,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: Option<Spanned<String>>,
    algebra: Option<Spanned<String>>,
    n: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    samples: Option<Spanned<i64>>,
    tolerances: Option<BTreeMap<Spanned<String>, Spanned<f64>>>,
    quadrature: Option<Spanned<RawQuadrature>>,
    functions: Option<Vec<Spanned<String>>>,
    record_timing: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    angular_nodes: Option<Spanned<i64>>,
    radial_nodes: Option<Spanned<i64>>,
    volume_refinement: Option<Spanned<i64>>,
}

/// Maps byte offsets to 1-based line and column.
struct Source<'a> {
    origin: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
        (line, column)
    }

    fn invalid(&self, field: impl fmt::Display, span: Range<usize>, message: impl fmt::Display) -> ConfigError {
        let (line, column) = self.position(span.start);
        ConfigError::Invalid {
            origin: self.origin.to_string(),
            field: field.to_string(),
            line,
            column,
            message: message.to_string(),
        }
    }
}

fn positive(src: &Source, field: &str, v: &Spanned<i64>, min: i64) -> Result<usize, ConfigError> {
    let value = *v.get_ref();
    if value < min {
        return Err(src.invalid(field, v.span(), format!("must be at least {min} (got {value})")));
    }
    usize::try_from(value).map_err(|_| src.invalid(field, v.span(), "out of range"))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), Some(base))
    }

    /// Parses and validates `text`; `origin` labels diagnostics and `base`
    /// resolves relative function paths. With `base = None` nothing is read
    /// from disk and a non-empty `functions` list is an error.
    pub fn parse(text: &str, origin: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let src = Source { origin, text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => {
                let (line, column) = src.position(span.start);
                ConfigError::Syntax {
                    origin: format!("{origin}:{line}:{column}"),
                    message: e.message().to_string(),
                }
            }
            None => ConfigError::Syntax {
                origin: origin.to_string(),
                message: e.message().to_string(),
            },
        })?;
        let mut cfg = ExperimentConfig::default();
        if let Some(s) = &raw.suite {
            cfg.suite = s
                .get_ref()
                .parse()
                .map_err(|m: String| src.invalid("suite", s.span(), m))?;
        }
        if let Some(a) = &raw.algebra {
            cfg.algebra = AlgebraTag::parse(a.get_ref()).ok_or_else(|| {
                src.invalid("algebra", a.span(), format!("unknown algebra `{}` (expected octonion or quaternion)", a.get_ref()))
            })?;
        }
        if let Some(n) = &raw.n {
            cfg.n = positive(&src, "n", n, 1)?;
            if cfg.n > hyperslice::stem::MAX_ARITY {
                return Err(src.invalid("n", n.span(), format!("at most {}", hyperslice::stem::MAX_ARITY)));
            }
        }
        if let Some(s) = &raw.seed {
            cfg.seed = positive(&src, "seed", s, 0)? as u64;
        }
        if let Some(s) = &raw.samples {
            cfg.samples = positive(&src, "samples", s, 1)?;
        }
        for (key, value) in raw.tolerances.iter().flatten() {
            let name = key.get_ref();
            let field = format!("tolerances.{name}");
            if suites::check_spec(name).is_none() {
                return Err(src.invalid(field, key.span(), "no check with this name"));
            }
            let v = *value.get_ref();
            if !(v.is_finite() && v >= 0.0) {
                return Err(src.invalid(field, value.span(), format!("must be finite and non-negative (got {v})")));
            }
            cfg.tolerances.insert(name.clone(), v);
        }
        if let Some(q) = &raw.quadrature {
            let span = q.span();
            let q = q.get_ref();
            let mut spec = QuadratureSpec::default();
            if let Some(m) = &q.angular_nodes {
                spec.angular_nodes = positive(&src, "quadrature.angular_nodes", m, 8)?;
            }
            if let Some(r) = &q.radial_nodes {
                spec.radial_nodes = positive(&src, "quadrature.radial_nodes", r, 4)?;
            }
            if let Some(v) = &q.volume_refinement {
                spec.volume_refinement = positive(&src, "quadrature.volume_refinement", v, 1)?;
            }
            spec.validate().map_err(|e| src.invalid("quadrature", span, e))?;
            cfg.quadrature = spec;
        }
        for path in raw.functions.iter().flatten() {
            let field = "functions";
            let Some(dir) = base else {
                return Err(src.invalid(field, path.span(), "function files need a config file location"));
            };
            let file = dir.join(path.get_ref());
            let json = std::fs::read_to_string(&file)
                .map_err(|e| src.invalid(field, path.span(), format!("{}: {e}", file.display())))?;
            let p = StemPolynomial::from_json(&json)
                .map_err(|e| src.invalid(field, path.span(), format!("{}: {e}", file.display())))?;
            if p.tag() != cfg.algebra {
                return Err(src.invalid(
                    field,
                    path.span(),
                    format!("{}: algebra {} does not match {}", file.display(), p.tag(), cfg.algebra),
                ));
            }
            if p.arity() != cfg.n {
                return Err(src.invalid(
                    field,
                    path.span(),
                    format!("{}: arity {} does not match n = {}", file.display(), p.arity(), cfg.n),
                ));
            }
            cfg.functions.push(p);
        }
        cfg.record_timing = raw.record_timing.unwrap_or(false);
        Ok(cfg)
    }

    /// The tolerance for `check`: the configured override or the default.
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .or_else(|| suites::check_spec(check).map(|s| s.tolerance))
            .unwrap_or_else(|| panic!("unknown check `{check}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, "test.toml", None)
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn full_config() {
        let cfg = parse(
            "suite = \"off-slice\"\nalgebra = \"quaternion\"\nn = 1\nseed = 9\nsamples = 10\n\
             record_timing = true\n[tolerances]\n\"bm.reproduction\" = 1e-6\n\
             [quadrature]\nangular_nodes = 16\nradial_nodes = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.suite, Suite::OffSlice);
        assert_eq!(cfg.algebra, AlgebraTag::Quaternion);
        assert_eq!((cfg.n, cfg.seed, cfg.samples), (1, 9, 10));
        assert_eq!(cfg.quadrature, QuadratureSpec::new(16, 8, 3).unwrap());
        assert_eq!(cfg.tolerance("bm.reproduction"), 1e-6);
        assert_eq!(cfg.tolerance("bm.calibration"), 1e-10);
        assert!(cfg.record_timing);
    }

    fn invalid(text: &str) -> (String, usize) {
        match parse(text).unwrap_err() {
            ConfigError::Invalid { field, line, .. } => (field, line),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn diagnostics_name_field_and_line() {
        assert_eq!(invalid("seed = 1\nn = 0\n"), ("n".into(), 2));
        assert_eq!(invalid("\n\nsuite = \"everything\""), ("suite".into(), 3));
        assert_eq!(invalid("algebra = \"sedenion\""), ("algebra".into(), 1));
        assert_eq!(
            invalid("[quadrature]\nradial_nodes = 2\n"),
            ("quadrature.radial_nodes".into(), 2)
        );
        assert_eq!(
            invalid("[tolerances]\n\"bm.nothing\" = 1.0\n"),
            ("tolerances.bm.nothing".into(), 2)
        );
        assert_eq!(
            invalid("[tolerances]\n\"bm.calibration\" = -1.0\n"),
            ("tolerances.bm.calibration".into(), 2)
        );
        assert_eq!(invalid("samples = 0"), ("samples".into(), 1));
        assert_eq!(invalid("seed = -3"), ("seed".into(), 1));
        assert_eq!(invalid("functions = [\"missing.json\"]"), ("functions".into(), 1));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("n = 2\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { .. }));
        assert!(err.to_string().starts_with("test.toml:2:"), "{err}");
        assert!(matches!(parse("n = \"two\"").unwrap_err(), ConfigError::Syntax { .. }));
    }
}
