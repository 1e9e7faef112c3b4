//! Suite reports and their three output formats.
//!
//! JSON keys are emitted in sorted order (struct fields are declared
//! alphabetically) and every float is written as `%.15e`. Floats are rounded
//! to that precision when a record is built, so a report parsed back from its
//! own JSON compares equal to the original.

use hyperslice::integral::{format_sci, ConvergenceRow, CONVERGENCE_HEADER};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `metric <= tolerance`
    Le,
    /// `metric < tolerance`
    Lt,
    /// `metric > tolerance`
    Gt,
}

impl Relation {
    pub fn holds(self, metric: f64, tolerance: f64) -> bool {
        match self {
            Relation::Le => metric <= tolerance,
            Relation::Lt => metric < tolerance,
            Relation::Gt => metric > tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Gt => ">",
        }
    }
}

/// Rounds to the 16 significant digits that `%.15e` keeps.
pub fn quantize(x: f64) -> f64 {
    if x.is_finite() {
        format_sci(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    #[serde(with = "sci")]
    pub metric: f64,
    pub name: String,
    pub pass: bool,
    pub relation: Relation,
    #[serde(with = "sci")]
    pub tolerance: f64,
    #[serde(with = "sci")]
    pub wall_ms: f64,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, metric: f64, relation: Relation, tolerance: f64, wall_ms: f64) -> Self {
        let metric = quantize(metric);
        let tolerance = quantize(tolerance);
        Self {
            pass: !metric.is_nan() && relation.holds(metric, tolerance),
            metric,
            name: name.into(),
            relation,
            tolerance,
            wall_ms: quantize(wall_ms),
        }
    }
}

/// One row of a quadrature convergence table; keys match the CSV header.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRecord {
    #[serde(rename = "M")]
    pub angular_nodes: usize,
    #[serde(rename = "R")]
    pub radial_nodes: usize,
    #[serde(rename = "V")]
    pub volume_refinement: usize,
    #[serde(with = "sci")]
    pub abs_error: f64,
    #[serde(with = "sci")]
    pub wall_ms: f64,
}

impl ConvergenceRecord {
    pub fn from_row(row: &ConvergenceRow, timings: bool) -> Self {
        Self {
            angular_nodes: row.angular_nodes,
            radial_nodes: row.radial_nodes,
            volume_refinement: row.volume_refinement,
            abs_error: quantize(row.abs_error),
            wall_ms: if timings { quantize(row.wall_ms) } else { 0.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub algebra: String,
    pub checks: Vec<CheckRecord>,
    pub convergence: Vec<ConvergenceRecord>,
    pub pass: bool,
    pub seed: u64,
    pub suite: String,
}

impl SuiteReport {
    pub fn new(
        suite: impl Into<String>,
        algebra: impl Into<String>,
        seed: u64,
        checks: Vec<CheckRecord>,
        convergence: Vec<ConvergenceRecord>,
    ) -> Self {
        Self {
            algebra: algebra.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            convergence,
            seed,
            suite: suite.into(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// The convergence table, with the header of
    /// [`hyperslice::integral::CONVERGENCE_HEADER`]. Reports without a
    /// quadrature study contain only the header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CONVERGENCE_HEADER}\n");
        for r in &self.convergence {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.angular_nodes,
                r.radial_nodes,
                r.volume_refinement,
                format_sci(r.abs_error),
                format_sci(r.wall_ms)
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("suite {}  algebra {}  seed {}\n\n", self.suite, self.algebra, self.seed);
        let _ = writeln!(out, "{:<width$}  result  {:>22}      {:>22}  wall_ms", "check", "metric", "tolerance");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:<6}  {:>22}  {:>2}  {:>22}  {:.1}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                format_sci(c.metric),
                c.relation.symbol(),
                format_sci(c.tolerance),
                c.wall_ms
            );
        }
        if !self.convergence.is_empty() {
            out.push('\n');
            out.push_str(&self.to_csv());
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(
            out,
            "\n{} ({passed}/{} checks passed)",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json, csv or text)")),
        }
    }
}

/// `%.15e` numbers; non-finite values become the strings `"NaN"`, `"inf"`, `"-inf"`.
mod sci {
    use hyperslice::integral::format_sci;
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::Serializer;
    use serde::Serialize;
    use serde_json::value::RawValue;
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            RawValue::from_string(format_sci(*x))
                .map_err(serde::ser::Error::custom)?
                .serialize(s)
        } else {
            s.serialize_str(&format!("{x}"))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"NaN\", \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "NaN" => Ok(f64::NAN),
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}
