//! Verification suites. Each acceptance criterion is one suite, and every
//! check a suite can emit is listed in [`CHECKS`] with its default tolerance.

mod algebra;
mod quadrature;
mod sampled;
mod zeros;

use crate::config::ExperimentConfig;
use crate::report::{CheckRecord, ConvergenceRecord, Relation, SuiteReport};
use hyperslice::algebra::{sample_element_with, sample_unit_imaginary_with};
use hyperslice::slice::SlicePoint;
use hyperslice::stem::{MultiIndex, StemPolynomial};
use hyperslice::{AlgebraElement, AlgebraTag, ImaginaryUnit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Algebra,
    Representation,
    Products,
    Spherical,
    Zeros,
    Bm,
    OffSlice,
    Hartogs,
    Regularity,
    QuaternionMirror,
    All,
}

impl Suite {
    /// In acceptance-criterion order; `All` runs these.
    pub const CRITERIA: [Suite; 10] = [
        Suite::Algebra,
        Suite::Representation,
        Suite::Products,
        Suite::Spherical,
        Suite::Zeros,
        Suite::Bm,
        Suite::OffSlice,
        Suite::Hartogs,
        Suite::Regularity,
        Suite::QuaternionMirror,
    ];

    /// The suites repeated for quaternions by `QuaternionMirror`.
    pub const MIRRORED: [Suite; 8] = [
        Suite::Representation,
        Suite::Products,
        Suite::Spherical,
        Suite::Zeros,
        Suite::Bm,
        Suite::OffSlice,
        Suite::Hartogs,
        Suite::Regularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Representation => "representation",
            Suite::Products => "products",
            Suite::Spherical => "spherical",
            Suite::Zeros => "zeros",
            Suite::Bm => "bm",
            Suite::OffSlice => "off-slice",
            Suite::Hartogs => "hartogs",
            Suite::Regularity => "regularity",
            Suite::QuaternionMirror => "quaternion-mirror",
            Suite::All => "all",
        }
    }

    /// 1-based acceptance criterion, `None` for `All`.
    pub fn criterion(self) -> Option<usize> {
        Self::CRITERIA.iter().position(|s| *s == self).map(|i| i + 1)
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::CRITERIA
            .iter()
            .chain([Suite::All].iter())
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<_> = Self::CRITERIA.iter().map(|s| s.name()).collect();
                format!("unknown suite `{s}` (expected one of {}, all)", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckSpec {
    pub name: &'static str,
    pub suite: Suite,
    pub relation: Relation,
    pub tolerance: f64,
}

const fn spec(suite: Suite, name: &'static str, relation: Relation, tolerance: f64) -> CheckSpec {
    CheckSpec {
        name,
        suite,
        relation,
        tolerance,
    }
}

use Relation::{Gt, Le, Lt};

/// Every check. Relative metrics are scaled by the magnitudes involved;
/// the quadrature metrics are absolute errors.
pub const CHECKS: &[CheckSpec] = &[
    spec(Suite::Algebra, "algebra.octonion.alternativity", Le, 1e-10),
    spec(Suite::Algebra, "algebra.octonion.artin", Le, 1e-10),
    spec(Suite::Algebra, "algebra.octonion.norm_composition", Le, 1e-10),
    spec(Suite::Algebra, "algebra.octonion.non_associative_triples", Gt, 0.0),
    spec(Suite::Algebra, "algebra.quaternion.alternativity", Le, 1e-10),
    spec(Suite::Algebra, "algebra.quaternion.artin", Le, 1e-10),
    spec(Suite::Algebra, "algebra.quaternion.norm_composition", Le, 1e-10),
    spec(Suite::Algebra, "algebra.quaternion.basis_associator", Le, 0.0),
    spec(Suite::Representation, "representation.general", Le, 1e-12),
    spec(Suite::Representation, "representation.symmetric", Le, 1e-12),
    spec(Suite::Representation, "representation.agreement", Le, 1e-13),
    spec(Suite::Products, "products.star_vs_slice", Le, 1e-12),
    spec(Suite::Products, "products.leibniz", Le, 1e-10),
    spec(Suite::Products, "products.real_pointwise", Le, 1e-12),
    spec(Suite::Products, "products.pointwise_witness", Gt, 1e-3),
    spec(Suite::Spherical, "spherical.double_derivative", Le, 1e-10),
    spec(Suite::Spherical, "spherical.derivative_of_value", Le, 1e-10),
    spec(Suite::Spherical, "spherical.identity", Le, 1e-10),
    spec(Suite::Zeros, "zeros.disagreements", Le, 0.0),
    spec(Suite::Zeros, "zeros.missing_structure_cases", Le, 0.0),
    spec(Suite::Bm, "bm.calibration", Le, 1e-10),
    spec(Suite::Bm, "bm.reproduction", Le, 1e-8),
    spec(Suite::Bm, "bm.monotone_in_m", Lt, 1.0),
    spec(Suite::Bm, "bm.componentwise", Le, 1e-12),
    spec(Suite::Bm, "bm.volume_regular", Le, 2e-3),
    spec(Suite::Bm, "bm.general_c1", Le, 5e-3),
    spec(Suite::OffSlice, "off_slice.regular", Le, 1e-8),
    spec(Suite::OffSlice, "off_slice.collapse", Le, 1e-12),
    spec(Suite::OffSlice, "off_slice.real_plane", Le, 1e-8),
    spec(Suite::Hartogs, "hartogs.extension", Le, 1e-6),
    spec(Suite::Hartogs, "hartogs.polynomial", Le, 1e-8),
    spec(Suite::Hartogs, "hartogs.one_variable_failure", Gt, 0.1),
    spec(Suite::Regularity, "regularity.polynomial", Le, 1e-8),
    spec(Suite::Regularity, "regularity.antiholomorphic", Le, 1e-6),
    spec(Suite::Regularity, "regularity.osgood", Le, 1e-8),
    spec(Suite::Regularity, "regularity.two_slice", Le, 1e-6),
];

pub fn check_spec(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

/// Collects records for one suite run.
pub(crate) struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    tag: AlgebraTag,
    prefix: &'static str,
    checks: Vec<CheckRecord>,
    convergence: Vec<ConvergenceRecord>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExperimentConfig, tag: AlgebraTag, prefix: &'static str) -> Self {
        Self {
            cfg,
            tag,
            prefix,
            checks: Vec::new(),
            convergence: Vec::new(),
        }
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(suite.stream());
        rng
    }

    /// Runs `measure` and records its metric; library errors fail the check.
    fn check(&mut self, name: &'static str, measure: impl FnOnce() -> hyperslice::Result<f64>) {
        let spec = check_spec(name).unwrap_or_else(|| panic!("unregistered check `{name}`"));
        let start = Instant::now();
        let metric = match measure() {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{}{name}: {e}", self.prefix);
                f64::NAN
            }
        };
        let wall_ms = if self.cfg.record_timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.checks.push(CheckRecord::new(
            format!("{}{name}", self.prefix),
            metric,
            spec.relation,
            self.cfg.tolerance(name),
            wall_ms,
        ));
    }

    fn run(&mut self, suite: Suite) {
        match suite {
            Suite::Algebra => algebra::run(self),
            Suite::Representation => sampled::representation(self),
            Suite::Products => sampled::products(self),
            Suite::Spherical => sampled::spherical(self),
            Suite::Zeros => zeros::run(self),
            Suite::Bm => quadrature::bm(self),
            Suite::OffSlice => quadrature::off_slice(self),
            Suite::Hartogs => quadrature::hartogs(self),
            Suite::Regularity => sampled::regularity(self),
            Suite::QuaternionMirror => {
                let mut mirror = Runner::new(self.cfg, AlgebraTag::Quaternion, "quaternion-mirror.");
                for s in Suite::MIRRORED {
                    mirror.run(s);
                }
                self.checks.append(&mut mirror.checks);
                self.convergence.append(&mut mirror.convergence);
            }
            Suite::All => {
                for s in Suite::CRITERIA {
                    self.run(s);
                }
            }
        }
    }
}

/// Runs `cfg.suite`.
pub fn run_suite(cfg: &ExperimentConfig) -> SuiteReport {
    let mut runner = Runner::new(cfg, cfg.algebra, "");
    runner.run(cfg.suite);
    let algebra = match cfg.suite {
        Suite::Algebra => "octonion+quaternion",
        Suite::QuaternionMirror => "quaternion",
        Suite::All => "all",
        _ => cfg.algebra.name(),
    };
    SuiteReport::new(cfg.suite.name(), algebra, cfg.seed, runner.checks, runner.convergence)
}

pub(crate) fn random_poly(tag: AlgebraTag, n: usize, degree: u32, terms: usize, rng: &mut impl Rng) -> StemPolynomial {
    let mut p = StemPolynomial::zero(tag, n);
    for _ in 0..terms {
        let mut left = rng.random_range(0..=degree);
        let mut exps = vec![0u32; n];
        for slot in exps.iter_mut() {
            let k = rng.random_range(0..=left);
            *slot = k;
            left -= k;
        }
        p.add_term(MultiIndex::new(exps), sample_element_with(tag, rng));
    }
    p
}

pub(crate) fn random_point(tag: AlgebraTag, n: usize, rng: &mut impl Rng) -> SlicePoint {
    SlicePoint::new(
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        sample_unit_imaginary_with(tag, rng),
    )
    .expect("random coordinates are finite")
}

/// A random unit orthogonal to `j`.
pub(crate) fn orthogonal_unit(j: &ImaginaryUnit, rng: &mut impl Rng) -> ImaginaryUnit {
    let jv = j.value();
    loop {
        let u = sample_unit_imaginary_with(j.tag(), rng).value();
        let v = u - jv * u.dot(&jv);
        if v.norm() > 0.1 {
            return ImaginaryUnit::normalized(v).expect("nonzero imaginary vector");
        }
    }
}

pub(crate) fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

pub(crate) fn e(tag: AlgebraTag, i: usize) -> AlgebraElement {
    AlgebraElement::basis(tag, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_criterion_has_checks() {
        for s in Suite::CRITERIA {
            if s != Suite::QuaternionMirror {
                assert!(CHECKS.iter().any(|c| c.suite == s), "{s}");
            }
        }
        let mut names: Vec<_> = CHECKS.iter().map(|c| c.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::CRITERIA.iter().chain([Suite::All].iter()) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("bogus".parse::<Suite>().is_err());
        assert_eq!(Suite::Algebra.criterion(), Some(1));
        assert_eq!(Suite::QuaternionMirror.criterion(), Some(10));
        assert_eq!(Suite::All.criterion(), None);
    }

    #[test]
    fn max_propagates_nan() {
        assert!(max_of([1.0, f64::NAN, 0.5]).is_nan());
        assert_eq!(max_of([1.0, 3.0]), 3.0);
    }
}
