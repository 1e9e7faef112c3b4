//! Slice functions `f = I(F)` on the slice cone `⋃_J C_Jⁿ`.
//!
//! A point of the cone is `x = α + βJ` with `α, β ∈ Rⁿ` and one imaginary unit
//! `J` shared by every coordinate. The lift of a stem function is
//! `f(α + βJ) = F₁(α + iβ) + J·F₂(α + iβ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraTag, ImaginaryUnit};
use crate::error::{Error, Result};
use crate::stem::{
    self, check_intrinsic, is_holomorphic, non_real_anchor, ComplexPoint, Smoothness, StemFunction,
    StemPolynomial, FD_STEP,
};

/// Threshold for the "first significant coefficient" sign rule on `J`.
pub const CANONICAL_THRESHOLD: f64 = 1e-12;

/// Relative tolerance for imaginary parts to count as parallel.
pub const PARALLEL_TOL: f64 = 1e-10;

/// Intrinsicity tolerance enforced by [`SliceFunction::new`].
pub const INTRINSIC_TOL: f64 = 1e-10;

/// Default tolerance of [`classify_sphere_zeros`].
pub const ZERO_TOL: f64 = 1e-9;

/// Minimum `|J − K|` for the representation formula.
pub const DEGENERATE_UNITS_TOL: f64 = 1e-8;

const VALIDATION_SAMPLES: usize = 64;
const VALIDATION_SEED: u64 = 0x51ce;

/// `x = α + βJ`, with `J` canonicalized so its first significant coefficient
/// is positive. Real points carry `β = 0` and a placeholder unit `e₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicePoint {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    j: ImaginaryUnit,
    is_real: bool,
}

impl SlicePoint {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, j: ImaginaryUnit) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::ArityMismatch {
                left: alpha.len(),
                right: beta.len(),
            });
        }
        if alpha.is_empty() {
            return Err(Error::ArityMismatch { left: 0, right: 1 });
        }
        if beta.iter().all(|b| *b == 0.0) {
            return Ok(Self::real(j.tag(), alpha));
        }
        let (j, flipped) = j.canonical(CANONICAL_THRESHOLD);
        let beta = if flipped {
            beta.into_iter().map(|b| -b).collect()
        } else {
            beta
        };
        Ok(Self {
            alpha,
            beta,
            j,
            is_real: false,
        })
    }

    pub fn real(tag: AlgebraTag, alpha: Vec<f64>) -> Self {
        let n = alpha.len();
        Self {
            alpha,
            beta: vec![0.0; n],
            j: ImaginaryUnit::basis(tag, 1),
            is_real: true,
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn unit(&self) -> ImaginaryUnit {
        self.j
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn arity(&self) -> usize {
        self.alpha.len()
    }

    pub fn tag(&self) -> AlgebraTag {
        self.j.tag()
    }

    /// `z = α + iβ`.
    pub fn stem_point(&self) -> ComplexPoint {
        ComplexPoint::from_parts(&self.alpha, &self.beta)
    }

    /// `x̄ = α − βJ`.
    pub fn conjugate(&self) -> SlicePoint {
        SlicePoint {
            alpha: self.alpha.clone(),
            beta: self.beta.iter().map(|b| -b).collect(),
            j: self.j,
            is_real: self.is_real,
        }
    }

    /// The point `α + βI` on the same sphere.
    pub fn with_unit(&self, i: ImaginaryUnit) -> Result<SlicePoint> {
        SlicePoint::new(self.alpha.clone(), self.beta.clone(), i)
    }

    /// Euclidean norm of `β`.
    pub fn beta_norm(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    /// The coordinates `x_k = α_k + β_k J` as algebra elements.
    pub fn coordinates(&self) -> Vec<AlgebraElement> {
        let tag = self.tag();
        let j = self.j.value();
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| AlgebraElement::real(tag, a) + j * b)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SlicePointJson {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            j: self.j.value().coeffs().to_vec(),
        })
        .expect("slice point serializes")
    }

    /// Parses `{"alpha": [..], "beta": [..], "j": [..4 or 8 reals..]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SlicePointJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlicePointJson {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    j: Vec<f64>,
}

impl TryFrom<SlicePointJson> for SlicePoint {
    type Error = Error;

    fn try_from(raw: SlicePointJson) -> Result<Self> {
        let tag = match raw.j.len() {
            4 => AlgebraTag::Quaternion,
            8 => AlgebraTag::Octonion,
            n => return Err(Error::Parse(format!("j has {n} coefficients, expected 4 or 8"))),
        };
        if raw.alpha.len() != raw.beta.len() || raw.alpha.is_empty() {
            return Err(Error::Parse(format!(
                "alpha and beta must be non-empty and of equal length ({} vs {})",
                raw.alpha.len(),
                raw.beta.len()
            )));
        }
        if raw
            .alpha
            .iter()
            .chain(&raw.beta)
            .chain(&raw.j)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Parse("non-finite coordinate".into()));
        }
        let j = AlgebraElement::from_coeffs(tag, &raw.j)?;
        let j = ImaginaryUnit::new(j).map_err(|e| Error::Parse(format!("j: {e}")))?;
        SlicePoint::new(raw.alpha, raw.beta, j)
    }
}

/// Splits a tuple of algebra elements into `α + βJ`, failing when the
/// imaginary parts do not share one direction.
pub fn decompose_point(xs: &[AlgebraElement]) -> Result<SlicePoint> {
    let Some(first) = xs.first() else {
        return Err(Error::ArityMismatch { left: 0, right: 1 });
    };
    let tag = first.tag();
    if let Some(x) = xs.iter().find(|x| x.tag() != tag) {
        return Err(Error::AlgebraMismatch {
            left: tag,
            right: x.tag(),
        });
    }
    let alpha: Vec<f64> = xs.iter().map(AlgebraElement::re).collect();
    let imag: Vec<AlgebraElement> = xs.iter().map(AlgebraElement::imag).collect();
    let (pivot, scale) = imag
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if scale == 0.0 {
        return Ok(SlicePoint::real(tag, alpha));
    }
    let direction = imag[pivot] / scale;
    let mut beta = Vec::with_capacity(xs.len());
    for (k, v) in imag.iter().enumerate() {
        let b = v.dot(&direction);
        if (*v - direction * b).norm() > PARALLEL_TOL * scale {
            return Err(Error::NotInSliceCone {
                first: pivot,
                second: k,
            });
        }
        beta.push(b);
    }
    SlicePoint::new(alpha, beta, ImaginaryUnit::normalized(direction)?)
}

/// A slice function `I(F)`.
#[derive(Clone, Debug)]
pub struct SliceFunction {
    stem: StemFunction,
}

impl SliceFunction {
    /// Wraps `stem` after checking intrinsicity on a deterministic sample of
    /// its domain (to [`INTRINSIC_TOL`]). Polynomials skip the check.
    pub fn new(stem: StemFunction) -> Result<Self> {
        if stem.as_polynomial().is_none() {
            let samples = stem.domain().samples(stem.arity(), VALIDATION_SAMPLES, VALIDATION_SEED);
            let report = check_intrinsic(&stem, &samples, INTRINSIC_TOL);
            if !report.pass || !stem.intrinsic_flag() {
                return Err(Error::NotIntrinsic {
                    violation: report.max_violation,
                });
            }
        }
        Ok(Self { stem })
    }

    pub fn from_polynomial(p: StemPolynomial) -> Self {
        Self {
            stem: StemFunction::polynomial(p),
        }
    }

    pub fn stem(&self) -> &StemFunction {
        &self.stem
    }

    pub fn tag(&self) -> AlgebraTag {
        self.stem.tag()
    }

    pub fn arity(&self) -> usize {
        self.stem.arity()
    }

    pub fn evaluate(&self, x: &SlicePoint) -> Result<AlgebraElement> {
        lift_evaluate(self, x)
    }

    /// `f + g`, the lift of `F + G`.
    pub fn add(&self, other: &SliceFunction) -> Result<SliceFunction> {
        Ok(SliceFunction {
            stem: self.stem.add(&other.stem)?,
        })
    }

    /// `s·f` for real `s`.
    pub fn scale(&self, s: f64) -> SliceFunction {
        SliceFunction {
            stem: self.stem.scale(s),
        }
    }
}

impl From<StemPolynomial> for SliceFunction {
    fn from(p: StemPolynomial) -> Self {
        SliceFunction::from_polynomial(p)
    }
}

fn check_point(f: &SliceFunction, x: &SlicePoint) -> Result<()> {
    if f.arity() != x.arity() {
        return Err(Error::ArityMismatch {
            left: f.arity(),
            right: x.arity(),
        });
    }
    if f.tag() != x.tag() {
        return Err(Error::AlgebraMismatch {
            left: f.tag(),
            right: x.tag(),
        });
    }
    Ok(())
}

/// `f(x) = F₁(z) + J·F₂(z)` with `z = α + iβ`.
pub fn lift_evaluate(f: &SliceFunction, x: &SlicePoint) -> Result<AlgebraElement> {
    check_point(f, x)?;
    let z = x.stem_point();
    if !f.stem.domain().contains(&z) {
        return Err(Error::OutsideDomain);
    }
    let w = f.stem.evaluate(&z);
    if x.is_real() {
        debug_assert!(
            w.im.norm() <= 1e-10 * (1.0 + w.re.norm()),
            "odd component does not vanish at a real point"
        );
        return Ok(w.re);
    }
    Ok(w.re + x.unit().value() * w.im)
}

/// The lift at raw `(α, β, J)`, without canonicalizing the sign of `(β, J)`
/// and without a domain check.
pub fn lift_at(f: &SliceFunction, alpha: &[f64], beta: &[f64], j: &AlgebraElement) -> AlgebraElement {
    let w = f.stem.evaluate(&ComplexPoint::from_parts(alpha, beta));
    w.re + *j * w.im
}

/// `f(α + βI) = (I − K)((J − K)⁻¹ f(α + βJ)) − (I − J)((J − K)⁻¹ f(α + βK))`.
pub fn representation(
    f_at_j: &AlgebraElement,
    f_at_k: &AlgebraElement,
    i: &ImaginaryUnit,
    j: &ImaginaryUnit,
    k: &ImaginaryUnit,
) -> Result<AlgebraElement> {
    let (i, j, k) = (i.value(), j.value(), k.value());
    let d = j - k;
    let distance = d.norm();
    if distance <= DEGENERATE_UNITS_TOL {
        return Err(Error::DegenerateUnits { distance });
    }
    let d_inv = d.inverse()?;
    Ok((i - k) * (d_inv * *f_at_j) - (i - j) * (d_inv * *f_at_k))
}

/// The `K = −J` case:
/// `f(α + βI) = ½(f(α + βJ) + f(α − βJ)) − (I/2)(J(f(α + βJ) − f(α − βJ)))`.
pub fn representation_symmetric(
    f_at_j: &AlgebraElement,
    f_at_minus_j: &AlgebraElement,
    i: &ImaginaryUnit,
    j: &ImaginaryUnit,
) -> AlgebraElement {
    let (i, j) = (i.value(), j.value());
    (*f_at_j + *f_at_minus_j) * 0.5 - (i * 0.5) * (j * (*f_at_j - *f_at_minus_j))
}

/// Sign of the first nonzero `β_k`; `(β, J)` and `(−β, −J)` name the same
/// point, and the spherical operations use the representative with `σ = 1`.
pub fn beta_sign(x: &SlicePoint) -> f64 {
    match x.beta().iter().find(|b| **b != 0.0) {
        Some(b) if *b < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// `Im(x) := σ|β|·J` with `σ` from [`beta_sign`]; equals `βJ` when `n = 1`.
pub fn im_part(x: &SlicePoint) -> AlgebraElement {
    x.unit().value() * (beta_sign(x) * x.beta_norm())
}

/// `Im(x)⁻¹ := −σJ/|β|`. For one variable this is the inverse of `βJ`; for
/// several variables it is the convention that makes `∂_s f` the lift of
/// `σF₂/|β|`, constant on each sphere.
pub fn im_inverse(x: &SlicePoint) -> Result<AlgebraElement> {
    if x.is_real() {
        return Err(Error::RealPoint);
    }
    Ok(-x.unit().value() * (beta_sign(x) / x.beta_norm()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spherical {
    pub value: AlgebraElement,
    pub derivative: AlgebraElement,
}

/// `v_s f(x) = ½(f(x) + f(x̄))`.
pub fn spherical_value(f: &SliceFunction, x: &SlicePoint) -> Result<AlgebraElement> {
    Ok((lift_evaluate(f, x)? + lift_evaluate(f, &x.conjugate())?) * 0.5)
}

/// `∂_s f(x) = ½ Im(x)⁻¹ (f(x) − f(x̄))`, see [`im_inverse`].
pub fn spherical_derivative(f: &SliceFunction, x: &SlicePoint) -> Result<AlgebraElement> {
    let inv = im_inverse(x)?;
    let diff = lift_evaluate(f, x)? - lift_evaluate(f, &x.conjugate())?;
    Ok(inv * diff * 0.5)
}

pub fn spherical(f: &SliceFunction, x: &SlicePoint) -> Result<Spherical> {
    Ok(Spherical {
        value: spherical_value(f, x)?,
        derivative: spherical_derivative(f, x)?,
    })
}

/// `f·g := I(FG)`, built from the pointwise stem product even for
/// polynomials (compare [`star_product`], which convolves coefficients).
pub fn slice_product(f: &SliceFunction, g: &SliceFunction) -> Result<SliceFunction> {
    Ok(SliceFunction {
        stem: stem::stem_product_pointwise(&f.stem, &g.stem)?,
    })
}

/// `p * q = Σ_γ x^γ Σ_{μ+ν=γ} a_μ b_ν`.
pub fn star_product(p: &StemPolynomial, q: &StemPolynomial) -> Result<StemPolynomial> {
    p.convolve(q)
}

/// True iff `v_s f` and `∂_s f` have vanishing imaginary parts (to 1e−10,
/// scaled by the value's magnitude) at every sample.
pub fn is_real_slice(f: &SliceFunction, samples: &[SlicePoint]) -> Result<bool> {
    const TOL: f64 = 1e-10;
    for x in samples {
        let v = spherical_value(f, x)?;
        if v.imag().norm() > TOL * (1.0 + v.norm()) {
            return Ok(false);
        }
        if !x.is_real() {
            let d = spherical_derivative(f, x)?;
            if d.imag().norm() > TOL * (1.0 + d.norm()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Distance from `y` to the slice plane `C_J = R + RJ`.
pub fn off_plane_distance(y: &AlgebraElement, j: &ImaginaryUnit) -> f64 {
    let j = j.value();
    let along = y.imag().dot(&j);
    (y.imag() - j * along).norm()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityReport {
    /// `max |∂f_J/∂α_t + J ∂f_J/∂β_t|` over units, samples and axes.
    pub max_slice_residual: f64,
    /// `max |∂F/∂z̄_t|` at the same samples.
    pub stem_residual: f64,
    pub pass: bool,
}

/// Central differences of `f_J` along `α_t` and `β_t` at `α + βJ`.
fn slice_partials(
    f: &SliceFunction,
    z: &ComplexPoint,
    j: &AlgebraElement,
    axis: usize,
    h: f64,
) -> (AlgebraElement, AlgebraElement) {
    let alpha: Vec<f64> = z.iter().map(|c| c.re).collect();
    let beta: Vec<f64> = z.iter().map(|c| c.im).collect();
    let shifted = |da: f64, db: f64| {
        let mut a = alpha.clone();
        let mut b = beta.clone();
        a[axis] += da;
        b[axis] += db;
        lift_at(f, &a, &b, j)
    };
    let d_alpha = (shifted(h, 0.0) - shifted(-h, 0.0)) * (0.5 / h);
    let d_beta = (shifted(0.0, h) - shifted(0.0, -h)) * (0.5 / h);
    (d_alpha, d_beta)
}

/// Cauchy–Riemann residual of the slice `f_J` at `z = α + iβ` along `axis`.
pub fn slice_cr_residual(f: &SliceFunction, z: &ComplexPoint, j: &ImaginaryUnit, axis: usize) -> AlgebraElement {
    let j = j.value();
    let (d_alpha, d_beta) = slice_partials(f, z, &j, axis, FD_STEP);
    d_alpha + j * d_beta
}

/// Per-slice holomorphy: every `f_J` must satisfy `∂f_J/∂α + J ∂f_J/∂β = 0`,
/// cross-checked against holomorphy of the stem.
pub fn check_slice_regular(
    f: &SliceFunction,
    units: &[ImaginaryUnit],
    samples: &[ComplexPoint],
    tol: f64,
) -> Result<RegularityReport> {
    if f.stem.smoothness() < Smoothness::C1 {
        return Err(Error::Smoothness {
            required: Smoothness::C1,
            actual: f.stem.smoothness(),
        });
    }
    let mut max_slice_residual = 0.0f64;
    for j in units {
        if j.tag() != f.tag() {
            return Err(Error::AlgebraMismatch {
                left: f.tag(),
                right: j.tag(),
            });
        }
        for z in samples {
            for t in 0..f.arity() {
                max_slice_residual = max_slice_residual.max(slice_cr_residual(f, z, j, t).norm());
            }
        }
    }
    let stem_residual = is_holomorphic(&f.stem, samples, tol)?.max_residual;
    Ok(RegularityReport {
        max_slice_residual,
        stem_residual,
        pass: max_slice_residual <= tol && stem_residual <= tol,
    })
}

/// Recovers `|∂F/∂z̄_t|` from the slice residuals at two distinct units.
///
/// With `r_J = A + J·B` where `A = ∂_α F₁ − ∂_β F₂` and `B = ∂_α F₂ + ∂_β F₁`,
/// two units determine `B = (J − K)⁻¹(r_J − r_K)` and `A = r_J − J·B`, and
/// `∂F/∂z̄_t = ½(A + iB)`.
pub fn stem_residual_from_slices(
    f: &SliceFunction,
    z: &ComplexPoint,
    j: &ImaginaryUnit,
    k: &ImaginaryUnit,
    axis: usize,
) -> Result<f64> {
    let r_j = slice_cr_residual(f, z, j, axis);
    let r_k = slice_cr_residual(f, z, k, axis);
    let d = j.value() - k.value();
    if d.norm() <= DEGENERATE_UNITS_TOL {
        return Err(Error::DegenerateUnits { distance: d.norm() });
    }
    let b = d.inverse()? * (r_j - r_k);
    let a = r_j - j.value() * b;
    Ok(0.5 * (a.norm_sqr() + b.norm_sqr()).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereZeroKind {
    Empty,
    RealZero,
    SphericalZero,
    SinglePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereZeroClass {
    pub kind: SphereZeroKind,
    /// The unique zero, present iff `kind` is `SinglePoint`.
    pub point: Option<SlicePoint>,
    /// For non-real spheres where a candidate unit was solved for, the
    /// larger of `|Re I|` and `||I| − 1|`; zero otherwise.
    pub residual: f64,
}

/// Classifies the zeros of `f` on the sphere `S_x` (a single point when `x` is real).
///
/// With `F(z) = F₁ + iF₂`, a zero `α + βI` needs `F₁ + I·F₂ = 0`. When `F₂ ≠ 0`
/// the only candidate is `I = (−F₁)·F₂⁻¹`, which is a genuine zero exactly
/// when it is a unit imaginary element.
pub fn classify_sphere_zeros(f: &SliceFunction, x: &SlicePoint, tol: f64) -> Result<SphereZeroClass> {
    check_point(f, x)?;
    let w = f.stem.evaluate(&x.stem_point());
    let empty = |residual| SphereZeroClass {
        kind: SphereZeroKind::Empty,
        point: None,
        residual,
    };
    if x.is_real() {
        let kind = if w.re.norm() <= tol {
            SphereZeroKind::RealZero
        } else {
            SphereZeroKind::Empty
        };
        return Ok(SphereZeroClass {
            kind,
            point: None,
            residual: 0.0,
        });
    }
    let (n1, n2) = (w.re.norm(), w.im.norm());
    if n1 <= tol && n2 <= tol {
        return Ok(SphereZeroClass {
            kind: SphereZeroKind::SphericalZero,
            point: None,
            residual: 0.0,
        });
    }
    if n2 <= tol {
        return Ok(empty(0.0));
    }
    let candidate = -w.re * w.im.inverse()?;
    let residual = candidate.re().abs().max((candidate.norm() - 1.0).abs());
    if residual > tol {
        return Ok(empty(residual));
    }
    let unit = ImaginaryUnit::normalized(candidate)?;
    Ok(SphereZeroClass {
        kind: SphereZeroKind::SinglePoint,
        point: Some(x.with_unit(unit)?),
        residual,
    })
}

/// `f_{axis,a} = I(F_{axis,a})`; off-axis anchor coordinates must be real.
pub fn restrict_slice(f: &SliceFunction, axis: usize, anchor: &ComplexPoint) -> Result<SliceFunction> {
    if let Some(coordinate) = non_real_anchor(axis, anchor) {
        return Err(Error::NonIntrinsicRestriction { axis, coordinate });
    }
    Ok(SliceFunction {
        stem: stem::restrict_stem(&f.stem, axis, anchor)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OsgoodReport {
    /// Largest slice residual over all one-variable restrictions.
    pub max_restriction_residual: f64,
    pub restrictions_regular: bool,
    pub joint: RegularityReport,
}

/// Checks every one-variable restriction through each anchor, then the
/// function itself. `anchors` must have real coordinates; `line_samples`
/// are the points of each restricted variable.
pub fn osgood_check(
    f: &SliceFunction,
    units: &[ImaginaryUnit],
    anchors: &[ComplexPoint],
    line_samples: &[Complex64],
    joint_samples: &[ComplexPoint],
    tol: f64,
) -> Result<OsgoodReport> {
    let line: Vec<ComplexPoint> = line_samples.iter().map(|u| ComplexPoint::new(vec![*u])).collect();
    let mut max_restriction_residual = 0.0f64;
    let mut restrictions_regular = true;
    for anchor in anchors {
        for axis in 0..f.arity() {
            let r = restrict_slice(f, axis, anchor)?;
            let report = check_slice_regular(&r, units, &line, tol)?;
            max_restriction_residual = max_restriction_residual
                .max(report.max_slice_residual)
                .max(report.stem_residual);
            restrictions_regular &= report.pass;
        }
    }
    Ok(OsgoodReport {
        max_restriction_residual,
        restrictions_regular,
        joint: check_slice_regular(f, units, joint_samples, tol)?,
    })
}
