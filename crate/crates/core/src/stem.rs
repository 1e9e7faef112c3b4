//! Stem functions `F = F₁ + iF₂ : D ⊂ Cⁿ → A ⊗ C`.
//!
//! A stem function is anything implementing [`Stem`]; [`StemFunction`] is the
//! shared, cheaply clonable handle the rest of the crate passes around.
//! Polynomials ([`StemPolynomial`]) are the workhorse: they are automatically
//! intrinsic and holomorphic and differentiate exactly. Closure-backed stems
//! cover everything else (rational test functions, antiholomorphic witnesses)
//! and fall back to central finite differences for Wirtinger derivatives.
//!
//! Axes are zero-based throughout.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraTag};
use crate::complexified::{ComplexScalar, ComplexifiedElement};
use crate::error::{Error, Result};

/// Default central-difference step on `α_t` and `β_t`.
pub const FD_STEP: f64 = 1e-5;

/// Largest exponent accepted from serialized polynomials.
pub const MAX_EXPONENT: u32 = 1024;

/// Largest arity accepted from serialized polynomials.
pub const MAX_ARITY: usize = 64;

/// Off-axis anchor coordinates with `|Im| <= ANCHOR_REAL_TOL` count as real.
pub const ANCHOR_REAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Smoothness {
    C0,
    C1,
    Analytic,
}

/// A point `z = (z₁, …, zₙ) ∈ Cⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint(pub Vec<Complex64>);

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    /// `α + iβ`.
    pub fn from_parts(alpha: &[f64], beta: &[f64]) -> Self {
        Self(
            alpha
                .iter()
                .zip(beta)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Coordinatewise complex conjugate.
    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }
}

impl Deref for ComplexPoint {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for ComplexPoint {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// `μ = (μ₁, …, μₙ) ∈ Nⁿ`, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(arity: usize) -> Self {
        Self(vec![0; arity])
    }

    /// `e_axis`, the exponent of the single variable `z_axis`.
    pub fn unit(arity: usize, axis: usize) -> Self {
        let mut m = vec![0; arity];
        m[axis] = 1;
        Self(m)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// `(∂F/∂z_t, ∂F/∂z̄_t)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wirtinger {
    pub dz: ComplexifiedElement,
    pub dzbar: ComplexifiedElement,
}

type Predicate = Arc<dyn Fn(&[Complex64]) -> bool + Send + Sync>;

/// A domain predicate plus the bounding cube `|Re z_k|, |Im z_k| <= half_width`
/// used to draw validation samples. Topology is never checked.
#[derive(Clone)]
pub struct Domain {
    predicate: Option<Predicate>,
    half_width: f64,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("predicate", &self.predicate.is_some())
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::everywhere()
    }
}

impl Domain {
    pub fn everywhere() -> Self {
        Self {
            predicate: None,
            half_width: 1.0,
        }
    }

    pub fn new(half_width: f64, predicate: impl Fn(&[Complex64]) -> bool + Send + Sync + 'static) -> Self {
        Self {
            predicate: Some(Arc::new(predicate)),
            half_width,
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.predicate.as_ref().is_none_or(|p| p(z))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Up to `count` deterministic points of the bounding cube inside the domain.
    pub fn samples(&self, arity: usize, count: usize, seed: u64) -> Vec<ComplexPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = self.half_width;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count * 4 {
            if out.len() == count {
                break;
            }
            let z: Vec<Complex64> = (0..arity)
                .map(|_| Complex64::new(rng.random_range(-w..w), rng.random_range(-w..w)))
                .collect();
            if self.contains(&z) {
                out.push(ComplexPoint(z));
            }
        }
        out
    }
}

/// A stem function. Evaluators must be pure and re-entrant.
pub trait Stem: Send + Sync {
    fn arity(&self) -> usize;

    fn tag(&self) -> AlgebraTag;

    fn smoothness(&self) -> Smoothness;

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement;

    /// Closed-form Wirtinger derivatives, when available.
    fn wirtinger_exact(&self, _z: &[Complex64], _axis: usize) -> Option<Wirtinger> {
        None
    }

    fn domain(&self) -> Domain {
        Domain::everywhere()
    }

    fn as_polynomial(&self) -> Option<&StemPolynomial> {
        None
    }

    /// `false` when the construction is known not to be intrinsic
    /// (restrictions with non-real anchors).
    fn intrinsic_flag(&self) -> bool {
        true
    }
}

/// Shared handle to a [`Stem`].
#[derive(Clone)]
pub struct StemFunction(Arc<dyn Stem>);

impl fmt::Debug for StemFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_polynomial() {
            Some(p) => f.debug_tuple("StemFunction").field(p).finish(),
            None => write!(
                f,
                "StemFunction(<{} arity {} {:?}>)",
                self.tag(),
                self.arity(),
                self.smoothness()
            ),
        }
    }
}

impl StemFunction {
    pub fn new(stem: impl Stem + 'static) -> Self {
        Self(Arc::new(stem))
    }

    pub fn polynomial(p: StemPolynomial) -> Self {
        Self::new(p)
    }

    pub fn constant(tag: AlgebraTag, arity: usize, value: ComplexifiedElement) -> Self {
        Self::from_fn(arity, tag, Smoothness::Analytic, move |_| value).with_wirtinger(move |_, _| {
            let zero = ComplexifiedElement::zero(tag);
            Wirtinger { dz: zero, dzbar: zero }
        })
        .build()
    }

    /// A closure-backed stem; chain [`ClosureStem`] builders and convert with `.into()`
    /// or use [`ClosureStem::build`].
    pub fn from_fn(
        arity: usize,
        tag: AlgebraTag,
        smoothness: Smoothness,
        f: impl Fn(&[Complex64]) -> ComplexifiedElement + Send + Sync + 'static,
    ) -> ClosureStem {
        ClosureStem {
            arity,
            tag,
            smoothness,
            eval: Arc::new(f),
            wirtinger: None,
            domain: Domain::everywhere(),
        }
    }

    pub fn arity(&self) -> usize {
        self.0.arity()
    }

    pub fn tag(&self) -> AlgebraTag {
        self.0.tag()
    }

    pub fn smoothness(&self) -> Smoothness {
        self.0.smoothness()
    }

    pub fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        self.0.evaluate(z)
    }

    pub fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        self.0.wirtinger_exact(z, axis)
    }

    pub fn domain(&self) -> Domain {
        self.0.domain()
    }

    pub fn as_polynomial(&self) -> Option<&StemPolynomial> {
        self.0.as_polynomial()
    }

    pub fn intrinsic_flag(&self) -> bool {
        self.0.intrinsic_flag()
    }

    /// `F + G`.
    pub fn add(&self, other: &StemFunction) -> Result<StemFunction> {
        check_compatible(self, other)?;
        if let (Some(p), Some(q)) = (self.as_polynomial(), other.as_polynomial()) {
            return Ok(StemFunction::polynomial(p.add(q)?));
        }
        Ok(StemFunction::new(SumStem {
            left: self.clone(),
            right: other.clone(),
            scale: 1.0,
        }))
    }

    /// `s·F` for real `s`.
    pub fn scale(&self, s: f64) -> StemFunction {
        if let Some(p) = self.as_polynomial() {
            return StemFunction::polynomial(p.scale(s));
        }
        StemFunction::new(SumStem {
            left: self.clone(),
            right: StemFunction::constant(self.tag(), self.arity(), ComplexifiedElement::zero(self.tag())),
            scale: s,
        })
    }
}

impl From<StemPolynomial> for StemFunction {
    fn from(p: StemPolynomial) -> Self {
        StemFunction::polynomial(p)
    }
}

fn check_compatible(f: &StemFunction, g: &StemFunction) -> Result<()> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch {
            left: f.arity(),
            right: g.arity(),
        });
    }
    if f.tag() != g.tag() {
        return Err(Error::AlgebraMismatch {
            left: f.tag(),
            right: g.tag(),
        });
    }
    Ok(())
}

type Evaluator = Arc<dyn Fn(&[Complex64]) -> ComplexifiedElement + Send + Sync>;
type WirtingerEvaluator = Arc<dyn Fn(&[Complex64], usize) -> Wirtinger + Send + Sync>;

/// Stem backed by user closures.
#[derive(Clone)]
pub struct ClosureStem {
    arity: usize,
    tag: AlgebraTag,
    smoothness: Smoothness,
    eval: Evaluator,
    wirtinger: Option<WirtingerEvaluator>,
    domain: Domain,
}

impl ClosureStem {
    pub fn with_wirtinger(
        mut self,
        w: impl Fn(&[Complex64], usize) -> Wirtinger + Send + Sync + 'static,
    ) -> Self {
        self.wirtinger = Some(Arc::new(w));
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn build(self) -> StemFunction {
        StemFunction::new(self)
    }
}

impl From<ClosureStem> for StemFunction {
    fn from(c: ClosureStem) -> Self {
        StemFunction::new(c)
    }
}

impl Stem for ClosureStem {
    fn arity(&self) -> usize {
        self.arity
    }

    fn tag(&self) -> AlgebraTag {
        self.tag
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        (self.eval)(z)
    }

    fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        self.wirtinger.as_ref().map(|w| w(z, axis))
    }

    fn domain(&self) -> Domain {
        self.domain.clone()
    }
}

/// `scale·(left + right)`.
struct SumStem {
    left: StemFunction,
    right: StemFunction,
    scale: f64,
}

impl Stem for SumStem {
    fn arity(&self) -> usize {
        self.left.arity()
    }

    fn tag(&self) -> AlgebraTag {
        self.left.tag()
    }

    fn smoothness(&self) -> Smoothness {
        self.left.smoothness().min(self.right.smoothness())
    }

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        (self.left.evaluate(z) + self.right.evaluate(z)).scale(self.scale)
    }

    fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        let a = self.left.wirtinger_exact(z, axis)?;
        let b = self.right.wirtinger_exact(z, axis)?;
        Some(Wirtinger {
            dz: (a.dz + b.dz).scale(self.scale),
            dzbar: (a.dzbar + b.dzbar).scale(self.scale),
        })
    }

    fn domain(&self) -> Domain {
        let (l, r) = (self.left.domain(), self.right.domain());
        let half_width = l.half_width().min(r.half_width());
        Domain::new(half_width, move |z| l.contains(z) && r.contains(z))
    }

    fn intrinsic_flag(&self) -> bool {
        self.left.intrinsic_flag() && self.right.intrinsic_flag()
    }
}

/// Pointwise product `z ↦ F(z)G(z)`.
struct ProductStem {
    left: StemFunction,
    right: StemFunction,
}

impl Stem for ProductStem {
    fn arity(&self) -> usize {
        self.left.arity()
    }

    fn tag(&self) -> AlgebraTag {
        self.left.tag()
    }

    fn smoothness(&self) -> Smoothness {
        self.left.smoothness().min(self.right.smoothness())
    }

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        self.left.evaluate(z) * self.right.evaluate(z)
    }

    fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        let a = self.left.wirtinger_exact(z, axis)?;
        let b = self.right.wirtinger_exact(z, axis)?;
        let f = self.left.evaluate(z);
        let g = self.right.evaluate(z);
        Some(Wirtinger {
            dz: a.dz * g + f * b.dz,
            dzbar: a.dzbar * g + f * b.dzbar,
        })
    }

    fn domain(&self) -> Domain {
        let (l, r) = (self.left.domain(), self.right.domain());
        let half_width = l.half_width().min(r.half_width());
        Domain::new(half_width, move |z| l.contains(z) && r.contains(z))
    }

    fn intrinsic_flag(&self) -> bool {
        self.left.intrinsic_flag() && self.right.intrinsic_flag()
    }
}

/// One-variable slice `u ↦ F(a₁, …, u, …, aₙ)`.
struct RestrictedStem {
    parent: StemFunction,
    axis: usize,
    anchor: Vec<Complex64>,
    intrinsic: bool,
}

impl RestrictedStem {
    fn full_point(&self, u: Complex64) -> Vec<Complex64> {
        let mut z = self.anchor.clone();
        z[self.axis] = u;
        z
    }
}

impl Stem for RestrictedStem {
    fn arity(&self) -> usize {
        1
    }

    fn tag(&self) -> AlgebraTag {
        self.parent.tag()
    }

    fn smoothness(&self) -> Smoothness {
        self.parent.smoothness()
    }

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        self.parent.evaluate(&self.full_point(z[0]))
    }

    fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        if axis != 0 {
            return None;
        }
        self.parent.wirtinger_exact(&self.full_point(z[0]), self.axis)
    }

    fn domain(&self) -> Domain {
        let parent = self.parent.domain();
        let anchor = self.anchor.clone();
        let axis = self.axis;
        Domain::new(parent.half_width(), move |u| {
            let mut z = anchor.clone();
            z[axis] = u[0];
            parent.contains(&z)
        })
    }

    fn intrinsic_flag(&self) -> bool {
        self.intrinsic && self.parent.intrinsic_flag()
    }
}

/// `F(z) = Σ_μ z^μ a_μ` with right coefficients `a_μ ∈ A`.
#[derive(Clone, Debug, PartialEq)]
pub struct StemPolynomial {
    arity: usize,
    tag: AlgebraTag,
    terms: BTreeMap<MultiIndex, AlgebraElement>,
}

impl StemPolynomial {
    pub fn zero(tag: AlgebraTag, arity: usize) -> Self {
        Self {
            arity,
            tag,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(value: AlgebraElement, arity: usize) -> Self {
        let mut p = Self::zero(value.tag(), arity);
        p.add_term(MultiIndex::zero(arity), value);
        p
    }

    /// `z_axis · coeff`.
    pub fn monomial(arity: usize, exponents: &[u32], coeff: AlgebraElement) -> Self {
        let mut p = Self::zero(coeff.tag(), arity);
        p.add_term(MultiIndex::new(exponents.to_vec()), coeff);
        p
    }

    pub fn from_terms(
        tag: AlgebraTag,
        arity: usize,
        terms: impl IntoIterator<Item = (MultiIndex, AlgebraElement)>,
    ) -> Self {
        let mut p = Self::zero(tag, arity);
        for (mu, a) in terms {
            p.add_term(mu, a);
        }
        p
    }

    /// Adds `z^μ a` to the polynomial, merging with an existing `μ` term.
    pub fn add_term(&mut self, mu: MultiIndex, a: AlgebraElement) {
        assert_eq!(mu.arity(), self.arity, "multi-index arity");
        assert_eq!(a.tag(), self.tag, "coefficient algebra");
        *self.terms.entry(mu).or_insert_with(|| AlgebraElement::zero(a.tag())) += a;
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, AlgebraElement> {
        &self.terms
    }

    pub fn coefficient(&self, mu: &[u32]) -> Option<&AlgebraElement> {
        self.terms.get(&MultiIndex::new(mu.to_vec()))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &StemPolynomial) -> Result<StemPolynomial> {
        self.check_compatible(other)?;
        let mut p = self.clone();
        for (mu, a) in &other.terms {
            p.add_term(mu.clone(), *a);
        }
        Ok(p)
    }

    pub fn scale(&self, s: f64) -> StemPolynomial {
        let mut p = self.clone();
        for a in p.terms.values_mut() {
            *a = *a * s;
        }
        p
    }

    /// Coefficient convolution `c_γ = Σ_{μ+ν=γ} a_μ b_ν`, factor order kept.
    pub fn convolve(&self, other: &StemPolynomial) -> Result<StemPolynomial> {
        self.check_compatible(other)?;
        let mut p = Self::zero(self.tag, self.arity);
        for (mu, a) in &self.terms {
            for (nu, b) in &other.terms {
                p.add_term(mu.add(nu), *a * *b);
            }
        }
        Ok(p)
    }

    fn check_compatible(&self, other: &StemPolynomial) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        if self.tag != other.tag {
            return Err(Error::AlgebraMismatch {
                left: self.tag,
                right: other.tag,
            });
        }
        Ok(())
    }

    /// Per-variable power tables `z_t^k` for `k <= max exponent in variable t`.
    fn powers(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut max = vec![0u32; self.arity];
        for mu in self.terms.keys() {
            for (m, &e) in max.iter_mut().zip(mu.exponents()) {
                *m = (*m).max(e);
            }
        }
        max.iter()
            .zip(z)
            .map(|(&m, &zt)| {
                let mut pw = Vec::with_capacity(m as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                pw.push(acc);
                for _ in 0..m {
                    acc *= zt;
                    pw.push(acc);
                }
                pw
            })
            .collect()
    }

    fn monomial_value(powers: &[Vec<Complex64>], mu: &MultiIndex) -> Complex64 {
        mu.exponents()
            .iter()
            .zip(powers)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, pw)| acc * pw[e as usize])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolynomialJson::from(self)).expect("polynomial serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&PolynomialJson::from(self)).expect("polynomial serializes")
    }

    /// Parses `{"arity": n, "algebra": "octonion"|"quaternion", "terms": [{"mu": [..], "coeff": [..]}]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PolynomialJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

impl Stem for StemPolynomial {
    fn arity(&self) -> usize {
        self.arity
    }

    fn tag(&self) -> AlgebraTag {
        self.tag
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Analytic
    }

    fn evaluate(&self, z: &[Complex64]) -> ComplexifiedElement {
        let powers = self.powers(z);
        let mut out = ComplexifiedElement::zero(self.tag);
        for (mu, a) in &self.terms {
            let c = Self::monomial_value(&powers, mu);
            out.re += *a * c.re;
            out.im += *a * c.im;
        }
        out
    }

    fn wirtinger_exact(&self, z: &[Complex64], axis: usize) -> Option<Wirtinger> {
        let powers = self.powers(z);
        let mut dz = ComplexifiedElement::zero(self.tag);
        for (mu, a) in &self.terms {
            let e = mu.exponents()[axis];
            if e == 0 {
                continue;
            }
            let mut lowered = mu.clone();
            lowered.0[axis] -= 1;
            let c = Self::monomial_value(&powers, &lowered) * f64::from(e);
            dz.re += *a * c.re;
            dz.im += *a * c.im;
        }
        Some(Wirtinger {
            dz,
            dzbar: ComplexifiedElement::zero(self.tag),
        })
    }

    fn as_polynomial(&self) -> Option<&StemPolynomial> {
        Some(self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    mu: Vec<u32>,
    coeff: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialJson {
    arity: usize,
    algebra: AlgebraTag,
    terms: Vec<TermJson>,
}

impl From<&StemPolynomial> for PolynomialJson {
    fn from(p: &StemPolynomial) -> Self {
        PolynomialJson {
            arity: p.arity,
            algebra: p.tag,
            terms: p
                .terms
                .iter()
                .map(|(mu, a)| TermJson {
                    mu: mu.exponents().to_vec(),
                    coeff: a.coeffs().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for StemPolynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        if raw.arity == 0 || raw.arity > MAX_ARITY {
            return Err(Error::Parse(format!(
                "arity must be in 1..={MAX_ARITY}, got {}",
                raw.arity
            )));
        }
        let mut terms = BTreeMap::new();
        for (i, t) in raw.terms.into_iter().enumerate() {
            if t.mu.len() != raw.arity {
                return Err(Error::Parse(format!(
                    "terms[{i}].mu has {} entries, arity is {}",
                    t.mu.len(),
                    raw.arity
                )));
            }
            if let Some(e) = t.mu.iter().find(|&&e| e > MAX_EXPONENT) {
                return Err(Error::Parse(format!(
                    "terms[{i}].mu exponent {e} exceeds {MAX_EXPONENT}"
                )));
            }
            if t.coeff.iter().any(|c| !c.is_finite()) {
                return Err(Error::Parse(format!("terms[{i}].coeff is not finite")));
            }
            let a = AlgebraElement::from_coeffs(raw.algebra, &t.coeff)
                .map_err(|e| Error::Parse(format!("terms[{i}].coeff: {e}")))?;
            if terms.insert(MultiIndex::new(t.mu), a).is_some() {
                return Err(Error::Parse(format!("terms[{i}].mu is a duplicate")));
            }
        }
        Ok(StemPolynomial {
            arity: raw.arity,
            tag: raw.algebra,
            terms,
        })
    }
}

pub fn evaluate_stem(f: &StemFunction, z: &ComplexPoint) -> ComplexifiedElement {
    f.evaluate(z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntrinsicReport {
    /// `max |F(z̄) − conj(F(z))|`.
    pub max_violation: f64,
    /// `max(|F₁(z̄) − F₁(z)|, |F₂(z̄) + F₂(z)|)`.
    pub max_even_odd_violation: f64,
    pub pass: bool,
}

pub fn check_intrinsic(f: &StemFunction, samples: &[ComplexPoint], tol: f64) -> IntrinsicReport {
    let mut max_violation = 0.0f64;
    let mut max_even_odd = 0.0f64;
    for z in samples {
        let fz = f.evaluate(z);
        let fzbar = f.evaluate(&z.conj());
        max_violation = max_violation.max(fzbar.dist(&fz.complex_conjugate()));
        let even = fzbar.re.dist(&fz.re);
        let odd = (fzbar.im + fz.im).norm();
        max_even_odd = max_even_odd.max(even).max(odd);
    }
    IntrinsicReport {
        max_violation,
        max_even_odd_violation: max_even_odd,
        pass: max_violation <= tol,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StemDecomposition {
    pub f1: AlgebraElement,
    pub f2: AlgebraElement,
    /// `F^k = F₁^k + iF₂^k`, so that `F = Σ_k F^k e_k`.
    pub components: Vec<ComplexScalar>,
}

pub fn decompose_stem(f: &StemFunction, z: &ComplexPoint) -> StemDecomposition {
    let w = f.evaluate(z);
    StemDecomposition {
        f1: w.re,
        f2: w.im,
        components: w.components(),
    }
}

/// Wirtinger derivatives along `axis`: exact when the stem provides them,
/// otherwise central differences with step [`FD_STEP`].
pub fn wirtinger(f: &StemFunction, z: &ComplexPoint, axis: usize) -> Result<Wirtinger> {
    wirtinger_with_step(f, z, axis, FD_STEP)
}

pub fn wirtinger_with_step(f: &StemFunction, z: &ComplexPoint, axis: usize, step: f64) -> Result<Wirtinger> {
    check_axis(f, axis)?;
    if f.smoothness() < Smoothness::C1 {
        return Err(Error::Smoothness {
            required: Smoothness::C1,
            actual: f.smoothness(),
        });
    }
    if let Some(w) = f.wirtinger_exact(z, axis) {
        return Ok(w);
    }
    Ok(wirtinger_fd(f, z, axis, step))
}

/// Central-difference Wirtinger derivatives, ignoring any closed form.
pub fn wirtinger_fd(f: &StemFunction, z: &[Complex64], axis: usize, step: f64) -> Wirtinger {
    let shifted = |delta: Complex64| {
        let mut p = z.to_vec();
        p[axis] += delta;
        f.evaluate(&p)
    };
    let h = Complex64::new(step, 0.0);
    let ih = Complex64::new(0.0, step);
    let d_alpha = (shifted(h) - shifted(-h)).scale(0.5 / step);
    let d_beta = (shifted(ih) - shifted(-ih)).scale(0.5 / step);
    let i_d_beta = d_beta.scale_complex(Complex64::new(0.0, 1.0));
    Wirtinger {
        dz: (d_alpha - i_d_beta).scale(0.5),
        dzbar: (d_alpha + i_d_beta).scale(0.5),
    }
}

fn check_axis(f: &StemFunction, axis: usize) -> Result<()> {
    if axis >= f.arity() {
        return Err(Error::AxisOutOfRange {
            axis,
            arity: f.arity(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolomorphyReport {
    /// `max_{z,t} |∂F/∂z̄_t|`.
    pub max_residual: f64,
    pub pass: bool,
}

pub fn is_holomorphic(f: &StemFunction, samples: &[ComplexPoint], tol: f64) -> Result<HolomorphyReport> {
    if f.as_polynomial().is_some() {
        return Ok(HolomorphyReport {
            max_residual: 0.0,
            pass: true,
        });
    }
    let mut max_residual = 0.0f64;
    for z in samples {
        for t in 0..f.arity() {
            max_residual = max_residual.max(wirtinger(f, z, t)?.dzbar.norm());
        }
    }
    Ok(HolomorphyReport {
        max_residual,
        pass: max_residual <= tol,
    })
}

/// `z ↦ F(z)G(z)`; polynomial inputs give a polynomial (coefficient convolution).
pub fn stem_product(f: &StemFunction, g: &StemFunction) -> Result<StemFunction> {
    check_compatible(f, g)?;
    if let (Some(p), Some(q)) = (f.as_polynomial(), g.as_polynomial()) {
        return Ok(StemFunction::polynomial(p.convolve(q)?));
    }
    stem_product_pointwise(f, g)
}

/// `z ↦ F(z)G(z)`, always evaluated pointwise even for polynomial inputs.
pub fn stem_product_pointwise(f: &StemFunction, g: &StemFunction) -> Result<StemFunction> {
    check_compatible(f, g)?;
    Ok(StemFunction::new(ProductStem {
        left: f.clone(),
        right: g.clone(),
    }))
}

/// `u ↦ F(a₁, …, a_{axis−1}, u, a_{axis+1}, …, aₙ)`. The anchor's own
/// `axis` coordinate is ignored. The result is flagged non-intrinsic unless
/// every off-axis anchor coordinate is real.
pub fn restrict_stem(f: &StemFunction, axis: usize, anchor: &ComplexPoint) -> Result<StemFunction> {
    check_axis(f, axis)?;
    if anchor.arity() != f.arity() {
        return Err(Error::ArityMismatch {
            left: f.arity(),
            right: anchor.arity(),
        });
    }
    let intrinsic = non_real_anchor(axis, anchor).is_none();
    Ok(StemFunction::new(RestrictedStem {
        parent: f.clone(),
        axis,
        anchor: anchor.0.clone(),
        intrinsic,
    }))
}

/// First off-axis coordinate of `anchor` that is not real.
pub(crate) fn non_real_anchor(axis: usize, anchor: &[Complex64]) -> Option<usize> {
    anchor
        .iter()
        .enumerate()
        .find(|(k, a)| *k != axis && a.im.abs() > ANCHOR_REAL_TOL)
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sample_element_with;

    const O: AlgebraTag = AlgebraTag::Octonion;

    fn e(i: usize) -> AlgebraElement {
        AlgebraElement::basis(O, i)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(coords: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint(coords.iter().map(|&(a, b)| c(a, b)).collect())
    }

    /// `z̄₁ a`, antiholomorphic.
    fn zbar(a: AlgebraElement) -> StemFunction {
        StemFunction::from_fn(1, O, Smoothness::Analytic, move |z| {
            let w = z[0].conj();
            ComplexifiedElement::new(a * w.re, a * w.im)
        })
        .build()
    }

    #[test]
    fn constant_and_linear_evaluation() {
        let k = ComplexifiedElement::new(e(2), e(7));
        let f = StemFunction::constant(O, 2, k);
        assert_eq!(f.evaluate(&[c(1.0, 2.0), c(-3.0, 0.5)]), k);

        let p: StemFunction = StemPolynomial::monomial(2, &[1, 0], e(0)).into();
        let w = evaluate_stem(&p, &pt(&[(2.0, 3.0), (0.0, 0.0)]));
        assert_eq!(w, ComplexifiedElement::new(e(0) * 2.0, e(0) * 3.0));
    }

    #[test]
    fn product_monomial_evaluation() {
        let a = e(1) + e(6) * 0.5;
        let p: StemFunction = StemPolynomial::monomial(2, &[1, 1], a).into();
        let w = p.evaluate(&[c(1.0, 1.0), c(2.0, -1.0)]);
        // (1+i)(2-i) = 3+i
        assert!(w.dist(&ComplexifiedElement::new(a * 3.0, a)) < 1e-15);
    }

    #[test]
    fn intrinsic_examples() {
        let samples = Domain::everywhere().samples(1, 32, 1);
        let p: StemFunction = StemPolynomial::monomial(1, &[1], e(3)).into();
        let r = check_intrinsic(&p, &samples, 1e-12);
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);

        let r = check_intrinsic(&zbar(e(3)), &samples, 1e-12);
        assert!(r.pass && r.max_violation == 0.0);

        let ie0 = StemFunction::constant(O, 1, ComplexifiedElement::new(AlgebraElement::zero(O), e(0)));
        let r = check_intrinsic(&ie0, &samples, 1e-12);
        assert!(!r.pass);
        assert!((r.max_violation - 2.0).abs() < 1e-15);
        assert!(r.max_even_odd_violation > 1.0);
    }

    #[test]
    fn decomposition_examples() {
        let f = StemFunction::constant(O, 1, ComplexifiedElement::new(e(0), e(1)));
        let d = decompose_stem(&f, &pt(&[(0.3, 0.4)]));
        assert_eq!(d.f1, e(0));
        assert_eq!(d.f2, e(1));
        assert_eq!(d.components[0], c(1.0, 0.0));
        assert_eq!(d.components[1], c(0.0, 1.0));
        assert!(d.components[2..].iter().all(|z| *z == c(0.0, 0.0)));

        let g: StemFunction = StemPolynomial::monomial(1, &[1], e(2)).into();
        let d = decompose_stem(&g, &pt(&[(2.0, 1.0)]));
        for (k, comp) in d.components.iter().enumerate() {
            let expect = if k == 2 { c(2.0, 1.0) } else { c(0.0, 0.0) };
            assert_eq!(*comp, expect);
        }
        let back = ComplexifiedElement::from_components(O, &d.components).unwrap();
        assert_eq!(back, g.evaluate(&[c(2.0, 1.0)]));
    }

    #[test]
    fn wirtinger_of_linear_and_conjugate() {
        let a = e(1) * 2.0 - e(4);
        let z = pt(&[(0.7, -0.2)]);
        let p: StemFunction = StemPolynomial::monomial(1, &[1], a).into();
        let w = wirtinger(&p, &z, 0).unwrap();
        assert_eq!(w.dz, ComplexifiedElement::from_real(a));
        assert_eq!(w.dzbar, ComplexifiedElement::zero(O));

        let w = wirtinger(&zbar(a), &z, 0).unwrap();
        assert!(w.dz.norm() < 1e-9);
        assert!(w.dzbar.dist(&ComplexifiedElement::from_real(a)) < 1e-9);
    }

    #[test]
    fn wirtinger_of_modulus_squared() {
        let a = e(5);
        let f = StemFunction::from_fn(1, O, Smoothness::Analytic, move |z| {
            let m = z[0].norm_sqr();
            ComplexifiedElement::from_real(a * m)
        })
        .build();
        let w = wirtinger(&f, &pt(&[(2.0, 1.0)]), 0).unwrap();
        // product rule: d/dz (z z̄) = z̄, d/dz̄ = z
        let expect_dz = ComplexifiedElement::new(a * 2.0, a * -1.0);
        let expect_dzbar = ComplexifiedElement::new(a * 2.0, a);
        assert!(w.dz.dist(&expect_dz) < 1e-9);
        assert!(w.dzbar.dist(&expect_dzbar) < 1e-9);
    }

    #[test]
    fn axis_and_smoothness_errors() {
        let p: StemFunction = StemPolynomial::monomial(2, &[1, 0], e(0)).into();
        assert!(matches!(
            wirtinger(&p, &pt(&[(0.0, 0.0), (0.0, 0.0)]), 2),
            Err(Error::AxisOutOfRange { axis: 2, arity: 2 })
        ));
        let rough = StemFunction::from_fn(1, O, Smoothness::C0, |_| ComplexifiedElement::zero(O)).build();
        assert!(matches!(
            wirtinger(&rough, &pt(&[(0.0, 0.0)]), 0),
            Err(Error::Smoothness { .. })
        ));
    }

    #[test]
    fn holomorphy_examples() {
        let samples = Domain::everywhere().samples(1, 16, 2);
        let p: StemFunction = StemPolynomial::monomial(1, &[3], e(6)).into();
        let r = is_holomorphic(&p, &samples, 0.0).unwrap();
        assert!(r.pass && r.max_residual == 0.0);

        let a = e(2) * 3.0;
        let r = is_holomorphic(&zbar(a), &samples, 1e-6).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - a.norm()).abs() < 1e-8);
    }

    #[test]
    fn truncated_exponential_passes_by_finite_differences() {
        let a = e(0) + e(3) * 0.5;
        let series = StemPolynomial::from_terms(
            O,
            1,
            (0..=10u32).map(|k| {
                let fact: f64 = (1..=k).map(f64::from).product();
                (MultiIndex::new(vec![k]), a * (1.0 / fact))
            }),
        );
        // hide the polynomial structure so the finite-difference path runs
        let opaque = StemFunction::from_fn(1, O, Smoothness::Analytic, move |z| series.evaluate(z)).build();
        let samples = Domain::everywhere().samples(1, 32, 3);
        let r = is_holomorphic(&opaque, &samples, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn products() {
        let one = StemFunction::constant(O, 1, ComplexifiedElement::one(O));
        let g: StemFunction = StemPolynomial::monomial(1, &[2], e(4)).into();
        let fg = stem_product(&one, &g).unwrap();
        let z = [c(0.3, -1.1)];
        assert!(fg.evaluate(&z).dist(&g.evaluate(&z)) < 1e-15);

        let (a, b) = (e(1) + e(2), e(5) - e(7));
        let p: StemFunction = StemPolynomial::monomial(1, &[1], a).into();
        let q: StemFunction = StemPolynomial::monomial(1, &[1], b).into();
        let pq = stem_product(&p, &q).unwrap();
        let poly = pq.as_polynomial().unwrap();
        assert_eq!(poly.terms().len(), 1);
        assert_eq!(poly.coefficient(&[2]), Some(&(a * b)));

        let f = StemPolynomial::from_terms(
            O,
            2,
            [(MultiIndex::new(vec![1, 0]), e(1)), (MultiIndex::new(vec![0, 0]), e(2))],
        );
        let g = StemPolynomial::monomial(2, &[0, 1], e(3));
        let h = stem_product(&f.into(), &g.into()).unwrap();
        let h = h.as_polynomial().unwrap();
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.coefficient(&[1, 1]), Some(&(e(1) * e(3))));
        assert_eq!(h.coefficient(&[0, 1]), Some(&(e(2) * e(3))));
        assert_eq!(e(1) * e(3), -e(2));
        assert_eq!(e(2) * e(3), e(1));
    }

    #[test]
    fn product_errors() {
        let p: StemFunction = StemPolynomial::monomial(1, &[1], e(1)).into();
        let q: StemFunction = StemPolynomial::monomial(2, &[1, 0], e(1)).into();
        assert!(matches!(stem_product(&p, &q), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn restriction() {
        let a = e(3);
        let f: StemFunction = StemPolynomial::monomial(2, &[1, 1], a).into();
        let r = restrict_stem(&f, 0, &pt(&[(0.0, 0.0), (3.0, 0.0)])).unwrap();
        assert!(r.intrinsic_flag());
        let u = c(0.4, -0.9);
        let three_u = u * 3.0;
        assert!(r.evaluate(&[u]).dist(&ComplexifiedElement::new(a * three_u.re, a * three_u.im)) < 1e-15);
        assert_eq!(r.evaluate(&[u]), f.evaluate(&[u, c(3.0, 0.0)]));
        let samples = Domain::everywhere().samples(1, 16, 4);
        assert!(check_intrinsic(&r, &samples, 1e-12).pass);

        let r = restrict_stem(&f, 0, &pt(&[(0.0, 0.0), (0.0, 1.0)])).unwrap();
        assert!(!r.intrinsic_flag());
        assert!(!check_intrinsic(&r, &samples, 1e-12).pass);
        assert!(restrict_stem(&f, 2, &pt(&[(0.0, 0.0), (0.0, 0.0)])).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = StemPolynomial::from_terms(
            O,
            2,
            [
                (MultiIndex::new(vec![2, 1]), sample_element_with(O, &mut rng)),
                (MultiIndex::new(vec![0, 0]), sample_element_with(O, &mut rng)),
            ],
        );
        assert_eq!(StemPolynomial::from_json(&p.to_json()).unwrap(), p);

        let bad = [
            r#"{"arity": 0, "algebra": "octonion", "terms": []}"#,
            r#"{"arity": 1, "algebra": "sedenion", "terms": []}"#,
            r#"{"arity": 1, "algebra": "quaternion", "terms": [{"mu": [1, 2], "coeff": [0,0,0,0]}]}"#,
            r#"{"arity": 1, "algebra": "quaternion", "terms": [{"mu": [1], "coeff": [0,0,0]}]}"#,
            r#"{"arity": 1, "algebra": "quaternion", "terms": [{"mu": [99999], "coeff": [0,0,0,0]}]}"#,
            r#"{"arity": 1, "algebra": "quaternion", "terms": [{"mu": [1], "coeff": [0,0,0,0]}, {"mu": [1], "coeff": [1,0,0,0]}]}"#,
            r#"{"arity": 1, "algebra": "quaternion", "terms": [], "extra": 1}"#,
            "not json",
        ];
        for s in bad {
            assert!(matches!(StemPolynomial::from_json(s), Err(Error::Parse(_))), "{s}");
        }
    }
}
