//! Quaternions and octonions via the Cayley–Dickson construction.
//!
//! Both algebras share one element type. A quaternion occupies the first four
//! coefficients of the same storage an octonion uses, and the quaternion
//! multiplication table is exactly the upper-left 4×4 block of the octonion
//! table, since the doubling `C → H → O` embeds each stage in the next.
//!
//! The doubling rule is `(a, b)(c, d) = (ac − d̄b, da + bc̄)`. The basis table
//! it induces is computed once on first use and frozen; see [`basis_table`].

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on coefficients used by default comparisons.
pub const TOL: f64 = 1e-12;

/// Tolerance on the real part and norm of an [`ImaginaryUnit`].
pub const TOL_UNIT: f64 = 1e-12;

/// Squared norms below this are treated as zero by [`AlgebraElement::inverse`].
pub const TOL_ZERO: f64 = 1e-300;

pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraTag {
    Quaternion,
    Octonion,
}

impl AlgebraTag {
    pub const fn dim(self) -> usize {
        match self {
            AlgebraTag::Quaternion => 4,
            AlgebraTag::Octonion => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgebraTag::Quaternion => "quaternion",
            AlgebraTag::Octonion => "octonion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quaternion" | "H" => Some(AlgebraTag::Quaternion),
            "octonion" | "O" => Some(AlgebraTag::Octonion),
            _ => None,
        }
    }

    pub fn all() -> [AlgebraTag; 2] {
        [AlgebraTag::Octonion, AlgebraTag::Quaternion]
    }
}

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One entry of the basis multiplication table: `e_i e_j = sign · e_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisProduct {
    pub sign: i8,
    pub index: u8,
}

/// The frozen 8×8 table of basis products `e_i e_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisTable {
    entries: [[BasisProduct; MAX_DIM]; MAX_DIM],
}

impl BasisTable {
    pub fn get(&self, i: usize, j: usize) -> BasisProduct {
        self.entries[i][j]
    }

    /// Renders the `dim × dim` block for `tag`, one row per line, entries
    /// written as signed basis indices (`-3` means `−e_3`).
    pub fn render(&self, tag: AlgebraTag) -> String {
        let dim = tag.dim();
        let mut out = String::new();
        out.push_str("   *");
        for j in 0..dim {
            out.push_str(&format!(" {:>4}", format!("e{j}")));
        }
        out.push('\n');
        for i in 0..dim {
            out.push_str(&format!("{:>4}", format!("e{i}")));
            for j in 0..dim {
                let p = self.entries[i][j];
                let sign = if p.sign < 0 { "-" } else { "" };
                out.push_str(&format!(" {:>4}", format!("{sign}e{}", p.index)));
            }
            out.push('\n');
        }
        out
    }
}

static BASIS_TABLE: LazyLock<BasisTable> = LazyLock::new(build_basis_table);

/// The basis multiplication table shared by every multiplication in the crate.
pub fn basis_table() -> &'static BasisTable {
    &BASIS_TABLE
}

fn build_basis_table() -> BasisTable {
    let mut entries = [[BasisProduct { sign: 1, index: 0 }; MAX_DIM]; MAX_DIM];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut a = [0.0; MAX_DIM];
            let mut b = [0.0; MAX_DIM];
            a[i] = 1.0;
            b[j] = 1.0;
            let prod = cayley_dickson_mul(&a, &b);
            let (index, value) = prod
                .iter()
                .enumerate()
                .find(|(_, v)| **v != 0.0)
                .expect("basis product is a signed basis element");
            *entry = BasisProduct {
                sign: if *value > 0.0 { 1 } else { -1 },
                index: index as u8,
            };
        }
    }
    BasisTable { entries }
}

fn cayley_dickson_conj(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for v in out.iter_mut().skip(1) {
        *v = -*v;
    }
    out
}

/// Recursive doubling product on coefficient slices of length `2^k`.
fn cayley_dickson_mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    if x.len() == 1 {
        return vec![x[0] * y[0]];
    }
    let h = x.len() / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let ac = cayley_dickson_mul(a, c);
    let db = cayley_dickson_mul(&cayley_dickson_conj(d), b);
    let da = cayley_dickson_mul(d, a);
    let bc = cayley_dickson_mul(b, &cayley_dickson_conj(c));
    ac.iter()
        .zip(&db)
        .map(|(p, q)| p - q)
        .chain(da.iter().zip(&bc).map(|(p, q)| p + q))
        .collect()
}

/// An element of H or O, stored as coefficients over `e_0 = 1, e_1, …`.
#[derive(Clone, Copy, PartialEq)]
pub struct AlgebraElement {
    tag: AlgebraTag,
    coeffs: [f64; MAX_DIM],
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.tag.name(), self.coeffs())
    }
}

impl AlgebraElement {
    pub fn zero(tag: AlgebraTag) -> Self {
        Self {
            tag,
            coeffs: [0.0; MAX_DIM],
        }
    }

    pub fn one(tag: AlgebraTag) -> Self {
        Self::real(tag, 1.0)
    }

    pub fn real(tag: AlgebraTag, r: f64) -> Self {
        let mut e = Self::zero(tag);
        e.coeffs[0] = r;
        e
    }

    /// The basis element `e_index`.
    ///
    /// Panics if `index >= tag.dim()`.
    pub fn basis(tag: AlgebraTag, index: usize) -> Self {
        assert!(index < tag.dim(), "basis index {index} out of range for {tag}");
        let mut e = Self::zero(tag);
        e.coeffs[index] = 1.0;
        e
    }

    pub fn from_coeffs(tag: AlgebraTag, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != tag.dim() {
            return Err(Error::CoefficientCount {
                tag,
                dim: coeffs.len(),
                expected: tag.dim(),
            });
        }
        let mut e = Self::zero(tag);
        e.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(e)
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.tag.dim()]
    }

    pub fn re(&self) -> f64 {
        self.coeffs[0]
    }

    /// The imaginary part `x − Re(x)`.
    pub fn imag(&self) -> Self {
        let mut e = *self;
        e.coeffs[0] = 0.0;
        e
    }

    pub fn conjugate(&self) -> Self {
        let mut e = -*self;
        e.coeffs[0] = self.coeffs[0];
        e
    }

    /// `n(a) = a·ā`, a non-negative real.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs().iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut e = *self;
        for c in e.coeffs.iter_mut() {
            *c *= s;
        }
        e
    }

    /// `ā / n(a)`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < TOL_ZERO {
            return Err(Error::DivisionByZero { norm_sqr: n });
        }
        Ok(self.conjugate().scale(1.0 / n))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean distance `|self − other|`.
    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_finite())
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let table = basis_table();
        let dim = self.tag.dim();
        let mut out = [0.0; MAX_DIM];
        for i in 0..dim {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..dim {
                let p = table.entries[i][j];
                out[p.index as usize] += f64::from(p.sign) * a * other.coeffs[j];
            }
        }
        Self {
            tag: self.tag,
            coeffs: out,
        }
    }

    fn check_tag(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::AlgebraMismatch {
                left: self.tag,
                right: other.tag,
            });
        }
        Ok(())
    }
}

/// The algebra product, rejecting operands from different algebras.
///
/// The `*` operator performs the same product but panics on mismatched tags.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.check_tag(b)?;
    Ok(a.mul_unchecked(b))
}

pub fn conjugate(a: &AlgebraElement) -> AlgebraElement {
    a.conjugate()
}

pub fn inverse(a: &AlgebraElement) -> Result<AlgebraElement> {
    a.inverse()
}

impl Index<usize> for AlgebraElement {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coeffs()[i]
    }
}

impl Mul for AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        if let Err(e) = self.check_tag(&rhs) {
            panic!("{e}");
        }
        self.mul_unchecked(&rhs)
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: f64) -> AlgebraElement {
        self.scale(rhs)
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;

    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs.scale(self)
    }
}

impl Div<f64> for AlgebraElement {
    type Output = AlgebraElement;

    fn div(self, rhs: f64) -> AlgebraElement {
        self.scale(1.0 / rhs)
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;

    fn add(mut self, rhs: AlgebraElement) -> AlgebraElement {
        self += rhs;
        self
    }
}

impl AddAssign for AlgebraElement {
    fn add_assign(&mut self, rhs: AlgebraElement) {
        assert_eq!(self.tag, rhs.tag, "algebra mismatch in addition");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;

    fn sub(mut self, rhs: AlgebraElement) -> AlgebraElement {
        self -= rhs;
        self
    }
}

impl SubAssign for AlgebraElement {
    fn sub_assign(&mut self, rhs: AlgebraElement) {
        assert_eq!(self.tag, rhs.tag, "algebra mismatch in subtraction");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;

    fn neg(mut self) -> AlgebraElement {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

/// A unit imaginary element `J` (so `J² = −1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImaginaryUnit(AlgebraElement);

impl ImaginaryUnit {
    /// Validates `value` as an imaginary unit within [`TOL_UNIT`].
    pub fn new(value: AlgebraElement) -> Result<Self> {
        let real = value.re();
        let norm = value.norm();
        if real.abs() > TOL_UNIT || (value.norm_sqr() - 1.0).abs() > TOL_UNIT {
            return Err(Error::NotImaginaryUnit { real, norm });
        }
        Ok(Self(value))
    }

    /// Projects onto the imaginary part and normalizes.
    pub fn normalized(value: AlgebraElement) -> Result<Self> {
        let v = value.imag();
        let n = v.norm();
        if n < 1e-150 {
            return Err(Error::NotImaginaryUnit {
                real: value.re(),
                norm: n,
            });
        }
        Ok(Self(v / n))
    }

    /// `e_index`, for `1 <= index < dim`.
    pub fn basis(tag: AlgebraTag, index: usize) -> Self {
        assert!(index >= 1, "e_0 is not imaginary");
        Self(AlgebraElement::basis(tag, index))
    }

    pub fn value(&self) -> AlgebraElement {
        self.0
    }

    pub fn tag(&self) -> AlgebraTag {
        self.0.tag()
    }

    /// Flips the sign of the first coefficient whose magnitude exceeds `threshold`
    /// to be positive; returns the canonical unit and whether it was negated.
    pub fn canonical(&self, threshold: f64) -> (Self, bool) {
        let first = self.0.coeffs().iter().find(|c| c.abs() > threshold);
        match first {
            Some(c) if *c < 0.0 => (Self(-self.0), true),
            _ => (*self, false),
        }
    }
}

impl Neg for ImaginaryUnit {
    type Output = ImaginaryUnit;

    fn neg(self) -> ImaginaryUnit {
        ImaginaryUnit(-self.0)
    }
}

impl From<ImaginaryUnit> for AlgebraElement {
    fn from(u: ImaginaryUnit) -> Self {
        u.0
    }
}

/// A uniformly distributed unit imaginary element, deterministic in `seed`.
pub fn sample_unit_imaginary(tag: AlgebraTag, seed: u64) -> ImaginaryUnit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_unit_imaginary_with(tag, &mut rng)
}

/// Normalized Gaussian vector in the imaginary subspace.
pub fn sample_unit_imaginary_with<R: Rng + ?Sized>(tag: AlgebraTag, rng: &mut R) -> ImaginaryUnit {
    loop {
        let mut e = AlgebraElement::zero(tag);
        for k in 1..tag.dim() {
            e.coeffs[k] = rng.sample(StandardNormal);
        }
        let n = e.norm();
        if n > 1e-6 {
            return ImaginaryUnit(e / n);
        }
    }
}

/// Gaussian coefficients, rescaled so the norm lies in `[1e-3, 1e3]`.
pub fn sample_element_with<R: Rng + ?Sized>(tag: AlgebraTag, rng: &mut R) -> AlgebraElement {
    let mut e = AlgebraElement::zero(tag);
    for k in 0..tag.dim() {
        e.coeffs[k] = rng.sample(StandardNormal);
    }
    let n = e.norm();
    if n < 1e-3 {
        e = e.scale(1e-3 / n.max(f64::MIN_POSITIVE));
    } else if n > 1e3 {
        e = e.scale(1e3 / n);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    const O: AlgebraTag = AlgebraTag::Octonion;
    const H: AlgebraTag = AlgebraTag::Quaternion;

    fn e(i: usize) -> AlgebraElement {
        AlgebraElement::basis(O, i)
    }

    #[test]
    fn unit_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = sample_element_with(O, &mut rng);
            assert_eq!(multiply(&e(0), &x).unwrap(), x);
            assert_eq!(multiply(&x, &e(0)).unwrap(), x);
        }
    }

    #[test]
    fn e1_e2_is_e3() {
        assert_eq!(e(1) * e(2), e(3));
        assert_eq!(e(2) * e(1), -e(3));
    }

    #[test]
    fn mismatched_tags_are_rejected() {
        let q = AlgebraElement::one(H);
        let o = AlgebraElement::one(O);
        assert!(matches!(
            multiply(&q, &o),
            Err(Error::AlgebraMismatch { .. })
        ));
    }

    #[test]
    #[should_panic(expected = "algebra mismatch")]
    fn operator_panics_on_mismatch() {
        let _ = AlgebraElement::one(H) * AlgebraElement::one(O);
    }

    #[test]
    fn conjugation_rules() {
        assert_eq!(e(0).conjugate(), e(0));
        assert_eq!(e(5).conjugate(), -e(5));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(e(0).inverse().unwrap(), e(0));
        assert_eq!((e(1) * 2.0).inverse().unwrap(), -e(1) * 0.5);
        let tiny = AlgebraElement::real(O, 1e-160);
        assert!(matches!(tiny.inverse(), Err(Error::DivisionByZero { .. })));
        assert!(AlgebraElement::zero(H).inverse().is_err());
    }

    #[test]
    fn from_coeffs_checks_length() {
        assert!(AlgebraElement::from_coeffs(H, &[1.0; 8]).is_err());
        let q = AlgebraElement::from_coeffs(H, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn imaginary_unit_validation() {
        assert!(ImaginaryUnit::new(e(0)).is_err());
        assert!(ImaginaryUnit::new(e(1) * 2.0).is_err());
        let j = ImaginaryUnit::new(e(4)).unwrap();
        assert_eq!(j.value() * j.value(), -e(0));
        let (c, flipped) = (-j).canonical(1e-12);
        assert!(flipped);
        assert_eq!(c, j);
    }

    #[test]
    fn sampled_units_square_to_minus_one() {
        for tag in AlgebraTag::all() {
            for seed in 0..20 {
                let j = sample_unit_imaginary(tag, seed).value();
                assert!((j * j).max_abs_diff(&-AlgebraElement::one(tag)) < 1e-12);
            }
        }
        assert_eq!(sample_unit_imaginary(O, 42), sample_unit_imaginary(O, 42));
    }

    #[test]
    fn sampled_units_have_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for tag in AlgebraTag::all() {
            let mut mean = AlgebraElement::zero(tag);
            let count = 100_000;
            for _ in 0..count {
                mean += sample_unit_imaginary_with(tag, &mut rng).value();
            }
            mean = mean / f64::from(count);
            assert!(mean.coeffs().iter().all(|c| c.abs() < 0.02), "{mean:?}");
        }
    }

    #[test]
    fn quaternion_table_is_octonion_block() {
        let t = basis_table();
        for i in 0..4 {
            for j in 0..4 {
                assert!(t.get(i, j).index < 4);
                let q = AlgebraElement::basis(H, i) * AlgebraElement::basis(H, j);
                let o = e(i) * e(j);
                assert_eq!(q.coeffs(), &o.coeffs()[..4]);
            }
        }
    }

    #[test]
    fn render_has_one_line_per_row() {
        let s = basis_table().render(O);
        assert_eq!(s.lines().count(), 9);
        assert!(s.lines().nth(2).unwrap().contains("e3"));
    }
}
