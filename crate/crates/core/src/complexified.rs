//! The complexified algebra `A ⊗ C`, elements written `x + iy` with `x, y ∈ A`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, AlgebraTag};
use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexifiedElement {
    pub re: AlgebraElement,
    pub im: AlgebraElement,
}

impl ComplexifiedElement {
    /// Panics if the two parts belong to different algebras.
    pub fn new(re: AlgebraElement, im: AlgebraElement) -> Self {
        assert_eq!(re.tag(), im.tag(), "algebra mismatch in complexified element");
        Self { re, im }
    }

    pub fn zero(tag: AlgebraTag) -> Self {
        Self::new(AlgebraElement::zero(tag), AlgebraElement::zero(tag))
    }

    pub fn one(tag: AlgebraTag) -> Self {
        Self::from_real(AlgebraElement::one(tag))
    }

    pub fn from_real(x: AlgebraElement) -> Self {
        Self::new(x, AlgebraElement::zero(x.tag()))
    }

    /// The complex scalar `c` embedded as `c.re·e_0 + i·c.im·e_0`.
    pub fn scalar(tag: AlgebraTag, c: ComplexScalar) -> Self {
        Self::new(AlgebraElement::real(tag, c.re), AlgebraElement::real(tag, c.im))
    }

    pub fn tag(&self) -> AlgebraTag {
        self.re.tag()
    }

    /// `w^c = x̄ + iȳ`.
    pub fn c_conjugate(&self) -> Self {
        Self::new(self.re.conjugate(), self.im.conjugate())
    }

    /// `w̄ = x − iy`.
    pub fn complex_conjugate(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// `c · w` for a complex scalar `c`, computed without going through the
    /// algebra product.
    pub fn scale_complex(&self, c: ComplexScalar) -> Self {
        Self::new(
            self.re * c.re - self.im * c.im,
            self.im * c.re + self.re * c.im,
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    /// `sqrt(|x|² + |y|²)`.
    pub fn norm(&self) -> f64 {
        (self.re.norm_sqr() + self.im.norm_sqr()).sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// The complex component functions `F^k = F_1^k + i F_2^k`.
    pub fn components(&self) -> Vec<ComplexScalar> {
        self.re
            .coeffs()
            .iter()
            .zip(self.im.coeffs())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect()
    }

    /// Inverse of [`components`](Self::components): `Σ_k c_k e_k`.
    pub fn from_components(tag: AlgebraTag, components: &[ComplexScalar]) -> Result<Self> {
        let re: Vec<f64> = components.iter().map(|c| c.re).collect();
        let im: Vec<f64> = components.iter().map(|c| c.im).collect();
        Ok(Self::new(
            AlgebraElement::from_coeffs(tag, &re)?,
            AlgebraElement::from_coeffs(tag, &im)?,
        ))
    }
}

/// `(x + iy)(u + iv) = xu − yv + i(xv + yu)`.
pub fn c_multiply(w: &ComplexifiedElement, v: &ComplexifiedElement) -> Result<ComplexifiedElement> {
    if w.tag() != v.tag() {
        return Err(Error::AlgebraMismatch {
            left: w.tag(),
            right: v.tag(),
        });
    }
    Ok(*w * *v)
}

/// Returns `(w^c, w̄)`.
pub fn c_involutions(w: &ComplexifiedElement) -> (ComplexifiedElement, ComplexifiedElement) {
    (w.c_conjugate(), w.complex_conjugate())
}

/// `c·w` with `c` embedded as `(c.re·e_0, c.im·e_0)` and multiplied through
/// the complexified product.
pub fn scalar_action(c: ComplexScalar, w: &ComplexifiedElement) -> ComplexifiedElement {
    ComplexifiedElement::scalar(w.tag(), c) * *w
}

impl Mul for ComplexifiedElement {
    type Output = ComplexifiedElement;

    fn mul(self, v: ComplexifiedElement) -> ComplexifiedElement {
        let (x, y) = (self.re, self.im);
        let (u, w) = (v.re, v.im);
        ComplexifiedElement::new(x * u - y * w, x * w + y * u)
    }
}

impl Add for ComplexifiedElement {
    type Output = ComplexifiedElement;

    fn add(self, rhs: ComplexifiedElement) -> ComplexifiedElement {
        ComplexifiedElement::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for ComplexifiedElement {
    fn add_assign(&mut self, rhs: ComplexifiedElement) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for ComplexifiedElement {
    type Output = ComplexifiedElement;

    fn sub(self, rhs: ComplexifiedElement) -> ComplexifiedElement {
        ComplexifiedElement::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for ComplexifiedElement {
    type Output = ComplexifiedElement;

    fn neg(self) -> ComplexifiedElement {
        ComplexifiedElement::new(-self.re, -self.im)
    }
}
