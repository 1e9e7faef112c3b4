//! Slice functions of several octonionic and quaternionic variables.
//!
//! The crate is layered bottom-up:
//!
//! * [`algebra`]: quaternion and octonion arithmetic (Cayley–Dickson).
//! * [`complexified`]: the complexified algebra `A ⊗ C` where stem functions take values.
//! * [`stem`]: stem functions `F : D ⊂ Cⁿ → A ⊗ C`, polynomials, Wirtinger derivatives.
//! * [`slice`]: slice points, the lift `I(F)`, representation formulas, products, zeros.
//! * [`integral`]: Bochner–Martinelli quadrature on polydiscs and Hartogs extension.

pub mod algebra;
pub mod complexified;
pub mod error;
pub mod integral;
pub mod slice;
pub mod stem;

pub use algebra::{AlgebraElement, AlgebraTag, ImaginaryUnit};
pub use complexified::{ComplexScalar, ComplexifiedElement};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use stem::{ComplexPoint, MultiIndex, Smoothness, StemFunction, StemPolynomial};
pub use slice::{SliceFunction, SlicePoint};
pub use integral::{PolydiscDomain, QuadratureSpec};
