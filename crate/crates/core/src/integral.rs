//! Bochner–Martinelli quadrature on polydiscs inside a slice plane `C_Jⁿ`.
//!
//! Points of the slice plane are handled as complex vectors through the
//! identification `a + bJ ↔ a + ib`. All kernels are complex scalars, that is
//! elements of `C_J`, and left-multiply algebra values.
//!
//! On the face `|ζ_k − c_k| = r_k` of the polydisc boundary, with
//! `ζ_k = c_k + r_k e^{iθ}` and the other coordinates in their discs, the
//! kernel pulls back to
//!
//! ```text
//! (n−1)!/(2πⁿ) · (ζ̄_k − x̄_k)(ζ_k − c_k) / |ζ − x|²ⁿ  dθ dA′
//! ```
//!
//! which is the Cauchy kernel `(2πJ)⁻¹(ζ − x)⁻¹dζ` when `n = 1`. The volume
//! term is
//!
//! ```text
//! (n−1)!/πⁿ ∫_D Σ_j (ζ̄_j − x̄_j)/|ζ − x|²ⁿ · ∂f/∂x̄_j(ζ) dV
//! ```
//!
//! and `f(x) = boundary − volume` for every C¹ slice function.
//!
//! Reductions are done per chunk in a fixed order, so results are bitwise
//! identical for any worker count. `HYPERSLICE_THREADS` caps the workers.

use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraTag, ImaginaryUnit};
use crate::error::{Error, Result};
use crate::slice::{lift_evaluate, SliceFunction, SlicePoint};
use crate::stem::{is_holomorphic, wirtinger, ComplexPoint, Smoothness};

/// Environment variable capping the number of quadrature workers.
pub const THREADS_ENV: &str = "HYPERSLICE_THREADS";

/// Minimum distance from each coordinate of `x` to its circle, relative to the radius.
pub const BOUNDARY_MARGIN: f64 = 0.05;

/// Scale of the Hartogs integration contour relative to the domain.
pub const HARTOGS_CONTOUR: f64 = 0.95;

/// Tolerance for a point's unit to count as the domain's `±J`.
const UNIT_MATCH_TOL: f64 = 1e-12;

static POOL: LazyLock<rayon::ThreadPool> = LazyLock::new(|| {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .thread_name(|i| format!("hyperslice-quad-{i}"))
        .build()
        .expect("quadrature thread pool")
});

/// Number of workers used for quadrature.
pub fn worker_count() -> usize {
    POOL.current_num_threads()
}

/// `Π_k {|ζ_k − c_k| < r_k}` inside `C_Jⁿ`, with real centers so that the
/// domain is closed under conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct PolydiscDomain {
    centers: Vec<f64>,
    radii: Vec<f64>,
    j: ImaginaryUnit,
}

impl PolydiscDomain {
    pub fn new(centers: Vec<f64>, radii: Vec<f64>, j: ImaginaryUnit) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::InvalidDomain(format!(
                "{} centers and {} radii",
                centers.len(),
                radii.len()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidDomain(format!("radius {r} is not positive")));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain("non-finite center".into()));
        }
        Ok(Self { centers, radii, j })
    }

    /// The unit polydisc centered at the origin.
    pub fn unit(n: usize, j: ImaginaryUnit) -> Result<Self> {
        Self::new(vec![0.0; n], vec![1.0; n], j)
    }

    pub fn arity(&self) -> usize {
        self.centers.len()
    }

    pub fn tag(&self) -> AlgebraTag {
        self.j.tag()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn unit_j(&self) -> ImaginaryUnit {
        self.j
    }

    /// The concentric polydisc with every radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.centers.clone(),
            self.radii.iter().map(|r| r * factor).collect(),
            self.j,
        )
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.arity()
            && z.iter()
                .zip(self.centers.iter().zip(&self.radii))
                .all(|(z, (c, r))| (z - c).norm() < *r)
    }

    /// The slice point `α + βJ` for `z = α + iβ`.
    pub fn slice_point(&self, z: &[Complex64]) -> Result<SlicePoint> {
        SlicePoint::new(
            z.iter().map(|c| c.re).collect(),
            z.iter().map(|c| c.im).collect(),
            self.j,
        )
    }

    /// Complex coordinates of `x` in this slice plane.
    pub fn coordinates(&self, x: &SlicePoint) -> Result<Vec<Complex64>> {
        if x.tag() != self.tag() {
            return Err(Error::AlgebraMismatch {
                left: self.tag(),
                right: x.tag(),
            });
        }
        if x.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                left: self.arity(),
                right: x.arity(),
            });
        }
        let sign = if x.is_real() {
            0.0
        } else {
            let (u, j) = (x.unit().value(), self.j.value());
            if u.dist(&j) <= UNIT_MATCH_TOL {
                1.0
            } else if u.dist(&-j) <= UNIT_MATCH_TOL {
                -1.0
            } else {
                return Err(Error::SliceMismatch);
            }
        };
        Ok(x.alpha()
            .iter()
            .zip(x.beta())
            .map(|(&a, &b)| Complex64::new(a, sign * b))
            .collect())
    }

    fn check_interior(&self, z: &[Complex64]) -> Result<()> {
        for (k, (zk, (c, r))) in z.iter().zip(self.centers.iter().zip(&self.radii)).enumerate() {
            let distance = r - (zk - c).norm();
            let minimum = BOUNDARY_MARGIN * r;
            if distance < minimum {
                return Err(Error::PointTooCloseToBoundary {
                    coordinate: k,
                    distance,
                    minimum,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Trapezoid nodes per circle.
    pub angular_nodes: usize,
    /// Gauss–Legendre nodes per disc radius.
    pub radial_nodes: usize,
    /// Node-density factor for the volume term near the evaluation point.
    #[serde(default = "default_refinement")]
    pub volume_refinement: usize,
}

fn default_refinement() -> usize {
    1
}

impl QuadratureSpec {
    pub fn new(angular_nodes: usize, radial_nodes: usize, volume_refinement: usize) -> Result<Self> {
        let q = Self {
            angular_nodes,
            radial_nodes,
            volume_refinement,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.angular_nodes < 8 {
            return Err(Error::InvalidQuadrature(format!(
                "angular_nodes = {} (need at least 8)",
                self.angular_nodes
            )));
        }
        if self.radial_nodes < 4 {
            return Err(Error::InvalidQuadrature(format!(
                "radial_nodes = {} (need at least 4)",
                self.radial_nodes
            )));
        }
        if self.volume_refinement < 1 {
            return Err(Error::InvalidQuadrature("volume_refinement must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            angular_nodes: 64,
            radial_nodes: 32,
            volume_refinement: 3,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
fn gauss_legendre(count: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(count).expect("at least one node"));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs()
        .into_iter()
        .map(|(t, w)| (mid + half * t, half * w))
        .collect()
}

/// Trapezoid nodes and weights on the circle.
fn trapezoid(count: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * PI / count as f64;
    (0..count).map(|k| (k as f64 * w, w)).collect()
}

/// Polar product rule on the disc of the given radius: offsets `s e^{iφ}` and area weights.
fn disc_rule(radius: f64, angular: usize, radial: usize) -> Vec<(Complex64, f64)> {
    let angles = trapezoid(angular);
    let mut out = Vec::with_capacity(angular * radial);
    for (s, ws) in gauss_legendre(radial, 0.0, radius) {
        for &(phi, wphi) in &angles {
            out.push((Complex64::from_polar(s, phi), ws * s * wphi));
        }
    }
    out
}

/// Calls `visit` with every index tuple of the product of `sizes`, last index fastest.
fn for_each_index(sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        visit(&idx);
        let mut d = sizes.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Boundary kernel density with respect to `dθ dA′` on face `face`:
/// `(n−1)!/(2πⁿ) · conj(ζ_k − x_k)(ζ_k − c_k)/|ζ − x|²ⁿ`.
pub fn boundary_kernel(x: &[Complex64], zeta: &[Complex64], face: usize, center: f64) -> Complex64 {
    let n = x.len();
    let dist2: f64 = x.iter().zip(zeta).map(|(a, b)| (b - a).norm_sqr()).sum();
    let c = factorial(n - 1) / (2.0 * PI.powi(n as i32));
    (zeta[face] - x[face]).conj() * (zeta[face] - center) * (c / dist2.powi(n as i32))
}

/// Running sums for both evaluation routes.
#[derive(Clone, Copy, Debug)]
struct Accumulator {
    direct: AlgebraElement,
    components: [Complex64; 8],
    nodes: usize,
}

impl Accumulator {
    fn new(tag: AlgebraTag) -> Self {
        Self {
            direct: AlgebraElement::zero(tag),
            components: [Complex64::new(0.0, 0.0); 8],
            nodes: 0,
        }
    }

    /// Adds `ι(k)·(g₁ + J g₂)` directly and `k·(g₁ᶜ + i g₂ᶜ)` per component.
    fn push(&mut self, k: Complex64, g1: &AlgebraElement, g2: &AlgebraElement, j: &AlgebraElement) {
        let value = *g1 + *j * *g2;
        self.direct += value * k.re + (*j * value) * k.im;
        for ((c, a), b) in self.components.iter_mut().zip(g1.coeffs()).zip(g2.coeffs()) {
            *c += k * Complex64::new(*a, *b);
        }
        self.nodes += 1;
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        self.direct += other.direct;
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            *c += o;
        }
        self.nodes += other.nodes;
        self
    }

    fn finish(self, j: &AlgebraElement) -> QuadratureResult {
        let tag = j.tag();
        let mut componentwise = AlgebraElement::zero(tag);
        for (k, c) in self.components.iter().take(tag.dim()).enumerate() {
            let e = AlgebraElement::basis(tag, k);
            componentwise += e * c.re + (*j * e) * c.im;
        }
        QuadratureResult {
            direct: self.direct,
            componentwise,
            nodes: self.nodes,
        }
    }
}

/// Both evaluation routes of one integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    /// Kernel times `f` multiplied in the algebra.
    pub direct: AlgebraElement,
    /// Complex kernel times each complex component `Fᵏ`, reassembled as `Σ ι(cₖ)eₖ`.
    pub componentwise: AlgebraElement,
    pub nodes: usize,
}

impl QuadratureResult {
    pub fn discrepancy(&self) -> f64 {
        self.direct.dist(&self.componentwise)
    }
}

fn reduce(parts: Vec<Accumulator>, tag: AlgebraTag) -> Accumulator {
    parts
        .iter()
        .fold(Accumulator::new(tag), |acc, p| acc.merge(p))
}

fn check_function(f: &SliceFunction, dom: &PolydiscDomain) -> Result<()> {
    if f.arity() != dom.arity() {
        return Err(Error::ArityMismatch {
            left: f.arity(),
            right: dom.arity(),
        });
    }
    if f.tag() != dom.tag() {
        return Err(Error::AlgebraMismatch {
            left: f.tag(),
            right: dom.tag(),
        });
    }
    Ok(())
}

/// The boundary integral at complex coordinates `x`, both routes.
fn boundary_at(f: &SliceFunction, dom: &PolydiscDomain, x: &[Complex64], q: &QuadratureSpec) -> QuadratureResult {
    let n = dom.arity();
    let tag = dom.tag();
    let j = dom.j.value();
    let discs: Vec<Vec<(Complex64, f64)>> = dom
        .radii
        .iter()
        .map(|&r| disc_rule(r, q.angular_nodes, q.radial_nodes))
        .collect();
    let circle = trapezoid(q.angular_nodes);
    let items: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (0..q.angular_nodes).map(move |m| (k, m)))
        .collect();
    let stem = f.stem();
    let parts: Vec<Accumulator> = POOL.install(|| {
        items
            .par_iter()
            .map(|&(k, m)| {
                let mut acc = Accumulator::new(tag);
                let others: Vec<usize> = (0..n).filter(|&l| l != k).collect();
                let sizes: Vec<usize> = others.iter().map(|&l| discs[l].len()).collect();
                let (theta, w_theta) = circle[m];
                let mut zeta: Vec<Complex64> = dom.centers.iter().map(|&c| Complex64::new(c, 0.0)).collect();
                zeta[k] += Complex64::from_polar(dom.radii[k], theta);
                for_each_index(&sizes, |idx| {
                    let mut weight = w_theta;
                    for (&l, &i) in others.iter().zip(idx) {
                        let (offset, w) = discs[l][i];
                        zeta[l] = Complex64::new(dom.centers[l], 0.0) + offset;
                        weight *= w;
                    }
                    let kernel = boundary_kernel(x, &zeta, k, dom.centers[k]) * weight;
                    let w = stem.evaluate(&zeta);
                    acc.push(kernel, &w.re, &w.im, &j);
                });
                acc
            })
            .collect()
    });
    reduce(parts, tag).finish(&j)
}

/// Boundary integral, returning both the direct and the componentwise value.
pub fn bm_boundary_integral_checked(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<QuadratureResult> {
    q.validate()?;
    check_function(f, dom)?;
    let z = dom.coordinates(x)?;
    dom.check_interior(&z)?;
    Ok(boundary_at(f, dom, &z, q))
}

/// `∫_{∂D_J} ω_x(ξ) f(ξ)`; reproduces `f(x)` for slice regular `f`.
pub fn bm_boundary_integral(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<AlgebraElement> {
    Ok(bm_boundary_integral_checked(f, dom, x, q)?.direct)
}

/// Smooth cutoff: 1 for `s ≤ δ/2`, 0 for `s ≥ δ`.
fn cutoff(s: f64, delta: f64) -> f64 {
    let t = (s - 0.5 * delta) / (0.5 * delta);
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    b / (a + b)
}

/// Points `ω` of the positive orthant of `S^{n−1}` with surface weights.
fn orthant_rule(n: usize, count: usize) -> Vec<(Vec<f64>, f64)> {
    if n == 1 {
        return vec![(vec![1.0], 1.0)];
    }
    let angles = gauss_legendre(count, 0.0, FRAC_PI_2);
    let mut out = Vec::new();
    for_each_index(&vec![count; n - 1], |idx| {
        let mut omega = Vec::with_capacity(n);
        let mut sines = 1.0;
        let mut weight = 1.0;
        for (m, &i) in idx.iter().enumerate() {
            let (psi, w) = angles[i];
            omega.push(sines * psi.cos());
            weight *= w * psi.sin().powi((n - 2 - m) as i32);
            sines *= psi.sin();
        }
        omega.push(sines);
        out.push((omega, weight));
    });
    out
}

fn dzbar_parts(f: &SliceFunction, zeta: &[Complex64], axis: usize) -> (AlgebraElement, AlgebraElement) {
    let w = wirtinger(f.stem(), &ComplexPoint::new(zeta.to_vec()), axis)
        .expect("smoothness checked before quadrature")
        .dzbar;
    (w.re, w.im)
}

/// The volume term at complex coordinates `x`, both routes.
///
/// A smooth cutoff of radius `δ` (the distance from `x` to the distinguished
/// boundary) splits the integrand. Inside, spherical coordinates centered at
/// `x` cancel the `|ζ − x|^{1−2n}` singularity exactly; outside, the
/// integrand is smooth and the per-disc polar rule is used.
fn volume_at(f: &SliceFunction, dom: &PolydiscDomain, x: &[Complex64], q: &QuadratureSpec) -> QuadratureResult {
    let n = dom.arity();
    let tag = dom.tag();
    let j = dom.j.value();
    let delta = x
        .iter()
        .zip(dom.centers.iter().zip(&dom.radii))
        .map(|(z, (c, r))| r - (z - c).norm())
        .fold(f64::INFINITY, f64::min);
    let constant = factorial(n - 1) / PI.powi(n as i32);

    // Near field: ζ_l = x_l + s ω_l e^{iφ_l}, dV = s^{2n−1} Π ω_l ds dσ(ω) dφ,
    // and the kernel contributes ω_j e^{−iφ_j} / s^{2n−1}.
    let refine = q.volume_refinement;
    let radial = gauss_legendre((q.radial_nodes / 4).max(4) * refine, 0.0, delta);
    let orthant = orthant_rule(n, (q.radial_nodes / 4).max(4) * refine);
    let phis = trapezoid((q.angular_nodes / 4).max(8) * refine);
    let near: Vec<Accumulator> = POOL.install(|| {
        radial
            .par_iter()
            .map(|&(s, ws)| {
                let mut acc = Accumulator::new(tag);
                let chi = cutoff(s, delta);
                if chi == 0.0 {
                    return acc;
                }
                let mut zeta = x.to_vec();
                for (omega, wo) in &orthant {
                    let measure: f64 = omega.iter().product::<f64>() * wo * ws * chi * constant;
                    for_each_index(&vec![phis.len(); n], |idx| {
                        let mut weight = measure;
                        for l in 0..n {
                            let (phi, wphi) = phis[idx[l]];
                            zeta[l] = x[l] + Complex64::from_polar(s * omega[l], phi);
                            weight *= wphi;
                        }
                        for (axis, &om) in omega.iter().enumerate() {
                            let kernel = Complex64::from_polar(om * weight, -phis[idx[axis]].0);
                            let (g1, g2) = dzbar_parts(f, &zeta, axis);
                            acc.push(kernel, &g1, &g2, &j);
                        }
                    });
                }
                acc
            })
            .collect()
    });

    // Far field: (1 − χ) times the kernel on the product of disc rules.
    let discs: Vec<Vec<(Complex64, f64)>> = dom
        .radii
        .iter()
        .map(|&r| disc_rule(r, q.angular_nodes, q.radial_nodes))
        .collect();
    let outer = discs[0].len();
    let far: Vec<Accumulator> = POOL.install(|| {
        (0..outer)
            .into_par_iter()
            .map(|i0| {
                let mut acc = Accumulator::new(tag);
                let mut zeta: Vec<Complex64> = dom.centers.iter().map(|&c| Complex64::new(c, 0.0)).collect();
                let sizes: Vec<usize> = discs[1..].iter().map(Vec::len).collect();
                let (offset0, w0) = discs[0][i0];
                zeta[0] = Complex64::new(dom.centers[0], 0.0) + offset0;
                for_each_index(&sizes, |idx| {
                    let mut weight = w0 * constant;
                    for (l, &i) in idx.iter().enumerate() {
                        let (offset, w) = discs[l + 1][i];
                        zeta[l + 1] = Complex64::new(dom.centers[l + 1], 0.0) + offset;
                        weight *= w;
                    }
                    let dist2: f64 = zeta.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum();
                    let outside = 1.0 - cutoff(dist2.sqrt(), delta);
                    if outside == 0.0 {
                        return;
                    }
                    let scale = weight * outside / dist2.powi(n as i32);
                    for axis in 0..n {
                        let kernel = (zeta[axis] - x[axis]).conj() * scale;
                        let (g1, g2) = dzbar_parts(f, &zeta, axis);
                        acc.push(kernel, &g1, &g2, &j);
                    }
                });
                acc
            })
            .collect()
    });

    let mut all = near;
    all.extend(far);
    reduce(all, tag).finish(&j)
}

fn check_c1(f: &SliceFunction) -> Result<()> {
    if f.stem().smoothness() < Smoothness::C1 {
        return Err(Error::Smoothness {
            required: Smoothness::C1,
            actual: f.stem().smoothness(),
        });
    }
    Ok(())
}

/// Volume term, returning both evaluation routes.
pub fn bm_volume_integral_checked(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<QuadratureResult> {
    q.validate()?;
    check_function(f, dom)?;
    check_c1(f)?;
    let z = dom.coordinates(x)?;
    dom.check_interior(&z)?;
    Ok(volume_at(f, dom, &z, q))
}

/// The `∂̄` volume term, signed so that `f(x) = boundary − volume`.
pub fn bm_volume_integral(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<AlgebraElement> {
    Ok(bm_volume_integral_checked(f, dom, x, q)?.direct)
}

/// Whether the volume term can be dropped: polynomial stems, or stems whose
/// `∂F/∂z̄` vanishes (to 1e−10) at a few points of the domain.
pub fn is_regular_on(f: &SliceFunction, dom: &PolydiscDomain) -> Result<bool> {
    if f.stem().as_polynomial().is_some() {
        return Ok(true);
    }
    check_c1(f)?;
    let mut samples = vec![ComplexPoint::new(
        dom.centers.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
    )];
    for (k, phase) in [0.3, 1.9, 4.1].iter().enumerate() {
        samples.push(ComplexPoint::new(
            dom.centers
                .iter()
                .zip(&dom.radii)
                .enumerate()
                .map(|(l, (&c, &r))| c + Complex64::from_polar(0.5 * r, phase + (k + l) as f64))
                .collect(),
        ));
    }
    Ok(is_holomorphic(f.stem(), &samples, 1e-10)?.pass)
}

/// `f(x)` reconstructed from the integrals over `D_J`: boundary alone for
/// slice regular `f`, boundary minus volume otherwise.
pub fn bm_reproduce(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<(AlgebraElement, usize)> {
    let b = bm_boundary_integral_checked(f, dom, x, q)?;
    if is_regular_on(f, dom)? {
        return Ok((b.direct, b.nodes));
    }
    let v = bm_volume_integral_checked(f, dom, x, q)?;
    Ok((b.direct - v.direct, b.nodes + v.nodes))
}

/// Evaluates `f` at `q_point = α + βI`, possibly off the slice `C_J`, from
/// integrals over `D_J` at `x = α + βJ` and `x̄ = α − βJ`:
/// `f(q) = ½(f(x) + f(x̄)) − (I/2)(J(f(x) − f(x̄)))`.
pub fn off_slice_evaluate(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    q_point: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<AlgebraElement> {
    if q_point.tag() != dom.tag() {
        return Err(Error::AlgebraMismatch {
            left: dom.tag(),
            right: q_point.tag(),
        });
    }
    if q_point.is_real() {
        return Ok(bm_reproduce(f, dom, q_point, q)?.0);
    }
    let x = SlicePoint::new(q_point.alpha().to_vec(), q_point.beta().to_vec(), dom.j)?;
    let fx = bm_reproduce(f, dom, &x, q)?.0;
    let fxbar = bm_reproduce(f, dom, &x.conjugate(), q)?.0;
    let i = q_point.unit().value();
    let j = dom.j.value();
    Ok((fx + fxbar) * 0.5 - (i * 0.5) * (j * (fx - fxbar)))
}

/// The Hartogs extension operator: the boundary integral over the
/// concentric polydisc scaled by [`HARTOGS_CONTOUR`].
#[derive(Clone, Debug)]
pub struct HartogsExtension {
    f: SliceFunction,
    contour: PolydiscDomain,
    hole: PolydiscDomain,
    q: QuadratureSpec,
}

impl HartogsExtension {
    /// `g(x)`. Points must lie at least the boundary margin inside the contour.
    pub fn evaluate(&self, x: &SlicePoint) -> Result<AlgebraElement> {
        bm_boundary_integral(&self.f, &self.contour, x, &self.q)
    }

    pub fn contour(&self) -> &PolydiscDomain {
        &self.contour
    }

    /// The removed compact set `K`.
    pub fn hole(&self) -> &PolydiscDomain {
        &self.hole
    }
}

pub fn hartogs_extend(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    hole_radius_fraction: f64,
    q: &QuadratureSpec,
) -> Result<HartogsExtension> {
    if dom.arity() < 2 {
        return Err(Error::HartogsRequiresSeveralVariables);
    }
    if !(hole_radius_fraction > 0.0 && hole_radius_fraction < 0.8) {
        return Err(Error::InvalidDomain(format!(
            "hole fraction {hole_radius_fraction} outside (0, 0.8)"
        )));
    }
    q.validate()?;
    check_function(f, dom)?;
    Ok(HartogsExtension {
        f: f.clone(),
        contour: dom.scaled(HARTOGS_CONTOUR)?,
        hole: dom.scaled(hole_radius_fraction)?,
        q: *q,
    })
}

/// The boundary integral over `dom` scaled by `factor`, without the
/// several-variables requirement of [`hartogs_extend`]. For `n = 1` this is
/// the Cauchy integral over a circle, which cannot fill a hole.
pub fn scaled_boundary_integral(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    factor: f64,
    x: &SlicePoint,
    q: &QuadratureSpec,
) -> Result<AlgebraElement> {
    bm_boundary_integral(f, &dom.scaled(factor)?, x, q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BMReport {
    pub reproduced: AlgebraElement,
    pub reference: AlgebraElement,
    pub abs_error: f64,
    pub nodes_used: usize,
    pub wall_time: Duration,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BMReportJson {
    algebra: AlgebraTag,
    reproduced: Vec<f64>,
    reference: Vec<f64>,
    abs_error: f64,
    nodes_used: usize,
    wall_ms: f64,
}

impl BMReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&BMReportJson {
            algebra: self.reproduced.tag(),
            reproduced: self.reproduced.coeffs().to_vec(),
            reference: self.reference.coeffs().to_vec(),
            abs_error: self.abs_error,
            nodes_used: self.nodes_used,
            wall_ms: self.wall_time.as_secs_f64() * 1e3,
        })
        .expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: BMReportJson = serde_json::from_str(s)?;
        if !(raw.wall_ms.is_finite() && raw.wall_ms >= 0.0) {
            return Err(Error::Parse(format!("wall_ms = {}", raw.wall_ms)));
        }
        Ok(Self {
            reproduced: AlgebraElement::from_coeffs(raw.algebra, &raw.reproduced)?,
            reference: AlgebraElement::from_coeffs(raw.algebra, &raw.reference)?,
            abs_error: raw.abs_error,
            nodes_used: raw.nodes_used,
            wall_time: Duration::from_secs_f64(raw.wall_ms / 1e3),
        })
    }
}

/// Reproduces `f(x)` by quadrature and compares with the direct lift.
pub fn bm_report(f: &SliceFunction, dom: &PolydiscDomain, x: &SlicePoint, q: &QuadratureSpec) -> Result<BMReport> {
    let start = Instant::now();
    let (reproduced, nodes_used) = bm_reproduce(f, dom, x, q)?;
    let wall_time = start.elapsed();
    let reference = lift_evaluate(f, x)?;
    Ok(BMReport {
        reproduced,
        reference,
        abs_error: reproduced.dist(&reference),
        nodes_used,
        wall_time,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub angular_nodes: usize,
    pub radial_nodes: usize,
    pub volume_refinement: usize,
    pub abs_error: f64,
    pub wall_ms: f64,
}

pub const CONVERGENCE_HEADER: &str = "M,R,V,abs_error,wall_ms";

/// One report per quadrature spec, in the given order.
pub fn convergence_study(
    f: &SliceFunction,
    dom: &PolydiscDomain,
    x: &SlicePoint,
    specs: &[QuadratureSpec],
) -> Result<Vec<ConvergenceRow>> {
    specs
        .iter()
        .map(|q| {
            let r = bm_report(f, dom, x, q)?;
            Ok(ConvergenceRow {
                angular_nodes: q.angular_nodes,
                radial_nodes: q.radial_nodes,
                volume_refinement: q.volume_refinement,
                abs_error: r.abs_error,
                wall_ms: r.wall_time.as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// `%.15e`-style formatting: `1.500000000000000e-03`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.15e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.angular_nodes,
            r.radial_nodes,
            r.volume_refinement,
            format_sci(r.abs_error),
            format_sci(r.wall_ms)
        ));
    }
    out
}
