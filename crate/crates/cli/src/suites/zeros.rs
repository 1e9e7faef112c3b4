use super::{random_point, random_poly, Runner, Suite};
use hyperslice::algebra::{sample_element_with, sample_unit_imaginary_with};
use hyperslice::slice::*;
use hyperslice::stem::{MultiIndex, StemPolynomial};
use hyperslice::{AlgebraElement, AlgebraTag, ImaginaryUnit, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const CASES: usize = 50;
const SCAN_SAMPLES: usize = 10_000;
const ZERO: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Found {
    Empty,
    Real,
    Spherical,
    Single,
}

fn expected(kind: SphereZeroKind) -> Found {
    match kind {
        SphereZeroKind::Empty => Found::Empty,
        SphereZeroKind::RealZero => Found::Real,
        SphereZeroKind::SphericalZero => Found::Spherical,
        SphereZeroKind::SinglePoint => Found::Single,
    }
}

fn objective(f: &SliceFunction, alpha: f64, beta: f64, v: &AlgebraElement) -> f64 {
    lift_at(f, &[alpha], &[beta], v).norm_sqr()
}

fn project(v: AlgebraElement) -> AlgebraElement {
    let im = v.imag();
    im / im.norm()
}

/// Projected gradient descent on the unit sphere with central differences
/// and a backtracking line search.
fn descend(f: &SliceFunction, alpha: f64, beta: f64, start: AlgebraElement) -> AlgebraElement {
    let tag = start.tag();
    let h = 1e-6;
    let mut u = start;
    let mut value = objective(f, alpha, beta, &u);
    let mut step = 1.0;
    for _ in 0..500 {
        let mut grad = AlgebraElement::zero(tag);
        for k in 1..tag.dim() {
            let d = AlgebraElement::basis(tag, k) * h;
            let g = (objective(f, alpha, beta, &(u + d)) - objective(f, alpha, beta, &(u - d))) / (2.0 * h);
            grad += AlgebraElement::basis(tag, k) * g;
        }
        let mut improved = false;
        while step > 1e-14 {
            let candidate = project(u - grad * step);
            let cv = objective(f, alpha, beta, &candidate);
            // sufficient decrease with c = 1/2 rejects steps that overshoot the minimum
            if cv <= value - 0.5 * step * grad.norm_sqr() {
                u = candidate;
                value = cv;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || value < 1e-28 {
            break;
        }
    }
    u
}

fn scan(f: &SliceFunction, x: &SlicePoint, rng: &mut ChaCha8Rng) -> (Found, Option<AlgebraElement>) {
    let tag = f.tag();
    let (alpha, beta) = (x.alpha()[0], x.beta()[0]);
    if x.is_real() {
        let v = lift_at(f, &[alpha], &[0.0], &AlgebraElement::basis(tag, 1)).norm();
        return (if v < ZERO { Found::Real } else { Found::Empty }, None);
    }
    let mut best = (f64::INFINITY, AlgebraElement::zero(tag));
    let mut all_zero = true;
    for _ in 0..SCAN_SAMPLES {
        let u = sample_unit_imaginary_with(tag, rng).value();
        let v = lift_at(f, &[alpha], &[beta], &u).norm();
        all_zero &= v < ZERO;
        if v < best.0 {
            best = (v, u);
        }
    }
    if all_zero {
        return (Found::Spherical, None);
    }
    let u = descend(f, alpha, beta, best.1);
    if lift_at(f, &[alpha], &[beta], &u).norm() < ZERO {
        (Found::Single, Some(u))
    } else {
        (Found::Empty, None)
    }
}

fn linear(tag: AlgebraTag, a1: AlgebraElement, a0: AlgebraElement) -> StemPolynomial {
    StemPolynomial::from_terms(tag, 1, [(MultiIndex::new(vec![1]), a1), (MultiIndex::new(vec![0]), a0)])
}

fn random_quaternionic_point(tag: AlgebraTag, rng: &mut ChaCha8Rng) -> AlgebraElement {
    AlgebraElement::one(tag) * rng.random_range(-1.0..1.0)
        + sample_unit_imaginary_with(tag, rng).value() * rng.random_range(0.2..1.5)
}

/// One-variable functions of degree ≤ 3 with planted isolated, spherical and
/// real zeros, plus random ones, each paired with a sphere to classify.
fn cases(tag: AlgebraTag, rng: &mut ChaCha8Rng) -> Result<Vec<(SliceFunction, SlicePoint)>> {
    let one = AlgebraElement::one(tag);
    let mut out = Vec::with_capacity(CASES);
    for k in 0..15 {
        let q = random_quaternionic_point(tag, rng);
        let a1 = sample_element_with(tag, rng);
        let mut p = linear(tag, a1, -(q * a1));
        if k % 3 != 0 {
            p = star_product(&linear(tag, one, -q), &random_poly(tag, 1, (k % 3) as u32, 2, rng))?;
        }
        let sphere = decompose_point(&[q])?.with_unit(sample_unit_imaginary_with(tag, rng))?;
        out.push((SliceFunction::from(p), sphere));
    }
    for k in 0..10 {
        // c·(z² − 2 Re(q) z + |q|²) vanishes on the whole sphere of q
        let q = random_quaternionic_point(tag, rng);
        let c = sample_element_with(tag, rng);
        let mut p = StemPolynomial::from_terms(
            tag,
            1,
            [
                (MultiIndex::new(vec![2]), c),
                (MultiIndex::new(vec![1]), c * (-2.0 * q.re())),
                (MultiIndex::new(vec![0]), c * q.norm_sqr()),
            ],
        );
        if k % 2 == 1 {
            p = star_product(&linear(tag, one, one * rng.random_range(-1.0..1.0)), &p)?;
        }
        let sphere = decompose_point(&[q])?.with_unit(sample_unit_imaginary_with(tag, rng))?;
        out.push((SliceFunction::from(p), sphere));
    }
    for _ in 0..10 {
        let r = rng.random_range(-1.0..1.0);
        let p = star_product(&linear(tag, one, -one * r), &random_poly(tag, 1, 2, 2, rng))?;
        out.push((SliceFunction::from(p), SlicePoint::real(tag, vec![r])));
    }
    for k in 0..15 {
        let p = random_poly(tag, 1, 3, 4, rng);
        let x = if k < 12 {
            random_point(tag, 1, rng)
        } else {
            SlicePoint::real(tag, vec![rng.random_range(-1.0..1.0)])
        };
        out.push((SliceFunction::from(p), x));
    }
    Ok(out)
}

pub(super) fn run(r: &mut Runner) {
    let tag = r.tag;
    let mut rng = r.rng(Suite::Zeros);
    let mut kinds = Vec::new();
    r.check("zeros.disagreements", || {
        let mut disagreements = 0usize;
        for (index, (f, x)) in cases(tag, &mut rng)?.into_iter().enumerate() {
            let class = classify_sphere_zeros(&f, &x, ZERO_TOL)?;
            let (found, unit) = scan(&f, &x, &mut rng);
            let mut agree = expected(class.kind) == found;
            if let (Some(p), Some(u)) = (&class.point, unit) {
                let located = x.with_unit(ImaginaryUnit::normalized(u)?)?;
                agree &= p.coordinates()[0].dist(&located.coordinates()[0]) < 1e-5;
            }
            if !agree {
                eprintln!("zeros: case {index}: classifier {class:?}, brute force {found:?} {unit:?}");
                disagreements += 1;
            }
            if !x.is_real() {
                kinds.push(class.kind);
            }
        }
        Ok(disagreements as f64)
    });
    // on a non-real sphere the zero set is empty, one point or the whole sphere
    r.check("zeros.missing_structure_cases", || {
        let structure = [SphereZeroKind::Empty, SphereZeroKind::SinglePoint, SphereZeroKind::SphericalZero];
        Ok(structure.iter().filter(|k| !kinds.contains(k)).count() as f64)
    });
}
