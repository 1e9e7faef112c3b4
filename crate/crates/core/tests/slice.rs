use hyperslice::algebra::{sample_element_with, sample_unit_imaginary_with};
use hyperslice::slice::*;
use hyperslice::stem::{ComplexPoint, Domain, MultiIndex, StemPolynomial};
use hyperslice::{AlgebraElement, AlgebraTag, Complex64, ImaginaryUnit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(tag: AlgebraTag, n: usize, degree: u32, terms: usize, rng: &mut ChaCha8Rng) -> StemPolynomial {
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

fn random_point(tag: AlgebraTag, n: usize, rng: &mut ChaCha8Rng) -> SlicePoint {
    SlicePoint::new(
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        sample_unit_imaginary_with(tag, rng),
    )
    .unwrap()
}

fn tag_of(octonion: bool) -> AlgebraTag {
    if octonion {
        AlgebraTag::Octonion
    } else {
        AlgebraTag::Quaternion
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lift_is_invariant_under_sign_flip(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=3) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SliceFunction::from(random_poly(tag, n, 4, 5, &mut rng));
        let x = random_point(tag, n, &mut rng);
        let j = x.unit().value();
        let neg: Vec<f64> = x.beta().iter().map(|b| -b).collect();
        prop_assert_eq!(lift_at(&f, x.alpha(), x.beta(), &j), lift_at(&f, x.alpha(), &neg, &-j));
    }

    #[test]
    fn lift_is_real_linear(seed in any::<u64>(), octonion in any::<bool>(), s in -3.0f64..3.0) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(tag, 2, 3, 4, &mut rng);
        let q = random_poly(tag, 2, 3, 4, &mut rng);
        let x = random_point(tag, 2, &mut rng);
        let (fp, fq) = (SliceFunction::from(p.clone()), SliceFunction::from(q.clone()));
        let sum = SliceFunction::from(p.add(&q).unwrap());
        let lhs = lift_evaluate(&sum, &x).unwrap();
        let rhs = lift_evaluate(&fp, &x).unwrap() + lift_evaluate(&fq, &x).unwrap();
        prop_assert!(lhs.dist(&rhs) <= 1e-12 * (1.0 + lhs.norm()));
        let scaled = lift_evaluate(&fp.scale(s), &x).unwrap();
        prop_assert!(scaled.dist(&(lift_evaluate(&fp, &x).unwrap() * s)) <= 1e-12 * (1.0 + scaled.norm()));
    }

    #[test]
    fn representation_formulas_reproduce_lifts(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=3) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SliceFunction::from(random_poly(tag, n, 4, 5, &mut rng));
        let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let beta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let [i, j, k] = [0; 3].map(|_| sample_unit_imaginary_with(tag, &mut rng));
        let at = |u: &AlgebraElement| lift_at(&f, &alpha, &beta, u);
        let truth = at(&i.value());
        let scale = 1.0 + truth.norm() + at(&j.value()).norm() + at(&k.value()).norm();
        let general = representation(&at(&j.value()), &at(&k.value()), &i, &j, &k).unwrap();
        prop_assert!(general.dist(&truth) <= 1e-12 * scale, "{}", general.dist(&truth));
        let sym = representation_symmetric(&at(&j.value()), &at(&(-j.value())), &i, &j);
        prop_assert!(sym.dist(&truth) <= 1e-12 * scale);
        let via_general = representation(&at(&j.value()), &at(&(-j.value())), &i, &j, &-j).unwrap();
        prop_assert!(sym.dist(&via_general) <= 1e-13 * scale);
    }

    #[test]
    fn spherical_operations_are_constant_on_spheres(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=3) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SliceFunction::from(random_poly(tag, n, 4, 5, &mut rng));
        let x = random_point(tag, n, &mut rng);
        let s = spherical(&f, &x).unwrap();
        let scale = 1.0 + s.value.norm() + s.derivative.norm();
        for y in [x.conjugate(), x.with_unit(sample_unit_imaginary_with(tag, &mut rng)).unwrap()] {
            let t = spherical(&f, &y).unwrap();
            // ∂_s ∂_s f = 0 and ∂_s v_s f = 0 amount to this constancy
            prop_assert!(t.value.dist(&s.value) <= 1e-10 * scale);
            prop_assert!(t.derivative.dist(&s.derivative) <= 1e-10 * scale);
        }
        let rebuilt = s.value + im_part(&x) * s.derivative;
        prop_assert!(rebuilt.dist(&lift_evaluate(&f, &x).unwrap()) <= 1e-10 * scale);
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=2) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SliceFunction::from(random_poly(tag, n, 3, 4, &mut rng));
        let g = SliceFunction::from(random_poly(tag, n, 3, 4, &mut rng));
        let fg = slice_product(&f, &g).unwrap();
        let x = random_point(tag, n, &mut rng);
        let (sf, sg) = (spherical(&f, &x).unwrap(), spherical(&g, &x).unwrap());
        let lhs = spherical_derivative(&fg, &x).unwrap();
        let rhs = sf.derivative * sg.value + sf.value * sg.derivative;
        prop_assert!(lhs.dist(&rhs) <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn star_product_lifts_to_slice_product(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=3) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(tag, n, 2, 4, &mut rng);
        let q = random_poly(tag, n, 2, 4, &mut rng);
        let star = SliceFunction::from(star_product(&p, &q).unwrap());
        let prod = slice_product(&SliceFunction::from(p), &SliceFunction::from(q)).unwrap();
        let x = random_point(tag, n, &mut rng);
        let (a, b) = (lift_evaluate(&star, &x).unwrap(), lift_evaluate(&prod, &x).unwrap());
        prop_assert!(a.dist(&b) <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn injective_or_constant_on_spheres(seed in any::<u64>(), octonion in any::<bool>()) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SliceFunction::from(random_poly(tag, 1, 3, 4, &mut rng));
        let x = random_point(tag, 1, &mut rng);
        prop_assume!(spherical_derivative(&f, &x).unwrap().norm() > 1e-6);
        let values: Vec<AlgebraElement> = (0..100)
            .map(|_| {
                let y = x.with_unit(sample_unit_imaginary_with(tag, &mut rng)).unwrap();
                lift_evaluate(&f, &y).unwrap()
            })
            .collect();
        for (a, va) in values.iter().enumerate() {
            for vb in &values[a + 1..] {
                prop_assert!(va.dist(vb) > 0.0);
            }
        }
    }

    #[test]
    fn slice_point_json_round_trip(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=4) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(tag, n, &mut rng);
        prop_assert_eq!(SlicePoint::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn decompose_inverts_coordinates(seed in any::<u64>(), octonion in any::<bool>(), n in 1usize..=4) {
        let tag = tag_of(octonion);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(tag, n, &mut rng);
        let y = decompose_point(&x.coordinates()).unwrap();
        prop_assert!(y.unit().value().dist(&x.unit().value()) <= 1e-12);
        for (a, b) in y.beta().iter().zip(x.beta()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn constant_on_sphere_when_derivative_vanishes() {
    let tag = AlgebraTag::Octonion;
    let c = AlgebraElement::basis(tag, 5);
    // z² + 1 is real-valued-stem times c; at α = 0, β = 1 its F₂ vanishes
    let f = SliceFunction::from(StemPolynomial::from_terms(
        tag,
        1,
        [(MultiIndex::new(vec![2]), c), (MultiIndex::new(vec![0]), c * 3.0)],
    ));
    let x = SlicePoint::new(vec![0.0], vec![1.0], ImaginaryUnit::basis(tag, 1)).unwrap();
    assert!(spherical_derivative(&f, &x).unwrap().norm() <= 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let values: Vec<_> = (0..100)
        .map(|_| lift_evaluate(&f, &x.with_unit(sample_unit_imaginary_with(tag, &mut rng)).unwrap()).unwrap())
        .collect();
    for a in &values {
        for b in &values {
            assert!(a.dist(b) <= 1e-10);
        }
    }
}

#[test]
fn real_functions_preserve_slice_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for tag in AlgebraTag::all() {
        let one = AlgebraElement::one(tag);
        let f = SliceFunction::from(StemPolynomial::from_terms(
            tag,
            2,
            [
                (MultiIndex::new(vec![2, 1]), one * 0.5),
                (MultiIndex::new(vec![0, 3]), -one),
                (MultiIndex::new(vec![1, 0]), one * 2.0),
            ],
        ));
        let samples: Vec<_> = (0..20).map(|_| random_point(tag, 2, &mut rng)).collect();
        assert!(is_real_slice(&f, &samples).unwrap());
        for x in &samples {
            assert!(off_plane_distance(&lift_evaluate(&f, x).unwrap(), &x.unit()) <= 1e-10);
        }
        let g = SliceFunction::from(random_poly(tag, 2, 2, 3, &mut rng));
        assert!(!is_real_slice(&g, &samples).unwrap());
    }
}

#[test]
fn regularity_and_osgood() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for tag in AlgebraTag::all() {
        let f = SliceFunction::from(random_poly(tag, 2, 3, 6, &mut rng));
        let units: Vec<_> = (0..3).map(|_| sample_unit_imaginary_with(tag, &mut rng)).collect();
        let anchors: Vec<ComplexPoint> = (0..3)
            .map(|_| {
                ComplexPoint::new(
                    (0..2)
                        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
                        .collect(),
                )
            })
            .collect();
        let line: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let grid = Domain::everywhere().samples(2, 8, 53);
        let report = osgood_check(&f, &units, &anchors, &line, &grid, 1e-8).unwrap();
        assert!(report.restrictions_regular, "{report:?}");
        assert!(report.joint.pass, "{report:?}");
        let r = stem_residual_from_slices(&f, &grid[0], &units[0], &units[1], 1).unwrap();
        assert!(r <= 1e-8);
    }
}

/// Classification from lift evaluations only: 10⁴ random units per sphere,
/// then projected descent on the unit sphere from the best sample.
mod brute_force {
    use super::*;

    pub const ZERO: f64 = 1e-7;

    #[derive(Debug, PartialEq, Eq, Clone, Copy)]
    pub enum Found {
        Empty,
        Real,
        Spherical,
        Single,
    }

    fn objective(f: &SliceFunction, alpha: f64, beta: f64, v: &AlgebraElement) -> f64 {
        lift_at(f, &[alpha], &[beta], v).norm_sqr()
    }

    fn project(v: AlgebraElement) -> AlgebraElement {
        let im = v.imag();
        im / im.norm()
    }

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

    /// Returns the class and, for a single zero, its unit.
    pub fn scan(f: &SliceFunction, x: &SlicePoint, rng: &mut ChaCha8Rng) -> (Found, Option<AlgebraElement>) {
        let tag = f.tag();
        let (alpha, beta) = (x.alpha()[0], x.beta()[0]);
        if x.is_real() {
            let v = lift_at(f, &[alpha], &[0.0], &AlgebraElement::basis(tag, 1)).norm();
            return (if v < ZERO { Found::Real } else { Found::Empty }, None);
        }
        let mut best = (f64::INFINITY, AlgebraElement::zero(tag));
        let mut all_zero = true;
        for _ in 0..10_000 {
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
}

fn expected(kind: SphereZeroKind) -> brute_force::Found {
    match kind {
        SphereZeroKind::Empty => brute_force::Found::Empty,
        SphereZeroKind::RealZero => brute_force::Found::Real,
        SphereZeroKind::SphericalZero => brute_force::Found::Spherical,
        SphereZeroKind::SinglePoint => brute_force::Found::Single,
    }
}

fn linear(tag: AlgebraTag, a1: AlgebraElement, a0: AlgebraElement) -> StemPolynomial {
    StemPolynomial::from_terms(tag, 1, [(MultiIndex::new(vec![1]), a1), (MultiIndex::new(vec![0]), a0)])
}

/// 50 one-variable test functions of degree ≤ 3, each paired with a sphere.
fn zero_cases(tag: AlgebraTag, rng: &mut ChaCha8Rng) -> Vec<(SliceFunction, SlicePoint)> {
    let mut cases = Vec::new();
    let one = AlgebraElement::one(tag);
    for k in 0..15 {
        // x·a₁ − q·a₁ vanishes exactly at q; multiply on the right by a random factor
        let q = one * rng.random_range(-1.0..1.0)
            + sample_unit_imaginary_with(tag, rng).value() * rng.random_range(0.2..1.5);
        let a1 = sample_element_with(tag, rng);
        let mut p = linear(tag, a1, -(q * a1));
        if k % 3 != 0 {
            p = star_product(&linear(tag, one, -q), &random_poly(tag, 1, (k % 3) as u32, 2, rng)).unwrap();
        }
        let point = decompose_point(&[q]).unwrap();
        let other = point.with_unit(sample_unit_imaginary_with(tag, rng)).unwrap();
        cases.push((SliceFunction::from(p), other));
    }
    for k in 0..10 {
        let q = one * rng.random_range(-1.0..1.0)
            + sample_unit_imaginary_with(tag, rng).value() * rng.random_range(0.2..1.5);
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
            p = star_product(&linear(tag, one, one * rng.random_range(-1.0..1.0)), &p).unwrap();
        }
        let x = decompose_point(&[q]).unwrap().with_unit(sample_unit_imaginary_with(tag, rng)).unwrap();
        cases.push((SliceFunction::from(p), x));
    }
    for _ in 0..10 {
        let r = rng.random_range(-1.0..1.0);
        let p = star_product(&linear(tag, one, -one * r), &random_poly(tag, 1, 2, 2, rng)).unwrap();
        cases.push((SliceFunction::from(p), SlicePoint::real(tag, vec![r])));
    }
    for k in 0..15 {
        let p = random_poly(tag, 1, 3, 4, rng);
        let x = if k < 12 {
            random_point(tag, 1, rng)
        } else {
            SlicePoint::real(tag, vec![rng.random_range(-1.0..1.0)])
        };
        cases.push((SliceFunction::from(p), x));
    }
    cases
}

#[test]
fn zero_classification_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for tag in AlgebraTag::all() {
        let cases = zero_cases(tag, &mut rng);
        assert_eq!(cases.len(), 50);
        let mut seen = std::collections::BTreeSet::new();
        for (n, (f, x)) in cases.iter().enumerate() {
            let class = classify_sphere_zeros(f, x, ZERO_TOL).unwrap();
            let (found, unit) = brute_force::scan(f, x, &mut rng);
            assert_eq!(expected(class.kind), found, "case {n}: {class:?}");
            if let (Some(p), Some(u)) = (&class.point, unit) {
                let located = x.with_unit(ImaginaryUnit::normalized(u).unwrap()).unwrap();
                assert!(p.coordinates()[0].dist(&located.coordinates()[0]) < 1e-5, "case {n}");
            }
            seen.insert(format!("{:?}", class.kind));
        }
        for kind in ["SinglePoint", "SphericalZero", "RealZero", "Empty"] {
            assert!(seen.contains(kind), "{kind} never occurs");
        }
    }
}
