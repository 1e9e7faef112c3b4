use super::{e, max_of, orthogonal_unit, random_point, random_poly, Runner, Suite};
use hyperslice::algebra::{sample_element_with, sample_unit_imaginary_with};
use hyperslice::complexified::ComplexifiedElement;
use hyperslice::slice::{self as sl, SliceFunction, SlicePoint};
use hyperslice::stem::{ComplexPoint, Domain, Smoothness, StemFunction, StemPolynomial, Wirtinger};
use hyperslice::{AlgebraElement, AlgebraTag, Complex64, ImaginaryUnit, Result};
use rand::Rng;

const PRODUCT_TRIALS: usize = 100;
const SPHERICAL_TRIALS: usize = 100;

pub(super) fn representation(r: &mut Runner) {
    let tag = r.tag;
    let mut rng = r.rng(Suite::Representation);
    let mut general = Vec::new();
    let mut symmetric = Vec::new();
    let mut agreement = Vec::new();
    for n in 1..=3 {
        for _ in 0..r.cfg.samples {
            let f = SliceFunction::from(random_poly(tag, n, 4, 5, &mut rng));
            let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let beta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let i = sample_unit_imaginary_with(tag, &mut rng);
            let j = sample_unit_imaginary_with(tag, &mut rng);
            let mut k = sample_unit_imaginary_with(tag, &mut rng);
            while k.value().dist(&j.value()) < 1e-2 {
                k = sample_unit_imaginary_with(tag, &mut rng);
            }
            let at = |u: &AlgebraElement| sl::lift_at(&f, &alpha, &beta, u);
            let (fi, fj, fk, fm) = (at(&i.value()), at(&j.value()), at(&k.value()), at(&-j.value()));
            // (J − K)⁻¹ amplifies rounding by 1/|J − K|
            let gap = j.value().dist(&k.value());
            let scale = 1.0 + fi.norm() + (fj.norm() + fk.norm()) * (1.0 + 2.0 / gap);
            let sym_scale = 1.0 + fi.norm() + fj.norm() + fm.norm();
            general.push(sl::representation(&fj, &fk, &i, &j, &k).map(|g| g.dist(&fi) / scale));
            let sym = sl::representation_symmetric(&fj, &fm, &i, &j);
            symmetric.push(Ok(sym.dist(&fi) / sym_scale));
            agreement.push(sl::representation(&fj, &fm, &i, &j, &-j).map(|g| g.dist(&sym) / sym_scale));
        }
    }
    let collect = |v: Vec<Result<f64>>| -> Result<f64> { Ok(max_of(v.into_iter().collect::<Result<Vec<_>>>()?)) };
    r.check("representation.general", || collect(general));
    r.check("representation.symmetric", || collect(symmetric));
    r.check("representation.agreement", || collect(agreement));
}

pub(super) fn products(r: &mut Runner) {
    let tag = r.tag;
    let mut rng = r.rng(Suite::Products);
    r.check("products.star_vs_slice", || {
        let mut worst = 0.0f64;
        for t in 0..PRODUCT_TRIALS {
            let n = 1 + t % 3;
            let p = random_poly(tag, n, 3, 4, &mut rng);
            let q = random_poly(tag, n, 3, 4, &mut rng);
            let star = SliceFunction::from(sl::star_product(&p, &q)?);
            let prod = sl::slice_product(&SliceFunction::from(p), &SliceFunction::from(q))?;
            let x = random_point(tag, n, &mut rng);
            let (a, b) = (sl::lift_evaluate(&star, &x)?, sl::lift_evaluate(&prod, &x)?);
            worst = worst.max(a.dist(&b) / (1.0 + a.norm()));
        }
        Ok(worst)
    });
    r.check("products.leibniz", || {
        let mut worst = 0.0f64;
        for t in 0..PRODUCT_TRIALS {
            let n = 1 + t % 2;
            let f = SliceFunction::from(random_poly(tag, n, 3, 4, &mut rng));
            let g = SliceFunction::from(random_poly(tag, n, 3, 4, &mut rng));
            let fg = sl::slice_product(&f, &g)?;
            let x = random_point(tag, n, &mut rng);
            let (sf, sg) = (sl::spherical(&f, &x)?, sl::spherical(&g, &x)?);
            let lhs = sl::spherical_derivative(&fg, &x)?;
            let rhs = sf.derivative * sg.value + sf.value * sg.derivative;
            let scale = 1.0 + lhs.norm() + (sf.derivative.norm() + sf.value.norm()) * (sg.derivative.norm() + sg.value.norm());
            worst = worst.max(lhs.dist(&rhs) / scale);
        }
        Ok(worst)
    });
    r.check("products.real_pointwise", || {
        let one = AlgebraElement::one(tag);
        let mut worst = 0.0f64;
        for t in 0..PRODUCT_TRIALS {
            let n = 1 + t % 3;
            let mut f = StemPolynomial::zero(tag, n);
            for (mu, a) in random_poly(tag, n, 3, 4, &mut rng).terms() {
                f.add_term(mu.clone(), one * a.re());
            }
            let f = SliceFunction::from(f);
            let g = SliceFunction::from(random_poly(tag, n, 3, 4, &mut rng));
            let x = random_point(tag, n, &mut rng);
            let lhs = sl::lift_evaluate(&sl::slice_product(&f, &g)?, &x)?;
            let (fx, gx) = (sl::lift_evaluate(&f, &x)?, sl::lift_evaluate(&g, &x)?);
            worst = worst.max(lhs.dist(&(fx * gx)) / (1.0 + fx.norm() * gx.norm()));
        }
        Ok(worst)
    });
    r.check("products.pointwise_witness", || {
        // f = I(e₁), g = I(z): (f·g)(x) = x e₁ while f(x)g(x) = e₁ x
        let f = SliceFunction::from(StemPolynomial::constant(e(tag, 1), 1));
        let g = SliceFunction::from(StemPolynomial::monomial(1, &[1], AlgebraElement::one(tag)));
        let j = orthogonal_unit(&ImaginaryUnit::basis(tag, 1), &mut rng);
        let x = SlicePoint::new(vec![0.3], vec![0.5], j)?;
        let product = sl::lift_evaluate(&sl::slice_product(&f, &g)?, &x)?;
        Ok(product.dist(&(sl::lift_evaluate(&f, &x)? * sl::lift_evaluate(&g, &x)?)))
    });
}

/// `∂_s h(x) = ½ Im(x)⁻¹ (h(x) − h(x̄))` for a function given pointwise.
fn derivative_of(h: impl Fn(&SlicePoint) -> Result<AlgebraElement>, x: &SlicePoint) -> Result<AlgebraElement> {
    Ok(sl::im_inverse(x)? * (h(x)? - h(&x.conjugate())?) * 0.5)
}

pub(super) fn spherical(r: &mut Runner) {
    let tag = r.tag;
    let mut rng = r.rng(Suite::Spherical);
    let cases: Vec<_> = (0..SPHERICAL_TRIALS)
        .map(|t| {
            let n = 1 + t % 3;
            (SliceFunction::from(random_poly(tag, n, 4, 5, &mut rng)), random_point(tag, n, &mut rng))
        })
        .collect();
    // rounding in h(x) − h(x̄) is amplified by 1/|β|
    let scale = |x: &SlicePoint, v: &AlgebraElement| (1.0 + v.norm()) * (1.0 + 1.0 / x.beta_norm());
    r.check("spherical.double_derivative", || {
        let mut worst = 0.0f64;
        for (f, x) in &cases {
            let d = sl::spherical_derivative(f, x)?;
            let dd = derivative_of(|y| sl::spherical_derivative(f, y), x)?;
            worst = worst.max(dd.norm() / scale(x, &d));
        }
        Ok(worst)
    });
    r.check("spherical.derivative_of_value", || {
        let mut worst = 0.0f64;
        for (f, x) in &cases {
            let v = sl::spherical_value(f, x)?;
            let dv = derivative_of(|y| sl::spherical_value(f, y), x)?;
            worst = worst.max(dv.norm() / scale(x, &v));
        }
        Ok(worst)
    });
    r.check("spherical.identity", || {
        let mut worst = 0.0f64;
        for (f, x) in &cases {
            let s = sl::spherical(f, x)?;
            let fx = sl::lift_evaluate(f, x)?;
            let rebuilt = s.value + sl::im_part(x) * s.derivative;
            worst = worst.max(rebuilt.dist(&fx) / (1.0 + s.value.norm() + s.derivative.norm() * x.beta_norm()));
        }
        Ok(worst)
    });
}

/// `F(z) = z̄₁·a` (times 1 in the other variables), with exact Wirtinger derivatives.
fn antiholomorphic(tag: AlgebraTag, n: usize, a: AlgebraElement) -> Result<SliceFunction> {
    let stem = StemFunction::from_fn(n, tag, Smoothness::Analytic, move |z| {
        let w = z[0].conj();
        ComplexifiedElement::new(a * w.re, a * w.im)
    })
    .with_wirtinger(move |_, axis| Wirtinger {
        dz: ComplexifiedElement::zero(tag),
        dzbar: if axis == 0 {
            ComplexifiedElement::from_real(a)
        } else {
            ComplexifiedElement::zero(tag)
        },
    })
    .build();
    SliceFunction::new(stem)
}

pub(super) fn regularity(r: &mut Runner) {
    let tag = r.tag;
    let mut rng = r.rng(Suite::Regularity);
    let functions: Vec<SliceFunction> = if r.cfg.functions.is_empty() || r.cfg.algebra != tag {
        (0..2).map(|_| random_poly(tag, 2, 3, 6, &mut rng).into()).collect()
    } else {
        r.cfg.functions.iter().cloned().map(SliceFunction::from).collect()
    };
    let units: Vec<_> = (0..3).map(|_| sample_unit_imaginary_with(tag, &mut rng)).collect();
    let samples: Vec<Vec<ComplexPoint>> = functions
        .iter()
        .map(|f| Domain::everywhere().samples(f.arity(), 8, rng.random()))
        .collect();
    let tol = 1e-8;
    r.check("regularity.polynomial", || {
        let mut worst = 0.0f64;
        for (f, grid) in functions.iter().zip(&samples) {
            let report = sl::check_slice_regular(f, &units, grid, tol)?;
            worst = worst.max(report.max_slice_residual).max(report.stem_residual);
        }
        Ok(worst)
    });
    let a = sample_element_with(tag, &mut rng);
    let grid = Domain::everywhere().samples(2, 8, rng.random());
    r.check("regularity.antiholomorphic", || {
        // the slice residual of z̄₁a is a + J(−Ja) = 2a
        let f = antiholomorphic(tag, 2, a)?;
        let report = sl::check_slice_regular(&f, &units, &grid, tol)?;
        if report.pass {
            return Ok(f64::INFINITY);
        }
        Ok((report.max_slice_residual - 2.0 * a.norm()).abs() / (2.0 * a.norm()))
    });
    r.check("regularity.osgood", || {
        let mut worst = 0.0f64;
        for (f, grid) in functions.iter().zip(&samples) {
            let anchors: Vec<ComplexPoint> = (0..3)
                .map(|_| {
                    ComplexPoint::new(
                        (0..f.arity())
                            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
                            .collect(),
                    )
                })
                .collect();
            let line: Vec<Complex64> = (0..6)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let report = sl::osgood_check(f, &units, &anchors, &line, grid, tol)?;
            if !report.restrictions_regular {
                return Ok(f64::INFINITY);
            }
            worst = worst
                .max(report.max_restriction_residual)
                .max(report.joint.max_slice_residual)
                .max(report.joint.stem_residual);
        }
        Ok(worst)
    });
    r.check("regularity.two_slice", || {
        // |∂F/∂z̄₁| = |a| and ∂F/∂z̄₂ = 0, recovered from the slices at two units
        let f = antiholomorphic(tag, 2, a)?;
        let mut worst = 0.0f64;
        for z in &grid {
            let r0 = sl::stem_residual_from_slices(&f, z, &units[0], &units[1], 0)?;
            let r1 = sl::stem_residual_from_slices(&f, z, &units[0], &units[1], 1)?;
            worst = worst.max((r0 - a.norm()).abs() / a.norm()).max(r1 / a.norm());
        }
        Ok(worst)
    });
}
