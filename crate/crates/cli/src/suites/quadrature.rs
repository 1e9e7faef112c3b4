use super::{max_of, orthogonal_unit, random_poly, Runner, Suite};
use crate::report::ConvergenceRecord;
use hyperslice::algebra::{sample_element_with, sample_unit_imaginary_with};
use hyperslice::complexified::ComplexifiedElement;
use hyperslice::integral::*;
use hyperslice::slice::{lift_evaluate, off_plane_distance, SliceFunction, SlicePoint};
use hyperslice::stem::{Domain, Smoothness, StemFunction, StemPolynomial, Wirtinger};
use hyperslice::{AlgebraElement, AlgebraTag, Complex64, ImaginaryUnit, Result};
use rand_chacha::ChaCha8Rng;

/// Evaluation points, cycled over the variables; all well inside the unit circle.
const PATTERN: [(f64, f64); 4] = [(0.3, 0.2), (-0.1, 0.4), (0.2, -0.25), (-0.3, -0.1)];

fn point(n: usize, scale: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let (a, b) = PATTERN[k % PATTERN.len()];
            Complex64::new(a * scale, b * scale)
        })
        .collect()
}

fn spec(m: usize, r: usize, v: usize) -> Result<QuadratureSpec> {
    QuadratureSpec::new(m, r, v)
}

/// Configured polynomials when they belong to this algebra, else random cubics.
fn test_functions(r: &Runner, count: usize, rng: &mut ChaCha8Rng) -> Vec<SliceFunction> {
    if !r.cfg.functions.is_empty() && r.cfg.algebra == r.tag {
        return r.cfg.functions.iter().cloned().map(SliceFunction::from).collect();
    }
    (0..count)
        .map(|_| random_poly(r.tag, r.cfg.n, 3, 6, rng).into())
        .collect()
}

/// `F(z) = z̄₁·c`, smooth but not holomorphic.
fn conjugate_first(tag: AlgebraTag, n: usize, c: AlgebraElement) -> Result<SliceFunction> {
    let stem = StemFunction::from_fn(n, tag, Smoothness::Analytic, move |z| {
        let w = z[0].conj();
        ComplexifiedElement::new(c * w.re, c * w.im)
    })
    .with_wirtinger(move |_, axis| Wirtinger {
        dz: ComplexifiedElement::zero(tag),
        dzbar: if axis == 0 {
            ComplexifiedElement::from_real(c)
        } else {
            ComplexifiedElement::zero(tag)
        },
    })
    .build();
    SliceFunction::new(stem)
}

pub(super) fn bm(r: &mut Runner) {
    let (tag, n, q) = (r.tag, r.cfg.n, r.cfg.quadrature);
    let mut rng = r.rng(Suite::Bm);
    let j = sample_unit_imaginary_with(tag, &mut rng);
    let functions = test_functions(r, 3, &mut rng);
    let c = sample_element_with(tag, &mut rng);
    let timings = r.cfg.record_timing;
    let dom = PolydiscDomain::unit(n, j).expect("n >= 1");
    let x = dom.slice_point(&point(n, 1.0)).expect("pattern lies inside the polydisc");
    let mut discrepancies = Vec::new();
    r.check("bm.calibration", || {
        let one = SliceFunction::from(StemPolynomial::constant(AlgebraElement::one(tag), n));
        let got = bm_boundary_integral_checked(&one, &dom, &x, &q)?;
        discrepancies.push(got.discrepancy());
        Ok(got.direct.dist(&AlgebraElement::one(tag)))
    });
    r.check("bm.reproduction", || {
        let mut worst = 0.0f64;
        for f in &functions {
            let got = bm_boundary_integral_checked(f, &dom, &x, &q)?;
            discrepancies.push(got.discrepancy());
            worst = worst.max(got.direct.dist(&lift_evaluate(f, &x)?));
        }
        Ok(worst)
    });
    let mut rows = Vec::new();
    r.check("bm.monotone_in_m", || {
        let specs = [
            spec(16, q.radial_nodes, q.volume_refinement)?,
            spec(32, q.radial_nodes, q.volume_refinement)?,
            spec(64, q.radial_nodes, q.volume_refinement)?,
        ];
        rows = convergence_study(&functions[0], &dom, &x, &specs)?;
        Ok(max_of(rows.windows(2).map(|w| w[1].abs_error / w[0].abs_error)))
    });
    r.convergence
        .extend(rows.iter().map(|row| ConvergenceRecord::from_row(row, timings)));
    r.check("bm.componentwise", || Ok(max_of(discrepancies.iter().copied())));
    r.check("bm.volume_regular", || {
        Ok(bm_volume_integral(&functions[0], &dom, &x, &q)?.norm())
    });
    r.check("bm.general_c1", || {
        let f = conjugate_first(tag, n, c)?;
        let (value, _) = bm_reproduce(&f, &dom, &x, &q)?;
        Ok(value.dist(&lift_evaluate(&f, &x)?))
    });
}

pub(super) fn off_slice(r: &mut Runner) {
    let (tag, n, q) = (r.tag, r.cfg.n, r.cfg.quadrature);
    let mut rng = r.rng(Suite::OffSlice);
    let j = sample_unit_imaginary_with(tag, &mut rng);
    let functions = test_functions(r, 2, &mut rng);
    let units: Vec<ImaginaryUnit> = vec![
        orthogonal_unit(&j, &mut rng),
        orthogonal_unit(&j, &mut rng),
        sample_unit_imaginary_with(tag, &mut rng),
    ];
    let coords = point(n, 1.0);
    let alpha: Vec<f64> = coords.iter().map(|z| z.re).collect();
    let beta: Vec<f64> = coords.iter().map(|z| z.im).collect();
    let real_coefficients = {
        let mut p = StemPolynomial::zero(tag, n);
        for (mu, a) in random_poly(tag, n, 3, 6, &mut rng).terms() {
            p.add_term(mu.clone(), AlgebraElement::one(tag) * a.re());
        }
        SliceFunction::from(p)
    };
    let dom = PolydiscDomain::unit(n, j).expect("n >= 1");
    r.check("off_slice.regular", || {
        let mut worst = 0.0f64;
        for f in &functions {
            for i in &units {
                let y = SlicePoint::new(alpha.clone(), beta.clone(), *i)?;
                worst = worst.max(off_slice_evaluate(f, &dom, &y, &q)?.dist(&lift_evaluate(f, &y)?));
            }
        }
        Ok(worst)
    });
    r.check("off_slice.collapse", || {
        let x = SlicePoint::new(alpha.clone(), beta.clone(), j)?;
        let f = &functions[0];
        Ok(off_slice_evaluate(f, &dom, &x, &q)?.dist(&bm_boundary_integral(f, &dom, &x, &q)?))
    });
    r.check("off_slice.real_plane", || {
        let mut worst = 0.0f64;
        for i in &units {
            let y = SlicePoint::new(alpha.clone(), beta.clone(), *i)?;
            let value = off_slice_evaluate(&real_coefficients, &dom, &y, &q)?;
            worst = worst.max(off_plane_distance(&value, i));
        }
        Ok(worst)
    });
}

/// `F(z) = (z₁ − 2)⁻¹·c`: regular on the unit polydisc, undefined at `z₁ = 2`.
fn pole_stem(tag: AlgebraTag, n: usize, c: AlgebraElement) -> Result<SliceFunction> {
    let stem = StemFunction::from_fn(n, tag, Smoothness::Analytic, move |z| {
        let w = (z[0] - 2.0).inv();
        ComplexifiedElement::new(c * w.re, c * w.im)
    })
    .with_domain(Domain::new(1.5, |z| (z[0] - 2.0).norm() > 1e-9))
    .build();
    SliceFunction::new(stem)
}

pub(super) fn hartogs(r: &mut Runner) {
    let (tag, n, q) = (r.tag, r.cfg.n, r.cfg.quadrature);
    let mut rng = r.rng(Suite::Hartogs);
    let j = sample_unit_imaginary_with(tag, &mut rng);
    if n >= 2 {
        let functions = test_functions(r, 1, &mut rng);
        let c = sample_element_with(tag, &mut rng);
        r.check("hartogs.extension", || {
            // f is known only off the hole K = 0.5·D; g must reproduce it inside K
            let f = pole_stem(tag, n, c)?;
            let dom = PolydiscDomain::unit(n, j)?;
            let g = hartogs_extend(&f, &dom, 0.5, &q)?;
            let mut worst = 0.0f64;
            for scale in [0.0, 0.6, 1.0] {
                let x = dom.slice_point(&point(n, scale))?;
                worst = worst.max(g.evaluate(&x)?.dist(&lift_evaluate(&f, &x)?));
            }
            Ok(worst)
        });
        r.check("hartogs.polynomial", || {
            let dom = PolydiscDomain::unit(n, j)?;
            let g = hartogs_extend(&functions[0], &dom, 0.5, &q)?;
            let x = dom.slice_point(&point(n, 0.5))?;
            Ok(g.evaluate(&x)?.dist(&lift_evaluate(&functions[0], &x)?))
        });
    }
    r.check("hartogs.one_variable_failure", || {
        // 1/z on the annulus 0.25 < |z| < 1: the circle integral gives 0 at 0.7J, not 1/(0.7J)
        let stem = StemFunction::from_fn(1, tag, Smoothness::Analytic, move |z| {
            ComplexifiedElement::scalar(tag, z[0].inv())
        })
        .with_domain(Domain::new(1.0, |z| z[0].norm() > 0.25))
        .build();
        let f = SliceFunction::new(stem)?;
        let dom = PolydiscDomain::unit(1, j)?;
        let x = dom.slice_point(&[Complex64::new(0.0, 0.7)])?;
        let g = scaled_boundary_integral(&f, &dom, HARTOGS_CONTOUR, &x, &q)?;
        Ok(g.dist(&lift_evaluate(&f, &x)?))
    });
}
