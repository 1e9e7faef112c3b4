use super::{e, max_of, Runner, Suite};
use hyperslice::algebra::sample_element_with;
use hyperslice::AlgebraTag;

fn basis_triples(tag: AlgebraTag) -> impl Iterator<Item = f64> {
    let d = tag.dim();
    (0..d * d * d).map(move |t| {
        let (a, b, c) = (e(tag, t / (d * d)), e(tag, t / d % d), e(tag, t % d));
        ((a * b) * c).dist(&(a * (b * c)))
    })
}

pub(super) fn run(r: &mut Runner) {
    let samples = r.cfg.samples;
    for tag in [AlgebraTag::Octonion, AlgebraTag::Quaternion] {
        let mut rng = r.rng(Suite::Algebra);
        let pairs: Vec<_> = (0..samples)
            .map(|_| (sample_element_with(tag, &mut rng), sample_element_with(tag, &mut rng)))
            .collect();
        let (alternativity, artin, norm) = match tag {
            AlgebraTag::Octonion => (
                "algebra.octonion.alternativity",
                "algebra.octonion.artin",
                "algebra.octonion.norm_composition",
            ),
            AlgebraTag::Quaternion => (
                "algebra.quaternion.alternativity",
                "algebra.quaternion.artin",
                "algebra.quaternion.norm_composition",
            ),
        };
        r.check(alternativity, || {
            Ok(max_of(pairs.iter().map(|&(x, y)| {
                let scale = 1.0 + x.norm_sqr() * y.norm();
                let left = ((x * x) * y).dist(&(x * (x * y)));
                let right = ((y * x) * x).dist(&(y * (x * x)));
                left.max(right) / scale
            })))
        });
        r.check(artin, || {
            Ok(max_of(pairs.iter().map(|&(x, y)| {
                let scale = 1.0 + x.norm_sqr() * y.norm_sqr();
                let a = ((x * y) * (y * x)).dist(&(x * ((y * y) * x)));
                let b = (x * (y * (x * y))).dist(&(((x * y) * x) * y));
                a.max(b) / scale
            })))
        });
        r.check(norm, || {
            Ok(max_of(pairs.iter().map(|&(x, y)| {
                ((x * y).norm() - x.norm() * y.norm()).abs() / (1.0 + x.norm() * y.norm())
            })))
        });
    }
    r.check("algebra.octonion.non_associative_triples", || {
        Ok(basis_triples(AlgebraTag::Octonion).filter(|d| *d > 0.0).count() as f64)
    });
    r.check("algebra.quaternion.basis_associator", || {
        Ok(max_of(basis_triples(AlgebraTag::Quaternion)))
    });
}
