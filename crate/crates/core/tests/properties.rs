//! Invariants checked on random inputs.

mod common;

use common::{random_matrix, random_unitary, rel_diff};
use invmetric::circularity::{circularity_lower_bound, squeeze_lower_bound, Embedding, SqueezeConfig};
use invmetric::convexbox::{box_lemma_bound, random_orthogonal, random_symmetric_polytope};
use invmetric::domains::maps::{model_automorphism, AutomorphismFamily, HolomorphicMap};
use invmetric::domains::{zoo, Domain};
use invmetric::domination::lambda_halfplane;
use invmetric::metrics::{distance_upper, kobayashi_distance, kobayashi_metric, Convention, MetricConfig};
use invmetric::numeric::{maximize_on_unit_sphere, Sampler, SphereSearch};
use invmetric::scaling::{frankel_tau, indicatrix_sigma, stretching_frame, FrameConfig};
use invmetric::{AffineMap, CLinearMap, CVector, C64};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn cvec(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), n).prop_map(CVector::new)
}

fn pick(zoo: &[Domain], k: usize) -> &Domain {
    &zoo[k % zoo.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hermitian_symmetry(u in cvec(3), v in cvec(3)) {
        let (a, b) = (u.dot(&v), v.dot(&u).conj());
        prop_assert!((a - b).norm() <= 1e-14);
    }

    #[test]
    fn determinant_is_multiplicative(n in 2usize..=4, seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let (a, b) = (random_matrix(n, &mut s), random_matrix(n, &mut s));
        let lhs = a.mul(&b).det().norm();
        let rhs = a.det().norm() * b.det().norm();
        prop_assert!(rel_diff(lhs, rhs) <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn metric_bracket_is_ordered(k in 0usize..64, seed in any::<u64>()) {
        let zoo = zoo::standard();
        let d = pick(&zoo, k);
        let mut s = Sampler::new(seed);
        let x = d.sample_interior(&mut s, 1).remove(0);
        let v = s.unit_direction(d.dim()).scale_real(s.uniform_in(0.1, 3.0));
        let b = kobayashi_metric(d, &x, &v, &MetricConfig::default()).unwrap();
        prop_assert!(0.0 <= b.lower && b.lower <= b.upper, "{}: {b:?}", d.name());
        if d.is_model() {
            prop_assert!(b.width() <= 1e-9 * b.upper.max(1.0));
        }
    }

    #[test]
    fn metric_is_homogeneous(k in 0usize..64, seed in any::<u64>(), c in complex()) {
        prop_assume!(c.norm() > 1e-3);
        let zoo = zoo::standard();
        let d = pick(&zoo, k);
        let mut s = Sampler::new(seed);
        let x = d.sample_interior(&mut s, 1).remove(0);
        let v = s.unit_direction(d.dim());
        let cfg = MetricConfig::default();
        let a = kobayashi_metric(d, &x, &v.scale(c), &cfg).unwrap();
        let b = kobayashi_metric(d, &x, &v, &cfg).unwrap();
        // brackets come out of section searches, homogeneous up to their resolution
        let tol = if b.is_exact() { 1e-14 } else { 1e-9 };
        prop_assert!(rel_diff(a.upper, c.norm() * b.upper) <= tol);
        prop_assert!(rel_diff(a.lower, c.norm() * b.lower) <= tol || b.lower == 0.0 && a.lower == 0.0);
    }

    #[test]
    fn ball_metric_is_unitarily_invariant(seed in any::<u64>()) {
        let ball = Domain::unit_ball(3).unwrap();
        let mut s = Sampler::new(seed);
        let u = random_unitary(3, &mut s);
        let z = ball.sample_interior(&mut s, 1).remove(0);
        let v = s.unit_direction(3).scale_real(s.uniform_in(0.1, 2.0));
        let cfg = MetricConfig::default();
        let a = kobayashi_metric(&ball, &u.apply(&z), &u.apply(&v), &cfg).unwrap().upper;
        let b = kobayashi_metric(&ball, &z, &v, &cfg).unwrap().upper;
        prop_assert!(rel_diff(a, b) <= 1e-10, "{a} vs {b}");
    }

    #[test]
    fn metric_decreases_under_inclusion(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let cfg = MetricConfig::default();
        let ball = Domain::unit_ball(2).unwrap();
        let poly = Domain::unit_polydisc(2).unwrap();
        let big = Domain::polydisc(vec![2.0, 2.0]).unwrap();
        let v = s.unit_direction(2);
        let x = ball.sample_interior(&mut s, 1).remove(0);
        let kb = kobayashi_metric(&ball, &x, &v, &cfg).unwrap().lower;
        let kp = kobayashi_metric(&poly, &x, &v, &cfg).unwrap().upper;
        prop_assert!(kb >= kp * (1.0 - 1e-12), "ball {kb} < polydisc {kp}");
        let y = poly.sample_interior(&mut s, 1).remove(0);
        let kp = kobayashi_metric(&poly, &y, &v, &cfg).unwrap().lower;
        let kq = kobayashi_metric(&big, &y, &v, &cfg).unwrap().upper;
        prop_assert!(kp >= kq * (1.0 - 1e-12));
    }

    #[test]
    fn distance_upper_obeys_triangle_inequality(k in 0usize..64, seed in any::<u64>()) {
        let zoo = zoo::standard();
        let d = pick(&zoo, k);
        let mut s = Sampler::new(seed);
        let p = d.sample_interior(&mut s, 3);
        let cfg = MetricConfig::default();
        let du = |a: &CVector, b: &CVector| distance_upper(d, a, b, &cfg).unwrap();
        let (xy, yz) = (du(&p[0], &p[1]), du(&p[1], &p[2]));
        // segment lengths of a metric upper bound need not form a distance;
        // the true distance, bounded below by the bracket, always does
        let xz = kobayashi_distance(d, &p[0], &p[2], &cfg).unwrap();
        prop_assert!(xz.lower <= (xy + yz) * (1.0 + 1e-9), "{}: {} > {xy} + {yz}", d.name(), xz.lower);
        if xz.lower == xz.upper {
            prop_assert!(xz.upper <= (xy + yz) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sphere_maximum_is_phase_stable(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let mut s = Sampler::new(seed);
        let a = random_matrix(2, &mut s);
        let basis = vec![CVector::basis(2, 0), CVector::basis(2, 1)];
        let phase = C64::from_polar(1.0, theta);
        let cfg = SphereSearch { coarse_samples: Some(256), ..SphereSearch::default() };
        let plain = maximize_on_unit_sphere(|v| a.apply(v).norm(), &basis, &cfg).unwrap();
        let turned = maximize_on_unit_sphere(|v| a.apply(&v.scale(phase)).norm(), &basis, &cfg).unwrap();
        prop_assert!(rel_diff(plain.value, turned.value) <= 1e-9);
        // the argmax spans the same complex line
        let overlap = plain.argmax.dot(&turned.argmax).norm();
        prop_assert!((overlap - 1.0).abs() <= 1e-6, "overlap {overlap}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stretching_values_are_unitarily_invariant(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = Domain::unit_polydisc(2).unwrap();
        let u = random_unitary(2, &mut s);
        let ud = Domain::affine_image(d.clone(), AffineMap::linear(u.clone())).unwrap();
        let x = d.sample_interior(&mut s, 1).remove(0).scale_real(0.8);
        let cfg = FrameConfig::default();
        let f = stretching_frame(&d, &x, &cfg).unwrap();
        let g = stretching_frame(&ud, &u.apply(&x), &cfg).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            prop_assert!(rel_diff(*a, *b) <= 1e-8, "{:?} vs {:?}", f.values, g.values);
        }
        let prod: f64 = f.values.iter().product();
        prop_assert!(rel_diff(f.linear.det().norm(), prod) <= 1e-9);
    }

    #[test]
    fn normalizations_fix_the_base_point(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = Domain::unit_ball(2).unwrap();
        let p = CVector::zeros(2);
        let target = d.sample_interior(&mut s, 1).remove(0);
        let phi = model_automorphism(&d, &p, &target).unwrap();
        let tau = frankel_tau(&phi, &p).unwrap();
        prop_assert!(tau.apply(&p).unwrap().norm() <= 1e-12);
        prop_assert!(tau.derivative(&p).unwrap().max_abs_diff(&CLinearMap::identity(2)) <= 1e-10);
        let (sigma, _) = indicatrix_sigma(&d, &phi, &p, &FrameConfig::default()).unwrap();
        prop_assert!(sigma.apply(&p).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn automorphisms_invert(k in 0usize..4, seed in any::<u64>()) {
        let models = [
            Domain::unit_ball(2).unwrap(),
            Domain::polydisc(vec![1.0, 2.0]).unwrap(),
            zoo::standard().into_iter().find(|d| d.name() == "left_halfplane2").unwrap(),
            zoo::standard().into_iter().find(|d| d.name() == "upper_halfplane").unwrap(),
        ];
        let d = &models[k];
        let mut s = Sampler::new(seed);
        let pts = d.sample_interior(&mut s, 12);
        let phi = model_automorphism(d, &pts[0], &pts[1]).unwrap();
        let inv = phi.inverse().unwrap();
        for z in &pts[2..] {
            let back = inv.apply(&phi.apply(z).unwrap()).unwrap();
            prop_assert!(back.distance(z) <= 1e-10 * (1.0 + z.norm()), "{}: {}", d.name(), back.distance(z));
        }
        let fam = AutomorphismFamily::drag(d.clone(), pts[0].clone(), pts[1].clone()).unwrap();
        let m = fam.member(0, 0.5).unwrap();
        prop_assert!(m.apply(&pts[0]).unwrap().distance(&fam.point(0.5)) <= 1e-10 * (1.0 + pts[0].norm()));
    }

    #[test]
    fn affine_images_agree_with_preimages(k in 0usize..64, seed in any::<u64>()) {
        let zoo = zoo::bounded();
        let d = pick(&zoo, k).clone();
        let n = d.dim();
        let mut s = Sampler::new(seed);
        let mut m = random_matrix(n, &mut s);
        while m.det().norm() < 0.05 {
            m = random_matrix(n, &mut s);
        }
        let t = AffineMap::new(m, s.unit_direction(n)).unwrap();
        let img = Domain::affine_image(d.clone(), t.clone()).unwrap();
        let r = d.bounding_radius();
        for _ in 0..50 {
            let z = s.unit_direction(n).scale_real(r * 1.2 * s.uniform());
            prop_assert_eq!(img.contains(&t.apply(&z)).unwrap(), d.contains(&z).unwrap());
        }
    }

    #[test]
    fn lemma_box_is_rotation_invariant(n in 2usize..=4, seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let body = random_symmetric_polytope(n, n + 2, &mut s);
        let q = random_orthogonal(n, &mut s);
        let a = box_lemma_bound(&body).unwrap();
        let b = box_lemma_bound(&body.rotated(&q).unwrap()).unwrap();
        for (x, y) in a.radii.iter().zip(&b.radii) {
            prop_assert!((x - y).abs() <= 1e-9, "{:?} vs {:?}", a.radii, b.radii);
        }
    }

    #[test]
    fn lambda_is_increasing(r in 0.0..5.0f64, dr in 1e-6..1.0f64) {
        for conv in [Convention::Standard, Convention::Paper] {
            prop_assert!(lambda_halfplane(r, conv).unwrap() < lambda_halfplane(r + dr, conv).unwrap());
        }
    }

    #[test]
    fn lambda_matches_tanh_parameter_near_zero(r in 1e-9..1e-2f64) {
        for conv in [Convention::Standard, Convention::Paper] {
            let (l, t) = (lambda_halfplane(r, conv).unwrap(), conv.tanh_parameter(r));
            prop_assert!((l - t).abs() <= 1e-3);
            // l / t = 1 / (1 - t)
            if r <= 1e-3 {
                prop_assert!((l / t - 1.0).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn certificates_survive_fresh_samples(k in 0usize..3, seed in any::<u64>()) {
        let d = [zoo::three_face_polyhedron(), zoo::real_cube(), zoo::modulus_balanced()][k].clone();
        let model = Domain::unit_polydisc(2).unwrap();
        let mut s = Sampler::new(seed);
        let x = d.sample_interior(&mut s, 1).remove(0).scale_real(0.5);
        let t = AffineMap::new(CLinearMap::identity(2), -&x).unwrap();
        let map = HolomorphicMap::affine("translate", t);
        let cfg = SqueezeConfig { verify_samples: 2000, seed, ..SqueezeConfig::default() };
        let c = squeeze_lower_bound(&d, &x, &model, Some(Embedding::new(map.clone())), &cfg).unwrap();
        prop_assert!(c.verification.holds(1e-9), "{:?}", c.verification);
        // independent draws: r Δ^n pulls back into Ω, and φ(Ω) lies in R Δ^n
        let inv = map.inverse().unwrap();
        let mut f = Sampler::new(seed ^ 0xf4e5);
        for w in model.sample_interior(&mut f, 10_000) {
            let z = inv.apply(&w.scale_real(c.inner)).unwrap();
            prop_assert!(d.margin(&z).unwrap() >= -1e-9, "inner sample {z:?}");
        }
        for y in d.sample_interior(&mut f, 10_000) {
            let g = map.apply(&y).unwrap().max_abs();
            prop_assert!(g <= c.outer + 1e-9, "outer gauge {g} > {}", c.outer);
        }
    }

    #[test]
    fn more_certificates_never_lower_the_bound(seed in any::<u64>()) {
        let d = zoo::three_face_polyhedron();
        let mut s = Sampler::new(seed);
        let x = d.sample_interior(&mut s, 1).remove(0).scale_real(0.5);
        let cfg = SqueezeConfig { verify_samples: 500, seed, ..SqueezeConfig::default() };
        let mut certs = Vec::new();
        for model in [Domain::unit_polydisc(2).unwrap(), Domain::unit_ball(2).unwrap()] {
            certs.push(squeeze_lower_bound(&d, &x, &model, None, &cfg).unwrap());
        }
        let one = circularity_lower_bound(&d, &x, &certs[..1], &cfg.metric).unwrap().lower;
        let two = circularity_lower_bound(&d, &x, &certs, &cfg.metric).unwrap().lower;
        prop_assert!(two >= one);
        prop_assert!(two >= certs.iter().map(|c| c.ratio * c.ratio).fold(0.0, f64::max) - 1e-15);
    }
}

#[test]
fn midpoints_of_interior_pairs_are_interior() {
    let mut s = Sampler::new(11);
    for d in zoo::standard() {
        let a = d.sample_interior(&mut s, 10_000);
        let b = d.sample_interior(&mut s, 10_000);
        for (x, y) in a.iter().zip(&b) {
            let m = x.axpy(C64::new(1.0, 0.0), y).scale_real(0.5);
            assert!(d.contains(&m).unwrap(), "{}: midpoint of {x:?} and {y:?}", d.name());
        }
    }
}

#[test]
fn supporting_half_spaces_contain_the_domain() {
    let mut s = Sampler::new(12);
    for d in zoo::standard() {
        let near = d.sample_boundary(&mut s, 1).pop();
        let hs = d.supporting_half_spaces(near.as_ref(), 8, 3).unwrap();
        assert!(!hs.is_empty(), "{}", d.name());
        let pts = d.sample_interior(&mut s, 10_000);
        for h in &hs {
            for z in &pts {
                assert!(h.slack(z) > -1e-12, "{}: {h:?} excludes {z:?}", d.name());
            }
        }
    }
}
