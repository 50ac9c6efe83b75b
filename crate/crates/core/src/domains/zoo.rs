//! Ready-made domains used across the test-suites and the CLI.

use super::{Domain, Face, Gauge, Orientation};
use crate::{AffineMap, CLinearMap, CVector, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `{|z_1| < 1, |z_2| < 1, |z_1 + z_2| < 1.5}` with the normal corner `(1, -1)`.
pub fn three_face_polyhedron() -> Domain {
    let faces = vec![
        Face::modulus(CVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]), 1.0),
        Face::modulus(CVector::new(vec![c(0.0, 0.0), c(1.0, 0.0)]), 1.0),
        Face::modulus(CVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), 1.5),
    ];
    Domain::polyhedron(faces, CVector::zeros(2))
        .and_then(|d| d.with_corners(vec![CVector::new(vec![c(1.0, 0.0), c(-1.0, 0.0)])]))
        .expect("three-face polyhedron is valid")
        .with_name("three_face")
}

/// `{|Re z_i| < 1, |Im z_i| < 1}`: a real cube in `C^2`, built from real faces.
pub fn real_cube() -> Domain {
    let mut faces = Vec::new();
    for i in 0..2 {
        for phase in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
            faces.push(Face::Real { normal: CVector::basis(2, i).scale(phase), offset: 1.0 });
        }
    }
    Domain::polyhedron(faces, CVector::zeros(2)).expect("cube is valid").with_name("real_cube")
}

/// Balanced body with gauge `max(|z_1|, |z_1 + z_2| / 1.2)`.
pub fn modulus_balanced() -> Domain {
    let gauge = Gauge::MaxModulus {
        terms: vec![
            (CVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]), 1.0),
            (CVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), 1.2),
        ],
    };
    // |u_1| + |u_2| <= sqrt 2 on the unit sphere
    Domain::balanced(2, gauge, 1.2 / 2f64.sqrt() * 0.999).expect("gauge is valid").with_name("modulus_balanced")
}

/// Weighted `l^4` body `{|z_1|^4 + (2|z_2|)^4 < 1}`.
pub fn l4_balanced() -> Domain {
    Domain::balanced(2, Gauge::Lp { p: 4.0, weights: vec![1.0, 2.0] }, 0.45)
        .expect("gauge is valid")
        .with_name("l4_balanced")
}

/// A fixed non-unitary affine image of the three-face polyhedron.
pub fn sheared_polyhedron() -> Domain {
    let m = CLinearMap::from_rows(&[vec![c(1.0, 0.5), c(0.2, 0.0)], vec![c(0.0, -0.3), c(0.8, 0.1)]])
        .expect("square matrix");
    let t = AffineMap::new(m, CVector::new(vec![c(0.3, 0.0), c(-1.0, 2.0)])).expect("dimensions match");
    Domain::affine_image(three_face_polyhedron(), t).expect("invertible").with_name("sheared_three_face")
}

/// The standard zoo: every kind, bounded and unbounded.
pub fn standard() -> Vec<Domain> {
    vec![
        Domain::unit_ball(2).expect("valid").with_name("ball2"),
        Domain::unit_ball(3).expect("valid").with_name("ball3"),
        Domain::unit_polydisc(2).expect("valid").with_name("polydisc2"),
        Domain::polydisc(vec![1.0, 2.0]).expect("valid").with_name("polydisc_1_2"),
        Domain::half_plane_product(1, Orientation::Upper).expect("valid").with_name("upper_halfplane"),
        Domain::half_plane_product(2, Orientation::Left).expect("valid").with_name("left_halfplane2"),
        three_face_polyhedron(),
        real_cube(),
        modulus_balanced(),
        l4_balanced(),
        sheared_polyhedron(),
    ]
}

/// Bounded members of [`standard`].
pub fn bounded() -> Vec<Domain> {
    standard().into_iter().filter(|d| d.bounding_radius().is_finite()).collect()
}
