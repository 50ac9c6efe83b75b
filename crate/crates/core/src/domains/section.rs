//! Planar sections `{ζ : x + ζ w ∈ Ω}` described as intersections of discs
//! and half-planes in the `ζ`-plane.
//!
//! Every exactly representable kind reduces to this form, which gives
//! closed-form boundary distances and ray exits.

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum ZetaConstraint {
    /// `|ζ - center| < radius`
    Disc { center: C64, radius: f64 },
    /// `Re(ζ m) < beta`
    HalfPlane { m: C64, beta: f64 },
}

impl ZetaConstraint {
    /// Distance from `ζ = 0` to the boundary of the constraint set.
    pub fn distance_from_origin(&self) -> f64 {
        match *self {
            ZetaConstraint::Disc { center, radius } => radius - center.norm(),
            ZetaConstraint::HalfPlane { m, beta } => {
                let mn = m.norm();
                if mn == 0.0 {
                    f64::INFINITY
                } else {
                    beta / mn
                }
            }
        }
    }

    /// Smallest `t > 0` with `t * dir` on the boundary (`dir` of unit modulus).
    pub fn exit_along(&self, dir: C64) -> f64 {
        match *self {
            ZetaConstraint::Disc { center, radius } => {
                // |t - c'| = R with c' = center * conj(dir)
                let c = center * dir.conj();
                let disc = radius * radius - c.im * c.im;
                if disc <= 0.0 {
                    0.0
                } else {
                    (c.re + disc.sqrt()).max(0.0)
                }
            }
            ZetaConstraint::HalfPlane { m, beta } => {
                let rate = (dir * m).re;
                if rate > 0.0 {
                    (beta / rate).max(0.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Boundary point nearest to `ζ = 0`.
    pub fn nearest_point(&self) -> C64 {
        match *self {
            ZetaConstraint::Disc { center, radius } => {
                let cn = center.norm();
                if cn == 0.0 {
                    C64::new(radius, 0.0)
                } else {
                    center - center * (radius / cn)
                }
            }
            ZetaConstraint::HalfPlane { m, beta } => m.conj() * (beta / m.norm_sqr()),
        }
    }

    #[cfg(test)]
    pub fn contains(&self, zeta: C64) -> bool {
        match *self {
            ZetaConstraint::Disc { center, radius } => (zeta - center).norm() < radius,
            ZetaConstraint::HalfPlane { m, beta } => (zeta * m).re < beta,
        }
    }
}

/// Nearest boundary point of the intersection and its distance from 0.
pub(crate) fn nearest(cs: &[ZetaConstraint]) -> Option<(C64, f64)> {
    cs.iter()
        .map(|c| (c.nearest_point(), c.distance_from_origin()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

pub(crate) fn exit_along(cs: &[ZetaConstraint], dir: C64) -> f64 {
    cs.iter().map(|c| c.exit_along(dir)).fold(f64::INFINITY, f64::min)
}
