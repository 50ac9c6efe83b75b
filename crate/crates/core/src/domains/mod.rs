//! Convex domains in `C^n` exposed through geometric oracles.
//!
//! Every downstream computation goes through [`Domain`]: membership with a
//! margin, exact or bisected planar-section boundary distances, supporting
//! half-spaces, interior sampling, and (for the models) automorphisms.

pub mod maps;
pub(crate) mod section;
pub mod spec;
pub mod zoo;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Sampler;
use crate::{AffineMap, CVector, C64};
use section::ZetaConstraint;

pub use maps::{cayley, HolomorphicMap, MapStep, Mobius};

/// Cap on ray length used when sampling unbounded domains.
const SAMPLE_CAP: f64 = 8.0;
/// Angular resolution of the numeric section search.
const SECTION_ANGLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `Im ζ > 0` per factor.
    Upper,
    /// `Re ζ < 0` per factor.
    Left,
}

/// A face of a convex polyhedron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Face {
    /// `|f(z)| < bound` with `f(z) = sum coeffs_i z_i + shift`.
    Modulus { coeffs: CVector, shift: C64, bound: f64 },
    /// `Re <z, normal> < offset`.
    Real { normal: CVector, offset: f64 },
}

impl Face {
    pub fn modulus(coeffs: CVector, bound: f64) -> Self {
        Face::Modulus { coeffs, shift: C64::new(0.0, 0.0), bound }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            Face::Modulus { coeffs, bound, .. } => {
                coeffs.check_dim(n)?;
                if coeffs.norm() == 0.0 || !(*bound > 0.0) {
                    return Err(Error::Degenerate("modulus face needs nonzero coefficients and a positive bound".into()));
                }
            }
            Face::Real { normal, offset } => {
                normal.check_dim(n)?;
                if normal.norm() == 0.0 || !offset.is_finite() {
                    return Err(Error::Degenerate("real face needs a nonzero normal".into()));
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance from `z` to the face's level set, signed positive inside.
    pub fn margin(&self, z: &CVector) -> f64 {
        match self {
            Face::Modulus { coeffs, shift, bound } => (bound - (coeffs.pair(z) + shift).norm()) / coeffs.norm(),
            Face::Real { normal, offset } => (offset - z.dot(normal).re) / normal.norm(),
        }
    }

    fn line_constraint(&self, x: &CVector, w: &CVector) -> Option<ZetaConstraint> {
        match self {
            Face::Modulus { coeffs, shift, bound } => {
                let aw = coeffs.pair(w);
                if aw.norm() == 0.0 {
                    return None;
                }
                let fx = coeffs.pair(x) + shift;
                Some(ZetaConstraint::Disc { center: -fx / aw, radius: bound / aw.norm() })
            }
            Face::Real { normal, offset } => {
                let m = w.dot(normal);
                (m.norm() > 0.0).then(|| ZetaConstraint::HalfPlane { m, beta: offset - x.dot(normal).re })
            }
        }
    }

    /// Supporting half-space of this face tangent where `f` has phase `theta`.
    fn half_space(&self, theta: f64, near: &CVector) -> SupportingHalfSpace {
        match self {
            Face::Modulus { coeffs, shift, bound } => {
                let kn = coeffs.norm();
                let ph = C64::from_polar(1.0, theta);
                // Re(e^{-iθ} f(z)) < c  <=>  Re <z, e^{iθ} conj(k)> < c - Re(e^{-iθ} s)
                let normal = coeffs.conj().scale(ph).scale_real(1.0 / kn);
                let center = -(ph.conj() * shift) / kn;
                let radius = bound / kn;
                let fz = coeffs.pair(near) + shift;
                let base = near.axpy((ph * *bound - fz) / (kn * kn), &coeffs.conj());
                SupportingHalfSpace { offset: center.re + radius, normal, base, disc: Some((center, radius)) }
            }
            Face::Real { normal, offset } => {
                let an = normal.norm();
                let a = normal.scale_real(1.0 / an);
                let b = offset / an;
                let base = near.axpy(C64::new(b - near.dot(&a).re, 0.0), &a);
                SupportingHalfSpace { normal: a, offset: b, base, disc: None }
            }
        }
    }
}

pub type GaugeFn = Arc<dyn Fn(&CVector) -> f64 + Send + Sync>;

/// Minkowski functional of a balanced convex body.
#[derive(Clone)]
pub enum Gauge {
    /// `max_k |sum c_ki z_i| / s_k`.
    MaxModulus { terms: Vec<(CVector, f64)> },
    /// `(sum (w_i |z_i|)^p)^{1/p}`, `p >= 1`.
    Lp { p: f64, weights: Vec<f64> },
    Custom { name: String, f: GaugeFn },
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::MaxModulus { terms } => f.debug_struct("MaxModulus").field("terms", terms).finish(),
            Gauge::Lp { p, weights } => f.debug_struct("Lp").field("p", p).field("weights", weights).finish(),
            Gauge::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish_non_exhaustive(),
        }
    }
}

impl Gauge {
    pub fn eval(&self, z: &CVector) -> f64 {
        match self {
            Gauge::MaxModulus { terms } => terms.iter().map(|(c, s)| c.pair(z).norm() / s).fold(0.0, f64::max),
            Gauge::Lp { p, weights } => {
                if p.is_infinite() {
                    z.iter().zip(weights).map(|(zi, w)| w * zi.norm()).fold(0.0, f64::max)
                } else {
                    z.iter().zip(weights).map(|(zi, w)| (w * zi.norm()).powf(*p)).sum::<f64>().powf(1.0 / p)
                }
            }
            Gauge::Custom { f, .. } => f(z),
        }
    }

    fn faces(&self) -> Option<Vec<Face>> {
        match self {
            Gauge::MaxModulus { terms } => Some(terms.iter().map(|(c, s)| Face::modulus(c.clone(), *s)).collect()),
            _ => None,
        }
    }
}

/// `Re <z, normal> < offset`, touching the closure at `base`.
///
/// When `disc` is set the functional `<z, normal>` maps the whole domain
/// into the disc `(center, radius)`, which gives sharper projections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportingHalfSpace {
    pub normal: CVector,
    pub offset: f64,
    pub base: CVector,
    pub disc: Option<(C64, f64)>,
}

impl SupportingHalfSpace {
    /// `offset - Re <z, normal>`; positive on the open half-space.
    pub fn slack(&self, z: &CVector) -> f64 {
        self.offset - z.dot(&self.normal).re
    }

    pub fn functional(&self, z: &CVector) -> C64 {
        z.dot(&self.normal)
    }
}

#[derive(Clone, Debug)]
pub enum DomainKind {
    UnitBall,
    Polydisc { radii: Vec<f64> },
    HalfPlaneProduct { orientation: Orientation },
    ConvexPolyhedron { faces: Vec<Face> },
    BalancedConvex { gauge: Gauge, inner_radius: f64 },
    /// `map(inner)`.
    AffineImage { inner: Box<Domain>, map: AffineMap, inverse: AffineMap },
}

impl DomainKind {
    pub fn label(&self) -> &'static str {
        match self {
            DomainKind::UnitBall => "ball",
            DomainKind::Polydisc { .. } => "polydisc",
            DomainKind::HalfPlaneProduct { .. } => "halfplane",
            DomainKind::ConvexPolyhedron { .. } => "polyhedron",
            DomainKind::BalancedConvex { .. } => "balanced",
            DomainKind::AffineImage { .. } => "affine",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Domain {
    name: String,
    kind: DomainKind,
    dim: usize,
    basepoint: CVector,
    bounding_radius: f64,
    corners: Vec<CVector>,
}

impl Domain {
    pub fn unit_ball(n: usize) -> Result<Self> {
        check_dim_positive(n)?;
        Ok(Domain {
            name: format!("ball{n}"),
            kind: DomainKind::UnitBall,
            dim: n,
            basepoint: CVector::zeros(n),
            bounding_radius: 1.0,
            corners: Vec::new(),
        })
    }

    pub fn polydisc(radii: Vec<f64>) -> Result<Self> {
        let n = radii.len();
        check_dim_positive(n)?;
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Degenerate("polydisc radii must be positive and finite".into()));
        }
        let bounding_radius = radii.iter().map(|r| r * r).sum::<f64>().sqrt();
        Ok(Domain {
            name: format!("polydisc{n}"),
            kind: DomainKind::Polydisc { radii },
            dim: n,
            basepoint: CVector::zeros(n),
            bounding_radius,
            corners: Vec::new(),
        })
    }

    pub fn unit_polydisc(n: usize) -> Result<Self> {
        Domain::polydisc(vec![1.0; n])
    }

    /// Product of `n` half-planes; unbounded, so the bounding radius is infinite.
    pub fn half_plane_product(n: usize, orientation: Orientation) -> Result<Self> {
        check_dim_positive(n)?;
        let b = match orientation {
            Orientation::Upper => C64::new(0.0, 1.0),
            Orientation::Left => C64::new(-1.0, 0.0),
        };
        let name = match orientation {
            Orientation::Upper => format!("upper_halfplane{n}"),
            Orientation::Left => format!("left_halfplane{n}"),
        };
        Ok(Domain {
            name,
            kind: DomainKind::HalfPlaneProduct { orientation },
            dim: n,
            basepoint: CVector::new(vec![b; n]),
            bounding_radius: f64::INFINITY,
            corners: Vec::new(),
        })
    }

    /// Intersection of `faces`; `basepoint` must be interior.
    pub fn polyhedron(faces: Vec<Face>, basepoint: CVector) -> Result<Self> {
        let n = basepoint.dim();
        check_dim_positive(n)?;
        if faces.is_empty() {
            return Err(Error::Degenerate("polyhedron without faces".into()));
        }
        for f in &faces {
            f.check(n)?;
        }
        let mut d = Domain {
            name: format!("polyhedron{n}"),
            kind: DomainKind::ConvexPolyhedron { faces },
            dim: n,
            basepoint,
            bounding_radius: f64::INFINITY,
            corners: Vec::new(),
        };
        d.check_basepoint()?;
        d.bounding_radius = d.sampled_bounding_radius();
        Ok(d)
    }

    /// Balanced convex body `{g < 1}` containing the ball of `inner_radius`.
    pub fn balanced(n: usize, gauge: Gauge, inner_radius: f64) -> Result<Self> {
        check_dim_positive(n)?;
        if let Gauge::Lp { p, weights } = &gauge {
            if weights.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
            }
            if !(*p >= 1.0) || weights.iter().any(|w| !(*w > 0.0)) {
                return Err(Error::Degenerate("Lp gauge needs p >= 1 and positive weights".into()));
            }
        }
        if let Gauge::MaxModulus { terms } = &gauge {
            for (c, s) in terms {
                c.check_dim(n)?;
                if !(*s > 0.0) {
                    return Err(Error::Degenerate("gauge term scale must be positive".into()));
                }
            }
        }
        let mut d = Domain {
            name: format!("balanced{n}"),
            kind: DomainKind::BalancedConvex { gauge, inner_radius },
            dim: n,
            basepoint: CVector::zeros(n),
            bounding_radius: f64::INFINITY,
            corners: Vec::new(),
        };
        d.check_gauge(inner_radius)?;
        d.bounding_radius = d.sampled_bounding_radius();
        Ok(d)
    }

    /// The image `map(inner)`; `map` must be invertible.
    pub fn affine_image(inner: Domain, map: AffineMap) -> Result<Self> {
        if map.dim() != inner.dim {
            return Err(Error::DimensionMismatch { expected: inner.dim, found: map.dim() });
        }
        let inverse = map.inverse()?;
        let basepoint = map.apply(&inner.basepoint);
        let corners = inner.corners.iter().map(|c| map.apply(c)).collect();
        let name = format!("affine({})", inner.name);
        let dim = inner.dim;
        let mut d = Domain {
            name,
            kind: DomainKind::AffineImage { inner: Box::new(inner), map, inverse },
            dim,
            basepoint,
            bounding_radius: f64::INFINITY,
            corners,
        };
        d.bounding_radius = match &d.kind {
            DomainKind::AffineImage { inner, map, .. } if inner.bounding_radius.is_finite() => {
                let s = map.linear.singular_values();
                let smax = s.iter().cloned().fold(0.0, f64::max);
                smax * inner.bounding_radius + map.translation.norm()
            }
            _ => f64::INFINITY,
        };
        Ok(d)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_basepoint(mut self, basepoint: CVector) -> Result<Self> {
        basepoint.check_dim(self.dim)?;
        self.basepoint = basepoint;
        self.check_basepoint()?;
        Ok(self)
    }

    /// Declares boundary corners where the normality condition is checked.
    pub fn with_corners(mut self, corners: Vec<CVector>) -> Result<Self> {
        for c in &corners {
            c.check_dim(self.dim)?;
        }
        self.corners = corners;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basepoint(&self) -> &CVector {
        &self.basepoint
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn corners(&self) -> &[CVector] {
        &self.corners
    }

    /// Ball, polydisc or half-plane product: exact metric and automorphisms.
    pub fn is_model(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::UnitBall | DomainKind::Polydisc { .. } | DomainKind::HalfPlaneProduct { .. }
        )
    }

    /// Complete circular about the origin.
    pub fn is_circular(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::UnitBall | DomainKind::Polydisc { .. } | DomainKind::BalancedConvex { .. }
        )
    }

    pub fn faces(&self) -> Option<&[Face]> {
        match &self.kind {
            DomainKind::ConvexPolyhedron { faces } => Some(faces),
            _ => None,
        }
    }

    /// Minkowski functional about 0 for circular domains.
    pub fn gauge(&self, z: &CVector) -> Option<f64> {
        match &self.kind {
            DomainKind::UnitBall => Some(z.norm()),
            DomainKind::Polydisc { radii } => {
                Some(z.iter().zip(radii).map(|(zi, r)| zi.norm() / r).fold(0.0, f64::max))
            }
            DomainKind::BalancedConvex { gauge, .. } => Some(gauge.eval(z)),
            _ => None,
        }
    }

    /// Signed membership score: positive exactly on the interior, zero on
    /// the boundary. For the models and polyhedra it is the Euclidean
    /// distance to the boundary; balanced bodies use `1 - g`.
    pub fn margin(&self, z: &CVector) -> Result<f64> {
        z.check_dim(self.dim)?;
        Ok(self.margin_unchecked(z))
    }

    fn margin_unchecked(&self, z: &CVector) -> f64 {
        match &self.kind {
            DomainKind::UnitBall => 1.0 - z.norm(),
            DomainKind::Polydisc { radii } => {
                z.iter().zip(radii).map(|(zi, r)| r - zi.norm()).fold(f64::INFINITY, f64::min)
            }
            DomainKind::HalfPlaneProduct { orientation } => z
                .iter()
                .map(|zi| match orientation {
                    Orientation::Upper => zi.im,
                    Orientation::Left => -zi.re,
                })
                .fold(f64::INFINITY, f64::min),
            DomainKind::ConvexPolyhedron { faces } => faces.iter().map(|f| f.margin(z)).fold(f64::INFINITY, f64::min),
            DomainKind::BalancedConvex { gauge, .. } => 1.0 - gauge.eval(z),
            DomainKind::AffineImage { inner, inverse, .. } => inner.margin_unchecked(&inverse.apply(z)),
        }
    }

    pub fn contains(&self, z: &CVector) -> Result<bool> {
        Ok(self.margin(z)? > 0.0)
    }

    pub(crate) fn require_interior(&self, z: &CVector) -> Result<()> {
        let m = self.margin(z)?;
        if m > 0.0 {
            Ok(())
        } else {
            Err(Error::NotInterior { margin: m })
        }
    }

    /// Exact description of `{ζ : x + ζ w ∈ Ω}` when one exists.
    pub(crate) fn line_constraints(&self, x: &CVector, w: &CVector) -> Option<Vec<ZetaConstraint>> {
        match &self.kind {
            DomainKind::UnitBall => {
                let ww = w.norm_sqr();
                let p = x.dot(w);
                let r2 = (1.0 - x.norm_sqr() + p.norm_sqr() / ww) / ww;
                Some(vec![ZetaConstraint::Disc { center: -p / ww, radius: r2.max(0.0).sqrt() }])
            }
            DomainKind::Polydisc { radii } => Some(
                (0..self.dim)
                    .filter(|&i| w[i].norm() > 0.0)
                    .map(|i| ZetaConstraint::Disc { center: -x[i] / w[i], radius: radii[i] / w[i].norm() })
                    .collect(),
            ),
            DomainKind::HalfPlaneProduct { orientation } => Some(
                (0..self.dim)
                    .filter(|&i| w[i].norm() > 0.0)
                    .map(|i| match orientation {
                        Orientation::Upper => ZetaConstraint::HalfPlane { m: C64::new(0.0, 1.0) * w[i], beta: x[i].im },
                        Orientation::Left => ZetaConstraint::HalfPlane { m: w[i], beta: -x[i].re },
                    })
                    .collect(),
            ),
            DomainKind::ConvexPolyhedron { faces } => Some(faces.iter().filter_map(|f| f.line_constraint(x, w)).collect()),
            DomainKind::BalancedConvex { gauge, .. } => {
                let faces = gauge.faces()?;
                Some(faces.iter().filter_map(|f| f.line_constraint(x, w)).collect())
            }
            DomainKind::AffineImage { inner, inverse, .. } => {
                inner.line_constraints(&inverse.apply(x), &inverse.linear.apply(w))
            }
        }
    }

    /// Euclidean distance from `x` to the boundary of `Ω ∩ (x + C v)`.
    ///
    /// Exact for every kind except balanced bodies with `Lp` or custom
    /// gauges, which bisect along 64 section directions and refine the
    /// minimum by golden-section search.
    pub fn section_boundary_distance(&self, x: &CVector, v: &CVector) -> Result<f64> {
        Ok(self.nearest_section_point(x, v)?.1)
    }

    /// Nearest boundary point of the section through `x` along `v`, with its distance.
    pub fn nearest_section_point(&self, x: &CVector, v: &CVector) -> Result<(CVector, f64)> {
        x.check_dim(self.dim)?;
        v.check_dim(self.dim)?;
        let w = v.normalized().ok_or(Error::ZeroVector)?;
        self.require_interior(x)?;
        if let Some(cs) = self.line_constraints(x, &w) {
            return Ok(match section::nearest(&cs) {
                Some((zeta, d)) if d.is_finite() => (x.axpy(zeta, &w), d.max(0.0)),
                _ => (x.clone(), f64::INFINITY),
            });
        }
        let exit = |theta: f64| self.ray_exit_unchecked(x, &w.scale(C64::from_polar(1.0, theta)));
        let step = std::f64::consts::TAU / SECTION_ANGLES as f64;
        let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
        for k in 0..SECTION_ANGLES {
            let t = k as f64 * step;
            let d = exit(t);
            if d < best_d {
                best_t = t;
                best_d = d;
            }
        }
        if best_d.is_finite() {
            let (t, d) = golden_min(exit, best_t - step, best_t + step, 1e-10);
            if d < best_d {
                best_t = t;
                best_d = d;
            }
        }
        Ok((x.axpy(C64::from_polar(best_d, best_t), &w), best_d))
    }

    /// Largest `t` with `x + s u` interior for all `s < t` (`u` of unit norm).
    pub fn ray_exit(&self, x: &CVector, u: &CVector) -> Result<f64> {
        x.check_dim(self.dim)?;
        u.check_dim(self.dim)?;
        let u = u.normalized().ok_or(Error::ZeroVector)?;
        self.require_interior(x)?;
        Ok(self.ray_exit_unchecked(x, &u))
    }

    fn ray_exit_unchecked(&self, x: &CVector, u: &CVector) -> f64 {
        if let Some(cs) = self.line_constraints(x, u) {
            return section::exit_along(&cs, C64::new(1.0, 0.0));
        }
        // bisection on the margin, which is concave for balanced bodies
        let mut hi = if self.bounding_radius.is_finite() { 2.0 * self.bounding_radius } else { 1.0 };
        let mut grow = 0;
        while self.margin_unchecked(&x.axpy(C64::new(hi, 0.0), u)) > 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.margin_unchecked(&x.axpy(C64::new(mid, 0.0), u)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Seeded interior samples: radial from the basepoint with radial
    /// fraction `U^{1/(2n)}`. Affine images push forward the inner samples.
    pub fn sample_interior(&self, sampler: &mut Sampler, count: usize) -> Vec<CVector> {
        if let DomainKind::AffineImage { inner, map, .. } = &self.kind {
            return inner.sample_interior(sampler, count).iter().map(|z| map.apply(z)).collect();
        }
        let cap = SAMPLE_CAP * (1.0 + self.basepoint.norm());
        let expo = 1.0 / (2 * self.dim) as f64;
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = sampler.unit_direction(self.dim);
            let t_max = self.ray_exit_unchecked(&self.basepoint, &u).min(cap);
            let s = sampler.uniform().powf(expo) * t_max * (1.0 - 1e-9);
            let z = self.basepoint.axpy(C64::new(s, 0.0), &u);
            if self.margin_unchecked(&z) > 0.0 {
                out.push(z);
            }
        }
        out
    }

    /// Points on the boundary along seeded rays from the basepoint; rays
    /// that do not exit (unbounded kinds) are skipped.
    pub fn sample_boundary(&self, sampler: &mut Sampler, count: usize) -> Vec<CVector> {
        if let DomainKind::AffineImage { inner, map, .. } = &self.kind {
            return inner.sample_boundary(sampler, count).iter().map(|z| map.apply(z)).collect();
        }
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count && tries < 64 * count.max(1) {
            tries += 1;
            let u = sampler.unit_direction(self.dim);
            let t = self.ray_exit_unchecked(&self.basepoint, &u);
            if t.is_finite() {
                out.push(self.basepoint.axpy(C64::new(t, 0.0), &u));
            }
        }
        out
    }

    /// Supporting half-spaces: every face for polyhedra (tangent at `near`
    /// when given) and the exact tangent at `near` for smooth kinds, plus
    /// `count` additional tangents at seeded boundary points.
    pub fn supporting_half_spaces(&self, near: Option<&CVector>, count: usize, seed: u64) -> Result<Vec<SupportingHalfSpace>> {
        if let Some(p) = near {
            p.check_dim(self.dim)?;
        }
        let mut sampler = Sampler::new(seed);
        let mut out = Vec::new();
        match &self.kind {
            DomainKind::AffineImage { inner, map, inverse } => {
                let near_inner = near.map(|p| inverse.apply(p));
                for h in inner.supporting_half_spaces(near_inner.as_ref(), count, seed)? {
                    out.push(push_forward_half_space(&h, map, inverse)?);
                }
                return Ok(out);
            }
            DomainKind::ConvexPolyhedron { faces } => {
                let anchor = near.cloned().unwrap_or_else(|| self.basepoint.clone());
                for f in faces {
                    let theta = match f {
                        Face::Modulus { coeffs, shift, .. } => (coeffs.pair(&anchor) + shift).arg(),
                        Face::Real { .. } => 0.0,
                    };
                    out.push(f.half_space(theta, &anchor));
                }
                for _ in 0..count {
                    let f = &faces[sampler.index(faces.len())];
                    let theta = std::f64::consts::TAU * sampler.uniform();
                    if let Face::Modulus { .. } = f {
                        out.push(f.half_space(theta, &self.basepoint));
                    }
                }
                return Ok(out);
            }
            _ => {}
        }
        if let Some(p) = near {
            if let Some(h) = self.tangent_toward(p) {
                out.push(h);
            }
        }
        for _ in 0..count {
            let u = sampler.unit_direction(self.dim);
            let q = match &self.kind {
                DomainKind::HalfPlaneProduct { .. } => self.basepoint.axpy(C64::new(sampler.normal(), 0.0), &u),
                _ => u,
            };
            if let Some(h) = self.tangent_toward(&q) {
                out.push(h);
            }
        }
        Ok(out)
    }

    /// Tangent half-space at the boundary point "in the direction of" `p`:
    /// the radial projection for circular kinds and the coordinatewise
    /// projection for half-plane products.
    fn tangent_toward(&self, p: &CVector) -> Option<SupportingHalfSpace> {
        match &self.kind {
            DomainKind::UnitBall => {
                let q = p.normalized()?;
                Some(SupportingHalfSpace { normal: q.clone(), offset: 1.0, base: q, disc: Some((C64::new(0.0, 0.0), 1.0)) })
            }
            DomainKind::Polydisc { radii } => {
                let (i, _) = p
                    .iter()
                    .zip(radii)
                    .map(|(z, r)| z.norm() / r)
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(&b.1))?;
                let ph = if p[i].norm() > 0.0 { p[i] / p[i].norm() } else { C64::new(1.0, 0.0) };
                let mut base = p.clone();
                base[i] = ph * radii[i];
                let normal = CVector::basis(self.dim, i).scale(ph);
                Some(SupportingHalfSpace { normal, offset: radii[i], base, disc: Some((C64::new(0.0, 0.0), radii[i])) })
            }
            DomainKind::HalfPlaneProduct { orientation } => {
                // the coordinate with the smallest margin
                let (i, _) = p
                    .iter()
                    .map(|z| match orientation {
                        Orientation::Upper => z.im,
                        Orientation::Left => -z.re,
                    })
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))?;
                let mut base = p.clone();
                let normal = match orientation {
                    Orientation::Upper => {
                        base[i] = C64::new(p[i].re, 0.0);
                        CVector::basis(self.dim, i).scale(C64::new(0.0, -1.0))
                    }
                    Orientation::Left => {
                        base[i] = C64::new(0.0, p[i].im);
                        CVector::basis(self.dim, i)
                    }
                };
                Some(SupportingHalfSpace { normal, offset: 0.0, base, disc: None })
            }
            DomainKind::BalancedConvex { gauge, .. } => {
                let g = gauge.eval(p);
                if !(g > 0.0) {
                    return None;
                }
                let q = p.scale_real(1.0 / g);
                if let Some(faces) = gauge.faces() {
                    // the active term gives an exact supporting functional
                    let (k, _) = faces
                        .iter()
                        .map(|f| -f.margin(&q))
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(&b.1))?;
                    let f = &faces[k];
                    let theta = match f {
                        Face::Modulus { coeffs, shift, .. } => (coeffs.pair(&q) + shift).arg(),
                        Face::Real { .. } => 0.0,
                    };
                    return Some(f.half_space(theta, &q));
                }
                let a = real_gradient(|z| gauge.eval(z), &q)?;
                let b = q.dot(&a).re;
                if !(b > 0.0) {
                    return None;
                }
                Some(SupportingHalfSpace { normal: a, offset: b, base: q, disc: Some((C64::new(0.0, 0.0), b)) })
            }
            DomainKind::ConvexPolyhedron { .. } | DomainKind::AffineImage { .. } => None,
        }
    }

    fn check_basepoint(&self) -> Result<()> {
        let m = self.margin_unchecked(&self.basepoint);
        if m > 0.0 {
            Ok(())
        } else {
            Err(Error::NotInterior { margin: m })
        }
    }

    fn check_gauge(&self, inner_radius: f64) -> Result<()> {
        let DomainKind::BalancedConvex { gauge, .. } = &self.kind else { return Ok(()) };
        if !(inner_radius > 0.0) {
            return Err(Error::Degenerate("inner radius must be positive".into()));
        }
        let mut s = Sampler::new(0x9a09e);
        for _ in 0..256 {
            let u = s.unit_direction(self.dim);
            let g = gauge.eval(&u);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Degenerate(format!("gauge value {g} on a unit vector")));
            }
            let c = s.unit_phase() * s.uniform_in(0.1, 3.0);
            let gc = gauge.eval(&u.scale(c));
            if (gc - c.norm() * g).abs() > 1e-10 * (1.0 + gc.abs()) {
                return Err(Error::Degenerate("gauge is not absolutely homogeneous".into()));
            }
            if g > (1.0 + 1e-12) / inner_radius {
                return Err(Error::Degenerate(format!("ball of radius {inner_radius} is not contained in the body")));
            }
        }
        Ok(())
    }

    fn sampled_bounding_radius(&self) -> f64 {
        let mut s = Sampler::new(0xb0_0d);
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for sign in [1.0, -1.0] {
                let u = CVector::basis(self.dim, i).scale_real(sign);
                r = r.max((self.basepoint.norm()) + self.ray_exit_unchecked(&self.basepoint, &u));
            }
        }
        for _ in 0..512 {
            let u = s.unit_direction(self.dim);
            let t = self.ray_exit_unchecked(&self.basepoint, &u);
            r = r.max(self.basepoint.axpy(C64::new(t, 0.0), &u).norm());
        }
        if r.is_finite() {
            r * 1.01
        } else {
            f64::INFINITY
        }
    }
}

fn check_dim_positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Degenerate("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Image of `Re <y, a> < b` under `z = map(y)`.
fn push_forward_half_space(h: &SupportingHalfSpace, map: &AffineMap, inverse: &AffineMap) -> Result<SupportingHalfSpace> {
    // <L^{-1}(z - t), a> = <z - t, L^{-H} a>
    let a2 = inverse.linear.adjoint().apply(&h.normal);
    let an = a2.norm();
    if an == 0.0 {
        return Err(Error::Degenerate("pushed-forward normal vanished".into()));
    }
    let shift = map.translation.dot(&a2);
    let normal = a2.scale_real(1.0 / an);
    let offset = (h.offset + shift.re) / an;
    let disc = h.disc.map(|(c, r)| ((c + shift) / an, r / an));
    Ok(SupportingHalfSpace { normal, offset, base: map.apply(&h.base), disc })
}

/// `a_i = ∂g/∂x_i + i ∂g/∂y_i` by central differences, normalized.
fn real_gradient(g: impl Fn(&CVector) -> f64, q: &CVector) -> Option<CVector> {
    let h = 1e-7 * (1.0 + q.norm());
    let mut a = CVector::zeros(q.dim());
    for i in 0..q.dim() {
        for (k, e) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut zp = q.clone();
            let mut zm = q.clone();
            zp[i] += e * h;
            zm[i] -= e * h;
            let d = (g(&zp) - g(&zm)) / (2.0 * h);
            if k == 0 {
                a[i].re = d;
            } else {
                a[i].im = d;
            }
        }
    }
    a.normalized()
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CLinearMap;

    fn cv(xs: &[(f64, f64)]) -> CVector {
        CVector::new(xs.iter().map(|&(a, b)| C64::new(a, b)).collect())
    }

    #[test]
    fn margins_at_reference_points() {
        let pd = Domain::unit_polydisc(2).unwrap();
        assert_eq!(pd.margin(&CVector::zeros(2)).unwrap(), 1.0);
        let ball = Domain::unit_ball(2).unwrap();
        assert_eq!(ball.margin(&cv(&[(1.0, 0.0), (0.0, 0.0)])).unwrap(), 0.0);
        let p = zoo::three_face_polyhedron();
        assert!(p.contains(&cv(&[(0.9, 0.0), (-0.9, 0.0)])).unwrap());
        assert!(matches!(pd.margin(&CVector::zeros(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn section_distances() {
        let pd = Domain::unit_polydisc(2).unwrap();
        let d = pd.section_boundary_distance(&CVector::zeros(2), &CVector::basis(2, 0)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let ball = Domain::unit_ball(2).unwrap();
        let d = ball.section_boundary_distance(&cv(&[(0.5, 0.0), (0.0, 0.0)]), &CVector::basis(2, 1)).unwrap();
        assert!((d - 0.75f64.sqrt()).abs() < 1e-15);
        let h = Domain::half_plane_product(2, Orientation::Upper).unwrap();
        let d = h.section_boundary_distance(&cv(&[(0.0, 1.0), (0.0, 1.0)]), &CVector::basis(2, 0)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_section_matches_exact_for_equivalent_gauge() {
        // the Lp gauge with p = 2 is the ball
        let lp = Domain::balanced(2, Gauge::Lp { p: 2.0, weights: vec![1.0, 1.0] }, 1.0).unwrap();
        let ball = Domain::unit_ball(2).unwrap();
        let x = cv(&[(0.3, -0.1), (0.2, 0.4)]);
        let v = cv(&[(0.5, 0.2), (-0.7, 0.1)]);
        let a = lp.section_boundary_distance(&x, &v).unwrap();
        let b = ball.section_boundary_distance(&x, &v).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn supporting_half_spaces_at_reference_points() {
        let disc = Domain::unit_polydisc(1).unwrap();
        let hs = disc.supporting_half_spaces(Some(&cv(&[(1.0, 0.0)])), 0, 1).unwrap();
        assert!(hs[0].normal.max_abs_diff(&cv(&[(1.0, 0.0)])) < 1e-15);
        assert_eq!(hs[0].offset, 1.0);

        let ball = Domain::unit_ball(2).unwrap();
        let hs = ball.supporting_half_spaces(Some(&cv(&[(0.0, 0.0), (1.0, 0.0)])), 0, 1).unwrap();
        assert!(hs[0].normal.max_abs_diff(&CVector::basis(2, 1)) < 1e-15);

        let p = zoo::three_face_polyhedron();
        let q = cv(&[(1.0, 0.0), (-1.0, 0.0)]);
        let hs = p.supporting_half_spaces(Some(&q), 0, 1).unwrap();
        let through: Vec<_> = hs.iter().filter(|h| h.slack(&q).abs() < 1e-12).collect();
        assert_eq!(through.len(), 2);
        assert!(through[0].normal.max_abs_diff(&CVector::basis(2, 0)) < 1e-15);
        assert!(through[1].normal.max_abs_diff(&CVector::basis(2, 1).scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn affine_image_section_matches_inner() {
        let inner = zoo::three_face_polyhedron();
        let m = CLinearMap::from_rows(&[
            vec![C64::new(1.0, 0.5), C64::new(0.2, 0.0)],
            vec![C64::new(0.0, -0.3), C64::new(0.8, 0.1)],
        ])
        .unwrap();
        let t = AffineMap::new(m, cv(&[(0.3, 0.0), (-1.0, 2.0)])).unwrap();
        let img = Domain::affine_image(inner.clone(), t.clone()).unwrap();
        let x = cv(&[(0.2, 0.1), (-0.3, 0.0)]);
        assert!((img.margin(&t.apply(&x)).unwrap() - inner.margin(&x).unwrap()).abs() < 1e-14);
        let mut s = Sampler::new(3);
        for z in img.sample_interior(&mut s, 200) {
            assert!(img.contains(&z).unwrap());
        }
    }

    #[test]
    fn golden_finds_parabola_min() {
        // flat minimum: location resolves to about sqrt(epsilon)
        let (t, v) = golden_min(|t| (t - 0.3) * (t - 0.3) + 1.0, -1.0, 2.0, 1e-10);
        assert!((t - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
