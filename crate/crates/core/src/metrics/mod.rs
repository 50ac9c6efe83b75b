//! Kobayashi–Royden metric and distance.
//!
//! Models (ball, polydisc, half-plane products) use closed forms, so both
//! sides of the bracket coincide. Other convex domains get
//!
//! * an upper bound from the largest affine disc in the planar section,
//!   `|v| / dist(x, ∂Ω_{x,v})`, and
//! * a lower bound from holomorphic projections onto half-planes or discs
//!   through supporting functionals, where the metric is explicit.
//!
//! Affine images delegate to the inner domain: the metric is invariant and
//! every bound transforms exactly.

mod indicatrix;

use serde::{Deserialize, Serialize};

use crate::domains::{Domain, DomainKind, Orientation, SupportingHalfSpace};
use crate::error::{Error, Result};
use crate::{CVector, C64};

pub use indicatrix::{
    distance_ball_sample, indicatrix, indicatrix_volume, BallSampleConfig, IndicatrixSample, VolumeEstimate,
    MIN_VOLUME_SAMPLES,
};

/// Normalization of the distance paired with the metric `|v| / (2 Im z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `tanh^{-1}|(z_2 - z_1)/(z_2 - conj z_1)|`: the integrated metric.
    #[default]
    Standard,
    /// Twice the standard distance.
    Paper,
}

impl Convention {
    pub fn distance_scale(self) -> f64 {
        match self {
            Convention::Standard => 1.0,
            Convention::Paper => 2.0,
        }
    }

    /// The tanh parameter of a distance radius: `|z - x| / |z - conj x|` on the half-plane.
    pub fn tanh_parameter(self, r: f64) -> f64 {
        (r / self.distance_scale()).tanh()
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Convention::Standard),
            "paper" => Ok(Convention::Paper),
            other => Err(Error::Config(format!("unknown convention {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    /// Largest affine disc in the planar section.
    SectionDisc,
    HalfPlaneProjection,
    DiscProjection,
    /// Adaptive Simpson quadrature of the metric upper bound along the segment.
    SegmentQuadrature,
    Trivial,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SectionDisc => "section_disc",
            Method::HalfPlaneProjection => "half_plane_projection",
            Method::DiscProjection => "disc_projection",
            Method::SegmentQuadrature => "segment_quadrature",
            Method::Trivial => "trivial",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Certified bracket `[lower, upper]` for `K_Ω(x; v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBound {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: Method,
    pub upper_method: Method,
}

impl MetricBound {
    fn exact(value: f64) -> Self {
        MetricBound { lower: value, upper: value, lower_method: Method::ClosedForm, upper_method: Method::ClosedForm }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.lower_method == Method::ClosedForm && self.upper_method == Method::ClosedForm
    }

    fn scaled(mut self, c: f64) -> Self {
        self.lower *= c;
        self.upper *= c;
        self
    }
}

/// Certified bracket for `d_Ω(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: Method,
    pub upper_method: Method,
}

impl DistanceBound {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Knobs for the bracket computations on non-model domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Sampled supporting half-spaces added to the exact ones.
    pub support_count: usize,
    pub seed: u64,
    /// Relative tolerance of the segment quadrature.
    pub quadrature_tol: f64,
    pub quadrature_depth: usize,
    pub convention: Convention,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            support_count: 8,
            seed: 0x6b_0ba5,
            quadrature_tol: 1e-9,
            quadrature_depth: 24,
            convention: Convention::Standard,
        }
    }
}

/// Relative slack within which a crossed bracket is attributed to rounding.
const ROUNDING: f64 = 1e-12;

fn clamp_crossing(lower: f64, upper: f64) -> f64 {
    if lower > upper && lower - upper <= ROUNDING * upper.abs().max(1e-300) {
        upper
    } else {
        lower
    }
}

/// Two-sided bound on `K_Ω(x; v)`.
pub fn kobayashi_metric(d: &Domain, x: &CVector, v: &CVector, cfg: &MetricConfig) -> Result<MetricBound> {
    x.check_dim(d.dim())?;
    v.check_dim(d.dim())?;
    d.require_interior(x)?;
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::ZeroVector);
    }
    if let Some(k) = closed_form_metric(d, x, v) {
        return Ok(MetricBound::exact(k));
    }
    if let DomainKind::AffineImage { inner, inverse, .. } = d.kind() {
        return kobayashi_metric(inner, &inverse.apply(x), &inverse.linear.apply(v), cfg);
    }
    // work with the unit direction in canonical phase so that homogeneity is structural
    let w = v.scale_real(1.0 / vn).canonical_phase(1e-12);
    let (near, dist) = d.nearest_section_point(x, &w)?;
    if !dist.is_finite() {
        return Err(Error::Unbounded(format!("section of {} through x has no boundary", d.name())));
    }
    let upper = 1.0 / dist;
    let mut lower = 0.0f64;
    let mut lower_method = Method::Trivial;
    let mut consider = |hs: Vec<SupportingHalfSpace>| {
        for h in hs {
            let (value, method) = projected_metric(&h, x, &w);
            if value > lower {
                lower = value;
                lower_method = method;
            }
        }
    };
    consider(d.supporting_half_spaces(Some(&near), cfg.support_count, cfg.seed)?);
    if d.is_circular() {
        // the tangent in the direction of v is the Barth-optimal functional at 0
        consider(d.supporting_half_spaces(Some(&w), 0, cfg.seed)?);
    }
    let lower = clamp_crossing(lower, upper);
    Ok(MetricBound { lower, upper, lower_method, upper_method: Method::SectionDisc }.scaled(vn))
}

/// Metric of the projection of `Ω` through the functional of `h`.
fn projected_metric(h: &SupportingHalfSpace, x: &CVector, w: &CVector) -> (f64, Method) {
    let aw = h.functional(w).norm();
    match h.disc {
        Some((center, radius)) => {
            let u = h.functional(x) - center;
            let den = radius * radius - u.norm_sqr();
            if den > 0.0 {
                (radius * aw / den, Method::DiscProjection)
            } else {
                (0.0, Method::Trivial)
            }
        }
        None => {
            let s = h.slack(x);
            if s > 0.0 {
                (aw / (2.0 * s), Method::HalfPlaneProjection)
            } else {
                (0.0, Method::Trivial)
            }
        }
    }
}

fn closed_form_metric(d: &Domain, x: &CVector, v: &CVector) -> Option<f64> {
    match d.kind() {
        DomainKind::UnitBall => {
            let s = 1.0 - x.norm_sqr();
            let p = v.dot(x).norm_sqr();
            Some((v.norm_sqr() / s + p / (s * s)).sqrt())
        }
        DomainKind::Polydisc { radii } => Some(
            (0..d.dim())
                .map(|i| radii[i] * v[i].norm() / (radii[i] * radii[i] - x[i].norm_sqr()))
                .fold(0.0, f64::max),
        ),
        DomainKind::HalfPlaneProduct { orientation } => Some(
            (0..d.dim())
                .map(|i| {
                    let h = match orientation {
                        Orientation::Upper => x[i].im,
                        Orientation::Left => -x[i].re,
                    };
                    v[i].norm() / (2.0 * h)
                })
                .fold(0.0, f64::max),
        ),
        _ => None,
    }
}

/// `tanh^{-1}` of a pseudo-hyperbolic ratio, clamped below 1.
fn atanh_ratio(t: f64) -> f64 {
    t.clamp(0.0, 1.0 - f64::EPSILON).atanh()
}

/// Standard distance in the disc of `radius` about 0.
fn disc_distance(z1: C64, z2: C64, radius: f64) -> f64 {
    let num = (z2 - z1) * radius;
    let den = C64::new(radius * radius, 0.0) - z1.conj() * z2;
    atanh_ratio(num.norm() / den.norm())
}

/// Standard distance in the upper half-plane.
fn upper_half_plane_distance(z1: C64, z2: C64) -> f64 {
    atanh_ratio((z2 - z1).norm() / (z2 - z1.conj()).norm())
}

fn closed_form_distance(d: &Domain, x: &CVector, y: &CVector) -> Option<f64> {
    match d.kind() {
        DomainKind::UnitBall => {
            let a = (1.0 - x.norm_sqr()) * (1.0 - y.norm_sqr());
            let b = (C64::new(1.0, 0.0) - x.dot(y)).norm_sqr();
            Some(atanh_ratio((1.0 - a / b).max(0.0).sqrt()))
        }
        DomainKind::Polydisc { radii } => {
            Some((0..d.dim()).map(|i| disc_distance(x[i], y[i], radii[i])).fold(0.0, f64::max))
        }
        DomainKind::HalfPlaneProduct { orientation } => Some(
            (0..d.dim())
                .map(|i| match orientation {
                    Orientation::Upper => upper_half_plane_distance(x[i], y[i]),
                    // Re ζ < 0  ->  -i ζ in the upper half-plane
                    Orientation::Left => {
                        let r = C64::new(0.0, -1.0);
                        upper_half_plane_distance(r * x[i], r * y[i])
                    }
                })
                .fold(0.0, f64::max),
        ),
        _ => None,
    }
}

/// Two-sided bound on `d_Ω(x, y)` under `cfg.convention`.
pub fn kobayashi_distance(d: &Domain, x: &CVector, y: &CVector, cfg: &MetricConfig) -> Result<DistanceBound> {
    let s = cfg.convention.distance_scale();
    let b = standard_distance(d, x, y, cfg)?;
    Ok(DistanceBound { lower: s * b.lower, upper: s * b.upper, ..b })
}

/// Upper bound only, skipping the half-space search (used by samplers).
pub fn distance_upper(d: &Domain, x: &CVector, y: &CVector, cfg: &MetricConfig) -> Result<f64> {
    let s = cfg.convention.distance_scale();
    Ok(s * standard_distance_upper(d, x, y, cfg)?.0)
}

fn standard_distance(d: &Domain, x: &CVector, y: &CVector, cfg: &MetricConfig) -> Result<DistanceBound> {
    if let DomainKind::AffineImage { inner, inverse, .. } = d.kind() {
        x.check_dim(d.dim())?;
        y.check_dim(d.dim())?;
        return standard_distance(inner, &inverse.apply(x), &inverse.apply(y), cfg);
    }
    let (upper, upper_method) = standard_distance_upper(d, x, y, cfg)?;
    if upper_method != Method::SegmentQuadrature {
        return Ok(DistanceBound { lower: upper, upper, lower_method: upper_method, upper_method });
    }
    let u = (y - x).normalized().ok_or(Error::ZeroVector)?;
    let mut anchors = vec![x.clone(), y.clone()];
    let past_y = d.ray_exit(y, &u)?;
    let before_x = d.ray_exit(x, &u.scale_real(-1.0))?;
    if past_y.is_finite() {
        anchors.push(y.axpy(C64::new(past_y, 0.0), &u));
    }
    if before_x.is_finite() {
        anchors.push(x.axpy(C64::new(-before_x, 0.0), &u));
    }
    anchors.push(d.nearest_section_point(x, &u)?.0);
    anchors.push(d.nearest_section_point(y, &u)?.0);
    let mut lower = 0.0f64;
    let mut lower_method = Method::Trivial;
    for (k, a) in anchors.iter().enumerate() {
        let count = if k == 0 { cfg.support_count } else { 0 };
        for h in d.supporting_half_spaces(Some(a), count, cfg.seed)? {
            let (value, method) = projected_distance(&h, x, y);
            if value > lower {
                lower = value;
                lower_method = method;
            }
        }
    }
    let lower = clamp_crossing(lower, upper);
    Ok(DistanceBound { lower, upper, lower_method, upper_method })
}

fn standard_distance_upper(d: &Domain, x: &CVector, y: &CVector, cfg: &MetricConfig) -> Result<(f64, Method)> {
    x.check_dim(d.dim())?;
    y.check_dim(d.dim())?;
    d.require_interior(x)?;
    d.require_interior(y)?;
    if x == y {
        return Ok((0.0, Method::Trivial));
    }
    if let Some(v) = closed_form_distance(d, x, y) {
        return Ok((v, Method::ClosedForm));
    }
    if let DomainKind::AffineImage { inner, inverse, .. } = d.kind() {
        return standard_distance_upper(inner, &inverse.apply(x), &inverse.apply(y), cfg);
    }
    let w = y - x;
    let wn = w.norm();
    let u = w.scale_real(1.0 / wn);
    // every point of the segment lies on the same complex line, so only the
    // base point of the section moves
    let f = |s: f64| -> Result<f64> {
        let p = x.axpy(C64::new(s, 0.0), &w);
        Ok(wn / d.section_boundary_distance(&p, &u)?)
    };
    Ok((adaptive_simpson(f, cfg.quadrature_tol, cfg.quadrature_depth)?, Method::SegmentQuadrature))
}

/// Adaptive Simpson integral over `[0, 1]`. Each accepted panel adds the
/// full difference of its two estimates on top, which dominates the
/// Richardson error estimate by a factor of 15, so the result errs high.
fn adaptive_simpson(f: impl Fn(f64) -> Result<f64>, tol: f64, depth: usize) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> Result<f64>,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (fl, fr) = (f(0.5 * (a + m))?, f(0.5 * (m + b))?);
        let h = (b - a) / 12.0;
        let left = h * (fa + 4.0 * fl + fm);
        let right = h * (fm + 4.0 * fr + fb);
        let diff = (left + right - whole).abs();
        if depth == 0 || diff <= tol {
            return Ok(left + right + diff);
        }
        Ok(rec(f, a, m, fa, fl, fm, left, 0.5 * tol, depth - 1)?
            + rec(f, m, b, fm, fr, fb, right, 0.5 * tol, depth - 1)?)
    }
    let (f0, fm, f1) = (f(0.0)?, f(0.5)?, f(1.0)?);
    let whole = (f0 + 4.0 * fm + f1) / 6.0;
    let scale = whole.abs().max(1e-300);
    rec(&f, 0.0, 1.0, f0, fm, f1, whole, tol * scale, depth)
}

/// Distance between projections of `x` and `y` through the functional of `h`.
fn projected_distance(h: &SupportingHalfSpace, x: &CVector, y: &CVector) -> (f64, Method) {
    let (w1, w2) = (h.functional(x), h.functional(y));
    match h.disc {
        Some((center, radius)) => {
            if (w1 - center).norm() < radius && (w2 - center).norm() < radius {
                (disc_distance(w1 - center, w2 - center, radius), Method::DiscProjection)
            } else {
                (0.0, Method::Trivial)
            }
        }
        None => {
            // Re w < b  ->  i (b - w) in the upper half-plane
            let to_upper = |w: C64| C64::new(0.0, 1.0) * (C64::new(h.offset, 0.0) - w);
            let (u1, u2) = (to_upper(w1), to_upper(w2));
            if u1.im > 0.0 && u2.im > 0.0 {
                (upper_half_plane_distance(u1, u2), Method::HalfPlaneProjection)
            } else {
                (0.0, Method::Trivial)
            }
        }
    }
}
