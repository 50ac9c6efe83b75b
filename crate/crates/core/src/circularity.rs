//! Squeezing certificates, maximal-circularity lower bounds, and the
//! polyhedral corner pipeline.
//!
//! A certificate is an embedding `φ` with `φ(x) = 0` and radii `r <= R`
//! such that `r D ⊂ φ(Ω) ⊂ R D` for a circular model `D`. Its ratio bounds
//! the squeezing function from below, and the square of the ratio bounds
//! the maximal circularity.
//!
//! Near a normal corner `q` of a polyhedron the embedding is
//! `Ψ ∘ Φ ∘ A_x`: an affine normalization onto the tangent half-planes of
//! the corner faces, the Cayley transform onto the polydisc, and a
//! componentwise disc automorphism fixing `1` that recentres `x`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::maps::model_automorphism;
use crate::domains::{cayley, Domain, DomainKind, Face, HolomorphicMap, MapStep, Mobius};
use crate::error::{Error, Result};
use crate::metrics::{kobayashi_metric, MetricConfig};
use crate::numeric::sphere::nelder_mead;
use crate::numeric::Sampler;
use crate::{AffineMap, CLinearMap, CVector, C64};

/// How one side of a certificate was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    /// Bisection on an exact supremum over products of discs.
    Exact,
    /// Follows from the construction of the embedding.
    Structural,
    /// Bisection or maximum over seeded samples.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeCertificate {
    pub domain: String,
    pub point: CVector,
    pub model: String,
    /// Steps of `φ` in application order.
    pub embedding: String,
    pub inner: f64,
    pub outer: f64,
    pub ratio: f64,
    pub inner_method: Inclusion,
    pub outer_method: Inclusion,
    /// Largest `ε` with `ε Δ^n ⊂ Φ(A_x(Ω))`, for pipeline certificates.
    pub epsilon: Option<f64>,
    /// Construction choices recorded with the certificate.
    pub notes: Vec<String>,
    pub verification: Verification,
}

/// Re-check of both inclusions on fresh samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub samples: usize,
    /// Largest `-margin_Ω(φ^{-1}(w))` over `w ∈ r D`; inner violations are positive.
    pub inner_violation: f64,
    /// Largest `g_D(φ(y)) - R` over `y ∈ Ω`.
    pub outer_violation: f64,
    /// Largest round-trip error `|φ^{-1}(φ(y)) - y|`.
    pub fold_error: f64,
}

impl Verification {
    pub fn holds(&self, tol: f64) -> bool {
        self.inner_violation <= tol && self.outer_violation <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeConfig {
    pub verify_samples: usize,
    pub seed: u64,
    /// Corner pipelines refuse points farther than this from the corner.
    pub proximity: f64,
    /// Largest accepted round-trip error of the embedding.
    pub fold_tol: f64,
    pub metric: MetricConfig,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        SqueezeConfig { verify_samples: 10_000, seed: 0, proximity: 1.0, fold_tol: 1e-8, metric: MetricConfig::default() }
    }
}

/// An embedding with an optional record of how it was built.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub map: HolomorphicMap,
    pub notes: Vec<String>,
    /// `R` when it follows from the construction rather than sampling.
    pub structural_outer: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Embedding {
    pub fn new(map: HolomorphicMap) -> Self {
        Embedding { map, notes: Vec::new(), structural_outer: None, epsilon: None }
    }
}

fn same_model(a: &Domain, b: &Domain) -> bool {
    a.dim() == b.dim()
        && match (a.kind(), b.kind()) {
            (DomainKind::UnitBall, DomainKind::UnitBall) => true,
            (DomainKind::Polydisc { radii: ra }, DomainKind::Polydisc { radii: rb }) => ra == rb,
            _ => false,
        }
}

fn require_circular_model(model: &Domain) -> Result<()> {
    match model.kind() {
        DomainKind::UnitBall => Ok(()),
        DomainKind::Polydisc { radii } if radii.iter().all(|&r| r == 1.0) => Ok(()),
        other => Err(Error::UnsupportedKind { operation: "squeeze model", kind: other.label().into() }),
    }
}

/// Default embedding: a model automorphism onto `D` when `Ω` is `D`
/// itself, otherwise the translation `z - x`.
fn default_embedding(d: &Domain, x: &CVector, model: &Domain) -> Result<Embedding> {
    if same_model(d, model) {
        let map = model_automorphism(d, x, &CVector::zeros(d.dim()))?;
        return Ok(Embedding { structural_outer: Some(1.0), ..Embedding::new(map) });
    }
    let t = AffineMap::new(CLinearMap::identity(d.dim()), -x)?;
    Ok(Embedding::new(HolomorphicMap::affine("translate", t)))
}

/// Certified `(r, R)` for `φ` (default: see above). `r` is the largest
/// radius whose model copy pulls back into `Ω`; `R` is the largest model
/// gauge of `φ` on the boundary of `Ω`.
pub fn squeeze_lower_bound(
    d: &Domain,
    x: &CVector,
    model: &Domain,
    embedding: Option<Embedding>,
    cfg: &SqueezeConfig,
) -> Result<SqueezeCertificate> {
    x.check_dim(d.dim())?;
    if model.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: model.dim() });
    }
    require_circular_model(model)?;
    d.require_interior(x)?;
    let emb = match embedding {
        Some(e) => e,
        None => default_embedding(d, x, model)?,
    };
    let phi = &emb.map;
    let phi_inv = phi.inverse()?;
    let at = phi.apply(x)?;
    if at.norm() > 1e-9 {
        return Err(Error::Config(format!("embedding sends the point to {at:?}, not 0")));
    }
    let gauge = |w: &CVector| model.gauge(w).expect("circular model");

    let mut sampler = Sampler::new(cfg.seed);
    let (inner, inner_method) = if same_model(d, model) && emb.structural_outer.is_some() {
        (1.0, Inclusion::Structural)
    } else if let Some(r) = exact_inner_radius(d, &phi_inv, model) {
        (r, Inclusion::Exact)
    } else {
        (sampled_inner_radius(d, &phi_inv, model, &mut sampler)?, Inclusion::Sampled)
    };
    let (outer, outer_method) = match emb.structural_outer {
        Some(r) => (r, Inclusion::Structural),
        None => {
            if !d.bounding_radius().is_finite() {
                return Err(Error::Unbounded(format!("{} needs a structural outer radius", d.name())));
            }
            (sampled_outer_radius(d, phi, &gauge, &mut sampler)?, Inclusion::Sampled)
        }
    };
    if !(inner > 0.0) || inner > outer * (1.0 + 1e-12) {
        return Err(Error::Degenerate(format!("squeeze radii r = {inner}, R = {outer}")));
    }
    let verification = verify(d, model, phi, &phi_inv, inner, outer, cfg)?;
    if verification.fold_error > cfg.fold_tol {
        return Err(Error::Fold { error: verification.fold_error });
    }
    Ok(SqueezeCertificate {
        domain: d.name().to_string(),
        point: x.clone(),
        model: model.name().to_string(),
        embedding: phi.description(),
        inner,
        outer,
        ratio: inner / outer,
        inner_method,
        outer_method,
        epsilon: emb.epsilon,
        notes: emb.notes,
        verification,
    })
}

/// Largest model gauge of `φ` over seeded boundary points, each of the
/// best few then pushed uphill by a simplex search over ray directions.
fn sampled_outer_radius(d: &Domain, phi: &HolomorphicMap, gauge: &dyn Fn(&CVector) -> f64, s: &mut Sampler) -> Result<f64> {
    let b = d.basepoint();
    let n = d.dim();
    let on_boundary = |u: &CVector| -> Option<CVector> {
        let t = d.ray_exit(b, u).ok().filter(|t| t.is_finite())?;
        Some(b.axpy(C64::new(t, 0.0), u))
    };
    let mut scored: Vec<(f64, CVector)> = Vec::new();
    for y in d.sample_boundary(s, 4096) {
        scored.push((gauge(&phi.apply(&y)?), y));
    }
    scored.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut worst = scored.first().map_or(0.0, |p| p.0);
    for (_, y) in scored.iter().take(8) {
        let Some(u0) = (y - b).normalized() else { continue };
        let x0: Vec<f64> = u0.iter().flat_map(|z| [z.re, z.im]).collect();
        let value = |v: &[f64]| -> Result<f64> {
            let u = CVector::from_fn(n, |i| C64::new(v[2 * i], v[2 * i + 1]));
            let Some(u) = u.normalized() else { return Ok(0.0) };
            Ok(match on_boundary(&u) {
                Some(z) => -gauge(&phi.apply(&z)?),
                None => 0.0,
            })
        };
        let (_, best) = nelder_mead(value, &x0, 0.05, 4000, 1e-15)?;
        worst = worst.max(-best);
    }
    Ok(worst)
}

/// Point of `ρ D` along a seeded direction, at the edge or spread radially.
fn model_point(model: &Domain, s: &mut Sampler, rho: f64, edge: bool) -> CVector {
    let n = model.dim();
    if edge && !matches!(model.kind(), DomainKind::UnitBall) {
        // the torus: the part of the polydisc boundary every inclusion test reaches
        return CVector::from_fn(n, |_| s.unit_phase() * rho);
    }
    let u = s.unit_direction(n);
    let g = model.gauge(&u).expect("circular model");
    let t = if edge { 1.0 } else { s.uniform().powf(1.0 / (2 * n) as f64) };
    u.scale_real(rho * t / g)
}

/// Edge point of the unit model from free real parameters: phases on the
/// torus, or a normalized direction on the sphere.
fn edge_from_params(model: &Domain, v: &[f64]) -> Option<CVector> {
    let n = model.dim();
    if matches!(model.kind(), DomainKind::UnitBall) {
        CVector::from_fn(n, |i| C64::new(v[2 * i], v[2 * i + 1])).normalized()
    } else {
        Some(CVector::from_fn(n, |i| C64::from_polar(1.0, v[i])))
    }
}

fn edge_params(model: &Domain, w: &CVector) -> Vec<f64> {
    if matches!(model.kind(), DomainKind::UnitBall) {
        w.iter().flat_map(|z| [z.re, z.im]).collect()
    } else {
        w.iter().map(|z| z.arg()).collect()
    }
}

fn verify(
    d: &Domain,
    model: &Domain,
    phi: &HolomorphicMap,
    phi_inv: &HolomorphicMap,
    inner: f64,
    outer: f64,
    cfg: &SqueezeConfig,
) -> Result<Verification> {
    let half = cfg.verify_samples / 2;
    let base = Sampler::new(cfg.seed ^ 0x5eed_5a17);
    let inner_violation = (0..half)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut s = base.fork(k as u64);
            let w = model_point(model, &mut s, inner * (1.0 - 1e-12), k % 2 == 0);
            Ok(-d.margin(&phi_inv.apply(&w)?)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut s = base.fork(u64::MAX);
    let mut ys = d.sample_interior(&mut s, half - half / 2);
    let interior = ys.len();
    ys.extend(d.sample_boundary(&mut s, half / 2));
    let outs = ys
        .par_iter()
        .enumerate()
        .map(|(k, y)| -> Result<(f64, f64)> {
            let w = phi.apply(y)?;
            let g = model.gauge(&w).expect("circular model") - outer;
            // round trips are only meaningful away from the boundary
            let fold = if k < interior { (&phi_inv.apply(&w)? - y).norm() / (1.0 + y.norm()) } else { 0.0 };
            Ok((g, fold))
        })
        .collect::<Result<Vec<_>>>()?;
    let outer_violation = outs.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    let fold_error = outs.iter().map(|o| o.1).fold(0.0, f64::max);
    Ok(Verification { samples: half + ys.len(), inner_violation, outer_violation, fold_error })
}

/// Complex-affine functional `a · z + s` of a face with the side it bounds.
struct FaceFunctional {
    coeffs: CVector,
    shift: C64,
    /// `|f| < bound` when true, `Re f < bound` otherwise.
    modulus: bool,
    bound: f64,
}

impl FaceFunctional {
    fn of(face: &Face) -> Self {
        match face {
            Face::Modulus { coeffs, shift, bound } => {
                FaceFunctional { coeffs: coeffs.clone(), shift: *shift, modulus: true, bound: *bound }
            }
            Face::Real { normal, offset } => {
                FaceFunctional { coeffs: normal.conj(), shift: C64::new(0.0, 0.0), modulus: false, bound: *offset }
            }
        }
    }

    fn eval(&self, z: &CVector) -> C64 {
        self.coeffs.pair(z) + self.shift
    }

    /// Supremum of the face's constraint function over `M w + p`, `w` in a
    /// product of discs (or in a ball of radius `ball`).
    fn sup_over(&self, m: &CLinearMap, p: &CVector, discs: &[(C64, f64)], ball: Option<f64>) -> f64 {
        let n = discs.len();
        let gamma = self.eval(p);
        let beta: Vec<C64> = (0..n).map(|j| (0..n).map(|i| self.coeffs[i] * m[(i, j)]).sum()).collect();
        let center: C64 = gamma + beta.iter().zip(discs).map(|(b, (c, _))| b * c).sum::<C64>();
        let spread = match ball {
            Some(r) => r * beta.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt(),
            None => beta.iter().zip(discs).map(|(b, (_, r))| b.norm() * r).sum(),
        };
        if self.modulus {
            center.norm() + spread
        } else {
            center.re + spread
        }
    }
}

/// Exact inner radius for a polyhedron when `φ^{-1}` is a chain of
/// componentwise Möbius maps followed by at most one affine map (polydisc
/// model), or a single affine map (ball model).
fn exact_inner_radius(d: &Domain, phi_inv: &HolomorphicMap, model: &Domain) -> Option<f64> {
    let faces: Vec<FaceFunctional> = d.faces()?.iter().map(FaceFunctional::of).collect();
    let n = d.dim();
    let steps: Vec<&MapStep> = phi_inv.steps().collect();
    let (mobius, affine) = match steps.split_last() {
        Some((MapStep::Affine(t), rest)) => (rest.to_vec(), t.clone()),
        _ => (steps.clone(), AffineMap::new(CLinearMap::identity(n), CVector::zeros(n)).ok()?),
    };
    let is_ball = matches!(model.kind(), DomainKind::UnitBall);
    if is_ball && !mobius.is_empty() {
        return None;
    }
    let chains: Vec<&Vec<Mobius>> = mobius
        .iter()
        .map(|s| match s {
            MapStep::Componentwise(ms) => Some(ms),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let include = |rho: f64| -> bool {
        let mut discs = vec![(C64::new(0.0, 0.0), rho); n];
        for ms in &chains {
            for (disc, m) in discs.iter_mut().zip(ms.iter()) {
                match m.disc_image(disc.0, disc.1) {
                    Some(img) => *disc = img,
                    None => return false,
                }
            }
        }
        let ball = is_ball.then_some(rho);
        faces.iter().all(|f| f.sup_over(&affine.linear, &affine.translation, &discs, ball) < f.bound)
    };
    Some(bisect_radius(include))
}

/// Largest `ρ` with `include(ρ)`, for a predicate that is monotone decreasing.
fn bisect_radius(include: impl Fn(f64) -> bool) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while include(hi) && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if include(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest edge radius over seeded edge points of the model, the lowest
/// few refined by a simplex search over edge parameters.
fn sampled_inner_radius(d: &Domain, phi_inv: &HolomorphicMap, model: &Domain, s: &mut Sampler) -> Result<f64> {
    let radius_along = |w: &CVector| {
        bisect_radius(|rho| phi_inv.apply(&w.scale_real(rho)).and_then(|z| d.margin(&z)).map(|m| m > 0.0).unwrap_or(false))
    };
    let edge: Vec<CVector> = (0..2048).map(|_| model_point(model, s, 1.0, true)).collect();
    let mut scored: Vec<(f64, &CVector)> = edge.par_iter().map(|w| (radius_along(w), w)).collect();
    scored.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut best = scored.first().map_or(f64::INFINITY, |p| p.0);
    for (_, w) in scored.iter().take(8) {
        let value = |v: &[f64]| -> Result<f64> { Ok(edge_from_params(model, v).map_or(f64::INFINITY, |w| radius_along(&w))) };
        let (_, r) = nelder_mead(value, &edge_params(model, w), 0.05, 2000, 1e-15)?;
        best = best.min(r);
    }
    Ok(best)
}

/// Lower bound on the maximal circularity `c_Ω(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircularityBound {
    pub point: CVector,
    pub lower: f64,
    pub provenance: String,
}

/// `max (r / R)^2` over the certificates at `x`, and `1` for a circular
/// domain at its centre when its gauge matches the indicatrix there.
pub fn circularity_lower_bound(
    d: &Domain,
    x: &CVector,
    certificates: &[SqueezeCertificate],
    cfg: &MetricConfig,
) -> Result<CircularityBound> {
    let mut best: Option<(f64, String)> = None;
    for c in certificates {
        if (&c.point - x).norm() > 1e-12 {
            continue;
        }
        let v = c.ratio * c.ratio;
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, format!("squeeze {} via {} (ratio {})", c.model, c.embedding, c.ratio)));
        }
    }
    if d.is_circular() && x.norm() == 0.0 {
        let b = barth_check(d, 256, 0, cfg)?;
        if b.max_discrepancy <= 1e-9_f64.max(b.max_bracket_width) {
            best = Some((1.0, format!("indicatrix identity at the centre (discrepancy {:e})", b.max_discrepancy)));
        }
    }
    let (lower, provenance) = best.ok_or_else(|| Error::Config("no certificate at this point".into()))?;
    Ok(CircularityBound { point: x.clone(), lower: lower.min(1.0), provenance })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarthReport {
    pub samples: usize,
    /// Largest distance from the domain gauge to either end of the bracket.
    pub max_discrepancy: f64,
    pub max_bracket_width: f64,
}

/// Compares the gauge of a circular domain with `K(0; ·)` on seeded directions.
pub fn barth_check(d: &Domain, samples: usize, seed: u64, cfg: &MetricConfig) -> Result<BarthReport> {
    if !d.is_circular() {
        return Err(Error::UnsupportedKind { operation: "barth check", kind: d.kind().label().into() });
    }
    let zero = CVector::zeros(d.dim());
    let mut s = Sampler::new(seed);
    let dirs: Vec<CVector> = (0..samples).map(|_| s.unit_direction(d.dim())).collect();
    let rows = dirs
        .par_iter()
        .map(|u| -> Result<(f64, f64)> {
            let g = d.gauge(u).expect("circular");
            let b = kobayashi_metric(d, &zero, u, cfg)?;
            Ok(((g - b.lower).abs().max((g - b.upper).abs()), b.width()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BarthReport {
        samples,
        max_discrepancy: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        max_bracket_width: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// Componentwise disc automorphism fixing `±1` and sending the real `a` to `0`.
fn recentre(a: f64) -> Mobius {
    let o = C64::new(1.0, 0.0);
    let a = C64::new(a, 0.0);
    Mobius::new(o, -a, -a, o)
}

/// Squeeze certificate near a normal corner `q` of a polyhedron.
pub fn polyhedral_pipeline(d: &Domain, q: &CVector, x: &CVector, cfg: &SqueezeConfig) -> Result<SqueezeCertificate> {
    let embedding = corner_embedding(d, q, x, cfg)?;
    squeeze_lower_bound(d, x, &Domain::unit_polydisc(d.dim())?, Some(embedding), cfg)
}

fn corner_embedding(d: &Domain, q: &CVector, x: &CVector, cfg: &SqueezeConfig) -> Result<Embedding> {
    let faces = d
        .faces()
        .ok_or_else(|| Error::UnsupportedKind { operation: "polyhedral pipeline", kind: d.kind().label().into() })?;
    let n = d.dim();
    q.check_dim(n)?;
    d.require_interior(x)?;
    if !d.corners().iter().any(|c| (c - q).norm() <= 1e-9) {
        return Err(Error::Normality(format!("{q:?} is not a declared corner of {}", d.name())));
    }
    let active: Vec<usize> = (0..faces.len()).filter(|&k| faces[k].margin(q).abs() <= 1e-9).collect();
    if active.len() != n {
        return Err(Error::Normality(format!("{} faces meet at the corner, expected {n}", active.len())));
    }
    let gap = (x - q).norm();
    if gap > cfg.proximity {
        return Err(Error::Proximity(format!("point is {gap} from the corner, limit {}", cfg.proximity)));
    }
    let near = active.iter().map(|&k| faces[k].margin(x)).fold(0.0, f64::max);
    for (k, f) in faces.iter().enumerate() {
        if !active.contains(&k) && f.margin(x) <= near {
            return Err(Error::Proximity(format!("face {k} is nearer than the corner faces")));
        }
    }
    let funcs: Vec<FaceFunctional> = active.iter().map(|&k| FaceFunctional::of(&faces[k])).collect();
    // tangent hyperplane f_α = t_α with unit phase e^{iθ_α} of the outward side
    let mut targets = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for f in &funcs {
        let fx = f.eval(x);
        if f.modulus {
            if fx.norm() == 0.0 {
                return Err(Error::Proximity("face functional vanishes at the point".into()));
            }
            let ph = fx / fx.norm();
            targets.push(ph * f.bound);
            phases.push(ph);
        } else {
            targets.push(C64::new(f.bound, fx.im));
            phases.push(C64::new(1.0, 0.0));
        }
    }
    let coeffs = CLinearMap::from_rows(&funcs.iter().map(|f| f.coeffs.iter().copied().collect()).collect::<Vec<_>>())?;
    let scale: f64 = funcs.iter().map(|f| f.coeffs.norm()).product();
    if coeffs.det().norm() <= 1e-10 * scale {
        return Err(Error::Normality("corner face gradients are dependent".into()));
    }
    // A_x(z)_α = e^{-iθ_α} (f_α(z) - t_α) / |a_α|
    let rows: Vec<Vec<C64>> = funcs
        .iter()
        .zip(&phases)
        .map(|(f, ph)| f.coeffs.iter().map(|c| ph.conj() * c / f.coeffs.norm()).collect())
        .collect();
    let shift: Vec<C64> = funcs
        .iter()
        .zip(&phases)
        .zip(&targets)
        .map(|((f, ph), t)| ph.conj() * (f.shift - t) / f.coeffs.norm())
        .collect();
    let a_x = AffineMap::new(CLinearMap::from_rows(&rows)?, CVector::new(shift))?;
    let normalized = HolomorphicMap::affine("tangent normalization", a_x.clone()).followed_by(&cayley(n));
    let image = normalized.apply(x)?;
    let mut centres = Vec::with_capacity(n);
    for z in image.iter() {
        if z.im.abs() > 1e-9 || !(z.re > -1.0 && z.re < 1.0) {
            return Err(Error::Proximity(format!("normalized point {z} is off the real diameter")));
        }
        centres.push(recentre(z.re));
    }
    let epsilon = exact_inner_radius(d, &normalized.inverse()?, &Domain::unit_polydisc(n)?);
    let map = normalized.then("recentre", MapStep::Componentwise(centres));
    let corner_gaps: Vec<String> = image.iter().map(|z| format!("{}", 1.0 - z.re)).collect();
    Ok(Embedding {
        map,
        notes: vec![
            "recentring: componentwise disc automorphism fixing 1 and -1".into(),
            format!("1 - r at the point: ({})", corner_gaps.join(", ")),
        ],
        structural_outer: Some(1.0),
        epsilon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub dist_to_q: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub ratio: f64,
    pub c_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub domain: String,
    pub corner: CVector,
    pub rows: Vec<SweepRow>,
    pub threshold: f64,
    pub passed: bool,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            let _ = w.serialize(r);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

/// `x_k = b + (1 - 2^{-k}) (q - b)` for the basepoint `b`, `k = 1..=steps`.
pub fn corner_schedule(d: &Domain, q: &CVector, steps: usize) -> Vec<CVector> {
    let b = d.basepoint();
    (1..=steps).map(|k| b.axpy(C64::new(1.0 - 0.5f64.powi(k as i32), 0.0), &(q - b))).collect()
}

/// Certificates along `points` approaching `q`. Models use their own
/// automorphisms; polyhedra use the corner pipeline. Passes when the final
/// ratio reaches `threshold`.
pub fn asymptotics_sweep(d: &Domain, q: &CVector, points: &[CVector], threshold: f64, cfg: &SqueezeConfig) -> Result<SweepReport> {
    for (index, x) in points.iter().enumerate() {
        let margin = d.margin(x)?;
        if !(margin > 0.0) {
            return Err(Error::Schedule { index, margin });
        }
    }
    let model = Domain::unit_polydisc(d.dim())?;
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| -> Result<SweepRow> {
            let cfg_k = SqueezeConfig { seed: cfg.seed.wrapping_add(i as u64), ..cfg.clone() };
            let cert = if d.is_model() {
                let ball;
                let m = if matches!(d.kind(), DomainKind::UnitBall) {
                    ball = Domain::unit_ball(d.dim())?;
                    &ball
                } else {
                    &model
                };
                squeeze_lower_bound(d, x, m, None, &cfg_k)?
            } else {
                polyhedral_pipeline(d, q, x, &cfg_k)?
            };
            Ok(SweepRow {
                k: i + 1,
                dist_to_q: (x - q).norm(),
                r: cert.inner,
                big_r: cert.outer,
                ratio: cert.ratio,
                c_bound: cert.ratio * cert.ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.last().is_some_and(|r| r.ratio >= threshold);
    Ok(SweepReport { domain: d.name().to_string(), corner: q.clone(), rows, threshold, passed })
}
