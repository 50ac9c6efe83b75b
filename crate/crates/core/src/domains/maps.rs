//! Holomorphic maps built from elementary steps: componentwise Möbius
//! transformations, the ball involutions, and complex affine maps.
//!
//! Each step has a closed-form derivative and inverse, so compositions
//! carry exact Jacobians by the chain rule.

use serde::{Deserialize, Serialize};

use super::{Domain, DomainKind, Orientation};
use crate::error::{Error, Result};
use crate::{AffineMap, CLinearMap, CVector, C64};

const POLE_TOL: f64 = 1e-300;

/// `ζ -> (a ζ + b) / (c ζ + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Mobius::new(o, z, z, o)
    }

    /// `ζ -> k ζ + t`.
    pub fn affine(k: C64, t: C64) -> Self {
        Mobius::new(k, t, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// The unit-disc automorphism `ζ -> (ζ - a) / (1 - conj(a) ζ)`, which sends `a` to 0.
    pub fn disc_to_origin(a: C64) -> Self {
        let o = C64::new(1.0, 0.0);
        Mobius::new(o, -a, -a.conj(), o)
    }

    /// Disc automorphism of `|ζ| < radius` sending `from` to `to`.
    pub fn disc_automorphism(from: C64, to: C64, radius: f64) -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let down = Mobius::new(C64::new(1.0 / radius, 0.0), z, z, o);
        let up = Mobius::new(C64::new(radius, 0.0), z, z, o);
        let m_from = Mobius::disc_to_origin(from / radius);
        let m_to_inv = Mobius::disc_to_origin(to / radius).inverse();
        up.compose(&m_to_inv).compose(&m_from).compose(&down)
    }

    /// `ζ -> (1 + ζ) / (1 - ζ)`: left half-plane onto the unit disc.
    pub fn cayley() -> Self {
        let o = C64::new(1.0, 0.0);
        Mobius::new(o, o, -o, o)
    }

    pub fn determinant(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: C64) -> Result<C64> {
        let den = self.c * z + self.d;
        if den.norm() <= POLE_TOL * (self.c.norm() + self.d.norm()).max(1.0) {
            return Err(Error::Singularity(format!("Möbius pole at ζ = {z}")));
        }
        Ok((self.a * z + self.b) / den)
    }

    pub fn derivative(&self, z: C64) -> Result<C64> {
        let den = self.c * z + self.d;
        if den.norm() <= POLE_TOL * (self.c.norm() + self.d.norm()).max(1.0) {
            return Err(Error::Singularity(format!("Möbius pole at ζ = {z}")));
        }
        Ok(self.determinant() / (den * den))
    }

    pub fn inverse(&self) -> Self {
        Mobius::new(self.d, -self.b, -self.c, self.a)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Self {
        Mobius::new(
            self.a * inner.a + self.b * inner.c,
            self.a * inner.b + self.b * inner.d,
            self.c * inner.a + self.d * inner.c,
            self.c * inner.b + self.d * inner.d,
        )
    }

    pub fn pole(&self) -> Option<C64> {
        (self.c.norm() > 0.0).then(|| -self.d / self.c)
    }

    /// Image of the open disc `|ζ - center| < radius` when the pole lies
    /// strictly outside its closure.
    pub fn disc_image(&self, center: C64, radius: f64) -> Option<(C64, f64)> {
        if let Some(p) = self.pole() {
            if (p - center).norm() <= radius * (1.0 + 1e-12) {
                return None;
            }
        }
        if self.c.norm() == 0.0 {
            let k = self.a / self.d;
            return Some((self.apply(center).ok()?, k.norm() * radius));
        }
        // for the circle |ζ - c| = R, points symmetric to the pole map to the
        // image centre: ζ* = c + R^2 / conj(p - c)
        let p = self.pole()?;
        let mirror = center + C64::new(radius * radius, 0.0) / (p - center).conj();
        let img_center = self.apply(mirror).ok()?;
        let on_circle = self.apply(center + C64::new(radius, 0.0)).ok()?;
        Some((img_center, (on_circle - img_center).norm()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MapStep {
    /// A Möbius transformation on each coordinate.
    Componentwise(Vec<Mobius>),
    /// Involutive ball automorphism exchanging `point` and 0.
    BallInvolution(CVector),
    Affine(AffineMap),
}

impl MapStep {
    fn apply(&self, z: &CVector) -> Result<CVector> {
        match self {
            MapStep::Componentwise(ms) => {
                let mut out = z.clone();
                for (i, m) in ms.iter().enumerate() {
                    out[i] = m.apply(z[i])?;
                }
                Ok(out)
            }
            MapStep::BallInvolution(a) => ball_involution(a, z),
            MapStep::Affine(t) => Ok(t.apply(z)),
        }
    }

    fn derivative(&self, z: &CVector) -> Result<CLinearMap> {
        match self {
            MapStep::Componentwise(ms) => {
                let d: Result<Vec<C64>> = ms.iter().enumerate().map(|(i, m)| m.derivative(z[i])).collect();
                Ok(CLinearMap::diag(&d?))
            }
            MapStep::BallInvolution(a) => ball_involution_derivative(a, z),
            MapStep::Affine(t) => Ok(t.linear.clone()),
        }
    }

    fn inverse(&self) -> Result<MapStep> {
        Ok(match self {
            MapStep::Componentwise(ms) => MapStep::Componentwise(ms.iter().map(Mobius::inverse).collect()),
            MapStep::BallInvolution(a) => MapStep::BallInvolution(a.clone()),
            MapStep::Affine(t) => MapStep::Affine(t.inverse()?),
        })
    }
}

/// `φ_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)` with `s_a = sqrt(1 - |a|^2)`.
fn ball_involution(a: &CVector, z: &CVector) -> Result<CVector> {
    let aa = a.norm_sqr();
    if aa == 0.0 {
        return Ok(-z);
    }
    let s = (1.0 - aa).sqrt();
    let za = z.dot(a);
    let den = C64::new(1.0, 0.0) - za;
    if den.norm() <= POLE_TOL {
        return Err(Error::Singularity("ball involution pole".into()));
    }
    let pz = a.scale(za / aa);
    let qz = z - &pz;
    let num = &(a - &pz) - &qz.scale_real(s);
    Ok(num.scale(C64::new(1.0, 0.0) / den))
}

fn ball_involution_derivative(a: &CVector, z: &CVector) -> Result<CLinearMap> {
    let n = z.dim();
    let aa = a.norm_sqr();
    if aa == 0.0 {
        return Ok(CLinearMap::identity(n).scale(C64::new(-1.0, 0.0)));
    }
    let s = (1.0 - aa).sqrt();
    let den = C64::new(1.0, 0.0) - z.dot(a);
    if den.norm() <= POLE_TOL {
        return Err(Error::Singularity("ball involution pole".into()));
    }
    let num = {
        let za = z.dot(a);
        let pz = a.scale(za / aa);
        &(a - &pz) - &(z - &pz).scale_real(s)
    };
    // d/dz [N / D] w = -(P + sQ) w / D + N <w, a> / D^2
    let mut m = CLinearMap::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let p_ij = a[i] * a[j].conj() / aa;
            let id = if i == j { 1.0 } else { 0.0 };
            let q_ij = C64::new(id, 0.0) - p_ij;
            m[(i, j)] = -(p_ij + q_ij * s) / den + num[i] * a[j].conj() / (den * den);
        }
    }
    Ok(m)
}

/// Composition of elementary steps; `steps[0]` is applied first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicMap {
    dim: usize,
    steps: Vec<(String, MapStep)>,
}

impl HolomorphicMap {
    pub fn identity(dim: usize) -> Self {
        HolomorphicMap { dim, steps: Vec::new() }
    }

    pub fn from_step(dim: usize, label: impl Into<String>, step: MapStep) -> Self {
        HolomorphicMap::identity(dim).then(label, step)
    }

    pub fn affine(label: impl Into<String>, t: AffineMap) -> Self {
        HolomorphicMap::from_step(t.dim(), label, MapStep::Affine(t))
    }

    /// Appends a step applied after the existing ones.
    pub fn then(mut self, label: impl Into<String>, step: MapStep) -> Self {
        self.steps.push((label.into(), step));
        self
    }

    /// `next ∘ self`.
    pub fn followed_by(mut self, next: &HolomorphicMap) -> Self {
        self.steps.extend(next.steps.iter().cloned());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> impl Iterator<Item = &MapStep> {
        self.steps.iter().map(|(_, s)| s)
    }

    pub fn labels(&self) -> Vec<String> {
        self.steps.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn description(&self) -> String {
        if self.steps.is_empty() {
            "identity".into()
        } else {
            self.labels().join(" -> ")
        }
    }

    pub fn apply(&self, z: &CVector) -> Result<CVector> {
        z.check_dim(self.dim)?;
        let mut w = z.clone();
        for (_, s) in &self.steps {
            w = s.apply(&w)?;
        }
        Ok(w)
    }

    pub fn derivative(&self, z: &CVector) -> Result<CLinearMap> {
        z.check_dim(self.dim)?;
        let mut w = z.clone();
        let mut jac = CLinearMap::identity(self.dim);
        for (_, s) in &self.steps {
            jac = s.derivative(&w)?.mul(&jac);
            w = s.apply(&w)?;
        }
        Ok(jac)
    }

    pub fn inverse(&self) -> Result<HolomorphicMap> {
        let steps: Result<Vec<(String, MapStep)>> = self
            .steps
            .iter()
            .rev()
            .map(|(l, s)| Ok((format!("inverse({l})"), s.inverse()?)))
            .collect();
        Ok(HolomorphicMap { dim: self.dim, steps: steps? })
    }
}

/// The componentwise Cayley transform `ζ -> (1 + ζ) / (1 - ζ)` from the
/// left half-plane product onto the unit polydisc.
pub fn cayley(n: usize) -> HolomorphicMap {
    HolomorphicMap::from_step(n, "cayley", MapStep::Componentwise(vec![Mobius::cayley(); n]))
}

/// Automorphism of a model domain sending `from` to `to`, with exact derivatives.
///
/// Supports the ball, polydiscs, half-plane products, and affine images of
/// these (by conjugation).
pub fn model_automorphism(model: &Domain, from: &CVector, to: &CVector) -> Result<HolomorphicMap> {
    let n = model.dim();
    from.check_dim(n)?;
    to.check_dim(n)?;
    model.require_interior(from)?;
    model.require_interior(to)?;
    match model.kind() {
        DomainKind::UnitBall => {
            let mut map = HolomorphicMap::identity(n);
            if from.norm() > 0.0 {
                map = map.then("ball_involution(from)", MapStep::BallInvolution(from.clone()));
            }
            if to.norm() > 0.0 {
                map = map.then("ball_involution(to)", MapStep::BallInvolution(to.clone()));
            }
            Ok(map)
        }
        DomainKind::Polydisc { radii } => {
            let ms = (0..n).map(|i| Mobius::disc_automorphism(from[i], to[i], radii[i])).collect();
            Ok(HolomorphicMap::from_step(n, "disc_automorphisms", MapStep::Componentwise(ms)))
        }
        DomainKind::HalfPlaneProduct { orientation } => {
            let ms = (0..n)
                .map(|i| {
                    let (a, b) = (from[i], to[i]);
                    match orientation {
                        Orientation::Upper => {
                            let k = b.im / a.im;
                            Mobius::affine(C64::new(k, 0.0), C64::new(b.re - k * a.re, 0.0))
                        }
                        Orientation::Left => {
                            let k = b.re / a.re;
                            Mobius::affine(C64::new(k, 0.0), C64::new(0.0, b.im - k * a.im))
                        }
                    }
                })
                .collect();
            Ok(HolomorphicMap::from_step(n, "half_plane_affine", MapStep::Componentwise(ms)))
        }
        DomainKind::AffineImage { inner, map, inverse } => {
            let core = model_automorphism(inner, &inverse.apply(from), &inverse.apply(to))?;
            Ok(HolomorphicMap::affine("affine_inverse", inverse.clone())
                .followed_by(&core)
                .followed_by(&HolomorphicMap::affine("affine", map.clone())))
        }
        other => Err(Error::UnsupportedKind { operation: "model_automorphism", kind: other.label().to_string() }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyPath {
    Identity,
    /// Members send `from` to `from + s (toward - from)`.
    Drag,
}

/// One-parameter family of model automorphisms.
#[derive(Clone, Debug)]
pub struct AutomorphismFamily {
    pub model: Domain,
    pub from: CVector,
    pub toward: CVector,
    pub path: FamilyPath,
}

impl AutomorphismFamily {
    pub fn drag(model: Domain, from: CVector, toward: CVector) -> Result<Self> {
        from.check_dim(model.dim())?;
        toward.check_dim(model.dim())?;
        model.require_interior(&from)?;
        Ok(AutomorphismFamily { model, from, toward, path: FamilyPath::Drag })
    }

    pub fn identity(model: Domain, from: CVector) -> Result<Self> {
        from.check_dim(model.dim())?;
        let toward = from.clone();
        Ok(AutomorphismFamily { model, from, toward, path: FamilyPath::Identity })
    }

    /// Image of `from` under the member with parameter `s`.
    pub fn point(&self, s: f64) -> CVector {
        match self.path {
            FamilyPath::Identity => self.from.clone(),
            FamilyPath::Drag => self.from.axpy(C64::new(s, 0.0), &(&self.toward - &self.from)),
        }
    }

    /// The member with parameter `s`; `index` only labels schedule errors.
    pub fn member(&self, index: usize, s: f64) -> Result<HolomorphicMap> {
        if self.path == FamilyPath::Identity {
            return Ok(HolomorphicMap::identity(self.model.dim()));
        }
        let target = self.point(s);
        let margin = self.model.margin(&target)?;
        if !(margin > 0.0) {
            return Err(Error::Schedule { index, margin });
        }
        model_automorphism(&self.model, &self.from, &target)
    }
}

/// Parameters `1 - 2^{-k}`, `k = 1..=steps`: boundary distance halves each step.
pub fn geometric_schedule(steps: usize) -> Vec<f64> {
    (1..=steps).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}
