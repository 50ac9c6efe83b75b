//! Indicatrix stretching factors and the two scaling sequences.
//!
//! The stretching factor at `x` is built greedily: `μ_1` maximizes the
//! metric over unit vectors, `μ_{α+1}` maximizes it on the orthogonal
//! complement of `u_1, ..., u_α`, and `L_x` sends `u_α` to `μ_α e_α`.
//! The Frankel sequence normalizes automorphisms by their derivative,
//! the indicatrix sequence by `L_x` at the image point; the audit compares
//! the two through `A_j = L_j ∘ dφ_j(p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::maps::AutomorphismFamily;
use crate::domains::{Domain, HolomorphicMap};
use crate::error::{Error, Result};
use crate::metrics::{indicatrix_volume, kobayashi_metric, MetricBound, MetricConfig};
use crate::numeric::{maximize_on_unit_sphere, orthonormal_complement_basis, Sampler, SphereSearch};
use crate::{AffineMap, CLinearMap, CVector, C64};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub search: SphereSearch,
    pub metric: MetricConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchingFrame {
    pub base: CVector,
    pub directions: Vec<CVector>,
    pub values: Vec<f64>,
    /// Metric bracket at each `u_α`; exact on models.
    pub brackets: Vec<MetricBound>,
    pub linear: CLinearMap,
}

impl StretchingFrame {
    pub fn is_exact(&self) -> bool {
        self.brackets.iter().all(MetricBound::is_exact)
    }
}

/// Greedy stretching frame at `x`; non-model domains use bracket midpoints.
pub fn stretching_frame(d: &Domain, x: &CVector, cfg: &FrameConfig) -> Result<StretchingFrame> {
    let n = d.dim();
    d.require_interior(x)?;
    let metric = |v: &CVector| kobayashi_metric(d, x, v, &cfg.metric);
    let mut directions: Vec<CVector> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut brackets = Vec::with_capacity(n);
    for _ in 0..n {
        let basis = orthonormal_complement_basis(&directions, n)?;
        let found = maximize_on_unit_sphere(
            |v| metric(v).map(|b| b.mid()).unwrap_or(f64::NAN),
            &basis,
            &cfg.search,
        )?;
        let b = metric(&found.argmax)?;
        let mut mu = b.mid();
        if let Some(&prev) = values.last() {
            // a later maximum can only exceed an earlier one through search error
            if mu > prev && mu - prev <= 1e-9 * prev {
                mu = prev;
            }
        }
        directions.push(found.argmax);
        values.push(mu);
        brackets.push(b);
    }
    // row α of L is μ_α conj(u_α): L v = Σ μ_α <v, u_α> e_α
    let rows: Vec<Vec<C64>> = directions
        .iter()
        .zip(&values)
        .map(|(u, mu)| u.iter().map(|z| z.conj() * mu).collect())
        .collect();
    let linear = CLinearMap::from_rows(&rows)?;
    Ok(StretchingFrame { base: x.clone(), directions, values, brackets, linear })
}

/// `z -> post(φ(z))` for a holomorphic `φ` and an affine post-normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMap {
    pub map: HolomorphicMap,
    pub post: AffineMap,
}

impl NormalizedMap {
    pub fn apply(&self, z: &CVector) -> Result<CVector> {
        Ok(self.post.apply(&self.map.apply(z)?))
    }

    pub fn derivative(&self, z: &CVector) -> Result<CLinearMap> {
        Ok(self.post.linear.mul(&self.map.derivative(z)?))
    }
}

fn normalized(phi: &HolomorphicMap, p: &CVector, linear: CLinearMap) -> Result<NormalizedMap> {
    let pj = phi.apply(p)?;
    let translation = -&linear.apply(&pj);
    Ok(NormalizedMap { map: phi.clone(), post: AffineMap::new(linear, translation)? })
}

/// Frankel normalization `τ = [dφ(p)]^{-1} ∘ (φ(·) - φ(p))`.
pub fn frankel_tau(phi: &HolomorphicMap, p: &CVector) -> Result<NormalizedMap> {
    let inv = phi.derivative(p)?.inverse()?;
    normalized(phi, p, inv)
}

/// Indicatrix normalization `σ = L_{φ(p)} ∘ (φ(·) - φ(p))`, with the frame used.
pub fn indicatrix_sigma(d: &Domain, phi: &HolomorphicMap, p: &CVector, cfg: &FrameConfig) -> Result<(NormalizedMap, StretchingFrame)> {
    let pj = phi.apply(p)?;
    let frame = stretching_frame(d, &pj, cfg)?;
    Ok((normalized(phi, p, frame.linear.clone())?, frame))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub index: usize,
    pub parameter: f64,
    pub point: CVector,
    /// Margin of `φ_j(p)`.
    pub boundary_distance: f64,
    pub derivative: CLinearMap,
    pub mu: Vec<f64>,
    pub a: CLinearMap,
    pub singular_values: Vec<f64>,
    /// Smallest and largest singular value of `A_j`.
    pub c1: f64,
    pub c2: f64,
    pub det_abs: f64,
    /// `sup |τ_j - A_j^{-1} ∘ σ_j|` over the grid, relative to `max(1, |τ_j|)`.
    pub grid_difference: f64,
    /// `|A_j - L_j dφ_j(p)|` recomputed entrywise.
    pub composition_error: f64,
}

impl IndexRecord {
    pub fn distortion(&self) -> f64 {
        self.c2 / self.c1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub domain: String,
    pub records: Vec<IndexRecord>,
    pub max_distortion: f64,
    pub max_det: f64,
    pub min_det: f64,
    pub max_grid_difference: f64,
    pub bounded: bool,
    /// False when some frame came from metric brackets rather than exact
    /// values: the audit is then evidence, not certification.
    pub certified: bool,
}

/// Runs the scaling audit along `schedule`.
pub fn equivalence_audit(
    d: &Domain,
    family: &AutomorphismFamily,
    p: &CVector,
    schedule: &[f64],
    grid: &[CVector],
    cfg: &FrameConfig,
) -> Result<ScalingReport> {
    d.require_interior(p)?;
    for z in grid {
        d.require_interior(z)?;
    }
    let out: Vec<(IndexRecord, bool)> = schedule
        .par_iter()
        .enumerate()
        .map(|(j, &s)| audit_index(d, family, p, j, s, grid, cfg))
        .collect::<Result<_>>()?;
    let certified = out.iter().all(|(_, exact)| *exact);
    let records: Vec<IndexRecord> = out.into_iter().map(|(r, _)| r).collect();
    for (j, w) in records.windows(2).enumerate() {
        if w[1].boundary_distance > w[0].boundary_distance * (1.0 + 1e-12) {
            return Err(Error::Config(format!("schedule is not monotone toward the boundary at index {}", j + 1)));
        }
    }
    let max = |f: &dyn Fn(&IndexRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    let max_distortion = max(&|r| r.distortion());
    let max_det = max(&|r| r.det_abs);
    let min_det = records.iter().map(|r| r.det_abs).fold(f64::INFINITY, f64::min);
    let max_grid_difference = max(&|r| r.grid_difference);
    let bounded = max_distortion.is_finite() && max_det.is_finite() && min_det > 0.0;
    Ok(ScalingReport {
        domain: d.name().to_string(),
        records,
        max_distortion,
        max_det,
        min_det,
        max_grid_difference,
        bounded,
        certified,
    })
}

fn audit_index(
    d: &Domain,
    family: &AutomorphismFamily,
    p: &CVector,
    index: usize,
    s: f64,
    grid: &[CVector],
    cfg: &FrameConfig,
) -> Result<(IndexRecord, bool)> {
    let phi = family.member(index, s)?;
    let point = phi.apply(p)?;
    let boundary_distance = d.margin(&point)?;
    if !(boundary_distance > 0.0) {
        return Err(Error::Schedule { index, margin: boundary_distance });
    }
    let tau = frankel_tau(&phi, p)?;
    let (sigma, frame) = indicatrix_sigma(d, &phi, p, cfg)?;
    let derivative = phi.derivative(p)?;
    let a = frame.linear.mul(&derivative);
    let composition_error = a.max_abs_diff(&sigma.post.linear.mul(&derivative));
    let a_inv = a.inverse()?;
    let mut grid_difference: f64 = 0.0;
    for z in grid {
        let t = tau.apply(z)?;
        let back = a_inv.apply(&sigma.apply(z)?);
        grid_difference = grid_difference.max(t.distance(&back) / t.norm().max(1.0));
    }
    let singular_values = a.singular_values();
    let c1 = singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = singular_values.iter().cloned().fold(0.0, f64::max);
    let det_abs = a.det().norm();
    let exact = frame.is_exact();
    Ok((
        IndexRecord {
            index,
            parameter: s,
            point,
            boundary_distance,
            derivative,
            mu: frame.values,
            a,
            singular_values,
            c1,
            c2,
            det_abs,
            grid_difference,
            composition_error,
        },
        exact,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianCheck {
    /// `|det dφ(p)|^2`.
    pub det_sq: f64,
    /// `Vol I(φ(p)) / Vol I(p)`.
    pub volume_ratio: f64,
    pub ratio_std_error: f64,
    /// `|volume_ratio - det_sq| / det_sq`.
    pub relative_error: f64,
    /// Discrepancy in units of the ratio's standard error (0 when that vanishes).
    pub z_score: f64,
}

/// Compares the real Jacobian of `φ` at `p` with the ratio of indicatrix volumes.
pub fn volume_jacobian_check(
    d: &Domain,
    phi: &HolomorphicMap,
    p: &CVector,
    samples: usize,
    seed: u64,
    cfg: &MetricConfig,
) -> Result<JacobianCheck> {
    let det_sq = phi.derivative(p)?.det().norm_sqr();
    let q = phi.apply(p)?;
    let base = Sampler::new(seed);
    let v0 = indicatrix_volume(d, p, samples, base.fork(0).uniform().to_bits(), cfg)?;
    let v1 = indicatrix_volume(d, &q, samples, base.fork(1).uniform().to_bits(), cfg)?;
    let volume_ratio = v1.value / v0.value;
    let ratio_std_error = volume_ratio * ((v0.std_error / v0.value).powi(2) + (v1.std_error / v1.value).powi(2)).sqrt();
    let diff = (volume_ratio - det_sq).abs();
    Ok(JacobianCheck {
        det_sq,
        volume_ratio,
        ratio_std_error,
        relative_error: diff / det_sq,
        z_score: if ratio_std_error > 0.0 { diff / ratio_std_error } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::maps::model_automorphism;
    use crate::domains::Orientation;

    fn cv(xs: &[f64]) -> CVector {
        CVector::from_reals(xs)
    }

    #[test]
    fn polydisc_frame_off_center() {
        let d = Domain::unit_polydisc(2).unwrap();
        let f = stretching_frame(&d, &cv(&[0.9, 0.0]), &FrameConfig::default()).unwrap();
        assert!((f.values[0] - 1.0 / 0.19).abs() < 1e-9);
        assert!((f.values[1] - 1.0).abs() < 1e-9);
        assert!((f.directions[0].dot(&CVector::basis(2, 0)).norm() - 1.0).abs() < 1e-8);
        assert!((f.linear.det().norm() - f.values.iter().product::<f64>()).abs() < 1e-9 * f.values[0]);
    }

    #[test]
    fn half_plane_frame() {
        let d = Domain::half_plane_product(1, Orientation::Upper).unwrap();
        let b = 0.25;
        let f = stretching_frame(&d, &CVector::new(vec![C64::new(0.0, b)]), &FrameConfig::default()).unwrap();
        assert_eq!(f.values, vec![1.0 / (2.0 * b)]);
    }

    #[test]
    fn tau_normalization_in_the_disc() {
        let d = Domain::unit_polydisc(1).unwrap();
        let phi = model_automorphism(&d, &cv(&[0.0]), &cv(&[0.5])).unwrap();
        let p = cv(&[0.0]);
        let tau = frankel_tau(&phi, &p).unwrap();
        assert!(tau.apply(&p).unwrap().norm() < 1e-15);
        assert!(tau.derivative(&p).unwrap().max_abs_diff(&CLinearMap::identity(1)) < 1e-15);
        // τ(z) = (φ(z) - 0.5) / 0.75
        let z = cv(&[0.3]);
        let expect = (phi.apply(&z).unwrap()[0] - 0.5) / 0.75;
        assert!((tau.apply(&z).unwrap()[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn sigma_in_the_disc() {
        let d = Domain::unit_polydisc(1).unwrap();
        let phi = model_automorphism(&d, &cv(&[0.0]), &cv(&[0.5])).unwrap();
        let (sigma, frame) = indicatrix_sigma(&d, &phi, &cv(&[0.0]), &FrameConfig::default()).unwrap();
        assert!((frame.values[0] - 1.0 / 0.75).abs() < 1e-12);
        let z = cv(&[-0.2]);
        let expect = (phi.apply(&z).unwrap()[0] - 0.5) / 0.75;
        assert!((sigma.apply(&z).unwrap()[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn disc_jacobian_is_exact() {
        let d = Domain::unit_polydisc(1).unwrap();
        let phi = model_automorphism(&d, &cv(&[0.0]), &cv(&[0.5])).unwrap();
        let c = volume_jacobian_check(&d, &phi, &cv(&[0.0]), 4000, 3, &MetricConfig::default()).unwrap();
        assert!((c.det_sq - 0.5625).abs() < 1e-15);
        assert!(c.relative_error < 1e-9);
    }
}
