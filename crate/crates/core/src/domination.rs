//! Uniform domination: distance balls sit inside scaled indicatrices.
//!
//! For the upper half-plane the ball of radius `r` around `ib` is an
//! Apollonius disc and the sharp scale is `λ(r) = t / (1 - t)`, with `t` the
//! tanh parameter of the distance convention. Convex domains are checked
//! against `2λ(r)` with certified ball samples and overestimated gauges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::maps::AutomorphismFamily;
use crate::domains::{Domain, Orientation};
use crate::error::{Error, Result};
use crate::metrics::{distance_ball_sample, kobayashi_metric, BallSampleConfig, Convention, MetricConfig};
use crate::numeric::Sampler;
use crate::scaling::frankel_tau;
use crate::{CVector, C64};

/// `λ(r) = t / (1 - t)` with `t = convention.tanh_parameter(r)`.
pub fn lambda_halfplane(r: f64, convention: Convention) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("radius must be nonnegative, got {r}")));
    }
    let t = convention.tanh_parameter(r);
    if t >= 1.0 {
        return Err(Error::Unbounded(format!("tanh parameter {t} reaches 1 at r = {r}")));
    }
    Ok(t / (1.0 - t))
}

/// One `(center, radius)` cell of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCell {
    pub center: CVector,
    pub r: f64,
    pub lambda: f64,
    /// `factor · λ(r)`: the scale the check asserts.
    pub bound: f64,
    /// Largest indicatrix gauge of `y - x` over certified ball points.
    pub worst_gauge: f64,
    /// Gauge of the worst point recomputed with the metric bracket midpoint.
    pub worst_gauge_mid: f64,
    /// Closed-form extremum when one is known.
    pub analytic: Option<f64>,
    /// `worst_gauge / λ(r)`: the empirical constant in place of `factor`.
    pub best_constant: f64,
    pub certified: usize,
    pub requested: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationProfile {
    pub domain: String,
    pub convention: Convention,
    pub factor: f64,
    pub tolerance: f64,
    pub cells: Vec<DominationCell>,
}

impl DominationProfile {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed)
    }

    /// Cells whose certified sample count fell below the request.
    pub fn reduced_coverage(&self) -> Vec<&DominationCell> {
        self.cells.iter().filter(|c| c.certified < c.requested).collect()
    }

    pub fn worst_ratio(&self) -> f64 {
        self.cells.iter().map(|c| c.best_constant).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationConfig {
    pub tolerance: f64,
    pub ball: BallSampleConfig,
}

impl Default for DominationConfig {
    fn default() -> Self {
        DominationConfig { tolerance: 1e-6, ball: BallSampleConfig::default() }
    }
}

impl DominationConfig {
    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.ball.metric.convention = convention;
        self
    }

    fn convention(&self) -> Convention {
        self.ball.metric.convention
    }
}

struct CellOutcome {
    worst: f64,
    worst_mid: f64,
    certified: usize,
}

fn gauge_scan(d: &Domain, x: &CVector, points: &[CVector], metric: &MetricConfig) -> Result<CellOutcome> {
    let mut worst = (0.0, None::<CVector>);
    for y in points {
        let v = y - x;
        if v.norm() == 0.0 {
            continue;
        }
        let g = kobayashi_metric(d, x, &v, metric)?.upper;
        if g > worst.0 {
            worst = (g, Some(v));
        }
    }
    let worst_mid = match &worst.1 {
        Some(v) => kobayashi_metric(d, x, v, metric)?.mid(),
        None => 0.0,
    };
    Ok(CellOutcome { worst: worst.0, worst_mid, certified: points.len() })
}

/// Samples `B(ib; r)` in the upper half-plane for each `(b, r)` and compares
/// the worst gauge `|y - ib| / 2b` with `λ(r)`.
///
/// The ray straight up from `ib` is always included: it reaches the top of
/// the Apollonius disc, where the gauge is extremal. A cell passes when the
/// closed-form extremum matches `λ(r)` to `1e-9` and the sampled worst gauge
/// matches it within the configured tolerance.
pub fn verify_halfplane_domination(
    b_values: &[f64],
    r_values: &[f64],
    samples: usize,
    seed: u64,
    cfg: &DominationConfig,
) -> Result<DominationProfile> {
    let h = Domain::half_plane_product(1, Orientation::Upper)?;
    let conv = cfg.convention();
    let cells: Vec<(f64, f64)> = b_values.iter().flat_map(|&b| r_values.iter().map(move |&r| (b, r))).collect();
    let base = Sampler::new(seed);
    let out = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(b, r))| -> Result<DominationCell> {
            if !(b > 0.0) {
                return Err(Error::Config(format!("half-plane height must be positive, got {b}")));
            }
            let lambda = lambda_halfplane(r, conv)?;
            let x = CVector::new(vec![C64::new(0.0, b)]);
            let t = conv.tanh_parameter(r);
            // Apollonius disc of the ball: center i b (1 + t²)/(1 - t²), radius 2bt/(1 - t²)
            let center = b * (1.0 + t * t) / (1.0 - t * t);
            let radius = 2.0 * b * t / (1.0 - t * t);
            let analytic = (center - b + radius) / (2.0 * b);
            let seed_k = base.fork(k as u64).index(usize::MAX) as u64;
            let mut points = if r > 0.0 { distance_ball_sample(&h, &x, r, samples, seed_k, &cfg.ball)? } else { Vec::new() };
            if r > 0.0 {
                points.push(top_of_ball(&h, &x, r, cfg)?);
            }
            let o = gauge_scan(&h, &x, &points, &cfg.ball.metric)?;
            let passed = (analytic - lambda).abs() <= 1e-9 * lambda.max(1.0)
                && (o.worst - lambda).abs() <= cfg.tolerance * lambda.max(1.0);
            Ok(DominationCell {
                center: x,
                r,
                lambda,
                bound: lambda,
                worst_gauge: o.worst,
                worst_gauge_mid: o.worst_mid,
                analytic: Some(analytic),
                best_constant: if lambda > 0.0 { o.worst / lambda } else { 0.0 },
                certified: o.certified,
                requested: samples + usize::from(r > 0.0),
                passed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DominationProfile { domain: h.name().to_string(), convention: conv, factor: 1.0, tolerance: cfg.tolerance, cells: out })
}

/// Certified ball point on the ray `ib + s i`, bisected to the edge.
fn top_of_ball(h: &Domain, x: &CVector, r: f64, cfg: &DominationConfig) -> Result<CVector> {
    let up = CVector::new(vec![C64::new(0.0, 1.0)]);
    let at = |s: f64| x.axpy(C64::new(s, 0.0), &up);
    let inside = |s: f64| crate::metrics::distance_upper(h, x, &at(s), &cfg.ball.metric).map(|v| v < r);
    let mut hi = x[0].im;
    while inside(hi)? {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > cfg.ball.bisection_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}

/// Checks `B(x; r) - x ⊂ 2λ(r) I(x)` on certified ball samples, using the
/// metric upper bound as the gauge.
pub fn verify_convex_domination(
    d: &Domain,
    x_values: &[CVector],
    r_values: &[f64],
    samples: usize,
    seed: u64,
    cfg: &DominationConfig,
) -> Result<DominationProfile> {
    let conv = cfg.convention();
    let cells: Vec<(&CVector, f64)> = x_values.iter().flat_map(|x| r_values.iter().map(move |&r| (x, r))).collect();
    let base = Sampler::new(seed);
    let out = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(x, r))| -> Result<DominationCell> {
            let lambda = lambda_halfplane(r, conv)?;
            let seed_k = base.fork(k as u64).index(usize::MAX) as u64;
            let points = if r > 0.0 { distance_ball_sample(d, x, r, samples, seed_k, &cfg.ball)? } else { Vec::new() };
            let o = gauge_scan(d, x, &points, &cfg.ball.metric)?;
            let bound = 2.0 * lambda;
            Ok(DominationCell {
                center: x.clone(),
                r,
                lambda,
                bound,
                worst_gauge: o.worst,
                worst_gauge_mid: o.worst_mid,
                analytic: None,
                best_constant: if lambda > 0.0 { o.worst / lambda } else { 0.0 },
                certified: o.certified,
                requested: samples,
                passed: o.worst <= bound * (1.0 + cfg.tolerance),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DominationProfile { domain: d.name().to_string(), convention: conv, factor: 2.0, tolerance: cfg.tolerance, cells: out })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFamilyRecord {
    pub index: usize,
    pub parameter: f64,
    pub worst_gauge: f64,
}

/// Gauges at `p` of `τ_φ(B(p; r))` along an automorphism schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFamilyReport {
    pub r: f64,
    pub lambda: f64,
    pub bound: f64,
    pub records: Vec<NormalFamilyRecord>,
    pub bounded: bool,
}

/// For each member `φ` of the schedule, maps certified samples of
/// `B(p; r)` by the Frankel normalization `τ_φ` and records the worst gauge
/// at `p`. A normal family keeps these below `2λ(r)`.
#[allow(clippy::too_many_arguments)]
pub fn normal_family_witness(
    d: &Domain,
    family: &AutomorphismFamily,
    p: &CVector,
    r: f64,
    schedule: &[f64],
    samples: usize,
    seed: u64,
    cfg: &DominationConfig,
) -> Result<NormalFamilyReport> {
    let lambda = lambda_halfplane(r, cfg.convention())?;
    let bound = 2.0 * lambda;
    let points = distance_ball_sample(d, p, r, samples, seed, &cfg.ball)?;
    let records = schedule
        .par_iter()
        .enumerate()
        .map(|(index, &s)| -> Result<NormalFamilyRecord> {
            let tau = frankel_tau(&family.member(index, s)?, p)?;
            let mut worst: f64 = 0.0;
            for y in &points {
                let v = tau.apply(y)?;
                if v.norm() > 0.0 {
                    worst = worst.max(kobayashi_metric(d, p, &v, &cfg.ball.metric)?.upper);
                }
            }
            Ok(NormalFamilyRecord { index, parameter: s, worst_gauge: worst })
        })
        .collect::<Result<Vec<_>>>()?;
    let bounded = records.iter().all(|r| r.worst_gauge <= bound * (1.0 + cfg.tolerance));
    Ok(NormalFamilyReport { r, lambda, bound, records, bounded })
}
