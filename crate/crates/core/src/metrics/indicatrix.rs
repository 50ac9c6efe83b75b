//! Indicatrix sampling, indicatrix volumes and certified distance-ball samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distance_upper, kobayashi_metric, MetricBound, MetricConfig};
use crate::domains::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::numeric::Sampler;
use crate::{CVector, C64};

/// Smallest Monte Carlo budget accepted by [`indicatrix_volume`].
pub const MIN_VOLUME_SAMPLES: usize = 1000;
const VOLUME_CHUNK: usize = 4096;

/// Radii of `{v : K(x; v) < 1}` along sampled unit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixSample {
    pub base: CVector,
    pub directions: Vec<CVector>,
    pub gauge: Vec<MetricBound>,
    /// `1 / upper`, or the hull radius when convexified.
    pub radius_lo: Vec<f64>,
    /// `1 / lower`, or the hull radius when convexified.
    pub radius_hi: Vec<f64>,
    pub convexified: bool,
}

impl IndicatrixSample {
    /// Columns `re0, im0, ..., radius_lo, radius_hi`.
    pub fn to_csv(&self) -> String {
        let n = self.base.dim();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..n).flat_map(|i| [format!("re{i}"), format!("im{i}")]).collect();
        header.extend(["radius_lo".into(), "radius_hi".into()]);
        let _ = w.write_record(&header);
        for (k, u) in self.directions.iter().enumerate() {
            let mut row: Vec<String> = u.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
            row.extend([self.radius_lo[k].to_string(), self.radius_hi[k].to_string()]);
            let _ = w.write_record(&row);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    /// Largest relative radius change a convex-hull pass would make.
    pub fn hull_defect(&self) -> f64 {
        let lo = hull_radii(&self.directions, &self.radius_lo);
        lo.iter()
            .zip(&self.radius_lo)
            .map(|(h, r)| (h - r) / r)
            .fold(0.0, f64::max)
    }
}

/// Radii of the convex hull of the balanced set spanned by `radii[k] * dirs[k]`,
/// probed along the same directions.
fn hull_radii(dirs: &[CVector], radii: &[f64]) -> Vec<f64> {
    // support h(a) = max_j r_j |<u_j, a>| of the balanced hull
    let support: Vec<f64> = dirs
        .iter()
        .map(|a| dirs.iter().zip(radii).map(|(u, r)| r * u.dot(a).norm()).fold(0.0, f64::max))
        .collect();
    dirs.iter()
        .zip(radii)
        .map(|(v, r)| {
            let g = dirs
                .iter()
                .zip(&support)
                .filter(|(_, h)| **h > 0.0)
                .map(|(a, h)| v.dot(a).norm() / h)
                .fold(0.0, f64::max);
            if g > 0.0 {
                (1.0 / g).max(*r)
            } else {
                *r
            }
        })
        .collect()
}

/// Samples the indicatrix at `x` along the basis vectors and then seeded
/// unit directions, `count` in total.
pub fn indicatrix(d: &Domain, x: &CVector, count: usize, convexify: bool, seed: u64, cfg: &MetricConfig) -> Result<IndicatrixSample> {
    let n = d.dim();
    let mut sampler = Sampler::new(seed);
    let directions: Vec<CVector> = (0..count)
        .map(|k| if k < n { CVector::basis(n, k) } else { sampler.unit_direction(n) })
        .collect();
    let gauge: Vec<MetricBound> = directions
        .par_iter()
        .map(|u| kobayashi_metric(d, x, u, cfg))
        .collect::<Result<_>>()?;
    let mut radius_lo: Vec<f64> = gauge.iter().map(|b| 1.0 / b.upper).collect();
    let mut radius_hi: Vec<f64> = gauge.iter().map(|b| if b.lower > 0.0 { 1.0 / b.lower } else { f64::INFINITY }).collect();
    if convexify {
        radius_lo = hull_radii(&directions, &radius_lo);
        if radius_hi.iter().all(|r| r.is_finite()) {
            radius_hi = hull_radii(&directions, &radius_hi);
        }
    }
    Ok(IndicatrixSample { base: x.clone(), directions, gauge, radius_lo, radius_hi, convexified: convexify })
}

/// Monte Carlo Euclidean volume of the indicatrix, from the polar formula
/// `Vol = π^n / n! · E[ρ(u)^{2n}]` over uniform directions `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    /// Using the bracket midpoint as the metric value.
    pub value: f64,
    pub std_error: f64,
    /// Using the metric upper bound (smallest indicatrix).
    pub value_lo: f64,
    /// Using the metric lower bound; infinite if some lower bound vanished.
    pub value_hi: f64,
    pub samples: usize,
}

pub fn indicatrix_volume(d: &Domain, x: &CVector, samples: usize, seed: u64, cfg: &MetricConfig) -> Result<VolumeEstimate> {
    if samples < MIN_VOLUME_SAMPLES {
        return Err(Error::SampleBudget { given: samples, minimum: MIN_VOLUME_SAMPLES });
    }
    let n = d.dim();
    let base = Sampler::new(seed);
    let chunks = samples.div_ceil(VOLUME_CHUNK);
    // per-chunk sums (mid, mid^2, lo, hi) merged in chunk order
    let sums: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<[f64; 4]> {
            let mut s = base.fork(c as u64);
            let len = VOLUME_CHUNK.min(samples - c * VOLUME_CHUNK);
            let mut acc = [0.0; 4];
            for _ in 0..len {
                let u = s.unit_direction(n);
                let b = kobayashi_metric(d, x, &u, cfg)?;
                let p = (2 * n) as i32;
                let mid = b.mid().powi(-p);
                acc[0] += mid;
                acc[1] += mid * mid;
                acc[2] += b.upper.powi(-p);
                acc[3] += if b.lower > 0.0 { b.lower.powi(-p) } else { f64::INFINITY };
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = sums.iter().fold([0.0; 4], |a, s| [a[0] + s[0], a[1] + s[1], a[2] + s[2], a[3] + s[3]]);
    let m = samples as f64;
    let unit = std::f64::consts::PI.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mean = total[0] / m;
    let var = (total[1] / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(VolumeEstimate {
        value: unit * mean,
        std_error: unit * (var / m).sqrt(),
        value_lo: unit * total[2] / m,
        value_hi: unit * total[3] / m,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSampleConfig {
    /// Share of samples placed on the boundary shell of the distance ball.
    pub shell_fraction: f64,
    /// Relative bracket width at which the edge search stops.
    pub bisection_tol: f64,
    pub metric: MetricConfig,
}

impl Default for BallSampleConfig {
    fn default() -> Self {
        BallSampleConfig { shell_fraction: 0.5, bisection_tol: 1e-13, metric: MetricConfig::default() }
    }
}

/// Points certified inside the distance ball `B(x; r)`: each has a
/// distance upper bound below `r`.
///
/// The ball's edge on each radial ray from `x` is found by safeguarded
/// Newton steps on the distance along the ray. A share of the
/// samples sits on the edge (directions stratified in dimension 1), the
/// rest is spread through the ball. Rays in an affine image follow the
/// images of the inner domain's rays.
pub fn distance_ball_sample(
    d: &Domain,
    x: &CVector,
    r: f64,
    count: usize,
    seed: u64,
    cfg: &BallSampleConfig,
) -> Result<Vec<CVector>> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("distance-ball radius must be positive, got {r}")));
    }
    d.require_interior(x)?;
    let n = d.dim();
    let shell = ((count as f64) * cfg.shell_fraction).round() as usize;
    let base = Sampler::new(seed);
    let scale = cfg.metric.convention.distance_scale();
    let upper = |y: &CVector| -> Option<f64> {
        if !d.margin(y).map(|m| m > 0.0).unwrap_or(false) {
            return None;
        }
        distance_upper(d, x, y, &cfg.metric).ok()
    };
    let within = |y: &CVector| upper(y).is_some_and(|v| v < r);
    // Newton aims just inside the edge; the slack stops it once met
    let target = r * (1.0 - 1e-12);
    let out: Vec<Option<CVector>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut s = base.fork(k as u64);
            let u = if n == 1 && k < shell {
                let theta = std::f64::consts::TAU * (k as f64 + s.uniform()) / shell as f64;
                CVector::new(vec![C64::from_polar(1.0, theta)])
            } else {
                s.unit_direction(n)
            };
            let u = pushed_direction(d, u);
            let exit = d.ray_exit(x, &u).unwrap_or(f64::INFINITY);
            let at = |t: f64| x.axpy(C64::new(t, 0.0), &u);
            let mut hi = if exit.is_finite() { exit } else { 1.0 };
            let mut grow = 0;
            while !exit.is_finite() && within(&at(hi)) && grow < 200 {
                hi *= 2.0;
                grow += 1;
            }
            // safeguarded Newton on exp(-2 d(x, x + t u)), which is close to
            // linear near the boundary; the slope comes from the metric upper bound
            let (mut lo, mut f_lo) = (0.0, 0.0);
            let (mut t, mut f_t) = (0.0, 0.0);
            for _ in 0..200 {
                if hi - lo <= cfg.bisection_tol * hi || (lo > 0.0 && r - f_lo <= 2e-12 * r) {
                    break;
                }
                let slope = kobayashi_metric(d, &at(t), &u, &cfg.metric).map(|m| scale * m.upper).unwrap_or(0.0);
                let step = t + 0.5 * scale * (1.0 - (-2.0 * (target - f_t) / scale).exp()) / slope;
                let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
                if next <= lo || next >= hi {
                    break;
                }
                match upper(&at(next)) {
                    Some(v) if v < r => {
                        (lo, f_lo) = (next, v);
                        (t, f_t) = (next, v);
                    }
                    Some(v) => {
                        hi = next;
                        (t, f_t) = (next, v);
                    }
                    None => {
                        hi = next;
                        (t, f_t) = (lo, f_lo);
                    }
                }
            }
            let t = if k < shell { lo } else { lo * s.uniform().powf(1.0 / (2 * n) as f64) };
            let y = at(t);
            within(&y).then_some(y)
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Ray directions of an affine image are the pushed-forward directions of
/// its inner domain, so ball samples are equivariant under affine maps.
fn pushed_direction(d: &Domain, u: CVector) -> CVector {
    match d.kind() {
        DomainKind::AffineImage { inner, map, .. } => {
            let w = pushed_direction(inner, u);
            map.linear.apply(&w).normalized().unwrap_or(w)
        }
        _ => u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Orientation;

    #[test]
    fn half_plane_indicatrix_is_disc_of_radius_2b() {
        let h = Domain::half_plane_product(1, Orientation::Upper).unwrap();
        let b = 3.0;
        let x = CVector::new(vec![C64::new(0.0, b)]);
        let ind = indicatrix(&h, &x, 16, false, 1, &MetricConfig::default()).unwrap();
        for r in ind.radius_lo.iter().chain(&ind.radius_hi) {
            assert!((r - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_budget_is_enforced() {
        let b = Domain::unit_ball(1).unwrap();
        let e = indicatrix_volume(&b, &CVector::zeros(1), 999, 1, &MetricConfig::default()).unwrap_err();
        assert_eq!(e, Error::SampleBudget { given: 999, minimum: 1000 });
    }

    #[test]
    fn disc_area() {
        let b = Domain::unit_ball(1).unwrap();
        let v = indicatrix_volume(&b, &CVector::zeros(1), 2000, 1, &MetricConfig::default()).unwrap();
        assert!((v.value - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn disc_distance_ball() {
        let d = Domain::unit_polydisc(1).unwrap();
        let r = 0.7;
        let pts = distance_ball_sample(&d, &CVector::zeros(1), r, 200, 4, &BallSampleConfig::default()).unwrap();
        assert_eq!(pts.len(), 200);
        let far = pts.iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert!(far < r.tanh());
        assert!(r.tanh() - far < 1e-10);
    }

    #[test]
    fn csv_layout() {
        let b = Domain::unit_ball(2).unwrap();
        let ind = indicatrix(&b, &CVector::zeros(2), 3, false, 1, &MetricConfig::default()).unwrap();
        let csv = ind.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("re0,im0,re1,im1,radius_lo,radius_hi"));
        assert_eq!(lines.count(), 3);
    }
}
