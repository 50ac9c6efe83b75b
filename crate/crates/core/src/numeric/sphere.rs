//! Derivative-free maximization of phase-invariant functionals over the unit
//! sphere of a complex subspace.
//!
//! Coarse uniform sampling picks starting points; a Nelder-Mead simplex in
//! the real coordinates of the subspace refines them. The basis vectors are
//! evaluated first and only strictly better points replace the incumbent,
//! so exact ties resolve to the earliest basis direction.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::sampling::Sampler;
use crate::error::{Error, Result};
use crate::CVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSearch {
    /// Coarse sample count; `None` selects 2048 for subspaces of dimension
    /// at most 3 and multiplies by 4 per extra dimension.
    pub coarse_samples: Option<usize>,
    pub refine_starts: usize,
    pub refine_iterations: usize,
    pub refine_tol: f64,
    /// Relative improvement required to replace the incumbent.
    pub tie_tol: f64,
    pub seed: u64,
}

impl Default for SphereSearch {
    fn default() -> Self {
        SphereSearch {
            coarse_samples: None,
            refine_starts: 3,
            refine_iterations: 600,
            refine_tol: 1e-13,
            tie_tol: 1e-12,
            seed: 0x5eed_0001,
        }
    }
}

impl SphereSearch {
    pub fn coarse_count(&self, dim: usize) -> usize {
        self.coarse_samples
            .unwrap_or_else(|| if dim <= 3 { 2048 } else { 2048 * 4usize.pow((dim - 3) as u32) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereMax {
    pub argmax: CVector,
    pub value: f64,
    /// Best value over the coarse grid alone.
    pub coarse_value: f64,
    pub evaluations: usize,
}

struct Objective<'a, F> {
    f: &'a F,
    basis: &'a [CVector],
    evaluations: usize,
}

impl<F: Fn(&CVector) -> f64> Objective<'_, F> {
    fn lift(&self, coords: &[Complex<f64>]) -> Option<CVector> {
        let n = self.basis[0].dim();
        let mut v = CVector::zeros(n);
        for (c, b) in coords.iter().zip(self.basis) {
            v = v.axpy(*c, b);
        }
        v.normalized()
    }

    fn eval(&mut self, coords: &[Complex<f64>]) -> Result<Option<(CVector, f64)>> {
        let Some(v) = self.lift(coords) else { return Ok(None) };
        self.evaluations += 1;
        let value = (self.f)(&v);
        if !value.is_finite() {
            return Err(Error::Evaluation {
                direction: v.iter().map(|z| (z.re, z.im)).collect(),
                value,
            });
        }
        Ok(Some((v, value)))
    }
}

fn to_real(coords: &[Complex<f64>]) -> Vec<f64> {
    coords.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn to_complex(x: &[f64]) -> Vec<Complex<f64>> {
    x.chunks(2).map(|p| Complex::new(p[0], p[1])).collect()
}

/// Maximizes `f` over unit vectors in the span of the orthonormal `basis`.
///
/// `f` must be phase-invariant. The returned argmax is in canonical phase
/// and its value is at least the best coarse sample.
pub fn maximize_on_unit_sphere<F>(f: F, basis: &[CVector], cfg: &SphereSearch) -> Result<SphereMax>
where
    F: Fn(&CVector) -> f64,
{
    if basis.is_empty() {
        return Err(Error::Degenerate("empty subspace".into()));
    }
    let k = basis.len();
    let mut obj = Objective { f: &f, basis, evaluations: 0 };
    let better = |a: f64, b: f64| a > b + cfg.tie_tol * b.abs().max(1.0);

    let mut starts: Vec<(Vec<Complex<f64>>, f64)> = Vec::new();
    let mut best: Option<(CVector, f64)> = None;
    let consider = |coords: Vec<Complex<f64>>,
                        obj: &mut Objective<'_, F>,
                        best: &mut Option<(CVector, f64)>,
                        starts: &mut Vec<(Vec<Complex<f64>>, f64)>|
     -> Result<()> {
        if let Some((v, val)) = obj.eval(&coords)? {
            if best.as_ref().is_none_or(|(_, b)| better(val, *b)) {
                *best = Some((v, val));
            }
            starts.push((coords, val));
            starts.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
            starts.truncate(cfg.refine_starts.max(1));
        }
        Ok(())
    };

    for j in 0..k {
        let mut coords = vec![Complex::new(0.0, 0.0); k];
        coords[j] = Complex::new(1.0, 0.0);
        consider(coords, &mut obj, &mut best, &mut starts)?;
    }
    if k > 1 {
        let mut sampler = Sampler::new(cfg.seed);
        for _ in 0..cfg.coarse_count(k) {
            let c = sampler.unit_direction(k).into_inner();
            consider(c, &mut obj, &mut best, &mut starts)?;
        }
    }
    let (mut best_v, mut best_val) = best.expect("basis evaluation always succeeds");
    let coarse_value = best_val;

    if k > 1 {
        for (coords, _) in starts.clone() {
            let mut x = to_real(&coords);
            for step in [0.05, 2e-3] {
                let (xr, _) = nelder_mead(
                    |x| -> Result<f64> {
                        Ok(match obj.eval(&to_complex(x))? {
                            Some((_, v)) => -v,
                            None => f64::INFINITY,
                        })
                    },
                    &x,
                    step,
                    cfg.refine_iterations,
                    cfg.refine_tol,
                )?;
                x = xr;
            }
            if let Some((v, val)) = obj.eval(&to_complex(&x))? {
                if better(val, best_val) {
                    best_v = v;
                    best_val = val;
                }
            }
        }
    }

    Ok(SphereMax {
        argmax: best_v.canonical_phase(1e-12),
        value: best_val,
        coarse_value,
        evaluations: obj.evaluations,
    })
}

/// Minimizes `g` from `x0` with an axis-aligned initial simplex of size `step`.
pub(crate) fn nelder_mead<G>(mut g: G, x0: &[f64], step: f64, max_iter: usize, tol: f64) -> Result<(Vec<f64>, f64)>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), g(x0)?));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = g(&x)?;
        simplex.push((x, fx));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (f_best, f_worst) = (simplex[0].1, simplex[d].1);
        if (f_worst - f_best).abs() <= tol * (1.0 + f_best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let fr = g(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(gamma);
            let fe = g(&xe)?;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let xc = along(rho);
                let fc = g(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = g(&xc)?;
                (xc, fc)
            };
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let xs: Vec<f64> = x_best
                        .iter()
                        .zip(&item.0)
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    let fs = g(&xs)?;
                    *item = (xs, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(simplex.swap_remove(0))
}
