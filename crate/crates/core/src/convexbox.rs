//! Box containment for centrally symmetric convex bodies in `R^n`.
//!
//! Rotate so the nearest boundary point lies on the `x_1` axis at distance
//! `r_1`; the body then fits in `[-r_1, r_1] × 2B'`, where `B'` is the box
//! of the slice `{x_1 = 0}`. Repeating on the slices gives radii
//! `(r_1, 2 r_2, 4 r_3, ...)`.
//!
//! Vertex bodies are converted to an inequality description by brute-force
//! facet enumeration; slices restrict the inequalities. Support-function
//! bodies use the outer polytope of sampled supporting half-spaces.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Sampler;
use crate::{CLinearMap, CVector, C64};

const FACET_TOL: f64 = 1e-9;
/// Directions sampled for support-function bodies.
const SUPPORT_DIRECTIONS: usize = 4096;

pub type SupportFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Inequalities `a · x <= b` with unit `a` and `b > 0`.
#[derive(Clone, Debug, PartialEq)]
struct HRep {
    n: usize,
    rows: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone)]
pub enum SymmetricBody {
    /// Convex hull of a point set closed under `v -> -v`.
    Vertices { n: usize, points: Vec<Vec<f64>>, facets: Vec<(Vec<f64>, f64)> },
    Support { n: usize, h: SupportFn },
}

impl fmt::Debug for SymmetricBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetricBody::Vertices { n, points, facets } => f
                .debug_struct("Vertices")
                .field("n", n)
                .field("points", &points.len())
                .field("facets", &facets.len())
                .finish(),
            SymmetricBody::Support { n, .. } => f.debug_struct("Support").field("n", n).finish_non_exhaustive(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves the real system `m a = rhs` through the complex LU.
fn solve_real(rows: &[&Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = CLinearMap::from_rows(
        &rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect::<Vec<_>>(),
    )
    .ok()?;
    if m.det().norm() < 1e-12 {
        return None;
    }
    let sol = m.solve(&CVector::from_reals(rhs)).ok()?;
    Some(sol.iter().map(|z| z.re).collect())
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn enumerate_facets(n: usize, points: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    let mut facets: Vec<(Vec<f64>, f64)> = Vec::new();
    let ones = vec![1.0; n];
    for_each_subset(points.len(), n, |idx| {
        let rows: Vec<&Vec<f64>> = idx.iter().map(|&i| &points[i]).collect();
        // hyperplane a · x = 1 through the chosen points
        let Some(a) = solve_real(&rows, &ones) else { return };
        let an = norm(&a);
        if !(an > 0.0 && an.is_finite()) {
            return;
        }
        if points.iter().all(|p| dot(&a, p) <= 1.0 + FACET_TOL) {
            let unit: Vec<f64> = a.iter().map(|x| x / an).collect();
            let b = 1.0 / an;
            if !facets.iter().any(|(u, c)| (c - b).abs() < FACET_TOL && u.iter().zip(&unit).all(|(x, y)| (x - y).abs() < 1e-9)) {
                facets.push((unit, b));
            }
        }
    });
    facets
}

impl SymmetricBody {
    /// Convex hull of `points ∪ -points`; the origin must be interior.
    pub fn from_vertices(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.first().map(|p| p.len()).ok_or_else(|| Error::Degenerate("no vertices".into()))?;
        if n == 0 {
            return Err(Error::Degenerate("zero-dimensional body".into()));
        }
        let mut all: Vec<Vec<f64>> = Vec::with_capacity(2 * points.len());
        for p in points {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
            let neg: Vec<f64> = p.iter().map(|x| -x).collect();
            for q in [p, neg] {
                if !all.iter().any(|r| r.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-15)) {
                    all.push(q);
                }
            }
        }
        let facets = enumerate_facets(n, &all);
        let body = SymmetricBody::Vertices { n, points: all, facets };
        // a bounded full-dimensional hull has a facet in every direction
        let hrep = body.hrep(&mut Sampler::new(0));
        let mut s = Sampler::new(0xfa_ce7);
        for _ in 0..64 {
            let u = s.real_direction(n);
            if !hrep.rows.iter().any(|(a, _)| dot(a, &u) > 1e-12) {
                return Err(Error::Degenerate("vertex hull is not full-dimensional".into()));
            }
        }
        if hrep.rows.is_empty() || hrep.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min) < 1e-9 {
            return Err(Error::Degenerate("origin is not interior".into()));
        }
        Ok(body)
    }

    /// Body with support function `h`; symmetry and positivity are sampled.
    pub fn from_support(n: usize, h: SupportFn) -> Result<Self> {
        let mut s = Sampler::new(0x5u64);
        for _ in 0..256 {
            let u = s.real_direction(n);
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let (a, b) = (h(&u), h(&neg));
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Degenerate(format!("support value {a} is not positive")));
            }
            if (a - b).abs() > 1e-10 * a {
                return Err(Error::Degenerate("support function is not symmetric".into()));
            }
        }
        Ok(SymmetricBody::Support { n, h })
    }

    /// `prod [-r_i, r_i]`.
    pub fn cube(radii: &[f64]) -> Result<Self> {
        let n = radii.len();
        let mut pts = Vec::new();
        for mask in 0..(1usize << n) {
            pts.push((0..n).map(|i| if mask >> i & 1 == 1 { radii[i] } else { -radii[i] }).collect());
        }
        SymmetricBody::from_vertices(pts)
    }

    /// `sum |x_i| <= 1`.
    pub fn cross_polytope(n: usize) -> Result<Self> {
        SymmetricBody::from_vertices((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            SymmetricBody::Vertices { n, .. } | SymmetricBody::Support { n, .. } => *n,
        }
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            SymmetricBody::Vertices { points, .. } => points.iter().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max),
            SymmetricBody::Support { h, .. } => h(u),
        }
    }

    /// Image under the orthogonal map with rows `q`.
    pub fn rotated(&self, q: &[Vec<f64>]) -> Result<Self> {
        match self {
            SymmetricBody::Vertices { points, .. } => {
                SymmetricBody::from_vertices(points.iter().map(|p| mat_vec(q, p)).collect())
            }
            SymmetricBody::Support { n, h } => {
                // h_{QK}(u) = h_K(Q^T u)
                let qt = transpose(q);
                let h = h.clone();
                SymmetricBody::from_support(*n, Arc::new(move |u: &[f64]| h(&mat_vec(&qt, u))))
            }
        }
    }

    fn hrep(&self, sampler: &mut Sampler) -> HRep {
        match self {
            SymmetricBody::Vertices { n, facets, .. } => HRep { n: *n, rows: facets.clone() },
            SymmetricBody::Support { n, h } => {
                let mut rows = Vec::with_capacity(SUPPORT_DIRECTIONS + 2 * n);
                for i in 0..*n {
                    for sign in [1.0, -1.0] {
                        let u: Vec<f64> = (0..*n).map(|j| if i == j { sign } else { 0.0 }).collect();
                        rows.push((u.clone(), h(&u)));
                    }
                }
                for _ in 0..SUPPORT_DIRECTIONS {
                    let u = sampler.real_direction(*n);
                    let b = h(&u);
                    rows.push((u, b));
                }
                if let Some((u, b)) = refine_min_support(h, &rows) {
                    let neg: Vec<f64> = u.iter().map(|x| -x).collect();
                    rows.push((u, b));
                    rows.push((neg, b));
                }
                HRep { n: *n, rows }
            }
        }
    }
}

/// Nelder-Mead refinement of `min h(u)` over the sphere from the best row.
fn refine_min_support(h: &SupportFn, rows: &[(Vec<f64>, f64)]) -> Option<(Vec<f64>, f64)> {
    let (u0, _) = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
    let g = |x: &[f64]| -> Result<f64> {
        let nx = norm(x);
        Ok(if nx > 0.0 { h(&x.iter().map(|v| v / nx).collect::<Vec<_>>()) } else { f64::INFINITY })
    };
    let (x, _) = crate::numeric::sphere::nelder_mead(g, u0, 0.02, 2000, 1e-15).ok()?;
    let nx = norm(&x);
    let u: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let b = h(&u);
    Some((u, b))
}

fn mat_vec(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|row| dot(row, x)).collect()
}

fn transpose(q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = q.len();
    (0..n).map(|j| (0..n).map(|i| q[i][j]).collect()).collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Householder reflection sending the unit vector `d` to `e_1`.
fn householder_to_e1(d: &[f64]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut w = d.to_vec();
    w[0] -= 1.0;
    let ww = dot(&w, &w);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    if ww < 1e-30 {
                        id
                    } else {
                        id - 2.0 * w[i] * w[j] / ww
                    }
                })
                .collect()
        })
        .collect()
}

/// Minimum `b / |a|`, ties broken toward the lexicographically largest normal.
fn inradius(h: &HRep) -> Result<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (a, b) in &h.rows {
        let an = norm(a);
        if an < 1e-14 {
            continue;
        }
        let r = b / an;
        let u: Vec<f64> = a.iter().map(|x| x / an).collect();
        let replace = match &best {
            None => true,
            Some((rb, ub)) => {
                r < rb - 1e-12 * rb || ((r - rb).abs() <= 1e-12 * rb && lex_greater(&u, ub))
            }
        };
        if replace {
            best = Some((r, u));
        }
    }
    let (r, u) = best.ok_or_else(|| Error::Unbounded("body has no bounding inequality".into()))?;
    if !(r > 0.0) {
        return Err(Error::Degenerate("origin is not interior".into()));
    }
    Ok((r, u))
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x > y;
        }
    }
    false
}

/// Minimum Euclidean norm of boundary points and a direction achieving it.
pub fn min_boundary_distance(body: &SymmetricBody) -> Result<(f64, Vec<f64>)> {
    inradius(&body.hrep(&mut Sampler::new(0x1b0c)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    /// `min_i (radius_i - |(Q x)_i|)` over checked points.
    pub worst_slack: f64,
    /// Per-axis minimal slack.
    pub axis_slack: Vec<f64>,
    /// Point (original coordinates) with the worst slack.
    pub witness: Vec<f64>,
    pub checked: usize,
}

/// Checks the body against the box `prod [-radii_i, radii_i]` in the
/// coordinates `Q x`: exactly over vertices, or through the support
/// function along the box axes plus 10^4 sampled exposed points.
pub fn brute_force_containment(body: &SymmetricBody, radii: &[f64], rotation: &[Vec<f64>]) -> Containment {
    let n = body.dim();
    let mut axis_slack = vec![f64::INFINITY; n];
    let mut worst = (f64::INFINITY, vec![0.0; n]);
    let mut checked = 0;
    let mut check = |x: &[f64]| {
        let y = mat_vec(rotation, x);
        for i in 0..n {
            let s = radii[i] - y[i].abs();
            axis_slack[i] = axis_slack[i].min(s);
            if s < worst.0 {
                worst = (s, x.to_vec());
            }
        }
        checked += 1;
    };
    match body {
        SymmetricBody::Vertices { points, .. } => points.iter().for_each(|p| check(p)),
        SymmetricBody::Support { h, .. } => {
            let mut s = Sampler::new(0xc0_47a1);
            for _ in 0..10_000 {
                let u = s.real_direction(n);
                check(&exposed_point(h, &u));
            }
        }
    }
    if let SymmetricBody::Support { .. } = body {
        // exact along each axis: max over the body of (Q x)_i is h(Q^T e_i)
        for i in 0..n {
            let s = radii[i] - body.support(&rotation[i]);
            axis_slack[i] = axis_slack[i].min(s);
            if s < worst.0 {
                worst = (s, rotation[i].iter().map(|x| x * body.support(&rotation[i])).collect());
            }
        }
    }
    Containment { contained: worst.0 >= -FACET_TOL, worst_slack: worst.0, axis_slack, witness: worst.1, checked }
}

/// `∇h(u)` by central differences: the boundary point exposed by `u`.
fn exposed_point(h: &SupportFn, u: &[f64]) -> Vec<f64> {
    let eps = 1e-6;
    (0..u.len())
        .map(|i| {
            let mut p = u.to_vec();
            let mut m = u.to_vec();
            p[i] += eps;
            m[i] -= eps;
            (h(&p) - h(&m)) / (2.0 * eps)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaBox {
    /// `(r_1, r_2, ...)`: the minimal boundary distances of the nested slices.
    pub inradii: Vec<f64>,
    /// `(r_1, 2 r_2, 4 r_3, ...)`.
    pub radii: Vec<f64>,
    /// Rows of the orthogonal map into box coordinates.
    pub rotation: Vec<Vec<f64>>,
    pub containment: Containment,
}

fn cascade(h: &HRep) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (r, d) = inradius(h)?;
    if h.n == 1 {
        return Ok((vec![r], vec![vec![1.0]]));
    }
    let q = householder_to_e1(&d);
    let slice = HRep {
        n: h.n - 1,
        rows: h
            .rows
            .iter()
            .filter_map(|(a, b)| {
                let ra = mat_vec(&q, a);
                let tail = ra[1..].to_vec();
                (norm(&tail) > 1e-14).then_some((tail, *b))
            })
            .collect(),
    };
    let (sub_r, sub_q) = cascade(&slice)?;
    let n = h.n;
    let mut lift = vec![vec![0.0; n]; n];
    lift[0][0] = 1.0;
    for i in 1..n {
        for j in 1..n {
            lift[i][j] = sub_q[i - 1][j - 1];
        }
    }
    let mut radii = vec![r];
    radii.extend(sub_r);
    Ok((radii, mat_mul(&lift, &q)))
}

/// Computes the cascaded lemma box and verifies containment before returning.
pub fn box_lemma_bound(body: &SymmetricBody) -> Result<LemmaBox> {
    let h = body.hrep(&mut Sampler::new(0x1b0c));
    let (inradii, rotation) = cascade(&h)?;
    let radii: Vec<f64> = inradii.iter().enumerate().map(|(i, r)| r * 2f64.powi(i as i32)).collect();
    let containment = brute_force_containment(body, &radii, &rotation);
    if !containment.contained {
        return Err(Error::LemmaViolation { witness: containment.witness.clone(), slack: containment.worst_slack });
    }
    Ok(LemmaBox { inradii, radii, rotation, containment })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    /// Largest `|α_1|` over supporting lines through `(0, r_2)`.
    pub alpha_max: f64,
    /// `sqrt((r_2 / r_1)^2 - 1)`.
    pub bound: f64,
    pub lines: usize,
}

impl SlopeCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.alpha_max <= self.bound + tol
    }
}

/// Slopes of the facets through the slice extreme point `(0, r_2)` of a planar vertex body.
pub fn slope_check(body: &SymmetricBody, lemma: &LemmaBox) -> Result<SlopeCheck> {
    let SymmetricBody::Vertices { n: 2, facets, .. } = body else {
        return Err(Error::Config("slope check needs a planar vertex body".into()));
    };
    let (r1, r2) = (lemma.inradii[0], lemma.inradii[1]);
    let mut alpha_max: f64 = 0.0;
    let mut lines = 0;
    for (a, b) in facets {
        let ra = mat_vec(&lemma.rotation, a);
        if (ra[1] * r2 - b).abs() <= 1e-9 * b.max(1.0) && ra[1].abs() > 1e-14 {
            alpha_max = alpha_max.max((ra[0] / ra[1]).abs());
            lines += 1;
        }
    }
    if lines == 0 {
        return Err(Error::Degenerate("no facet through the slice extreme point".into()));
    }
    let ratio = r2 / r1;
    Ok(SlopeCheck { alpha_max, bound: (ratio * ratio - 1.0).max(0.0).sqrt(), lines })
}

/// Symmetric polytope from `pairs` random directions with random radii and
/// a random axis stretch; resampled until the origin is well inside.
pub fn random_symmetric_polytope(n: usize, pairs: usize, sampler: &mut Sampler) -> SymmetricBody {
    loop {
        let stretch: Vec<f64> = (0..n).map(|_| sampler.uniform_in(0.3, 2.0)).collect();
        let pts: Vec<Vec<f64>> = (0..pairs.max(n))
            .map(|_| {
                let u = sampler.real_direction(n);
                let r = sampler.uniform_in(0.5, 1.5);
                u.iter().zip(&stretch).map(|(x, s)| x * r * s).collect()
            })
            .collect();
        if let Ok(b) = SymmetricBody::from_vertices(pts) {
            if min_boundary_distance(&b).map(|(r, _)| r > 1e-3).unwrap_or(false) {
                return b;
            }
        }
    }
}

/// Haar-distributed orthogonal matrix (Gram-Schmidt on Gaussian columns).
pub fn random_orthogonal(n: usize, sampler: &mut Sampler) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| sampler.normal()).collect();
        for _ in 0..2 {
            for u in &q {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            q.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    q
}
