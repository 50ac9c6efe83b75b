//! Dense complex linear algebra on `C^n` for small `n`.
//!
//! Everything here is generic over [`Real`] so the same routines run in
//! `f32` and `f64`; the rest of the crate uses the `f64` aliases exported
//! from the crate root.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::scalar::Real;
use crate::error::{Error, Result};

/// A vector in `C^n`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVec<T: Real>(Vec<Complex<T>>);

impl<T: Real> fmt::Debug for CVec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|z| (z.re, z.im)))
            .finish()
    }
}

impl<T: Real> CVec<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Self {
        CVec(entries)
    }

    pub fn zeros(n: usize) -> Self {
        CVec(vec![Complex::new(T::zero(), T::zero()); n])
    }

    /// The standard basis vector `e_i` (0-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Complex::new(T::one(), T::zero());
        v
    }

    pub fn from_reals(xs: &[T]) -> Self {
        CVec(xs.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> Complex<T>) -> Self {
        CVec((0..n).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }

    /// Hermitian inner product `<self, other> = sum self_i conj(other_i)`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj())
    }

    /// Bilinear pairing `sum self_i other_i` (no conjugation).
    pub fn pair(&self, other: &Self) -> Complex<T> {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        // hypot-style accumulation keeps tiny and huge entries finite
        let scale = self.max_abs();
        if scale == T::zero() || !scale.is_finite() {
            return scale;
        }
        let s = self
            .0
            .iter()
            .fold(T::zero(), |acc, z| acc + (z / scale).norm_sqr());
        scale * s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        CVec(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: T) -> Self {
        CVec(self.0.iter().map(|z| z * c).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Self {
        CVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b * c).collect())
    }

    pub fn conj(&self) -> Self {
        CVec(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale_real(T::one() / n))
        } else {
            None
        }
    }

    /// Representative of the phase class `{e^{it} v}` whose first entry of
    /// modulus above `tol` is real positive.
    pub fn canonical_phase(&self, tol: T) -> Self {
        match self.0.iter().find(|z| z.norm() > tol) {
            Some(z) => self.scale(z.conj() / z.norm()),
            None => self.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn distance(&self, other: &Self) -> T {
        (self - other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl FnMut(&Complex<T>) -> Complex<T>) -> Self {
        CVec(self.0.iter().map(f).collect())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }
}

impl<T: Real> Index<usize> for CVec<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.0[i]
    }
}

impl<T: Real> IndexMut<usize> for CVec<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.0[i]
    }
}

impl<T: Real> From<Vec<Complex<T>>> for CVec<T> {
    fn from(v: Vec<Complex<T>>) -> Self {
        CVec(v)
    }
}

macro_rules! vec_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<T: Real> $tr<&CVec<T>> for &CVec<T> {
            type Output = CVec<T>;
            fn $method(self, rhs: &CVec<T>) -> CVec<T> {
                debug_assert_eq!(self.dim(), rhs.dim());
                CVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a $op b).collect())
            }
        }
        impl<T: Real> $tr<CVec<T>> for CVec<T> {
            type Output = CVec<T>;
            fn $method(self, rhs: CVec<T>) -> CVec<T> {
                &self $op &rhs
            }
        }
    };
}

vec_binop!(Add, add, +);
vec_binop!(Sub, sub, -);

impl<T: Real> Neg for &CVec<T> {
    type Output = CVec<T>;
    fn neg(self) -> CVec<T> {
        CVec(self.0.iter().map(|z| -z).collect())
    }
}

/// A square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> fmt::Debug for CMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<(T, T)>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| (self[(i, j)].re, self[(i, j)].im)).collect())
            .collect();
        f.debug_struct("CMat").field("rows", &rows).finish()
    }
}

impl<T: Real> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> CMat<T> {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn diag(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(cols: &[CVec<T>]) -> Result<Self> {
        let n = cols.len();
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            c.check_dim(n)?;
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> CVec<T> {
        CVec::from_fn(self.n, |i| self[(i, j)])
    }

    pub fn row(&self, i: usize) -> CVec<T> {
        CVec::from_fn(self.n, |j| self[(i, j)])
    }

    pub fn apply(&self, v: &CVec<T>) -> CVec<T> {
        debug_assert_eq!(v.dim(), self.n);
        CVec::from_fn(self.n, |i| {
            (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * v[j])
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        CMat { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> Complex<T> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        let scale = self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()));
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs > scale * T::epsilon() * T::lit(16.0)) {
                return Err(Error::NotInvertible {
                    det_abs: self.det().norm().to_f64().unwrap_or(0.0),
                });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                    inv.swap(col * n + j, piv * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= factor * av;
                    inv[r * n + j] -= factor * iv;
                }
            }
        }
        Ok(CMat { n, data: inv })
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: &CVec<T>) -> Result<CVec<T>> {
        Ok(self.inverse()?.apply(b))
    }

    /// Singular values in decreasing order.
    ///
    /// One-sided Jacobi on the real `2n x 2n` embedding `[[Re, -Im], [Im, Re]]`,
    /// whose singular values are those of `self`, each repeated twice.
    #[allow(clippy::needless_range_loop)]
    pub fn singular_values(&self) -> Vec<T> {
        let n = self.n;
        let m = 2 * n;
        // column-major storage of the embedding
        let mut cols = vec![vec![T::zero(); m]; m];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                cols[j][i] = z.re;
                cols[j][i + n] = z.im;
                cols[j + n][i] = -z.im;
                cols[j + n][i + n] = z.re;
            }
        }
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..m {
                for q in p + 1..m {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for k in 0..m {
                        alpha += cols[p][k] * cols[p][k];
                        beta += cols[q][k] * cols[q][k];
                        gamma += cols[p][k] * cols[q][k];
                    }
                    if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for k in 0..m {
                        let (up, uq) = (cols[p][k], cols[q][k]);
                        cols[p][k] = c * up - s * uq;
                        cols[q][k] = s * up + c * uq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = cols
            .iter()
            .map(|c| c.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv.into_iter().step_by(2).collect()
    }
}

/// `z -> linear(z) + translation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CAffine<T: Real> {
    pub linear: CMat<T>,
    pub translation: CVec<T>,
}

impl<T: Real> CAffine<T> {
    pub fn new(linear: CMat<T>, translation: CVec<T>) -> Result<Self> {
        translation.check_dim(linear.dim())?;
        Ok(CAffine { linear, translation })
    }

    pub fn identity(n: usize) -> Self {
        CAffine { linear: CMat::identity(n), translation: CVec::zeros(n) }
    }

    pub fn translation(t: CVec<T>) -> Self {
        CAffine { linear: CMat::identity(t.dim()), translation: t }
    }

    pub fn linear(m: CMat<T>) -> Self {
        let n = m.dim();
        CAffine { linear: m, translation: CVec::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, z: &CVec<T>) -> CVec<T> {
        &self.linear.apply(z) + &self.translation
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        CAffine {
            linear: self.linear.mul(&inner.linear),
            translation: &self.linear.apply(&inner.translation) + &self.translation,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.linear.inverse()?;
        let t = -&inv.apply(&self.translation);
        Ok(CAffine { linear: inv, translation: t })
    }
}

/// Orthonormal basis of the Hermitian-orthogonal complement of `vectors` in `C^n`.
///
/// Inputs must be unit vectors (to `1e-10`) and linearly independent; they
/// need not be mutually orthogonal. Returned vectors carry canonical phase.
pub fn orthonormal_complement_basis<T: Real>(vectors: &[CVec<T>], n: usize) -> Result<Vec<CVec<T>>> {
    let unit_tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    let indep_tol = T::lit(1e-8).max(T::epsilon().sqrt());
    let mut q: Vec<CVec<T>> = Vec::with_capacity(n);
    for (k, v) in vectors.iter().enumerate() {
        v.check_dim(n)?;
        if (v.norm() - T::one()).abs() > unit_tol {
            return Err(Error::Degenerate(format!("input {k} is not a unit vector")));
        }
        let r = project_out(v, &q);
        let rn = r.norm();
        if rn < indep_tol {
            return Err(Error::Degenerate(format!("input {k} is linearly dependent on the previous ones")));
        }
        q.push(r.scale_real(T::one() / rn));
    }
    if q.len() > n {
        return Err(Error::Degenerate(format!("{} vectors in C^{n}", q.len())));
    }
    let start = q.len();
    while q.len() < n {
        // pick the standard basis vector with the largest residual
        let (best, _) = (0..n)
            .map(|i| {
                let r = project_out(&CVec::basis(n, i), &q);
                let rn = r.norm();
                (r, rn)
            })
            .fold((CVec::zeros(n), T::zero()), |b, c| if c.1 > b.1 { c } else { b });
        let best = best.normalized().ok_or_else(|| Error::Degenerate("complement collapsed".into()))?;
        q.push(best);
    }
    Ok(q.split_off(start).into_iter().map(|v| v.canonical_phase(T::tiny())).collect())
}

/// Two passes of modified Gram-Schmidt against an orthonormal set.
fn project_out<T: Real>(v: &CVec<T>, q: &[CVec<T>]) -> CVec<T> {
    let mut r = v.clone();
    for _ in 0..2 {
        for u in q {
            let c = r.dot(u);
            r = r.axpy(-c, u);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn gram_is_identity(vs: &[CVec<f64>], tol: f64) -> bool {
        vs.iter().enumerate().all(|(i, a)| {
            vs.iter().enumerate().all(|(j, b)| {
                let expect = if i == j { 1.0 } else { 0.0 };
                (a.dot(b) - c(expect, 0.0)).norm() < tol
            })
        })
    }

    #[test]
    fn complement_of_e1_is_e2_phase() {
        let out = orthonormal_complement_basis::<f64>(&[CVec::basis(2, 0)], 2).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0][0]).norm() < 1e-14);
        assert!((out[0][1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_of_nothing_is_orthonormal_basis() {
        let out = orthonormal_complement_basis::<f64>(&[], 2).unwrap();
        assert_eq!(out.len(), 2);
        assert!(gram_is_identity(&out, 1e-14));
    }

    #[test]
    fn complement_of_diagonal() {
        let s = 1.0 / 2f64.sqrt();
        let v = CVec::new(vec![c(s, 0.0), c(s, 0.0)]);
        let out = orthonormal_complement_basis(std::slice::from_ref(&v), 2).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].dot(&v).norm() < 1e-14);
        assert!((out[0].norm() - 1.0).abs() < 1e-14);
        let mut all = vec![v];
        all.extend(out);
        assert!(gram_is_identity(&all, 1e-14));
    }

    #[test]
    fn dependent_inputs_rejected() {
        let a = CVec::basis(3, 0);
        let b = a.scale(c(0.0, 1.0));
        assert!(matches!(
            orthonormal_complement_basis(&[a, b], 3),
            Err(Error::Degenerate(_))
        ));
        assert!(orthonormal_complement_basis(&[CVec::from_reals(&[2.0, 0.0])], 2).is_err());
    }

    #[test]
    fn inverse_and_det_small() {
        let m = CMat::from_rows(&[vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.0, -1.0), c(3.0, 0.5)]]).unwrap();
        let det = m.det();
        // (1+i)(3+0.5i) - 2(-i) = 2.5 + 3.5i + 2i
        assert!((det - c(2.5, 5.5)).norm() < 1e-14);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).max_abs_diff(&CMat::identity(2)) < 1e-14);
        assert_eq!(CMat::<f64>::identity(4).det(), c(1.0, 0.0));
    }

    #[test]
    fn singular_inverse_errors() {
        let m = CMat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn singular_values_of_diagonal_and_unitary() {
        let d = CMat::diag(&[c(0.0, 3.0), c(-0.5, 0.0), c(2.0, 0.0)]);
        let sv = d.singular_values();
        assert!((sv[0] - 3.0).abs() < 1e-13 && (sv[1] - 2.0).abs() < 1e-13 && (sv[2] - 0.5).abs() < 1e-13);
        let s = 1.0 / 2f64.sqrt();
        let u = CMat::from_rows(&[vec![c(s, 0.0), c(0.0, s)], vec![c(0.0, s), c(s, 0.0)]]).unwrap();
        for x in u.singular_values() {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_inverse_round_trip() {
        let m = CMat::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.5, 0.0), c(1.0, -1.0)]]).unwrap();
        let t = CVec::new(vec![c(0.3, -0.2), c(1.0, 0.0)]);
        let a = CAffine::new(m, t).unwrap();
        let z = CVec::new(vec![c(0.1, 0.2), c(-0.4, 0.7)]);
        let back = a.inverse().unwrap().apply(&a.apply(&z));
        assert!(back.max_abs_diff(&z) < 1e-14);
        let id = a.compose(&a.inverse().unwrap());
        assert!(id.linear.max_abs_diff(&CMat::identity(2)) < 1e-14);
    }

    #[test]
    fn generic_in_f32() {
        let m = CMat::<f32>::diag(&[Complex::new(2.0, 0.0), Complex::new(0.0, 0.5)]);
        assert!((m.det() - Complex::new(0.0f32, 1.0)).norm() < 1e-6);
        let out = orthonormal_complement_basis::<f32>(&[CVec::basis(3, 1)], 3).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|v| v[1].norm() < 1e-6));
    }
}
