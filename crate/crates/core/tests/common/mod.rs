#![allow(dead_code)]

use invmetric::numeric::Sampler;
use invmetric::{CLinearMap, CVector, C64};

/// Gram-Schmidt on a Gaussian matrix: a unitary drawn from `s`.
pub fn random_unitary(n: usize, s: &mut Sampler) -> CLinearMap {
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = CVector::from_fn(n, |_| C64::new(s.normal(), s.normal()));
        for c in &cols {
            let p = v.dot(c);
            v = v.axpy(-p, c);
        }
        if let Some(u) = v.normalized() {
            cols.push(u);
        }
    }
    CLinearMap::from_columns(&cols).expect("square")
}

/// A random complex matrix with entries in the unit square.
pub fn random_matrix(n: usize, s: &mut Sampler) -> CLinearMap {
    let rows: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| C64::new(s.uniform_in(-1.0, 1.0), s.uniform_in(-1.0, 1.0))).collect()).collect();
    CLinearMap::from_rows(&rows).expect("square")
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
