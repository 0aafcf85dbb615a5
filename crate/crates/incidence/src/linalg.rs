//! Exact dense linear algebra over a `Scalar` field: reduced echelon bases
//! with deterministic pivots (lowest coordinate first), membership tests,
//! kernels and linear solves. Dimensions here are tiny (a few dozen), so
//! simple Gaussian elimination is the right tool.

use crate::scalars::Scalar;

/// A subspace kept as a reduced row-echelon basis. Pivot columns are strictly
/// increasing and each pivot entry is 1 and is the only nonzero entry in its
/// column, so two equal subspaces have identical bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Echelon<S: Scalar> {
    dim: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
}

impl<S: Scalar> Echelon<S> {
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_vectors<I: IntoIterator<Item = Vec<S>>>(dim: usize, vecs: I) -> Self {
        let mut e = Echelon::new(dim);
        for v in vecs {
            e.insert(v);
        }
        e
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residual of `v` after reduction against the current basis.
    pub fn reduce(&self, mut v: Vec<S>) -> Vec<S> {
        assert_eq!(v.len(), self.dim);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let c = v[p].clone();
                for i in p..self.dim {
                    v[i] = v[i].sub(&c.mul(&row[i]));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[S]) -> bool {
        self.reduce(v.to_vec()).iter().all(Scalar::is_zero)
    }

    /// Inserts a vector; returns true when the rank grew.
    pub fn insert(&mut self, v: Vec<S>) -> bool {
        let v = self.reduce(v);
        let Some(p) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().expect("nonzero field element");
        let row: Vec<S> = v.iter().map(|c| c.mul(&inv)).collect();
        // Back-substitute into earlier rows to keep the form reduced.
        for r in &mut self.rows {
            if !r[p].is_zero() {
                let c = r[p].clone();
                for i in 0..self.dim {
                    r[i] = r[i].sub(&c.mul(&row[i]));
                }
            }
        }
        let at = self.pivots.iter().position(|&q| q > p).unwrap_or(self.rows.len());
        self.rows.insert(at, row);
        self.pivots.insert(at, p);
        true
    }

    /// Coordinates of `v` in the echelon basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[S]) -> Option<Vec<S>> {
        let mut v = v.to_vec();
        let mut coords = vec![S::zero(); self.rows.len()];
        for (k, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if !v[p].is_zero() {
                let c = v[p].clone();
                coords[k] = c.clone();
                for i in 0..self.dim {
                    v[i] = v[i].sub(&c.mul(&row[i]));
                }
            }
        }
        if v.iter().all(Scalar::is_zero) {
            Some(coords)
        } else {
            None
        }
    }
}

/// Basis of the kernel `{ x : M x = 0 }` of an `m x n` matrix given by rows.
pub fn kernel<S: Scalar>(rows: &[Vec<S>], n: usize) -> Vec<Vec<S>> {
    let mut ech = Echelon::new(n);
    for r in rows {
        ech.insert(r.clone());
    }
    let mut free_cols: Vec<usize> = (0..n).filter(|c| !ech.pivots.contains(c)).collect();
    free_cols.sort_unstable();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![S::zero(); n];
        v[fc] = S::one();
        for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
            v[p] = row[fc].neg();
        }
        basis.push(v);
    }
    basis
}

/// Solves `M x = b` for a square or rectangular row-matrix `M`, returning one
/// solution if the system is consistent.
pub fn solve<S: Scalar>(rows: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let m = rows.len();
    assert_eq!(b.len(), m);
    let n = if m == 0 { 0 } else { rows[0].len() };
    // Augment and eliminate.
    let mut aug: Vec<Vec<S>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r0 = 0usize;
    for c in 0..n {
        let Some(pr) = (r0..m).find(|&r| !aug[r][c].is_zero()) else {
            continue;
        };
        aug.swap(r0, pr);
        let inv = aug[r0][c].inv().expect("nonzero pivot");
        for i in c..=n {
            aug[r0][i] = aug[r0][i].mul(&inv);
        }
        for r in 0..m {
            if r != r0 && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                for i in c..=n {
                    aug[r][i] = aug[r][i].sub(&f.mul(&aug[r0][i]));
                }
            }
        }
        pivots.push((r0, c));
        r0 += 1;
        if r0 == m {
            break;
        }
    }
    // Inconsistent row?
    for r in r0..m {
        if !aug[r][n].is_zero() {
            return None;
        }
    }
    let mut x = vec![S::zero(); n];
    for &(r, c) in &pivots {
        x[c] = aug[r][n].clone();
    }
    Some(x)
}

/// Rank of a row-matrix.
pub fn rank<S: Scalar>(rows: &[Vec<S>], n: usize) -> usize {
    Echelon::from_vectors(n, rows.iter().cloned()).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, Rational};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn echelon_basics() {
        let mut e = Echelon::new(3);
        assert!(e.insert(v(&[2, 0, 2])));
        assert!(e.insert(v(&[0, 3, 0])));
        assert!(!e.insert(v(&[2, 3, 2])));
        assert_eq!(e.rank(), 2);
        assert!(e.contains(&v(&[4, -6, 4])));
        assert!(!e.contains(&v(&[0, 0, 1])));
        assert_eq!(e.basis()[0], v(&[1, 0, 1]));
        assert_eq!(e.basis()[1], v(&[0, 1, 0]));
    }

    #[test]
    fn kernel_and_solve() {
        let m = vec![v(&[1, 2, 3]), v(&[2, 4, 6])];
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for kv in &k {
            let dot: Rational = (0..3).map(|i| m[0][i].clone() * kv[i].clone()).sum();
            assert_eq!(dot, rat_int(0));
        }
        let x = solve(&m, &v(&[6, 12])).unwrap();
        let dot: Rational = (0..3).map(|i| m[0][i].clone() * x[i].clone()).sum();
        assert_eq!(dot, rat_int(6));
        assert!(solve(&m, &v(&[6, 13])).is_none());
    }

    #[test]
    fn coordinates_roundtrip() {
        let e = Echelon::from_vectors(3, [v(&[1, 1, 0]), v(&[0, 0, 2])]);
        let c = e.coordinates(&v(&[3, 3, 4])).unwrap();
        assert_eq!(c.len(), 2);
        assert!(e.coordinates(&v(&[1, 0, 0])).is_none());
    }
}
