//! Closed-form Riemannian data of the upper half-space: the metric
//! g_ij = delta_ij / x_n^2, its inverse, the Christoffel symbols, the Ricci
//! tensor Ric = -(n-1) g, the constant scalar curvature -n(n-1), and an
//! independent curvature oracle that recontracts the Christoffel symbols
//! with exact jet derivatives.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::jet::Jet2;

/// Smallest admissible last coordinate. Below this the metric entries
/// (which carry 1/x_n^3 in derivatives) overflow the useful float range.
pub const MIN_LAST_COORD: f64 = 1e-12;

/// A location in the upper half-space: n >= 2 finite coordinates with the
/// last one strictly positive. Validity is established at construction, so
/// the geometric operations below cannot fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, Error> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InvalidDimension { n });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint {
                reason: "all coordinates must be finite",
            });
        }
        if coords[n - 1] < MIN_LAST_COORD {
            return Err(Error::InvalidPoint {
                reason: "last coordinate must be at least 1e-12",
            });
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinate by 0-based index.
    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    /// The distinguished last coordinate x_n.
    pub fn last(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// Symmetric n x n tensor stored as the packed upper triangle, so symmetry
/// holds by construction rather than by mirrored writes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor2 {
    pub fn zeros(n: usize) -> Self {
        SymTensor2 {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Diagonal tensor with every diagonal entry equal to `v`.
    pub fn uniform_diag(n: usize, v: f64) -> Self {
        let mut t = SymTensor2::zeros(n);
        for i in 0..n {
            t.set(i, i, v);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(j < self.n);
        // Row i starts after the i earlier rows of lengths n, n-1, ...
        i * (2 * self.n - i + 1) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add_assign(&mut self, other: &SymTensor2) {
        assert_eq!(self.n, other.n, "tensor dimensions must match");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    /// Adds `v` to every diagonal entry.
    pub fn add_diag(&mut self, v: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += v;
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0;
        for &a in &self.data {
            let a = libm::fabs(a);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Frobenius norm of the full (mirrored) matrix.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let a = self.get(i, j);
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * a * a;
            }
        }
        libm::sqrt(s)
    }
}

/// Christoffel symbols Gamma^k_ij at a point, dense n^3 storage, symmetric
/// in (i, j) by construction of the only writer.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    n: usize,
    values: Vec<f64>,
}

impl Christoffels {
    fn zeros(n: usize) -> Self {
        Christoffels {
            n,
            values: vec![0.0; n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn at(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    /// Gamma^k_ij, all indices 0-based.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[self.at(k, i, j)]
    }

    fn set_sym(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let a = self.at(k, i, j);
        self.values[a] = v;
        let b = self.at(k, j, i);
        self.values[b] = v;
    }

    /// The nonzero entries as (k, i, j, value) with i <= j, 0-based.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for k in 0..self.n {
            for i in 0..self.n {
                for j in i..self.n {
                    let v = self.get(k, i, j);
                    if v != 0.0 {
                        out.push((k, i, j, v));
                    }
                }
            }
        }
        out
    }
}

/// g_ij = delta_ij / x_n^2.
pub fn metric_at(p: &Point) -> SymTensor2 {
    let xn = p.last();
    SymTensor2::uniform_diag(p.dim(), 1.0 / (xn * xn))
}

/// g^ij = delta_ij * x_n^2.
pub fn inverse_metric_at(p: &Point) -> SymTensor2 {
    let xn = p.last();
    SymTensor2::uniform_diag(p.dim(), xn * xn)
}

/// The nonzero pattern is exactly: Gamma^n_ij = delta_ij / x_n for i, j < n;
/// Gamma^k_nj = Gamma^k_jn = -delta_jk / x_n for j < n; Gamma^n_nn = -1/x_n.
/// Depends on the point only through x_n.
pub fn christoffels_at(p: &Point) -> Christoffels {
    let n = p.dim();
    let inv = 1.0 / p.last();
    let mut g = Christoffels::zeros(n);
    for i in 0..n - 1 {
        g.set_sym(n - 1, i, i, inv);
        g.set_sym(i, n - 1, i, -inv);
    }
    g.set_sym(n - 1, n - 1, n - 1, -inv);
    g
}

/// Ric = -(n-1) g, entrywise from the same closed form as `metric_at`.
pub fn ricci_at(p: &Point) -> SymTensor2 {
    let mut ric = metric_at(p);
    ric.scale(-((p.dim() - 1) as f64));
    ric
}

/// S = -n(n-1), independent of the point.
pub fn scalar_curvature(n: usize) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    Ok(-((n * (n - 1)) as f64))
}

/// Independent curvature oracle: contracts
/// Ric_ij = d_k Gamma^k_ij - d_i Gamma^k_kj
///        + Gamma^k_kl Gamma^l_ij - Gamma^k_il Gamma^l_kj
/// with the partial derivatives taken by exact jet arithmetic on the
/// closed-form symbols (each nonzero symbol is +-1/x_n as a jet).
pub fn ricci_from_christoffels(p: &Point) -> SymTensor2 {
    let n = p.dim();
    let one = Jet2::constant(n, 1.0);
    let xn = Jet2::coordinate(p, n - 1);
    let inv = one.div(&xn).expect("x_n is strictly positive");
    let neg = inv.neg();
    let zero = Jet2::constant(n, 0.0);

    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let mut gam = vec![zero; n * n * n];
    for i in 0..n - 1 {
        gam[at(n - 1, i, i)] = inv.clone();
        gam[at(i, n - 1, i)] = neg.clone();
        gam[at(i, i, n - 1)] = neg.clone();
    }
    gam[at(n - 1, n - 1, n - 1)] = neg;

    let mut ric = SymTensor2::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut sum = 0.0;
            for k in 0..n {
                sum += gam[at(k, i, j)].grad()[k];
                sum -= gam[at(k, k, j)].grad()[i];
                for l in 0..n {
                    sum += gam[at(k, k, l)].value() * gam[at(l, i, j)].value();
                    sum -= gam[at(k, i, l)].value() * gam[at(l, k, j)].value();
                }
            }
            ric.set(i, j, sum);
        }
    }
    ric
}
