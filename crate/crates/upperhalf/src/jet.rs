//! Order-2 forward jets: value, gradient, and Hessian of a scalar function,
//! propagated exactly through arithmetic by the Leibniz and chain rules, plus
//! an independent central-finite-difference oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::{Point, SymTensor2};

/// Order-2 Taylor data of a scalar function at a point. The Hessian is
/// packed-symmetric, so produced jets are symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: SymTensor2,
}

impl Jet2 {
    /// Jet of the constant function `v` in dimension `n`.
    pub fn constant(n: usize, v: f64) -> Self {
        Jet2 {
            value: v,
            grad: vec![0.0; n],
            hess: SymTensor2::zeros(n),
        }
    }

    /// Jet of the coordinate function x_i (0-based) at `p`: value p_i,
    /// gradient e_i, Hessian zero.
    pub fn coordinate(p: &Point, i: usize) -> Self {
        assert!(i < p.dim(), "coordinate index out of range");
        let mut grad = vec![0.0; p.dim()];
        grad[i] = 1.0;
        Jet2 {
            value: p.coord(i),
            grad,
            hess: SymTensor2::zeros(p.dim()),
        }
    }

    /// Assembles a jet from precomputed parts. Lengths must agree.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: SymTensor2) -> Self {
        assert_eq!(grad.len(), hess.n(), "gradient and Hessian dimensions must match");
        Jet2 { value, grad, hess }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self) -> &SymTensor2 {
        &self.hess
    }

    /// Second partial d^2 f / dx_i dx_j.
    pub fn second(&self, i: usize, j: usize) -> f64 {
        self.hess.get(i, j)
    }

    fn check_dim(&self, rhs: &Jet2) {
        assert_eq!(self.dim(), rhs.dim(), "jet dimensions must match");
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        self.check_dim(rhs);
        let n = self.dim();
        let mut out = self.clone();
        out.value += rhs.value;
        for i in 0..n {
            out.grad[i] += rhs.grad[i];
        }
        out.hess.add_assign(&rhs.hess);
        out
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        self.check_dim(rhs);
        let n = self.dim();
        let mut out = self.clone();
        out.value -= rhs.value;
        for i in 0..n {
            out.grad[i] -= rhs.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                out.hess.set(i, j, out.hess.get(i, j) - rhs.hess.get(i, j));
            }
        }
        out
    }

    pub fn neg(&self) -> Jet2 {
        let n = self.dim();
        let mut out = self.clone();
        out.value = -out.value;
        for g in out.grad.iter_mut() {
            *g = -*g;
        }
        for i in 0..n {
            for j in i..n {
                out.hess.set(i, j, -out.hess.get(i, j));
            }
        }
        out
    }

    /// Product rule to order 2:
    /// (fg)'' = f'' g + f' g' + g' f' + f g''.
    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        self.check_dim(rhs);
        let n = self.dim();
        let mut hess = SymTensor2::zeros(n);
        for i in 0..n {
            for j in i..n {
                hess.set(
                    i,
                    j,
                    self.hess.get(i, j) * rhs.value
                        + self.grad[i] * rhs.grad[j]
                        + self.grad[j] * rhs.grad[i]
                        + self.value * rhs.hess.get(i, j),
                );
            }
        }
        let mut grad = vec![0.0; n];
        for i in 0..n {
            grad[i] = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        Jet2 {
            value: self.value * rhs.value,
            grad,
            hess,
        }
    }

    /// Quotient rule to order 2. Fails when the divisor's value is zero.
    pub fn div(&self, rhs: &Jet2) -> Result<Jet2, Error> {
        self.check_dim(rhs);
        if rhs.value == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.dim();
        let value = self.value / rhs.value;
        let mut grad = vec![0.0; n];
        for i in 0..n {
            grad[i] = (self.grad[i] - value * rhs.grad[i]) / rhs.value;
        }
        let mut hess = SymTensor2::zeros(n);
        for i in 0..n {
            for j in i..n {
                let h = (self.hess.get(i, j)
                    - value * rhs.hess.get(i, j)
                    - grad[i] * rhs.grad[j]
                    - grad[j] * rhs.grad[i])
                    / rhs.value;
                hess.set(i, j, h);
            }
        }
        Ok(Jet2 { value, grad, hess })
    }

    /// Integer power by repeated squaring, so polynomial jets stay exact up
    /// to roundoff. Negative exponents go through one reciprocal and require
    /// a nonzero value.
    pub fn powi(&self, exp: i32) -> Result<Jet2, Error> {
        let n = self.dim();
        if exp == 0 {
            return Ok(Jet2::constant(n, 1.0));
        }
        if exp < 0 && self.value == 0.0 {
            return Err(Error::OutOfDomain {
                function: "negative integer power",
                value: 0.0,
            });
        }
        let mut e = exp.unsigned_abs();
        let mut base = self.clone();
        let mut acc: Option<Jet2> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        let pos = acc.expect("exponent is nonzero");
        if exp < 0 {
            Jet2::constant(n, 1.0).div(&pos)
        } else {
            Ok(pos)
        }
    }

    /// Chain rule to order 2: hess_out = f''(v) grad (x) grad + f'(v) hess.
    fn compose(&self, value: f64, d1: f64, d2: f64) -> Jet2 {
        let n = self.dim();
        let mut grad = vec![0.0; n];
        for i in 0..n {
            grad[i] = d1 * self.grad[i];
        }
        let mut hess = SymTensor2::zeros(n);
        for i in 0..n {
            for j in i..n {
                hess.set(i, j, d2 * self.grad[i] * self.grad[j] + d1 * self.hess.get(i, j));
            }
        }
        Jet2 { value, grad, hess }
    }

    pub fn exp(&self) -> Jet2 {
        let e = libm::exp(self.value);
        self.compose(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet2, Error> {
        if self.value <= 0.0 {
            return Err(Error::OutOfDomain {
                function: "log",
                value: self.value,
            });
        }
        let d1 = 1.0 / self.value;
        Ok(self.compose(libm::log(self.value), d1, -d1 * d1))
    }

    pub fn sin(&self) -> Jet2 {
        let s = libm::sin(self.value);
        self.compose(s, libm::cos(self.value), -s)
    }

    pub fn cos(&self) -> Jet2 {
        let c = libm::cos(self.value);
        self.compose(c, -libm::sin(self.value), -c)
    }

    pub fn sqrt(&self) -> Result<Jet2, Error> {
        if self.value <= 0.0 {
            return Err(Error::OutOfDomain {
                function: "sqrt",
                value: self.value,
            });
        }
        let s = libm::sqrt(self.value);
        let d1 = 0.5 / s;
        Ok(self.compose(s, d1, -0.25 / (s * self.value)))
    }
}

/// Scalar integer power with the same traversal as `Jet2::powi`, so an
/// expression evaluated as plain values and as jets produces bit-identical
/// value slots.
pub(crate) fn powi_value(x: f64, exp: i32) -> Result<f64, Error> {
    if exp == 0 {
        return Ok(1.0);
    }
    if exp < 0 && x == 0.0 {
        return Err(Error::OutOfDomain {
            function: "negative integer power",
            value: 0.0,
        });
    }
    let mut e = exp.unsigned_abs();
    let mut base = x;
    let mut acc: Option<f64> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base,
                Some(a) => a * base,
            });
        }
        e >>= 1;
        if e > 0 {
            base *= base;
        }
    }
    let pos = acc.expect("exponent is nonzero");
    if exp < 0 {
        if pos == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / pos)
    } else {
        Ok(pos)
    }
}

/// Central-difference oracle for gradients and Hessians: 2-point gradient,
/// 3-point diagonal, and 4-point off-diagonal stencils. The step is clamped
/// to x_n / 4 so the double perturbation keeps x_n - 2h >= x_n / 2 and every
/// probe stays inside the half-space.
pub fn fd_derivatives<F>(f: F, p: &Point, h: f64) -> Result<Jet2, Error>
where
    F: Fn(&Point) -> Result<f64, Error>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep { value: h });
    }
    let n = p.dim();
    let h = if h > p.last() / 4.0 { p.last() / 4.0 } else { h };

    let probe = |deltas: &[(usize, f64)]| -> Result<f64, Error> {
        let mut coords = p.coords().to_vec();
        for &(i, d) in deltas {
            coords[i] += d;
        }
        f(&Point::new(coords)?)
    };

    let value = f(p)?;
    let mut grad = vec![0.0; n];
    let mut hess = SymTensor2::zeros(n);
    for i in 0..n {
        let fp = probe(&[(i, h)])?;
        let fm = probe(&[(i, -h)])?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess.set(i, i, (fp - 2.0 * value + fm) / (h * h));
    }
    for i in 0..n {
        for j in i + 1..n {
            let pp = probe(&[(i, h), (j, h)])?;
            let pm = probe(&[(i, h), (j, -h)])?;
            let mp = probe(&[(i, -h), (j, h)])?;
            let mm = probe(&[(i, -h), (j, -h)])?;
            hess.set(i, j, (pp - pm - mp + mm) / (4.0 * h * h));
        }
    }
    Ok(Jet2::from_parts(value, grad, hess))
}
