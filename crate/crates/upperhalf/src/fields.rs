//! Closed-form solution families: Killing fields on the hyperbolic plane and
//! its higher-dimensional analogue, gradient potentials with their exact
//! jets, and conformal factors derived from a potential.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::Expr;
use crate::geometry::{Point, SymTensor2};
use crate::jet::Jet2;

/// Parameters of the potential family
///
/// ```text
/// F(x) = (1/xn) * (sum_{i<n} (a/2 xi^2 + bi xi) + c) + (a/2) xn + e
/// ```
///
/// The dimension is `b.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialParams {
    a: f64,
    b: Vec<f64>,
    c: f64,
    e: f64,
}

impl PotentialParams {
    pub fn new(a: f64, b: Vec<f64>, c: f64, e: f64) -> Result<Self, Error> {
        if b.is_empty() {
            return Err(Error::InvalidDimension { n: 1 });
        }
        if !a.is_finite() || !c.is_finite() || !e.is_finite() || b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "potential parameters",
            });
        }
        Ok(PotentialParams { a, b, c, e })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    fn check_dim(&self, p: &Point) -> Result<(), Error> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }

    /// Q(x) = sum_{i<n} (a/2 xi^2 + bi xi) + c, the part of F carried by 1/xn.
    fn horizontal_part(&self, p: &Point) -> f64 {
        let mut q = self.c;
        for (i, &bi) in self.b.iter().enumerate() {
            let xi = p.coord(i);
            q += 0.5 * self.a * xi * xi + bi * xi;
        }
        q
    }
}

/// A vector field given by one of the closed-form families or by raw
/// expression components. Components are contravariant.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorFieldSpec {
    /// Planar Killing family M = (a/2)(x^2 - y^2) + bx + c, N = axy + by.
    Killing2D { a: f64, b: f64, c: f64 },
    /// n-dimensional Killing family; `a` and `c` have length n-1.
    KillingND { a: Vec<f64>, b: f64, c: Vec<f64> },
    /// Metric gradient of the potential family.
    GradientOfPotential(PotentialParams),
    /// Constant coefficient vector.
    Constant(Vec<f64>),
    /// One expression per component.
    Custom(Vec<Expr>),
}

impl VectorFieldSpec {
    pub fn killing_2d(a: f64, b: f64, c: f64) -> Result<Self, Error> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::NonFinite {
                context: "Killing field coefficients",
            });
        }
        Ok(VectorFieldSpec::Killing2D { a, b, c })
    }

    pub fn killing_nd(n: usize, a: Vec<f64>, b: f64, c: Vec<f64>) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::InvalidDimension { n });
        }
        if a.len() != n - 1 {
            return Err(Error::LengthMismatch {
                what: "Killing coefficient array a",
                expected: n - 1,
                found: a.len(),
            });
        }
        if c.len() != n - 1 {
            return Err(Error::LengthMismatch {
                what: "Killing coefficient array c",
                expected: n - 1,
                found: c.len(),
            });
        }
        if !b.is_finite()
            || a.iter().any(|x| !x.is_finite())
            || c.iter().any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite {
                context: "Killing field coefficients",
            });
        }
        Ok(VectorFieldSpec::KillingND { a, b, c })
    }

    pub fn constant(v: Vec<f64>) -> Result<Self, Error> {
        if v.len() < 2 {
            return Err(Error::InvalidDimension { n: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "constant field components",
            });
        }
        Ok(VectorFieldSpec::Constant(v))
    }

    pub fn gradient_of(params: PotentialParams) -> Self {
        VectorFieldSpec::GradientOfPotential(params)
    }

    /// Components must already be parsed against the intended dimension;
    /// any coordinate index past `components.len()` is rejected here.
    pub fn custom(components: Vec<Expr>) -> Result<Self, Error> {
        let n = components.len();
        if n < 2 {
            return Err(Error::InvalidDimension { n });
        }
        for comp in &components {
            let need = comp.max_coord();
            if need > n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: need,
                });
            }
        }
        Ok(VectorFieldSpec::Custom(components))
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorFieldSpec::Killing2D { .. } => 2,
            VectorFieldSpec::KillingND { a, .. } => a.len() + 1,
            VectorFieldSpec::GradientOfPotential(params) => params.dim(),
            VectorFieldSpec::Constant(v) => v.len(),
            VectorFieldSpec::Custom(comps) => comps.len(),
        }
    }

    fn check_dim(&self, p: &Point) -> Result<(), Error> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }
}

/// F(p) for the potential family.
pub fn potential_value(params: &PotentialParams, p: &Point) -> Result<f64, Error> {
    params.check_dim(p)?;
    let xn = p.last();
    Ok(params.horizontal_part(p) / xn + 0.5 * params.a * xn + params.e)
}

/// Exact order-2 jet of F. All derivatives come from the closed form, so no
/// truncation error enters downstream residuals.
pub fn potential_jet_at(params: &PotentialParams, p: &Point) -> Result<Jet2, Error> {
    params.check_dim(p)?;
    let n = p.dim();
    let xn = p.last();
    let q = params.horizontal_part(p);
    let a = params.a;

    let value = q / xn + 0.5 * a * xn + params.e;
    let mut grad = vec![0.0; n];
    let mut hess = SymTensor2::zeros(n);
    for i in 0..n - 1 {
        let slope = a * p.coord(i) + params.b[i];
        grad[i] = slope / xn;
        hess.set(i, i, a / xn);
        hess.set(i, n - 1, -slope / (xn * xn));
    }
    grad[n - 1] = -q / (xn * xn) + 0.5 * a;
    hess.set(n - 1, n - 1, 2.0 * q / (xn * xn * xn));
    Ok(Jet2::from_parts(value, grad, hess))
}

/// The metric gradient of F: component i is xn^2 times the coordinate
/// partial of F. For the potential family this is polynomial,
///
/// ```text
/// Xi = (a xi + bi) xn   (i < n),    Xn = (a/2) xn^2 - Q.
/// ```
pub fn gradient_field_at(params: &PotentialParams, p: &Point) -> Result<Vec<f64>, Error> {
    params.check_dim(p)?;
    let n = p.dim();
    let xn = p.last();
    let mut v = vec![0.0; n];
    for i in 0..n - 1 {
        v[i] = (params.a * p.coord(i) + params.b[i]) * xn;
    }
    v[n - 1] = 0.5 * params.a * xn * xn - params.horizontal_part(p);
    Ok(v)
}

/// Component values of a field at a point.
pub fn field_value_at(field: &VectorFieldSpec, p: &Point) -> Result<Vec<f64>, Error> {
    field.check_dim(p)?;
    match field {
        VectorFieldSpec::Killing2D { a, b, c } => {
            let (x, y) = (p.coord(0), p.coord(1));
            Ok(vec![
                0.5 * a * (x * x - y * y) + b * x + c,
                a * x * y + b * y,
            ])
        }
        VectorFieldSpec::KillingND { a, b, c } => {
            let n = p.dim();
            let s: f64 = (0..n - 1).map(|i| a[i] * p.coord(i)).sum();
            let sq: f64 = (0..n).map(|j| p.coord(j) * p.coord(j)).sum();
            let mut v = vec![0.0; n];
            for k in 0..n - 1 {
                let xk = p.coord(k);
                v[k] = 0.5 * a[k] * (2.0 * xk * xk - sq) + (s - a[k] * xk + b) * xk + c[k];
            }
            v[n - 1] = (s + b) * p.last();
            Ok(v)
        }
        VectorFieldSpec::GradientOfPotential(params) => gradient_field_at(params, p),
        VectorFieldSpec::Constant(v) => Ok(v.clone()),
        VectorFieldSpec::Custom(comps) => {
            comps.iter().map(|e| e.eval_scalar(p)).collect()
        }
    }
}

/// Order-2 jets of every component. The closed-form families differentiate
/// exactly; `Custom` goes through expression jet evaluation.
pub fn field_jet_at(field: &VectorFieldSpec, p: &Point) -> Result<Vec<Jet2>, Error> {
    field.check_dim(p)?;
    let n = p.dim();
    match field {
        VectorFieldSpec::Killing2D { a, b, c } => {
            let (x, y) = (p.coord(0), p.coord(1));
            let mut h1 = SymTensor2::zeros(2);
            h1.set(0, 0, *a);
            h1.set(1, 1, -*a);
            let j1 = Jet2::from_parts(
                0.5 * a * (x * x - y * y) + b * x + c,
                vec![a * x + b, -a * y],
                h1,
            );
            let mut h2 = SymTensor2::zeros(2);
            h2.set(0, 1, *a);
            let j2 = Jet2::from_parts(a * x * y + b * y, vec![a * y, a * x + b], h2);
            Ok(vec![j1, j2])
        }
        VectorFieldSpec::KillingND { a, b, c } => {
            let s: f64 = (0..n - 1).map(|i| a[i] * p.coord(i)).sum();
            let sq: f64 = (0..n).map(|j| p.coord(j) * p.coord(j)).sum();
            let mut jets = Vec::with_capacity(n);
            for k in 0..n - 1 {
                let xk = p.coord(k);
                let inner = s - a[k] * xk + b;
                let value = 0.5 * a[k] * (2.0 * xk * xk - sq) + inner * xk + c[k];
                let mut grad = vec![0.0; n];
                let mut hess = SymTensor2::zeros(n);
                for j in 0..n {
                    if j == k {
                        grad[j] = a[k] * xk + inner;
                        hess.set(k, k, a[k]);
                    } else {
                        let aj = if j < n - 1 { a[j] } else { 0.0 };
                        grad[j] = -a[k] * p.coord(j) + aj * xk;
                        hess.set(j, j, -a[k]);
                        if j < n - 1 {
                            hess.set(k, j, aj);
                        }
                    }
                }
                jets.push(Jet2::from_parts(value, grad, hess));
            }
            let xn = p.last();
            let mut grad = vec![0.0; n];
            let mut hess = SymTensor2::zeros(n);
            for j in 0..n - 1 {
                grad[j] = a[j] * xn;
                hess.set(j, n - 1, a[j]);
            }
            grad[n - 1] = s + b;
            jets.push(Jet2::from_parts((s + b) * xn, grad, hess));
            Ok(jets)
        }
        VectorFieldSpec::GradientOfPotential(params) => {
            let xn = p.last();
            let a = params.a;
            let mut jets = Vec::with_capacity(n);
            for i in 0..n - 1 {
                let slope = a * p.coord(i) + params.b[i];
                let mut grad = vec![0.0; n];
                grad[i] = a * xn;
                grad[n - 1] = slope;
                let mut hess = SymTensor2::zeros(n);
                hess.set(i, n - 1, a);
                jets.push(Jet2::from_parts(slope * xn, grad, hess));
            }
            let mut grad = vec![0.0; n];
            let mut hess = SymTensor2::zeros(n);
            for j in 0..n - 1 {
                grad[j] = -(a * p.coord(j) + params.b[j]);
                hess.set(j, j, -a);
            }
            grad[n - 1] = a * xn;
            hess.set(n - 1, n - 1, a);
            jets.push(Jet2::from_parts(
                0.5 * a * xn * xn - params.horizontal_part(p),
                grad,
                hess,
            ));
            Ok(jets)
        }
        VectorFieldSpec::Constant(v) => Ok(v
            .iter()
            .map(|&value| Jet2::constant(n, value))
            .collect()),
        VectorFieldSpec::Custom(comps) => comps.iter().map(|e| e.eval_jet(p)).collect(),
    }
}

/// Outcome of the zero-free test on P(x) = (a/2) xn^2 + Q(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroFreeVerdict {
    ZeroFree,
    HasZero,
    /// P is identically zero (a = 0, b = 0, c = 0).
    DegenerateZeroPolynomial,
}

/// Analytic zero-free decision for P over the open upper half-space.
///
/// Completing the square, P = (a/2) sum_i (xi + bi/a)^2 + (a/2) xn^2 +
/// c - sum_i bi^2/(2a) for a != 0; the infimum over xn > 0 is attained only
/// as xn -> 0, so the boundary equality case still counts as zero-free.
pub fn zero_free_check(params: &PotentialParams) -> ZeroFreeVerdict {
    let a = params.a;
    let c = params.c;
    if a == 0.0 {
        if params.b.iter().all(|&bi| bi == 0.0) {
            if c == 0.0 {
                ZeroFreeVerdict::DegenerateZeroPolynomial
            } else {
                ZeroFreeVerdict::ZeroFree
            }
        } else {
            // A nonzero linear term always crosses zero along its axis.
            ZeroFreeVerdict::HasZero
        }
    } else {
        let threshold: f64 = params.b.iter().map(|&bi| bi * bi).sum::<f64>() / (2.0 * a);
        let zero_free = if a > 0.0 { c >= threshold } else { c <= threshold };
        if zero_free {
            ZeroFreeVerdict::ZeroFree
        } else {
            ZeroFreeVerdict::HasZero
        }
    }
}

/// The lambda at which the derived conformal factor degenerates:
/// -(n-1)(1-n rho). At this value the factor is unconstrained.
pub fn degenerate_lambda(n: usize, rho: f64) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    Ok(-((n - 1) as f64) * (1.0 - n as f64 * rho))
}

/// P(p), the denominator of the derived conformal factor.
pub fn conformal_denominator(params: &PotentialParams, p: &Point) -> Result<f64, Error> {
    params.check_dim(p)?;
    let xn = p.last();
    Ok(0.5 * params.a * xn * xn + params.horizontal_part(p))
}

/// Conformal factor G multiplying the Lie-derivative or Hessian term.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalFactorSpec {
    /// G = 1 everywhere.
    Unit,
    /// G(p) = (lambda + (n-1)(1-n rho)) xn / P(p).
    DerivedFromPotential {
        params: PotentialParams,
        lambda: f64,
        rho: f64,
    },
    /// Arbitrary expression; the caller is responsible for nonvanishing.
    Custom(Expr),
}

impl ConformalFactorSpec {
    pub fn value_at(&self, p: &Point) -> Result<f64, Error> {
        match self {
            ConformalFactorSpec::Unit => Ok(1.0),
            ConformalFactorSpec::DerivedFromPotential {
                params,
                lambda,
                rho,
            } => {
                let n = params.dim();
                params.check_dim(p)?;
                let denom = conformal_denominator(params, p)?;
                if denom == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                let coeff = lambda + ((n - 1) as f64) * (1.0 - n as f64 * rho);
                Ok(coeff * p.last() / denom)
            }
            ConformalFactorSpec::Custom(expr) => expr.eval_scalar(p),
        }
    }
}

/// Builds the derived conformal factor, enforcing the zero-free condition on
/// P and rejecting the degenerate lambda where the factor is unconstrained.
pub fn derived_conformal_factor(
    params: PotentialParams,
    lambda: f64,
    rho: f64,
) -> Result<ConformalFactorSpec, Error> {
    if !lambda.is_finite() || !rho.is_finite() {
        return Err(Error::NonFinite {
            context: "conformal factor parameters",
        });
    }
    match zero_free_check(&params) {
        ZeroFreeVerdict::ZeroFree => {}
        ZeroFreeVerdict::HasZero => return Err(Error::PotentialHasZero),
        ZeroFreeVerdict::DegenerateZeroPolynomial => {
            return Err(Error::PotentialIdenticallyZero)
        }
    }
    let n = params.dim();
    if lambda == degenerate_lambda(n, rho)? {
        return Err(Error::DegenerateLambda { lambda });
    }
    Ok(ConformalFactorSpec::DerivedFromPotential {
        params,
        lambda,
        rho,
    })
}
