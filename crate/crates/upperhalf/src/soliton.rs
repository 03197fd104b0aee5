//! Differential operators on the upper half-space model (Lie derivative of
//! the metric, covariant Hessian, flat Laplacian of components) and the
//! residual operators for the four soliton equations, plus grid evaluation
//! with deterministic reporting.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::Expr;
use crate::fields::{
    potential_jet_at, ConformalFactorSpec, PotentialParams, VectorFieldSpec,
};
use crate::geometry::{christoffels_at, ricci_at, scalar_curvature, Point, SymTensor2};
use crate::jet::Jet2;

/// Which defining equation a problem certifies against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonKind {
    /// Ric + (1/2) L_X g = lambda g
    Ricci,
    /// Ric + (1/2) L_X g = (lambda + rho S) g
    RicciBourguignon,
    /// Ric + (G/2) L_X g = (lambda + rho S) g
    GRicciBourguignon,
    /// Ric + G Hess F = (lambda + rho S) g
    GradientGRB,
}

/// A fully specified soliton verification problem.
///
/// Exactly one of `field` and `potential` is set: the first three kinds carry
/// a vector field, the gradient kind carries a potential. `rho` is 0 for the
/// plain Ricci kind and `conformal` is `Unit` unless the kind involves G.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProblem {
    kind: SolitonKind,
    dim: usize,
    lambda: f64,
    rho: f64,
    field: Option<VectorFieldSpec>,
    potential: Option<PotentialParams>,
    conformal: ConformalFactorSpec,
}

fn check_scalars(lambda: f64, rho: f64) -> Result<(), Error> {
    if !lambda.is_finite() || !rho.is_finite() {
        return Err(Error::NonFinite {
            context: "soliton coefficients",
        });
    }
    Ok(())
}

fn check_custom_factor(g: &ConformalFactorSpec, dim: usize) -> Result<(), Error> {
    if let ConformalFactorSpec::Custom(expr) = g {
        let need = expr.max_coord();
        if need > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: need,
            });
        }
    }
    Ok(())
}

impl SolitonProblem {
    pub fn ricci(field: VectorFieldSpec, lambda: f64) -> Result<Self, Error> {
        check_scalars(lambda, 0.0)?;
        Ok(SolitonProblem {
            kind: SolitonKind::Ricci,
            dim: field.dim(),
            lambda,
            rho: 0.0,
            field: Some(field),
            potential: None,
            conformal: ConformalFactorSpec::Unit,
        })
    }

    pub fn ricci_bourguignon(
        field: VectorFieldSpec,
        lambda: f64,
        rho: f64,
    ) -> Result<Self, Error> {
        check_scalars(lambda, rho)?;
        Ok(SolitonProblem {
            kind: SolitonKind::RicciBourguignon,
            dim: field.dim(),
            lambda,
            rho,
            field: Some(field),
            potential: None,
            conformal: ConformalFactorSpec::Unit,
        })
    }

    pub fn g_ricci_bourguignon(
        field: VectorFieldSpec,
        lambda: f64,
        rho: f64,
        conformal: ConformalFactorSpec,
    ) -> Result<Self, Error> {
        check_scalars(lambda, rho)?;
        let dim = field.dim();
        check_custom_factor(&conformal, dim)?;
        Ok(SolitonProblem {
            kind: SolitonKind::GRicciBourguignon,
            dim,
            lambda,
            rho,
            field: Some(field),
            potential: None,
            conformal,
        })
    }

    pub fn gradient_grb(
        potential: PotentialParams,
        lambda: f64,
        rho: f64,
        conformal: ConformalFactorSpec,
    ) -> Result<Self, Error> {
        check_scalars(lambda, rho)?;
        let dim = potential.dim();
        check_custom_factor(&conformal, dim)?;
        Ok(SolitonProblem {
            kind: SolitonKind::GradientGRB,
            dim,
            lambda,
            rho,
            field: Some(VectorFieldSpec::gradient_of(potential.clone())),
            potential: Some(potential),
            conformal,
        })
    }

    pub fn kind(&self) -> SolitonKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn field(&self) -> Option<&VectorFieldSpec> {
        self.field.as_ref()
    }

    pub fn potential(&self) -> Option<&PotentialParams> {
        self.potential.as_ref()
    }

    pub fn conformal(&self) -> &ConformalFactorSpec {
        &self.conformal
    }

    /// lambda + rho S for the kinds that subtract the scalar-curvature
    /// multiple; plain lambda for the Ricci kind.
    fn effective_lambda(&self) -> Result<f64, Error> {
        match self.kind {
            SolitonKind::Ricci => Ok(self.lambda),
            _ => Ok(self.lambda + self.rho * scalar_curvature(self.dim)?),
        }
    }
}

/// Lie derivative of the hyperbolic metric along X, assembled from component
/// jets:
///
/// ```text
/// (L_X g)_ii = (2/xn^2) (d_i X_i - X_n / xn)
/// (L_X g)_ij = (d_j X_i + d_i X_j) / xn^2          (i != j)
/// ```
pub fn lie_derivative_metric(field: &VectorFieldSpec, p: &Point) -> Result<SymTensor2, Error> {
    let jets = crate::fields::field_jet_at(field, p)?;
    let n = p.dim();
    let xn = p.last();
    let inv2 = 1.0 / (xn * xn);
    let last_over = jets[n - 1].value() / xn;
    let mut out = SymTensor2::zeros(n);
    for i in 0..n {
        out.set(i, i, 2.0 * inv2 * (jets[i].grad()[i] - last_over));
        for j in i + 1..n {
            out.set(i, j, (jets[i].grad()[j] + jets[j].grad()[i]) * inv2);
        }
    }
    Ok(out)
}

/// Covariant Hessian of a scalar from its jet, using the closed form of the
/// hyperbolic Christoffel symbols:
///
/// ```text
/// i, j < n:  d2F_ij - delta_ij (1/xn) dnF
/// i < n:     d2F_in + (1/xn) diF
/// n, n:      d2F_nn + (1/xn) dnF
/// ```
pub fn covariant_hessian_from_jet(jet: &Jet2, p: &Point) -> SymTensor2 {
    let n = p.dim();
    debug_assert_eq!(jet.dim(), n);
    let inv = 1.0 / p.last();
    let dn = jet.grad()[n - 1];
    let mut out = SymTensor2::zeros(n);
    for i in 0..n - 1 {
        out.set(i, i, jet.second(i, i) - inv * dn);
        for j in i + 1..n - 1 {
            out.set(i, j, jet.second(i, j));
        }
        out.set(i, n - 1, jet.second(i, n - 1) + inv * jet.grad()[i]);
    }
    out.set(n - 1, n - 1, jet.second(n - 1, n - 1) + inv * dn);
    out
}

/// Same Hessian through the generic formula d2F_ij - Gamma^k_ij dkF with the
/// Christoffel table. Kept as an independent route for consistency tests.
pub fn covariant_hessian_via_christoffels(jet: &Jet2, p: &Point) -> SymTensor2 {
    let n = p.dim();
    let gamma = christoffels_at(p);
    let mut out = SymTensor2::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut v = jet.second(i, j);
            for k in 0..n {
                v -= gamma.get(k, i, j) * jet.grad()[k];
            }
            out.set(i, j, v);
        }
    }
    out
}

/// Covariant Hessian of the closed-form potential.
pub fn hessian_of_potential(params: &PotentialParams, p: &Point) -> Result<SymTensor2, Error> {
    let jet = potential_jet_at(params, p)?;
    Ok(covariant_hessian_from_jet(&jet, p))
}

/// Covariant Hessian of an arbitrary expression.
pub fn hessian_of_expression(expr: &Expr, p: &Point) -> Result<SymTensor2, Error> {
    let jet = expr.eval_jet(p)?;
    Ok(covariant_hessian_from_jet(&jet, p))
}

/// Flat Laplacian sum_i d2 X_k / d xi^2 of one field component.
pub fn euclidean_laplacian_component(
    field: &VectorFieldSpec,
    k: usize,
    p: &Point,
) -> Result<f64, Error> {
    let n = p.dim();
    if k >= n {
        return Err(Error::LengthMismatch {
            what: "component index",
            expected: n,
            found: k,
        });
    }
    let jets = crate::fields::field_jet_at(field, p)?;
    Ok((0..n).map(|i| jets[k].second(i, i)).sum())
}

/// Residual of the problem's defining equation at one point, as LHS - RHS.
pub fn soliton_residual(prob: &SolitonProblem, p: &Point) -> Result<SymTensor2, Error> {
    if p.dim() != prob.dim {
        return Err(Error::DimensionMismatch {
            expected: prob.dim,
            found: p.dim(),
        });
    }
    let xn = p.last();
    let mut res = ricci_at(p);
    match prob.kind {
        SolitonKind::Ricci | SolitonKind::RicciBourguignon => {
            let lie = lie_derivative_metric(prob.field.as_ref().unwrap(), p)?;
            let mut half = lie;
            half.scale(0.5);
            res.add_assign(&half);
        }
        SolitonKind::GRicciBourguignon => {
            let g = prob.conformal.value_at(p)?;
            let mut lie = lie_derivative_metric(prob.field.as_ref().unwrap(), p)?;
            lie.scale(0.5 * g);
            res.add_assign(&lie);
        }
        SolitonKind::GradientGRB => {
            let g = prob.conformal.value_at(p)?;
            let mut hess = hessian_of_potential(prob.potential.as_ref().unwrap(), p)?;
            hess.scale(g);
            res.add_assign(&hess);
        }
    }
    // Subtracting (lambda + rho S) g shifts only the diagonal, by that
    // coefficient over xn^2.
    let eff = prob.effective_lambda()?;
    res.add_diag(-eff / (xn * xn));
    Ok(res)
}

/// The lambda making a Ricci problem equivalent to an RB problem with
/// coefficients (lambda, rho): lambda + rho S = lambda - n(n-1) rho.
pub fn rb_to_ricci_lambda(lambda: f64, rho: f64, n: usize) -> Result<f64, Error> {
    Ok(lambda + rho * scalar_curvature(n)?)
}

/// The unique lambda at which the G-RB equation is solved by Killing fields:
/// (1-n)(1-n rho).
pub fn killing_lambda_grb(n: usize, rho: f64) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    Ok((1.0 - n as f64) * (1.0 - n as f64 * rho))
}

/// Max-abs entry and Frobenius norm of the residual at one point.
pub fn residual_stats(prob: &SolitonProblem, p: &Point) -> Result<(f64, f64), Error> {
    let r = soliton_residual(prob, p)?;
    Ok((r.max_abs(), r.frobenius()))
}

/// Default lower bound enforced on the last-coordinate axis of a grid.
pub const DEFAULT_GRID_FLOOR: f64 = 0.05;

/// One closed sampling interval with its sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// A rectangular evaluation grid. The last axis is bounded away from the
/// boundary xn = 0 by a positive floor.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<AxisSpec>,
    floor: f64,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self, Error> {
        Self::with_floor(axes, DEFAULT_GRID_FLOOR)
    }

    pub fn with_floor(axes: Vec<AxisSpec>, floor: f64) -> Result<Self, Error> {
        if axes.len() < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 2 axes, got {}", axes.len()),
            });
        }
        if !(floor.is_finite() && floor > 0.0) {
            return Err(Error::InvalidGrid {
                reason: format!("grid floor must be positive and finite, got {floor}"),
            });
        }
        for (i, ax) in axes.iter().enumerate() {
            if !(ax.min.is_finite() && ax.max.is_finite()) {
                return Err(Error::InvalidGrid {
                    reason: format!("axis {} bounds must be finite", i + 1),
                });
            }
            if ax.min > ax.max {
                return Err(Error::InvalidGrid {
                    reason: format!("axis {}: min {} exceeds max {}", i + 1, ax.min, ax.max),
                });
            }
            if ax.count == 0 {
                return Err(Error::InvalidGrid {
                    reason: format!("axis {}: sample count must be at least 1", i + 1),
                });
            }
        }
        let last = axes.last().unwrap();
        if last.min < floor {
            return Err(Error::InvalidGrid {
                reason: format!(
                    "last axis must stay above the floor {floor}, got min {}",
                    last.min
                ),
            });
        }
        Ok(GridSpec { axes, floor })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Coordinates of node `idx` in lexicographic order: the first axis is
    /// the major index, the last axis varies fastest.
    pub fn node_coords(&self, idx: usize) -> Vec<f64> {
        let n = self.axes.len();
        let mut rem = idx;
        let mut out = vec![0.0; n];
        for k in (0..n).rev() {
            let ax = &self.axes[k];
            let i = rem % ax.count;
            rem /= ax.count;
            out[k] = if ax.count == 1 {
                ax.min
            } else {
                ax.min + (ax.max - ax.min) * (i as f64) / ((ax.count - 1) as f64)
            };
        }
        out
    }

    pub fn node_point(&self, idx: usize) -> Result<Point, Error> {
        Point::new(self.node_coords(idx))
    }
}

/// Pass/fail outcome of a grid sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Aggregated residual statistics over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub points: usize,
    pub max_abs: f64,
    pub max_frobenius: f64,
    pub argmax_point: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Folds per-node statistics in index order. Strict comparison keeps the
/// first node on ties, so the argmax is the lexicographically least one.
pub fn fold_report(
    stats: impl IntoIterator<Item = (Vec<f64>, f64, f64)>,
    tolerance: f64,
) -> ResidualReport {
    let mut points = 0usize;
    let mut max_abs = 0.0f64;
    let mut max_frobenius = 0.0f64;
    let mut argmax_point = Vec::new();
    for (coords, abs, fro) in stats {
        if points == 0 || abs > max_abs {
            max_abs = abs;
            argmax_point = coords;
        }
        if points == 0 || fro > max_frobenius {
            max_frobenius = fro;
        }
        points += 1;
    }
    let verdict = if max_abs <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ResidualReport {
        points,
        max_abs,
        max_frobenius,
        argmax_point,
        tolerance,
        verdict,
    }
}

/// Evaluates the residual at every node and aggregates. A node-level failure
/// aborts the sweep and names the offending coordinates.
pub fn grid_residual_report(
    prob: &SolitonProblem,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<ResidualReport, Error> {
    if grid.dim() != prob.dim() {
        return Err(Error::DimensionMismatch {
            expected: prob.dim(),
            found: grid.dim(),
        });
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidGrid {
            reason: String::from("tolerance must be positive and finite"),
        });
    }
    let total = grid.node_count();
    let mut rows = Vec::with_capacity(total);
    for idx in 0..total {
        let coords = grid.node_coords(idx);
        let node = |e: Error| Error::NodeEvaluation {
            coords: coords.clone(),
            source: Box::new(e),
        };
        let p = Point::new(coords.clone()).map_err(node)?;
        let (abs, fro) = residual_stats(prob, &p).map_err(node)?;
        rows.push((coords, abs, fro));
    }
    Ok(fold_report(rows, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fields::derived_conformal_factor;
    use crate::geometry::metric_at;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn params(a: f64, b: &[f64], c: f64, e: f64) -> PotentialParams {
        PotentialParams::new(a, b.to_vec(), c, e).unwrap()
    }

    #[test]
    fn lie_derivative_examples() {
        let killing = VectorFieldSpec::killing_2d(2.0, 1.0, 0.0).unwrap();
        let l = lie_derivative_metric(&killing, &pt(&[1.0, 1.0])).unwrap();
        assert!(l.max_abs() <= 1e-15);

        let c = VectorFieldSpec::constant(vec![1.0, 1.0]).unwrap();
        let l = lie_derivative_metric(&c, &pt(&[0.0, 1.0])).unwrap();
        assert_eq!(l.get(0, 0), -2.0);
        assert_eq!(l.get(1, 1), -2.0);
        assert_eq!(l.get(0, 1), 0.0);

        let f = VectorFieldSpec::custom(vec![
            parse("x1", 2).unwrap(),
            parse("0", 2).unwrap(),
        ])
        .unwrap();
        let l = lie_derivative_metric(&f, &pt(&[0.0, 1.0])).unwrap();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 1), 0.0);
        assert_eq!(l.get(0, 1), 0.0);
    }

    #[test]
    fn hessian_examples() {
        let inv_y = params(0.0, &[0.0], 1.0, 0.0);
        let h = hessian_of_potential(&inv_y, &pt(&[0.0, 2.0])).unwrap();
        assert_eq!(h.get(0, 0), 0.125);
        assert_eq!(h.get(1, 1), 0.125);
        assert_eq!(h.get(0, 1), 0.0);

        let flat = params(0.0, &[0.0], 0.0, 7.0);
        let h = hessian_of_potential(&flat, &pt(&[1.0, 3.0])).unwrap();
        assert_eq!(h.max_abs(), 0.0);

        let x_over_y = params(0.0, &[1.0], 0.0, 0.0);
        let h = hessian_of_potential(&x_over_y, &pt(&[2.0, 1.0])).unwrap();
        assert_eq!(h.get(0, 0), 2.0);
        assert_eq!(h.get(1, 1), 2.0);
        assert_eq!(h.get(0, 1), 0.0);
    }

    #[test]
    fn hessian_expression_route_matches() {
        let expr = parse("1/x2", 2).unwrap();
        let h = hessian_of_expression(&expr, &pt(&[0.0, 2.0])).unwrap();
        assert!((h.get(0, 0) - 0.125).abs() <= 1e-15);
        assert!((h.get(1, 1) - 0.125).abs() <= 1e-15);
    }

    #[test]
    fn hessian_dual_route_agreement() {
        let cases = [
            parse("x1^2*x2 + sin(x1)", 2).unwrap(),
            parse("exp(x1/2)*log(x2)", 2).unwrap(),
            parse("sqrt(x2)/x1", 2).unwrap(),
        ];
        for expr in cases {
            for coords in [[1.5, 0.5], [2.0, 3.0], [0.7, 1.1]] {
                let p = pt(&coords);
                let jet = expr.eval_jet(&p).unwrap();
                let fast = covariant_hessian_from_jet(&jet, &p);
                let slow = covariant_hessian_via_christoffels(&jet, &p);
                for i in 0..2 {
                    for j in i..2 {
                        assert!((fast.get(i, j) - slow.get(i, j)).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let killing = VectorFieldSpec::killing_2d(1.5, -2.0, 0.3).unwrap();
        for coords in [[0.0, 1.0], [2.0, 0.5], [-3.0, 4.0]] {
            for k in 0..2 {
                let v = euclidean_laplacian_component(&killing, k, &pt(&coords)).unwrap();
                assert_eq!(v, 0.0);
            }
        }

        let f = VectorFieldSpec::killing_nd(3, vec![1.0, 0.0], 0.0, vec![0.0, 0.0]).unwrap();
        let v = euclidean_laplacian_component(&f, 0, &pt(&[0.4, 2.0, 1.0])).unwrap();
        assert_eq!(v, -1.0);

        let c = VectorFieldSpec::constant(vec![3.0, -1.0]).unwrap();
        assert_eq!(
            euclidean_laplacian_component(&c, 1, &pt(&[1.0, 1.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn einstein_case_residual_vanishes() {
        for coords in [[0.0f64, 1.0], [3.0, 0.2]] {
            let zero = VectorFieldSpec::constant(vec![0.0, 0.0]).unwrap();
            let prob = SolitonProblem::ricci(zero, -1.0).unwrap();
            let r = soliton_residual(&prob, &pt(&coords)).unwrap();
            assert_eq!(r.max_abs(), 0.0);
        }
        let zero3 = VectorFieldSpec::constant(vec![0.0, 0.0, 0.0]).unwrap();
        let prob = SolitonProblem::ricci(zero3, -2.0).unwrap();
        let r = soliton_residual(&prob, &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn constant_field_residual_value() {
        let c = VectorFieldSpec::constant(vec![1.0, 1.0]).unwrap();
        let prob = SolitonProblem::ricci(c, -2.0).unwrap();
        let r = soliton_residual(&prob, &pt(&[0.0, 2.0])).unwrap();
        assert_eq!(r.get(0, 0), 0.125);
        assert_eq!(r.get(1, 1), 0.125);
        assert_eq!(r.get(0, 1), 0.0);
    }

    #[test]
    fn gradient_problem_closes() {
        let prm = params(0.0, &[0.0], 1.0, 0.0);
        let g = derived_conformal_factor(prm.clone(), 1.0, 0.0).unwrap();
        let prob = SolitonProblem::gradient_grb(prm, 1.0, 0.0, g).unwrap();
        let r = soliton_residual(&prob, &pt(&[0.0, 2.0])).unwrap();
        assert!(r.max_abs() <= 1e-15, "residual {}", r.max_abs());

        // A denser parameter draw over scattered points.
        let prm = params(2.0, &[1.0], 3.0, -0.5);
        let (lambda, rho) = (0.7, 0.2);
        let g = derived_conformal_factor(prm.clone(), lambda, rho).unwrap();
        let prob = SolitonProblem::gradient_grb(prm, lambda, rho, g).unwrap();
        for coords in [[0.3, 0.9], [-1.7, 2.4], [4.0, 0.1], [0.0, 5.0]] {
            let r = soliton_residual(&prob, &pt(&coords)).unwrap();
            assert!(r.max_abs() <= 1e-12, "residual {} at {coords:?}", r.max_abs());
        }
    }

    #[test]
    fn rb_matches_shifted_ricci() {
        let field = VectorFieldSpec::killing_2d(1.0, 0.5, -0.2).unwrap();
        let (lambda, rho) = (0.8, 0.3);
        let rb = SolitonProblem::ricci_bourguignon(field.clone(), lambda, rho).unwrap();
        let shifted = rb_to_ricci_lambda(lambda, rho, 2).unwrap();
        let ricci = SolitonProblem::ricci(field, shifted).unwrap();
        for coords in [[0.0, 1.0], [2.0, 0.4], [-1.0, 3.0]] {
            let a = soliton_residual(&rb, &pt(&coords)).unwrap();
            let b = soliton_residual(&ricci, &pt(&coords)).unwrap();
            for i in 0..2 {
                for j in i..2 {
                    assert_eq!(a.get(i, j).to_bits(), b.get(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn rb_to_ricci_lambda_values() {
        assert_eq!(rb_to_ricci_lambda(1.0, 0.5, 2).unwrap(), 0.0);
        assert_eq!(rb_to_ricci_lambda(7.25, 0.0, 5).unwrap(), 7.25);
        assert_eq!(rb_to_ricci_lambda(0.0, 1.0 / 3.0, 3).unwrap(), -2.0);
    }

    #[test]
    fn killing_lambda_values() {
        assert_eq!(killing_lambda_grb(2, 0.0).unwrap(), -1.0);
        let rho = 0.37;
        assert_eq!(killing_lambda_grb(2, rho).unwrap(), 2.0 * rho - 1.0);
        assert_eq!(killing_lambda_grb(3, 1.0 / 3.0).unwrap(), 0.0);
        assert!(killing_lambda_grb(1, 0.0).is_err());
    }

    #[test]
    fn grb_killing_criterion_at_exact_lambda() {
        let field = VectorFieldSpec::killing_nd(3, vec![0.5, -1.0], 0.7, vec![0.1, 0.2]).unwrap();
        let g = ConformalFactorSpec::Custom(parse("1 + x3^2", 3).unwrap());
        let rho = 0.15;
        let lambda = killing_lambda_grb(3, rho).unwrap();
        let prob = SolitonProblem::g_ricci_bourguignon(field, lambda, rho, g).unwrap();
        for coords in [[0.0, 0.0, 1.0], [1.0, -2.0, 0.3], [0.5, 0.5, 2.0]] {
            let r = soliton_residual(&prob, &pt(&coords)).unwrap();
            assert!(r.max_abs() <= 1e-12, "residual {} at {coords:?}", r.max_abs());
        }
    }

    #[test]
    fn grb_killing_criterion_offset_lambda_fails() {
        // With a Killing field the Lie term drops out, so the residual is
        // exactly -(offset) g.
        let field = VectorFieldSpec::killing_nd(3, vec![0.5, -1.0], 0.7, vec![0.1, 0.2]).unwrap();
        let g = ConformalFactorSpec::Custom(parse("1 + x3^2", 3).unwrap());
        let rho = 0.15;
        let lambda = killing_lambda_grb(3, rho).unwrap() + 0.1;
        let prob = SolitonProblem::g_ricci_bourguignon(field, lambda, rho, g).unwrap();
        let p = pt(&[1.0, -2.0, 0.5]);
        let r = soliton_residual(&prob, &p).unwrap();
        let expected = 0.1 / (0.5 * 0.5);
        assert!((r.max_abs() - expected).abs() <= 1e-10);
    }

    #[test]
    fn effective_lambda_uses_scalar_curvature() {
        // The RB diagonal shift equals lambda + rho S with S = -n(n-1).
        let field = VectorFieldSpec::constant(vec![0.0, 0.0, 0.0]).unwrap();
        let (lambda, rho) = (0.4, 0.1);
        let prob = SolitonProblem::ricci_bourguignon(field, lambda, rho).unwrap();
        let p = pt(&[0.0, 0.0, 1.0]);
        let r = soliton_residual(&prob, &p).unwrap();
        let g = metric_at(&p);
        let want = -2.0 - (lambda + rho * -6.0);
        assert!((r.get(0, 0) - want * g.get(0, 0)).abs() <= 1e-15);
    }

    #[test]
    fn grid_report_killing_pass() {
        let field = VectorFieldSpec::killing_2d(1.0, 2.0, 3.0).unwrap();
        let prob = SolitonProblem::ricci(field, -1.0).unwrap();
        let grid = GridSpec::new(vec![
            AxisSpec { min: -2.0, max: 2.0, count: 20 },
            AxisSpec { min: 0.1, max: 4.0, count: 20 },
        ])
        .unwrap();
        let report = grid_residual_report(&prob, &grid, 1e-9).unwrap();
        assert_eq!(report.points, 400);
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.max_abs < 1e-10, "max_abs {}", report.max_abs);
    }

    #[test]
    fn grid_report_constant_field_fails() {
        let field = VectorFieldSpec::constant(vec![1.0, 1.0]).unwrap();
        let prob = SolitonProblem::ricci(field, -2.0).unwrap();

        let single = GridSpec::new(vec![
            AxisSpec { min: 0.0, max: 0.0, count: 1 },
            AxisSpec { min: 2.0, max: 2.0, count: 1 },
        ])
        .unwrap();
        let report = grid_residual_report(&prob, &single, 1e-9).unwrap();
        assert_eq!(report.points, 1);
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.max_abs, 0.125);
        assert_eq!(report.argmax_point, vec![0.0, 2.0]);

        let grid = GridSpec::new(vec![
            AxisSpec { min: -2.0, max: 2.0, count: 20 },
            AxisSpec { min: 0.1, max: 4.0, count: 20 },
        ])
        .unwrap();
        let report = grid_residual_report(&prob, &grid, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.max_abs >= 0.125);
    }

    #[test]
    fn grid_report_single_passing_node() {
        let zero = VectorFieldSpec::constant(vec![0.0, 0.0]).unwrap();
        let prob = SolitonProblem::ricci(zero, -1.0).unwrap();
        let single = GridSpec::new(vec![
            AxisSpec { min: 1.0, max: 1.0, count: 1 },
            AxisSpec { min: 1.0, max: 1.0, count: 1 },
        ])
        .unwrap();
        let report = grid_residual_report(&prob, &single, 1e-9).unwrap();
        assert_eq!(report.points, 1);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn grid_node_order_is_lexicographic() {
        let grid = GridSpec::new(vec![
            AxisSpec { min: 0.0, max: 1.0, count: 2 },
            AxisSpec { min: 1.0, max: 2.0, count: 3 },
        ])
        .unwrap();
        assert_eq!(grid.node_count(), 6);
        assert_eq!(grid.node_coords(0), vec![0.0, 1.0]);
        assert_eq!(grid.node_coords(1), vec![0.0, 1.5]);
        assert_eq!(grid.node_coords(2), vec![0.0, 2.0]);
        assert_eq!(grid.node_coords(3), vec![1.0, 1.0]);
        assert_eq!(grid.node_coords(5), vec![1.0, 2.0]);
    }

    #[test]
    fn grid_validation() {
        let ok = |axes: Vec<AxisSpec>| GridSpec::new(axes);
        assert!(ok(vec![
            AxisSpec { min: 0.0, max: 1.0, count: 2 },
            AxisSpec { min: 0.05, max: 1.0, count: 2 },
        ])
        .is_ok());
        // Last axis below the floor.
        assert!(ok(vec![
            AxisSpec { min: 0.0, max: 1.0, count: 2 },
            AxisSpec { min: 0.01, max: 1.0, count: 2 },
        ])
        .is_err());
        // Inverted interval.
        assert!(ok(vec![
            AxisSpec { min: 2.0, max: 1.0, count: 2 },
            AxisSpec { min: 0.1, max: 1.0, count: 2 },
        ])
        .is_err());
        // Zero count.
        assert!(ok(vec![
            AxisSpec { min: 0.0, max: 1.0, count: 0 },
            AxisSpec { min: 0.1, max: 1.0, count: 2 },
        ])
        .is_err());
        // Custom floor admits a lower band.
        assert!(GridSpec::with_floor(
            vec![
                AxisSpec { min: 0.0, max: 1.0, count: 2 },
                AxisSpec { min: 0.01, max: 1.0, count: 2 },
            ],
            0.01
        )
        .is_ok());
    }

    #[test]
    fn grid_report_names_failing_node() {
        // 1/x1 blows up at x1 = 0, which this grid contains.
        let f = VectorFieldSpec::custom(vec![
            parse("1/x1", 2).unwrap(),
            parse("0", 2).unwrap(),
        ])
        .unwrap();
        let prob = SolitonProblem::ricci(f, -1.0).unwrap();
        let grid = GridSpec::new(vec![
            AxisSpec { min: -1.0, max: 1.0, count: 3 },
            AxisSpec { min: 1.0, max: 1.0, count: 1 },
        ])
        .unwrap();
        match grid_residual_report(&prob, &grid, 1e-9) {
            Err(Error::NodeEvaluation { coords, .. }) => {
                assert_eq!(coords, vec![0.0, 1.0]);
            }
            other => panic!("expected node failure, got {other:?}"),
        }
    }

    #[test]
    fn ricci_kind_ignores_rho_field() {
        let field = VectorFieldSpec::killing_2d(0.0, 0.0, 1.0).unwrap();
        let prob = SolitonProblem::ricci(field, -1.0).unwrap();
        assert_eq!(prob.rho(), 0.0);
        assert_eq!(prob.kind(), SolitonKind::Ricci);
        assert_eq!(prob.dim(), 2);
        assert!(prob.potential().is_none());
    }
}
