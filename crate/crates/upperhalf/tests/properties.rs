//! Randomized cross-checks between independent code paths: closed-form
//! geometry against jet-assembled curvature, scalar against jet expression
//! evaluation, the planar against the n-dimensional Killing family, and the
//! analytic zero-free test against explicit witnesses.

use proptest::prelude::*;

use upperhalf::expr::{parse, BinaryOp, Expr, UnaryFn};
use upperhalf::fields::{
    conformal_denominator, degenerate_lambda, derived_conformal_factor, field_value_at,
    gradient_field_at, potential_jet_at, zero_free_check, PotentialParams, VectorFieldSpec,
    ZeroFreeVerdict,
};
use upperhalf::geometry::{
    christoffels_at, inverse_metric_at, metric_at, ricci_at, ricci_from_christoffels, Point,
};
use upperhalf::soliton::{
    covariant_hessian_from_jet, covariant_hessian_via_christoffels, hessian_of_potential,
    lie_derivative_metric, rb_to_ricci_lambda, soliton_residual, SolitonProblem,
};

fn point_strategy(n: usize) -> impl Strategy<Value = Point> {
    let horiz = prop::collection::vec(-3.0f64..3.0, n - 1);
    let last = 0.1f64..3.0;
    (horiz, last).prop_map(|(mut coords, xn)| {
        coords.push(xn);
        Point::new(coords).unwrap()
    })
}

fn coeff() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

proptest! {
    #[test]
    fn metric_times_inverse_is_identity(p in (2usize..=5).prop_flat_map(point_strategy)) {
        let g = metric_at(&p);
        let ginv = inverse_metric_at(&p);
        for i in 0..p.dim() {
            for j in i..p.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g.get(i, j) * ginv.get(i, j) - want).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn christoffels_ignore_horizontal_coordinates(
        a in prop::collection::vec(-5.0f64..5.0, 2),
        b in prop::collection::vec(-5.0f64..5.0, 2),
        xn in 0.05f64..4.0,
    ) {
        let mut pa = a.clone();
        pa.push(xn);
        let mut pb = b.clone();
        pb.push(xn);
        let ga = christoffels_at(&Point::new(pa).unwrap());
        let gb = christoffels_at(&Point::new(pb).unwrap());
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(
                        ga.get(k, i, j).to_bits(),
                        gb.get(k, i, j).to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_routes_agree(p in (2usize..=4).prop_flat_map(point_strategy)) {
        let direct = ricci_at(&p);
        let assembled = ricci_from_christoffels(&p);
        let scale = direct.max_abs().max(1.0);
        for i in 0..p.dim() {
            for j in i..p.dim() {
                prop_assert!(
                    (direct.get(i, j) - assembled.get(i, j)).abs() <= 1e-10 * scale
                );
            }
        }
    }

    #[test]
    fn killing_families_unify_in_the_plane(
        a in coeff(), b in coeff(), c in coeff(),
        p in point_strategy(2),
    ) {
        let planar = VectorFieldSpec::killing_2d(a, b, c).unwrap();
        let general = VectorFieldSpec::killing_nd(2, vec![a], b, vec![c]).unwrap();
        let u = field_value_at(&planar, &p).unwrap();
        let v = field_value_at(&general, &p).unwrap();
        for i in 0..2 {
            let scale = u[i].abs().max(1.0);
            prop_assert!((u[i] - v[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gradient_field_is_raised_potential_gradient(
        a in coeff(),
        b in prop::collection::vec(-3.0f64..3.0, 1..=3),
        c in coeff(), e in coeff(),
        raw in prop::collection::vec(-3.0f64..3.0, 3),
        xn in 0.1f64..3.0,
    ) {
        let n = b.len() + 1;
        let params = PotentialParams::new(a, b, c, e).unwrap();
        let mut coords = raw[..n - 1].to_vec();
        coords.push(xn);
        let p = Point::new(coords).unwrap();
        let direct = gradient_field_at(&params, &p).unwrap();
        let jet = potential_jet_at(&params, &p).unwrap();
        let ginv = inverse_metric_at(&p);
        for i in 0..n {
            let raised = ginv.get(i, i) * jet.grad()[i];
            let scale = raised.abs().max(1.0);
            prop_assert!((direct[i] - raised).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn lie_derivative_of_gradient_is_twice_hessian(
        a in coeff(),
        b in prop::collection::vec(-3.0f64..3.0, 1..=3),
        c in coeff(), e in coeff(),
        raw in prop::collection::vec(-3.0f64..3.0, 3),
        xn in 0.1f64..3.0,
    ) {
        let n = b.len() + 1;
        let params = PotentialParams::new(a, b, c, e).unwrap();
        let field = VectorFieldSpec::gradient_of(params.clone());
        let mut coords = raw[..n - 1].to_vec();
        coords.push(xn);
        let p = Point::new(coords).unwrap();
        let lie = lie_derivative_metric(&field, &p).unwrap();
        let hess = hessian_of_potential(&params, &p).unwrap();
        let scale = hess.max_abs().max(1.0);
        for i in 0..n {
            for j in i..n {
                prop_assert!(
                    (lie.get(i, j) - 2.0 * hess.get(i, j)).abs() <= 1e-10 * scale,
                    "entry ({}, {}) at {:?}", i, j, p.coords()
                );
            }
        }
    }

    #[test]
    fn rb_residual_equals_shifted_ricci_residual(
        a in coeff(), b in coeff(), c in coeff(),
        lambda in -3.0f64..3.0,
        rho in -1.0f64..1.0,
        p in point_strategy(2),
    ) {
        let field = VectorFieldSpec::killing_2d(a, b, c).unwrap();
        let rb = SolitonProblem::ricci_bourguignon(field.clone(), lambda, rho).unwrap();
        let shifted = rb_to_ricci_lambda(lambda, rho, 2).unwrap();
        let ricci = SolitonProblem::ricci(field, shifted).unwrap();
        let x = soliton_residual(&rb, &p).unwrap();
        let y = soliton_residual(&ricci, &p).unwrap();
        for i in 0..2 {
            for j in i..2 {
                prop_assert_eq!(x.get(i, j).to_bits(), y.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn zero_free_verdicts_have_witnesses(
        a in prop_oneof![Just(0.0), -2.0f64..2.0],
        b in prop::collection::vec(-2.0f64..2.0, 1..=3),
        c in -2.0f64..2.0,
    ) {
        let params = PotentialParams::new(a, b.clone(), c, 0.0).unwrap();
        let n = params.dim();
        let at = |coords: Vec<f64>| {
            conformal_denominator(&params, &Point::new(coords).unwrap()).unwrap()
        };
        match zero_free_check(&params) {
            ZeroFreeVerdict::ZeroFree => {
                // P keeps one strict sign over a broad sample.
                let mut sign = 0.0f64;
                for ix in -6..=6 {
                    for iy in 1..=12 {
                        let mut coords = vec![ix as f64 / 2.0; n - 1];
                        coords.push(iy as f64 / 3.0);
                        let v = at(coords);
                        prop_assert!(v != 0.0);
                        if sign == 0.0 {
                            sign = v.signum();
                        } else {
                            prop_assert_eq!(v.signum(), sign);
                        }
                    }
                }
            }
            ZeroFreeVerdict::HasZero => {
                // Witness construction needs headroom over float noise.
                if a == 0.0 {
                    let norm2: f64 = b.iter().map(|bi| bi * bi).sum();
                    prop_assume!(norm2 > 1e-12);
                } else {
                    let threshold: f64 =
                        b.iter().map(|bi| bi * bi).sum::<f64>() / (2.0 * a);
                    prop_assume!((c - threshold).abs() > 1e-9);
                }
                // Exhibit a sign change, which forces a zero in between.
                let (lo, hi) = zero_witnesses(&params);
                let vlo = at(lo);
                let vhi = at(hi);
                prop_assert!(
                    vlo == 0.0 || vhi == 0.0 || vlo.signum() != vhi.signum(),
                    "no sign change: P = {} and {}", vlo, vhi
                );
            }
            ZeroFreeVerdict::DegenerateZeroPolynomial => {
                prop_assert!(a == 0.0 && c == 0.0 && b.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn derived_factor_is_finite_with_predictable_sign(
        a in 0.2f64..2.0,
        b in prop::collection::vec(-2.0f64..2.0, 1..=2),
        margin in 0.1f64..2.0,
        lambda in -3.0f64..3.0,
        rho in -0.5f64..0.5,
        raw in prop::collection::vec(-3.0f64..3.0, 2),
        xn in 0.1f64..3.0,
    ) {
        let n = b.len() + 1;
        let mut coords = raw[..n - 1].to_vec();
        coords.push(xn);
        let p = Point::new(coords).unwrap();
        let c = b.iter().map(|bi| bi * bi).sum::<f64>() / (2.0 * a) + margin;
        let params = PotentialParams::new(a, b, c, 0.0).unwrap();
        let degenerate = degenerate_lambda(n, rho).unwrap();
        prop_assume!((lambda - degenerate).abs() > 1e-6);
        let g = derived_conformal_factor(params.clone(), lambda, rho).unwrap();
        let v = g.value_at(&p).unwrap();
        prop_assert!(v.is_finite());
        let coeff = lambda + ((n - 1) as f64) * (1.0 - n as f64 * rho);
        let denom = conformal_denominator(&params, &p).unwrap();
        prop_assert!(v * (coeff * denom) > 0.0);
    }
}

/// Two points at which P provably brackets a zero, per the case analysis in
/// the analytic check.
fn zero_witnesses(params: &PotentialParams) -> (Vec<f64>, Vec<f64>) {
    let a = params.a();
    let b = params.b();
    let c = params.c();
    let m = b.len();
    if a == 0.0 {
        // P = sum bi xi + c is linear; walk along b to push it past 0 both ways.
        let norm2: f64 = b.iter().map(|bi| bi * bi).sum();
        let t_lo = (-c - 1.0) / norm2;
        let t_hi = (-c + 1.0) / norm2;
        let mut lo: Vec<f64> = b.iter().map(|bi| bi * t_lo).collect();
        let mut hi: Vec<f64> = b.iter().map(|bi| bi * t_hi).collect();
        lo.push(1e-3);
        hi.push(1e-3);
        (lo, hi)
    } else {
        // Quadratic case: at the horizontal vertex xi = -bi/a and xn -> 0,
        // P approaches c - sum bi^2/(2a), which has the opposite sign to the
        // far-field behaviour governed by a.
        let mut vertex: Vec<f64> = b.iter().map(|bi| -bi / a).collect();
        vertex.push(1e-3);
        let mut far = vec![0.0; m];
        // Large xn dominates: P ~ (a/2) xn^2.
        far.push(1e3);
        (vertex, far)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parser_never_panics(s in "\\PC*") {
        let _ = parse(&s, 3);
    }

    #[test]
    fn parser_handles_operator_soup(s in "[-+*/^()x0-9eE. ]{0,40}") {
        let _ = parse(&s, 2);
    }

    #[test]
    fn display_round_trips_through_parse(e in expr_strategy()) {
        let printed = e.to_string();
        let back = parse(&printed, 3);
        prop_assert!(back.is_ok(), "failed to re-parse {}", printed);
        prop_assert_eq!(back.unwrap(), e);
    }

    #[test]
    fn scalar_and_jet_values_agree_bitwise(
        e in expr_strategy(),
        p in point_strategy(3),
    ) {
        let s = e.eval_scalar(&p);
        let j = e.eval_jet(&p);
        match (s, j) {
            (Ok(sv), Ok(jv)) => prop_assert_eq!(sv.to_bits(), jv.value().to_bits()),
            (Err(_), Err(_)) => {}
            (s, j) => prop_assert!(false, "paths disagree: {:?} vs {:?}", s, j),
        }
    }

    #[test]
    fn hessian_routes_agree_on_random_expressions(
        e in expr_strategy(),
        p in point_strategy(3),
    ) {
        if let Ok(jet) = e.eval_jet(&p) {
            if jet.grad().iter().any(|g| !g.is_finite()) {
                return Ok(());
            }
            let fast = covariant_hessian_from_jet(&jet, &p);
            let slow = covariant_hessian_via_christoffels(&jet, &p);
            let scale = fast.max_abs().max(1.0);
            if !scale.is_finite() {
                return Ok(());
            }
            for i in 0..3 {
                for j in i..3 {
                    prop_assert!((fast.get(i, j) - slow.get(i, j)).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}

/// Random expression trees over x1..x3 with non-negative constants, the
/// exact image of the parser.
fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..4.0).prop_map(Expr::Constant),
        (1usize..=3).prop_map(Expr::Coord),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), binary_op()).prop_map(|(l, r, op)| Expr::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r),
            }),
            (inner.clone(), unary_fn()).prop_map(|(a, f)| Expr::Unary {
                f,
                arg: Box::new(a),
            }),
            (inner.clone(), -3i32..=3).prop_map(|(b, exp)| Expr::IntPow {
                base: Box::new(b),
                exp,
            }),
            inner.prop_map(|e| Expr::Neg(Box::new(e))),
        ]
    })
}

fn binary_op() -> impl Strategy<Value = BinaryOp> {
    prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
    ]
}

fn unary_fn() -> impl Strategy<Value = UnaryFn> {
    prop_oneof![
        Just(UnaryFn::Exp),
        Just(UnaryFn::Log),
        Just(UnaryFn::Sin),
        Just(UnaryFn::Cos),
        Just(UnaryFn::Sqrt),
    ]
}
