use conefix::cone_metric::{is_cauchy, sequence_converges, BaseDistance, ConeMetricSpace, MPoint};
use conefix::contraction::{check_condition, kannan_reduction_check, ContractionKind, PairEvaluator};
use conefix::harness::{load_problem_str, run, Command, RunOptions, RunReport, SamplingSection};
use conefix::maps::{parse_expr, DomainBox, Env, Expr, MapExpr, Symbols};
use conefix::ordered_space::{ConeSpec, EVector, Relation};
use conefix::presets::{builtin, kannan, metric_line, square_half};
use conefix::solver::{apriori_bound, iterations_needed, solve};
use proptest::prelude::*;

fn coords(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, m)
}

fn nonneg(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..50.0, m)
}

fn ev(v: Vec<f64>) -> EVector {
    EVector::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn order_relations_are_coherent((x, y) in (1usize..12).prop_flat_map(|m| (coords(m), coords(m)))) {
        let cone = ConeSpec::orthant(x.len()).unwrap();
        let (x, y) = (ev(x), ev(y));
        let fwd = cone.compare(&x, &y).unwrap().relation;
        let diff = y.sub(&x).unwrap();
        prop_assert_eq!(fwd != Relation::Incomparable, cone.contains(&diff).unwrap());
        if fwd == Relation::Ll {
            prop_assert!(cone.interior_contains(&diff).unwrap());
        }
        prop_assert_eq!(cone.compare(&x, &x).unwrap().relation, Relation::Leq);
    }

    #[test]
    fn orthant_is_closed_under_nonnegative_combinations(
        (x, y) in (1usize..12).prop_flat_map(|m| (nonneg(m), nonneg(m))),
        a in 0.0f64..10.0,
        b in 0.0f64..10.0,
    ) {
        let cone = ConeSpec::orthant(x.len()).unwrap();
        let combo = ev(x).scale(a).add(&ev(y).scale(b)).unwrap();
        prop_assert!(cone.contains(&combo).unwrap());
    }

    #[test]
    fn orthant_is_normal_with_constant_one((x, extra) in (1usize..12).prop_flat_map(|m| (nonneg(m), nonneg(m)))) {
        let y: Vec<f64> = x.iter().zip(&extra).map(|(a, b)| a + b).collect();
        let (x, y) = (ev(x), ev(y));
        prop_assert!(x.norm() <= y.norm());
    }

    #[test]
    fn cone_distance_is_symmetric_and_orders_the_triangle(
        (x, y, z) in (1usize..4).prop_flat_map(|k| (coords(k), coords(k), coords(k))),
        m in 1usize..40,
        euclid in any::<bool>(),
    ) {
        let base = if euclid { BaseDistance::Euclidean } else { BaseDistance::AbsoluteDifference };
        let space = ConeMetricSpace::new(x.len(), ConeSpec::orthant(m).unwrap(), "exp(t)", base).unwrap();
        let (x, y, z) = (MPoint::new(x).unwrap(), MPoint::new(y).unwrap(), MPoint::new(z).unwrap());
        let dxy = space.distance(&x, &y).unwrap();
        prop_assert_eq!(&dxy, &space.distance(&y, &x).unwrap());
        let via = space.distance(&x, &z).unwrap().add(&space.distance(&z, &y).unwrap()).unwrap();
        for (d, v) in dxy.samples().iter().zip(via.samples()) {
            prop_assert!(*d <= v + 1e-9);
        }
    }

    #[test]
    fn geometric_sequences_converge_and_are_cauchy(
        limit in -10.0f64..10.0,
        amp in -5.0f64..5.0,
        r in 0.01f64..0.7,
        len in 40usize..100,
    ) {
        let space = ConeMetricSpace::exp_weighted_line(9).unwrap();
        let seq: Vec<MPoint> = (0..len).map(|n| MPoint::scalar(limit + amp * r.powi(n as i32)).unwrap()).collect();
        let tol = 1e-6;
        let converges = sequence_converges(&space, &seq, &MPoint::scalar(limit).unwrap(), tol).unwrap();
        if converges {
            prop_assert!(is_cauchy(&space, &seq, 2.0 * space.normal_constant() * tol).unwrap());
        }
    }

    #[test]
    fn oscillating_sequences_are_not_cauchy(a in 1e-3f64..10.0, len in 10usize..60) {
        let space = ConeMetricSpace::exp_weighted_line(9).unwrap();
        let seq: Vec<MPoint> = (0..len).map(|n| MPoint::scalar(if n % 2 == 0 { a } else { -a }).unwrap()).collect();
        prop_assert!(!is_cauchy(&space, &seq, 1e-4).unwrap());
    }

    #[test]
    fn kannan_pairs_are_symmetric(x in -10.0f64..10.0, y in -10.0f64..10.0, chatterjea in any::<bool>()) {
        let kind = if chatterjea { ContractionKind::TK2 } else { ContractionKind::TK1 };
        let p = square_half(kind, 0.2, 1.0).unwrap();
        let eval = PairEvaluator::new(&p.space, &p.t_map, &p.s_map, kind);
        let (px, py) = (MPoint::scalar(x).unwrap(), MPoint::scalar(y).unwrap());
        let a = eval.sides(&px, &py).unwrap();
        let b = eval.sides(&py, &px).unwrap();
        prop_assert_eq!(a.lhs, b.lhs);
        prop_assert_eq!(a.sum, b.sum);
    }

    #[test]
    fn the_estimate_is_a_sound_constant(x in -10.0f64..10.0, y in -10.0f64..10.0, chatterjea in any::<bool>()) {
        let kind = if chatterjea { ContractionKind::TK2 } else { ContractionKind::TK1 };
        let p = square_half(kind, 0.2, 1.0).unwrap();
        let eval = PairEvaluator::new(&p.space, &p.t_map, &p.s_map, kind);
        let sides = eval.sides(&MPoint::scalar(x).unwrap(), &MPoint::scalar(y).unwrap()).unwrap();
        if let Some(c) = sides.min_constant() {
            prop_assert!(sides.holds(c));
            prop_assert!(sides.holds(c + 0.1));
            if c > 1e-6 {
                prop_assert!(!sides.holds(c * 0.5) || sides.lhs.norm() < 1e-8);
            }
        }
    }

    #[test]
    fn iterations_needed_is_minimal(h in 0.0f64..0.95, d0 in 1e-3f64..1e3, k in 1.0f64..3.0, exp in -12.0f64..-1.0) {
        let tol = 10f64.powf(exp);
        let n = iterations_needed(h, d0, k, tol).unwrap();
        prop_assert!(apriori_bound(h, d0, k, n).unwrap() <= tol);
        if n > 0 {
            prop_assert!(apriori_bound(h, d0, k, n - 1).unwrap() > tol);
        }
    }

    #[test]
    fn apriori_bound_is_monotone(h in 0.0f64..0.99, d0 in 0.0f64..1e3, n in 0u64..200) {
        prop_assert!(apriori_bound(h, d0, 1.0, n + 1).unwrap() <= apriori_bound(h, d0, 1.0, n).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kannan_checks_are_monotone_in_the_constant(b1 in 0.0f64..0.49, b2 in 0.0f64..0.49, seed in any::<u64>()) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let p = square_half(ContractionKind::TK1, lo, 1.0).unwrap();
        let at = |b: f64| check_condition(&p.space, &p.t_map, &p.s_map, p.kind, b, 300, &p.domain, seed).unwrap();
        prop_assert!(at(hi).violation_count <= at(lo).violation_count);
    }

    #[test]
    fn identity_t_reduces_to_kannan(a in 0.0f64..0.3, b in 0.05f64..0.49, seed in any::<u64>()) {
        let space = metric_line(1).unwrap();
        let s = conefix::parse_map(&format!("{a} * x")).unwrap();
        let domain = DomainBox::interval(-5.0, 5.0).unwrap();
        let k1 = kannan_reduction_check(&space, &s, b, 400, &domain, seed).unwrap();
        let tk1 = check_condition(&space, &MapExpr::identity(1), &s, ContractionKind::TK1, b, 400, &domain, seed).unwrap();
        prop_assert!(k1.same_outcome(&tk1));
    }

    #[test]
    fn solved_points_are_fixed_and_bounded(x0 in -10.0f64..10.0, chatterjea in any::<bool>()) {
        let (kind, c) = if chatterjea { (ContractionKind::TK2, 0.2 + 1e-6) } else { (ContractionKind::TK1, 1.0 / 3.0) };
        let p = square_half(kind, c, x0).unwrap();
        let r = solve(&p, 1e-9, 2000).unwrap();
        prop_assert!(r.converged());
        prop_assert!(r.residual <= 1e-9);
        prop_assert!(r.u.coords()[0].abs() <= 1e-9);
        let tu = p.t_map.eval(&r.u).unwrap();
        for (n, x) in r.iterates.iter().enumerate() {
            let gap = p.space.distance_norm(&p.t_map.eval(x).unwrap(), &tu).unwrap();
            prop_assert!(gap <= r.certificate.gap_bound(n).unwrap() + 1e-9, "n = {}", n);
        }
    }

    #[test]
    fn ordinary_metric_kannan_matches_a_plain_iteration(a in -0.3f64..0.3, c in -2.0f64..2.0, x0 in -10.0f64..10.0) {
        // S x = a x + c is Kannan with b = 1/4 on R whenever |a| <= 1/3.
        let s = conefix::parse_map(&format!("{a} * x + {c}")).unwrap();
        let p = kannan(
            metric_line(1).unwrap(),
            s,
            0.25,
            MPoint::scalar(x0).unwrap(),
            DomainBox::interval(-100.0, 100.0).unwrap(),
        );
        let r = solve(&p, 1e-9, 500).unwrap();
        let mut x = x0;
        let mut plain = vec![x];
        for _ in 0..r.iterations {
            x = a * x + c;
            plain.push(x);
        }
        let got: Vec<u64> = r.iterates.iter().map(|q| q.coords()[0].to_bits()).collect();
        let want: Vec<u64> = plain.iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(got, want);
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-20.0f64..20.0).prop_map(Expr::Const),
        (0usize..2).prop_map(Expr::Var),
        Just(Expr::GridT),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), -3i32..4).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            inner.clone().prop_map(|a| Expr::Abs(Box::new(a))),
            inner.prop_map(|a| Expr::Exp(Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_then_parsing_preserves_values(e in expr(), seed in any::<u64>()) {
        let printed = e.to_string();
        let back = parse_expr(&printed, Symbols { point_dimension: 2, allow_t: true }).unwrap();
        prop_assert_eq!(back.to_string(), printed.clone());
        let mut state = seed | 1;
        for _ in 0..1000 {
            // xorshift; only needs to spread points, not be high quality
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = |s: u64, k: u32| ((s >> k) & 0xffff) as f64 / 65535.0;
            let point = [20.0 * u(state, 0) - 10.0, 20.0 * u(state, 16) - 10.0];
            let env = Env { point: &point, t: u(state, 32) };
            match (e.eval(&env), back.eval(&env)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{}", printed),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{} -> {:?} vs {:?}", printed, a, b),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn run_reports_round_trip(seed in any::<u64>(), which in 0usize..3, sub in 0usize..5) {
        let name = ["square_half_kannan", "kannan_x_over_5", "corrupted_cone"][which];
        let mut loaded = load_problem_str(builtin(name).unwrap()).unwrap();
        loaded.sampling = SamplingSection { pairs: 200, axiom_samples: 100, injectivity_samples: 50 };
        let options = RunOptions { seed, ..RunOptions::default() };
        let report = run(&loaded, Command::ALL[sub], &options).unwrap();
        let json = report.to_json();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.to_json(), json);
    }
}
