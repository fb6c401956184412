use extdom::lp::{self, verify, Certificate, Direction, LinearSystem, Objective, Prepared};
use extdom::rational::{q, Q};
use proptest::prelude::*;

fn small_q() -> impl Strategy<Value = Q> {
    (-3i64..=3, 1i64..=3).prop_map(|(n, d)| q(n, d))
}

fn row(n: usize) -> impl Strategy<Value = (Vec<(usize, Q)>, Q)> {
    (prop::collection::vec(small_q(), n), small_q())
        .prop_map(|(coeffs, rhs)| (coeffs.into_iter().enumerate().collect(), rhs))
}

prop_compose! {
    fn system()(n in 2usize..=5)(
        eqs in prop::collection::vec(row(n), 0..=2),
        ineqs in prop::collection::vec(row(n), 0..=3),
        // sparse-ish zero-forcing rows exercise presolve
        zero_rows in prop::collection::vec((0..n, 0..n, 1i64..=2), 0..=2),
        obj in prop::collection::vec(small_q(), n),
        n in Just(n),
    ) -> (LinearSystem, Vec<Q>) {
        let mut sys = LinearSystem::new(n);
        for (terms, rhs) in eqs {
            sys.add_equality(terms, rhs);
        }
        for (terms, rhs) in ineqs {
            sys.add_inequality(terms, rhs);
        }
        for (a, b, w) in zero_rows {
            sys.add_equality([(a, q(w, 1)), (b, q(1, 1))], q(0, 1));
        }
        (sys, obj)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_vertex_oracle((sys, obj) in system()) {
        let vertices = lp::enumerate_vertices(&sys, lp::DEFAULT_VERTEX_BOUND).unwrap();
        let prepared = Prepared::new(&sys).unwrap();
        let feas = prepared.feasibility();
        verify::check(&sys, &feas).unwrap();
        prop_assert_eq!(feas.is_feasible(), !vertices.is_empty());
        for v in &vertices {
            prop_assert!(sys.contains(v));
        }
        for direction in [Direction::Min, Direction::Max] {
            let objective = Objective::new(obj.clone(), direction);
            let cert = prepared.optimize(&objective).unwrap();
            verify::check(&sys, &cert).unwrap();
            let oracle = lp::optimize_over_vertices(&vertices, &objective);
            prop_assert_eq!(cert.value().cloned(), oracle);
        }
    }

    #[test]
    fn solve_is_deterministic((sys, obj) in system()) {
        let objective = Objective::new(obj, Direction::Max);
        let a = lp::solve(&sys, Some(&objective)).unwrap();
        let b = lp::solve(&sys, Some(&objective)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn tampered_certificates_are_rejected() {
    let mut sys = LinearSystem::new(3);
    sys.add_inequality([(0, q(1, 1))], q(1, 2));
    let obj = Objective::new(vec![q(1, 1), q(0, 1), q(0, 1)], Direction::Max);
    let cert = lp::solve(&sys, Some(&obj)).unwrap();
    verify::check(&sys, &cert).unwrap();
    let Certificate::Optimal { objective, point, multipliers, .. } = cert else { panic!("expected optimum") };
    let wrong = Certificate::Optimal { objective, point, value: q(1, 1), multipliers };
    assert!(verify::check(&sys, &wrong).is_err());
    let bogus = Certificate::Infeasible { multipliers: vec![q(0, 1), q(1, 1)] };
    assert!(verify::check(&sys, &bogus).is_err());
}
