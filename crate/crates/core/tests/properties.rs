//! Randomized property tests over the exact algebra, the classification
//! helpers, and the serialization formats.

use proptest::prelude::*;

use h6map::algebra::{lie_poisson_bracket, GeneratorId, ModelContext, PhasePoint, GENERATOR_VARS};
use h6map::classify::{cal_m, invariant_search, mn_det};
use h6map::dynamics::{step_phase, trajectory};
use h6map::expr::parse_expr;
use h6map::invariants::{numerical_rank, InvariantParams};
use h6map::poly::{rat, MultiPoly};
use h6map::potential::PotentialSpec;

fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
    // up to four terms, each a rational times a product of at most two
    // generators: degree <= 2 keeps bracket compositions fast
    prop::collection::vec(
        (-9i64..10, 1i64..7, prop::collection::vec(0usize..6, 0..=2)),
        1..=4,
    )
    .prop_map(|terms| {
        let mut acc = MultiPoly::zero(&GENERATOR_VARS);
        for (num, den, gens) in terms {
            let mut term = MultiPoly::constant(&GENERATOR_VARS, rat(num, den));
            for g in gens {
                term = &term * &GeneratorId::ALL[g].poly();
            }
            acc = &acc + &term;
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        f in poly_strategy(),
        g in poly_strategy(),
        c in -9i64..10,
    ) {
        let fg = lie_poisson_bracket(&f, &g).unwrap();
        let gf = lie_poisson_bracket(&g, &f).unwrap();
        prop_assert!((&fg + &gf).is_zero());
        let scaled = lie_poisson_bracket(&f.scale(&rat(c, 1)), &g).unwrap();
        prop_assert!((&scaled - &fg.scale(&rat(c, 1))).is_zero());
    }

    #[test]
    fn bracket_satisfies_leibniz(
        f in poly_strategy(),
        g in poly_strategy(),
        h in poly_strategy(),
    ) {
        let lhs = lie_poisson_bracket(&f, &(&g * &h)).unwrap();
        let rhs = &(&lie_poisson_bracket(&f, &g).unwrap() * &h)
            + &(&g * &lie_poisson_bracket(&f, &h).unwrap());
        prop_assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn mn_det_routes_agree(
        n in 1usize..=10,
        mu_num in -30i64..30,
        mu_den in 1i64..9,
        nu_num in -30i64..30,
        nu_den in 1i64..9,
    ) {
        let (closed, exact) = mn_det(n, &rat(mu_num, mu_den), &rat(nu_num, nu_den));
        prop_assert_eq!(closed, exact);
    }

    #[test]
    fn calm_rank_stays_in_bounds(
        n in 3usize..=6,
        seed in proptest::num::u64::ANY,
    ) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = numerical_rank(&cal_m(&q, &lam).unwrap(), 1e-10).unwrap();
        prop_assert!(r + 2 >= n && r <= n, "rank {} at n = {}", r, n);
    }

    #[test]
    fn float_formatting_round_trips(x in proptest::num::f64::NORMAL) {
        let text = format!("{x:.16e}");
        let back: f64 = text.parse().unwrap();
        prop_assert_eq!(x, back);
    }

    #[test]
    fn trajectory_csv_round_trips(
        qs in prop::collection::vec(-0.9f64..0.9, 3),
        ps in prop::collection::vec(-0.9f64..0.9, 3),
    ) {
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        let spec = PotentialSpec::V1 { a_plus: 0.3, varkappa: 0.5 };
        let point = PhasePoint::new(qs, ps).unwrap();
        let traj = trajectory(&point, &spec, &ctx, 5, &[], &InvariantParams::default()).unwrap();
        let csv = traj.to_csv();
        for (row, line) in csv.lines().skip(1).enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|s| s.parse().unwrap())
                .collect();
            let point = &traj.entries[row].point;
            for (col, value) in point.q.iter().chain(&point.p).enumerate() {
                prop_assert_eq!(*value, fields[col], "row {} col {}", row, col);
            }
        }
    }

    #[test]
    fn expr_unparse_is_a_fixpoint(
        a in -5.0f64..5.0,
        b in 1.0f64..5.0,
        pick in 0usize..5,
    ) {
        let body = ["X*Y", "sin(X)+Y^2", "exp(Y)-X", "sqrt(X^2+1)", "log(Y+6)"][pick];
        let text = format!("({a:.3})*({body}) + {b:.3}");
        let tree = parse_expr(&text).unwrap();
        let canon = tree.unparse();
        let again = parse_expr(&canon).unwrap();
        prop_assert_eq!(&again.unparse(), &canon);
        for point in [[0.3, 0.7], [1.1, -0.4], [2.0, 2.0]] {
            prop_assert_eq!(tree.eval(&point).unwrap(), again.eval(&point).unwrap());
        }
    }

    #[test]
    fn step_phase_new_p_is_old_q(
        qs in prop::collection::vec(-0.9f64..0.9, 3),
        ps in prop::collection::vec(-0.9f64..0.9, 3),
        kappa in -1.0f64..1.0,
    ) {
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        let spec = PotentialSpec::V2I { kappa };
        let point = PhasePoint::new(qs, ps).unwrap();
        let next = step_phase(&point, &spec, &ctx).unwrap();
        prop_assert_eq!(&next.p, &point.q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn search_dimension_is_scale_invariant(scale in 0.25f64..4.0) {
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        let spec = PotentialSpec::V1 {
            a_plus: scale,
            varkappa: scale,
        };
        let res = invariant_search(&spec, 1, &ctx, 30, 33).unwrap();
        prop_assert_eq!(res.vectors.len(), 1);
    }
}
