use proptest::prelude::*;
use slitsic::sicsearch::{
    balance_solution, build_povm, canonicalize, objective_gradient, reference_solution,
    tetra_objective, DEFAULT_DELTA_XI,
};
use slitsic::tomo::{
    fidelity, ideal_probabilities, linear_invert, project_physical, trace_distance,
};
use slitsic::wavefield::bloch_of_w;
use slitsic::{BlochState, Povm4, TetraSolution};

fn reference_povm() -> Povm4 {
    let sol = reference_solution();
    build_povm(&sol, balance_solution(&sol).unwrap(), DEFAULT_DELTA_XI).unwrap()
}

fn ball() -> impl Strategy<Value = BlochState> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("inside the ball", |(x, y, z)| x * x + y * y + z * z <= 1.0)
        .prop_map(|(x, y, z)| BlochState::new([x, y, z]).unwrap())
}

fn params() -> impl Strategy<Value = (f64, [f64; 4])> {
    (0.1..11.0f64, prop::array::uniform4(-3.0..3.0f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bloch_curve_is_on_the_sphere(w in -40.0..40.0f64, zeta in 0.0..20.0f64) {
        prop_assert!((bloch_of_w(w, zeta).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_form_is_idempotent((zeta, w) in params()) {
        let c = canonicalize(&TetraSolution::new(zeta, w));
        prop_assert_eq!(canonicalize(&c), c);
        let mirrored = canonicalize(&TetraSolution::new(zeta, w.map(|v| -v)));
        prop_assert_eq!(mirrored.w, c.w);
    }

    #[test]
    fn objective_is_mirror_invariant((zeta, w) in params()) {
        let m = [-w[3], -w[2], -w[1], -w[0]];
        let (a, b) = (tetra_objective(zeta, &w), tetra_objective(zeta, &m));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn gradient_matches_central_differences((zeta, w) in params()) {
        let g = objective_gradient(zeta, &w);
        let x = [zeta, w[0], w[1], w[2], w[3]];
        let f = |x: &[f64; 5]| tetra_objective(x[0], &[x[1], x[2], x[3], x[4]]);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
        for k in 0..5 {
            let h = 1e-6;
            let (mut up, mut down) = (x, x);
            up[k] += h;
            down[k] -= h;
            let fd = (f(&up) - f(&down)) / (2.0 * h);
            prop_assert!((g[k] - fd).abs() <= 1e-5 * scale, "component {}: {} vs {}", k, g[k], fd);
        }
    }

    #[test]
    fn projection_is_idempotent(x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64) {
        let (once, moved) = project_physical(&[x, y, z]);
        prop_assert!(once.norm() <= 1.0 + 1e-15);
        prop_assert_eq!(moved, (x * x + y * y + z * z).sqrt() > 1.0 + 4.0 * f64::EPSILON);
        let (twice, again) = project_physical(&once.r);
        prop_assert_eq!(twice, once);
        prop_assert!(!again);
    }

    #[test]
    fn trace_distance_is_a_metric(a in ball(), b in ball(), c in ball()) {
        let (ab, bc, ac) = (trace_distance(&a, &b), trace_distance(&b, &c), trace_distance(&a, &c));
        prop_assert!(ac <= ab + bc + 1e-15);
        prop_assert!((ab - trace_distance(&b, &a)).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab));
        let f = fidelity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn linear_inversion_round_trip(rho in ball()) {
        let povm = reference_povm();
        let back = linear_invert(&ideal_probabilities(&rho, &povm), &povm).unwrap();
        prop_assert!((back.vector() - rho.vector()).norm() < 1e-10);
    }
}
