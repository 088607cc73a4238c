use gmsfem_dg::coarse::{coarse_solve, energy_expansion};
use gmsfem_dg::experiments::ExperimentConfig;
use gmsfem_dg::metrics::error_report;
use gmsfem_dg::spectral::{build_space, Method, Selection};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Source};
use proptest::prelude::*;

fn system(coarse: usize, fine: usize, eta: f64, seed: u64) -> DGSystem {
    let mesh = PartitionedMesh::build(coarse, fine).unwrap();
    let field = CoefficientField::synth_channels_inclusions(&mesh, eta, seed).unwrap();
    DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0)).unwrap()
}

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn galerkin_error_is_orthogonal_and_nested(
        coarse in 2usize..4,
        fine in 3usize..6,
        log_eta in 0.0f64..6.0,
        seed in 0u64..1000,
        m in method(),
        l_add in 0usize..4,
    ) {
        let sys = system(coarse, fine, 10f64.powf(log_eta), seed);
        let u = sys.solve_fine().unwrap();
        let small = build_space(&sys, m, &Selection::uniform(l_add)).unwrap();
        let large = small.reselect(&Selection::uniform(l_add + 1)).unwrap();
        let s1 = coarse_solve(&sys, &small, None).unwrap();
        let s2 = coarse_solve(&sys, &large, None).unwrap();
        let e1 = error_report(&sys, &u, &s1.fine).unwrap();
        let e2 = error_report(&sys, &u, &s2.fine).unwrap();
        prop_assert!(e2.energy <= e1.energy * (1.0 + 1e-10));

        let e: Vec<f64> = u.as_slice().iter().zip(s1.fine.as_slice()).map(|(a, b)| a - b).collect();
        let scale = sys.broken_norm_sq(u.as_slice()).sqrt();
        for k in 0..small.dim().min(8) {
            let mut c = vec![0.0; small.dim()];
            c[k] = 1.0;
            let v = small.prolong(&c).unwrap();
            let r = sys.a_dg(&e, &v).abs() / (scale * sys.broken_norm_sq(&v).sqrt());
            prop_assert!(r <= 1e-8, "orthogonality {r}");
        }
    }

    #[test]
    fn full_space_recovers_fine_solution(
        coarse in 1usize..4,
        fine in 2usize..5,
        log_eta in 0.0f64..6.0,
        seed in 0u64..1000,
        m in prop::sample::select(vec![Method::I, Method::II]),
    ) {
        let sys = system(coarse, fine, 10f64.powf(log_eta), seed);
        let u = sys.solve_fine().unwrap();
        let space = build_space(&sys, m, &Selection::full()).unwrap();
        let sol = coarse_solve(&sys, &space, None).unwrap();
        let r = error_report(&sys, &u, &sol.fine).unwrap();
        prop_assert!(r.relative_norm() <= 1e-9, "{}", r.relative_norm());
    }

    #[test]
    fn energy_expansion_identity(
        fine in 2usize..7,
        log_eta in 0.0f64..6.0,
        seed in 0u64..1000,
        values in prop::collection::vec(-1.0f64..1.0, 49 * 4),
    ) {
        let sys = system(2, fine, 10f64.powf(log_eta), seed);
        let n = sys.dim();
        let v = gmsfem_dg::BrokenVector::from_vec(sys.mesh(), values[..n].to_vec()).unwrap();
        let space = build_space(&sys, Method::II, &Selection::uniform(1)).unwrap();
        let exp = energy_expansion(&sys, &space, &v).unwrap();
        prop_assert!(exp.identity_error() <= 1e-8, "{}", exp.identity_error());
        prop_assert!(exp.tail() >= 0.0);
    }

    #[test]
    fn prolong_restrict_are_adjoint(
        m in method(),
        seed in 0u64..1000,
        c in prop::collection::vec(-1.0f64..1.0, 4 * 3),
        v in prop::collection::vec(-1.0f64..1.0, 4 * 25),
    ) {
        let sys = system(2, 4, 1e3, seed);
        let space = build_space(&sys, m, &Selection::uniform(2)).unwrap();
        prop_assert_eq!(space.dim(), c.len());
        let pc = space.prolong(&c).unwrap();
        let rv = space.restrict(&v).unwrap();
        let lhs: f64 = pc.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = c.iter().zip(&rv).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn config_hash_survives_canonical_round_trip(
        coarse in 1usize..20,
        fine in 1usize..20,
        delta in 0.5f64..20.0,
        seed in any::<u64>(),
        l_add in prop::collection::vec(0usize..3, 1..5),
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.mesh.coarse = coarse;
        cfg.mesh.fine = fine;
        cfg.solver.delta = delta;
        cfg.coefficient.seed = seed;
        cfg.solver.l_add = l_add;
        let back = ExperimentConfig::parse(&cfg.to_canonical()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        let mut moved = cfg.clone();
        moved.output.dir = "elsewhere".into();
        prop_assert_eq!(moved.hash(), cfg.hash());
    }
}
