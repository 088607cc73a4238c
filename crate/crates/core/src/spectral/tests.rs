use super::*;
use crate::coefficient::CoefficientField;
use crate::fe::{DGSystem, Source};
use crate::linalg::max_principal_angle;
use crate::mesh::{PartitionedMesh, Segment};
use nalgebra::SymmetricEigen;

fn system(coarse: usize, fine: usize, eta: Option<f64>) -> DGSystem {
    let mesh = PartitionedMesh::build(coarse, fine).unwrap();
    let field = match eta {
        Some(eta) => CoefficientField::synth_channels_inclusions(&mesh, eta, 11).unwrap(),
        None => CoefficientField::uniform(&mesh, 1.0).unwrap(),
    };
    DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0)).unwrap()
}

fn assert_constant_first_mode(space: &CoarseSpace) {
    for blk in &space.blocks {
        let lmax = blk.eigen.values.last().copied().unwrap();
        assert!(
            blk.eigen.values[0].abs() <= 1e-10 * lmax,
            "λ1 = {}",
            blk.eigen.values[0]
        );
        let v = blk.all_vectors().column(0);
        let (lo, hi) = (v.min(), v.max());
        assert!(
            (hi - lo) <= 1e-8 * hi.abs(),
            "first mode not constant: [{lo}, {hi}]"
        );
    }
}

#[test]
fn every_method_starts_with_the_constant() {
    let sys = system(3, 5, Some(1e4));
    let sel = Selection::uniform(2);
    assert_constant_first_mode(&method_i_space(&sys, &sel).unwrap());
    assert_constant_first_mode(&method_ii_space(&sys, &sel).unwrap());
    let snaps = harmonic_snapshots(&sys).unwrap();
    for mass in [
        SnapshotMass::Boundary,
        SnapshotMass::Full,
        SnapshotMass::Volume,
    ] {
        assert_constant_first_mode(&method_iii_space(&snaps, mass, &sel).unwrap());
    }
}

#[test]
fn homogeneous_neumann_spectrum_matches_independent_solve() {
    let sys = system(2, 6, None);
    let space = method_i_space(&sys, &Selection::uniform(0)).unwrap();
    for i in 0..4 {
        let (a, m, _) = local_forms(&sys, i);
        // M^{-1/2} A M^{-1/2} through the eigendecomposition of M
        let em = SymmetricEigen::new(m.clone());
        let inv_sqrt = &em.eigenvectors
            * DMatrix::from_diagonal(&em.eigenvalues.map(|x| 1.0 / x.sqrt()))
            * em.eigenvectors.transpose();
        let c = &inv_sqrt * &a * &inv_sqrt;
        let mut oracle: Vec<f64> = SymmetricEigen::new((&c + c.transpose()) * 0.5)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        oracle.sort_by(f64::total_cmp);
        let got = &space.blocks[i].eigen.values;
        let scale = oracle.last().unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() <= 1e-9 * scale, "{g} vs {o}");
        }
        assert_eq!(space.blocks[i].l_small, 1);
    }
}

#[test]
fn method_ii_pairs_satisfy_rayleigh_identity() {
    let sys = system(3, 5, Some(1e6));
    let space = method_ii_space(&sys, &Selection::uniform(4)).unwrap();
    for (i, blk) in space.blocks.iter().enumerate() {
        let (a, m, md) = local_forms(&sys, i);
        let b = m + md;
        for l in 0..blk.available() {
            let psi = blk.eigen.vectors.column(l);
            let q = (psi.transpose() * &a * psi)[(0, 0)] / (psi.transpose() * &b * psi)[(0, 0)];
            let lam = blk.eigen.values[l];
            let floor = 1e-12 * blk.eigen.values.last().unwrap();
            assert!(
                (q - lam).abs() <= 1e-8 * lam.abs() + floor,
                "block {i} mode {l}: {q} vs {lam}, max {}",
                blk.eigen.values.last().unwrap()
            );
        }
        assert!(blk.eigen.orthonormality_error(&b, blk.available()) < 1e-8);
        assert!(blk.eigen.max_scaled_residual(&a, &b, blk.available()) < 1e-8);
    }
}

#[test]
fn snapshots_are_harmonic_extensions_of_hats() {
    let sys = system(2, 5, None);
    let snaps = harmonic_snapshots(&sys).unwrap();
    let mesh = sys.mesh();
    assert!(snaps.max_interior_residual() <= 1e-10);
    for (i, blk) in snaps.blocks.iter().enumerate() {
        let local = &mesh.blocks[i];
        assert_eq!(blk.len(), 4 * mesh.fine());
        for col in 0..blk.len() {
            for (c2, &node) in local.boundary_nodes.iter().enumerate() {
                assert_eq!(blk.phi[(node, col)], if c2 == col { 1.0 } else { 0.0 });
            }
        }
        for r in 0..blk.phi.nrows() {
            let s: f64 = blk.phi.row(r).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
        // discrete maximum principle on the right-angle mesh with κ ≡ 1
        assert!(blk.phi.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }
}

#[test]
fn snapshot_residuals_with_contrast() {
    let sys = system(3, 6, Some(1e6));
    let snaps = harmonic_snapshots(&sys).unwrap();
    assert!(snaps.max_interior_residual() <= 1e-10);
    for blk in &snaps.blocks {
        for r in 0..blk.phi.nrows() {
            assert!((blk.phi.row(r).sum() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn method_iii_traces_are_snapshot_coefficients() {
    let sys = system(3, 4, Some(1e4));
    let snaps = harmonic_snapshots(&sys).unwrap();
    let space = method_iii_space(&snaps, SnapshotMass::Boundary, &Selection::uniform(3)).unwrap();
    for (i, blk) in space.blocks.iter().enumerate() {
        let nodes = &sys.mesh().blocks[i].boundary_nodes;
        for l in 0..blk.retained() {
            for (k, &node) in nodes.iter().enumerate() {
                assert_eq!(blk.all_vectors()[(node, l)], blk.eigen.vectors[(k, l)]);
            }
        }
    }
}

#[test]
fn method_iii_eigenvalues_scale_with_penalty_weight() {
    let sys = system(3, 5, Some(1e4));
    let delta = sys.delta;
    let base = harmonic_snapshots_with(&sys, &|s: &Segment| delta / s.h_ij).unwrap();
    let halved = harmonic_snapshots_with(&sys, &|s: &Segment| delta / (2.0 * s.h_ij)).unwrap();
    let sel = Selection::uniform(5);
    let s1 = method_iii_space(&base, SnapshotMass::Boundary, &sel).unwrap();
    let s2 = method_iii_space(&halved, SnapshotMass::Boundary, &sel).unwrap();
    for (b1, b2) in s1.blocks.iter().zip(&s2.blocks) {
        for l in 1..b1.retained() {
            let ratio = b2.eigen.values[l] / b1.eigen.values[l];
            assert!((ratio - 2.0).abs() < 1e-6, "ratio {ratio}");
        }
        // compare eigenspaces past the exact-zero mode
        let n = b1.retained();
        let angle = max_principal_angle(&b1.basis().into_owned(), &b2.basis().into_owned());
        assert!(angle < 1e-8 || n == 0, "angle {angle}");
    }
}

#[test]
fn small_eigenvalue_counts() {
    assert_eq!(
        count_small_eigenvalues(&[0.0, 10.0, 10.0, 20.0, 40.0], 1.0),
        1
    );
    assert_eq!(
        count_small_eigenvalues(&[0.0, 1e-4, 5.0, 10.0, 11.0], 1e4),
        2
    );
    assert_eq!(count_small_eigenvalues(&[1e-20, 1e-18, 5.0, 10.0], 1e4), 2);
    // a gap below √η is not accepted
    assert_eq!(count_small_eigenvalues(&[0.0, 1.0, 50.0, 60.0], 1e6), 1);
    assert_eq!(count_small_eigenvalues(&[], 1.0), 1);

    let sys = system(2, 6, None);
    let space = method_i_space(&sys, &Selection::uniform(0)).unwrap();
    assert!(space.l_small().iter().all(|&n| n == 1));
}

#[test]
fn two_isolated_inclusions_give_two_small_modes() {
    let mesh = PartitionedMesh::build(1, 8).unwrap();
    let eta = 1e6;
    let mut vals = vec![1.0; 64];
    for (gx, gy) in [
        (1, 1),
        (2, 1),
        (1, 2),
        (2, 2),
        (5, 5),
        (6, 5),
        (5, 6),
        (6, 6),
    ] {
        vals[gx + 8 * gy] = eta;
    }
    let field = CoefficientField::from_cells(&mesh, vals).unwrap();
    let sys = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0)).unwrap();
    let space = method_i_space(&sys, &Selection::uniform(0)).unwrap();
    let v = &space.blocks[0].eigen.values;
    assert!(v[1] < 1e-3 * v[2], "{:?}", &v[..4]);
    assert_eq!(space.l_small(), vec![2]);
    assert_eq!(space.dim(), 2);
}

#[test]
fn selection_and_lambda_min() {
    let sys = system(3, 4, Some(1e4));
    let space = method_ii_space(&sys, &Selection::uniform(0)).unwrap();
    assert_eq!(space.dim(), space.l_small().iter().sum::<usize>());
    let wider = space.reselect(&Selection::uniform(3)).unwrap();
    assert_eq!(wider.dim(), space.dim() + 3 * 9);
    let expect = wider
        .blocks
        .iter()
        .map(|b| b.eigen.values[b.retained()])
        .fold(f64::INFINITY, f64::min);
    assert_eq!(wider.lambda_min(), Some(expect));
    assert!(wider.lambda_min().unwrap() >= space.lambda_min().unwrap());

    let per_block = Selection {
        l_add: PerBlock::Each((0..9).collect()),
        l_small: Some(PerBlock::Uniform(1)),
    };
    let varied = space.reselect(&per_block).unwrap();
    for (i, b) in varied.blocks.iter().enumerate() {
        assert_eq!(b.retained(), 1 + i);
    }
    let full = space.reselect(&Selection::full()).unwrap();
    assert_eq!(full.dim(), sys.dim());
    assert_eq!(full.lambda_min(), None);

    match space.reselect(&Selection::uniform(25)) {
        Err(Error::TooManyModes {
            requested,
            available,
            ..
        }) => {
            assert!(requested > available);
            assert_eq!(available, 25);
        }
        other => panic!("expected TooManyModes, got {other:?}"),
    }
    let wrong = Selection {
        l_add: PerBlock::Each(vec![1, 2]),
        l_small: None,
    };
    assert!(matches!(
        space.reselect(&wrong),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn prolong_and_restrict_are_adjoint() {
    let sys = system(3, 4, Some(1e4));
    let space = method_i_space(&sys, &Selection::uniform(2)).unwrap();
    let c: Vec<f64> = (0..space.dim()).map(|k| (k as f64 * 0.37).sin()).collect();
    let v: Vec<f64> = (0..sys.dim()).map(|k| (k as f64 * 0.11).cos()).collect();
    let rc = space.prolong(&c).unwrap();
    let rtv = space.restrict(&v).unwrap();
    let lhs: f64 = rc.iter().zip(&v).map(|(a, b)| a * b).sum();
    let rhs: f64 = c.iter().zip(&rtv).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    assert!(space.prolong(&c[1..]).is_err());
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
    }
    assert!("IV".parse::<Method>().is_err());
}
