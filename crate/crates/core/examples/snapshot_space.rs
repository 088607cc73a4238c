//! Harmonic snapshots and the three mass choices of the snapshot method.

use gmsfem_dg::coarse::{coarse_solve, snapshot_reference};
use gmsfem_dg::metrics::error_report;
use gmsfem_dg::spectral::{harmonic_snapshots, method_iii_space, Selection, SnapshotMass};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Result, Source};

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(6, 8)?;
    let field = CoefficientField::synth_channels_inclusions(&mesh, 1e4, 7)?;
    let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
    let snaps = harmonic_snapshots(&system)?;
    println!(
        "snapshots per block {}, max interior residual {:.2e}",
        snaps.blocks[0].len(),
        snaps.max_interior_residual()
    );

    let u = system.solve_fine()?;
    let u_snap = snapshot_reference(&system, &snaps)?;
    let r = error_report(&system, &u, &u_snap)?;
    println!("snapshot space vs fine: relative {:.4e}", r.relative);

    for mass in [
        SnapshotMass::Boundary,
        SnapshotMass::Full,
        SnapshotMass::Volume,
    ] {
        println!("mass {mass:?}");
        for l_add in [0, 2, 4, 8] {
            let space = method_iii_space(&snaps, mass, &Selection::uniform(l_add))?;
            let sol = coarse_solve(&system, &space, None)?;
            let e = error_report(&system, &u_snap, &sol.fine)?;
            println!(
                "  L_add {l_add}: dim {:4}, total vs snapshot ref {:.4e}",
                space.dim(),
                e.total
            );
        }
    }
    Ok(())
}
