//! Expansion of a fine solution in the Method II eigenbasis: per-block
//! energy as a weighted sum of squared coefficients, and the tail left out
//! by the coarse space.

use gmsfem_dg::coarse::{coarse_solve, energy_expansion, spectral_interpolant};
use gmsfem_dg::metrics::error_report;
use gmsfem_dg::spectral::{build_space, Method, Selection};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Result, Source};

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(6, 6)?;
    let field = CoefficientField::synth_channels_inclusions(&mesh, 1e4, 3)?;
    let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
    let u = system.solve_fine()?;
    let base = build_space(&system, Method::II, &Selection::uniform(0))?;
    for l_add in [0, 2, 4, 8] {
        let space = base.reselect(&Selection::uniform(l_add))?;
        let exp = energy_expansion(&system, &space, &u)?;
        let galerkin = error_report(&system, &u, &coarse_solve(&system, &space, None)?.fine)?;
        let interp = error_report(&system, &u, &spectral_interpolant(&system, &space, &u)?)?;
        println!(
            "L_add {l_add}: tail {:.4e}, identity error {:.1e}, Galerkin energy {:.4e}, interpolant energy {:.4e}",
            exp.tail(),
            exp.identity_error(),
            galerkin.energy,
            interp.energy
        );
    }
    Ok(())
}
