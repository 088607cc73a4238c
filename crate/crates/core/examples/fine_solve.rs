//! Fine-scale SIPG reference solve on a high-contrast channel field.

use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Result, Source};

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(10, 10)?;
    let field = CoefficientField::synth_channels_inclusions(&mesh, 1e4, 2024)?;
    let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
    let u = system.solve_fine()?;

    let max = u.as_slice().iter().cloned().fold(f64::MIN, f64::max);
    println!(
        "blocks {}x{}, h = {}, dofs {}",
        mesh.coarse(),
        mesh.coarse(),
        mesh.h(),
        system.dim()
    );
    println!("contrast {:e}", system.contrast());
    println!("max u = {max:.6e}");
    println!(
        "|u|^2 broken (delta penalty) = {:.6e}",
        system.broken_norm_sq(u.as_slice())
    );
    println!(
        "|u|^2 broken (unit penalty)  = {:.6e}",
        system.unit_norm_sq(u.as_slice())
    );
    println!(
        "a_DG(u, u) = {:.6e}",
        system.a_dg(u.as_slice(), u.as_slice())
    );
    Ok(())
}
