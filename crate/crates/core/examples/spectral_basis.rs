//! Local eigenproblems of Methods I and II: leading eigenvalues of a few
//! blocks and the detected number of small eigenvalues.

use gmsfem_dg::spectral::{build_space, Method, Selection};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Result, Source};

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(10, 10)?;
    for eta in [1e4, 1e6] {
        let field = CoefficientField::synth_channels_inclusions(&mesh, eta, 2024)?;
        let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
        for method in [Method::I, Method::II] {
            let space = build_space(&system, method, &Selection::uniform(4))?;
            println!(
                "eta {eta:e}, method {method}: dim {}, lambda_min {:.4e}",
                space.dim(),
                space.lambda_min().unwrap_or(f64::NAN)
            );
            for block in [0, 44, 99] {
                let b = &space.blocks[block];
                let head: Vec<String> = b
                    .eigen
                    .values
                    .iter()
                    .take(6)
                    .map(|v| format!("{v:.3e}"))
                    .collect();
                println!(
                    "  block {block:2}: L_small {} | {}",
                    b.l_small,
                    head.join(" ")
                );
            }
        }
    }
    Ok(())
}
