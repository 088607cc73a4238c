//! Round trip a coefficient through the raster text format and solve on it.

use gmsfem_dg::coarse::coarse_solve;
use gmsfem_dg::metrics::error_report;
use gmsfem_dg::spectral::{build_space, Method, Selection};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Raster, Result, Source};

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(5, 6)?;
    // a single diagonal staircase of high conductivity
    let n = mesh.cells_per_side();
    let mut text = format!("{n} {n}\n");
    for row in 0..n {
        let line: Vec<&str> = (0..n)
            .map(|col| {
                if col == row || col == row + 1 {
                    "1e5"
                } else {
                    "1"
                }
            })
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    let raster = Raster::parse(&text)?;
    let path = std::env::temp_dir().join("gmsdg_staircase.txt");
    raster.write(&path)?;
    let field = CoefficientField::from_raster(&Raster::read(&path)?, &mesh)?;
    println!("raster {}x{} -> contrast {:e}", n, n, field.contrast());

    let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
    let u = system.solve_fine()?;
    let base = build_space(&system, Method::II, &Selection::uniform(0))?;
    for l_add in [0, 1, 2, 4] {
        let space = base.reselect(&Selection::uniform(l_add))?;
        let sol = coarse_solve(&system, &space, None)?;
        let r = error_report(&system, &u, &sol.fine)?;
        println!("L_add {l_add}: relative error {:.4e}", r.relative_norm());
    }
    Ok(())
}
