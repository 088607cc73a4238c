//! Offline: build a coarse basis once and store it. Online: reload it and
//! solve cheaply for several right-hand sides.

use std::time::Instant;

use gmsfem_dg::coarse::coarse_solve;
use gmsfem_dg::experiments::{read_basis, write_basis};
use gmsfem_dg::metrics::error_report;
use gmsfem_dg::spectral::{build_space, Method, Selection};
use gmsfem_dg::{CoefficientField, DGSystem, PartitionedMesh, Result, Source};

type SourceFn = dyn Fn(f64, f64) -> f64 + Sync;

fn main() -> Result<()> {
    let mesh = PartitionedMesh::build(8, 8)?;
    let field = CoefficientField::synth_channels_inclusions(&mesh, 1e6, 11)?;
    let path = std::env::temp_dir().join("gmsdg_basis.txt");

    let t = Instant::now();
    let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Constant(1.0))?;
    let space = build_space(&system, Method::II, &Selection::uniform(6))?;
    write_basis(&space, &mesh, &path, "# offline basis")?;
    println!("offline: dim {} in {:.2?}", space.dim(), t.elapsed());

    let space = read_basis(&path, &mesh)?;
    let sources: [(&str, &SourceFn); 3] = [
        ("1", &|_, _| 1.0),
        ("x - y", &|x, y| x - y),
        ("bump", &|x, y| {
            (-40.0 * ((x - 0.3).powi(2) + (y - 0.6).powi(2))).exp()
        }),
    ];
    for (name, f) in sources {
        let system = DGSystem::assemble(&mesh, &field, 4.0, Source::Function(f))?;
        let t = Instant::now();
        let sol = coarse_solve(&system, &space, None)?;
        let online = t.elapsed();
        let r = error_report(&system, &system.solve_fine()?, &sol.fine)?;
        println!(
            "online f = {name}: {:.2?}, relative error {:.4e}",
            online,
            r.relative_norm()
        );
    }
    Ok(())
}
