//! Coarse operator with a constant penalty factor in place of delta/h.

use gmsfem_dg::experiments::{run_penalty_sweep, ExperimentConfig};
use gmsfem_dg::Result;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::parse(
        "coefficient.eta = [1e4]\nsolver.l_add = [0, 4, 10]\nsweep.scalings = [40.0, 70.0, 100.0, 200.0, 400.0]\n",
    )?;
    for sweep in run_penalty_sweep(&cfg)? {
        println!(
            "{:>6} {:>8} {:>12} {:>12}",
            "L_add", "scaling", "interior", "interface"
        );
        for r in &sweep.rows {
            println!(
                "{:>6} {:>8} {:>12.4e} {:>12.4e}",
                r.l_add, r.scaling, r.report.interior, r.report.interface
            );
        }
    }
    Ok(())
}
