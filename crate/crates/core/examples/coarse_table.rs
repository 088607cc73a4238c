//! Error table over the number of added modes, driven by a config string.
//! Pass a method name (I, II, III, III-m) as the first argument.

use gmsfem_dg::experiments::{run_table, table_csv, ExperimentConfig};
use gmsfem_dg::Result;

fn main() -> Result<()> {
    let method = std::env::args().nth(1).unwrap_or_else(|| "I".into());
    let cfg = ExperimentConfig::parse(&format!(
        "[coefficient]\neta = [1e4, 1e6]\n[solver]\nmethod = \"{method}\"\nl_add = [0, 2, 4, 6, 8, 10]\n"
    ))?;
    for table in run_table(&cfg)? {
        print!("{}", table_csv(&cfg, &table, false));
        println!();
    }
    Ok(())
}
