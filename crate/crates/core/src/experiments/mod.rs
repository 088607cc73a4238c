//! Config-driven experiment runs: error tables over the number of added
//! modes, penalty sweeps for the coarse operator, and error versus the
//! smallest left-out eigenvalue. Each run returns plain data; the `write_*`
//! functions turn it into CSV and SVG files.

pub mod config;
pub mod io;
pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::coarse::{coarse_solve, snapshot_reference, CoarseSolution};
use crate::error::{Error, Result};
use crate::fe::{BrokenVector, DGSystem, PenaltyScaling, Source};
use crate::metrics::{error_report, ErrorReport};
use crate::spectral::{
    harmonic_snapshots, method_i_space, method_ii_space, method_iii_space, CoarseSpace, Method,
    PerBlock, Selection, SnapshotSpace,
};

pub use config::{ExperimentConfig, LabeledField};
pub use io::{read_basis, write_basis, SolutionDump};
pub use plot::{Plot, Series};

pub const TABLE_COLUMNS: &str = "L_add,dim,interface,interior,total,energy,lambda_min";
pub const SWEEP_COLUMNS: &str = "L_add,scaling,interface,interior,total,energy";
pub const LAMBDA_COLUMNS: &str = "label,eta,L_add,inv_lambda_min,total";

#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub assemble: Duration,
    pub fine_solve: Duration,
    pub eigen: Duration,
    pub coarse: Duration,
}

/// Everything shared by the rows of one experiment on one field.
pub struct Prepared {
    pub label: String,
    pub eta: f64,
    pub system: DGSystem,
    pub reference: BrokenVector,
    /// Space with `L_add = 0`, to be reselected per row.
    pub space: CoarseSpace,
    pub snapshots: Option<SnapshotSpace>,
    pub timings: Timings,
}

impl ExperimentConfig {
    pub fn selection(&self, l_add: usize) -> Selection {
        Selection {
            l_add: PerBlock::Uniform(l_add),
            l_small: self.solver.l_small.map(PerBlock::Uniform),
        }
    }
}

/// Assemble, solve the fine problem and the local eigenproblems for one field.
pub fn prepare(cfg: &ExperimentConfig, field: &LabeledField) -> Result<Prepared> {
    let mesh = cfg.build_mesh()?;
    let t = Instant::now();
    let system = DGSystem::assemble(
        &mesh,
        &field.field,
        cfg.solver.delta,
        Source::Constant(cfg.solver.source),
    )?;
    let assemble = t.elapsed();
    let t = Instant::now();
    let reference = system.solve_fine()?;
    let fine_solve = t.elapsed();
    let t = Instant::now();
    let sel = cfg.selection(0);
    let (space, snapshots) = match cfg.solver.method {
        Method::I => (method_i_space(&system, &sel)?, None),
        Method::II => (method_ii_space(&system, &sel)?, None),
        Method::III | Method::IIIm => {
            let snaps = harmonic_snapshots(&system)?;
            (
                method_iii_space(&snaps, cfg.snapshot_mass(), &sel)?,
                Some(snaps),
            )
        }
    };
    let eigen = t.elapsed();
    Ok(Prepared {
        label: field.label.clone(),
        eta: field.eta,
        system,
        reference,
        space,
        snapshots,
        timings: Timings {
            assemble,
            fine_solve,
            eigen,
            coarse: Duration::ZERO,
        },
    })
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub l_add: usize,
    pub dim: usize,
    pub report: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub method: Method,
    pub label: String,
    pub eta: f64,
    pub rows: Vec<TableRow>,
    /// Errors against the Galerkin projection onto the whole snapshot space
    /// (snapshot methods only).
    pub snapshot_rows: Option<Vec<TableRow>>,
    pub timings: Timings,
}

/// One table per field of the configuration.
pub fn run_table(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    cfg.fields(&mesh)?
        .iter()
        .map(|f| table_for(cfg, &prepare(cfg, f)?))
        .collect()
}

pub fn table_for(cfg: &ExperimentConfig, p: &Prepared) -> Result<ResultTable> {
    let t = Instant::now();
    let snap_ref = match &p.snapshots {
        Some(s) => {
            Some(snapshot_reference(&p.system, s).map_err(|e| e.in_stage("snapshot reference"))?)
        }
        None => None,
    };
    let rows: Vec<(TableRow, Option<TableRow>)> = cfg
        .solver
        .l_add
        .par_iter()
        .map(|&l_add| {
            let space = p.space.reselect(&cfg.selection(l_add))?;
            let sol = coarse_solve(&p.system, &space, None)?;
            let lambda = space.lambda_min();
            let report = error_report(&p.system, &p.reference, &sol.fine)?.with_lambda_min(lambda);
            let row = TableRow {
                l_add,
                dim: space.dim(),
                report,
            };
            let snap = match &snap_ref {
                Some(r) => Some(TableRow {
                    report: error_report(&p.system, r, &sol.fine)?.with_lambda_min(lambda),
                    ..row.clone()
                }),
                None => None,
            };
            Ok((row, snap))
        })
        .collect::<Result<_>>()?;
    let mut timings = p.timings;
    timings.coarse = t.elapsed();
    let (rows, snaps): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(ResultTable {
        method: cfg.solver.method,
        label: p.label.clone(),
        eta: p.eta,
        rows,
        snapshot_rows: snaps.into_iter().collect(),
        timings,
    })
}

fn number(v: f64) -> String {
    format!("{v:.10e}")
}

fn table_rows_csv(s: &mut String, rows: &[TableRow]) {
    s.push_str(TABLE_COLUMNS);
    s.push('\n');
    for r in rows {
        let e = &r.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.l_add,
            r.dim,
            number(e.interface),
            number(e.interior),
            number(e.total),
            number(e.energy),
            e.lambda_min.map_or_else(String::new, number)
        );
    }
}

/// CSV text of a table. All error columns are squared norms.
pub fn table_csv(cfg: &ExperimentConfig, table: &ResultTable, against_snapshots: bool) -> String {
    let mut s = cfg.header("table");
    let _ = writeln!(s, "# coefficient {} (contrast {})", table.label, table.eta);
    let _ = writeln!(
        s,
        "# reference: {}",
        if against_snapshots {
            "snapshot-space projection"
        } else {
            "fine solution"
        }
    );
    s.push_str("# values are squared norms; total = interior + interface (unit interface weight); energy = a_DG(e, e)\n");
    let rows = if against_snapshots {
        table.snapshot_rows.as_deref().unwrap_or(&[])
    } else {
        &table.rows
    };
    table_rows_csv(&mut s, rows);
    s
}

fn file_stem(kind: &str, method: Method, label: &str) -> String {
    format!("{kind}_{}_{label}", method.as_str())
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

/// Write the CSV (and snapshot-reference CSV) plus an error-decay plot.
pub fn write_table(
    cfg: &ExperimentConfig,
    table: &ResultTable,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let stem = file_stem("table", table.method, &table.label);
    let mut out = vec![write_file(
        dir,
        &format!("{stem}.csv"),
        &table_csv(cfg, table, false),
    )?];
    if table.snapshot_rows.is_some() {
        out.push(write_file(
            dir,
            &format!("{stem}_snapshot.csv"),
            &table_csv(cfg, table, true),
        )?);
    }
    let pts = |f: fn(&ErrorReport) -> f64| {
        table
            .rows
            .iter()
            .map(|r| (r.l_add as f64, f(&r.report)))
            .collect()
    };
    let plot = Plot::new(
        &format!("Method {} ({})", table.method, table.label),
        "L_add",
        "squared error",
    )
    .log_y(true)
    .with_series("total", pts(|e| e.total))
    .with_series("interior", pts(|e| e.interior))
    .with_series("interface", pts(|e| e.interface))
    .with_series("energy", pts(|e| e.energy));
    out.push(write_file(dir, &format!("{stem}.svg"), &plot.to_svg())?);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub l_add: usize,
    pub scaling: f64,
    pub report: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub method: Method,
    pub label: String,
    pub eta: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, l_add: usize, scaling: f64) -> Option<&ErrorReport> {
        self.rows
            .iter()
            .find(|r| r.l_add == l_add && r.scaling == scaling)
            .map(|r| &r.report)
    }
}

/// Coarse solves with a constant penalty factor in place of `δ/h_ij`, for
/// every `(L_add, scaling)` pair; errors are against the fine `δ/h_ij`
/// reference.
pub fn run_penalty_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    if cfg.sweep.scalings.is_empty() {
        return Err(Error::Config("sweep.scalings must not be empty".into()));
    }
    let mesh = cfg.build_mesh()?;
    cfg.fields(&mesh)?
        .iter()
        .map(|f| sweep_for(cfg, &prepare(cfg, f)?))
        .collect()
}

pub fn sweep_for(cfg: &ExperimentConfig, p: &Prepared) -> Result<SweepResult> {
    let pairs: Vec<(usize, f64)> = cfg
        .solver
        .l_add
        .iter()
        .flat_map(|&l| cfg.sweep.scalings.iter().map(move |&s| (l, s)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(l_add, scaling)| {
            let space = p.space.reselect(&cfg.selection(l_add))?;
            let sol = coarse_solve(&p.system, &space, Some(PenaltyScaling::Uniform(scaling)))?;
            let report = error_report(&p.system, &p.reference, &sol.fine)?
                .with_lambda_min(space.lambda_min());
            Ok(SweepRow {
                l_add,
                scaling,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        method: cfg.solver.method,
        label: p.label.clone(),
        eta: p.eta,
        rows,
    })
}

pub fn sweep_csv(cfg: &ExperimentConfig, sweep: &SweepResult) -> String {
    let mut s = cfg.header("penalty-sweep");
    let _ = writeln!(s, "# coefficient {} (contrast {})", sweep.label, sweep.eta);
    s.push_str("# scaling replaces delta/h_ij in the coarse operator; values are squared norms\n");
    s.push_str(SWEEP_COLUMNS);
    s.push('\n');
    for r in &sweep.rows {
        let e = &r.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.l_add,
            r.scaling,
            number(e.interface),
            number(e.interior),
            number(e.total),
            number(e.energy)
        );
    }
    s
}

/// Two panels: interior and interface error against the scaling, one curve
/// per `L_add`.
pub fn sweep_svg(sweep: &SweepResult) -> String {
    let mut interior = Plot::new("interior error", "penalty scaling", "squared error").log_y(true);
    let mut interface =
        Plot::new("interface error", "penalty scaling", "squared error").log_y(true);
    let mut l_adds: Vec<usize> = sweep.rows.iter().map(|r| r.l_add).collect();
    l_adds.dedup();
    for l in l_adds {
        let rows: Vec<&SweepRow> = sweep.rows.iter().filter(|r| r.l_add == l).collect();
        let name = format!("L_add = {l}");
        interior = interior.with_series(
            &name,
            rows.iter()
                .map(|r| (r.scaling, r.report.interior))
                .collect(),
        );
        interface = interface.with_series(
            &name,
            rows.iter()
                .map(|r| (r.scaling, r.report.interface))
                .collect(),
        );
    }
    plot::render(&[interior, interface])
}

pub fn write_sweep(
    cfg: &ExperimentConfig,
    sweep: &SweepResult,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let stem = file_stem("sweep", sweep.method, &sweep.label);
    Ok(vec![
        write_file(dir, &format!("{stem}.csv"), &sweep_csv(cfg, sweep))?,
        write_file(dir, &format!("{stem}.svg"), &sweep_svg(sweep))?,
    ])
}

/// Pearson correlation; `None` for fewer than two points or a constant
/// coordinate.
pub fn pearson(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + x / n as f64, b + y / n as f64)
    });
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone)]
pub struct LambdaCurve {
    pub label: String,
    pub eta: f64,
    /// `(L_add, 1/λ_min, total)`; rows without a left-out eigenvalue are
    /// dropped.
    pub points: Vec<(usize, f64, f64)>,
    pub correlation: Option<f64>,
}

impl LambdaCurve {
    pub fn from_table(table: &ResultTable) -> Self {
        let points: Vec<(usize, f64, f64)> = table
            .rows
            .iter()
            .filter_map(|r| Some((r.l_add, 1.0 / r.report.lambda_min?, r.report.total)))
            .collect();
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
        Self {
            label: table.label.clone(),
            eta: table.eta,
            correlation: pearson(&xy),
            points,
        }
    }
}

/// Total error against `1/λ_min` for every field of the configuration.
pub fn run_lambda_plot(cfg: &ExperimentConfig) -> Result<Vec<LambdaCurve>> {
    Ok(run_table(cfg)?
        .iter()
        .map(LambdaCurve::from_table)
        .collect())
}

pub fn lambda_csv(cfg: &ExperimentConfig, curves: &[LambdaCurve]) -> String {
    let mut s = cfg.header("lambda-plot");
    for c in curves {
        match c.correlation {
            Some(r) => {
                let _ = writeln!(s, "# pearson {} {}", c.label, number(r));
            }
            None => {
                let _ = writeln!(s, "# pearson {} undefined", c.label);
            }
        }
    }
    s.push_str(LAMBDA_COLUMNS);
    s.push('\n');
    for c in curves {
        for (l, x, y) in &c.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.label,
                c.eta,
                l,
                number(*x),
                number(*y)
            );
        }
    }
    s
}

pub fn lambda_svg(method: Method, curves: &[LambdaCurve]) -> String {
    let mut p = Plot::new(
        &format!("Method {method}: total error vs 1/lambda_min"),
        "1/lambda_min",
        "total squared error",
    )
    .log_x(true)
    .log_y(true);
    for c in curves {
        p = p.with_series(&c.label, c.points.iter().map(|q| (q.1, q.2)).collect());
    }
    p.to_svg()
}

pub fn write_lambda_plot(
    cfg: &ExperimentConfig,
    curves: &[LambdaCurve],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let stem = format!("lambda_{}", cfg.solver.method.as_str());
    Ok(vec![
        write_file(dir, &format!("{stem}.csv"), &lambda_csv(cfg, curves))?,
        write_file(
            dir,
            &format!("{stem}.svg"),
            &lambda_svg(cfg.solver.method, curves),
        )?,
    ])
}

/// Fine and coarse solution for the first field and the given `L_add`.
pub struct SolveOutcome {
    pub prepared: Prepared,
    pub coarse: CoarseSolution,
    pub report: ErrorReport,
    pub l_add: usize,
}

pub fn run_solve(cfg: &ExperimentConfig, l_add: usize) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let field = cfg
        .fields(&mesh)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("no coefficient configured".into()))?;
    let prepared = prepare(cfg, &field)?;
    let space = prepared.space.reselect(&cfg.selection(l_add))?;
    let coarse = coarse_solve(&prepared.system, &space, None)?;
    let report = error_report(&prepared.system, &prepared.reference, &coarse.fine)?
        .with_lambda_min(space.lambda_min());
    Ok(SolveOutcome {
        prepared,
        coarse,
        report,
        l_add,
    })
}

pub fn write_solutions(
    cfg: &ExperimentConfig,
    out: &SolveOutcome,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mesh = out.prepared.system.mesh();
    let fine = SolutionDump::new(mesh, None, None, out.prepared.reference.as_slice())?;
    let coarse = SolutionDump::new(
        mesh,
        Some(out.coarse.method),
        Some(out.l_add),
        out.coarse.fine.as_slice(),
    )?;
    let label = &out.prepared.label;
    Ok(vec![
        write_file(
            dir,
            &format!("solution_fine_{label}.txt"),
            &fine.to_text(&cfg.header("solution")),
        )?,
        write_file(
            dir,
            &format!(
                "{}.txt",
                file_stem(
                    "solution",
                    out.coarse.method,
                    &format!("{label}_L{}", out.l_add)
                )
            ),
            &coarse.to_text(&cfg.header("solution")),
        )?,
    ])
}

/// Build the coarse space for the first field and write it to a basis file.
pub fn run_dump_basis(cfg: &ExperimentConfig, l_add: usize, dir: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let field = cfg
        .fields(&mesh)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("no coefficient configured".into()))?;
    let p = prepare(cfg, &field)?;
    let space = p.space.reselect(&cfg.selection(l_add))?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!(
        "{}.txt",
        file_stem("basis", space.method, &format!("{}_L{l_add}", p.label))
    ));
    write_basis(&space, p.system.mesh(), &path, &cfg.header("basis"))?;
    Ok(path)
}
