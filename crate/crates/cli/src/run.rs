//! Time loop, snapshots and metrics.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use isoflow::eos::{EosModel, Phase};
use isoflow::mesh::{Cell, Mesh};
use isoflow::riemann_classical::euler::GasState;
use isoflow::riemann_classical::PhaseState;
use isoflow::stepping::{
    absolute_totals, conservation_drift, EulerModel, Model, Stepper, TwoPhaseModel,
};

use crate::config::{RunConfig, Scenario};
use crate::error::{CliError, CliResult};
use crate::scenario::{exact_reference, lax_mesh, two_phase_mesh};

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub x: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    pub phase: Phase,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CreationLog {
    pub step: usize,
    pub time: f64,
    pub kind: &'static str,
    pub position: f64,
    pub width: f64,
    pub w_left: f64,
    pub w_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub local_iterations: usize,
    /// Steps that had at least one implicit block.
    pub block_steps: usize,
    pub max_dual_residual: f64,
    pub wall_seconds: f64,
    pub creations: Vec<CreationLog>,
    /// Relative conservation drift per conserved component.
    pub drift: Vec<f64>,
    pub rows: Vec<Row>,
    pub snapshot_times: Vec<f64>,
}

impl RunSummary {
    /// Local iterations per step with an implicit block.
    pub fn average_local_iterations(&self) -> f64 {
        if self.block_steps == 0 {
            0.0
        } else {
            self.local_iterations as f64 / self.block_steps as f64
        }
    }
}

fn two_phase_row(cell: &Cell<2>, eos: &EosModel) -> CliResult<Row> {
    let s = PhaseState::from_conserved(cell.state, cell.phase)?;
    Ok(Row {
        x: cell.center(),
        rho: s.rho,
        u: s.u,
        p: s.pressure(eos)?,
        phase: cell.phase,
        width: cell.width(),
    })
}

fn euler_row(cell: &Cell<3>, gamma: f64) -> CliResult<Row> {
    let s = GasState::from_conserved(cell.state, gamma)?;
    Ok(Row {
        x: cell.center(),
        rho: s.rho,
        u: s.u,
        p: s.p,
        phase: cell.phase,
        width: cell.width(),
    })
}

/// Runs the configured scenario. With `out` set, writes the snapshot
/// files, `final.csv` and `metrics.txt` there.
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> CliResult<RunSummary> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    }
    let summary = match cfg.scenario {
        Scenario::Lax => {
            let model = EulerModel::new(cfg.gamma);
            let g = cfg.gamma;
            simulate(cfg, lax_mesh(cfg)?, model, |c| euler_row(c, g), out)?
        }
        _ => {
            let eos = EosModel::new(cfg.eos)?;
            let model = TwoPhaseModel::new(eos);
            simulate(
                cfg,
                two_phase_mesh(cfg, &eos)?,
                model,
                |c| two_phase_row(c, &eos),
                out,
            )?
        }
    };
    if let Some(dir) = out {
        write_final(cfg, &summary, &dir.join("final.csv"))?;
        write_metrics(cfg, &summary, &dir.join("metrics.txt"))?;
    }
    Ok(summary)
}

fn rows<const N: usize, F>(mesh: &Mesh<N>, row: &F) -> CliResult<Vec<Row>>
where
    F: Fn(&Cell<N>) -> CliResult<Row>,
{
    mesh.cells().iter().map(row).collect()
}

fn simulate<const N: usize, M, F>(
    cfg: &RunConfig,
    mut mesh: Mesh<N>,
    model: M,
    row: F,
    out: Option<&Path>,
) -> CliResult<RunSummary>
where
    M: Model<N>,
    F: Fn(&Cell<N>) -> CliResult<Row>,
{
    let initial = mesh.totals();
    let scale = absolute_totals(&mesh);
    let mut stepper = Stepper::new(model, cfg.step_config());
    let mut snapshot = 0;
    let mut snapshot_times = Vec::new();
    let mut next_snapshot = 0.0;
    let mut creations = Vec::new();
    let mut block_steps = 0;
    let mut max_dual_residual: f64 = 0.0;
    let mut wall = 0.0;

    let mut take_snapshot =
        |mesh: &Mesh<N>, t: f64, snapshot: &mut usize, next: &mut f64| -> CliResult<()> {
            if let Some(dir) = out {
                write_rows(
                    &rows(mesh, &row)?,
                    &dir.join(format!("snapshot_{}.csv", *snapshot)),
                    None,
                )?;
            }
            snapshot_times.push(t);
            *snapshot += 1;
            *next = cfg.t_end * *snapshot as f64 / cfg.snapshots.max(1) as f64;
            Ok(())
        };
    take_snapshot(&mesh, 0.0, &mut snapshot, &mut next_snapshot)?;

    while stepper.time < cfg.t_end {
        let clock = Instant::now();
        let report = stepper
            .step(&mut mesh, cfg.t_end)
            .map_err(|source| CliError::Solver {
                step: stepper.steps + 1,
                time: stepper.time,
                source,
            })?;
        wall += clock.elapsed().as_secs_f64();
        if report.implicit_blocks > 0 {
            block_steps += 1;
        }
        max_dual_residual = max_dual_residual.max(report.dual_residual);
        for c in &report.creations {
            creations.push(CreationLog {
                step: stepper.steps,
                time: stepper.time,
                kind: c.event.kind.name(),
                position: c.position,
                width: c.width,
                w_left: c.event.w_left(),
                w_right: c.event.w_right(),
            });
        }
        // A long step may pass several marks; each still gets its file.
        while stepper.time >= next_snapshot && snapshot <= cfg.snapshots {
            take_snapshot(&mesh, stepper.time, &mut snapshot, &mut next_snapshot)?;
        }
    }

    let drift =
        conservation_drift(&initial, &mesh.totals(), &stepper.boundary_inflow, &scale).to_vec();
    Ok(RunSummary {
        steps: stepper.steps,
        final_time: stepper.time,
        local_iterations: stepper.local_iterations,
        block_steps,
        max_dual_residual,
        wall_seconds: wall,
        creations,
        drift,
        rows: rows(&mesh, &row)?,
        snapshot_times,
    })
}

fn phase_tag(p: Phase) -> &'static str {
    p.name()
}

fn write_rows(rows: &[Row], path: &Path, exact: Option<&[[f64; 3]]>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x", "rho", "u", "p", "phase", "cell_width"];
    if exact.is_some() {
        header.extend(["exact_rho", "exact_u", "exact_p"]);
    }
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![
            format!("{:.12e}", r.x),
            format!("{:.12e}", r.rho),
            format!("{:.12e}", r.u),
            format!("{:.12e}", r.p),
            phase_tag(r.phase).to_string(),
            format!("{:.12e}", r.width),
        ];
        if let Some(ex) = exact {
            rec.extend(ex[i].iter().map(|v| format!("{v:.12e}")));
        }
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(())
}

fn write_final(cfg: &RunConfig, s: &RunSummary, path: &Path) -> CliResult<()> {
    let xs: Vec<f64> = s.rows.iter().map(|r| r.x).collect();
    let exact = exact_reference(cfg, s.final_time, &xs)?;
    write_rows(&s.rows, path, Some(&exact))
}

/// `key = value` metrics text.
pub fn metrics_text(cfg: &RunConfig, s: &RunSummary) -> String {
    let mut m = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(m, "{k} = {v}");
    };
    kv("scenario", cfg.scenario.name().into());
    kv("mode", cfg.mode.name().into());
    kv("cells", cfg.cells.to_string());
    kv("cfl", cfg.cfl.to_string());
    kv("t_end", format!("{:e}", cfg.t_end));
    kv("final_time", format!("{:e}", s.final_time));
    kv("steps", s.steps.to_string());
    kv("local_iterations", s.local_iterations.to_string());
    kv("implicit_steps", s.block_steps.to_string());
    kv(
        "average_local_iterations",
        format!("{:.3}", s.average_local_iterations()),
    );
    kv("max_dual_residual", format!("{:e}", s.max_dual_residual));
    kv("wall_seconds", format!("{:.3}", s.wall_seconds));
    let names = ["mass", "momentum", "energy"];
    for (k, d) in s.drift.iter().enumerate() {
        kv(&format!("drift_{}", names[k]), format!("{d:e}"));
    }
    kv("creation_events", s.creations.len().to_string());
    for (i, c) in s.creations.iter().enumerate() {
        kv(
            &format!("creation_{i}"),
            format!(
                "{} step={} t={:e} x={:e} width={:e} w_left={:e} w_right={:e}",
                c.kind, c.step, c.time, c.position, c.width, c.w_left, c.w_right
            ),
        );
    }
    for (i, t) in s.snapshot_times.iter().enumerate() {
        kv(&format!("snapshot_{i}_time"), format!("{t:e}"));
    }
    m
}

fn write_metrics(cfg: &RunConfig, s: &RunSummary, path: &Path) -> CliResult<()> {
    std::fs::write(path, metrics_text(cfg, s))
        .map_err(|e| CliError::Io(path.display().to_string(), e))
}
