//! Dual time iteration counts on the Lax test over `theta`, `N` and `alpha`.

use std::path::Path;
use std::time::Instant;

use isoflow::stepping::{EulerModel, Mode, Stepper, ThetaRule};

use crate::config::{RunConfig, Scenario};
use crate::error::{CliError, CliResult};
use crate::scenario::lax_mesh;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub thetas: Vec<ThetaRule>,
    pub cells: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Wall clock budget per entry in seconds; entries over it are skipped.
    pub budget: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            thetas: vec![
                ThetaRule::Fixed(0.9),
                ThetaRule::Fixed(0.1),
                ThetaRule::SmallCellRatio,
            ],
            cells: vec![100, 200, 400],
            alphas: vec![1e-2, 1e-4, 1e-6],
            budget: 120.0,
        }
    }
}

impl std::str::FromStr for SweepSpec {
    type Err = CliError;

    /// `theta=0.9,alpha;N=100,200;alpha=1e-2,1e-4;budget=60`, any subset.
    fn from_str(s: &str) -> CliResult<Self> {
        let mut spec = SweepSpec::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                CliError::Config(format!("sweep: expected key=values, got {part:?}"))
            })?;
            let items = v.split(',').map(str::trim);
            let bad = |x: &str| CliError::Config(format!("sweep {k}: cannot parse {x:?}"));
            match k.trim() {
                "theta" => spec.thetas = items.map(|x| x.parse()).collect::<Result<_, _>>()?,
                "N" | "cells" => {
                    spec.cells = items
                        .map(|x| x.parse().map_err(|_| bad(x)))
                        .collect::<CliResult<_>>()?
                }
                "alpha" => {
                    spec.alphas = items
                        .map(|x| x.parse().map_err(|_| bad(x)))
                        .collect::<CliResult<_>>()?
                }
                "budget" => spec.budget = v.trim().parse().map_err(|_| bad(v))?,
                other => return Err(CliError::Config(format!("sweep: unknown key {other:?}"))),
            }
        }
        if spec.thetas.is_empty() || spec.cells.is_empty() || spec.alphas.is_empty() {
            return Err(CliError::Config("sweep: empty axis".into()));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: ThetaRule,
    pub cells: usize,
    /// Average dual iterations per step for each alpha; `None` if over budget.
    pub averages: Vec<Option<f64>>,
}

/// Average dual time iterations per step for one Lax run, or `None` if the
/// run exceeds `budget` seconds or the dual iteration cap.
pub fn lax_average_iterations(
    base: &RunConfig,
    cells: usize,
    alpha: f64,
    theta: ThetaRule,
    budget: f64,
) -> CliResult<Option<f64>> {
    let mut cfg = base.clone();
    cfg.scenario = Scenario::Lax;
    cfg.cells = cells;
    cfg.alpha = alpha;
    cfg.theta_neighbors = theta;
    cfg.mode = Mode::MixedEi;
    cfg.validate()?;
    let mut mesh = lax_mesh(&cfg)?;
    let mut stepper = Stepper::new(EulerModel::new(cfg.gamma), cfg.step_config());
    let clock = Instant::now();
    while stepper.time < cfg.t_end {
        match stepper.step(&mut mesh, cfg.t_end) {
            Ok(_) => {}
            Err(isoflow::Error::IterationCapReached { .. }) => return Ok(None),
            Err(source) => {
                return Err(CliError::Solver {
                    step: stepper.steps + 1,
                    time: stepper.time,
                    source,
                })
            }
        }
        if clock.elapsed().as_secs_f64() > budget {
            return Ok(None);
        }
    }
    Ok(Some(stepper.local_iterations as f64 / stepper.steps as f64))
}

pub fn sweep(base: &RunConfig, spec: &SweepSpec) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &theta in &spec.thetas {
        for &cells in &spec.cells {
            let averages = spec
                .alphas
                .iter()
                .map(|&a| lax_average_iterations(base, cells, a, theta, spec.budget))
                .collect::<CliResult<_>>()?;
            rows.push(SweepRow {
                theta,
                cells,
                averages,
            });
        }
    }
    Ok(rows)
}

fn theta_label(t: ThetaRule) -> String {
    match t {
        ThetaRule::Fixed(v) => v.to_string(),
        ThetaRule::SmallCellRatio => "alpha".into(),
    }
}

/// Writes the table with one row per `(theta, N)` and one column per alpha;
/// skipped entries are `*`.
pub fn write_sweep(spec: &SweepSpec, rows: &[SweepRow], path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["theta_neighbors".to_string(), "N".to_string()];
    header.extend(spec.alphas.iter().map(|a| format!("alpha={a:e}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![theta_label(r.theta), r.cells.to_string()];
        rec.extend(r.averages.iter().map(|v| match v {
            Some(x) => format!("{}", x.round() as u64),
            None => "*".into(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_specs() {
        let s: SweepSpec = "theta=0.9,alpha; N=100; budget=5".parse().unwrap();
        assert_eq!(
            s.thetas,
            vec![ThetaRule::Fixed(0.9), ThetaRule::SmallCellRatio]
        );
        assert_eq!(s.cells, vec![100]);
        assert_eq!(s.alphas.len(), 3);
        assert_eq!(s.budget, 5.0);
        assert!("N=".parse::<SweepSpec>().is_err());
        assert!("gamma=1".parse::<SweepSpec>().is_err());
    }
}
