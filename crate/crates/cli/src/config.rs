//! Run configuration: scenario defaults, a flat `key = value` file format
//! and command line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use isoflow::eos::{EosParams, Phase};
use isoflow::stepping::{Mode, StepConfig, ThetaRule};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Lax,
    Cavitation,
    Nucleation,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lax => "lax",
            Scenario::Cavitation => "cavitation",
            Scenario::Nucleation => "nucleation",
            Scenario::Custom => "custom",
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "lax" => Ok(Scenario::Lax),
            "cavitation" => Ok(Scenario::Cavitation),
            "nucleation" => Ok(Scenario::Nucleation),
            "custom" => Ok(Scenario::Custom),
            other => Err(CliError::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Initial state of one side of a two-phase Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideState {
    pub p: f64,
    pub u: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub domain: (f64, f64),
    pub cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub mode: Mode,
    pub theta_neighbors: ThetaRule,
    pub theta_small: ThetaRule,
    pub tol_neighbors: f64,
    pub tol_small: f64,
    pub max_dual_iterations: usize,
    pub stall_window: usize,
    /// Snapshot intervals over `[0, t_end]`.
    pub snapshots: usize,
    pub out: PathBuf,
    pub eos: EosParams,
    pub left: SideState,
    pub right: SideState,
    pub discontinuity: f64,
    /// Lax test: width of the small cell over the regular width.
    pub alpha: f64,
    pub gamma: f64,
    /// Lax test: primitive `(rho, u, p)` on each side.
    pub lax_left: [f64; 3],
    pub lax_right: [f64; 3],
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        let eos = EosParams::default();
        let base = RunConfig {
            scenario,
            domain: (-2.0, 2.0),
            cells: 400,
            cfl: 0.5,
            t_end: 5e-4,
            mode: Mode::MixedEi,
            theta_neighbors: ThetaRule::Fixed(0.9),
            theta_small: ThetaRule::SmallCellRatio,
            tol_neighbors: 1e-3,
            tol_small: 1e-1,
            max_dual_iterations: 1_000_000,
            stall_window: 10_000,
            snapshots: 10,
            out: PathBuf::from("out"),
            eos,
            left: SideState {
                p: 60000.0,
                u: -4.0,
                phase: Phase::Liquid,
            },
            right: SideState {
                p: 60000.0,
                u: 4.0,
                phase: Phase::Liquid,
            },
            discontinuity: 0.0,
            alpha: 1e-2,
            gamma: 1.4,
            lax_left: [0.445, 0.698, 3.528],
            lax_right: [0.5, 0.0, 0.571],
        };
        match scenario {
            Scenario::Cavitation => base,
            Scenario::Nucleation => RunConfig {
                left: SideState {
                    p: 70000.0,
                    u: 2.7,
                    phase: Phase::Vapor,
                },
                right: SideState {
                    p: 70000.0,
                    u: -2.7,
                    phase: Phase::Vapor,
                },
                ..base
            },
            Scenario::Lax => RunConfig {
                domain: (-5.0, 5.0),
                cells: 100,
                cfl: 0.8,
                t_end: 1.0,
                ..base
            },
            Scenario::Custom => RunConfig {
                domain: (-1.0, 1.0),
                cells: 200,
                t_end: 1e-3,
                left: SideState {
                    p: eos.p_sat,
                    u: 0.0,
                    phase: Phase::Vapor,
                },
                right: SideState {
                    p: eos.p_sat,
                    u: 0.0,
                    phase: Phase::Liquid,
                },
                ..base
            },
        }
    }

    /// Reads a config file; its `scenario` key, if any, picks the defaults
    /// the other keys override.
    pub fn from_file(path: &Path, scenario: Option<Scenario>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_str_with(&text, scenario)
    }

    pub fn from_str_with(text: &str, scenario: Option<Scenario>) -> CliResult<Self> {
        let entries = parse_entries(text)?;
        let scenario = match (scenario, entries.get("scenario")) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse()?,
            (None, None) => Scenario::Cavitation,
        };
        let mut cfg = Self::defaults(scenario);
        for (k, v) in &entries {
            if k != "scenario" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; the names are those of the config file.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "domain_left" => self.domain.0 = num(key, value)?,
            "domain_right" => self.domain.1 = num(key, value)?,
            "cells" => self.cells = num(key, value)?,
            "cfl" => self.cfl = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "theta_neighbors" => self.theta_neighbors = value.parse()?,
            "theta_small" => self.theta_small = value.parse()?,
            "tol_neighbors" => self.tol_neighbors = num(key, value)?,
            "tol_small" => self.tol_small = num(key, value)?,
            "max_dual_iterations" => self.max_dual_iterations = num(key, value)?,
            "stall_window" => self.stall_window = num(key, value)?,
            "snapshots" => self.snapshots = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "discontinuity" => self.discontinuity = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "left_p" => self.left.p = num(key, value)?,
            "left_u" => self.left.u = num(key, value)?,
            "left_phase" => self.left.phase = phase(value)?,
            "right_p" => self.right.p = num(key, value)?,
            "right_u" => self.right.u = num(key, value)?,
            "right_phase" => self.right.phase = phase(value)?,
            "lax_left_rho" => self.lax_left[0] = num(key, value)?,
            "lax_left_u" => self.lax_left[1] = num(key, value)?,
            "lax_left_p" => self.lax_left[2] = num(key, value)?,
            "lax_right_rho" => self.lax_right[0] = num(key, value)?,
            "lax_right_u" => self.lax_right[1] = num(key, value)?,
            "lax_right_p" => self.lax_right[2] = num(key, value)?,
            "eos_temperature" => self.eos.temperature = num(key, value)?,
            "eos_molecule_mass" => self.eos.molecule_mass = num(key, value)?,
            "eos_p_sat" => self.eos.p_sat = num(key, value)?,
            "eos_rho_liquid_sat" => self.eos.rho_liquid_sat = num(key, value)?,
            "eos_rho_vapor_max" => self.eos.rho_vapor_max = num(key, value)?,
            "eos_p_vapor_max" => self.eos.p_vapor_max = num(key, value)?,
            "eos_rho_liquid_min" => self.eos.rho_liquid_min = num(key, value)?,
            "eos_p_liquid_min" => self.eos.p_liquid_min = num(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.cells < 10 {
            return bad(format!("cells = {} is below 10", self.cells));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.domain.1 > self.domain.0) {
            return bad(format!("empty domain {:?}", self.domain));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl = {} outside (0, 1]", self.cfl));
        }
        if !(self.tol_neighbors > 0.0 && self.tol_small > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} outside (0, 1]", self.alpha));
        }
        if self.max_dual_iterations == 0 || self.stall_window == 0 {
            return bad("iteration limits must be positive".into());
        }
        if !(self.domain.0 < self.discontinuity && self.discontinuity < self.domain.1) {
            return bad(format!(
                "discontinuity {} outside the domain",
                self.discontinuity
            ));
        }
        Ok(())
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            mode: self.mode,
            cfl: self.cfl,
            theta_neighbors: self.theta_neighbors,
            theta_small: self.theta_small,
            tol_neighbors: self.tol_neighbors,
            tol_small: self.tol_small,
            max_dual_iterations: self.max_dual_iterations,
            stall_window: self.stall_window,
            adapt_mesh: self.scenario != Scenario::Lax,
            creation: self.scenario != Scenario::Lax,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn phase(value: &str) -> CliResult<Phase> {
    match value {
        "vapor" => Ok(Phase::Vapor),
        "liquid" => Ok(Phase::Liquid),
        other => Err(CliError::Config(format!(
            "phase must be vapor or liquid, got {other:?}"
        ))),
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Config(format!(
                "line {}: empty key or value",
                n + 1
            )));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!(
                "line {}: duplicate key {k:?}",
                n + 1
            )));
        }
    }
    Ok(out)
}
