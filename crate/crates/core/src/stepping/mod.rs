//! Time integration on the moving mesh.
//!
//! Three modes share one driver. `Explicit` updates every cell with the
//! Godunov scheme under a step bounded by the smallest cell. `MixedEi`
//! bounds the step by the regular cells only and treats each tiny cell
//! together with its two neighbors implicitly, by dual time stepping, with
//! the explicit fluxes on the outer edges of that block kept fixed.
//! `ExplicitLts` sub-cycles the tiny cells explicitly instead.

mod dual;
mod explicit;
mod lts;
pub mod models;

pub use dual::dual_time_update;
pub use explicit::{explicit_sweep, Sweep};
pub use lts::explicit_lts_step;
pub use models::{EulerModel, TwoPhaseModel};

use crate::eos::Phase;
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh};
use crate::phase_creation::CreationEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explicit,
    MixedEi,
    ExplicitLts,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Explicit => "explicit",
            Mode::MixedEi => "mixed_ei",
            Mode::ExplicitLts => "explicit_lts",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Mode::Explicit),
            "mixed_ei" | "mixed" | "implicit" => Ok(Mode::MixedEi),
            "explicit_lts" | "lts" => Ok(Mode::ExplicitLts),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Pseudo time step factor `theta` in `dtau = theta * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaRule {
    Fixed(f64),
    /// Width of the smallest tiny cell of the block over the reference width.
    SmallCellRatio,
}

impl std::str::FromStr for ThetaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" | "ratio" => Ok(ThetaRule::SmallCellRatio),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|t| *t > 0.0)
                .map(ThetaRule::Fixed)
                .ok_or_else(|| Error::InvalidConfig(format!("bad theta {v:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub mode: Mode,
    pub cfl: f64,
    pub theta_neighbors: ThetaRule,
    pub theta_small: ThetaRule,
    pub tol_neighbors: f64,
    pub tol_small: f64,
    pub max_dual_iterations: usize,
    /// Dual iterations without a new residual minimum before giving up.
    pub stall_window: usize,
    /// Split, merge and reflag tiny cells after every step.
    pub adapt_mesh: bool,
    /// Check bulk edges for cavitation and nucleation.
    pub creation: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            mode: Mode::MixedEi,
            cfl: 0.5,
            theta_neighbors: ThetaRule::Fixed(0.9),
            theta_small: ThetaRule::SmallCellRatio,
            tol_neighbors: 1e-3,
            tol_small: 1e-1,
            max_dual_iterations: 1_000_000,
            stall_window: 10_000,
            adapt_mesh: true,
            creation: true,
        }
    }
}

/// Flux through one edge together with its speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFlux<const N: usize> {
    /// Flux relative to the moving edge.
    pub flux: [f64; N],
    pub speed: f64,
    pub max_wave_speed: f64,
    pub interface: bool,
    /// Star pressures for warm starting later solves at this edge.
    pub guess: Option<[f64; 2]>,
}

/// Physics behind the integrator.
pub trait Model<const N: usize> {
    fn edge_flux(
        &self,
        left: &Cell<N>,
        right: &Cell<N>,
        hint: Option<&EdgeFlux<N>>,
    ) -> Result<EdgeFlux<N>>;

    /// Transmissive boundary: the outside state copies the boundary cell.
    fn boundary_flux(&self, cell: &Cell<N>) -> Result<EdgeFlux<N>> {
        self.edge_flux(cell, cell, None)
    }

    /// Largest characteristic speed `|u| + a` of a cell.
    fn cell_speed(&self, cell: &Cell<N>) -> Result<f64>;

    /// Rejects states outside their phase.
    fn check_cell(&self, index: usize, cell: &Cell<N>) -> Result<()>;

    /// Creation problem at a bulk edge, if the data call for one.
    fn creation(&self, _left: &Cell<N>, _right: &Cell<N>) -> Result<Option<CreationEvent>> {
        Ok(None)
    }

    /// Opens the cell of `event` at `edge`; see
    /// [`crate::phase_creation::insert_new_cell`].
    fn open_created_cell(
        &self,
        _mesh: &mut Mesh<N>,
        edge: usize,
        _event: &CreationEvent,
        _dt: f64,
    ) -> Result<usize> {
        Err(Error::InvalidConfig(format!(
            "model cannot create cells (edge {edge})"
        )))
    }
}

/// Inclusive cell index ranges treated implicitly: each tiny cell with its
/// neighbors, overlapping ranges joined.
pub fn implicit_blocks<const N: usize>(cells: &[Cell<N>]) -> Vec<(usize, usize)> {
    let n = cells.len();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for (k, c) in cells.iter().enumerate() {
        if !c.tiny {
            continue;
        }
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        match blocks.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => blocks.push((a, b)),
        }
    }
    blocks
}

/// Time step from the CFL condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStep {
    pub dt: f64,
    pub s_max: f64,
    pub h_ref: f64,
}

/// `dt = cfl * h_ref / s_max`. In the explicit mode `h_ref` is the smallest
/// cell; otherwise tiny cells are skipped. `s_max` covers the cells entering
/// `h_ref` and the wave speeds of the latest phase boundary solves.
pub fn compute_dt<const N: usize, M: Model<N>>(
    mesh: &Mesh<N>,
    model: &M,
    cfg: &StepConfig,
    recent_wave_speed: f64,
) -> Result<TimeStep> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let skip_tiny = cfg.mode != Mode::Explicit;
    let h_ref = mesh.min_width(skip_tiny);
    let mut s_max = recent_wave_speed;
    for c in mesh.cells().iter().filter(|c| !(skip_tiny && c.tiny)) {
        s_max = s_max.max(model.cell_speed(c)?);
    }
    if !(h_ref > 0.0 && h_ref.is_finite()) {
        return Err(Error::NegativeWidth(h_ref));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "wave speed bound {s_max} is not positive"
        )));
    }
    Ok(TimeStep {
        dt: cfg.cfl * h_ref / s_max,
        s_max,
        h_ref,
    })
}

/// A created cell as recorded in the step report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreationRecord {
    pub event: CreationEvent,
    pub position: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<const N: usize> {
    pub dt: f64,
    pub s_max: f64,
    pub h_ref: f64,
    /// Dual time iterations or local time steps spent on implicit blocks.
    pub local_iterations: usize,
    pub implicit_blocks: usize,
    /// Largest residual at acceptance over the dual time blocks.
    pub dual_residual: f64,
    pub creations: Vec<CreationRecord>,
    /// Fluxes through the domain ends, for conservation accounting.
    pub boundary_flux: ([f64; N], [f64; N]),
    pub max_interface_wave_speed: f64,
    pub splits: usize,
    pub merges: usize,
}

/// Outer edge of an implicit block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterEdge<const N: usize> {
    /// Explicit flux saved from the sweep.
    Frozen(EdgeFlux<N>),
    /// Domain end, evaluated from the current block state.
    Boundary,
}

/// Data of one implicit block at the start of the step.
#[derive(Debug, Clone, Copy)]
pub struct BlockInput<'a, const N: usize> {
    pub cells: &'a [Cell<N>],
    pub left: OuterEdge<N>,
    pub right: OuterEdge<N>,
    /// Fluxes on the interior edges at the old time, one per cell pair.
    pub interior: &'a [EdgeFlux<N>],
    pub dt: f64,
    pub h_ref: f64,
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutput<const N: usize> {
    pub states: Vec<[f64; N]>,
    /// Displacement of every block edge, outer ones included.
    pub displacement: Vec<f64>,
    /// Final fluxes on every block edge, outer ones included.
    pub fluxes: Vec<EdgeFlux<N>>,
    pub iterations: usize,
    pub residual: f64,
}

impl<const N: usize> BlockInput<'_, N> {
    pub(crate) fn outer_flux<M: Model<N>>(
        &self,
        model: &M,
        states: &[[f64; N]],
        left: bool,
    ) -> Result<EdgeFlux<N>> {
        let (edge, idx) = if left {
            (self.left, 0)
        } else {
            (self.right, self.cells.len() - 1)
        };
        match edge {
            OuterEdge::Frozen(f) => Ok(f),
            OuterEdge::Boundary => {
                let cell = Cell {
                    state: states[idx],
                    ..self.cells[idx]
                };
                model.boundary_flux(&cell)
            }
        }
    }

    pub(crate) fn smallest_tiny_ratio(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.tiny)
            .map(|c| c.width() / self.h_ref)
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn conservative_update<const N: usize>(
    h_old: f64,
    u_old: &[f64; N],
    dt: f64,
    f_left: &[f64; N],
    f_right: &[f64; N],
    h_new: f64,
) -> [f64; N] {
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = (h_old * u_old[k] - dt * (f_right[k] - f_left[k])) / h_new;
    }
    out
}

/// Advances `mesh` by one step of length `dt` taken from `step`.
pub fn advance<const N: usize, M: Model<N>>(
    mesh: &mut Mesh<N>,
    model: &M,
    cfg: &StepConfig,
    step: TimeStep,
) -> Result<StepReport<N>> {
    let dt = step.dt;
    let n = mesh.len();
    let blocks = if cfg.mode == Mode::Explicit {
        Vec::new()
    } else {
        implicit_blocks(mesh.cells())
    };
    let sweep = explicit_sweep(mesh, model, cfg, dt, &blocks)?;

    let mut states: Vec<[f64; N]> = sweep.states.clone();
    let mut displacement = sweep.displacement.clone();
    let mut boundary = (sweep.fluxes[0].flux, sweep.fluxes[n].flux);
    let mut local_iterations = 0;
    let mut dual_residual: f64 = 0.0;
    let mut max_interface = sweep.max_interface_wave_speed;

    for &(a, b) in &blocks {
        let input = BlockInput {
            cells: &mesh.cells()[a..=b],
            left: if a == 0 {
                OuterEdge::Boundary
            } else {
                OuterEdge::Frozen(sweep.fluxes[a])
            },
            right: if b == n - 1 {
                OuterEdge::Boundary
            } else {
                OuterEdge::Frozen(sweep.fluxes[b + 1])
            },
            interior: &sweep.fluxes[a + 1..=b],
            dt,
            h_ref: step.h_ref,
            s_max: step.s_max,
        };
        let out = match cfg.mode {
            Mode::ExplicitLts => explicit_lts_step(model, cfg, &input)?,
            _ => dual_time_update(model, cfg, &input)?,
        };
        local_iterations += out.iterations;
        dual_residual = dual_residual.max(out.residual);
        for (i, s) in out.states.iter().enumerate() {
            states[a + i] = *s;
        }
        for (e, d) in out.displacement.iter().enumerate() {
            displacement[a + e] = *d;
        }
        for f in &out.fluxes {
            if f.interface {
                max_interface = max_interface.max(f.max_wave_speed);
            }
        }
        if a == 0 {
            boundary.0 = out.fluxes[0].flux;
        }
        if b == n - 1 {
            boundary.1 = out.fluxes[out.fluxes.len() - 1].flux;
        }
    }

    mesh.move_edges(&displacement)?;
    for (c, s) in mesh.cells_mut().iter_mut().zip(&states) {
        c.state = *s;
    }

    let mut creations = Vec::new();
    for (edge, event) in sweep.creations.iter().rev() {
        let idx = model.open_created_cell(mesh, *edge, event, dt)?;
        let cell = mesh.cells()[idx];
        max_interface = max_interface.max(event.max_wave_speed());
        creations.push(CreationRecord {
            event: *event,
            position: cell.center(),
            width: cell.width(),
        });
    }
    creations.reverse();

    for (i, c) in mesh.cells().iter().enumerate() {
        model.check_cell(i, c)?;
    }
    let (splits, merges) = if cfg.adapt_mesh { mesh.adapt() } else { (0, 0) };
    if cfg.mode == Mode::Explicit {
        for c in mesh.cells_mut() {
            c.tiny = false;
        }
    }

    Ok(StepReport {
        dt,
        s_max: step.s_max,
        h_ref: step.h_ref,
        local_iterations,
        implicit_blocks: blocks.len(),
        dual_residual,
        creations,
        boundary_flux: boundary,
        max_interface_wave_speed: max_interface,
        splits,
        merges,
    })
}

/// Drives a mesh through time, remembering the interface wave speeds of
/// the previous step for the next time step bound.
#[derive(Debug, Clone)]
pub struct Stepper<const N: usize, M: Model<N>> {
    pub model: M,
    pub cfg: StepConfig,
    pub time: f64,
    pub steps: usize,
    pub local_iterations: usize,
    recent_wave_speed: f64,
    /// Time integral of the boundary fluxes, left minus right.
    pub boundary_inflow: [f64; N],
}

impl<const N: usize, M: Model<N>> Stepper<N, M> {
    pub fn new(model: M, cfg: StepConfig) -> Self {
        Stepper {
            model,
            cfg,
            time: 0.0,
            steps: 0,
            local_iterations: 0,
            recent_wave_speed: 0.0,
            boundary_inflow: [0.0; N],
        }
    }

    /// One step, clipped so as not to pass `t_end`.
    pub fn step(&mut self, mesh: &mut Mesh<N>, t_end: f64) -> Result<StepReport<N>> {
        let mut ts = compute_dt(mesh, &self.model, &self.cfg, self.recent_wave_speed)?;
        let remaining = t_end - self.time;
        if ts.dt > remaining {
            ts.dt = remaining;
        }
        let report = advance(mesh, &self.model, &self.cfg, ts)?;
        self.recent_wave_speed = report.max_interface_wave_speed;
        self.time = if ts.dt == remaining {
            t_end
        } else {
            self.time + ts.dt
        };
        self.steps += 1;
        self.local_iterations += report.local_iterations;
        for k in 0..N {
            self.boundary_inflow[k] +=
                report.dt * (report.boundary_flux.0[k] - report.boundary_flux.1[k]);
        }
        Ok(report)
    }

    /// Runs to `t_end`, handing every report to `observe`.
    pub fn run<F>(&mut self, mesh: &mut Mesh<N>, t_end: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Mesh<N>, &StepReport<N>, f64) -> Result<()>,
    {
        while self.time < t_end {
            let report = self.step(mesh, t_end)?;
            observe(mesh, &report, self.time)?;
        }
        Ok(())
    }
}

/// Relative change of the conserved totals not explained by boundary
/// fluxes, per component.
pub fn conservation_drift<const N: usize>(
    initial: &[f64; N],
    current: &[f64; N],
    inflow: &[f64; N],
    scale: &[f64; N],
) -> [f64; N] {
    let mut d = [0.0; N];
    for k in 0..N {
        d[k] = (current[k] - initial[k] - inflow[k]).abs() / scale[k].max(f64::MIN_POSITIVE);
    }
    d
}

/// Sum of `width * |state|`, a scale for conservation checks.
pub fn absolute_totals<const N: usize>(mesh: &Mesh<N>) -> [f64; N] {
    let mut t = [0.0; N];
    for c in mesh.cells() {
        for k in 0..N {
            t[k] += c.width() * c.state[k].abs();
        }
    }
    t
}

pub(crate) fn phase_is_stable(phase: Phase) -> bool {
    matches!(phase, Phase::Vapor | Phase::Liquid | Phase::Neutral)
}
