//! Initial meshes and self-similar reference solutions.

use isoflow::eos::{EosModel, Phase};
use isoflow::mesh::{Cell, Mesh, MeshParams};
use isoflow::phase_creation::{detect_creation, solve_creation, CreationEvent};
use isoflow::riemann_classical::euler::{exact_euler_gamma, EulerSolution, GasState};
use isoflow::riemann_classical::{exact_isothermal, sample_isothermal_fan, PhaseState, StarState};
use isoflow::riemann_interface::{solve_interface_with_transition, InterfaceSolution};

use crate::config::{RunConfig, Scenario, SideState};
use crate::error::{CliError, CliResult};

pub fn side_state(s: &SideState, eos: &EosModel) -> CliResult<PhaseState> {
    Ok(PhaseState::from_pressure(s.p, s.u, s.phase, eos)?)
}

/// Uniform mesh with the left state on cells centered left of the
/// discontinuity.
pub fn two_phase_mesh(cfg: &RunConfig, eos: &EosModel) -> CliResult<Mesh<2>> {
    let l = side_state(&cfg.left, eos)?;
    let r = side_state(&cfg.right, eos)?;
    let mut mesh = Mesh::uniform(cfg.domain.0, cfg.domain.1, cfg.cells, |x| {
        let s = if x < cfg.discontinuity { l } else { r };
        (s.conserved(), s.phase)
    })?;
    mesh.flag_tiny();
    Ok(mesh)
}

/// Fixed model mesh for the Lax test: `cells` regular cells of width
/// `h = (b - a) / cells` with one extra cell of width `alpha h` starting at
/// the discontinuity. The extra cell is always treated as tiny.
pub fn lax_mesh(cfg: &RunConfig) -> CliResult<Mesh<3>> {
    let (a, b) = cfg.domain;
    let h = (b - a) / cfg.cells as f64;
    let x0 = cfg.discontinuity;
    let n_left = ((x0 - a) / h).round() as usize;
    if n_left == 0 || n_left >= cfg.cells || ((a + n_left as f64 * h) - x0).abs() > 1e-9 * h {
        return Err(CliError::Config(format!(
            "discontinuity {x0} is not on a cell edge"
        )));
    }
    let n_right = cfg.cells - n_left;
    let left =
        GasState::new(cfg.lax_left[0], cfg.lax_left[1], cfg.lax_left[2]).conserved(cfg.gamma);
    let right =
        GasState::new(cfg.lax_right[0], cfg.lax_right[1], cfg.lax_right[2]).conserved(cfg.gamma);
    let small = cfg.alpha * h;

    let mut cells = Vec::with_capacity(cfg.cells + 1);
    let left_edge = |i: usize| if i == n_left { x0 } else { a + i as f64 * h };
    for i in 0..n_left {
        cells.push(Cell::new(
            left_edge(i),
            left_edge(i + 1),
            left,
            Phase::Neutral,
        ));
    }
    let mut tiny = Cell::new(x0, x0 + small, right, Phase::Neutral);
    tiny.tiny = true;
    cells.push(tiny);
    let right_edge = |i: usize| x0 + small + i as f64 * h;
    for i in 0..n_right {
        cells.push(Cell::new(
            right_edge(i),
            right_edge(i + 1),
            right,
            Phase::Neutral,
        ));
    }
    Ok(Mesh::from_cells(cells, MeshParams::new(h))?)
}

/// Self-similar solution of a two-phase Riemann problem.
#[derive(Debug, Clone, Copy)]
pub enum TwoPhaseReference {
    Single(StarState),
    Interface(InterfaceSolution),
    Creation(CreationEvent),
}

/// Exact solution for the configured two-phase data: a single-phase fan,
/// a phase boundary fan or a four-wave creation fan.
pub fn two_phase_reference(cfg: &RunConfig, eos: &EosModel) -> CliResult<TwoPhaseReference> {
    let l = side_state(&cfg.left, eos)?;
    let r = side_state(&cfg.right, eos)?;
    if l.phase != r.phase {
        return Ok(TwoPhaseReference::Interface(
            solve_interface_with_transition(&l, &r, eos)?,
        ));
    }
    let attempt = exact_isothermal(&l, &r, eos);
    match detect_creation(&l, &r, &attempt) {
        Some(kind) => Ok(TwoPhaseReference::Creation(solve_creation(
            &l, &r, kind, eos,
        )?)),
        None => Ok(TwoPhaseReference::Single(attempt?)),
    }
}

impl TwoPhaseReference {
    pub fn sample(
        &self,
        left: &PhaseState,
        right: &PhaseState,
        xi: f64,
        eos: &EosModel,
    ) -> CliResult<PhaseState> {
        Ok(match self {
            TwoPhaseReference::Single(star) => sample_isothermal_fan(star, left, right, xi, eos)?,
            TwoPhaseReference::Interface(sol) => sol.sample(left, right, xi, eos)?,
            TwoPhaseReference::Creation(ev) => ev.sample(left, right, xi, eos)?,
        })
    }
}

pub fn lax_reference(cfg: &RunConfig) -> CliResult<EulerSolution> {
    let l = GasState::new(cfg.lax_left[0], cfg.lax_left[1], cfg.lax_left[2]);
    let r = GasState::new(cfg.lax_right[0], cfg.lax_right[1], cfg.lax_right[2]);
    Ok(exact_euler_gamma(&l, &r, cfg.gamma)?)
}

/// Reference sample points `(rho, u, p)` at positions `xs` and time `t`.
pub fn exact_reference(cfg: &RunConfig, t: f64, xs: &[f64]) -> CliResult<Vec<[f64; 3]>> {
    let xi = |x: f64| (x - cfg.discontinuity) / t;
    match cfg.scenario {
        Scenario::Lax => {
            let sol = lax_reference(cfg)?;
            Ok(xs
                .iter()
                .map(|&x| {
                    let s = sol.sample(xi(x));
                    [s.rho, s.u, s.p]
                })
                .collect())
        }
        _ => {
            let eos = EosModel::new(cfg.eos)?;
            let reference = two_phase_reference(cfg, &eos)?;
            let l = side_state(&cfg.left, &eos)?;
            let r = side_state(&cfg.right, &eos)?;
            xs.iter()
                .map(|&x| {
                    let s = reference.sample(&l, &r, xi(x), &eos)?;
                    Ok([s.rho, s.u, s.pressure(&eos)?])
                })
                .collect()
        }
    }
}
