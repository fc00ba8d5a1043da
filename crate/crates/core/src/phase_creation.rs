//! Cavitation and nucleation inside single-phase data.
//!
//! When the single-phase Riemann problem at a bulk edge has no admissible
//! solution, a cell of the other phase is opened at that edge. Its state
//! comes from a four-wave Riemann solution: an outer classical wave on each
//! side, two phase boundaries, and a constant state of the new phase in
//! between. The problem splits into two half problems coupled through the
//! velocity of the middle state, which is found by a secant iteration on
//! the pressure mismatch of the halves.

use crate::eos::{EosModel, Phase};
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh};
use crate::riemann_classical::{Flux, PhaseState, StarState};
use crate::riemann_interface::{solve_sides, InterfaceOptions, InterfaceSolution, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CreationKind {
    /// Vapor opens inside liquid.
    Cavitation,
    /// Liquid forms inside vapor.
    Nucleation,
}

impl CreationKind {
    pub fn new_phase(self) -> Phase {
        match self {
            CreationKind::Cavitation => Phase::Vapor,
            CreationKind::Nucleation => Phase::Liquid,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CreationKind::Cavitation => "cavitation",
            CreationKind::Nucleation => "nucleation",
        }
    }
}

/// Four-wave solution of a creation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreationEvent {
    pub kind: CreationKind,
    /// Pressure of the new phase.
    pub p_new: f64,
    pub rho_new: f64,
    pub u_new: f64,
    /// Left phase boundary: outer phase on its left, new phase on its right.
    pub left: InterfaceSolution,
    pub right: InterfaceSolution,
    /// Secant iterations on the middle velocity.
    pub iterations: usize,
}

impl CreationEvent {
    pub fn new_phase(&self) -> Phase {
        self.kind.new_phase()
    }

    pub fn w_left(&self) -> f64 {
        self.left.w
    }

    pub fn w_right(&self) -> f64 {
        self.right.w
    }

    /// Width of the created cell after a step `dt`.
    pub fn width(&self, dt: f64) -> f64 {
        (self.right.w - self.left.w) * dt
    }

    pub fn new_state(&self) -> PhaseState {
        PhaseState::new(self.rho_new, self.u_new, self.new_phase())
    }

    /// Star state of the outer phase left of the created region.
    pub fn outer_left(&self) -> PhaseState {
        self.left.left_star()
    }

    pub fn outer_right(&self) -> PhaseState {
        self.right.right_star()
    }

    /// Samples the four-wave fan at `xi = x / t` for the bulk data
    /// `left | right` it was solved from.
    pub fn sample(
        &self,
        left: &PhaseState,
        right: &PhaseState,
        xi: f64,
        eos: &EosModel,
    ) -> Result<PhaseState> {
        let mid = self.new_state();
        if xi < self.left.w {
            self.left.sample(left, &mid, xi, eos)
        } else if xi <= self.right.w {
            Ok(mid)
        } else {
            self.right.sample(&mid, right, xi, eos)
        }
    }

    /// Fastest outer wave, for the time step bound.
    pub fn max_wave_speed(&self) -> f64 {
        self.left.max_wave_speed().max(self.right.max_wave_speed())
    }
}

/// Classifies a failed single-phase solve at a bulk edge.
pub fn detect_creation(
    left: &PhaseState,
    right: &PhaseState,
    attempt: &Result<StarState>,
) -> Option<CreationKind> {
    if left.phase != right.phase {
        return None;
    }
    match attempt {
        Err(Error::NoSinglePhaseSolution {
            phase: Phase::Liquid,
            ..
        }) => Some(CreationKind::Cavitation),
        Err(Error::NoSinglePhaseSolution {
            phase: Phase::Vapor,
            ..
        }) => Some(CreationKind::Nucleation),
        _ => None,
    }
}

const SECANT_MAX_ITER: usize = 100;

/// Solves the four-wave creation problem for bulk data `left | right`.
pub fn solve_creation(
    left: &PhaseState,
    right: &PhaseState,
    kind: CreationKind,
    eos: &EosModel,
) -> Result<CreationEvent> {
    let outer = kind.new_phase().opposite();
    if left.phase != outer || right.phase != outer {
        return Err(Error::InvalidConfig(format!(
            "{} needs {} data on both sides",
            kind.name(),
            outer.name()
        )));
    }
    let new = kind.new_phase();
    let opts = InterfaceOptions::default();

    let halves = |u_mid: f64,
                  guess: Option<([f64; 2], [f64; 2])>|
     -> Result<(InterfaceSolution, InterfaceSolution)> {
        let l = solve_sides(
            (Side::Wave(*left), outer),
            (Side::Center { u: u_mid }, new),
            eos,
            guess.map(|g| g.0),
            &opts,
        )?;
        let r = solve_sides(
            (Side::Center { u: u_mid }, new),
            (Side::Wave(*right), outer),
            eos,
            guess.map(|g| g.1),
            &opts,
        )?;
        Ok((l, r))
    };
    let p_mid = |s: &InterfaceSolution| match new {
        Phase::Vapor => s.p_vapor,
        _ => s.p_liquid,
    };
    let warm = |l: &InterfaceSolution, r: &InterfaceSolution| {
        Some(([l.p_vapor, l.p_liquid], [r.p_vapor, r.p_liquid]))
    };

    let mut u0 = 0.5 * (left.u + right.u);
    let (mut l0, mut r0) = halves(u0, None)?;
    let mut g0 = p_mid(&l0) - p_mid(&r0);
    let tol = 1e-12 * eos.p0;
    let mut iterations = 0;
    if g0.abs() > tol {
        let a = eos.sound_speed(outer)?;
        let mut u1 = u0 + 1e-6 * a;
        let (mut l1, mut r1) = halves(u1, warm(&l0, &r0))?;
        let mut g1 = p_mid(&l1) - p_mid(&r1);
        loop {
            iterations += 1;
            if g1.abs() <= tol || g1 == g0 {
                break;
            }
            if iterations > SECANT_MAX_ITER {
                return Err(Error::NonConvergence {
                    solver: "creation middle velocity",
                    iterations,
                    residual: g1 / eos.p0,
                });
            }
            let u2 = u1 - g1 * (u1 - u0) / (g1 - g0);
            let (l2, r2) = halves(u2, warm(&l1, &r1))?;
            let g2 = p_mid(&l2) - p_mid(&r2);
            let step = (u2 - u1).abs();
            (u0, g0) = (u1, g1);
            (u1, g1, l1, r1) = (u2, g2, l2, r2);
            if step <= 4.0 * f64::EPSILON * u1.abs().max(1.0) {
                break;
            }
        }
        (u0, l0, r0) = (u1, l1, r1);
    }

    let p_new = 0.5 * (p_mid(&l0) + p_mid(&r0));
    // Strong collisions can push the outer star states past their own
    // threshold; no admissible creation solution exists then.
    let admissible = |p: f64, phase: Phase| match phase {
        Phase::Vapor => p <= eos.p_tilde,
        _ => p >= eos.p_min,
    };
    let (outer_l, outer_r) = match outer {
        Phase::Vapor => (l0.p_vapor, r0.p_vapor),
        _ => (l0.p_liquid, r0.p_liquid),
    };
    for (p, phase) in [(outer_l, outer), (outer_r, outer), (p_new, new)] {
        if !admissible(p, phase) {
            return Err(Error::OutOfRangePressure { pressure: p, phase });
        }
    }
    Ok(CreationEvent {
        kind,
        p_new,
        rho_new: eos.density_from_pressure(p_new, new)?,
        u_new: u0,
        left: l0,
        right: r0,
        iterations,
    })
}

/// Fluxes through the two new boundaries, `(-z, -z u + p)` evaluated with
/// the created phase's star state on each.
pub fn creation_fluxes(event: &CreationEvent) -> (Flux, Flux) {
    let u = event.u_new;
    let p = |s: &InterfaceSolution| match event.new_phase() {
        Phase::Vapor => s.p_vapor,
        _ => s.p_liquid,
    };
    let f = |s: &InterfaceSolution| Flux::new(-s.z, -s.z * u + p(s));
    (f(&event.left), f(&event.right))
}

/// Opens the created cell at edge `edge` (between cells `edge - 1` and
/// `edge`) for a step `dt`.
///
/// The neighbors shrink by the boundary displacements and receive the
/// creation flux on the side facing the new cell, so the three cells
/// together are conserved exactly. The flux on their far sides is left to
/// the caller. Returns the index of the new cell.
pub fn insert_new_cell(
    mesh: &mut Mesh<2>,
    edge: usize,
    event: &CreationEvent,
    dt: f64,
) -> Result<usize> {
    if edge == 0 || edge >= mesh.len() {
        return Err(Error::InvalidConfig(format!(
            "creation edge {edge} is not interior"
        )));
    }
    let width = event.width(dt);
    if !(width > 0.0) {
        return Err(Error::NegativeWidth(width));
    }
    let (f_left, f_right) = creation_fluxes(event);
    let x_e = mesh.cells()[edge].x_left;
    let x_l = x_e + event.w_left() * dt;
    let x_r = x_e + event.w_right() * dt;

    let cells = mesh.cells_mut();
    let ln = cells[edge - 1];
    let h_old = ln.width();
    let h_new = x_l - ln.x_left;
    if !(h_new > 0.0) {
        return Err(Error::CellInversion {
            cell: edge - 1,
            width: h_new,
        });
    }
    let f = f_left.to_array();
    for k in 0..2 {
        cells[edge - 1].state[k] = (h_old * ln.state[k] - dt * f[k]) / h_new;
    }

    let rn = cells[edge];
    let h_old = rn.width();
    let h_new = rn.x_right - x_r;
    if !(h_new > 0.0) {
        return Err(Error::CellInversion {
            cell: edge,
            width: h_new,
        });
    }
    let f = f_right.to_array();
    for k in 0..2 {
        cells[edge].state[k] = (h_old * rn.state[k] + dt * f[k]) / h_new;
    }

    let mut cell = Cell::new(x_l, x_r, event.new_state().conserved(), event.new_phase());
    cell.tiny = true;
    mesh.insert_cell(edge, cell)?;
    Ok(edge)
}
