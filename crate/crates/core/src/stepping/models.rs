use super::{phase_is_stable, EdgeFlux, Model};
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::mesh::{Cell, Mesh};
use crate::phase_creation::{detect_creation, insert_new_cell, solve_creation, CreationEvent};
use crate::riemann_classical::euler::{exact_euler_gamma, GasState};
use crate::riemann_classical::{exact_isothermal, hll_flux, PhaseState};
use crate::riemann_interface::{
    phase_boundary_flux, solve_interface_with_transition_from, FluxSide, InterfaceOptions,
};

/// Isothermal two-phase flow: HLL fluxes in the bulk, the phase transition
/// solver on phase boundaries, creation of new phases at bulk edges.
#[derive(Debug, Clone, Copy)]
pub struct TwoPhaseModel {
    pub eos: EosModel,
    pub interface: InterfaceOptions,
    pub flux_side: FluxSide,
}

impl TwoPhaseModel {
    pub fn new(eos: EosModel) -> Self {
        TwoPhaseModel {
            eos,
            interface: InterfaceOptions::default(),
            flux_side: FluxSide::UseVapor,
        }
    }

    fn state(cell: &Cell<2>) -> Result<PhaseState> {
        PhaseState::from_conserved(cell.state, cell.phase)
    }
}

impl Model<2> for TwoPhaseModel {
    fn edge_flux(
        &self,
        left: &Cell<2>,
        right: &Cell<2>,
        hint: Option<&EdgeFlux<2>>,
    ) -> Result<EdgeFlux<2>> {
        let l = Self::state(left)?;
        let r = Self::state(right)?;
        if l.phase == r.phase {
            let (f, s_l, s_r) = hll_flux(&l, &r, &self.eos)?;
            return Ok(EdgeFlux {
                flux: f.to_array(),
                speed: 0.0,
                max_wave_speed: s_l.abs().max(s_r.abs()),
                interface: false,
                guess: None,
            });
        }
        let sol = solve_interface_with_transition_from(
            &l,
            &r,
            &self.eos,
            hint.and_then(|h| h.guess),
            &self.interface,
        )?;
        Ok(EdgeFlux {
            flux: phase_boundary_flux(&sol, self.flux_side).to_array(),
            speed: sol.w,
            max_wave_speed: sol.max_wave_speed(),
            interface: true,
            guess: Some([sol.p_vapor, sol.p_liquid]),
        })
    }

    fn cell_speed(&self, cell: &Cell<2>) -> Result<f64> {
        let s = Self::state(cell)?;
        Ok(s.u.abs() + self.eos.sound_speed(cell.phase)?)
    }

    fn check_cell(&self, index: usize, cell: &Cell<2>) -> Result<()> {
        let rho = cell.state[0];
        if !(rho > 0.0 && rho.is_finite() && cell.state[1].is_finite()) {
            return Err(Error::NonPositiveDensity(rho));
        }
        let phase = self.eos.classify(rho)?;
        if phase != cell.phase || !phase_is_stable(phase) {
            return Err(Error::PhaseViolation { cell: index, rho });
        }
        Ok(())
    }

    fn creation(&self, left: &Cell<2>, right: &Cell<2>) -> Result<Option<CreationEvent>> {
        let l = Self::state(left)?;
        let r = Self::state(right)?;
        if l.phase != r.phase {
            return Ok(None);
        }
        let attempt = exact_isothermal(&l, &r, &self.eos);
        match detect_creation(&l, &r, &attempt) {
            Some(kind) => solve_creation(&l, &r, kind, &self.eos).map(Some),
            None => Ok(None),
        }
    }

    fn open_created_cell(
        &self,
        mesh: &mut Mesh<2>,
        edge: usize,
        event: &CreationEvent,
        dt: f64,
    ) -> Result<usize> {
        insert_new_cell(mesh, edge, event, dt)
    }
}

/// Polytropic gas on a fixed mesh with exact Godunov fluxes, for checking
/// the integrators on a single-phase problem.
#[derive(Debug, Clone, Copy)]
pub struct EulerModel {
    pub gamma: f64,
}

impl EulerModel {
    pub fn new(gamma: f64) -> Self {
        EulerModel { gamma }
    }
}

impl Model<3> for EulerModel {
    fn edge_flux(
        &self,
        left: &Cell<3>,
        right: &Cell<3>,
        _hint: Option<&EdgeFlux<3>>,
    ) -> Result<EdgeFlux<3>> {
        let l = GasState::from_conserved(left.state, self.gamma)?;
        let r = GasState::from_conserved(right.state, self.gamma)?;
        let sol = exact_euler_gamma(&l, &r, self.gamma)?;
        Ok(EdgeFlux {
            flux: sol.godunov_flux(),
            speed: 0.0,
            max_wave_speed: sol.max_wave_speed(),
            interface: false,
            guess: None,
        })
    }

    fn cell_speed(&self, cell: &Cell<3>) -> Result<f64> {
        let s = GasState::from_conserved(cell.state, self.gamma)?;
        Ok(s.u.abs() + s.sound_speed(self.gamma))
    }

    fn check_cell(&self, index: usize, cell: &Cell<3>) -> Result<()> {
        let s = GasState::from_conserved(cell.state, self.gamma)?;
        if !(s.p > 0.0 && s.p.is_finite()) {
            return Err(Error::PhaseViolation {
                cell: index,
                rho: s.rho,
            });
        }
        Ok(())
    }
}
