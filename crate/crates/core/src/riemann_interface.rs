//! Exact Riemann solver across a vapor-liquid phase boundary.
//!
//! Internally the vapor is always on the left; data with the liquid on the
//! left are mirrored in, solved and mirrored back. The unknowns are the two
//! star pressures `(p_v, p_l)`. They satisfy the momentum jump
//! `p_l - p_v + z^2 (v_l - v_v) = 0` and the velocity balance
//! `f_v + f_l + z (v_l - v_v) + u_l - u_v = 0`, where `f_k` are the classical
//! wave functions and `z` is the mass flux given by the kinetic relation.
//! Components are scaled by the saturation pressure and the vapor sound
//! speed respectively.

use crate::eos::{EosModel, Phase};
use crate::error::{Error, Result};
use crate::newton::{newton_armijo, NewtonOptions};
use crate::riemann_classical::{
    outer_wave, sample_outer_wave, solve_pressure, wave_curve, Flux, PhaseState, Wave,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

/// Which star state enters the phase boundary flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxSide {
    #[default]
    UseVapor,
    UseLiquid,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceOptions {
    pub newton: NewtonOptions,
    pub jacobian: JacobianMode,
}

/// Converged solution of a two-phase Riemann problem, in the physical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSolution {
    pub p_vapor: f64,
    pub p_liquid: f64,
    pub rho_vapor: f64,
    pub rho_liquid: f64,
    pub u_vapor: f64,
    pub u_liquid: f64,
    /// Mass flux `z = -rho (u - w)`, the same on both sides.
    pub z: f64,
    /// Phase boundary speed.
    pub w: f64,
    /// Classical wave in the vapor, absent when the vapor side is a
    /// prescribed center state.
    pub vapor_wave: Option<Wave>,
    pub liquid_wave: Option<Wave>,
    pub vapor_on_left: bool,
    pub iterations: usize,
    /// Scaled max norm of the residual at the returned point.
    pub residual_norm: f64,
}

impl InterfaceSolution {
    pub fn max_wave_speed(&self) -> f64 {
        let outer = [self.vapor_wave, self.liquid_wave]
            .iter()
            .flatten()
            .map(Wave::max_abs_speed)
            .fold(0.0, f64::max);
        outer.max(self.w.abs())
    }

    fn mirrored(&self) -> Self {
        let flip = |w: Option<Wave>| {
            w.map(|w| Wave {
                kind: w.kind,
                head: -w.head,
                tail: -w.tail,
            })
        };
        InterfaceSolution {
            u_vapor: -self.u_vapor,
            u_liquid: -self.u_liquid,
            z: -self.z,
            w: -self.w,
            vapor_wave: flip(self.vapor_wave),
            liquid_wave: flip(self.liquid_wave),
            vapor_on_left: !self.vapor_on_left,
            ..*self
        }
    }

    /// Samples the fan at `xi = x / t` for the data `left | right` it was
    /// solved from.
    pub fn sample(
        &self,
        left: &PhaseState,
        right: &PhaseState,
        xi: f64,
        eos: &EosModel,
    ) -> Result<PhaseState> {
        let (lw, rw) = if self.vapor_on_left {
            (self.vapor_wave, self.liquid_wave)
        } else {
            (self.liquid_wave, self.vapor_wave)
        };
        if xi < self.w {
            let star = self.left_star();
            Ok(match lw {
                Some(w) => {
                    sample_outer_wave(left, &star, &w, eos.sound_speed(star.phase)?, xi, true)
                }
                None => star,
            })
        } else {
            let star = self.right_star();
            Ok(match rw {
                Some(w) => {
                    sample_outer_wave(right, &star, &w, eos.sound_speed(star.phase)?, xi, false)
                }
                None => star,
            })
        }
    }

    /// Star state of the phase on the left of the boundary.
    pub fn left_star(&self) -> PhaseState {
        if self.vapor_on_left {
            PhaseState::new(self.rho_vapor, self.u_vapor, Phase::Vapor)
        } else {
            PhaseState::new(self.rho_liquid, self.u_liquid, Phase::Liquid)
        }
    }

    pub fn right_star(&self) -> PhaseState {
        if self.vapor_on_left {
            PhaseState::new(self.rho_liquid, self.u_liquid, Phase::Liquid)
        } else {
            PhaseState::new(self.rho_vapor, self.u_vapor, Phase::Vapor)
        }
    }
}

/// One side of an oriented problem: either a state with a classical wave
/// or a center state of prescribed velocity and free pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Side {
    Wave(PhaseState),
    Center { u: f64 },
}

impl Side {
    fn mirrored(self) -> Side {
        match self {
            Side::Wave(s) => Side::Wave(s.mirrored()),
            Side::Center { u } => Side::Center { u: -u },
        }
    }
}

struct Branch {
    rho_star: f64,
    u_star: f64,
    df: f64,
}

/// Wave function of a side at star pressure `p`. `sign` is -1 on the left.
fn branch(side: &Side, phase: Phase, p: f64, sign: f64, eos: &EosModel) -> Result<Branch> {
    let rho_star = eos.density_from_pressure(p, phase)?;
    Ok(match side {
        Side::Wave(s) => {
            let ps = eos.pressure(s.rho, phase)?;
            let a = eos.sound_speed(phase)?;
            let (f, df) = wave_curve(s.rho, ps, a, p, rho_star);
            Branch {
                rho_star,
                u_star: s.u + sign * f,
                df,
            }
        }
        Side::Center { u } => Branch {
            rho_star,
            u_star: *u,
            df: 0.0,
        },
    })
}

/// Mass flux from the kinetic relation `z = tau p_v ([[g]] + z^2 [[v^2]] / 2)`
/// with jumps taken liquid minus vapor and the kinetic energy measured in
/// the frame of the boundary.
pub fn kinetic_mass_flux(p_v: f64, p_l: f64, eos: &EosModel) -> Result<f64> {
    Ok(kinetic_mass_flux_gradient(p_v, p_l, eos)?.0)
}

/// Mass flux and its partial derivatives with respect to `p_v` and `p_l`.
///
/// The relation is quadratic in `z`; the returned root is the one reached
/// by the fixed-point iteration `z <- tau p_v (D + B z^2)` started from zero,
/// written in a cancellation-free closed form.
pub fn kinetic_mass_flux_gradient(p_v: f64, p_l: f64, eos: &EosModel) -> Result<(f64, f64, f64)> {
    let rho_v = eos.density_from_pressure(p_v, Phase::Vapor)?;
    let rho_l = eos.density_from_pressure(p_l, Phase::Liquid)?;
    let (v_v, v_l) = (1.0 / rho_v, 1.0 / rho_l);
    let a2_v = eos.rt;
    let a2_l = eos.k0 / eos.rho0;

    let c = eos.tau * p_v;
    let d = eos.gibbs(p_l, Phase::Liquid)? - eos.gibbs(p_v, Phase::Vapor)?;
    let b = 0.5 * (v_l * v_l - v_v * v_v);
    let disc = 1.0 - 4.0 * c * c * b * d;
    if !(disc >= 0.0) {
        return Err(Error::FixedPointDivergence { iterations: 0 });
    }
    let z = 2.0 * c * d / (1.0 + disc.sqrt());
    let contraction = 1.0 - 2.0 * c * b * z;
    if !(contraction > 0.0) {
        return Err(Error::FixedPointDivergence { iterations: 0 });
    }

    let bracket = d + b * z * z;
    let dz_dpv = (eos.tau * bracket + c * (-v_v + v_v.powi(3) / a2_v * z * z)) / contraction;
    let dz_dpl = c * (v_l - v_l.powi(3) / a2_l * z * z) / contraction;
    Ok((z, dz_dpv, dz_dpl))
}

struct Evaluation {
    residual: [f64; 2],
    jacobian: [[f64; 2]; 2],
    z: f64,
    vapor: Branch,
    liquid: Branch,
}

fn evaluate(x: [f64; 2], vapor: &Side, liquid: &Side, eos: &EosModel) -> Result<Evaluation> {
    let [p_v, p_l] = x;
    let bv = branch(vapor, Phase::Vapor, p_v, -1.0, eos)?;
    let bl = branch(liquid, Phase::Liquid, p_l, 1.0, eos)?;
    let (z, z_v, z_l) = kinetic_mass_flux_gradient(p_v, p_l, eos)?;
    let (v_v, v_l) = (1.0 / bv.rho_star, 1.0 / bl.rho_star);
    let jump_v = v_l - v_v;
    // dv/dp = -v^2 / a^2
    let dv_v = -v_v * v_v / eos.rt;
    let dv_l = -v_l * v_l * eos.rho0 / eos.k0;

    let s1 = 1.0 / eos.p0;
    let s2 = 1.0 / eos.rt.sqrt();
    let g1 = (p_l - p_v + z * z * jump_v) * s1;
    let g2 = (bl.u_star - bv.u_star + z * jump_v) * s2;
    let jacobian = [
        [
            (-1.0 + 2.0 * z * z_v * jump_v - z * z * dv_v) * s1,
            (1.0 + 2.0 * z * z_l * jump_v + z * z * dv_l) * s1,
        ],
        [
            (bv.df + z_v * jump_v - z * dv_v) * s2,
            (bl.df + z_l * jump_v + z * dv_l) * s2,
        ],
    ];
    Ok(Evaluation {
        residual: [g1, g2],
        jacobian,
        z,
        vapor: bv,
        liquid: bl,
    })
}

fn fd_jacobian(x: [f64; 2], vapor: &Side, liquid: &Side, eos: &EosModel) -> Result<[[f64; 2]; 2]> {
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let h = f64::EPSILON.sqrt() * x[k].abs().max(eos.p0);
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        let rp = evaluate(xp, vapor, liquid, eos)?.residual;
        let rm = evaluate(xm, vapor, liquid, eos)?.residual;
        for i in 0..2 {
            jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Scaled residual of the two-phase system for vapor-left data.
pub fn residual_g(
    p_v: f64,
    p_l: f64,
    vapor: &PhaseState,
    liquid: &PhaseState,
    eos: &EosModel,
) -> Result<[f64; 2]> {
    Ok(evaluate([p_v, p_l], &Side::Wave(*vapor), &Side::Wave(*liquid), eos)?.residual)
}

/// Jacobian of [`residual_g`] with respect to `(p_v, p_l)`.
pub fn jacobian_g(
    p_v: f64,
    p_l: f64,
    vapor: &PhaseState,
    liquid: &PhaseState,
    eos: &EosModel,
    mode: JacobianMode,
) -> Result<[[f64; 2]; 2]> {
    let (sv, sl) = (Side::Wave(*vapor), Side::Wave(*liquid));
    let jac = match mode {
        JacobianMode::Analytic => evaluate([p_v, p_l], &sv, &sl, eos)?.jacobian,
        JacobianMode::FiniteDifference => fd_jacobian([p_v, p_l], &sv, &sl, eos)?,
    };
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularJacobian);
    }
    Ok(jac)
}

/// Starting pressures from the HLLC contact estimate, vapor on the left.
pub fn hllc_initial_guess(
    vapor: &PhaseState,
    liquid: &PhaseState,
    eos: &EosModel,
) -> Result<(f64, f64)> {
    let a_v = eos.sound_speed(Phase::Vapor)?;
    let a_l = eos.sound_speed(Phase::Liquid)?;
    let p_v = eos.pressure(vapor.rho, Phase::Vapor)?;
    let p_l = eos.pressure(liquid.rho, Phase::Liquid)?;
    let s_l = liquid.u + a_l;
    let s_v = vapor.u - a_v;
    let m_v = vapor.rho * (s_v - vapor.u);
    let m_l = liquid.rho * (s_l - liquid.u);
    if m_v == m_l {
        return Err(Error::DegenerateDenominator);
    }
    let w = (p_l - p_v + m_v * vapor.u - m_l * liquid.u) / (m_v - m_l);
    let rho_star = liquid.rho * (s_l - liquid.u) / (s_l - w);
    let p_star = eos.pressure(rho_star, Phase::Liquid)?;
    let guess_v = p_star.clamp(1e-3 * eos.p0, eos.p_tilde);
    let guess_l = p_star.max(eos.p_min);
    Ok((guess_v, guess_l))
}

fn guess_for(vapor: &Side, liquid: &Side, eos: &EosModel) -> (f64, f64) {
    let stand_in = |side: &Side, phase: Phase| match side {
        Side::Wave(s) => *s,
        Side::Center { u } => {
            let rho = eos.density_from_pressure(eos.p0, phase).unwrap_or(1.0);
            PhaseState::new(rho, *u, phase)
        }
    };
    let v = stand_in(vapor, Phase::Vapor);
    let l = stand_in(liquid, Phase::Liquid);
    hllc_initial_guess(&v, &l, eos).unwrap_or((eos.p0, eos.p0))
}

/// Solves a vapor-left problem whose sides may be center states.
pub(crate) fn solve_oriented(
    vapor: &Side,
    liquid: &Side,
    eos: &EosModel,
    guess: Option<[f64; 2]>,
    opts: &InterfaceOptions,
) -> Result<InterfaceSolution> {
    let x0 = guess.unwrap_or_else(|| {
        let (gv, gl) = guess_for(vapor, liquid, eos);
        [gv, gl]
    });
    let system = |x: [f64; 2]| -> Result<([f64; 2], [[f64; 2]; 2])> {
        let ev = evaluate(x, vapor, liquid, eos)?;
        let jac = match opts.jacobian {
            JacobianMode::Analytic => ev.jacobian,
            JacobianMode::FiniteDifference => fd_jacobian(x, vapor, liquid, eos)?,
        };
        Ok((ev.residual, jac))
    };
    let out = match newton_armijo(system, x0, &opts.newton) {
        Ok(out) => out,
        Err(err) if guess.is_some() => {
            // a stale warm start can sit outside the basin
            let (gv, gl) = guess_for(vapor, liquid, eos);
            newton_armijo(system, [gv, gl], &opts.newton).map_err(|_| err)?
        }
        Err(err) => return Err(err),
    };
    let ev = evaluate(out.x, vapor, liquid, eos)?;
    let [p_v, p_l] = out.x;
    let a_v = eos.sound_speed(Phase::Vapor)?;
    let a_l = eos.sound_speed(Phase::Liquid)?;
    let vapor_wave = match vapor {
        Side::Wave(s) => Some(outer_wave(
            s,
            a_v,
            eos.pressure(s.rho, Phase::Vapor)?,
            p_v,
            ev.vapor.rho_star,
            ev.vapor.u_star,
            -1.0,
        )),
        Side::Center { .. } => None,
    };
    let liquid_wave = match liquid {
        Side::Wave(s) => Some(outer_wave(
            s,
            a_l,
            eos.pressure(s.rho, Phase::Liquid)?,
            p_l,
            ev.liquid.rho_star,
            ev.liquid.u_star,
            1.0,
        )),
        Side::Center { .. } => None,
    };
    Ok(InterfaceSolution {
        p_vapor: p_v,
        p_liquid: p_l,
        rho_vapor: ev.vapor.rho_star,
        rho_liquid: ev.liquid.rho_star,
        u_vapor: ev.vapor.u_star,
        u_liquid: ev.liquid.u_star,
        z: ev.z,
        w: ev.vapor.u_star + ev.z / ev.vapor.rho_star,
        vapor_wave,
        liquid_wave,
        vapor_on_left: true,
        iterations: out.iterations,
        residual_norm: out.residual_max_norm(),
    })
}

/// Solves a problem given in physical order, mirroring when the liquid is
/// on the left. `left_side`/`right_side` carry the phase implicitly.
pub(crate) fn solve_sides(
    left: (Side, Phase),
    right: (Side, Phase),
    eos: &EosModel,
    guess: Option<[f64; 2]>,
    opts: &InterfaceOptions,
) -> Result<InterfaceSolution> {
    match (left.1, right.1) {
        (Phase::Vapor, Phase::Liquid) => solve_oriented(&left.0, &right.0, eos, guess, opts),
        (Phase::Liquid, Phase::Vapor) => {
            Ok(
                solve_oriented(&right.0.mirrored(), &left.0.mirrored(), eos, guess, opts)?
                    .mirrored(),
            )
        }
        _ => Err(Error::SpinodalQuery),
    }
}

fn check_pair(left: &PhaseState, right: &PhaseState) -> Result<()> {
    match (left.phase, right.phase) {
        (Phase::Vapor, Phase::Liquid) | (Phase::Liquid, Phase::Vapor) => Ok(()),
        _ => Err(Error::SpinodalQuery),
    }
}

/// Two-phase Riemann solution with phase transition for data in physical
/// order: one vapor and one liquid state, either way round.
pub fn solve_interface_with_transition(
    left: &PhaseState,
    right: &PhaseState,
    eos: &EosModel,
) -> Result<InterfaceSolution> {
    solve_interface_with_transition_from(left, right, eos, None, &InterfaceOptions::default())
}

/// As [`solve_interface_with_transition`], optionally warm started from
/// `(p_vapor, p_liquid)`.
pub fn solve_interface_with_transition_from(
    left: &PhaseState,
    right: &PhaseState,
    eos: &EosModel,
    guess: Option<[f64; 2]>,
    opts: &InterfaceOptions,
) -> Result<InterfaceSolution> {
    check_pair(left, right)?;
    solve_sides(
        (Side::Wave(*left), left.phase),
        (Side::Wave(*right), right.phase),
        eos,
        guess,
        opts,
    )
}

/// Two-phase solution without mass transfer: pressure and velocity are
/// continuous and the boundary moves with the fluid.
pub fn solve_interface_no_transition(
    left: &PhaseState,
    right: &PhaseState,
    eos: &EosModel,
) -> Result<InterfaceSolution> {
    check_pair(left, right)?;
    let a_l = eos.sound_speed(left.phase)?;
    let a_r = eos.sound_speed(right.phase)?;
    let p_l = left.pressure(eos)?;
    let p_r = right.pressure(eos)?;
    let floor = eos
        .pressure_floor(left.phase)?
        .max(eos.pressure_floor(right.phase)?);
    let curve = |p: f64| -> Result<(f64, f64)> {
        let (fl, dl) = wave_curve(
            left.rho,
            p_l,
            a_l,
            p,
            eos.density_from_pressure(p, left.phase)?,
        );
        let (fr, dr) = wave_curve(
            right.rho,
            p_r,
            a_r,
            p,
            eos.density_from_pressure(p, right.phase)?,
        );
        Ok((fl + fr, dl + dr))
    };
    let du = right.u - left.u;
    let p_scale = p_l.abs().max(p_r.abs()).max(1.0);
    let p = solve_pressure(
        curve,
        du,
        floor,
        0.5 * (p_l + p_r).max(floor + 1e-3 * p_scale),
        p_scale,
    )?;
    let rho_sl = eos.density_from_pressure(p, left.phase)?;
    let rho_sr = eos.density_from_pressure(p, right.phase)?;
    let (fl, _) = wave_curve(left.rho, p_l, a_l, p, rho_sl);
    let (fr, _) = wave_curve(right.rho, p_r, a_r, p, rho_sr);
    let u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let lw = outer_wave(left, a_l, p_l, p, rho_sl, u, -1.0);
    let rw = outer_wave(right, a_r, p_r, p, rho_sr, u, 1.0);
    let vapor_on_left = left.phase == Phase::Vapor;
    let (rho_v, rho_liq, vw, lqw) = if vapor_on_left {
        (rho_sl, rho_sr, lw, rw)
    } else {
        (rho_sr, rho_sl, rw, lw)
    };
    let residual = (fl + fr + du).abs() / eos.rt.sqrt();
    Ok(InterfaceSolution {
        p_vapor: p,
        p_liquid: p,
        rho_vapor: rho_v,
        rho_liquid: rho_liq,
        u_vapor: u,
        u_liquid: u,
        z: 0.0,
        w: u,
        vapor_wave: Some(vw),
        liquid_wave: Some(lqw),
        vapor_on_left,
        iterations: 0,
        residual_norm: residual,
    })
}

/// Flux through the moving boundary, `(-z, -z u* + p*)` from the chosen side.
pub fn phase_boundary_flux(sol: &InterfaceSolution, side: FluxSide) -> Flux {
    let (u, p) = match side {
        FluxSide::UseVapor => (sol.u_vapor, sol.p_vapor),
        FluxSide::UseLiquid => (sol.u_liquid, sol.p_liquid),
    };
    Flux::new(-sol.z, -sol.z * u + p)
}
