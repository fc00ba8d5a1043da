//! Single-phase Riemann solvers.
//!
//! Both branches of the isothermal equation of state have a constant sound
//! speed, so the wave curves share one closed form: a shock satisfies
//! `f = (p* - p) / (a sqrt(rho rho*))` and a rarefaction `f = a ln(rho* / rho)`.

pub mod euler;
mod hll;

pub use hll::{davis_speeds, hll_flux};

use crate::eos::{EosModel, Phase};
use crate::error::{Error, Result};

/// Primitive isothermal state tagged with its phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub rho: f64,
    pub u: f64,
    pub phase: Phase,
}

impl PhaseState {
    pub fn new(rho: f64, u: f64, phase: Phase) -> Self {
        PhaseState { rho, u, phase }
    }

    pub fn from_pressure(p: f64, u: f64, phase: Phase, eos: &EosModel) -> Result<Self> {
        Ok(PhaseState {
            rho: eos.density_from_pressure(p, phase)?,
            u,
            phase,
        })
    }

    pub fn from_conserved(cons: [f64; 2], phase: Phase) -> Result<Self> {
        if !(cons[0] > 0.0) {
            return Err(Error::NonPositiveDensity(cons[0]));
        }
        Ok(PhaseState {
            rho: cons[0],
            u: cons[1] / cons[0],
            phase,
        })
    }

    pub fn conserved(&self) -> [f64; 2] {
        [self.rho, self.rho * self.u]
    }

    pub fn pressure(&self, eos: &EosModel) -> Result<f64> {
        eos.pressure(self.rho, self.phase)
    }

    pub fn sound_speed(&self, eos: &EosModel) -> Result<f64> {
        eos.sound_speed(self.phase)
    }

    pub fn flux(&self, eos: &EosModel) -> Result<Flux> {
        let p = self.pressure(eos)?;
        Ok(Flux {
            mass: self.rho * self.u,
            momentum: self.rho * self.u * self.u + p,
        })
    }

    /// Mirror image under `x -> -x`.
    pub fn mirrored(&self) -> Self {
        PhaseState {
            u: -self.u,
            ..*self
        }
    }
}

/// Numerical flux of mass and momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Flux {
    pub mass: f64,
    pub momentum: f64,
}

impl Flux {
    pub fn new(mass: f64, momentum: f64) -> Self {
        Flux { mass, momentum }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.mass, self.momentum]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// Outer wave of a Riemann fan. For a shock `head == tail`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub kind: WaveKind,
    /// Speed of the edge facing the undisturbed state.
    pub head: f64,
    /// Speed of the edge facing the star region.
    pub tail: f64,
}

impl Wave {
    pub fn max_abs_speed(&self) -> f64 {
        self.head.abs().max(self.tail.abs())
    }
}

/// Star region of a single-phase isothermal Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarState {
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

/// Value and pressure derivative of the wave function connecting a state of
/// density `rho`, pressure `p` and sound speed `a` to the pressure `p_star`.
/// `rho_star` must be the density at `p_star` on the same branch.
pub fn wave_curve(rho: f64, p: f64, a: f64, p_star: f64, rho_star: f64) -> (f64, f64) {
    if p_star > p {
        let root = (rho * rho_star).sqrt();
        let f = (p_star - p) / (a * root);
        let df = (rho_star + rho) / (2.0 * a * rho_star * root);
        (f, df)
    } else {
        let f = a * ((p_star - p) / (a * a * rho)).ln_1p();
        (f, 1.0 / (a * rho_star))
    }
}

/// Wave function of `state` at `p_star`.
pub fn wave_function(state: &PhaseState, p_star: f64, eos: &EosModel) -> Result<(f64, f64)> {
    let p = state.pressure(eos)?;
    let a = state.sound_speed(eos)?;
    let rho_star = eos.density_from_pressure(p_star, state.phase)?;
    Ok(wave_curve(state.rho, p, a, p_star, rho_star))
}

/// Wave of the family facing `left` (`sign = -1`) or `right` (`sign = +1`).
pub fn outer_wave(
    state: &PhaseState,
    a: f64,
    p: f64,
    p_star: f64,
    rho_star: f64,
    u_star: f64,
    sign: f64,
) -> Wave {
    if p_star > p {
        let s = state.u + sign * a * (rho_star / state.rho).sqrt();
        Wave {
            kind: WaveKind::Shock,
            head: s,
            tail: s,
        }
    } else {
        Wave {
            kind: WaveKind::Rarefaction,
            head: state.u + sign * a,
            tail: u_star + sign * a,
        }
    }
}

const SCALAR_MAX_ITER: usize = 200;

/// Solves `f_left(p) + f_right(p) + du = 0` for the common star pressure
/// with Newton steps safeguarded by a bisection bracket.
///
/// `curve(p)` returns the summed wave functions and their derivative. The
/// sum is increasing in `p` and tends to minus infinity at `floor`.
pub(crate) fn solve_pressure<F>(
    curve: F,
    du: f64,
    floor: f64,
    guess: f64,
    p_scale: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let eval = |p: f64| -> Result<(f64, f64)> {
        let (f, df) = curve(p)?;
        Ok((f + du, df))
    };

    let mut lo = floor;
    let mut hi = guess.max(floor + p_scale);
    let mut step = p_scale.max(hi.abs());
    let mut fhi = eval(hi)?.0;
    let mut grow = 0;
    while fhi < 0.0 {
        lo = hi;
        hi += step;
        step *= 2.0;
        fhi = eval(hi)?.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return Err(Error::NonConvergence {
                solver: "isothermal pressure bracket",
                iterations: grow,
                residual: fhi,
            });
        }
    }

    let mut p = guess.clamp(lo, hi);
    if p <= floor {
        p = 0.5 * (lo + hi);
    }
    for _ in 0..SCALAR_MAX_ITER {
        let (f, df) = eval(p)?;
        if f == 0.0 {
            return Ok(p);
        }
        if f > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let mut next = p - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let tol = 4.0 * f64::EPSILON * next.abs().max(p_scale * 1e-3);
        if (next - p).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        p = next;
    }
    Err(Error::NonConvergence {
        solver: "isothermal pressure",
        iterations: SCALAR_MAX_ITER,
        residual: eval(p)?.0,
    })
}

/// Exact solution of the single-phase isothermal Riemann problem.
///
/// Returns [`Error::NoSinglePhaseSolution`] when the star pressure exceeds the
/// maximum vapor pressure or drops below the minimum liquid pressure. The
/// offending pressure is carried in the error so callers can trigger phase
/// creation.
pub fn exact_isothermal(
    left: &PhaseState,
    right: &PhaseState,
    eos: &EosModel,
) -> Result<StarState> {
    let phase = left.phase;
    if phase != right.phase || !matches!(phase, Phase::Vapor | Phase::Liquid) {
        return Err(Error::SpinodalQuery);
    }
    let star = solve_fan(left, right, eos)?;
    let leaves = match phase {
        Phase::Vapor => star.p_star > eos.p_tilde,
        _ => star.p_star < eos.p_min,
    };
    if leaves {
        return Err(Error::NoSinglePhaseSolution {
            p_star: star.p_star,
            phase,
        });
    }
    Ok(star)
}

/// Star state on the extended branches, without the range check.
pub fn solve_fan(left: &PhaseState, right: &PhaseState, eos: &EosModel) -> Result<StarState> {
    let phase = left.phase;
    let a = eos.sound_speed(phase)?;
    let p_l = left.pressure(eos)?;
    let p_r = right.pressure(eos)?;
    let floor = eos.pressure_floor(phase)?;
    let du = right.u - left.u;

    let curve = |p: f64| -> Result<(f64, f64)> {
        let rho_star = eos.density_from_pressure(p, phase)?;
        let (fl, dfl) = wave_curve(left.rho, p_l, a, p, rho_star);
        let (fr, dfr) = wave_curve(right.rho, p_r, a, p, rho_star);
        Ok((fl + fr, dfl + dfr))
    };
    // two-rarefaction estimate from the Riemann invariants
    let rho_guess = (left.rho * right.rho).sqrt() * (-du / (2.0 * a)).exp();
    let guess = eos.pressure(rho_guess, phase).unwrap_or(0.5 * (p_l + p_r));
    let p_scale = p_l.abs().max(p_r.abs()).max(1.0);
    let p_star = solve_pressure(curve, du, floor, guess, p_scale)?;

    let rho_star = eos.density_from_pressure(p_star, phase)?;
    let (fl, _) = wave_curve(left.rho, p_l, a, p_star, rho_star);
    let (fr, _) = wave_curve(right.rho, p_r, a, p_star, rho_star);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    Ok(StarState {
        p_star,
        u_star,
        rho_star_left: rho_star,
        rho_star_right: rho_star,
        left_wave: outer_wave(left, a, p_l, p_star, rho_star, u_star, -1.0),
        right_wave: outer_wave(right, a, p_r, p_star, rho_star, u_star, 1.0),
    })
}

/// State inside a left-facing wave fan at similarity coordinate `xi`.
/// The 1-family keeps `u + a ln rho` constant.
pub(crate) fn left_fan_state(from: &PhaseState, a: f64, xi: f64) -> PhaseState {
    let u = xi + a;
    PhaseState::new(from.rho * ((from.u - u) / a).exp(), u, from.phase)
}

/// State inside a right-facing wave fan. The 2-family keeps `u - a ln rho`.
pub(crate) fn right_fan_state(from: &PhaseState, a: f64, xi: f64) -> PhaseState {
    let u = xi - a;
    PhaseState::new(from.rho * ((u - from.u) / a).exp(), u, from.phase)
}

/// Samples one outer wave at `xi`: `state` ahead of the head, `star`
/// behind the tail and the rarefaction fan in between. `left` selects the
/// left-facing family.
pub fn sample_outer_wave(
    state: &PhaseState,
    star: &PhaseState,
    wave: &Wave,
    a: f64,
    xi: f64,
    left: bool,
) -> PhaseState {
    if left {
        if xi < wave.head {
            *state
        } else if xi >= wave.tail {
            *star
        } else {
            left_fan_state(state, a, xi)
        }
    } else if xi > wave.head {
        *state
    } else if xi <= wave.tail {
        *star
    } else {
        right_fan_state(state, a, xi)
    }
}

/// Samples the single-phase fan at `xi = x / t`.
pub fn sample_isothermal_fan(
    star: &StarState,
    left: &PhaseState,
    right: &PhaseState,
    xi: f64,
    eos: &EosModel,
) -> Result<PhaseState> {
    let a = eos.sound_speed(left.phase)?;
    if xi <= star.u_star {
        let w = star.left_wave;
        Ok(if xi < w.head {
            *left
        } else if xi >= w.tail {
            PhaseState::new(star.rho_star_left, star.u_star, left.phase)
        } else {
            left_fan_state(left, a, xi)
        })
    } else {
        let w = star.right_wave;
        Ok(if xi > w.head {
            *right
        } else if xi <= w.tail {
            PhaseState::new(star.rho_star_right, star.u_star, right.phase)
        } else {
            right_fan_state(right, a, xi)
        })
    }
}
