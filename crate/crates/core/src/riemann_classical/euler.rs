//! Exact Riemann solver for the full Euler equations of a gamma-law gas.

use super::{Wave, WaveKind};
use crate::error::{Error, Result};

/// Primitive state `(rho, u, p)` of a gamma-law gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl GasState {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        GasState { rho, u, p }
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    pub fn conserved(&self, gamma: f64) -> [f64; 3] {
        let e = self.p / (gamma - 1.0) + 0.5 * self.rho * self.u * self.u;
        [self.rho, self.rho * self.u, e]
    }

    pub fn from_conserved(cons: [f64; 3], gamma: f64) -> Result<Self> {
        let [rho, m, e] = cons;
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        let u = m / rho;
        let p = (gamma - 1.0) * (e - 0.5 * rho * u * u);
        Ok(GasState { rho, u, p })
    }

    pub fn flux(&self, gamma: f64) -> [f64; 3] {
        let [_, m, e] = self.conserved(gamma);
        [m, m * self.u + self.p, self.u * (e + self.p)]
    }
}

/// Solution of a gamma-law Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerSolution {
    pub gamma: f64,
    pub left: GasState,
    pub right: GasState,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

struct Side {
    rho: f64,
    p: f64,
    c: f64,
    a: f64,
    b: f64,
}

impl Side {
    fn new(s: &GasState, gamma: f64) -> Self {
        Side {
            rho: s.rho,
            p: s.p,
            c: s.sound_speed(gamma),
            a: 2.0 / ((gamma + 1.0) * s.rho),
            b: (gamma - 1.0) / (gamma + 1.0) * s.p,
        }
    }

    fn f(&self, p: f64, gamma: f64) -> (f64, f64) {
        if p > self.p {
            let q = (self.a / (p + self.b)).sqrt();
            let f = (p - self.p) * q;
            (f, q * (1.0 - 0.5 * (p - self.p) / (p + self.b)))
        } else {
            let e = (gamma - 1.0) / (2.0 * gamma);
            let r = (p / self.p).powf(e);
            let f = 2.0 * self.c / (gamma - 1.0) * (r - 1.0);
            (f, r / (self.rho * self.c) * (self.p / p))
        }
    }

    fn rho_star(&self, p: f64, gamma: f64) -> f64 {
        if p > self.p {
            let g = (gamma - 1.0) / (gamma + 1.0);
            let ratio = p / self.p;
            self.rho * (ratio + g) / (g * ratio + 1.0)
        } else {
            self.rho * (p / self.p).powf(1.0 / gamma)
        }
    }
}

const MAX_ITER: usize = 100;

/// Exact solution, Newton iteration on the star pressure to a relative
/// change of 1e-12.
pub fn exact_euler_gamma(left: &GasState, right: &GasState, gamma: f64) -> Result<EulerSolution> {
    for s in [left, right] {
        if !(s.rho > 0.0) {
            return Err(Error::NonPositiveDensity(s.rho));
        }
        if !(s.p > 0.0) {
            return Err(Error::OutOfRangePressure {
                pressure: s.p,
                phase: crate::eos::Phase::Neutral,
            });
        }
    }
    let l = Side::new(left, gamma);
    let r = Side::new(right, gamma);
    let du = right.u - left.u;
    if 2.0 / (gamma - 1.0) * (l.c + r.c) <= du {
        return Err(Error::VacuumGenerated);
    }

    // two-rarefaction guess, always positive
    let e = (gamma - 1.0) / (2.0 * gamma);
    let num = l.c + r.c - 0.5 * (gamma - 1.0) * du;
    let den = l.c / l.p.powf(e) + r.c / r.p.powf(e);
    let mut p = (num / den).powf(1.0 / e).max(1e-12 * (l.p + r.p));

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let (fl, dl) = l.f(p, gamma);
        let (fr, dr) = r.f(p, gamma);
        let mut next = p - (fl + fr + du) / (dl + dr);
        if next <= 0.0 {
            next = 0.5 * p;
        }
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            solver: "gamma-law star pressure",
            iterations: MAX_ITER,
            residual: l.f(p, gamma).0 + r.f(p, gamma).0 + du,
        });
    }
    let (fl, _) = l.f(p, gamma);
    let (fr, _) = r.f(p, gamma);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let rho_star_left = l.rho_star(p, gamma);
    let rho_star_right = r.rho_star(p, gamma);

    let wave = |s: &GasState, side: &Side, rho_star: f64, sign: f64| {
        if p > s.p {
            let g1 = (gamma + 1.0) / (2.0 * gamma);
            let g2 = (gamma - 1.0) / (2.0 * gamma);
            let speed = s.u + sign * side.c * (g1 * p / s.p + g2).sqrt();
            Wave {
                kind: WaveKind::Shock,
                head: speed,
                tail: speed,
            }
        } else {
            let c_star = (gamma * p / rho_star).sqrt();
            Wave {
                kind: WaveKind::Rarefaction,
                head: s.u + sign * side.c,
                tail: u_star + sign * c_star,
            }
        }
    };
    Ok(EulerSolution {
        gamma,
        left: *left,
        right: *right,
        p_star: p,
        u_star,
        rho_star_left,
        rho_star_right,
        left_wave: wave(left, &l, rho_star_left, -1.0),
        right_wave: wave(right, &r, rho_star_right, 1.0),
    })
}

impl EulerSolution {
    /// State at similarity coordinate `xi = x / t`.
    pub fn sample(&self, xi: f64) -> GasState {
        let g = self.gamma;
        let fan = |s: &GasState, sign: f64| {
            let c = s.sound_speed(g);
            let k = 2.0 / (g + 1.0) + sign * (g - 1.0) / ((g + 1.0) * c) * (s.u - xi);
            let rho = s.rho * k.powf(2.0 / (g - 1.0));
            let u = 2.0 / (g + 1.0) * (sign * c + 0.5 * (g - 1.0) * s.u + xi);
            GasState::new(rho, u, s.p * k.powf(2.0 * g / (g - 1.0)))
        };
        if xi <= self.u_star {
            let w = self.left_wave;
            if xi < w.head {
                self.left
            } else if xi >= w.tail {
                GasState::new(self.rho_star_left, self.u_star, self.p_star)
            } else {
                fan(&self.left, 1.0)
            }
        } else {
            let w = self.right_wave;
            if xi > w.head {
                self.right
            } else if xi <= w.tail {
                GasState::new(self.rho_star_right, self.u_star, self.p_star)
            } else {
                fan(&self.right, -1.0)
            }
        }
    }

    /// Godunov flux, the physical flux of the state on `x / t = 0`.
    pub fn godunov_flux(&self) -> [f64; 3] {
        self.sample(0.0).flux(self.gamma)
    }

    pub fn max_wave_speed(&self) -> f64 {
        self.left_wave
            .max_abs_speed()
            .max(self.right_wave.max_abs_speed())
    }
}
