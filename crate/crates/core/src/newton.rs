//! Newton iteration with Armijo backtracking for small dense systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop when the max norm of the residual drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Sufficient decrease parameter.
    pub sigma: f64,
    /// Extra full Newton steps taken after convergence, each kept only if
    /// it does not increase the residual.
    pub polish_steps: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-9,
            max_iter: 100,
            max_backtracks: 30,
            sigma: 1e-4,
            polish_steps: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: [f64; 2],
    pub residual: [f64; 2],
    pub iterations: usize,
    /// Euclidean residual norm after each accepted step, starting with the guess.
    pub history: Vec<f64>,
}

impl NewtonOutcome {
    pub fn residual_max_norm(&self) -> f64 {
        self.residual[0].abs().max(self.residual[1].abs())
    }
}

fn norm2(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn norm_inf(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Solves `J d = -r`.
pub fn newton_direction(r: [f64; 2], j: [[f64; 2]; 2]) -> Result<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = (j[0][0].abs() + j[0][1].abs()) * (j[1][0].abs() + j[1][1].abs());
    if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(Error::SingularJacobian);
    }
    Ok([
        -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
        -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
    ])
}

/// Newton-Armijo iteration for a 2x2 system.
///
/// `system(x)` returns the residual and Jacobian at `x`, or an error when
/// `x` is not admissible; inadmissible trial points shorten the step. If
/// the Jacobian is singular the step falls back to steepest descent on
/// `|r|^2 / 2`.
pub fn newton_armijo<F>(mut system: F, x0: [f64; 2], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: FnMut([f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2])>,
{
    let mut x = x0;
    let (mut r, mut j) = system(x)?;
    let mut history = vec![norm2(r)];
    let mut iterations = 0;

    while norm_inf(r) >= opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                solver: "interface Newton-Armijo",
                iterations,
                residual: norm_inf(r),
            });
        }
        iterations += 1;
        let d = match newton_direction(r, j) {
            Ok(d) => d,
            Err(_) => {
                let g = [
                    j[0][0] * r[0] + j[1][0] * r[1],
                    j[0][1] * r[0] + j[1][1] * r[1],
                ];
                [-g[0], -g[1]]
            }
        };
        let f0 = norm2(r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = [x[0] + lambda * d[0], x[1] + lambda * d[1]];
            if let Ok((rt, jt)) = system(trial) {
                if rt.iter().all(|v| v.is_finite()) && norm2(rt) < (1.0 - opts.sigma * lambda) * f0
                {
                    accepted = Some((trial, rt, jt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt, jt)) => {
                x = xt;
                r = rt;
                j = jt;
                history.push(norm2(r));
            }
            None => {
                return Err(Error::NonConvergence {
                    solver: "interface Armijo line search",
                    iterations,
                    residual: norm_inf(r),
                })
            }
        }
    }

    for _ in 0..opts.polish_steps {
        if norm2(r) == 0.0 {
            break;
        }
        let Ok(d) = newton_direction(r, j) else { break };
        let trial = [x[0] + d[0], x[1] + d[1]];
        if trial == x {
            break;
        }
        match system(trial) {
            Ok((rt, jt)) if norm2(rt) < norm2(r) => {
                x = trial;
                r = rt;
                j = jt;
            }
            _ => break,
        }
    }

    Ok(NewtonOutcome {
        x,
        residual: r,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_line(x: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2])> {
        // x^2 + y^2 = 4, x = y
        Ok((
            [x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]],
            [[2.0 * x[0], 2.0 * x[1]], [1.0, -1.0]],
        ))
    }

    #[test]
    fn converges_to_root() {
        let out = newton_armijo(circle_line, [3.0, 0.5], &NewtonOptions::default()).unwrap();
        let s = 2f64.sqrt();
        assert!((out.x[0] - s).abs() < 1e-14 && (out.x[1] - s).abs() < 1e-14);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn inadmissible_region_shortens_steps() {
        // root at x = 1 with the domain restricted to x > 0.5, far start
        let sys = |x: [f64; 2]| {
            if x[0] <= 0.5 {
                return Err(Error::SingularJacobian);
            }
            Ok(([x[0].ln(), x[1] - 2.0], [[1.0 / x[0], 0.0], [0.0, 1.0]]))
        };
        let out = newton_armijo(sys, [20.0, 0.0], &NewtonOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = NewtonOptions {
            max_iter: 1,
            ..NewtonOptions::default()
        };
        let err = newton_armijo(circle_line, [30.0, -7.0], &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn singular_direction_detected() {
        assert_eq!(
            newton_direction([1.0, 1.0], [[1.0, 2.0], [2.0, 4.0]]),
            Err(Error::SingularJacobian)
        );
    }
}
