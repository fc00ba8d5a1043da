use super::{conservative_update, BlockInput, BlockOutput, EdgeFlux, Model, StepConfig, ThetaRule};
use crate::error::{Error, Result};
use crate::mesh::Cell;

fn theta(rule: ThetaRule, ratio: f64) -> f64 {
    match rule {
        ThetaRule::Fixed(t) => t,
        ThetaRule::SmallCellRatio => ratio,
    }
}

/// Fluxes on all block edges for the block states `w`.
fn block_fluxes<const N: usize, M: Model<N>>(
    model: &M,
    input: &BlockInput<'_, N>,
    w: &[[f64; N]],
    hints: &[EdgeFlux<N>],
) -> Result<Vec<EdgeFlux<N>>> {
    let m = input.cells.len();
    let cell = |i: usize| Cell {
        state: w[i],
        ..input.cells[i]
    };
    let mut out = Vec::with_capacity(m + 1);
    out.push(input.outer_flux(model, w, true)?);
    for e in 1..m {
        out.push(model.edge_flux(&cell(e - 1), &cell(e), Some(&hints[e]))?);
    }
    out.push(input.outer_flux(model, w, false)?);
    if input.left == super::OuterEdge::Boundary {
        out[0].speed = 0.0;
    }
    if input.right == super::OuterEdge::Boundary {
        out[m].speed = 0.0;
    }
    Ok(out)
}

/// Implicit update of one block by dual time stepping.
///
/// The pseudo time iteration is
/// `W <- (W + theta (h^n U^n - dt (F_r - F_l)) / h) / (1 + theta)` with
/// fluxes and predicted widths `h` from the current iterate. It stops when
/// the scaled pseudo time derivative drops below `tol_neighbors` on the
/// regular cells and `tol_small` on the tiny ones. The accepted iterate then
/// only supplies the fluxes for a final conservative update.
pub fn dual_time_update<const N: usize, M: Model<N>>(
    model: &M,
    cfg: &StepConfig,
    input: &BlockInput<'_, N>,
) -> Result<BlockOutput<N>> {
    let m = input.cells.len();
    let dt = input.dt;
    let ratio = input.smallest_tiny_ratio();
    let thetas: Vec<f64> = input
        .cells
        .iter()
        .map(|c| {
            if c.tiny {
                theta(cfg.theta_small, ratio)
            } else {
                theta(cfg.theta_neighbors, ratio)
            }
        })
        .collect();

    let u_old: Vec<[f64; N]> = input.cells.iter().map(|c| c.state).collect();
    let h_old: Vec<f64> = input.cells.iter().map(Cell::width).collect();
    let mut w = u_old.clone();
    let mut fluxes = {
        let mut f = Vec::with_capacity(m + 1);
        f.push(input.outer_flux(model, &w, true)?);
        f.extend_from_slice(input.interior);
        f.push(input.outer_flux(model, &w, false)?);
        f
    };
    if input.left == super::OuterEdge::Boundary {
        fluxes[0].speed = 0.0;
    }
    if input.right == super::OuterEdge::Boundary {
        fluxes[m].speed = 0.0;
    }

    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let residual = loop {
        let mut res_regular: f64 = 0.0;
        let mut res_small: f64 = 0.0;
        let mut next = w.clone();
        for i in 0..m {
            let h = h_old[i] + dt * (fluxes[i + 1].speed - fluxes[i].speed);
            if !(h > 0.0) {
                return Err(Error::CellInversion { cell: i, width: h });
            }
            let target = conservative_update(
                h_old[i],
                &u_old[i],
                dt,
                &fluxes[i].flux,
                &fluxes[i + 1].flux,
                h,
            );
            let th = thetas[i];
            let mut r: f64 = 0.0;
            for k in 0..N {
                next[i][k] = (w[i][k] + th * target[k]) / (1.0 + th);
                let rate = (1.0 + th) * (next[i][k] - w[i][k]) / (th * dt);
                r = r.max(rate.abs() / w[i][k].abs().max(1.0));
            }
            if input.cells[i].tiny {
                res_small = res_small.max(r);
            } else {
                res_regular = res_regular.max(r);
            }
        }
        iterations += 1;
        w = next;
        if !(res_regular.is_finite() && res_small.is_finite()) {
            return Err(Error::DualTimeDiverged {
                iterations,
                residual: f64::INFINITY,
            });
        }
        if res_regular < cfg.tol_neighbors && res_small < cfg.tol_small {
            break (res_regular / cfg.tol_neighbors).max(res_small / cfg.tol_small);
        }
        let score = (res_regular / cfg.tol_neighbors).max(res_small / cfg.tol_small);
        if score < best {
            best = score;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.stall_window {
                return Err(Error::DualTimeDiverged {
                    iterations,
                    residual: score,
                });
            }
        }
        if iterations >= cfg.max_dual_iterations {
            return Err(Error::IterationCapReached {
                iterations,
                residual: score,
            });
        }
        fluxes = block_fluxes(model, input, &w, &fluxes)?;
    };

    // Conservative update from the fluxes of the accepted iterate.
    let fluxes = block_fluxes(model, input, &w, &fluxes)?;
    let mut states = Vec::with_capacity(m);
    let mut displacement = Vec::with_capacity(m + 1);
    for f in &fluxes {
        displacement.push(f.speed * dt);
    }
    for i in 0..m {
        let h = h_old[i] + displacement[i + 1] - displacement[i];
        if !(h > 0.0) {
            return Err(Error::CellInversion { cell: i, width: h });
        }
        states.push(conservative_update(
            h_old[i],
            &u_old[i],
            dt,
            &fluxes[i].flux,
            &fluxes[i + 1].flux,
            h,
        ));
    }
    Ok(BlockOutput {
        states,
        displacement,
        fluxes,
        iterations,
        residual,
    })
}
