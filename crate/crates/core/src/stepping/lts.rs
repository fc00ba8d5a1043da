use super::{BlockInput, BlockOutput, EdgeFlux, Model, OuterEdge, StepConfig};
use crate::error::{Error, Result};
use crate::mesh::Cell;

/// Explicit local time stepping of one block.
///
/// The tiny cells take `n` equal substeps bounded by their own width,
/// with the regular cells of the block frozen at the old time. Fluxes and
/// edge displacements are accumulated over the substeps and the regular
/// cells are updated once with their time averages.
pub fn explicit_lts_step<const N: usize, M: Model<N>>(
    model: &M,
    cfg: &StepConfig,
    input: &BlockInput<'_, N>,
) -> Result<BlockOutput<N>> {
    let m = input.cells.len();
    let dt = input.dt;
    let h_tiny = input
        .cells
        .iter()
        .filter(|c| c.tiny)
        .map(Cell::width)
        .fold(f64::INFINITY, f64::min);
    // The tiny cells may carry faster waves than the regular cells that
    // set the step, so their own edges enter the bound as well.
    let s_local = input
        .interior
        .iter()
        .map(|f| f.max_wave_speed)
        .fold(input.s_max, f64::max);
    let dtau0 = cfg.cfl * h_tiny / s_local;
    let substeps = ((dt / dtau0).ceil() as usize).max(1);
    let dtau = dt / substeps as f64;

    let mut cells: Vec<Cell<N>> = input.cells.to_vec();
    let mut acc = vec![[0.0; N]; m + 1];
    let mut displacement = vec![0.0; m + 1];
    let mut last: Vec<EdgeFlux<N>> = Vec::with_capacity(m + 1);
    last.push(input.outer_flux(model, &states(&cells), true)?);
    last.extend_from_slice(input.interior);
    last.push(input.outer_flux(model, &states(&cells), false)?);

    for step in 0..substeps {
        let mut fl = Vec::with_capacity(m + 1);
        for e in 0..=m {
            let f = if e == 0 {
                match input.left {
                    OuterEdge::Frozen(f) => f,
                    OuterEdge::Boundary if step == 0 || cells[0].tiny => {
                        input.outer_flux(model, &states(&cells), true)?
                    }
                    OuterEdge::Boundary => last[0],
                }
            } else if e == m {
                match input.right {
                    OuterEdge::Frozen(f) => f,
                    OuterEdge::Boundary if step == 0 || cells[m - 1].tiny => {
                        input.outer_flux(model, &states(&cells), false)?
                    }
                    OuterEdge::Boundary => last[m],
                }
            } else if !cells[e - 1].tiny && !cells[e].tiny {
                input.interior[e - 1]
            } else if step == 0 {
                last[e]
            } else {
                model.edge_flux(&cells[e - 1], &cells[e], Some(&last[e]))?
            };
            fl.push(f);
        }
        if input.left == OuterEdge::Boundary {
            fl[0].speed = 0.0;
        }
        if input.right == OuterEdge::Boundary {
            fl[m].speed = 0.0;
        }

        let mut x_left = cells[0].x_left + fl[0].speed * dtau;
        for i in 0..m {
            let x_right = cells[i].x_right + fl[i + 1].speed * dtau;
            if cells[i].tiny {
                let h = cells[i].width();
                let h_new = x_right - x_left;
                if !(h_new > 0.0) {
                    return Err(Error::CellInversion {
                        cell: i,
                        width: h_new,
                    });
                }
                for k in 0..N {
                    cells[i].state[k] = (h * cells[i].state[k]
                        - dtau * (fl[i + 1].flux[k] - fl[i].flux[k]))
                        / h_new;
                }
            }
            cells[i].x_left = x_left;
            cells[i].x_right = x_right;
            x_left = x_right;
        }
        for e in 0..=m {
            for k in 0..N {
                acc[e][k] += fl[e].flux[k] * dtau;
            }
            displacement[e] += fl[e].speed * dtau;
        }
        last = fl;
    }

    let mut states_out = Vec::with_capacity(m);
    for (i, c) in input.cells.iter().enumerate() {
        if c.tiny {
            states_out.push(cells[i].state);
            continue;
        }
        let h_new = c.width() + displacement[i + 1] - displacement[i];
        if !(h_new > 0.0) {
            return Err(Error::CellInversion {
                cell: i,
                width: h_new,
            });
        }
        let mut s = [0.0; N];
        for k in 0..N {
            s[k] = (c.width() * c.state[k] - (acc[i + 1][k] - acc[i][k])) / h_new;
        }
        states_out.push(s);
    }
    // Report time averaged fluxes on the block edges.
    let fluxes = last
        .iter()
        .zip(&acc)
        .zip(&displacement)
        .map(|((f, a), d)| {
            let mut avg = *f;
            for k in 0..N {
                avg.flux[k] = a[k] / dt;
            }
            avg.speed = d / dt;
            avg
        })
        .collect();
    Ok(BlockOutput {
        states: states_out,
        displacement,
        fluxes,
        iterations: substeps,
        residual: 0.0,
    })
}

fn states<const N: usize>(cells: &[Cell<N>]) -> Vec<[f64; N]> {
    cells.iter().map(|c| c.state).collect()
}
