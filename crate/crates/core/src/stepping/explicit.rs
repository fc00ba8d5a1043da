use super::{conservative_update, EdgeFlux, Model, StepConfig};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::phase_creation::CreationEvent;

/// Result of the explicit part of a step.
#[derive(Debug, Clone)]
pub struct Sweep<const N: usize> {
    /// Fluxes on all `len() + 1` edges at the old time.
    pub fluxes: Vec<EdgeFlux<N>>,
    /// New states; cells inside implicit blocks keep their old state.
    pub states: Vec<[f64; N]>,
    /// Edge displacements over the step; zero at creation edges.
    pub displacement: Vec<f64>,
    pub creations: Vec<(usize, CreationEvent)>,
    pub max_interface_wave_speed: f64,
}

/// Fluxes at the old time everywhere, creation detection on edges outside
/// the implicit blocks and the explicit update of the cells outside them.
///
/// Cells next to a creation edge get no flux on that side here; the
/// creation step applies it when opening the new cell.
pub fn explicit_sweep<const N: usize, M: Model<N>>(
    mesh: &Mesh<N>,
    model: &M,
    cfg: &StepConfig,
    dt: f64,
    blocks: &[(usize, usize)],
) -> Result<Sweep<N>> {
    let cells = mesh.cells();
    let n = cells.len();
    let mut in_block = vec![false; n];
    for &(a, b) in blocks {
        in_block[a..=b].iter_mut().for_each(|v| *v = true);
    }

    let mut fluxes = Vec::with_capacity(n + 1);
    fluxes.push(model.boundary_flux(&cells[0])?);
    for j in 1..n {
        fluxes.push(model.edge_flux(&cells[j - 1], &cells[j], None)?);
    }
    fluxes.push(model.boundary_flux(&cells[n - 1])?);
    // Outer boundaries do not move.
    fluxes[0].speed = 0.0;
    fluxes[n].speed = 0.0;

    let mut creations = Vec::new();
    if cfg.creation {
        for j in 1..n {
            if in_block[j - 1] || in_block[j] || fluxes[j].interface {
                continue;
            }
            if let Some(ev) = model.creation(&cells[j - 1], &cells[j])? {
                creations.push((j, ev));
            }
        }
    }
    let mut creation_edge = vec![false; n + 1];
    for (j, _) in &creations {
        creation_edge[*j] = true;
    }

    let displacement: Vec<f64> = (0..=n)
        .map(|j| {
            if creation_edge[j] {
                0.0
            } else {
                fluxes[j].speed * dt
            }
        })
        .collect();
    let zero = [0.0; N];
    let mut states = Vec::with_capacity(n);
    for (i, c) in cells.iter().enumerate() {
        if in_block[i] {
            states.push(c.state);
            continue;
        }
        let f_l = if creation_edge[i] {
            &zero
        } else {
            &fluxes[i].flux
        };
        let f_r = if creation_edge[i + 1] {
            &zero
        } else {
            &fluxes[i + 1].flux
        };
        let h_new = c.width() + displacement[i + 1] - displacement[i];
        states.push(conservative_update(
            c.width(),
            &c.state,
            dt,
            f_l,
            f_r,
            h_new,
        ));
    }

    let max_interface_wave_speed = fluxes
        .iter()
        .filter(|f| f.interface)
        .map(|f| f.max_wave_speed)
        .fold(0.0, f64::max);
    Ok(Sweep {
        fluxes,
        states,
        displacement,
        creations,
        max_interface_wave_speed,
    })
}
