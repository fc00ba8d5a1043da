//! One-dimensional moving mesh.
//!
//! Cells tile the domain without gaps. Bulk edges stay fixed; edges between
//! cells of different phase move with the phase boundary. Cells that grow
//! beyond `split_factor * h_av` are halved, cells below
//! `merge_factor * h_av` are merged into a same-phase neighbor, and small
//! cells without such a neighbor are flagged tiny.

use crate::eos::Phase;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<const N: usize> {
    pub x_left: f64,
    pub x_right: f64,
    /// Conserved variables, cell averages.
    pub state: [f64; N],
    pub phase: Phase,
    pub tiny: bool,
}

impl<const N: usize> Cell<N> {
    pub fn new(x_left: f64, x_right: f64, state: [f64; N], phase: Phase) -> Self {
        Cell {
            x_left,
            x_right,
            state,
            phase,
            tiny: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_left + self.x_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Reference width, domain length over the initial cell count.
    pub h_av: f64,
    pub split_factor: f64,
    pub merge_factor: f64,
}

impl MeshParams {
    pub fn new(h_av: f64) -> Self {
        MeshParams {
            h_av,
            split_factor: 2.0,
            merge_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<const N: usize> {
    cells: Vec<Cell<N>>,
    params: MeshParams,
}

impl<const N: usize> Mesh<N> {
    /// `n` equal cells on `[a, b]`, initialized from the cell centers.
    pub fn uniform<F>(a: f64, b: f64, n: usize, init: F) -> Result<Self>
    where
        F: Fn(f64) -> ([f64; N], Phase),
    {
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        if !(b > a) {
            return Err(Error::NegativeWidth(b - a));
        }
        let h = (b - a) / n as f64;
        let edge = |i: usize| if i == n { b } else { a + i as f64 * h };
        let cells = (0..n)
            .map(|i| {
                let (xl, xr) = (edge(i), edge(i + 1));
                let (state, phase) = init(0.5 * (xl + xr));
                Cell::new(xl, xr, state, phase)
            })
            .collect();
        Ok(Mesh {
            cells,
            params: MeshParams::new(h),
        })
    }

    pub fn from_cells(cells: Vec<Cell<N>>, params: MeshParams) -> Result<Self> {
        let mesh = Mesh { cells, params };
        mesh.check_tiling()?;
        Ok(mesh)
    }

    pub fn check_tiling(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for (i, c) in self.cells.iter().enumerate() {
            if !(c.width() > 0.0) {
                return Err(Error::CellInversion {
                    cell: i,
                    width: c.width(),
                });
            }
        }
        for w in self.cells.windows(2) {
            if w[0].x_right != w[1].x_left {
                return Err(Error::InvalidConfig(format!(
                    "cells do not tile: gap between {} and {}",
                    w[0].x_right, w[1].x_left
                )));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> &[Cell<N>] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Cell<N>] {
        &mut self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn params(&self) -> &MeshParams {
        &self.params
    }

    pub fn h_av(&self) -> f64 {
        self.params.h_av
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.cells[0].x_left,
            self.cells[self.cells.len() - 1].x_right,
        )
    }

    /// Edge positions, `len() + 1` of them.
    pub fn edges(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.cells.iter().map(|c| c.x_left).collect();
        x.push(self.cells[self.cells.len() - 1].x_right);
        x
    }

    /// Indices `j` of edges between cells `j - 1` and `j` of different phase.
    pub fn interface_edges(&self) -> Vec<usize> {
        (1..self.cells.len())
            .filter(|&j| self.cells[j - 1].phase != self.cells[j].phase)
            .collect()
    }

    /// Sum of width times conserved state.
    pub fn totals(&self) -> [f64; N] {
        let mut t = [0.0; N];
        for c in &self.cells {
            let h = c.width();
            for k in 0..N {
                t[k] += h * c.state[k];
            }
        }
        t
    }

    /// Smallest width, optionally ignoring tiny cells.
    pub fn min_width(&self, skip_tiny: bool) -> f64 {
        self.cells
            .iter()
            .filter(|c| !(skip_tiny && c.tiny))
            .map(Cell::width)
            .fold(f64::INFINITY, f64::min)
    }

    /// Widths after moving every edge `j` by `speeds[j] * dt`.
    pub fn predict_widths(&self, speeds: &[f64], dt: f64) -> Result<Vec<f64>> {
        if speeds.len() != self.cells.len() + 1 {
            return Err(Error::InvalidConfig("one speed per edge required".into()));
        }
        let widths: Vec<f64> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| c.width() + dt * (speeds[i + 1] - speeds[i]))
            .collect();
        if let Some((i, &w)) = widths.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return Err(Error::CellInversion { cell: i, width: w });
        }
        Ok(widths)
    }

    /// Moves every edge `j` by `displacement[j]`; states are untouched.
    pub fn move_edges(&mut self, displacement: &[f64]) -> Result<()> {
        let n = self.cells.len();
        if displacement.len() != n + 1 {
            return Err(Error::InvalidConfig(
                "one displacement per edge required".into(),
            ));
        }
        let mut x = self.edges();
        for j in 0..=n {
            x[j] += displacement[j];
        }
        for i in 0..n {
            let width = x[i + 1] - x[i];
            if !(width > 0.0) {
                return Err(Error::CellInversion { cell: i, width });
            }
        }
        for (i, c) in self.cells.iter_mut().enumerate() {
            c.x_left = x[i];
            c.x_right = x[i + 1];
        }
        Ok(())
    }

    /// Moves phase boundary edges with their speeds over `dt`. Bulk edges
    /// are kept in place whatever speed is given for them.
    pub fn align_interfaces(&mut self, speeds: &[f64], dt: f64) -> Result<()> {
        let n = self.cells.len();
        if speeds.len() != n + 1 {
            return Err(Error::InvalidConfig("one speed per edge required".into()));
        }
        let mut disp = vec![0.0; n + 1];
        for j in self.interface_edges() {
            disp[j] = speeds[j] * dt;
        }
        self.move_edges(&disp)
    }

    /// Inserts `cell` at position `index`, taking its extent from the
    /// neighbors it overlaps.
    pub fn insert_cell(&mut self, index: usize, cell: Cell<N>) -> Result<()> {
        if index > self.cells.len() {
            return Err(Error::InvalidConfig(format!(
                "insert position {index} out of range"
            )));
        }
        if !(cell.width() > 0.0) {
            return Err(Error::NegativeWidth(cell.width()));
        }
        if index > 0 {
            self.cells[index - 1].x_right = cell.x_left;
        }
        if index < self.cells.len() {
            self.cells[index].x_left = cell.x_right;
        }
        self.cells.insert(index, cell);
        self.check_tiling()
    }

    /// Halves every cell wider than `split_factor * h_av`. Returns the
    /// number of splits.
    pub fn maybe_split(&mut self) -> usize {
        let limit = self.params.split_factor * self.params.h_av;
        let mut out = Vec::with_capacity(self.cells.len());
        let mut count = 0;
        for c in self.cells.drain(..) {
            if c.width() > limit {
                let mid = c.center();
                out.push(Cell { x_right: mid, ..c });
                out.push(Cell { x_left: mid, ..c });
                count += 1;
            } else {
                out.push(c);
            }
        }
        self.cells = out;
        count
    }

    /// Merges cells narrower than `merge_factor * h_av` into the smaller
    /// same-phase neighbor, ties going left. Returns the number of merges.
    pub fn maybe_merge(&mut self) -> usize {
        let limit = self.params.merge_factor * self.params.h_av;
        let mut count = 0;
        let mut i = 0;
        while i < self.cells.len() {
            let c = self.cells[i];
            if c.width() >= limit || self.cells.len() == 1 {
                i += 1;
                continue;
            }
            let left = (i > 0 && self.cells[i - 1].phase == c.phase).then(|| i - 1);
            let right =
                (i + 1 < self.cells.len() && self.cells[i + 1].phase == c.phase).then_some(i + 1);
            let target = match (left, right) {
                (Some(l), Some(r)) => {
                    if self.cells[r].width() < self.cells[l].width() {
                        r
                    } else {
                        l
                    }
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => {
                    i += 1;
                    continue;
                }
            };
            let (a, b) = (i.min(target), i.max(target));
            let (ca, cb) = (self.cells[a], self.cells[b]);
            let (ha, hb) = (ca.width(), cb.width());
            let mut state = [0.0; N];
            for k in 0..N {
                state[k] = (ha * ca.state[k] + hb * cb.state[k]) / (ha + hb);
            }
            self.cells[a] = Cell {
                x_left: ca.x_left,
                x_right: cb.x_right,
                state,
                phase: c.phase,
                tiny: false,
            };
            self.cells.remove(b);
            count += 1;
            i = a;
        }
        count
    }

    /// Flags cells narrower than `merge_factor * h_av` as tiny.
    pub fn flag_tiny(&mut self) {
        let limit = self.params.merge_factor * self.params.h_av;
        for c in &mut self.cells {
            c.tiny = c.width() < limit;
        }
    }

    /// Split, merge and reflag in that order.
    pub fn adapt(&mut self) -> (usize, usize) {
        let s = self.maybe_split();
        let m = self.maybe_merge();
        self.flag_tiny();
        (s, m)
    }
}
