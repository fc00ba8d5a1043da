//! Finite volume solver for one-dimensional isothermal liquid-vapor flow.
//!
//! Phase boundaries are tracked as mesh edges moving with the interface
//! speed. Fluxes across them come from an exact two-phase Riemann solver
//! closed by a kinetic relation, and new phases can be created inside
//! single-phase data (cavitation and nucleation). Cells created this way
//! are tiny, so the time integrator couples an explicit Godunov sweep with
//! dual time stepping on the small cells and their neighbors.

pub mod eos;
pub mod error;
pub mod mesh;
pub mod newton;
pub mod phase_creation;
pub mod riemann_classical;
pub mod riemann_interface;
pub mod stepping;

pub use eos::{EosModel, Phase};
pub use error::{Error, Result};
pub use mesh::{Cell, Mesh, MeshParams};
