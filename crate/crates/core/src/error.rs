use crate::eos::Phase;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),

    #[error("pressure {pressure} Pa is outside the admissible range of the {phase:?} phase")]
    OutOfRangePressure { pressure: f64, phase: Phase },

    #[error("no equation of state is evaluated inside the spinodal region")]
    SpinodalQuery,

    #[error("single-phase star pressure {p_star} Pa leaves the {phase:?} region")]
    NoSinglePhaseSolution { p_star: f64, phase: Phase },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("mass flux fixed point diverged after {iterations} iterations")]
    FixedPointDivergence { iterations: usize },

    #[error("singular Jacobian in the interface Newton solve")]
    SingularJacobian,

    #[error("vapor and liquid star densities coincide, interface speed is undefined")]
    DegenerateDenominator,

    #[error("the Riemann data generate a vacuum")]
    VacuumGenerated,

    #[error("negative cell width {0}")]
    NegativeWidth(f64),

    #[error("cell {cell} would invert (width {width:e})")]
    CellInversion { cell: usize, width: f64 },

    #[error("cell {cell} entered the spinodal region (density {rho})")]
    PhaseViolation { cell: usize, rho: f64 },

    #[error("mesh has no cells")]
    EmptyMesh,

    #[error("dual time iteration hit the cap of {iterations} (residual {residual:e})")]
    IterationCapReached { iterations: usize, residual: f64 },

    #[error("dual time iteration diverged after {iterations} iterations (residual {residual:e})")]
    DualTimeDiverged { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
