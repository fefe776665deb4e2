//! Two-site spin entanglement and EPR inference criteria under detection loss.
//!
//! The library models a pair of spin-carrying photonic sites shared between two
//! parties. Each site holds at most one photon; a detector with efficiency
//! `eta` either registers the photon (spin outcome ±1/2 along the measured
//! axis) or nothing (outcome 0). On top of this sits:
//!
//! - [`qmatrix`]: a dense complex matrix kernel (tensor products, partial
//!   transpose/trace over a subsystem shape, Hermitian eigendecomposition,
//!   expectation/variance with explicit numerical contracts);
//! - [`states`]: constructors for the singlet/Werner family, the lossy
//!   qutrit-pair state (closed form and independent beam-splitter dilation),
//!   and the Schwinger spin/number operators on both detection spaces;
//! - [`criteria`]: entanglement and EPR-inference criteria — negativity via
//!   the positive-partial-transpose test, the projected spin-uncertainty
//!   criterion, the collective-spin criterion, and conditional-variance EPR
//!   inference under two first-class conditioning conventions;
//! - [`gaussian`]: closed-form collective-spin moments for the two-mode
//!   parametric-amplifier (squeezed) state under loss, with entanglement and
//!   EPR checks and detected-occupation threshold curves;
//! - [`sampler`]: seed-deterministic Monte Carlo sampling of joint measurement
//!   outcomes with bootstrap error bars, cross-validating the analytic
//!   criteria.

pub mod criteria;
pub mod gaussian;
pub mod qmatrix;
pub mod sampler;
pub mod states;

/// Error type shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Matrix or vector dimensions do not match the operation's requirements.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    /// A subsystem shape was empty, inconsistent, or indexed out of range.
    #[error("invalid subsystem shape: {0}")]
    InvalidShape(String),
    /// A matrix required to be Hermitian deviates beyond tolerance.
    #[error("not Hermitian: max |a_ij - conj(a_ji)| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    /// The Jacobi eigensolver failed to reach its convergence target.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },
    /// A scalar parameter lies outside its documented domain.
    #[error("parameter {name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    /// A quantity that is real/positive/normalized by construction failed its
    /// numerical tolerance — indicates a broken input, not a user error.
    #[error("numerical contract violated: {0}")]
    ContractViolation(String),
    /// The operation is mathematically undefined for this input (zero weight,
    /// zero variance denominator, empty conditioning set, ...).
    #[error("degenerate operation: {0}")]
    Degenerate(String),
    /// A matrix offered as a quantum state fails Hermiticity/trace/positivity.
    #[error("not a density matrix: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Central numerical tolerances and solver settings.
///
/// Every comparison threshold used by the library lives here so that the
/// contracts stay consistent across modules and tests.
pub mod tol {
    /// Max allowed `|a_ij - conj(a_ji)|` before a matrix is rejected as
    /// non-Hermitian. Inputs within this bound are symmetrized to
    /// `(m + m†)/2` before eigendecomposition.
    pub const HERMITICITY: f64 = 1e-10;
    /// Eigenpair residual `‖Mv - λv‖` guaranteed by the eigensolver for
    /// dimensions up to [`MAX_EIGEN_DIM`].
    pub const EIGEN_RESIDUAL: f64 = 1e-9;
    /// Largest matrix dimension the eigensolver contract covers.
    pub const MAX_EIGEN_DIM: usize = 256;
    /// Max allowed imaginary part of a trace that is real by construction
    /// (expectation values of Hermitian observables).
    pub const IMAG_PART: f64 = 1e-10;
    /// Partial-transpose eigenvalues above `-PPT` count as non-negative when
    /// deciding separability; the negativity clamps them to zero.
    pub const PPT: f64 = 1e-12;
    /// Variances may come out as tiny negatives from cancellation; anything in
    /// `[-VARIANCE_CLAMP, 0)` is clamped to zero, below it is an error.
    pub const VARIANCE_CLAMP: f64 = 1e-12;
    /// Probabilities may come out as tiny negatives; anything in
    /// `[-PROB_CLAMP, 0)` is clamped to zero, below it is an error.
    pub const PROB_CLAMP: f64 = 1e-14;
    /// A joint outcome table must sum to one within this bound.
    pub const PMF_SUM: f64 = 1e-12;
    /// PMF marginal moments must match operator expectation values within
    /// this bound.
    pub const MARGINAL: f64 = 1e-10;
    /// Commuting observables must satisfy `max |[A,B]_ij|` below this bound.
    pub const COMMUTATOR: f64 = 1e-10;
    /// Eigenvalues closer than this are grouped into one measurement outcome.
    pub const OUTCOME_CLUSTER: f64 = 1e-8;
    /// Minimum sector weight for a projection to be well defined.
    pub const PROJECTION_WEIGHT: f64 = 1e-12;
    /// Density-matrix eigenvalues may round slightly negative; states with a
    /// minimum eigenvalue above `-STATE_EIGENVALUE` are accepted.
    pub const STATE_EIGENVALUE: f64 = 1e-10;
    /// Unit-trace check for density matrices.
    pub const STATE_TRACE: f64 = 1e-10;
    /// Bisection bracket lower edge for detection-efficiency thresholds.
    pub const BISECT_LO: f64 = 1e-6;
    /// Bisection convergence tolerance on the efficiency.
    pub const BISECT_TOL: f64 = 1e-10;
    /// Largest squeeze parameter accepted (detected occupations ~1e17).
    pub const R_MAX: f64 = 20.0;
}
