//! Centralized numerical tolerances.
//!
//! Every threshold used by more than one module lives here so that the
//! support convention, ingestion tolerances, and check slacks stay in sync.

/// Relative eigenvalue cutoff below which a mode counts as kernel.
/// Matrix pseudo-functions (log, inverse square root, ...) act only on
/// eigenvalues above `SUPPORT_REL * lambda_max`.
pub const SUPPORT_REL: f64 = 1e-10;

/// Hermiticity deviation accepted on ingestion, relative to entry scale.
pub const HERMITIZE_REL: f64 = 1e-10;

/// Smallest eigenvalue accepted for a density operator.
pub const DENSITY_EIG_FLOOR: f64 = -1e-9;

/// Unit-trace deviation accepted for a density operator.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;

/// Norm deviation accepted for a pure state vector.
pub const PURE_NORM_TOL: f64 = 1e-10;

/// Default duality-gap tolerance of the interior-point solver.
pub const SDP_GAP_TOL: f64 = 1e-8;

/// Default feasibility tolerance of the interior-point solver.
pub const SDP_FEAS_TOL: f64 = 1e-8;

/// Default iteration cap of the interior-point solver.
pub const SDP_MAX_ITER: usize = 200;

/// Default Frank-Wolfe gap tolerance for relative entropy of resource.
pub const FW_TOL: f64 = 1e-4;

/// Default Frank-Wolfe iteration cap.
pub const FW_MAX_ITER: usize = 5000;

/// Eigenvalue-gap threshold (relative to lambda_max) below which the
/// divided-difference kernel of log switches to its analytic limit.
pub const DIVIDED_DIFF_DEGENERATE_REL: f64 = 1e-12;

/// Total-dimension capacity for dense operators (configurable per call site).
pub const CAPACITY_DEFAULT: usize = 1 << 14;

/// Total-dimension cap for the exact Wasserstein SDP.
pub const W1_EXACT_CAP: usize = 64;
