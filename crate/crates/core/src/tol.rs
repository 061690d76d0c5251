//! Central numerical tolerances.
//!
//! Every threshold that a result can be compared against lives here, with the
//! reasoning attached, so tests and library code cannot drift apart. Values
//! are deliberate: loose enough to survive f64 rounding through the worst
//! conditioned path that feeds them, tight enough to catch real defects.

/// Determinant drift below this is left alone; renormalization would only
/// churn last-bit noise.
pub const DET_DRIFT: f64 = 1e-13;

/// Determinant drift past this cannot be blamed on rounding; the matrix is
/// treated as corrupt rather than silently rescaled.
pub const DET_HARD: f64 = 1e-6;

/// Matrix distance to plus or minus the identity below which an element is
/// classified as central. Also the relator-closure requirement.
pub const CENTRAL_MATRIX: f64 = 1e-9;

/// Half-width of the |trace| band around 2 classified as parabolic.
pub const PARABOLIC_BAND: f64 = 1e-9;

/// A winding increment must land within this distance of an integer;
/// anything farther means the window arithmetic lost track, which is a bug,
/// not noise (observed slack is below 1e-10).
pub const WINDING_ROUND: f64 = 0.25;

/// Discreteness proxy: no nontrivial short lattice word may come this close
/// to plus or minus the identity.
pub const DISCRETENESS: f64 = 1e-6;

/// Matrix distance under which two equal-trace, equal-homology words are
/// merged as one group element during conjugacy-class dedup.
pub const CLASS_MATRIX_MERGE: f64 = 1e-6;

/// Quantum for rounding traces into dedup hash keys.
pub const TRACE_HASH_QUANTUM: f64 = 1e-8;

/// Livschitz hypothesis: periodic orbit sums must vanish to this tolerance.
pub const ORBIT_SUM_ZERO: f64 = 1e-9;

/// Bisection half-width for the Bowen root (suspension entropy).
pub const BOWEN_ROOT: f64 = 1e-8;

/// Raw pressure tail vs Aitken extrapolation disagreement beyond this flags
/// non-convergence.
pub const PRESSURE_CONVERGENCE: f64 = 5e-3;

/// Budget for quadrature residuals in the smoother identity check.
pub const SMOOTHER_IDENTITY: f64 = 1e-4;

/// Agreement required between leaf-measure CDFs built at depth and depth+2.
pub const CDF_DEPTH_AGREEMENT: f64 = 1e-5;

/// Interval-scaling residual for the measure of maximal entropy.
pub const MME_SCALING: f64 = 1e-4;

/// Uniform bound on the linearized derivative's deviation from the degree.
pub const LINEARIZE_DERIV: f64 = 1e-3;

/// Sup-distance from the identity allowed for the CDF of an already
/// linearized map.
pub const IDEMPOTENCE_SUP: f64 = 1e-6;

/// Radon-Nikodym holonomy residual budget.
pub const RN_RESIDUAL: f64 = 1e-3;

/// Bisection half-width for the solvable-model volume root.
pub const VOLUME_ROOT: f64 = 1e-8;

/// Roof functions must clear zero on the audit grid by at least ten times
/// the grid modulus-of-continuity bound.
pub const ROOF_MARGIN_FACTOR: f64 = 10.0;

/// Allowed deviation of the degree-12 unstable partition sum from 1.
pub const SRB_PARTITION: f64 = 1e-3;

/// Allowed extrapolated pressure of the unstable log-Jacobian cocycle.
pub const SRB_PRESSURE: f64 = 2e-3;

/// Constant-roof entropy cases and the time-rescaling law must hold to this.
pub const ENTROPY_IDENTITY: f64 = 1e-6;

/// Algebraic closed forms reproduced through floating point (seminorm
/// homogeneity, the solvable-model rate formula) must match to this.
pub const CLOSED_FORM: f64 = 1e-12;
