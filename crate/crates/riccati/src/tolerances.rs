//! Central registry of numerical tolerances and experiment thresholds.
//!
//! Every threshold used by the library and by the acceptance suite is defined
//! here with a short note on where it comes from. No other module hard-codes
//! a magic tolerance.

/// Relative tolerance for projective equality of matrices and points.
pub const PROJECTIVE_EQ_TOL: f64 = 1e-9;

/// Window around 4 for the projective invariant trace^2/det inside which a
/// 2x2 map counts as parabolic. Eigenvalues at a double root move like the
/// square root of perturbations, so the trichotomy is thresholded on this
/// well-conditioned invariant rather than on |eigenvalue| - 1 directly.
pub const CLASSIFY_SIGMA_TOL: f64 = 1e-10;

/// Tolerance on |eigenvalue| - 1 for the integrability criterion on cusp
/// monodromy lifts. Double eigenvalues of parabolic words are only
/// determined to about sqrt(machine epsilon) by any root finder, hence the
/// margin over 1e-8.
pub const INTEGRABILITY_MODULI_TOL: f64 = 1e-6;

/// Minimal Fubini–Study separation of the three boundary points of a disc.
/// Below this the disc is considered degenerate. Kept three orders below
/// the Schottky diameter target so nested discs remain representable until
/// their certified bound is met.
pub const DISC_DISTINCT_TOL: f64 = 1e-12;

/// Number of boundary samples used for disc diameters, gaps and nesting
/// margins. Diameters are accurate to O((pi/n)^2) of the local curvature
/// scale, far below every margin we certify.
pub const DISC_BOUNDARY_SAMPLES: usize = 256;

/// Bisection refinement target (in flow time) for polygon side crossings.
pub const CROSSING_TIME_TOL: f64 = 1e-12;

/// If two sides cross within this time window the step is treated as a
/// vertex hit and the caller is asked to perturb the seed.
pub const VERTEX_HIT_TOL: f64 = 1e-9;

/// Hard cap on fundamental-domain crossings per flow call.
pub const MAX_CROSSINGS: usize = 1_000_000;

/// A lifted trajectory whose cusp-chart height exceeds this is declared
/// captured by the cusp (such geodesics have zero Liouville measure).
pub const CUSP_HEIGHT_CUTOFF: f64 = 1e8;

/// Base integration step of the surface flow away from cusps.
pub const FLOW_BASE_STEP: f64 = 0.05;

/// Rejection sampling aborts when the running acceptance ratio drops below
/// this (bounding box and polygon no longer match).
pub const LIOUVILLE_MIN_ACCEPTANCE: f64 = 1e-4;

/// A section estimate whose half-horizon and full-horizon values move by
/// more than this is flagged "no dominated direction detected". Converged
/// estimates drift by the half-horizon residual (far below this); seeds
/// beyond the shadowing horizon drift by order one.
pub const DOMINATED_DRIFT_TOL: f64 = 1e-3;

/// Nested-disc diameter target for Schottky section values.
pub const SCHOTTKY_DIAMETER_TARGET: f64 = 1e-9;

/// Window cap for nested-disc computations; geometric decay certified by the
/// ping-pong margin makes this ample.
pub const SCHOTTKY_MAX_WINDOW: usize = 64;

/// Quadrature refinement stops when the relative change drops below this.
pub const QUADRATURE_REL_TOL: f64 = 1e-6;

/// Absolute floor added to dispersion comparisons so that observables whose
/// averages collapse to zero do not produce 0/0 verdicts.
pub const DISPERSION_FLOOR: f64 = 1e-9;

// --- Acceptance thresholds (the exit gate; see tests/acceptance.rs) ---

/// Criterion 1: relative error of the cocycle identity on seeded triples.
pub const ACC_COCYCLE_IDENTITY_REL: f64 = 1e-8;

/// Criterion 2: contraction-law error |c_t - e^{-t} c_0|.
pub const ACC_CONTRACTION_ERR: f64 = 1e-6;

/// Criterion 3: |lambda_1 - lambda_2 - 1| for the canonical representation.
pub const ACC_CANONICAL_GAP_ERR: f64 = 0.02;

/// Criterion 4: Fubini–Study error of section estimates at T = 30.
pub const ACC_SECTION_ERR: f64 = 1e-6;

/// Criterion 5: total-variation separation of forward/backward occupation.
pub const ACC_FORWARD_BACKWARD_TV: f64 = 0.5;

/// Criterion 5: across-orbit dispersion must stay below this multiple of the
/// within-orbit late-window dispersion.
pub const ACC_BASIN_DISPERSION_FACTOR: f64 = 3.0;

/// Criterion 6: Schottky section vs generic estimator agreement.
pub const ACC_SCHOTTKY_AGREEMENT: f64 = 1e-5;

/// Criterion 7: Cauchy increment bound |I(2^-16) - I(2^-15)| for parabolic
/// cusp data.
pub const ACC_PARABOLIC_CAUCHY: f64 = 1e-3;

/// Criterion 7: minimal R^2 of the affine fit of I(eps) against log(1/eps)
/// for hyperbolic cusp data.
pub const ACC_HYPERBOLIC_R2: f64 = 0.99;
