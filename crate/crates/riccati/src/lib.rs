//! Numerical laboratory for the foliated geodesic flow of a Riccati equation:
//! the projective cocycle over the geodesic flow of a finite hyperbolic
//! Riemann surface defined by a monodromy representation.
//!
//! The crate is organised around one pipeline:
//!
//! * [`moebius`]: projective linear algebra on the Riemann sphere and
//!   CP^(n-1): Möbius maps, cross-ratios, discs, the Fubini–Study metric.
//! * [`surface`]: Fuchsian quotients of the upper half-plane: geodesic flow
//!   on PSL(2,R), fundamental-polygon crossing bookkeeping, Liouville
//!   sampling, itinerary coding, cusp excursion geometry.
//! * [`cocycle`]: the matrix cocycle over the surface flow determined by a
//!   representation: word evaluation, Lyapunov spectra, section estimators,
//!   the integrability criterion.
//! * [`canonical`]: the canonical (covering) representation: exact sections
//!   from geodesic endpoints, the three-section trivialization and its exact
//!   homothety contraction law.
//! * [`schottky`]: ping-pong certification and nested-disc section
//!   computation for Schottky monodromies.
//! * [`cusp`]: punctured-disc excursion measure, in–out monodromy matrices
//!   and the numerical integrability dichotomy.
//! * [`srb`]: time averages of fiber observables, basin tests and empirical
//!   pushforward measures.
//! * [`presets`]: shipped surfaces, representations and Schottky systems,
//!   plus the plain-text preset file formats.
//!
//! All numerical tolerances live in [`tolerances`]; randomness comes from the
//! small deterministic generator in [`rng`] so that every experiment is
//! reproducible from a 64-bit seed.

pub mod book;
pub mod canonical;
pub mod cocycle;
pub mod cusp;
mod linalg;
pub mod moebius;
pub mod presets;
pub mod rng;
pub mod schottky;
pub mod srb;
pub mod surface;
pub mod tolerances;
