//! The canonical representation: exact sections from geodesic endpoints,
//! the three-section trivialization and its exact homothety contraction law.
//!
//! For the canonical suspension the fiber over a tangent vector carries
//! three distinguished points: the two ideal endpoints of the vector's
//! geodesic, sigma_plus (forward) and sigma_minus (backward), both on the
//! real circle, and the diagonal point, the inclusion of the base point into
//! the fiber. They are pairwise disjoint, so they trivialize the fiber by
//! the Möbius map sending sigma_minus to 0, the diagonal to 1 and sigma_plus
//! to infinity.
//!
//! In that coordinate the foliated geodesic flow of the canonical suspension
//! is the exact homothety c_t = e^{-t} c_0: leafwise-constant fiber points
//! have chart coordinates that are continuous across polygon crossings
//! (the base and the fiber are pulled back by the same deck element) and
//! contract toward the coordinate origin. The forward flow therefore
//! attracts every fiber point except the sigma_plus value to the
//! sigma_minus section: the section of largest expansion of the suspension
//! cocycle is the *backward* endpoint section, and the estimators of the
//! `cocycle` module pair up as top <-> sigma_minus, bottom <-> sigma_plus.
//! These exact values are the ground truth for every estimator in the crate.

use num_complex::Complex64;
use std::fmt;

use crate::cocycle::{canonical_representation, CocycleValue, FiberPoint};
use crate::moebius::{map_from_three_points, MoebiusError, SpherePoint};
use crate::surface::{FlowError, IdealPoint, SurfaceGroup, UnitTangent};

pub type C64 = Complex64;

/// Embed an ideal boundary point of the half-plane into the Riemann sphere.
pub fn endpoint_to_sphere(p: IdealPoint) -> SpherePoint {
    match p {
        IdealPoint::Finite(x) => SpherePoint::from_real(x),
        IdealPoint::Infinity => SpherePoint::infinity(),
    }
}

/// Forward ideal endpoint of the geodesic through `v`: the image of
/// infinity under the PSL(2,R) element.
pub fn sigma_plus(v: &UnitTangent) -> SpherePoint {
    endpoint_to_sphere(v.forward_endpoint())
}

/// Backward ideal endpoint: the image of 0. This is the fiber direction of
/// largest expansion of the canonical suspension (the forward attractor).
pub fn sigma_minus(v: &UnitTangent) -> SpherePoint {
    endpoint_to_sphere(v.backward_endpoint())
}

/// The diagonal section: the base point of `v` included into the fiber.
pub fn diagonal_section(v: &UnitTangent) -> SpherePoint {
    SpherePoint::from_affine(v.base_point())
}

/// The trivialization map of the fiber over `v`: sigma_minus -> 0,
/// diagonal -> 1, sigma_plus -> infinity.
pub fn trivialization_map(v: &UnitTangent) -> crate::moebius::ProjectiveMap {
    map_from_three_points(&sigma_minus(v), &diagonal_section(v), &sigma_plus(v))
        .expect("the three canonical sections are pairwise disjoint")
}

/// Coordinate of a fiber point in the three-section trivialization.
pub fn trivialization_coordinate(v: &UnitTangent, w: &SpherePoint) -> SpherePoint {
    trivialization_map(v).apply(w)
}

/// One contraction-law check: flow the pair (v, w) for time `t` under the
/// foliated geodesic flow of the canonical suspension (base by the surface
/// flow, fiber by the canonical cocycle) and compare the trivialization
/// coordinate with the exact homothety e^{-t} c_0.
#[derive(Debug, Clone)]
pub struct ContractionCheck {
    /// Coordinate of the flowed fiber point at the flowed base vector.
    pub observed: C64,
    /// e^{-t} times the starting coordinate.
    pub expected: C64,
    pub error: f64,
}

#[derive(Debug)]
pub enum ContractionError {
    /// w coincides with sigma_plus or sigma_minus of v.
    DegeneratePair(MoebiusError),
    Flow(FlowError),
    /// The coordinate left the affine chart (w was sigma_plus).
    InfiniteCoordinate,
}

impl fmt::Display for ContractionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractionError::DegeneratePair(e) => write!(f, "degenerate pair: {e}"),
            ContractionError::Flow(e) => write!(f, "flow failed: {e}"),
            ContractionError::InfiniteCoordinate => write!(f, "coordinate at infinity"),
        }
    }
}

impl std::error::Error for ContractionError {}

impl From<FlowError> for ContractionError {
    fn from(e: FlowError) -> Self {
        ContractionError::Flow(e)
    }
}

pub fn contraction_check(
    group: &SurfaceGroup,
    v: &UnitTangent,
    w: &SpherePoint,
    t: f64,
) -> Result<ContractionCheck, ContractionError> {
    let rep = canonical_representation(group);
    let c0 = trivialization_coordinate(v, w)
        .to_affine()
        .ok_or(ContractionError::InfiniteCoordinate)?;
    let mut fiber = FiberPoint::from_sphere_point(w);
    let mut transport = CocycleValue::identity(2);
    let flow = group.flow_with_events(v, t, |letter| transport.apply_letter(&rep, letter))?;
    fiber = transport.apply_to_fiber(&fiber);
    let ct = trivialization_coordinate(&flow.v, &fiber.to_sphere_point())
        .to_affine()
        .ok_or(ContractionError::InfiniteCoordinate)?;
    let expected = (-t).exp() * c0;
    Ok(ContractionCheck {
        observed: ct,
        expected,
        error: (ct - expected).norm(),
    })
}
