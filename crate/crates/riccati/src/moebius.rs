//! Möbius and projective linear algebra on the Riemann sphere and CP^(n-1).
//!
//! Matrices are kept max-entry normalized so that words of length 10^3 and
//! beyond neither overflow nor underflow; all equality is projective (up to a
//! nonzero complex scalar). Distances are measured in the Fubini–Study arc
//! metric, normalized so antipodal points are pi/2 apart. Discs are stored as
//! three boundary points plus an interior witness, which transports exactly
//! under Möbius maps with no special casing at infinity.

use num_complex::Complex64;
use std::fmt;

use crate::linalg;
use crate::tolerances::{
    CLASSIFY_SIGMA_TOL, DISC_BOUNDARY_SAMPLES, DISC_DISTINCT_TOL, PROJECTIVE_EQ_TOL,
};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum MoebiusError {
    /// Inputs that must be pairwise distinct coincide within tolerance.
    CoincidentPoints,
    /// Image boundary points of a disc collapsed below tolerance.
    DegenerateDisc,
    /// The identity has no isolated fixed points.
    NoIsolatedFixedPoints,
}

impl fmt::Display for MoebiusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoebiusError::CoincidentPoints => write!(f, "points coincide within tolerance"),
            MoebiusError::DegenerateDisc => write!(f, "disc degenerate"),
            MoebiusError::NoIsolatedFixedPoints => write!(f, "no isolated fixed points"),
        }
    }
}

impl std::error::Error for MoebiusError {}

/// Fubini–Study distance between two nonzero homogeneous vectors, in [0, pi/2].
///
/// Computed as atan2(|v ∧ w|, |<v, w>|), which is exact at both ends of the
/// range (no cancellation for nearly equal or nearly antipodal points).
pub fn fubini_study_distance_vec(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut inner = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        inner += x.conj() * y;
    }
    let mut wedge_sq = 0.0f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            wedge_sq += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    wedge_sq.sqrt().atan2(inner.norm())
}

/// A point of the Riemann sphere CP^1 in homogeneous coordinates (w0 : w1),
/// kept max-magnitude normalized. The affine chart is z = w0 / w1.
#[derive(Debug, Clone, Copy)]
pub struct SpherePoint {
    w: [C64; 2],
}

impl SpherePoint {
    pub fn from_homogeneous(w0: C64, w1: C64) -> Self {
        let scale = w0.norm().max(w1.norm());
        assert!(
            scale > 0.0 && scale.is_finite(),
            "homogeneous coordinates must be finite and not both zero"
        );
        SpherePoint {
            w: [w0 / scale, w1 / scale],
        }
    }

    pub fn from_affine(z: C64) -> Self {
        Self::from_homogeneous(z, C64::new(1.0, 0.0))
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_affine(C64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        SpherePoint {
            w: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    pub fn zero() -> Self {
        SpherePoint {
            w: [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    pub fn one() -> Self {
        Self::from_real(1.0)
    }

    pub fn homogeneous(&self) -> [C64; 2] {
        self.w
    }

    pub fn is_infinity(&self) -> bool {
        self.w[1].norm() <= 1e-14
    }

    /// Affine value w0/w1; `None` for the point at infinity.
    pub fn to_affine(&self) -> Option<C64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.w[0] / self.w[1])
        }
    }

    pub fn fs_distance(&self, other: &SpherePoint) -> f64 {
        fubini_study_distance_vec(&self.w, &other.w)
    }

    /// Projective equality: proportional homogeneous coordinates.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        (self.w[0] * other.w[1] - self.w[1] * other.w[0]).norm() <= tol
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_affine() {
            Some(z) => write!(f, "{}{:+}i", z.re, z.im),
            None => write!(f, "inf"),
        }
    }
}

/// Classification of a 2x2 projective map by eigenvalue moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// An invertible n x n complex matrix modulo scaling, acting on CP^(n-1).
#[derive(Debug, Clone)]
pub struct ProjectiveMap {
    n: usize,
    entries: Vec<C64>,
}

impl ProjectiveMap {
    /// Row-major entries. Panics on non-finite or singular input: those are
    /// type invariants, not runtime conditions.
    pub fn new(n: usize, entries: Vec<C64>) -> Self {
        assert!(n >= 2, "projective maps need n >= 2");
        assert_eq!(entries.len(), n * n, "need n*n entries");
        assert!(
            entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "entries must be finite"
        );
        let mut m = ProjectiveMap { n, entries };
        m.normalize();
        let d = linalg::det(n, &m.entries).norm();
        assert!(d > 1e-250, "matrix must be invertible, |det| = {d}");
        m
    }

    pub fn from_2x2(rows: [[C64; 2]; 2]) -> Self {
        Self::new(2, vec![rows[0][0], rows[0][1], rows[1][0], rows[1][1]])
    }

    pub fn from_2x2_real(rows: [[f64; 2]; 2]) -> Self {
        Self::from_2x2([
            [C64::new(rows[0][0], 0.0), C64::new(rows[0][1], 0.0)],
            [C64::new(rows[1][0], 0.0), C64::new(rows[1][1], 0.0)],
        ])
    }

    pub fn identity(n: usize) -> Self {
        ProjectiveMap {
            n,
            entries: linalg::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    /// Divide by the max-magnitude entry. Keeps long words in range without
    /// changing the projective class.
    fn normalize(&mut self) {
        let scale = linalg::max_entry_norm(&self.entries);
        assert!(scale > 0.0 && scale.is_finite(), "zero or non-finite matrix");
        for z in &mut self.entries {
            *z /= scale;
        }
    }

    pub fn compose(&self, other: &ProjectiveMap) -> ProjectiveMap {
        assert_eq!(self.n, other.n);
        let mut m = ProjectiveMap {
            n: self.n,
            entries: linalg::mat_mul(self.n, &self.entries, &other.entries),
        };
        m.normalize();
        m
    }

    pub fn inverse(&self) -> ProjectiveMap {
        let entries = if self.n == 2 {
            let [a, b, c, d] = [self.entries[0], self.entries[1], self.entries[2], self.entries[3]];
            vec![d, -b, -c, a]
        } else {
            linalg::inverse(self.n, &self.entries).expect("type invariant: invertible")
        };
        let mut m = ProjectiveMap { n: self.n, entries };
        m.normalize();
        m
    }

    pub fn det(&self) -> C64 {
        linalg::det(self.n, &self.entries)
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        assert_eq!(self.n, 2, "apply acts on the sphere; use apply_vector for n > 2");
        let w = p.homogeneous();
        let v = linalg::mat_vec(2, &self.entries, &w);
        SpherePoint::from_homogeneous(v[0], v[1])
    }

    /// Projective action on CP^(n-1): image of a homogeneous vector,
    /// max-magnitude renormalized.
    pub fn apply_vector(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n);
        let mut out = linalg::mat_vec(self.n, &self.entries, v);
        let scale = linalg::max_entry_norm(&out);
        assert!(scale > 0.0, "image of nonzero vector vanished");
        for z in &mut out {
            *z /= scale;
        }
        out
    }

    /// Projective equality within `tol`, relative to the max entry.
    pub fn projectively_eq(&self, other: &ProjectiveMap, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        // Both are max-entry normalized; align phases on the largest entry.
        let k = self
            .entries
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if other.entries[k].norm() < tol {
            return false;
        }
        let r = other.entries[k] / self.entries[k];
        self.entries
            .iter()
            .zip(other.entries.iter())
            .all(|(a, b)| (a * r - b).norm() <= tol * r.norm().max(1.0))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.projectively_eq(&ProjectiveMap::identity(self.n), tol)
    }

    /// Eigenvalues of the 2x2 matrix rescaled to determinant 1 (so moduli
    /// are projective invariants).
    pub fn eigenvalues_det1(&self) -> (C64, C64) {
        assert_eq!(self.n, 2);
        let d = self.det().sqrt();
        let tr = (self.entries[0] + self.entries[3]) / d;
        let disc = (tr * tr - C64::new(4.0, 0.0)).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    }

    /// Trichotomy for n = 2, decided on the projective invariant
    /// sigma = trace^2 / det: sigma = 4 is parabolic (or the identity),
    /// sigma real in [0, 4) is elliptic (distinct unit-modulus eigenvalues),
    /// anything else has an eigenvalue of modulus != 1. `sigma_tol` is the
    /// window around the parabolic locus and the real axis.
    pub fn classify_with_tol(&self, sigma_tol: f64) -> MapClass {
        assert_eq!(self.n, 2);
        if self.is_identity(PROJECTIVE_EQ_TOL) {
            return MapClass::Identity;
        }
        let tr = self.entries[0] + self.entries[3];
        let sigma = tr * tr / self.det();
        if (sigma - C64::new(4.0, 0.0)).norm() <= sigma_tol {
            MapClass::Parabolic
        } else if sigma.im.abs() <= sigma_tol && sigma.re >= -sigma_tol && sigma.re < 4.0 {
            MapClass::Elliptic
        } else {
            MapClass::Hyperbolic
        }
    }

    pub fn classify(&self) -> MapClass {
        self.classify_with_tol(CLASSIFY_SIGMA_TOL)
    }

    /// Fixed points on the sphere (n = 2): one for a parabolic, two
    /// otherwise, ordered with the attracting one first when the moduli
    /// differ. The identity is rejected.
    pub fn fixed_points(&self) -> Result<Vec<SpherePoint>, MoebiusError> {
        assert_eq!(self.n, 2);
        if self.is_identity(PROJECTIVE_EQ_TOL) {
            return Err(MoebiusError::NoIsolatedFixedPoints);
        }
        let class = self.classify();
        let d = self.det().sqrt();
        let [a, b, c, dd] = [
            self.entries[0] / d,
            self.entries[1] / d,
            self.entries[2] / d,
            self.entries[3] / d,
        ];
        let eigenvector = |l: C64| -> SpherePoint {
            // Rows of (M - l I) are proportional; pick the better-conditioned
            // kernel vector.
            let v1 = [b, l - a];
            let v2 = [l - dd, c];
            let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
            let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
            if n1 >= n2 {
                SpherePoint::from_homogeneous(v1[0], v1[1])
            } else {
                SpherePoint::from_homogeneous(v2[0], v2[1])
            }
        };
        let (l1, l2) = {
            let tr = a + dd;
            let disc = (tr * tr - C64::new(4.0, 0.0)).sqrt();
            ((tr + disc) / 2.0, (tr - disc) / 2.0)
        };
        if class == MapClass::Parabolic {
            let l = (l1 + l2) / 2.0;
            return Ok(vec![eigenvector(l)]);
        }
        let (first, second) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };
        Ok(vec![eigenvector(first), eigenvector(second)])
    }

    /// Eigenvalue moduli of the stored matrix (not determinant-rescaled),
    /// sorted descending. Used by the integrability criterion, which is a
    /// statement about a chosen linear lift.
    pub fn eigenvalue_moduli_of_lift(&self, lift_scale: f64) -> Vec<f64> {
        linalg::eigenvalue_moduli(self.n, &self.entries)
            .into_iter()
            .map(|m| m * lift_scale)
            .collect()
    }
}

impl fmt::Display for ProjectiveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self.entry(i, j);
                write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

/// The unique projective map sending a -> 0, b -> 1, c -> infinity.
pub fn map_from_three_points(
    a: &SpherePoint,
    b: &SpherePoint,
    c: &SpherePoint,
) -> Result<ProjectiveMap, MoebiusError> {
    let tol = DISC_DISTINCT_TOL;
    if a.fs_distance(b) < tol || b.fs_distance(c) < tol || a.fs_distance(c) < tol {
        return Err(MoebiusError::CoincidentPoints);
    }
    let [a0, a1] = a.homogeneous();
    let [c0, c1] = c.homogeneous();
    let [b0, b1] = b.homogeneous();
    // Row 0 annihilates a (numerator), row 1 annihilates c (denominator).
    let row0 = [a1, -a0];
    let row1 = [c1, -c0];
    let mu = row0[0] * b0 + row0[1] * b1;
    let nu = row1[0] * b0 + row1[1] * b1;
    if mu.norm() < 1e-14 || nu.norm() < 1e-14 {
        return Err(MoebiusError::CoincidentPoints);
    }
    Ok(ProjectiveMap::from_2x2([
        [nu * row0[0], nu * row0[1]],
        [mu * row1[0], mu * row1[1]],
    ]))
}

/// Cross-ratio with the convention cross_ratio(0, 1, inf, z) = z, i.e. the
/// image of d under the map sending a -> 0, b -> 1, c -> inf.
pub fn cross_ratio(
    a: &SpherePoint,
    b: &SpherePoint,
    c: &SpherePoint,
    d: &SpherePoint,
) -> Result<SpherePoint, MoebiusError> {
    Ok(map_from_three_points(a, b, c)?.apply(d))
}

/// A closed disc on the Riemann sphere: three boundary points plus an
/// interior witness. The constructor orients the boundary so that the
/// witness is on the positive (interior) side.
#[derive(Debug, Clone)]
pub struct Disc {
    boundary: [SpherePoint; 3],
    witness: SpherePoint,
}

impl Disc {
    pub fn new(boundary: [SpherePoint; 3], witness: SpherePoint) -> Result<Disc, MoebiusError> {
        let [a, b, c] = &boundary;
        if a.fs_distance(b) < DISC_DISTINCT_TOL
            || b.fs_distance(c) < DISC_DISTINCT_TOL
            || a.fs_distance(c) < DISC_DISTINCT_TOL
        {
            return Err(MoebiusError::DegenerateDisc);
        }
        let m = map_from_three_points(a, b, c).map_err(|_| MoebiusError::DegenerateDisc)?;
        let h = interior_height(&m, &witness);
        if h.abs() < 1e-12 {
            return Err(MoebiusError::DegenerateDisc);
        }
        let oriented = if h > 0.0 {
            boundary
        } else {
            [boundary[0], boundary[2], boundary[1]]
        };
        Ok(Disc {
            boundary: oriented,
            witness,
        })
    }

    /// Euclidean circle |z - center| = r, witness at the center.
    pub fn from_euclidean_circle(center: C64, r: f64) -> Disc {
        let b = [
            SpherePoint::from_affine(center + C64::new(r, 0.0)),
            SpherePoint::from_affine(center + C64::new(0.0, r)),
            SpherePoint::from_affine(center - C64::new(r, 0.0)),
        ];
        Disc::new(b, SpherePoint::from_affine(center)).expect("valid circle")
    }

    pub fn boundary(&self) -> &[SpherePoint; 3] {
        &self.boundary
    }

    pub fn witness(&self) -> &SpherePoint {
        &self.witness
    }

    fn coordinate_map(&self) -> ProjectiveMap {
        map_from_three_points(&self.boundary[0], &self.boundary[1], &self.boundary[2])
            .expect("type invariant: boundary distinct")
    }

    /// Strict interior test: the boundary maps to the real circle and the
    /// interior to the upper half-plane of the coordinate chart.
    pub fn contains(&self, p: &SpherePoint) -> bool {
        interior_height(&self.coordinate_map(), p) > 0.0
    }

    /// The disc on the other side of the same boundary circle.
    pub fn complement(&self) -> Disc {
        let m = self.coordinate_map();
        let inv = m.inverse();
        let outside = inv.apply(&SpherePoint::from_affine(C64::new(0.0, -1.0)));
        Disc::new(self.boundary, outside).expect("complement of valid disc is valid")
    }

    /// Image under a projective map: Möbius maps send circles to circles, so
    /// mapping the three boundary points and the witness transports the disc
    /// exactly.
    pub fn image_under(&self, m: &ProjectiveMap) -> Result<Disc, MoebiusError> {
        let b = [
            m.apply(&self.boundary[0]),
            m.apply(&self.boundary[1]),
            m.apply(&self.boundary[2]),
        ];
        Disc::new(b, m.apply(&self.witness))
    }

    /// Boundary samples: preimages of a uniform sweep of the real circle in
    /// the coordinate chart.
    pub fn sample_boundary(&self, k: usize) -> Vec<SpherePoint> {
        let inv = self.coordinate_map().inverse();
        (0..k)
            .map(|i| {
                let t = std::f64::consts::PI * ((i as f64 + 0.5) / k as f64 - 0.5);
                inv.apply(&SpherePoint::from_real(t.tan()))
            })
            .collect()
    }

    /// Fubini–Study diameter of the boundary circle: max pairwise distance
    /// of `DISC_BOUNDARY_SAMPLES` boundary samples.
    pub fn diameter(&self) -> f64 {
        self.diameter_with_samples(DISC_BOUNDARY_SAMPLES)
    }

    /// Diameter from `k` boundary samples, inflated by the worst-case
    /// sampling defect (pi/k)^2 so the result upper-bounds the true
    /// diameter.
    pub fn diameter_with_samples(&self, k: usize) -> f64 {
        let pts = self.sample_boundary(k);
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(pts[i].fs_distance(&pts[j]));
            }
        }
        let defect = std::f64::consts::PI / k as f64;
        best * (1.0 + defect * defect)
    }

    /// Minimal Fubini–Study gap to a disjoint disc; `None` when the closed
    /// discs are not disjoint. Boundary circles closer than the sampling
    /// resolution (they may touch or coincide) also report `None`.
    pub fn gap_to(&self, other: &Disc) -> Option<f64> {
        let mine = self.sample_boundary(DISC_BOUNDARY_SAMPLES);
        let theirs = other.sample_boundary(DISC_BOUNDARY_SAMPLES);
        if mine.iter().any(|p| other.contains(p))
            || theirs.iter().any(|p| self.contains(p))
            || other.contains(&self.witness)
            || self.contains(&other.witness)
        {
            return None;
        }
        let gap = min_pairwise(&mine, &theirs);
        if gap <= sampling_resolution() {
            return None;
        }
        Some(gap)
    }

    /// Margin by which `self` nests strictly inside `outer`; `None` when it
    /// does not nest with at least the sampling resolution to spare.
    pub fn nesting_margin_inside(&self, outer: &Disc) -> Option<f64> {
        let mine = self.sample_boundary(DISC_BOUNDARY_SAMPLES);
        if !mine.iter().all(|p| outer.contains(p)) || !outer.contains(&self.witness) {
            return None;
        }
        let theirs = outer.sample_boundary(DISC_BOUNDARY_SAMPLES);
        let margin = min_pairwise(&mine, &theirs);
        if margin <= sampling_resolution() {
            return None;
        }
        Some(margin)
    }
}

/// Worst-case spacing of boundary samples; gaps below this cannot be
/// distinguished from touching circles.
fn sampling_resolution() -> f64 {
    3.2 / DISC_BOUNDARY_SAMPLES as f64
}

fn min_pairwise(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for p in a {
        for q in b {
            best = best.min(p.fs_distance(q));
        }
    }
    best
}

/// Imaginary part of the coordinate of `p` in the chart where the disc
/// boundary is the real circle; positive means interior.
fn interior_height(coordinate_map: &ProjectiveMap, p: &SpherePoint) -> f64 {
    let q = coordinate_map.apply(p);
    let [w0, w1] = q.homogeneous();
    // Im(w0/w1) without dividing: Im(w0 * conj(w1)) / |w1|^2, and |w1|^2 > 0
    // is monotone-irrelevant for the sign; points at infinity get height 0.
    (w0 * w1.conj()).im
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn translation() -> ProjectiveMap {
        ProjectiveMap::from_2x2_real([[1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn apply_identity_and_translation() {
        let id = ProjectiveMap::identity(2);
        let p = SpherePoint::from_affine(c(0.3, -0.7));
        assert!(id.apply(&p).approx_eq(&p, 1e-12));
        // z -> z + 1 sends 0 to 1
        let img = translation().apply(&SpherePoint::zero());
        assert!(img.approx_eq(&SpherePoint::one(), 1e-12));
    }

    #[test]
    fn quarter_rotation_fixes_i() {
        let r = ProjectiveMap::from_2x2_real([[0.0, -1.0], [1.0, 0.0]]);
        let i = SpherePoint::from_affine(c(0.0, 1.0));
        assert!(r.apply(&i).approx_eq(&i, 1e-12));
    }

    #[test]
    fn compose_inverse_is_identity() {
        let m = ProjectiveMap::from_2x2([
            [c(1.0, 2.0), c(0.3, -0.4)],
            [c(-0.2, 0.1), c(0.8, 0.0)],
        ]);
        assert!(m.compose(&m.inverse()).is_identity(1e-12));
        assert!(m.inverse().compose(&m).is_identity(1e-12));
        let id = ProjectiveMap::identity(2);
        assert!(id.compose(&m).projectively_eq(&m, 1e-12));
    }

    #[test]
    fn compose_matches_direct_product() {
        let a = ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 1.0]]);
        let b = translation();
        let expect = ProjectiveMap::from_2x2_real([[2.0, 2.0], [0.0, 1.0]]);
        assert!(a.compose(&b).projectively_eq(&expect, 1e-12));
    }

    #[test]
    fn compose_associative_projectively() {
        let a = ProjectiveMap::from_2x2([[c(1.0, 0.5), c(2.0, 0.0)], [c(0.0, 1.0), c(1.0, 1.0)]]);
        let b = ProjectiveMap::from_2x2([[c(0.0, -1.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.5, 0.5)]]);
        let d = ProjectiveMap::from_2x2([[c(3.0, 0.0), c(0.1, 0.1)], [c(0.2, 0.0), c(1.0, -1.0)]]);
        let lhs = a.compose(&b).compose(&d);
        let rhs = a.compose(&b.compose(&d));
        assert!(lhs.projectively_eq(&rhs, 1e-10));
    }

    #[test]
    fn classify_trichotomy() {
        assert_eq!(translation().classify(), MapClass::Parabolic);
        let h = ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 0.5]]);
        assert_eq!(h.classify(), MapClass::Hyperbolic);
        let th = 0.3f64;
        let e = ProjectiveMap::from_2x2([
            [C64::from_polar(1.0, th), c(0.0, 0.0)],
            [c(0.0, 0.0), C64::from_polar(1.0, -th)],
        ]);
        assert_eq!(e.classify(), MapClass::Elliptic);
        let s = ProjectiveMap::from_2x2_real([[3.0, 0.0], [0.0, 3.0]]);
        assert_eq!(s.classify(), MapClass::Identity);
    }

    #[test]
    fn classify_is_conjugation_invariant() {
        let g = ProjectiveMap::from_2x2([[c(1.0, 1.0), c(0.5, 0.0)], [c(0.0, 0.3), c(2.0, -1.0)]]);
        let cases = [
            translation(),
            ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 0.5]]),
            ProjectiveMap::from_2x2([
                [C64::from_polar(1.0, 0.7), c(0.0, 0.0)],
                [c(0.0, 0.0), C64::from_polar(1.0, -0.7)],
            ]),
        ];
        for m in cases {
            let conj = g.compose(&m).compose(&g.inverse());
            assert_eq!(m.classify(), conj.classify());
        }
    }

    #[test]
    fn fixed_points_examples() {
        let h = ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 0.5]]);
        let fps = h.fixed_points().unwrap();
        assert_eq!(fps.len(), 2);
        // attracting first: infinity for diag(2, 1/2)
        assert!(fps[0].approx_eq(&SpherePoint::infinity(), 1e-12));
        assert!(fps[1].approx_eq(&SpherePoint::zero(), 1e-12));

        let fps = translation().fixed_points().unwrap();
        assert_eq!(fps.len(), 1);
        assert!(fps[0].approx_eq(&SpherePoint::infinity(), 1e-12));

        let r = ProjectiveMap::from_2x2_real([[0.0, -1.0], [1.0, 0.0]]);
        let fps = r.fixed_points().unwrap();
        assert_eq!(fps.len(), 2);
        let i = SpherePoint::from_affine(c(0.0, 1.0));
        let mi = SpherePoint::from_affine(c(0.0, -1.0));
        assert!(fps.iter().any(|p| p.approx_eq(&i, 1e-9)));
        assert!(fps.iter().any(|p| p.approx_eq(&mi, 1e-9)));

        assert_eq!(
            ProjectiveMap::identity(2).fixed_points().unwrap_err(),
            MoebiusError::NoIsolatedFixedPoints
        );
    }

    #[test]
    fn fs_distance_basics() {
        let p = SpherePoint::from_affine(c(0.4, 1.3));
        assert_eq!(p.fs_distance(&p), 0.0);
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!((SpherePoint::zero().fs_distance(&SpherePoint::infinity()) - half_pi).abs() < 1e-15);
        // unitary invariance: rotation by a unitary map preserves distances
        let u = ProjectiveMap::from_2x2([
            [c(0.6, 0.0), c(0.0, 0.8)],
            [c(0.0, 0.8), c(0.6, 0.0)],
        ]);
        let a = SpherePoint::one();
        let b = SpherePoint::from_affine(c(0.0, 1.0));
        let d0 = a.fs_distance(&b);
        let d1 = u.apply(&a).fs_distance(&u.apply(&b));
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn fs_triangle_inequality_seeded() {
        let mut rng = crate::rng::Rng::new(11);
        for _ in 0..200 {
            let mut pt = || {
                SpherePoint::from_homogeneous(
                    c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                    c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                )
            };
            let (a, b, cc) = (pt(), pt(), pt());
            assert!(a.fs_distance(&cc) <= a.fs_distance(&b) + b.fs_distance(&cc) + 1e-12);
        }
    }

    #[test]
    fn three_point_map_convention() {
        let m = map_from_three_points(&SpherePoint::zero(), &SpherePoint::one(), &SpherePoint::infinity())
            .unwrap();
        assert!(m.is_identity(1e-12));
        let z = SpherePoint::from_affine(c(2.0, 3.0));
        let cr = cross_ratio(&SpherePoint::zero(), &SpherePoint::one(), &SpherePoint::infinity(), &z)
            .unwrap();
        assert!(cr.approx_eq(&z, 1e-12));
        assert!(matches!(
            map_from_three_points(&SpherePoint::zero(), &SpherePoint::zero(), &SpherePoint::one()),
            Err(MoebiusError::CoincidentPoints)
        ));
    }

    #[test]
    fn cross_ratio_projective_invariance_seeded() {
        let mut rng = crate::rng::Rng::new(1009);
        for _ in 0..100 {
            let mut pt = || {
                SpherePoint::from_homogeneous(
                    c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                    c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                )
            };
            let (a, b, cc, d) = (pt(), pt(), pt(), pt());
            if a.fs_distance(&b) < 1e-3 || b.fs_distance(&cc) < 1e-3 || a.fs_distance(&cc) < 1e-3 {
                continue;
            }
            let m = ProjectiveMap::from_2x2([
                [c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)), c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0))],
                [c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)), c(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0))],
            ]);
            let lhs = cross_ratio(&a, &b, &cc, &d).unwrap();
            let rhs = cross_ratio(&m.apply(&a), &m.apply(&b), &m.apply(&cc), &m.apply(&d)).unwrap();
            // relative tolerance 1e-9 on the sphere
            assert!(
                lhs.fs_distance(&rhs) < 1e-9,
                "cross-ratio moved by {}",
                lhs.fs_distance(&rhs)
            );
        }
    }

    #[test]
    fn disc_identity_and_scaling() {
        let d = Disc::from_euclidean_circle(c(0.0, 0.0), 1.0);
        let img = d.image_under(&ProjectiveMap::identity(2)).unwrap();
        assert!(img.contains(&SpherePoint::zero()));
        assert!(!img.contains(&SpherePoint::from_affine(c(2.0, 0.0))));

        // z -> 2z on the unit disc: radius-2 disc, checked via boundary points
        let two = ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 1.0]]);
        let img = d.image_under(&two).unwrap();
        for p in [c(2.0, 0.0), c(-2.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)] {
            let q = SpherePoint::from_affine(p);
            let on_boundary = img
                .sample_boundary(512)
                .iter()
                .any(|s| s.fs_distance(&q) < 0.02);
            assert!(on_boundary, "expected {p} on the image boundary");
        }
        assert!(img.contains(&SpherePoint::zero()));
    }

    #[test]
    fn disc_inversion_sends_small_disc_across_infinity() {
        let d = Disc::from_euclidean_circle(c(0.0, 0.0), 0.5);
        let inv = ProjectiveMap::from_2x2_real([[0.0, 1.0], [1.0, 0.0]]); // z -> 1/z
        let img = d.image_under(&inv).unwrap();
        assert!(img.contains(&SpherePoint::infinity()));
        assert!(img.witness().approx_eq(&SpherePoint::infinity(), 1e-12));
        assert!(!img.contains(&SpherePoint::zero()));
    }

    #[test]
    fn disc_diameter_hemisphere_and_isometry() {
        // the real-axis "disc" through 1, i, -1 with witness at the
        // upper-half-plane center is a hemisphere: diameter pi/2
        let d = Disc::new(
            [SpherePoint::one(), SpherePoint::from_affine(c(0.0, 1.0)), SpherePoint::from_real(-1.0)],
            SpherePoint::from_affine(c(0.0, 0.5)),
        )
        .unwrap();
        // diameter() upper-bounds by inflating with the sampling defect
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!(d.diameter() >= half_pi - 1e-9);
        assert!((d.diameter() - half_pi).abs() < 5e-4, "diameter {}", d.diameter());

        let u = ProjectiveMap::from_2x2([
            [c(0.6, 0.0), c(0.0, 0.8)],
            [c(0.0, 0.8), c(0.6, 0.0)],
        ]);
        let small = Disc::from_euclidean_circle(c(0.3, 0.2), 0.4);
        let img = small.image_under(&u).unwrap();
        assert!((small.diameter() - img.diameter()).abs() < 1e-3);
    }

    #[test]
    fn shrinking_family_under_hyperbolic_map() {
        // g^n(D) for hyperbolic g acting as z -> 2z, D around infinity:
        // diameters decrease monotonically toward the attracting fixed point.
        let g = ProjectiveMap::from_2x2_real([[2.0, 0.0], [0.0, 1.0]]);
        let mut d = Disc::from_euclidean_circle(c(0.0, 0.0), 2.0).complement();
        let mut last = d.diameter();
        for _ in 1..=10 {
            d = d.image_under(&g).unwrap();
            let now = d.diameter();
            assert!(now < last, "diameter must shrink: {now} vs {last}");
            last = now;
        }
    }

    #[test]
    fn disc_image_composes() {
        let m1 = ProjectiveMap::from_2x2([[c(1.0, 0.2), c(0.4, 0.0)], [c(0.0, 0.1), c(1.0, 0.0)]]);
        let m2 = ProjectiveMap::from_2x2([[c(2.0, 0.0), c(0.0, -1.0)], [c(0.3, 0.0), c(1.0, 0.5)]]);
        let d = Disc::from_euclidean_circle(c(0.1, -0.2), 0.7);
        let a = d.image_under(&m1).unwrap().image_under(&m2).unwrap();
        let b = d.image_under(&m2.compose(&m1)).unwrap();
        // same boundary circle: every sampled point of one lies within tol of the other's circle
        for p in a.sample_boundary(64) {
            let near = b.sample_boundary(1024).iter().map(|q| p.fs_distance(q)).fold(f64::INFINITY, f64::min);
            assert!(near < 1e-2, "boundary circles differ by {near}");
        }
        assert!(b.contains(a.witness()));
    }

    #[test]
    fn complement_flips_containment() {
        let d = Disc::from_euclidean_circle(c(0.0, 0.0), 1.0);
        let comp = d.complement();
        assert!(comp.contains(&SpherePoint::infinity()));
        assert!(!comp.contains(&SpherePoint::zero()));
        assert!(d.gap_to(&comp).is_none());
    }

    #[test]
    fn gap_and_nesting() {
        let a = Disc::from_euclidean_circle(c(0.0, 0.0), 1.0);
        let b = Disc::from_euclidean_circle(c(5.0, 0.0), 1.0);
        let gap = a.gap_to(&b).expect("disjoint");
        assert!(gap > 0.1);
        let inner = Disc::from_euclidean_circle(c(0.0, 0.0), 0.5);
        let margin = inner.nesting_margin_inside(&a).expect("nested");
        assert!(margin > 0.1);
        assert!(a.nesting_margin_inside(&inner).is_none());
    }

    #[test]
    fn degenerate_disc_rejected() {
        let err = Disc::new(
            [SpherePoint::zero(), SpherePoint::zero(), SpherePoint::one()],
            SpherePoint::from_affine(c(0.0, 1.0)),
        )
        .unwrap_err();
        assert_eq!(err, MoebiusError::DegenerateDisc);
        // witness on the boundary circle is rejected too
        let err = Disc::new(
            [SpherePoint::one(), SpherePoint::from_real(2.0), SpherePoint::from_real(3.0)],
            SpherePoint::from_real(5.0),
        )
        .unwrap_err();
        assert_eq!(err, MoebiusError::DegenerateDisc);
    }

    #[test]
    fn projective_equality_is_equivalence_on_samples() {
        let m = ProjectiveMap::from_2x2([[c(1.0, 2.0), c(0.0, 1.0)], [c(3.0, 0.0), c(1.0, 1.0)]]);
        let scaled = ProjectiveMap::from_2x2([
            [c(1.0, 2.0) * c(0.0, 2.5), c(0.0, 1.0) * c(0.0, 2.5)],
            [c(3.0, 0.0) * c(0.0, 2.5), c(1.0, 1.0) * c(0.0, 2.5)],
        ]);
        assert!(m.projectively_eq(&scaled, 1e-12));
        assert!(scaled.projectively_eq(&m, 1e-12));
        // apply respects the quotient
        let p = SpherePoint::from_affine(c(0.2, 0.4));
        assert!(m.apply(&p).approx_eq(&scaled.apply(&p), 1e-12));
    }
}
