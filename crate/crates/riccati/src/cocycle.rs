//! The linear and projective multiplicative cocycle over the surface
//! geodesic flow determined by a monodromy representation.
//!
//! Conventions, fixed here once for the whole crate:
//!
//! * The stored image of generator i is the fiber transport applied when the
//!   flow crosses the side labelled +i (the suspension's inverse-holonomy
//!   bookkeeping is absorbed into the stored matrices).
//! * `evaluate_word` multiplies with the first letter acting first, i.e.
//!   rightmost: A(w) = img(l_m) ··· img(l_1). Concatenating flow segments
//!   therefore multiplies values in cocycle order,
//!   A(v, t1 + t2) = A(φ(v, t1), t2) · A(v, t1), exactly.
//! * Values carry an explicit log-scale accumulator so that words with
//!   thousands of letters neither overflow nor underflow; the true matrix is
//!   e^{log_scale} · matrix with the stored matrix kept in the unit band.
//!
//! Lyapunov spectra are estimated by pushing an orthonormal frame through
//! the cocycle and re-orthonormalizing each block; sections of largest
//! expansion are estimated by pulling back along the flow and pushing a
//! fixed generic vector forward.

use num_complex::Complex64;
use std::fmt;

use crate::linalg;
use crate::moebius::{fubini_study_distance_vec, ProjectiveMap, SpherePoint};
use crate::rng::Rng;
use crate::surface::{FlowError, FlowOutcome, SurfaceGroup, UnitTangent, Word};
use crate::tolerances::{DOMINATED_DRIFT_TOL, INTEGRABILITY_MODULI_TOL};

pub type C64 = Complex64;

// ---------------------------------------------------------------------------
// Fiber points

/// Homogeneous coordinates on CP^(n-1), max-magnitude normalized.
#[derive(Debug, Clone)]
pub struct FiberPoint {
    v: Vec<C64>,
}

impl FiberPoint {
    pub fn new(v: Vec<C64>) -> Self {
        let scale = linalg::max_entry_norm(&v);
        assert!(scale > 0.0 && scale.is_finite(), "fiber point must be nonzero");
        FiberPoint {
            v: v.into_iter().map(|z| z / scale).collect(),
        }
    }

    pub fn from_sphere_point(p: &SpherePoint) -> Self {
        let [w0, w1] = p.homogeneous();
        FiberPoint::new(vec![w0, w1])
    }

    /// Generic fixed seed vector used by the section estimators.
    pub fn generic_seed(n: usize) -> Self {
        let mut rng = Rng::new(0x5eed);
        FiberPoint::new(
            (0..n)
                .map(|_| C64::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)))
                .collect(),
        )
    }

    pub fn coords(&self) -> &[C64] {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn to_sphere_point(&self) -> SpherePoint {
        assert_eq!(self.v.len(), 2);
        SpherePoint::from_homogeneous(self.v[0], self.v[1])
    }

    pub fn fs_distance(&self, other: &FiberPoint) -> f64 {
        fubini_study_distance_vec(&self.v, &other.v)
    }
}

impl fmt::Display for FiberPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, z) in self.v.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Representations

/// A representation of the surface group in GL(n, C) with a chosen linear
/// lift: one raw matrix per generator. The lift matters (rescaling it
/// shifts Lyapunov exponents by a documented drift), so it is stored as
/// given, with normalized matrices and log factors cached per signed letter.
#[derive(Debug, Clone)]
pub struct Representation {
    n: usize,
    lifts: Vec<Vec<C64>>,
    /// per letter: normalized matrix and the log of the factored-out scale;
    /// index 2k for letter +(k+1), 2k+1 for letter -(k+1)
    cache: Vec<(Vec<C64>, f64)>,
}

impl Representation {
    pub fn new(n: usize, lifts: Vec<Vec<C64>>) -> Self {
        assert!(n >= 2);
        let mut cache = Vec::with_capacity(lifts.len() * 2);
        for m in &lifts {
            assert_eq!(m.len(), n * n, "generator image must be n x n");
            let scale = linalg::max_entry_norm(m);
            assert!(scale > 0.0 && scale.is_finite());
            let norm: Vec<C64> = m.iter().map(|z| z / scale).collect();
            assert!(
                linalg::det(n, &norm).norm() > 1e-250,
                "generator image must be invertible"
            );
            let inv = linalg::inverse(n, &norm).expect("invertible");
            let inv_scale = linalg::max_entry_norm(&inv);
            let inv_norm: Vec<C64> = inv.iter().map(|z| z / inv_scale).collect();
            cache.push((norm, scale.ln()));
            cache.push((inv_norm, inv_scale.ln() - scale.ln()));
        }
        Representation { n, lifts, cache }
    }

    pub fn from_projective(images: &[ProjectiveMap]) -> Self {
        let n = images[0].dim();
        Representation::new(n, images.iter().map(|m| m.entries().to_vec()).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.lifts.len()
    }

    pub fn lift(&self, index: usize) -> &[C64] {
        &self.lifts[index]
    }

    pub fn image(&self, index: usize) -> ProjectiveMap {
        ProjectiveMap::new(self.n, self.lifts[index].clone())
    }

    fn letter_factor(&self, letter: i32) -> (&[C64], f64) {
        let idx = (letter.unsigned_abs() as usize) - 1;
        assert!(idx < self.lifts.len(), "letter {letter} out of range");
        let slot = if letter > 0 { 2 * idx } else { 2 * idx + 1 };
        let (m, f) = &self.cache[slot];
        (m, *f)
    }

    /// Rescale the whole lift by a common scalar (projective data unchanged).
    pub fn scaled_lift(&self, c: C64) -> Representation {
        Representation::new(
            self.n,
            self.lifts
                .iter()
                .map(|m| m.iter().map(|z| z * c).collect())
                .collect(),
        )
    }

    /// Conjugate every generator image by a fixed invertible matrix.
    pub fn conjugated(&self, g: &ProjectiveMap) -> Representation {
        let gi = g.inverse();
        Representation::new(
            self.n,
            self.lifts
                .iter()
                .map(|m| {
                    linalg::mat_mul(self.n, g.entries(), &linalg::mat_mul(self.n, m, gi.entries()))
                })
                .collect(),
        )
    }
}

/// The canonical representation of a surface group. The stored transport of
/// generator i is the *holonomy* of the covering suspension, gen(i)^{-1}:
/// crossing into the copy γ·P pulls the chart back by γ, so a leafwise
/// constant fiber point transforms by γ^{-1}. With this binding the cocycle
/// along the surface flow is exactly the foliated geodesic flow of the
/// canonical suspension, and the three-section trivialization obeys the
/// exact homothety law checked in the `canonical` module.
pub fn canonical_representation(group: &SurfaceGroup) -> Representation {
    Representation::new(
        2,
        group
            .generators
            .iter()
            .map(|g| {
                let inv = g.inverse();
                vec![
                    C64::new(inv.a, 0.0),
                    C64::new(inv.b, 0.0),
                    C64::new(inv.c, 0.0),
                    C64::new(inv.d, 0.0),
                ]
            })
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Cocycle values

/// An n x n cocycle value in scalar-extracted form: the true matrix is
/// e^{log_scale} · matrix, with the stored matrix kept in the band
/// [1/2, 2] by factoring scalars into the accumulator.
#[derive(Debug, Clone)]
pub struct CocycleValue {
    n: usize,
    matrix: Vec<C64>,
    log_scale: f64,
}

impl CocycleValue {
    pub fn identity(n: usize) -> Self {
        CocycleValue {
            n,
            matrix: linalg::identity(n),
            log_scale: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn renormalize(&mut self) {
        let s = linalg::max_entry_norm(&self.matrix);
        assert!(s > 0.0 && s.is_finite(), "cocycle value degenerated");
        if !(0.5..=2.0).contains(&s) {
            for z in &mut self.matrix {
                *z /= s;
            }
            self.log_scale += s.ln();
        }
    }

    /// Left-multiply by the transport of one crossing letter.
    pub fn apply_letter(&mut self, rep: &Representation, letter: i32) {
        let (m, f) = rep.letter_factor(letter);
        self.matrix = linalg::mat_mul(self.n, m, &self.matrix);
        self.log_scale += f;
        self.renormalize();
    }

    /// Compose: `later · self` (later acts after self).
    pub fn compose_after(&self, later: &CocycleValue) -> CocycleValue {
        let mut out = CocycleValue {
            n: self.n,
            matrix: linalg::mat_mul(self.n, &later.matrix, &self.matrix),
            log_scale: self.log_scale + later.log_scale,
        };
        out.renormalize();
        out
    }

    /// Projective action on the fiber (the scale accumulator is irrelevant).
    pub fn apply_to_fiber(&self, w: &FiberPoint) -> FiberPoint {
        FiberPoint::new(linalg::mat_vec(self.n, &self.matrix, w.coords()))
    }

    /// log of the operator norm of the true matrix.
    pub fn log_operator_norm(&self) -> f64 {
        self.log_scale + linalg::operator_norm(self.n, &self.matrix).ln()
    }

    /// Eigenvalue moduli of the true matrix, sorted descending.
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        linalg::eigenvalue_moduli(self.n, &self.matrix)
            .into_iter()
            .map(|m| m * self.log_scale.exp())
            .collect()
    }

    /// Relative difference of the true matrices, scale-aware.
    pub fn relative_difference(&self, other: &CocycleValue) -> f64 {
        let ds = other.log_scale - self.log_scale;
        let factor = ds.exp();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (a, b) in self.matrix.iter().zip(other.matrix.iter()) {
            num += (a - b * factor).norm_sqr();
            den += a.norm_sqr();
        }
        (num / den).sqrt()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let id = CocycleValue::identity(self.n);
        self.log_scale.abs() < tol.max(1e-9) * 10.0 && self.relative_difference(&id) < tol
    }
}

/// Ordered product of generator transports along a word: first letter acts
/// first (rightmost factor).
pub fn evaluate_word(rep: &Representation, word: &Word) -> CocycleValue {
    let mut acc = CocycleValue::identity(rep.dim());
    for &letter in word.letters() {
        acc.apply_letter(rep, letter);
    }
    acc
}

/// The cocycle value along the surface flow of `v` for time `t`, together
/// with the flow outcome.
pub struct CocycleOutcome {
    pub value: CocycleValue,
    pub flow: FlowOutcome,
}

pub fn cocycle_along(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    t: f64,
) -> Result<CocycleOutcome, FlowError> {
    let mut value = CocycleValue::identity(rep.dim());
    let flow = group.flow_with_events(v, t, |letter| value.apply_letter(rep, letter))?;
    Ok(CocycleOutcome { value, flow })
}

// ---------------------------------------------------------------------------
// Integrability

#[derive(Debug, Clone)]
pub struct CuspIntegrability {
    pub cusp_index: usize,
    pub word: Word,
    /// Eigenvalue moduli of the lift of the peripheral word, descending.
    pub moduli: Vec<f64>,
    pub unit_moduli: bool,
}

#[derive(Debug, Clone)]
pub struct IntegrabilityReport {
    pub cusps: Vec<CuspIntegrability>,
    pub integrable: bool,
}

/// Eigenvalue criterion: the cocycle is integrable iff every cusp monodromy
/// has all eigenvalue moduli equal to 1. An empty cusp list (compact case)
/// is always integrable.
pub fn check_integrability(rep: &Representation, group: &SurfaceGroup) -> IntegrabilityReport {
    let mut cusps = Vec::new();
    let mut integrable = true;
    for (i, cusp) in group.cusps.iter().enumerate() {
        let value = evaluate_word(rep, &cusp.word);
        let moduli = value.eigenvalue_moduli();
        let unit = moduli
            .iter()
            .all(|m| (m - 1.0).abs() <= INTEGRABILITY_MODULI_TOL);
        integrable &= unit;
        cusps.push(CuspIntegrability {
            cusp_index: i,
            word: cusp.word.clone(),
            moduli,
            unit_moduli: unit,
        });
    }
    IntegrabilityReport { cusps, integrable }
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum

#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    /// Exponents per unit hyperbolic time, sorted descending.
    pub exponents: Vec<f64>,
    /// Standard error of each exponent from the block means.
    pub standard_errors: Vec<f64>,
    pub total_time: f64,
    pub step: f64,
    /// `history[k][j]`: partial exponent j after block k.
    pub history: Vec<Vec<f64>>,
    /// Orbits restarted after cusp capture.
    pub restarts: usize,
    pub integrability: IntegrabilityReport,
    /// Heuristic: late block means of the top exponent grow well beyond the
    /// early ones, as expected when the true exponents are infinite.
    pub divergence_suspected: bool,
}

#[derive(Debug)]
pub enum LyapunovError {
    Flow(FlowError),
    DegenerateFrame,
    TooManyRestarts,
}

impl fmt::Display for LyapunovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LyapunovError::Flow(e) => write!(f, "flow failed: {e}"),
            LyapunovError::DegenerateFrame => write!(f, "frame degenerated during QR"),
            LyapunovError::TooManyRestarts => write!(f, "too many cusp-capture restarts"),
        }
    }
}

impl std::error::Error for LyapunovError {}

impl From<FlowError> for LyapunovError {
    fn from(e: FlowError) -> Self {
        LyapunovError::Flow(e)
    }
}

/// Orthonormal frame pushed through the cocycle letter by letter, with
/// adaptive re-orthonormalization: a cusp excursion can multiply thousands
/// of letters into one block, so waiting for the block boundary would let
/// the subdominant directions underflow.
struct FramePusher {
    n: usize,
    frame: Vec<C64>,
    shared_log: f64,
    qr_logs: Vec<f64>,
}

impl FramePusher {
    fn new(n: usize) -> Self {
        FramePusher {
            n,
            frame: linalg::identity(n),
            shared_log: 0.0,
            qr_logs: vec![0.0; n],
        }
    }

    fn apply_letter(&mut self, rep: &Representation, letter: i32) -> Result<(), LyapunovError> {
        let (m, f) = rep.letter_factor(letter);
        self.frame = linalg::mat_mul(self.n, m, &self.frame);
        self.shared_log += f;
        // Re-orthonormalize immediately: once a subdominant component drops
        // below the relative precision of the stored columns it is lost for
        // good, and a single cusp excursion can contract by e^{-700} within
        // one block. Per-letter QR keeps every direction observable.
        self.orthonormalize()
    }

    fn orthonormalize(&mut self) -> Result<(), LyapunovError> {
        let (q, rdiag) =
            linalg::qr_columns(self.n, &self.frame).ok_or(LyapunovError::DegenerateFrame)?;
        self.frame = q;
        for (log, r) in self.qr_logs.iter_mut().zip(rdiag.iter()) {
            *log += r.ln();
        }
        Ok(())
    }

    /// Finish a block: per-direction log growth, accumulators reset.
    fn take_block_growth(&mut self) -> Result<Vec<f64>, LyapunovError> {
        self.orthonormalize()?;
        let shared = self.shared_log;
        self.shared_log = 0.0;
        Ok(self
            .qr_logs
            .iter_mut()
            .map(|l| {
                let g = *l + shared;
                *l = 0.0;
                g
            })
            .collect())
    }
}

/// Estimate the Lyapunov spectrum by pushing an orthonormal n-frame through
/// the cocycle in blocks of length `step`, re-orthonormalizing (triangular
/// factorization) as conditioning demands and at least once per block, and
/// averaging the logs of the triangular diagonal. Orbits captured by a cusp
/// are restarted from a fresh Liouville sample and recorded.
pub fn lyapunov_spectrum(
    rep: &Representation,
    group: &SurfaceGroup,
    v0: &UnitTangent,
    total_time: f64,
    step: f64,
    rng: &mut Rng,
) -> Result<LyapunovEstimate, LyapunovError> {
    assert!(step > 0.0 && total_time >= step, "need total_time >= step > 0");
    let n = rep.dim();
    let blocks = (total_time / step).floor() as usize;
    let mut pusher = FramePusher::new(n);
    let mut v = *v0;
    let mut sums = vec![0.0f64; n];
    let mut block_means: Vec<Vec<f64>> = vec![Vec::with_capacity(blocks); n];
    let mut history = Vec::with_capacity(blocks);
    let mut restarts = 0usize;
    let mut completed = 0usize;
    while completed < blocks {
        let mut letter_err: Option<LyapunovError> = None;
        let flow = group.flow_with_events(&v, step, |letter| {
            if letter_err.is_none() {
                if let Err(e) = pusher.apply_letter(rep, letter) {
                    letter_err = Some(e);
                }
            }
        });
        if let Some(e) = letter_err {
            return Err(e);
        }
        match flow {
            Ok(out) => {
                v = out.v;
                let growth = pusher.take_block_growth()?;
                for j in 0..n {
                    sums[j] += growth[j];
                    block_means[j].push(growth[j] / step);
                }
                completed += 1;
                let elapsed = completed as f64 * step;
                history.push(sums.iter().map(|s| s / elapsed).collect::<Vec<f64>>());
            }
            Err(FlowError::CuspCapture { .. }) => {
                restarts += 1;
                if restarts > 1000 {
                    return Err(LyapunovError::TooManyRestarts);
                }
                // drop the partial block's growth and resample
                pusher.orthonormalize()?;
                pusher.shared_log = 0.0;
                pusher.qr_logs = vec![0.0; n];
                v = group.liouville_sample(rng)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let elapsed = blocks as f64 * step;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        (sums[j] / elapsed)
            .partial_cmp(&(sums[i] / elapsed))
            .unwrap()
    });
    let exponents: Vec<f64> = order.iter().map(|&j| sums[j] / elapsed).collect();
    let standard_errors: Vec<f64> = order
        .iter()
        .map(|&j| {
            let m = block_means[j].len() as f64;
            let mean = sums[j] / elapsed;
            let var = block_means[j]
                .iter()
                .map(|b| (b - mean) * (b - mean))
                .sum::<f64>()
                / (m - 1.0).max(1.0);
            (var / m).sqrt()
        })
        .collect();
    let history: Vec<Vec<f64>> = history
        .into_iter()
        .map(|row| order.iter().map(|&j| row[j]).collect())
        .collect();
    // divergence heuristic on the top direction's block means
    let top = order[0];
    let bm = &block_means[top];
    let quarter = bm.len() / 4;
    let divergence_suspected = if quarter >= 4 {
        let head: f64 = bm[..quarter].iter().sum::<f64>() / quarter as f64;
        let tail: f64 = bm[bm.len() - quarter..].iter().sum::<f64>() / quarter as f64;
        let sd = standard_errors[0] * (bm.len() as f64).sqrt();
        tail > head + 3.0 * sd && tail > 1.5 * head.abs()
    } else {
        false
    };
    Ok(LyapunovEstimate {
        exponents,
        standard_errors,
        total_time: elapsed,
        step,
        history,
        restarts,
        integrability: check_integrability(rep, group),
        divergence_suspected,
    })
}

// ---------------------------------------------------------------------------
// Section estimators

#[derive(Debug, Clone)]
pub struct SectionEstimate {
    pub point: FiberPoint,
    /// Fubini–Study movement between the half-horizon and full-horizon
    /// estimates; small drift indicates a dominated direction.
    pub drift: f64,
    pub dominated: bool,
}

/// Estimate the section of largest expansion at `v`: pull back to
/// φ(v, -T), push the fixed generic seed vector forward through the cocycle
/// and normalize.
pub fn top_section_estimate(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    horizon: f64,
) -> Result<SectionEstimate, FlowError> {
    top_section_estimate_seeded(rep, group, v, horizon, &FiberPoint::generic_seed(rep.dim()))
}

pub fn top_section_estimate_seeded(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    horizon: f64,
    seed: &FiberPoint,
) -> Result<SectionEstimate, FlowError> {
    let push = |t: f64| -> Result<FiberPoint, FlowError> {
        let back = group.flow(v, -t)?;
        let fwd = cocycle_along(rep, group, &back.v, t)?;
        Ok(fwd.value.apply_to_fiber(seed))
    };
    let full = push(horizon)?;
    let half = push(horizon / 2.0)?;
    let drift = full.fs_distance(&half);
    Ok(SectionEstimate {
        dominated: drift < DOMINATED_DRIFT_TOL,
        point: full,
        drift,
    })
}

/// Section of largest contraction: the largest-expansion section of the
/// time-reversed flow. bottom(v) = top(-v) by construction.
pub fn bottom_section_estimate(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    horizon: f64,
) -> Result<SectionEstimate, FlowError> {
    top_section_estimate(rep, group, &v.flipped(), horizon)
}
