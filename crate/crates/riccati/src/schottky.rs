//! Ping-pong certification and nested-disc sections for Schottky
//! monodromies.
//!
//! A ping-pong system is a family of Möbius maps f_1, ..., f_k with
//! pairwise disjoint closed discs A_i, B_i such that f_i maps the
//! complement of A_i strictly inside B_i. The certificate checks both
//! conditions numerically with explicit margins; everything downstream is
//! conditional on it.
//!
//! Over a bi-infinite reduced word the system carries exactly two invariant
//! section values, computed as nested disc intersections: the forward value
//! from the past letters, K_n = g(b_-1) ∘ ... ∘ g(b_-n) applied to the
//! complement of the source disc of b_-n, and the backward value from the
//! inverted future letters. Nesting makes the final disc diameter an error
//! bound for the returned point. The shift acts by the letter b_0, which the
//! tests check directly, and for a geodesic the bi-word is its itinerary, so
//! the section value can be compared against the generic cocycle estimator.

use std::fmt;

use crate::moebius::{Disc, MoebiusError, ProjectiveMap, SpherePoint};
use crate::rng::Rng;
use crate::surface::{FlowError, SurfaceGroup, UnitTangent, Word};
use crate::tolerances::{SCHOTTKY_DIAMETER_TARGET, SCHOTTKY_MAX_WINDOW};

/// Sample count for nested-disc diameter bounds (coarser than the disc
/// default; the bound is inflated by the sampling defect).
const NESTED_DIAMETER_SAMPLES: usize = 48;

/// A ping-pong system: maps with their source/target disc pairs (A_i, B_i).
#[derive(Debug, Clone)]
pub struct PingPongSystem {
    maps: Vec<ProjectiveMap>,
    pairs: Vec<(Disc, Disc)>,
}

impl PingPongSystem {
    pub fn new(maps: Vec<ProjectiveMap>, pairs: Vec<(Disc, Disc)>) -> Self {
        assert!(maps.len() >= 2, "ping-pong needs at least two generators");
        assert_eq!(maps.len(), pairs.len());
        assert!(maps.iter().all(|m| m.dim() == 2));
        PingPongSystem { maps, pairs }
    }

    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn map_for_letter(&self, letter: i32) -> ProjectiveMap {
        let idx = (letter.unsigned_abs() as usize) - 1;
        assert!(idx < self.maps.len(), "letter {letter} out of range");
        if letter > 0 {
            self.maps[idx].clone()
        } else {
            self.maps[idx].inverse()
        }
    }

    pub fn maps(&self) -> &[ProjectiveMap] {
        &self.maps
    }

    pub fn pairs(&self) -> &[(Disc, Disc)] {
        &self.pairs
    }

    /// Target disc C(g): where g sends everything outside its source disc.
    pub fn target_disc(&self, letter: i32) -> &Disc {
        let idx = (letter.unsigned_abs() as usize) - 1;
        if letter > 0 {
            &self.pairs[idx].1
        } else {
            &self.pairs[idx].0
        }
    }

    /// Source disc C'(g): the exceptional disc of g.
    pub fn source_disc(&self, letter: i32) -> &Disc {
        let idx = (letter.unsigned_abs() as usize) - 1;
        if letter > 0 {
            &self.pairs[idx].0
        } else {
            &self.pairs[idx].1
        }
    }
}

// ---------------------------------------------------------------------------
// Certification

#[derive(Debug, Clone)]
pub struct GeneratorCheck {
    pub generator: usize,
    /// Margin by which f(complement of A) nests inside B.
    pub forward_margin: Option<f64>,
    /// Margin by which f^{-1}(complement of B) nests inside A.
    pub backward_margin: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub ok: bool,
    /// Minimal pairwise Fubini–Study gap of the 2k discs.
    pub min_gap: Option<f64>,
    /// Minimal nesting margin over generators and directions.
    pub min_margin: Option<f64>,
    pub generators: Vec<GeneratorCheck>,
    /// Worst per-letter diameter ratio over composable letter pairs: an
    /// upper estimate for the geometric decay rate of nested discs.
    pub contraction_estimate: f64,
    pub failures: Vec<String>,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            writeln!(
                f,
                "certified: min disc gap {:.6}, min nesting margin {:.6}, contraction <= {:.4}",
                self.min_gap.unwrap_or(f64::NAN),
                self.min_margin.unwrap_or(f64::NAN),
                self.contraction_estimate
            )?;
        } else {
            writeln!(f, "NOT certified:")?;
            for fail in &self.failures {
                writeln!(f, "  - {fail}")?;
            }
        }
        Ok(())
    }
}

/// Verify the ping-pong conditions with explicit margins.
pub fn certify_ping_pong(sys: &PingPongSystem) -> Certificate {
    let mut failures = Vec::new();
    // pairwise disjointness of the 2k discs
    let mut all_discs: Vec<(String, &Disc)> = Vec::new();
    for (i, (a, b)) in sys.pairs.iter().enumerate() {
        all_discs.push((format!("A{}", i + 1), a));
        all_discs.push((format!("B{}", i + 1), b));
    }
    let mut min_gap: Option<f64> = None;
    for i in 0..all_discs.len() {
        for j in i + 1..all_discs.len() {
            match all_discs[i].1.gap_to(all_discs[j].1) {
                Some(g) => {
                    min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
                }
                None => failures.push(format!(
                    "discs {} and {} are not disjoint",
                    all_discs[i].0, all_discs[j].0
                )),
            }
        }
    }
    // nesting in both directions
    let mut min_margin: Option<f64> = None;
    let mut generators = Vec::new();
    for (i, (a, b)) in sys.pairs.iter().enumerate() {
        let f = &sys.maps[i];
        let forward = a
            .complement()
            .image_under(f)
            .ok()
            .and_then(|img| img.nesting_margin_inside(b));
        let backward = b
            .complement()
            .image_under(&f.inverse())
            .ok()
            .and_then(|img| img.nesting_margin_inside(a));
        if forward.is_none() {
            failures.push(format!("f{}(complement of A{}) does not nest in B{0}", i + 1, i + 1));
        }
        if backward.is_none() {
            failures.push(format!(
                "f{}^-1(complement of B{}) does not nest in A{0}",
                i + 1,
                i + 1
            ));
        }
        for m in [forward, backward].into_iter().flatten() {
            min_margin = Some(min_margin.map_or(m, |x: f64| x.min(m)));
        }
        generators.push(GeneratorCheck {
            generator: i + 1,
            forward_margin: forward,
            backward_margin: backward,
        });
    }
    // contraction estimate: worst diameter ratio of h(C(g)) over C(g) for
    // composable pairs h != g^{-1}
    let mut contraction: f64 = 0.0;
    let letters: Vec<i32> = (1..=sys.rank() as i32).flat_map(|i| [i, -i]).collect();
    for &g in &letters {
        let c = sys.target_disc(g);
        let dc = c.diameter_with_samples(64);
        for &h in &letters {
            if h == -g {
                continue;
            }
            if let Ok(img) = c.image_under(&sys.map_for_letter(h)) {
                contraction = contraction.max(img.diameter_with_samples(64) / dc);
            }
        }
    }
    Certificate {
        ok: failures.is_empty(),
        min_gap,
        min_margin,
        generators,
        contraction_estimate: contraction,
        failures,
    }
}

// ---------------------------------------------------------------------------
// Reduced bi-infinite words

/// A window of a bi-infinite reduced word: past letters (b_-1, b_-2, ...)
/// reading outward and future letters (b_0, b_1, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedBiWord {
    past: Vec<i32>,
    future: Vec<i32>,
}

impl ReducedBiWord {
    pub fn new(past: Vec<i32>, future: Vec<i32>) -> Result<Self, String> {
        let w = ReducedBiWord { past, future };
        if !w.is_reduced() {
            return Err("bi-word is not reduced".into());
        }
        Ok(w)
    }

    pub fn is_reduced(&self) -> bool {
        // ..., b_-2, b_-1, b_0, b_1, ...: adjacent letters never cancel
        let past_ok = self.past.windows(2).all(|w| w[1] != -w[0]);
        let future_ok = self.future.windows(2).all(|w| w[0] != -w[1]);
        let seam_ok = match (self.past.first(), self.future.first()) {
            (Some(&bm1), Some(&b0)) => b0 != -bm1,
            _ => true,
        };
        past_ok && future_ok && seam_ok
    }

    pub fn past(&self) -> &[i32] {
        &self.past
    }

    pub fn future(&self) -> &[i32] {
        &self.future
    }

    /// Constant bi-word g^infinity.
    pub fn constant(letter: i32, depth: usize) -> Self {
        ReducedBiWord {
            past: vec![letter; depth],
            future: vec![letter; depth],
        }
    }

    /// Shift left: b_0 moves into the past; returns the moved letter.
    pub fn shift(&self) -> Option<(ReducedBiWord, i32)> {
        let (&b0, rest) = self.future.split_first()?;
        let mut past = Vec::with_capacity(self.past.len() + 1);
        past.push(b0);
        past.extend_from_slice(&self.past);
        Some((
            ReducedBiWord {
                past,
                future: rest.to_vec(),
            },
            b0,
        ))
    }

    /// Uniform random reduced bi-word over k generators.
    pub fn random(rng: &mut Rng, rank: usize, past_len: usize, future_len: usize) -> Self {
        let letters: Vec<i32> = (1..=rank as i32).flat_map(|i| [i, -i]).collect();
        let draw_next = |prev: Option<i32>, rng: &mut Rng| loop {
            let l = letters[rng.index(letters.len())];
            if prev != Some(-l) {
                return l;
            }
        };
        // build ..., b_-1, b_0, b_1, ... left to right
        let mut seq = Vec::with_capacity(past_len + future_len);
        let mut prev = None;
        for _ in 0..past_len + future_len {
            let l = draw_next(prev, rng);
            seq.push(l);
            prev = Some(l);
        }
        let past = seq[..past_len].iter().rev().copied().collect();
        let future = seq[past_len..].to_vec();
        ReducedBiWord { past, future }
    }
}

// ---------------------------------------------------------------------------
// Section values from nested discs

#[derive(Debug, Clone)]
pub struct SectionValue {
    pub point: SpherePoint,
    /// Diameter of the deepest nested disc: an error bound for the point.
    pub diameter_bound: f64,
    /// Nesting depth actually used.
    pub depth: usize,
    /// Whether the bound reached `SCHOTTKY_DIAMETER_TARGET`.
    pub converged: bool,
}

fn nested_limit(
    letters: &[i32],
    map_of: impl Fn(i32) -> ProjectiveMap,
    source_of: impl Fn(i32) -> Disc,
) -> SectionValue {
    assert!(!letters.is_empty(), "need at least one letter");
    let max_depth = letters.len().min(SCHOTTKY_MAX_WINDOW);
    // prefix(d) = map(l_1) ∘ ... ∘ map(l_d); disc_d = prefix(d-1) applied to
    // map(l_d)(complement of source(l_d))
    let mut prefix = ProjectiveMap::identity(2);
    let mut best_point = None;
    let mut best_bound = f64::INFINITY;
    let mut depth_used = 0;
    for (d, &letter) in letters.iter().take(max_depth).enumerate() {
        let m = map_of(letter);
        let seed = source_of(letter).complement();
        let candidate = seed.image_under(&m).and_then(|img| img.image_under(&prefix));
        match candidate {
            Ok(disc) => {
                let bound = disc.diameter_with_samples(NESTED_DIAMETER_SAMPLES);
                if bound < best_bound {
                    best_bound = bound;
                    best_point = Some(disc.witness().to_owned());
                }
                depth_used = d + 1;
                if best_bound < SCHOTTKY_DIAMETER_TARGET {
                    break;
                }
            }
            Err(MoebiusError::DegenerateDisc) => {
                // the true disc has collapsed below representable size: the
                // previous bound already certifies the point
                break;
            }
            Err(_) => break,
        }
        prefix = prefix.compose(&m);
    }
    let point = best_point.expect("at least the first nested disc exists");
    SectionValue {
        point,
        diameter_bound: best_bound,
        depth: depth_used,
        converged: best_bound < SCHOTTKY_DIAMETER_TARGET,
    }
}

/// Forward invariant section value of a reduced bi-word: the nested limit
/// of g(b_-1) ∘ ... ∘ g(b_-n) applied to the complement of the source disc
/// of b_-n.
pub fn s_plus(sys: &PingPongSystem, word: &ReducedBiWord) -> SectionValue {
    nested_limit(
        word.past(),
        |l| sys.map_for_letter(l),
        |l| sys.source_disc(l).clone(),
    )
}

/// Backward invariant section value: the mirror limit over inverted future
/// letters, g(b_0)^{-1} ∘ ... ∘ g(b_{n-1})^{-1} applied to the complement
/// of the target disc of b_{n-1}.
pub fn s_minus(sys: &PingPongSystem, word: &ReducedBiWord) -> SectionValue {
    nested_limit(
        word.future(),
        |l| sys.map_for_letter(-l),
        |l| sys.target_disc(l).clone(),
    )
}

// ---------------------------------------------------------------------------
// Sections over geodesics

#[derive(Debug, Clone)]
pub struct GeodesicSections {
    pub plus: SectionValue,
    pub minus: SectionValue,
    pub word: ReducedBiWord,
}

#[derive(Debug)]
pub enum SectionError {
    Flow(FlowError),
    NotReduced(String),
    RankMismatch,
}

impl fmt::Display for SectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionError::Flow(e) => write!(f, "flow failed: {e}"),
            SectionError::NotReduced(s) => write!(f, "itinerary not reduced: {s}"),
            SectionError::RankMismatch => {
                write!(f, "representation rank does not match the surface group")
            }
        }
    }
}

impl std::error::Error for SectionError {}

impl From<FlowError> for SectionError {
    fn from(e: FlowError) -> Self {
        SectionError::Flow(e)
    }
}

/// The Schottky-monodromy section over a geodesic: map the itinerary of `v`
/// through the generator correspondence (surface generator i to ping-pong
/// map i, no cancellations) and take the nested-disc limits of the
/// resulting bi-word. The within-polygon holonomy is the identity in the
/// global polygon trivialization, so no pullback is needed.
pub fn schottky_section_for_geodesic(
    sys: &PingPongSystem,
    group: &SurfaceGroup,
    v: &UnitTangent,
    n_crossings: usize,
) -> Result<GeodesicSections, SectionError> {
    if sys.rank() != group.rank() {
        return Err(SectionError::RankMismatch);
    }
    let future_word: Word = group.itinerary(v, n_crossings)?;
    let backward_word: Word = group.itinerary_backward(v, n_crossings)?;
    // the backward flow records the inverses of the past letters, most
    // recent first
    let past: Vec<i32> = backward_word.letters().iter().map(|&l| -l).collect();
    let word = ReducedBiWord::new(past, future_word.letters().to_vec())
        .map_err(SectionError::NotReduced)?;
    Ok(GeodesicSections {
        plus: s_plus(sys, &word),
        minus: s_minus(sys, &word),
        word,
    })
}
