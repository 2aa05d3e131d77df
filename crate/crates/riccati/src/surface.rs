//! Finite hyperbolic Riemann surfaces as Fuchsian quotients.
//!
//! A unit tangent vector of the upper half-plane H+ is an element of
//! PSL(2,R): the base point is g·i and the direction is the pushforward of
//! the upward vertical at i. The geodesic flow is right multiplication by
//! diag(e^{t/2}, e^{-t/2}).
//!
//! A [`SurfaceGroup`] carries a fundamental polygon with side pairings. The
//! surface flow integrates the half-plane flow and, whenever the trajectory
//! exits the polygon through a side, applies the inverse pairing generator
//! to return it and records the signed generator index. The recorded word is
//! the deck itinerary: `deck(word) · v_out` reproduces the half-plane flow of
//! the seed exactly, which the tests assert.

use num_complex::Complex64;
use std::fmt;

use crate::moebius::ProjectiveMap;
use crate::rng::Rng;
use crate::tolerances::{
    CROSSING_TIME_TOL, CUSP_HEIGHT_CUTOFF, FLOW_BASE_STEP, MAX_CROSSINGS, VERTEX_HIT_TOL,
};

pub type C64 = Complex64;

// ---------------------------------------------------------------------------
// PSL(2,R)

/// A real Möbius map with determinant normalized to 1 (PSL: g and -g are the
/// same element).
#[derive(Debug, Clone, Copy)]
pub struct Sl2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Sl2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        let det = a * d - b * c;
        assert!(
            det > 0.0 && det.is_finite(),
            "PSL(2,R) needs positive determinant, got {det}"
        );
        let s = det.sqrt();
        Sl2 {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    pub fn identity() -> Self {
        Sl2 {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn mul(&self, o: &Sl2) -> Sl2 {
        Sl2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply_complex(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn apply_ideal(&self, p: IdealPoint) -> IdealPoint {
        match p {
            IdealPoint::Infinity => {
                if self.c.abs() < 1e-14 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(self.a / self.c)
                }
            }
            IdealPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den.abs() < 1e-14 * (self.c.abs() * x.abs() + self.d.abs()).max(1.0) {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    pub fn to_projective(&self) -> ProjectiveMap {
        ProjectiveMap::from_2x2_real([[self.a, self.b], [self.c, self.d]])
    }

    /// Equality in PSL(2,R): entrywise up to overall sign.
    pub fn approx_eq(&self, o: &Sl2, tol: f64) -> bool {
        let same = (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs());
        let flip = (self.a + o.a)
            .abs()
            .max((self.b + o.b).abs())
            .max((self.c + o.c).abs())
            .max((self.d + o.d).abs());
        same.min(flip) <= tol
    }
}

/// A point of the ideal boundary R ∪ {inf} of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    pub fn approx_eq(&self, o: &IdealPoint, tol: f64) -> bool {
        match (self, o) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => true,
            (IdealPoint::Finite(x), IdealPoint::Finite(y)) => (x - y).abs() <= tol,
            _ => false,
        }
    }
}

impl fmt::Display for IdealPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealPoint::Finite(x) => write!(f, "{x}"),
            IdealPoint::Infinity => write!(f, "inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Unit tangent vectors and the half-plane flow

/// A unit tangent vector of H+, encoded as an element of PSL(2,R).
#[derive(Debug, Clone, Copy)]
pub struct UnitTangent {
    pub g: Sl2,
}

impl UnitTangent {
    pub fn identity() -> Self {
        UnitTangent { g: Sl2::identity() }
    }

    /// Vector at `z` whose direction makes angle `angle` with the upward
    /// vertical (positive = counterclockwise).
    pub fn from_base_and_angle(z: C64, angle: f64) -> Self {
        assert!(z.im > 0.0, "base point must be in the upper half-plane");
        let s = z.im.sqrt();
        let translate = Sl2::new(s, z.re / s, 0.0, 1.0 / s);
        let h = -angle / 2.0;
        let rotate = Sl2::new(h.cos(), -h.sin(), h.sin(), h.cos());
        UnitTangent {
            g: translate.mul(&rotate),
        }
    }

    pub fn base_point(&self) -> C64 {
        let g = &self.g;
        let den = g.c * g.c + g.d * g.d;
        C64::new((g.a * g.c + g.b * g.d) / den, 1.0 / den)
    }

    /// Angle between the direction and the upward vertical, in (-pi, pi].
    pub fn direction_angle(&self) -> f64 {
        let g = &self.g;
        // direction = i / (c i + d)^2, up to the positive scale y
        let re = 2.0 * g.c * g.d;
        let im = g.d * g.d - g.c * g.c;
        let arg = im.atan2(re) - std::f64::consts::FRAC_PI_2;
        if arg <= -std::f64::consts::PI {
            arg + 2.0 * std::f64::consts::PI
        } else {
            arg
        }
    }

    /// Geodesic flow for time t: right multiplication by
    /// diag(e^{t/2}, e^{-t/2}).
    pub fn flow(&self, t: f64) -> UnitTangent {
        let e = (t / 2.0).exp();
        let g = &self.g;
        UnitTangent {
            g: Sl2::new(g.a * e, g.b / e, g.c * e, g.d / e),
        }
    }

    /// The same base point with the direction reversed.
    pub fn flipped(&self) -> UnitTangent {
        let g = &self.g;
        UnitTangent {
            g: g.mul(&Sl2::new(0.0, -1.0, 1.0, 0.0)),
        }
    }

    /// Left action of a deck transformation.
    pub fn translated(&self, deck: &Sl2) -> UnitTangent {
        UnitTangent {
            g: deck.mul(&self.g),
        }
    }

    /// Forward ideal endpoint of the geodesic: the image of infinity.
    pub fn forward_endpoint(&self) -> IdealPoint {
        self.g.apply_ideal(IdealPoint::Infinity)
    }

    /// Backward ideal endpoint: the image of 0.
    pub fn backward_endpoint(&self) -> IdealPoint {
        self.g.apply_ideal(IdealPoint::Finite(0.0))
    }

    pub fn approx_eq(&self, o: &UnitTangent, tol: f64) -> bool {
        self.g.approx_eq(&o.g, tol)
    }
}

/// The geodesic flow on T^1 H+ (no quotient bookkeeping).
pub fn geodesic_flow_h(v: &UnitTangent, t: f64) -> UnitTangent {
    v.flow(t)
}

// ---------------------------------------------------------------------------
// Words

/// A freely reduced word over signed generator indices (1-based; -i is the
/// inverse of generator i).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<i32>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: &[i32]) -> Self {
        let mut w = Word::empty();
        for &l in letters {
            w.push_reduced(l);
        }
        w
    }

    /// Append a letter, cancelling against the tail.
    pub fn push_reduced(&mut self, letter: i32) {
        assert!(letter != 0, "letters are nonzero signed indices");
        if self.letters.last() == Some(&-letter) {
            self.letters.pop();
        } else {
            self.letters.push(letter);
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != -w[1])
    }

    /// Formal inverse: reverse and negate.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    pub fn concat_reduced(&self, tail: &Word) -> Word {
        let mut w = self.clone();
        for &l in tail.letters() {
            w.push_reduced(l);
        }
        w
    }

    /// Deck transformation of the word: the left-to-right product
    /// gen(l_1) · gen(l_2) · ... (first letter leftmost).
    pub fn deck(&self, generators: &[Sl2]) -> Sl2 {
        let mut acc = Sl2::identity();
        for &l in &self.letters {
            acc = acc.mul(&generator_for_letter(generators, l));
        }
        acc
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn generator_for_letter(generators: &[Sl2], letter: i32) -> Sl2 {
    let idx = (letter.unsigned_abs() as usize) - 1;
    assert!(idx < generators.len(), "letter {letter} out of range");
    if letter > 0 {
        generators[idx]
    } else {
        generators[idx].inverse()
    }
}

// ---------------------------------------------------------------------------
// Polygon sides

/// Geodesic side of the fundamental polygon, given by two ideal endpoints.
/// The interior test uses a sign-equivalent polynomial coordinate (vertical
/// line offset or circle power) rather than the Möbius chart, which is
/// cheaper and has the same zero set.
#[derive(Debug, Clone)]
pub struct Side {
    pub endpoints: (IdealPoint, IdealPoint),
    /// Signed generator index recorded when the trajectory exits through
    /// this side.
    pub pairing: i32,
    geom: SideGeom,
    inward: f64,
}

#[derive(Debug, Clone, Copy)]
enum SideGeom {
    Vertical { x: f64 },
    Circle { center: f64, radius: f64 },
}

impl Side {
    pub fn new(p: IdealPoint, q: IdealPoint, pairing: i32, interior_point: C64) -> Self {
        let geom = match (p, q) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => {
                panic!("side endpoints must be distinct")
            }
            (IdealPoint::Finite(x), IdealPoint::Infinity)
            | (IdealPoint::Infinity, IdealPoint::Finite(x)) => SideGeom::Vertical { x },
            (IdealPoint::Finite(a), IdealPoint::Finite(b)) => {
                assert!((a - b).abs() > 1e-12, "side endpoints must be distinct");
                SideGeom::Circle {
                    center: (a + b) / 2.0,
                    radius: (a - b).abs() / 2.0,
                }
            }
        };
        let mut side = Side {
            endpoints: (p, q),
            pairing,
            geom,
            inward: 1.0,
        };
        let h = side.raw_coordinate(interior_point);
        assert!(h.abs() > 1e-12, "interior point lies on a side");
        side.inward = h.signum();
        side
    }

    fn raw_coordinate(&self, z: C64) -> f64 {
        match self.geom {
            SideGeom::Vertical { x } => z.re - x,
            SideGeom::Circle { center, radius } => {
                let dx = z.re - center;
                dx * dx + z.im * z.im - radius * radius
            }
        }
    }

    /// Positive strictly inside the polygon, zero on the side.
    pub fn signed_coordinate(&self, z: C64) -> f64 {
        self.inward * self.raw_coordinate(z)
    }

    /// Constraint this side places on the vertical column at `x`.
    pub fn column_bounds(&self, x: f64) -> ColumnBound {
        match self.geom {
            SideGeom::Vertical { x: x0 } => {
                if self.inward * (x - x0) < 0.0 {
                    ColumnBound::Empty
                } else {
                    ColumnBound::Free
                }
            }
            SideGeom::Circle { center, radius } => {
                // the circle power (x-c)^2 + y^2 - r^2 is positive outside
                let q = radius * radius - (x - center) * (x - center);
                if self.inward < 0.0 {
                    // polygon inside the circle
                    if q <= 0.0 {
                        ColumnBound::Empty
                    } else {
                        ColumnBound::Upper(q.sqrt())
                    }
                } else if q > 0.0 {
                    ColumnBound::Lower(q.sqrt())
                } else {
                    ColumnBound::Free
                }
            }
        }
    }
}

/// Constraint of one side on a vertical column of the polygon.
#[derive(Debug, Clone, Copy)]
pub enum ColumnBound {
    Empty,
    Free,
    Lower(f64),
    Upper(f64),
}

// ---------------------------------------------------------------------------
// Cusps and surface groups

#[derive(Debug, Clone)]
pub struct Cusp {
    pub point: IdealPoint,
    /// Peripheral word: its deck transformation is parabolic and fixes the
    /// cusp point.
    pub word: Word,
    /// Sends the cusp point to infinity with the peripheral deck conjugated
    /// to z -> z ± 1 (the quotient strip has width 1).
    pub normalizer: Sl2,
}

/// An ideal vertex of the polygon together with the width of its strip
/// chart, so that heights are comparable across cusps.
#[derive(Debug, Clone)]
struct VertexChart {
    point: IdealPoint,
    width: f64,
}

impl VertexChart {
    /// Height of z in the width-normalized strip chart of this vertex.
    fn height(&self, z: C64) -> f64 {
        match self.point {
            IdealPoint::Infinity => z.im / self.width,
            IdealPoint::Finite(p) => {
                let d2 = (z.re - p) * (z.re - p) + z.im * z.im;
                z.im / (d2 * self.width)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Debug)]
pub enum SurfaceError {
    BadSidePairing(String),
    BasePointOutside,
    BadCusp(String),
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceError::BadSidePairing(s) => write!(f, "bad side pairing: {s}"),
            SurfaceError::BasePointOutside => write!(f, "base point is outside the polygon"),
            SurfaceError::BadCusp(s) => write!(f, "bad cusp data: {s}"),
        }
    }
}

impl std::error::Error for SurfaceError {}

/// A Fuchsian group presentation: free generators, a fundamental polygon
/// with involutive side pairings, and cusp data.
#[derive(Debug, Clone)]
pub struct SurfaceGroup {
    pub name: String,
    pub generators: Vec<Sl2>,
    pub sides: Vec<Side>,
    pub cusps: Vec<Cusp>,
    pub base_point: C64,
    pub sample_box: SampleBox,
    vertex_charts: Vec<VertexChart>,
}

impl SurfaceGroup {
    pub fn new(
        name: &str,
        generators: Vec<Sl2>,
        sides: Vec<Side>,
        cusps: Vec<(IdealPoint, Word)>,
        base_point: C64,
        sample_box: SampleBox,
    ) -> Result<SurfaceGroup, SurfaceError> {
        let vertex_charts = build_vertex_charts(&sides);
        let cusps = cusps
            .into_iter()
            .map(|(point, word)| {
                let deck = word.deck(&generators);
                let normalizer = cusp_normalizer(point, &deck)
                    .ok_or_else(|| SurfaceError::BadCusp(format!("word {word} at {point}")))?;
                Ok(Cusp {
                    point,
                    word,
                    normalizer,
                })
            })
            .collect::<Result<Vec<_>, SurfaceError>>()?;
        let group = SurfaceGroup {
            name: name.to_string(),
            generators,
            sides,
            cusps,
            base_point,
            sample_box,
            vertex_charts,
        };
        group.validate()?;
        Ok(group)
    }

    fn validate(&self) -> Result<(), SurfaceError> {
        if !self.contains(self.base_point) {
            return Err(SurfaceError::BasePointOutside);
        }
        // discreteness proxy: every generator is hyperbolic or parabolic
        for (i, g) in self.generators.iter().enumerate() {
            let class = g.to_projective().classify();
            if !matches!(
                class,
                crate::moebius::MapClass::Hyperbolic | crate::moebius::MapClass::Parabolic
            ) {
                return Err(SurfaceError::BadSidePairing(format!(
                    "generator {} is {:?}, expected hyperbolic or parabolic",
                    i + 1,
                    class
                )));
            }
        }
        // side pairings are involutive: gen(l) maps the side labelled -l
        // onto the side labelled l
        for side in &self.sides {
            let l = side.pairing;
            let partner = self
                .sides
                .iter()
                .find(|s| s.pairing == -l)
                .ok_or_else(|| SurfaceError::BadSidePairing(format!("no partner for {l}")))?;
            let g = generator_for_letter(&self.generators, l);
            let img = (
                g.apply_ideal(partner.endpoints.0),
                g.apply_ideal(partner.endpoints.1),
            );
            let matches = (img.0.approx_eq(&side.endpoints.0, 1e-9)
                && img.1.approx_eq(&side.endpoints.1, 1e-9))
                || (img.0.approx_eq(&side.endpoints.1, 1e-9)
                    && img.1.approx_eq(&side.endpoints.0, 1e-9));
            if !matches {
                return Err(SurfaceError::BadSidePairing(format!(
                    "generator {l} maps partner endpoints to ({}, {})",
                    img.0, img.1
                )));
            }
        }
        for cusp in &self.cusps {
            let deck = cusp.word.deck(&self.generators);
            let fixed = deck.apply_ideal(cusp.point);
            if !fixed.approx_eq(&cusp.point, 1e-9) {
                return Err(SurfaceError::BadCusp(format!(
                    "peripheral word {} does not fix {}",
                    cusp.word, cusp.point
                )));
            }
        }
        Ok(())
    }

    pub fn generator(&self, letter: i32) -> Sl2 {
        generator_for_letter(&self.generators, letter)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Closed-polygon membership with a small tolerance.
    pub fn contains(&self, z: C64) -> bool {
        z.im > 0.0 && self.sides.iter().all(|s| s.signed_coordinate(z) >= -1e-9)
    }

    /// Largest width-normalized cusp-strip height over all ideal vertices.
    pub fn max_vertex_height(&self, z: C64) -> f64 {
        self.vertex_charts
            .iter()
            .map(|c| c.height(z))
            .fold(0.0, f64::max)
    }

    /// Liouville sampling: base point with density dx dy / y^2 restricted to
    /// the polygon (rejection from the sample box, exact in y), direction
    /// angle uniform.
    pub fn liouville_sample(&self, rng: &mut Rng) -> Result<UnitTangent, FlowError> {
        let sb = &self.sample_box;
        let mut attempts = 0usize;
        loop {
            attempts += 1;
            let x = rng.range(sb.x0, sb.x1);
            // inverse CDF of 1/y^2 on [y0, y1]
            let u = rng.uniform();
            let y = 1.0 / (1.0 / sb.y0 - u * (1.0 / sb.y0 - 1.0 / sb.y1));
            let z = C64::new(x, y);
            if self.contains(z) {
                let angle = rng.range(-std::f64::consts::PI, std::f64::consts::PI);
                return Ok(UnitTangent::from_base_and_angle(z, angle));
            }
            if attempts >= 200_000 {
                return Err(FlowError::SamplerMismatch);
            }
        }
    }

    /// Flow `v` on the surface for time `t` (either sign), returning the
    /// in-polygon endpoint and the freely reduced deck word of the crossings.
    pub fn flow(&self, v: &UnitTangent, t: f64) -> Result<FlowOutcome, FlowError> {
        self.flow_with_events(v, t, |_| {})
    }

    /// As [`flow`](Self::flow), invoking `on_cross` with each recorded letter
    /// in crossing order.
    pub fn flow_with_events(
        &self,
        v: &UnitTangent,
        t: f64,
        on_cross: impl FnMut(i32),
    ) -> Result<FlowOutcome, FlowError> {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        self.flow_engine(v, Stop::Time(t.abs()), sign, on_cross)
    }

    /// The first `n_crossings` letters of the itinerary of `v` against the
    /// polygon sides.
    pub fn itinerary(&self, v: &UnitTangent, n_crossings: usize) -> Result<Word, FlowError> {
        let out = self.flow_engine(v, Stop::Letters(n_crossings), 1.0, |_| {})?;
        Ok(out.word)
    }

    /// Backward-time itinerary: letters recorded flowing into the past.
    pub fn itinerary_backward(
        &self,
        v: &UnitTangent,
        n_crossings: usize,
    ) -> Result<Word, FlowError> {
        let out = self.flow_engine(v, Stop::Letters(n_crossings), -1.0, |_| {})?;
        Ok(out.word)
    }

    fn flow_engine(
        &self,
        start: &UnitTangent,
        stop: Stop,
        sign: f64,
        mut on_cross: impl FnMut(i32),
    ) -> Result<FlowOutcome, FlowError> {
        if !self.contains(start.base_point()) {
            return Err(FlowError::OutsidePolygon);
        }
        let mut v = *start;
        let mut word = Word::empty();
        let mut crossings = 0usize;
        let mut elapsed = 0.0f64;
        loop {
            match stop {
                Stop::Time(total) => {
                    if total - elapsed <= 0.0 {
                        break;
                    }
                }
                Stop::Letters(n) => {
                    if word.len() >= n {
                        break;
                    }
                }
            }
            let z = v.base_point();
            let height = self.max_vertex_height(z);
            if height > CUSP_HEIGHT_CUTOFF {
                return Err(FlowError::CuspCapture {
                    partial: word,
                    time: sign * elapsed,
                });
            }
            let mut dt = FLOW_BASE_STEP.min(0.3 / height.max(1.0));
            if let Stop::Time(total) = stop {
                dt = dt.min(total - elapsed);
            }
            let candidate = v.flow(sign * dt);
            if self.contains(candidate.base_point()) {
                v = candidate;
                elapsed += dt;
                continue;
            }
            // Earliest side crossing in (0, dt]: bisect each violated side.
            let zc = candidate.base_point();
            let mut hit: Option<(usize, f64)> = None;
            let mut runner_up = f64::INFINITY;
            for (idx, side) in self.sides.iter().enumerate() {
                if side.signed_coordinate(zc) >= 0.0 {
                    continue;
                }
                let tau = bisect_crossing(
                    |tau| side.signed_coordinate(v.flow(sign * tau).base_point()),
                    dt,
                );
                match &mut hit {
                    None => hit = Some((idx, tau)),
                    Some((best_idx, best)) => {
                        if tau < *best {
                            runner_up = *best;
                            *best_idx = idx;
                            *best = tau;
                        } else {
                            runner_up = runner_up.min(tau);
                        }
                    }
                }
            }
            let (side_idx, tau) = match hit {
                Some(h) => h,
                None => {
                    return Err(FlowError::VertexHit {
                        time: sign * elapsed,
                    })
                }
            };
            if runner_up - tau < VERTEX_HIT_TOL {
                return Err(FlowError::VertexHit {
                    time: sign * (elapsed + tau),
                });
            }
            v = v.flow(sign * tau);
            elapsed += tau;
            let letter = self.sides[side_idx].pairing;
            word.push_reduced(letter);
            on_cross(letter);
            crossings += 1;
            if crossings > MAX_CROSSINGS {
                return Err(FlowError::CuspCapture {
                    partial: word,
                    time: sign * elapsed,
                });
            }
            let deck_inv = self.generator(letter).inverse();
            v = v.translated(&deck_inv);
        }
        Ok(FlowOutcome {
            v,
            word,
            crossings,
            time: sign * elapsed,
        })
    }
}

#[derive(Clone, Copy)]
enum Stop {
    Time(f64),
    Letters(usize),
}

/// First zero of `f` on (0, hi]: f(0) >= 0, f(hi) < 0. Bisection to
/// `CROSSING_TIME_TOL`.
fn bisect_crossing(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = hi;
    while hi - lo > CROSSING_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub v: UnitTangent,
    pub word: Word,
    pub crossings: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub enum FlowError {
    /// Trajectory passed within tolerance of a polygon vertex; perturb the
    /// seed.
    VertexHit { time: f64 },
    /// Trajectory climbed a cusp beyond the height cutoff or the crossing
    /// cap; carries the partial word.
    CuspCapture { partial: Word, time: f64 },
    OutsidePolygon,
    /// Rejection sampling acceptance collapsed: polygon and bounding box do
    /// not match.
    SamplerMismatch,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::VertexHit { time } => {
                write!(f, "vertex hit at t = {time}, perturb seed")
            }
            FlowError::CuspCapture { partial, time } => {
                write!(f, "cusp capture at t = {time} after word {partial}")
            }
            FlowError::OutsidePolygon => write!(f, "seed base point outside the polygon"),
            FlowError::SamplerMismatch => write!(f, "polygon/bounding-box mismatch"),
        }
    }
}

impl std::error::Error for FlowError {}

fn build_vertex_charts(sides: &[Side]) -> Vec<VertexChart> {
    // Each polygon vertex is an ideal endpoint shared by exactly two sides.
    // The chart width is the separation of the two neighbour endpoints in
    // the coordinate sending the vertex to infinity.
    let mut charts = Vec::new();
    let mut endpoints: Vec<(IdealPoint, IdealPoint)> = Vec::new(); // (vertex, other end)
    for s in sides {
        endpoints.push((s.endpoints.0, s.endpoints.1));
        endpoints.push((s.endpoints.1, s.endpoints.0));
    }
    let mut used = vec![false; endpoints.len()];
    for i in 0..endpoints.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (v, other_i) = endpoints[i];
        let mut partner: Option<IdealPoint> = None;
        for (j, entry) in endpoints.iter().enumerate().skip(i + 1) {
            if !used[j] && entry.0.approx_eq(&v, 1e-9) {
                partner = Some(entry.1);
                used[j] = true;
                break;
            }
        }
        let other_j = match partner {
            Some(p) => p,
            None => continue, // endpoint not shared: no vertex chart
        };
        // Coordinates of the neighbour endpoints in the chart at v
        // (z -> -1/(z - v) for finite v, identity for v = infinity).
        let coord = |p: IdealPoint| -> Option<f64> {
            match (v, p) {
                (IdealPoint::Infinity, IdealPoint::Finite(x)) => Some(x),
                (IdealPoint::Finite(_), IdealPoint::Infinity) => Some(0.0),
                (IdealPoint::Finite(q), IdealPoint::Finite(x)) => Some(-1.0 / (x - q)),
                (IdealPoint::Infinity, IdealPoint::Infinity) => None,
            }
        };
        if let (Some(r1), Some(r2)) = (coord(other_i), coord(other_j)) {
            let width = (r1 - r2).abs();
            if width > 1e-12 {
                charts.push(VertexChart { point: v, width });
            }
        }
    }
    charts
}

/// Find N in PSL(2,R) with N(point) = infinity and N · deck · N^{-1} equal to
/// z -> z ± 1.
fn cusp_normalizer(point: IdealPoint, deck: &Sl2) -> Option<Sl2> {
    let n0 = match point {
        IdealPoint::Infinity => Sl2::identity(),
        IdealPoint::Finite(p) => Sl2::new(0.0, -1.0, 1.0, -p),
    };
    let conj = n0.mul(deck).mul(&n0.inverse());
    // must be upper-triangular unipotent up to sign
    let (a, b, c, d) = (conj.a, conj.b, conj.c, conj.d);
    if c.abs() > 1e-9 {
        return None;
    }
    let s = if a < 0.0 { -1.0 } else { 1.0 };
    let (a, b, d) = (a * s, b * s, d * s);
    if (a - 1.0).abs() > 1e-9 || (d - 1.0).abs() > 1e-9 || b.abs() < 1e-12 {
        return None;
    }
    // rescale so the translation length is 1
    let lam = 1.0 / b.abs().sqrt();
    let scale = Sl2::new(lam, 0.0, 0.0, 1.0 / lam);
    Some(scale.mul(&n0))
}

// ---------------------------------------------------------------------------
// Cusp excursion geometry

#[derive(Debug, Clone, Copy)]
pub struct CuspExcursion {
    /// Exact hyperbolic time spent above the horocycle Im = 1.
    pub time: f64,
    /// Signed horizontal winding 2 cos(eta) / sin(eta).
    pub winding: f64,
    /// Entry angle against the upward vertical.
    pub entry_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExcursionError {
    /// Radial entry: the geodesic runs straight into the puncture.
    InfiniteExcursion,
    /// The vector does not point into the cusp region.
    NotEntering,
    /// The base point is not on the horocycle Im = 1.
    OffHorocycle,
}

impl fmt::Display for ExcursionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExcursionError::InfiniteExcursion => write!(f, "infinite excursion (radial entry)"),
            ExcursionError::NotEntering => write!(f, "vector does not enter the cusp region"),
            ExcursionError::OffHorocycle => write!(f, "base point not on the horocycle Im = 1"),
        }
    }
}

impl std::error::Error for ExcursionError {}

/// Excursion data of a vector on the horocycle Im = 1 in a cusp-normalized
/// chart (peripheral deck transformation z -> z + 1), entering the region
/// Im > 1. The excursion time is the exact geodesic length between the two
/// height-1 crossings: cosh(t) = 1 + winding^2 / 2.
pub fn cusp_excursion_parameters(v: &UnitTangent) -> Result<CuspExcursion, ExcursionError> {
    let z = v.base_point();
    if (z.im - 1.0).abs() > 1e-9 {
        return Err(ExcursionError::OffHorocycle);
    }
    let eta = v.direction_angle();
    if eta.abs() >= std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(ExcursionError::NotEntering);
    }
    if eta.abs() < 1e-9 {
        return Err(ExcursionError::InfiniteExcursion);
    }
    let winding = 2.0 * eta.cos() / eta.sin();
    let time = (1.0 + winding * winding / 2.0).acosh();
    Ok(CuspExcursion {
        time,
        winding,
        entry_angle: eta,
    })
}
