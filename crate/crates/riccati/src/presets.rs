//! Shipped surfaces, representations and Schottky systems, plus the
//! plain-text preset file formats used by the command line.
//!
//! Two finite hyperbolic surfaces are built in:
//!
//! * `thrice-punctured-sphere`: the free group generated by the parabolic
//!   pair z -> z + 2 and z -> z / (2z + 1), with the ideal quadrilateral
//!   (-1, 0, 1, infinity) as fundamental polygon. All three punctures have
//!   parabolic peripheral words.
//! * `once-punctured-torus`: two hyperbolic generators with parabolic
//!   commutator, conjugated so the polygon is the ideal quadrilateral
//!   (0, 1/3, 1/2, 1) bounded away from infinity (every cusp sits on the
//!   real axis, so height observables have finite moments).

use num_complex::Complex64;

use crate::cocycle::{canonical_representation, Representation};
use crate::moebius::{Disc, ProjectiveMap};
use crate::schottky::PingPongSystem;
use crate::surface::{ColumnBound, IdealPoint, SampleBox, Side, Sl2, SurfaceGroup, UnitTangent, Word};

pub type C64 = Complex64;

/// The thrice-punctured sphere with generators z -> z + 2 and
/// z -> z / (2z + 1).
pub fn thrice_punctured_sphere() -> SurfaceGroup {
    let a = Sl2::new(1.0, 2.0, 0.0, 1.0);
    let b = Sl2::new(1.0, 0.0, 2.0, 1.0);
    let base = C64::new(0.0, 1.0);
    let inf = IdealPoint::Infinity;
    let fp = IdealPoint::Finite;
    let sides = vec![
        // exiting right through Re = 1 enters a·P
        Side::new(fp(1.0), inf, 1, base),
        Side::new(fp(-1.0), inf, -1, base),
        // exiting into the circle (0, 1) enters b·P
        Side::new(fp(0.0), fp(1.0), 2, base),
        Side::new(fp(-1.0), fp(0.0), -2, base),
    ];
    let cusps = vec![
        (inf, Word::from_letters(&[1])),
        (fp(0.0), Word::from_letters(&[2])),
        (fp(1.0), Word::from_letters(&[1, -2])),
    ];
    let sample_box = SampleBox {
        x0: -1.0,
        x1: 1.0,
        y0: 1e-3,
        y1: 1e3,
    };
    SurfaceGroup::new("thrice-punctured-sphere", vec![a, b], sides, cusps, base, sample_box)
        .expect("shipped preset is valid")
}

/// A once-punctured torus: hyperbolic generators with parabolic commutator,
/// in a chart where the fundamental polygon is the ideal quadrilateral
/// (0, 1/3, 1/2, 1).
pub fn once_punctured_torus() -> SurfaceGroup {
    let a = Sl2::new(4.0, -1.0, 5.0, -1.0);
    let b = Sl2::new(0.0, 1.0, -1.0, 3.0);
    let base = C64::new(0.4, 0.2);
    let fp = IdealPoint::Finite;
    let sides = vec![
        // exiting into the circle (1/2, 1) enters a·P
        Side::new(fp(0.5), fp(1.0), 1, base),
        Side::new(fp(0.0), fp(1.0 / 3.0), -1, base),
        // exiting into the circle (1/3, 1/2) enters b·P
        Side::new(fp(1.0 / 3.0), fp(0.5), 2, base),
        // exiting the outer circle (0, 1) enters b^{-1}·P
        Side::new(fp(0.0), fp(1.0), -2, base),
    ];
    let cusps = vec![(fp(0.5), Word::from_letters(&[1, 2, -1, -2]))];
    let sample_box = SampleBox {
        x0: 0.0,
        x1: 1.0,
        y0: 1e-3,
        y1: 0.5,
    };
    SurfaceGroup::new("once-punctured-torus", vec![a, b], sides, cusps, base, sample_box)
        .expect("shipped preset is valid")
}

pub fn surface_by_name(name: &str) -> Option<SurfaceGroup> {
    match name {
        "thrice-punctured-sphere" | "sphere" => Some(thrice_punctured_sphere()),
        "once-punctured-torus" | "torus" => Some(once_punctured_torus()),
        _ => None,
    }
}

/// A unit tangent vector on the axis of generator 1 of the punctured-torus
/// preset, aimed at the attracting fixed point. Its itinerary is the
/// constant word (1, 1, 1, ...).
pub fn torus_axis_vector() -> UnitTangent {
    // fixed points of [[4,-1],[5,-1]]: roots of 5 z^2 - 5 z + 1
    let s = 5.0f64.sqrt();
    let attracting = (5.0 + s) / 10.0;
    let repelling = (5.0 - s) / 10.0;
    UnitTangent {
        g: Sl2::new(attracting, repelling, 1.0, 1.0),
    }
}

/// The shipped rank-2 Schottky pair: g1 = diag(3, 1/3) acting as z -> 9z
/// with round discs around 0 and infinity, and g2 its conjugate by the
/// sphere rotation swapping {0, infinity} to {-1, 1}. The rotation is a
/// Fubini–Study isometry, so the g2 disc pair inherits the g1 nesting
/// margins exactly.
pub fn schottky_pair() -> PingPongSystem {
    let g1 = ProjectiveMap::from_2x2_real([[3.0, 0.0], [0.0, 1.0 / 3.0]]);
    // q: 0 -> -1, infinity -> 1 (unitary up to scale)
    let q = ProjectiveMap::from_2x2_real([[1.0, -1.0], [1.0, 1.0]]);
    let g2 = q.compose(&g1).compose(&q.inverse());
    let a1 = Disc::from_euclidean_circle(C64::new(0.0, 0.0), 0.34);
    let b1 = Disc::from_euclidean_circle(C64::new(0.0, 0.0), 2.7).complement();
    let a2 = a1.image_under(&q).expect("rotation image");
    let b2 = b1.image_under(&q).expect("rotation image");
    PingPongSystem::new(vec![g1, g2], vec![(a1, b1), (a2, b2)])
}

/// The representation binding each surface generator to the corresponding
/// Schottky generator.
pub fn schottky_representation() -> Representation {
    Representation::from_projective(schottky_pair().maps())
}

/// Commuting diagonal unitaries: an isometric fiber action with all
/// Lyapunov exponents zero and no attracting section.
pub fn unitary_representation() -> Representation {
    let u = |theta: f64| {
        vec![
            C64::from_polar(1.0, theta),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(1.0, -theta),
        ]
    };
    Representation::new(2, vec![u(0.7), u(0.3)])
}

pub fn trivial_representation() -> Representation {
    let id = ProjectiveMap::identity(2);
    Representation::from_projective(&[id.clone(), id])
}

/// Representation presets by name; `canonical` depends on the surface.
pub fn representation_by_name(name: &str, group: &SurfaceGroup) -> Option<Representation> {
    match name {
        "canonical" => Some(canonical_representation(group)),
        "schottky" => {
            if group.rank() == 2 {
                Some(schottky_representation())
            } else {
                None
            }
        }
        "unitary" => Some(unitary_representation()),
        "trivial" => Some(trivial_representation()),
        _ => None,
    }
}

/// Area and mean height of the polygon by column quadrature:
/// area = ∫ (1/ylo - 1/yhi) dx and mean height · area = ∫ log(yhi/ylo) dx over
/// columns of the polygon. Integrands have square-root or log singularities
/// at vertex abscissae, so each vertex interval is traversed through a
/// cubic substitution that clusters nodes at both ends.
pub fn polygon_column_quadrature(g: &SurfaceGroup) -> (f64, f64) {
    let column = |x: f64| -> Option<(f64, f64)> {
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        for side in &g.sides {
            match side.column_bounds(x) {
                ColumnBound::Empty => return None,
                ColumnBound::Free => {}
                ColumnBound::Lower(v) => lo = lo.max(v),
                ColumnBound::Upper(v) => hi = hi.min(v),
            }
        }
        if lo >= hi || lo <= 0.0 {
            return None;
        }
        Some((lo, hi))
    };
    // vertex abscissae split the x-range into smooth pieces
    let mut cuts: Vec<f64> = Vec::new();
    for side in &g.sides {
        for p in [side.endpoints.0, side.endpoints.1] {
            if let IdealPoint::Finite(x) = p {
                if !cuts.iter().any(|c| (c - x).abs() < 1e-12) {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut area = 0.0;
    let mut log_int = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len < 1e-12 {
            continue;
        }
        let mut prev = (0.0, 0.0);
        let mut k = 10usize; // 2^10 nodes to start
        loop {
            let n = 1usize << k;
            let mut acc_area = 0.0;
            let mut acc_log = 0.0;
            for i in 0..n {
                let s = (i as f64 + 0.5) / n as f64;
                // cubic with vanishing derivative at both ends
                let x = a + len * (3.0 * s * s - 2.0 * s * s * s);
                let jac = len * 6.0 * s * (1.0 - s) / n as f64;
                if let Some((lo, hi)) = column(x) {
                    let inv_hi = if hi.is_finite() { 1.0 / hi } else { 0.0 };
                    acc_area += (1.0 / lo - inv_hi) * jac;
                    // height integral only converges for bounded polygons
                    acc_log += if hi.is_finite() { (hi / lo).ln() * jac } else { f64::INFINITY };
                }
            }
            let change = (acc_area - prev.0).abs() / acc_area.abs().max(1e-300);
            prev = (acc_area, acc_log);
            if change < crate::tolerances::QUADRATURE_REL_TOL || k >= 22 {
                break;
            }
            k += 2;
        }
        area += prev.0;
        log_int += prev.1;
    }
    (area, log_int / area)
}

// ---------------------------------------------------------------------------
// Plain-text preset files
//
// Grammar: one `key = value` pair per line, `#` starts a comment. Matrix
// literals are row-major lists of complex pairs `[re,im]`; ideal points are
// decimal numbers or `inf`; words are comma-separated signed generator
// indices.

#[derive(Debug)]
pub struct PresetError(pub String);

impl std::fmt::Display for PresetError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "malformed preset: {}", self.0)
    }
}

impl std::error::Error for PresetError {}

fn err(msg: impl Into<String>) -> PresetError {
    PresetError(msg.into())
}

/// key/value pairs in file order.
fn parse_kv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .filter_map(|line| {
            line.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> Result<&'a str, PresetError> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| err(format!("missing key `{key}`")))
}

/// `[re,im]` groups in order of appearance.
fn parse_complex_pairs(value: &str) -> Result<Vec<C64>, PresetError> {
    let mut out = Vec::new();
    let mut rest = value;
    while let Some(start) = rest.find('[') {
        let end = rest[start..]
            .find(']')
            .ok_or_else(|| err(format!("unterminated `[` in `{value}`")))?
            + start;
        let inner = &rest[start + 1..end];
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(err(format!("complex pair needs two entries: `[{inner}]`")));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|_| err(format!("bad number `{}`", parts[0])))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|_| err(format!("bad number `{}`", parts[1])))?;
        out.push(C64::new(re, im));
        rest = &rest[end + 1..];
    }
    if out.is_empty() {
        return Err(err(format!("no complex pairs in `{value}`")));
    }
    Ok(out)
}

fn parse_ideal(value: &str) -> Result<IdealPoint, PresetError> {
    if value.trim() == "inf" {
        Ok(IdealPoint::Infinity)
    } else {
        value
            .trim()
            .parse::<f64>()
            .map(IdealPoint::Finite)
            .map_err(|_| err(format!("bad ideal point `{value}`")))
    }
}

fn parse_word(value: &str) -> Result<Word, PresetError> {
    let letters = value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i32>()
                .map_err(|_| err(format!("bad letter `{s}`")))
        })
        .collect::<Result<Vec<i32>, _>>()?;
    Ok(Word::from_letters(&letters))
}

fn parse_real_matrix(value: &str) -> Result<Sl2, PresetError> {
    let v = parse_complex_pairs(value)?;
    if v.len() != 4 {
        return Err(err("surface generators are 2x2 matrices"));
    }
    if v.iter().any(|z| z.im.abs() > 1e-12) {
        return Err(err("surface generators must be real"));
    }
    Ok(Sl2::new(v[0].re, v[1].re, v[2].re, v[3].re))
}

fn parse_usize(value: &str) -> Result<usize, PresetError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(format!("bad count `{value}`")))
}

/// Parse a surface preset file.
pub fn load_surface(text: &str) -> Result<SurfaceGroup, PresetError> {
    let kv = parse_kv(text);
    let name = lookup(&kv, "name")?.to_string();
    let n_gens = parse_usize(lookup(&kv, "generators")?)?;
    let generators = (1..=n_gens)
        .map(|i| parse_real_matrix(lookup(&kv, &format!("gen.{i}"))?))
        .collect::<Result<Vec<_>, _>>()?;
    let base = parse_complex_pairs(lookup(&kv, "base_point")?)?;
    let base_point = *base.first().ok_or_else(|| err("empty base point"))?;
    let n_sides = parse_usize(lookup(&kv, "sides")?)?;
    let sides = (1..=n_sides)
        .map(|i| -> Result<Side, PresetError> {
            let endpoints = lookup(&kv, &format!("side.{i}.endpoints"))?;
            let (p, q) = endpoints
                .split_once(',')
                .ok_or_else(|| err("side endpoints need two entries"))?;
            let pairing: i32 = lookup(&kv, &format!("side.{i}.pairing"))?
                .parse()
                .map_err(|_| err("bad pairing index"))?;
            Ok(Side::new(parse_ideal(p)?, parse_ideal(q)?, pairing, base_point))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_cusps = parse_usize(lookup(&kv, "cusps")?)?;
    let cusps = (1..=n_cusps)
        .map(|i| -> Result<(IdealPoint, Word), PresetError> {
            Ok((
                parse_ideal(lookup(&kv, &format!("cusp.{i}.point"))?)?,
                parse_word(lookup(&kv, &format!("cusp.{i}.word"))?)?,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let box_vals: Vec<f64> = lookup(&kv, "box")?
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| err("bad box")))
        .collect::<Result<Vec<_>, _>>()?;
    if box_vals.len() != 4 {
        return Err(err("box needs x0, x1, y0, y1"));
    }
    let sample_box = SampleBox {
        x0: box_vals[0],
        x1: box_vals[1],
        y0: box_vals[2],
        y1: box_vals[3],
    };
    SurfaceGroup::new(&name, generators, sides, cusps, base_point, sample_box)
        .map_err(|e| err(format!("invalid surface: {e}")))
}

/// Parse a representation preset file.
pub fn load_representation(text: &str) -> Result<Representation, PresetError> {
    let kv = parse_kv(text);
    let n = parse_usize(lookup(&kv, "n")?)?;
    let n_gens = parse_usize(lookup(&kv, "generators")?)?;
    let lifts = (1..=n_gens)
        .map(|i| -> Result<Vec<C64>, PresetError> {
            let m = parse_complex_pairs(lookup(&kv, &format!("gen.{i}"))?)?;
            if m.len() != n * n {
                return Err(err(format!("gen.{i} needs {} entries", n * n)));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Representation::new(n, lifts))
}

/// Parse a Schottky system file.
pub fn load_schottky(text: &str) -> Result<PingPongSystem, PresetError> {
    let kv = parse_kv(text);
    let n_gens = parse_usize(lookup(&kv, "generators")?)?;
    let maps = (1..=n_gens)
        .map(|i| -> Result<ProjectiveMap, PresetError> {
            let m = parse_complex_pairs(lookup(&kv, &format!("gen.{i}"))?)?;
            if m.len() != 4 {
                return Err(err("Schottky generators are 2x2"));
            }
            Ok(ProjectiveMap::new(2, m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let disc = |key: &str| -> Result<Disc, PresetError> {
        let b = parse_complex_pairs(lookup(&kv, &format!("{key}.boundary"))?)?;
        if b.len() != 3 {
            return Err(err(format!("{key}.boundary needs three points")));
        }
        let w = parse_complex_pairs(lookup(&kv, &format!("{key}.witness"))?)?;
        let to_point = |z: C64| {
            if z.is_infinite() || z.norm() > 1e300 {
                crate::moebius::SpherePoint::infinity()
            } else {
                crate::moebius::SpherePoint::from_affine(z)
            }
        };
        Disc::new(
            [to_point(b[0]), to_point(b[1]), to_point(b[2])],
            to_point(w[0]),
        )
        .map_err(|e| err(format!("{key}: {e}")))
    };
    let pairs = (1..=n_gens)
        .map(|i| -> Result<(Disc, Disc), PresetError> {
            Ok((disc(&format!("disc.{i}.a"))?, disc(&format!("disc.{i}.b"))?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PingPongSystem::new(maps, pairs))
}

fn format_pairs(v: &[C64]) -> String {
    v.iter()
        .map(|z| format!("[{},{}]", z.re, z.im))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Serialize a surface group in the preset file grammar.
pub fn surface_to_text(g: &SurfaceGroup) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", g.name));
    out.push_str(&format!("generators = {}\n", g.generators.len()));
    for (i, m) in g.generators.iter().enumerate() {
        let v = [
            C64::new(m.a, 0.0),
            C64::new(m.b, 0.0),
            C64::new(m.c, 0.0),
            C64::new(m.d, 0.0),
        ];
        out.push_str(&format!("gen.{} = {}\n", i + 1, format_pairs(&v)));
    }
    out.push_str(&format!(
        "base_point = [{},{}]\n",
        g.base_point.re, g.base_point.im
    ));
    out.push_str(&format!("sides = {}\n", g.sides.len()));
    let ideal = |p: IdealPoint| match p {
        IdealPoint::Finite(x) => format!("{x}"),
        IdealPoint::Infinity => "inf".to_string(),
    };
    for (i, s) in g.sides.iter().enumerate() {
        out.push_str(&format!(
            "side.{}.endpoints = {}, {}\n",
            i + 1,
            ideal(s.endpoints.0),
            ideal(s.endpoints.1)
        ));
        out.push_str(&format!("side.{}.pairing = {}\n", i + 1, s.pairing));
    }
    out.push_str(&format!("cusps = {}\n", g.cusps.len()));
    for (i, c) in g.cusps.iter().enumerate() {
        out.push_str(&format!("cusp.{}.point = {}\n", i + 1, ideal(c.point)));
        let word = c
            .word
            .letters()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("cusp.{}.word = {}\n", i + 1, word));
    }
    let sb = &g.sample_box;
    out.push_str(&format!("box = {}, {}, {}, {}\n", sb.x0, sb.x1, sb.y0, sb.y1));
    out
}

/// Serialize a representation in the preset file grammar.
pub fn representation_to_text(rep: &Representation) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", rep.dim()));
    out.push_str(&format!("generators = {}\n", rep.rank()));
    for i in 0..rep.rank() {
        out.push_str(&format!("gen.{} = {}\n", i + 1, format_pairs(rep.lift(i))));
    }
    out
}

/// Serialize a ping-pong system in the preset file grammar.
pub fn schottky_to_text(sys: &PingPongSystem) -> String {
    let mut out = String::new();
    out.push_str(&format!("generators = {}\n", sys.rank()));
    for (i, m) in sys.maps().iter().enumerate() {
        out.push_str(&format!("gen.{} = {}\n", i + 1, format_pairs(m.entries())));
    }
    let point_text = |p: &crate::moebius::SpherePoint| match p.to_affine() {
        Some(z) => format!("[{},{}]", z.re, z.im),
        None => "[1e400,0]".to_string(), // parsed back as infinity
    };
    for (i, (a, b)) in sys.pairs().iter().enumerate() {
        for (tag, d) in [("a", a), ("b", b)] {
            let bd = d.boundary();
            out.push_str(&format!(
                "disc.{}.{}.boundary = {}, {}, {}\n",
                i + 1,
                tag,
                point_text(&bd[0]),
                point_text(&bd[1]),
                point_text(&bd[2])
            ));
            out.push_str(&format!(
                "disc.{}.{}.witness = {}\n",
                i + 1,
                tag,
                point_text(d.witness())
            ));
        }
    }
    out
}
