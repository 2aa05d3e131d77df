//! Empirical SRB statistics: time averages of fiber observables along
//! foliated orbits, basin tests, and empirical pushforward measures.
//!
//! Observables are bounded and compactly supported in the base: the window
//! truncates the polygon at a configurable horoball height in every cusp
//! chart, so deep excursions contribute zero, matching the compact-support
//! basin definition. Histograms live on a product grid of base cells and
//! fiber cells; the fiber can be binned either in the fixed sphere chart or
//! in the moving three-section trivialization (the latter separates the
//! forward and backward attractors, which occupy the 0 and infinity labels
//! respectively).

use num_complex::Complex64;
use std::fmt;

use crate::canonical;
use crate::cocycle::{top_section_estimate, FiberPoint, Representation};
use crate::rng::Rng;
use crate::schottky::{schottky_section_for_geodesic, PingPongSystem};
use crate::surface::{FlowError, SurfaceGroup, UnitTangent};
use crate::tolerances::DISPERSION_FLOOR;

pub type C64 = Complex64;

/// Default horoball-height cutoff of the compact observable window.
pub const DEFAULT_WINDOW_HEIGHT: f64 = 10.0;

fn in_window(group: &SurfaceGroup, z: C64, window_height: f64) -> bool {
    group.max_vertex_height(z) <= window_height
}

/// Which canonical endpoint section an observable references.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionTarget {
    /// sigma_minus: the forward attractor of the canonical suspension.
    Attractor,
    /// sigma_plus: the forward repeller.
    Repeller,
}

/// A named bounded observable of (base vector, fiber point), compactly
/// supported in the base.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Constant 1 on the compact window.
    WindowIndicator { window_height: f64 },
    /// Fubini–Study distance from the fiber point to a canonical endpoint
    /// section.
    DistanceToSection { target: SectionTarget, window_height: f64 },
    /// Smooth bump of the base point around `center`.
    BaseBump { center: C64, scale: f64, window_height: f64 },
    /// Indicator of one angular cell of the trivialized fiber coordinate.
    TrivializedAngleBin { bin: usize, of: usize, window_height: f64 },
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::WindowIndicator { .. } => "window".into(),
            Observable::DistanceToSection { target, .. } => match target {
                SectionTarget::Attractor => "dist-to-attractor".into(),
                SectionTarget::Repeller => "dist-to-repeller".into(),
            },
            Observable::BaseBump { .. } => "base-bump".into(),
            Observable::TrivializedAngleBin { bin, of, .. } => format!("angle-bin-{bin}-of-{of}"),
        }
    }

    pub fn eval(&self, group: &SurfaceGroup, v: &UnitTangent, w: &FiberPoint) -> f64 {
        let z = v.base_point();
        match self {
            Observable::WindowIndicator { window_height } => {
                if in_window(group, z, *window_height) {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::DistanceToSection {
                target,
                window_height,
            } => {
                if !in_window(group, z, *window_height) {
                    return 0.0;
                }
                let section = match target {
                    SectionTarget::Attractor => canonical::sigma_minus(v),
                    SectionTarget::Repeller => canonical::sigma_plus(v),
                };
                w.fs_distance(&FiberPoint::from_sphere_point(&section))
            }
            Observable::BaseBump {
                center,
                scale,
                window_height,
            } => {
                if !in_window(group, z, *window_height) {
                    return 0.0;
                }
                let d2 = (z - center).norm_sqr() / (scale * scale);
                (-d2).exp()
            }
            Observable::TrivializedAngleBin {
                bin,
                of,
                window_height,
            } => {
                if !in_window(group, z, *window_height) {
                    return 0.0;
                }
                let c = canonical::trivialization_coordinate(v, &w.to_sphere_point());
                let angle = match c.to_affine() {
                    Some(z) if z.norm() > 0.0 => z.arg(),
                    _ => 0.0,
                };
                let idx = angle_bin(angle, *of);
                if idx == *bin {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// The shipped observable set used by the basin experiments.
pub fn shipped_observables(group: &SurfaceGroup) -> Vec<Observable> {
    vec![
        Observable::DistanceToSection {
            target: SectionTarget::Attractor,
            window_height: DEFAULT_WINDOW_HEIGHT,
        },
        Observable::BaseBump {
            center: group.base_point,
            scale: 0.3,
            window_height: DEFAULT_WINDOW_HEIGHT,
        },
        Observable::TrivializedAngleBin {
            bin: 3,
            of: 16,
            window_height: DEFAULT_WINDOW_HEIGHT,
        },
    ]
}

fn angle_bin(angle: f64, of: usize) -> usize {
    let tau = 2.0 * std::f64::consts::PI;
    let mut a = angle % tau;
    if a < 0.0 {
        a += tau;
    }
    ((a / tau) * of as f64) as usize % of
}

/// Uniform (Fubini–Study) random fiber point: complex Gaussian pair.
pub fn uniform_fiber_point(rng: &mut Rng, n: usize) -> FiberPoint {
    let normal = |rng: &mut Rng| {
        // Box-Muller
        let u1: f64 = rng.uniform().max(1e-300);
        let u2: f64 = rng.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    FiberPoint::new(
        (0..n)
            .map(|_| C64::new(normal(rng), normal(rng)))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Time averages

#[derive(Debug, Clone)]
pub struct TimeAverage {
    pub value: f64,
    pub samples: usize,
    /// True when the orbit was captured by a cusp and the average is
    /// partial.
    pub partial: bool,
}

/// Time average of `h` along the foliated orbit of (v, w): the base flows
/// on the surface, the fiber transforms through the representation at each
/// crossing, and `h` is sampled every `dt`.
pub fn time_average(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    w: &FiberPoint,
    h: &Observable,
    total_time: f64,
    dt: f64,
) -> Result<TimeAverage, FlowError> {
    assert!(dt > 0.0 && dt <= 0.1, "dt must be in (0, 0.1]");
    let steps = (total_time / dt).round() as usize;
    let mut orbit = FoliatedOrbit::new(rep, group, *v, w.clone());
    let mut acc = 0.0;
    let mut samples = 0usize;
    for _ in 0..steps {
        acc += h.eval(group, &orbit.v, &orbit.fiber);
        samples += 1;
        if let Err(e) = orbit.advance(dt) {
            return match e {
                FlowError::CuspCapture { .. } => Ok(TimeAverage {
                    value: acc / samples as f64,
                    samples,
                    partial: true,
                }),
                other => Err(other),
            };
        }
    }
    Ok(TimeAverage {
        value: acc / samples as f64,
        samples,
        partial: false,
    })
}

/// A foliated orbit state: in-polygon base vector plus fiber point, stepped
/// together.
pub struct FoliatedOrbit<'a> {
    rep: &'a Representation,
    group: &'a SurfaceGroup,
    pub v: UnitTangent,
    pub fiber: FiberPoint,
}

impl<'a> FoliatedOrbit<'a> {
    pub fn new(
        rep: &'a Representation,
        group: &'a SurfaceGroup,
        v: UnitTangent,
        fiber: FiberPoint,
    ) -> Self {
        FoliatedOrbit {
            rep,
            group,
            v,
            fiber,
        }
    }

    pub fn advance(&mut self, dt: f64) -> Result<(), FlowError> {
        let mut value = crate::cocycle::CocycleValue::identity(self.rep.dim());
        let out = self
            .group
            .flow_with_events(&self.v, dt, |l| value.apply_letter(self.rep, l))?;
        self.v = out.v;
        self.fiber = value.apply_to_fiber(&self.fiber);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Basin test

#[derive(Debug, Clone)]
pub struct ObservableDispersion {
    pub name: String,
    /// Standard deviation of late-window orbit means across the ensemble.
    pub across: f64,
    /// Expected sampling dispersion of a late-window mean, from the
    /// within-orbit chunk spread.
    pub within: f64,
    pub mean: f64,
    pub passes: bool,
    /// Late-window mean per orbit.
    pub orbit_means: Vec<f64>,
    /// Chunk-based standard error of each orbit's late-window mean.
    pub orbit_stderrs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BasinReport {
    pub observables: Vec<ObservableDispersion>,
    /// True when every observable's across-orbit dispersion stays below
    /// `factor` times its within-orbit dispersion (plus an absolute floor).
    pub single_srb_statistics: bool,
    pub factor: f64,
    pub orbits: usize,
    pub captured_resampled: usize,
}

impl fmt::Display for BasinReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "basin verdict: {} ({} orbits, {} resampled)",
            if self.single_srb_statistics {
                "single SRB statistics"
            } else {
                "no common statistics"
            },
            self.orbits,
            self.captured_resampled
        )?;
        for o in &self.observables {
            writeln!(
                f,
                "  {}: mean {:.6}, across {:.3e}, within {:.3e}, {}",
                o.name,
                o.mean,
                o.across,
                o.within,
                if o.passes { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

const BASIN_CHUNKS: usize = 8;

/// Draw `n_orbits` (Liouville base, uniform fiber) pairs, flow each for
/// time `total_time`, and compare the across-orbit dispersion of
/// late-window time averages with the within-orbit chunk dispersion. Under
/// a single SRB measure every orbit's late average estimates the same
/// number, so the across dispersion matches the sampling noise; an
/// isometric fiber action keeps a memory of the initial fiber point and
/// fails the comparison.
pub fn basin_test(
    rep: &Representation,
    group: &SurfaceGroup,
    observables: &[Observable],
    total_time: f64,
    n_orbits: usize,
    rng: &mut Rng,
) -> Result<BasinReport, FlowError> {
    let dt = 0.1;
    let factor = crate::tolerances::ACC_BASIN_DISPERSION_FACTOR;
    let mut captured = 0usize;
    // per observable, per orbit: late-window mean and chunk std
    let mut late_means = vec![Vec::with_capacity(n_orbits); observables.len()];
    let mut chunk_stds = vec![Vec::with_capacity(n_orbits); observables.len()];
    let mut completed = 0usize;
    'orbit: while completed < n_orbits {
        let v = group.liouville_sample(rng)?;
        let w = uniform_fiber_point(rng, rep.dim());
        let mut orbit = FoliatedOrbit::new(rep, group, v, w);
        let steps = (total_time / dt).round() as usize;
        let late_start = steps / 2;
        let chunk_len = (steps - late_start) / BASIN_CHUNKS;
        let mut chunk_acc = vec![vec![0.0f64; BASIN_CHUNKS]; observables.len()];
        for step in 0..steps {
            if step >= late_start {
                let chunk = ((step - late_start) / chunk_len).min(BASIN_CHUNKS - 1);
                for (oi, h) in observables.iter().enumerate() {
                    chunk_acc[oi][chunk] += h.eval(group, &orbit.v, &orbit.fiber);
                }
            }
            match orbit.advance(dt) {
                Ok(()) => {}
                Err(FlowError::CuspCapture { .. }) => {
                    captured += 1;
                    continue 'orbit;
                }
                Err(e) => return Err(e),
            }
        }
        for (oi, chunks) in chunk_acc.iter().enumerate() {
            let means: Vec<f64> = chunks.iter().map(|c| c / chunk_len as f64).collect();
            let mean = means.iter().sum::<f64>() / BASIN_CHUNKS as f64;
            let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
                / (BASIN_CHUNKS - 1) as f64;
            late_means[oi].push(mean);
            chunk_stds[oi].push(var.sqrt());
        }
        completed += 1;
    }
    let mut results = Vec::new();
    let mut all_pass = true;
    for (oi, h) in observables.iter().enumerate() {
        let lm = &late_means[oi];
        let mean = lm.iter().sum::<f64>() / lm.len() as f64;
        let across = (lm.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (lm.len() - 1) as f64)
            .sqrt();
        // a late-window mean of BASIN_CHUNKS chunks has sampling std
        // chunk_std / sqrt(BASIN_CHUNKS)
        let within = chunk_stds[oi].iter().sum::<f64>()
            / chunk_stds[oi].len() as f64
            / (BASIN_CHUNKS as f64).sqrt();
        let passes = across < factor * within + DISPERSION_FLOOR;
        all_pass &= passes;
        results.push(ObservableDispersion {
            name: h.name(),
            across,
            within,
            mean,
            passes,
            orbit_means: lm.clone(),
            orbit_stderrs: chunk_stds[oi]
                .iter()
                .map(|s| s / (BASIN_CHUNKS as f64).sqrt())
                .collect(),
        });
    }
    Ok(BasinReport {
        observables: results,
        single_srb_statistics: all_pass,
        factor,
        orbits: completed,
        captured_resampled: captured,
    })
}

// ---------------------------------------------------------------------------
// Empirical measures

/// Fiber binning scheme: 16 angular cells times 4 radial bands (64 cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberBinning {
    /// Fixed sphere chart through the Cayley transform (w - i)/(w + i):
    /// band 0 is a thin collar of the real circle RP^1.
    Chart,
    /// Moving three-section trivialization: band 0 is the attractor label
    /// (coordinate near 0), band 3 the repeller label (near infinity).
    Trivialized,
}

pub const FIBER_ANGLE_CELLS: usize = 16;
pub const FIBER_RADIAL_BANDS: usize = 4;
pub const BASE_CELLS: usize = 32;

/// Weighted histogram over base cells x fiber cells with total mass 1.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub binning: FiberBinning,
    x_range: (f64, f64),
    y_range: (f64, f64),
    weights: Vec<f64>,
    total: f64,
}

impl EmpiricalMeasure {
    pub fn new(group: &SurfaceGroup, binning: FiberBinning) -> Self {
        let sb = &group.sample_box;
        let y_max = sb.y1.min(2.0);
        EmpiricalMeasure {
            binning,
            x_range: (sb.x0, sb.x1),
            y_range: (0.0, y_max),
            weights: vec![
                0.0;
                BASE_CELLS * BASE_CELLS * FIBER_ANGLE_CELLS * FIBER_RADIAL_BANDS
            ],
            total: 0.0,
        }
    }

    fn base_cell(&self, z: C64) -> (usize, usize) {
        let clamp = |t: f64| t.clamp(0.0, 1.0 - 1e-12);
        let xi = clamp((z.re - self.x_range.0) / (self.x_range.1 - self.x_range.0));
        let yi = clamp((z.im - self.y_range.0) / (self.y_range.1 - self.y_range.0));
        (
            (xi * BASE_CELLS as f64) as usize,
            (yi * BASE_CELLS as f64) as usize,
        )
    }

    fn fiber_cell(&self, v: &UnitTangent, w: &FiberPoint) -> (usize, usize) {
        let p = match self.binning {
            FiberBinning::Chart => w.to_sphere_point(),
            FiberBinning::Trivialized => {
                canonical::trivialization_coordinate(v, &w.to_sphere_point())
            }
        };
        let (angle, radius) = match p.to_affine() {
            None => (0.0, f64::INFINITY),
            Some(z) => match self.binning {
                FiberBinning::Chart => {
                    // Cayley: real circle to unit circle
                    let zeta = (z - C64::new(0.0, 1.0)) / (z + C64::new(0.0, 1.0));
                    (zeta.arg(), zeta.norm())
                }
                FiberBinning::Trivialized => (z.arg(), z.norm()),
            },
        };
        let band = match self.binning {
            FiberBinning::Chart => {
                let d = radius.ln().abs();
                if d < 0.05 {
                    0
                } else if d < 1.0 {
                    1
                } else if d < 3.0 {
                    2
                } else {
                    3
                }
            }
            FiberBinning::Trivialized => {
                if radius <= 0.05 {
                    0
                } else if radius <= 1.0 {
                    1
                } else if radius <= 20.0 {
                    2
                } else {
                    3
                }
            }
        };
        // at the attractor/repeller labels of the trivialized chart the
        // angle carries no information (the coordinate is a vanishing
        // residual), so those bands are single cells
        let a = if self.binning == FiberBinning::Trivialized && (band == 0 || band == 3) {
            0
        } else {
            angle_bin(angle, FIBER_ANGLE_CELLS)
        };
        (a, band)
    }

    pub fn add(&mut self, v: &UnitTangent, w: &FiberPoint, weight: f64) {
        let (xi, yi) = self.base_cell(v.base_point());
        let (ai, bi) = self.fiber_cell(v, w);
        let idx = ((xi * BASE_CELLS + yi) * FIBER_ANGLE_CELLS + ai) * FIBER_RADIAL_BANDS + bi;
        self.weights[idx] += weight;
        self.total += weight;
    }

    /// Normalized weights (mass 1).
    pub fn normalized(&self) -> Vec<f64> {
        assert!(self.total > 0.0, "empty measure");
        self.weights.iter().map(|w| w / self.total).collect()
    }

    /// Mass per fiber radial band, marginalizing everything else.
    pub fn fiber_band_marginal(&self) -> [f64; FIBER_RADIAL_BANDS] {
        let mut bands = [0.0; FIBER_RADIAL_BANDS];
        for (idx, w) in self.weights.iter().enumerate() {
            bands[idx % FIBER_RADIAL_BANDS] += w;
        }
        for b in &mut bands {
            *b /= self.total;
        }
        bands
    }

    /// Total-variation distance between two normalized histograms.
    pub fn tv_distance(&self, other: &EmpiricalMeasure) -> f64 {
        assert_eq!(self.binning, other.binning);
        let a = self.normalized();
        let b = other.normalized();
        0.5 * a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
    }

    /// Total variation on a view with base cells merged `factor` x `factor`:
    /// finite-sample TV on a sparse fine grid is dominated by counting
    /// noise, so consistency checks compare at reduced base resolution.
    pub fn tv_distance_coarse(&self, other: &EmpiricalMeasure, factor: usize) -> f64 {
        assert_eq!(self.binning, other.binning);
        let coarse = |m: &EmpiricalMeasure| -> Vec<f64> {
            let cells = BASE_CELLS / factor;
            let mut out =
                vec![0.0; cells * cells * FIBER_ANGLE_CELLS * FIBER_RADIAL_BANDS];
            for (xi, yi, ai, bi, w) in m.rows() {
                let idx = (((xi / factor) * cells + yi / factor) * FIBER_ANGLE_CELLS + ai)
                    * FIBER_RADIAL_BANDS
                    + bi;
                out[idx] += w;
            }
            out
        };
        let a = coarse(self);
        let b = coarse(other);
        0.5 * a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
    }

    /// Non-empty cells as (x, y, angle, band, weight) rows.
    pub fn rows(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for (idx, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let bi = idx % FIBER_RADIAL_BANDS;
            let ai = (idx / FIBER_RADIAL_BANDS) % FIBER_ANGLE_CELLS;
            let yi = (idx / (FIBER_RADIAL_BANDS * FIBER_ANGLE_CELLS)) % BASE_CELLS;
            let xi = idx / (FIBER_RADIAL_BANDS * FIBER_ANGLE_CELLS * BASE_CELLS);
            out.push((xi, yi, ai, bi, w / self.total));
        }
        out
    }
}

/// Where section values for the pushforward measure come from.
pub enum SectionSource<'a> {
    /// Exact attracting canonical section (backward endpoint).
    Canonical,
    /// Nested-disc Schottky section over the itinerary.
    Schottky(&'a PingPongSystem),
    /// Generic cocycle estimator at the given horizon.
    Estimator {
        rep: &'a Representation,
        horizon: f64,
    },
}

/// Histogram of (Liouville sample, section value) pairs: the empirical
/// pushforward of Liouville measure under the section.
pub fn pushforward_measure(
    group: &SurfaceGroup,
    source: &SectionSource<'_>,
    n_samples: usize,
    binning: FiberBinning,
    rng: &mut Rng,
) -> Result<EmpiricalMeasure, FlowError> {
    let mut measure = EmpiricalMeasure::new(group, binning);
    let mut kept = 0usize;
    while kept < n_samples {
        let v = group.liouville_sample(rng)?;
        let w = match source {
            SectionSource::Canonical => {
                Some(FiberPoint::from_sphere_point(&canonical::sigma_minus(&v)))
            }
            SectionSource::Schottky(sys) => schottky_section_for_geodesic(sys, group, &v, 48)
                .ok()
                .map(|s| FiberPoint::from_sphere_point(&s.plus.point)),
            SectionSource::Estimator { rep, horizon } => {
                top_section_estimate(rep, group, &v, *horizon)
                    .ok()
                    .map(|e| e.point)
            }
        };
        if let Some(w) = w {
            measure.add(&v, &w, 1.0);
            kept += 1;
        }
    }
    Ok(measure)
}

/// Occupation histogram of a foliated orbit over [t0, t1], sampled every
/// `dt`.
#[allow(clippy::too_many_arguments)]
pub fn occupation_measure(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    w: &FiberPoint,
    t0: f64,
    t1: f64,
    dt: f64,
    binning: FiberBinning,
) -> Result<EmpiricalMeasure, FlowError> {
    occupation_measure_directed(rep, group, v, w, t0, t1, dt, binning, false)
}

/// Backward-time occupation: the orbit over [-t1, -t0], binned with the
/// original (unflipped) orientation so it is comparable with forward
/// histograms as a measure on the same bundle.
#[allow(clippy::too_many_arguments)]
pub fn occupation_measure_backward(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    w: &FiberPoint,
    t0: f64,
    t1: f64,
    dt: f64,
    binning: FiberBinning,
) -> Result<EmpiricalMeasure, FlowError> {
    occupation_measure_directed(rep, group, v, w, t0, t1, dt, binning, true)
}

#[allow(clippy::too_many_arguments)]
fn occupation_measure_directed(
    rep: &Representation,
    group: &SurfaceGroup,
    v: &UnitTangent,
    w: &FiberPoint,
    t0: f64,
    t1: f64,
    dt: f64,
    binning: FiberBinning,
    backward: bool,
) -> Result<EmpiricalMeasure, FlowError> {
    let mut measure = EmpiricalMeasure::new(group, binning);
    let start_v = if backward { v.flipped() } else { *v };
    let mut orbit = FoliatedOrbit::new(rep, group, start_v, w.clone());
    let steps = (t1 / dt).round() as usize;
    let start = (t0 / dt).round() as usize;
    for step in 0..steps {
        if step >= start {
            if backward {
                measure.add(&orbit.v.flipped(), &orbit.fiber, 1.0);
            } else {
                measure.add(&orbit.v, &orbit.fiber, 1.0);
            }
        }
        orbit.advance(dt)?;
    }
    Ok(measure)
}
