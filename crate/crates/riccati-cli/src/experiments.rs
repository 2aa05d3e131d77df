//! One function per experiment. Each resolves its inputs (named presets or
//! preset files), runs the computation single-threaded for byte-stable
//! outputs, and writes CSV artifacts plus a human-readable report.

use num_complex::Complex64;

use riccati::canonical;
use riccati::cocycle::{lyapunov_spectrum, top_section_estimate, FiberPoint, Representation};
use riccati::cusp::{dichotomy_report, CuspMonodromySpec};
use riccati::presets;
use riccati::rng::Rng;
use riccati::schottky::{certify_ping_pong, schottky_section_for_geodesic, PingPongSystem};
use riccati::srb::{
    basin_test, occupation_measure, occupation_measure_backward, shipped_observables,
    uniform_fiber_point, FiberBinning,
};
use riccati::surface::{SurfaceGroup, UnitTangent};

use crate::config::{Config, ConfigError};
use crate::report::{csv, write_histogram, Artifacts};

pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

fn resolve_surface(config: &Config) -> Result<SurfaceGroup, RunError> {
    let spec = config.str_or("surface", "thrice-punctured-sphere");
    if let Some(g) = presets::surface_by_name(&spec) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(&spec)
        .map_err(|_| ConfigError::NotFound(format!("surface preset or file `{spec}`")))?;
    presets::load_surface(&text).map_err(|e| ConfigError::Malformed(e.to_string()).into())
}

fn resolve_representation(config: &Config, group: &SurfaceGroup) -> Result<Representation, RunError> {
    let spec = config.str_or("representation", "canonical");
    if let Some(r) = presets::representation_by_name(&spec, group) {
        return Ok(r);
    }
    let text = std::fs::read_to_string(&spec)
        .map_err(|_| ConfigError::NotFound(format!("representation preset or file `{spec}`")))?;
    presets::load_representation(&text).map_err(|e| ConfigError::Malformed(e.to_string()).into())
}

fn resolve_schottky(config: &Config) -> Result<PingPongSystem, RunError> {
    let spec = config.str_or("schottky", "schottky-pair");
    if spec == "schottky-pair" {
        return Ok(presets::schottky_pair());
    }
    let text = std::fs::read_to_string(&spec)
        .map_err(|_| ConfigError::NotFound(format!("Schottky preset or file `{spec}`")))?;
    presets::load_schottky(&text).map_err(|e| ConfigError::Malformed(e.to_string()).into())
}

fn sample_orbit_start(group: &SurfaceGroup, rng: &mut Rng) -> Result<UnitTangent, RunError> {
    group.liouville_sample(rng).map_err(runtime)
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn fmt_point(p: &riccati::moebius::SpherePoint) -> (String, String) {
    match p.to_affine() {
        Some(z) => (fmt_f(z.re), fmt_f(z.im)),
        None => ("inf".into(), "inf".into()),
    }
}

pub fn run(config: &Config) -> Result<(), RunError> {
    match config.experiment.as_str() {
        "lyapunov" => lyapunov(config),
        "sections" => sections(config),
        "srb" => srb(config),
        "schottky-sections" => schottky_sections(config),
        "cusp-integrability" => cusp_integrability(config),
        "canonical-check" => canonical_check(config),
        "certify" => certify(config),
        other => Err(ConfigError::Usage(format!("unknown experiment `{other}`")).into()),
    }
}

fn lyapunov(config: &Config) -> Result<(), RunError> {
    let group = resolve_surface(config)?;
    let rep = resolve_representation(config, &group)?;
    let total_time = config.positive_or("T", 10_000.0)?;
    let step = config.positive_or("step", 1.0)?;
    if total_time < step {
        return Err(ConfigError::Malformed("--T must be at least --step".into()).into());
    }
    let mut rng = Rng::new(config.seed()?);
    let artifacts = Artifacts::new(config)?;
    let v0 = sample_orbit_start(&group, &mut rng)?;
    let est = lyapunov_spectrum(&rep, &group, &v0, total_time, step, &mut rng).map_err(runtime)?;
    let n = est.exponents.len();
    let mut rows = Vec::with_capacity(est.history.len());
    for (k, partials) in est.history.iter().enumerate() {
        let mut row = vec![k.to_string(), fmt_f((k + 1) as f64 * step)];
        row.extend(partials.iter().map(|p| fmt_f(*p)));
        rows.push(row);
    }
    let mut header = String::from("block_index,t");
    for j in 1..=n {
        header.push_str(&format!(",partial_exponent_{j}"));
    }
    artifacts.write("lyapunov.csv", &csv(&header, &rows))?;
    let mut report = String::new();
    report.push_str(&format!(
        "surface = {}\ntotal_time = {}\nstep = {}\nrestarts = {}\n",
        group.name, est.total_time, est.step, est.restarts
    ));
    for (j, (l, se)) in est
        .exponents
        .iter()
        .zip(est.standard_errors.iter())
        .enumerate()
    {
        report.push_str(&format!("lambda_{} = {l} +- {se}\n", j + 1));
    }
    report.push_str(&format!(
        "integrable = {}\n",
        if est.integrability.integrable { "yes" } else { "no (exponents advisory, may diverge)" }
    ));
    for cusp in &est.integrability.cusps {
        report.push_str(&format!(
            "cusp.{} word {} moduli {:?}\n",
            cusp.cusp_index + 1,
            cusp.word,
            cusp.moduli
        ));
    }
    if est.divergence_suspected {
        report.push_str("divergence_suspected = yes\n");
    }
    artifacts.write("lyapunov-report.txt", &report)?;
    println!("{report}");
    Ok(())
}

fn sections(config: &Config) -> Result<(), RunError> {
    let group = resolve_surface(config)?;
    let rep = resolve_representation(config, &group)?;
    let horizon = config.positive_or("T", 30.0)?;
    let samples = config.count_or("samples", 100)?;
    let is_canonical = config.str_or("representation", "canonical") == "canonical";
    let mut rng = Rng::new(config.seed()?);
    let artifacts = Artifacts::new(config)?;
    let mut rows = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut kept = 0usize;
    while kept < samples {
        let v = sample_orbit_start(&group, &mut rng)?;
        let (top, bottom) = match (
            top_section_estimate(&rep, &group, &v, horizon),
            riccati::cocycle::bottom_section_estimate(&rep, &group, &v, horizon),
        ) {
            (Ok(t), Ok(b)) => (t, b),
            _ => continue, // cusp-captured sample: draw another
        };
        let z = v.base_point();
        let (tre, tim) = fmt_point(&top.point.to_sphere_point());
        let err = if is_canonical {
            let exact_top = FiberPoint::from_sphere_point(&canonical::sigma_minus(&v));
            let exact_bottom = FiberPoint::from_sphere_point(&canonical::sigma_plus(&v));
            let e = top
                .point
                .fs_distance(&exact_top)
                .max(bottom.point.fs_distance(&exact_bottom));
            max_err = max_err.max(e);
            fmt_f(e)
        } else {
            "nan".into()
        };
        rows.push(vec![
            kept.to_string(),
            fmt_f(z.re),
            fmt_f(z.im),
            fmt_f(v.direction_angle()),
            tre,
            tim,
            fmt_f(top.drift),
            err,
        ]);
        kept += 1;
    }
    artifacts.write(
        "sections.csv",
        &csv("sample,base_x,base_y,angle,top_re,top_im,drift,err_vs_exact", &rows),
    )?;
    let report = if is_canonical {
        format!("samples = {samples}\nhorizon = {horizon}\nmax_error_vs_exact = {max_err}\n")
    } else {
        format!("samples = {samples}\nhorizon = {horizon}\n")
    };
    artifacts.write("sections-report.txt", &report)?;
    println!("{report}");
    Ok(())
}

fn srb(config: &Config) -> Result<(), RunError> {
    let group = resolve_surface(config)?;
    let rep = resolve_representation(config, &group)?;
    let total_time = config.positive_or("T", 200.0)?;
    let orbits = config.count_or("orbits", 200)?;
    let mut rng = Rng::new(config.seed()?);
    let artifacts = Artifacts::new(config)?;
    let observables = shipped_observables(&group);
    let basin = basin_test(&rep, &group, &observables, total_time, orbits, &mut rng)
        .map_err(runtime)?;
    let rows: Vec<Vec<String>> = basin
        .observables
        .iter()
        .map(|o| {
            vec![
                o.name.clone(),
                fmt_f(o.mean),
                fmt_f(o.across),
                fmt_f(o.within),
                (if o.passes { "1" } else { "0" }).to_string(),
            ]
        })
        .collect();
    artifacts.write("basin.csv", &csv("observable,mean,across,within,passes", &rows))?;
    // per-orbit late-window averages with their chunk-based standard errors
    let mut orbit_rows = Vec::new();
    for o in &basin.observables {
        for (orbit, (mean, se)) in o.orbit_means.iter().zip(o.orbit_stderrs.iter()).enumerate() {
            orbit_rows.push(vec![
                o.name.clone(),
                orbit.to_string(),
                fmt_f(*mean),
                fmt_f(*se),
            ]);
        }
    }
    artifacts.write(
        "averages.csv",
        &csv("observable,orbit_id,average,stderr", &orbit_rows),
    )?;
    // forward vs backward occupation of one long orbit
    let (fwd, bwd) = loop {
        let v = sample_orbit_start(&group, &mut rng)?;
        let w = uniform_fiber_point(&mut rng, rep.dim());
        let f = occupation_measure(
            &rep,
            &group,
            &v,
            &w,
            total_time * 0.1,
            total_time,
            0.05,
            FiberBinning::Trivialized,
        );
        let b = occupation_measure_backward(
            &rep,
            &group,
            &v,
            &w,
            total_time * 0.1,
            total_time,
            0.05,
            FiberBinning::Trivialized,
        );
        if let (Ok(f), Ok(b)) = (f, b) {
            break (f, b);
        }
    };
    let tv = fwd.tv_distance(&bwd);
    write_histogram(&artifacts, "occupation-forward.csv", &fwd)?;
    write_histogram(&artifacts, "occupation-backward.csv", &bwd)?;
    let report = format!("{basin}forward_backward_tv = {tv}\n");
    artifacts.write("srb-report.txt", &report)?;
    println!("{report}");
    Ok(())
}

fn schottky_sections(config: &Config) -> Result<(), RunError> {
    let group = resolve_surface_for_schottky(config)?;
    let sys = resolve_schottky(config)?;
    let samples = config.count_or("samples", 100)?;
    let crossings = config.count_or("crossings", 48)?;
    let mut rng = Rng::new(config.seed()?);
    let artifacts = Artifacts::new(config)?;
    let cert = certify_ping_pong(&sys);
    if !cert.ok {
        return Err(RunError::Runtime(format!("system not certified:\n{cert}")));
    }
    let mut rows = Vec::new();
    let mut kept = 0usize;
    while kept < samples {
        let v = sample_orbit_start(&group, &mut rng)?;
        let s = match schottky_section_for_geodesic(&sys, &group, &v, crossings) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let word: String = s
            .word
            .future()
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let (pre, pim) = fmt_point(&s.plus.point);
        let (mre, mim) = fmt_point(&s.minus.point);
        rows.push(vec![
            format!("\"{word}\""),
            pre,
            pim,
            fmt_f(s.plus.diameter_bound),
            mre,
            mim,
            fmt_f(s.minus.diameter_bound),
        ]);
        kept += 1;
    }
    artifacts.write(
        "schottky-sections.csv",
        &csv(
            "word,s_plus_re,s_plus_im,bound_plus,s_minus_re,s_minus_im,bound_minus",
            &rows,
        ),
    )?;
    let report = format!("{cert}samples = {samples}\ncrossings = {crossings}\n");
    artifacts.write("schottky-report.txt", &report)?;
    println!("{report}");
    Ok(())
}

fn resolve_surface_for_schottky(config: &Config) -> Result<SurfaceGroup, RunError> {
    // hyperbolic generators keep itineraries short; default to the torus
    let spec = config.str_or("surface", "once-punctured-torus");
    if let Some(g) = presets::surface_by_name(&spec) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(&spec)
        .map_err(|_| ConfigError::NotFound(format!("surface preset or file `{spec}`")))?;
    presets::load_surface(&text).map_err(|e| ConfigError::Malformed(e.to_string()).into())
}

fn cusp_integrability(config: &Config) -> Result<(), RunError> {
    let kind = config.str_or("kind", "parabolic");
    let n = config.usize_or("n", 2)?;
    if !(2..=8).contains(&n) {
        return Err(ConfigError::Malformed("--n must be between 2 and 8".into()).into());
    }
    let spec = match kind.as_str() {
        "parabolic" => CuspMonodromySpec::parabolic(n, config.f64_or("theta", 0.0)?),
        "hyperbolic" => {
            let lambda = config.f64_or("lambda", 3.0)?;
            if lambda <= 1.0 {
                return Err(ConfigError::Malformed("--lambda must exceed 1".into()).into());
            }
            CuspMonodromySpec::hyperbolic(n, lambda, None)
        }
        other => {
            return Err(ConfigError::Malformed(format!(
                "--kind must be parabolic or hyperbolic, got `{other}`"
            ))
            .into())
        }
    };
    let artifacts = Artifacts::new(config)?;
    let report = dichotomy_report(&spec);
    let mut rows: Vec<Vec<String>> = report
        .ladder
        .iter()
        .map(|(e, i)| vec![fmt_f(*e), fmt_f(*i)])
        .collect();
    rows.push(vec![format!("# verdict = {}", report.verdict), String::new()]);
    let body = csv("epsilon,I_epsilon", &rows);
    artifacts.write("cusp-integrability.csv", &body)?;
    let text = format!(
        "kind = {kind}\nn = {n}\nverdict = {}\ncauchy_increment = {}\nslope = {}\nr_squared = {}\n",
        report.verdict, report.cauchy_increment, report.slope, report.r_squared
    );
    artifacts.write("cusp-report.txt", &text)?;
    println!("{text}");
    Ok(())
}

fn canonical_check(config: &Config) -> Result<(), RunError> {
    let group = resolve_surface(config)?;
    let samples = config.count_or("samples", 100)?;
    let mut rng = Rng::new(config.seed()?);
    let artifacts = Artifacts::new(config)?;
    let mut rows = Vec::new();
    let mut overall: f64 = 0.0;
    for t in [1.0, 5.0, 10.0] {
        let mut max_err: f64 = 0.0;
        let mut kept = 0usize;
        while kept < samples {
            let v = sample_orbit_start(&group, &mut rng)?;
            let w = riccati::moebius::SpherePoint::from_affine(Complex64::new(
                rng.range(-2.0, 2.0),
                rng.range(-2.0, 2.0),
            ));
            match canonical::contraction_check(&group, &v, &w, t) {
                Ok(check) => {
                    max_err = max_err.max(check.error);
                    kept += 1;
                }
                Err(_) => continue,
            }
        }
        overall = overall.max(max_err);
        rows.push(vec![fmt_f(t), fmt_f(max_err)]);
    }
    artifacts.write("canonical-check.csv", &csv("t,max_error", &rows))?;
    let report = format!(
        "surface = {}\nsamples_per_t = {samples}\nmax_contraction_error = {overall}\n",
        group.name
    );
    artifacts.write("canonical-report.txt", &report)?;
    println!("{report}");
    Ok(())
}

fn certify(config: &Config) -> Result<(), RunError> {
    let sys = resolve_schottky(config)?;
    let artifacts = Artifacts::new(config)?;
    let cert = certify_ping_pong(&sys);
    let mut body = format!("{cert}");
    for g in &cert.generators {
        body.push_str(&format!(
            "generator {}: forward margin {:?}, backward margin {:?}\n",
            g.generator, g.forward_margin, g.backward_margin
        ));
    }
    artifacts.write("certificate.txt", &body)?;
    println!("{body}");
    if cert.ok {
        Ok(())
    } else {
        Err(RunError::Runtime("certification failed".into()))
    }
}
