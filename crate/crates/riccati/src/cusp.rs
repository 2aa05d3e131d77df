//! Quantitative cusp analysis: the punctured-disc excursion measure, the
//! in–out monodromy matrix, and the numerical integrability dichotomy.
//!
//! A geodesic entering the cusp region at angle eta from the vertical winds
//! a_u = 2 cos(eta)/sin(eta) around the puncture and spends the exact time
//! arccosh(1 + a_u^2/2) above the horocycle. The flat bundle transports the
//! fiber by the in–out matrix B(u): for a parabolic monodromy exp(A_theta)
//! it is exp((a_u / 2 pi) A_theta), of polynomially bounded norm; for a
//! monodromy with an eigenvalue lambda > 1 its norm grows like
//! lambda^{|a_u| / 2}, and log+ |B| stops being integrable against
//! d(theta) d(eta): the dichotomy behind the eigenvalue criterion of the
//! `cocycle` module.
//!
//! The integral I(eps) reported here is theta-averaged: the integrand does
//! not depend on theta (only a unit-modulus factor), so the theta factor is
//! a constant that carries no information about convergence, and dropping
//! it keeps the reported values comparable across dimensions.

use num_complex::Complex64;
use std::fmt;

use crate::linalg;
use crate::rng::Rng;
use crate::tolerances::QUADRATURE_REL_TOL;

pub type C64 = Complex64;

/// Cusp monodromy model: a single Jordan block with unit-modulus eigenvalue
/// (parabolic, rotation parameter theta) or a matrix with a real eigenvalue
/// lambda > 1 (hyperbolic), optionally conjugated.
#[derive(Debug, Clone)]
pub struct CuspMonodromySpec {
    pub n: usize,
    pub kind: CuspKind,
}

#[derive(Debug, Clone)]
pub enum CuspKind {
    Parabolic { theta: f64 },
    Hyperbolic { lambda: f64, conjugator: Option<Vec<C64>> },
}

impl CuspMonodromySpec {
    pub fn parabolic(n: usize, theta: f64) -> Self {
        assert!(n >= 2);
        CuspMonodromySpec {
            n,
            kind: CuspKind::Parabolic { theta },
        }
    }

    pub fn hyperbolic(n: usize, lambda: f64, conjugator: Option<Vec<C64>>) -> Self {
        assert!(n >= 2);
        assert!(lambda > 1.0, "hyperbolic cusp data needs lambda > 1");
        if let Some(c) = &conjugator {
            assert_eq!(c.len(), n * n);
            assert!(linalg::det(n, c).norm() > 1e-12, "conjugator must be invertible");
        }
        CuspMonodromySpec {
            n,
            kind: CuspKind::Hyperbolic { lambda, conjugator },
        }
    }
}

/// The closed-form exponential of t·A_theta, where A_theta is the Jordan
/// block with i·theta on the diagonal and ones above: the upper-triangular
/// Toeplitz matrix e^{i t theta} [t^{k-j} / (k-j)!].
pub fn exp_t_a_theta(theta: f64, t: f64, n: usize) -> Vec<C64> {
    let phase = C64::from_polar(1.0, t * theta);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut factor = 1.0f64;
        for k in j..n {
            if k > j {
                factor *= t / (k - j) as f64;
            }
            m[j * n + k] = phase * factor;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum CuspError {
    /// eta = 0: radial entry, infinite excursion.
    Radial,
}

impl fmt::Display for CuspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CuspError::Radial => write!(f, "radial entry"),
        }
    }
}

impl std::error::Error for CuspError {}

/// Signed winding of the entry angle.
pub fn winding(eta: f64) -> f64 {
    2.0 * eta.cos() / eta.sin()
}

/// The in–out matrix of one excursion at entry angle eta: parabolic data
/// winds exp((a_u / 2 pi) A_theta), hyperbolic data realizes the diag-power
/// lambda^{± a_u / 2}, conjugated if a conjugator is supplied.
pub fn in_out_matrix(spec: &CuspMonodromySpec, eta: f64) -> Result<Vec<C64>, CuspError> {
    if eta.abs() < 1e-12 {
        return Err(CuspError::Radial);
    }
    let a = winding(eta);
    match &spec.kind {
        CuspKind::Parabolic { theta } => Ok(exp_t_a_theta(
            *theta,
            a / (2.0 * std::f64::consts::PI),
            spec.n,
        )),
        CuspKind::Hyperbolic { lambda, conjugator } => {
            let mut d = linalg::identity(spec.n);
            d[0] = C64::new(lambda.powf(a / 2.0), 0.0);
            d[spec.n + 1] = C64::new(lambda.powf(-a / 2.0), 0.0);
            match conjugator {
                None => Ok(d),
                Some(c) => {
                    let ci = linalg::inverse(spec.n, c).expect("invertible by invariant");
                    Ok(linalg::mat_mul(
                        spec.n,
                        c,
                        &linalg::mat_mul(spec.n, &d, &ci),
                    ))
                }
            }
        }
    }
}

/// log+ of the operator norm of the in–out matrix, computed in log space:
/// deep excursions make lambda^{a/2} overflow any float long before the
/// integral converges, so the dominant exponent is factored out first.
pub fn log_plus_norm(spec: &CuspMonodromySpec, eta: f64) -> Result<f64, CuspError> {
    if eta.abs() < 1e-12 {
        return Err(CuspError::Radial);
    }
    let a = winding(eta);
    match &spec.kind {
        CuspKind::Parabolic { theta } => {
            // entries grow polynomially in a; safe to materialize
            let m = exp_t_a_theta(*theta, a / (2.0 * std::f64::consts::PI), spec.n);
            Ok(linalg::operator_norm(spec.n, &m).ln().max(0.0))
        }
        CuspKind::Hyperbolic { lambda, conjugator } => {
            let s = (a / 2.0) * lambda.ln();
            let exponents: Vec<f64> = (0..spec.n)
                .map(|j| match j {
                    0 => s,
                    1 => -s,
                    _ => 0.0,
                })
                .collect();
            let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut d = vec![C64::new(0.0, 0.0); spec.n * spec.n];
            for j in 0..spec.n {
                d[j * spec.n + j] = C64::new((exponents[j] - top).exp(), 0.0);
            }
            let inner = match conjugator {
                None => d,
                Some(cm) => {
                    let ci = linalg::inverse(spec.n, cm).expect("invertible by invariant");
                    linalg::mat_mul(spec.n, cm, &linalg::mat_mul(spec.n, &d, &ci))
                }
            };
            Ok((top + linalg::operator_norm(spec.n, &inner).ln()).max(0.0))
        }
    }
}

/// Theta-averaged truncated integrability integral
/// I(eps) = ∫_{eps < |eta| <= pi/2} log+ |B(eta)| d(eta).
/// The integrand is symmetric in eta and smooth away from 0; the
/// quadrature substitutes eta = e^u and refines a composite midpoint rule
/// until the relative change drops below `QUADRATURE_REL_TOL`.
pub fn integrability_integral(spec: &CuspMonodromySpec, eps: f64) -> f64 {
    assert!(eps > 0.0 && eps < std::f64::consts::FRAC_PI_2);
    let (lo, hi) = (eps.ln(), std::f64::consts::FRAC_PI_2.ln());
    let mut prev = f64::NAN;
    let mut k = 10usize;
    loop {
        let npts = 1usize << k;
        let h = (hi - lo) / npts as f64;
        let mut acc = 0.0;
        for i in 0..npts {
            let u = lo + (i as f64 + 0.5) * h;
            let eta = u.exp();
            // both signs of eta contribute equally
            acc += 2.0 * log_plus_norm(spec, eta).expect("eta > 0") * eta * h;
        }
        if !prev.is_nan() {
            let change = (acc - prev).abs() / acc.abs().max(1e-300);
            if change < QUADRATURE_REL_TOL || k >= 22 {
                return acc;
            }
        }
        prev = acc;
        k += 2;
    }
}

/// One sample of the cusp excursion measure cos(eta) d(theta) d(eta) d(t):
/// theta uniform on the circle, eta with density cos(eta)/2 on
/// (-pi/2, pi/2), and t uniform on [0, t_u(eta)].
pub fn liouville_excursion_sample(rng: &mut Rng) -> (f64, f64, f64) {
    let theta = rng.range(0.0, 2.0 * std::f64::consts::PI);
    let eta = loop {
        let e = (2.0 * rng.uniform() - 1.0).asin();
        if e.abs() > 1e-9 {
            break e;
        }
    };
    let a = winding(eta);
    let t_u = (1.0 + a * a / 2.0).acosh();
    let t = rng.range(0.0, t_u);
    (theta, eta, t)
}

/// Monte-Carlo estimate of I(eps), reweighted from the excursion sampler to
/// the flat measure d(theta) d(eta) (theta-averaged like the quadrature).
/// Returns (estimate, standard error).
pub fn integrability_integral_mc(
    spec: &CuspMonodromySpec,
    eps: f64,
    samples: usize,
    rng: &mut Rng,
) -> (f64, f64) {
    // restriction mass of cos(eta)/2 on {eps < |eta| < pi/2}
    let mass = 1.0 - eps.sin();
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    let mut kept = 0usize;
    while kept < samples {
        let (_, eta, _) = liouville_excursion_sample(rng);
        if eta.abs() <= eps {
            continue;
        }
        // density of kept eta: cos(eta) / (2 mass); target density: flat
        let f = log_plus_norm(spec, eta).expect("eta > 0") / eta.cos();
        acc += f;
        acc2 += f * f;
        kept += 1;
    }
    let mean = acc / kept as f64;
    let var = (acc2 / kept as f64 - mean * mean).max(0.0);
    let scale = 2.0 * mass;
    (mean * scale, scale * (var / kept as f64).sqrt())
}

/// Least-squares fit y = a + b x; returns (a, b, r_squared).
pub fn affine_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DichotomyVerdict {
    Integrable,
    Divergent,
    Inconclusive,
}

impl fmt::Display for DichotomyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DichotomyVerdict::Integrable => write!(f, "integrable"),
            DichotomyVerdict::Divergent => write!(f, "divergent"),
            DichotomyVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DichotomyReport {
    /// (eps, I(eps)) ladder, eps = 2^-4 .. 2^-16.
    pub ladder: Vec<(f64, f64)>,
    /// |I(2^-16) - I(2^-15)|.
    pub cauchy_increment: f64,
    /// Affine fit of I against log(1/eps).
    pub slope: f64,
    pub r_squared: f64,
    pub verdict: DichotomyVerdict,
}

/// Run the eps-ladder and classify: a Cauchy tail signals integrability, an
/// affine growth in log(1/eps) with positive slope signals divergence.
pub fn dichotomy_report(spec: &CuspMonodromySpec) -> DichotomyReport {
    let ladder: Vec<(f64, f64)> = (4..=16)
        .map(|k| {
            let eps = 0.5f64.powi(k);
            (eps, integrability_integral(spec, eps))
        })
        .collect();
    let m = ladder.len();
    let cauchy_increment = (ladder[m - 1].1 - ladder[m - 2].1).abs();
    let xs: Vec<f64> = ladder.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|(_, i)| *i).collect();
    let (_, slope, r_squared) = affine_fit(&xs, &ys);
    let verdict = if cauchy_increment < crate::tolerances::ACC_PARABOLIC_CAUCHY {
        DichotomyVerdict::Integrable
    } else if slope > 0.01 && r_squared > crate::tolerances::ACC_HYPERBOLIC_R2 {
        DichotomyVerdict::Divergent
    } else {
        DichotomyVerdict::Inconclusive
    };
    DichotomyReport {
        ladder,
        cauchy_increment,
        slope,
        r_squared,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_t_a_theta_examples() {
        // n = 2, theta = 0, t = 1: the unipotent [[1,1],[0,1]]
        let m = exp_t_a_theta(0.0, 1.0, 2);
        let expect = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (a, b) in m.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        // t = 0: identity for any n, theta
        for n in 2..=4 {
            let m = exp_t_a_theta(0.7, 0.0, n);
            let id = linalg::identity(n);
            for (a, b) in m.iter().zip(id.iter()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_t_a_theta_group_law() {
        let mut rng = Rng::new(5150);
        for n in 2..=4 {
            for _ in 0..50 {
                let theta = rng.range(-1.0, 1.0);
                let (t1, t2) = (rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
                let lhs = exp_t_a_theta(theta, t1 + t2, n);
                let rhs = linalg::mat_mul(
                    n,
                    &exp_t_a_theta(theta, t1, n),
                    &exp_t_a_theta(theta, t2, n),
                );
                for (a, b) in lhs.iter().zip(rhs.iter()) {
                    assert!((a - b).norm() < 1e-12, "group law at n={n}");
                }
            }
        }
    }

    #[test]
    fn in_out_examples() {
        // grazing entry: zero winding, identity matrix
        let spec = CuspMonodromySpec::parabolic(2, 0.4);
        let m = in_out_matrix(&spec, std::f64::consts::FRAC_PI_2).unwrap();
        let id = linalg::identity(2);
        for (a, b) in m.iter().zip(id.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // winding exactly 2 pi: one full application of exp(A_0)
        let spec = CuspMonodromySpec::parabolic(2, 0.0);
        let eta = (1.0 / std::f64::consts::PI).atan(); // cot(eta) = pi
        assert!((winding(eta) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let m = in_out_matrix(&spec, eta).unwrap();
        let expect = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (a, b) in m.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // hyperbolic lambda = 3 at eta = pi/4 (winding 2): norm >= 3
        let spec = CuspMonodromySpec::hyperbolic(2, 3.0, None);
        let m = in_out_matrix(&spec, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((linalg::operator_norm(2, &m) - 3.0).abs() < 1e-12);
        // radial entry rejected
        assert_eq!(in_out_matrix(&spec, 0.0).unwrap_err(), CuspError::Radial);
    }

    #[test]
    #[should_panic(expected = "lambda > 1")]
    fn degenerate_hyperbolic_rejected() {
        CuspMonodromySpec::hyperbolic(2, 1.0, None);
    }

    #[test]
    fn norm_is_theta_independent() {
        for eta in [0.1, 0.4, 1.0] {
            let a = log_plus_norm(&CuspMonodromySpec::parabolic(3, 0.0), eta).unwrap();
            let b = log_plus_norm(&CuspMonodromySpec::parabolic(3, 0.8), eta).unwrap();
            assert!((a - b).abs() < 1e-10, "theta changed the norm at eta={eta}");
        }
    }

    #[test]
    fn parabolic_integral_is_cauchy() {
        let spec = CuspMonodromySpec::parabolic(2, 0.3);
        let i15 = integrability_integral(&spec, 0.5f64.powi(15));
        let i16 = integrability_integral(&spec, 0.5f64.powi(16));
        let inc = (i16 - i15).abs();
        assert!(inc < 1e-3, "Cauchy increment {inc}");
        // and the increments shrink along the ladder
        let i8 = integrability_integral(&spec, 0.5f64.powi(8));
        let i9 = integrability_integral(&spec, 0.5f64.powi(9));
        assert!((i9 - i8).abs() > inc);
    }

    #[test]
    fn hyperbolic_integral_grows_affinely_in_log() {
        let spec = CuspMonodromySpec::hyperbolic(2, 3.0, None);
        let report = dichotomy_report(&spec);
        assert_eq!(report.verdict, DichotomyVerdict::Divergent);
        assert!(report.r_squared > 0.99, "r^2 = {}", report.r_squared);
        assert!(report.slope > 0.0);
        // measured slope against the cot-integral prediction 2 ln(lambda)
        let predicted = 2.0 * 3.0f64.ln();
        assert!(
            (report.slope - predicted).abs() / predicted < 0.05,
            "slope {} vs predicted {predicted}",
            report.slope
        );
    }

    #[test]
    fn parabolic_report_verdict() {
        let spec = CuspMonodromySpec::parabolic(2, 0.0);
        let report = dichotomy_report(&spec);
        assert_eq!(report.verdict, DichotomyVerdict::Integrable);
    }

    #[test]
    fn excursion_sampler_marginal_matches_cos_density() {
        let mut rng = Rng::new(11213);
        let n = 100_000;
        let mut etas: Vec<f64> = (0..n).map(|_| liouville_excursion_sample(&mut rng).1).collect();
        etas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // one-sample KS against CDF (1 + sin(eta)) / 2
        let mut d: f64 = 0.0;
        for (i, &e) in etas.iter().enumerate() {
            let cdf = (1.0 + e.sin()) / 2.0;
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs().max((hi - cdf).abs()));
        }
        let crit = 1.63 / (n as f64).sqrt();
        assert!(d < crit, "KS statistic {d} vs {crit}");
    }

    #[test]
    fn excursion_times_inside_proof_interval() {
        let mut rng = Rng::new(11214);
        for _ in 0..10_000 {
            let (_, eta, t) = liouville_excursion_sample(&mut rng);
            let a = winding(eta);
            let t_u = (1.0 + a * a / 2.0).acosh();
            assert!((0.0..=t_u).contains(&t));
            let s = t_u + 2.0 * eta.sin().abs().ln();
            assert!(
                s >= -2.0 * eta.cos() - 1e-12 && s <= 2.0 * eta.cos() + 1e-12,
                "excursion time outside the proof interval at eta = {eta}"
            );
        }
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let mut rng = Rng::new(11215);
        for spec in [
            CuspMonodromySpec::parabolic(2, 0.2),
            CuspMonodromySpec::hyperbolic(2, 3.0, None),
        ] {
            let eps = 0.01;
            let exact = integrability_integral(&spec, eps);
            let (mc, se) = integrability_integral_mc(&spec, eps, 200_000, &mut rng);
            assert!(
                (mc - exact).abs() < 3.0 * se + 1e-6,
                "MC {mc} vs quadrature {exact} (se {se})"
            );
        }
    }

    #[test]
    fn parabolic_norm_polynomially_bounded() {
        // |B(u)| <= K (1 + |a_u|^{n-1})
        let mut rng = Rng::new(11216);
        for n in 2..=4 {
            let spec = CuspMonodromySpec::parabolic(n, 0.5);
            let mut worst: f64 = 0.0;
            for _ in 0..10_000 {
                let (_, eta, _) = liouville_excursion_sample(&mut rng);
                let a = winding(eta).abs();
                let m = in_out_matrix(&spec, eta).unwrap();
                let ratio = linalg::operator_norm(n, &m) / (1.0 + a.powi(n as i32 - 1));
                worst = worst.max(ratio);
            }
            assert!(worst < 3.0, "parabolic norm ratio {worst} at n = {n}");
        }
    }

    #[test]
    fn hyperbolic_norm_bounded_below() {
        // log|B(u)| - (|a_u|/2) log(lambda) stays bounded below, also under
        // a nontrivial conjugator
        let conj = vec![c(1.0, 0.0), c(0.5, 0.3), c(0.0, 0.0), c(2.0, 0.0)];
        let mut rng = Rng::new(11217);
        for spec in [
            CuspMonodromySpec::hyperbolic(2, 3.0, None),
            CuspMonodromySpec::hyperbolic(2, 3.0, Some(conj)),
        ] {
            let mut lowest = f64::INFINITY;
            for _ in 0..10_000 {
                let (_, eta, _) = liouville_excursion_sample(&mut rng);
                let a = winding(eta).abs();
                let m = in_out_matrix(&spec, eta).unwrap();
                let gap = linalg::operator_norm(2, &m).ln() - (a / 2.0) * 3.0f64.ln();
                lowest = lowest.min(gap);
            }
            assert!(lowest > -5.0, "lower bound violated: {lowest}");
        }
    }
}
