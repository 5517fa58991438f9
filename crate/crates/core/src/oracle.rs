//! Brute-force numerics: truncated Jacobi theta series, the harmonic
//! oscillator propagator applied to an ideal GKP comb, and the finitely
//! squeezed GKP wavefunction. Used to cross-check the analytic combs by
//! locating peaks on a grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::LinearQuadratureForm;
use crate::classify::MembershipVerdict;
use crate::par::Exec;
use crate::SQRT_PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("theta series diverges: Im(tau) = {0} is not positive")]
    Divergent(f64),
    #[error("truncation must be at least 1")]
    ZeroTruncation,
    #[error("sin(theta) vanishes; the rotation is the identity up to parity, use the identity path")]
    UseIdentityPath,
    #[error("invalid parameter: {0}")]
    BadParam(&'static str),
    #[error("empty grid")]
    EmptyGrid,
    #[error("grid is not uniformly spaced and increasing")]
    NonUniformGrid,
    #[error("grid values must be finite and nonnegative")]
    BadValues,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("found {0} peaks, need at least 2 to measure a gap")]
    TooFewPeaks(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub zeta: Complex64,
    pub tau: Complex64,
    pub truncation: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    /// Bound on `|value - theta(zeta; tau)|`: the whole omitted tail plus a
    /// floating-point rounding allowance.
    pub error_bound: f64,
}

/// Truncation floor used by [`theta_truncation`].
pub const MIN_TRUNCATION: usize = 50;

// |exp(pi i m^2 tau + 2 pi i m zeta)| in log form
fn log_mag(m: f64, tau: Complex64, zeta: Complex64) -> f64 {
    -PI * m * m * tau.im - 2.0 * PI * m * zeta.im
}

fn term(m: i64, tau: Complex64, zeta: Complex64) -> Complex64 {
    let mf = m as f64;
    // reduce the phase mod 1 before scaling by 2 pi
    let half_sq = ((m as i128 * m as i128) as f64 * tau.re / 2.0).rem_euclid(1.0);
    let lin = (mf * zeta.re).rem_euclid(1.0);
    Complex64::from_polar(log_mag(mf, tau, zeta).exp(), 2.0 * PI * (half_sq + lin))
}

// Sum of |T(m)| over the omitted m on one side (dir = +1 or -1).
fn tail(n: usize, dir: f64, tau: Complex64, zeta: Complex64) -> f64 {
    let mut k = n as f64 + 1.0;
    let mut acc = 0.0;
    for _ in 0..10_000_000 {
        let cur = log_mag(dir * k, tau, zeta);
        let next = log_mag(dir * (k + 1.0), tau, zeta);
        acc += cur.exp();
        let r = (next - cur).exp();
        if r < 1.0 {
            // ratios only shrink from here on
            return acc + cur.exp() * r / (1.0 - r);
        }
        k += 1.0;
    }
    f64::INFINITY
}

/// `sum_{m=-N..N} exp(pi i m^2 tau) exp(2 pi i m zeta)`.
pub fn theta_eval(p: &ThetaParams) -> Result<ThetaValue, OracleError> {
    if !(p.tau.im > 0.0) {
        return Err(OracleError::Divergent(p.tau.im));
    }
    if p.truncation == 0 {
        return Err(OracleError::ZeroTruncation);
    }
    if !(p.zeta.re.is_finite() && p.zeta.im.is_finite() && p.tau.re.is_finite() && p.tau.im.is_finite()) {
        return Err(OracleError::BadParam("non-finite theta argument"));
    }
    let n = p.truncation as i64;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut abs_sum = 1.0;
    for m in 1..=n {
        let pair = term(m, p.tau, p.zeta) + term(-m, p.tau, p.zeta);
        abs_sum += log_mag(m as f64, p.tau, p.zeta).exp() + log_mag(-(m as f64), p.tau, p.zeta).exp();
        sum += pair;
    }
    let omitted = tail(p.truncation, 1.0, p.tau, p.zeta) + tail(p.truncation, -1.0, p.tau, p.zeta);
    let rounding = 8.0 * (2 * n + 1) as f64 * f64::EPSILON * abs_sum;
    Ok(ThetaValue { value: sum, error_bound: omitted + rounding })
}

/// Smallest truncation (at least [`MIN_TRUNCATION`]) whose omitted terms are
/// all below `eps` times the largest term, for every `zeta` with
/// `|Im zeta| <= zeta_im_max`.
pub fn theta_truncation(tau: Complex64, zeta_im_max: f64, eps: f64) -> usize {
    if !(tau.im > 0.0) {
        return MIN_TRUNCATION;
    }
    let centre = zeta_im_max.abs() / tau.im;
    let width = ((1.0 / eps).ln().max(0.0) / (PI * tau.im)).sqrt();
    let need = (centre + width).ceil() as usize + 1;
    need.max(MIN_TRUNCATION)
}

/// `K(x, x'; theta)`, the harmonic-oscillator propagator.
pub fn propagator(x: f64, xp: f64, theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let pref = Complex64::new(0.0, 2.0 * PI * s).sqrt().inv();
    let phase = ((x * x + xp * xp) * c - 2.0 * x * xp) / (2.0 * s);
    pref * Complex64::from_polar(1.0, phase)
}

const SIN_ZERO: f64 = 1e-12;

/// Ideal GKP comb after `R(theta)` then `S(s)`, as the truncated sum
/// `sum_{m=-N..N} K(x/s, 2 m sqrt(pi); theta)`.
///
/// The theta-function form of this state has real `tau`, where the series
/// does not converge, so the propagator sum is what gets evaluated.
pub fn ideal_rotated_wavefunction(x: f64, theta: f64, s: f64, n: usize) -> Result<Complex64, OracleError> {
    if s == 0.0 || !s.is_finite() {
        return Err(OracleError::BadParam("squeezing must be finite and nonzero"));
    }
    if n == 0 {
        return Err(OracleError::ZeroTruncation);
    }
    if theta.sin().abs() < SIN_ZERO {
        return Err(OracleError::UseIdentityPath);
    }
    let n = n as i64;
    let y = x / s;
    Ok((-n..=n).map(|m| propagator(y, 2.0 * m as f64 * SQRT_PI, theta)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealisticGkpParams {
    pub delta_gkp: f64,
    pub s: f64,
    pub theta: f64,
    pub eta: Complex64,
    pub tau: Complex64,
    pub gamma: Complex64,
}

/// Constants of the finitely squeezed wavefunction `e^{x^2 gamma} theta(x eta; tau)`.
pub fn realistic_params(delta_gkp: f64, s: f64, theta: f64) -> Result<RealisticGkpParams, OracleError> {
    if !(delta_gkp > 0.0) || !delta_gkp.is_finite() {
        return Err(OracleError::BadParam("delta_gkp must be positive"));
    }
    if s == 0.0 || !s.is_finite() {
        return Err(OracleError::BadParam("squeezing must be finite and nonzero"));
    }
    let (sin, cos) = theta.sin_cos();
    if sin.abs() < SIN_ZERO {
        return Err(OracleError::UseIdentityPath);
    }
    let i = Complex64::i();
    let (csc, cot) = (1.0 / sin, cos / sin);
    let d2 = delta_gkp * delta_gkp;
    let d4 = d2 * d2;
    let eta = Complex64::from(-csc) / (SQRT_PI * (s + d4 * s - i * d2 * s * cot));
    let tau = 2.0 * i * (d2 - i * cot) / (1.0 + d4 - i * d2 * cot);
    let gamma = i * (i * d2 + (1.0 + d4) * cot) / (2.0 * s * s * (1.0 + d4 - i * d2 * cot));
    if !(tau.im > 0.0) {
        return Err(OracleError::Divergent(tau.im));
    }
    Ok(RealisticGkpParams { delta_gkp, s, theta, eta, tau, gamma })
}

/// `(eta, tau, gamma)` in the infinite-squeezing limit.
pub fn realistic_limits(s: f64, theta: f64) -> (Complex64, Complex64, Complex64) {
    let (sin, cos) = theta.sin_cos();
    let cot = cos / sin;
    (
        Complex64::from(-1.0 / (sin * SQRT_PI * s)),
        Complex64::from(2.0 * cot),
        Complex64::new(0.0, cot / (2.0 * s * s)),
    )
}

pub fn realistic_wavefunction(x: f64, p: &RealisticGkpParams, n: usize) -> Result<Complex64, OracleError> {
    let t = theta_eval(&ThetaParams { zeta: x * p.eta, tau: p.tau, truncation: n })?;
    Ok((x * x * p.gamma).exp() * t.value)
}

/// Finitely squeezed GKP state with no rotation, scaled by `s`:
/// `e^{-(x/s)^2 delta^2 / 2} theta((x/s) / (2 sqrt(pi)); i delta^2 / 2)`.
pub fn realistic_identity_wavefunction(x: f64, delta_gkp: f64, s: f64, n: usize) -> Result<Complex64, OracleError> {
    if !(delta_gkp > 0.0) {
        return Err(OracleError::BadParam("delta_gkp must be positive"));
    }
    if s == 0.0 || !s.is_finite() {
        return Err(OracleError::BadParam("squeezing must be finite and nonzero"));
    }
    let y = x / s;
    let d2 = delta_gkp * delta_gkp;
    let t = theta_eval(&ThetaParams {
        zeta: Complex64::from(y / (2.0 * SQRT_PI)),
        tau: Complex64::new(0.0, d2 / 2.0),
        truncation: n,
    })?;
    Ok((-y * y * d2 / 2.0).exp() * t.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPdf {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridPdf {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self, OracleError> {
        if xs.len() != values.len() {
            return Err(OracleError::BadParam("xs and values differ in length"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(OracleError::BadValues);
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OracleError::NonUniformGrid);
        }
        Ok(GridPdf { xs, values })
    }

    /// Evaluates `f` at `lo, lo + step, ...` up to `hi`.
    pub fn sample(lo: f64, hi: f64, step: f64, exec: Exec, f: impl Fn(f64) -> f64 + Sync + Send) -> Result<Self, OracleError> {
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(OracleError::BadParam("grid bounds"));
        }
        let len = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        let xs: Vec<f64> = (0..len).map(|i| lo + i as f64 * step).collect();
        let values = exec.map_slice(&xs, |&x| f(x));
        GridPdf::new(xs, values)
    }

    pub fn step(&self) -> Option<f64> {
        (self.xs.len() >= 2).then(|| self.xs[1] - self.xs[0])
    }
}

/// Local maxima above `min_prominence * max(values)`, refined by fitting a
/// parabola through each maximum and its two neighbours.
pub fn numeric_peaks(g: &GridPdf, min_prominence: f64) -> Result<Vec<f64>, OracleError> {
    let n = g.xs.len();
    if n == 0 {
        return Err(OracleError::EmptyGrid);
    }
    if n < 3 {
        return Ok(vec![]);
    }
    let h = g.xs[1] - g.xs[0];
    let span = g.xs[n - 1] - g.xs[0];
    if g.xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h.max(span / n as f64)) {
        return Err(OracleError::NonUniformGrid);
    }
    let vmax = g.values.iter().copied().fold(0.0, f64::max);
    let thr = min_prominence * vmax;
    let v = &g.values;
    let mut out = vec![];
    for i in 1..n - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > thr {
            let denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
            let shift = if denom < 0.0 { 0.5 * (v[i - 1] - v[i + 1]) / denom } else { 0.0 };
            out.push(g.xs[i] + shift.clamp(-0.5, 0.5) * h);
        }
    }
    Ok(out)
}

pub fn gaps(peaks: &[f64]) -> Vec<f64> {
    peaks.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareConfig {
    pub delta_gkp: f64,
    pub grid_step: f64,
    pub min_prominence: f64,
    /// Window half-width; `None` picks `max(4 sqrt(pi), 4 spacing)`.
    pub half_width: Option<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { delta_gkp: 0.02, grid_step: 1e-3, min_prominence: 0.1, half_width: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub analytic_spacing: f64,
    pub peaks: Vec<f64>,
    pub numeric_gaps: Vec<f64>,
    pub max_relative_error: f64,
}

/// `|psi|^2` of the finitely squeezed state whose position quadrature is
/// `a q + b p`, on a grid centred at 0.
pub fn realistic_grid(a: f64, b: f64, delta_gkp: f64, half_width: f64, step: f64, exec: Exec) -> Result<GridPdf, OracleError> {
    let s = a.hypot(b);
    if s == 0.0 {
        return Err(OracleError::BadParam("zero quadrature"));
    }
    if b == 0.0 {
        let n = theta_truncation(Complex64::new(0.0, delta_gkp * delta_gkp / 2.0), 0.0, 1e-16);
        GridPdf::sample(-half_width, half_width, step, exec, |x| {
            realistic_identity_wavefunction(x, delta_gkp, a, n).map(|z| z.norm_sqr()).unwrap_or(f64::NAN)
        })
    } else {
        let p = realistic_params(delta_gkp, s, (-b).atan2(a))?;
        let n = theta_truncation(p.tau, half_width * p.eta.im.abs(), 1e-16);
        GridPdf::sample(-half_width, half_width, step, exec, |x| {
            realistic_wavefunction(x, &p, n).map(|z| z.norm_sqr()).unwrap_or(f64::NAN)
        })
    }
}

/// Peak gaps of the finitely squeezed state against the analytic comb step.
///
/// Only forms with exactly one contributing mode are covered: with several,
/// the outcome density is an integral over products of theta functions
/// with no closed form.
pub fn compare_form(form: &LinearQuadratureForm, verdict: &MembershipVerdict, cfg: &CompareConfig, exec: Exec) -> Result<ComparisonReport, OracleError> {
    if !verdict.accepted {
        return Err(OracleError::Unsupported(format!("circuit not simulatable: {}", verdict.reason.clone().unwrap_or_default())));
    }
    let live: Vec<usize> = (0..form.n()).filter(|&i| form.a()[i] != 0.0 || form.b()[i] != 0.0).collect();
    if live.len() != 1 {
        return Err(OracleError::Unsupported(format!(
            "{} modes contribute to the measured quadrature; the finite-squeezing oracle covers exactly one",
            live.len()
        )));
    }
    let i = live[0];
    let analytic = verdict.per_mode[i].spacing;
    let hw = cfg.half_width.unwrap_or((4.0 * SQRT_PI).max(4.0 * analytic));
    let grid = realistic_grid(form.a()[i], form.b()[i], cfg.delta_gkp, hw, cfg.grid_step, exec)?;
    // the displacement only shifts the pattern
    let peaks: Vec<f64> = numeric_peaks(&grid, cfg.min_prominence)?.into_iter().map(|x| x + form.c()).collect();
    if peaks.len() < 2 {
        return Err(OracleError::TooFewPeaks(peaks.len()));
    }
    let numeric_gaps = gaps(&peaks);
    let max_relative_error = numeric_gaps.iter().map(|g| (g - analytic).abs() / analytic).fold(0.0, f64::max);
    Ok(ComparisonReport { analytic_spacing: analytic, peaks, numeric_gaps, max_relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(zeta: Complex64, tau: Complex64, n: usize) -> ThetaValue {
        theta_eval(&ThetaParams { zeta, tau, truncation: n }).unwrap()
    }

    #[test]
    fn theta_examples() {
        let i = Complex64::i();
        let v = th(Complex64::from(0.0), i, 10);
        assert!((v.value.re - 1.0864348).abs() < 1e-7 && v.value.im.abs() < 1e-12);
        // closed form: pi^{1/4} / Gamma(3/4)
        assert!((v.value.re - 1.086_434_811_213_308).abs() < 1e-14);
        let v = th(Complex64::from(0.5), i, 10);
        assert!((v.value.re - 0.9135791).abs() < 1e-7);
        assert!(v.error_bound < 1e-12);
        assert_eq!(theta_eval(&ThetaParams { zeta: 0.0.into(), tau: Complex64::new(1.0, 0.0), truncation: 5 }), Err(OracleError::Divergent(0.0)));
        assert_eq!(theta_eval(&ThetaParams { zeta: 0.0.into(), tau: i, truncation: 0 }), Err(OracleError::ZeroTruncation));
    }

    #[test]
    fn theta_periodic() {
        for k in 0..20 {
            let z = Complex64::new(-1.3 + 0.17 * k as f64, 0.05 * (k % 5) as f64 - 0.1);
            let t = Complex64::new(0.3 * k as f64 - 2.0, 0.2 + 0.1 * k as f64);
            let a = th(z, t, 30).value;
            let b = th(z + 1.0, t, 30).value;
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn theta_tail_bound() {
        let z = Complex64::new(0.3, 0.2);
        for t in [Complex64::new(0.4, 0.01), Complex64::new(-1.0, 0.05), Complex64::new(0.0, 1.0)] {
            for n in [1, 3, 10, 40] {
                let a = th(z, t, n);
                let b = th(z, t, 2 * n);
                assert!((a.value - b.value).norm() <= a.error_bound, "{t} {n}");
            }
        }
    }

    #[test]
    fn truncation_choice() {
        let t = Complex64::new(0.0, 0.0008);
        let n = theta_truncation(t, 0.0, 1e-16);
        assert!(n > 100 && n < 200, "{n}");
        assert_eq!(theta_truncation(Complex64::i(), 0.0, 1e-16), MIN_TRUNCATION);
    }

    #[test]
    fn ideal_peaks_fourier() {
        let g = GridPdf::sample(-4.0 * SQRT_PI, 4.0 * SQRT_PI, 1e-3, Exec::default(), |x| {
            ideal_rotated_wavefunction(x, PI / 2.0, 1.0, 50).unwrap().norm_sqr()
        })
        .unwrap();
        let peaks = numeric_peaks(&g, 0.1).unwrap();
        for m in -3i32..=3 {
            let target = m as f64 * SQRT_PI;
            assert!(peaks.iter().any(|p| (p - target).abs() <= 1e-3), "m = {m}");
        }
        let gs = gaps(&peaks);
        assert!(gs.iter().all(|g| (g - SQRT_PI).abs() < 2e-3));
        assert_eq!(ideal_rotated_wavefunction(0.1, PI, 1.0, 5), Err(OracleError::UseIdentityPath));
        assert_eq!(ideal_rotated_wavefunction(0.1, 0.0, 1.0, 5), Err(OracleError::UseIdentityPath));
    }

    #[test]
    fn ideal_truncation_linear() {
        let (x, t) = (0.37, 1.1);
        let a = ideal_rotated_wavefunction(x, t, 1.0, 7).unwrap();
        let b = ideal_rotated_wavefunction(x, t, 1.0, 8).unwrap();
        let added = propagator(x, 16.0 * SQRT_PI, t) + propagator(x, -16.0 * SQRT_PI, t);
        assert!((b - a - added).norm() < 1e-12);
    }

    #[test]
    fn realistic_examples() {
        let p = realistic_params(0.1, 1.0, PI / 2.0).unwrap();
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-15;
        assert!(close(p.eta, Complex64::from(-1.0 / (SQRT_PI * 1.0001))));
        assert!(close(p.tau, Complex64::new(0.0, 0.02 / 1.0001)));
        assert!(close(p.gamma, Complex64::from(-0.01 / (2.0 * 1.0001))));
        assert!(realistic_params(0.05, 1.0, PI / 4.0).unwrap().tau.im > 0.0);
        assert_eq!(realistic_params(0.1, 1.0, 0.0), Err(OracleError::UseIdentityPath));
        assert!(realistic_params(0.0, 1.0, 1.0).is_err());
        assert!(realistic_params(0.1, 0.0, 1.0).is_err());
        // x = 0 leaves only theta(0; tau)
        let z = realistic_wavefunction(0.0, &p, 200).unwrap();
        let t = th(0.0.into(), p.tau, 200).value;
        assert_eq!(z, t);
    }

    #[test]
    fn realistic_limit() {
        for theta in [PI / 4.0, PI / 2.0, (3.0f64).atan(), 2.5] {
            let p = realistic_params(1e-6, 1.3, theta).unwrap();
            let (e, t, g) = realistic_limits(1.3, theta);
            assert!((p.eta - e).norm() <= 1e-9 * e.norm());
            assert!((p.tau - t).norm() <= 1e-9 * t.norm().max(1.0));
            assert!((p.gamma - g).norm() <= 1e-9 * g.norm().max(1.0));
        }
    }

    #[test]
    fn realistic_fourier_symmetric_and_periodic() {
        let p = realistic_params(0.02, 1.0, PI / 2.0).unwrap();
        let n = theta_truncation(p.tau, 0.0, 1e-16);
        for k in 0..50 {
            let x = 0.137 * k as f64;
            let a = realistic_wavefunction(x, &p, n).unwrap().norm();
            let b = realistic_wavefunction(-x, &p, n).unwrap().norm();
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        let g = realistic_grid(0.0, -1.0, 0.02, 4.0 * SQRT_PI, 1e-3, Exec::default()).unwrap();
        let peaks = numeric_peaks(&g, 0.1).unwrap();
        assert!(peaks.len() >= 7);
        for gap in gaps(&peaks) {
            assert!((gap - SQRT_PI).abs() / SQRT_PI < 0.02);
        }
    }

    #[test]
    fn identity_path_peaks() {
        let g = realistic_grid(1.0, 0.0, 0.02, 8.0 * SQRT_PI, 1e-3, Exec::default()).unwrap();
        let peaks = numeric_peaks(&g, 0.1).unwrap();
        for p in &peaks {
            let r = p / (2.0 * SQRT_PI);
            assert!((r - r.round()).abs() * 2.0 * SQRT_PI < 2e-3, "{p}");
        }
        assert!(peaks.len() >= 7);
    }

    #[test]
    fn peaks_plumbing() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let tri: Vec<f64> = xs.iter().map(|x| 1.0 - (x - 1.0f64).abs()).collect();
        let p = numeric_peaks(&GridPdf::new(xs.clone(), tri).unwrap(), 0.1).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(numeric_peaks(&GridPdf::new(xs.clone(), vec![0.5; 21]).unwrap(), 0.1).unwrap().is_empty());
        assert_eq!(numeric_peaks(&GridPdf::new(vec![], vec![]).unwrap(), 0.1), Err(OracleError::EmptyGrid));
        // off-grid parabola vertex is recovered exactly
        let para: Vec<f64> = xs.iter().map(|x| 5.0 - (x - 1.03) * (x - 1.03)).collect();
        let p = numeric_peaks(&GridPdf::new(xs, para).unwrap(), 0.1).unwrap();
        assert!((p[0] - 1.03).abs() < 1e-12);
        assert!(GridPdf::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(GridPdf::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        let uneven = GridPdf::new(vec![0.0, 0.1, 0.3, 0.4], vec![0.0, 1.0, 0.5, 0.0]).unwrap();
        assert_eq!(numeric_peaks(&uneven, 0.1), Err(OracleError::NonUniformGrid));
    }
}
