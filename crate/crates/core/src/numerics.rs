//! Shared numerical infrastructure: adaptive quadrature, truncated Gaussian
//! expectations, seeded Gaussian streams, compensated summation, and the
//! log-log regression used for the high-temperature power law.
//!
//! The quadrature core is a 7-15 Gauss-Kronrod panel driven by worst-first
//! interval bisection, with the classic error rescaling so the reported
//! bound stays honest on rough integrands. Improper Gaussian integrals are
//! truncated to a window of +-k standard deviations that is doubled until
//! the integrand-weighted tail estimate drops below `tail_mass_tol`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::real::Real;

/// Tolerances and budgets for the adaptive quadrature.
///
/// Defaults are tuned for `f64`; instantiations at `f32` should relax the
/// tolerances to something above that type's epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<R> {
    /// Absolute error target.
    pub abs_tol: R,
    /// Relative error target; the effective target is
    /// max(abs_tol, rel_tol * |value|).
    pub rel_tol: R,
    /// Maximum number of panels the bisection may create.
    pub max_subdivisions: usize,
    /// Improper integrals extend their window until the weighted tail
    /// estimate falls below this probability mass.
    pub tail_mass_tol: R,
}

impl<R: Real> Default for QuadratureOptions<R> {
    fn default() -> Self {
        Self {
            abs_tol: R::lit(1e-12),
            rel_tol: R::lit(1e-12),
            max_subdivisions: 256,
            tail_mass_tol: R::lit(1e-12),
        }
    }
}

impl<R: Real> QuadratureOptions<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > R::zero()) || !(self.rel_tol > R::zero()) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if !(self.tail_mass_tol > R::zero()) {
            return Err(Error::invalid("tail_mass_tol must be positive"));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::invalid("max_subdivisions must be at least 8"));
        }
        Ok(())
    }
}

/// Least-squares line through (log x, log y) points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<R> {
    pub slope: R,
    pub intercept: R,
    /// Coefficient of determination, clamped into [0, 1].
    pub r_squared: R,
}

/// Compensated (Kahan) accumulator.
///
/// Used wherever a sum must not depend on how work was chunked: quadrature
/// totals and Monte Carlo reductions both funnel through this in a fixed
/// order so results are reproducible to the bit.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<R> {
    sum: R,
    compensation: R,
}

impl<R: Real> KahanSum<R> {
    pub fn new() -> Self {
        Self {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }

    pub fn add(&mut self, term: R) {
        let y = term - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> R {
        self.sum
    }
}

impl<R: Real> Default for KahanSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf<R: Real>(z: R) -> R {
    R::lit(0.5) * (-z / R::SQRT_2()).erfc()
}

// 15-point Kronrod abscissae on [0, 1] and the matching weights, with the
// embedded 7-point Gauss weights. Values are the standard ones.
fn kronrod_nodes<R: Real>() -> ([R; 8], [R; 8], [R; 4]) {
    let xgk = [
        R::lit(0.991_455_371_120_812_6),
        R::lit(0.949_107_912_342_758_5),
        R::lit(0.864_864_423_359_769_1),
        R::lit(0.741_531_185_599_394_5),
        R::lit(0.586_087_235_467_691_1),
        R::lit(0.405_845_151_377_397_2),
        R::lit(0.207_784_955_007_898_5),
        R::lit(0.0),
    ];
    let wgk = [
        R::lit(0.022_935_322_010_529_22),
        R::lit(0.063_092_092_629_978_55),
        R::lit(0.104_790_010_322_250_18),
        R::lit(0.140_653_259_715_525_92),
        R::lit(0.169_004_726_639_267_9),
        R::lit(0.190_350_578_064_785_4),
        R::lit(0.204_432_940_075_298_9),
        R::lit(0.209_482_141_084_727_83),
    ];
    let wg = [
        R::lit(0.129_484_966_168_869_7),
        R::lit(0.279_705_391_489_276_64),
        R::lit(0.381_830_050_505_118_9),
        R::lit(0.417_959_183_673_469_4),
    ];
    (xgk, wgk, wg)
}

#[derive(Debug, Clone, Copy)]
struct Panel<R> {
    a: R,
    b: R,
    value: R,
    error: R,
}

impl<R: Real> Panel<R> {
    fn new<F: Fn(R) -> R>(f: &F, a: R, b: R) -> Self {
        let (xgk, wgk, wg) = kronrod_nodes::<R>();
        let half = R::lit(0.5);
        let centr = half * (a + b);
        let hlgth = half * (b - a);

        let fc = f(centr);
        let mut resg = wg[3] * fc;
        let mut resk = wgk[7] * fc;
        let mut resabs = resk.abs();
        let mut fv1 = [R::zero(); 7];
        let mut fv2 = [R::zero(); 7];

        for j in 0..3 {
            let jtw = 2 * j + 1;
            let absc = hlgth * xgk[jtw];
            let f1 = f(centr - absc);
            let f2 = f(centr + absc);
            fv1[jtw] = f1;
            fv2[jtw] = f2;
            let fsum = f1 + f2;
            resg = resg + wg[j] * fsum;
            resk = resk + wgk[jtw] * fsum;
            resabs = resabs + wgk[jtw] * (f1.abs() + f2.abs());
        }
        for j in 0..4 {
            let jtwm1 = 2 * j;
            let absc = hlgth * xgk[jtwm1];
            let f1 = f(centr - absc);
            let f2 = f(centr + absc);
            fv1[jtwm1] = f1;
            fv2[jtwm1] = f2;
            let fsum = f1 + f2;
            resk = resk + wgk[jtwm1] * fsum;
            resabs = resabs + wgk[jtwm1] * (f1.abs() + f2.abs());
        }

        let reskh = resk * half;
        let mut resasc = wgk[7] * (fc - reskh).abs();
        for j in 0..7 {
            resasc = resasc + wgk[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        }

        let value = resk * hlgth;
        let resabs = resabs * hlgth.abs();
        let resasc = resasc * hlgth.abs();
        let mut error = ((resk - resg) * hlgth).abs();
        if resasc != R::zero() && error != R::zero() {
            // Classic rescaling: (200 err / resasc)^1.5, capped at 1.
            let ratio = R::lit(200.0) * error / resasc;
            let scaled = (ratio * ratio.sqrt()).min(R::one());
            error = resasc * scaled;
        }
        let fifty_eps = R::lit(50.0) * R::epsilon();
        if resabs > R::min_positive_value() / fifty_eps {
            error = error.max(fifty_eps * resabs);
        }

        Self { a, b, value, error }
    }
}

/// Adaptive quadrature of `f` over the finite interval [a, b].
///
/// Returns (value, error_bound). The panel with the largest error estimate
/// is bisected until the combined bound meets the tolerance or the
/// subdivision budget runs out, which is reported as non-convergence.
pub fn adaptive_quadrature<R: Real, F: Fn(R) -> R>(
    f: F,
    a: R,
    b: R,
    opts: &QuadratureOptions<R>,
) -> Result<(R, R)> {
    opts.validate()?;
    if !(a < b) {
        return Err(Error::invalid(format!(
            "quadrature interval must satisfy a < b, got [{}, {}]",
            a.as_f64(),
            b.as_f64()
        )));
    }

    let mut panels = vec![Panel::new(&f, a, b)];
    loop {
        let mut value_sum = KahanSum::new();
        let mut error_sum = KahanSum::new();
        for p in &panels {
            value_sum.add(p.value);
            error_sum.add(p.error);
        }
        let value = value_sum.value();
        let error = error_sum.value();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok((value, error));
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(Error::QuadratureNoConvergence {
                value: value.as_f64(),
                error_bound: error.as_f64(),
                subdivisions: panels.len(),
            });
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| {
                p.error
                    .partial_cmp(&q.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = R::lit(0.5) * (pa + pb);
        if !(pa < mid && mid < pb) {
            // Interval width exhausted at this precision.
            return Err(Error::QuadratureNoConvergence {
                value: value.as_f64(),
                error_bound: error.as_f64(),
                subdivisions: panels.len(),
            });
        }
        panels[worst] = Panel::new(&f, pa, mid);
        panels.push(Panel::new(&f, mid, pb));
    }
}

/// Expectation of `g` under a normal law restricted to [lower_cutoff, inf).
///
/// Computes the unnormalized integral of g(x) N(x; mean, variance) from the
/// cutoff upward; no renormalization by the retained mass is applied here.
/// Pass `R::neg_infinity()` for an unrestricted expectation. Returns
/// (value, error_bound, truncated_mass) where truncated_mass is the Gaussian
/// probability below the cutoff.
///
/// The improper upper limit is handled by integrating over
/// [mean - k sigma, mean + k sigma] (clipped at the cutoff), with k doubled
/// from 8 until the tail estimate |g| * tail-mass at both window edges drops
/// below `opts.tail_mass_tol`. That estimate is added to the error bound.
pub fn gaussian_expectation<R: Real, F: Fn(R) -> R>(
    g: F,
    mean: R,
    variance: R,
    lower_cutoff: R,
    opts: &QuadratureOptions<R>,
) -> Result<(R, R, R)> {
    if !(variance > R::zero()) {
        return Err(Error::invalid(format!(
            "variance must be positive, got {}",
            variance.as_f64()
        )));
    }
    let sigma = variance.sqrt();
    let norm = R::TAU().sqrt() * sigma;
    let half = R::lit(0.5);
    let pdf = |x: R| {
        let z = (x - mean) / sigma;
        (-half * z * z).exp() / norm
    };
    let truncated_mass = if lower_cutoff == R::neg_infinity() {
        R::zero()
    } else {
        normal_cdf((lower_cutoff - mean) / sigma)
    };

    let mut k = R::lit(8.0);
    let k_max = R::lit(1024.0);
    loop {
        let lo = (mean - k * sigma).max(lower_cutoff);
        let hi = mean + k * sigma;
        if hi > lo {
            let upper_tail = g(hi).abs() * normal_cdf(-(hi - mean) / sigma);
            let lower_tail = if lo > lower_cutoff {
                let below_window = normal_cdf((lo - mean) / sigma);
                g(lo).abs() * (below_window - truncated_mass).max(R::zero())
            } else {
                R::zero()
            };
            let tail = upper_tail + lower_tail;
            if tail < opts.tail_mass_tol || k >= k_max {
                let (value, error) = adaptive_quadrature(|x| g(x) * pdf(x), lo, hi, opts)?;
                return Ok((value, error + tail, truncated_mass));
            }
        }
        if k >= k_max {
            // Window ran into the cutoff even at the widest extension;
            // everything is truncated away.
            return Ok((R::zero(), R::zero(), truncated_mass));
        }
        k = k + k;
    }
}

/// Deterministic Gaussian stream: draw number `i` is a pure function of
/// (seed, i), so the stream can be split across threads by index without
/// changing any value.
#[derive(Debug, Clone)]
pub struct GaussianSampler<R> {
    seed: u64,
    mean: R,
    sigma: R,
    next_index: u64,
}

impl<R: Real> GaussianSampler<R> {
    pub fn new(seed: u64, mean: R, variance: R) -> Result<Self> {
        if !(variance >= R::zero()) {
            return Err(Error::invalid(format!(
                "variance must be non-negative, got {}",
                variance.as_f64()
            )));
        }
        Ok(Self {
            seed,
            mean,
            sigma: variance.sqrt(),
            next_index: 0,
        })
    }

    /// The draw at a fixed stream position. Zero variance short-circuits to
    /// the mean so a degenerate spec stays exact.
    pub fn draw_at(&self, index: u64) -> R {
        if self.sigma == R::zero() {
            return self.mean;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        self.mean + self.sigma * R::standard_normal(&mut rng)
    }
}

impl<R: Real> Iterator for GaussianSampler<R> {
    type Item = R;

    fn next(&mut self) -> Option<R> {
        let draw = self.draw_at(self.next_index);
        self.next_index += 1;
        Some(draw)
    }
}

/// Ordinary least squares on (log x, log y).
///
/// Requires at least three points with positive coordinates. Returns slope,
/// intercept (in log space), and r^2 clamped into [0, 1]; a constant input
/// (zero total variance) reports r^2 = 1.
pub fn loglog_slope_fit<R: Real>(points: &[(R, R)]) -> Result<FitResult<R>> {
    if points.len() < 3 {
        return Err(Error::invalid("log-log fit needs at least 3 points"));
    }
    for &(x, y) in points {
        if !(x > R::zero()) || !(y > R::zero()) {
            return Err(Error::invalid(format!(
                "log-log fit needs positive coordinates, got ({}, {})",
                x.as_f64(),
                y.as_f64()
            )));
        }
    }
    let n = R::from_usize(points.len()).expect("point count fits in scalar");
    let mut sx = KahanSum::new();
    let mut sy = KahanSum::new();
    for &(x, y) in points {
        sx.add(x.ln());
        sy.add(y.ln());
    }
    let mean_x = sx.value() / n;
    let mean_y = sy.value() / n;

    let mut sxx = KahanSum::new();
    let mut sxy = KahanSum::new();
    for &(x, y) in points {
        let dx = x.ln() - mean_x;
        let dy = y.ln() - mean_y;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
    }
    if sxx.value() == R::zero() {
        return Err(Error::invalid("log-log fit abscissae are all equal"));
    }
    let slope = sxy.value() / sxx.value();
    let intercept = mean_y - slope * mean_x;

    let mut ss_res = KahanSum::new();
    let mut ss_tot = KahanSum::new();
    for &(x, y) in points {
        let predicted = intercept + slope * x.ln();
        let residual = y.ln() - predicted;
        let centered = y.ln() - mean_y;
        ss_res.add(residual * residual);
        ss_tot.add(centered * centered);
    }
    let r_squared = if ss_tot.value() == R::zero() {
        R::one()
    } else {
        (R::one() - ss_res.value() / ss_tot.value())
            .max(R::zero())
            .min(R::one())
    };

    Ok(FitResult {
        slope,
        intercept,
        r_squared,
    })
}

/// Temperature at which a fitted power law crosses a constant plateau:
/// solves plateau = exp(intercept) * T^slope.
pub fn plateau_crossover<R: Real>(plateau: R, fit: &FitResult<R>) -> Result<R> {
    if !(plateau > R::zero()) {
        return Err(Error::invalid("plateau level must be positive"));
    }
    if fit.slope == R::zero() {
        return Err(Error::invalid("zero slope never crosses the plateau"));
    }
    Ok(((plateau.ln() - fit.intercept) / fit.slope).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn opts() -> QuadratureOptions<f64> {
        QuadratureOptions::default()
    }

    #[test]
    fn quadrature_polynomial() {
        let (v, e) = adaptive_quadrature(|x: f64| x * x, 0.0, 1.0, &opts()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        assert!(e >= 0.0);
    }

    #[test]
    fn quadrature_sine() {
        let (v, _) = adaptive_quadrature(|x: f64| x.sin(), 0.0, PI, &opts()).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_damped_radius_kernel() {
        // Antiderivative check for the sqrt(1 - k Phi) kernel of the damped
        // cycle: integral over [0, pi] is (2 / 3k) (1 - (1 - k pi)^{3/2}).
        let k = 0.1;
        let (v, _) = adaptive_quadrature(|phi: f64| (1.0 - k * phi).sqrt(), 0.0, PI, &opts()).unwrap();
        let truth = 2.0 / (3.0 * k) * (1.0 - (1.0 - k * PI).powf(1.5));
        assert_abs_diff_eq!(v, truth, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_rejects_bad_interval() {
        assert!(adaptive_quadrature(|x: f64| x, 1.0, 1.0, &opts()).is_err());
        assert!(adaptive_quadrature(|x: f64| x, 2.0, 1.0, &opts()).is_err());
    }

    #[test]
    fn gaussian_expectation_normalization() {
        let (v, _, mass) =
            gaussian_expectation(|_| 1.0, 0.3, 2.0, f64::NEG_INFINITY, &opts()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(mass, 0.0);
    }

    #[test]
    fn gaussian_expectation_first_moment() {
        let mu = -0.7;
        let (v, _, _) = gaussian_expectation(|x| x, mu, 0.5, f64::NEG_INFINITY, &opts()).unwrap();
        assert_abs_diff_eq!(v, mu, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_expectation_second_moment() {
        let variance = 1.7;
        let (v, _, _) =
            gaussian_expectation(|x| x * x, 0.0, variance, f64::NEG_INFINITY, &opts()).unwrap();
        assert_abs_diff_eq!(v, variance, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_expectation_reports_truncated_mass() {
        // Cutoff at the mean leaves exactly half the mass.
        let (v, _, mass) = gaussian_expectation(|_| 1.0, 1.0, 1.0, 1.0, &opts()).unwrap();
        assert_abs_diff_eq!(mass, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sampler_zero_variance_is_constant() {
        let s = GaussianSampler::new(9, 2.5, 0.0).unwrap();
        for i in 0..100 {
            assert_eq!(s.draw_at(i), 2.5);
        }
    }

    #[test]
    fn sampler_is_pure_in_seed_and_index() {
        let a = GaussianSampler::<f64>::new(1234, 0.0, 1.0).unwrap();
        let b = GaussianSampler::<f64>::new(1234, 0.0, 1.0).unwrap();
        let first: Vec<f64> = a.clone().take(100).collect();
        let second: Vec<f64> = b.clone().take(100).collect();
        assert_eq!(first, second);
        // Iterator order and random access agree.
        assert_eq!(first[37], a.draw_at(37));
    }

    #[test]
    fn fit_exact_power_law() {
        let points: Vec<(f64, f64)> = (1..30).map(|i| {
            let t = 1.5f64.powi(i);
            (t, t.sqrt())
        }).collect();
        let fit = loglog_slope_fit(&points).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_constant_has_zero_slope() {
        let points: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 4.0)).collect();
        let fit = loglog_slope_fit(&points).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.0, epsilon = 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(loglog_slope_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(loglog_slope_fit(&[(1.0, 1.0), (-2.0, 2.0), (3.0, 3.0)]).is_err());
    }

    #[test]
    fn crossover_of_sqrt_law() {
        // f = pi at the crossing of f = T^0.5 happens at T = pi^2.
        let fit = FitResult {
            slope: 0.5,
            intercept: 0.0,
            r_squared: 1.0,
        };
        let t = plateau_crossover(PI, &fit).unwrap();
        assert_abs_diff_eq!(t, PI * PI, epsilon = 1e-10);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        assert_abs_diff_eq!(s.value(), 1.0 + 1e-12, epsilon = 1e-15);
    }
}
