//! Forward Ricci iteration: given `g_i`, solve `Ric g_{i+1} = g_i`.
//!
//! Traces store normalized metrics. Since `Ric(λg) = Ric g`, the chain with
//! exact equalities is recovered as `g_i = constants[i] · metrics[i]` for
//! `i ≥ 1`, and `Ric(metrics[i+1]) = constants[i] · metrics[i]` for every `i`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, RicciError};
use crate::geometry::{
    su2_ricci_jacobian, su2_ricci_raw, DiagonalForm3, FamilyMetric, FibrationFamily, FourParamForm,
    FourParamMetric, Su2Metric, SymmetricForm, TwoSummandMetric,
};
use crate::newton::{damped_newton, NewtonOptions};
use crate::prescribed::{
    solve_four_param_homotopy, solve_su2_from, solve_two_summand, HomotopyOptions, Su2SolveOptions,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Sum of the SU(2) entries in normalized traces; the round limit is `(2,2,2)`.
pub const SU2_NORMALIZATION: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationStatus {
    Converged,
    MaxIterations,
    SolveFailed,
}

impl IterationStatus {
    pub fn label(self) -> &'static str {
        match self {
            IterationStatus::Converged => "Converged",
            IterationStatus::MaxIterations => "MaxIterations",
            IterationStatus::SolveFailed => "SolveFailed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub metrics: Vec<FamilyMetric>,
    /// `constants[i]` is the κ with `Ric(metrics[i+1]) = κ · metrics[i]`.
    pub constants: Vec<f64>,
    /// Per-step `α_kl = x_k / x_l` of the fiber entries (empty for two-summand
    /// traces, whose single coordinate is already a ratio).
    pub ratios: Vec<[[f64; 3]; 3]>,
    pub status: IterationStatus,
    pub limit: Option<FamilyMetric>,
    /// The solver error behind [`IterationStatus::SolveFailed`], if any.
    pub failure: Option<RicciError>,
}

impl IterationTrace {
    fn start(g0: FamilyMetric) -> Self {
        let mut trace = Self {
            metrics: Vec::new(),
            constants: Vec::new(),
            ratios: Vec::new(),
            status: IterationStatus::MaxIterations,
            limit: None,
            failure: None,
        };
        trace.push(g0);
        trace
    }

    fn push(&mut self, g: FamilyMetric) {
        if let Some(x) = fiber_of(&g) {
            self.ratios.push(std::array::from_fn(|k| {
                std::array::from_fn(|l| x[k] / x[l])
            }));
        }
        self.metrics.push(g);
    }

    fn fail(&mut self, step: usize, source: RicciError) {
        self.status = IterationStatus::SolveFailed;
        self.failure = Some(RicciError::SolveFailed {
            step,
            source: Box::new(source),
        });
    }

    /// Number of completed solves.
    pub fn steps(&self) -> usize {
        self.constants.len()
    }

    pub fn last(&self) -> &FamilyMetric {
        self.metrics.last().expect("traces are never empty")
    }

    /// Largest relative defect `|Ric(m_{i+1}) - κ_i m_i| / max|κ_i m_i|`.
    pub fn defect(&self) -> f64 {
        self.metrics
            .windows(2)
            .zip(&self.constants)
            .map(|(pair, &kappa)| {
                let ric = pair[1].ricci().coefficients();
                let prev = pair[0].coordinates();
                let scale = prev.iter().map(|v| (kappa * v).abs()).fold(0.0, f64::max);
                ric.iter()
                    .zip(&prev)
                    .map(|(r, p)| (r - kappa * p).abs())
                    .fold(0.0, f64::max)
                    / scale
            })
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance of each normalized metric from the round one.
    pub fn deviations(&self) -> Vec<f64> {
        self.metrics.iter().map(round_deviation).collect()
    }

    /// Ratio of successive deviations at the last step whose deviation still
    /// exceeds `floor`.
    pub fn asymptotic_rate(&self, floor: f64) -> Option<f64> {
        let dev = self.deviations();
        dev.windows(2)
            .rev()
            .find(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
    }
}

fn fiber_of(g: &FamilyMetric) -> Option<[f64; 3]> {
    match g {
        FamilyMetric::Su2(m) => Some(m.entries()),
        FamilyMetric::FourParam(m) => Some(m.fiber()),
        FamilyMetric::TwoSummand(_) => None,
    }
}

fn round_deviation(g: &FamilyMetric) -> f64 {
    match g {
        FamilyMetric::Su2(m) => {
            let x = m.normalized_to_sum(SU2_NORMALIZATION).entries();
            x.iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max)
        }
        FamilyMetric::TwoSummand(m) => (m.ratio() - 1.0).abs(),
        FamilyMetric::FourParam(m) => m
            .normalized_fiber()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max),
    }
}

fn relative_change(prev: &[f64], next: &[f64]) -> f64 {
    let scale = prev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    prev.iter()
        .zip(next)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Ricci iteration on SU(2), starting from `c g0` with the constant `c`
/// fixed by the first solve.
pub fn iterate_su2(g0: &Su2Metric, max_iter: usize, tol: f64) -> IterationTrace {
    iterate_su2_with(g0, max_iter, tol, &Su2SolveOptions::default())
}

pub fn iterate_su2_with(
    g0: &Su2Metric,
    max_iter: usize,
    tol: f64,
    opts: &Su2SolveOptions,
) -> IterationTrace {
    let mut current = g0.canonicalized().normalized_to_sum(SU2_NORMALIZATION);
    let mut trace = IterationTrace::start(FamilyMetric::Su2(current));
    for step in 0..max_iter {
        let target = DiagonalForm3 {
            r: current.entries(),
        };
        let solved = match solve_su2_from(&target, Some(current.entries()), opts) {
            Ok(s) => s,
            Err(e) => {
                trace.fail(step, e);
                return trace;
            }
        };
        let next = solved.metric.normalized_to_sum(SU2_NORMALIZATION);
        let change = relative_change(&current.entries(), &next.entries());
        trace.constants.push(solved.kappa);
        trace.push(FamilyMetric::Su2(next));
        current = next;
        if change < tol {
            trace.status = IterationStatus::Converged;
            trace.limit = Some(FamilyMetric::Su2(
                Su2Metric::new(2.0, 2.0, 2.0).expect("round metric"),
            ));
            return trace;
        }
    }
    trace
}

/// Ricci iteration inside a two-summand family, normalized to `s = 1`.
///
/// A step with no solution ends the trace with [`IterationStatus::SolveFailed`]
/// and no `failure` error: the equation genuinely has no solution there.
pub fn iterate_two_summand(
    family: FibrationFamily,
    g0: &TwoSummandMetric,
    max_iter: usize,
    tol: f64,
) -> Result<IterationTrace> {
    let mut current = TwoSummandMetric::new(family, g0.ratio(), 1.0)?;
    let mut trace = IterationTrace::start(FamilyMetric::TwoSummand(current));
    for step in 0..max_iter {
        let solved = match solve_two_summand(family, current.t(), current.s()) {
            Ok(Some(s)) => s,
            Ok(None) => {
                trace.status = IterationStatus::SolveFailed;
                return Ok(trace);
            }
            Err(e) => {
                trace.fail(step, e);
                return Ok(trace);
            }
        };
        let next = solved.metric;
        let change = relative_change(&[current.t(), 1.0], &[next.t(), 1.0]);
        trace.constants.push(solved.kappa);
        trace.push(FamilyMetric::TwoSummand(next));
        current = next;
        if change < tol {
            trace.status = IterationStatus::Converged;
            trace.limit = Some(FamilyMetric::TwoSummand(next));
            return Ok(trace);
        }
    }
    Ok(trace)
}

/// Configuration of the map `f` and its local inverse near `(1,1,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMapConfig {
    pub n: u32,
    /// Sup-norm radius of the ball around `(1,1,1)` on which `f⁻¹` is used.
    pub domain_radius: f64,
    pub newton: NewtonOptions,
}

impl FMapConfig {
    pub const DEFAULT_RADIUS: f64 = 0.15;

    pub fn new(n: u32) -> Result<Self> {
        Self::with_radius(n, Self::DEFAULT_RADIUS)
    }

    /// Builds the configuration and probes the inverse at the corners and face
    /// centers of the ball, rejecting radii where Newton fails from the center.
    pub fn with_radius(n: u32, domain_radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(RicciError::InvalidMetric("n must be positive".into()));
        }
        if !(domain_radius > 0.0 && domain_radius < 1.0) {
            return Err(RicciError::InvalidMetric(format!(
                "domain radius must lie in (0, 1), got {domain_radius}"
            )));
        }
        let config = Self {
            n,
            domain_radius,
            newton: NewtonOptions {
                tol: 1e-14,
                max_iter: 50,
                max_halvings: 30,
                stall_tol: 1e-12,
            },
        };
        let r = domain_radius;
        let mut probes = Vec::new();
        for mask in 0..8u32 {
            probes.push(std::array::from_fn(|i| {
                if mask >> i & 1 == 1 {
                    1.0 + r
                } else {
                    1.0 - r
                }
            }));
        }
        for i in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut y = [1.0; 3];
                y[i] += sign * r;
                probes.push(y);
            }
        }
        for y in probes {
            let x = f_inverse(&config, y)?;
            let back = f_map(n, x)?;
            let err = (0..3).map(|i| (back[i] - y[i]).abs()).fold(0.0, f64::max);
            if err > 1e-10 {
                return Err(RicciError::NoConvergence {
                    iterations: config.newton.max_iter,
                    residual: err,
                });
            }
        }
        Ok(config)
    }

    /// Sup-norm distance from `(1,1,1)`.
    pub fn distance(y: &[f64; 3]) -> f64 {
        y.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn contains(&self, y: &[f64; 3]) -> bool {
        Self::distance(y) <= self.domain_radius * (1.0 + 1e-12)
    }
}

fn f_denominator(n: u32, x: &[f64; 3]) -> Result<f64> {
    let bound = 4.0 * f64::from(n) + 8.0;
    let d = bound - 2.0 * (x[0] + x[1] + x[2]);
    if d.abs() <= 4.0 * f64::EPSILON * bound {
        return Err(RicciError::SingularDenominator { point: *x });
    }
    Ok(d)
}

fn f_numerator(n: u32, x: &[f64; 3]) -> [f64; 3] {
    let nf = 4.0 * f64::from(n);
    let r = su2_ricci_raw(x);
    std::array::from_fn(|i| nf * x[i] * x[i] + r[i])
}

/// `f(x) = a(x) / b(x)`: the normalized Ricci curvature of `g_{(x1,x2,x3,1)}`.
pub fn f_map(n: u32, x: [f64; 3]) -> Result<[f64; 3]> {
    let d = f_denominator(n, &x)?;
    Ok(f_numerator(n, &x).map(|a| a / d))
}

/// Jacobian `∂f_i/∂x_j`.
pub fn f_map_jacobian(n: u32, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let d = f_denominator(n, &x)?;
    let a = f_numerator(n, &x);
    let dr = su2_ricci_jacobian(&x);
    let nf = 8.0 * f64::from(n);
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let da = dr[i][j] + if i == j { nf * x[i] } else { 0.0 };
            da / d + 2.0 * a[i] / (d * d)
        })
    }))
}

/// Solves `f(x) = y` by damped Newton from `x0`.
fn solve_f(n: u32, y: [f64; 3], x0: [f64; 3], opts: &NewtonOptions) -> Result<[f64; 3]> {
    let system = |v: &Vector3<f64>| {
        let x = [v[0], v[1], v[2]];
        if x.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return None;
        }
        let fx = f_map(n, x).ok()?;
        let jac = f_map_jacobian(n, x).ok()?;
        Some((
            Vector3::from_fn(|i, _| fx[i] - y[i]),
            Matrix3::from_fn(|i, j| jac[i][j]),
        ))
    };
    let out = damped_newton(system, Vector3::from(x0), opts)?;
    Ok([out.x[0], out.x[1], out.x[2]])
}

/// Local inverse of [`f_map`] on the configured ball around `(1,1,1)`.
pub fn f_inverse(config: &FMapConfig, y: [f64; 3]) -> Result<[f64; 3]> {
    if !config.contains(&y) {
        return Err(RicciError::OutsideDomain {
            distance: FMapConfig::distance(&y),
            radius: config.domain_radius,
        });
    }
    let slope = 2.0 + 1.0 / (2.0 * f64::from(config.n) + 1.0);
    let x0 = y.map(|v| 1.0 + (v - 1.0) / slope);
    solve_f(config.n, y, x0, &config.newton)
}

/// Ricci iteration on `S^{4n+3}` started near the round metric, via `f⁻¹`.
pub fn iterate_four_param_near_round(
    config: &FMapConfig,
    g0: &FourParamMetric,
    max_iter: usize,
    tol: f64,
) -> Result<IterationTrace> {
    if g0.n() != config.n {
        return Err(RicciError::InvalidMetric(format!(
            "metric has n = {} but the map is configured for n = {}",
            g0.n(),
            config.n
        )));
    }
    let start = g0.canonicalized();
    let mut x = start.normalized_fiber();
    if !config.contains(&x) {
        return Err(RicciError::OutsideDomain {
            distance: FMapConfig::distance(&x),
            radius: config.domain_radius,
        });
    }
    let n = config.n;
    let mut trace =
        IterationTrace::start(FamilyMetric::FourParam(FourParamMetric::new(n, x, 1.0)?));
    for step in 0..max_iter {
        let next = match f_inverse(config, x) {
            Ok(v) => v,
            Err(e) => {
                trace.fail(step, e);
                return Ok(trace);
            }
        };
        let c = 4.0 * f64::from(n) + 8.0 - 2.0 * (next[0] + next[1] + next[2]);
        let change = relative_change(&x, &next);
        trace.constants.push(c);
        trace.push(FamilyMetric::FourParam(FourParamMetric::new(n, next, 1.0)?));
        x = next;
        if change < tol {
            trace.status = IterationStatus::Converged;
            trace.limit = Some(FamilyMetric::FourParam(FourParamMetric::new(
                n, [1.0; 3], 1.0,
            )?));
            return Ok(trace);
        }
    }
    Ok(trace)
}

/// Ricci iteration on `S^{4n+3}` from an arbitrary start: each step runs the
/// continuation solver, falling back to Newton warm-started at the current
/// metric. Existence of the iteration is not known in general, so failures
/// are reported in the trace.
pub fn iterate_four_param(
    g0: &FourParamMetric,
    max_iter: usize,
    tol: f64,
    opts: &HomotopyOptions,
) -> Result<IterationTrace> {
    let n = g0.n();
    let mut x = g0.canonicalized().normalized_fiber();
    let mut trace =
        IterationTrace::start(FamilyMetric::FourParam(FourParamMetric::new(n, x, 1.0)?));
    let fallback = NewtonOptions {
        tol: 1e-13,
        max_iter: 60,
        max_halvings: 30,
        stall_tol: 1e-11,
    };
    for step in 0..max_iter {
        let target = FourParamForm { n, a: x, b: 1.0 };
        let next = match solve_four_param_homotopy(&target, opts) {
            Ok(s) => s.metric.normalized_fiber(),
            Err(e) => match solve_f(n, x, x, &fallback) {
                Ok(v) if f_denominator(n, &v).is_ok_and(|d| d > 0.0) => v,
                _ => {
                    trace.fail(step, e);
                    return Ok(trace);
                }
            },
        };
        let c = 4.0 * f64::from(n) + 8.0 - 2.0 * (next[0] + next[1] + next[2]);
        let change = relative_change(&x, &next);
        trace.constants.push(c);
        trace.push(FamilyMetric::FourParam(FourParamMetric::new(n, next, 1.0)?));
        x = next;
        if change < tol {
            trace.status = IterationStatus::Converged;
            trace.limit = Some(*trace.last());
            return Ok(trace);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2(x: [f64; 3]) -> Su2Metric {
        Su2Metric::from_array(x).unwrap()
    }

    #[test]
    fn round_su2_is_fixed() {
        let trace = iterate_su2(&su2([2.0, 2.0, 2.0]), 500, 1e-10);
        assert_eq!(trace.status, IterationStatus::Converged);
        assert_eq!(trace.steps(), 1);
        assert!((trace.constants[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn berger_start_converges_monotonically() {
        let trace = iterate_su2(&su2([1.0, 2.0, 2.0]), 500, 1e-10);
        assert_eq!(trace.status, IterationStatus::Converged);
        let a12: Vec<f64> = trace.ratios.iter().map(|m| m[0][1]).collect();
        assert!(a12.windows(2).all(|w| w[1] >= w[0] - 1e-14));
        assert!(trace.defect() < 1e-9);
    }

    #[test]
    fn generic_su2_rate_is_one_third() {
        let trace = iterate_su2(&su2([1.0, 2.0, 3.0]), 500, 1e-10);
        assert_eq!(trace.status, IterationStatus::Converged);
        let rate = trace.asymptotic_rate(1e-7).unwrap();
        assert!((rate - 1.0 / 3.0).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn sp1_second_einstein_is_stationary() {
        let fam = FibrationFamily::sp1(1).unwrap();
        let g = TwoSummandMetric::new(fam, 0.2, 1.0).unwrap();
        let trace = iterate_two_summand(fam, &g, 500, 1e-10).unwrap();
        assert_eq!(trace.status, IterationStatus::Converged);
        let FamilyMetric::TwoSummand(limit) = trace.limit.unwrap() else {
            panic!()
        };
        assert!((limit.ratio() - 0.2).abs() < 1e-12);

        let g = TwoSummandMetric::new(fam, 0.21, 1.0).unwrap();
        let trace = iterate_two_summand(fam, &g, 500, 1e-10).unwrap();
        assert_eq!(trace.status, IterationStatus::Converged);
        let FamilyMetric::TwoSummand(limit) = trace.limit.unwrap() else {
            panic!()
        };
        assert!((limit.ratio() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sp1_below_einstein_ratio_fails() {
        let fam = FibrationFamily::sp1(1).unwrap();
        let g = TwoSummandMetric::new(fam, 0.19, 1.0).unwrap();
        let trace = iterate_two_summand(fam, &g, 500, 1e-10).unwrap();
        assert_eq!(trace.status, IterationStatus::SolveFailed);
        assert!(trace.failure.is_none());
    }

    #[test]
    fn f_map_examples() {
        assert_eq!(f_map(3, [1.0; 3]).unwrap(), [1.0; 3]);
        let y = f_map(1, [1.1, 1.0, 1.0]).unwrap();
        assert!((y[0] - 7.26 / 5.8).abs() < 1e-14);
        assert!((y[1] - 1.0).abs() < 1e-14 && (y[2] - 1.0).abs() < 1e-14);
        let cfg = FMapConfig::with_radius(1, 0.3).unwrap();
        let x = f_inverse(&cfg, y).unwrap();
        assert!((x[0] - 1.1).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
        assert!(matches!(
            f_map(1, [2.0, 2.0, 2.0]),
            Err(RicciError::SingularDenominator { .. })
        ));
    }

    #[test]
    fn jacobian_at_round_point_is_scalar() {
        for n in 1..=4 {
            let jac = f_map_jacobian(n, [1.0; 3]).unwrap();
            let expected = 2.0 + 1.0 / (2.0 * f64::from(n) + 1.0);
            for (i, row) in jac.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let e = if i == j { expected } else { 0.0 };
                    assert!((v - e).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn near_round_rate() {
        let cfg = FMapConfig::new(1).unwrap();
        let g = FourParamMetric::new(1, [1.05, 1.0, 0.97], 1.0).unwrap();
        let trace = iterate_four_param_near_round(&cfg, &g, 500, 1e-10).unwrap();
        assert_eq!(trace.status, IterationStatus::Converged);
        let rate = trace.asymptotic_rate(1e-7).unwrap();
        assert!((rate - 3.0 / 7.0).abs() < 0.02, "rate {rate}");
        assert!(trace.defect() < 1e-9);

        let far = FourParamMetric::new(1, [1.5, 1.0, 1.0], 1.0).unwrap();
        assert!(matches!(
            iterate_four_param_near_round(&cfg, &far, 10, 1e-10),
            Err(RicciError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn best_effort_agrees_near_round() {
        let cfg = FMapConfig::new(2).unwrap();
        let g = FourParamMetric::new(2, [1.02, 1.0, 1.01], 1.0).unwrap();
        let local = iterate_four_param_near_round(&cfg, &g, 5, 0.0).unwrap();
        let global = iterate_four_param(&g, 5, 0.0, &HomotopyOptions::default()).unwrap();
        for (a, b) in local.metrics.iter().zip(&global.metrics) {
            let (a, b) = (a.coordinates(), b.coordinates());
            assert!(relative_change(&a, &b) < 1e-9);
        }
    }
}
