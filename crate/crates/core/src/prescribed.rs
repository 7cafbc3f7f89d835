//! Prescribed Ricci curvature: solve `Ric g = κ T` inside each family.
//!
//! * SU(2): damped Newton on the three diagonal equations plus a gauge
//!   equation, with an independent explicit route through the c-function cubic.
//! * Two-summand metrics: a quadratic in `r = t/s`.
//! * Four-parameter metrics on `S^{4n+3}`: natural-parameter continuation in
//!   `λ` from the SU(2) system (`λ = 0`) to the full system (`λ = 4n`).

use nalgebra::{Matrix4, Vector4};

use crate::cubic;
use crate::error::{Result, RicciError};
use crate::geometry::{
    ricci_four_param, ricci_su2, ricci_two_summand, su2_ricci_jacobian, su2_ricci_raw,
    DiagonalForm3, FibrationFamily, FibrationKind, FourParamForm, FourParamMetric, Su2Metric,
    TwoSummandMetric,
};
use crate::newton::{damped_newton, NewtonOptions};

/// Outcome of a prescribed Ricci curvature solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<M> {
    pub metric: M,
    /// Positive constant with `Ric(metric) = kappa · T`.
    pub kappa: f64,
    /// Max absolute defect of `Ric(metric) - kappa · T`, re-evaluated through
    /// the geometry module.
    pub residual: f64,
    pub iterations: usize,
    pub path_report: Option<PathReport>,
}

/// Diagnostics of a λ-continuation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub smallest_step: f64,
    pub final_lambda: f64,
    /// Smallest and largest coordinate among `(x1, x2, x3, c)` along the path.
    pub coordinate_range: (f64, f64),
}

/// Point on a continuation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyState {
    pub lambda: f64,
    /// `(x1, x2, x3, c)`
    pub point: [f64; 4],
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CBranch {
    GenericCubic,
    DegenerateClosedForm,
    /// Two entries nearly agree and the cubic lost its double root to
    /// rounding: the closed form of the nearest pair, polished by Newton.
    NearPairPolished,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFunctionResult {
    pub c: f64,
    /// Selected cubic root; equals `x3/x1` of the SU(2) solution.
    pub z: f64,
    pub branch: CBranch,
    /// SU(2) solution reconstructed from `z`, normalized to sum 6.
    pub solution: [f64; 3],
}

/// Options for the SU(2) Newton solve.
#[derive(Debug, Clone, Copy)]
pub struct Su2SolveOptions {
    pub newton: NewtonOptions,
    /// Returned metrics are scaled so that `x1 + x2 + x3 = normalization_sum`.
    pub normalization_sum: f64,
    /// Acceptance bound on `residual / max_i(κ T_i)`.
    pub rel_tol: f64,
}

impl Default for Su2SolveOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            normalization_sum: 6.0,
            rel_tol: 1e-10,
        }
    }
}

fn positive_triple(t: &[f64; 3]) -> Result<()> {
    if t.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(RicciError::InvalidMetric(format!(
            "prescribed form must be positive definite, got {t:?}"
        )))
    }
}

fn su2_system(
    t: [f64; 3],
    gauge_sum: f64,
) -> impl Fn(&Vector4<f64>) -> Option<(Vector4<f64>, Matrix4<f64>)> {
    move |v: &Vector4<f64>| {
        if v.iter().any(|c| !c.is_finite() || c.abs() > 700.0) {
            return None;
        }
        let x = [v[0].exp(), v[1].exp(), v[2].exp()];
        let c = v[3].exp();
        let r = su2_ricci_raw(&x);
        let dr = su2_ricci_jacobian(&x);
        let mut f = Vector4::zeros();
        let mut jac = Matrix4::zeros();
        for i in 0..3 {
            f[i] = r[i] - c * t[i];
            for j in 0..3 {
                jac[(i, j)] = dr[i][j] * x[j];
            }
            jac[(i, 3)] = -c * t[i];
        }
        f[3] = x.iter().sum::<f64>() - gauge_sum;
        for j in 0..3 {
            jac[(3, j)] = x[j];
        }
        Some((f, jac))
    }
}

fn su2_initial_guesses(t: &[f64; 3], first: Option<[f64; 3]>) -> Vec<[f64; 3]> {
    let mut guesses: Vec<[f64; 3]> = first.into_iter().collect();
    guesses.push(*t);
    guesses.push([2.0; 3]);
    let (s, _) = crate::geometry::sort3(*t);
    for p in [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ] {
        guesses.push(p.map(|i| s[i]));
    }
    guesses.push(t.map(f64::cbrt));
    guesses
}

/// Solve `Ric g = c T` on SU(2).
pub fn solve_su2(target: &DiagonalForm3, opts: &Su2SolveOptions) -> Result<SolveResult<Su2Metric>> {
    solve_su2_from(target, None, opts)
}

/// Like [`solve_su2`], trying `init` before the default initializations.
pub fn solve_su2_from(
    target: &DiagonalForm3,
    init: Option<[f64; 3]>,
    opts: &Su2SolveOptions,
) -> Result<SolveResult<Su2Metric>> {
    let t = target.r;
    positive_triple(&t)?;
    if let Some(x) = init {
        positive_triple(&x)?;
    }
    // Work with max T = 1; c rescales inversely.
    let tmax = t.iter().cloned().fold(0.0, f64::max);
    let tn = t.map(|v| v / tmax);
    let gauge = 6.0;
    let system = su2_system(tn, gauge);

    let mut last_err = RicciError::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    };
    let mut total_iterations = 0;
    for guess in su2_initial_guesses(&tn, init) {
        let sum: f64 = guess.iter().sum();
        let x0 = guess.map(|v| v * gauge / sum);
        let r0 = su2_ricci_raw(&x0);
        let fit: f64 =
            (0..3).map(|i| r0[i] * tn[i]).sum::<f64>() / tn.iter().map(|v| v * v).sum::<f64>();
        let c0 = if fit > 1e-6 { fit } else { 1.0 };
        let v0 = Vector4::new(x0[0].ln(), x0[1].ln(), x0[2].ln(), c0.ln());
        match damped_newton(&system, v0, &opts.newton) {
            Ok(out) => {
                total_iterations += out.iterations;
                let x = [out.x[0].exp(), out.x[1].exp(), out.x[2].exp()];
                let c = out.x[3].exp() / tmax;
                let metric = Su2Metric::from_array(x)?.normalized_to_sum(opts.normalization_sum);
                let ric = ricci_su2(&metric).r;
                let residual = (0..3)
                    .map(|i| (ric[i] - c * t[i]).abs())
                    .fold(0.0, f64::max);
                let scale = t.iter().map(|v| v * c).fold(0.0, f64::max);
                if residual <= opts.rel_tol * scale {
                    return Ok(SolveResult {
                        metric,
                        kappa: c,
                        residual,
                        iterations: total_iterations,
                        path_report: None,
                    });
                }
                last_err = RicciError::NoConvergence {
                    iterations: out.iterations,
                    residual,
                };
            }
            Err(e) => {
                if let RicciError::NoConvergence { iterations, .. } = e {
                    total_iterations += iterations;
                }
                last_err = e;
            }
        }
    }
    Err(last_err)
}

/// Closed form on the subfamily `T_j = T_k`, `i` the distinguished index:
/// returns `(x_i / x_j, c)`.
fn equal_pair_closed_form(ti: f64, tj: f64) -> (f64, f64) {
    let root = (ti * ti + 8.0 * ti * tj).sqrt();
    let ratio = (root - ti) / (2.0 * tj);
    let c = (ti + 4.0 * tj - root) / (tj * tj);
    (ratio, c)
}

const CLOSED_FORM_REL: f64 = 1e-13;

/// The constant `c(T1, T2, T3)` for which the SU(2) system has a positive
/// solution.
///
/// When two entries agree to `1e-13` relative the explicit formula of the
/// `U(1)`-symmetric subfamily is used; otherwise the cubic in `Z = x3/x1`.
pub fn c_function(t: [f64; 3]) -> Result<CFunctionResult> {
    positive_triple(&t)?;
    let tmax = t.iter().cloned().fold(0.0, f64::max);
    let pairs = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
    for (i, j, k) in pairs {
        if (t[j] - t[k]).abs() <= CLOSED_FORM_REL * tmax {
            let (x, c) = closed_form_solution(t, i, j, k);
            return Ok(CFunctionResult {
                c,
                z: x[2] / x[0],
                branch: CBranch::DegenerateClosedForm,
                solution: x,
            });
        }
    }
    let cubic_err = match c_function_cubic(t) {
        Ok(res) => return Ok(res),
        Err(e) => e,
    };
    let (i, j, k) = pairs
        .into_iter()
        .min_by(|a, b| {
            let gap = |p: &(usize, usize, usize)| (t[p.1] - t[p.2]).abs() / t[p.1].max(t[p.2]);
            gap(a).total_cmp(&gap(b))
        })
        .expect("three pairs");
    let (seed, c0) = closed_form_solution(t, i, j, k);
    let (y, c) = polish_su2_candidate(t, seed, c0);
    if su2_relative_defect(t, &y, c) >= 1e-8 {
        return Err(cubic_err);
    }
    let sum: f64 = y.iter().sum();
    Ok(CFunctionResult {
        c,
        z: y[2] / y[0],
        branch: CBranch::NearPairPolished,
        solution: y.map(|v| 6.0 * v / sum),
    })
}

/// SU(2) solution of the subfamily `T_j = T_k` with both set to their mean,
/// normalized to sum 6, and its constant.
fn closed_form_solution(t: [f64; 3], i: usize, j: usize, k: usize) -> ([f64; 3], f64) {
    let tj = 0.5 * (t[j] + t[k]);
    let (ratio, c) = equal_pair_closed_form(t[i], tj);
    let mut x = [1.0; 3];
    x[i] = ratio;
    let sum: f64 = x.iter().sum();
    (x.map(|v| 6.0 * v / sum), c)
}

fn su2_relative_defect(t: [f64; 3], y: &[f64; 3], c: f64) -> f64 {
    let r = su2_ricci_raw(y);
    let scale = t.iter().map(|v| v * c).fold(0.0, f64::max);
    (0..3).map(|i| (r[i] - c * t[i]).abs()).fold(0.0, f64::max) / scale
}

/// The cubic route alone (valid whenever the cubic is not identically zero,
/// including `T2 = T3`, where it drops to a quadratic).
pub fn c_function_cubic(t: [f64; 3]) -> Result<CFunctionResult> {
    positive_triple(&t)?;
    let [t1, t2, t3] = t;
    let a = t1 * t1 * (t2 - t3);
    let b = t1 * t3 * (2.0 * t1 - t2 - t3);
    let c = t1 * t3 * (2.0 * t3 - t1 - t2);
    let d = t3 * t3 * (t2 - t1);
    let roots = cubic::real_roots(a, b, c, d).ok_or(RicciError::RootSelectionAmbiguous)?;

    let mut best: Option<(f64, CFunctionResult)> = None;
    for z in roots.into_iter().filter(|z| *z > 0.0 && z.is_finite()) {
        let denom = t1 * t1 * z * z - t3 * t3;
        if denom == 0.0 {
            continue;
        }
        let cval = 8.0 * (t1 * z * z - t3) / denom;
        let y2 = (4.0 + 4.0 * z - cval * t3 - cval * t1 * z) / 4.0;
        if !(cval > 0.0 && y2 > 0.0) {
            continue;
        }
        let (y, cval) = polish_su2_candidate(t, [1.0, y2, z], cval);
        let defect = su2_relative_defect(t, &y, cval);
        let sum: f64 = y.iter().sum();
        let candidate = CFunctionResult {
            c: cval,
            z: y[2] / y[0],
            branch: CBranch::GenericCubic,
            solution: y.map(|v| 6.0 * v / sum),
        };
        if best.as_ref().is_none_or(|(bd, _)| defect < *bd) {
            best = Some((defect, candidate));
        }
    }
    match best {
        Some((defect, result)) if defect < 1e-8 => Ok(result),
        _ => Err(RicciError::RootSelectionAmbiguous),
    }
}

/// Near `T1 = T3` the cubic has two close roots and `c` is a ratio of small
/// quantities, so a few Newton steps on the full system restore accuracy.
fn polish_su2_candidate(t: [f64; 3], y: [f64; 3], c: f64) -> ([f64; 3], f64) {
    let sum: f64 = y.iter().sum();
    let v0 = Vector4::new(y[0].ln(), y[1].ln(), y[2].ln(), c.ln());
    let opts = NewtonOptions {
        max_iter: 8,
        max_halvings: 4,
        ..NewtonOptions::default()
    };
    match damped_newton(su2_system(t, sum), v0, &opts) {
        Ok(out) => (
            [out.x[0].exp(), out.x[1].exp(), out.x[2].exp()],
            out.x[3].exp(),
        ),
        Err(_) => (y, c),
    }
}

/// Solve `Ric h = κ g_{a,b}` inside a two-summand family.
///
/// Returns `None` exactly when no `r = t/s > 0` with `κ > 0` exists.
pub fn solve_two_summand(
    family: FibrationFamily,
    a: f64,
    b: f64,
) -> Result<Option<SolveResult<TwoSummandMetric>>> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(RicciError::InvalidMetric(format!(
            "target coefficients must be positive, got ({a}, {b})"
        )));
    }
    // Solve b A(r) - a B(r) = 0.
    let poly = family.ricci_polynomial();
    let p2 = b * poly.alpha2;
    let p1 = a * poly.beta1;
    let p0 = b * poly.alpha0 - a * poly.beta0;
    if p0 >= 0.0 {
        return Ok(None);
    }
    // p2 > 0, p1 >= 0, p0 < 0: exactly one positive root.
    let disc = p1 * p1 - 4.0 * p2 * p0;
    let q = -0.5 * (p1 + disc.sqrt());
    let r = p0 / q;
    if !(r > 0.0) {
        return Ok(None);
    }
    let metric = TwoSummandMetric::new(family, r, 1.0)?;
    let ric = ricci_two_summand(&metric);
    let kappa = ric.horizontal / b;
    if !(kappa > 0.0) {
        return Ok(None);
    }
    let residual = (ric.vertical - kappa * a)
        .abs()
        .max((ric.horizontal - kappa * b).abs());
    Ok(Some(SolveResult {
        metric,
        kappa,
        residual,
        iterations: 0,
        path_report: None,
    }))
}

/// Threshold on `a/b` above which the two-summand equation is solvable.
pub fn two_summand_threshold(family: FibrationFamily) -> f64 {
    let poly = family.ricci_polynomial();
    poly.alpha0 / poly.beta0
}

/// Options for the λ-continuation.
#[derive(Debug, Clone, Copy)]
pub struct HomotopyOptions {
    /// Initial step as a fraction of the path length `4n`.
    pub initial_step_fraction: f64,
    /// Smallest allowed step as a fraction of `4n`.
    pub min_step_fraction: f64,
    pub corrector: NewtonOptions,
    /// Corrector iteration count that still counts as an easy step.
    pub easy_iterations: usize,
    /// Box `[lo, hi]` that every coordinate of an accepted point must stay in.
    pub bounds: (f64, f64),
    /// Acceptance bound on `residual / max(κ T)` at the end of the path.
    pub rel_tol: f64,
    pub su2: Su2SolveOptions,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self {
            initial_step_fraction: 1.0 / 64.0,
            min_step_fraction: 1e-6,
            corrector: NewtonOptions {
                tol: 1e-12,
                max_iter: 8,
                max_halvings: 10,
                stall_tol: 1e-10,
            },
            easy_iterations: 3,
            bounds: (1e-8, 1e8),
            rel_tol: 1e-10,
            su2: Su2SolveOptions::default(),
        }
    }
}

/// Residual and Jacobian of the λ-system in divided form:
/// `c - (4n+8) + 2Σx = 0`, `λ x_i² + r_i(x) - c T_i = 0`.
fn lambda_system(
    n: u32,
    t: [f64; 3],
    lambda: f64,
) -> impl Fn(&Vector4<f64>) -> Option<(Vector4<f64>, Matrix4<f64>)> {
    let nf = f64::from(n);
    move |z: &Vector4<f64>| {
        if z.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return None;
        }
        let x = [z[0], z[1], z[2]];
        let c = z[3];
        let r = su2_ricci_raw(&x);
        let dr = su2_ricci_jacobian(&x);
        let mut f = Vector4::zeros();
        let mut jac = Matrix4::zeros();
        f[0] = c - (4.0 * nf + 8.0) + 2.0 * (x[0] + x[1] + x[2]);
        jac[(0, 0)] = 2.0;
        jac[(0, 1)] = 2.0;
        jac[(0, 2)] = 2.0;
        jac[(0, 3)] = 1.0;
        for i in 0..3 {
            f[i + 1] = lambda * x[i] * x[i] + r[i] - c * t[i];
            for j in 0..3 {
                jac[(i + 1, j)] = dr[i][j];
            }
            jac[(i + 1, i)] += 2.0 * lambda * x[i];
            jac[(i + 1, 3)] = -t[i];
        }
        Some((f, jac))
    }
}

/// Starting point of the continuation: the SU(2) solution of `T/b`, scaled so
/// that `c = (4n+8) - 2(x1+x2+x3)`.
pub fn homotopy_start(n: u32, t: [f64; 3], opts: &Su2SolveOptions) -> Result<HomotopyState> {
    let su2 = solve_su2(&DiagonalForm3 { r: t }, opts)?;
    let bound = 4.0 * f64::from(n) + 8.0;
    let c = su2.kappa;
    if c >= bound {
        return Err(RicciError::ScalingFailure { c, bound });
    }
    let y = su2.metric.entries();
    let sum: f64 = y.iter().sum();
    let factor = (bound - c) / (2.0 * sum);
    Ok(HomotopyState {
        lambda: 0.0,
        point: [y[0] * factor, y[1] * factor, y[2] * factor, c],
        step: 0.0,
    })
}

/// Solve `Ric g = κ T` for a four-parameter target by continuation in λ.
pub fn solve_four_param_homotopy(
    target: &FourParamForm,
    opts: &HomotopyOptions,
) -> Result<SolveResult<FourParamMetric>> {
    solve_four_param_homotopy_traced(target, opts, |_| {})
}

/// As [`solve_four_param_homotopy`], calling `observer` on every accepted point.
pub fn solve_four_param_homotopy_traced(
    target: &FourParamForm,
    opts: &HomotopyOptions,
    mut observer: impl FnMut(&HomotopyState),
) -> Result<SolveResult<FourParamMetric>> {
    let n = target.n;
    if n == 0 {
        return Err(RicciError::InvalidMetric("n must be positive".into()));
    }
    positive_triple(&target.a)?;
    if !(target.b.is_finite() && target.b > 0.0) {
        return Err(RicciError::InvalidMetric(format!(
            "horizontal coefficient must be positive, got {}",
            target.b
        )));
    }
    let t = target.a.map(|v| v / target.b);
    let end = 4.0 * f64::from(n);
    let (lo, hi) = opts.bounds;
    let in_box = |z: &Vector4<f64>| z.iter().all(|v| *v >= lo && *v <= hi);

    let start = homotopy_start(n, t, &opts.su2)?;
    observer(&start);
    let mut z = Vector4::from(start.point);
    let mut lambda = 0.0;
    let mut step = end * opts.initial_step_fraction;
    let min_step = end * opts.min_step_fraction;
    let mut report = PathReport {
        accepted_steps: 0,
        rejected_steps: 0,
        smallest_step: step,
        final_lambda: 0.0,
        coordinate_range: (z.min(), z.max()),
    };
    let mut easy_streak = 0;
    let mut iterations = 0;
    let fail = |lambda: f64, reason: String| RicciError::PathFailure {
        last_lambda: lambda,
        target: end,
        reason,
    };
    if !in_box(&z) {
        return Err(fail(
            0.0,
            format!("start point {z:?} outside the path domain"),
        ));
    }

    while lambda < end {
        let h = step.min(end - lambda);
        // Euler predictor: J dz/dλ = -∂F/∂λ = -(0, x_i²).
        let (_, jac) = lambda_system(n, t, lambda)(&z)
            .ok_or_else(|| fail(lambda, "left the positive orthant".into()))?;
        let dlam = Vector4::new(0.0, -z[0] * z[0], -z[1] * z[1], -z[2] * z[2]);
        let tangent = jac
            .lu()
            .solve(&dlam)
            .ok_or_else(|| fail(lambda, "singular Jacobian along the path".into()))?;
        let predicted = z + tangent * h;
        let corrected = if predicted.iter().all(|v| *v > 0.0) {
            damped_newton(lambda_system(n, t, lambda + h), predicted, &opts.corrector).ok()
        } else {
            None
        };
        match corrected {
            Some(out) => {
                if !in_box(&out.x) {
                    return Err(fail(
                        lambda,
                        format!("point {:?} left the box [{lo:e}, {hi:e}]", out.x),
                    ));
                }
                iterations += out.iterations;
                z = out.x;
                lambda = if end - (lambda + h) <= f64::EPSILON * end {
                    end
                } else {
                    lambda + h
                };
                report.accepted_steps += 1;
                report.coordinate_range = (
                    report.coordinate_range.0.min(z.min()),
                    report.coordinate_range.1.max(z.max()),
                );
                observer(&HomotopyState {
                    lambda,
                    point: [z[0], z[1], z[2], z[3]],
                    step: h,
                });
                if out.iterations <= opts.easy_iterations {
                    easy_streak += 1;
                    if easy_streak >= 3 {
                        step = (2.0 * step).min(end / 4.0);
                        easy_streak = 0;
                    }
                } else {
                    easy_streak = 0;
                }
            }
            None => {
                report.rejected_steps += 1;
                easy_streak = 0;
                step *= 0.5;
                report.smallest_step = report.smallest_step.min(step);
                if step < min_step {
                    return Err(fail(lambda, "step size fell below the minimum".into()));
                }
            }
        }
    }
    report.final_lambda = lambda;

    let polish = NewtonOptions {
        tol: 1e-13,
        max_iter: 20,
        ..opts.corrector
    };
    if let Ok(out) = damped_newton(lambda_system(n, t, end), z, &polish) {
        if in_box(&out.x) {
            z = out.x;
            iterations += out.iterations;
        }
    }

    let metric = FourParamMetric::new(n, [z[0], z[1], z[2]], 1.0)?;
    let kappa = z[3] / target.b;
    let residual = four_param_residual(&metric, target, kappa);
    let scale = target
        .a
        .iter()
        .chain(std::iter::once(&target.b))
        .map(|v| v * kappa)
        .fold(0.0, f64::max);
    if !(kappa > 0.0) || residual > opts.rel_tol * scale {
        return Err(fail(
            end,
            format!("endpoint residual {residual:e} exceeds tolerance"),
        ));
    }
    Ok(SolveResult {
        metric,
        kappa,
        residual,
        iterations,
        path_report: Some(report),
    })
}

/// `max |Ric(g) - κ T|` over the four coefficients.
pub fn four_param_residual(g: &FourParamMetric, target: &FourParamForm, kappa: f64) -> f64 {
    let ric = ricci_four_param(g);
    (0..3)
        .map(|i| (ric.a[i] - kappa * target.a[i]).abs())
        .fold((ric.b - kappa * target.b).abs(), f64::max)
}

/// Explicit solution of the SU(2) system for `T2 = T3` targets of
/// `S^{4n+3}`, scaled by `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spu1ClosedForm {
    /// `x1 / x` where the fiber metric is `(x1, x, x)`.
    pub fiber_ratio: f64,
    /// `c(T1/b, T2/b, T2/b)`.
    pub c_value: f64,
    /// Whether `c_value < 4n + 8`, the sufficient condition for solvability.
    pub condition_holds: bool,
}

impl Spu1ClosedForm {
    /// Member of the one-parameter solution family with `x2 = x3 = x`.
    pub fn metric(&self, x: f64) -> Result<Su2Metric> {
        Su2Metric::new(self.fiber_ratio * x, x, x)
    }
}

pub fn spu1_closed_form(n: u32, t1: f64, t2: f64, b: f64) -> Result<Spu1ClosedForm> {
    positive_triple(&[t1, t2, b])?;
    let root = (t1 * t1 + 8.0 * t1 * t2).sqrt();
    let fiber_ratio = (root - t1) / (2.0 * t2);
    let c_value = b / (t2 * t2) * (t1 + 4.0 * t2 - root);
    Ok(Spu1ClosedForm {
        fiber_ratio,
        c_value,
        condition_holds: c_value < 4.0 * f64::from(n) + 8.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solvability {
    /// `b / T_i < 2n + 4` for every i.
    pub fiber_bound: bool,
    /// `c(T/b) < 4n + 8`.
    pub c_condition: bool,
    pub c_value: f64,
}

pub fn solvability_predicates(target: &FourParamForm) -> Result<Solvability> {
    positive_triple(&target.a)?;
    let n = f64::from(target.n);
    let b = target.b;
    let fiber_bound = target.a.iter().all(|ti| b / ti < 2.0 * n + 4.0);
    let c_value = c_function(target.a.map(|v| v / b))?.c;
    Ok(Solvability {
        fiber_bound,
        c_condition: c_value < 4.0 * n + 8.0,
        c_value,
    })
}

/// Solvability thresholds on `a/b` in closed form.
pub fn threshold_closed_form(family: FibrationFamily) -> f64 {
    let n = f64::from(family.n());
    match family.kind() {
        FibrationKind::CircleFiberSphere => 0.0,
        FibrationKind::Sp1FiberSphere => 1.0 / (2.0 * n + 4.0),
        FibrationKind::Spin7FiberSphere => 3.0 / 14.0,
        FibrationKind::CP1FiberProjective => 1.0 / (n + 2.0),
    }
}
