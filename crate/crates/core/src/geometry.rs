//! Ricci curvature of the homogeneous families.
//!
//! Three coordinate families are covered:
//!
//! * left-invariant metrics on SU(2), diagonal in a Milnor basis
//!   `[e_i, e_{i+1}] = 2 e_{i+2}`;
//! * the two-summand metrics `g_{t,s} = t ĝ|_V + s ĝ|_H` attached to a Hopf
//!   fibration, where `ĝ` is the reference metric (round of curvature one for
//!   the spheres);
//! * the four-parameter metrics `g_{(x1,x2,x3,s)}` on `S^{4n+3}` with an
//!   arbitrary diagonal left-invariant metric on the `S^3` fibers.
//!
//! Every Ricci coefficient returned here is measured against the reference
//! metric `ĝ`, i.e. `Ric(e, e)` for a `ĝ`-unit vector `e`. With that
//! convention the coefficients are invariant under `g -> c g`, and a Ricci
//! form can be fed straight back in as the next metric of an ancient
//! iteration.

use crate::error::{Result, RicciError};

fn check_positive(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(RicciError::InvalidMetric(format!(
            "{name} entries must be finite and positive, got {values:?}"
        )))
    }
}

/// Left-invariant metric on SU(2): `g(e_i, e_j) = x_i δ_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Metric {
    x: [f64; 3],
}

impl Su2Metric {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        Self::from_array([x1, x2, x3])
    }

    pub fn from_array(x: [f64; 3]) -> Result<Self> {
        check_positive("SU(2) metric", &x)?;
        Ok(Self { x })
    }

    pub fn entries(&self) -> [f64; 3] {
        self.x
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_array(self.x.map(|v| c * v))
    }

    /// Rescale so that the entries sum to `total`.
    pub fn normalized_to_sum(&self, total: f64) -> Self {
        let sum: f64 = self.x.iter().sum();
        Self {
            x: self.x.map(|v| v * total / sum),
        }
    }

    /// Entries sorted ascending. Permuting the Milnor basis (and flipping the
    /// orientation of one vector when the permutation is odd) preserves the
    /// bracket relations, so the result is isometric to `self`.
    pub fn canonicalized(&self) -> Self {
        let (x, _) = sort3(self.x);
        Self { x }
    }
}

/// Diagonal symmetric bilinear form on the SU(2) Lie algebra, any sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalForm3 {
    pub r: [f64; 3],
}

/// The Hopf fibrations whose total spaces carry two-summand metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FibrationKind {
    /// `S^1 -> S^{2n+1} -> CP^n`
    CircleFiberSphere,
    /// `S^3 -> S^{4n+3} -> HP^n`
    Sp1FiberSphere,
    /// `S^7 -> S^15 -> S^8`
    Spin7FiberSphere,
    /// `CP^1 -> CP^{2n+1} -> HP^n`
    CP1FiberProjective,
}

impl FibrationKind {
    pub const ALL: [FibrationKind; 4] = [
        FibrationKind::CircleFiberSphere,
        FibrationKind::Sp1FiberSphere,
        FibrationKind::Spin7FiberSphere,
        FibrationKind::CP1FiberProjective,
    ];

    /// Short name used on the command line.
    pub fn label(self) -> &'static str {
        match self {
            FibrationKind::CircleFiberSphere => "circle",
            FibrationKind::Sp1FiberSphere => "sp1",
            FibrationKind::Spin7FiberSphere => "spin7",
            FibrationKind::CP1FiberProjective => "cp",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FibrationFamily {
    kind: FibrationKind,
    n: u32,
}

impl FibrationFamily {
    pub fn new(kind: FibrationKind, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(RicciError::InvalidMetric(
                "fibration parameter n must be positive".into(),
            ));
        }
        let n = if kind == FibrationKind::Spin7FiberSphere {
            1
        } else {
            n
        };
        Ok(Self { kind, n })
    }

    pub fn circle(n: u32) -> Result<Self> {
        Self::new(FibrationKind::CircleFiberSphere, n)
    }

    pub fn sp1(n: u32) -> Result<Self> {
        Self::new(FibrationKind::Sp1FiberSphere, n)
    }

    pub fn spin7() -> Self {
        Self {
            kind: FibrationKind::Spin7FiberSphere,
            n: 1,
        }
    }

    pub fn cp1(n: u32) -> Result<Self> {
        Self::new(FibrationKind::CP1FiberProjective, n)
    }

    pub fn kind(&self) -> FibrationKind {
        self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Dimensions `(d_V, d_H)` of the vertical and horizontal spaces.
    pub fn dims(&self) -> (u32, u32) {
        let n = self.n;
        match self.kind {
            FibrationKind::CircleFiberSphere => (1, 2 * n),
            FibrationKind::Sp1FiberSphere => (3, 4 * n),
            FibrationKind::Spin7FiberSphere => (7, 8),
            FibrationKind::CP1FiberProjective => (2, 4 * n),
        }
    }

    /// Ricci coefficients `(A, B)` against `ĝ` as functions of `r = t/s`.
    ///
    /// Spheres: `A = (d_V - 1) + d_H r²`, `B = d_H + 3 d_V - 1 - 2 d_V r`.
    ///
    /// `CP^{2n+1}`: `A = 4 + 4n r²`, `B = 4n + 8 - 4r`. In per-g-unit terms this
    /// is `4/r + 4n r` on the fibers and `4n + 8 - 4r` horizontally (at s = 1),
    /// which reproduces the Einstein ratios `{1/(n+1), 1}`, the Fubini–Study
    /// constant `4n + 4` and the solvability threshold `a/b > 1/(n+2)`.
    pub fn ricci_coefficients(&self, r: f64) -> (f64, f64) {
        let p = self.ricci_polynomial();
        (p.alpha0 + p.alpha2 * r * r, p.beta0 - p.beta1 * r)
    }

    /// `A(r) = alpha0 + alpha2 r²`, `B(r) = beta0 - beta1 r`.
    pub fn ricci_polynomial(&self) -> RicciPolynomial {
        match self.kind {
            FibrationKind::CP1FiberProjective => {
                let n = f64::from(self.n);
                RicciPolynomial {
                    alpha0: 4.0,
                    alpha2: 4.0 * n,
                    beta0: 4.0 * n + 8.0,
                    beta1: 4.0,
                }
            }
            _ => {
                let (dv, dh) = self.dims();
                let (dv, dh) = (f64::from(dv), f64::from(dh));
                RicciPolynomial {
                    alpha0: dv - 1.0,
                    alpha2: dh,
                    beta0: dh + 3.0 * dv - 1.0,
                    beta1: 2.0 * dv,
                }
            }
        }
    }

    /// Coefficients `(p2, p1, p0)` of `A(r) - r B(r) = p2 r² + p1 r + p0`.
    /// Its positive roots are the Einstein ratios `t/s`.
    pub fn einstein_quadratic(&self) -> (f64, f64, f64) {
        let p = self.ricci_polynomial();
        (p.alpha2 + p.beta1, -p.beta0, p.alpha0)
    }

    /// Total dimension of the space.
    pub fn dimension(&self) -> u32 {
        let (dv, dh) = self.dims();
        dv + dh
    }
}

/// Coefficients of the two-summand Ricci formulas, see
/// [`FibrationFamily::ricci_polynomial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciPolynomial {
    pub alpha0: f64,
    pub alpha2: f64,
    pub beta0: f64,
    pub beta1: f64,
}

/// Two-summand metric `t ĝ|_V + s ĝ|_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSummandMetric {
    pub family: FibrationFamily,
    t: f64,
    s: f64,
}

impl TwoSummandMetric {
    pub fn new(family: FibrationFamily, t: f64, s: f64) -> Result<Self> {
        check_positive("two-summand metric", &[t, s])?;
        Ok(Self { family, t, s })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn ratio(&self) -> f64 {
        self.t / self.s
    }
}

/// Symmetric form `vertical ĝ|_V + horizontal ĝ|_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSummandForm {
    pub family: FibrationFamily,
    pub vertical: f64,
    pub horizontal: f64,
}

impl TwoSummandForm {
    /// Per-g-unit values `(Ric(u,u)/g(u,u), Ric(x,x)/g(x,x))` for the metric `g`.
    pub fn per_metric_unit(&self, g: &TwoSummandMetric) -> (f64, f64) {
        (self.vertical / g.t, self.horizontal / g.s)
    }
}

/// Metric `g_{(x1,x2,x3,s)}` on `S^{4n+3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourParamMetric {
    n: u32,
    x: [f64; 3],
    s: f64,
}

impl FourParamMetric {
    pub fn new(n: u32, x: [f64; 3], s: f64) -> Result<Self> {
        if n == 0 {
            return Err(RicciError::InvalidMetric("n must be positive".into()));
        }
        check_positive("four-parameter metric", &[x[0], x[1], x[2], s])?;
        Ok(Self { n, x, s })
    }

    /// The `Sp(n+1)Sp(1)`-invariant member `g_{(t,t,t,s)}`.
    pub fn symmetric(n: u32, t: f64, s: f64) -> Result<Self> {
        Self::new(n, [t, t, t], s)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn fiber(&self) -> [f64; 3] {
        self.x
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Fiber entries divided by `s`; the representative with `s = 1`.
    pub fn normalized_fiber(&self) -> [f64; 3] {
        self.x.map(|v| v / self.s)
    }

    pub fn canonicalized(&self) -> Self {
        let (x, _) = sort3(self.x);
        Self { x, ..*self }
    }
}

/// Symmetric form `T(e_i, e_j) = a_i δ_ij`, `T|_H = b ĝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourParamForm {
    pub n: u32,
    pub a: [f64; 3],
    pub b: f64,
}

impl FourParamForm {
    /// Horizontal coefficient measured against `g` instead of `ĝ`.
    pub fn horizontal_per_metric_unit(&self, g: &FourParamMetric) -> f64 {
        self.b / g.s
    }

    /// Reinterpret the form as a metric (valid only when positive definite).
    pub fn as_metric(&self) -> Result<FourParamMetric> {
        FourParamMetric::new(self.n, self.a, self.b)
    }
}

/// Sort three values ascending, returning the permutation `perm` with
/// `sorted[k] = x[perm[k]]`.
pub(crate) fn sort3(x: [f64; 3]) -> ([f64; 3], [usize; 3]) {
    let mut perm = [0usize, 1, 2];
    perm.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    (perm.map(|i| x[i]), perm)
}

/// `r_i = 2(x_i² - (x_{i+1} - x_{i+2})²) / (x_{i+1} x_{i+2})`, indices mod 3,
/// evaluated in the factored form `(x_i + x_k - x_j)(x_i + x_j - x_k)`.
/// This stays accurate when one entry is much smaller than the others, and
/// two equal entries give bitwise equal coefficients.
pub(crate) fn su2_ricci_raw(x: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| {
        let (xi, xj, xk) = (x[i], x[(i + 1) % 3], x[(i + 2) % 3]);
        2.0 * plus_plus_minus(xi, xk, xj) * plus_plus_minus(xi, xj, xk) / (xj * xk)
    })
}

/// `p + q - m` for positive inputs, adding the smallest term last.
fn plus_plus_minus(p: f64, q: f64, m: f64) -> f64 {
    if p <= q && p <= m {
        (q - m) + p
    } else if q <= m {
        (p - m) + q
    } else {
        (p + q) - m
    }
}

/// Partial derivatives `∂r_i/∂x_j` of [`su2_ricci_raw`].
pub(crate) fn su2_ricci_jacobian(x: &[f64; 3]) -> [[f64; 3]; 3] {
    let r = su2_ricci_raw(x);
    let mut jac = [[0.0; 3]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let prod = x[j] * x[k];
        let d = x[j] - x[k];
        jac[i][i] = 4.0 * x[i] / prod;
        jac[i][j] = -4.0 * d / prod - r[i] / x[j];
        jac[i][k] = 4.0 * d / prod - r[i] / x[k];
    }
    jac
}

/// Ricci curvature of a left-invariant metric on SU(2).
pub fn ricci_su2(g: &Su2Metric) -> DiagonalForm3 {
    DiagonalForm3 {
        r: su2_ricci_raw(&g.x),
    }
}

/// Ricci curvature of a two-summand metric.
pub fn ricci_two_summand(g: &TwoSummandMetric) -> TwoSummandForm {
    let (vertical, horizontal) = g.family.ricci_coefficients(g.ratio());
    TwoSummandForm {
        family: g.family,
        vertical,
        horizontal,
    }
}

/// Ricci curvature of a four-parameter metric:
/// `a_i = 4n x_i²/s² + r_i(x)` and `b = 4n + 8 - 2(x1+x2+x3)/s`.
pub fn ricci_four_param(g: &FourParamMetric) -> FourParamForm {
    let n = f64::from(g.n);
    let y = g.normalized_fiber();
    let r = su2_ricci_raw(&g.x);
    FourParamForm {
        n: g.n,
        a: std::array::from_fn(|i| 4.0 * n * y[i] * y[i] + r[i]),
        b: 4.0 * n + 8.0 - 2.0 * (y[0] + y[1] + y[2]),
    }
}

/// Fiber-gauge canonicalization (entries sorted ascending).
pub trait CanonicalGauge: Sized {
    fn canonicalize_gauge(&self) -> Self;
}

impl CanonicalGauge for Su2Metric {
    fn canonicalize_gauge(&self) -> Self {
        self.canonicalized()
    }
}

impl CanonicalGauge for FourParamMetric {
    fn canonicalize_gauge(&self) -> Self {
        self.canonicalized()
    }
}

/// A symmetric form given by finitely many diagonal coefficients.
pub trait SymmetricForm {
    fn coefficients(&self) -> Vec<f64>;
}

impl SymmetricForm for DiagonalForm3 {
    fn coefficients(&self) -> Vec<f64> {
        self.r.to_vec()
    }
}

impl SymmetricForm for TwoSummandForm {
    fn coefficients(&self) -> Vec<f64> {
        vec![self.vertical, self.horizontal]
    }
}

impl SymmetricForm for FourParamForm {
    fn coefficients(&self) -> Vec<f64> {
        vec![self.a[0], self.a[1], self.a[2], self.b]
    }
}

/// True iff every coefficient strictly exceeds `margin`.
pub fn positivity_check<F: SymmetricForm + ?Sized>(form: &F, margin: f64) -> bool {
    form.coefficients().iter().all(|&c| c > margin)
}

/// A metric from any of the supported families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyMetric {
    Su2(Su2Metric),
    TwoSummand(TwoSummandMetric),
    FourParam(FourParamMetric),
}

/// Ricci-type form of the matching family, possibly indefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyForm {
    Su2(DiagonalForm3),
    TwoSummand(TwoSummandForm),
    FourParam(FourParamForm),
}

impl FamilyMetric {
    pub fn ricci(&self) -> FamilyForm {
        match self {
            FamilyMetric::Su2(g) => FamilyForm::Su2(ricci_su2(g)),
            FamilyMetric::TwoSummand(g) => FamilyForm::TwoSummand(ricci_two_summand(g)),
            FamilyMetric::FourParam(g) => FamilyForm::FourParam(ricci_four_param(g)),
        }
    }

    /// Coefficients against `ĝ`: `x`, `(t, s)` or `(x1, x2, x3, s)`.
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            FamilyMetric::Su2(g) => g.entries().to_vec(),
            FamilyMetric::TwoSummand(g) => vec![g.t(), g.s()],
            FamilyMetric::FourParam(g) => {
                let x = g.fiber();
                vec![x[0], x[1], x[2], g.s()]
            }
        }
    }

    pub fn family_name(&self) -> String {
        match self {
            FamilyMetric::Su2(_) => "su2".into(),
            FamilyMetric::TwoSummand(g) => g.family.kind().label().into(),
            FamilyMetric::FourParam(_) => "four-param".into(),
        }
    }
}

impl FamilyForm {
    /// The form read as a metric of the same family, if positive definite.
    pub fn as_metric(&self) -> Option<FamilyMetric> {
        if !positivity_check(self, 0.0) {
            return None;
        }
        let metric = match self {
            FamilyForm::Su2(f) => FamilyMetric::Su2(Su2Metric::from_array(f.r).ok()?),
            FamilyForm::TwoSummand(f) => FamilyMetric::TwoSummand(
                TwoSummandMetric::new(f.family, f.vertical, f.horizontal).ok()?,
            ),
            FamilyForm::FourParam(f) => FamilyMetric::FourParam(f.as_metric().ok()?),
        };
        Some(metric)
    }
}

impl SymmetricForm for FamilyForm {
    fn coefficients(&self) -> Vec<f64> {
        match self {
            FamilyForm::Su2(f) => f.coefficients(),
            FamilyForm::TwoSummand(f) => f.coefficients(),
            FamilyForm::FourParam(f) => f.coefficients(),
        }
    }
}
