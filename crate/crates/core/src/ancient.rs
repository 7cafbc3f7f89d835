//! Ancient (backward) Ricci iteration `g_{i-1} = Ric g_i`.

use rayon::prelude::*;

use crate::geometry::{
    positivity_check, FamilyForm, FamilyMetric, FourParamMetric, Su2Metric, SymmetricForm,
    TwoSummandMetric,
};

/// Collapse is declared once the fiber entry drops below this value...
pub const COLLAPSE_FIBER: f64 = 1e-10;
/// ...while the two remaining SU(2) entries are this close to 4.
pub const COLLAPSE_BASE: f64 = 1e-8;
/// Relative change of the normalized metric below which a trace is
/// considered to sit on an Einstein metric.
pub const EINSTEIN_TOL: f64 = 1e-12;
/// Relative tolerance for recognizing two equal SU(2) entries.
pub const BERGER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncientStatus {
    StillPositive,
    LostPositivity,
    ConvergedCollapse,
    ConvergedEinstein,
}

impl AncientStatus {
    pub fn label(self) -> &'static str {
        match self {
            AncientStatus::StillPositive => "StillPositive",
            AncientStatus::LostPositivity => "LostPositivity",
            AncientStatus::ConvergedCollapse => "ConvergedCollapse",
            AncientStatus::ConvergedEinstein => "ConvergedEinstein",
        }
    }

    /// Whether the trace is consistent with an iteration that exists for all
    /// backward steps.
    pub fn survives(self) -> bool {
        self != AncientStatus::LostPositivity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AncientTrace {
    /// `metrics[0] = g_1`, `metrics[k] = g_{1-k}`.
    pub metrics: Vec<FamilyMetric>,
    pub steps_survived: usize,
    pub status: AncientStatus,
    /// Square root of the smallest fiber entry at each stored metric.
    pub fiber_length_proxy: Vec<f64>,
    /// The first indefinite Ricci form, when positivity was lost.
    pub offending: Option<FamilyForm>,
}

fn fiber_length(g: &FamilyMetric) -> f64 {
    match g {
        FamilyMetric::Su2(m) => m
            .entries()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
        FamilyMetric::TwoSummand(m) => m.t().sqrt(),
        FamilyMetric::FourParam(m) => m
            .fiber()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let m = v.iter().map(|c| c.abs()).fold(0.0, f64::max);
    v.iter().map(|c| c / m).collect()
}

fn projective_change(a: &FamilyMetric, b: &FamilyMetric) -> f64 {
    let (a, b) = (normalized(&a.coordinates()), normalized(&b.coordinates()));
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn collapsed(g: &FamilyMetric) -> bool {
    match g {
        FamilyMetric::Su2(m) => {
            let (x, _) = crate::geometry::sort3(m.entries());
            x[0] < COLLAPSE_FIBER
                && (x[1] - 4.0).abs() < COLLAPSE_BASE
                && (x[2] - 4.0).abs() < COLLAPSE_BASE
        }
        FamilyMetric::TwoSummand(m) => m.ratio() < COLLAPSE_FIBER,
        FamilyMetric::FourParam(m) => {
            m.normalized_fiber()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
                < COLLAPSE_FIBER
        }
    }
}

/// Two-summand and four-parameter metrics grow or shrink geometrically along
/// Einstein directions; they are rescaled to `s = 1` before leaving this range.
const SCALE_RANGE: (f64, f64) = (1e-100, 1e100);

fn keep_in_range(g: FamilyMetric) -> FamilyMetric {
    let out_of_range = |s: f64| !(SCALE_RANGE.0..=SCALE_RANGE.1).contains(&s);
    match g {
        FamilyMetric::TwoSummand(m) if out_of_range(m.s()) => FamilyMetric::TwoSummand(
            TwoSummandMetric::new(m.family, m.ratio(), 1.0).expect("positive ratio"),
        ),
        FamilyMetric::FourParam(m) if out_of_range(m.s()) => FamilyMetric::FourParam(
            FourParamMetric::new(m.n(), m.normalized_fiber(), 1.0).expect("positive fiber"),
        ),
        other => other,
    }
}

/// Runs `g_{i-1} = Ric g_i` backward from `g1` for at most `max_steps` steps.
pub fn ancient_iterate(g1: &FamilyMetric, max_steps: usize) -> AncientTrace {
    let mut trace = AncientTrace {
        metrics: vec![*g1],
        steps_survived: 0,
        status: AncientStatus::StillPositive,
        fiber_length_proxy: vec![fiber_length(g1)],
        offending: None,
    };
    let mut current = *g1;
    for _ in 0..max_steps {
        let ric = current.ricci();
        let next = match ric.as_metric() {
            Some(m) if positivity_check(&ric, 0.0) => keep_in_range(m),
            _ => {
                trace.status = AncientStatus::LostPositivity;
                trace.offending = Some(ric);
                return trace;
            }
        };
        if next
            .coordinates()
            .iter()
            .any(|c| !c.is_finite() || *c < f64::MIN_POSITIVE)
        {
            return trace;
        }
        trace.metrics.push(next);
        trace.fiber_length_proxy.push(fiber_length(&next));
        trace.steps_survived += 1;
        if collapsed(&next) {
            trace.status = AncientStatus::ConvergedCollapse;
            return trace;
        }
        if projective_change(&current, &next) < EINSTEIN_TOL {
            trace.status = AncientStatus::ConvergedEinstein;
            return trace;
        }
        current = next;
    }
    trace
}

/// A metric `scale · (ν, 2, 2)` up to a permutation of the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergerForm {
    pub nu: f64,
    pub scale: f64,
    /// `x[basis_permutation[k]]` is the `k`-th entry of `scale · (ν, 2, 2)`.
    pub basis_permutation: [usize; 3],
}

impl BergerForm {
    /// Recognizes a Berger metric when two entries agree to `1e-12` relative.
    pub fn from_triple(x: [f64; 3]) -> Option<Self> {
        let max = x.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) || x.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        // Prefer the pair with the smallest gap so a round metric is read as ν = 2.
        let (gap, i) = [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)]
            .iter()
            .map(|&(i, j, k)| ((x[j] - x[k]).abs(), i))
            .min_by(|a, b| a.0.total_cmp(&b.0))?;
        if gap > BERGER_TOL * max {
            return None;
        }
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let scale = 0.25 * (x[j] + x[k]);
        Some(Self {
            nu: x[i] / scale,
            scale,
            basis_permutation: [i, j.min(k), j.max(k)],
        })
    }

    pub fn metric(&self) -> Su2Metric {
        let mut x = [0.0; 3];
        x[self.basis_permutation[0]] = self.scale * self.nu;
        x[self.basis_permutation[1]] = 2.0 * self.scale;
        x[self.basis_permutation[2]] = 2.0 * self.scale;
        Su2Metric::from_array(x).expect("positive Berger entries")
    }
}

/// Whether a left-invariant metric on SU(2) admits an ancient Ricci iteration:
/// exactly the Berger metrics `c (ν, 2, 2)` with `ν ≤ 2`.
pub fn classify_ancient_su2(g: &Su2Metric) -> bool {
    BergerForm::from_triple(g.entries()).is_some_and(|b| b.nu <= 2.0 * (1.0 + BERGER_TOL))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AncientSummary {
    pub point: FamilyMetric,
    pub steps_survived: usize,
    pub status: AncientStatus,
}

/// Runs [`ancient_iterate`] on every point; results keep the input order.
pub fn ancient_region_scan(points: &[FamilyMetric], max_steps: usize) -> Vec<AncientSummary> {
    points
        .par_iter()
        .map(|p| {
            let trace = ancient_iterate(p, max_steps);
            AncientSummary {
                point: *p,
                steps_survived: trace.steps_survived,
                status: trace.status,
            }
        })
        .collect()
}

impl AncientTrace {
    /// Largest relative defect of `metrics[k+1] = Ric(metrics[k])` up to the
    /// rescalings applied to keep values in range.
    pub fn defect(&self) -> f64 {
        self.metrics
            .windows(2)
            .map(|w| projective_change(&w[1], &w[0].ricci().as_metric().unwrap_or(w[1])))
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &FamilyMetric {
        self.metrics.last().expect("traces are never empty")
    }

    /// Coefficients of the offending form, if any.
    pub fn offending_coefficients(&self) -> Option<Vec<f64>> {
        self.offending.as_ref().map(|f| f.coefficients())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FibrationFamily;

    fn su2(x: [f64; 3]) -> FamilyMetric {
        FamilyMetric::Su2(Su2Metric::from_array(x).unwrap())
    }

    #[test]
    fn berger_collapse() {
        let trace = ancient_iterate(&su2([1.0, 2.0, 2.0]), 50);
        assert_eq!(trace.status, AncientStatus::ConvergedCollapse);
        assert!(trace.steps_survived <= 20);
        assert_eq!(trace.metrics[1].coordinates(), vec![0.5, 3.0, 3.0]);
        let third = trace.metrics[2].coordinates();
        assert!((third[0] - 1.0 / 18.0).abs() < 1e-15);
        assert!((third[1] - 11.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn loss_of_positivity() {
        let trace = ancient_iterate(&su2([3.0, 2.0, 2.0]), 50);
        assert_eq!(trace.status, AncientStatus::LostPositivity);
        assert_eq!(trace.steps_survived, 1);
        assert_eq!(trace.metrics[1].coordinates(), vec![4.5, 1.0, 1.0]);
        assert_eq!(
            trace.offending_coefficients().unwrap(),
            vec![40.5, -5.0, -5.0]
        );

        let trace = ancient_iterate(&su2([1.0, 2.0, 3.0]), 50);
        assert_eq!(trace.steps_survived, 0);
        assert_eq!(trace.offending_coefficients().unwrap(), vec![0.0, 0.0, 8.0]);
    }

    #[test]
    fn round_is_einstein() {
        let trace = ancient_iterate(&su2([2.0, 2.0, 2.0]), 50);
        assert_eq!(trace.status, AncientStatus::ConvergedEinstein);
    }

    #[test]
    fn berger_recognition() {
        let b = BergerForm::from_triple([2.0, 0.5, 2.0]).unwrap();
        assert!((b.nu - 0.5).abs() < 1e-15 && (b.scale - 1.0).abs() < 1e-15);
        assert_eq!(b.basis_permutation, [1, 0, 2]);
        assert_eq!(b.metric().entries(), [2.0, 0.5, 2.0]);
        assert!(BergerForm::from_triple([1.0, 2.0, 3.0]).is_none());

        let m = |x| Su2Metric::from_array(x).unwrap();
        assert!(classify_ancient_su2(&m([1.0, 2.0, 2.0])));
        assert!(classify_ancient_su2(&m([6.0, 6.0, 6.0])));
        assert!(!classify_ancient_su2(&m([3.0, 2.0, 2.0])));
        assert!(!classify_ancient_su2(&m([1.0, 2.0, 3.0])));
    }

    #[test]
    fn sp1_ancient_threshold() {
        let fam = FibrationFamily::sp1(1).unwrap();
        let pts: Vec<FamilyMetric> = [0.5, 1.0, 1.2]
            .iter()
            .map(|&r| FamilyMetric::TwoSummand(TwoSummandMetric::new(fam, r, 1.0).unwrap()))
            .collect();
        let out = ancient_region_scan(&pts, 100);
        assert_eq!(out[0].status, AncientStatus::ConvergedEinstein);
        assert_eq!(out[1].status, AncientStatus::ConvergedEinstein);
        assert_eq!(out[2].status, AncientStatus::LostPositivity);
        let FamilyMetric::TwoSummand(last) = *ancient_iterate(&pts[0], 100).last() else {
            panic!()
        };
        assert!((last.ratio() - 0.2).abs() < 1e-10);
    }
}
