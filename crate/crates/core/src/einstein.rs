//! Einstein metrics in each family and the `Sp(1)`-invariance scan on
//! `S^{4n+3}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{
    ricci_four_param, su2_ricci_raw, FamilyMetric, FibrationFamily, FourParamMetric, Su2Metric,
    SymmetricForm, TwoSummandMetric,
};

/// Family selector for the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogFamily {
    Su2,
    TwoSummand(FibrationFamily),
    /// `S^{4n+3}` with four-parameter metrics.
    FourParam(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EinsteinShape {
    /// Fiber-to-horizontal ratio `t/s`.
    Ratio(f64),
    /// The round metric of SU(2).
    Round,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinEntry {
    pub family: CatalogFamily,
    pub shape: EinsteinShape,
    pub einstein_constant: f64,
    /// A representative metric (`s = 1`, or `(2,2,2)` on SU(2)).
    pub metric: FamilyMetric,
}

/// Positive roots of `p2 r² + p1 r + p0`, ascending.
fn positive_quadratic_roots(p2: f64, p1: f64, p0: f64) -> Vec<f64> {
    let disc = p1 * p1 - 4.0 * p2 * p0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (p1 + p1.signum() * disc.sqrt());
    let mut roots = vec![q / p2];
    if q != 0.0 {
        roots.push(p0 / q);
    }
    roots.retain(|r| *r > 0.0);
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

/// Einstein ratios `t/s` of a two-summand family, from its Einstein quadratic.
pub fn einstein_ratios(family: FibrationFamily) -> Vec<f64> {
    let (p2, p1, p0) = family.einstein_quadratic();
    positive_quadratic_roots(p2, p1, p0)
}

/// Every Einstein metric of the family, up to scale and isometry.
pub fn einstein_list(family: CatalogFamily) -> Vec<EinsteinEntry> {
    match family {
        CatalogFamily::Su2 => {
            let metric = FamilyMetric::Su2(Su2Metric::new(2.0, 2.0, 2.0).expect("round"));
            vec![EinsteinEntry {
                family,
                shape: EinsteinShape::Round,
                einstein_constant: 1.0,
                metric,
            }]
        }
        CatalogFamily::TwoSummand(fam) => einstein_ratios(fam)
            .into_iter()
            .map(|r| {
                let g = TwoSummandMetric::new(fam, r, 1.0).expect("positive ratio");
                let metric = FamilyMetric::TwoSummand(g);
                EinsteinEntry {
                    family,
                    shape: EinsteinShape::Ratio(r),
                    einstein_constant: fam.ricci_coefficients(r).1,
                    metric,
                }
            })
            .collect(),
        CatalogFamily::FourParam(n) => {
            let Ok(fam) = FibrationFamily::sp1(n) else {
                return Vec::new();
            };
            einstein_ratios(fam)
                .into_iter()
                .map(|r| {
                    let g = FourParamMetric::symmetric(n, r, 1.0).expect("positive ratio");
                    EinsteinEntry {
                        family,
                        shape: EinsteinShape::Ratio(r),
                        einstein_constant: ricci_four_param(&g).b,
                        metric: FamilyMetric::FourParam(g),
                    }
                })
                .collect()
        }
    }
}

/// Returns `λ` with `Ric g = λ g` when every coefficient matches to `tol`
/// relative to `max |λ g|`.
pub fn is_einstein(g: &FamilyMetric, tol: f64) -> Option<f64> {
    let ric = g.ricci().coefficients();
    let x = g.coordinates();
    let lambda =
        ric.iter().zip(&x).map(|(r, v)| r * v).sum::<f64>() / x.iter().map(|v| v * v).sum::<f64>();
    let scale = x
        .iter()
        .map(|v| (lambda * v).abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let defect = ric
        .iter()
        .zip(&x)
        .map(|(r, v)| (r - lambda * v).abs())
        .fold(0.0, f64::max);
    (defect <= tol * scale).then_some(lambda)
}

/// Fiber Ricci coefficients `a_i` of `g_{(x1,x2,x3,1)}`.
pub fn fiber_coefficients(n: u32, x: [f64; 3]) -> [f64; 3] {
    let nf = 4.0 * f64::from(n);
    let r = su2_ricci_raw(&x);
    std::array::from_fn(|i| nf * x[i] * x[i] + r[i])
}

/// Relative defects of the two difference identities
/// `(x1-x2)(4nP + 4(x1+x2-x3) + a2 x3) = (a1-a2) x2 x3` and
/// `(x2-x3)(4nP + 4(x2+x3-x1) + a3 x1) = (a2-a3) x1 x3`, `P = x1 x2 x3`.
pub fn difference_identity_defects(n: u32, x: [f64; 3]) -> [f64; 2] {
    let a = fiber_coefficients(n, x);
    let nf = 4.0 * f64::from(n);
    let p = x[0] * x[1] * x[2];
    let check = |i: usize, j: usize, k: usize| {
        let bracket = [nf * p, 4.0 * (x[i] + x[j] - x[k]), a[j] * x[k]];
        let lhs = (x[i] - x[j]) * bracket.iter().sum::<f64>();
        let rhs = (a[i] - a[j]) * x[j] * x[k];
        let scale = (x[i] - x[j]).abs() * bracket.iter().map(|v| v.abs()).sum::<f64>()
            + (a[i].abs() + a[j].abs()) * x[j] * x[k];
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        }
    };
    [check(0, 1, 2), check(1, 2, 0)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessPoint {
    pub x: [f64; 3],
    pub a: [f64; 3],
    pub a_spread: f64,
    pub x_spread: f64,
    /// Equal `a_i` with unequal `x_i`: an `Sp(1)`-invariant Ricci form on a
    /// metric that is not `Sp(1)`-invariant.
    pub flagged: bool,
    pub identity_defect: f64,
}

fn spread(v: &[f64; 3]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn uniqueness_point(n: u32, x: [f64; 3], a_tol: f64, x_tol: f64) -> UniquenessPoint {
    let a = fiber_coefficients(n, x);
    let (a_spread, x_spread) = (spread(&a), spread(&x));
    let [d1, d2] = difference_identity_defects(n, x);
    UniquenessPoint {
        x,
        a,
        a_spread,
        x_spread,
        flagged: a_spread <= a_tol && x_spread > x_tol,
        identity_defect: d1.max(d2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub n: u32,
    pub samples: usize,
    pub flagged: Vec<UniquenessPoint>,
    pub max_identity_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessScan {
    pub n: u32,
    pub samples: usize,
    /// Seed of the `ChaCha8` generator drawing the triples.
    pub seed: u64,
    /// Each `x_i` is drawn uniformly from this interval.
    pub range: (f64, f64),
    pub a_tol: f64,
    pub x_tol: f64,
}

impl UniquenessScan {
    pub fn new(n: u32, samples: usize, seed: u64) -> Self {
        Self {
            n,
            samples,
            seed,
            range: (0.1, 5.0),
            a_tol: 1e-9,
            x_tol: 1e-6,
        }
    }

    pub fn sample_points(&self) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = self.range;
        (0..self.samples)
            .map(|_| std::array::from_fn(|_| rng.gen_range(lo..hi)))
            .collect()
    }
}

/// Random search for non-`Sp(1)`-invariant metrics whose fiber Ricci
/// coefficients coincide, with the difference identities checked at every
/// sample.
pub fn sp1_uniqueness_scan(scan: &UniquenessScan) -> UniquenessReport {
    let points = scan.sample_points();
    let results: Vec<UniquenessPoint> = points
        .par_iter()
        .map(|&x| uniqueness_point(scan.n, x, scan.a_tol, scan.x_tol))
        .collect();
    UniquenessReport {
        n: scan.n,
        samples: results.len(),
        max_identity_defect: results
            .iter()
            .map(|p| p.identity_defect)
            .fold(0.0, f64::max),
        flagged: results.into_iter().filter(|p| p.flagged).collect(),
    }
}
