use hopf_ricci::ancient::*;
use hopf_ricci::einstein::*;
use hopf_ricci::geometry::*;
use hopf_ricci::iteration::*;
use hopf_ricci::prescribed::*;
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    (-2.3f64..2.3).prop_map(f64::exp)
}

fn triple() -> impl Strategy<Value = [f64; 3]> {
    [entry(), entry(), entry()]
}

fn sup_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).map(|v| v.abs()).fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn solve(t: [f64; 3]) -> SolveResult<Su2Metric> {
    solve_su2(&DiagonalForm3 { r: t }, &Su2SolveOptions::default()).unwrap()
}

proptest! {
    #[test]
    fn su2_ricci_is_scale_invariant(x in triple(), lambda in 0.01f64..100.0) {
        let g = Su2Metric::from_array(x).unwrap();
        let a = ricci_su2(&g).r;
        let b = ricci_su2(&g.scaled(lambda).unwrap()).r;
        prop_assert!(sup_rel(&a, &b) < 1e-12);
    }

    #[test]
    fn su2_ricci_is_permutation_equivariant(x in triple()) {
        let r = ricci_su2(&Su2Metric::from_array(x).unwrap()).r;
        for p in [[1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0]] {
            let rp = ricci_su2(&Su2Metric::from_array(p.map(|i| x[i])).unwrap()).r;
            prop_assert!(sup_rel(&rp, &p.map(|i| r[i])) < 1e-12);
        }
    }

    #[test]
    fn two_summand_and_four_param_are_scale_invariant(
        t in entry(), s in entry(), lambda in 0.01f64..100.0, n in 1u32..5
    ) {
        let fam = FibrationFamily::sp1(n).unwrap();
        let a = ricci_two_summand(&TwoSummandMetric::new(fam, t, s).unwrap());
        let b = ricci_two_summand(&TwoSummandMetric::new(fam, lambda * t, lambda * s).unwrap());
        prop_assert!(sup_rel(&[a.vertical, a.horizontal], &[b.vertical, b.horizontal]) < 1e-12);
        let g = FourParamMetric::new(n, [t, 1.3 * t, 0.7 * t], s).unwrap();
        let h = FourParamMetric::new(n, [lambda * t, 1.3 * lambda * t, 0.7 * lambda * t], lambda * s).unwrap();
        prop_assert!(sup_rel(&ricci_four_param(&g).coefficients(), &ricci_four_param(&h).coefficients()) < 1e-12);
    }

    #[test]
    fn canonicalization_is_idempotent(x in triple(), s in entry()) {
        let g = Su2Metric::from_array(x).unwrap();
        prop_assert_eq!(g.canonicalized(), g.canonicalized().canonicalized());
        let h = FourParamMetric::new(2, x, s).unwrap();
        prop_assert_eq!(h.canonicalized(), h.canonicalized().canonicalized());
        let sorted = g.canonicalized().entries();
        prop_assert!(sorted[0] <= sorted[1] && sorted[1] <= sorted[2]);
    }

    #[test]
    fn su2_solution_satisfies_equation(t in triple()) {
        let res = solve(t);
        let ric = ricci_su2(&res.metric).r;
        let ct = t.map(|v| v * res.kappa);
        prop_assert!(sup_rel(&ric, &ct) < 1e-10);
        prop_assert!(res.kappa > 0.0);
    }

    #[test]
    fn su2_solution_preserves_order(t in triple()) {
        // The solution is ordered like the target.
        let x = solve(t).metric.entries();
        for i in 0..3 {
            for j in 0..3 {
                if t[i] < t[j] * (1.0 - 1e-9) {
                    prop_assert!(x[i] < x[j], "{:?} -> {:?}", t, x);
                }
            }
        }
    }

    #[test]
    fn su2_solution_is_permutation_equivariant(t in triple()) {
        let x = solve(t).metric.entries();
        let p = [2, 0, 1];
        let y = solve(p.map(|i| t[i])).metric.entries();
        prop_assert!(sup_rel(&y, &p.map(|i| x[i])) < 1e-9);
    }

    #[test]
    fn su2_solution_is_unique_across_initializations(t in triple(), inits in proptest::collection::vec(triple(), 5)) {
        let base = solve(t).metric.entries();
        for init in inits {
            let other = solve_su2_from(&DiagonalForm3 { r: t }, Some(init), &Su2SolveOptions::default())
                .unwrap()
                .metric
                .entries();
            prop_assert!(sup_rel(&base, &other) < 1e-8);
        }
    }

    #[test]
    fn c_function_routes_agree(t in triple()) {
        let cf = c_function(t).unwrap();
        prop_assert!((cf.c - solve(t).kappa).abs() < 1e-9 * cf.c);
    }

    #[test]
    fn c_function_bound(n in 1u32..=3, u in [(-6.0f64..2.0), (-6.0f64..2.0), (-6.0f64..2.0)]) {
        let lo = 1.0 / (2.0 * f64::from(n) + 4.0);
        let t = u.map(|e| lo * (1.0 + 10f64.powf(e)));
        let c = c_function(t).unwrap().c;
        prop_assert!(c < 4.0 * f64::from(n) + 8.0, "c({t:?}) = {c}");
    }

    #[test]
    fn two_summand_threshold_is_sharp(n in 1u32..6, u in -8.0f64..0.0) {
        for fam in [FibrationFamily::sp1(n).unwrap(), FibrationFamily::spin7(), FibrationFamily::cp1(n).unwrap()] {
            let th = threshold_closed_form(fam);
            let eps = 10f64.powf(u);
            prop_assert!(solve_two_summand(fam, th * (1.0 + eps), 1.0).unwrap().is_some());
            prop_assert!(solve_two_summand(fam, th * (1.0 - eps), 1.0).unwrap().is_none());
        }
    }

    #[test]
    fn two_summand_solution_satisfies_equation(n in 1u32..6, a in entry(), b in entry()) {
        let fam = FibrationFamily::sp1(n).unwrap();
        if let Some(res) = solve_two_summand(fam, a, b).unwrap() {
            let ric = ricci_two_summand(&res.metric);
            prop_assert!(sup_rel(&[ric.vertical, ric.horizontal], &[res.kappa * a, res.kappa * b]) < 1e-12);
        } else {
            prop_assert!(a / b <= two_summand_threshold(fam) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn symmetric_four_param_matches_two_summand(n in 1u32..6, x in entry(), s in entry()) {
        let four = ricci_four_param(&FourParamMetric::symmetric(n, x, s).unwrap());
        let two = ricci_two_summand(&TwoSummandMetric::new(FibrationFamily::sp1(n).unwrap(), x, s).unwrap());
        for a in four.a {
            prop_assert!((a - two.vertical).abs() <= 1e-12 * two.vertical.abs().max(1.0));
        }
        prop_assert!((four.b - two.horizontal).abs() <= 1e-12 * two.horizontal.abs().max(1.0));
    }

    #[test]
    fn f_inverse_undoes_f(n in 1u32..=4, d in [(-0.1f64..0.1), (-0.1f64..0.1), (-0.1f64..0.1)]) {
        let cfg = FMapConfig::new(n).unwrap();
        let x = d.map(|v| 1.0 + v);
        let y = f_map(n, x).unwrap();
        if cfg.contains(&y) {
            let back = f_inverse(&cfg, y).unwrap();
            prop_assert!(sup_rel(&back, &x) < 1e-10);
        }
    }

    #[test]
    fn difference_identities_hold(n in 1u32..=5, x in triple()) {
        let [d1, d2] = difference_identity_defects(n, x);
        prop_assert!(d1 <= 1e-10 && d2 <= 1e-10);
    }

    #[test]
    fn berger_subspace_is_invariant(nu in 0.05f64..3.0, scale in entry()) {
        let g = Su2Metric::new(nu * scale, 2.0 * scale, 2.0 * scale).unwrap();
        let trace = ancient_iterate(&FamilyMetric::Su2(g), 100);
        for m in &trace.metrics {
            let x = m.coordinates();
            prop_assert_eq!(x[1], x[2]);
        }
        prop_assert_eq!(trace.status.survives(), nu <= 2.0);
    }
}

#[test]
fn ricci_ratio_monotonicity() {
    // x_i/x_j >= 1 gives r_i/r_j >= x_i/x_j, and x_i/x_j < 1 gives r_i/r_j < x_i/x_j,
    // whenever r_i and r_j share a sign.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.3f64..2.3).exp());
        let r = ricci_su2(&Su2Metric::from_array(x).unwrap()).r;
        for i in 0..3 {
            for j in 0..3 {
                if i == j || r[i] * r[j] < 0.0 {
                    continue;
                }
                let (xr, rr) = (x[i] / x[j], r[i] / r[j]);
                let slack = 1e-12 * xr;
                if xr >= 1.0 {
                    assert!(rr >= xr - slack, "{x:?} -> {r:?}");
                } else {
                    assert!(rr < xr + slack, "{x:?} -> {r:?}");
                }
            }
        }
    }
}

#[test]
fn iteration_ratios_are_bounded_and_monotone() {
    for x in [
        [1.0, 2.0, 3.0],
        [0.2, 1.0, 7.0],
        [5.0, 0.3, 1.1],
        [1.0, 1.0, 4.0],
    ] {
        let trace = iterate_su2(&Su2Metric::from_array(x).unwrap(), 500, 1e-10);
        assert_eq!(trace.status, IterationStatus::Converged);
        assert!(trace.defect() < 1e-9);
        let first = trace.ratios[0];
        for k in 0..3 {
            for l in 0..3 {
                let a0 = first[k][l];
                let (lo, hi) = (a0.min(1.0), a0.max(1.0));
                let seq: Vec<f64> = trace.ratios.iter().map(|m| m[k][l]).collect();
                for a in &seq {
                    assert!(*a >= lo * (1.0 - 1e-12) && *a <= hi * (1.0 + 1e-12));
                }
                let monotone = seq.windows(2).all(|w| w[1] >= w[0] - 1e-12)
                    || seq.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                assert!(monotone, "α_{k}{l} not monotone for start {x:?}");
            }
        }
        let FamilyMetric::Su2(last) = trace.last() else {
            panic!()
        };
        assert!(last.entries().iter().all(|v| (v - 2.0).abs() < 1e-9));
    }
}

#[test]
fn ratio_recurrence() {
    // α_kl^(i) = α_kl^(i+1) (α_km² - (α_lm - 1)²) / (α_lm² - (1 - α_km)²), all
    // right-hand ratios taken at step i+1.
    let trace = iterate_su2(&Su2Metric::new(0.7, 2.0, 3.5).unwrap(), 500, 1e-10);
    for w in trace.ratios.windows(2) {
        let (now, next) = (w[0], w[1]);
        for (k, l, m) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let (akm, alm) = (next[k][m], next[l][m]);
            let predicted =
                next[k][l] * (akm * akm - (alm - 1.0).powi(2)) / (alm * alm - (1.0 - akm).powi(2));
            assert!((predicted - now[k][l]).abs() < 1e-10 * now[k][l]);
        }
    }
}

#[test]
fn f_inverse_is_a_contraction() {
    use rand::{Rng, SeedableRng};
    for n in [1, 2, 3] {
        let cfg = FMapConfig::new(n).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(u64::from(n));
        let mut worst: f64 = 0.0;
        let r = cfg.domain_radius;
        for _ in 0..1000 {
            let y: [f64; 3] = std::array::from_fn(|_| 1.0 + rng.gen_range(-r..r));
            let z: [f64; 3] = std::array::from_fn(|_| 1.0 + rng.gen_range(-r..r));
            let (fy, fz) = (f_inverse(&cfg, y).unwrap(), f_inverse(&cfg, z).unwrap());
            let num = (0..3).map(|i| (fy[i] - fz[i]).abs()).fold(0.0, f64::max);
            let den = (0..3).map(|i| (y[i] - z[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(num / den);
        }
        println!("n={n}: measured Lipschitz constant of f_inverse {worst:.4}");
        assert!(worst < 1.0, "n={n}: Lipschitz constant {worst}");
    }
}

#[test]
fn berger_collapse_is_monotone_and_quadratic() {
    for nu in [0.1, 0.5, 1.0, 1.5, 1.9] {
        let trace = ancient_iterate(
            &FamilyMetric::Su2(Su2Metric::new(nu, 2.0, 2.0).unwrap()),
            100,
        );
        assert_eq!(trace.status, AncientStatus::ConvergedCollapse, "ν = {nu}");
        assert!(trace.steps_survived <= 25);
        let xs: Vec<Vec<f64>> = trace.metrics.iter().map(|m| m.coordinates()).collect();
        for w in xs.windows(2) {
            assert!(w[1][0] < w[0][0]);
            assert!(w[1][1] > w[0][1] && w[1][1] <= 4.0);
            assert!(0.0 < w[1][0] && w[1][0] < 2.0 && 2.0 <= w[1][1]);
            let (a_now, a_next) = (w[0][0] / w[0][1], w[1][0] / w[1][1]);
            assert!((a_next - a_now * a_now / (2.0 - a_now)).abs() <= 1e-12 * a_next);
            if a_now < 0.5 {
                assert!(a_next <= a_now * a_now / 1.5);
            }
            if a_now <= 1.0 / 3.0 {
                assert!(a_next <= 0.6 * a_now * a_now);
            }
        }
        let proxy = &trace.fiber_length_proxy;
        assert!(proxy.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn backward_steps_are_recovered_by_the_solver() {
    let trace = ancient_iterate(
        &FamilyMetric::Su2(Su2Metric::new(0.8, 2.0, 2.0).unwrap()),
        6,
    );
    for w in trace.metrics.windows(2) {
        let (later, earlier) = (w[0].coordinates(), w[1].coordinates());
        let solved = solve(earlier.clone().try_into().unwrap());
        let got = solved.metric.entries();
        let sum: f64 = later.iter().sum();
        let expected: Vec<f64> = later.iter().map(|v| v * 6.0 / sum).collect();
        assert!(sup_rel(&got, &expected) < 1e-8);
    }

    let fam = FibrationFamily::cp1(2).unwrap();
    let g = TwoSummandMetric::new(fam, 0.7, 1.0).unwrap();
    let trace = ancient_iterate(&FamilyMetric::TwoSummand(g), 8);
    for w in trace.metrics.windows(2) {
        let (later, earlier) = (w[0].coordinates(), w[1].coordinates());
        let res = solve_two_summand(fam, earlier[0], earlier[1])
            .unwrap()
            .unwrap();
        assert!((res.metric.ratio() - later[0] / later[1]).abs() < 1e-8 * res.metric.ratio());
    }
}

#[test]
fn two_summand_ancient_threshold() {
    for fam in [
        FibrationFamily::sp1(1).unwrap(),
        FibrationFamily::sp1(3).unwrap(),
        FibrationFamily::spin7(),
        FibrationFamily::cp1(2).unwrap(),
    ] {
        let points: Vec<FamilyMetric> = (1..=30)
            .map(|k| {
                FamilyMetric::TwoSummand(
                    TwoSummandMetric::new(fam, 0.05 * f64::from(k), 1.0).unwrap(),
                )
            })
            .collect();
        for s in ancient_region_scan(&points, 100) {
            let r = s.point.coordinates()[0];
            if (r - 1.0).abs() >= 0.05 - 1e-12 {
                assert_eq!(s.status.survives(), r <= 1.0, "{fam:?} r = {r}");
            }
        }
    }
}

#[test]
fn einstein_quadratic_discriminant() {
    for n in 1..=10u32 {
        let (p2, p1, p0) = FibrationFamily::sp1(n).unwrap().einstein_quadratic();
        let nf = f64::from(n);
        assert_eq!(p1 * p1 - 4.0 * p2 * p0, 16.0 * (nf + 1.0).powi(2));
    }
}

#[test]
fn iteration_is_stationary_at_catalog_entries() {
    for kind in FibrationKind::ALL {
        let fam = FibrationFamily::new(kind, 2).unwrap();
        for e in einstein_list(CatalogFamily::TwoSummand(fam)) {
            let EinsteinShape::Ratio(r) = e.shape else {
                panic!()
            };
            let g = TwoSummandMetric::new(fam, r, 1.0).unwrap();
            let trace = iterate_two_summand(fam, &g, 10, 1e-10).unwrap();
            assert_eq!(trace.status, IterationStatus::Converged);
            assert_eq!(trace.steps(), 1);
        }
    }
}

#[test]
fn homotopy_symmetric_targets_match_quadratic() {
    for n in 1..=3u32 {
        let fam = FibrationFamily::sp1(n).unwrap();
        for a in [0.2, 0.5, 1.0, 2.5] {
            if a <= two_summand_threshold(fam) {
                continue;
            }
            let quad = solve_two_summand(fam, a, 1.0).unwrap().unwrap();
            let hom = solve_four_param_homotopy(
                &FourParamForm {
                    n,
                    a: [a; 3],
                    b: 1.0,
                },
                &HomotopyOptions::default(),
            )
            .unwrap();
            for x in hom.metric.normalized_fiber() {
                assert!((x - quad.metric.ratio()).abs() < 1e-8);
            }
            assert!((hom.kappa - quad.kappa).abs() < 1e-8 * quad.kappa);
        }
    }
}
