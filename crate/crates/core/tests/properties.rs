//! Property tests and the cross-module invariants that do not belong to
//! a single acceptance criterion.

use proptest::prelude::*;
use rand::Rng;
use stablefield::actions::{
    transport_triplet, ActionFamily, Cocycle, FiniteDiscreteAction, Kernel, MarkovShiftFamily,
    MmaFamily, RosinskiTriplet, SubGaussianFamily,
};
use stablefield::classifier::{classify, classify_markov_field, Verdict};
use stablefield::decomposition::central_ledger;
use stablefield::diagnostics::{
    dispersion_experiment, empirical_cf, maxima_growth, two_sample_ks, BoundedFunction,
    DispersionThresholds, EmpiricalVerdict,
};
use stablefield::fields::{FieldSampler, SimulationSettings, TripletSampler};
use stablefield::markov::TransitionSpec;
use stablefield::rng::stream_rng;
use stablefield::stable::{lp_quasi_norm, FiniteWeightedSpace};
use stablefield::{Error, FieldRealization, GroupElement, RealizationMeta, Window};

fn fixed_cycle_triplet(alpha: f64) -> RosinskiTriplet {
    let space = FiniteWeightedSpace::with_weights(vec![1.0, 0.7, 2.2, 0.4, 1.3, 0.9]).unwrap();
    let action = FiniteDiscreteAction::new(space, vec![vec![1, 2, 3, 4, 5, 0]]).unwrap();
    RosinskiTriplet::new(
        ActionFamily::FiniteDiscrete(action),
        Kernel::AtomTable(vec![0.8, -1.1, 0.3, 0.0, 1.9, -0.2]),
        Cocycle::Trivial,
        alpha,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quasi_norm_is_absolutely_homogeneous(
        f in proptest::collection::vec(-5.0f64..5.0, 4),
        weights in proptest::collection::vec(0.1f64..3.0, 4),
        lambda in -10.0f64..10.0,
        alpha in 0.1f64..1.9,
    ) {
        let space = FiniteWeightedSpace::with_weights(weights).unwrap();
        let scaled: Vec<f64> = f.iter().map(|v| lambda * v).collect();
        let lhs = lp_quasi_norm(&scaled, &space, alpha).unwrap();
        let rhs = lambda.abs() * lp_quasi_norm(&f, &space, alpha).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn selection_scale_is_stationary_under_shifts(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..4),
        ts in proptest::collection::vec(-5i64..5, 1..4),
        shift in -6i64..6,
        alpha in 0.3f64..1.9,
    ) {
        prop_assume!(coeffs.len() == ts.len());
        let triplet = fixed_cycle_triplet(alpha);
        let selection: Vec<(f64, GroupElement)> = coeffs
            .iter()
            .zip(&ts)
            .map(|(c, t)| (*c, GroupElement::new(vec![*t])))
            .collect();
        let shifted: Vec<(f64, GroupElement)> = selection
            .iter()
            .map(|(c, t)| (*c, t.add(&GroupElement::new(vec![shift]))))
            .collect();
        let a = triplet.selection_scale(&selection).unwrap();
        let b = triplet.selection_scale(&shifted).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn empirical_cf_stays_inside_the_unit_disc(
        samples in proptest::collection::vec(-50.0f64..50.0, 1..200),
        thetas in proptest::collection::vec(-4.0f64..4.0, 1..6),
    ) {
        let est = empirical_cf(&samples, &thetas).unwrap();
        for e in est {
            let modulus = (e.re * e.re + e.im * e.im).sqrt();
            prop_assert!(modulus <= 1.0 + 1e-12);
            if e.theta == 0.0 {
                prop_assert!(e.re == 1.0 && e.im == 0.0);
            }
        }
    }

    #[test]
    fn window_indexing_round_trips(
        lo in proptest::collection::vec(-8i64..8, 1..3),
        extent in proptest::collection::vec(0i64..5, 1..3),
    ) {
        prop_assume!(lo.len() == extent.len());
        let hi: Vec<i64> = lo.iter().zip(&extent).map(|(l, e)| l + e).collect();
        let window = Window::new(lo, hi).unwrap();
        let points = window.points();
        prop_assert_eq!(points.len(), window.len());
        for (i, p) in points.iter().enumerate() {
            prop_assert_eq!(window.index_of(p), Some(i));
        }
    }

    #[test]
    fn ks_p_values_are_probabilities(
        a in proptest::collection::vec(-10.0f64..10.0, 2..80),
        b in proptest::collection::vec(-10.0f64..10.0, 2..80),
    ) {
        let (d, p) = two_sample_ks(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((0.0..=1.0).contains(&p));
    }
}

struct ZeroField;

impl FieldSampler for ZeroField {
    fn dim(&self) -> usize {
        1
    }

    fn sample_at(&self, points: &[GroupElement], _seed: u64) -> Result<Vec<f64>, Error> {
        Ok(vec![0.0; points.len()])
    }

    fn realize_window(&self, window: &Window, seed: u64) -> Result<FieldRealization, Error> {
        FieldRealization::new(
            window.clone(),
            vec![0.0; window.len()],
            RealizationMeta {
                seed,
                method: "fixture".into(),
                truncation: None,
                truncated_mass: None,
                tail_magnitude: None,
            },
        )
    }
}

#[test]
fn zero_field_dispersion_is_empirically_ergodic() {
    let (verdict, table) = dispersion_experiment(
        &ZeroField,
        &BoundedFunction::cosine(),
        &[10, 100],
        30,
        DispersionThresholds::default(),
        1,
    )
    .unwrap();
    assert_eq!(verdict.verdict, EmpiricalVerdict::EmpiricallyErgodic);
    assert_eq!(verdict.rho, 0.0);
    assert!(table.sd.iter().all(|s| *s == 0.0));

    // too few realizations for a meaningful spread
    assert!(dispersion_experiment(
        &ZeroField,
        &BoundedFunction::cosine(),
        &[10, 100],
        29,
        DispersionThresholds::default(),
        1,
    )
    .is_err());
}

#[test]
fn dispersion_matrix_matches_symbolic_verdicts_at_ci_scale() {
    // the three catalog examples at R = 50, n_max = 2000, d = 1
    let h = BoundedFunction::cosine();
    let grid = [100i64, 2000];
    let thresholds = DispersionThresholds::default();

    let labels = FiniteWeightedSpace::with_weights(vec![1.0]).unwrap();
    let mma = RosinskiTriplet::new(
        ActionFamily::MixedMovingAverage(MmaFamily::new(labels, 1, 1).unwrap()),
        Kernel::MmaTable { per_label: vec![vec![0.4, 1.0, 0.4]], radius: 1 },
        Cocycle::Trivial,
        1.2,
    )
    .unwrap();
    let mma_sampler = TripletSampler::new(&mma, SimulationSettings::default());
    let (v, _) = dispersion_experiment(&mma_sampler, &h, &grid, 50, thresholds, 71).unwrap();
    assert_eq!(v.verdict, EmpiricalVerdict::EmpiricallyErgodic, "rho = {}", v.rho);

    let sub = RosinskiTriplet::new(
        ActionFamily::SubGaussianShift(SubGaussianFamily::new(1, 1.0).unwrap()),
        Kernel::CoordinateProjection,
        Cocycle::Trivial,
        1.2,
    )
    .unwrap();
    let sub_sampler = TripletSampler::new(&sub, SimulationSettings::default());
    let (v, _) = dispersion_experiment(&sub_sampler, &h, &grid, 50, thresholds, 72).unwrap();
    assert_eq!(v.verdict, EmpiricalVerdict::EmpiricallyNonErgodic, "rho = {}", v.rho);

    // all classes positive recurrent: completely non-ergodic
    let spec = TransitionSpec::finite(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            vec![0.4, 0.4, 0.2],
            vec![0.3, 0.4, 0.3],
            vec![0.2, 0.3, 0.5],
        ],
    )
    .unwrap();
    let markov = RosinskiTriplet::new(
        ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap()),
        Kernel::MarkovAnchor,
        Cocycle::Trivial,
        1.2,
    )
    .unwrap();
    let settings = SimulationSettings { lepage_truncation: 1_500, ..Default::default() };
    let markov_sampler = TripletSampler::new(&markov, settings);
    let (v, _) = dispersion_experiment(&markov_sampler, &h, &grid, 50, thresholds, 73).unwrap();
    assert_eq!(v.verdict, EmpiricalVerdict::EmpiricallyNonErgodic, "rho = {}", v.rho);
}

#[test]
fn maxima_growth_of_iid_field_matches_tail_exponent() {
    // a delta moving-average kernel makes the entries i.i.d. SαS(1)
    let alpha = 1.2;
    let labels = FiniteWeightedSpace::with_weights(vec![1.0]).unwrap();
    let iid = RosinskiTriplet::new(
        ActionFamily::MixedMovingAverage(MmaFamily::new(labels, 1, 0).unwrap()),
        Kernel::MmaTable { per_label: vec![vec![1.0]], radius: 0 },
        Cocycle::Trivial,
        alpha,
    )
    .unwrap();
    let sampler = TripletSampler::new(&iid, SimulationSettings::default());
    let growth = maxima_growth(&sampler, &[10, 30, 100, 300], 80, 17).unwrap();
    let expected = 1.0 / alpha;
    assert!(
        (growth.exponent - expected).abs() < 0.15,
        "exponent {} vs 1/alpha = {expected}",
        growth.exponent
    );

    // degenerate fields are rejected
    assert!(matches!(
        maxima_growth(&ZeroField, &[10, 100], 20, 1),
        Err(Error::ModelPrecondition(_))
    ));

    // dissipative maxima grow at least as fast as conservative ones
    let sub = RosinskiTriplet::new(
        ActionFamily::SubGaussianShift(SubGaussianFamily::new(1, 1.0).unwrap()),
        Kernel::CoordinateProjection,
        Cocycle::Trivial,
        alpha,
    )
    .unwrap();
    let sub_sampler = TripletSampler::new(&sub, SimulationSettings::default());
    let sub_growth = maxima_growth(&sub_sampler, &[10, 30, 100, 300], 80, 18).unwrap();
    assert!(
        growth.exponent >= sub_growth.exponent - 0.05,
        "ordering violated: {} vs {}",
        growth.exponent,
        sub_growth.exponent
    );
}

#[test]
fn markov_theorem_route_agrees_with_decomposition_route() {
    // 50 randomized finite chains (single and multi block); the
    // recurrence route cross-checks the decomposition route internally
    let mut rng = stream_rng(9, "route-agreement");
    for trial in 0..50u64 {
        let blocks = rng.random_range(1..=2usize);
        let members: Vec<TransitionSpec> = (0..blocks)
            .map(|b| {
                let n = rng.random_range(2..=6usize);
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    let mut row: Vec<f64> =
                        (0..n).map(|_| rng.random::<f64>() + 0.02).collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|p| *p /= s);
                    let drift: f64 = 1.0 - row.iter().sum::<f64>();
                    row[0] += drift;
                    rows.push(row);
                }
                TransitionSpec::finite(
                    (0..n).map(|i| format!("b{b}s{i}")).collect(),
                    rows,
                )
                .unwrap()
            })
            .collect();
        let spec = if members.len() == 1 {
            members.into_iter().next().unwrap()
        } else {
            TransitionSpec::union(members).unwrap()
        };
        let c = classify_markov_field(&spec, 1.3)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        assert_eq!(c.verdict, Verdict::CompletelyNonErgodic, "trial {trial}");
    }

    // and the standing fixtures
    assert_eq!(
        classify_markov_field(&TransitionSpec::random_walk(0.5).unwrap(), 1.3)
            .unwrap()
            .verdict,
        Verdict::ErgodicWeaklyMixing
    );
    assert_eq!(
        classify_markov_field(&TransitionSpec::birth_death(vec![1.0], 0.5).unwrap(), 1.3)
            .unwrap()
            .verdict,
        Verdict::ErgodicWeaklyMixing
    );
    assert_eq!(
        classify_markov_field(&TransitionSpec::birth_death(vec![1.0], 0.3).unwrap(), 1.3)
            .unwrap()
            .verdict,
        Verdict::CompletelyNonErgodic
    );
}

#[test]
fn transport_preserves_ledger_shape_and_verdict() {
    let mut rng = stream_rng(31, "ledger-transport");
    for _ in 0..20 {
        let triplet = fixed_cycle_triplet(1.4);
        let n = 6;
        let mut h: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            h.swap(i, rng.random_range(0..=i));
        }
        let b: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let target = FiniteWeightedSpace::with_weights(
            (0..n).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect(),
        )
        .unwrap();
        let moved = transport_triplet(&triplet, &h, &b, target).unwrap();

        let before = central_ledger(triplet.family()).unwrap();
        let after = central_ledger(moved.family()).unwrap();
        let shape = |ledger: &stablefield::decomposition::CentralLedger| {
            let mut v: Vec<(String, bool)> = ledger
                .entries
                .iter()
                .map(|e| (format!("{:?}", e.factor_type), e.mass.is_finite()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(shape(&before), shape(&after));

        let verdict_before = classify(&triplet).unwrap().verdict;
        let verdict_after = classify(&moved).unwrap().verdict;
        assert_eq!(verdict_before, verdict_after);
    }
}

#[test]
fn verdict_survives_re_anchoring() {
    let spec = TransitionSpec::union(vec![
        TransitionSpec::finite(
            vec!["a".into(), "b".into()],
            vec![vec![0.5, 0.5], vec![0.25, 0.75]],
        )
        .unwrap(),
        TransitionSpec::random_walk(0.5).unwrap(),
    ])
    .unwrap();
    let default_family = MarkovShiftFamily::new(spec.clone()).unwrap();
    let re_anchored = MarkovShiftFamily::new(spec)
        .unwrap()
        .with_anchor(0, 1)
        .unwrap()
        .with_anchor(1, -7)
        .unwrap();
    for family in [default_family, re_anchored] {
        let triplet = RosinskiTriplet::new(
            ActionFamily::MarkovShift(family),
            Kernel::MarkovAnchor,
            Cocycle::Trivial,
            1.2,
        )
        .unwrap();
        assert_eq!(classify(&triplet).unwrap().verdict, Verdict::MixedErgodicity);
    }
}
