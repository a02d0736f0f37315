//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use rand::Rng;
use stablefield::actions::{
    transport_triplet, verify_action_axioms, verify_cocycle, verify_rn_chain_rule, ActionFamily,
    Cocycle, CocycleTable, FiniteDiscreteAction, Kernel, MarkovShiftFamily, MmaFamily,
    RosinskiTriplet, SubGaussianFamily,
};
use stablefield::classifier::{classify, classify_markov_field, Verdict, VerdictBasis};
use stablefield::decomposition::{
    central_ledger, decomposition_consistency, neveu_decomposition, FactorType,
};
use stablefield::diagnostics::{
    dispersion_experiment, empirical_cf, ks_distance, scale_fit, stationarity_test,
    BoundedFunction, DispersionThresholds, EmpiricalVerdict,
};
use stablefield::fields::{FieldSampler, SimulationSettings, TripletSampler};
use stablefield::markov::{classify_recurrence, communication_classes, RecurrenceType, TransitionSpec};
use stablefield::rng::{stream_rng, stream_seed};
use stablefield::stable::{
    combination_scale, sample_sas, simulate_discrete_integral, FiniteWeightedSpace, StableParams,
};
use stablefield::{GroupElement, Window};

fn mma_triplet(alpha: f64) -> RosinskiTriplet {
    let labels = FiniteWeightedSpace::new(
        vec!["slow".into(), "fast".into()],
        vec![0.6, 0.4],
    )
    .unwrap();
    let family = ActionFamily::MixedMovingAverage(MmaFamily::new(labels, 1, 2).unwrap());
    RosinskiTriplet::new(
        family,
        Kernel::MmaTable {
            per_label: vec![
                vec![0.2, 0.5, 1.0, 0.5, 0.2],
                vec![0.0, 0.3, 0.8, 0.3, 0.0],
            ],
            radius: 2,
        },
        Cocycle::Trivial,
        alpha,
    )
    .unwrap()
}

fn subgaussian_triplet(alpha: f64) -> RosinskiTriplet {
    RosinskiTriplet::new(
        ActionFamily::SubGaussianShift(SubGaussianFamily::new(1, 1.0).unwrap()),
        Kernel::CoordinateProjection,
        Cocycle::Trivial,
        alpha,
    )
    .unwrap()
}

fn markov_triplet(spec: TransitionSpec, alpha: f64) -> RosinskiTriplet {
    RosinskiTriplet::new(
        ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap()),
        Kernel::MarkovAnchor,
        Cocycle::Trivial,
        alpha,
    )
    .unwrap()
}

fn finite_chain(states: usize, seed: u64) -> TransitionSpec {
    // strictly positive rows keep the class irreducible and aperiodic
    let mut rng = stream_rng(seed, "finite-chain");
    let mut rows = Vec::with_capacity(states);
    for _ in 0..states {
        let mut row: Vec<f64> = (0..states).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
        let drift: f64 = 1.0 - row.iter().sum::<f64>();
        row[0] += drift;
        rows.push(row);
    }
    TransitionSpec::finite((0..states).map(|i| format!("s{i}")).collect(), rows).unwrap()
}

/// The 20 Markov fixtures with the verdicts the recurrence dichotomy
/// dictates.
fn markov_fixture_matrix() -> Vec<(&'static str, TransitionSpec, Verdict)> {
    use Verdict::*;
    let srw = || TransitionSpec::random_walk(0.5).unwrap();
    let bd_null = |head: Vec<f64>| TransitionSpec::birth_death(head, 0.5).unwrap();
    let bd_pos = |head: Vec<f64>, tail: f64| TransitionSpec::birth_death(head, tail).unwrap();
    let union = |ms: Vec<TransitionSpec>| TransitionSpec::union(ms).unwrap();
    vec![
        ("finite-3", finite_chain(3, 1), CompletelyNonErgodic),
        ("finite-2", finite_chain(2, 2), CompletelyNonErgodic),
        ("finite-4", finite_chain(4, 3), CompletelyNonErgodic),
        ("finite-5", finite_chain(5, 4), CompletelyNonErgodic),
        ("finite-6", finite_chain(6, 5), CompletelyNonErgodic),
        ("finite-blocks", union(vec![finite_chain(2, 6), finite_chain(3, 7)]), CompletelyNonErgodic),
        ("srw-half", srw(), ErgodicWeaklyMixing),
        ("bd-null-reflect", bd_null(vec![1.0]), ErgodicWeaklyMixing),
        ("bd-null-head", bd_null(vec![0.7, 0.6]), ErgodicWeaklyMixing),
        ("bd-null-lazy", bd_null(vec![0.5]), ErgodicWeaklyMixing),
        ("bd-pos-03", bd_pos(vec![1.0], 0.3), CompletelyNonErgodic),
        ("bd-pos-045", bd_pos(vec![0.9], 0.45), CompletelyNonErgodic),
        ("bd-pos-02", bd_pos(vec![0.8, 0.7], 0.2), CompletelyNonErgodic),
        ("mixed-finite-srw", union(vec![finite_chain(2, 8), srw()]), MixedErgodicity),
        ("mixed-finite-bdnull", union(vec![finite_chain(3, 9), bd_null(vec![1.0])]), MixedErgodicity),
        ("mixed-bdpos-srw", union(vec![bd_pos(vec![1.0], 0.3), srw()]), MixedErgodicity),
        ("mixed-bdpos-bdnull", union(vec![bd_pos(vec![0.9], 0.4), bd_null(vec![0.6])]), MixedErgodicity),
        ("mixed-blocks-srw", union(vec![finite_chain(2, 10), finite_chain(2, 11), srw()]), MixedErgodicity),
        ("null-null", union(vec![srw(), bd_null(vec![0.8])]), ErgodicWeaklyMixing),
        ("pos-pos", union(vec![finite_chain(4, 12), bd_pos(vec![1.0], 0.35)]), CompletelyNonErgodic),
    ]
}

#[test]
fn criterion_1_symbolic_classification_matrix() {
    let start = std::time::Instant::now();
    let alpha = 1.2;

    let mma = classify(&mma_triplet(alpha)).unwrap();
    assert_eq!(mma.verdict, Verdict::ErgodicWeaklyMixing);
    assert_eq!(mma.basis, VerdictBasis::LedgerRoute);

    let sub = classify(&subgaussian_triplet(alpha)).unwrap();
    assert_eq!(sub.verdict, Verdict::CompletelyNonErgodic);
    assert_eq!(sub.basis, VerdictBasis::LedgerRoute);

    let fixtures = markov_fixture_matrix();
    assert_eq!(fixtures.len(), 20);
    for (name, spec, expected) in &fixtures {
        // the recurrence route, which internally cross-checks the
        // decomposition route
        let c = classify_markov_field(spec, alpha)
            .unwrap_or_else(|e| panic!("fixture {name}: {e}"));
        assert_eq!(c.verdict, *expected, "fixture {name}");
        assert_eq!(c.basis, VerdictBasis::LedgerRoute, "fixture {name}");

        // and the two routes recomputed independently of `classify`
        let family = ActionFamily::MarkovShift(MarkovShiftFamily::new(spec.clone()).unwrap());
        let neveu = neveu_decomposition(&family).unwrap();
        let neveu_verdict = if neveu.positive_is_empty() {
            Verdict::ErgodicWeaklyMixing
        } else if neveu.null_is_empty() {
            Verdict::CompletelyNonErgodic
        } else {
            Verdict::MixedErgodicity
        };
        let ledger = central_ledger(&family).unwrap();
        let ledger_verdict = if ledger.admits_no_ii1().unwrap() {
            Verdict::ErgodicWeaklyMixing
        } else if ledger.admits_only_ii1().unwrap() {
            Verdict::CompletelyNonErgodic
        } else {
            Verdict::MixedErgodicity
        };
        assert_eq!(neveu_verdict, *expected, "fixture {name} via the positive/null split");
        assert_eq!(ledger_verdict, *expected, "fixture {name} via the ledger");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!(
        "[PASS] criterion 1: 22 symbolic verdicts, both routes, 100% agreement in {elapsed:?}"
    );
}

#[test]
fn criterion_2_ledger_types() {
    let alpha = 1.2;
    let mma = central_ledger(mma_triplet(alpha).family()).unwrap();
    assert!(mma.entries.iter().all(|e| e.factor_type == FactorType::IIInfinity));

    let sub = central_ledger(subgaussian_triplet(alpha).family()).unwrap();
    assert_eq!(sub.entries.len(), 1);
    assert_eq!(sub.entries[0].factor_type, FactorType::II1);

    let mut checked = 0;
    for (name, spec, _) in markov_fixture_matrix() {
        let classes = communication_classes(&spec).unwrap();
        let family = ActionFamily::MarkovShift(MarkovShiftFamily::new(spec.clone()).unwrap());
        let ledger = central_ledger(&family).unwrap();
        assert_eq!(ledger.entries.len(), classes.len());
        for (entry, class) in ledger.entries.iter().zip(&classes) {
            let positive =
                classify_recurrence(class, &spec) == RecurrenceType::PositiveRecurrent;
            let expected = if positive { FactorType::II1 } else { FactorType::IIInfinity };
            assert_eq!(entry.factor_type, expected, "fixture {name}, class {}", class.id);
            checked += 1;
        }
    }
    println!(
        "[PASS] criterion 2: factor types match positivity on {checked} Markov classes plus both extremes"
    );
}

/// A random product-of-cycles action on ≤ 12 atoms in dimension ≤ 2,
/// with random weights, kernel, and a coboundary-times-character
/// cocycle.
fn random_finite_triplet(rng: &mut impl Rng) -> RosinskiTriplet {
    let d = rng.random_range(1..=2usize);
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    let mut total = 0usize;
    let blocks = rng.random_range(1..=2usize);
    for _ in 0..blocks {
        let m = rng.random_range(2..=3usize);
        let n = if d == 2 { rng.random_range(1..=2usize) } else { 1 };
        if total + m * n <= 12 {
            sizes.push((m, n));
            total += m * n;
        }
    }
    if sizes.is_empty() {
        sizes.push((3, 1));
        total = 3;
    }

    let mut gen1 = vec![0usize; total];
    let mut gen2 = vec![0usize; total];
    let mut base = 0usize;
    for (m, n) in &sizes {
        for i in 0..*m {
            for j in 0..*n {
                let idx = base + i * n + j;
                gen1[idx] = base + ((i + 1) % m) * n + j;
                gen2[idx] = base + i * n + (j + 1) % n;
            }
        }
        base += m * n;
    }
    let generators = if d == 1 { vec![gen1] } else { vec![gen1, gen2] };

    let weights: Vec<f64> = (0..total).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    let space = FiniteWeightedSpace::with_weights(weights).unwrap();
    let action = FiniteDiscreteAction::new(space, generators.clone()).unwrap();

    let mut kernel: Vec<f64> = (0..total).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
    let mut base = 0usize;
    for (m, n) in &sizes {
        // keep every orbit inside the support union
        kernel[base] = 1.0 + rng.random::<f64>();
        base += m * n;
    }

    // a coboundary times a per-direction character always satisfies the
    // cocycle identity
    let b: Vec<i8> = (0..total).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let tables: Vec<Vec<i8>> = generators
        .iter()
        .map(|g| {
            let chi: i8 = if rng.random::<bool>() { 1 } else { -1 };
            (0..total).map(|s| chi * b[s] * b[g[s]]).collect()
        })
        .collect();
    let cocycle = Cocycle::FiniteTable(CocycleTable::new(&action, tables).unwrap());

    let alpha = 0.4 + 1.4 * rng.random::<f64>();
    RosinskiTriplet::new(
        ActionFamily::FiniteDiscrete(action),
        Kernel::AtomTable(kernel),
        cocycle,
        alpha,
    )
    .unwrap()
}

#[test]
fn criterion_3_transport_invariance() {
    let start = std::time::Instant::now();
    let mut rng = stream_rng(2024, "transport-acceptance");
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let triplet = random_finite_triplet(&mut rng);
        let (n, d) = match triplet.family() {
            ActionFamily::FiniteDiscrete(a) => (a.space().len(), a.dim()),
            _ => unreachable!(),
        };
        // random bijection by repeated swaps
        let mut h: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            h.swap(i, rng.random_range(0..=i));
        }
        let b: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let target = FiniteWeightedSpace::with_weights(
            (0..n).map(|_| 0.25 + 2.0 * rng.random::<f64>()).collect(),
        )
        .unwrap();
        let moved = transport_triplet(&triplet, &h, &b, target)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));

        for _ in 0..50 {
            let k = rng.random_range(1..=4usize);
            let selection: Vec<(f64, GroupElement)> = (0..k)
                .map(|_| {
                    let c = 4.0 * rng.random::<f64>() - 2.0;
                    let t = GroupElement::new(
                        (0..d).map(|_| rng.random_range(-4..=4i64)).collect(),
                    );
                    (c, t)
                })
                .collect();
            let s1 = triplet.selection_scale(&selection).unwrap();
            let s2 = moved.selection_scale(&selection).unwrap();
            let rel = (s1 - s2).abs() / s1.abs().max(1.0);
            worst = worst.max(rel);
            assert!(rel <= 1e-12, "trial {trial}: {s1} vs {s2} (rel {rel:.3e})");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!(
        "[PASS] criterion 3: 2500 selection scales invariant under transport (worst rel {worst:.2e}) in {elapsed:?}"
    );
}

#[test]
fn criterion_4_stable_law_correctness() {
    let start = std::time::Instant::now();

    // closed-form Cauchy CDF against 10^5 transform samples
    let cauchy = StableParams::new(1.0, 1.0).unwrap();
    let mut rng = stream_rng(4, "acceptance-cauchy");
    let samples: Vec<f64> = (0..100_000).map(|_| sample_sas(&cauchy, &mut rng)).collect();
    let d = ks_distance(&samples, |x| 0.5 + x.atan() / std::f64::consts::PI);
    assert!(d < 0.01, "KS distance {d}");

    // empirical CF against exp(−σ^α |θ|^α) on a 3×3 (α, θ) grid
    let mut checked = 0;
    for (i, alpha) in [0.6, 1.0, 1.5].into_iter().enumerate() {
        let params = StableParams::new(alpha, 1.0).unwrap();
        let mut rng = stream_rng(40 + i as u64, "acceptance-cf");
        let xs: Vec<f64> = (0..100_000).map(|_| sample_sas(&params, &mut rng)).collect();
        let estimates = empirical_cf(&xs, &[0.3, 1.0, 2.5]).unwrap();
        for e in estimates {
            let target = params.cf(e.theta);
            assert!(
                (e.re - target).abs() < 3.0 * e.se_re,
                "alpha={alpha}, theta={}: {} vs {target} (se {})",
                e.theta,
                e.re,
                e.se_re
            );
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!(
        "[PASS] criterion 4: Cauchy KS = {d:.4} (< 0.01) and {checked}/9 CF grid points within 3 se in {elapsed:?}"
    );
}

#[test]
fn criterion_5_integral_representation_scale_law() {
    let start = std::time::Instant::now();
    let mut rng = stream_rng(5, "scale-law");
    let mut worst: f64 = 0.0;
    for family_idx in 0..10 {
        let atoms = rng.random_range(2..=6usize);
        let alpha = 0.5 + 1.3 * rng.random::<f64>();
        let weights: Vec<f64> = (0..atoms).map(|_| 0.3 + 2.0 * rng.random::<f64>()).collect();
        let space = FiniteWeightedSpace::with_weights(weights).unwrap();
        // three spectral functions indexed by t = 0, 1, 2
        let tables: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..atoms).map(|_| 3.0 * rng.random::<f64>() - 1.5).collect())
            .collect();
        let coeffs: Vec<f64> = (0..3).map(|_| 3.0 * rng.random::<f64>() - 1.5).collect();

        let terms: Vec<(f64, Vec<f64>)> = coeffs
            .iter()
            .zip(&tables)
            .map(|(c, f)| (*c, f.clone()))
            .collect();
        let expected = combination_scale(&terms, &space, alpha).unwrap();
        if expected < 0.05 {
            // a near-cancelling draw carries no 5% content; re-draw
            continue;
        }

        let window = Window::new(vec![0], vec![2]).unwrap();
        let spectral = |t: &GroupElement| Ok(tables[t.coords()[0] as usize].clone());
        let n = 100_000;
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let r = simulate_discrete_integral(
                spectral,
                &space,
                alpha,
                &window,
                stream_seed(family_idx as u64, &format!("draw/{k}")),
            )
            .unwrap();
            let combo: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * r.values()[i])
                .sum();
            samples.push(combo);
        }
        let fitted = scale_fit(&samples, alpha).unwrap();
        let rel = (fitted - expected).abs() / expected;
        worst = worst.max(rel);
        assert!(
            rel < 0.05,
            "family {family_idx}: fitted {fitted} vs {expected} (rel {rel:.3})"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 2 min");
    println!(
        "[PASS] criterion 5: fitted scales within 5% of the quasi-norm on 10 random families (worst {worst:.3}) in {elapsed:?}"
    );
}

#[test]
fn criterion_6_ergodic_average_consistency() {
    let start = std::time::Instant::now();
    let alpha = 1.2;
    let h = BoundedFunction::cosine();
    let grid = [100i64, 2000];
    let thresholds = DispersionThresholds::default();

    let mma = mma_triplet(alpha);
    let sigma = mma.marginal_scale().unwrap();
    let target = (-(sigma.powf(alpha))).exp();
    let sampler = TripletSampler::new(&mma, SimulationSettings::default());
    let (verdict, table) =
        dispersion_experiment(&sampler, &h, &grid, 50, thresholds, 6001).unwrap();
    let mean_at_max = table.mean[1];
    assert!(
        (mean_at_max - target).abs() < 0.02,
        "mean {mean_at_max} vs exp(-||f||^alpha) = {target}"
    );
    assert!(verdict.rho < 0.35, "mixing-average dispersion rho = {}", verdict.rho);
    assert_eq!(verdict.verdict, EmpiricalVerdict::EmpiricallyErgodic);

    let sub = subgaussian_triplet(alpha);
    let sub_sampler = TripletSampler::new(&sub, SimulationSettings::default());
    let (sub_verdict, _) =
        dispersion_experiment(&sub_sampler, &h, &grid, 50, thresholds, 6002).unwrap();
    assert!(sub_verdict.rho > 0.7, "product-shift dispersion rho = {}", sub_verdict.rho);
    assert_eq!(sub_verdict.verdict, EmpiricalVerdict::EmpiricallyNonErgodic);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}, budget 10 min");
    println!(
        "[PASS] criterion 6: cube-average mean {mean_at_max:.4} within ±0.02 of {target:.4}; rho {:.3} < 0.35 vs {:.3} > 0.7 in {elapsed:?}",
        verdict.rho, sub_verdict.rho
    );
}

#[test]
fn criterion_7_structural_suites() {
    // exact structural checks over a catalog of finite families
    let three_cycle = {
        let space = FiniteWeightedSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 2.0, 4.0],
        )
        .unwrap();
        FiniteDiscreteAction::new(space, vec![vec![1, 2, 0]]).unwrap()
    };
    let ten_atoms = {
        // a 3-cycle, a 5-cycle, and two fixed atoms
        let space = FiniteWeightedSpace::with_weights(
            (0..10).map(|i| 0.5 + i as f64 * 0.3).collect(),
        )
        .unwrap();
        FiniteDiscreteAction::new(space, vec![vec![1, 2, 0, 4, 5, 6, 7, 3, 8, 9]]).unwrap()
    };
    let torus = {
        let space = FiniteWeightedSpace::with_weights(vec![1.0; 6]).unwrap();
        // 2 × 3 torus: row shift and column shift commute
        FiniteDiscreteAction::new(
            space,
            vec![vec![3, 4, 5, 0, 1, 2], vec![1, 2, 0, 4, 5, 3]],
        )
        .unwrap()
    };

    let mut total_checked = 0usize;
    for (name, action, cocycle_tables) in [
        ("three-cycle", three_cycle.clone(), Some(vec![vec![1, -1, 1]])),
        ("ten-atoms", ten_atoms.clone(), None),
        ("torus", torus.clone(), Some(vec![vec![-1; 6], vec![1; 6]])),
    ] {
        let cocycle = match cocycle_tables {
            Some(tables) => Cocycle::FiniteTable(CocycleTable::new(&action, tables).unwrap()),
            None => Cocycle::Trivial,
        };
        let family = ActionFamily::FiniteDiscrete(action.clone());
        let points: Vec<_> = (0..action.space().len())
            .map(stablefield::actions::Point::Atom)
            .collect();
        let ts = Window::cube(action.dim(), 3).points();
        let axioms = verify_action_axioms(&family, &points, &ts);
        assert!(axioms.is_clean(), "{name} axioms: {:?}", axioms.violations);
        let coc = verify_cocycle(&cocycle, &family, &points, &ts);
        assert!(coc.is_clean(), "{name} cocycle: {:?}", coc.violations);
        let chain = verify_rn_chain_rule(&family, &points, &ts);
        assert!(chain.is_clean(), "{name} chain rule: {:?}", chain.violations);
        total_checked += axioms.checked + coc.checked + chain.checked;
    }

    // mass additivity over all 2^10 subsets of the ten-atom family
    let family = ActionFamily::FiniteDiscrete(ten_atoms);
    let sets: Vec<Vec<usize>> = (0u32..1024)
        .map(|mask| (0..10).filter(|s| mask & (1 << s) != 0).collect())
        .collect();
    let report = decomposition_consistency(&family, &sets).unwrap();
    assert!(report.is_clean(), "additivity: {:?}", report.violations);
    total_checked += report.checked;

    // Neveu/ledger coherence across the whole catalog
    let mut families: Vec<ActionFamily> = vec![
        mma_triplet(1.2).family().clone(),
        subgaussian_triplet(1.2).family().clone(),
    ];
    for (_, spec, _) in markov_fixture_matrix() {
        families.push(ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap()));
    }
    for family in &families {
        let neveu = neveu_decomposition(family).unwrap();
        let ledger = central_ledger(family).unwrap();
        assert!(!ledger.entries.is_empty());
        if !ledger.is_tainted() {
            assert_eq!(ledger.admits_only_ii1().unwrap(), neveu.null_is_empty());
            assert_eq!(ledger.admits_no_ii1().unwrap(), neveu.positive_is_empty());
            assert!(!(ledger.admits_no_ii1().unwrap() && ledger.admits_only_ii1().unwrap()));
        }
        total_checked += 1;
    }

    println!(
        "[PASS] criterion 7: structural suites clean over {total_checked} exhaustive checks"
    );
}

struct ScaleBreakFixture {
    alpha: f64,
}

impl FieldSampler for ScaleBreakFixture {
    fn dim(&self) -> usize {
        1
    }

    fn sample_at(&self, points: &[GroupElement], seed: u64) -> Result<Vec<f64>, stablefield::Error> {
        // scale quadruples away from the origin: deliberately
        // non-stationary
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        Ok(points
            .iter()
            .map(|p| {
                let scale = if p.is_identity() { 1.0 } else { 4.0 };
                scale * stablefield::stable::sample_standard_sas(self.alpha, &mut rng)
            })
            .collect())
    }

    fn realize_window(
        &self,
        window: &Window,
        seed: u64,
    ) -> Result<stablefield::FieldRealization, stablefield::Error> {
        let values = self.sample_at(&window.points(), seed)?;
        stablefield::FieldRealization::new(
            window.clone(),
            values,
            stablefield::RealizationMeta {
                seed,
                method: "fixture".into(),
                truncation: None,
                truncated_mass: None,
                tail_magnitude: None,
            },
        )
    }
}

use rand_chacha::rand_core::SeedableRng;

#[test]
fn criterion_8_stationarity() {
    let start = std::time::Instant::now();
    let alpha = 1.2;
    let lags = [GroupElement::new(vec![1]), GroupElement::new(vec![2]), GroupElement::new(vec![5])];

    let mma = mma_triplet(alpha);
    let sub = subgaussian_triplet(alpha);
    let mixed = markov_triplet(
        TransitionSpec::union(vec![
            TransitionSpec::finite(
                vec!["a".into(), "b".into()],
                vec![vec![0.5, 0.5], vec![0.25, 0.75]],
            )
            .unwrap(),
            TransitionSpec::random_walk(0.5).unwrap(),
        ])
        .unwrap(),
        alpha,
    );
    let fast_markov = SimulationSettings { lepage_truncation: 150, ..Default::default() };

    for (name, sampler, draws) in [
        ("mixing-average", TripletSampler::new(&mma, SimulationSettings::default()), 800usize),
        ("product-shift", TripletSampler::new(&sub, SimulationSettings::default()), 800),
        ("path-space", TripletSampler::new(&mixed, fast_markov), 300),
    ] {
        let runs = 100usize;
        let mut per_lag_passes = vec![0usize; lags.len()];
        for run in 0..runs {
            let reports = stationarity_test(
                &sampler,
                &lags,
                draws,
                stream_seed(8_000 + run as u64, name),
            )
            .unwrap();
            for (i, lag) in reports.iter().enumerate() {
                if lag.ks_p > 0.01 {
                    per_lag_passes[i] += 1;
                }
            }
        }
        for (i, passes) in per_lag_passes.iter().enumerate() {
            assert!(
                passes * 100 >= runs * 95,
                "{name} lag {:?}: only {passes}/{runs} runs passed",
                lags[i].coords()
            );
        }
    }

    // negative control: a lag-dependent scale must be rejected hard
    let fixture = ScaleBreakFixture { alpha };
    let reports = stationarity_test(&fixture, &lags, 1_000, 99).unwrap();
    for lag in &reports {
        assert!(
            lag.ks_p < 0.001,
            "negative control not rejected at lag {:?}: p = {}",
            lag.lag.coords(),
            lag.ks_p
        );
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 8: per-lag KS p > 0.01 in ≥ 95/100 runs on 3 catalog fields; negative control p < 0.001 in {elapsed:?}"
    );
}
