//! Ergodic decomposition, the positive/null split, and the symbolic
//! factor ledger.
//!
//! Every catalog family splits into countably many invariant pieces
//! `(S_y, μ_y)` on which the action is ergodic: orbits for finite
//! discrete actions, fibers `{y} × ℤᵈ` for mixed moving averages, one
//! path space per communication class for Markov shifts, and a single
//! component for the product shift. A component is *positive* when it
//! carries a finite invariant measure equivalent to `μ_y` and *null*
//! otherwise; the positive/null split over components is the Neveu
//! decomposition.
//!
//! For a component on which the action is free and ergodic, the crossed
//! product `L^∞(S_y, μ_y) ⋊ ℤᵈ` is a factor whose type is decided by
//! positivity: `II₁` exactly on positive components, `II_∞` on the null
//! ones occurring here (all carry a σ-finite infinite invariant
//! measure). The ledger records one entry per component; components
//! that fail freeness get `Unclassified` and taint the ledger rather
//! than being guessed at.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::actions::{ActionFamily, ViolationReport};
use crate::markov::{classify_recurrence, invariant_measure, MassValue, RecurrenceType};
use crate::{Error, Result};

/// Symbolic type of one crossed-product factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorType {
    II1,
    IIInfinity,
    Unclassified,
}

/// What a component is, in family-specific terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ComponentKind {
    /// Atom indices of one orbit of a finite discrete action.
    Orbit { atoms: Vec<usize> },
    /// The fiber `{y} × ℤᵈ` of a mixed moving average.
    MmaFiber { y: usize },
    /// The path space of one communication class (0-based position).
    MarkovClass { class_pos: usize },
    /// The single component of the product shift.
    ProductShift,
}

/// One ergodic piece `(S_y, μ_y)` with its flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErgodicComponent {
    pub label: String,
    pub kind: ComponentKind,
    pub mass: MassValue,
    /// Carries a finite invariant measure equivalent to `μ_y`.
    pub positive: bool,
    /// The restricted action has trivial stabilizers.
    pub free: bool,
}

/// The component labels split into positive and null parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeveuDecomposition {
    pub positive_labels: BTreeSet<String>,
    pub null_labels: BTreeSet<String>,
}

impl NeveuDecomposition {
    pub fn positive_is_empty(&self) -> bool {
        self.positive_labels.is_empty()
    }

    pub fn null_is_empty(&self) -> bool {
        self.null_labels.is_empty()
    }
}

/// Per-component freeness flags plus warnings for the failures.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreenessReport {
    pub flags: Vec<(String, bool)>,
    pub all_free: bool,
    pub warnings: Vec<String>,
}

/// The component-indexed factor ledger.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CentralLedger {
    pub entries: Vec<LedgerEntry>,
    /// All covered families have countable (or effectively
    /// parameterized) component sets, so the decomposition is a direct
    /// sum over labels.
    pub counting_measure: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub factor_type: FactorType,
    pub positive: bool,
    pub free: bool,
    pub mass: MassValue,
}

impl CentralLedger {
    pub fn is_tainted(&self) -> bool {
        self.entries.iter().any(|e| e.factor_type == FactorType::Unclassified)
    }

    /// No entry is `II₁`. Errors on tainted ledgers.
    pub fn admits_no_ii1(&self) -> Result<bool> {
        if self.is_tainted() {
            return Err(Error::IndeterminateLedger);
        }
        Ok(self.entries.iter().all(|e| e.factor_type != FactorType::II1))
    }

    /// Every entry is `II₁`. Errors on tainted ledgers.
    pub fn admits_only_ii1(&self) -> Result<bool> {
        if self.is_tainted() {
            return Err(Error::IndeterminateLedger);
        }
        Ok(self.entries.iter().all(|e| e.factor_type == FactorType::II1))
    }

    /// The documented serialization shape.
    pub fn json(&self) -> LedgerJson {
        LedgerJson {
            components: self
                .entries
                .iter()
                .map(|e| LedgerComponentJson {
                    label: e.label.clone(),
                    factor_type: match e.factor_type {
                        FactorType::II1 => "II1".into(),
                        FactorType::IIInfinity => "IIInfinity".into(),
                        FactorType::Unclassified => "Unclassified".into(),
                    },
                    positive: e.positive,
                    free: e.free,
                    mass: match e.mass {
                        MassValue::Finite(m) => serde_json_mass::Mass::Finite(m),
                        MassValue::Infinite => serde_json_mass::Mass::Infinite,
                    },
                })
                .collect(),
            admits_no_ii1: self.admits_no_ii1().ok(),
            admits_only_ii1: self.admits_only_ii1().ok(),
        }
    }
}

/// Serialized ledger: `{components: [...], admits_no_II1, admits_only_II1}`,
/// with `null` quantifiers on tainted ledgers and `"infinite"` standing
/// in for an infinite mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerJson {
    pub components: Vec<LedgerComponentJson>,
    #[serde(rename = "admits_no_II1")]
    pub admits_no_ii1: Option<bool>,
    #[serde(rename = "admits_only_II1")]
    pub admits_only_ii1: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerComponentJson {
    pub label: String,
    pub factor_type: String,
    pub positive: bool,
    pub free: bool,
    pub mass: serde_json_mass::Mass,
}

pub mod serde_json_mass {
    use serde::{Deserialize, Serialize};

    /// A finite number or the string `"infinite"`.
    #[derive(Clone, Copy, Debug, Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Mass {
        Finite(f64),
        #[serde(with = "infinite_str")]
        Infinite,
    }

    mod infinite_str {
        use serde::de::Error;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str("infinite")
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
            let v = String::deserialize(d)?;
            if v == "infinite" {
                Ok(())
            } else {
                Err(D::Error::custom("expected the string \"infinite\""))
            }
        }
    }
}

/// The ergodic decomposition of a catalog family.
pub fn ergodic_decomposition(family: &ActionFamily) -> Result<Vec<ErgodicComponent>> {
    let freeness = freeness_flags(family)?;
    let mut out = Vec::new();
    match family {
        ActionFamily::FiniteDiscrete(action) => {
            for orbit in action.orbits() {
                let label = orbit_label(action, &orbit);
                let mass: f64 = orbit.iter().map(|&s| action.space().weight(s)).sum();
                out.push(ErgodicComponent {
                    free: freeness[&label],
                    label,
                    kind: ComponentKind::Orbit { atoms: orbit },
                    mass: MassValue::Finite(mass),
                    // a finite orbit always carries the normalized
                    // orbit-averaged invariant measure
                    positive: true,
                });
            }
        }
        ActionFamily::MixedMovingAverage(m) => {
            for (y, label_name) in m.labels().labels().iter().enumerate() {
                let label = format!("fiber:{label_name}");
                out.push(ErgodicComponent {
                    free: freeness[&label],
                    label,
                    kind: ComponentKind::MmaFiber { y },
                    // counting measure on the fiber lattice
                    mass: MassValue::Infinite,
                    positive: false,
                });
            }
        }
        ActionFamily::MarkovShift(ms) => {
            for (pos, class) in ms.classes().iter().enumerate() {
                let recurrence = classify_recurrence(class, ms.spec());
                if recurrence == RecurrenceType::Transient {
                    return Err(Error::ModelPrecondition(format!(
                        "class {} is transient; the path-space construction requires recurrence",
                        class.id
                    )));
                }
                let label = format!("class:{}", class.id);
                let mass = invariant_measure(class, ms.spec())?.total_mass;
                out.push(ErgodicComponent {
                    free: freeness[&label],
                    label,
                    kind: ComponentKind::MarkovClass { class_pos: pos },
                    mass,
                    positive: recurrence == RecurrenceType::PositiveRecurrent,
                });
            }
        }
        ActionFamily::SubGaussianShift(_) => {
            let label = "product-shift".to_string();
            out.push(ErgodicComponent {
                free: freeness[&label],
                label,
                kind: ComponentKind::ProductShift,
                mass: MassValue::Finite(1.0),
                positive: true,
            });
        }
    }
    Ok(out)
}

fn orbit_label(action: &crate::actions::FiniteDiscreteAction, orbit: &[usize]) -> String {
    let min_atom = *orbit.iter().min().unwrap();
    format!("orbit:{}", action.space().labels()[min_atom])
}

fn freeness_flags(
    family: &ActionFamily,
) -> Result<std::collections::BTreeMap<String, bool>> {
    let report = check_ergodically_free(family)?;
    Ok(report.flags.into_iter().collect())
}

/// The positive/null split of the component labels.
pub fn neveu_decomposition(family: &ActionFamily) -> Result<NeveuDecomposition> {
    let components = ergodic_decomposition(family)?;
    let mut positive_labels = BTreeSet::new();
    let mut null_labels = BTreeSet::new();
    for c in components {
        if c.positive {
            positive_labels.insert(c.label);
        } else {
            null_labels.insert(c.label);
        }
    }
    Ok(NeveuDecomposition { positive_labels, null_labels })
}

/// Per-component freeness, decided exactly.
///
/// A finite orbit can never be free: the restriction of the action to
/// it factors through a finite permutation group, so some nonzero index
/// acts as the identity on the orbit. The translation action on a
/// fiber is free; a Markov class is free unless it is a singleton
/// (whose constant path every shift fixes); the product shift is free
/// because the coordinate law is atomless.
pub fn check_ergodically_free(family: &ActionFamily) -> Result<FreenessReport> {
    let mut flags = Vec::new();
    let mut warnings = Vec::new();
    match family {
        ActionFamily::FiniteDiscrete(action) => {
            for orbit in action.orbits() {
                let label = orbit_label(action, &orbit);
                // smallest m ≥ 1 with the first generator's m-th power
                // fixing the orbit pointwise: a nonzero fixing index
                let witness = {
                    let g = &action.generators()[0];
                    let mut m = 1u64;
                    let mut images: Vec<usize> = orbit.iter().map(|&s| g[s]).collect();
                    while images.iter().zip(&orbit).any(|(a, b)| a != b) && m < 1_000_000 {
                        images = images.iter().map(|&s| g[s]).collect();
                        m += 1;
                    }
                    m
                };
                warnings.push(format!(
                    "component {label}: index {witness}*e1 fixes the orbit pointwise; not free"
                ));
                flags.push((label, false));
            }
        }
        ActionFamily::MixedMovingAverage(m) => {
            for label_name in m.labels().labels() {
                flags.push((format!("fiber:{label_name}"), true));
            }
        }
        ActionFamily::MarkovShift(ms) => {
            for class in ms.classes() {
                let label = format!("class:{}", class.id);
                let free = class.finite_size() != Some(1);
                if !free {
                    warnings.push(format!(
                        "component {label}: singleton class yields a shift-fixed constant path; not free"
                    ));
                }
                flags.push((label, free));
            }
        }
        ActionFamily::SubGaussianShift(_) => {
            flags.push(("product-shift".to_string(), true));
        }
    }
    let all_free = flags.iter().all(|(_, f)| *f);
    Ok(FreenessReport { flags, all_free, warnings })
}

/// Builds the factor ledger: positive free components are `II₁`, null
/// free components are `II_∞` (every covered null component carries a
/// σ-finite infinite invariant measure), and non-free components stay
/// `Unclassified`, tainting quantifier queries.
pub fn central_ledger(family: &ActionFamily) -> Result<CentralLedger> {
    let components = ergodic_decomposition(family)?;
    let entries = components
        .into_iter()
        .map(|c| LedgerEntry {
            factor_type: if !c.free {
                FactorType::Unclassified
            } else if c.positive {
                FactorType::II1
            } else {
                FactorType::IIInfinity
            },
            label: c.label,
            positive: c.positive,
            free: c.free,
            mass: c.mass,
        })
        .collect();
    Ok(CentralLedger { entries, counting_measure: true })
}

/// Exact consistency checks of the decomposition on a finite discrete
/// family: components partition the atom set, masses add over the
/// supplied test sets, and each component measure is invariant whenever
/// the total measure is.
pub fn decomposition_consistency(
    family: &ActionFamily,
    test_sets: &[Vec<usize>],
) -> Result<ViolationReport> {
    let action = match family {
        ActionFamily::FiniteDiscrete(a) => a,
        _ => {
            return Err(Error::UnsupportedFamily(
                "exact decomposition checks run on finite discrete families".into(),
            ))
        }
    };
    let components = ergodic_decomposition(family)?;
    let mut report = ViolationReport::default();
    let n = action.space().len();

    // partition: pairwise disjoint and covering
    let mut owner = vec![None::<usize>; n];
    for (ci, c) in components.iter().enumerate() {
        if let ComponentKind::Orbit { atoms } = &c.kind {
            for &s in atoms {
                report.checked += 1;
                if let Some(prev) = owner[s] {
                    report
                        .violations
                        .push(format!("atom {s} lies in components {prev} and {ci}"));
                }
                owner[s] = Some(ci);
            }
        }
    }
    for (s, o) in owner.iter().enumerate() {
        report.checked += 1;
        if o.is_none() {
            report.violations.push(format!("atom {s} is not covered by any component"));
        }
    }

    // additivity over the test sets
    let tol = 1e-12;
    for set in test_sets {
        report.checked += 1;
        let total: f64 = set.iter().map(|&s| action.space().weight(s)).sum();
        let mut per_component = 0.0;
        for c in &components {
            if let ComponentKind::Orbit { atoms } = &c.kind {
                per_component += set
                    .iter()
                    .filter(|s| atoms.contains(s))
                    .map(|&s| action.space().weight(s))
                    .sum::<f64>();
            }
        }
        if (total - per_component).abs() > tol * total.abs().max(1.0) {
            report
                .violations
                .push(format!("mass additivity fails on {set:?}: {total} vs {per_component}"));
        }
    }

    // invariance of each component measure when μ itself is invariant
    let mu_invariant = action.generators().iter().all(|g| {
        (0..n).all(|s| (action.space().weight(g[s]) - action.space().weight(s)).abs() <= tol)
    });
    if mu_invariant {
        for c in &components {
            if let ComponentKind::Orbit { atoms } = &c.kind {
                for &s in atoms {
                    for g in action.generators() {
                        report.checked += 1;
                        let diff = (action.space().weight(g[s]) - action.space().weight(s)).abs();
                        if diff > tol {
                            report.violations.push(format!(
                                "component measure not invariant at atom {s}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{FiniteDiscreteAction, MarkovShiftFamily, MmaFamily, SubGaussianFamily};
    use crate::markov::TransitionSpec;
    use crate::stable::FiniteWeightedSpace;

    fn mma_family(labels: usize, d: usize) -> ActionFamily {
        ActionFamily::MixedMovingAverage(
            MmaFamily::new(
                FiniteWeightedSpace::with_weights(vec![1.0; labels]).unwrap(),
                d,
                1,
            )
            .unwrap(),
        )
    }

    fn mixed_markov_family() -> ActionFamily {
        let spec = TransitionSpec::union(vec![
            TransitionSpec::finite(
                vec!["a".into(), "b".into()],
                vec![vec![0.5, 0.5], vec![0.25, 0.75]],
            )
            .unwrap(),
            TransitionSpec::random_walk(0.5).unwrap(),
        ])
        .unwrap();
        ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap())
    }

    #[test]
    fn mma_components_are_infinite_free_fibers() {
        let family = mma_family(3, 2);
        let comps = ergodic_decomposition(&family).unwrap();
        assert_eq!(comps.len(), 3);
        for c in &comps {
            assert!(!c.mass.is_finite());
            assert!(c.free);
            assert!(!c.positive);
        }
        let neveu = neveu_decomposition(&family).unwrap();
        assert!(neveu.positive_is_empty());
        assert_eq!(neveu.null_labels.len(), 3);
    }

    #[test]
    fn markov_components_follow_recurrence() {
        let family = mixed_markov_family();
        let comps = ergodic_decomposition(&family).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps[0].mass.is_finite());
        assert!(comps[0].positive);
        assert!(!comps[1].mass.is_finite());
        assert!(!comps[1].positive);

        let neveu = neveu_decomposition(&family).unwrap();
        assert_eq!(neveu.positive_labels.iter().next().unwrap(), "class:1");
        assert_eq!(neveu.null_labels.iter().next().unwrap(), "class:2");
    }

    #[test]
    fn transient_class_rejected() {
        let spec = TransitionSpec::random_walk(0.7).unwrap();
        let family = ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap());
        assert!(matches!(
            ergodic_decomposition(&family),
            Err(Error::ModelPrecondition(_))
        ));
    }

    #[test]
    fn identity_action_gives_singleton_orbits() {
        let space = FiniteWeightedSpace::with_weights(vec![1.0, 2.0]).unwrap();
        let action = FiniteDiscreteAction::new(space, vec![vec![0, 1]]).unwrap();
        let family = ActionFamily::FiniteDiscrete(action);
        let comps = ergodic_decomposition(&family).unwrap();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert!(c.positive);
            assert!(!c.free);
        }
    }

    #[test]
    fn sub_gaussian_single_positive_component() {
        let family = ActionFamily::SubGaussianShift(SubGaussianFamily::new(2, 1.0).unwrap());
        let neveu = neveu_decomposition(&family).unwrap();
        assert!(neveu.null_is_empty());
        assert_eq!(neveu.positive_labels.len(), 1);
        let ledger = central_ledger(&family).unwrap();
        assert_eq!(ledger.entries[0].factor_type, FactorType::II1);
        assert!(!ledger.admits_no_ii1().unwrap());
        assert!(ledger.admits_only_ii1().unwrap());
    }

    #[test]
    fn mma_ledger_is_all_type_two_infinity() {
        let ledger = central_ledger(&mma_family(4, 1)).unwrap();
        assert!(ledger.entries.iter().all(|e| e.factor_type == FactorType::IIInfinity));
        assert!(ledger.admits_no_ii1().unwrap());
        assert!(!ledger.admits_only_ii1().unwrap());
    }

    #[test]
    fn mixed_markov_ledger_types_match_recurrence() {
        let ledger = central_ledger(&mixed_markov_family()).unwrap();
        assert_eq!(ledger.entries[0].factor_type, FactorType::II1);
        assert_eq!(ledger.entries[1].factor_type, FactorType::IIInfinity);
        assert!(!ledger.admits_no_ii1().unwrap());
        assert!(!ledger.admits_only_ii1().unwrap());
    }

    #[test]
    fn singleton_markov_class_taints_the_ledger() {
        let spec = TransitionSpec::union(vec![
            TransitionSpec::finite(vec!["x".into()], vec![vec![1.0]]).unwrap(),
            TransitionSpec::random_walk(0.5).unwrap(),
        ])
        .unwrap();
        let family = ActionFamily::MarkovShift(MarkovShiftFamily::new(spec).unwrap());
        let freeness = check_ergodically_free(&family).unwrap();
        assert!(!freeness.all_free);
        assert!(!freeness.warnings.is_empty());
        let ledger = central_ledger(&family).unwrap();
        assert!(ledger.is_tainted());
        assert!(matches!(ledger.admits_no_ii1(), Err(Error::IndeterminateLedger)));
        assert!(ledger.json().admits_no_ii1.is_none());
    }

    #[test]
    fn finite_discrete_ledger_is_tainted_but_positive() {
        let space = FiniteWeightedSpace::with_weights(vec![1.0, 1.0, 1.0]).unwrap();
        let action = FiniteDiscreteAction::new(space, vec![vec![1, 2, 0]]).unwrap();
        let family = ActionFamily::FiniteDiscrete(action);
        let freeness = check_ergodically_free(&family).unwrap();
        // the cycle is fixed pointwise by index 3
        assert!(!freeness.all_free);
        assert!(freeness.warnings[0].contains("3"));
        let ledger = central_ledger(&family).unwrap();
        assert!(ledger.is_tainted());
    }

    #[test]
    fn consistency_checks_pass_exhaustively() {
        // a 3-cycle plus two fixed atoms; all 2⁵ subsets
        let space = FiniteWeightedSpace::with_weights(vec![1.0, 1.5, 2.0, 0.5, 3.0]).unwrap();
        let action = FiniteDiscreteAction::new(space, vec![vec![1, 2, 0, 3, 4]]).unwrap();
        let family = ActionFamily::FiniteDiscrete(action);
        let sets: Vec<Vec<usize>> = (0u32..32)
            .map(|mask| (0..5).filter(|s| mask & (1 << s) != 0).collect())
            .collect();
        let report = decomposition_consistency(&family, &sets).unwrap();
        assert!(report.is_clean(), "violations: {:?}", report.violations);
    }

    #[test]
    fn consistency_detects_invariant_measures() {
        // uniform weights on a 3-cycle are invariant; components stay
        // invariant too
        let space = FiniteWeightedSpace::with_weights(vec![2.0, 2.0, 2.0]).unwrap();
        let action = FiniteDiscreteAction::new(space, vec![vec![1, 2, 0]]).unwrap();
        let family = ActionFamily::FiniteDiscrete(action);
        let report = decomposition_consistency(&family, &[vec![0, 1, 2]]).unwrap();
        assert!(report.is_clean());
    }

    #[test]
    fn ledger_json_shape() {
        let ledger = central_ledger(&mixed_markov_family()).unwrap();
        let json = serde_json::to_value(ledger.json()).unwrap();
        assert!(json["components"].is_array());
        assert_eq!(json["components"][0]["factor_type"], "II1");
        assert_eq!(json["components"][1]["mass"], "infinite");
        assert_eq!(json["admits_no_II1"], false);
        assert_eq!(json["admits_only_II1"], false);
    }
}
