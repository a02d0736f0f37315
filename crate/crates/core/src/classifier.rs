//! Ergodicity verdicts from the decomposition data.
//!
//! For a stationary SαS field over `ℤᵈ`, ergodicity, weak mixing, and
//! the vanishing of the positive part of the underlying action are one
//! and the same thing; complete absence of an ergodic part is likewise
//! equivalent to the action being positive. When the action is
//! ergodically free the same verdicts can be read off the factor
//! ledger: no `II₁` entry means ergodic, only `II₁` entries means
//! completely non-ergodic. Both routes are computed and must agree;
//! components that fail freeness drop the ledger route (the Neveu route
//! needs no freeness) and leave a warning.

use serde::{Deserialize, Serialize};

use crate::actions::{ActionFamily, Cocycle, Kernel, MarkovShiftFamily, RosinskiTriplet};
use crate::decomposition::{central_ledger, neveu_decomposition, CentralLedger, NeveuDecomposition};
use crate::markov::{classify_recurrence, communication_classes, RecurrenceType, TransitionSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ErgodicWeaklyMixing,
    CompletelyNonErgodic,
    MixedErgodicity,
}

/// Which equivalence produced the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictBasis {
    NeveuRoute,
    LedgerRoute,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub basis: VerdictBasis,
    pub neveu: NeveuDecomposition,
    pub ledger: CentralLedger,
    pub warnings: Vec<String>,
}

fn neveu_verdict(neveu: &NeveuDecomposition) -> Verdict {
    if neveu.positive_is_empty() {
        Verdict::ErgodicWeaklyMixing
    } else if neveu.null_is_empty() {
        Verdict::CompletelyNonErgodic
    } else {
        Verdict::MixedErgodicity
    }
}

fn ledger_verdict(ledger: &CentralLedger) -> Result<Verdict> {
    Ok(if ledger.admits_no_ii1()? {
        Verdict::ErgodicWeaklyMixing
    } else if ledger.admits_only_ii1()? {
        Verdict::CompletelyNonErgodic
    } else {
        Verdict::MixedErgodicity
    })
}

/// Classifies the field generated by a triplet.
pub fn classify(triplet: &RosinskiTriplet) -> Result<Classification> {
    classify_family(triplet.family())
}

/// Classifies from the action family alone (the kernel and cocycle do
/// not enter the verdict).
pub fn classify_family(family: &ActionFamily) -> Result<Classification> {
    let neveu = neveu_decomposition(family)?;
    let ledger = central_ledger(family)?;
    let from_neveu = neveu_verdict(&neveu);
    let mut warnings = Vec::new();
    if let ActionFamily::MarkovShift(ms) = family {
        for class in ms.classes() {
            if !class.aperiodic {
                // the decomposition results do not consume aperiodicity,
                // so classification proceeds
                warnings.push(format!("class {} is periodic", class.id));
            }
        }
    }
    let basis = if ledger.is_tainted() {
        warnings.push(
            "components failing freeness leave the ledger unclassified; verdict taken from the positive/null split alone"
                .to_string(),
        );
        VerdictBasis::NeveuRoute
    } else {
        let from_ledger = ledger_verdict(&ledger)?;
        if from_ledger != from_neveu {
            return Err(Error::Internal(format!(
                "verdict routes disagree: {from_neveu:?} vs {from_ledger:?}"
            )));
        }
        VerdictBasis::LedgerRoute
    };
    Ok(Classification { verdict: from_neveu, basis, neveu, ledger, warnings })
}

/// Classifies the path-space field of a chain directly from recurrence:
/// all classes null recurrent means ergodic, all positive recurrent
/// means completely non-ergodic, a mixture means both parts are
/// nontrivial. Transient classes are a hard error. The result is
/// checked against the decomposition route.
pub fn classify_markov_field(spec: &TransitionSpec, alpha: f64) -> Result<Classification> {
    let classes = communication_classes(spec)?;
    let mut all_null = true;
    let mut all_positive = true;
    for class in &classes {
        match classify_recurrence(class, spec) {
            RecurrenceType::Transient => {
                return Err(Error::ModelPrecondition(format!(
                    "class {} is transient; the construction requires recurrent classes",
                    class.id
                )))
            }
            RecurrenceType::NullRecurrent => all_positive = false,
            RecurrenceType::PositiveRecurrent => all_null = false,
        }
    }
    let from_recurrence = if all_null {
        Verdict::ErgodicWeaklyMixing
    } else if all_positive {
        Verdict::CompletelyNonErgodic
    } else {
        Verdict::MixedErgodicity
    };

    let family = ActionFamily::MarkovShift(MarkovShiftFamily::new(spec.clone())?);
    let triplet = RosinskiTriplet::new(family, Kernel::MarkovAnchor, Cocycle::Trivial, alpha)?;
    let classification = classify(&triplet)?;
    if classification.verdict != from_recurrence {
        return Err(Error::Internal(format!(
            "recurrence route {from_recurrence:?} disagrees with decomposition route {:?}",
            classification.verdict
        )));
    }
    Ok(classification)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RigidityOutcome {
    /// Ledger-equivalent inputs agree on both rigid properties.
    Consistent,
    /// The ledgers are not equivalent, so the check is vacuous.
    NotComparable,
    /// Ledger-equivalent inputs disagree; this indicates an
    /// implementation bug, not a property of the fields.
    Violation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityReport {
    pub outcome: RigidityOutcome,
    pub detail: String,
}

/// Consistency check behind the rigidity statements: two fields whose
/// ledgers agree on the pair (`admits_no_II1`, `admits_only_II1`) must
/// agree on being ergodic and on being completely non-ergodic.
pub fn rigidity_check(
    ledger_a: &CentralLedger,
    ledger_b: &CentralLedger,
    verdict_a: Verdict,
    verdict_b: Verdict,
) -> Result<RigidityReport> {
    let sig_a = (ledger_a.admits_no_ii1()?, ledger_a.admits_only_ii1()?);
    let sig_b = (ledger_b.admits_no_ii1()?, ledger_b.admits_only_ii1()?);
    if sig_a != sig_b {
        return Ok(RigidityReport {
            outcome: RigidityOutcome::NotComparable,
            detail: format!("ledger signatures {sig_a:?} and {sig_b:?} differ; nothing to compare"),
        });
    }
    let erg_mismatch = (verdict_a == Verdict::ErgodicWeaklyMixing)
        != (verdict_b == Verdict::ErgodicWeaklyMixing);
    let nonerg_mismatch = (verdict_a == Verdict::CompletelyNonErgodic)
        != (verdict_b == Verdict::CompletelyNonErgodic);
    if erg_mismatch || nonerg_mismatch {
        Ok(RigidityReport {
            outcome: RigidityOutcome::Violation,
            detail: format!(
                "ledger-equivalent fields disagree ({verdict_a:?} vs {verdict_b:?}); this indicates an implementation bug"
            ),
        })
    } else {
        Ok(RigidityReport {
            outcome: RigidityOutcome::Consistent,
            detail: format!("signature {sig_a:?} with verdicts {verdict_a:?}, {verdict_b:?}"),
        })
    }
}
