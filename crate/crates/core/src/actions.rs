//! The catalog of nonsingular `ℤᵈ`-actions and triplet operations.
//!
//! A group action here is a family `{φ_t}` with `φ_e = id` and
//! `φ_{u+v} = φ_v ∘ φ_u`, nonsingular in the sense that `μ ∘ φ_t ∼ μ`.
//! Together with a kernel `f` and a ±1 cocycle `{c_t}` satisfying
//! `c_{t₁+t₂}(s) = c_{t₁}(s) c_{t₂}(φ_{t₁}(s))`, it forms a triplet whose
//! spectral functions
//!
//! ```text
//! f_t(s) = c_t(s) (dμ∘φ_t/dμ(s))^{1/α} f(φ_t(s))
//! ```
//!
//! generate a stationary SαS field. Only four concrete families are
//! representable; each downstream decomposition needs family-specific
//! structure, so arbitrary user-coded actions are rejected.
//!
//! Finite-discrete actions are specified by one commuting generator
//! permutation per lattice direction, and everything about them is
//! checked exactly: axioms, cocycle identities, Radon–Nikodym chain
//! rule, full support, minimality, and triplet transport.

use serde::{Deserialize, Serialize};

use crate::lattice::{GroupElement, Window};
use crate::markov::{
    communication_classes, markov_field_kernel, CommunicationClass, TransitionSpec, TwoSidedPath,
};
use crate::stable::{gaussian_abs_moment, lp_quasi_norm, validate_alpha, FiniteWeightedSpace};
use crate::{Error, Result};

/// Relative tolerance for Radon–Nikodym and ratio comparisons.
pub const RATIO_TOL: f64 = 1e-12;

/// A point of one of the catalog spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// Atom index of a finite discrete space.
    Atom(usize),
    /// `(y, z) ∈ Y × ℤᵈ` for a mixed moving average.
    Mma { y: usize, z: GroupElement },
    /// A recorded two-sided path of a Markov shift, tagged with its
    /// class position (0-based).
    Path { class_pos: usize, path: TwoSidedPath },
    /// A recorded window of a real-valued configuration in `ℝ^{ℤᵈ}`.
    RealField { window: Window, values: Vec<f64> },
}

impl Point {
    pub fn real_field(window: Window, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a window of {} points",
                values.len(),
                window.len()
            )));
        }
        Ok(Point::RealField { window, values })
    }
}

/// Action of `ℤᵈ` on a finite weighted space, generated by `d`
/// commuting permutations of the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiscreteAction {
    space: FiniteWeightedSpace,
    dim: usize,
    generators: Vec<Vec<usize>>,
    inverses: Vec<Vec<usize>>,
}

impl FiniteDiscreteAction {
    /// Builds the action and checks, exhaustively over atoms, that every
    /// generator is a permutation and that all generators commute.
    pub fn new(space: FiniteWeightedSpace, generators: Vec<Vec<usize>>) -> Result<Self> {
        let action = Self::new_unchecked(space, generators)?;
        let n = action.space.len();
        for (j, g) in action.generators.iter().enumerate() {
            let mut seen = vec![false; n];
            for &img in g {
                if seen[img] {
                    return Err(Error::InvalidParameter(format!(
                        "generator {j} is not a permutation"
                    )));
                }
                seen[img] = true;
            }
        }
        for j in 0..action.dim {
            for k in (j + 1)..action.dim {
                for s in 0..n {
                    let jk = action.generators[k][action.generators[j][s]];
                    let kj = action.generators[j][action.generators[k][s]];
                    if jk != kj {
                        return Err(Error::InvalidParameter(format!(
                            "generators {j} and {k} do not commute at atom {s}"
                        )));
                    }
                }
            }
        }
        Ok(action)
    }

    /// Skips the permutation and commutation checks. Intended for
    /// negative-control fixtures fed to the verification reports; only
    /// index bounds are enforced.
    pub fn new_unchecked(space: FiniteWeightedSpace, generators: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.len();
        if generators.is_empty() {
            return Err(Error::InvalidParameter("need one generator per lattice direction".into()));
        }
        for (j, g) in generators.iter().enumerate() {
            if g.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator {j} has {} entries for {n} atoms",
                    g.len()
                )));
            }
            if g.iter().any(|&img| img >= n) {
                return Err(Error::InvalidParameter(format!("generator {j} maps outside the atom set")));
            }
        }
        let dim = generators.len();
        let inverses = generators
            .iter()
            .map(|g| {
                let mut inv = vec![0usize; n];
                for (s, &img) in g.iter().enumerate() {
                    inv[img] = s;
                }
                inv
            })
            .collect();
        Ok(FiniteDiscreteAction { space, dim, generators, inverses })
    }

    pub fn space(&self) -> &FiniteWeightedSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// `φ_t(s)` by walking `t` one axis at a time.
    pub fn map_atom(&self, t: &GroupElement, mut s: usize) -> usize {
        for (k, &steps) in t.coords().iter().enumerate() {
            let table = if steps >= 0 { &self.generators[k] } else { &self.inverses[k] };
            for _ in 0..steps.unsigned_abs() {
                s = table[s];
            }
        }
        s
    }

    /// Distinct images of `s` under the whole action.
    pub fn orbit(&self, s: usize) -> Vec<usize> {
        let mut seen = vec![false; self.space.len()];
        let mut stack = vec![s];
        seen[s] = true;
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            out.push(x);
            for k in 0..self.dim {
                for table in [&self.generators[k], &self.inverses[k]] {
                    let y = table[x];
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Orbit partition of the atom set, ordered by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.space.len()];
        let mut out = Vec::new();
        for s in 0..self.space.len() {
            if !assigned[s] {
                let orbit = self.orbit(s);
                for &x in &orbit {
                    assigned[x] = true;
                }
                out.push(orbit);
            }
        }
        out
    }
}

/// Mixed moving average data: a finite label space `Y` with measure ν,
/// acting space `Y × ℤᵈ` with counting measure on the lattice factor,
/// and the translation action `φ_t(y, z) = (y, z + t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmaFamily {
    labels: FiniteWeightedSpace,
    dim: usize,
    radius: i64,
}

impl MmaFamily {
    pub fn new(labels: FiniteWeightedSpace, dim: usize, radius: i64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be ≥ 1".into()));
        }
        if radius < 0 {
            return Err(Error::InvalidParameter("kernel radius must be ≥ 0".into()));
        }
        Ok(MmaFamily { labels, dim, radius })
    }

    pub fn labels(&self) -> &FiniteWeightedSpace {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }
}

/// Markov shift data: the path spaces of a chain's communication
/// classes under the two-sided shift `φ_t(x)(u) = x(u + t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovShiftFamily {
    spec: TransitionSpec,
    classes: Vec<CommunicationClass>,
}

impl MarkovShiftFamily {
    /// Decomposes the chain; transient classes are rejected there.
    pub fn new(spec: TransitionSpec) -> Result<Self> {
        let classes = communication_classes(&spec)?;
        Ok(MarkovShiftFamily { spec, classes })
    }

    pub fn spec(&self) -> &TransitionSpec {
        &self.spec
    }

    pub fn classes(&self) -> &[CommunicationClass] {
        &self.classes
    }

    /// Re-anchors one class at another of its states.
    pub fn with_anchor(mut self, class_pos: usize, anchor: i64) -> Result<Self> {
        if class_pos >= self.classes.len() {
            return Err(Error::InvalidParameter(format!("no class at position {class_pos}")));
        }
        self.classes[class_pos] = self.classes[class_pos].clone().with_anchor(anchor)?;
        Ok(self)
    }
}

/// Shift on `ℝ^{ℤᵈ}` with i.i.d. centered Gaussian coordinates of
/// standard deviation `coord_sd`. A degenerate coordinate law would make
/// the shift act on a point mass, so `coord_sd > 0` is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubGaussianFamily {
    dim: usize,
    coord_sd: f64,
}

impl SubGaussianFamily {
    pub fn new(dim: usize, coord_sd: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be ≥ 1".into()));
        }
        if !coord_sd.is_finite() || coord_sd <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate law must be non-degenerate (atomless); sd {coord_sd} rejected"
            )));
        }
        Ok(SubGaussianFamily { dim, coord_sd })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord_sd(&self) -> f64 {
        self.coord_sd
    }
}

/// One of the four representable measure-space actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ActionFamily {
    FiniteDiscrete(FiniteDiscreteAction),
    MixedMovingAverage(MmaFamily),
    MarkovShift(MarkovShiftFamily),
    SubGaussianShift(SubGaussianFamily),
}

impl ActionFamily {
    pub fn dim(&self) -> usize {
        match self {
            ActionFamily::FiniteDiscrete(a) => a.dim(),
            ActionFamily::MixedMovingAverage(m) => m.dim(),
            ActionFamily::MarkovShift(_) => 1,
            ActionFamily::SubGaussianShift(s) => s.dim(),
        }
    }

    /// `φ_t(point)`.
    ///
    /// Shifts relabel the recorded coordinates of path and configuration
    /// points; if the shifted point no longer records its own origin the
    /// recorded segment was too short and the call fails rather than
    /// extending the path with fresh randomness.
    pub fn apply(&self, t: &GroupElement, point: &Point) -> Result<Point> {
        self.check_dim(t)?;
        match (self, point) {
            (ActionFamily::FiniteDiscrete(a), Point::Atom(s)) => {
                if *s >= a.space().len() {
                    return Err(Error::InvalidParameter(format!("atom {s} out of range")));
                }
                Ok(Point::Atom(a.map_atom(t, *s)))
            }
            (ActionFamily::MixedMovingAverage(_), Point::Mma { y, z }) => {
                Ok(Point::Mma { y: *y, z: z.add(t) })
            }
            (ActionFamily::MarkovShift(_), Point::Path { class_pos, path }) => {
                let shift = t.coords()[0];
                let hi = path.lo + path.states.len() as i64 - 1;
                if shift < path.lo || shift > hi {
                    return Err(Error::DomainExceeded(format!(
                        "shift by {shift} leaves the recorded segment [{}, {hi}]",
                        path.lo
                    )));
                }
                Ok(Point::Path {
                    class_pos: *class_pos,
                    path: TwoSidedPath { lo: path.lo - shift, states: path.states.clone() },
                })
            }
            (ActionFamily::SubGaussianShift(_), Point::RealField { window, values }) => {
                let lo: Vec<i64> = window.lo().iter().zip(t.coords()).map(|(l, s)| l - s).collect();
                let hi: Vec<i64> = window.hi().iter().zip(t.coords()).map(|(h, s)| h - s).collect();
                let shifted = Window::new(lo, hi)?;
                if !shifted.contains(&GroupElement::identity(self.dim())) {
                    return Err(Error::DomainExceeded(
                        "shifted configuration no longer records its origin".into(),
                    ));
                }
                Ok(Point::RealField { window: shifted, values: values.clone() })
            }
            _ => Err(Error::InvalidParameter("point does not belong to this family's space".into())),
        }
    }

    /// `dμ∘φ_t/dμ` at the point: the weight ratio for finite discrete
    /// actions and exactly 1 for the three measure-preserving families.
    pub fn rn_derivative(&self, t: &GroupElement, point: &Point) -> Result<f64> {
        self.check_dim(t)?;
        match (self, point) {
            (ActionFamily::FiniteDiscrete(a), Point::Atom(s)) => {
                if *s >= a.space().len() {
                    return Err(Error::InvalidParameter(format!("atom {s} out of range")));
                }
                let img = a.map_atom(t, *s);
                Ok(a.space().weight(img) / a.space().weight(*s))
            }
            (ActionFamily::MixedMovingAverage(_), Point::Mma { .. })
            | (ActionFamily::MarkovShift(_), Point::Path { .. })
            | (ActionFamily::SubGaussianShift(_), Point::RealField { .. }) => Ok(1.0),
            _ => Err(Error::InvalidParameter("point does not belong to this family's space".into())),
        }
    }

    fn check_dim(&self, t: &GroupElement) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "lattice index has dimension {}, family has {}",
                t.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// A ±1 cocycle over an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cocycle {
    Trivial,
    FiniteTable(CocycleTable),
}

/// Cocycle on a finite discrete action, stored as one ±1 table per
/// generator direction and extended to all of `ℤᵈ` by the cocycle
/// identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleTable {
    generators: Vec<Vec<i8>>,
}

impl CocycleTable {
    /// Checks path-independence: extending along `e_j` then `e_k` must
    /// agree with the opposite order at every atom.
    pub fn new(action: &FiniteDiscreteAction, generators: Vec<Vec<i8>>) -> Result<Self> {
        let table = Self::new_unchecked(action, generators)?;
        for j in 0..action.dim() {
            for k in (j + 1)..action.dim() {
                for s in 0..action.space().len() {
                    let via_j = table.generators[j][s] as i32
                        * table.generators[k][action.generators()[j][s]] as i32;
                    let via_k = table.generators[k][s] as i32
                        * table.generators[j][action.generators()[k][s]] as i32;
                    if via_j != via_k {
                        return Err(Error::InvalidParameter(format!(
                            "cocycle tables are path-dependent at atom {s} for directions {j}, {k}"
                        )));
                    }
                }
            }
        }
        Ok(table)
    }

    /// Skips the path-independence check; for negative-control fixtures.
    pub fn new_unchecked(action: &FiniteDiscreteAction, generators: Vec<Vec<i8>>) -> Result<Self> {
        if generators.len() != action.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} sign tables for a dimension-{} action",
                generators.len(),
                action.dim()
            )));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.len() != action.space().len() {
                return Err(Error::DimensionMismatch(format!(
                    "sign table {k} has {} entries for {} atoms",
                    g.len(),
                    action.space().len()
                )));
            }
            if g.iter().any(|v| *v != 1 && *v != -1) {
                return Err(Error::InvalidParameter("cocycle values must be ±1".into()));
            }
        }
        Ok(CocycleTable { generators })
    }

    /// `c_t(s)` by composing unit steps:
    /// `c_{u+e_k}(s) = c_u(s) c_{e_k}(φ_u(s))` and
    /// `c_{−e_k}(x) = c_{e_k}(φ_{−e_k}(x))`.
    pub fn evaluate(&self, action: &FiniteDiscreteAction, t: &GroupElement, s: usize) -> i8 {
        let mut sign: i32 = 1;
        let mut cur = s;
        for (k, &steps) in t.coords().iter().enumerate() {
            if steps >= 0 {
                for _ in 0..steps {
                    sign *= self.generators[k][cur] as i32;
                    cur = action.generators()[k][cur];
                }
            } else {
                for _ in 0..(-steps) {
                    let prev = action.inverses[k][cur];
                    sign *= self.generators[k][prev] as i32;
                    cur = prev;
                }
            }
        }
        sign as i8
    }
}

impl Cocycle {
    pub fn evaluate(&self, family: &ActionFamily, t: &GroupElement, point: &Point) -> Result<f64> {
        match self {
            Cocycle::Trivial => Ok(1.0),
            Cocycle::FiniteTable(table) => match (family, point) {
                (ActionFamily::FiniteDiscrete(a), Point::Atom(s)) => {
                    Ok(f64::from(table.evaluate(a, t, *s)))
                }
                _ => Err(Error::UnsupportedFamily(
                    "tabulated cocycles exist only over finite discrete actions".into(),
                )),
            },
        }
    }
}

/// The kernel `f` of a triplet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    /// Value per atom of a finite discrete space.
    AtomTable(Vec<f64>),
    /// `f(y, z)` supported on `‖z‖∞ ≤ radius`: one row-major table over
    /// the offset cube per label `y`.
    MmaTable { per_label: Vec<Vec<f64>>, radius: i64 },
    /// `f(x) = 2^{−i/α} 1(x ∈ S_i, x(0) = l_i)`.
    MarkovAnchor,
    /// Coordinate projection `x ↦ x(0)`.
    CoordinateProjection,
}

/// A kernel, an action, and a cocycle: the generator of a stationary
/// SαS field for stability index `alpha`.
#[derive(Clone, Debug)]
pub struct RosinskiTriplet {
    family: ActionFamily,
    kernel: Kernel,
    cocycle: Cocycle,
    alpha: f64,
}

impl RosinskiTriplet {
    /// Validates the kernel against the family, requires `‖f‖_α > 0`,
    /// and enforces full support where it is checkable (exactly on
    /// finite discrete spaces; by construction elsewhere, with the one
    /// real condition being that every mixed-moving-average label has a
    /// nonzero kernel slice so no fiber is silently dead).
    pub fn new(family: ActionFamily, kernel: Kernel, cocycle: Cocycle, alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        if matches!(cocycle, Cocycle::FiniteTable(_)) && !matches!(family, ActionFamily::FiniteDiscrete(_)) {
            return Err(Error::UnsupportedFamily(
                "tabulated cocycles exist only over finite discrete actions".into(),
            ));
        }
        match (&family, &kernel) {
            (ActionFamily::FiniteDiscrete(a), Kernel::AtomTable(f)) => {
                if f.len() != a.space().len() {
                    return Err(Error::DimensionMismatch(format!(
                        "kernel has {} entries for {} atoms",
                        f.len(),
                        a.space().len()
                    )));
                }
                if lp_quasi_norm(f, a.space(), alpha)? == 0.0 {
                    return Err(Error::ModelPrecondition("kernel has zero quasi-norm".into()));
                }
                if let Cocycle::FiniteTable(table) = &cocycle {
                    // shape was fixed at table construction against some action;
                    // re-check against this one
                    CocycleTable::new_unchecked(a, table.generators.clone())?;
                }
                let triplet = RosinskiTriplet { family, kernel, cocycle, alpha };
                if !triplet.has_full_support()? {
                    return Err(Error::ModelPrecondition(
                        "kernel lacks full support: some orbit never meets its support".into(),
                    ));
                }
                Ok(triplet)
            }
            (ActionFamily::MixedMovingAverage(m), Kernel::MmaTable { per_label, radius }) => {
                if *radius != m.radius() {
                    return Err(Error::DimensionMismatch(format!(
                        "kernel radius {radius} differs from family radius {}",
                        m.radius()
                    )));
                }
                let cube = Window::cube(m.dim(), m.radius());
                if per_label.len() != m.labels().len() {
                    return Err(Error::DimensionMismatch(format!(
                        "kernel covers {} labels of {}",
                        per_label.len(),
                        m.labels().len()
                    )));
                }
                for (y, tab) in per_label.iter().enumerate() {
                    if tab.len() != cube.len() {
                        return Err(Error::DimensionMismatch(format!(
                            "kernel slice {y} has {} entries for an offset cube of {}",
                            tab.len(),
                            cube.len()
                        )));
                    }
                    if tab.iter().all(|v| *v == 0.0) {
                        return Err(Error::ModelPrecondition(format!(
                            "kernel slice for label {y} vanishes, so fiber {y} is outside every support"
                        )));
                    }
                }
                Ok(RosinskiTriplet { family, kernel, cocycle, alpha })
            }
            (ActionFamily::MarkovShift(_), Kernel::MarkovAnchor) => {
                Ok(RosinskiTriplet { family, kernel, cocycle, alpha })
            }
            (ActionFamily::SubGaussianShift(_), Kernel::CoordinateProjection) => {
                Ok(RosinskiTriplet { family, kernel, cocycle, alpha })
            }
            _ => Err(Error::UnsupportedFamily("kernel kind does not match the family".into())),
        }
    }

    pub fn family(&self) -> &ActionFamily {
        &self.family
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `f(point)`.
    pub fn kernel_value(&self, point: &Point) -> Result<f64> {
        match (&self.family, &self.kernel, point) {
            (ActionFamily::FiniteDiscrete(_), Kernel::AtomTable(f), Point::Atom(s)) => f
                .get(*s)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("atom {s} out of range"))),
            (ActionFamily::MixedMovingAverage(m), Kernel::MmaTable { per_label, .. }, Point::Mma { y, z }) => {
                let cube = Window::cube(m.dim(), m.radius());
                Ok(match cube.index_of(z) {
                    Some(idx) => per_label[*y][idx],
                    None => 0.0,
                })
            }
            (ActionFamily::MarkovShift(ms), Kernel::MarkovAnchor, Point::Path { class_pos, path }) => {
                let kernel = markov_field_kernel(ms.classes(), self.alpha);
                Ok(kernel.value(*class_pos, path.value_at(0)?))
            }
            (
                ActionFamily::SubGaussianShift(f),
                Kernel::CoordinateProjection,
                Point::RealField { window, values },
            ) => {
                let origin = GroupElement::identity(f.dim());
                let idx = window
                    .index_of(&origin)
                    .ok_or_else(|| Error::DomainExceeded("configuration does not record its origin".into()))?;
                Ok(values[idx])
            }
            _ => Err(Error::InvalidParameter("point does not belong to this family's space".into())),
        }
    }

    /// The spectral function `f_t(s) = c_t(s) (dμ∘φ_t/dμ(s))^{1/α} f(φ_t(s))`.
    pub fn spectral(&self, t: &GroupElement, point: &Point) -> Result<f64> {
        let c = self.cocycle.evaluate(&self.family, t, point)?;
        let rn = self.family.rn_derivative(t, point)?;
        let moved = self.family.apply(t, point)?;
        Ok(c * rn.powf(1.0 / self.alpha) * self.kernel_value(&moved)?)
    }

    /// Spectral function at `t` as a per-atom table (finite discrete
    /// families only).
    pub fn spectral_table(&self, t: &GroupElement) -> Result<Vec<f64>> {
        match &self.family {
            ActionFamily::FiniteDiscrete(a) => (0..a.space().len())
                .map(|s| self.spectral(t, &Point::Atom(s)))
                .collect(),
            _ => Err(Error::UnsupportedFamily(
                "per-atom spectral tables exist only for finite discrete families".into(),
            )),
        }
    }

    /// Exact scale of `Σ c_i X_{t_i}` where a closed form is available.
    ///
    /// Finite discrete and mixed-moving-average selections reduce to a
    /// quasi-norm over finitely many atoms; sub-Gaussian selections have
    /// the Gaussian-moment closed form. Markov-shift selections of more
    /// than one distinct index have no finite reduction here.
    pub fn selection_scale(&self, selection: &[(f64, GroupElement)]) -> Result<f64> {
        if selection.is_empty() {
            return Err(Error::EmptySelection);
        }
        let alpha = self.alpha;
        match &self.family {
            ActionFamily::FiniteDiscrete(a) => {
                let mut combined = vec![0.0; a.space().len()];
                for (c, t) in selection {
                    let table = self.spectral_table(t)?;
                    for (acc, v) in combined.iter_mut().zip(&table) {
                        *acc += c * v;
                    }
                }
                lp_quasi_norm(&combined, a.space(), alpha)
            }
            ActionFamily::MixedMovingAverage(m) => {
                // supports of the shifted kernels live in the union of
                // shifted offset cubes
                let r = m.radius();
                let lo: Vec<i64> = (0..m.dim())
                    .map(|k| selection.iter().map(|(_, t)| -r - t.coords()[k]).min().unwrap())
                    .collect();
                let hi: Vec<i64> = (0..m.dim())
                    .map(|k| selection.iter().map(|(_, t)| r - t.coords()[k]).max().unwrap())
                    .collect();
                let support = Window::new(lo, hi)?;
                let mut mass = 0.0;
                for y in 0..m.labels().len() {
                    for z in support.points() {
                        let mut v = 0.0;
                        for (c, t) in selection {
                            v += c * self.spectral(t, &Point::Mma { y, z: z.clone() })?;
                        }
                        mass += v.abs().powf(alpha) * m.labels().weight(y);
                    }
                }
                Ok(mass.powf(1.0 / alpha))
            }
            ActionFamily::SubGaussianShift(f) => {
                // ‖Σ c_i p_{t_i}‖_α = sd · (E|N|^α)^{1/α} · (Σ over distinct
                // t of the squared summed coefficient)^{1/2}
                let mut grouped: Vec<(GroupElement, f64)> = Vec::new();
                for (c, t) in selection {
                    match grouped.iter_mut().find(|(u, _)| u == t) {
                        Some((_, acc)) => *acc += c,
                        None => grouped.push((t.clone(), *c)),
                    }
                }
                let ssq: f64 = grouped.iter().map(|(_, c)| c * c).sum();
                Ok(f.coord_sd() * gaussian_abs_moment(alpha).powf(1.0 / alpha) * ssq.sqrt())
            }
            ActionFamily::MarkovShift(ms) => {
                let distinct: std::collections::HashSet<_> =
                    selection.iter().map(|(_, t)| t.coords().to_vec()).collect();
                if distinct.len() > 1 {
                    return Err(Error::UnsupportedFamily(
                        "multi-index selection scales over path spaces have no finite reduction".into(),
                    ));
                }
                let c: f64 = selection.iter().map(|(c, _)| c).sum();
                let kernel = markov_field_kernel(ms.classes(), alpha);
                let mut mass = 0.0;
                for (pos, class) in ms.classes().iter().enumerate() {
                    let pi = crate::markov::invariant_measure(class, ms.spec())?;
                    mass += kernel.anchor_weight(pos).powf(alpha) * pi.weight(class.anchor);
                }
                Ok(c.abs() * mass.powf(1.0 / alpha))
            }
        }
    }

    /// Scale of the marginal `X_t` (stationarity makes it independent
    /// of `t`).
    pub fn marginal_scale(&self) -> Result<f64> {
        let e = GroupElement::identity(self.family.dim());
        self.selection_scale(&[(1.0, e)])
    }

    /// Whether `∪_t Support(f ∘ φ_t)` covers the whole space, decided by
    /// orbit closure. Exact, and only meaningful, on finite discrete
    /// spaces.
    pub fn has_full_support(&self) -> Result<bool> {
        let (action, f) = match (&self.family, &self.kernel) {
            (ActionFamily::FiniteDiscrete(a), Kernel::AtomTable(f)) => (a, f),
            _ => {
                return Err(Error::UnsupportedFamily(
                    "full-support checking is implemented for finite discrete families".into(),
                ))
            }
        };
        for orbit in action.orbits() {
            if orbit.iter().all(|&s| f[s] == 0.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Minimality on a finite discrete space: the extended-real ratios
    /// `f_t/f_u` must separate every pair of distinct atoms. The indices
    /// range over the finite closure of the action-and-cocycle data, so
    /// the family `{f_t}` is enumerated exactly.
    pub fn is_minimal_finite(&self) -> Result<bool> {
        let action = match &self.family {
            ActionFamily::FiniteDiscrete(a) => a,
            _ => {
                return Err(Error::UnsupportedFamily(
                    "minimality checking is implemented for finite discrete families".into(),
                ))
            }
        };
        if !self.has_full_support()? {
            return Err(Error::ModelPrecondition(
                "minimality is only defined under full support".into(),
            ));
        }
        let tables = self.spectral_closure(action)?;
        let n = action.space().len();
        for s1 in 0..n {
            for s2 in (s1 + 1)..n {
                let mut separated = false;
                'outer: for ft in &tables {
                    for fu in &tables {
                        let r1 = ExtRatio::of(ft[s1], fu[s1]);
                        let r2 = ExtRatio::of(ft[s2], fu[s2]);
                        if !r1.approx_eq(&r2) {
                            separated = true;
                            break 'outer;
                        }
                    }
                }
                if !separated {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All distinct spectral tables `{f_t : t ∈ ℤᵈ}`, enumerated by
    /// breadth-first closure over (permutation, sign-table) states.
    fn spectral_closure(&self, action: &FiniteDiscreteAction) -> Result<Vec<Vec<f64>>> {
        let n = action.space().len();
        let identity: (Vec<usize>, Vec<i8>) = ((0..n).collect(), vec![1; n]);
        let mut seen = std::collections::HashSet::new();
        seen.insert(identity.clone());
        let mut queue = std::collections::VecDeque::from([identity]);
        let mut states = Vec::new();
        while let Some(state) = queue.pop_front() {
            states.push(state.clone());
            if states.len() > 200_000 {
                return Err(Error::Internal("spectral closure exceeded its size bound".into()));
            }
            let (perm, signs) = &state;
            for k in 0..action.dim() {
                for dir in [1i64, -1] {
                    // compose one unit step onto (φ_t, c_t)
                    let mut step = vec![0i64; action.dim()];
                    step[k] = dir;
                    let step = GroupElement::new(step);
                    let mut new_perm = vec![0usize; n];
                    let mut new_signs = vec![1i8; n];
                    for s in 0..n {
                        new_perm[s] = action.map_atom(&step, perm[s]);
                        let step_sign = match &self.cocycle {
                            Cocycle::Trivial => 1,
                            Cocycle::FiniteTable(table) => table.evaluate(action, &step, perm[s]),
                        };
                        new_signs[s] = signs[s] * step_sign;
                    }
                    let cand = (new_perm, new_signs);
                    if seen.insert(cand.clone()) {
                        queue.push_back(cand);
                    }
                }
            }
        }
        let f = match &self.kernel {
            Kernel::AtomTable(f) => f,
            _ => unreachable!("finite discrete triplets carry atom tables"),
        };
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(states.len());
        for (perm, signs) in states {
            let mut table = Vec::with_capacity(n);
            for s in 0..n {
                let img = perm[s];
                let rn = action.space().weight(img) / action.space().weight(s);
                table.push(f64::from(signs[s]) * rn.powf(1.0 / self.alpha) * f[img]);
            }
            if !tables.iter().any(|t| t == &table) {
                tables.push(table);
            }
        }
        Ok(tables)
    }
}

/// An extended-real ratio value with the sign convention for zero
/// denominators: `+∞` when the numerator is ≥ 0 and `−∞` when it is
/// negative.
#[derive(Clone, Copy, Debug)]
enum ExtRatio {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtRatio {
    fn of(num: f64, den: f64) -> Self {
        if den == 0.0 {
            if num >= 0.0 {
                ExtRatio::PosInf
            } else {
                ExtRatio::NegInf
            }
        } else {
            ExtRatio::Finite(num / den)
        }
    }

    fn approx_eq(&self, other: &ExtRatio) -> bool {
        match (self, other) {
            (ExtRatio::PosInf, ExtRatio::PosInf) | (ExtRatio::NegInf, ExtRatio::NegInf) => true,
            (ExtRatio::Finite(a), ExtRatio::Finite(b)) => {
                (a - b).abs() <= RATIO_TOL * a.abs().max(b.abs()).max(1.0)
            }
            _ => false,
        }
    }
}

/// Outcome of a sampled structural check.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ViolationReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `φ_e = id` and `φ_{u+v}(s) = φ_v(φ_u(s))` over the sampled
/// points and indices. Evaluation failures count as violations.
pub fn verify_action_axioms(
    family: &ActionFamily,
    sample_points: &[Point],
    sample_ts: &[GroupElement],
) -> ViolationReport {
    let mut report = ViolationReport::default();
    let e = GroupElement::identity(family.dim());
    for (i, p) in sample_points.iter().enumerate() {
        report.checked += 1;
        match family.apply(&e, p) {
            Ok(q) if &q == p => {}
            Ok(_) => report.violations.push(format!("φ_e moves point {i}")),
            Err(err) => report.violations.push(format!("φ_e failed on point {i}: {err}")),
        }
    }
    for u in sample_ts {
        for v in sample_ts {
            for (i, p) in sample_points.iter().enumerate() {
                report.checked += 1;
                let lhs = family.apply(&u.add(v), p);
                let rhs = family.apply(u, p).and_then(|q| family.apply(v, &q));
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(_), Ok(_)) => report.violations.push(format!(
                        "φ_{{u+v}} ≠ φ_v∘φ_u at point {i}, u={:?}, v={:?}",
                        u.coords(),
                        v.coords()
                    )),
                    (Err(err), _) | (_, Err(err)) => report
                        .violations
                        .push(format!("axiom check failed to evaluate at point {i}: {err}")),
                }
            }
        }
    }
    report
}

/// Checks the cocycle identity `c_{u+v}(s) = c_u(s) c_v(φ_u(s))` over
/// the samples.
pub fn verify_cocycle(
    cocycle: &Cocycle,
    family: &ActionFamily,
    sample_points: &[Point],
    sample_ts: &[GroupElement],
) -> ViolationReport {
    let mut report = ViolationReport::default();
    for u in sample_ts {
        for v in sample_ts {
            for (i, p) in sample_points.iter().enumerate() {
                report.checked += 1;
                let lhs = cocycle.evaluate(family, &u.add(v), p);
                let rhs = (|| {
                    let cu = cocycle.evaluate(family, u, p)?;
                    let moved = family.apply(u, p)?;
                    Ok::<f64, Error>(cu * cocycle.evaluate(family, v, &moved)?)
                })();
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(a), Ok(b)) => report.violations.push(format!(
                        "cocycle identity fails at point {i}, u={:?}, v={:?}: {a} vs {b}",
                        u.coords(),
                        v.coords()
                    )),
                    (Err(err), _) | (_, Err(err)) => report
                        .violations
                        .push(format!("cocycle check failed to evaluate at point {i}: {err}")),
                }
            }
        }
    }
    report
}

/// Checks the chain rule
/// `dμ∘φ_{u+v}/dμ(s) = dμ∘φ_u/dμ(s) · dμ∘φ_v/dμ(φ_u(s))`
/// within relative tolerance [`RATIO_TOL`].
pub fn verify_rn_chain_rule(
    family: &ActionFamily,
    sample_points: &[Point],
    sample_ts: &[GroupElement],
) -> ViolationReport {
    let mut report = ViolationReport::default();
    for u in sample_ts {
        for v in sample_ts {
            for (i, p) in sample_points.iter().enumerate() {
                report.checked += 1;
                let result = (|| {
                    let lhs = family.rn_derivative(&u.add(v), p)?;
                    let a = family.rn_derivative(u, p)?;
                    let moved = family.apply(u, p)?;
                    let b = family.rn_derivative(v, &moved)?;
                    Ok::<(f64, f64), Error>((lhs, a * b))
                })();
                match result {
                    Ok((lhs, rhs)) => {
                        if (lhs - rhs).abs() > RATIO_TOL * lhs.abs().max(rhs.abs()).max(1.0) {
                            report.violations.push(format!(
                                "chain rule fails at point {i}, u={:?}, v={:?}: {lhs} vs {rhs}",
                                u.coords(),
                                v.coords()
                            ));
                        }
                    }
                    Err(err) => report
                        .violations
                        .push(format!("chain rule failed to evaluate at point {i}: {err}")),
                }
            }
        }
    }
    report
}

/// Transports a finite discrete triplet along an atom bijection `h`
/// with sign function `b` onto a target weighting.
///
/// The conjugated action is `φ²_t = h ∘ φ¹_t ∘ h⁻¹`, the kernel is
/// `f²(s) = b(s) (d(μ₁∘h⁻¹)/dμ₂(s))^{1/α} f¹(h⁻¹(s))`, and the cocycle
/// is `c²_t(s) = c¹_t(h⁻¹(s)) · b(s) · b(φ²_t(s))`; both triplets then
/// generate identically distributed fields, so every finite selection
/// scale agrees across the transport.
pub fn transport_triplet(
    triplet: &RosinskiTriplet,
    h: &[usize],
    b: &[i8],
    target: FiniteWeightedSpace,
) -> Result<RosinskiTriplet> {
    let (action, f) = match (triplet.family(), triplet.kernel()) {
        (ActionFamily::FiniteDiscrete(a), Kernel::AtomTable(f)) => (a, f),
        _ => {
            return Err(Error::UnsupportedFamily(
                "transport is defined for finite discrete triplets".into(),
            ))
        }
    };
    let n = action.space().len();
    if target.len() != n || h.len() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "transport data sized {}/{}/{} for {n} atoms",
            h.len(),
            b.len(),
            target.len()
        )));
    }
    let mut inverse = vec![usize::MAX; n];
    for (s, &img) in h.iter().enumerate() {
        if img >= n || inverse[img] != usize::MAX {
            return Err(Error::InvalidParameter("h is not a bijection of the atoms".into()));
        }
        inverse[img] = s;
    }
    if b.iter().any(|v| *v != 1 && *v != -1) {
        return Err(Error::InvalidParameter("b must be ±1 per atom".into()));
    }

    let alpha = triplet.alpha();
    let mut generators2 = vec![vec![0usize; n]; action.dim()];
    for (k, gen) in action.generators().iter().enumerate() {
        for s in 0..n {
            generators2[k][h[s]] = h[gen[s]];
        }
    }
    let action2 = FiniteDiscreteAction::new(target.clone(), generators2.clone())?;

    let mut f2 = vec![0.0; n];
    for s2 in 0..n {
        let s1 = inverse[s2];
        let rn = action.space().weight(s1) / target.weight(s2);
        f2[s2] = f64::from(b[s2]) * rn.powf(1.0 / alpha) * f[s1];
    }

    let mut tables2 = vec![vec![1i8; n]; action.dim()];
    let mut any_negative = false;
    for (k, table2) in tables2.iter_mut().enumerate() {
        let mut unit = vec![0i64; action.dim()];
        unit[k] = 1;
        let unit = GroupElement::new(unit);
        for s2 in 0..n {
            let s1 = inverse[s2];
            let c1 = match triplet.cocycle() {
                Cocycle::Trivial => 1,
                Cocycle::FiniteTable(t) => t.evaluate(action, &unit, s1),
            };
            let moved = generators2[k][s2];
            table2[s2] = c1 * b[s2] * b[moved];
            if table2[s2] == -1 {
                any_negative = true;
            }
        }
    }
    let cocycle2 = if any_negative {
        Cocycle::FiniteTable(CocycleTable::new(&action2, tables2)?)
    } else {
        Cocycle::Trivial
    };

    RosinskiTriplet::new(
        ActionFamily::FiniteDiscrete(action2),
        Kernel::AtomTable(f2),
        cocycle2,
        alpha,
    )
}
