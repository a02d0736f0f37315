//! Symmetric α-stable laws and stable stochastic integrals.
//!
//! A random variable is SαS(σ) when its characteristic function is
//! `E e^{iθX} = exp(−σ^α |θ|^α)` with stability index `α ∈ (0,2)` and
//! scale `σ ≥ 0`. Sampling uses the Chambers–Mallows–Stuck transform of
//! a (uniform, exponential) pair, which is exact and O(1) per draw.
//!
//! Stable integrals `X_t = ∫_S f_t dM` are simulated three ways:
//!
//! * exactly on finite weighted spaces, where `M({s})` is an independent
//!   SαS(μ(s)^{1/α}) per atom ([`simulate_discrete_integral`]);
//! * by a truncated series with Poisson arrival times on components that
//!   only admit a probability sampler ([`simulate_lepage_integral`]);
//! * as an extremal (max-) integral against independent α-Fréchet atoms
//!   for the max-stable analogue ([`simulate_frechet_extremal`]).
//!
//! Every finite linear combination `Σ c_i X_{t_i}` of an integral field
//! is SαS with scale `‖Σ c_i f_{t_i}‖_α`; [`combination_scale`] computes
//! that quantity and is the exact oracle the simulators are tested
//! against.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::lattice::{FieldRealization, GroupElement, RealizationMeta, Window};
use crate::{Error, Result};

/// Stability index and scale of one SαS law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    scale: f64,
}

impl StableParams {
    /// Requires `0 < alpha < 2` strictly (the Gaussian endpoint is out of
    /// scope) and `scale ≥ 0`; zero scale is the point mass at 0.
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::InvalidParameter(format!("scale must be finite and ≥ 0, got {scale}")));
        }
        Ok(StableParams { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `exp(−σ^α |θ|^α)`, the characteristic function at `θ`.
    pub fn cf(&self, theta: f64) -> f64 {
        (-self.scale.powf(self.alpha) * theta.abs().powf(self.alpha)).exp()
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    Ok(())
}

/// One draw from SαS(σ).
pub fn sample_sas<R: Rng + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    if params.scale == 0.0 {
        return 0.0;
    }
    params.scale * sample_standard_sas(params.alpha, rng)
}

/// One draw from the standard SαS law (σ = 1) by the
/// Chambers–Mallows–Stuck transform. `alpha` must already be validated.
pub fn sample_standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = (rng.random::<f64>() - 0.5) * PI; // Uniform(−π/2, π/2)
    if alpha == 1.0 {
        // the symmetric α = 1 branch is exactly Cauchy
        return u.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let cu = u.cos();
    ((alpha * u).sin() / cu.powf(1.0 / alpha))
        * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
}

/// One draw from the totally skewed positive stable law `S_α(1, β=1, 0)`
/// for `α ∈ (0,1)`, with Laplace transform
/// `E e^{−γX} = exp(−γ^α / cos(πα/2))`.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let b = PI / 2.0;
    let s = (PI * alpha / 2.0).cos().powf(-1.0 / alpha);
    let u = (rng.random::<f64>() - 0.5) * PI;
    let w: f64 = Exp1.sample(rng);
    s * ((alpha * (u + b)).sin() / u.cos().powf(1.0 / alpha))
        * ((u - alpha * (u + b)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// One draw from the standard α-Fréchet law, `P(W ≤ x) = exp(−x^{−α})`.
pub fn sample_frechet<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let mut u: f64 = rng.random();
    while u <= 0.0 {
        u = rng.random();
    }
    (-u.ln()).powf(-1.0 / alpha)
}

/// A finite measure space: distinct atom labels with strictly positive
/// masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteWeightedSpace {
    atoms: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteWeightedSpace {
    pub fn new(atoms: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms against {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        for w in &weights {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidParameter(format!("atom weight must be finite and > 0, got {w}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for a in &atoms {
            if !seen.insert(a.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate atom label {a:?}")));
            }
        }
        Ok(FiniteWeightedSpace { atoms, weights })
    }

    /// Convenience constructor labeling atoms `"0", "1", …`.
    pub fn with_weights(weights: Vec<f64>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(atoms, weights)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.atoms
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == label)
    }
}

/// `‖f‖_α = (Σ_s |f(s)|^α μ(s))^{1/α}` on a finite weighted space.
pub fn lp_quasi_norm(f: &[f64], space: &FiniteWeightedSpace, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "function has {} entries on a space of {} atoms",
            f.len(),
            space.len()
        )));
    }
    let mass: f64 = f
        .iter()
        .zip(space.weights())
        .map(|(v, w)| v.abs().powf(alpha) * w)
        .sum();
    Ok(mass.powf(1.0 / alpha))
}

/// Scale of `Σ c_i X_{t_i}` for a field represented by per-atom spectral
/// functions: `‖Σ c_i f_{t_i}‖_α`.
pub fn combination_scale(
    terms: &[(f64, Vec<f64>)],
    space: &FiniteWeightedSpace,
    alpha: f64,
) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut combined = vec![0.0; space.len()];
    for (c, f) in terms {
        if f.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "spectral function has {} entries on a space of {} atoms",
                f.len(),
                space.len()
            )));
        }
        for (acc, v) in combined.iter_mut().zip(f) {
            *acc += c * v;
        }
    }
    lp_quasi_norm(&combined, space, alpha)
}

/// Truncation level and component mass for series simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LePageConfig {
    truncation: u64,
    total_mass: f64,
}

impl LePageConfig {
    pub fn new(truncation: u64, total_mass: f64) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::InvalidParameter("truncation level must be ≥ 1".into()));
        }
        if !total_mass.is_finite() || total_mass <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "component mass must be finite and > 0, got {total_mass}"
            )));
        }
        Ok(LePageConfig { truncation, total_mass })
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

impl Default for LePageConfig {
    fn default() -> Self {
        LePageConfig { truncation: 10_000, total_mass: 1.0 }
    }
}

/// Exact simulation of `X_t = ∫_S f_t dM` on a finite weighted space.
///
/// One standard SαS draw `Z_s` is shared per atom across all `t`, so
/// `X_t = Σ_s f_t(s) μ(s)^{1/α} Z_s` has exactly the finite-dimensional
/// distributions of the integral field. Fixed seeds reproduce the values
/// bit-identically.
pub fn simulate_discrete_integral<F>(
    spectral: F,
    space: &FiniteWeightedSpace,
    alpha: f64,
    window: &Window,
    seed: u64,
) -> Result<FieldRealization>
where
    F: Fn(&GroupElement) -> Result<Vec<f64>>,
{
    validate_alpha(alpha)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..space.len()).map(|_| sample_standard_sas(alpha, &mut rng)).collect();
    let mass_pow: Vec<f64> = space.weights().iter().map(|w| w.powf(1.0 / alpha)).collect();

    let mut values = Vec::with_capacity(window.len());
    for t in window.points() {
        let f_t = spectral(&t)?;
        if f_t.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "spectral function at {:?} has {} entries on a space of {} atoms",
                t.coords(),
                f_t.len(),
                space.len()
            )));
        }
        let x: f64 = f_t.iter().zip(&mass_pow).zip(&z).map(|((f, m), z)| f * m * z).sum();
        values.push(x);
    }
    FieldRealization::new(
        window.clone(),
        values,
        RealizationMeta {
            seed,
            method: "discrete".into(),
            truncation: None,
            truncated_mass: None,
            tail_magnitude: None,
        },
    )
}

/// Truncated series simulation of the stable integral on a component
/// that only admits a probability sampler.
///
/// With `Γ_j` unit-rate Poisson arrival times, `ε_j` independent signs,
/// and `V_j` drawn from the μ-normalized probability measure of the
/// component (of mass `m`),
///
/// ```text
/// X_t ≈ K_α^{1/α} · m^{1/α} · Σ_{j ≤ J} ε_j Γ_j^{−1/α} f_t(V_j)
/// ```
///
/// where `K_α = (∫₀^∞ x^{−α} sin x dx)^{−1}`. For `α ≥ 1` the series
/// converges only conditionally; terms carry independent signs and the
/// magnitude proxy `m^{1/α} Γ_J^{−1/α}` of the first discarded term is
/// reported in the metadata.
pub fn simulate_lepage_integral<P, S, F>(
    mut component_sampler: S,
    f_evaluator: F,
    alpha: f64,
    cfg: &LePageConfig,
    window: &Window,
    seed: u64,
) -> Result<FieldRealization>
where
    S: FnMut(&mut ChaCha12Rng) -> Result<P>,
    F: Fn(&GroupElement, &P) -> Result<f64>,
{
    validate_alpha(alpha)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let points = window.points();
    let mut acc = vec![0.0f64; points.len()];

    let mut gamma = 0.0f64;
    for _ in 0..cfg.truncation() {
        let e: f64 = Exp1.sample(&mut rng);
        gamma += e;
        let weight = gamma.powf(-1.0 / alpha);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let v = component_sampler(&mut rng)?;
        for (x, t) in acc.iter_mut().zip(&points) {
            let f = f_evaluator(t, &v)?;
            if f != 0.0 {
                *x += sign * weight * f;
            }
        }
    }

    let norm = stable_series_constant(alpha).powf(1.0 / alpha) * cfg.total_mass().powf(1.0 / alpha);
    for x in &mut acc {
        *x *= norm;
    }
    let tail = cfg.total_mass().powf(1.0 / alpha) * gamma.powf(-1.0 / alpha);
    FieldRealization::new(
        window.clone(),
        acc,
        RealizationMeta {
            seed,
            method: "lepage".into(),
            truncation: Some(cfg.truncation()),
            truncated_mass: Some(cfg.total_mass()),
            tail_magnitude: Some(tail),
        },
    )
}

/// Extremal-integral simulation for the max-stable analogue.
///
/// `X_t = max_s f_t(s) μ(s)^{1/α} W_s` with `W_s` independent standard
/// α-Fréchet; the marginal is α-Fréchet with scale `(Σ_s f_t(s)^α μ(s))^{1/α}`.
/// All spectral values must be nonnegative.
pub fn simulate_frechet_extremal<F>(
    spectral: F,
    space: &FiniteWeightedSpace,
    alpha: f64,
    window: &Window,
    seed: u64,
) -> Result<FieldRealization>
where
    F: Fn(&GroupElement) -> Result<Vec<f64>>,
{
    validate_alpha(alpha)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..space.len()).map(|_| sample_frechet(alpha, &mut rng)).collect();
    let mass_pow: Vec<f64> = space.weights().iter().map(|m| m.powf(1.0 / alpha)).collect();

    let mut values = Vec::with_capacity(window.len());
    for t in window.points() {
        let f_t = spectral(&t)?;
        if f_t.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "spectral function at {:?} has {} entries on a space of {} atoms",
                t.coords(),
                f_t.len(),
                space.len()
            )));
        }
        let mut x = 0.0f64;
        for ((f, m), w) in f_t.iter().zip(&mass_pow).zip(&w) {
            if *f < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "extremal integral needs nonnegative spectral values, got {f}"
                )));
            }
            x = x.max(f * m * w);
        }
        values.push(x);
    }
    FieldRealization::new(
        window.clone(),
        values,
        RealizationMeta {
            seed,
            method: "frechet".into(),
            truncation: None,
            truncated_mass: None,
            tail_magnitude: None,
        },
    )
}

/// The series normalizing constant `K_α = (∫₀^∞ x^{−α} sin x dx)^{−1}`.
///
/// Computed once per α by quadrature to relative accuracy well below
/// 10⁻⁸ and cached: a power series on `[0, 1]`, Gauss–Legendre panels of
/// length π up to `A = 2048π`, and an integration-by-parts expansion of
/// the oscillatory tail beyond `A`.
pub fn stable_series_constant(alpha: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&alpha.to_bits()) {
        return *v;
    }
    let value = 1.0 / sin_power_integral(alpha);
    cache.lock().unwrap().insert(alpha.to_bits(), value);
    value
}

/// `∫₀^∞ x^{−α} sin x dx` for `α ∈ (0, 2)`.
fn sin_power_integral(alpha: f64) -> f64 {
    // [0, 1]: ∫ x^{−α} sin x = Σ (−1)^n / ((2n+1)! (2n+2−α))
    let mut head = 0.0f64;
    let mut factorial = 1.0f64; // (2n+1)!
    for n in 0..18 {
        let k = 2 * n + 1;
        if n > 0 {
            factorial *= (k - 1) as f64 * k as f64;
        }
        let term = 1.0 / (factorial * (k as f64 + 1.0 - alpha));
        head += if n % 2 == 0 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }

    // [1, A]: fixed Gauss–Legendre panels, one per π-length interval.
    let periods = 2048usize;
    let a_end = periods as f64 * PI;
    let f = |x: f64| x.powf(-alpha) * x.sin();
    let mut mid = gauss_legendre(f, 1.0, PI);
    for k in 1..periods {
        mid += gauss_legendre(f, k as f64 * PI, (k + 1) as f64 * PI);
    }

    // tail: two rounds of integration by parts, remainder O(A^{−α−3})
    let a = a_end;
    let tail = a.powf(-alpha) * a.cos() + alpha * a.powf(-alpha - 1.0) * a.sin()
        - alpha * (alpha + 1.0) * a.powf(-alpha - 2.0) * a.cos()
        - alpha * (alpha + 1.0) * (alpha + 2.0) * a.powf(-alpha - 3.0) * a.sin();

    head + mid + tail
}

/// `E |N(0,1)|^α`, the absolute moment of the standard Gaussian: a power
/// series on `[0, 1]` plus Gauss–Legendre panels on `[1, 12]`.
pub fn gaussian_abs_moment(alpha: f64) -> f64 {
    // ∫₀^1 x^α e^{−x²/2} dx = Σ_k (−1/2)^k / (k! (α + 2k + 1))
    let mut s01 = 0.0f64;
    let mut coef = 1.0f64; // (−1/2)^k / k!
    for k in 0..40 {
        if k > 0 {
            coef *= -0.5 / k as f64;
        }
        let term = coef / (alpha + 2.0 * k as f64 + 1.0);
        s01 += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let f = |x: f64| x.powf(alpha) * (-x * x / 2.0).exp();
    let mut s = s01;
    for k in 1..12 {
        s += gauss_legendre(f, k as f64, (k + 1) as f64);
    }
    (2.0 / PI).sqrt() * s
}

// 16-point Gauss–Legendre nodes and weights on [−1, 1].
const GL_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        s += w * (f(c + h * x) + f(c - h * x));
    }
    s * h
}
