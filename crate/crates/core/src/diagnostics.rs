//! Monte Carlo cross-validation of the symbolic verdicts.
//!
//! The estimator at the center of this module is the cube average
//! `θ̂_n = (2n+1)^{−d} Σ_{‖t‖∞ ≤ n} h(X_t)`. For an ergodic field it
//! converges almost surely to `E h(X_0)`, so its spread across
//! independent realizations collapses as `n` grows; for a field with a
//! nonempty positive part the per-realization limits differ and the
//! spread stays put. [`dispersion_experiment`] turns that contrast into
//! a finite-sample decision rule. The remaining tools (empirical
//! characteristic functions, scale fitting, stationarity tests, maxima
//! growth) quantify how well simulated fields match their stable-law
//! contracts.

use serde::{Deserialize, Serialize};

use crate::fields::FieldSampler;
use crate::lattice::{FieldRealization, GroupElement, Window};
use crate::rng::stream_seed;
use crate::stable::validate_alpha;
use crate::{Error, Result};

/// A bounded test function with a printable name.
pub struct BoundedFunction {
    pub name: String,
    pub sup_bound: f64,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BoundedFunction {
    pub fn new(
        name: impl Into<String>,
        sup_bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundedFunction { name: name.into(), sup_bound, f: Box::new(f) }
    }

    /// The default diagnostic function: bounded, and `E cos X` has the
    /// closed form `exp(−σ^α)` for an SαS(σ) marginal.
    pub fn cosine() -> Self {
        Self::new("cos", 1.0, f64::cos)
    }

    pub fn sign() -> Self {
        Self::new("sign", 1.0, |x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Cube averages of one realization along an increasing `n` grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErgodicAverageTrace {
    pub n_grid: Vec<i64>,
    pub values: Vec<f64>,
    pub h_name: String,
}

/// `θ̂_n = (2n+1)^{−d} Σ_{‖t‖∞ ≤ n} h(X_t)` for each `n` in the grid.
///
/// The realization window must contain the largest cube.
pub fn ergodic_average(
    realization: &FieldRealization,
    h: &BoundedFunction,
    n_grid: &[i64],
) -> Result<ErgodicAverageTrace> {
    if n_grid.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    if grid[0] < 0 {
        return Err(Error::InvalidParameter("cube radii must be ≥ 0".into()));
    }
    let d = realization.dim();
    let n_max = *grid.last().unwrap();
    let cube = Window::cube(d, n_max);
    for k in 0..d {
        if realization.window().lo()[k] > cube.lo()[k] || realization.window().hi()[k] < cube.hi()[k] {
            return Err(Error::InvalidParameter(format!(
                "realization window does not contain the radius-{n_max} cube"
            )));
        }
    }

    // one pass, accumulating h into the smallest cube that contains each point
    let mut sums = vec![0.0f64; grid.len()];
    for t in cube.points() {
        let x = realization.value_at(&t).expect("cube inside window");
        let r = t.norm_inf();
        let slot = grid.partition_point(|n| *n < r);
        if slot < grid.len() {
            sums[slot] += h.eval(x);
        }
    }
    let mut running = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for (i, n) in grid.iter().enumerate() {
        running += sums[i];
        let count = (2 * n + 1).pow(d as u32) as f64;
        values.push(running / count);
    }
    Ok(ErgodicAverageTrace { n_grid: grid, values, h_name: h.name.clone() })
}

/// Decision thresholds on the dispersion decay ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionThresholds {
    pub ergodic: f64,
    pub non_ergodic: f64,
}

impl Default for DispersionThresholds {
    // pre-registered against the two analytically classified extremes
    fn default() -> Self {
        DispersionThresholds { ergodic: 0.35, non_ergodic: 0.7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmpiricalVerdict {
    EmpiricallyErgodic,
    EmpiricallyNonErgodic,
    Inconclusive,
}

/// Verdict of the dispersion experiment, with the observed decay ratio.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DispersionVerdict {
    pub verdict: EmpiricalVerdict,
    /// `sd(θ̂ at n_max) / sd(θ̂ at n_min)` across realizations.
    pub rho: f64,
    pub thresholds: DispersionThresholds,
}

/// Per-`n` spread of the estimator across realizations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionTable {
    pub n_grid: Vec<i64>,
    /// `theta_hats[k][i]` is `θ̂_{n_i}` of realization `k`.
    pub theta_hats: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// Simulates `r` independent realizations and classifies the decay of
/// the estimator's spread.
pub fn dispersion_experiment(
    sampler: &dyn FieldSampler,
    h: &BoundedFunction,
    n_grid: &[i64],
    r: usize,
    thresholds: DispersionThresholds,
    root_seed: u64,
) -> Result<(DispersionVerdict, DispersionTable)> {
    if r < 30 {
        return Err(Error::InvalidParameter(format!("need ≥ 30 realizations, got {r}")));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    let n_max = *grid.last().ok_or(Error::EmptySelection)?;
    let window = Window::cube(sampler.dim(), n_max);

    let mut theta_hats = Vec::with_capacity(r);
    for k in 0..r {
        let seed = stream_seed(root_seed, &format!("realization/{k}"));
        let realization = sampler.realize_window(&window, seed)?;
        let trace = ergodic_average(&realization, h, &grid)?;
        theta_hats.push(trace.values);
    }

    let mut mean = vec![0.0; grid.len()];
    let mut sd = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let m = theta_hats.iter().map(|t| t[i]).sum::<f64>() / r as f64;
        let v = theta_hats.iter().map(|t| (t[i] - m).powi(2)).sum::<f64>() / (r - 1) as f64;
        mean[i] = m;
        sd[i] = v.sqrt();
    }

    let rho = if sd[grid.len() - 1] == 0.0 {
        0.0
    } else if sd[0] == 0.0 {
        f64::INFINITY
    } else {
        sd[grid.len() - 1] / sd[0]
    };
    let verdict = if rho < thresholds.ergodic {
        EmpiricalVerdict::EmpiricallyErgodic
    } else if rho > thresholds.non_ergodic {
        EmpiricalVerdict::EmpiricallyNonErgodic
    } else {
        EmpiricalVerdict::Inconclusive
    };
    Ok((
        DispersionVerdict { verdict, rho, thresholds },
        DispersionTable { n_grid: grid, theta_hats, mean, sd },
    ))
}

/// Empirical characteristic function at one `θ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CfEstimate {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

/// Mean of `e^{iθx}` per grid point with jackknife standard errors.
pub fn empirical_cf(samples: &[f64], theta_grid: &[f64]) -> Result<Vec<CfEstimate>> {
    if samples.is_empty() {
        return Err(Error::EmptySelection);
    }
    let n = samples.len() as f64;
    let mut out = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        if theta == 0.0 {
            out.push(CfEstimate { theta, re: 1.0, im: 0.0, se_re: 0.0, se_im: 0.0 });
            continue;
        }
        let mut sc = 0.0;
        let mut ss = 0.0;
        let mut sc2 = 0.0;
        let mut ss2 = 0.0;
        for &x in samples {
            let (s, c) = (theta * x).sin_cos();
            sc += c;
            ss += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        let re = sc / n;
        let im = ss / n;
        // leave-one-out jackknife of the mean collapses to sd/√n
        let se_re = ((sc2 / n - re * re).max(0.0) / (n - 1.0).max(1.0)).sqrt();
        let se_im = ((ss2 / n - im * im).max(0.0) / (n - 1.0).max(1.0)).sqrt();
        out.push(CfEstimate { theta, re, im, se_re, se_im });
    }
    Ok(out)
}

/// Fits the scale of SαS samples by regressing `−log|φ̂(θ)| = (σθ)^α`
/// through the origin over a pilot-scaled `θ` grid, keeping only grid
/// points where `|φ̂|` stays away from 0 and 1.
pub fn scale_fit(samples: &[f64], alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    if samples.len() < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "scale fit needs ≥ 1000 samples, got {}",
            samples.len()
        )));
    }
    // scale-equivariant pilot so the grid (and hence the fit) commutes
    // with rescaling of the samples
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pilot = abs[abs.len() / 2];
    if pilot == 0.0 || !pilot.is_finite() {
        return Err(Error::FitUnstable);
    }

    let n = samples.len() as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut used = 0;
    for j in 0..16 {
        let g = 0.1 * 20.0f64.powf(j as f64 / 15.0);
        let theta = g / pilot;
        let mut sc = 0.0;
        let mut ss = 0.0;
        for &x in samples {
            let (s, c) = (theta * x).sin_cos();
            sc += c;
            ss += s;
        }
        let modulus = ((sc / n).powi(2) + (ss / n).powi(2)).sqrt();
        if !(0.05..=0.95).contains(&modulus) {
            continue;
        }
        let y = -modulus.ln();
        let x = theta.powf(alpha);
        sxy += x * y;
        sxx += x * x;
        used += 1;
    }
    if used == 0 || sxx == 0.0 {
        return Err(Error::FitUnstable);
    }
    let slope = sxy / sxx; // = σ^α
    if slope <= 0.0 {
        return Err(Error::FitUnstable);
    }
    Ok(slope.powf(1.0 / alpha))
}

/// Two-sample Kolmogorov–Smirnov distance and asymptotic p-value.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, ks_survival(lambda))
}

/// One-sample Kolmogorov–Smirnov distance against a reference CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let fx = cdf(*x);
        d = d.max((fx - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - fx).abs());
    }
    d
}

fn ks_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Stationarity evidence for one lag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LagReport {
    pub lag: GroupElement,
    pub ks_distance: f64,
    pub ks_p: f64,
    /// Max joint-CF discrepancy between the pairs `(X_0, X_{e_1})` and
    /// `(X_s, X_{s+e_1})` over a small `θ` grid.
    pub joint_cf_distance: f64,
}

/// Compares the marginal at lag 0 with the marginal at each lag by a
/// two-sample KS test, plus a joint-CF distance for shifted pairs.
///
/// All lags for one draw come from a single joint sample, so the groups
/// share the underlying randomness; under stationarity that only makes
/// the test conservative.
pub fn stationarity_test(
    sampler: &dyn FieldSampler,
    lags: &[GroupElement],
    n_draws: usize,
    root_seed: u64,
) -> Result<Vec<LagReport>> {
    if lags.is_empty() || n_draws == 0 {
        return Err(Error::EmptySelection);
    }
    let d = sampler.dim();
    let mut e1 = vec![0i64; d];
    e1[0] = 1;
    let e1 = GroupElement::new(e1);
    let zero = GroupElement::identity(d);

    let mut points = vec![zero.clone(), e1.clone()];
    for lag in lags {
        if lag.dim() != d {
            return Err(Error::DimensionMismatch("lag dimension differs from field".into()));
        }
        for p in [lag.clone(), lag.add(&e1)] {
            if !points.contains(&p) {
                points.push(p);
            }
        }
    }

    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(n_draws);
    for k in 0..n_draws {
        let seed = stream_seed(root_seed, &format!("stationarity/{k}"));
        draws.push(sampler.sample_at(&points, seed)?);
    }
    let column = |p: &GroupElement| -> Vec<f64> {
        let idx = points.iter().position(|q| q == p).unwrap();
        draws.iter().map(|row| row[idx]).collect()
    };

    let x0 = column(&zero);
    let x1 = column(&e1);
    let theta_pairs = [(0.5, 0.5), (1.0, -0.5), (0.3, 1.0)];
    let mut out = Vec::with_capacity(lags.len());
    for lag in lags {
        let xs = column(lag);
        let xs1 = column(&lag.add(&e1));
        let (dist, p) = if lag.is_identity() {
            (0.0, 1.0)
        } else {
            two_sample_ks(&x0, &xs)
        };
        let mut cf_dist = 0.0f64;
        for (t1, t2) in theta_pairs {
            let (mut re_a, mut im_a, mut re_b, mut im_b) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n_draws {
                let (sa, ca) = (t1 * x0[i] + t2 * x1[i]).sin_cos();
                let (sb, cb) = (t1 * xs[i] + t2 * xs1[i]).sin_cos();
                re_a += ca;
                im_a += sa;
                re_b += cb;
                im_b += sb;
            }
            let n = n_draws as f64;
            let dre = (re_a - re_b) / n;
            let dim = (im_a - im_b) / n;
            cf_dist = cf_dist.max((dre * dre + dim * dim).sqrt());
        }
        out.push(LagReport { lag: lag.clone(), ks_distance: dist, ks_p: p, joint_cf_distance: cf_dist });
    }
    Ok(out)
}

/// Fitted log-log growth of `M_n = max_{‖t‖∞ ≤ n} |X_t|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximaGrowth {
    pub n_grid: Vec<i64>,
    pub median_maxima: Vec<f64>,
    pub exponent: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Log-log regression of the median of `M_n` over `r` realizations.
/// The grid must span at least one decade; a degenerate field is
/// rejected.
pub fn maxima_growth(
    sampler: &dyn FieldSampler,
    n_grid: &[i64],
    r: usize,
    root_seed: u64,
) -> Result<MaximaGrowth> {
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    if grid.len() < 2 || grid[0] < 1 {
        return Err(Error::InvalidParameter("need ≥ 2 positive cube radii".into()));
    }
    let span = *grid.last().unwrap() as f64 / grid[0] as f64;
    if span < 10.0 {
        return Err(Error::InvalidParameter("maxima grid must span at least one decade".into()));
    }
    let n_max = *grid.last().unwrap();
    let window = Window::cube(sampler.dim(), n_max);

    let mut maxima: Vec<Vec<f64>> = vec![Vec::with_capacity(r); grid.len()];
    for k in 0..r {
        let seed = stream_seed(root_seed, &format!("maxima/{k}"));
        let realization = sampler.realize_window(&window, seed)?;
        let mut per_n = vec![0.0f64; grid.len()];
        for t in window.points() {
            let a = realization.value_at(&t).unwrap().abs();
            let rr = t.norm_inf();
            for (i, n) in grid.iter().enumerate() {
                if rr <= *n {
                    per_n[i] = per_n[i].max(a);
                }
            }
        }
        for (i, m) in per_n.into_iter().enumerate() {
            maxima[i].push(m);
        }
    }

    let mut medians = Vec::with_capacity(grid.len());
    for ms in &mut maxima {
        ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(ms[ms.len() / 2]);
    }
    if medians.iter().any(|m| *m <= 0.0) {
        return Err(Error::ModelPrecondition("degenerate field: zero median maxima".into()));
    }

    // ordinary least squares on (ln n, ln median)
    let xs: Vec<f64> = grid.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid2: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit).powi(2)
        })
        .sum();
    let se = if xs.len() > 2 { (resid2 / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(MaximaGrowth {
        n_grid: grid,
        median_maxima: medians,
        exponent: slope,
        ci_lo: slope - 2.0 * se,
        ci_hi: slope + 2.0 * se,
    })
}
