//! First-moment landscapes for hidden-assignment ensembles.
//!
//! For an assignment agreeing with the hidden assignment on a fraction `α` of
//! the variables, the n-th root of the expected number of such solutions is
//! (in log space)
//!
//! ```text
//! log f(α) = H(α) + r ln(1 - (1 - α^k) / (2^k - 1))                 one hidden
//! log g(α) = H(α) + r ln(1 - (1 - α^k - (1-α)^k) / (2^k - 2))       two hidden
//! log z(α) = H(α) + r ln(1 - 2^-k)                                   no hidden
//! ```
//!
//! with `H(α) = -α ln α - (1-α) ln(1-α)` and `0 ln 0 = 0`.
//!
//! Every evaluation carries both `α` and `1 - α` so that the narrow maxima
//! next to the endpoints (width `~e^{-k ln 2}` for large `k`) are resolved
//! without cancellation.

use serde::{Deserialize, Serialize};

use crate::generator::HiddenMode;
use crate::{Error, Result};

/// A point in `[0, 1]` held as `(α, 1 - α)`, each accurate on its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub agree: f64,
    pub disagree: f64,
}

impl Overlap {
    pub fn new(alpha: f64) -> Overlap {
        Overlap {
            agree: alpha,
            disagree: 1.0 - alpha,
        }
    }

    /// The point at distance `eps` from 1.
    pub fn near_one(eps: f64) -> Overlap {
        Overlap {
            agree: 1.0 - eps,
            disagree: eps,
        }
    }

    pub fn mirrored(self) -> Overlap {
        Overlap {
            agree: self.disagree,
            disagree: self.agree,
        }
    }
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn entropy(p: Overlap) -> f64 {
    -xlnx(p.agree) - xlnx(p.disagree)
}

/// `ln x` for `x = 1 - y`, using whichever representation is accurate.
fn ln_of(x: f64, one_minus_x: f64) -> f64 {
    if one_minus_x < 0.5 {
        (-one_minus_x).ln_1p()
    } else {
        x.ln()
    }
}

/// `x^k` for `x` with complement `one_minus_x`.
fn pow_k(x: f64, one_minus_x: f64, k: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (k as f64 * ln_of(x, one_minus_x)).exp()
    }
}

/// `1 - x^k`.
fn one_minus_pow_k(x: f64, one_minus_x: f64, k: usize) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        -(k as f64 * ln_of(x, one_minus_x)).exp_m1()
    }
}

/// Which ensemble a landscape describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Landscape {
    ZeroHidden,
    OneHidden,
    TwoHidden,
}

impl Landscape {
    pub fn for_mode(mode: HiddenMode) -> Landscape {
        match mode {
            HiddenMode::Zero => Landscape::ZeroHidden,
            HiddenMode::One => Landscape::OneHidden,
            HiddenMode::Two => Landscape::TwoHidden,
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, Landscape::OneHidden)
    }

    pub fn log_value_at(self, k: usize, r: f64, p: Overlap) -> f64 {
        let kf = k as f64;
        let correlation = match self {
            Landscape::ZeroHidden => (-(-kf * std::f64::consts::LN_2).exp()).ln_1p(),
            Landscape::OneHidden => {
                let viol = one_minus_pow_k(p.agree, p.disagree, k) / ((2.0f64).powi(k as i32) - 1.0);
                (-viol).ln_1p()
            }
            Landscape::TwoHidden => {
                // Evaluate with the smaller coordinate first so g(α) == g(1-α) bitwise.
                let (a, b) = if p.agree <= p.disagree {
                    (p.agree, p.disagree)
                } else {
                    (p.disagree, p.agree)
                };
                let mixed = one_minus_pow_k(b, a, k) - pow_k(a, b, k);
                let viol = mixed / ((2.0f64).powi(k as i32) - 2.0);
                (-viol).ln_1p()
            }
        };
        let ent = if self.is_symmetric() && p.agree > p.disagree {
            entropy(p.mirrored())
        } else {
            entropy(p)
        };
        if r == 0.0 {
            ent
        } else {
            ent + r * correlation
        }
    }

    pub fn log_value(self, k: usize, r: f64, alpha: f64) -> f64 {
        self.log_value_at(k, r, Overlap::new(alpha))
    }
}

pub fn one_hidden_log_curve(k: usize, r: f64, alpha: f64) -> f64 {
    Landscape::OneHidden.log_value(k, r, alpha)
}

pub fn two_hidden_log_curve(k: usize, r: f64, alpha: f64) -> f64 {
    Landscape::TwoHidden.log_value(k, r, alpha)
}

pub fn zero_hidden_log_curve(k: usize, r: f64, alpha: f64) -> f64 {
    Landscape::ZeroHidden.log_value(k, r, alpha)
}

/// Sampled landscape on an increasing α grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapCurve {
    pub k: usize,
    pub r: f64,
    pub landscape: Landscape,
    pub samples: Vec<(f64, f64)>,
}

impl OverlapCurve {
    /// Uniform grid with `points >= 2` samples including both endpoints.
    pub fn sample(landscape: Landscape, k: usize, r: f64, points: usize) -> OverlapCurve {
        let points = points.max(2);
        let last = (points - 1) as f64;
        let samples = (0..points)
            .map(|i| {
                let p = Overlap {
                    agree: i as f64 / last,
                    disagree: (points - 1 - i) as f64 / last,
                };
                (p.agree, landscape.log_value_at(k, r, p))
            })
            .collect();
        OverlapCurve { k, r, landscape, samples }
    }

    /// Interior points that exceed both neighbours, plus endpoints that
    /// exceed their one neighbour.
    pub fn local_maxima(&self) -> Vec<(f64, f64)> {
        let s = &self.samples;
        let mut out = Vec::new();
        for i in 0..s.len() {
            let left = i == 0 || s[i].1 > s[i - 1].1;
            let right = i + 1 == s.len() || s[i].1 > s[i + 1].1;
            let flat_left = i > 0 && s[i].1 == s[i - 1].1;
            if left && right && !flat_left {
                out.push(s[i]);
            }
        }
        out
    }
}

const UNIFORM_GRID: usize = 20_000;
const LOG_GRID: usize = 2_000;
const LOG_GRID_MIN_EXP: f64 = -40.0;

/// A local search region: a coordinate `t` and a map from `t` to an overlap.
#[derive(Clone, Copy)]
enum Region {
    Uniform,
    NearOne,
    NearZero,
}

impl Region {
    fn point(self, t: f64) -> Overlap {
        match self {
            Region::Uniform => Overlap::new(t),
            Region::NearOne => Overlap::near_one(10f64.powf(t)),
            Region::NearZero => Overlap::near_one(10f64.powf(t)).mirrored(),
        }
    }

    fn grid(self) -> Vec<f64> {
        match self {
            Region::Uniform => (0..=UNIFORM_GRID).map(|i| i as f64 / UNIFORM_GRID as f64).collect(),
            Region::NearOne | Region::NearZero => {
                let hi = 0.5f64.log10();
                (0..=LOG_GRID)
                    .map(|i| LOG_GRID_MIN_EXP + (hi - LOG_GRID_MIN_EXP) * i as f64 / LOG_GRID as f64)
                    .collect()
            }
        }
    }
}

fn golden_max(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut hc = h(c);
    let mut hd = h(d);
    for _ in 0..iters {
        if hc >= hd {
            hi = d;
            d = c;
            hd = hc;
            c = hi - phi * (hi - lo);
            hc = h(c);
        } else {
            lo = c;
            c = d;
            hc = hd;
            d = lo + phi * (hi - lo);
            hd = h(d);
        }
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    if hc >= hd {
        (c, hc)
    } else {
        (d, hd)
    }
}

fn region_max(landscape: Landscape, k: usize, r: f64, region: Region) -> (Overlap, f64) {
    let grid = region.grid();
    let eval = |t: f64| landscape.log_value_at(k, r, region.point(t));
    let values: Vec<f64> = grid.iter().map(|&t| eval(t)).collect();
    let (best, &best_val) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (t, v) = golden_max(eval, lo, hi, 200);
    if v > best_val {
        (region.point(t), v)
    } else {
        (region.point(grid[best]), best_val)
    }
}

/// Global maximiser of a landscape over `[0, 1]`.
///
/// A uniform grid is combined with logarithmic grids in the distance to each
/// endpoint, each refined by golden-section search. For symmetric landscapes
/// the maximiser `>= 1/2` is reported.
pub fn argmax_alpha(landscape: Landscape, k: usize, r: f64, tol: f64) -> (f64, f64) {
    debug_assert!(tol > 0.0);
    let mut best = region_max(landscape, k, r, Region::Uniform);
    let mut regions = vec![Region::NearOne];
    if !landscape.is_symmetric() {
        regions.push(Region::NearZero);
    }
    for region in regions {
        let cand = region_max(landscape, k, r, region);
        if cand.1 > best.1 {
            best = cand;
        }
    }
    let mid = landscape.log_value(k, r, 0.5);
    let (mut p, mut v) = best;
    if landscape.is_symmetric() {
        if p.agree < p.disagree {
            p = p.mirrored();
        }
        // Report the centre exactly when the refined point is within tolerance
        // of it and does no better beyond rounding.
        if (p.agree - 0.5).abs() <= tol && mid >= v - 4.0 * f64::EPSILON * v.abs().max(1.0) {
            p = Overlap::new(0.5);
            v = mid;
        }
    }
    (p.agree, v)
}

/// `2^k ln 2 - ln 2 / 2 - 1/2`: above this density random k-SAT is
/// unsatisfiable with probability `1 - o(1)`.
pub fn asymptotic_upper_bound(k: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (2.0f64).powi(k as i32) * ln2 - ln2 / 2.0 - 0.5
}

/// `2^k ln 2 - ln 2 / 2 - 1`, the asymptotic form of the dominance threshold.
pub fn dominance_asymptote(k: usize) -> f64 {
    asymptotic_upper_bound(k) - 0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub k: usize,
    pub r_star: f64,
    pub alpha_star_below: f64,
    /// `(r, argmax)` just below and just above the crossing.
    pub certificate: [(f64, f64); 2],
}

/// Whether the centre is the global maximum of g (up to `1e-13` in log space).
fn centre_dominates(k: usize, r: f64) -> (bool, f64) {
    let (alpha, v) = argmax_alpha(Landscape::TwoHidden, k, r, 1e-9);
    let mid = Landscape::TwoHidden.log_value(k, r, 0.5);
    if v <= mid + 1e-13 {
        (true, 0.5)
    } else {
        (false, alpha)
    }
}

pub const DOMINANCE_K_RANGE: std::ops::RangeInclusive<usize> = 3..=20;

/// Largest density (within `tol`, from below) at which `g` attains its global
/// maximum at `α = 1/2`. Bisection over `[1, asymptotic_upper_bound(k)]`.
pub fn dominance_threshold(k: usize, tol: f64) -> Result<ThresholdResult> {
    if !DOMINANCE_K_RANGE.contains(&k) {
        return Err(Error::Domain(format!("dominance threshold supported for 3 <= k <= 20, got {k}")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut lo = 1.0;
    let mut hi = asymptotic_upper_bound(k);
    let mut probes = Vec::new();
    let (ok_lo, mut alpha_lo) = centre_dominates(k, lo);
    probes.push((lo, ok_lo));
    let (ok_hi, mut alpha_hi) = centre_dominates(k, hi);
    probes.push((hi, ok_hi));
    if !ok_lo || ok_hi {
        return Err(Error::Bracket {
            message: format!("centre dominance does not change sign on [{lo}, {hi}] for k = {k}"),
            probes,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, alpha) = centre_dominates(k, mid);
        probes.push((mid, ok));
        if ok {
            lo = mid;
            alpha_lo = alpha;
        } else {
            hi = mid;
            alpha_hi = alpha;
        }
    }
    Ok(ThresholdResult {
        k,
        r_star: lo,
        alpha_star_below: alpha_lo,
        certificate: [(lo, alpha_lo), (hi, alpha_hi)],
    })
}

/// `ε_k = (2^k ln 2 - ln 2 / 2 - 1) - r*`.
pub fn epsilon_gap(k: usize, tol: f64) -> Result<f64> {
    Ok(dominance_asymptote(k) - dominance_threshold(k, tol)?.r_star)
}

/// How clause variables are drawn when counting solutions exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableModel {
    /// k distinct variables per clause (what the generator does).
    Distinct,
    /// Literals drawn independently with replacement.
    WithReplacement,
}

fn ln_choose_table(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for i in 1..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

/// `C(z, k) / C(n, k)` as a product of ratios.
fn subset_ratio(z: usize, n: usize, k: usize) -> f64 {
    if z < k {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (z - i) as f64 / (n - i) as f64)
}

/// Probability that an assignment agreeing with the hidden one on `z` of `n`
/// variables violates a random admissible clause.
pub fn violation_probability(n: usize, k: usize, z: usize, mode: HiddenMode, model: VariableModel) -> f64 {
    let kf = k as i32;
    match (mode, model) {
        (HiddenMode::Zero, _) => 0.5f64.powi(kf),
        (HiddenMode::One, VariableModel::Distinct) => {
            (1.0 - subset_ratio(z, n, k)) / (2.0f64.powi(kf) - 1.0)
        }
        (HiddenMode::Two, VariableModel::Distinct) => {
            (1.0 - subset_ratio(z, n, k) - subset_ratio(n - z, n, k)) / (2.0f64.powi(kf) - 2.0)
        }
        (HiddenMode::One, VariableModel::WithReplacement) => {
            let p = Overlap {
                agree: z as f64 / n as f64,
                disagree: (n - z) as f64 / n as f64,
            };
            one_minus_pow_k(p.agree, p.disagree, k) / (2.0f64.powi(kf) - 1.0)
        }
        (HiddenMode::Two, VariableModel::WithReplacement) => {
            let (a, b) = (z as f64 / n as f64, (n - z) as f64 / n as f64);
            (one_minus_pow_k(a, b, k) - pow_k(b, a, k)) / (2.0f64.powi(kf) - 2.0)
        }
    }
}

/// `ln E[X]` for `n` variables and `m` clauses, summed exactly over the
/// overlap `z` in log-sum-exp form.
pub fn exact_expected_count(n: usize, k: usize, m: usize, mode: HiddenMode, model: VariableModel) -> Result<f64> {
    if n < k || k < 1 {
        return Err(Error::Domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if mode == HiddenMode::Two && k < 2 {
        return Err(Error::Domain("two hidden assignments need k >= 2".into()));
    }
    let lf = ln_choose_table(n);
    let terms: Vec<f64> = (0..=n)
        .map(|z| {
            let ln_binom = lf[n] - lf[z] - lf[n - z];
            let p = violation_probability(n, k, z, mode, model);
            ln_binom + m as f64 * (-p).ln_1p()
        })
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok(max + sum.ln())
}
