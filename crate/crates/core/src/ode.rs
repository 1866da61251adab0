//! Mean-field model of Unit Clause on 3-SAT with an arbitrary initial mix of
//! clause types.
//!
//! State: `x` is the fraction of variables set; `s3[j]` and `s2[j]` are the
//! densities (per n) of 3- and 2-clauses with `j` literals agreeing with the
//! hidden assignment. Within a round, unit clauses reproduce as a two-type
//! branching process (negative, positive) with offspring matrix
//!
//! ```text
//! M = 1/(1-x) * [[ s21,   2 s20 ],
//!                [ 2 s22, s21   ]]
//! ```
//!
//! and the round sets `(m_F, m_T) = (I - M)^{-1} (1/2, 1/2)` variables false
//! and true. The rescaled system integrated here is
//!
//! ```text
//! ds3j/dx = -3 s3j / (1-x)
//! ds2j/dx = -2 s2j / (1-x) + φ_F (j+1) s3,j+1 / (1-x) + φ_T (3-j) s3j / (1-x)
//! ```
//!
//! with `φ_F = m_F / (m_F + m_T)` and `φ_T = 1 - φ_F`.

use serde::{Deserialize, Serialize};

use crate::generator::{initial_density_profile3, HiddenMode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseDensityState {
    pub x: f64,
    pub s3: [f64; 4],
    pub s2: [f64; 3],
}

impl ClauseDensityState {
    pub fn initial(s3: [f64; 4]) -> ClauseDensityState {
        ClauseDensityState { x: 0.0, s3, s2: [0.0; 3] }
    }

    pub fn s3_total(&self) -> f64 {
        self.s3.iter().sum()
    }

    pub fn s2_total(&self) -> f64 {
        self.s2.iter().sum()
    }

    fn mass(&self) -> f64 {
        self.s3_total() + self.s2_total()
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.s3.iter().chain(&self.s2).all(|v| v.is_finite())
    }

    fn advanced(&self, h: f64, d: &Derivative) -> ClauseDensityState {
        let mut next = *self;
        next.x += h;
        for j in 0..4 {
            next.s3[j] += h * d.s3[j];
        }
        for j in 0..3 {
            next.s2[j] += h * d.s2[j];
        }
        next
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchMatrix(pub [[f64; 2]; 2]);

impl BranchMatrix {
    /// Largest eigenvalue modulus from the characteristic polynomial.
    pub fn spectral_radius(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
        } else {
            det.abs().sqrt()
        }
    }
}

fn check_x(st: &ClauseDensityState) -> Result<()> {
    if !(st.x < 1.0) {
        return Err(Error::Domain(format!("x = {} must be below 1", st.x)));
    }
    Ok(())
}

pub fn branching_matrix(st: &ClauseDensityState) -> Result<BranchMatrix> {
    check_x(st)?;
    let q = 1.0 - st.x;
    let [s20, s21, s22] = st.s2;
    Ok(BranchMatrix([[s21 / q, 2.0 * s20 / q], [2.0 * s22 / q, s21 / q]]))
}

/// `(s21 + 2 sqrt(s20 s22)) / (1 - x)`.
pub fn lambda1(st: &ClauseDensityState) -> f64 {
    let [s20, s21, s22] = st.s2;
    (s21 + 2.0 * (s20 * s22).max(0.0).sqrt()) / (1.0 - st.x)
}

/// Expected variables set `(false, true)` in one round.
pub fn round_means(st: &ClauseDensityState) -> Result<(f64, f64)> {
    check_x(st)?;
    let lambda = lambda1(st);
    if !(lambda < 1.0) {
        return Err(Error::Supercritical { lambda1: lambda });
    }
    let BranchMatrix([[a, b], [c, d]]) = branching_matrix(st)?;
    // (I - M)^{-1} p0 with p0 = (1/2, 1/2).
    let (ia, ib, ic, id) = (1.0 - a, -b, -c, 1.0 - d);
    let det = ia * id - ib * ic;
    let m_f = 0.5 * (id - ib) / det;
    let m_t = 0.5 * (ia - ic) / det;
    Ok((m_f, m_t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub s3: [f64; 4],
    pub s2: [f64; 3],
}

pub fn derivative_field(st: &ClauseDensityState) -> Result<Derivative> {
    let (m_f, m_t) = round_means(st)?;
    let phi_f = m_f / (m_f + m_t);
    let phi_t = m_t / (m_f + m_t);
    let q = 1.0 - st.x;
    let mut d = Derivative { s3: [0.0; 4], s2: [0.0; 3] };
    for j in 0..4 {
        d.s3[j] = -3.0 * st.s3[j] / q;
    }
    for j in 0..3 {
        d.s2[j] = (-2.0 * st.s2[j] + phi_f * (j + 1) as f64 * st.s3[j + 1] + phi_t * (3 - j) as f64 * st.s3[j]) / q;
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    /// Reached the edge with every sample subcritical and negligible mass left.
    Completed,
    /// λ₁ reached 1.
    Supercritical,
    /// Reached the edge subcritically but clause mass did not vanish.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub state: ClauseDensityState,
    pub lambda1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn max_lambda1(&self) -> f64 {
        self.samples.iter().map(|s| s.lambda1).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectories hold at least the initial state")
    }

    /// Linear interpolation of the state at `x` (clamped to the sampled range).
    pub fn state_at(&self, x: f64) -> ClauseDensityState {
        let s = &self.samples;
        let i = s.partition_point(|p| p.state.x <= x);
        if i == 0 {
            return s[0].state;
        }
        if i == s.len() {
            return s[s.len() - 1].state;
        }
        let (a, b) = (&s[i - 1].state, &s[i].state);
        let w = (x - a.x) / (b.x - a.x);
        let mut out = *a;
        out.x = x;
        for j in 0..4 {
            out.s3[j] = a.s3[j] + w * (b.s3[j] - a.s3[j]);
        }
        for j in 0..3 {
            out.s2[j] = a.s2[j] + w * (b.s2[j] - a.s2[j]);
        }
        out
    }

    /// Trajectory CSV: `x,s30,s31,s32,s33,s20,s21,s22,lambda1`.
    pub fn write_csv<W: std::io::Write>(&self, w: W, every: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "s30", "s31", "s32", "s33", "s20", "s21", "s22", "lambda1"])?;
        let every = every.max(1);
        let last = self.samples.len() - 1;
        for (i, s) in self.samples.iter().enumerate() {
            if i % every != 0 && i != last {
                continue;
            }
            let st = &s.state;
            let row: Vec<String> = [st.x]
                .iter()
                .chain(&st.s3)
                .chain(&st.s2)
                .chain(std::iter::once(&s.lambda1))
                .map(|v| v.to_string())
                .collect();
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub step: f64,
    /// Integration stops at `x = 1 - edge`.
    pub edge: f64,
    /// Residual clause mass below which a run counts as completed.
    pub mass: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            step: 1e-4,
            edge: 1e-6,
            mass: 1e-8,
        }
    }
}

/// Classical fixed-step RK4 from `x = 0` up to `1 - edge`. Within `4 step` of
/// `x = 1` the step is capped at `(1 - x) / 4`, and the last one lands exactly
/// on `1 - edge`. A stage evaluated at λ₁ >= 1 ends the run as supercritical.
pub fn integrate_uc(s3: [f64; 4], opts: IntegrationOptions) -> Result<Trajectory> {
    if !(opts.step > 0.0) {
        return Err(Error::Domain("step must be positive".into()));
    }
    let x_end = 1.0 - opts.edge;
    let mut st = ClauseDensityState::initial(s3);
    let mut samples = vec![TrajectorySample { state: st, lambda1: lambda1(&st) }];
    let supercritical = |samples: Vec<TrajectorySample>| {
        Ok(Trajectory {
            samples,
            status: TrajectoryStatus::Supercritical,
        })
    };
    if samples[0].lambda1 >= 1.0 {
        return supercritical(samples);
    }
    let mut steps: u64 = 0;
    while st.x < x_end {
        // Near the singular edge, steps shrink to a quarter of the remaining
        // distance so that h / (1 - x) stays bounded.
        let remaining = x_end - st.x;
        let mut h = opts.step.min((1.0 - st.x) / 4.0);
        if h > remaining - 1e-15 {
            h = remaining;
        }
        let Ok(k1) = derivative_field(&st) else {
            return supercritical(samples);
        };
        let s2 = st.advanced(h / 2.0, &k1);
        let Ok(k2) = derivative_field(&s2) else {
            return supercritical(samples);
        };
        let s3_ = st.advanced(h / 2.0, &k2);
        let Ok(k3) = derivative_field(&s3_) else {
            return supercritical(samples);
        };
        let s4 = st.advanced(h, &k3);
        let Ok(k4) = derivative_field(&s4) else {
            return supercritical(samples);
        };
        let combined = Derivative {
            s3: std::array::from_fn(|j| (k1.s3[j] + 2.0 * k2.s3[j] + 2.0 * k3.s3[j] + k4.s3[j]) / 6.0),
            s2: std::array::from_fn(|j| (k1.s2[j] + 2.0 * k2.s2[j] + 2.0 * k3.s2[j] + k4.s2[j]) / 6.0),
        };
        let mut next = st.advanced(h, &combined);
        steps += 1;
        // Re-derive x from the step count to avoid drift in the grid.
        if h == remaining {
            next.x = x_end;
        } else if h == opts.step {
            next.x = steps as f64 * opts.step;
        }
        if !next.is_finite() {
            return Err(Error::Integration { x: next.x, last_valid: Box::new(st) });
        }
        st = next;
        let lambda = lambda1(&st);
        samples.push(TrajectorySample { state: st, lambda1: lambda });
        if lambda >= 1.0 {
            return supercritical(samples);
        }
    }
    let status = if st.mass() < opts.mass {
        TrajectoryStatus::Completed
    } else {
        TrajectoryStatus::Exhausted
    };
    Ok(Trajectory { samples, status })
}

/// Safety margin below 1 that every sample's λ₁ must respect for a run to
/// count as a success in the critical-density bisection.
pub const SUCCESS_MARGIN: f64 = 1e-6;

fn succeeds(traj: &Trajectory) -> bool {
    traj.status == TrajectoryStatus::Completed && traj.max_lambda1() <= 1.0 - SUCCESS_MARGIN
}

pub const CRITICAL_BRACKET: (f64, f64) = (0.5, 4.0);

/// Largest density whose trajectory completes subcritically, to within `tol`.
pub fn critical_density(mode: HiddenMode, tol: f64) -> Result<f64> {
    critical_density_with(mode, tol, IntegrationOptions::default())
}

pub fn critical_density_with(mode: HiddenMode, tol: f64, opts: IntegrationOptions) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let probe = |r: f64| -> Result<bool> { Ok(succeeds(&integrate_uc(initial_density_profile3(r, mode), opts)?)) };
    let (mut lo, mut hi) = CRITICAL_BRACKET;
    let mut probes = vec![(lo, probe(lo)?), (hi, probe(hi)?)];
    if !probes[0].1 || probes[1].1 {
        return Err(Error::Bracket {
            message: format!("success predicate does not change on [{lo}, {hi}] for mode {mode}"),
            probes,
        });
    }
    // Resolve well below tol so step-size comparisons are meaningful.
    while hi - lo > tol * 1e-3 {
        let mid = 0.5 * (lo + hi);
        let ok = probe(mid)?;
        probes.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: f64, s3: [f64; 4], s2: [f64; 3]) -> ClauseDensityState {
        ClauseDensityState { x, s3, s2 }
    }

    #[test]
    fn branching_matrix_examples() {
        let m = branching_matrix(&state(0.0, [0.0; 4], [0.0; 3])).unwrap();
        assert_eq!(m.0, [[0.0; 2]; 2]);
        let m = branching_matrix(&state(0.0, [0.0; 4], [0.25, 0.25, 0.25])).unwrap();
        assert_eq!(m.0, [[0.25, 0.5], [0.5, 0.25]]);
        let m = branching_matrix(&state(0.3, [0.0; 4], [0.2, 0.1, 0.2])).unwrap();
        assert_eq!(m.0[0][0], m.0[1][1]);
        assert_eq!(m.0[0][1], m.0[1][0]);
        assert!(branching_matrix(&state(1.0, [0.0; 4], [0.0; 3])).is_err());
    }

    #[test]
    fn lambda1_examples() {
        assert_eq!(lambda1(&state(0.5, [0.0; 4], [1.0, 0.0, 1.0])), 4.0);
        assert_eq!(lambda1(&state(0.2, [0.0; 4], [0.0; 3])), 0.0);
        let st = state(0.4, [0.0; 4], [0.1, 0.2, 0.1]);
        assert!((lambda1(&st) - 0.4 / 0.6).abs() < 1e-15);
    }

    #[test]
    fn lambda1_matches_spectral_radius() {
        for &(x, s2) in &[(0.0, [0.1, 0.3, 0.05]), (0.7, [0.02, 0.01, 0.2]), (0.3, [0.0, 0.4, 0.3])] {
            let st = state(x, [0.0; 4], s2);
            let rho = branching_matrix(&st).unwrap().spectral_radius();
            assert!((rho - lambda1(&st)).abs() < 1e-12);
        }
    }

    #[test]
    fn round_means_examples() {
        let (f, t) = round_means(&state(0.0, [0.0; 4], [0.0; 3])).unwrap();
        assert_eq!((f, t), (0.5, 0.5));
        // Symmetric with λ₁ = 1/2: total 1/(1 - λ₁) = 2.
        let (f, t) = round_means(&state(0.0, [0.0; 4], [0.125, 0.25, 0.125])).unwrap();
        assert!((f - 1.0).abs() < 1e-14 && (t - 1.0).abs() < 1e-14);
        let err = round_means(&state(0.0, [0.0; 4], [0.25, 0.5, 0.25])).unwrap_err();
        assert!(matches!(err, Error::Supercritical { .. }));
    }

    #[test]
    fn round_means_total_at_least_one() {
        for &s2 in &[[0.1, 0.3, 0.05], [0.0, 0.0, 0.4], [0.3, 0.1, 0.0]] {
            let (f, t) = round_means(&state(0.1, [0.0; 4], s2)).unwrap();
            assert!(f + t >= 1.0);
        }
    }

    #[test]
    fn field_examples() {
        let d = derivative_field(&state(0.2, [0.0; 4], [0.0; 3])).unwrap();
        assert_eq!(d.s3, [0.0; 4]);
        assert_eq!(d.s2, [0.0; 3]);
        let r = 2.0;
        let d = derivative_field(&state(0.0, [0.0, r / 2.0, r / 2.0, 0.0], [0.0; 3])).unwrap();
        let expect = [r / 4.0, r, r / 4.0];
        for j in 0..3 {
            assert!((d.s2[j] - expect[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_field_sums_to_zero_hidden_equations() {
        let st = state(0.35, [0.1, 0.3, 0.3, 0.1], [0.05, 0.2, 0.05]);
        let d = derivative_field(&st).unwrap();
        let q = 1.0 - st.x;
        let ds3: f64 = d.s3.iter().sum();
        let ds2: f64 = d.s2.iter().sum();
        assert!((ds3 + 3.0 * st.s3_total() / q).abs() < 1e-14);
        assert!((ds2 - (-2.0 * st.s2_total() / q + 1.5 * st.s3_total() / q)).abs() < 1e-14);
    }

    #[test]
    fn zero_density_completes() {
        let t = integrate_uc([0.0; 4], IntegrationOptions::default()).unwrap();
        assert_eq!(t.status, TrajectoryStatus::Completed);
        assert_eq!(t.max_lambda1(), 0.0);
    }

    #[test]
    fn r2_zero_hidden_peak_is_three_quarters() {
        let t = integrate_uc(initial_density_profile3(2.0, HiddenMode::Zero), IntegrationOptions::default()).unwrap();
        assert_eq!(t.status, TrajectoryStatus::Completed);
        assert!((t.max_lambda1() - 0.75).abs() < 1e-4);
        assert!(t.samples.windows(2).all(|w| w[0].state.x < w[1].state.x));
    }

    #[test]
    fn supercritical_detected() {
        let t = integrate_uc(initial_density_profile3(3.0, HiddenMode::Zero), IntegrationOptions::default()).unwrap();
        assert_eq!(t.status, TrajectoryStatus::Supercritical);
        assert!(t.last().lambda1 >= 1.0 || t.last().state.x < 1.0);
    }

    #[test]
    fn bad_step() {
        let opts = IntegrationOptions { step: 0.0, ..Default::default() };
        assert!(integrate_uc([0.0; 4], opts).is_err());
    }

    #[test]
    fn interpolation() {
        let t = integrate_uc(initial_density_profile3(1.0, HiddenMode::Zero), IntegrationOptions { step: 1e-2, ..Default::default() }).unwrap();
        let st = t.state_at(0.505);
        let exact = (1.0f64 - 0.505).powi(3);
        assert!((st.s3_total() - exact).abs() < 1e-4);
    }
}
