//! Diagonal qubit-demon-cavity states.
//!
//! The atom has three circular levels `f < g < e`; the cavity is a Fock
//! ladder truncated at `n_max`. Only populations are tracked. The logical
//! view re-indexes the same numbers as `P(s_Q, s_D, n)` with
//!
//! ```text
//! |e> = |1_Q>|0_D>    |g> = |0_Q>|0_D>    |f> = |0_Q>|1_D>
//! ```
//!
//! and the `(1_Q, 1_D)` sector identically empty.

use std::ops::BitOr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible thermal population at the top Fock level.
pub const TAIL_THRESHOLD: f64 = 1e-9;

/// Normalization tolerance for state tables.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Clamp applied to `p_e` by sweep grids that nominally touch 0 or 1.
pub const EPS_FLOOR: f64 = 1e-12;

pub const DEFAULT_N_MAX: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    F = 0,
    G = 1,
    E = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::F, Level::G, Level::E];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    /// Logical `(s_Q, s_D)` label of the physical level.
    pub fn logical(self) -> (usize, usize) {
        match self {
            Level::E => (1, 0),
            Level::G => (0, 0),
            Level::F => (0, 1),
        }
    }

    pub fn from_logical(s_q: usize, s_d: usize) -> Option<Level> {
        match (s_q, s_d) {
            (1, 0) => Some(Level::E),
            (0, 0) => Some(Level::G),
            (0, 1) => Some(Level::F),
            _ => None,
        }
    }
}

/// Bit set over the logical subsystems `{Q, D, C}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsystemSet(u8);

impl SubsystemSet {
    pub const EMPTY: SubsystemSet = SubsystemSet(0);
    pub const Q: SubsystemSet = SubsystemSet(1);
    pub const D: SubsystemSet = SubsystemSet(2);
    pub const C: SubsystemSet = SubsystemSet(4);
    pub const QC: SubsystemSet = SubsystemSet(5);
    pub const QD: SubsystemSet = SubsystemSet(3);
    pub const DC: SubsystemSet = SubsystemSet(6);
    pub const QDC: SubsystemSet = SubsystemSet(7);

    pub fn contains(self, other: SubsystemSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, other: SubsystemSet) -> bool {
        self.0 & other.0 != 0
    }

    /// All seven nonempty subsets.
    pub fn nonempty() -> impl Iterator<Item = SubsystemSet> {
        (1u8..8).map(SubsystemSet)
    }
}

impl BitOr for SubsystemSet {
    type Output = SubsystemSet;
    fn bitor(self, rhs: SubsystemSet) -> SubsystemSet {
        SubsystemSet(self.0 | rhs.0)
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    for (index, &value) in p.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { sum });
    }
    Ok(())
}

/// Population table over `(level, n)` for `level in {f, g, e}` and
/// `n in 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    n_max: usize,
    p: Vec<f64>,
}

impl JointState {
    /// Builds a state from a level-major table (`f` row, then `g`, then `e`).
    pub fn from_populations(n_max: usize, p: Vec<f64>) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: n_max as f64,
                reason: "must be at least 1",
            });
        }
        if p.len() != 3 * (n_max + 1) {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: 3 * (n_max + 1),
            });
        }
        check_distribution(&p)?;
        Ok(JointState { n_max, p })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_raw(n_max: usize, p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), 3 * (n_max + 1));
        JointState { n_max, p }
    }

    pub fn pure(level: Level, n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n as f64,
                reason: "photon number exceeds n_max",
            });
        }
        let mut p = vec![0.0; 3 * (n_max + 1)];
        p[level.index() * (n_max + 1) + n] = 1.0;
        JointState::from_populations(n_max, p)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim_cavity(&self) -> usize {
        self.n_max + 1
    }

    pub fn get(&self, level: Level, n: usize) -> f64 {
        self.p[level.index() * (self.n_max + 1) + n]
    }

    pub fn row(&self, level: Level) -> &[f64] {
        let d = self.n_max + 1;
        &self.p[level.index() * d..(level.index() + 1) * d]
    }

    pub fn populations(&self) -> &[f64] {
        &self.p
    }

    pub fn into_populations(self) -> Vec<f64> {
        self.p
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn level_marginal(&self) -> [f64; 3] {
        Level::ALL.map(|l| self.row(l).iter().sum())
    }

    pub fn cavity_marginal(&self) -> Vec<f64> {
        (0..=self.n_max)
            .map(|n| Level::ALL.iter().map(|&l| self.get(l, n)).sum())
            .collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.cavity_marginal()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Population of `|1_Q>`, i.e. of level `e`.
    pub fn excited_population(&self) -> f64 {
        self.row(Level::E).iter().sum()
    }

    /// Population of `|1_D>`, i.e. of level `f`.
    pub fn demon_population(&self) -> f64 {
        self.row(Level::F).iter().sum()
    }
}

/// The joint table re-indexed as `P(s_Q, s_D, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    n_max: usize,
    p: Vec<f64>,
}

impl LogicalState {
    /// `p` is laid out as `[(s_Q * 2 + s_D) * (n_max + 1) + n]`.
    pub fn from_table(n_max: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != 4 * (n_max + 1) {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: 4 * (n_max + 1),
            });
        }
        check_distribution(&p)?;
        let forbidden = &p[3 * (n_max + 1)..];
        if forbidden.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidParameter {
                name: "P(1_Q, 1_D, n)",
                value: forbidden.iter().sum(),
                reason: "the (1_Q, 1_D) sector must stay empty",
            });
        }
        Ok(LogicalState { n_max, p })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, s_q: usize, s_d: usize, n: usize) -> f64 {
        self.p[(s_q * 2 + s_d) * (self.n_max + 1) + n]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    /// Sums out the subsystems not in `keep`. The result is ordered with
    /// `s_Q` slowest and `n` fastest over the kept indices.
    pub fn marginal(&self, keep: SubsystemSet) -> Result<Vec<f64>> {
        if keep.is_empty() {
            return Err(Error::EmptySubsystemSet);
        }
        let dc = self.n_max + 1;
        let (kq, kd, kc) = (
            keep.contains(SubsystemSet::Q),
            keep.contains(SubsystemSet::D),
            keep.contains(SubsystemSet::C),
        );
        let out_d = if kd { 2 } else { 1 };
        let out_c = if kc { dc } else { 1 };
        let out_q = if kq { 2 } else { 1 };
        let mut out = vec![0.0; out_q * out_d * out_c];
        for s_q in 0..2 {
            for s_d in 0..2 {
                for n in 0..dc {
                    let iq = if kq { s_q } else { 0 };
                    let id = if kd { s_d } else { 0 };
                    let ic = if kc { n } else { 0 };
                    out[(iq * out_d + id) * out_c + ic] += self.get(s_q, s_d, n);
                }
            }
        }
        Ok(out)
    }

    /// Inverse relabeling back to physical levels.
    pub fn to_joint(&self) -> JointState {
        let dc = self.n_max + 1;
        let mut p = vec![0.0; 3 * dc];
        for level in Level::ALL {
            let (s_q, s_d) = level.logical();
            for n in 0..dc {
                p[level.index() * dc + n] = self.get(s_q, s_d, n);
            }
        }
        JointState::from_raw(self.n_max, p)
    }
}

/// Relabels `(level, n)` as `(s_Q, s_D, n)`.
pub fn logical_map(state: &JointState) -> LogicalState {
    let dc = state.n_max + 1;
    let mut p = vec![0.0; 4 * dc];
    for level in Level::ALL {
        let (s_q, s_d) = level.logical();
        p[(s_q * 2 + s_d) * dc..(s_q * 2 + s_d + 1) * dc].copy_from_slice(state.row(level));
    }
    LogicalState {
        n_max: state.n_max,
        p,
    }
}

/// Marginal of a physical state over a logical subsystem set.
pub fn marginal(state: &JointState, keep: SubsystemSet) -> Result<Vec<f64>> {
    logical_map(state).marginal(keep)
}

/// Smallest truncation whose renormalized thermal population at the top
/// level falls below [`TAIL_THRESHOLD`].
pub fn required_n_max(n_th: f64) -> usize {
    if n_th <= 0.0 {
        return 1;
    }
    let mut n = 1;
    while thermal_tail(n_th, n) >= TAIL_THRESHOLD {
        n += 1;
    }
    n
}

fn thermal_tail(n_th: f64, n_max: usize) -> f64 {
    let r = n_th / (1.0 + n_th);
    (1.0 - r) * r.powi(n_max as i32) / (1.0 - r.powi(n_max as i32 + 1))
}

/// Geometric photon distribution `n_th^n / (1 + n_th)^(n+1)`, renormalized
/// over `0..=n_max`.
pub fn thermal_cavity(n_th: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::InvalidParameter {
            name: "n_th",
            value: n_th,
            reason: "must be finite and non-negative",
        });
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "must be at least 1",
        });
    }
    let mut p = vec![0.0; n_max + 1];
    if n_th == 0.0 {
        p[0] = 1.0;
        return Ok(p);
    }
    let r = n_th / (1.0 + n_th);
    let mut w = 1.0;
    for x in p.iter_mut() {
        *x = w;
        w *= r;
    }
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    if p[n_max] >= TAIL_THRESHOLD {
        return Err(Error::Truncation {
            n_max,
            tail: p[n_max],
            required: required_n_max(n_th),
        });
    }
    Ok(p)
}

/// `(p_g, p_e)` of a thermal qubit.
pub fn qubit_populations(p_e: f64) -> Result<[f64; 2]> {
    if !(p_e > 0.0 && p_e < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p_e",
            value: p_e,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    Ok([1.0 - p_e, p_e])
}

/// Thermal preparation of qubit and cavity, parametrized by populations so
/// that every inverse temperature stays finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    pub p_e: f64,
    pub n_th: f64,
    pub n_max: usize,
}

impl ThermalSpec {
    pub fn new(p_e: f64, n_th: f64, n_max: usize) -> Result<Self> {
        qubit_populations(p_e)?;
        if !(n_th > 0.0) || !n_th.is_finite() {
            return Err(Error::InvalidParameter {
                name: "n_th",
                value: n_th,
                reason: "must be finite and strictly positive",
            });
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: n_max as f64,
                reason: "must be at least 1",
            });
        }
        Ok(ThermalSpec { p_e, n_th, n_max })
    }

    /// Like [`ThermalSpec::new`] but pulls `p_e` into
    /// `[EPS_FLOOR, 1 - EPS_FLOOR]` first.
    pub fn clamped(p_e: f64, n_th: f64, n_max: usize) -> Result<Self> {
        ThermalSpec::new(p_e.clamp(EPS_FLOOR, 1.0 - EPS_FLOOR), n_th, n_max)
    }

    /// `p_e` at which qubit and cavity share one temperature.
    pub fn equilibrium_p_e(n_th: f64) -> f64 {
        n_th / (1.0 + 2.0 * n_th)
    }

    /// `p_e` whose relative inverse temperature is `delta_beta_tilde`.
    pub fn p_e_for_delta_beta_tilde(delta_beta_tilde: f64, n_th: f64) -> f64 {
        let beta_c = ((1.0 + n_th) / n_th).ln();
        let beta_q = (1.0 - delta_beta_tilde) * beta_c;
        1.0 / (1.0 + beta_q.exp())
    }

    pub fn betas(&self) -> Betas {
        beta_conversions(self.p_e, self.n_th)
    }

    pub fn qubit_gibbs(&self) -> [f64; 2] {
        [1.0 - self.p_e, self.p_e]
    }

    pub fn cavity_gibbs(&self) -> Result<Vec<f64>> {
        thermal_cavity(self.n_th, self.n_max)
    }
}

/// Inverse temperatures in units of `1/(hbar omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Betas {
    pub beta_q: f64,
    pub beta_c: f64,
    /// `beta_C - beta_Q`.
    pub delta_beta: f64,
    /// `1 - T_C / T_Q = 1 - beta_Q / beta_C`.
    pub delta_beta_tilde: f64,
}

pub fn beta_conversions(p_e: f64, n_th: f64) -> Betas {
    let beta_q = ((1.0 - p_e) / p_e).ln();
    let beta_c = ((1.0 + n_th) / n_th).ln();
    Betas {
        beta_q,
        beta_c,
        delta_beta: beta_c - beta_q,
        delta_beta_tilde: 1.0 - beta_q / beta_c,
    }
}

/// Product of the qubit and cavity Gibbs states with the demon in `|0_D>`.
pub fn compose_initial(spec: &ThermalSpec) -> Result<JointState> {
    let [p_g, p_e] = qubit_populations(spec.p_e)?;
    let cavity = thermal_cavity(spec.n_th, spec.n_max)?;
    let d = spec.n_max + 1;
    let mut p = vec![0.0; 3 * d];
    for (n, &pc) in cavity.iter().enumerate() {
        p[Level::G.index() * d + n] = p_g * pc;
        p[Level::E.index() * d + n] = p_e * pc;
    }
    Ok(JointState::from_raw(spec.n_max, p))
}
