//! Entropic and energetic bookkeeping of the demon protocol.
//!
//! Everything is in natural units: entropies in nats, heats in photons
//! (`hbar omega = 1`), inverse temperatures as `beta * hbar omega`.
//!
//! The central balance checked here is
//!
//! ```text
//! Q_C (beta_C - beta_Q) = dI_{QC:D} + D_QC
//! ```
//!
//! where `dI` is the change of the demon's mutual information with the
//! qubit-cavity pair across the exchange and `D_QC` is the relative entropy
//! of the final QC state to the initial product of Gibbs states.

use serde::{Deserialize, Serialize};

use crate::dynamics::{run_stages, ImperfectionSpec, StageTrace};
use crate::error::{Error, Result};
use crate::statespace::{logical_map, Betas, LogicalState, SubsystemSet, ThermalSpec};

/// Normalization slack accepted by the entropy functionals.
pub const DIST_TOLERANCE: f64 = 1e-9;
/// Round-off allowance below zero for mutual information.
pub const MI_CLAMP: f64 = 1e-12;
/// Largest admissible disagreement between the two `D_QC` routes.
pub const ROUTE_TOLERANCE: f64 = 1e-10;

fn check_normalized(dist: &[f64]) -> Result<()> {
    for (index, &value) in dist.iter().enumerate() {
        if !(value >= 0.0) {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let sum: f64 = dist.iter().sum();
    if !((sum - 1.0).abs() <= DIST_TOLERANCE) {
        return Err(Error::Unnormalized { sum });
    }
    Ok(())
}

fn shannon(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Shannon entropy `-sum p ln p` of a normalized distribution, `0 ln 0 = 0`.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    check_normalized(dist)?;
    Ok(shannon(dist).max(0.0))
}

fn clamp_mi(value: f64) -> Result<f64> {
    if value < -MI_CLAMP {
        Err(Error::NegativeMutualInformation(value))
    } else {
        Ok(value.max(0.0))
    }
}

/// `I(A:B) = S_A + S_B - S_AB` for disjoint nonempty blocks.
pub fn mutual_information(state: &LogicalState, a: SubsystemSet, b: SubsystemSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() || a.intersects(b) {
        return Err(Error::InvalidPartition);
    }
    let s_a = entropy(&state.marginal(a)?)?;
    let s_b = entropy(&state.marginal(b)?)?;
    let s_ab = entropy(&state.marginal(a | b)?)?;
    clamp_mi(s_a + s_b - s_ab)
}

/// Kullback-Leibler divergence `sum p ln(p / q)`.
///
/// Returns `f64::INFINITY` when `q` vanishes somewhere `p` does not; shape
/// and normalization problems are errors.
pub fn relative_entropy(dist: &[f64], reference: &[f64]) -> Result<f64> {
    if dist.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: dist.len(),
            right: reference.len(),
        });
    }
    check_normalized(dist)?;
    check_normalized(reference)?;
    let mut d = 0.0;
    for (&p, &q) in dist.iter().zip(reference) {
        if p > 0.0 {
            if q <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += p * (p / q).ln();
        }
    }
    Ok(d.max(0.0))
}

fn finite_relative_entropy(dist: &[f64], reference: &[f64], what: &'static str) -> Result<f64> {
    let d = relative_entropy(dist, reference)?;
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::SupportViolation { what })
    }
}

/// Relative entropy of the QC pair to the initial Gibbs product, by parts
/// and directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeEntropyQc {
    pub d_q: f64,
    pub d_c: f64,
    pub i_q_c: f64,
    /// `d_q + d_c + i_q_c`
    pub d_qc: f64,
    /// `D[rho_QC || G_Q (x) G_C]`
    pub d_qc_direct: f64,
}

pub fn relative_entropy_qc(state: &LogicalState, spec: &ThermalSpec) -> Result<RelativeEntropyQc> {
    let gibbs_q = spec.qubit_gibbs();
    let gibbs_c = spec.cavity_gibbs()?;
    if gibbs_c.len() != state.n_max() + 1 {
        return Err(Error::LengthMismatch {
            left: state.n_max() + 1,
            right: gibbs_c.len(),
        });
    }
    let rho_q = state.marginal(SubsystemSet::Q)?;
    let rho_c = state.marginal(SubsystemSet::C)?;
    let rho_qc = state.marginal(SubsystemSet::QC)?;

    let d_q = finite_relative_entropy(&rho_q, &gibbs_q, "rho_Q")?;
    let d_c = finite_relative_entropy(&rho_c, &gibbs_c, "rho_C")?;
    let i_q_c = clamp_mi(shannon(&rho_q) + shannon(&rho_c) - shannon(&rho_qc))?;

    let product: Vec<f64> = gibbs_q
        .iter()
        .flat_map(|&a| gibbs_c.iter().map(move |&b| a * b))
        .collect();
    let d_qc_direct = finite_relative_entropy(&rho_qc, &product, "rho_QC")?;

    let d_qc = d_q + d_c + i_q_c;
    if (d_qc - d_qc_direct).abs() > ROUTE_TOLERANCE {
        return Err(Error::RouteMismatch {
            decomposed: d_qc,
            direct: d_qc_direct,
        });
    }
    Ok(RelativeEntropyQc {
        d_q,
        d_c,
        i_q_c,
        d_qc,
        d_qc_direct,
    })
}

/// Heat absorbed by qubit and cavity across the exchange, in photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heats {
    pub q_q: f64,
    pub q_c: f64,
}

fn heats_between(before: &LogicalState, after: &LogicalState) -> Result<Heats> {
    let excited = |s: &LogicalState| s.marginal(SubsystemSet::Q).map(|m| m[1]);
    let mean_n = |s: &LogicalState| {
        s.marginal(SubsystemSet::C)
            .map(|m| m.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>())
    };
    Ok(Heats {
        q_q: excited(after)? - excited(before)?,
        q_c: mean_n(after)? - mean_n(before)?,
    })
}

pub fn heats(trace: &StageTrace) -> Result<Heats> {
    heats_between(&logical_map(&trace.post_readout), &logical_map(&trace.post_feedback))
}

/// Entropies and populations of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageQuantities {
    pub s_q: f64,
    pub s_d: f64,
    pub s_c: f64,
    pub s_qc: f64,
    pub s_qdc: f64,
    pub i_qc_d: f64,
    pub i_q_c: f64,
    pub mean_photon_number: f64,
    pub excited_population: f64,
}

impl StageQuantities {
    pub fn of(state: &LogicalState) -> Result<Self> {
        let h = |set| state.marginal(set).and_then(|m| entropy(&m));
        let (s_q, s_d, s_c, s_qc, s_qdc) = (
            h(SubsystemSet::Q)?,
            h(SubsystemSet::D)?,
            h(SubsystemSet::C)?,
            h(SubsystemSet::QC)?,
            h(SubsystemSet::QDC)?,
        );
        let mean_photon_number = state
            .marginal(SubsystemSet::C)?
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        Ok(StageQuantities {
            s_q,
            s_d,
            s_c,
            s_qc,
            s_qdc,
            i_qc_d: clamp_mi(s_qc + s_d - s_qdc)?,
            i_q_c: clamp_mi(s_q + s_c - s_qc)?,
            mean_photon_number,
            excited_population: state.marginal(SubsystemSet::Q)?[1],
        })
    }
}

/// Every thermodynamic quantity of one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub demon_on: bool,
    pub p_e: f64,
    pub n_th: f64,
    pub betas: Betas,
    /// Snapshot before the exchange (after the read-out pulse).
    pub readout: StageQuantities,
    /// Snapshot after the exchange.
    pub feedback: StageQuantities,
    pub delta_i_qc_d: f64,
    pub delta_i_q_c: f64,
    pub delta_s_q: f64,
    pub delta_s_c: f64,
    pub delta_s_qc: f64,
    pub delta_s_qdc: f64,
    pub d_q: f64,
    pub d_c: f64,
    pub d_qc: f64,
    pub heat_q: f64,
    pub heat_c: f64,
    /// Physical entropy production `Q_C * delta_beta`.
    pub entropy_production: f64,
    /// Same pairing built from the qubit heat, `-Q_Q * delta_beta`.
    pub entropy_production_qubit: f64,
    /// `Q_C delta_beta - dI_{QC:D} - D_QC`
    pub residual: f64,
    /// `Q_C delta_beta - dI_{QC:D}`
    pub generalized_slt: f64,
    /// `Q_C delta_beta - D_QC`, the demon-free form of the balance.
    pub reduced_residual: Option<f64>,
    /// `dS_Q - (beta_Q Q_Q - D_Q)`
    pub subsystem_residual_q: f64,
    /// `dS_C - (beta_C Q_C - D_C)`
    pub subsystem_residual_c: f64,
    pub baseline_heat: f64,
    pub heat_gain: f64,
}

impl ThermoReport {
    /// Flat `(name, value)` view of every numeric field, in a fixed order.
    pub fn scalar_fields(&self) -> Vec<(&'static str, f64)> {
        let stage = |prefix: &str, s: &StageQuantities| -> Vec<(&'static str, f64)> {
            let names: [&'static str; 9] = if prefix == "readout" {
                [
                    "readout.s_q",
                    "readout.s_d",
                    "readout.s_c",
                    "readout.s_qc",
                    "readout.s_qdc",
                    "readout.i_qc_d",
                    "readout.i_q_c",
                    "readout.mean_photon_number",
                    "readout.excited_population",
                ]
            } else {
                [
                    "feedback.s_q",
                    "feedback.s_d",
                    "feedback.s_c",
                    "feedback.s_qc",
                    "feedback.s_qdc",
                    "feedback.i_qc_d",
                    "feedback.i_q_c",
                    "feedback.mean_photon_number",
                    "feedback.excited_population",
                ]
            };
            let values = [
                s.s_q,
                s.s_d,
                s.s_c,
                s.s_qc,
                s.s_qdc,
                s.i_qc_d,
                s.i_q_c,
                s.mean_photon_number,
                s.excited_population,
            ];
            names.into_iter().zip(values).collect()
        };
        let mut out = vec![
            ("p_e", self.p_e),
            ("n_th", self.n_th),
            ("beta_q", self.betas.beta_q),
            ("beta_c", self.betas.beta_c),
            ("delta_beta", self.betas.delta_beta),
            ("delta_beta_tilde", self.betas.delta_beta_tilde),
        ];
        out.extend(stage("readout", &self.readout));
        out.extend(stage("feedback", &self.feedback));
        out.extend([
            ("delta_i_qc_d", self.delta_i_qc_d),
            ("delta_i_q_c", self.delta_i_q_c),
            ("delta_s_q", self.delta_s_q),
            ("delta_s_c", self.delta_s_c),
            ("delta_s_qc", self.delta_s_qc),
            ("delta_s_qdc", self.delta_s_qdc),
            ("d_q", self.d_q),
            ("d_c", self.d_c),
            ("d_qc", self.d_qc),
            ("heat_q", self.heat_q),
            ("heat_c", self.heat_c),
            ("entropy_production", self.entropy_production),
            ("entropy_production_qubit", self.entropy_production_qubit),
            ("residual", self.residual),
            ("generalized_slt", self.generalized_slt),
            ("subsystem_residual_q", self.subsystem_residual_q),
            ("subsystem_residual_c", self.subsystem_residual_c),
            ("baseline_heat", self.baseline_heat),
            ("heat_gain", self.heat_gain),
        ]);
        out
    }

    /// Recomputes the derived balance fields after a field was overwritten.
    pub fn rebalance(&mut self) {
        let db = self.betas.delta_beta;
        self.entropy_production = self.heat_c * db;
        self.entropy_production_qubit = -self.heat_q * db;
        self.residual = self.entropy_production - self.delta_i_qc_d - self.d_qc;
        self.generalized_slt = self.entropy_production - self.delta_i_qc_d;
        self.reduced_residual = (!self.demon_on).then_some(self.entropy_production - self.d_qc);
        self.heat_gain = heat_gain(self.heat_c, self.baseline_heat);
    }
}

/// Builds the report from the snapshots straddling the exchange.
pub fn report_from_states(
    readout: &LogicalState,
    feedback: &LogicalState,
    spec: &ThermalSpec,
    demon_on: bool,
) -> Result<ThermoReport> {
    report_from_states_with_baseline(readout, feedback, spec, demon_on, classical_baseline(spec)?)
}

/// As [`report_from_states`] with a precomputed [`classical_baseline`].
pub fn report_from_states_with_baseline(
    readout: &LogicalState,
    feedback: &LogicalState,
    spec: &ThermalSpec,
    demon_on: bool,
    baseline_heat: f64,
) -> Result<ThermoReport> {
    let before = StageQuantities::of(readout)?;
    let after = StageQuantities::of(feedback)?;
    let Heats { q_q, q_c } = heats_between(readout, feedback)?;
    let rel = relative_entropy_qc(feedback, spec)?;
    let betas = spec.betas();
    let delta_s_q = after.s_q - before.s_q;
    let delta_s_c = after.s_c - before.s_c;
    let mut report = ThermoReport {
        demon_on,
        p_e: spec.p_e,
        n_th: spec.n_th,
        betas,
        readout: before,
        feedback: after,
        delta_i_qc_d: after.i_qc_d - before.i_qc_d,
        delta_i_q_c: after.i_q_c - before.i_q_c,
        delta_s_q,
        delta_s_c,
        delta_s_qc: after.s_qc - before.s_qc,
        delta_s_qdc: after.s_qdc - before.s_qdc,
        d_q: rel.d_q,
        d_c: rel.d_c,
        d_qc: rel.d_qc,
        heat_q: q_q,
        heat_c: q_c,
        entropy_production: 0.0,
        entropy_production_qubit: 0.0,
        residual: 0.0,
        generalized_slt: 0.0,
        reduced_residual: None,
        subsystem_residual_q: delta_s_q - (betas.beta_q * q_q - rel.d_q),
        subsystem_residual_c: delta_s_c - (betas.beta_c * q_c - rel.d_c),
        baseline_heat,
        heat_gain: 0.0,
    };
    report.rebalance();
    Ok(report)
}

/// Thermodynamic report of a simulated trace. The detection snapshot is
/// not used: the bookkeeping runs on the populations themselves.
pub fn slt_report(trace: &StageTrace, spec: &ThermalSpec) -> Result<ThermoReport> {
    report_from_states(
        &logical_map(&trace.post_readout),
        &logical_map(&trace.post_feedback),
        spec,
        trace.demon_on,
    )
}

/// Best heat delivery to the cavity knowing only the two temperatures:
/// couple the systems when the qubit is hotter, keep them apart otherwise.
pub fn classical_baseline(spec: &ThermalSpec) -> Result<f64> {
    if spec.betas().delta_beta_tilde <= 0.0 {
        return Ok(0.0);
    }
    let trace = run_stages(spec, &ImperfectionSpec::ideal(), false)?;
    Ok(trace.post_feedback.mean_photon_number() - trace.post_readout.mean_photon_number())
}

/// Excess cavity heat of the demon protocol over the classical baseline.
pub fn heat_gain(q_c_demon: f64, q_c_baseline: f64) -> f64 {
    q_c_demon - q_c_baseline
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::{compose_initial, thermal_cavity, JointState, Level};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn ideal_report(p_e: f64, n_th: f64, demon_on: bool) -> ThermoReport {
        let spec = ThermalSpec::new(p_e, n_th, 30).unwrap();
        let trace = run_stages(&spec, &ImperfectionSpec::ideal(), demon_on).unwrap();
        slt_report(&trace, &spec).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[0.5, 0.5]).unwrap(), LN_2, epsilon = 1e-15);
        let n = 0.63f64;
        let closed = (1.0 + n) * (1.0 + n).ln() - n * n.ln();
        let s = entropy(&thermal_cavity(n, 40).unwrap()).unwrap();
        assert_abs_diff_eq!(s, closed, epsilon = 1e-8);
        assert_abs_diff_eq!(s, 1.088, epsilon = 1e-3);
        assert!(matches!(entropy(&[0.5, 0.6]), Err(Error::Unnormalized { .. })));
    }

    #[test]
    fn mutual_information_examples() {
        let spec = ThermalSpec::new(0.3, 0.63, 25).unwrap();
        let init = logical_map(&compose_initial(&spec).unwrap());
        for (a, b) in [
            (SubsystemSet::Q, SubsystemSet::C),
            (SubsystemSet::QC, SubsystemSet::D),
            (SubsystemSet::Q, SubsystemSet::DC),
        ] {
            assert!(mutual_information(&init, a, b).unwrap() < 1e-12);
        }
        assert_eq!(
            mutual_information(&init, SubsystemSet::QC, SubsystemSet::C),
            Err(Error::InvalidPartition)
        );
        assert_eq!(
            mutual_information(&init, SubsystemSet::EMPTY, SubsystemSet::C),
            Err(Error::InvalidPartition)
        );

        let r = ideal_report(0.5, 0.63, true);
        assert_abs_diff_eq!(r.readout.i_qc_d, LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.feedback.i_q_c, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn relative_entropy_examples() {
        assert_eq!(relative_entropy(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_abs_diff_eq!(relative_entropy(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!(relative_entropy(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(matches!(
            relative_entropy(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn relative_entropy_qc_examples() {
        let spec = ThermalSpec::new(0.4, 0.63, 25).unwrap();
        let init = logical_map(&compose_initial(&spec).unwrap());
        let r = relative_entropy_qc(&init, &spec).unwrap();
        assert!(r.d_q.abs() < 1e-15 && r.d_c.abs() < 1e-15 && r.i_q_c < 1e-12 && r.d_qc < 1e-12);

        let report = ideal_report(0.5, 0.63, true);
        assert_abs_diff_eq!(report.d_q, LN_2, epsilon = 1e-10);
    }

    #[test]
    fn support_violation_is_distinct() {
        let spec = ThermalSpec::new(0.4, 0.63, 25).unwrap();
        let mut spec_wrong = spec;
        spec_wrong.n_max = 26;
        let init = logical_map(&compose_initial(&spec).unwrap());
        assert!(matches!(
            relative_entropy_qc(&init, &spec_wrong),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn heat_examples() {
        for p_e in [0.1, 0.5, 0.9] {
            let r = ideal_report(p_e, 0.63, true);
            assert_abs_diff_eq!(r.heat_c, p_e, epsilon = 1e-9);
            assert_abs_diff_eq!(r.heat_q, -p_e, epsilon = 1e-9);
        }
        let r = ideal_report(ThermalSpec::equilibrium_p_e(0.63), 0.63, false);
        assert_abs_diff_eq!(r.heat_c, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.heat_q, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn balance_holds_in_ideal_runs() {
        for demon_on in [true, false] {
            for p_e in [0.05, 0.2788, 0.5, 0.8] {
                let r = ideal_report(p_e, 0.63, demon_on);
                assert!(r.residual.abs() < 1e-10, "{r:?}");
                assert!(r.generalized_slt >= -1e-10);
                assert!(r.delta_s_qdc.abs() < 1e-12);
                assert!(r.subsystem_residual_q.abs() < 1e-10);
                assert!(r.subsystem_residual_c.abs() < 1e-10);
                if !demon_on {
                    let reduced = r.reduced_residual.unwrap();
                    assert!(reduced.abs() < 1e-10);
                    assert!(r.entropy_production >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn classical_baseline_examples() {
        let eq = ThermalSpec::new(ThermalSpec::equilibrium_p_e(0.63), 0.63, 25).unwrap();
        assert!(eq.betas().delta_beta_tilde.abs() < 1e-12);
        let cold = ThermalSpec::new(0.1, 0.63, 25).unwrap();
        assert_eq!(classical_baseline(&cold).unwrap(), 0.0);
        // no-demon exchange at p_e = 0.5: p_e * (1 - P(n_max)) - (1 - p_e) * (1 - P(0))
        let hot = ThermalSpec::new(0.5, 0.63, 25).unwrap();
        let p = thermal_cavity(0.63, 25).unwrap();
        let expected = 0.5 * (1.0 - p[25]) - 0.5 * (1.0 - p[0]);
        assert_abs_diff_eq!(classical_baseline(&hot).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.5 / 1.63, epsilon = 1e-9);
    }

    #[test]
    fn heat_gain_examples() {
        assert_eq!(heat_gain(0.3, 0.3), 0.0);
        let r = ideal_report(0.1, 0.63, true);
        assert_eq!(r.baseline_heat, 0.0);
        assert_abs_diff_eq!(r.heat_gain, 0.1, epsilon = 1e-9);
        let far = ideal_report(1e-9, 0.63, true);
        assert!(far.heat_gain.abs() < 1e-8);
        let hot = ideal_report(1.0 - 1e-9, 0.63, true);
        assert!(hot.heat_gain.abs() < 1e-6);
    }

    #[test]
    fn pure_state_entropies() {
        let s = logical_map(&JointState::pure(Level::F, 2, 3).unwrap());
        let q = StageQuantities::of(&s).unwrap();
        assert_eq!((q.s_q, q.s_d, q.s_c, q.s_qc, q.s_qdc), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(q.mean_photon_number, 2.0);
    }
}
