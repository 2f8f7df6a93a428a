//! Protocol steps acting on population tables: demon read-out, the
//! adiabatic-passage exchange, relaxation during the flight, and the
//! detector confusion channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::{compose_initial, JointState, Level, ThermalSpec, TAIL_THRESHOLD};

/// Cavity resonance, Hz.
pub const CAVITY_FREQUENCY_HZ: f64 = 51e9;
/// Cryostat temperature setting the cavity's environment, K.
pub const ENVIRONMENT_TEMPERATURE_K: f64 = 1.5;
/// Atom-cavity detuning sweep of the adiabatic passage, kHz. Not simulated.
pub const PASSAGE_DETUNING_START_KHZ: f64 = 100.0;
pub const PASSAGE_DETUNING_END_KHZ: f64 = -60.0;
pub const PASSAGE_DURATION_S: f64 = 60e-6;
/// Resonant vacuum Rabi frequency, kHz. Not simulated.
pub const VACUUM_RABI_FREQUENCY_KHZ: f64 = 49.0;

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Bose-Einstein occupation `1 / (exp(h nu / k T) - 1)`.
pub fn bose_einstein_occupation(frequency_hz: f64, temperature_k: f64) -> f64 {
    1.0 / ((PLANCK * frequency_hz / (BOLTZMANN * temperature_k)).exp() - 1.0)
}

/// Experimental imperfections. Every channel can be switched off on its own;
/// [`ImperfectionSpec::ideal`] switches them all off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImperfectionSpec {
    /// g -> f transfer probability of the demon pulse.
    pub eta_readout: f64,
    /// Time of flight from preparation to detection, s.
    pub t_flight: f64,
    /// Lifetime of every circular level, s.
    pub t_atom: f64,
    /// Cavity energy lifetime, s.
    pub t_cav: f64,
    /// Thermal photon number of the cavity environment.
    pub n_env: f64,
    /// Probability of attributing the wrong atomic level.
    pub eps_det: f64,
    /// Probability that an atom is detected at all.
    pub p_det: f64,
    /// Fraction of the flight spent before the atom-cavity exchange.
    pub relax_split: f64,
    pub readout_loss: bool,
    pub atom_relaxation: bool,
    pub cavity_relaxation: bool,
    pub detection_error: bool,
    pub detection_loss: bool,
}

impl Default for ImperfectionSpec {
    fn default() -> Self {
        ImperfectionSpec {
            eta_readout: 0.95,
            t_flight: 1.2e-3,
            t_atom: 30e-3,
            t_cav: 25e-3,
            n_env: 0.243,
            eps_det: 0.05,
            p_det: 0.5,
            relax_split: 0.5,
            readout_loss: true,
            atom_relaxation: true,
            cavity_relaxation: true,
            detection_error: true,
            detection_loss: true,
        }
    }
}

impl ImperfectionSpec {
    pub fn ideal() -> Self {
        ImperfectionSpec {
            readout_loss: false,
            atom_relaxation: false,
            cavity_relaxation: false,
            detection_error: false,
            detection_loss: false,
            ..ImperfectionSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("eta_readout", self.eta_readout),
            ("eps_det", self.eps_det),
            ("p_det", self.p_det),
            ("relax_split", self.relax_split),
        ];
        for (name, value) in probs {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be a probability in [0, 1]",
                });
            }
        }
        for (name, value) in [("t_flight", self.t_flight), ("t_atom", self.t_atom), ("t_cav", self.t_cav)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be a positive duration",
                });
            }
        }
        if !(self.n_env >= 0.0) || !self.n_env.is_finite() {
            return Err(Error::InvalidParameter {
                name: "n_env",
                value: self.n_env,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }

    pub fn effective_eta(&self) -> f64 {
        if self.readout_loss {
            self.eta_readout
        } else {
            1.0
        }
    }

    pub fn effective_eps_det(&self) -> f64 {
        if self.detection_error {
            self.eps_det
        } else {
            0.0
        }
    }

    pub fn effective_p_det(&self) -> f64 {
        if self.detection_loss {
            self.p_det
        } else {
            1.0
        }
    }

    pub fn relaxes(&self) -> bool {
        self.atom_relaxation || self.cavity_relaxation
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a probability in [0, 1]",
        })
    }
}

/// Incoherent g <-> f transfer with probability `eta`; `e` is untouched.
pub fn demon_readout(state: &JointState, eta: f64) -> Result<JointState> {
    check_probability("eta_readout", eta)?;
    let d = state.dim_cavity();
    let mut p = state.populations().to_vec();
    let (f0, g0) = (Level::F.index() * d, Level::G.index() * d);
    for n in 0..d {
        let (pf, pg) = (p[f0 + n], p[g0 + n]);
        p[f0 + n] = pf * (1.0 - eta) + pg * eta;
        p[g0 + n] = pg * (1.0 - eta) + pf * eta;
    }
    Ok(JointState::from_raw(state.n_max(), p))
}

/// Photon-number independent exchange `(e, n) <-> (g, n + 1)`.
///
/// `(g, 0)` and every `(f, n)` are fixed points. `(e, n_max)` has no partner
/// inside the truncation and is left in place, which keeps the map a
/// permutation; its population must be below the tail threshold.
pub fn adiabatic_swap(state: &JointState) -> Result<JointState> {
    let n_max = state.n_max();
    let top = state.get(Level::E, n_max);
    if top >= TAIL_THRESHOLD {
        return Err(Error::SwapOverflow { n_max, mass: top });
    }
    let d = n_max + 1;
    let mut p = state.populations().to_vec();
    let (g0, e0) = (Level::G.index() * d, Level::E.index() * d);
    for n in 0..n_max {
        p.swap(e0 + n, g0 + n + 1);
    }
    Ok(JointState::from_raw(n_max, p))
}

/// Atomic cascade `e -> g -> f`, each step at rate `1/t_atom`, in closed form.
fn atom_decay_matrix(rate: f64, t: f64) -> [[f64; 3]; 3] {
    let x = (-rate * t).exp();
    let gt = rate * t;
    // m[to][from] over (f, g, e)
    [
        [1.0, 1.0 - x, 1.0 - x - gt * x],
        [0.0, x, gt * x],
        [0.0, 0.0, x],
    ]
}

/// Birth-death chain of the damped cavity mode, truncated at `n_max`.
struct CavityChain {
    down: Vec<f64>,
    up: Vec<f64>,
}

impl CavityChain {
    fn new(n_max: usize, n_env: f64, t_cav: f64) -> Self {
        let down = (0..=n_max)
            .map(|n| (1.0 + n_env) * n as f64 / t_cav)
            .collect();
        let up = (0..=n_max)
            .map(|n| if n < n_max { n_env * (n + 1) as f64 / t_cav } else { 0.0 })
            .collect();
        CavityChain { down, up }
    }

    fn max_exit_rate(&self) -> f64 {
        self.down
            .iter()
            .zip(&self.up)
            .map(|(d, u)| d + u)
            .fold(0.0, f64::max)
    }

    /// `out = (I + L / lambda) v`
    fn apply_jump_matrix(&self, lambda: f64, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        for m in 0..n {
            let mut x = v[m] * (1.0 - (self.down[m] + self.up[m]) / lambda);
            if m + 1 < n {
                x += v[m + 1] * self.down[m + 1] / lambda;
            }
            if m > 0 {
                x += v[m - 1] * self.up[m - 1] / lambda;
            }
            out[m] = x;
        }
    }

    /// Uniformization: `exp(L t) v = sum_k Pois(k; lambda t) (I + L/lambda)^k v`.
    fn propagate(&self, v: &[f64], t: f64) -> Vec<f64> {
        let lambda = self.max_exit_rate();
        if lambda == 0.0 || t == 0.0 {
            return v.to_vec();
        }
        // chunking keeps exp(-lambda dt) far from underflow
        let chunks = (lambda * t / 20.0).ceil().max(1.0) as usize;
        let a = lambda * t / chunks as f64;
        let terms = (a + 10.0 * a.sqrt() + 25.0).ceil() as usize;
        let mut current = v.to_vec();
        let mut scratch = vec![0.0; v.len()];
        for _ in 0..chunks {
            let mut term = current.clone();
            let mut weight = (-a).exp();
            let mut acc: Vec<f64> = term.iter().map(|x| weight * x).collect();
            for k in 1..=terms {
                self.apply_jump_matrix(lambda, &term, &mut scratch);
                std::mem::swap(&mut term, &mut scratch);
                weight *= a / k as f64;
                for (s, x) in acc.iter_mut().zip(&term) {
                    *s += weight * x;
                }
            }
            current = acc;
        }
        current
    }
}

/// Evolves populations for `duration` seconds under the enabled relaxation
/// channels: the atomic cascade `e -> g -> f` and the cavity coupled to a
/// bath with `n_env` thermal photons.
pub fn relax(state: &JointState, spec: &ImperfectionSpec, duration: f64) -> Result<JointState> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter {
            name: "duration",
            value: duration,
            reason: "must be finite and non-negative",
        });
    }
    spec.validate()?;
    if duration == 0.0 || !spec.relaxes() {
        return Ok(state.clone());
    }
    let n_max = state.n_max();
    let d = n_max + 1;
    let mut p = state.populations().to_vec();

    // The generator is a Kronecker sum, so the two factors commute.
    if spec.atom_relaxation {
        let m = atom_decay_matrix(1.0 / spec.t_atom, duration);
        let mut out = vec![0.0; 3 * d];
        for to in 0..3 {
            for from in 0..3 {
                let w = m[to][from];
                if w == 0.0 {
                    continue;
                }
                for n in 0..d {
                    out[to * d + n] += w * p[from * d + n];
                }
            }
        }
        p = out;
    }
    if spec.cavity_relaxation {
        let chain = CavityChain::new(n_max, spec.n_env, spec.t_cav);
        for level in 0..3 {
            let row = chain.propagate(&p[level * d..(level + 1) * d], duration);
            p[level * d..(level + 1) * d].copy_from_slice(&row);
        }
    }
    Ok(JointState::from_raw(n_max, p))
}

/// Detector confusion matrix over `(f, g, e)`: `[observed][true]`.
pub fn confusion_matrix(eps_det: f64) -> [[f64; 3]; 3] {
    let mut m = [[eps_det / 2.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0 - eps_det;
    }
    m
}

/// Applies the misattribution channel to the level index.
pub fn detect_channel(state: &JointState, eps_det: f64) -> Result<JointState> {
    check_probability("eps_det", eps_det)?;
    let m = confusion_matrix(eps_det);
    let d = state.dim_cavity();
    let p = state.populations();
    let mut out = vec![0.0; 3 * d];
    for obs in 0..3 {
        for truth in 0..3 {
            for n in 0..d {
                out[obs * d + n] += m[obs][truth] * p[truth * d + n];
            }
        }
    }
    Ok(JointState::from_raw(state.n_max(), out))
}

/// Snapshots of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub demon_on: bool,
    pub initial: JointState,
    pub post_readout: JointState,
    pub post_feedback: JointState,
    pub post_detection: JointState,
}

/// Runs preparation, read-out, flight with the exchange, and the detection
/// model.
pub fn run_stages(spec: &ThermalSpec, imp: &ImperfectionSpec, demon_on: bool) -> Result<StageTrace> {
    imp.validate()?;
    let initial = compose_initial(spec)?;
    let post_readout = if demon_on {
        demon_readout(&initial, imp.effective_eta())?
    } else {
        initial.clone()
    };
    let before = imp.t_flight * imp.relax_split;
    let after = imp.t_flight - before;
    let in_cavity = relax(&post_readout, imp, before)?;
    let swapped = adiabatic_swap(&in_cavity)?;
    let post_feedback = relax(&swapped, imp, after)?;
    let post_detection = detect_channel(&post_feedback, imp.effective_eps_det())?;
    Ok(StageTrace {
        demon_on,
        initial,
        post_readout,
        post_feedback,
        post_detection,
    })
}
