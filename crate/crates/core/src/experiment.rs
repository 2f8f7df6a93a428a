//! Temperature sweeps, shot-level emulation of the measured populations, and
//! bootstrap error bars.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{confusion_matrix, run_stages, ImperfectionSpec};
use crate::error::{Error, Result};
use crate::statespace::{JointState, Level, LogicalState, ThermalSpec};
use crate::thermo::{classical_baseline, report_from_states_with_baseline, slt_report, ThermoReport};

pub const DEFAULT_SHOTS: u64 = 25_000;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_GRID_POINTS: usize = 41;
pub const DEFAULT_GRID_SPAN: f64 = 4.0;

/// `p_e` values whose relative inverse temperatures are evenly spaced on
/// `[-span, span]`.
pub fn delta_beta_tilde_grid(n_th: f64, points: usize, span: f64) -> Vec<f64> {
    if points == 1 {
        return vec![ThermalSpec::p_e_for_delta_beta_tilde(0.0, n_th)];
    }
    (0..points)
        .map(|i| -span + 2.0 * span * i as f64 / (points - 1) as f64)
        .map(|dbt| ThermalSpec::p_e_for_delta_beta_tilde(dbt, n_th))
        .collect()
}

pub fn default_grid(n_th: f64) -> Vec<f64> {
    delta_beta_tilde_grid(n_th, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta_beta_tilde: f64,
    pub demon: ThermoReport,
    pub no_demon: ThermoReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProvenance {
    pub n_th: f64,
    pub n_max: usize,
    pub grid: Vec<f64>,
    pub imperfections: ImperfectionSpec,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub provenance: SweepProvenance,
}

fn sweep_point(p_e: f64, n_th: f64, n_max: usize, imp: &ImperfectionSpec) -> Result<SweepPoint> {
    let spec = ThermalSpec::new(p_e, n_th, n_max)?;
    let demon = slt_report(&run_stages(&spec, imp, true)?, &spec)?;
    let no_demon = slt_report(&run_stages(&spec, imp, false)?, &spec)?;
    Ok(SweepPoint {
        delta_beta_tilde: spec.betas().delta_beta_tilde,
        demon,
        no_demon,
    })
}

/// Runs the protocol with and without the demon at every grid point.
/// Points come back ordered by increasing `delta_beta_tilde`.
pub fn sweep(grid: &[f64], n_th: f64, n_max: usize, imp: &ImperfectionSpec) -> Result<SweepResult> {
    imp.validate()?;
    let mut ordered = grid.to_vec();
    ordered.sort_by(f64::total_cmp);
    let points = ordered
        .par_iter()
        .enumerate()
        .map(|(index, &p_e)| {
            sweep_point(p_e, n_th, n_max, imp).map_err(|e| Error::SweepPoint {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(index) = points
        .windows(2)
        .position(|w| !(w[1].delta_beta_tilde > w[0].delta_beta_tilde))
    {
        return Err(Error::SweepPoint {
            index: index + 1,
            source: Box::new(Error::InvalidParameter {
                name: "grid",
                value: ordered[index + 1],
                reason: "grid values must be distinct",
            }),
        });
    }
    Ok(SweepResult {
        points,
        provenance: SweepProvenance {
            n_th,
            n_max,
            grid: ordered,
            imperfections: *imp,
            version: crate::VERSION.to_string(),
        },
    })
}

/// Detected outcome counts over `(s_Q, s_D, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTable {
    pub n_max: usize,
    /// Laid out as `[(s_Q * 2 + s_D) * (n_max + 1) + n]`.
    pub counts: Vec<u64>,
    pub total: u64,
    pub detected: u64,
    pub seed: u64,
}

impl ShotTable {
    pub fn from_counts(n_max: usize, counts: Vec<u64>, total: u64, seed: u64) -> Result<Self> {
        if counts.len() != 4 * (n_max + 1) {
            return Err(Error::LengthMismatch {
                left: counts.len(),
                right: 4 * (n_max + 1),
            });
        }
        let detected = counts.iter().sum();
        if detected > total {
            return Err(Error::InvalidParameter {
                name: "total",
                value: total as f64,
                reason: "fewer shots than detected counts",
            });
        }
        if counts[3 * (n_max + 1)..].iter().any(|&c| c != 0) {
            return Err(Error::InvalidParameter {
                name: "counts",
                value: 0.0,
                reason: "the (1_Q, 1_D) sector must stay empty",
            });
        }
        Ok(ShotTable {
            n_max,
            counts,
            total,
            detected,
            seed,
        })
    }

    pub fn count(&self, s_q: usize, s_d: usize, n: usize) -> u64 {
        self.counts[(s_q * 2 + s_d) * (self.n_max + 1) + n]
    }

    /// Plug-in estimate of `P(s_Q, s_D, n)`.
    pub fn distribution(&self) -> Result<LogicalState> {
        if self.detected == 0 {
            return Err(Error::EmptyTable);
        }
        let n = self.detected as f64;
        let p = self.counts.iter().map(|&c| c as f64 / n).collect();
        LogicalState::from_table(self.n_max, p)
    }
}

/// Shots drawn at the read-out stage (reference) and after the exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRun {
    pub spec: ThermalSpec,
    pub demon_on: bool,
    pub readout: ShotTable,
    pub feedback: ShotTable,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let scaled = u * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= scaled).min(cdf.len() - 1)
}

/// Draws `shots` atoms from `state`, drops undetected ones, and files the
/// rest under the (possibly misattributed) level.
pub fn sample_shots(state: &JointState, imp: &ImperfectionSpec, shots: u64, rng: &mut impl Rng, seed: u64) -> ShotTable {
    let n_max = state.n_max();
    let d = n_max + 1;
    let cdf = cumulative(state.populations());
    let p_det = imp.effective_p_det();
    let confusion = confusion_matrix(imp.effective_eps_det());
    let confusion_cdf: Vec<Vec<f64>> = (0..3)
        .map(|truth| cumulative(&[confusion[0][truth], confusion[1][truth], confusion[2][truth]]))
        .collect();
    let mut counts = vec![0u64; 4 * d];
    let mut detected = 0;
    for _ in 0..shots {
        let k = draw(&cdf, rng.gen::<f64>());
        if p_det < 1.0 && rng.gen::<f64>() >= p_det {
            continue;
        }
        let (truth, n) = (k / d, k % d);
        let observed = if imp.effective_eps_det() > 0.0 {
            draw(&confusion_cdf[truth], rng.gen::<f64>())
        } else {
            truth
        };
        let (s_q, s_d) = Level::from_index(observed).expect("three levels").logical();
        counts[(s_q * 2 + s_d) * d + n] += 1;
        detected += 1;
    }
    ShotTable {
        n_max,
        counts,
        total: shots,
        detected,
        seed,
    }
}

/// Emulates `shots` repetitions at the read-out stage and `shots` more after
/// the exchange. Deterministic in `seed`.
pub fn monte_carlo(
    spec: &ThermalSpec,
    imp: &ImperfectionSpec,
    demon_on: bool,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloRun> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let trace = run_stages(spec, imp, demon_on)?;
    let readout = sample_shots(&trace.post_readout, imp, shots, &mut stream_rng(seed, 0), seed);
    let feedback = sample_shots(&trace.post_feedback, imp, shots, &mut stream_rng(seed, 1), seed);
    Ok(MonteCarloRun {
        spec: *spec,
        demon_on,
        readout,
        feedback,
    })
}

fn estimate_with_baseline(
    readout: &ShotTable,
    feedback: &ShotTable,
    spec: &ThermalSpec,
    demon_on: bool,
    baseline: f64,
) -> Result<ThermoReport> {
    report_from_states_with_baseline(&readout.distribution()?, &feedback.distribution()?, spec, demon_on, baseline)
}

/// Plug-in thermodynamic report from the two shot tables of a run.
pub fn estimate_report(run: &MonteCarloRun) -> Result<ThermoReport> {
    let baseline = classical_baseline(&run.spec)?;
    estimate_with_baseline(&run.readout, &run.feedback, &run.spec, run.demon_on, baseline)
}

/// Multinomial draw of `n` items over `p` through conditional binomials.
fn multinomial(n: u64, p: &[f64], rng: &mut impl Rng) -> Vec<u64> {
    let mut out = vec![0u64; p.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (slot, &pi) in out.iter_mut().zip(p) {
        if left == 0 {
            break;
        }
        if pi <= 0.0 {
            continue;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            left
        } else {
            Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
        };
        *slot = k;
        left -= k;
        mass -= pi;
    }
    // round-off in `mass` can strand a few counts; they belong to the last
    // populated bin
    if left > 0 {
        if let Some(i) = p.iter().rposition(|&x| x > 0.0) {
            out[i] += left;
        }
    }
    out
}

fn resample(table: &ShotTable, rng: &mut impl Rng) -> ShotTable {
    let n = table.detected as f64;
    let p: Vec<f64> = table.counts.iter().map(|&c| c as f64 / n).collect();
    ShotTable {
        counts: multinomial(table.detected, &p, rng),
        ..table.clone()
    }
}

/// Bootstrap standard errors of every scalar report field, keyed by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapErrors {
    pub resamples: usize,
    pub seed: u64,
    pub standard_errors: BTreeMap<String, f64>,
}

impl BootstrapErrors {
    pub fn get(&self, field: &str) -> Option<f64> {
        self.standard_errors.get(field).copied()
    }
}

/// Resamples both tables `resamples` times and reports the spread of every
/// field. Each resample draws from its own ChaCha stream, so the result
/// does not depend on thread scheduling.
pub fn bootstrap_errors(run: &MonteCarloRun, resamples: usize, seed: u64) -> Result<BootstrapErrors> {
    if resamples < 100 {
        return Err(Error::InvalidParameter {
            name: "resamples",
            value: resamples as f64,
            reason: "bootstrap needs at least 100 resamples",
        });
    }
    for table in [&run.readout, &run.feedback] {
        if table.detected < 2 {
            return Err(Error::DegenerateTable {
                detected: table.detected,
            });
        }
    }
    let baseline = classical_baseline(&run.spec)?;
    let samples = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let readout = resample(&run.readout, &mut rng);
            let feedback = resample(&run.feedback, &mut rng);
            estimate_with_baseline(&readout, &feedback, &run.spec, run.demon_on, baseline)
                .map(|r| r.scalar_fields())
        })
        .collect::<Result<Vec<_>>>()?;

    let names: Vec<&'static str> = samples[0].iter().map(|(k, _)| *k).collect();
    let mut standard_errors = BTreeMap::new();
    for (i, name) in names.into_iter().enumerate() {
        let values: Vec<f64> = samples.iter().map(|s| s[i].1).collect();
        if values.iter().all(|&v| v == values[0]) {
            standard_errors.insert(name.to_string(), 0.0);
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        standard_errors.insert(name.to_string(), var.sqrt());
    }
    Ok(BootstrapErrors {
        resamples,
        seed,
        standard_errors,
    })
}
