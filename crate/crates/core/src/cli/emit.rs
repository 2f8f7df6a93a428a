//! Figure-data tables and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::OutputFormat;
use crate::error::{Error, Result};
use crate::experiment::{BootstrapErrors, MonteCarloRun, SweepResult};
use crate::thermo::ThermoReport;

/// `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One figure panel: named columns over the sweep points.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Panel {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig12(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn panel(
    name: &'static str,
    columns: &[&'static str],
    result: &SweepResult,
    row: impl Fn(&ThermoReport, &ThermoReport) -> Vec<f64>,
) -> Panel {
    Panel {
        name,
        columns: columns.to_vec(),
        rows: result
            .points
            .iter()
            .map(|p| {
                let mut r = vec![p.delta_beta_tilde];
                r.extend(row(&p.demon, &p.no_demon));
                r
            })
            .collect(),
    }
}

/// The five panels behind the heat-exchange and entropy figures.
pub fn sweep_panels(result: &SweepResult) -> Vec<Panel> {
    vec![
        panel(
            "fig2",
            &["delta_beta_tilde", "Q_C_demon", "Q_Q_demon", "Q_C_nodemon", "Q_Q_nodemon", "epsilon"],
            result,
            |d, n| vec![d.heat_c, d.heat_q, n.heat_c, n.heat_q, d.heat_gain],
        ),
        panel(
            "fig3a",
            &[
                "delta_beta_tilde",
                "I_readout",
                "I_feedback",
                "dI",
                "I_readout_nodemon",
                "I_feedback_nodemon",
                "dI_nodemon",
            ],
            result,
            |d, n| {
                vec![
                    d.readout.i_qc_d,
                    d.feedback.i_qc_d,
                    d.delta_i_qc_d,
                    n.readout.i_qc_d,
                    n.feedback.i_qc_d,
                    n.delta_i_qc_d,
                ]
            },
        ),
        panel(
            "fig3b",
            &[
                "delta_beta_tilde",
                "Q_dbeta",
                "g",
                "Qq_dbeta",
                "Q_dbeta_nodemon",
                "g_nodemon",
                "Qq_dbeta_nodemon",
            ],
            result,
            |d, n| {
                vec![
                    d.entropy_production,
                    d.generalized_slt,
                    d.entropy_production_qubit,
                    n.entropy_production,
                    n.generalized_slt,
                    n.entropy_production_qubit,
                ]
            },
        ),
        panel(
            "fig3c",
            &[
                "delta_beta_tilde",
                "D_Q",
                "D_C",
                "dI_QC",
                "D_QC",
                "D_Q_nodemon",
                "D_C_nodemon",
                "dI_QC_nodemon",
                "D_QC_nodemon",
            ],
            result,
            |d, n| {
                vec![
                    d.d_q,
                    d.d_c,
                    d.delta_i_q_c,
                    d.d_qc,
                    n.d_q,
                    n.d_c,
                    n.delta_i_q_c,
                    n.d_qc,
                ]
            },
        ),
        panel(
            "fig3d",
            &["delta_beta_tilde", "residual", "residual_nodemon"],
            result,
            |d, n| vec![d.residual, n.residual],
        ),
    ]
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

pub const SWEEP_CONFIG_SIDECAR: &str = "sweep_config.json";

/// Writes the sweep panels to `dir`. CSV output gets one file per panel
/// plus a config sidecar; JSON bundles everything in `sweep.json`.
pub fn emit_sweep(
    result: &SweepResult,
    format: OutputFormat,
    dir: &Path,
    config: &serde_json::Value,
) -> Result<Vec<PathBuf>> {
    if result.points.is_empty() {
        return Err(Error::Config {
            key: "grid".into(),
            message: "sweep has no points".into(),
        });
    }
    ensure_dir(dir)?;
    let panels = sweep_panels(result);
    match format {
        OutputFormat::Csv => {
            let mut written = Vec::new();
            for p in &panels {
                written.push(write(dir.join(format!("{}.csv", p.name)), &p.to_csv())?);
            }
            let sidecar = json!({ "config": config, "provenance": result.provenance });
            written.push(write(dir.join(SWEEP_CONFIG_SIDECAR), &pretty(&sidecar))?);
            Ok(written)
        }
        OutputFormat::Json => {
            let mut bundle = serde_json::Map::new();
            for p in &panels {
                bundle.insert(p.name.to_string(), json!({ "columns": p.columns, "rows": p.rows }));
            }
            let doc = json!({
                "config": config,
                "provenance": result.provenance,
                "panels": bundle,
            });
            Ok(vec![write(dir.join("sweep.json"), &pretty(&doc))?])
        }
    }
}

fn report_rows(report: &ThermoReport) -> String {
    let mut out = String::from("quantity,value\n");
    for (name, value) in report.scalar_fields() {
        let _ = writeln!(out, "{name},{}", format_sig12(value));
    }
    out
}

/// Single-run report: `quantity,value` rows or a JSON document.
pub fn emit_report(
    report: &ThermoReport,
    format: OutputFormat,
    dir: &Path,
    config: &serde_json::Value,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let stem = if report.demon_on { "report_demon" } else { "report_nodemon" };
    match format {
        OutputFormat::Csv => Ok(vec![
            write(dir.join(format!("{stem}.csv")), &report_rows(report))?,
            write(dir.join("run_config.json"), &pretty(config))?,
        ]),
        OutputFormat::Json => {
            let doc = json!({ "config": config, "report": report });
            Ok(vec![write(dir.join(format!("{stem}.json")), &pretty(&doc))?])
        }
    }
}

/// Shot counts, plug-in estimates against the analytic values, and
/// bootstrap standard errors.
pub fn emit_monte_carlo(
    run: &MonteCarloRun,
    estimate: &ThermoReport,
    analytic: &ThermoReport,
    errors: &BootstrapErrors,
    format: OutputFormat,
    dir: &Path,
    config: &serde_json::Value,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    match format {
        OutputFormat::Csv => {
            let mut counts = String::from("s_Q,s_D,n,count_readout,count_feedback\n");
            for (s_q, s_d) in [(0, 0), (0, 1), (1, 0)] {
                for n in 0..=run.readout.n_max {
                    let _ = writeln!(
                        counts,
                        "{s_q},{s_d},{n},{},{}",
                        run.readout.count(s_q, s_d, n),
                        run.feedback.count(s_q, s_d, n)
                    );
                }
            }
            let mut report = String::from("quantity,estimate,analytic,std_error\n");
            for ((name, est), (_, exact)) in estimate.scalar_fields().into_iter().zip(analytic.scalar_fields()) {
                let se = errors.get(name).unwrap_or(0.0);
                let _ = writeln!(
                    report,
                    "{name},{},{},{}",
                    format_sig12(est),
                    format_sig12(exact),
                    format_sig12(se)
                );
            }
            let sidecar = json!({
                "config": config,
                "shots": run.readout.total,
                "detected_readout": run.readout.detected,
                "detected_feedback": run.feedback.detected,
                "bootstrap": errors.resamples,
            });
            Ok(vec![
                write(dir.join("mc_counts.csv"), &counts)?,
                write(dir.join("mc_report.csv"), &report)?,
                write(dir.join("mc_config.json"), &pretty(&sidecar))?,
            ])
        }
        OutputFormat::Json => {
            let doc = json!({
                "config": config,
                "run": run,
                "estimate": estimate,
                "analytic": analytic,
                "bootstrap": errors,
            });
            Ok(vec![write(dir.join("mc.json"), &pretty(&doc))?])
        }
    }
}
