use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use maxwell_demon::cli::config::{parse_config, Mode, Overrides, ProtocolConfig};
use maxwell_demon::cli::emit;
use maxwell_demon::cli::validate::{validate, Fault, ValidateOptions};
use maxwell_demon::dynamics::run_stages;
use maxwell_demon::experiment::{bootstrap_errors, estimate_report, monte_carlo, sweep};
use maxwell_demon::thermo::slt_report;
use maxwell_demon::{Error, Result};

/// Autonomous Maxwell demon in a qubit, demon level and cavity.
#[derive(Debug, Parser)]
#[command(name = "demon", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One protocol run at the configured `p_e`.
    Run {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Demon and no-demon runs over a `delta_beta_tilde` grid.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Finite-shot emulation with bootstrap error bars.
    Mc {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Checks the thermodynamic identities on a built-in grid.
    Validate {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

fn merge(global: &Overrides, local: &Overrides) -> Overrides {
    macro_rules! pick {
        ($($f:ident),*) => {
            Overrides {
                $($f: local.$f.clone().or_else(|| global.$f.clone()),)*
                no_demon: local.no_demon || global.no_demon,
                ideal: local.ideal || global.ideal,
                print_config: local.print_config || global.print_config,
            }
        };
    }
    pick!(
        config, out, format, seed, p_e, n_th, n_max, eta, eps_det, p_det, t_flight, t_atom, t_cav, n_env, shots,
        bootstrap, grid_points, grid_span
    )
}

fn setup_threads() -> Result<()> {
    let Ok(value) = std::env::var("DEMON_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| Error::Config {
        key: "DEMON_THREADS".into(),
        message: format!("{value:?} is not a thread count"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config {
            key: "DEMON_THREADS".into(),
            message: e.to_string(),
        })
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(config: &ProtocolConfig) -> Result<()> {
    let spec = config.thermal_spec()?;
    let imp = config.effective_imperfections();
    let report = slt_report(&run_stages(&spec, &imp, config.demon)?, &spec)?;
    print_written(&emit::emit_report(&report, config.format, &config.out, &config.to_json())?);
    println!(
        "Q_C = {}  Q_C dbeta = {}  dI = {}  D_QC = {}  residual = {:.3e}",
        emit::format_sig12(report.heat_c),
        emit::format_sig12(report.entropy_production),
        emit::format_sig12(report.delta_i_qc_d),
        emit::format_sig12(report.d_qc),
        report.residual
    );
    Ok(())
}

fn run_sweep(config: &ProtocolConfig) -> Result<()> {
    let imp = config.effective_imperfections();
    let result = sweep(&config.grid_values(), config.n_th, config.n_max, &imp)?;
    print_written(&emit::emit_sweep(&result, config.format, &config.out, &config.to_json())?);
    Ok(())
}

fn run_mc(config: &ProtocolConfig) -> Result<()> {
    let spec = config.thermal_spec()?;
    let imp = config.effective_imperfections();
    let mc = monte_carlo(&spec, &imp, config.demon, config.shots, config.seed)?;
    let estimate = estimate_report(&mc)?;
    let analytic = slt_report(&run_stages(&spec, &imp, config.demon)?, &spec)?;
    let errors = bootstrap_errors(&mc, config.bootstrap, config.seed)?;
    print_written(&emit::emit_monte_carlo(
        &mc,
        &estimate,
        &analytic,
        &errors,
        config.format,
        &config.out,
        &config.to_json(),
    )?);
    for name in ["feedback.mean_photon_number", "heat_q", "readout.i_qc_d"] {
        let pick = |r: &maxwell_demon::thermo::ThermoReport| {
            r.scalar_fields().into_iter().find(|(n, _)| *n == name).map_or(f64::NAN, |(_, v)| v)
        };
        println!(
            "{name:<28} {} +- {}  (exact {})",
            emit::format_sig12(pick(&estimate)),
            emit::format_sig12(errors.get(name).unwrap_or(f64::NAN)),
            emit::format_sig12(pick(&analytic))
        );
    }
    Ok(())
}

fn run_validate(fault: Option<Fault>) -> Result<bool> {
    let report = validate(ValidateOptions { fault })?;
    for check in &report.checks {
        println!("{check}");
    }
    println!(
        "note min Q_C dbeta - dI without demon under relaxation: {:.3e}",
        report.open_no_demon_min_slt
    );
    if let Some(failed) = report.first_failure() {
        eprintln!("validation failed: {}", failed.family);
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, overrides, fault) = match &cli.command {
        Some(Command::Run { overrides }) => (Some(Mode::Run), merge(&cli.overrides, overrides), None),
        Some(Command::Sweep { overrides }) => (Some(Mode::Sweep), merge(&cli.overrides, overrides), None),
        Some(Command::Mc { overrides }) => (Some(Mode::Mc), merge(&cli.overrides, overrides), None),
        Some(Command::Validate { overrides, inject_fault }) => {
            (Some(Mode::Validate), merge(&cli.overrides, overrides), *inject_fault)
        }
        None => (None, cli.overrides.clone(), None),
    };
    let outcome = (|| -> Result<bool> {
        setup_threads()?;
        let mut config = parse_config(&overrides)?;
        if let Some(mode) = mode {
            config.mode = mode;
        }
        if overrides.print_config {
            print!("{}", toml::to_string(&config).expect("config serializes"));
            return Ok(true);
        }
        match config.mode {
            Mode::Run => run(&config).map(|_| true),
            Mode::Sweep => run_sweep(&config).map(|_| true),
            Mode::Mc => run_mc(&config).map(|_| true),
            Mode::Validate => run_validate(fault),
        }
    })();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
