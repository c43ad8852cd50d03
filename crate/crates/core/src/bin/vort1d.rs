use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vort1d::cli_io::{self, out_dir_from_env, parse_config_with, Preset, RunConfig, RunOutcome};
use vort1d::spectral::FilterSpec;
use vort1d::studies;
use vort1d::{Error, Result};

#[derive(Parser)]
#[command(name = "vort1d", version, about = "Pseudospectral solver for 1D vorticity and MHD models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: Option<String>,
        /// Override a config key, e.g. `--set n=512`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check that a single-mode steady state of the a = 1 model stays put.
    CheckSteady {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        cfl: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Convergence study on the fig2 data.
    Converge {
        #[arg(long, value_enum)]
        refine: Refine,
    },
    /// Particle check of the transport model on the fig2 data.
    TransportVerify {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        cfl: f64,
        #[arg(long, default_value_t = 256)]
        particles: usize,
    },
    /// Run a figure preset; `--set n=2048` gives a desk-scale run.
    Reproduce {
        figure: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run several config files in parallel, each into `<out>/<file stem>`.
    Sweep {
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Refine {
    Space,
    Time,
}

fn overrides(set: &[String]) -> Result<Vec<(String, String)>> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::config(kv.as_str(), 0, "expected KEY=VALUE"))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn summarize(out: &RunOutcome, dir: &Path) -> i32 {
    let r = &out.report;
    println!(
        "{:?}: t = {}, {} steps, bkm_integral = {:.6e}, wall {:.2}s -> {}",
        r.status,
        r.t_final,
        r.steps,
        r.bkm_integral,
        r.wall_time_s,
        dir.display()
    );
    if let Some(m) = &r.message {
        eprintln!("{m}");
    }
    r.exit_code
}

fn run_config(mut cfg: RunConfig) -> Result<i32> {
    out_dir_from_env(&mut cfg);
    let out = cli_io::execute(&cfg)?;
    Ok(summarize(&out, &cfg.out_dir))
}

fn main_inner(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, preset, set } => {
            let mut kv = overrides(&set)?;
            if let Some(p) = preset {
                kv.insert(0, ("preset".into(), p));
            }
            run_config(parse_config_with(&read(&config)?, &kv)?)
        }
        Command::Reproduce { figure, set } => {
            let preset: Preset = figure.parse().map_err(Error::InvalidArgument)?;
            let mut kv = vec![("preset".to_string(), figure), ("out_dir".into(), format!("out/{preset}"))];
            kv.extend(overrides(&set)?);
            run_config(parse_config_with("", &kv)?)
        }
        Command::CheckSteady { n, t_end, cfl, tol } => {
            let drift = studies::check_steady(n, cfl, t_end)?;
            let ok = drift <= tol;
            println!("steady-state drift {drift:.3e} (tolerance {tol:e}): {}", if ok { "ok" } else { "FAILED" });
            Ok(if ok { 0 } else { 1 })
        }
        Command::Converge { refine } => {
            let rows = match refine {
                Refine::Time => {
                    let h = 0.5 / 512.0;
                    studies::temporal_convergence(256, 0.5, &[8.0 * h, 4.0 * h, 2.0 * h, h], FilterSpec::default())?
                }
                Refine::Space => studies::spatial_convergence(&[32, 64, 128, 256], 1024, 1.0, 1e-3)?,
            };
            println!("{},error,order", if matches!(refine, Refine::Time) { "dt" } else { "n" });
            for r in rows {
                let order = r.order.map_or(String::new(), |o| format!("{o:.4}"));
                println!("{},{:.6e},{order}", r.param, r.error);
            }
            Ok(0)
        }
        Command::TransportVerify { n, t_end, cfl, particles } => {
            let err = studies::transport_verify(n, t_end, cfl, particles)?;
            println!("transport invariance error {err:.3e} (n = {n}, t_end = {t_end}, {particles} particles)");
            Ok(0)
        }
        Command::Sweep { configs, out } => {
            let base = std::env::var_os(cli_io::OUT_ENV).map(PathBuf::from).unwrap_or(out);
            let jobs = configs
                .iter()
                .map(|path| {
                    let name = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
                    Ok((name, cli_io::parse_config(&read(path)?)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut worst = 0;
            for ((name, _), res) in jobs.iter().zip(cli_io::sweep(&jobs, &base)) {
                let code = match res {
                    Ok(out) => summarize(&out, &base.join(name)),
                    Err(e) => {
                        eprintln!("{name}: {e}");
                        e.exit_code()
                    }
                };
                worst = worst.max(code);
            }
            Ok(worst)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
