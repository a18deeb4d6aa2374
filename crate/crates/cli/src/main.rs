use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cloaqc::harness::{
    compare, ensemble_summary, generate_instances, load_record, noise_sweep, prepare, run_prepared,
    runtime_sweep, write_rows_csv, write_run, BaselineSpec, ExperimentConfig, HarnessError,
    RunRecord, RuntimeUnit,
};
use cloaqc::qsim::RampKind;

#[derive(Parser)]
#[command(
    name = "cloaqc",
    version,
    about = "Closed-loop schedule optimization for simulated adiabatic annealers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for realizations.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write USA MAX 2-SAT instances and print their clause densities.
    GenerateInstances {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the runtime and linear-schedule baseline a config resolves to.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the optimization ensemble and write its record.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative differences of a record against a baseline schedule.
    Compare {
        /// Run directory or record.json.
        #[arg(long)]
        record: PathBuf,
        /// `linear`, `local-adiabatic`, `table:<csv>` or `record:<dir>`.
        #[arg(long, default_value = "linear")]
        baseline: String,
        /// CSV destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize under control noise of each kind and strength.
    NoiseSweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "sine")]
        kinds: Vec<Kind>,
        #[arg(long, value_delimiter = ',', required = true)]
        strengths: Vec<f64>,
        /// Fixes the noise directions across the sweep.
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear and optimized ground-state probability across runtimes.
    RuntimeSweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value = "gap")]
        unit: Unit,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize one or more records; several records also get ensemble medians.
    Report {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Linear,
    Sine,
    FastSine,
}

impl From<Kind> for RampKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Linear => RampKind::Linear,
            Kind::Sine => RampKind::Sine,
            Kind::FastSine => RampKind::FastSine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    /// Multiples of 1/Δ_min of the linear schedule.
    Gap,
    Absolute,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", String::from_utf8_lossy(bytes)),
    }
    Ok(())
}

fn print_record(record: &RunRecord, label: &str) {
    let r = &record.report;
    println!(
        "{label}: T = {:.4}  D_lin = {:.4}  D = {:.4}  alpha_D = {:.4}  alpha_Delta = {:.4}  P_lin = {:.4}  P_median = {:.4}  ({} realizations){}",
        record.total_time,
        r.d_lin,
        r.d_cloaqc,
        r.alpha_d,
        r.alpha_delta,
        r.p_lin,
        r.p_median,
        record.realizations.len(),
        if record.ground_unsampled { "  [ground state never sampled by the pilot]" } else { "" }
    );
}

fn parse_baseline(spec: &str) -> Result<BaselineSpec> {
    Ok(match spec {
        "linear" => BaselineSpec::Linear,
        "local-adiabatic" => BaselineSpec::LocalAdiabatic,
        other => match other.split_once(':') {
            Some(("table", path)) => BaselineSpec::Table(PathBuf::from(path)),
            Some(("record", path)) => BaselineSpec::Record(Box::new(load_record(Path::new(path))?)),
            _ => {
                return Err(HarnessError::Config(cloaqc::harness::ConfigIssue {
                    line: None,
                    message: format!("unknown baseline '{other}'"),
                })
                .into())
            }
        },
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateInstances {
            n,
            count,
            seed,
            out,
        } => {
            let (generated, summary) = generate_instances(n, count, seed, &out)?;
            for g in &generated {
                println!(
                    "{}  clauses = {}",
                    g.path.display(),
                    g.instance.clause_count()
                );
            }
            println!("{summary}");
        }
        Command::Calibrate { run } => {
            let cfg = run.load()?;
            let p = prepare(&cfg)?;
            match &p.calibration {
                Some(c) => println!(
                    "T = {:.6}  (T·Δ_min = {:.4}, Δ_min = {:.6}), P_E0 = {:.4}, certified steps = {}",
                    c.total_time,
                    c.in_gap_units(),
                    c.delta_min,
                    c.probability,
                    c.steps
                ),
                None => println!("T = {:.6} (fixed by the config)", p.total_time),
            }
            println!(
                "linear schedule: D = {:.6}  P_E0 = {:.6}  Δ_min = {:.6}  optimizer steps = {}",
                p.baseline.adiabatic_error,
                p.baseline.probability,
                p.baseline.delta_min,
                p.optimizer_evolution.steps
            );
        }
        Command::Optimize { run, out } => {
            let cfg = run.load()?;
            let Some(dir) = out.or_else(|| cfg.output.clone()) else {
                bail!(HarnessError::Config(cloaqc::harness::ConfigIssue {
                    line: None,
                    message: "no output directory: pass --out or set `output` in the config".into(),
                }));
            };
            let prepared = prepare(&cfg)?;
            eprintln!(
                "T = {:.4}, linear D = {:.4}, {} realizations on {} thread(s)",
                prepared.total_time,
                prepared.baseline.adiabatic_error,
                cfg.realizations,
                run.jobs.max(1)
            );
            let record = run_prepared(&prepared, run.jobs, &|r| {
                eprintln!(
                    "realization {:>3}: D = {:.5}  P_E0 = {:.4}",
                    r.index, r.adiabatic_error, r.probability
                )
            })?;
            write_run(&prepared, &record, &dir)?;
            print_record(&record, &dir.display().to_string());
        }
        Command::Compare {
            record,
            baseline,
            out,
        } => {
            let rec = load_record(&record)?;
            let baseline = parse_baseline(&baseline)?;
            let prepared = prepare(&rec.config)?;
            let table = compare(&rec, &prepared, &baseline)?;
            let mut csv = Vec::new();
            table.write_csv(&mut csv)?;
            emit(out.as_deref(), &csv)?;
        }
        Command::NoiseSweep {
            run,
            kinds,
            strengths,
            noise_seed,
            out,
        } => {
            let cfg = run.load()?;
            let kinds: Vec<RampKind> = kinds.into_iter().map(Into::into).collect();
            let rows =
                noise_sweep(&cfg, &kinds, &strengths, noise_seed, run.jobs, |r| {
                    eprintln!(
                    "{:?} C = {}: D_cloaqc = {:.4}  D_linear = {:.4}  D_local_adiabatic = {:.4}{}",
                    r.kind,
                    r.strength,
                    r.d_cloaqc,
                    r.d_linear,
                    r.d_local_adiabatic,
                    if r.ground_unsampled { "  [ground state never sampled]" } else { "" }
                )
                })?;
            let mut csv = Vec::new();
            write_rows_csv(&rows, &mut csv)?;
            emit(out.as_deref(), &csv)?;
        }
        Command::RuntimeSweep {
            run,
            times,
            unit,
            out,
        } => {
            let cfg = run.load()?;
            let unit = match unit {
                Unit::Gap => RuntimeUnit::Gap,
                Unit::Absolute => RuntimeUnit::Absolute,
            };
            let rows = runtime_sweep(&cfg, &times, unit, run.jobs, |r| {
                eprintln!(
                    "T = {:.4} (T·Δ = {:.3}): P_lin = {:.4}  P_median = {:.4}",
                    r.total_time, r.t_delta, r.p_linear, r.p_median
                )
            })?;
            let mut csv = Vec::new();
            write_rows_csv(&rows, &mut csv)?;
            emit(out.as_deref(), &csv)?;
        }
        Command::Report { records, out } => {
            let loaded = records
                .iter()
                .map(|p| load_record(p))
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = csv::Writer::from_writer(Vec::new());
            csv.write_record([
                "record",
                "T",
                "D_lin",
                "D_cloaqc",
                "alpha_d",
                "alpha_delta",
                "P_E0_lin",
                "P_E0_median",
            ])?;
            for (path, rec) in records.iter().zip(&loaded) {
                print_record(rec, &path.display().to_string());
                let r = &rec.report;
                csv.write_record(
                    std::iter::once(path.display().to_string()).chain(
                        [
                            rec.total_time,
                            r.d_lin,
                            r.d_cloaqc,
                            r.alpha_d,
                            r.alpha_delta,
                            r.p_lin,
                            r.p_median,
                        ]
                        .iter()
                        .map(f64::to_string),
                    ),
                )?;
            }
            if loaded.len() > 1 {
                let s = ensemble_summary(&loaded).expect("non-empty");
                println!(
                    "ensemble of {}: median alpha_D = {:.4} (IQR {:.4}..{:.4}), median alpha_Delta = {:.4} (IQR {:.4}..{:.4})",
                    s.runs, s.alpha_d, s.alpha_d_iqr.0, s.alpha_d_iqr.1, s.alpha_delta, s.alpha_delta_iqr.0, s.alpha_delta_iqr.1
                );
            }
            if let Some(path) = out {
                emit(Some(&path), &csv.into_inner().context("flushing CSV")?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e
                .downcast_ref::<HarnessError>()
                .is_some_and(HarnessError::is_config);
            ExitCode::from(if config { 1 } else { 2 })
        }
    }
}
