use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optslide::harness::{
    emit_results, rows_from_csv, rows_from_json, run_experiment, scaling_study, table1_comparison, write_file,
    write_plot_data, Axis, AxisName, ExperimentConfig, Format, ResultRow, RunRecord,
};
use optslide::Error;

/// Gradient-sliding experiments with exact oracle counts.
#[derive(Parser)]
#[command(name = "optslide", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method on every seed and write one row per run.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        format: Option<String>,
    },
    /// Sweep one problem parameter and fit log-log slopes of the counts.
    Scale {
        #[command(flatten)]
        common: Common,
        /// Overrides the config's axis; needs `--values`.
        #[arg(long, requires = "values")]
        axis: Option<String>,
        #[arg(long, value_delimiter = ',', requires = "axis")]
        values: Vec<f64>,
        /// Also write the raw rows here.
        #[arg(long)]
        rows: Option<PathBuf>,
    },
    /// Compare sliding with the FGM baseline by weighted arithmetic cost.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        format: Option<String>,
        /// Write the summary JSON here instead of stdout.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Turn a results file into gnuplot data files and a script.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the seeds listed in the config.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Write wall_time_s as 0 so repeated runs give identical bytes.
    #[arg(long)]
    no_wall_time: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if !self.seed.is_empty() {
            cfg.seeds = self.seed.clone();
        }
        if self.no_wall_time {
            cfg.record_wall_time = false;
        }
        Ok(cfg)
    }

    fn out_path(&self, cfg: &ExperimentConfig) -> Result<PathBuf, Error> {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from))
            .ok_or_else(|| Error::Config {
                field: "output".into(),
                message: "no output path; pass --out or set `output`".into(),
            })
    }
}

fn pick_format(flag: Option<&str>, cfg: &ExperimentConfig) -> Result<Format, Error> {
    match flag {
        Some(f) => Format::parse(f),
        None => Ok(cfg.format.unwrap_or_default()),
    }
}

fn rows(records: &[RunRecord]) -> Vec<ResultRow> {
    records.iter().map(|r| r.row.clone()).collect()
}

fn report_unconverged(records: &[RunRecord]) {
    let bad = records.iter().filter(|r| !r.row.converged).count();
    if bad > 0 {
        eprintln!("note: {bad} of {} runs did not meet their stopping rule", records.len());
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { common, format } => {
            let cfg = common.load()?;
            let format = pick_format(format.as_deref(), &cfg)?;
            let out = common.out_path(&cfg)?;
            let records = run_experiment(&cfg)?;
            report_unconverged(&records);
            emit_results(&rows(&records), format, &out)?;
            eprintln!("wrote {} rows to {}", records.len(), out.display());
        }
        Command::Scale {
            common,
            axis,
            values,
            rows: rows_path,
        } => {
            let mut cfg = common.load()?;
            let out = common.out_path(&cfg)?;
            if let Some(axis) = axis {
                cfg.axis = Some(Axis {
                    name: AxisName::parse(&axis)?,
                    values,
                });
            }
            if cfg.axis.is_none() {
                return Err(Error::Config {
                    field: "axis".into(),
                    message: "no axis; pass --axis and --values or set `axis`".into(),
                });
            }
            cfg.validate()?;
            let (records, summary) = scaling_study(&cfg)?;
            report_unconverged(&records);
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            write_file(&out, text.as_bytes())?;
            if let Some(p) = rows_path {
                emit_results(&rows(&records), Format::Csv, &p)?;
            }
            for m in &summary.methods {
                println!(
                    "{}: grad_gk slope {:.3}, grad_f slope {:.3}",
                    m.method, m.grad_gk_fit.slope, m.grad_f_fit.slope
                );
            }
        }
        Command::Table1 {
            common,
            format,
            summary: summary_path,
        } => {
            let cfg = common.load()?;
            let format = pick_format(format.as_deref(), &cfg)?;
            let out = common.out_path(&cfg)?;
            let (records, summary) = table1_comparison(&cfg)?;
            report_unconverged(&records);
            emit_results(&rows(&records), format, &out)?;
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            match summary_path {
                Some(p) => write_file(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Plot { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let parsed = if is_json(&input) {
                rows_from_json(&text)
            } else {
                rows_from_csv(&text)
            };
            let rows = parsed.map_err(|e| Error::Config {
                field: "input".into(),
                message: e.to_string(),
            })?;
            for f in write_plot_data(&rows, &out)? {
                println!("{}", out.join(f).display());
            }
        }
    }
    Ok(())
}

fn is_json(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "json")
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPTSLIDE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
