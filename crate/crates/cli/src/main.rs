//! `risim` command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use risim::array::write_pattern_csv;
use risim::engine::{
    self, csv_string, export_results, fractional_boi, load_scenario, manifest, pattern_study, preset, preset_names, preset_text, run_case, CaseMetrics,
    ExportFormat, ResultRow, Scenario,
};
use risim::format::sig9;
use risim::Error;

#[derive(Parser)]
#[command(name = "risim", version, about = "Multi-band RIS interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Output {
    /// Write results here (plus `<stem>.manifest.json`) instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Output format; defaults to the extension of `--out`, else CSV.
    #[arg(long)]
    format: Option<Format>,
    /// Include per-UE metrics in JSON output.
    #[arg(long)]
    per_ue: bool,
}

#[derive(clap::Args)]
struct Overrides {
    /// Override the number of Monte-Carlo realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario with and without the surface.
    Run {
        /// Config file, or `preset:<name>`.
        config: String,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep surface size and position as listed in the config's `sweep` section.
    Sweep {
        config: String,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: Output,
    },
    /// Reflection patterns of the tuned surface as `angle_deg,power_db` CSV.
    Pattern {
        config: String,
        /// Print only this frequency's curve (Hz); defaults to the first configured one.
        #[arg(long)]
        frequency: Option<f64>,
        /// Write every curve and a JSON report into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fractional bandwidth of influence of a band.
    Boi {
        f_low: f64,
        f_high: f64,
        f_center: Option<f64>,
    },
    /// Inspect the built-in scenarios.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print a preset's JSON config.
    Dump { name: String },
    /// List preset names.
    List,
}

fn load(config: &str, overrides: Option<&Overrides>) -> Result<Scenario, Error> {
    let mut s = match config.strip_prefix("preset:") {
        Some(name) => preset(name)?,
        None => {
            let text = fs::read_to_string(config).map_err(|e| Error::Config {
                field: config.to_string(),
                message: format!("cannot read config: {e}"),
            })?;
            load_scenario(&text)?
        }
    };
    if let Some(o) = overrides {
        if let Some(r) = o.realizations {
            s.config.realizations = r;
        }
        if let Some(seed) = o.seed {
            s.config.seed = seed;
        }
        s = Scenario::new(s.config)?;
    }
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    Ok(s)
}

fn emit(s: &Scenario, table: &[CaseMetrics], output: &Output) -> Result<(), Error> {
    let rows: Vec<ResultRow> = table.iter().map(|m| ResultRow::from_metrics(m, output.per_ue)).collect();
    let format = match (output.format, &output.out) {
        (Some(Format::Csv), _) => ExportFormat::Csv,
        (Some(Format::Json), _) => ExportFormat::Json,
        (None, Some(p)) => ExportFormat::from_path(p),
        (None, None) => ExportFormat::Csv,
    };
    match &output.out {
        Some(path) => {
            let m = export_results(&rows, format, path, &manifest(s, rows.len()))?;
            eprintln!("wrote {} and {}", path.display(), m.display());
        }
        None => {
            let text = match format {
                ExportFormat::Csv => csv_string(&rows)?,
                ExportFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn summarize(m: &CaseMetrics) {
    eprintln!(
        "N={} at ({}, {}, {}): target SE {} -> {} b/s/Hz, non-target SE {} -> {} b/s/Hz, degradation {}",
        m.n_elements,
        sig9(m.ris_position[0]),
        sig9(m.ris_position[1]),
        sig9(m.ris_position[2]),
        sig9(m.sumse_target_noris.mean),
        sig9(m.sumse_target_ris.mean),
        sig9(m.sumse_nontarget_noris.mean),
        sig9(m.sumse_nontarget_ris.mean),
        sig9(m.degradation_ratio)
    );
    if let Some(t) = &m.tuning {
        if t.correlated {
            let pair = t.correlated_pair.as_ref().map(|[a, b]| format!(" (most correlated: {a}, {b})")).unwrap_or_default();
            eprintln!(
                "diagnostic: correlated channels{pair}: owner condition number {} and surface-path condition number {} vs threshold {}",
                sig9(t.owner_condition.mean),
                sig9(t.ris_path_condition.mean),
                sig9(t.correlation_threshold)
            );
        }
    }
}

fn pattern(config: &str, frequency: Option<f64>, out_dir: Option<&Path>) -> Result<(), Error> {
    let s = load(config, None)?;
    let report = pattern_study(&s)?;
    for c in &report.curves {
        eprintln!("f = {} Hz: main lobe at {} deg", sig9(c.frequency), sig9(c.main_lobe_deg));
    }
    if let Some(sr) = &report.sensitivity {
        eprintln!(
            "expected lobe {} deg at {} Hz missed; sensitivity sweep over {} circuit variants",
            sig9(sr.expected.angle_deg),
            sig9(sr.expected.frequency),
            sr.entries.len()
        );
        if let Some(b) = &sr.best {
            eprintln!(
                "closest: l_top = {} H, C in [{}, {}] F -> {} deg (tuned lobe {} deg){}",
                sig9(b.l_top),
                sig9(b.c_min),
                sig9(b.c_max),
                sig9(b.lobe_deg),
                sig9(b.tuned_lobe_deg),
                if sr.reproduced { "" } else { "; no variant within 5 deg" }
            );
        }
    }
    let io = |p: &Path, e| Error::Io {
        context: format!("writing {}", p.display()),
        source: e,
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for c in &report.curves {
            let path = dir.join(format!("pattern_{}.csv", sig9(c.frequency)));
            let file = fs::File::create(&path).map_err(|e| io(&path, e))?;
            write_pattern_csv(std::io::BufWriter::new(file), &c.samples).map_err(|e| io(&path, e))?;
        }
        let path = dir.join("pattern_report.json");
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        eprintln!("wrote {} curves to {}", report.curves.len(), dir.display());
        return Ok(());
    }
    let curve = match frequency {
        Some(f) => report
            .curves
            .iter()
            .find(|c| c.frequency == f)
            .ok_or_else(|| Error::Config {
                field: "--frequency".into(),
                message: format!("{f} Hz is not among the configured pattern frequencies"),
            })?,
        None => &report.curves[0],
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_pattern_csv(&mut lock, &curve.samples).and_then(|_| lock.flush()).map_err(|e| io(Path::new("stdout"), e))
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, overrides, output } => {
            let s = load(&config, Some(&overrides))?;
            let m = run_case(&s)?;
            summarize(&m);
            emit(&s, &[m], &output)
        }
        Command::Sweep { config, overrides, mut output } => {
            let s = load(&config, Some(&overrides))?;
            let spec = s.config.sweep.clone().ok_or_else(|| Error::Config {
                field: "sweep".into(),
                message: "config has no sweep section".into(),
            })?;
            output.per_ue |= spec.per_ue;
            let table = engine::sweep(&s, &spec)?;
            for m in &table {
                summarize(m);
            }
            emit(&s, &table, &output)
        }
        Command::Pattern { config, frequency, out_dir } => pattern(&config, frequency, out_dir.as_deref()),
        Command::Boi { f_low, f_high, f_center } => {
            let r = fractional_boi(f_low, f_high, f_center)?;
            println!("fractional_boi={} percent={}", sig9(r), sig9(r * 100.0));
            Ok(())
        }
        Command::Preset { action } => {
            match action {
                PresetAction::Dump { name } => print!("{}", preset_text(&name)?),
                PresetAction::List => {
                    for n in preset_names() {
                        println!("{n}");
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
