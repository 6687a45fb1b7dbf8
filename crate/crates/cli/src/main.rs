mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use fdsi::{
    gamma_mimo, histogram, moments, run_si, run_sinr, ExperimentConfig, Histogram, McReport, Mode,
};
use thiserror::Error;

use crate::args::{Cli, Command, DirectionArg, ModeArg, RunManifest};
use crate::output::{write_all, Field, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fdsi::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(fdsi::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}

const SUMMARY_COLUMNS: &[&str] = &[
    "M", "N", "K", "mu", "nu", "trials", "seed", "emp_m1", "emp_m2", "emp_var", "cf_m1", "cf_m2", "cf_var",
    "kappa", "theta", "ks",
];
const MOMENT_COLUMNS: &[&str] = &["M", "N", "K", "mu", "nu", "m1", "m2", "var", "kappa", "theta"];
const SAMPLE_COLUMNS: &[&str] = &["si_gain"];
const HISTOGRAM_COLUMNS: &[&str] = &["bin_left", "count"];
const SINR_COLUMNS: &[&str] = &["trial", "k", "useful", "mui", "ici", "cmi", "si", "noise", "sinr"];

fn geometry_fields(cfg: &ExperimentConfig) -> Vec<Field> {
    vec![
        Field::Int(cfg.geom.tx_antennas as u64),
        Field::Int(cfg.geom.rx_antennas as u64),
        Field::Int(cfg.geom.streams as u64),
        Field::Float(cfg.si_spec.mu()),
        Field::Float(cfg.si_spec.nu()),
    ]
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Empirical => "empirical",
        Mode::Theoretical => "theoretical",
    }
}

fn summary_table(report: &McReport) -> Result<Table, CliError> {
    let cfg = &report.config_echo;
    let cf = moments(cfg.geom, cfg.si_spec)?;
    let mut table = Table::new(SUMMARY_COLUMNS);
    let mut row = geometry_fields(cfg);
    row.extend([
        Field::Int(cfg.trials),
        Field::Int(cfg.seed),
        Field::Float(report.emp_m1),
        Field::Float(report.emp_m2),
        Field::Float(report.emp_var),
        Field::Float(cf.m1),
        Field::Float(cf.m2),
        Field::Float(cf.var),
        Field::Float(report.reference.kappa),
        Field::Float(report.reference.theta),
        Field::Float(report.gof.ks_statistic),
    ]);
    table.push(row);
    Ok(table)
}

fn histogram_table(h: &Histogram) -> Table {
    let mut table = Table::new(HISTOGRAM_COLUMNS);
    for (edge, &count) in h.bin_edges.iter().zip(&h.counts) {
        table.push(vec![Field::Float(*edge), Field::Int(count)]);
    }
    table
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(job)),
        None => Ok(job()),
    }
}

fn cmd_si_experiment(manifest: &RunManifest) -> Result<(), CliError> {
    let reports = in_pool(manifest.threads, || {
        manifest
            .modes
            .iter()
            .map(|&mode| run_si(&ExperimentConfig { mode, ..manifest.config }))
            .collect::<Result<Vec<_>, _>>()
    })??;

    // Paired runs share bin edges so the two histograms overlay directly.
    let upper = reports
        .iter()
        .flat_map(|r| r.samples.iter().copied())
        .fold(0.0f64, f64::max);

    let ext = manifest.format.extension();
    let mut files = Vec::new();
    for report in &reports {
        let name = mode_name(report.config_echo.mode);
        let summary = summary_table(report)?.render(manifest.format);
        print!("{}", summary);
        files.push((format!("{name}_summary.{ext}"), summary));
        match manifest.bins {
            Some(bins) => {
                let h = if upper > 0.0 {
                    Histogram::with_upper(&report.samples, bins, upper)?
                } else {
                    histogram(&report.samples, bins)?
                };
                files.push((format!("{name}_hist.{ext}"), histogram_table(&h).render(manifest.format)));
            }
            None => {
                let mut table = Table::new(SAMPLE_COLUMNS);
                for &x in &report.samples {
                    table.push(vec![Field::Float(x)]);
                }
                files.push((format!("{name}_samples.{ext}"), table.render(manifest.format)));
            }
        }
        if report.singular_redraws > 0 {
            eprintln!("{name}: {} singular channel draws were redrawn", report.singular_redraws);
        }
    }
    write_all(&manifest.output_dir, &files)?;
    Ok(())
}

fn cmd_moments(manifest: &RunManifest) -> Result<(), CliError> {
    let cfg = &manifest.config;
    let set = moments(cfg.geom, cfg.si_spec)?;
    let fit = gamma_mimo(cfg.geom, cfg.si_spec)?;
    let mut table = Table::new(MOMENT_COLUMNS);
    let mut row = geometry_fields(cfg);
    row.extend([
        Field::Float(set.m1),
        Field::Float(set.m2),
        Field::Float(set.var),
        Field::Float(fit.kappa),
        Field::Float(fit.theta),
    ]);
    table.push(row);
    print!("{}", table.render(manifest.format));
    Ok(())
}

fn cmd_sinr(manifest: &RunManifest) -> Result<(), CliError> {
    let report = in_pool(manifest.threads, || run_sinr(&manifest.config))??;
    let k = manifest.config.geom.streams;
    let mut table = Table::new(SINR_COLUMNS);
    for (i, s) in report.samples.iter().enumerate() {
        table.push(vec![
            Field::Int((i / k) as u64),
            Field::Int((i % k) as u64),
            Field::Float(s.useful),
            Field::Float(s.mui),
            Field::Float(s.ici),
            Field::Float(s.cmi),
            Field::Float(s.si),
            Field::Float(s.noise),
            Field::Float(s.sinr),
        ]);
    }
    let direction = match manifest.config.direction {
        fdsi::Direction::Downlink => "downlink",
        fdsi::Direction::Uplink => "uplink",
    };
    let name = format!("{direction}_sinr.{}", manifest.format.extension());
    let written = write_all(&manifest.output_dir, &[(name, table.render(manifest.format))])?;
    if report.singular_redraws > 0 {
        eprintln!("{} singular channel draws were redrawn", report.singular_redraws);
    }
    eprintln!("wrote {}", written[0].display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Si(args) => cmd_si_experiment(&args.resolve(ModeArg::Both, DirectionArg::Uplink)?),
        Command::Moments(args) => cmd_moments(&args.resolve(ModeArg::Empirical, DirectionArg::Uplink)?),
        Command::Sinr(args) => cmd_sinr(&args.resolve(ModeArg::Empirical, DirectionArg::Downlink)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
