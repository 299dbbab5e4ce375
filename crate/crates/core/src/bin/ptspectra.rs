use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ptspectra::linear::{exact_spectrum, rotated_det};
use ptspectra::numerics::ModelParams;
use ptspectra::report::bundle::{Source, SpectrumRecord};
use ptspectra::report::{
    csv, emit_figures, parse_complex, parse_figure_list, render_figure, run, write_outputs, Figure, ResultBundle, RunConfig,
};
use ptspectra::scaling::integrate_branch;
use ptspectra::shooting::{classify, find_spectrum, shoot_residual, EigenvalueRecord};
use ptspectra::stokes::build_graph;
use ptspectra::Error;

#[derive(Parser)]
#[command(name = "ptspectra", version, about = "Spectra of box-truncated -g(ix)^(2n+1) Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a config and write bundle, CSV tables into the output directory.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shooting spectrum as CSV on stdout.
    Spectrum {
        #[arg(short, default_value_t = 1)]
        n: u32,
        #[arg(short, default_value_t = 1.0)]
        g: f64,
        #[arg(short = 'L', default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
    /// Complex scaling branches as CSV on stdout.
    ScalingGraph {
        /// A single `n` or an inclusive range `a..b`.
        #[arg(short, default_value = "0..5")]
        n: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Anti-Stokes graph at a mapped energy, as JSON on stdout.
    Stokes {
        #[arg(short, default_value_t = 1)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        emapped: String,
    },
    /// Roots of the Airy characteristic determinant (n = 0) as CSV on stdout.
    LinearExact {
        #[arg(short, default_value_t = 1.0)]
        g: f64,
        #[arg(short = 'L', default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Render SVG figures from a bundle.
    Figures {
        bundle: PathBuf,
        /// Comma-separated names, or `all`.
        #[arg(long, default_value = "all")]
        which: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigInvalid { .. } | Error::InvalidParams(_) | Error::MissingTaskOutput(_) | Error::WrongModel(_) => 2,
        _ => 3,
    }
}

fn parse_n_range(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::InvalidParams(format!("bad n range `{s}`"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            let bundle = run(&cfg)?;
            for p in write_outputs(&bundle, &dir)? {
                println!("{}", p.display());
            }
            for f in &bundle.failures {
                eprintln!("task {:?} n={} L={:?} failed: {}", f.task, f.n, f.l, f.error);
            }
            if !bundle.failures.is_empty() {
                return Err(Error::IntegrationFailure(format!("{} task(s) failed", bundle.failures.len())));
            }
        }
        Command::Spectrum { n, g, l, hbar, count } => {
            let p = ModelParams::new(n, g, l, hbar)?;
            let recs = find_spectrum(&p, count)?
                .into_iter()
                .map(|record| {
                    let residual = shoot_residual(record.e, &p)?.norm();
                    Ok(SpectrumRecord { params: p, record, residual, source: Source::Shooting })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            print!("{}", csv::spectrum_csv(&recs));
        }
        Command::ScalingGraph { n, tol } => {
            let branches = parse_n_range(&n)?
                .into_iter()
                .map(|n| integrate_branch(n, tol))
                .collect::<Result<Vec<_>, Error>>()?;
            print!("{}", csv::scaling_csv(&branches));
        }
        Command::Stokes { n, emapped } => {
            let graph = build_graph(parse_complex(&emapped)?, n)?;
            let doc = serde_json::json!({ "signature": graph.signature().to_string(), "graph": graph });
            println!("{}", serde_json::to_string_pretty(&doc).expect("graph serializes"));
        }
        Command::LinearExact { g, l, hbar, count } => {
            let p = ModelParams::new(0, g, l, hbar)?;
            let recs = exact_spectrum(&p, count)?
                .into_iter()
                .enumerate()
                .map(|(k, e)| {
                    let record =
                        EigenvalueRecord { j: k + 1, l, e, e_mapped: p.to_mapped(e), regime: classify(e, &p)? };
                    let residual = rotated_det(e, &p)?.norm();
                    Ok(SpectrumRecord { params: p, record, residual, source: Source::AiryDeterminant })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            print!("{}", csv::spectrum_csv(&recs));
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            println!("ok {}", cfg.digest());
        }
        Command::Figures { bundle, which, out } => {
            let b = ResultBundle::from_json(&std::fs::read_to_string(&bundle)?)?;
            let list = parse_figure_list(&which)?;
            // `all` renders what the bundle supports; named figures must all render
            let list: Vec<Figure> = if which.trim() == "all" {
                list.into_iter().filter(|&f| render_figure(&b, f).is_ok()).collect()
            } else {
                list
            };
            for p in emit_figures(&b, &list, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = ptspectra::report::bundle::thread_cap() {
        // a second init only fails if a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
