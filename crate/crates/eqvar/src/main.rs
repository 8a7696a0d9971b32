use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use eqvar::harness::{run_experiment, ExperimentSpec, GammaMode};
use eqvar::io::{write_json, LearnResultJson};
use eqvar::{emit_plot, fit_from_file, FitOptions};
use eqvar_core::bounds::{
    count_dags_construction_lower, count_dags_exact, fano_threshold_dag, fano_threshold_ug, one_edge_kl_table,
    BoundsQuery,
};
use eqvar_core::oracle::validation_suite;

#[derive(Parser)]
#[command(name = "eqvar", version, about = "Structure learning for equal-variance linear Gaussian DAGs")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulation sweep estimating the probability of exact recovery
    Run {
        #[arg(long, value_delimiter = ',', default_value = "20")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        q: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "80,160,240,320,400,480,560")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        #[arg(long, default_value_t = 0.5)]
        beta_low: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_high: f64,
        /// A positive number, `auto`, or `pop` (half the true variance gap)
        #[arg(long, default_value = "auto")]
        gamma: GammaMode,
        #[arg(long, default_value_t = 1.0)]
        tuning_constant: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        center: bool,
        /// Results CSV; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG of recovery rate against n; the CSV is also written next to it
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long, env = "THREADS")]
        threads: Option<usize>,
        /// Leave mean_ms empty so output is byte-identical across runs
        #[arg(long)]
        no_timing: bool,
    },
    /// Learn a DAG from a CSV of observations (one column per variable)
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value = "auto")]
        gamma: GammaMode,
        #[arg(long, default_value_t = 1.0)]
        tuning_constant: f64,
        #[arg(long)]
        center: bool,
        /// Result JSON; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample-size lower bounds and the one-edge KL table
    Bounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        beta_min: f64,
        #[arg(long = "M")]
        m: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Number of labeled DAGs on d nodes with in-degree at most q
    CountDags {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
    },
    /// Compare primary routines with reference implementations
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.cmd {
        Command::Run {
            d,
            q,
            n,
            reps,
            sigma,
            beta_low,
            beta_high,
            gamma,
            tuning_constant,
            seed,
            center,
            out: out_path,
            plot,
            threads,
            no_timing,
        } => {
            let spec = ExperimentSpec {
                d_grid: d,
                q_grid: q,
                n_grid: n,
                reps,
                sigma,
                beta_low,
                beta_high,
                gamma_mode: gamma,
                tuning_constant,
                seed,
                center,
                threads,
                record_timing: !no_timing,
            };
            let result = run_experiment(&spec)?;
            for f in &result.failures {
                eprintln!("warning: d={} q={} n={} rep={}: {}", f.d, f.q, f.n, f.rep, f.reason);
            }
            match out_path {
                Some(p) => result.write_csv_file(&p).with_context(|| format!("writing {}", p.display()))?,
                None => result.write_csv(&mut out)?,
            }
            if let Some(p) = plot {
                emit_plot(&result, &p)?;
            }
        }
        Command::Fit { data, q, gamma, tuning_constant, center, out: out_path } => {
            let fitted = fit_from_file(&data, &FitOptions { q, gamma, tuning_constant, center })
                .with_context(|| format!("fitting {}", data.display()))?;
            for w in &fitted.warnings {
                eprintln!("warning: {w}");
            }
            let json = LearnResultJson::from(&fitted.result);
            match out_path {
                Some(p) => write_json(&p, &json)?,
                None => writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?,
            }
        }
        Command::Bounds { d, q, beta_min, m, delta } => {
            let bq = BoundsQuery { d, q, beta_min, m, delta };
            writeln!(out, "dag_threshold,{}", fano_threshold_dag(&bq)?)?;
            writeln!(out, "ug_threshold,{}", fano_threshold_ug(&bq)?)?;
            writeln!(out)?;
            writeln!(out, "case,paper_value,oracle_value,abs_diff,matches")?;
            let table = one_edge_kl_table(beta_min, 1.0)?;
            for row in &table {
                writeln!(
                    out,
                    "{},{:.12e},{:.12e},{:.3e},{}",
                    row.case, row.paper_value, row.oracle_value, row.abs_diff, row.matches
                )?;
            }
            for row in table.iter().filter(|r| !r.matches) {
                eprintln!(
                    "warning: {} case: published expression gives {:.6}, exact divergence is {:.6}",
                    row.case, row.paper_value, row.oracle_value
                );
            }
        }
        Command::CountDags { d, q } => {
            if d == 0 {
                bail!("d must be at least 1");
            }
            let exact = count_dags_exact(d, q)?;
            // The layered construction needs q + 1 <= d; leave the column empty otherwise.
            let lower = count_dags_construction_lower(d, q).map(|l| format!("{l:.6}")).unwrap_or_default();
            writeln!(out, "d,q,count,log_count,construction_lower_log")?;
            writeln!(out, "{d},{q},{exact},{:.6},{lower}", (exact as f64).ln())?;
        }
        Command::Validate { seed } => {
            let reports = validation_suite(seed)?;
            writeln!(out, "instance,primary,oracle,abs_diff,tolerance,pass")?;
            for r in &reports {
                writeln!(
                    out,
                    "{},{:.15e},{:.15e},{:.3e},{:.3e},{}",
                    r.instance, r.primary, r.oracle, r.abs_diff, r.tolerance, r.pass
                )?;
            }
            if reports.iter().any(|r| !r.pass) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
