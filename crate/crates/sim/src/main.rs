//! Command-line driver: one-shot solves, oracle cross-checks, user pairing,
//! and the Monte Carlo outage experiment.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use comp_noma::channel::{self, ScenarioConfig};
use comp_noma::dpc::{self, DpcCase};
use comp_noma::oracle;
use comp_noma::pairing::{self, SchemePolicy};
use comp_noma::rate::GroupChannels;
use comp_noma::schemes::{self, Scheme};
use comp_noma_sim::formats::{self, OutputFormat};
use comp_noma_sim::montecarlo::{self, McOptions, SchemeId, ALL_SCHEMES};
use serde::Serialize;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "comp-noma-sim",
    version,
    about = "Two-cell CoMP-NOMA downlink power minimization and outage simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance from a channel dump and report the minimum-power
    /// solution, the quasi-degradation verdict, and the hybrid decision.
    Solve {
        /// Channel dump (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Write the report as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force grid search on the same channel dump.
    Oracle {
        /// Channel dump (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Deflation grid step.
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        /// Write the report as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo outage comparison across pairing schemes.
    Montecarlo {
        /// Scenario config (JSON); built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Override the config's group count K.
        #[arg(long)]
        k: Option<usize>,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of qdup,hcn-ran,hcn-corr,zfbf-ran.
        #[arg(long)]
        schemes: Option<String>,
        /// Orthogonality threshold for the greedy pairing.
        #[arg(long, default_value_t = 0.01)]
        orth_threshold: f64,
        /// Write the results table to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Results format: csv or json.
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Sample one population and print the greedy pairing.
    Pair {
        /// Scenario config (JSON); built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.01)]
        orth_threshold: f64,
        /// Write the assignment as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveReport {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stronger_station: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p20: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quasi_degraded: Option<bool>,
    hybrid: HybridReport,
}

#[derive(Serialize)]
struct HybridReport {
    scheme: &'static str,
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_power: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p20: Option<f64>,
}

#[derive(Serialize)]
struct PairReport {
    k: usize,
    seed: u64,
    p_max: f64,
    pi1: Vec<usize>,
    pi2: Vec<usize>,
    s: Vec<u8>,
    groups: Vec<PairGroupReport>,
}

#[derive(Serialize)]
struct PairGroupReport {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_power: Option<f64>,
}

fn case_name(case: DpcCase) -> &'static str {
    match case {
        DpcCase::StrongerOnly => "stronger-only",
        DpcCase::Joint => "joint",
        DpcCase::WeakerOnly => "weaker-only",
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::CompNoma => "comp-noma",
        Scheme::Zfbf => "zfbf",
    }
}

fn load_scenario(path: &Option<PathBuf>, k: Option<usize>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        Some(p) => formats::read_scenario(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(k) = k {
        cfg.group_count = k;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_solve(config: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let dump = formats::read_dump(&config)?;
    let (h10, h20, h11, h22) = dump.channels();
    let ch = GroupChannels {
        h10: &h10,
        h20: &h20,
        h11: &h11,
        h22: &h22,
    };
    let targets = dump.targets();
    let solution = dpc::solve_dpc(ch, &targets, dump.sigma2, dump.p_max).map_err(|e| anyhow!("{e}"))?;
    let hybrid = schemes::h_comp_noma(ch, &targets, dump.sigma2, dump.p_max).map_err(|e| anyhow!("{e}"))?;

    let report = match &solution {
        Some(sol) => {
            let verify = oracle::verify_solution(&sol.beams, ch, &targets, dump.sigma2, dump.p_max);
            let qd = schemes::qd_check(sol, ch, &targets, dump.sigma2);
            SolveReport {
                feasible: true,
                case: Some(case_name(sol.case)),
                stronger_station: Some(if sol.swapped { 1 } else { 2 }),
                p10: Some(sol.p10),
                p20: Some(sol.p20),
                x: Some(sol.x),
                y: Some(sol.y),
                total_power: Some(sol.total_power),
                worst_residual: Some(verify.residuals.worst_dpc()),
                quasi_degraded: Some(qd),
                hybrid: HybridReport {
                    scheme: scheme_name(hybrid.scheme),
                    feasible: hybrid.feasible,
                    total_power: hybrid.total_power,
                },
            }
        }
        None => SolveReport {
            feasible: false,
            case: None,
            stronger_station: None,
            p10: None,
            p20: None,
            x: None,
            y: None,
            total_power: None,
            worst_residual: None,
            quasi_degraded: None,
            hybrid: HybridReport {
                scheme: scheme_name(hybrid.scheme),
                feasible: hybrid.feasible,
                total_power: hybrid.total_power,
            },
        },
    };

    match &report {
        r if r.feasible => {
            println!(
                "solution: case={} total_power={:.6e} W (p10={:.6e}, p20={:.6e}, x={:.6}, y={:.6})",
                r.case.unwrap(),
                r.total_power.unwrap(),
                r.p10.unwrap(),
                r.p20.unwrap(),
                r.x.unwrap(),
                r.y.unwrap()
            );
            println!("worst constraint residual: {:.3e}", r.worst_residual.unwrap());
            println!("quasi-degraded: {}", r.quasi_degraded.unwrap());
        }
        _ => println!("solution: infeasible under the given budget"),
    }
    match report.hybrid.total_power {
        Some(p) => println!(
            "hybrid decision: {} (total_power={:.6e} W)",
            report.hybrid.scheme, p
        ),
        None => println!("hybrid decision: infeasible"),
    }
    if let Some(path) = out {
        write_json(&path, &report)?;
    }
    Ok(())
}

fn cmd_oracle(config: PathBuf, grid_step: f64, out: Option<PathBuf>) -> Result<()> {
    anyhow::ensure!(grid_step > 0.0, "grid step must be positive");
    let dump = formats::read_dump(&config)?;
    let (h10, h20, h11, h22) = dump.channels();
    let ch = GroupChannels {
        h10: &h10,
        h20: &h20,
        h11: &h11,
        h22: &h22,
    };
    let best = oracle::grid_oracle_dpc(ch, &dump.targets(), dump.sigma2, dump.p_max, grid_step);
    let report = match best {
        Some(g) => {
            println!(
                "oracle: total_power={:.6e} W at x={:.6}, y={:.6} (p10={:.6e}, p20={:.6e})",
                g.total_power, g.x, g.y, g.p10, g.p20
            );
            OracleReport {
                feasible: true,
                total_power: Some(g.total_power),
                x: Some(g.x),
                y: Some(g.y),
                p10: Some(g.p10),
                p20: Some(g.p20),
            }
        }
        None => {
            println!("oracle: no feasible grid point");
            OracleReport {
                feasible: false,
                total_power: None,
                x: None,
                y: None,
                p10: None,
                p20: None,
            }
        }
    };
    if let Some(path) = out {
        write_json(&path, &report)?;
    }
    Ok(())
}

fn cmd_montecarlo(
    config: Option<PathBuf>,
    trials: u64,
    k: Option<usize>,
    seed: Option<u64>,
    schemes_arg: Option<String>,
    orth_threshold: f64,
    out: Option<PathBuf>,
    format: OutputFormat,
) -> Result<()> {
    let cfg = load_scenario(&config, k, seed)?;
    let schemes = match schemes_arg {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<SchemeId>())
            .collect::<Result<Vec<_>>>()?,
        None => ALL_SCHEMES.to_vec(),
    };
    let opts = McOptions {
        trials,
        schemes,
        orth_threshold,
    };
    let stats = montecarlo::run_montecarlo(&cfg, &opts)?;
    println!(
        "scenario: D={} R0={} R1={} R2={} alpha={} N={} sigma2={:e} p_max={} rates={:?} K={} seed={}",
        cfg.bs_separation_half,
        cfg.coverage_radius,
        cfg.noma_radius_1,
        cfg.noma_radius_2,
        cfg.path_loss_exp,
        cfg.antennas,
        cfg.noise_power,
        cfg.p_max,
        cfg.target_rates,
        cfg.group_count,
        cfg.seed
    );
    println!(
        "{:>9}  {:>3}  {:>10}  {:>8}  {:>12}  {:>10}  {:>13}",
        "scheme", "K", "p_max", "trials", "outage_prob", "ci95", "mean_power_w"
    );
    for s in &stats {
        println!(
            "{:>9}  {:>3}  {:>10.4e}  {:>8}  {:>12.6}  {:>10.6}  {:>13.6e}",
            s.scheme.to_string(),
            s.k,
            s.p_max,
            s.trials,
            s.group_outage_prob,
            s.confidence_halfwidth_95,
            s.mean_total_power
        );
    }
    if let Some(path) = out {
        let records: Vec<_> = stats.iter().map(|s| s.to_record()).collect();
        formats::write_records(&path, &records, format)?;
    }
    Ok(())
}

fn cmd_pair(
    config: Option<PathBuf>,
    k: Option<usize>,
    seed: Option<u64>,
    orth_threshold: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_scenario(&config, k, seed)?;
    let k = cfg.group_count;
    let targets = cfg.targets();
    let mut rng = channel::trial_rng(cfg.seed, 0);
    let pop = channel::sample_population(&cfg, k, &mut rng).map_err(|e| anyhow!("{e}"))?;
    let assignment = pairing::qdup(&pop, &targets, cfg.noise_power, cfg.p_max, orth_threshold)
        .map_err(|e| anyhow!("{e}"))?;
    let results = pairing::evaluate_assignment(
        &pop,
        &assignment,
        &targets,
        cfg.noise_power,
        cfg.p_max,
        SchemePolicy::AsFlagged,
    )
    .map_err(|e| anyhow!("{e}"))?;

    println!("pairing for K={k} (0-based near-user indices):");
    for g in 0..k {
        let r = &results[g];
        println!(
            "  group {g}: pi1={} pi2={} s={} -> {}",
            assignment.pi1[g],
            assignment.pi2[g],
            u8::from(assignment.s[g]),
            match (r.feasible, r.total_power) {
                (true, Some(p)) => format!("{} ({:.6e} W)", scheme_name(r.scheme.unwrap()), p),
                _ => "outage".to_string(),
            }
        );
    }
    if let Some(path) = out {
        let report = PairReport {
            k,
            seed: cfg.seed,
            p_max: cfg.p_max,
            pi1: assignment.pi1.clone(),
            pi2: assignment.pi2.clone(),
            s: assignment.s.iter().map(|&b| u8::from(b)).collect(),
            groups: results
                .iter()
                .map(|r| PairGroupReport {
                    feasible: r.feasible,
                    scheme: r.scheme.map(scheme_name),
                    total_power: r.total_power,
                })
                .collect(),
        };
        write_json(&path, &report)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve { config, out } => cmd_solve(config, out),
        Command::Oracle {
            config,
            grid_step,
            out,
        } => cmd_oracle(config, grid_step, out),
        Command::Montecarlo {
            config,
            trials,
            k,
            seed,
            schemes,
            orth_threshold,
            out,
            format,
        } => cmd_montecarlo(config, trials, k, seed, schemes, orth_threshold, out, format),
        Command::Pair {
            config,
            k,
            seed,
            orth_threshold,
            out,
        } => cmd_pair(config, k, seed, orth_threshold, out),
    }
}
