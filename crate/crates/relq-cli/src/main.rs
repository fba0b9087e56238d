//! Command-line front end: instance generation, feature dumps, curriculum
//! training to a checkpoint, zero-shot evaluation, and full benchmark runs
//! from a config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relq::dl;
use relq::env::{generate_instance, instance_to_text, parse_instance, sample_state_space};
use relq::grl::{CurriculumStage, FeatureGenConfig, Hyper, run_leapfrog};
use relq::harness::{
    self, ResultRecord, evaluate_random, evaluate_zero_shot, parse_config, render_results_csv,
};
use relq::net::{load_checkpoint, save_checkpoint};

#[derive(Parser)]
#[command(
    name = "relq",
    about = "Relational RL with description-logic abstraction and transferable Q-networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance file.
    Gen {
        /// Domain name: sysadmin, advising, life, or wildfire.
        #[arg(long)]
        domain: String,
        /// Size parameters, comma-separated (e.g. 3 or 2,2,2).
        #[arg(long)]
        size: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Steps per episode.
        #[arg(long, default_value_t = 40)]
        horizon: u32,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Enumerate description-logic features for an instance and dump them.
    Features {
        /// Instance file to sample states from.
        #[arg(long)]
        instance: PathBuf,
        /// Feature complexity bound.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Random episodes for state-space sampling.
        #[arg(long, default_value_t = 100)]
        sample_episodes: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Train through a leapfrogging curriculum and save a checkpoint.
    Train {
        #[arg(long)]
        domain: String,
        /// Curriculum sizes: stages ';'-separated, parameters
        /// ','-separated, e.g. "3;4;6" or "2,2,2;3,3,3;4,4,4".
        #[arg(long)]
        stages: String,
        /// Episodes per stage.
        #[arg(long, default_value_t = 1250)]
        episodes: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        sample_episodes: u32,
        /// Discount factor; domain default when omitted.
        #[arg(long)]
        gamma: Option<f64>,
        /// Tabular learning rate; domain default when omitted.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Hidden layer widths, comma-separated.
        #[arg(long, default_value = "64,64")]
        hidden: String,
        #[arg(long, default_value_t = 1e-3)]
        learning_rate: f64,
        /// Scale network inputs by per-feature running maxima.
        #[arg(long)]
        normalize: bool,
        /// Empty the replay buffer between curriculum stages.
        #[arg(long)]
        clear_buffer_per_stage: bool,
        /// Checkpoint output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Also write per-episode training curves to this CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Evaluate a checkpoint greedily on instance files, zero-shot.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Instance files to evaluate on.
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        episodes: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also evaluate the uniform-random policy for comparison.
        #[arg(long)]
        compare_random: bool,
        /// Write the records as CSV here as well.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment (train + zero-shot evaluation) from a config
    /// file; writes results.csv, training_curves.csv, and plot.dat.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, relq::Error> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| relq::Error::validation(format!("invalid size '{v}'")))
        })
        .collect()
}

fn write_or_print(out: Option<&PathBuf>, content: &str) -> Result<(), relq::Error> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn print_records(records: &[ResultRecord]) {
    println!("{:<28} {:>10} {:>12} {:>12}", "instance", "episodes", "mean", "std");
    for r in records {
        println!(
            "{:<28} {:>10} {:>12.3} {:>12.3}",
            r.instance,
            r.returns.len(),
            r.mean,
            r.std
        );
    }
}

fn run(cli: Cli) -> Result<(), relq::Error> {
    match cli.command {
        Command::Gen { domain, size, seed, horizon, out } => {
            let mut spec = generate_instance(&domain, &parse_sizes(&size)?, seed)?;
            spec.horizon = horizon;
            write_or_print(out.as_ref(), &instance_to_text(&spec))
        }
        Command::Features { instance, k, sample_episodes, seed, out } => {
            let spec = parse_instance(&std::fs::read_to_string(&instance)?)?;
            let samples = sample_state_space(&spec, sample_episodes, seed);
            let features =
                dl::enumerate_features(&spec.domain, &spec.universe, &samples, k)?;
            eprintln!(
                "{} features (k = {k}, {} sampled states)",
                features.len(),
                samples.len()
            );
            write_or_print(out.as_ref(), &dl::serialize_feature_set(&features))
        }
        Command::Train {
            domain,
            stages,
            episodes,
            seed,
            k,
            sample_episodes,
            gamma,
            alpha,
            epsilon,
            hidden,
            learning_rate,
            normalize,
            clear_buffer_per_stage,
            out,
            curves,
        } => {
            let kind = relq::env::DomainKind::from_name(&domain)
                .ok_or_else(|| relq::Error::validation(format!("unknown domain '{domain}'")))?;
            let stage_list: Vec<CurriculumStage> = stages
                .split(';')
                .map(|s| {
                    Ok(CurriculumStage {
                        domain_name: domain.clone(),
                        size_params: parse_sizes(s.trim())?,
                        episode_budget: episodes,
                    })
                })
                .collect::<Result<_, relq::Error>>()?;
            let mut hyper = Hyper::for_domain(kind);
            if let Some(g) = gamma {
                hyper.gamma = g;
            }
            if let Some(a) = alpha {
                hyper.alpha = a;
            }
            hyper.epsilon = epsilon;
            hyper.normalize_inputs = normalize;
            hyper.clear_buffer_per_stage = clear_buffer_per_stage;
            let mut features = FeatureGenConfig { k, sample_episodes, ..Default::default() };
            features.net.hidden = parse_sizes(&hidden)?;
            features.net.learning_rate = learning_rate;

            let outcome = run_leapfrog(&stage_list, &features, &hyper, seed)?;
            for stage in &outcome.stages {
                let returns: Vec<f64> = stage.episodes.iter().map(|e| e.ret).collect();
                eprintln!(
                    "stage {:<16} episodes {:>5}  mean return {:>10.3}",
                    stage.label,
                    returns.len(),
                    harness::mean(&returns)
                );
            }
            if let Some(curves_path) = curves {
                let mut csv = String::from("stage,episode,return,epsilon,loss\n");
                for stage in &outcome.stages {
                    for e in &stage.episodes {
                        let loss = e.loss.map(|l| l.to_string()).unwrap_or_default();
                        csv.push_str(&format!(
                            "{},{},{},{},{loss}\n",
                            stage.label, e.episode, e.ret, e.epsilon
                        ));
                    }
                }
                write_or_print(Some(&curves_path), &csv)?;
            }
            let bytes = save_checkpoint(&outcome.net, &outcome.layout, &outcome.scaler);
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&out, bytes)?;
            eprintln!("checkpoint written to {}", out.display());
            Ok(())
        }
        Command::Eval { checkpoint, instances, episodes, seed, compare_random, out } => {
            let bytes = std::fs::read(&checkpoint)?;
            let (net, layout, scaler) = load_checkpoint(&bytes)?;
            let mut records = Vec::new();
            for (i, path) in instances.iter().enumerate() {
                let spec = parse_instance(&std::fs::read_to_string(path)?)?;
                let record = evaluate_zero_shot(
                    &net,
                    &layout,
                    &scaler,
                    &spec,
                    episodes,
                    relq::seed::derive(seed, &[i as u64]),
                )?;
                records.push(record);
                if compare_random {
                    let mut random = evaluate_random(
                        &spec,
                        episodes,
                        relq::seed::derive(seed, &[i as u64, 1]),
                    )?;
                    random.instance = format!("{}-random", random.instance);
                    records.push(random);
                }
            }
            print_records(&records);
            if let Some(path) = out {
                write_or_print(Some(&path), &render_results_csv(&records))?;
            }
            Ok(())
        }
        Command::Bench { config } => {
            let parsed = parse_config(&std::fs::read_to_string(&config)?)?;
            let outcome = harness::run_experiment(&parsed)?;
            for file in &outcome.files {
                eprintln!("wrote {}", file.display());
            }
            Ok(())
        }
    }
}
