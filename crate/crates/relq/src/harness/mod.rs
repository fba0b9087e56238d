//! Experiment front end: zero-shot evaluation of a frozen policy, the full
//! train-then-transfer protocol, and result emission as CSV plus a
//! gnuplot-style plot-data file.

mod config;

pub use config::{ExperimentConfig, parse_config};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::encode::{EncodingLayout, InputScaler};
use crate::env::{Env, InstanceSpec, SimEnv, generate_instance};
use crate::grl::{LeapfrogOutcome, run_leapfrog};
use crate::net::QNet;
use crate::{Error, Result, seed};

/// Zero-shot evaluation outcome on one instance for one run.
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub instance: String,
    pub run_seed: u64,
    pub returns: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl ResultRecord {
    fn from_returns(instance: String, run_seed: u64, returns: Vec<f64>) -> ResultRecord {
        let mean = mean(&returns);
        let std = population_std(&returns);
        ResultRecord { instance, run_seed, returns, mean, std }
    }
}

/// Runs the frozen policy greedily for `episodes` episodes. Ties in the
/// predicted Q-values are broken uniformly at random per visit, so an
/// all-constant network behaves exactly like the uniform-random policy.
/// Network parameters are never touched.
pub fn evaluate_zero_shot(
    net: &QNet,
    layout: &EncodingLayout,
    scaler: &InputScaler,
    spec: &InstanceSpec,
    episodes: u32,
    eval_seed: u64,
) -> Result<ResultRecord> {
    layout.check_domain(&spec.domain)?;
    let mut env = SimEnv::new(spec.clone());
    let mut rng = seed::rng(eval_seed, &[u64::MAX]);
    // per-state cache of the argmax set; prediction runs once per state
    let mut cache: HashMap<String, Vec<usize>> = HashMap::new();
    let mut input = Vec::new();
    let mut returns = Vec::with_capacity(episodes as usize);
    for ep in 0..episodes {
        let mut state = env.reset(seed::derive(eval_seed, &[ep as u64]));
        let mut ret = 0.0;
        loop {
            let key = state.canonical_key();
            if !cache.contains_key(&key) {
                let abstraction = layout.abstract_state(&state, env.universe())?;
                let mut best = f64::NEG_INFINITY;
                let mut ties = Vec::new();
                for (i, action) in env.actions().iter().enumerate() {
                    let avec =
                        layout.encode_action_with(&abstraction, action, env.universe())?;
                    layout.write_input(&abstraction.state_vector, &avec, &mut input);
                    scaler.apply(&mut input);
                    let v = net.predict(&input)?;
                    if v > best {
                        best = v;
                        ties.clear();
                        ties.push(i);
                    } else if v == best {
                        ties.push(i);
                    }
                }
                cache.insert(key.clone(), ties);
            }
            let ties = &cache[&key];
            let action = ties[rng.gen_range(0..ties.len())];
            let step = env.step(action)?;
            ret += step.reward;
            state = step.next_state;
            if step.done {
                break;
            }
        }
        returns.push(ret);
    }
    Ok(ResultRecord::from_returns(spec.label(), eval_seed, returns))
}

/// Mean episode return of the uniform-random policy, the reference point
/// for transfer comparisons.
pub fn evaluate_random(
    spec: &InstanceSpec,
    episodes: u32,
    eval_seed: u64,
) -> Result<ResultRecord> {
    let mut env = SimEnv::new(spec.clone());
    let mut rng = seed::rng(eval_seed, &[u64::MAX]);
    let mut returns = Vec::with_capacity(episodes as usize);
    for ep in 0..episodes {
        env.reset(seed::derive(eval_seed, &[ep as u64]));
        let mut ret = 0.0;
        loop {
            let action = rng.gen_range(0..env.actions().len());
            let step = env.step(action)?;
            ret += step.reward;
            if step.done {
                break;
            }
        }
        returns.push(ret);
    }
    Ok(ResultRecord::from_returns(spec.label(), eval_seed, returns))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 }
}

/// Population standard deviation (divisor `n`).
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, Copy)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for the alternative `mean(a) > mean(b)`.
    pub p: f64,
}

/// Welch's unequal-variance t-test.
pub fn welch_one_sided(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::validation("Welch's test needs at least two samples per group"));
    }
    let (va, vb) = (sample_var(a), sample_var(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        // identical constant samples: no evidence either way
        return Ok(WelchTest { t: 0.0, df: na + nb - 2.0, p: 0.5 });
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2
        / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::validation(format!("t distribution: {e}")))?;
    let p = 1.0 - dist.cdf(t);
    Ok(WelchTest { t, df, p })
}

/// Everything `run_experiment` leaves behind.
pub struct ExperimentOutcome {
    pub results: Vec<ResultRecord>,
    /// Per run, per curriculum stage: the stage label and episode records.
    pub training: Vec<Vec<(String, Vec<crate::grl::EpisodeRecord>)>>,
    pub files: Vec<PathBuf>,
}

/// The full protocol: for every run seed, leapfrog-train a fresh network
/// through the curriculum, then evaluate it greedily on every test
/// instance. Runs execute on parallel workers; all file contents are
/// deterministic functions of the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let test_specs: Vec<InstanceSpec> = config
        .test_sizes
        .iter()
        .enumerate()
        .map(|(i, size)| {
            let mut spec =
                generate_instance(config.domain.name(), size, seed::derive(config.seed, &[100, i as u64]))?;
            spec.horizon = config.hyper.horizon;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;

    struct RunOutput {
        records: Vec<ResultRecord>,
        training: Vec<(String, Vec<crate::grl::EpisodeRecord>)>,
    }

    let runs: Vec<Result<RunOutput>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = seed::derive(config.seed, &[200, run as u64]);
            let fail = |stage: &str, e: Error| {
                Error::validation(format!("run {run} (seed {run_seed}), {stage}: {e}"))
            };
            let LeapfrogOutcome { net, layout, scaler, stages } =
                run_leapfrog(&config.stages, &config.features, &config.hyper, run_seed)
                    .map_err(|e| fail("training", e))?;
            let mut records = Vec::with_capacity(test_specs.len());
            for (i, spec) in test_specs.iter().enumerate() {
                let mut record = evaluate_zero_shot(
                    &net,
                    &layout,
                    &scaler,
                    spec,
                    config.eval_episodes,
                    seed::derive(run_seed, &[300, i as u64]),
                )
                .map_err(|e| fail(&format!("evaluation on {}", spec.label()), e))?;
                record.run_seed = run_seed;
                records.push(record);
            }
            let training =
                stages.into_iter().map(|s| (s.label, s.episodes)).collect();
            Ok(RunOutput { records, training })
        })
        .collect();

    let mut results = Vec::new();
    let mut training = Vec::new();
    for run in runs {
        let output = run?;
        results.extend(output.records);
        training.push(output.training);
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let mut files = Vec::new();

    let results_path = config.out_dir.join("results.csv");
    std::fs::write(&results_path, render_results_csv(&results))?;
    files.push(results_path);

    let curves_path = config.out_dir.join("training_curves.csv");
    std::fs::write(&curves_path, render_training_csv(&training))?;
    files.push(curves_path);

    let plot_path = config.out_dir.join("plot.dat");
    std::fs::write(&plot_path, render_plot_data(&results, &test_specs))?;
    files.push(plot_path);

    print!("{}", summary_table(&results, &test_specs));
    Ok(ExperimentOutcome { results, training, files })
}

/// One row per (instance, run): summary statistics plus the per-episode
/// returns space-separated in the last column.
pub fn render_results_csv(results: &[ResultRecord]) -> String {
    let mut out = String::from("instance,run_seed,mean,std,returns\n");
    for r in results {
        let returns: Vec<String> = r.returns.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{},{},{},{}", r.instance, r.run_seed, r.mean, r.std, returns.join(" "))
            .unwrap();
    }
    out
}

fn render_training_csv(training: &[Vec<(String, Vec<crate::grl::EpisodeRecord>)>]) -> String {
    let mut out = String::from("run,stage,episode,return,epsilon,loss\n");
    for (run, stages) in training.iter().enumerate() {
        for (label, episodes) in stages {
            for e in episodes {
                let loss = e.loss.map(|l| l.to_string()).unwrap_or_default();
                writeln!(out, "{run},{label},{},{},{},{loss}", e.episode, e.ret, e.epsilon)
                    .unwrap();
            }
        }
    }
    out
}

/// One block per test instance: `run_index mean std`, blank-line separated,
/// directly plottable with error bars.
fn render_plot_data(results: &[ResultRecord], specs: &[InstanceSpec]) -> String {
    let mut out = String::from("# zero-shot mean episode return per training run\n");
    for spec in specs {
        let label = spec.label();
        writeln!(out, "\n# instance {label}").unwrap();
        for (i, r) in results.iter().filter(|r| r.instance == label).enumerate() {
            writeln!(out, "{i} {} {}", r.mean, r.std).unwrap();
        }
    }
    out
}

fn summary_table(results: &[ResultRecord], specs: &[InstanceSpec]) -> String {
    let mut out = String::new();
    writeln!(out, "{:<20} {:>6} {:>12} {:>12}", "instance", "runs", "mean", "std").unwrap();
    for spec in specs {
        let label = spec.label();
        let means: Vec<f64> =
            results.iter().filter(|r| r.instance == label).map(|r| r.mean).collect();
        writeln!(
            out,
            "{label:<20} {:>6} {:>12.3} {:>12.3}",
            means.len(),
            mean(&means),
            population_std(&means)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{Concept, Feature};
    use crate::env::DomainKind;
    use crate::net::NetConfig;

    fn zero_policy() -> (QNet, EncodingLayout, InputScaler) {
        let layout = EncodingLayout::new(
            DomainKind::Sysadmin.domain(),
            vec![Feature::concept(Concept::primitive("running"))],
        )
        .unwrap();
        let mut net = QNet::new(layout.input_len(), NetConfig::default(), 0);
        net.set_params(&vec![0.0; net.num_params()]).unwrap();
        let scaler = InputScaler::new(false, layout.num_features());
        (net, layout, scaler)
    }

    #[test]
    fn zero_net_matches_random_policy_statistics() {
        let (net, layout, scaler) = zero_policy();
        let spec = generate_instance("sysadmin", &[4], 5).unwrap();
        let greedy = evaluate_zero_shot(&net, &layout, &scaler, &spec, 100, 11).unwrap();
        let random = evaluate_random(&spec, 100, 12).unwrap();
        // all Q-values tie, so the greedy evaluation is the uniform-random
        // policy; means agree within 3 sigma of the episode-return spread
        let sigma = (random.std.powi(2) / 100.0 + greedy.std.powi(2) / 100.0).sqrt();
        assert!(
            (greedy.mean - random.mean).abs() <= 3.0 * sigma,
            "greedy {} vs random {} (sigma {sigma})",
            greedy.mean,
            random.mean
        );
    }

    #[test]
    fn single_episode_record() {
        let (net, layout, scaler) = zero_policy();
        let spec = generate_instance("sysadmin", &[2], 0).unwrap();
        let record = evaluate_zero_shot(&net, &layout, &scaler, &spec, 1, 0).unwrap();
        assert_eq!(record.returns.len(), 1);
        assert_eq!(record.mean, record.returns[0]);
        assert_eq!(record.std, 0.0);
    }

    #[test]
    fn evaluation_never_mutates_the_network() {
        let (net, layout, scaler) = zero_policy();
        let spec = generate_instance("sysadmin", &[3], 1).unwrap();
        let before = net.params();
        evaluate_zero_shot(&net, &layout, &scaler, &spec, 20, 3).unwrap();
        assert_eq!(net.params(), before);
    }

    #[test]
    fn layout_domain_mismatch_is_rejected() {
        let (net, layout, scaler) = zero_policy();
        let spec = generate_instance("life", &[2, 2], 0).unwrap();
        assert!(evaluate_zero_shot(&net, &layout, &scaler, &spec, 1, 0).is_err());
    }

    #[test]
    fn mean_and_std_recompute_from_returns() {
        let record = ResultRecord::from_returns("x".into(), 0, vec![1.0, 2.0, 3.0, 6.0]);
        assert_eq!(record.mean, 3.0);
        let expected_var: f64 = (4.0 + 1.0 + 0.0 + 9.0) / 4.0;
        assert!((record.std - expected_var.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn welch_matches_reference_values() {
        // fixture checked against an independent statistics package
        let a = [12.0, 14.5, 11.0, 13.2, 15.1, 12.8, 14.0, 13.5, 12.2, 14.8];
        let b = [9.0, 10.5, 8.2, 11.0, 9.8, 10.2, 9.5, 8.8, 10.9, 9.1];
        let test = welch_one_sided(&a, &b).unwrap();
        assert!((test.t - 7.006957307528821).abs() < 1e-12, "t = {}", test.t);
        assert!((test.df - 16.213816221529264).abs() < 1e-12, "df = {}", test.df);
        assert!((test.p - 1.3745048033264978e-6).abs() < 1e-12, "p = {}", test.p);

        // no separation: p = 0.5 on symmetric identical samples
        let same = welch_one_sided(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(same.p, 0.5);
    }

    #[test]
    fn results_csv_shape() {
        let records = vec![
            ResultRecord::from_returns("a-n1".into(), 7, vec![1.0, 2.0]),
            ResultRecord::from_returns("b-n2".into(), 8, vec![3.0]),
        ];
        let csv = render_results_csv(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "instance,run_seed,mean,std,returns");
        assert_eq!(lines[1], "a-n1,7,1.5,0.5,1 2");
    }
}
