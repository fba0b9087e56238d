//! Experiment configuration files: line-oriented `key = value` pairs with
//! `#` comments.
//!
//! ```text
//! domain = sysadmin          # sysadmin | advising | life | wildfire
//! train = 3; 4; 6            # curriculum sizes, stages ';'-separated,
//!                            # size parameters ','-separated within a stage
//! test = 10; 15              # test instance sizes, same syntax
//! runs = 10
//! eval_episodes = 100
//! episodes_per_stage = 1250
//! seed = 0
//! out_dir = results          # default: $RELQ_OUT_DIR or ./results
//! k = 5                      # feature complexity bound
//! sample_episodes = 100      # state-space sampling for feature synthesis
//! hidden = 64 64             # network hidden widths
//! learning_rate = 0.001
//! gamma, alpha, epsilon, epsilon_decay, train_interval, opt_steps,
//! minibatch, buffer, horizon, normalize, clear_buffer_per_stage
//! ```
//!
//! `gamma` and `alpha` default to the domain's conventions; everything else
//! to the training-protocol defaults. Unknown keys are rejected.

use std::path::PathBuf;

use crate::env::DomainKind;
use crate::grl::{CurriculumStage, FeatureGenConfig, Hyper};
use crate::{Error, Result};

/// Environment variable giving the default output directory.
pub const OUT_DIR_VAR: &str = "RELQ_OUT_DIR";

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub stages: Vec<CurriculumStage>,
    pub test_sizes: Vec<Vec<usize>>,
    pub runs: u32,
    pub eval_episodes: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub hyper: Hyper,
    pub features: FeatureGenConfig,
}

/// Parses an experiment config; every error names the offending line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, 1, "expected 'key = value'"))?;
        pairs.push((line_no, key.trim().to_string(), value.trim().to_string()));
    }

    let find = |key: &str| pairs.iter().find(|(_, k, _)| k == key);
    let (dline, _, dvalue) = find("domain")
        .ok_or_else(|| Error::parse(1, 1, "missing 'domain' key"))?
        .clone();
    let domain = DomainKind::from_name(&dvalue)
        .ok_or_else(|| Error::parse(dline, 1, format!("unknown domain '{dvalue}'")))?;

    let mut hyper = Hyper::for_domain(domain);
    let mut features = FeatureGenConfig::default();
    let mut train_sizes: Option<Vec<Vec<usize>>> = None;
    let mut test_sizes: Option<Vec<Vec<usize>>> = None;
    let mut episodes_per_stage = hyper.episode_budget;
    let mut runs: u32 = 10;
    let mut eval_episodes: u32 = 100;
    let mut seed: u64 = 0;
    let mut out_dir: Option<PathBuf> = None;

    for (line, key, value) in &pairs {
        let line = *line;
        match key.as_str() {
            "domain" => {}
            "train" => train_sizes = Some(parse_stage_sizes(value, line)?),
            "test" => test_sizes = Some(parse_stage_sizes(value, line)?),
            "runs" => runs = parse_num(value, line)?,
            "eval_episodes" => eval_episodes = parse_num(value, line)?,
            "episodes_per_stage" => episodes_per_stage = parse_num(value, line)?,
            "seed" => seed = parse_num(value, line)?,
            "out_dir" => out_dir = Some(PathBuf::from(value)),
            "k" => features.k = parse_num(value, line)?,
            "sample_episodes" => features.sample_episodes = parse_num(value, line)?,
            "hidden" => {
                features.net.hidden = value
                    .split_whitespace()
                    .map(|v| parse_num(v, line))
                    .collect::<Result<_>>()?;
            }
            "learning_rate" => features.net.learning_rate = parse_num(value, line)?,
            "gamma" => hyper.gamma = parse_num(value, line)?,
            "alpha" => hyper.alpha = parse_num(value, line)?,
            "epsilon" => hyper.epsilon = parse_num(value, line)?,
            "epsilon_decay" => hyper.epsilon_decay = Some(parse_num(value, line)?),
            "train_interval" => hyper.train_interval = parse_num(value, line)?,
            "opt_steps" => hyper.opt_steps = parse_num(value, line)?,
            "minibatch" => hyper.minibatch = parse_num(value, line)?,
            "buffer" => hyper.buffer_capacity = parse_num(value, line)?,
            "horizon" => hyper.horizon = parse_num(value, line)?,
            "normalize" => hyper.normalize_inputs = parse_bool(value, line)?,
            "clear_buffer_per_stage" => {
                hyper.clear_buffer_per_stage = parse_bool(value, line)?
            }
            _ => return Err(Error::parse(line, 1, format!("unknown key '{key}'"))),
        }
    }

    let train_sizes = train_sizes
        .ok_or_else(|| Error::parse(1, 1, "missing 'train' key (curriculum sizes)"))?;
    let test_sizes =
        test_sizes.ok_or_else(|| Error::parse(1, 1, "missing 'test' key (test sizes)"))?;
    for sizes in train_sizes.iter().chain(&test_sizes) {
        if sizes.len() != domain.size_arity() {
            return Err(Error::validation(format!(
                "domain '{}' takes {} size parameter(s), got {:?}",
                domain.name(),
                domain.size_arity(),
                sizes
            )));
        }
    }
    if runs == 0 || eval_episodes == 0 {
        return Err(Error::validation("runs and eval_episodes must be at least 1"));
    }

    let stages = train_sizes
        .into_iter()
        .map(|size_params| CurriculumStage {
            domain_name: domain.name().to_string(),
            size_params,
            episode_budget: episodes_per_stage,
        })
        .collect();

    let out_dir = out_dir.unwrap_or_else(|| {
        std::env::var(OUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|_| "results".into())
    });

    Ok(ExperimentConfig {
        domain,
        stages,
        test_sizes,
        runs,
        eval_episodes,
        seed,
        out_dir,
        hyper,
        features,
    })
}

fn parse_stage_sizes(value: &str, line: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for stage in value.split(';') {
        let stage = stage.trim();
        if stage.is_empty() {
            continue;
        }
        let sizes: Vec<usize> = stage
            .split(',')
            .map(|v| parse_num(v.trim(), line))
            .collect::<Result<_>>()?;
        out.push(sizes);
    }
    if out.is_empty() {
        return Err(Error::parse(line, 1, "expected at least one size entry"));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, 1, format!("invalid number '{value}'")))
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        other => Err(Error::parse(line, 1, format!("invalid boolean '{other}'"))),
    }
}
