//! Builds a direction net and reports its randomized coverage audit.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use holdercover_core::directions::build_net;
use serde_json::json;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("d", "2", "ambient dimension"),
        key("k", "1", "plane dimension"),
        key("eps", "0.05", "net mesh in the principal-angle metric"),
        key("seed", "7", "seed for the candidate pool and the audit"),
    ]
}

pub const COLUMNS: &[&str] = &[
    "cells",
    "samples",
    "worst_distance",
    "rebuilds",
    "pool_size",
    "passed",
];

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let d = cfg.get_usize("d")?;
    let k = cfg.get_usize("k")?;
    let eps = cfg.get_f64("eps")?;
    let seed = cfg.get_u64("seed")?;

    let net = build_net(d, k, eps, seed).map_err(CliError::run)?;
    let results = json!({
        "d": d,
        "k": k,
        "epsilon": net.epsilon,
        "cells": net.len(),
        "audit": {
            "samples": net.audit.samples,
            "worst_distance": net.audit.worst_distance,
            "rebuilds": net.audit.rebuilds,
            "pool_size": net.audit.pool_size,
            "passed": net.audit.passed,
        },
    });

    let mut outcome = Outcome::new(results, COLUMNS);
    outcome.seeds = vec![seed];
    outcome.scalar("cells", net.len());
    outcome.scalar("worst_distance", net.audit.worst_distance);
    outcome.rows = vec![vec![
        net.len().to_string(),
        net.audit.samples.to_string(),
        format!("{}", net.audit.worst_distance),
        net.audit.rebuilds.to_string(),
        net.audit.pool_size.to_string(),
        net.audit.passed.to_string(),
    ]];
    Ok(outcome)
}
