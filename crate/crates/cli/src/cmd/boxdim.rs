//! Box-counting dimension of a standard set over a level window.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use crate::sets::{parse_set, render_set};
use holdercover_core::lattice::{box_dimension_estimate, generate_standard_set, ScaleCover};
use serde_json::json;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("set", "cantor1d:1/3", "point set spec (see `describe`)"),
        key("depth", "12", "construction depth of the set"),
        key("base", "3", "lattice base for the covers"),
        key("window", "4:12", "inclusive level window lo:hi for the fit"),
    ]
}

pub const COLUMNS: &[&str] = &["level", "count"];

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let set = cfg
        .get_str("set")
        .and_then(|s| parse_set(&s).map_err(CliError::usage))?;
    let depth = cfg.get_u32("depth")?;
    let base = cfg.get_u8("base")?;
    let (lo, hi) = cfg.get_window("window")?;

    let sample = generate_standard_set(&set, depth).map_err(CliError::run)?;
    let cover = ScaleCover::build(&sample, base, lo, hi).map_err(CliError::run)?;
    let fit = box_dimension_estimate(&cover, lo, hi).map_err(CliError::run)?;

    let levels: Vec<_> = cover
        .counts()
        .iter()
        .map(|(&level, &count)| json!({ "level": level, "count": count }))
        .collect();
    let results = json!({
        "set": render_set(&set),
        "points": sample.len(),
        "levels": levels,
        "fit": {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "rms_residual": fit.rms_residual,
            "levels_used": fit.levels_used,
            "degenerate": fit.degenerate,
        },
    });

    let mut outcome = Outcome::new(results, COLUMNS);
    outcome.scalar("slope", fit.slope);
    outcome.scalar("rms_residual", fit.rms_residual);
    outcome.rows = cover
        .counts()
        .iter()
        .map(|(level, count)| vec![level.to_string(), count.to_string()])
        .collect();
    Ok(outcome)
}
