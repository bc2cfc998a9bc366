//! Textual specs for the built-in point sets.
//!
//! Grammar: `cantor1d:RATIO`, `cornerdust:DIM:RATIO`, `densedir:DIM:COUNT`,
//! `grid:DIM:LEVEL`, with RATIO as `a/b` or a decimal.

use crate::config::parse_ratio;
use holdercover_core::lattice::StandardSet;

pub fn parse_set(s: &str) -> Result<StandardSet, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or("");
    let rest: Vec<&str> = parts.collect();
    let arg = |i: usize| -> Result<&str, String> {
        rest.get(i)
            .copied()
            .ok_or_else(|| format!("`{kind}` needs {} argument(s)", i + 1))
    };
    let set = match kind {
        "cantor1d" => StandardSet::Cantor1d {
            ratio: parse_ratio(arg(0)?)?,
        },
        "cornerdust" => StandardSet::CornerDust {
            dim: arg(0)?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            ratio: parse_ratio(arg(1)?)?,
        },
        "densedir" => StandardSet::DenseDirectionCountable {
            dim: arg(0)?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            count: arg(1)?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        },
        "grid" => StandardSet::Grid {
            dim: arg(0)?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            level: arg(1)?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        },
        other => {
            return Err(format!(
                "unknown set `{other}`; expected cantor1d, cornerdust, densedir, or grid"
            ))
        }
    };
    if rest.len() > expected_args(&set) {
        return Err(format!("`{kind}` takes {} argument(s)", expected_args(&set)));
    }
    Ok(set)
}

fn expected_args(set: &StandardSet) -> usize {
    match set {
        StandardSet::Cantor1d { .. } => 1,
        _ => 2,
    }
}

pub fn render_set(set: &StandardSet) -> String {
    match set {
        StandardSet::Cantor1d { ratio } => format!("cantor1d:{ratio}"),
        StandardSet::CornerDust { dim, ratio } => format!("cornerdust:{dim}:{ratio}"),
        StandardSet::DenseDirectionCountable { dim, count } => format!("densedir:{dim}:{count}"),
        StandardSet::Grid { dim, level } => format!("grid:{dim}:{level}"),
    }
}
