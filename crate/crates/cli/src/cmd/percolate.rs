//! Fractal percolation experiments over a seed range: direction-count
//! slopes between corner cells, spherical coverage of survivors, or
//! branching calibration against the exact process moments.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use holdercover_core::percolation::{
    corner_cells, direction_slope, natural_measure, simulate, sphere_coverage, PercError,
    RetentionSpec,
};
use serde_json::json;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("experiment", "slope", "slope, coverage, or counts"),
        key("d", "2", "ambient dimension"),
        key("t", "none", "target dimension; retention p = 2^(t-d)"),
        key("p", "none", "retention probability; exclusive with t"),
        key("depth", "11", "subdivision depth"),
        key("seeds", "20", "number of consecutive seeds"),
        key("seed", "0", "first seed"),
        key("window", "7:11", "resolution window lo:hi (slope)"),
        key("m", "8", "angular resolution level (coverage)"),
        key("full", "0.99", "coverage fraction counted as full (coverage)"),
    ]
}

pub const SLOPE_COLUMNS: &[&str] = &["seed", "slope", "rms_residual", "pairs"];
pub const COVERAGE_COLUMNS: &[&str] = &["seed", "alive", "coverage"];
pub const COUNTS_COLUMNS: &[&str] = &["level", "mean_count", "expected"];

fn retention(cfg: &mut Config) -> Result<(RetentionSpec, f64), CliError> {
    let t = cfg.get_opt_f64("t")?;
    let p = cfg.get_opt_f64("p")?;
    match (t, p) {
        (Some(t), None) => Ok((RetentionSpec::Dimension(t), t)),
        (None, Some(p)) => Ok((RetentionSpec::Probability(p), p)),
        _ => Err(CliError::usage("set exactly one of `t` and `p`")),
    }
}

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let experiment = cfg.get_choice("experiment", &["slope", "coverage", "counts"])?;
    let d = cfg.get_usize("d")?;
    let (spec, _) = retention(cfg)?;
    let depth = cfg.get_u32("depth")?;
    let count = cfg.get_u64("seeds")?;
    let seed0 = cfg.get_u64("seed")?;
    let seeds: Vec<u64> = (seed0..seed0 + count).collect();

    let (results, columns, rows, scalars) = match experiment {
        "slope" => slope_experiment(cfg, d, spec, depth, &seeds)?,
        "coverage" => coverage_experiment(cfg, d, spec, depth, &seeds)?,
        _ => counts_experiment(d, spec, depth, &seeds)?,
    };

    let mut outcome = Outcome::new(results, columns);
    outcome.seeds = seeds;
    outcome.rows = rows;
    outcome.scalars = scalars;
    Ok(outcome)
}

type Series = (
    serde_json::Value,
    &'static [&'static str],
    Vec<Vec<String>>,
    Vec<(String, String)>,
);

fn slope_experiment(
    cfg: &mut Config,
    d: usize,
    spec: RetentionSpec,
    depth: u32,
    seeds: &[u64],
) -> Result<Series, CliError> {
    let (lo, hi) = cfg.get_window("window")?;
    if d != 2 {
        return Err(CliError::usage("slope runs need d=2"));
    }
    if lo < 1 || lo >= hi || hi > depth {
        return Err(CliError::usage(format!(
            "window {lo}:{hi} must satisfy 1 <= lo < hi <= depth {depth}"
        )));
    }
    let (q1, q2) = corner_cells(2);
    let mut per_seed = Vec::new();
    let mut rows = Vec::new();
    let mut skipped_extinct = 0usize;
    let mut skipped_transversal = 0usize;
    let mut slopes = Vec::new();
    for &seed in seeds {
        let tree = simulate(d, spec, depth, seed).map_err(CliError::run)?;
        match direction_slope(&tree, &q1, &q2, (lo, hi)) {
            Ok(est) => {
                slopes.push(est.slope);
                rows.push(vec![
                    seed.to_string(),
                    format!("{}", est.slope),
                    format!("{}", est.rms_residual),
                    est.pairs.to_string(),
                ]);
                per_seed.push(json!({
                    "seed": seed,
                    "slope": est.slope,
                    "rms_residual": est.rms_residual,
                    "pairs": est.pairs,
                    "counts": est.counts,
                }));
            }
            // Extinction shows up either as an empty subtree under a retained
            // anchor or as the anchor cube itself not being retained.
            Err(PercError::SubtreeExtinct { .. } | PercError::NotRetained(_)) => {
                skipped_extinct += 1
            }
            Err(PercError::Transversality { .. }) => skipped_transversal += 1,
            Err(e) => return Err(CliError::run(e)),
        }
    }
    let mean = (!slopes.is_empty()).then(|| slopes.iter().sum::<f64>() / slopes.len() as f64);
    let results = json!({
        "window": [lo, hi],
        "per_seed": per_seed,
        "skipped_extinct": skipped_extinct,
        "skipped_transversal": skipped_transversal,
        "mean_slope": mean,
    });
    let mut scalars = vec![
        ("skipped_extinct".to_string(), skipped_extinct.to_string()),
        ("skipped_transversal".to_string(), skipped_transversal.to_string()),
    ];
    if let Some(m) = mean {
        scalars.push(("mean_slope".to_string(), format!("{m}")));
    }
    Ok((results, SLOPE_COLUMNS, rows, scalars))
}

fn coverage_experiment(
    cfg: &mut Config,
    d: usize,
    spec: RetentionSpec,
    depth: u32,
    seeds: &[u64],
) -> Result<Series, CliError> {
    let m = cfg.get_u32("m")?;
    let full = cfg.get_f64("full")?;
    if m < 1 || m > depth {
        return Err(CliError::usage(format!("m {m} must satisfy 1 <= m <= depth {depth}")));
    }
    let mut per_seed = Vec::new();
    let mut rows = Vec::new();
    let mut alive = 0usize;
    let mut full_count = 0usize;
    let mut sum = 0.0;
    for &seed in seeds {
        let tree = simulate(d, spec, depth, seed).map_err(CliError::run)?;
        let survives = *tree.counts().last().unwrap_or(&0) > 0;
        let coverage = sphere_coverage(&tree, m).map_err(CliError::run)?;
        if survives {
            alive += 1;
            sum += coverage;
            if coverage >= full {
                full_count += 1;
            }
        }
        rows.push(vec![
            seed.to_string(),
            survives.to_string(),
            format!("{coverage}"),
        ]);
        per_seed.push(json!({ "seed": seed, "alive": survives, "coverage": coverage }));
    }
    let frac_full = (alive > 0).then(|| full_count as f64 / alive as f64);
    let mean = (alive > 0).then(|| sum / alive as f64);
    let results = json!({
        "resolution": m,
        "full_threshold": full,
        "per_seed": per_seed,
        "survivors": alive,
        "mean_coverage": mean,
        "fraction_full": frac_full,
    });
    let mut scalars = vec![("survivors".to_string(), alive.to_string())];
    if let Some(f) = frac_full {
        scalars.push(("fraction_full".to_string(), format!("{f}")));
    }
    Ok((results, COVERAGE_COLUMNS, rows, scalars))
}

fn counts_experiment(
    d: usize,
    spec: RetentionSpec,
    depth: u32,
    seeds: &[u64],
) -> Result<Series, CliError> {
    let p = spec.probability(d).map_err(CliError::run)?;
    let mut level_sums = vec![0.0f64; depth as usize + 1];
    let mut mass_sum = 0.0;
    let mut mass_sq = 0.0;
    for &seed in seeds {
        let tree = simulate(d, spec, depth, seed).map_err(CliError::run)?;
        for (n, c) in tree.counts().iter().enumerate() {
            level_sums[n] += *c as f64;
        }
        let mass = natural_measure(&tree, depth).map_err(CliError::run)?.total_mass;
        mass_sum += mass;
        mass_sq += mass * mass;
    }
    let runs = seeds.len() as f64;
    let mean_mass = mass_sum / runs;
    let mass_se = if seeds.len() > 1 {
        (((mass_sq - runs * mean_mass * mean_mass) / (runs - 1.0)).max(0.0) / runs).sqrt()
    } else {
        0.0
    };
    let branching = 2f64.powi(d as i32) * p;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (n, sum) in level_sums.iter().enumerate() {
        let mean = sum / runs;
        let expected = branching.powi(n as i32);
        rows.push(vec![n.to_string(), format!("{mean}"), format!("{expected}")]);
        levels.push(json!({ "level": n, "mean_count": mean, "expected": expected }));
    }
    let results = json!({
        "retention_probability": p,
        "branching_mean": branching,
        "levels": levels,
        "natural_mass": { "mean": mean_mass, "se": mass_se },
    });
    let scalars = vec![
        ("branching_mean".to_string(), format!("{branching}")),
        ("mean_mass".to_string(), format!("{mean_mass}")),
    ];
    Ok((results, COUNTS_COLUMNS, rows, scalars))
}
