//! Digit-restricted set analysis: exact member-interval counts and box
//! exponents per block level, the exact retained-measure lower bound, an
//! optional doubling-constant estimate, and an optional Monte Carlo check
//! of the member fraction.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use holdercover_core::doubling::{
    dimension_bound, doubling_constant_estimate, ratio_to_f64, retained_measure_bound, DigitRule,
    TernaryBernoulli,
};
use holdercover_core::seeded;
use rand::Rng;
use serde_json::json;

const MC_TAG: u64 = 0x44424c47;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("n1", "100", "first block length"),
        key("delta", "1/100", "digit weight, rational or decimal"),
        key("L", "5", "deepest block level"),
        key("d", "1", "ambient dimension for the product measure"),
        key(
            "depth",
            "0",
            "triadic depth for the doubling-constant estimate; 0 skips it",
        ),
        key("mc", "0", "Monte Carlo member-fraction runs; 0 skips it"),
        key("seed", "17", "seed for the Monte Carlo runs"),
    ]
}

pub const COLUMNS: &[&str] = &["level", "prefix_len", "count", "exponent", "cdf_factor"];

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let n1 = cfg.get_u64("n1")?;
    let delta = cfg.get_big_ratio("delta")?;
    let lmax = cfg.get_u64("L")?;
    let d = cfg.get_usize("d")?;
    let depth = cfg.get_u32("depth")?;
    let mc = cfg.get_u32("mc")?;
    let seed = cfg.get_u64("seed")?;
    if lmax < 1 {
        return Err(CliError::usage("L must be at least 1"));
    }

    let rule = DigitRule::new(n1, delta.clone()).map_err(CliError::run)?;
    let mu = TernaryBernoulli::new(delta.clone(), d).map_err(CliError::run)?;
    let bound = dimension_bound(&rule, 1, lmax).map_err(CliError::run)?;
    let measure = retained_measure_bound(&rule, &mu, lmax).map_err(CliError::run)?;

    let doubling = if depth > 0 {
        let est = doubling_constant_estimate(&mu, depth).map_err(CliError::run)?;
        json!({
            "depth": est.depth,
            "constant": est.constant,
            "constant_exact": est.constant_exact.to_string(),
            "center": est.center,
            "radius": est.radius,
        })
    } else {
        serde_json::Value::Null
    };

    let monte_carlo = if mc > 0 {
        let len = rule.prefix_len(lmax) as usize;
        let side = ratio_to_f64(&delta);
        let mut rng = seeded::stream(seed, MC_TAG);
        let mut digits = vec![0u8; len];
        let mut members = 0u64;
        for _ in 0..mc {
            for digit in digits.iter_mut() {
                let u: f64 = rng.gen();
                *digit = if u < side {
                    0
                } else if u < 2.0 * side {
                    2
                } else {
                    1
                };
            }
            if rule.is_member(&digits).map_err(CliError::run)? {
                members += 1;
            }
        }
        let fraction = members as f64 / f64::from(mc);
        let expected = measure.product;
        let se = (expected * (1.0 - expected) / f64::from(mc)).sqrt();
        json!({
            "runs": mc,
            "members": members,
            "fraction": fraction,
            "expected": expected,
            "se": se,
        })
    } else {
        serde_json::Value::Null
    };

    let levels: Vec<_> = bound
        .levels
        .iter()
        .map(|l| {
            json!({
                "level": l.level,
                "block_len": rule.block_len(l.level),
                "block_bound": rule.block_bound(l.level),
                "prefix_len": l.prefix_len,
                "count": l.count.to_string(),
                "exponent": l.exponent,
            })
        })
        .collect();

    let results = json!({
        "rule": {
            "n1": n1,
            "delta": delta.to_string(),
            "k1": rule.k1(),
            "levels": levels,
        },
        "analytic": bound.analytic,
        "measure": {
            "factors": measure.factors,
            "product": measure.product,
            "power_d": measure.power_d,
        },
        "doubling": doubling,
        "monte_carlo": monte_carlo,
    });

    let mut outcome = Outcome::new(results, COLUMNS);
    if mc > 0 {
        outcome.seeds = vec![seed];
    }
    outcome.scalar("analytic", bound.analytic);
    outcome.scalar("measure_product", measure.product);
    outcome.rows = bound
        .levels
        .iter()
        .zip(&measure.factors)
        .map(|(l, factor)| {
            vec![
                l.level.to_string(),
                l.prefix_len.to_string(),
                l.count.to_string(),
                format!("{}", l.exponent),
                format!("{factor}"),
            ]
        })
        .collect();
    Ok(outcome)
}
