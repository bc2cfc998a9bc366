//! Full projection-cover pipeline on a planar set: pair families, direction
//! net, accumulated exceptional directions, and injectivity certificates for
//! a seeded batch of test directions or one requested angle.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use crate::sets::{parse_set, render_set};
use holdercover_core::cover::{
    accumulate_exceptional, build_graph_function, build_pair_families, holder_constant,
    injectivity_certificate, CoverParams, HolderCertificate,
};
use holdercover_core::directions::{build_net, KPlane};
use holdercover_core::lattice::{generate_standard_set, ScaleCover};
use holdercover_core::seeded;
use rand::Rng;
use serde_json::json;

const ANGLE_TAG: u64 = 0x434f5645;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("set", "cornerdust:2:1/32", "planar point set spec"),
        key("depth", "2", "construction depth of the set"),
        key("t", "0.45", "separation exponent"),
        key("w", "0.95", "content exponent"),
        key("n0", "4", "coarsest level of the parameter window"),
        key("nmax", "9", "finest level of the parameter window"),
        key("eps", "0.01", "direction-net mesh"),
        key("seed", "7", "seed for the net and the angle batch"),
        key("directions", "16", "number of batch test angles"),
        key(
            "angle",
            "none",
            "one projection angle in radians to certify; failure exits 2",
        ),
    ]
}

pub const COLUMNS: &[&str] = &["level", "pairs", "threshold", "flagged", "content"];

fn certificate_json(cert: &HolderCertificate, constant: Option<f64>) -> serde_json::Value {
    json!({
        "passed": cert.passed,
        "alpha": cert.alpha,
        "pairs_checked": cert.pairs_checked,
        "constant": constant,
        "failed_clause": cert.failed_clause.as_ref().map(|c| format!("{c:?}")),
        "witness": cert.witness.as_ref().map(|w| json!({
            "i": w.i,
            "j": w.j,
            "distance": w.distance,
            "projected": w.projected,
            "scale": w.scale,
        })),
    })
}

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let set = cfg
        .get_str("set")
        .and_then(|s| parse_set(&s).map_err(CliError::usage))?;
    let depth = cfg.get_u32("depth")?;
    let t = cfg.get_f64("t")?;
    let w = cfg.get_f64("w")?;
    let n0 = cfg.get_u32("n0")?;
    let nmax = cfg.get_u32("nmax")?;
    let eps = cfg.get_f64("eps")?;
    let seed = cfg.get_u64("seed")?;
    let directions = cfg.get_usize("directions")?;
    let angle = cfg.get_opt_f64("angle")?;

    let sample = generate_standard_set(&set, depth).map_err(CliError::run)?;
    if sample.dim() != 2 {
        return Err(CliError::usage(format!(
            "cover runs on planar sets; `{}` has dimension {}",
            render_set(&set),
            sample.dim()
        )));
    }
    let params = CoverParams::new(2, 1, t, w, n0, nmax).map_err(CliError::run)?;
    let cover = ScaleCover::build(&sample, 2, n0, nmax).map_err(CliError::run)?;
    let families = build_pair_families(&cover, &params).map_err(CliError::run)?;
    let net = build_net(2, 1, eps, seed).map_err(CliError::run)?;
    let exc = accumulate_exceptional(&families, &net, &params).map_err(CliError::run)?;

    let mut rng = seeded::stream(seed, ANGLE_TAG);
    let mut batch = Vec::with_capacity(directions);
    for _ in 0..directions {
        let theta = rng.gen_range(0.0..std::f64::consts::PI);
        let plane = KPlane::line_at_angle(theta);
        if exc.is_flagged(&net, &plane) {
            batch.push(json!({ "angle": theta, "flagged": true, "certificate": null }));
            continue;
        }
        let cert =
            injectivity_certificate(&sample, &plane, &params, Some((&net, &exc))).map_err(CliError::run)?;
        let constant = if cert.passed {
            let graph = build_graph_function(&sample, &plane).map_err(CliError::run)?;
            Some(holder_constant(&graph, cert.alpha).map_err(CliError::run)?)
        } else {
            None
        };
        batch.push(json!({
            "angle": theta,
            "flagged": false,
            "certificate": certificate_json(&cert, constant),
        }));
    }

    let mut certificate_failed = false;
    let requested = match angle {
        None => serde_json::Value::Null,
        Some(theta) => {
            let plane = KPlane::line_at_angle(theta);
            if exc.is_flagged(&net, &plane) {
                certificate_failed = true;
                json!({ "angle": theta, "flagged": true, "certificate": null })
            } else {
                let cert = injectivity_certificate(&sample, &plane, &params, Some((&net, &exc)))
                    .map_err(CliError::run)?;
                certificate_failed = !cert.passed;
                let constant = if cert.passed {
                    let graph = build_graph_function(&sample, &plane).map_err(CliError::run)?;
                    Some(holder_constant(&graph, cert.alpha).map_err(CliError::run)?)
                } else {
                    None
                };
                json!({
                    "angle": theta,
                    "flagged": false,
                    "certificate": certificate_json(&cert, constant),
                })
            }
        }
    };

    let family_rows: Vec<_> = families
        .iter()
        .map(|f| {
            let flagged = exc.per_level.get(&f.level).map_or(0, |c| c.len());
            let content = exc.contents.get(&f.level).map_or(0.0, |c| c.value);
            (f.level, f.pairs.len(), f.threshold, flagged, content)
        })
        .collect();

    let results = json!({
        "set": render_set(&set),
        "points": sample.len(),
        "params": {
            "alpha": params.alpha(),
            "gap_dimension": params.g(),
            "t": params.t,
            "w": params.w,
        },
        "families": families.iter().map(|f| json!({
            "level": f.level,
            "pairs": f.pairs.len(),
            "threshold": f.threshold,
            "empty_level": f.empty_level,
        })).collect::<Vec<_>>(),
        "net": {
            "cells": net.len(),
            "epsilon": net.epsilon,
            "audit": {
                "samples": net.audit.samples,
                "worst_distance": net.audit.worst_distance,
                "rebuilds": net.audit.rebuilds,
                "pool_size": net.audit.pool_size,
                "passed": net.audit.passed,
            },
        },
        "exceptional": {
            "per_level": family_rows.iter().map(|(level, _, _, flagged, content)| json!({
                "level": level,
                "flagged": flagged,
                "content": content,
            })).collect::<Vec<_>>(),
            "tail": exc.tail_contents.iter().map(|(level, c)| json!({
                "level": level,
                "content": c.value,
            })).collect::<Vec<_>>(),
            "decay": exc.decay.as_ref().map(|f| json!({
                "slope": f.slope,
                "intercept": f.intercept,
                "rms_residual": f.rms_residual,
            })),
        },
        "batch": batch,
        "direction": requested,
    });

    let mut outcome = Outcome::new(results, COLUMNS);
    outcome.seeds = vec![seed];
    outcome.certificate_failed = certificate_failed;
    outcome.scalar("alpha", params.alpha());
    outcome.scalar("net_cells", net.len());
    if let Some(fit) = &exc.decay {
        outcome.scalar("decay_slope", fit.slope);
    }
    outcome.rows = family_rows
        .iter()
        .map(|(level, pairs, threshold, flagged, content)| {
            vec![
                level.to_string(),
                pairs.to_string(),
                format!("{threshold}"),
                flagged.to_string(),
                format!("{content}"),
            ]
        })
        .collect();
    Ok(outcome)
}
