//! Viewpoint analysis: tube-exceptional viewpoint sets swept over the clip
//! radius, and an optional polar graph cover from one viewpoint. A blocked
//! viewpoint exits 2.

use crate::config::{key, Config, KeySpec};
use crate::error::CliError;
use crate::report::Outcome;
use crate::sets::{parse_set, render_set};
use holdercover_core::cover::CoverParams;
use holdercover_core::lattice::{generate_standard_set, ScaleCover};
use holdercover_core::visibility::{
    collinear_inflation, polar_graph_cover, tube_exceptional_points, PolarOutcome,
};
use serde_json::json;

pub fn schema() -> Vec<KeySpec> {
    vec![
        key("set", "cornerdust:2:1/1024", "planar point set spec"),
        key("depth", "2", "construction depth of the set"),
        key("t", "0.22", "separation exponent"),
        key("w", "0.88", "content exponent; needs w < 1"),
        key("n0", "4", "coarsest level of the parameter window"),
        key("nmax", "6", "finest level of the parameter window"),
        key("s", "1,2,4", "clip radii to sweep"),
        key("mesh", "0.05", "viewpoint grid mesh"),
        key("viewpoint", "none", "viewpoint x,y for a polar cover; blocked exits 2"),
        key("tol", "0.000000001", "collinearity tolerance for the polar cover"),
    ]
}

pub const COLUMNS: &[&str] = &["s", "level", "flagged", "content"];

pub fn run(cfg: &mut Config) -> Result<Outcome, CliError> {
    let set = cfg
        .get_str("set")
        .and_then(|s| parse_set(&s).map_err(CliError::usage))?;
    let depth = cfg.get_u32("depth")?;
    let t = cfg.get_f64("t")?;
    let w = cfg.get_f64("w")?;
    let n0 = cfg.get_u32("n0")?;
    let nmax = cfg.get_u32("nmax")?;
    let radii = cfg.get_f64_list("s")?;
    let mesh = cfg.get_f64("mesh")?;
    let viewpoint = cfg.get_opt_point("viewpoint")?;
    let tol = cfg.get_f64("tol")?;

    let sample = generate_standard_set(&set, depth).map_err(CliError::run)?;
    if sample.dim() != 2 {
        return Err(CliError::usage(format!(
            "visibility runs on planar sets; `{}` has dimension {}",
            render_set(&set),
            sample.dim()
        )));
    }
    let params = CoverParams::new(2, 1, t, w, n0, nmax).map_err(CliError::run)?;
    let cover = ScaleCover::build(&sample, 2, n0, nmax).map_err(CliError::run)?;

    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    for &s in &radii {
        let exc = tube_exceptional_points(&cover, &params, s, mesh).map_err(CliError::run)?;
        for (level, cells) in &exc.per_level {
            let content = exc
                .contents
                .iter()
                .find(|(n, _)| n == level)
                .map_or(0.0, |(_, c)| *c);
            rows.push(vec![
                format!("{s}"),
                level.to_string(),
                cells.len().to_string(),
                format!("{content}"),
            ]);
        }
        sweeps.push(json!({
            "s": s,
            "inflation": collinear_inflation(s),
            "per_level": exc.per_level.iter().map(|(level, cells)| json!({
                "level": level,
                "flagged": cells.len(),
            })).collect::<Vec<_>>(),
            "contents": exc.contents.iter().map(|(level, c)| json!({
                "level": level,
                "content": c,
            })).collect::<Vec<_>>(),
            "decay": exc.decay.as_ref().map(|f| json!({
                "slope": f.slope,
                "intercept": f.intercept,
                "rms_residual": f.rms_residual,
            })),
        }));
    }

    let mut certificate_failed = false;
    let polar = match viewpoint {
        None => serde_json::Value::Null,
        Some(h) => match polar_graph_cover(&sample, &h, &params, tol, None).map_err(CliError::run)? {
            PolarOutcome::Graph(g) => json!({
                "outcome": "graph",
                "viewpoint": g.viewpoint,
                "directions": g.directions,
                "radii": g.radii,
                "alpha": g.alpha,
                "constant": g.constant,
            }),
            PolarOutcome::Blocked { i, j, direction } => {
                certificate_failed = true;
                json!({
                    "outcome": "blocked",
                    "i": i,
                    "j": j,
                    "direction": direction,
                })
            }
        },
    };

    let results = json!({
        "set": render_set(&set),
        "points": sample.len(),
        "alpha": params.alpha(),
        "sweeps": sweeps,
        "polar": polar,
    });

    let mut outcome = Outcome::new(results, COLUMNS);
    outcome.certificate_failed = certificate_failed;
    outcome.scalar("alpha", params.alpha());
    outcome.rows = rows;
    Ok(outcome)
}
