//! Covering-count primitives behind the discrete Hausdorff-content
//! estimators.
//!
//! Every estimate has the form `min over dyadic radii r of count(r) * (2r)^w`
//! where `count(r)` is the size of a covering of the flagged configuration by
//! metric balls of radius `r`. The coverings are canonical: for a fixed
//! universe and radius the covering depends only on the flagged subset, never
//! on iteration order, which makes the counts (and hence the estimate)
//! monotone under growing the flagged set. Radii are capped at 1/2 so
//! `(2r)^w <= 1` and the estimate is non-increasing in `w`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Result of a min-over-radii content estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub value: f64,
    /// Radius achieving the minimum (the largest such radius on ties).
    pub best_radius: f64,
    /// (radius, covering count) per dyadic radius, largest radius first.
    pub per_radius: Vec<(f64, usize)>,
    pub exponent: f64,
}

/// Dyadic radii `1/2, 1/4, ...` down to the last one `>= floor`.
///
/// Always yields at least one radius; the floor is clamped away from zero so
/// a degenerate input cannot produce an unbounded sweep.
pub fn dyadic_radii(floor: f64) -> Vec<f64> {
    let floor = floor.max(2.0_f64.powi(-40));
    let mut out = Vec::new();
    let mut r = 0.5;
    while r >= floor {
        out.push(r);
        r *= 0.5;
    }
    if out.is_empty() {
        out.push(0.5);
    }
    out
}

/// Evaluates `count(r) * (2r)^w` over the dyadic radii and keeps the minimum.
pub fn min_over_radii(
    mut count_at: impl FnMut(f64) -> usize,
    floor: f64,
    w: f64,
) -> ContentEstimate {
    let mut per_radius = Vec::new();
    let mut best = (f64::INFINITY, 0.5);
    for r in dyadic_radii(floor) {
        let c = count_at(r);
        per_radius.push((r, c));
        let v = c as f64 * (2.0 * r).powf(w);
        if v < best.0 {
            best = (v, r);
        }
    }
    ContentEstimate {
        value: if best.0.is_finite() { best.0 } else { 0.0 },
        best_radius: best.1,
        per_radius,
        exponent: w,
    }
}

/// Exact minimum number of arcs of length `arc` covering `points` on a
/// circle of the given circumference.
///
/// Points may be in any order; values are taken mod `circumference`. The
/// count is the true optimum, so it is automatically monotone in the point
/// set. Runs the classic rotate-the-start sweep in O(n^2).
pub fn circle_cover_count(points: &[f64], circumference: f64, arc: f64) -> usize {
    assert!(circumference > 0.0 && arc > 0.0);
    let n = points.len();
    if n == 0 {
        return 0;
    }
    if arc >= circumference {
        return 1;
    }
    let mut ang: Vec<f64> = points
        .iter()
        .map(|&a| a.rem_euclid(circumference))
        .collect();
    ang.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ang.dedup();
    let m = ang.len();
    let mut best = usize::MAX;
    for start in 0..m {
        // Greedy arcs beginning exactly at a point; some optimal cover has
        // every arc flush with its first uncovered point.
        let mut count = 1usize;
        let mut reach = ang[start] + arc;
        for step in 1..m {
            let theta = {
                let raw = ang[(start + step) % m];
                if (start + step) >= m {
                    raw + circumference
                } else {
                    raw
                }
            };
            if theta > reach {
                count += 1;
                reach = theta + arc;
            }
        }
        best = best.min(count);
        if best == 1 {
            break;
        }
    }
    best
}

/// Canonical leader partition of a finite metric universe at scale `r`:
/// walking indices in order, each element joins the first leader within
/// distance `r` or becomes a leader itself. Returns the class id per element.
///
/// The partition is a fixed function of (universe, r); counting the classes
/// that meet a flagged subset therefore gives a covering count monotone in
/// the subset (each class sits inside a ball of radius `r` around its
/// leader).
pub fn partition_classes(n: usize, mut dist: impl FnMut(usize, usize) -> f64, r: f64) -> Vec<usize> {
    let mut leaders: Vec<usize> = Vec::new();
    let mut class = vec![0usize; n];
    for i in 0..n {
        let mut found = None;
        for (ci, &l) in leaders.iter().enumerate() {
            if dist(i, l) <= r {
                found = Some(ci);
                break;
            }
        }
        class[i] = match found {
            Some(ci) => ci,
            None => {
                leaders.push(i);
                leaders.len() - 1
            }
        };
    }
    class
}

/// Number of partition classes hit by the flagged ids.
pub fn partition_cover_count(classes: &[usize], flagged: impl IntoIterator<Item = usize>) -> usize {
    let mut hit = BTreeSet::new();
    for id in flagged {
        hit.insert(classes[id]);
    }
    hit.len()
}

/// Number of cells of the fixed axis-aligned grid with side `side` containing
/// at least one of the points. A cell of side `s = 2r/sqrt(d)` has diameter
/// `2r`, so this is a covering count at radius `r` for Euclidean point sets.
pub fn grid_cover_count(points: &[Vec<f64>], side: f64) -> usize {
    assert!(side > 0.0);
    let mut cells: BTreeSet<Vec<i64>> = BTreeSet::new();
    for p in points {
        cells.insert(p.iter().map(|&x| (x / side).floor() as i64).collect());
    }
    cells.len()
}

/// Grid covering count at Euclidean radius `r` in dimension `d`.
pub fn grid_count_at_radius(points: &[Vec<f64>], d: usize, r: f64) -> usize {
    grid_cover_count(points, 2.0 * r / (d as f64).sqrt())
}
