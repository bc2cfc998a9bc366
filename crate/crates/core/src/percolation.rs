//! Fractal percolation: seeded dyadic subdivision trees with splittable
//! per-cube randomness, natural-measure weights, direction-set slope
//! experiments between separated corner cells, and sphere coverage.

use crate::fit::fit_line;
use crate::lattice::{LatticeCube, ScaleCover};
use crate::seeded;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Tag folded into the seed so percolation draws are independent of every
/// other seeded stream in the crate.
const RETENTION_TAG: u64 = 0x7065_7263;

/// Total retained cubes a single tree may hold.
const CUBE_BUDGET: usize = 1 << 22;

/// Cross pairs a direction scan may enumerate.
const PAIR_BUDGET: usize = 20_000_000;

#[derive(Debug, thiserror::Error)]
pub enum PercError {
    #[error("percolation supports dimensions 1..=3; got {0}")]
    BadDimension(usize),
    #[error("retention probability {0} outside (0, 1]")]
    BadProbability(f64),
    #[error("dimension parameter {0} outside (0, d]")]
    BadDimensionValue(f64),
    #[error("depth {depth} with d={d} exceeds the 30-bit cube index budget")]
    DepthBudget { d: usize, depth: u32 },
    #[error("tree exceeded the cube budget ({0} cubes)")]
    CubeBudget(usize),
    #[error("pair scan exceeded the budget ({0} pairs)")]
    PairBudget(usize),
    #[error("level {n} exceeds tree depth {depth}")]
    LevelOutOfRange { n: u32, depth: u32 },
    #[error("cube {0} is not a retained cube of the tree")]
    NotRetained(LatticeCube),
    #[error("anchor cubes must be distinct same-level cells of the tree's grid")]
    BadAnchors,
    #[error("joining directions come within {angle:.4} rad of a coordinate axis; need pi/8")]
    Transversality { angle: f64 },
    #[error("no retained depth-level cubes under anchor {which}; resample with a new seed")]
    SubtreeExtinct { which: usize },
    #[error("resolution window must satisfy 1 <= lo < hi <= depth; got {lo}..{hi}")]
    BadWindow { lo: u32, hi: u32 },
    #[error("resolution {m} exceeds tree depth {depth}")]
    ResolutionTooFine { m: u32, depth: u32 },
    #[error("direction slope is implemented for d=2 only; got d={0}")]
    SlopeDimension(usize),
}

/// Retention law given either directly or through the target dimension `t`,
/// in which case `p = 2^{t-d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RetentionSpec {
    Dimension(f64),
    Probability(f64),
}

impl RetentionSpec {
    pub fn probability(self, d: usize) -> Result<f64, PercError> {
        let p = match self {
            RetentionSpec::Dimension(t) => {
                if !(t > 0.0 && t <= d as f64) {
                    return Err(PercError::BadDimensionValue(t));
                }
                2f64.powf(t - d as f64)
            }
            RetentionSpec::Probability(p) => p,
        };
        if !(p > 0.0 && p <= 1.0) {
            return Err(PercError::BadProbability(p));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone)]
struct PercCube {
    coords: [u64; 3],
    hash: u64,
}

/// One realization of fractal percolation on `[0,1]^d`: level 0 is the unit
/// cube, each level-(n+1) cube survives independently with probability `p`
/// given its parent survived.
///
/// The retention coin of a cube depends only on `(seed, cube path)`, so the
/// same `(seed, d, p, depth)` reproduces the same tree bit for bit, and any
/// subtree can be regenerated independently.
#[derive(Debug, Clone)]
pub struct PercolationTree {
    pub d: usize,
    pub p: f64,
    pub depth: u32,
    pub seed: u64,
    levels: Vec<Vec<PercCube>>,
}

pub fn simulate(
    d: usize,
    spec: RetentionSpec,
    depth: u32,
    seed: u64,
) -> Result<PercolationTree, PercError> {
    if !(1..=3).contains(&d) {
        return Err(PercError::BadDimension(d));
    }
    let p = spec.probability(d)?;
    if u64::from(depth) * d as u64 > 30 {
        return Err(PercError::DepthBudget { d, depth });
    }
    let root = PercCube {
        coords: [0; 3],
        hash: seeded::mix(seed, RETENTION_TAG),
    };
    let mut levels = vec![vec![root]];
    let mut total = 1usize;
    for _ in 0..depth {
        let cur = levels.last().unwrap();
        let mut next = Vec::new();
        for cube in cur {
            for c in 0..(1u64 << d) {
                let h = seeded::mix(cube.hash, 1 + c);
                if seeded::unit_f64(h) < p {
                    let mut coords = [0u64; 3];
                    for (a, out) in coords.iter_mut().enumerate().take(d) {
                        *out = 2 * cube.coords[a] + ((c >> a) & 1);
                    }
                    next.push(PercCube { coords, hash: h });
                }
            }
        }
        total += next.len();
        if total > CUBE_BUDGET {
            return Err(PercError::CubeBudget(total));
        }
        levels.push(next);
    }
    Ok(PercolationTree {
        d,
        p,
        depth,
        seed,
        levels,
    })
}

impl PercolationTree {
    pub fn count(&self, n: u32) -> Result<usize, PercError> {
        self.levels
            .get(n as usize)
            .map(Vec::len)
            .ok_or(PercError::LevelOutOfRange {
                n,
                depth: self.depth,
            })
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// No cubes survive at the deepest level.
    pub fn is_extinct(&self) -> bool {
        self.levels.last().is_none_or(Vec::is_empty)
    }

    fn check_level(&self, n: u32) -> Result<(), PercError> {
        if n > self.depth {
            return Err(PercError::LevelOutOfRange {
                n,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Centers of the retained level-n cubes.
    pub fn centers(&self, n: u32) -> Result<Vec<Vec<f64>>, PercError> {
        self.check_level(n)?;
        let s = 2f64.powi(-(n as i32));
        Ok(self.levels[n as usize]
            .iter()
            .map(|c| {
                c.coords[..self.d]
                    .iter()
                    .map(|&k| (k as f64 + 0.5) * s)
                    .collect()
            })
            .collect())
    }

    /// Retained level-n cubes as grid cells.
    pub fn level_cubes(&self, n: u32) -> Result<BTreeSet<LatticeCube>, PercError> {
        self.check_level(n)?;
        Ok(self.levels[n as usize]
            .iter()
            .map(|c| LatticeCube {
                base: 2,
                level: n,
                coords: c.coords[..self.d].to_vec(),
            })
            .collect())
    }

    /// The multi-scale cover the retained cubes form, for box-counting.
    pub fn scale_cover(&self) -> ScaleCover {
        let mut levels = BTreeMap::new();
        for n in 0..=self.depth {
            levels.insert(n, self.level_cubes(n).expect("level within depth"));
        }
        ScaleCover { base: 2, levels }
    }

    /// Retained deepest-level cubes lying under the given ancestor cell.
    fn deep_under(&self, anchor: &LatticeCube) -> Vec<&PercCube> {
        let shift = self.depth - anchor.level;
        self.levels[self.depth as usize]
            .iter()
            .filter(|c| {
                (0..self.d).all(|a| (c.coords[a] >> shift) == anchor.coords[a])
            })
            .collect()
    }

    fn is_retained(&self, cube: &LatticeCube) -> bool {
        cube.level <= self.depth
            && self.levels[cube.level as usize]
                .iter()
                .any(|c| c.coords[..self.d] == cube.coords[..])
    }
}

/// Per-level weights of the normalized occupation measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaturalMeasureWeights {
    pub level: u32,
    /// `p^{-n} 2^{-dn}` assigned to each retained cube.
    pub per_cube_weight: f64,
    pub retained: usize,
    pub total_mass: f64,
}

/// Weights of the level-n natural measure: density `p^{-n}` on the retained
/// region, which has expected total mass 1 at every level.
pub fn natural_measure(tree: &PercolationTree, n: u32) -> Result<NaturalMeasureWeights, PercError> {
    tree.check_level(n)?;
    let ni = n as i32;
    let per_cube_weight = tree.p.powi(-ni) * 2f64.powi(-(tree.d as i32) * ni);
    let retained = tree.levels[n as usize].len();
    Ok(NaturalMeasureWeights {
        level: n,
        per_cube_weight,
        retained,
        total_mass: per_cube_weight * retained as f64,
    })
}

/// The default anchor pair: the level-2 cells at the lower-left and
/// upper-right corners, whose joining directions stay at least pi/8 from
/// every coordinate axis.
pub fn corner_cells(d: usize) -> (LatticeCube, LatticeCube) {
    (
        LatticeCube {
            base: 2,
            level: 2,
            coords: vec![0; d],
        },
        LatticeCube {
            base: 2,
            level: 2,
            coords: vec![3; d],
        },
    )
}

/// Smallest angle any direction joining the two cells makes with a
/// coordinate axis, from the extreme corner pairs.
fn transversality_angle(q1: &LatticeCube, q2: &LatticeCube) -> f64 {
    let s = q1.side();
    let corners = |q: &LatticeCube| -> Vec<(f64, f64)> {
        let (x, y) = (q.coords[0] as f64 * s, q.coords[1] as f64 * s);
        vec![(x, y), (x + s, y), (x, y + s), (x + s, y + s)]
    };
    let mut worst = std::f64::consts::FRAC_PI_2;
    for (ax, ay) in corners(q1) {
        for (bx, by) in corners(q2) {
            let (dx, dy) = ((bx - ax).abs(), (by - ay).abs());
            if dx == 0.0 && dy == 0.0 {
                return 0.0;
            }
            let theta = dy.atan2(dx);
            worst = worst.min(theta).min(std::f64::consts::FRAC_PI_2 - theta);
        }
    }
    worst
}

/// Direction-set box-count slope between two retained anchor cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeEstimate {
    /// Distinct angular cells hit at each resolution in the window.
    pub counts: Vec<(u32, usize)>,
    pub slope: f64,
    pub rms_residual: f64,
    pub pairs: usize,
}

/// Counts the dyadic cells of the projective angle space `[0, pi)` hit by
/// directions joining deepest-level cube centers under `q1` to centers under
/// `q2`, at each resolution `m` in the window (cells of width `pi/2^m`), and
/// fits the log2-count slope.
pub fn direction_slope(
    tree: &PercolationTree,
    q1: &LatticeCube,
    q2: &LatticeCube,
    window: (u32, u32),
) -> Result<SlopeEstimate, PercError> {
    if tree.d != 2 {
        return Err(PercError::SlopeDimension(tree.d));
    }
    let (lo, hi) = window;
    if lo < 1 || lo >= hi {
        return Err(PercError::BadWindow { lo, hi });
    }
    if hi > tree.depth {
        return Err(PercError::ResolutionTooFine {
            m: hi,
            depth: tree.depth,
        });
    }
    if q1.base != 2
        || q2.base != 2
        || q1.level != q2.level
        || q1.coords.len() != tree.d
        || q2.coords.len() != tree.d
        || q1 == q2
    {
        return Err(PercError::BadAnchors);
    }
    for q in [q1, q2] {
        if !tree.is_retained(q) {
            return Err(PercError::NotRetained(q.clone()));
        }
    }
    let angle = transversality_angle(q1, q2);
    if angle < PI / 8.0 {
        return Err(PercError::Transversality { angle });
    }
    let under1 = tree.deep_under(q1);
    let under2 = tree.deep_under(q2);
    if under1.is_empty() {
        return Err(PercError::SubtreeExtinct { which: 1 });
    }
    if under2.is_empty() {
        return Err(PercError::SubtreeExtinct { which: 2 });
    }
    let pairs = under1.len() * under2.len();
    if pairs > PAIR_BUDGET {
        return Err(PercError::PairBudget(pairs));
    }
    let s = 2f64.powi(-(tree.depth as i32));
    let center = |c: &PercCube| ((c.coords[0] as f64 + 0.5) * s, (c.coords[1] as f64 + 0.5) * s);
    let mut angles = Vec::with_capacity(pairs);
    for a in &under1 {
        let (ax, ay) = center(a);
        for b in &under2 {
            let (bx, by) = center(b);
            angles.push((by - ay).atan2(bx - ax).rem_euclid(PI));
        }
    }
    let mut counts = Vec::new();
    for m in lo..=hi {
        let cells: BTreeSet<u64> = angles
            .iter()
            .map(|&th| (((th / PI) * 2f64.powi(m as i32)) as u64).min((1u64 << m) - 1))
            .collect();
        counts.push((m, cells.len()));
    }
    let xs: Vec<f64> = counts.iter().map(|&(m, _)| f64::from(m)).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).log2()).collect();
    let fit = fit_line(&xs, &ys).ok_or(PercError::BadWindow { lo, hi })?;
    Ok(SlopeEstimate {
        counts,
        slope: fit.slope,
        rms_residual: fit.rms_residual,
        pairs,
    })
}

/// Fraction of the `2^{-m}`-cells of the sphere of directions hit by
/// ordered pairs of deepest-level cube centers. For d=2 the cells are the
/// `2^m` dyadic sectors of `[0, 2pi)`; for d=3 they are the equal-area
/// product grid of `2^m` z-bands and `2^m` azimuth sectors.
pub fn sphere_coverage(tree: &PercolationTree, m: u32) -> Result<f64, PercError> {
    if !(2..=3).contains(&tree.d) {
        return Err(PercError::BadDimension(tree.d));
    }
    if m < 1 {
        return Err(PercError::BadWindow { lo: m, hi: m });
    }
    if m > tree.depth {
        return Err(PercError::ResolutionTooFine {
            m,
            depth: tree.depth,
        });
    }
    let deep = &tree.levels[tree.depth as usize];
    if deep.is_empty() {
        return Ok(0.0);
    }
    let n = deep.len();
    if n * (n - 1) / 2 > PAIR_BUDGET {
        return Err(PercError::PairBudget(n * (n - 1) / 2));
    }
    let s = 2f64.powi(-(tree.depth as i32));
    let cells_per_axis = 1u64 << m;
    let mut hit: BTreeSet<u64> = BTreeSet::new();
    if tree.d == 2 {
        let two_pi = 2.0 * PI;
        let mut insert = |th: f64| {
            let id = ((th.rem_euclid(two_pi) / two_pi) * cells_per_axis as f64) as u64;
            hit.insert(id.min(cells_per_axis - 1));
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = (deep[j].coords[0] as f64 - deep[i].coords[0] as f64) * s;
                let dy = (deep[j].coords[1] as f64 - deep[i].coords[1] as f64) * s;
                let th = dy.atan2(dx);
                insert(th);
                insert(th + PI);
            }
        }
        Ok(hit.len() as f64 / cells_per_axis as f64)
    } else {
        let mut insert = |x: f64, y: f64, z: f64| {
            let r = (x * x + y * y + z * z).sqrt();
            let band = (((z / r + 1.0) / 2.0) * cells_per_axis as f64) as u64;
            let az = ((y.atan2(x).rem_euclid(2.0 * PI) / (2.0 * PI)) * cells_per_axis as f64) as u64;
            hit.insert(band.min(cells_per_axis - 1) * cells_per_axis + az.min(cells_per_axis - 1));
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = (deep[j].coords[0] as f64 - deep[i].coords[0] as f64) * s;
                let dy = (deep[j].coords[1] as f64 - deep[i].coords[1] as f64) * s;
                let dz = (deep[j].coords[2] as f64 - deep[i].coords[2] as f64) * s;
                insert(dx, dy, dz);
                insert(-dx, -dy, -dz);
            }
        }
        Ok(hit.len() as f64 / (cells_per_axis * cells_per_axis) as f64)
    }
}
