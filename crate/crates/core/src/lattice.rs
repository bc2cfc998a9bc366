//! Lattice cube covers of point samples and box-counting dimension fits.
//!
//! Coordinates are exact rationals, so deciding which level-`n` cube contains
//! a point never depends on float rounding. Cubes are half open,
//! `[k b^-n, (k+1) b^-n)` in each axis, except that the right face of
//! `[0,1]^d` belongs to the last cube; a point on a cube boundary therefore
//! lands in exactly one cube.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Exact coordinate in `[0, 1]`.
pub type Coord = Ratio<i128>;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LatticeError {
    #[error("base {0} is not supported; use 2 or 3")]
    BadBase(u8),
    #[error("coordinate {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("point of dimension {found} in a sample of dimension {expected}")]
    MixedDimension { expected: usize, found: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("level {level} at base {base} exceeds the exact-arithmetic precision budget")]
    PrecisionBudget { base: u8, level: u32 },
    #[error("window {lo}..={hi} holds fewer than three covered levels")]
    DegenerateWindow { lo: u32, hi: u32 },
    #[error("contraction ratio {0} lies outside (0, 1/2]")]
    BadRatio(String),
    #[error("dimension {0} is not supported here; use 1 through 4")]
    BadDimension(usize),
    #[error("requested set size is over the {0}-point construction budget")]
    SetBudget(usize),
}

/// A cube of the level-`n` base-`b` subdivision of `[0,1]^d`.
///
/// `coords[i]` is the integer index along axis `i`, in `0..b^level`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeCube {
    pub base: u8,
    pub level: u32,
    pub coords: Vec<u64>,
}

impl LatticeCube {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Side length `b^-level`.
    pub fn side(&self) -> f64 {
        (self.base as f64).powi(-(self.level as i32))
    }

    /// Center of the cube in float coordinates.
    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.coords.iter().map(|&k| (k as f64 + 0.5) * s).collect()
    }

    /// Half of the diagonal; the radius of the circumscribed ball.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.side() * (self.dim() as f64).sqrt()
    }

    /// Euclidean distance between cube centers.
    pub fn center_distance(&self, other: &LatticeCube) -> f64 {
        let a = self.center();
        let b = other.center();
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for LatticeCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}l{}@{:?}", self.base, self.level, self.coords)
    }
}

/// A finite point set in `[0,1]^d` with exact rational coordinates.
#[derive(Debug, Clone)]
pub struct PointSample {
    dim: usize,
    points: Vec<Vec<Coord>>,
}

impl PointSample {
    pub fn new(points: Vec<Vec<Coord>>) -> Result<Self, LatticeError> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(LatticeError::EmptySample),
        };
        if dim == 0 || dim > 4 {
            return Err(LatticeError::BadDimension(dim));
        }
        for p in &points {
            if p.len() != dim {
                return Err(LatticeError::MixedDimension {
                    expected: dim,
                    found: p.len(),
                });
            }
            for c in p {
                if c.is_negative() || *c > Coord::one() {
                    return Err(LatticeError::OutOfRange(c.to_string()));
                }
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Coord>] {
        &self.points
    }

    /// Float view of the sample, for geometric work that does not need
    /// exact arithmetic.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.iter().map(ratio_to_f64).collect())
            .collect()
    }
}

pub fn ratio_to_f64(r: &Coord) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_base(base: u8) -> Result<(), LatticeError> {
    if base == 2 || base == 3 {
        Ok(())
    } else {
        Err(LatticeError::BadBase(base))
    }
}

/// Index of the level-`n` cube containing `x` along one axis.
///
/// Exact: computes `floor(x * b^n)` in integer arithmetic, sending `x = 1`
/// to the last cube.
pub fn cube_index(x: &Coord, base: u8, level: u32) -> Result<u64, LatticeError> {
    check_base(base)?;
    let budget = LatticeError::PrecisionBudget { base, level };
    let pow = (base as i128).checked_pow(level).ok_or(budget)?;
    let scaled = x
        .numer()
        .checked_mul(pow)
        .ok_or(LatticeError::PrecisionBudget { base, level })?;
    // Floor division; x >= 0 so truncation agrees with floor.
    let mut idx = scaled / x.denom();
    if idx == pow {
        idx -= 1; // right face of [0,1] belongs to the last cube
    }
    Ok(idx as u64)
}

/// The level-`n` cube of the base-`b` lattice containing a point.
pub fn cube_of_point(p: &[Coord], base: u8, level: u32) -> Result<LatticeCube, LatticeError> {
    let coords = p
        .iter()
        .map(|x| cube_index(x, base, level))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LatticeCube {
        base,
        level,
        coords,
    })
}

/// Exactly the level-`n` cubes containing at least one sample point.
pub fn cover_at_scale(
    sample: &PointSample,
    base: u8,
    level: u32,
) -> Result<BTreeSet<LatticeCube>, LatticeError> {
    let mut cubes = BTreeSet::new();
    for p in sample.points() {
        cubes.insert(cube_of_point(p, base, level)?);
    }
    Ok(cubes)
}

/// Cube covers of one sample across a range of levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleCover {
    pub base: u8,
    pub levels: BTreeMap<u32, BTreeSet<LatticeCube>>,
}

impl ScaleCover {
    pub fn build(
        sample: &PointSample,
        base: u8,
        lo: u32,
        hi: u32,
    ) -> Result<Self, LatticeError> {
        check_base(base)?;
        let mut levels = BTreeMap::new();
        for n in lo..=hi {
            levels.insert(n, cover_at_scale(sample, base, n)?);
        }
        Ok(Self { base, levels })
    }

    pub fn counts(&self) -> BTreeMap<u32, usize> {
        self.levels.iter().map(|(n, c)| (*n, c.len())).collect()
    }

    pub fn dim(&self) -> Option<usize> {
        self.levels
            .values()
            .flat_map(|c| c.iter())
            .next()
            .map(|c| c.dim())
    }
}

/// Box-counting slope fitted over a window of levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionFit {
    pub slope: f64,
    /// Fitted log-count at level 0; exp of it estimates the covering constant.
    pub intercept: f64,
    pub rms_residual: f64,
    pub levels_used: Vec<u32>,
    /// Set when every count in the window is 1, where the slope is reported
    /// as 0 by convention.
    pub degenerate: bool,
}

/// Least-squares slope of `log N_n` against `n log b` over `window`.
///
/// The slope is clamped into `[0, d]`; counts from a genuine cover cannot
/// move outside it by more than fit noise.
pub fn box_dimension_estimate(
    cover: &ScaleCover,
    lo: u32,
    hi: u32,
) -> Result<DimensionFit, LatticeError> {
    let levels: Vec<u32> = cover
        .levels
        .range(lo..=hi)
        .map(|(n, _)| *n)
        .collect();
    if levels.len() < 3 {
        return Err(LatticeError::DegenerateWindow { lo, hi });
    }
    let counts: Vec<usize> = levels.iter().map(|n| cover.levels[n].len()).collect();
    if counts.iter().any(|&c| c == 0) {
        // A level with no cubes covers nothing; the log fit is undefined.
        return Err(LatticeError::DegenerateWindow { lo, hi });
    }
    let degenerate = counts.iter().all(|&c| c == 1);
    if degenerate {
        return Ok(DimensionFit {
            slope: 0.0,
            intercept: 0.0,
            rms_residual: 0.0,
            levels_used: levels,
            degenerate: true,
        });
    }
    let logb = (cover.base as f64).ln();
    let xs: Vec<f64> = levels.iter().map(|&n| n as f64 * logb).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = crate::fit::fit_line(&xs, &ys).ok_or(LatticeError::DegenerateWindow { lo, hi })?;
    let d = cover.dim().unwrap_or(1) as f64;
    Ok(DimensionFit {
        slope: fit.slope.clamp(0.0, d),
        intercept: fit.intercept,
        rms_residual: fit.rms_residual,
        levels_used: levels,
        degenerate: false,
    })
}

/// Built-in generator families for test sets with exact coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StandardSet {
    /// Endpoint orbit of the two-map contraction `x -> rx`, `x -> rx + 1 - r`.
    Cantor1d { ratio: Coord },
    /// `2^d` corner contractions of `[0,1]^d` with ratio `r`.
    CornerDust { dim: usize, ratio: Coord },
    /// Affine copy of `{0} union {2^-j e_j}` with `e_j` a fixed dense
    /// enumeration of rational unit vectors; the copy sits in `[0,1]^d` and
    /// has the same direction set.
    DenseDirectionCountable { dim: usize, count: u32 },
    /// All `2^(d n)` corners `k 2^-n` of the level-`n` dyadic grid.
    Grid { dim: usize, level: u32 },
}

const SET_BUDGET: usize = 1 << 22;

fn check_ratio(r: &Coord) -> Result<(), LatticeError> {
    if r.is_positive() && *r <= Coord::new(1, 2) {
        Ok(())
    } else {
        Err(LatticeError::BadRatio(r.to_string()))
    }
}

/// Rational unit vectors from the Calkin-Wilf enumeration of the rationals
/// through the tangent half-angle map; dense on the circle as `j` grows.
fn rational_unit_vectors_2d(count: u32) -> Vec<(Coord, Coord)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut cw = Coord::one(); // Calkin-Wilf walk over positive rationals
    let mut sign = 1i128;
    for _ in 0..count {
        let t = cw * sign;
        let (p, q) = (*t.numer(), *t.denom());
        let den = q * q + p * p;
        out.push((Coord::new(q * q - p * p, den), Coord::new(2 * p * q, den)));
        if sign > 0 {
            sign = -1;
        } else {
            sign = 1;
            // next(q) = 1 / (2 floor(q) - q + 1)
            let fl = cw.floor();
            cw = (fl + fl - cw + Coord::one()).recip();
        }
    }
    out
}

/// Rational unit vectors from inverse stereographic projection of a diagonal
/// enumeration of rational pairs.
fn rational_unit_vectors_3d(count: u32) -> Vec<(Coord, Coord, Coord)> {
    let mut params = vec![Coord::zero()];
    let mut cw = Coord::one();
    let mut sign = 1i128;
    while params.len() < 2 * count as usize + 2 {
        params.push(cw * sign);
        if sign > 0 {
            sign = -1;
        } else {
            sign = 1;
            let fl = cw.floor();
            cw = (fl + fl - cw + Coord::one()).recip();
        }
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut diag = 1usize;
    let mut i = 0usize;
    while out.len() < count as usize {
        let (t, u) = (params[i], params[diag - i]);
        let norm = t * t + u * u + Coord::one();
        out.push((
            (t + t) / norm,
            (u + u) / norm,
            (t * t + u * u - Coord::one()) / norm,
        ));
        if i == diag {
            diag += 1;
            i = 0;
        } else {
            i += 1;
        }
    }
    out
}

/// Builds a standard set to the given construction depth.
pub fn generate_standard_set(
    set: &StandardSet,
    depth: u32,
) -> Result<PointSample, LatticeError> {
    match set {
        StandardSet::Cantor1d { ratio } => {
            check_ratio(ratio)?;
            if depth > 34 {
                return Err(LatticeError::SetBudget(SET_BUDGET));
            }
            let mut vals = vec![Coord::zero()];
            let gap = Coord::one() - *ratio;
            for _ in 0..depth {
                let mut next = Vec::with_capacity(vals.len() * 2);
                for v in &vals {
                    next.push(*v * *ratio);
                    next.push(*v * *ratio + gap);
                }
                if next.len() > SET_BUDGET {
                    return Err(LatticeError::SetBudget(SET_BUDGET));
                }
                vals = next;
            }
            vals.sort();
            vals.dedup();
            PointSample::new(vals.into_iter().map(|v| vec![v]).collect())
        }
        StandardSet::CornerDust { dim, ratio } => {
            let d = *dim;
            if d == 0 || d > 4 {
                return Err(LatticeError::BadDimension(d));
            }
            check_ratio(ratio)?;
            // Per-axis digit values are independent, so build one axis and
            // take the d-fold product.
            let mut axis = vec![Coord::zero()];
            let gap = Coord::one() - *ratio;
            for _ in 0..depth {
                let mut next = Vec::with_capacity(axis.len() * 2);
                for v in &axis {
                    next.push(*v * *ratio);
                    next.push(*v * *ratio + gap);
                }
                axis = next;
            }
            axis.sort();
            axis.dedup();
            if axis.len().checked_pow(d as u32).map_or(true, |n| n > SET_BUDGET) {
                return Err(LatticeError::SetBudget(SET_BUDGET));
            }
            let mut pts: Vec<Vec<Coord>> = vec![vec![]];
            for _ in 0..d {
                let mut next = Vec::with_capacity(pts.len() * axis.len());
                for p in &pts {
                    for v in &axis {
                        let mut q = p.clone();
                        q.push(*v);
                        next.push(q);
                    }
                }
                pts = next;
            }
            PointSample::new(pts)
        }
        StandardSet::DenseDirectionCountable { dim, count } => {
            let half = Coord::new(1, 2);
            let mut pts = Vec::with_capacity(*count as usize + 1);
            match dim {
                2 => {
                    pts.push(vec![half, half]);
                    for (j, (ex, ey)) in rational_unit_vectors_2d(*count).iter().enumerate() {
                        let scale = Coord::new(1, 2i128 << (j + 1));
                        pts.push(vec![half + *ex * scale, half + *ey * scale]);
                    }
                }
                3 => {
                    pts.push(vec![half, half, half]);
                    for (j, (ex, ey, ez)) in rational_unit_vectors_3d(*count).iter().enumerate() {
                        let scale = Coord::new(1, 2i128 << (j + 1));
                        pts.push(vec![
                            half + *ex * scale,
                            half + *ey * scale,
                            half + *ez * scale,
                        ]);
                    }
                }
                d => return Err(LatticeError::BadDimension(*d)),
            }
            PointSample::new(pts)
        }
        StandardSet::Grid { dim, level } => {
            let d = *dim;
            if d == 0 || d > 4 {
                return Err(LatticeError::BadDimension(d));
            }
            let n = 1usize
                .checked_shl(*level)
                .filter(|side| side.checked_pow(d as u32).map_or(false, |t| t <= SET_BUDGET))
                .ok_or(LatticeError::SetBudget(SET_BUDGET))?;
            let _ = depth; // grids have no construction depth
            let den = 1i128 << *level;
            let mut pts: Vec<Vec<Coord>> = vec![vec![]];
            for _ in 0..d {
                let mut next = Vec::with_capacity(pts.len() * n);
                for p in &pts {
                    for k in 0..n {
                        let mut q = p.clone();
                        q.push(Coord::new(k as i128, den));
                        next.push(q);
                    }
                }
                pts = next;
            }
            PointSample::new(pts)
        }
    }
}
