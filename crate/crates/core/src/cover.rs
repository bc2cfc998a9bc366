//! The Hölder-graph cover pipeline: separated cube-pair families per scale,
//! accumulation of exceptional planes on a Grassmannian net, quantitative
//! injectivity certificates, graph functions with Hölder estimation and
//! extension, the Lipschitz cone branch, and near-collapse witness search.
//!
//! Convention used throughout: for a plane `V` of dimension `k`, `P` denotes
//! the orthogonal projection onto the complement `V^perp`; a certified sample
//! becomes the graph of a map from `P(A)` (coordinates in `V^perp`) into `V`.

use crate::content::ContentEstimate;
use crate::directions::{
    angle_neighborhood, content_estimate, direction_of_pair, line_plane_angle, CellFlags,
    DirectionError, GrassmannNet, KPlane,
};
use crate::fit::{fit_line, LineFit};
use crate::lattice::{PointSample, ScaleCover};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum CoverError {
    #[error("invalid cover parameters: {0}")]
    BadParams(String),
    #[error("cover has no level {0}")]
    MissingLevel(u32),
    #[error("cover pipeline requires a base-2 cover; got base {0}")]
    BadBase(u8),
    #[error("pair budget exceeded: {0} cubes at one level")]
    PairBudget(usize),
    #[error("net mesh {mesh} exceeds the smallest pair angle {delta:.6} at level {level}")]
    MeshTooCoarse { level: u32, delta: f64, mesh: f64 },
    #[error(
        "pair distance {dist:.6} at level {level} is below the angle-bound domain 4r = {needed:.6}"
    )]
    SeparationBelowDomain { level: u32, dist: f64, needed: f64 },
    #[error("plane is flagged exceptional (net cell {cell})")]
    FlaggedPlane { cell: usize },
    #[error("projection keys collide for sample points {i} and {j}")]
    KeyCollision { i: usize, j: usize },
    #[error("duplicate graph keys at entries {i} and {j}")]
    DuplicateKey { i: usize, j: usize },
    #[error("graph function needs at least one entry")]
    EmptyGraph,
    #[error("graph entries are inconsistent: {0}")]
    BadGraph(String),
    #[error("Hölder exponent {0} outside (0, 1]")]
    BadHolderExponent(f64),
    #[error("constant {given} is below the measured Hölder constant {needed}")]
    ConstantTooSmall { given: f64, needed: f64 },
    #[error("query has {found} coordinates, keys have {expected}")]
    KeyDimension { expected: usize, found: usize },
    #[error("cone half-angle {0} outside (0, pi/2)")]
    BadConeAngle(f64),
    #[error("witness order must be at least 1")]
    BadWitnessOrder,
    #[error("sample dimension {found} does not match plane dimension {expected}")]
    SampleDimension { expected: usize, found: usize },
    #[error(transparent)]
    Direction(#[from] DirectionError),
}

/// Parameters of one pipeline run: ambient dimension `d`, plane dimension
/// `k`, dimension bound `t`, content exponent `w`, and the level window.
///
/// Derived quantities: `g = (k-1)(d-k)` and the Hölder exponent
/// `alpha = 1 - 2t/(w - g)`, which also sets the per-level separation
/// threshold `2 * 2^{-alpha n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub d: usize,
    pub k: usize,
    pub t: f64,
    pub w: f64,
    pub n0: u32,
    pub nmax: u32,
}

impl CoverParams {
    pub fn new(
        d: usize,
        k: usize,
        t: f64,
        w: f64,
        n0: u32,
        nmax: u32,
    ) -> Result<Self, CoverError> {
        let p = Self { d, k, t, w, n0, nmax };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CoverError> {
        let bad = |m: String| Err(CoverError::BadParams(m));
        if !(1..=2).contains(&self.k) || self.k >= self.d || self.d > 4 {
            return bad(format!("need 1 <= k <= 2 and k < d <= 4; got d={}, k={}", self.d, self.k));
        }
        let codim = (self.d - self.k) as f64;
        if !(self.t > 0.0 && self.t < codim / 2.0) {
            return bad(format!("need 0 < t < (d-k)/2 = {}; got t={}", codim / 2.0, self.t));
        }
        let g = self.g();
        let wmax = if self.k == 1 {
            (self.d - 1) as f64
        } else {
            (self.k * (self.d - self.k)) as f64
        };
        if !(self.w > g && self.w < wmax) {
            return bad(format!("need {} < w < {}; got w={}", g, wmax, self.w));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha < 1.0) {
            return bad(format!("alpha = 1 - 2t/(w-g) = {alpha} outside (0, 1)"));
        }
        if self.n0 < 1 || self.n0 > self.nmax {
            return bad(format!("need 1 <= n0 <= nmax; got n0={}, nmax={}", self.n0, self.nmax));
        }
        Ok(())
    }

    pub fn g(&self) -> f64 {
        ((self.k - 1) * (self.d - self.k)) as f64
    }

    pub fn alpha(&self) -> f64 {
        1.0 - 2.0 * self.t / (self.w - self.g())
    }

    /// Separation threshold `2 * 2^{-alpha n}` for the level-n pair family.
    pub fn threshold(&self, n: u32) -> f64 {
        2.0 * 2f64.powf(-self.alpha() * f64::from(n))
    }

    /// Radius of the ball enclosing a doubled level-n cube.
    pub fn pair_radius(n: u32) -> f64 {
        2.0 * 2f64.powf(-f64::from(n))
    }
}

/// A separated pair of same-level cubes. `distance` is the set-distance
/// lower bound: center distance minus both circumradii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubePair {
    pub a_center: Vec<f64>,
    pub b_center: Vec<f64>,
    pub distance: f64,
}

/// All qualifying cube pairs at one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFamily {
    pub level: u32,
    pub threshold: f64,
    pub pairs: Vec<CubePair>,
    /// Set when the cover itself had no cubes at this level.
    pub empty_level: bool,
}

const PAIR_BUDGET: usize = 4096;

/// Extracts, for each level in the parameter window, the pairs of cover
/// cubes whose set-distance lower bound meets the separation threshold.
/// Symmetric pairs are stored once, in the cover's cube order.
pub fn build_pair_families(
    cover: &ScaleCover,
    params: &CoverParams,
) -> Result<Vec<PairFamily>, CoverError> {
    params.validate()?;
    if cover.base != 2 {
        return Err(CoverError::BadBase(cover.base));
    }
    let mut families = Vec::new();
    for n in params.n0..=params.nmax {
        let cubes = cover.levels.get(&n).ok_or(CoverError::MissingLevel(n))?;
        if cubes.len() > PAIR_BUDGET {
            return Err(CoverError::PairBudget(cubes.len()));
        }
        let threshold = params.threshold(n);
        let list: Vec<_> = cubes.iter().collect();
        let mut pairs = Vec::new();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let dist = a.center_distance(b) - a.circumradius() - b.circumradius();
                if dist >= threshold {
                    pairs.push(CubePair {
                        a_center: a.center(),
                        b_center: b.center(),
                        distance: dist,
                    });
                }
            }
        }
        families.push(PairFamily {
            level: n,
            threshold,
            pairs,
            empty_level: cubes.is_empty(),
        });
    }
    Ok(families)
}

/// Exceptional planes accumulated per level, with content estimates of each
/// level set and of the tails (union over all levels at least n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub params: CoverParams,
    pub mesh: f64,
    pub per_level: BTreeMap<u32, BTreeSet<usize>>,
    pub contents: BTreeMap<u32, ContentEstimate>,
    pub tail_contents: BTreeMap<u32, ContentEstimate>,
    /// OLS fit of log2(content) against the level, over nonzero levels;
    /// absent when fewer than two levels have nonzero content.
    pub decay: Option<LineFit>,
}

impl ExceptionalSet {
    /// Union of all flagged cells across levels.
    pub fn flagged_union(&self) -> BTreeSet<usize> {
        self.per_level.values().flatten().copied().collect()
    }

    /// Whether a plane's nearest net cell is flagged at any level.
    pub fn is_flagged(&self, net: &GrassmannNet, v: &KPlane) -> bool {
        let (cell, _) = net.nearest(v);
        self.per_level.values().any(|s| s.contains(&cell))
    }
}

/// Flags, for every separated pair, the net cells within the pair's angle
/// bound `4r/R` of the center-line direction (`r` = doubled-cube radius,
/// `R` = pair distance), then estimates the w-content of each level set.
pub fn accumulate_exceptional(
    families: &[PairFamily],
    net: &GrassmannNet,
    params: &CoverParams,
) -> Result<ExceptionalSet, CoverError> {
    params.validate()?;
    if net.d != params.d || net.k != params.k {
        return Err(CoverError::BadParams(format!(
            "net is on G({},{}) but params ask for G({},{})",
            net.d, net.k, params.d, params.k
        )));
    }
    // Domain and mesh pre-checks before any flags are set.
    for fam in families {
        let r = CoverParams::pair_radius(fam.level);
        let mut min_delta = f64::INFINITY;
        for pair in &fam.pairs {
            if pair.distance < 4.0 * r {
                return Err(CoverError::SeparationBelowDomain {
                    level: fam.level,
                    dist: pair.distance,
                    needed: 4.0 * r,
                });
            }
            min_delta = min_delta.min(4.0 * r / pair.distance);
        }
        if !fam.pairs.is_empty() && net.epsilon > min_delta {
            return Err(CoverError::MeshTooCoarse {
                level: fam.level,
                delta: min_delta,
                mesh: net.epsilon,
            });
        }
    }
    let mut per_level = BTreeMap::new();
    for fam in families {
        let r = CoverParams::pair_radius(fam.level);
        let flags = CellFlags::new(net.len());
        fam.pairs.par_iter().try_for_each(|pair| {
            let ell = direction_of_pair(&pair.a_center, &pair.b_center)?;
            let delta = 4.0 * r / pair.distance;
            for id in angle_neighborhood(net, &ell, delta)? {
                flags.set(id);
            }
            Ok::<(), CoverError>(())
        })?;
        per_level.insert(fam.level, flags.flagged());
    }
    let mut contents = BTreeMap::new();
    for (&n, cells) in &per_level {
        contents.insert(n, content_estimate(net, cells, params.w)?);
    }
    let mut tail_contents = BTreeMap::new();
    let mut tail: BTreeSet<usize> = BTreeSet::new();
    for (&n, cells) in per_level.iter().rev() {
        tail.extend(cells.iter().copied());
        tail_contents.insert(n, content_estimate(net, &tail, params.w)?);
    }
    let fitted: Vec<(f64, f64)> = contents
        .iter()
        .filter(|(_, c)| c.value > 0.0)
        .map(|(&n, c)| (f64::from(n), c.value.log2()))
        .collect();
    let decay = fit_line(
        &fitted.iter().map(|p| p.0).collect::<Vec<_>>(),
        &fitted.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    Ok(ExceptionalSet {
        params: params.clone(),
        mesh: net.epsilon,
        per_level,
        contents,
        tail_contents,
        decay,
    })
}

/// A pair of sample points recorded as evidence for a certificate verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub projected: f64,
    /// Level at which a separation violation fired, if that is the clause.
    pub scale: Option<u32>,
}

/// Which certificate clause a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateClause {
    /// Two points project to exactly the same key.
    Collision,
    /// `|x - x'| >= 3*2^{-alpha n}` but `|P(x) - P(x')| < 2*2^{-n}`.
    Separation,
    /// `2^{-n} <= |P(x) - P(x')| < 2*2^{-n}` with `n >= n0`, but
    /// `|x - x'| > 3 |P(x) - P(x')|^alpha`.
    Holder,
}

/// Per-level tally of separation-clause checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub n: u32,
    /// Pairs whose distance met the premise `|x - x'| >= 3*2^{-alpha n}`.
    pub premise_pairs: usize,
    pub violations: usize,
}

/// Outcome of the quantitative injectivity check for one plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderCertificate {
    pub plane: KPlane,
    pub alpha: f64,
    /// Constant asserted in the small-distance Hölder clause.
    pub constant: f64,
    pub n0: u32,
    pub nmax: u32,
    pub pairs_checked: usize,
    pub per_scale: Vec<ScaleRecord>,
    pub passed: bool,
    pub witness: Option<PairWitness>,
    pub failed_clause: Option<CertificateClause>,
}

fn sample_vectors(sample: &PointSample) -> Vec<DVector<f64>> {
    sample
        .to_f64()
        .into_iter()
        .map(DVector::from_vec)
        .collect()
}

fn check_plane_dims(sample: &PointSample, v: &KPlane) -> Result<(), CoverError> {
    if sample.dim() != v.d() {
        return Err(CoverError::SampleDimension {
            expected: v.d(),
            found: sample.dim(),
        });
    }
    Ok(())
}

/// Checks, over every sample pair, the three clauses that make the sample a
/// Hölder graph over the complement of `v`:
/// no exact key collisions; the separation implication at every level in the
/// window; and the constant-3 Hölder inequality for pairs whose projected
/// distance falls in a dyadic bracket at level `n0` or deeper.
///
/// When a net and accumulator are supplied, planes flagged exceptional are
/// rejected up front. Failure is a verdict, not an error: the certificate
/// carries the first violating pair in lexicographic pair order.
pub fn injectivity_certificate(
    sample: &PointSample,
    v: &KPlane,
    params: &CoverParams,
    accumulator: Option<(&GrassmannNet, &ExceptionalSet)>,
) -> Result<HolderCertificate, CoverError> {
    params.validate()?;
    check_plane_dims(sample, v)?;
    if v.k() != params.k {
        return Err(CoverError::BadParams(format!(
            "plane dimension {} does not match params k={}",
            v.k(),
            params.k
        )));
    }
    if let Some((net, exc)) = accumulator {
        let (cell, _) = net.nearest(v);
        if exc.flagged_union().contains(&cell) {
            return Err(CoverError::FlaggedPlane { cell });
        }
    }
    let comp = v.orthogonal_complement()?;
    let points = sample_vectors(sample);
    let alpha = params.alpha();
    let mut per_scale: Vec<ScaleRecord> = (params.n0..=params.nmax)
        .map(|n| ScaleRecord {
            n,
            premise_pairs: 0,
            violations: 0,
        })
        .collect();
    let mut witness: Option<PairWitness> = None;
    let mut failed_clause: Option<CertificateClause> = None;
    let mut pairs_checked = 0usize;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            pairs_checked += 1;
            let diff = &points[i] - &points[j];
            let dist = diff.norm();
            let projected = comp.coords(&diff).norm();
            let make = |scale: Option<u32>| PairWitness {
                i,
                j,
                distance: dist,
                projected,
                scale,
            };
            if projected == 0.0 && dist > 0.0 && witness.is_none() {
                witness = Some(make(None));
                failed_clause = Some(CertificateClause::Collision);
            }
            for rec in per_scale.iter_mut() {
                let n = f64::from(rec.n);
                if dist >= 3.0 * 2f64.powf(-alpha * n) {
                    rec.premise_pairs += 1;
                    if projected < 2.0 * 2f64.powf(-n) {
                        rec.violations += 1;
                        if witness.is_none() {
                            witness = Some(make(Some(rec.n)));
                            failed_clause = Some(CertificateClause::Separation);
                        }
                    }
                }
            }
            if projected > 0.0 {
                let bracket = (-projected.log2()).ceil();
                if bracket >= f64::from(params.n0)
                    && dist > 3.0 * projected.powf(alpha)
                    && witness.is_none()
                {
                    witness = Some(make(None));
                    failed_clause = Some(CertificateClause::Holder);
                }
            }
        }
    }
    Ok(HolderCertificate {
        plane: v.clone(),
        alpha,
        constant: 3.0,
        n0: params.n0,
        nmax: params.nmax,
        pairs_checked,
        per_scale,
        passed: witness.is_none(),
        witness,
        failed_clause,
    })
}

/// A sample realized as the graph of a partial map: keys are coordinates of
/// the projection to `V^perp`, values are coordinates in the frame of `V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFunction {
    /// Frames (complement, plane) when built from a sample.
    pub frames: Option<(KPlane, KPlane)>,
    keys: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

fn scrub_zero(mut v: Vec<f64>) -> Vec<f64> {
    // Normalize -0.0 so exact-key comparisons are value comparisons.
    for x in v.iter_mut() {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    v
}

impl GraphFunction {
    /// Builds a graph directly from key/value rows (test and replay entry
    /// point); rejects empty, ragged, or duplicate-key inputs.
    pub fn from_entries(keys: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self, CoverError> {
        if keys.is_empty() {
            return Err(CoverError::EmptyGraph);
        }
        if keys.len() != values.len() {
            return Err(CoverError::BadGraph(format!(
                "{} keys vs {} values",
                keys.len(),
                values.len()
            )));
        }
        let kd = keys[0].len();
        let vd = values[0].len();
        if keys.iter().any(|k| k.len() != kd) || values.iter().any(|v| v.len() != vd) {
            return Err(CoverError::BadGraph("ragged rows".into()));
        }
        let keys: Vec<Vec<f64>> = keys.into_iter().map(scrub_zero).collect();
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                if keys[i] == keys[j] {
                    return Err(CoverError::DuplicateKey { i, j });
                }
            }
        }
        Ok(Self {
            frames: None,
            keys,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key_dim(&self) -> usize {
        self.keys[0].len()
    }

    pub fn value_dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn keys(&self) -> &[Vec<f64>] {
        &self.keys
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Projects every sample point, keying by its coordinates in `V^perp` and
/// storing its `V`-coordinates; errors with the colliding pair when the
/// projection is not injective on the sample.
pub fn build_graph_function(sample: &PointSample, v: &KPlane) -> Result<GraphFunction, CoverError> {
    check_plane_dims(sample, v)?;
    if sample.is_empty() {
        return Err(CoverError::EmptyGraph);
    }
    let comp = v.orthogonal_complement()?;
    let points = sample_vectors(sample);
    let keys: Vec<Vec<f64>> = points
        .iter()
        .map(|x| scrub_zero(comp.coords(x).iter().copied().collect()))
        .collect();
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|x| v.coords(x).iter().copied().collect())
        .collect();
    for i in 0..keys.len() {
        for j in (i + 1)..keys.len() {
            if keys[i] == keys[j] {
                return Err(CoverError::KeyCollision { i, j });
            }
        }
    }
    Ok(GraphFunction {
        frames: Some((comp, v.clone())),
        keys,
        values,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_alpha(alpha: f64) -> Result<(), CoverError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CoverError::BadHolderExponent(alpha))
    }
}

/// Smallest constant C with `||f(u) - f(u')||_max <= C ||u - u'||^alpha`
/// over all stored key pairs; 0 for a singleton.
pub fn holder_constant(fmap: &GraphFunction, alpha: f64) -> Result<f64, CoverError> {
    check_alpha(alpha)?;
    if fmap.is_empty() {
        return Err(CoverError::EmptyGraph);
    }
    let mut best = 0.0f64;
    for i in 0..fmap.len() {
        for j in (i + 1)..fmap.len() {
            let gap = euclid(&fmap.keys[i], &fmap.keys[j]);
            if gap == 0.0 {
                return Err(CoverError::DuplicateKey { i, j });
            }
            let value_gap = fmap.values[i]
                .iter()
                .zip(&fmap.values[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            best = best.max(value_gap / gap.powf(alpha));
        }
    }
    Ok(best)
}

/// Infimal-convolution extension: componentwise
/// `min over stored z of f_i(z) + C ||y - z||^alpha`. Exact stored keys
/// return their stored value unchanged. Requires C at or above the measured
/// Hölder constant so the extension agrees with the graph on its keys.
pub fn holder_extend(
    fmap: &GraphFunction,
    alpha: f64,
    c: f64,
    query: &[f64],
) -> Result<Vec<f64>, CoverError> {
    check_alpha(alpha)?;
    if query.len() != fmap.key_dim() {
        return Err(CoverError::KeyDimension {
            expected: fmap.key_dim(),
            found: query.len(),
        });
    }
    let needed = holder_constant(fmap, alpha)?;
    if c < needed {
        return Err(CoverError::ConstantTooSmall { given: c, needed });
    }
    let query = scrub_zero(query.to_vec());
    if let Some(idx) = fmap.keys.iter().position(|k| *k == query) {
        return Ok(fmap.values[idx].clone());
    }
    let mut out = vec![f64::INFINITY; fmap.value_dim()];
    for (key, value) in fmap.keys.iter().zip(&fmap.values) {
        let bump = c * euclid(key, &query).powf(alpha);
        for (o, val) in out.iter_mut().zip(value) {
            *o = o.min(val + bump);
        }
    }
    Ok(out)
}

/// Verdict of the cone test: either every pair direction stays at least the
/// cone angle away from the plane and the graph map is Lipschitz, or some
/// pair violates the cone condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ConeOutcome {
    Lipschitz {
        constant: f64,
        /// `1/tan(eps)` when k = 1; the certified a-priori bound.
        bound: Option<f64>,
    },
    Violation {
        i: usize,
        j: usize,
        angle: f64,
    },
}

/// If no sample pair direction makes an angle below `eps` with `v`, the
/// sample is the graph of a Lipschitz map over `V^perp`; returns its
/// constant, or the first violating pair.
pub fn lipschitz_from_cone(
    sample: &PointSample,
    v: &KPlane,
    eps: f64,
) -> Result<ConeOutcome, CoverError> {
    if !(eps > 0.0 && eps < std::f64::consts::FRAC_PI_2) {
        return Err(CoverError::BadConeAngle(eps));
    }
    check_plane_dims(sample, v)?;
    let points = sample_vectors(sample);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dir = direction_of_pair(points[i].as_slice(), points[j].as_slice())?;
            let angle = line_plane_angle(&dir, v)?;
            if angle < eps {
                return Ok(ConeOutcome::Violation { i, j, angle });
            }
        }
    }
    let comp = v.orthogonal_complement()?;
    let mut constant = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let diff = &points[i] - &points[j];
            let key_gap = comp.coords(&diff).norm();
            let value_gap = v.coords(&diff).norm();
            // key_gap > 0: a zero key gap means the pair is inside the cone,
            // which returned a violation above.
            constant = constant.max(value_gap / key_gap);
        }
    }
    let bound = (v.k() == 1).then(|| 1.0 / eps.tan());
    Ok(ConeOutcome::Lipschitz { constant, bound })
}

/// First sample pair (lexicographic order) witnessing the near-collapse
/// inequality `||x - y|| > N ||P(x) - P(y)||^{1/N}` with projected distance
/// strictly below 1, or None. `P` projects onto `V^perp`, so planes near a
/// pair direction produce tiny projected distances and easy witnesses.
pub fn en_witness(
    sample: &PointSample,
    v: &KPlane,
    order: usize,
) -> Result<Option<PairWitness>, CoverError> {
    if order < 1 {
        return Err(CoverError::BadWitnessOrder);
    }
    check_plane_dims(sample, v)?;
    let comp = v.orthogonal_complement()?;
    let points = sample_vectors(sample);
    let n = order as f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let diff = &points[i] - &points[j];
            let dist = diff.norm();
            let projected = comp.coords(&diff).norm();
            if projected < 1.0 && dist > n * projected.powf(1.0 / n) {
                return Ok(Some(PairWitness {
                    i,
                    j,
                    distance: dist,
                    projected,
                    scale: None,
                }));
            }
        }
    }
    Ok(None)
}
