//! Directions, k-planes of R^d, epsilon-nets on the Grassmannian under the
//! projection metric, and content estimates for flagged cell sets.
//!
//! The metric throughout is `rho(V, W) = ||P_V - P_W||` (operator norm of the
//! difference of orthogonal projections), computed via principal angles:
//! `rho = sqrt(1 - sigma_min(V^T W)^2)` for orthonormal frames `V`, `W`. For
//! lines this is the sine of the angle between them.

use crate::content::{self, ContentEstimate};
use crate::seeded;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};

const UNIT_TOL: f64 = 1e-12;
const GRAM_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum DirectionError {
    #[error("the two points coincide; no direction is defined")]
    CoincidentPoints,
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("dimension mismatch: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame is not orthonormal: gram deviation {0:.3e}")]
    NotOrthonormal(f64),
    #[error("spanning set is rank deficient")]
    RankDeficient,
    #[error("grassmannian G({d},{k}) is not supported; need 1 <= k <= 2, k < d <= 4")]
    BadGrassmannian { d: usize, k: usize },
    #[error("mesh {0} is outside (0, 1)")]
    BadMesh(f64),
    #[error("net audit failed after {attempts} builds; worst covering distance {worst:.4}")]
    NetAuditFailed { attempts: u32, worst: f64 },
    #[error("angle bound needs separation >= 4r; got r={r}, distance={dist}")]
    BoundNotApplicable { r: f64, dist: f64 },
    #[error("content exponent {w} outside (0, {max}]")]
    BadExponent { w: f64, max: f64 },
    #[error("cell id {id} out of range for a net of {len} cells")]
    BadCell { id: usize, len: usize },
}

/// A direction in R^d modulo sign: a unit vector whose first coordinate of
/// magnitude above tolerance is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    vector: DVector<f64>,
}

impl ProjectivePoint {
    pub fn new(v: DVector<f64>) -> Result<Self, DirectionError> {
        let norm = v.norm();
        if norm <= UNIT_TOL {
            return Err(DirectionError::ZeroVector);
        }
        let mut u = v / norm;
        if let Some(lead) = u.iter().find(|x| x.abs() > UNIT_TOL) {
            if *lead < 0.0 {
                u.neg_mut();
            }
        }
        Ok(Self { vector: u })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self, DirectionError> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    /// Angle of a planar direction in `[0, pi)`.
    pub fn planar_angle(&self) -> f64 {
        assert_eq!(self.dim(), 2, "planar angle needs d = 2");
        let th = self.vector[1].atan2(self.vector[0]);
        th.rem_euclid(std::f64::consts::PI)
    }
}

/// Canonical projective representative of `(x - y) / ||x - y||`.
pub fn direction_of_pair(x: &[f64], y: &[f64]) -> Result<ProjectivePoint, DirectionError> {
    if x.len() != y.len() {
        return Err(DirectionError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let diff = DVector::from_iterator(x.len(), x.iter().zip(y).map(|(a, b)| a - b));
    ProjectivePoint::new(diff).map_err(|_| DirectionError::CoincidentPoints)
}

/// A k-dimensional linear subspace of R^d held as an orthonormal frame
/// (d x k matrix with orthonormal columns).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KPlane {
    frame: DMatrix<f64>,
}

impl KPlane {
    /// Wraps an already orthonormal frame, validating the Gram matrix.
    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self, DirectionError> {
        let k = frame.ncols();
        if k == 0 || k > frame.nrows() {
            return Err(DirectionError::RankDeficient);
        }
        let gram = frame.transpose() * &frame;
        let dev = (&gram - DMatrix::<f64>::identity(k, k)).abs().max();
        if dev > GRAM_TOL {
            return Err(DirectionError::NotOrthonormal(dev));
        }
        Ok(Self { frame })
    }

    /// Orthonormalizes a spanning set of column vectors.
    pub fn from_spanning(cols: DMatrix<f64>) -> Result<Self, DirectionError> {
        let (d, k) = (cols.nrows(), cols.ncols());
        if k == 0 || k > d {
            return Err(DirectionError::RankDeficient);
        }
        let scale = cols.abs().max().max(1e-300);
        let qr = cols.clone().qr();
        let r = qr.r();
        for i in 0..k {
            if r[(i, i)].abs() <= 1e-10 * scale {
                return Err(DirectionError::RankDeficient);
            }
        }
        Ok(Self { frame: qr.q() })
    }

    /// The line spanned by a direction.
    pub fn line(p: &ProjectivePoint) -> Self {
        let d = p.dim();
        Self {
            frame: DMatrix::from_fn(d, 1, |i, _| p.vector()[i]),
        }
    }

    /// The line in R^2 at the given angle from the first axis.
    pub fn line_at_angle(theta: f64) -> Self {
        Self {
            frame: DMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]),
        }
    }

    pub fn d(&self) -> usize {
        self.frame.nrows()
    }

    pub fn k(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// The orthogonal projection matrix onto the plane.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Orthonormal frame of the orthogonal complement.
    pub fn orthogonal_complement(&self) -> Result<KPlane, DirectionError> {
        let (d, k) = (self.d(), self.k());
        if k == d {
            return Err(DirectionError::RankDeficient);
        }
        if d == 2 {
            // Quarter-turn rotation: exact, unlike the QR route, which
            // matters for axis-aligned lines projecting to exact zeros.
            let (a, b) = (self.frame[(0, 0)], self.frame[(1, 0)]);
            let mut frame = DMatrix::from_column_slice(2, 1, &[b, -a]);
            if let Some(lead) = frame.iter().find(|x| x.abs() > UNIT_TOL) {
                if *lead < 0.0 {
                    frame.neg_mut();
                }
            }
            return Ok(KPlane { frame });
        }
        // QR of [frame | I]: the first k columns of Q reproduce the plane, the
        // remaining d - k are an orthonormal basis of its complement.
        let ext = DMatrix::from_fn(d, k + d, |i, j| {
            if j < k {
                self.frame[(i, j)]
            } else if i == j - k {
                1.0
            } else {
                0.0
            }
        });
        let q = ext.qr().q();
        let mut frame = q.columns(k, d - k).into_owned();
        // Sign of each column is a QR artifact; fix it so complements are
        // reproducible (first significant entry positive).
        for mut col in frame.column_iter_mut() {
            if let Some(lead) = col.iter().find(|x| x.abs() > UNIT_TOL) {
                if *lead < 0.0 {
                    col.neg_mut();
                }
            }
        }
        Ok(KPlane { frame })
    }

    /// Projection of a vector onto the plane, in plane coordinates
    /// (length-k vector of frame coefficients).
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * x
    }
}

/// Smallest singular value of a k x k matrix; closed forms for k <= 2.
fn sigma_min(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].abs(),
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            // Grouped so transposing m (swapping b and c) changes nothing
            // bitwise: the metric must be exactly symmetric.
            let q = (a * a + d * d) + (b * b + c * c);
            let det = a * d - b * c;
            let disc = (q * q - 4.0 * det * det).max(0.0).sqrt();
            (0.5 * (q - disc)).max(0.0).sqrt()
        }
        _ => m
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |acc, &s| acc.min(s)),
    }
}

fn metric_frames(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 1 {
        // Lines: rho = sin(angle) = sqrt(1 - <u, v>^2).
        let dot = a.column(0).dot(&b.column(0)).clamp(-1.0, 1.0);
        return (1.0 - dot * dot).max(0.0).sqrt();
    }
    let m = a.transpose() * b;
    let s = sigma_min(&m).clamp(0.0, 1.0);
    (1.0 - s * s).sqrt()
}

/// `rho(V, W) = ||P_V - P_W||`, via the smallest principal cosine.
pub fn grassmann_metric(v: &KPlane, w: &KPlane) -> Result<f64, DirectionError> {
    if v.d() != w.d() || v.k() != w.k() {
        return Err(DirectionError::DimensionMismatch {
            expected: v.d() * 100 + v.k(),
            found: w.d() * 100 + w.k(),
        });
    }
    Ok(metric_frames(v.frame(), w.frame()))
}

/// Angle in `[0, pi/2]` between a line and a plane: arccos of the norm of
/// the projection of the line's unit vector onto the plane.
pub fn line_plane_angle(ell: &ProjectivePoint, v: &KPlane) -> Result<f64, DirectionError> {
    if ell.dim() != v.d() {
        return Err(DirectionError::DimensionMismatch {
            expected: v.d(),
            found: ell.dim(),
        });
    }
    Ok(line_plane_sine(ell, v).asin())
}

/// Sine of the line-plane angle: distance from the unit vector to the plane.
/// Lipschitz in the plane with constant 1 under the projection metric, which
/// is what the mesh-inflated neighborhood test relies on.
pub fn line_plane_sine(ell: &ProjectivePoint, v: &KPlane) -> f64 {
    let u = ell.vector();
    let proj = v.frame() * (v.frame().transpose() * u);
    (u - proj).norm().clamp(0.0, 1.0)
}

/// A Euclidean ball, the geometric carrier for the angle bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ball {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self {
            center: DVector::from_vec(center),
            radius,
        }
    }
}

/// Direction of the line joining two ball centers.
pub fn center_line(b: &Ball, b2: &Ball) -> Result<ProjectivePoint, DirectionError> {
    direction_of_pair(b.center.as_slice(), b2.center.as_slice())
}

/// Upper bound `4r/R` on the angle any direction determined by one point in
/// each ball makes with the center line; `r` is the larger radius, `R` the
/// center distance. Sound because the true extreme is `arcsin(2r/R)`, and
/// `arcsin(s) <= (pi/3) s` on `[0, 1/2]`, so `R >= 4r` gives
/// `arcsin(2r/R) <= (pi/3)(2r/R) < 4r/R`.
pub fn pair_angle_bound(b: &Ball, b2: &Ball) -> Result<f64, DirectionError> {
    let r = b.radius.max(b2.radius);
    let dist = (&b.center - &b2.center).norm();
    if dist <= 0.0 || dist < 4.0 * r {
        return Err(DirectionError::BoundNotApplicable { r, dist });
    }
    Ok(4.0 * r / dist)
}

/// Audit record of a net build.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetAudit {
    pub samples: usize,
    pub worst_distance: f64,
    pub rebuilds: u32,
    pub pool_size: usize,
    pub passed: bool,
}

/// A finite epsilon-net of G(d, k): every plane lies within `epsilon` of some
/// center, verified by randomized audit at build time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrassmannNet {
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    centers: Vec<KPlane>,
    pub audit: NetAudit,
}

impl GrassmannNet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[KPlane] {
        &self.centers
    }

    pub fn center(&self, id: usize) -> Result<&KPlane, DirectionError> {
        self.centers.get(id).ok_or(DirectionError::BadCell {
            id,
            len: self.centers.len(),
        })
    }

    /// Nearest net center to a plane and its distance.
    pub fn nearest(&self, plane: &KPlane) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, c) in self.centers.iter().enumerate() {
            let d = metric_frames(c.frame(), plane.frame());
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Normalized covering constant `count * epsilon^{k(d-k)}`.
    pub fn covering_constant(&self) -> f64 {
        self.centers.len() as f64 * self.epsilon.powi((self.k * (self.d - self.k)) as i32)
    }
}

/// Idempotent per-cell hit flags; set-bit is atomic so flag accumulation can
/// run from parallel workers in any order.
#[derive(Debug)]
pub struct CellFlags {
    bits: Vec<AtomicBool>,
}

impl CellFlags {
    pub fn new(len: usize) -> Self {
        Self {
            bits: (0..len).map(|_| AtomicBool::new(false)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn set(&self, id: usize) {
        self.bits[id].store(true, Ordering::Relaxed);
    }

    pub fn get(&self, id: usize) -> bool {
        self.bits[id].load(Ordering::Relaxed)
    }

    pub fn flagged(&self) -> BTreeSet<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| b.load(Ordering::Relaxed))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Haar-ish random plane: orthonormalized gaussian d x k matrix.
fn random_plane(d: usize, k: usize, rng: &mut impl Rng) -> KPlane {
    loop {
        let m = DMatrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        if let Ok(p) = KPlane::from_spanning(m) {
            return p;
        }
    }
}

/// A seeded sample of planes, exposed for audits and experiment drivers.
pub fn sample_planes(d: usize, k: usize, n: usize, seed: u64, tag: u64) -> Vec<KPlane> {
    let mut rng = seeded::stream(seed, tag);
    (0..n).map(|_| random_plane(d, k, &mut rng)).collect()
}

fn check_grassmannian(d: usize, k: usize) -> Result<(), DirectionError> {
    if k >= 1 && k <= 2 && k < d && d <= 4 {
        Ok(())
    } else {
        Err(DirectionError::BadGrassmannian { d, k })
    }
}

const AUDIT_SAMPLES: usize = 10_000;
const MAX_POOL: usize = 1 << 21;
const POOL_TAG: u64 = 0x706f6f6c; // 'pool'
const AUDIT_TAG: u64 = 0x61756474; // 'audt'

fn initial_pool_size(epsilon: f64, dim: usize) -> usize {
    // Sized so the random pool's covering radius lands under ~0.25 epsilon,
    // which keeps the greedy net (stopping at 0.75 epsilon) inside the audit
    // tolerance. The audit is the arbiter; this only sets the first attempt.
    let t = 0.25 * epsilon;
    let base = (1.0 / t).powi(dim as i32) * (dim as f64 * (1.0 / t).ln() + 6.0) * 4.0;
    (base.ceil() as usize).clamp(4096, MAX_POOL)
}

/// Builds a greedy farthest-point epsilon-net of G(d, k), then audits the
/// covering radius on 10^4 fresh random planes; on audit failure the pool is
/// doubled and the build repeats, up to 3 rebuilds.
pub fn build_net(d: usize, k: usize, epsilon: f64, seed: u64) -> Result<GrassmannNet, DirectionError> {
    check_grassmannian(d, k)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DirectionError::BadMesh(epsilon));
    }
    let dim = k * (d - k);
    let mut pool_size = initial_pool_size(epsilon, dim);
    let mut worst_seen = f64::INFINITY;
    for attempt in 0..4u32 {
        let pool = sample_planes(d, k, pool_size, seed, POOL_TAG ^ u64::from(attempt));
        let mut centers: Vec<KPlane> = vec![pool[0].clone()];
        let mut nearest: Vec<f64> = pool
            .iter()
            .map(|p| metric_frames(p.frame(), pool[0].frame()))
            .collect();
        loop {
            let (far_idx, far_dist) = nearest
                .iter()
                .enumerate()
                .fold((0usize, -1.0f64), |acc, (i, &dv)| {
                    if dv > acc.1 {
                        (i, dv)
                    } else {
                        acc
                    }
                });
            if far_dist <= 0.75 * epsilon {
                break;
            }
            let newc = pool[far_idx].clone();
            for (i, p) in pool.iter().enumerate() {
                let dnew = metric_frames(p.frame(), newc.frame());
                if dnew < nearest[i] {
                    nearest[i] = dnew;
                }
            }
            centers.push(newc);
        }
        let probes = sample_planes(d, k, AUDIT_SAMPLES, seed, AUDIT_TAG ^ u64::from(attempt));
        let mut worst = 0.0f64;
        for probe in &probes {
            let mut best = f64::INFINITY;
            for c in &centers {
                let dv = metric_frames(c.frame(), probe.frame());
                if dv < best {
                    best = dv;
                }
            }
            if best > worst {
                worst = best;
            }
        }
        worst_seen = worst_seen.min(worst);
        if worst <= epsilon {
            return Ok(GrassmannNet {
                d,
                k,
                epsilon,
                centers,
                audit: NetAudit {
                    samples: AUDIT_SAMPLES,
                    worst_distance: worst,
                    rebuilds: attempt,
                    pool_size,
                    passed: true,
                },
            });
        }
        pool_size = (pool_size * 2).min(MAX_POOL);
    }
    Err(DirectionError::NetAuditFailed {
        attempts: 4,
        worst: worst_seen,
    })
}

/// Ids of the net cells covering the `delta`-angle neighborhood of a line.
///
/// A cell is flagged when `sin(angle(ell, center)) <= sin(delta) + epsilon`.
/// The sine-side inflation gives provable outer containment: the sine of the
/// line-plane angle is 1-Lipschitz in the plane under `rho`, so any plane
/// with true angle `<= delta` maps to a flagged center.
pub fn angle_neighborhood(
    net: &GrassmannNet,
    ell: &ProjectivePoint,
    delta: f64,
) -> Result<Vec<usize>, DirectionError> {
    if ell.dim() != net.d {
        return Err(DirectionError::DimensionMismatch {
            expected: net.d,
            found: ell.dim(),
        });
    }
    let delta = delta.max(0.0);
    let bound = delta.min(std::f64::consts::FRAC_PI_2).sin() + net.epsilon;
    Ok(net
        .centers
        .iter()
        .enumerate()
        .filter(|(_, c)| line_plane_sine(ell, c) <= bound)
        .map(|(i, _)| i)
        .collect())
}

/// Upper estimate of the w-dimensional Hausdorff content of a flagged cell
/// set: canonical coverings at each dyadic radius in `[epsilon, 1/2]`,
/// minimum of `count * (2 radius)^w`.
///
/// For G(2,1) the covering count at each radius is the exact optimum over
/// arcs of the metric circle; other Grassmannians use the canonical leader
/// partition. Both give counts monotone in the flagged set.
pub fn content_estimate(
    net: &GrassmannNet,
    cells: &BTreeSet<usize>,
    w: f64,
) -> Result<ContentEstimate, DirectionError> {
    let max_w = (net.k * (net.d - net.k)) as f64;
    if !(w > 0.0 && w <= max_w) {
        return Err(DirectionError::BadExponent { w, max: max_w });
    }
    if let Some(&id) = cells.iter().next_back() {
        if id >= net.len() {
            return Err(DirectionError::BadCell {
                id,
                len: net.len(),
            });
        }
    }
    if cells.is_empty() {
        return Ok(ContentEstimate {
            value: 0.0,
            best_radius: 0.5,
            per_radius: vec![],
            exponent: w,
        });
    }
    if net.d == 2 && net.k == 1 {
        let angles: Vec<f64> = cells
            .iter()
            .map(|&i| {
                let f = net.centers[i].frame();
                f[(1, 0)].atan2(f[(0, 0)]).rem_euclid(std::f64::consts::PI)
            })
            .collect();
        Ok(content::min_over_radii(
            |r| content::circle_cover_count(&angles, std::f64::consts::PI, 2.0 * r.asin()),
            net.epsilon,
            w,
        ))
    } else {
        let flagged: Vec<usize> = cells.iter().copied().collect();
        Ok(content::min_over_radii(
            |r| {
                let classes = content::partition_classes(
                    net.len(),
                    |i, j| metric_frames(net.centers[i].frame(), net.centers[j].frame()),
                    r,
                );
                content::partition_cover_count(&classes, flagged.iter().copied())
            },
            net.epsilon,
            w,
        ))
    }
}
