//! Rate regions as H-polytopes in the nonnegative orthant.

pub mod lp;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use lp::{maximize, LpError, LpOutcome};

/// Slack allowed when deciding redundancy or feasibility.
pub const REDUNDANCY_TOL: f64 = 1e-9;

/// Number of random directions appended to the 0/1 directions.
pub const RANDOM_DIRECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("half-space {index} has negative right-hand side {rhs}")]
    NegativeRhs { index: usize, rhs: f64 },
    #[error("region is unbounded in direction {0:?}")]
    Unbounded(Vec<f64>),
    #[error("LP failed on constraint {index}: {source}")]
    Lp {
        index: usize,
        #[source]
        source: LpError,
    },
    #[error("axes must be distinct and below {dim}, got {a} and {b}")]
    BadAxes { a: usize, b: usize, dim: usize },
    #[error("empty region estimate")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `{ R >= 0 : a_i · R <= b_i }` with every `b_i >= 0`, so the origin is
/// always a member.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl HPolytope {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self, PolytopeError> {
        for (index, h) in halfspaces.iter().enumerate() {
            if h.coeffs.len() != dim {
                return Err(PolytopeError::DimensionMismatch {
                    expected: dim,
                    got: h.coeffs.len(),
                });
            }
            if !(h.rhs >= 0.0) {
                return Err(PolytopeError::NegativeRhs { index, rhs: h.rhs });
            }
        }
        Ok(HPolytope { dim, halfspaces })
    }

    /// Convenience constructor from `(coeffs, rhs)` pairs.
    pub fn from_rows(dim: usize, rows: &[(Vec<f64>, f64)]) -> Result<Self, PolytopeError> {
        HPolytope::new(
            dim,
            rows.iter()
                .map(|(c, r)| Halfspace {
                    coeffs: c.clone(),
                    rhs: *r,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.dim
            && point.iter().all(|&x| x >= -tol)
            && self
                .halfspaces
                .iter()
                .all(|h| dot(&h.coeffs, point) <= h.rhs + tol)
    }

    fn lp(&self, objective: &[f64], skip: &[bool]) -> Result<LpOutcome, LpError> {
        let (rows, rhs): (Vec<Vec<f64>>, Vec<f64>) = self
            .halfspaces
            .iter()
            .zip(skip)
            .filter(|(_, &s)| !s)
            .map(|(h, _)| (h.coeffs.clone(), h.rhs))
            .unzip();
        maximize(objective, &rows, &rhs)
    }

    /// The polytope restricted to the plane spanned by axes `a` and `b`
    /// (all other rates fixed at 0).
    pub fn restrict(&self, a: usize, b: usize) -> Result<HPolytope, PolytopeError> {
        if a == b || a >= self.dim || b >= self.dim {
            return Err(PolytopeError::BadAxes { a, b, dim: self.dim });
        }
        HPolytope::new(
            2,
            self.halfspaces
                .iter()
                .map(|h| Halfspace {
                    coeffs: vec![h.coeffs[a], h.coeffs[b]],
                    rhs: h.rhs,
                })
                .collect(),
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Drops every half-space implied by the ones that remain.
///
/// Constraints are tested in order against the currently kept set. A
/// constraint whose lhs is unbounded over the rest is kept.
pub fn remove_redundant(p: &HPolytope) -> Result<HPolytope, PolytopeError> {
    let mut removed = vec![false; p.len()];
    for (index, h) in p.halfspaces.iter().enumerate() {
        removed[index] = true;
        let redundant = match p.lp(&h.coeffs, &removed).map_err(|source| PolytopeError::Lp { index, source })? {
            LpOutcome::Optimal { value, .. } => value <= h.rhs + REDUNDANCY_TOL,
            LpOutcome::Unbounded => false,
        };
        removed[index] = redundant;
    }
    HPolytope::new(
        p.dim,
        p.halfspaces
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(h, _)| h.clone())
            .collect(),
    )
}

/// `max d · R` over `p`.
pub fn support_function(p: &HPolytope, d: &[f64]) -> Result<f64, PolytopeError> {
    if d.len() != p.dim {
        return Err(PolytopeError::DimensionMismatch {
            expected: p.dim,
            got: d.len(),
        });
    }
    if d.iter().all(|&v| v <= 0.0) {
        return Ok(0.0);
    }
    match p
        .lp(d, &vec![false; p.len()])
        .map_err(|source| PolytopeError::Lp { index: 0, source })?
    {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Unbounded => Err(PolytopeError::Unbounded(d.to_vec())),
    }
}

/// Anything with a support function.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn support(&self, d: &[f64]) -> Result<f64, PolytopeError>;
}

impl Region for HPolytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, d: &[f64]) -> Result<f64, PolytopeError> {
        support_function(self, d)
    }
}

/// Outcome of comparing two regions direction by direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionComparison {
    pub equal: bool,
    pub max_deviation: f64,
    pub worst_direction: Vec<f64>,
    pub tol: f64,
}

/// Compares support functions over `directions`. Directions are evaluated
/// in parallel; the worst one is the first attaining the maximum deviation.
pub fn region_equal<P: Region + ?Sized, Q: Region + ?Sized>(
    p: &P,
    q: &Q,
    directions: &[Vec<f64>],
    tol: f64,
) -> Result<RegionComparison, PolytopeError> {
    if p.dim() != q.dim() {
        return Err(PolytopeError::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let deviations: Vec<f64> = directions
        .par_iter()
        .map(|d| Ok((p.support(d)? - q.support(d)?).abs()))
        .collect::<Result<_, PolytopeError>>()?;
    let mut worst = 0;
    for (i, &dev) in deviations.iter().enumerate() {
        if dev > deviations[worst] {
            worst = i;
        }
    }
    let max_deviation = deviations.get(worst).copied().unwrap_or(0.0);
    Ok(RegionComparison {
        equal: max_deviation <= tol,
        max_deviation,
        worst_direction: directions.get(worst).cloned().unwrap_or_default(),
        tol,
    })
}

/// All nonzero 0/1 vectors followed by [`RANDOM_DIRECTIONS`] unit vectors with
/// nonnegative Gaussian entries. Negative entries add nothing for regions
/// that are closed downwards in the orthant.
pub fn default_directions(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (1u64..1 << dim)
        .map(|bits| (0..dim).map(|k| ((bits >> k) & 1) as f64).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < (1 << dim) - 1 + RANDOM_DIRECTIONS {
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g.abs()
            })
            .collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            dirs.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    dirs
}

/// Union of sampled polytopes, compared through its convex hull's support
/// function.
#[derive(Debug)]
pub struct RegionEstimate {
    dim: usize,
    polytopes: Vec<HPolytope>,
    support_cache: Mutex<HashMap<Vec<u64>, f64>>,
}

impl Clone for RegionEstimate {
    fn clone(&self) -> Self {
        RegionEstimate {
            dim: self.dim,
            polytopes: self.polytopes.clone(),
            support_cache: Mutex::new(self.support_cache.lock().expect("cache lock").clone()),
        }
    }
}

impl RegionEstimate {
    pub fn new(polytopes: Vec<HPolytope>) -> Result<Self, PolytopeError> {
        let first = polytopes.first().ok_or(PolytopeError::Empty)?;
        let dim = first.dim;
        if let Some(p) = polytopes.iter().find(|p| p.dim != dim) {
            return Err(PolytopeError::DimensionMismatch {
                expected: dim,
                got: p.dim,
            });
        }
        Ok(RegionEstimate {
            dim,
            polytopes,
            support_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn polytopes(&self) -> &[HPolytope] {
        &self.polytopes
    }

    pub fn push(&mut self, p: HPolytope) -> Result<(), PolytopeError> {
        if p.dim != self.dim {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.dim,
                got: p.dim,
            });
        }
        self.polytopes.push(p);
        self.support_cache.get_mut().expect("cache lock").clear();
        Ok(())
    }
}

impl Region for RegionEstimate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, d: &[f64]) -> Result<f64, PolytopeError> {
        union_support(self, d)
    }
}

/// Max of the member support functions.
pub fn union_support(estimate: &RegionEstimate, d: &[f64]) -> Result<f64, PolytopeError> {
    let key: Vec<u64> = d.iter().map(|x| x.to_bits()).collect();
    if let Some(&v) = estimate.support_cache.lock().expect("cache lock").get(&key) {
        return Ok(v);
    }
    let mut best = f64::NEG_INFINITY;
    for p in &estimate.polytopes {
        best = best.max(support_function(p, d)?);
    }
    estimate.support_cache.lock().expect("cache lock").insert(key, best);
    Ok(best)
}

/// A boundary point of a 2-D slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub theta: f64,
    pub ra: f64,
    pub rb: f64,
}

/// Vertices of a bounded 2-D polytope (orthant included).
fn vertices_2d(p: &HPolytope) -> Result<Vec<[f64; 2]>, PolytopeError> {
    support_function(p, &[1.0, 1.0])?;
    let mut lines: Vec<([f64; 2], f64)> = p
        .halfspaces
        .iter()
        .map(|h| ([h.coeffs[0], h.coeffs[1]], h.rhs))
        .collect();
    lines.push(([-1.0, 0.0], 0.0));
    lines.push(([0.0, -1.0], 0.0));
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ([a, b], e) = lines[i];
            let ([c, d], f) = lines[j];
            let det = a * d - b * c;
            if det.abs() < 1e-12 {
                continue;
            }
            let v = [(e * d - b * f) / det, (a * f - e * c) / det];
            if p.contains(&v, REDUNDANCY_TOL) {
                out.push([v[0].max(0.0), v[1].max(0.0)]);
            }
        }
    }
    Ok(out)
}

/// Boundary of the union hull in the `(a, b)` plane along `grid` rays
/// `θ_k = k (π/2) / (grid - 1)`. On a flat face the point closest to the ray
/// is reported.
pub fn slice_2d(
    estimate: &RegionEstimate,
    axis_a: usize,
    axis_b: usize,
    grid: usize,
) -> Result<Vec<SlicePoint>, PolytopeError> {
    let mut verts = vec![[0.0, 0.0]];
    for p in &estimate.polytopes {
        verts.extend(vertices_2d(&p.restrict(axis_a, axis_b)?)?);
    }
    let step = if grid > 1 {
        std::f64::consts::FRAC_PI_2 / (grid - 1) as f64
    } else {
        0.0
    };
    Ok((0..grid)
        .map(|k| {
            let theta = k as f64 * step;
            let d = [theta.cos(), theta.sin()];
            let h = verts
                .iter()
                .map(|v| d[0] * v[0] + d[1] * v[1])
                .fold(f64::NEG_INFINITY, f64::max);
            // The optimal face is a segment spanned by its extreme vertices
            // along the tangent t = (-sin, cos).
            let t = [-d[1], d[0]];
            let face: Vec<&[f64; 2]> = verts
                .iter()
                .filter(|v| d[0] * v[0] + d[1] * v[1] >= h - REDUNDANCY_TOL)
                .collect();
            let along = |v: &[f64; 2]| t[0] * v[0] + t[1] * v[1];
            let lo = face.iter().map(|v| along(v)).fold(f64::INFINITY, f64::min);
            let hi = face.iter().map(|v| along(v)).fold(f64::NEG_INFINITY, f64::max);
            let s = 0.0f64.clamp(lo, hi);
            SlicePoint {
                theta,
                ra: (h * d[0] + s * t[0]).max(0.0),
                rb: (h * d[1] + s * t[1]).max(0.0),
            }
        })
        .collect())
}

/// CSV with header `theta,R_a,R_b`, six decimals, LF endings.
pub fn slice_csv(points: &[SlicePoint]) -> String {
    let mut out = String::from("theta,R_a,R_b\n");
    for p in points {
        writeln!(out, "{:.6},{:.6},{:.6}", p.theta, clean(p.ra), clean(p.rb)).expect("write to string");
    }
    out
}

/// Avoids printing `-0.000000`.
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-7 {
        0.0
    } else {
        x
    }
}
