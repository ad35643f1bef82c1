//! Tangent cones of sampled subsets of the standard symplectic space, the cone-coisotropy
//! test, and Cantor cube families with their displacement bound.
//!
//! Coordinates are laid out as `(q_1..q_n, p_1..p_n)` and `J(q, p) = (-p, q)`. Everything here
//! is double precision except the cube corners and the displacement bound, which are exact.

use std::fmt;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::endpoint::{format_rational, parse_rational, rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension {0} is not even and at least 2")]
    BadDimension(usize),
    #[error("point has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("no sample within {radius} of the base point at the finest scale")]
    EmptyNeighbourhood { radius: f64 },
    #[error("scales must be positive and strictly decreasing")]
    BadScales,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ratio {0} is outside the allowed range")]
    RatioOutOfRange(String),
    #[error("level and half-dimension must be at least 1")]
    BadLevel,
    #[error("{count} cubes exceed the budget of {budget}")]
    Budget { count: u128, budget: u128 },
    #[error("normal grid on a sphere of dimension {0} is too large")]
    GridTooLarge(usize),
}

pub type Point = Vec<f64>;

/// Finite, deduplicated sample of `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dimension: usize,
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(dimension: usize, mut points: Vec<Point>) -> Result<Self, GeometryError> {
        if dimension < 2 || dimension % 2 != 0 {
            return Err(GeometryError::BadDimension(dimension));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dimension) {
            return Err(GeometryError::DimensionMismatch {
                expected: dimension,
                found: p.len(),
            });
        }
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        points.dedup();
        Ok(PointCloud { dimension, points })
    }

    /// One point per row, comma or whitespace separated; `#` starts a comment.
    pub fn parse_csv(text: &str) -> Result<Self, GeometryError> {
        let mut points = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let point = parse_point(content).map_err(|message| GeometryError::Parse { line: k + 1, message })?;
            points.push(point);
        }
        let dimension = points.first().map(Vec::len).ok_or(GeometryError::EmptyCloud)?;
        PointCloud::new(dimension, points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_dimension(&self) -> usize {
        self.dimension / 2
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parses `"x1, x2, ..."` or `"x1 x2 ..."`.
pub fn parse_point(text: &str) -> Result<Point, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("bad coordinate `{t}`"))
        })
        .collect()
}

fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: &[f64]) -> Point {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// Angle in radians between two unit vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// `J(q, p) = (-p, q)`.
pub fn complex_structure(v: &[f64]) -> Point {
    let n = v.len() / 2;
    let mut out = vec![0.0; v.len()];
    for i in 0..n {
        out[i] = -v[n + i];
        out[n + i] = v[i];
    }
    out
}

/// Unit directions, merged when closer than `theta_res`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Point>,
    theta_res: f64,
}

impl DirectionSet {
    fn collect(secants: impl IntoIterator<Item = Point>, theta_res: f64) -> Self {
        let mut directions: Vec<Point> = Vec::new();
        for s in secants {
            if !directions.iter().any(|d| angle(d, &s) <= theta_res) {
                directions.push(s);
            }
        }
        DirectionSet { directions, theta_res }
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn theta_res(&self) -> f64 {
        self.theta_res
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Smallest angle from `v` to a member, `pi` when empty.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let v = normalized(v);
        self.directions
            .iter()
            .map(|d| angle(d, &v))
            .fold(std::f64::consts::PI, f64::min)
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        self.distance(v) <= self.theta_res
    }

    /// Angle from `v` to the conic hull of the members within `reach` of it. Sampled cones are
    /// finite sets of rays, so a direction between two nearby rays still counts as inside.
    pub fn hull_distance(&self, v: &[f64], reach: f64) -> f64 {
        let v = normalized(v);
        let local: Vec<&Point> = self.directions.iter().filter(|d| angle(d, &v) <= reach).collect();
        if local.len() < 2 {
            return self.distance(&v);
        }
        // Nonnegative least squares by cyclic coordinate descent; members are unit vectors.
        let mut weights = vec![0.0; local.len()];
        let mut residual = v.clone();
        for _ in 0..200 {
            for (w, d) in weights.iter_mut().zip(&local) {
                let next = (*w + dot(d, &residual)).max(0.0);
                let change = next - *w;
                if change != 0.0 {
                    residual.iter_mut().zip(d.iter()).for_each(|(r, x)| *r -= change * x);
                    *w = next;
                }
            }
        }
        let projection = sub(&v, &residual);
        if norm(&projection) < 1e-12 {
            return self.distance(&v);
        }
        angle(&v, &normalized(&projection)).min(self.distance(&v))
    }

    /// Rank of the span by singular values relative to the largest.
    pub fn span_rank(&self, relative_threshold: f64) -> usize {
        span_basis(&self.directions, self.dimension(), relative_threshold).len()
    }

    fn dimension(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    /// Coarsest radius; `None` picks `2^(levels-1)` times the distance to the
    /// `2 * dimension`-th nearest sample, so the finest ball holds a small neighbourhood.
    pub r0: Option<f64>,
    pub levels: usize,
    pub theta_res: f64,
    pub rank_threshold: f64,
    /// Step of the normal grid on the orthogonal sphere.
    pub grid_step: f64,
    /// Contingent rays within this angle of `J nu` span the local hull it is tested against.
    pub hull_reach: f64,
}

impl Default for ConeParams {
    fn default() -> Self {
        ConeParams {
            r0: None,
            levels: 9,
            theta_res: 5f64.to_radians(),
            rank_threshold: 1e-3,
            grid_step: 10f64.to_radians(),
            hull_reach: 60f64.to_radians(),
        }
    }
}

impl ConeParams {
    pub fn scales(&self, cloud: &PointCloud, x: &[f64]) -> Vec<f64> {
        let levels = self.levels.max(1);
        let r0 = self.r0.unwrap_or_else(|| {
            let mut d: Vec<f64> = cloud.points.iter().map(|p| norm(&sub(p, x))).filter(|&d| d > 0.0).collect();
            d.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let m = (2 * cloud.dimension).min(d.len());
            let nearest = if m == 0 { 0.0 } else { d[m - 1] };
            nearest * (1.0 + 1e-9) * 2f64.powi(levels as i32 - 1)
        });
        (0..levels).map(|j| r0 / 2f64.powi(j as i32)).collect()
    }
}

fn check_scales(scales: &[f64]) -> Result<(), GeometryError> {
    let ok = !scales.is_empty()
        && scales.iter().all(|&r| r > 0.0 && r.is_finite())
        && scales.windows(2).all(|w| w[0] > w[1]);
    if ok {
        Ok(())
    } else {
        Err(GeometryError::BadScales)
    }
}

fn ball<'a>(cloud: &'a PointCloud, x: &'a [f64], r: f64) -> impl Iterator<Item = &'a Point> + 'a {
    cloud.points.iter().filter(move |p| {
        let d = norm(&sub(p, x));
        d > 0.0 && d <= r
    })
}

fn finest(cloud: &PointCloud, x: &[f64], scales: &[f64]) -> Result<f64, GeometryError> {
    check_scales(scales)?;
    if x.len() != cloud.dimension {
        return Err(GeometryError::DimensionMismatch {
            expected: cloud.dimension,
            found: x.len(),
        });
    }
    let r = *scales.last().expect("nonempty");
    if ball(cloud, x, r).next().is_none() {
        return Err(GeometryError::EmptyNeighbourhood { radius: r });
    }
    Ok(r)
}

/// Secant directions `(y - x)/|y - x|` at the finest scale. The balls are nested, so a
/// direction seen at the finest scale persists across every coarser one.
pub fn contingent(cloud: &PointCloud, x: &[f64], scales: &[f64], theta_res: f64) -> Result<DirectionSet, GeometryError> {
    let r = finest(cloud, x, scales)?;
    Ok(DirectionSet::collect(
        ball(cloud, x, r).map(|y| normalized(&sub(y, x))),
        theta_res,
    ))
}

/// Pair secants `(y - z)/|y - z|` among the finest-scale neighbours of `x` (and `x` itself),
/// closed under sign.
pub fn paratingent(cloud: &PointCloud, x: &[f64], scales: &[f64], theta_res: f64) -> Result<DirectionSet, GeometryError> {
    let r = finest(cloud, x, scales)?;
    let mut near: Vec<&[f64]> = ball(cloud, x, r).map(Vec::as_slice).collect();
    near.push(x);
    let mut secants = Vec::new();
    for (i, y) in near.iter().enumerate() {
        for z in &near[i + 1..] {
            let d = sub(y, z);
            if norm(&d) > 0.0 {
                let u = normalized(&d);
                secants.push(u.iter().map(|c| -c).collect());
                secants.push(u);
            }
        }
    }
    Ok(DirectionSet::collect(secants, theta_res))
}

/// Orthonormal basis of the principal span of `vectors`.
fn span_basis(vectors: &[Point], dim: usize, relative_threshold: f64) -> Vec<Point> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(vectors.len(), dim, |i, j| vectors[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    if top <= 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > relative_threshold * top)
        .map(|(i, _)| v_t.row(i).iter().copied().collect())
        .collect()
}

/// Orthonormal basis of the complement of `basis`, built from the coordinate vectors in order
/// so that coordinate-aligned normals come first.
fn complement_basis(basis: &[Point], dim: usize) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for b in basis.iter().chain(out.iter()) {
            let c = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        if norm(&e) > 1e-6 {
            out.push(normalized(&e));
        }
        if out.len() + basis.len() == dim {
            break;
        }
    }
    out
}

const GRID_CAP: usize = 2_000_000;

/// Grid on the unit sphere of `R^k` in hyperspherical coordinates; the first point is `e_1`.
fn sphere_grid(k: usize, step: f64) -> Result<Vec<Point>, GeometryError> {
    let pts = match k {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let count = (std::f64::consts::TAU / step).round().max(4.0) as usize;
            (0..count)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        _ => {
            let count = (std::f64::consts::PI / step).round().max(2.0) as usize;
            let inner = sphere_grid(k - 1, step)?;
            if inner.len().saturating_mul(count) > GRID_CAP {
                return Err(GeometryError::GridTooLarge(k));
            }
            let mut out = Vec::new();
            for i in 0..=count {
                let t = std::f64::consts::PI * i as f64 / count as f64;
                if i == 0 || i == count {
                    let mut p = vec![0.0; k];
                    p[0] = t.cos();
                    out.push(p);
                    continue;
                }
                for w in &inner {
                    let mut p = Vec::with_capacity(k);
                    p.push(t.cos());
                    p.extend(w.iter().map(|c| t.sin() * c));
                    out.push(p);
                }
            }
            out
        }
    };
    Ok(pts)
}

fn combine(coeffs: &[f64], basis: &[Point]) -> Point {
    let dim = basis[0].len();
    let mut out = vec![0.0; dim];
    for (c, b) in coeffs.iter().zip(basis) {
        out.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
    }
    normalized(&out)
}

/// Normals obtained by tilting `nu` by `step` towards each complement direction, both ways.
fn tilts(nu: &[f64], basis: &[Point], step: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for b in basis {
        let c = dot(nu, b);
        let perp: Point = b.iter().zip(nu).map(|(x, y)| x - c * y).collect();
        if norm(&perp) < 1e-9 {
            continue;
        }
        let perp = normalized(&perp);
        for sign in [1.0, -1.0] {
            out.push(
                nu.iter()
                    .zip(&perp)
                    .map(|(x, y)| step.cos() * x + sign * step.sin() * y)
                    .collect(),
            );
        }
    }
    out
}

/// A hyperplane `ker <n, .>` through the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Point,
}

impl Hyperplane {
    /// Spanning direction of the symplectic orthogonal `H^omega`.
    pub fn symplectic_orthogonal(&self) -> Point {
        complex_structure(&self.normal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The paratingent cone spans the whole space, so no hyperplane contains it.
    CoisotropicVacuous,
    /// No failing hyperplane was found on the normal grid. One-sided: a finer grid could still
    /// find one.
    Coisotropic,
    NotCoisotropic(Hyperplane),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CoisotropicVacuous => f.write_str("coisotropic-vacuous"),
            Verdict::Coisotropic => f.write_str("coisotropic"),
            Verdict::NotCoisotropic(h) => {
                let n: Vec<String> = h.normal.iter().map(|x| format!("{x:.6}")).collect();
                write!(f, "not-coisotropic normal=({})", n.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub verdict: Verdict,
    pub contingent: DirectionSet,
    pub paratingent: DirectionSet,
    pub paratingent_rank: usize,
}

/// For every hyperplane `H` containing the paratingent cone at `x`, checks that `H^omega`
/// lies in the contingent cone (its local conic hull, see [`DirectionSet::hull_distance`]). Grid normals that pass narrowly are refined at half the step,
/// and a failing normal is kept only if its tilts at half the step fail as well.
pub fn cone_coisotropy_test(cloud: &PointCloud, x: &[f64], params: &ConeParams) -> Result<ConeReport, GeometryError> {
    let scales = params.scales(cloud, x);
    let minus = contingent(cloud, x, &scales, params.theta_res)?;
    let plus = paratingent(cloud, x, &scales, params.theta_res)?;
    let dim = cloud.dimension;
    let span = span_basis(plus.directions(), dim, params.rank_threshold);
    let rank = span.len();
    let report = |verdict| ConeReport {
        verdict,
        contingent: minus.clone(),
        paratingent: plus.clone(),
        paratingent_rank: rank,
    };
    if rank == dim {
        return Ok(report(Verdict::CoisotropicVacuous));
    }
    let basis = complement_basis(&span, dim);
    let half = params.grid_step / 2.0;
    let gap = |nu: &[f64]| minus.hull_distance(&complex_structure(nu), params.hull_reach);
    let fails = |nu: &[f64]| gap(nu) > params.theta_res;
    let confirmed = |nu: &[f64]| fails(nu) && tilts(nu, &basis, half).iter().all(|t| fails(t));
    let grid = sphere_grid(basis.len(), params.grid_step)?;
    let witness = grid.par_iter().find_map_first(|coeffs| {
        let nu = combine(coeffs, &basis);
        let gap = gap(&nu);
        if gap > params.theta_res {
            return confirmed(&nu).then_some(nu);
        }
        if gap > params.theta_res / 2.0 {
            return tilts(&nu, &basis, half).into_iter().find(|t| confirmed(t));
        }
        None
    });
    Ok(report(match witness {
        Some(normal) => Verdict::NotCoisotropic(Hyperplane { normal }),
        None => Verdict::Coisotropic,
    }))
}

pub const CUBE_BUDGET: u128 = 1_000_000;

/// Level-`k` Cantor cubes in `[0,1]^{2n}`: products of the intervals of
/// `F_1 = [0,a] u [1-a,1]` iterated `k` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeFamily {
    pub a: Rational,
    pub level: u32,
    pub half_dimension: u32,
    pub edge: Rational,
    pub corners: Vec<Vec<Rational>>,
}

fn check_ratio(a: &Rational, upper: &Rational) -> Result<(), GeometryError> {
    if a <= &Rational::zero() || a >= upper {
        return Err(GeometryError::RatioOutOfRange(format_rational(a)));
    }
    Ok(())
}

/// Left ends of the `2^k` intervals of `F_k`.
fn cantor_starts(a: &Rational, k: u32) -> Vec<Rational> {
    let mut starts = vec![Rational::zero()];
    let mut len = Rational::one();
    for _ in 0..k {
        let next_len = &len * a;
        let gap = &len - &next_len;
        starts = starts.iter().flat_map(|s| [s.clone(), s + &gap]).collect();
        len = next_len;
    }
    starts
}

pub fn cantor_cubes(a: &Rational, k: u32, n: u32) -> Result<CubeFamily, GeometryError> {
    check_ratio(a, &Rational::new(1.into(), 2.into()))?;
    if k == 0 || n == 0 {
        return Err(GeometryError::BadLevel);
    }
    let exponent = 2 * n * k;
    let count = if exponent >= 127 { u128::MAX } else { 1u128 << exponent };
    if count > CUBE_BUDGET {
        return Err(GeometryError::Budget {
            count,
            budget: CUBE_BUDGET,
        });
    }
    let starts = cantor_starts(a, k);
    let mut corners: Vec<Vec<Rational>> = vec![Vec::new()];
    for _ in 0..2 * n {
        corners = corners
            .iter()
            .flat_map(|c| {
                starts.iter().map(move |s| {
                    let mut c = c.clone();
                    c.push(s.clone());
                    c
                })
            })
            .collect();
    }
    Ok(CubeFamily {
        a: a.clone(),
        level: k,
        half_dimension: n,
        edge: num_traits::pow(a.clone(), k as usize),
        corners,
    })
}

impl CubeFamily {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// All `2^{2n}` vertices of every cube.
    pub fn vertex_cloud(&self) -> Result<PointCloud, GeometryError> {
        let dim = 2 * self.half_dimension as usize;
        let count = (self.corners.len() as u128) << dim;
        if count > CUBE_BUDGET {
            return Err(GeometryError::Budget {
                count,
                budget: CUBE_BUDGET,
            });
        }
        let edge = rational_to_f64(&self.edge);
        let mut points = Vec::with_capacity(count as usize);
        for c in &self.corners {
            let base: Vec<f64> = c.iter().map(rational_to_f64).collect();
            for mask in 0..(1usize << dim) {
                points.push(
                    base.iter()
                        .enumerate()
                        .map(|(i, x)| if mask >> i & 1 == 1 { x + edge } else { *x })
                        .collect(),
                );
            }
        }
        PointCloud::new(dim, points)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# edge {}\n", format_rational(&self.edge));
        for c in &self.corners {
            let row: Vec<String> = c.iter().map(format_rational).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `2^{2nk} a^k`, the total Hamiltonian norm of the cube-moving isotopy at level `k` with unit
/// constants. Accepts any `a` in `(0, 1)` since no cubes are built.
pub fn displacement_bound(a: &Rational, k: u32, n: u32) -> Result<Rational, GeometryError> {
    check_ratio(a, &Rational::one())?;
    if k == 0 || n == 0 {
        return Err(GeometryError::BadLevel);
    }
    let base = Rational::from_integer(num_bigint::BigInt::one() << (2 * n)) * a;
    Ok(num_traits::pow(base, k as usize))
}

pub fn parse_ratio(text: &str) -> Result<Rational, GeometryError> {
    parse_rational(text).map_err(|e| GeometryError::Parse {
        line: 0,
        message: e.to_string(),
    })
}
