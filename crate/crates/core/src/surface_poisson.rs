//! Poisson structures `pi = f d/dz ^ d/dtheta` on the sphere and the torus.
//!
//! The sphere is handled in the cylinder chart `z in (-1, 1)`, `theta in [0, 2 pi)`
//! with area form `dz ^ dtheta`; the poles are excluded by a margin on which `f`
//! must not vanish. The torus is `z in [0, 1)`, `theta in [0, 2 pi)`, both periodic.
//! Lengths and gradients are measured in the flat chart metric.

use std::f64::consts::TAU;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::surface_expr::{simplify, EvalError, Expr, Point, Var};

pub const DEFAULT_POLE_MARGIN: f64 = 0.02;
pub const MIN_GRID: usize = 64;
/// Relative tolerance for comparing modular periods.
pub const PERIOD_MATCH_TOL: f64 = 1e-3;
/// Regularity threshold relative to the largest gradient on the grid.
pub const REGULARITY_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid surface: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("pole margin: f vanishes or changes sign near the {pole} pole (z={z}, theta={theta})")]
    PoleMargin { pole: &'static str, z: f64, theta: f64 },
    #[error("regularity: |grad f| = {grad_norm:.3e} on the zero set at z={z}, theta={theta} (threshold {threshold:.3e})")]
    Irregular {
        z: f64,
        theta: f64,
        grad_norm: f64,
        threshold: f64,
    },
    #[error("topology: {0}")]
    Topology(String),
    #[error("regularized volume did not converge: residual {residual:.3e} exceeds {tolerance:.3e}")]
    VolumeNotConverged { residual: f64, tolerance: f64 },
}

impl SurfaceError {
    /// Name of the genericity check that rejected the input, if any.
    pub fn check_name(&self) -> Option<&'static str> {
        match self {
            SurfaceError::PoleMargin { .. } => Some("pole_margin"),
            SurfaceError::Irregular { .. } => Some("regularity"),
            SurfaceError::Topology(_) => Some("topology"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    pub grid_n: usize,
    /// Only used on the sphere.
    pub pole_margin: f64,
}

impl SurfaceSpec {
    pub fn sphere(grid_n: usize) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::Sphere,
            grid_n,
            pole_margin: DEFAULT_POLE_MARGIN,
        }
    }

    pub fn torus(grid_n: usize) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::Torus,
            grid_n,
            pole_margin: DEFAULT_POLE_MARGIN,
        }
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        if self.grid_n < MIN_GRID {
            return Err(SurfaceError::InvalidSpec(format!("grid_n {} < {}", self.grid_n, MIN_GRID)));
        }
        if self.kind == SurfaceKind::Sphere && !(self.pole_margin > 0.0 && self.pole_margin < 0.5) {
            return Err(SurfaceError::InvalidSpec(format!(
                "pole margin {} outside (0, 0.5)",
                self.pole_margin
            )));
        }
        Ok(())
    }

    fn periodic_z(&self) -> bool {
        self.kind == SurfaceKind::Torus
    }

    fn z_bounds(&self) -> (f64, f64) {
        match self.kind {
            SurfaceKind::Sphere => (-1.0 + self.pole_margin, 1.0 - self.pole_margin),
            SurfaceKind::Torus => (0.0, 1.0),
        }
    }

    /// Whole chart in `z`, including the pole collars on the sphere.
    fn chart_z(&self) -> (f64, f64) {
        match self.kind {
            SurfaceKind::Sphere => (-1.0, 1.0),
            SurfaceKind::Torus => (0.0, 1.0),
        }
    }

    /// The chart in `z` with the sphere's poles removed.
    fn open_chart_z(&self) -> (f64, f64) {
        match self.kind {
            SurfaceKind::Sphere => (-1.0 + 1e-12, 1.0 - 1e-12),
            SurfaceKind::Torus => (0.0, 1.0),
        }
    }

    pub fn z_step(&self) -> f64 {
        let (lo, hi) = self.z_bounds();
        (hi - lo) / self.grid_n as f64
    }

    pub fn theta_step(&self) -> f64 {
        TAU / self.grid_n as f64
    }

    /// Grid rows are cell-centered, so symmetric zero sets never hit a node.
    pub fn z_node(&self, k: usize) -> f64 {
        self.z_bounds().0 + (k as f64 + 0.5) * self.z_step()
    }

    pub fn theta_node(&self, j: usize) -> f64 {
        j as f64 * self.theta_step()
    }

    pub fn chart_area(&self) -> f64 {
        let (lo, hi) = self.chart_z();
        (hi - lo) * TAU
    }

    fn normalize(&self, p: Point) -> Point {
        let z = if self.periodic_z() { p.z.rem_euclid(1.0) } else { p.z };
        Point::new(z, p.theta.rem_euclid(TAU))
    }

    /// `b - a` with periodic coordinates wrapped to the short representative.
    fn delta(&self, a: Point, b: Point) -> (f64, f64) {
        let mut dz = b.z - a.z;
        if self.periodic_z() {
            dz -= dz.round();
        }
        let mut dt = b.theta - a.theta;
        dt -= TAU * (dt / TAU).round();
        (dz, dt)
    }
}

/// A function on the chart together with its symbolic derivatives.
#[derive(Debug, Clone)]
pub struct SurfaceFunction {
    expr: Expr,
    dz: Expr,
    dt: Expr,
    dzz: Expr,
    dzt: Expr,
    dtt: Expr,
}

impl SurfaceFunction {
    pub fn new(expr: Expr) -> Self {
        let dz = expr.differentiate(Var::Z);
        let dt = expr.differentiate(Var::Theta);
        SurfaceFunction {
            dzz: dz.differentiate(Var::Z),
            dzt: dz.differentiate(Var::Theta),
            dtt: dt.differentiate(Var::Theta),
            expr,
            dz,
            dt,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn value(&self, p: Point) -> Result<f64, EvalError> {
        self.expr.eval(p)
    }

    /// `(f_z, f_theta)`.
    pub fn gradient(&self, p: Point) -> Result<(f64, f64), EvalError> {
        Ok((self.dz.eval(p)?, self.dt.eval(p)?))
    }

    pub fn grad_norm(&self, p: Point) -> Result<f64, EvalError> {
        let (a, b) = self.gradient(p)?;
        Ok(a.hypot(b))
    }

    fn hessian(&self, p: Point) -> Result<[[f64; 2]; 2], EvalError> {
        let zt = self.dzt.eval(p)?;
        Ok([[self.dzz.eval(p)?, zt], [zt, self.dtt.eval(p)?]])
    }

    /// The modular field `-f_theta d/dz + f_z d/dtheta`.
    pub fn modular_field(&self, p: Point) -> Result<(f64, f64), EvalError> {
        let (fz, ft) = self.gradient(p)?;
        Ok((-ft, fz))
    }
}

struct Grid {
    nz: usize,
    nt: usize,
    values: Vec<f64>,
}

impl Grid {
    fn idx(&self, k: usize, j: usize) -> usize {
        k * self.nt + j
    }

    fn at(&self, k: usize, j: usize) -> f64 {
        self.values[self.idx(k, j)]
    }

    fn sample(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<Grid, SurfaceError> {
        let n = s.grid_n;
        let values = (0..n * n)
            .into_par_iter()
            .map(|i| f.value(Point::new(s.z_node(i / n), s.theta_node(i % n))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid { nz: n, nt: n, values })
    }
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

/// Requires `f` to keep a strict sign between each pole and the first grid row.
fn check_pole_margin(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<(), SurfaceError> {
    if s.kind != SurfaceKind::Sphere {
        return Ok(());
    }
    const LEVELS: usize = 32;
    let n = s.grid_n;
    let first = s.z_node(0);
    let last = s.z_node(n - 1);
    // The poles themselves are not in the chart; sample up to but excluding them.
    for (pole, row, end) in [("south", first, -1.0), ("north", last, 1.0)] {
        // Linear levels plus a geometric approach to the pole.
        let fractions = (0..=LEVELS)
            .map(|l| l as f64 / (LEVELS + 1) as f64)
            .chain((1..=40).map(|l| 1.0 - 0.5f64.powi(l)));
        let samples = fractions
            .flat_map(|t| {
                let z = row + (end - row) * t;
                (0..n).map(move |j| Point::new(z, s.theta_node(j)))
            })
            .collect::<Vec<_>>();
        let values = samples
            .par_iter()
            .map(|&p| f.value(p).map(|v| (p, v)))
            .collect::<Result<Vec<_>, _>>()?;
        let reference = values[0].1;
        for (p, v) in values {
            if v == 0.0 || v.signum() != reference.signum() {
                return Err(SurfaceError::PoleMargin { pole, z: p.z, theta: p.theta });
            }
        }
    }
    Ok(())
}

fn max_grad_norm(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<f64, SurfaceError> {
    let n = s.grid_n;
    let norms = (0..n * n)
        .into_par_iter()
        .map(|i| f.grad_norm(Point::new(s.z_node(i / n), s.theta_node(i % n))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Newton iteration for a critical point using the pseudo-inverse of the hessian.
fn critical_point_near(f: &SurfaceFunction, s: &SurfaceSpec, start: Point) -> Option<Point> {
    let reach = 3.0 * s.z_step().max(s.theta_step());
    let mut p = start;
    for _ in 0..60 {
        let (gz, gt) = f.gradient(p).ok()?;
        let h = f.hessian(p).ok()?;
        // Symmetric 2x2 eigendecomposition.
        let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lams = [mean + rad, mean - rad];
        let scale = lams[0].abs().max(lams[1].abs());
        if scale == 0.0 {
            return None;
        }
        let vecs = if b.abs() > 1e-300 {
            let v1 = (lams[0] - c, b);
            let v2 = (lams[1] - c, b);
            let n1 = v1.0.hypot(v1.1);
            let n2 = v2.0.hypot(v2.1);
            [(v1.0 / n1, v1.1 / n1), (v2.0 / n2, v2.1 / n2)]
        } else if a >= c {
            [(1.0, 0.0), (0.0, 1.0)]
        } else {
            [(0.0, 1.0), (1.0, 0.0)]
        };
        let (mut sz, mut st) = (0.0, 0.0);
        for (lam, v) in lams.iter().zip(vecs) {
            if lam.abs() > 1e-9 * scale {
                let coef = (v.0 * gz + v.1 * gt) / lam;
                sz += coef * v.0;
                st += coef * v.1;
            }
        }
        p = Point::new(p.z - sz, p.theta - st);
        let (dz, dt) = s.delta(start, p);
        if dz.hypot(dt) > reach || (!s.periodic_z() && p.z.abs() >= 1.0) {
            return None;
        }
        if sz.hypot(st) < 1e-15 {
            break;
        }
    }
    Some(s.normalize(p))
}

/// Moves `p` onto the zero set along the gradient.
fn project(f: &SurfaceFunction, s: &SurfaceSpec, mut p: Point) -> Result<Point, EvalError> {
    for _ in 0..4 {
        let v = f.value(p)?;
        let (gz, gt) = f.gradient(p)?;
        let g2 = gz * gz + gt * gt;
        if g2 == 0.0 || v == 0.0 {
            break;
        }
        p = s.normalize(Point::new(p.z - v * gz / g2, p.theta - v * gt / g2));
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroCurve {
    /// Closed polyline; the last point connects back to the first.
    pub points: Vec<Point>,
    pub grad_norm: Vec<f64>,
    /// `+1` or `-1`: direction of the modular field along the curve, read off
    /// the winding in `theta` (or `z` on the torus) or, for contractible
    /// loops, the sign of the enclosed area in the `(z, theta)` plane.
    pub orientation: i8,
    pub theta_winding: i32,
    pub z_winding: i32,
    /// Grid nodes on either side of one crossing, for locating adjacent regions.
    #[serde(skip)]
    anchor: (usize, usize),
}

impl ZeroCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_grad_norm(&self) -> f64 {
        self.grad_norm.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_z(&self) -> f64 {
        self.points.iter().map(|p| p.z).sum::<f64>() / self.points.len() as f64
    }
}

struct Segment {
    edges: [usize; 2],
    cell: usize,
}

struct Extraction {
    grid: Grid,
    curves: Vec<ZeroCurve>,
    /// Saddle cells and whether the center shares the sign of the cell's first corner.
    saddles: Vec<(usize, usize, bool)>,
    regularity_threshold: f64,
}

fn edge_nodes(g: &Grid, e: usize) -> (usize, usize) {
    let node = e / 2;
    let (k, j) = (node / g.nt, node % g.nt);
    if e % 2 == 0 {
        (node, g.idx(k, (j + 1) % g.nt))
    } else {
        (node, g.idx((k + 1) % g.nz, j))
    }
}

fn edge_point(g: &Grid, s: &SurfaceSpec, e: usize) -> Point {
    let (a, b) = edge_nodes(g, e);
    let (va, vb) = (g.values[a], g.values[b]);
    let t = va / (va - vb);
    let (k, j) = (a / g.nt, a % g.nt);
    let base = Point::new(s.z_node(k), s.theta_node(j));
    if e % 2 == 0 {
        s.normalize(Point::new(base.z, base.theta + t * s.theta_step()))
    } else {
        s.normalize(Point::new(base.z + t * s.z_step(), base.theta))
    }
}

fn extract(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<Extraction, SurfaceError> {
    s.validate()?;
    check_pole_margin(f, s)?;
    let grid = Grid::sample(f, s)?;
    let (nz, nt) = (grid.nz, grid.nt);
    let gmax = max_grad_norm(f, s)?;
    let threshold = REGULARITY_FACTOR * gmax;
    let fmax = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = s.z_step().max(s.theta_step());
    let krange = if s.periodic_z() { nz } else { nz - 1 };

    // Marching squares.
    let cells: Vec<(Vec<[usize; 2]>, Option<bool>)> = (0..krange * nt)
        .into_par_iter()
        .map(|cell| {
            let (k, j) = (cell / nt, cell % nt);
            let (k1, j1) = ((k + 1) % nz, (j + 1) % nt);
            let corners = [grid.at(k, j), grid.at(k, j1), grid.at(k1, j1), grid.at(k1, j)];
            let sg = corners.map(positive);
            let bottom = 2 * grid.idx(k, j);
            let right = 2 * grid.idx(k, j1) + 1;
            let top = 2 * grid.idx(k1, j);
            let left = 2 * grid.idx(k, j) + 1;
            let crossed: Vec<usize> = [(bottom, 0, 1), (right, 1, 2), (top, 3, 2), (left, 0, 3)]
                .iter()
                .filter(|(_, a, b)| sg[*a] != sg[*b])
                .map(|(e, _, _)| *e)
                .collect();
            match crossed.len() {
                0 => Ok((vec![], None)),
                2 => Ok((vec![[crossed[0], crossed[1]]], None)),
                _ => {
                    let center = Point::new(s.z_node(k) + 0.5 * s.z_step(), s.theta_node(j) + 0.5 * s.theta_step());
                    let joined = positive(f.value(center)?) == sg[0];
                    let segs = if joined {
                        vec![[bottom, right], [top, left]]
                    } else {
                        vec![[bottom, left], [right, top]]
                    };
                    Ok((segs, Some(joined)))
                }
            }
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut segments = Vec::new();
    let mut saddles = Vec::new();
    for (cell, (segs, saddle)) in cells.into_iter().enumerate() {
        if let Some(joined) = saddle {
            saddles.push((cell / nt, cell % nt, joined));
        }
        segments.extend(segs.into_iter().map(|edges| Segment { edges, cell }));
    }

    reject_tangential_zeros(f, s, &grid, &saddles, threshold, fmax, gmax, h)?;

    // Chain segments through shared edges.
    let mut incident: Vec<[u32; 2]> = vec![[u32::MAX; 2]; 2 * nz * nt];
    for (i, seg) in segments.iter().enumerate() {
        for &e in &seg.edges {
            let slot = &mut incident[e];
            if slot[0] == u32::MAX {
                slot[0] = i as u32;
            } else {
                slot[1] = i as u32;
            }
        }
    }
    let mut curve_of = vec![usize::MAX; segments.len()];
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for start in 0..segments.len() {
        if curve_of[start] != usize::MAX {
            continue;
        }
        let id = chains.len();
        let first_edge = segments[start].edges[0];
        let mut edges = vec![first_edge];
        let mut seg = start;
        let mut at = segments[start].edges[1];
        curve_of[start] = id;
        while at != first_edge {
            edges.push(at);
            let [a, b] = incident[at];
            if b == u32::MAX {
                let p = edge_point(&grid, s, at);
                return Err(SurfaceError::Topology(format!(
                    "zero set leaves the grid near z={:.4}, theta={:.4}",
                    p.z, p.theta
                )));
            }
            let next = if a as usize == seg { b as usize } else { a as usize };
            if curve_of[next] != usize::MAX && next != start {
                return Err(SurfaceError::Topology("zero set chains do not close".into()));
            }
            curve_of[next] = id;
            seg = next;
            let se = segments[next].edges;
            at = if se[0] == at { se[1] } else { se[0] };
        }
        chains.push(edges);
    }

    // Two curves through one cell are not separated at this resolution.
    let mut owner = std::collections::HashMap::new();
    for (i, seg) in segments.iter().enumerate() {
        if let Some(&other) = owner.get(&seg.cell) {
            if other != curve_of[i] {
                let (k, j) = (seg.cell / nt, seg.cell % nt);
                return Err(SurfaceError::Topology(format!(
                    "two zero curves meet in the grid cell at z={:.4}, theta={:.4}",
                    s.z_node(k),
                    s.theta_node(j)
                )));
            }
        } else {
            owner.insert(seg.cell, curve_of[i]);
        }
    }

    let mut curves = chains
        .par_iter()
        .map(|edges| build_curve(f, s, &grid, edges, threshold))
        .collect::<Result<Vec<_>, _>>()?;
    // Crossings that sit exactly on grid lines leave no saddle cell behind.
    let on_curves: Vec<Point> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
    reject_critical_zeros(f, s, &on_curves, threshold, fmax, gmax)?;
    curves.sort_by(|a, b| {
        a.mean_z()
            .total_cmp(&b.mean_z())
            .then(a.points[0].theta.total_cmp(&b.points[0].theta))
    });
    Ok(Extraction {
        grid,
        curves,
        saddles,
        regularity_threshold: threshold,
    })
}

/// Rejects zeros of `f` where `f` does not change sign or where level curves cross.
#[allow(clippy::too_many_arguments)]
fn reject_tangential_zeros(
    f: &SurfaceFunction,
    s: &SurfaceSpec,
    g: &Grid,
    saddles: &[(usize, usize, bool)],
    threshold: f64,
    fmax: f64,
    gmax: f64,
    h: f64,
) -> Result<(), SurfaceError> {
    let (nz, nt) = (g.nz, g.nt);
    let near = 2.0 * h * gmax;
    let mut starts: Vec<Point> = saddles
        .iter()
        .map(|&(k, j, _)| Point::new(s.z_node(k) + 0.5 * s.z_step(), s.theta_node(j) + 0.5 * s.theta_step()))
        .collect();
    for k in 0..nz {
        for j in 0..nt {
            let v = g.at(k, j);
            if v.abs() > near {
                continue;
            }
            let mut local_min = true;
            let mut same_sign = true;
            for dk in [-1i64, 0, 1] {
                let kk = k as i64 + dk;
                let kk = if s.periodic_z() {
                    kk.rem_euclid(nz as i64) as usize
                } else if kk < 0 || kk >= nz as i64 {
                    continue;
                } else {
                    kk as usize
                };
                for dj in [-1i64, 0, 1] {
                    let w = g.at(kk, (j as i64 + dj).rem_euclid(nt as i64) as usize);
                    local_min &= v.abs() <= w.abs();
                    same_sign &= positive(v) == positive(w);
                }
            }
            if local_min && same_sign {
                starts.push(Point::new(s.z_node(k), s.theta_node(j)));
            }
        }
    }
    reject_critical_zeros(f, s, &starts, threshold, fmax, gmax)
}

/// Fails if Newton's method for `grad f = 0` from any start reaches a zero of `f`.
fn reject_critical_zeros(
    f: &SurfaceFunction,
    s: &SurfaceSpec,
    starts: &[Point],
    threshold: f64,
    fmax: f64,
    gmax: f64,
) -> Result<(), SurfaceError> {
    let hit = starts.par_iter().find_map_first(|&p0| {
        let p = critical_point_near(f, s, p0)?;
        let v = f.value(p).ok()?;
        let gn = f.grad_norm(p).ok()?;
        (v.abs() <= 1e-9 * fmax && gn < threshold.max(1e-12 * gmax)).then_some((p, gn))
    });
    match hit {
        Some((p, gn)) => Err(SurfaceError::Irregular {
            z: p.z,
            theta: p.theta,
            grad_norm: gn,
            threshold,
        }),
        None => Ok(()),
    }
}

fn build_curve(
    f: &SurfaceFunction,
    s: &SurfaceSpec,
    g: &Grid,
    edges: &[usize],
    threshold: f64,
) -> Result<ZeroCurve, SurfaceError> {
    let mut points = edges
        .iter()
        .map(|&e| project(f, s, edge_point(g, s, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let anchor = edge_nodes(g, edges[0]);
    // Orient along the modular field.
    let m = points.len();
    let mut flow = 0.0;
    for i in 0..m {
        let (xz, xt) = f.modular_field(points[i])?;
        let (dz, dt) = s.delta(points[(i + m - 1) % m], points[(i + 1) % m]);
        flow += xz * dz + xt * dt;
    }
    if flow < 0.0 {
        points.reverse();
    }
    let mut grad_norm = Vec::with_capacity(m);
    for &p in &points {
        let gn = f.grad_norm(p)?;
        if !(gn >= threshold) {
            return Err(SurfaceError::Irregular {
                z: p.z,
                theta: p.theta,
                grad_norm: gn,
                threshold,
            });
        }
        grad_norm.push(gn);
    }
    // Unwrapped windings and the enclosed area.
    let (mut uz, mut ut) = (points[0].z, points[0].theta);
    let (mut tot_z, mut tot_t, mut area) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let (dz, dt) = s.delta(points[i], points[(i + 1) % m]);
        area += 0.5 * (uz * (ut + dt) - (uz + dz) * ut);
        uz += dz;
        ut += dt;
        tot_z += dz;
        tot_t += dt;
    }
    let theta_winding = (tot_t / TAU).round() as i32;
    let z_winding = if s.periodic_z() { tot_z.round() as i32 } else { 0 };
    let orientation = if theta_winding != 0 {
        theta_winding.signum()
    } else if z_winding != 0 {
        z_winding.signum()
    } else if area >= 0.0 {
        1
    } else {
        -1
    } as i8;
    Ok(ZeroCurve {
        points,
        grad_norm,
        orientation,
        theta_winding,
        z_winding,
        anchor,
    })
}

/// Closed oriented zero curves of `f`, sorted by mean `z`.
pub fn extract_zero_curves(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<Vec<ZeroCurve>, SurfaceError> {
    Ok(extract(f, s)?.curves)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    pub error_estimate: f64,
}

/// `T = closed integral of dl / |grad f|`, trapezoid on the polyline and on its
/// midpoint refinement, combined by Richardson extrapolation.
pub fn modular_period(f: &SurfaceFunction, c: &ZeroCurve, s: &SurfaceSpec) -> Result<PeriodEstimate, SurfaceError> {
    let m = c.points.len();
    let mut coarse = 0.0;
    let mut fine = 0.0;
    for i in 0..m {
        let (p, q) = (c.points[i], c.points[(i + 1) % m]);
        let (dz, dt) = s.delta(p, q);
        let mid = project(f, s, s.normalize(Point::new(p.z + 0.5 * dz, p.theta + 0.5 * dt)))?;
        let gm = f.grad_norm(mid)?;
        let (gp, gq) = (c.grad_norm[i], c.grad_norm[(i + 1) % m]);
        coarse += dz.hypot(dt) * 0.5 * (1.0 / gp + 1.0 / gq);
        let (az, at) = s.delta(p, mid);
        let (bz, bt) = s.delta(mid, q);
        fine += az.hypot(at) * 0.5 * (1.0 / gp + 1.0 / gm) + bz.hypot(bt) * 0.5 * (1.0 / gm + 1.0 / gq);
    }
    let period = fine + (fine - coarse) / 3.0;
    if !period.is_finite() || period <= 0.0 {
        return Err(SurfaceError::Eval(EvalError::Pole {
            z: c.points[0].z,
            theta: c.points[0].theta,
        }));
    }
    Ok(PeriodEstimate {
        period,
        error_estimate: (period - fine).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVertex {
    pub id: usize,
    pub sign: i8,
    pub sample: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEdge {
    pub a: usize,
    pub b: usize,
    pub curve: usize,
    pub period: f64,
}

/// Regions of the complement of the zero set joined along the curves separating them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedWeightedGraph {
    pub vertices: Vec<RegionVertex>,
    pub edges: Vec<RegionEdge>,
}

impl SignedWeightedGraph {
    pub fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        if self.edges.len() + 1 != n {
            return false;
        }
        let mut uf = UnionFind::<usize>::new(n);
        self.edges.iter().all(|e| uf.union(e.a, e.b))
    }

    /// Undirected DOT with signs as vertex labels and periods as edge labels.
    pub fn to_dot(&self) -> String {
        write_dot(
            self.vertices.iter().map(|v| (v.id, v.sign)),
            self.edges.iter().map(|e| (e.a, e.b, e.period)),
        )
    }
}

pub(crate) fn write_dot(
    vertices: impl Iterator<Item = (usize, i8)>,
    edges: impl Iterator<Item = (usize, usize, f64)>,
) -> String {
    let mut out = String::from("graph regions {\n");
    for (id, sign) in vertices {
        out += &format!("  {id} [label=\"{}\"];\n", if sign > 0 { '+' } else { '-' });
    }
    for (a, b, w) in edges {
        out += &format!("  {a} -- {b} [label=\"{w:.6}\"];\n");
    }
    out + "}\n"
}

fn build_region_graph(
    s: &SurfaceSpec,
    ex: &Extraction,
    periods: &[f64],
) -> Result<SignedWeightedGraph, SurfaceError> {
    let g = &ex.grid;
    let (nz, nt) = (g.nz, g.nt);
    let mut uf = UnionFind::<usize>::new(nz * nt);
    for k in 0..nz {
        for j in 0..nt {
            let here = positive(g.at(k, j));
            if positive(g.at(k, (j + 1) % nt)) == here {
                uf.union(g.idx(k, j), g.idx(k, (j + 1) % nt));
            }
            if (k + 1 < nz || s.periodic_z()) && positive(g.at((k + 1) % nz, j)) == here {
                uf.union(g.idx(k, j), g.idx((k + 1) % nz, j));
            }
        }
    }
    for &(k, j, joined) in &ex.saddles {
        let (k1, j1) = ((k + 1) % nz, (j + 1) % nt);
        if joined {
            uf.union(g.idx(k, j), g.idx(k1, j1));
        } else {
            uf.union(g.idx(k, j1), g.idx(k1, j));
        }
    }
    let mut region_of_root = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    let mut region = vec![0usize; nz * nt];
    for (node, slot) in region.iter_mut().enumerate() {
        let root = uf.find(node);
        *slot = *region_of_root.entry(root).or_insert_with(|| {
            let id = vertices.len();
            let (k, j) = (node / nt, node % nt);
            vertices.push(RegionVertex {
                id,
                sign: if positive(g.values[node]) { 1 } else { -1 },
                sample: Point::new(s.z_node(k), s.theta_node(j)),
            });
            id
        });
    }
    let edges: Vec<RegionEdge> = ex
        .curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (a, b) = (region[c.anchor.0], region[c.anchor.1]);
            RegionEdge {
                a: a.min(b),
                b: a.max(b),
                curve: i,
                period: periods[i],
            }
        })
        .collect();
    for e in &edges {
        if vertices[e.a].sign == vertices[e.b].sign {
            return Err(SurfaceError::Topology(format!(
                "curve {} separates two regions of the same sign",
                e.curve
            )));
        }
    }
    let graph = SignedWeightedGraph { vertices, edges };
    if s.kind == SurfaceKind::Sphere && !graph.is_tree() {
        return Err(SurfaceError::Topology(format!(
            "region graph with {} regions and {} curves is not a tree; resolution too low",
            graph.vertices.len(),
            graph.edges.len()
        )));
    }
    Ok(graph)
}

/// Signed region graph weighted by modular periods; on the sphere it must be a tree.
pub fn region_graph(
    f: &SurfaceFunction,
    s: &SurfaceSpec,
    curves: &[ZeroCurve],
) -> Result<SignedWeightedGraph, SurfaceError> {
    let mut ex = extract(f, s)?;
    if ex.curves.len() != curves.len() {
        return Err(SurfaceError::Topology("curves do not belong to this function and grid".into()));
    }
    ex.curves = curves.to_vec();
    let periods = curves
        .iter()
        .map(|c| modular_period(f, c, s).map(|p| p.period))
        .collect::<Result<Vec<_>, _>>()?;
    build_region_graph(s, &ex, &periods)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Difference between the two extrapolated values.
    pub residual: f64,
    pub epsilons: [f64; 3],
}

fn brent(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let mut conv = roots::SimpleConvergency { eps: 1e-15, max_iter: 200 };
    roots::find_root_brent(a, b, |x| g(x), &mut conv).ok()
}

/// Adaptive double-exponential quadrature with bisection on poor error estimates.
fn integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: u32) -> f64 {
    let out = quadrature::double_exponential::integrate(g, a, b, rel_tol * (b - a));
    let tol = rel_tol * out.integral.abs().max(b - a);
    if out.error_estimate <= tol || depth == 0 {
        return out.integral;
    }
    let m = 0.5 * (a + b);
    integrate(g, a, m, rel_tol, depth - 1) + integrate(g, m, b, rel_tol, depth - 1)
}

struct Column<'a> {
    g: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
    /// Samples covering `[zs[0], zs[last]]`, ends included.
    zs: Vec<f64>,
    vals: Vec<f64>,
}

fn column<'a>(f: &'a SurfaceFunction, s: &SurfaceSpec, theta: f64) -> Result<Column<'a>, SurfaceError> {
    let samples = 4 * s.grid_n;
    let eval = move |z: f64| f.value(Point::new(z, theta));
    let (mut lo, hi) = s.open_chart_z();
    let step = (hi - lo) / samples as f64;
    if s.periodic_z() {
        // Start the period where |g| is largest, away from any cut.
        let mut best = (f64::NEG_INFINITY, lo);
        for i in 0..samples {
            let z = lo + (i as f64 + 0.5) * step;
            let v = eval(z)?.abs();
            if v > best.0 {
                best = (v, z);
            }
        }
        lo = best.1;
    }
    let zs: Vec<f64> = (0..=samples).map(|i| lo + i as f64 * step).collect();
    let vals = zs.iter().map(|&z| eval(z)).collect::<Result<Vec<_>, _>>()?;
    Ok(Column {
        g: Box::new(move |z| eval(z).unwrap_or(f64::NAN)),
        zs,
        vals,
    })
}

impl Column<'_> {
    /// Sampled crossings of the levels `-eps` and `+eps`.
    fn crossings(&self, eps: f64) -> [usize; 2] {
        [-eps, eps].map(|level| {
            self.vals
                .windows(2)
                .filter(|w| (w[0] - level) * (w[1] - level) < 0.0)
                .count()
        })
    }

    /// Integral of `1/g` over `{|g| >= eps}` within the column.
    fn integral(&self, eps: f64) -> f64 {
        let g = &self.g;
        let inv = |z: f64| 1.0 / g(z);
        let last = self.zs.len() - 1;
        let mut cuts = vec![self.zs[0]];
        for i in 0..last {
            let (a, b) = (self.zs[i], self.zs[i + 1]);
            let (va, vb) = (self.vals[i], self.vals[i + 1]);
            let mut here: Vec<f64> = [-eps, eps]
                .iter()
                .filter(|&&level| (va - level) * (vb - level) < 0.0)
                .filter_map(|&level| brent(&|z| g(z) - level, a, b))
                .collect();
            here.sort_by(f64::total_cmp);
            cuts.extend(here);
        }
        cuts.push(self.zs[last]);
        cuts.windows(2)
            .filter(|w| w[1] > w[0] && g(0.5 * (w[0] + w[1])).abs() >= eps)
            .map(|w| integrate(&inv, w[0], w[1], 1e-10, 8))
            .sum()
    }
}

/// Principal value of the integral of `1/f dz dtheta`, extrapolated linearly in the cut-off.
pub fn regularized_volume(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<VolumeEstimate, SurfaceError> {
    s.validate()?;
    check_pole_margin(f, s)?;
    let grid = Grid::sample(f, s)?;
    let fmax = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps0 = 1e-3 * fmax;
    let epsilons = [eps0, 0.5 * eps0, 0.25 * eps0];
    let n = s.grid_n;
    let columns = (0..n)
        .into_par_iter()
        .map(|j| column(f, s, s.theta_node(j)))
        .collect::<Result<Vec<_>, SurfaceError>>()?;
    let totals: [f64; 3] = epsilons.map(|eps| {
        let counts: Vec<[usize; 2]> = columns.iter().map(|c| c.crossings(eps)).collect();
        if counts.iter().all(|c| *c == counts[0]) {
            columns.par_iter().map(|c| c.integral(eps)).sum::<f64>() * s.theta_step()
        } else {
            tangent_split_integral(f, s, eps, &counts)
        }
    });
    let [i0, i1, i2] = totals;
    let e1 = 2.0 * i1 - i0;
    let e2 = 2.0 * i2 - i1;
    let residual = (e2 - e1).abs();
    let tolerance = 1e-3 * e2.abs().max(1.0);
    if !(residual <= tolerance) {
        return Err(SurfaceError::VolumeNotConverged { residual, tolerance });
    }
    Ok(VolumeEstimate {
        value: e2,
        residual,
        epsilons,
    })
}

/// Integral over `theta` when some column is tangent to a level `|f| = eps`.
/// The column integral has square-root profiles at those angles, so the circle
/// is split there and each piece goes to the double-exponential rule, which
/// concentrates its nodes at the ends.
fn tangent_split_integral(f: &SurfaceFunction, s: &SurfaceSpec, eps: f64, counts: &[[usize; 2]]) -> f64 {
    let n = counts.len();
    let count_at = |theta: f64| column(f, s, theta).map(|c| c.crossings(eps)).ok();
    let mut breaks: Vec<f64> = (0..n)
        .into_par_iter()
        .filter(|&j| counts[j] != counts[(j + 1) % n])
        .map(|j| {
            let (mut a, mut b) = (s.theta_node(j), s.theta_node(j) + s.theta_step());
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if count_at(m) == Some(counts[j]) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        })
        .collect();
    // The seam is a break too: the expression need not be smooth across it.
    breaks.extend([0.0, TAU]);
    breaks.sort_by(f64::total_cmp);
    breaks
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let h = |theta: f64| column(f, s, theta).map(|c| c.integral(eps)).unwrap_or(f64::NAN);
            integrate(&h, a, b, 1e-9, 4)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeForward {
    pub expr: String,
    /// `1 + f b` keeps one strict sign on the whole chart, so the gauged bivector exists.
    pub valid: bool,
    #[serde(skip)]
    pub ast: Expr,
}

/// `f' = f / (1 + f b)`, the bivector of the gauge transform by `b dz ^ dtheta`.
pub fn gauge_forward(f: &Expr, b: &Expr, s: &SurfaceSpec) -> GaugeForward {
    let one = Box::new(Expr::Const(1.0));
    let denom = simplify(&Expr::Add(one, Box::new(Expr::Mul(Box::new(f.clone()), Box::new(b.clone())))));
    let ast = simplify(&Expr::Div(Box::new(f.clone()), Box::new(denom.clone())));
    let n = s.grid_n;
    let (lo, hi) = s.chart_z();
    let dz = (hi - lo) / n as f64;
    let signs = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let p = Point::new(lo + (i / n) as f64 * dz + 0.5 * dz, s.theta_node(i % n));
            match denom.eval(p) {
                Ok(v) if v > 0.0 => 1i8,
                Ok(v) if v < 0.0 => -1,
                _ => 0,
            }
        })
        .collect::<Vec<_>>();
    let mut valid = signs.iter().all(|&x| x != 0 && x == signs[0]);
    if valid {
        valid = check_pole_margin(&SurfaceFunction::new(ast.clone()), s).is_ok();
    }
    GaugeForward {
        expr: ast.to_string(),
        valid,
        ast,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodMismatch {
    pub curve: usize,
    pub period_1: f64,
    pub period_2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GaugeVerdict {
    GaugeEquivalentUpToDiffeo,
    PeriodsDiffer { mismatches: Vec<PeriodMismatch> },
    ZeroSetsDiffer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeWitness {
    pub verdict: GaugeVerdict,
    /// Curve `i` of the first function matches curve `matching[i]` of the second.
    pub matching: Vec<usize>,
    /// Whether matched curves carry the same modular orientation.
    pub orientations_agree: bool,
    /// `1/f2 - 1/f` at the grid nodes, row-major in `(z, theta)`.
    #[serde(skip)]
    pub coefficient: Vec<f64>,
    pub coefficient_max: f64,
    /// Largest `|1/f2 - 1/f|` at normal distances `h`, `h/4`, `h/16` from the zero set.
    pub collar_max: [f64; 3],
    pub bounded: bool,
}

/// Mean distance from the points of `a` to the polyline vertices of `b`.
fn curve_distance(s: &SurfaceSpec, a: &ZeroCurve, b: &ZeroCurve) -> f64 {
    let total: f64 = a
        .points
        .par_iter()
        .map(|&p| {
            b.points
                .iter()
                .map(|&q| {
                    let (dz, dt) = s.delta(p, q);
                    dz.hypot(dt)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / a.points.len() as f64
}

/// Numerical check that `f` and `f2` are related by a gauge transformation:
/// matching zero curves, matching periods, and a bounded `1/f2 - 1/f`.
pub fn gauge_witness(f: &SurfaceFunction, f2: &SurfaceFunction, s: &SurfaceSpec) -> Result<GaugeWitness, SurfaceError> {
    let c1 = extract_zero_curves(f, s)?;
    let c2 = extract_zero_curves(f2, s)?;
    let h = s.z_step().max(s.theta_step());
    let n = s.grid_n;
    let coefficient: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let p = Point::new(s.z_node(i / n), s.theta_node(i % n));
            match (f.value(p), f2.value(p)) {
                (Ok(a), Ok(b)) => 1.0 / b - 1.0 / a,
                _ => f64::NAN,
            }
        })
        .collect();
    let coefficient_max = coefficient.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut collar_max = [0.0f64; 3];
    for c in &c1 {
        let stride = (c.points.len() / 64).max(1);
        for p in c.points.iter().step_by(stride) {
            let (gz, gt) = f.gradient(*p)?;
            let gn = gz.hypot(gt);
            for (slot, d) in collar_max.iter_mut().zip([h, h / 4.0, h / 16.0]) {
                for side in [-1.0, 1.0] {
                    let q = s.normalize(Point::new(p.z + side * d * gz / gn, p.theta + side * d * gt / gn));
                    let v = match (f.value(q), f2.value(q)) {
                        (Ok(a), Ok(b)) => (1.0 / b - 1.0 / a).abs(),
                        _ => f64::INFINITY,
                    };
                    *slot = slot.max(if v.is_nan() { f64::INFINITY } else { v });
                }
            }
        }
    }
    // An unbounded coefficient grows like 1/d; a bounded one settles.
    let bounded = collar_max.iter().all(|v| v.is_finite()) && collar_max[2] <= 2.0 * collar_max[0] + 1e-9;

    let mut witness = GaugeWitness {
        verdict: GaugeVerdict::ZeroSetsDiffer,
        matching: vec![],
        orientations_agree: false,
        coefficient,
        coefficient_max,
        collar_max,
        bounded,
    };
    if c1.len() != c2.len() {
        return Ok(witness);
    }
    let mut used = vec![false; c2.len()];
    for a in &c1 {
        let best = c2
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, b)| (i, curve_distance(s, a, b).max(curve_distance(s, b, a))))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((i, d)) if d <= 2.0 * h => {
                used[i] = true;
                witness.matching.push(i);
            }
            _ => {
                witness.matching.clear();
                return Ok(witness);
            }
        }
    }
    witness.orientations_agree = c1
        .iter()
        .zip(&witness.matching)
        .all(|(a, &i)| a.orientation == c2[i].orientation);
    let mut mismatches = Vec::new();
    for (i, (a, &j)) in c1.iter().zip(&witness.matching).enumerate() {
        let t1 = modular_period(f, a, s)?.period;
        let t2 = modular_period(f2, &c2[j], s)?.period;
        if (t1 - t2).abs() > PERIOD_MATCH_TOL * t1.abs().max(t2.abs()) {
            mismatches.push(PeriodMismatch {
                curve: i,
                period_1: t1,
                period_2: t2,
            });
        }
    }
    witness.verdict = if mismatches.is_empty() {
        GaugeVerdict::GaugeEquivalentUpToDiffeo
    } else {
        GaugeVerdict::PeriodsDiffer { mismatches }
    };
    Ok(witness)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub grid_n: usize,
    pub regularity_threshold: f64,
    pub min_grad_norm: Option<f64>,
    pub period_error_estimates: Vec<f64>,
    pub volume_residual: f64,
    pub volume_epsilons: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub surface: SurfaceSpec,
    pub expression: String,
    pub curves: Vec<ZeroCurve>,
    pub periods: Vec<f64>,
    pub graph: SignedWeightedGraph,
    pub regularized_volume: f64,
    pub diagnostics: Diagnostics,
}

impl PartialEq for ZeroCurve {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.orientation == other.orientation
    }
}

/// Zero curves, periods, region graph, and regularized volume in one pass.
pub fn classify(f: &SurfaceFunction, s: &SurfaceSpec) -> Result<ClassifierReport, SurfaceError> {
    let ex = extract(f, s)?;
    let estimates = ex
        .curves
        .par_iter()
        .map(|c| modular_period(f, c, s))
        .collect::<Result<Vec<_>, _>>()?;
    let periods: Vec<f64> = estimates.iter().map(|e| e.period).collect();
    let graph = build_region_graph(s, &ex, &periods)?;
    let volume = regularized_volume(f, s)?;
    let min_grad_norm = ex.curves.iter().map(ZeroCurve::min_grad_norm).reduce(f64::min);
    Ok(ClassifierReport {
        surface: *s,
        expression: f.expr().to_string(),
        diagnostics: Diagnostics {
            grid_n: s.grid_n,
            regularity_threshold: ex.regularity_threshold,
            min_grad_norm,
            period_error_estimates: estimates.iter().map(|e| e.error_estimate).collect(),
            volume_residual: volume.residual,
            volume_epsilons: volume.epsilons,
        },
        curves: ex.curves,
        periods,
        graph,
        regularized_volume: volume.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_expr::parse;
    use std::f64::consts::PI;

    fn func(src: &str) -> SurfaceFunction {
        SurfaceFunction::new(parse(src).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn equator() {
        let s = SurfaceSpec::sphere(512);
        let f = func("z");
        let curves = extract_zero_curves(&f, &s).unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].len(), 512);
        assert_eq!(curves[0].orientation, 1);
        assert!(curves[0].points.iter().all(|p| p.z.abs() < 1e-12));
        let t = modular_period(&f, &curves[0], &s).unwrap();
        assert!(rel(t.period, TAU) < 1e-9, "{t:?}");
    }

    #[test]
    fn three_parallels() {
        let s = SurfaceSpec::sphere(512);
        let f = func("z*(z^2-1/4)");
        let curves = extract_zero_curves(&f, &s).unwrap();
        assert_eq!(curves.len(), 3);
        let expect = [4.0 * PI, 8.0 * PI, 4.0 * PI];
        for ((c, z), t) in curves.iter().zip([-0.5, 0.0, 0.5]).zip(expect) {
            assert!((c.mean_z() - z).abs() < 1e-9);
            let p = modular_period(&f, c, &s).unwrap().period;
            assert!(rel(p, t) < 1e-6, "{p} vs {t}");
        }
        assert_eq!(curves.iter().map(|c| c.orientation).collect::<Vec<_>>(), vec![1, -1, 1]);
    }

    #[test]
    fn symplectic_case_has_no_curves() {
        let s = SurfaceSpec::sphere(128);
        assert!(extract_zero_curves(&func("1 + z^2"), &s).unwrap().is_empty());
    }

    #[test]
    fn non_generic_inputs() {
        let s = SurfaceSpec::sphere(128);
        let err = extract_zero_curves(&func("z^2"), &s).unwrap_err();
        assert_eq!(err.check_name(), Some("regularity"), "{err}");
        let err = extract_zero_curves(&func("z^2 - 0.999"), &s).unwrap_err();
        assert_eq!(err.check_name(), Some("pole_margin"));
        let err = extract_zero_curves(&func("z*(z - cos(theta)/2)"), &s).unwrap_err();
        assert_eq!(err.check_name(), Some("regularity"), "{err}");
        assert!(matches!(
            extract_zero_curves(&func("z"), &SurfaceSpec::sphere(32)),
            Err(SurfaceError::InvalidSpec(_))
        ));
    }

    #[test]
    fn contractible_loop() {
        let s = SurfaceSpec::sphere(256);
        // Circle of radius 0.3 around (0, pi); the modular field turns counterclockwise.
        let f = func("z^2 + (theta - pi)^2 - 0.09");
        let curves = extract_zero_curves(&f, &s).unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].theta_winding, 0);
        // |grad f| = 0.6 on the circle, so T = 2 pi 0.3 / 0.6 = pi.
        let t = modular_period(&f, &curves[0], &s).unwrap().period;
        assert!(rel(t, PI) < 1e-4, "{t}");
        assert_eq!(curves[0].orientation, 1);
        let g = region_graph(&f, &s, &curves).unwrap();
        assert_eq!(g.vertices.len(), 2);
    }

    #[test]
    fn region_graphs() {
        let s = SurfaceSpec::sphere(256);
        let f = func("z*(z^2-1/4)");
        let curves = extract_zero_curves(&f, &s).unwrap();
        let g = region_graph(&f, &s, &curves).unwrap();
        assert_eq!(g.vertices.iter().map(|v| v.sign).collect::<Vec<_>>(), vec![-1, 1, -1, 1]);
        let path: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(path, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(g.is_tree());
        let g = region_graph(&func("2"), &s, &[]).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn torus_curves() {
        let s = SurfaceSpec::torus(128);
        let f = func("sin(2*pi*z)");
        let curves = extract_zero_curves(&f, &s).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            // |f_z| = 2 pi on both circles.
            let t = modular_period(&f, c, &s).unwrap().period;
            assert!(rel(t, 1.0) < 1e-6, "{t}");
        }
        let g = region_graph(&f, &s, &curves).unwrap();
        // Two annuli glued along two circles: a cycle.
        assert_eq!((g.vertices.len(), g.edges.len()), (2, 2));
        assert!(!g.is_tree());
    }

    #[test]
    fn volumes() {
        let s = SurfaceSpec::sphere(128);
        let v = regularized_volume(&func("1"), &s).unwrap();
        assert!((v.value - 4.0 * PI).abs() < 1e-8, "{v:?}");
        let v = regularized_volume(&func("z"), &s).unwrap();
        assert!(v.value.abs() < 1e-2, "{v:?}");
        // Odd part cancels; the remaining piece is exact: PV of 1/(z+1/2) over (-1, 1) is ln 3.
        let v = regularized_volume(&func("z + 1/2"), &s).unwrap();
        assert!((v.value - TAU * 3f64.ln()).abs() < 1e-3, "{v:?}");
    }

    #[test]
    fn gauge_forward_examples() {
        let s = SurfaceSpec::sphere(128);
        let z = parse("z").unwrap();
        let g = gauge_forward(&z, &parse("0").unwrap(), &s);
        assert_eq!(g.ast, z);
        assert!(g.valid);
        let g = gauge_forward(&z, &parse("1").unwrap(), &s);
        assert_eq!(g.expr, "z/(1+z)");
        assert!(g.valid);
        let g = gauge_forward(&z, &parse("4").unwrap(), &s);
        assert!(!g.valid);
    }

    #[test]
    fn witness_examples() {
        let s = SurfaceSpec::sphere(256);
        let f = func("z");
        let w = gauge_witness(&f, &f, &s).unwrap();
        assert_eq!(w.verdict, GaugeVerdict::GaugeEquivalentUpToDiffeo);
        assert_eq!(w.coefficient_max, 0.0);
        assert!(w.bounded);
        let w = gauge_witness(&f, &func("z/(1+z)"), &s).unwrap();
        assert_eq!(w.verdict, GaugeVerdict::GaugeEquivalentUpToDiffeo);
        assert!(w.bounded);
        assert!((w.coefficient_max - 1.0).abs() < 1e-9);
        let w = gauge_witness(&f, &func("2*z"), &s).unwrap();
        match &w.verdict {
            GaugeVerdict::PeriodsDiffer { mismatches } => {
                assert!(rel(mismatches[0].period_1, TAU) < 1e-6);
                assert!(rel(mismatches[0].period_2, PI) < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        assert!(!w.bounded);
        let w = gauge_witness(&f, &func("z*(z^2-1/4)"), &s).unwrap();
        assert_eq!(w.verdict, GaugeVerdict::ZeroSetsDiffer);
    }

    #[test]
    fn classify_report() {
        let s = SurfaceSpec::sphere(256);
        let r = classify(&func("z*(z^2-1/4)"), &s).unwrap();
        assert_eq!(r.curves.len(), 3);
        assert_eq!(r.graph.edges.len(), 3);
        assert!(r.regularized_volume.abs() < 1e-2);
        assert!(r.diagnostics.min_grad_norm.unwrap() > 0.2);
    }
}
