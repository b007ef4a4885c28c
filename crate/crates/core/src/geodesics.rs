//! Upper bounds for the weighted distance
//! d_w(x, y) = inf over curves γ from x to y of ∫_γ w,
//! by a shortest-path search on a lattice followed by curve smoothing.
//!
//! Every reported value is the integral of w along an explicit admissible
//! polyline, so it is an upper bound for d_w by definition of the infimum.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::curves::{curve_integral, Curve, DEFAULT_TOL};
use crate::domains::{Domain, Weight};
use crate::error::{Error, Result};
use crate::majorant::Majorant;
use crate::math;
use crate::point::{Point, MAX_DIM};

/// Cap on lattice size; beyond this the request is rejected.
const MAX_NODES: usize = 4_000_000;

/// Cap on quadrature panels per edge during search and smoothing.
const MAX_PANELS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeodesicOptions {
    /// Maximum relaxation sweeps over the interior vertices per refinement
    /// level; 0 disables smoothing.
    pub smoothing_sweeps: usize,
    /// Smoothing bisects edges until they are at most `spacing * h` long.
    pub spacing: f64,
    /// Try the straight chord x → y as a candidate curve.
    pub chord_candidate: bool,
    /// Remove vertices whose neighbours can be joined by a cheaper chord.
    pub shortcut: bool,
    /// The lattice covers the endpoints' bounding box grown by
    /// `max(window * |x − y|, 10 h)` in every direction, clipped to the
    /// domain's bounding box.
    pub window: f64,
    /// Relative tolerance for the reported value.
    pub final_tol: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            smoothing_sweeps: 50,
            spacing: 2.0,
            chord_candidate: true,
            shortcut: true,
            window: 1.0,
            final_tol: DEFAULT_TOL,
        }
    }
}

impl GeodesicOptions {
    /// Lattice path only: no chord candidate and no smoothing.
    pub fn raw_grid() -> Self {
        Self {
            smoothing_sweeps: 0,
            chord_candidate: false,
            shortcut: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeodesicResult {
    /// ∫_curve w, an upper bound for d_w(x, y).
    pub value: f64,
    pub curve: Curve,
    /// Lattice spacing.
    pub resolution: f64,
    /// Whether smoothing (or the chord) improved on the lattice path.
    pub refined: bool,
    /// Value of the unsmoothed lattice path.
    pub grid_value: f64,
}

/// Default lattice spacing for a pair: `min(0.01, |x − y| / 20)`.
pub fn default_resolution(x: &Point, y: &Point) -> f64 {
    (x.distance(y) / 20.0).min(0.01)
}

/// Minimum boundary distance kept by every admissible segment at spacing `h`.
fn clearance_floor(h: f64) -> f64 {
    0.25 * h
}

struct Lattice {
    dim: usize,
    h: f64,
    /// Integer coordinates of the box corner.
    base: [i64; MAX_DIM],
    extent: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    valid: Vec<bool>,
}

impl Lattice {
    fn build(domain: &Domain, x: &Point, y: &Point, h: f64, window: f64) -> Result<Self> {
        let dim = domain.dim();
        let margin = (window * x.distance(y)).max(10.0 * h);
        let bbox = domain.bounding_box();
        let mut base = [0i64; MAX_DIM];
        let mut extent = [1usize; MAX_DIM];
        let mut total: usize = 1;
        for k in 0..dim {
            let mut lo = x.coord(k).min(y.coord(k)) - margin;
            let mut hi = x.coord(k).max(y.coord(k)) + margin;
            if let Some((blo, bhi)) = &bbox {
                lo = lo.max(blo.coord(k));
                hi = hi.min(bhi.coord(k));
            }
            let i_lo = math::floor(lo / h) as i64;
            let i_hi = math::ceil(hi / h) as i64;
            base[k] = i_lo;
            extent[k] = (i_hi - i_lo + 1) as usize;
            total = total.saturating_mul(extent[k]);
        }
        if total > MAX_NODES {
            return Err(Error::Precondition(format!(
                "lattice with spacing {h} needs {total} nodes (limit {MAX_NODES})"
            )));
        }
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for k in 0..dim {
            strides[k] = s;
            s *= extent[k];
        }
        let mut lattice = Self {
            dim,
            h,
            base,
            extent,
            strides,
            valid: Vec::new(),
        };
        let half = 0.5 * h;
        lattice.valid = (0..total)
            .map(|i| domain.clearance(&lattice.point(i)) > half)
            .collect();
        Ok(lattice)
    }

    fn len(&self) -> usize {
        self.valid.len()
    }

    fn multi_index(&self, i: usize) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        let mut rest = i;
        for k in 0..self.dim {
            out[k] = (rest % self.extent[k]) as i64;
            rest /= self.extent[k];
        }
        out
    }

    fn point(&self, i: usize) -> Point {
        let m = self.multi_index(i);
        let mut c = [0.0; MAX_DIM];
        for k in 0..self.dim {
            c[k] = (self.base[k] + m[k]) as f64 * self.h;
        }
        Point::from_array(c, self.dim)
    }

    fn index_of(&self, m: &[i64; MAX_DIM]) -> Option<usize> {
        let mut idx = 0;
        for k in 0..self.dim {
            if m[k] < 0 || m[k] >= self.extent[k] as i64 {
                return None;
            }
            idx += m[k] as usize * self.strides[k];
        }
        Some(idx)
    }

    /// Lattice index nearest to `p` (box-relative multi-index).
    fn nearest_multi(&self, p: &Point) -> [i64; MAX_DIM] {
        let mut m = [0i64; MAX_DIM];
        for k in 0..self.dim {
            m[k] = math::round(p.coord(k) / self.h) as i64 - self.base[k];
        }
        m
    }

    /// All offsets in {−1, 0, 1}ⁿ except 0.
    fn offsets(&self) -> Vec<[i64; MAX_DIM]> {
        let count = 3usize.pow(self.dim as u32);
        (0..count)
            .filter_map(|mut c| {
                let mut o = [0i64; MAX_DIM];
                for ok in o.iter_mut().take(self.dim) {
                    *ok = (c % 3) as i64 - 1;
                    c /= 3;
                }
                (o.iter().any(|v| *v != 0)).then_some(o)
            })
            .collect()
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties broken by node for determinism
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cost of the straight segment when admissible at clearance `floor`, by
/// composite three-point Gauss–Legendre with panels no longer than a
/// quarter of the endpoints' boundary distance.
fn segment_cost(weight: &Weight, a: &Point, b: &Point, floor: f64) -> Option<f64> {
    let domain = weight.domain();
    if !domain.segment_clear(a, b, floor) {
        return None;
    }
    let len = a.distance(b);
    if len == 0.0 {
        return Some(0.0);
    }
    let near = domain.clearance(a).min(domain.clearance(b)).max(floor);
    let panels = math::ceil(4.0 * len / near).clamp(1.0, MAX_PANELS as f64) as usize;
    let offset = 0.5 * math::sqrt(0.6);
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) / panels as f64;
        let half = offset / panels as f64;
        for (t, g) in [(mid - half, 5.0), (mid, 8.0), (mid + half, 5.0)] {
            sum += g * weight.value_at(&a.lerp(b, t))?;
        }
    }
    Some(sum * len / (18.0 * panels as f64))
}

/// Candidate attachment nodes for an endpoint: valid lattice nodes within
/// two cells, with the cost of the straight hop.
fn attachments(
    lattice: &Lattice,
    weight: &Weight,
    p: &Point,
    floor: f64,
) -> Vec<(usize, f64)> {
    let center = lattice.nearest_multi(p);
    let mut out = Vec::new();
    let r = 2i64;
    let span = (2 * r + 1) as usize;
    let count = span.pow(lattice.dim as u32);
    for mut c in 0..count {
        let mut m = center;
        for mk in m.iter_mut().take(lattice.dim) {
            *mk += (c % span) as i64 - r;
            c /= span;
        }
        let Some(idx) = lattice.index_of(&m) else {
            continue;
        };
        if !lattice.valid[idx] {
            continue;
        }
        let q = lattice.point(idx);
        if let Some(cost) = segment_cost(weight, p, &q, floor) {
            out.push((idx, cost));
        }
    }
    out
}

/// Shortest lattice path from `x` to `y` (including the hops to the
/// lattice) as a vertex list.
fn lattice_path(
    weight: &Weight,
    x: &Point,
    y: &Point,
    h: f64,
    opts: &GeodesicOptions,
) -> Result<Vec<Point>> {
    let domain = weight.domain();
    let lattice = Lattice::build(domain, x, y, h, opts.window)?;
    let floor = clearance_floor(h);
    let starts = attachments(&lattice, weight, x, floor);
    let ends = attachments(&lattice, weight, y, floor);
    if starts.is_empty() || ends.is_empty() {
        return Err(Error::Resolution { h });
    }

    let n = lattice.len();
    let mut dist = alloc::vec![f64::INFINITY; n];
    let mut prev = alloc::vec![usize::MAX; n];
    let mut exit_cost = alloc::vec![f64::NAN; n];
    for &(idx, c) in &ends {
        exit_cost[idx] = c;
    }
    let mut heap = BinaryHeap::new();
    for &(idx, c) in &starts {
        if c < dist[idx] {
            dist[idx] = c;
            heap.push(State { cost: c, node: idx });
        }
    }
    let offsets = lattice.offsets();
    // w at lattice nodes, filled on first use.
    let mut node_weight = alloc::vec![f64::NAN; n];
    let mut settled = alloc::vec![false; n];
    // Best complete path: lattice node where we leave for y.
    let mut best: Option<(f64, usize)> = None;

    while let Some(State { cost, node }) = heap.pop() {
        if settled[node] || cost > dist[node] {
            continue;
        }
        settled[node] = true;
        if let Some((b, _)) = best {
            if cost >= b {
                break;
            }
        }
        if !exit_cost[node].is_nan() {
            let total = cost + exit_cost[node];
            if best.is_none_or(|(b, _)| total < b) {
                best = Some((total, node));
            }
        }
        let m = lattice.multi_index(node);
        let p = lattice.point(node);
        let wp = cached_weight(weight, &lattice, &mut node_weight, node)?;
        for o in &offsets {
            let mut q = m;
            for k in 0..lattice.dim {
                q[k] += o[k];
            }
            let Some(next) = lattice.index_of(&q) else {
                continue;
            };
            if !lattice.valid[next] || settled[next] {
                continue;
            }
            let q_point = lattice.point(next);
            if !domain.segment_clear(&p, &q_point, floor) {
                continue;
            }
            let wq = cached_weight(weight, &lattice, &mut node_weight, next)?;
            let mid = p.lerp(&q_point, 0.5);
            let wm = weight.value_at(&mid).ok_or(Error::DomainViolation { point: mid })?;
            // Simpson's rule; the reported value is recomputed along the
            // final curve at full accuracy.
            let edge = p.distance(&q_point) * (wp + 4.0 * wm + wq) / 6.0;
            let next_cost = cost + edge;
            if next_cost < dist[next] {
                dist[next] = next_cost;
                prev[next] = node;
                heap.push(State {
                    cost: next_cost,
                    node: next,
                });
            }
        }
    }

    let (_, last) = best.ok_or(Error::Resolution { h })?;
    let mut nodes = alloc::vec![last];
    let mut cur = last;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    let mut vertices = Vec::with_capacity(nodes.len() + 2);
    vertices.push(*x);
    vertices.extend(nodes.iter().map(|&i| lattice.point(i)));
    vertices.push(*y);
    vertices.dedup();
    Ok(vertices)
}

fn cached_weight(weight: &Weight, lattice: &Lattice, cache: &mut [f64], i: usize) -> Result<f64> {
    if cache[i].is_nan() {
        let p = lattice.point(i);
        cache[i] = weight.value_at(&p).ok_or(Error::DomainViolation { point: p })?;
    }
    Ok(cache[i])
}

struct Smoother<'a> {
    weight: &'a Weight,
    floor: f64,
}

impl Smoother<'_> {
    fn cost(&self, a: &Point, b: &Point) -> Option<f64> {
        segment_cost(self.weight, a, b, self.floor)
    }

    /// Removes vertex i whenever its neighbours can be joined by a cheaper
    /// admissible chord.
    fn shortcut(&self, vertices: &mut Vec<Point>) -> bool {
        let mut costs: Vec<f64> = vertices
            .windows(2)
            .map(|w| self.cost(&w[0], &w[1]).unwrap_or(f64::INFINITY))
            .collect();
        let mut changed = false;
        let mut i = 1;
        while i + 1 < vertices.len() {
            let current = costs[i - 1] + costs[i];
            match self.cost(&vertices[i - 1], &vertices[i + 1]) {
                Some(c) if c < current * (1.0 - 1e-12) => {
                    vertices.remove(i);
                    costs.remove(i);
                    costs[i - 1] = c;
                    changed = true;
                    if i > 1 {
                        i -= 1;
                    }
                }
                _ => i += 1,
            }
        }
        changed
    }

    /// Moves each interior vertex within the hyperplane normal to the chord
    /// of its neighbours while that lowers the cost of its two edges.
    /// Returns the relative decrease of the total cost.
    fn sweep(&self, vertices: &mut [Point]) -> f64 {
        let dim = vertices[0].dim();
        let (mut before, mut after) = (0.0, 0.0);
        for i in 1..vertices.len().saturating_sub(1) {
            let (a, b) = (vertices[i - 1], vertices[i + 1]);
            let mut v = vertices[i];
            let mut current = match (self.cost(&a, &v), self.cost(&v, &b)) {
                (Some(c1), Some(c2)) => c1 + c2,
                _ => continue,
            };
            before += current;
            let normals = normal_basis(&(b - a), dim);
            let reach = a.distance(&v).min(v.distance(&b));
            let mut step = 0.25 * reach;
            while step >= 1e-4 * reach {
                let mut improved = false;
                for n in &normals {
                    for s in [step, -step] {
                        let cand = v + *n * s;
                        if let (Some(c1), Some(c2)) = (self.cost(&a, &cand), self.cost(&cand, &b)) {
                            if c1 + c2 < current * (1.0 - 1e-12) {
                                current = c1 + c2;
                                v = cand;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            vertices[i] = v;
            after += current;
        }
        if before > 0.0 {
            (before - after) / before
        } else {
            0.0
        }
    }

    /// Bisects every edge longer than `spacing`; returns whether any was.
    fn bisect(&self, vertices: &mut Vec<Point>, spacing: f64) -> bool {
        let mut out = Vec::with_capacity(2 * vertices.len());
        let mut split = false;
        out.push(vertices[0]);
        for w in vertices.windows(2) {
            if w[0].distance(&w[1]) > spacing {
                out.push(w[0].lerp(&w[1], 0.5));
                split = true;
            }
            out.push(w[1]);
        }
        *vertices = out;
        split
    }

    /// Relaxation at successively finer vertex spacing, down to `spacing`,
    /// starting from a coarse admissible resampling of the path.
    fn smooth(&self, vertices: &mut Vec<Point>, spacing: f64, sweeps: usize) {
        let mut pieces = 4;
        while pieces < vertices.len() {
            let coarse = resample(vertices, pieces);
            if coarse.windows(2).all(|w| self.cost(&w[0], &w[1]).is_some()) {
                *vertices = coarse;
                break;
            }
            pieces *= 2;
        }
        loop {
            for _ in 0..sweeps {
                if self.sweep(vertices) < 1e-10 {
                    break;
                }
            }
            if !self.bisect(vertices, spacing) {
                break;
            }
        }
    }
}

/// `pieces + 1` points equally spaced by arclength along a polyline.
fn resample(vertices: &[Point], pieces: usize) -> Vec<Point> {
    let lengths: Vec<f64> = vertices.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(pieces + 1);
    out.push(vertices[0]);
    let (mut edge, mut start) = (0usize, 0.0);
    for k in 1..pieces {
        let target = total * k as f64 / pieces as f64;
        while edge + 1 < lengths.len() && start + lengths[edge] < target {
            start += lengths[edge];
            edge += 1;
        }
        let t = if lengths[edge] > 0.0 {
            ((target - start) / lengths[edge]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(vertices[edge].lerp(&vertices[edge + 1], t));
    }
    out.push(*vertices.last().expect("non-empty"));
    out
}

/// Orthonormal basis of the complement of `d` (the coordinate axes if d = 0).
fn normal_basis(d: &Point, dim: usize) -> Vec<Point> {
    let len = d.norm();
    let mut basis: Vec<Point> = Vec::with_capacity(dim);
    let u = if len > 0.0 { Some(*d * (1.0 / len)) } else { None };
    for k in 0..dim {
        let mut e = Point::origin(dim).with_coord(k, 1.0);
        if let Some(u) = u {
            e = e - u * e.dot(&u);
        }
        for b in &basis {
            e = e - *b * e.dot(b);
        }
        let n = e.norm();
        if n > 1e-6 {
            basis.push(e * (1.0 / n));
        }
        if basis.len() + usize::from(u.is_some()) == dim {
            break;
        }
    }
    basis
}

/// Upper approximation of d_w(x, y) at lattice spacing `h`.
pub fn weighted_distance_upper(weight: &Weight, x: &Point, y: &Point, h: f64) -> Result<GeodesicResult> {
    weighted_distance_upper_with(weight, x, y, h, &GeodesicOptions::default())
}

pub fn weighted_distance_upper_with(
    weight: &Weight,
    x: &Point,
    y: &Point,
    h: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicResult> {
    let domain = weight.domain();
    let dx = domain.boundary_distance(x)?;
    let dy = domain.boundary_distance(y)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("resolution must be positive, got {h}")));
    }
    if !(h < dx.min(dy)) {
        return Err(Error::Precondition(format!(
            "resolution {h} is not below the endpoints' boundary distance {}",
            dx.min(dy)
        )));
    }
    if x == y {
        let curve = Curve::new(alloc::vec![*x])?;
        return Ok(GeodesicResult {
            value: 0.0,
            curve,
            resolution: h,
            refined: false,
            grid_value: 0.0,
        });
    }

    // Solve in a canonical orientation so that the result is symmetric.
    let swap = lex_less(y, x);
    let (a, b) = if swap { (*y, *x) } else { (*x, *y) };

    let mut vertices = lattice_path(weight, &a, &b, h, opts)?;
    let grid_curve = Curve::new(vertices.clone())?;
    let grid_value = curve_integral(weight, &grid_curve, opts.final_tol)?;

    let smoother = Smoother {
        weight,
        floor: clearance_floor(h),
    };
    if opts.shortcut {
        smoother.shortcut(&mut vertices);
    }
    if opts.smoothing_sweeps > 0 {
        smoother.smooth(&mut vertices, opts.spacing * h, opts.smoothing_sweeps);
    }
    if opts.shortcut {
        smoother.shortcut(&mut vertices);
    }

    let mut curve = Curve::new(vertices)?;
    let mut value = curve_integral(weight, &curve, opts.final_tol)?;
    if value > grid_value {
        curve = grid_curve;
        value = grid_value;
    }
    if opts.chord_candidate && domain.segment_clear(&a, &b, 0.0) {
        let chord = Curve::segment(a, b)?;
        if let Ok(c) = curve_integral(weight, &chord, opts.final_tol) {
            // Ties within rounding go to the chord.
            if c <= value * (1.0 + 1e-12) {
                curve = chord;
                value = c;
            }
        }
    }
    if swap {
        curve = curve.reversed();
    }
    Ok(GeodesicResult {
        value,
        curve,
        resolution: h,
        refined: value < grid_value,
        grid_value,
    })
}

fn lex_less(a: &Point, b: &Point) -> bool {
    for (p, q) in a.coords().iter().zip(b.coords()) {
        if p < q {
            return true;
        }
        if p > q {
            return false;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum PairOutcome {
    Measured {
        x: Point,
        y: Point,
        /// Upper bound for d_w(x, y).
        value: f64,
        /// value / φ(|x − y|).
        ratio: f64,
        /// min(d(x), d(y)).
        clearance: f64,
    },
    /// x = y; φ(0) = 0 makes the ratio undefined.
    Coincident { x: Point },
    Failed { x: Point, y: Point, error: String },
}

/// Sampled check of ∫_γ w ≤ M φ(|x − y|).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    /// Largest observed ratio; a certified upper bound for the best
    /// constant restricted to the measured pairs.
    pub m_observed: f64,
    pub worst_pair: Option<(Point, Point)>,
    pub pairs_tested: usize,
    pub skipped: usize,
    pub failed: usize,
    pub outcomes: Vec<PairOutcome>,
    /// Max ratio per decade of endpoint clearance, from the farthest from
    /// the boundary to the closest.
    pub ratio_by_clearance: Vec<(f64, f64)>,
    /// Ratios keep growing as pairs approach ∂D.
    pub divergence_suspected: bool,
    pub summary: String,
}

/// Runs [`weighted_distance_upper`] on every pair and reports the observed
/// constant M. `h = None` picks [`default_resolution`] per pair.
pub fn check_extension_condition(
    weight: &Weight,
    phi: &Majorant,
    pairs: &[(Point, Point)],
    h: Option<f64>,
) -> Result<ConditionReport> {
    check_extension_condition_with(weight, phi, pairs, h, &GeodesicOptions::default())
}

pub fn check_extension_condition_with(
    weight: &Weight,
    phi: &Majorant,
    pairs: &[(Point, Point)],
    h: Option<f64>,
    opts: &GeodesicOptions,
) -> Result<ConditionReport> {
    let domain = weight.domain();
    for (x, y) in pairs {
        domain.boundary_distance(x)?;
        domain.boundary_distance(y)?;
    }
    let measure = |(x, y): &(Point, Point)| -> PairOutcome {
        if x == y {
            return PairOutcome::Coincident { x: *x };
        }
        let hh = h.unwrap_or_else(|| default_resolution(x, y));
        match weighted_distance_upper_with(weight, x, y, hh, opts) {
            Ok(g) => PairOutcome::Measured {
                x: *x,
                y: *y,
                value: g.value,
                ratio: g.value / phi.eval(x.distance(y)),
                clearance: domain.clearance(x).min(domain.clearance(y)),
            },
            Err(e) => PairOutcome::Failed {
                x: *x,
                y: *y,
                error: format!("{e}"),
            },
        }
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<PairOutcome> = {
        use rayon::prelude::*;
        pairs.par_iter().map(measure).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<PairOutcome> = pairs.iter().map(measure).collect();

    Ok(summarize(outcomes))
}

fn summarize(outcomes: Vec<PairOutcome>) -> ConditionReport {
    let mut m_observed = 0.0;
    let mut worst_pair = None;
    let mut tested = 0;
    let mut skipped = 0;
    let mut failed = 0;
    let mut decades: Vec<(i32, f64)> = Vec::new();
    for o in &outcomes {
        match o {
            PairOutcome::Measured {
                x,
                y,
                ratio,
                clearance,
                ..
            } => {
                tested += 1;
                if *ratio > m_observed || worst_pair.is_none() {
                    m_observed = *ratio;
                    worst_pair = Some((*x, *y));
                }
                let decade = math::floor(math::ln(*clearance) / core::f64::consts::LN_10) as i32;
                match decades.iter_mut().find(|(d, _)| *d == decade) {
                    Some((_, m)) => *m = m.max(*ratio),
                    None => decades.push((decade, *ratio)),
                }
            }
            PairOutcome::Coincident { .. } => skipped += 1,
            PairOutcome::Failed { .. } => failed += 1,
        }
    }
    decades.sort_by_key(|d| core::cmp::Reverse(d.0));
    let ratio_by_clearance: Vec<(f64, f64)> = decades
        .iter()
        .map(|(d, m)| (math::powf(10.0, *d as f64), *m))
        .collect();
    let divergence_suspected = ratio_by_clearance.len() >= 3
        && ratio_by_clearance.windows(2).all(|w| w[1].1 >= w[0].1)
        && ratio_by_clearance.last().map(|l| l.1).unwrap_or(0.0)
            >= 2.0 * ratio_by_clearance[0].1;
    let summary = if divergence_suspected {
        format!("ratios grow toward the boundary (max {m_observed:.6}); condition likely fails")
    } else {
        format!("no violation found on {tested} pairs; observed M = {m_observed:.6}")
    };
    ConditionReport {
        m_observed,
        worst_pair,
        pairs_tested: tested,
        skipped,
        failed,
        outcomes,
        ratio_by_clearance,
        divergence_suspected,
        summary,
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphereRatio {
    pub radius: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// w(x), the limit of the ratios on convex domains.
    pub weight_at_center: f64,
    /// max |w(y) − w(x)| over the sampled sphere.
    pub oscillation: f64,
    /// w(x) − oscillation and M·(w(x) + oscillation), with M = 1.
    pub envelope: (f64, f64),
}

impl SphereRatio {
    /// Width of the smallest interval containing both ratio extremes and
    /// w(x).
    pub fn bracket_width(&self) -> f64 {
        self.max_ratio.max(self.weight_at_center) - self.min_ratio.min(self.weight_at_center)
    }
}

/// d_w(x, y)/|x − y| over spheres |y − x| = r; the lattice spacing is r/20.
pub fn topology_equivalence_ratio(
    weight: &Weight,
    x: &Point,
    radii: &[f64],
    samples_per_radius: usize,
) -> Result<Vec<SphereRatio>> {
    let domain = weight.domain();
    let dx = domain.boundary_distance(x)?;
    if radii.is_empty() {
        return Err(Error::InvalidInput("no radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("radii must be strictly decreasing".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let dirs = crate::sampling::sphere_directions(domain.dim(), samples_per_radius);
    let wx = weight.eval(x)?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let h = r / 20.0;
        if !(r + h < dx) {
            return Err(Error::Precondition(format!(
                "sphere of radius {r} about {x:?} leaves the domain"
            )));
        }
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio = f64::NEG_INFINITY;
        let mut oscillation: f64 = 0.0;
        for d in &dirs {
            let y = *x + *d * r;
            let g = weighted_distance_upper(weight, x, &y, h)?;
            let ratio = g.value / x.distance(&y);
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            // Oscillation of w on the sampled ball.
            for s in [0.25, 0.5, 0.75, 1.0] {
                let wy = weight.eval(&(*x + *d * (s * r)))?;
                oscillation = oscillation.max((wy - wx).abs());
            }
        }
        out.push(SphereRatio {
            radius: r,
            min_ratio,
            max_ratio,
            weight_at_center: wx,
            oscillation,
            envelope: (wx - oscillation, wx + oscillation),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{E, SQRT_2};

    #[test]
    fn convex_unit_weight_is_chord() {
        let w = Weight::unit(Domain::unit_disk());
        let x = Point::xy(-0.3, 0.0);
        let y = Point::xy(0.5, 0.0);
        let g = weighted_distance_upper(&w, &x, &y, 0.02).unwrap();
        assert!((g.value - 0.8).abs() < 1e-12);
        assert_eq!(g.curve.vertices().len(), 2);
        assert_eq!(g.curve.endpoints(), (x, y));
    }

    #[test]
    fn raw_lattice_path_is_close_on_convex_domain() {
        let w = Weight::unit(Domain::unit_disk());
        let x = Point::xy(-0.3, 0.1);
        let y = Point::xy(0.5, -0.2);
        let g = weighted_distance_upper_with(&w, &x, &y, 0.02, &GeodesicOptions::raw_grid()).unwrap();
        let chord = x.distance(&y);
        assert!(g.value >= chord);
        // 8-neighbour metrication error is at most ~8%.
        assert!(g.value < 1.09 * chord, "{}", g.value);
        // Smoothing alone (no chord candidate) recovers the segment.
        let opts = GeodesicOptions {
            chord_candidate: false,
            ..GeodesicOptions::default()
        };
        let s = weighted_distance_upper_with(&w, &x, &y, 0.02, &opts).unwrap();
        assert!(s.value < chord * (1.0 + 1e-9), "{}", s.value);
    }

    #[test]
    fn quasi_hyperbolic_vertical_pair() {
        let w = Weight::reciprocal_dist(Domain::half_plane());
        let x = Point::xy(0.0, 1.0);
        let y = Point::xy(0.0, E);
        let g = weighted_distance_upper(&w, &x, &y, 0.02).unwrap();
        assert!((g.value - 1.0).abs() < 0.02, "{}", g.value);
    }

    #[test]
    fn l_shape_goes_around_corner() {
        let w = Weight::unit(Domain::l_shape());
        let x = Point::xy(-0.5, -0.5);
        let y = Point::xy(0.5, 0.25);
        let g = weighted_distance_upper(&w, &x, &y, 0.01).unwrap();
        let corner = 0.5f64.sqrt() + 0.3125f64.sqrt();
        assert!(g.value > x.distance(&y));
        assert!(g.value >= corner * (1.0 - 1e-9), "{}", g.value);
        assert!((g.value - corner).abs() / corner < 0.02, "{} vs {}", g.value, corner);
    }

    #[test]
    fn symmetric() {
        let w = Weight::dist_pow(Domain::unit_disk(), 0.5).unwrap();
        let x = Point::xy(0.7, 0.1);
        let y = Point::xy(-0.2, 0.75);
        let a = weighted_distance_upper(&w, &x, &y, 0.02).unwrap();
        let b = weighted_distance_upper(&w, &y, &x, 0.02).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.curve.endpoints(), (x, y));
        assert_eq!(b.curve.endpoints(), (y, x));
    }

    #[test]
    fn preconditions() {
        let w = Weight::unit(Domain::unit_disk());
        assert!(matches!(
            weighted_distance_upper(&w, &Point::xy(0.995, 0.0), &Point::xy(0.0, 0.0), 0.01),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            weighted_distance_upper(&w, &Point::xy(1.5, 0.0), &Point::xy(0.0, 0.0), 0.01),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn disconnected_at_resolution() {
        // Two half-disks joined by a channel narrower than the lattice collar.
        let d = Domain::custom(
            "dumbbell",
            2,
            |p: &Point| {
                let (x, y) = (p.coord(0), p.coord(1));
                let left = 0.5 - ((x + 1.0).powi(2) + y * y).sqrt();
                let right = 0.5 - ((x - 1.0).powi(2) + y * y).sqrt();
                let channel = (0.004 - y.abs()).min(1.0 - x.abs());
                left.max(right).max(channel)
            },
            Some((Point::xy(-1.6, -0.6), Point::xy(1.6, 0.6))),
        )
        .unwrap();
        let w = Weight::unit(d);
        let r = weighted_distance_upper_with(
            &w,
            &Point::xy(-1.0, 0.0),
            &Point::xy(1.0, 0.0),
            0.05,
            &GeodesicOptions { window: 2.0, ..GeodesicOptions::default() },
        );
        assert!(matches!(r, Err(Error::Resolution { .. })), "{r:?}");
    }

    #[test]
    fn condition_on_convex_domain_with_unit_weight() {
        let w = Weight::unit(Domain::unit_disk());
        let phi = Majorant::power(1.0).unwrap();
        let pairs = [
            (Point::xy(0.1, 0.2), Point::xy(-0.4, 0.3)),
            (Point::xy(0.5, -0.5), Point::xy(-0.5, 0.5)),
            (Point::xy(0.3, 0.3), Point::xy(0.3, 0.3)),
        ];
        let r = check_extension_condition(&w, &phi, &pairs, Some(0.01)).unwrap();
        assert!((r.m_observed - 1.0).abs() < 1e-6);
        assert_eq!(r.pairs_tested, 2);
        assert_eq!(r.skipped, 1);
        assert!(r.summary.starts_with("no violation found on 2 pairs"));
    }

    #[test]
    fn topology_ratio_constant_weight() {
        let w = Weight::constant(Domain::unit_disk(), 3.0).unwrap();
        let rows = topology_equivalence_ratio(&w, &Point::xy(0.2, 0.1), &[0.1, 0.05], 16).unwrap();
        for r in rows {
            assert!((r.min_ratio - 3.0).abs() < 1e-9);
            assert!((r.max_ratio - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn corner_path_lower_than_detour() {
        let w = Weight::unit(Domain::l_shape());
        let x = Point::xy(-0.5, -0.5);
        let y = Point::xy(0.5, 0.5);
        // The chord passes through the corner, which is not admissible.
        let g = weighted_distance_upper(&w, &x, &y, 0.01).unwrap();
        assert!(g.value >= SQRT_2);
        assert!(g.value < SQRT_2 * 1.01, "{}", g.value);
    }
}
