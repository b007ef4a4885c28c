//! Sampled estimates of D*f, the Bloch-type norm ‖f‖_{B_w}, the
//! Lipschitz-type norm ‖f‖_{Λ_φ} and the regular-oscillation constant K.
//!
//! Norm estimates are maxima over finitely many samples and therefore lower
//! bounds for the suprema they approximate.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::domains::{Domain, Weight};
use crate::error::{Error, Result};
use crate::majorant::Majorant;
use crate::math;
use crate::point::{Point, MAX_DIM};
use crate::sampling::sphere_directions;

/// Default sample radii for D*f, as fractions of d(x, ∂D).
pub const DEFAULT_RADIUS_FRACTIONS: [f64; 2] = [1e-3, 1e-4];

/// Smallest admissible radius relative to d(x, ∂D).
pub const MIN_RELATIVE_RADIUS: f64 = 1e-7;

/// Directions per radius: 64 in the plane, 256 in ℝ³ and above.
pub fn default_directions(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 64,
        _ => 256,
    }
}

type MapFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type NormFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MappingKind {
    /// z ↦ (1 − z)^α, principal branch, on a planar domain.
    PowerAlpha { alpha: f64 },
    /// z ↦ z^k.
    Monomial { k: u32 },
    /// z ↦ log(1 − z), principal branch.
    LogBranch,
    /// x ↦ A x + b with A stored row-major (`rows × cols`).
    Affine {
        rows: usize,
        cols: usize,
        matrix: Vec<f64>,
        offset: Vec<f64>,
    },
    /// A compiled-in mapping; see [`registry`].
    User { name: String },
}

/// An evaluable map from a domain into ℝᵐ, optionally with the operator
/// norm of its differential.
#[derive(Clone)]
pub struct Mapping {
    source: Domain,
    kind: MappingKind,
    target_dim: usize,
    user_eval: Option<MapFn>,
    user_norm: Option<NormFn>,
    ro_hint: Option<f64>,
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mapping")
            .field("source", &self.source)
            .field("kind", &self.kind)
            .finish()
    }
}

fn planar(source: &Domain) -> Result<()> {
    if source.dim() == 2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "complex mappings need a planar domain, got dimension {}",
            source.dim()
        )))
    }
}

#[inline]
fn to_complex(p: &Point) -> Complex64 {
    Complex64::new(p.coord(0), p.coord(1))
}

#[inline]
fn from_complex(z: Complex64) -> Point {
    Point::xy(z.re, z.im)
}

/// Largest singular value of a `rows × cols` row-major matrix, via cyclic
/// Jacobi on AᵀA.
fn operator_norm(rows: usize, cols: usize, a: &[f64]) -> f64 {
    let n = cols;
    let mut m = [[0.0f64; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum();
        }
    }
    for _ in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let largest = (0..n).map(|i| m[i][i]).fold(0.0, f64::max);
    math::sqrt(largest.max(0.0))
}

impl Mapping {
    pub fn power_alpha(source: Domain, alpha: f64) -> Result<Self> {
        planar(&source)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("α must lie in (0, 1], got {alpha}")));
        }
        let bounded = source.bounding_box().is_some();
        Ok(Self::builtin(source, MappingKind::PowerAlpha { alpha }, 2, bounded))
    }

    pub fn monomial(source: Domain, k: u32) -> Result<Self> {
        planar(&source)?;
        let bounded = source.bounding_box().is_some();
        Ok(Self::builtin(source, MappingKind::Monomial { k }, 2, bounded))
    }

    pub fn log_branch(source: Domain) -> Result<Self> {
        planar(&source)?;
        Ok(Self::builtin(source, MappingKind::LogBranch, 2, false))
    }

    /// x ↦ A x + b; `matrix` is row-major with `offset.len()` rows.
    pub fn affine(source: Domain, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        let cols = source.dim();
        let rows = offset.len();
        if rows == 0 || rows > MAX_DIM || matrix.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "affine map needs a {rows}×{cols} matrix, got {} entries",
                matrix.len()
            )));
        }
        let mut m = Self::builtin(
            source,
            MappingKind::Affine {
                rows,
                cols,
                matrix,
                offset,
            },
            rows,
            false,
        );
        // Oscillation over B(x, r) of a linear map is exactly r‖A‖.
        m.ro_hint = Some(1.0);
        Ok(m)
    }

    /// x ↦ c·x.
    pub fn scaling(source: Domain, c: f64) -> Result<Self> {
        let n = source.dim();
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = c;
        }
        Self::affine(source, a, alloc::vec![0.0; n])
    }

    pub fn identity(source: Domain) -> Result<Self> {
        Self::scaling(source, 1.0)
    }

    /// The constant map x ↦ value.
    pub fn constant(source: Domain, value: &[f64]) -> Result<Self> {
        let n = source.dim();
        Self::affine(source, alloc::vec![0.0; value.len() * n], value.to_vec())
    }

    /// A user mapping. `derivative_norm`, when given, must return the
    /// operator norm ‖Df(x)‖. `ro_constant` is a known K for which f is
    /// regularly oscillating with respect to the distance weight.
    pub fn custom<F>(
        source: Domain,
        name: impl Into<String>,
        target_dim: usize,
        eval: F,
        derivative_norm: Option<NormFn>,
        ro_constant: Option<f64>,
    ) -> Result<Self>
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        if !(1..=MAX_DIM).contains(&target_dim) {
            return Err(Error::InvalidInput(format!("bad target dimension {target_dim}")));
        }
        Ok(Self {
            source,
            kind: MappingKind::User { name: name.into() },
            target_dim,
            user_eval: Some(Arc::new(eval)),
            user_norm: derivative_norm,
            ro_hint: ro_constant,
        })
    }

    fn builtin(source: Domain, kind: MappingKind, target_dim: usize, bounded_analytic: bool) -> Self {
        Self {
            source,
            kind,
            target_dim,
            user_eval: None,
            user_norm: None,
            ro_hint: bounded_analytic.then_some(1.0),
        }
    }

    pub fn source(&self) -> &Domain {
        &self.source
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// A constant K with f ∈ RO^K_d known a priori: 1 for bounded analytic
    /// maps (Schwarz lemma) and for affine maps.
    pub fn ro_constant_hint(&self) -> Option<f64> {
        self.ro_hint
    }

    pub fn evaluate(&self, x: &Point) -> Point {
        match &self.kind {
            MappingKind::PowerAlpha { alpha } => {
                let w = Complex64::new(1.0, 0.0) - to_complex(x);
                from_complex(w.powf(*alpha))
            }
            MappingKind::Monomial { k } => from_complex(to_complex(x).powu(*k)),
            MappingKind::LogBranch => {
                let w = Complex64::new(1.0, 0.0) - to_complex(x);
                from_complex(w.ln())
            }
            MappingKind::Affine {
                rows,
                cols,
                matrix,
                offset,
            } => {
                let mut out = [0.0; MAX_DIM];
                for (r, o) in out.iter_mut().enumerate().take(*rows) {
                    *o = offset[r]
                        + (0..*cols)
                            .map(|c| matrix[r * cols + c] * x.coord(c))
                            .sum::<f64>();
                }
                Point::from_array(out, *rows)
            }
            MappingKind::User { .. } => (self.user_eval.as_ref().expect("user map"))(x),
        }
    }

    /// ‖Df(x)‖ when known in closed form.
    pub fn derivative_norm(&self, x: &Point) -> Option<f64> {
        match &self.kind {
            MappingKind::PowerAlpha { alpha } => {
                let w = Complex64::new(1.0, 0.0) - to_complex(x);
                Some(alpha * math::powf(w.norm(), alpha - 1.0))
            }
            MappingKind::Monomial { k } => {
                if *k == 0 {
                    Some(0.0)
                } else {
                    Some(*k as f64 * math::powf(x.norm(), (*k - 1) as f64))
                }
            }
            MappingKind::LogBranch => {
                let w = Complex64::new(1.0, 0.0) - to_complex(x);
                Some(1.0 / w.norm())
            }
            MappingKind::Affine {
                rows, cols, matrix, ..
            } => Some(operator_norm(*rows, *cols, matrix)),
            MappingKind::User { .. } => self.user_norm.as_ref().map(|f| f(x)),
        }
    }

    pub fn has_derivative_oracle(&self) -> bool {
        !matches!(self.kind, MappingKind::User { .. }) || self.user_norm.is_some()
    }

    /// c·f for c > 0 (target is a normed space).
    pub fn scaled(&self, c: f64) -> Mapping {
        let inner = self.clone();
        let inner_norm = self.clone();
        let norm: Option<NormFn> = self.has_derivative_oracle().then(|| {
            Arc::new(move |x: &Point| c.abs() * inner_norm.derivative_norm(x).unwrap_or(0.0)) as NormFn
        });
        Mapping {
            source: self.source.clone(),
            kind: MappingKind::User {
                name: format!("{c}·({:?})", self.kind),
            },
            target_dim: self.target_dim,
            user_eval: Some(Arc::new(move |x: &Point| inner.evaluate(x) * c)),
            user_norm: norm,
            ro_hint: self.ro_hint,
        }
    }
}

/// Compiled-in user mappings, selectable by name.
pub mod registry {
    use super::*;

    pub const NAMES: [&str; 1] = ["axial_power"];

    /// `axial_power`: x ↦ (1 − x₁)^α as a real scalar on the unit ball of
    /// any dimension. ‖Df(x)‖ = α(1 − x₁)^(α−1); concavity of t^α gives
    /// K = 1 for the distance weight.
    pub fn axial_power(source: Domain, alpha: f64) -> Result<Mapping> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("α must lie in (0, 1], got {alpha}")));
        }
        Mapping::custom(
            source,
            "axial_power",
            1,
            move |x: &Point| {
                Point::new(&[math::powf((1.0 - x.coord(0)).max(0.0), alpha)]).expect("finite")
            },
            Some(Arc::new(move |x: &Point| {
                alpha * math::powf(1.0 - x.coord(0), alpha - 1.0)
            })),
            Some(1.0),
        )
    }

    /// Looks up a registered mapping by name with its single parameter.
    pub fn lookup(name: &str, source: Domain, param: f64) -> Result<Mapping> {
        match name {
            "axial_power" => axial_power(source, param),
            other => Err(Error::InvalidInput(format!(
                "unknown mapping {other:?}; registered: {NAMES:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DstarEstimate {
    /// Estimate of D*f(x): per-radius maxima of the two smallest radii
    /// extrapolated linearly to r → 0, clamped at 0.
    pub value: f64,
    /// Plain maximum of the difference quotients over the two smallest radii.
    pub raw_max: f64,
    /// (radius, max quotient over directions) for each radius.
    pub per_radius: Vec<(f64, f64)>,
    /// ‖Df(x)‖ from the closed form, when available.
    pub oracle: Option<f64>,
    /// |value − oracle| / oracle.
    pub oracle_deviation: Option<f64>,
}

/// D*f(x) from difference quotients ‖f(y) − f(x)‖/‖y − x‖ on spheres of the
/// given absolute radii.
pub fn dstar_estimate(f: &Mapping, x: &Point, radii: &[f64], directions: usize) -> Result<DstarEstimate> {
    let d = f.source.boundary_distance(x)?;
    if radii.is_empty() {
        return Err(Error::InvalidInput("no radii".into()));
    }
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    sorted.dedup();
    if let Some(r) = sorted.iter().find(|r| !(**r < d)) {
        return Err(Error::Precondition(format!(
            "radius {r} is not below the boundary distance {d}"
        )));
    }
    if !(sorted[0] >= MIN_RELATIVE_RADIUS * d) {
        return Err(Error::Precondition(format!(
            "radius {} is below {MIN_RELATIVE_RADIUS}·d(x) = {}",
            sorted[0],
            MIN_RELATIVE_RADIUS * d
        )));
    }
    let dirs = sphere_directions(x.dim(), directions);
    let fx = f.evaluate(x);
    let per_radius: Vec<(f64, f64)> = sorted
        .iter()
        .map(|&r| {
            let quotient = |u: &Point| {
                let y = *x + *u * r;
                f.evaluate(&y).distance(&fx) / y.distance(x)
            };
            let (mut best, mut m) = (dirs[0], f64::NEG_INFINITY);
            for u in &dirs {
                let q = quotient(u);
                if q > m {
                    best = *u;
                    m = q;
                }
            }
            (r, polish_direction(&quotient, best, m))
        })
        .collect();

    let (value, raw_max) = match per_radius.as_slice() {
        [(_, m)] => (*m, *m),
        [(r1, m1), (r2, m2), ..] => {
            let extrapolated = m1 - (m2 - m1) * r1 / (r2 - r1);
            (extrapolated.max(0.0), m1.max(*m2))
        }
        [] => unreachable!(),
    };
    let oracle = f.derivative_norm(x);
    let oracle_deviation = oracle.map(|o| {
        if o == 0.0 {
            value
        } else {
            (value - o).abs() / o
        }
    });
    Ok(DstarEstimate {
        value,
        raw_max,
        per_radius,
        oracle,
        oracle_deviation,
    })
}

/// Local ascent of `quotient` over unit vectors, starting at `u`.
fn polish_direction(quotient: &impl Fn(&Point) -> f64, mut u: Point, mut best: f64) -> f64 {
    let dim = u.dim();
    if dim < 2 {
        return best;
    }
    let mut step = 0.25;
    while step > 1e-7 {
        let mut improved = false;
        for i in 0..dim {
            let e = Point::origin(dim).with_coord(i, 1.0);
            let t = e - u * e.dot(&u);
            if t.norm() < 1e-3 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let v = u + t * (sign * step);
                let v = v * (1.0 / v.norm());
                let q = quotient(&v);
                if q > best {
                    best = q;
                    u = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// [`dstar_estimate`] with radii {1e-3, 1e-4}·d(x, ∂D) and the default
/// direction count.
pub fn dstar_default(f: &Mapping, x: &Point) -> Result<DstarEstimate> {
    let d = f.source.boundary_distance(x)?;
    let radii = DEFAULT_RADIUS_FRACTIONS.map(|q| q * d);
    dstar_estimate(f, x, &radii, default_directions(x.dim()))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Witness {
    None,
    Point { x: Point },
    Pair { x: Point, y: Point },
    Ball { x: Point, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormEstimate {
    /// Largest per-sample ratio; a lower bound for the supremum.
    pub value: f64,
    pub witness: Witness,
    pub samples_used: usize,
    /// Samples skipped (coincident pairs).
    pub skipped: usize,
    /// The ratio was unbounded on some sample (see [`ro_constant_estimate`]).
    pub unbounded: bool,
}

impl NormEstimate {
    fn empty() -> Self {
        Self {
            value: 0.0,
            witness: Witness::None,
            samples_used: 0,
            skipped: 0,
            unbounded: false,
        }
    }

    fn offer(&mut self, ratio: f64, witness: impl FnOnce() -> Witness) {
        self.samples_used += 1;
        if ratio > self.value || matches!(self.witness, Witness::None) {
            self.value = self.value.max(ratio);
            self.witness = witness();
        }
    }
}

fn map_points<T, F>(points: &[Point], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Point) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(f).collect()
    }
}

/// max over `points` of D*f(x)/w(x), a lower bound for ‖f‖_{B_w}.
pub fn bloch_norm_estimate(f: &Mapping, w: &Weight, points: &[Point]) -> Result<NormEstimate> {
    let ratios = map_points(points, |x| {
        let wx = w.eval(x)?;
        let d = dstar_default(f, x)?;
        Ok(d.value / wx)
    })?;
    let mut est = NormEstimate::empty();
    for (x, r) in points.iter().zip(ratios) {
        est.offer(r, || Witness::Point { x: *x });
    }
    Ok(est)
}

/// max over pairs of ‖f(x) − f(y)‖/φ(‖x − y‖), a lower bound for
/// ‖f‖_{Λ_φ}. Coincident pairs are skipped and counted.
pub fn holder_norm_estimate(f: &Mapping, phi: &Majorant, pairs: &[(Point, Point)]) -> Result<NormEstimate> {
    let mut est = NormEstimate::empty();
    for (x, y) in pairs {
        f.source.boundary_distance(x)?;
        f.source.boundary_distance(y)?;
        if x == y {
            est.skipped += 1;
            continue;
        }
        let ratio = f.evaluate(x).distance(&f.evaluate(y)) / phi.eval(x.distance(y));
        est.offer(ratio, || Witness::Pair { x: *x, y: *y });
    }
    Ok(est)
}

/// Oscillation at or below this is treated as zero.
const ZERO_OSCILLATION: f64 = 1e-12;

/// Fractions of the radius at which the ball B(x, r) is sampled.
const BALL_SHELLS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// max over points x and radii r = q·w(x) of r·D*f(x) / sup_{B(x,r)} ‖f(y) − f(x)‖,
/// a lower bound for the best K in the regular-oscillation inequality.
pub fn ro_constant_estimate(
    f: &Mapping,
    w: &Weight,
    points: &[Point],
    radius_fractions: &[f64],
) -> Result<NormEstimate> {
    if radius_fractions.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(Error::InvalidInput("radius fractions must lie in (0, 1)".into()));
    }
    let dirs = sphere_directions(f.source.dim(), default_directions(f.source.dim()));
    let rows = map_points(points, |x| {
        let wx = w.eval(x)?;
        let dx = f.source.boundary_distance(x)?;
        let dstar = dstar_default(f, x)?.value;
        let fx = f.evaluate(x);
        let mut out = Vec::with_capacity(radius_fractions.len());
        for &q in radius_fractions {
            let r = q * wx;
            if !(r < dx) {
                return Err(Error::Precondition(format!(
                    "ball of radius {r} about {x:?} leaves the domain"
                )));
            }
            let mut osc: f64 = 0.0;
            for s in BALL_SHELLS {
                for u in &dirs {
                    osc = osc.max(f.evaluate(&(*x + *u * (s * r))).distance(&fx));
                }
            }
            out.push((r, dstar, osc));
        }
        Ok(out)
    })?;
    let mut est = NormEstimate::empty();
    for (x, row) in points.iter().zip(rows) {
        for (r, dstar, osc) in row {
            if osc <= ZERO_OSCILLATION {
                if dstar > 0.0 {
                    est.unbounded = true;
                    est.samples_used += 1;
                    est.value = f64::INFINITY;
                    est.witness = Witness::Ball { x: *x, radius: r };
                } else {
                    est.offer(0.0, || Witness::Ball { x: *x, radius: r });
                }
                continue;
            }
            est.offer(r * dstar / osc, || Witness::Ball { x: *x, radius: r });
        }
    }
    Ok(est)
}
