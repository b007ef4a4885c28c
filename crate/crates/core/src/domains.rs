//! Domains with closed-form boundary distance d(z, ∂D), and the positive
//! weights built from it.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;
use crate::point::{Point, MAX_DIM};

type PointFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DomainKind {
    /// {|z| < 1} ⊂ ℝ².
    UnitDisk,
    /// {‖x‖ < 1} ⊂ ℝⁿ.
    UnitBall { dim: usize },
    /// {x ∈ ℝⁿ : x_n > 0}; the upper half-plane when n = 2.
    HalfSpace { dim: usize },
    /// Open box ∏ (lo_i, hi_i).
    Rectangle { lo: Point, hi: Point },
    /// (−1, 1)² minus the closed quadrant [0, 1] × [−1, 0].
    LShape,
    /// {r < |z| < R} ⊂ ℝ².
    Annulus { inner: f64, outer: f64 },
    User { name: String, dim: usize },
}

/// A connected open subset of ℝⁿ with an exact boundary-distance function.
#[derive(Clone)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    user_distance: Option<PointFn>,
    user_bounds: Option<(Point, Point)>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain").field("kind", &self.kind).finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (DomainKind::User { .. }, _) | (_, DomainKind::User { .. }) => {
                match (&self.user_distance, &other.user_distance) {
                    (Some(a), Some(b)) => Arc::ptr_eq(a, b),
                    _ => false,
                }
            }
            (a, b) => a == b,
        }
    }
}

// L-shape boundary, counter-clockwise.
const L_SHAPE_EDGES: [([f64; 2], [f64; 2]); 6] = [
    ([-1.0, -1.0], [0.0, -1.0]),
    ([0.0, -1.0], [0.0, 0.0]),
    ([0.0, 0.0], [1.0, 0.0]),
    ([1.0, 0.0], [1.0, 1.0]),
    ([1.0, 1.0], [-1.0, 1.0]),
    ([-1.0, 1.0], [-1.0, -1.0]),
];

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    let (qx, qy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    math::sqrt(qx * qx + qy * qy)
}

impl Domain {
    pub fn unit_disk() -> Self {
        Self::builtin(DomainKind::UnitDisk, 2)
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::builtin(DomainKind::UnitBall { dim }, dim))
    }

    /// The upper half-plane {y > 0}.
    pub fn half_plane() -> Self {
        Self::builtin(DomainKind::HalfSpace { dim: 2 }, 2)
    }

    pub fn half_space(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::builtin(DomainKind::HalfSpace { dim }, dim))
    }

    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if lo.coords().iter().zip(hi.coords()).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput(format!(
                "rectangle needs lo < hi componentwise, got {lo:?} and {hi:?}"
            )));
        }
        let dim = lo.dim();
        Ok(Self::builtin(DomainKind::Rectangle { lo, hi }, dim))
    }

    pub fn l_shape() -> Self {
        Self::builtin(DomainKind::LShape, 2)
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "annulus needs 0 < r < R, got r = {inner}, R = {outer}"
            )));
        }
        Ok(Self::builtin(DomainKind::Annulus { inner, outer }, 2))
    }

    /// A user domain. `distance` must return the exact distance to the
    /// boundary for interior points and a value ≤ 0 outside; `bounds` is a
    /// bounding box, `None` for unbounded domains.
    pub fn custom<F>(
        name: impl Into<String>,
        dim: usize,
        distance: F,
        bounds: Option<(Point, Point)>,
    ) -> Result<Self>
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self {
            kind: DomainKind::User {
                name: name.into(),
                dim,
            },
            dim,
            user_distance: Some(Arc::new(distance)),
            user_bounds: bounds,
        })
    }

    fn builtin(kind: DomainKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            user_distance: None,
            user_bounds: None,
        }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distance to the boundary for interior points, and a value ≤ 0 for
    /// points outside (or on the boundary).
    pub fn clearance(&self, x: &Point) -> f64 {
        debug_assert_eq!(x.dim(), self.dim);
        match &self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } => 1.0 - x.norm(),
            DomainKind::HalfSpace { dim } => x.coord(dim - 1),
            DomainKind::Rectangle { lo, hi } => (0..self.dim)
                .map(|i| (x.coord(i) - lo.coord(i)).min(hi.coord(i) - x.coord(i)))
                .fold(f64::INFINITY, f64::min),
            DomainKind::Annulus { inner, outer } => {
                let r = x.norm();
                (r - inner).min(outer - r)
            }
            DomainKind::LShape => {
                let p = [x.coord(0), x.coord(1)];
                let inside_square = p[0].abs() < 1.0 && p[1].abs() < 1.0;
                let in_notch = p[0] >= 0.0 && p[1] <= 0.0;
                if !inside_square || in_notch {
                    return 0.0;
                }
                L_SHAPE_EDGES
                    .iter()
                    .map(|(a, b)| segment_distance(p, *a, *b))
                    .fold(f64::INFINITY, f64::min)
            }
            DomainKind::User { .. } => {
                (self.user_distance.as_ref().expect("user domain has a distance"))(x)
            }
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim && self.clearance(x) > 0.0
    }

    /// d(x, ∂D) for an interior point.
    pub fn boundary_distance(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim)?;
        let d = self.clearance(x);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::DomainViolation { point: *x })
        }
    }

    /// Axis-aligned bounding box, `None` when the domain is unbounded.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let cube = |r: f64| {
            (
                Point::from_array([-r; MAX_DIM], self.dim),
                Point::from_array([r; MAX_DIM], self.dim),
            )
        };
        match &self.kind {
            DomainKind::UnitDisk | DomainKind::UnitBall { .. } | DomainKind::LShape => {
                Some(cube(1.0))
            }
            DomainKind::Annulus { outer, .. } => Some(cube(*outer)),
            DomainKind::Rectangle { lo, hi } => Some((*lo, *hi)),
            DomainKind::HalfSpace { .. } => None,
            DomainKind::User { .. } => self.user_bounds,
        }
    }

    /// True for domains where every chord between interior points stays
    /// inside.
    pub fn is_convex(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::UnitDisk
                | DomainKind::UnitBall { .. }
                | DomainKind::HalfSpace { .. }
                | DomainKind::Rectangle { .. }
        )
    }

    /// Certifies that every point of the segment `[a, b]` has boundary
    /// distance at least `clearance`, using that d(·, ∂D) is 1-Lipschitz.
    /// Returns `false` when a point below the clearance is found or the
    /// test cannot be decided within the subdivision budget.
    pub fn segment_clear(&self, a: &Point, b: &Point, clearance: f64) -> bool {
        const MAX_DEPTH: u32 = 40;
        let mut stack: alloc::vec::Vec<(Point, Point, u32)> = alloc::vec![(*a, *b, 0)];
        while let Some((p, q, depth)) = stack.pop() {
            let mid = p.lerp(&q, 0.5);
            let d = self.clearance(&mid);
            if d < clearance {
                return false;
            }
            let half = 0.5 * p.distance(&q);
            if d - half >= clearance {
                continue;
            }
            if depth >= MAX_DEPTH {
                return false;
            }
            stack.push((p, mid, depth + 1));
            stack.push((mid, q, depth + 1));
        }
        true
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "dimension must be in 1..={MAX_DIM}, got {dim}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum WeightKind {
    Constant { value: f64 },
    /// w = d(·, ∂D).
    Dist,
    /// w = d^(α−1), α ∈ (0, 1).
    DistPow { alpha: f64 },
    /// w = 1/d, the quasi-hyperbolic weight.
    ReciprocalDist,
    User { name: String },
}

/// A positive continuous weight on a domain.
#[derive(Clone)]
pub struct Weight {
    domain: Domain,
    kind: WeightKind,
    user: Option<PointFn>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("domain", &self.domain)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Weight {
    pub fn constant(domain: Domain, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "constant weight must be positive, got {value}"
            )));
        }
        Ok(Self::builtin(domain, WeightKind::Constant { value }))
    }

    /// w ≡ 1.
    pub fn unit(domain: Domain) -> Self {
        Self::builtin(domain, WeightKind::Constant { value: 1.0 })
    }

    pub fn dist(domain: Domain) -> Self {
        Self::builtin(domain, WeightKind::Dist)
    }

    pub fn dist_pow(domain: Domain, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "dist_pow needs α ∈ (0, 1), got {alpha}"
            )));
        }
        Ok(Self::builtin(domain, WeightKind::DistPow { alpha }))
    }

    pub fn reciprocal_dist(domain: Domain) -> Self {
        Self::builtin(domain, WeightKind::ReciprocalDist)
    }

    /// A user weight; `eval` must be positive and continuous on the domain.
    pub fn custom<F>(domain: Domain, name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Self {
            domain,
            kind: WeightKind::User { name: name.into() },
            user: Some(Arc::new(eval)),
        }
    }

    fn builtin(domain: Domain, kind: WeightKind) -> Self {
        Self {
            domain,
            kind,
            user: None,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// w(x), or `None` when x is not an interior point.
    #[inline]
    pub fn value_at(&self, x: &Point) -> Option<f64> {
        if let WeightKind::Constant { value } = self.kind {
            return self.domain.contains(x).then_some(value);
        }
        let d = self.domain.clearance(x);
        if !(d > 0.0) {
            return None;
        }
        Some(match &self.kind {
            WeightKind::Constant { value } => *value,
            WeightKind::Dist => d,
            WeightKind::DistPow { alpha } => math::powf(d, alpha - 1.0),
            WeightKind::ReciprocalDist => 1.0 / d,
            WeightKind::User { .. } => (self.user.as_ref().expect("user weight has eval"))(x),
        })
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.domain.dim())?;
        self.value_at(x).ok_or(Error::DomainViolation { point: *x })
    }

    /// True when w is bounded near ∂D (constant or distance weights).
    pub fn bounded_near_boundary(&self) -> bool {
        matches!(self.kind, WeightKind::Constant { .. } | WeightKind::Dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_distance_examples() {
        let disk = Domain::unit_disk();
        assert_eq!(disk.boundary_distance(&Point::xy(0.0, 0.0)).unwrap(), 1.0);
        assert!((disk.boundary_distance(&Point::xy(0.6, 0.0)).unwrap() - 0.4).abs() < 1e-15);
        let hp = Domain::half_plane();
        assert_eq!(hp.boundary_distance(&Point::xy(7.0, 0.25)).unwrap(), 0.25);
    }

    #[test]
    fn outside_points_are_rejected() {
        let disk = Domain::unit_disk();
        assert!(matches!(
            disk.boundary_distance(&Point::xy(1.0, 0.0)),
            Err(Error::DomainViolation { .. })
        ));
        let l = Domain::l_shape();
        assert!(!l.contains(&Point::xy(0.5, -0.5)));
        assert!(!l.contains(&Point::xy(0.0, 0.0)));
        assert!(l.contains(&Point::xy(-0.5, -0.5)));
        assert!(l.contains(&Point::xy(0.5, 0.5)));
    }

    #[test]
    fn l_shape_distances() {
        let l = Domain::l_shape();
        // Nearest boundary is the inner corner.
        let d = l.clearance(&Point::xy(0.1, 0.1));
        assert!((d - 0.1).abs() < 1e-15);
        let d = l.clearance(&Point::xy(-0.3, -0.3));
        assert!((d - 0.3).abs() < 1e-15);
        let d = l.clearance(&Point::xy(0.5, 0.5));
        assert!((d - 0.5).abs() < 1e-15);
        let d = l.clearance(&Point::xy(-0.9, 0.5));
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn annulus_and_rectangle() {
        let a = Domain::annulus(0.5, 2.0).unwrap();
        assert!((a.clearance(&Point::xy(0.75, 0.0)) - 0.25).abs() < 1e-15);
        assert!((a.clearance(&Point::xy(0.0, 1.5)) - 0.5).abs() < 1e-15);
        assert!(!a.contains(&Point::xy(0.1, 0.1)));
        let r = Domain::rectangle(Point::xy(0.0, 0.0), Point::xy(2.0, 1.0)).unwrap();
        assert!((r.clearance(&Point::xy(1.5, 0.5)) - 0.5).abs() < 1e-15);
        assert!((r.clearance(&Point::xy(1.9, 0.5)) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn weights_relate_pointwise() {
        let disk = Domain::unit_disk();
        let x = Point::xy(0.3, -0.4);
        let d = Weight::dist(disk.clone()).eval(&x).unwrap();
        let r = Weight::reciprocal_dist(disk.clone()).eval(&x).unwrap();
        assert!((d * r - 1.0).abs() < 1e-15);
        let p = Weight::dist_pow(disk, 0.5).unwrap().eval(&x).unwrap();
        assert!((p - d.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn segment_clearance_certification() {
        let l = Domain::l_shape();
        // Chord through the notch.
        assert!(!l.segment_clear(&Point::xy(-0.5, -0.5), &Point::xy(0.5, 0.25), 0.0));
        assert!(l.segment_clear(&Point::xy(-0.5, -0.5), &Point::xy(-0.5, 0.5), 0.01));
        // Passing within 0.01 of the corner fails a 0.02 clearance.
        assert!(!l.segment_clear(&Point::xy(-0.5, 0.51), &Point::xy(0.51, -0.5), 0.02));
    }
}
