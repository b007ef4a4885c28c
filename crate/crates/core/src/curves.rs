//! Polyline curves, their length, and weighted curve integrals.

use alloc::vec::Vec;

use crate::domains::Weight;
use crate::error::{Error, Result};
use crate::point::Point;

/// Default relative tolerance for [`curve_integral`].
pub const DEFAULT_TOL: f64 = 1e-8;

/// Maximum number of halvings per polyline edge.
pub const MAX_HALVINGS: u32 = 24;

/// A polyline through one or more vertices of equal dimension.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Curve {
    vertices: Vec<Point>,
}

impl Curve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidInput("a curve needs at least one vertex".into()))?;
        let dim = first.dim();
        for v in &vertices {
            v.check_dim(dim)?;
        }
        Ok(Self { vertices })
    }

    pub fn segment(a: Point, b: Point) -> Result<Self> {
        Self::new(alloc::vec![a, b])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.vertices[0], *self.vertices.last().expect("non-empty"))
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices }
    }

    /// Splits every edge into `pieces` equal parts.
    pub fn refined(&self, pieces: usize) -> Self {
        let pieces = pieces.max(1);
        let mut vertices = Vec::with_capacity((self.vertices.len() - 1) * pieces + 1);
        vertices.push(self.vertices[0]);
        for w in self.vertices.windows(2) {
            for k in 1..=pieces {
                vertices.push(w[0].lerp(&w[1], k as f64 / pieces as f64));
            }
        }
        Self { vertices }
    }

    /// Joins `other` at the last vertex of `self`, which must coincide with
    /// the first vertex of `other`.
    pub fn concat(&self, other: &Curve) -> Result<Self> {
        if self.endpoints().1 != other.endpoints().0 {
            return Err(Error::InvalidInput("curves do not share a vertex".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(Self { vertices })
    }

    pub fn length(&self) -> f64 {
        curve_length(self)
    }
}

/// ℓ(γ): for a polyline the partition supremum is the sum of edge lengths.
pub fn curve_length(curve: &Curve) -> f64 {
    curve
        .vertices
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .sum()
}

/// ∫_γ w by midpoint Riemann sums, doubling the subdivision of each edge
/// until two successive sums agree to `tol` relatively.
pub fn curve_integral(weight: &Weight, curve: &Curve, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("tolerance must be positive, got {tol}")));
    }
    let domain = weight.domain();
    for v in &curve.vertices {
        v.check_dim(domain.dim())?;
        if !domain.contains(v) {
            return Err(Error::DomainViolation { point: *v });
        }
    }
    let mut total = 0.0;
    for w in curve.vertices.windows(2) {
        total += segment_integral(weight, &w[0], &w[1], tol)?;
    }
    Ok(total)
}

/// ∫ w over the straight segment `[a, b]`.
pub(crate) fn segment_integral(weight: &Weight, a: &Point, b: &Point, tol: f64) -> Result<f64> {
    let len = a.distance(b);
    if len == 0.0 {
        return Ok(0.0);
    }
    let mut previous = midpoint_sum(weight, a, b, len, 1)?;
    let mut pieces: u64 = 1;
    for _ in 0..MAX_HALVINGS {
        pieces *= 2;
        let current = midpoint_sum(weight, a, b, len, pieces)?;
        if (current - previous).abs() <= tol * current.abs() {
            return Ok(current);
        }
        previous = current;
        if pieces >= 1 << MAX_HALVINGS {
            return Err(Error::Convergence {
                previous,
                last: current,
            });
        }
    }
    unreachable!()
}

fn midpoint_sum(weight: &Weight, a: &Point, b: &Point, len: f64, pieces: u64) -> Result<f64> {
    let step = 1.0 / pieces as f64;
    let piece_len = len / pieces as f64;
    let mut sum = 0.0;
    for i in 0..pieces {
        let s = (i as f64 + 0.5) * step;
        let p = a.lerp(b, s);
        let w = weight
            .value_at(&p)
            .ok_or(Error::DomainViolation { point: p })?;
        sum += w;
    }
    Ok(sum * piece_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;
    use core::f64::consts::{E, PI};

    #[test]
    fn three_four_five() {
        let c = Curve::segment(Point::xy(0.0, 0.0), Point::xy(3.0, 4.0)).unwrap();
        assert_eq!(curve_length(&c), 5.0);
        let w = Weight::unit(Domain::half_space(2).unwrap());
        // (0,0) is on the boundary of the half-plane, so use the plane-filling rectangle.
        assert!(curve_integral(&w, &c, DEFAULT_TOL).is_err());
        let big = Domain::rectangle(Point::xy(-10.0, -10.0), Point::xy(10.0, 10.0)).unwrap();
        let w = Weight::unit(big);
        assert_eq!(curve_integral(&w, &c, DEFAULT_TOL).unwrap(), 5.0);
    }

    #[test]
    fn single_point_has_zero_length() {
        let c = Curve::new(alloc::vec![Point::xy(0.2, 0.1)]).unwrap();
        assert_eq!(curve_length(&c), 0.0);
        let w = Weight::dist(Domain::unit_disk());
        assert_eq!(curve_integral(&w, &c, DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn inscribed_polygon_converges_to_circumference() {
        let n = 1024;
        let vertices = (0..=n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect();
        let c = Curve::new(vertices).unwrap();
        // Perimeter of the inscribed n-gon is 2n·sin(π/n).
        let exact = 2.0 * n as f64 * (PI / n as f64).sin();
        assert!((curve_length(&c) - exact).abs() < 1e-12);
        assert!((curve_length(&c) - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn quasi_hyperbolic_vertical_segment() {
        let w = Weight::reciprocal_dist(Domain::half_plane());
        let c = Curve::segment(Point::xy(0.0, 1.0), Point::xy(0.0, E)).unwrap();
        let v = curve_integral(&w, &c, DEFAULT_TOL).unwrap();
        assert!((v - 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn dist_pow_chord_of_disk() {
        // ∫_{-a}^{a} (1 − |t|)^{-1/2} dt = 4(1 − √(1 − a)) = 2 at a = 3/4.
        let w = Weight::dist_pow(Domain::unit_disk(), 0.5).unwrap();
        let c = Curve::segment(Point::xy(-0.75, 0.0), Point::xy(0.75, 0.0)).unwrap();
        let v = curve_integral(&w, &c, DEFAULT_TOL).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn vertex_outside_domain() {
        let w = Weight::dist(Domain::unit_disk());
        let c = Curve::segment(Point::xy(0.0, 0.0), Point::xy(1.5, 0.0)).unwrap();
        assert!(matches!(
            curve_integral(&w, &c, DEFAULT_TOL),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn edge_through_hole_is_a_domain_violation() {
        let w = Weight::unit(Domain::annulus(0.5, 2.0).unwrap());
        let c = Curve::segment(Point::xy(-1.0, 0.0), Point::xy(1.0, 0.0)).unwrap();
        assert!(matches!(
            curve_integral(&w, &c, DEFAULT_TOL),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = Point::xy(0.0, 0.0);
        let b = Point::new(&[0.0, 0.0, 0.0]).unwrap();
        assert!(Curve::new(alloc::vec![a, b]).is_err());
        assert!(Curve::new(alloc::vec![]).is_err());
    }

    #[test]
    fn concatenation_is_additive() {
        let a = Curve::segment(Point::xy(0.0, 0.0), Point::xy(0.3, 0.1)).unwrap();
        let b = Curve::segment(Point::xy(0.3, 0.1), Point::xy(-0.2, 0.5)).unwrap();
        let ab = a.concat(&b).unwrap();
        assert!((ab.length() - a.length() - b.length()).abs() < 1e-15);
    }
}
