use core::fmt;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::math;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// A point of ℝⁿ, `1 ≤ n ≤ MAX_DIM`, with finite coordinates.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidInput(alloc::format!(
                "point dimension must be in 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            coords: buf,
            dim: coords.len() as u8,
        })
    }

    /// Planar point, the usual identification ℝ² ≅ ℂ.
    pub fn xy(x: f64, y: f64) -> Self {
        Self::from_array([x, y, 0.0, 0.0], 2)
    }

    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension out of range");
        Self::from_array([0.0; MAX_DIM], dim)
    }

    pub(crate) fn from_array(coords: [f64; MAX_DIM], dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        let mut coords = coords;
        for c in coords.iter_mut().skip(dim) {
            *c = 0.0;
        }
        Self {
            coords,
            dim: dim as u8,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub(crate) fn with_coord(mut self, i: usize, value: f64) -> Self {
        self.coords[i] = value;
        self
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    /// `(1 − t)·self + t·other`.
    #[inline]
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        let mut out = [0.0; MAX_DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.coords[i] + t * (other.coords[i] - self.coords[i]);
        }
        Point {
            coords: out,
            dim: self.dim,
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Add for Point {
    type Output = Point;

    #[inline]
    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for (a, b) in out.coords.iter_mut().zip(rhs.coords.iter()) {
            *a += b;
        }
        out
    }
}

impl Sub for Point {
    type Output = Point;

    #[inline]
    fn sub(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for (a, b) in out.coords.iter_mut().zip(rhs.coords.iter()) {
            *a -= b;
        }
        out
    }
}

impl Mul<f64> for Point {
    type Output = Point;

    #[inline]
    fn mul(self, rhs: f64) -> Point {
        let mut out = self;
        for a in out.coords.iter_mut() {
            *a *= rhs;
        }
        out
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for c in self.coords() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let coords = alloc::vec::Vec::<f64>::deserialize(deserializer)?;
        Point::new(&coords).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_points() {
        assert!(Point::new(&[]).is_err());
        assert!(Point::new(&[1.0, f64::NAN]).is_err());
        assert!(Point::new(&[0.0; 5]).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = Point::xy(3.0, 0.0);
        let b = Point::xy(0.0, 4.0);
        assert_eq!(a.distance(&b), 5.0);
        assert_eq!((a + b) * 2.0, Point::xy(6.0, 8.0));
        assert_eq!(a.lerp(&b, 0.5), Point::xy(1.5, 2.0));
    }
}
