//! Deterministic sample generation: shifted Halton points in a domain,
//! multi-scale point pairs, boundary-approach sequences and sphere
//! directions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::math;
use crate::point::{Point, MAX_DIM};

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * factor;
        index /= b;
        factor *= inv;
    }
    out
}

/// Halton sequence in `[0, 1)^dim` with a Cranley–Patterson rotation drawn
/// from `seed`. Index 0 is skipped.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    shift: [f64; 8],
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!((1..=PRIMES.len()).contains(&dim));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shift = [0.0; 8];
        for s in shift.iter_mut().take(dim) {
            *s = rng.gen::<f64>();
        }
        Self {
            dim,
            shift,
            index: 0,
        }
    }

    pub fn next_sample(&mut self) -> [f64; 8] {
        self.index += 1;
        let mut out = [0.0; 8];
        for (k, o) in out.iter_mut().enumerate().take(self.dim) {
            let v = radical_inverse(self.index, PRIMES[k]) + self.shift[k];
            *o = v - math::floor(v);
        }
        out
    }
}

/// Box used for rejection sampling: the domain's bounding box, or for
/// unbounded domains the cube [-R, R]ⁿ⁻¹ × (0, R] with `R = extent`.
fn sampling_box(domain: &Domain, extent: f64) -> (Point, Point) {
    domain.bounding_box().unwrap_or_else(|| {
        let dim = domain.dim();
        let mut lo = [-extent; MAX_DIM];
        lo[dim - 1] = 0.0;
        (
            Point::from_array(lo, dim),
            Point::from_array([extent; MAX_DIM], dim),
        )
    })
}

/// `count` quasi-random points of `domain` with boundary distance at least
/// `min_clearance`, by rejection from the bounding box.
pub fn points_in_domain(
    domain: &Domain,
    count: usize,
    min_clearance: f64,
    seed: u64,
) -> Result<Vec<Point>> {
    let dim = domain.dim();
    let (lo, hi) = sampling_box(domain, 2.0);
    let mut seq = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(count);
    let budget = 1000 * count.max(1) + 10_000;
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > budget {
            return Err(Error::Precondition(alloc::format!(
                "could not place {count} points with clearance {min_clearance}"
            )));
        }
        let u = seq.next_sample();
        let mut c = [0.0; MAX_DIM];
        for k in 0..dim {
            c[k] = lo.coord(k) + u[k] * (hi.coord(k) - lo.coord(k));
        }
        let p = Point::from_array(c, dim);
        if domain.clearance(&p) >= min_clearance && domain.clearance(&p) > 0.0 {
            out.push(p);
        }
    }
    Ok(out)
}

/// Unit directions spread over the sphere S^{dim−1}: equally spaced angles
/// in the plane, a Fibonacci lattice in ℝ³, and normalised Halton/Box–Muller
/// samples in ℝ⁴.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Point> {
    let count = count.max(1);
    match dim {
        1 => alloc::vec![Point::new(&[1.0]).unwrap(), Point::new(&[-1.0]).unwrap()],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                Point::xy(math::cos(t), math::sin(t))
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - math::sqrt(5.0));
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = math::sqrt((1.0 - z * z).max(0.0));
                    let t = golden * k as f64;
                    Point::new(&[r * math::cos(t), r * math::sin(t), z]).unwrap()
                })
                .collect()
        }
        _ => {
            let mut seq = Halton::new(dim, 0x5eed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let u = seq.next_sample();
                let mut c = [0.0; MAX_DIM];
                for k in (0..dim).step_by(2) {
                    let r = math::sqrt(-2.0 * math::ln(u[k].max(1e-300)));
                    let t = 2.0 * PI * u[k + 1];
                    c[k] = r * math::cos(t);
                    if k + 1 < dim {
                        c[k + 1] = r * math::sin(t);
                    }
                }
                let p = Point::from_array(c, dim);
                let n = p.norm();
                if n > 1e-12 {
                    out.push(p * (1.0 / n));
                }
            }
            out
        }
    }
}

/// Pair generation settings.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSampling {
    pub count: usize,
    /// Smallest boundary distance of any pair endpoint.
    pub min_clearance: f64,
    /// Fraction of pairs that are local (separation comparable to the
    /// boundary distance of the first point); the rest are global.
    pub local_fraction: f64,
    pub seed: u64,
}

impl PairSampling {
    pub fn new(count: usize, min_clearance: f64, seed: u64) -> Self {
        Self {
            count,
            min_clearance,
            local_fraction: 0.5,
            seed,
        }
    }
}

/// Quasi-random point pairs. Global pairs join two independent points;
/// local pairs put the first point at a boundary distance spread
/// geometrically down to `min_clearance` and the second point a fraction of
/// that distance away, so that Hölder quotients near ∂D are resolved.
pub fn pairs_in_domain(domain: &Domain, cfg: &PairSampling) -> Result<Vec<(Point, Point)>> {
    let dim = domain.dim();
    let local = ((cfg.count as f64) * cfg.local_fraction.clamp(0.0, 1.0)) as usize;
    let global = cfg.count - local;
    let a = points_in_domain(domain, global, cfg.min_clearance, cfg.seed)?;
    let b = points_in_domain(domain, global, cfg.min_clearance, cfg.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let mut pairs: Vec<(Point, Point)> = a.into_iter().zip(b).collect();

    if local > 0 {
        let centers = points_in_domain(domain, 4 * local, cfg.min_clearance, cfg.seed.wrapping_add(1))?;
        let mut seq = Halton::new(dim.max(2), cfg.seed.wrapping_add(2));
        let (lo, hi) = sampling_box(domain, 2.0);
        let diameter = lo.distance(&hi);
        let dirs = sphere_directions(dim, 97);
        let mut k = 0usize;
        let mut ci = 0usize;
        while pairs.len() < cfg.count {
            let u = seq.next_sample();
            // Target boundary distance, log-uniform in [min_clearance, diameter/2].
            let (lg_lo, lg_hi) = (math::ln(cfg.min_clearance), math::ln(0.5 * diameter));
            let target = math::exp(lg_lo + u[0] * (lg_hi - lg_lo));
            let center = centers[ci % centers.len()];
            ci += 1;
            // Pull the center toward the boundary until it reaches the target depth.
            let x = push_to_clearance(domain, center, target);
            let dx = domain.clearance(&x);
            if !(dx >= cfg.min_clearance) {
                continue;
            }
            let scale = dx * (0.05 + 1.9 * u[1]);
            let dir = dirs[k % dirs.len()];
            k += 1;
            let y = x + dir * scale;
            if domain.clearance(&y) >= cfg.min_clearance && y != x {
                pairs.push((x, y));
            }
            if k > 1000 * cfg.count + 10_000 {
                return Err(Error::Precondition("could not place local pairs".into()));
            }
        }
    }
    Ok(pairs)
}

/// Moves `p` along a straight line toward the nearest part of the boundary
/// (estimated by probing coordinate directions) until its clearance drops
/// to about `target`; returns `p` unchanged if it is already closer.
fn push_to_clearance(domain: &Domain, p: Point, target: f64) -> Point {
    let d0 = domain.clearance(&p);
    if d0 <= target {
        return p;
    }
    // Direction of steepest decrease of the distance, by central differences.
    let dim = domain.dim();
    let eps = 1e-6 * d0.max(1e-3);
    let mut g = [0.0; MAX_DIM];
    for (k, gk) in g.iter_mut().enumerate().take(dim) {
        let plus = p.with_coord(k, p.coord(k) + eps);
        let minus = p.with_coord(k, p.coord(k) - eps);
        *gk = (domain.clearance(&plus) - domain.clearance(&minus)) / (2.0 * eps);
    }
    let g = Point::from_array(g, dim);
    let gn = g.norm();
    if !(gn > 1e-9) {
        return p;
    }
    let dir = g * (-1.0 / gn);
    // Bisection on the step length for clearance = target.
    let (mut lo, mut hi) = (0.0, d0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if domain.clearance(&(p + dir * mid)) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    p + dir * lo
}

/// Points approaching ∂D along rays from `start` in each direction, at
/// boundary distances `d_k` geometrically spaced from `start`'s distance
/// down to `min_clearance` (`steps` values per ray).
pub fn boundary_approach(
    domain: &Domain,
    start: &Point,
    directions: &[Point],
    min_clearance: f64,
    steps: usize,
) -> Result<Vec<Point>> {
    let d0 = domain.boundary_distance(start)?;
    if !(min_clearance > 0.0 && min_clearance < d0) {
        return Err(Error::InvalidInput(alloc::format!(
            "min_clearance must lie in (0, {d0}), got {min_clearance}"
        )));
    }
    let steps = steps.max(2);
    let mut out = Vec::with_capacity(directions.len() * steps);
    for dir in directions {
        // Exit distance along the ray.
        let (mut lo, mut hi) = (0.0, 1.0);
        while domain.clearance(&(*start + *dir * hi)) > 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                break;
            }
        }
        for k in 0..steps {
            let target = d0 * math::powf(min_clearance / d0, k as f64 / (steps - 1) as f64);
            // Bisection for the point on the ray with clearance = target.
            let (mut a, mut b) = (lo, hi);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if domain.clearance(&(*start + *dir * mid)) > target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let p = *start + *dir * a;
            if domain.clearance(&p) > 0.0 {
                out.push(p);
            }
            lo = a;
        }
    }
    Ok(out)
}

/// Consecutive points of [`boundary_approach`] along each ray, paired.
pub fn approach_pairs(
    domain: &Domain,
    start: &Point,
    directions: &[Point],
    min_clearance: f64,
    steps: usize,
) -> Result<Vec<(Point, Point)>> {
    let mut out = Vec::new();
    for dir in directions {
        let ray = boundary_approach(domain, start, core::slice::from_ref(dir), min_clearance, steps)?;
        out.extend(ray.windows(2).filter(|w| w[0] != w[1]).map(|w| (w[0], w[1])));
    }
    Ok(out)
}

/// The ± coordinate axes.
pub fn axis_directions(dim: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut c = [0.0; MAX_DIM];
            c[k] = s;
            out.push(Point::from_array(c, dim));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn seeded_points_are_reproducible_and_inside() {
        let disk = Domain::unit_disk();
        let a = points_in_domain(&disk, 200, 0.01, 7).unwrap();
        let b = points_in_domain(&disk, 200, 0.01, 7).unwrap();
        let c = points_in_domain(&disk, 200, 0.01, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|p| disk.clearance(p) >= 0.01));
    }

    #[test]
    fn pairs_respect_clearance() {
        let disk = Domain::unit_disk();
        let pairs = pairs_in_domain(&disk, &PairSampling::new(300, 1e-3, 3)).unwrap();
        assert_eq!(pairs.len(), 300);
        let min = pairs
            .iter()
            .flat_map(|(x, y)| [disk.clearance(x), disk.clearance(y)])
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 1e-3);
        // Local pairs reach close to the boundary.
        assert!(min < 1e-2, "{min}");
    }

    #[test]
    fn approach_reaches_min_clearance() {
        let disk = Domain::unit_disk();
        let pts = boundary_approach(&disk, &Point::xy(0.0, 0.0), &axis_directions(2), 1e-4, 9)
            .unwrap();
        assert_eq!(pts.len(), 36);
        let last = pts[8];
        assert!((disk.clearance(&last) - 1e-4).abs() < 1e-10);
        assert!(last.coord(1).abs() < 1e-15);
    }

    #[test]
    fn directions_are_unit() {
        for dim in 1..=4 {
            for d in sphere_directions(dim, 64) {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
