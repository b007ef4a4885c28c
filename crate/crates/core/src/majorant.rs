//! Majorants: moduli of continuity φ with φ(0) = 0, φ increasing and φ′
//! decreasing, and grid-based checks of those axioms.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance for pointwise axiom checks.
pub const AXIOM_TOL: f64 = 1e-9;

/// Scale factors used for the `φ(ct) ≤ cφ(t)` check.
pub const SCALE_FACTORS: [f64; 3] = [1.5, 2.0, 10.0];

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-4;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MajorantKind {
    /// φ(t) = t^α, α ∈ (0, 1].
    Power { alpha: f64 },
    User { name: String },
}

/// A scalar function φ on [0, ∞) together with its derivative on (0, ∞).
#[derive(Clone)]
pub struct Majorant {
    kind: MajorantKind,
    eval: Option<ScalarFn>,
    deriv: Option<ScalarFn>,
}

impl fmt::Debug for Majorant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Majorant").field("kind", &self.kind).finish()
    }
}

impl Majorant {
    /// The standard majorant φ_α(t) = t^α.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "power majorant exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            kind: MajorantKind::Power { alpha },
            eval: None,
            deriv: None,
        })
    }

    /// A majorant given by closures for φ and φ′. No axioms are assumed;
    /// run [`check_majorant_axioms`] to test them.
    pub fn custom<F, G>(name: impl Into<String>, phi: F, dphi: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: MajorantKind::User { name: name.into() },
            eval: Some(Arc::new(phi)),
            deriv: Some(Arc::new(dphi)),
        }
    }

    pub fn kind(&self) -> &MajorantKind {
        &self.kind
    }

    /// The exponent α when this is a power majorant.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            MajorantKind::Power { alpha } => Some(alpha),
            MajorantKind::User { .. } => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match (&self.kind, &self.eval) {
            (MajorantKind::Power { alpha }, _) => {
                if t == 0.0 {
                    0.0
                } else {
                    math::powf(t, *alpha)
                }
            }
            (_, Some(f)) => f(t),
            (_, None) => unreachable!("user majorant without closure"),
        }
    }

    /// φ′(t) for t > 0. Never evaluated at 0.
    pub fn deriv(&self, t: f64) -> f64 {
        match (&self.kind, &self.deriv) {
            (MajorantKind::Power { alpha }, _) => alpha * math::powf(t, alpha - 1.0),
            (_, Some(f)) => f(t),
            (_, None) => unreachable!("user majorant without closure"),
        }
    }

    /// φ(t)/t for t > 0, evaluated as t^(α−1) for power majorants so that
    /// comparisons against α·t^(α−1) are exact.
    pub fn ratio_over_t(&self, t: f64) -> f64 {
        match self.kind {
            MajorantKind::Power { alpha } => math::powf(t, alpha - 1.0),
            MajorantKind::User { .. } => self.eval(t) / t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axiom {
    /// (1) φ(0) = 0 and φ(t) > 0 for t > 0.
    Positive,
    /// (2) φ nondecreasing.
    Nondecreasing,
    /// (3) φ′ nonincreasing.
    DerivativeNonincreasing,
    /// (a) φ′(t) ≤ φ(t)/t.
    DerivativeBelowRatio,
    /// (b) φ(t)/t nonincreasing.
    RatioNonincreasing,
    /// (c) φ(ct) ≤ cφ(t) for c > 1.
    ScaleBound,
    /// (d) φ(t + s) ≤ φ(t) + φ(s).
    Subadditive,
    /// φ′ agrees with central differences of φ.
    DerivativeConsistent,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    /// Largest relative violation observed; 0 when the inequality holds everywhere.
    pub worst_violation: f64,
    /// Grid value (first argument) at which the worst violation occurred.
    pub worst_at: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomReport {
    pub grid: Vec<f64>,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is reported")
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.check(axiom).passed
    }
}

/// Tracks the worst relative violation of `lhs ≤ rhs`.
struct Tracker {
    axiom: Axiom,
    worst: f64,
    at: Option<f64>,
}

impl Tracker {
    fn new(axiom: Axiom) -> Self {
        Self {
            axiom,
            worst: 0.0,
            at: None,
        }
    }

    fn leq(&mut self, lhs: f64, rhs: f64, t: f64) {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let violation = if lhs.is_nan() || rhs.is_nan() {
            f64::INFINITY
        } else {
            ((lhs - rhs) / scale).max(0.0)
        };
        if violation > self.worst {
            self.worst = violation;
            self.at = Some(t);
        }
    }

    fn finish(self, tol: f64) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom,
            passed: self.worst <= tol,
            worst_violation: self.worst,
            worst_at: self.at,
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "grid entries must be positive and finite, found {t}"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Checks properties (1)–(3), the derived properties (a)–(d) and the
/// consistency of φ′ with central differences, pointwise on `grid`.
pub fn check_majorant_axioms(phi: &Majorant, grid: &[f64]) -> Result<AxiomReport> {
    validate_grid(grid)?;

    let values: Vec<f64> = grid.iter().map(|&t| phi.eval(t)).collect();
    let derivs: Vec<f64> = grid.iter().map(|&t| phi.deriv(t)).collect();

    let mut positive = Tracker::new(Axiom::Positive);
    let at_zero = phi.eval(0.0);
    if at_zero != 0.0 {
        positive.worst = f64::INFINITY;
        positive.at = Some(0.0);
    }
    for (&t, &v) in grid.iter().zip(&values) {
        if !(v > 0.0) && positive.worst < f64::INFINITY {
            positive.worst = f64::INFINITY;
            positive.at = Some(t);
        }
    }

    let mut nondecreasing = Tracker::new(Axiom::Nondecreasing);
    let mut deriv_nonincreasing = Tracker::new(Axiom::DerivativeNonincreasing);
    let mut ratio_nonincreasing = Tracker::new(Axiom::RatioNonincreasing);
    for i in 1..grid.len() {
        nondecreasing.leq(values[i - 1], values[i], grid[i - 1]);
        deriv_nonincreasing.leq(derivs[i], derivs[i - 1], grid[i - 1]);
        ratio_nonincreasing.leq(
            phi.ratio_over_t(grid[i]),
            phi.ratio_over_t(grid[i - 1]),
            grid[i - 1],
        );
    }

    let mut deriv_below = Tracker::new(Axiom::DerivativeBelowRatio);
    for (&t, &d) in grid.iter().zip(&derivs) {
        deriv_below.leq(d, phi.ratio_over_t(t), t);
    }

    let mut scale = Tracker::new(Axiom::ScaleBound);
    for (&t, &v) in grid.iter().zip(&values) {
        for c in SCALE_FACTORS {
            scale.leq(phi.eval(c * t), c * v, t);
        }
    }

    let mut subadditive = Tracker::new(Axiom::Subadditive);
    for i in 0..grid.len() {
        for j in i..grid.len() {
            subadditive.leq(phi.eval(grid[i] + grid[j]), values[i] + values[j], grid[i]);
        }
    }

    let mut consistent = Tracker::new(Axiom::DerivativeConsistent);
    for (&t, &d) in grid.iter().zip(&derivs) {
        let step = FD_STEP * t;
        let fd = (phi.eval(t + step) - phi.eval(t - step)) / (2.0 * step);
        let scale = d.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
        let dev = (fd - d).abs() / scale;
        if dev > consistent.worst {
            consistent.worst = dev;
            consistent.at = Some(t);
        }
    }

    Ok(AxiomReport {
        grid: grid.to_vec(),
        checks: alloc::vec![
            positive.finish(AXIOM_TOL),
            nondecreasing.finish(AXIOM_TOL),
            deriv_nonincreasing.finish(AXIOM_TOL),
            deriv_below.finish(AXIOM_TOL),
            ratio_nonincreasing.finish(AXIOM_TOL),
            scale.finish(AXIOM_TOL),
            subadditive.finish(AXIOM_TOL),
            consistent.finish(FD_TOL),
        ],
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionAReport {
    pub holds: bool,
    /// max over the grid of (φ(t)/t)/φ′(t).
    pub worst_ratio: f64,
    pub worst_at: f64,
    pub a: f64,
}

/// Tests φ(t)/t < A·φ′(t) strictly at every grid point.
pub fn check_condition_a(phi: &Majorant, a: f64, grid: &[f64]) -> Result<ConditionAReport> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!("A must be positive, got {a}")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let mut holds = true;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_at = grid[0];
    for &t in grid {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("grid entry {t} is not positive")));
        }
        let d = phi.deriv(t);
        if !(d > 0.0) {
            return Err(Error::DegenerateMajorant { t, derivative: d });
        }
        let lhs = phi.ratio_over_t(t);
        if !(lhs < a * d) {
            holds = false;
        }
        let ratio = lhs / d;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_at = t;
        }
    }
    Ok(ConditionAReport {
        holds,
        worst_ratio,
        worst_at,
        a,
    })
}

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (math::ln(lo), math::ln(hi));
    (0..n)
        .map(|i| math::exp(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Majorant {
        Majorant::custom("t^2", |t| t * t, |t| 2.0 * t)
    }

    #[test]
    fn sqrt_majorant_values_and_axioms() {
        let phi = Majorant::power(0.5).unwrap();
        assert_eq!(phi.eval(4.0), 2.0);
        assert_eq!(phi.eval(1.0), 1.0);
        assert_eq!(phi.eval(0.25), 0.5);
        let report = check_majorant_axioms(&phi, &[0.25, 1.0, 4.0]).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn identity_majorant_has_zero_violation() {
        let phi = Majorant::power(1.0).unwrap();
        let report = check_majorant_axioms(&phi, &log_grid(1e-3, 1e3, 40)).unwrap();
        for c in &report.checks {
            assert!(c.passed);
            if c.axiom != Axiom::DerivativeConsistent {
                assert_eq!(c.worst_violation, 0.0, "{:?}", c.axiom);
            }
        }
    }

    #[test]
    fn square_fails_concavity_and_ratio() {
        let report = check_majorant_axioms(&square(), &[0.5, 1.0, 2.0]).unwrap();
        assert!(!report.passed(Axiom::DerivativeNonincreasing));
        assert!(!report.passed(Axiom::RatioNonincreasing));
        // φ(t)/t = t on the grid: 0.5 → 1 is a relative increase of 1/2.
        assert_eq!(report.check(Axiom::RatioNonincreasing).worst_violation, 0.5);
        assert!(report.passed(Axiom::Positive));
        assert!(report.passed(Axiom::Nondecreasing));
    }

    #[test]
    fn invalid_grids() {
        let phi = Majorant::power(0.5).unwrap();
        assert!(check_majorant_axioms(&phi, &[]).is_err());
        assert!(check_majorant_axioms(&phi, &[0.0, 1.0]).is_err());
        assert!(check_majorant_axioms(&phi, &[-1.0]).is_err());
        assert!(check_majorant_axioms(&phi, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn inconsistent_derivative_is_caught() {
        let phi = Majorant::custom("bad", |t: f64| t.sqrt(), |_| 1.0);
        let report = check_majorant_axioms(&phi, &[0.5, 1.0, 2.0]).unwrap();
        assert!(!report.passed(Axiom::DerivativeConsistent));
    }

    #[test]
    fn condition_a_examples() {
        let half = Majorant::power(0.5).unwrap();
        let r = check_condition_a(&half, 4.0, &log_grid(1e-4, 10.0, 30)).unwrap();
        assert!(r.holds);
        assert!((r.worst_ratio - 2.0).abs() < 1e-12);

        let r = check_condition_a(&half, 2.0, &log_grid(1e-4, 10.0, 30)).unwrap();
        assert!(!r.holds);

        let one = Majorant::power(1.0).unwrap();
        let r = check_condition_a(&one, 2.0, &[0.1, 1.0, 5.0]).unwrap();
        assert!(r.holds);
        assert_eq!(r.worst_ratio, 1.0);
    }

    #[test]
    fn condition_a_degenerate() {
        let flat = Majorant::custom("flat", |t| t.min(1.0), |t| if t < 1.0 { 1.0 } else { 0.0 });
        assert!(matches!(
            check_condition_a(&flat, 2.0, &[0.5, 2.0]),
            Err(Error::DegenerateMajorant { .. })
        ));
    }

    #[test]
    fn power_rejects_bad_exponent() {
        assert!(Majorant::power(0.0).is_err());
        assert!(Majorant::power(1.5).is_err());
    }
}
