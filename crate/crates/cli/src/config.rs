//! Config-file and command-line descriptions of domains, weights,
//! majorants and mappings.

use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use hlmetric_core::estimators::registry;
use hlmetric_core::{Domain, Majorant, Mapping, Point, Weight, MAX_DIM};
use serde::{Deserialize, Serialize};

// Parameterless variants are written `Name {}`: serde ignores extra keys on
// unit variants of tagged enums even with deny_unknown_fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    UnitDisk {},
    UnitBall { dim: usize },
    HalfPlane {},
    HalfSpace { dim: usize },
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
    LShape {},
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Unit {},
    Constant { value: f64 },
    Dist {},
    DistPow { alpha: f64 },
    ReciprocalDist {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MajorantSpec {
    Power { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSpec {
    PowerAlpha { alpha: f64 },
    Monomial { k: u32 },
    LogBranch {},
    Identity {},
    Scaling { c: f64 },
    Affine { matrix: Vec<f64>, offset: Vec<f64> },
    Constant { value: Vec<f64> },
    Registry { name: String, param: f64 },
}

pub fn point(coords: &[f64]) -> Result<Point> {
    ensure!(
        (1..=MAX_DIM).contains(&coords.len()),
        "points need 1 to {MAX_DIM} coordinates, got {}",
        coords.len()
    );
    Ok(Point::new(coords)?)
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        Ok(match self {
            DomainSpec::UnitDisk {} => Domain::unit_disk(),
            DomainSpec::UnitBall { dim } => Domain::unit_ball(*dim)?,
            DomainSpec::HalfPlane {} => Domain::half_plane(),
            DomainSpec::HalfSpace { dim } => Domain::half_space(*dim)?,
            DomainSpec::Rectangle { lo, hi } => Domain::rectangle(point(lo)?, point(hi)?)?,
            DomainSpec::LShape {} => Domain::l_shape(),
            DomainSpec::Annulus { inner, outer } => Domain::annulus(*inner, *outer)?,
        })
    }
}

impl WeightSpec {
    pub fn build(&self, domain: Domain) -> Result<Weight> {
        Ok(match self {
            WeightSpec::Unit {} => Weight::unit(domain),
            WeightSpec::Constant { value } => Weight::constant(domain, *value)?,
            WeightSpec::Dist {} => Weight::dist(domain),
            WeightSpec::DistPow { alpha } => Weight::dist_pow(domain, *alpha)?,
            WeightSpec::ReciprocalDist {} => Weight::reciprocal_dist(domain),
        })
    }
}

impl MajorantSpec {
    pub fn build(&self) -> Result<Majorant> {
        match self {
            MajorantSpec::Power { alpha } => Ok(Majorant::power(*alpha)?),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            MajorantSpec::Power { alpha } => *alpha,
        }
    }
}

impl MappingSpec {
    pub fn build(&self, domain: Domain) -> Result<Mapping> {
        Ok(match self {
            MappingSpec::PowerAlpha { alpha } => Mapping::power_alpha(domain, *alpha)?,
            MappingSpec::Monomial { k } => Mapping::monomial(domain, *k)?,
            MappingSpec::LogBranch {} => Mapping::log_branch(domain)?,
            MappingSpec::Identity {} => Mapping::identity(domain)?,
            MappingSpec::Scaling { c } => Mapping::scaling(domain, *c)?,
            MappingSpec::Affine { matrix, offset } => {
                Mapping::affine(domain, matrix.clone(), offset.clone())?
            }
            MappingSpec::Constant { value } => Mapping::constant(domain, value)?,
            MappingSpec::Registry { name, param } => registry::lookup(name, domain, *param)?,
        })
    }
}

/// Splits `kind:a,b,c` into the kind and its numeric parameters.
fn split_spec(s: &str) -> Result<(&str, Vec<f64>)> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let params = parse_list(rest)?;
    Ok((kind.trim(), params))
}

/// Comma-separated numbers; empty input gives an empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("not a number: {t:?}"))
        })
        .collect()
}

fn expect_params(kind: &str, params: &[f64], n: usize) -> Result<()> {
    ensure!(
        params.len() == n,
        "{kind} takes {n} parameter(s), got {}",
        params.len()
    );
    Ok(())
}

fn as_dim(x: f64) -> Result<usize> {
    ensure!(x >= 1.0 && x.fract() == 0.0, "dimension must be a positive integer, got {x}");
    Ok(x as usize)
}

impl FromStr for DomainSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, p) = split_spec(s)?;
        let no_params = |spec| expect_params(kind, &p, 0).map(|_| spec);
        Ok(match kind {
            "unit_disk" => no_params(DomainSpec::UnitDisk {})?,
            "unit_ball" => {
                expect_params(kind, &p, 1)?;
                DomainSpec::UnitBall { dim: as_dim(p[0])? }
            }
            "half_plane" => no_params(DomainSpec::HalfPlane {})?,
            "half_space" => {
                expect_params(kind, &p, 1)?;
                DomainSpec::HalfSpace { dim: as_dim(p[0])? }
            }
            "rectangle" => {
                ensure!(
                    !p.is_empty() && p.len() % 2 == 0,
                    "rectangle takes lo then hi coordinates"
                );
                let (lo, hi) = p.split_at(p.len() / 2);
                DomainSpec::Rectangle {
                    lo: lo.to_vec(),
                    hi: hi.to_vec(),
                }
            }
            "l_shape" => no_params(DomainSpec::LShape {})?,
            "annulus" => {
                expect_params(kind, &p, 2)?;
                DomainSpec::Annulus {
                    inner: p[0],
                    outer: p[1],
                }
            }
            other => bail!("unknown domain {other:?}"),
        })
    }
}

impl FromStr for WeightSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, p) = split_spec(s)?;
        let (spec, n) = match kind {
            "unit" => (WeightSpec::Unit {}, 0),
            "constant" => (WeightSpec::Constant { value: *p.first().unwrap_or(&f64::NAN) }, 1),
            "dist" => (WeightSpec::Dist {}, 0),
            "dist_pow" => (WeightSpec::DistPow { alpha: *p.first().unwrap_or(&f64::NAN) }, 1),
            "reciprocal_dist" => (WeightSpec::ReciprocalDist {}, 0),
            other => bail!("unknown weight {other:?}"),
        };
        expect_params(kind, &p, n)?;
        Ok(spec)
    }
}

impl FromStr for MajorantSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, p) = split_spec(s)?;
        match kind {
            "power" => {
                expect_params(kind, &p, 1)?;
                Ok(MajorantSpec::Power { alpha: p[0] })
            }
            other => Err(anyhow!("unknown majorant {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_specs() {
        assert_eq!("unit_disk".parse::<DomainSpec>().unwrap(), DomainSpec::UnitDisk {});
        assert_eq!(
            "rectangle:0,0,2,1".parse::<DomainSpec>().unwrap(),
            DomainSpec::Rectangle {
                lo: vec![0.0, 0.0],
                hi: vec![2.0, 1.0]
            }
        );
        assert_eq!(
            "annulus:0.5, 2".parse::<DomainSpec>().unwrap(),
            DomainSpec::Annulus { inner: 0.5, outer: 2.0 }
        );
        assert!("unit_disk:3".parse::<DomainSpec>().is_err());
        assert!("disk".parse::<DomainSpec>().is_err());
        assert_eq!(
            "dist_pow:0.5".parse::<WeightSpec>().unwrap(),
            WeightSpec::DistPow { alpha: 0.5 }
        );
        assert!("dist_pow".parse::<WeightSpec>().is_err());
        assert_eq!(
            "power:0.25".parse::<MajorantSpec>().unwrap(),
            MajorantSpec::Power { alpha: 0.25 }
        );
    }

    #[test]
    fn dimension_cap() {
        assert!(DomainSpec::UnitBall { dim: 5 }.build().is_err());
        assert!(DomainSpec::UnitBall { dim: 4 }.build().is_ok());
        assert!(point(&[0.0; 5]).is_err());
    }

    #[test]
    fn toml_tables() {
        #[derive(Deserialize)]
        struct Wrap {
            domain: DomainSpec,
            mapping: MappingSpec,
        }
        let w: Wrap = toml::from_str(
            "domain = { kind = \"unit_ball\", dim = 3 }\nmapping = { kind = \"registry\", name = \"axial_power\", param = 0.5 }",
        )
        .unwrap();
        assert_eq!(w.domain, DomainSpec::UnitBall { dim: 3 });
        assert!(w.mapping.build(w.domain.build().unwrap()).is_ok());
        assert!(toml::from_str::<Wrap>(
            "domain = { kind = \"unit_disk\", radius = 2 }\nmapping = { kind = \"log_branch\" }"
        )
        .is_err());
    }
}
