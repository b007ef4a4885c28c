//! The `verify` subcommand: theorem checks described by a TOML file.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hlmetric_core::harness::{
    q_profile, verify_converse_strong, verify_forward, verify_image_curve_lemma,
    verify_unit_ball_corollary, QProfile, Samples, Status, TheoremReport,
};
use hlmetric_core::sampling::{
    approach_pairs, axis_directions, boundary_approach, pairs_in_domain, points_in_domain,
    PairSampling,
};
use hlmetric_core::{Curve, Domain, Majorant, Mapping, Point, Weight};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{point, DomainSpec, MajorantSpec, MappingSpec, WeightSpec};
use crate::io::write_json;

const DEFAULT_POINTS: usize = 400;
const DEFAULT_PAIRS: usize = 400;
const DEFAULT_MIN_CLEARANCE: f64 = 1e-3;
const DEFAULT_APPROACH_STEPS: usize = 25;
const DEFAULT_RADIUS_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremChoice {
    Forward,
    ConverseStrong,
    UnitBall,
    QProfile,
    ImageCurve,
}

impl TheoremChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremChoice::Forward => "forward",
            TheoremChoice::ConverseStrong => "converse_strong",
            TheoremChoice::UnitBall => "unit_ball",
            TheoremChoice::QProfile => "q_profile",
            TheoremChoice::ImageCurve => "image_curve",
        }
    }
}

/// Sampling settings; unset fields fall back to the file-level section and
/// then to the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesSpec {
    pub points: Option<usize>,
    pub pairs: Option<usize>,
    pub min_clearance: Option<f64>,
    /// Boundary distance for the refined pair set used to detect Hölder
    /// divergence; no refined set when unset.
    pub refined_clearance: Option<f64>,
    /// Points per boundary-approach ray along the coordinate axes.
    pub approach_steps: Option<usize>,
}

impl SamplesSpec {
    fn or(&self, base: &SamplesSpec) -> SamplesSpec {
        SamplesSpec {
            points: self.points.or(base.points),
            pairs: self.pairs.or(base.pairs),
            min_clearance: self.min_clearance.or(base.min_clearance),
            refined_clearance: self.refined_clearance.or(base.refined_clearance),
            approach_steps: self.approach_steps.or(base.approach_steps),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    pub theorem: TheoremChoice,
    pub domain: DomainSpec,
    pub weight: Option<WeightSpec>,
    pub majorant: Option<MajorantSpec>,
    pub mapping: MappingSpec,
    #[serde(default)]
    pub samples: SamplesSpec,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    /// Constant in φ(t)/t < A φ′(t); defaults to 2/α for power majorants.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub radius_fractions: Option<Vec<f64>>,
    pub curve: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub seed: u64,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub samples: SamplesSpec,
    #[serde(rename = "instance", default)]
    pub instances: Vec<InstanceSpec>,
}

/// An instance with every object built and every default resolved.
pub struct Prepared {
    spec: InstanceSpec,
    seed: u64,
    h: Option<f64>,
    tol: f64,
    samples: SamplesSpec,
    domain: Domain,
    weight: Option<Weight>,
    majorant: Option<Majorant>,
    mapping: Mapping,
    a: Option<f64>,
    curve: Option<Curve>,
}

#[derive(Debug, Serialize)]
pub struct InstanceOutput {
    pub instance: String,
    pub theorem: TheoremChoice,
    pub seed: u64,
    pub reports: Vec<TheoremReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_profile: Option<QProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceOutput {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.reports.iter().any(|r| r.status == Status::Fail)
    }
}

pub fn load(path: &Path) -> Result<VerifyConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<VerifyConfig> {
    let cfg: VerifyConfig = toml::from_str(text)?;
    ensure!(!cfg.instances.is_empty(), "the config has no [[instance]] sections");
    let mut names = std::collections::BTreeSet::new();
    for inst in &cfg.instances {
        ensure!(names.insert(inst.name.as_str()), "duplicate instance name {:?}", inst.name);
        ensure!(
            !inst.name.is_empty() && inst.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'),
            "instance names may contain only letters, digits, '_' and '-': {:?}",
            inst.name
        );
    }
    Ok(cfg)
}

fn prepare(cfg: &VerifyConfig, spec: &InstanceSpec) -> Result<Prepared> {
    let ctx = || format!("instance {:?}", spec.name);
    let domain = spec.domain.build().with_context(ctx)?;
    let weight = spec
        .weight
        .as_ref()
        .map(|w| w.build(domain.clone()))
        .transpose()
        .with_context(ctx)?;
    let majorant = spec.majorant.as_ref().map(|m| m.build()).transpose().with_context(ctx)?;
    let mapping = spec.mapping.build(domain.clone()).with_context(ctx)?;
    let tol = spec.tol.or(cfg.tol).unwrap_or(hlmetric_core::harness::DEFAULT_TOL);
    ensure!(tol >= 0.0, "{}: tol must be nonnegative", ctx());
    let h = spec.h.or(cfg.h);
    if let Some(h) = h {
        ensure!(h > 0.0, "{}: h must be positive", ctx());
    }
    let needs = |field: &str, present: bool| -> Result<()> {
        if !present {
            bail!("{}: theorem {:?} needs `{field}`", ctx(), spec.theorem);
        }
        Ok(())
    };
    let mut a = spec.a;
    match spec.theorem {
        TheoremChoice::Forward | TheoremChoice::QProfile => {
            needs("weight", weight.is_some())?;
            needs("majorant", majorant.is_some())?;
        }
        TheoremChoice::ConverseStrong => {
            needs("weight", weight.is_some())?;
            needs("majorant", majorant.is_some())?;
            a = a.or_else(|| spec.majorant.as_ref().map(|m| 2.0 / m.alpha()));
            ensure!(a.is_some_and(|a| a > 0.0), "{}: A must be positive", ctx());
        }
        TheoremChoice::UnitBall => {
            needs("majorant", majorant.is_some())?;
            let alpha = spec.majorant.as_ref().map(|m| m.alpha()).unwrap_or(f64::NAN);
            ensure!(alpha > 0.0 && alpha < 1.0, "{}: the unit-ball check needs α in (0, 1)", ctx());
            ensure!(
                mapping.has_derivative_oracle(),
                "{}: the unit-ball check needs a mapping with a derivative oracle",
                ctx()
            );
            ensure!(
                matches!(spec.domain, DomainSpec::UnitDisk {} | DomainSpec::UnitBall { .. }),
                "{}: the unit-ball check needs the unit disk or ball",
                ctx()
            );
        }
        TheoremChoice::ImageCurve => needs("curve", spec.curve.is_some())?,
    }
    let curve = spec
        .curve
        .as_ref()
        .map(|rows| -> Result<Curve> {
            let vertices = rows.iter().map(|r| point(r)).collect::<Result<Vec<Point>>>()?;
            Ok(Curve::new(vertices)?)
        })
        .transpose()
        .with_context(ctx)?;
    let samples = spec.samples.or(&cfg.samples);
    if let Some(c) = samples.min_clearance {
        ensure!(c > 0.0, "{}: min_clearance must be positive", ctx());
    }
    Ok(Prepared {
        spec: spec.clone(),
        seed: spec.seed.unwrap_or(cfg.seed),
        h,
        tol,
        samples,
        domain,
        weight,
        majorant,
        mapping,
        a,
        curve,
    })
}

/// Validates every instance; any error here is a config error.
pub fn prepare_all(cfg: &VerifyConfig) -> Result<Vec<Prepared>> {
    cfg.instances.iter().map(|s| prepare(cfg, s)).collect()
}

/// Sample sets for an instance. Seeds: points use `seed`, pairs `seed + 1`,
/// refined pairs `seed + 2`. Boundary-approach rays run along the axes from
/// the centre of the bounding box, or from the sampled point farthest from
/// the boundary when the centre is not inside.
fn build_samples(p: &Prepared) -> hlmetric_core::Result<Samples> {
    let n_points = p.samples.points.unwrap_or(DEFAULT_POINTS);
    let n_pairs = p.samples.pairs.unwrap_or(DEFAULT_PAIRS);
    let clearance = p.samples.min_clearance.unwrap_or(DEFAULT_MIN_CLEARANCE);
    let steps = p.samples.approach_steps.unwrap_or(DEFAULT_APPROACH_STEPS);
    let mut points = points_in_domain(&p.domain, n_points, clearance, p.seed)?;
    let deepest = points
        .iter()
        .copied()
        .max_by(|a, b| p.domain.clearance(a).total_cmp(&p.domain.clearance(b)));
    let start = p
        .domain
        .bounding_box()
        .map(|(lo, hi)| lo.lerp(&hi, 0.5))
        .filter(|c| p.domain.clearance(c) > clearance)
        .or(deepest);
    let axes = axis_directions(p.domain.dim());
    let rays = |delta: f64| -> hlmetric_core::Result<Vec<(Point, Point)>> {
        match start {
            Some(s) if steps >= 2 && delta < p.domain.clearance(&s) => {
                approach_pairs(&p.domain, &s, &axes, delta, steps)
            }
            _ => Ok(Vec::new()),
        }
    };
    if let Some(s) = start {
        if steps >= 2 && clearance < p.domain.clearance(&s) {
            points.extend(boundary_approach(&p.domain, &s, &axes, clearance, steps)?);
        }
    }
    let mut pairs = pairs_in_domain(&p.domain, &PairSampling::new(n_pairs, clearance, p.seed.wrapping_add(1)))?;
    pairs.extend(rays(clearance)?);
    let refined_pairs = match p.samples.refined_clearance {
        Some(delta) => {
            let mut r = pairs_in_domain(&p.domain, &PairSampling::new(n_pairs, delta, p.seed.wrapping_add(2)))?;
            r.extend(rays(delta)?);
            r
        }
        None => Vec::new(),
    };
    Ok(Samples {
        points,
        pairs,
        refined_pairs,
        seed: Some(p.seed),
    })
}

fn run_instance(p: &Prepared) -> InstanceOutput {
    let mut out = InstanceOutput {
        instance: p.spec.name.clone(),
        theorem: p.spec.theorem,
        seed: p.seed,
        reports: Vec::new(),
        q_profile: None,
        error: None,
    };
    let result = (|| -> hlmetric_core::Result<()> {
        let label = |r: &mut TheoremReport| r.instance = p.spec.name.clone();
        match p.spec.theorem {
            TheoremChoice::ImageCurve => {
                let mut r = verify_image_curve_lemma(&p.mapping, p.curve.as_ref().expect("validated"), p.tol)?;
                label(&mut r);
                out.reports.push(r);
            }
            theorem => {
                let samples = build_samples(p)?;
                let w = p.weight.as_ref();
                let phi = p.majorant.as_ref();
                match theorem {
                    TheoremChoice::Forward => {
                        let mut r = verify_forward(
                            &p.mapping,
                            w.expect("validated"),
                            phi.expect("validated"),
                            &samples,
                            p.h,
                            None,
                            p.tol,
                        )?;
                        label(&mut r);
                        out.reports.push(r);
                    }
                    TheoremChoice::ConverseStrong => {
                        let fractions = p
                            .spec
                            .radius_fractions
                            .clone()
                            .unwrap_or_else(|| DEFAULT_RADIUS_FRACTIONS.to_vec());
                        let mut r = verify_converse_strong(
                            &p.mapping,
                            w.expect("validated"),
                            phi.expect("validated"),
                            p.a.expect("validated"),
                            &samples,
                            &fractions,
                            p.tol,
                        )?;
                        label(&mut r);
                        out.reports.push(r);
                    }
                    TheoremChoice::UnitBall => {
                        let alpha = p.spec.majorant.as_ref().expect("validated").alpha();
                        let (mut f, mut c) = verify_unit_ball_corollary(&p.mapping, alpha, &samples, p.tol)?;
                        label(&mut f);
                        label(&mut c);
                        out.reports.push(f);
                        out.reports.push(c);
                    }
                    TheoremChoice::QProfile => {
                        let q = q_profile(&p.mapping, w.expect("validated"), phi.expect("validated"), &samples.points)?;
                        let mut r = q.to_report(p.spec.name.clone());
                        r.metadata.seed = Some(p.seed);
                        out.reports.push(r);
                        out.q_profile = Some(q);
                    }
                    TheoremChoice::ImageCurve => unreachable!(),
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    theorem: &'a str,
    left: Option<f64>,
    right: Option<f64>,
    slack: Option<f64>,
    pass: bool,
    status: &'a str,
    instance: &'a str,
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::HypothesisUnmet => "hypothesis_unmet",
        Status::Informational => "informational",
    }
}

/// Outcome of a `verify` run.
pub enum Outcome {
    AllAcceptable,
    SomeFailed,
}

/// Runs every instance (concurrently) and writes `NN_name.json` per
/// instance plus `summary.csv` into `out_dir`.
pub fn execute(prepared: &[Prepared], out_dir: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let outputs: Vec<InstanceOutput> = prepared.par_iter().map(run_instance).collect();
    let mut summary = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    let mut failed = false;
    for (i, out) in outputs.iter().enumerate() {
        write_json(out, Some(&out_dir.join(format!("{:02}_{}.json", i + 1, out.instance))))?;
        failed |= out.failed();
        for r in &out.reports {
            summary.serialize(SummaryRow {
                theorem: r.theorem.as_str(),
                left: Some(r.left),
                right: Some(r.right),
                slack: r.slack,
                pass: r.pass,
                status: status_str(r.status),
                instance: &out.instance,
            })?;
        }
        if let Some(e) = &out.error {
            eprintln!("{}: {e}", out.instance);
            summary.serialize(SummaryRow {
                theorem: out.theorem.as_str(),
                left: None,
                right: None,
                slack: None,
                pass: false,
                status: "error",
                instance: &out.instance,
            })?;
        }
    }
    summary.flush()?;
    Ok(if failed { Outcome::SomeFailed } else { Outcome::AllAcceptable })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        seed = 3
        [[instance]]
        name = "square_curve"
        theorem = "image_curve"
        domain = { kind = "unit_disk" }
        mapping = { kind = "monomial", k = 2 }
        curve = [[0.0, 0.0], [0.5, 0.0]]
    "#;

    #[test]
    fn parses_and_validates() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.instances.len(), 1);
        assert!(prepare_all(&cfg).is_ok());
    }

    #[test]
    fn config_errors() {
        assert!(parse("seed = 1").is_err());
        assert!(parse(&MINIMAL.replace("image_curve", "no_such_theorem")).is_err());
        assert!(parse(&MINIMAL.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
        let no_curve = parse(&MINIMAL.replace("curve = [[0.0, 0.0], [0.5, 0.0]]", "")).unwrap();
        assert!(prepare_all(&no_curve).is_err());
        let five_d = parse(&MINIMAL.replace("{ kind = \"unit_disk\" }", "{ kind = \"unit_ball\", dim = 5 }")).unwrap();
        assert!(prepare_all(&five_d).is_err());
    }

    #[test]
    fn unit_ball_needs_oracle_and_alpha() {
        let text = r#"
            [[instance]]
            name = "u"
            theorem = "unit_ball"
            domain = { kind = "unit_disk" }
            majorant = { kind = "power", alpha = 1.0 }
            mapping = { kind = "identity" }
        "#;
        assert!(prepare_all(&parse(text).unwrap()).is_err());
        let ok = text.replace("alpha = 1.0", "alpha = 0.5");
        assert!(prepare_all(&parse(&ok).unwrap()).is_ok());
    }

    #[test]
    fn converse_default_a() {
        let text = r#"
            [[instance]]
            name = "c"
            theorem = "converse_strong"
            domain = { kind = "unit_disk" }
            weight = { kind = "dist" }
            majorant = { kind = "power", alpha = 0.25 }
            mapping = { kind = "power_alpha", alpha = 0.25 }
        "#;
        let cfg = parse(text).unwrap();
        let p = prepare_all(&cfg).unwrap();
        assert_eq!(p[0].a, Some(8.0));
    }
}
