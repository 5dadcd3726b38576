//! Scenario configuration: built-in defaults, a JSON file layered on top,
//! then command-line overrides.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::FunctionSpec;
use crate::geometry::{BallRegion, DomainSpec};
use crate::semiconcavity::ModulusParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Certify,
    Support,
    Extend,
    Gradients,
    Condition,
    Arc,
    Mollify,
}

impl Stage {
    /// Every stage, in execution order.
    pub const ALL: [Stage; 7] =
        [Stage::Certify, Stage::Support, Stage::Extend, Stage::Gradients, Stage::Condition, Stage::Arc, Stage::Mollify];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Certify => "certify",
            Stage::Support => "support",
            Stage::Extend => "extend",
            Stage::Gradients => "gradients",
            Stage::Condition => "condition",
            Stage::Arc => "arc",
            Stage::Mollify => "mollify",
        }
    }

    pub fn parse(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }

    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Extend => &[Stage::Support],
            Stage::Gradients | Stage::Mollify => &[Stage::Support, Stage::Extend],
            Stage::Arc => &[Stage::Support, Stage::Extend, Stage::Condition],
            _ => &[],
        }
    }

    /// `stages` plus their prerequisites, deduplicated and in execution order.
    pub fn closure(stages: &[Stage]) -> Vec<Stage> {
        let mut out: Vec<Stage> = stages.iter().flat_map(|s| s.prerequisites().iter().copied().chain([*s])).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    Csv,
    Json,
}

impl GridFormat {
    pub fn parse(s: &str) -> Result<GridFormat> {
        match s {
            "csv" => Ok(GridFormat::Csv),
            "json" => Ok(GridFormat::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}, expected csv or json"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            GridFormat::Csv => "csv",
            GridFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Support grid spacing.
    pub spacing: f64,
    /// Spacing of the envelope grid over the ball.
    pub grid_spacing: f64,
    pub h_list: Vec<f64>,
    pub triples: usize,
    pub seed: u64,
    /// Largest defect of `u` still accepted, to absorb rounding.
    pub defect_tol: f64,
    /// Added to the constant bound when certifying the envelope and `u_h`.
    pub bound_slack: f64,
    pub eps_g: f64,
    /// Spacing of the sup-error grid over the half ball.
    pub mollify_spacing: f64,
    pub quadrature_points: usize,
    /// Spacing of the Hessian grid over the quarter ball.
    pub hessian_spacing: f64,
    pub hessian_step: f64,
    /// Direction traced when the hull-gap condition fails.
    pub theta: Option<Vec<f64>>,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            spacing: 0.01,
            grid_spacing: 0.02,
            h_list: vec![10.0, 20.0, 40.0],
            triples: 10_000,
            seed: 7,
            defect_tol: 1e-12,
            bound_slack: 0.05,
            eps_g: 0.01,
            mollify_spacing: 0.05,
            quadrature_points: 21,
            hessian_spacing: 0.05,
            hessian_step: 1e-3,
            theta: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub scenario: String,
    pub domain: DomainSpec,
    pub function: FunctionSpec,
    pub ball: BallRegion,
    pub modulus: ModulusParams,
    /// Kernel coefficient; `C + 1` when absent.
    pub coefficient: Option<f64>,
    pub stages: Vec<Stage>,
    pub knobs: Knobs,
    pub out: String,
    pub format: GridFormat,
}

/// Names accepted by `--scenario`.
pub const BUILTINS: [&str; 5] = ["example1", "example2", "example3", "affine-sanity", "custom"];

pub(crate) fn affine_sanity_function() -> FunctionSpec {
    FunctionSpec::Affine { coefficients: vec![0.3, -0.7], constant: 0.2 }
}

impl ScenarioConfig {
    /// Defaults for a built-in scenario. `custom` starts from the half disk
    /// and `-|x|`; a config file is expected to replace them.
    pub fn builtin(name: &str) -> Result<Self> {
        let function = match name {
            "example1" | "custom" => FunctionSpec::NegNorm,
            "example2" => FunctionSpec::NegAbsX2,
            "example3" => FunctionSpec::NegSqrtX1p4X2sq,
            "affine-sanity" => affine_sanity_function(),
            _ => return Err(Error::Config(format!("unknown scenario {name:?}; built-ins are {}", BUILTINS.join(", ")))),
        };
        let mut knobs = Knobs::default();
        if name == "example3" {
            knobs.theta = Some(vec![-1.0, 0.0]);
        }
        Ok(ScenarioConfig {
            schema: SCHEMA_VERSION,
            scenario: name.to_string(),
            domain: DomainSpec::half_disk(),
            function,
            ball: BallRegion { center: vec![0.0, 0.0], radius: 1.0 },
            modulus: ModulusParams { alpha: 1.0, c: 0.0 },
            coefficient: if name == "affine-sanity" { Some(1e-12) } else { None },
            stages: Stage::ALL.to_vec(),
            knobs,
            out: "out".into(),
            format: GridFormat::Csv,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema must be {SCHEMA_VERSION}, got {}", self.schema));
        }
        if !BUILTINS.contains(&self.scenario.as_str()) {
            return bad(format!("unknown scenario {:?}", self.scenario));
        }
        self.domain.validate().map_err(|e| Error::Config(format!("domain: {e}")))?;
        let dim = self.domain.dim();
        self.function.validate_for(dim).map_err(|e| Error::Config(format!("function: {e}")))?;
        self.ball.validate().map_err(|e| Error::Config(format!("ball: {e}")))?;
        if self.ball.dim() != dim {
            return bad(format!("ball has dimension {}, domain has {dim}", self.ball.dim()));
        }
        self.modulus.validate().map_err(|e| Error::Config(format!("modulus: {e}")))?;
        if let Some(k) = self.coefficient {
            if !(k > self.modulus.c) || !k.is_finite() {
                return bad(format!("coefficient {k} must exceed C = {}", self.modulus.c));
            }
        }
        if self.stages.is_empty() {
            return bad("no stages requested".into());
        }
        let k = &self.knobs;
        let positive = [
            ("spacing", k.spacing),
            ("grid_spacing", k.grid_spacing),
            ("eps_g", k.eps_g),
            ("mollify_spacing", k.mollify_spacing),
            ("hessian_spacing", k.hessian_spacing),
            ("hessian_step", k.hessian_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("knob {name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("defect_tol", k.defect_tol), ("bound_slack", k.bound_slack)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("knob {name} must be nonnegative, got {v}"));
            }
        }
        if k.triples == 0 {
            return bad("knob triples must be positive".into());
        }
        if k.h_list.is_empty() || k.h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return bad("h_list must be a nonempty list of positive numbers".into());
        }
        if k.quadrature_points < 3 || k.quadrature_points % 2 == 0 {
            return bad(format!("quadrature_points must be odd and at least 3, got {}", k.quadrature_points));
        }
        if let Some(t) = &k.theta {
            if t.len() != dim || t.iter().all(|c| *c == 0.0) {
                return bad(format!("theta must be a nonzero vector of dimension {dim}"));
            }
        }
        Ok(())
    }
}

/// A config file: every field optional except `schema`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    pub scenario: Option<String>,
    pub domain: Option<DomainSpec>,
    pub function: Option<FunctionSpec>,
    pub ball: Option<BallRegion>,
    pub modulus: Option<PartialModulus>,
    pub coefficient: Option<f64>,
    pub stages: Option<Vec<Stage>>,
    pub knobs: Option<serde_json::Map<String, serde_json::Value>>,
    pub out: Option<String>,
    pub format: Option<GridFormat>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialModulus {
    pub alpha: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

impl ConfigFile {
    /// Parse errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct KnobTypes {
            #[allow(dead_code)]
            knobs: Option<Knobs>,
        }
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        // knobs are kept as a map for merging; type-check them here so errors
        // still point at a line
        serde_json::from_str::<KnobTypes>(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        if file.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("config: schema must be {SCHEMA_VERSION}, got {}", file.schema)));
        }
        Ok(file)
    }
}

/// Command-line overrides; `None` leaves the lower layer alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub stages: Option<Vec<Stage>>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub spacing: Option<f64>,
    pub delta: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    pub triples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<GridFormat>,
    pub coefficient: Option<f64>,
    pub out: Option<String>,
}

fn merge_knobs(base: &Knobs, patch: &serde_json::Map<String, serde_json::Value>) -> Result<Knobs> {
    let mut v = serde_json::to_value(base)?;
    let obj = v.as_object_mut().ok_or_else(|| Error::Internal("knobs did not serialize to an object".into()))?;
    for (k, val) in patch {
        obj.insert(k.clone(), val.clone());
    }
    serde_json::from_value(v).map_err(|e| Error::Config(format!("knobs: {e}")))
}

/// Built-in defaults, then the file, then the overrides; validated.
pub fn resolve(file: Option<&ConfigFile>, flags: &Overrides) -> Result<ScenarioConfig> {
    let name = flags
        .scenario
        .clone()
        .or_else(|| file.and_then(|f| f.scenario.clone()))
        .unwrap_or_else(|| "example1".to_string());
    let mut cfg = ScenarioConfig::builtin(&name)?;
    if let Some(f) = file {
        if let Some(d) = &f.domain {
            cfg.domain = d.clone();
        }
        if let Some(u) = &f.function {
            cfg.function = u.clone();
        }
        if let Some(b) = &f.ball {
            cfg.ball = b.clone();
        }
        if let Some(m) = &f.modulus {
            cfg.modulus.alpha = m.alpha.unwrap_or(cfg.modulus.alpha);
            cfg.modulus.c = m.c.unwrap_or(cfg.modulus.c);
        }
        if f.coefficient.is_some() {
            cfg.coefficient = f.coefficient;
        }
        if let Some(s) = &f.stages {
            cfg.stages = s.clone();
        }
        if let Some(k) = &f.knobs {
            cfg.knobs = merge_knobs(&cfg.knobs, k)?;
        }
        if let Some(o) = &f.out {
            cfg.out = o.clone();
        }
        if let Some(g) = f.format {
            cfg.format = g;
        }
    }
    if let Some(s) = &flags.stages {
        cfg.stages = s.clone();
    }
    if let Some(a) = flags.alpha {
        cfg.modulus.alpha = a;
    }
    if let Some(c) = flags.c {
        cfg.modulus.c = c;
    }
    if let Some(s) = flags.spacing {
        cfg.knobs.spacing = s;
    }
    if let Some(d) = flags.delta {
        cfg.ball.radius = d;
    }
    if let Some(h) = &flags.h_list {
        cfg.knobs.h_list = h.clone();
    }
    if let Some(t) = flags.triples {
        cfg.knobs.triples = t;
    }
    if let Some(s) = flags.seed {
        cfg.knobs.seed = s;
    }
    if let Some(g) = flags.format {
        cfg.format = g;
    }
    if flags.coefficient.is_some() {
        cfg.coefficient = flags.coefficient;
    }
    if let Some(o) = &flags.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in BUILTINS {
            ScenarioConfig::builtin(name).unwrap().validate().unwrap();
        }
        assert!(matches!(ScenarioConfig::builtin("example9"), Err(Error::Config(_))));
    }

    #[test]
    fn layering_order() {
        let file = ConfigFile::parse(
            r#"{"schema": 1, "scenario": "example2", "knobs": {"seed": 11, "triples": 50}, "modulus": {"C": 0.5}}"#,
        )
        .unwrap();
        let flags = Overrides { seed: Some(3), ..Default::default() };
        let cfg = resolve(Some(&file), &flags).unwrap();
        assert_eq!(cfg.scenario, "example2");
        assert_eq!(cfg.knobs.seed, 3);
        assert_eq!(cfg.knobs.triples, 50);
        assert_eq!(cfg.modulus.c, 0.5);
        assert_eq!(cfg.knobs.spacing, Knobs::default().spacing);
        let flags = Overrides { scenario: Some("example3".into()), ..Default::default() };
        assert_eq!(resolve(Some(&file), &flags).unwrap().scenario, "example3");
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = ConfigFile::parse("{\n  \"schema\": 1,\n  \"bogus\": 2\n}").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(ConfigFile::parse(r#"{"schema": 2}"#).is_err());
        let file = ConfigFile::parse(r#"{"schema": 1, "knobs": {"spacing": -1}}"#).unwrap();
        assert!(matches!(resolve(Some(&file), &Overrides::default()), Err(Error::Config(_))));
        let e = ConfigFile::parse("{\"schema\": 1,\n \"knobs\": {\"nonsense\": 1}}").unwrap_err().to_string();
        assert!(e.contains("nonsense") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn stage_closure_adds_prerequisites_in_order() {
        assert_eq!(Stage::closure(&[Stage::Arc]), vec![Stage::Support, Stage::Extend, Stage::Condition, Stage::Arc]);
        assert_eq!(Stage::closure(&[Stage::Condition]), vec![Stage::Condition]);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ScenarioConfig::builtin("example3").unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
