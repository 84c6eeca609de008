//! Run configuration documents. Parsing is strict throughout: unknown keys
//! are configuration errors, and malformed JSON reports line/column.

use g2flow::numerics::StepControl;
use g2flow::profile::ProfileSpec;
use g2flow::soliton::{CYFamily, FamilyKind};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!(
            "invalid JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, ctx: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("{ctx}: {e}")))
}

/// `{"rtol":..,"atol":..,"dt_init":..,"dt_min":..,"max_steps":..}`, all
/// optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepBlock {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub dt_init: Option<f64>,
    pub dt_min: Option<f64>,
    pub max_steps: Option<usize>,
}

impl StepBlock {
    pub fn build(&self) -> Result<StepControl, CliError> {
        let d = StepControl::default();
        let ctl = StepControl {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            dt_init: self.dt_init.unwrap_or(d.dt_init),
            dt_min: self.dt_min.unwrap_or(d.dt_min),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        };
        if !(ctl.rtol > 0.0 && ctl.atol > 0.0 && ctl.dt_init > 0.0 && ctl.dt_min > 0.0) {
            return Err(CliError::Config("step tolerances must be positive".into()));
        }
        if ctl.dt_min >= ctl.dt_init {
            return Err(CliError::Config(
                "step.dt_min must be below step.dt_init".into(),
            ));
        }
        Ok(ctl)
    }
}

/// `{"k":..,"C":..,"mu":..,"t_end":..}`; which entries are required depends
/// on the command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub mu: Option<f64>,
    pub t_end: Option<f64>,
}

/// Configuration of a `torsion` run: a profile document plus an optional
/// classification tolerance.
#[derive(Debug, Clone)]
pub struct TorsionConfig {
    pub profile: ProfileSpec,
    pub tol: Option<f64>,
}

impl TorsionConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut v = parse_json(text)?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| CliError::Config("torsion config must be an object".into()))?;
        let tol = match obj.remove("tol") {
            None => None,
            Some(t) => Some(
                t.as_f64()
                    .filter(|x| *x > 0.0)
                    .ok_or_else(|| CliError::Config("\"tol\" must be a positive number".into()))?,
            ),
        };
        let profile = ProfileSpec::from_value(&v).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(TorsionConfig { profile, tol })
    }
}

/// Configuration of a `flow` run.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub profile: ProfileSpec,
    pub k: f64,
    pub c: f64,
    pub t_end: f64,
    pub step: StepControl,
    pub snapshot_stride: usize,
}

impl FlowConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let v = parse_json(text)?;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            profile: Value,
            params: ParamsBlock,
            step: Option<StepBlock>,
            snapshot_stride: Option<usize>,
        }
        let raw: Raw = from_value(v, "flow config")?;
        let profile =
            ProfileSpec::from_value(&raw.profile).map_err(|e| CliError::Config(e.to_string()))?;
        let t_end = raw
            .params
            .t_end
            .ok_or_else(|| CliError::Config("flow params need \"t_end\"".into()))?;
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(CliError::Config("\"t_end\" must be positive".into()));
        }
        let stride = raw.snapshot_stride.unwrap_or(1);
        if stride == 0 {
            return Err(CliError::Config(
                "\"snapshot_stride\" must be at least 1".into(),
            ));
        }
        Ok(FlowConfig {
            profile,
            k: raw.params.k,
            c: raw.params.c,
            t_end,
            step: raw.step.unwrap_or_default().build()?,
            snapshot_stride: stride,
        })
    }
}

/// `{"family":"parabolic"|"hyperbolic"|"trig", "C":.., "R":.., "r0":..,
/// "theta0":.., "sign":..}`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    pub family: String,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default = "default_sign")]
    pub sign: i8,
}

fn default_sign() -> i8 {
    1
}

impl FamilyBlock {
    pub fn build(&self) -> Result<CYFamily, CliError> {
        let kind = match self.family.as_str() {
            "parabolic" => FamilyKind::Parabolic,
            "hyperbolic" => FamilyKind::Hyperbolic,
            "trig" => FamilyKind::Trigonometric,
            other => {
                return Err(CliError::Config(format!(
                    "\"family\" = \"{other}\" is not parabolic, hyperbolic, or trig"
                )))
            }
        };
        CYFamily::new(kind, self.c, self.radius, self.r0, self.theta0, self.sign)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcsBlock {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogBlock {
    #[serde(rename = "C")]
    pub c: f64,
    pub mu: f64,
}

/// A `soliton` run: exactly one of a closed-form family to sample, an
/// initial-value integration, or a catalog request.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    pub family: Option<FamilyBlock>,
    pub ics: Option<IcsBlock>,
    pub params: Option<ParamsBlock>,
    pub lambda: Option<f64>,
    pub catalog: Option<CatalogBlock>,
    pub r_span: Option<[f64; 2]>,
    pub samples: Option<usize>,
    pub theta0: Option<f64>,
    pub step: Option<StepBlock>,
}

pub enum SolitonMode {
    ClosedForm {
        family: CYFamily,
        r_span: [f64; 2],
        samples: usize,
    },
    Integrate {
        ics: IcsBlock,
        c: f64,
        mu: f64,
        lambda: f64,
        r_span: [f64; 2],
        theta0: f64,
        step: StepControl,
    },
    Catalog {
        c: f64,
        mu: f64,
    },
}

impl SolitonConfig {
    pub fn parse(text: &str) -> Result<SolitonMode, CliError> {
        let v = parse_json(text)?;
        let cfg: SolitonConfig = from_value(v, "soliton config")?;
        let modes =
            cfg.family.is_some() as u8 + cfg.ics.is_some() as u8 + cfg.catalog.is_some() as u8;
        if modes != 1 {
            return Err(CliError::Config(
                "soliton config needs exactly one of \"family\", \"ics\", \"catalog\"".into(),
            ));
        }
        if let Some(fam) = cfg.family {
            let r_span = cfg
                .r_span
                .ok_or_else(|| CliError::Config("closed-form mode needs \"r_span\"".into()))?;
            let samples = cfg.samples.unwrap_or(401);
            if samples < 2 {
                return Err(CliError::Config("\"samples\" must be at least 2".into()));
            }
            return Ok(SolitonMode::ClosedForm {
                family: fam.build()?,
                r_span,
                samples,
            });
        }
        if let Some(cat) = cfg.catalog {
            return Ok(SolitonMode::Catalog {
                c: cat.c,
                mu: cat.mu,
            });
        }
        let ics = cfg.ics.expect("mode checked");
        let params = cfg
            .params
            .ok_or_else(|| CliError::Config("integration mode needs \"params\"".into()))?;
        if params.k != 2.0 {
            return Err(CliError::Config(
                "soliton integration is specialized to k = 2".into(),
            ));
        }
        let lambda = cfg.lambda.unwrap_or(0.0);
        if lambda == 0.0 && ics.beta != 0.0 {
            return Err(CliError::Config("lambda = 0 forces beta = 0".into()));
        }
        Ok(SolitonMode::Integrate {
            ics,
            c: params.c,
            mu: params.mu.unwrap_or(0.0),
            lambda,
            r_span: cfg
                .r_span
                .ok_or_else(|| CliError::Config("integration mode needs \"r_span\"".into()))?,
            theta0: cfg.theta0.unwrap_or(0.0),
            step: cfg.step.unwrap_or_default().build()?,
        })
    }
}

/// A `sweep` document: named soliton configurations executed independently.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub runs: Vec<Value>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Vec<(String, SolitonMode)>, CliError> {
        let v = parse_json(text)?;
        let cfg: SweepConfig = from_value(v, "sweep config")?;
        if cfg.runs.is_empty() {
            return Err(CliError::Config("sweep needs at least one run".into()));
        }
        cfg.runs
            .into_iter()
            .enumerate()
            .map(|(i, run)| {
                let text = serde_json::to_string(&run).expect("value reserializes");
                let mode = SolitonConfig::parse(&text)
                    .map_err(|e| CliError::Config(format!("runs[{i}]: {e}")))?;
                Ok((format!("run_{i:03}"), mode))
            })
            .collect()
    }
}
