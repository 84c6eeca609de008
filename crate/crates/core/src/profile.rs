//! JSON schema for describing a warped profile: grid, background constant,
//! and the three profile functions given either as raw samples or as named
//! expression presets (`constant`, `linear`, `sin`, `cos`, `exp`).
//!
//! Parsing is strict: unknown keys anywhere in the document are rejected.

use crate::geometry::{SU3Background, WarpedProfile};
use crate::numerics::{Field, Grid, Topology};
use serde::Deserialize;
use serde_json::{Map, Value};
use std::fmt;

#[derive(Debug)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "profile schema: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn err(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub topology: Topology,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, SchemaError> {
        if self.n < Grid::MIN_SAMPLES {
            return Err(err(format!(
                "grid.n must be at least {}",
                Grid::MIN_SAMPLES
            )));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_max > self.r_min) {
            return Err(err("grid endpoints must be finite with r_max > r_min"));
        }
        Ok(Grid::new(self.n, self.r_min, self.r_max, self.topology))
    }
}

/// A profile function: explicit samples or a named preset of `r`.
#[derive(Debug, Clone)]
pub enum FieldSpec {
    Samples(Vec<f64>),
    /// `value`
    Constant {
        value: f64,
    },
    /// `slope * r + intercept`
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// `offset + amplitude * sin(frequency * r + phase)`
    Sin {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `offset + amplitude * cos(frequency * r + phase)`
    Cos {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `scale * exp(rate * r)`
    Exp {
        scale: f64,
        rate: f64,
    },
}

impl FieldSpec {
    pub fn build(&self, grid: Grid) -> Result<Field, SchemaError> {
        let field = match self {
            FieldSpec::Samples(values) => {
                if values.len() != grid.len() {
                    return Err(err(format!(
                        "samples length {} does not match grid.n = {}",
                        values.len(),
                        grid.len()
                    )));
                }
                if !values.iter().all(|v| v.is_finite()) {
                    return Err(err("samples must be finite"));
                }
                Field::new(grid, values.clone())
            }
            FieldSpec::Constant { value } => Field::constant(grid, *value),
            FieldSpec::Linear { slope, intercept } => {
                Field::from_fn(grid, |r| slope * r + intercept)
            }
            FieldSpec::Sin {
                amplitude,
                frequency,
                phase,
                offset,
            } => Field::from_fn(grid, |r| offset + amplitude * (frequency * r + phase).sin()),
            FieldSpec::Cos {
                amplitude,
                frequency,
                phase,
                offset,
            } => Field::from_fn(grid, |r| offset + amplitude * (frequency * r + phase).cos()),
            FieldSpec::Exp { scale, rate } => Field::from_fn(grid, |r| scale * (rate * r).exp()),
        };
        Ok(field)
    }

    fn from_value(v: &Value, name: &str) -> Result<Self, SchemaError> {
        let obj = v
            .as_object()
            .ok_or_else(|| err(format!("\"{name}\" must be an object")))?;
        let mut keys: Map<String, Value> = obj.clone();
        if let Some(samples) = keys.remove("samples") {
            reject_leftovers(&keys, name)?;
            let arr = samples
                .as_array()
                .ok_or_else(|| err(format!("\"{name}.samples\" must be an array")))?;
            let values = arr
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| err(format!("\"{name}.samples\" must be numeric")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            return Ok(FieldSpec::Samples(values));
        }
        let expr = keys
            .remove("expr")
            .ok_or_else(|| err(format!("\"{name}\" needs either \"samples\" or \"expr\"")))?;
        let expr = expr
            .as_str()
            .ok_or_else(|| err(format!("\"{name}.expr\" must be a string")))?
            .to_string();
        let mut num = |key: &str, default: Option<f64>| -> Result<f64, SchemaError> {
            match keys.remove(key) {
                Some(v) => v
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("\"{name}.{key}\" must be a finite number"))),
                None => default
                    .ok_or_else(|| err(format!("\"{name}\" preset \"{expr}\" needs \"{key}\""))),
            }
        };
        let spec = match expr.as_str() {
            "constant" => FieldSpec::Constant {
                value: num("value", None)?,
            },
            "linear" => FieldSpec::Linear {
                slope: num("slope", None)?,
                intercept: num("intercept", Some(0.0))?,
            },
            "sin" => FieldSpec::Sin {
                amplitude: num("amplitude", Some(1.0))?,
                frequency: num("frequency", Some(1.0))?,
                phase: num("phase", Some(0.0))?,
                offset: num("offset", Some(0.0))?,
            },
            "cos" => FieldSpec::Cos {
                amplitude: num("amplitude", Some(1.0))?,
                frequency: num("frequency", Some(1.0))?,
                phase: num("phase", Some(0.0))?,
                offset: num("offset", Some(0.0))?,
            },
            "exp" => FieldSpec::Exp {
                scale: num("scale", Some(1.0))?,
                rate: num("rate", None)?,
            },
            other => {
                return Err(err(format!(
                    "\"{name}.expr\" = \"{other}\" is not one of constant, linear, sin, cos, exp"
                )))
            }
        };
        reject_leftovers(&keys, name)?;
        Ok(spec)
    }
}

fn reject_leftovers(keys: &Map<String, Value>, ctx: &str) -> Result<(), SchemaError> {
    if let Some(k) = keys.keys().next() {
        return Err(err(format!("unknown key \"{k}\" in \"{ctx}\"")));
    }
    Ok(())
}

/// Parsed profile document.
#[derive(Debug, Clone)]
pub struct ProfileSpec {
    pub lambda: f64,
    pub grid: GridSpec,
    pub g: FieldSpec,
    pub h: FieldSpec,
    pub theta: FieldSpec,
}

impl ProfileSpec {
    /// Strictly parse a profile object; unknown keys are rejected.
    pub fn from_value(v: &Value) -> Result<Self, SchemaError> {
        let obj = v
            .as_object()
            .ok_or_else(|| err("profile must be an object"))?;
        let mut keys = obj.clone();
        let lambda = keys
            .remove("lambda")
            .ok_or_else(|| err("missing \"lambda\""))?
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err("\"lambda\" must be a finite number"))?;
        let grid_v = keys.remove("grid").ok_or_else(|| err("missing \"grid\""))?;
        let grid: GridSpec =
            serde_json::from_value(grid_v).map_err(|e| err(format!("\"grid\": {e}")))?;
        let g = FieldSpec::from_value(&keys.remove("G").ok_or_else(|| err("missing \"G\""))?, "G")?;
        let h = FieldSpec::from_value(&keys.remove("h").ok_or_else(|| err("missing \"h\""))?, "h")?;
        let theta = FieldSpec::from_value(
            &keys
                .remove("theta")
                .ok_or_else(|| err("missing \"theta\""))?,
            "theta",
        )?;
        reject_leftovers(&keys, "profile")?;
        Ok(ProfileSpec {
            lambda,
            grid,
            g,
            h,
            theta,
        })
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            err(format!(
                "invalid JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        Self::from_value(&v)
    }

    pub fn build(&self) -> Result<WarpedProfile, SchemaError> {
        let grid = self.grid.build()?;
        let g = self.g.build(grid)?;
        let h = self.h.build(grid)?;
        let theta = self.theta.build(grid)?;
        if !g.values().iter().all(|&v| v > 0.0) {
            return Err(err("G must be positive everywhere"));
        }
        let sign = h.value(0).signum();
        if !h.values().iter().all(|&v| v != 0.0 && v.signum() == sign) {
            return Err(err("h must be nowhere zero with a single sign"));
        }
        Ok(WarpedProfile::new(
            g,
            h,
            theta,
            SU3Background::new(self.lambda),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ProfileSpec, SchemaError> {
        ProfileSpec::parse(text)
    }

    const BASE: &str = r#"{
        "lambda": 1.0,
        "grid": {"n": 64, "r_min": 0.0, "r_max": 1.0, "topology": "interval"},
        "G": {"expr": "constant", "value": 1.0},
        "h": {"expr": "constant", "value": 2.0},
        "theta": {"expr": "linear", "slope": 1.0, "intercept": 0.0}
    }"#;

    #[test]
    fn parses_and_builds() {
        let spec = parse(BASE).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.grid.len(), 64);
        assert_eq!(p.h.value(0), 2.0);
        assert!((p.theta.value(63) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = BASE.replace("\"lambda\": 1.0,", "\"lambda\": 1.0, \"extra\": 3,");
        let e = parse(&bad).unwrap_err();
        assert!(e.0.contains("unknown key"), "{e}");
    }

    #[test]
    fn rejects_unknown_preset_params() {
        let bad = BASE.replace(
            "{\"expr\": \"constant\", \"value\": 1.0}",
            "{\"expr\": \"constant\", \"value\": 1.0, \"wat\": 2}",
        );
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn rejects_malformed_json_with_position() {
        let e = parse("{\"lambda\": ,}").unwrap_err();
        assert!(e.0.contains("line 1"), "{e}");
        assert!(e.0.contains("column"), "{e}");
    }

    #[test]
    fn sample_field_length_must_match() {
        let bad = BASE.replace(
            "{\"expr\": \"constant\", \"value\": 2.0}",
            "{\"samples\": [1.0, 2.0, 3.0]}",
        );
        let e = parse(&bad).unwrap().build().unwrap_err();
        assert!(e.0.contains("does not match"), "{e}");
    }

    #[test]
    fn rejects_non_positive_warp() {
        let bad = BASE.replace(
            "\"G\": {\"expr\": \"constant\", \"value\": 1.0}",
            "\"G\": {\"expr\": \"constant\", \"value\": -1.0}",
        );
        assert!(parse(&bad).unwrap().build().is_err());
    }

    #[test]
    fn trig_and_exp_presets() {
        let text = r#"{
            "lambda": 0.0,
            "grid": {"n": 32, "r_min": 0.0, "r_max": 6.283185307179586, "topology": "circle"},
            "G": {"expr": "exp", "rate": 0.0, "scale": 1.5},
            "h": {"expr": "cos", "amplitude": 0.5, "offset": 2.0},
            "theta": {"expr": "sin", "amplitude": 0.2, "frequency": 2.0}
        }"#;
        let p = parse(text).unwrap().build().unwrap();
        assert_eq!(p.g.value(0), 1.5);
        assert_eq!(p.h.value(0), 2.5);
    }
}
