//! Registered example models.
//!
//! The MAPK stage is the planar system on the triangle
//! `{x >= 0, y >= 0, x + y <= 1}` driven by Hill-type rates
//! `hill(r, a, b) = a r / (1 + b r)`:
//!
//! ```text
//! dx1/dt = -u hill(x1, a1, b1) + hill(1 - x1 - x2, a2, b2)
//! dx2/dt =  u hill(1 - x1 - x2, a3, b3) - hill(x2, a4, b4)
//! ```
//!
//! ordered by `eps = (1, 0)` on states and the standard orders on the scalar
//! input and output `y = x2`.

use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::interconnect::cascade;
use crate::model::SystemModel;

pub const BUILTIN_NAMES: [&str; 5] = [
    "mapk_stage",
    "mapk_figure4",
    "mapk_cascade3",
    "linear_toy_pos",
    "decr_toy",
];

fn apply_overrides(
    mut defaults: BTreeMap<String, f64>,
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    for (k, v) in overrides {
        if !defaults.contains_key(k) {
            return Err(Error::InvalidModel(format!("invalid override `{k}`")));
        }
        defaults.insert(k.clone(), *v);
    }
    Ok(defaults)
}

fn mapk_params() -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    p.insert("a1".into(), 1.0);
    p.insert("b1".into(), 1.0);
    p.insert("a2".into(), 1.0);
    p.insert("b2".into(), 0.5);
    p.insert("a3".into(), 1.0);
    p.insert("b3".into(), 1.0);
    p.insert("a4".into(), 1.0);
    p.insert("b4".into(), 0.5);
    p
}

fn mapk_model(params: BTreeMap<String, f64>, input_lo: f64, input_hi: f64) -> Result<SystemModel> {
    let file = json!({
        "n": 2, "m": 1, "p": 1,
        "params": params,
        "f": [
            "-u1 * hill(x1, a1, b1) + hill(1 - x1 - x2, a2, b2)",
            "u1 * hill(1 - x1 - x2, a3, b3) - hill(x2, a4, b4)"
        ],
        "h": ["x2"],
        "state_domain": {
            "G": [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]],
            "g": [0.0, 0.0, 1.0]
        },
        "input_domain": {"lo": [input_lo], "hi": [input_hi]},
        "orders": {"state": [1, 0], "input": [0], "output": [0]}
    });
    SystemModel::parse(&file.to_string())
}

/// Look up a registered model by name, with parameter overrides.
pub fn builtin(name: &str, overrides: &BTreeMap<String, f64>) -> Result<SystemModel> {
    match name {
        "mapk_stage" => mapk_model(apply_overrides(mapk_params(), overrides)?, 0.1, 2.0),
        // The phase-portrait example: the stage with its input frozen at 1.
        "mapk_figure4" => mapk_model(apply_overrides(mapk_params(), overrides)?, 1.0, 1.0),
        "mapk_cascade3" => {
            let stage = builtin("mapk_stage", overrides)?;
            Ok(cascade(vec![stage.clone(), stage.clone(), stage])?.composite)
        }
        "linear_toy_pos" => {
            let mut defaults = BTreeMap::new();
            defaults.insert("k".into(), 2.0);
            let params = apply_overrides(defaults, overrides)?;
            let file = json!({
                "n": 1, "m": 1, "p": 1,
                "params": params,
                "f": ["-k * x1 + u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [2.0, 2.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [0], "input": [0], "output": [0]}
            });
            SystemModel::parse(&file.to_string())
        }
        "decr_toy" => {
            let mut defaults = BTreeMap::new();
            defaults.insert("c".into(), 1.0);
            let params = apply_overrides(defaults, overrides)?;
            let file = json!({
                "n": 1, "m": 1, "p": 1,
                "params": params,
                "f": ["-x1 + c / (1 + u1)"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.5, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            });
            SystemModel::parse(&file.to_string())
        }
        other => Err(Error::UnknownBuiltin(other.into())),
    }
}

/// Full cascade wrapper for `mapk_cascade3` (stages plus composite).
pub fn mapk_cascade3(
    overrides: &BTreeMap<String, f64>,
) -> Result<crate::interconnect::CascadeModel> {
    let stage = builtin("mapk_stage", overrides)?;
    cascade(vec![stage.clone(), stage.clone(), stage])
}
