//! JSON encodings of behaviors, functionals, strategies and models.
//!
//! Probability tables nest as `[z_1]...[z_K][o_1]...[o_K]`. Scalars are
//! written as numbers in double mode and as `"n/d"` strings in exact mode;
//! on input both forms (and decimal strings) are accepted.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fine::JointOutcomeModel;
use crate::scalar::Scalar;
use crate::scenario::{Behavior, BellFunctional, DeterministicStrategy, Limits, ScenarioShape};
use crate::simulator::ExperimentSummary;
use crate::sources::{LocalResponseModel, SettingDistribution, SourceStrategy};

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("`{what}` must be an array")))
}

pub fn shape_from_json(v: &Value) -> Result<ScenarioShape> {
    Ok(serde_json::from_value(v.clone())?)
}

fn table_dims(shape: &ScenarioShape) -> Vec<usize> {
    shape.settings().iter().chain(shape.outcomes()).copied().collect()
}

/// Nests a flat row-major vector along `dims`.
pub fn nest<T: Scalar>(flat: &[T], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => flat[0].to_json(),
        Some((&d, rest)) => {
            let stride = flat.len() / d;
            Value::Array((0..d).map(|i| nest(&flat[i * stride..(i + 1) * stride], rest)).collect())
        }
    }
}

/// Inverse of [`nest`]; a flat array of the right length is also accepted.
pub fn unnest<T: Scalar>(v: &Value, dims: &[usize]) -> Result<Vec<T>> {
    let total: usize = dims.iter().product();
    if let Some(items) = v.as_array() {
        if items.len() == total && items.iter().all(|x| !x.is_array()) && dims.len() > 1 {
            return items.iter().map(T::from_json).collect();
        }
    }
    let mut out = Vec::with_capacity(total);
    unnest_into(v, dims, &mut out)?;
    Ok(out)
}

fn unnest_into<T: Scalar>(v: &Value, dims: &[usize], out: &mut Vec<T>) -> Result<()> {
    match dims.split_first() {
        None => {
            out.push(T::from_json(v)?);
            Ok(())
        }
        Some((&d, rest)) => {
            let items = array(v, "table")?;
            if items.len() != d {
                return Err(Error::ShapeMismatch(format!("table level has {} entries, expected {d}", items.len())));
            }
            items.iter().try_for_each(|x| unnest_into(x, rest, out))
        }
    }
}

fn scalars<T: Scalar>(v: &Value, what: &str) -> Result<Vec<T>> {
    array(v, what)?.iter().map(T::from_json).collect()
}

fn scalars_json<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

pub fn behavior_to_json<T: Scalar>(b: &Behavior<T>) -> Value {
    json!({ "shape": b.shape(), "table": nest(b.table(), &table_dims(b.shape())) })
}

pub fn behavior_from_json<T: Scalar>(v: &Value) -> Result<Behavior<T>> {
    let shape = shape_from_json(field(v, "shape")?)?;
    let table = unnest(field(v, "table")?, &table_dims(&shape))?;
    Behavior::new(shape, table)
}

pub fn functional_to_json<T: Scalar>(f: &BellFunctional<T>) -> Value {
    let mut obj = json!({
        "name": f.name(),
        "shape": f.shape(),
        "coefficients": nest(f.coefficients(), &table_dims(f.shape())),
        "limits": f.limits(),
    });
    if let (Some(hidden), Some(good)) = (f.hidden_set_size(), f.good_set_size()) {
        obj["hiding"] = json!({ "hidden": hidden, "good": good, "symmetric": f.symmetric_hiding() });
    }
    obj
}

pub fn functional_from_json<T: Scalar>(v: &Value) -> Result<BellFunctional<T>> {
    let shape = shape_from_json(field(v, "shape")?)?;
    let coefficients = unnest(field(v, "coefficients")?, &table_dims(&shape))?;
    let limits: Limits = match v.get("limits") {
        Some(l) => serde_json::from_value(l.clone())?,
        None => Limits::default(),
    };
    let name = v.get("name").and_then(Value::as_str).unwrap_or("custom");
    let f = BellFunctional::new(name, shape, coefficients, limits)?;
    Ok(match v.get("hiding") {
        Some(h) => {
            let count = |k: &str| -> Result<usize> {
                field(h, k)?
                    .as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::Parse(format!("hiding.{k} must be a count")))
            };
            let symmetric = h.get("symmetric").and_then(Value::as_bool).unwrap_or(false);
            f.with_hiding(count("hidden")?, count("good")?, symmetric)
        }
        None => f,
    })
}

/// Either `{ "shape": ..., "probs": [...] }` or a bare array for `shape`.
pub fn distribution_from_json<T: Scalar>(v: &Value, shape: Option<&ScenarioShape>) -> Result<SettingDistribution<T>> {
    if v.is_array() {
        let shape = shape.cloned().unwrap_or_else(ScenarioShape::chsh);
        return SettingDistribution::new(shape, scalars(v, "p_obs")?);
    }
    let shape = shape_from_json(field(v, "shape")?)?;
    SettingDistribution::new(shape, scalars(field(v, "probs")?, "probs")?)
}

pub fn distribution_to_json<T: Scalar>(d: &SettingDistribution<T>) -> Value {
    json!({ "shape": d.shape(), "probs": scalars_json(d.probs()) })
}

pub fn strategy_to_json<T: Scalar>(s: &SourceStrategy<T>) -> Value {
    let mut conditionals = Map::new();
    for (label, c) in s.lambdas().iter().zip(s.conditionals()) {
        conditionals.insert(label.clone(), scalars_json(c));
    }
    let mut obj = json!({
        "shape": s.shape(),
        "lambdas": s.lambdas(),
        "prior": scalars_json(s.prior()),
        "conditionals": conditionals,
    });
    if let Some(outputs) = s.outputs() {
        let mut map = Map::new();
        for (label, d) in s.lambdas().iter().zip(outputs) {
            map.insert(label.clone(), json!(d.assignment()));
        }
        obj["outputs"] = Value::Object(map);
    }
    obj
}

pub fn strategy_from_json<T: Scalar>(v: &Value) -> Result<SourceStrategy<T>> {
    let shape = shape_from_json(field(v, "shape")?)?;
    let lambdas: Vec<String> = serde_json::from_value(field(v, "lambdas")?.clone())?;
    let prior = scalars(field(v, "prior")?, "prior")?;
    let cond_obj = field(v, "conditionals")?;
    let conditionals = lambdas
        .iter()
        .map(|l| scalars(field(cond_obj, l)?, "conditionals"))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let outputs = match v.get("outputs") {
        None | Some(Value::Null) => None,
        Some(out) => Some(
            lambdas
                .iter()
                .map(|l| {
                    let assignment: Vec<Vec<usize>> = serde_json::from_value(field(out, l)?.clone())?;
                    DeterministicStrategy::new(shape.clone(), assignment)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    SourceStrategy::new(shape, lambdas, prior, conditionals, outputs)
}

/// Model file: `{ "shape", "p_obs": [...], "posterior": [[p(λ|z)]...],
/// "responses": [λ][party][setting][outcome] }`. Without `responses`
/// only M′ can be computed.
pub struct ModelFile<T> {
    pub p_obs: SettingDistribution<T>,
    pub posterior: Vec<Vec<T>>,
    pub model: Option<LocalResponseModel<T>>,
}

pub fn model_from_json<T: Scalar>(v: &Value) -> Result<ModelFile<T>> {
    let shape = shape_from_json(field(v, "shape")?)?;
    let p_obs = SettingDistribution::new(shape.clone(), scalars(field(v, "p_obs")?, "p_obs")?)?;
    let posterior = array(field(v, "posterior")?, "posterior")?
        .iter()
        .map(|row| scalars(row, "posterior"))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let model = match v.get("responses") {
        None | Some(Value::Null) => None,
        Some(r) => {
            let responses = array(r, "responses")?
                .iter()
                .map(|per_party| {
                    array(per_party, "responses")?
                        .iter()
                        .map(|per_setting| {
                            array(per_setting, "responses")?
                                .iter()
                                .map(|d| scalars(d, "responses"))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Some(LocalResponseModel::new(shape, responses, posterior.clone())?)
        }
    };
    Ok(ModelFile { p_obs, posterior, model })
}

pub fn model_to_json<T: Scalar>(model: &LocalResponseModel<T>, p_obs: &SettingDistribution<T>) -> Value {
    json!({
        "shape": model.shape(),
        "p_obs": scalars_json(p_obs.probs()),
        "posterior": model.posterior().iter().map(|r| scalars_json(r)).collect::<Vec<_>>(),
        "responses": model.responses().iter().map(|per_party| {
            per_party.iter().map(|per_setting| {
                per_setting.iter().map(|d| scalars_json(d)).collect::<Vec<_>>()
            }).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    })
}

/// `[{ "weight", "assignment" }]`, one entry per deterministic strategy.
pub fn joint_model_to_json<T: Scalar>(m: &JointOutcomeModel<T>) -> Value {
    Value::Array(
        m.entries()
            .iter()
            .map(|(w, d)| json!({ "weight": w.to_json(), "assignment": d.assignment() }))
            .collect(),
    )
}

pub fn summary_to_json<T: Scalar>(s: &ExperimentSummary<T>) -> Value {
    let conditional: Vec<Value> = (0..s.shape.num_settings())
        .map(|z| match s.conditional_frequencies(z) {
            Some(freqs) => json!(freqs),
            None => Value::Null,
        })
        .collect();
    json!({
        "shape": s.shape,
        "rounds": s.rounds,
        "seed": s.seed,
        "rng": s.rng,
        "setting_counts": s.setting_counts,
        "outcome_counts": s.outcome_counts,
        "empirical_p_obs": s.empirical_p_obs.probs(),
        "p_obs_standard_errors": s.p_obs_standard_errors,
        "conditional_frequencies": conditional,
        "bell_value": s.bell_value.as_ref().map(Scalar::to_json),
        "bell_value_f64": s.bell_value_f64(),
        "bell_standard_error": s.bell_standard_error,
        "undefined_settings": s.undefined_settings.iter().map(|&z| s.shape.setting_tuple(z)).collect::<Vec<_>>(),
        "warnings": s.warnings,
    })
}
