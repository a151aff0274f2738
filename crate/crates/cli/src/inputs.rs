use std::fs;
use std::path::Path;

use bellmd_core::io::{distribution_from_json, functional_from_json};
use bellmd_core::{
    catalog_chained, catalog_chsh, catalog_tilted_chsh, BellFunctional, Error, MerminInfo, Scalar, ScenarioShape,
    SettingDistribution,
};
use serde_json::Value;

use crate::args::{InequalityArgs, InequalityKind};

/// Why a command stopped. Maps onto the exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files.
    Usage(String),
    /// The computation has no solution; `report` carries the certificate.
    Infeasible { message: String, report: Value },
    /// Anything else that went wrong while computing.
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Infeasible { .. } | Failure::Compute(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap { .. } | Error::Unbounded | Error::ZeroCount(_) => Failure::Compute(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: invalid JSON: {e}", path.display())))
}

pub fn parse_scalar<T: Scalar>(s: &str, what: &str) -> CliResult<T> {
    T::parse(s).map_err(|_| usage(format!("{what}: not a number: {s:?}")))
}

/// Comma-separated list, or the path of a JSON file with a distribution.
pub fn parse_distribution<T: Scalar>(spec: &str, shape: &ScenarioShape) -> CliResult<SettingDistribution<T>> {
    let path = Path::new(spec);
    if path.is_file() {
        let v = read_json(path)?;
        let d = distribution_from_json(&v, Some(shape))?;
        if d.shape() != shape {
            return Err(usage(format!("{spec}: distribution shape does not match the inequality")));
        }
        return Ok(d);
    }
    let probs = spec
        .split(',')
        .map(|x| parse_scalar(x.trim(), "p_obs"))
        .collect::<CliResult<Vec<T>>>()?;
    if probs.len() != shape.num_settings() {
        return Err(usage(format!(
            "p_obs has {} entries, the scenario has {} setting tuples",
            probs.len(),
            shape.num_settings()
        )));
    }
    Ok(SettingDistribution::new(shape.clone(), probs)?)
}

pub fn parse_tuple(spec: &str, what: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("{what}: bad index {x:?} in {spec:?}"))))
        .collect()
}

/// `start:stop:step`, inclusive of `stop` (up to the double tolerance).
pub fn parse_grid<T: Scalar>(spec: &str) -> CliResult<Vec<T>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(usage(format!("grid must be start:stop:step, got {spec:?}")));
    };
    let (start, stop, step): (T, T, T) =
        (parse_scalar(start, "grid")?, parse_scalar(stop, "grid")?, parse_scalar(step, "grid")?);
    if !step.is_positive_tol() {
        return Err(usage("grid step must be positive"));
    }
    if start > stop {
        return Err(usage("grid start exceeds stop"));
    }
    let count = ((stop.clone() - start.clone()) / step.clone()).to_f64().floor() as usize + 1;
    if count > 100_000 {
        return Err(usage(format!("grid has {count} points; the limit is 100000")));
    }
    let mut points: Vec<T> = (0..count)
        .map(|k| start.clone() + step.clone() * T::from_usize(k))
        .filter(|p| !(p.clone() - stop.clone()).is_positive_tol())
        .collect();
    // the floor above can drop an endpoint that rounding put just short
    let next = start + step * T::from_usize(count);
    if !(next.clone() - stop).is_positive_tol() {
        points.push(next);
    }
    Ok(points)
}

pub enum Inequality<T> {
    Functional(BellFunctional<T>),
    /// Only the settings counts are tabulated.
    Mermin(MerminInfo),
}

impl<T: Scalar> Inequality<T> {
    pub fn name(&self) -> String {
        match self {
            Inequality::Functional(f) => f.name().to_string(),
            Inequality::Mermin(m) => format!("mermin_{}", m.parties),
        }
    }

    pub fn functional(self, command: &str) -> CliResult<BellFunctional<T>> {
        match self {
            Inequality::Functional(f) => Ok(f),
            Inequality::Mermin(_) => Err(usage(format!(
                "{command} needs coefficients; the Mermin entry only records settings counts"
            ))),
        }
    }
}

pub fn resolve_inequality<T: Scalar>(args: &InequalityArgs, fallback: InequalityKind) -> CliResult<Inequality<T>> {
    let kind = args.inequality.unwrap_or(fallback);
    Ok(match kind {
        InequalityKind::Chsh => Inequality::Functional(catalog_chsh()),
        InequalityKind::Tilted => {
            let alpha = match &args.alpha {
                Some(a) => parse_scalar(a, "--alpha")?,
                None => T::one(),
            };
            Inequality::Functional(catalog_tilted_chsh(alpha)?)
        }
        InequalityKind::Chained => {
            let m = args.m.ok_or_else(|| usage("--inequality chained needs --m"))?;
            Inequality::Functional(catalog_chained(m)?)
        }
        InequalityKind::Mermin => {
            let k = args.parties.ok_or_else(|| usage("--inequality mermin needs --parties"))?;
            Inequality::Mermin(MerminInfo::new(k)?)
        }
        InequalityKind::File => {
            let path = args.functional.as_ref().ok_or_else(|| usage("--inequality file needs --functional"))?;
            Inequality::Functional(functional_from_json(&read_json(path)?)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellmd_core::Rational;

    #[test]
    fn grids_include_both_ends() {
        let g: Vec<Rational> = parse_grid("1/4:1/3:1/48").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], Rational::from_ratio(1, 3));
        let d: Vec<f64> = parse_grid("0.25:0.3:0.01").unwrap();
        assert_eq!(d.len(), 6);
        assert!(parse_grid::<f64>("0.3:0.2:0.01").is_err());
        assert!(parse_grid::<f64>("0.2:0.3:0").is_err());
        assert!(parse_grid::<f64>("0.2:0.3").is_err());
    }

    #[test]
    fn list_distributions() {
        let d: SettingDistribution<Rational> = parse_distribution("0.29,0.13,0.29,0.29", &ScenarioShape::chsh()).unwrap();
        assert_eq!(d.probs()[1], Rational::from_ratio(13, 100));
        assert!(parse_distribution::<f64>("0.5,0.5", &ScenarioShape::chsh()).is_err());
    }
}
