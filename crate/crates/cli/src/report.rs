//! Report assembly and summary statistics.

use std::ffi::OsString;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use triprof::{EstimatedProfile, ExactProfile, PhaseStats};

use crate::CliError;

pub(crate) const ENTRY_NAMES: [&str; 4] = ["n0", "n1", "n2", "n3"];

/// Componentwise `exact / estimate`; `None` where the estimate is zero.
pub fn accuracy_ratio(exact: &ExactProfile, estimate: &EstimatedProfile) -> [Option<f64>; 4] {
    let e = exact.to_f64().to_array();
    let x = estimate.to_array();
    std::array::from_fn(|i| (x[i] != 0.0).then(|| e[i] / x[i]))
}

/// Mean and sample standard deviation (`n − 1` denominator). The deviation is
/// `None` for fewer than two values; both are `None` for none.
pub fn mean_and_stddev(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

#[derive(Serialize)]
pub(crate) struct Echo {
    pub subcommand: String,
    pub args: Vec<String>,
}

/// The command line minus the program name. With `no_timing` the thread flag is
/// dropped too, since it must not change a masked report.
pub(crate) fn echo(subcommand: &str, args: &[OsString], no_timing: bool) -> Echo {
    let mut out = Vec::new();
    let mut it = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if no_timing && a == "--threads" {
            it.next();
            continue;
        }
        if no_timing && a.starts_with("--threads=") {
            continue;
        }
        out.push(a);
    }
    Echo {
        subcommand: subcommand.to_owned(),
        args: out,
    }
}

#[derive(Clone, Serialize)]
pub(crate) struct GraphStats {
    pub path: String,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Serialize)]
struct PhaseOut<'a> {
    name: &'a str,
    seconds: Option<f64>,
    bytes_scattered: u64,
    bytes_gathered: u64,
    workers: Option<usize>,
}

pub(crate) struct Envelope<'a> {
    pub echo: &'a Echo,
    pub graph: Option<&'a GraphStats>,
    pub phases: &'a [PhaseStats],
    pub wall_clock: Duration,
    pub no_timing: bool,
    pub warnings: &'a [String],
}

/// Merges the command-specific `body` (a struct) with the common fields.
pub(crate) fn assemble(env: Envelope<'_>, body: &impl Serialize) -> Result<Value, CliError> {
    let encode = |e: serde_json::Error| CliError::Data(format!("cannot encode report: {e}"));
    let mut map = match serde_json::to_value(body).map_err(encode)? {
        Value::Object(map) => map,
        _ => return Err(CliError::Data("report body is not an object".into())),
    };
    let phases: Vec<PhaseOut> = env
        .phases
        .iter()
        .map(|p| PhaseOut {
            name: &p.name,
            seconds: (!env.no_timing).then_some(p.elapsed),
            bytes_scattered: p.bytes_scattered,
            bytes_gathered: p.bytes_gathered,
            workers: (!env.no_timing).then_some(p.worker_count),
        })
        .collect();
    map.insert(
        "command".into(),
        serde_json::to_value(env.echo).map_err(encode)?,
    );
    if let Some(g) = env.graph {
        map.insert("graph".into(), serde_json::to_value(g).map_err(encode)?);
    }
    map.insert(
        "phases".into(),
        serde_json::to_value(phases).map_err(encode)?,
    );
    map.insert(
        "wall_clock_seconds".into(),
        match env.no_timing {
            true => Value::Null,
            false => env.wall_clock.as_secs_f64().into(),
        },
    );
    map.insert(
        "warnings".into(),
        serde_json::to_value(env.warnings).map_err(encode)?,
    );
    Ok(Value::Object(map))
}
