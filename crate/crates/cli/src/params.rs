//! Parameter resolution: registry defaults, then the config file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qactive::{linear_grid, log_grid};

use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    /// `None` marks a required parameter.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn param(name: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Some(default),
        help,
    }
}

pub const fn required(name: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: None,
        help,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::usage(format!("unknown format `{other}` (csv or json)"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub scale: GridScale,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridSpec {
    pub const fn log(start: f64, end: f64, count: usize) -> Self {
        Self {
            scale: GridScale::Log,
            start,
            end,
            count,
        }
    }

    pub const fn linear(start: f64, end: f64, count: usize) -> Self {
        Self {
            scale: GridScale::Linear,
            start,
            end,
            count,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::usage("a time grid needs at least 2 points"));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(CliError::usage("time grid needs finite endpoints with end > start"));
        }
        if self.start < 0.0 {
            return Err(CliError::usage("time grid must start at t >= 0"));
        }
        if self.scale == GridScale::Log && self.start <= 0.0 {
            return Err(CliError::usage("a log grid needs start > 0"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match self.scale {
            GridScale::Linear => linear_grid(self.start, self.end, self.count),
            GridScale::Log => log_grid(self.start, self.end, self.count),
        }
    }

    pub fn describe(&self) -> String {
        let scale = match self.scale {
            GridScale::Linear => "linear",
            GridScale::Log => "log",
        };
        format!("{scale} {} {} {}", self.start, self.end, self.count)
    }
}

/// Everything `run` needs besides the experiment itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub params: ParamSet,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Resolved parameter strings, parsed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    values: BTreeMap<String, String>,
}

impl ParamSet {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            values: pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn raw(&self, name: &str) -> Result<&str, CliError> {
        self.values
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| CliError::usage(format!("missing parameter --{name}")))
    }

    pub fn f64(&self, name: &str) -> Result<f64, CliError> {
        let raw = self.raw(name)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| CliError::usage(format!("--{name}: `{raw}` is not a number")))
    }

    pub fn count(&self, name: &str) -> Result<usize, CliError> {
        let v = self.f64(name)?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(CliError::usage(format!("--{name}: expected a whole number")));
        }
        Ok(v as usize)
    }

    pub fn flag(&self, name: &str) -> Result<bool, CliError> {
        match self.raw(name)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(CliError::usage(format!("--{name}: `{other}` is not true/false"))),
        }
    }

    pub fn choice<'a>(&self, name: &str, options: &[&'a str]) -> Result<&'a str, CliError> {
        let raw = self.raw(name)?;
        options.iter().copied().find(|o| *o == raw).ok_or_else(|| {
            CliError::usage(format!("--{name}: `{raw}` is not one of {}", options.join(", ")))
        })
    }

    /// `key=value` pairs in name order.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// What the flags and config file say, before defaults are applied.
#[derive(Debug, Default)]
struct Overrides {
    params: BTreeMap<String, String>,
    grid: Option<GridSpec>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Overrides {
    /// `other` wins wherever it has a value.
    fn overlay(mut self, other: Overrides) -> Self {
        self.params.extend(other.params);
        self.grid = other.grid.or(self.grid);
        self.seed = other.seed.or(self.seed);
        self.format = other.format.or(self.format);
        self.out = other.out.or(self.out);
        self
    }
}

fn parse_grid(scale: GridScale, values: &[String]) -> Result<GridSpec, CliError> {
    let [start, end, count] = values else {
        return Err(CliError::usage("a time grid takes START END COUNT"));
    };
    let number = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::usage(format!("time grid: `{s}` is not a number")))
    };
    let count = count
        .parse::<usize>()
        .map_err(|_| CliError::usage(format!("time grid: `{count}` is not a point count")))?;
    Ok(GridSpec {
        scale,
        start: number(start)?,
        end: number(end)?,
        count,
    })
}

fn parse_seed(s: &str) -> Result<u64, CliError> {
    s.parse()
        .map_err(|_| CliError::usage(format!("--seed: `{s}` is not a non-negative integer")))
}

/// Splits the arguments after the experiment name into reserved options, the
/// config path and model parameters.
fn parse_flags(args: &[String]) -> Result<(Overrides, Option<PathBuf>), CliError> {
    let mut over = Overrides::default();
    let mut config = None;
    let mut k = 0;
    while k < args.len() {
        let arg = &args[k];
        let Some(body) = arg.strip_prefix("--") else {
            return Err(CliError::usage(format!("unexpected argument `{arg}`")));
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (body, None),
        };
        if name.is_empty() {
            return Err(CliError::usage("empty flag name"));
        }
        if name == "t-log" || name == "t-lin" {
            if inline.is_some() || args.len() < k + 4 {
                return Err(CliError::usage(format!("--{name} takes START END COUNT")));
            }
            let scale = if name == "t-log" {
                GridScale::Log
            } else {
                GridScale::Linear
            };
            if over.grid.is_some() {
                return Err(CliError::usage("only one of --t-log / --t-lin may be given"));
            }
            over.grid = Some(parse_grid(scale, &args[k + 1..k + 4])?);
            k += 4;
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => {
                let v = args
                    .get(k + 1)
                    .ok_or_else(|| CliError::usage(format!("--{name} needs a value")))?;
                k += 1;
                v.clone()
            }
        };
        k += 1;
        match name {
            "config" => config = Some(PathBuf::from(value)),
            "out" => over.out = Some(PathBuf::from(value)),
            "format" => over.format = Some(Format::parse(&value)?),
            "seed" => over.seed = Some(parse_seed(&value)?),
            _ => {
                if over.params.insert(name.to_string(), value).is_some() {
                    return Err(CliError::usage(format!("--{name} given twice")));
                }
            }
        }
    }
    Ok((over, config))
}

fn toml_scalar(key: &str, v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(CliError::usage(format!("config key `{key}` must be a scalar"))),
    }
}

fn read_config(path: &Path, experiment: &str, block: &str) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let mut over = Overrides::default();
    let mut grid: BTreeMap<String, String> = BTreeMap::new();
    for (key, value) in &table {
        match (key.as_str(), value) {
            ("experiment", v) => {
                let named = toml_scalar(key, v)?;
                if named != experiment {
                    return Err(CliError::usage(format!(
                        "config is for `{named}`, not `{experiment}`"
                    )));
                }
            }
            ("seed", toml::Value::Integer(i)) if *i >= 0 => over.seed = Some(*i as u64),
            ("seed", _) => return Err(CliError::usage("config seed must be a non-negative integer")),
            ("format", v) => over.format = Some(Format::parse(&toml_scalar(key, v)?)?),
            ("out", v) => over.out = Some(PathBuf::from(toml_scalar(key, v)?)),
            ("grid", toml::Value::Table(t)) => {
                for (k, v) in t {
                    grid.insert(k.clone(), toml_scalar(k, v)?);
                }
            }
            (name, toml::Value::Table(t)) if name == block => {
                for (k, v) in t {
                    over.params.insert(k.clone(), toml_scalar(k, v)?);
                }
            }
            (name, toml::Value::Table(_)) => {
                return Err(CliError::usage(format!(
                    "config block [{name}] does not belong to `{experiment}` (expected [{block}])"
                )))
            }
            (name, _) => return Err(CliError::usage(format!("unknown config key `{name}`"))),
        }
    }
    if !grid.is_empty() {
        let scale = match grid.get("scale").map(String::as_str) {
            Some("log") => GridScale::Log,
            Some("linear") => GridScale::Linear,
            _ => return Err(CliError::usage("[grid] scale must be `log` or `linear`")),
        };
        let field = |k: &str| {
            grid.get(k)
                .cloned()
                .ok_or_else(|| CliError::usage(format!("[grid] is missing `{k}`")))
        };
        over.grid = Some(parse_grid(scale, &[field("start")?, field("end")?, field("count")?])?);
        if let Some(extra) = grid
            .keys()
            .find(|k| !["scale", "start", "end", "count"].contains(&k.as_str()))
        {
            return Err(CliError::usage(format!("unknown [grid] key `{extra}`")));
        }
    }
    Ok(over)
}

/// Merges defaults, config and flags for one experiment.
pub fn resolve(
    experiment: &str,
    block: &str,
    specs: &[ParamSpec],
    default_grid: Option<GridSpec>,
    args: &[String],
) -> Result<Invocation, CliError> {
    let (flags, config) = parse_flags(args)?;
    let over = match config {
        Some(path) => read_config(&path, experiment, block)?.overlay(flags),
        None => flags,
    };
    let mut values = BTreeMap::new();
    for spec in specs {
        match over.params.get(spec.name).map(String::as_str).or(spec.default) {
            Some(v) => {
                values.insert(spec.name.to_string(), v.to_string());
            }
            None => {
                return Err(CliError::usage(format!(
                    "{experiment} needs --{} ({})",
                    spec.name, spec.help
                )))
            }
        }
    }
    if let Some(unknown) = over.params.keys().find(|k| !values.contains_key(*k)) {
        return Err(CliError::usage(format!("{experiment} has no parameter --{unknown}")));
    }
    let grid = match (default_grid, over.grid) {
        (None, Some(_)) => {
            return Err(CliError::usage(format!("{experiment} does not take a time grid")))
        }
        (None, None) => None,
        (Some(d), g) => {
            let g = g.unwrap_or(d);
            g.validate()?;
            Some(g)
        }
    };
    Ok(Invocation {
        params: ParamSet { values },
        grid,
        seed: over.seed.unwrap_or(0),
        format: over.format.unwrap_or(Format::Csv),
        out: over.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ParamSpec] = &[param("J", "4", "coherent hopping"), required("kind", "qj or qsd")];

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn go(list: &[&str]) -> Result<Invocation, CliError> {
        resolve("demo", "lattice", SPECS, Some(GridSpec::log(1e-3, 1.0, 5)), &args(list))
    }

    #[test]
    fn defaults_and_flags() {
        let inv = go(&["--kind", "qj", "--seed", "9", "--t-lin", "0", "2", "3"]).unwrap();
        assert_eq!(inv.params.f64("J").unwrap(), 4.0);
        assert_eq!(inv.params.raw("kind").unwrap(), "qj");
        assert_eq!(inv.seed, 9);
        assert_eq!(inv.grid.unwrap().points(), vec![0.0, 1.0, 2.0]);
        let inv = go(&["--kind=qsd", "--J=1.5"]).unwrap();
        assert_eq!(inv.params.f64("J").unwrap(), 1.5);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            &["--J", "1"][..],
            &["--kind", "qj", "--nope", "1"],
            &["--kind", "qj", "--t-log", "0", "1", "5"],
            &["--kind", "qj", "--t-lin", "0", "1"],
            &["--kind", "qj", "--format", "xml"],
            &["--kind", "qj", "--seed", "-1"],
            &["--kind"],
            &["kind", "qj"],
        ] {
            assert!(matches!(go(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn config_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "seed = 3\nformat = \"json\"\n[grid]\nscale = \"linear\"\nstart = 0\nend = 1\ncount = 2\n[lattice]\nJ = 2.5\nkind = \"qj\"\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let inv = go(&["--config", p, "--J", "7"]).unwrap();
        assert_eq!(inv.params.f64("J").unwrap(), 7.0);
        assert_eq!((inv.seed, inv.format), (3, Format::Json));
        assert_eq!(inv.grid.unwrap().points(), vec![0.0, 1.0]);

        std::fs::write(&path, "[qaoup]\ngamma = 1\n").unwrap();
        assert!(matches!(go(&["--config", p, "--kind", "qj"]), Err(CliError::Usage(_))));
    }

    #[test]
    fn whole_numbers_accept_exponents() {
        let set = ParamSet::from_pairs([("n", "1e4"), ("m", "2.5")]);
        assert_eq!(set.count("n").unwrap(), 10_000);
        assert!(set.count("m").is_err());
    }
}
