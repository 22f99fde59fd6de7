//! Run configuration files.
//!
//! One `key = value` per line; `#` starts a comment. Grid axes use repeated
//! `axis` keys, either as a list or as an inclusive range:
//!
//! ```text
//! contest = bitstring
//! objective = emax
//! output = fig1_n100.csv
//! seed = 7
//! n = 100
//! axis = p: 0.5, 0.75, 1
//! axis = q: 0.5..1 step 0.1
//! ```
//!
//! Any numeric parameter may be given either as a fixed key or as an axis,
//! not both.

use std::collections::BTreeMap;
use std::fmt;

use crate::optimizer::GridSpec;

/// A configuration problem, located by line and field where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}, field `{}`: {}", self.field, self.message),
            None => write!(f, "config field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContestKind {
    Bitstring,
    Picksix,
    Tournament,
    Aep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Emax,
    Winprob,
    Profit,
    Verify,
}

/// A value with the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

/// A parsed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub contest: ContestKind,
    pub objective: ObjectiveKind,
    pub seed: u64,
    pub output: String,
    /// Every other `key = value` pair.
    pub params: BTreeMap<String, Entry>,
    pub grid: GridSpec,
    /// Line of each axis, in declaration order.
    pub axis_lines: Vec<usize>,
    /// The original text, echoed into the manifest.
    pub source: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut singles: BTreeMap<String, Entry> = BTreeMap::new();
        let mut grid = GridSpec::new();
        let mut axis_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(Some(line), body, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err(Some(line), "", "missing key before `=`"));
            }
            if key == "axis" {
                let (name, values) = parse_axis(value).map_err(|m| err(Some(line), "axis", m))?;
                if singles.contains_key(&name) {
                    return Err(err(Some(line), &name, "given both as a fixed value and as an axis"));
                }
                grid.push(name.clone(), values).map_err(|e| err(Some(line), &name, e.to_string()))?;
                axis_lines.push(line);
                continue;
            }
            if grid.names().contains(&key) {
                return Err(err(Some(line), key, "given both as a fixed value and as an axis"));
            }
            if singles.insert(key.to_string(), Entry { line, value: value.to_string() }).is_some() {
                return Err(err(Some(line), key, "repeated key"));
            }
        }
        let mut take = |key: &str| singles.remove(key);
        let contest = match take("contest") {
            None => return Err(err(None, "contest", "missing required field")),
            Some(e) => match e.value.as_str() {
                "bitstring" => ContestKind::Bitstring,
                "picksix" => ContestKind::Picksix,
                "tournament" => ContestKind::Tournament,
                "aep" => ContestKind::Aep,
                other => {
                    return Err(err(Some(e.line), "contest", format!("unknown contest `{other}` (bitstring, picksix, tournament, aep)")))
                }
            },
        };
        let objective = match take("objective") {
            None => return Err(err(None, "objective", "missing required field")),
            Some(e) => match e.value.as_str() {
                "emax" => ObjectiveKind::Emax,
                "winprob" => ObjectiveKind::Winprob,
                "profit" => ObjectiveKind::Profit,
                "verify" => ObjectiveKind::Verify,
                other => {
                    return Err(err(Some(e.line), "objective", format!("unknown objective `{other}` (emax, winprob, profit, verify)")))
                }
            },
        };
        let allowed = match contest {
            ContestKind::Bitstring => &[ObjectiveKind::Emax, ObjectiveKind::Winprob][..],
            ContestKind::Picksix => &[ObjectiveKind::Profit][..],
            ContestKind::Tournament => &[ObjectiveKind::Emax, ObjectiveKind::Winprob][..],
            ContestKind::Aep => &[ObjectiveKind::Verify][..],
        };
        if !allowed.contains(&objective) {
            return Err(err(None, "objective", format!("{objective:?} is not available for the {contest:?} contest").to_lowercase()));
        }
        let seed = match take("seed") {
            None => 0,
            Some(e) => e.value.parse().map_err(|_| err(Some(e.line), "seed", "expected a non-negative integer"))?,
        };
        let output = take("output").ok_or_else(|| err(None, "output", "missing required field"))?.value;
        if contest != ContestKind::Aep && grid.axes().is_empty() {
            return Err(err(None, "axis", "at least one axis is required"));
        }
        if contest == ContestKind::Aep && !grid.axes().is_empty() {
            return Err(err(Some(axis_lines[0]), "axis", "the aep contest takes no axes"));
        }
        Ok(RunConfig { contest, objective, seed, output, params: singles, grid, axis_lines, source: text.to_string() })
    }

    /// A fixed numeric parameter.
    pub fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.params.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| err(Some(e.line), key, format!("`{}` is not a number", e.value))),
        }
    }

    /// A fixed text parameter.
    pub fn text(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|e| e.value.as_str())
    }

    /// Whether `key` is supplied, fixed or as an axis.
    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key) || self.grid.names().contains(&key)
    }

    /// Rejects keys outside `known`, naming the first offender.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), ConfigError> {
        for (key, e) in &self.params {
            if !known.contains(&key.as_str()) {
                return Err(err(Some(e.line), key, format!("unknown field (expected one of: {})", known.join(", "))));
            }
        }
        for (name, &line) in self.grid.names().iter().zip(&self.axis_lines) {
            if !known.contains(name) {
                return Err(err(Some(line), name, format!("unknown axis (expected one of: {})", known.join(", "))));
            }
        }
        Ok(())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        if let Some(e) = self.params.get(key) {
            return Some(e.line);
        }
        self.grid.names().iter().position(|n| *n == key).map(|i| self.axis_lines[i])
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        err(self.line_of(key), key, message)
    }
}

/// Parses `name: v1, v2, ...` or `name: start..end step s`.
fn parse_axis(spec: &str) -> Result<(String, Vec<f64>), String> {
    let (name, values) = spec.split_once(':').ok_or("expected `name: values`")?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(format!("bad axis name `{name}`"));
    }
    let values = values.trim();
    let num = |s: &str| -> Result<f64, String> {
        s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{}` is not a number", s.trim()))
    };
    let list = if let Some((range, step)) = values.split_once("step") {
        let (start, end) = range.split_once("..").ok_or("a stepped axis needs `start..end step s`")?;
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if !(step > 0.0) || end < start {
            return Err("range needs start <= end and a positive step".into());
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err("range has more than a million values".into());
        }
        // Rounded to 12 significant decimals so 0.1 steps print cleanly.
        (0..count).map(|i| round_decimal(start + i as f64 * step)).collect()
    } else {
        values.split(',').map(num).collect::<Result<Vec<f64>, String>>()?
    };
    if list.is_empty() {
        return Err("axis has no values".into());
    }
    Ok((name.to_string(), list))
}

fn round_decimal(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let digits = 12 - x.abs().log10().ceil() as i32;
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "# demo\ncontest = bitstring\nobjective = emax\noutput = out.csv\nseed = 9\nn = 1\naxis = q: 0.5..1 step 0.1\naxis = p: 0.75\n";

    #[test]
    fn parses_basic_config() {
        let c = RunConfig::parse(BASIC).unwrap();
        assert_eq!(c.contest, ContestKind::Bitstring);
        assert_eq!(c.objective, ObjectiveKind::Emax);
        assert_eq!(c.seed, 9);
        assert_eq!(c.number("n").unwrap(), Some(1.0));
        assert_eq!(c.grid.names(), ["q", "p"]);
        assert_eq!(c.grid.axes()[0].values, vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert_eq!(c.line_of("q"), Some(7));
        assert!(c.has("p") && !c.has("r"));
    }

    #[test]
    fn missing_contest_names_the_field() {
        let e = RunConfig::parse("objective = emax\noutput = x\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.field, "contest");
        assert!(e.to_string().contains("contest"));
    }

    #[test]
    fn errors_carry_lines() {
        let e = RunConfig::parse("contest = bitstring\nobjective = emax\noutput = x\naxis = q 1\n").unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = RunConfig::parse("contest = bitstring\nobjective = emax\noutput = x\nn = 2\nn = 3\naxis = q: 1\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(5), "n"));
        let e = RunConfig::parse("contest = bitstring\nobjective = emax\noutput = x\nq = 1\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.line, Some(5));
        let e = RunConfig::parse("contest = darts\nobjective = emax\noutput = x\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = RunConfig::parse("contest = picksix\nobjective = emax\noutput = x\naxis = q: 1\n").unwrap_err();
        assert_eq!(e.field, "objective");
        let e = RunConfig::parse("contest = bitstring\nobjective = emax\noutput = x\n").unwrap_err();
        assert_eq!(e.field, "axis");
        let c = RunConfig::parse("contest = bitstring\nobjective = emax\noutput = x\nn = ten\naxis = q: 1\n").unwrap();
        assert_eq!(c.number("n").unwrap_err().line, Some(4));
        assert_eq!(c.check_keys(&["q"]).unwrap_err().field, "n");
    }

    #[test]
    fn axis_forms() {
        assert_eq!(parse_axis("x: 1, 2.5,3").unwrap().1, vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_axis("x: 0..1 step 0.25").unwrap().1, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_axis("p: 0.5..1 step 0.05").unwrap().1.len(), 11);
        assert_eq!(parse_axis("p: 0.5..1 step 0.05").unwrap().1[3], 0.65);
        assert!(parse_axis("x: 1..0 step 1").is_err());
        assert!(parse_axis("x: a, b").is_err());
        assert!(parse_axis("1, 2").is_err());
    }
}
