//! Reading scenario files and expanding parameter sweeps.

use std::fs;
use std::path::Path;

use diana_core::Scenario;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(path: &Path, text: &str, err: &toml::de::Error) -> CliError {
    let (line, column) = err.span().map_or((1, 1), |s| line_col(text, s.start));
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: err.message().trim().to_string(),
    }
}

/// The raw document, kept as a tree so sweeps can edit it before typing.
pub fn load_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let table: Table = toml::from_str(&text).map_err(|e| parse_error(path, &text, &e))?;
    // Type errors carry spans only when deserializing from text.
    toml::from_str::<Scenario>(&text).map_err(|e| parse_error(path, &text, &e))?;
    Ok(table)
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    toml::from_str(&text).map_err(|e| parse_error(path, &text, &e))
}

/// Lowercase hex SHA-256 of the scenario's canonical JSON form.
pub fn digest(scenario: &Scenario) -> String {
    let canonical = serde_json::to_vec(scenario).expect("scenario serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Digest over a list of digests, in order.
pub fn digest_strings(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Key(String),
    Index(usize),
}

/// One `--sweep path=v1,v2,...` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub path: String,
    steps: Vec<Step>,
    pub values: Vec<(String, Value)>,
}

fn parse_path(path: &str) -> Result<Vec<Step>, String> {
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => part.split_at(i),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(format!("empty key in sweep path `{path}`"));
        }
        steps.push(Step::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(|| format!("unclosed `[` in sweep path `{path}`"))?;
            let index = rest[1..close]
                .parse()
                .map_err(|_| format!("bad index `{}` in sweep path `{path}`", &rest[1..close]))?;
            steps.push(Step::Index(index));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(format!("unexpected `{rest}` in sweep path `{path}`"));
            }
        }
    }
    Ok(steps)
}

/// Splits on top-level commas, leaving commas inside brackets and quotes alone.
fn split_values(s: &str) -> Vec<&str> {
    let (mut depth, mut quote, mut start) = (0i32, None, 0);
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => quote = Some(c),
            (None, '[' | '{') => depth += 1,
            (None, ']' | '}') => depth -= 1,
            (None, ',') if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

/// TOML literal when it parses as one, bare string otherwise.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl std::str::FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (path, list) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep `{s}` must look like path=v1,v2"))?;
        let path = path.trim();
        let steps = parse_path(path)?;
        let values: Vec<(String, Value)> = split_values(list)
            .into_iter()
            .map(|raw| (raw.to_string(), parse_value(raw)))
            .collect();
        if values.iter().any(|(raw, _)| raw.is_empty()) {
            return Err(format!("sweep `{s}` has an empty value"));
        }
        Ok(Sweep {
            path: path.to_string(),
            steps,
            values,
        })
    }
}

fn set(table: &mut Table, steps: &[Step], value: Value, path: &str) -> Result<(), String> {
    let missing = || format!("sweep path `{path}` does not exist in the scenario");
    let (Step::Key(first), rest) = steps.split_first().expect("non-empty path") else {
        return Err(missing());
    };
    if rest.is_empty() {
        table.insert(first.clone(), value);
        return Ok(());
    }
    let mut node = table
        .entry(first.clone())
        .or_insert_with(|| Value::Table(Table::new()));
    for (i, step) in rest.iter().enumerate() {
        let last = i + 1 == rest.len();
        node = match (step, node) {
            (Step::Key(k), Value::Table(t)) if last => {
                t.insert(k.clone(), value);
                return Ok(());
            }
            (Step::Key(k), Value::Table(t)) => t.entry(k.clone()).or_insert_with(|| Value::Table(Table::new())),
            (Step::Index(j), Value::Array(a)) if *j < a.len() => {
                if last {
                    a[*j] = value;
                    return Ok(());
                }
                &mut a[*j]
            }
            _ => return Err(missing()),
        };
    }
    Err(missing())
}

/// One point of the sweep's cartesian product.
#[derive(Debug, Clone)]
pub struct Variant {
    pub label: String,
    /// `(path, raw value)` for each sweep dimension.
    pub settings: Vec<(String, String)>,
    pub scenario: Scenario,
}

fn sanitize(raw: &str) -> String {
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '-' })
        .collect()
}

/// Cartesian product of all sweeps applied to `base`, in argument order.
pub fn expand(base: &Table, sweeps: &[Sweep], seed: Option<u64>) -> Result<Vec<Variant>, CliError> {
    let mut points: Vec<Vec<usize>> = vec![Vec::new()];
    for sweep in sweeps {
        points = points
            .into_iter()
            .flat_map(|p| {
                (0..sweep.values.len()).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    let mut variants = Vec::with_capacity(points.len());
    for point in points {
        let mut table = base.clone();
        let mut settings = Vec::new();
        for (sweep, &i) in sweeps.iter().zip(&point) {
            let (raw, value) = &sweep.values[i];
            set(&mut table, &sweep.steps, value.clone(), &sweep.path).map_err(CliError::Usage)?;
            settings.push((sweep.path.clone(), raw.clone()));
        }
        let label = if settings.is_empty() {
            "base".to_string()
        } else {
            settings.iter().map(|(_, raw)| sanitize(raw)).collect::<Vec<_>>().join("_")
        };
        let mut scenario = Scenario::deserialize(Value::Table(table)).map_err(|e| CliError::Invalid {
            variant: Some(label.clone()),
            errors: diana_core::ValidationErrors(vec![diana_core::Violation::new(
                "scenario",
                e.to_string().trim().to_string(),
            )]),
        })?;
        if let Some(seed) = seed {
            scenario.seed = seed;
        }
        variants.push(Variant {
            label,
            settings,
            scenario,
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in &variants {
        if !seen.insert(v.label.clone()) {
            return Err(CliError::Usage(format!("sweep produces the label `{}` twice", v.label)));
        }
    }
    Ok(variants)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_column_are_one_based() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn sweep_values_keep_inline_tables_whole() {
        let s: Sweep = "workload.burst_size={ kind = \"constant\", value = 4 },{ kind = \"constant\", value = 8 }"
            .parse()
            .unwrap();
        assert_eq!(s.values.len(), 2);
        assert!(s.values[0].1.is_table());
        let s: Sweep = "scheduler_kind=diana,greedy-compute".parse().unwrap();
        assert_eq!(s.values[1].1, Value::String("greedy-compute".into()));
        let s: Sweep = "sites[1].processors=4".parse().unwrap();
        assert_eq!(s.steps, vec![Step::Key("sites".into()), Step::Index(1), Step::Key("processors".into())]);
        assert_eq!(s.values[0].1, Value::Integer(4));
    }

    #[test]
    fn bad_sweeps_rejected() {
        assert!("nothing".parse::<Sweep>().is_err());
        assert!("a[x]=1".parse::<Sweep>().is_err());
        assert!("a=1,,2".parse::<Sweep>().is_err());
    }

    #[test]
    fn set_creates_tables_but_not_indices() {
        let mut t: Table = "sites = [{ id = 0 }]".parse().unwrap();
        set(&mut t, &parse_path("policy.sjf_ordering").unwrap(), Value::Boolean(false), "p").unwrap();
        assert_eq!(t["policy"]["sjf_ordering"], Value::Boolean(false));
        set(&mut t, &parse_path("sites[0].id").unwrap(), Value::Integer(3), "p").unwrap();
        assert_eq!(t["sites"][0]["id"], Value::Integer(3));
        assert!(set(&mut t, &parse_path("sites[4].id").unwrap(), Value::Integer(3), "p").is_err());
    }
}
