use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::factor::{Var, Variable};
use crate::models::{BayesianNetwork, FactorModel, MarkovRandomField, Model};
use crate::{Domain, Factor};

pub const FORMAT_VERSION: u64 = 1;

fn schema(path: impl Into<String>, rule: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), rule: rule.into() }
}

/// Float in the canonical text form: 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn float_value(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::Number::from_f64(x).expect("finite"))
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

/// Canonical JSON text: sorted keys, two-space indentation, scalar arrays inline,
/// floats via [`format_float`].
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => out.push_str(&u.to_string()),
            (_, Some(i)) if !n.is_f64() => out.push_str(&i.to_string()),
            _ => out.push_str(&format_float(n.as_f64().expect("number"))),
        },
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*key], indent + 1, out);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn factor_label(kind: &str, scope: &[String]) -> String {
    match kind {
        "cpd" if !scope.is_empty() => {
            if scope.len() == 1 {
                format!("p({})", scope[0])
            } else {
                format!("p({} | {})", scope[0], scope[1..].join(", "))
            }
        }
        _ => format!("phi({})", scope.join(", ")),
    }
}

/// Serialize a model as a canonical document.
pub fn serialize_model(model: &Model) -> String {
    let (tag, kind) = match model {
        Model::Bayesian(_) => ("bayesian_network", "cpd"),
        Model::Markov(_) => ("markov_random_field", "potential"),
    };
    let variables: Vec<Value> = model
        .variables()
        .iter()
        .map(|v| {
            let mut m = Map::new();
            m.insert("name".into(), Value::String(v.name().into()));
            m.insert("states".into(), Value::Array(v.states().iter().map(|s| Value::String(s.clone())).collect()));
            Value::Object(m)
        })
        .collect();
    let factors: Vec<Value> = model
        .factors()
        .iter()
        .map(|f| {
            let f = f.to_linear();
            let mut m = Map::new();
            m.insert("kind".into(), Value::String(kind.into()));
            if kind == "cpd" {
                m.insert("child".into(), Value::String(f.scope()[0].name().into()));
            }
            m.insert("domain".into(), Value::String("linear".into()));
            m.insert("scope".into(), Value::Array(f.names().iter().map(|n| Value::String(n.to_string())).collect()));
            m.insert("table".into(), Value::Array(f.values().iter().map(|&x| float_value(x)).collect()));
            Value::Object(m)
        })
        .collect();
    let mut root = Map::new();
    root.insert("factors".into(), Value::Array(factors));
    root.insert("format_version".into(), Value::from(FORMAT_VERSION));
    root.insert("model_type".into(), Value::String(tag.into()));
    root.insert("variables".into(), Value::Array(variables));
    to_canonical_json(&Value::Object(root))
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let m = v.as_object().ok_or_else(|| schema(path, "must be an object"))?;
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(schema(format!("{path}.{k}"), "unknown key"));
        }
    }
    Ok(m)
}

fn field<'a>(m: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| schema(format!("{path}.{key}"), "required key is missing"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "must be a string"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "must be an array"))
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
    array(v, path)?.iter().enumerate().map(|(i, s)| string(s, &format!("{path}[{i}]")).map(str::to_string)).collect()
}

fn number(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(path, "must be a number")),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(schema(path, "must be a number or one of \"inf\", \"-inf\", \"nan\"")),
        },
        _ => Err(schema(path, "must be a number")),
    }
}

/// Parse and validate a model document.
pub fn parse_model(text: &str) -> Result<Model> {
    let root: Value = serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    let m = object(&root, "$", &["factors", "format_version", "model_type", "variables"])?;
    let version = field(m, "$", "format_version")?;
    if version.as_u64() != Some(FORMAT_VERSION) {
        return Err(schema("$.format_version", format!("must be {FORMAT_VERSION}")));
    }
    let tag = string(field(m, "$", "model_type")?, "$.model_type")?;
    let expected_kind = match tag {
        "bayesian_network" => "cpd",
        "markov_random_field" => "potential",
        _ => return Err(schema("$.model_type", "must be \"bayesian_network\" or \"markov_random_field\"")),
    };

    let mut vars: Vec<Var> = Vec::new();
    for (i, v) in array(field(m, "$", "variables")?, "$.variables")?.iter().enumerate() {
        let path = format!("$.variables[{i}]");
        let vm = object(v, &path, &["name", "states"])?;
        let name = string(field(vm, &path, "name")?, &format!("{path}.name"))?;
        let states = strings(field(vm, &path, "states")?, &format!("{path}.states"))?;
        if vars.iter().any(|w| w.name() == name) {
            return Err(schema(format!("{path}.name"), format!("variable `{name}` declared twice")));
        }
        vars.push(Variable::new(name, states).map_err(|e| schema(&path, e.to_string()))?);
    }

    let mut factors = Vec::new();
    for (i, f) in array(field(m, "$", "factors")?, "$.factors")?.iter().enumerate() {
        let path = format!("$.factors[{i}]");
        let fm = object(f, &path, &["child", "domain", "kind", "scope", "table"])?;
        let kind = string(field(fm, &path, "kind")?, &format!("{path}.kind"))?;
        if kind != "cpd" && kind != "potential" {
            return Err(schema(format!("{path}.kind"), "must be \"cpd\" or \"potential\""));
        }
        if kind != expected_kind {
            return Err(schema(format!("{path}.kind"), format!("a {tag} takes `{expected_kind}` factors")));
        }
        let scope_names = strings(field(fm, &path, "scope")?, &format!("{path}.scope"))?;
        let mut scope = Vec::new();
        for (j, n) in scope_names.iter().enumerate() {
            let v = vars
                .iter()
                .find(|v| v.name() == n)
                .ok_or_else(|| schema(format!("{path}.scope[{j}]"), format!("undeclared variable `{n}`")))?;
            if scope_names[..j].contains(n) {
                return Err(schema(format!("{path}.scope[{j}]"), format!("`{n}` repeated in scope")));
            }
            scope.push(v.clone());
        }
        match (kind, fm.get("child")) {
            ("cpd", Some(c)) => {
                let child = string(c, &format!("{path}.child"))?;
                if scope_names.first().map(String::as_str) != Some(child) {
                    return Err(schema(format!("{path}.child"), "the child must be listed first in the scope"));
                }
            }
            ("cpd", None) => return Err(schema(format!("{path}.child"), "required key is missing")),
            (_, Some(_)) => return Err(schema(format!("{path}.child"), "only cpd factors have a child")),
            _ => {}
        }
        let domain = match fm.get("domain") {
            None => Domain::Linear,
            Some(d) => match string(d, &format!("{path}.domain"))? {
                "linear" => Domain::Linear,
                "log" => Domain::Log,
                _ => return Err(schema(format!("{path}.domain"), "must be \"linear\" or \"log\"")),
            },
        };
        let table_path = format!("{path}.table");
        let table: Vec<f64> = array(field(fm, &path, "table")?, &table_path)?
            .iter()
            .enumerate()
            .map(|(k, x)| number(x, &format!("{table_path}[{k}]")))
            .collect::<Result<_>>()?;
        let expected: usize = scope.iter().map(|v| v.cardinality()).product();
        if table.len() != expected {
            return Err(Error::LengthMismatch { factor: factor_label(kind, &scope_names), found: table.len(), expected });
        }
        factors.push(Factor::with_domain(scope, table, domain)?.to_linear());
    }

    let model = match tag {
        "bayesian_network" => Model::Bayesian(BayesianNetwork::new(vars, factors).map_err(|e| schema("$.factors", e.to_string()))?),
        _ => Model::Markov(MarkovRandomField::new(vars, factors).map_err(|e| schema("$.factors", e.to_string()))?),
    };
    if let Some(v) = model.validate().into_iter().next() {
        return Err(schema(v.subject, v.rule));
    }
    Ok(model)
}
