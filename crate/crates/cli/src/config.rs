//! JSON run configuration, expanded into command-line arguments.
//!
//! ```json
//! {
//!   "command": "example2",
//!   "params": { "p": 0.8, "q": 1.0, "beta1": true },
//!   "format": "json",
//!   "output": "report.json",
//!   "dim_cap": 4096
//! }
//! ```
//!
//! Each parameter becomes `--name value`: numbers and strings are passed
//! as written, `true` sets a flag, numeric arrays are joined with commas and
//! other arrays repeat the flag. Flags given on the command line override
//! the file.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub format: Option<String>,
    pub output: Option<String>,
    pub dim_cap: Option<usize>,
}

fn scalar(v: &Value) -> anyhow::Result<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => bail!("unsupported parameter value {other}"),
    }
}

impl RunConfig {
    pub fn to_args(&self) -> anyhow::Result<Vec<String>> {
        let mut args = vec![self.command.clone()];
        for (key, value) in &self.params {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                Value::Bool(true) => args.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) if items.iter().all(Value::is_number) => {
                    let joined = items.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?.join(",");
                    args.extend([flag, joined]);
                }
                Value::Array(items) => {
                    for item in items {
                        let text = match item {
                            Value::Array(inner) => inner.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?.join(","),
                            v => scalar(v)?,
                        };
                        args.extend([flag.clone(), text]);
                    }
                }
                v => args.extend([flag, scalar(v).with_context(|| format!("parameter `{key}`"))?]),
            }
        }
        if let Some(f) = &self.format {
            args.extend(["--format".into(), f.clone()]);
        }
        if let Some(o) = &self.output {
            args.extend(["--output".into(), o.clone()]);
        }
        if let Some(c) = self.dim_cap {
            args.extend(["--dim-cap".into(), c.to_string()]);
        }
        Ok(args)
    }
}

/// Arguments equivalent to the config file followed by the original
/// command-line flags (without `--config`).
pub fn expand(path: &Path, argv: &[String]) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let config: RunConfig =
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;
    let mut out = vec![argv.first().cloned().unwrap_or_else(|| "netlocal".into())];
    out.extend(config.to_args()?);
    let mut rest = argv.iter().skip(1);
    while let Some(a) = rest.next() {
        if a == "--config" {
            rest.next();
        } else if !a.starts_with("--config=") {
            out.push(a.clone());
        }
    }
    Ok(out)
}
