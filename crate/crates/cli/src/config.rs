//! `--config file.json` support: the file's entries become flags placed
//! before the command-line ones, so explicit flags win.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

const COMMANDS: [&str; 5] = ["transform", "invert", "collide", "verify", "delta"];

fn config_path(argv: &[OsString]) -> Result<Option<String>, String> {
    let mut it = argv.iter().skip(1);
    let mut found = None;
    while let Some(tok) = it.next() {
        let tok = tok.to_string_lossy();
        if tok == "--" {
            break;
        }
        if tok == "--config" {
            let path = it.next().ok_or("--config needs a file argument")?;
            found = Some(path.to_string_lossy().into_owned());
        } else if let Some(p) = tok.strip_prefix("--config=") {
            found = Some(p.to_string());
        }
    }
    Ok(found)
}

fn value_tokens(key: &str, v: &Value) -> Result<Vec<String>, String> {
    let flag = format!("--{}", key.replace('_', "-"));
    Ok(match v {
        Value::Bool(true) => vec![flag],
        Value::Bool(false) | Value::Null => Vec::new(),
        Value::Number(n) => vec![format!("{flag}={n}")],
        Value::String(s) => vec![format!("{flag}={s}")],
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|x| match x {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    _ => Err(format!("config key '{key}': arrays may hold only numbers or strings")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            vec![format!("{flag}={}", parts.join(","))]
        }
        Value::Object(_) => return Err(format!("config key '{key}': nested objects are not supported")),
    })
}

/// Return `argv` with the config file's flags spliced in after the subcommand.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let json: Value = serde_json::from_str(&text).map_err(|e| format!("config file {path} is not valid JSON: {e}"))?;
    let Value::Object(map) = json else {
        return Err(format!("config file {path} must hold a JSON object"));
    };
    let mut injected = Vec::new();
    let mut command = None;
    for (key, v) in &map {
        if key == "command" {
            command = Some(v.as_str().ok_or("config key 'command' must be a string")?.to_string());
            continue;
        }
        if key == "config" {
            return Err("config files cannot name another config file".into());
        }
        injected.extend(value_tokens(key, v)?);
    }
    let pos = argv
        .iter()
        .position(|t| COMMANDS.contains(&t.to_string_lossy().as_ref()));
    let mut out = argv.clone();
    let at = match pos {
        Some(p) => p + 1,
        None => {
            let cmd = command.ok_or("no subcommand given on the command line or in the config file")?;
            out.insert(1, cmd.into());
            2
        }
    };
    for (i, tok) in injected.into_iter().enumerate() {
        out.insert(at + i, tok.into());
    }
    Ok(out)
}
