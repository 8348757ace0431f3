//! `--config FILE`: a flat JSON object whose entries become command-line
//! flags. Flags given explicitly on the command line win. The key
//! `"command"` (e.g. `"check pd"`) supplies the subcommand when the command
//! line names none.

use std::ffi::OsString;

use serde_json::Value;

fn config_path(argv: &[OsString]) -> Result<Option<(usize, usize, OsString)>, String> {
    for (i, a) in argv.iter().enumerate().skip(1) {
        let s = a.to_string_lossy();
        if s == "--config" {
            let path = argv.get(i + 1).ok_or("--config needs a path")?;
            return Ok(Some((i, 2, path.clone())));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, p.into())));
        }
    }
    Ok(None)
}

fn scalar(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(format!("config key {key:?}: expected a string or number")),
    }
}

pub fn expand(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some((at, len, path)) = config_path(&argv)? else {
        return Ok(argv);
    };
    argv.drain(at..at + len);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path:?}: {e}"))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text).map_err(|e| format!("config {path:?}: {e}"))?
    else {
        return Err(format!("config {path:?} must be a JSON object"));
    };

    if let Some(value) = map.get("command") {
        let has_subcommand = argv.get(1).is_some_and(|a| !a.to_string_lossy().starts_with('-'));
        if !has_subcommand {
            let words: Vec<OsString> = scalar("command", value)?.split_whitespace().map(OsString::from).collect();
            argv.splice(1..1, words);
        }
    }
    let given = |flag: &str| {
        argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if given(&flag) {
            continue;
        }
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => extra.push(flag.into()),
            Value::Array(items) => {
                for item in items {
                    extra.push(flag.clone().into());
                    extra.push(scalar(key, item)?.into());
                }
            }
            Value::Object(_) => return Err(format!("config key {key:?}: nested objects are not allowed")),
            v => {
                extra.push(flag.into());
                extra.push(scalar(key, v)?.into());
            }
        }
    }
    argv.extend(extra);
    Ok(argv)
}
