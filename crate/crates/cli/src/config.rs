//! Optional TOML defaults, spliced in as flags ahead of the user's own so
//! that the command line wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

const SUBCOMMANDS: [&str; 5] = ["gen-data", "part1", "part2", "infer", "serve"];

/// Flags for `subcommand` from the file's `[subcommand]` table.
pub fn flags_from_file(path: &Path, subcommand: &str) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let doc: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
    for key in doc.keys() {
        if !SUBCOMMANDS.contains(&key.as_str()) {
            bail!("config {}: unknown table [{key}]", path.display());
        }
    }
    let Some(table) = doc.get(subcommand) else {
        return Ok(Vec::new());
    };
    let table = table
        .as_table()
        .with_context(|| format!("config {}: [{subcommand}] must be a table", path.display()))?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => flags.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => flags.extend([flag.into(), s.into()]),
            toml::Value::Integer(i) => flags.extend([flag.into(), i.to_string().into()]),
            toml::Value::Float(f) => flags.extend([flag.into(), f.to_string().into()]),
            other => bail!("config {}: unsupported value for {key}: {other}", path.display()),
        }
    }
    Ok(flags)
}

/// The `--config` path and subcommand name found in raw arguments.
pub fn scan(args: &[OsString]) -> (Option<OsString>, Option<&'static str>) {
    let mut config = None;
    let mut subcommand = None;
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = iter.next().cloned();
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(v.into());
        } else if subcommand.is_none() {
            subcommand = SUBCOMMANDS.iter().copied().find(|c| *c == s);
        }
    }
    (config, subcommand)
}

/// Inserts `extra` right after the subcommand name in `args`.
pub fn splice(args: Vec<OsString>, subcommand: &str, extra: Vec<OsString>) -> Vec<OsString> {
    let Some(pos) = args.iter().position(|a| a == subcommand) else {
        return args;
    };
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_and_splice() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[part1]\ngenerations = 7\nmethod = \"ga\"\npaper_scale = false\n[infer]\nsa = -1.5\n").unwrap();
        let flags = flags_from_file(&path, "part1").unwrap();
        assert_eq!(flags, ["--generations", "7", "--method", "ga"].map(OsString::from));
        assert!(flags_from_file(&path, "serve").unwrap().is_empty());
        let args: Vec<OsString> = ["x", "--config", "c.toml", "part1", "--seed", "1"].map(OsString::from).into();
        let spliced = splice(args, "part1", flags);
        assert_eq!(spliced[3..6], ["part1", "--generations", "7"].map(OsString::from));
        assert_eq!(spliced.last().unwrap(), "1");

        let raw: Vec<OsString> = ["x", "--config=a.toml", "infer", "--sa", "1"].map(OsString::from).into();
        assert_eq!(scan(&raw), (Some("a.toml".into()), Some("infer")));

        std::fs::write(&path, "[bogus]\nx = 1\n").unwrap();
        assert!(flags_from_file(&path, "part1").is_err());
    }
}
