//! Flat `key=value` run configuration.
//!
//! Keys come from an optional file (`--config path`) and from flags; flags
//! win. A file line may carry a leading `#`, so the header echoed into every
//! output file can be fed back unchanged. Reading stops at the first line
//! that is neither blank, a comment, nor `key=value`, which lets a whole
//! output file serve as a config.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

/// Keys accepted by every subcommand.
pub const COMMON: &[(&str, &str)] = &[("seed", "0")];

/// Keys that never reach the echo: they do not change the results.
const PLUMBING: &[&str] = &["config", "out", "threads"];

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration; exit 1.
    Config(String),
    /// A numerical routine gave up; exit 2.
    NonConvergence(String),
    /// Any other failure reported by the library; exit 1.
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NonConvergence(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::NonConvergence(m) => write!(f, "no convergence: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `kernel-family` and `kernel.family` name the same key; other dashes
/// become underscores.
pub fn canonical_key(key: &str) -> String {
    let k = match key.strip_prefix("kernel-") {
        Some(rest) => format!("kernel.{rest}"),
        None => key.to_string(),
    };
    k.replace('-', "_")
}

/// Subcommand plus raw, not yet validated, key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct RawArgs {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

pub fn parse_args(argv: &[String]) -> Result<RawArgs> {
    let mut it = argv.iter().peekable();
    let command = it.next().ok_or_else(|| config_err("missing subcommand"))?.clone();
    if command.starts_with("--") {
        return Err(config_err(format!("expected a subcommand before {command}")));
    }
    let mut flags = BTreeMap::new();
    while let Some(arg) = it.next() {
        let body = arg.strip_prefix("--").ok_or_else(|| config_err(format!("unexpected argument {arg}")))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = match it.peek() {
                    Some(next) if !next.starts_with("--") => it.next().unwrap().clone(),
                    _ => return Err(config_err(format!("flag --{body} needs a value"))),
                };
                (body.to_string(), v)
            }
        };
        if key.is_empty() {
            return Err(config_err("empty flag name"));
        }
        flags.insert(canonical_key(&key), value);
    }
    let mut values = BTreeMap::new();
    if let Some(path) = flags.get("config") {
        values = read_config_file(Path::new(path))?;
    }
    values.extend(flags);
    Ok(RawArgs { command, values })
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (commented, body) = match line.strip_prefix('#') {
            Some(rest) => (true, rest.trim()),
            None => (false, line),
        };
        match body.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() && !k.contains(',') && !k.contains(' ') => {
                out.insert(canonical_key(k.trim()), v.trim().to_string());
            }
            _ if commented => {}
            _ => break,
        }
    }
    Ok(out)
}

/// Validated configuration: defaults overlaid with what the user supplied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    resolved: BTreeMap<String, String>,
    out: Option<String>,
    threads: Option<usize>,
}

impl RunConfig {
    /// Rejects keys outside `schema` and the common set.
    pub fn resolve(raw: RawArgs, schema: &[(&str, &str)]) -> Result<Self> {
        let allowed: BTreeSet<&str> =
            schema.iter().chain(COMMON).map(|(k, _)| *k).chain(PLUMBING.iter().copied()).collect();
        if let Some(bad) = raw.values.keys().find(|k| !allowed.contains(k.as_str())) {
            return Err(config_err(format!("unknown key '{bad}' for subcommand {}", raw.command)));
        }
        let mut resolved: BTreeMap<String, String> =
            schema.iter().chain(COMMON).map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut out = None;
        let mut threads = None;
        for (k, v) in raw.values {
            match k.as_str() {
                "config" => {}
                "out" => out = Some(v),
                "threads" => threads = Some(parse_threads(&v)?),
                _ => {
                    resolved.insert(k, v);
                }
            }
        }
        if threads.is_none() {
            if let Ok(v) = std::env::var("HSNL_THREADS") {
                threads = Some(parse_threads(&v)?);
            }
        }
        Ok(RunConfig { command: raw.command, resolved, out, threads })
    }

    pub fn out(&self) -> Option<&str> {
        self.out.as_deref()
    }

    pub fn threads(&self) -> Option<usize> {
        self.threads
    }

    /// `# hsnl <command>` followed by `# key=value` for every resolved key.
    pub fn header(&self) -> String {
        let mut s = format!("# hsnl {}\n", self.command);
        for (k, v) in &self.resolved {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s
    }

    pub fn str(&self, key: &str) -> &str {
        self.resolved.get(key).map(String::as_str).unwrap_or_else(|| panic!("key {key} missing from schema"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.str(key)).map_err(|m| config_err(format!("{key}: {m}")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.str(key).parse().map_err(|_| config_err(format!("{key}: expected a nonnegative integer, got '{}'", self.str(key))))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.str(key).parse().map_err(|_| config_err(format!("{key}: expected an unsigned integer, got '{}'", self.str(key))))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(config_err(format!("{key}: expected true or false, got '{other}'"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.str(key)
            .split(',')
            .map(|t| parse_f64(t.trim()).map_err(|m| config_err(format!("{key}: {m}"))))
            .collect()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.str(key)
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| config_err(format!("{key}: bad integer '{t}'"))))
            .collect()
    }
}

fn parse_threads(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(config_err(format!("threads: expected a positive integer, got '{v}'"))),
    }
}

/// Decimal, exponent or `p/q` fraction; a leading `+` is allowed.
pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flag_forms_and_aliases() {
        let raw = parse_args(&args(&["solve", "--kernel-family", "riesz_truncated", "--n=32", "--nu", "-1"])).unwrap();
        assert_eq!(raw.values["kernel.family"], "riesz_truncated");
        assert_eq!(raw.values["n"], "32");
        assert_eq!(raw.values["nu"], "-1");
    }

    #[test]
    fn unknown_key_is_named() {
        let raw = parse_args(&args(&["solve", "--bogus=1"])).unwrap();
        let err = RunConfig::resolve(raw, &[("n", "8")]).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn header_round_trips() {
        let raw = parse_args(&args(&["solve", "--n=32"])).unwrap();
        let cfg = RunConfig::resolve(raw, &[("n", "8"), ("lam", "0.01")]).unwrap();
        let text = format!("{}x,u\n0,0\n", cfg.header());
        let back = parse_config_text(&text).unwrap();
        assert_eq!(back["n"], "32");
        assert_eq!(back["lam"], "0.01");
        assert_eq!(back["seed"], "0");
    }

    #[test]
    fn fractions_and_signs() {
        assert_eq!(parse_f64("1/16").unwrap(), 0.0625);
        assert_eq!(parse_f64("+1").unwrap(), 1.0);
        assert!(parse_f64("inf").is_err());
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
