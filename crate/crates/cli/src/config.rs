use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use jointcoord::Error;

/// Keys accepted in a config file; each mirrors the flag of the same name.
const KEYS: &[&str] = &[
    "ref",
    "cmp",
    "unit",
    "p",
    "m",
    "grid",
    "seed",
    "splits",
    "rule",
    "out",
    "baseline",
    "dtw",
    "smoothing",
    "amplitude",
    "omega",
    "duration",
    "samples",
    "noise",
    "reps",
];

/// `key = value` settings read from a file. Lines starting with `#` and
/// blank lines are ignored; values may be quoted.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            let key = key.trim().replace('_', "-");
            let key = key.trim_start_matches("--").to_owned();
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", n + 1));
            }
            let value = value.trim().trim_matches('"').to_owned();
            values.insert(key, value);
        }
        Ok(Self { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Error::Config(format!("config key '{key}' = '{v}': {e}")))
            })
            .transpose()
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Error>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Boolean switches: a flag can only turn them on.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, Error> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}
