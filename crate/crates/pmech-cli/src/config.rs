//! Plain-text configuration files: one `key = value` per line, `#` starts a
//! comment, UTF-8. Command-line flags override file values.

use std::collections::HashMap;
use std::path::Path;

pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn empty() -> Self {
        Config {
            values: HashMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else config value parsed, else default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, String> {
        match flag {
            Some(v) => Ok(v),
            None => match self.get(key) {
                Some(text) => text
                    .parse()
                    .map_err(|_| format!("config key `{key}`: cannot parse `{text}`")),
                None => Ok(default),
            },
        }
    }

    /// Like [`Config::resolve`] but with no default.
    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.get(key) {
                Some(text) => text
                    .parse()
                    .map(Some)
                    .map_err(|_| format!("config key `{key}`: cannot parse `{text}`")),
                None => Ok(None),
            },
        }
    }
}
