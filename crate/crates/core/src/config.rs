//! `key = value` configuration files.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {0}: empty key")]
    EmptyKey(usize),
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(idx + 1))?;
        let key = k.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(ConfigError::EmptyKey(idx + 1));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate { line: idx + 1, key });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let cfg = parse_config("# sweep\ntrials = 200\n\nP=0.3 # inline\nschemes = routing,rlnc\n").unwrap();
        assert_eq!(cfg.len(), 3);
        assert_eq!(cfg["trials"], "200");
        assert_eq!(cfg["p"], "0.3");
        assert_eq!(cfg["schemes"], "routing,rlnc");
    }

    #[test]
    fn errors() {
        assert_eq!(parse_config("trials 200"), Err(ConfigError::Syntax(1)));
        assert_eq!(parse_config(" = 3"), Err(ConfigError::EmptyKey(1)));
        assert!(matches!(parse_config("a=1\na=2"), Err(ConfigError::Duplicate { line: 2, .. })));
    }
}
