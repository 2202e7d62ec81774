//! Optional TOML configuration file for the `run` subcommand. Flags always
//! win over file values; file values win over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use citenv::error::{Error, Result};
use citenv::pipeline::KChoice;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum KValue {
    Number(usize),
    Text(String),
}

impl KValue {
    pub fn parse(&self) -> Result<KChoice> {
        match self {
            KValue::Number(n) => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("k must be >= 1".into()));
                }
                Ok(KChoice::Fixed(*n))
            }
            KValue::Text(s) => s.parse(),
        }
    }
}

/// File-level run configuration; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub focal: Option<String>,
    pub direction: Option<String>,
    pub min_count: Option<u64>,
    pub k: Option<KValue>,
    pub threshold: Option<f64>,
    pub orientation: Option<String>,
    pub zero_diagonal: Option<bool>,
    pub signed: Option<bool>,
    pub kaiser: Option<bool>,
    pub varimax_tolerance: Option<f64>,
    pub varimax_max_sweeps: Option<usize>,
    pub impact_cutoff: Option<f64>,
    pub label: Option<String>,
    pub timestamp: Option<bool>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub factor_labels: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config file {}: {e}", path.display())))
    }

    /// Factor labels keyed by factor number.
    pub fn parsed_factor_labels(&self) -> Result<BTreeMap<usize, String>> {
        let mut labels = BTreeMap::new();
        for (key, value) in &self.factor_labels {
            let factor: usize = key.parse().map_err(|_| {
                Error::InvalidParameter(format!("factor_labels key '{key}' is not a factor number"))
            })?;
            labels.insert(factor, value.clone());
        }
        Ok(labels)
    }
}

/// Parse a repeatable `N=LABEL` flag value.
pub fn parse_factor_label(raw: &str) -> Result<(usize, String)> {
    let (number, label) = raw.split_once('=').ok_or_else(|| {
        Error::InvalidParameter(format!("expected FACTOR=LABEL, got '{raw}'"))
    })?;
    let factor: usize = number.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!("factor '{number}' is not a number in '{raw}'"))
    })?;
    Ok((factor, label.trim().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"
corpus = "c.csv"
focal = "hub"
direction = "export"
min_count = 3
k = "auto"
threshold = 0.25
kaiser = false

[factor_labels]
1 = "cognition"
2 = "ai"
"#;
        let config: FileConfig = toml::from_str(text).unwrap();
        assert_eq!(config.focal.as_deref(), Some("hub"));
        assert_eq!(config.min_count, Some(3));
        assert!(matches!(config.k.as_ref().unwrap().parse().unwrap(), KChoice::Auto));
        assert_eq!(config.kaiser, Some(false));
        let labels = config.parsed_factor_labels().unwrap();
        assert_eq!(labels.get(&1).map(String::as_str), Some("cognition"));
    }

    #[test]
    fn numeric_k_is_accepted() {
        let config: FileConfig = toml::from_str("k = 4").unwrap();
        assert!(matches!(config.k.unwrap().parse().unwrap(), KChoice::Fixed(4)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("no_such_key = 1").is_err());
    }

    #[test]
    fn factor_label_flag_parses() {
        assert_eq!(
            parse_factor_label("2=neuroscience").unwrap(),
            (2, "neuroscience".to_owned())
        );
        assert!(parse_factor_label("neuroscience").is_err());
    }
}
