//! Run configuration: a flat `key=value` file overridden by flags.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use sturm_core::bandtree::EnumerationSettings;
use sturm_core::{parse_cf, ContinuedFraction, SpectralParams};

use crate::CliError;

pub const KEYS: [&str; 8] = [
    "alpha_spec",
    "V",
    "order",
    "precision_bits",
    "bisect_rel_tol",
    "threads",
    "cache_path",
    "seed",
];

/// Values as given, before validation. Later layers win.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub alpha_spec: Option<String>,
    pub v: Option<String>,
    pub order: Option<u32>,
    pub precision_bits: Option<u32>,
    pub bisect_rel_tol: Option<f64>,
    pub threads: Option<usize>,
    pub cache_path: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| invalid(format!("config key `{key}`: cannot parse `{value}`")))
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key=value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "alpha_spec" => c.alpha_spec = Some(value.to_string()),
                "V" => c.v = Some(value.to_string()),
                "order" => c.order = Some(parse_value(key, value)?),
                "precision_bits" => c.precision_bits = Some(parse_value(key, value)?),
                "bisect_rel_tol" => c.bisect_rel_tol = Some(parse_value(key, value)?),
                "threads" => c.threads = Some(parse_value(key, value)?),
                "cache_path" => c.cache_path = Some(PathBuf::from(value)),
                "seed" => c.seed = Some(parse_value(key, value)?),
                other => {
                    return Err(invalid(format!(
                        "unknown config key `{other}`; known keys: {}",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn overlay(self, top: RawConfig) -> RawConfig {
        RawConfig {
            alpha_spec: top.alpha_spec.or(self.alpha_spec),
            v: top.v.or(self.v),
            order: top.order.or(self.order),
            precision_bits: top.precision_bits.or(self.precision_bits),
            bisect_rel_tol: top.bisect_rel_tol.or(self.bisect_rel_tol),
            threads: top.threads.or(self.threads),
            cache_path: top.cache_path.or(self.cache_path),
            seed: top.seed.or(self.seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cf: ContinuedFraction,
    /// `V` as written, parsed at the working precision.
    pub v_text: String,
    pub params: SpectralParams,
    pub order: u32,
    pub settings: EnumerationSettings,
    pub threads: usize,
    pub cache_path: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub const DEFAULT_ALPHA: &'static str = "per:1";
    pub const DEFAULT_V: &'static str = "24";
    pub const DEFAULT_ORDER: u32 = 6;

    pub fn resolve(raw: RawConfig) -> Result<Self, CliError> {
        let alpha_spec = raw.alpha_spec.unwrap_or_else(|| Self::DEFAULT_ALPHA.into());
        let cf = parse_cf(&alpha_spec)?;
        let v_text = raw.v.unwrap_or_else(|| Self::DEFAULT_V.into());
        let v: f64 = v_text
            .trim()
            .parse()
            .map_err(|_| invalid(format!("V: cannot parse `{v_text}`")))?;
        let order = raw.order.unwrap_or(Self::DEFAULT_ORDER);
        let precision = match raw.precision_bits {
            Some(p) => p,
            None => SpectralParams::required_precision(v, order).max(SpectralParams::DEFAULT_PRECISION),
        };
        let params = SpectralParams::from_decimal(&v_text, precision)?;
        params.require_band_regime()?;
        let mut settings = EnumerationSettings::default();
        if let Some(t) = raw.bisect_rel_tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid(format!("bisect_rel_tol must lie in (0,1), got {t}")));
            }
            settings.bisect_rel_tol = t;
        }
        let threads = raw.threads.unwrap_or(0);
        Ok(Self {
            cf,
            v_text: v_text.trim().to_string(),
            params,
            order,
            settings,
            threads,
            cache_path: raw.cache_path,
            seed: raw.seed.unwrap_or(0),
        })
    }

    /// Hash of everything that determines band endpoints. Order, threads,
    /// seed and the cache path do not enter.
    pub fn tree_hash(&self) -> String {
        let canonical = format!(
            "alpha={}\nV={}\nprecision_bits={}\nbisect_rel_tol={:e}\nwindow_rel_tol={:e}\nmonotone_samples={}\nfallback_scan={}\n",
            self.cf,
            sturm_core::dump::decimal(self.params.coupling()),
            self.params.precision(),
            self.settings.bisect_rel_tol,
            self.settings.window_rel_tol,
            self.settings.monotone_samples,
            self.settings.fallback_scan,
        );
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse("# comment\nV = 30\norder=3\nalpha_spec=per:2\n").unwrap();
        let flags = RawConfig {
            order: Some(5),
            ..Default::default()
        };
        let c = RunConfig::resolve(file.overlay(flags)).unwrap();
        assert_eq!(c.order, 5);
        assert_eq!(c.v_text, "30");
        assert_eq!(c.cf.period(), &[2]);
    }

    #[test]
    fn rejects_unknown_keys_and_small_coupling() {
        assert!(matches!(RawConfig::parse("foo=1"), Err(CliError::Config(_))));
        let raw = RawConfig {
            v: Some("20".into()),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(raw), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_order_and_seed() {
        let a = RunConfig::resolve(RawConfig {
            order: Some(3),
            precision_bits: Some(192),
            ..Default::default()
        })
        .unwrap();
        let b = RunConfig::resolve(RawConfig {
            order: Some(7),
            precision_bits: Some(192),
            seed: Some(9),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(a.tree_hash(), b.tree_hash());
        let c = RunConfig::resolve(RawConfig {
            precision_bits: Some(256),
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.tree_hash(), c.tree_hash());
    }
}
