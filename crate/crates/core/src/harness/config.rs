use std::collections::HashMap;
use std::path::Path;

use crate::detect::InverseProvider;
use crate::error::{Error, Result};
use crate::linalg::IterOrder;
use crate::sphere::SdScheme;

/// Which detector a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Zf,
    Mmse,
    SdProposed,
    SdSe,
    SdFp,
}

impl Detector {
    pub fn is_linear(self) -> bool {
        matches!(self, Detector::Zf | Detector::Mmse)
    }

    pub fn scheme(self) -> Option<SdScheme> {
        match self {
            Detector::SdProposed => Some(SdScheme::Proposed),
            Detector::SdSe => Some(SdScheme::SeSd),
            Detector::SdFp => Some(SdScheme::FpSd),
            _ => None,
        }
    }
}

/// Full description of one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_rx: usize,
    pub n_users: usize,
    pub modulation: usize,
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub detector: Detector,
    pub inverse: InverseProvider,
    /// Worker threads; 0 picks the runtime default. Results are identical
    /// for every value.
    pub workers: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::Config("the SNR list must not be empty".into()));
        }
        if self.n_users < 1 || self.n_rx < self.n_users {
            return Err(Error::Config(format!(
                "need n >= k >= 1, got n = {}, k = {}",
                self.n_rx, self.n_users
            )));
        }
        if !matches!(self.modulation, 4 | 16 | 64) {
            return Err(Error::Config(format!(
                "unsupported modulation order {}; use 4, 16 or 64",
                self.modulation
            )));
        }
        if self.trials as u64 > u32::MAX as u64 {
            return Err(Error::Config("trials exceed the per-stream budget".into()));
        }
        if self.detector == Detector::SdProposed && self.inverse == InverseProvider::Exact {
            return Err(Error::Config(
                "the proposed sphere decoder seeds its radius from an iterative inverse; \
                 pass --inverse newton:K (or order3:K / order7:K)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// `exact`, `newton:K`, `order3:K` or `order7:K`.
pub fn parse_inverse(s: &str) -> Result<InverseProvider> {
    let s = s.trim();
    if s == "exact" {
        return Ok(InverseProvider::Exact);
    }
    let (name, count) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("cannot parse inverse spec '{s}'")))?;
    let iterations: usize = count
        .parse()
        .map_err(|_| Error::Config(format!("bad iteration count in inverse spec '{s}'")))?;
    let order = match name {
        "newton" | "order2" => IterOrder::Two,
        "order3" => IterOrder::Three,
        "order7" => IterOrder::Seven,
        other => return Err(Error::Config(format!("unknown inverse kind '{other}'"))),
    };
    Ok(InverseProvider::Iterative { order, iterations })
}

pub fn inverse_to_string(inv: InverseProvider) -> String {
    match inv {
        InverseProvider::Exact => "exact".to_string(),
        InverseProvider::Iterative { order, iterations } => match order {
            IterOrder::Two => format!("newton:{iterations}"),
            IterOrder::Three => format!("order3:{iterations}"),
            IterOrder::Seven => format!("order7:{iterations}"),
        },
    }
}

/// `proposed`, `se` or `fp`.
pub fn parse_scheme(s: &str) -> Result<Detector> {
    match s.trim() {
        "proposed" => Ok(Detector::SdProposed),
        "se" => Ok(Detector::SdSe),
        "fp" => Ok(Detector::SdFp),
        other => Err(Error::Config(format!("unknown SD scheme '{other}'"))),
    }
}

/// `zf` or `mmse`.
pub fn parse_linear_detector(s: &str) -> Result<Detector> {
    match s.trim() {
        "zf" => Ok(Detector::Zf),
        "mmse" => Ok(Detector::Mmse),
        other => Err(Error::Config(format!("unknown linear detector '{other}'"))),
    }
}

/// Comma-separated dB values.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad SNR value '{tok}'")))
        })
        .collect()
}

/// Flat `key = value` config file mirroring the CLI flags; `#` starts a
/// comment. Returns the raw key/value pairs for the caller to merge under
/// explicit flags.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_spec_round_trip() {
        assert_eq!(parse_inverse("exact").unwrap(), InverseProvider::Exact);
        let inv = parse_inverse("newton:7").unwrap();
        assert_eq!(
            inv,
            InverseProvider::Iterative {
                order: IterOrder::Two,
                iterations: 7
            }
        );
        assert_eq!(inverse_to_string(inv), "newton:7");
        assert!(parse_inverse("order3:2").is_ok());
        assert!(parse_inverse("order7:1").is_ok());
        assert!(parse_inverse("order5:1").is_err());
        assert!(parse_inverse("newton").is_err());
        assert!(parse_inverse("newton:x").is_err());
    }

    #[test]
    fn snr_list_parses() {
        assert_eq!(parse_snr_list("0, 4,8").unwrap(), vec![0.0, 4.0, 8.0]);
        assert!(parse_snr_list("0,,8").is_err());
    }

    #[test]
    fn config_validation_catches_bad_runs() {
        let mut cfg = SimConfig {
            n_rx: 8,
            n_users: 4,
            modulation: 4,
            snr_db_list: vec![10.0],
            trials: 10,
            master_seed: 1,
            detector: Detector::Zf,
            inverse: InverseProvider::Exact,
            workers: 0,
        };
        assert!(cfg.validate().is_ok());

        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 10;

        cfg.snr_db_list.clear();
        assert!(cfg.validate().is_err());
        cfg.snr_db_list = vec![10.0];

        cfg.n_users = 9;
        assert!(cfg.validate().is_err());
        cfg.n_users = 4;

        cfg.modulation = 32;
        assert!(cfg.validate().is_err());
        cfg.modulation = 4;

        cfg.detector = Detector::SdProposed;
        assert!(cfg.validate().is_err(), "proposed SD with an exact inverse");
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# sweep setup\nn = 16\nk-users = 16\nsnr = 4,8,12\ninverse = newton:7\n",
        )
        .unwrap();
        let map = parse_config_file(&path).unwrap();
        assert_eq!(map["n"], "16");
        assert_eq!(map["k-users"], "16");
        assert_eq!(map["snr"], "4,8,12");
        assert_eq!(map["inverse"], "newton:7");

        std::fs::write(&path, "nonsense line\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }
}
