//! Command-line margin syntax: `name[:key=value,...]`, or an inline JSON
//! document `{"kind": ..., "params": ...}`.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::{MarginError, MarginSpec};
use crate::scalar::Real;

const DEFAULT_MIXTURE_SIGMA: f64 = 0.05;

impl<T: Real> FromStr for MarginSpec<T> {
    type Err = MarginError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| MarginError::Parse(e.to_string()));
        }
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, r),
            None => (s, ""),
        };
        let mut params = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| MarginError::Parse(format!("expected key=value, got '{pair}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| MarginError::Parse(format!("'{v}' is not a number")))?;
            params.insert(k.trim().to_ascii_lowercase(), v);
        }
        let mut take = |key: &str, default: Option<f64>| -> Result<f64, MarginError> {
            params
                .remove(key)
                .or(default)
                .ok_or_else(|| MarginError::Parse(format!("margin '{name}' needs parameter '{key}'")))
        };
        let ell = |x: f64| -> Result<u32, MarginError> {
            if x.fract() != 0.0 || x < 0.0 || x > u32::MAX as f64 {
                Err(MarginError::Parse(format!("ell must be a non-negative integer, got {x}")))
            } else {
                Ok(x as u32)
            }
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "twopoint" => MarginSpec::TwoPointExtreme {
                ell: ell(take("ell", Some(2.0))?)?,
            },
            "fourpoint" => MarginSpec::SymmetricFourPoint {
                ell: ell(take("ell", Some(2.0))?)?,
            },
            "uniform" => MarginSpec::SymmetricUniform {
                ell: ell(take("ell", Some(2.0))?)?,
            },
            "mixture" => MarginSpec::GaussianMixture {
                ell: ell(take("ell", Some(2.0))?)?,
                sigma: T::lit(take("sigma", Some(DEFAULT_MIXTURE_SIGMA))?),
            },
            "normal" => MarginSpec::Normal {
                mu: T::lit(take("mu", Some(0.0))?),
                sigma: T::lit(take("sigma", Some(1.0))?),
            },
            "lognormal" => MarginSpec::LogNormal {
                beta: T::lit(take("beta", Some(1.0))?),
            },
            other => return Err(MarginError::Parse(format!("unknown margin '{other}'"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(MarginError::Parse(format!("unknown parameter '{extra}' for margin '{name}'")));
        }
        Ok(spec)
    }
}
