//! Numerical tolerances and size caps, gathered in one place so that the CLI
//! can override any of them with `--tol name=value`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative bound on `max|M - M†|` for an operator to count as Hermitian.
    pub hermitian: f64,
    /// Relative bound on negative eigenvalues for positivity checks.
    pub psd: f64,
    /// Absolute deviation of a density operator's trace from one.
    pub trace: f64,
    /// Eigenvalues below `support * ||M||` are treated as zero.
    pub support: f64,
    /// Mass of the first argument allowed outside the second's support
    /// before a divergence is declared infinite.
    pub support_mass: f64,
    /// Trace-norm residual allowed when checking channel identities.
    pub channel: f64,
    /// Slack on the type-I error of a hypothesis test.
    pub alpha: f64,
    /// Trace-distance bound for the catalyst being returned.
    pub catalyst_return: f64,
    /// Largest dense operator dimension handled anywhere.
    pub max_dim: usize,
    /// Largest channel input dimension for which a Choi matrix is formed.
    pub max_choi_input: usize,
    /// Largest single-block dimension for the dense conversion pipeline.
    pub max_pipeline_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        psd: 1e-10,
        trace: 1e-10,
        support: 1e-12,
        support_mass: 1e-12,
        channel: 1e-9,
        alpha: 1e-9,
        catalyst_return: 1e-9,
        max_dim: 4096,
        max_choi_input: 64,
        max_pipeline_dim: 256,
    };

    pub const NAMES: [&'static str; 11] = [
        "hermitian",
        "psd",
        "trace",
        "support",
        "support_mass",
        "channel",
        "alpha",
        "catalyst_return",
        "max_dim",
        "max_choi_input",
        "max_pipeline_dim",
    ];

    /// Override one field by name. Values must be positive; caps must be integers.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::arg(format!("tolerance {name} must be positive, got {value}")));
        }
        let as_cap = || -> Result<usize> {
            if value.fract() != 0.0 {
                return Err(Error::arg(format!("{name} must be an integer, got {value}")));
            }
            Ok(value as usize)
        };
        match name {
            "hermitian" => self.hermitian = value,
            "psd" => self.psd = value,
            "trace" => self.trace = value,
            "support" => self.support = value,
            "support_mass" => self.support_mass = value,
            "channel" => self.channel = value,
            "alpha" => self.alpha = value,
            "catalyst_return" => self.catalyst_return = value,
            "max_dim" => self.max_dim = as_cap()?,
            "max_choi_input" => self.max_choi_input = as_cap()?,
            "max_pipeline_dim" => self.max_pipeline_dim = as_cap()?,
            _ => {
                return Err(Error::arg(format!(
                    "unknown tolerance {name}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parse a `name=value` override and apply it.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::arg(format!("expected name=value, got {spec:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::arg(format!("tolerance value {value:?} is not a number")))?;
        self.set(name.trim(), value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_by_name() {
        let mut t = Tolerances::default();
        t.apply_override("psd=1e-8").unwrap();
        t.apply_override("max_dim=1024").unwrap();
        assert_eq!(t.psd, 1e-8);
        assert_eq!(t.max_dim, 1024);
    }

    #[test]
    fn rejects_bad_overrides() {
        let mut t = Tolerances::default();
        assert!(t.apply_override("psd=-1").is_err());
        assert!(t.apply_override("psd=0").is_err());
        assert!(t.apply_override("nope=1").is_err());
        assert!(t.apply_override("max_dim=1.5").is_err());
        assert!(t.apply_override("psd").is_err());
        assert_eq!(t, Tolerances::default());
    }
}
