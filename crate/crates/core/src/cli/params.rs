//! Parameter files for `construct` and `convert`. Operators are given inline
//! in the matrix format or as a path to such a file, relative to the
//! parameter file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::json::{read_state, MatrixJson};
use crate::qops::{gibbs_state, DensityOperator, GibbsContext};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Path(PathBuf),
    Inline(MatrixJson),
}

/// Every field any parameter file may carry; each command checks that the
/// ones it needs are present and rejects the ones it would ignore.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub rho: Option<OperatorSpec>,
    pub rho_p: Option<OperatorSpec>,
    pub eta: Option<OperatorSpec>,
    pub eta_p: Option<OperatorSpec>,
    pub sigma: Option<OperatorSpec>,
    pub kappa: Option<OperatorSpec>,
    pub sigma_p: Option<OperatorSpec>,
    pub kappa_p: Option<OperatorSpec>,
    pub hamiltonian: Option<OperatorSpec>,
    pub gibbs: Option<OperatorSpec>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub w: Option<f64>,
    pub t: Option<f64>,
    pub u: Option<f64>,
    pub n_max: Option<usize>,
    pub m_max: Option<usize>,
    #[serde(skip)]
    base: PathBuf,
}

macro_rules! present_fields {
    ($self:ident; $($f:ident),*) => {{
        let mut v: Vec<&'static str> = Vec::new();
        $(if $self.$f.is_some() { v.push(stringify!($f)); })*
        v
    }};
}

impl Params {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut p: Params = serde_json::from_str(&text)?;
        p.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(p)
    }

    fn present(&self) -> Vec<&'static str> {
        present_fields!(self; rho, rho_p, eta, eta_p, sigma, kappa, sigma_p, kappa_p, hamiltonian, gibbs,
            beta, eps, delta, w, t, u, n_max, m_max)
    }

    /// Rejects fields outside `allowed`, so a misplaced key is not silently ignored.
    pub fn only(&self, command: &str, allowed: &[&str]) -> Result<()> {
        let extra: Vec<&str> = self.present().into_iter().filter(|f| !allowed.contains(f)).collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(Error::arg(format!("{command} does not take {}", extra.join(", "))))
        }
    }

    pub fn state(&self, spec: &Option<OperatorSpec>, name: &str, tol: &Tolerances) -> Result<DensityOperator> {
        match spec {
            None => Err(Error::arg(format!("missing {name}"))),
            Some(OperatorSpec::Inline(m)) => m.to_density(tol),
            Some(OperatorSpec::Path(p)) => read_state(&self.base.join(p), tol),
        }
    }

    pub fn scalar(v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::arg(format!("missing {name}")))
    }

    /// Thermal context from exactly one of `hamiltonian` or `gibbs`.
    pub fn context(&self, tol: &Tolerances) -> Result<GibbsContext> {
        let beta = self.beta.unwrap_or(1.0);
        match (&self.hamiltonian, &self.gibbs) {
            (Some(h), None) => {
                let m = match h {
                    OperatorSpec::Inline(m) => m.clone(),
                    OperatorSpec::Path(p) => serde_json::from_str(&std::fs::read_to_string(self.base.join(p))?)?,
                };
                gibbs_state(&m.to_hermitian(tol)?, beta)
            }
            (None, Some(_)) => GibbsContext::from_state(self.state(&self.gibbs, "gibbs", tol)?, beta),
            _ => Err(Error::arg("give exactly one of hamiltonian or gibbs")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<Params>(r#"{"rho": "a.json", "epsilon": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("epsilon"));
    }

    #[test]
    fn inline_and_path_states() {
        let p: Params = serde_json::from_str(
            r#"{"rho": {"dims": [2], "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]}, "rho_p": "b.json"}"#,
        )
        .unwrap();
        assert!(matches!(p.rho, Some(OperatorSpec::Inline(_))));
        assert!(matches!(p.rho_p, Some(OperatorSpec::Path(_))));
        assert!(p.only("x", &["rho"]).is_err());
        assert!(p.only("x", &["rho", "rho_p"]).is_ok());
    }

    #[test]
    fn context_needs_exactly_one_source() {
        let p = Params::default();
        assert!(p.context(&Tolerances::DEFAULT).is_err());
    }
}
