//! Run configuration: a JSON document describing the model (N, lambda, h),
//! the potential family with its parameters, the physical constants used by
//! the continuum harness, and the RNG seed.
//!
//! Schema (all floats are IEEE doubles, expressions are strings in the
//! grammar of [`crate::expr`]):
//!
//! ```json
//! {
//!   "n": 4,
//!   "lambda": [1.0, 0.5, 0.33, 0.25],
//!   "h": 0.1,
//!   "seed": 7,
//!   "potential": {
//!     "family": "V1",
//!     "a_plus": 0.3,
//!     "varkappa": 0.5
//!   },
//!   "omega": 1.0,
//!   "gamma": 0.5,
//!   "delta": 0.0,
//!   "q0": [0.4, 0.3, 0.2, 0.1],
//!   "p0": [0.0, 0.0, 0.0, 0.0]
//! }
//! ```
//!
//! `lambda` defaults to (1, 1/2, ..., 1/N). Families and their parameters:
//! V1 {a_plus, varkappa}, V2I {kappa}, V2II {eta, zeta, kappa}, V1s {f},
//! V2Is {alpha, g}, V2IIs {alpha, a_plus, f}, dPIN {alpha},
//! Custom {expr} over (Am, Bm, M). The f/g fields are expressions in (X, Y).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{ModelContext, PhasePoint};
use crate::continuum::{FamilyTag, ScalingRule};
use crate::error::Error;
use crate::expr::{parse_expr, parse_expr_with_vars};
use crate::invariants::{InvariantId, InvariantParams};
use crate::potential::PotentialSpec;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varkappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub h: f64,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,
}

fn need(v: Option<f64>, family: &str, name: &str) -> Result<f64, Error> {
    v.ok_or_else(|| Error::Config(format!("{family} requires `{name}`")))
}

fn need_expr<'a>(v: &'a Option<String>, family: &str, name: &str) -> Result<&'a str, Error> {
    v.as_deref()
        .ok_or_else(|| Error::Config(format!("{family} requires `{name}`")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if let Some(lam) = &self.lambda {
            if lam.len() != self.n {
                return Err(Error::Config(format!(
                    "lambda has {} entries, expected n = {}",
                    lam.len(),
                    self.n
                )));
            }
        }
        self.context()?;
        self.spec()?;
        for (name, v) in [("q0", &self.q0), ("p0", &self.p0)] {
            if let Some(v) = v {
                if v.len() != self.n {
                    return Err(Error::Config(format!(
                        "{name} has {} entries, expected n = {}",
                        v.len(),
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn lambda_vec(&self) -> Vec<f64> {
        self.lambda
            .clone()
            .unwrap_or_else(|| ModelContext::default_lambda(self.n))
    }

    pub fn context(&self) -> Result<ModelContext, Error> {
        ModelContext::new(self.lambda_vec(), self.h)
    }

    pub fn spec(&self) -> Result<PotentialSpec, Error> {
        self.potential.build()
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec, Error> {
        let p = self;
        let fam = p.family.as_str();
        Ok(match fam {
            "V1" => PotentialSpec::V1 {
                a_plus: need(p.a_plus, fam, "a_plus")?,
                varkappa: need(p.varkappa, fam, "varkappa")?,
            },
            "V2I" => PotentialSpec::V2I {
                kappa: need(p.kappa, fam, "kappa")?,
            },
            "V2II" => PotentialSpec::V2II {
                eta: need(p.eta, fam, "eta")?,
                zeta: need(p.zeta, fam, "zeta")?,
                kappa: need(p.kappa, fam, "kappa")?,
            },
            "V1s" => PotentialSpec::V1s {
                f: parse_expr(need_expr(&p.f, fam, "f")?)?,
            },
            "V2Is" => PotentialSpec::V2Is {
                alpha: need(p.alpha, fam, "alpha")?,
                g: parse_expr(need_expr(&p.g, fam, "g")?)?,
            },
            "V2IIs" => PotentialSpec::V2IIs {
                alpha: need(p.alpha, fam, "alpha")?,
                a_plus: need(p.a_plus, fam, "a_plus")?,
                f: parse_expr(need_expr(&p.f, fam, "f")?)?,
            },
            "dPIN" => PotentialSpec::DPin {
                alpha: need(p.alpha, fam, "alpha")?,
            },
            "Custom" => PotentialSpec::Custom {
                expr: parse_expr_with_vars(
                    need_expr(&p.expr, fam, "expr")?,
                    &["Am", "Bm", "M"],
                )?,
            },
            _ => return Err(Error::Config(format!("unknown family `{fam}`"))),
        })
    }
}

impl RunConfig {
    pub fn invariant_params(&self) -> InvariantParams {
        let p = &self.potential;
        InvariantParams {
            varkappa: p.varkappa,
            a_plus: p.a_plus,
            kappa: p.kappa,
            eta: p.eta,
            zeta: p.zeta,
            alpha: p.alpha,
        }
    }

    /// Named invariants registered for the configured family, followed by
    /// the Casimir chain C, Cl(3..N), Cr(3..N-1).
    pub fn registered_invariants(&self) -> Vec<InvariantId> {
        let mut ids: Vec<InvariantId> = match self.potential.family.as_str() {
            "V1" => vec![InvariantId::I1, InvariantId::J1, InvariantId::J1Hat],
            "V2I" => vec![InvariantId::I2I, InvariantId::I1s],
            "V2II" => vec![InvariantId::I2IIa, InvariantId::I2IIb],
            "V1s" => vec![InvariantId::I1s],
            "V2Is" => vec![InvariantId::I2Is],
            "V2IIs" => vec![InvariantId::I2IIs],
            _ => vec![],
        };
        ids.push(InvariantId::C);
        ids.extend((3..=self.n).map(InvariantId::Cleft));
        ids.extend((3..self.n).map(InvariantId::Cright));
        ids
    }

    pub fn initial_point(&self) -> Result<PhasePoint, Error> {
        let q = self
            .q0
            .clone()
            .unwrap_or_else(|| (0..self.n).map(|i| 0.4 / (i + 1) as f64).collect());
        let p = self.p0.clone().unwrap_or_else(|| vec![0.0; self.n]);
        PhasePoint::new(q, p)
    }

    /// Scaling rule for the continuum harness; requires omega (and the
    /// profile expression for singular families).
    pub fn scaling_rule(&self) -> Result<ScalingRule, Error> {
        let family = FamilyTag::parse(&self.potential.family)?;
        let profile = if family.is_singular() {
            let text = self
                .potential
                .f
                .as_deref()
                .or(self.potential.g.as_deref())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{} needs an f/g profile for the continuum harness",
                        family.label()
                    ))
                })?;
            Some(parse_expr(text)?)
        } else {
            None
        };
        Ok(ScalingRule {
            family,
            omega: self
                .omega
                .ok_or_else(|| Error::Config("continuum commands require `omega`".into()))?,
            gamma: self.gamma.unwrap_or(0.0),
            delta: self.delta.unwrap_or(0.0),
            profile,
        })
    }
}
