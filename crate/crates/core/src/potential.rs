//! The classified potential families V(A-, B-, M) and their first partials.
//!
//! The polynomial families carry closed-form partials; the singular
//! families propagate dual numbers through the user-supplied F or G so the
//! chain rule through the composite arguments (e.g. Y = M B- - A-^2) is
//! applied exactly at machine precision.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{realize, ModelContext, PhasePoint};
use crate::error::Error;
use crate::expr::{Dual2, ExprTree};

/// A potential family with its parameters.
///
/// Singular-family nondegeneracy (d3G/dY3 != 0 for `V2Is`, d2F/dY2 != 0
/// for `V1s` and `V2IIs`) is assumed, not enforced; degenerate choices
/// collapse onto the polynomial families.
#[derive(Clone, Debug)]
pub enum PotentialSpec {
    /// V = -a_plus A- - (varkappa/2) B-
    V1 { a_plus: f64, varkappa: f64 },
    /// V = ((kappa + 2)/(2M)) A-^2 - (kappa/2) B-
    V2I { kappa: f64 },
    /// V = -(eta/2) A-^2 - zeta A- - (kappa/2) B-
    V2II { eta: f64, zeta: f64, kappa: f64 },
    /// V = B- + F(M, M B- - A-^2)
    V1s { f: ExprTree },
    /// V = -(alpha/2) B- + G(M, A-)
    V2Is { alpha: f64, g: ExprTree },
    /// V = -(alpha/2) B- - (a_plus/M) A- + F(M, M B- - A-^2)
    V2IIs { alpha: f64, a_plus: f64, f: ExprTree },
    /// V = A- - B-/2 + (alpha/2) log B-; requires B- > 0 along orbits
    DPin { alpha: f64 },
    /// Arbitrary expression in the variables Am, Bm, M
    Custom { expr: ExprTree },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::V1 { .. } => "V1",
            PotentialSpec::V2I { .. } => "V2I",
            PotentialSpec::V2II { .. } => "V2II",
            PotentialSpec::V1s { .. } => "V1s",
            PotentialSpec::V2Is { .. } => "V2Is",
            PotentialSpec::V2IIs { .. } => "V2IIs",
            PotentialSpec::DPin { .. } => "dPIN",
            PotentialSpec::Custom { .. } => "Custom",
        }
    }
}

/// Value and first partials of a potential at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialEval {
    pub v: f64,
    pub v_a: f64,
    pub v_b: f64,
}

/// Jet of the composite argument Y = M B- - A-^2 with derivative
/// directions (A-, B-).
fn inner_mb_minus_a2(a: f64, b: f64, m: f64) -> Dual2 {
    Dual2 {
        v: m * b - a * a,
        d: [-2.0 * a, m, 0.0],
    }
}

/// Evaluate V and (dV/dA-, dV/dB-) for the given family.
pub fn eval_potential(spec: &PotentialSpec, a: f64, b: f64, m: f64) -> Result<PotentialEval, Error> {
    match spec {
        PotentialSpec::V1 { a_plus, varkappa } => Ok(PotentialEval {
            v: -a_plus * a - varkappa / 2.0 * b,
            v_a: -a_plus,
            v_b: -varkappa / 2.0,
        }),
        PotentialSpec::V2I { kappa } => {
            if m == 0.0 {
                return Err(Error::Domain {
                    context: "V2I".into(),
                    message: "M must be nonzero".into(),
                });
            }
            Ok(PotentialEval {
                v: (kappa + 2.0) / (2.0 * m) * a * a - kappa / 2.0 * b,
                v_a: (kappa + 2.0) * a / m,
                v_b: -kappa / 2.0,
            })
        }
        PotentialSpec::V2II { eta, zeta, kappa } => Ok(PotentialEval {
            v: -eta / 2.0 * a * a - zeta * a - kappa / 2.0 * b,
            v_a: -eta * a - zeta,
            v_b: -kappa / 2.0,
        }),
        PotentialSpec::V1s { f } => {
            let out = f.eval_dual(&[Dual2::constant(m), inner_mb_minus_a2(a, b, m)])?;
            Ok(PotentialEval {
                v: b + out.v,
                v_a: out.d[0],
                v_b: 1.0 + out.d[1],
            })
        }
        PotentialSpec::V2Is { alpha, g } => {
            let out = g.eval_dual(&[Dual2::constant(m), Dual2::seed(a, 0)])?;
            Ok(PotentialEval {
                v: -alpha / 2.0 * b + out.v,
                v_a: out.d[0],
                v_b: -alpha / 2.0,
            })
        }
        PotentialSpec::V2IIs { alpha, a_plus, f } => {
            if m == 0.0 {
                return Err(Error::Domain {
                    context: "V2IIs".into(),
                    message: "M must be nonzero".into(),
                });
            }
            let out = f.eval_dual(&[Dual2::constant(m), inner_mb_minus_a2(a, b, m)])?;
            Ok(PotentialEval {
                v: -alpha / 2.0 * b - a_plus / m * a + out.v,
                v_a: -a_plus / m + out.d[0],
                v_b: -alpha / 2.0 + out.d[1],
            })
        }
        PotentialSpec::DPin { alpha } => {
            if b <= 0.0 {
                return Err(Error::Domain {
                    context: "dPIN".into(),
                    message: format!("log requires B- > 0, got {b}"),
                });
            }
            Ok(PotentialEval {
                v: a - b / 2.0 + alpha / 2.0 * b.ln(),
                v_a: 1.0,
                v_b: -0.5 + alpha / (2.0 * b),
            })
        }
        PotentialSpec::Custom { expr } => {
            let out = expr.eval_dual(&[
                Dual2::seed(a, 0),
                Dual2::seed(b, 1),
                Dual2::constant(m),
            ])?;
            Ok(PotentialEval {
                v: out.v,
                v_a: out.d[0],
                v_b: out.d[1],
            })
        }
    }
}

/// Gradient of V with respect to q: (grad V)_k = V_A lambda_k + 2 V_B q_k,
/// with (A-, B-, M) read off the realization at `point`.
pub fn grad_q(spec: &PotentialSpec, point: &PhasePoint, ctx: &ModelContext) -> Result<Vec<f64>, Error> {
    let g = realize(point, ctx)?;
    let pe = eval_potential(spec, g.a_minus, g.b_minus, g.m)?;
    Ok(point
        .q
        .iter()
        .zip(&ctx.lambda)
        .map(|(q, l)| pe.v_a * l + 2.0 * pe.v_b * q)
        .collect())
}

/// True iff the potential actually depends on A- somewhere: samples random
/// points and checks |dV/dA-| > 1e-12 at at least one. A false return
/// flags a potential with only sl2 dependence; callers should warn, not
/// reject.
pub fn consistency_flag(spec: &PotentialSpec, samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(0.5..2.0);
        let m: f64 = rng.gen_range(0.5..2.0);
        if let Ok(pe) = eval_potential(spec, a, b, m) {
            if pe.v_a.abs() > 1e-12 {
                return true;
            }
        }
    }
    false
}
