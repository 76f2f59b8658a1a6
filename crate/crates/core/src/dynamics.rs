//! The discrete-time symplectic map in phase space, the induced closed map
//! on the generators, and trajectory generation.
//!
//! Phase-space step:
//!
//! ```text
//! q_k(t+h) = V_A lambda_k + 2 V_B q_k(t) - p_k(t)
//! p_k(t+h) = q_k(t)
//! ```
//!
//! The same dynamics closes on the six generators; the two evaluation
//! routes commute with the realization, which is what `closure_check`
//! measures.

use std::collections::BTreeMap;

use crate::algebra::{realize, GeneratorState, ModelContext, PhasePoint};
use crate::error::Error;
use crate::invariants::{eval_invariant, InvariantId, InvariantParams};
use crate::potential::{eval_potential, PotentialEval, PotentialSpec};

/// Orbits abort once the sup norm exceeds this bound.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// One step of the map in Darboux coordinates.
pub fn step_phase(
    point: &PhasePoint,
    spec: &PotentialSpec,
    ctx: &ModelContext,
) -> Result<PhasePoint, Error> {
    let g = realize(point, ctx)?;
    let pe = eval_potential(spec, g.a_minus, g.b_minus, g.m).map_err(|e| match e {
        Error::Domain { context, message } => Error::Domain {
            context,
            message: format!("{message} at q = {:?}, p = {:?}", point.q, point.p),
        },
        other => other,
    })?;
    let q_new: Vec<f64> = point
        .q
        .iter()
        .zip(&point.p)
        .zip(&ctx.lambda)
        .map(|((q, p), l)| pe.v_a * l + 2.0 * pe.v_b * q - p)
        .collect();
    PhasePoint::new(q_new, point.q.clone())
}

/// One step of the closed dynamics on the generators.
pub fn step_generators(gen: &GeneratorState, spec: &PotentialSpec) -> Result<GeneratorState, Error> {
    let PotentialEval { v_a, v_b, .. } = eval_potential(spec, gen.a_minus, gen.b_minus, gen.m)?;
    Ok(GeneratorState {
        k: -gen.k + gen.a_minus * v_a + 2.0 * gen.b_minus * v_b - gen.m,
        a_plus: gen.a_minus,
        a_minus: gen.m * v_a + 2.0 * gen.a_minus * v_b - gen.a_plus,
        b_plus: gen.b_minus,
        b_minus: gen.m * v_a * v_a + 4.0 * gen.a_minus * v_a * v_b + 4.0 * gen.b_minus * v_b * v_b
            - 2.0 * gen.a_plus * v_a
            - 2.0 * v_b * (2.0 * gen.k + gen.m)
            + gen.b_plus,
        m: gen.m,
    })
}

/// A computed orbit with per-step generator states and invariant values.
#[derive(Clone, Debug)]
pub struct TrajectoryEntry {
    pub step: usize,
    pub point: PhasePoint,
    pub gen: GeneratorState,
    pub invariants: BTreeMap<InvariantId, f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub entries: Vec<TrajectoryEntry>,
    pub invariant_ids: Vec<InvariantId>,
}

impl Trajectory {
    /// CSV rows with 17 significant digits:
    /// `step,q1..qN,p1..pN,K,Ap,Am,Bp,Bm,M,<invariants>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let n = self
            .entries
            .first()
            .map(|e| e.point.dof())
            .unwrap_or(0);
        let mut header = vec!["step".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        for g in ["K", "Ap", "Am", "Bp", "Bm", "M"] {
            header.push(g.to_string());
        }
        header.extend(self.invariant_ids.iter().map(|id| id.label()));
        out.push_str(&header.join(","));
        out.push('\n');
        for e in &self.entries {
            let mut row = vec![e.step.to_string()];
            for v in e.point.q.iter().chain(&e.point.p).chain(&e.gen.as_array()) {
                row.push(format!("{v:.16e}"));
            }
            for id in &self.invariant_ids {
                row.push(format!("{:.16e}", e.invariants[id]));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Iterate the phase map, recording the realization and the requested
/// invariants each step. Step 0 is the initial condition.
pub fn trajectory(
    point0: &PhasePoint,
    spec: &PotentialSpec,
    ctx: &ModelContext,
    steps: usize,
    ids: &[InvariantId],
    params: &InvariantParams,
) -> Result<Trajectory, Error> {
    let mut entries = Vec::with_capacity(steps + 1);
    let mut point = point0.clone();
    for step in 0..=steps {
        let mag = point.norm_inf();
        if !mag.is_finite() {
            return Err(Error::NonFinite(step));
        }
        if mag > DIVERGENCE_GUARD {
            return Err(Error::Diverged {
                step,
                magnitude: mag,
            });
        }
        let gen = realize(&point, ctx)?;
        let mut invariants = BTreeMap::new();
        for id in ids {
            invariants.insert(*id, eval_invariant(*id, &point, ctx, params)?);
        }
        entries.push(TrajectoryEntry {
            step,
            point: point.clone(),
            gen,
            invariants,
        });
        if step < steps {
            point = step_phase(&point, spec, ctx)?;
        }
    }
    Ok(Trajectory {
        entries,
        invariant_ids: ids.to_vec(),
    })
}

/// Max discrepancy between the two evaluation routes,
/// `realize(step_phase(x))` versus `step_generators(realize(x))`,
/// normalized by the largest generator magnitude involved.
pub fn closure_check(
    point: &PhasePoint,
    spec: &PotentialSpec,
    ctx: &ModelContext,
) -> Result<f64, Error> {
    let via_phase = realize(&step_phase(point, spec, ctx)?, ctx)?;
    let via_gen = step_generators(&realize(point, ctx)?, spec)?;
    let a = via_phase.as_array();
    let b = via_gen.as_array();
    let scale = a
        .iter()
        .chain(b.iter())
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let max_abs = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    Ok(max_abs / scale)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::{parse_expr, parse_expr_with_vars};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> PhasePoint {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PhasePoint::new(q, p).unwrap()
    }

    pub(crate) fn classified_specs() -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::V1 {
                a_plus: 0.3,
                varkappa: 0.5,
            },
            PotentialSpec::V2I { kappa: 0.5 },
            PotentialSpec::V2II {
                eta: 0.1,
                zeta: 0.2,
                kappa: 0.5,
            },
            PotentialSpec::V1s {
                f: parse_expr("0.1*sin(Y)").unwrap(),
            },
            PotentialSpec::V2Is {
                alpha: 0.5,
                g: parse_expr("0.1*sin(Y)").unwrap(),
            },
            PotentialSpec::V2IIs {
                alpha: 0.5,
                a_plus: 0.3,
                f: parse_expr("0.1*sin(Y)").unwrap(),
            },
            PotentialSpec::DPin { alpha: 1.0 },
        ]
    }

    #[test]
    fn v1_degenerate_shear() {
        // kappa = -2, a_plus = 0 gives (q, p) -> (2q - p, q)
        let spec = PotentialSpec::V1 {
            a_plus: 0.0,
            varkappa: -2.0,
        };
        let point = PhasePoint::new(vec![1.5, -0.5], vec![0.25, 1.0]).unwrap();
        let ctx = ModelContext::new(vec![1.0, 0.5], 0.1).unwrap();
        let next = step_phase(&point, &spec, &ctx).unwrap();
        assert_eq!(next.q, vec![2.75, -2.0]);
        assert_eq!(next.p, point.q);
    }

    #[test]
    fn v2ii_origin_fixed_point() {
        let spec = PotentialSpec::V2II {
            eta: 1.0,
            zeta: 0.0,
            kappa: 0.7,
        };
        let point = PhasePoint::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let ctx = ModelContext::new(vec![1.0, 0.5], 0.1).unwrap();
        let next = step_phase(&point, &spec, &ctx).unwrap();
        assert_eq!(next.q, vec![0.0, 0.0]);
        assert_eq!(next.p, vec![0.0, 0.0]);
    }

    #[test]
    fn dpin_step_scalar_oracle() {
        // q_k(t+h) = alpha q_k/|q|^2 + lambda_k - q_k - p_k rearranged to
        // map form via V_A = 1, V_B = -1/2 + alpha/(2 B-)
        let spec = PotentialSpec::DPin { alpha: 1.0 };
        let q = vec![1.0, 0.5];
        let p = vec![0.0, 0.0];
        let point = PhasePoint::new(q.clone(), p.clone()).unwrap();
        let ctx = ModelContext::new(vec![1.0, 1.0], 0.1).unwrap();
        let next = step_phase(&point, &spec, &ctx).unwrap();
        let q2: f64 = q.iter().map(|x| x * x).sum();
        for k in 0..2 {
            let want = 1.0 * q[k] / q2 + 1.0 - q[k] - p[k];
            assert!((next.q[k] - want).abs() < 1e-14, "component {k}");
        }
    }

    #[test]
    fn generator_step_preserves_m_and_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        for spec in classified_specs() {
            let g = realize(&random_point(&mut rng, 3), &ctx).unwrap();
            let g2 = step_generators(&g, &spec).unwrap();
            assert_eq!(g2.m, g.m, "{}", spec.name());
            assert_eq!(g2.a_plus, g.a_minus, "{}", spec.name());
            assert_eq!(g2.b_plus, g.b_minus, "{}", spec.name());
        }
    }

    #[test]
    fn closure_for_all_classified_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 5] {
            let ctx = ModelContext::new(ModelContext::default_lambda(n), 0.1).unwrap();
            for spec in classified_specs() {
                for _ in 0..20 {
                    let point = random_point(&mut rng, n);
                    let d = closure_check(&point, &spec, &ctx).unwrap();
                    assert!(d < 1e-10, "{} at N = {n}: discrepancy {d:.3e}", spec.name());
                }
            }
        }
    }

    #[test]
    fn closure_for_custom_potential() {
        let spec = PotentialSpec::Custom {
            expr: parse_expr_with_vars("Am*Bm", &["Am", "Bm", "M"]).unwrap(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ctx = ModelContext::new(ModelContext::default_lambda(4), 0.1).unwrap();
        for _ in 0..20 {
            let d = closure_check(&random_point(&mut rng, 4), &spec, &ctx).unwrap();
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn broken_potential_breaks_closure() {
        // a raw function of q1 alone is not a function of (A-, B-, M):
        // stepping with its gradient and re-realizing disagrees with any
        // generator-space route
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        let point = PhasePoint::new(vec![0.7, 0.4, 0.9], vec![0.1, -0.2, 0.3]).unwrap();
        // dV/dq = (3 q1^2, 0, 0) for V = q1^3
        let q_new: Vec<f64> = point
            .q
            .iter()
            .zip(&point.p)
            .enumerate()
            .map(|(k, (q, p))| {
                let dv = if k == 0 { 3.0 * q * q } else { 0.0 };
                dv - p
            })
            .collect();
        let stepped = PhasePoint::new(q_new, point.q.clone()).unwrap();
        let via_phase = realize(&stepped, &ctx).unwrap();
        // compare against the closed-map prediction for the best-matching
        // classified family (any of them); use V1 with matched V_B = 0
        let via_gen = step_generators(
            &realize(&point, &ctx).unwrap(),
            &PotentialSpec::V1 {
                a_plus: 0.0,
                varkappa: 0.0,
            },
        )
        .unwrap();
        let diff = via_phase
            .as_array()
            .iter()
            .zip(&via_gen.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(diff > 1e-3);
    }

    #[test]
    fn symplecticity_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 3;
        let ctx = ModelContext::new(ModelContext::default_lambda(n), 0.1).unwrap();
        let h = 1e-6;
        for spec in classified_specs() {
            let point = random_point(&mut rng, n);
            let base: Vec<f64> = point.q.iter().chain(&point.p).copied().collect();
            // Jacobian columns by central differences
            let dim = 2 * n;
            let mut jac = vec![vec![0.0; dim]; dim];
            for j in 0..dim {
                let mut xp = base.clone();
                let mut xm = base.clone();
                xp[j] += h;
                xm[j] -= h;
                let pp = PhasePoint::new(xp[..n].to_vec(), xp[n..].to_vec()).unwrap();
                let pm = PhasePoint::new(xm[..n].to_vec(), xm[n..].to_vec()).unwrap();
                let fp = step_phase(&pp, &spec, &ctx).unwrap();
                let fm = step_phase(&pm, &spec, &ctx).unwrap();
                let fpv: Vec<f64> = fp.q.iter().chain(&fp.p).copied().collect();
                let fmv: Vec<f64> = fm.q.iter().chain(&fm.p).copied().collect();
                for i in 0..dim {
                    jac[i][j] = (fpv[i] - fmv[i]) / (2.0 * h);
                }
            }
            // omega(u, v) = u_q . v_p - u_p . v_q; check J^T Omega J = Omega
            let omega = |a: &[f64], b: &[f64]| {
                (0..n)
                    .map(|i| a[i] * b[n + i] - a[n + i] * b[i])
                    .sum::<f64>()
            };
            for r in 0..dim {
                for c in 0..dim {
                    let col_r: Vec<f64> = (0..dim).map(|i| jac[i][r]).collect();
                    let col_c: Vec<f64> = (0..dim).map(|i| jac[i][c]).collect();
                    let want = if c == r + n {
                        1.0
                    } else if r == c + n {
                        -1.0
                    } else {
                        0.0
                    };
                    assert!(
                        (omega(&col_r, &col_c) - want).abs() < 1e-6,
                        "{} entry ({r}, {c})",
                        spec.name()
                    );
                }
            }
        }
    }

    #[test]
    fn time_reversal() {
        // swapping (q, p) -> (p, q) and stepping once returns the start
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 3;
        let ctx = ModelContext::new(ModelContext::default_lambda(n), 0.1).unwrap();
        for spec in classified_specs() {
            let point = random_point(&mut rng, n);
            let fwd = step_phase(&point, &spec, &ctx).unwrap();
            let swapped = PhasePoint::new(fwd.p.clone(), fwd.q.clone()).unwrap();
            let back = step_phase(&swapped, &spec, &ctx).unwrap();
            for k in 0..n {
                assert!((back.q[k] - point.p[k]).abs() < 1e-10, "{}", spec.name());
                assert!((back.p[k] - point.q[k]).abs() < 1e-10, "{}", spec.name());
            }
        }
    }

    #[test]
    fn trajectory_zero_steps() {
        let spec = PotentialSpec::V1 {
            a_plus: 0.0,
            varkappa: 0.5,
        };
        let ctx = ModelContext::new(ModelContext::default_lambda(2), 0.1).unwrap();
        let point = PhasePoint::new(vec![1.0, 0.5], vec![0.0, 0.0]).unwrap();
        let t = trajectory(&point, &spec, &ctx, 0, &[], &InvariantParams::default()).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].point, point);
    }

    #[test]
    fn elliptic_v1_bounded() {
        let spec = PotentialSpec::V1 {
            a_plus: 0.3,
            varkappa: 0.5,
        };
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        let point = PhasePoint::new(vec![1.0, 0.3, -0.4], vec![0.2, 0.0, 0.1]).unwrap();
        let t = trajectory(&point, &spec, &ctx, 10_000, &[], &InvariantParams::default()).unwrap();
        let max = t
            .entries
            .iter()
            .map(|e| e.point.norm_inf())
            .fold(0.0f64, f64::max);
        assert!(max < 100.0, "orbit magnitude {max}");
    }

    #[test]
    fn hyperbolic_v1_diverges() {
        let spec = PotentialSpec::V1 {
            a_plus: 0.0,
            varkappa: 3.0,
        };
        let ctx = ModelContext::new(ModelContext::default_lambda(2), 0.1).unwrap();
        let point = PhasePoint::new(vec![1.0, 0.5], vec![0.0, 0.0]).unwrap();
        let res = trajectory(&point, &spec, &ctx, 10_000, &[], &InvariantParams::default());
        assert!(matches!(res, Err(Error::Diverged { .. })));
    }

    #[test]
    fn casimir_preserved_along_orbits() {
        use crate::algebra::casimir;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let ctx = ModelContext::new(ModelContext::default_lambda(4), 0.1).unwrap();
        for spec in classified_specs() {
            let mut point = random_point(&mut rng, 4);
            if matches!(spec, PotentialSpec::V2I { .. }) {
                // the lambda projection of the V2I map is parabolic (double
                // multiplier 1); kill the linear-growth mode so round-off
                // in the degree-4 Casimir stays at machine scale
                let m: f64 = ctx.lambda.iter().map(|l| l * l).sum();
                let excess: f64 = ctx
                    .lambda
                    .iter()
                    .zip(point.q.iter().zip(&point.p))
                    .map(|(l, (q, p))| l * (q - p))
                    .sum();
                for (p, l) in point.p.iter_mut().zip(&ctx.lambda) {
                    *p += l * excess / m;
                }
            }
            let t = trajectory(&point, &spec, &ctx, 200, &[], &InvariantParams::default());
            let t = match t {
                Ok(t) => t,
                Err(Error::Diverged { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let c0 = casimir(&t.entries[0].gen);
            // the Casimir is cubic in the generators, so round-off enters at
            // eps * |gen|^3; normalize the drift accordingly
            let scale = t
                .entries
                .iter()
                .map(|e| {
                    e.gen
                        .as_array()
                        .iter()
                        .fold(1.0f64, |acc, g| acc.max(g.abs()))
                })
                .fold(1.0f64, f64::max)
                .powi(3);
            for e in &t.entries {
                assert!(
                    (casimir(&e.gen) - c0).abs() / scale < 1e-10,
                    "{} step {}",
                    spec.name(),
                    e.step
                );
            }
        }
    }

    #[test]
    fn csv_shape() {
        let spec = PotentialSpec::V1 {
            a_plus: 0.1,
            varkappa: 0.5,
        };
        let ctx = ModelContext::new(ModelContext::default_lambda(2), 0.1).unwrap();
        let point = PhasePoint::new(vec![1.0, 0.5], vec![0.0, 0.0]).unwrap();
        let params = InvariantParams {
            varkappa: Some(0.5),
            a_plus: Some(0.1),
            ..Default::default()
        };
        let t = trajectory(&point, &spec, &ctx, 3, &[InvariantId::I1], &params).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "step,q1,q2,p1,p2,K,Ap,Am,Bp,Bm,M,I1");
    }
}
