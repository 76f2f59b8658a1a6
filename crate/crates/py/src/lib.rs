//! Python bindings: `Model` wraps the realization context, `Potential`
//! wraps a family specification, and a handful of module functions expose
//! the classification and continuum helpers.

use std::collections::BTreeMap;
use std::collections::HashMap;

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use h6map::algebra::{self, ModelContext, PhasePoint};
use h6map::classify;
use h6map::config::PotentialConfig;
use h6map::continuum::{self, FamilyTag, ScalingRule};
use h6map::dynamics;
use h6map::expr::parse_expr;
use h6map::invariants::{self, InvariantId, InvariantParams, SetName};
use h6map::poly::Rat;
use h6map::potential::PotentialSpec;

fn err(e: h6map::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params_from(dict: Option<HashMap<String, f64>>) -> PyResult<InvariantParams> {
    let mut out = InvariantParams::default();
    if let Some(map) = dict {
        for (key, value) in map {
            match key.as_str() {
                "varkappa" => out.varkappa = Some(value),
                "a_plus" => out.a_plus = Some(value),
                "kappa" => out.kappa = Some(value),
                "eta" => out.eta = Some(value),
                "zeta" => out.zeta = Some(value),
                "alpha" => out.alpha = Some(value),
                other => {
                    return Err(PyValueError::new_err(format!(
                        "unknown invariant parameter `{other}`"
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn ids_from(labels: Vec<String>) -> PyResult<Vec<InvariantId>> {
    labels
        .iter()
        .map(|s| InvariantId::from_label(s).map_err(err))
        .collect()
}

fn rule_from(
    family: &str,
    omega: f64,
    gamma: f64,
    delta: f64,
    profile: Option<&str>,
) -> PyResult<ScalingRule> {
    let family = FamilyTag::parse(family).map_err(err)?;
    let profile = match profile {
        Some(text) => Some(parse_expr(text).map_err(err)?),
        None => None,
    };
    Ok(ScalingRule {
        family,
        omega,
        gamma,
        delta,
        profile,
    })
}

/// One classified potential family with its parameters.
#[pyclass]
#[derive(Clone)]
struct Potential {
    spec: PotentialSpec,
    family: String,
}

#[pymethods]
impl Potential {
    #[new]
    #[pyo3(signature = (family, *, a_plus=None, varkappa=None, kappa=None, eta=None,
                        zeta=None, alpha=None, f=None, g=None, expr=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        family: &str,
        a_plus: Option<f64>,
        varkappa: Option<f64>,
        kappa: Option<f64>,
        eta: Option<f64>,
        zeta: Option<f64>,
        alpha: Option<f64>,
        f: Option<String>,
        g: Option<String>,
        expr: Option<String>,
    ) -> PyResult<Self> {
        let cfg = PotentialConfig {
            family: family.to_string(),
            a_plus,
            varkappa,
            kappa,
            eta,
            zeta,
            alpha,
            f,
            g,
            expr,
        };
        Ok(Potential {
            spec: cfg.build().map_err(err)?,
            family: family.to_string(),
        })
    }

    #[getter]
    fn family(&self) -> &str {
        &self.family
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.family)
    }
}

/// Realization context: the lambda vector and the time step.
#[pyclass]
struct Model {
    ctx: ModelContext,
}

impl Model {
    fn point(&self, q: Vec<f64>, p: Vec<f64>) -> PyResult<PhasePoint> {
        PhasePoint::new(q, p).map_err(err)
    }
}

#[pymethods]
impl Model {
    #[new]
    fn new(lam: Vec<f64>, h: f64) -> PyResult<Self> {
        Ok(Model {
            ctx: ModelContext::new(lam, h).map_err(err)?,
        })
    }

    #[staticmethod]
    fn default_lambda(n: usize) -> Vec<f64> {
        ModelContext::default_lambda(n)
    }

    #[getter]
    fn lam(&self) -> Vec<f64> {
        self.ctx.lambda.clone()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.ctx.h
    }

    #[getter]
    fn n(&self) -> usize {
        self.ctx.lambda.len()
    }

    /// Values of the six generators (K, Ap, Am, Bp, Bm, M) at a point.
    fn realize(&self, q: Vec<f64>, p: Vec<f64>) -> PyResult<BTreeMap<String, f64>> {
        let gen = algebra::realize(&self.point(q, p)?, &self.ctx).map_err(err)?;
        Ok(["K", "Ap", "Am", "Bp", "Bm", "M"]
            .iter()
            .zip(gen.as_array())
            .map(|(k, v)| (k.to_string(), v))
            .collect())
    }

    fn casimir(&self, q: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        let gen = algebra::realize(&self.point(q, p)?, &self.ctx).map_err(err)?;
        Ok(algebra::casimir(&gen))
    }

    fn left_casimir(&self, m: usize, q: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        algebra::left_casimir(m, &self.point(q, p)?, &self.ctx).map_err(err)
    }

    fn right_casimir(&self, m: usize, q: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        algebra::right_casimir(m, &self.point(q, p)?, &self.ctx).map_err(err)
    }

    /// One step of the discrete map; returns (q', p').
    fn step(
        &self,
        potential: &Potential,
        q: Vec<f64>,
        p: Vec<f64>,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let next =
            dynamics::step_phase(&self.point(q, p)?, &potential.spec, &self.ctx).map_err(err)?;
        Ok((next.q, next.p))
    }

    /// Relative gap between the phase-space and generator step routes.
    fn closure_gap(&self, potential: &Potential, q: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        dynamics::closure_check(&self.point(q, p)?, &potential.spec, &self.ctx).map_err(err)
    }

    #[pyo3(signature = (label, q, p, params=None))]
    fn eval_invariant(
        &self,
        label: &str,
        q: Vec<f64>,
        p: Vec<f64>,
        params: Option<HashMap<String, f64>>,
    ) -> PyResult<f64> {
        let id = InvariantId::from_label(label).map_err(err)?;
        invariants::eval_invariant(id, &self.point(q, p)?, &self.ctx, &params_from(params)?)
            .map_err(err)
    }

    /// Max relative drift of each invariant over `steps` iterations.
    #[pyo3(signature = (potential, q, p, steps, invariants, params=None))]
    fn conservation(
        &self,
        potential: &Potential,
        q: Vec<f64>,
        p: Vec<f64>,
        steps: usize,
        invariants: Vec<String>,
        params: Option<HashMap<String, f64>>,
    ) -> PyResult<BTreeMap<String, f64>> {
        let traj = dynamics::trajectory(
            &self.point(q, p)?,
            &potential.spec,
            &self.ctx,
            steps,
            &ids_from(invariants)?,
            &params_from(params)?,
        )
        .map_err(err)?;
        Ok(invariants::conservation_report(&traj)
            .into_iter()
            .map(|(id, d)| (id.label(), d))
            .collect())
    }

    #[pyo3(signature = (potential, q, p, steps, invariants=vec![], params=None))]
    fn trajectory_csv(
        &self,
        potential: &Potential,
        q: Vec<f64>,
        p: Vec<f64>,
        steps: usize,
        invariants: Vec<String>,
        params: Option<HashMap<String, f64>>,
    ) -> PyResult<String> {
        let traj = dynamics::trajectory(
            &self.point(q, p)?,
            &potential.spec,
            &self.ctx,
            steps,
            &ids_from(invariants)?,
            &params_from(params)?,
        )
        .map_err(err)?;
        Ok(traj.to_csv())
    }

    /// Mode rank of an invariant set's stacked Jacobian; returns
    /// (mode, expected, pass).
    #[pyo3(signature = (set, params=None, samples=5, seed=1, tol=1e-8))]
    fn rank(
        &self,
        set: &str,
        params: Option<HashMap<String, f64>>,
        samples: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<(usize, usize, bool)> {
        let set = SetName::parse(set).map_err(err)?;
        let rep = invariants::independence_test(
            set,
            &self.ctx,
            &params_from(params)?,
            samples,
            seed,
            tol,
        )
        .map_err(err)?;
        Ok((rep.mode, rep.expected_rank, rep.pass))
    }

    /// Pairwise brackets of a set's commuting chain as (a, b, magnitude).
    #[pyo3(signature = (set, params=None))]
    fn involution(
        &self,
        set: &str,
        params: Option<HashMap<String, f64>>,
    ) -> PyResult<Vec<(String, String, f64)>> {
        let set = SetName::parse(set).map_err(err)?;
        let entries = invariants::involution_test(set, &self.ctx, &params_from(params)?)
            .map_err(err)?;
        Ok(entries
            .into_iter()
            .map(|e| (e.a, e.b, e.magnitude))
            .collect())
    }

    /// Nullspace search over the generator ansatz; returns
    /// (basis, vectors, residuals).
    #[pyo3(signature = (potential, degree=1, samples=None, seed=1))]
    fn search(
        &self,
        potential: &Potential,
        degree: usize,
        samples: Option<usize>,
        seed: u64,
    ) -> PyResult<(Vec<String>, Vec<Vec<f64>>, Vec<f64>)> {
        let basis = classify::ansatz_basis(degree).map_err(err)?;
        let samples = samples.unwrap_or(5 * basis.len());
        let res = classify::invariant_search(&potential.spec, degree, &self.ctx, samples, seed)
            .map_err(err)?;
        Ok((res.basis, res.vectors, res.residuals))
    }

    /// Max relative residual of the classifying functional equations.
    fn pde_residual(&self, potential: &Potential, q: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        let r = classify::pde_residual(&potential.spec, &self.point(q, p)?, &self.ctx)
            .map_err(err)?;
        Ok(r.max_relative())
    }
}

fn parse_rat(text: &str) -> PyResult<Rat> {
    let int = |s: &str| -> PyResult<BigInt> {
        s.trim()
            .parse()
            .map_err(|_| PyValueError::new_err(format!("bad rational `{text}`")))
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let d = int(d)?;
            if d == BigInt::from(0) {
                return Err(PyValueError::new_err("zero denominator"));
            }
            Ok(Rat::new(int(n)?, d))
        }
        None => Ok(Rat::from_integer(int(text)?)),
    }
}

/// Determinant lemma value through both routes, as decimal strings.
#[pyfunction]
fn mn_det(n: usize, mu: &str, nu: &str) -> PyResult<(String, String)> {
    let (closed, exact) = classify::mn_det(n, &parse_rat(mu)?, &parse_rat(nu)?);
    Ok((closed.to_string(), exact.to_string()))
}

/// Convergence order of the discrete map against the limiting flow;
/// returns (errors, slope).
#[pyfunction]
#[pyo3(signature = (family, lam, q0, p0, t, hs, omega, gamma=0.0, delta=0.0, profile=None))]
#[allow(clippy::too_many_arguments)]
fn convergence_order(
    family: &str,
    lam: Vec<f64>,
    q0: Vec<f64>,
    p0: Vec<f64>,
    t: f64,
    hs: Vec<f64>,
    omega: f64,
    gamma: f64,
    delta: f64,
    profile: Option<&str>,
) -> PyResult<(Vec<f64>, f64)> {
    let rule = rule_from(family, omega, gamma, delta, profile)?;
    let rep = continuum::convergence_order(&rule, &lam, &q0, &p0, t, &hs).map_err(err)?;
    Ok((rep.errors, rep.slope))
}

/// Expansion residuals of an invariant over an h sweep; returns
/// (residuals, leading, limit, order).
#[pyfunction]
#[pyo3(signature = (invariant, family, lam, q, p, hs, omega, gamma=0.0, delta=0.0, profile=None))]
#[allow(clippy::too_many_arguments)]
fn expansion_check(
    invariant: &str,
    family: &str,
    lam: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    hs: Vec<f64>,
    omega: f64,
    gamma: f64,
    delta: f64,
    profile: Option<&str>,
) -> PyResult<(Vec<f64>, f64, f64, f64)> {
    let id = InvariantId::from_label(invariant).map_err(err)?;
    let rule = rule_from(family, omega, gamma, delta, profile)?;
    let rep = continuum::expansion_check(id, &rule, &lam, &q, &p, &hs).map_err(err)?;
    Ok((rep.residuals, rep.leading, rep.limit, rep.order))
}

#[pymodule]
fn h6map_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Potential>()?;
    m.add_function(wrap_pyfunction!(mn_det, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_check, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
