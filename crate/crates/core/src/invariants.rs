//! Catalog of the named invariants, with conservation, functional
//! independence (numerical rank) and involution verification.
//!
//! Every id has two evaluation routes: a numeric formula on generator
//! states and an exact polynomial in the phase variables obtained by
//! pushing the generator formula through the realization. The routes must
//! agree, which the tests enforce; Jacobians for rank tests are computed
//! from the exact polynomial partials, so rank decisions do not depend on
//! finite-difference noise.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{
    canonical_bracket, casimir, casimir_poly, left_casimir, left_casimir_poly, phase_vars,
    realize, realize_poly, right_casimir, right_casimir_poly, GeneratorState, ModelContext,
    PhasePoint,
};
use crate::dynamics::Trajectory;
use crate::error::Error;
use crate::poly::{MultiPoly, Rat};

/// One named invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvariantId {
    I1,
    I1s,
    I2I,
    I2IIa,
    I2IIb,
    I2Is,
    I2IIs,
    J1,
    J1Hat,
    C,
    Cleft(usize),
    Cright(usize),
}

impl InvariantId {
    pub fn label(&self) -> String {
        match self {
            InvariantId::I1 => "I1".into(),
            InvariantId::I1s => "I1s".into(),
            InvariantId::I2I => "I2I".into(),
            InvariantId::I2IIa => "I2IIa".into(),
            InvariantId::I2IIb => "I2IIb".into(),
            InvariantId::I2Is => "I2Is".into(),
            InvariantId::I2IIs => "I2IIs".into(),
            InvariantId::J1 => "J1".into(),
            InvariantId::J1Hat => "J1hat".into(),
            InvariantId::C => "C".into(),
            InvariantId::Cleft(m) => format!("Cl{m}"),
            InvariantId::Cright(m) => format!("Cr{m}"),
        }
    }

    pub fn from_label(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "I1" => InvariantId::I1,
            "I1s" => InvariantId::I1s,
            "I2I" => InvariantId::I2I,
            "I2IIa" => InvariantId::I2IIa,
            "I2IIb" => InvariantId::I2IIb,
            "I2Is" => InvariantId::I2Is,
            "I2IIs" => InvariantId::I2IIs,
            "J1" => InvariantId::J1,
            "J1hat" => InvariantId::J1Hat,
            "C" => InvariantId::C,
            _ => {
                if let Some(m) = s.strip_prefix("Cl").and_then(|t| t.parse().ok()) {
                    InvariantId::Cleft(m)
                } else if let Some(m) = s.strip_prefix("Cr").and_then(|t| t.parse().ok()) {
                    InvariantId::Cright(m)
                } else {
                    return Err(Error::Config(format!("unknown invariant `{s}`")));
                }
            }
        })
    }
}

/// Parameters the invariant formulas may depend on. Only the fields an id
/// actually uses must be set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InvariantParams {
    pub varkappa: Option<f64>,
    pub a_plus: Option<f64>,
    pub kappa: Option<f64>,
    pub eta: Option<f64>,
    pub zeta: Option<f64>,
    pub alpha: Option<f64>,
}

fn need(v: Option<f64>, name: &str) -> Result<f64, Error> {
    v.ok_or_else(|| Error::MissingParameter(name.to_string()))
}

/// Numeric evaluation on a generator state. `Cleft`/`Cright` are not
/// generator-expressible and are rejected here.
pub fn eval_generator_form(
    id: InvariantId,
    g: &GeneratorState,
    params: &InvariantParams,
) -> Result<f64, Error> {
    let (k, ap, am, bp, bm, m) = (g.k, g.a_plus, g.a_minus, g.b_plus, g.b_minus, g.m);
    Ok(match id {
        InvariantId::I1 => {
            let vk = need(params.varkappa, "varkappa")?;
            let a = need(params.a_plus, "a_plus")?;
            vk * (k + m) + a * (ap + am) + bp + bm
        }
        InvariantId::I1s => ap - am,
        InvariantId::I2I => {
            let kp = need(params.kappa, "kappa")?;
            if m == 0.0 {
                return Err(Error::Domain {
                    context: "I2I".into(),
                    message: "M must be nonzero".into(),
                });
            }
            -(1.0 + kp / 2.0) * (ap * ap + am * am) / m + kp * k + bp + bm
        }
        InvariantId::I2IIa => {
            let kp = need(params.kappa, "kappa")?;
            kp * (m * k - ap * am) - (am * am + ap * ap) + (bm + bp) * m
        }
        InvariantId::I2IIb => {
            let kp = need(params.kappa, "kappa")?;
            let et = need(params.eta, "eta")?;
            let ze = need(params.zeta, "zeta")?;
            (et * m + kp) * ap * am + ze * m * (ap + am) + ap * ap + am * am
        }
        InvariantId::I2Is => {
            let al = need(params.alpha, "alpha")?;
            if al == 0.0 {
                return Err(Error::InvalidParameter("alpha must be nonzero".into()));
            }
            ap * am + (am * am + ap * ap - bm * m - bp * m) / al - k * m
        }
        InvariantId::I2IIs => {
            let al = need(params.alpha, "alpha")?;
            let a = need(params.a_plus, "a_plus")?;
            ap * ap + am * am + al * ap * am + a * (ap + am)
        }
        InvariantId::J1 => {
            let vk = need(params.varkappa, "varkappa")?;
            let a = need(params.a_plus, "a_plus")?;
            let a2 = a * a;
            -a2 * (a2 + vk - 2.0) * am * ap
                + 2.0 * a * am * bm
                - 2.0 * a * (a2 - 1.0) * am * bp
                + 2.0 * a * (a2 + vk) * am * k
                - 2.0 * a * (a2 - 1.0) * ap * bm
                + 2.0 * a * ap * bp
                + 2.0 * a * (a2 + vk) * ap * k
                + bm * bm
                + (2.0 - vk * a2 - 2.0 * a2) * bp * bm
                + 2.0 * vk * bm * k
                + bp * bp
                + 2.0 * vk * bp * k
                + (vk * a2 + vk * vk + 2.0 * a2) * k * k
                + a2 * (a2 + vk + 2.0) * k * m
        }
        InvariantId::J1Hat => {
            let vk = need(params.varkappa, "varkappa")?;
            let a = need(params.a_plus, "a_plus")?;
            a * a * ap * am + 2.0 * a * am * bp - 2.0 * a * am * k + 2.0 * a * ap * bm
                - 2.0 * a * ap * k
                + (vk + 2.0) * bm * bp
                + bm * m
                + bp * m
                - (vk + 2.0) * k * k
                - (a * a + 2.0) * k * m
        }
        InvariantId::C => casimir(g),
        InvariantId::Cleft(_) | InvariantId::Cright(_) => {
            return Err(Error::InvalidParameter(format!(
                "{} is not generator-expressible",
                id.label()
            )))
        }
    })
}

/// Closed-form value at a phase point.
pub fn eval_invariant(
    id: InvariantId,
    point: &PhasePoint,
    ctx: &ModelContext,
    params: &InvariantParams,
) -> Result<f64, Error> {
    match id {
        InvariantId::Cleft(m) => left_casimir(m, point, ctx),
        InvariantId::Cright(m) => right_casimir(m, point, ctx),
        _ => eval_generator_form(id, &realize(point, ctx)?, params),
    }
}

fn exact(v: f64, name: &str) -> Result<Rat, Error> {
    BigRational::from_float(v)
        .ok_or_else(|| Error::InvalidParameter(format!("{name} is not finite")))
}

fn lam_exact(ctx: &ModelContext) -> Result<Vec<Rat>, Error> {
    ctx.lambda
        .iter()
        .map(|l| exact(*l, "lambda"))
        .collect()
}

struct GenImages {
    k: MultiPoly,
    ap: MultiPoly,
    am: MultiPoly,
    bp: MultiPoly,
    bm: MultiPoly,
    m: Rat,
    vars: Vec<String>,
}

fn gen_images(lam: &[Rat]) -> GenImages {
    let imgs = crate::algebra::generator_phase_polys(lam);
    let m: Rat = lam.iter().map(|l| l * l).fold(Rat::zero(), |a, b| a + b);
    let [k, ap, am, bp, bm, _] = imgs;
    GenImages {
        k,
        ap,
        am,
        bp,
        bm,
        m,
        vars: phase_vars(lam.len()),
    }
}

impl GenImages {
    fn constant(&self, c: Rat) -> MultiPoly {
        let vars: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        MultiPoly::constant(&vars, c)
    }
}

/// Exact polynomial form of an invariant in the phase variables, with the
/// couplings fixed to the exact binary values of `lam`.
pub fn invariant_poly(
    id: InvariantId,
    params: &InvariantParams,
    lam: &[Rat],
) -> Result<MultiPoly, Error> {
    let gi = gen_images(lam);
    let two = crate::poly::rat(2, 1);
    let p = |v: Option<f64>, name: &str| -> Result<Rat, Error> { exact(need(v, name)?, name) };
    Ok(match id {
        InvariantId::I1 => {
            let vk = p(params.varkappa, "varkappa")?;
            let a = p(params.a_plus, "a_plus")?;
            let km = &gi.k + &gi.constant(gi.m.clone());
            &(&km.scale(&vk) + &(&gi.ap + &gi.am).scale(&a)) + &(&gi.bp + &gi.bm)
        }
        InvariantId::I1s => &gi.ap - &gi.am,
        InvariantId::I2I => {
            let kp = p(params.kappa, "kappa")?;
            if gi.m.is_zero() {
                return Err(Error::Domain {
                    context: "I2I".into(),
                    message: "M must be nonzero".into(),
                });
            }
            let coeff = -(Rat::from_integer(1.into()) + kp.clone() / two.clone()) / gi.m.clone();
            let sq = &gi.ap.pow(2) + &gi.am.pow(2);
            &(&sq.scale(&coeff) + &gi.k.scale(&kp)) + &(&gi.bp + &gi.bm)
        }
        InvariantId::I2IIa => {
            let kp = p(params.kappa, "kappa")?;
            let t1 = (&gi.k.scale(&gi.m) - &(&gi.ap * &gi.am)).scale(&kp);
            let t2 = &gi.am.pow(2) + &gi.ap.pow(2);
            let t3 = (&gi.bm + &gi.bp).scale(&gi.m);
            &(&t1 - &t2) + &t3
        }
        InvariantId::I2IIb => {
            let kp = p(params.kappa, "kappa")?;
            let et = p(params.eta, "eta")?;
            let ze = p(params.zeta, "zeta")?;
            let c1 = et * gi.m.clone() + kp;
            let t1 = (&gi.ap * &gi.am).scale(&c1);
            let t2 = (&gi.ap + &gi.am).scale(&(ze * gi.m.clone()));
            &(&t1 + &t2) + &(&gi.ap.pow(2) + &gi.am.pow(2))
        }
        InvariantId::I2Is => {
            let al = p(params.alpha, "alpha")?;
            if al.is_zero() {
                return Err(Error::InvalidParameter("alpha must be nonzero".into()));
            }
            let inv_al = Rat::from_integer(1.into()) / al;
            let inner = &(&gi.am.pow(2) + &gi.ap.pow(2)) - &(&gi.bm + &gi.bp).scale(&gi.m);
            &(&(&gi.ap * &gi.am) + &inner.scale(&inv_al)) - &gi.k.scale(&gi.m)
        }
        InvariantId::I2IIs => {
            let al = p(params.alpha, "alpha")?;
            let a = p(params.a_plus, "a_plus")?;
            &(&(&gi.ap.pow(2) + &gi.am.pow(2)) + &(&gi.ap * &gi.am).scale(&al))
                + &(&gi.ap + &gi.am).scale(&a)
        }
        InvariantId::J1 => {
            let vk = p(params.varkappa, "varkappa")?;
            let a = p(params.a_plus, "a_plus")?;
            let a2 = a.clone() * a.clone();
            let c_apam = -(a2.clone() * (a2.clone() + vk.clone() - two.clone()));
            let c_cross = -(two.clone() * a.clone() * (a2.clone() - Rat::from_integer(1.into())));
            let c_ak = two.clone() * a.clone() * (a2.clone() + vk.clone());
            let c_bpbm = two.clone() - vk.clone() * a2.clone() - two.clone() * a2.clone();
            let c_k2 = vk.clone() * a2.clone() + vk.clone() * vk.clone() + two.clone() * a2.clone();
            let c_km = a2.clone() * (a2.clone() + vk.clone() + two.clone());
            let mut acc = (&gi.am * &gi.ap).scale(&c_apam);
            acc = &acc + &(&gi.am * &gi.bm).scale(&(two.clone() * a.clone()));
            acc = &acc + &(&gi.am * &gi.bp).scale(&c_cross);
            acc = &acc + &(&gi.am * &gi.k).scale(&c_ak);
            acc = &acc + &(&gi.ap * &gi.bm).scale(&c_cross);
            acc = &acc + &(&gi.ap * &gi.bp).scale(&(two.clone() * a.clone()));
            acc = &acc + &(&gi.ap * &gi.k).scale(&c_ak);
            acc = &acc + &gi.bm.pow(2);
            acc = &acc + &(&gi.bp * &gi.bm).scale(&c_bpbm);
            acc = &acc + &(&gi.bm * &gi.k).scale(&(two.clone() * vk.clone()));
            acc = &acc + &gi.bp.pow(2);
            acc = &acc + &(&gi.bp * &gi.k).scale(&(two.clone() * vk.clone()));
            acc = &acc + &gi.k.pow(2).scale(&c_k2);
            acc = &acc + &gi.k.scale(&(c_km * gi.m.clone()));
            acc
        }
        InvariantId::J1Hat => {
            let vk = p(params.varkappa, "varkappa")?;
            let a = p(params.a_plus, "a_plus")?;
            let a2 = a.clone() * a.clone();
            let vk2 = vk.clone() + two.clone();
            let mut acc = (&gi.ap * &gi.am).scale(&a2);
            acc = &acc + &(&gi.am * &gi.bp).scale(&(two.clone() * a.clone()));
            acc = &acc - &(&gi.am * &gi.k).scale(&(two.clone() * a.clone()));
            acc = &acc + &(&gi.ap * &gi.bm).scale(&(two.clone() * a.clone()));
            acc = &acc - &(&gi.ap * &gi.k).scale(&(two.clone() * a.clone()));
            acc = &acc + &(&gi.bm * &gi.bp).scale(&vk2);
            acc = &acc + &(&gi.bm + &gi.bp).scale(&gi.m);
            acc = &acc - &gi.k.pow(2).scale(&vk2);
            acc = &acc - &gi.k.scale(&((a2 + two.clone()) * gi.m.clone()));
            acc
        }
        InvariantId::C => realize_poly(&casimir_poly(), lam)?,
        InvariantId::Cleft(m) => left_casimir_poly(m, lam)?,
        InvariantId::Cright(m) => right_casimir_poly(m, lam)?,
    })
}

/// Stacked gradient rows in (q, p), one per id, computed from the exact
/// polynomial partials.
pub fn jacobian_rows(
    ids: &[InvariantId],
    point: &PhasePoint,
    ctx: &ModelContext,
    params: &InvariantParams,
) -> Result<DMatrix<f64>, Error> {
    let lam = lam_exact(ctx)?;
    let n = point.dof();
    let coords: Vec<f64> = point.q.iter().chain(&point.p).copied().collect();
    let mut rows = DMatrix::zeros(ids.len(), 2 * n);
    for (r, id) in ids.iter().enumerate() {
        let poly = invariant_poly(*id, params, &lam)?;
        for c in 0..2 * n {
            rows[(r, c)] = poly.partial(c).eval_f64(&coords);
        }
    }
    Ok(rows)
}

/// Count of singular values above `tol` times the largest one.
pub fn numerical_rank(matrix: &DMatrix<f64>, tol: f64) -> Result<usize, Error> {
    if matrix.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let svd = matrix.clone().svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|s| **s > tol * smax)
        .count())
}

/// One of the named invariant sets with a predicted generic rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetName {
    S1Qms,
    S2I,
    S3,
    S1s,
    S2Is,
    S2IIs,
}

impl SetName {
    pub fn parse(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "S1-QMS" | "S1QMS" | "S1" => SetName::S1Qms,
            "S2I" => SetName::S2I,
            "S3" => SetName::S3,
            "S1s" => SetName::S1s,
            "S2Is" => SetName::S2Is,
            "S2IIs" => SetName::S2IIs,
            _ => return Err(Error::Config(format!("unknown set `{s}`"))),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SetName::S1Qms => "S1-QMS",
            SetName::S2I => "S2I",
            SetName::S3 => "S3",
            SetName::S1s => "S1s",
            SetName::S2Is => "S2Is",
            SetName::S2IIs => "S2IIs",
        }
    }

    fn named(&self) -> Vec<InvariantId> {
        match self {
            SetName::S1Qms => vec![InvariantId::I1, InvariantId::J1, InvariantId::J1Hat],
            SetName::S2I => vec![InvariantId::I2I, InvariantId::I1s],
            SetName::S3 => vec![InvariantId::I2IIa, InvariantId::I2IIb],
            SetName::S1s => vec![InvariantId::I1s],
            SetName::S2Is => vec![InvariantId::I2Is],
            SetName::S2IIs => vec![InvariantId::I2IIs],
        }
    }

    /// The full set: named invariants, then Cleft(3..=N), Cright(3..=N-1).
    /// For N = 3 the right Casimir range is empty.
    pub fn members(&self, n: usize) -> Vec<InvariantId> {
        let mut out = self.named();
        out.extend((3..=n).map(InvariantId::Cleft));
        out.extend((3..=n.saturating_sub(1)).map(InvariantId::Cright));
        out
    }

    /// Predicted generic rank of the stacked Jacobian.
    pub fn expected_rank(&self, n: usize) -> usize {
        match self {
            SetName::S1Qms => 2 * n - 2,
            SetName::S2I | SetName::S3 => 2 * n - 3,
            SetName::S1s | SetName::S2Is | SetName::S2IIs => 2 * n - 4,
        }
    }

    /// The subset claimed to be in involution: the first N members (all
    /// members for the singular sets, which have only N - 1).
    pub fn commuting_members(&self, n: usize) -> Vec<InvariantId> {
        let mut out = self.named();
        // J1hat commutes with I1 but not with J1: three mutually commuting
        // functions of the collective generators would need a 3-dimensional
        // isotropic span on a generically 4-dimensional coadjoint orbit,
        // which is impossible, so the commuting chain is built from I1, J1
        // and the left Casimirs only
        if matches!(self, SetName::S1Qms) {
            out.retain(|id| *id != InvariantId::J1Hat);
        }
        out.extend((3..=n).map(InvariantId::Cleft));
        out.truncate(n);
        out
    }
}

/// Rank statistics over sampled phase points.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub set: String,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub samples: usize,
    pub tol: f64,
    pub ranks: Vec<usize>,
    pub min: usize,
    pub max: usize,
    pub mode: usize,
    pub expected_rank: usize,
    pub pass: bool,
}

fn mode_of(ranks: &[usize]) -> usize {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in ranks {
        *counts.entry(*r).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|(_, c)| *c)
        .map(|(r, _)| r)
        .unwrap_or(0)
}

/// Rank of the stacked Jacobian of a named set at random points.
pub fn independence_test(
    set: SetName,
    ctx: &ModelContext,
    params: &InvariantParams,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RankReport, Error> {
    let n = ctx.lambda.len();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "independence tests need N >= 3".into(),
        ));
    }
    let ids = set.members(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = Vec::with_capacity(samples);
    for _ in 0..samples {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let point = PhasePoint::new(q, p)?;
        let jac = jacobian_rows(&ids, &point, ctx, params)?;
        ranks.push(numerical_rank(&jac, tol)?);
    }
    let expected = set.expected_rank(n);
    let mode = mode_of(&ranks);
    Ok(RankReport {
        set: set.label().to_string(),
        n,
        lambda: ctx.lambda.clone(),
        samples,
        tol,
        min: ranks.iter().copied().min().unwrap_or(0),
        max: ranks.iter().copied().max().unwrap_or(0),
        mode,
        ranks,
        expected_rank: expected,
        pass: mode == expected,
    })
}

/// One pairwise bracket result.
#[derive(Clone, Debug, Serialize)]
pub struct BracketEntry {
    pub a: String,
    pub b: String,
    pub exact: bool,
    /// Max coefficient magnitude (exact mode) or max relative bracket value
    /// over sample points (numeric mode).
    pub magnitude: f64,
}

/// Pairwise canonical brackets among a set's commuting subset. Exact
/// zero-polynomial verification for N <= 4; numeric sampling otherwise.
pub fn involution_test(
    set: SetName,
    ctx: &ModelContext,
    params: &InvariantParams,
) -> Result<Vec<BracketEntry>, Error> {
    let n = ctx.lambda.len();
    let ids = set.commuting_members(n);
    if n <= 4 {
        involution_exact(&ids, ctx, params)
    } else {
        involution_numeric(&ids, ctx, params, 10, 1)
    }
}

/// Exact brackets: each pair must produce the zero polynomial.
pub fn involution_exact(
    ids: &[InvariantId],
    ctx: &ModelContext,
    params: &InvariantParams,
) -> Result<Vec<BracketEntry>, Error> {
    let lam = lam_exact(ctx)?;
    let polys: Vec<MultiPoly> = ids
        .iter()
        .map(|id| invariant_poly(*id, params, &lam))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            let b = canonical_bracket(&polys[i], &polys[j])?;
            out.push(BracketEntry {
                a: ids[i].label(),
                b: ids[j].label(),
                exact: true,
                magnitude: b.max_coeff_abs(),
            });
        }
    }
    Ok(out)
}

/// Numeric brackets via exact polynomial gradients evaluated at random
/// points; magnitude is relative to the product of gradient norms.
pub fn involution_numeric(
    ids: &[InvariantId],
    ctx: &ModelContext,
    params: &InvariantParams,
    points: usize,
    seed: u64,
) -> Result<Vec<BracketEntry>, Error> {
    let n = ctx.lambda.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(points);
    for _ in 0..points {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        samples.push(PhasePoint::new(q, p)?);
    }
    let mut out = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            let mut worst = 0.0f64;
            for point in &samples {
                let rows = jacobian_rows(&[ids[i], ids[j]], point, ctx, params)?;
                let mut bracket = 0.0;
                for k in 0..n {
                    bracket += rows[(0, k)] * rows[(1, n + k)] - rows[(0, n + k)] * rows[(1, k)];
                }
                let scale: f64 = rows.row(0).norm() * rows.row(1).norm();
                worst = worst.max(bracket.abs() / scale.max(1.0));
            }
            out.push(BracketEntry {
                a: ids[i].label(),
                b: ids[j].label(),
                exact: false,
                magnitude: worst,
            });
        }
    }
    Ok(out)
}

/// Max relative drift per id along a trajectory: the drift at each step is
/// normalized by max(1, running max |I|).
pub fn conservation_report(traj: &Trajectory) -> BTreeMap<InvariantId, f64> {
    let mut out = BTreeMap::new();
    for id in &traj.invariant_ids {
        let mut running_max = 0.0f64;
        let mut worst = 0.0f64;
        let i0 = traj.entries[0].invariants[id];
        for e in &traj.entries {
            let v = e.invariants[id];
            running_max = running_max.max(v.abs());
            worst = worst.max((v - i0).abs() / running_max.max(1.0));
        }
        out.insert(*id, worst);
    }
    out
}
