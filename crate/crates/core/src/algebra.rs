//! The two-photon Lie-Poisson algebra, its symplectic realization and the
//! universal (left/right) Casimir invariants.
//!
//! The algebra is spanned by the six generators K, A+, A-, B+, B-, M with
//! M central. The Poisson bracket on polynomials in the generators carries
//! the same structure constants as the commutator table:
//!
//! ```text
//! {K, A+} =  A+     {K, A-} = -A-     {A-, A+} = M
//! {K, B+} = 2B+     {K, B-} = -2B-    {B-, B+} = 4K + 2M
//! {A+, B-} = -2A-   {A-, B+} = 2A+    {A+, B+} = {A-, B-} = {M, .} = 0
//! ```
//!
//! This sign convention is fixed here once and used everywhere; it is
//! validated by the Casimir property (`casimir_poly` brackets to zero with
//! every generator).

use num_traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::poly::{rat, MultiPoly, Rat};

/// Canonical generator order: (K, A+, A-, B+, B-, M).
pub const GENERATOR_VARS: [&str; 6] = ["K", "Ap", "Am", "Bp", "Bm", "M"];

/// One of the six generators, in the fixed canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorId {
    K,
    APlus,
    AMinus,
    BPlus,
    BMinus,
    M,
}

impl GeneratorId {
    pub const ALL: [GeneratorId; 6] = [
        GeneratorId::K,
        GeneratorId::APlus,
        GeneratorId::AMinus,
        GeneratorId::BPlus,
        GeneratorId::BMinus,
        GeneratorId::M,
    ];

    pub fn index(self) -> usize {
        match self {
            GeneratorId::K => 0,
            GeneratorId::APlus => 1,
            GeneratorId::AMinus => 2,
            GeneratorId::BPlus => 3,
            GeneratorId::BMinus => 4,
            GeneratorId::M => 5,
        }
    }

    pub fn name(self) -> &'static str {
        GENERATOR_VARS[self.index()]
    }

    /// The generator as a degree-1 polynomial over the generator variables.
    pub fn poly(self) -> MultiPoly {
        MultiPoly::var(&GENERATOR_VARS, self.name()).expect("generator variable")
    }
}

/// Numeric values of the six generators at one phase-space point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorState {
    pub k: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub m: f64,
}

impl GeneratorState {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.k,
            self.a_plus,
            self.a_minus,
            self.b_plus,
            self.b_minus,
            self.m,
        ]
    }
}

/// Darboux coordinates (q, p) for N degrees of freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self, Error> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "|q| = {}, |p| = {}",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(p.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "phase point entries must be finite".into(),
            ));
        }
        Ok(Self { q, p })
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn norm_inf(&self) -> f64 {
        self.q
            .iter()
            .chain(self.p.iter())
            .fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// Realization parameters: the vector of nonzero couplings and the step.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelContext {
    pub lambda: Vec<f64>,
    pub h: f64,
}

impl ModelContext {
    pub fn new(lambda: Vec<f64>, h: f64) -> Result<Self, Error> {
        if lambda.iter().all(|l| *l == 0.0) {
            return Err(Error::InvalidParameter("lambda must be nonzero".into()));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("h must be positive".into()));
        }
        Ok(Self { lambda, h })
    }

    /// Default couplings (1, 1/2, ..., 1/N): distinct nonzero entries.
    pub fn default_lambda(n: usize) -> Vec<f64> {
        (1..=n).map(|k| 1.0 / k as f64).collect()
    }
}

/// Structure constants: the bracket {J_i, J_j} as a polynomial in the
/// generators, for generator indices i, j in canonical order.
fn generator_bracket(i: usize, j: usize) -> MultiPoly {
    use GeneratorId::*;
    let zero = MultiPoly::zero(&GENERATOR_VARS);
    if i == j {
        return zero;
    }
    if i > j {
        return -&generator_bracket(j, i);
    }
    // i < j, canonical order (K, A+, A-, B+, B-, M)
    match (i, j) {
        (0, 1) => APlus.poly(),                 // {K, A+} = A+
        (0, 2) => -&AMinus.poly(),              // {K, A-} = -A-
        (0, 3) => BPlus.poly().scale(&rat(2, 1)), // {K, B+} = 2B+
        (0, 4) => BMinus.poly().scale(&rat(-2, 1)), // {K, B-} = -2B-
        (1, 2) => -&M.poly(),                   // {A+, A-} = -M
        (1, 3) => zero,                         // {A+, B+} = 0
        (1, 4) => AMinus.poly().scale(&rat(-2, 1)), // {A+, B-} = -2A-
        (2, 3) => APlus.poly().scale(&rat(2, 1)), // {A-, B+} = 2A+
        (2, 4) => zero,                         // {A-, B-} = 0
        (3, 4) => {
            // {B+, B-} = -(4K + 2M)
            &GeneratorId::K.poly().scale(&rat(-4, 1)) + &M.poly().scale(&rat(-2, 1))
        }
        (_, 5) => zero, // M central
        _ => unreachable!(),
    }
}

/// Lie-Poisson bracket on polynomials in the six generators, extended from
/// the structure constants by bilinearity and the Leibniz rule:
/// {f, g} = sum_ij (df/dJ_i)(dg/dJ_j) {J_i, J_j}.
pub fn lie_poisson_bracket(f: &MultiPoly, g: &MultiPoly) -> Result<MultiPoly, Error> {
    let expected: Vec<String> = GENERATOR_VARS.iter().map(|s| s.to_string()).collect();
    if f.vars() != expected.as_slice() || g.vars() != expected.as_slice() {
        return Err(Error::UnknownVariable(
            "bracket arguments must be polynomials over the six generators".into(),
        ));
    }
    let mut acc = MultiPoly::zero(&GENERATOR_VARS);
    let df: Vec<MultiPoly> = (0..6).map(|i| f.partial(i)).collect();
    let dg: Vec<MultiPoly> = (0..6).map(|j| g.partial(j)).collect();
    for i in 0..6 {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..6 {
            if i == j || dg[j].is_zero() {
                continue;
            }
            let sij = generator_bracket(i, j);
            if sij.is_zero() {
                continue;
            }
            acc = &acc + &(&(&df[i] * &dg[j]) * &sij);
        }
    }
    Ok(acc)
}

/// Quartic Casimir of the algebra (divided by the central element), as an
/// exact polynomial: M B+ B- - B+ A-^2 - B- A+^2 - M (K + M/2)^2
/// + 2 A- A+ (K + M/2).
pub fn casimir_poly() -> MultiPoly {
    use GeneratorId::*;
    let (k, ap, am, bp, bm, m) = (
        K.poly(),
        APlus.poly(),
        AMinus.poly(),
        BPlus.poly(),
        BMinus.poly(),
        M.poly(),
    );
    let shifted_k = &k + &m.scale(&rat(1, 2));
    let t1 = &(&m * &bp) * &bm;
    let t2 = &bp * &am.pow(2);
    let t3 = &bm * &ap.pow(2);
    let t4 = &m * &shifted_k.pow(2);
    let t5 = (&(&am * &ap) * &shifted_k).scale(&rat(2, 1));
    &(&(&(&t1 - &t2) - &t3) - &t4) + &t5
}

/// Casimir value at a generator state.
pub fn casimir(g: &GeneratorState) -> f64 {
    let sk = g.k + g.m / 2.0;
    g.m * g.b_plus * g.b_minus
        - g.b_plus * g.a_minus * g.a_minus
        - g.b_minus * g.a_plus * g.a_plus
        - g.m * sk * sk
        + 2.0 * g.a_minus * g.a_plus * sk
}

/// Symplectic realization: A+ = lam.p, A- = lam.q, K = q.p - lam^2/2,
/// B+ = p^2, B- = q^2, M = lam^2.
pub fn realize(point: &PhasePoint, ctx: &ModelContext) -> Result<GeneratorState, Error> {
    let n = point.dof();
    if ctx.lambda.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries for {} degrees of freedom",
            ctx.lambda.len(),
            n
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let m = dot(&ctx.lambda, &ctx.lambda);
    Ok(GeneratorState {
        k: dot(&point.q, &point.p) - m / 2.0,
        a_plus: dot(&ctx.lambda, &point.p),
        a_minus: dot(&ctx.lambda, &point.q),
        b_plus: dot(&point.p, &point.p),
        b_minus: dot(&point.q, &point.q),
        m,
    })
}

/// Phase-space variable names q1..qN, p1..pN for an N-dof realization.
pub fn phase_vars(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("q{i}"))
        .chain((1..=n).map(|i| format!("p{i}")))
        .collect()
}

fn phase_var_refs(vars: &[String]) -> Vec<&str> {
    vars.iter().map(String::as_str).collect()
}

/// The realization D as polynomials: each generator becomes an exact
/// polynomial in (q, p) with the rational couplings `lam`.
pub fn generator_phase_polys(lam: &[Rat]) -> [MultiPoly; 6] {
    let n = lam.len();
    let names = phase_vars(n);
    let vars = phase_var_refs(&names);
    let q: Vec<MultiPoly> = (0..n)
        .map(|i| MultiPoly::var(&vars, &format!("q{}", i + 1)).unwrap())
        .collect();
    let p: Vec<MultiPoly> = (0..n)
        .map(|i| MultiPoly::var(&vars, &format!("p{}", i + 1)).unwrap())
        .collect();
    let zero = MultiPoly::zero(&vars);
    let lam_dot = |xs: &[MultiPoly]| {
        xs.iter()
            .zip(lam)
            .fold(zero.clone(), |acc, (x, l)| &acc + &x.scale(l))
    };
    let sq_sum = |xs: &[MultiPoly]| xs.iter().fold(zero.clone(), |acc, x| &acc + &x.pow(2));
    let m_val: Rat = lam.iter().map(|l| l * l).fold(Rat::zero(), |a, b| a + b);
    let qp_dot = q
        .iter()
        .zip(&p)
        .fold(zero.clone(), |acc, (qi, pi)| &acc + &(qi * pi));
    let k = &qp_dot - &MultiPoly::constant(&vars, m_val.clone() / (Rat::one() + Rat::one()));
    [
        k,
        lam_dot(&p),
        lam_dot(&q),
        sq_sum(&p),
        sq_sum(&q),
        MultiPoly::constant(&vars, m_val),
    ]
}

/// Push a polynomial in the generators through the realization: substitute
/// each generator variable by its phase-space polynomial.
pub fn realize_poly(f: &MultiPoly, lam: &[Rat]) -> Result<MultiPoly, Error> {
    let expected: Vec<String> = GENERATOR_VARS.iter().map(|s| s.to_string()).collect();
    if f.vars() != expected.as_slice() {
        return Err(Error::UnknownVariable(
            "realize_poly expects a polynomial over the six generators".into(),
        ));
    }
    let images = generator_phase_polys(lam);
    let names = phase_vars(lam.len());
    let vars = phase_var_refs(&names);
    let mut acc = MultiPoly::zero(&vars);
    for (mono, coeff) in f.terms() {
        let mut term = MultiPoly::constant(&vars, coeff.clone());
        for (g, &e) in images.iter().zip(&mono.0) {
            if e > 0 {
                term = &term * &g.pow(e);
            }
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Canonical Poisson bracket sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i) on
/// exact polynomials over the same 2N phase variables.
pub fn canonical_bracket(f: &MultiPoly, g: &MultiPoly) -> Result<MultiPoly, Error> {
    if f.vars() != g.vars() || f.vars().len() % 2 != 0 {
        return Err(Error::DimensionMismatch(
            "canonical bracket needs matching 2N-variable polynomials".into(),
        ));
    }
    let n = f.vars().len() / 2;
    let names: Vec<String> = f.vars().to_vec();
    let vars = phase_var_refs(&names);
    let mut acc = MultiPoly::zero(&vars);
    for i in 0..n {
        let a = &f.partial(i) * &g.partial(n + i);
        let b = &f.partial(n + i) * &g.partial(i);
        acc = &acc + &(&a - &b);
    }
    Ok(acc)
}

fn triple_term(q: &[f64], p: &[f64], lam: &[f64], i: usize, j: usize, k: usize) -> f64 {
    let t = lam[i] * (p[j] * q[k] - p[k] * q[j])
        + lam[j] * (p[k] * q[i] - p[i] * q[k])
        + lam[k] * (p[i] * q[j] - p[j] * q[i]);
    t * t
}

/// Left Casimir C^[m]: triple sum over 1 <= i < j < k <= m of squared
/// 3x3-minor combinations. Depends only on the first m coordinate pairs.
pub fn left_casimir(m: usize, point: &PhasePoint, ctx: &ModelContext) -> Result<f64, Error> {
    let n = point.dof();
    if m < 2 || m > n {
        return Err(Error::OutOfRange(format!("m = {m} not in 2..={n}")));
    }
    let mut acc = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                acc += triple_term(&point.q, &point.p, &ctx.lambda, i, j, k);
            }
        }
    }
    Ok(acc)
}

/// Right Casimir C_[m]: same sum over N-m+1 <= i < j < k <= N.
pub fn right_casimir(m: usize, point: &PhasePoint, ctx: &ModelContext) -> Result<f64, Error> {
    let n = point.dof();
    if m < 2 || m > n {
        return Err(Error::OutOfRange(format!("m = {m} not in 2..={n}")));
    }
    let start = n - m;
    let mut acc = 0.0;
    for i in start..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                acc += triple_term(&point.q, &point.p, &ctx.lambda, i, j, k);
            }
        }
    }
    Ok(acc)
}

/// Exact polynomial form of the left Casimir in phase variables.
pub fn left_casimir_poly(m: usize, lam: &[Rat]) -> Result<MultiPoly, Error> {
    casimir_poly_range(lam, 0, m)
}

/// Exact polynomial form of the right Casimir in phase variables.
pub fn right_casimir_poly(m: usize, lam: &[Rat]) -> Result<MultiPoly, Error> {
    let n = lam.len();
    if m < 2 || m > n {
        return Err(Error::OutOfRange(format!("m = {m} not in 2..={n}")));
    }
    casimir_poly_range(lam, n - m, n)
}

fn casimir_poly_range(lam: &[Rat], start: usize, end: usize) -> Result<MultiPoly, Error> {
    let n = lam.len();
    if end > n || end - start < 2 {
        return Err(Error::OutOfRange(format!("range {start}..{end} for N = {n}")));
    }
    let names = phase_vars(n);
    let vars = phase_var_refs(&names);
    let q: Vec<MultiPoly> = (0..n)
        .map(|i| MultiPoly::var(&vars, &format!("q{}", i + 1)).unwrap())
        .collect();
    let p: Vec<MultiPoly> = (0..n)
        .map(|i| MultiPoly::var(&vars, &format!("p{}", i + 1)).unwrap())
        .collect();
    let mut acc = MultiPoly::zero(&vars);
    for i in start..end {
        for j in (i + 1)..end {
            for k in (j + 1)..end {
                let minor = |a: usize, b: usize| &(&p[a] * &q[b]) - &(&p[b] * &q[a]);
                let t = &(&minor(j, k).scale(&lam[i]) + &minor(k, i).scale(&lam[j]))
                    + &minor(i, j).scale(&lam[k]);
                acc = &acc + &t.pow(2);
            }
        }
    }
    Ok(acc)
}

/// Convert rational couplings to floats.
pub fn lam_to_f64(lam: &[Rat]) -> Vec<f64> {
    lam.iter().map(|l| l.to_f64().unwrap()).collect()
}

/// Convenience: rational lambda vector (1, 1/2, ..., 1/N).
pub fn default_lambda_rat(n: usize) -> Vec<Rat> {
    (1..=n).map(|k| rat(1, k as i64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn bracket_table_entries() {
        use GeneratorId::*;
        // {K, A+} = A+
        let b = lie_poisson_bracket(&K.poly(), &APlus.poly()).unwrap();
        assert_eq!(b, APlus.poly());
        // {M, B+} = 0
        let b = lie_poisson_bracket(&M.poly(), &BPlus.poly()).unwrap();
        assert!(b.is_zero());
        // {B-, B+} = 4K + 2M
        let b = lie_poisson_bracket(&BMinus.poly(), &BPlus.poly()).unwrap();
        let expect = &K.poly().scale(&rat(4, 1)) + &M.poly().scale(&rat(2, 1));
        assert_eq!(b, expect);
    }

    #[test]
    fn casimir_brackets_to_zero_with_all_generators() {
        let c = casimir_poly();
        for g in GeneratorId::ALL {
            let b = lie_poisson_bracket(&c, &g.poly()).unwrap();
            assert!(b.is_zero(), "{{C, {}}} != 0", g.name());
        }
    }

    #[test]
    fn realize_n1_unit_point() {
        let point = PhasePoint::new(vec![1.0], vec![1.0]).unwrap();
        let ctx = ModelContext::new(vec![1.0], 0.1).unwrap();
        let g = realize(&point, &ctx).unwrap();
        assert_eq!(
            g.as_array(),
            [0.5, 1.0, 1.0, 1.0, 1.0, 1.0],
            "direct substitution"
        );
    }

    #[test]
    fn realize_origin() {
        let point = PhasePoint::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let ctx = ModelContext::new(vec![2.0, 1.0], 0.1).unwrap();
        let g = realize(&point, &ctx).unwrap();
        assert_eq!(g.as_array(), [-2.5, 0.0, 0.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn realize_matches_naive_loops() {
        // independent re-evaluation of the six dot products
        let q = vec![0.5, -0.25, 1.0 / 3.0];
        let p = vec![-1.0, 0.75, 0.2];
        let lam = vec![1.0, 0.5, 0.25];
        let point = PhasePoint::new(q.clone(), p.clone()).unwrap();
        let ctx = ModelContext::new(lam.clone(), 0.1).unwrap();
        let g = realize(&point, &ctx).unwrap();
        let mut ap = 0.0;
        let mut am = 0.0;
        let mut k = 0.0;
        let mut bp = 0.0;
        let mut bm = 0.0;
        let mut m = 0.0;
        for i in 0..3 {
            ap += lam[i] * p[i];
            am += lam[i] * q[i];
            k += q[i] * p[i];
            bp += p[i] * p[i];
            bm += q[i] * q[i];
            m += lam[i] * lam[i];
        }
        k -= m / 2.0;
        for (a, b) in g.as_array().iter().zip([k, ap, am, bp, bm, m]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn casimir_trivial_for_n1_and_n2() {
        for n in [1usize, 2] {
            let q: Vec<f64> = (0..n).map(|i| 0.3 + i as f64).collect();
            let p: Vec<f64> = (0..n).map(|i| -0.7 + 0.5 * i as f64).collect();
            let point = PhasePoint::new(q, p).unwrap();
            let ctx = ModelContext::new(ModelContext::default_lambda(n), 0.1).unwrap();
            let g = realize(&point, &ctx).unwrap();
            assert!(casimir(&g).abs() < 1e-14, "N = {n}");
        }
    }

    #[test]
    fn full_left_casimir_equals_global_casimir() {
        let n = 3;
        let point =
            PhasePoint::new(vec![0.4, -0.9, 1.2], vec![0.1, 0.8, -0.3]).unwrap();
        let ctx = ModelContext::new(ModelContext::default_lambda(n), 0.1).unwrap();
        let g = realize(&point, &ctx).unwrap();
        let lc = left_casimir(n, &point, &ctx).unwrap();
        let rc = right_casimir(n, &point, &ctx).unwrap();
        assert!((lc - casimir(&g)).abs() < 1e-12 * lc.abs().max(1.0));
        assert!((rc - casimir(&g)).abs() < 1e-12 * rc.abs().max(1.0));
    }

    #[test]
    fn left_casimir_m2_empty_sum() {
        let point = PhasePoint::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        let ctx = ModelContext::new(ModelContext::default_lambda(3), 0.1).unwrap();
        assert_eq!(left_casimir(2, &point, &ctx).unwrap(), 0.0);
        assert!(left_casimir(1, &point, &ctx).is_err());
        assert!(left_casimir(4, &point, &ctx).is_err());
    }

    #[test]
    fn left_casimir_brute_force_oracle() {
        // triple-loop oracle at N = 4, m = 3 on a fixed rational-ish point
        let q = vec![0.5, -0.25, 0.75, 1.5];
        let p = vec![-1.0, 0.5, 0.25, -0.75];
        let lam = vec![1.0, 0.5, 1.0 / 3.0, 0.25];
        let point = PhasePoint::new(q.clone(), p.clone()).unwrap();
        let ctx = ModelContext::new(lam.clone(), 0.1).unwrap();
        let got = left_casimir(3, &point, &ctx).unwrap();
        let mut want = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if i < j && j < k {
                        let t = lam[i] * (p[j] * q[k] - p[k] * q[j])
                            + lam[j] * (p[k] * q[i] - p[i] * q[k])
                            + lam[k] * (p[i] * q[j] - p[j] * q[i]);
                        want += t * t;
                    }
                }
            }
        }
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn canonical_bracket_darboux() {
        let names = phase_vars(2);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let q1 = MultiPoly::var(&vars, "q1").unwrap();
        let p1 = MultiPoly::var(&vars, "p1").unwrap();
        let q2 = MultiPoly::var(&vars, "q2").unwrap();
        let one = MultiPoly::constant(&vars, rat(1, 1));
        assert_eq!(canonical_bracket(&q1, &p1).unwrap(), one);
        assert!(canonical_bracket(&q1, &q2).unwrap().is_zero());
    }

    #[test]
    fn realization_is_poisson_morphism_on_generators() {
        // canonical_bracket(D(f), D(g)) = D({f, g}) for generator pairs
        for n in 1..=3usize {
            let lam = default_lambda_rat(n);
            for a in GeneratorId::ALL {
                for b in GeneratorId::ALL {
                    let lhs = canonical_bracket(
                        &realize_poly(&a.poly(), &lam).unwrap(),
                        &realize_poly(&b.poly(), &lam).unwrap(),
                    )
                    .unwrap();
                    let rhs = realize_poly(
                        &lie_poisson_bracket(&a.poly(), &b.poly()).unwrap(),
                        &lam,
                    )
                    .unwrap();
                    assert_eq!(lhs, rhs, "N = {n}, pair ({}, {})", a.name(), b.name());
                }
            }
        }
    }

    #[test]
    fn realized_casimir_poly_vanishes_for_small_n() {
        for n in [1usize, 2] {
            let lam = default_lambda_rat(n);
            let c = realize_poly(&casimir_poly(), &lam).unwrap();
            assert!(c.is_zero(), "D(C) should vanish for N = {n}");
        }
    }
}
