//! Deciding `sat(F) ≥ ((2^r − 1)·m + k) / 2^r` through the polynomial `X`.
//!
//! `X` has mean zero, `E[X²] = Σ c_I²` and `E[X⁴] ≤ 2^{6r}·E[X²]²`, so some
//! point reaches `√(Σ c_I²) / (2·8^r)`. Hence `Σ c_I² ≥ 4·8^{2r}·k²` already
//! answers YES; below that bound `X` has few terms and is maximized
//! exhaustively over its support.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{meets_tlb, sat_count, Assignment, CnfInstance, FormulaError, DEFAULT_VAR_CAP};
use crate::fourier::{instance_to_polynomial, MultilinearPolynomial, TermKey};
use crate::lin2::{lin2_to_cnf, polynomial_to_lin2, Lin2Error, LinEquation, Lin2System};
use crate::sample_space::{kwise_sample_space, SampleSpace, MAX_INDEPENDENCE};
use crate::scalar::Coefficient;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FptError {
    #[error("polynomial support has {support} variables, search cap is {cap}")]
    SearchTooLarge { support: usize, cap: u32 },
    #[error("no point reaching the bound was found; the guarantee says one exists")]
    WitnessSearchExhausted,
    #[error("a witness was requested for a NO instance")]
    NotYes,
    #[error("coefficients too large for the exhaustive search")]
    CoefficientOverflow,
    #[error(transparent)]
    Lin2(#[from] Lin2Error),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
}

impl Verdict {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }
}

/// Which argument settled the question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// `X ≡ 0`: every assignment sits exactly on the lower bound.
    ZeroPolynomial,
    /// `Σ c_I² ≥ 4·8^{2r}·k²`.
    Threshold,
    /// Exhaustive maximization over the support of `X`.
    Search,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::ZeroPolynomial => "zero_polynomial",
            Route::Threshold => "threshold",
            Route::Search => "search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionStats {
    /// `|S|`
    pub term_count: usize,
    /// `Σ c_I²`
    pub l2: BigInt,
    /// `Σ |c_I|`
    pub weight_sum: BigInt,
    pub support_size: usize,
    /// `4·8^{2r}·k²`
    pub threshold: BigInt,
    /// `max X`, when the search ran.
    pub search_max: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub route: Route,
    pub witness: Option<Assignment>,
    pub stats: DecisionStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FptConfig {
    /// Largest support the exhaustive search will enumerate.
    pub search_cap: u32,
    /// Largest support the witness finder will enumerate as a full cube.
    pub var_cap: u32,
    /// Largest number of sample-space points the witness finder visits.
    pub max_sample_points: u128,
}

impl Default for FptConfig {
    fn default() -> Self {
        FptConfig {
            search_cap: 30,
            var_cap: DEFAULT_VAR_CAP,
            max_sample_points: 1 << 26,
        }
    }
}

/// `4·8^{2r}·k²`.
pub fn threshold_bound(r: usize, k: u64) -> BigInt {
    BigInt::from(4u8) * BigInt::from(8u8).pow(2 * r as u32) * BigInt::from(k).pow(2)
}

/// Decides whether some point has `X ≥ k`.
pub fn decide_polynomial<C: Coefficient>(
    poly: &MultilinearPolynomial<C>,
    k: u64,
    config: &FptConfig,
) -> Result<Decision, FptError> {
    let l2 = poly.l2_norm_sq().to_big();
    let mut stats = DecisionStats {
        term_count: poly.term_count(),
        l2: l2.clone(),
        weight_sum: poly.weight_sum().to_big(),
        support_size: poly.support().len(),
        threshold: threshold_bound(poly.r(), k),
        search_max: None,
    };
    if poly.is_zero() {
        let verdict = Verdict::from_bool(k == 0);
        let witness = verdict.is_yes().then(|| Assignment::all_true(poly.n()));
        return Ok(Decision {
            verdict,
            route: Route::ZeroPolynomial,
            witness,
            stats,
        });
    }
    if l2 >= stats.threshold {
        return Ok(Decision {
            verdict: Verdict::Yes,
            route: Route::Threshold,
            witness: None,
            stats,
        });
    }
    if stats.support_size > config.search_cap as usize {
        return Err(FptError::SearchTooLarge {
            support: stats.support_size,
            cap: config.search_cap,
        });
    }
    let (max, tau) = maximize_over_support(poly)?;
    let verdict = Verdict::from_bool(max >= BigInt::from(k));
    stats.search_max = Some(max);
    Ok(Decision {
        verdict,
        route: Route::Search,
        witness: verdict.is_yes().then_some(tau),
        stats,
    })
}

/// [`decide_polynomial`] on the instance's polynomial.
pub fn decide_tlb(f: &CnfInstance, k: u64, config: &FptConfig) -> Result<Decision, FptError> {
    let poly: MultilinearPolynomial<BigInt> = instance_to_polynomial(f);
    decide_polynomial(&poly, k, config)
}

/// Compiled polynomial over support positions `0..s`.
struct SupportForm {
    vars: Vec<u32>,
    coeffs: Vec<i64>,
    terms_of: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

impl SupportForm {
    fn new<C: Coefficient>(poly: &MultilinearPolynomial<C>) -> Result<Self, FptError> {
        let vars: Vec<u32> = poly.support().into_iter().collect();
        let position: BTreeMap<u32, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut coeffs = Vec::with_capacity(poly.term_count());
        let mut members = Vec::with_capacity(poly.term_count());
        let mut terms_of = vec![Vec::new(); vars.len()];
        let mut budget: i64 = 0;
        for (t, (key, c)) in poly.terms().enumerate() {
            let c = c.to_i64().ok_or(FptError::CoefficientOverflow)?;
            budget = budget
                .checked_add(c.checked_abs().ok_or(FptError::CoefficientOverflow)?)
                .filter(|b| *b <= i64::MAX / 4)
                .ok_or(FptError::CoefficientOverflow)?;
            coeffs.push(c);
            let pos: Vec<usize> = key.vars().iter().map(|v| position[v]).collect();
            for &p in &pos {
                terms_of[p].push(t);
            }
            members.push(pos);
        }
        Ok(SupportForm {
            vars,
            coeffs,
            terms_of,
            members,
        })
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    /// Bit `s − 1 − j` of `mask` set means support variable `j` is `−1`, so
    /// ascending masks are the lexicographic order with `+1` first.
    fn term_values(&self, mask: u64) -> Vec<i64> {
        let s = self.len();
        self.members
            .iter()
            .zip(&self.coeffs)
            .map(|(pos, &c)| {
                let flips = pos.iter().filter(|&&p| mask >> (s - 1 - p) & 1 == 1).count();
                if flips % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect()
    }

    /// `(max value, smallest maximizing mask)` by Gray-code enumeration.
    fn maximize(&self) -> (i64, u64) {
        let s = self.len();
        let high = s.saturating_sub(14);
        let low = s - high;
        (0u64..1 << high)
            .into_par_iter()
            .map(|chunk| {
                let base = chunk << low;
                let mut values = self.term_values(base);
                let mut current: i64 = values.iter().sum();
                let mut best = (current, base);
                for i in 1u64..1 << low {
                    let bit = i.trailing_zeros() as usize;
                    let p = s - 1 - bit;
                    for &t in &self.terms_of[p] {
                        current -= 2 * values[t];
                        values[t] = -values[t];
                    }
                    let mask = base | (i ^ (i >> 1));
                    if current > best.0 || (current == best.0 && mask < best.1) {
                        best = (current, mask);
                    }
                }
                best
            })
            .reduce(
                || (i64::MIN, u64::MAX),
                |a, b| if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b },
            )
    }

    fn assignment(&self, mask: u64, n: u32) -> Assignment {
        let s = self.len();
        let mut tau = Assignment::all_true(n);
        for (j, &v) in self.vars.iter().enumerate() {
            if mask >> (s - 1 - j) & 1 == 1 {
                tau.set(v, -1);
            }
        }
        tau
    }
}

/// Exact `max X` over the support, with the lexicographically first
/// maximizer (`+1` before `−1`) extended by `+1` elsewhere.
pub fn maximize_over_support<C: Coefficient>(
    poly: &MultilinearPolynomial<C>,
) -> Result<(BigInt, Assignment), FptError> {
    if poly.is_zero() {
        return Ok((BigInt::zero(), Assignment::all_true(poly.n())));
    }
    let form = SupportForm::new(poly)?;
    if form.len() > 62 {
        return Err(FptError::SearchTooLarge {
            support: form.len(),
            cap: 62,
        });
    }
    let (max, mask) = form.maximize();
    Ok((BigInt::from(max), form.assignment(mask, poly.n())))
}

/// First point of `space`, laid over the support of `X` in ascending
/// variable order, with `X ≥ k`. Visits at most `max_points` points.
pub fn find_witness_in_space<C: Coefficient>(
    poly: &MultilinearPolynomial<C>,
    k: u64,
    space: &SampleSpace,
    max_points: u128,
) -> Option<Assignment> {
    let support: Vec<u32> = poly.support().into_iter().collect();
    assert_eq!(space.n(), support.len(), "space must cover the support");
    let target = C::from_u64(k)?;
    let total = space.len().unwrap_or(u128::MAX).min(max_points);
    let mut tau = Assignment::all_true(poly.n());
    for idx in 0..total {
        for (&v, x) in support.iter().zip(space.point(idx)) {
            tau.set(v, x);
        }
        if poly.evaluate(&tau) >= target {
            return Some(tau);
        }
    }
    None
}

/// A point with `X ≥ k` for a YES decision.
///
/// Search decisions carry their maximizer. Threshold decisions enumerate a
/// `4r`-wise independent space over the support, falling back to the full
/// cube when the support is at most `var_cap`.
pub fn find_polynomial_witness<C: Coefficient>(
    poly: &MultilinearPolynomial<C>,
    k: u64,
    decision: &Decision,
    config: &FptConfig,
) -> Result<Assignment, FptError> {
    if !decision.verdict.is_yes() {
        return Err(FptError::NotYes);
    }
    if let Some(tau) = &decision.witness {
        return Ok(tau.clone());
    }
    if k == 0 {
        return Ok(average_polynomial_assignment(poly));
    }
    let support = poly.support().len();
    let t = 4 * poly.r();
    if support >= 1 && t <= MAX_INDEPENDENCE {
        let space = kwise_sample_space(support, t);
        if let Some(tau) = find_witness_in_space(poly, k, &space, config.max_sample_points) {
            return Ok(tau);
        }
    }
    if support <= config.var_cap as usize {
        let (max, tau) = maximize_over_support(poly)?;
        if max >= BigInt::from(k) {
            return Ok(tau);
        }
    }
    Err(FptError::WitnessSearchExhausted)
}

/// An assignment with `sat(τ, F) · 2^r ≥ (2^r − 1)·m + k` for a YES decision.
pub fn find_witness(
    f: &CnfInstance,
    k: u64,
    decision: &Decision,
    config: &FptConfig,
) -> Result<Assignment, FptError> {
    let poly: MultilinearPolynomial<BigInt> = instance_to_polynomial(f);
    let tau = find_polynomial_witness(&poly, k, decision, config)?.extended_to(f.n());
    if meets_tlb(sat_count(&tau, f), f.r(), f.m(), k) {
        Ok(tau)
    } else {
        Err(FptError::WitnessSearchExhausted)
    }
}

/// Conditional expectations on `X`: variables are fixed in ascending order,
/// each to the sign that does not lower `E[X | fixed]`, ties going to `+1`.
/// The result has `X(τ) ≥ E[X] = 0`.
pub fn average_polynomial_assignment<C: Coefficient>(poly: &MultilinearPolynomial<C>) -> Assignment {
    // once every smaller variable is fixed, the terms whose largest variable
    // is v decide the choice for v
    let mut by_last: BTreeMap<u32, Vec<(&TermKey, &C)>> = BTreeMap::new();
    for (key, c) in poly.terms() {
        by_last.entry(*key.vars().last().unwrap()).or_default().push((key, c));
    }
    let mut tau = Assignment::all_true(poly.n());
    for (v, terms) in by_last {
        let gain = terms.iter().fold(C::zero(), |acc, (key, c)| {
            let rest: i8 = key
                .vars()
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| tau.value(u))
                .product();
            if rest > 0 {
                acc + (*c).clone()
            } else {
                acc - (*c).clone()
            }
        });
        if gain.is_negative() {
            tau.set(v, -1);
        }
    }
    tau
}

/// An assignment satisfying at least `⌈(1 − 2^{−r})·m⌉` clauses.
pub fn average_assignment(f: &CnfInstance) -> Assignment {
    let poly: MultilinearPolynomial<BigInt> = instance_to_polynomial(f);
    average_polynomial_assignment(&poly)
}

/// A small Lin2 instance equivalent to `(F, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bikernel {
    pub system: Lin2System<BigInt>,
    pub k: u64,
    /// How the original question was settled; [`Route::Search`] means the
    /// system is the polynomial's own translation and nothing was decided.
    pub route: Route,
    /// `var_map[i]` is the original variable behind system variable `i + 1`.
    pub var_map: Vec<u32>,
}

fn trivial_system(yes: bool) -> Bikernel {
    let one = || BigInt::one();
    let equations = if yes {
        vec![LinEquation::new(vec![1], false, one()).unwrap()]
    } else {
        vec![
            LinEquation::new(vec![1], false, one()).unwrap(),
            LinEquation::new(vec![1], true, one()).unwrap(),
        ]
    };
    Bikernel {
        system: Lin2System::new(1, equations).unwrap(),
        k: 1,
        route: Route::ZeroPolynomial,
        var_map: vec![],
    }
}

/// Bikernel to weighted Max-r-Lin2 above `W/2`.
///
/// Instances settled by the zero polynomial or the threshold become fixed
/// one-variable YES/NO systems with `k = 1`. Otherwise every term of `X`
/// becomes an equation over the support, renumbered to `1..=s`; its total
/// weight is then below `4·8^{2r}·k²`.
pub fn bikernel(f: &CnfInstance, k: u64) -> Result<Bikernel, FptError> {
    let poly: MultilinearPolynomial<BigInt> = instance_to_polynomial(f);
    if poly.is_zero() {
        return Ok(trivial_system(k == 0));
    }
    if poly.l2_norm_sq() >= threshold_bound(poly.r(), k) {
        return Ok(Bikernel {
            route: Route::Threshold,
            ..trivial_system(true)
        });
    }
    let support: Vec<u32> = poly.support().into_iter().collect();
    let rename: BTreeMap<u32, u32> = support
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32 + 1))
        .collect();
    let mut compact = MultilinearPolynomial::<BigInt>::zero(poly.r(), support.len() as u32);
    for (key, c) in poly.terms() {
        let vars = key.vars().iter().map(|v| rename[v]).collect();
        compact.add_term(TermKey::new(vars).unwrap(), c.clone());
    }
    let (system, k) = polynomial_to_lin2(&compact, k)?;
    Ok(Bikernel {
        system,
        k,
        route: Route::Search,
        var_map: support,
    })
}

/// Kernel back to exact-r CNF: the bikernel followed by the clause gadget.
/// Returns the instance and its parameter `2^{r−1}·k`.
pub fn kernel(f: &CnfInstance, k: u64) -> Result<(CnfInstance, u64), FptError> {
    let bk = bikernel(f, k)?;
    Ok(lin2_to_cnf(&bk.system, f.r(), bk.k)?)
}

/// Whether `max X ≥ k` follows from positive support; used by tests of the
/// probabilistic bound.
pub fn moment_lower_bound_holds<C: Coefficient>(poly: &MultilinearPolynomial<C>, max: &BigInt) -> bool {
    // max X ≥ √(Σc²) / (2·8^r)  ⟺  (2·8^r·max)² ≥ Σc² for max ≥ 0
    let scale = BigInt::from(2u8) * BigInt::from(8u8).pow(poly.r() as u32);
    let lhs = scale * max;
    !max.is_negative() && &lhs * &lhs >= poly.l2_norm_sq().to_big()
}
