//! Multilinear ±1 polynomials.
//!
//! Every exact-r formula `F` has an integer polynomial
//! `X(x) = Σ_C [1 − Π_{i∈C}(1 + ε_i x_i)]`, with `ε_i = −1` when `x_i` occurs
//! positively in `C`. At a ±1 point `τ` it evaluates to
//! `2^r · sat(τ, F) − (2^r − 1)·m`, the scaled distance from the average.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Assignment, Clause, CnfInstance, CspConstraint};
use crate::scalar::Coefficient;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FourierError {
    #[error("constraint has an empty scope")]
    EmptyScope,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A nonempty set of variables, stored sorted. Ordered by size, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermKey(Vec<u32>);

impl TermKey {
    /// Sorts and deduplicates; returns `None` for an empty set.
    pub fn new(mut vars: Vec<u32>) -> Option<Self> {
        vars.sort_unstable();
        vars.dedup();
        (!vars.is_empty()).then_some(TermKey(vars))
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, var: u32) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    /// Product of the point's values over the set.
    pub fn character(&self, tau: &Assignment) -> i8 {
        self.0.iter().map(|&v| tau.value(v)).product()
    }
}

impl Ord for TermKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `Σ_{I∈S} c_I Π_{i∈I} x_i` with nonzero integer coefficients and `1 ≤ |I| ≤ r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPolynomial<C> {
    r: usize,
    n: u32,
    terms: BTreeMap<TermKey, C>,
}

impl<C: Coefficient> MultilinearPolynomial<C> {
    pub fn zero(r: usize, n: u32) -> Self {
        MultilinearPolynomial {
            r,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Degree bound.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Size of the variable universe.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c · Π_{i∈I} x_i`, dropping the term if the coefficient cancels.
    ///
    /// Panics if the set is larger than the degree bound or leaves the universe.
    pub fn add_term(&mut self, key: TermKey, c: C) {
        assert!(key.degree() <= self.r, "term exceeds degree bound");
        assert!(
            key.vars().last().is_some_and(|&v| v <= self.n),
            "term leaves the variable universe"
        );
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert!(other.r <= self.r && other.n <= self.n);
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &C)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, vars: &[u32]) -> C {
        TermKey::new(vars.to_vec())
            .and_then(|k| self.terms.get(&k).cloned())
            .unwrap_or_else(C::zero)
    }

    /// Variables appearing in at least one term.
    pub fn support(&self) -> BTreeSet<u32> {
        self.terms.keys().flat_map(|k| k.vars().iter().copied()).collect()
    }

    pub fn evaluate(&self, tau: &Assignment) -> C {
        self.terms.iter().fold(C::zero(), |acc, (k, c)| {
            if k.character(tau) > 0 {
                acc + c.clone()
            } else {
                acc - c.clone()
            }
        })
    }

    /// `Σ c_I²`, which equals `E[X²]` under the uniform distribution.
    pub fn l2_norm_sq(&self) -> C {
        self.terms
            .values()
            .fold(C::zero(), |acc, c| acc + c.clone() * c.clone())
    }

    /// `|S|`, the number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `Σ |c_I|`.
    pub fn weight_sum(&self) -> C {
        self.terms.values().fold(C::zero(), |acc, c| acc + c.abs())
    }

    /// Converts the coefficients to another exact type.
    pub fn map_coefficients<D: Coefficient>(&self) -> Option<MultilinearPolynomial<D>> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = match c.to_i128() {
                Some(small) => D::from_i128(small)?,
                None => D::from_str(&c.to_big().to_string()).ok()?,
            };
            terms.insert(k.clone(), d);
        }
        Some(MultilinearPolynomial {
            r: self.r,
            n: self.n,
            terms,
        })
    }

    /// One term per line: the coefficient followed by the variables.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in &self.terms {
            write!(out, "{c}").unwrap();
            for v in k.vars() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_text`](Self::to_text). Blank lines are ignored.
    pub fn parse_text(text: &str, r: usize, n: u32) -> Result<Self, FourierError> {
        let mut poly = Self::zero(r, n);
        for (idx, line) in text.lines().enumerate() {
            let err = |message: String| FourierError::Parse {
                line: idx + 1,
                message,
            };
            let mut tokens = line.split_whitespace();
            let Some(first) = tokens.next() else { continue };
            let c = C::from_str(first).map_err(|_| err(format!("bad coefficient `{first}`")))?;
            let vars = tokens
                .map(|t| match t.parse::<u32>() {
                    Ok(v) if (1..=n).contains(&v) => Ok(v),
                    _ => Err(err(format!("bad variable `{t}`"))),
                })
                .collect::<Result<Vec<u32>, _>>()?;
            if vars.len() > r {
                return Err(err(format!("term of degree {} exceeds {r}", vars.len())));
            }
            let key = TermKey::new(vars).ok_or_else(|| err("term without variables".into()))?;
            poly.add_term(key, c);
        }
        Ok(poly)
    }
}

/// Coefficient table of `1 − Π(1 + ε_i x_i)` for one clause: the nonempty
/// subset `J` gets `−Π_{i∈J} ε_i`, i.e. `+1` when `J` holds an odd number of
/// positive literals and `−1` otherwise.
fn clause_expansion(clause: &Clause) -> impl Iterator<Item = (Vec<u32>, i8)> + '_ {
    let lits = clause.literals();
    (1u32..1 << lits.len()).map(move |mask| {
        let mut vars = Vec::with_capacity(mask.count_ones() as usize);
        let mut positives = 0;
        for (j, l) in lits.iter().enumerate() {
            if mask >> j & 1 == 1 {
                vars.push(l.var());
                positives += l.is_positive() as u32;
            }
        }
        (vars, if positives % 2 == 1 { 1 } else { -1 })
    })
}

/// Expansion of a single clause over an `n`-variable universe.
pub fn clause_to_polynomial<C: Coefficient>(clause: &Clause, n: u32) -> MultilinearPolynomial<C> {
    let mut poly = MultilinearPolynomial::zero(clause.len(), n);
    for (vars, sign) in clause_expansion(clause) {
        poly.add_term(TermKey(vars), C::from_i8(sign).unwrap());
    }
    poly
}

/// `Σ_{v∈V} [Π_j (1 + x_{i_j} v_j) − 1]`: the coefficient of a nonempty
/// `J ⊆ scope` is `Σ_{v∈V} Π_{j∈J} v_j`.
pub fn csp_constraint_to_polynomial<C: Coefficient>(
    f: &CspConstraint,
    n: u32,
) -> Result<MultilinearPolynomial<C>, FourierError> {
    let scope = f.scope();
    if scope.is_empty() {
        return Err(FourierError::EmptyScope);
    }
    let mut poly = MultilinearPolynomial::zero(scope.len(), n);
    for mask in 1u32..1 << scope.len() {
        let coeff: i64 = f
            .satisfying()
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, &x)| x as i64)
                    .product::<i64>()
            })
            .sum();
        let vars = (0..scope.len())
            .filter(|j| mask >> j & 1 == 1)
            .map(|j| scope[j])
            .collect();
        poly.add_term(TermKey::new(vars).unwrap(), C::from_i64(coeff).unwrap());
    }
    Ok(poly)
}

/// Simplified polynomial of a whole instance, like terms combined.
///
/// Coefficients are accumulated exactly in `i128` (their magnitude is at most
/// `m`) and then converted; panics if a coefficient does not fit `C`.
pub fn instance_to_polynomial<C: Coefficient>(f: &CnfInstance) -> MultilinearPolynomial<C> {
    let clauses: Vec<(&Clause, u64)> = f.clauses().collect();
    let sums = clauses
        .par_iter()
        .fold(HashMap::<Vec<u32>, i128>::new, |mut acc, (clause, mult)| {
            for (vars, sign) in clause_expansion(clause) {
                *acc.entry(vars).or_insert(0) += sign as i128 * *mult as i128;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut terms = BTreeMap::new();
    for (vars, c) in sums {
        if c != 0 {
            let c = C::from_i128(c).expect("coefficient overflows the coefficient type");
            terms.insert(TermKey(vars), c);
        }
    }
    MultilinearPolynomial {
        r: f.r(),
        n: f.n(),
        terms,
    }
}

/// Sum of the constraint polynomials of a CSP instance.
pub fn csp_instance_to_polynomial<C: Coefficient>(
    constraints: &[CspConstraint],
    r: usize,
    n: u32,
) -> Result<MultilinearPolynomial<C>, FourierError> {
    let mut poly = MultilinearPolynomial::zero(r, n);
    for f in constraints {
        poly.add_assign(&csp_constraint_to_polynomial(f, n)?);
    }
    Ok(poly)
}
