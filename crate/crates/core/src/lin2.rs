//! Weighted linear equations over GF(2).
//!
//! A system is built from a polynomial by turning every term `c_I Π x_i` into
//! the equation `Σ_{i∈I} z_i = b` with `b = [c_I < 0]` and weight `|c_I|`;
//! under `x_i = (−1)^{z_i}` the excess (satisfied minus unsatisfied weight)
//! equals the polynomial's value. The clause gadget maps each equation back to
//! `2^{r−1}` clauses of width `r`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Assignment, Clause, CnfInstance, FormulaError, Literal};
use crate::fourier::MultilinearPolynomial;
use crate::scalar::Coefficient;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Lin2Error {
    #[error("the zero polynomial has no equations")]
    EmptyPolynomial,
    #[error("equation {index} has {width} variables, gadget width is {r}")]
    EquationTooWide { index: usize, width: usize, r: usize },
    #[error("equation {index} is malformed: {reason}")]
    InvalidEquation { index: usize, reason: String },
    #[error("{n} variables exceed the exhaustive-search cap of {cap}")]
    TooLarge { n: u32, cap: u32 },
    #[error("weight {0} does not fit the required integer width")]
    WeightOverflow(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// `Σ_{i∈vars} z_i = rhs (mod 2)` carrying a positive weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinEquation<W> {
    vars: Vec<u32>,
    rhs: bool,
    weight: W,
}

impl<W: Coefficient> LinEquation<W> {
    /// Variables are sorted; returns `None` for an empty or repeating
    /// variable list, variable 0, or a non-positive weight.
    pub fn new(mut vars: Vec<u32>, rhs: bool, weight: W) -> Option<Self> {
        vars.sort_unstable();
        let distinct = vars.windows(2).all(|p| p[0] != p[1]);
        let ok = !vars.is_empty() && distinct && vars[0] >= 1 && weight.is_positive();
        ok.then_some(LinEquation { vars, rhs, weight })
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn weight(&self) -> &W {
        &self.weight
    }

    /// `z[v - 1]` is the value of variable `v`.
    pub fn is_satisfied(&self, z: &[bool]) -> bool {
        let parity = self.vars.iter().filter(|&&v| z[v as usize - 1]).count() % 2 == 1;
        parity == self.rhs
    }
}

/// Weighted equations; equations sharing `(vars, rhs)` are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lin2System<W> {
    n: u32,
    equations: Vec<LinEquation<W>>,
}

impl<W: Coefficient> Lin2System<W> {
    /// Merges duplicates into the first occurrence, keeping input order.
    pub fn new(n: u32, equations: impl IntoIterator<Item = LinEquation<W>>) -> Result<Self, Lin2Error> {
        let mut merged: Vec<LinEquation<W>> = Vec::new();
        let mut index: HashMap<(Vec<u32>, bool), usize> = HashMap::new();
        for (i, eq) in equations.into_iter().enumerate() {
            if let Some(&v) = eq.vars.last() {
                if v > n {
                    return Err(Lin2Error::InvalidEquation {
                        index: i,
                        reason: format!("variable {v} outside 1..={n}"),
                    });
                }
            }
            match index.get(&(eq.vars.clone(), eq.rhs)) {
                Some(&at) => merged[at].weight = merged[at].weight.clone() + eq.weight,
                None => {
                    index.insert((eq.vars.clone(), eq.rhs), merged.len());
                    merged.push(eq);
                }
            }
        }
        Ok(Lin2System {
            n,
            equations: merged,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn equations(&self) -> &[LinEquation<W>] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// `W`, the sum of all weights.
    pub fn total_weight(&self) -> W {
        self.equations
            .iter()
            .fold(W::zero(), |acc, e| acc + e.weight.clone())
    }

    /// Largest equation width.
    pub fn max_width(&self) -> usize {
        self.equations.iter().map(|e| e.vars.len()).max().unwrap_or(0)
    }

    pub fn occurring_vars(&self) -> BTreeSet<u32> {
        self.equations.iter().flat_map(|e| e.vars.iter().copied()).collect()
    }

    pub fn satisfied_weight(&self, z: &[bool]) -> W {
        self.equations
            .iter()
            .filter(|e| e.is_satisfied(z))
            .fold(W::zero(), |acc, e| acc + e.weight.clone())
    }

    /// Serializes to the `p lin2` text format, comment lines first.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            if c.is_empty() {
                out.push_str("c\n");
            } else {
                writeln!(out, "c {c}").unwrap();
            }
        }
        writeln!(out, "p lin2 {} {}", self.n, self.equations.len()).unwrap();
        for e in &self.equations {
            write!(out, "{} {}", e.weight, e.rhs as u8).unwrap();
            for v in &e.vars {
                write!(out, " {v}").unwrap();
            }
            out.push_str(" 0\n");
        }
        out
    }

    /// Parses the `p lin2` text format, returning the system and its comment
    /// lines (without the leading `c `).
    pub fn parse_text(text: &str) -> Result<(Self, Vec<String>), Lin2Error> {
        let mut comments = Vec::new();
        let mut header: Option<(u32, usize)> = None;
        let mut equations = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let err = |message: String| Lin2Error::Parse {
                line: lineno,
                message,
            };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed == "c" || trimmed.starts_with("c ") {
                comments.push(trimmed.get(2..).unwrap_or("").to_string());
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens[0] == "p" {
                if header.is_some() {
                    return Err(err("duplicate header".into()));
                }
                if tokens.len() != 4 || tokens[1] != "lin2" {
                    return Err(err("expected `p lin2 <n> <num_equations>`".into()));
                }
                let n = tokens[2]
                    .parse()
                    .map_err(|_| err(format!("bad variable count `{}`", tokens[2])))?;
                let count = tokens[3]
                    .parse()
                    .map_err(|_| err(format!("bad equation count `{}`", tokens[3])))?;
                header = Some((n, count));
                continue;
            }
            let Some((n, _)) = header else {
                return Err(err("equation before header".into()));
            };
            if tokens.len() < 4 || *tokens.last().unwrap() != "0" {
                return Err(err("expected `<weight> <rhs> <v1> ... <vq> 0`".into()));
            }
            let weight = W::from_str(tokens[0]).map_err(|_| err(format!("bad weight `{}`", tokens[0])))?;
            let rhs = match tokens[1] {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("rhs must be 0 or 1, got `{other}`"))),
            };
            let vars = tokens[2..tokens.len() - 1]
                .iter()
                .map(|t| match t.parse::<u32>() {
                    Ok(v) if (1..=n).contains(&v) => Ok(v),
                    _ => Err(err(format!("bad variable `{t}`"))),
                })
                .collect::<Result<Vec<u32>, _>>()?;
            let eq = LinEquation::new(vars, rhs, weight)
                .ok_or_else(|| err("empty, repeating, or non-positive equation".into()))?;
            equations.push(eq);
        }
        let Some((n, count)) = header else {
            return Err(Lin2Error::Parse {
                line: 0,
                message: "missing `p lin2` header".into(),
            });
        };
        if count != equations.len() {
            return Err(Lin2Error::Parse {
                line: 0,
                message: format!("header announces {count} equations, found {}", equations.len()),
            });
        }
        Ok((Self::new(n, equations)?, comments))
    }
}

/// One equation per term: `vars = I`, `rhs = [c_I < 0]`, `weight = |c_I|`.
/// The parameter passes through unchanged.
pub fn polynomial_to_lin2<C: Coefficient>(
    poly: &MultilinearPolynomial<C>,
    k: u64,
) -> Result<(Lin2System<C>, u64), Lin2Error> {
    if poly.is_zero() {
        return Err(Lin2Error::EmptyPolynomial);
    }
    let equations = poly.terms().map(|(key, c)| LinEquation {
        vars: key.vars().to_vec(),
        rhs: c.is_negative(),
        weight: c.abs(),
    });
    Ok((Lin2System::new(poly.n(), equations)?, k))
}

/// Satisfied weight minus unsatisfied weight.
pub fn lin2_excess<W: Coefficient>(z: &[bool], sys: &Lin2System<W>) -> W {
    sys.equations.iter().fold(W::zero(), |acc, e| {
        if e.is_satisfied(z) {
            acc + e.weight.clone()
        } else {
            acc - e.weight.clone()
        }
    })
}

/// `x_i = (−1)^{z_i}`: `z = 0` is `+1`.
pub fn z_to_spins(z: &[bool]) -> Assignment {
    Assignment::from_bools(z.iter().map(|&b| !b))
}

pub fn spins_to_z(tau: &Assignment) -> Vec<bool> {
    tau.values().iter().map(|&v| v < 0).collect()
}

/// The gadget clauses read `z_i = 1` as true: a CNF assignment maps back to
/// `z_i = [τ(i) = +1]`.
pub fn gadget_assignment_to_z(tau: &Assignment) -> Vec<bool> {
    tau.values().iter().map(|&v| v > 0).collect()
}

/// Replaces every equation by the `2^{r−1}` clauses that exclude its
/// violating patterns, each repeated `weight` times; returns the instance and
/// the scaled parameter `2^{r−1}·k`.
///
/// Equations narrower than `r` are padded with the smallest occurring
/// variables not already in the equation, and with fresh variables
/// `n+1, n+2, …` when the system has fewer than `r` variables overall.
/// Patterns `δ` are emitted in ascending binary order with the smallest
/// variable as the most significant bit; literal `i` is `x_i` if `δ_i = 0`
/// and `x̄_i` otherwise.
pub fn lin2_to_cnf<W: Coefficient>(
    sys: &Lin2System<W>,
    r: usize,
    k: u64,
) -> Result<(CnfInstance, u64), Lin2Error> {
    if let Some((index, e)) = sys.equations.iter().enumerate().find(|(_, e)| e.vars.len() > r) {
        return Err(Lin2Error::EquationTooWide {
            index,
            width: e.vars.len(),
            r,
        });
    }
    let occurring: Vec<u32> = sys.occurring_vars().into_iter().collect();
    let fresh = r.saturating_sub(occurring.len()) as u32;
    let n = sys.n + fresh;
    let pool: Vec<u32> = occurring.iter().copied().chain(sys.n + 1..=n).collect();

    let per_equation = sys
        .equations
        .par_iter()
        .map(|e| {
            let mult = e
                .weight
                .to_u64()
                .ok_or_else(|| Lin2Error::WeightOverflow(e.weight.to_string()))?;
            Ok((gadget_clauses(e, &pool, r), mult))
        })
        .collect::<Result<Vec<_>, Lin2Error>>()?;

    let clauses = per_equation
        .into_iter()
        .flat_map(|(cs, mult)| cs.into_iter().map(move |c| (c, mult)));
    let cnf = CnfInstance::from_clauses(r, n, clauses)?;
    let scaled_k = k
        .checked_mul(1u64 << (r - 1))
        .ok_or_else(|| Lin2Error::WeightOverflow(format!("2^{} * {k}", r - 1)))?;
    Ok((cnf, scaled_k))
}

/// Padded variable list of an equation, ascending.
pub fn padded_vars<W: Coefficient>(e: &LinEquation<W>, pool: &[u32], r: usize) -> Vec<u32> {
    let mut vars = e.vars.clone();
    let missing = r - vars.len();
    vars.extend(pool.iter().copied().filter(|v| !e.vars.contains(v)).take(missing));
    assert_eq!(vars.len(), r, "padding pool too small");
    vars.sort_unstable();
    vars
}

fn gadget_clauses<W: Coefficient>(e: &LinEquation<W>, pool: &[u32], r: usize) -> Vec<Clause> {
    let vars = padded_vars(e, pool, r);
    // position of each equation variable inside the padded list
    let in_equation: Vec<bool> = vars.iter().map(|v| e.vars.contains(v)).collect();
    (0u32..1 << r)
        .filter_map(|pattern| {
            let bit = |i: usize| pattern >> (r - 1 - i) & 1 == 1;
            let parity = (0..r).filter(|&i| in_equation[i] && bit(i)).count() % 2 == 1;
            if parity == e.rhs {
                return None;
            }
            let lits = (0..r).map(|i| Literal::new(vars[i], !bit(i)));
            Some(Clause::new(lits).expect("padded variables are distinct"))
        })
        .collect()
}

/// Exact optimum of the satisfied weight by enumeration; the first maximizer
/// in lexicographic order with `z = 0` before `z = 1` is returned.
pub fn lin2_brute_force<W: Coefficient>(
    sys: &Lin2System<W>,
    var_cap: u32,
) -> Result<(Vec<bool>, W), Lin2Error> {
    let n = sys.n;
    if n > var_cap || n > 40 {
        return Err(Lin2Error::TooLarge {
            n,
            cap: var_cap.min(40),
        });
    }
    let masked = sys
        .equations
        .iter()
        .map(|e| {
            let mask = e.vars.iter().fold(0u64, |m, &v| m | 1 << (n - v));
            let w = e
                .weight
                .to_i128()
                .ok_or_else(|| Lin2Error::WeightOverflow(e.weight.to_string()))?;
            Ok((mask, e.rhs as u32, w))
        })
        .collect::<Result<Vec<_>, Lin2Error>>()?;
    let score = |z: u64| -> i128 {
        masked
            .iter()
            .filter(|(mask, rhs, _)| (z & mask).count_ones() % 2 == *rhs)
            .map(|t| t.2)
            .sum()
    };
    let total = 1u64 << n;
    let blocks = 1u64 << n.saturating_sub(12);
    let block_len = total / blocks;
    let (best, arg) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * block_len;
            let mut best = (score(start), start);
            for z in start + 1..start + block_len {
                let s = score(z);
                if s > best.0 {
                    best = (s, z);
                }
            }
            best
        })
        .reduce(
            || (i128::MIN, u64::MAX),
            |a, b| if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b },
        );
    let z = (1..=n).map(|v| arg >> (n - v) & 1 == 1).collect();
    let best = W::from_i128(best).ok_or_else(|| Lin2Error::WeightOverflow(best.to_string()))?;
    Ok((z, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{sat_count, validate_instance};
    use crate::fourier::{instance_to_polynomial, TermKey};

    fn eq(vars: &[u32], rhs: bool, w: i64) -> LinEquation<i64> {
        LinEquation::new(vars.to_vec(), rhs, w).unwrap()
    }

    fn zs(n: u32) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn polynomial_to_lin2_sign_rule() {
        let mut p = MultilinearPolynomial::<i64>::zero(2, 2);
        p.add_term(TermKey::new(vec![1, 2]).unwrap(), -2);
        let (sys, k) = polynomial_to_lin2(&p, 3).unwrap();
        assert_eq!(k, 3);
        assert_eq!(sys.equations(), &[eq(&[1, 2], true, 2)]);
        assert_eq!(sys.total_weight(), 2);

        let mut p = MultilinearPolynomial::<i64>::zero(2, 2);
        p.add_term(TermKey::new(vec![2]).unwrap(), 2);
        let (sys, _) = polynomial_to_lin2(&p, 0).unwrap();
        assert_eq!(sys.equations(), &[eq(&[2], false, 2)]);

        let zero = MultilinearPolynomial::<i64>::zero(2, 2);
        assert_eq!(polynomial_to_lin2(&zero, 1).unwrap_err(), Lin2Error::EmptyPolynomial);
    }

    #[test]
    fn excess_examples() {
        let sys = Lin2System::new(2, [eq(&[1, 2], true, 2)]).unwrap();
        assert_eq!(lin2_excess(&[false, true], &sys), 2);
        assert_eq!(lin2_excess(&[false, false], &sys), -2);
    }

    #[test]
    fn excess_equals_polynomial_value() {
        let f = validate_instance(&[[1i64, 2], [-1, -2], [2, -3], [1, 3]], 2, 3).unwrap();
        let p = instance_to_polynomial::<i64>(&f);
        let (sys, _) = polynomial_to_lin2(&p, 0).unwrap();
        for z in zs(3) {
            assert_eq!(lin2_excess(&z, &sys), p.evaluate(&z_to_spins(&z)));
        }
        // max excess = max X = 2 on {x1x2, -x1-x2}
        let g = validate_instance(&[[1i64, 2], [-1, -2]], 2, 2).unwrap();
        let pg = instance_to_polynomial::<i64>(&g);
        let (sg, _) = polynomial_to_lin2(&pg, 0).unwrap();
        let max_excess = zs(2).map(|z| lin2_excess(&z, &sg)).max().unwrap();
        assert_eq!(max_excess, 2);
    }

    #[test]
    fn merges_equal_equations() {
        let sys = Lin2System::new(2, [eq(&[1], false, 1), eq(&[2], true, 1), eq(&[1], false, 3)]).unwrap();
        assert_eq!(sys.equations(), &[eq(&[1], false, 4), eq(&[2], true, 1)]);
        // contradictory pairs stay separate
        let sys = Lin2System::new(1, [eq(&[1], false, 1), eq(&[1], true, 1)]).unwrap();
        assert_eq!(sys.len(), 2);
        assert!(Lin2System::new(1, [eq(&[2], false, 1)]).is_err());
    }

    #[test]
    fn equation_validation() {
        assert!(LinEquation::new(vec![], false, 1i64).is_none());
        assert!(LinEquation::new(vec![1, 1], false, 1i64).is_none());
        assert!(LinEquation::new(vec![1], false, 0i64).is_none());
        assert!(LinEquation::new(vec![0], false, 1i64).is_none());
    }

    #[test]
    fn gadget_even_equation() {
        let sys = Lin2System::new(2, [eq(&[1, 2], false, 1)]).unwrap();
        let (cnf, k) = lin2_to_cnf(&sys, 2, 1).unwrap();
        assert_eq!(k, 2);
        let expected = validate_instance(&[[1i64, -2], [-1, 2]], 2, 2).unwrap();
        assert_eq!(cnf, expected);
        for z in zs(2) {
            let tau = Assignment::from_bools(z.iter().copied());
            let hits = sat_count(&tau, &cnf);
            assert_eq!(hits, if sys.equations()[0].is_satisfied(&z) { 2 } else { 1 });
        }
    }

    #[test]
    fn gadget_weighted_odd_equation() {
        let sys = Lin2System::new(2, [eq(&[1, 2], true, 2)]).unwrap();
        let (cnf, k) = lin2_to_cnf(&sys, 2, 3).unwrap();
        assert_eq!(k, 6);
        assert_eq!(cnf.m(), 4);
        let expected = validate_instance(&[[1i64, 2], [1, 2], [-1, -2], [-1, -2]], 2, 2).unwrap();
        assert_eq!(cnf, expected);
    }

    #[test]
    fn gadget_padding() {
        let sys = Lin2System::new(2, [eq(&[1], true, 1), eq(&[2], false, 1)]).unwrap();
        let (cnf, _) = lin2_to_cnf(&sys, 2, 0).unwrap();
        // z1 = 1 excludes δ1 = 0: clauses x1x2 and x1-x2
        let c1 = Clause::new([Literal::positive(1), Literal::positive(2)]).unwrap();
        let c2 = Clause::new([Literal::positive(1), Literal::negative(2)]).unwrap();
        assert_eq!(cnf.multiplicity(&c1), 1);
        // z2 = 0 padded with z1 excludes δ2 = 1: x1-x2 again, and -x1-x2
        assert_eq!(cnf.multiplicity(&c2), 2);
        assert_eq!(cnf.m(), 4);

        // fewer than r variables overall pulls in fresh ones
        let single = Lin2System::new(1, [eq(&[1], true, 1)]).unwrap();
        let (cnf, _) = lin2_to_cnf(&single, 3, 1).unwrap();
        assert_eq!(cnf.n(), 3);
        assert_eq!(cnf.m(), 4);
        for z in zs(3) {
            let tau = Assignment::from_bools(z.iter().copied());
            assert_eq!(sat_count(&tau, &cnf), if z[0] { 4 } else { 3 });
        }
    }

    #[test]
    fn gadget_rejects_wide_equation() {
        let sys = Lin2System::new(3, [eq(&[1, 2, 3], true, 1)]).unwrap();
        assert_eq!(
            lin2_to_cnf(&sys, 2, 0).unwrap_err(),
            Lin2Error::EquationTooWide { index: 0, width: 3, r: 2 }
        );
    }

    #[test]
    fn brute_force_examples() {
        let sys = Lin2System::new(2, [eq(&[1, 2], true, 2)]).unwrap();
        let (z, best) = lin2_brute_force(&sys, 20).unwrap();
        assert_eq!(best, 2);
        assert_eq!(z, vec![false, true]);
        let tight = Lin2System::new(1, [eq(&[1], false, 1), eq(&[1], true, 1)]).unwrap();
        assert_eq!(lin2_brute_force(&tight, 20).unwrap().1, 1);
        assert!(matches!(lin2_brute_force(&Lin2System::<i64>::new(30, []).unwrap(), 20), Err(Lin2Error::TooLarge { .. })));
    }

    #[test]
    fn text_round_trip() {
        let sys = Lin2System::new(4, [eq(&[1, 3], true, 5), eq(&[2], false, 1), eq(&[1, 2, 4], false, 2)]).unwrap();
        let comments = vec!["k 3".to_string(), "r 3".to_string()];
        let text = sys.to_text(&comments);
        assert_eq!(text, "c k 3\nc r 3\np lin2 4 3\n5 1 1 3 0\n1 0 2 0\n2 0 1 2 4 0\n");
        let (back, cs) = Lin2System::<i64>::parse_text(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(cs, comments);
        assert_eq!(back.to_text(&cs), text);
    }

    #[test]
    fn text_errors() {
        assert!(Lin2System::<i64>::parse_text("1 0 1 0\n").is_err());
        assert!(Lin2System::<i64>::parse_text("p lin2 2 1\n1 2 1 0\n").is_err());
        assert!(Lin2System::<i64>::parse_text("p lin2 2 2\n1 0 1 0\n").is_err());
        assert!(Lin2System::<i64>::parse_text("p lin2 2 1\n1 0 3 0\n").is_err());
        assert!(Lin2System::<i64>::parse_text("p lin2 2 1\n1 0 1\n").is_err());
        assert!(Lin2System::<i64>::parse_text("p lin2 2 1\n0 0 1 0\n").is_err());
    }
}
