//! DIMACS CNF with multiplicity expressed by repeated clause lines.

use std::fmt::Write;

use thiserror::Error;

use tlbsat::{validate_instance, CnfInstance, FormulaError};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: FormulaError },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

impl DimacsError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        DimacsError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Raw clause list with the line on which each clause starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCnf {
    pub n: u32,
    pub clauses: Vec<Vec<i64>>,
    pub lines: Vec<usize>,
    pub comments: Vec<String>,
}

/// Tokenizes a DIMACS file. Clauses may span lines; each ends with `0`.
pub fn parse_raw(text: &str) -> Result<RawCnf, DimacsError> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut comments = Vec::new();
    let mut clauses = Vec::new();
    let mut lines = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == "%" {
            continue;
        }
        if trimmed == "c" || trimmed.starts_with("c ") || trimmed.starts_with("c\t") {
            comments.push(trimmed[1..].trim_start().to_string());
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::parse(lineno, "duplicate header"));
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "cnf" {
                return Err(DimacsError::parse(lineno, "expected `p cnf <n> <m>`"));
            }
            let n = tokens[2]
                .parse()
                .map_err(|_| DimacsError::parse(lineno, format!("bad variable count `{}`", tokens[2])))?;
            let m = tokens[3]
                .parse()
                .map_err(|_| DimacsError::parse(lineno, format!("bad clause count `{}`", tokens[3])))?;
            header = Some((n, m, lineno));
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::parse(lineno, "clause before `p cnf` header"));
        }
        for token in trimmed.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| DimacsError::parse(lineno, format!("bad literal `{token}`")))?;
            if current.is_empty() {
                current_line = lineno;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::parse(lineno, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
                lines.push(current_line);
            } else {
                current.push(lit);
            }
        }
    }
    let Some((n, m, header_line)) = header else {
        return Err(DimacsError::parse(0, "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(DimacsError::parse(current_line, "clause not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(DimacsError::parse(
            header_line,
            format!("header announces {m} clauses, found {}", clauses.len()),
        ));
    }
    Ok(RawCnf {
        n,
        clauses,
        lines,
        comments,
    })
}

impl RawCnf {
    /// Validates into an exact-r instance; `r` defaults to the width of the
    /// first clause, or 2 for an empty file.
    pub fn into_instance(self, r: Option<usize>) -> Result<CnfInstance, DimacsError> {
        let r = r.or_else(|| self.clauses.first().map(Vec::len)).unwrap_or(2);
        validate_instance(&self.clauses, r, self.n).map_err(|e| match clause_index(&e) {
            Some(i) => DimacsError::Invalid {
                line: self.lines[i],
                source: e,
            },
            None => DimacsError::Formula(e),
        })
    }
}

/// Value of a `c <key> <value>` comment.
pub fn comment_value<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|c| {
        let mut parts = c.split_whitespace();
        (parts.next() == Some(key)).then(|| parts.next()).flatten()
    })
}

fn clause_index(e: &FormulaError) -> Option<usize> {
    match e {
        FormulaError::ClauseSizeMismatch { clause, .. }
        | FormulaError::ComplementaryPair { clause, .. }
        | FormulaError::VariableOutOfRange { clause, .. } => Some(*clause),
        _ => None,
    }
}

pub fn parse_dimacs(text: &str, r: Option<usize>) -> Result<CnfInstance, DimacsError> {
    parse_raw(text)?.into_instance(r)
}

/// Canonical clause order, each clause repeated by multiplicity.
pub fn write_dimacs(f: &CnfInstance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").unwrap();
    }
    writeln!(out, "p cnf {} {}", f.n(), f.m()).unwrap();
    for (clause, mult) in f.clauses() {
        let mut line = String::new();
        for l in clause.literals() {
            write!(line, "{} ", l.to_dimacs()).unwrap();
        }
        line.push('0');
        for _ in 0..mult {
            writeln!(out, "{line}").unwrap();
        }
    }
    out
}
