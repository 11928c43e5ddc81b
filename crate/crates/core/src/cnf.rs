//! 3-CNF formulas and a DIMACS reader.

use std::fmt;

use crate::boolean::BoolFormula;
use crate::error::{Error, Result};

/// A literal over a 0-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

/// CNF with every clause padded to exactly three literals by repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    /// Clauses of width 1 to 3; shorter clauses repeat their last literal.
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        let mut padded = Vec::with_capacity(clauses.len());
        for (i, c) in clauses.into_iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return Err(Error::InvalidFormula(format!(
                    "clause {i} has width {}, expected 1 to 3",
                    c.len()
                )));
            }
            if let Some(l) = c.iter().find(|l| l.var >= num_vars) {
                return Err(Error::InvalidFormula(format!(
                    "clause {i} mentions variable {} but there are {num_vars}",
                    l.var + 1
                )));
            }
            let last = *c.last().expect("nonempty");
            padded.push([c[0], *c.get(1).unwrap_or(&last), *c.get(2).unwrap_or(&last)]);
        }
        Ok(CnfFormula {
            num_vars,
            clauses: padded,
        })
    }

    /// Clauses given as signed 1-based DIMACS integers.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[Vec<i64>]) -> Result<Self> {
        let lits = clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| {
                        if l == 0 {
                            return Err(Error::InvalidFormula("literal 0".into()));
                        }
                        let var = (l.unsigned_abs() - 1) as usize;
                        Ok(Literal { var, positive: l > 0 })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CnfFormula::new(num_vars, lits)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Exhaustive satisfiability check; returns the first model in
    /// lexicographic order (variable 0 most significant).
    pub fn brute_force_model(&self) -> Option<Vec<bool>> {
        let n = self.num_vars;
        assert!(n < 64, "brute force limited to < 64 variables");
        (0u64..1 << n)
            .map(|bits| (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }

    pub fn to_formula(&self) -> BoolFormula {
        BoolFormula::And(
            self.clauses
                .iter()
                .map(|c| {
                    BoolFormula::Or(
                        c.iter()
                            .map(|l| {
                                let v = BoolFormula::Var(l.var);
                                if l.positive {
                                    v
                                } else {
                                    BoolFormula::Not(Box::new(v))
                                }
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn to_dimacs(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                write!(f, "{} ", if l.positive { v } else { -v })?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Reads `p cnf n q` DIMACS. Comment lines start with `c`; a line holding
/// `%` ends the clause section (SATLIB convention).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        let err = |msg: String| Error::Dimacs { line: line_no, msg };
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err("duplicate header".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(format!("malformed header {line:?}")));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| err(format!("bad variable count {:?}", parts[2])))?;
            let q = parts[3]
                .parse()
                .map_err(|_| err(format!("bad clause count {:?}", parts[3])))?;
            header = Some((n, q));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(err("clause before header".into()));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(err("empty clause".into()));
                }
                if current.len() > 3 {
                    return Err(err(format!("clause width {} exceeds 3", current.len())));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(err(format!("literal {lit} exceeds variable count {n}")));
                }
                current.push(lit);
            }
        }
    }
    let (n, q) = header.ok_or(Error::Dimacs {
        line: 0,
        msg: "missing header".into(),
    })?;
    if !current.is_empty() {
        return Err(Error::Dimacs {
            line: text.lines().count(),
            msg: "last clause not terminated by 0".into(),
        });
    }
    if clauses.len() != q {
        return Err(Error::Dimacs {
            line: 0,
            msg: format!("header announces {q} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::from_dimacs_clauses(n, &clauses)
}
