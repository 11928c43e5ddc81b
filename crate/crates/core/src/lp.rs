//! Exact feasibility of mixed strict/non-strict linear systems.
//!
//! Strict atoms share one slack `δ`: `a·x < b` becomes `a·x + δ <= b`, and
//! `δ` is maximized subject to `δ <= 1`. The open system is nonempty iff the
//! optimum is positive. The simplex works on a dictionary whose rows are the
//! constraint slacks and whose columns are the structural variables, so the
//! tableau is `rows × (d + 2)` regardless of the number of constraints.
//! Pivoting follows Bland's rule throughout.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::arith::{QVector, Rational};
use crate::error::{Error, Result};
use crate::rule::{LinearAtom, Relation};

static PIVOTS: AtomicU64 = AtomicU64::new(0);

/// Total simplex pivots performed by this process.
pub fn pivot_count() -> u64 {
    PIVOTS.load(Ordering::Relaxed)
}

/// A conjunction of linear atoms over `dim` variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    dim: usize,
    constraints: Vec<LinearAtom>,
}

impl LinearSystem {
    pub fn new(dim: usize) -> Self {
        LinearSystem {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn from_atoms(dim: usize, atoms: Vec<LinearAtom>) -> Result<Self> {
        let mut sys = LinearSystem::new(dim);
        for a in atoms {
            sys.push(a)?;
        }
        Ok(sys)
    }

    pub fn push(&mut self, atom: LinearAtom) -> Result<()> {
        if atom.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: atom.dim(),
            });
        }
        self.constraints.push(atom);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearAtom] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_satisfied_by(&self, x: &QVector) -> bool {
        self.constraints.iter().all(|a| a.eval(x).unwrap_or(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    Feasible(QVector),
    Infeasible,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible(_))
    }

    pub fn witness(&self) -> Option<&QVector> {
        match self {
            FeasibilityResult::Feasible(w) => Some(w),
            FeasibilityResult::Infeasible => None,
        }
    }
}

/// `Σ coeffs·v <= rhs` over `nfree` free variables followed by `nneg`
/// nonnegative ones.
struct Row {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

struct Problem {
    nfree: usize,
    nneg: usize,
    rows: Vec<Row>,
    objective: Vec<Rational>,
    /// Stop as soon as the current feasible objective exceeds this value.
    stop_above: Option<Rational>,
}

const CONST: usize = 0;

/// Variable ids: `0..nfree` free, then nonnegative structurals, then one
/// slack per row, then the phase-one auxiliary.
struct Dictionary {
    nfree: usize,
    aux: usize,
    /// `rows[i][0]` is the constant term, `rows[i][1 + j]` the coefficient of
    /// `nonbasic[j]`.
    rows: Vec<Vec<Rational>>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    /// Rows whose basic variable is free; excluded from ratio tests.
    frozen: Vec<bool>,
    objective: Vec<Rational>,
    phase_one: Vec<Rational>,
    pivots: u64,
}

impl Dictionary {
    fn new(p: &Problem) -> Self {
        let nstruct = p.nfree + p.nneg;
        let m = p.rows.len();
        let mut rows = Vec::with_capacity(m);
        for r in &p.rows {
            let mut row = Vec::with_capacity(nstruct + 2);
            row.push(r.rhs.clone());
            row.extend(r.coeffs.iter().map(|c| -c));
            row.push(Rational::zero());
            rows.push(row);
        }
        let mut objective = vec![Rational::zero()];
        objective.extend(p.objective.iter().cloned());
        objective.push(Rational::zero());
        let mut phase_one = vec![Rational::zero(); nstruct + 2];
        phase_one[nstruct + 1] = -Rational::one();
        Dictionary {
            nfree: p.nfree,
            aux: nstruct + m,
            rows,
            basic: (nstruct..nstruct + m).collect(),
            nonbasic: (0..nstruct).chain(std::iter::once(nstruct + m)).collect(),
            frozen: vec![false; m],
            objective,
            phase_one,
            pivots: 0,
        }
    }

    fn is_free(&self, var: usize) -> bool {
        var < self.nfree
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let a = self.rows[r][c + 1].clone();
        let inv = a.recip().expect("pivot element is nonzero");
        let mut pr = std::mem::take(&mut self.rows[r]);
        for (j, v) in pr.iter_mut().enumerate() {
            *v = if j == c + 1 { inv.clone() } else { -(&*v * &inv) };
        }
        let apply = |row: &mut Vec<Rational>| {
            let t = std::mem::take(&mut row[c + 1]);
            if t.is_zero() {
                return;
            }
            for (j, v) in row.iter_mut().enumerate() {
                if !pr[j].is_zero() {
                    if j == c + 1 {
                        *v = &t * &pr[j];
                    } else {
                        *v += &(&t * &pr[j]);
                    }
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                apply(row);
            }
        }
        apply(&mut self.objective);
        apply(&mut self.phase_one);
        self.rows[r] = pr;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[c]);
    }

    /// Moves every free variable into the basis where possible.
    fn eliminate_free(&mut self) {
        for var in 0..self.nfree {
            let Some(c) = self.nonbasic.iter().position(|&v| v == var) else {
                continue;
            };
            let r = (0..self.rows.len()).find(|&i| !self.frozen[i] && !self.rows[i][c + 1].is_zero());
            if let Some(r) = r {
                self.pivot(r, c);
                self.frozen[r] = true;
            }
        }
    }

    /// Columns that may enter: nonbasic, not free, not the auxiliary unless
    /// `allow_aux`.
    fn enterable(&self, c: usize, allow_aux: bool) -> bool {
        let v = self.nonbasic[c];
        !self.is_free(v) && (allow_aux || v != self.aux)
    }

    /// Bland's rule maximization of `self.objective` (or of the phase-one
    /// row). Returns false on unboundedness.
    fn maximize(&mut self, phase_one: bool, stop_above: Option<&Rational>) -> bool {
        loop {
            let obj = if phase_one { &self.phase_one } else { &self.objective };
            if let Some(s) = stop_above {
                if obj[CONST] > *s {
                    return true;
                }
            }
            let entering = (0..self.nonbasic.len())
                .filter(|&c| self.enterable(c, phase_one) && obj[c + 1].is_positive())
                .min_by_key(|&c| self.nonbasic[c]);
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.frozen[i] || !self.rows[i][c + 1].is_negative() {
                    continue;
                }
                let ratio = self.rows[i][CONST]
                    .checked_div(&(-&self.rows[i][c + 1]))
                    .expect("nonzero");
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basic[i] < self.basic[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c);
        }
    }

    /// Phase one. Returns false when the constraints are infeasible.
    fn make_feasible(&mut self) -> bool {
        let worst = (0..self.rows.len())
            .filter(|&i| !self.frozen[i])
            .min_by(|&a, &b| self.rows[a][CONST].cmp(&self.rows[b][CONST]).then(a.cmp(&b)));
        let aux_col = self.nonbasic.iter().position(|&v| v == self.aux).expect("aux column");
        match worst {
            Some(r) if self.rows[r][CONST].is_negative() => {
                for i in 0..self.rows.len() {
                    if !self.frozen[i] {
                        self.rows[i][aux_col + 1] = Rational::one();
                    }
                }
                self.pivot(r, aux_col);
                self.maximize(true, None);
                if self.phase_one[CONST].is_negative() {
                    return false;
                }
                if let Some(r) = self.basic.iter().position(|&v| v == self.aux) {
                    let c = (0..self.nonbasic.len())
                        .find(|&c| !self.is_free(self.nonbasic[c]) && !self.rows[r][c + 1].is_zero());
                    match c {
                        Some(c) => self.pivot(r, c),
                        // Aux row with no other support is identically zero.
                        None => self.frozen[r] = true,
                    }
                }
            }
            _ => {}
        }
        // The auxiliary is nonbasic at zero; clear its column.
        if let Some(c) = self.nonbasic.iter().position(|&v| v == self.aux) {
            for row in self.rows.iter_mut() {
                row[c + 1] = Rational::zero();
            }
            self.objective[c + 1] = Rational::zero();
        }
        true
    }

    fn value(&self, var: usize) -> Rational {
        match self.basic.iter().position(|&v| v == var) {
            Some(i) => self.rows[i][CONST].clone(),
            None => Rational::zero(),
        }
    }

    fn dump(&self) -> String {
        let mut s = String::new();
        let name = |v: usize| format!("v{v}");
        let _ = writeln!(
            s,
            "basis\tconst\t{}",
            self.nonbasic.iter().map(|&v| name(v)).collect::<Vec<_>>().join("\t")
        );
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let tag = if self.frozen[i] { "*" } else { "" };
            let _ = writeln!(s, "{}{tag}\t{}", name(self.basic[i]), cells.join("\t"));
        }
        let cells: Vec<String> = self.objective.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "obj\t{}", cells.join("\t"));
        s
    }
}

enum Solved {
    Infeasible,
    Unbounded,
    Optimal(Rational, Vec<Rational>),
}

fn solve(p: &Problem) -> (Solved, Dictionary) {
    let mut d = Dictionary::new(p);
    d.eliminate_free();
    let solved = if !d.make_feasible() {
        Solved::Infeasible
    } else {
        // A free column that stayed nonbasic is unconstrained by the rows.
        let free_unbounded = (0..d.nonbasic.len()).any(|c| d.is_free(d.nonbasic[c]) && !d.objective[c + 1].is_zero());
        if free_unbounded || !d.maximize(false, p.stop_above.as_ref()) {
            Solved::Unbounded
        } else {
            let point = (0..p.nfree + p.nneg).map(|v| d.value(v)).collect();
            Solved::Optimal(d.objective[CONST].clone(), point)
        }
    };
    PIVOTS.fetch_add(d.pivots, Ordering::Relaxed);
    (solved, d)
}

/// Rows for `sys` over free `x` plus a nonnegative `δ` (when `with_delta`).
fn rows_for(d: usize, constraints: &[LinearAtom], with_delta: bool) -> Vec<Row> {
    let mut rows = Vec::with_capacity(constraints.len() + 1);
    let mut push = |coeffs: &QVector, sign: i64, rhs: &Rational, strict: bool| {
        let s = Rational::from_int(sign);
        let mut c: Vec<Rational> = coeffs.iter().map(|a| a * &s).collect();
        if with_delta {
            c.push(if strict { Rational::one() } else { Rational::zero() });
        }
        rows.push(Row {
            coeffs: c,
            rhs: rhs * &s,
        });
    };
    for a in constraints {
        let strict = a.rel.is_strict();
        match a.rel {
            Relation::Lt | Relation::Le => push(&a.coeffs, 1, &a.constant, strict),
            Relation::Gt | Relation::Ge => push(&a.coeffs, -1, &a.constant, strict),
            Relation::Eq => {
                push(&a.coeffs, 1, &a.constant, false);
                push(&a.coeffs, -1, &a.constant, false);
            }
        }
    }
    if with_delta {
        let mut c = vec![Rational::zero(); d + 1];
        c[d] = Rational::one();
        rows.push(Row {
            coeffs: c,
            rhs: Rational::one(),
        });
    }
    rows
}

/// Feasibility over `d` variables of which the last `nonneg` are
/// implicitly nonnegative.
fn feasibility_split(d: usize, nonneg: usize, constraints: &[LinearAtom]) -> (FeasibilityResult, Dictionary) {
    let strict = constraints.iter().any(|a| a.rel.is_strict());
    let mut objective = vec![Rational::zero(); d];
    if strict {
        objective.push(Rational::one());
    }
    let p = Problem {
        nfree: d - nonneg,
        nneg: nonneg + usize::from(strict),
        rows: rows_for(d, constraints, strict),
        objective,
        stop_above: strict.then(Rational::zero),
    };
    let (solved, dict) = solve(&p);
    let result = match solved {
        Solved::Optimal(value, point) if !strict || value.is_positive() => {
            FeasibilityResult::Feasible(QVector(point[..d].to_vec()))
        }
        // δ is capped, so only the positive-optimum case certifies.
        Solved::Unbounded => unreachable!("objective is bounded by construction"),
        _ => FeasibilityResult::Infeasible,
    };
    (result, dict)
}

fn feasibility(d: usize, constraints: &[LinearAtom]) -> (FeasibilityResult, Dictionary) {
    feasibility_split(d, 0, constraints)
}

/// Decides whether `sys` has a rational solution and returns one if so.
pub fn check_feasible(sys: &LinearSystem) -> FeasibilityResult {
    let (result, _) = feasibility(sys.dim, &sys.constraints);
    if let FeasibilityResult::Feasible(w) = &result {
        debug_assert!(sys.is_satisfied_by(w), "LP witness fails re-evaluation");
    }
    result
}

/// [`check_feasible`] over borrowed atoms, all of dimension `dim`.
pub(crate) fn check_atoms(dim: usize, atoms: &[LinearAtom]) -> FeasibilityResult {
    feasibility(dim, atoms).0
}

/// [`check_atoms`] where the last `nonneg` of the `dim` variables carry an
/// implicit `>= 0`.
pub(crate) fn check_atoms_nonneg(dim: usize, nonneg: usize, atoms: &[LinearAtom]) -> FeasibilityResult {
    feasibility_split(dim, nonneg, atoms).0
}

/// Plain-text rendering of the final dictionary of [`check_feasible`].
pub fn debug_dump(sys: &LinearSystem) -> String {
    let (result, dict) = feasibility(sys.dim, &sys.constraints);
    format!("{result:?}\n{}", dict.dump())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(c: &[i64], rel: Relation, k: i64) -> LinearAtom {
        LinearAtom::new(QVector::from_ints(c), rel, Rational::from_int(k))
    }

    fn sys(d: usize, atoms: Vec<LinearAtom>) -> LinearSystem {
        LinearSystem::from_atoms(d, atoms).unwrap()
    }

    #[test]
    fn closed_interval() {
        let s = sys(1, vec![atom(&[1], Relation::Ge, 0), atom(&[1], Relation::Le, 1)]);
        let w = check_feasible(&s);
        assert!(s.is_satisfied_by(w.witness().unwrap()));
    }

    #[test]
    fn empty_open_interval() {
        let s = sys(1, vec![atom(&[1], Relation::Gt, 0), atom(&[1], Relation::Lt, 0)]);
        assert_eq!(check_feasible(&s), FeasibilityResult::Infeasible);
    }

    #[test]
    fn open_interval_with_equality() {
        // x > 0, x < 1, y = 2x
        let s = sys(
            2,
            vec![
                atom(&[1, 0], Relation::Gt, 0),
                atom(&[1, 0], Relation::Lt, 1),
                atom(&[-2, 1], Relation::Eq, 0),
            ],
        );
        let w = check_feasible(&s).witness().cloned().unwrap();
        assert!(w[0].is_positive() && w[0] < Rational::one());
        assert_eq!(w[1], &w[0] * &Rational::from_int(2));
    }

    #[test]
    fn empty_system_and_zero_dimension() {
        assert_eq!(
            check_feasible(&LinearSystem::new(3)),
            FeasibilityResult::Feasible(QVector::zeros(3))
        );
        let contradiction = sys(
            0,
            vec![LinearAtom::new(QVector::zeros(0), Relation::Lt, Rational::zero())],
        );
        assert_eq!(check_feasible(&contradiction), FeasibilityResult::Infeasible);
        let tautology = sys(
            0,
            vec![LinearAtom::new(QVector::zeros(0), Relation::Le, Rational::zero())],
        );
        assert!(check_feasible(&tautology).is_feasible());
    }

    #[test]
    fn touching_closed_but_not_open() {
        let closed = sys(2, vec![atom(&[1, 1], Relation::Ge, 2), atom(&[1, 1], Relation::Le, 2)]);
        assert!(check_feasible(&closed).is_feasible());
        let open = sys(2, vec![atom(&[1, 1], Relation::Ge, 2), atom(&[1, 1], Relation::Lt, 2)]);
        assert!(!check_feasible(&open).is_feasible());
    }

    #[test]
    fn dump_mentions_basis() {
        let s = sys(1, vec![atom(&[1], Relation::Gt, 0)]);
        assert!(debug_dump(&s).contains("basis"));
    }
}
