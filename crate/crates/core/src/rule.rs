//! Formulas over linear atoms and the five rule kinds.
//!
//! A rule applies to a network when no input (or input pair, for the
//! monotonicity kinds) violates it. [`Rule::violated_by`] is the direct,
//! pointwise semantics every verifier verdict is checked against.
//!
//! For monotonicity the class condition "argmax is i" is read as "i is a
//! maximizer": entry i is at least as big as every other entry, ties allowed.

use std::fmt;

use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    /// Complement for the inequality relations; `None` for `Eq`, whose
    /// complement is the disjunction `< ∨ >`.
    pub fn negate(self) -> Option<Relation> {
        match self {
            Relation::Lt => Some(Relation::Ge),
            Relation::Le => Some(Relation::Gt),
            Relation::Ge => Some(Relation::Lt),
            Relation::Gt => Some(Relation::Le),
            Relation::Eq => None,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Relation> {
        Some(match s {
            "<" => Relation::Lt,
            "<=" => Relation::Le,
            "=" => Relation::Eq,
            ">=" => Relation::Ge,
            ">" => Relation::Gt,
            _ => return None,
        })
    }
}

/// `coeffs · v  rel  constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub coeffs: QVector,
    pub rel: Relation,
    pub constant: Rational,
}

impl LinearAtom {
    pub fn new(coeffs: QVector, rel: Relation, constant: Rational) -> Self {
        LinearAtom { coeffs, rel, constant }
    }

    /// `v[var]  rel  constant` in a `dim`-dimensional space.
    pub fn axis(dim: usize, var: usize, rel: Relation, constant: Rational) -> Self {
        LinearAtom::new(QVector::unit(dim, var), rel, constant)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn eval(&self, v: &QVector) -> Result<bool> {
        Ok(self.rel.holds(&self.coeffs.dot(v)?, &self.constant))
    }

    pub fn is_paraxial(&self) -> bool {
        self.coeffs.iter().filter(|c| !c.is_zero()).count() == 1
    }

    fn with_rel(&self, rel: Relation) -> LinearAtom {
        LinearAtom::new(self.coeffs.clone(), rel, self.constant.clone())
    }

    /// Pointwise complement as a formula.
    pub fn negated(&self) -> Formula {
        match self.rel.negate() {
            Some(r) => Formula::Atom(self.with_rel(r)),
            None => Formula::Or(vec![
                Formula::Atom(self.with_rel(Relation::Lt)),
                Formula::Atom(self.with_rel(Relation::Gt)),
            ]),
        }
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *c == Rational::one() {
                write!(f, "v{}", i + 1)?;
            } else {
                write!(f, "({c})·v{}", i + 1)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " {} {}", self.rel.symbol(), self.constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(LinearAtom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(coeffs: QVector, rel: Relation, constant: Rational) -> Formula {
        Formula::Atom(LinearAtom::new(coeffs, rel, constant))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// `lo <= v[var] <= hi` as a conjunction of two atoms.
    pub fn interval(dim: usize, var: usize, lo: Rational, hi: Rational) -> Formula {
        Formula::And(vec![
            Formula::Atom(LinearAtom::axis(dim, var, Relation::Ge, lo)),
            Formula::Atom(LinearAtom::axis(dim, var, Relation::Le, hi)),
        ])
    }

    /// Closed box `lower <= v <= upper`.
    pub fn closed_box(lower: &QVector, upper: &QVector) -> Formula {
        let dim = lower.dim();
        Formula::And(
            (0..dim)
                .map(|i| Formula::interval(dim, i, lower[i].clone(), upper[i].clone()))
                .collect(),
        )
    }

    pub fn atoms(&self) -> Vec<&LinearAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a LinearAtom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    /// Ambient dimension; `None` when there are no atoms. Errors when atoms
    /// disagree.
    pub fn dim(&self) -> Result<Option<usize>> {
        let mut dim = None;
        for a in self.atoms() {
            match dim {
                None => dim = Some(a.dim()),
                Some(d) if d != a.dim() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: a.dim(),
                    })
                }
                _ => {}
            }
        }
        Ok(dim)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim()? {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, v: &QVector) -> Result<bool> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.eval(v)?,
            Formula::Not(f) => !f.eval(v)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(v)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(v)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Negation normal form: no `Not` nodes remain; negated atoms become
    /// complementary relations.
    pub fn to_nnf(&self) -> Formula {
        self.nnf(false)
    }

    fn nnf(&self, negate: bool) -> Formula {
        match (self, negate) {
            (Formula::True, false) | (Formula::False, true) => Formula::True,
            (Formula::True, true) | (Formula::False, false) => Formula::False,
            (Formula::Atom(a), false) => Formula::Atom(a.clone()),
            (Formula::Atom(a), true) => a.negated(),
            (Formula::Not(f), _) => f.nnf(!negate),
            (Formula::And(fs), false) => Formula::And(fs.iter().map(|f| f.nnf(false)).collect()),
            (Formula::And(fs), true) => Formula::Or(fs.iter().map(|f| f.nnf(true)).collect()),
            (Formula::Or(fs), false) => Formula::Or(fs.iter().map(|f| f.nnf(false)).collect()),
            (Formula::Or(fs), true) => Formula::And(fs.iter().map(|f| f.nnf(true)).collect()),
        }
    }

    pub fn is_paraxial(&self) -> bool {
        self.atoms().iter().all(|a| a.is_paraxial())
    }
}

pub fn eval_formula(f: &Formula, v: &QVector) -> Result<bool> {
    f.eval(v)
}

pub fn to_nnf(f: &Formula) -> Formula {
    f.to_nnf()
}

pub fn is_paraxial(f: &Formula) -> bool {
    f.is_paraxial()
}

pub fn mofn_count_satisfied(parts: &[Formula], x: &QVector) -> Result<usize> {
    let mut count = 0;
    for p in parts {
        if p.eval(x)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Comparator of an MofN rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    pub fn holds(self, count: usize, r: usize) -> bool {
        match self {
            Cmp::Le => count <= r,
            Cmp::Eq => count == r,
            Cmp::Ge => count >= r,
        }
    }

    /// Whether a final count in `[lo, hi]` can still satisfy the comparison.
    pub fn reachable(self, lo: usize, hi: usize, r: usize) -> bool {
        match self {
            Cmp::Le => lo <= r,
            Cmp::Eq => lo <= r && r <= hi,
            Cmp::Ge => hi >= r,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Cmp> {
        Some(match s {
            "<=" => Cmp::Le,
            "=" => Cmp::Eq,
            ">=" => Cmp::Ge,
            _ => return None,
        })
    }
}

/// A rule about a network. Class indices are 0-based here; the JSON format
/// uses 1-based `"i"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Propositional {
        cond: Formula,
        concl: Formula,
    },
    Oblique {
        cond: Formula,
        concl: Formula,
    },
    MofN {
        parts: Vec<Formula>,
        cmp: Cmp,
        r: usize,
        concl: Formula,
    },
    Monotonicity {
        a: QMatrix,
        class: usize,
    },
    TotalMonotonicity {
        a: QMatrix,
        class: usize,
    },
}

/// A concrete input (or input pair) at which a rule fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Point(QVector),
    Pair(QVector, QVector),
}

impl Rule {
    /// Propositional rule; both parts must be paraxial.
    pub fn propositional(cond: Formula, concl: Formula) -> Result<Rule> {
        if !cond.is_paraxial() || !concl.is_paraxial() {
            return Err(Error::InvalidRule(
                "propositional rules need paraxial atoms (one nonzero coefficient each)".into(),
            ));
        }
        Ok(Rule::Propositional { cond, concl })
    }

    pub fn oblique(cond: Formula, concl: Formula) -> Rule {
        Rule::Oblique { cond, concl }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Rule::Propositional { .. } => "propositional",
            Rule::Oblique { .. } => "oblique",
            Rule::MofN { .. } => "mofn",
            Rule::Monotonicity { .. } => "monotonicity",
            Rule::TotalMonotonicity { .. } => "total_monotonicity",
        }
    }

    pub fn is_monotonicity_kind(&self) -> bool {
        matches!(self, Rule::Monotonicity { .. } | Rule::TotalMonotonicity { .. })
    }

    /// An MofN rule whose threshold cannot be met by any count (`r > t`
    /// with `>=` or `=`).
    pub fn mofn_unsatisfiable_threshold(&self) -> bool {
        match self {
            Rule::MofN { parts, cmp, r, .. } => *r > parts.len() && *cmp != Cmp::Le,
            _ => false,
        }
    }

    /// Checks the rule's dimensions against a network with `n` inputs and
    /// `m` outputs.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        match self {
            Rule::Propositional { cond, concl } => {
                if !cond.is_paraxial() || !concl.is_paraxial() {
                    return Err(Error::InvalidRule("propositional rule with non-paraxial atom".into()));
                }
                cond.check_dim(n)?;
                concl.check_dim(m)
            }
            Rule::Oblique { cond, concl } => {
                cond.check_dim(n)?;
                concl.check_dim(m)
            }
            Rule::MofN { parts, concl, .. } => {
                for p in parts {
                    p.check_dim(n)?;
                }
                concl.check_dim(m)
            }
            Rule::Monotonicity { a, class } | Rule::TotalMonotonicity { a, class } => {
                if a.cols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.cols(),
                    });
                }
                if *class >= m {
                    return Err(Error::InvalidRule(format!(
                        "class index {} out of range 1..={m}",
                        class + 1
                    )));
                }
                Ok(())
            }
        }
    }

    /// Direct semantics: does `witness` violate this rule on `net`?
    pub fn violated_by(&self, net: &Network, witness: &Witness) -> Result<bool> {
        match (self, witness) {
            (Rule::Propositional { cond, concl } | Rule::Oblique { cond, concl }, Witness::Point(x)) => {
                Ok(cond.eval(x)? && !concl.eval(&net.evaluate(x)?)?)
            }
            (Rule::MofN { parts, cmp, r, concl }, Witness::Point(x)) => {
                let count = mofn_count_satisfied(parts, x)?;
                Ok(cmp.holds(count, *r) && !concl.eval(&net.evaluate(x)?)?)
            }
            (Rule::Monotonicity { a, class }, Witness::Pair(x, y)) => monotonicity_violated(net, a, *class, x, y),
            (Rule::TotalMonotonicity { a, class }, Witness::Pair(x, y)) => {
                if net.is_classifying() {
                    return monotonicity_violated(net, a, *class, x, y);
                }
                if !componentwise_le(&a.mat_vec(x)?, &a.mat_vec(y)?) {
                    return Ok(false);
                }
                Ok(net.raw_output(x)?[*class] > net.raw_output(y)?[*class])
            }
            _ => Err(Error::InvalidRule(format!(
                "witness shape does not match a {} rule",
                self.kind_name()
            ))),
        }
    }
}

fn componentwise_le(a: &QVector, b: &QVector) -> bool {
    a.iter().zip(b.iter()).all(|(p, q)| p <= q)
}

pub fn is_maximizer(v: &QVector, i: usize) -> bool {
    v.iter().all(|x| *x <= v[i])
}

fn monotonicity_violated(net: &Network, a: &QMatrix, class: usize, x: &QVector, y: &QVector) -> Result<bool> {
    if !componentwise_le(&a.mat_vec(x)?, &a.mat_vec(y)?) {
        return Ok(false);
    }
    let zx = net.raw_output(x)?;
    let zy = net.raw_output(y)?;
    Ok(is_maximizer(&zx, class) && !is_maximizer(&zy, class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn ax(var: usize, rel: Relation, c: &str) -> Formula {
        Formula::Atom(LinearAtom::axis(2, var, rel, q(c)))
    }

    /// x1 ∈ (1,2) ∨ (x2 ∈ [2,5] ∧ x1 ≥ 3)
    fn phi1() -> Formula {
        Formula::Or(vec![
            Formula::And(vec![ax(0, Relation::Gt, "1"), ax(0, Relation::Lt, "2")]),
            Formula::And(vec![
                ax(1, Relation::Ge, "2"),
                ax(1, Relation::Le, "5"),
                ax(0, Relation::Ge, "3"),
            ]),
        ])
    }

    /// x1 + 2 x2 = 3 ∧ x1 ≤ x2
    fn phi2() -> Formula {
        Formula::And(vec![
            Formula::atom(QVector::from_ints(&[1, 2]), Relation::Eq, q("3")),
            Formula::atom(QVector::from_ints(&[1, -1]), Relation::Le, q("0")),
        ])
    }

    #[test]
    fn example_formula_points() {
        let v = |a: &str, b: &str| QVector::parse(&[a, b]).unwrap();
        assert!(phi1().eval(&v("3/2", "0")).unwrap());
        assert!(!phi1().eval(&v("1", "0")).unwrap());
        assert!(Formula::True.eval(&v("9", "9")).unwrap());
        assert!(phi1().eval(&QVector::zeros(3)).is_err());
    }

    #[test]
    fn nnf_examples() {
        let f = Formula::not(ax(0, Relation::Le, "0"));
        assert_eq!(f.to_nnf(), ax(0, Relation::Gt, "0"));
        let a = ax(0, Relation::Le, "0");
        let b = ax(1, Relation::Eq, "1");
        let g = Formula::not(Formula::And(vec![a, b]));
        assert_eq!(
            g.to_nnf(),
            Formula::Or(vec![
                ax(0, Relation::Gt, "0"),
                Formula::Or(vec![ax(1, Relation::Lt, "1"), ax(1, Relation::Gt, "1")]),
            ])
        );
    }

    #[test]
    fn paraxial_examples() {
        assert!(ax(0, Relation::Ge, "3").is_paraxial());
        assert!(!phi2().is_paraxial());
        assert!(Formula::True.is_paraxial());
        assert!(Rule::propositional(phi2(), Formula::True).is_err());
        assert!(Rule::propositional(phi1(), Formula::True).is_ok());
    }

    #[test]
    fn mofn_counts() {
        let parts: Vec<Formula> = (0..3)
            .map(|k| Formula::Atom(LinearAtom::axis(1, 0, Relation::Ge, Rational::from_int(k))))
            .collect();
        assert_eq!(
            mofn_count_satisfied(&parts, &QVector::parse(&["3/2"]).unwrap()).unwrap(),
            2
        );
        assert_eq!(mofn_count_satisfied(&[], &QVector::zeros(1)).unwrap(), 0);
        // exactly φ1 holds at (3/2, 0): the "= 1" conditional is met
        let pt = QVector::parse(&["3/2", "0"]).unwrap();
        let n = mofn_count_satisfied(&[phi1(), phi2()], &pt).unwrap();
        assert_eq!(n, 1);
        assert!(Cmp::Eq.holds(n, 1));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let rel = prop_oneof![
            Just(Relation::Lt),
            Just(Relation::Le),
            Just(Relation::Eq),
            Just(Relation::Ge),
            Just(Relation::Gt)
        ];
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (prop::collection::vec(-2i64..3, 2), rel, -2i64..3).prop_map(|(c, r, k)| Formula::atom(
                QVector::from_ints(&c),
                r,
                Rational::from_int(k)
            )),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::And),
                prop::collection::vec(inner, 0..3).prop_map(Formula::Or),
            ]
        })
    }

    fn no_not(f: &Formula) -> bool {
        match f {
            Formula::Not(_) => false,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(no_not),
            _ => true,
        }
    }

    proptest! {
        #[test]
        fn nnf_preserves_semantics(f in arb_formula(), x in -3i64..4, y in -3i64..4) {
            let v = QVector::from_ints(&[x, y]);
            let g = f.to_nnf();
            prop_assert!(no_not(&g));
            prop_assert_eq!(f.eval(&v).unwrap(), g.eval(&v).unwrap());
            prop_assert_eq!(g.to_nnf(), g);
        }
    }
}
