//! Boolean formulas and their compilation into Boolean networks.
//!
//! Gates used, all with weights and biases in `{-1, 0, 1}`:
//! `OR(x..) = H(Σx - 1)`, `NOT x = H(-x)`, `NOR(x..) = H(-Σx)`,
//! `copy x = H(x - 1)`. AND is `NOR` of negations.

use std::collections::HashMap;

use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::network::{Activation, Layer, Network};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolFormula {
    Const { value: bool },
    Var(usize),
    Not(Box<BoolFormula>),
    And(Vec<BoolFormula>),
    Or(Vec<BoolFormula>),
}

impl BoolFormula {
    pub fn var(i: usize) -> Self {
        BoolFormula::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: BoolFormula) -> Self {
        BoolFormula::Not(Box::new(f))
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        match self {
            BoolFormula::Const { value } => *value,
            BoolFormula::Var(i) => x[*i],
            BoolFormula::Not(f) => !f.eval(x),
            BoolFormula::And(fs) => fs.iter().all(|f| f.eval(x)),
            BoolFormula::Or(fs) => fs.iter().any(|f| f.eval(x)),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            BoolFormula::Const { .. } => None,
            BoolFormula::Var(i) => Some(*i),
            BoolFormula::Not(f) => f.max_var(),
            BoolFormula::And(fs) | BoolFormula::Or(fs) => fs.iter().filter_map(Self::max_var).max(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Signal {
    level: usize,
    idx: usize,
}

struct Gate {
    inputs: Vec<(usize, i64)>,
    bias: i64,
}

struct Builder {
    /// `levels[k]` holds the gates of layer `k + 1`.
    levels: Vec<Vec<Gate>>,
    copies: HashMap<Signal, usize>,
}

impl Builder {
    fn gate(&mut self, level: usize, inputs: Vec<(usize, i64)>, bias: i64) -> Signal {
        while self.levels.len() < level {
            self.levels.push(Vec::new());
        }
        let layer = &mut self.levels[level - 1];
        layer.push(Gate { inputs, bias });
        Signal {
            level,
            idx: layer.len() - 1,
        }
    }

    /// Carries `s` up one layer with `H(s - 1)`.
    fn lift_once(&mut self, s: Signal) -> Signal {
        if let Some(&idx) = self.copies.get(&s) {
            return Signal {
                level: s.level + 1,
                idx,
            };
        }
        let out = self.gate(s.level + 1, vec![(s.idx, 1)], -1);
        self.copies.insert(s, out.idx);
        out
    }

    fn lift(&mut self, mut s: Signal, level: usize) -> Signal {
        while s.level < level {
            s = self.lift_once(s);
        }
        s
    }

    /// Lifts all signals to a common level and removes duplicates.
    fn align(&mut self, signals: Vec<Signal>) -> (usize, Vec<usize>) {
        let level = signals.iter().map(|s| s.level).max().unwrap_or(0);
        let mut idx: Vec<usize> = signals.into_iter().map(|s| self.lift(s, level).idx).collect();
        idx.sort_unstable();
        idx.dedup();
        (level, idx)
    }

    fn compile(&mut self, f: &BoolFormula) -> Signal {
        match f {
            BoolFormula::Var(i) => Signal { level: 0, idx: *i },
            BoolFormula::Const { value } => self.gate(1, vec![], if *value { 0 } else { -1 }),
            BoolFormula::Not(g) => {
                let s = self.compile(g);
                self.gate(s.level + 1, vec![(s.idx, -1)], 0)
            }
            BoolFormula::Or(gs) => {
                if gs.is_empty() {
                    return self.compile(&BoolFormula::Const { value: false });
                }
                let sigs = gs.iter().map(|g| self.compile(g)).collect();
                let (level, idx) = self.align(sigs);
                self.gate(level + 1, idx.into_iter().map(|i| (i, 1)).collect(), -1)
            }
            BoolFormula::And(gs) => {
                if gs.is_empty() {
                    return self.compile(&BoolFormula::Const { value: true });
                }
                let negs = gs
                    .iter()
                    .map(|g| {
                        let s = self.compile(g);
                        self.gate(s.level + 1, vec![(s.idx, -1)], 0)
                    })
                    .collect();
                let (level, idx) = self.align(negs);
                self.gate(level + 1, idx.into_iter().map(|i| (i, -1)).collect(), 0)
            }
        }
    }
}

/// Compiles `f` over `num_vars` inputs into a single-output Boolean network
/// that agrees with `f` on `{0,1}^num_vars`.
pub fn compile_boolean_formula(f: &BoolFormula, num_vars: usize) -> Result<Network> {
    if let Some(v) = f.max_var() {
        if v >= num_vars {
            return Err(Error::InvalidFormula(format!(
                "variable {} used but only {num_vars} inputs",
                v + 1
            )));
        }
    }
    let mut b = Builder {
        levels: Vec::new(),
        copies: HashMap::new(),
    };
    let out = b.compile(f);
    let out = b.lift(out, out.level.max(1));
    // Only the output survives in the last layer.
    b.levels.truncate(out.level);
    let last = b.levels.last_mut().expect("at least one layer");
    let gate = last.swap_remove(out.idx);
    *last = vec![gate];

    let mut layers = Vec::with_capacity(b.levels.len());
    let mut width = num_vars;
    for gates in &b.levels {
        let mut w = QMatrix::zeros(gates.len(), width);
        let mut bias = QVector::zeros(gates.len());
        for (i, g) in gates.iter().enumerate() {
            for &(j, c) in &g.inputs {
                w[(i, j)] += &Rational::from_int(c);
            }
            bias[i] = Rational::from_int(g.bias);
        }
        layers.push(Layer::new(w, bias, Activation::Heaviside)?);
        width = gates.len();
    }
    Network::new(num_vars, layers, false, true)
}

/// All points of `{0,1}^n`, variable 0 most significant.
pub fn boolean_points(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |bits| (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect())
}

pub fn bools_to_vector(x: &[bool]) -> QVector {
    x.iter()
        .map(|&b| if b { Rational::one() } else { Rational::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(net: &Network, x: &[bool]) -> bool {
        let out = net.evaluate(&bools_to_vector(x)).unwrap();
        assert_eq!(out.dim(), 1);
        assert!(out[0] == Rational::zero() || out[0] == Rational::one());
        out[0] == Rational::one()
    }

    #[test]
    fn single_variable_and_negation() {
        let id = compile_boolean_formula(&BoolFormula::var(0), 1).unwrap();
        assert!(!run(&id, &[false]));
        assert!(run(&id, &[true]));
        let neg = compile_boolean_formula(&BoolFormula::not(BoolFormula::var(0)), 1).unwrap();
        assert!(run(&neg, &[false]));
        assert!(!run(&neg, &[true]));
    }

    #[test]
    fn mixed_formula_truth_table() {
        // (x1 ∨ x2) ∧ ¬x3
        let f = BoolFormula::And(vec![
            BoolFormula::Or(vec![BoolFormula::var(0), BoolFormula::var(1)]),
            BoolFormula::not(BoolFormula::var(2)),
        ]);
        let net = compile_boolean_formula(&f, 3).unwrap();
        assert!(net.is_boolean());
        for x in boolean_points(3) {
            let expected = (x[0] || x[1]) && !x[2];
            assert_eq!(run(&net, &x), expected, "{x:?}");
        }
    }

    #[test]
    fn repeated_children_and_constants() {
        let f = BoolFormula::Or(vec![BoolFormula::var(0), BoolFormula::var(0)]);
        let net = compile_boolean_formula(&f, 1).unwrap();
        assert!(run(&net, &[true]) && !run(&net, &[false]));
        let t = compile_boolean_formula(&BoolFormula::Const { value: true }, 2).unwrap();
        let fl = compile_boolean_formula(
            &BoolFormula::And(vec![BoolFormula::var(1), BoolFormula::Const { value: false }]),
            2,
        )
        .unwrap();
        for x in boolean_points(2) {
            assert!(run(&t, &x));
            assert!(!run(&fl, &x));
        }
        assert!(compile_boolean_formula(&BoolFormula::var(3), 2).is_err());
    }
}
