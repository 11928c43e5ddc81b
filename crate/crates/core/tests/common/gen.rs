//! Random networks, formulas and rules for the integration tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rulecheck::arith::{QMatrix, QVector, Rational};
use rulecheck::cnf::{CnfFormula, Literal};
use rulecheck::network::{Activation, Layer, Network};
use rulecheck::rule::{Cmp, Formula, LinearAtom, Relation, Rule};

/// Numerator and denominator magnitudes at most `bound`.
pub fn rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    Rational::frac(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

pub fn vector<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> QVector {
    QVector((0..dim).map(|_| rational(rng, bound)).collect())
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> QMatrix {
    QMatrix::from_rows((0..rows).map(|_| vector(rng, cols, bound).0).collect(), cols).unwrap()
}

pub struct NetShape {
    pub input_dim: usize,
    /// Widths of the hidden layers.
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub heaviside_prob: f64,
    pub classifying: bool,
}

impl NetShape {
    pub fn random<R: Rng>(rng: &mut R, max_layers: usize, max_width: usize, max_hidden_nodes: usize) -> Self {
        let input_dim = rng.gen_range(1..=3);
        let mut hidden = Vec::new();
        let mut total = 0;
        for _ in 0..rng.gen_range(0..max_layers) {
            let w = rng.gen_range(1..=max_width).min(max_hidden_nodes - total);
            if w == 0 {
                break;
            }
            total += w;
            hidden.push(w);
        }
        NetShape {
            input_dim,
            hidden,
            output_dim: rng.gen_range(1..=max_width.min(3)),
            heaviside_prob: 0.2,
            classifying: rng.gen_bool(0.25),
        }
    }

    pub fn build<R: Rng>(&self, rng: &mut R, bound: i64) -> Network {
        let mut layers = Vec::new();
        let mut prev = self.input_dim;
        for &w in &self.hidden {
            let act = if rng.gen_bool(self.heaviside_prob) {
                Activation::Heaviside
            } else {
                Activation::Relu
            };
            layers.push(Layer::new(matrix(rng, w, prev, bound), vector(rng, w, bound), act).unwrap());
            prev = w;
        }
        let out = Layer::new(
            matrix(rng, self.output_dim, prev, bound),
            vector(rng, self.output_dim, bound),
            Activation::Identity,
        );
        layers.push(out.unwrap());
        let classifying = self.classifying && self.output_dim > 1;
        Network::new(self.input_dim, layers, classifying, false).unwrap()
    }
}

pub fn relation<R: Rng>(rng: &mut R) -> Relation {
    *[Relation::Lt, Relation::Le, Relation::Eq, Relation::Ge, Relation::Gt]
        .choose(rng)
        .unwrap()
}

pub fn oblique_atom<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> LinearAtom {
    LinearAtom::new(vector(rng, dim, bound), relation(rng), rational(rng, bound))
}

pub fn axis_atom<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> LinearAtom {
    LinearAtom::axis(dim, rng.gen_range(0..dim), relation(rng), rational(rng, bound))
}

/// A random And/Or/Not tree over exactly `atoms` leaves.
pub fn formula_over<R: Rng>(rng: &mut R, atoms: Vec<LinearAtom>) -> Formula {
    let mut parts: Vec<Formula> = atoms.into_iter().map(Formula::Atom).collect();
    if parts.is_empty() {
        return if rng.gen_bool(0.8) {
            Formula::True
        } else {
            Formula::False
        };
    }
    while parts.len() > 1 {
        let k = rng.gen_range(2..=parts.len().min(3));
        let group: Vec<Formula> = parts.drain(parts.len() - k..).collect();
        let node = if rng.gen_bool(0.5) {
            Formula::And(group)
        } else {
            Formula::Or(group)
        };
        let node = if rng.gen_bool(0.15) { Formula::not(node) } else { node };
        let at = rng.gen_range(0..=parts.len());
        parts.insert(at, node);
    }
    let f = parts.pop().unwrap();
    if rng.gen_bool(0.1) {
        Formula::not(f)
    } else {
        f
    }
}

/// Conclusion atoms read the argmax indicator on classifying networks.
fn output_atom<R: Rng>(rng: &mut R, net: &Network, bound: i64) -> LinearAtom {
    let m = net.output_dim();
    if net.is_classifying() {
        let c = rng.gen_range(0..m);
        let rel = *[Relation::Eq, Relation::Ge, Relation::Le].choose(rng).unwrap();
        LinearAtom::axis(m, c, rel, Rational::from_int(rng.gen_range(0..=1)))
    } else if rng.gen_bool(0.5) {
        axis_atom(rng, m, bound)
    } else {
        oblique_atom(rng, m, bound)
    }
}

/// Monotonicity matrices have small integer entries.
pub fn order_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    let rows: Vec<Vec<Rational>> = (0..rows)
        .map(|_| (0..cols).map(|_| Rational::from_int(rng.gen_range(-2..=2))).collect())
        .collect();
    QMatrix::from_rows(rows, cols).unwrap()
}

/// A rule of random kind with at most `max_atoms` atoms in total.
pub fn rule_for<R: Rng>(rng: &mut R, net: &Network, max_atoms: usize, bound: i64) -> Rule {
    let n = net.input_dim();
    let total = rng.gen_range(1..=max_atoms);
    let cond_atoms = rng.gen_range(0..total);
    let concl: Vec<LinearAtom> = (0..total - cond_atoms).map(|_| output_atom(rng, net, bound)).collect();
    let propositional_concl = concl.iter().all(LinearAtom::is_paraxial);
    let concl_f = formula_over(rng, concl);
    match rng.gen_range(0..5) {
        0 if propositional_concl => {
            let cond = (0..cond_atoms).map(|_| axis_atom(rng, n, bound)).collect();
            Rule::propositional(formula_over(rng, cond), concl_f).unwrap()
        }
        0 | 1 => {
            let cond = (0..cond_atoms).map(|_| oblique_atom(rng, n, bound)).collect();
            Rule::oblique(formula_over(rng, cond), concl_f)
        }
        2 => {
            let k = cond_atoms.max(1);
            let parts: Vec<Formula> = (0..k).map(|_| Formula::Atom(oblique_atom(rng, n, bound))).collect();
            let cmp = *[Cmp::Ge, Cmp::Le, Cmp::Eq].choose(rng).unwrap();
            let r = rng.gen_range(0..=k);
            Rule::MofN {
                parts,
                cmp,
                r,
                concl: concl_f,
            }
        }
        3 => Rule::Monotonicity {
            a: {
                let l = rng.gen_range(1..=2);
                order_matrix(rng, l, n)
            },
            class: rng.gen_range(0..net.output_dim()),
        },
        _ => Rule::TotalMonotonicity {
            a: {
                let l = rng.gen_range(1..=2);
                order_matrix(rng, l, n)
            },
            class: rng.gen_range(0..net.output_dim()),
        },
    }
}

/// Random 3-CNF with `m` clauses over `n` variables.
pub fn cnf<R: Rng>(rng: &mut R, n: usize, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let v = rng.gen_range(0..n);
                    if rng.gen_bool(0.5) {
                        Literal::pos(v)
                    } else {
                        Literal::neg(v)
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}
