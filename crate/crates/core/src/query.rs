//! Encoding of "some input violates this rule" as a search over atom truth
//! values, MofN part bits and node phases.
//!
//! Atoms are stored in canonical form (`>=`, `<=` or `=`); a negated
//! occurrence becomes a literal of negative polarity, so `x < 1` and
//! `x >= 1` share one search variable.

use std::collections::HashMap;

use crate::arith::{QVector, Rational};
use crate::error::Result;
use crate::network::{parallel_product, Activation, Network, NodeId};
use crate::rule::{Cmp, Formula, LinearAtom, Relation, Rule, Witness};

/// `coeffs · x + constant` over the search inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Affine {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl Affine {
    pub fn constant(n: usize, c: Rational) -> Self {
        Affine {
            coeffs: vec![Rational::zero(); n],
            constant: c,
        }
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut a = Affine::constant(n, Rational::zero());
        a.coeffs[j] = Rational::one();
        a
    }

    pub fn add_scaled(&mut self, w: &Rational, other: &Affine) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !o.is_zero() {
                *c += &(w * o);
            }
        }
        self.constant += &(w * &other.constant);
    }

    pub fn scaled(&self, w: &Rational) -> Affine {
        Affine {
            coeffs: self.coeffs.iter().map(|c| c * w).collect(),
            constant: &self.constant * w,
        }
    }

    fn extreme(&self, bx: &[Interval], upper: bool) -> Option<Rational> {
        let mut v = self.constant.clone();
        for (c, iv) in self.coeffs.iter().zip(bx) {
            if c.is_zero() {
                continue;
            }
            let take_hi = c.is_positive() == upper;
            let end = if take_hi { iv.hi.as_ref()? } else { iv.lo.as_ref()? };
            v += &(c * end);
        }
        Some(v)
    }

    pub fn min_over(&self, bx: &[Interval]) -> Option<Rational> {
        self.extreme(bx, false)
    }

    pub fn max_over(&self, bx: &[Interval]) -> Option<Rational> {
        self.extreme(bx, true)
    }

    /// The atom `self(x) rel rhs`.
    pub fn atom(&self, rel: Relation, rhs: &Rational) -> LinearAtom {
        LinearAtom::new(QVector(self.coeffs.clone()), rel, rhs - &self.constant)
    }
}

/// Closed interval; `None` ends are infinite.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Interval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

/// Over-approximating box of the closure of `rows`, by repeated interval
/// tightening of each row.
pub(crate) fn interval_box(dim: usize, rows: &[LinearAtom]) -> Vec<Interval> {
    let mut bx = vec![Interval::default(); dim];
    let mut halves: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for r in rows {
        let neg = || (r.coeffs.iter().map(|c| -c).collect(), -&r.constant);
        match r.rel {
            Relation::Lt | Relation::Le => halves.push((r.coeffs.0.clone(), r.constant.clone())),
            Relation::Gt | Relation::Ge => halves.push(neg()),
            Relation::Eq => {
                halves.push((r.coeffs.0.clone(), r.constant.clone()));
                halves.push(neg());
            }
        }
    }
    for _ in 0..3 {
        let mut changed = false;
        for (a, b) in &halves {
            // min of a·x over the box, with the number of infinite terms.
            let mut finite = Rational::zero();
            let mut infinite = 0usize;
            let mut term_min = Vec::with_capacity(dim);
            for (c, iv) in a.iter().zip(&bx) {
                let t = if c.is_zero() {
                    Some(Rational::zero())
                } else if c.is_positive() {
                    iv.lo.as_ref().map(|l| c * l)
                } else {
                    iv.hi.as_ref().map(|h| c * h)
                };
                match &t {
                    Some(v) => finite += v,
                    None => infinite += 1,
                }
                term_min.push(t);
            }
            for j in 0..dim {
                let c = &a[j];
                if c.is_zero() {
                    continue;
                }
                let rest = match &term_min[j] {
                    Some(t) if infinite == 0 => &finite - t,
                    None if infinite == 1 => finite.clone(),
                    _ => continue,
                };
                let limit = (b - &rest).checked_div(c).expect("nonzero");
                let iv = &mut bx[j];
                if c.is_positive() {
                    if iv.hi.as_ref().is_none_or(|h| limit < *h) {
                        iv.hi = Some(limit);
                        changed = true;
                    }
                } else if iv.lo.as_ref().is_none_or(|l| limit > *l) {
                    iv.lo = Some(limit);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    bx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AtomState {
    Unassigned,
    True,
    False,
    /// Only for `=` atoms: the value lies below the constant.
    Below,
    /// Only for `=` atoms: the value lies above the constant.
    Above,
}

impl AtomState {
    pub fn truth(self) -> Option<bool> {
        match self {
            AtomState::Unassigned => None,
            AtomState::True => Some(true),
            _ => Some(false),
        }
    }
}

/// The constraint a canonical atom imposes in a given state.
pub(crate) fn state_relation(canonical: Relation, s: AtomState) -> Option<Relation> {
    Some(match (canonical, s) {
        (_, AtomState::Unassigned) => return None,
        (r, AtomState::True) => r,
        (Relation::Ge, _) => Relation::Lt,
        (Relation::Le, _) => Relation::Gt,
        (Relation::Eq, AtomState::Above) => Relation::Gt,
        (Relation::Eq, _) => Relation::Lt,
        (r, _) => unreachable!("{r:?} is not canonical"),
    })
}

/// Branch values for a canonical atom, in search order.
pub(crate) fn atom_choices(canonical: Relation) -> &'static [AtomState] {
    if canonical == Relation::Eq {
        &[AtomState::True, AtomState::Below, AtomState::Above]
    } else {
        &[AtomState::True, AtomState::False]
    }
}

/// Propositional skeleton over atom literals and MofN part bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Prop {
    Const(bool),
    Lit(usize, bool),
    Bit(usize, bool),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    /// Kleene evaluation; `None` is unknown.
    pub fn eval3(&self, lit: &dyn Fn(usize) -> Option<bool>, bits: &[Option<bool>]) -> Option<bool> {
        match self {
            Prop::Const(b) => Some(*b),
            Prop::Lit(a, pos) => lit(*a).map(|t| t == *pos),
            Prop::Bit(k, v) => bits[*k].map(|b| b == *v),
            Prop::And(ps) => {
                let mut unknown = false;
                for p in ps {
                    match p.eval3(lit, bits) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                (!unknown).then_some(true)
            }
            Prop::Or(ps) => {
                let mut unknown = false;
                for p in ps {
                    match p.eval3(lit, bits) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
        }
    }
}

#[derive(Default)]
struct AtomTable {
    atoms: Vec<LinearAtom>,
    index: HashMap<LinearAtom, usize>,
}

impl AtomTable {
    fn literal(&mut self, a: &LinearAtom) -> Prop {
        let (rel, pos) = match a.rel {
            Relation::Ge => (Relation::Ge, true),
            Relation::Lt => (Relation::Ge, false),
            Relation::Le => (Relation::Le, true),
            Relation::Gt => (Relation::Le, false),
            Relation::Eq => (Relation::Eq, true),
        };
        let canon = LinearAtom::new(a.coeffs.clone(), rel, a.constant.clone());
        let next = self.atoms.len();
        let id = *self.index.entry(canon.clone()).or_insert(next);
        if id == next {
            self.atoms.push(canon);
        }
        Prop::Lit(id, pos)
    }

    /// `f` must be in negation normal form.
    fn prop(&mut self, f: &Formula) -> Prop {
        match f {
            Formula::True => Prop::Const(true),
            Formula::False => Prop::Const(false),
            Formula::Atom(a) => self.literal(a),
            Formula::Not(_) => self.prop(&f.to_nnf()),
            Formula::And(fs) => Prop::And(fs.iter().map(|g| self.prop(g)).collect()),
            Formula::Or(fs) => Prop::Or(fs.iter().map(|g| self.prop(g)).collect()),
        }
    }
}

/// Phase of a nonlinear node during search. `Fixed*` phases were implied by
/// bounds over the current region and add no LP rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    Undecided,
    Active,
    Inactive,
    FixedActive,
    FixedInactive,
}

impl Phase {
    pub fn active(self) -> Option<bool> {
        match self {
            Phase::Undecided => None,
            Phase::Active | Phase::FixedActive => Some(true),
            Phase::Inactive | Phase::FixedInactive => Some(false),
        }
    }
}

/// Affine lower and upper bounds of a node value; `None` is unbounded.
#[derive(Debug, Clone)]
pub(crate) struct NodeBounds {
    pub lo: Option<Affine>,
    pub hi: Option<Affine>,
    pub exact: bool,
    /// Second valid lower bound, for undecided ReLU outputs.
    pub alt_lo: Option<Affine>,
}

impl NodeBounds {
    fn exact(a: Affine) -> Self {
        NodeBounds {
            lo: Some(a.clone()),
            hi: Some(a),
            exact: true,
            alt_lo: None,
        }
    }

    pub fn exact_value(&self) -> Option<&Affine> {
        if self.exact {
            self.lo.as_ref()
        } else {
            None
        }
    }
}

pub(crate) struct Propagation {
    /// Pre-activation bounds per layer.
    pub pre: Vec<Vec<NodeBounds>>,
    /// Output bounds.
    pub out: Vec<NodeBounds>,
}

pub(crate) struct Query {
    pub rule: Rule,
    pub orig: Network,
    /// Network searched over, never classifying.
    pub net: Network,
    pub dim: usize,
    /// Original input dimension when the search space is a pair `(x, y)`.
    pub split: Option<usize>,
    pub input_atoms: Vec<LinearAtom>,
    pub output_atoms: Vec<LinearAtom>,
    pub input_prop: Prop,
    pub output_prop: Prop,
    /// Violation formula over the argmax indicator, for classifying nets.
    pub argmax: Option<Formula>,
    pub mofn: Option<(usize, Cmp, usize)>,
    pub nodes: Vec<NodeId>,
    /// Index of the first phase of each layer, for nonlinear layers.
    pub offsets: Vec<Option<usize>>,
}

/// `z_x,i >= z_x,j` for all `j` and `z_y,j > z_y,i` for some `j`, over the
/// `2m` outputs of a parallel product.
fn monotonicity_violation(m: usize, i: usize) -> Formula {
    let diff = |p: usize, q: usize| {
        let mut c = QVector::zeros(2 * m);
        c[p] = Rational::one();
        c[q] = -Rational::one();
        c
    };
    let others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
    Formula::And(vec![
        Formula::And(
            others
                .iter()
                .map(|&j| Formula::atom(diff(i, j), Relation::Ge, Rational::zero()))
                .collect(),
        ),
        Formula::Or(
            others
                .iter()
                .map(|&j| Formula::atom(diff(m + j, m + i), Relation::Gt, Rational::zero()))
                .collect(),
        ),
    ])
}

impl Query {
    pub fn new(net: &Network, rule: &Rule) -> Result<Query> {
        let n = net.input_dim();
        let m = net.output_dim();
        rule.validate(n, m)?;
        let mut inputs = AtomTable::default();
        let mut outputs = AtomTable::default();
        let mut mofn = None;
        let mut split = None;
        let raw = net.clone().with_classifying(false);
        let (search_net, input_prop, violation, argmax_allowed) = match rule {
            Rule::Propositional { cond, concl } | Rule::Oblique { cond, concl } => {
                let p = inputs.prop(&cond.to_nnf());
                (raw, p, Formula::not(concl.clone()).to_nnf(), true)
            }
            Rule::MofN { parts, cmp, r, concl } => {
                let mut conj = Vec::new();
                for (k, part) in parts.iter().enumerate() {
                    let yes = inputs.prop(&part.to_nnf());
                    let no = inputs.prop(&Formula::not(part.clone()).to_nnf());
                    conj.push(Prop::Or(vec![
                        Prop::And(vec![Prop::Bit(k, true), yes]),
                        Prop::And(vec![Prop::Bit(k, false), no]),
                    ]));
                }
                mofn = Some((parts.len(), *cmp, *r));
                (raw, Prop::And(conj), Formula::not(concl.clone()).to_nnf(), true)
            }
            Rule::Monotonicity { a, class } | Rule::TotalMonotonicity { a, class } => {
                split = Some(n);
                let mut conj = Vec::new();
                for k in 0..a.rows() {
                    let mut c: Vec<Rational> = a.row(k).to_vec();
                    c.extend(a.row(k).iter().map(|v| -v));
                    conj.push(inputs.literal(&LinearAtom::new(QVector(c), Relation::Le, Rational::zero())));
                }
                let total = matches!(rule, Rule::TotalMonotonicity { .. }) && !net.is_classifying();
                let viol = if total {
                    let mut c = QVector::zeros(2 * m);
                    c[*class] = Rational::one();
                    c[m + class] = -Rational::one();
                    Formula::atom(c, Relation::Gt, Rational::zero())
                } else {
                    monotonicity_violation(m, *class)
                };
                (parallel_product(&raw)?, Prop::And(conj), viol, false)
            }
        };
        let (output_prop, argmax) = if argmax_allowed && net.is_classifying() {
            (Prop::Const(true), Some(violation))
        } else {
            (outputs.prop(&violation), None)
        };
        let mut offsets = Vec::new();
        let mut count = 0;
        for layer in search_net.layers() {
            if layer.activation.is_nonlinear() {
                offsets.push(Some(count));
                count += layer.out_dim();
            } else {
                offsets.push(None);
            }
        }
        Ok(Query {
            rule: rule.clone(),
            orig: net.clone(),
            dim: search_net.input_dim(),
            nodes: search_net.nonlinear_nodes(),
            net: search_net,
            split,
            input_atoms: inputs.atoms,
            output_atoms: outputs.atoms,
            input_prop,
            output_prop,
            argmax,
            mofn,
            offsets,
        })
    }

    pub fn witness(&self, w: &QVector) -> Witness {
        match self.split {
            Some(n) => Witness::Pair(QVector(w.0[..n].to_vec()), QVector(w.0[n..].to_vec())),
            None => Witness::Point(w.clone()),
        }
    }

    pub fn point(&self, witness: &Witness) -> QVector {
        match witness {
            Witness::Point(x) => x.clone(),
            Witness::Pair(x, y) => x.concat(y),
        }
    }

    pub fn violated_at(&self, w: &QVector) -> Result<bool> {
        self.rule.violated_by(&self.orig, &self.witness(w))
    }

    /// Status of the input side: conditional and MofN count.
    pub fn input_status(&self, atoms: &[AtomState], bits: &[Option<bool>]) -> Option<bool> {
        if let Some((t, cmp, r)) = self.mofn {
            let yes = bits.iter().filter(|b| **b == Some(true)).count();
            let open = bits.iter().filter(|b| b.is_none()).count();
            debug_assert_eq!(bits.len(), t);
            if !cmp.reachable(yes, yes + open, r) {
                return Some(false);
            }
        }
        self.input_prop.eval3(&|a| atoms[a].truth(), bits)
    }

    pub fn output_status(&self, atoms: &[AtomState]) -> Option<bool> {
        self.output_prop.eval3(&|a| atoms[a].truth(), &[])
    }

    /// Output status where unassigned atoms may be decided by bounds.
    pub fn output_status_bounded(&self, atoms: &[AtomState], out: &[NodeBounds], bx: &[Interval]) -> Option<bool> {
        let lit = |k: usize| {
            atoms[k]
                .truth()
                .or_else(|| implied_truth(&self.output_atoms[k], out, bx))
        };
        self.output_prop.eval3(&lit, &[])
    }

    /// Forward bound propagation under `phases`. With a box, undecided
    /// phases implied by the bounds are fixed in place.
    pub fn propagate(&self, phases: &mut [Phase], bx: Option<&[Interval]>) -> Propagation {
        let n = self.dim;
        let mut prev: Vec<NodeBounds> = (0..n).map(|j| NodeBounds::exact(Affine::unit(n, j))).collect();
        let mut pre_all = Vec::with_capacity(self.net.layers().len());
        for (l, layer) in self.net.layers().iter().enumerate() {
            let mut pre = Vec::with_capacity(layer.out_dim());
            for i in 0..layer.out_dim() {
                pre.push(affine_combination(layer.weights.row(i), &layer.biases[i], &prev, n, bx));
            }
            let mut post = Vec::with_capacity(pre.len());
            for (k, p) in pre.iter().enumerate() {
                let phase = self.offsets[l].map(|o| &mut phases[o + k]);
                post.push(activate(layer.activation, p, phase, bx, n));
            }
            pre_all.push(pre);
            prev = post;
        }
        Propagation {
            pre: pre_all,
            out: prev,
        }
    }

    /// LP row enforcing a phase on a node with exact pre-activation `pre`.
    /// ReLU active is strict when `strict_active`.
    pub fn phase_row(&self, id: NodeId, pre: &Affine, active: bool, strict_active: bool) -> LinearAtom {
        let zero = Rational::zero();
        let rel = match (self.net.layers()[id.layer].activation, active) {
            (Activation::Relu, true) if strict_active => Relation::Gt,
            (Activation::Relu, true) => Relation::Ge,
            (Activation::Relu, false) => Relation::Le,
            (Activation::Heaviside, true) => Relation::Ge,
            (Activation::Heaviside, false) => Relation::Lt,
            (Activation::Identity, _) => unreachable!("identity nodes have no phase"),
        };
        pre.atom(rel, &zero)
    }

    pub fn output_row(&self, k: usize, state: AtomState, out: &[NodeBounds]) -> LinearAtom {
        let atom = &self.output_atoms[k];
        let rel = state_relation(atom.rel, state).expect("assigned");
        let mut value = Affine::constant(self.dim, Rational::zero());
        for (c, b) in atom.coeffs.iter().zip(out) {
            if !c.is_zero() {
                value.add_scaled(c, b.exact_value().expect("outputs are exact once phases are decided"));
            }
        }
        value.atom(rel, &atom.constant)
    }

    pub fn input_row(&self, k: usize, state: AtomState) -> LinearAtom {
        let atom = &self.input_atoms[k];
        let rel = state_relation(atom.rel, state).expect("assigned");
        LinearAtom::new(atom.coeffs.clone(), rel, atom.constant.clone())
    }

    /// Rows forcing the argmax indicator to equal `pattern`.
    pub fn argmax_rows(&self, pattern: &[bool], out: &[NodeBounds]) -> Vec<LinearAtom> {
        let z: Vec<&Affine> = out.iter().map(|b| b.exact_value().expect("exact outputs")).collect();
        let k = pattern.iter().position(|&b| b).expect("nonzero pattern");
        let zero = Rational::zero();
        let mut rows = Vec::new();
        for (j, &on) in pattern.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut d = z[j].clone();
            d.add_scaled(&-Rational::one(), z[k]);
            rows.push(d.atom(if on { Relation::Eq } else { Relation::Lt }, &zero));
        }
        rows
    }

    /// LP over the inputs plus one variable per undecided node, relaxing
    /// each undecided ReLU to its triangle `y >= 0, y >= p, y <= chord`
    /// and each undecided step to `0 <= y <= 1`. Assigned output atoms
    /// are added over the lifted outputs. Every execution consistent with
    /// `phases` lifts to a feasible point, so infeasibility prunes soundly.
    pub fn relaxation(
        &self,
        phases: &[Phase],
        prop: &Propagation,
        bx: &[Interval],
        outputs: &[AtomState],
    ) -> Relaxation {
        let n = self.dim;
        let extra = phases.iter().filter(|p| **p == Phase::Undecided).count();
        let dim = n + extra;
        let zero = Rational::zero();
        let mut rows = Vec::new();
        let mut next = n;
        let mut prev: Vec<Affine> = (0..n).map(|j| Affine::unit(dim, j)).collect();
        for (l, layer) in self.net.layers().iter().enumerate() {
            let mut post = Vec::with_capacity(layer.out_dim());
            for k in 0..layer.out_dim() {
                let mut pre = Affine::constant(dim, layer.biases[k].clone());
                for (w, p) in layer.weights.row(k).iter().zip(&prev) {
                    if !w.is_zero() {
                        pre.add_scaled(w, p);
                    }
                }
                let Some(o) = self.offsets[l] else {
                    post.push(pre);
                    continue;
                };
                let act = layer.activation;
                post.push(match (act, phases[o + k].active()) {
                    (Activation::Relu, Some(true)) => pre,
                    (_, Some(false)) => Affine::constant(dim, zero.clone()),
                    (_, Some(true)) => Affine::constant(dim, Rational::one()),
                    (_, None) => {
                        // y >= 0 is implicit in the LP.
                        let y = Affine::unit(dim, next);
                        next += 1;
                        if act == Activation::Heaviside {
                            rows.push(y.atom(Relation::Le, &Rational::one()));
                        } else {
                            let mut gap = y.clone();
                            gap.add_scaled(&-Rational::one(), &pre);
                            rows.push(gap.atom(Relation::Ge, &zero));
                            let b = &prop.pre[l][k];
                            let lo = b.lo.as_ref().and_then(|a| a.min_over(bx));
                            let hi = b.hi.as_ref().and_then(|a| a.max_over(bx));
                            if let (Some(lo), Some(hi)) = (lo, hi) {
                                // y <= hi (p - lo) / (hi - lo)
                                let slope = hi.checked_div(&(&hi - &lo)).expect("lo < 0 < hi");
                                let mut chord = y.clone();
                                chord.add_scaled(&-slope.clone(), &pre);
                                rows.push(chord.atom(Relation::Le, &-(&slope * &lo)));
                            }
                        }
                        y
                    }
                });
            }
            prev = post;
        }
        for (k, state) in outputs.iter().enumerate() {
            let Some(rel) = state_relation(self.output_atoms[k].rel, *state) else {
                continue;
            };
            let atom = &self.output_atoms[k];
            let mut value = Affine::constant(dim, zero.clone());
            for (c, z) in atom.coeffs.iter().zip(&prev) {
                if !c.is_zero() {
                    value.add_scaled(c, z);
                }
            }
            rows.push(value.atom(rel, &atom.constant));
        }
        Relaxation {
            dim,
            nonneg: extra,
            rows,
        }
    }
}

/// Relaxed system over `(x, y)`; the first `Query::dim` coordinates are
/// the search inputs.
pub(crate) struct Relaxation {
    pub dim: usize,
    /// Trailing variables that are implicitly nonnegative.
    pub nonneg: usize,
    pub rows: Vec<LinearAtom>,
}

/// Undecided inputs whose alternative lower bound is tried jointly.
const MAX_ALTERNATIVES: usize = 3;

fn combine(
    weights: &[Rational],
    bias: &Rational,
    prev: &[NodeBounds],
    n: usize,
    upper: bool,
    alt: u32,
    alts: &[usize],
) -> Option<Affine> {
    let mut acc = Affine::constant(n, bias.clone());
    for (j, (w, b)) in weights.iter().zip(prev).enumerate() {
        if w.is_zero() {
            continue;
        }
        let v = if w.is_positive() != upper {
            match alts.iter().position(|&k| k == j) {
                Some(bit) if alt >> bit & 1 == 1 => b.alt_lo.as_ref(),
                _ => b.lo.as_ref(),
            }
        } else {
            b.hi.as_ref()
        };
        acc.add_scaled(w, v?);
    }
    Some(acc)
}

/// Bounds of `weights · prev + bias`. With a box, inputs carrying an
/// alternative lower bound are tried in every combination (when few) and
/// the tightest concrete bound is kept.
fn affine_combination(
    weights: &[Rational],
    bias: &Rational,
    prev: &[NodeBounds],
    n: usize,
    bx: Option<&[Interval]>,
) -> NodeBounds {
    let exact = weights.iter().zip(prev).all(|(w, b)| w.is_zero() || b.exact);
    if exact {
        return NodeBounds::exact(combine(weights, bias, prev, n, false, 0, &[]).expect("exact values are finite"));
    }
    let alts: Vec<usize> = (0..prev.len())
        .filter(|&j| !weights[j].is_zero() && prev[j].alt_lo.is_some())
        .collect();
    let Some(bx) = bx.filter(|_| !alts.is_empty() && alts.len() <= MAX_ALTERNATIVES) else {
        return NodeBounds {
            lo: combine(weights, bias, prev, n, false, 0, &[]),
            hi: combine(weights, bias, prev, n, true, 0, &[]),
            exact: false,
            alt_lo: None,
        };
    };
    let mut lo: Option<(Affine, Rational)> = None;
    let mut hi: Option<(Affine, Rational)> = None;
    for alt in 0..1u32 << alts.len() {
        if let Some(a) = combine(weights, bias, prev, n, false, alt, &alts) {
            if let Some(v) = a.min_over(bx) {
                if lo.as_ref().is_none_or(|(_, best)| v > *best) {
                    lo = Some((a, v));
                }
            }
        }
        if let Some(a) = combine(weights, bias, prev, n, true, alt, &alts) {
            if let Some(v) = a.max_over(bx) {
                if hi.as_ref().is_none_or(|(_, best)| v < *best) {
                    hi = Some((a, v));
                }
            }
        }
    }
    NodeBounds {
        lo: lo.map(|(a, _)| a),
        hi: hi.map(|(a, _)| a),
        exact: false,
        alt_lo: None,
    }
}

fn activate(
    act: Activation,
    pre: &NodeBounds,
    phase: Option<&mut Phase>,
    bx: Option<&[Interval]>,
    n: usize,
) -> NodeBounds {
    let zero = || NodeBounds::exact(Affine::constant(n, Rational::zero()));
    let one = || NodeBounds::exact(Affine::constant(n, Rational::one()));
    let Some(phase) = phase else {
        return pre.clone();
    };
    if *phase == Phase::Undecided {
        if let Some(bx) = bx {
            let l = pre.lo.as_ref().and_then(|a| a.min_over(bx));
            let u = pre.hi.as_ref().and_then(|a| a.max_over(bx));
            let fixed = match act {
                Activation::Relu => match (&l, &u) {
                    (_, Some(u)) if !u.is_positive() => Some(Phase::FixedInactive),
                    (Some(l), _) if !l.is_negative() => Some(Phase::FixedActive),
                    _ => None,
                },
                Activation::Heaviside => match (&l, &u) {
                    (Some(l), _) if !l.is_negative() => Some(Phase::FixedActive),
                    (_, Some(u)) if u.is_negative() => Some(Phase::FixedInactive),
                    _ => None,
                },
                Activation::Identity => None,
            };
            if let Some(f) = fixed {
                *phase = f;
            } else if act == Activation::Relu {
                return relu_relaxation(pre, l, u, n);
            }
        }
    }
    match (act, phase.active()) {
        (Activation::Relu, Some(true)) => pre.clone(),
        (Activation::Relu, Some(false)) | (Activation::Heaviside, Some(false)) => zero(),
        (Activation::Heaviside, Some(true)) => one(),
        (Activation::Relu, None) => NodeBounds {
            lo: Some(Affine::constant(n, Rational::zero())),
            hi: None,
            exact: false,
            alt_lo: None,
        },
        (Activation::Heaviside, None) => NodeBounds {
            lo: Some(Affine::constant(n, Rational::zero())),
            hi: Some(Affine::constant(n, Rational::one())),
            exact: false,
            alt_lo: None,
        },
        (Activation::Identity, _) => pre.clone(),
    }
}

/// Bounds of `relu(p)` for `p` with concrete range `l < 0 < u`: the chord
/// `u (p - l) / (u - l)` above and `λ p` below.
fn relu_relaxation(pre: &NodeBounds, l: Option<Rational>, u: Option<Rational>, n: usize) -> NodeBounds {
    let zero = Affine::constant(n, Rational::zero());
    let hi = match (&l, &u, &pre.hi) {
        (Some(l), Some(u), Some(h)) => {
            let slope = u.checked_div(&(u - l)).expect("u > l");
            let mut a = h.scaled(&slope);
            a.constant -= &(&slope * l);
            Some(a)
        }
        _ => None,
    };
    let use_pre = match (&l, &u) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(l), Some(u)) => *u > -l,
    };
    // Both 0 and p are valid lower bounds; the heuristic picks the primary.
    let (lo, alt_lo) = match (&pre.lo, use_pre) {
        (Some(p), true) => (p.clone(), Some(zero)),
        (Some(p), false) => (zero, Some(p.clone())),
        (None, _) => (zero, None),
    };
    let lo = Some(lo);
    NodeBounds {
        lo,
        hi,
        exact: false,
        alt_lo,
    }
}

/// Truth of `atom` over outputs bounded by `out` on `bx`, when decided.
fn implied_truth(atom: &LinearAtom, out: &[NodeBounds], bx: &[Interval]) -> Option<bool> {
    let n = bx.len();
    let mut lo = Some(Affine::constant(n, Rational::zero()));
    let mut hi = Some(Affine::constant(n, Rational::zero()));
    for (c, b) in atom.coeffs.iter().zip(out) {
        if c.is_zero() {
            continue;
        }
        let (for_lo, for_hi) = if c.is_positive() {
            (&b.lo, &b.hi)
        } else {
            (&b.hi, &b.lo)
        };
        lo = lo.zip(for_lo.as_ref()).map(|(mut acc, v)| {
            acc.add_scaled(c, v);
            acc
        });
        hi = hi.zip(for_hi.as_ref()).map(|(mut acc, v)| {
            acc.add_scaled(c, v);
            acc
        });
    }
    let min = lo.and_then(|a| a.min_over(bx));
    let max = hi.and_then(|a| a.max_over(bx));
    let c = &atom.constant;
    match atom.rel {
        Relation::Ge => {
            if min.as_ref().is_some_and(|v| v >= c) {
                Some(true)
            } else if max.as_ref().is_some_and(|v| v < c) {
                Some(false)
            } else {
                None
            }
        }
        Relation::Le => {
            if max.as_ref().is_some_and(|v| v <= c) {
                Some(true)
            } else if min.as_ref().is_some_and(|v| v > c) {
                Some(false)
            } else {
                None
            }
        }
        Relation::Eq => {
            if max.as_ref().is_some_and(|v| v < c) || min.as_ref().is_some_and(|v| v > c) {
                Some(false)
            } else if min.as_ref() == Some(c) && max.as_ref() == Some(c) {
                Some(true)
            } else {
                None
            }
        }
        _ => unreachable!("canonical atoms only"),
    }
}
