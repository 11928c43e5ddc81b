//! Complete rule verification by branching over atoms, MofN part bits and
//! node phases, discharging each branch with an exact LP over the inputs.
//!
//! Once every phase is decided the network is affine on the branch region,
//! so all constraints are linear in the inputs alone.
//!
//! In [`Mode::Pruned`] each search node is LP-checked, the LP witness is
//! tried directly as a counterexample, and symbolic bounds over the current
//! region fix implied phases and cut branches whose output requirement is
//! already unreachable. [`Mode::Exhaustive`] enumerates every full
//! assignment and only solves LPs at leaves; it serves as a reference.
//!
//! ReLU branches are `pre > 0` (active) and `pre <= 0` (inactive); both
//! phases compute `0` at `pre = 0`, so the split loses nothing. Heaviside
//! branches are `pre >= 0` and `pre < 0`.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::arith::{QVector, Rational};
use crate::boolean::{boolean_points, bools_to_vector};
use crate::error::{Error, Result};
use crate::lp::{check_atoms, check_atoms_nonneg, FeasibilityResult};
use crate::network::{argmax_indicator, Activation, Network};
use crate::query::{atom_choices, interval_box, AtomState, Interval, Phase, Propagation, Query};
use crate::rule::{LinearAtom, Relation, Rule, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Pruned,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub mode: Mode,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl VerifyOptions {
    pub fn new(mode: Mode) -> Self {
        VerifyOptions { mode, threads: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub branches: u64,
    pub lp_calls: u64,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, o: SearchStats) {
        self.branches += o.branches;
        self.lp_calls += o.lp_calls;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodePhase {
    Active,
    Inactive,
}

/// Violation certificate: MofN part bits, node phases, and the truth of
/// every conditional and conclusion atom.
///
/// Atoms are listed in canonical form (`>=`, `<=`, `=`) in first-occurrence
/// order of the rule; see [`certificate_atoms`]. For pair rules, phases
/// range over the parallel product network. Classifying networks record
/// the argmax indicator in `output_pattern` instead of output atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub mofn_bits: Option<Vec<bool>>,
    pub phases: Vec<NodePhase>,
    pub input_halfspaces: Vec<bool>,
    pub output_halfspaces: Vec<bool>,
    pub output_pattern: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails { witness: Witness, certificate: Certificate },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails { witness, .. } => Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateCheck {
    Accepted(Witness),
    Rejected(String),
    /// Structural rejection: the certificate does not fit the rule and net.
    Malformed(String),
}

impl CertificateCheck {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CertificateCheck::Accepted(_))
    }
}

/// Levels expanded sequentially before subtrees are handed to workers.
const FRONTIER_DEPTH: usize = 3;

#[derive(Clone)]
struct State {
    bits: Vec<Option<bool>>,
    inputs: Vec<AtomState>,
    outputs: Vec<AtomState>,
    phases: Vec<Phase>,
    rows: Vec<LinearAtom>,
}

enum Var {
    Bit(usize),
    Input(usize),
    Phase(usize),
    Output(usize),
    Leaf,
}

struct Search<'a> {
    q: &'a Query,
    mode: Mode,
    branches: AtomicU64,
    lps: AtomicU64,
}

/// Appends `row`, returning false when it is a constant contradiction.
fn push_row(rows: &mut Vec<LinearAtom>, row: LinearAtom) -> bool {
    if row.coeffs.is_zero() {
        return row.rel.holds(&Rational::zero(), &row.constant);
    }
    rows.push(row);
    true
}

/// `row` over the first coordinates of a `dim`-dimensional space.
fn pad(row: &LinearAtom, dim: usize) -> LinearAtom {
    let mut coeffs = row.coeffs.0.clone();
    coeffs.resize(dim, Rational::zero());
    LinearAtom::new(QVector(coeffs), row.rel, row.constant.clone())
}

/// Nonzero 0/1 vectors of length `m` in increasing binary order, first
/// entry least significant.
fn patterns(m: usize) -> impl Iterator<Item = Vec<bool>> {
    (1u64..1 << m).map(move |bits| (0..m).map(|i| bits >> i & 1 == 1).collect())
}

impl Search<'_> {
    fn lp(&self, rows: &[LinearAtom]) -> Option<QVector> {
        self.lps.fetch_add(1, Ordering::Relaxed);
        match check_atoms(self.q.dim, rows) {
            FeasibilityResult::Feasible(w) => Some(w),
            FeasibilityResult::Infeasible => None,
        }
    }

    fn root(&self) -> State {
        let q = self.q;
        State {
            bits: vec![None; q.mofn.map_or(0, |m| m.0)],
            inputs: vec![AtomState::Unassigned; q.input_atoms.len()],
            outputs: vec![AtomState::Unassigned; q.output_atoms.len()],
            phases: vec![Phase::Undecided; q.nodes.len()],
            rows: Vec::new(),
        }
    }

    fn leaf_witness(&self, w: QVector) -> Result<Option<QVector>> {
        assert!(self.q.violated_at(&w)?, "leaf witness does not violate the rule");
        Ok(Some(w))
    }

    /// Relaxed LP of a pruned-mode node; `None` when infeasible.
    fn relaxed_lp(&self, st: &State, prop: &Propagation, bx: &[Interval]) -> Option<QVector> {
        let q = self.q;
        let relax = q.relaxation(&st.phases, prop, bx, &st.outputs);
        let mut rows: Vec<LinearAtom> = st.rows.iter().map(|r| pad(r, relax.dim)).collect();
        rows.extend(relax.rows);
        self.lps.fetch_add(1, Ordering::Relaxed);
        match check_atoms_nonneg(relax.dim, relax.nonneg, &rows) {
            FeasibilityResult::Feasible(w) => Some(QVector(w.0[..q.dim].to_vec())),
            FeasibilityResult::Infeasible => None,
        }
    }

    fn node(&self, mut st: State, depth: usize, frontier: Option<&mut Vec<State>>) -> Result<Option<QVector>> {
        self.branches.fetch_add(1, Ordering::Relaxed);
        let q = self.q;
        let input_status = q.input_status(&st.inputs, &st.bits);
        if input_status == Some(false) {
            return Ok(None);
        }
        let pruned = self.mode == Mode::Pruned;
        let bx = pruned.then(|| interval_box(q.dim, &st.rows));
        let prop = q.propagate(&mut st.phases, bx.as_deref());
        let output_status = match &bx {
            Some(bx) if q.argmax.is_none() => q.output_status_bounded(&st.outputs, &prop.out, bx),
            _ => q.output_status(&st.outputs),
        };
        if q.argmax.is_none() && output_status == Some(false) {
            return Ok(None);
        }
        let mut relaxed = None;
        if let Some(bx) = &bx {
            let Some(w) = self.relaxed_lp(&st, &prop, bx) else {
                return Ok(None);
            };
            if q.violated_at(&w)? {
                return Ok(Some(w));
            }
            relaxed = Some(w);
        }
        let mut frontier = frontier;
        if depth == FRONTIER_DEPTH {
            if let Some(f) = frontier {
                f.push(st);
                return Ok(None);
            }
        }

        let unassigned = |v: &[AtomState]| v.iter().position(|s| *s == AtomState::Unassigned);
        let output_var = unassigned(&st.outputs).filter(|_| q.argmax.is_none() && (!pruned || output_status.is_none()));
        let var = if let Some(k) = st.bits.iter().position(Option::is_none) {
            Var::Bit(k)
        } else if let Some(k) = unassigned(&st.inputs).filter(|_| !pruned || input_status.is_none()) {
            Var::Input(k)
        } else if let Some(k) = output_var.filter(|_| pruned) {
            Var::Output(k)
        } else if let Some(k) = st.phases.iter().position(|p| *p == Phase::Undecided) {
            Var::Phase(k)
        } else if let Some(k) = output_var {
            Var::Output(k)
        } else {
            Var::Leaf
        };

        let mut children = Vec::new();
        match var {
            Var::Bit(k) => {
                for v in [true, false] {
                    let mut c = st.clone();
                    c.bits[k] = Some(v);
                    children.push(c);
                }
            }
            Var::Input(k) => {
                for &s in atom_choices(q.input_atoms[k].rel) {
                    let mut c = st.clone();
                    c.inputs[k] = s;
                    if push_row(&mut c.rows, q.input_row(k, s)) {
                        children.push(c);
                    }
                }
            }
            Var::Phase(idx) => {
                let id = q.nodes[idx];
                let pre = prop.pre[id.layer][id.node]
                    .exact_value()
                    .expect("earlier layers are decided");
                for active in [true, false] {
                    let mut c = st.clone();
                    c.phases[idx] = if active { Phase::Active } else { Phase::Inactive };
                    if push_row(&mut c.rows, q.phase_row(id, pre, active, true)) {
                        children.push(c);
                    }
                }
            }
            Var::Output(k) => {
                for &s in atom_choices(q.output_atoms[k].rel) {
                    let mut c = st.clone();
                    c.outputs[k] = s;
                    if pruned || push_row(&mut c.rows, q.output_row(k, s, &prop.out)) {
                        children.push(c);
                    }
                }
            }
            Var::Leaf => {
                let Some(viol) = &q.argmax else {
                    if let Some(w) = relaxed {
                        // Nothing is relaxed at a leaf, so the LP point is exact.
                        return self.leaf_witness(w);
                    }
                    return match self.lp(&st.rows) {
                        Some(w) => self.leaf_witness(w),
                        None => Ok(None),
                    };
                };
                for pattern in patterns(q.net.output_dim()) {
                    if !viol.eval(&bools_to_vector(&pattern))? {
                        continue;
                    }
                    let mut rows = st.rows.clone();
                    if !q
                        .argmax_rows(&pattern, &prop.out)
                        .into_iter()
                        .all(|r| push_row(&mut rows, r))
                    {
                        continue;
                    }
                    if let Some(w) = self.lp(&rows) {
                        return self.leaf_witness(w);
                    }
                }
                return Ok(None);
            }
        }
        for c in children {
            if let Some(w) = self.node(c, depth + 1, frontier.as_deref_mut())? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    /// First counterexample in branch order, independent of thread count.
    fn run(&self) -> Result<Option<QVector>> {
        let mut frontier = Vec::new();
        if let Some(w) = self.node(self.root(), 0, Some(&mut frontier))? {
            return Ok(Some(w));
        }
        frontier
            .into_par_iter()
            .map(|st| self.node(st, FRONTIER_DEPTH, None))
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            })
            .unwrap_or(Ok(None))
    }
}

/// Verifies one rule, returning the verdict and search statistics.
pub fn verify_rule_with(net: &Network, rule: &Rule, opts: &VerifyOptions) -> Result<(Verdict, SearchStats)> {
    let q = Query::new(net, rule)?;
    let search = Search {
        q: &q,
        mode: opts.mode,
        branches: AtomicU64::new(0),
        lps: AtomicU64::new(0),
    };
    let found = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?
            .install(|| search.run())?,
        None => search.run()?,
    };
    let stats = SearchStats {
        branches: search.branches.load(Ordering::Relaxed),
        lp_calls: search.lps.load(Ordering::Relaxed),
    };
    let verdict = match found {
        None => Verdict::Holds,
        Some(w) => {
            let witness = q.witness(&w);
            let certificate = certificate_for(&q, &w)?;
            Verdict::Fails { witness, certificate }
        }
    };
    Ok((verdict, stats))
}

pub fn verify_rule(net: &Network, rule: &Rule, mode: Mode) -> Result<Verdict> {
    Ok(verify_rule_with(net, rule, &VerifyOptions::new(mode))?.0)
}

/// Verifies each rule independently.
pub fn verify_ruleset(net: &Network, rules: &[Rule], mode: Mode) -> Result<Vec<Verdict>> {
    rules.iter().map(|r| verify_rule(net, r, mode)).collect()
}

/// The canonical conditional and conclusion atoms a certificate for `rule`
/// on `net` refers to, in order.
pub fn certificate_atoms(net: &Network, rule: &Rule) -> Result<(Vec<LinearAtom>, Vec<LinearAtom>)> {
    let q = Query::new(net, rule)?;
    Ok((q.input_atoms, q.output_atoms))
}

fn certificate_for(q: &Query, w: &QVector) -> Result<Certificate> {
    let mofn_bits = match &q.rule {
        Rule::MofN { parts, .. } => Some(parts.iter().map(|p| p.eval(w)).collect::<Result<Vec<_>>>()?),
        _ => None,
    };
    let trace = q.net.trace(w)?;
    let phases = q
        .nodes
        .iter()
        .map(|id| {
            let pre = &trace.pre[id.layer][id.node];
            let active = match q.net.layers()[id.layer].activation {
                Activation::Heaviside => !pre.is_negative(),
                _ => pre.is_positive(),
            };
            if active {
                NodePhase::Active
            } else {
                NodePhase::Inactive
            }
        })
        .collect();
    let input_halfspaces = q.input_atoms.iter().map(|a| a.eval(w)).collect::<Result<Vec<_>>>()?;
    let z = q.net.raw_output(w)?;
    let output_halfspaces = q.output_atoms.iter().map(|a| a.eval(&z)).collect::<Result<Vec<_>>>()?;
    let output_pattern = q
        .argmax
        .as_ref()
        .map(|_| argmax_indicator(&z).iter().map(|v| !v.is_zero()).collect());
    Ok(Certificate {
        mofn_bits,
        phases,
        input_halfspaces,
        output_halfspaces,
        output_pattern,
    })
}

/// Reads off the certificate of a concrete violation.
pub fn extract_certificate(net: &Network, rule: &Rule, witness: &Witness) -> Result<Certificate> {
    let q = Query::new(net, rule)?;
    let w = q.point(witness);
    if w.dim() != q.dim {
        return Err(Error::DimensionMismatch {
            expected: q.dim,
            found: w.dim(),
        });
    }
    certificate_for(&q, &w)
}

/// Checks a certificate: its atom values must force the violation
/// propositionally and the induced linear system must be feasible. The
/// resulting point is re-validated against the rule before acceptance.
pub fn check_certificate(net: &Network, rule: &Rule, cert: &Certificate) -> Result<CertificateCheck> {
    let q = Query::new(net, rule)?;
    let malformed = |msg: String| Ok(CertificateCheck::Malformed(msg));
    let bits_len = q.mofn.map(|m| m.0);
    if cert.mofn_bits.as_ref().map(Vec::len) != bits_len {
        return malformed("MofN bits do not match the rule".into());
    }
    if cert.phases.len() != q.nodes.len() {
        return malformed(format!(
            "expected {} phases, found {}",
            q.nodes.len(),
            cert.phases.len()
        ));
    }
    if cert.input_halfspaces.len() != q.input_atoms.len() {
        return malformed(format!(
            "expected {} conditional atoms, found {}",
            q.input_atoms.len(),
            cert.input_halfspaces.len()
        ));
    }
    if cert.output_halfspaces.len() != q.output_atoms.len() {
        return malformed(format!(
            "expected {} conclusion atoms, found {}",
            q.output_atoms.len(),
            cert.output_halfspaces.len()
        ));
    }
    let reject = |msg: String| Ok(CertificateCheck::Rejected(msg));
    match (&q.argmax, &cert.output_pattern) {
        (Some(_), Some(p)) if p.len() == q.net.output_dim() && p.iter().any(|b| *b) => {}
        (None, None) => {}
        _ => return malformed("output pattern does not match the network".into()),
    }

    let to_state = |b: &bool| if *b { AtomState::True } else { AtomState::False };
    let inputs: Vec<AtomState> = cert.input_halfspaces.iter().map(to_state).collect();
    let outputs: Vec<AtomState> = cert.output_halfspaces.iter().map(to_state).collect();
    let bits: Vec<Option<bool>> = cert.mofn_bits.iter().flatten().map(|b| Some(*b)).collect();
    if q.input_status(&inputs, &bits) != Some(true) {
        return reject("propositional: conditional is not forced true".into());
    }
    let output_forced = match (&q.argmax, &cert.output_pattern) {
        (Some(f), Some(p)) => f.eval(&bools_to_vector(p))?,
        _ => q.output_status(&outputs) == Some(true),
    };
    if !output_forced {
        return reject("propositional: conclusion is not forced false".into());
    }

    let mut phases: Vec<Phase> = cert
        .phases
        .iter()
        .map(|p| match p {
            NodePhase::Active => Phase::Active,
            NodePhase::Inactive => Phase::Inactive,
        })
        .collect();
    let prop = q.propagate(&mut phases, None);
    let mut base = Vec::new();
    for (idx, id) in q.nodes.iter().enumerate() {
        let pre = prop.pre[id.layer][id.node].exact_value().expect("all phases decided");
        let row = q.phase_row(*id, pre, cert.phases[idx] == NodePhase::Active, false);
        if !push_row(&mut base, row) {
            return reject(format!("phase of node {}:{} is impossible", id.layer + 1, id.node + 1));
        }
    }
    if let Some(p) = &cert.output_pattern {
        for r in q.argmax_rows(p, &prop.out) {
            if !push_row(&mut base, r) {
                return reject("output pattern is impossible".into());
            }
        }
    }

    // False equality atoms split into a below and an above side.
    let eq_false: Vec<(bool, usize)> = inputs
        .iter()
        .enumerate()
        .filter(|(k, s)| **s == AtomState::False && q.input_atoms[*k].rel == Relation::Eq)
        .map(|(k, _)| (true, k))
        .chain(
            outputs
                .iter()
                .enumerate()
                .filter(|(k, s)| **s == AtomState::False && q.output_atoms[*k].rel == Relation::Eq)
                .map(|(k, _)| (false, k)),
        )
        .collect();
    if eq_false.len() > 16 {
        return Err(Error::Unsupported("more than 16 false equality atoms".into()));
    }
    for sides in 0u32..1 << eq_false.len() {
        let (mut ins, mut outs) = (inputs.clone(), outputs.clone());
        for (bit, &(is_input, k)) in eq_false.iter().enumerate() {
            let s = if sides >> bit & 1 == 0 {
                AtomState::Below
            } else {
                AtomState::Above
            };
            if is_input {
                ins[k] = s;
            } else {
                outs[k] = s;
            }
        }
        let mut rows = base.clone();
        let ok = ins
            .iter()
            .enumerate()
            .all(|(k, s)| push_row(&mut rows, q.input_row(k, *s)))
            && outs
                .iter()
                .enumerate()
                .all(|(k, s)| push_row(&mut rows, q.output_row(k, *s, &prop.out)));
        if !ok {
            continue;
        }
        if let FeasibilityResult::Feasible(w) = check_atoms(q.dim, &rows) {
            if q.violated_at(&w)? {
                return Ok(CertificateCheck::Accepted(q.witness(&w)));
            }
            return reject("witness failed direct re-evaluation".into());
        }
    }
    reject("induced linear system is infeasible".into())
}

/// Decides a rule over Boolean inputs by enumerating `{0,1}^n` (or
/// `{0,1}^{2n}` for pair rules). Refuses when that exceeds `2^bound` points.
pub fn verify_boolean(net: &Network, rule: &Rule, bound: usize) -> Result<Verdict> {
    let n = net.input_dim();
    rule.validate(n, net.output_dim())?;
    let pair = rule.is_monotonicity_kind();
    let needed = if pair { 2 * n } else { n };
    if needed > bound || needed >= 64 {
        return Err(Error::EnumerationBound { needed, bound });
    }
    for p in boolean_points(needed) {
        let witness = if pair {
            Witness::Pair(bools_to_vector(&p[..n]), bools_to_vector(&p[n..]))
        } else {
            Witness::Point(bools_to_vector(&p))
        };
        if rule.violated_by(net, &witness)? {
            let certificate = extract_certificate(net, rule, &witness)?;
            return Ok(Verdict::Fails { witness, certificate });
        }
    }
    Ok(Verdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::QMatrix;
    use crate::network::Layer;
    use crate::rule::Formula;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn single_relu() -> Network {
        let layer = Layer::new(QMatrix::from_int_rows(&[&[1]]), QVector::zeros(1), Activation::Relu).unwrap();
        Network::new(1, vec![layer], false, false).unwrap()
    }

    fn ax(rel: Relation, c: &str) -> Formula {
        Formula::Atom(LinearAtom::axis(1, 0, rel, q(c)))
    }

    fn both_modes(net: &Network, rule: &Rule) -> Verdict {
        let a = verify_rule(net, rule, Mode::Pruned).unwrap();
        let b = verify_rule(net, rule, Mode::Exhaustive).unwrap();
        assert_eq!(a.holds(), b.holds());
        for v in [&a, &b] {
            if let Verdict::Fails { witness, certificate } = v {
                assert!(rule.violated_by(net, witness).unwrap());
                assert!(check_certificate(net, rule, certificate).unwrap().is_accepted());
            }
        }
        a
    }

    #[test]
    fn relu_nonpositive_inputs_give_zero() {
        let rule = Rule::propositional(ax(Relation::Le, "0"), ax(Relation::Eq, "0")).unwrap();
        assert!(both_modes(&single_relu(), &rule).holds());
    }

    #[test]
    fn relu_is_not_constant_one() {
        let cond = Formula::And(vec![ax(Relation::Ge, "-1"), ax(Relation::Le, "1")]);
        let rule = Rule::propositional(cond, ax(Relation::Eq, "1")).unwrap();
        let v = both_modes(&single_relu(), &rule);
        let Some(Witness::Point(x)) = v.witness() else {
            panic!("expected a point")
        };
        assert!(x[0] >= q("-1") && x[0] <= q("1"));
    }

    #[test]
    fn total_monotonicity_of_identity_and_negation() {
        let a = QMatrix::identity(1);
        let rule = Rule::TotalMonotonicity { a: a.clone(), class: 0 };
        assert!(both_modes(&Network::identity(1), &rule).holds());
        let neg = Network::affine(QMatrix::from_int_rows(&[&[-1]]), QVector::zeros(1)).unwrap();
        let v = both_modes(&neg, &rule);
        assert!(matches!(v.witness(), Some(Witness::Pair(..))));
    }

    #[test]
    fn empty_and_mixed_rulesets() {
        let net = single_relu();
        assert!(verify_ruleset(&net, &[], Mode::Pruned).unwrap().is_empty());
        let good = Rule::propositional(ax(Relation::Le, "0"), ax(Relation::Eq, "0")).unwrap();
        let bad = Rule::propositional(Formula::True, ax(Relation::Eq, "0")).unwrap();
        let v = verify_ruleset(&net, &[good.clone(), bad.clone()], Mode::Pruned).unwrap();
        assert!(v[0].holds() && !v[1].holds());
        let w = verify_ruleset(&net, &[bad, good], Mode::Pruned).unwrap();
        assert!(!w[0].holds() && w[1].holds());
    }

    #[test]
    fn certificate_with_true_conclusion_is_rejected() {
        let net = single_relu();
        let rule = Rule::propositional(Formula::True, ax(Relation::Ge, "0")).unwrap();
        let cert = Certificate {
            mofn_bits: None,
            phases: vec![NodePhase::Active],
            input_halfspaces: vec![],
            output_halfspaces: vec![true],
            output_pattern: None,
        };
        assert!(!check_certificate(&net, &rule, &cert).unwrap().is_accepted());
    }

    #[test]
    fn thread_count_does_not_change_the_counterexample() {
        let net = single_relu();
        let cond = Formula::And(vec![ax(Relation::Ge, "-3"), ax(Relation::Le, "5")]);
        let rule = Rule::propositional(cond, ax(Relation::Lt, "2")).unwrap();
        let one = verify_rule_with(
            &net,
            &rule,
            &VerifyOptions {
                mode: Mode::Pruned,
                threads: Some(1),
            },
        )
        .unwrap();
        let four = verify_rule_with(
            &net,
            &rule,
            &VerifyOptions {
                mode: Mode::Pruned,
                threads: Some(4),
            },
        )
        .unwrap();
        assert_eq!(one.0, four.0);
    }
}
