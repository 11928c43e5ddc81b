//! Rule-kind reductions, hardness-instance generators, the box witness
//! builder and the cube perturbation.

use crate::arith::{QMatrix, QVector, Rational};
use crate::boolean::{compile_boolean_formula, BoolFormula};
use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::network::{
    build_clamp_gadget, build_min_gadget, compose, parallel_product, side_by_side, Activation, Layer, Network,
};
use crate::rule::{Cmp, Formula, LinearAtom, Relation, Rule};

/// A network together with rules about it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationInstance {
    pub net: Network,
    pub rules: Vec<Rule>,
    /// Expected "all rules hold", when known from an independent oracle.
    pub ground_truth_hint: Option<bool>,
}

impl VerificationInstance {
    pub fn new(net: Network, rules: Vec<Rule>) -> Self {
        VerificationInstance {
            net,
            rules,
            ground_truth_hint: None,
        }
    }
}

/// Closed axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxRegion {
    pub lower: QVector,
    pub upper: QVector,
}

impl BoxRegion {
    pub fn new(lower: QVector, upper: QVector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                found: upper.dim(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidRule("box with lower > upper".into()));
        }
        Ok(BoxRegion { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn contains(&self, x: &QVector) -> bool {
        (0..self.dim()).all(|i| self.lower[i] <= x[i] && x[i] <= self.upper[i])
    }

    pub fn formula(&self) -> Formula {
        Formula::closed_box(&self.lower, &self.upper)
    }

    /// Largest per-coordinate gap to `other`; zero when they touch.
    pub fn gap(&self, other: &BoxRegion) -> Rational {
        (0..self.dim())
            .map(|i| {
                let a = &other.lower[i] - &self.upper[i];
                let b = &self.lower[i] - &other.upper[i];
                a.max(b).max(Rational::zero())
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

pub fn embed_propositional_as_oblique(rule: &Rule) -> Result<Rule> {
    match rule {
        Rule::Propositional { cond, concl } => Ok(Rule::Oblique {
            cond: cond.clone(),
            concl: concl.clone(),
        }),
        other => Err(Error::InvalidRule(format!(
            "expected a propositional rule, got {}",
            other.kind_name()
        ))),
    }
}

/// An oblique rule is the MofN rule with the single part `cond`, `= 1`.
pub fn embed_oblique_as_mofn(rule: &Rule) -> Result<Rule> {
    match rule {
        Rule::Oblique { cond, concl } => Ok(Rule::MofN {
            parts: vec![cond.clone()],
            cmp: Cmp::Eq,
            r: 1,
            concl: concl.clone(),
        }),
        other => Err(Error::InvalidRule(format!(
            "expected an oblique rule, got {}",
            other.kind_name()
        ))),
    }
}

/// `(A_k, -A_k) · (x, y) <= 0` for every row, i.e. `Ax <= Ay`.
fn pair_order_formula(a: &QMatrix) -> Formula {
    Formula::And(
        (0..a.rows())
            .map(|k| {
                let mut c = a.row(k).to_vec();
                c.extend(a.row(k).iter().map(|v| -v));
                Formula::atom(QVector(c), Relation::Le, Rational::zero())
            })
            .collect(),
    )
}

/// Oblique rule over the parallel product `(x, y) ↦ (N(x), N(y))`
/// equivalent to a monotonicity rule on `net`.
pub fn reduce_monotonicity_to_oblique(net: &Network, rule: &Rule) -> Result<(Network, Rule)> {
    let (a, class, total) = match rule {
        Rule::Monotonicity { a, class } => (a, *class, false),
        Rule::TotalMonotonicity { a, class } => (a, *class, true),
        other => {
            return Err(Error::InvalidRule(format!(
                "expected a monotonicity rule, got {}",
                other.kind_name()
            )))
        }
    };
    rule.validate(net.input_dim(), net.output_dim())?;
    let m = net.output_dim();
    let product = parallel_product(&net.clone().with_classifying(false))?;
    let diff = |p: usize, q: usize| {
        let mut c = QVector::zeros(2 * m);
        c[p] = Rational::one();
        c[q] = -Rational::one();
        c
    };
    let zero = Rational::zero;
    let concl = if total && !net.is_classifying() {
        Formula::atom(diff(class, m + class), Relation::Le, zero())
    } else {
        // class is not a maximizer at x, or it is one at y.
        let others: Vec<usize> = (0..m).filter(|&j| j != class).collect();
        Formula::Or(vec![
            Formula::Or(
                others
                    .iter()
                    .map(|&j| Formula::atom(diff(j, class), Relation::Gt, zero()))
                    .collect(),
            ),
            Formula::And(
                others
                    .iter()
                    .map(|&j| Formula::atom(diff(m + j, m + class), Relation::Le, zero()))
                    .collect(),
            ),
        ])
    };
    Ok((product, Rule::oblique(pair_order_formula(a), concl)))
}

/// `(x, a) ↦ (net(x), a)` for `k` extra inputs `a`, carried through ReLU
/// layers as `(ReLU(a), ReLU(-a))`.
pub fn with_passthrough(net: &Network, k: usize) -> Result<Network> {
    #[derive(Clone, Copy)]
    enum Carrier {
        Plain,
        Split,
    }
    let mut carrier = Carrier::Plain;
    let mut layers = Vec::new();
    for layer in net.layers() {
        let (out, inp) = (layer.out_dim(), layer.in_dim());
        let prev_size = match carrier {
            Carrier::Plain => k,
            Carrier::Split => 2 * k,
        };
        let next = match layer.activation {
            Activation::Identity => Carrier::Plain,
            Activation::Relu => Carrier::Split,
            Activation::Heaviside => {
                return Err(Error::Unsupported("pass-through over Heaviside layers".into()));
            }
        };
        let next_size = match next {
            Carrier::Plain => k,
            Carrier::Split => 2 * k,
        };
        let mut w = QMatrix::zeros(out + next_size, inp + prev_size);
        for i in 0..out {
            for j in 0..inp {
                w[(i, j)] = layer.weights[(i, j)].clone();
            }
        }
        let one = Rational::one();
        for j in 0..k {
            match (carrier, next) {
                (Carrier::Plain, Carrier::Plain) => w[(out + j, inp + j)] = one.clone(),
                (Carrier::Split, Carrier::Plain) => {
                    w[(out + j, inp + j)] = one.clone();
                    w[(out + j, inp + k + j)] = -&one;
                }
                (Carrier::Plain, Carrier::Split) => {
                    w[(out + j, inp + j)] = one.clone();
                    w[(out + k + j, inp + j)] = -&one;
                }
                (Carrier::Split, Carrier::Split) => {
                    w[(out + j, inp + j)] = one.clone();
                    w[(out + k + j, inp + k + j)] = one.clone();
                }
            }
        }
        let b = layer.biases.concat(&QVector::zeros(next_size));
        layers.push(Layer::new(w, b, layer.activation)?);
        carrier = next;
    }
    let m = net.output_dim();
    if let Carrier::Split = carrier {
        let mut w = QMatrix::zeros(m + k, m + 2 * k);
        for i in 0..m {
            w[(i, i)] = Rational::one();
        }
        for j in 0..k {
            w[(m + j, m + j)] = Rational::one();
            w[(m + j, m + k + j)] = -Rational::one();
        }
        layers.push(Layer::new(w, QVector::zeros(m + k), Activation::Identity)?);
    }
    Ok(Network::new(net.input_dim() + k, layers, false, false)?.fuse_identity_layers())
}

/// `A' = [A 0; 0 1; 0 -1]`, so that `A'(x,a) <= A'(y,a')` iff
/// `Ax <= Ay` and `a = a'`.
pub fn extend_order_matrix(a: &QMatrix) -> QMatrix {
    let (l, n) = (a.rows(), a.cols());
    let mut out = QMatrix::zeros(l + 2, n + 1);
    for i in 0..l {
        for j in 0..n {
            out[(i, j)] = a[(i, j)].clone();
        }
    }
    out[(l, n)] = Rational::one();
    out[(l + 1, n)] = -Rational::one();
    out
}

/// Total monotonicity of output `i` as monotonicity of class 0 on
/// `(x, a) ↦ (N(x)_i, a)` with the order matrix [`extend_order_matrix`].
/// Needs a non-classifying network without Heaviside layers.
pub fn reduce_total_to_monotonicity(net: &Network, rule: &Rule) -> Result<(Network, Rule)> {
    let Rule::TotalMonotonicity { a, class } = rule else {
        return Err(Error::InvalidRule(format!(
            "expected a total monotonicity rule, got {}",
            rule.kind_name()
        )));
    };
    rule.validate(net.input_dim(), net.output_dim())?;
    if net.is_classifying() {
        return Err(Error::Unsupported(
            "total monotonicity on a classifying network is already a monotonicity rule".into(),
        ));
    }
    let sliced = net.slice_output(*class)?;
    let reduced = with_passthrough(&sliced, 1)?;
    Ok((
        reduced,
        Rule::Monotonicity {
            a: extend_order_matrix(a),
            class: 0,
        },
    ))
}

fn relu_layer(weights: QMatrix, biases: QVector) -> Result<Layer> {
    Layer::new(weights, biases, Activation::Relu)
}

/// Network that outputs 1 exactly at Boolean satisfying assignments of `s`
/// (and at most 1 on the unit cube), with the rule
/// `x ∈ [0,1]^n ⇒ N(x) ∈ [0,1)`. The rule holds iff `s` is unsatisfiable.
pub fn generate_sat_instance(s: &CnfFormula) -> Result<VerificationInstance> {
    let n = s.num_vars();
    if n == 0 {
        return Err(Error::InvalidFormula("formula without variables".into()));
    }
    let q = s.clauses().len();
    let int = Rational::from_int;
    // 2x-1, 2x-2, 1-2x, -2x per variable.
    let mut w1 = QMatrix::zeros(4 * n, n);
    let mut b1 = QVector::zeros(4 * n);
    for i in 0..n {
        for (r, c, b) in [(0, 2, -1), (1, 2, -2), (2, -2, 1), (3, -2, 0)] {
            w1[(4 * i + r, i)] = int(c);
            b1[4 * i + r] = int(b);
        }
    }
    // v_i = f(2x-1), v̄_i = f(1-2x) at positions 2i, 2i+1.
    let mut w2 = QMatrix::zeros(2 * n, 4 * n);
    for i in 0..n {
        w2[(2 * i, 4 * i)] = int(1);
        w2[(2 * i, 4 * i + 1)] = int(-1);
        w2[(2 * i + 1, 4 * i + 2)] = int(1);
        w2[(2 * i + 1, 4 * i + 3)] = int(-1);
    }
    let mut layers = vec![relu_layer(w1, b1)?, relu_layer(w2, QVector::zeros(2 * n))?];
    if q == 0 {
        layers.push(relu_layer(QMatrix::zeros(1, 2 * n), QVector::from_ints(&[1]))?);
    } else {
        // Clause sum s and s - 1, then c = ReLU(ReLU(s) - ReLU(s - 1)).
        let mut w3 = QMatrix::zeros(2 * q, 2 * n);
        let mut b3 = QVector::zeros(2 * q);
        for (k, clause) in s.clauses().iter().enumerate() {
            for lit in clause {
                let col = 2 * lit.var + usize::from(!lit.positive);
                w3[(2 * k, col)] += &int(1);
                w3[(2 * k + 1, col)] += &int(1);
            }
            b3[2 * k + 1] = int(-1);
        }
        let mut w4 = QMatrix::zeros(q, 2 * q);
        for k in 0..q {
            w4[(k, 2 * k)] = int(1);
            w4[(k, 2 * k + 1)] = int(-1);
        }
        let w5 = QMatrix::from_rows(vec![vec![int(1); q]], q)?;
        layers.push(relu_layer(w3, b3)?);
        layers.push(relu_layer(w4, QVector::zeros(q))?);
        layers.push(relu_layer(w5, QVector(vec![-int(q as i64 - 1)]))?);
    }
    let net = Network::new(n, layers, false, false)?;
    let cond = Formula::closed_box(&QVector::zeros(n), &QVector(vec![Rational::one(); n]));
    let out = |rel, c: i64| Formula::Atom(LinearAtom::axis(1, 0, rel, int(c)));
    let concl = Formula::And(vec![out(Relation::Ge, 0), out(Relation::Lt, 1)]);
    Ok(VerificationInstance::new(net, vec![Rule::propositional(cond, concl)?]))
}

/// Rounds a point of `[0,1]^n` to the nearest vertex, halves to 0.
pub fn round_to_assignment(x: &QVector) -> Vec<bool> {
    x.iter().map(|v| v.round_half_even() == 1.into()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BooleanMonotonicityInstance {
    /// `F(1,…,1)` holds, so the rule holds trivially.
    TriviallyTrue,
    Instance(VerificationInstance),
}

/// Total monotonicity of the compiled network of `f` under the identity
/// order. When `F(1,…,1) = 0` it fails iff `f` is satisfiable.
pub fn generate_boolean_monotonicity_instance(f: &BoolFormula, num_vars: usize) -> Result<BooleanMonotonicityInstance> {
    if f.eval(&vec![true; num_vars]) {
        return Ok(BooleanMonotonicityInstance::TriviallyTrue);
    }
    let net = compile_boolean_formula(f, num_vars)?;
    let rule = Rule::TotalMonotonicity {
        a: QMatrix::identity(num_vars),
        class: 0,
    };
    Ok(BooleanMonotonicityInstance::Instance(VerificationInstance::new(
        net,
        vec![rule],
    )))
}

fn axis_eq(n: usize, var: usize, v: i64) -> Formula {
    Formula::Atom(LinearAtom::axis(n, var, Relation::Eq, Rational::from_int(v)))
}

fn output_eq(v: i64) -> Formula {
    axis_eq(1, 0, v)
}

/// Propositional rules over one output that are consistent iff `s` is
/// unsatisfiable: zero on the unit cube, `S` at every Boolean vertex.
pub fn generate_consistency_instance(s: &CnfFormula) -> Result<Vec<Rule>> {
    let n = s.num_vars();
    let cube = Formula::closed_box(&QVector::zeros(n), &QVector(vec![Rational::one(); n]));
    let vertex = Formula::And(
        (0..n)
            .map(|i| Formula::Or(vec![axis_eq(n, i, 0), axis_eq(n, i, 1)]))
            .collect(),
    );
    let lit_true = |var: usize, positive: bool| axis_eq(n, var, i64::from(positive));
    let satisfied = Formula::And(
        s.clauses()
            .iter()
            .map(|c| Formula::Or(c.iter().map(|l| lit_true(l.var, l.positive)).collect()))
            .collect(),
    );
    let falsified = Formula::Or(
        s.clauses()
            .iter()
            .map(|c| Formula::And(c.iter().map(|l| lit_true(l.var, !l.positive)).collect()))
            .collect(),
    );
    Ok(vec![
        Rule::propositional(cube, output_eq(0))?,
        Rule::propositional(Formula::And(vec![vertex.clone(), satisfied]), output_eq(1))?,
        Rule::propositional(Formula::And(vec![vertex, falsified]), output_eq(0))?,
    ])
}

/// Propositional rules forcing zero on `[v, v+1]` for every falsifying
/// vertex `v` and outside `[0,2]^n`. The set determines the network
/// (the zero function) iff `s` is unsatisfiable.
pub fn generate_exhaustiveness_instance(s: &CnfFormula) -> Result<Vec<Rule>> {
    let n = s.num_vars();
    let int = Rational::from_int;
    let interval = |var: usize, lo: i64| Formula::interval(n, var, int(lo), int(lo + 1));
    // A clause is falsified at v iff each literal is: positive x_j has
    // v_j = 0 and box coordinate [0,1]; negative has v_j = 1 and [1,2].
    let covered = Formula::Or(
        s.clauses()
            .iter()
            .map(|c| Formula::And(c.iter().map(|l| interval(l.var, i64::from(!l.positive))).collect()))
            .collect(),
    );
    let region = Formula::closed_box(&QVector::zeros(n), &QVector(vec![int(2); n]));
    let outside = Formula::Or(
        (0..n)
            .flat_map(|i| {
                [
                    Formula::Atom(LinearAtom::axis(n, i, Relation::Lt, int(0))),
                    Formula::Atom(LinearAtom::axis(n, i, Relation::Gt, int(2))),
                ]
            })
            .collect(),
    );
    Ok(vec![
        Rule::propositional(Formula::And(vec![region, covered]), output_eq(0))?,
        Rule::propositional(outside, output_eq(0))?,
    ])
}

/// The nonzero alternative for a satisfiable exhaustiveness instance: a
/// bump reaching 1 at the centre of `[v, v+1]` for a model `v`, vanishing
/// on every other unit box.
pub fn exhaustiveness_alternative(model: &[bool]) -> Result<Network> {
    let centre: QVector = model
        .iter()
        .map(|&b| Rational::from_int(i64::from(b)) + Rational::frac(1, 2))
        .collect();
    let region = BoxRegion::new(centre.clone(), centre)?;
    build_box_witness_with_margin(&[region], &[QVector::from_ints(&[1])], &Rational::frac(1, 4))
}

/// Minimum pairwise gap between regions; `None` for fewer than two.
pub fn separation(regions: &[BoxRegion]) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            let g = a.gap(b);
            best = Some(match best {
                Some(c) => c.min(g),
                None => g,
            });
        }
    }
    best
}

/// ReLU network equal to `values[k]` on `regions[k]` and zero wherever no
/// region is within half the separation. Continuous and piecewise linear.
pub fn build_box_witness(regions: &[BoxRegion], values: &[QVector]) -> Result<Network> {
    let margin = match separation(regions) {
        None => Rational::one(),
        Some(c) if c.is_positive() => &c * &Rational::frac(1, 2),
        Some(_) => return Err(Error::NotSeparated),
    };
    build_box_witness_with_margin(regions, values, &margin)
}

/// [`build_box_witness`] with an explicit bump margin `c'`; supports
/// vanish at distance `c'` from their region along any axis.
pub fn build_box_witness_with_margin(regions: &[BoxRegion], values: &[QVector], margin: &Rational) -> Result<Network> {
    let first = regions
        .first()
        .ok_or_else(|| Error::InvalidRule("box witness needs at least one region".into()))?;
    if regions.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: regions.len(),
            found: values.len(),
        });
    }
    if !margin.is_positive() {
        return Err(Error::NotSeparated);
    }
    let n = first.dim();
    let m = values[0].dim();
    for (r, v) in regions.iter().zip(values) {
        if r.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.dim(),
            });
        }
        if v.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.dim(),
            });
        }
    }
    let inv = margin.recip()?;
    let min = build_min_gadget(2 * n)?;
    let clamp = build_clamp_gadget();
    let mut bumps = Vec::with_capacity(regions.len());
    for r in regions {
        // (x_i - l_i + c')/c' and (u_i + c' - x_i)/c'.
        let mut w = QMatrix::zeros(2 * n, n);
        let mut b = QVector::zeros(2 * n);
        for i in 0..n {
            w[(2 * i, i)] = inv.clone();
            b[2 * i] = &(margin - &r.lower[i]) * &inv;
            w[(2 * i + 1, i)] = -&inv;
            b[2 * i + 1] = &(&r.upper[i] + margin) * &inv;
        }
        let terms = Network::affine(w, b)?;
        bumps.push(compose(&clamp, &compose(&min, &terms)?)?);
    }
    let all = side_by_side(&bumps)?;
    let mut mix = QMatrix::zeros(m, regions.len());
    for (k, v) in values.iter().enumerate() {
        for j in 0..m {
            mix[(j, k)] = v[j].clone();
        }
    }
    compose(&Network::affine(mix, QVector::zeros(m))?, &all)
}

/// A constant network obeys every monotonicity rule; returns the zero
/// network of the given shape.
pub fn monotonicity_set_consistency(rules: &[Rule], input_dim: usize, output_dim: usize) -> Result<Network> {
    for r in rules {
        if !r.is_monotonicity_kind() {
            return Err(Error::InvalidRule(format!(
                "expected monotonicity rules only, found {}",
                r.kind_name()
            )));
        }
        r.validate(input_dim, output_dim)?;
    }
    Ok(Network::constant(input_dim, QVector::zeros(output_dim)))
}

/// Monotonicity rule sets are never exhaustive: every constant obeys them.
pub fn monotonicity_set_exhaustive(rules: &[Rule]) -> Result<bool> {
    if let Some(r) = rules.iter().find(|r| !r.is_monotonicity_kind()) {
        return Err(Error::InvalidRule(format!(
            "expected monotonicity rules only, found {}",
            r.kind_name()
        )));
    }
    Ok(false)
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a LinearAtom>) -> bool {
    match f {
        Formula::True => true,
        Formula::Atom(a) => {
            out.push(a);
            true
        }
        Formula::And(gs) => gs.iter().all(|g| conjuncts(g, out)),
        _ => false,
    }
}

/// Per-coordinate bounds of a conjunction of non-strict paraxial atoms.
/// Input dimension with optional lower and upper bounds per coordinate.
type AxisBounds = (usize, Vec<Option<Rational>>, Vec<Option<Rational>>);

fn paraxial_bounds(f: &Formula) -> Option<AxisBounds> {
    let mut atoms = Vec::new();
    if !conjuncts(f, &mut atoms) || atoms.is_empty() {
        return None;
    }
    let n = atoms[0].coeffs.dim();
    let mut lo: Vec<Option<Rational>> = vec![None; n];
    let mut hi: Vec<Option<Rational>> = vec![None; n];
    for a in atoms {
        if a.coeffs.dim() != n || a.rel.is_strict() {
            return None;
        }
        let mut nz = (0..n).filter(|&i| !a.coeffs[i].is_zero());
        let (Some(i), None) = (nz.next(), nz.next()) else {
            return None;
        };
        let c = &a.coeffs[i];
        let v = a.constant.checked_div(c).ok()?;
        let (lower, upper) = match (a.rel, c.is_positive()) {
            (Relation::Eq, _) => (true, true),
            (Relation::Ge, true) | (Relation::Le, false) => (true, false),
            _ => (false, true),
        };
        if lower {
            lo[i] = Some(lo[i].take().map_or(v.clone(), |l| l.max(v.clone())));
        }
        if upper {
            hi[i] = Some(hi[i].take().map_or(v.clone(), |h| h.min(v.clone())));
        }
    }
    Some((n, lo, hi))
}

fn refuse() -> Error {
    Error::Unsupported(
        "witness construction needs rules of the form `closed box => N(x) = v` (non-strict axis-aligned \
         bounds on every input, an exact value for every output) or a set of monotonicity rules only"
            .into(),
    )
}

/// Regions and output values of a set of `box ⇒ N(x) = v` rules.
pub fn box_rules_to_regions(rules: &[Rule]) -> Result<(Vec<BoxRegion>, Vec<QVector>)> {
    let mut regions = Vec::new();
    let mut values = Vec::new();
    for r in rules {
        let (Rule::Propositional { cond, concl } | Rule::Oblique { cond, concl }) = r else {
            return Err(refuse());
        };
        let (_, lo, hi) = paraxial_bounds(cond).ok_or_else(refuse)?;
        let lower: Option<Vec<Rational>> = lo.into_iter().collect();
        let upper: Option<Vec<Rational>> = hi.into_iter().collect();
        let (Some(lower), Some(upper)) = (lower, upper) else {
            return Err(refuse());
        };
        let (_, vlo, vhi) = paraxial_bounds(concl).ok_or_else(refuse)?;
        let v: Option<Vec<Rational>> = vlo
            .into_iter()
            .zip(vhi)
            .map(|(a, b)| a.zip(b).filter(|(a, b)| a == b).map(|(a, _)| a))
            .collect();
        regions.push(BoxRegion::new(QVector(lower), QVector(upper))?);
        values.push(QVector(v.ok_or_else(refuse)?));
    }
    Ok((regions, values))
}

/// A network obeying `rules`: the box witness for `box ⇒ N(x) = v` sets,
/// the zero network for monotonicity sets. `output_dim` is needed only for
/// monotonicity sets and defaults to the largest class.
pub fn witness_for_rules(rules: &[Rule], output_dim: Option<usize>) -> Result<Network> {
    if !rules.is_empty() && rules.iter().all(Rule::is_monotonicity_kind) {
        let mut n = None;
        let mut m = 0;
        for r in rules {
            let (Rule::Monotonicity { a, class } | Rule::TotalMonotonicity { a, class }) = r else {
                unreachable!("filtered above");
            };
            if *n.get_or_insert(a.cols()) != a.cols() {
                return Err(Error::DimensionMismatch {
                    expected: n.unwrap_or(0),
                    found: a.cols(),
                });
            }
            m = m.max(class + 1);
        }
        return monotonicity_set_consistency(rules, n.unwrap_or(0), output_dim.unwrap_or(m));
    }
    let (regions, values) = box_rules_to_regions(rules)?;
    build_box_witness(&regions, &values)
}

/// `f(x) = x + shift · d(x) · e_1` with
/// `d(x) = min_i min(ReLU(x_i), ReLU(1 - x_i))`, which vanishes outside
/// the unit cube.
pub fn build_cube_perturbation(n: usize, shift: &Rational) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidNetwork("cube perturbation needs n >= 1".into()));
    }
    let mut w = QMatrix::zeros(2 * n, n);
    let mut b = QVector::zeros(2 * n);
    for i in 0..n {
        w[(2 * i, i)] = Rational::one();
        w[(2 * i + 1, i)] = -Rational::one();
        b[2 * i + 1] = Rational::one();
    }
    let distances = Network::new(n, vec![relu_layer(w, b)?], false, false)?;
    let d = compose(&build_min_gadget(2 * n)?, &distances)?;
    let carried = with_passthrough(&d, n)?;
    let dup = Network::affine(
        QMatrix::identity(n).vstack(&QMatrix::identity(n))?,
        QVector::zeros(2 * n),
    )?;
    let mut out = QMatrix::zeros(n, n + 1);
    out[(0, 0)] = shift.clone();
    for i in 0..n {
        out[(i, i + 1)] = Rational::one();
    }
    let shifted = compose(&Network::affine(out, QVector::zeros(n))?, &carried)?;
    compose(&shifted, &dup)
}

/// `net ∘ f` for the cube perturbation with shift 1/2: agrees with `net`
/// outside the unit cube and maps the centre to `net(3/4, 1/2, …)`.
pub fn perturb_network(net: &Network) -> Result<Network> {
    compose(net, &build_cube_perturbation(net.input_dim(), &Rational::frac(1, 2))?)
}
