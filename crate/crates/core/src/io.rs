//! JSON file formats for networks, rules, counterexamples and certificates.
//!
//! Rationals are always JSON strings (`"p/q"` or `"p"`), never numbers.
//! Class indices in rule files are 1-based.

use serde::{Deserialize, Serialize};

use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::network::{Activation, Layer, Network};
use crate::rule::{Cmp, Formula, LinearAtom, Relation, Rule, Witness};
use crate::verify::{Certificate, NodePhase};

fn parse_error(e: serde_json::Error) -> Error {
    Error::Format(format!("line {}, column {}: {e}", e.line(), e.column()))
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_error)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn matrix_from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<QMatrix> {
    QMatrix::from_rows(rows, cols)
}

fn matrix_rows(m: &QMatrix) -> Vec<Vec<Rational>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    activation: String,
    weights: Vec<Vec<Rational>>,
    biases: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    input_dim: usize,
    #[serde(default)]
    classifying: bool,
    #[serde(default)]
    boolean: bool,
    layers: Vec<LayerFile>,
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Relu => "relu",
        Activation::Heaviside => "heaviside",
        Activation::Identity => "identity",
    }
}

pub fn network_to_json(net: &Network) -> String {
    let file = NetworkFile {
        input_dim: net.input_dim(),
        classifying: net.is_classifying(),
        boolean: net.is_boolean(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerFile {
                activation: activation_name(l.activation).into(),
                weights: matrix_rows(&l.weights),
                biases: l.biases.0.clone(),
            })
            .collect(),
    };
    to_json(&file)
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let file: NetworkFile = from_json(text)?;
    let mut layers = Vec::with_capacity(file.layers.len());
    let mut width = file.input_dim;
    for (k, l) in file.layers.into_iter().enumerate() {
        let at = |e: Error| Error::InvalidNetwork(format!("layer {k}: {e}"));
        let activation = match l.activation.as_str() {
            "relu" => Activation::Relu,
            "heaviside" => Activation::Heaviside,
            "identity" => Activation::Identity,
            other => return Err(at(Error::Format(format!("unknown activation {other:?}")))),
        };
        let out = l.weights.len();
        let weights = matrix_from_rows(l.weights, width).map_err(at)?;
        layers.push(Layer::new(weights, QVector(l.biases), activation).map_err(at)?);
        width = out;
    }
    Network::new(file.input_dim, layers, file.classifying, file.boolean)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
enum FormulaFile {
    True,
    False,
    Atom {
        coeffs: Vec<Rational>,
        rel: String,
        #[serde(rename = "const")]
        constant: Rational,
    },
    Not {
        arg: Box<FormulaFile>,
    },
    And {
        args: Vec<FormulaFile>,
    },
    Or {
        args: Vec<FormulaFile>,
    },
}

impl FormulaFile {
    fn from_formula(f: &Formula) -> Self {
        match f {
            Formula::True => FormulaFile::True,
            Formula::False => FormulaFile::False,
            Formula::Atom(a) => FormulaFile::Atom {
                coeffs: a.coeffs.0.clone(),
                rel: a.rel.symbol().into(),
                constant: a.constant.clone(),
            },
            Formula::Not(g) => FormulaFile::Not {
                arg: Box::new(FormulaFile::from_formula(g)),
            },
            Formula::And(gs) => FormulaFile::And {
                args: gs.iter().map(FormulaFile::from_formula).collect(),
            },
            Formula::Or(gs) => FormulaFile::Or {
                args: gs.iter().map(FormulaFile::from_formula).collect(),
            },
        }
    }

    fn into_formula(self) -> Result<Formula> {
        let all = |gs: Vec<FormulaFile>| {
            gs.into_iter()
                .map(FormulaFile::into_formula)
                .collect::<Result<Vec<_>>>()
        };
        Ok(match self {
            FormulaFile::True => Formula::True,
            FormulaFile::False => Formula::False,
            FormulaFile::Atom { coeffs, rel, constant } => {
                let rel = Relation::from_symbol(&rel)
                    .ok_or_else(|| Error::InvalidFormula(format!("unknown relation {rel:?}")))?;
                Formula::Atom(LinearAtom::new(QVector(coeffs), rel, constant))
            }
            FormulaFile::Not { arg } => Formula::Not(Box::new(arg.into_formula()?)),
            FormulaFile::And { args } => Formula::And(all(args)?),
            FormulaFile::Or { args } => Formula::Or(all(args)?),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RuleFile {
    Propositional {
        cond: FormulaFile,
        concl: FormulaFile,
    },
    Oblique {
        cond: FormulaFile,
        concl: FormulaFile,
    },
    Mofn {
        parts: Vec<FormulaFile>,
        cmp: String,
        r: usize,
        concl: FormulaFile,
    },
    Monotonicity {
        #[serde(rename = "A")]
        a: Vec<Vec<Rational>>,
        i: usize,
    },
    TotalMonotonicity {
        #[serde(rename = "A")]
        a: Vec<Vec<Rational>>,
        i: usize,
    },
}

impl RuleFile {
    fn from_rule(r: &Rule) -> Self {
        let f = FormulaFile::from_formula;
        match r {
            Rule::Propositional { cond, concl } => RuleFile::Propositional {
                cond: f(cond),
                concl: f(concl),
            },
            Rule::Oblique { cond, concl } => RuleFile::Oblique {
                cond: f(cond),
                concl: f(concl),
            },
            Rule::MofN { parts, cmp, r, concl } => RuleFile::Mofn {
                parts: parts.iter().map(f).collect(),
                cmp: cmp.symbol().into(),
                r: *r,
                concl: f(concl),
            },
            Rule::Monotonicity { a, class } => RuleFile::Monotonicity {
                a: matrix_rows(a),
                i: class + 1,
            },
            Rule::TotalMonotonicity { a, class } => RuleFile::TotalMonotonicity {
                a: matrix_rows(a),
                i: class + 1,
            },
        }
    }

    fn into_rule(self) -> Result<Rule> {
        let order = |a: Vec<Vec<Rational>>, i: usize| -> Result<(QMatrix, usize)> {
            if i == 0 {
                return Err(Error::InvalidRule("class index \"i\" is 1-based".into()));
            }
            let cols = a.first().map_or(0, Vec::len);
            Ok((matrix_from_rows(a, cols)?, i - 1))
        };
        Ok(match self {
            RuleFile::Propositional { cond, concl } => {
                Rule::propositional(cond.into_formula()?, concl.into_formula()?)?
            }
            RuleFile::Oblique { cond, concl } => Rule::oblique(cond.into_formula()?, concl.into_formula()?),
            RuleFile::Mofn { parts, cmp, r, concl } => Rule::MofN {
                parts: parts
                    .into_iter()
                    .map(FormulaFile::into_formula)
                    .collect::<Result<_>>()?,
                cmp: Cmp::from_symbol(&cmp).ok_or_else(|| Error::InvalidRule(format!("unknown comparator {cmp:?}")))?,
                r,
                concl: concl.into_formula()?,
            },
            RuleFile::Monotonicity { a, i } => {
                let (a, class) = order(a, i)?;
                Rule::Monotonicity { a, class }
            }
            RuleFile::TotalMonotonicity { a, i } => {
                let (a, class) = order(a, i)?;
                Rule::TotalMonotonicity { a, class }
            }
        })
    }
}

pub fn rules_to_json(rules: &[Rule]) -> String {
    to_json(&rules.iter().map(RuleFile::from_rule).collect::<Vec<_>>())
}

/// Parses a JSON array of rules; a single rule object is also accepted.
pub fn rules_from_json(text: &str) -> Result<Vec<Rule>> {
    let value: serde_json::Value = from_json(text)?;
    // Typed parses go through the text again so errors keep positions.
    let files = if value.is_array() {
        from_json::<Vec<RuleFile>>(text)?
    } else {
        vec![from_json::<RuleFile>(text)?]
    };
    files
        .into_iter()
        .enumerate()
        .map(|(k, r)| r.into_rule().map_err(|e| Error::InvalidRule(format!("rule {k}: {e}"))))
        .collect()
}

/// A failing rule together with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub rule_index: usize,
    pub witness: Witness,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleFile {
    rule_index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    witness: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    witness_x: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    witness_y: Option<Vec<Rational>>,
}

impl CounterexampleFile {
    fn from_cex(c: &Counterexample) -> Self {
        let (witness, witness_x, witness_y) = match &c.witness {
            Witness::Point(x) => (Some(x.0.clone()), None, None),
            Witness::Pair(x, y) => (None, Some(x.0.clone()), Some(y.0.clone())),
        };
        CounterexampleFile {
            rule_index: c.rule_index,
            witness,
            witness_x,
            witness_y,
        }
    }

    fn into_cex(self) -> Result<Counterexample> {
        let witness = match (self.witness, self.witness_x, self.witness_y) {
            (Some(x), None, None) => Witness::Point(QVector(x)),
            (None, Some(x), Some(y)) => Witness::Pair(QVector(x), QVector(y)),
            _ => {
                return Err(Error::Format(
                    "counterexample needs \"witness\" or both \"witness_x\" and \"witness_y\"".into(),
                ))
            }
        };
        Ok(Counterexample {
            rule_index: self.rule_index,
            witness,
        })
    }
}

/// Counterexamples are written as a JSON array, one object per failing rule.
pub fn counterexamples_to_json(cexs: &[Counterexample]) -> String {
    to_json(&cexs.iter().map(CounterexampleFile::from_cex).collect::<Vec<_>>())
}

/// Parses an array of counterexamples, or a single object.
pub fn counterexamples_from_json(text: &str) -> Result<Vec<Counterexample>> {
    let value: serde_json::Value = from_json(text)?;
    let files = if value.is_array() {
        from_json::<Vec<CounterexampleFile>>(text)?
    } else {
        vec![from_json::<CounterexampleFile>(text)?]
    };
    files.into_iter().map(CounterexampleFile::into_cex).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    #[serde(default)]
    mofn_bits: Option<Vec<bool>>,
    /// `"active"` or `"inactive"` per nonlinear node, in layer order.
    phases: Vec<String>,
    input_halfspaces: Vec<bool>,
    output_halfspaces: Vec<bool>,
    #[serde(default)]
    output_pattern: Option<Vec<bool>>,
}

pub fn certificate_to_json(c: &Certificate) -> String {
    let file = CertificateFile {
        mofn_bits: c.mofn_bits.clone(),
        phases: c
            .phases
            .iter()
            .map(|p| match p {
                NodePhase::Active => "active".to_string(),
                NodePhase::Inactive => "inactive".to_string(),
            })
            .collect(),
        input_halfspaces: c.input_halfspaces.clone(),
        output_halfspaces: c.output_halfspaces.clone(),
        output_pattern: c.output_pattern.clone(),
    };
    to_json(&file)
}

pub fn certificate_from_json(text: &str) -> Result<Certificate> {
    let file: CertificateFile = from_json(text)?;
    let phases = file
        .phases
        .iter()
        .map(|p| match p.as_str() {
            "active" => Ok(NodePhase::Active),
            "inactive" => Ok(NodePhase::Inactive),
            other => Err(Error::Format(format!("unknown phase {other:?}"))),
        })
        .collect::<Result<_>>()?;
    Ok(Certificate {
        mofn_bits: file.mofn_bits,
        phases,
        input_halfspaces: file.input_halfspaces,
        output_halfspaces: file.output_halfspaces,
        output_pattern: file.output_pattern,
    })
}

/// Parses a whitespace- or comma-separated list of rationals.
pub fn parse_vector(text: &str) -> Result<QVector> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Rational>>>()
        .map(QVector)
}
