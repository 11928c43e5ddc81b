//! Layered feedforward networks with ReLU, Heaviside and identity layers.
//!
//! Heaviside is `H(z) = 1` iff `z >= 0`. With that convention `NOT x` is
//! `H(-x)` with bias 0, which keeps Boolean networks inside the
//! `{-1, 0, 1}` weight alphabet.

use serde::{Deserialize, Serialize};

use crate::arith::{QMatrix, QVector, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Heaviside,
    Identity,
}

impl Activation {
    pub fn apply(self, z: &Rational) -> Rational {
        match self {
            Activation::Relu => z.relu(),
            Activation::Heaviside => {
                if z.is_negative() {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            }
            Activation::Identity => z.clone(),
        }
    }

    pub fn is_nonlinear(self) -> bool {
        !matches!(self, Activation::Identity)
    }
}

/// One affine map followed by an elementwise activation. Row `i` of
/// `weights` holds the incoming weights of node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub weights: QMatrix,
    pub biases: QVector,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: QMatrix, biases: QVector, activation: Activation) -> Result<Self> {
        if weights.rows() != biases.dim() {
            return Err(Error::InvalidNetwork(format!(
                "layer has {} weight rows but {} biases",
                weights.rows(),
                biases.dim()
            )));
        }
        Ok(Layer {
            weights,
            biases,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn pre_activation(&self, x: &QVector) -> Result<QVector> {
        let mut z = self.weights.mat_vec(x)?;
        for (zi, b) in z.0.iter_mut().zip(self.biases.iter()) {
            *zi += b;
        }
        Ok(z)
    }

    pub fn forward(&self, x: &QVector) -> Result<QVector> {
        let z = self.pre_activation(x)?;
        Ok(z.iter().map(|v| self.activation.apply(v)).collect())
    }
}

/// Pre- and post-activation values of every layer for one input.
#[derive(Debug, Clone)]
pub struct Trace {
    pub pre: Vec<QVector>,
    pub post: Vec<QVector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
    classifying: bool,
    boolean: bool,
}

/// Position of a ReLU or Heaviside node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub layer: usize,
    pub node: usize,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>, classifying: bool, boolean: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        let mut prev = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            if layer.in_dim() != prev {
                return Err(Error::InvalidNetwork(format!(
                    "layer {l} expects {} inputs but previous width is {prev}",
                    layer.in_dim()
                )));
            }
            prev = layer.out_dim();
        }
        if prev == 0 {
            return Err(Error::InvalidNetwork("output layer is empty".into()));
        }
        let net = Network {
            input_dim,
            layers,
            classifying,
            boolean,
        };
        if boolean {
            net.check_boolean()?;
        }
        Ok(net)
    }

    fn check_boolean(&self) -> Result<()> {
        let unit = |r: &Rational| *r == Rational::zero() || *r == Rational::one() || *r == -Rational::one();
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.activation != Activation::Heaviside {
                return Err(Error::InvalidNetwork(format!(
                    "boolean network layer {l} is not heaviside"
                )));
            }
            let weights_ok = (0..layer.out_dim()).all(|i| layer.weights.row(i).iter().all(unit));
            if !weights_ok || !layer.biases.iter().all(unit) {
                return Err(Error::InvalidNetwork(format!(
                    "boolean network layer {l} has a weight or bias outside {{-1,0,1}}"
                )));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn is_classifying(&self) -> bool {
        self.classifying
    }

    pub fn is_boolean(&self) -> bool {
        self.boolean
    }

    pub fn with_classifying(mut self, classifying: bool) -> Self {
        self.classifying = classifying;
        self
    }

    /// Nonlinear nodes in layer order.
    pub fn nonlinear_nodes(&self) -> Vec<NodeId> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.activation.is_nonlinear())
            .flat_map(|(li, l)| (0..l.out_dim()).map(move |node| NodeId { layer: li, node }))
            .collect()
    }

    pub fn trace(&self, x: &QVector) -> Result<Trace> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.dim(),
            });
        }
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for layer in &self.layers {
            let z = layer.pre_activation(&cur)?;
            cur = z.iter().map(|v| layer.activation.apply(v)).collect();
            pre.push(z);
            post.push(cur.clone());
        }
        Ok(Trace { pre, post })
    }

    /// Output layer values before any argmax.
    pub fn raw_output(&self, x: &QVector) -> Result<QVector> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.dim(),
            });
        }
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward(&cur)?;
        }
        Ok(cur)
    }

    /// `N(x)`: the raw output, or for classifying networks the 0/1 vector
    /// marking every entry that is at least as big as all others.
    pub fn evaluate(&self, x: &QVector) -> Result<QVector> {
        let raw = self.raw_output(x)?;
        Ok(if self.classifying { argmax_indicator(&raw) } else { raw })
    }

    /// Single-layer identity network on `n` inputs.
    pub fn identity(n: usize) -> Network {
        Network::affine(QMatrix::identity(n), QVector::zeros(n)).expect("square identity")
    }

    /// Single identity-activated layer computing `Wx + b`.
    pub fn affine(weights: QMatrix, biases: QVector) -> Result<Network> {
        let n = weights.cols();
        Network::new(
            n,
            vec![Layer::new(weights, biases, Activation::Identity)?],
            false,
            false,
        )
    }

    /// Network on `n` inputs that ignores them and returns `values`.
    pub fn constant(n: usize, values: QVector) -> Network {
        let m = values.dim();
        Network::affine(QMatrix::zeros(m, n), values).expect("consistent shapes")
    }

    /// Keeps only output `i` of the last layer.
    pub fn slice_output(&self, i: usize) -> Result<Network> {
        if i >= self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: i + 1,
            });
        }
        let mut layers = self.layers.clone();
        let last = layers.last_mut().expect("nonempty");
        let row = last.weights.row(i).to_vec();
        let cols = last.weights.cols();
        last.weights = QMatrix::from_rows(vec![row], cols)?;
        last.biases = QVector(vec![last.biases[i].clone()]);
        Network::new(self.input_dim, layers, false, self.boolean)
    }

    /// Merges every identity layer that has a successor into that
    /// successor. The function computed is unchanged.
    pub fn fuse_identity_layers(self) -> Network {
        let Network {
            input_dim,
            layers,
            classifying,
            boolean,
        } = self;
        let mut out: Vec<Layer> = Vec::with_capacity(layers.len());
        let mut pending: Option<Layer> = None;
        for layer in layers {
            let layer = match pending.take() {
                Some(id) => fuse_pair(&id, &layer),
                None => layer,
            };
            if layer.activation == Activation::Identity {
                pending = Some(layer);
            } else {
                out.push(layer);
            }
        }
        if let Some(id) = pending {
            out.push(id);
        }
        Network {
            input_dim,
            layers: out,
            classifying,
            boolean,
        }
    }
}

/// `next ∘ id` where `id` is an identity layer.
fn fuse_pair(id: &Layer, next: &Layer) -> Layer {
    let weights = next.weights.mat_mul(&id.weights).expect("chained shapes");
    let shifted = next.weights.mat_vec(&id.biases).expect("chained shapes");
    let biases = shifted.iter().zip(next.biases.iter()).map(|(a, b)| a + b).collect();
    Layer {
        weights,
        biases,
        activation: next.activation,
    }
}

pub fn argmax_indicator(raw: &QVector) -> QVector {
    let Some(best) = raw.iter().max() else {
        return QVector::default();
    };
    raw.iter()
        .map(|v| if v == best { Rational::one() } else { Rational::zero() })
        .collect()
}

/// `f(x) = ReLU(ReLU(x) - ReLU(x - 1))`: 0 below 0, identity on [0,1],
/// 1 above 1.
pub fn build_clamp_gadget() -> Network {
    let l1 = Layer::new(
        QMatrix::from_int_rows(&[&[1], &[1]]),
        QVector::from_ints(&[0, -1]),
        Activation::Relu,
    )
    .expect("shapes");
    let l2 = Layer::new(
        QMatrix::from_int_rows(&[&[1, -1]]),
        QVector::from_ints(&[0]),
        Activation::Relu,
    )
    .expect("shapes");
    Network::new(1, vec![l1, l2], false, false).expect("shapes")
}

/// k-ary minimum as a balanced tree of
/// `min(a,b) = (a+b)/2 - ReLU((a-b)/2) - ReLU((b-a)/2)`.
///
/// Odd levels pair the last value with itself. The last layer is identity.
pub fn build_min_gadget(k: usize) -> Result<Network> {
    if k < 2 {
        return Err(Error::InvalidNetwork(format!("min gadget needs arity >= 2, got {k}")));
    }
    let half = Rational::frac(1, 2);
    let mut layers = Vec::new();
    let mut width = k;
    while width > 1 {
        let pairs = width.div_ceil(2);
        let mut relu = QMatrix::zeros(4 * pairs, width);
        let mut comb = QMatrix::zeros(pairs, 4 * pairs);
        for p in 0..pairs {
            let a = 2 * p;
            let b = (2 * p + 1).min(width - 1);
            // a+b, -(a+b), a-b, b-a; when a == b the entries accumulate.
            for (row, ca, cb) in [(0, 1, 1), (1, -1, -1), (2, 1, -1), (3, -1, 1)] {
                relu[(4 * p + row, a)] += &Rational::from_int(ca);
                relu[(4 * p + row, b)] += &Rational::from_int(cb);
            }
            comb[(p, 4 * p)] = half.clone();
            comb[(p, 4 * p + 1)] = -&half;
            comb[(p, 4 * p + 2)] = -&half;
            comb[(p, 4 * p + 3)] = -&half;
        }
        layers.push(Layer::new(relu, QVector::zeros(4 * pairs), Activation::Relu)?);
        layers.push(Layer::new(comb, QVector::zeros(pairs), Activation::Identity)?);
        width = pairs;
    }
    Ok(Network::new(k, layers, false, false)?.fuse_identity_layers())
}

/// Two independent copies of `net`: `(x, y) ↦ (N(x), N(y))`.
pub fn parallel_product(net: &Network) -> Result<Network> {
    if net.is_classifying() {
        return Err(Error::Unsupported(
            "parallel product is defined on raw outputs; network is classifying".into(),
        ));
    }
    let layers = net
        .layers()
        .iter()
        .map(|l| Layer {
            weights: l.weights.block_diag(&l.weights),
            biases: l.biases.concat(&l.biases),
            activation: l.activation,
        })
        .collect();
    Network::new(2 * net.input_dim(), layers, false, net.is_boolean())
}

/// `outer ∘ inner` as one flat layered network.
pub fn compose(outer: &Network, inner: &Network) -> Result<Network> {
    if inner.output_dim() != outer.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.input_dim(),
            found: inner.output_dim(),
        });
    }
    if inner.is_classifying() {
        return Err(Error::Unsupported(
            "inner network of a composition is classifying".into(),
        ));
    }
    let mut layers = inner.layers().to_vec();
    layers.extend(outer.layers().iter().cloned());
    let boolean = inner.is_boolean() && outer.is_boolean();
    Ok(Network::new(inner.input_dim(), layers, outer.is_classifying(), boolean)?.fuse_identity_layers())
}

/// Runs `nets` on the same input and concatenates their outputs. All nets
/// must have the same depth and the same activation at each depth.
pub fn side_by_side(nets: &[Network]) -> Result<Network> {
    let first = nets
        .first()
        .ok_or_else(|| Error::InvalidNetwork("side_by_side of zero networks".into()))?;
    let n = first.input_dim();
    let depth = first.layers().len();
    for net in nets {
        if net.input_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: net.input_dim(),
            });
        }
        let same_shape = net.layers().len() == depth
            && net
                .layers()
                .iter()
                .zip(first.layers())
                .all(|(a, b)| a.activation == b.activation);
        if !same_shape {
            return Err(Error::InvalidNetwork(
                "side_by_side needs identically shaped networks".into(),
            ));
        }
    }
    let mut layers = Vec::with_capacity(depth);
    for d in 0..depth {
        let mut it = nets.iter().map(|net| &net.layers()[d]);
        let head = it.next().expect("nonempty");
        let mut weights = head.weights.clone();
        let mut biases = head.biases.clone();
        for l in it {
            weights = if d == 0 {
                weights.vstack(&l.weights)?
            } else {
                weights.block_diag(&l.weights)
            };
            biases = biases.concat(&l.biases);
        }
        layers.push(Layer::new(weights, biases, head.activation)?);
    }
    Network::new(n, layers, false, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> QVector {
        QVector::parse(items).unwrap()
    }

    fn relu_unit() -> Network {
        Network::new(
            1,
            vec![Layer::new(
                QMatrix::from_int_rows(&[&[1]]),
                QVector::from_ints(&[0]),
                Activation::Relu,
            )
            .unwrap()],
            false,
            false,
        )
        .unwrap()
    }

    #[test]
    fn relu_single_node() {
        let net = relu_unit();
        assert_eq!(net.evaluate(&v(&["-2"])).unwrap(), v(&["0"]));
        assert_eq!(net.evaluate(&v(&["3/2"])).unwrap(), v(&["3/2"]));
        assert!(matches!(
            net.evaluate(&v(&["1", "2"])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classifying_tie_marks_both() {
        let net = Network::constant(1, v(&["2", "2"])).with_classifying(true);
        assert_eq!(net.evaluate(&v(&["0"])).unwrap(), v(&["1", "1"]));
        let net = Network::constant(1, v(&["1", "2"])).with_classifying(true);
        assert_eq!(net.evaluate(&v(&["0"])).unwrap(), v(&["0", "1"]));
    }

    #[test]
    fn clamp_examples() {
        let c = build_clamp_gadget();
        assert_eq!(c.evaluate(&v(&["-5"])).unwrap(), v(&["0"]));
        assert_eq!(c.evaluate(&v(&["1/3"])).unwrap(), v(&["1/3"]));
        assert_eq!(c.evaluate(&v(&["7"])).unwrap(), v(&["1"]));
    }

    #[test]
    fn min_examples() {
        let m2 = build_min_gadget(2).unwrap();
        assert_eq!(m2.evaluate(&v(&["2", "5"])).unwrap(), v(&["2"]));
        assert_eq!(m2.evaluate(&v(&["-1", "-1"])).unwrap(), v(&["-1"]));
        let m4 = build_min_gadget(4).unwrap();
        assert_eq!(m4.evaluate(&v(&["3", "1", "2", "0"])).unwrap(), v(&["0"]));
        let m3 = build_min_gadget(3).unwrap();
        assert_eq!(m3.evaluate(&v(&["3", "-7/2", "2"])).unwrap(), v(&["-7/2"]));
        assert!(build_min_gadget(1).is_err());
        // identity layers between ReLU levels are fused away
        assert!(m4.layers()[..m4.layers().len() - 1]
            .iter()
            .all(|l| l.activation == Activation::Relu));
    }

    #[test]
    fn product_and_compose() {
        let c = build_clamp_gadget();
        let p = parallel_product(&c).unwrap();
        assert_eq!(p.layers().len(), c.layers().len());
        assert_eq!(p.input_dim(), 2);
        assert_eq!(p.evaluate(&v(&["-1", "1/2"])).unwrap(), v(&["0", "1/2"]));
        assert!(parallel_product(&c.clone().with_classifying(true)).is_err());

        let cc = compose(&c, &c).unwrap();
        assert_eq!(cc.evaluate(&v(&["5/7"])).unwrap(), v(&["5/7"]));
        let ci = compose(&c, &Network::identity(1)).unwrap();
        assert_eq!(ci.evaluate(&v(&["2"])).unwrap(), v(&["1"]));
        assert!(compose(&c, &Network::identity(2)).is_err());
    }

    #[test]
    fn boolean_invariant_enforced() {
        let layer = Layer::new(
            QMatrix::from_int_rows(&[&[2]]),
            QVector::from_ints(&[0]),
            Activation::Heaviside,
        )
        .unwrap();
        assert!(Network::new(1, vec![layer], false, true).is_err());
        let layer = Layer::new(
            QMatrix::from_int_rows(&[&[1]]),
            QVector::from_ints(&[0]),
            Activation::Relu,
        )
        .unwrap();
        assert!(Network::new(1, vec![layer], false, true).is_err());
    }
}
