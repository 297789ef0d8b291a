//! Layers used by the topic and sentence nets: GRU cells, dense layers and
//! embedding tables. Each layer is a descriptor naming its parameters inside
//! a [`ParamStore`]; evaluation goes through a [`Binder`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Var;
use crate::error::{Error, Result};
use crate::params::{Binder, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Sigmoid,
    Tanh,
    Selu,
    Softmax,
}

impl Activation {
    pub fn apply<'t>(self, x: Var<'t>) -> Var<'t> {
        match self {
            Activation::Identity => x,
            Activation::Sigmoid => x.sigmoid(),
            Activation::Tanh => x.tanh(),
            Activation::Selu => x.selu(),
            Activation::Softmax => x.softmax(),
        }
    }
}

fn check_len(what: &str, x: &Var<'_>, expected: usize) -> Result<()> {
    let got = x.numel();
    if got != expected {
        return Err(Error::contract(format!(
            "{what}: expected length {expected}, got {got}"
        )));
    }
    Ok(())
}

/// `activation(W x + b)` with `W: [output, input]`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub name: String,
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
}

impl Dense {
    pub fn new(name: impl Into<String>, input: usize, output: usize, activation: Activation) -> Self {
        Dense {
            name: name.into(),
            input,
            output,
            activation,
        }
    }

    pub fn weight_name(&self) -> String {
        format!("{}.weight", self.name)
    }

    pub fn bias_name(&self) -> String {
        format!("{}.bias", self.name)
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        store.init_uniform(self.weight_name(), &[self.output, self.input], self.input, rng);
        store.init_zeros(self.bias_name(), &[self.output]);
    }

    /// `W x + b` before the activation.
    pub fn pre_activation<'t>(&self, b: &Binder<'t, '_>, x: Var<'t>) -> Result<Var<'t>> {
        check_len(&self.name, &x, self.input)?;
        let w = b.get(&self.weight_name());
        let bias = b.get(&self.bias_name());
        Ok(w.matvec(x) + bias)
    }

    pub fn forward<'t>(&self, b: &Binder<'t, '_>, x: Var<'t>) -> Result<Var<'t>> {
        Ok(self.activation.apply(self.pre_activation(b, x)?))
    }
}

/// Single GRU cell:
///
/// ```text
/// r  = σ(W_r x + U_r h + b_r)
/// z  = σ(W_z x + U_z h + b_z)
/// h~ = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h~
/// ```
#[derive(Debug, Clone)]
pub struct Gru {
    pub name: String,
    pub input: usize,
    pub hidden: usize,
}

pub const GRU_GATES: [&str; 3] = ["r", "z", "h"];

impl Gru {
    pub fn new(name: impl Into<String>, input: usize, hidden: usize) -> Self {
        Gru {
            name: name.into(),
            input,
            hidden,
        }
    }

    pub fn w(&self, gate: &str) -> String {
        format!("{}.w_{gate}", self.name)
    }

    pub fn u(&self, gate: &str) -> String {
        format!("{}.u_{gate}", self.name)
    }

    pub fn b(&self, gate: &str) -> String {
        format!("{}.b_{gate}", self.name)
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        for gate in GRU_GATES {
            store.init_uniform(self.w(gate), &[self.hidden, self.input], self.input, rng);
            store.init_uniform(self.u(gate), &[self.hidden, self.hidden], self.hidden, rng);
            store.init_zeros(self.b(gate), &[self.hidden]);
        }
    }

    pub fn step<'t>(&self, b: &Binder<'t, '_>, x: Var<'t>, h: Var<'t>) -> Result<Var<'t>> {
        check_len(&format!("{} input", self.name), &x, self.input)?;
        check_len(&format!("{} hidden", self.name), &h, self.hidden)?;
        let gate = |g: &str, hh: Var<'t>| b.get(&self.w(g)).matvec(x) + b.get(&self.u(g)).matvec(hh) + b.get(&self.b(g));
        let r = gate("r", h).sigmoid();
        let z = gate("z", h).sigmoid();
        let candidate = gate("h", r * h).tanh();
        // h + z ⊙ (h~ − h)
        Ok(h + z * (candidate - h))
    }
}

/// Lookup table with one row per id.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub name: String,
    pub rows: usize,
    pub width: usize,
}

impl Embedding {
    pub fn new(name: impl Into<String>, rows: usize, width: usize) -> Self {
        Embedding {
            name: name.into(),
            rows,
            width,
        }
    }

    pub fn table_name(&self) -> String {
        format!("{}.table", self.name)
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        store.init_uniform(self.table_name(), &[self.rows, self.width], self.width, rng);
    }

    pub fn lookup<'t>(&self, b: &Binder<'t, '_>, id: usize) -> Result<Var<'t>> {
        if id >= self.rows {
            return Err(Error::TokenOutOfRange {
                id,
                size: self.rows,
            });
        }
        Ok(b.get(&self.table_name()).row(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{selu, sigmoid, Tape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_gru(w: f64, b_z: f64) -> (Gru, ParamStore) {
        let gru = Gru::new("g", 1, 1);
        let mut store = ParamStore::new();
        gru.init(&mut store, &mut ChaCha8Rng::seed_from_u64(0));
        for gate in GRU_GATES {
            store.fill(&gru.w(gate), w).unwrap();
            store.fill(&gru.u(gate), w).unwrap();
        }
        store.fill(&gru.b("z"), b_z).unwrap();
        (gru, store)
    }

    #[test]
    fn gru_zero_params_zero_hidden_stays_zero() {
        let (gru, store) = scalar_gru(0.0, 0.0);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let h = gru.step(&b, tape.vector(vec![3.7]), tape.zeros(1)).unwrap();
        assert_eq!(h.to_vec(), vec![0.0]);
    }

    #[test]
    fn gru_closed_update_gate_keeps_hidden() {
        let (gru, mut store) = scalar_gru(0.0, -1e6);
        store.fill(&gru.w("h"), 2.0).unwrap();
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let h = gru.step(&b, tape.vector(vec![5.0]), tape.vector(vec![0.3])).unwrap();
        assert_eq!(h.to_vec(), vec![0.3]);
    }

    #[test]
    fn gru_scalar_hand_evaluation() {
        let (gru, store) = scalar_gru(1.0, 0.0);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let h = gru.step(&b, tape.vector(vec![1.0]), tape.zeros(1)).unwrap().item();
        let z = sigmoid(1.0);
        let expected = z * 1f64.tanh();
        assert!((z - 0.731059).abs() < 1e-6);
        assert!((1f64.tanh() - 0.761594).abs() < 1e-6);
        assert!((h - expected).abs() < 1e-15);
        assert!((h - 0.556_768).abs() < 1e-5, "{h}");
    }

    #[test]
    fn gru_rejects_wrong_dims() {
        let (gru, store) = scalar_gru(1.0, 0.0);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        assert!(gru.step(&b, tape.vector(vec![1.0, 2.0]), tape.zeros(1)).is_err());
        assert!(gru.step(&b, tape.vector(vec![1.0]), tape.zeros(2)).is_err());
    }

    #[test]
    fn selu_reference_values() {
        assert_eq!(selu(0.0), 0.0);
        assert_eq!(selu(1.0), 1.050_700_987_355_480_5);
        assert!((selu(-1.0) - (-1.111_330)).abs() < 1e-6);
    }

    #[test]
    fn selu_continuous_and_monotone_on_grid() {
        let grid: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
        for w in grid.windows(2) {
            assert!(selu(w[1]) > selu(w[0]));
        }
        assert!((selu(1e-12) - selu(-1e-12)).abs() < 1e-11);
    }

    fn dense_with(act: Activation, w: Vec<f64>, out: usize, inp: usize) -> (Dense, ParamStore) {
        let d = Dense::new("d", inp, out, act);
        let mut store = ParamStore::new();
        d.init(&mut store, &mut ChaCha8Rng::seed_from_u64(1));
        store.set(&d.weight_name(), w).unwrap();
        (d, store)
    }

    #[test]
    fn dense_identity_with_identity_weights() {
        let (d, store) = dense_with(Activation::Identity, vec![1.0, 0.0, 0.0, 1.0], 2, 2);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let y = d.forward(&b, tape.vector(vec![0.25, -4.0])).unwrap();
        assert_eq!(y.to_vec(), vec![0.25, -4.0]);
    }

    #[test]
    fn dense_softmax_symmetric() {
        let (d, store) = dense_with(Activation::Softmax, vec![0.0; 4], 2, 2);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let y = d.forward(&b, tape.vector(vec![0.0, 0.0])).unwrap();
        assert_eq!(y.to_vec(), vec![0.5, 0.5]);
    }

    #[test]
    fn dense_sigmoid_at_zero() {
        let (d, store) = dense_with(Activation::Sigmoid, vec![1.0], 1, 1);
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        let y = d.forward(&b, tape.vector(vec![0.0])).unwrap();
        assert_eq!(y.to_vec(), vec![0.5]);
        assert!(d.forward(&b, tape.vector(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn embedding_out_of_range() {
        let e = Embedding::new("e", 5, 3);
        let mut store = ParamStore::new();
        e.init(&mut store, &mut ChaCha8Rng::seed_from_u64(2));
        let tape = Tape::new();
        let b = Binder::new(&tape, &store);
        assert_eq!(e.lookup(&b, 4).unwrap().numel(), 3);
        assert!(matches!(e.lookup(&b, 5), Err(Error::TokenOutOfRange { .. })));
    }
}
