//! Named parameter storage and its binding onto a tape.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::autodiff::{Gradients, Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Named parameter tensors, iterated in name order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    tensors: BTreeMap<String, Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.tensors
            .insert(name.into(), tensor.with_requires_grad(true));
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    /// Overwrites the data of an existing parameter, keeping its shape.
    pub fn set(&mut self, name: &str, data: Vec<f64>) -> Result<()> {
        let t = self
            .tensors
            .get_mut(name)
            .ok_or_else(|| Error::contract(format!("no parameter named `{name}`")))?;
        if t.numel() != data.len() {
            return Err(Error::contract(format!(
                "parameter `{name}` has {} elements, got {}",
                t.numel(),
                data.len()
            )));
        }
        t.data_mut().copy_from_slice(&data);
        Ok(())
    }

    pub fn fill(&mut self, name: &str, value: f64) -> Result<()> {
        let n = self
            .get(name)
            .ok_or_else(|| Error::contract(format!("no parameter named `{name}`")))?
            .numel();
        self.set(name, vec![value; n])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn numel(&self) -> usize {
        self.tensors.values().map(Tensor::numel).sum()
    }

    /// Adds a weight drawn from uniform(−1/√fan_in, 1/√fan_in).
    pub fn init_uniform<R: Rng + ?Sized>(
        &mut self,
        name: impl Into<String>,
        shape: &[usize],
        fan_in: usize,
        rng: &mut R,
    ) {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let numel: usize = shape.iter().product();
        let data = (0..numel).map(|_| rng.random_range(-bound..bound)).collect();
        self.insert(name, Tensor::new(shape.to_vec(), data).expect("init shape"));
    }

    pub fn init_zeros(&mut self, name: impl Into<String>, shape: &[usize]) {
        self.insert(name, Tensor::zeros(shape));
    }
}

/// Lazily records parameters from a [`ParamStore`] as leaves on one tape.
///
/// Each parameter is recorded at most once, so repeated use inside an
/// unrolled recurrence accumulates into a single gradient.
pub struct Binder<'t, 'p> {
    tape: &'t Tape,
    store: &'p ParamStore,
    bound: RefCell<HashMap<&'p str, Var<'t>>>,
}

impl<'t, 'p> Binder<'t, 'p> {
    pub fn new(tape: &'t Tape, store: &'p ParamStore) -> Self {
        Binder {
            tape,
            store,
            bound: RefCell::new(HashMap::new()),
        }
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn store(&self) -> &'p ParamStore {
        self.store
    }

    /// The tape variable for parameter `name`.
    ///
    /// Panics if the store has no such parameter; layer code only asks for
    /// names it registered itself.
    pub fn get(&self, name: &str) -> Var<'t> {
        if let Some(v) = self.bound.borrow().get(name) {
            return *v;
        }
        let (key, tensor) = self
            .store
            .tensors
            .get_key_value(name)
            .unwrap_or_else(|| panic!("parameter `{name}` is not registered"));
        let var = self.tape.leaf(tensor.clone());
        self.bound.borrow_mut().insert(key.as_str(), var);
        var
    }

    /// Number of distinct parameters touched so far.
    pub fn bound_count(&self) -> usize {
        self.bound.borrow().len()
    }

    /// Gradient for every parameter in the store; zeros for those the loss
    /// never touched.
    pub fn gradients(&self, grads: &Gradients) -> BTreeMap<String, Tensor> {
        let bound = self.bound.borrow();
        self.store
            .iter()
            .map(|(name, t)| {
                let g = match bound.get(name) {
                    Some(v) => grads.get(*v),
                    None => Tensor::zeros(t.shape()),
                };
                (name.to_string(), g)
            })
            .collect()
    }
}
