//! Reverse-mode gradients on a small composite and a finite-difference check.

use paragen::autodiff::Tape;
use paragen::gradcheck::grad_check;
use paragen::{ParamStore, Tensor};

fn main() -> paragen::Result<()> {
    let tape = Tape::new();
    let x = tape.param(Tensor::scalar(2.0));
    let y = tape.param(Tensor::scalar(5.0));
    let grads = tape.backward(x * y + x * x)?;
    println!("d/dx (xy + x²) = {}", grads.get(x).item());
    println!("d/dy (xy + x²) = {}", grads.get(y).item());

    let mut store = ParamStore::new();
    store.insert("w", Tensor::vector(vec![0.3, -0.7, 1.1]));
    store.insert("x", Tensor::vector(vec![1.0, 0.5, -2.0]));
    store.insert("b", Tensor::scalar(0.2));
    let report = grad_check(
        &store,
        |b| Ok((b.get("w").dot(b.get("x")) + b.get("b")).sigmoid()),
        1e-5,
    )?;
    println!(
        "sigmoid(w·x + b): max relative error {:.2e} over {} entries",
        report.max_rel_error, report.entries_checked
    );
    Ok(())
}
