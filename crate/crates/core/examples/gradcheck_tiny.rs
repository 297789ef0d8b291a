//! Finite-difference check of the full objectives on a tiny model.
//!
//! In plain `f64` the check is limited by roundoff: some gate gradients are
//! around 1e-9, below what a central difference can resolve. The acceptance
//! suite repeats the check with an extended-precision reference.

use paragen::diagnostics::{tiny_gradcheck, TinyShape};

fn main() -> paragen::Result<()> {
    let report = tiny_gradcheck(TinyShape::default(), 0, 1e-5)?;
    for (name, r) in [("paragraph loss", &report.paragraph_loss), ("ELBO", &report.elbo)] {
        println!(
            "{name}: max relative error {:.2e} at {} over {} entries; (analytic, numeric) = {:?}",
            r.max_rel_error,
            r.worst.as_deref().unwrap_or("-"),
            r.entries_checked,
            r.worst_values
        );
    }
    Ok(())
}
