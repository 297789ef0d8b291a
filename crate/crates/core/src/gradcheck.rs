//! Central finite-difference verification of tape gradients.

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::params::{Binder, ParamStore};

/// Outcome of a gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// max |analytic − numeric| / max(1e-12, |analytic| + |numeric|)
    pub max_rel_error: f64,
    /// Parameter entry where the maximum occurred, as (name, flat index).
    pub worst: Option<(String, usize)>,
    /// (analytic, numeric) at the worst entry.
    pub worst_values: Option<(f64, f64)>,
    pub entries_checked: usize,
}

/// Relative error used throughout the checker.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-12)
}

/// Compares the tape gradient of `f` against central differences with step
/// `eps` for every entry of every parameter in `store`.
///
/// `f` must be deterministic: it is re-evaluated twice per entry.
pub fn grad_check<F>(store: &ParamStore, f: F, eps: f64) -> Result<GradCheckReport>
where
    F: for<'t, 'p> Fn(&Binder<'t, 'p>) -> Result<Var<'t>>,
{
    grad_check_only(store, |_| true, f, eps)
}

/// Same as [`grad_check`], restricted to parameters accepted by `select`.
pub fn grad_check_only<S, F>(store: &ParamStore, select: S, f: F, eps: f64) -> Result<GradCheckReport>
where
    S: Fn(&str) -> bool,
    F: for<'t, 'p> Fn(&Binder<'t, 'p>) -> Result<Var<'t>>,
{
    if !(eps > 0.0) {
        return Err(Error::contract(format!("eps must be positive, got {eps}")));
    }
    let analytic = {
        let tape = Tape::new();
        let binder = Binder::new(&tape, store);
        let loss = f(&binder)?;
        let grads = tape.backward(loss)?;
        binder.gradients(&grads)
    };

    let eval = |s: &ParamStore| -> Result<f64> {
        let tape = Tape::inference();
        let binder = Binder::new(&tape, s);
        Ok(f(&binder)?.item())
    };

    let mut probe = store.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        worst_values: None,
        entries_checked: 0,
    };
    let names: Vec<String> = store.names().filter(|n| select(n)).map(str::to_string).collect();
    for name in names {
        let grad = &analytic[&name];
        for idx in 0..grad.numel() {
            let original = probe.get(&name).expect("present").data()[idx];
            let mut at = |delta: f64| -> Result<f64> {
                probe.get_mut(&name).expect("present").data_mut()[idx] = original + delta;
                eval(&probe)
            };
            let numeric = (at(eps)? - at(-eps)?) / (2.0 * eps);
            probe.get_mut(&name).expect("present").data_mut()[idx] = original;

            let a = grad.data()[idx];
            if !numeric.is_finite() || !a.is_finite() {
                return Err(Error::NonFinite(format!("{name}[{idx}]")));
            }
            let err = relative_error(a, numeric);
            report.entries_checked += 1;
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((name.clone(), idx));
                report.worst_values = Some((a, numeric));
            }
        }
    }
    Ok(report)
}
