//! Central finite-difference gradient checking.
//!
//! The numeric side only ever evaluates forward values, so it is independent of
//! the backward rules it verifies.

use super::{Tape, Tensor, Var};
use crate::error::Result;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
pub const ABS_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest relative error among entries whose absolute error exceeds `ABS_TOL`.
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub checked: usize,
    pub failures: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares the analytic gradient of `f` with central differences for every
/// entry of every input.
pub fn check_gradients<F>(inputs: &[Tensor], f: F) -> Result<GradCheckReport>
where
    F: for<'t> Fn(&[Var<'t>]) -> Result<Var<'t>>,
{
    check_gradients_with_step(inputs, DEFAULT_STEP, f)
}

pub fn check_gradients_with_step<F>(inputs: &[Tensor], step: f64, f: F) -> Result<GradCheckReport>
where
    F: for<'t> Fn(&[Var<'t>]) -> Result<Var<'t>>,
{
    let analytic: Vec<Tensor> = {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = inputs.iter().map(|t| tape.param(t.clone())).collect();
        let out = f(&vars)?;
        let grads = tape.backward(out)?;
        vars.iter().map(|v| grads.get(*v).cloned().unwrap()).collect()
    };

    let eval = |xs: &[Tensor]| -> Result<f64> {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = xs.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&vars)?;
        let v = out.item().expect("scalar objective");
        Ok(v)
    };

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        checked: 0,
        failures: 0,
    };
    let mut work = inputs.to_vec();
    for (k, grad) in analytic.iter().enumerate() {
        for e in 0..work[k].len() {
            let orig = work[k].data()[e];
            work[k].data_mut()[e] = orig + step;
            let plus = eval(&work)?;
            work[k].data_mut()[e] = orig - step;
            let minus = eval(&work)?;
            work[k].data_mut()[e] = orig;

            let numeric = (plus - minus) / (2.0 * step);
            let a = grad.data()[e];
            let abs = (a - numeric).abs();
            report.checked += 1;
            report.max_abs_err = report.max_abs_err.max(abs);
            if abs > ABS_TOL {
                let rel = abs / a.abs().max(numeric.abs());
                report.max_rel_err = report.max_rel_err.max(rel);
                if rel >= REL_TOL {
                    report.failures += 1;
                }
            }
        }
    }
    Ok(report)
}
