//! Input Mixup, embedding-level mixing shared by Manifold Mixup and UMAP
//! Mixup, and the loss against mixed targets.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::{Tensor, Var};
use crate::error::{Error, Result};
use crate::nn::Bound;

/// A pair of training points and their mixing ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedPair {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

impl MixedPair {
    /// `lambda * y_i + (1 - lambda) * y_j`.
    pub fn target(&self, y_i: &[f64], y_j: &[f64]) -> Vec<f64> {
        y_i.iter().zip(y_j).map(|(a, b)| self.lambda * a + (1.0 - self.lambda) * b).collect()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("mixing ratio must be in [0, 1], got {lambda}")));
    }
    Ok(())
}

fn mix_tensor(a: &Tensor, b: &Tensor, lambda: f64, what: &'static str) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::shape(what, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
    Tensor::new(a.shape(), data)
}

/// Convex combination of two samples and of their labels.
pub fn mix_inputs(x_i: &Tensor, y_i: &Tensor, x_j: &Tensor, y_j: &Tensor, lambda: f64) -> Result<(Tensor, Tensor)> {
    check_lambda(lambda)?;
    Ok((mix_tensor(x_i, x_j, lambda, "mix_inputs")?, mix_tensor(y_i, y_j, lambda, "mix_inputs")?))
}

/// Row-wise `lambda_r * a_r + (1 - lambda_r) * b_r` on the tape.
pub fn mix_rows<'t>(a: Var<'t>, b: Var<'t>, lambdas: &[f64]) -> Result<Var<'t>> {
    let rows = a.shape().first().copied().unwrap_or(1);
    if lambdas.len() != rows {
        return Err(Error::shape("mix", format!("{} ratios for {rows} rows", lambdas.len())));
    }
    lambdas.iter().try_for_each(|&l| check_lambda(l))?;
    let tape = a.tape();
    let lam = tape.constant(Tensor::from_parts(vec![rows, 1], lambdas.to_vec()));
    let rest = tape.constant(Tensor::from_parts(vec![rows, 1], lambdas.iter().map(|l| 1.0 - l).collect()));
    a.mul(lam)?.add(b.mul(rest)?)
}

/// Predictions from mixed embeddings: `g(lambda h(x) + (1 - lambda) h(x'))`.
pub fn mixed_forward<'t>(model: &Bound<'_, 't>, x: Var<'t>, x2: Var<'t>, lambdas: &[f64]) -> Result<Var<'t>> {
    let z = model.embed(x)?;
    let z2 = model.embed(x2)?;
    mixed_head(model, z, z2, lambdas)
}

/// Head applied to mixed embeddings that have already been computed.
pub fn mixed_head<'t>(model: &Bound<'_, 't>, z: Var<'t>, z2: Var<'t>, lambdas: &[f64]) -> Result<Var<'t>> {
    model.head(mix_rows(z, z2, lambdas)?)
}

/// UMAP Mixup forward pass.
pub fn umap_mixup_forward<'t>(model: &Bound<'_, 't>, x: Var<'t>, x2: Var<'t>, lambdas: &[f64]) -> Result<Var<'t>> {
    mixed_forward(model, x, x2, lambdas)
}

/// Manifold Mixup forward pass; the same computation as [`umap_mixup_forward`].
pub fn manifold_mixup_forward<'t>(model: &Bound<'_, 't>, x: Var<'t>, x2: Var<'t>, lambdas: &[f64]) -> Result<Var<'t>> {
    mixed_forward(model, x, x2, lambdas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    SquaredError,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("squared_error")
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_error" => Ok(LossKind::SquaredError),
            other => Err(Error::UnknownLoss(other.to_string())),
        }
    }
}

impl LossKind {
    /// Mean over rows of the per-row loss between `pred` and `target`.
    pub fn apply<'t>(self, pred: Var<'t>, target: Var<'t>) -> Result<Var<'t>> {
        match self {
            LossKind::SquaredError => Ok(pred.sub(target)?.powf(2.0).row_sum().mean()),
        }
    }
}

/// Loss against the mixed labels `lambda y + (1 - lambda) y'`.
pub fn mixed_loss<'t>(pred: Var<'t>, y: Var<'t>, y2: Var<'t>, lambdas: &[f64], loss: LossKind) -> Result<Var<'t>> {
    loss.apply(pred, mix_rows(y, y2, lambdas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tape;

    fn t(rows: &[Vec<f64>]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn input_mixing_examples() {
        let (xi, yi) = (t(&[vec![0.0, 0.0]]), t(&[vec![1.0]]));
        let (xj, yj) = (t(&[vec![2.0, 4.0]]), t(&[vec![3.0]]));
        let (x, y) = mix_inputs(&xi, &yi, &xj, &yj, 0.5).unwrap();
        assert_eq!(x.data(), &[1.0, 2.0]);
        assert_eq!(y.data(), &[2.0]);
        assert_eq!(mix_inputs(&xi, &yi, &xj, &yj, 1.0).unwrap(), (xi.clone(), yi.clone()));
        let (x, _) = mix_inputs(&xj, &yi, &xj, &yj, 0.37).unwrap();
        assert_eq!(x, xj);
        assert!(mix_inputs(&xi, &yi, &t(&[vec![1.0]]), &yj, 0.5).is_err());
        assert!(mix_inputs(&xi, &yi, &xj, &yj, 1.5).is_err());
    }

    #[test]
    fn mixed_loss_examples() {
        let tape = Tape::new();
        let c = |v: f64| tape.constant(Tensor::new(&[1, 1], vec![v]).unwrap());
        let l = mixed_loss(c(3.0), c(5.0), c(100.0), &[1.0], LossKind::SquaredError).unwrap();
        assert_eq!(l.item(), Some(4.0));
        let l = mixed_loss(c(2.0), c(0.0), c(4.0), &[0.25], LossKind::SquaredError).unwrap();
        assert_eq!(l.item(), Some(1.0));
        let l = mixed_loss(c(3.0), c(0.0), c(4.0), &[0.25], LossKind::SquaredError).unwrap();
        assert_eq!(l.item(), Some(0.0));
        assert!(matches!("hinge".parse::<LossKind>(), Err(Error::UnknownLoss(_))));
    }

    #[test]
    fn pair_target_on_segment() {
        let p = MixedPair { i: 0, j: 1, lambda: 0.3 };
        let y = p.target(&[1.0, -2.0], &[3.0, 2.0]);
        assert!((y[0] - 2.4).abs() < 1e-15 && (y[1] - 0.8).abs() < 1e-15);
    }
}
