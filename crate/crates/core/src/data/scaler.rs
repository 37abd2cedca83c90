use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Per-column z-score statistics for features and targets, fit on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub x_mean: Vec<f64>,
    pub x_std: Vec<f64>,
    pub y_mean: Vec<f64>,
    pub y_std: Vec<f64>,
}

fn column_stats(t: &Tensor) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = t.dims2();
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(t.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for i in 0..n {
        for ((s, v), m) in var.iter_mut().zip(t.row(i)).zip(&mean) {
            *s += (v - m).powi(2);
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = (s / (n.max(2) - 1) as f64).sqrt();
            // a column can be constant inside one training split even if it varies overall
            if sd > 0.0 { sd } else { 1.0 }
        })
        .collect();
    (mean, std)
}

fn affine(t: &Tensor, shift: &[f64], scale: &[f64], op: &'static str, forward: bool) -> Result<Tensor> {
    let (n, d) = t.dims2();
    if d != shift.len() {
        return Err(Error::shape(op, format!("expected {} columns, got {d}", shift.len())));
    }
    let mut out = t.data().to_vec();
    for i in 0..n {
        for j in 0..d {
            let v = &mut out[i * d + j];
            *v = if forward { (*v - shift[j]) / scale[j] } else { *v * scale[j] + shift[j] };
        }
    }
    Tensor::new(t.shape(), out)
}

impl Scaler {
    /// Column-wise statistics (sample standard deviation).
    pub fn fit(x: &Tensor, y: &Tensor) -> Self {
        let (x_mean, x_std) = column_stats(x);
        let (y_mean, y_std) = column_stats(y);
        Self { x_mean, x_std, y_mean, y_std }
    }

    /// One shared mean/std for every feature and target column, used for price
    /// windows where all columns are the same quantity.
    pub fn fit_shared(values: &[f64], d_x: usize, d_y: usize) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Empty("need at least two values to standardize".into()));
        }
        let col = Tensor::column(values.to_vec())?;
        let (m, s) = column_stats(&col);
        Ok(Self {
            x_mean: vec![m[0]; d_x],
            x_std: vec![s[0]; d_x],
            y_mean: vec![m[0]; d_y],
            y_std: vec![s[0]; d_y],
        })
    }

    pub fn transform_x(&self, x: &Tensor) -> Result<Tensor> {
        affine(x, &self.x_mean, &self.x_std, "transform_x", true)
    }

    pub fn inverse_x(&self, x: &Tensor) -> Result<Tensor> {
        affine(x, &self.x_mean, &self.x_std, "inverse_x", false)
    }

    pub fn transform_y(&self, y: &Tensor) -> Result<Tensor> {
        affine(y, &self.y_mean, &self.y_std, "transform_y", true)
    }

    pub fn inverse_y(&self, y: &Tensor) -> Result<Tensor> {
        affine(y, &self.y_mean, &self.y_std, "inverse_y", false)
    }
}
