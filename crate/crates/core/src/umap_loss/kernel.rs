use crate::autodiff::Var;
use crate::error::{Error, Result};

/// Clamp applied to every embedding similarity before taking logarithms.
pub const Q_EPS: f64 = 1e-4;
pub const DEFAULT_MIN_DIST: f64 = 0.1;
pub const FIT_GRID_POINTS: usize = 300;
pub const FIT_GRID_MAX: f64 = 3.0;

/// Shape parameters of the similarity `q = 1 / (1 + a d^(2b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub a: f64,
    pub b: f64,
    /// Set when `(a, b)` came from [`fit_ab`].
    pub min_dist: Option<f64>,
}

impl KernelParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel needs a > 0 and b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b, min_dist: None })
    }

    /// Unclamped `q` from a squared distance.
    pub fn q_from_sq(&self, d2: f64) -> f64 {
        1.0 / (1.0 + self.a * d2.powf(self.b))
    }

    pub fn q(&self, d: f64) -> f64 {
        self.q_from_sq(d * d)
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        fit_ab(DEFAULT_MIN_DIST).expect("default min_dist is valid")
    }
}

/// Target membership curve: 1 up to `min_dist`, then `exp(-(d - min_dist))`.
pub fn target_curve(d: f64, min_dist: f64) -> f64 {
    if d <= min_dist {
        1.0
    } else {
        (-(d - min_dist)).exp()
    }
}

pub fn fit_grid() -> Vec<f64> {
    let step = FIT_GRID_MAX / (FIT_GRID_POINTS - 1) as f64;
    (0..FIT_GRID_POINTS).map(|i| i as f64 * step).collect()
}

/// Residuals and Jacobian of the kernel against the target on the grid.
fn residuals(grid: &[f64], target: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let mut r = Vec::with_capacity(grid.len());
    let mut jac = Vec::with_capacity(grid.len());
    for (&d, &t) in grid.iter().zip(target) {
        if d == 0.0 {
            r.push(1.0 - t);
            jac.push([0.0, 0.0]);
            continue;
        }
        let u = d.powf(2.0 * b);
        let f = 1.0 / (1.0 + a * u);
        r.push(f - t);
        let df = -f * f;
        jac.push([df * u, df * a * u * 2.0 * d.ln()]);
    }
    (r, jac)
}

/// Least-squares fit of `(a, b)` to [`target_curve`] on 300 evenly spaced
/// distances in `[0, 3]`, by Levenberg-Marquardt from `a = b = 1`.
pub fn fit_ab(min_dist: f64) -> Result<KernelParams> {
    if !(min_dist >= 0.0 && min_dist.is_finite()) {
        return Err(Error::InvalidParameter(format!("min_dist must be >= 0, got {min_dist}")));
    }
    let grid = fit_grid();
    let target: Vec<f64> = grid.iter().map(|&d| target_curve(d, min_dist)).collect();
    let sse = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let (mut a, mut b) = (1.0, 1.0);
    let mut mu = 1e-3;
    let (mut r, mut jac) = residuals(&grid, &target, a, b);
    let mut cost = sse(&r);
    for _ in 0..500 {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (row, &ri) in jac.iter().zip(&r) {
            for p in 0..2 {
                jtr[p] += row[p] * ri;
                for q in 0..2 {
                    jtj[p][q] += row[p] * row[q];
                }
            }
        }
        let mut improved = false;
        while mu < 1e12 {
            let m = [[jtj[0][0] * (1.0 + mu), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + mu)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let da = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
            let db = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            if na > 0.0 && nb > 0.0 {
                let (nr, nj) = residuals(&grid, &target, na, nb);
                let ncost = sse(&nr);
                if ncost < cost {
                    let rel = (cost - ncost) / cost.max(f64::MIN_POSITIVE);
                    (a, b, r, jac, cost) = (na, nb, nr, nj, ncost);
                    mu = (mu * 0.1).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(KernelParams { a, b, min_dist: Some(min_dist) })
}

/// Clamped `q` for two embedding vectors.
pub fn q_similarity(zi: &[f64], zj: &[f64], kp: &KernelParams) -> Result<f64> {
    if zi.len() != zj.len() {
        return Err(Error::shape("q_similarity", format!("embedding dims {} vs {}", zi.len(), zj.len())));
    }
    let d2: f64 = zi.iter().zip(zj).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(kp.q_from_sq(d2).clamp(Q_EPS, 1.0 - Q_EPS))
}

/// Row-wise clamped similarities between two `[m, d_z]` embedding matrices,
/// as a `[m, 1]` column on the tape.
pub fn q_tape<'t>(zi: Var<'t>, zj: Var<'t>, kp: &KernelParams) -> Result<Var<'t>> {
    let d2 = zi.sub(zj)?.powf(2.0).row_sum();
    Ok(d2.powf(kp.b).scale(kp.a).add_scalar(1.0).powf(-1.0).clamp(Q_EPS, 1.0 - Q_EPS))
}
