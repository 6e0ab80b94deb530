use ndarray::Array2;

use crate::error::{shape_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Mean over rows of `−log softmax(z)_{target}`.
    CrossEntropy,
    /// Mean over rows of `‖z − y‖²`.
    Square,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Classes(Vec<usize>),
    Values(Array2<f64>),
}

/// Row-wise log-softmax.
pub fn log_softmax(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

/// Loss value and `∂loss/∂z`.
pub fn loss_and_output_grad(z: &Array2<f64>, targets: &Targets, kind: LossKind) -> Result<(f64, Array2<f64>)> {
    let rows = z.nrows();
    if rows == 0 {
        return shape_err("empty output");
    }
    let scale = 1.0 / rows as f64;
    match (kind, targets) {
        (LossKind::CrossEntropy, Targets::Classes(c)) => {
            if c.len() != rows {
                return shape_err(format!("{} class targets for {} rows", c.len(), rows));
            }
            if let Some(&bad) = c.iter().find(|&&t| t >= z.ncols()) {
                return Err(Error::Domain(format!("class target {bad} out of range for {} outputs", z.ncols())));
            }
            let ls = log_softmax(z);
            let loss = -c.iter().enumerate().map(|(i, &t)| ls[[i, t]]).sum::<f64>() * scale;
            let mut g = ls.mapv(f64::exp);
            for (i, &t) in c.iter().enumerate() {
                g[[i, t]] -= 1.0;
            }
            g *= scale;
            Ok((loss, g))
        }
        (LossKind::Square, Targets::Values(y)) => {
            if y.dim() != z.dim() {
                return shape_err(format!("targets {:?} vs outputs {:?}", y.dim(), z.dim()));
            }
            let r = z - y;
            let loss = r.mapv(|v| v * v).sum() * scale;
            Ok((loss, r * (2.0 * scale)))
        }
        _ => Err(Error::Config("loss kind does not match the target type".into())),
    }
}

/// Fraction of rows whose argmax equals the target class.
pub fn accuracy(z: &Array2<f64>, classes: &[usize]) -> f64 {
    let hits = z
        .rows()
        .into_iter()
        .zip(classes)
        .filter(|(row, &c)| {
            let best = row.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
            best.0 == c
        })
        .count();
    hits as f64 / classes.len().max(1) as f64
}
