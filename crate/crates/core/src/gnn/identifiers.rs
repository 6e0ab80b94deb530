use std::ops::Range;

use ndarray::{s, Array2};

use super::Signal;
use crate::error::{Error, Result};

/// Node identifier signals fed to the inner network of an SGNN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentifierStrategy {
    /// `E_q = e_q`
    OneHot,
    /// `E_q = A e_q`
    OneHop,
    /// `E_q = A² e_q / n`
    TwoHop,
}

impl IdentifierStrategy {
    pub const ALL: [IdentifierStrategy; 3] = [IdentifierStrategy::OneHot, IdentifierStrategy::OneHop, IdentifierStrategy::TwoHop];

    pub fn name(&self) -> &'static str {
        match self {
            IdentifierStrategy::OneHot => "one_hot",
            IdentifierStrategy::OneHop => "one_hop",
            IdentifierStrategy::TwoHop => "two_hop",
        }
    }
}

impl std::str::FromStr for IdentifierStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_hot" => Ok(IdentifierStrategy::OneHot),
            "one_hop" => Ok(IdentifierStrategy::OneHop),
            "two_hop" => Ok(IdentifierStrategy::TwoHop),
            _ => Err(Error::Config(format!("unknown identifier strategy '{s}'"))),
        }
    }
}

fn check_square(a: &Array2<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("adjacency must be square, got {:?}", a.dim())));
    }
    Ok(a.nrows())
}

/// The `n × 1` signal `E_q(A)`; two-hop is computed as `A(A e_q)/n`.
pub fn identifier_signal(strategy: IdentifierStrategy, a: &Array2<f64>, q: usize) -> Result<Array2<f64>> {
    let n = check_square(a)?;
    if q >= n {
        return Err(Error::Domain(format!("node index {q} out of range for {n} nodes")));
    }
    let col = match strategy {
        IdentifierStrategy::OneHot => {
            let mut e = ndarray::Array1::zeros(n);
            e[q] = 1.0;
            e
        }
        IdentifierStrategy::OneHop => a.column(q).to_owned(),
        IdentifierStrategy::TwoHop => a.dot(&a.column(q)) / n as f64,
    };
    Ok(col.insert_axis(ndarray::Axis(1)))
}

/// All `n` identifier signals as a batch (`batch = n`): the matrix whose
/// column `q` is `E_q(A)`, read in row-major order.
pub fn identifier_batch(strategy: IdentifierStrategy, a: &Array2<f64>) -> Result<Signal> {
    let n = check_square(a)?;
    identifier_chunk(strategy, a, 0..n)
}

/// The identifier signals `E_q(A)` for `q` in `qs`, laid out as in [`identifier_batch`].
pub fn identifier_chunk(strategy: IdentifierStrategy, a: &Array2<f64>, qs: Range<usize>) -> Result<Signal> {
    let n = check_square(a)?;
    if qs.start >= qs.end || qs.end > n {
        return Err(Error::Domain(format!("identifier range {qs:?} invalid for {n} nodes")));
    }
    let b = qs.len();
    let m = match strategy {
        IdentifierStrategy::OneHot => Array2::from_shape_fn((n, b), |(i, k)| if i == qs.start + k { 1.0 } else { 0.0 }),
        IdentifierStrategy::OneHop => a.slice(s![.., qs]).as_standard_layout().into_owned(),
        IdentifierStrategy::TwoHop => a.dot(&a.slice(s![.., qs])) / n as f64,
    };
    Ok(Signal { data: m.into_shape_with_order((n * b, 1)).expect("contiguous"), batch: b })
}
