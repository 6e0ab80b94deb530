//! Line-oriented text format for [`GnnParams`]. A header gives the
//! activation, `M`, the dimensions and the filter order; blocks follow in
//! row-major order. Floats use the shortest representation that parses back
//! to the same bits, so a write/read cycle is exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};

use super::{Activation, Affine, GnnParams, Head, Layer};
use crate::error::{Error, Result};

const MAGIC: &str = "graphlimit-gnn 1";

fn row_line(values: impl Iterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn write_matrix(out: &mut String, label: &str, m: &Array2<f64>) {
    writeln!(out, "{label} {} {}", m.nrows(), m.ncols()).unwrap();
    for row in m.rows() {
        writeln!(out, "{}", row_line(row.iter().copied())).unwrap();
    }
}

fn write_vector(out: &mut String, label: &str, v: &Array1<f64>) {
    writeln!(out, "{label} {}", v.len()).unwrap();
    writeln!(out, "{}", row_line(v.iter().copied())).unwrap();
}

pub fn write_params<W: Write>(params: &GnnParams, mut w: W) -> Result<()> {
    params.validate()?;
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "activation {}", params.activation.name()).unwrap();
    writeln!(s, "layers {}", params.depth()).unwrap();
    writeln!(s, "dims {}", params.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(s, "order {}", params.order()).unwrap();
    match &params.head {
        Head::Square => writeln!(s, "head square").unwrap(),
        Head::Mlp(h) => writeln!(s, "head mlp {}", h.len()).unwrap(),
    }
    for (l, layer) in params.layers.iter().enumerate() {
        for (k, f) in layer.filters.iter().enumerate() {
            write_matrix(&mut s, &format!("filter {l} {k}"), f);
        }
        write_vector(&mut s, &format!("bias {l}"), &layer.bias);
    }
    if let Head::Mlp(h) = &params.head {
        for (i, a) in h.iter().enumerate() {
            write_matrix(&mut s, &format!("head_weight {i}"), &a.w);
            write_vector(&mut s, &format!("head_bias {i}"), &a.b);
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Lines<R: BufRead> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Data(format!("parameter file line {}: {msg}", self.line))
    }

    /// Reads a header line `prefix a b …` and returns the trailing tokens.
    fn header(&mut self, prefix: &str) -> Result<Vec<String>> {
        let l = self.next()?;
        let rest = l.strip_prefix(prefix).ok_or_else(|| self.err(&format!("expected '{prefix}'")))?;
        Ok(rest.split_whitespace().map(String::from).collect())
    }

    fn usize_at(&self, tokens: &[String], i: usize) -> Result<usize> {
        tokens.get(i).and_then(|t| t.parse().ok()).ok_or_else(|| self.err("expected an integer"))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let l = self.next()?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err("bad number"))?;
        if v.len() != count {
            return Err(self.err(&format!("expected {count} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn matrix(&mut self, prefix: &str) -> Result<Array2<f64>> {
        let t = self.header(prefix)?;
        let (r, c) = (self.usize_at(&t, 0)?, self.usize_at(&t, 1)?);
        let mut data = Vec::with_capacity(r * c);
        for _ in 0..r {
            data.extend(self.floats(c)?);
        }
        Ok(Array2::from_shape_vec((r, c), data).unwrap())
    }

    fn vector(&mut self, prefix: &str) -> Result<Array1<f64>> {
        let t = self.header(prefix)?;
        let n = self.usize_at(&t, 0)?;
        Ok(Array1::from(self.floats(n)?))
    }
}

pub fn read_params<R: BufRead>(r: R) -> Result<GnnParams> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    if lines.next()?.trim() != MAGIC {
        return Err(lines.err("not a parameter file"));
    }
    let act = lines.header("activation ")?;
    let activation = Activation::from_name(act.first().map(String::as_str).unwrap_or(""))?;
    let t = lines.header("layers ")?;
    let depth = lines.usize_at(&t, 0)?;
    let dims: Vec<usize> = lines.header("dims ")?.iter().map(|d| d.parse().map_err(|_| lines.err("bad dims"))).collect::<Result<_>>()?;
    if dims.len() != depth + 1 {
        return Err(lines.err("dims do not match the layer count"));
    }
    let t = lines.header("order ")?;
    let order = lines.usize_at(&t, 0)?;
    let head_tokens = lines.header("head ")?;
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let filters = (0..=order).map(|k| lines.matrix(&format!("filter {l} {k} "))).collect::<Result<Vec<_>>>()?;
        let bias = lines.vector(&format!("bias {l} "))?;
        layers.push(Layer { filters, bias });
    }
    let head = match head_tokens.first().map(String::as_str) {
        Some("square") => Head::Square,
        Some("mlp") => {
            let count = lines.usize_at(&head_tokens, 1)?;
            let mut h = Vec::with_capacity(count);
            for i in 0..count {
                let w = lines.matrix(&format!("head_weight {i} "))?;
                let b = lines.vector(&format!("head_bias {i} "))?;
                h.push(Affine { w, b });
            }
            Head::Mlp(h)
        }
        _ => return Err(lines.err("unknown head kind")),
    };
    let p = GnnParams { activation, layers, head, input_dim: dims[0] };
    p.validate()?;
    if p.dims() != dims {
        return Err(Error::Data("declared dims disagree with the stored blocks".into()));
    }
    Ok(p)
}
