//! Truncated bivariate power series `H(a,b) = Σ c_ij aⁱ bʲ`, `i + j ≤ P`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::function::{Bivariate, EvalError};
use crate::scalar::{Mode, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("coefficient ({i}, {j}) exceeds truncation order {order}")]
    OutOfOrder { i: usize, j: usize, order: usize },
    #[error("coefficient ({i}, {j}) is {found} but the series is {expected}")]
    Mode { i: usize, j: usize, expected: Mode, found: Mode },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries2D {
    order: usize,
    mode: Mode,
    coeffs: BTreeMap<(usize, usize), Scalar>,
}

impl PowerSeries2D {
    pub fn new(order: usize, mode: Mode) -> Self {
        Self { order, mode, coeffs: BTreeMap::new() }
    }

    /// Series with `c_ij = coeff(i, j)` for every `i + j ≤ order`.
    pub fn from_fn<F>(order: usize, mode: Mode, mut coeff: F) -> Result<Self, SeriesError>
    where
        F: FnMut(usize, usize) -> Scalar,
    {
        let mut s = Self::new(order, mode);
        for p in 0..=order {
            for i in 0..=p {
                s.set(i, p - i, coeff(i, p - i))?;
            }
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) -> Result<(), SeriesError> {
        if i + j > self.order {
            return Err(SeriesError::OutOfOrder { i, j, order: self.order });
        }
        if value.mode() != self.mode {
            return Err(SeriesError::Mode { i, j, expected: self.mode, found: value.mode() });
        }
        self.coeffs.insert((i, j), value);
        Ok(())
    }

    /// `c_ij`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(|| Scalar::zero(self.mode))
    }

    /// The coefficients `c_{p,0}, c_{p-1,1}, …, c_{0,p}` of anti-diagonal `p`
    /// as `((i, j), c_ij)`, ordered by `j`.
    pub fn anti_diagonal(&self, p: usize) -> Vec<((usize, usize), Scalar)> {
        (0..=p).map(|j| ((p - j, j), self.get(p - j, j))).collect()
    }

    /// Same series with every coefficient rounded to a double.
    pub fn to_float(&self) -> PowerSeries2D {
        PowerSeries2D {
            order: self.order,
            mode: Mode::Float,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, Scalar::Float(v.to_f64())))
                .collect(),
        }
    }

    /// Parses `i j value` records, one per line. Blank lines and lines
    /// starting with `#` are skipped. The truncation order is the largest
    /// `i + j` present. The series is exact when every value has an exact
    /// text form and float otherwise.
    pub fn parse(text: &str) -> Result<Self, SeriesError> {
        let mut records = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| SeriesError::Parse { line: n + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected `i j value`, found {} fields", fields.len())));
            }
            let i: usize = fields[0].parse().map_err(|_| err(format!("bad index `{}`", fields[0])))?;
            let j: usize = fields[1].parse().map_err(|_| err(format!("bad index `{}`", fields[1])))?;
            let value = Scalar::parse_text(fields[2]).map_err(|e: ScalarError| err(e.to_string()))?;
            records.push((n + 1, i, j, value));
        }
        let order = records.iter().map(|(_, i, j, _)| i + j).max().unwrap_or(0);
        let mode = if records.iter().all(|r| r.3.mode() == Mode::Exact) { Mode::Exact } else { Mode::Float };
        let mut series = Self::new(order, mode);
        for (line, i, j, value) in records {
            if series.coeffs.contains_key(&(i, j)) {
                return Err(SeriesError::Parse { line, message: format!("duplicate coefficient ({i}, {j})") });
            }
            let value = value.convert(mode).map_err(|e| SeriesError::Parse { line, message: e.to_string() })?;
            series.set(i, j, value)?;
        }
        Ok(series)
    }

    /// Inverse of [`PowerSeries2D::parse`] for the stored coefficients.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((i, j), v) in &self.coeffs {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }
}

impl Bivariate for PowerSeries2D {
    fn eval(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
        if a.mode() != self.mode || b.mode() != self.mode {
            return Err(EvalError::mode(format!("series is {} but arguments are not", self.mode)));
        }
        let powers = |x: &Scalar| -> Result<Vec<Scalar>, EvalError> {
            let mut v = vec![Scalar::one(self.mode)];
            for k in 1..=self.order {
                let next = v[k - 1].mul(x)?;
                v.push(next);
            }
            Ok(v)
        };
        let (pa, pb) = (powers(a)?, powers(b)?);
        let mut acc = Scalar::zero(self.mode);
        for ((i, j), c) in &self.coeffs {
            acc = acc.add(&c.mul(&pa[*i])?.mul(&pb[*j])?)?;
        }
        Ok(acc)
    }
}
