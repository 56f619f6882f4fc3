//! Scalars in two modes: IEEE-754 doubles and exact elements of ℚ(√2).
//!
//! Exact values are `q + r·√2` with arbitrary-precision rationals `q` and `r`.
//! The field is closed under the four operations, and because √2 is
//! irrational the rational part of a number is zero exactly when the number
//! is rational. That makes rationality decidable, which float mode cannot
//! offer.
//!
//! Mixing the two modes in one operation is an error.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arithmetic mode of a [`Scalar`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Exact,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Float => f.write_str("float"),
            Mode::Exact => f.write_str("exact"),
        }
    }
}

impl FromStr for Mode {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(Mode::Float),
            "exact" => Ok(Mode::Exact),
            other => Err(ScalarError::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mode error: {0}")]
    Mode(String),
    #[error("cannot parse scalar: {0}")]
    Parse(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

/// Exact number `rational + surd·√2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    rational: BigRational,
    surd: BigRational,
}

impl QSqrt2 {
    pub fn new(rational: BigRational, surd: BigRational) -> Self {
        // Ratio keeps itself reduced with a positive denominator.
        Self { rational, surd }
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::new(q, BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `p/q` as an exact rational. Panics if `q == 0`.
    pub fn from_fraction(p: i64, q: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// `r·√2` for rational `r = p/q`.
    pub fn sqrt2_times(p: i64, q: i64) -> Self {
        Self::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(p), BigInt::from(q)),
        )
    }

    /// Exact binary value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::from_rational)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    /// Field norm `q² − 2r²`.
    pub fn norm(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        &self.rational * &self.rational - two * &self.surd * &self.surd
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.rational.clone(), -self.surd.clone())
    }

    /// Multiplicative inverse `(q − r√2)/(q² − 2r²)`; `None` only for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = self.norm();
        // √2 is irrational, so q² = 2r² forces q = r = 0.
        assert!(!norm.is_zero(), "nonzero element of Q(sqrt2) with zero norm");
        let conj = self.conjugate();
        Some(Self::new(conj.rational / &norm, conj.surd / norm))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|inv| self * &inv)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_integer(1);
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Sign of the real number, decided exactly.
    pub fn signum(&self) -> Ordering {
        let sq = self.rational.cmp(&BigRational::zero());
        let sr = self.surd.cmp(&BigRational::zero());
        match (sq, sr) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (a, b) if a == b => a,
            (sq, sr) => {
                let q2 = &self.rational * &self.rational;
                let r2 = &self.surd * &self.surd * BigRational::from_integer(BigInt::from(2));
                if q2 > r2 {
                    sq
                } else {
                    sr
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let q = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.surd.is_zero() {
            return q;
        }
        let r = self.surd.to_f64().unwrap_or(f64::NAN);
        q + r * std::f64::consts::SQRT_2
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.rational + &rhs.rational, &self.surd + &rhs.surd)
    }
}

impl<'a> Sub<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.rational - &rhs.rational, &self.surd - &rhs.surd)
    }
}

impl<'a> Mul<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &QSqrt2) -> QSqrt2 {
        // (q1 + r1√2)(q2 + r2√2) = q1q2 + 2r1r2 + (q1r2 + r1q2)√2
        let two = BigRational::from_integer(BigInt::from(2));
        QSqrt2::new(
            &self.rational * &rhs.rational + two * &self.surd * &rhs.surd,
            &self.rational * &rhs.surd + &self.surd * &rhs.rational,
        )
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2::new(-self.rational, -self.surd)
    }
}

fn write_ratio(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    write!(f, "{}/{}", r.numer(), r.denom())
}

/// Text form `p/q` or `p/q+r/s*sqrt2` (negative surd parts print as `-r/s*sqrt2`).
impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ratio(f, &self.rational)?;
        if !self.surd.is_zero() {
            if self.surd.is_positive() {
                f.write_str("+")?;
            } else {
                f.write_str("-")?;
            }
            write_ratio(f, &self.surd.abs())?;
            f.write_str("*sqrt2")?;
        }
        Ok(())
    }
}

/// Parse an unsigned rational literal: integer, `p/q`, or a decimal with an
/// optional exponent. Decimals convert exactly.
fn parse_rational_literal(s: &str) -> Result<BigRational, ScalarError> {
    let err = || ScalarError::Parse(format!("bad rational literal `{s}`"));
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_decimal(p).ok_or_else(err)?;
        let q = parse_decimal(q).ok_or_else(err)?;
        if q.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        return Ok(p / q);
    }
    parse_decimal(s).ok_or_else(err)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `3.5e-2`.
pub(crate) fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Accepted shapes, with optional leading sign on each part:
/// `Q`, `Q*sqrt2`, `sqrt2`, `Q+R*sqrt2`, `Q-R*sqrt2`, `Q+sqrt2`, where `Q` and
/// `R` are integer, `p/q` or decimal literals.
impl FromStr for QSqrt2 {
    type Err = ScalarError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ScalarError::Parse("empty scalar".into()));
        }
        // Split into signed terms at + or - that are not the leading sign and
        // not part of an exponent.
        let bytes = s.as_bytes();
        let mut terms: Vec<&str> = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        if terms.len() > 2 {
            return Err(ScalarError::Parse(format!("too many terms in `{text}`")));
        }
        let mut rational = BigRational::zero();
        let mut surd = BigRational::zero();
        let mut seen_rational = false;
        let mut seen_surd = false;
        for term in terms {
            let (negative, body) = match term.as_bytes().first() {
                Some(b'-') => (true, &term[1..]),
                Some(b'+') => (false, &term[1..]),
                _ => (false, term),
            };
            let (value, is_surd) = if body == "sqrt2" {
                (BigRational::one(), true)
            } else if let Some(coef) = body.strip_suffix("*sqrt2") {
                (parse_rational_literal(coef)?, true)
            } else {
                (parse_rational_literal(body)?, false)
            };
            let value = if negative { -value } else { value };
            if is_surd {
                if seen_surd {
                    return Err(ScalarError::Parse(format!("duplicate sqrt2 term in `{text}`")));
                }
                seen_surd = true;
                surd = value;
            } else {
                if seen_rational {
                    return Err(ScalarError::Parse(format!("duplicate rational term in `{text}`")));
                }
                seen_rational = true;
                rational = value;
            }
        }
        Ok(Self::new(rational, surd))
    }
}

/// A real number in float or exact mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Float(f64),
    Exact(QSqrt2),
}

fn mode_mismatch(op: &str) -> ScalarError {
    ScalarError::Mode(format!("mixed float/exact operands in {op}"))
}

impl Scalar {
    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    pub fn exact(q: QSqrt2) -> Self {
        Scalar::Exact(q)
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(QSqrt2::from_fraction(p, q))
    }

    pub fn from_i64(mode: Mode, n: i64) -> Self {
        match mode {
            Mode::Float => Scalar::Float(n as f64),
            Mode::Exact => Scalar::Exact(QSqrt2::from_integer(n)),
        }
    }

    /// Converts an exact rational to the requested mode.
    pub fn from_rational(mode: Mode, q: &BigRational) -> Self {
        match mode {
            Mode::Float => Scalar::Float(q.to_f64().unwrap_or(f64::NAN)),
            Mode::Exact => Scalar::Exact(QSqrt2::from_rational(q.clone())),
        }
    }

    pub fn zero(mode: Mode) -> Self {
        Self::from_i64(mode, 0)
    }

    pub fn one(mode: Mode) -> Self {
        Self::from_i64(mode, 1)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Float(_) => Mode::Float,
            Scalar::Exact(_) => Mode::Exact,
        }
    }

    pub fn as_exact(&self) -> Option<&QSqrt2> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Float(x) => *x,
            Scalar::Exact(q) => q.to_f64(),
        }
    }

    /// Re-expresses the value in `mode`. Exact → float rounds; float → exact
    /// takes the exact binary value of the double.
    pub fn convert(&self, mode: Mode) -> Result<Scalar, ScalarError> {
        match (self, mode) {
            (Scalar::Float(_), Mode::Float) | (Scalar::Exact(_), Mode::Exact) => Ok(self.clone()),
            (Scalar::Exact(q), Mode::Float) => Ok(Scalar::Float(q.to_f64())),
            (Scalar::Float(x), Mode::Exact) => QSqrt2::from_f64(*x)
                .map(Scalar::Exact)
                .ok_or_else(|| ScalarError::Mode(format!("{x} has no exact value"))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Float(x) => *x == 0.0,
            Scalar::Exact(q) => q.is_zero(),
        }
    }

    pub fn is_rational(&self) -> Result<bool, ScalarError> {
        match self {
            Scalar::Exact(q) => Ok(q.is_rational()),
            Scalar::Float(_) => Err(ScalarError::Mode(
                "rationality is undecidable for floating-point values".into(),
            )),
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x + y)),
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x + y)),
            _ => Err(mode_mismatch("addition")),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x - y)),
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x - y)),
            _ => Err(mode_mismatch("subtraction")),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x * y)),
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Scalar::Exact(x * y)),
            _ => Err(mode_mismatch("multiplication")),
        }
    }

    /// Quotient `self / rhs`. A zero divisor is an error in both modes.
    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => {
                if *y == 0.0 {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Float(x / y))
                }
            }
            (Scalar::Exact(x), Scalar::Exact(y)) => x
                .checked_div(y)
                .map(Scalar::Exact)
                .ok_or(ScalarError::DivisionByZero),
            _ => Err(mode_mismatch("division")),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Float(x) => Scalar::Float(-x),
            Scalar::Exact(q) => Scalar::Exact(-q.clone()),
        }
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Float(x) => Scalar::Float(x.powi(exp as i32)),
            Scalar::Exact(q) => Scalar::Exact(q.pow(exp)),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Float(x) => Scalar::Float(x.abs()),
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
        }
    }

    /// Ordering of two same-mode scalars. NaN compares as an error.
    pub fn compare(&self, rhs: &Scalar) -> Result<Ordering, ScalarError> {
        match (self, rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => x
                .partial_cmp(y)
                .ok_or_else(|| ScalarError::Mode("comparison with NaN".into())),
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(x.cmp(y)),
            _ => Err(mode_mismatch("comparison")),
        }
    }

    /// Parses the text form, inferring the mode: anything containing a
    /// decimal point, exponent, `inf` or `nan` is a float; integers, `p/q`
    /// and `sqrt2` forms are exact.
    pub fn parse_text(text: &str) -> Result<Scalar, ScalarError> {
        let t = text.trim();
        let lower = t.to_ascii_lowercase();
        let looks_float = lower.contains('.')
            || lower.contains("inf")
            || lower.contains("nan")
            || (lower.contains('e') && !lower.contains("sqrt2"));
        if looks_float {
            t.parse::<f64>()
                .map(Scalar::Float)
                .map_err(|_| ScalarError::Parse(format!("bad float `{t}`")))
        } else {
            t.parse::<QSqrt2>().map(Scalar::Exact)
        }
    }

    /// Parses any scalar text and converts it into `mode`. In exact mode a
    /// decimal literal converts exactly (`0.1` is `1/10`).
    pub fn parse_in(mode: Mode, text: &str) -> Result<Scalar, ScalarError> {
        match mode {
            Mode::Exact => text.trim().parse::<QSqrt2>().map(Scalar::Exact),
            Mode::Float => Scalar::parse_text(text)?.convert(Mode::Float),
        }
    }
}

/// Exact scalars print as `p/q[±r/s*sqrt2]`, floats as the shortest
/// round-trip decimal.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Float(x) => write!(f, "{x:?}"),
            Scalar::Exact(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scalar::parse_text(s)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scalar::parse_text(&s).map_err(serde::de::Error::custom)
    }
}

/// Absolute/relative acceptance threshold for residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, ScalarError> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) {
            return Err(ScalarError::InvalidTolerance(format!(
                "abs_tol = {abs_tol}, rel_tol = {rel_tol}; both must be nonnegative"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    /// Float residual test `|r| ≤ abs_tol + rel_tol·|m|`.
    pub fn passes_f64(&self, residual: f64, reference: f64) -> bool {
        residual.abs() <= self.abs_tol + self.rel_tol * reference.abs()
    }

    /// Exact residuals must be exactly zero; float residuals use
    /// [`Tolerance::passes_f64`].
    pub fn passes(&self, residual: &Scalar, reference: f64) -> bool {
        match residual {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(r) => self.passes_f64(*r, reference),
        }
    }
}
