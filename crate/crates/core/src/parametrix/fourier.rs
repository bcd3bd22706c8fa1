//! Truncated Fourier series `Σ_n c_n e^{inx}` with exact complex-rational
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Complex;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Exact complex rational.
pub type QC = Complex<BigRational>;

/// Highest retained frequency.
pub const MAX_DEGREE: i32 = 16;

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qc(re: BigRational, im: BigRational) -> QC {
    Complex::new(re, im)
}

pub fn qc_int(n: i64) -> QC {
    Complex::new(q(n, 1), BigRational::zero())
}

pub fn qc_to_f64(z: &QC) -> C64 {
    C64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

fn qc_abs_bound(z: &QC) -> f64 {
    z.re.abs().to_f64().unwrap_or(f64::INFINITY) + z.im.abs().to_f64().unwrap_or(f64::INFINITY)
}

/// Truncated Fourier series with exact coefficients. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fourier {
    coeffs: BTreeMap<i32, QC>,
}

impl Fourier {
    pub fn zero() -> Self {
        Fourier::default()
    }

    pub fn constant(c: QC) -> Self {
        Fourier::from_coeffs([(0, c)])
    }

    pub fn one() -> Self {
        Fourier::constant(QC::one())
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (i32, QC)>) -> Self {
        let mut f = Fourier::zero();
        for (n, c) in coeffs {
            f.add_coeff(n, c);
        }
        f
    }

    fn add_coeff(&mut self, n: i32, c: QC) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n).or_insert_with(QC::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, QC> {
        &self.coeffs
    }

    pub fn coeff(&self, n: i32) -> QC {
        self.coeffs.get(&n).cloned().unwrap_or_else(QC::zero)
    }

    pub fn degree(&self) -> i32 {
        self.coeffs.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Fourier) -> Fourier {
        let mut out = self.clone();
        for (&n, c) in &other.coeffs {
            out.add_coeff(n, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &QC) -> Fourier {
        Fourier::from_coeffs(self.coeffs.iter().map(|(&n, a)| (n, a * c)))
    }

    /// Product truncated to `|n| ≤ MAX_DEGREE`, with the ℓ¹ norm of the
    /// dropped coefficients.
    pub fn mul(&self, other: &Fourier) -> (Fourier, f64) {
        let mut out = Fourier::zero();
        for (&m, a) in &self.coeffs {
            for (&n, b) in &other.coeffs {
                out.add_coeff(m + n, a * b);
            }
        }
        let dropped: Vec<i32> = out.coeffs.keys().copied().filter(|n| n.abs() > MAX_DEGREE).collect();
        let mut tail = 0.0;
        for n in dropped {
            if let Some(c) = out.coeffs.remove(&n) {
                tail += qc_abs_bound(&c);
            }
        }
        (out, tail)
    }

    /// d/dx: `c_n ↦ i n c_n`.
    pub fn derivative(&self) -> Fourier {
        Fourier::from_coeffs(
            self.coeffs
                .iter()
                .map(|(&n, c)| (n, c * Complex::new(BigRational::zero(), q(n as i64, 1)))),
        )
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|(&n, c)| qc_to_f64(c) * C64::from_polar(1.0, n as f64 * x))
            .sum()
    }

    pub fn to_f64(&self) -> Vec<(i32, C64)> {
        self.coeffs.iter().map(|(&n, c)| (n, qc_to_f64(c))).collect()
    }

    /// `c_{-n} = conj(c_n)` for every `n`.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|(&n, c)| self.coeff(-n) == c.conj())
    }

    /// Mean over one period, i.e. `c_0`.
    pub fn mean(&self) -> QC {
        self.coeff(0)
    }
}

impl fmt::Display for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(n, c)| format!("({} + {}i)e^{{{}ix}}", c.re, c.im, n))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Real trigonometric-polynomial potential `v(x)` on the circle `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    series: Fourier,
    label: String,
}

impl Potential {
    pub fn from_fourier(series: Fourier, label: impl Into<String>) -> Result<Self> {
        if !series.is_real() {
            return Err(Error::Domain(format!("potential {series} is not real-valued")));
        }
        if series.degree() > MAX_DEGREE {
            return Err(Error::Domain(format!("potential degree {} exceeds {MAX_DEGREE}", series.degree())));
        }
        Ok(Potential { series, label: label.into() })
    }

    pub fn zero() -> Self {
        Potential { series: Fourier::zero(), label: "0".into() }
    }

    pub fn constant(c: BigRational) -> Self {
        let label = c.to_string();
        Potential { series: Fourier::constant(qc(c, BigRational::zero())), label }
    }

    /// Parses a sum of terms `[r*]f` with `r` a decimal or fraction and `f` one
    /// of `1`, `sin`, `cos`, `sin(kx)`, `cos(kx)`, e.g. `1 + sin`,
    /// `0.5*cos(2x) - sin(x)`.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty potential".into()));
        }
        let mut series = Fourier::zero();
        let mut start = 0;
        let bytes = compact.as_bytes();
        let mut depth = 0i32;
        let mut terms = Vec::new();
        for (i, &ch) in bytes.iter().enumerate() {
            match ch {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > 0 && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' => {
                    terms.push(&compact[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            series = series.add(&parse_term(term)?);
        }
        Potential::from_fourier(series, text.trim())
    }

    pub fn series(&self) -> &Fourier {
        &self.series
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.series.eval(x).re
    }

    pub fn is_constant(&self) -> bool {
        self.series.coeffs().keys().all(|&n| n == 0)
    }
}

fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("cannot read {text:?} as a rational number"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, den);
    Ok(if neg { -r } else { r })
}

fn parse_term(term: &str) -> Result<Fourier> {
    let (sign, body) = match term.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, term.strip_prefix('+').unwrap_or(term)),
    };
    let (coef, func) = match body.split_once('*') {
        Some((c, f)) => (parse_rational(c)?, f),
        None if body.starts_with("sin") || body.starts_with("cos") => (BigRational::one(), body),
        None => (parse_rational(body)?, "1"),
    };
    let coef = coef * q(sign, 1);
    let freq = |name: &str| -> Result<i32> {
        let rest = &func[name.len()..];
        if rest.is_empty() || rest == "x" || rest == "(x)" {
            return Ok(1);
        }
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix("x)"))
            .ok_or_else(|| Error::Parse(format!("cannot read {func:?}")))?;
        let k: i32 = inner.parse().map_err(|_| Error::Parse(format!("cannot read frequency in {func:?}")))?;
        if k <= 0 || k > MAX_DEGREE {
            return Err(Error::Parse(format!("frequency {k} outside 1..={MAX_DEGREE}")));
        }
        Ok(k)
    };
    let half = coef.clone() / q(2, 1);
    let zero = BigRational::zero();
    if func == "1" {
        Ok(Fourier::constant(qc(coef, zero)))
    } else if func.starts_with("sin") {
        // sin kx = (e^{ikx} - e^{-ikx}) / 2i
        let k = freq("sin")?;
        Ok(Fourier::from_coeffs([
            (k, qc(zero.clone(), -half.clone())),
            (-k, qc(zero, half)),
        ]))
    } else if func.starts_with("cos") {
        let k = freq("cos")?;
        Ok(Fourier::from_coeffs([(k, qc(half.clone(), zero.clone())), (-k, qc(half, zero))]))
    } else {
        Err(Error::Parse(format!("unknown function {func:?}")))
    }
}
