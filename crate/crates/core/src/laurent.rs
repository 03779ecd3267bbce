//! Truncated Laurent series over ℚ(i).
//!
//! A series is either an exact Laurent polynomial or is known modulo
//! `z^abs_prec`. Order-of-vanishing questions that the known coefficients
//! cannot answer are reported as [`Error::PrecisionExhausted`], never guessed.

use std::cmp::{max, min};
use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;

/// Relative precision used when an exact series has to be inverted.
pub const DEFAULT_PRECISION: u32 = 16;

/// Largest |z| at which a truncated series may be evaluated.
pub const EVAL_RADIUS: f64 = 0.1;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    // exponent of coeffs[0]; equals abs_prec when a truncated series has no
    // known nonzero coefficient
    lead: i64,
    coeffs: Vec<GaussianRational>,
    // known modulo z^abs_prec; None for an exact Laurent polynomial
    abs_prec: Option<i64>,
}

impl LaurentSeries {
    fn normalized(lead: i64, mut coeffs: Vec<GaussianRational>, abs_prec: Option<i64>) -> Self {
        if let Some(n) = abs_prec {
            let keep = (n - lead).clamp(0, coeffs.len() as i64) as usize;
            coeffs.truncate(keep);
        }
        let skip = coeffs.iter().take_while(|c| c.is_zero()).count();
        if skip == coeffs.len() {
            return match abs_prec {
                None => Self::zero(),
                Some(n) => Self { lead: n, coeffs: Vec::new(), abs_prec: Some(n) },
            };
        }
        coeffs.drain(..skip);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { lead: lead + skip as i64, coeffs, abs_prec }
    }

    /// Truncated series `Σ coeffs[j] z^(lead+j) + O(z^(lead+prec))`.
    pub fn new(lead: i64, coeffs: Vec<GaussianRational>, prec: u32) -> Self {
        Self::normalized(lead, coeffs, Some(lead + prec as i64))
    }

    /// Exact Laurent polynomial `Σ coeffs[j] z^(lead+j)`.
    pub fn polynomial(lead: i64, coeffs: Vec<GaussianRational>) -> Self {
        Self::normalized(lead, coeffs, None)
    }

    /// Exact Laurent polynomial from `(exponent, coefficient)` terms; repeated
    /// exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, GaussianRational)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Self::zero();
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![GaussianRational::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = &*slot + &c;
        }
        Self::polynomial(lo, coeffs)
    }

    pub fn zero() -> Self {
        Self { lead: 0, coeffs: Vec::new(), abs_prec: None }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::polynomial(0, vec![c])
    }

    pub fn from_integer(n: i64) -> Self {
        Self::constant(GaussianRational::from_integer(n))
    }

    /// `c·z^exp`, exact.
    pub fn monomial(c: GaussianRational, exp: i64) -> Self {
        Self::polynomial(exp, vec![c])
    }

    /// `z^exp`, exact.
    pub fn z_pow(exp: i64) -> Self {
        Self::monomial(GaussianRational::one(), exp)
    }

    /// Exponent of the first known nonzero coefficient.
    pub fn lead(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.lead)
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    /// Known coefficient of `z^n`; `None` when `n` lies beyond the precision window.
    pub fn coeff(&self, n: i64) -> Option<GaussianRational> {
        if self.abs_prec.is_some_and(|p| n >= p) {
            return None;
        }
        let idx = n - self.lead;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            return Some(GaussianRational::zero());
        }
        Some(self.coeffs[idx as usize].clone())
    }

    /// Relative precision; `None` for exact series.
    pub fn prec(&self) -> Option<i64> {
        self.abs_prec.map(|n| n - self.lead)
    }

    /// The series is known modulo `z^n`; `None` for exact series.
    pub fn abs_precision(&self) -> Option<i64> {
        self.abs_prec
    }

    pub fn is_exact(&self) -> bool {
        self.abs_prec.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.abs_prec.is_none() && self.coeffs.is_empty()
    }

    /// True when every known coefficient vanishes, exact zero included.
    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact constant 1.
    pub fn is_exact_one(&self) -> bool {
        self.abs_prec.is_none() && self.lead == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Order of vanishing; `Ok(None)` stands for +∞ (the exact zero series).
    pub fn ord(&self) -> Result<Option<i64>> {
        match (self.coeffs.is_empty(), self.abs_prec) {
            (false, _) => Ok(Some(self.lead)),
            (true, None) => Ok(None),
            (true, Some(n)) => Err(Error::PrecisionExhausted(format!("all coefficients below z^{n} vanish"))),
        }
    }

    /// A certified lower bound for the order; `None` for the exact zero.
    pub fn ord_lower_bound(&self) -> Option<i64> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.lead)
        }
    }

    /// Drops every term at or beyond `z^n`.
    pub fn truncate_abs(&self, n: i64) -> Self {
        let n = self.abs_prec.map_or(n, |p| min(p, n));
        Self::normalized(self.lead, self.coeffs.clone(), Some(n))
    }

    /// Keeps `prec` terms past the lead (or past the lower bound for a
    /// series vanishing to known precision).
    pub fn truncate(&self, prec: u32) -> Self {
        self.truncate_abs(self.lead + prec as i64)
    }

    pub fn neg(&self) -> Self {
        Self { lead: self.lead, coeffs: self.coeffs.iter().map(|c| -c).collect(), abs_prec: self.abs_prec }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let abs_prec = min_opt(self.abs_prec, other.abs_prec);
        let lo = min(self.lead, other.lead);
        let mut hi = max(self.end(), other.end());
        if let Some(n) = abs_prec {
            hi = min(hi, n);
        }
        if hi <= lo {
            return Self::normalized(lo, Vec::new(), abs_prec);
        }
        let mut out = vec![GaussianRational::zero(); (hi - lo) as usize];
        for s in [self, other] {
            for (j, c) in s.coeffs.iter().enumerate() {
                let e = s.lead + j as i64;
                if e < hi {
                    let slot = &mut out[(e - lo) as usize];
                    *slot = &*slot + c;
                }
            }
        }
        Self::normalized(lo, out, abs_prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        let abs_prec = min_opt(self.abs_prec.map(|n| n + other.lead), other.abs_prec.map(|n| n + self.lead));
        let lead = self.lead + other.lead;
        let mut len = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        if let Some(n) = abs_prec {
            len = min(len as i64, max(n - lead, 0)) as usize;
        }
        let mut out = vec![GaussianRational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                let slot = &mut out[i + j];
                *slot = &*slot + &(a * b);
            }
        }
        Self::normalized(lead, out, abs_prec)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { lead: self.lead, coeffs: self.coeffs.iter().map(|x| x * c).collect(), abs_prec: self.abs_prec }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_exact_zero() {
            return Self::zero();
        }
        Self { lead: self.lead + k, coeffs: self.coeffs.clone(), abs_prec: self.abs_prec.map(|n| n + k) }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Reciprocal with [`DEFAULT_PRECISION`] for exact inputs.
    pub fn invert(&self) -> Result<Self> {
        self.invert_with_precision(DEFAULT_PRECISION)
    }

    /// Reciprocal. Exact monomials invert exactly; other exact series are
    /// expanded to `prec` relative terms; truncated series keep their own
    /// relative precision.
    pub fn invert_with_precision(&self, prec: u32) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::ZeroDivision);
        }
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Self::monomial(self.coeffs[0].inv()?, -self.lead));
        }
        let rel = match self.prec() {
            Some(p) => p as usize,
            None => prec as usize,
        };
        let a0_inv = self.coeffs[0].inv()?;
        let mut out: Vec<GaussianRational> = Vec::with_capacity(rel);
        for n in 0..rel {
            if n == 0 {
                out.push(a0_inv.clone());
                continue;
            }
            let mut acc = GaussianRational::zero();
            for k in 1..=n.min(self.coeffs.len() - 1) {
                acc = &acc + &(&self.coeffs[k] * &out[n - k]);
            }
            out.push(-(&acc * &a0_inv));
        }
        Ok(Self::new(-self.lead, out, rel as u32))
    }

    pub fn div(&self, other: &Self, prec: u32) -> Result<Self> {
        Ok(self.mul(&other.invert_with_precision(prec)?))
    }

    /// `self − other` has no known nonzero coefficient.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero_to_precision()
    }

    /// Sum of the known terms at `z`. Truncated series require `|z| ≤ EVAL_RADIUS`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.abs_prec.is_some() && z.norm() > EVAL_RADIUS {
            return Err(Error::Domain(format!(
                "|z| = {} exceeds the evaluation radius {EVAL_RADIUS} of a truncated series",
                z.norm()
            )));
        }
        self.eval_unchecked(z)
    }

    /// As [`eval`](Self::eval) without the radius check.
    pub fn eval_unchecked(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("series evaluated at z = 0".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        // Horner in z from the top term, then scale by z^lead
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.to_complex();
        }
        Ok(acc * z.powi(self.lead as i32))
    }

    fn end(&self) -> i64 {
        self.lead + self.coeffs.len() as i64
    }
}

/// Minimum order over the series that are not exactly zero; `Ok(None)` when
/// all of them are. Fails when a series vanishing to known precision could
/// undercut the certified minimum.
pub fn min_ord<'a, I>(series: I) -> Result<Option<i64>>
where
    I: IntoIterator<Item = &'a LaurentSeries>,
{
    let mut certified: Option<i64> = None;
    let mut uncertain: Option<i64> = None;
    for s in series {
        if s.is_exact_zero() {
            continue;
        }
        if s.is_zero_to_precision() {
            uncertain = min_opt(uncertain, s.abs_prec);
        } else {
            certified = min_opt(certified, Some(s.lead));
        }
    }
    match (certified, uncertain) {
        (Some(c), Some(u)) if u <= c => Err(Error::PrecisionExhausted(format!(
            "a coordinate vanishing below z^{u} may undercut the minimum order {c}"
        ))),
        (None, Some(u)) => Err(Error::PrecisionExhausted(format!("every coordinate vanishes below z^{u}"))),
        (c, _) => Ok(c),
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(min(x, y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Default for LaurentSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let e = self.lead + j as i64;
            if !c.is_real() && !c.re().is_zero() {
                write!(f, "({c})*z^{e}")?;
            } else {
                write!(f, "{c}*z^{e}")?;
            }
        }
        match (first, self.abs_prec) {
            (true, None) => f.write_str("0"),
            (true, Some(n)) => write!(f, "O(z^{n})"),
            (false, Some(n)) => write!(f, " + O(z^{n})"),
            (false, None) => Ok(()),
        }
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
