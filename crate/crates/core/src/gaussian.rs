//! Exact complex numbers with rational real and imaginary parts.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An element of ℚ(i), stored as `(re + im·i) / den` with `den > 0` and
/// `gcd(re, im, den) = 1`, so equal values have equal representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    re: BigInt,
    im: BigInt,
    den: BigInt,
}

impl Default for GaussianRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl GaussianRational {
    fn reduced(mut re: BigInt, mut im: BigInt, mut den: BigInt) -> Self {
        if den.is_negative() {
            re = -re;
            im = -im;
            den = -den;
        }
        if !den.is_one() {
            let g = re.gcd(&im).gcd(&den);
            if !g.is_one() {
                re /= &g;
                im /= &g;
                den /= &g;
            }
        }
        Self { re, im, den }
    }

    pub fn new(re: BigRational, im: BigRational) -> Self {
        let den = re.denom().lcm(im.denom());
        let scale = |q: &BigRational| q.numer() * (&den / q.denom());
        Self::reduced(scale(&re), scale(&im), den)
    }

    pub fn from_integer(n: i64) -> Self {
        Self { re: BigInt::from(n), im: BigInt::zero(), den: BigInt::one() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::reduced(BigInt::from(num), BigInt::zero(), BigInt::from(den))
    }

    pub fn real(re: BigRational) -> Self {
        Self { re: re.numer().clone(), im: BigInt::zero(), den: re.denom().clone() }
    }

    pub fn i() -> Self {
        Self { re: BigInt::zero(), im: BigInt::one(), den: BigInt::one() }
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn re(&self) -> BigRational {
        BigRational::new(self.re.clone(), self.den.clone())
    }

    pub fn im(&self) -> BigRational {
        BigRational::new(self.im.clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero() && self.den.is_one()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im, den: self.den.clone() }
    }

    /// |x|², exact.
    pub fn norm_sqr(&self) -> BigRational {
        BigRational::new(&self.re * &self.re + &self.im * &self.im, &self.den * &self.den)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDivision);
        }
        // den·(re − im·i) / (re² + im²)
        let n = &self.re * &self.re + &self.im * &self.im;
        Ok(Self::reduced(&self.den * &self.re, -(&self.den * &self.im), n))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re, &self.den), ratio_to_f64(&self.im, &self.den))
    }
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    BigRational::new(n.clone(), d.clone()).to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        n.to_f64().unwrap_or(f64::INFINITY) / d.to_f64().unwrap_or(f64::INFINITY)
    })
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(r: BigRational) -> Self {
        Self::real(r)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return GaussianRational::reduced(&self.re + &o.re, &self.im + &o.im, self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        let (a, b) = (&o.den / &g, &self.den / &g);
        GaussianRational::reduced(&self.re * &a + &o.re * &b, &self.im * &a + &o.im * &b, &self.den * &a)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        self + &-o
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.is_zero() || o.is_zero() {
            return GaussianRational::zero();
        }
        let den = &self.den * &o.den;
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::reduced(&self.re * &o.re, BigInt::zero(), den);
        }
        GaussianRational::reduced(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re, den)
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: GaussianRational) -> GaussianRational {
        &self + &o
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: GaussianRational) -> GaussianRational {
        &self - &o
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: GaussianRational) -> GaussianRational {
        &self * &o
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re, im: -self.im, den: self.den }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -&self.re, im: -&self.im, den: self.den.clone() }
    }
}

/// Formats as `a/b`, `a/b*i` or `a/b+c/d*i`; integers drop the denominator.
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (self.re(), self.im());
        match (re.is_zero(), im.is_zero()) {
            (_, true) => write!(f, "{re}"),
            (true, false) => write!(f, "{im}*i"),
            (false, false) => {
                let sign = if im.is_negative() { "-" } else { "+" };
                write!(f, "{re}{sign}{}*i", im.abs())
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
