//! Exact Laurent polynomials in one variable `t` and 2×2 matrices over them.
//!
//! Coefficients are machine integers until an operation would overflow, then
//! arbitrary-precision integers: Burau images of long pseudo-Anosov words grow
//! exponentially and leave `i64` range well before a hundred letters.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient storage. Canonical: `Small` whenever every coefficient fits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Coeffs {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

impl Default for Coeffs {
    fn default() -> Self {
        Coeffs::Small(Vec::new())
    }
}

/// A Laurent polynomial `Σ c_k t^k`, stored densely from its lowest exponent.
///
/// Normalized: no leading or trailing zero coefficients; the zero polynomial
/// has no coefficients and `low == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    low: i32,
    coeffs: Coeffs,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `c · t^k`
    pub fn monomial(c: i64, k: i32) -> Self {
        Self::from_small(k, vec![c])
    }

    pub fn from_coeffs(low: i32, coeffs: Vec<BigInt>) -> Self {
        let (low, mut coeffs) = trim(low, coeffs);
        match coeffs.iter().map(ToPrimitive::to_i64).collect::<Option<Vec<i64>>>() {
            Some(small) => Self { low, coeffs: Coeffs::Small(small) },
            None => {
                coeffs.shrink_to_fit();
                Self { low, coeffs: Coeffs::Big(coeffs) }
            }
        }
    }

    fn from_small(low: i32, coeffs: Vec<i64>) -> Self {
        let (low, coeffs) = trim(low, coeffs);
        Self { low, coeffs: Coeffs::Small(coeffs) }
    }

    fn len(&self) -> usize {
        match &self.coeffs {
            Coeffs::Small(c) => c.len(),
            Coeffs::Big(c) => c.len(),
        }
    }

    fn to_big(&self) -> Vec<BigInt> {
        match &self.coeffs {
            Coeffs::Small(c) => c.iter().map(|&v| BigInt::from(v)).collect(),
            Coeffs::Big(c) => c.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.len() == 0
    }

    pub fn low_degree(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.low)
    }

    pub fn high_degree(&self) -> Option<i32> {
        (!self.is_zero()).then(|| self.low + self.len() as i32 - 1)
    }

    pub fn coeff(&self, k: i32) -> BigInt {
        let idx = k - self.low;
        if idx < 0 {
            return BigInt::zero();
        }
        match &self.coeffs {
            Coeffs::Small(c) => c.get(idx as usize).map_or_else(BigInt::zero, |&v| BigInt::from(v)),
            Coeffs::Big(c) => c.get(idx as usize).cloned().unwrap_or_default(),
        }
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> Vec<(i32, BigInt)> {
        self.to_big()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.low + i as i32, c))
            .collect()
    }

    /// Multiply by `±t^k`; the cheap path used by generator images.
    pub fn shifted(&self, k: i32, negate: bool) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let low = self.low + k;
        if !negate {
            return Self { low, coeffs: self.coeffs.clone() };
        }
        if let Coeffs::Small(c) = &self.coeffs {
            if let Some(neg) = c.iter().map(|v| v.checked_neg()).collect::<Option<Vec<i64>>>() {
                return Self { low, coeffs: Coeffs::Small(neg) };
            }
        }
        Self::from_coeffs(low, self.to_big().into_iter().map(|c| -c).collect())
    }

    /// True when the polynomial is `±t^k`, a unit of `Z[t, t^-1]`.
    pub fn is_unit(&self) -> bool {
        match &self.coeffs {
            Coeffs::Small(c) => c.len() == 1 && c[0].unsigned_abs() == 1,
            Coeffs::Big(c) => c.len() == 1 && c[0].abs().is_one(),
        }
    }

    /// Largest absolute coefficient, for growth diagnostics.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.to_big().iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    fn combine(&self, other: &Self, negate_other: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate_other { -other.clone() } else { other.clone() };
        }
        let low = self.low.min(other.low);
        let high = self.high_degree().unwrap().max(other.high_degree().unwrap());
        let width = (high - low + 1) as usize;
        let (so, oo) = ((self.low - low) as usize, (other.low - low) as usize);
        if let (Coeffs::Small(a), Coeffs::Small(b)) = (&self.coeffs, &other.coeffs) {
            let mut out = vec![0i64; width];
            out[so..so + a.len()].copy_from_slice(a);
            let ok = b.iter().enumerate().all(|(i, &v)| {
                let slot = &mut out[oo + i];
                let r = if negate_other { slot.checked_sub(v) } else { slot.checked_add(v) };
                r.map(|r| *slot = r).is_some()
            });
            if ok {
                return Self::from_small(low, out);
            }
        }
        let mut out = vec![BigInt::zero(); width];
        for (i, c) in self.to_big().into_iter().enumerate() {
            out[so + i] += c;
        }
        for (i, c) in other.to_big().into_iter().enumerate() {
            if negate_other {
                out[oo + i] -= c;
            } else {
                out[oo + i] += c;
            }
        }
        Self::from_coeffs(low, out)
    }
}

fn trim<T: Zero>(mut low: i32, mut coeffs: Vec<T>) -> (i32, Vec<T>) {
    while coeffs.last().is_some_and(Zero::is_zero) {
        coeffs.pop();
    }
    let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
    if lead > 0 {
        coeffs.drain(..lead);
        low += lead as i32;
    }
    if coeffs.is_empty() {
        low = 0;
    }
    (low, coeffs)
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        self.combine(rhs, false)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        self.combine(rhs, true)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.shifted(0, true)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: Self) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let low = self.low + rhs.low;
        let width = self.len() + rhs.len() - 1;
        if let (Coeffs::Small(a), Coeffs::Small(b)) = (&self.coeffs, &rhs.coeffs) {
            let mut acc = vec![0i128; width];
            let mut ok = true;
            'outer: for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    match acc[i + j].checked_add(i128::from(x) * i128::from(y)) {
                        Some(v) => acc[i + j] = v,
                        None => {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            if ok {
                if let Some(out) = acc.iter().map(|&v| i64::try_from(v).ok()).collect::<Option<Vec<i64>>>() {
                    return LaurentPoly::from_small(low, out);
                }
            }
        }
        let (a, b) = (self.to_big(), rhs.to_big());
        let mut out = vec![BigInt::zero(); width];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        LaurentPoly::from_coeffs(low, out)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            let c = &c;
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{mag}t")?,
                (_, true) => write!(f, "t^{k}")?,
                (_, false) => write!(f, "{mag}t^{k}")?,
            }
        }
        Ok(())
    }
}

/// A 2×2 matrix over `Z[t, t^-1]`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentMatrix {
    pub entries: [[LaurentPoly; 2]; 2],
}

impl LaurentMatrix {
    pub fn new(a: LaurentPoly, b: LaurentPoly, c: LaurentPoly, d: LaurentPoly) -> Self {
        Self { entries: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::new(LaurentPoly::one(), LaurentPoly::zero(), LaurentPoly::zero(), LaurentPoly::one())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn determinant(&self) -> LaurentPoly {
        let [[a, b], [c, d]] = &self.entries;
        &(a * d) - &(b * c)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.entries.iter().flatten().map(LaurentPoly::max_abs_coeff).max().unwrap_or_default()
    }
}

impl Mul for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn mul(self, rhs: Self) -> LaurentMatrix {
        let l = &self.entries;
        let r = &rhs.entries;
        let cell = |i: usize, j: usize| &(&l[i][0] * &r[0][j]) + &(&l[i][1] * &r[1][j]);
        LaurentMatrix::new(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1))
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = &self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(low: i32, cs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(low, cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn normalization_strips_zeros() {
        let q = p(-2, &[0, 0, 3, 0]);
        assert_eq!(q.low_degree(), Some(0));
        assert_eq!(q.high_degree(), Some(0));
        assert_eq!(q, LaurentPoly::monomial(3, 0));
        assert!(p(5, &[0, 0]).is_zero());
        assert_eq!(p(5, &[0]), LaurentPoly::zero());
    }

    #[test]
    fn arithmetic() {
        // (1 + t)(1 - t) = 1 - t^2
        let a = p(0, &[1, 1]);
        let b = p(0, &[1, -1]);
        assert_eq!(&a * &b, p(0, &[1, 0, -1]));
        // t^-1 * t = 1
        assert_eq!(&LaurentPoly::monomial(1, -1) * &LaurentPoly::monomial(1, 1), LaurentPoly::one());
        assert!((&a - &a).is_zero());
        assert_eq!(&a + &(-a.clone()), LaurentPoly::zero());
        assert_eq!(a.shifted(-3, true), p(-3, &[-1, -1]));
    }

    #[test]
    fn display() {
        assert_eq!(p(-1, &[-1, 2, 0, 1]).to_string(), "-t^-1 + 2 + t^2");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = LaurentPoly::monomial(i64::MAX, 0);
        let sum = &big + &big;
        assert_eq!(sum.coeff(0), BigInt::from(i64::MAX) * 2);
        assert_eq!(&sum - &big, big);
        assert!(matches!((&sum - &big).coeffs, Coeffs::Small(_)));
        let sq = &big * &big;
        assert_eq!(sq.coeff(0), BigInt::from(i64::MAX) * BigInt::from(i64::MAX));
        let min = LaurentPoly::monomial(i64::MIN, 3);
        assert_eq!((-min.clone()).coeff(3), -BigInt::from(i64::MIN));
        assert_eq!(-(-min.clone()), min);
        assert_eq!(LaurentPoly::from_coeffs(0, vec![BigInt::from(5)]), LaurentPoly::monomial(5, 0));
    }

    #[test]
    fn units() {
        assert!(LaurentPoly::monomial(-1, 7).is_unit());
        assert!(!LaurentPoly::monomial(2, 0).is_unit());
        assert!(!p(0, &[1, 1]).is_unit());
    }
}
