//! Integer polynomials without constant term and the transforms used to
//! move between configurations: `p(n + y) - p(y)` and `p(y n)`.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A polynomial `Σ c_i d^i` with integer coefficients and `c_0 = 0`.
///
/// `coeffs[i]` is the coefficient of degree `i`. Trailing zeros are trimmed,
/// so the zero polynomial is stored as `[0]` and equality is equality of
/// coefficient sequences.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
    // Machine-word copy of `coeffs` when every coefficient fits in i64.
    small: Option<Vec<i64>>,
}

impl IntPoly {
    /// Build from coefficients in ascending degree. Fails on a nonzero
    /// constant term.
    pub fn new(mut coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        if !coeffs[0].is_zero() {
            return Err(Error::ConstantTerm(coeffs[0].to_string()));
        }
        Ok(Self::from_trusted(coeffs))
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn from_trusted(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let small = coeffs.iter().map(ToPrimitive::to_i64).collect();
        IntPoly { coeffs, small }
    }

    pub fn zero() -> Self {
        Self::from_trusted(vec![BigInt::zero()])
    }

    /// The identity polynomial `d`.
    pub fn identity() -> Self {
        Self::monomial(BigInt::one(), 1)
    }

    /// `c · d^k` for `k ≥ 1`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        assert!(k >= 1, "monomial degree must be positive");
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::from_trusted(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exact value at `x`.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Value at `x` when it fits in an `i64`; `None` on overflow.
    pub fn eval_i64(&self, x: i64) -> Option<i64> {
        match &self.small {
            Some(cs) => cs
                .iter()
                .rev()
                .try_fold(0i64, |acc, &c| acc.checked_mul(x)?.checked_add(c)),
            None => self.eval(&BigInt::from(x)).to_i64(),
        }
    }

    /// `n ↦ p(n + y) − p(y)`.
    pub fn shift(&self, y: &BigInt) -> IntPoly {
        // Taylor shift: coefficient k of p(n+y) is Σ_{i≥k} c_i C(i,k) y^(i-k).
        let deg = self.degree();
        let mut out = vec![BigInt::zero(); deg + 1];
        let mut powers = Vec::with_capacity(deg + 1);
        let mut pw = BigInt::one();
        for _ in 0..=deg {
            powers.push(pw.clone());
            pw *= y;
        }
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let mut binom = BigInt::one();
            for k in 0..=i {
                if k > 0 {
                    binom = binom * BigInt::from(i - k + 1) / BigInt::from(k);
                }
                out[k] += c * &binom * &powers[i - k];
            }
        }
        out[0] = BigInt::zero();
        Self::from_trusted(out)
    }

    /// `n ↦ p(y · n)`.
    pub fn dilate(&self, y: &BigInt) -> IntPoly {
        let mut pw = BigInt::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * &pw;
                pw *= y;
                v
            })
            .collect();
        Self::from_trusted(coeffs)
    }

    /// `(deg(p), coef(p))`, where `coef` is the largest absolute coefficient.
    /// The zero polynomial gives `(0, 0)`.
    pub fn deg_coef(&self) -> (usize, BigUint) {
        let coef = self
            .coeffs
            .iter()
            .map(|c| c.abs().to_biguint().unwrap_or_default())
            .max()
            .unwrap_or_default();
        (self.degree(), coef)
    }

    /// Sum of absolute values of the coefficients below the leading one.
    pub(crate) fn lower_abs_sum(&self) -> BigInt {
        let deg = self.degree();
        self.coeffs[..deg].iter().map(Signed::abs).sum()
    }
}

impl fmt::Display for IntPoly {
    /// Ascending-degree form, e.g. `3*d+d^2`, `-d^3`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if neg {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            let mag = c.abs();
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            f.write_str("d")?;
            if k > 1 {
                write!(f, "^{k}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({self})")
    }
}

impl FromStr for IntPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_poly(s)
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_poly(&text).map_err(serde::de::Error::custom)
    }
}

/// Parse the polynomial mini-language: terms `c*d^k`, `d^k`, `c*d`, `cd`,
/// `d`, or a bare constant, joined by `+`/`-`. Whitespace is ignored and
/// like terms are combined. A nonzero constant term is rejected.
pub fn parse_poly(text: &str) -> Result<IntPoly> {
    let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |reason: String| Error::PolySyntax {
        text: text.to_string(),
        reason,
    };
    if src.is_empty() {
        return Err(err("empty input".into()));
    }
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero()];
    let mut i = 0;
    let mut first = true;
    while i < src.len() {
        let mut sign = BigInt::one();
        match src[i] {
            '+' => i += 1,
            '-' => {
                sign = -sign;
                i += 1;
            }
            _ if first => {}
            c => return Err(err(format!("expected '+' or '-' at {c:?} (offset {i})"))),
        }
        first = false;
        let start = i;
        while i < src.len() && src[i].is_ascii_digit() {
            i += 1;
        }
        let digits: String = src[start..i].iter().collect();
        let has_coef = !digits.is_empty();
        let coef = if has_coef {
            digits.parse::<BigInt>().map_err(|e| err(e.to_string()))?
        } else {
            BigInt::one()
        };
        if has_coef && i < src.len() && src[i] == '*' {
            i += 1;
            if i >= src.len() || src[i] != 'd' {
                return Err(err(format!("expected 'd' after '*' (offset {i})")));
            }
        }
        let degree = if i < src.len() && src[i] == 'd' {
            i += 1;
            if i < src.len() && src[i] == '^' {
                i += 1;
                let s = i;
                while i < src.len() && src[i].is_ascii_digit() {
                    i += 1;
                }
                if s == i {
                    return Err(err(format!("missing exponent after '^' (offset {s})")));
                }
                let k: String = src[s..i].iter().collect();
                k.parse::<usize>().map_err(|e| err(e.to_string()))?
            } else {
                1
            }
        } else if has_coef {
            0
        } else {
            let found = src.get(i).map_or("end of input".to_string(), |c| format!("{c:?}"));
            return Err(err(format!("expected a term, found {found} (offset {i})")));
        };
        if coeffs.len() <= degree {
            coeffs.resize(degree + 1, BigInt::zero());
        }
        coeffs[degree] += sign * coef;
    }
    IntPoly::new(coeffs)
}

/// A nonempty finite set of polynomials in a fixed order, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<IntPoly>", into = "Vec<IntPoly>")]
pub struct PolyFamily {
    polys: Vec<IntPoly>,
}

impl PolyFamily {
    pub fn new(polys: Vec<IntPoly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for (i, p) in polys.iter().enumerate() {
            if polys[..i].contains(p) {
                return Err(Error::DuplicateFamilyMember(p.to_string()));
            }
        }
        Ok(PolyFamily { polys })
    }

    /// Parse a comma-separated list such as `d, 2*d, d^2`.
    pub fn parse_list(text: &str) -> Result<Self> {
        let polys = text
            .split(',')
            .map(parse_poly)
            .collect::<Result<Vec<_>>>()?;
        Self::new(polys)
    }

    pub fn polys(&self) -> &[IntPoly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IntPoly> {
        self.polys.iter()
    }

    /// `{d, 2d, …, (k−1)d}`: with the anchor this is a k-term progression.
    pub fn progression(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("progression length must be at least 2"));
        }
        Self::new(
            (1..k)
                .map(|i| IntPoly::monomial(BigInt::from(i), 1))
                .collect(),
        )
    }

    /// Largest `d` for which some configuration can fit in `[1..n]`:
    /// beyond it every nonzero member leaves the window.
    pub(crate) fn max_step(&self, n: usize) -> usize {
        // For d > n + Σ_{i<k}|c_i| we get |p(d)| ≥ d^(k-1) (d − Σ) > n.
        self.polys
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| {
                (p.lower_abs_sum() + BigInt::from(n))
                    .to_usize()
                    .unwrap_or(usize::MAX)
            })
            .min()
            .unwrap_or(1)
            .max(1)
    }
}

impl TryFrom<Vec<IntPoly>> for PolyFamily {
    type Error = Error;
    fn try_from(v: Vec<IntPoly>) -> Result<Self> {
        PolyFamily::new(v)
    }
}

impl From<PolyFamily> for Vec<IntPoly> {
    fn from(f: PolyFamily) -> Self {
        f.polys
    }
}

impl<'a> IntoIterator for &'a PolyFamily {
    type Item = &'a IntPoly;
    type IntoIter = std::slice::Iter<'a, IntPoly>;
    fn into_iter(self) -> Self::IntoIter {
        self.polys.iter()
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.polys.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Every `p` with `deg(p) ≤ deg_bound` and `coef(p) ≤ coef_bound`.
///
/// The zero polynomial is included only when `include_zero` is set. The
/// family has `(2·coef_bound + 1)^deg_bound` members (one fewer without the
/// zero polynomial); building more than `cap` of them is an error.
pub fn enumerate_family(
    deg_bound: usize,
    coef_bound: u64,
    include_zero: bool,
    cap: u64,
) -> Result<PolyFamily> {
    if deg_bound == 0 && !include_zero {
        return Err(Error::EmptyFamily);
    }
    let width = BigUint::from(2 * coef_bound + 1);
    let total: BigUint = num_traits::pow(width, deg_bound);
    let count = if include_zero {
        total
    } else {
        total - BigUint::one()
    };
    if count > BigUint::from(cap) {
        return Err(Error::FamilyTooLarge {
            count: count.to_string(),
            cap,
        });
    }
    if count.is_zero() {
        return Err(Error::EmptyFamily);
    }
    let lo = -(coef_bound as i64);
    let hi = coef_bound as i64;
    // Odometer over (c_1, …, c_deg), c_1 fastest, each from -coef to +coef.
    let mut digits = vec![lo; deg_bound];
    let mut polys = Vec::new();
    loop {
        let mut coeffs = vec![BigInt::zero()];
        coeffs.extend(digits.iter().map(|&c| BigInt::from(c)));
        let p = IntPoly::from_trusted(coeffs);
        if include_zero || !p.is_zero() {
            polys.push(p);
        }
        let mut pos = 0;
        loop {
            if pos == deg_bound {
                return PolyFamily::new(polys);
            }
            if digits[pos] < hi {
                digits[pos] += 1;
                break;
            }
            digits[pos] = lo;
            pos += 1;
        }
    }
}
