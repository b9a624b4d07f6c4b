//! Exact ground fields: the rationals, prime fields GF(p) and binary
//! extension fields GF(2^k).
//!
//! Binary fields use a fixed irreducible modulus for every supported degree
//! so that results are reproducible bit for bit:
//!
//! | k | modulus | k | modulus |
//! |---|---------|---|---------|
//! | 1 | x+1 | 9 | x^9+x^4+1 |
//! | 2 | x^2+x+1 | 10 | x^10+x^3+1 |
//! | 3 | x^3+x+1 | 11 | x^11+x^2+1 |
//! | 4 | x^4+x+1 | 12 | x^12+x^3+1 |
//! | 5 | x^5+x^2+1 | 13 | x^13+x^4+x^3+x+1 |
//! | 6 | x^6+x+1 | 14 | x^14+x^5+1 |
//! | 7 | x^7+x+1 | 15 | x^15+x+1 |
//! | 8 | x^8+x^4+x^3+x+1 | 16 | x^16+x^5+x^3+x+1 |

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Irreducible moduli for GF(2^k), indexed by `k - 1`. Bit `i` is the
/// coefficient of `x^i`.
pub const BINARY_MODULI: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x211, 0x409, 0x805, 0x1009, 0x201B, 0x4021,
    0x8003, 0x1002B,
];

const MAX_PRIME: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("unrecognised field descriptor `{0}` (expected Q, gf<p> or gf2^<k>)")]
    BadDescriptor(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("GF(2^{0}) is not supported (1 <= k <= 16)")]
    UnsupportedDegree(u32),
    #[error("prime {0} exceeds 2^31")]
    PrimeTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    Mismatch(Field, Field),
    #[error("cannot read `{literal}` as an element of {field}")]
    BadLiteral { literal: String, field: Field },
}

/// A ground field. Values are small and `Copy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rationals,
    Prime(u64),
    Binary { k: u32, modulus: u32 },
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p > MAX_PRIME {
            return Err(FieldError::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field::Prime(p))
    }

    pub fn binary(k: u32) -> Result<Self, FieldError> {
        if !(1..=16).contains(&k) {
            return Err(FieldError::UnsupportedDegree(k));
        }
        Ok(Field::Binary {
            k,
            modulus: BINARY_MODULI[(k - 1) as usize],
        })
    }

    /// Parses a descriptor: `Q`, `gf<p>`, `gf2^<k>`. `gf<2^k>` with `k >= 2`
    /// (e.g. `gf4`) names the binary field of that order.
    pub fn parse(desc: &str) -> Result<Self, FieldError> {
        let d = desc.trim();
        if d == "Q" || d == "q" || d == "QQ" {
            return Ok(Field::Rationals);
        }
        let rest = d
            .strip_prefix("gf")
            .or_else(|| d.strip_prefix("GF"))
            .ok_or_else(|| FieldError::BadDescriptor(desc.to_string()))?;
        if let Some(k) = rest.strip_prefix("2^") {
            let k: u32 = k
                .parse()
                .map_err(|_| FieldError::BadDescriptor(desc.to_string()))?;
            return Field::binary(k);
        }
        let q: u64 = rest
            .parse()
            .map_err(|_| FieldError::BadDescriptor(desc.to_string()))?;
        if q > 2 && q.is_power_of_two() {
            return Field::binary(q.trailing_zeros());
        }
        Field::prime(q)
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rationals => 0,
            Field::Prime(p) => *p,
            Field::Binary { .. } => 2,
        }
    }

    /// Number of elements, `None` for the rationals.
    pub fn order(&self) -> Option<u64> {
        match self {
            Field::Rationals => None,
            Field::Prime(p) => Some(*p),
            Field::Binary { k, .. } => Some(1u64 << k),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    /// The image of an integer under the canonical map Z -> F.
    pub fn from_i64(&self, n: i64) -> Scalar {
        let value = match self {
            Field::Rationals => Value::Rat(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Value::Mod(n.rem_euclid(*p as i64) as u64),
            Field::Binary { .. } => Value::Poly((n.rem_euclid(2)) as u32),
        };
        Scalar { field: *self, value }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        let value = match self {
            Field::Rationals => Value::Rat(BigRational::from_integer(n.clone())),
            Field::Prime(p) => {
                let r = n.mod_floor_positive(*p);
                Value::Mod(r)
            }
            Field::Binary { .. } => Value::Poly(n.mod_floor_positive(2) as u32),
        };
        Scalar { field: *self, value }
    }

    /// Rational `num/den`, `None` if `den` vanishes in this field.
    pub fn ratio(&self, num: i64, den: i64) -> Option<Scalar> {
        let d = self.from_i64(den);
        if d.is_zero() {
            return None;
        }
        Some(&self.from_i64(num) * &d.inv().ok()?)
    }

    /// Element of GF(2^k) from its bit pattern (reduced modulo the modulus).
    pub fn from_bits(&self, bits: u32) -> Scalar {
        match self {
            Field::Binary { k, modulus } => Scalar {
                field: *self,
                value: Value::Poly(poly_reduce(bits as u64, *k, *modulus)),
            },
            _ => self.from_i64(bits as i64),
        }
    }

    /// Parses a scalar literal: integers, `a/b`, and for binary fields
    /// polynomials in `x` such as `x^2+x+1`.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar, FieldError> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || FieldError::BadLiteral {
            literal: text.to_string(),
            field: *self,
        };
        if t.is_empty() {
            return Err(bad());
        }
        if let Field::Binary { .. } = self {
            if t.contains('x') {
                return self.parse_binary_poly(&t).ok_or_else(bad);
            }
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t.as_str()),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let num = BigInt::from_str(num).map_err(|_| bad())?;
        let mut s = self.from_bigint(&num);
        if let Some(d) = den {
            let d = BigInt::from_str(d).map_err(|_| bad())?;
            let d = self.from_bigint(&d);
            s = s.div(&d).map_err(|_| bad())?;
        }
        Ok(if neg { -s } else { s })
    }

    fn parse_binary_poly(&self, t: &str) -> Option<Scalar> {
        let mut bits = 0u64;
        for mono in t.split('+') {
            let e = if mono == "1" {
                0
            } else if mono == "0" {
                continue;
            } else if mono == "x" {
                1
            } else {
                mono.strip_prefix("x^")?.parse::<u32>().ok()?
            };
            if e >= 40 {
                return None;
            }
            bits ^= 1 << e;
        }
        let Field::Binary { k, modulus } = self else {
            return None;
        };
        Some(Scalar {
            field: *self,
            value: Value::Poly(poly_reduce(bits, *k, *modulus)),
        })
    }

    /// Every element of a finite field, in a fixed order.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        match self {
            Field::Rationals => None,
            Field::Prime(p) => Some((0..*p).map(|i| self.from_i64(i as i64)).collect()),
            Field::Binary { k, .. } => Some((0..(1u32 << k)).map(|b| self.from_bits(b)).collect()),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "Q"),
            Field::Prime(p) => write!(f, "gf{p}"),
            Field::Binary { k, .. } => write!(f, "gf2^{k}"),
        }
    }
}

impl FromStr for Field {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::parse(s)
    }
}

trait ModFloor {
    fn mod_floor_positive(&self, m: u64) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_positive(&self, m: u64) -> u64 {
        let m = BigInt::from(m);
        let r = ((self % &m) + &m) % &m;
        u64::try_from(r).expect("residue fits in u64")
    }
}

fn poly_reduce(mut a: u64, k: u32, modulus: u32) -> u32 {
    let m = modulus as u64;
    for bit in (k..64).rev() {
        if a >> bit & 1 == 1 {
            a ^= m << (bit - k);
        }
    }
    a as u32
}

fn poly_mulmod(a: u32, b: u32, k: u32, modulus: u32) -> u32 {
    let mut acc = 0u64;
    for i in 0..k {
        if b >> i & 1 == 1 {
            acc ^= (a as u64) << i;
        }
    }
    poly_reduce(acc, k, modulus)
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Value {
    Rat(BigRational),
    Mod(u64),
    Poly(u32),
}

/// An exact field element in canonical form (reduced fraction, least
/// residue, or reduced polynomial).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    field: Field,
    value: Value,
}

/// Arithmetic operation selector for [`field_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic on two scalars of the same field.
pub fn field_arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar, FieldError> {
    a.check_same(b)?;
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.div(b),
    }
}

impl Scalar {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_zero(),
            Value::Mod(m) => *m == 0,
            Value::Poly(p) => *p == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Rat(r) => r.is_one(),
            Value::Mod(m) => *m == 1,
            Value::Poly(p) => *p == 1,
        }
    }

    /// True when the printed form starts with a minus sign.
    pub fn is_negative(&self) -> bool {
        matches!(&self.value, Value::Rat(r) if r.is_negative())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.value {
            Value::Rat(r) => Some(r),
            _ => None,
        }
    }

    /// Residue for prime fields, bit pattern for binary fields.
    pub fn as_u64(&self) -> Option<u64> {
        match &self.value {
            Value::Mod(m) => Some(*m),
            Value::Poly(p) => Some(*p as u64),
            Value::Rat(_) => None,
        }
    }

    pub fn check_same(&self, other: &Scalar) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::Mismatch(self.field, other.field))
        }
    }

    /// Re-reduces the stored value. Values are always kept canonical, so
    /// this is the identity on well-formed scalars.
    pub fn canonicalize(&self) -> Scalar {
        let value = match (&self.value, self.field) {
            (Value::Rat(r), _) => Value::Rat(BigRational::new(r.numer().clone(), r.denom().clone())),
            (Value::Mod(m), Field::Prime(p)) => Value::Mod(m % p),
            (Value::Poly(b), Field::Binary { k, modulus }) => {
                Value::Poly(poly_reduce(*b as u64, k, modulus))
            }
            (v, _) => v.clone(),
        };
        Scalar {
            field: self.field,
            value,
        }
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let value = match (&self.value, self.field) {
            (Value::Rat(r), _) => Value::Rat(r.recip()),
            (Value::Mod(m), Field::Prime(p)) => Value::Mod(pow_mod(*m, p - 2, p)),
            (Value::Poly(_), Field::Binary { k, .. }) => {
                // a^(2^k - 2)
                return Ok(self.pow((1u64 << k) - 2));
            }
            _ => unreachable!("value kind matches field"),
        };
        Ok(Scalar {
            field: self.field,
            value,
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.check_same(other)?;
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut exp: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// Integer power, negative exponents through the inverse.
    pub fn powi(&self, exp: i64) -> Result<Scalar, FieldError> {
        if exp >= 0 {
            Ok(self.pow(exp as u64))
        } else {
            Ok(self.inv()?.pow(exp.unsigned_abs()))
        }
    }

    /// A square root when one exists in the field.
    ///
    /// GF(2^k): always `a^(2^(k-1))`. Q: only when numerator and denominator
    /// are perfect squares. GF(p), p odd: Tonelli-Shanks.
    pub fn sqrt(&self) -> Option<Scalar> {
        match (&self.value, self.field) {
            (Value::Rat(r), _) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Some(Scalar {
                        field: self.field,
                        value: Value::Rat(BigRational::new(n, d)),
                    })
                } else {
                    None
                }
            }
            (Value::Poly(_), Field::Binary { k, .. }) => {
                let mut s = self.clone();
                for _ in 0..k - 1 {
                    s = &s * &s;
                }
                Some(s)
            }
            (Value::Mod(a), Field::Prime(p)) => {
                tonelli_shanks(*a, p).map(|r| Scalar {
                    field: self.field,
                    value: Value::Mod(r),
                })
            }
            _ => unreachable!("value kind matches field"),
        }
    }

    fn binop(&self, other: &Scalar, op: ArithOp) -> Scalar {
        assert_eq!(
            self.field, other.field,
            "scalar arithmetic across different fields"
        );
        let value = match (&self.value, &other.value, self.field) {
            (Value::Rat(a), Value::Rat(b), _) => Value::Rat(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => a / b,
            }),
            (Value::Mod(a), Value::Mod(b), Field::Prime(p)) => Value::Mod(match op {
                ArithOp::Add => (a + b) % p,
                ArithOp::Sub => (a + p - b) % p,
                ArithOp::Mul => a * b % p,
                ArithOp::Div => a * pow_mod(*b, p - 2, p) % p,
            }),
            (Value::Poly(a), Value::Poly(b), Field::Binary { k, modulus }) => Value::Poly(match op {
                ArithOp::Add | ArithOp::Sub => a ^ b,
                ArithOp::Mul => poly_mulmod(*a, *b, k, modulus),
                ArithOp::Div => unreachable!("division goes through inv"),
            }),
            _ => unreachable!("value kind matches field"),
        };
        Scalar {
            field: self.field,
            value,
        }
    }
}

fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % p;
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r.min(p - r))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Mod(m) => write!(f, "{m}"),
            Value::Poly(bits) => {
                if *bits == 0 {
                    return write!(f, "0");
                }
                let mut parts = Vec::new();
                for e in (0..32).rev() {
                    if bits >> e & 1 == 1 {
                        parts.push(match e {
                            0 => "1".to_string(),
                            1 => "x".to_string(),
                            _ => format!("x^{e}"),
                        });
                    }
                }
                write!(f, "{}", parts.join("+"))
            }
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.binop(rhs, $op)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.binop(&rhs, $op)
            }
        }
    };
}

forward_binop!(Add, add, ArithOp::Add);
forward_binop!(Sub, sub, ArithOp::Sub);
forward_binop!(Mul, mul, ArithOp::Mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        &self.field.zero() - self
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}
