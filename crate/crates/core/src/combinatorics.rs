//! Exact integer and rational helpers shared by the engines.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// Pascal's triangle up to a fixed row.
#[derive(Clone, Debug)]
pub struct Binomials {
    rows: Vec<Vec<BigUint>>,
}

impl Binomials {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        Binomials { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// C(n, k); zero when k > n. Panics if n exceeds the table.
    pub fn get(&self, n: usize, k: usize) -> BigUint {
        if k > n {
            BigUint::zero()
        } else {
            self.rows[n][k].clone()
        }
    }

    pub fn get_ref(&self, n: usize, k: usize) -> Option<&BigUint> {
        self.rows.get(n).and_then(|r| r.get(k))
    }

    /// C(n, k) for a signed k, zero outside 0..=n.
    pub fn get_signed(&self, n: usize, k: i64) -> BigUint {
        if k < 0 {
            BigUint::zero()
        } else {
            self.get(n, k as usize)
        }
    }
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn ratio(num: BigUint, den: BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

/// Plain decimal rendering rounded half-to-even to `sig` significant
/// digits, without exponent notation and without trailing zeros.
pub fn to_decimal(value: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let a = value.numer().abs();
    let b = value.denom().clone();

    // e = floor(log10(a / b))
    let mut e = a.to_string().len() as i64 - b.to_string().len() as i64;
    let ge = |e: i64| -> bool {
        if e >= 0 {
            a >= &b * pow10(e as u32)
        } else {
            &a * pow10((-e) as u32) >= b
        }
    };
    while !ge(e) {
        e -= 1;
    }
    while ge(e + 1) {
        e += 1;
    }

    let mut scale = sig as i64 - 1 - e;
    let (num, den) = if scale >= 0 {
        (&a * pow10(scale as u32), b.clone())
    } else {
        (a.clone(), &b * pow10((-scale) as u32))
    };
    let (mut q, r) = num.div_rem(&den);
    let twice = &r * 2;
    if twice > den || (twice == den && q.is_odd()) {
        q += 1;
    }
    if q == pow10(sig as u32) {
        q /= 10;
        scale -= 1;
    }

    let digits = q.to_string();
    let mut out = if scale <= 0 {
        let mut s = digits;
        s.extend(std::iter::repeat_n('0', (-scale) as usize));
        s
    } else {
        let scale = scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - scale);
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    };
    if negative {
        out.insert(0, '-');
    }
    out
}
