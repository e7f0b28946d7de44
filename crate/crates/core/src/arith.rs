//! Classical arithmetic functions on positive integers.
//!
//! Conventions used throughout the crate:
//!
//! * `gcd(n, 0) = n`, so a residue `a = 1` contributes `gcd(n, a - 1) = n`.
//! * `Z_1 = {0}` and its unit group is `{0}`; `φ(1) = τ_r(1) = 1`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest modulus accepted by [`factorize`]. Trial division is used, so the
/// practical bound is far lower: around `10^12` before it becomes noticeable.
pub const MAX_FACTORIZE: u64 = i64::MAX as u64;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gcd(n, t_1, ..., t_m)`. Zero terms are neutral and the result divides `n`.
pub fn gcd_many(n: u64, terms: &[u64]) -> u64 {
    debug_assert!(n >= 1);
    terms
        .iter()
        .fold(n, |acc, &t| if acc == 1 { 1 } else { gcd(acc, t) })
}

/// Prime-exponent decomposition, primes strictly ascending. Empty for `n = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|&(_, a)| a)
    }

    /// Number of distinct primes, `s`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Reconstructs `n`.
    pub fn value(&self) -> u64 {
        self.pairs.iter().map(|&(p, a)| p.pow(a)).product()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, a)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if a == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{a}")?;
            }
        }
        Ok(())
    }
}

/// Trial division. Valid for every `n >= 1` that fits a `u64`.
fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut pairs = Vec::new();
    let mut strip = |n: &mut u64, p: u64| {
        let mut a = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            a += 1;
        }
        if a > 0 {
            pairs.push((p, a));
        }
    };
    strip(&mut n, 2);
    strip(&mut n, 3);
    let mut p = 5u64;
    // 6k +- 1 wheel
    while (p as u128) * (p as u128) <= n as u128 {
        strip(&mut n, p);
        strip(&mut n, p + 2);
        p += 6;
    }
    if n > 1 {
        pairs.push((n, 1));
    }
    pairs
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 || n > MAX_FACTORIZE {
        return Err(Error::out_of_range("n", n, "1..=2^63-1"));
    }
    Ok(Factorization {
        pairs: trial_division(n),
    })
}

fn factor_pairs(n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "arithmetic functions are defined for n >= 1");
    trial_division(n)
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, a) in factor_pairs(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..a {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factor_pairs(n)
        .into_iter()
        .map(|(p, a)| (p - 1) * p.pow(a - 1))
        .product()
}

pub fn tau(n: u64) -> u64 {
    factor_pairs(n)
        .into_iter()
        .map(|(_, a)| a as u64 + 1)
        .product()
}

/// Residues in `[0, n)` coprime to `n`, ascending. `[0]` for `n = 1`.
pub fn units(n: u64) -> Vec<u64> {
    assert!(n >= 1);
    (0..n).filter(|&a| gcd(n, a) == 1).collect()
}

pub fn checked_pow(base: u128, exp: u64, what: &'static str) -> Result<u128> {
    if base <= 1 {
        return Ok(if exp == 0 { 1 } else { base });
    }
    let exp = u32::try_from(exp).map_err(|_| Error::Overflow(what))?;
    base.checked_pow(exp).ok_or(Error::Overflow(what))
}

/// Named arithmetic functions that can be fed to [`dirichlet_convolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithFunction {
    /// The constant function `e(m) = 1`.
    One,
    Tau,
    Phi,
    /// `τ_r` for `r >= 1`; `TauR(1)` is `τ`.
    TauR(u32),
}

impl ArithFunction {
    pub fn eval(self, m: u64) -> Result<u128> {
        match self {
            ArithFunction::One => Ok(1),
            ArithFunction::Tau => Ok(tau(m) as u128),
            ArithFunction::Phi => Ok(euler_phi(m) as u128),
            ArithFunction::TauR(r) => tau_r_recursive(m, r),
        }
    }
}

impl fmt::Display for ArithFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithFunction::One => f.write_str("e"),
            ArithFunction::Tau => f.write_str("tau"),
            ArithFunction::Phi => f.write_str("phi"),
            ArithFunction::TauR(r) => write!(f, "tau_{r}"),
        }
    }
}

/// `(f * g)(n) = Σ_{d | n} f(d) g(n/d)`.
pub fn dirichlet_convolve(f: ArithFunction, g: ArithFunction, n: u64) -> Result<u128> {
    divisors(n).into_iter().try_fold(0u128, |acc, d| {
        let term = f
            .eval(d)?
            .checked_mul(g.eval(n / d)?)
            .ok_or(Error::Overflow("Dirichlet convolution term"))?;
        acc.checked_add(term)
            .ok_or(Error::Overflow("Dirichlet convolution sum"))
    })
}

/// `τ_r(n)` by the defining recursion `τ_1 = τ`, `τ_i(n) = Σ_{d | n} τ_{i-1}(d)`.
///
/// Values are memoized per level over the divisor list of `n`, so the cost is
/// `O(r · τ(n)^2)` instead of the exponential naive expansion.
pub fn tau_r_recursive(n: u64, r: u32) -> Result<u128> {
    assert!(r >= 1, "tau_r is defined for r >= 1");
    let divs = divisors(n);
    // sub[i] lists the positions of divisors of divs[i]
    let sub: Vec<Vec<usize>> = divs
        .iter()
        .map(|&d| {
            divs.iter()
                .enumerate()
                .take_while(|&(_, &e)| e <= d)
                .filter(|&(_, &e)| d % e == 0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut level: Vec<u128> = sub.iter().map(|s| s.len() as u128).collect();
    for _ in 1..r {
        level = sub
            .iter()
            .map(|s| {
                s.iter().try_fold(0u128, |acc, &j| {
                    acc.checked_add(level[j]).ok_or(Error::Overflow("tau_r"))
                })
            })
            .collect::<Result<_>>()?;
    }
    Ok(*level.last().expect("divisor list is never empty"))
}

/// `C(a + r, r)` computed as a running product that stays integral.
fn binomial_a_plus_r(a: u32, r: u32) -> Result<u128> {
    let (a, r) = (a as u128, r as u128);
    let k = a.min(r);
    let top = a + r;
    let mut acc = 1u128;
    for i in 1..=k {
        // acc * (top - k + i) is divisible by i; cancel before multiplying
        let g = gcd_u128(acc, i);
        acc = (acc / g)
            .checked_mul((top - k + i) / (i / g))
            .ok_or(Error::Overflow("binomial coefficient"))?;
    }
    Ok(acc)
}

/// `τ_r(n) = Π C(α_i + r, r)` over the prime powers of `n`.
pub fn tau_r_closed(n: u64, r: u32) -> Result<u128> {
    assert!(r >= 1, "tau_r is defined for r >= 1");
    factor_pairs(n).into_iter().try_fold(1u128, |acc, (_, a)| {
        acc.checked_mul(binomial_a_plus_r(a, r)?)
            .ok_or(Error::Overflow("tau_r closed form"))
    })
}

/// `τ_2(n) = 2^{-s} Π (α_i + 1)(α_i + 2)`.
pub fn tau2_explicit(n: u64) -> u128 {
    let pairs = factor_pairs(n);
    let s = pairs.len() as u32;
    // at most 15 distinct primes below 2^64, and Σ α_i <= 63
    let product: u128 = pairs
        .iter()
        .map(|&(_, a)| (a as u128 + 1) * (a as u128 + 2))
        .product();
    debug_assert_eq!(product % (1u128 << s), 0);
    product >> s
}
