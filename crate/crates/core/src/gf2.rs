//! Arithmetic in GF(2^b) for b ≤ 63, using the smallest irreducible
//! polynomial of degree b found by an irreducibility test.

use crate::error::{Error, Result};

/// Polynomials over GF(2) of degree ≤ 127, bit i holding the coefficient of xⁱ.
type Poly = u128;

fn degree(p: Poly) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_mod(mut a: Poly, f: Poly) -> Poly {
    let df = degree(f);
    while degree(a) >= df {
        a ^= f << (degree(a) - df);
    }
    a
}

fn mul_mod(a: Poly, b: Poly, f: Poly) -> Poly {
    let df = degree(f);
    let mut acc: Poly = 0;
    let mut a = poly_mod(a, f);
    let mut b = poly_mod(b, f);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if degree(a) == df {
            a ^= f;
        }
    }
    acc
}

fn gcd(mut a: Poly, mut b: Poly) -> Poly {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// `x^(2^k) mod f`.
fn frobenius(k: u32, f: Poly) -> Poly {
    let mut h = poly_mod(0b10, f);
    for _ in 0..k {
        h = mul_mod(h, h, f);
    }
    h
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `f` of degree n is irreducible iff `x^(2^n) ≡ x (mod f)` and
/// `gcd(x^(2^(n/p)) − x, f) = 1` for every prime p dividing n.
pub fn is_irreducible(f: Poly) -> bool {
    let n = degree(f);
    if n < 1 {
        return false;
    }
    let n = n as u32;
    let x = poly_mod(0b10, f);
    if frobenius(n, f) != x {
        return false;
    }
    prime_factors(n)
        .into_iter()
        .all(|p| gcd(f, frobenius(n / p, f) ^ x) == 1)
}

/// The field GF(2^b).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2m {
    bits: u32,
    modulus: Poly,
}

impl Gf2m {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 63 {
            return Err(Error::InvalidArgument(format!("GF(2^b) needs 1 ≤ b ≤ 63, got {bits}")));
        }
        let top: Poly = 1 << bits;
        let mut low: Poly = 1;
        loop {
            let f = top | low;
            if is_irreducible(f) {
                return Ok(Self { bits, modulus: f });
            }
            low += 2;
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The reduction polynomial, including its leading term.
    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    pub fn mask(&self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod((a & self.mask()) as Poly, (b & self.mask()) as Poly, self.modulus) as u64
    }
}
