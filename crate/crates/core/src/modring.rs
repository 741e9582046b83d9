//! Number theory over the ring `Z_m`.
//!
//! Everything here works on plain `u32` residues. Sets are returned as sorted
//! vectors so that downstream selection output is stable.

use crate::error::{Error, Result};

/// A modulus together with its prime factorization `m = p_1^k_1 ... p_h^k_h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Modulus {
    m: u32,
    factors: Vec<(u32, u32)>,
}

impl Modulus {
    pub fn new(m: u32) -> Result<Self> {
        factorize(m)
    }

    pub fn value(&self) -> u32 {
        self.m
    }

    /// `(prime, multiplicity)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime factors.
    pub fn prime_count(&self) -> usize {
        self.factors.len()
    }

    /// `Z_m` is a field.
    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    /// `m = p^k` with `k >= 2`.
    pub fn is_prime_power_ring(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 >= 2
    }

    /// `log2(m)` computed as `sum k_i log2(p_i)`.
    pub fn log2(&self) -> f64 {
        self.factors
            .iter()
            .map(|&(p, k)| k as f64 * (p as f64).log2())
            .sum()
    }

    /// Bits needed to hold a residue, `ceil(log2 m)`.
    pub fn bits(&self) -> u32 {
        32 - (self.m - 1).leading_zeros()
    }
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Trial-division factorization.
pub fn factorize(m: u32) -> Result<Modulus> {
    if m < 2 {
        return Err(Error::InvalidModulus(m));
    }
    let mut factors = Vec::new();
    let mut rest = m;
    let mut p = 2u32;
    while (p as u64) * (p as u64) <= rest as u64 {
        let mut k = 0;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if k > 0 {
            factors.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Modulus { m, factors })
}

/// Units of `Z_m`: `{s in 1..m : gcd(s, m) = 1}`.
pub fn unit_weights(modulus: &Modulus) -> Vec<u32> {
    let m = modulus.value();
    (1..m).filter(|&s| gcd(s, m) == 1).collect()
}

/// Nonzero non-units of `Z_m`.
pub fn nonunit_weights(modulus: &Modulus) -> Vec<u32> {
    let m = modulus.value();
    (1..m).filter(|&s| gcd(s, m) != 1).collect()
}

fn check_element(g: u32, modulus: &Modulus) -> Result<()> {
    let m = modulus.value();
    if g == 0 || g >= m {
        return Err(Error::ElementOutOfRange { g, m });
    }
    Ok(())
}

/// Order of the additive cyclic subgroup generated by `g`, `m / gcd(m, g)`.
pub fn additive_order(g: u32, modulus: &Modulus) -> Result<u32> {
    check_element(g, modulus)?;
    Ok(modulus.value() / gcd(modulus.value(), g))
}

/// The set `{g^0, g^1, ..., g^(m-1)} mod m`, sorted.
pub fn multiplicative_closure(g: u32, modulus: &Modulus) -> Result<Vec<u32>> {
    check_element(g, modulus)?;
    let m = modulus.value() as u64;
    let mut seen = vec![false; m as usize];
    let mut x = 1 % m;
    for _ in 0..m {
        seen[x as usize] = true;
        x = x * g as u64 % m;
    }
    Ok(seen
        .iter()
        .enumerate()
        .filter_map(|(v, &s)| s.then_some(v as u32))
        .collect())
}

/// True when `g` generates the whole multiplicative group `Z_m \ {0}`.
pub fn generates_nonzero(g: u32, modulus: &Modulus) -> Result<bool> {
    let closure = multiplicative_closure(g, modulus)?;
    Ok(closure.len() == modulus.value() as usize - 1 && !closure.contains(&0))
}
