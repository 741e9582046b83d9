//! Pre-selection of linear rules and fixed layer choices for reservoir use.
//!
//! Rules are kept when they are canonical under mirroring, have normalized
//! entropy one, are injective, and pass a modulus-specific branch:
//!
//! * field `Z_p`: every nonzero coefficient generates `Z_p \ {0}`;
//! * two distinct primes `p1 p2`: exactly two nonzero coefficients, and two
//!   distinct positions `i != j` with `p1 ∤ w_i` and `p2 ∤ w_j`;
//! * prime power `p^k`: exactly two nonzero coefficients, units restricted to
//!   `{1, m-1}`, and non-units of additive order four whenever `Z_m` has such
//!   elements at all.
//!
//! The "exactly two nonzero" requirement in the two-prime branch is what
//! keeps `m = 12, n = 3` at eight rules; without it the count doubles.

use crate::caprops::injective_coeffs;
use crate::error::{Error, Result};
use crate::lattice::{advance, check_neighborhood, is_canonical, LinearRule};
use crate::modring::{additive_order, gcd, generates_nonzero, Modulus};
use crate::pipeline::{Encoding, Transformation};

/// How the cell index for each input dimension is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    Random,
}

/// Layer choices that the selection fixes independently of the rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedLayers {
    pub transformation: Transformation,
    pub quantization: Transformation,
    pub mapping: MappingKind,
    pub encoding: Encoding,
}

impl Default for FixedLayers {
    fn default() -> Self {
        FixedLayers {
            transformation: Transformation::ScaleOffset,
            quantization: Transformation::ScaleOffset,
            mapping: MappingKind::Random,
            encoding: Encoding::Replacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub rules: Vec<LinearRule>,
    pub fixed_layers: FixedLayers,
}

/// Per-value lookup tables used by the hot loop.
struct Tables {
    m: u32,
    /// Bit `i` set when prime `i` does not divide the value.
    coprime_mask: Vec<u8>,
    primes: Vec<u32>,
    factors: Vec<(u32, u32)>,
    unit: Vec<bool>,
    generator: Vec<bool>,
    order_four: Vec<bool>,
    has_order_four: bool,
}

impl Tables {
    fn new(modulus: &Modulus) -> Result<Self> {
        let m = modulus.value();
        let primes: Vec<u32> = modulus.primes().collect();
        let mut coprime_mask = vec![0u8; m as usize];
        let mut unit = vec![false; m as usize];
        let mut generator = vec![false; m as usize];
        let mut order_four = vec![false; m as usize];
        for v in 0..m {
            for (i, &p) in primes.iter().enumerate() {
                if v % p != 0 {
                    coprime_mask[v as usize] |= 1 << i;
                }
            }
            if v == 0 {
                continue;
            }
            unit[v as usize] = gcd(v, m) == 1;
            if modulus.is_prime() {
                generator[v as usize] = generates_nonzero(v, modulus)?;
            }
            order_four[v as usize] = !unit[v as usize] && additive_order(v, modulus)? == 4;
        }
        let has_order_four = order_four.iter().any(|&b| b);
        Ok(Tables {
            m,
            coprime_mask,
            primes,
            factors: modulus.factors().to_vec(),
            unit,
            generator,
            order_four,
            has_order_four,
        })
    }

    /// Normalized entropy exactly one: the coprime span `R_i - L_i` is one
    /// for every prime.
    fn unit_entropy(&self, w: &[u8]) -> bool {
        let r = (w.len() / 2) as isize;
        (0..self.primes.len()).all(|i| {
            let mut lo = 0isize;
            let mut hi = 0isize;
            for (pos, &v) in w.iter().enumerate() {
                if self.coprime_mask[v as usize] >> i & 1 == 1 {
                    let j = pos as isize - r;
                    lo = lo.min(j);
                    hi = hi.max(j);
                }
            }
            hi - lo == 1
        })
    }

    /// Exactly one coefficient per prime is not divisible by it.
    fn injective(&self, w: &[u8]) -> bool {
        (0..self.primes.len()).all(|i| {
            w.iter()
                .filter(|&&v| self.coprime_mask[v as usize] >> i & 1 == 1)
                .count()
                == 1
        })
    }

    fn field_branch(&self, w: &[u8]) -> bool {
        w.iter().all(|&v| v == 0 || self.generator[v as usize])
    }

    fn two_prime_branch(&self, w: &[u8]) -> bool {
        if nonzero(w) != 2 {
            return false;
        }
        w.iter().enumerate().any(|(i, &a)| {
            self.coprime_mask[a as usize] & 1 == 1
                && w
                    .iter()
                    .enumerate()
                    .any(|(j, &b)| j != i && self.coprime_mask[b as usize] & 2 == 2)
        })
    }

    fn ring_branch(&self, w: &[u8]) -> bool {
        if nonzero(w) != 2 {
            return false;
        }
        w.iter().all(|&v| {
            let v = v as usize;
            if v == 0 {
                true
            } else if self.unit[v] {
                v == 1 || v as u32 == self.m - 1
            } else {
                !self.has_order_four || self.order_four[v]
            }
        })
    }

    fn accepts(&self, w: &[u8]) -> bool {
        if !self.injective(w) || !self.unit_entropy(w) {
            return false;
        }
        match (self.factors.len(), self.factors[0].1) {
            (1, 1) => self.field_branch(w),
            (1, _) => self.ring_branch(w),
            _ => self.two_prime_branch(w),
        }
    }
}

fn nonzero(w: &[u8]) -> usize {
    w.iter().filter(|&&v| v != 0).count()
}

fn check_modulus(modulus: &Modulus) -> Result<()> {
    if modulus.prime_count() > 2 {
        return Err(Error::TooManyPrimes {
            m: modulus.value(),
            primes: modulus.prime_count(),
        });
    }
    if modulus.value() > 256 {
        return Err(Error::ModulusTooLarge(modulus.value()));
    }
    Ok(())
}

/// True when `rule` passes every selection condition, canonical form included.
pub fn is_selected(rule: &LinearRule) -> Result<bool> {
    check_modulus(rule.modulus())?;
    let w = rule.coeffs();
    if !rule.true_neighborhood() || !is_canonical(w) {
        return Ok(false);
    }
    Ok(Tables::new(rule.modulus())?.accepts(w))
}

/// Runs the selection over all rules of the given neighborhood size.
/// The result is sorted lexicographically by coefficients.
pub fn select(modulus: &Modulus, neighborhood: usize) -> Result<SelectionResult> {
    check_modulus(modulus)?;
    check_neighborhood(neighborhood)?;
    let tables = Tables::new(modulus)?;
    let m = modulus.value();
    let last = neighborhood - 1;
    let mut w = vec![0u8; neighborhood];
    let mut rules = Vec::new();
    loop {
        if (w[0] != 0 || w[last] != 0)
            && injective_coeffs_fast(&tables, &w)
            && is_canonical(&w)
            && tables.accepts(&w)
        {
            rules.push(LinearRule::from_raw(modulus.clone(), w.clone()));
        }
        if !advance(&mut w, m) {
            break;
        }
    }
    debug_assert!(rules.iter().all(|r| injective_coeffs(r.coeffs(), modulus)));
    Ok(SelectionResult {
        rules,
        fixed_layers: FixedLayers::default(),
    })
}

/// Early-exit injectivity test used before the full check.
fn injective_coeffs_fast(t: &Tables, w: &[u8]) -> bool {
    let mut seen = [0u8; 2];
    for &v in w {
        let mask = t.coprime_mask[v as usize];
        for (i, s) in seen.iter_mut().enumerate().take(t.primes.len()) {
            if mask >> i & 1 == 1 {
                *s += 1;
                if *s > 1 {
                    return false;
                }
            }
        }
    }
    seen.iter().take(t.primes.len()).all(|&s| s == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caprops::{analyze, ChaosClass};
    use crate::lattice::{enumerate_rules, transient_cycle, Configuration, Stepper};
    use crate::modring::factorize;

    fn md(m: u32) -> Modulus {
        factorize(m).unwrap()
    }

    fn shown(m: u32, n: usize) -> Vec<String> {
        select(&md(m), n)
            .unwrap()
            .rules
            .iter()
            .map(|r| r.to_string())
            .collect()
    }

    #[test]
    fn m4_selection() {
        assert_eq!(shown(4, 3), ["(0,2,1)", "(0,2,3)", "(1,0,2)", "(2,0,3)"]);
    }

    #[test]
    fn m3_selection() {
        assert_eq!(shown(3, 3), ["(0,0,2)"]);
    }

    #[test]
    fn m6_selection() {
        assert_eq!(shown(6, 3), ["(2,0,3)", "(3,0,4)"]);
    }

    #[test]
    fn rejects_three_primes() {
        assert_eq!(
            select(&md(30), 3),
            Err(Error::TooManyPrimes { m: 30, primes: 3 })
        );
        assert!(select(&md(4), 4).is_err());
    }

    #[test]
    fn counts_n3() {
        for (m, c) in [(3, 1), (4, 4), (5, 2), (6, 2), (8, 8), (9, 8), (12, 8), (16, 8)] {
            assert_eq!(select(&md(m), 3).unwrap().rules.len(), c, "m={m}");
        }
    }

    #[test]
    fn selected_rules_properties() {
        for m in [3, 4, 5, 6, 8, 9, 12, 16] {
            let rules = select(&md(m), 3).unwrap().rules;
            for r in &rules {
                let p = analyze(r);
                assert!(r.true_neighborhood() && r.is_canonical());
                assert!(p.flags.injective);
                assert!((p.normalized_entropy - 1.0).abs() < 1e-12);
                assert_eq!(p.chaos_class, ChaosClass::TransitiveNotStrong, "{r}");
                assert!(is_selected(r).unwrap());
                let mirror = r.mirror();
                assert!(mirror == *r || !rules.contains(&mirror));
            }
            assert!(rules.windows(2).all(|p| p[0].coeffs() < p[1].coeffs()));
        }
    }

    #[test]
    fn matches_filter_over_enumeration() {
        for m in [4, 6, 9] {
            let filtered: Vec<LinearRule> = enumerate_rules(&md(m), 3)
                .unwrap()
                .filter(|r| is_selected(r).unwrap())
                .collect();
            assert_eq!(filtered, select(&md(m), 3).unwrap().rules);
        }
    }

    #[test]
    fn selected_rules_are_bijective() {
        for r in select(&md(4), 3).unwrap().rules {
            let mut stepper = Stepper::new(&r, 4).unwrap();
            let mut hit = [false; 256];
            let mut out = [0u8; 4];
            for idx in 0..256usize {
                let cells = [idx & 3, idx >> 2 & 3, idx >> 4 & 3, idx >> 6 & 3].map(|c| c as u8);
                stepper.step_into(&cells, &mut out);
                let img = out.iter().rev().fold(0usize, |a, &c| a * 4 + c as usize);
                assert!(!hit[img], "{r}");
                hit[img] = true;
            }
            let s0 = Configuration::impulse(512, 0, 4);
            let (k, _) = transient_cycle(&r, &s0, Some(1 << 20)).unwrap();
            assert_eq!(k, 0, "{r}");
        }
    }
}
