//! The linear cellular automaton engine on a periodic one-dimensional lattice.

use std::fmt;

use crate::error::{Error, Result};
use crate::modring::Modulus;

/// A linear local rule `s'_k = sum_j w_j s_{k+j} mod m` with coefficients
/// stored in order `w_{-r}, ..., w_0, ..., w_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearRule {
    modulus: Modulus,
    coeffs: Vec<u8>,
}

impl LinearRule {
    pub fn new(modulus: Modulus, coeffs: Vec<u32>) -> Result<Self> {
        let m = modulus.value();
        if m > 256 {
            return Err(Error::ModulusTooLarge(m));
        }
        let n = coeffs.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidRule(format!(
                "need an odd number (>= 3) of coefficients, got {n}"
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|&&w| w >= m) {
            return Err(Error::InvalidRule(format!("coefficient {bad} not in Z_{m}")));
        }
        Ok(Self {
            modulus,
            coeffs: coeffs.into_iter().map(|w| w as u8).collect(),
        })
    }

    pub(crate) fn from_raw(modulus: Modulus, coeffs: Vec<u8>) -> Self {
        debug_assert!(coeffs.len() % 2 == 1 && coeffs.len() >= 3);
        Self { modulus, coeffs }
    }

    /// Parses the textual form `"(w_-r,...,w_r)"`. Parentheses are optional.
    pub fn parse(modulus: Modulus, text: &str) -> Result<Self> {
        let inner = text.trim();
        let inner = inner.strip_prefix('(').unwrap_or(inner);
        let inner = inner.strip_suffix(')').unwrap_or(inner);
        let coeffs = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidRule(format!("cannot parse '{text}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(modulus, coeffs)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn m(&self) -> u32 {
        self.modulus.value()
    }

    /// Coefficients `w_{-r}..w_r`.
    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn radius(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn neighborhood(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient at offset `j` in `-r..=r`.
    pub fn coeff(&self, j: isize) -> u32 {
        self.coeffs[(j + self.radius() as isize) as usize] as u32
    }

    /// `(offset, weight)` for every coefficient, offsets in `-r..=r`.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, u32)> + '_ {
        let r = self.radius() as isize;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as isize - r, w as u32))
    }

    /// At least one outermost coefficient is nonzero.
    pub fn true_neighborhood(&self) -> bool {
        self.coeffs[0] != 0 || self.coeffs[self.coeffs.len() - 1] != 0
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|&&w| w != 0).count()
    }

    pub fn mirror(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self {
            modulus: self.modulus.clone(),
            coeffs,
        }
    }

    pub fn is_canonical(&self) -> bool {
        is_canonical(&self.coeffs)
    }

    /// The representative of `{self, mirror(self)}` whose left coefficient sum
    /// does not exceed its right coefficient sum, ties going to the
    /// lexicographically smaller coefficient vector.
    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.mirror()
        }
    }
}

pub(crate) fn is_canonical(coeffs: &[u8]) -> bool {
    let r = coeffs.len() / 2;
    let left: u32 = coeffs[..r].iter().map(|&w| w as u32).sum();
    let right: u32 = coeffs[r + 1..].iter().map(|&w| w as u32).sum();
    // Unequal rules can share both sums once the radius exceeds one; the
    // lexicographically smaller of the pair wins the tie.
    left < right || (left == right && coeffs.iter().le(coeffs.iter().rev()))
}

impl fmt::Display for LinearRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, w) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str(")")
    }
}

/// One lattice snapshot over `Z_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    cells: Vec<u8>,
    m: u32,
}

impl Configuration {
    pub fn new(cells: Vec<u32>, m: u32) -> Result<Self> {
        if m > 256 {
            return Err(Error::ModulusTooLarge(m));
        }
        if let Some(&value) = cells.iter().find(|&&c| c >= m) {
            return Err(Error::CellOutOfRange { value, m });
        }
        Ok(Self {
            cells: cells.into_iter().map(|c| c as u8).collect(),
            m,
        })
    }

    pub fn zeros(len: usize, m: u32) -> Self {
        Self {
            cells: vec![0; len],
            m,
        }
    }

    /// A single 1 at `index`, zeros elsewhere.
    pub fn impulse(len: usize, index: usize, m: u32) -> Self {
        let mut cells = vec![0; len];
        cells[index] = 1;
        Self { cells, m }
    }

    pub(crate) fn from_raw(cells: Vec<u8>, m: u32) -> Self {
        Self { cells, m }
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.cells.iter().map(|&c| c as u32).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Cyclic rotation to the right by `k` cells.
    pub fn rotate_right(&self, k: usize) -> Self {
        let mut cells = self.cells.clone();
        if !cells.is_empty() {
            let k = k % cells.len();
            cells.rotate_right(k);
        }
        Self { cells, m: self.m }
    }
}

/// Precomputed update kernel for one rule on a lattice of fixed length.
///
/// Only nonzero taps are kept. The lattice is copied into a buffer padded with
/// `r` wrapped cells on each side so the inner loop has no index arithmetic.
/// Accumulation happens in `u32` and is reduced once per cell.
#[derive(Debug, Clone)]
pub struct Stepper {
    taps: Vec<(usize, u32)>,
    radius: usize,
    len: usize,
    m: u32,
    reduce: Vec<u8>,
    padded: Vec<u8>,
    acc: Vec<u32>,
}

const REDUCE_TABLE_MAX: u32 = 1 << 16;

impl Stepper {
    pub fn new(rule: &LinearRule, len: usize) -> Result<Self> {
        let n = rule.neighborhood();
        if len < n {
            return Err(Error::LatticeTooShort {
                len,
                neighborhood: n,
            });
        }
        let r = rule.radius();
        let m = rule.m();
        let taps: Vec<(usize, u32)> = rule
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(i, &w)| (i, w as u32))
            .collect();
        let max_acc: u32 = taps.iter().map(|&(_, w)| w * (m - 1)).sum();
        let reduce = if max_acc < REDUCE_TABLE_MAX {
            (0..=max_acc).map(|v| (v % m) as u8).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            taps,
            radius: r,
            len,
            m,
            reduce,
            padded: vec![0; len + 2 * r],
            acc: vec![0; len],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Applies one global update from `src` into `dst`.
    pub fn step_into(&mut self, src: &[u8], dst: &mut [u8]) {
        let (n, r) = (self.len, self.radius);
        debug_assert_eq!(src.len(), n);
        debug_assert_eq!(dst.len(), n);
        self.padded[..r].copy_from_slice(&src[n - r..]);
        self.padded[r..r + n].copy_from_slice(src);
        self.padded[r + n..].copy_from_slice(&src[..r]);

        self.acc.fill(0);
        for &(offset, w) in &self.taps {
            let window = &self.padded[offset..offset + n];
            for (a, &s) in self.acc.iter_mut().zip(window) {
                *a += w * s as u32;
            }
        }
        if self.reduce.is_empty() {
            let m = self.m;
            for (d, &a) in dst.iter_mut().zip(&self.acc) {
                *d = (a % m) as u8;
            }
        } else {
            for (d, &a) in dst.iter_mut().zip(&self.acc) {
                *d = self.reduce[a as usize];
            }
        }
    }

    /// In-place update using `scratch` as the temporary.
    pub fn step_in_place(&mut self, state: &mut [u8], scratch: &mut [u8]) {
        self.step_into(state, scratch);
        state.copy_from_slice(scratch);
    }
}

fn check_compatible(cfg: &Configuration, rule: &LinearRule) -> Result<()> {
    if cfg.m() != rule.m() {
        return Err(Error::ModulusMismatch {
            rule: rule.m(),
            cfg: cfg.m(),
        });
    }
    if cfg.len() < rule.neighborhood() {
        return Err(Error::LatticeTooShort {
            len: cfg.len(),
            neighborhood: rule.neighborhood(),
        });
    }
    Ok(())
}

/// One application of the global rule.
pub fn step(cfg: &Configuration, rule: &LinearRule) -> Result<Configuration> {
    check_compatible(cfg, rule)?;
    let mut stepper = Stepper::new(rule, cfg.len())?;
    let mut out = vec![0; cfg.len()];
    stepper.step_into(cfg.cells(), &mut out);
    Ok(Configuration::from_raw(out, cfg.m()))
}

/// The `iterations` successors of `cfg`, not including `cfg` itself.
pub fn iterate(cfg: &Configuration, rule: &LinearRule, iterations: usize) -> Result<Vec<Configuration>> {
    check_compatible(cfg, rule)?;
    let mut stepper = Stepper::new(rule, cfg.len())?;
    let mut out = Vec::with_capacity(iterations);
    let mut prev = cfg.cells().to_vec();
    for _ in 0..iterations {
        let mut next = vec![0; cfg.len()];
        stepper.step_into(&prev, &mut next);
        out.push(Configuration::from_raw(next.clone(), cfg.m()));
        prev = next;
    }
    Ok(out)
}

/// The `n x n` circulant matrix of the global rule. Row `i` is the first row
/// `(w_0, ..., w_r, 0, ..., 0, w_{-r}, ..., w_{-1})` rotated right by `i`.
pub fn circulant(rule: &LinearRule, n: usize) -> Result<Vec<Vec<u8>>> {
    if n < rule.neighborhood() {
        return Err(Error::LatticeTooShort {
            len: n,
            neighborhood: rule.neighborhood(),
        });
    }
    let mut first = vec![0u8; n];
    for (j, w) in rule.offsets() {
        first[j.rem_euclid(n as isize) as usize] = w as u8;
    }
    Ok((0..n)
        .map(|i| {
            let mut row = first.clone();
            row.rotate_right(i);
            row
        })
        .collect())
}

/// Matrix-vector product over `Z_m`.
pub fn mat_vec_mod(matrix: &[Vec<u8>], v: &[u8], m: u32) -> Vec<u8> {
    matrix
        .iter()
        .map(|row| {
            let acc: u64 = row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
            (acc % m as u64) as u8
        })
        .collect()
}

/// Lexicographic enumeration of all rules of neighborhood `n` over `Z_m`
/// with a true neighborhood.
pub struct RuleIter {
    modulus: Modulus,
    current: Option<Vec<u8>>,
}

impl Iterator for RuleIter {
    type Item = LinearRule;

    fn next(&mut self) -> Option<LinearRule> {
        let m = self.modulus.value();
        loop {
            let cur = self.current.as_mut()?;
            let out = cur.clone();
            if !advance(cur, m) {
                self.current = None;
            }
            if out[0] != 0 || out[out.len() - 1] != 0 {
                return Some(LinearRule::from_raw(self.modulus.clone(), out));
            }
        }
    }
}

/// Odometer increment with the last coefficient varying fastest. Returns
/// `false` once the odometer wraps around.
pub(crate) fn advance(coeffs: &mut [u8], m: u32) -> bool {
    for w in coeffs.iter_mut().rev() {
        if (*w as u32) + 1 < m {
            *w += 1;
            return true;
        }
        *w = 0;
    }
    false
}

pub(crate) fn check_neighborhood(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidNeighborhood(n));
    }
    Ok(())
}

pub fn enumerate_rules(modulus: &Modulus, neighborhood: usize) -> Result<RuleIter> {
    check_neighborhood(neighborhood)?;
    if modulus.value() > 256 {
        return Err(Error::ModulusTooLarge(modulus.value()));
    }
    Ok(RuleIter {
        modulus: modulus.clone(),
        current: Some(vec![0; neighborhood]),
    })
}

/// `m^n - m^(n-2)`.
pub fn rule_space_size(m: u32, neighborhood: usize) -> u64 {
    let m = m as u64;
    m.pow(neighborhood as u32) - m.pow(neighborhood as u32 - 2)
}

/// Smallest `(k, c)` with `W^k s0 = W^(k+c) s0`, via Brent's cycle detection.
///
/// `budget` bounds `k + c`, the number of distinct states on the orbit. When
/// `None`, the state space size `m^N` is used if it is at most `2^32`.
pub fn transient_cycle(rule: &LinearRule, s0: &Configuration, budget: Option<u64>) -> Result<(u64, u64)> {
    check_compatible(s0, rule)?;
    let budget = match budget {
        Some(b) => b,
        None => {
            let bits = (s0.len() as f64) * (rule.m() as f64).log2();
            if bits > 32.0 {
                return Err(Error::InvalidConfig(format!(
                    "state space Z_{}^{} too large to walk without an explicit budget",
                    rule.m(),
                    s0.len()
                )));
            }
            (rule.m() as u64).pow(s0.len() as u32)
        }
    };
    // Brent needs fewer than 4 (k + c) applications in total.
    let max_steps = budget.saturating_mul(4).saturating_add(4);
    let n = s0.len();
    let mut stepper = Stepper::new(rule, n)?;
    let mut scratch = vec![0u8; n];
    let mut used = 0u64;
    let mut apply = |state: &mut Vec<u8>, used: &mut u64| -> Result<()> {
        if *used >= max_steps {
            return Err(Error::BudgetExhausted(budget));
        }
        *used += 1;
        stepper.step_in_place(state, &mut scratch);
        Ok(())
    };

    // cycle length
    let mut power = 1u64;
    let mut cycle = 1u64;
    let mut tortoise = s0.cells().to_vec();
    let mut hare = s0.cells().to_vec();
    apply(&mut hare, &mut used)?;
    while tortoise != hare {
        if power == cycle {
            tortoise.clone_from(&hare);
            power *= 2;
            cycle = 0;
        }
        apply(&mut hare, &mut used)?;
        cycle += 1;
    }

    // transient length
    let mut tortoise = s0.cells().to_vec();
    let mut hare = s0.cells().to_vec();
    for _ in 0..cycle {
        apply(&mut hare, &mut used)?;
    }
    let mut transient = 0u64;
    while tortoise != hare {
        apply(&mut tortoise, &mut used)?;
        apply(&mut hare, &mut used)?;
        transient += 1;
    }
    if transient + cycle > budget {
        return Err(Error::BudgetExhausted(budget));
    }
    Ok((transient, cycle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::factorize;
    use proptest::prelude::*;

    fn rule(m: u32, w: &[u32]) -> LinearRule {
        LinearRule::new(factorize(m).unwrap(), w.to_vec()).unwrap()
    }

    fn cfg(m: u32, c: &[u32]) -> Configuration {
        Configuration::new(c.to_vec(), m).unwrap()
    }

    #[test]
    fn rule_validation() {
        let m4 = factorize(4).unwrap();
        assert!(LinearRule::new(m4.clone(), vec![1, 2]).is_err());
        assert!(LinearRule::new(m4.clone(), vec![1]).is_err());
        assert!(LinearRule::new(m4.clone(), vec![0, 4, 1]).is_err());
        assert!(LinearRule::new(factorize(257).unwrap(), vec![0, 1, 0]).is_err());
        let r = LinearRule::parse(m4.clone(), "(0, 2,1)").unwrap();
        assert_eq!(r.coeffs(), &[0, 2, 1]);
        assert_eq!(r.to_string(), "(0,2,1)");
        assert!(LinearRule::parse(m4, "(0,x,1)").is_err());
    }

    #[test]
    fn true_neighborhood_flag() {
        assert!(rule(4, &[0, 2, 1]).true_neighborhood());
        assert!(!rule(4, &[0, 2, 0]).true_neighborhood());
        assert_eq!(rule(4, &[1, 2, 3]).coeff(-1), 1);
        assert_eq!(rule(4, &[1, 2, 3]).coeff(1), 3);
    }

    #[test]
    fn mirror_examples() {
        assert_eq!(rule(4, &[0, 2, 1]).mirror().coeffs(), &[1, 2, 0]);
        assert_eq!(rule(4, &[1, 2, 1]).mirror().coeffs(), &[1, 2, 1]);
        assert_eq!(rule(4, &[1, 0, 2]).mirror().coeffs(), &[2, 0, 1]);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(rule(4, &[1, 2, 0]).canonical().coeffs(), &[0, 2, 1]);
        assert_eq!(rule(4, &[1, 0, 2]).canonical().coeffs(), &[1, 0, 2]);
        assert_eq!(rule(4, &[1, 2, 1]).canonical().coeffs(), &[1, 2, 1]);
    }

    #[test]
    fn step_rule_90_worked_example() {
        let s = cfg(2, &[0, 1, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1]);
        let out = step(&s, &rule(2, &[1, 0, 1])).unwrap();
        assert_eq!(out.to_vec(), vec![0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn step_impulse() {
        let s = Configuration::impulse(12, 5, 4);
        let out = step(&s, &rule(4, &[0, 2, 1])).unwrap();
        let mut expect = vec![0; 12];
        expect[4] = 1;
        expect[5] = 2;
        assert_eq!(out.to_vec(), expect);
    }

    #[test]
    fn identity_rule() {
        let s = cfg(5, &[4, 3, 2, 1, 0, 1]);
        assert_eq!(step(&s, &rule(5, &[0, 1, 0])).unwrap(), s);
        let it = iterate(&s, &rule(5, &[0, 1, 0]), 3).unwrap();
        assert_eq!(it, vec![s.clone(), s.clone(), s]);
    }

    #[test]
    fn step_errors() {
        let s = cfg(4, &[0, 1]);
        assert!(matches!(step(&s, &rule(4, &[0, 2, 1])), Err(Error::LatticeTooShort { .. })));
        let s = cfg(5, &[0, 1, 2, 3]);
        assert!(matches!(step(&s, &rule(4, &[0, 2, 1])), Err(Error::ModulusMismatch { .. })));
    }

    #[test]
    fn iterate_rule_90_worked_example() {
        let s = cfg(2, &[0, 1, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1]);
        let rows: Vec<Vec<u32>> = iterate(&s, &rule(2, &[1, 0, 1]), 4)
            .unwrap()
            .iter()
            .map(Configuration::to_vec)
            .collect();
        assert_eq!(
            rows,
            vec![
                vec![0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0, 1],
                vec![0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0],
                vec![1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0],
                vec![0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0],
            ]
        );
    }

    #[test]
    fn iterate_impulse_diagram() {
        // rows 2..10 of the impulse iteration diagram for w = (0,2,1), m = 4
        let expected: [[u32; 12]; 9] = [
            [0, 0, 0, 0, 1, 2, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, 1, 2, 0, 0, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            [1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 0, 0],
        ];
        let rows = iterate(&Configuration::impulse(12, 5, 4), &rule(4, &[0, 2, 1]), 9).unwrap();
        for (row, exp) in rows.iter().zip(expected.iter()) {
            assert_eq!(row.to_vec(), exp.to_vec());
        }
    }

    #[test]
    fn iterate_high_entropy_impulse_diagram() {
        let expected: [[u32; 12]; 4] = [
            [0, 0, 0, 0, 1, 2, 1, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 2, 0, 1, 0, 0, 0, 0],
            [0, 0, 1, 2, 3, 0, 3, 2, 1, 0, 0, 0],
            [0, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0],
        ];
        let rows = iterate(&Configuration::impulse(12, 5, 4), &rule(4, &[1, 2, 1]), 4).unwrap();
        for (row, exp) in rows.iter().zip(expected.iter()) {
            assert_eq!(row.to_vec(), exp.to_vec());
        }
    }

    #[test]
    fn circulant_examples() {
        let c = circulant(&rule(2, &[1, 0, 1]), 4).unwrap();
        assert_eq!(c[0], vec![0, 1, 0, 1]);
        assert_eq!(c[1], vec![1, 0, 1, 0]);
        let c = circulant(&rule(4, &[1, 2, 3]), 5).unwrap();
        assert_eq!(c[0], vec![2, 3, 0, 0, 1]);
        let id = circulant(&rule(7, &[0, 1, 0]), 6).unwrap();
        for (i, row) in id.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, u8::from(i == j));
            }
        }
        assert!(circulant(&rule(4, &[1, 2, 3]), 2).is_err());
    }

    #[test]
    fn enumeration_counts() {
        for (m, n, expect) in [(4, 3, 60u64), (3, 3, 24), (32, 3, 32736), (2, 5, 24)] {
            let md = factorize(m).unwrap();
            assert_eq!(enumerate_rules(&md, n).unwrap().count() as u64, expect);
            assert_eq!(rule_space_size(m, n), expect);
        }
        let md = factorize(4).unwrap();
        assert!(enumerate_rules(&md, 4).is_err());
        assert!(enumerate_rules(&md, 1).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let md = factorize(3).unwrap();
        let rules: Vec<Vec<u8>> = enumerate_rules(&md, 3).unwrap().map(|r| r.coeffs().to_vec()).collect();
        assert_eq!(rules[0], vec![0, 0, 1]);
        assert!(rules.windows(2).all(|w| w[0] < w[1]));
        assert!(rules.iter().all(|w| w[0] != 0 || w[2] != 0));
    }

    #[test]
    fn transient_cycle_examples() {
        let id = rule(4, &[0, 1, 0]);
        assert_eq!(transient_cycle(&id, &cfg(4, &[1, 2, 3, 0]), None).unwrap(), (0, 1));

        let (k, c) = transient_cycle(&rule(4, &[0, 2, 1]), &Configuration::impulse(12, 5, 4), Some(1 << 20)).unwrap();
        assert_eq!(k, 0);
        assert!(c >= 1);

        let (k, c) = transient_cycle(&rule(4, &[0, 2, 0]), &cfg(4, &[1, 0, 0, 0]), None).unwrap();
        assert_eq!((k, c), (2, 1));
    }

    #[test]
    fn transient_cycle_budget() {
        let r = rule(4, &[0, 2, 1]);
        let s = Configuration::impulse(12, 5, 4);
        assert!(matches!(transient_cycle(&r, &s, Some(3)), Err(Error::BudgetExhausted(3))));
        let big = Configuration::zeros(64, 4);
        assert!(transient_cycle(&r, &big, None).is_err());
    }

    /// Brute-force orbit walk with a hash map, independent of Brent.
    fn orbit_oracle(r: &LinearRule, s0: &Configuration) -> (u64, u64) {
        let mut seen = std::collections::HashMap::new();
        let mut s = s0.clone();
        let mut i = 0u64;
        loop {
            if let Some(&j) = seen.get(s.cells()) {
                return (j, i - j);
            }
            seen.insert(s.cells().to_vec(), i);
            s = step(&s, r).unwrap();
            i += 1;
        }
    }

    fn arb_rule_and_cfg(max_m: u32, max_n: usize) -> impl Strategy<Value = (LinearRule, Configuration)> {
        (2..=max_m, 1usize..=2).prop_flat_map(move |(m, r)| {
            let n = 2 * r + 1;
            (
                proptest::collection::vec(0..m, n),
                proptest::collection::vec(0..m, n..=max_n.max(n)),
            )
                .prop_map(move |(w, c)| (rule(m, &w), cfg(m, &c)))
        })
    }

    proptest! {
        #[test]
        fn step_matches_circulant((r, s) in arb_rule_and_cfg(16, 16)) {
            let mat = circulant(&r, s.len()).unwrap();
            prop_assert_eq!(step(&s, &r).unwrap().cells().to_vec(), mat_vec_mod(&mat, s.cells(), r.m()));
        }

        #[test]
        fn step_is_linear((r, x) in arb_rule_and_cfg(12, 10), seed in any::<u64>(), a in 0u32..12, b in 0u32..12) {
            let m = r.m();
            let (a, b) = (a % m, b % m);
            let y: Vec<u32> = (0..x.len()).map(|i| ((seed >> (i % 60)) as u32 ^ i as u32) % m).collect();
            let y = cfg(m, &y);
            let comb = |u: &Configuration, v: &Configuration| -> Configuration {
                let c: Vec<u32> = u.cells().iter().zip(v.cells()).map(|(&p, &q)| (a * p as u32 + b * q as u32) % m).collect();
                cfg(m, &c)
            };
            let lhs = step(&comb(&x, &y), &r).unwrap();
            let rhs = comb(&step(&x, &r).unwrap(), &step(&y, &r).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn step_commutes_with_rotation((r, s) in arb_rule_and_cfg(9, 14), k in 0usize..20) {
            let a = step(&s.rotate_right(k), &r).unwrap();
            let b = step(&s, &r).unwrap().rotate_right(k);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn mirror_is_involution((r, _s) in arb_rule_and_cfg(16, 5)) {
            prop_assert_eq!(r.mirror().mirror(), r.clone());
            let c = r.canonical();
            prop_assert_eq!(c.canonical(), c.clone());
            prop_assert_eq!(r.mirror().canonical(), c);
        }

        #[test]
        fn brent_matches_hash_walk((r, s) in arb_rule_and_cfg(4, 6)) {
            prop_assert_eq!(transient_cycle(&r, &s, None).unwrap(), orbit_oracle(&r, &s));
        }
    }
}
