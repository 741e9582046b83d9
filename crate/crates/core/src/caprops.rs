//! Closed-form dynamical properties of linear rules: Lyapunov exponents,
//! topological entropy and the topological predicates that place a rule in
//! one of five classes of increasing chaos.

use std::fmt;

use crate::lattice::LinearRule;
use crate::modring::{gcd, Modulus};

/// Topological entropy kept in exact form `sum_i a_i log2(p_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entropy {
    /// `(p_i, a_i)` with `a_i = k_i (R_i - L_i)`.
    pub terms: Vec<(u32, u32)>,
}

impl Entropy {
    pub fn value(&self) -> f64 {
        self.terms
            .iter()
            .map(|&(p, a)| a as f64 * (p as f64).log2())
            .sum()
    }

    /// Entropy divided by `log2(m)`.
    pub fn normalized(&self, modulus: &Modulus) -> f64 {
        self.value() / modulus.log2()
    }

    /// Exact test for a normalized entropy of one. Logarithms of distinct
    /// primes are linearly independent over the rationals, so this holds iff
    /// `a_i = k_i` for every prime.
    pub fn is_normalized_one(&self, modulus: &Modulus) -> bool {
        self.terms
            .iter()
            .zip(modulus.factors())
            .all(|(&(_, a), &(_, k))| a == k)
    }
}

/// `(L_i, R_i)` for every prime factor of `m`, in factor order.
fn spans(coeffs: &[u8], modulus: &Modulus) -> Vec<(isize, isize)> {
    let r = (coeffs.len() / 2) as isize;
    modulus
        .primes()
        .map(|p| {
            let mut lo = 0isize;
            let mut hi = 0isize;
            for (i, &w) in coeffs.iter().enumerate() {
                if gcd(w as u32, p) == 1 {
                    let j = i as isize - r;
                    lo = lo.min(j);
                    hi = hi.max(j);
                }
            }
            (lo, hi)
        })
        .collect()
}

/// Left and right Lyapunov exponents `(lambda_minus, lambda_plus)`.
pub fn lyapunov(rule: &LinearRule) -> (i64, i64) {
    let s = spans(rule.coeffs(), rule.modulus());
    let left = s.iter().map(|&(_, hi)| hi).max().unwrap_or(0);
    let right = -s.iter().map(|&(lo, _)| lo).min().unwrap_or(0);
    (left as i64, right as i64)
}

pub fn entropy_exact(rule: &LinearRule) -> Entropy {
    let s = spans(rule.coeffs(), rule.modulus());
    Entropy {
        terms: rule
            .modulus()
            .factors()
            .iter()
            .zip(s)
            .map(|(&(p, k), (lo, hi))| (p, k * (hi - lo) as u32))
            .collect(),
    }
}

pub fn entropy(rule: &LinearRule) -> f64 {
    entropy_exact(rule).value()
}

pub fn normalized_entropy(rule: &LinearRule) -> f64 {
    entropy_exact(rule).normalized(rule.modulus())
}

/// Topological predicates of a linear rule.
///
/// Transitivity, ergodicity and expansivity share one closed-form condition
/// for linear rules and are reported through the single `transitive` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub equicontinuous: bool,
    pub sensitive: bool,
    pub transitive: bool,
    pub strongly_transitive: bool,
    pub positively_expansive: bool,
    pub injective: bool,
    pub surjective_regular: bool,
}

fn gcd_with(m: u32, ws: &[u8]) -> u32 {
    ws.iter().fold(m, |g, &w| gcd(g, w as u32))
}

/// Number of coefficients not divisible by `p`.
fn count_not_divisible(coeffs: &[u8], p: u32) -> usize {
    coeffs.iter().filter(|&&w| w as u32 % p != 0).count()
}

pub(crate) fn injective_coeffs(coeffs: &[u8], modulus: &Modulus) -> bool {
    modulus
        .primes()
        .all(|p| count_not_divisible(coeffs, p) == 1)
}

pub fn topological_flags(rule: &LinearRule) -> Flags {
    let m = rule.m();
    let w = rule.coeffs();
    let r = rule.radius();
    let left = &w[..r];
    let right = &w[r + 1..];
    let mut off_center = left.to_vec();
    off_center.extend_from_slice(right);
    let g_off = gcd_with(m, &off_center);
    let primes: Vec<u32> = rule.modulus().primes().collect();

    let equicontinuous = primes.iter().all(|&p| g_off % p == 0);
    Flags {
        equicontinuous,
        sensitive: !equicontinuous,
        transitive: g_off == 1,
        strongly_transitive: primes.iter().all(|&p| count_not_divisible(w, p) >= 2),
        positively_expansive: gcd_with(m, left) == 1 && gcd_with(m, right) == 1,
        injective: primes.iter().all(|&p| count_not_divisible(w, p) == 1),
        surjective_regular: gcd_with(m, w) == 1,
    }
}

/// The five classes of increasing degree of chaos for linear rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChaosClass {
    Equicontinuous,
    SensitiveNotTransitive,
    TransitiveNotStrong,
    StrongNotPosExpansive,
    PositivelyExpansive,
}

impl ChaosClass {
    pub fn from_flags(f: &Flags) -> Self {
        if f.equicontinuous {
            ChaosClass::Equicontinuous
        } else if !f.transitive {
            ChaosClass::SensitiveNotTransitive
        } else if !f.strongly_transitive {
            ChaosClass::TransitiveNotStrong
        } else if !f.positively_expansive {
            ChaosClass::StrongNotPosExpansive
        } else {
            ChaosClass::PositivelyExpansive
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ChaosClass::Equicontinuous => "equicontinuous",
            ChaosClass::SensitiveNotTransitive => "sensitive, not transitive",
            ChaosClass::TransitiveNotStrong => "transitive, not strongly transitive",
            ChaosClass::StrongNotPosExpansive => "strongly transitive, not positively expansive",
            ChaosClass::PositivelyExpansive => "positively expansive",
        }
    }
}

impl fmt::Display for ChaosClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

pub fn chaos_class(rule: &LinearRule) -> ChaosClass {
    ChaosClass::from_flags(&topological_flags(rule))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleProperties {
    pub lyap_left: i64,
    pub lyap_right: i64,
    pub entropy: f64,
    pub entropy_exact: Entropy,
    pub normalized_entropy: f64,
    pub flags: Flags,
    pub chaos_class: ChaosClass,
}

pub fn analyze(rule: &LinearRule) -> RuleProperties {
    let (lyap_left, lyap_right) = lyapunov(rule);
    let exact = entropy_exact(rule);
    let flags = topological_flags(rule);
    RuleProperties {
        lyap_left,
        lyap_right,
        entropy: exact.value(),
        normalized_entropy: exact.normalized(rule.modulus()),
        entropy_exact: exact,
        chaos_class: ChaosClass::from_flags(&flags),
        flags,
    }
}

impl fmt::Display for RuleProperties {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "lyapunov (left, right)  {}, {}", self.lyap_left, self.lyap_right)?;
        writeln!(f, "entropy                 {}", fmt_real(self.entropy))?;
        writeln!(f, "normalized entropy      {}", fmt_real(self.normalized_entropy))?;
        writeln!(f, "equicontinuous          {}", yn(self.flags.equicontinuous))?;
        writeln!(f, "sensitive               {}", yn(self.flags.sensitive))?;
        writeln!(f, "transitive / ergodic    {}", yn(self.flags.transitive))?;
        writeln!(f, "strongly transitive     {}", yn(self.flags.strongly_transitive))?;
        writeln!(f, "positively expansive    {}", yn(self.flags.positively_expansive))?;
        writeln!(f, "surjective / regular    {}", yn(self.flags.surjective_regular))?;
        writeln!(f, "injective               {}", yn(self.flags.injective))?;
        write!(f, "class                   {}", self.chaos_class)
    }
}

/// Prints integers without a fractional part and everything else with six
/// decimals.
fn fmt_real(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.6}")
    }
}
