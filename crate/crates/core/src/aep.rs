//! Chalky / typical / rare partition of i.i.d. Bernoulli bitstrings.
//!
//! With per-symbol entropy `H`, a string `x` of length `m` is
//! chalky if `P(x) >= 2^(-m(H - eps))`, rare if `P(x) <= 2^(-m(H + eps))`,
//! and typical otherwise. All strings with the same number of zeros share a
//! probability, so the enumeration runs over `m + 1` classes and counts are
//! binomial coefficients (exact in `u64` for the supported sizes).

use crate::error::{check_prob, domain, Error, Result};

/// Largest string length accepted by [`partition_bitstrings`].
pub const MAX_LENGTH: u32 = 24;

/// Per-symbol entropy of a bracket with probability `prob`: `-(1/m) log2 prob`.
pub fn bracket_entropy(prob: f64, m: u32) -> Result<f64> {
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(domain(format!("bracket probability {prob} must lie in (0, 1]")));
    }
    if m == 0 {
        return Err(domain("m must be at least 1"));
    }
    Ok(-prob.log2() / m as f64 + 0.0)
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_prob("p", p)?;
    Ok(shannon_entropy(&[p, 1.0 - p]))
}

/// Shannon entropy in bits of a discrete distribution.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>() + 0.0
}

/// Which side of the typical band a string falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyClass {
    Chalky,
    Typical,
    Rare,
}

/// Sizes and masses of the three classes for one `(p, m, eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyPartition {
    pub p: f64,
    pub m: u32,
    pub epsilon: f64,
    /// Per-symbol entropy `H` in bits.
    pub entropy: f64,
    /// Class of the strings with `z` zeros, indexed by `z`.
    pub by_zeros: Vec<EntropyClass>,
    pub chalky_count: u64,
    pub typical_count: u64,
    pub rare_count: u64,
    pub chalky_mass: f64,
    pub typical_mass: f64,
    pub rare_mass: f64,
}

impl EntropyPartition {
    pub fn total_count(&self) -> u64 {
        self.chalky_count + self.typical_count + self.rare_count
    }

    /// `|T| / 2^m`.
    pub fn typical_share(&self) -> f64 {
        self.typical_count as f64 / (1u64 << self.m) as f64
    }
}

/// Classifies every length-`m` string under i.i.d. Bernoulli(`p`) bits.
pub fn partition_bitstrings(p: f64, m: u32, epsilon: f64) -> Result<EntropyPartition> {
    if m > MAX_LENGTH {
        return Err(Error::Resource(format!("m = {m} exceeds the enumeration cap of {MAX_LENGTH}")));
    }
    if m == 0 {
        return Err(domain("m must be at least 1"));
    }
    if !(0.5..=1.0).contains(&p) {
        return Err(domain(format!("p = {p} must lie in [0.5, 1]")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(domain(format!("epsilon = {epsilon} must be positive")));
    }
    let h = binary_entropy(p)?;
    let mut part = EntropyPartition {
        p,
        m,
        epsilon,
        entropy: h,
        by_zeros: Vec::with_capacity(m as usize + 1),
        chalky_count: 0,
        typical_count: 0,
        rare_count: 0,
        chalky_mass: 0.0,
        typical_mass: 0.0,
        rare_mass: 0.0,
    };
    let mf = m as f64;
    let mut count: u64 = 1;
    for z in 0..=m {
        if z > 0 {
            count = count * (m - z + 1) as u64 / z as u64;
        }
        let log_prob = log2_weighted(mf - z as f64, p) + log2_weighted(z as f64, 1.0 - p);
        let class = if log_prob >= -mf * (h - epsilon) {
            EntropyClass::Chalky
        } else if log_prob <= -mf * (h + epsilon) {
            EntropyClass::Rare
        } else {
            EntropyClass::Typical
        };
        let mass = count as f64 * log_prob.exp2();
        let (c, w) = match class {
            EntropyClass::Chalky => (&mut part.chalky_count, &mut part.chalky_mass),
            EntropyClass::Typical => (&mut part.typical_count, &mut part.typical_mass),
            EntropyClass::Rare => (&mut part.rare_count, &mut part.rare_mass),
        };
        *c += count;
        *w += mass;
        part.by_zeros.push(class);
    }
    Ok(part)
}

/// `count * log2(x)` with `0 * log2(0) = 0`.
fn log2_weighted(count: f64, x: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * x.log2()
    }
}

/// One inequality checked by [`verify_theorem1`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Per-length section of a [`Theorem1Report`].
#[derive(Debug, Clone, PartialEq)]
pub struct LengthReport {
    pub partition: EntropyPartition,
    pub checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub lengths: Vec<LengthReport>,
}

impl Theorem1Report {
    /// Whether every checked inequality holds.
    pub fn all_hold(&self) -> bool {
        self.lengths.iter().all(|l| l.checks.iter().all(|c| c.holds))
    }

    /// `P(T)` for each length, in input order.
    pub fn typical_masses(&self) -> Vec<f64> {
        self.lengths.iter().map(|l| l.partition.typical_mass).collect()
    }

    /// Whether `P(T)` never decreases across the listed lengths. Reported
    /// only: convergence toward one need not be monotone.
    pub fn typical_mass_nondecreasing(&self) -> bool {
        self.typical_masses().windows(2).all(|w| w[1] >= w[0])
    }

    /// Plain-text rendering, one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lengths {
            let p = &l.partition;
            out.push_str(&format!(
                "m={} H={:.6} eps={} |C|={} |T|={} |R|={} P(C)={:.6} P(T)={:.6} P(R)={:.6}\n",
                p.m, p.entropy, p.epsilon, p.chalky_count, p.typical_count, p.rare_count,
                p.chalky_mass, p.typical_mass, p.rare_mass
            ));
            for c in &l.checks {
                let verdict = if c.holds { "pass" } else { "FAIL" };
                out.push_str(&format!("  {verdict} {}: {} vs {}\n", c.name, c.lhs, c.rhs));
            }
        }
        out.push_str(&format!(
            "P(T) nondecreasing over the listed m: {}\n",
            if self.typical_mass_nondecreasing() { "yes" } else { "no" }
        ));
        out
    }
}

/// Checks the counting bounds on each class for every `m`:
///
/// * `|C| < 2^(m(H - eps))`
/// * `|T| < 2^(m(H + eps))`
/// * `|R| > 2^m - 2^(m(H + eps)) - 2^(m(H - eps))`
/// * `(1 - eps) 2^(m(H - eps)) < |T|`, only once `P(T) >= 1 - eps`.
pub fn verify_theorem1(p: f64, lengths: &[u32], epsilon: f64) -> Result<Theorem1Report> {
    let mut out = Vec::with_capacity(lengths.len());
    for &m in lengths {
        let part = partition_bitstrings(p, m, epsilon)?;
        let mf = m as f64;
        let upper = (mf * (part.entropy + epsilon)).exp2();
        let lower = (mf * (part.entropy - epsilon)).exp2();
        let all = (1u64 << m) as f64;
        let check = |name, lhs: f64, rhs: f64| BoundCheck { name, lhs, rhs, holds: lhs < rhs };
        let mut checks = vec![
            check("|C| < 2^(m(H-eps))", part.chalky_count as f64, lower),
            check("|T| < 2^(m(H+eps))", part.typical_count as f64, upper),
            check("2^m - 2^(m(H+eps)) - 2^(m(H-eps)) < |R|", all - upper - lower, part.rare_count as f64),
        ];
        if part.typical_mass >= 1.0 - epsilon {
            checks.push(check("(1-eps) 2^(m(H-eps)) < |T|", (1.0 - epsilon) * lower, part.typical_count as f64));
        }
        out.push(LengthReport { partition: part, checks });
    }
    Ok(Theorem1Report { lengths: out })
}
