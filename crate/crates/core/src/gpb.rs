//! Exact distributions of integer-weighted sums of independent Bernoulli
//! variables (generalized Poisson binomial laws).
//!
//! A [`ScoreDistribution`] stores a dense probability vector over the lattice
//! `offset + scale * i`. Builders divide the weights by their common divisor
//! first, so a sum with weights `10, 20, 40, ...` lives on a lattice of
//! spacing 10 rather than on every integer.

use crate::error::{check_prob, domain, Result};

/// One summand `weight * Bernoulli(prob)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliTerm {
    pub weight: i64,
    pub prob: f64,
}

impl BernoulliTerm {
    pub fn new(weight: i64, prob: f64) -> Result<Self> {
        let term = BernoulliTerm { weight, prob };
        term.validate()?;
        Ok(term)
    }

    fn validate(&self) -> Result<()> {
        if self.weight < 0 {
            return Err(domain(format!("negative weight {}", self.weight)));
        }
        check_prob("prob", self.prob)
    }
}

/// Probability mass function on an integer lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    offset: i64,
    scale: i64,
    pmf: Vec<f64>,
}

impl ScoreDistribution {
    /// Point mass at `value`.
    pub fn point(value: i64) -> Self {
        ScoreDistribution { offset: value, scale: 1, pmf: vec![1.0] }
    }

    /// Builds a distribution from raw parts. Masses must be non-negative and
    /// sum to one within `1e-9`.
    pub fn from_parts(offset: i64, scale: i64, pmf: Vec<f64>) -> Result<Self> {
        if scale < 1 {
            return Err(domain(format!("lattice spacing must be >= 1, got {scale}")));
        }
        if pmf.is_empty() {
            return Err(domain("empty probability vector"));
        }
        if pmf.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(domain("masses must be finite and non-negative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("masses sum to {total}, not 1")));
        }
        Ok(ScoreDistribution { offset, scale, pmf })
    }

    /// Smallest lattice point.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Lattice spacing.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Dense masses; entry `i` belongs to `offset + scale * i`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Largest lattice point.
    pub fn max_value(&self) -> i64 {
        self.value_at(self.pmf.len() - 1)
    }

    pub fn value_at(&self, index: usize) -> i64 {
        self.offset + self.scale * index as i64
    }

    /// Iterates `(value, mass)` pairs over the whole lattice, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.pmf.iter().enumerate().map(|(i, &m)| (self.value_at(i), m))
    }

    /// `P(X = value)`.
    pub fn mass(&self, value: i64) -> f64 {
        let d = value - self.offset;
        if d < 0 || d % self.scale != 0 {
            return 0.0;
        }
        self.pmf.get((d / self.scale) as usize).copied().unwrap_or(0.0)
    }

    /// `P(X <= a)`.
    pub fn cdf(&self, a: i64) -> f64 {
        if a < self.offset {
            return 0.0;
        }
        let idx = ((a - self.offset) / self.scale) as usize;
        let end = idx.min(self.pmf.len() - 1);
        self.pmf[..=end].iter().sum()
    }

    /// Cumulative masses, entry `i` being `P(X <= offset + scale * i)`.
    pub fn cumulative(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, m)| v as f64 * m).sum()
    }

    /// Re-expresses the masses on a finer lattice whose spacing divides the
    /// current one.
    fn on_lattice(&self, spacing: i64) -> Vec<f64> {
        if self.pmf.len() == 1 || spacing == self.scale {
            return self.pmf.clone();
        }
        let stride = (self.scale / spacing) as usize;
        let mut out = vec![0.0; (self.pmf.len() - 1) * stride + 1];
        for (i, &m) in self.pmf.iter().enumerate() {
            out[i * stride] = m;
        }
        out
    }

    /// Spacing that matters for lattice arithmetic; point masses impose none.
    fn effective_scale(&self) -> i64 {
        if self.pmf.len() == 1 {
            0
        } else {
            self.scale
        }
    }
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

/// Exact law of `sum_i weight_i * B_i` for independent `B_i ~ Bernoulli(prob_i)`.
///
/// Built by iterated convolution on the reduced lattice. An empty list is the
/// point mass at zero.
pub fn build(terms: &[BernoulliTerm]) -> Result<ScoreDistribution> {
    for t in terms {
        t.validate()?;
    }
    let scale = terms.iter().fold(0, |g, t| gcd(g, t.weight));
    if scale == 0 {
        return Ok(ScoreDistribution::point(0));
    }
    let total: i64 = terms.iter().map(|t| t.weight / scale).sum();
    let mut pmf = vec![0.0; total as usize + 1];
    pmf[0] = 1.0;
    let mut top = 0usize;
    for t in terms.iter().filter(|t| t.weight > 0) {
        let step = (t.weight / scale) as usize;
        let (p, q) = (t.prob, 1.0 - t.prob);
        // In place, high to low, so every read sees the pre-term value.
        for i in (0..=top + step).rev() {
            let stay = if i <= top { pmf[i] * q } else { 0.0 };
            let moved = if i >= step { pmf[i - step] * p } else { 0.0 };
            pmf[i] = stay + moved;
        }
        top += step;
    }
    Ok(ScoreDistribution { offset: 0, scale, pmf })
}

/// Law of `weight * Binomial(count, prob)`, evaluated from the binomial mass
/// function directly.
pub fn binomial(count: u64, weight: i64, prob: f64) -> Result<ScoreDistribution> {
    check_prob("prob", prob)?;
    if weight < 0 {
        return Err(domain(format!("negative weight {weight}")));
    }
    if count == 0 || weight == 0 {
        return Ok(ScoreDistribution::point(0));
    }
    Ok(ScoreDistribution { offset: 0, scale: weight, pmf: binomial_pmf(count, prob) })
}

/// `P(Binomial(n, p) = k)` for `k = 0..=n`.
pub(crate) fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut coef = 1.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coef = coef * (n - k + 1) as f64 / k as f64;
            }
            coef * powu(p, k) * powu(q, n - k)
        })
        .collect()
}

/// Exact law of `X + Y` for independent `X ~ a`, `Y ~ b`.
pub fn convolve(a: &ScoreDistribution, b: &ScoreDistribution) -> ScoreDistribution {
    let spacing = match gcd(a.effective_scale(), b.effective_scale()) {
        0 => 1,
        g => g,
    };
    let x = a.on_lattice(spacing);
    let y = b.on_lattice(spacing);
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, &xm) in x.iter().enumerate() {
        if xm == 0.0 {
            continue;
        }
        for (o, &ym) in out[i..].iter_mut().zip(&y) {
            *o += xm * ym;
        }
    }
    ScoreDistribution { offset: a.offset + b.offset, scale: spacing, pmf: out }
}

/// `P(X <= a)`; free-function form of [`ScoreDistribution::cdf`].
pub fn cdf(d: &ScoreDistribution, a: i64) -> f64 {
    d.cdf(a)
}

/// `x^n` by binary exponentiation.
#[inline]
pub fn powu(mut x: f64, mut n: u64) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= x;
        }
        x *= x;
        n >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn term(w: i64, p: f64) -> BernoulliTerm {
        BernoulliTerm::new(w, p).unwrap()
    }

    fn masses(d: &ScoreDistribution) -> Vec<(i64, f64)> {
        d.iter().filter(|&(_, m)| m != 0.0).collect()
    }

    /// Sums over all 2^n outcomes.
    fn enumerate(terms: &[BernoulliTerm]) -> std::collections::BTreeMap<i64, f64> {
        let mut out = std::collections::BTreeMap::new();
        for mask in 0u32..(1 << terms.len()) {
            let mut value = 0;
            let mut prob = 1.0;
            for (i, t) in terms.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    value += t.weight;
                    prob *= t.prob;
                } else {
                    prob *= 1.0 - t.prob;
                }
            }
            *out.entry(value).or_insert(0.0) += prob;
        }
        out
    }

    fn assert_close(a: &ScoreDistribution, b: &ScoreDistribution, tol: f64) {
        let lo = a.offset().min(b.offset());
        let hi = a.max_value().max(b.max_value());
        for v in lo..=hi {
            assert!((a.mass(v) - b.mass(v)).abs() <= tol, "value {v}: {} vs {}", a.mass(v), b.mass(v));
        }
    }

    #[test]
    fn build_examples() {
        assert_eq!(masses(&build(&[term(1, 1.0)]).unwrap()), vec![(1, 1.0)]);
        assert_eq!(
            masses(&build(&[term(1, 0.5), term(1, 0.5)]).unwrap()),
            vec![(0, 0.25), (1, 0.5), (2, 0.25)]
        );
        assert_eq!(
            masses(&build(&[term(2, 0.5), term(3, 0.5)]).unwrap()),
            vec![(0, 0.25), (2, 0.25), (3, 0.25), (5, 0.25)]
        );
        assert_eq!(build(&[]).unwrap(), ScoreDistribution::point(0));
    }

    #[test]
    fn build_rejects_bad_terms() {
        assert!(build(&[BernoulliTerm { weight: 1, prob: 1.5 }]).is_err());
        assert!(build(&[BernoulliTerm { weight: -1, prob: 0.5 }]).is_err());
        assert!(BernoulliTerm::new(1, -0.1).is_err());
        assert!(binomial(3, 1, f64::NAN).is_err());
    }

    #[test]
    fn lattice_is_reduced() {
        let d = build(&[term(10, 0.3), term(20, 0.6), term(40, 0.5)]).unwrap();
        assert_eq!(d.scale(), 10);
        assert_eq!(d.len(), 1 + 1 + 2 + 4);
        assert!((d.cdf(29) - d.cdf(20)).abs() < 1e-15);
        assert_eq!(d.mass(25), 0.0);
        assert!((d.mass(70) - 0.3 * 0.6 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(0, 5, 0.3).unwrap(), ScoreDistribution::point(0));
        assert_eq!(masses(&binomial(2, 1, 0.5).unwrap()), vec![(0, 0.25), (1, 0.5), (2, 0.25)]);
        let d = binomial(3, 2, 0.75).unwrap();
        let expect = [0.25f64.powi(3), 3.0 * 0.75 * 0.25 * 0.25, 3.0 * 0.75 * 0.75 * 0.25, 0.75f64.powi(3)];
        for (k, e) in expect.iter().enumerate() {
            assert!((d.mass(2 * k as i64) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn convolve_examples() {
        let coin = build(&[term(1, 0.5)]).unwrap();
        let x = build(&[term(2, 0.3), term(3, 0.9)]).unwrap();
        assert_eq!(convolve(&ScoreDistribution::point(0), &x), x);
        assert_eq!(masses(&convolve(&coin, &coin)), vec![(0, 0.25), (1, 0.5), (2, 0.25)]);

        let a = ScoreDistribution::from_parts(-1, 1, vec![0.2, 0.3, 0.5]).unwrap();
        let b = ScoreDistribution::from_parts(4, 2, vec![0.6, 0.1, 0.3]).unwrap();
        let c = convolve(&a, &b);
        for v in c.offset()..=c.max_value() {
            let mut brute = 0.0;
            for (va, ma) in a.iter() {
                for (vb, mb) in b.iter() {
                    if va + vb == v {
                        brute += ma * mb;
                    }
                }
            }
            assert!((c.mass(v) - brute).abs() < 1e-15, "value {v}");
        }
        assert_eq!(c.len(), a.len() + b.on_lattice(1).len() - 1);
    }

    #[test]
    fn cdf_examples() {
        let tri = ScoreDistribution::from_parts(0, 1, vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(cdf(&ScoreDistribution::point(0), 0), 1.0);
        assert_eq!(cdf(&tri, 1), 0.75);
        assert_eq!(cdf(&tri, -1), 0.0);
        assert_eq!(cdf(&tri, 99), 1.0);
    }

    fn arb_terms(max: usize) -> impl Strategy<Value = Vec<BernoulliTerm>> {
        prop::collection::vec((0i64..6, 0.0f64..=1.0), 0..=max)
            .prop_map(|v| v.into_iter().map(|(weight, prob)| BernoulliTerm { weight, prob }).collect())
    }

    proptest! {
        #[test]
        fn build_matches_enumeration(terms in arb_terms(12)) {
            let d = build(&terms).unwrap();
            let total: f64 = d.pmf().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(d.pmf().iter().all(|&m| m >= 0.0));
            let reduced: i64 = terms.iter().map(|t| if d.scale() > 0 { t.weight / d.scale() } else { 0 }).sum();
            prop_assert_eq!(d.len() as i64, reduced + 1);
            let brute = enumerate(&terms);
            for (v, m) in &brute {
                prop_assert!((d.mass(*v) - m).abs() <= 1e-12);
            }
            for (v, m) in d.iter() {
                if !brute.contains_key(&v) {
                    prop_assert!(m.abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn binomial_matches_repeated_terms(c in 0u64..=12, w in 0i64..5, p in 0.0f64..=1.0) {
            let direct = binomial(c, w, p).unwrap();
            let terms: Vec<_> = (0..c).map(|_| BernoulliTerm { weight: w, prob: p }).collect();
            assert_close(&direct, &build(&terms).unwrap(), 1e-12);
        }

        #[test]
        fn convolve_commutes_and_associates(a in arb_terms(4), b in arb_terms(4), c in arb_terms(4)) {
            let (a, b, c) = (build(&a).unwrap(), build(&b).unwrap(), build(&c).unwrap());
            assert_close(&convolve(&a, &b), &convolve(&b, &a), 1e-12);
            assert_close(&convolve(&convolve(&a, &b), &c), &convolve(&a, &convolve(&b, &c)), 1e-12);
        }

        #[test]
        fn cdf_is_monotone(terms in arb_terms(8)) {
            let d = build(&terms).unwrap();
            let mut prev = 0.0;
            for a in d.offset() - 1..=d.max_value() + 1 {
                let f = d.cdf(a);
                prop_assert!(f + 1e-15 >= prev);
                prev = f;
            }
            prop_assert!((d.cdf(d.max_value()) - 1.0).abs() <= 1e-12);
        }
    }
}
