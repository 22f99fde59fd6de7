//! Pick-s horse-race pools.
//!
//! A ticket names one winner in each of `s` races and pays only if all `s`
//! picks win. We buy `n` i.i.d. tickets from a [`TicketStrategy`] `Q`, the
//! public buys `k` from `R`, and winners split the pool
//! `T = C + b (n + k) (1 - alpha)`.
//!
//! Strategies are searched over the two-parameter tilt family of
//! [`tilt`]: `lambda` controls concentration (entropy falls as `lambda`
//! grows) and `phi` picks how many favorites absorb the extra mass.

use std::path::Path;

use rayon::prelude::*;
use rand_distr::{Binomial, Distribution};

use crate::bitstring::Estimate;
use crate::error::{check_prob, domain, Error, Result};
use crate::optimizer::{self, Evaluation, GridSpec, SurfacePoint};
use crate::rng::{self, unit_f64};

const BELMONT_CSV: &str = include_str!("../data/belmont_pick6_2023-05-21.csv");

/// Default cap on the number of outcome tuples the exact bound will visit.
pub const DEFAULT_OUTCOME_CAP: u64 = 100_000_000;

/// True win probabilities per race, each race sorted from favorite down.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceCard {
    races: Vec<Vec<f64>>,
    /// Original horse labels, in the same (sorted) order.
    labels: Vec<Vec<u32>>,
}

impl RaceCard {
    /// Validates and wraps per-race win probabilities. Each race must sum to
    /// one (within `1e-9`) and be sorted nonincreasing.
    pub fn new(races: Vec<Vec<f64>>) -> Result<Self> {
        let labels = races.iter().map(|r| (1..=r.len() as u32).collect()).collect();
        let card = RaceCard { races, labels };
        card.validate()?;
        Ok(card)
    }

    fn validate(&self) -> Result<()> {
        if self.races.is_empty() {
            return Err(domain("a card needs at least one race"));
        }
        for (j, race) in self.races.iter().enumerate() {
            if race.is_empty() {
                return Err(domain(format!("race {} has no horses", j + 1)));
            }
            for &p in race {
                check_prob("win probability", p)?;
            }
            let total: f64 = race.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(domain(format!("race {} probabilities sum to {total}", j + 1)));
            }
            if race.windows(2).any(|w| w[0] < w[1]) {
                return Err(domain(format!("race {} is not sorted by decreasing probability", j + 1)));
            }
        }
        Ok(())
    }

    /// Parses the `race_index,horse_index,win_prob` CSV format. Lines starting
    /// with `#` are comments. Horses are sorted by decreasing probability.
    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        let data_err = |message: String| Error::Data { path: origin.to_string(), message };
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| data_err(format!("missing column `{name}`")))
        };
        let (ci, hi, pi) = (col("race_index")?, col("horse_index")?, col("win_prob")?);
        let mut rows: Vec<(usize, u32, f64)> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let race: usize = field(ci).parse().map_err(|_| data_err(format!("row {}: bad race_index", line + 1)))?;
            let horse: u32 = field(hi).parse().map_err(|_| data_err(format!("row {}: bad horse_index", line + 1)))?;
            let prob: f64 = field(pi).parse().map_err(|_| data_err(format!("row {}: bad win_prob", line + 1)))?;
            if race == 0 || horse == 0 {
                return Err(data_err(format!("row {}: indices are 1-based", line + 1)));
            }
            rows.push((race, horse, prob));
        }
        let n_races = rows.iter().map(|r| r.0).max().ok_or_else(|| data_err("no rows".into()))?;
        let mut races: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_races];
        for (race, horse, prob) in rows {
            if races[race - 1].iter().any(|&(h, _)| h == horse) {
                return Err(data_err(format!("race {race} lists horse {horse} twice")));
            }
            races[race - 1].push((horse, prob));
        }
        for race in races.iter_mut() {
            race.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        let card = RaceCard {
            labels: races.iter().map(|r| r.iter().map(|h| h.0).collect()).collect(),
            races: races.into_iter().map(|r| r.into_iter().map(|h| h.1).collect()).collect(),
        };
        card.validate().map_err(|e| data_err(e.to_string()))?;
        Ok(card)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// The bundled six-race card (illustrative odds-shaped probabilities).
    pub fn belmont() -> Self {
        Self::from_csv_str(BELMONT_CSV, "belmont_pick6_2023-05-21.csv").expect("bundled card is valid")
    }

    pub fn races(&self) -> &[Vec<f64>] {
        &self.races
    }

    pub fn labels(&self) -> &[Vec<u32>] {
        &self.labels
    }

    /// Number of races `s`.
    pub fn len(&self) -> usize {
        self.races.len()
    }

    pub fn is_empty(&self) -> bool {
        self.races.is_empty()
    }

    /// Number of distinct outcome tuples, `prod_j m_j`.
    pub fn outcomes(&self) -> u64 {
        self.races.iter().map(|r| r.len() as u64).product()
    }

    /// The card viewed as a ticket strategy (`Q = P`).
    pub fn as_strategy(&self) -> TicketStrategy {
        TicketStrategy { races: self.races.clone() }
    }
}

/// Per-race pick probabilities for one bettor (us or the public).
#[derive(Debug, Clone, PartialEq)]
pub struct TicketStrategy {
    races: Vec<Vec<f64>>,
}

impl TicketStrategy {
    pub fn new(races: Vec<Vec<f64>>) -> Result<Self> {
        for (j, race) in races.iter().enumerate() {
            if race.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(domain(format!("race {} has a negative or non-finite pick probability", j + 1)));
            }
            let total: f64 = race.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(domain(format!("race {} pick probabilities sum to {total}", j + 1)));
            }
        }
        Ok(TicketStrategy { races })
    }

    pub fn races(&self) -> &[Vec<f64>] {
        &self.races
    }

    fn check_shape(&self, card: &RaceCard, who: &str) -> Result<()> {
        let same = self.races.len() == card.races.len()
            && self.races.iter().zip(&card.races).all(|(a, b)| a.len() == b.len());
        if same {
            Ok(())
        } else {
            Err(domain(format!("{who} strategy does not match the card's race sizes")))
        }
    }
}

/// Carryover, take, ticket price and entry counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEconomics {
    pub carryover: f64,
    pub take: f64,
    pub price: f64,
    pub n: u64,
    pub k: u64,
}

impl PoolEconomics {
    /// Economics with a $1 ticket.
    pub fn new(carryover: f64, take: f64, n: u64, k: u64) -> Result<Self> {
        Self::with_price(carryover, take, 1.0, n, k)
    }

    pub fn with_price(carryover: f64, take: f64, price: f64, n: u64, k: u64) -> Result<Self> {
        if !(carryover >= 0.0) || !carryover.is_finite() {
            return Err(domain(format!("carryover {carryover} must be non-negative")));
        }
        if !(0.0..1.0).contains(&take) {
            return Err(domain(format!("take {take} must lie in [0, 1)")));
        }
        if !(price > 0.0) || !price.is_finite() {
            return Err(domain(format!("ticket price {price} must be positive")));
        }
        Ok(PoolEconomics { carryover, take, price, n, k })
    }

    /// Prize pool `T = C + b (n + k) (1 - alpha)`.
    pub fn total_pool(&self) -> f64 {
        self.carryover + self.price * (self.n + self.k) as f64 * (1.0 - self.take)
    }

    pub fn with_entries(&self, n: u64, k: u64) -> Self {
        PoolEconomics { n, k, ..*self }
    }
}

/// Tilt parameters: `lambda > 0`, `phi` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltParams {
    pub lambda: f64,
    pub phi: f64,
}

impl TiltParams {
    pub fn new(lambda: f64, phi: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(format!("lambda {lambda} must be positive")));
        }
        check_prob("phi", phi)?;
        Ok(TiltParams { lambda, phi })
    }
}

/// Which form of the `lambda >= 1` branch to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiltForm {
    /// Up-weight the top `c` horses by `lambda`, down-weight the rest by
    /// `1 / lambda`.
    #[default]
    Standard,
    /// Both indicators select the top `c` horses, so every other horse gets
    /// zero mass. Kept for comparison with the formula as typeset.
    TopOnly,
}

/// Number of favorites `c = round(phi * m)`, rounded half away from zero and
/// clamped to `[1, m]`.
pub fn favorite_count(phi: f64, horses: usize) -> usize {
    ((phi * horses as f64).round() as usize).clamp(1, horses)
}

/// Tilted strategy `Q(lambda, phi)`.
///
/// For `lambda < 1` each race gets mass `(P_i / P_c)^lambda`, which tends to
/// uniform as `lambda -> 0`; the `P_c` denominator cancels on normalization,
/// so `phi` has no effect there. For `lambda >= 1` each horse gets
/// `P_i * lambda` if it is among the top `c` and `P_i / lambda` otherwise.
pub fn tilt(card: &RaceCard, t: TiltParams) -> Result<TicketStrategy> {
    tilt_with(card, t, TiltForm::Standard)
}

pub fn tilt_with(card: &RaceCard, t: TiltParams, form: TiltForm) -> Result<TicketStrategy> {
    let TiltParams { lambda, phi } = TiltParams::new(t.lambda, t.phi)?;
    let races = card
        .races
        .iter()
        .map(|race| {
            let c = favorite_count(phi, race.len());
            let raw: Vec<f64> = if lambda < 1.0 {
                let pivot = race[c - 1];
                race.iter()
                    .map(|&p| if pivot > 0.0 { (p / pivot).powf(lambda) } else { p.powf(lambda) })
                    .collect()
            } else {
                race.iter()
                    .enumerate()
                    .map(|(i, &p)| match (i < c, form) {
                        (true, TiltForm::Standard) => p * lambda,
                        (false, TiltForm::Standard) => p / lambda,
                        (true, TiltForm::TopOnly) => p * (lambda + 1.0 / lambda),
                        (false, TiltForm::TopOnly) => 0.0,
                    })
                    .collect()
            };
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
        .collect();
    TicketStrategy::new(races)
}

/// The public's strategy `R(lambda_opp) = Q(lambda_opp, 1/8)`.
pub fn opponent_strategy(card: &RaceCard, lambda_opp: f64) -> Result<TicketStrategy> {
    tilt(card, TiltParams::new(lambda_opp, 0.125)?)
}

/// Lower bound on expected profit:
///
/// `-b n + T * sum_tau P(tau) (1 - (1 - Q(tau))^n) / (1 + k R(tau))`,
///
/// where `P(tau)`, `Q(tau)`, `R(tau)` are products over races. It follows from
/// `w / (w + w') >= 1 / (1 + w')` for `w >= 1` and Jensen's inequality on
/// `1 / (1 + W_opp)`.
pub fn expected_profit_lower_bound(
    card: &RaceCard,
    q: &TicketStrategy,
    r: &TicketStrategy,
    econ: &PoolEconomics,
) -> Result<f64> {
    expected_profit_lower_bound_capped(card, q, r, econ, DEFAULT_OUTCOME_CAP)
}

pub fn expected_profit_lower_bound_capped(
    card: &RaceCard,
    q: &TicketStrategy,
    r: &TicketStrategy,
    econ: &PoolEconomics,
    cap: u64,
) -> Result<f64> {
    q.check_shape(card, "our")?;
    r.check_shape(card, "opponent")?;
    if econ.n == 0 {
        return Err(domain("the bound needs n >= 1"));
    }
    let outcomes = card.outcomes();
    if outcomes > cap {
        return Err(Error::Resource(format!("{outcomes} outcome tuples exceed the cap of {cap}")));
    }
    let sum = BoundWalk { card, q, r, n: econ.n as f64, k: econ.k as f64 }.sum(0, 1.0, 1.0, 1.0);
    Ok(-econ.price * econ.n as f64 + econ.total_pool() * sum)
}

struct BoundWalk<'a> {
    card: &'a RaceCard,
    q: &'a TicketStrategy,
    r: &'a TicketStrategy,
    n: f64,
    k: f64,
}

impl BoundWalk<'_> {
    /// Sum over all completions of a race prefix with running products.
    fn sum(&self, race: usize, p: f64, q: f64, r: f64) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        if race == self.card.races.len() {
            // 1 - (1 - q)^n without cancellation for tiny q.
            let hit = -(self.n * (-q).ln_1p()).exp_m1();
            return p * hit / (1.0 + self.k * r);
        }
        let (ps, qs, rs) = (&self.card.races[race], &self.q.races[race], &self.r.races[race]);
        (0..ps.len()).map(|i| self.sum(race + 1, p * ps[i], q * qs[i], r * rs[i])).sum()
    }
}

/// Trials per independently seeded block of the profit simulation.
const BLOCK: u64 = 1 << 12;

/// Monte-Carlo estimate of the exact expected profit.
///
/// Each trial draws the winners `tau ~ P`, then `W ~ Binomial(n, Q(tau))` and
/// `W_opp ~ Binomial(k, R(tau))`, and records `T W / (W + W_opp) - b n`
/// (with `0/0 = 0`). Block `b` of [`BLOCK`] trials uses stream `(seed, b)`;
/// within a trial the draws happen in the order listed.
pub fn expected_profit_monte_carlo(
    card: &RaceCard,
    q: &TicketStrategy,
    r: &TicketStrategy,
    econ: &PoolEconomics,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    q.check_shape(card, "our")?;
    r.check_shape(card, "opponent")?;
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    if econ.n == 0 {
        return Ok(Estimate { mean: 0.0, stderr: 0.0 });
    }
    let pool = econ.total_pool();
    let stake = econ.price * econ.n as f64;
    let cumulative: Vec<Vec<f64>> = card
        .races
        .iter()
        .map(|race| {
            race.iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<Result<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &[b]);
            let count = BLOCK.min(trials - b * BLOCK);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let (mut qt, mut rt) = (1.0, 1.0);
                for (j, cum) in cumulative.iter().enumerate() {
                    let u = unit_f64(&mut rng) * cum[cum.len() - 1];
                    let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
                    qt *= q.races[j][i];
                    rt *= r.races[j][i];
                }
                let w = draw_binomial(econ.n, qt, &mut rng)?;
                let w_opp = draw_binomial(econ.k, rt, &mut rng)?;
                let share = if w == 0 { 0.0 } else { w as f64 / (w + w_opp) as f64 };
                let profit = pool * share - stake;
                sum += profit;
                sum_sq += profit * profit;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for part in parts {
        let (s, s2) = part?;
        sum += s;
        sum_sq += s2;
    }
    Ok(Estimate::from_moments(sum, sum_sq, trials as f64))
}

fn draw_binomial(n: u64, p: f64, rng: &mut rng::StreamRng) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    let dist = Binomial::new(n, p.min(1.0)).map_err(|e| domain(format!("binomial({n}, {p}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Result of [`optimize_tilt`].
#[derive(Debug, Clone, PartialEq)]
pub struct TiltOptimum {
    pub best: TiltParams,
    pub value: f64,
    /// Every grid point, `lambda` outer and `phi` inner.
    pub surface: Vec<SurfacePoint>,
}

/// Maximizes the profit lower bound over a `lambda x phi` grid against the
/// public strategy `R(lambda_opp)`. Ties go to the first point in
/// row-major order.
pub fn optimize_tilt(
    card: &RaceCard,
    econ: &PoolEconomics,
    lambda_opp: f64,
    lambda_grid: &[f64],
    phi_grid: &[f64],
) -> Result<TiltOptimum> {
    let grid = GridSpec::new().axis("lambda", lambda_grid.to_vec())?.axis("phi", phi_grid.to_vec())?;
    let public = opponent_strategy(card, lambda_opp)?;
    let surface = optimizer::sweep(&grid, 0, |params, _| {
        let t = TiltParams::new(params.get("lambda").unwrap_or(f64::NAN), params.get("phi").unwrap_or(f64::NAN))?;
        let ours = tilt(card, t)?;
        Ok(Evaluation::exact(expected_profit_lower_bound(card, &ours, &public, econ)?))
    })?;
    let top = optimizer::argmax(&surface)?;
    let best = TiltParams::new(top.params.get("lambda").unwrap_or(f64::NAN), top.params.get("phi").unwrap_or(f64::NAN))?;
    let value = top.objective;
    Ok(TiltOptimum { best, value, surface })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aep::shannon_entropy;
    use proptest::prelude::*;

    fn certain_card() -> RaceCard {
        RaceCard::new(vec![vec![1.0]]).unwrap()
    }

    #[test]
    fn card_validation() {
        assert!(RaceCard::new(vec![vec![0.3, 0.7]]).is_err());
        assert!(RaceCard::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(RaceCard::new(vec![]).is_err());
        let csv = "race_index,horse_index,win_prob\n1,1,0.2\n1,2,0.8\n2,1,1.0\n";
        let card = RaceCard::from_csv_str(csv, "t").unwrap();
        assert_eq!(card.races(), &[vec![0.8, 0.2], vec![1.0]]);
        assert_eq!(card.labels(), &[vec![2, 1], vec![1]]);
        let bad = "race_index,horse_index,win_prob\n1,1,0.2\n1,2,0.7\n";
        assert!(matches!(RaceCard::from_csv_str(bad, "t"), Err(Error::Data { .. })));
        assert!(RaceCard::from_csv_str("race,horse,p\n1,1,1\n", "t").is_err());
    }

    #[test]
    fn bundled_card_shape() {
        let card = RaceCard::belmont();
        assert_eq!(card.len(), 6);
        assert_eq!(card.races()[5].len(), 8);
        assert_eq!(card.outcomes(), 241_920);
    }

    #[test]
    fn tilt_at_one_is_identity() {
        let card = RaceCard::belmont();
        for phi in [0.0, 0.125, 0.5, 1.0] {
            let q = tilt(&card, TiltParams::new(1.0, phi).unwrap()).unwrap();
            for (a, b) in q.races().iter().flatten().zip(card.races().iter().flatten()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tilt_near_zero_is_uniform() {
        let card = RaceCard::belmont();
        let q = tilt(&card, TiltParams::new(1e-9, 0.5).unwrap()).unwrap();
        for race in q.races() {
            let u = 1.0 / race.len() as f64;
            assert!(race.iter().all(|&x| (x - u).abs() < 1e-6));
        }
    }

    #[test]
    fn tilt_hand_example() {
        let card = RaceCard::new(vec![vec![0.5, 0.3, 0.2]]).unwrap();
        let q = tilt(&card, TiltParams::new(2.0, 1.0 / 3.0).unwrap()).unwrap();
        let expect = [0.8, 0.12, 0.08];
        for (a, b) in q.races()[0].iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let top = tilt_with(&card, TiltParams::new(2.0, 1.0 / 3.0).unwrap(), TiltForm::TopOnly).unwrap();
        assert_eq!(top.races()[0], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn phi_is_inert_below_one() {
        let card = RaceCard::belmont();
        let a = tilt(&card, TiltParams::new(0.5, 0.0).unwrap()).unwrap();
        let b = tilt(&card, TiltParams::new(0.5, 0.9).unwrap()).unwrap();
        for (x, y) in a.races().iter().flatten().zip(b.races().iter().flatten()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn favorite_count_rounding() {
        assert_eq!(favorite_count(0.0, 8), 1);
        assert_eq!(favorite_count(3.0 / 8.0, 8), 3);
        assert_eq!(favorite_count(1.0 / 8.0, 8), 1);
        assert_eq!(favorite_count(0.5, 5), 3);
        assert_eq!(favorite_count(1.0, 6), 6);
        assert!(TiltParams::new(0.0, 0.5).is_err());
        assert!(TiltParams::new(1.0, 1.5).is_err());
    }

    #[test]
    fn opponent_examples() {
        let card = RaceCard::belmont();
        assert_eq!(opponent_strategy(&card, 1.0).unwrap().races(), card.as_strategy().races());
        let flat = opponent_strategy(&card, 1e-9).unwrap();
        assert!(flat.races()[0].iter().all(|&x| (x - 1.0 / 7.0).abs() < 1e-6));
        // Eight horses, phi = 1/8: only the favorite is up-weighted.
        let race = card.races()[5].clone();
        let r = opponent_strategy(&card, 3.0).unwrap();
        let raw: Vec<f64> = race.iter().enumerate().map(|(i, p)| if i == 0 { p * 3.0 } else { p / 3.0 }).collect();
        let z: f64 = raw.iter().sum();
        for (a, b) in r.races()[5].iter().zip(raw.iter().map(|x| x / z)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_falls_with_lambda() {
        let card = RaceCard::belmont();
        for phi in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut prev = f64::INFINITY;
            for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let q = tilt(&card, TiltParams::new(lambda, phi).unwrap()).unwrap();
                let h: f64 = q.races().iter().map(|r| shannon_entropy(r)).sum();
                assert!(h <= prev + 1e-12, "phi {phi} lambda {lambda}");
                prev = h;
            }
        }
    }

    #[test]
    fn certain_winner_breaks_even() {
        let card = certain_card();
        let s = card.as_strategy();
        let econ = PoolEconomics::new(0.0, 0.0, 1, 0).unwrap();
        assert_eq!(econ.total_pool(), 1.0);
        assert_eq!(expected_profit_lower_bound(&card, &s, &s, &econ).unwrap(), 0.0);
        let mc = expected_profit_monte_carlo(&card, &s, &s, &econ, 1000, 1).unwrap();
        assert_eq!((mc.mean, mc.stderr), (0.0, 0.0));
        let none = expected_profit_monte_carlo(&card, &s, &s, &econ.with_entries(0, 5), 1000, 1).unwrap();
        assert_eq!((none.mean, none.stderr), (0.0, 0.0));
    }

    #[test]
    fn no_opponents_collapses_the_bound() {
        let card = RaceCard::new(vec![vec![0.6, 0.4], vec![0.5, 0.3, 0.2]]).unwrap();
        let q = TicketStrategy::new(vec![vec![0.3, 0.7], vec![0.2, 0.2, 0.6]]).unwrap();
        let econ = PoolEconomics::new(40.0, 0.1, 3, 0).unwrap();
        let bound = expected_profit_lower_bound(&card, &q, &card.as_strategy(), &econ).unwrap();
        let mut sum = 0.0;
        for i in 0..2 {
            for j in 0..3 {
                let qt = q.races()[0][i] * q.races()[1][j];
                sum += card.races()[0][i] * card.races()[1][j] * (1.0 - (1.0 - qt).powi(3));
            }
        }
        assert!((bound - (-3.0 + econ.total_pool() * sum)).abs() < 1e-12);
    }

    #[test]
    fn two_race_reference_value() {
        // Four outcome tuples, summed by hand from the closed form.
        let card = RaceCard::new(vec![vec![0.7, 0.3], vec![0.7, 0.3]]).unwrap();
        let q = card.as_strategy();
        let r = TicketStrategy::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let econ = PoolEconomics::new(10.0, 0.05, 2, 3).unwrap();
        let bound = expected_profit_lower_bound(&card, &q, &r, &econ).unwrap();
        assert!((bound - 2.5168714285714273).abs() < 1e-12, "{bound}");
        let mc = expected_profit_monte_carlo(&card, &q, &r, &econ, 1_000_000, 17).unwrap();
        assert!(bound <= mc.mean + 4.0 * mc.stderr);
    }

    #[test]
    fn disjoint_support_loses_the_stake() {
        let card = RaceCard::new(vec![vec![1.0, 0.0]]).unwrap();
        let q = TicketStrategy::new(vec![vec![0.0, 1.0]]).unwrap();
        let econ = PoolEconomics::with_price(1000.0, 0.1, 2.0, 7, 50).unwrap();
        let bound = expected_profit_lower_bound(&card, &q, &card.as_strategy(), &econ).unwrap();
        assert_eq!(bound, -14.0);
    }

    #[test]
    fn cap_and_shape_errors() {
        let card = RaceCard::belmont();
        let s = card.as_strategy();
        let econ = PoolEconomics::new(0.0, 0.0, 1, 1).unwrap();
        let err = expected_profit_lower_bound_capped(&card, &s, &s, &econ, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        let wrong = TicketStrategy::new(vec![vec![1.0]]).unwrap();
        assert!(expected_profit_lower_bound(&card, &wrong, &s, &econ).is_err());
        assert!(expected_profit_lower_bound(&card, &s, &s, &econ.with_entries(0, 1)).is_err());
    }

    #[test]
    fn optimize_tie_and_singleton_rules() {
        let card = certain_card();
        let econ = PoolEconomics::new(0.0, 0.0, 1, 0).unwrap();
        let one = optimize_tilt(&card, &econ, 1.0, &[2.0], &[0.5]).unwrap();
        assert_eq!(one.best, TiltParams { lambda: 2.0, phi: 0.5 });
        let all = optimize_tilt(&card, &econ, 1.0, &[0.5, 1.0, 3.0], &[0.0, 1.0]).unwrap();
        assert!(all.surface.iter().all(|p| p.objective == all.value));
        assert_eq!(all.best, TiltParams { lambda: 0.5, phi: 0.0 });
        assert_eq!(all.surface.len(), 6);
    }

    proptest! {
        #[test]
        fn tilt_is_a_strategy(lambda in 1e-3f64..20.0, phi in 0.0f64..=1.0) {
            let card = RaceCard::belmont();
            let q = tilt(&card, TiltParams::new(lambda, phi).unwrap()).unwrap();
            for race in q.races() {
                prop_assert!((race.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(race.iter().all(|&x| x >= 0.0));
            }
        }

        #[test]
        fn bound_grows_with_carryover(c1 in 0.0f64..1e5, extra in 0.0f64..1e5, lambda in 0.2f64..4.0) {
            let card = RaceCard::new(vec![vec![0.5, 0.3, 0.2], vec![0.6, 0.4]]).unwrap();
            let q = tilt(&card, TiltParams::new(lambda, 0.5).unwrap()).unwrap();
            let r = opponent_strategy(&card, 1.5).unwrap();
            let lo = expected_profit_lower_bound(&card, &q, &r, &PoolEconomics::new(c1, 0.05, 4, 20).unwrap()).unwrap();
            let hi = expected_profit_lower_bound(&card, &q, &r, &PoolEconomics::new(c1 + extra, 0.05, 4, 20).unwrap()).unwrap();
            prop_assert!(hi >= lo - 1e-9);
        }
    }
}
