//! Single-elimination tournaments scored ESPN-style.
//!
//! Teams are indexed `0..N` in nonincreasing Elo order, so for `i < j` team
//! `i` is the (weak) favorite. A [`Field`] also fixes which team starts in
//! each first-round slot; slot `2g` meets slot `2g + 1`, and in later rounds
//! the winners of games `2g` and `2g + 1` meet.

mod montecarlo;

use std::path::Path;

use rand::RngCore;

use crate::error::{check_prob, domain, Error, Result};
use crate::rng::Coin;

pub use montecarlo::{mc_expected_max_score, mc_surface, mc_win_probability, McSettings, McSurface};

const NCAA_2021_CSV: &str = include_str!("../../data/ncaa_2021_elo.csv");

/// First-round seed order within a region: 1v16, 8v9, 5v12, 4v13, 6v11, 3v14,
/// 7v10, 2v15.
pub const REGION_SEED_ORDER: [u8; 16] = [1, 16, 8, 9, 5, 12, 4, 13, 6, 11, 3, 14, 7, 10, 2, 15];

/// Elo points per rating unit in the win-probability formula.
pub const ELO_SCALE: f64 = 30.464 / 400.0;

/// Largest field [`enumerate_brackets`] will expand.
pub const MAX_ENUMERATED_TEAMS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    pub name: String,
    pub region: String,
    pub seed: u8,
    pub elo: f64,
}

/// Teams plus the first-round slot assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    teams: Vec<Team>,
    /// `slots[s]` is the index of the team starting in slot `s`.
    slots: Vec<usize>,
}

impl Field {
    /// Builds a field from teams listed in slot order. The size must be a
    /// power of two (at least 2). Indices follow Elo, highest first; equal
    /// ratings keep their listed order.
    pub fn from_slot_order(teams: Vec<Team>) -> Result<Self> {
        let n = teams.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(domain(format!("a field needs a power-of-two number of teams, got {n}")));
        }
        if let Some(t) = teams.iter().find(|t| !t.elo.is_finite()) {
            return Err(domain(format!("team {} has a non-finite rating", t.name)));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| teams[b].elo.total_cmp(&teams[a].elo));
        let mut slots = vec![0; n];
        for (index, &slot) in order.iter().enumerate() {
            slots[slot] = index;
        }
        let mut by_index: Vec<Option<Team>> = teams.into_iter().map(Some).collect();
        let teams = order.iter().map(|&s| by_index[s].take().expect("each slot once")).collect();
        Ok(Field { teams, slots })
    }

    /// Parses the `team_name,region,seed,elo` CSV: four regions of sixteen
    /// seeds each. Regions meet in the semifinals in file order, first
    /// against second and third against fourth.
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
        let (ci, cr, cs, ce) = (col("team_name")?, col("region")?, col("seed")?, col("elo")?);
        let mut regions: Vec<(String, Vec<Option<Team>>)> = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let at = |msg: &str| data_err(format!("row {}: {msg}", row + 1));
            let field = |i: usize| rec.get(i).unwrap_or("").to_string();
            let seed: u8 = field(cs).parse().map_err(|_| at("bad seed"))?;
            let elo: f64 = field(ce).parse().map_err(|_| at("bad elo"))?;
            if !(1..=16).contains(&seed) {
                return Err(at("seed must lie in 1..=16"));
            }
            if !elo.is_finite() {
                return Err(at("elo must be finite"));
            }
            let team = Team { name: field(ci), region: field(cr), seed, elo };
            let pos = match regions.iter().position(|(name, _)| *name == team.region) {
                Some(pos) => pos,
                None => {
                    regions.push((team.region.clone(), vec![None; 16]));
                    regions.len() - 1
                }
            };
            let spot = &mut regions[pos].1[seed as usize - 1];
            if spot.is_some() {
                return Err(at(&format!("region {} lists seed {seed} twice", team.region)));
            }
            *spot = Some(team);
        }
        if regions.len() != 4 {
            return Err(data_err(format!("expected 4 regions, found {}", regions.len())));
        }
        let mut ordered = Vec::with_capacity(64);
        for (name, seeds) in &regions {
            for &s in &REGION_SEED_ORDER {
                let team = seeds[s as usize - 1].clone().ok_or_else(|| data_err(format!("region {name} has no seed {s}")))?;
                ordered.push(team);
            }
        }
        Self::from_slot_order(ordered)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// The bundled 2021 field. The ratings are a reconstruction spanning the
    /// published range (71.1 to 96.5), not the original snapshot.
    pub fn ncaa_2021() -> Self {
        Self::from_csv_str(NCAA_2021_CSV, "ncaa_2021_elo.csv").expect("bundled field is valid")
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    /// Teams in index (Elo) order.
    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn rounds(&self) -> usize {
        self.len().trailing_zeros() as usize
    }

    pub fn games(&self) -> usize {
        self.len() - 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.teams.iter().position(|t| t.name == name)
    }

    /// The bracket in which the lower index wins every game.
    pub fn chalk_bracket(&self) -> TournamentBracket {
        let mut winners = Vec::with_capacity(self.games());
        let mut prev: Vec<usize> = self.slots.clone();
        while prev.len() > 1 {
            let next: Vec<usize> = prev.chunks(2).map(|g| g[0].min(g[1])).collect();
            winners.extend_from_slice(&next);
            prev = next;
        }
        TournamentBracket { winners }
    }
}

/// Pairwise probabilities `M[i][j]` that `i` beats `j` (or is picked to).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMatrix {
    size: usize,
    data: Vec<f64>,
}

/// True win probabilities; same layout as a strategy.
pub type WinMatrix = StrategyMatrix;

impl StrategyMatrix {
    /// Builds a matrix from its upper triangle: `upper(i, j)` for `i < j`.
    /// The lower triangle is the exact complement and the diagonal is 1/2.
    pub fn from_upper(size: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.5; size * size];
        for i in 0..size {
            for j in i + 1..size {
                let p = upper(i, j);
                check_prob("pairwise probability", p)?;
                data[i * size + j] = p;
                data[j * size + i] = 1.0 - p;
            }
        }
        Ok(StrategyMatrix { size, data })
    }

    /// Builds a matrix entry by entry. Off-diagonal pairs must be
    /// complementary within `1e-12`; the diagonal is forced to 1/2.
    pub fn from_fn(size: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.5; size * size];
        for i in 0..size {
            for j in 0..size {
                if i != j {
                    let p = entry(i, j);
                    check_prob("pairwise probability", p)?;
                    data[i * size + j] = p;
                }
            }
        }
        for i in 0..size {
            for j in i + 1..size {
                if (data[i * size + j] + data[j * size + i] - 1.0).abs() > 1e-12 {
                    return Err(domain(format!("entries ({i}, {j}) and ({j}, {i}) do not sum to one")));
                }
            }
        }
        Ok(StrategyMatrix { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    fn check_field(&self, field: &Field, what: &str) -> Result<()> {
        if self.size == field.len() {
            Ok(())
        } else {
            Err(domain(format!("{what} is {0}x{0} but the field has {1} teams", self.size, field.len())))
        }
    }
}

/// `P_ij = 1 / (1 + 10^(-(beta_i - beta_j) * 30.464 / 400))`.
pub fn elo_win_probability(beta_i: f64, beta_j: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-(beta_i - beta_j) * ELO_SCALE))
}

pub fn elo_to_winmatrix(field: &Field) -> WinMatrix {
    let t = field.teams();
    StrategyMatrix::from_upper(t.len(), |i, j| elo_win_probability(t[i].elo, t[j].elo)).expect("logistic values are probabilities")
}

/// `Q(lambda)`: uniform coin flips at 0, `P` at 1/2, always the favorite at 1,
/// linear in between.
pub fn interpolated_strategy(p: &WinMatrix, lambda: f64) -> Result<StrategyMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(domain(format!("lambda = {lambda} must lie in [0, 1]")));
    }
    StrategyMatrix::from_upper(p.size(), |i, j| {
        let pij = p.get(i, j);
        if lambda <= 0.5 {
            (1.0 - 2.0 * lambda) * 0.5 + 2.0 * lambda * pij
        } else {
            let t = 2.0 * (lambda - 0.5);
            (1.0 - t) * pij + t
        }
    })
}

/// Opponents who back the better seed with probability 0.9, or flip a fair
/// coin when the seeds differ by at most one.
pub fn chalky_opponents(field: &Field) -> StrategyMatrix {
    let t = field.teams();
    StrategyMatrix::from_fn(t.len(), |i, j| match t[i].seed as i32 - t[j].seed as i32 {
        d if d < -1 => 0.9,
        d if d > 1 => 0.1,
        _ => 0.5,
    })
    .expect("constant probabilities")
}

/// Winners of every game, round by round and in slot order within a round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TournamentBracket {
    winners: Vec<usize>,
}

impl TournamentBracket {
    /// Checks that every winner played in its game.
    pub fn new(field: &Field, winners: Vec<usize>) -> Result<Self> {
        if winners.len() != field.games() {
            return Err(domain(format!("{} winners for a {}-game field", winners.len(), field.games())));
        }
        let mut prev: &[usize] = field.slots();
        let mut start = 0;
        while prev.len() > 1 {
            let games = prev.len() / 2;
            let round = &winners[start..start + games];
            for (g, &w) in round.iter().enumerate() {
                if w != prev[2 * g] && w != prev[2 * g + 1] {
                    return Err(domain(format!("game {} is won by team {w}, who did not play in it", start + g)));
                }
            }
            prev = round;
            start += games;
        }
        Ok(TournamentBracket { winners })
    }

    pub fn winners(&self) -> &[usize] {
        &self.winners
    }

    /// Winners of round `rd` (0-based).
    pub fn round(&self, rd: usize) -> &[usize] {
        let n = self.winners.len() + 1;
        let start = n - (n >> rd);
        &self.winners[start..start + (n >> (rd + 1))]
    }

    pub fn champion(&self) -> usize {
        self.winners[self.winners.len() - 1]
    }
}

/// Per-game coin lookup for a strategy on a field.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    size: usize,
    slots: Vec<usize>,
    coins: Vec<Coin>,
}

impl Sampler {
    pub(crate) fn new(field: &Field, s: &StrategyMatrix) -> Self {
        Sampler { size: s.size, slots: field.slots.clone(), coins: s.data.iter().map(|&p| Coin::new(p)).collect() }
    }

    /// Fills `out` with winners. One `u64` per game: the top participant
    /// `a` beats `b` when the draw falls below `S[a][b]`.
    #[inline]
    pub(crate) fn draw<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [usize]) {
        let half = self.size / 2;
        for g in 0..half {
            let (a, b) = (self.slots[2 * g], self.slots[2 * g + 1]);
            out[g] = if self.coins[a * self.size + b].flip(rng) { a } else { b };
        }
        let (mut start, mut games) = (0, half);
        while games > 1 {
            let (done, rest) = out.split_at_mut(start + games);
            let prev = &done[start..];
            for g in 0..games / 2 {
                let (a, b) = (prev[2 * g], prev[2 * g + 1]);
                rest[g] = if self.coins[a * self.size + b].flip(rng) { a } else { b };
            }
            start += games;
            games /= 2;
        }
    }
}

/// Draws one bracket from strategy `s`.
pub fn sample_bracket<R: RngCore + ?Sized>(s: &StrategyMatrix, field: &Field, rng: &mut R) -> Result<TournamentBracket> {
    s.check_field(field, "strategy")?;
    let mut winners = vec![0; field.games()];
    Sampler::new(field, s).draw(rng, &mut winners);
    Ok(TournamentBracket { winners })
}

/// ESPN points for each game position in a field of `teams` teams:
/// `10 * 2^(rd - 1)` in round `rd`.
pub(crate) fn game_points(teams: usize) -> Vec<u32> {
    let mut points = Vec::with_capacity(teams - 1);
    let (mut games, mut value) = (teams / 2, 10);
    while games >= 1 {
        points.extend(std::iter::repeat_n(value, games));
        games /= 2;
        value *= 2;
    }
    points
}

#[inline]
pub(crate) fn score_with(points: &[u32], x: &[usize], tau: &[usize]) -> u32 {
    x.iter().zip(tau).zip(points).map(|((a, b), &p)| if a == b { p } else { 0 }).sum()
}

/// ESPN score of `x` against the true bracket `tau`.
pub fn espn_score(x: &TournamentBracket, tau: &TournamentBracket) -> Result<u32> {
    if x.winners.len() != tau.winners.len() {
        return Err(domain("brackets come from fields of different sizes"));
    }
    Ok(score_with(&game_points(x.winners.len() + 1), &x.winners, &tau.winners))
}

/// Every bracket of a small field with its probability under `s`.
pub fn enumerate_brackets(field: &Field, s: &StrategyMatrix) -> Result<Vec<(TournamentBracket, f64)>> {
    s.check_field(field, "strategy")?;
    if field.len() > MAX_ENUMERATED_TEAMS {
        return Err(Error::Resource(format!("enumeration is limited to {MAX_ENUMERATED_TEAMS} teams")));
    }
    let games = field.games();
    let mut out = Vec::with_capacity(1 << games);
    for mask in 0u32..(1 << games) {
        let mut winners = Vec::with_capacity(games);
        let mut prob = 1.0;
        let mut prev: Vec<usize> = field.slots().to_vec();
        while prev.len() > 1 {
            let next: Vec<usize> = prev
                .chunks(2)
                .map(|g| {
                    let top = mask >> winners.len() & 1 == 0;
                    let (w, l) = if top { (g[0], g[1]) } else { (g[1], g[0]) };
                    prob *= s.get(w, l);
                    winners.push(w);
                    w
                })
                .collect();
            prev = next;
        }
        out.push((TournamentBracket { winners }, prob));
    }
    Ok(out)
}
