//! Multi-round bin schedules for beam sweeping.
//!
//! Round 1 maps the `n_x` directions into `L` bins of `M` directions
//! spaced `L` apart, which maximizes the minimum intra-bin index distance.
//! Rounds `2 ..= log2(M)+1` interleave length-`u(r)` segments of the
//! round-1 bins `B(1, b)` and `B(1, b + L/2)`, with `u(r) = M / 2^(r-1)`,
//! so that each later round halves every user's candidate set. A seeded
//! random-hashing schedule with the same round-1 mapping is provided as a
//! baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codebook::CodebookGeometry;
use crate::error::{Error, Result};

/// The set of directions simultaneously steered during one training
/// symbol.
///
/// `directions` is ascending; `assignment` is positional (sub-array `m`
/// steers `assignment[m-1]`). The two coincide for the deterministic
/// schedule and differ for random-hashing rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bin {
    round: usize,
    slot: usize,
    directions: Vec<usize>,
    assignment: Vec<usize>,
}

impl Bin {
    fn from_assignment(round: usize, slot: usize, assignment: Vec<usize>) -> Self {
        let mut directions = assignment.clone();
        directions.sort_unstable();
        Bin {
            round,
            slot,
            directions,
            assignment,
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    /// Member directions in ascending order.
    pub fn directions(&self) -> &[usize] {
        &self.directions
    }

    /// Positional sub-array assignment: sub-array `m` steers
    /// `assignment()[m-1]`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn contains(&self, j: usize) -> bool {
        self.directions.binary_search(&j).is_ok()
    }

    pub fn intersects(&self, other: &[usize]) -> bool {
        other.iter().any(|&j| self.contains(j))
    }
}

/// Minimum absolute pairwise index difference of a direction set.
pub fn intra_set_distance(set: &[usize]) -> Result<usize> {
    if set.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "intra-set distance needs at least 2 directions, got {}",
            set.len()
        )));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    Ok(sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .expect("len >= 2"))
}

/// Round-1 bin `B(1, b) = {b, b+L, ..., b+(M-1)L}`.
pub fn round1_bin(b: usize, geo: &CodebookGeometry) -> Result<Bin> {
    if b == 0 || b > geo.l() {
        return Err(Error::IndexOutOfRange(format!(
            "round-1 slot {b} outside 1..={}",
            geo.l()
        )));
    }
    let directions: Vec<usize> = (0..geo.m()).map(|k| b + k * geo.l()).collect();
    Ok(Bin::from_assignment(1, b, directions))
}

/// Later-round bin: alternating length-`u(r)` segments of `B(1, b)` and
/// `B(1, b + L/2)`, `u(r) = M / 2^(r-1)`.
pub fn later_round_bin(r: usize, b: usize, geo: &CodebookGeometry) -> Result<Bin> {
    let rounds = geo.num_rounds();
    if !(2..=rounds).contains(&r) {
        return Err(Error::IndexOutOfRange(format!(
            "round {r} outside 2..={rounds}"
        )));
    }
    if b == 0 || b > geo.l() / 2 {
        return Err(Error::IndexOutOfRange(format!(
            "round-{r} slot {b} outside 1..={}",
            geo.l() / 2
        )));
    }
    let u = geo.m() >> (r - 1);
    debug_assert!(u >= 1);
    let low = round1_bin(b, geo)?;
    let high = round1_bin(b + geo.l() / 2, geo)?;
    let mut assignment = Vec::with_capacity(geo.m());
    for s in 0..geo.m() / u {
        let source = if s % 2 == 0 { &low } else { &high };
        assignment.extend_from_slice(&source.directions()[s * u..(s + 1) * u]);
    }
    assignment.sort_unstable();
    Ok(Bin::from_assignment(r, b, assignment))
}

/// The full schedule of bins for one training session: which sub-array
/// steers which direction at each training symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPlan {
    geometry: CodebookGeometry,
    rounds: Vec<Vec<Bin>>,
    total_symbols: usize,
}

impl SweepPlan {
    pub fn geometry(&self) -> &CodebookGeometry {
        &self.geometry
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Bins of round `r` (1-based), in slot order.
    pub fn round(&self, r: usize) -> Result<&[Bin]> {
        self.rounds
            .get(r - 1)
            .map(|v| v.as_slice())
            .ok_or_else(|| {
                Error::IndexOutOfRange(format!("round {r} outside 1..={}", self.rounds.len()))
            })
    }

    pub fn rounds(&self) -> &[Vec<Bin>] {
        &self.rounds
    }

    /// Total training symbols consumed by the schedule.
    pub fn total_symbols(&self) -> usize {
        self.total_symbols
    }

    pub fn bins(&self) -> impl Iterator<Item = &Bin> {
        self.rounds.iter().flatten()
    }

    /// The unique slot of round `r >= 2` whose bin shares directions with
    /// the given round-1 bin.
    pub fn intersecting_slot(&self, r: usize, round1_directions: &[usize]) -> Result<usize> {
        let bins = self.round(r)?;
        let mut found = None;
        for bin in bins {
            if bin.intersects(round1_directions) {
                if found.is_some() {
                    return Err(Error::Protocol(format!(
                        "round {r} has multiple bins intersecting the round-1 candidate set"
                    )));
                }
                found = Some(bin.slot());
            }
        }
        found.ok_or_else(|| {
            Error::Protocol(format!(
                "round {r} has no bin intersecting the round-1 candidate set"
            ))
        })
    }

    /// One line per training symbol: `r,b,j_1,...,j_M` with the positional
    /// sub-array assignment.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for bin in self.bins() {
            out.push_str(&bin.round().to_string());
            out.push(',');
            out.push_str(&bin.slot().to_string());
            for &j in bin.assignment() {
                out.push(',');
                out.push_str(&j.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic multi-beam schedule: round 1 has `L` bins, rounds
/// `2 ..= log2(M)+1` have `L/2` bins each, for
/// `L + L*log2(M)/2` training symbols in total.
pub fn build_sweep_plan(geo: &CodebookGeometry) -> Result<SweepPlan> {
    let mut rounds = Vec::with_capacity(geo.num_rounds());
    rounds.push(
        (1..=geo.l())
            .map(|b| round1_bin(b, geo))
            .collect::<Result<Vec<_>>>()?,
    );
    for r in 2..=geo.num_rounds() {
        rounds.push(
            (1..=geo.l() / 2)
                .map(|b| later_round_bin(r, b, geo))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let total_symbols = rounds.iter().map(|r| r.len()).sum();
    Ok(SweepPlan {
        geometry: *geo,
        rounds,
        total_symbols,
    })
}

/// Smallest intra-bin distance over the bins of round `r`.
///
/// The schedule is designed so this is as large as possible per round.
pub fn max_min_intra_bin_distance(plan: &SweepPlan, r: usize) -> Result<usize> {
    plan.round(r)?
        .iter()
        .map(|bin| intra_set_distance(bin.directions()))
        .try_fold(usize::MAX, |acc, d| d.map(|d| acc.min(d)))
}

/// Random-hashing baseline schedule: the round-1 max-min mapping followed
/// by rounds that hash all `n_x` directions into `L` bins via a seeded
/// uniform permutation, appended (last round truncated) until exactly
/// `budget` training symbols are scheduled.
pub fn build_rh_plan(geo: &CodebookGeometry, seed: u64, budget: usize) -> Result<SweepPlan> {
    if budget < geo.l() {
        return Err(Error::InvalidArgument(format!(
            "random-hashing budget {budget} is below the {} round-1 symbols",
            geo.l()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::new();
    rounds.push(
        (1..=geo.l())
            .map(|b| round1_bin(b, geo))
            .collect::<Result<Vec<_>>>()?,
    );
    let mut remaining = budget - geo.l();
    let mut round = 1;
    while remaining > 0 {
        round += 1;
        let mut perm: Vec<usize> = (1..=geo.n_x()).collect();
        perm.shuffle(&mut rng);
        let slots = remaining.min(geo.l());
        let mut bins = Vec::with_capacity(slots);
        for b in 1..=slots {
            // Permutation position k (1-based) goes to bin ceil(k/M),
            // sub-array (k mod M) + 1.
            let mut assignment = vec![0usize; geo.m()];
            for t in 0..geo.m() {
                let k = (b - 1) * geo.m() + t + 1;
                assignment[k % geo.m()] = perm[k - 1];
            }
            bins.push(Bin::from_assignment(round, b, assignment));
        }
        rounds.push(bins);
        remaining -= slots;
    }
    let total_symbols = rounds.iter().map(|r| r.len()).sum();
    Ok(SweepPlan {
        geometry: *geo,
        rounds,
        total_symbols,
    })
}
