//! Training protocol execution: exhaustive single-beam search, the
//! multi-beam sweep with threshold identification, and the
//! random-hashing sweep with voting.
//!
//! All three protocols observe per-symbol received powers
//! `|sqrt(P_A) f_k^H v_x + n_k|^2`. The noiseless receive amplitudes
//! `f_k^H v_x` and the decisions operating on powers are separated so
//! that an experiment sweeping transmit power can reuse the amplitudes
//! of one channel realization across the whole SNR grid.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::array_math::Codeword;
use crate::channel::{complex_gaussian, ChannelRealization, UserChannel};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::sweep_plan::SweepPlan;

/// Received powers for every training symbol of a sweep plan,
/// indexed `[round][slot][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationLog {
    rounds: Vec<Vec<Vec<f64>>>,
    num_users: usize,
}

impl ObservationLog {
    pub fn new(rounds: Vec<Vec<Vec<f64>>>, num_users: usize) -> Result<Self> {
        for round in &rounds {
            for powers in round {
                if powers.len() != num_users {
                    return Err(Error::Protocol(format!(
                        "observation entry has {} users, expected {num_users}",
                        powers.len()
                    )));
                }
                if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::Protocol(
                        "received powers must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(ObservationLog { rounds, num_users })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_symbols(&self) -> usize {
        self.rounds.iter().map(|r| r.len()).sum()
    }

    /// Received power of `user` from slot `b` of round `r` (1-based).
    pub fn power(&self, r: usize, b: usize, user: usize) -> Result<f64> {
        self.rounds
            .get(r - 1)
            .and_then(|round| round.get(b - 1))
            .and_then(|powers| powers.get(user))
            .copied()
            .ok_or_else(|| {
                Error::Protocol(format!("no observation for round {r}, slot {b}, user {user}"))
            })
    }

    fn round(&self, r: usize) -> Result<&[Vec<f64>]> {
        self.rounds
            .get(r - 1)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Protocol(format!("no observations for round {r}")))
    }

    /// Check the log has one entry per training symbol of the plan.
    pub fn matches(&self, plan: &SweepPlan) -> Result<()> {
        if self.rounds.len() != plan.num_rounds() {
            return Err(Error::Protocol(format!(
                "log has {} rounds, plan has {}",
                self.rounds.len(),
                plan.num_rounds()
            )));
        }
        for r in 1..=plan.num_rounds() {
            let want = plan.round(r)?.len();
            let got = self.round(r)?.len();
            if want != got {
                return Err(Error::Protocol(format!(
                    "round {r} has {got} observations, plan schedules {want}"
                )));
            }
        }
        Ok(())
    }
}

/// Noiseless receive amplitude `f_k^H v` of one user under IRS
/// coefficients `v`.
pub fn receive_amplitude(v: &[Complex64], user: &UserChannel) -> Complex64 {
    user.effective_channel
        .iter()
        .zip(v)
        .map(|(f, x)| f.conj() * x)
        .sum()
}

/// Received power for one user and one training symbol:
/// `|sqrt(p_a) amp + n|^2` with `n` circularly symmetric Gaussian of
/// power `noise_power_w` (omitted when `noiseless`).
pub fn observe_power<R: Rng + ?Sized>(
    amplitude: Complex64,
    p_a: f64,
    noise_power_w: f64,
    rng: &mut R,
    noiseless: bool,
) -> f64 {
    let signal = amplitude * p_a.sqrt();
    if noiseless {
        signal.norm_sqr()
    } else {
        (signal + complex_gaussian(rng) * noise_power_w.sqrt()).norm_sqr()
    }
}

/// Per-user received powers for one training symbol under IRS
/// coefficients `v_x`.
pub fn observe_symbol<R: Rng + ?Sized>(
    v_x: &[Complex64],
    realization: &ChannelRealization,
    p_a: f64,
    rng: &mut R,
    noiseless: bool,
) -> Result<Vec<f64>> {
    if v_x.len() != realization.n_x() {
        return Err(Error::InvalidArgument(format!(
            "codeword has {} elements, channel {}",
            v_x.len(),
            realization.n_x()
        )));
    }
    Ok(realization
        .users()
        .iter()
        .map(|u| observe_power(receive_amplitude(v_x, u), p_a, realization.noise_power_w(), rng, noiseless))
        .collect())
}

/// Noiseless receive amplitudes of every user for every single-beam
/// codeword, indexed `[j-1][user]`.
pub fn single_beam_amplitudes(
    codebook: &Codebook,
    realization: &ChannelRealization,
) -> Result<Vec<Vec<Complex64>>> {
    if codebook.n_x() != realization.n_x() {
        return Err(Error::InvalidArgument(format!(
            "codebook for {} elements, channel for {}",
            codebook.n_x(),
            realization.n_x()
        )));
    }
    Ok(codebook
        .words()
        .iter()
        .map(|w| {
            realization
                .users()
                .iter()
                .map(|u| receive_amplitude(w, u))
                .collect()
        })
        .collect())
}

/// Noiseless receive amplitudes for every bin of a sweep plan, indexed
/// `[round][slot][user]`. Composite codewords are assembled from the
/// bins' positional sub-array assignments.
pub fn sweep_amplitudes(
    plan: &SweepPlan,
    codebook: &Codebook,
    realization: &ChannelRealization,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    if codebook.n_x() != realization.n_x() {
        return Err(Error::InvalidArgument(format!(
            "codebook for {} elements, channel for {}",
            codebook.n_x(),
            realization.n_x()
        )));
    }
    let geo = plan.geometry();
    plan.rounds()
        .iter()
        .map(|round| {
            round
                .iter()
                .map(|bin| {
                    let v = codebook.composite(bin.assignment(), geo)?;
                    Ok(realization
                        .users()
                        .iter()
                        .map(|u| receive_amplitude(&v, u))
                        .collect())
                })
                .collect()
        })
        .collect()
}

/// Turn precomputed amplitudes into an observation log at transmit power
/// `p_a`, drawing fresh noise per symbol and user.
pub fn log_from_amplitudes<R: Rng + ?Sized>(
    amplitudes: &[Vec<Vec<Complex64>>],
    p_a: f64,
    noise_power_w: f64,
    rng: &mut R,
    noiseless: bool,
) -> ObservationLog {
    let num_users = amplitudes
        .first()
        .and_then(|r| r.first())
        .map_or(0, |s| s.len());
    let rounds = amplitudes
        .iter()
        .map(|round| {
            round
                .iter()
                .map(|slot| {
                    slot.iter()
                        .map(|&a| observe_power(a, p_a, noise_power_w, rng, noiseless))
                        .collect()
                })
                .collect()
        })
        .collect();
    ObservationLog { rounds, num_users }
}

/// Index of the maximum, resolving ties toward the smaller index.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Exhaustive single-beam decision from per-codeword powers
/// (`powers[j-1][user]`): per user, the index of the strongest codeword.
pub fn single_beam_decide(powers: &[Vec<f64>], num_users: usize) -> Vec<usize> {
    (0..num_users)
        .map(|k| argmax(powers.iter().map(|row| row[k])) + 1)
        .collect()
}

/// Exhaustive single-beam training: sweep all `n_x` codewords and pick
/// the strongest per user. Consumes exactly `n_x` training symbols.
pub fn run_single_beam<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    p_a: f64,
    rng: &mut R,
    noiseless: bool,
) -> Result<Vec<usize>> {
    let codebook = Codebook::new(realization.n_x())?;
    let amps = single_beam_amplitudes(&codebook, realization)?;
    let powers: Vec<Vec<f64>> = amps
        .iter()
        .map(|row| {
            row.iter()
                .map(|&a| observe_power(a, p_a, realization.noise_power_w(), rng, noiseless))
                .collect()
        })
        .collect();
    Ok(single_beam_decide(&powers, realization.num_users()))
}

/// Multi-beam sweeping phase: observe every bin of the plan in schedule
/// order. Consumes exactly `plan.total_symbols()` training symbols.
pub fn run_multi_beam_sweep<R: Rng + ?Sized>(
    plan: &SweepPlan,
    realization: &ChannelRealization,
    p_a: f64,
    rng: &mut R,
    noiseless: bool,
) -> Result<ObservationLog> {
    let codebook = Codebook::new(realization.n_x())?;
    let amps = sweep_amplitudes(plan, &codebook, realization)?;
    Ok(log_from_amplitudes(
        &amps,
        p_a,
        realization.noise_power_w(),
        rng,
        noiseless,
    ))
}

/// Outcome of the threshold identification for one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserIdentification {
    /// Strongest round-1 slot `b*`.
    pub best_slot: usize,
    /// Candidate set after each round, starting with `B(1, b*)`.
    pub candidate_sets: Vec<Vec<usize>>,
    /// The surviving direction (smallest member if the final set is not
    /// a singleton, which the deterministic schedule rules out).
    pub identified: usize,
}

/// Threshold-based beam identification from a complete multi-beam
/// observation log.
///
/// Per user: the strongest round-1 bin seeds the candidate set and the
/// binary-decision threshold `P(1, b*)/2`; each later round inspects the
/// unique bin intersecting `B(1, b*)` and keeps either the intersection
/// (power at or above threshold) or the complement (below).
pub fn identify_multi_beam(
    log: &ObservationLog,
    plan: &SweepPlan,
) -> Result<Vec<UserIdentification>> {
    log.matches(plan)?;
    let round1 = plan.round(1)?;
    let mut out = Vec::with_capacity(log.num_users());
    for k in 0..log.num_users() {
        let b_star = argmax(log.round(1)?.iter().map(|powers| powers[k])) + 1;
        let threshold = log.power(1, b_star, k)? / 2.0;
        let initial: Vec<usize> = round1[b_star - 1].directions().to_vec();
        let mut candidates = initial.clone();
        let mut candidate_sets = vec![candidates.clone()];
        for r in 2..=plan.num_rounds() {
            let slot = plan.intersecting_slot(r, &initial)?;
            let bin = &plan.round(r)?[slot - 1];
            let p = log.power(r, slot, k)?;
            if p >= threshold {
                candidates.retain(|&j| bin.contains(j));
            } else {
                candidates.retain(|&j| !bin.contains(j));
            }
            candidate_sets.push(candidates.clone());
        }
        let identified = *candidates.first().ok_or_else(|| {
            Error::Protocol("identification eliminated every candidate".into())
        })?;
        out.push(UserIdentification {
            best_slot: b_star,
            candidate_sets,
            identified,
        });
    }
    Ok(out)
}

/// Voting decision for the random-hashing baseline: in every round the
/// strongest bin casts one vote for each member direction; most votes
/// wins, ties resolved by larger accumulated power over winning bins,
/// then by smaller index.
pub fn rh_vote(log: &ObservationLog, plan: &SweepPlan) -> Result<Vec<usize>> {
    log.matches(plan)?;
    let n_x = plan.geometry().n_x();
    let mut out = Vec::with_capacity(log.num_users());
    for k in 0..log.num_users() {
        let mut votes = vec![0u32; n_x + 1];
        let mut power_acc = vec![0.0f64; n_x + 1];
        for r in 1..=plan.num_rounds() {
            let bins = plan.round(r)?;
            let b_win = argmax(log.round(r)?.iter().map(|powers| powers[k])) + 1;
            let p = log.power(r, b_win, k)?;
            for &j in bins[b_win - 1].directions() {
                votes[j] += 1;
                power_acc[j] += p;
            }
        }
        let mut best = 0usize;
        for j in 1..=n_x {
            if best == 0
                || votes[j] > votes[best]
                || (votes[j] == votes[best] && power_acc[j] > power_acc[best])
            {
                best = j;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Random-hashing training: sweep the RH plan and identify by voting.
pub fn run_rh<R: Rng + ?Sized>(
    plan_rh: &SweepPlan,
    realization: &ChannelRealization,
    p_a: f64,
    rng: &mut R,
    noiseless: bool,
) -> Result<Vec<usize>> {
    let log = run_multi_beam_sweep(plan_rh, realization, p_a, rng, noiseless)?;
    rh_vote(&log, plan_rh)
}

/// Text trace of one training session: every observation, then each
/// user's per-round candidate sets and final pick.
pub fn format_trace(
    plan: &SweepPlan,
    log: &ObservationLog,
    idents: &[UserIdentification],
) -> Result<String> {
    log.matches(plan)?;
    let mut out = String::new();
    for bin in plan.bins() {
        for k in 0..log.num_users() {
            let p = log.power(bin.round(), bin.slot(), k)?;
            let _ = writeln!(out, "obs,r={},b={},user={},power={:e}", bin.round(), bin.slot(), k, p);
        }
    }
    for (k, ident) in idents.iter().enumerate() {
        for (i, set) in ident.candidate_sets.iter().enumerate() {
            let joined: Vec<String> = set.iter().map(|j| j.to_string()).collect();
            let _ = writeln!(out, "cand,r={},user={},set={}", i + 1, k, joined.join("|"));
        }
        let _ = writeln!(out, "final,user={},j={}", k, ident.identified);
    }
    Ok(out)
}
