//! Synthetic vote streams and adversarial gadget elections.
//!
//! The statistical generators are lazy iterators so arbitrarily long streams
//! can be fed to a sampler without ever being held in memory.
//!
//! The disjointness gadgets encode a pair of sets `A, B` over a universe
//! `{x_1, ..., x_u}` as a tiny election whose `k = 1` winner reveals whether
//! the sets intersect. Element `x_i` is given 0-based as `i - 1`; its
//! candidate `c_i` has index `i - 1`, the distinguished candidate `d` has
//! index `u`, and Borda dummies `d_j` (1-based) have index `u + j`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::election::{BallotType, Election, Vote};
use crate::error::{Error, Result};

/// Ballots approving each candidate independently with probability `p`.
pub fn gen_impartial_approval(
    n: usize,
    m: usize,
    p: f64,
    seed: u64,
) -> Result<impl Iterator<Item = Vote>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("approval probability must lie in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(move |_| {
        let approved: Vec<usize> = (0..m).filter(|_| rng.gen_bool(p)).collect();
        Vote::approval(approved, m).expect("indices in range and distinct")
    }))
}

/// Uniformly random rankings (Fisher–Yates).
pub fn gen_impartial_borda(n: usize, m: usize, seed: u64) -> Result<impl Iterator<Item = Vote>> {
    if m == 0 {
        return Err(Error::Parameter("need at least one candidate".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(move |_| {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        Vote::ranking(order, m).expect("shuffle of 0..m is a permutation")
    }))
}

/// Voters in `blocks` equal-size groups, voter `i` in group `i mod blocks`.
/// Candidates are shuffled by `seed` and cut into `blocks` contiguous chunks
/// of near-equal size; group `g` approves exactly chunk `g`. With
/// `blocks == m` every group approves a single distinct candidate.
pub fn gen_polarized_approval(
    n: usize,
    m: usize,
    blocks: usize,
    seed: u64,
) -> Result<impl Iterator<Item = Vote>> {
    if blocks == 0 || blocks > m {
        return Err(Error::Parameter(format!(
            "blocks must satisfy 1 <= blocks <= m = {m}, got {blocks}"
        )));
    }
    let mut candidates: Vec<usize> = (0..m).collect();
    candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let chunks: Vec<Vote> = (0..blocks)
        .map(|g| {
            let lo = g * m / blocks;
            let hi = (g + 1) * m / blocks;
            Vote::approval(candidates[lo..hi].iter().copied(), m).expect("chunk of a permutation")
        })
        .collect();
    Ok((0..n).map(move |i| chunks[i % blocks].clone()))
}

/// Which gadget a [`GadgetSpec`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetVariant {
    ApprovalDisjointness,
    BordaDisjointness,
}

/// A set disjointness instance: universe size `u` and subsets `a`, `b` of
/// `0..u` (0-based element indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetSpec {
    pub u: usize,
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    pub variant: GadgetVariant,
}

impl GadgetSpec {
    pub fn new<A, B>(u: usize, a: A, b: B, variant: GadgetVariant) -> Result<Self>
    where
        A: IntoIterator<Item = usize>,
        B: IntoIterator<Item = usize>,
    {
        if u == 0 {
            return Err(Error::Parameter("universe must be non-empty".into()));
        }
        let a: BTreeSet<usize> = a.into_iter().collect();
        let b: BTreeSet<usize> = b.into_iter().collect();
        if let Some(&x) = a.iter().chain(&b).find(|&&x| x >= u) {
            return Err(Error::Parameter(format!(
                "element {x} is outside the universe 0..{u}"
            )));
        }
        Ok(GadgetSpec { u, a, b, variant })
    }

    pub fn disjoint(&self) -> bool {
        self.a.is_disjoint(&self.b)
    }

    /// Index of the distinguished candidate `d`.
    pub fn d(&self) -> usize {
        self.u
    }

    pub fn m(&self) -> usize {
        match self.variant {
            GadgetVariant::ApprovalDisjointness => self.u + 1,
            GadgetVariant::BordaDisjointness => 4 * self.u + 1,
        }
    }
}

/// Seven approval voters over `u + 1` candidates:
/// two copies of `{c_i : x_i in A}`, two of `{c_i : x_i in B}`, three of `{d}`.
pub fn gen_disjointness_approval(spec: &GadgetSpec) -> Result<Election> {
    if spec.variant != GadgetVariant::ApprovalDisjointness {
        return Err(Error::Parameter("expected an approval disjointness spec".into()));
    }
    let m = spec.m();
    let alice = Vote::approval(spec.a.iter().copied(), m)?;
    let bob = Vote::approval(spec.b.iter().copied(), m)?;
    let d = Vote::approval([spec.d()], m)?;
    let votes = vec![
        alice.clone(),
        alice,
        bob.clone(),
        bob,
        d.clone(),
        d.clone(),
        d,
    ];
    Election::new(m, BallotType::Approval, votes)
}

/// Two Borda voters over `4u + 1` candidates (`c_1..c_u`, `d`, dummies
/// `d_1..d_{3u}`), with `d` in position `u + 1` of both rankings:
///
/// - `v1`: `A` ascending, `d_1 .. d_{u-|A|}`, `d`, `d_{u-|A|+1} .. d_{3u}`, non-`A` ascending;
/// - `v2`: `B` ascending, `d_{3u} .. d_{2u+|B|+1}`, `d`, `d_{2u+|B|} .. d_1`, non-`B` ascending.
///
/// Then `s(d) = 6u` always, a shared element's candidate scores at least
/// `6u + 2`, every other element's candidate at most `5u - 1`, and each
/// dummy at most `5u`.
pub fn gen_disjointness_borda(spec: &GadgetSpec) -> Result<Election> {
    if spec.variant != GadgetVariant::BordaDisjointness {
        return Err(Error::Parameter("expected a Borda disjointness spec".into()));
    }
    let u = spec.u;
    let m = spec.m();
    let d = spec.d();
    let dummy = |j: usize| u + j;

    let mut v1: Vec<usize> = spec.a.iter().copied().collect();
    let lead = u - spec.a.len();
    v1.extend((1..=lead).map(dummy));
    v1.push(d);
    v1.extend((lead + 1..=3 * u).map(dummy));
    v1.extend((0..u).filter(|x| !spec.a.contains(x)));

    let mut v2: Vec<usize> = spec.b.iter().copied().collect();
    let lead = u - spec.b.len();
    v2.extend((3 * u - lead + 1..=3 * u).rev().map(dummy));
    v2.push(d);
    v2.extend((1..=3 * u - lead).rev().map(dummy));
    v2.extend((0..u).filter(|x| !spec.b.contains(x)));

    let votes = vec![Vote::ranking(v1, m)?, Vote::ranking(v2, m)?];
    Election::new(m, BallotType::Borda, votes)
}

/// Heavy-hitters instance: one single-approval voter per item occurrence.
#[derive(Clone, Debug)]
pub struct HeavyHittersInstance {
    pub election: Election,
    /// Committee size for the reduction.
    pub k: usize,
    /// Heavy-hitter frequency threshold.
    pub phi: f64,
}

/// `counts[t]` items of type `t` become `counts[t]` voters approving only
/// candidate `t`, emitted type by type.
pub fn gen_heavy_hitters(counts: &[usize]) -> Result<HeavyHittersInstance> {
    let m = counts.len();
    if m == 0 {
        return Err(Error::Parameter("need at least one item type".into()));
    }
    let votes = counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
        .map(|t| Vote::approval([t], m))
        .collect::<Result<Vec<_>>>()?;
    Ok(HeavyHittersInstance {
        election: Election::new(m, BallotType::Approval, votes)?,
        k: 1,
        phi: 0.5,
    })
}
