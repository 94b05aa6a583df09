//! Candidates, ballots, elections, committees and the satisfaction functions
//! that score a ballot against a candidate.
//!
//! Candidates are dense 0-based indices in `[0, m)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// The ballot format carried by a vote stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BallotType {
    /// A subset of approved candidates.
    Approval,
    /// A strict total order over all candidates.
    Borda,
}

impl BallotType {
    pub fn name(self) -> &'static str {
        match self {
            BallotType::Approval => "approval",
            BallotType::Borda => "borda",
        }
    }
}

impl fmt::Display for BallotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Approved candidates, stored sorted ascending without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ApprovalSet(Vec<usize>);

impl ApprovalSet {
    pub fn contains(&self, candidate: usize) -> bool {
        self.0.binary_search(&candidate).is_ok()
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A strict ranking. `order[0]` is the most preferred candidate and
/// `position[c]` is the 0-based rank of candidate `c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Ranking {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based position of `candidate`, so the top choice has position 1.
    pub fn pos(&self, candidate: usize) -> usize {
        self.position[candidate] + 1
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vote {
    Approval(ApprovalSet),
    Ranking(Ranking),
}

impl Vote {
    /// Builds an approval ballot. Indices may come in any order but must be
    /// distinct and below `m`. An empty ballot is allowed.
    pub fn approval<I: IntoIterator<Item = usize>>(approved: I, m: usize) -> Result<Self> {
        let mut set: Vec<usize> = approved.into_iter().collect();
        if let Some(&c) = set.iter().find(|&&c| c >= m) {
            return Err(Error::InvalidVote(format!(
                "candidate {c} out of range for m = {m}"
            )));
        }
        set.sort_unstable();
        if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidVote(format!("duplicate candidate {}", w[0])));
        }
        Ok(Vote::Approval(ApprovalSet(set)))
    }

    /// Builds a ranking ballot from a most-preferred-first permutation of `0..m`.
    pub fn ranking(order: Vec<usize>, m: usize) -> Result<Self> {
        if order.len() != m {
            return Err(Error::InvalidVote(format!(
                "ranking lists {} candidates, expected {m}",
                order.len()
            )));
        }
        let mut position = vec![usize::MAX; m];
        for (rank, &c) in order.iter().enumerate() {
            if c >= m {
                return Err(Error::InvalidVote(format!(
                    "candidate {c} out of range for m = {m}"
                )));
            }
            if position[c] != usize::MAX {
                return Err(Error::InvalidVote(format!("duplicate candidate {c}")));
            }
            position[c] = rank;
        }
        Ok(Vote::Ranking(Ranking { order, position }))
    }

    pub fn ballot_type(&self) -> BallotType {
        match self {
            Vote::Approval(_) => BallotType::Approval,
            Vote::Ranking(_) => BallotType::Borda,
        }
    }

    /// Checks the vote is well formed for `m` candidates.
    pub(crate) fn check_m(&self, m: usize) -> Result<()> {
        match self {
            Vote::Approval(s) => match s.0.last() {
                Some(&c) if c >= m => Err(Error::InvalidVote(format!(
                    "candidate {c} out of range for m = {m}"
                ))),
                _ => Ok(()),
            },
            Vote::Ranking(r) if r.len() != m => Err(Error::InvalidVote(format!(
                "ranking lists {} candidates, expected {m}",
                r.len()
            ))),
            Vote::Ranking(_) => Ok(()),
        }
    }
}

/// `m` candidates and an ordered list of same-typed votes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Election {
    m: usize,
    ballot: BallotType,
    votes: Vec<Vote>,
}

impl Election {
    pub fn new(m: usize, ballot: BallotType, votes: Vec<Vote>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("an election needs at least one candidate".into()));
        }
        for v in &votes {
            if v.ballot_type() != ballot {
                return Err(Error::BallotMismatch {
                    expected: ballot.name(),
                    got: v.ballot_type().name(),
                });
            }
            v.check_m(m)?;
        }
        Ok(Election { m, ballot, votes })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn ballot_type(&self) -> BallotType {
        self.ballot
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn into_votes(self) -> Vec<Vote> {
        self.votes
    }
}

/// A set of distinct candidates, kept sorted ascending. Sorted order is the
/// canonical form used for equality and for lexicographic tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Committee(Vec<usize>);

impl Committee {
    pub fn new<I: IntoIterator<Item = usize>>(members: I, m: usize) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if members.is_empty() {
            return Err(Error::InvalidCommittee("committee is empty".into()));
        }
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidCommittee(format!("duplicate member {}", w[0])));
        }
        if let Some(&c) = members.last().filter(|&&c| c >= m) {
            return Err(Error::InvalidCommittee(format!(
                "member {c} out of range for m = {m}"
            )));
        }
        Ok(Committee(members))
    }

    /// Caller guarantees `members` is sorted, distinct and in range.
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Committee(members)
    }

    /// The lexicographically smallest committee of size `k`: `{0, ..., k-1}`.
    pub fn first(k: usize) -> Self {
        Committee((0..k).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.0.binary_search(&candidate).is_ok()
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// A normalized positional score vector `(a_1, ..., a_m)`: non-increasing,
/// ending in zero, with some consecutive gap of exactly one. The all-zero
/// vector is also accepted; every committee ties under it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoreVector(Vec<u64>);

impl ScoreVector {
    pub fn new(scores: Vec<u64>) -> Result<Self> {
        let Some(&last) = scores.last() else {
            return Err(Error::InvalidScoreVector("empty".into()));
        };
        if last != 0 {
            return Err(Error::InvalidScoreVector(format!(
                "last entry must be 0, got {last}"
            )));
        }
        if scores.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidScoreVector("entries must be non-increasing".into()));
        }
        let all_zero = scores[0] == 0;
        if !all_zero && !scores.windows(2).any(|w| w[0] - w[1] == 1) {
            return Err(Error::InvalidScoreVector(
                "not normalized: no consecutive gap equals 1".into(),
            ));
        }
        Ok(ScoreVector(scores))
    }

    /// `(m-1, m-2, ..., 0)`.
    pub fn borda(m: usize) -> Self {
        ScoreVector((0..m as u64).rev().collect())
    }

    pub fn is_borda(&self) -> bool {
        let m = self.0.len() as u64;
        self.0.iter().enumerate().all(|(i, &s)| s == m - 1 - i as u64)
    }

    /// Score of the top position.
    pub fn top(&self) -> u64 {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

/// Chamberlin–Courant (unconstrained representatives) or Monroe (balanced).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RuleFamily {
    ChamberlinCourant,
    Monroe,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scoring {
    Approval,
    Positional(ScoreVector),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleSpec {
    pub family: RuleFamily,
    pub scoring: Scoring,
}

impl RuleSpec {
    pub fn approval_cc() -> Self {
        RuleSpec {
            family: RuleFamily::ChamberlinCourant,
            scoring: Scoring::Approval,
        }
    }

    pub fn approval_monroe() -> Self {
        RuleSpec {
            family: RuleFamily::Monroe,
            scoring: Scoring::Approval,
        }
    }

    pub fn borda_cc(m: usize) -> Self {
        Self::positional(RuleFamily::ChamberlinCourant, ScoreVector::borda(m))
    }

    pub fn borda_monroe(m: usize) -> Self {
        Self::positional(RuleFamily::Monroe, ScoreVector::borda(m))
    }

    pub fn positional(family: RuleFamily, scores: ScoreVector) -> Self {
        RuleSpec {
            family,
            scoring: Scoring::Positional(scores),
        }
    }

    /// Parses `approval-cc`, `borda-cc`, `approval-m` or `borda-m` for an
    /// election with `m` candidates.
    pub fn by_name(name: &str, m: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "approval-cc" => Ok(Self::approval_cc()),
            "approval-m" | "approval-monroe" => Ok(Self::approval_monroe()),
            "borda-cc" => Ok(Self::borda_cc(m)),
            "borda-m" | "borda-monroe" => Ok(Self::borda_monroe(m)),
            other => Err(Error::Parameter(format!(
                "unknown rule {other:?} (expected approval-cc, borda-cc, approval-m or borda-m)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        let ballot = match &self.scoring {
            Scoring::Approval => "approval",
            Scoring::Positional(s) if s.is_borda() => "borda",
            Scoring::Positional(_) => "positional",
        };
        let family = match self.family {
            RuleFamily::ChamberlinCourant => "cc",
            RuleFamily::Monroe => "m",
        };
        format!("{ballot}-{family}")
    }

    pub fn ballot_type(&self) -> BallotType {
        match self.scoring {
            Scoring::Approval => BallotType::Approval,
            Scoring::Positional(_) => BallotType::Borda,
        }
    }

    /// Largest satisfaction a single voter can derive from a candidate: 1 for
    /// approval, the top score for positional rules.
    pub fn max_satisfaction(&self) -> u64 {
        match &self.scoring {
            Scoring::Approval => 1,
            Scoring::Positional(s) => s.top(),
        }
    }

    pub fn satisfaction(&self, vote: &Vote, candidate: usize) -> Result<u64> {
        match (&self.scoring, vote) {
            (Scoring::Approval, Vote::Approval(_)) => {}
            (Scoring::Positional(s), Vote::Ranking(r)) => {
                if s.len() != r.len() {
                    return Err(Error::Parameter(format!(
                        "score vector has {} entries but the ranking has {}",
                        s.len(),
                        r.len()
                    )));
                }
                if candidate >= r.len() {
                    return Err(Error::Parameter(format!(
                        "candidate {candidate} out of range for m = {}",
                        r.len()
                    )));
                }
            }
            _ => {
                return Err(Error::BallotMismatch {
                    expected: self.ballot_type().name(),
                    got: vote.ballot_type().name(),
                })
            }
        }
        Ok(self.sat(vote, candidate))
    }

    /// Unchecked satisfaction; the caller has validated ballot type and range.
    #[inline]
    pub(crate) fn sat(&self, vote: &Vote, candidate: usize) -> u64 {
        match (&self.scoring, vote) {
            (Scoring::Approval, Vote::Approval(s)) => s.contains(candidate) as u64,
            (Scoring::Positional(s), Vote::Ranking(r)) => s.0[r.pos(candidate) - 1],
            _ => unreachable!("ballot type checked by caller"),
        }
    }

    /// Checks that the rule can score `election`.
    pub fn check_election(&self, election: &Election) -> Result<()> {
        if self.ballot_type() != election.ballot_type() {
            return Err(Error::BallotMismatch {
                expected: self.ballot_type().name(),
                got: election.ballot_type().name(),
            });
        }
        if let Scoring::Positional(s) = &self.scoring {
            if s.len() != election.m() {
                return Err(Error::Parameter(format!(
                    "score vector has {} entries but the election has m = {}",
                    s.len(),
                    election.m()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn check_committee(&self, election: &Election, committee: &Committee) -> Result<()> {
        self.check_election(election)?;
        match committee.members().last() {
            None => Err(Error::InvalidCommittee("committee is empty".into())),
            Some(&c) if c >= election.m() => Err(Error::InvalidCommittee(format!(
                "member {c} out of range for m = {}",
                election.m()
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
