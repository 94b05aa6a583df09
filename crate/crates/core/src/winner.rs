//! Exact winner determination by enumerating every size-`k` committee, plus
//! the checks used to judge whether a returned committee is good enough.

use rayon::prelude::*;
use serde::Serialize;

use crate::assignment::{monroe_from_table, SatTable};
use crate::election::{BallotType, Committee, Election, RuleFamily, RuleSpec, Vote};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WinnerResult {
    /// Every committee attaining `opt_score`, in lexicographic order.
    pub winners: Vec<Committee>,
    pub opt_score: u64,
    /// Score of every committee in lexicographic order, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores_by_committee: Option<Vec<(Committee, u64)>>,
}

impl WinnerResult {
    /// The lexicographically smallest winning committee.
    pub fn first(&self) -> &Committee {
        &self.winners[0]
    }

    pub fn is_winner(&self, committee: &Committee) -> bool {
        self.winners.binary_search(committee).is_ok()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WinnerOptions {
    pub cap: u64,
    pub keep_scores: bool,
}

impl Default for WinnerOptions {
    fn default() -> Self {
        WinnerOptions {
            cap: DEFAULT_ENUMERATION_CAP,
            keep_scores: false,
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Size-`k` subsets of `0..m` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    m: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(m: usize, k: usize) -> Self {
        Combinations {
            m,
            current: (k <= m).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let k = cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.m - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Total satisfaction of `committee` under the rule's optimal assignment.
pub fn committee_score(election: &Election, rule: &RuleSpec, committee: &Committee) -> Result<u64> {
    rule.check_committee(election, committee)?;
    Ok(score_unchecked(election, rule, committee))
}

pub(crate) fn score_unchecked(election: &Election, rule: &RuleSpec, committee: &Committee) -> u64 {
    match rule.family {
        RuleFamily::ChamberlinCourant => election
            .votes()
            .iter()
            .map(|v| {
                committee
                    .members()
                    .iter()
                    .map(|&c| rule.sat(v, c))
                    .max()
                    .unwrap_or(0)
            })
            .sum(),
        RuleFamily::Monroe => {
            let table = SatTable::new(election, rule, committee);
            monroe_from_table(&table, rule.max_satisfaction()).total_satisfaction
        }
    }
}

pub fn exact_winner(election: &Election, rule: &RuleSpec, k: usize) -> Result<WinnerResult> {
    exact_winner_with(election, rule, k, WinnerOptions::default())
}

pub fn exact_winner_with(
    election: &Election,
    rule: &RuleSpec,
    k: usize,
    opts: WinnerOptions,
) -> Result<WinnerResult> {
    rule.check_election(election)?;
    let m = election.m();
    if k == 0 || k > m {
        return Err(Error::Parameter(format!(
            "committee size k = {k} must satisfy 1 <= k <= m = {m}"
        )));
    }
    let count = binomial(m, k);
    if count > opts.cap as u128 {
        return Err(Error::Scale(format!(
            "C({m}, {k}) = {count} committees exceeds the enumeration cap of {}",
            opts.cap
        )));
    }

    let committees: Vec<Committee> = Combinations::new(m, k).map(Committee::from_sorted).collect();
    let work = committees.len().saturating_mul(election.n().max(1) * k);
    let scores: Vec<u64> = if work < 1 << 16 {
        committees
            .iter()
            .map(|s| score_unchecked(election, rule, s))
            .collect()
    } else {
        committees
            .par_iter()
            .map(|s| score_unchecked(election, rule, s))
            .collect()
    };

    let opt_score = scores.iter().copied().max().unwrap_or(0);
    let winners = committees
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == opt_score)
        .map(|(c, _)| c.clone())
        .collect();
    let scores_by_committee = opts
        .keep_scores
        .then(|| committees.into_iter().zip(scores).collect());
    Ok(WinnerResult {
        winners,
        opt_score,
        scores_by_committee,
    })
}

/// Outcome of comparing a committee's score with the optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub opt_score: u64,
    pub returned_score: u64,
    pub gap: u64,
    /// `eps * n * delta`, with `delta` the largest per-voter satisfaction.
    pub threshold: f64,
    pub passed: bool,
}

/// Additive tolerance `eps * n * delta` a committee's score may trail the optimum by.
pub fn surrogate_threshold(eps: f64, n: usize, delta: u64) -> f64 {
    eps * n as f64 * delta as f64
}

pub fn gap_report(opt_score: u64, returned_score: u64, eps: f64, n: usize, delta: u64) -> GapReport {
    let gap = opt_score.saturating_sub(returned_score);
    let threshold = surrogate_threshold(eps, n, delta);
    GapReport {
        opt_score,
        returned_score,
        gap,
        threshold,
        passed: gap as f64 <= threshold,
    }
}

/// Passes when `opt - score(returned) <= eps * n * delta`, where `delta` is 1
/// for approval rules and the top positional score otherwise.
pub fn epsilon_gap_check(
    election: &Election,
    rule: &RuleSpec,
    k: usize,
    returned: &Committee,
    eps: f64,
) -> Result<GapReport> {
    check_eps(eps)?;
    if returned.k() != k {
        return Err(Error::InvalidCommittee(format!(
            "committee has {} members, expected k = {k}",
            returned.k()
        )));
    }
    let opt = exact_winner(election, rule, k)?.opt_score;
    let score = committee_score(election, rule, returned)?;
    Ok(gap_report(opt, score, eps, election.n(), rule.max_satisfaction()))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {eps}")))
    }
}

/// Number of votes an `eps`-winning committee may change, `floor(eps * n)`.
/// The small slack absorbs rounding in products such as `(1/3) * 3`.
pub fn change_budget(eps: f64, n: usize) -> usize {
    (eps * n as f64 + 1e-9).floor() as usize
}

pub const EXACT_ORACLE_MAX_VOTERS: usize = 6;
pub const EXACT_ORACLE_MAX_CANDIDATES: usize = 4;
pub const EXACT_ORACLE_MAX_CHANGES: usize = 2;

/// Decides the vote-change definition directly: is there a way to replace at
/// most `floor(eps * n)` ballots with arbitrary approval ballots so that
/// `returned` becomes a winning committee? Tiny approval instances only.
pub fn exact_epsilon_winning_oracle(
    election: &Election,
    rule: &RuleSpec,
    k: usize,
    returned: &Committee,
    eps: f64,
) -> Result<bool> {
    rule.check_committee(election, returned)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Parameter(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    if election.ballot_type() != BallotType::Approval {
        return Err(Error::Scale("the exact epsilon oracle handles approval ballots only".into()));
    }
    let (n, m) = (election.n(), election.m());
    let budget = change_budget(eps, n).min(n);
    if n > EXACT_ORACLE_MAX_VOTERS || m > EXACT_ORACLE_MAX_CANDIDATES || budget > EXACT_ORACLE_MAX_CHANGES
    {
        return Err(Error::Scale(format!(
            "exact epsilon oracle supports n <= {EXACT_ORACLE_MAX_VOTERS}, m <= {EXACT_ORACLE_MAX_CANDIDATES}, \
             floor(eps n) <= {EXACT_ORACLE_MAX_CHANGES}; got n = {n}, m = {m}, budget = {budget}"
        )));
    }
    if returned.k() != k || k > m {
        return Err(Error::InvalidCommittee(format!(
            "committee has {} members, expected k = {k}",
            returned.k()
        )));
    }

    let ballots: Vec<Vote> = (0u32..1 << m)
        .map(|mask| Vote::approval((0..m).filter(|c| mask >> c & 1 == 1), m).unwrap())
        .collect();
    let mut votes = election.votes().to_vec();
    for changes in 0..=budget {
        for chosen in Combinations::new(n, changes) {
            if try_replacements(&mut votes, election, &chosen, &ballots, rule, k, returned)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn try_replacements(
    votes: &mut [Vote],
    original: &Election,
    chosen: &[usize],
    ballots: &[Vote],
    rule: &RuleSpec,
    k: usize,
    returned: &Committee,
) -> Result<bool> {
    let Some((&voter, rest)) = chosen.split_first() else {
        let modified = Election::new(original.m(), original.ballot_type(), votes.to_vec())?;
        return Ok(exact_winner(&modified, rule, k)?.is_winner(returned));
    };
    for b in ballots {
        votes[voter] = b.clone();
        if try_replacements(votes, original, rest, ballots, rule, k, returned)? {
            votes[voter] = original.votes()[voter].clone();
            return Ok(true);
        }
    }
    votes[voter] = original.votes()[voter].clone();
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{cc_assign, monroe_assign};
    use proptest::prelude::*;

    fn approval(m: usize, ballots: &[&[usize]]) -> Election {
        let votes = ballots
            .iter()
            .map(|b| Vote::approval(b.iter().copied(), m).unwrap())
            .collect();
        Election::new(m, BallotType::Approval, votes).unwrap()
    }

    fn committee(members: &[usize], m: usize) -> Committee {
        Committee::new(members.iter().copied(), m).unwrap()
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Combinations::new(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        for m in 0..8 {
            for k in 0..=m {
                assert_eq!(Combinations::new(m, k).count() as u128, binomial(m, k));
            }
        }
        assert_eq!(binomial(50, 25), 126_410_606_437_752);
    }

    #[test]
    fn committee_scores() {
        let e = approval(3, &[&[0], &[0, 1], &[2]]);
        let s = committee(&[0, 2], 3);
        assert_eq!(committee_score(&e, &RuleSpec::approval_cc(), &s).unwrap(), 3);
        let covered = e
            .votes()
            .iter()
            .filter(|v| matches!(v, Vote::Approval(a) if a.members().iter().any(|&c| s.contains(c))))
            .count();
        assert_eq!(covered, 3);

        let e = Election::new(2, BallotType::Borda, vec![Vote::ranking(vec![0, 1], 2).unwrap()]).unwrap();
        assert_eq!(committee_score(&e, &RuleSpec::borda_cc(2), &committee(&[1], 2)).unwrap(), 0);
        assert!(committee_score(&e, &RuleSpec::approval_cc(), &committee(&[1], 2)).is_err());
    }

    #[test]
    fn exact_winner_examples() {
        let e = approval(2, &[&[0], &[0], &[1]]);
        let r = exact_winner(&e, &RuleSpec::approval_cc(), 1).unwrap();
        assert_eq!(r.winners, vec![committee(&[0], 2)]);
        assert_eq!(r.opt_score, 2);

        let e = approval(3, &[&[0], &[], &[1, 2], &[2]]);
        let r = exact_winner(&e, &RuleSpec::approval_cc(), 3).unwrap();
        assert_eq!(r.winners, vec![committee(&[0, 1, 2], 3)]);
        assert_eq!(r.opt_score, 3);
    }

    #[test]
    fn exact_winner_reports_all_ties_in_order() {
        let e = approval(3, &[&[0], &[1], &[2]]);
        let r = exact_winner_with(
            &e,
            &RuleSpec::approval_cc(),
            1,
            WinnerOptions { keep_scores: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(r.winners.len(), 3);
        assert_eq!(r.first(), &committee(&[0], 3));
        assert_eq!(r.scores_by_committee.unwrap().len(), 3);
    }

    #[test]
    fn exact_winner_parameter_errors() {
        let e = approval(3, &[&[0]]);
        assert!(matches!(exact_winner(&e, &RuleSpec::approval_cc(), 0), Err(Error::Parameter(_))));
        assert!(matches!(exact_winner(&e, &RuleSpec::approval_cc(), 4), Err(Error::Parameter(_))));
        let big = approval(40, &[&[0]]);
        assert!(matches!(exact_winner(&big, &RuleSpec::approval_cc(), 20), Err(Error::Scale(_))));
    }

    #[test]
    fn gap_check_arithmetic() {
        let r = gap_report(7, 6, 0.1, 10, 1);
        assert!(r.passed);
        assert_eq!(r.gap, 1);
        let r = gap_report(7, 5, 0.1, 10, 1);
        assert!(!r.passed);

        let e = approval(2, &[&[0], &[0], &[1]]);
        let r = epsilon_gap_check(&e, &RuleSpec::approval_cc(), 1, &committee(&[0], 2), 0.5).unwrap();
        assert!(r.passed);
        assert_eq!(r.gap, 0);
        assert!(epsilon_gap_check(&e, &RuleSpec::approval_cc(), 1, &committee(&[0], 2), 0.0).is_err());
    }

    #[test]
    fn exact_epsilon_oracle_examples() {
        let e = approval(2, &[&[0], &[0], &[1]]);
        let rule = RuleSpec::approval_cc();
        assert!(exact_epsilon_winning_oracle(&e, &rule, 1, &committee(&[0], 2), 0.0).unwrap());
        assert!(exact_epsilon_winning_oracle(&e, &rule, 1, &committee(&[1], 2), 1.0 / 3.0).unwrap());
        assert!(!exact_epsilon_winning_oracle(&e, &rule, 1, &committee(&[1], 2), 0.1).unwrap());
        let big = approval(2, &[&[0usize][..]; 7]);
        assert!(matches!(
            exact_epsilon_winning_oracle(&big, &rule, 1, &committee(&[1], 2), 0.1),
            Err(Error::Scale(_))
        ));
    }

    fn small_approval() -> impl Strategy<Value = Election> {
        (1usize..6).prop_flat_map(|m| {
            proptest::collection::vec(0u32..(1 << m), 0..9).prop_map(move |masks| {
                let votes = masks
                    .iter()
                    .map(|&b| Vote::approval((0..m).filter(|c| b >> c & 1 == 1), m).unwrap())
                    .collect();
                Election::new(m, BallotType::Approval, votes).unwrap()
            })
        })
    }

    fn small_borda() -> impl Strategy<Value = Election> {
        (1usize..6).prop_flat_map(|m| {
            proptest::collection::vec(Just((0..m).collect::<Vec<_>>()).prop_shuffle(), 0..7)
                .prop_map(move |orders| {
                    let votes = orders.into_iter().map(|o| Vote::ranking(o, m).unwrap()).collect();
                    Election::new(m, BallotType::Borda, votes).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn winners_attain_opt(e in small_approval(), k in 1usize..4) {
            let k = k.min(e.m());
            for rule in [RuleSpec::approval_cc(), RuleSpec::approval_monroe()] {
                let r = exact_winner(&e, &rule, k).unwrap();
                prop_assert!(!r.winners.is_empty());
                for w in &r.winners {
                    prop_assert_eq!(committee_score(&e, &rule, w).unwrap(), r.opt_score);
                }
                for c in Combinations::new(e.m(), k) {
                    prop_assert!(committee_score(&e, &rule, &Committee::from_sorted(c)).unwrap() <= r.opt_score);
                }
            }
        }

        #[test]
        fn score_matches_assignment(e in small_borda(), k in 1usize..4) {
            let k = k.min(e.m());
            let s = Committee::first(k);
            let cc = RuleSpec::borda_cc(e.m());
            prop_assert_eq!(committee_score(&e, &cc, &s).unwrap(), cc_assign(&e, &cc, &s).unwrap().total_satisfaction);
            let mr = RuleSpec::borda_monroe(e.m());
            prop_assert_eq!(committee_score(&e, &mr, &s).unwrap(), monroe_assign(&e, &mr, &s).unwrap().total_satisfaction);
        }

        #[test]
        fn cc_score_grows_with_committee(e in small_borda(), extra in 0usize..5) {
            let m = e.m();
            prop_assume!(m >= 2);
            let rule = RuleSpec::borda_cc(m);
            let base = Committee::first(1);
            let grown = Committee::new([0, 1 + extra % (m - 1)], m).unwrap();
            prop_assert!(committee_score(&e, &rule, &grown).unwrap() >= committee_score(&e, &rule, &base).unwrap());
        }

        #[test]
        fn anonymity(e in small_borda(), k in 1usize..4, seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let k = k.min(e.m());
            let mut votes = e.votes().to_vec();
            votes.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = Election::new(e.m(), e.ballot_type(), votes).unwrap();
            for rule in [RuleSpec::borda_cc(e.m()), RuleSpec::borda_monroe(e.m())] {
                prop_assert_eq!(exact_winner(&e, &rule, k).unwrap(), exact_winner(&shuffled, &rule, k).unwrap());
            }
        }

        #[test]
        fn cc_homogeneity(e in small_approval(), k in 1usize..4) {
            let k = k.min(e.m());
            let doubled: Vec<Vote> = e.votes().iter().chain(e.votes()).cloned().collect();
            let doubled = Election::new(e.m(), e.ballot_type(), doubled).unwrap();
            let rule = RuleSpec::approval_cc();
            let a = exact_winner(&e, &rule, k).unwrap();
            let b = exact_winner(&doubled, &rule, k).unwrap();
            prop_assert_eq!(b.opt_score, 2 * a.opt_score);
            prop_assert_eq!(a.winners, b.winners);
        }
    }
}
