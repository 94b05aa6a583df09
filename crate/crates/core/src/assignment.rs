//! Voter-to-representative assignments.
//!
//! Chamberlin–Courant lets every voter pick their favourite committee member.
//! Monroe additionally requires each member to represent between `floor(n/k)`
//! and `ceil(n/k)` voters; the best balanced assignment is found as a
//! min-cost transportation problem.

use serde::Serialize;

use crate::election::{Committee, Election, RuleSpec};
use crate::error::{Error, Result};
use crate::flow::MinCostFlow;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    /// `rep[v]` is the committee member representing voter `v`.
    pub rep: Vec<usize>,
    pub total_satisfaction: u64,
}

impl Assignment {
    /// Number of voters represented by each member, in committee order.
    pub fn loads(&self, committee: &Committee) -> Vec<usize> {
        let mut loads = vec![0; committee.k()];
        for r in &self.rep {
            let i = committee
                .members()
                .binary_search(r)
                .expect("representative is a committee member");
            loads[i] += 1;
        }
        loads
    }
}

/// Satisfaction of every voter with every committee member, row-major by voter.
pub(crate) struct SatTable<'a> {
    pub members: &'a [usize],
    pub values: Vec<u64>,
}

impl<'a> SatTable<'a> {
    pub fn new(election: &Election, rule: &RuleSpec, committee: &'a Committee) -> Self {
        let members = committee.members();
        let mut values = Vec::with_capacity(election.n() * members.len());
        for vote in election.votes() {
            values.extend(members.iter().map(|&c| rule.sat(vote, c)));
        }
        SatTable { members, values }
    }

    pub fn row(&self, voter: usize) -> &[u64] {
        let k = self.members.len();
        &self.values[voter * k..(voter + 1) * k]
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.members.len()
    }
}

/// Capacity bounds `(floor(n/k), ceil(n/k))` and the number of members that
/// take the larger load.
pub fn monroe_capacities(n: usize, k: usize) -> (usize, usize, usize) {
    let lo = n / k;
    let extra = n % k;
    (lo, if extra > 0 { lo + 1 } else { lo }, extra)
}

/// Best unconstrained assignment. Ties go to the lowest-indexed member.
pub fn cc_assign(election: &Election, rule: &RuleSpec, committee: &Committee) -> Result<Assignment> {
    rule.check_committee(election, committee)?;
    let table = SatTable::new(election, rule, committee);
    Ok(cc_from_table(&table))
}

pub(crate) fn cc_from_table(table: &SatTable<'_>) -> Assignment {
    let n = table.n();
    let mut rep = Vec::with_capacity(n);
    let mut total = 0;
    for v in 0..n {
        // max_by_key keeps the last maximum; scan explicitly for the first.
        let row = table.row(v);
        let mut best = 0;
        for (i, &s) in row.iter().enumerate().skip(1) {
            if s > row[best] {
                best = i;
            }
        }
        rep.push(table.members[best]);
        total += row[best];
    }
    Assignment {
        rep,
        total_satisfaction: total,
    }
}

/// Best balanced assignment.
///
/// Network: source -> voter (cap 1), voter -> member (cap 1, cost
/// `max_sat - sat`), member -> sink (cap `floor(n/k)`), and when `k` does not
/// divide `n`, member -> slack (cap 1) -> sink (cap `n mod k`). A full flow
/// saturates every direct member arc, so exactly `n mod k` members carry
/// `ceil(n/k)` voters, and the solver picks which ones.
pub fn monroe_assign(
    election: &Election,
    rule: &RuleSpec,
    committee: &Committee,
) -> Result<Assignment> {
    rule.check_committee(election, committee)?;
    let table = SatTable::new(election, rule, committee);
    Ok(monroe_from_table(&table, rule.max_satisfaction()))
}

pub(crate) fn monroe_from_table(table: &SatTable<'_>, max_sat: u64) -> Assignment {
    let n = table.n();
    let k = table.members.len();
    if n == 0 {
        return Assignment {
            rep: Vec::new(),
            total_satisfaction: 0,
        };
    }
    let (lo, _, extra) = monroe_capacities(n, k);

    let source = 0;
    let voter = |v: usize| 1 + v;
    let member = |i: usize| 1 + n + i;
    let slack = 1 + n + k;
    let sink = slack + 1;

    let mut g = MinCostFlow::new(sink + 1);
    let mut arcs = Vec::with_capacity(n * k);
    for v in 0..n {
        g.add_edge(source, voter(v), 1, 0);
        for (i, &s) in table.row(v).iter().enumerate() {
            arcs.push(g.add_edge(voter(v), member(i), 1, (max_sat - s) as i64));
        }
    }
    for i in 0..k {
        if lo > 0 {
            g.add_edge(member(i), sink, lo as i64, 0);
        }
        if extra > 0 {
            g.add_edge(member(i), slack, 1, 0);
        }
    }
    if extra > 0 {
        g.add_edge(slack, sink, extra as i64, 0);
    }

    let result = g.run(source, sink, n as i64);
    assert_eq!(result.flow, n as i64, "balanced capacities always admit a full flow");

    let mut rep = Vec::with_capacity(n);
    let mut total = 0;
    for v in 0..n {
        let i = (0..k)
            .find(|&i| g.flow_on(arcs[v * k + i]) == 1)
            .expect("every voter is routed to exactly one member");
        rep.push(table.members[i]);
        total += table.row(v)[i];
    }
    debug_assert_eq!(total as i64, n as i64 * max_sat as i64 - result.cost);
    Assignment {
        rep,
        total_satisfaction: total,
    }
}

/// Largest instance [`brute_force_monroe_oracle`] accepts.
pub const ORACLE_MAX_VOTERS: usize = 10;
pub const ORACLE_MAX_COMMITTEE: usize = 3;

/// Exhaustive search over all `k^n` maps, keeping balanced ones. Test oracle
/// for [`monroe_assign`].
pub fn brute_force_monroe_oracle(
    election: &Election,
    rule: &RuleSpec,
    committee: &Committee,
) -> Result<Assignment> {
    rule.check_committee(election, committee)?;
    let n = election.n();
    let k = committee.k();
    if n > ORACLE_MAX_VOTERS || k > ORACLE_MAX_COMMITTEE {
        return Err(Error::Scale(format!(
            "brute-force Monroe oracle supports n <= {ORACLE_MAX_VOTERS} and k <= {ORACLE_MAX_COMMITTEE}, got n = {n}, k = {k}"
        )));
    }
    if n == 0 {
        return Ok(Assignment {
            rep: Vec::new(),
            total_satisfaction: 0,
        });
    }
    let (lo, hi, _) = monroe_capacities(n, k);
    let members = committee.members();
    let sat: Vec<Vec<u64>> = election
        .votes()
        .iter()
        .map(|v| members.iter().map(|&c| rule.sat(v, c)).collect())
        .collect();

    let mut choice = vec![0usize; n];
    let mut best: Option<(u64, Vec<usize>)> = None;
    loop {
        let mut loads = vec![0usize; k];
        for &i in &choice {
            loads[i] += 1;
        }
        if loads.iter().all(|&l| l >= lo && l <= hi) {
            let total: u64 = choice.iter().enumerate().map(|(v, &i)| sat[v][i]).sum();
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, choice.clone()));
            }
        }
        // Odometer increment in base k.
        let mut pos = 0;
        while pos < n {
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    let (total, choice) = best.expect("a balanced assignment always exists");
    Ok(Assignment {
        rep: choice.into_iter().map(|i| members[i]).collect(),
        total_satisfaction: total,
    })
}
