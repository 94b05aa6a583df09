//! Sample-then-solve streaming winner determination.
//!
//! One pass over the vote stream keeps a uniform sample whose size depends
//! only on `(rule, eps, k, m)`, never on the number of voters. The exact
//! winner of the sample is returned as the committee for the whole stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::election::{Committee, Election, RuleFamily, RuleSpec, Scoring, Vote};
use crate::error::{Error, Result};
use crate::format::StreamHeader;
use crate::winner::{exact_winner, score_unchecked};

/// Overshoot parameter of the Bernoulli sampler when none is given.
pub const DEFAULT_DELTA: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct SampleParams {
    #[serde(skip)]
    pub rule: RuleSpec,
    pub eps: f64,
    pub k: usize,
    pub m: usize,
    pub delta: f64,
    /// Base sample size from the concentration argument.
    pub t: u64,
    /// Voters to retain; `k^2 t` for positional CC, `m^2 t` for Borda Monroe, `t` otherwise.
    pub draw_size: u64,
}

// Rounds up, ignoring float noise below one part in 10^12 so that values that
// are integers on paper (e.g. 10 * 4 = 40) do not gain a spurious unit.
fn ceil_count(x: f64) -> u64 {
    let x = x * (1.0 - 1e-12);
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        (x.ceil() as u64).max(1)
    }
}

/// `ceil(2 k^2 eps^-2 (2k ln m + ln 4))`.
///
/// Per committee member, Hoeffding with deviation `eps/(2k)` fails with
/// probability `2 exp(-2 t (eps/2k)^2)`; requiring this to be at most
/// `m^(-2k)` gives `t >= 2 k^2 eps^-2 (2k ln m + ln 2)`. `ln 4` adds slack.
fn monroe_base(eps: f64, k: f64, ln_m: f64) -> u64 {
    ceil_count(2.0 * k * k / (eps * eps) * (2.0 * k * ln_m + 4f64.ln()))
}

/// Sample sizes per rule. All logarithms are natural.
///
/// | rule          | t                                   | draw size |
/// |---------------|-------------------------------------|-----------|
/// | Approval-CC   | `6 eps^-2 k ln m`                   | `t`       |
/// | Borda-CC      | `10 eps^-2 k m^2`                   | `k^2 t`   |
/// | positional-CC | `10 eps^-2 k a1^2`                  | `k^2 t`   |
/// | Approval-M    | `2 k^2 eps^-2 (2k ln m + ln 4)`     | `t`       |
/// | Borda-M       | Approval-M with `eps/m`             | `m^2 t`   |
/// | positional-M  | Approval-M with `eps/a1`            | `a1^2 t`  |
pub fn sample_size(rule: &RuleSpec, eps: f64, k: usize, m: usize) -> Result<SampleParams> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 candidates, got m = {m}")));
    }
    if k == 0 || k > m {
        return Err(Error::Parameter(format!(
            "committee size k = {k} must satisfy 1 <= k <= m = {m}"
        )));
    }
    if let Scoring::Positional(s) = &rule.scoring {
        if s.len() != m {
            return Err(Error::Parameter(format!(
                "score vector has {} entries but m = {m}",
                s.len()
            )));
        }
    }

    let kf = k as f64;
    let ln_m = (m as f64).ln();
    let inv_eps2 = 1.0 / (eps * eps);
    let (t, draw_size) = match (&rule.scoring, rule.family) {
        (Scoring::Approval, RuleFamily::ChamberlinCourant) => {
            let t = ceil_count(6.0 * inv_eps2 * kf * ln_m);
            (t, t)
        }
        (Scoring::Positional(s), RuleFamily::ChamberlinCourant) => {
            let scale = if s.is_borda() { m as f64 } else { s.top() as f64 };
            let t = ceil_count(10.0 * inv_eps2 * kf * scale * scale);
            (t, t.saturating_mul((k * k) as u64))
        }
        (Scoring::Approval, RuleFamily::Monroe) => {
            let t = monroe_base(eps, kf, ln_m);
            (t, t)
        }
        (Scoring::Positional(s), RuleFamily::Monroe) => {
            let scale = if s.is_borda() { m as u64 } else { s.top().max(1) };
            let t = monroe_base(eps / scale as f64, kf, ln_m);
            (t, t.saturating_mul(scale * scale))
        }
    };
    Ok(SampleParams {
        rule: rule.clone(),
        eps,
        k,
        m,
        delta: DEFAULT_DELTA,
        t,
        draw_size,
    })
}

/// Space accounting for one pass of a sampler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StreamStats {
    pub votes_seen: u64,
    pub votes_stored: u64,
    pub peak_stored_votes: u64,
    /// Stored votes times `m`, the per-vote record width.
    pub stored_ballot_cells: u64,
}

/// Classic single-pass uniform sampling without replacement: the first
/// `capacity` items fill the reservoir, and item `i` (0-based) then replaces
/// a uniform slot with probability `capacity / (i + 1)`.
pub struct ReservoirSampler<T> {
    capacity: usize,
    items: Vec<T>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl<T> ReservoirSampler<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "reservoir capacity must be positive");
        ReservoirSampler {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            seen: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn offer(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            let j = self.rng.gen_range(0..=self.seen);
            if j < self.capacity as u64 {
                self.items[j as usize] = item;
            }
        }
        self.seen += 1;
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn stored(&self) -> usize {
        self.items.len()
    }

    /// Never exceeds the capacity; the reservoir only grows.
    pub fn peak(&self) -> usize {
        self.items.len()
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

/// Keeps every item independently with a fixed probability.
pub struct BernoulliSampler<T> {
    p: f64,
    items: Vec<T>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl<T> BernoulliSampler<T> {
    pub fn new(p: f64, seed: u64) -> Self {
        BernoulliSampler {
            p: p.clamp(0.0, 1.0),
            items: Vec::new(),
            seen: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Retention probability `min(1, z / (n delta))` for a stream of known length `n`.
    pub fn retention_probability(z: u64, n: usize, delta: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        (z as f64 / (n as f64 * delta)).min(1.0)
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn offer(&mut self, item: T) {
        self.seen += 1;
        if self.p >= 1.0 || self.rng.gen_bool(self.p) {
            self.items.push(item);
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Nothing is ever evicted, so the peak is the final count.
    pub fn peak(&self) -> usize {
        self.items.len()
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

fn stats(seen: u64, stored: usize, peak: usize, m: usize) -> StreamStats {
    StreamStats {
        votes_seen: seen,
        votes_stored: stored as u64,
        peak_stored_votes: peak as u64,
        stored_ballot_cells: (peak * m) as u64,
    }
}

/// Bernoulli-samples a stream of known length `n`, keeping each vote with
/// probability `min(1, draw_size / (n delta))`. Retained votes stay in arrival order.
pub fn bernoulli_sample<I>(
    stream: I,
    header: StreamHeader,
    n: usize,
    params: &SampleParams,
    seed: u64,
) -> Result<(Election, StreamStats)>
where
    I: IntoIterator<Item = Result<Vote>>,
{
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(Error::Parameter(format!(
            "delta must lie in (0, 1), got {}",
            params.delta
        )));
    }
    let p = BernoulliSampler::<Vote>::retention_probability(params.draw_size, n, params.delta);
    let mut sampler = BernoulliSampler::new(p, seed);
    for vote in stream {
        sampler.offer(vote?);
    }
    let (seen, peak) = (sampler.seen(), sampler.peak());
    let votes = sampler.into_items();
    let st = stats(seen, votes.len(), peak, header.m);
    Ok((Election::new(header.m, header.ballot, votes)?, st))
}

/// Uniform sample of `min(t, n)` votes from a stream of unknown length.
pub fn reservoir_sample<I>(
    stream: I,
    header: StreamHeader,
    t: usize,
    seed: u64,
) -> Result<(Election, StreamStats)>
where
    I: IntoIterator<Item = Result<Vote>>,
{
    if t == 0 {
        return Err(Error::Parameter("reservoir size must be at least 1".into()));
    }
    let mut sampler = ReservoirSampler::new(t, seed);
    for vote in stream {
        sampler.offer(vote?);
    }
    let (seen, stored, peak) = (sampler.seen(), sampler.stored(), sampler.peak());
    let st = stats(seen, stored, peak, header.m);
    Ok((Election::new(header.m, header.ballot, sampler.into_items())?, st))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplerChoice {
    /// Fixed-size reservoir; needs no knowledge of the stream length.
    Reservoir,
    /// Independent coin flips; the stream length `n` must be known up front.
    Bernoulli { n: usize, delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StreamConfig {
    pub sampler: SamplerChoice,
    pub seed: u64,
    /// Replaces the formula's draw size, e.g. to force full retention.
    pub draw_size_override: Option<u64>,
}

impl StreamConfig {
    pub fn reservoir(seed: u64) -> Self {
        StreamConfig {
            sampler: SamplerChoice::Reservoir,
            seed,
            draw_size_override: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StreamOutcome {
    pub committee: Committee,
    /// Score of `committee` on the sampled election.
    pub sample_score: u64,
    pub params: SampleParams,
    /// Draw size actually used, after any override.
    pub draw_size: u64,
    pub stats: StreamStats,
}

/// Samples the stream, solves the sample exactly, and returns its
/// lexicographically smallest winning committee.
///
/// An empty sample makes every committee tie at zero, so the result is
/// `{0, ..., k-1}`.
pub fn streaming_winner<I>(
    stream: I,
    header: StreamHeader,
    rule: &RuleSpec,
    k: usize,
    eps: f64,
    config: &StreamConfig,
) -> Result<StreamOutcome>
where
    I: IntoIterator<Item = Result<Vote>>,
{
    rule.check_election(&Election::new(header.m, header.ballot, Vec::new())?)?;
    let mut params = sample_size(rule, eps, k, header.m)?;
    let draw_size = config.draw_size_override.unwrap_or(params.draw_size);

    let (sample, stats) = match config.sampler {
        SamplerChoice::Reservoir => {
            let cap = usize::try_from(draw_size).unwrap_or(usize::MAX).max(1);
            reservoir_sample(stream, header, cap, config.seed)?
        }
        SamplerChoice::Bernoulli { n, delta } => {
            params.delta = delta;
            let effective = SampleParams {
                draw_size,
                ..params.clone()
            };
            bernoulli_sample(stream, header, n, &effective, config.seed)?
        }
    };

    let result = exact_winner(&sample, rule, k)?;
    let committee = result.first().clone();
    let sample_score = score_unchecked(&sample, rule, &committee);
    Ok(StreamOutcome {
        committee,
        sample_score,
        params,
        draw_size,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{BallotType, ScoreVector};

    #[test]
    fn golden_sample_sizes() {
        // 6 * 0.5^-2 * 1 * ln 2 = 16.64 -> 17
        let p = sample_size(&RuleSpec::approval_cc(), 0.5, 1, 2).unwrap();
        assert_eq!((p.t, p.draw_size), (17, 17));
        // t = 10 * 1 * 1 * 2^2 = 40, draw = 1^2 * 40
        let p = sample_size(&RuleSpec::borda_cc(2), 1.0, 1, 2).unwrap();
        assert_eq!((p.t, p.draw_size), (40, 40));
        // 6 * 100 * 2 * ln 10 = 2763.1 -> 2764
        let p = sample_size(&RuleSpec::approval_cc(), 0.1, 2, 10).unwrap();
        assert_eq!(p.draw_size, 2764);
        // 6 * 25 * 2 * ln 6 = 537.5 -> 538
        let p = sample_size(&RuleSpec::approval_cc(), 0.2, 2, 6).unwrap();
        assert_eq!(p.draw_size, 538);
        // t = ceil(10 / 0.09 * 2 * 25) = 5556, draw = 4 * 5556
        let p = sample_size(&RuleSpec::borda_cc(5), 0.3, 2, 5).unwrap();
        assert_eq!((p.t, p.draw_size), (5556, 22224));
    }

    #[test]
    fn monroe_sample_sizes() {
        // 2 * 1 * 4 * (2 ln 2 + ln 4) = 8 * 2.7726 = 22.18 -> 23
        let p = sample_size(&RuleSpec::approval_monroe(), 0.5, 1, 2).unwrap();
        assert_eq!(p.draw_size, 23);
        // eps/m = 0.25: 2 * 16 * (2 ln 2 + ln 4) = 88.72 -> 89, draw 4 * 89
        let p = sample_size(&RuleSpec::borda_monroe(2), 0.5, 1, 2).unwrap();
        assert_eq!((p.t, p.draw_size), (89, 356));
    }

    #[test]
    fn positional_uses_top_score() {
        let sv = ScoreVector::new(vec![1, 1, 0]).unwrap();
        let rule = RuleSpec::positional(RuleFamily::ChamberlinCourant, sv);
        // t = 10 * 1 * 1 * 1 = 10, draw = 1 * 10
        let p = sample_size(&rule, 1.0, 1, 3).unwrap();
        assert_eq!((p.t, p.draw_size), (10, 10));
    }

    #[test]
    fn sample_size_rejects_bad_parameters() {
        let r = RuleSpec::approval_cc();
        assert!(sample_size(&r, 0.0, 1, 3).is_err());
        assert!(sample_size(&r, 1.5, 1, 3).is_err());
        assert!(sample_size(&r, 0.5, 1, 1).is_err());
        assert!(sample_size(&r, 0.5, 4, 3).is_err());
        assert!(sample_size(&RuleSpec::borda_cc(4), 0.5, 1, 3).is_err());
    }

    #[test]
    fn reservoir_keeps_short_streams_whole() {
        let mut s = ReservoirSampler::new(5, 1);
        for i in 0..3 {
            s.offer(i);
        }
        assert_eq!(s.into_items(), vec![0, 1, 2]);

        let mut s = ReservoirSampler::new(3, 1);
        for i in 0..100 {
            s.offer(i);
        }
        assert_eq!(s.seen(), 100);
        assert_eq!(s.peak(), 3);
    }

    #[test]
    fn bernoulli_clamps_probability() {
        assert_eq!(BernoulliSampler::<()>::retention_probability(100, 100, 0.5), 1.0);
        assert_eq!(BernoulliSampler::<()>::retention_probability(10, 100, 0.5), 0.2);
        assert_eq!(BernoulliSampler::<()>::retention_probability(10, 0, 0.5), 1.0);
    }

    #[test]
    fn empty_stream_returns_first_committee() {
        let header = StreamHeader { m: 4, ballot: BallotType::Approval };
        let out = streaming_winner(
            std::iter::empty(),
            header,
            &RuleSpec::approval_cc(),
            2,
            0.5,
            &StreamConfig::reservoir(3),
        )
        .unwrap();
        assert_eq!(out.committee.members(), &[0, 1]);
        assert_eq!(out.stats.votes_seen, 0);
    }

    #[test]
    fn streaming_rejects_mismatched_rule() {
        let header = StreamHeader { m: 3, ballot: BallotType::Approval };
        let err = streaming_winner(
            std::iter::empty(),
            header,
            &RuleSpec::borda_cc(3),
            1,
            0.5,
            &StreamConfig::reservoir(0),
        );
        assert!(matches!(err, Err(Error::BallotMismatch { .. })));
    }
}
