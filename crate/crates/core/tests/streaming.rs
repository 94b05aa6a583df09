use streamvote_core::generators::{gen_impartial_approval, gen_impartial_borda};
use streamvote_core::streaming::{bernoulli_sample, reservoir_sample, ReservoirSampler};
use streamvote_core::winner::gap_report;
use streamvote_core::{
    committee_score, exact_winner, sample_size, streaming_winner, BallotType, Election, RuleSpec,
    SamplerChoice, StreamConfig, StreamHeader, Vote,
};

fn approval_header(m: usize) -> StreamHeader {
    StreamHeader { m, ballot: BallotType::Approval }
}

#[test]
fn bernoulli_retention_concentrates() {
    let n = 1_000_000;
    let rule = RuleSpec::approval_cc();
    let mut params = sample_size(&rule, 0.5, 1, 2).unwrap();
    params.draw_size = 1_000;
    params.delta = 0.5;

    // Stored ~ Binomial(n, p) with p = z / (n delta).
    let p = 1_000.0 / (n as f64 * 0.5);
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    assert_eq!(mean, 2_000.0);
    // The asserted window is far wider than six standard deviations.
    assert!(mean - 6.0 * sd > 1_000.0 && mean + 6.0 * sd < 4_000.0);

    let empty = Vote::approval([], 2).unwrap();
    let stream = std::iter::repeat_n(empty, n).map(Ok);
    let (sample, stats) = bernoulli_sample(stream, approval_header(2), n, &params, 17).unwrap();
    assert_eq!(stats.votes_seen, n as u64);
    assert_eq!(stats.votes_stored, sample.n() as u64);
    assert!((1_000..=4_000).contains(&sample.n()), "stored {}", sample.n());
    assert_eq!(stats.peak_stored_votes, stats.votes_stored);
}

#[test]
fn bernoulli_with_clamped_probability_keeps_everything() {
    let votes: Vec<Vote> = gen_impartial_approval(50, 3, 0.5, 1).unwrap().collect();
    let mut params = sample_size(&RuleSpec::approval_cc(), 0.5, 1, 3).unwrap();
    params.draw_size = 25;
    let (sample, _) =
        bernoulli_sample(votes.clone().into_iter().map(Ok), approval_header(3), 50, &params, 4)
            .unwrap();
    assert_eq!(sample.votes(), &votes[..]);

    let (sample, stats) =
        bernoulli_sample(std::iter::empty(), approval_header(3), 0, &params, 4).unwrap();
    assert_eq!((sample.n(), stats.votes_seen), (0, 0));
}

#[test]
fn reservoir_retains_short_streams() {
    let votes: Vec<Vote> = gen_impartial_approval(5, 4, 0.5, 8).unwrap().collect();
    let (a, stats) = reservoir_sample(votes.clone().into_iter().map(Ok), approval_header(4), 5, 1).unwrap();
    assert_eq!(a.votes(), &votes[..]);
    assert_eq!(stats.peak_stored_votes, 5);

    let mut reversed = votes.clone();
    reversed.reverse();
    let (b, _) = reservoir_sample(reversed.into_iter().map(Ok), approval_header(4), 5, 99).unwrap();
    let mut x = a.into_votes();
    let mut y = b.into_votes();
    let key = |v: &Vote| streamvote_core::format::format_vote(v);
    x.sort_by_key(key);
    y.sort_by_key(key);
    assert_eq!(x, y);
}

#[test]
fn reservoir_is_uniform() {
    let (n, t, reps) = (10_000usize, 100usize, 1_000u64);
    let mut counts = vec![0u32; n];
    for rep in 0..reps {
        let mut s = ReservoirSampler::new(t, 1_000 + rep);
        for i in 0..n {
            s.offer(i);
        }
        let items = s.into_items();
        assert_eq!(items.len(), t);
        for i in items {
            counts[i] += 1;
        }
    }
    // Each index is kept with probability t/n per repetition.
    let p = t as f64 / n as f64;
    let mean = reps as f64 * p;
    let sd = (reps as f64 * p * (1.0 - p)).sqrt();
    let within = counts
        .iter()
        .filter(|&&c| (c as f64 - mean).abs() <= 3.0 * sd)
        .count();
    // Normal approximation puts 99.7% inside; the discrete binomial slightly more.
    assert!(within as f64 >= 0.99 * n as f64, "{within} of {n} within 3 sigma");

    // Early and late arrivals are equally likely to survive.
    let half = n / 2;
    let early: u32 = counts[..half].iter().sum();
    let late: u32 = counts[half..].iter().sum();
    let total = (early + late) as f64;
    let sd_half = (total * 0.25).sqrt();
    assert!((early as f64 - total / 2.0).abs() <= 4.0 * sd_half, "early {early} late {late}");
}

#[test]
fn space_does_not_grow_with_n() {
    let rule = RuleSpec::approval_cc();
    let params = sample_size(&rule, 0.2, 2, 6).unwrap();
    let mut peaks = Vec::new();
    for n in [1_000, 10_000, 100_000] {
        let stream = gen_impartial_approval(n, 6, 0.3, n as u64).unwrap().map(Ok);
        let out = streaming_winner(stream, approval_header(6), &rule, 2, 0.2, &StreamConfig::reservoir(5))
            .unwrap();
        assert_eq!(out.stats.votes_seen, n as u64);
        peaks.push(out.stats.peak_stored_votes);

        let stream = gen_impartial_approval(n, 6, 0.3, n as u64).unwrap().map(Ok);
        let cfg = StreamConfig {
            sampler: SamplerChoice::Bernoulli { n, delta: 0.5 },
            seed: 5,
            draw_size_override: None,
        };
        let out = streaming_winner(stream, approval_header(6), &rule, 2, 0.2, &cfg).unwrap();
        assert!(out.stats.peak_stored_votes as f64 <= 4.0 * params.draw_size as f64 / 0.5);
    }
    assert!(peaks.iter().all(|&p| p == params.draw_size));
}

#[test]
fn streaming_is_deterministic() {
    let rule = RuleSpec::borda_cc(4);
    let header = StreamHeader { m: 4, ballot: BallotType::Borda };
    let run = |seed| {
        let stream = gen_impartial_borda(3_000, 4, 11).unwrap().map(Ok);
        let cfg = StreamConfig {
            draw_size_override: Some(200),
            ..StreamConfig::reservoir(seed)
        };
        let out = streaming_winner(stream, header, &rule, 2, 0.5, &cfg).unwrap();
        (out.committee, out.stats, out.sample_score)
    };
    assert_eq!(run(3), run(3));
}

#[test]
fn full_retention_reproduces_exact_winner() {
    let votes: Vec<Vote> = gen_impartial_borda(40, 5, 2).unwrap().collect();
    let election = Election::new(5, BallotType::Borda, votes.clone()).unwrap();
    let header = StreamHeader { m: 5, ballot: BallotType::Borda };
    for rule in [RuleSpec::borda_cc(5), RuleSpec::borda_monroe(5)] {
        let exact = exact_winner(&election, &rule, 2).unwrap();
        for sampler in [SamplerChoice::Reservoir, SamplerChoice::Bernoulli { n: 40, delta: 0.5 }] {
            let cfg = StreamConfig { sampler, seed: 1, draw_size_override: Some(40) };
            let out =
                streaming_winner(votes.clone().into_iter().map(Ok), header, &rule, 2, 0.5, &cfg).unwrap();
            assert!(exact.is_winner(&out.committee));
            assert_eq!(out.sample_score, exact.opt_score);
        }
    }
}

#[test]
fn success_rate_is_monotone_in_eps() {
    let (n, m, k) = (5_000, 6, 2);
    let rule = RuleSpec::approval_cc();
    let header = approval_header(m);
    let trials = 20;
    let rate = |eps: f64| {
        let mut ok = 0;
        for seed in 0..trials {
            let votes: Vec<Vote> = gen_impartial_approval(n, m, 0.3, seed).unwrap().collect();
            let election = Election::new(m, BallotType::Approval, votes.clone()).unwrap();
            let opt = exact_winner(&election, &rule, k).unwrap().opt_score;
            let out = streaming_winner(
                votes.into_iter().map(Ok),
                header,
                &rule,
                k,
                eps,
                &StreamConfig::reservoir(seed),
            )
            .unwrap();
            let score = committee_score(&election, &rule, &out.committee).unwrap();
            if gap_report(opt, score, eps, n, 1).passed {
                ok += 1;
            }
        }
        ok as f64 / trials as f64
    };
    for eps in [0.2, 0.05, 0.02] {
        assert!(rate(eps) >= rate(eps / 2.0), "eps = {eps}");
    }
}
