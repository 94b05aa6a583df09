//! Seeded Monte-Carlo batches comparing the streaming committee against the
//! exact winner of the whole election.
//!
//! Each trial generates a fresh election, keeps it in memory only to score
//! the returned committee against the optimum, and feeds the same votes to
//! the streaming solver as a one-pass stream. Stream statistics describe the
//! sampler alone.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;
use streamvote_core::generators::{
    gen_impartial_approval, gen_impartial_borda, gen_polarized_approval,
};
use streamvote_core::winner::gap_report;
use streamvote_core::{
    committee_score, exact_winner, sample_size, streaming_winner, BallotType, Election, RuleSpec,
    SamplerChoice, StreamConfig, StreamHeader, Vote,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorSpec {
    ImpartialApproval { p: f64 },
    ImpartialBorda,
    PolarizedApproval { blocks: usize },
}

impl GeneratorSpec {
    pub fn ballot(&self) -> BallotType {
        match self {
            GeneratorSpec::ImpartialBorda => BallotType::Borda,
            _ => BallotType::Approval,
        }
    }

    pub fn generate(&self, n: usize, m: usize, seed: u64) -> Result<Vec<Vote>> {
        Ok(match *self {
            GeneratorSpec::ImpartialApproval { p } => gen_impartial_approval(n, m, p, seed)?.collect(),
            GeneratorSpec::ImpartialBorda => gen_impartial_borda(n, m, seed)?.collect(),
            GeneratorSpec::PolarizedApproval { blocks } => {
                gen_polarized_approval(n, m, blocks, seed)?.collect()
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Reservoir,
    Bernoulli,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// `approval-cc`, `borda-cc`, `approval-m` or `borda-m`.
    pub rule: String,
    pub k: usize,
    pub eps: f64,
    pub trials: usize,
    pub seed_base: u64,
    pub generator: GeneratorSpec,
    pub sampler: SamplerKind,
    pub delta: f64,
    pub n: usize,
    pub m: usize,
    pub draw_size: Option<u64>,
    /// Keep every vote; the streaming answer must then be exact.
    pub full_retention: bool,
    /// Record wall-clock time per trial. Off by default so output is reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<RuleSpec> {
        if self.trials == 0 {
            bail!(streamvote_core::Error::Parameter("trials must be at least 1".into()));
        }
        let rule = RuleSpec::by_name(&self.rule, self.m)?;
        if rule.ballot_type() != self.generator.ballot() {
            bail!(streamvote_core::Error::Parameter(format!(
                "rule {} needs {} ballots but the generator produces {} ballots",
                self.rule,
                rule.ballot_type(),
                self.generator.ballot()
            )));
        }
        sample_size(&rule, self.eps, self.k, self.m)?;
        if self.sampler == SamplerKind::Bernoulli && !(self.delta > 0.0 && self.delta < 1.0) {
            bail!(streamvote_core::Error::Parameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(rule)
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        self.seed_base.wrapping_add(trial as u64)
    }
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub committee: String,
    pub sample_score: u64,
    pub full_score: u64,
    pub opt_score: u64,
    pub surrogate_gap: u64,
    pub threshold: f64,
    pub success: bool,
    pub votes_seen: u64,
    pub votes_stored: u64,
    pub peak_stored_votes: u64,
    pub draw_size: u64,
    /// The draw size reached the stream length, so the whole election was kept.
    pub clamped: bool,
    pub wall_time_ms: u64,
    pub error: String,
}

pub const CSV_HEADER: [&str; 16] = [
    "trial",
    "seed",
    "committee",
    "sample_score",
    "full_score",
    "opt_score",
    "surrogate_gap",
    "threshold",
    "success",
    "votes_seen",
    "votes_stored",
    "peak_stored_votes",
    "draw_size",
    "clamped",
    "wall_time_ms",
    "error",
];

impl TrialRecord {
    fn row(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.seed.to_string(),
            self.committee.clone(),
            self.sample_score.to_string(),
            self.full_score.to_string(),
            self.opt_score.to_string(),
            self.surrogate_gap.to_string(),
            self.threshold.to_string(),
            (self.success as u8).to_string(),
            self.votes_seen.to_string(),
            self.votes_stored.to_string(),
            self.peak_stored_votes.to_string(),
            self.draw_size.to_string(),
            (self.clamped as u8).to_string(),
            self.wall_time_ms.to_string(),
            self.error.clone(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub records: Vec<TrialRecord>,
    pub success_rate: f64,
    pub mean_peak_stored_votes: f64,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rule = cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.trial_seed(trial);
            run_trial(cfg, &rule, trial, seed).unwrap_or_else(|e| TrialRecord {
                trial,
                seed,
                error: format!("{e:#}"),
                ..Default::default()
            })
        })
        .collect();

    let trials = records.len() as f64;
    let success_rate = records.iter().filter(|r| r.success).count() as f64 / trials;
    let mean_peak_stored_votes =
        records.iter().map(|r| r.peak_stored_votes as f64).sum::<f64>() / trials;
    Ok(ExperimentReport {
        records,
        success_rate,
        mean_peak_stored_votes,
    })
}

// Sampler randomness is decorrelated from the generator's by a fixed odd constant.
const SAMPLER_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

fn run_trial(cfg: &ExperimentConfig, rule: &RuleSpec, trial: usize, seed: u64) -> Result<TrialRecord> {
    let started = Instant::now();
    let ballot = cfg.generator.ballot();
    let votes = cfg.generator.generate(cfg.n, cfg.m, seed)?;
    let election = Election::new(cfg.m, ballot, votes)?;
    let opt_score = exact_winner(&election, rule, cfg.k)?.opt_score;

    let sampler = match cfg.sampler {
        SamplerKind::Reservoir => SamplerChoice::Reservoir,
        SamplerKind::Bernoulli => SamplerChoice::Bernoulli {
            n: cfg.n,
            delta: cfg.delta,
        },
    };
    let stream_cfg = StreamConfig {
        sampler,
        seed: seed ^ SAMPLER_SEED_MIX,
        draw_size_override: if cfg.full_retention {
            Some(cfg.n as u64)
        } else {
            cfg.draw_size
        },
    };
    let header = StreamHeader { m: cfg.m, ballot };
    let stream = election.votes().iter().cloned().map(Ok);
    let out = streaming_winner(stream, header, rule, cfg.k, cfg.eps, &stream_cfg)?;

    let full_score = committee_score(&election, rule, &out.committee)?;
    let gap = gap_report(opt_score, full_score, cfg.eps, cfg.n, rule.max_satisfaction());
    let clamped = match sampler {
        SamplerChoice::Reservoir => out.draw_size >= cfg.n as u64,
        SamplerChoice::Bernoulli { n, delta } => out.draw_size as f64 >= n as f64 * delta,
    };
    let committee = out
        .committee
        .members()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(TrialRecord {
        trial,
        seed,
        committee,
        sample_score: out.sample_score,
        full_score,
        opt_score,
        surrogate_gap: gap.gap,
        threshold: gap.threshold,
        success: gap.passed,
        votes_seen: out.stats.votes_seen,
        votes_stored: out.stats.votes_stored,
        peak_stored_votes: out.stats.peak_stored_votes,
        draw_size: out.draw_size,
        clamped,
        wall_time_ms: if cfg.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
        error: String::new(),
    })
}

/// Writes the fixed header, one row per trial in trial order, and a final
/// `summary` row carrying the success rate in `success` and the mean peak in
/// `peak_stored_votes`.
pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.records {
        w.write_record(r.row())?;
    }
    let mut summary = vec![String::new(); CSV_HEADER.len()];
    summary[0] = "summary".into();
    summary[8] = report.success_rate.to_string();
    summary[11] = report.mean_peak_stored_votes.to_string();
    w.write_record(&summary)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            rule: "approval-cc".into(),
            k: 2,
            eps: 0.2,
            trials: 4,
            seed_base: 10,
            generator: GeneratorSpec::ImpartialApproval { p: 0.3 },
            sampler: SamplerKind::Reservoir,
            delta: 0.5,
            n: 2_000,
            m: 6,
            draw_size: None,
            full_retention: false,
            timing: false,
        }
    }

    #[test]
    fn records_are_consistent() {
        let report = run_experiment(&config()).unwrap();
        assert_eq!(report.records.len(), 4);
        for (i, r) in report.records.iter().enumerate() {
            assert_eq!(r.trial, i);
            assert_eq!(r.seed, 10 + i as u64);
            assert!(r.error.is_empty());
            assert!(r.full_score <= r.opt_score);
            assert_eq!(r.success, r.surrogate_gap as f64 <= r.threshold);
            assert_eq!(r.draw_size, 538);
            assert_eq!(r.peak_stored_votes, 538);
            assert!(!r.clamped);
        }
    }

    #[test]
    fn full_retention_is_exact() {
        let cfg = ExperimentConfig {
            full_retention: true,
            n: 300,
            ..config()
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.success_rate, 1.0);
        assert!(report.records.iter().all(|r| r.clamped && r.surrogate_gap == 0));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(run_experiment(&ExperimentConfig { trials: 0, ..config() }).is_err());
        assert!(run_experiment(&ExperimentConfig { rule: "borda-cc".into(), ..config() }).is_err());
        assert!(run_experiment(&ExperimentConfig { k: 7, ..config() }).is_err());
    }

    #[test]
    fn csv_layout() {
        let report = run_experiment(&ExperimentConfig { trials: 2, n: 500, ..config() }).unwrap();
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[3].starts_with("summary,"));
        assert!(lines.iter().all(|l| l.split(',').count() == CSV_HEADER.len()));
    }
}
