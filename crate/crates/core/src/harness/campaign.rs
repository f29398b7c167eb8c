//! Campaign execution: per-trial checking, counter merging, violation
//! recording, and automatic shrinking of conjecture findings.
//!
//! Trials are independent given (campaign seed, trial index) and may run in
//! parallel; the merge is performed in trial order, so the report is
//! identical whatever the worker count.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::generate::{generate_instance, GeneratedInstance, Instance};
use super::shrink::{shrink, spectrum_of};
use super::FuzzConfig;
use crate::bounds::{check_bound_with, BoundCheckReport, BoundId, CheckOptions};
use crate::error::Result;
use crate::io;
use crate::numkern::{HermitianMatrix, OrthonormalBasis, RNG_ALGORITHM};

/// Per-bound tally over a campaign. `held + violated + inapplicable` equals
/// the number of trials (skipped generations count as inapplicable).
#[derive(Debug, Clone, Serialize)]
pub struct BoundCounter {
    pub bound: BoundId,
    pub applicable: usize,
    pub held: usize,
    pub violated: usize,
    pub inapplicable: usize,
    /// Smallest slack seen across applicable trials.
    pub worst_slack: Option<f64>,
}

/// Why a violation was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// A proved bound failed: an implementation bug, never a finding.
    TheoremViolation,
    /// The conjectured bound failed: a research finding, quarantined.
    ConjectureFinding,
}

/// One recorded violation, replayable from the trial seed.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub trial_seed: u64,
    pub digest: String,
    pub kind: ViolationKind,
    pub report: BoundCheckReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkipRecord {
    pub trial_seed: u64,
    pub reason: String,
}

/// A shrunk conjecture finding, carried with enough data to replay it from
/// the serialized report alone.
#[derive(Debug, Clone, Serialize)]
pub struct ShrunkFinding {
    pub trial_seed: u64,
    pub bound: BoundId,
    pub n: usize,
    pub k: usize,
    pub spectrum: Vec<f64>,
    pub angles: Vec<f64>,
    pub steps: usize,
    pub report: BoundCheckReport,
    /// The shrunk instance in the text matrix format.
    pub a_text: String,
    pub x_text: String,
    pub y_text: String,
}

/// Aggregate outcome of a fuzz campaign.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: FuzzConfig,
    pub rng_algorithm: &'static str,
    pub trials: usize,
    pub skipped: usize,
    pub counters: Vec<BoundCounter>,
    pub violations: Vec<Violation>,
    pub shrunk: Vec<ShrunkFinding>,
    pub skip_records: Vec<SkipRecord>,
    /// Excluded from the determinism guarantee; drop it for byte-identical
    /// output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl CampaignReport {
    pub fn counter(&self, bound: BoundId) -> Option<&BoundCounter> {
        self.counters.iter().find(|c| c.bound == bound)
    }

    pub fn theorem_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::TheoremViolation)
            .count()
    }

    pub fn conjecture_findings(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.kind == ViolationKind::ConjectureFinding)
            .count()
    }

    pub fn strip_wall_time(&mut self) {
        self.wall_time_secs = None;
    }
}

/// Short content digest of an instance, for humans comparing findings.
fn instance_digest(a: &HermitianMatrix, x: &OrthonormalBasis, y: &OrthonormalBasis) -> String {
    let mut h = Sha256::new();
    let mut put = |tag: &[u8], data: &[f64]| {
        h.update(tag);
        for v in data {
            h.update(v.to_le_bytes());
        }
    };
    let a_data: Vec<f64> = a
        .packed_lower()
        .iter()
        .flat_map(|z| [z.re, z.im])
        .collect();
    put(b"A", &a_data);
    let x_data: Vec<f64> = x.as_matrix().iter().flat_map(|z| [z.re, z.im]).collect();
    put(b"X", &x_data);
    let y_data: Vec<f64> = y.as_matrix().iter().flat_map(|z| [z.re, z.im]).collect();
    put(b"Y", &y_data);
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

enum TrialStatus {
    Inapplicable,
    Held { slack: f64 },
    Violated { report: BoundCheckReport, digest: String },
}

enum TrialOutcome {
    Skipped(String),
    Checked(Vec<(BoundId, TrialStatus)>),
}

fn run_trial(cfg: &FuzzConfig, trial_seed: u64, opts: &CheckOptions) -> Result<TrialOutcome> {
    let instance = match generate_instance(cfg, trial_seed)? {
        GeneratedInstance::Ok(inst) => inst,
        GeneratedInstance::Skipped { reason } => return Ok(TrialOutcome::Skipped(reason)),
    };
    let Instance { a, x, y, .. } = instance;
    let mut statuses = Vec::with_capacity(cfg.bounds.len());
    for &bound in &cfg.bounds {
        let report = check_bound_with(bound, &a, &x, &y, opts)?;
        let status = match report.holds() {
            None => TrialStatus::Inapplicable,
            Some(true) => TrialStatus::Held {
                slack: report.verdict.as_ref().map(|v| v.min_slack()).unwrap_or(0.0),
            },
            Some(false) => TrialStatus::Violated {
                digest: instance_digest(&a, &x, &y),
                report,
            },
        };
        statuses.push((bound, status));
    }
    Ok(TrialOutcome::Checked(statuses))
}

/// Runs the campaign single-threaded.
pub fn run_campaign(cfg: &FuzzConfig) -> Result<CampaignReport> {
    run_campaign_with_jobs(cfg, 1)
}

/// Runs the campaign with up to `jobs` worker threads. The report does not
/// depend on the worker count.
pub fn run_campaign_with_jobs(cfg: &FuzzConfig, jobs: usize) -> Result<CampaignReport> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let opts = CheckOptions::with_tolerance(cfg.tolerance);

    let outcomes: Result<Vec<TrialOutcome>> = if jobs <= 1 {
        (0..cfg.trials as u64)
            .map(|t| run_trial(cfg, t, &opts))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| crate::error::Error::Contract(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_trial(cfg, t, &opts))
                .collect()
        })
    };
    let outcomes = outcomes?;

    let mut counters: Vec<BoundCounter> = cfg
        .bounds
        .iter()
        .map(|&bound| BoundCounter {
            bound,
            applicable: 0,
            held: 0,
            violated: 0,
            inapplicable: 0,
            worst_slack: None,
        })
        .collect();
    let mut violations = Vec::new();
    let mut shrunk = Vec::new();
    let mut skip_records = Vec::new();

    for (trial, outcome) in outcomes.into_iter().enumerate() {
        let trial_seed = trial as u64;
        match outcome {
            TrialOutcome::Skipped(reason) => {
                for c in counters.iter_mut() {
                    c.inapplicable += 1;
                }
                skip_records.push(SkipRecord { trial_seed, reason });
            }
            TrialOutcome::Checked(statuses) => {
                for ((bound, status), counter) in statuses.into_iter().zip(counters.iter_mut()) {
                    debug_assert_eq!(bound, counter.bound);
                    match status {
                        TrialStatus::Inapplicable => counter.inapplicable += 1,
                        TrialStatus::Held { slack } => {
                            counter.applicable += 1;
                            counter.held += 1;
                            counter.worst_slack = Some(match counter.worst_slack {
                                Some(w) => w.min(slack),
                                None => slack,
                            });
                        }
                        TrialStatus::Violated { report, digest } => {
                            counter.applicable += 1;
                            counter.violated += 1;
                            let slack = report
                                .verdict
                                .as_ref()
                                .map(|v| v.min_slack())
                                .unwrap_or(f64::NEG_INFINITY);
                            counter.worst_slack = Some(match counter.worst_slack {
                                Some(w) => w.min(slack),
                                None => slack,
                            });
                            let kind = if bound.is_theorem_status() {
                                ViolationKind::TheoremViolation
                            } else {
                                ViolationKind::ConjectureFinding
                            };
                            if kind == ViolationKind::ConjectureFinding {
                                if let Some(f) =
                                    shrink_finding(cfg, trial_seed, bound, &opts)?
                                {
                                    shrunk.push(f);
                                }
                            }
                            violations.push(Violation {
                                trial_seed,
                                digest,
                                kind,
                                report,
                            });
                        }
                    }
                }
            }
        }
    }

    let skipped = skip_records.len();
    Ok(CampaignReport {
        config: cfg.clone(),
        rng_algorithm: RNG_ALGORITHM,
        trials: cfg.trials,
        skipped,
        counters,
        violations,
        shrunk,
        skip_records,
        wall_time_secs: Some(started.elapsed().as_secs_f64()),
    })
}

/// Regenerates the violating trial and shrinks it. Shrink hiccups on
/// borderline instances are recorded as absent rather than failing the
/// campaign.
fn shrink_finding(
    cfg: &FuzzConfig,
    trial_seed: u64,
    bound: BoundId,
    opts: &CheckOptions,
) -> Result<Option<ShrunkFinding>> {
    let instance = match generate_instance(cfg, trial_seed)? {
        GeneratedInstance::Ok(inst) => inst,
        GeneratedInstance::Skipped { .. } => return Ok(None),
    };
    let result = match shrink(&instance.a, &instance.x, &instance.y, bound, opts) {
        Ok(r) => r,
        Err(_) => return Ok(None),
    };
    let inst = &result.instance;
    Ok(Some(ShrunkFinding {
        trial_seed,
        bound,
        n: inst.n,
        k: inst.k,
        spectrum: spectrum_of(&inst.a)?,
        angles: inst.thetas.clone(),
        steps: result.steps,
        report: result.report.clone(),
        a_text: io::format_matrix(&inst.a.to_dense()),
        x_text: io::format_matrix(&inst.x.to_dense()),
        y_text: io::format_matrix(&inst.y.to_dense()),
    }))
}
