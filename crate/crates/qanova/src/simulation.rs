//! Monte Carlo harness estimating the test's Type I error probability over
//! a grid of sampling situations, with exact binomial confidence intervals
//! and Bradley's liberal robustness criterion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::distributions::{DistributionSpec, PreparedSource};
use crate::error::{Error, Result};
use crate::qtest::{qanova, GroupedData};
use crate::quantiles::Quantile;
use crate::rng::{derive_seed2, stream, TAG_GROUP, TAG_SIM_DRAW, TAG_SIM_TEST};
use crate::special::reg_inc_beta_inv;

/// Default bootstrap replicates per test.
pub const DEFAULT_NBOOT: usize = 600;
/// Default Monte Carlo replications per cell.
pub const DEFAULT_REPLICATIONS: usize = 1000;
/// Default master seed; fixed so runs reproduce out of the box.
pub const DEFAULT_SEED: u64 = 42;
/// Confidence level of the interval attached to every cell.
pub const CI_LEVEL: f64 = 0.95;

/// One simulation cell: group sizes, data sources, target quantile,
/// nominal level, and budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// One sample size per group.
    pub sizes: Vec<usize>,
    /// Either one shared source or one per group.
    pub sources: Vec<DistributionSpec>,
    /// Target quantile, strictly between 0 and 1.
    pub q: f64,
    /// Nominal level; a replication counts as a rejection when `p <= alpha`.
    pub alpha: f64,
    /// Monte Carlo replications.
    pub replications: usize,
    /// Bootstrap replicates inside each test.
    pub nboot: usize,
    /// Master seed; every replication derives its own streams from it.
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<Quantile> {
        if self.sizes.len() < 2 {
            return Err(Error::TooFewGroups(self.sizes.len()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::SampleTooSmall {
                n,
                reason: "every simulated group needs at least 2 observations",
            });
        }
        if self.sources.len() != 1 && self.sources.len() != self.sizes.len() {
            return Err(Error::Config(format!(
                "got {} sources for {} groups; give one shared source or one per group",
                self.sources.len(),
                self.sizes.len()
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "need at least one replication".into(),
            ));
        }
        if self.nboot == 0 {
            return Err(Error::InvalidParameter(
                "need at least one bootstrap replicate".into(),
            ));
        }
        Quantile::new(self.q)
    }

    fn prepared_sources(&self) -> Result<Vec<PreparedSource>> {
        if self.sources.len() == 1 {
            let one = self.sources[0].prepare()?;
            Ok(vec![one; self.sizes.len()])
        } else {
            self.sources.iter().map(|s| s.prepare()).collect()
        }
    }
}

/// What a simulation cell reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    /// Estimated Type I error probability, `rejections / replications`.
    pub alpha_hat: f64,
    pub rejections: usize,
    pub replications: usize,
    /// Exact (Clopper–Pearson) confidence interval for the rejection
    /// probability at [`CI_LEVEL`].
    pub ci_low: f64,
    pub ci_high: f64,
    /// Whether `alpha_hat` lies inside Bradley's liberal band.
    pub bradley_ok: bool,
    /// Replications whose test was degenerate; counted as non-rejections.
    pub degenerate: usize,
    pub wall_secs: f64,
}

enum RepOutcome {
    Reject,
    Accept,
    Degenerate,
}

/// Estimate the rejection rate of the quantile test under the configured
/// sources.
///
/// Each replication draws fresh samples for every group, runs the test with
/// its own derived seed, and counts `p <= alpha`. Degenerate replications
/// (the depth machinery found no usable projection direction) count as
/// non-rejections and are reported separately rather than dropped.
/// Deterministic for a fixed master seed regardless of thread schedule.
pub fn estimate_type1(cfg: &SimConfig) -> Result<SimResult> {
    let q = cfg.validate()?;
    let sources = cfg.prepared_sources()?;
    let t0 = Instant::now();

    let outcomes: Vec<RepOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| -> Result<RepOutcome> {
            let draw_seed = derive_seed2(cfg.seed, TAG_SIM_DRAW, rep as u64);
            let groups: Vec<Vec<f64>> = sources
                .iter()
                .zip(&cfg.sizes)
                .enumerate()
                .map(|(j, (src, &n))| {
                    let mut rng = stream(derive_seed2(draw_seed, TAG_GROUP, j as u64));
                    src.sample(n, &mut rng)
                })
                .collect();
            let data = GroupedData::new(groups)?;
            let test_seed = derive_seed2(cfg.seed, TAG_SIM_TEST, rep as u64);
            match qanova(&data, q, cfg.nboot, test_seed) {
                Ok(res) => Ok(if res.p_value <= cfg.alpha {
                    RepOutcome::Reject
                } else {
                    RepOutcome::Accept
                }),
                Err(Error::DegenerateCloud) => Ok(RepOutcome::Degenerate),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let rejections = outcomes
        .iter()
        .filter(|o| matches!(o, RepOutcome::Reject))
        .count();
    let degenerate = outcomes
        .iter()
        .filter(|o| matches!(o, RepOutcome::Degenerate))
        .count();
    let alpha_hat = rejections as f64 / cfg.replications as f64;
    let (ci_low, ci_high) = binomial_ci(rejections, cfg.replications, CI_LEVEL)?;

    Ok(SimResult {
        alpha_hat,
        rejections,
        replications: cfg.replications,
        ci_low,
        ci_high,
        bradley_ok: bradley_check(alpha_hat, cfg.alpha),
        degenerate,
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Exact Clopper–Pearson confidence interval for a binomial proportion.
pub fn binomial_ci(successes: usize, trials: usize, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidParameter(format!(
            "bad counts: {successes} successes out of {trials} trials"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie strictly between 0 and 1, got {level}"
        )));
    }
    let a2 = (1.0 - level) / 2.0;
    let s = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        reg_inc_beta_inv(a2, s, n - s + 1.0)?
    };
    let high = if successes == trials {
        1.0
    } else {
        reg_inc_beta_inv(1.0 - a2, s + 1.0, n - s)?
    };
    Ok((low, high))
}

/// Bradley's liberal criterion: at nominal level `alpha`, the estimated
/// level should stay within `[alpha/2, 1.5 * alpha]` (both ends inclusive).
pub fn bradley_check(alpha_hat: f64, alpha: f64) -> bool {
    alpha / 2.0 <= alpha_hat && alpha_hat <= 1.5 * alpha
}

/// One labeled grid cell, optionally carrying a published reference value
/// for the result table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub label: String,
    pub reference: Option<f64>,
    pub config: SimConfig,
}

/// A completed (or failed) grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellOutcome {
    pub label: String,
    pub source: String,
    pub config: SimConfig,
    pub reference: Option<f64>,
    pub result: std::result::Result<SimResult, String>,
}

/// Run every cell, invoking `progress` as each one lands. A failing cell is
/// recorded in its outcome and the grid keeps going.
pub fn run_grid(cells: &[GridCell], mut progress: impl FnMut(usize, &CellOutcome)) -> Vec<CellOutcome> {
    let mut outcomes = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let source = cell
            .config
            .sources
            .iter()
            .map(DistributionSpec::summary)
            .collect::<Vec<_>>()
            .join("+");
        let outcome = CellOutcome {
            label: cell.label.clone(),
            source,
            config: cell.config.clone(),
            reference: cell.reference,
            result: estimate_type1(&cell.config).map_err(|e| e.to_string()),
        };
        progress(i, &outcome);
        outcomes.push(outcome);
    }
    outcomes
}

fn default_alpha() -> f64 {
    0.05
}
fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}
fn default_nboot() -> usize {
    DEFAULT_NBOOT
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Deserialize)]
struct GridFile {
    #[serde(default)]
    cell: Vec<CellSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    label: Option<String>,
    sizes: Vec<usize>,
    q: f64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_replications")]
    replications: usize,
    #[serde(default = "default_nboot")]
    nboot: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    reference: Option<f64>,
    source: Option<DistributionSpec>,
    sources: Option<Vec<DistributionSpec>>,
}

/// Parse a simulation grid from its TOML text.
///
/// Each `[[cell]]` names group sizes, a target quantile, and either one
/// shared `source` table or a `sources` list with one entry per group;
/// `alpha`, `replications`, `nboot`, and `seed` fall back to the documented
/// defaults, and `reference` optionally carries a published value to print
/// beside the estimate.
pub fn parse_grid(text: &str) -> Result<Vec<GridCell>> {
    let file: GridFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.cell.is_empty() {
        return Err(Error::Config("no [[cell]] tables found".into()));
    }
    let mut cells = Vec::with_capacity(file.cell.len());
    for (i, spec) in file.cell.into_iter().enumerate() {
        let label = spec.label.unwrap_or_else(|| format!("cell{i}"));
        let sources = match (spec.source, spec.sources) {
            (Some(s), None) => vec![s],
            (None, Some(list)) => list,
            (Some(_), Some(_)) => {
                return Err(Error::Config(format!(
                    "cell '{label}': give either `source` or `sources`, not both"
                )))
            }
            (None, None) => {
                return Err(Error::Config(format!(
                    "cell '{label}': missing `source` (or `sources`)"
                )))
            }
        };
        cells.push(GridCell {
            label,
            reference: spec.reference,
            config: SimConfig {
                sizes: spec.sizes,
                sources,
                q: spec.q,
                alpha: spec.alpha,
                replications: spec.replications,
                nboot: spec.nboot,
                seed: spec.seed,
            },
        });
    }
    Ok(cells)
}

/// Tab-separated result table, one line per cell.
pub fn grid_tsv(outcomes: &[CellOutcome]) -> String {
    let mut out = String::from(
        "label\tsource\tsizes\tq\talpha\treplications\tnboot\tseed\t\
         alpha_hat\tci_low\tci_high\tbradley\trejections\tdegenerate\treference\twall_secs\terror\n",
    );
    for o in outcomes {
        let sizes = o
            .config
            .sizes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let reference = o
            .reference
            .map(|r| format!("{r}"))
            .unwrap_or_else(|| "-".into());
        match &o.result {
            Ok(r) => {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}\t{:.2}\t-\n",
                    o.label,
                    o.source,
                    sizes,
                    o.config.q,
                    o.config.alpha,
                    o.config.replications,
                    o.config.nboot,
                    o.config.seed,
                    r.alpha_hat,
                    r.ci_low,
                    r.ci_high,
                    if r.bradley_ok { "ok" } else { "OUT" },
                    r.rejections,
                    r.degenerate,
                    reference,
                    r.wall_secs,
                ));
            }
            Err(e) => {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t-\t-\t-\t-\t-\t-\t{}\t-\t{}\n",
                    o.label,
                    o.source,
                    sizes,
                    o.config.q,
                    o.config.alpha,
                    o.config.replications,
                    o.config.nboot,
                    o.config.seed,
                    reference,
                    e,
                ));
            }
        }
    }
    out
}

/// Machine-readable results: one JSON record per line.
pub fn grid_jsonl(outcomes: &[CellOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&serde_json::to_string(o).expect("outcome serializes"));
        out.push('\n');
    }
    out
}
