//! Deterministic Monte Carlo sweeps over the subcarrier spacing.
//!
//! Each trial samples its own scenario from a private RNG substream and
//! normalizes the spacing axis by its own `Δf_min`. Trials may run on any
//! number of threads; results are reduced in trial order, so the output only
//! depends on the configuration.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{calibrate_noise, channel_at, sample_scenario, Scenario, ScenarioConfig, SubcarrierPair};
use crate::los::{candidate_multiples, spacing_analysis};
use crate::scheme::SchemeRegistry;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "x_norm,ia_zf,max_ia_zf,ia_upper_bound,tdma,int_as_noise";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: ScenarioConfig,
    pub snr_db: f64,
    pub trials: usize,
    /// Largest spacing, in units of each trial's `Δf_min`.
    pub x_max: f64,
    /// Number of rows; the axis runs from 0 to `x_max` inclusive.
    pub x_points: usize,
    pub grid_per_dfmin: usize,
    pub master_seed: u64,
    /// Frequency of the first subcarrier, Hz.
    pub base_frequency: f64,
    /// Worker cap; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            scenario: ScenarioConfig::default(),
            snr_db: 20.0,
            trials: 10_000,
            x_max: 10.0,
            x_points: 201,
            grid_per_dfmin: 20,
            master_seed: 1,
            base_frequency: 0.0,
            threads: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.scenario.k != 3 {
            return Err(Error::Corollary1IsThreeUser(self.scenario.k));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::invalid("x_max must be > 0"));
        }
        if self.x_points < 2 {
            return Err(Error::invalid("x_points must be >= 2"));
        }
        if self.grid_per_dfmin == 0 {
            return Err(Error::invalid("grid_per_dfmin must be >= 1"));
        }
        if !self.snr_db.is_finite() || !self.base_frequency.is_finite() {
            return Err(Error::invalid("snr_db and base frequency must be finite"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("thread count must be >= 1"));
        }
        Ok(())
    }

    /// Normalized spacing axis, `x_j = x_max · j / (x_points − 1)`.
    pub fn x_axis(&self) -> Vec<f64> {
        let last = (self.x_points - 1) as f64;
        (0..self.x_points)
            .map(|j| self.x_max * j as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x_norm: f64,
    pub ia_zf: f64,
    pub max_ia_zf: f64,
    pub ia_upper_bound: f64,
    pub tdma: f64,
    pub int_as_noise: f64,
}

/// Trial-averaged sum rates in bits per OFDM block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Relative slack for rate comparisons that hold exactly in real arithmetic.
pub const DOMINANCE_SLACK: f64 = 1e-12;

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            // `{}` on f64 is the shortest exact round-trip form
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.x_norm, r.ia_zf, r.max_ia_zf, r.ia_upper_bound, r.tdma, r.int_as_noise
            )
            .expect("write to string");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep result serializes")
    }

    /// Checks the row-wise invariants: increasing axis, non-decreasing
    /// `max_ia_zf`, and `ia_zf ≤ max_ia_zf ≤ ia_upper_bound`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let le = |a: f64, b: f64| a <= b + DOMINANCE_SLACK * b.abs().max(1.0);
        for (j, r) in self.rows.iter().enumerate() {
            if !le(r.ia_zf, r.max_ia_zf) || !le(r.max_ia_zf, r.ia_upper_bound) {
                return Err(format!("row {j}: dominance chain broken: {r:?}"));
            }
            if j > 0 {
                let p = &self.rows[j - 1];
                if r.x_norm <= p.x_norm {
                    return Err(format!("row {j}: x_norm not increasing"));
                }
                if r.max_ia_zf < p.max_ia_zf {
                    return Err(format!("row {j}: max_ia_zf decreased"));
                }
            }
        }
        Ok(())
    }
}

/// Per-trial curves, one entry per x point: `[ia, max_ia, ub, tdma, ian]`.
fn run_trial(cfg: &SweepConfig, registry: &SchemeRegistry, xs: &[f64], noise: f64, trial: u64) -> Result<Vec<[f64; 5]>> {
    let scn = sample_scenario(&cfg.scenario, cfg.master_seed, trial)?.with_noise_variance(noise);
    let sa = spacing_analysis(&scn)?;
    if sa.degenerate {
        return Err(Error::DegenerateScenario);
    }
    let ia = registry.require("ia_zf")?;
    let ub = registry.require("ia_upper_bound")?;
    let tdma = registry.require("tdma")?;
    let ian = registry.require("int_as_noise")?;

    let pair = |x: f64| SubcarrierPair::with_spacing(cfg.base_frequency, x * sa.delta_f_min);
    let ia_at = |x: f64, scn: &Scenario| -> Result<f64> {
        Ok(ia.evaluate(&channel_at(scn, pair(x)?), scn.noise_variance)?.sum)
    };

    // Bandwidth-limited maximum: running max over the search grid merged with
    // the sweep points themselves.
    let slack = 1e-12 * cfg.x_max.max(1.0);
    let mut search = candidate_multiples(cfg.x_max, cfg.grid_per_dfmin);
    search.extend(xs.iter().copied().filter(|x| *x > 0.0));
    search.sort_by(f64::total_cmp);
    search.dedup_by(|a, b| (*a - *b).abs() <= slack);
    let mut running = Vec::with_capacity(search.len());
    let mut best = 0.0f64;
    for &x in &search {
        best = best.max(ia_at(x, &scn)?);
        running.push(best);
    }

    let reference = channel_at(&scn, pair(1.0)?);
    let mut rows = Vec::with_capacity(xs.len());
    let mut cursor = 0;
    let mut prev_max = 0.0f64;
    for &x in xs {
        // no orthogonal subcarrier pair fits in zero bandwidth
        let (ia_rate, max_rate, ch) = if x == 0.0 {
            (0.0, 0.0, reference.clone())
        } else {
            while cursor + 1 < search.len() && search[cursor + 1] <= x + slack {
                cursor += 1;
            }
            let ch = channel_at(&scn, pair(x)?);
            let rate = ia.evaluate(&ch, noise)?.sum;
            (rate, running[cursor].max(rate).max(prev_max), ch)
        };
        prev_max = max_rate;
        rows.push([
            ia_rate,
            max_rate,
            ub.evaluate(&ch, noise)?.sum,
            tdma.evaluate(&ch, noise)?.sum,
            ian.evaluate(&ch, noise)?.sum,
        ]);
    }
    Ok(rows)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the spacing sweep and averages every curve over the trials.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let registry = SchemeRegistry::with_builtin(cfg.scenario.k)?;
    let noise = calibrate_noise(&cfg.scenario, cfg.snr_db)?;
    let xs = cfg.x_axis();

    let per_trial: Vec<Vec<[f64; 5]>> = with_pool(cfg.threads, || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(cfg, &registry, &xs, noise, t))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut sums = vec![[0.0f64; 5]; xs.len()];
    for trial in &per_trial {
        for (acc, row) in sums.iter_mut().zip(trial) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }
    let n = cfg.trials as f64;
    let rows = xs
        .iter()
        .zip(&sums)
        .map(|(&x, s)| SweepRow {
            x_norm: x,
            ia_zf: s[0] / n,
            max_ia_zf: s[1] / n,
            ia_upper_bound: s[2] / n,
            tdma: s[3] / n,
            int_as_noise: s[4] / n,
        })
        .collect();
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantiles {
    pub p2_5: f64,
    pub p50: f64,
    pub p97_5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    /// Lower edge, Hz.
    pub lo: f64,
    /// Upper edge, Hz.
    pub hi: f64,
    pub count: usize,
}

/// Distribution of `Δf_min` over sampled scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfminSummary {
    pub trials: usize,
    pub quantiles: Quantiles,
    pub fraction_in_1e6_1e8: f64,
    /// Quarter-decade bins from 1 kHz to 100 GHz.
    pub histogram: Vec<HistogramBin>,
    pub underflow: usize,
    pub overflow: usize,
    /// Raw samples in trial order.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

const HIST_LOG_LO: i32 = 3;
const HIST_LOG_HI: i32 = 11;
const HIST_BINS_PER_DECADE: i32 = 4;

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

pub fn dfmin_distribution(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<DfminSummary> {
    cfg.validate()?;
    if cfg.k != 3 {
        return Err(Error::Corollary1IsThreeUser(cfg.k));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| Ok(spacing_analysis(&sample_scenario(cfg, seed, t)?)?.delta_f_min))
        .collect::<Result<Vec<f64>>>()?;

    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let nbins = ((HIST_LOG_HI - HIST_LOG_LO) * HIST_BINS_PER_DECADE) as usize;
    let edge = |b: usize| 10f64.powf(HIST_LOG_LO as f64 + b as f64 / HIST_BINS_PER_DECADE as f64);
    let mut histogram: Vec<HistogramBin> = (0..nbins)
        .map(|b| HistogramBin {
            lo: edge(b),
            hi: edge(b + 1),
            count: 0,
        })
        .collect();
    let (mut underflow, mut overflow) = (0, 0);
    for &s in &samples {
        let pos = (s.log10() - HIST_LOG_LO as f64) * HIST_BINS_PER_DECADE as f64;
        if pos < 0.0 {
            underflow += 1;
        } else if pos >= nbins as f64 {
            overflow += 1;
        } else {
            histogram[pos as usize].count += 1;
        }
    }
    let in_range = samples.iter().filter(|s| (1e6..=1e8).contains(*s)).count();
    Ok(DfminSummary {
        trials,
        quantiles: Quantiles {
            p2_5: quantile(&sorted, 0.025),
            p50: quantile(&sorted, 0.5),
            p97_5: quantile(&sorted, 0.975),
        },
        fraction_in_1e6_1e8: in_range as f64 / trials as f64,
        histogram,
        underflow,
        overflow,
        samples,
    })
}
