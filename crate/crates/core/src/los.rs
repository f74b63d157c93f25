//! Closed forms for three user pairs over line-of-sight channels.
//!
//! With single-path links the amplitudes are the same on both subcarriers, so
//! the three-user feasibility condition reduces to a condition on the spacing
//! alone: `Δf · Δτ_Σ ∈ ℤ∖{0}` with
//! `Δτ_Σ = τ13 − τ12 + τ21 − τ23 + τ32 − τ31` (1-based indices).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::alignment::{ia_zf_rate, AlignmentStructure};
use crate::channel::{channel_at, Scenario, SubcarrierPair};
use crate::{Error, Result};

/// Minimal feasible spacing of a three-user scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingAnalysis {
    /// `τ13 − τ12 + τ21 − τ23 + τ32 − τ31`, seconds.
    pub delta_tau_sum: f64,
    /// `1/|Δτ_Σ|` in Hz; infinite when degenerate.
    pub delta_f_min: f64,
    /// `Δτ_Σ == 0`: every spacing is feasible.
    pub degenerate: bool,
}

fn require_three(scn: &Scenario) -> Result<()> {
    if scn.k() != 3 {
        return Err(Error::Corollary1IsThreeUser(scn.k()));
    }
    Ok(())
}

pub fn spacing_analysis(scn: &Scenario) -> Result<SpacingAnalysis> {
    require_three(scn)?;
    let t = |i: usize, k: usize| scn.delay(i - 1, k - 1);
    let delta_tau_sum = t(1, 3) - t(1, 2) + t(2, 1) - t(2, 3) + t(3, 2) - t(3, 1);
    let degenerate = delta_tau_sum == 0.0;
    Ok(SpacingAnalysis {
        delta_tau_sum,
        delta_f_min: if degenerate {
            f64::INFINITY
        } else {
            delta_tau_sum.abs().recip()
        },
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LosFeasibility {
    pub feasible: bool,
    /// Integer nearest to `Δf · Δτ_Σ`; may be negative.
    pub nearest_n: i64,
    pub degenerate: bool,
}

/// Feasibility of spacing `delta_f` for a three-user LoS scenario.
pub fn los_feasible(scn: &Scenario, delta_f: f64, tol: f64) -> Result<LosFeasibility> {
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::invalid(format!("spacing must be > 0, got {delta_f}")));
    }
    let sa = spacing_analysis(scn)?;
    if sa.degenerate {
        return Ok(LosFeasibility {
            feasible: true,
            nearest_n: 0,
            degenerate: true,
        });
    }
    let q = delta_f * sa.delta_tau_sum;
    let n = q.round();
    Ok(LosFeasibility {
        feasible: (q - n).abs() <= tol && n != 0.0,
        nearest_n: n as i64,
        degenerate: false,
    })
}

/// `(Δτ₁, Δτ₂, Δτ₃)`: the delay combinations that set the effective channel
/// amplitudes.
pub fn effective_delay_offsets(scn: &Scenario) -> Result<[f64; 3]> {
    require_three(scn)?;
    let t = |i: usize, k: usize| scn.delay(i - 1, k - 1);
    Ok([
        -t(1, 1) + t(2, 1) - t(2, 3) + t(1, 3),
        -t(2, 2) + t(2, 3) - t(1, 3) + t(1, 2),
        -t(3, 3) + t(3, 2) - t(1, 2) + t(1, 3),
    ])
}

/// `|h̄_i| = |h_ii| · |sin(π n Δf_min Δτ_i)|` at spacing `n · Δf_min`.
pub fn effective_amplitudes(scn: &Scenario, n: i64) -> Result<[f64; 3]> {
    if n == 0 {
        return Err(Error::OrthogonalityViolated);
    }
    let sa = spacing_analysis(scn)?;
    if sa.degenerate {
        return Err(Error::DegenerateScenario);
    }
    let dt = effective_delay_offsets(scn)?;
    let df = n as f64 * sa.delta_f_min;
    Ok(std::array::from_fn(|i| {
        scn.link(i, i).amplitude * (PI * (df * dt[i]).rem_euclid(1.0)).sin().abs()
    }))
}

/// `Σ_i log2(1 + |h_ii|²/σ²)`: the IA rate with every effective amplitude at
/// its maximum.
pub fn upper_bound(scn: &Scenario) -> Result<f64> {
    require_three(scn)?;
    Ok((0..3)
        .map(|i| (1.0 + scn.link(i, i).amplitude.powi(2) / scn.noise_variance).log2())
        .sum())
}

/// Spacings to evaluate for a bandwidth of `x_max · Δf_min`, in units of
/// `Δf_min`, ascending.
///
/// Contains `j/grid` for every `j ≥ 1` up to `x_max`, every integer multiple up
/// to `x_max`, and `x_max` itself.
pub fn candidate_multiples(x_max: f64, grid_per_dfmin: usize) -> Vec<f64> {
    let g = grid_per_dfmin.max(1) as f64;
    let slack = 1e-12 * x_max.max(1.0);
    let mut out: Vec<f64> = (1..)
        .map(|j| j as f64 / g)
        .take_while(|x| *x <= x_max + slack)
        .collect();
    out.extend((1..).map(|n| n as f64).take_while(|x| *x <= x_max + slack));
    out.push(x_max);
    out.retain(|x| *x > 0.0);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= slack);
    out
}

/// Evaluates the IA zero-forcing pipeline of one scenario at chosen spacings.
pub struct IaEvaluator {
    structure: Arc<AlignmentStructure>,
    base_frequency: f64,
}

impl IaEvaluator {
    pub fn new(k: usize, base_frequency: f64) -> Result<Self> {
        Ok(IaEvaluator {
            structure: AlignmentStructure::new(k)?,
            base_frequency,
        })
    }

    /// IA-ZF sum rate at subcarrier spacing `delta_f`.
    pub fn sum_rate(&self, scn: &Scenario, delta_f: f64) -> Result<f64> {
        let sc = SubcarrierPair::with_spacing(self.base_frequency, delta_f)?;
        Ok(ia_zf_rate(&self.structure, &channel_at(scn, sc), scn.noise_variance)?.sum)
    }
}

/// Best IA-ZF spacing within `max_bandwidth`.
///
/// Searches every multiple of `Δf_min`, a uniform sub-grid of
/// `grid_per_dfmin` points per `Δf_min`, and `max_bandwidth` itself. Ties go
/// to the smaller spacing. Returns `(Δf*, rate*)`.
pub fn best_spacing(scn: &Scenario, max_bandwidth: f64, grid_per_dfmin: usize) -> Result<(f64, f64)> {
    if grid_per_dfmin == 0 {
        return Err(Error::invalid("grid_per_dfmin must be >= 1"));
    }
    if !(max_bandwidth > 0.0 && max_bandwidth.is_finite()) {
        return Err(Error::invalid("max_bandwidth must be > 0"));
    }
    let sa = spacing_analysis(scn)?;
    if sa.degenerate {
        return Err(Error::DegenerateScenario);
    }
    let eval = IaEvaluator::new(3, 0.0)?;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for x in candidate_multiples(max_bandwidth / sa.delta_f_min, grid_per_dfmin) {
        let df = x * sa.delta_f_min;
        let rate = eval.sum_rate(scn, df)?;
        if rate > best.1 {
            best = (df, rate);
        }
    }
    Ok(best)
}

/// Distance of `x` to the nearest odd integer.
fn distance_to_odd(x: f64) -> f64 {
    let odd = 2.0 * ((x - 1.0) / 2.0).round() + 1.0;
    (x - odd).abs()
}

fn cross_delays(scn: &Scenario) -> Vec<f64> {
    let k = scn.k();
    (0..k)
        .flat_map(|i| (0..k).filter(move |&t| t != i).map(move |t| (i, t)))
        .map(|(i, t)| scn.delay(i, t))
        .collect()
}

/// How far spacing `delta_f` is from making time-based IA exact.
///
/// Time-based alignment needs `2 Δf τ_ik` odd for every cross link; the
/// residual is the largest distance to an odd integer.
pub fn time_ia_residual(scn: &Scenario, delta_f: f64) -> f64 {
    cross_delays(scn)
        .iter()
        .map(|t| distance_to_odd(2.0 * delta_f * t))
        .fold(0.0, f64::max)
}

/// Exact minimum of [`time_ia_residual`] over `Δf ∈ (0, limit]` for every
/// limit, returned as `(Δf, residual)` pairs in the order of `limits`.
///
/// The residual is a maximum of piecewise-linear sawtooth functions, so its
/// minimum sits at a kink of one sawtooth, at a crossing of two linear pieces,
/// or at the end of the interval. All of those are enumerated.
pub fn min_time_ia_residual(scn: &Scenario, limits: &[f64]) -> Vec<(f64, f64)> {
    let taus = cross_delays(scn);
    let top = limits.iter().copied().fold(0.0, f64::max);
    let mut best = vec![(f64::NAN, f64::INFINITY); limits.len()];
    let mut visit = |df: f64| {
        if !(df > 0.0 && df <= top) {
            return;
        }
        let r = taus
            .iter()
            .map(|t| distance_to_odd(2.0 * df * t))
            .fold(0.0, f64::max);
        for (b, &lim) in best.iter_mut().zip(limits) {
            if df <= lim && (r < b.1 || (r == b.1 && df < b.0)) {
                *b = (df, r);
            }
        }
    };

    for &lim in limits {
        visit(lim);
    }
    for &t in &taus {
        let m_max = (2.0 * t * top).floor() as i64;
        for m in 1..=m_max {
            visit(m as f64 / (2.0 * t));
        }
    }
    for (a, &ta) in taus.iter().enumerate() {
        for &tb in &taus[a + 1..] {
            let o_a_max = (2.0 * ta * top).ceil() as i64 + 1;
            let mut o_a = 1;
            while o_a <= o_a_max {
                let lo = (o_a as f64 - 1.0) / (2.0 * ta);
                let hi = (o_a as f64 + 1.0) / (2.0 * ta);
                let ob_lo = (2.0 * tb * lo - 1.0).floor() as i64;
                let ob_hi = (2.0 * tb * hi + 1.0).ceil() as i64;
                for o_b in ob_lo..=ob_hi {
                    if o_b.rem_euclid(2) != 1 {
                        continue;
                    }
                    for s in [1.0, -1.0] {
                        let den = 2.0 * (ta - s * tb);
                        if den != 0.0 {
                            visit((o_a as f64 - s * o_b as f64) / den);
                        }
                    }
                }
                o_a += 2;
            }
        }
    }
    best
}
