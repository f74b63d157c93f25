//! Line-of-sight channel model.
//!
//! A scenario places K transmitter/receiver pairs at random distances. Each
//! link is a single propagation path, so its frequency response has a
//! spacing-independent amplitude and a phase that rotates linearly with
//! frequency. Evaluated at two subcarriers, every link becomes a diagonal 2x2
//! matrix, stored here as a coefficient pair.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::trial_rng;
use crate::{Error, Result, C64};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// One transmitter-to-receiver propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosLink {
    /// Propagation delay in seconds.
    pub delay: f64,
    /// Linear amplitude gain.
    pub amplitude: f64,
}

impl LosLink {
    pub fn new(delay: f64, amplitude: f64) -> Result<Self> {
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(Error::invalid(format!("link delay must be finite and >= 0, got {delay}")));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid(format!("link amplitude must be finite and > 0, got {amplitude}")));
        }
        Ok(LosLink { delay, amplitude })
    }
}

/// Parameters of the random distance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub k: usize,
    /// Distance range of the direct links, meters.
    pub direct_distance_range: [f64; 2],
    /// Distance range of the cross links, meters.
    pub cross_distance_range: [f64; 2],
    pub path_loss_exponent: f64,
    /// Wave propagation speed, m/s.
    pub wave_speed: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k: 3,
            direct_distance_range: [150.0, 250.0],
            cross_distance_range: [250.0, 350.0],
            path_loss_exponent: 3.76,
            wave_speed: SPEED_OF_LIGHT,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        for (name, [lo, hi]) in [
            ("direct", self.direct_distance_range),
            ("cross", self.cross_distance_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::invalid(format!(
                    "{name} distance range must satisfy 0 < low <= high, got [{lo}, {hi}]"
                )));
            }
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent > 0.0) {
            return Err(Error::invalid("path-loss exponent must be > 0"));
        }
        if !(self.wave_speed.is_finite() && self.wave_speed > 0.0) {
            return Err(Error::invalid("wave speed must be > 0"));
        }
        Ok(())
    }

    /// Amplitude `(1 m / d)^γ` of a path of length `d`.
    pub fn amplitude_at(&self, distance: f64) -> f64 {
        distance.recip().powf(self.path_loss_exponent)
    }
}

/// A realization of the K-pair line-of-sight network.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    k: usize,
    /// Row-major K×K: entry `i * k + t` is the path from transmitter `t` to receiver `i`.
    links: Vec<LosLink>,
    distances: Vec<f64>,
    pub noise_variance: f64,
}

impl Scenario {
    /// Builds a scenario from row-major K×K link and distance grids.
    pub fn new(k: usize, links: Vec<LosLink>, distances: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if k == 0 || links.len() != k * k || distances.len() != k * k {
            return Err(Error::invalid(format!("scenario needs {} links and distances", k * k)));
        }
        if let Some(l) = links.iter().find(|l| !(l.delay > 0.0 && l.amplitude > 0.0)) {
            return Err(Error::invalid(format!("scenario links need positive delay and amplitude, got {l:?}")));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::invalid(format!("noise variance must be > 0, got {noise_variance}")));
        }
        Ok(Scenario {
            k,
            links,
            distances,
            noise_variance,
        })
    }

    /// Builds a scenario from delays alone, with unit amplitudes.
    ///
    /// `delays[i][t]` is the delay from transmitter `t` to receiver `i`.
    pub fn from_delays(delays: &[Vec<f64>]) -> Result<Self> {
        let k = delays.len();
        let mut links = Vec::with_capacity(k * k);
        for row in delays {
            if row.len() != k {
                return Err(Error::invalid("delay grid must be square"));
            }
            for &d in row {
                links.push(LosLink::new(d, 1.0)?);
            }
        }
        let distances = links.iter().map(|l| l.delay * SPEED_OF_LIGHT).collect();
        Scenario::new(k, links, distances, 1.0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Path from transmitter `tx` to receiver `rx` (0-based).
    pub fn link(&self, rx: usize, tx: usize) -> &LosLink {
        &self.links[rx * self.k + tx]
    }

    pub fn link_mut(&mut self, rx: usize, tx: usize) -> &mut LosLink {
        &mut self.links[rx * self.k + tx]
    }

    pub fn delay(&self, rx: usize, tx: usize) -> f64 {
        self.link(rx, tx).delay
    }

    pub fn distance(&self, rx: usize, tx: usize) -> f64 {
        self.distances[rx * self.k + tx]
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn to_json(&self) -> String {
        let wire = ScenarioWire {
            k: self.k,
            noise_variance: self.noise_variance,
            links: (0..self.k)
                .flat_map(|rx| (0..self.k).map(move |tx| (rx, tx)))
                .map(|(rx, tx)| LinkWire {
                    rx: rx + 1,
                    tx: tx + 1,
                    distance_m: self.distance(rx, tx),
                    delay_s: self.delay(rx, tx),
                    amplitude: self.link(rx, tx).amplitude,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: ScenarioWire = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("scenario JSON: {e}")))?;
        wire.into_scenario()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let wire: ScenarioWire = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        wire.into_scenario()
    }
}

#[derive(Serialize, Deserialize)]
struct LinkWire {
    rx: usize,
    tx: usize,
    distance_m: f64,
    delay_s: f64,
    amplitude: f64,
}

#[derive(Serialize, Deserialize)]
struct ScenarioWire {
    k: usize,
    noise_variance: f64,
    links: Vec<LinkWire>,
}

impl ScenarioWire {
    fn into_scenario(self) -> Result<Scenario> {
        let k = self.k;
        if k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        let mut links: Vec<Option<(LosLink, f64)>> = vec![None; k * k];
        for l in &self.links {
            if !(1..=k).contains(&l.rx) || !(1..=k).contains(&l.tx) {
                return Err(Error::invalid(format!("link index ({}, {}) out of range 1..={k}", l.rx, l.tx)));
            }
            let slot = &mut links[(l.rx - 1) * k + (l.tx - 1)];
            if slot.is_some() {
                return Err(Error::invalid(format!("duplicate link ({}, {})", l.rx, l.tx)));
            }
            *slot = Some((LosLink::new(l.delay_s, l.amplitude)?, l.distance_m));
        }
        let mut out_links = Vec::with_capacity(k * k);
        let mut distances = Vec::with_capacity(k * k);
        for (idx, slot) in links.into_iter().enumerate() {
            let (link, d) = slot.ok_or_else(|| {
                Error::invalid(format!("missing link ({}, {})", idx / k + 1, idx % k + 1))
            })?;
            out_links.push(link);
            distances.push(d);
        }
        Scenario::new(k, out_links, distances, self.noise_variance)
    }
}

/// Two distinct subcarrier frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcarrierPair {
    f1: f64,
    f2: f64,
}

impl SubcarrierPair {
    pub fn new(f1: f64, f2: f64) -> Result<Self> {
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::invalid("subcarrier frequencies must be finite"));
        }
        if f1 == f2 {
            return Err(Error::invalid("subcarriers must be distinct (zero spacing)"));
        }
        Ok(SubcarrierPair { f1, f2 })
    }

    /// Pair `(base, base + spacing)`.
    pub fn with_spacing(base: f64, spacing: f64) -> Result<Self> {
        Self::new(base, base + spacing)
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn f2(&self) -> f64 {
        self.f2
    }

    pub fn spacing(&self) -> f64 {
        self.f2 - self.f1
    }
}

/// Frequency-domain channels of all K² links at two subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    k: usize,
    coefficients: Vec<[C64; 2]>,
}

impl ChannelSet {
    /// Builds a channel set from a row-major K×K grid of coefficient pairs.
    pub fn new(k: usize, coefficients: Vec<[C64; 2]>) -> Result<Self> {
        if k == 0 || coefficients.len() != k * k {
            return Err(Error::invalid(format!("channel set needs {} coefficient pairs", k * k)));
        }
        for (idx, pair) in coefficients.iter().enumerate() {
            for (l, h) in pair.iter().enumerate() {
                if !(h.re.is_finite() && h.im.is_finite()) || h.norm() == 0.0 {
                    return Err(Error::ZeroCoefficient {
                        rx: idx / k + 1,
                        tx: idx % k + 1,
                        subcarrier: l + 1,
                    });
                }
            }
        }
        Ok(ChannelSet { k, coefficients })
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> [C64; 2]) -> Result<Self> {
        let coefficients = (0..k * k).map(|idx| f(idx / k, idx % k)).collect();
        Self::new(k, coefficients)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(h⁽¹⁾, h⁽²⁾)` from transmitter `tx` to receiver `rx` (0-based).
    pub fn get(&self, rx: usize, tx: usize) -> [C64; 2] {
        self.coefficients[rx * self.k + tx]
    }

    /// Multiplies link `(rx, tx)` by per-subcarrier factors.
    pub fn scaled(&self, rx: usize, tx: usize, factors: [C64; 2]) -> Result<Self> {
        let mut coefficients = self.coefficients.clone();
        let h = &mut coefficients[rx * self.k + tx];
        h[0] *= factors[0];
        h[1] *= factors[1];
        Self::new(self.k, coefficients)
    }
}

/// `amplitude · exp(−j 2π f τ)`.
pub fn frequency_response(link: &LosLink, f: f64) -> C64 {
    // Reduce the phase to a fraction of a turn first; f·τ can be thousands of turns.
    let turns = (f * link.delay).rem_euclid(1.0);
    C64::from_polar(link.amplitude, -2.0 * PI * turns)
}

/// Channel coefficients of every link at both subcarriers.
pub fn channel_at(scn: &Scenario, sc: SubcarrierPair) -> ChannelSet {
    let coefficients = scn
        .links
        .iter()
        .map(|l| [frequency_response(l, sc.f1), frequency_response(l, sc.f2)])
        .collect();
    ChannelSet {
        k: scn.k,
        coefficients,
    }
}

/// Draws a scenario for trial `trial_index` of the run seeded by `seed`.
///
/// Distances are uniform on the configured ranges, drawn row-major
/// (receiver-major). The noise variance is left at 1.0 until calibrated.
pub fn sample_scenario(cfg: &ScenarioConfig, seed: u64, trial_index: u64) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = trial_rng(seed, trial_index);
    let k = cfg.k;
    let mut links = Vec::with_capacity(k * k);
    let mut distances = Vec::with_capacity(k * k);
    for rx in 0..k {
        for tx in 0..k {
            let [lo, hi] = if rx == tx {
                cfg.direct_distance_range
            } else {
                cfg.cross_distance_range
            };
            let d = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
            distances.push(d);
            links.push(LosLink {
                delay: d / cfg.wave_speed,
                amplitude: cfg.amplitude_at(d),
            });
        }
    }
    Scenario::new(k, links, distances, 1.0)
}

/// Mean direct-link power `E[(1 m/d)^{2γ}]` for `d` uniform on the direct range.
pub fn mean_direct_power(cfg: &ScenarioConfig) -> f64 {
    let [lo, hi] = cfg.direct_distance_range;
    let power = |d: f64| d.recip().powf(2.0 * cfg.path_loss_exponent);
    if lo == hi {
        return power(lo);
    }
    adaptive_simpson(&power, lo, hi, 1e-13) / (hi - lo)
}

/// Noise variance giving an average direct-link SNR of `snr_db`.
pub fn calibrate_noise(cfg: &ScenarioConfig, snr_db: f64) -> Result<f64> {
    cfg.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr_db must be finite"));
    }
    Ok(mean_direct_power(cfg) / 10f64.powf(snr_db / 10.0))
}

/// Adaptive Simpson quadrature with a relative tolerance.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}
