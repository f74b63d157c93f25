#![allow(dead_code)]

use std::f64::consts::PI;

use subcarrier_ia::los::spacing_analysis;
use subcarrier_ia::{calibrate_noise, channel_at, sample_scenario, ChannelSet, Scenario, ScenarioConfig, SubcarrierPair, C64};

pub const SNR_DB: f64 = 20.0;
pub const BASE_FREQ: f64 = 2.4e9;

/// Default-geometry scenario with noise calibrated at 20 dB.
pub fn los_scenario(seed: u64, trial: u64) -> Scenario {
    let cfg = ScenarioConfig::default();
    let noise = calibrate_noise(&cfg, SNR_DB).unwrap();
    sample_scenario(&cfg, seed, trial).unwrap().with_noise_variance(noise)
}

pub fn dfmin(scn: &Scenario) -> f64 {
    let sa = spacing_analysis(scn).unwrap();
    assert!(!sa.degenerate);
    sa.delta_f_min
}

/// Channels at spacing `x · Δf_min` above `base`.
pub fn channels_at(scn: &Scenario, base: f64, x: f64) -> ChannelSet {
    channel_at(scn, SubcarrierPair::with_spacing(base, x * dfmin(scn)).unwrap())
}

/// Small xorshift generator for test inputs that need no reproducible stream
/// semantics beyond a fixed seed.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn complex(&mut self) -> C64 {
        C64::from_polar(self.range(0.2, 2.0), self.range(-PI, PI))
    }
}

/// I.i.d. random channel coefficients with nonzero magnitudes.
pub fn random_channels(k: usize, rng: &mut Lcg) -> ChannelSet {
    ChannelSet::from_fn(k, |_, _| [rng.complex(), rng.complex()]).unwrap()
}

/// Brute-force minimum of the normalized interference leakage for K = 3
/// with every beamformer entry at magnitude 1/√2.
///
/// `v_1 = (1, 1)/√2` fixes the common phase, `v_2`, `v_3` phases are searched
/// on a grid that is then refined around the best cells, and each receive
/// filter phase is minimized in closed form. Returns the square root of the
/// total normalized leakage power `Σ |u_iᴴ H_ik v_k|² / |h_ik⁽¹⁾|²`.
pub fn brute_force_min_leakage(ch: &ChannelSet, grid: usize, levels: usize) -> f64 {
    assert_eq!(ch.k(), 3);
    let cost = |p2: f64, p3: f64| -> f64 {
        let phases = [0.0, p2, p3];
        let mut total = 0.0;
        for i in 0..3 {
            // u = (1, e^{jφ})/√2, v_k = (1, e^{jθ_k})/√2:
            // uᴴ H v = (h1 + e^{-jφ} h2 e^{jθ}) / 2
            let mut pp = 0.0;
            let mut cross = C64::new(0.0, 0.0);
            for k in (0..3).filter(|&k| k != i) {
                let h = ch.get(i, k);
                let scale = h[0].norm();
                let p = h[0] / scale;
                let q = h[1] * C64::from_polar(1.0, phases[k]) / scale;
                pp += p.norm_sqr() + q.norm_sqr();
                cross += p.conj() * q;
            }
            total += ((pp - 2.0 * cross.norm()) / 4.0).max(0.0);
        }
        total
    };

    let n = grid as f64;
    let step = 2.0 * PI / n;
    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(grid * grid);
    for a in 0..grid {
        for b in 0..grid {
            let (p2, p3) = (a as f64 * step, b as f64 * step);
            cells.push((cost(p2, p3), p2, p3));
        }
    }
    cells.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = cells[0].0;
    for &(c0, p2, p3) in cells.iter().take(8) {
        let (mut c, mut x2, mut x3, mut s) = (c0, p2, p3, step);
        for _ in 0..levels {
            let (mut bc, mut b2, mut b3) = (c, x2, x3);
            for a in -8..=8 {
                for b in -8..=8 {
                    let (t2, t3) = (x2 + a as f64 * s / 8.0, x3 + b as f64 * s / 8.0);
                    let v = cost(t2, t3);
                    if v < bc {
                        (bc, b2, b3) = (v, t2, t3);
                    }
                }
            }
            (c, x2, x3) = (bc, b2, b3);
            s /= 4.0;
        }
        best = best.min(c);
    }
    best.sqrt()
}
