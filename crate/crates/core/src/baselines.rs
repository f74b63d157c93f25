//! Reference schemes: TDMA and treating interference as noise.
//!
//! All rates are in bits per OFDM block (one use of both subcarriers). Every
//! transmitter has unit power per block; two-stream schemes split it evenly
//! over the subcarriers.

use serde::Serialize;

use crate::channel::ChannelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SchemeTag {
    #[serde(rename = "IA-ZF")]
    IaZf,
    #[serde(rename = "TDMA")]
    Tdma,
    #[serde(rename = "IntAsNoise")]
    IntAsNoise,
    #[serde(rename = "IA-UpperBound")]
    IaUpperBound,
}

/// Per-pair and total rates of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub scheme: SchemeTag,
    pub per_pair: Vec<f64>,
    pub sum: f64,
}

impl RateReport {
    pub fn new(scheme: SchemeTag, per_pair: Vec<f64>) -> Self {
        debug_assert!(per_pair.iter().all(|r| *r >= 0.0));
        let sum = per_pair.iter().sum();
        RateReport {
            scheme,
            per_pair,
            sum,
        }
    }
}

/// Each pair owns `1/K` of the slots with `K`-fold power and sends one
/// stream per subcarrier without interference.
pub fn tdma_sum_rate(ch: &ChannelSet, noise_variance: f64) -> RateReport {
    let k = ch.k() as f64;
    let per_pair = (0..ch.k())
        .map(|i| {
            ch.get(i, i)
                .iter()
                .map(|h| (1.0 + 0.5 * k * h.norm_sqr() / noise_variance).log2())
                .sum::<f64>()
                / k
        })
        .collect();
    RateReport::new(SchemeTag::Tdma, per_pair)
}

/// Every transmitter sends one stream per subcarrier at half power; each
/// receiver decodes its streams treating the other pairs as noise.
pub fn interference_as_noise_sum_rate(ch: &ChannelSet, noise_variance: f64) -> RateReport {
    let per_pair = (0..ch.k())
        .map(|i| {
            (0..2)
                .map(|l| {
                    let signal = 0.5 * ch.get(i, i)[l].norm_sqr();
                    let interference: f64 = (0..ch.k())
                        .filter(|&t| t != i)
                        .map(|t| 0.5 * ch.get(i, t)[l].norm_sqr())
                        .sum();
                    (1.0 + signal / (noise_variance + interference)).log2()
                })
                .sum()
        })
        .collect();
    RateReport::new(SchemeTag::IntAsNoise, per_pair)
}
