//! Rate schemes behind one trait, registered by name.
//!
//! The sweep and the `rate` subcommand look schemes up here, so adding a
//! transmission strategy means implementing [`RateScheme`] and registering it.

use std::fmt;
use std::sync::Arc;

use crate::alignment::{ia_zf_rate, AlignmentStructure};
use crate::baselines::{interference_as_noise_sum_rate, tdma_sum_rate, RateReport, SchemeTag};
use crate::channel::ChannelSet;
use crate::{Error, Result};

/// A transmission strategy evaluated on one channel realization.
pub trait RateScheme: Send + Sync {
    /// Registry key, also the CSV column name.
    fn name(&self) -> &'static str;

    fn tag(&self) -> SchemeTag;

    fn evaluate(&self, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport>;
}

/// Zero-forcing interference alignment via the minimum-norm solution.
pub struct IaZf {
    structure: Arc<AlignmentStructure>,
}

impl IaZf {
    pub fn new(k: usize) -> Result<Self> {
        Ok(IaZf {
            structure: AlignmentStructure::new(k)?,
        })
    }
}

impl RateScheme for IaZf {
    fn name(&self) -> &'static str {
        "ia_zf"
    }

    fn tag(&self) -> SchemeTag {
        SchemeTag::IaZf
    }

    fn evaluate(&self, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport> {
        ia_zf_rate(&self.structure, ch, noise_variance)
    }
}

/// IA with every effective amplitude at `|h_ii|`.
pub struct IaUpperBound;

impl RateScheme for IaUpperBound {
    fn name(&self) -> &'static str {
        "ia_upper_bound"
    }

    fn tag(&self) -> SchemeTag {
        SchemeTag::IaUpperBound
    }

    fn evaluate(&self, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport> {
        let per_pair = (0..ch.k())
            .map(|i| (1.0 + ch.get(i, i)[0].norm_sqr() / noise_variance).log2())
            .collect();
        Ok(RateReport::new(SchemeTag::IaUpperBound, per_pair))
    }
}

pub struct Tdma;

impl RateScheme for Tdma {
    fn name(&self) -> &'static str {
        "tdma"
    }

    fn tag(&self) -> SchemeTag {
        SchemeTag::Tdma
    }

    fn evaluate(&self, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport> {
        Ok(tdma_sum_rate(ch, noise_variance))
    }
}

pub struct InterferenceAsNoise;

impl RateScheme for InterferenceAsNoise {
    fn name(&self) -> &'static str {
        "int_as_noise"
    }

    fn tag(&self) -> SchemeTag {
        SchemeTag::IntAsNoise
    }

    fn evaluate(&self, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport> {
        Ok(interference_as_noise_sum_rate(ch, noise_variance))
    }
}

/// Ordered set of named schemes.
#[derive(Default)]
pub struct SchemeRegistry {
    schemes: Vec<Box<dyn RateScheme>>,
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// All built-in schemes for `k` user pairs.
    pub fn with_builtin(k: usize) -> Result<Self> {
        let mut reg = Self::new();
        reg.register(Box::new(IaZf::new(k)?))?;
        reg.register(Box::new(IaUpperBound))?;
        reg.register(Box::new(Tdma))?;
        reg.register(Box::new(InterferenceAsNoise))?;
        Ok(reg)
    }

    pub fn register(&mut self, scheme: Box<dyn RateScheme>) -> Result<()> {
        if self.get(scheme.name()).is_some() {
            return Err(Error::invalid(format!("scheme '{}' already registered", scheme.name())));
        }
        self.schemes.push(scheme);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn RateScheme> {
        self.schemes.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }

    /// Looks up `name`, listing the registered names on failure.
    pub fn require(&self, name: &str) -> Result<&dyn RateScheme> {
        self.get(name).ok_or_else(|| {
            Error::invalid(format!("unknown scheme '{name}', expected one of: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.schemes.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn RateScheme> {
        self.schemes.iter().map(|s| s.as_ref())
    }
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn builtin_names() {
        let reg = SchemeRegistry::with_builtin(3).unwrap();
        assert_eq!(reg.names(), vec!["ia_zf", "ia_upper_bound", "tdma", "int_as_noise"]);
        assert_eq!(reg.require("tdma").unwrap().tag(), SchemeTag::Tdma);
        assert!(reg.require("maxsinr").is_err());
    }

    #[test]
    fn duplicate_rejected() {
        let mut reg = SchemeRegistry::new();
        reg.register(Box::new(Tdma)).unwrap();
        assert!(reg.register(Box::new(Tdma)).is_err());
    }

    #[test]
    fn ia_not_above_upper_bound() {
        let reg = SchemeRegistry::with_builtin(3).unwrap();
        let ch = ChannelSet::from_fn(3, |i, t| {
            let a = if i == t { 1.0 } else { 0.3 };
            [C64::from_polar(a, 0.1 * (i + 2 * t) as f64), C64::from_polar(a, 0.7 * (2 * i + t) as f64)]
        })
        .unwrap();
        let ia = reg.require("ia_zf").unwrap().evaluate(&ch, 0.01).unwrap();
        let ub = reg.require("ia_upper_bound").unwrap().evaluate(&ch, 0.01).unwrap();
        assert!(ia.sum <= ub.sum);
    }
}
