//! Log-domain interference alignment over two subcarriers.
//!
//! With diagonal channels and one stream per pair, the zero-forcing condition
//! `u_iᴴ H_ik v_k = 0` holds iff
//!
//! ```text
//! ln(u_i⁽²⁾*/u_i⁽¹⁾*) + ln(v_k⁽²⁾/v_k⁽¹⁾) = jπ(1 + 2n_ik) − ln(h_ik⁽²⁾/h_ik⁽¹⁾)
//! ```
//!
//! for some integer `n_ik`. Stacking the K(K−1) cross links gives a linear
//! system `A x = b` with a 0/1 incidence matrix `A` of rank 2K−1. Alignment is
//! feasible iff every left-null combination of `A` also annihilates `b`,
//! modulo the 2π freedom the branch integers grant.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::baselines::{RateReport, SchemeTag};
use crate::channel::ChannelSet;
use crate::linalg::{integer_echelon, pseudo_inverse, Echelon, Matrix};
use crate::{Error, Result, C64};

/// Default log-amplitude tolerance for analytic constructions.
pub const DEFAULT_TOL_AMP: f64 = 1e-9;
/// Default phase tolerance (radians) for analytic constructions.
pub const DEFAULT_TOL_PHASE: f64 = 1e-9;

const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x - TWO_PI * ((x + PI) / TWO_PI).floor();
    // `w` is in [−π, π); move the lower end over.
    if w <= -PI {
        w + TWO_PI
    } else {
        w
    }
}

/// Distance from `x` to the nearest multiple of 2π, in `[0, π]`.
pub fn distance_to_2pi_multiple(x: f64) -> f64 {
    wrap_angle(x).abs()
}

/// The channel-independent part of the alignment system for a given K.
///
/// Holds the incidence matrix, its echelon form and its pseudo-inverse, so
/// repeated solves for the same K only pay for the right-hand side.
#[derive(Debug)]
pub struct AlignmentStructure {
    k: usize,
    a: Vec<Vec<i64>>,
    row_map: Vec<(usize, usize)>,
    echelon: Echelon,
    pinv: Matrix,
}

impl AlignmentStructure {
    pub fn new(k: usize) -> Result<Arc<Self>> {
        if k < 3 {
            return Err(Error::UnsupportedK(k));
        }
        let row_map: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (0..k).filter(move |&t| t != i).map(move |t| (i, t)))
            .collect();
        let a: Vec<Vec<i64>> = row_map
            .iter()
            .map(|&(i, t)| {
                let mut row = vec![0; 2 * k];
                row[i] = 1;
                row[k + t] = 1;
                row
            })
            .collect();
        let echelon = integer_echelon(&a);
        let dense = Matrix::from_fn(a.len(), 2 * k, |r, c| a[r][c] as f64);
        let pinv = pseudo_inverse(&dense);
        Ok(Arc::new(AlignmentStructure {
            k,
            a,
            row_map,
            echelon,
            pinv,
        }))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The K(K−1)×2K incidence matrix. Columns `0..K` are the receive-filter
    /// unknowns, columns `K..2K` the precoder unknowns.
    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.a
    }

    /// Cross link `(rx, tx)` behind each row, 0-based, lexicographic.
    pub fn row_map(&self) -> &[(usize, usize)] {
        &self.row_map
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    /// Number of consistency conditions, i.e. zero rows of the echelon form.
    pub fn residual_rows(&self) -> usize {
        self.echelon.null_combinations.len()
    }

    pub fn pseudo_inverse(&self) -> &Matrix {
        &self.pinv
    }
}

/// The alignment system `A x = b` for one channel realization.
#[derive(Debug, Clone)]
pub struct AlignmentSystem {
    structure: Arc<AlignmentStructure>,
    b: Vec<C64>,
}

impl AlignmentSystem {
    /// Builds the right-hand side for `ch` on an existing structure.
    pub fn with_structure(structure: Arc<AlignmentStructure>, ch: &ChannelSet) -> Result<Self> {
        if ch.k() != structure.k {
            return Err(Error::invalid(format!(
                "channel set has K = {}, structure has K = {}",
                ch.k(),
                structure.k
            )));
        }
        let b = structure
            .row_map
            .iter()
            .map(|&(i, t)| {
                let [h1, h2] = ch.get(i, t);
                // principal branch n_ik = 0
                let log_ratio = (h2.norm() / h1.norm()).ln();
                let phase_ratio = (h2 * h1.conj()).arg();
                C64::new(-log_ratio, wrap_angle(PI - phase_ratio))
            })
            .collect();
        Ok(AlignmentSystem { structure, b })
    }

    /// Builds a system from an explicit right-hand side.
    pub fn from_rhs(structure: Arc<AlignmentStructure>, b: Vec<C64>) -> Result<Self> {
        if b.len() != structure.row_map.len() {
            return Err(Error::invalid("right-hand side length does not match the system"));
        }
        Ok(AlignmentSystem { structure, b })
    }

    pub fn structure(&self) -> &Arc<AlignmentStructure> {
        &self.structure
    }

    pub fn k(&self) -> usize {
        self.structure.k
    }

    pub fn rhs(&self) -> &[C64] {
        &self.b
    }

    /// `(real, imaginary)` parts of `α·b` and the parity target `π·Σα` for
    /// every null combination.
    fn cycle_sums(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        self.structure.echelon.null_combinations.iter().map(|nc| {
            let sum: C64 = nc
                .weights
                .iter()
                .zip(&self.b)
                .filter(|(w, _)| **w != 0)
                .map(|(w, b)| b * *w as f64)
                .sum();
            let parity = PI * nc.weights.iter().sum::<i64>() as f64;
            (sum, parity)
        })
    }
}

/// Builds the alignment system of a channel set (K ≥ 3).
pub fn build_system(ch: &ChannelSet) -> Result<AlignmentSystem> {
    let structure = AlignmentStructure::new(ch.k())?;
    AlignmentSystem::with_structure(structure, ch)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub amplitude_residuals: Vec<f64>,
    /// Angular distance to the admissible phase set, in `[0, π]`.
    pub phase_residuals: Vec<f64>,
    pub feasible: bool,
    /// `(tol_amp, tol_phase)`
    pub tolerance_used: (f64, f64),
}

/// Checks the consistency conditions of the system.
///
/// Each zero row of the echelon form contributes one condition: the same row
/// combination applied to `b` must vanish in its real part and land on
/// `π·Σα + 2πm` in its imaginary part.
pub fn feasibility(sys: &AlignmentSystem, tol_amp: f64, tol_phase: f64) -> FeasibilityReport {
    let (amplitude_residuals, phase_residuals): (Vec<f64>, Vec<f64>) = sys
        .cycle_sums()
        .map(|(s, parity)| (s.re.abs(), distance_to_2pi_multiple(s.im - parity)))
        .unzip();
    let feasible = amplitude_residuals.iter().all(|r| *r <= tol_amp)
        && phase_residuals.iter().all(|r| *r <= tol_phase);
    FeasibilityReport {
        amplitude_residuals,
        phase_residuals,
        feasible,
        tolerance_used: (tol_amp, tol_phase),
    }
}

/// Three-user feasibility residuals split into amplitude and phase parts.
///
/// Evaluates the six-factor ratio product `Π (h⁽²⁾/h⁽¹⁾)^{±1}` over the cross
/// links with signs `+12 −13 +23 −21 +31 −32`; alignment is feasible iff it
/// equals one. Returns `(|ln|product||, distance of arg(product) to 2πℤ)`.
pub fn theorem1_residual(ch: &ChannelSet) -> Result<(f64, f64)> {
    if ch.k() != 3 {
        return Err(Error::Theorem1IsThreeUser(ch.k()));
    }
    const TERMS: [(usize, usize, f64); 6] = [
        (0, 1, 1.0),
        (0, 2, -1.0),
        (1, 2, 1.0),
        (1, 0, -1.0),
        (2, 0, 1.0),
        (2, 1, -1.0),
    ];
    let (mut amp, mut phase) = (0.0, 0.0);
    for (i, t, sign) in TERMS {
        let [h1, h2] = ch.get(i, t);
        amp += sign * (h2.norm() / h1.norm()).ln();
        phase += sign * (h2 * h1.conj()).arg();
    }
    Ok((amp.abs(), distance_to_2pi_multiple(phase)))
}

/// Unit-norm precoders `v_k` and receive filters `u_i`, one per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub u: Vec<[C64; 2]>,
    pub v: Vec<[C64; 2]>,
}

fn unit_pair(z: C64) -> [C64; 2] {
    let n = 1f64.hypot(z.norm());
    [C64::new(1.0 / n, 0.0), z / n]
}

/// Minimum-norm least-squares beamformers.
///
/// Before the pseudo-inverse is applied, the imaginary part of `b` is moved
/// to the branch that puts every cycle sum closest to its admissible value,
/// which is what the free branch integers `n_ik` allow. A consistent system
/// then solves exactly and an inconsistent one in the least-squares sense.
pub fn solve_beamformers(sys: &AlignmentSystem) -> BeamformerSet {
    let st = &sys.structure;
    let k = st.k;
    let mut im: Vec<f64> = sys.b.iter().map(|b| b.im).collect();
    for (nc, (s, parity)) in st.echelon.null_combinations.iter().zip(sys.cycle_sums()) {
        let m = ((s.im - parity) / TWO_PI).round();
        // own_row carries weight +1 and appears in no other combination
        im[nc.own_row] -= TWO_PI * m;
    }
    let re: Vec<f64> = sys.b.iter().map(|b| b.re).collect();
    let x_re = st.pinv.mul_vec(&re);
    let x_im = st.pinv.mul_vec(&im);
    let x = |c: usize| C64::new(x_re[c], x_im[c]).exp();
    BeamformerSet {
        u: (0..k).map(|i| unit_pair(x(i).conj())).collect(),
        v: (0..k).map(|t| unit_pair(x(k + t))).collect(),
    }
}

/// `uᴴ diag(h) v` for two-subcarrier vectors.
pub fn filtered_gain(u: &[C64; 2], h: &[C64; 2], v: &[C64; 2]) -> C64 {
    u[0].conj() * h[0] * v[0] + u[1].conj() * h[1] * v[1]
}

fn check_shapes(ch: &ChannelSet, bf: &BeamformerSet) {
    assert!(
        bf.u.len() == ch.k() && bf.v.len() == ch.k(),
        "beamformer set does not match K = {}",
        ch.k()
    );
}

/// Residual interference power at every receiver, unit symbol power.
pub fn leakage(ch: &ChannelSet, bf: &BeamformerSet) -> Vec<f64> {
    check_shapes(ch, bf);
    (0..ch.k())
        .map(|i| {
            (0..ch.k())
                .filter(|&t| t != i)
                .map(|t| filtered_gain(&bf.u[i], &ch.get(i, t), &bf.v[t]).norm_sqr())
                .sum()
        })
        .collect()
}

/// Largest `|u_iᴴ H_ik v_k| / |h_ik⁽¹⁾|` over the cross links.
pub fn max_normalized_leakage(ch: &ChannelSet, bf: &BeamformerSet) -> f64 {
    check_shapes(ch, bf);
    let k = ch.k();
    (0..k)
        .flat_map(|i| (0..k).filter(move |&t| t != i).map(move |t| (i, t)))
        .map(|(i, t)| {
            let h = ch.get(i, t);
            filtered_gain(&bf.u[i], &h, &bf.v[t]).norm() / h[0].norm()
        })
        .fold(0.0, f64::max)
}

/// End-to-end gains `h̄_i = u_iᴴ H_ii v_i`.
pub fn effective_channels(ch: &ChannelSet, bf: &BeamformerSet) -> Vec<C64> {
    check_shapes(ch, bf);
    (0..ch.k())
        .map(|i| filtered_gain(&bf.u[i], &ch.get(i, i), &bf.v[i]))
        .collect()
}

/// IA zero-forcing rates with residual leakage treated as noise.
pub fn ia_sum_rate(effective: &[C64], leak: &[f64], noise_variance: f64) -> RateReport {
    assert_eq!(effective.len(), leak.len(), "effective/leakage length mismatch");
    let per_pair = effective
        .iter()
        .zip(leak)
        .map(|(h, l)| (1.0 + h.norm_sqr() / (noise_variance + l)).log2())
        .collect();
    RateReport::new(SchemeTag::IaZf, per_pair)
}

/// Solve, evaluate leakage and return the IA-ZF rate report in one go.
pub fn ia_zf_rate(structure: &Arc<AlignmentStructure>, ch: &ChannelSet, noise_variance: f64) -> Result<RateReport> {
    let sys = AlignmentSystem::with_structure(Arc::clone(structure), ch)?;
    let bf = solve_beamformers(&sys);
    Ok(ia_sum_rate(&effective_channels(ch, &bf), &leakage(ch, &bf), noise_variance))
}

#[derive(Serialize)]
struct ComplexWire {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ResidualsWire<'a> {
    amplitude: &'a [f64],
    phase: &'a [f64],
}

#[derive(Serialize)]
struct BeamformerWire<'a> {
    u: Vec<[ComplexWire; 2]>,
    v: Vec<[ComplexWire; 2]>,
    max_leakage: f64,
    feasible: bool,
    residuals: ResidualsWire<'a>,
}

/// JSON document describing solved beamformers.
///
/// `max_leakage` is the largest normalized cross-link gain, see
/// [`max_normalized_leakage`].
pub fn beamformer_json(ch: &ChannelSet, bf: &BeamformerSet, report: &FeasibilityReport) -> String {
    let wire = |set: &[[C64; 2]]| {
        set.iter()
            .map(|p| p.map(|c| ComplexWire { re: c.re, im: c.im }))
            .collect()
    };
    let doc = BeamformerWire {
        u: wire(&bf.u),
        v: wire(&bf.v),
        max_leakage: max_normalized_leakage(ch, bf),
        feasible: report.feasible,
        residuals: ResidualsWire {
            amplitude: &report.amplitude_residuals,
            phase: &report.phase_residuals,
        },
    };
    serde_json::to_string_pretty(&doc).expect("beamformer report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
        assert!((distance_to_2pi_multiple(TWO_PI - 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn k_below_three_rejected() {
        assert!(matches!(AlignmentStructure::new(2), Err(Error::UnsupportedK(2))));
        let ch = ChannelSet::from_fn(2, |_, _| [c(1.0, 0.0); 2]).unwrap();
        assert!(matches!(build_system(&ch), Err(Error::UnsupportedK(2))));
    }

    #[test]
    fn three_user_incidence_pattern() {
        let st = AlignmentStructure::new(3).unwrap();
        assert_eq!(st.row_map(), &[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
        let want = vec![
            vec![1, 0, 0, 0, 1, 0],
            vec![1, 0, 0, 0, 0, 1],
            vec![0, 1, 0, 1, 0, 0],
            vec![0, 1, 0, 0, 0, 1],
            vec![0, 0, 1, 1, 0, 0],
            vec![0, 0, 1, 0, 1, 0],
        ];
        assert_eq!(st.matrix(), want.as_slice());
        assert_eq!(st.rank(), 5);
        assert_eq!(st.residual_rows(), 1);
    }

    #[test]
    fn four_user_shape_and_rank() {
        let st = AlignmentStructure::new(4).unwrap();
        assert_eq!(st.matrix().len(), 12);
        assert_eq!(st.matrix()[0].len(), 8);
        assert_eq!(st.rank(), 7);
        assert_eq!(st.residual_rows(), 5);
    }

    #[test]
    fn null_weights_are_signed_unit() {
        for k in 3..=6 {
            let st = AlignmentStructure::new(k).unwrap();
            for nc in &st.echelon().null_combinations {
                assert!(nc.weights.iter().all(|w| (-1..=1).contains(w)));
                assert_eq!(nc.weights.iter().sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn identical_cross_channels_give_identical_rhs() {
        let h = [c(0.3, -0.2), c(-0.1, 0.5)];
        let ch = ChannelSet::from_fn(3, |i, t| if i == t { [c(1.0, 0.0); 2] } else { h }).unwrap();
        let sys = build_system(&ch).unwrap();
        assert!(sys.rhs().iter().all(|b| (b - sys.rhs()[0]).norm() < 1e-15));
        let rep = feasibility(&sys, 1e-12, 1e-12);
        assert!(rep.feasible);
        assert!(rep.amplitude_residuals[0] < 1e-15 && rep.phase_residuals[0] < 1e-15);
    }

    #[test]
    fn three_user_residual_rejects_k4() {
        let ch = ChannelSet::from_fn(4, |_, _| [c(1.0, 0.0); 2]).unwrap();
        assert!(matches!(theorem1_residual(&ch), Err(Error::Theorem1IsThreeUser(4))));
    }

    #[test]
    fn three_user_single_perturbation() {
        let base = ChannelSet::from_fn(3, |_, _| [c(1.0, 0.0); 2]).unwrap();
        let (a, p) = theorem1_residual(&base).unwrap();
        assert_eq!((a, p), (0.0, 0.0));
        let ch = base.scaled(1, 0, [c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let (a, p) = theorem1_residual(&ch).unwrap();
        assert!((a - 2f64.ln()).abs() < 1e-15);
        assert!(p < 1e-15);
    }

    #[test]
    fn three_user_full_turn_branch() {
        // Unit amplitude ratios, phases summing to 2π over the signed terms.
        let rot = |theta: f64| [c(1.0, 0.0), C64::from_polar(1.0, theta)];
        let ch = ChannelSet::from_fn(3, |i, t| match (i, t) {
            (0, 1) | (1, 2) | (2, 0) => rot(2.0 * PI / 3.0),
            _ => [c(1.0, 0.0); 2],
        })
        .unwrap();
        let (a, p) = theorem1_residual(&ch).unwrap();
        assert!(a < 1e-15 && p < 1e-12, "{a} {p}");
    }

    #[test]
    fn ratio_one_channels_solve_exactly() {
        let ch = ChannelSet::from_fn(3, |i, t| {
            let a = 1.0 + 0.1 * (i * 3 + t) as f64;
            [c(a, 0.2), c(a, 0.2)]
        })
        .unwrap();
        let sys = build_system(&ch).unwrap();
        assert!(sys.rhs().iter().all(|b| b.re.abs() < 1e-15 && (b.im - PI).abs() < 1e-15));
        let bf = solve_beamformers(&sys);
        for i in 0..3 {
            for t in 0..3 {
                if i != t {
                    // ln(u ratio) + ln(v ratio) = jπ
                    let r = (bf.u[i][1].conj() / bf.u[i][0].conj()) * (bf.v[t][1] / bf.v[t][0]);
                    assert!((r + 1.0).norm() < 1e-12);
                }
            }
        }
        assert!(max_normalized_leakage(&ch, &bf) < 1e-12);
    }

    #[test]
    fn effective_channel_examples() {
        let h = c(0.4, -0.7);
        let ch = ChannelSet::from_fn(3, |_, _| [h, h]).unwrap();
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let bf = BeamformerSet { u: vec![e1; 3], v: vec![e1; 3] };
        assert!(effective_channels(&ch, &bf).iter().all(|g| (g - h).norm() < 1e-15));
        // single-subcarrier selection: leakage = Σ_{k≠i} |h⁽¹⁾|²
        assert!(leakage(&ch, &bf).iter().all(|l| (l - 2.0 * h.norm_sqr()).abs() < 1e-15));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let eq = [c(s, 0.0), c(s, 0.0)];
        let bf = BeamformerSet { u: vec![eq; 3], v: vec![eq; 3] };
        assert!(effective_channels(&ch, &bf).iter().all(|g| (g - h).norm() < 1e-15));
    }

    #[test]
    fn ia_rate_examples() {
        let r = ia_sum_rate(&[c(1.0, 0.0); 3], &[0.0; 3], 1.0);
        assert!((r.sum - 3.0).abs() < 1e-15);
        let r = ia_sum_rate(&[c(0.0, 0.0)], &[0.3], 1.0);
        assert_eq!(r.sum, 0.0);
        let r = ia_sum_rate(&[c(0.0, 2f64.sqrt())], &[1.5], 0.5);
        assert!((r.sum - 1.0).abs() < 1e-15);
        assert_eq!(r.scheme, SchemeTag::IaZf);
    }

    #[test]
    fn beamformer_json_shape() {
        let ch = ChannelSet::from_fn(3, |_, _| [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let sys = build_system(&ch).unwrap();
        let bf = solve_beamformers(&sys);
        let rep = feasibility(&sys, 1e-9, 1e-9);
        let v: serde_json::Value = serde_json::from_str(&beamformer_json(&ch, &bf, &rep)).unwrap();
        assert_eq!(v["u"].as_array().unwrap().len(), 3);
        assert!(v["v"][2][1]["im"].is_f64());
        assert_eq!(v["feasible"], true);
        assert_eq!(v["residuals"]["phase"].as_array().unwrap().len(), 1);
        assert!(v["max_leakage"].as_f64().unwrap() < 1e-12);
    }
}
