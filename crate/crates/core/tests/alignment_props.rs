mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use subcarrier_ia::alignment::{filtered_gain, max_normalized_leakage, AlignmentSystem};
use subcarrier_ia::{
    build_system, effective_channels, feasibility, leakage, solve_beamformers, theorem1_residual, AlignmentStructure,
    BeamformerSet, ChannelSet, C64,
};

use common::{channels_at, los_scenario, random_channels, Lcg, BASE_FREQ};

#[test]
fn rank_identity() {
    for k in 3..=8 {
        let st = AlignmentStructure::new(k).unwrap();
        assert_eq!(st.matrix().len(), k * (k - 1));
        assert_eq!(st.rank(), 2 * k - 1, "K={k}");
        assert_eq!(st.residual_rows(), k * k - 3 * k + 1, "K={k}");
        for nc in &st.echelon().null_combinations {
            assert_eq!(nc.weights.iter().sum::<i64>(), 0);
            assert!(nc.weights.iter().all(|w| (-1..=1).contains(w)));
        }
    }
}

#[test]
fn iid_channels_are_infeasible() {
    let mut rng = Lcg::new(99);
    for k in [3, 4] {
        for _ in 0..100 {
            let sys = build_system(&random_channels(k, &mut rng)).unwrap();
            assert!(!feasibility(&sys, 1e-6, 1e-6).feasible);
        }
    }
}

#[test]
fn three_user_residual_agrees_with_feasibility_row() {
    let mut rng = Lcg::new(3);
    for _ in 0..200 {
        let ch = random_channels(3, &mut rng);
        let rep = feasibility(&build_system(&ch).unwrap(), 1e-9, 1e-9);
        let (amp, phase) = theorem1_residual(&ch).unwrap();
        assert!((rep.amplitude_residuals[0] - amp).abs() < 1e-12);
        assert!((rep.phase_residuals[0] - phase).abs() < 1e-12);
    }
}

#[test]
fn feasible_los_solves_to_zero_forcing() {
    for t in 0..100 {
        let scn = los_scenario(17, t);
        for n in [1.0, 2.0, -3.0] {
            let ch = channels_at(&scn, BASE_FREQ, n);
            let sys = build_system(&ch).unwrap();
            assert!(feasibility(&sys, 1e-9, 1e-9).feasible);
            let bf = solve_beamformers(&sys);
            assert!(max_normalized_leakage(&ch, &bf) <= 1e-8);
            for z in bf.u.iter().chain(&bf.v).flatten() {
                assert!((z.norm() - 0.5f64.sqrt()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn solved_direct_gains_are_nonzero() {
    let mut hits = 0;
    for t in 0..100 {
        let scn = los_scenario(23, t);
        let ch = channels_at(&scn, BASE_FREQ, 1.0);
        let bf = solve_beamformers(&build_system(&ch).unwrap());
        if effective_channels(&ch, &bf).iter().all(|h| h.norm() > 0.0) {
            hits += 1;
        }
    }
    assert_eq!(hits, 100);
}

fn random_beamformers(k: usize, rng: &mut Lcg) -> BeamformerSet {
    let mut unit = || {
        let (a, b) = (rng.complex(), rng.complex());
        let n = a.norm().hypot(b.norm());
        [a / n, b / n]
    };
    BeamformerSet {
        u: (0..k).map(|_| unit()).collect(),
        v: (0..k).map(|_| unit()).collect(),
    }
}

#[test]
fn leakage_matches_quadratic_form_expansion() {
    let mut rng = Lcg::new(8);
    for k in [3, 4, 5] {
        for _ in 0..20 {
            let ch = random_channels(k, &mut rng);
            let bf = random_beamformers(k, &mut rng);
            let got = leakage(&ch, &bf);
            for (i, got_i) in got.iter().enumerate() {
                let mut expect = 0.0;
                for t in (0..k).filter(|&t| t != i) {
                    let h = ch.get(i, t);
                    // |Σ_l u_l* h_l v_l|² expanded over (l, m)
                    for l in 0..2 {
                        for m in 0..2 {
                            let term = bf.u[i][l].conj() * h[l] * bf.v[t][l] * (bf.u[i][m].conj() * h[m] * bf.v[t][m]).conj();
                            expect += term.re;
                        }
                    }
                }
                assert!((got_i - expect).abs() <= 1e-12 * expect.max(1.0));
            }
        }
    }
}

#[test]
fn zero_forcing_leakage_is_negligible_in_power() {
    let scn = los_scenario(4, 0);
    let ch = channels_at(&scn, BASE_FREQ, 1.0);
    let bf = solve_beamformers(&build_system(&ch).unwrap());
    let norm = ChannelSet::from_fn(3, |i, t| {
        let h = ch.get(i, t);
        [h[0] / h[0].norm(), h[1] / h[0].norm()]
    })
    .unwrap();
    assert!(leakage(&norm, &bf).iter().all(|l| *l <= 1e-18));
}

#[test]
fn identical_cross_channels_give_antipodal_split() {
    let h = C64::from_polar(0.4, 0.9);
    let ch = ChannelSet::from_fn(3, |i, t| if i == t { [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] } else { [h, h] }).unwrap();
    let sys = build_system(&ch).unwrap();
    assert!(feasibility(&sys, 1e-12, 1e-12).feasible);
    let bf = solve_beamformers(&sys);
    for i in 0..3 {
        for t in (0..3).filter(|&t| t != i) {
            let g = filtered_gain(&bf.u[i], &ch.get(i, t), &bf.v[t]);
            assert!(g.norm() < 1e-12);
            // ratio product u2*/u1* · v2/v1 = -1
            let r = (bf.u[i][1].conj() / bf.u[i][0].conj()) * (bf.v[t][1] / bf.v[t][0]);
            assert!((r + 1.0).norm() < 1e-12);
        }
    }
}

fn shifted(sys: &AlignmentSystem, row: usize, turns: f64) -> AlignmentSystem {
    let mut b = sys.rhs().to_vec();
    b[row].im += 2.0 * PI * turns;
    AlignmentSystem::from_rhs(sys.structure().clone(), b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branch_shift_changes_nothing(seed in 0u64..10_000, row in 0usize..6, turns in -2i32..=2, feasible in any::<bool>()) {
        let ch = if feasible {
            channels_at(&los_scenario(seed, 0), BASE_FREQ, 1.0)
        } else {
            random_channels(3, &mut Lcg::new(seed))
        };
        let sys = build_system(&ch).unwrap();
        let alt = shifted(&sys, row, turns as f64);
        let (a, b) = (feasibility(&sys, 1e-9, 1e-9), feasibility(&alt, 1e-9, 1e-9));
        prop_assert_eq!(a.feasible, b.feasible);
        for (x, y) in a.phase_residuals.iter().zip(&b.phase_residuals) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let la = max_normalized_leakage(&ch, &solve_beamformers(&sys));
        let lb = max_normalized_leakage(&ch, &solve_beamformers(&alt));
        prop_assert!((la - lb).abs() < 1e-9);
    }

    #[test]
    fn cross_scaling_is_equivariant(seed in 0u64..10_000, rx in 0usize..3, off in 1usize..3, mag in 0.01f64..100.0, arg in -PI..PI) {
        let ch = random_channels(3, &mut Lcg::new(seed));
        let tx = (rx + off) % 3;
        let s = C64::from_polar(mag, arg);
        let scaled = ch.scaled(rx, tx, [s, s]).unwrap();
        let (a, b) = (theorem1_residual(&ch).unwrap(), theorem1_residual(&scaled).unwrap());
        prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        let la = max_normalized_leakage(&ch, &solve_beamformers(&build_system(&ch).unwrap()));
        let lb = max_normalized_leakage(&scaled, &solve_beamformers(&build_system(&scaled).unwrap()));
        prop_assert!((la - lb).abs() < 1e-12);
    }
}
