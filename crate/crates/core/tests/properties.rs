use std::f64::consts::{FRAC_PI_2, PI};

use gnp_vlc::angles::{
    bob_angle, grid_argmax, objective_eve, objective_eve_derivatives, objective_scale, polarizer_objective,
    quartic_coefficients, rx_objective_derivatives, solve_quartic, tx_angles_iterative, tx_angles_suboptimal,
};
use gnp_vlc::angles::quartic::{coeff_norm, eval_poly};
use gnp_vlc::channel::{
    effective_channel, pd_intensity, received_cp_amplitudes, EffectiveChannel, PathTerm, PolarizerConfig,
    ReceiverChannel, ReceiverLabel,
};
use gnp_vlc::geometry::ChannelPath;
use gnp_vlc::gnp::{extract_properties, plate_matrix, sample_path_response, GnpPathResponse, GnpPropertyRanges};
use gnp_vlc::metrics::{
    f_measure, secrecy, secrecy_rate, ser_count, sinr_direct, sinr_eve_f_form, EveDetection, SerSetup,
};
use gnp_vlc::polarization::{
    jones_from_stokes, linear_to_circular, linear_to_circular_matrix, mueller_from_jones, polarizer_circular,
    polarizer_jones, polarizer_mueller, stokes_from_jones, JonesMatrix, JonesVector, Basis, StokesVector,
};
use gnp_vlc::precoding::{compose_transmit, Constellation, PrecoderPair};
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn jones2() -> impl Strategy<Value = Matrix2<Complex64>> {
    proptest::array::uniform4(complex()).prop_map(|[a, b, d, e]| Matrix2::new(a, b, d, e))
}

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Random receiver channel: four transmitters, one to `max_paths` paths each.
fn random_channel(seed: u64, max_paths: usize, ranges: &GnpPropertyRanges) -> ReceiverChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_tx = (0..4)
        .map(|m| {
            let n = rng.random_range(1..=max_paths);
            (0..n)
                .map(|i| PathTerm {
                    path: ChannelPath {
                        transmitter: m,
                        path_index: i,
                        gain: if i == 0 { rng.random_range(1e-6..5e-6) } else { rng.random_range(1e-9..2e-7) },
                        delay_phase: rng.random_range(0.0..2.0 * PI),
                    },
                    response: sample_path_response(ranges, &mut rng),
                })
                .collect()
        })
        .collect();
    ReceiverChannel::new(ReceiverLabel::Eve(0), per_tx)
}

fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-3..10.0f64, n)
}

// ---- polarization ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn stokes_round_trip(s0 in 1e-3..10.0f64, az in angle(), el in -FRAC_PI_2..FRAC_PI_2) {
        let s = StokesVector::new(s0, s0 * el.cos() * az.cos(), s0 * el.cos() * az.sin(), s0 * el.sin());
        let back = stokes_from_jones(&jones_from_stokes(&s).unwrap());
        let scale = s0;
        for (a, b) in [(s.s0, back.s0), (s.s1, back.s1), (s.s2, back.s2), (s.s3, back.s3)] {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
        let j = jones_from_stokes(&s).unwrap();
        prop_assert!(j.first().im == 0.0 && j.first().re >= 0.0);
    }

    #[test]
    fn partially_polarized_is_rejected(s0 in 0.1..10.0f64, dop in 0.0..0.99f64, az in angle()) {
        let s = StokesVector::new(s0, s0 * dop * az.cos(), s0 * dop * az.sin(), 0.0);
        prop_assert!(jones_from_stokes(&s).is_err());
    }

    #[test]
    fn stokes_is_fully_polarized(ex in complex(), ey in complex()) {
        let s = stokes_from_jones(&JonesVector::linear(ex, ey));
        prop_assert!(s.s0 >= 0.0);
        let p2 = s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3;
        prop_assert!((p2 - s.s0 * s.s0).abs() <= 1e-12 * s.s0 * s.s0 + 1e-300);
    }

    #[test]
    fn basis_change_is_unitary(ex in complex(), ey in complex()) {
        let v = JonesVector::linear(ex, ey);
        let w = linear_to_circular(&v);
        prop_assert!((v.intensity() - w.intensity()).abs() <= 1e-12 * v.intensity().max(1.0));
        let back = w.to_linear();
        prop_assert!((back.first() - ex).norm() <= 1e-12 && (back.second() - ey).norm() <= 1e-12);
    }

    #[test]
    fn polarizers_are_idempotent(th in angle()) {
        let p = polarizer_jones(th).matrix;
        prop_assert!((p * p - p).iter().all(|z| z.norm() <= 1e-12));
        let m = polarizer_mueller(th).0;
        prop_assert!((m * m - m).iter().all(|z| z.abs() <= 1e-12));
        let pc = polarizer_circular(th).matrix;
        prop_assert!((pc * pc - pc).iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn circular_polarizer_is_conjugated_linear(th in angle()) {
        let t = linear_to_circular_matrix();
        let t_inv = t.try_inverse().unwrap();
        let expect = t * polarizer_jones(th).matrix * t_inv;
        let got = polarizer_circular(th).matrix;
        prop_assert!((expect - got).iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn closed_form_mueller_matches_jones(th in angle()) {
        let a = polarizer_mueller(th).0;
        let b = mueller_from_jones(&polarizer_jones(th)).0;
        prop_assert!((a - b).iter().all(|z| z.abs() <= 1e-12));
    }

    #[test]
    fn malus(th1 in angle(), th2 in angle(), ex in complex(), ey in complex()) {
        let v = JonesVector::linear(ex, ey);
        let after1 = polarizer_jones(th1).apply(&v);
        let after2 = polarizer_jones(th2).apply(&after1);
        let expect = (th2 - th1).cos().powi(2) * after1.intensity();
        prop_assert!((after2.intensity() - expect).abs() <= 1e-10 * v.intensity().max(1e-3));
    }

    #[test]
    fn mueller_and_jones_intensities_agree(m in jones2(), ex in complex(), ey in complex()) {
        let jm = JonesMatrix::new(m, Basis::Linear);
        let v = JonesVector::linear(ex, ey);
        let via_jones = jm.apply(&v).intensity();
        let s_out = mueller_from_jones(&jm).apply(&stokes_from_jones(&v));
        let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>() * v.intensity();
        prop_assert!((s_out.s0 - via_jones).abs() <= 1e-10 * scale.max(1e-6));
        // full Stokes agreement, not just intensity
        let s_direct = stokes_from_jones(&jm.apply(&v));
        prop_assert!((s_out.as_vector() - s_direct.as_vector()).amax() <= 1e-10 * scale.max(1e-6));
    }

    #[test]
    fn mueller_keeps_stokes_physical(m in jones2(), s0 in 0.1..5.0f64, dop in 0.0..1.0f64, az in angle(), el in -FRAC_PI_2..FRAC_PI_2) {
        let s = StokesVector::new(s0, s0 * dop * el.cos() * az.cos(), s0 * dop * el.cos() * az.sin(), s0 * dop * el.sin());
        let out = mueller_from_jones(&JonesMatrix::new(m, Basis::Linear)).apply(&s);
        let tol = 1e-9 * out.s0.abs().max(1e-9);
        prop_assert!(out.s0 >= -tol);
        prop_assert!(out.polarized_intensity() <= out.s0 + tol);
    }
}

// ---- gnp ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn extraction_inverts_plate(al in 1e-3..1.0f64, ar in 1e-3..1.0f64, dphi in -PI..PI) {
        let r = GnpPathResponse::new(al, ar, dphi).unwrap();
        let out = plate_matrix(&r).apply(&JonesVector::circular(c(1.0, 0.0), c(1.0, 0.0)));
        let back = extract_properties(out.first(), out.second()).unwrap();
        prop_assert!((back.a_bar_l - al).abs() <= 1e-12);
        prop_assert!((back.a_bar_r - ar).abs() <= 1e-12);
        prop_assert!(gnp_vlc::gnp::wrap_to_pi(back.delta_phi - dphi).abs() <= 1e-12);
    }

    #[test]
    fn plate_is_diagonal_and_passive(al in 0.0..=1.0f64, ar in 0.0..=1.0f64, dphi in -PI..PI) {
        let m = plate_matrix(&GnpPathResponse::new(al, ar, dphi).unwrap()).matrix;
        prop_assert_eq!(m[(0, 1)], c(0.0, 0.0));
        prop_assert_eq!(m[(1, 0)], c(0.0, 0.0));
        prop_assert!(m[(0, 0)].norm() <= 1.0 && m[(1, 1)].norm() <= 1.0);
    }

    #[test]
    fn sampled_responses_are_chiral(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ranges in [GnpPropertyRanges::bob(), GnpPropertyRanges::eve()] {
            for _ in 0..32 {
                let r = sample_path_response(&ranges, &mut rng);
                prop_assert!(r.is_chiral());
                prop_assert!(r.u() > 2.0);
                prop_assert!((1.0 - ranges.a_l[1]..=1.0 - ranges.a_l[0]).contains(&r.a_bar_l));
                prop_assert!((1.0 - ranges.a_r[1]..=1.0 - ranges.a_r[0]).contains(&r.a_bar_r));
                prop_assert!((ranges.delta_phi[0]..=ranges.delta_phi[1]).contains(&r.delta_phi));
            }
        }
    }
}

// ---- channel ----

fn tx_angles() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-FRAC_PI_2..FRAC_PI_2, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chain_matches_closed_form(seed in any::<u64>(), th in tx_angles(), thc in -FRAC_PI_2..FRAC_PI_2, x in positive_vec(4)) {
        let rc = random_channel(seed, 8, &GnpPropertyRanges::eve());
        let pc = PolarizerConfig::new(th, thc);
        let eta = 0.54;
        let y = pd_intensity(&received_cp_amplitudes(&rc, &pc, &x).unwrap(), eta, 0.0);
        let h = effective_channel(&rc, &pc).unwrap();
        let closed = eta / 8.0 * h.0.dot(&DVector::from_vec(x));
        prop_assert!(rel(y, closed) <= 1e-10, "{} vs {}", y, closed);
    }

    #[test]
    fn delay_phases_do_not_matter(seed in any::<u64>(), th in tx_angles(), thc in angle(), x in positive_vec(4), shift_seed in any::<u64>()) {
        let rc = random_channel(seed, 8, &GnpPropertyRanges::bob());
        let mut moved = rc.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(shift_seed);
        for t in moved.per_tx.iter_mut().flatten() {
            t.path.delay_phase = rng.random_range(0.0..2.0 * PI);
        }
        let pc = PolarizerConfig::new(th, thc);
        let a = pd_intensity(&received_cp_amplitudes(&rc, &pc, &x).unwrap(), 1.0, 0.0);
        let b = pd_intensity(&received_cp_amplitudes(&moved, &pc, &x).unwrap(), 1.0, 0.0);
        prop_assert!(rel(a, b) <= 1e-10);
    }

    #[test]
    fn effective_channel_is_nonnegative_and_shift_invariant(seed in any::<u64>(), th in tx_angles(), thc in angle(), delta in angle()) {
        let rc = random_channel(seed, 8, &GnpPropertyRanges::eve());
        let h = effective_channel(&rc, &PolarizerConfig::new(th.clone(), thc)).unwrap();
        prop_assert!(h.0.iter().all(|v| *v >= 0.0));
        let shifted: Vec<f64> = th.iter().map(|t| t + delta).collect();
        let h2 = effective_channel(&rc, &PolarizerConfig::new(shifted, thc + delta)).unwrap();
        prop_assert!((&h.0 - &h2.0).amax() <= 1e-12 * h.norm());
    }
}

// ---- precoding ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn precoder_identities(h in proptest::collection::vec(0.0..1e-5f64, 2..8).prop_filter("nonzero", |v| v.iter().any(|x| *x > 1e-9)), sa in proptest::collection::vec(-1.0..1.0f64, 8)) {
        let n = h.len();
        let h = EffectiveChannel::from_slice(&h);
        let p = PrecoderPair::for_channel(&h).unwrap();
        let hn = h.norm();
        prop_assert!((p.w.norm() - 1.0).abs() <= 1e-12);
        prop_assert!((h.0.dot(&p.w) - hn).abs() <= 1e-12 * hn);
        prop_assert!((&p.w_a - p.w_a.transpose()).amax() <= 1e-12);
        prop_assert!((&p.w_a * &p.w_a - &p.w_a).amax() <= 1e-12);
        prop_assert!((&p.w_a * &h.0).amax() <= 1e-12 * hn);
        prop_assert!((&p.w_a * &p.w).amax() <= 1e-12);
        prop_assert!((p.w_a.trace() - (n as f64 - 1.0)).abs() <= 1e-12 * n as f64);
        let s_a = DVector::from_column_slice(&sa[..n]);
        let leak = h.0.dot(&(&p.w_a * &s_a));
        prop_assert!(leak.abs() <= 1e-12 * hn * s_a.norm().max(1e-300));
    }

    #[test]
    fn default_bias_never_violated(h in positive_vec(4), si in 0usize..4, sa in proptest::array::uniform4(0usize..4)) {
        let c = Constellation::pam(4);
        let p = PrecoderPair::for_channel(&EffectiveChannel::from_slice(&h)).unwrap();
        let s_a = DVector::from_iterator(4, sa.iter().map(|k| c.symbol(*k)));
        let frame = compose_transmit(&p, c.symbol(si), &s_a, 3.0, 0.44, 0.01).unwrap();
        prop_assert!(frame.x.iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn pam4_has_unit_energy() {
    let c = Constellation::pam(4);
    let s5 = 5f64.sqrt();
    let want = [-3.0 / s5, -1.0 / s5, 1.0 / s5, 3.0 / s5];
    for (a, b) in c.symbols().iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((c.mean_energy() - 1.0).abs() < 1e-15);
}

// ---- angles ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iterative_angles_are_stationary_minima(seed in any::<u64>()) {
        let rc = random_channel(seed, 12, &GnpPropertyRanges::eve());
        let sol = tx_angles_iterative(&rc, 1e-10, 100).unwrap();
        let scale = objective_scale(&rc);
        for (m, (d1, d2)) in objective_eve_derivatives(&sol.angles, &rc).into_iter().enumerate() {
            let g: f64 = rc.per_tx[m].iter().map(|t| t.path.gain * (t.response.u() + 2.0)).sum();
            prop_assert!(d1.abs() <= 1e-6 * g, "m={} d1={} scale={}", m, d1, g);
            prop_assert!(d2 > 0.0);
            prop_assert!(sol.angles[m].abs() <= FRAC_PI_2);
        }
        prop_assert!(scale > 0.0);
        // never worse than the suboptimal angle
        let sub = tx_angles_suboptimal([0.6144, 0.8308], 4);
        prop_assert!(objective_eve(&sol.angles, &rc) <= objective_eve(&sub.angles, &rc) + 1e-12 * scale);
    }

    #[test]
    fn bob_angle_is_stationary_maximum(seed in any::<u64>(), th in tx_angles()) {
        let rc = random_channel(seed, 12, &GnpPropertyRanges::bob());
        let mid = GnpPropertyRanges::eve().delta_phi_mid();
        let sol = bob_angle(&rc, &th, mid);
        let (_, d1, d2) = rx_objective_derivatives(&rc, &th, sol.theta_b);
        let scale = objective_scale(&rc);
        prop_assert!(d1.abs() <= 1e-8 * scale);
        prop_assert!(d2 < 0.0);
        prop_assert!(sol.theta_b.abs() <= FRAC_PI_2);
        // never worse than a 1e-4 grid beyond its quadratic resolution bound
        let step = 1e-4;
        let (_, grid) = grid_argmax(|t| polarizer_objective(&rc, &th, t), step);
        let bound = 0.5 * d2.abs() * step * step;
        prop_assert!(sol.objective >= grid - bound - 1e-12 * scale);
    }

    #[test]
    fn quartic_roots_have_small_residuals(seed in any::<u64>(), th in tx_angles()) {
        let rc = random_channel(seed, 12, &GnpPropertyRanges::bob());
        let q = quartic_coefficients(&rc, &th, 0.7226);
        let coeffs = q.coefficients();
        let roots = solve_quartic(&q);
        prop_assert_eq!(roots.len(), 4);
        let norm = coeff_norm(&coeffs);
        for t in roots {
            let r = eval_poly(&coeffs, t).norm() / (norm * (1.0 + t.norm()).powi(4));
            prop_assert!(r <= 1e-8);
        }
    }

    #[test]
    fn coefficients_reproduce_the_derivative(seed in any::<u64>(), th in tx_angles(), tt in angle()) {
        let rc = random_channel(seed, 6, &GnpPropertyRanges::bob());
        let q = quartic_coefficients(&rc, &th, 0.7226);
        let theta_b = 0.5 * (tt + q.reference);
        let (_, d1, _) = rx_objective_derivatives(&rc, &th, theta_b);
        // d f / d θ̃ = −(A1 sc + A2 (s² − c²) + A3 s + A4 c) up to the factor 2 from θ̃ = 2θ_B − ref
        let lhs = q.stationarity(tt);
        prop_assert!((d1 + 2.0 * lhs).abs() <= 1e-10 * objective_scale(&rc));
    }

    #[test]
    fn eve_objective_tracks_channel_energy(seed in any::<u64>(), a in tx_angles(), b in tx_angles()) {
        // one path per transmitter: ‖h_E‖² = Σ g²ā_Lā_R·u² + 4·f_E with gains g²ā_Lā_R
        let rc = random_channel(seed, 1, &GnpPropertyRanges::eve());
        let mut weighted = rc.clone();
        for t in weighted.per_tx.iter_mut().flatten() {
            t.path.gain = t.path.gain * t.path.gain * t.response.a_bar_l * t.response.a_bar_r;
        }
        let konst: f64 = weighted.terms().map(|(_, t)| t.path.gain * t.response.u().powi(2)).sum();
        for th in [a, b] {
            let h = effective_channel(&rc, &PolarizerConfig::new(th.clone(), 0.0)).unwrap();
            let e = h.0.norm_squared();
            let f = objective_eve(&th, &weighted);
            prop_assert!((e - konst - 4.0 * f).abs() <= 1e-10 * e.max(konst));
        }
    }
}

// ---- metrics ----

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (positive_vec(4), positive_vec(4)).prop_map(|(a, b)| {
        (a.into_iter().map(|v| v * 1e-6).collect(), b.into_iter().map(|v| v * 1e-6).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sinr_forms_agree((hb, he) in pair(), p_dbm in 0.0..40.0f64) {
        let hb = EffectiveChannel::from_slice(&hb);
        let he = EffectiveChannel::from_slice(&he);
        let p = PrecoderPair::for_channel(&hb).unwrap();
        let rho = 0.54 * 0.44 * 1e-3 * 10f64.powf(p_dbm / 10.0) / 8.0;
        let sigma2 = 4.169e-17;
        let direct = sinr_direct(&he, &p, rho, sigma2);
        let f_form = sinr_eve_f_form(&p.w, &he, rho, sigma2);
        prop_assert!(rel(direct, f_form) <= 1e-9);
        let f = f_measure(&p.w, &he, rho, sigma2);
        prop_assert!((0.0..1.0).contains(&f));
        let bob = sinr_direct(&hb, &p, rho, sigma2);
        prop_assert!(rel(bob, rho * rho * hb.0.norm_squared() / sigma2) <= 1e-12);
    }

    #[test]
    fn more_eves_never_help(hb in positive_vec(4), eves in proptest::collection::vec(positive_vec(4), 1..6)) {
        let hb = EffectiveChannel::from_slice(&hb);
        let p = PrecoderPair::for_channel(&hb).unwrap();
        let hs: Vec<_> = eves.iter().map(|v| EffectiveChannel::from_slice(v)).collect();
        let mut last = f64::INFINITY;
        for k in 1..=hs.len() {
            let r = secrecy(&hb, &hs[..k], &p, 1e-4, 1e-9).unwrap();
            prop_assert!(r.r_secrecy <= last);
            prop_assert!(r.r_secrecy >= 0.0);
            last = r.r_secrecy;
        }
    }

    #[test]
    fn secrecy_rate_clamps(rb in 0.0..5.0f64, re in proptest::collection::vec(0.0..5.0f64, 1..5)) {
        let worst = re.iter().copied().fold(0.0, f64::max);
        prop_assert_eq!(secrecy_rate(rb, &re).unwrap(), (rb - worst).max(0.0));
    }
}

fn ser_setup(seed: u64, p_dbm: f64, eve_detection: EveDetection) -> SerSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ch = || EffectiveChannel::from_slice(&(0..4).map(|_| rng.random_range(1e-6..4e-6)).collect::<Vec<_>>());
    let h_bob = ch();
    let h_eve = ch();
    let p_tx = 1e-3 * 10f64.powf(p_dbm / 10.0);
    SerSetup {
        precoder: PrecoderPair::for_channel(&h_bob).unwrap(),
        h_bob,
        h_eve,
        constellation: Constellation::pam(4),
        rho: 0.54 * 0.44 * p_tx / 8.0,
        sigma2: 4.169e-17,
        i_dc: 3.0,
        zeta: 0.44,
        p_tx,
        eve_detection,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 12,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5e4_4a1f),
        ..ProptestConfig::default()
    })]

    #[test]
    fn ser_halves_agree(seed in any::<u64>(), p_dbm in 10.0..35.0f64, mismatched in any::<bool>()) {
        let det = if mismatched { EveDetection::Mismatched } else { EveDetection::Joint };
        let setup = ser_setup(seed, p_dbm, det);
        let n = 20_000u64;
        let a = ser_count(&setup, 0..n, seed).unwrap();
        let b = ser_count(&setup, n..2 * n, seed).unwrap();
        for (x, y) in [(a.0, b.0), (a.1, b.1)] {
            let p = (x + y) as f64 / (2 * n) as f64;
            let sd = (2.0 * p * (1.0 - p) / n as f64).sqrt();
            let diff = (x as f64 - y as f64).abs() / n as f64;
            // 24 comparisons per run plus shrinking: 4.5 sd keeps the family-wise
            // false alarm rate near 1e-4
            prop_assert!(diff <= 4.5 * sd + 1.0 / n as f64, "{} vs {}", x, y);
        }
        // any split of the trial range gives the same totals
        let whole = ser_count(&setup, 0..2 * n, seed).unwrap();
        prop_assert_eq!(whole, (a.0 + b.0, a.1 + b.1));
    }
}

#[test]
fn artificial_noise_hides_nothing_from_bob() {
    let setup = ser_setup(3, 40.0, EveDetection::Joint);
    let p = &setup.precoder;
    let c = &setup.constellation;
    let scale = setup.rho * setup.h_bob.norm();
    for si in 0..4 {
        for k in 0..256usize {
            let s_a = DVector::from_iterator(4, (0..4).map(|j| c.symbol((k >> (2 * j)) & 3)));
            let s = p.precode(c.symbol(si), &s_a);
            let y = setup.rho * setup.h_bob.0.dot(&s);
            assert!((y - scale * c.symbol(si)).abs() <= 1e-12 * scale * 4.0);
        }
    }
}

#[test]
fn projector_has_rank_n_minus_one() {
    let h = EffectiveChannel::from_slice(&[1.0, 2.0, 0.5, 3.0]);
    let p = PrecoderPair::for_channel(&h).unwrap();
    let eig = DMatrix::from(p.w_a.clone()).symmetric_eigenvalues();
    let ones = eig.iter().filter(|v| (*v - 1.0).abs() < 1e-12).count();
    let zeros = eig.iter().filter(|v| v.abs() < 1e-12).count();
    assert_eq!((ones, zeros), (3, 1));
}
