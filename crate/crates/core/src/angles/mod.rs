//! Polarizer-angle optimization.
//!
//! Transmit angles minimize the eavesdropper objective `f_E` (assuming the
//! eavesdropper's polarizer sits at 0); the receive angle then maximizes the
//! legitimate objective `f_B` through the roots of a quartic in
//! `t = e^{jθ̃}`. Both objectives are sums over paths of `g·c·(c + u)` with
//! `c = cos(2θ_C − 2θ_m − Δφ)`.

pub mod quartic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::channel::ReceiverChannel;
use crate::error::{Error, Result};
pub use quartic::{eval_poly, solve_polynomial};

/// Default fixed-point tolerance, rad.
pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Grid step of the fallback search for the receive angle, rad.
const FALLBACK_GRID_STEP: f64 = 1e-5;

/// Wraps an angle into `(−π/2, π/2]` by multiples of π (polarizers are π-periodic).
pub fn wrap_half_pi(theta: f64) -> f64 {
    FRAC_PI_2 - (FRAC_PI_2 - theta).rem_euclid(PI)
}

/// Smallest distance between two polarizer angles modulo π.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_half_pi(a - b).abs()
}

/// `(f, ∂f/∂θ_C, ∂²f/∂θ_C²)` for `f = Σ g·c·(c+u)` as a function of the
/// receive angle.
pub fn rx_objective_derivatives(rc: &ReceiverChannel, tx_angles: &[f64], theta_c: f64) -> (f64, f64, f64) {
    let mut f = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (m, t) in rc.terms() {
        let g = t.path.gain;
        let u = t.response.u();
        let a = 2.0 * theta_c - 2.0 * tx_angles[m] - t.response.delta_phi;
        let (s, c) = a.sin_cos();
        f += g * c * (c + u);
        d1 += -2.0 * g * s * (2.0 * c + u);
        d2 += g * (-4.0 * c * (2.0 * c + u) + 8.0 * s * s);
    }
    (f, d1, d2)
}

/// `Σ g·c·(c+u)` with `c = cos(2θ_C − 2θ_m − Δφ)`.
pub fn polarizer_objective(rc: &ReceiverChannel, tx_angles: &[f64], theta_c: f64) -> f64 {
    rx_objective_derivatives(rc, tx_angles, theta_c).0
}

/// Eavesdropper objective `f_E(θ)` with the eavesdropper's polarizer at 0.
pub fn objective_eve(thetas: &[f64], rc_eve: &ReceiverChannel) -> f64 {
    polarizer_objective(rc_eve, thetas, 0.0)
}

/// Per-transmitter `(∂f_E/∂θ_m, ∂²f_E/∂θ_m²)`; `f_E` is separable across `m`.
pub fn objective_eve_derivatives(thetas: &[f64], rc_eve: &ReceiverChannel) -> Vec<(f64, f64)> {
    rc_eve
        .per_tx
        .iter()
        .zip(thetas)
        .map(|(terms, &theta)| {
            terms.iter().fold((0.0, 0.0), |(d1, d2), t| {
                let g = t.path.gain;
                let u = t.response.u();
                let (s, c) = (2.0 * theta + t.response.delta_phi).sin_cos();
                (
                    d1 - 2.0 * g * s * (2.0 * c + u),
                    d2 + g * (-4.0 * c * (2.0 * c + u) + 8.0 * s * s),
                )
            })
        })
        .collect()
}

/// Natural scale of the objective derivatives, `Σ g·(u + 2)`.
pub fn objective_scale(rc: &ReceiverChannel) -> f64 {
    rc.terms().map(|(_, t)| t.path.gain * (t.response.u() + 2.0)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TxAngleMethod {
    Suboptimal,
    Iterative,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxAngleSolution {
    /// Angle per transmitter, rad, in `[−π/2, π/2]`.
    pub angles: Vec<f64>,
    /// Branch index per transmitter in `θ = kπ/2 − (·)/2`.
    pub k: Vec<i32>,
    pub method: TxAngleMethod,
    pub iterations: usize,
}

impl TxAngleSolution {
    pub fn fixed(angles: Vec<f64>) -> Self {
        let k = vec![0; angles.len()];
        Self {
            angles,
            k,
            method: TxAngleMethod::Fixed,
            iterations: 0,
        }
    }

    /// Mean absolute angle difference to `other`, modulo π.
    pub fn mean_abs_difference(&self, other: &TxAngleSolution) -> f64 {
        let n = self.angles.len().max(1) as f64;
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| angle_distance(*a, *b))
            .sum::<f64>()
            / n
    }
}

/// `θ* = π/2 − (Δφ_L + Δφ_U)/4`, replicated across all transmitters.
pub fn tx_angles_suboptimal(delta_phi_bounds: [f64; 2], n_tx: usize) -> TxAngleSolution {
    let mid = 0.5 * (delta_phi_bounds[0] + delta_phi_bounds[1]);
    let raw = FRAC_PI_2 - mid / 2.0;
    let theta = wrap_half_pi(raw);
    let k = 1 - 2 * ((raw - theta) / PI).round() as i32;
    TxAngleSolution {
        angles: vec![theta; n_tx],
        k: vec![k; n_tx],
        method: TxAngleMethod::Suboptimal,
        iterations: 0,
    }
}

/// One application of the fixed-point map for transmitter `m`:
/// `θ ← π/2 − ½·∠Σ_n g̃_n(θ)·e^{jΔφ_n}` with `g̃ = g·(2cos(2θ+Δφ) + u)`.
/// Returns the wrapped angle and its branch index, or `None` if the sum vanishes.
pub fn fixed_point_map(terms: &[crate::channel::PathTerm], theta: f64) -> Option<(f64, i32)> {
    let sum = terms.iter().fold(Complex64::new(0.0, 0.0), |acc, t| {
        let dphi = t.response.delta_phi;
        let g_tilde = t.path.gain * (2.0 * (2.0 * theta + dphi).cos() + t.response.u());
        acc + Complex64::from_polar(g_tilde, dphi)
    });
    if sum.norm() == 0.0 {
        return None;
    }
    let raw = FRAC_PI_2 - 0.5 * sum.arg();
    let next = wrap_half_pi(raw);
    Some((next, 1 - 2 * ((raw - next) / PI).round() as i32))
}

/// Largest Aitken extrapolation accepted, rad; longer jumps fall back to the plain step.
const MAX_AITKEN_JUMP: f64 = 0.25;

/// Stationary point of `f_E` per transmitter via the fixed-point map
/// [`fixed_point_map`], with Aitken (Steffensen) extrapolation. The plain map
/// converges only linearly, with a rate close to 1 when `u` is close to 2.
/// Stops once a plain map step moves every angle by less than `eps`.
pub fn tx_angles_iterative(rc_eve: &ReceiverChannel, eps: f64, max_iter: usize) -> Result<TxAngleSolution> {
    assert!(eps > 0.0, "eps must be positive");
    let n_tx = rc_eve.n_tx();
    let mut theta = vec![FRAC_PI_2; n_tx];
    let mut k = vec![1; n_tx];
    let mut done = vec![false; n_tx];
    let mut last_step = f64::INFINITY;
    for iter in 1..=max_iter {
        last_step = 0.0;
        for (m, terms) in rc_eve.per_tx.iter().enumerate() {
            if done[m] {
                continue;
            }
            let Some((t1, k1)) = fixed_point_map(terms, theta[m]) else {
                done[m] = true;
                continue;
            };
            let d1 = wrap_half_pi(t1 - theta[m]);
            if d1.abs() < eps {
                theta[m] = t1;
                k[m] = k1;
                done[m] = true;
                last_step = last_step.max(d1.abs());
                continue;
            }
            let Some((t2, k2)) = fixed_point_map(terms, t1) else {
                theta[m] = t1;
                k[m] = k1;
                continue;
            };
            let d2 = wrap_half_pi(t2 - t1);
            let denom = d2 - d1;
            let jump = if denom != 0.0 { -d2 * d2 / denom } else { 0.0 };
            if jump.is_finite() && jump.abs() <= MAX_AITKEN_JUMP {
                let raw = t2 + jump;
                theta[m] = wrap_half_pi(raw);
                k[m] = k2 - 2 * ((raw - theta[m]) / PI).round() as i32;
            } else {
                theta[m] = t2;
                k[m] = k2;
            }
            last_step = last_step.max(d1.abs());
        }
        if done.iter().all(|d| *d) {
            return Ok(TxAngleSolution {
                angles: theta,
                k,
                method: TxAngleMethod::Iterative,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_step,
        last: theta,
    })
}

/// Coefficients of the receive-angle stationarity condition
/// `A1·sin·cos + A2·(sin² − cos²) + A3·sin + A4·cos = 0` in `θ̃ = 2θ_B − reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticProblem {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// `θ̃ = 2θ_B − reference`; `reference = π − E{Δφ}` for the standard transmit angle.
    pub reference: f64,
}

impl QuarticProblem {
    /// Builds the coefficients from `(g, ψ, u)` triples, where each path
    /// contributes `g·c·(c+u)` with `c = cos(θ̃ − ψ)`.
    pub fn from_terms(terms: impl IntoIterator<Item = (f64, f64, f64)>, reference: f64) -> Self {
        let (mut a1, mut a2, mut a3, mut a4) = (0.0, 0.0, 0.0, 0.0);
        for (g, psi, u) in terms {
            let (s, c) = psi.sin_cos();
            a1 += g * (2.0 * c * c - 2.0 * s * s);
            a2 += 2.0 * g * s * c;
            a3 += g * c * u;
            a4 -= g * s * u;
        }
        Self {
            a1,
            a2,
            a3,
            a4,
            reference,
        }
    }

    /// Polynomial coefficients in `t`, highest degree first; the `t²` term is zero.
    pub fn coefficients(&self) -> [Complex64; 5] {
        let j = Complex64::new(0.0, 1.0);
        let (a1, a2, a3, a4) = (self.a1, self.a2, self.a3, self.a4);
        [
            -j * a1 - 2.0 * a2,
            -2.0 * j * a3 + 2.0 * a4,
            Complex64::new(0.0, 0.0),
            2.0 * j * a3 + 2.0 * a4,
            j * a1 - 2.0 * a2,
        ]
    }

    /// Left-hand side of the trigonometric stationarity condition at `θ̃`.
    pub fn stationarity(&self, theta_tilde: f64) -> f64 {
        let (s, c) = theta_tilde.sin_cos();
        self.a1 * s * c + self.a2 * (s * s - c * c) + self.a3 * s + self.a4 * c
    }

    pub fn theta_b(&self, theta_tilde: f64) -> f64 {
        wrap_half_pi(0.5 * (theta_tilde + self.reference))
    }

    pub fn theta_tilde(&self, theta_b: f64) -> f64 {
        2.0 * theta_b - self.reference
    }
}

/// Quartic coefficients for the receive angle given the transmit angles.
///
/// With `reference = π − Δφ_mid`, each path's offset is
/// `ψ = Δφ_B + 2θ_m − reference`, which reduces to `Δφ_B` when every
/// transmitter sits at `π/2 − Δφ_mid/2`.
pub fn quartic_coefficients(rc_bob: &ReceiverChannel, tx_angles: &[f64], delta_phi_mid: f64) -> QuarticProblem {
    let reference = PI - delta_phi_mid;
    QuarticProblem::from_terms(
        rc_bob.terms().map(|(m, t)| {
            (
                t.path.gain,
                t.response.delta_phi + 2.0 * tx_angles[m] - reference,
                t.response.u(),
            )
        }),
        reference,
    )
}

pub fn solve_quartic(q: &QuarticProblem) -> Vec<Complex64> {
    solve_polynomial(&q.coefficients())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobAngleSolution {
    /// Receive polarizer angle in `[−π/2, π/2]`.
    pub theta_b: f64,
    pub theta_tilde: f64,
    /// Selected unit-circle root, absent when the grid fallback was used.
    pub t_star: Option<Complex64>,
    /// `f_B(θ_B)`.
    pub objective: f64,
    pub used_grid_fallback: bool,
}

/// Unit-circle tolerance for accepting a quartic root as a real angle.
const UNIT_CIRCLE_TOL: f64 = 1e-6;

/// Receive angle maximizing `f_B` via the closed-form quartic roots.
///
/// Among roots on the unit circle, the one with `f″_B < 0` and the largest
/// `f_B` wins. A short Newton polish on the trigonometric derivative removes
/// residual rounding. Without an admissible root a fine grid search is used
/// and flagged.
pub fn bob_angle(rc_bob: &ReceiverChannel, tx_angles: &[f64], delta_phi_mid: f64) -> BobAngleSolution {
    let q = quartic_coefficients(rc_bob, tx_angles, delta_phi_mid);
    let scale = objective_scale(rc_bob).max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, f64, Complex64)> = None;
    for t in solve_quartic(&q) {
        if (t.norm() - 1.0).abs() > UNIT_CIRCLE_TOL {
            continue;
        }
        let mut theta_b = q.theta_b(t.arg());
        for _ in 0..3 {
            let (_, d1, d2) = rx_objective_derivatives(rc_bob, tx_angles, theta_b);
            if d2 >= 0.0 || d1.abs() <= 1e-14 * scale {
                break;
            }
            theta_b = wrap_half_pi(theta_b - d1 / d2);
        }
        let (f, _, d2) = rx_objective_derivatives(rc_bob, tx_angles, theta_b);
        if d2 >= 0.0 {
            continue;
        }
        if best.is_none_or(|(fb, _, _)| f > fb) {
            best = Some((f, theta_b, t));
        }
    }
    match best {
        Some((objective, theta_b, t)) => BobAngleSolution {
            theta_b,
            theta_tilde: q.theta_tilde(theta_b),
            t_star: Some(t),
            objective,
            used_grid_fallback: false,
        },
        None => {
            let (theta_b, objective) = grid_argmax(|th| polarizer_objective(rc_bob, tx_angles, th), FALLBACK_GRID_STEP);
            BobAngleSolution {
                theta_b,
                theta_tilde: q.theta_tilde(theta_b),
                t_star: None,
                objective,
                used_grid_fallback: true,
            }
        }
    }
}

/// Exhaustive maximization over `[−π/2, π/2]` with the given step.
pub fn grid_argmax(f: impl Fn(f64) -> f64, step: f64) -> (f64, f64) {
    let n = (PI / step).ceil() as usize;
    let mut best = (-FRAC_PI_2, f64::NEG_INFINITY);
    for i in 0..=n {
        let th = (-FRAC_PI_2 + i as f64 * step).min(FRAC_PI_2);
        let v = f(th);
        if v > best.1 {
            best = (th, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{PathTerm, ReceiverLabel};
    use crate::geometry::ChannelPath;
    use crate::gnp::GnpPathResponse;
    use std::f64::consts::FRAC_PI_4;

    fn channel(paths: &[Vec<(f64, GnpPathResponse)>]) -> ReceiverChannel {
        ReceiverChannel::new(
            ReceiverLabel::Eve(0),
            paths
                .iter()
                .enumerate()
                .map(|(m, v)| {
                    v.iter()
                        .enumerate()
                        .map(|(n, (g, r))| PathTerm {
                            path: ChannelPath {
                                transmitter: m,
                                path_index: n,
                                gain: *g,
                                delay_phase: 0.0,
                            },
                            response: *r,
                        })
                        .collect()
                })
                .collect(),
        )
    }

    fn resp(al: f64, ar: f64, d: f64) -> GnpPathResponse {
        GnpPathResponse::new(al, ar, d).unwrap()
    }

    #[test]
    fn wrapping() {
        assert!((wrap_half_pi(PI) - 0.0).abs() < 1e-15);
        assert!((wrap_half_pi(1.8) - (1.8 - PI)).abs() < 1e-15);
        assert!((wrap_half_pi(-1.8) - (PI - 1.8)).abs() < 1e-15);
        assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&wrap_half_pi(FRAC_PI_2)));
        assert!(angle_distance(1.5, -1.6) < 0.05);
    }

    #[test]
    fn suboptimal_examples() {
        let s = tx_angles_suboptimal([0.6144, 0.8308], 4);
        let want = FRAC_PI_2 - 0.3613;
        assert!((s.angles[0] - want).abs() < 1e-12);
        assert!((s.angles[0] - 1.2095).abs() < 1e-4);
        assert_eq!(s.angles.len(), 4);
        assert_eq!(s.k, vec![1; 4]);
        let z = tx_angles_suboptimal([0.0, 0.0], 2);
        assert!((z.angles[0] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn eve_objective_at_crossed_angle() {
        let r = resp(0.8, 0.5, 0.0);
        let rc = channel(&[vec![(2.0, r)]]);
        let f = objective_eve(&[FRAC_PI_2], &rc);
        assert!((f - 2.0 * (1.0 - r.u())).abs() < 1e-12);
        assert!(f < 0.0);
    }

    #[test]
    fn iterative_los_only_is_immediate() {
        let rc = channel(&[vec![(1.0, resp(0.7, 0.4, 0.7))], vec![(0.3, resp(0.9, 0.6, 0.65))]]);
        let sol = tx_angles_iterative(&rc, 1e-12, 10).unwrap();
        assert!(sol.iterations <= 2);
        assert!((sol.angles[0] - (FRAC_PI_2 - 0.35)).abs() < 1e-14);
        assert!((sol.angles[1] - (FRAC_PI_2 - 0.325)).abs() < 1e-14);
        for (d1, d2) in objective_eve_derivatives(&sol.angles, &rc) {
            assert!(d1.abs() < 1e-12 && d2 > 0.0);
        }
    }

    #[test]
    fn iterative_reports_non_convergence() {
        let rc = channel(&[vec![(1.0, resp(0.7, 0.4, 0.7)), (0.9, resp(0.6, 0.3, -2.0))]]);
        match tx_angles_iterative(&rc, 1e-300, 1) {
            Err(Error::NoConvergence { last, iterations, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(last.len(), 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn quartic_coefficient_examples() {
        let rc = channel(&[vec![(1.0, resp(0.9, 0.7, 0.0)), (0.5, resp(0.8, 0.5, 0.0))]]);
        let mid = 0.7;
        let tx = [FRAC_PI_2 - mid / 2.0];
        let q = quartic_coefficients(&rc, &tx, mid);
        assert!(q.a2.abs() < 1e-15 && q.a4.abs() < 1e-15);
        assert!((q.a1 - 2.0 * 1.5).abs() < 1e-14);
        let u_sum = resp(0.9, 0.7, 0.0).u() + 0.5 * resp(0.8, 0.5, 0.0).u();
        assert!((q.a3 - u_sum).abs() < 1e-14);

        let q = QuarticProblem::from_terms([(1.0, FRAC_PI_4, 2.5)], 0.0);
        let r2 = std::f64::consts::SQRT_2;
        assert!(q.a1.abs() < 1e-15);
        assert!((q.a2 - 1.0).abs() < 1e-15);
        assert!((q.a3 - 2.5 / r2).abs() < 1e-15);
        assert!((q.a4 + 2.5 / r2).abs() < 1e-15);
    }

    #[test]
    fn bob_angle_single_path_aligns_cosine() {
        let r = resp(0.895, 0.745, 0.72);
        let rc = channel(&[vec![(1.0, r)]]);
        let mid = 0.7226;
        let tx = [FRAC_PI_2 - mid / 2.0];
        let sol = bob_angle(&rc, &tx, mid);
        assert!(!sol.used_grid_fallback);
        let want = (r.a_bar_l.sqrt() + r.a_bar_r.sqrt()).powi(2);
        let omega = 2.0 * sol.theta_b - 2.0 * tx[0] - r.delta_phi;
        assert!((omega.cos() - 1.0).abs() < 1e-12);
        let h = crate::channel::path_effective_gain(&rc.per_tx[0][0], tx[0], sol.theta_b);
        assert!((h - want).abs() < 1e-12);
        assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&sol.theta_b));
    }

    #[test]
    fn grid_argmax_finds_peak() {
        let (x, v) = grid_argmax(|t| -(t - 0.3).powi(2), 1e-4);
        assert!((x - 0.3).abs() < 1e-4 && v <= 0.0);
    }
}
