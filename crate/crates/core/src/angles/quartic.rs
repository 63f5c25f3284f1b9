//! Closed-form roots of complex polynomials up to degree four (Cardano and
//! Ferrari), with Newton polishing and a simultaneous-iteration fallback for
//! near-degenerate cases.

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Evaluates `Σ coeffs[k]·t^(deg−k)` (highest degree first).
pub fn eval_poly(coeffs: &[C], t: C) -> C {
    coeffs.iter().fold(ZERO, |acc, c| acc * t + c)
}

fn eval_poly_deriv(coeffs: &[C], t: C) -> (C, C) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in coeffs {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

pub fn coeff_norm(coeffs: &[C]) -> f64 {
    coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn cbrt(z: C) -> C {
    if z == ZERO {
        ZERO
    } else {
        C::from_polar(z.norm().cbrt(), z.arg() / 3.0)
    }
}

fn solve_linear(a: C, b: C) -> Vec<C> {
    vec![-b / a]
}

fn solve_quadratic(a: C, b: C, c: C) -> Vec<C> {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation.
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) / 2.0
    } else {
        -(b - disc) / 2.0
    };
    if q == ZERO {
        return vec![ZERO, ZERO];
    }
    vec![q / a, c / q]
}

fn solve_cubic(a: C, b: C, c: C, d: C) -> Vec<C> {
    let (b, c, d) = (b / a, c / a, d / a);
    // x = z − b/3 → z³ + p z + q = 0
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u1 = -q / 2.0 + disc;
    let u2 = -q / 2.0 - disc;
    let u = cbrt(if u1.norm() >= u2.norm() { u1 } else { u2 });
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    let mut rk = ONE;
    let mut roots = Vec::with_capacity(3);
    for _ in 0..3 {
        let uk = u * rk;
        let z = if uk == ZERO { ZERO } else { uk - p / (3.0 * uk) };
        roots.push(z + shift);
        rk *= omega;
    }
    roots
}

/// Ferrari's method for a monic-normalized quartic. Returns `None` when the
/// resolvent is too close to degenerate for the closed form to be trusted.
fn ferrari(c: &[C; 5]) -> Option<Vec<C>> {
    let a = c[0];
    let (b, cc, d, e) = (c[1] / a, c[2] / a, c[3] / a, c[4] / a);
    // t = y − b/4 → y⁴ + p y² + q y + r = 0
    let b2 = b * b;
    let p = cc - 3.0 * b2 / 8.0;
    let q = d - b * cc / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * cc / 16.0 - 3.0 * b2 * b2 / 256.0;
    let shift = -b / 4.0;
    let scale = [p.norm(), q.norm().sqrt(), r.norm().sqrt().sqrt()]
        .into_iter()
        .fold(1e-300, f64::max);

    let ys = if q.norm() <= 1e-14 * scale.powi(3) {
        // Biquadratic: y² = (−p ± √(p² − 4r))/2.
        solve_quadratic(ONE, p, r)
            .into_iter()
            .flat_map(|z| {
                let s = z.sqrt();
                [s, -s]
            })
            .collect::<Vec<_>>()
    } else {
        // Resolvent cubic 8m³ + 8p m² + (2p² − 8r) m − q² = 0; any m ≠ 0 works.
        let ms = solve_cubic(C::new(8.0, 0.0), 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q);
        let m = ms
            .into_iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        if m.norm() <= 1e-12 * scale * scale {
            return None;
        }
        let s = (2.0 * m).sqrt();
        let k = q / (2.0 * s);
        let mut ys = solve_quadratic(ONE, s, p / 2.0 + m - k);
        ys.extend(solve_quadratic(ONE, -s, p / 2.0 + m + k));
        ys
    };
    Some(ys.into_iter().map(|y| y + shift).collect())
}

fn newton_polish(coeffs: &[C], roots: &mut [C]) {
    for t in roots.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_poly_deriv(coeffs, *t);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = *t - step;
            if eval_poly(coeffs, next).norm() <= p.norm() {
                *t = next;
            } else {
                break;
            }
        }
    }
}

/// Durand–Kerner simultaneous iteration, seeded from `start`.
fn durand_kerner(coeffs: &[C], start: &[C]) -> Vec<C> {
    let a = coeffs[0];
    let monic: Vec<C> = coeffs.iter().map(|c| c / a).collect();
    let n = monic.len() - 1;
    let mut z: Vec<C> = if start.len() == n {
        start.to_vec()
    } else {
        let radius = 1.0 + monic[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        (0..n)
            .map(|k| C::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect()
    };
    // Separate coincident seeds.
    for i in 0..n {
        for j in 0..i {
            if (z[i] - z[j]).norm() < 1e-10 {
                z[i] += C::new(1e-6, 1e-6 * (i as f64 + 1.0));
            }
        }
    }
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let mut den = ONE;
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den == ZERO {
                continue;
            }
            let step = eval_poly(&monic, z[i]) / den;
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    z
}

/// All roots of `coeffs[0]·t^n + … + coeffs[n]` for `n ≤ 4` (highest degree
/// first). Vanishing leading coefficients reduce the degree.
pub fn solve_polynomial(coeffs: &[C]) -> Vec<C> {
    assert!(!coeffs.is_empty() && coeffs.len() <= 5, "degree must be at most 4");
    let norm = coeff_norm(coeffs);
    if norm == 0.0 {
        return Vec::new();
    }
    let lead = coeffs
        .iter()
        .position(|c| c.norm() > 1e-14 * norm)
        .unwrap_or(coeffs.len() - 1);
    let c = &coeffs[lead..];
    let mut roots = match c.len() {
        1 => Vec::new(),
        2 => solve_linear(c[0], c[1]),
        3 => solve_quadratic(c[0], c[1], c[2]),
        4 => solve_cubic(c[0], c[1], c[2], c[3]),
        5 => {
            let arr = [c[0], c[1], c[2], c[3], c[4]];
            match ferrari(&arr) {
                Some(r) => r,
                None => durand_kerner(c, &[]),
            }
        }
        _ => unreachable!(),
    };
    newton_polish(c, &mut roots);
    let tol = 1e-10 * coeff_norm(c) / c[0].norm().max(1e-300);
    let bad = roots
        .iter()
        .any(|t| eval_poly(c, *t).norm() / c[0].norm() > tol * (1.0 + t.norm()).powi(c.len() as i32 - 1));
    if bad && c.len() > 2 {
        roots = durand_kerner(c, &roots);
        newton_polish(c, &mut roots);
    }
    roots
}
