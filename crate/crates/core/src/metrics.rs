//! SINR, achievable and secrecy rates, ML detection and Monte Carlo SER.

use nalgebra::DVector;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::EffectiveChannel;
use crate::error::{Error, Result};
use crate::precoding::{compose_transmit, sample_artificial_noise_indices, Constellation, PrecoderPair};
use crate::rng::{domain, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrReport {
    pub sinr_bob: f64,
    pub sinr_eve: f64,
}

/// `ρ²(hᵀw)² / ((ρ²/N_t²)·‖W_a h‖² + σ²)` for one receiver.
pub fn sinr_direct(h: &EffectiveChannel, p: &PrecoderPair, rho: f64, sigma2: f64) -> f64 {
    let n = p.n_tx() as f64;
    let signal = h.0.dot(&p.w).powi(2);
    let leak = (&p.w_a * &h.0).norm_squared();
    rho * rho * signal / (rho * rho / (n * n) * leak + sigma2)
}

/// `f = (h_Eᵀw)² / (‖h_E‖² + N_t²σ²/ρ²)`; requires `W_a = I − wwᵀ`.
pub fn f_measure(w: &DVector<f64>, h_e: &EffectiveChannel, rho: f64, sigma2: f64) -> f64 {
    let n = w.len() as f64;
    h_e.0.dot(w).powi(2) / (h_e.0.norm_squared() + n * n * sigma2 / (rho * rho))
}

/// Eavesdropper SINR in the form `N_t² / (1/f − 1)`.
pub fn sinr_eve_f_form(w: &DVector<f64>, h_e: &EffectiveChannel, rho: f64, sigma2: f64) -> f64 {
    let f = f_measure(w, h_e, rho, sigma2);
    if f == 0.0 {
        return 0.0;
    }
    let n = w.len() as f64;
    n * n / (1.0 / f - 1.0)
}

pub fn sinr_pair(h_b: &EffectiveChannel, h_e: &EffectiveChannel, p: &PrecoderPair, rho: f64, sigma2: f64) -> SinrReport {
    assert!(sigma2 > 0.0, "noise variance must be positive");
    let report = SinrReport {
        sinr_bob: sinr_direct(h_b, p, rho, sigma2),
        sinr_eve: sinr_direct(h_e, p, rho, sigma2),
    };
    debug_assert!({
        let f = sinr_eve_f_form(&p.w, h_e, rho, sigma2);
        (f - report.sinr_eve).abs() <= 1e-9 * report.sinr_eve.max(f).max(1e-300)
    });
    report
}

/// `½·log₂(1 + (e/2π)·SINR)`, bits/s/Hz.
pub fn achievable_rate(sinr: f64) -> f64 {
    debug_assert!(sinr >= 0.0);
    0.5 * (1.0 + std::f64::consts::E / (2.0 * std::f64::consts::PI) * sinr).log2()
}

/// `max(R_B − max_k R_{E,k}, 0)`.
pub fn secrecy_rate(r_bob: f64, r_eves: &[f64]) -> Result<f64> {
    let worst = r_eves
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyEveList)?;
    Ok((r_bob - worst).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyResult {
    pub r_bob: f64,
    pub r_eve_max: f64,
    pub r_secrecy: f64,
}

/// Rates for one Bob and any number of eavesdroppers under a common precoder.
pub fn secrecy(h_b: &EffectiveChannel, h_eves: &[EffectiveChannel], p: &PrecoderPair, rho: f64, sigma2: f64) -> Result<SecrecyResult> {
    let r_bob = achievable_rate(sinr_direct(h_b, p, rho, sigma2));
    let r_eves: Vec<f64> = h_eves
        .iter()
        .map(|h| achievable_rate(sinr_direct(h, p, rho, sigma2)))
        .collect();
    let r_secrecy = secrecy_rate(r_bob, &r_eves)?;
    Ok(SecrecyResult {
        r_bob,
        r_eve_max: r_eves.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        r_secrecy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EveDetection {
    /// ML over the intended symbol and every artificial-noise vector.
    #[default]
    Joint,
    /// Treats the artificial noise as absent.
    Mismatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectMode {
    Bob,
    Eve(EveDetection),
}

/// Index of the constellation point nearest to `y` among `levels`; the
/// first (smallest index) wins ties.
fn nearest(y: f64, levels: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in levels.enumerate() {
        let d = (y - v) * (y - v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Detected constellation index for the DC-free observation `y`.
///
/// Bob assumes the artificial noise is nulled and compares against
/// `ρ·(hᵀw)·s`, which equals `ρ‖h‖s` under MRT. Joint eavesdropper detection
/// enumerates all `|S|^(N_t+1)` hypotheses.
pub fn ml_detect(y: f64, h: &EffectiveChannel, p: &PrecoderPair, rho: f64, constellation: &Constellation, mode: DetectMode) -> usize {
    match mode {
        DetectMode::Bob | DetectMode::Eve(EveDetection::Mismatched) => {
            let gain = rho * h.0.dot(&p.w);
            nearest(y, constellation.symbols().iter().map(|s| gain * s))
        }
        DetectMode::Eve(EveDetection::Joint) => joint_brute_force(y, h, p, rho, constellation),
    }
}

/// Noise-free observation for every `(s, s_a)` hypothesis, `s` index major.
fn joint_hypotheses(h: &EffectiveChannel, p: &PrecoderPair, rho: f64, constellation: &Constellation) -> Vec<(f64, usize)> {
    let n_tx = p.n_tx();
    let q = constellation.len();
    let a = rho * h.0.dot(&p.w);
    let b = (p.w_a.transpose() * &h.0) * (rho / n_tx as f64);
    let an_count = q.pow(n_tx as u32);
    let mut an_values = Vec::with_capacity(an_count);
    for code in 0..an_count {
        let mut rest = code;
        let mut v = 0.0;
        for k in 0..n_tx {
            v += b[k] * constellation.symbol(rest % q);
            rest /= q;
        }
        an_values.push(v);
    }
    let mut out = Vec::with_capacity(q * an_count);
    for (si, s) in constellation.symbols().iter().enumerate() {
        for v in &an_values {
            out.push((a * s + v, si));
        }
    }
    out
}

fn joint_brute_force(y: f64, h: &EffectiveChannel, p: &PrecoderPair, rho: f64, constellation: &Constellation) -> usize {
    let mut best = (0, f64::INFINITY);
    for (v, si) in joint_hypotheses(h, p, rho, constellation) {
        let d = (y - v) * (y - v);
        if d < best.1 {
            best = (si, d);
        }
    }
    best.0
}

/// Joint eavesdropper detector with the hypothesis values sorted once, so
/// each decision is a binary search. Matches [`ml_detect`] in joint mode,
/// including tie-breaking.
#[derive(Debug, Clone)]
pub struct EveJointDetector {
    values: Vec<f64>,
    symbols: Vec<usize>,
}

impl EveJointDetector {
    pub fn new(h: &EffectiveChannel, p: &PrecoderPair, rho: f64, constellation: &Constellation) -> Self {
        let mut hyp = joint_hypotheses(h, p, rho, constellation);
        hyp.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        hyp.dedup_by(|later, earlier| later.0 == earlier.0);
        let (values, symbols) = hyp.into_iter().unzip();
        Self { values, symbols }
    }

    pub fn detect(&self, y: f64) -> usize {
        let i = self.values.partition_point(|v| *v < y);
        let mut best = (usize::MAX, f64::INFINITY);
        for j in [i.wrapping_sub(1), i] {
            if let Some(v) = self.values.get(j) {
                let d = (y - v) * (y - v);
                let s = self.symbols[j];
                if d < best.1 || (d == best.1 && s < best.0) {
                    best = (s, d);
                }
            }
        }
        best.0
    }
}

/// Everything a Monte Carlo SER run needs besides the trial count and seed.
#[derive(Debug, Clone)]
pub struct SerSetup {
    pub h_bob: EffectiveChannel,
    pub h_eve: EffectiveChannel,
    pub precoder: PrecoderPair,
    pub constellation: Constellation,
    pub rho: f64,
    pub sigma2: f64,
    pub i_dc: f64,
    pub zeta: f64,
    pub p_tx: f64,
    pub eve_detection: EveDetection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerResult {
    pub ser_bob: f64,
    pub ser_eve: f64,
    pub errors_bob: u64,
    pub errors_eve: u64,
    pub n_trials: u64,
    pub seed: u64,
}

/// Counts `(bob_errors, eve_errors)` over trials `range`. Trial `i` always
/// uses stream `i`, so any partition of the trials gives the same totals.
pub fn ser_count(setup: &SerSetup, trials: std::ops::Range<u64>, seed: u64) -> Result<(u64, u64)> {
    let noise = Normal::new(0.0, setup.sigma2.sqrt()).map_err(|e| Error::config("sigma2", e.to_string()))?;
    let n_tx = setup.precoder.n_tx();
    let c = &setup.constellation;
    let eve = match setup.eve_detection {
        EveDetection::Joint => Some(EveJointDetector::new(&setup.h_eve, &setup.precoder, setup.rho, c)),
        EveDetection::Mismatched => None,
    };
    let (mut eb, mut ee) = (0, 0);
    for i in trials {
        let mut rng = stream_rng(seed, domain::SER_TRIALS, i);
        let si = rand::Rng::random_range(&mut rng, 0..c.len());
        let idx = sample_artificial_noise_indices(si, c, n_tx, &mut rng);
        let s_a = DVector::from_iterator(n_tx, idx.into_iter().map(|k| c.symbol(k)));
        let frame = compose_transmit(&setup.precoder, c.symbol(si), &s_a, setup.i_dc, setup.zeta, setup.p_tx)?;
        let y_b = setup.rho * setup.h_bob.0.dot(&frame.s) + noise.sample(&mut rng);
        let y_e = setup.rho * setup.h_eve.0.dot(&frame.s) + noise.sample(&mut rng);
        if ml_detect(y_b, &setup.h_bob, &setup.precoder, setup.rho, c, DetectMode::Bob) != si {
            eb += 1;
        }
        let se = match &eve {
            Some(d) => d.detect(y_e),
            None => ml_detect(y_e, &setup.h_eve, &setup.precoder, setup.rho, c, DetectMode::Eve(EveDetection::Mismatched)),
        };
        if se != si {
            ee += 1;
        }
    }
    Ok((eb, ee))
}

const SER_CHUNK: u64 = 4096;

/// Symbol error rates for Bob and the eavesdropper on a shared trial stream.
pub fn ser_monte_carlo(setup: &SerSetup, n_trials: u64, seed: u64) -> Result<SerResult> {
    if n_trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let chunks: Vec<_> = (0..n_trials.div_ceil(SER_CHUNK))
        .map(|k| k * SER_CHUNK..((k + 1) * SER_CHUNK).min(n_trials))
        .collect();
    let counts = chunks
        .into_par_iter()
        .map(|r| ser_count(setup, r, seed))
        .collect::<Result<Vec<_>>>()?;
    let (eb, ee) = counts.into_iter().fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
    Ok(SerResult {
        ser_bob: eb as f64 / n_trials as f64,
        ser_eve: ee as f64 / n_trials as f64,
        errors_bob: eb,
        errors_eve: ee,
        n_trials,
        seed,
    })
}
