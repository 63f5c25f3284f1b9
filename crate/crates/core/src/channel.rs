//! Effective channel through transmit polarizer, GNP plate, propagation and
//! receive polarizer.
//!
//! Two routes are provided and must agree: the field chain (circular
//! amplitudes per path, then photodiode intensity) and the closed-form
//! effective channel `h_eff`. Paths from an LED are mutually incoherent, so
//! the photodiode adds their intensities; propagation phases therefore drop
//! out of the received signal.

use nalgebra::{DVector, Point3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{receiver_paths_with, ChannelPath, Scene, WallPatch};
use crate::gnp::{GnpPathResponse, ResponseSource};
use crate::polarization::JonesVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizerConfig {
    /// Transmit polarizer angle per LED, rad.
    pub tx_angles: Vec<f64>,
    /// Receive polarizer angle, rad.
    pub rx_angle: f64,
}

impl PolarizerConfig {
    pub fn new(tx_angles: Vec<f64>, rx_angle: f64) -> Self {
        Self { tx_angles, rx_angle }
    }

    pub fn uniform(n_tx: usize, tx_angle: f64, rx_angle: f64) -> Self {
        Self::new(vec![tx_angle; n_tx], rx_angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiverLabel {
    Bob,
    Eve(usize),
}

/// One propagation path together with the plate response it sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTerm {
    pub path: ChannelPath,
    pub response: GnpPathResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChannel {
    pub label: ReceiverLabel,
    /// `per_tx[m]` holds the paths from LED `m`, LOS first.
    pub per_tx: Vec<Vec<PathTerm>>,
}

impl ReceiverChannel {
    pub fn new(label: ReceiverLabel, per_tx: Vec<Vec<PathTerm>>) -> Self {
        Self { label, per_tx }
    }

    /// Traces the scene from `rx` and attaches a plate response to every path.
    pub fn build<R: Rng + ?Sized>(
        scene: &Scene,
        patches: &[WallPatch],
        rx: &Point3<f64>,
        label: ReceiverLabel,
        source: &mut ResponseSource<'_, R>,
    ) -> Result<Self> {
        let paths = receiver_paths_with(scene, patches, rx)?;
        let per_tx = paths
            .into_iter()
            .enumerate()
            .map(|(m, list)| {
                list.into_iter()
                    .map(|path| {
                        Ok(PathTerm {
                            path,
                            response: source.response(m, path.path_index)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(label, per_tx))
    }

    pub fn n_tx(&self) -> usize {
        self.per_tx.len()
    }

    pub fn n_paths(&self) -> usize {
        self.per_tx.iter().map(Vec::len).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &PathTerm)> {
        self.per_tx
            .iter()
            .enumerate()
            .flat_map(|(m, v)| v.iter().map(move |t| (m, t)))
    }

    /// Geometric gain per LED summed over paths, `g̃_m = Σ_n g_mn`.
    pub fn geometric_gains(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_tx(),
            self.per_tx.iter().map(|v| v.iter().map(|t| t.path.gain).sum()),
        )
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.n_tx() {
            return Err(Error::DimensionMismatch {
                expected: self.n_tx(),
                found,
            });
        }
        Ok(())
    }
}

/// Real effective channel, one non-negative entry per LED.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel(pub DVector<f64>);

impl EffectiveChannel {
    pub fn new(h: DVector<f64>) -> Self {
        Self(h)
    }

    pub fn from_slice(h: &[f64]) -> Self {
        Self(DVector::from_column_slice(h))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Circular amplitudes after an unpolarized source of intensity `x` passes a
/// linear polarizer at `theta`: `(√x/2)·[e^{−jθ}, e^{jθ}]`.
pub fn transmit_cp_amplitudes(x: f64, theta: f64) -> JonesVector {
    let a = x.max(0.0).sqrt() / 2.0;
    JonesVector::circular(Complex64::from_polar(a, -theta), Complex64::from_polar(a, theta))
}

/// (LCP, RCP) amplitude pair arriving at the photodiode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpPair {
    pub l: Complex64,
    pub r: Complex64,
}

impl CpPair {
    pub fn intensity(&self) -> f64 {
        self.l.norm_sqr() + self.r.norm_sqr()
    }
}

/// Field components at the photodiode, one mutually incoherent pair per path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedField {
    pub per_tx: Vec<Vec<CpPair>>,
}

impl ReceivedField {
    /// Coherent sum over paths for each LED (the per-LED `r_L`, `r_R`).
    pub fn coherent_sums(&self) -> Vec<CpPair> {
        self.per_tx
            .iter()
            .map(|v| {
                v.iter().fold(
                    CpPair {
                        l: Complex64::new(0.0, 0.0),
                        r: Complex64::new(0.0, 0.0),
                    },
                    |acc, p| CpPair {
                        l: acc.l + p.l,
                        r: acc.r + p.r,
                    },
                )
            })
            .collect()
    }
}

pub fn received_cp_amplitudes(
    rc: &ReceiverChannel,
    pc: &PolarizerConfig,
    x: &[f64],
) -> Result<ReceivedField> {
    rc.check_len(x.len())?;
    rc.check_len(pc.tx_angles.len())?;
    let theta_c = pc.rx_angle;
    let per_tx = rc
        .per_tx
        .iter()
        .enumerate()
        .map(|(m, terms)| {
            let theta_m = pc.tx_angles[m];
            terms
                .iter()
                .map(|t| {
                    let amp = (t.path.gain * x[m].max(0.0)).sqrt() / 4.0;
                    let (al, ar) = (t.response.a_bar_l.sqrt(), t.response.a_bar_r.sqrt());
                    let (vt, dphi) = (t.path.delay_phase, t.response.delta_phi);
                    let l = Complex64::from_polar(al, vt - theta_m)
                        + Complex64::from_polar(ar, vt - 2.0 * theta_c + theta_m + dphi);
                    let r = Complex64::from_polar(al, vt + 2.0 * theta_c - theta_m)
                        + Complex64::from_polar(ar, vt + theta_m + dphi);
                    CpPair {
                        l: l * amp,
                        r: r * amp,
                    }
                })
                .collect()
        })
        .collect();
    Ok(ReceivedField { per_tx })
}

/// Photodiode current `η·Σ|r|² + z`, summing intensities of incoherent paths.
pub fn pd_intensity(field: &ReceivedField, eta: f64, noise: f64) -> f64 {
    let power: f64 = field.per_tx.iter().flatten().map(CpPair::intensity).sum();
    eta * power + noise
}

/// Per-path contribution `g·(ā_L + ā_R + 2√(ā_Lā_R)·cos(2θ_C − 2θ_m − Δφ))`.
pub fn path_effective_gain(term: &PathTerm, theta_m: f64, theta_c: f64) -> f64 {
    let r = &term.response;
    term.path.gain
        * (r.a_bar_l
            + r.a_bar_r
            + 2.0 * (r.a_bar_l * r.a_bar_r).sqrt() * (2.0 * theta_c - 2.0 * theta_m - r.delta_phi).cos())
}

pub fn effective_channel(rc: &ReceiverChannel, pc: &PolarizerConfig) -> Result<EffectiveChannel> {
    rc.check_len(pc.tx_angles.len())?;
    let h = rc
        .per_tx
        .iter()
        .zip(&pc.tx_angles)
        .map(|(terms, &theta_m)| {
            terms
                .iter()
                .map(|t| path_effective_gain(t, theta_m, pc.rx_angle))
                .sum::<f64>()
                .max(0.0)
        });
    Ok(EffectiveChannel(DVector::from_iterator(rc.n_tx(), h)))
}

/// Channel of the plate-free, polarizer-free baseline on the same scale as
/// [`effective_channel`]: removing both polarizers and the plate turns the
/// `η/8·h` factor into `η·g̃`, so `h = 8·g̃`.
pub fn baseline_channel(rc: &ReceiverChannel) -> EffectiveChannel {
    EffectiveChannel(rc.geometric_gains() * 8.0)
}

/// `ρ = η·ζ·P_TX / 8`.
pub fn rho(eta: f64, zeta: f64, p_tx: f64) -> f64 {
    eta * zeta * p_tx / 8.0
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// DC-free observation `ρ·hᵀs + z` for a precoded vector `s`.
pub fn received_symbol_signal(h: &EffectiveChannel, rho: f64, s: &DVector<f64>, noise: f64) -> Result<f64> {
    if s.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: s.len(),
        });
    }
    Ok(rho * h.0.dot(s) + noise)
}
