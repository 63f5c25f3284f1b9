//! MRT symbol precoder, zero-forcing artificial-noise projector and DC-biased
//! transmit composition.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::EffectiveChannel;
use crate::error::{Error, Result};

/// Real PAM alphabet with unit average energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    symbols: Vec<f64>,
}

impl Constellation {
    /// `M`-PAM levels `{±1, ±3, …}` scaled so that `E{s²} = 1`.
    pub fn pam(order: usize) -> Self {
        assert!(order >= 2, "PAM needs at least two levels");
        let raw: Vec<f64> = (0..order)
            .map(|i| 2.0 * i as f64 - (order as f64 - 1.0))
            .collect();
        let energy = raw.iter().map(|v| v * v).sum::<f64>() / order as f64;
        let scale = energy.sqrt();
        Self {
            symbols: raw.into_iter().map(|v| v / scale).collect(),
        }
    }

    pub fn from_symbols(symbols: Vec<f64>) -> Self {
        assert!(symbols.len() >= 2, "constellation needs at least two symbols");
        Self { symbols }
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> f64 {
        self.symbols[i]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s * s).sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.symbols.iter().fold(0.0, |a, s| a.max(s.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderPair {
    /// Unit-norm symbol precoder.
    pub w: DVector<f64>,
    /// Projector onto the null space of the steering channel.
    pub w_a: DMatrix<f64>,
}

impl PrecoderPair {
    /// MRT + zero-forcing artificial noise on the effective channel.
    pub fn for_channel(h: &EffectiveChannel) -> Result<Self> {
        Ok(Self {
            w: mrt_precoder(h)?,
            w_a: an_projector(h)?,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.w.len()
    }

    /// `w·s_I + (1/N_t)·W_a·s_a`.
    pub fn precode(&self, s_i: f64, s_a: &DVector<f64>) -> DVector<f64> {
        &self.w * s_i + (&self.w_a * s_a) / self.n_tx() as f64
    }
}

/// `h / ‖h‖`.
pub fn mrt_precoder(h: &EffectiveChannel) -> Result<DVector<f64>> {
    let n = h.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroChannel);
    }
    Ok(h.as_vector() / n)
}

/// `I − h·h†` with `h† = hᵀ/‖h‖²`.
pub fn an_projector(h: &EffectiveChannel) -> Result<DMatrix<f64>> {
    let w = mrt_precoder(h)?;
    let n = w.len();
    Ok(DMatrix::identity(n, n) - &w * w.transpose())
}

/// Precoders steered by the plate-free geometric gains `g̃_m = Σ_n g_mn`.
pub fn baseline_precoder(geometric_gains: &DVector<f64>) -> Result<PrecoderPair> {
    if geometric_gains.iter().any(|g| *g < 0.0) {
        return Err(Error::InvalidConfig {
            field: "geometric_gains".into(),
            reason: "gains must be non-negative".into(),
        });
    }
    PrecoderPair::for_channel(&EffectiveChannel::new(geometric_gains.clone()))
}

/// Indices of artificial-noise symbols, each uniform over the alphabet minus `s_i`.
pub fn sample_artificial_noise_indices<R: Rng + ?Sized>(
    s_i: usize,
    constellation: &Constellation,
    n_tx: usize,
    rng: &mut R,
) -> Vec<usize> {
    let m = constellation.len();
    (0..n_tx)
        .map(|_| {
            let k = rng.random_range(0..m - 1);
            if k >= s_i {
                k + 1
            } else {
                k
            }
        })
        .collect()
}

pub fn sample_artificial_noise<R: Rng + ?Sized>(
    s_i: usize,
    constellation: &Constellation,
    n_tx: usize,
    rng: &mut R,
) -> DVector<f64> {
    let idx = sample_artificial_noise_indices(s_i, constellation, n_tx, rng);
    DVector::from_iterator(n_tx, idx.into_iter().map(|k| constellation.symbol(k)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    pub s_i: f64,
    pub s_a: DVector<f64>,
    /// Precoded vector `s`.
    pub s: DVector<f64>,
    /// Drive intensities `ζ·P_TX·(I_DC·1 + s)`.
    pub x: DVector<f64>,
    pub i_dc: f64,
}

/// Biases the precoded vector; any `|s_m| > I_DC` is an error, never clipped.
pub fn compose_transmit(
    p: &PrecoderPair,
    s_i: f64,
    s_a: &DVector<f64>,
    i_dc: f64,
    zeta: f64,
    p_tx: f64,
) -> Result<TransmitFrame> {
    if s_a.len() != p.n_tx() {
        return Err(Error::DimensionMismatch {
            expected: p.n_tx(),
            found: s_a.len(),
        });
    }
    if !(i_dc > 0.0) {
        return Err(Error::config("i_dc", "DC bias must be positive"));
    }
    let s = p.precode(s_i, s_a);
    if let Some((index, value)) = s
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.abs()))
        .find(|(_, v)| *v > i_dc)
    {
        return Err(Error::DcBiasViolation {
            index,
            value,
            limit: i_dc,
        });
    }
    let x = s.map(|v| zeta * p_tx * (i_dc + v));
    Ok(TransmitFrame {
        s_i,
        s_a: s_a.clone(),
        s,
        x,
        i_dc,
    })
}
