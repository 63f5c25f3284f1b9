//! Experiment configuration, read from TOML. Every field has a default, so an
//! empty file reproduces the reference simulation setup.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::channel::{dbm_to_watts, rho};
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::gnp::GnpPropertyRanges;
use crate::metrics::EveDetection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Plates and polarizers, precoding on the effective channel.
    Gnp,
    /// No plates or polarizers, precoding on the geometric channel.
    Baseline,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Gnp => "gnp",
            Scheme::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// Current-to-light conversion efficiency ζ, W/A.
    pub zeta: f64,
    /// Photodiode responsivity η, A/W.
    pub eta: f64,
    /// DC bias, A.
    pub i_dc: f64,
    /// Thermal noise variance σ_t², dBm.
    pub noise_dbm: f64,
    /// Optical transmit power, dBm.
    pub p_tx_dbm: f64,
    /// PAM order of intended and artificial-noise symbols.
    pub pam_order: usize,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            zeta: 0.44,
            eta: 0.54,
            i_dc: 3.0,
            noise_dbm: -133.8,
            p_tx_dbm: 10.0,
            pam_order: 4,
        }
    }
}

impl Physics {
    pub fn sigma2(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn p_tx(&self) -> f64 {
        dbm_to_watts(self.p_tx_dbm)
    }

    pub fn rho_at(&self, p_tx_dbm: f64) -> f64 {
        rho(self.eta, self.zeta, dbm_to_watts(p_tx_dbm))
    }

    pub fn rho(&self) -> f64 {
        self.rho_at(self.p_tx_dbm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnpConfig {
    pub bob: GnpPropertyRanges,
    pub eve: GnpPropertyRanges,
}

impl Default for GnpConfig {
    fn default() -> Self {
        Self {
            bob: GnpPropertyRanges::bob(),
            eve: GnpPropertyRanges::eve(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", deny_unknown_fields)]
pub enum AnglePolicy {
    /// `π/2 − (Δφ_L + Δφ_U)/4` on every transmitter.
    #[default]
    Suboptimal,
    /// Fixed-point optimum against the eavesdropper channel at hand.
    Iterative { eps: f64, max_iter: usize },
    Fixed { angles: Vec<f64> },
}

/// How an eavesdropper sets its polarizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveAngle {
    Zero,
    MatchBob,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Cell spacing, m.
    pub step: f64,
    pub z: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x: [-10.0, 10.0],
            y: [-10.0, 10.0],
            step: 0.5,
            z: 1.0,
        }
    }
}

impl Grid {
    fn axis(range: [f64; 2], step: f64) -> Vec<f64> {
        let n = ((range[1] - range[0]) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| range[0] + i as f64 * step).collect()
    }

    /// Cell centers, `x` varying fastest.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let xs = Self::axis(self.x, self.step);
        let ys = Self::axis(self.y, self.step);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| [x, y, self.z]))
            .collect()
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::config(format!("{field}.step"), "grid resolution must be positive"));
        }
        for (name, r) in [("x", self.x), ("y", self.y)] {
            if !(r[0] <= r[1]) {
                return Err(Error::config(format!("{field}.{name}"), "range must be ordered"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatmapConfig {
    pub grid: Grid,
    /// Transmit angle of the alternative scenario, rad.
    pub alt_tx_angle: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            grid: Grid::default(),
            alt_tx_angle: 4.0 * PI / 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapHistConfig {
    /// Number of uniformly random eavesdropper placements.
    pub placements: usize,
    pub z: f64,
    pub bins: usize,
    /// Fixed-point tolerance and cap for the optimal angles.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for GapHistConfig {
    fn default() -> Self {
        Self {
            placements: 500,
            z: 1.0,
            bins: 20,
            eps: crate::angles::DEFAULT_EPS,
            max_iter: crate::angles::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BobSweepConfig {
    pub x: [f64; 2],
    pub step: f64,
    pub y: f64,
    pub z: f64,
    pub eve: [f64; 3],
}

impl Default for BobSweepConfig {
    fn default() -> Self {
        Self {
            x: [-10.0, 10.0],
            step: 0.5,
            y: 0.0,
            z: 1.0,
            eve: [-5.0, -5.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SerConfig {
    pub eves: Vec<[f64; 3]>,
    /// Transmit powers to sweep, dBm.
    pub p_tx_dbm: Vec<f64>,
    pub trials: u64,
    pub eve_detection: EveDetection,
}

impl Default for SerConfig {
    fn default() -> Self {
        Self {
            eves: vec![[1.0, 1.0, 1.0], [2.5, 2.5, 1.0], [5.0, 5.0, 1.0], [7.5, 7.5, 1.0]],
            p_tx_dbm: (0..=16).map(|k| 2.5 * k as f64).collect(),
            trials: 100_000,
            eve_detection: EveDetection::Joint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedEve {
    pub position: [f64; 3],
    pub angle: EveAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiEveConfig {
    pub fixed: Vec<FixedEve>,
    /// Grid swept by the remaining eavesdropper.
    pub grid: Grid,
    pub roaming_angle: EveAngle,
}

impl Default for MultiEveConfig {
    fn default() -> Self {
        Self {
            fixed: vec![
                FixedEve {
                    position: [-2.0, 0.0, 1.0],
                    angle: EveAngle::Zero,
                },
                FixedEve {
                    position: [3.0, 4.0, 1.0],
                    angle: EveAngle::MatchBob,
                },
            ],
            grid: Grid::default(),
            roaming_angle: EveAngle::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the runtime choose.
    pub threads: usize,
    /// Schemes to evaluate.
    pub schemes: Vec<Scheme>,
    pub bob: [f64; 3],
    pub scene: Scene,
    pub physics: Physics,
    pub gnp: GnpConfig,
    pub tx_angles: AnglePolicy,
    pub heatmap: HeatmapConfig,
    pub gap_hist: GapHistConfig,
    pub bob_sweep: BobSweepConfig,
    pub ser: SerConfig,
    pub multi_eve: MultiEveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            threads: 0,
            schemes: vec![Scheme::Gnp, Scheme::Baseline],
            bob: [0.0, 0.0, 1.0],
            scene: Scene::default(),
            physics: Physics::default(),
            gnp: GnpConfig::default(),
            tx_angles: AnglePolicy::default(),
            heatmap: HeatmapConfig::default(),
            gap_hist: GapHistConfig::default(),
            bob_sweep: BobSweepConfig::default(),
            ser: SerConfig::default(),
            multi_eve: MultiEveConfig::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn inside(scene: &Scene, field: &str, p: [f64; 3]) -> Result<()> {
    if scene.contains(&p.into()) {
        Ok(())
    } else {
        Err(Error::config(field, format!("position {p:?} lies outside the room")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        let ph = &self.physics;
        positive("physics.zeta", ph.zeta)?;
        positive("physics.eta", ph.eta)?;
        positive("physics.i_dc", ph.i_dc)?;
        positive("physics.sigma2", ph.sigma2())?;
        positive("physics.p_tx", ph.p_tx())?;
        if ph.pam_order < 2 {
            return Err(Error::config("physics.pam_order", "needs at least two levels"));
        }
        self.gnp.bob.validate("gnp.bob")?;
        self.gnp.eve.validate("gnp.eve")?;
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        inside(&self.scene, "bob", self.bob)?;
        match &self.tx_angles {
            AnglePolicy::Suboptimal => {}
            AnglePolicy::Iterative { eps, max_iter } => {
                positive("tx_angles.eps", *eps)?;
                if *max_iter == 0 {
                    return Err(Error::config("tx_angles.max_iter", "must be at least 1"));
                }
            }
            AnglePolicy::Fixed { angles } => {
                if angles.len() != self.scene.n_tx() {
                    return Err(Error::config(
                        "tx_angles.angles",
                        format!("expected {} angles, found {}", self.scene.n_tx(), angles.len()),
                    ));
                }
            }
        }
        self.heatmap.grid.validate("heatmap.grid")?;
        self.multi_eve.grid.validate("multi_eve.grid")?;
        for (i, e) in self.multi_eve.fixed.iter().enumerate() {
            inside(&self.scene, &format!("multi_eve.fixed[{i}].position"), e.position)?;
        }
        let g = &self.gap_hist;
        if g.placements == 0 || g.bins == 0 {
            return Err(Error::config("gap_hist", "placements and bins must be at least 1"));
        }
        positive("gap_hist.eps", g.eps)?;
        let b = &self.bob_sweep;
        positive("bob_sweep.step", b.step)?;
        if !(b.x[0] <= b.x[1]) {
            return Err(Error::config("bob_sweep.x", "range must be ordered"));
        }
        inside(&self.scene, "bob_sweep.eve", b.eve)?;
        let s = &self.ser;
        if s.trials == 0 {
            return Err(Error::config("ser.trials", "must be at least 1"));
        }
        if s.p_tx_dbm.is_empty() || s.eves.is_empty() {
            return Err(Error::config("ser", "needs at least one power and one eavesdropper"));
        }
        for (i, e) in s.eves.iter().enumerate() {
            inside(&self.scene, &format!("ser.eves[{i}]"), *e)?;
        }
        Ok(())
    }
}
