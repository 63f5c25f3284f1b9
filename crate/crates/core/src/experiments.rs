//! Seeded experiment runners behind the command-line tool.
//!
//! Each runner returns typed rows in a fixed order. Randomness is drawn from
//! per-item streams (see [`crate::rng`]), so results are identical for any
//! thread count.

use nalgebra::Point3;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::angles::{bob_angle, tx_angles_iterative, tx_angles_suboptimal, TxAngleSolution};
use crate::channel::{baseline_channel, effective_channel, EffectiveChannel, PolarizerConfig, ReceiverChannel, ReceiverLabel};
use crate::config::{AnglePolicy, EveAngle, ExperimentConfig, Scheme};
use crate::error::{Error, Result};
use crate::geometry::WallPatch;
use crate::gnp::{GnpPropertyRanges, ResponseSource};
use crate::metrics::{achievable_rate, secrecy_rate, ser_monte_carlo, sinr_direct, SerSetup};
use crate::precoding::{baseline_precoder, Constellation, PrecoderPair};
use crate::rng::{domain, stream_rng};

/// Version of the CSV layouts written by the runners.
pub const SCHEMA_VERSION: u32 = 1;

/// Stream offset for eavesdroppers at fixed positions, clear of grid indices.
const FIXED_EVE_STREAM: u64 = 1 << 40;

/// Runs `f` on a dedicated pool with `threads` workers (0: runtime default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    Ok(pool.install(f))
}

/// Legitimate link after angle selection and precoding.
#[derive(Debug, Clone)]
pub struct Link {
    pub tx_angles: Vec<f64>,
    pub theta_b: f64,
    pub h_bob: EffectiveChannel,
    pub precoder: PrecoderPair,
}

/// Scene, precomputed wall patches and physical constants for one config.
pub struct World<'a> {
    pub cfg: &'a ExperimentConfig,
    pub patches: Vec<WallPatch>,
}

impl<'a> World<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            patches: cfg.scene.wall_patches(),
        })
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::pam(self.cfg.physics.pam_order)
    }

    /// Receiver channel with plate responses drawn from stream `index` of `stream_domain`.
    pub fn receiver(&self, pos: [f64; 3], label: ReceiverLabel, ranges: &GnpPropertyRanges, stream_domain: u64, index: u64) -> Result<ReceiverChannel> {
        let mut rng = stream_rng(self.cfg.seed, stream_domain, index);
        let mut source = ResponseSource::Sampled { ranges, rng: &mut rng };
        ReceiverChannel::build(&self.cfg.scene, &self.patches, &Point3::from(pos), label, &mut source)
    }

    pub fn bob(&self, pos: [f64; 3], index: u64) -> Result<ReceiverChannel> {
        self.receiver(pos, ReceiverLabel::Bob, &self.cfg.gnp.bob, domain::BOB_RESPONSES, index)
    }

    pub fn eve(&self, pos: [f64; 3], label: usize, index: u64) -> Result<ReceiverChannel> {
        self.receiver(pos, ReceiverLabel::Eve(label), &self.cfg.gnp.eve, domain::EVE_RESPONSES, index)
    }

    pub fn suboptimal_angles(&self) -> TxAngleSolution {
        tx_angles_suboptimal(self.cfg.gnp.eve.delta_phi, self.cfg.scene.n_tx())
    }

    /// Transmit angles under `policy`; the iterative policy optimizes against `rc_eve`.
    pub fn tx_angles(&self, policy: &AnglePolicy, rc_eve: &ReceiverChannel) -> Result<TxAngleSolution> {
        match policy {
            AnglePolicy::Suboptimal => Ok(self.suboptimal_angles()),
            AnglePolicy::Iterative { eps, max_iter } => tx_angles_iterative(rc_eve, *eps, *max_iter),
            AnglePolicy::Fixed { angles } => Ok(TxAngleSolution::fixed(angles.clone())),
        }
    }

    /// Receive angle, effective channel and precoders for given transmit angles.
    pub fn gnp_link(&self, rc_bob: &ReceiverChannel, tx_angles: &[f64]) -> Result<Link> {
        let sol = bob_angle(rc_bob, tx_angles, self.cfg.gnp.bob.delta_phi_mid());
        let h_bob = effective_channel(rc_bob, &PolarizerConfig::new(tx_angles.to_vec(), sol.theta_b))?;
        let precoder = PrecoderPair::for_channel(&h_bob)?;
        Ok(Link {
            tx_angles: tx_angles.to_vec(),
            theta_b: sol.theta_b,
            h_bob,
            precoder,
        })
    }

    pub fn baseline_link(&self, rc_bob: &ReceiverChannel) -> Result<Link> {
        Ok(Link {
            tx_angles: Vec::new(),
            theta_b: 0.0,
            h_bob: baseline_channel(rc_bob),
            precoder: baseline_precoder(&rc_bob.geometric_gains())?,
        })
    }

    pub fn eve_channel(&self, scheme: Scheme, link: &Link, rc_eve: &ReceiverChannel, angle: EveAngle) -> Result<EffectiveChannel> {
        match scheme {
            Scheme::Baseline => Ok(baseline_channel(rc_eve)),
            Scheme::Gnp => {
                let theta_e = match angle {
                    EveAngle::Zero => 0.0,
                    EveAngle::MatchBob => link.theta_b,
                    EveAngle::Fixed(v) => v,
                };
                effective_channel(rc_eve, &PolarizerConfig::new(link.tx_angles.clone(), theta_e))
            }
        }
    }

    /// SINRs and rates of `link` against the given eavesdropper channels.
    pub fn rates(&self, link: &Link, eves: &[EffectiveChannel]) -> Result<Rates> {
        let rho = self.cfg.physics.rho();
        let sigma2 = self.cfg.physics.sigma2();
        let sinr_bob = sinr_direct(&link.h_bob, &link.precoder, rho, sigma2);
        let sinr_eves: Vec<f64> = eves.iter().map(|h| sinr_direct(h, &link.precoder, rho, sigma2)).collect();
        let r_bob = achievable_rate(sinr_bob);
        let r_eves: Vec<f64> = sinr_eves.iter().map(|s| achievable_rate(*s)).collect();
        Ok(Rates {
            sinr_bob,
            sinr_eve_max: sinr_eves.iter().copied().fold(0.0, f64::max),
            r_bob,
            r_eve_max: r_eves.iter().copied().fold(0.0, f64::max),
            r_secrecy: secrecy_rate(r_bob, &r_eves)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub sinr_bob: f64,
    pub sinr_eve_max: f64,
    pub r_bob: f64,
    pub r_eve_max: f64,
    pub r_secrecy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub scenario: &'static str,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub sinr_bob_lin: f64,
    pub sinr_eve_lin: f64,
    pub r_bob_bps_hz: f64,
    pub r_eve_bps_hz: f64,
    pub r_secrecy_bps_hz: f64,
}

pub const SCENARIO_BASELINE: &str = "baseline";
pub const SCENARIO_EVE_MATCHES_BOB: &str = "gnp_eve_matches_bob";
pub const SCENARIO_EVE_ZERO: &str = "gnp_eve_zero";
pub const SCENARIO_ALT_TX: &str = "gnp_alt_tx_eve_zero";

fn heatmap_row(scenario: &'static str, p: [f64; 3], r: Rates) -> HeatmapRow {
    HeatmapRow {
        scenario,
        x_m: p[0],
        y_m: p[1],
        z_m: p[2],
        sinr_bob_lin: r.sinr_bob,
        sinr_eve_lin: r.sinr_eve_max,
        r_bob_bps_hz: r.r_bob,
        r_eve_bps_hz: r.r_eve_max,
        r_secrecy_bps_hz: r.r_secrecy,
    }
}

/// Secrecy rate over the eavesdropper grid. Rows are grouped by scenario,
/// cells in grid order within each group.
pub fn run_heatmap(cfg: &ExperimentConfig) -> Result<Vec<HeatmapRow>> {
    let world = World::new(cfg)?;
    let rc_bob = world.bob(cfg.bob, 0)?;
    let baseline = world.baseline_link(&rc_bob)?;
    let n_tx = cfg.scene.n_tx();
    let alt = world.gnp_link(&rc_bob, &vec![cfg.heatmap.alt_tx_angle; n_tx])?;
    let fixed_link = match cfg.tx_angles {
        AnglePolicy::Iterative { .. } => None,
        _ => {
            // Eve's channel is not consulted by these policies.
            let angles = world.tx_angles(&cfg.tx_angles, &rc_bob)?;
            Some(world.gnp_link(&rc_bob, &angles.angles)?)
        }
    };
    let want_gnp = cfg.schemes.contains(&Scheme::Gnp);
    let want_base = cfg.schemes.contains(&Scheme::Baseline);
    let points = cfg.heatmap.grid.points();
    let cells = points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| -> Result<Vec<HeatmapRow>> {
            let rc_eve = world.eve(p, 0, i as u64)?;
            let mut rows = Vec::with_capacity(4);
            if want_base {
                let h = world.eve_channel(Scheme::Baseline, &baseline, &rc_eve, EveAngle::Zero)?;
                rows.push(heatmap_row(SCENARIO_BASELINE, p, world.rates(&baseline, &[h])?));
            }
            if want_gnp {
                let link = match &fixed_link {
                    Some(l) => l.clone(),
                    None => world.gnp_link(&rc_bob, &world.tx_angles(&cfg.tx_angles, &rc_eve)?.angles)?,
                };
                for (name, l, angle) in [
                    (SCENARIO_EVE_MATCHES_BOB, &link, EveAngle::MatchBob),
                    (SCENARIO_EVE_ZERO, &link, EveAngle::Zero),
                    (SCENARIO_ALT_TX, &alt, EveAngle::Zero),
                ] {
                    let h = world.eve_channel(Scheme::Gnp, l, &rc_eve, angle)?;
                    rows.push(heatmap_row(name, p, world.rates(l, &[h])?));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_scen = cells.first().map_or(0, Vec::len);
    Ok((0..n_scen)
        .flat_map(|s| cells.iter().map(move |c| c[s].clone()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub placement: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub r_secrecy_suboptimal_bps_hz: f64,
    pub r_secrecy_optimal_bps_hz: f64,
    /// Optimal minus suboptimal.
    pub gap_bps_hz: f64,
    /// Mean over transmitters of `|θ* − θ_opt|`.
    pub mean_angle_diff_deg: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo_bps_hz: f64,
    pub hi_bps_hz: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapHistogram {
    pub rows: Vec<GapRow>,
    pub bins: Vec<HistogramBin>,
}

impl GapHistogram {
    pub fn max_angle_diff_deg(&self) -> f64 {
        self.rows.iter().map(|r| r.mean_angle_diff_deg).fold(0.0, f64::max)
    }

    /// Empirical quantile of `|gap|` (nearest rank).
    pub fn abs_gap_quantile(&self, q: f64) -> f64 {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.gap_bps_hz.abs()).collect();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return 0.0;
        }
        let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
        v[k - 1]
    }
}

/// Equal-width histogram of `values`; a zero-width range yields one bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Vec::new();
    }
    if hi <= lo {
        return vec![HistogramBin {
            lo_bps_hz: lo,
            hi_bps_hz: hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo_bps_hz: lo + k as f64 * width,
            hi_bps_hz: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count,
        })
        .collect()
}

/// Uniform position on the horizontal plane `z` inside the room.
fn random_position(cfg: &ExperimentConfig, index: u64, z: f64) -> [f64; 3] {
    let mut rng = stream_rng(cfg.seed, domain::PLACEMENT, index);
    let [w, d, _] = cfg.scene.room;
    [
        rng.random_range(-w / 2.0..=w / 2.0),
        rng.random_range(-d / 2.0..=d / 2.0),
        z,
    ]
}

/// Suboptimal vs fixed-point transmit angles over random eavesdropper placements.
pub fn run_gap_histogram(cfg: &ExperimentConfig) -> Result<GapHistogram> {
    let world = World::new(cfg)?;
    let g = &cfg.gap_hist;
    let rc_bob = world.bob(cfg.bob, 0)?;
    let sub = world.suboptimal_angles();
    let sub_link = world.gnp_link(&rc_bob, &sub.angles)?;
    let rows = (0..g.placements)
        .into_par_iter()
        .map(|i| -> Result<GapRow> {
            let p = random_position(cfg, i as u64, g.z);
            let rc_eve = world.eve(p, 0, i as u64)?;
            let opt = tx_angles_iterative(&rc_eve, g.eps, g.max_iter)?;
            let opt_link = world.gnp_link(&rc_bob, &opt.angles)?;
            let r_sub = world.rates(&sub_link, &[world.eve_channel(Scheme::Gnp, &sub_link, &rc_eve, EveAngle::Zero)?])?;
            let r_opt = world.rates(&opt_link, &[world.eve_channel(Scheme::Gnp, &opt_link, &rc_eve, EveAngle::Zero)?])?;
            Ok(GapRow {
                placement: i,
                x_m: p[0],
                y_m: p[1],
                z_m: p[2],
                r_secrecy_suboptimal_bps_hz: r_sub.r_secrecy,
                r_secrecy_optimal_bps_hz: r_opt.r_secrecy,
                gap_bps_hz: r_opt.r_secrecy - r_sub.r_secrecy,
                mean_angle_diff_deg: sub.mean_abs_difference(&opt).to_degrees(),
                iterations: opt.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap_bps_hz).collect();
    let bins = histogram(&gaps, g.bins);
    Ok(GapHistogram { rows, bins })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobSweepRow {
    pub case: &'static str,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub theta_b_rad: f64,
    pub r_bob_bps_hz: f64,
    pub r_eve_bps_hz: f64,
    pub r_secrecy_bps_hz: f64,
}

pub const CASE_SUB_EVE_MATCHES_BOB: &str = "gnp_suboptimal_eve_matches_bob";
pub const CASE_SUB_EVE_ZERO: &str = "gnp_suboptimal_eve_zero";
pub const CASE_OPT_EVE_MATCHES_BOB: &str = "gnp_optimal_eve_matches_bob";
pub const CASE_OPT_EVE_ZERO: &str = "gnp_optimal_eve_zero";
pub const CASE_BASELINE: &str = "baseline";

/// Secrecy rate along a line of Bob positions with a fixed eavesdropper.
pub fn run_bob_sweep(cfg: &ExperimentConfig) -> Result<Vec<BobSweepRow>> {
    let world = World::new(cfg)?;
    let b = &cfg.bob_sweep;
    let n = ((b.x[1] - b.x[0]) / b.step + 1e-9).floor() as usize;
    let rc_eve = world.eve(b.eve, 0, 0)?;
    let sub = world.suboptimal_angles();
    let opt = tx_angles_iterative(&rc_eve, cfg.gap_hist.eps, cfg.gap_hist.max_iter)?;
    let want_gnp = cfg.schemes.contains(&Scheme::Gnp);
    let want_base = cfg.schemes.contains(&Scheme::Baseline);
    let per_pos = (0..=n)
        .into_par_iter()
        .map(|i| -> Result<Vec<BobSweepRow>> {
            let p = [b.x[0] + i as f64 * b.step, b.y, b.z];
            let rc_bob = world.bob(p, i as u64)?;
            let mut rows = Vec::new();
            let mut push = |case, link: &Link, scheme, angle| -> Result<()> {
                let h = world.eve_channel(scheme, link, &rc_eve, angle)?;
                let r = world.rates(link, &[h])?;
                rows.push(BobSweepRow {
                    case,
                    x_m: p[0],
                    y_m: p[1],
                    z_m: p[2],
                    theta_b_rad: link.theta_b,
                    r_bob_bps_hz: r.r_bob,
                    r_eve_bps_hz: r.r_eve_max,
                    r_secrecy_bps_hz: r.r_secrecy,
                });
                Ok(())
            };
            if want_gnp {
                let sub_link = world.gnp_link(&rc_bob, &sub.angles)?;
                let opt_link = world.gnp_link(&rc_bob, &opt.angles)?;
                push(CASE_SUB_EVE_MATCHES_BOB, &sub_link, Scheme::Gnp, EveAngle::MatchBob)?;
                push(CASE_SUB_EVE_ZERO, &sub_link, Scheme::Gnp, EveAngle::Zero)?;
                push(CASE_OPT_EVE_MATCHES_BOB, &opt_link, Scheme::Gnp, EveAngle::MatchBob)?;
                push(CASE_OPT_EVE_ZERO, &opt_link, Scheme::Gnp, EveAngle::Zero)?;
            }
            if want_base {
                let link = world.baseline_link(&rc_bob)?;
                push(CASE_BASELINE, &link, Scheme::Baseline, EveAngle::Zero)?;
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_case = per_pos.first().map_or(0, Vec::len);
    Ok((0..n_case)
        .flat_map(|c| per_pos.iter().map(move |r| r[c].clone()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerRow {
    pub scheme: &'static str,
    pub eve_index: usize,
    pub eve_x_m: f64,
    pub eve_y_m: f64,
    pub eve_z_m: f64,
    pub p_tx_dbm: f64,
    pub ser_bob: f64,
    pub ser_eve: f64,
    pub errors_bob: u64,
    pub errors_eve: u64,
    pub trials: u64,
}

/// SER of Bob and the eavesdropper (polarizer at 0) over the power sweep.
pub fn run_ser(cfg: &ExperimentConfig) -> Result<Vec<SerRow>> {
    let world = World::new(cfg)?;
    let s = &cfg.ser;
    let ph = &cfg.physics;
    let rc_bob = world.bob(cfg.bob, 0)?;
    let mut rows = Vec::new();
    for scheme in [Scheme::Gnp, Scheme::Baseline] {
        if !cfg.schemes.contains(&scheme) {
            continue;
        }
        for (k, &pos) in s.eves.iter().enumerate() {
            let rc_eve = world.eve(pos, k, FIXED_EVE_STREAM + k as u64)?;
            let link = match scheme {
                Scheme::Gnp => world.gnp_link(&rc_bob, &world.tx_angles(&cfg.tx_angles, &rc_eve)?.angles)?,
                Scheme::Baseline => world.baseline_link(&rc_bob)?,
            };
            let h_eve = world.eve_channel(scheme, &link, &rc_eve, EveAngle::Zero)?;
            for &p_dbm in &s.p_tx_dbm {
                let setup = SerSetup {
                    h_bob: link.h_bob.clone(),
                    h_eve: h_eve.clone(),
                    precoder: link.precoder.clone(),
                    constellation: world.constellation(),
                    rho: ph.rho_at(p_dbm),
                    sigma2: ph.sigma2(),
                    i_dc: ph.i_dc,
                    zeta: ph.zeta,
                    p_tx: crate::channel::dbm_to_watts(p_dbm),
                    eve_detection: s.eve_detection,
                };
                let r = ser_monte_carlo(&setup, s.trials, cfg.seed)?;
                rows.push(SerRow {
                    scheme: scheme.as_str(),
                    eve_index: k,
                    eve_x_m: pos[0],
                    eve_y_m: pos[1],
                    eve_z_m: pos[2],
                    p_tx_dbm: p_dbm,
                    ser_bob: r.ser_bob,
                    ser_eve: r.ser_eve,
                    errors_bob: r.errors_bob,
                    errors_eve: r.errors_eve,
                    trials: r.n_trials,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiEveRow {
    pub scheme: &'static str,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub r_bob_bps_hz: f64,
    pub r_eve_max_bps_hz: f64,
    pub r_secrecy_bps_hz: f64,
}

/// Fixed eavesdroppers plus one roaming over the grid; the secrecy rate is
/// taken against the strongest of them.
pub fn run_multi_eve(cfg: &ExperimentConfig) -> Result<Vec<MultiEveRow>> {
    let world = World::new(cfg)?;
    let me = &cfg.multi_eve;
    let rc_bob = world.bob(cfg.bob, 0)?;
    let fixed = me
        .fixed
        .iter()
        .enumerate()
        .map(|(k, e)| Ok((world.eve(e.position, k + 1, FIXED_EVE_STREAM + k as u64)?, e.angle)))
        .collect::<Result<Vec<_>>>()?;
    let points = me.grid.points();
    let mut rows = Vec::new();
    for scheme in [Scheme::Gnp, Scheme::Baseline] {
        if !cfg.schemes.contains(&scheme) {
            continue;
        }
        let part = points
            .par_iter()
            .enumerate()
            .map(|(i, &p)| -> Result<MultiEveRow> {
                let rc_eve = world.eve(p, 0, i as u64)?;
                let link = match scheme {
                    Scheme::Gnp => world.gnp_link(&rc_bob, &world.tx_angles(&cfg.tx_angles, &rc_eve)?.angles)?,
                    Scheme::Baseline => world.baseline_link(&rc_bob)?,
                };
                let mut eves = vec![world.eve_channel(scheme, &link, &rc_eve, me.roaming_angle)?];
                for (rc, angle) in &fixed {
                    eves.push(world.eve_channel(scheme, &link, rc, *angle)?);
                }
                let r = world.rates(&link, &eves)?;
                Ok(MultiEveRow {
                    scheme: scheme.as_str(),
                    x_m: p[0],
                    y_m: p[1],
                    z_m: p[2],
                    r_bob_bps_hz: r.r_bob,
                    r_eve_max_bps_hz: r.r_eve_max,
                    r_secrecy_bps_hz: r.r_secrecy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

/// Experiments runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Heatmap,
    GapHist,
    BobSweep,
    Ser,
    MultiEve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Heatmap => "heatmap",
            Experiment::GapHist => "gap-hist",
            Experiment::BobSweep => "bob-sweep",
            Experiment::Ser => "ser",
            Experiment::MultiEve => "multi-eve",
        }
    }
}

/// CSV files and a small JSON summary produced by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Value,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Runs `experiment` on the current rayon pool.
pub fn run_experiment(experiment: Experiment, cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = experiment.name();
    let out = match experiment {
        Experiment::Heatmap => {
            let rows = run_heatmap(cfg)?;
            let mut scen: Vec<&str> = rows.iter().map(|r| r.scenario).collect();
            scen.dedup();
            let summary = scen
                .iter()
                .map(|s| {
                    let v: Vec<f64> = rows.iter().filter(|r| r.scenario == *s).map(|r| r.r_secrecy_bps_hz).collect();
                    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                    (s.to_string(), serde_json::json!({ "median_r_secrecy": median(v), "min_r_secrecy": min }))
                })
                .collect::<serde_json::Map<_, _>>();
            RunOutput {
                files: vec![(format!("{name}.csv"), to_csv(&rows)?)],
                summary: summary.into(),
            }
        }
        Experiment::GapHist => {
            let h = run_gap_histogram(cfg)?;
            RunOutput {
                files: vec![
                    (format!("{name}.csv"), to_csv(&h.rows)?),
                    (format!("{name}-bins.csv"), to_csv(&h.bins)?),
                ],
                summary: serde_json::json!({
                    "max_mean_angle_diff_deg": h.max_angle_diff_deg(),
                    "abs_gap_p95_bps_hz": h.abs_gap_quantile(0.95),
                }),
            }
        }
        Experiment::BobSweep => {
            let rows = run_bob_sweep(cfg)?;
            RunOutput {
                files: vec![(format!("{name}.csv"), to_csv(&rows)?)],
                summary: serde_json::json!({ "rows": rows.len() }),
            }
        }
        Experiment::Ser => {
            let rows = run_ser(cfg)?;
            RunOutput {
                files: vec![(format!("{name}.csv"), to_csv(&rows)?)],
                summary: serde_json::json!({ "rows": rows.len(), "trials_per_point": cfg.ser.trials }),
            }
        }
        Experiment::MultiEve => {
            let rows = run_multi_eve(cfg)?;
            let per = |s: &str| median(rows.iter().filter(|r| r.scheme == s).map(|r| r.r_secrecy_bps_hz).collect());
            RunOutput {
                files: vec![(format!("{name}.csv"), to_csv(&rows)?)],
                summary: serde_json::json!({
                    "median_r_secrecy_gnp": per("gnp"),
                    "median_r_secrecy_baseline": per("baseline"),
                }),
            }
        }
    };
    Ok(out)
}

/// CSV bytes for `rows`, header first.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: String,
    pub tool_version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Value,
    pub config: ExperimentConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes each `(file name, bytes)` into `out_dir` plus `<experiment>.manifest.json`.
pub fn write_outputs(
    out_dir: &Path,
    experiment: &str,
    cfg: &ExperimentConfig,
    files: &[(String, Vec<u8>)],
    summary: serde_json::Value,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    for (name, bytes) in files {
        std::fs::write(out_dir.join(name), bytes)?;
        outputs.push(OutputFile {
            file: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.to_string(),
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        threads: cfg.threads,
        outputs,
        summary,
        config: cfg.clone(),
    };
    let path = out_dir.join(format!("{experiment}.manifest.json"));
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(path)
}
