//! Indoor propagation: Lambertian line-of-sight gain plus single-bounce
//! reflections off discretized wall patches.
//!
//! The room spans `x ∈ [−W/2, W/2]`, `y ∈ [−D/2, D/2]`, `z ∈ [0, H]`. LEDs
//! point straight down and photodiodes straight up unless the scene overrides
//! the receiver normal.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scene {
    /// Room extents `[W, D, H]`, m.
    pub room: [f64; 3],
    /// LED positions, m.
    pub leds: Vec<[f64; 3]>,
    /// Photodiode normal (unit vector).
    pub rx_normal: [f64; 3],
    /// Photodiode field-of-view half angle, rad.
    pub fov: f64,
    /// Photodiode area, m².
    pub pd_area: f64,
    /// Lambertian order of the LEDs.
    pub lambertian_order: f64,
    /// Diffuse wall reflectivity.
    pub wall_reflectivity: f64,
    /// Nominal wall patch edge, m.
    pub wall_patch_size: f64,
    /// Optical wavelength used for delay phases, m.
    pub wavelength: f64,
}

impl Default for Scene {
    /// 20 m × 20 m × 4 m room with four ceiling LEDs at (±2.2, ±2.2, 4).
    fn default() -> Self {
        Self {
            room: [20.0, 20.0, 4.0],
            leds: vec![
                [2.2, 2.2, 4.0],
                [-2.2, 2.2, 4.0],
                [-2.2, -2.2, 4.0],
                [2.2, -2.2, 4.0],
            ],
            rx_normal: [0.0, 0.0, 1.0],
            fov: FRAC_PI_2,
            pd_area: 1e-4,
            lambertian_order: 1.0,
            wall_reflectivity: 0.8,
            wall_patch_size: 1.0,
            wavelength: 550e-9,
        }
    }
}

/// One reflecting wall element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPatch {
    pub center: Point3<f64>,
    /// Inward-facing unit normal.
    pub normal: Vector3<f64>,
    pub area: f64,
}

/// Gain and delay phase of one propagation path from transmitter `transmitter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPath {
    pub transmitter: usize,
    /// 0 for line of sight, 1.. for reflections.
    pub path_index: usize,
    /// Power gain (dimensionless).
    pub gain: f64,
    /// Propagation-delay phase in `[0, 2π)`, rad.
    pub delay_phase: f64,
}

impl Scene {
    pub fn n_tx(&self) -> usize {
        self.leds.len()
    }

    pub fn led(&self, m: usize) -> Point3<f64> {
        Point3::from(self.leds[m])
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        let [w, d, h] = self.room;
        let eps = 1e-9;
        p.x.abs() <= w / 2.0 + eps && p.y.abs() <= d / 2.0 + eps && p.z >= -eps && p.z <= h + eps
    }

    pub fn validate(&self) -> Result<()> {
        let [w, d, h] = self.room;
        if !(w > 0.0 && d > 0.0 && h > 0.0) {
            return Err(Error::config("scene.room", "extents must be positive"));
        }
        if self.leds.is_empty() {
            return Err(Error::config("scene.leds", "at least one LED is required"));
        }
        for (i, led) in self.leds.iter().enumerate() {
            if !self.contains(&Point3::from(*led)) {
                return Err(Error::config(
                    format!("scene.leds[{i}]"),
                    format!("{led:?} lies outside the room"),
                ));
            }
        }
        let n = Vector3::from(self.rx_normal);
        if (n.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::config("scene.rx_normal", "must be a unit vector"));
        }
        if !(self.fov > 0.0 && self.fov <= FRAC_PI_2) {
            return Err(Error::config("scene.fov", "must lie in (0, π/2]"));
        }
        if !(self.pd_area > 0.0) {
            return Err(Error::config("scene.pd_area", "must be positive"));
        }
        if !(self.lambertian_order >= 0.0) {
            return Err(Error::config("scene.lambertian_order", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.wall_reflectivity) {
            return Err(Error::config("scene.wall_reflectivity", "must lie in [0, 1]"));
        }
        if !(self.wall_patch_size > 0.0) {
            return Err(Error::config("scene.wall_patch_size", "must be positive"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::config("scene.wavelength", "must be positive"));
        }
        Ok(())
    }

    /// Splits the four walls into a grid of patches no larger than `wall_patch_size`.
    pub fn wall_patches(&self) -> Vec<WallPatch> {
        let [w, d, h] = self.room;
        let size = self.wall_patch_size;
        let nz = (h / size).round().max(1.0) as usize;
        let dz = h / nz as f64;
        let mut patches = Vec::new();
        // (fixed coordinate axis, fixed value, inward normal, along-wall length)
        let walls = [
            (0usize, -w / 2.0, Vector3::new(1.0, 0.0, 0.0), d),
            (0, w / 2.0, Vector3::new(-1.0, 0.0, 0.0), d),
            (1, -d / 2.0, Vector3::new(0.0, 1.0, 0.0), w),
            (1, d / 2.0, Vector3::new(0.0, -1.0, 0.0), w),
        ];
        for (axis, fixed, normal, length) in walls {
            let ns = (length / size).round().max(1.0) as usize;
            let ds = length / ns as f64;
            for i in 0..ns {
                let s = -length / 2.0 + (i as f64 + 0.5) * ds;
                for k in 0..nz {
                    let z = (k as f64 + 0.5) * dz;
                    let center = if axis == 0 {
                        Point3::new(fixed, s, z)
                    } else {
                        Point3::new(s, fixed, z)
                    };
                    patches.push(WallPatch {
                        center,
                        normal,
                        area: ds * dz,
                    });
                }
            }
        }
        patches
    }

    fn led_normal() -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -1.0)
    }

    fn rx_normal(&self) -> Vector3<f64> {
        Vector3::from(self.rx_normal)
    }

    fn lambertian(&self, cos_irradiance: f64) -> f64 {
        if cos_irradiance <= 0.0 {
            0.0
        } else {
            cos_irradiance.powf(self.lambertian_order)
        }
    }

    /// Cosine of the photodiode incidence angle if inside the field of view.
    fn fov_cos(&self, cos_incidence: f64) -> Option<f64> {
        let cutoff = self.fov.cos().max(0.0);
        if cos_incidence > 0.0 && cos_incidence >= cutoff - 1e-15 {
            Some(cos_incidence)
        } else {
            None
        }
    }
}

/// Line-of-sight DC gain `(m+1)·A·cos^m(φ)·cos(ψ)/(2πd²)`, zero outside the FOV.
pub fn los_gain(scene: &Scene, led: &Point3<f64>, rx: &Point3<f64>) -> Result<f64> {
    let v = rx - led;
    let d2 = v.norm_squared();
    if d2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let d = d2.sqrt();
    let cos_phi = Scene::led_normal().dot(&v) / d;
    let Some(cos_psi) = scene.fov_cos(scene.rx_normal().dot(&(-v)) / d) else {
        return Ok(0.0);
    };
    let m = scene.lambertian_order;
    Ok((m + 1.0) * scene.pd_area * scene.lambertian(cos_phi) * cos_psi / (2.0 * PI * d2))
}

/// `2π·L/λ` wrapped into `[0, 2π)`, with `L` the (possibly reflected) path length.
pub fn delay_phase(led: &Point3<f64>, via: Option<&Point3<f64>>, rx: &Point3<f64>, wavelength: f64) -> f64 {
    let length = match via {
        Some(p) => (p - led).norm() + (rx - p).norm(),
        None => (rx - led).norm(),
    };
    // Reduce the length modulo λ first to keep precision for long paths.
    let cycles = (length / wavelength).fract();
    (2.0 * PI * cycles).rem_euclid(2.0 * PI)
}

fn patch_gain(scene: &Scene, led: &Point3<f64>, patch: &WallPatch, rx: &Point3<f64>) -> f64 {
    let v1 = patch.center - led;
    let v2 = rx - patch.center;
    let (d1, d2) = (v1.norm(), v2.norm());
    if d1 == 0.0 || d2 == 0.0 {
        return 0.0;
    }
    let cos_phi1 = Scene::led_normal().dot(&v1) / d1;
    let cos_psi1 = patch.normal.dot(&(-v1)) / d1;
    let cos_phi2 = patch.normal.dot(&v2) / d2;
    if cos_phi1 <= 0.0 || cos_psi1 <= 0.0 || cos_phi2 <= 0.0 {
        return 0.0;
    }
    let Some(cos_psi2) = scene.fov_cos(scene.rx_normal().dot(&(-v2)) / d2) else {
        return 0.0;
    };
    let m = scene.lambertian_order;
    (m + 1.0) * scene.pd_area * scene.wall_reflectivity * patch.area
        * scene.lambertian(cos_phi1)
        * cos_psi1
        * cos_phi2
        * cos_psi2
        / (2.0 * PI * PI * d1 * d1 * d2 * d2)
}

/// Single-bounce wall reflections with non-zero gain, numbered from 1.
pub fn nlos_paths(scene: &Scene, transmitter: usize, led: &Point3<f64>, rx: &Point3<f64>) -> Vec<ChannelPath> {
    nlos_paths_with(scene, &scene.wall_patches(), transmitter, led, rx)
}

/// As [`nlos_paths`], reusing a precomputed patch list.
pub fn nlos_paths_with(
    scene: &Scene,
    patches: &[WallPatch],
    transmitter: usize,
    led: &Point3<f64>,
    rx: &Point3<f64>,
) -> Vec<ChannelPath> {
    if scene.wall_reflectivity == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for patch in patches {
        let g = patch_gain(scene, led, patch, rx);
        if g > 0.0 {
            out.push(ChannelPath {
                transmitter,
                path_index: out.len() + 1,
                gain: g,
                delay_phase: delay_phase(led, Some(&patch.center), rx, scene.wavelength),
            });
        }
    }
    out
}

/// All paths from every LED to `rx`: per transmitter, LOS first (kept even at
/// zero gain so that index 0 is always the direct path), then reflections.
pub fn receiver_paths(scene: &Scene, rx: &Point3<f64>) -> Result<Vec<Vec<ChannelPath>>> {
    let patches = scene.wall_patches();
    receiver_paths_with(scene, &patches, rx)
}

pub fn receiver_paths_with(
    scene: &Scene,
    patches: &[WallPatch],
    rx: &Point3<f64>,
) -> Result<Vec<Vec<ChannelPath>>> {
    (0..scene.n_tx())
        .map(|m| {
            let led = scene.led(m);
            let mut paths = vec![ChannelPath {
                transmitter: m,
                path_index: 0,
                gain: los_gain(scene, &led, rx)?,
                delay_phase: delay_phase(&led, None, rx, scene.wavelength),
            }];
            paths.extend(nlos_paths_with(scene, patches, m, &led, rx));
            Ok(paths)
        })
        .collect()
}
