//! Chiroptical response of a gold-nanoparticle plate.
//!
//! A plate acts on (LCP, RCP) amplitudes as `diag(√ā_L, √ā_R·e^{jΔφ})`, where
//! `ā = 1 − a` is the transmittance left after absorption `a`. Responses are
//! drawn per (transmitter, path) from configured absorption ranges, or read
//! from a table of measured triples.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;

use crate::error::{Error, Result};
use crate::polarization::{Basis, JonesMatrix};

/// Minimum `|ā_L − ā_R|` for a response to count as chiral.
pub const CHIRAL_MARGIN: f64 = 1e-6;

/// Lower bound of the phase retardation difference, rad.
pub const DELTA_PHI_LOWER: f64 = 0.6144;
/// Upper bound of the phase retardation difference, rad.
pub const DELTA_PHI_UPPER: f64 = 0.8308;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnpPathResponse {
    pub a_bar_l: f64,
    pub a_bar_r: f64,
    pub delta_phi: f64,
}

impl GnpPathResponse {
    pub fn new(a_bar_l: f64, a_bar_r: f64, delta_phi: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !ok(a_bar_l) || !ok(a_bar_r) {
            return Err(Error::InvalidResponse(format!(
                "transmittances ({a_bar_l}, {a_bar_r}) must lie in [0, 1]"
            )));
        }
        if !delta_phi.is_finite() {
            return Err(Error::InvalidResponse("non-finite retardation".into()));
        }
        Ok(Self {
            a_bar_l,
            a_bar_r,
            delta_phi,
        })
    }

    /// A transparent, non-retarding plate (used by the no-plate baseline and tests).
    pub fn transparent() -> Self {
        Self {
            a_bar_l: 1.0,
            a_bar_r: 1.0,
            delta_phi: 0.0,
        }
    }

    pub fn is_chiral(&self) -> bool {
        (self.a_bar_l - self.a_bar_r).abs() >= CHIRAL_MARGIN
    }

    /// `√(ā_L/ā_R) + √(ā_R/ā_L)`, strictly above 2 for a chiral plate.
    pub fn u(&self) -> f64 {
        let ratio = (self.a_bar_l / self.a_bar_r).sqrt();
        ratio + 1.0 / ratio
    }
}

/// Closed interval `[lo, hi]`.
pub type Interval = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnpPropertyRanges {
    /// Absorption `a_L` range.
    pub a_l: Interval,
    /// Absorption `a_R` range.
    pub a_r: Interval,
    /// `[Δφ_L, Δφ_U]`, rad.
    pub delta_phi: Interval,
}

impl GnpPropertyRanges {
    /// Absorption ranges toward the legitimate receiver.
    pub fn bob() -> Self {
        Self {
            a_l: [0.10, 0.11],
            a_r: [0.25, 0.26],
            delta_phi: [DELTA_PHI_LOWER, DELTA_PHI_UPPER],
        }
    }

    /// Absorption ranges toward an eavesdropper.
    pub fn eve() -> Self {
        Self {
            a_l: [0.1, 0.4],
            a_r: [0.25, 0.75],
            delta_phi: [DELTA_PHI_LOWER, DELTA_PHI_UPPER],
        }
    }

    /// Collapses the retardation range to a single value.
    pub fn with_delta_phi(mut self, lo: f64, hi: f64) -> Self {
        self.delta_phi = [lo, hi];
        self
    }

    pub fn delta_phi_mid(&self) -> f64 {
        0.5 * (self.delta_phi[0] + self.delta_phi[1])
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        for (name, [lo, hi]) in [("a_l", self.a_l), ("a_r", self.a_r)] {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::config(
                    format!("{field}.{name}"),
                    format!("interval [{lo}, {hi}] must be ordered and inside [0, 1]"),
                ));
            }
            if hi >= 1.0 {
                return Err(Error::config(
                    format!("{field}.{name}"),
                    "absorption 1 leaves no transmitted light",
                ));
            }
        }
        let [lo, hi] = self.delta_phi;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::config(
                format!("{field}.delta_phi"),
                format!("bounds [{lo}, {hi}] must be finite and ordered"),
            ));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: Interval) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// `diag(√ā_L, √ā_R·e^{jΔφ})` in the (LCP, RCP) basis.
pub fn plate_matrix(r: &GnpPathResponse) -> JonesMatrix {
    let m = Matrix2::new(
        Complex64::new(r.a_bar_l.sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(r.a_bar_r.sqrt(), r.delta_phi),
    );
    JonesMatrix::new(m, Basis::Circular)
}

/// Recovers a response from the plate's output for the probe `[1, 1]ᵀ`.
pub fn extract_properties(e_l: Complex64, e_r: Complex64) -> Result<GnpPathResponse> {
    let (ml, mr) = (e_l.norm(), e_r.norm());
    if ml == 0.0 || mr == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    if ml > 1.0 + 1e-12 || mr > 1.0 + 1e-12 {
        return Err(Error::InvalidResponse(format!(
            "amplitudes ({ml}, {mr}) exceed unity"
        )));
    }
    let delta = wrap_to_pi(e_r.arg() - e_l.arg());
    GnpPathResponse::new(
        e_l.norm_sqr().min(1.0),
        e_r.norm_sqr().min(1.0),
        delta,
    )
}

/// Wraps into `(−π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Draws absorption factors and retardation uniformly from `ranges`.
///
/// Draws with `|ā_L − ā_R| < CHIRAL_MARGIN` are rejected and redrawn, so every
/// returned response is chiral.
pub fn sample_path_response<R: Rng + ?Sized>(
    ranges: &GnpPropertyRanges,
    rng: &mut R,
) -> GnpPathResponse {
    loop {
        let a_l = uniform(rng, ranges.a_l);
        let a_r = uniform(rng, ranges.a_r);
        let delta_phi = uniform(rng, ranges.delta_phi);
        let r = GnpPathResponse {
            a_bar_l: 1.0 - a_l,
            a_bar_r: 1.0 - a_r,
            delta_phi,
        };
        if r.is_chiral() {
            return r;
        }
        if ranges.a_l[0] == ranges.a_l[1] && ranges.a_r[0] == ranges.a_r[1] {
            // Degenerate point ranges cannot be made chiral by redrawing.
            return r;
        }
    }
}

/// Measured per-path responses keyed by (transmitter, path index).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathResponseTable {
    entries: BTreeMap<(usize, usize), GnpPathResponse>,
}

#[derive(Debug, Deserialize)]
struct TableRow {
    transmitter: usize,
    path: usize,
    a_bar_l: f64,
    a_bar_r: f64,
    delta_phi: f64,
}

impl PathResponseTable {
    /// Reads CSV with header `transmitter,path,a_bar_l,a_bar_r,delta_phi`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries = BTreeMap::new();
        for row in rdr.deserialize() {
            let row: TableRow = row?;
            let resp = GnpPathResponse::new(row.a_bar_l, row.a_bar_r, row.delta_phi)?;
            if entries.insert((row.transmitter, row.path), resp).is_some() {
                return Err(Error::Table(format!(
                    "duplicate entry for transmitter {} path {}",
                    row.transmitter, row.path
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, transmitter: usize, path: usize) -> Option<&GnpPathResponse> {
        self.entries.get(&(transmitter, path))
    }

    pub fn insert(&mut self, transmitter: usize, path: usize, r: GnpPathResponse) {
        self.entries.insert((transmitter, path), r);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Where per-path plate responses come from when a receiver channel is built.
pub enum ResponseSource<'a, R: Rng + ?Sized> {
    Sampled {
        ranges: &'a GnpPropertyRanges,
        rng: &'a mut R,
    },
    /// Measured values; paths missing from the table fall back to `fallback`.
    Table {
        table: &'a PathResponseTable,
        fallback: Option<(&'a GnpPropertyRanges, &'a mut R)>,
    },
    /// No plate (transparent response on every path).
    Transparent,
}

impl<R: Rng + ?Sized> ResponseSource<'_, R> {
    pub fn response(&mut self, transmitter: usize, path: usize) -> Result<GnpPathResponse> {
        match self {
            ResponseSource::Sampled { ranges, rng } => Ok(sample_path_response(ranges, *rng)),
            ResponseSource::Table { table, fallback } => {
                if let Some(r) = table.get(transmitter, path) {
                    return Ok(*r);
                }
                match fallback {
                    Some((ranges, rng)) => Ok(sample_path_response(ranges, *rng)),
                    None => Err(Error::Table(format!(
                        "no entry for transmitter {transmitter} path {path}"
                    ))),
                }
            }
            ResponseSource::Transparent => Ok(GnpPathResponse::transparent()),
        }
    }
}

/// Default gold price used for the plate-cost estimate, USD per gram.
pub const DEFAULT_GOLD_PRICE_USD_PER_G: f64 = 52.5;
/// Density of gold, kg/m³.
pub const GOLD_DENSITY: f64 = 19_300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateGeometry {
    /// Plate area, m².
    pub plate_area: f64,
    /// Area of one hexagonal cell, m².
    pub hexagon_area: f64,
    /// Particles per hexagonal cell.
    pub gnps_per_hexagon: f64,
    /// Volume of one particle, m³.
    pub gnp_volume: f64,
    /// kg/m³.
    pub gold_density: f64,
    /// USD per gram.
    pub gold_price: f64,
}

impl Default for PlateGeometry {
    /// A 1 cm × 1 cm plate with a hexagonal pattern of 200 nm particles.
    fn default() -> Self {
        Self {
            plate_area: 1e-4,
            hexagon_area: 12.0 * 3f64.sqrt() * 1e-14,
            gnps_per_hexagon: 3.0,
            gnp_volume: (200e-9f64).powi(3),
            gold_density: GOLD_DENSITY,
            gold_price: DEFAULT_GOLD_PRICE_USD_PER_G,
        }
    }
}

impl PlateGeometry {
    /// Total particle volume, m³.
    pub fn total_volume(&self) -> f64 {
        self.plate_area / self.hexagon_area * self.gnps_per_hexagon * self.gnp_volume
    }
}

/// Gold cost of one plate in USD.
pub fn plate_cost(g: &PlateGeometry) -> f64 {
    g.total_volume() * g.gold_density * 1000.0 * g.gold_price
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::JonesVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn plate_matrix_examples() {
        let id = plate_matrix(&GnpPathResponse::transparent()).matrix;
        assert!((id - Matrix2::identity()).iter().all(|c| c.norm() < 1e-15));

        let r = GnpPathResponse::new(0.9, 0.75, 0.7226).unwrap();
        let m = plate_matrix(&r).matrix;
        assert!((m[(0, 0)].re - 0.9f64.sqrt()).abs() < 1e-15);
        assert!((m[(0, 0)].re - 0.9487).abs() < 1e-4);
        assert!((m[(1, 1)].norm() - 0.8660).abs() < 1e-4);
        assert!((m[(1, 1)].arg() - 0.7226).abs() < 1e-15);
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn extract_examples() {
        let r = extract_properties(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(r, GnpPathResponse::transparent());

        let r = extract_properties(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)).unwrap();
        assert!((r.a_bar_l - 0.25).abs() < 1e-15);
        assert!((r.a_bar_r - 0.25).abs() < 1e-15);
        assert!((r.delta_phi - FRAC_PI_2).abs() < 1e-15);

        assert!(matches!(
            extract_properties(Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)),
            Err(Error::ZeroAmplitude)
        ));
    }

    #[test]
    fn extraction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = GnpPathResponse::new(
                rng.random_range(0.01..=1.0),
                rng.random_range(0.01..=1.0),
                rng.random_range(-PI..PI),
            )
            .unwrap();
            let probe = JonesVector::circular(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            let out = plate_matrix(&r).apply(&probe);
            let back = extract_properties(out.first(), out.second()).unwrap();
            assert!((back.a_bar_l - r.a_bar_l).abs() < 1e-12);
            assert!((back.a_bar_r - r.a_bar_r).abs() < 1e-12);
            assert!(wrap_to_pi(back.delta_phi - r.delta_phi).abs() < 1e-12);
            let m = plate_matrix(&r).matrix;
            assert!(m[(0, 1)].norm() == 0.0 && m[(1, 0)].norm() == 0.0);
            assert!(m[(0, 0)].norm() <= 1.0 && m[(1, 1)].norm() <= 1.0);
        }
    }

    #[test]
    fn sampling_respects_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bob = GnpPropertyRanges::bob();
        for _ in 0..2000 {
            let r = sample_path_response(&bob, &mut rng);
            assert!((0.89..=0.90).contains(&r.a_bar_l), "{}", r.a_bar_l);
            assert!((0.74..=0.75).contains(&r.a_bar_r), "{}", r.a_bar_r);
            assert!((DELTA_PHI_LOWER..=DELTA_PHI_UPPER).contains(&r.delta_phi));
            assert!(r.u() > 2.0);
        }
        let eve = GnpPropertyRanges::eve();
        for _ in 0..2000 {
            let r = sample_path_response(&eve, &mut rng);
            assert!((0.6..=0.9).contains(&r.a_bar_l));
            assert!((0.25..=0.75).contains(&r.a_bar_r));
            assert!(r.is_chiral() && r.u() > 2.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16)
                .map(|_| sample_path_response(&GnpPropertyRanges::eve(), &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(99), draw(99));
        assert_ne!(draw(99), draw(100));
    }

    #[test]
    fn plate_cost_examples() {
        let g = PlateGeometry::default();
        let cents = plate_cost(&g) * 100.0;
        assert!((cents - 1.17).abs() / 1.17 < 0.05, "{cents}");

        let none = PlateGeometry {
            gnps_per_hexagon: 0.0,
            ..g
        };
        assert_eq!(plate_cost(&none), 0.0);

        let double = PlateGeometry {
            plate_area: 2.0 * g.plate_area,
            ..g
        };
        assert!((plate_cost(&double) - 2.0 * plate_cost(&g)).abs() < 1e-18);
    }

    #[test]
    fn table_parsing_and_lookup() {
        let csv = "transmitter,path,a_bar_l,a_bar_r,delta_phi\n0,0,0.9,0.75,0.7\n1,3,0.8,0.6,0.65\n";
        let t = PathResponseTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(1, 3).unwrap().a_bar_r, 0.6);

        let dup = "transmitter,path,a_bar_l,a_bar_r,delta_phi\n0,0,0.9,0.75,0.7\n0,0,0.8,0.6,0.65\n";
        assert!(PathResponseTable::from_csv(dup.as_bytes()).is_err());
        let bad = "transmitter,path,a_bar_l,a_bar_r,delta_phi\n0,0,1.9,0.75,0.7\n";
        assert!(PathResponseTable::from_csv(bad.as_bytes()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ranges = GnpPropertyRanges::bob();
        let mut src = ResponseSource::Table {
            table: &t,
            fallback: Some((&ranges, &mut rng)),
        };
        assert_eq!(src.response(0, 0).unwrap().a_bar_l, 0.9);
        assert!(src.response(2, 2).unwrap().a_bar_l >= 0.89);
        let mut strict: ResponseSource<'_, ChaCha8Rng> = ResponseSource::Table {
            table: &t,
            fallback: None,
        };
        assert!(strict.response(2, 2).is_err());
    }
}
