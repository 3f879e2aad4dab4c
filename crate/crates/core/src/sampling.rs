//! (u,v) sampling geometries: Fibonacci disk lattice, RHESSI-like and
//! STIX-like concentric rings.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UVPoint;

/// Outermost RHESSI ring radius (detector 1), arcsec⁻¹.
pub const RHESSI_MAX_RADIUS: f64 = 2.21e-1;
/// Innermost and outermost STIX ring radii, arcsec⁻¹.
pub const STIX_MIN_RADIUS: f64 = 2.79e-3;
pub const STIX_MAX_RADIUS: f64 = 7.02e-2;
pub const STIX_RINGS: usize = 10;

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SamplingPattern {
    Fibonacci {
        n: usize,
        radius: f64,
    },
    RhessiRings {
        #[serde(default = "default_first_detector")]
        first_detector: usize,
        #[serde(default = "default_last_detector")]
        last_detector: usize,
        #[serde(default = "default_rhessi_per_ring")]
        per_ring: usize,
        #[serde(default)]
        jitter_seed: Option<u64>,
    },
    StixRings {
        #[serde(default = "default_stix_per_ring")]
        per_ring: usize,
        #[serde(default)]
        jitter_seed: Option<u64>,
    },
}

fn default_first_detector() -> usize {
    3
}
fn default_last_detector() -> usize {
    9
}
fn default_rhessi_per_ring() -> usize {
    34
}
fn default_stix_per_ring() -> usize {
    6
}

impl SamplingPattern {
    pub fn stix() -> Self {
        SamplingPattern::StixRings {
            per_ring: default_stix_per_ring(),
            jitter_seed: None,
        }
    }

    pub fn rhessi() -> Self {
        SamplingPattern::RhessiRings {
            first_detector: default_first_detector(),
            last_detector: default_last_detector(),
            per_ring: default_rhessi_per_ring(),
            jitter_seed: None,
        }
    }

    pub fn generate(&self) -> Result<Vec<UVPoint>> {
        match *self {
            SamplingPattern::Fibonacci { n, radius } => fibonacci_nodes(n, radius),
            SamplingPattern::RhessiRings {
                first_detector,
                last_detector,
                per_ring,
                jitter_seed,
            } => {
                check_ring_count(per_ring)?;
                let radii = rhessi_radii(first_detector..=last_detector)?;
                Ok(ring_nodes(&radii, per_ring, jitter_seed))
            }
            SamplingPattern::StixRings { per_ring, jitter_seed } => {
                check_ring_count(per_ring)?;
                Ok(ring_nodes(&stix_radii(), per_ring, jitter_seed))
            }
        }
    }
}

/// `n` points of a Fibonacci (golden-angle) spiral lattice on the disk of
/// the given radius: `r_k = radius·√((k−½)/n)`, `θ_k = 2πk/φ²`.
pub fn fibonacci_nodes(n: usize, radius: f64) -> Result<Vec<UVPoint>> {
    if n == 0 {
        return Err(Error::EmptyPattern);
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be > 0, got {radius}")));
    }
    let golden_angle = 2.0 * PI / (GOLDEN_RATIO * GOLDEN_RATIO);
    Ok((1..=n)
        .map(|k| {
            let r = radius * ((k as f64 - 0.5) / n as f64).sqrt();
            let theta = golden_angle * k as f64;
            UVPoint::new(r * theta.cos(), r * theta.sin())
        })
        .collect())
}

/// Ring radius of RHESSI detector `k` (1..=9): `0.221 / √3^(k−1)`.
pub fn rhessi_radius(detector: usize) -> Result<f64> {
    if !(1..=9).contains(&detector) {
        return Err(Error::InvalidInput(format!(
            "RHESSI detector index must be in 1..=9, got {detector}"
        )));
    }
    Ok(RHESSI_MAX_RADIUS / 3f64.sqrt().powi(detector as i32 - 1))
}

pub fn rhessi_radii(detectors: RangeInclusive<usize>) -> Result<Vec<f64>> {
    if detectors.is_empty() {
        return Err(Error::EmptyPattern);
    }
    detectors.map(rhessi_radius).collect()
}

/// Ten radii geometrically spaced between the published STIX endpoints.
pub fn stix_radii() -> Vec<f64> {
    let ratio = stix_ratio();
    (0..STIX_RINGS)
        .map(|k| STIX_MIN_RADIUS * ratio.powi(k as i32))
        .collect()
}

pub fn stix_ratio() -> f64 {
    (STIX_MAX_RADIUS / STIX_MIN_RADIUS).powf(1.0 / (STIX_RINGS - 1) as f64)
}

fn check_ring_count(per_ring: usize) -> Result<()> {
    if per_ring < 2 || per_ring % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "points per ring must be even and >= 2 to keep conjugate symmetry, got {per_ring}"
        )));
    }
    Ok(())
}

/// Equally spaced points on each ring. With a jitter seed every ring is
/// rotated by its own random angle; the rotation is rigid so the set stays
/// closed under `p ↦ −p`.
pub fn ring_nodes(radii: &[f64], per_ring: usize, jitter_seed: Option<u64>) -> Vec<UVPoint> {
    let mut rng = jitter_seed.map(ChaCha8Rng::seed_from_u64);
    let step = 2.0 * PI / per_ring as f64;
    let mut points = Vec::with_capacity(radii.len() * per_ring);
    for &r in radii {
        let phase = rng.as_mut().map_or(0.0, |g| g.random_range(0.0..step));
        let half = per_ring / 2;
        let ring_start = points.len();
        for m in 0..half {
            let theta = phase + step * m as f64;
            points.push(UVPoint::new(r * theta.cos(), r * theta.sin()));
        }
        // second half is the exact negation of the first
        for m in 0..half {
            let p = points[ring_start + m];
            points.push(-p);
        }
    }
    points
}
