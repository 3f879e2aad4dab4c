//! Shared data types and grid geometry.
//!
//! Grids are square with an even side. Sample `(i, j)` of a grid with
//! spacing `h` sits at `((i - side/2)·h, (j - side/2)·h)` relative to the
//! grid center, so index `side/2` is the origin. Storage is row-major with
//! `i` as the row index; `i` runs along the first coordinate (`u` or `x`).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// A point of the spatial-frequency plane, in arcsec⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UVPoint {
    pub u: f64,
    pub v: f64,
}

impl UVPoint {
    pub const ORIGIN: UVPoint = UVPoint { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn norm(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn distance(&self, other: &UVPoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// Bit pattern used to detect exact coincidences; `-0.0` and `0.0` map
    /// to the same key.
    pub(crate) fn key(&self) -> (u64, u64) {
        ((self.u + 0.0).to_bits(), (self.v + 0.0).to_bits())
    }
}

impl std::ops::Neg for UVPoint {
    type Output = UVPoint;

    fn neg(self) -> UVPoint {
        UVPoint::new(-self.u, -self.v)
    }
}

/// Returns the first pair of coinciding points, if any.
pub fn find_duplicate(points: &[UVPoint]) -> Option<(usize, usize)> {
    let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if let Some(&first) = seen.get(&p.key()) {
            return Some((first, i));
        }
        seen.insert(p.key(), i);
    }
    None
}

/// Scattered visibilities: the data of the inverse problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilitySet {
    points: Vec<UVPoint>,
    values: Vec<Complex64>,
    pub label: String,
}

impl VisibilitySet {
    pub fn new(points: Vec<UVPoint>, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate at index {i}")));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite value at index {i}")));
        }
        if let Some((first, second)) = find_duplicate(&points) {
            return Err(Error::DuplicateNode { first, second });
        }
        Ok(Self {
            points,
            values,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[UVPoint] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest frequency radius among the samples.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(UVPoint::norm).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn check_side(side: usize) -> Result<()> {
    if side < 2 || side % 2 != 0 {
        return Err(Error::GridSize(format!("side must be even and >= 2, got {side}")));
    }
    Ok(())
}

#[inline]
fn centered(index: usize, side: usize, spacing: f64) -> f64 {
    (index as f64 - (side / 2) as f64) * spacing
}

/// Regular real-valued image, pixel values in photon cm⁻² s⁻¹ arcsec⁻².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    side: usize,
    pixel_size: f64,
    center: (f64, f64),
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(side: usize, pixel_size: f64, center: (f64, f64), data: Vec<f64>) -> Result<Self> {
        check_side(side)?;
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(Error::InvalidInput(format!("pixel size must be > 0, got {pixel_size}")));
        }
        if data.len() != side * side {
            return Err(Error::GridSize(format!(
                "expected {} pixels, got {}",
                side * side,
                data.len()
            )));
        }
        Ok(Self {
            side,
            pixel_size,
            center,
            data,
        })
    }

    pub fn zeros(side: usize, pixel_size: f64, center: (f64, f64)) -> Result<Self> {
        Self::new(side, pixel_size, center, vec![0.0; side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    /// Physical coordinate of pixel `(i, j)` in arcsec.
    pub fn coordinate(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.center.0 + centered(i, self.side, self.pixel_size),
            self.center.1 + centered(j, self.side, self.pixel_size),
        )
    }

    /// Coordinates of every pixel, row-major.
    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        (0..self.side)
            .flat_map(|i| (0..self.side).map(move |j| (i, j)))
            .map(|(i, j)| self.coordinate(i, j))
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sum of pixel values times pixel area: total flux in photon cm⁻² s⁻¹.
    pub fn total_flux(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.pixel_size * self.pixel_size
    }

    /// Index and value of the brightest pixel.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let (k, v) = self.data.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
        );
        (k / self.side, k % self.side, v)
    }
}

/// Regular complex grid in the (u,v) plane, centered on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    side: usize,
    mesh: f64,
    data: Vec<Complex64>,
}

impl FrequencyGrid {
    pub fn new(side: usize, mesh: f64, data: Vec<Complex64>) -> Result<Self> {
        check_side(side)?;
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(Error::InvalidInput(format!("mesh must be > 0, got {mesh}")));
        }
        if data.len() != side * side {
            return Err(Error::GridSize(format!(
                "expected {} samples, got {}",
                side * side,
                data.len()
            )));
        }
        Ok(Self { side, mesh, data })
    }

    pub fn zeros(side: usize, mesh: f64) -> Result<Self> {
        Self::new(side, mesh, vec![Complex64::new(0.0, 0.0); side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.side + j]
    }

    pub fn coordinate(&self, i: usize, j: usize) -> UVPoint {
        UVPoint::new(centered(i, self.side, self.mesh), centered(j, self.side, self.mesh))
    }

    /// Coordinates of every sample, row-major.
    pub fn coordinates(&self) -> Vec<UVPoint> {
        grid_points(self.side, self.mesh)
    }

    /// Half-width of the sampled region along each axis.
    pub fn extent(&self) -> f64 {
        (self.side / 2) as f64 * self.mesh
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }
}

/// Coordinates of a centered `side × side` frequency grid, row-major.
pub fn grid_points(side: usize, mesh: f64) -> Vec<UVPoint> {
    (0..side)
        .flat_map(|i| (0..side).map(move |j| (i, j)))
        .map(|(i, j)| UVPoint::new(centered(i, side, mesh), centered(j, side, mesh)))
        .collect()
}

/// The compact frequency support `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SupportMask {
    /// Closed disk `‖q‖ ≤ radius`, radius in arcsec⁻¹.
    Disk {
        radius: f64,
    },
    Full,
}

impl SupportMask {
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("disk radius must be > 0, got {radius}")));
        }
        Ok(SupportMask::Disk { radius })
    }

    /// Disk radius, `None` for the full plane.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            SupportMask::Disk { radius } => Some(radius),
            SupportMask::Full => None,
        }
    }

    pub fn contains(&self, q: &UVPoint) -> bool {
        match *self {
            SupportMask::Disk { radius } => q.norm() <= radius,
            SupportMask::Full => true,
        }
    }

    /// Characteristic function of the support sampled on a centered grid
    /// of the given side and mesh, row-major.
    pub fn realize(&self, side: usize, mesh: f64) -> Vec<bool> {
        match self {
            SupportMask::Full => vec![true; side * side],
            SupportMask::Disk { .. } => grid_points(side, mesh).iter().map(|q| self.contains(q)).collect(),
        }
    }

    pub fn realize_on(&self, grid: &FrequencyGrid) -> Vec<bool> {
        self.realize(grid.side(), grid.mesh())
    }
}
