//! Square 2-D FFTs on row-major buffers, plus the centered (origin at index
//! `side/2`) variants used by the physical transforms.
//!
//! Physical convention, for an image of pixel size `Δx` and a frequency grid
//! of mesh `Δu = 1/(side·Δx)`:
//!
//! * forward `V(u) = Δx² Σ I(x) exp(+2πi u·x)`,
//! * inverse `I(x) = Δu² Σ V(u) exp(−2πi u·x)`.
//!
//! In index terms the forward transform is unnormalized and the inverse
//! carries `1/side²`, with the pixel area attached so flux is preserved.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{Complex64, FrequencyGrid, ImageGrid};

/// Sign of the exponent of the transform kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

pub struct Fft2 {
    side: usize,
    positive: Arc<dyn Fft<f64>>,
    negative: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("side", &self.side).finish()
    }
}

impl Fft2 {
    pub fn new(side: usize) -> Self {
        let mut planner = FftPlanner::new();
        // rustfft's forward transform uses exp(−2πi·), its inverse exp(+2πi·)
        let negative = planner.plan_fft_forward(side);
        let positive = planner.plan_fft_inverse(side);
        Self {
            side,
            positive,
            negative,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    fn rows(&self, data: &mut [Complex64], sign: Sign) {
        let plan = match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        };
        complex_rows(plan.as_ref(), data);
    }

    /// Unnormalized 2-D DFT in place, native (unshifted) index layout.
    /// `work` must have the same length as `data`.
    pub fn process(&self, data: &mut [Complex64], work: &mut [Complex64], sign: Sign) {
        let n = self.side;
        assert_eq!(data.len(), n * n, "buffer does not match FFT side");
        assert_eq!(work.len(), n * n, "work buffer does not match FFT side");
        self.rows(data, sign);
        transpose::transpose(data, work, n, n);
        self.rows(work, sign);
        transpose::transpose(work, data, n, n);
    }

    /// Allocating convenience wrapper around [`Fft2::process`].
    pub fn transform(&self, data: &mut [Complex64], sign: Sign) {
        let mut work = vec![Complex64::new(0.0, 0.0); data.len()];
        self.process(data, &mut work, sign);
    }

    /// DFT with the origin at index `side/2` on both input and output:
    /// `out[k] = Σ_m in[m] exp(±2πi (k − side/2)(m − side/2)/side)`.
    pub fn centered(&self, data: &mut [Complex64], sign: Sign) {
        swap_quadrants(data, self.side);
        self.transform(data, sign);
        swap_quadrants(data, self.side);
    }
}

/// Runs `plan` over every consecutive row of `data`.
fn complex_rows(plan: &dyn Fft<f64>, data: &mut [Complex64]) {
    let len = plan.len();
    let scratch_len = plan.get_inplace_scratch_len();
    data.par_chunks_mut(len * 8).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, rows| plan.process_with_scratch(rows, scratch),
    );
}

/// Unnormalized 2-D transforms between a real `side × side` image and the
/// non-redundant half of its spectrum, both in native layout (origin at
/// index 0).
///
/// The half spectrum is stored transposed: `half[l * side + k]` is the
/// coefficient of frequency index `(k, l)` for `l = 0..=side/2`, where `k`
/// runs along the first image axis.
pub struct RealFft2 {
    side: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    cols_forward: Arc<dyn Fft<f64>>,
    cols_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealFft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFft2").field("side", &self.side).finish()
    }
}

impl RealFft2 {
    pub fn new(side: usize) -> Self {
        let mut real = RealFftPlanner::new();
        let mut complex = FftPlanner::new();
        Self {
            side,
            r2c: real.plan_fft_forward(side),
            c2r: real.plan_fft_inverse(side),
            cols_forward: complex.plan_fft_forward(side),
            cols_inverse: complex.plan_fft_inverse(side),
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of stored half-spectrum columns, `side/2 + 1`.
    pub fn half_width(&self) -> usize {
        self.side / 2 + 1
    }

    pub fn half_len(&self) -> usize {
        self.side * self.half_width()
    }

    /// `half = Σ image · exp(−2πi ·)`. `image` is used as scratch and
    /// `work` must have [`RealFft2::half_len`] elements.
    pub fn forward(&self, image: &mut [f64], half: &mut [Complex64], work: &mut [Complex64]) {
        let (n, h) = (self.side, self.half_width());
        assert_eq!(image.len(), n * n, "image does not match FFT side");
        assert_eq!(half.len(), n * h, "spectrum does not match FFT side");
        assert_eq!(work.len(), n * h, "work buffer does not match FFT side");
        let scratch_len = self.r2c.get_scratch_len();
        image.par_chunks_mut(n).zip(work.par_chunks_mut(h)).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, (row, out)| {
                self.r2c
                    .process_with_scratch(row, out, scratch)
                    .expect("buffer sizes checked above");
            },
        );
        // gather column blocks of `work` into rows of `half` and transform
        let plan = &self.cols_forward;
        let scratch_len = plan.get_inplace_scratch_len();
        let work = &*work;
        half.par_chunks_mut(COLUMN_BLOCK * n).enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, (b, block)| {
                let l0 = b * COLUMN_BLOCK;
                let width = block.len() / n;
                for i in 0..n {
                    let src = &work[i * h + l0..i * h + l0 + width];
                    for (dl, &z) in src.iter().enumerate() {
                        block[dl * n + i] = z;
                    }
                }
                plan.process_with_scratch(block, scratch);
            },
        );
    }

    /// `image = Σ half · exp(+2πi ·)` over the Hermitian completion of
    /// `half`. `half` is used as scratch.
    pub fn inverse(&self, half: &mut [Complex64], image: &mut [f64], work: &mut [Complex64]) {
        let (n, h) = (self.side, self.half_width());
        assert_eq!(image.len(), n * n, "image does not match FFT side");
        assert_eq!(half.len(), n * h, "spectrum does not match FFT side");
        assert_eq!(work.len(), n * h, "work buffer does not match FFT side");
        complex_rows(self.cols_inverse.as_ref(), half);
        // gather row blocks of the image from columns of `half` and transform
        let half = &*half;
        let scratch_len = self.c2r.get_scratch_len();
        work.par_chunks_mut(COLUMN_BLOCK * h)
            .zip(image.par_chunks_mut(COLUMN_BLOCK * n))
            .enumerate()
            .for_each_init(
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, (b, (rows, out))| {
                    let i0 = b * COLUMN_BLOCK;
                    let height = rows.len() / h;
                    for l in 0..h {
                        let src = &half[l * n + i0..l * n + i0 + height];
                        for (di, &z) in src.iter().enumerate() {
                            rows[di * h + l] = z;
                        }
                    }
                    for (row, dst) in rows.chunks_mut(h).zip(out.chunks_mut(n)) {
                        // self-conjugate bins; nonzero imaginary parts are rounding only
                        row[0].im = 0.0;
                        row[h - 1].im = 0.0;
                        self.c2r
                            .process_with_scratch(row, dst, scratch)
                            .expect("buffer sizes checked and self-conjugate bins real");
                    }
                },
            );
    }
}

/// Columns handled together when a transform runs across rows.
const COLUMN_BLOCK: usize = 16;

/// Rolls both axes by `side/2`. For even sides this is both `fftshift` and
/// its inverse.
pub fn swap_quadrants<T: Send>(data: &mut [T], side: usize) {
    let h = side / 2;
    let (top, bottom) = data.split_at_mut(h * side);
    top.par_chunks_mut(side)
        .zip(bottom.par_chunks_mut(side))
        .for_each(|(a, b)| {
            let (a_left, a_right) = a.split_at_mut(h);
            let (b_left, b_right) = b.split_at_mut(h);
            a_left.swap_with_slice(b_right);
            a_right.swap_with_slice(b_left);
        });
}

/// Physical forward transform of an image onto the centered frequency grid
/// of mesh `1/(side·pixel_size)`.
pub fn forward_image(image: &ImageGrid) -> FrequencyGrid {
    let side = image.side();
    let dx = image.pixel_size();
    let mesh = 1.0 / (side as f64 * dx);
    let mut data: Vec<Complex64> = image.data().iter().map(|&v| Complex64::new(v * dx * dx, 0.0)).collect();
    Fft2::new(side).centered(&mut data, Sign::Positive);
    let (cx, cy) = image.center();
    if cx != 0.0 || cy != 0.0 {
        let proto = FrequencyGrid::zeros(side, mesh).expect("side already validated");
        data.par_iter_mut().enumerate().for_each(|(k, z)| {
            let q = proto.coordinate(k / side, k % side);
            let phase = 2.0 * std::f64::consts::PI * (q.u * cx + q.v * cy);
            *z *= Complex64::from_polar(1.0, phase);
        });
    }
    FrequencyGrid::new(side, mesh, data).expect("side already validated")
}

/// Physical inverse transform; returns complex pixel values on the image
/// grid of pixel size `1/(side·mesh)` centered at the origin.
pub fn inverse_to_image(grid: &FrequencyGrid) -> Vec<Complex64> {
    let side = grid.side();
    let du = grid.mesh();
    let mut data = grid.data().to_vec();
    Fft2::new(side).centered(&mut data, Sign::Negative);
    let s = du * du;
    data.par_iter_mut().for_each(|z| *z *= s);
    data
}

/// Real part of [`inverse_to_image`] as an image, after checking the
/// imaginary part is negligible.
pub fn inverse_real_image(grid: &FrequencyGrid, tolerance: f64) -> Result<ImageGrid> {
    let side = grid.side();
    let data = inverse_to_image(grid);
    let max_re = data.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let max_im = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_im > tolerance * max_re.max(f64::MIN_POSITIVE) && max_im > 0.0 {
        return Err(Error::InvalidInput(format!(
            "inverse transform is not real: max |Im| = {max_im:.3e}, max |Re| = {max_re:.3e}"
        )));
    }
    ImageGrid::new(
        side,
        1.0 / (side as f64 * grid.mesh()),
        (0.0, 0.0),
        data.into_iter().map(|z| z.re).collect(),
    )
}
