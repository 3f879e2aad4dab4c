//! Plain-text file formats: visibility CSV, image matrices with JSON
//! sidecars, frequency-grid surfaces, PGM previews and iteration logs.
//!
//! Floats are written in Rust's shortest round-trip form, so every write →
//! read cycle reproduces the values bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::IterationRecord;
use crate::model::{find_duplicate, Complex64, FrequencyGrid, ImageGrid, UVPoint, VisibilitySet};

pub const VISIBILITY_HEADER: &str = "u,v,re,im";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn csv_error(source: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: source.to_string(),
        line,
        message: e.to_string(),
    }
}

pub fn format_visibilities(data: &VisibilitySet) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::with_capacity(64 * (data.len() + 1)));
    w.write_record(VISIBILITY_HEADER.split(',')).expect("writing to memory");
    for (p, z) in data.points().iter().zip(data.values()) {
        // `Display` is the shortest representation that parses back exactly
        w.write_record([p.u, p.v, z.re, z.im].map(|x| x.to_string()))
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ASCII output")
}

/// Parses visibility CSV text; `source` names the input in error messages.
pub fn parse_visibilities(text: &str, source: &str, label: &str) -> Result<VisibilitySet> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(source, e))?.clone();
    if header.is_empty() {
        return Err(parse_err(1, "empty file".into()));
    }
    if header.iter().collect::<Vec<_>>().join(",") != VISIBILITY_HEADER {
        return Err(parse_err(
            1,
            format!(
                "expected header `{VISIBILITY_HEADER}`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut line_of = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(source, e))?;
        let n = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(parse_err(n, format!("expected 4 fields, found {}", record.len())));
        }
        let mut nums = [0.0; 4];
        for (k, (f, name)) in record.iter().zip(["u", "v", "re", "im"]).enumerate() {
            nums[k] = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(n, format!("field `{name}` is not a finite number: `{f}`")))?;
        }
        points.push(UVPoint::new(nums[0], nums[1]));
        values.push(Complex64::new(nums[2], nums[3]));
        line_of.push(n);
    }
    if let Some((a, b)) = find_duplicate(&points) {
        return Err(Error::DuplicateRow {
            first_line: line_of[a],
            second_line: line_of[b],
        });
    }
    VisibilitySet::new(points, values, label)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn write_visibilities(path: &Path, data: &VisibilitySet) -> Result<()> {
    write_text(path, &format_visibilities(data))
}

pub fn read_visibilities(path: &Path) -> Result<VisibilitySet> {
    let text = read_text(path)?;
    parse_visibilities(&text, &path.display().to_string(), &stem(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageMeta {
    pub side: usize,
    pub pixel_size_arcsec: f64,
    pub center_arcsec: (f64, f64),
    pub units: String,
}

pub const IMAGE_UNITS: &str = "photon cm^-2 s^-1 arcsec^-2";

/// Sidecar path of an image or surface file: same stem, `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn format_matrix(side: usize, values: impl Iterator<Item = f64>) -> String {
    let mut out = String::new();
    for (k, v) in values.enumerate() {
        let sep = if k % side == side - 1 { '\n' } else { ' ' };
        write!(out, "{v}{sep}").expect("writing to a String");
    }
    out
}

fn parse_matrix(text: &str, source: &str, side: usize) -> Result<Vec<f64>> {
    let mut data = Vec::with_capacity(side * side);
    let rows: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if rows.len() != side {
        return Err(Error::Parse {
            path: source.to_string(),
            line: rows.len().min(side) + 1,
            message: format!("expected {side} rows, found {}", rows.len()),
        });
    }
    for (n, line) in rows {
        let before = data.len();
        for tok in line.split_whitespace() {
            let v = tok.parse::<f64>().map_err(|_| Error::Parse {
                path: source.to_string(),
                line: n,
                message: format!("not a number: `{tok}`"),
            })?;
            data.push(v);
        }
        if data.len() - before != side {
            return Err(Error::Parse {
                path: source.to_string(),
                line: n,
                message: format!("expected {side} values, found {}", data.len() - before),
            });
        }
    }
    Ok(data)
}

/// Writes the matrix to `path` and its metadata next to it.
pub fn write_image(path: &Path, image: &ImageGrid) -> Result<()> {
    write_text(path, &format_matrix(image.side(), image.data().iter().copied()))?;
    write_json(
        &sidecar_path(path),
        &ImageMeta {
            side: image.side(),
            pixel_size_arcsec: image.pixel_size(),
            center_arcsec: image.center(),
            units: IMAGE_UNITS.to_string(),
        },
    )
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let meta: ImageMeta = read_json(&sidecar_path(path))?;
    let data = parse_matrix(&read_text(path)?, &path.display().to_string(), meta.side)?;
    ImageGrid::new(meta.side, meta.pixel_size_arcsec, meta.center_arcsec, data)
}

/// 16-bit binary PGM, min-max normalized; row `i` of the image is the
/// `i`-th line of the picture.
pub fn write_pgm(path: &Path, image: &ImageGrid) -> Result<()> {
    let (lo, hi) = (image.min(), image.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let side = image.side();
    let mut bytes = format!("P5\n{side} {side}\n65535\n").into_bytes();
    for &v in image.data() {
        let level = (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceMeta {
    pub side: usize,
    pub mesh_inv_arcsec: f64,
    pub units: String,
    /// Disk support the surface was projected onto, arcsec⁻¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_radius: Option<f64>,
}

pub const SURFACE_FILES: [&str; 3] = ["surface_re.txt", "surface_im.txt", "surface_modulus.txt"];
pub const SURFACE_META: &str = "surface.json";
pub const VISIBILITY_UNITS: &str = "photon cm^-2 s^-1";

/// Writes real part, imaginary part and modulus matrices of a frequency
/// grid into `dir`, plus `surface.json`.
pub fn write_surface(dir: &Path, grid: &FrequencyGrid, support_radius: Option<f64>) -> Result<()> {
    let side = grid.side();
    let parts: [Box<dyn Fn(&Complex64) -> f64>; 3] = [Box::new(|z| z.re), Box::new(|z| z.im), Box::new(|z| z.norm())];
    for (name, f) in SURFACE_FILES.iter().zip(parts) {
        write_text(&dir.join(name), &format_matrix(side, grid.data().iter().map(&f)))?;
    }
    write_json(
        &dir.join(SURFACE_META),
        &SurfaceMeta {
            side,
            mesh_inv_arcsec: grid.mesh(),
            units: VISIBILITY_UNITS.to_string(),
            support_radius,
        },
    )
}

pub fn read_surface(dir: &Path) -> Result<(FrequencyGrid, SurfaceMeta)> {
    let meta: SurfaceMeta = read_json(&dir.join(SURFACE_META))?;
    let read = |name: &str| -> Result<Vec<f64>> {
        let path = dir.join(name);
        parse_matrix(&read_text(&path)?, &path.display().to_string(), meta.side)
    };
    let re = read(SURFACE_FILES[0])?;
    let im = read(SURFACE_FILES[1])?;
    let data = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    Ok((FrequencyGrid::new(meta.side, meta.mesh_inv_arcsec, data)?, meta))
}

pub fn format_iteration_log(log: &[IterationRecord]) -> String {
    let mut out = String::from("k,residual,rel_change\n");
    for r in log {
        writeln!(out, "{},{},{}", r.k, r.residual, r.rel_change).expect("writing to a String");
    }
    out
}

pub fn write_iteration_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    write_text(path, &format_iteration_log(log))
}
