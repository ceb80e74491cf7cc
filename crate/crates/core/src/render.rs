//! Deterministic rasterization of point clouds to binary PPM.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fractal::PointCloud;

pub const DEFAULT_SIZE: usize = 800;
pub const MIN_SIZE: usize = 16;
pub const BACKGROUND: [u8; 3] = [255, 255, 255];

const MARGIN: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, top row first.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: BACKGROUND.repeat(width * height),
        }
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn set(&mut self, col: usize, row: usize, rgb: [u8; 3]) {
        let i = 3 * (row * self.width + col);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() + 32);
        self.write_ppm(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

/// Color of label `k` among `n`: hue `360·k/n`, saturation 0.75, value 0.95.
pub fn palette(k: usize, n: usize) -> [u8; 3] {
    let h = 360.0 * k as f64 / n.max(1) as f64;
    hsv_to_rgb(h, 0.75, 0.95)
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let byte = |t: f64| ((t + m) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8;
    [byte(r), byte(g), byte(b)]
}

/// Affine map from the cloud's bounding box (plus a 5% margin) onto a
/// pixel grid. Only the first two coordinates are drawn; a missing second
/// coordinate reads as zero. A zero-extent axis maps to the middle cell.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    cols: usize,
    rows: usize,
}

impl Frame {
    pub fn fit(cloud: &PointCloud, cols: usize, rows: usize) -> Option<Self> {
        let bounds = cloud.bounds()?;
        let axis = |k: usize| {
            let (lo, hi) = bounds.get(k).copied().unwrap_or((0.0, 0.0));
            let pad = MARGIN * (hi - lo);
            (lo - pad, hi + pad)
        };
        Some(Self {
            x: axis(0),
            y: axis(1),
            cols,
            rows,
        })
    }

    fn bin(v: f64, (lo, hi): (f64, f64), n: usize) -> Option<usize> {
        if hi <= lo {
            return Some(n / 2);
        }
        let t = (v - lo) / (hi - lo);
        if !(0.0..=1.0).contains(&t) {
            return None;
        }
        Some(((t * n as f64).floor() as usize).min(n - 1))
    }

    /// `(column, row)` with rows counted from the top; `None` outside the frame.
    pub fn cell(&self, p: &[f64]) -> Option<(usize, usize)> {
        let px = p.first().copied().unwrap_or(0.0);
        let py = p.get(1).copied().unwrap_or(0.0);
        let col = Self::bin(px, self.x, self.cols)?;
        let row = if self.y.1 <= self.y.0 {
            self.rows / 2
        } else {
            self.rows - 1 - Self::bin(py, self.y, self.rows)?
        };
        Some((col, row))
    }

    pub fn is_degenerate_vertically(&self) -> bool {
        self.y.1 <= self.y.0
    }
}

pub fn render_ppm(cloud: &PointCloud, width: usize, height: usize) -> Result<RasterImage> {
    if width < MIN_SIZE || height < MIN_SIZE {
        return Err(Error::validation(format!(
            "image size {width}x{height} is below the {MIN_SIZE}x{MIN_SIZE} minimum"
        )));
    }
    let mut img = RasterImage::blank(width, height);
    let Some(frame) = Frame::fit(cloud, width, height) else {
        return Ok(img);
    };
    let colors: Vec<[u8; 3]> = (0..cloud.label_count())
        .map(|k| palette(k, cloud.label_count()))
        .collect();
    for (p, label) in cloud.points() {
        if let Some((c, r)) = frame.cell(p) {
            img.set(c, r, colors[label as usize]);
        }
    }
    Ok(img)
}

/// Rasterizes at `gridsize²` and reports whether the origin's cell and its
/// neighbours are all occupied. One-dimensional clouds only have left and
/// right neighbours. This is a visual diagnostic and proves nothing about
/// the closure.
pub fn interior_heuristic(cloud: &PointCloud, gridsize: usize) -> Result<bool> {
    if gridsize < 8 {
        return Err(Error::validation("grid size must be at least 8"));
    }
    let Some(frame) = Frame::fit(cloud, gridsize, gridsize) else {
        return Ok(false);
    };
    let mut occupied = vec![false; gridsize * gridsize];
    for (p, _) in cloud.points() {
        if let Some((c, r)) = frame.cell(p) {
            occupied[r * gridsize + c] = true;
        }
    }
    let origin = vec![0.0; cloud.dim()];
    let Some((oc, or)) = frame.cell(&origin) else {
        return Ok(false);
    };
    let flat = cloud.dim() < 2 || frame.is_degenerate_vertically();
    let rows: Vec<i64> = if flat { vec![0] } else { vec![-1, 0, 1] };
    for dr in rows {
        for dc in -1i64..=1 {
            let (c, r) = (oc as i64 + dc, or as i64 + dr);
            if c < 0 || r < 0 || c >= gridsize as i64 || r >= gridsize as i64 {
                return Ok(false);
            }
            if !occupied[r as usize * gridsize + c as usize] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Fraction of occupied cells of a `resolution²` raster that hold points
/// of two or more labels.
pub fn label_overlap_fraction(cloud: &PointCloud, resolution: usize) -> f64 {
    let Some(frame) = Frame::fit(cloud, resolution, resolution) else {
        return 0.0;
    };
    let mut first: Vec<Option<u32>> = vec![None; resolution * resolution];
    let mut mixed = vec![false; resolution * resolution];
    for (p, label) in cloud.points() {
        if let Some((c, r)) = frame.cell(p) {
            let i = r * resolution + c;
            match first[i] {
                None => first[i] = Some(label),
                Some(l) if l != label => mixed[i] = true,
                _ => {}
            }
        }
    }
    let occupied = first.iter().filter(|f| f.is_some()).count();
    if occupied == 0 {
        return 0.0;
    }
    mixed.iter().filter(|&&m| m).count() as f64 / occupied as f64
}
