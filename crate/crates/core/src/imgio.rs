//! In-memory pixel buffers and PNG/JPEG input-output.
//!
//! Channel values are kept as `f64` on the 0..=255 scale throughout the
//! pipeline. Quantization to bytes happens once, in [`save_image`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use image::{ImageReader, RgbImage as ByteImage};

use crate::error::{Error, Result};
use crate::histogram::Channel;

/// Row-major RGB image with real-valued channels in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RgbImage {
    /// Builds an image from interleaved `r, g, b` samples.
    ///
    /// Fails if the buffer length does not match the dimensions, if either
    /// dimension is zero, or if any sample is outside `[0, 255]`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::Format(format!("channel value {v} outside [0, 255]")));
        }
        Ok(RgbImage { width, height, data })
    }

    /// Like [`RgbImage::new`] but clamps every sample into `[0, 255]`.
    /// NaN samples become 0.
    pub fn from_raw_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        for v in &mut data {
            *v = clamp_channel(*v);
        }
        Ok(RgbImage { width, height, data })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel; results are clamped.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).iter().map(|&v| clamp_channel(v)));
            }
        }
        RgbImage { width, height, data }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Interleaved samples, `3 * width * height` long.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Copies one channel out as a planar vector.
    pub fn channel(&self, channel: Channel) -> Vec<f64> {
        self.data.iter().skip(channel.index()).step_by(3).copied().collect()
    }

    /// Returns a copy with `channel` replaced by `values` (clamped to `[0, 255]`).
    pub fn with_channel(&self, channel: Channel, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.len(), "channel length mismatch");
        let mut out = self.clone();
        for (px, &v) in out.data.chunks_exact_mut(3).zip(values) {
            px[channel.index()] = clamp_channel(v);
        }
        out
    }

    /// Assembles an image from three planar channels, clamping each sample.
    pub fn from_planes(width: usize, height: usize, planes: [&[f64]; 3]) -> Result<Self> {
        let n = width * height;
        for (plane, name) in planes.iter().zip(["r", "g", "b"]) {
            if plane.len() != n {
                return Err(Error::shape(name, format!("expected {n} samples, got {}", plane.len())));
            }
        }
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            data.extend(planes.iter().map(|p| clamp_channel(p[i])));
        }
        Self::new(width, height, data)
    }

    /// Converts to an 8-bit buffer using [`quantize_channel`].
    pub fn to_bytes(&self) -> ByteImage {
        let raw = self.data.iter().map(|&v| quantize_channel(v)).collect();
        ByteImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer length matches dimensions")
    }

    pub fn from_bytes(img: &ByteImage) -> Result<Self> {
        let data = img.as_raw().iter().map(|&b| f64::from(b)).collect();
        Self::new(img.width() as usize, img.height() as usize, data)
    }
}

/// Row-major CIE-Lab image. `L` lies in `[0, 100]`, `a` and `b` in `[-128, 127]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl LabImage {
    /// Builds a Lab image from interleaved `L, a, b` triples, clamping each
    /// component into its legal range.
    pub fn new(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        for px in data.chunks_exact_mut(3) {
            px[0] = clamp_nan(px[0], 0.0, 100.0);
            px[1] = clamp_nan(px[1], -128.0, 127.0);
            px[2] = clamp_nan(px[2], -128.0, 127.0);
        }
        Ok(LabImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// The `L` component of every pixel.
    pub fn lightness(&self) -> Vec<f64> {
        self.data.iter().step_by(3).copied().collect()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("zero-sized image {width}x{height}")));
    }
    if len != width * height * 3 {
        return Err(Error::Format(format!(
            "buffer holds {len} samples, {width}x{height}x3 = {} expected",
            width * height * 3
        )));
    }
    Ok(())
}

fn clamp_nan(v: f64, lo: f64, hi: f64) -> f64 {
    if v.is_nan() {
        lo.max(0.0)
    } else {
        v.clamp(lo, hi)
    }
}

pub(crate) fn clamp_channel(v: f64) -> f64 {
    clamp_nan(v, 0.0, 255.0)
}

/// Maps a real channel value to a stored byte: round half away from zero,
/// then clamp to `[0, 255]`.
pub fn quantize_channel(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

/// Decodes a PNG or JPEG file. Alpha is discarded with a warning.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = ImageReader::new(BufReader::new(file))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format().is_none() {
        return Err(Error::Format(format!("{}: unrecognized image format", path.display())));
    }
    let decoded = reader
        .decode()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if decoded.width() == 0 || decoded.height() == 0 {
        return Err(Error::Format(format!("{}: zero-sized image", path.display())));
    }
    if decoded.color().has_alpha() {
        log::warn!("{}: dropping alpha channel", path.display());
    }
    RgbImage::from_bytes(&decoded.to_rgb8())
}

/// Writes an 8-bit RGB PNG. The file is written to a temporary sibling and
/// renamed into place, so readers never observe a partial file.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        img.to_bytes()
            .write_to(&mut w, image::ImageFormat::Png)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
