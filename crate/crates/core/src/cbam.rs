//! Forward pass of a convolutional block attention module over small
//! feature tensors.
//!
//! Channel attention pools every channel over all positions (average and
//! max), sends both descriptors through a shared two-layer bottleneck
//! (`w0`, ReLU, `w1`) and gates each channel with the sigmoid of their sum.
//! Spatial attention pools over channels, convolves the stacked
//! `[avg; max]` map with a 7x7 kernel (zero padding 3) and gates each
//! position. The two gates are applied in sequence:
//!
//! ```text
//! F1 = Mc(F)  * F
//! F2 = Ms(F1) * F1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KERNEL: usize = 7;
const PAD: isize = 3;
pub const DEFAULT_REDUCTION: usize = 16;

/// `C x H x W` tensor stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::shape("shape", format!("{channels}x{height}x{width} has a zero dimension")));
        }
        if data.len() != channels * height * width {
            return Err(Error::shape(
                "data",
                format!("{} values for shape {channels}x{height}x{width}", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::shape("data", "non-finite value"));
        }
        Ok(FeatureTensor { channels, height, width, data })
    }

    pub fn from_fn(channels: usize, height: usize, width: usize, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: TensorFile = read_json(path.as_ref())?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), &TensorFile::from(self))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TensorFile::from(self))?)
    }
}

/// On-disk tensor layout: `{"C", "H", "W", "data": [[[..]]]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TensorFile {
    #[serde(rename = "C")]
    pub c: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub data: Vec<Vec<Vec<f64>>>,
}

impl From<&FeatureTensor> for TensorFile {
    fn from(t: &FeatureTensor) -> Self {
        let data = (0..t.channels)
            .map(|c| t.plane(c).chunks(t.width).map(<[f64]>::to_vec).collect())
            .collect();
        TensorFile { c: t.channels, h: t.height, w: t.width, data }
    }
}

impl TryFrom<TensorFile> for FeatureTensor {
    type Error = Error;

    fn try_from(f: TensorFile) -> Result<Self> {
        check_nested("data", &f.data, f.c, f.h, f.w)?;
        FeatureTensor::new(f.c, f.h, f.w, f.data.into_iter().flatten().flatten().collect())
    }
}

/// Weights of one attention block.
#[derive(Debug, Clone, PartialEq)]
pub struct CbamWeights {
    channels: usize,
    reduction: usize,
    /// `(C / r) x C`, row-major.
    w0: Vec<f64>,
    /// `C x (C / r)`, row-major.
    w1: Vec<f64>,
    /// `2 x 7 x 7`; plane 0 sees the channel average, plane 1 the maximum.
    conv7: Vec<f64>,
    bias: f64,
}

impl CbamWeights {
    /// Validates shapes. `w0` and `w1` are row-major; `conv7` is `[2][7][7]`.
    pub fn new(channels: usize, reduction: usize, w0: Vec<f64>, w1: Vec<f64>, conv7: Vec<f64>, bias: f64) -> Result<Self> {
        if reduction == 0 {
            return Err(Error::shape("r", "reduction must be at least 1"));
        }
        if channels == 0 || channels % reduction != 0 {
            return Err(Error::shape("r", format!("reduction {reduction} does not divide C = {channels}")));
        }
        let hidden = channels / reduction;
        if w0.len() != hidden * channels {
            return Err(Error::shape("w0", format!("expected {hidden}x{channels}")));
        }
        if w1.len() != channels * hidden {
            return Err(Error::shape("w1", format!("expected {channels}x{hidden}")));
        }
        if conv7.len() != 2 * KERNEL * KERNEL {
            return Err(Error::shape("conv7", "expected 2x7x7"));
        }
        for (field, values) in [("w0", &w0), ("w1", &w1), ("conv7", &conv7)] {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::shape(field, "non-finite value"));
            }
        }
        if !bias.is_finite() {
            return Err(Error::shape("bias", "non-finite value"));
        }
        Ok(CbamWeights { channels, reduction, w0, w1, conv7, bias })
    }

    /// All-zero weights: both gates evaluate to 0.5 everywhere.
    pub fn zeros(channels: usize, reduction: usize) -> Result<Self> {
        let hidden = channels / reduction.max(1);
        Self::new(channels, reduction, vec![0.0; hidden * channels], vec![0.0; channels * hidden], vec![0.0; 2 * KERNEL * KERNEL], 0.0)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn reduction(&self) -> usize {
        self.reduction
    }

    pub fn hidden(&self) -> usize {
        self.channels / self.reduction
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn conv7(&self) -> &[f64] {
        &self.conv7
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: WeightsFile = read_json(path.as_ref())?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), &WeightsFile::from(self))
    }

    fn check_input(&self, f: &FeatureTensor) -> Result<()> {
        if f.channels != self.channels {
            return Err(Error::shape(
                "C",
                format!("weights expect {} channels, tensor has {}", self.channels, f.channels),
            ));
        }
        Ok(())
    }
}

/// On-disk weight layout: `{"C", "r", "w0", "w1", "conv7", "bias"}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct WeightsFile {
    #[serde(rename = "C")]
    pub c: usize,
    pub r: usize,
    pub w0: Vec<Vec<f64>>,
    pub w1: Vec<Vec<f64>>,
    pub conv7: Vec<Vec<Vec<f64>>>,
    pub bias: f64,
}

impl From<&CbamWeights> for WeightsFile {
    fn from(w: &CbamWeights) -> Self {
        let hidden = w.hidden();
        WeightsFile {
            c: w.channels,
            r: w.reduction,
            w0: w.w0.chunks(w.channels).map(<[f64]>::to_vec).collect(),
            w1: w.w1.chunks(hidden).map(<[f64]>::to_vec).collect(),
            conv7: w
                .conv7
                .chunks(KERNEL * KERNEL)
                .map(|p| p.chunks(KERNEL).map(<[f64]>::to_vec).collect())
                .collect(),
            bias: w.bias,
        }
    }
}

impl TryFrom<WeightsFile> for CbamWeights {
    type Error = Error;

    fn try_from(f: WeightsFile) -> Result<Self> {
        if f.r == 0 || f.c == 0 || f.c % f.r != 0 {
            return Err(Error::shape("r", format!("reduction {} does not divide C = {}", f.r, f.c)));
        }
        let hidden = f.c / f.r;
        check_matrix("w0", &f.w0, hidden, f.c)?;
        check_matrix("w1", &f.w1, f.c, hidden)?;
        check_nested("conv7", &f.conv7, 2, KERNEL, KERNEL)?;
        CbamWeights::new(
            f.c,
            f.r,
            f.w0.into_iter().flatten().collect(),
            f.w1.into_iter().flatten().collect(),
            f.conv7.into_iter().flatten().flatten().collect(),
            f.bias,
        )
    }
}

fn check_matrix(field: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::shape(field, format!("expected {rows}x{cols} matrix")));
    }
    Ok(())
}

fn check_nested(field: &str, t: &[Vec<Vec<f64>>], a: usize, b: usize, c: usize) -> Result<()> {
    if t.len() != a || t.iter().any(|m| m.len() != b || m.iter().any(|r| r.len() != c)) {
        return Err(Error::shape(field, format!("expected {a}x{b}x{c} array")));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-channel gate `Mc`, length `C`.
pub fn channel_attention(f: &FeatureTensor, w: &CbamWeights) -> Result<Vec<f64>> {
    w.check_input(f)?;
    let n = (f.height * f.width) as f64;
    let (avg, max): (Vec<f64>, Vec<f64>) = (0..f.channels)
        .map(|c| {
            let p = f.plane(c);
            (p.iter().sum::<f64>() / n, p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        })
        .unzip();

    let hidden = w.hidden();
    let mlp = |v: &[f64]| -> Vec<f64> {
        let h: Vec<f64> = w
            .w0
            .chunks(f.channels)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().max(0.0))
            .collect();
        w.w1.chunks(hidden).map(|row| row.iter().zip(&h).map(|(a, b)| a * b).sum()).collect()
    };
    let (a, m) = (mlp(&avg), mlp(&max));
    Ok(a.iter().zip(&m).map(|(x, y)| sigmoid(x + y)).collect())
}

/// Per-position gate `Ms`, `H x W` row-major.
pub fn spatial_attention(f: &FeatureTensor, w: &CbamWeights) -> Result<Vec<f64>> {
    w.check_input(f)?;
    let (h, wd) = (f.height, f.width);
    let n = h * wd;
    let mut avg = vec![0.0; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for c in 0..f.channels {
        for (i, &v) in f.plane(c).iter().enumerate() {
            avg[i] += v;
            max[i] = max[i].max(v);
        }
    }
    for v in &mut avg {
        *v /= f.channels as f64;
    }

    let pooled = [&avg, &max];
    let mut out = vec![0.0; n];
    for y in 0..h as isize {
        for x in 0..wd as isize {
            let mut acc = w.bias;
            for (k, map) in pooled.iter().enumerate() {
                let kernel = &w.conv7[k * KERNEL * KERNEL..(k + 1) * KERNEL * KERNEL];
                for ky in 0..KERNEL as isize {
                    let sy = y + ky - PAD;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for kx in 0..KERNEL as isize {
                        let sx = x + kx - PAD;
                        if sx < 0 || sx >= wd as isize {
                            continue;
                        }
                        acc += kernel[(ky * KERNEL as isize + kx) as usize] * map[(sy * wd as isize + sx) as usize];
                    }
                }
            }
            out[(y * wd as isize + x) as usize] = sigmoid(acc);
        }
    }
    Ok(out)
}

/// Intermediate and final maps of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CbamOutput {
    pub channel_attention: Vec<f64>,
    pub spatial_attention: Vec<f64>,
    pub output: FeatureTensor,
}

pub fn cbam_forward_detailed(f: &FeatureTensor, w: &CbamWeights) -> Result<CbamOutput> {
    let mc = channel_attention(f, w)?;
    let plane = f.height * f.width;
    let gated: Vec<f64> = f.data.iter().enumerate().map(|(i, v)| v * mc[i / plane]).collect();
    let f1 = FeatureTensor { data: gated, ..f.clone() };
    let ms = spatial_attention(&f1, w)?;
    let data = f1.data.iter().enumerate().map(|(i, v)| v * ms[i % plane]).collect();
    Ok(CbamOutput {
        channel_attention: mc,
        spatial_attention: ms,
        output: FeatureTensor { data, ..f1 },
    })
}

/// Channel gate then spatial gate; the output has the input's shape.
pub fn cbam_forward(f: &FeatureTensor, w: &CbamWeights) -> Result<FeatureTensor> {
    Ok(cbam_forward_detailed(f, w)?.output)
}
