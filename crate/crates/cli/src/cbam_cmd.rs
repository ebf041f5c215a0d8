use std::path::Path;

use anyhow::Context;
use aquastretch::cbam::{cbam_forward_detailed, CbamWeights, FeatureTensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbamSummary {
    pub shape: (usize, usize, usize),
    pub channel_range: (f64, f64),
    pub spatial_range: (f64, f64),
}

impl std::fmt::Display for CbamSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (c, h, w) = self.shape;
        writeln!(f, "shape {c}x{h}x{w}")?;
        writeln!(f, "channel attention min {:.6} max {:.6}", self.channel_range.0, self.channel_range.1)?;
        write!(f, "spatial attention min {:.6} max {:.6}", self.spatial_range.0, self.spatial_range.1)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

pub fn run_cbam(weights: &Path, tensor: &Path, output: &Path) -> anyhow::Result<CbamSummary> {
    let w = CbamWeights::load(weights).with_context(|| format!("weights {}", weights.display()))?;
    let f = FeatureTensor::load(tensor).with_context(|| format!("tensor {}", tensor.display()))?;
    let out = cbam_forward_detailed(&f, &w)
        .with_context(|| format!("applying {} to {}", weights.display(), tensor.display()))?;
    crate::batch::write_json_atomic(output, &aquastretch::cbam::TensorFile::from(&out.output))
        .with_context(|| format!("writing {}", output.display()))?;
    Ok(CbamSummary {
        shape: out.output.shape(),
        channel_range: min_max(&out.channel_attention),
        spatial_range: min_max(&out.spatial_attention),
    })
}
