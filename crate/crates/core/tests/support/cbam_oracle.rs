//! Brute-force CBAM on nested vectors, written without reference to the
//! library code. Shared by the core tests and the acceptance suite.

#![allow(dead_code)]

pub type Tensor3 = Vec<Vec<Vec<f64>>>;

pub struct OracleWeights {
    /// hidden x C
    pub w0: Vec<Vec<f64>>,
    /// C x hidden
    pub w1: Vec<Vec<f64>>,
    /// [avg, max] x 7 x 7
    pub conv7: Tensor3,
    pub bias: f64,
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn shared_mlp(w: &OracleWeights, v: &[f64]) -> Vec<f64> {
    let mut hidden = Vec::new();
    for row in &w.w0 {
        let mut s = 0.0;
        for c in 0..v.len() {
            s += row[c] * v[c];
        }
        hidden.push(if s > 0.0 { s } else { 0.0 });
    }
    let mut out = Vec::new();
    for row in &w.w1 {
        let mut s = 0.0;
        for j in 0..hidden.len() {
            s += row[j] * hidden[j];
        }
        out.push(s);
    }
    out
}

pub fn oracle_channel_gate(f: &Tensor3, w: &OracleWeights) -> Vec<f64> {
    let mut avg = Vec::new();
    let mut max = Vec::new();
    for plane in f {
        let mut s = 0.0;
        let mut m = f64::NEG_INFINITY;
        let mut n = 0.0;
        for row in plane {
            for &v in row {
                s += v;
                n += 1.0;
                if v > m {
                    m = v;
                }
            }
        }
        avg.push(s / n);
        max.push(m);
    }
    let a = shared_mlp(w, &avg);
    let b = shared_mlp(w, &max);
    (0..f.len()).map(|c| sig(a[c] + b[c])).collect()
}

pub fn oracle_spatial_gate(f: &Tensor3, w: &OracleWeights) -> Vec<Vec<f64>> {
    let (c_n, h, wd) = (f.len(), f[0].len(), f[0][0].len());
    let mut pooled = vec![vec![vec![0.0; wd]; h]; 2];
    for y in 0..h {
        for x in 0..wd {
            let mut s = 0.0;
            let mut m = f64::NEG_INFINITY;
            for plane in f {
                s += plane[y][x];
                if plane[y][x] > m {
                    m = plane[y][x];
                }
            }
            pooled[0][y][x] = s / c_n as f64;
            pooled[1][y][x] = m;
        }
    }
    let mut gate = vec![vec![0.0; wd]; h];
    for y in 0..h {
        for x in 0..wd {
            let mut acc = w.bias;
            for p in 0..2 {
                for i in 0..7 {
                    for j in 0..7 {
                        let yy = y as i64 + i as i64 - 3;
                        let xx = x as i64 + j as i64 - 3;
                        if yy >= 0 && xx >= 0 && (yy as usize) < h && (xx as usize) < wd {
                            acc += w.conv7[p][i][j] * pooled[p][yy as usize][xx as usize];
                        }
                    }
                }
            }
            gate[y][x] = sig(acc);
        }
    }
    gate
}

pub fn oracle_cbam(f: &Tensor3, w: &OracleWeights) -> Tensor3 {
    let mc = oracle_channel_gate(f, w);
    let f1: Tensor3 = f
        .iter()
        .enumerate()
        .map(|(c, plane)| plane.iter().map(|row| row.iter().map(|v| v * mc[c]).collect()).collect())
        .collect();
    let ms = oracle_spatial_gate(&f1, w);
    f1.iter()
        .map(|plane| {
            plane
                .iter()
                .enumerate()
                .map(|(y, row)| row.iter().enumerate().map(|(x, v)| v * ms[y][x]).collect())
                .collect()
        })
        .collect()
}

/// Random nested weights and the flattened library form of the same values.
pub fn random_weights(c: usize, r: usize, next: &mut impl FnMut() -> f64) -> OracleWeights {
    let hidden = c / r;
    OracleWeights {
        w0: (0..hidden).map(|_| (0..c).map(|_| next()).collect()).collect(),
        w1: (0..c).map(|_| (0..hidden).map(|_| next()).collect()).collect(),
        conv7: (0..2).map(|_| (0..7).map(|_| (0..7).map(|_| 0.5 * next()).collect()).collect()).collect(),
        bias: 0.1 * next(),
    }
}

pub fn random_tensor(c: usize, h: usize, w: usize, next: &mut impl FnMut() -> f64) -> Tensor3 {
    (0..c).map(|_| (0..h).map(|_| (0..w).map(|_| 2.0 * next()).collect()).collect()).collect()
}

pub fn flatten2(m: &[Vec<f64>]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

pub fn flatten3(t: &Tensor3) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}
