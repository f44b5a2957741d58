//! The lambda adapter: a small two-layer cross-attention network producing a
//! per-pair balancing weight in (0, 1).
//!
//! Forward pass (deterministic, no training here): queries come from the
//! first set, keys/values from the second. Each layer is single-head scaled
//! dot-product attention with an output projection and no residual. The
//! attended features are mean-pooled over positions and passed through two
//! linear layers yielding 2 logits; the returned lambda is the first softmax
//! component.
//!
//! Weights live in a self-describing JSON container; every matrix carries its
//! shape and the loader rejects any inconsistency.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::PointSet;

pub const ADAPTER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayerRecord {
    wq: MatrixRecord,
    bq: Vec<f64>,
    wk: MatrixRecord,
    bk: Vec<f64>,
    wv: MatrixRecord,
    bv: Vec<f64>,
    wo: MatrixRecord,
    bo: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GRecord {
    w1: MatrixRecord,
    b1: Vec<f64>,
    w2: MatrixRecord,
    b2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AdapterFile {
    format_version: u32,
    input_dim: usize,
    embed_width: usize,
    hidden_width: usize,
    layers: Vec<LayerRecord>,
    g: GRecord,
}

#[derive(Debug, Clone)]
pub struct AttentionLayer {
    pub wq: Array2<f64>,
    pub bq: Array1<f64>,
    pub wk: Array2<f64>,
    pub bk: Array1<f64>,
    pub wv: Array2<f64>,
    pub bv: Array1<f64>,
    pub wo: Array2<f64>,
    pub bo: Array1<f64>,
}

/// All parameters of the adapter: two cross-attention layers plus the two
/// linear layers of the logit head.
#[derive(Debug, Clone)]
pub struct AdapterWeights {
    pub input_dim: usize,
    pub embed_width: usize,
    pub hidden_width: usize,
    pub layers: Vec<AttentionLayer>,
    pub g_w1: Array2<f64>,
    pub g_b1: Array1<f64>,
    pub g_w2: Array2<f64>,
    pub g_b2: Array1<f64>,
}

fn to_record(m: &Array2<f64>) -> MatrixRecord {
    MatrixRecord {
        rows: m.nrows(),
        cols: m.ncols(),
        data: m.iter().copied().collect(),
    }
}

fn from_record(r: &MatrixRecord, name: &str) -> Result<Array2<f64>> {
    if r.rows == 0 || r.cols == 0 {
        return Err(Error::AdapterShape {
            detail: format!("{name} has zero dimension {}x{}", r.rows, r.cols),
        });
    }
    if r.data.len() != r.rows * r.cols {
        return Err(Error::AdapterShape {
            detail: format!(
                "{name} declares {}x{} but carries {} values",
                r.rows,
                r.cols,
                r.data.len()
            ),
        });
    }
    if r.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "adapter weights",
        });
    }
    Ok(Array2::from_shape_vec((r.rows, r.cols), r.data.clone()).expect("length checked"))
}

fn bias_from(v: &[f64], expected: usize, name: &str) -> Result<Array1<f64>> {
    if v.len() != expected {
        return Err(Error::AdapterShape {
            detail: format!("{name} bias has length {}, expected {expected}", v.len()),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "adapter weights",
        });
    }
    Ok(Array1::from_vec(v.to_vec()))
}

impl AdapterWeights {
    /// Parses and validates the JSON container.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: AdapterFile = serde_json::from_str(text)?;
        if file.format_version != ADAPTER_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: ADAPTER_FORMAT_VERSION,
                got: file.format_version,
            });
        }
        if file.layers.len() != 2 {
            return Err(Error::AdapterShape {
                detail: format!("expected 2 attention layers, got {}", file.layers.len()),
            });
        }
        let mut layers = Vec::with_capacity(2);
        for (idx, rec) in file.layers.iter().enumerate() {
            let name = |part: &str| format!("layer {idx} {part}");
            let wq = from_record(&rec.wq, &name("wq"))?;
            let wk = from_record(&rec.wk, &name("wk"))?;
            let wv = from_record(&rec.wv, &name("wv"))?;
            let wo = from_record(&rec.wo, &name("wo"))?;
            let layer = AttentionLayer {
                bq: bias_from(&rec.bq, wq.ncols(), &name("wq"))?,
                bk: bias_from(&rec.bk, wk.ncols(), &name("wk"))?,
                bv: bias_from(&rec.bv, wv.ncols(), &name("wv"))?,
                bo: bias_from(&rec.bo, wo.ncols(), &name("wo"))?,
                wq,
                wk,
                wv,
                wo,
            };
            layers.push(layer);
        }
        let g_w1 = from_record(&file.g.w1, "g w1")?;
        let g_w2 = from_record(&file.g.w2, "g w2")?;
        let weights = AdapterWeights {
            input_dim: file.input_dim,
            embed_width: file.embed_width,
            hidden_width: file.hidden_width,
            g_b1: bias_from(&file.g.b1, g_w1.ncols(), "g w1")?,
            g_b2: bias_from(&file.g.b2, g_w2.ncols(), "g w2")?,
            layers,
            g_w1,
            g_w2,
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = AdapterFile {
            format_version: ADAPTER_FORMAT_VERSION,
            input_dim: self.input_dim,
            embed_width: self.embed_width,
            hidden_width: self.hidden_width,
            layers: self
                .layers
                .iter()
                .map(|l| LayerRecord {
                    wq: to_record(&l.wq),
                    bq: l.bq.to_vec(),
                    wk: to_record(&l.wk),
                    bk: l.bk.to_vec(),
                    wv: to_record(&l.wv),
                    bv: l.bv.to_vec(),
                    wo: to_record(&l.wo),
                    bo: l.bo.to_vec(),
                })
                .collect(),
            g: GRecord {
                w1: to_record(&self.g_w1),
                b1: self.g_b1.to_vec(),
                w2: to_record(&self.g_w2),
                b2: self.g_b2.to_vec(),
            },
        };
        serde_json::to_string_pretty(&file).expect("adapter weights serialize")
    }

    fn validate(&self) -> Result<()> {
        let d = self.input_dim;
        let w = self.embed_width;
        let l1 = &self.layers[0];
        let l2 = &self.layers[1];
        let check = |cond: bool, detail: String| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::AdapterShape { detail })
            }
        };
        check(l1.wq.nrows() == d, format!("layer 0 wq expects input dim {d}, got {}", l1.wq.nrows()))?;
        check(l1.wk.nrows() == d, "layer 0 wk input dim".into())?;
        check(l1.wv.nrows() == d, "layer 0 wv input dim".into())?;
        check(
            l1.wq.ncols() == w && l1.wk.ncols() == w,
            "layer 0 query/key widths must equal embed_width".into(),
        )?;
        check(
            l1.wv.ncols() == l1.wo.nrows(),
            "layer 0 wv/wo widths disagree".into(),
        )?;
        check(l1.wo.ncols() == w, "layer 0 output width must equal embed_width".into())?;
        check(
            l2.wq.nrows() == w,
            "layer 1 wq must accept layer 0 output".into(),
        )?;
        check(l2.wk.nrows() == d, "layer 1 wk input dim".into())?;
        check(l2.wv.nrows() == d, "layer 1 wv input dim".into())?;
        check(
            l2.wq.ncols() == l2.wk.ncols(),
            "layer 1 query/key widths disagree".into(),
        )?;
        check(
            l2.wv.ncols() == l2.wo.nrows(),
            "layer 1 wv/wo widths disagree".into(),
        )?;
        check(
            self.g_w1.nrows() == l2.wo.ncols(),
            "g w1 must accept the pooled attention output".into(),
        )?;
        check(
            self.g_w1.ncols() == self.hidden_width,
            "g hidden width disagrees with header".into(),
        )?;
        check(
            self.g_w2.nrows() == self.hidden_width,
            "g w2 must accept the hidden layer".into(),
        )?;
        check(self.g_w2.ncols() == 2, "g must produce exactly 2 logits".into())?;
        Ok(())
    }

    /// All-zero weights of the default geometry (`hidden = max(w/2, 2)`);
    /// the forward pass of this adapter returns exactly 0.5.
    pub fn zeros(input_dim: usize, embed_width: usize) -> Self {
        let hidden = (embed_width / 2).max(2);
        let layer = |qin: usize| AttentionLayer {
            wq: Array2::zeros((qin, embed_width)),
            bq: Array1::zeros(embed_width),
            wk: Array2::zeros((input_dim, embed_width)),
            bk: Array1::zeros(embed_width),
            wv: Array2::zeros((input_dim, embed_width)),
            bv: Array1::zeros(embed_width),
            wo: Array2::zeros((embed_width, embed_width)),
            bo: Array1::zeros(embed_width),
        };
        AdapterWeights {
            input_dim,
            embed_width,
            hidden_width: hidden,
            layers: vec![layer(input_dim), layer(embed_width)],
            g_w1: Array2::zeros((embed_width, hidden)),
            g_b1: Array1::zeros(hidden),
            g_w2: Array2::zeros((hidden, 2)),
            g_b2: Array1::zeros(2),
        }
    }

    /// Deterministic pseudo-random weights in [-0.5, 0.5], handy for tests
    /// and synthetic runs.
    pub fn random(input_dim: usize, embed_width: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut base = Self::zeros(input_dim, embed_width);
        let fill2 = |m: &mut Array2<f64>, rng: &mut ChaCha8Rng| {
            for v in m.iter_mut() {
                *v = rng.random::<f64>() - 0.5;
            }
        };
        for layer in &mut base.layers {
            fill2(&mut layer.wq, &mut rng);
            fill2(&mut layer.wk, &mut rng);
            fill2(&mut layer.wv, &mut rng);
            fill2(&mut layer.wo, &mut rng);
            for b in [&mut layer.bq, &mut layer.bk, &mut layer.bv, &mut layer.bo] {
                for v in b.iter_mut() {
                    *v = rng.random::<f64>() - 0.5;
                }
            }
        }
        fill2(&mut base.g_w1, &mut rng);
        fill2(&mut base.g_w2, &mut rng);
        for v in base.g_b1.iter_mut() {
            *v = rng.random::<f64>() - 0.5;
        }
        for v in base.g_b2.iter_mut() {
            *v = rng.random::<f64>() - 0.5;
        }
        base
    }
}

fn affine(input: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Result<Array2<f64>> {
    if input.ncols() != w.nrows() {
        return Err(Error::AdapterShape {
            detail: format!(
                "cannot multiply {}x{} input by {}x{} weight",
                input.nrows(),
                input.ncols(),
                w.nrows(),
                w.ncols()
            ),
        });
    }
    Ok(input.dot(w) + b)
}

fn softmax_rows(scores: &mut Array2<f64>) {
    for mut row in scores.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
}

fn cross_attention(
    queries_src: &Array2<f64>,
    keys_src: &Array2<f64>,
    layer: &AttentionLayer,
) -> Result<Array2<f64>> {
    let q = affine(queries_src, &layer.wq, &layer.bq)?;
    let k = affine(keys_src, &layer.wk, &layer.bk)?;
    let v = affine(keys_src, &layer.wv, &layer.bv)?;
    let scale = (q.ncols() as f64).sqrt();
    let mut scores = q.dot(&k.t()) / scale;
    softmax_rows(&mut scores);
    affine(&scores.dot(&v), &layer.wo, &layer.bo)
}

fn coords_matrix(set: &PointSet) -> Array2<f64> {
    let n = set.len();
    let d = set.dim();
    let mut m = Array2::zeros((n, d));
    for (i, p) in set.points().iter().enumerate() {
        for (j, v) in p.coords().iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Runs the adapter forward pass and returns lambda in (0, 1).
///
/// Not symmetric in its arguments: queries come from `sx`. Average the two
/// directions if a symmetric weight is needed.
pub fn lambda_adapter_forward(
    sx: &PointSet,
    sy: &PointSet,
    weights: &AdapterWeights,
) -> Result<f64> {
    if sx.len() != sy.len() {
        return Err(Error::CardinalityMismatch {
            left: sx.len(),
            right: sy.len(),
        });
    }
    if sx.dim() != weights.input_dim || sy.dim() != weights.input_dim {
        return Err(Error::AdapterShape {
            detail: format!(
                "weights expect point dimension {}, sets have {} and {}",
                weights.input_dim,
                sx.dim(),
                sy.dim()
            ),
        });
    }
    let x = coords_matrix(sx);
    let y = coords_matrix(sy);
    let h1 = cross_attention(&x, &y, &weights.layers[0])?;
    let h2 = cross_attention(&h1, &y, &weights.layers[1])?;
    // mean pool over positions
    let n = h2.nrows() as f64;
    let pooled = h2.sum_axis(ndarray::Axis(0)) / n;
    let pooled = pooled.insert_axis(ndarray::Axis(0));
    let hidden = affine(&pooled, &weights.g_w1, &weights.g_b1)?;
    let logits = affine(&hidden, &weights.g_w2, &weights.g_b2)?;
    let z0 = logits[(0, 0)];
    let z1 = logits[(0, 1)];
    let max = z0.max(z1);
    let e0 = (z0 - max).exp();
    let e1 = (z1 - max).exp();
    Ok(e0 / (e0 + e1))
}
