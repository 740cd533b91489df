//! Latent-space distances and the pose-derived proxy embedder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EmbeddingSequence, Pose, PoseSequence, JOINT_COUNT, PELVIS};

pub fn euclidean_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(squared_distance(u, v).sqrt())
}

fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Dense row-major matrix of frame-to-frame latent distances; rows index
/// user frames, columns expert frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row vectors. Entries must be finite and
    /// non-negative; rows must share a length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::RaggedRows {
                    frame: i,
                    found: row.len(),
                    expected: m,
                });
            }
            if let Some(j) = row.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "distance at ({i},{j}) must be finite and non-negative"
                )));
            }
            values.extend(row);
        }
        Ok(Self {
            rows: n,
            cols: m,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                values.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }
}

pub fn distance_matrix(a: &EmbeddingSequence, b: &EmbeddingSequence) -> Result<DistanceMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let mut values = Vec::with_capacity(a.len() * b.len());
    for u in a.frames() {
        values.extend(b.frames().iter().map(|v| squared_distance(u, v).sqrt()));
    }
    Ok(DistanceMatrix {
        rows: a.len(),
        cols: b.len(),
        values,
    })
}

/// Embedding dimension of [`proxy_embed`] without club keypoints.
pub const PROXY_DIM: usize = JOINT_COUNT * 3;
/// Embedding dimension of [`proxy_embed`] with the club direction appended.
pub const PROXY_DIM_WITH_CLUB: usize = PROXY_DIM + 3;

/// Pelvis-centred, scale-normalized flattened joints, optionally followed by
/// the unit grip-to-head club direction.
fn proxy_frame(pose: &Pose, include_club: bool) -> Result<Vec<f64>> {
    let root = pose.joint(PELVIS);
    let centred: Vec<[f64; 3]> = pose
        .joints()
        .iter()
        .map(|p| [p[0] - root[0], p[1] - root[1], p[2] - root[2]])
        .collect();
    let mean_norm = centred.iter().map(|p| norm3(*p)).sum::<f64>() / JOINT_COUNT as f64;
    if !(mean_norm > 0.0 && mean_norm.is_finite()) {
        return Err(Error::DegeneratePose("all joints coincide".into()));
    }
    let mut out = Vec::with_capacity(PROXY_DIM_WITH_CLUB);
    out.extend(centred.iter().flat_map(|p| p.map(|c| c / mean_norm)));
    if include_club {
        if let Some([grip, head]) = pose.club() {
            let d = [head[0] - grip[0], head[1] - grip[1], head[2] - grip[2]];
            let len = norm3(d);
            if len == 0.0 {
                return Err(Error::DegeneratePose("club grip and head coincide".into()));
            }
            out.extend(d.map(|c| c / len));
        }
    }
    Ok(out)
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Deterministic stand-in for a learned frame encoder.
///
/// Invariant to global translation and uniform scaling; deliberately not
/// rotation-normalized, so viewpoint changes move the embedding.
pub fn proxy_embed(seq: &PoseSequence, include_club: bool) -> Result<EmbeddingSequence> {
    let frames = seq
        .frames()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            proxy_frame(p, include_club).map_err(|e| match e {
                Error::DegeneratePose(m) => Error::DegeneratePose(format!("frame {i}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = if include_club && seq.has_club() {
        PROXY_DIM_WITH_CLUB
    } else {
        PROXY_DIM
    };
    EmbeddingSequence::new(dim, frames)
}
