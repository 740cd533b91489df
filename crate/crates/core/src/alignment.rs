//! Dynamic time warping over a latent distance matrix and the per-user-frame
//! synchronization it induces.
//!
//! The accumulated cost follows
//!
//! ```text
//! cost(0,0) = d(0,0)
//! cost(i,j) = d(i,j) + min(cost(i-1,j-1),
//!                          cost(i-1,j) + penalty,
//!                          cost(i,j-1) + penalty)
//! ```
//!
//! where `penalty` is an additive charge on non-diagonal steps. With a zero
//! penalty this is plain DTW; positive values discourage one clip stalling
//! while the other advances.

use serde::{Deserialize, Serialize};

use crate::embedding::DistanceMatrix;
use crate::error::{Error, Result};

/// Backtracking move, named by the predecessor it points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// From `(i-1, j-1)`.
    Diagonal,
    /// From `(i-1, j)`.
    Up,
    /// From `(i, j-1)`.
    Left,
}

/// Preference among predecessors whose accumulated costs tie.
const BACKTRACK_ORDER: [Step; 3] = [Step::Diagonal, Step::Up, Step::Left];

/// The fixed tie-break used when several predecessors reach a cell with the
/// same accumulated cost: diagonal, then up, then left. This makes
/// [`dtw_align`] deterministic.
pub fn tiebreak_backtrack_order() -> [Step; 3] {
    BACKTRACK_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub steps: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl AlignmentPath {
    /// Checks endpoints and step shapes against an `rows x cols` matrix.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let fail = |reason: String| Error::PathShapeMismatch { rows, cols, reason };
        if rows == 0 || cols == 0 {
            return Err(fail("empty matrix".into()));
        }
        match (self.steps.first(), self.steps.last()) {
            (Some(&(0, 0)), Some(&last)) if last == (rows - 1, cols - 1) => {}
            (first, last) => {
                return Err(fail(format!("path runs from {first:?} to {last:?}")));
            }
        }
        for w in self.steps.windows(2) {
            let ((i0, j0), (i1, j1)) = (w[0], w[1]);
            let ok = matches!(
                (i1.checked_sub(i0), j1.checked_sub(j0)),
                (Some(1), Some(0)) | (Some(0), Some(1)) | (Some(1), Some(1))
            );
            if !ok {
                return Err(fail(format!("illegal step {:?} -> {:?}", w[0], w[1])));
            }
        }
        Ok(())
    }
}

/// Minimum-cost monotone alignment of user frames (rows) to expert frames
/// (columns).
pub fn dtw_align(d: &DistanceMatrix, step_penalty: f64) -> Result<AlignmentPath> {
    if d.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !(step_penalty.is_finite() && step_penalty >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "step penalty must be finite and non-negative, got {step_penalty}"
        )));
    }
    let (n, m) = (d.rows(), d.cols());
    let mut cost = vec![0.0f64; n * m];
    let mut from = vec![Step::Diagonal; n * m];

    for i in 0..n {
        for j in 0..m {
            let here = d.get(i, j);
            if i == 0 && j == 0 {
                cost[0] = here;
                continue;
            }
            let mut best: Option<(f64, Step)> = None;
            for step in BACKTRACK_ORDER {
                let candidate = match step {
                    Step::Diagonal if i > 0 && j > 0 => cost[(i - 1) * m + j - 1],
                    Step::Up if i > 0 => cost[(i - 1) * m + j] + step_penalty,
                    Step::Left if j > 0 => cost[i * m + j - 1] + step_penalty,
                    _ => continue,
                };
                // strict comparison keeps the earlier (preferred) step on ties
                if best.map_or(true, |(b, _)| candidate < b) {
                    best = Some((candidate, step));
                }
            }
            let (prev, step) = best.expect("at least one predecessor");
            cost[i * m + j] = here + prev;
            from[i * m + j] = step;
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    steps.push((i, j));
    while (i, j) != (0, 0) {
        match from[i * m + j] {
            Step::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Step::Up => i -= 1,
            Step::Left => j -= 1,
        }
        steps.push((i, j));
    }
    steps.reverse();

    Ok(AlignmentPath {
        steps,
        total_cost: cost[n * m - 1],
    })
}

/// For each user frame, the matched expert frame and the latent distance at
/// that match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncMap {
    pub expert_for_user: Vec<usize>,
    pub aligned_distance: Vec<f64>,
}

/// Collapses a path to one expert frame per user frame: among the path cells
/// in row `i`, the one with the smallest distance (smallest `j` on ties).
pub fn sync_map(path: &AlignmentPath, d: &DistanceMatrix) -> Result<SyncMap> {
    path.validate(d.rows(), d.cols())?;
    let n = d.rows();
    let mut best: Vec<Option<(usize, f64)>> = vec![None; n];
    for &(i, j) in &path.steps {
        let v = d.get(i, j);
        match best[i] {
            Some((_, b)) if v >= b => {}
            _ => best[i] = Some((j, v)),
        }
    }
    let (expert_for_user, aligned_distance) = best
        .into_iter()
        .map(|b| b.expect("valid path visits every row"))
        .unzip();
    Ok(SyncMap {
        expert_for_user,
        aligned_distance,
    })
}
