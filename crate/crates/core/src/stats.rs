//! Pearson correlation between per-part joint errors and latent distance.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BodyPartGroup;
use crate::pose::FrameComparison;

/// Sample Pearson correlation; `None` when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples(a.len()));
    }
    let constant = |s: &[f64]| s.iter().all(|v| *v == s[0]);
    if constant(a) || constant(b) {
        return Ok(None);
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(None);
    }
    let r = sab / (saa * sbb).sqrt();
    Ok(Some(r.clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// Group name to coefficient; `None` marks an undefined (zero-variance)
    /// entry.
    pub entries: BTreeMap<String, Option<f64>>,
    pub sample_count: usize,
}

impl CorrelationTable {
    /// A table with every group undefined, for sessions with too few samples.
    pub fn undefined(sample_count: usize) -> Self {
        Self {
            entries: BodyPartGroup::ALL
                .into_iter()
                .map(|g| (g.name().to_string(), None))
                .collect(),
            sample_count,
        }
    }

    pub fn get(&self, group: BodyPartGroup) -> Option<f64> {
        self.entries.get(group.name()).copied().flatten()
    }
}

/// Correlates each group's error (and whole-body MPJPE) with latent distance
/// across `comparisons`.
pub fn correlation_table(comparisons: &[FrameComparison]) -> Result<CorrelationTable> {
    if comparisons.len() < 2 {
        return Err(Error::TooFewSamples(comparisons.len()));
    }
    let latent: Vec<f64> = comparisons.iter().map(|c| c.latent_distance).collect();
    let mut entries = BTreeMap::new();
    for g in BodyPartGroup::ALL {
        let errors: Vec<f64> = comparisons
            .iter()
            .map(|c| c.group_error(g).unwrap_or(f64::NAN))
            .collect();
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParams(format!("comparison lacks a finite {g} error")));
        }
        entries.insert(g.name().to_string(), pearson(&errors, &latent)?);
    }
    Ok(CorrelationTable {
        entries,
        sample_count: comparisons.len(),
    })
}

/// Entries by descending coefficient, undefined last, ties alphabetical.
pub fn rank_groups(table: &CorrelationTable) -> Vec<(String, Option<f64>)> {
    let mut out: Vec<(String, Option<f64>)> = table.entries.iter().map(|(k, v)| (k.clone(), *v)).collect();
    out.sort_by(|(na, a), (nb, b)| {
        let by_value = match (a, b) {
            (Some(x), Some(y)) => y.partial_cmp(x).unwrap_or(Ordering::Equal),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_value.then_with(|| na.cmp(nb))
    });
    out
}
