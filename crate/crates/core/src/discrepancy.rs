//! Adaptive thresholding of the aligned latent-distance signal and
//! extraction of discrepant segments and key frames.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD_K: f64 = 1.0;
pub const DEFAULT_MIN_GAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub threshold: f64,
    /// Inclusive `(start, end)` user-frame ranges, sorted and disjoint.
    pub flagged_segments: Vec<(usize, usize)>,
    /// One per segment: the first frame attaining the segment maximum.
    pub key_frames: Vec<usize>,
}

impl DiscrepancyResult {
    pub fn flagged_frame_count(&self) -> usize {
        self.flagged_segments.iter().map(|(s, e)| e - s + 1).sum()
    }

    pub fn contains(&self, frame: usize) -> bool {
        self.flagged_segments.iter().any(|&(s, e)| (s..=e).contains(&frame))
    }
}

/// `mean + k * std` with the population (divide by N) standard deviation.
pub fn adaptive_threshold(signal: &[f64], k: f64) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { frame: i, index: 0 });
    }
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let var = signal.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(mean + k * var.sqrt())
}

/// Flags maximal runs with `signal > threshold`, merges runs separated by
/// fewer than `min_gap` unflagged frames, and picks the argmax of each
/// merged segment as its key frame.
pub fn detect_discrepant_frames(signal: &[f64], threshold: f64, min_gap: usize) -> DiscrepancyResult {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in signal.iter().enumerate() {
        match (v > threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, signal.len() - 1));
    }

    let mut segments: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for run in runs {
        match segments.last_mut() {
            // gap = number of unflagged frames between the two runs
            Some(last) if run.0 - last.1 - 1 < min_gap => last.1 = run.1,
            _ => segments.push(run),
        }
    }

    let key_frames = segments
        .iter()
        .map(|&(s, e)| (s..=e).fold(s, |best, i| if signal[i] > signal[best] { i } else { best }))
        .collect();

    DiscrepancyResult {
        threshold,
        flagged_segments: segments,
        key_frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_hand_example() {
        // mean 2.6; deviations -1.6 (x4) and 6.4; variance 51.2 / 5 = 10.24
        let t = adaptive_threshold(&[1.0, 1.0, 1.0, 1.0, 9.0], 1.0).unwrap();
        assert!((t - 5.8).abs() < 1e-12, "{t}");
        let r = detect_discrepant_frames(&[1.0, 1.0, 1.0, 1.0, 9.0], t, 0);
        assert_eq!(r.flagged_segments, vec![(4, 4)]);
        assert_eq!(r.key_frames, vec![4]);
    }

    #[test]
    fn threshold_edge_cases() {
        assert_eq!(adaptive_threshold(&[0.25; 3], 4.0).unwrap(), 0.25);
        let s = [0.5, 1.5, 4.0];
        assert_eq!(adaptive_threshold(&s, 0.0).unwrap(), 2.0);
        assert!(matches!(adaptive_threshold(&[], 1.0), Err(Error::EmptySignal)));
        assert!(adaptive_threshold(&[1.0, f64::NAN], 1.0).is_err());
    }

    #[test]
    fn nothing_above_threshold() {
        let r = detect_discrepant_frames(&[0.1, 0.2, 0.3], 0.3, 3);
        assert!(r.flagged_segments.is_empty());
        assert!(r.key_frames.is_empty());
        // strict inequality: constant signal at its own threshold flags nothing
        let c = [0.0; 5];
        let t = adaptive_threshold(&c, 1.0).unwrap();
        assert!(detect_discrepant_frames(&c, t, 0).flagged_segments.is_empty());
    }

    #[test]
    fn close_runs_merge() {
        let r = detect_discrepant_frames(&[0.0, 7.0, 0.0, 7.0, 0.0], 5.0, 2);
        assert_eq!(r.flagged_segments, vec![(1, 3)]);
        assert_eq!(r.key_frames, vec![1]);
        let apart = detect_discrepant_frames(&[0.0, 7.0, 0.0, 7.0, 0.0], 5.0, 1);
        assert_eq!(apart.flagged_segments, vec![(1, 1), (3, 3)]);
        assert_eq!(apart.key_frames, vec![1, 3]);
    }

    #[test]
    fn run_touching_the_end() {
        let r = detect_discrepant_frames(&[9.0, 0.0, 0.0, 0.0, 3.0, 8.0], 1.0, 3);
        assert_eq!(r.flagged_segments, vec![(0, 0), (4, 5)]);
        assert_eq!(r.key_frames, vec![0, 5]);
        assert_eq!(r.flagged_frame_count(), 3);
        assert!(r.contains(4) && !r.contains(2));
    }

    fn signal() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..10.0, 1..60)
    }

    proptest! {
        #[test]
        fn flag_set_is_exact_without_merging(s in signal(), t in 0.0f64..10.0) {
            let r = detect_discrepant_frames(&s, t, 0);
            for (i, v) in s.iter().enumerate() {
                prop_assert_eq!(r.contains(i), *v > t);
            }
        }

        #[test]
        fn segment_invariants(s in signal(), t in 0.0f64..10.0, gap in 0usize..6) {
            let r = detect_discrepant_frames(&s, t, gap);
            prop_assert_eq!(r.flagged_segments.len(), r.key_frames.len());
            for w in r.flagged_segments.windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for (&(a, b), &k) in r.flagged_segments.iter().zip(&r.key_frames) {
                prop_assert!(a <= b && (a..=b).contains(&k));
                prop_assert!(s[a] > t && s[b] > t);
                let max = s[a..=b].iter().cloned().fold(f64::MIN, f64::max);
                prop_assert_eq!(s[k], max);
                prop_assert!(s[a..k].iter().all(|v| *v < max));
            }
        }

        #[test]
        fn higher_threshold_flags_fewer(s in signal(), t in 0.0f64..10.0, dt in 0.0f64..5.0) {
            let lo = detect_discrepant_frames(&s, t, 0).flagged_frame_count();
            let hi = detect_discrepant_frames(&s, t + dt, 0).flagged_frame_count();
            prop_assert!(hi <= lo);
        }

        #[test]
        fn merging_is_idempotent(s in signal(), t in 0.0f64..10.0, gap in 0usize..6) {
            let r = detect_discrepant_frames(&s, t, gap);
            let indicator: Vec<f64> = (0..s.len()).map(|i| if r.contains(i) { 1.0 } else { 0.0 }).collect();
            let again = detect_discrepant_frames(&indicator, 0.5, gap);
            prop_assert_eq!(again.flagged_segments, r.flagged_segments);
        }

        #[test]
        fn threshold_affine_equivariance(s in signal(), k in -2.0f64..3.0, a in 0.01f64..100.0, b in -50.0f64..50.0) {
            let base = adaptive_threshold(&s, k).unwrap();
            let shifted: Vec<f64> = s.iter().map(|v| a * v + b).collect();
            let t = adaptive_threshold(&shifted, k).unwrap();
            let expected = a * base + b;
            prop_assert!((t - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }
}
