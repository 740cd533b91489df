//! End-to-end analysis of a user/expert session and the persisted report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::alignment::{dtw_align, sync_map, AlignmentPath, SyncMap};
use crate::discrepancy::{
    adaptive_threshold, detect_discrepant_frames, DiscrepancyResult, DEFAULT_MIN_GAP, DEFAULT_THRESHOLD_K,
};
use crate::embedding::{distance_matrix, proxy_embed};
use crate::error::{Error, Result};
use crate::io::{load_embedding_sequence, load_pose_sequence};
use crate::model::{validate_pair, ClipPair, PoseSequence};
use crate::pose::{compare_frames, FrameComparison};
use crate::stats::{correlation_table, CorrelationTable};

pub const REPORT_SCHEMA_VERSION: &str = "swingdiff.report/1";
pub const TOOL_VERSION: &str = concat!("swingdiff ", env!("CARGO_PKG_VERSION"));

fn default_k() -> f64 {
    DEFAULT_THRESHOLD_K
}
fn default_min_gap() -> usize {
    DEFAULT_MIN_GAP
}
fn yes() -> bool {
    true
}

/// Tunable analysis parameters, independent of where the clips come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    #[serde(default)]
    pub step_penalty: f64,
    #[serde(default = "default_k")]
    pub threshold_k: f64,
    #[serde(default = "default_min_gap")]
    pub min_gap: usize,
    #[serde(default = "yes")]
    pub with_scale: bool,
    #[serde(default = "yes")]
    pub include_club_in_proxy: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            step_penalty: 0.0,
            threshold_k: DEFAULT_THRESHOLD_K,
            min_gap: DEFAULT_MIN_GAP,
            with_scale: true,
            include_club_in_proxy: true,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_penalty.is_finite() && self.step_penalty >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "step_penalty must be finite and non-negative, got {}",
                self.step_penalty
            )));
        }
        if !self.threshold_k.is_finite() {
            return Err(Error::InvalidParams("threshold_k must be finite".into()));
        }
        Ok(())
    }
}

/// Input files plus analysis options. Without embedding files the proxy
/// embedder is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub user_pose_path: PathBuf,
    pub expert_pose_path: PathBuf,
    #[serde(default)]
    pub user_emb_path: Option<PathBuf>,
    #[serde(default)]
    pub expert_emb_path: Option<PathBuf>,
    #[serde(flatten)]
    pub options: AnalysisOptions,
}

impl SessionConfig {
    pub fn new(user_pose_path: impl Into<PathBuf>, expert_pose_path: impl Into<PathBuf>) -> Self {
        Self {
            user_pose_path: user_pose_path.into(),
            expert_pose_path: expert_pose_path.into(),
            user_emb_path: None,
            expert_emb_path: None,
            options: AnalysisOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.user_emb_path.is_some() != self.expert_emb_path.is_some() {
            return Err(Error::InvalidParams(
                "user and expert embedding paths must be given together".into(),
            ));
        }
        self.options.validate()
    }

    /// Reads a JSON config; relative paths resolve against the config file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: SessionConfig = serde_json::from_str(&text)
            .map_err(|e| Error::MalformedFile(e.to_string()).in_file("load config", path))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.user_pose_path);
        resolve(&mut cfg.expert_pose_path);
        cfg.user_emb_path.as_mut().map(resolve);
        cfg.expert_emb_path.as_mut().map(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates the clip pair this config points at.
    pub fn load_pair(&self) -> Result<ClipPair> {
        self.validate()?;
        let load_pose = |stage, p: &Path| load_pose_sequence(p).map_err(|e| e.in_file(stage, p));
        let user_pose = load_pose("load user pose", &self.user_pose_path)?;
        let expert_pose = load_pose("load expert pose", &self.expert_pose_path)?;
        let (user_emb, expert_emb) = match (&self.user_emb_path, &self.expert_emb_path) {
            (Some(u), Some(e)) => (
                load_embedding_sequence(u).map_err(|err| err.in_file("load user embedding", u))?,
                load_embedding_sequence(e).map_err(|err| err.in_file("load expert embedding", e))?,
            ),
            _ => {
                let embed = |stage, seq: &PoseSequence, p: &Path| {
                    proxy_embed(seq, self.options.include_club_in_proxy).map_err(|e| e.in_file(stage, p))
                };
                (
                    embed("proxy embed user", &user_pose, &self.user_pose_path)?,
                    embed("proxy embed expert", &expert_pose, &self.expert_pose_path)?,
                )
            }
        };
        Ok(ClipPair {
            user_pose,
            expert_pose,
            user_emb,
            expert_emb,
        })
    }
}

/// Everything computed for a session, without provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub path: AlignmentPath,
    pub sync: SyncMap,
    pub threshold: f64,
    pub discrepancy: DiscrepancyResult,
    pub comparisons: Vec<FrameComparison>,
    pub correlations_all: CorrelationTable,
    pub correlations_keyframes: CorrelationTable,
}

fn keyframe_table(comparisons: &[FrameComparison], key_frames: &[usize]) -> Result<CorrelationTable> {
    let picked: Vec<FrameComparison> = key_frames.iter().map(|&i| comparisons[i].clone()).collect();
    match correlation_table(&picked) {
        Err(Error::TooFewSamples(n)) => Ok(CorrelationTable::undefined(n)),
        other => other,
    }
}

/// Runs alignment, discrepancy detection, per-frame comparison and the
/// correlation tables on an in-memory clip pair.
pub fn analyze_pair(pair: &ClipPair, options: &AnalysisOptions) -> Result<Analysis> {
    options.validate()?;
    let violations = validate_pair(pair);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidPair(msg.join("; ")));
    }

    let d = distance_matrix(&pair.user_emb, &pair.expert_emb).map_err(|e| e.in_stage("distance matrix"))?;
    let path = dtw_align(&d, options.step_penalty).map_err(|e| e.in_stage("dtw alignment"))?;
    let sync = sync_map(&path, &d).map_err(|e| e.in_stage("sync map"))?;

    let threshold =
        adaptive_threshold(&sync.aligned_distance, options.threshold_k).map_err(|e| e.in_stage("threshold"))?;
    let discrepancy = detect_discrepant_frames(&sync.aligned_distance, threshold, options.min_gap);

    let comparisons = (0..pair.user_pose.len())
        .map(|i| {
            let j = sync.expert_for_user[i];
            let mut c = compare_frames(
                &pair.user_pose.frames()[i],
                &pair.expert_pose.frames()[j],
                sync.aligned_distance[i],
                options.with_scale,
            )
            .map_err(|e| e.at_frame("compare frames", i))?;
            c.user_frame = i;
            c.expert_frame = j;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let correlations_all = correlation_table(&comparisons).map_err(|e| e.in_stage("correlation"))?;
    let correlations_keyframes =
        keyframe_table(&comparisons, &discrepancy.key_frames).map_err(|e| e.in_stage("correlation"))?;

    Ok(Analysis {
        path,
        sync,
        threshold,
        discrepancy,
        comparisons,
        correlations_all,
        correlations_keyframes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub schema: String,
    pub tool: String,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            schema: REPORT_SCHEMA_VERSION.into(),
            tool: TOOL_VERSION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: SessionConfig,
    pub path: AlignmentPath,
    pub sync: SyncMap,
    pub threshold: f64,
    pub discrepancy: DiscrepancyResult,
    pub comparisons: Vec<FrameComparison>,
    pub correlations_all: CorrelationTable,
    pub correlations_keyframes: CorrelationTable,
    pub versions: Versions,
}

impl AnalysisReport {
    pub fn from_analysis(config: SessionConfig, a: Analysis) -> Self {
        Self {
            config,
            path: a.path,
            sync: a.sync,
            threshold: a.threshold,
            discrepancy: a.discrepancy,
            comparisons: a.comparisons,
            correlations_all: a.correlations_all,
            correlations_keyframes: a.correlations_keyframes,
            versions: Versions::default(),
        }
    }

    /// The aligned latent-distance signal, one value per user frame.
    pub fn signal(&self) -> &[f64] {
        &self.sync.aligned_distance
    }

    /// Re-derives the threshold and discrepancy result (and the key-frame
    /// correlation table, which depends on the key frames) from the stored
    /// signal. Alignment and comparisons are left untouched.
    pub fn recompute_discrepancy(&mut self, threshold_k: Option<f64>, min_gap: Option<usize>) -> Result<()> {
        let k = threshold_k.unwrap_or(self.config.options.threshold_k);
        let gap = min_gap.unwrap_or(self.config.options.min_gap);
        if !k.is_finite() {
            return Err(Error::InvalidParams("threshold_k must be finite".into()));
        }
        let threshold = adaptive_threshold(self.signal(), k)?;
        let discrepancy = detect_discrepant_frames(self.signal(), threshold, gap);
        let keyframes = keyframe_table(&self.comparisons, &discrepancy.key_frames)?;
        self.config.options.threshold_k = k;
        self.config.options.min_gap = gap;
        self.threshold = threshold;
        self.discrepancy = discrepancy;
        self.correlations_keyframes = keyframes;
        Ok(())
    }
}

/// Loads the configured inputs and runs the whole pipeline.
pub fn run_analysis(cfg: &SessionConfig) -> Result<AnalysisReport> {
    let pair = cfg.load_pair()?;
    let analysis = analyze_pair(&pair, &cfg.options)?;
    Ok(AnalysisReport::from_analysis(cfg.clone(), analysis))
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Canonical report JSON: sorted keys, two-space indentation, shortest
/// round-trip numbers, trailing newline.
pub fn report_to_json(report: &AnalysisReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&sort_keys(value)).expect("value serializes");
    out.push('\n');
    out
}

pub fn report_from_json(text: &str) -> Result<AnalysisReport> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
    let found = value
        .pointer("/versions/schema")
        .and_then(Value::as_str)
        .unwrap_or("<missing>");
    if found != REPORT_SCHEMA_VERSION {
        return Err(Error::SchemaVersionMismatch {
            found: found.to_string(),
            expected: REPORT_SCHEMA_VERSION.into(),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedFile(e.to_string()))
}

pub fn write_report(report: &AnalysisReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_to_json(report)).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<AnalysisReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    report_from_json(&text).map_err(|e| e.in_file("read report", path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::save_pose_sequence;
    use crate::model::EmbeddingSequence;
    use crate::synth::{generate_swing, SwingParams};

    fn swing() -> PoseSequence {
        generate_swing(&SwingParams::preset("compact", 0).unwrap()).unwrap()
    }

    #[test]
    fn self_session_is_clean() {
        let s = swing();
        let emb = proxy_embed(&s, true).unwrap();
        let pair = ClipPair {
            user_pose: s.clone(),
            expert_pose: s,
            user_emb: emb.clone(),
            expert_emb: emb,
        };
        let a = analyze_pair(&pair, &AnalysisOptions::default()).unwrap();
        assert_eq!(a.path.total_cost, 0.0);
        assert!(a.comparisons.iter().all(|c| c.mpjpe == 0.0));
        assert!(a.discrepancy.flagged_segments.is_empty());
        assert_eq!(a.comparisons.len(), pair.user_pose.len());
        assert_eq!(a.correlations_all.get(crate::model::BodyPartGroup::WholeBody), None);
    }

    #[test]
    fn invalid_pair_is_rejected() {
        let s = swing();
        let emb = proxy_embed(&s, true).unwrap();
        let short = EmbeddingSequence::new(emb.dim(), emb.frames()[1..].to_vec()).unwrap();
        let pair = ClipPair {
            user_pose: s.clone(),
            expert_pose: s,
            user_emb: short,
            expert_emb: emb,
        };
        let err = analyze_pair(&pair, &AnalysisOptions::default()).unwrap_err();
        assert!(
            matches!(&err, Error::InvalidPair(m) if m.contains("LENGTH_MISMATCH(user)")),
            "{err}"
        );
    }

    #[test]
    fn config_requires_both_embeddings() {
        let mut cfg = SessionConfig::new("a.json", "b.json");
        cfg.user_emb_path = Some("u.json".into());
        assert!(matches!(cfg.validate(), Err(Error::InvalidParams(_))));
        cfg.expert_emb_path = Some("e.json".into());
        assert!(cfg.validate().is_ok());
        cfg.options.step_penalty = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_file_defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("session.json");
        fs::write(
            &cfg_path,
            r#"{"user_pose_path": "u.json", "expert_pose_path": "/abs/e.json", "threshold_k": 2}"#,
        )
        .unwrap();
        let cfg = SessionConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.user_pose_path, dir.path().join("u.json"));
        assert_eq!(cfg.expert_pose_path, PathBuf::from("/abs/e.json"));
        assert_eq!(cfg.options.threshold_k, 2.0);
        assert_eq!(cfg.options.min_gap, 3);
        assert!(cfg.options.with_scale && cfg.options.include_club_in_proxy);
    }

    #[test]
    fn load_errors_carry_file_context() {
        let dir = tempfile::tempdir().unwrap();
        let user = dir.path().join("user.json");
        save_pose_sequence(&user, &swing()).unwrap();
        let cfg = SessionConfig::new(&user, dir.path().join("missing.json"));
        let err = run_analysis(&cfg).unwrap_err();
        assert_eq!(err.code(), "IO_FAILURE");
        assert!(err.to_string().contains("load expert pose"), "{err}");
        assert!(err.to_string().contains("missing.json"), "{err}");
    }

    #[test]
    fn report_round_trip_and_version_check() {
        let dir = tempfile::tempdir().unwrap();
        let user = dir.path().join("user.json");
        let expert = dir.path().join("expert.json");
        save_pose_sequence(&user, &swing()).unwrap();
        let noisy = generate_swing(&SwingParams {
            noise_std: 0.02,
            ..SwingParams::preset("compact", 4).unwrap()
        })
        .unwrap();
        save_pose_sequence(&expert, &noisy).unwrap();
        let report = run_analysis(&SessionConfig::new(&user, &expert)).unwrap();

        let out = dir.path().join("report.json");
        write_report(&report, &out).unwrap();
        let first = fs::read(&out).unwrap();
        write_report(&report, &out).unwrap();
        assert_eq!(first, fs::read(&out).unwrap());
        assert_eq!(read_report(&out).unwrap(), report);

        let text = String::from_utf8(first)
            .unwrap()
            .replace(REPORT_SCHEMA_VERSION, "swingdiff.report/0");
        assert!(matches!(
            report_from_json(&text),
            Err(Error::SchemaVersionMismatch { .. })
        ));
        assert!(matches!(
            report_from_json("{}"),
            Err(Error::SchemaVersionMismatch { .. })
        ));
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": [{"z": 0, "y": 1}], "c": 2}});
        let text = serde_json::to_string(&sort_keys(v)).unwrap();
        assert_eq!(text, r#"{"a":{"c":2,"d":[{"y":1,"z":0}]},"b":1}"#);
    }

    #[test]
    fn recompute_only_touches_discrepancy() {
        let s = swing();
        let noisy = generate_swing(&SwingParams {
            noise_std: 0.03,
            ..SwingParams::preset("compact", 8).unwrap()
        })
        .unwrap();
        let pair = ClipPair {
            user_emb: proxy_embed(&s, true).unwrap(),
            expert_emb: proxy_embed(&noisy, true).unwrap(),
            user_pose: s,
            expert_pose: noisy,
        };
        let a = analyze_pair(&pair, &AnalysisOptions::default()).unwrap();
        let mut report = AnalysisReport::from_analysis(SessionConfig::new("u", "e"), a);
        let before = report.clone();
        report.recompute_discrepancy(Some(2.0), Some(0)).unwrap();
        assert_eq!(report.threshold, adaptive_threshold(before.signal(), 2.0).unwrap());
        assert_eq!(report.sync, before.sync);
        assert_eq!(report.path, before.path);
        assert_eq!(report.comparisons, before.comparisons);
        assert_eq!(report.config.options.threshold_k, 2.0);
        assert_eq!(report.config.options.min_gap, 0);
        assert!(report.recompute_discrepancy(Some(f64::NAN), None).is_err());
    }
}
