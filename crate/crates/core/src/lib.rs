//! Motion comparison between a learner's clip and an expert's clip.
//!
//! Per-frame latent embeddings of both clips are aligned with dynamic time
//! warping; the latent distance along the alignment drives an adaptive
//! threshold that flags discrepant segments and key frames. Matched
//! skeletons are superimposed with Procrustes analysis to report per-joint,
//! per-body-part and whole-body (MPJPE) errors, and those errors are
//! correlated with the latent distance.
//!
//! ```no_run
//! use swingdiff_core::{run_analysis, write_report, SessionConfig};
//!
//! let cfg = SessionConfig::new("user_pose.json", "expert_pose.json");
//! let report = run_analysis(&cfg)?;
//! write_report(&report, "report.json")?;
//! # Ok::<(), swingdiff_core::Error>(())
//! ```

pub mod alignment;
pub mod discrepancy;
pub mod embedding;
pub mod error;
pub mod io;
pub mod model;
pub mod pose;
pub mod session;
pub mod stats;
pub mod synth;

pub use alignment::{dtw_align, sync_map, tiebreak_backtrack_order, AlignmentPath, Step, SyncMap};
pub use discrepancy::{adaptive_threshold, detect_discrepant_frames, DiscrepancyResult};
pub use embedding::{distance_matrix, euclidean_distance, proxy_embed, DistanceMatrix};
pub use error::{Error, ErrorKind, Result};
pub use io::{load_embedding_sequence, load_pose_sequence, save_embedding_sequence, save_pose_sequence};
pub use model::{
    validate_pair, BodyPartGroup, ClipPair, EmbeddingSequence, JointSchema, Point, Pose, PoseSequence, Side, Violation,
    JOINT_COUNT, JOINT_NAMES,
};
pub use pose::{compare_frames, procrustes_fit, raw_mpjpe, FrameComparison, SimilarityTransform};
pub use session::{
    analyze_pair, read_report, report_from_json, report_to_json, run_analysis, write_report, Analysis, AnalysisOptions,
    AnalysisReport, SessionConfig, Versions, REPORT_SCHEMA_VERSION, TOOL_VERSION,
};
pub use stats::{correlation_table, pearson, rank_groups, CorrelationTable};
pub use synth::{
    apply_warp, coupled_embedding, generate_swing, synthesize_session, SessionSpec, SwingParams, WarpSpec,
};
