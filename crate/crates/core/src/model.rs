//! Canonical data model: the 17-joint skeleton schema, body-part groups,
//! poses, pose and embedding sequences, and the user/expert clip pair.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const JOINT_COUNT: usize = 17;

/// A 3D point in the input's (unit-agnostic) coordinate frame.
pub type Point = [f64; 3];

/// Joint names in schema order.
pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "pelvis",
    "r_hip",
    "r_knee",
    "r_ankle",
    "l_hip",
    "l_knee",
    "l_ankle",
    "spine",
    "thorax",
    "neck",
    "head",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
];

pub const PELVIS: usize = 0;

/// The fixed 17-joint skeleton vocabulary.
#[derive(Debug, Clone, Copy, Default)]
pub struct JointSchema;

impl JointSchema {
    pub fn joint_names(&self) -> &'static [&'static str; JOINT_COUNT] {
        &JOINT_NAMES
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        JOINT_NAMES.iter().position(|n| *n == name)
    }

    /// For each schema joint `k`, the position of that joint in `names`.
    ///
    /// Fails with [`Error::SchemaMismatch`] naming the first missing,
    /// unknown or duplicated joint.
    pub fn permutation_from(&self, names: &[impl AsRef<str>]) -> Result<[usize; JOINT_COUNT]> {
        let mut perm = [usize::MAX; JOINT_COUNT];
        for (pos, name) in names.iter().enumerate() {
            let name = name.as_ref();
            let k = self
                .index_of(name)
                .ok_or_else(|| Error::SchemaMismatch(format!("unknown joint name {name:?}")))?;
            if perm[k] != usize::MAX {
                return Err(Error::SchemaMismatch(format!("duplicate joint name {name:?}")));
            }
            perm[k] = pos;
        }
        if let Some(k) = perm.iter().position(|&p| p == usize::MAX) {
            return Err(Error::SchemaMismatch(format!("missing joint {:?}", JOINT_NAMES[k])));
        }
        Ok(perm)
    }
}

/// Named body-part groups used for per-part error aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyPartGroup {
    Wrist,
    Elbow,
    Shoulder,
    Neck,
    Head,
    Spine,
    Knee,
    Foot,
    Hip,
    WholeBody,
}

const ALL_JOINTS: [usize; JOINT_COUNT] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16];

impl BodyPartGroup {
    /// The nine named parts, excluding [`BodyPartGroup::WholeBody`].
    pub const PARTS: [BodyPartGroup; 9] = [
        BodyPartGroup::Wrist,
        BodyPartGroup::Elbow,
        BodyPartGroup::Shoulder,
        BodyPartGroup::Neck,
        BodyPartGroup::Head,
        BodyPartGroup::Spine,
        BodyPartGroup::Knee,
        BodyPartGroup::Foot,
        BodyPartGroup::Hip,
    ];

    /// The nine parts followed by [`BodyPartGroup::WholeBody`].
    pub const ALL: [BodyPartGroup; 10] = [
        BodyPartGroup::Wrist,
        BodyPartGroup::Elbow,
        BodyPartGroup::Shoulder,
        BodyPartGroup::Neck,
        BodyPartGroup::Head,
        BodyPartGroup::Spine,
        BodyPartGroup::Knee,
        BodyPartGroup::Foot,
        BodyPartGroup::Hip,
        BodyPartGroup::WholeBody,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BodyPartGroup::Wrist => "Wrist",
            BodyPartGroup::Elbow => "Elbow",
            BodyPartGroup::Shoulder => "Shoulder",
            BodyPartGroup::Neck => "Neck",
            BodyPartGroup::Head => "Head",
            BodyPartGroup::Spine => "Spine",
            BodyPartGroup::Knee => "Knee",
            BodyPartGroup::Foot => "Foot",
            BodyPartGroup::Hip => "Hip",
            BodyPartGroup::WholeBody => "WholeBody",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    /// Schema indices of the member joints.
    pub fn members(self) -> &'static [usize] {
        match self {
            BodyPartGroup::Wrist => &[13, 16],
            BodyPartGroup::Elbow => &[12, 15],
            BodyPartGroup::Shoulder => &[11, 14],
            BodyPartGroup::Neck => &[9],
            BodyPartGroup::Head => &[10],
            BodyPartGroup::Spine => &[7],
            BodyPartGroup::Knee => &[2, 5],
            BodyPartGroup::Foot => &[3, 6],
            BodyPartGroup::Hip => &[1, 4],
            BodyPartGroup::WholeBody => &ALL_JOINTS,
        }
    }

    pub fn is_upper_body(self) -> bool {
        !matches!(
            self,
            BodyPartGroup::Knee | BodyPartGroup::Foot | BodyPartGroup::Hip | BodyPartGroup::WholeBody
        )
    }
}

impl fmt::Display for BodyPartGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One 3D skeleton, joints in schema order, with optional club keypoints
/// (grip, club head).
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    joints: [Point; JOINT_COUNT],
    club: Option<[Point; 2]>,
}

impl Pose {
    pub fn new(joints: [Point; JOINT_COUNT], club: Option<[Point; 2]>) -> Result<Self> {
        for (k, p) in joints.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteValue { frame: 0, index: k });
            }
        }
        if let Some(c) = &club {
            for (k, p) in c.iter().enumerate() {
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFiniteValue {
                        frame: 0,
                        index: JOINT_COUNT + k,
                    });
                }
            }
        }
        Ok(Self { joints, club })
    }

    pub fn joints(&self) -> &[Point; JOINT_COUNT] {
        &self.joints
    }

    pub fn joint(&self, k: usize) -> Point {
        self.joints[k]
    }

    pub fn club(&self) -> Option<&[Point; 2]> {
        self.club.as_ref()
    }

    /// Applies `f` to every joint and club keypoint.
    pub fn map_points(&self, mut f: impl FnMut(Point) -> Point) -> Result<Self> {
        let joints = self.joints.map(&mut f);
        let club = self.club.map(|c| c.map(&mut f));
        Self::new(joints, club)
    }
}

/// Per-frame skeletons for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    fps: f64,
    frames: Vec<Pose>,
    frame_images: Option<Vec<String>>,
}

impl PoseSequence {
    pub fn new(fps: f64, frames: Vec<Pose>, frame_images: Option<Vec<String>>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParams(format!("fps must be positive, got {fps}")));
        }
        if frames.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "pose sequence needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        let with_club = frames[0].club.is_some();
        if let Some(i) = frames.iter().position(|f| f.club.is_some() != with_club) {
            return Err(Error::InvalidParams(format!(
                "club keypoints must be present in all frames or none (frame {i} differs)"
            )));
        }
        if let Some(images) = &frame_images {
            if images.len() != frames.len() {
                return Err(Error::InvalidParams(format!(
                    "{} frame images for {} frames",
                    images.len(),
                    frames.len()
                )));
            }
        }
        Ok(Self {
            fps,
            frames,
            frame_images,
        })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn has_club(&self) -> bool {
        self.frames[0].club.is_some()
    }

    pub fn frame_images(&self) -> Option<&[String]> {
        self.frame_images.as_deref()
    }
}

/// Per-frame latent vectors for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    dim: usize,
    frames: Vec<Vec<f64>>,
}

impl EmbeddingSequence {
    pub fn new(dim: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("embedding dim must be positive".into()));
        }
        if frames.is_empty() {
            return Err(Error::InvalidParams("embedding sequence has no frames".into()));
        }
        for (i, row) in frames.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::RaggedRows {
                    frame: i,
                    found: row.len(),
                    expected: dim,
                });
            }
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { frame: i, index: k });
            }
        }
        Ok(Self { dim, frames })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipPair {
    pub user_pose: PoseSequence,
    pub expert_pose: PoseSequence,
    pub user_emb: EmbeddingSequence,
    pub expert_emb: EmbeddingSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    User,
    Expert,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::User => "user",
            Side::Expert => "expert",
        })
    }
}

/// A broken [`ClipPair`] invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    LengthMismatch {
        side: Side,
        pose_frames: usize,
        embedding_frames: usize,
    },
    DimMismatch {
        user_dim: usize,
        expert_dim: usize,
    },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Violation::DimMismatch { .. } => "DIM_MISMATCH",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch {
                side,
                pose_frames,
                embedding_frames,
            } => write!(
                f,
                "LENGTH_MISMATCH({side}): {pose_frames} pose frames vs {embedding_frames} embedding frames"
            ),
            Violation::DimMismatch { user_dim, expert_dim } => {
                write!(f, "DIM_MISMATCH: user dim {user_dim} vs expert dim {expert_dim}")
            }
        }
    }
}

/// Every invariant violation of `pair`; empty when the pair is consistent.
pub fn validate_pair(pair: &ClipPair) -> Vec<Violation> {
    let mut out = Vec::new();
    for (side, pose, emb) in [
        (Side::User, &pair.user_pose, &pair.user_emb),
        (Side::Expert, &pair.expert_pose, &pair.expert_emb),
    ] {
        if pose.len() != emb.len() {
            out.push(Violation::LengthMismatch {
                side,
                pose_frames: pose.len(),
                embedding_frames: emb.len(),
            });
        }
    }
    if pair.user_emb.dim() != pair.expert_emb.dim() {
        out.push(Violation::DimMismatch {
            user_dim: pair.user_emb.dim(),
            expert_dim: pair.expert_emb.dim(),
        });
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_pose(offset: f64) -> Pose {
        let mut joints = [[0.0; 3]; JOINT_COUNT];
        for (k, j) in joints.iter_mut().enumerate() {
            let t = k as f64;
            *j = [t.sin() + offset, 0.1 * t + offset, (0.7 * t).cos()];
        }
        Pose::new(joints, None).unwrap()
    }

    fn seq(n: usize) -> PoseSequence {
        PoseSequence::new(30.0, (0..n).map(|i| sample_pose(i as f64)).collect(), None).unwrap()
    }

    fn emb(n: usize, dim: usize) -> EmbeddingSequence {
        EmbeddingSequence::new(dim, vec![vec![0.5; dim]; n]).unwrap()
    }

    #[test]
    fn schema_names_unique_and_groups_in_range() {
        let names = JointSchema.joint_names();
        let mut sorted = names.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), JOINT_COUNT);
        for g in BodyPartGroup::ALL {
            assert!(g.members().iter().all(|&k| k < JOINT_COUNT), "{g}");
        }
        // pelvis and thorax only belong to WholeBody
        for g in BodyPartGroup::PARTS {
            assert!(!g.members().contains(&PELVIS));
            assert!(!g.members().contains(&8));
        }
        assert_eq!(BodyPartGroup::Hip.members(), &[1, 4]);
    }

    #[test]
    fn group_name_round_trip() {
        for g in BodyPartGroup::ALL {
            assert_eq!(BodyPartGroup::from_name(g.name()), Some(g));
        }
        assert_eq!(BodyPartGroup::from_name("Tail"), None);
    }

    #[test]
    fn permutation_reports_missing_joint() {
        let names: Vec<&str> = JOINT_NAMES.iter().copied().filter(|n| *n != "neck").collect();
        let err = JointSchema.permutation_from(&names).unwrap_err();
        assert!(matches!(&err, Error::SchemaMismatch(m) if m.contains("neck")), "{err}");
    }

    #[test]
    fn permutation_rejects_duplicates_and_unknowns() {
        let mut names = JOINT_NAMES.to_vec();
        names[3] = "pelvis";
        assert!(matches!(
            JointSchema.permutation_from(&names),
            Err(Error::SchemaMismatch(m)) if m.contains("duplicate")
        ));
        names[3] = "tail";
        assert!(matches!(
            JointSchema.permutation_from(&names),
            Err(Error::SchemaMismatch(m)) if m.contains("tail")
        ));
    }

    #[test]
    fn pose_rejects_nan() {
        let mut joints = [[0.0; 3]; JOINT_COUNT];
        joints[5][1] = f64::NAN;
        assert!(matches!(
            Pose::new(joints, None),
            Err(Error::NonFiniteValue { index: 5, .. })
        ));
    }

    #[test]
    fn sequence_invariants() {
        assert!(PoseSequence::new(30.0, vec![sample_pose(0.0)], None).is_err());
        assert!(PoseSequence::new(0.0, vec![sample_pose(0.0); 2], None).is_err());
        let with_club = Pose::new(*sample_pose(0.0).joints(), Some([[0.0; 3], [1.0; 3]])).unwrap();
        assert!(PoseSequence::new(30.0, vec![with_club, sample_pose(0.0)], None).is_err());
        assert!(PoseSequence::new(30.0, vec![sample_pose(0.0); 2], Some(vec!["a".into()])).is_err());
    }

    #[test]
    fn embedding_invariants() {
        assert!(EmbeddingSequence::new(4, vec![vec![0.0; 4]; 3]).is_ok());
        assert!(matches!(
            EmbeddingSequence::new(4, vec![vec![0.0; 4], vec![0.0; 3]]),
            Err(Error::RaggedRows {
                frame: 1,
                found: 3,
                expected: 4
            })
        ));
        assert!(EmbeddingSequence::new(4, vec![]).is_err());
        assert!(matches!(
            EmbeddingSequence::new(2, vec![vec![0.0, f64::INFINITY]]),
            Err(Error::NonFiniteValue { frame: 0, index: 1 })
        ));
    }

    #[test]
    fn validate_pair_reports_each_violation() {
        let ok = ClipPair {
            user_pose: seq(5),
            expert_pose: seq(6),
            user_emb: emb(5, 8),
            expert_emb: emb(6, 8),
        };
        assert!(validate_pair(&ok).is_empty());

        let mut short = ok.clone();
        short.user_emb = emb(4, 8);
        let v = validate_pair(&short);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "LENGTH_MISMATCH");
        assert!(matches!(v[0], Violation::LengthMismatch { side: Side::User, .. }));

        let mut dims = ok.clone();
        dims.expert_emb = emb(6, 4);
        let v = validate_pair(&dims);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "DIM_MISMATCH");

        let mut both = dims;
        both.expert_pose = seq(7);
        let v = validate_pair(&both);
        assert_eq!(v.len(), 2);
        assert!(matches!(v[0], Violation::LengthMismatch { side: Side::Expert, .. }));
    }
}
