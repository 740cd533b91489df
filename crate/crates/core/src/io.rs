//! JSON file formats for pose and embedding sequences.
//!
//! Pose file:
//! `{"fps": f, "joint_names": [17 names], "frames": [[[x,y,z] x 17] x F],
//!   "club": [[[x,y,z] x 2] x F] | null, "frame_images": [string x F] | null}`
//!
//! Embedding file: `{"dim": n, "frames": [[n numbers] x F]}`
//!
//! Readers accept joints in any order (matched by name) and also recognise
//! the bare `NaN` / `Infinity` tokens some writers emit, so that such values
//! are reported as [`Error::NonFiniteValue`] instead of a parse failure.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::model::{EmbeddingSequence, JointSchema, Point, Pose, PoseSequence, JOINT_COUNT, JOINT_NAMES};

/// A coordinate as written in a file; non-finite encodings survive parsing
/// so validation can point at them.
#[derive(Debug, Clone, Copy)]
struct Coord(f64);

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
            Null(()),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Coord(v)),
            Repr::Null(()) => Ok(Coord(f64::NAN)),
            Repr::Text(s) => match s.as_str() {
                "NaN" | "nan" => Ok(Coord(f64::NAN)),
                "Infinity" | "inf" => Ok(Coord(f64::INFINITY)),
                "-Infinity" | "-inf" => Ok(Coord(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, found string {other:?}"
                ))),
            },
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFileIn {
    fps: f64,
    joint_names: Vec<String>,
    frames: Vec<Vec<Vec<Coord>>>,
    #[serde(default)]
    club: Option<Vec<Vec<Vec<Coord>>>>,
    #[serde(default)]
    frame_images: Option<Vec<String>>,
}

#[derive(Serialize)]
struct PoseFileOut<'a> {
    fps: f64,
    joint_names: &'a [&'a str],
    frames: Vec<&'a [Point; JOINT_COUNT]>,
    club: Option<Vec<&'a [Point; 2]>>,
    frame_images: Option<&'a [String]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFileIn {
    dim: usize,
    frames: Vec<Vec<Coord>>,
}

#[derive(Serialize)]
struct EmbeddingFileOut<'a> {
    dim: usize,
    frames: &'a [Vec<f64>],
}

/// Wraps bare `NaN`, `Infinity` and `-Infinity` tokens (outside strings) in
/// quotes so they parse as strings.
fn quote_nonfinite_tokens(text: &str) -> std::borrow::Cow<'_, str> {
    if !(text.contains("NaN") || text.contains("Infinity")) {
        return text.into();
    }
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len() + 16);
    let mut in_string = false;
    let mut escaped = false;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if in_string {
            if escaped {
                escaped = false;
            } else if c == b'\\' {
                escaped = true;
            } else if c == b'"' {
                in_string = false;
            }
        } else if c == b'"' {
            in_string = true;
        } else {
            let rest = &text[i..];
            if let Some(tok) = ["-Infinity", "Infinity", "NaN"]
                .into_iter()
                .find(|t| rest.starts_with(t))
            {
                out.push('"');
                out.push_str(tok);
                out.push('"');
                i += tok.len();
                continue;
            }
        }
        // copy one UTF-8 scalar
        let ch = text[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    out.into()
}

fn point_from(row: &[Coord], what: &str, frame: usize) -> Result<Point> {
    match row {
        [x, y, z] => Ok([x.0, y.0, z.0]),
        _ => Err(Error::MalformedFile(format!(
            "frame {frame}: {what} has {} coordinates, expected 3",
            row.len()
        ))),
    }
}

pub fn pose_sequence_from_json(text: &str) -> Result<PoseSequence> {
    let raw: PoseFileIn =
        serde_json::from_str(&quote_nonfinite_tokens(text)).map_err(|e| Error::MalformedFile(e.to_string()))?;

    if raw.joint_names.len() != JOINT_COUNT {
        // name the offending joint when possible
        JointSchema.permutation_from(&raw.joint_names)?;
        return Err(Error::SchemaMismatch(format!(
            "expected {JOINT_COUNT} joint names, found {}",
            raw.joint_names.len()
        )));
    }
    let perm = JointSchema.permutation_from(&raw.joint_names)?;

    if raw.frames.is_empty() {
        return Err(Error::MalformedFile("no frames".into()));
    }
    if let Some(club) = &raw.club {
        if club.len() != raw.frames.len() {
            return Err(Error::MalformedFile(format!(
                "{} club entries for {} frames",
                club.len(),
                raw.frames.len()
            )));
        }
    }

    let mut frames = Vec::with_capacity(raw.frames.len());
    for (f, rows) in raw.frames.iter().enumerate() {
        if rows.len() != JOINT_COUNT {
            return Err(Error::MalformedFile(format!(
                "frame {f} has {} joints, expected {JOINT_COUNT}",
                rows.len()
            )));
        }
        let mut joints = [[0.0; 3]; JOINT_COUNT];
        for (k, slot) in joints.iter_mut().enumerate() {
            *slot = point_from(&rows[perm[k]], JOINT_NAMES[k], f)?;
        }
        let club = match &raw.club {
            None => None,
            Some(club) => {
                let c = &club[f];
                if c.len() != 2 {
                    return Err(Error::MalformedFile(format!(
                        "frame {f}: club has {} keypoints, expected 2",
                        c.len()
                    )));
                }
                Some([point_from(&c[0], "club grip", f)?, point_from(&c[1], "club head", f)?])
            }
        };
        let pose = Pose::new(joints, club).map_err(|e| match e {
            Error::NonFiniteValue { index, .. } => Error::NonFiniteValue { frame: f, index },
            other => other,
        })?;
        frames.push(pose);
    }

    if !(raw.fps.is_finite() && raw.fps > 0.0) {
        return Err(Error::MalformedFile(format!("fps must be positive, got {}", raw.fps)));
    }
    PoseSequence::new(raw.fps, frames, raw.frame_images).map_err(|e| match e {
        Error::InvalidParams(m) => Error::MalformedFile(m),
        other => other,
    })
}

/// Serializes in schema joint order; numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn pose_sequence_to_json(seq: &PoseSequence) -> String {
    let out = PoseFileOut {
        fps: seq.fps(),
        joint_names: &JOINT_NAMES,
        frames: seq.frames().iter().map(Pose::joints).collect(),
        club: seq.has_club().then(|| {
            seq.frames()
                .iter()
                .map(|p| p.club().expect("club in every frame"))
                .collect()
        }),
        frame_images: seq.frame_images(),
    };
    serde_json::to_string(&out).expect("pose sequence serializes")
}

pub fn embedding_sequence_from_json(text: &str) -> Result<EmbeddingSequence> {
    let raw: EmbeddingFileIn =
        serde_json::from_str(&quote_nonfinite_tokens(text)).map_err(|e| Error::MalformedFile(e.to_string()))?;
    if raw.dim == 0 {
        return Err(Error::MalformedFile("dim must be positive".into()));
    }
    if raw.frames.is_empty() {
        return Err(Error::MalformedFile("no frames".into()));
    }
    let frames = raw
        .frames
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.0).collect())
        .collect();
    EmbeddingSequence::new(raw.dim, frames)
}

pub fn embedding_sequence_to_json(seq: &EmbeddingSequence) -> String {
    serde_json::to_string(&EmbeddingFileOut {
        dim: seq.dim(),
        frames: seq.frames(),
    })
    .expect("embedding sequence serializes")
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_pose_sequence(path: impl AsRef<Path>) -> Result<PoseSequence> {
    pose_sequence_from_json(&read_text(path.as_ref())?)
}

pub fn save_pose_sequence(path: impl AsRef<Path>, seq: &PoseSequence) -> Result<()> {
    write_text(path.as_ref(), &pose_sequence_to_json(seq))
}

pub fn load_embedding_sequence(path: impl AsRef<Path>) -> Result<EmbeddingSequence> {
    embedding_sequence_from_json(&read_text(path.as_ref())?)
}

pub fn save_embedding_sequence(path: impl AsRef<Path>, seq: &EmbeddingSequence) -> Result<()> {
    write_text(path.as_ref(), &embedding_sequence_to_json(seq))
}
