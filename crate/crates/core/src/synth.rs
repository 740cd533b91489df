//! Deterministic synthetic swings, time warps with known ground truth, and
//! group-weighted embeddings.
//!
//! Keyframe poses live in `fixtures/swing_keyframes.json`, one per swing
//! phase (address, toe-up, mid-backswing, top, mid-downswing, impact,
//! mid-follow-through, finish). Noise comes from ChaCha8 seeded with the
//! caller's seed; joint jitter draws x, y, z per joint in schema order, then
//! the club grip and head, frame by frame.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{BodyPartGroup, ClipPair, EmbeddingSequence, Point, Pose, PoseSequence, JOINT_COUNT, JOINT_NAMES};

pub const PHASE_COUNT: usize = 8;
pub const PHASE_NAMES: [&str; PHASE_COUNT] = [
    "address",
    "toe_up",
    "mid_backswing",
    "top",
    "mid_downswing",
    "impact",
    "mid_follow_through",
    "finish",
];

const SYNTH_FPS: f64 = 30.0;
const MIN_TOTAL_FRAMES: usize = 16;

/// Joints driven by `lower_body_amplitude`; everything else (and the club)
/// follows `upper_body_amplitude`.
const LOWER_BODY_JOINTS: [usize; 7] = [0, 1, 2, 3, 4, 5, 6];

#[derive(Debug, Clone, PartialEq)]
pub struct SwingParams {
    pub seed: u64,
    pub frames_per_phase: [usize; PHASE_COUNT],
    /// Joint jitter standard deviation, in the fixture's units (meters).
    pub noise_std: f64,
    pub upper_body_amplitude: f64,
    pub lower_body_amplitude: f64,
}

impl Default for SwingParams {
    fn default() -> Self {
        Self {
            seed: 0,
            frames_per_phase: [20, 18, 16, 12, 10, 8, 16, 28],
            noise_std: 0.0,
            upper_body_amplitude: 1.0,
            lower_body_amplitude: 1.0,
        }
    }
}

impl SwingParams {
    pub const PRESETS: [&'static str; 3] = ["standard", "noisy", "compact"];

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let base = Self {
            seed,
            ..Self::default()
        };
        match name {
            "standard" => Ok(base),
            "noisy" => Ok(Self {
                noise_std: 0.01,
                ..base
            }),
            "compact" => Ok(Self {
                frames_per_phase: [8, 8, 8, 6, 6, 4, 8, 12],
                ..base
            }),
            other => Err(Error::InvalidParams(format!(
                "unknown preset {other:?} (expected one of {:?})",
                Self::PRESETS
            ))),
        }
    }

    pub fn total_frames(&self) -> usize {
        self.frames_per_phase.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.frames_per_phase.contains(&0) {
            return Err(Error::InvalidParams("every phase needs at least one frame".into()));
        }
        if self.total_frames() < MIN_TOTAL_FRAMES {
            return Err(Error::InvalidParams(format!(
                "swing needs at least {MIN_TOTAL_FRAMES} frames, got {}",
                self.total_frames()
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidParams("noise_std must be finite and non-negative".into()));
        }
        for (name, a) in [
            ("upper_body_amplitude", self.upper_body_amplitude),
            ("lower_body_amplitude", self.lower_body_amplitude),
        ] {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct KeyframeFixture {
    phases: Vec<String>,
    joint_names: Vec<String>,
    keyframes: Vec<Vec<Point>>,
    club: Vec<[Point; 2]>,
}

struct Keyframe {
    joints: [Point; JOINT_COUNT],
    club: [Point; 2],
}

fn keyframes() -> &'static [Keyframe] {
    static KEYFRAMES: OnceLock<Vec<Keyframe>> = OnceLock::new();
    KEYFRAMES.get_or_init(|| {
        let raw: KeyframeFixture =
            serde_json::from_str(include_str!("../fixtures/swing_keyframes.json")).expect("keyframe fixture parses");
        assert_eq!(raw.phases, PHASE_NAMES, "fixture phase order");
        assert_eq!(raw.joint_names, JOINT_NAMES, "fixture joint order");
        raw.keyframes
            .iter()
            .zip(&raw.club)
            .map(|(joints, club)| Keyframe {
                joints: joints.as_slice().try_into().expect("17 joints per keyframe"),
                club: *club,
            })
            .collect()
    })
}

/// Exact at both `t = 0` and `t = 1`.
fn lerp(a: Point, b: Point, t: f64) -> Point {
    std::array::from_fn(|c| (1.0 - t) * a[c] + t * b[c])
}

fn ease(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Keyframe `p` with its displacement from address scaled per body half.
fn scaled_keyframe(p: usize, params: &SwingParams) -> Keyframe {
    let kf = keyframes();
    let (base, target) = (&kf[0], &kf[p]);
    let amp = |k: usize| {
        if LOWER_BODY_JOINTS.contains(&k) {
            params.lower_body_amplitude
        } else {
            params.upper_body_amplitude
        }
    };
    Keyframe {
        joints: std::array::from_fn(|k| lerp(base.joints[k], target.joints[k], amp(k))),
        club: std::array::from_fn(|k| lerp(base.club[k], target.club[k], params.upper_body_amplitude)),
    }
}

/// Generates one swing. Keyframe `p` is reached on the first frame of phase
/// `p`, except the finish keyframe, which is reached on the last frame;
/// frames in between ease (smoothstep) from one keyframe to the next.
pub fn generate_swing(params: &SwingParams) -> Result<PoseSequence> {
    params.validate()?;
    let keys: Vec<Keyframe> = (0..PHASE_COUNT).map(|p| scaled_keyframe(p, params)).collect();
    let total = params.total_frames();

    let mut anchors = [0usize; PHASE_COUNT];
    let mut start = 0;
    for (p, n) in params.frames_per_phase.iter().enumerate() {
        anchors[p] = start;
        start += n;
    }
    anchors[PHASE_COUNT - 1] = total - 1;

    let noise = Normal::new(0.0, params.noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut jitter = |p: Point| -> Point {
        if params.noise_std == 0.0 {
            p
        } else {
            std::array::from_fn(|c| p[c] + noise.sample(&mut rng))
        }
    };

    let mut frames = Vec::with_capacity(total);
    let mut seg = 0;
    for f in 0..total {
        while seg + 2 < PHASE_COUNT && f >= anchors[seg + 1] {
            seg += 1;
        }
        let (a, b) = (anchors[seg], anchors[seg + 1]);
        let t = ease(((f - a) as f64 / (b - a) as f64).min(1.0));
        let (from, to) = (&keys[seg], &keys[seg + 1]);
        let joints: [Point; JOINT_COUNT] = std::array::from_fn(|k| lerp(from.joints[k], to.joints[k], t));
        let club: [Point; 2] = std::array::from_fn(|k| lerp(from.club[k], to.club[k], t));
        let joints = joints.map(&mut jitter);
        let club = club.map(&mut jitter);
        frames.push(Pose::new(joints, Some(club))?);
    }
    PoseSequence::new(SYNTH_FPS, frames, None)
}

/// Piecewise-linear monotone time warp given as `(source, target)` pairs in
/// `[0, 1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpSpec {
    control_points: Vec<(f64, f64)>,
}

impl WarpSpec {
    pub fn new(control_points: Vec<(f64, f64)>) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::InvalidWarp("need at least two control points".into()));
        }
        if control_points[0] != (0.0, 0.0) || *control_points.last().unwrap() != (1.0, 1.0) {
            return Err(Error::InvalidWarp("warp must start at (0,0) and end at (1,1)".into()));
        }
        for w in control_points.windows(2) {
            let ((s0, t0), (s1, t1)) = (w[0], w[1]);
            if !(s1 > s0 && t1 > t0) {
                return Err(Error::InvalidWarp(format!(
                    "control points must increase strictly: ({s0},{t0}) -> ({s1},{t1})"
                )));
            }
        }
        Ok(Self { control_points })
    }

    pub fn identity() -> Self {
        Self {
            control_points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// Parses `identity` or interior points as `s:t,s:t,...`; the endpoints
    /// are implied.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() || spec == "identity" {
            return Ok(Self::identity());
        }
        let mut points = vec![(0.0, 0.0)];
        for part in spec.split(',') {
            let (s, t) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidWarp(format!("expected source:target, got {part:?}")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidWarp(format!("not a number: {x:?}")))
            };
            points.push((num(s)?, num(t)?));
        }
        points.push((1.0, 1.0));
        Self::new(points)
    }

    pub fn control_points(&self) -> &[(f64, f64)] {
        &self.control_points
    }

    /// Source time shown at target time `tau`.
    pub fn source_time(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, 1.0);
        let k = self
            .control_points
            .windows(2)
            .position(|w| tau <= w[1].1)
            .unwrap_or(self.control_points.len() - 2);
        let ((s0, t0), (s1, t1)) = (self.control_points[k], self.control_points[k + 1]);
        s0 + (tau - t0) / (t1 - t0) * (s1 - s0)
    }
}

/// Resamples `seq` along `warp` to `out_len` frames. Returns the warped
/// sequence and, per output frame, the nearest source frame.
pub fn apply_warp(seq: &PoseSequence, warp: &WarpSpec, out_len: usize) -> Result<(PoseSequence, Vec<usize>)> {
    if out_len < 2 {
        return Err(Error::InvalidWarp(format!(
            "output length must be at least 2, got {out_len}"
        )));
    }
    let last = (seq.len() - 1) as f64;
    let mut frames = Vec::with_capacity(out_len);
    let mut truth = Vec::with_capacity(out_len);
    let mut images = seq.frame_images().map(|_| Vec::with_capacity(out_len));
    for o in 0..out_len {
        let tau = o as f64 / (out_len - 1) as f64;
        let mut pos = (warp.source_time(tau) * last).clamp(0.0, last);
        if (pos - pos.round()).abs() < 1e-9 {
            pos = pos.round();
        }
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        let pose = if frac == 0.0 {
            seq.frames()[lo].clone()
        } else {
            let (a, b) = (&seq.frames()[lo], &seq.frames()[lo + 1]);
            let joints = std::array::from_fn(|k| lerp(a.joint(k), b.joint(k), frac));
            let club = a
                .club()
                .zip(b.club())
                .map(|(ca, cb)| std::array::from_fn(|k| lerp(ca[k], cb[k], frac)));
            Pose::new(joints, club)?
        };
        let nearest = pos.round() as usize;
        frames.push(pose);
        truth.push(nearest);
        if let (Some(out), Some(src)) = (images.as_mut(), seq.frame_images()) {
            out.push(src[nearest].clone());
        }
    }
    Ok((PoseSequence::new(seq.fps(), frames, images)?, truth))
}

/// Embedding dimension of [`coupled_embedding`]: three coordinates for each
/// joint that belongs to one of the nine named groups.
pub fn coupled_dim() -> usize {
    BodyPartGroup::PARTS.iter().map(|g| g.members().len() * 3).sum()
}

/// Synthetic latent vectors: for each named group, its joint coordinates
/// times the group's weight, concatenated, plus seeded Gaussian noise.
/// Coordinates are taken relative to the mean of all joints in
/// positively weighted groups, so unweighted joints have no influence at
/// all. Groups missing from `group_weights` get weight zero.
pub fn coupled_embedding(
    seq: &PoseSequence,
    group_weights: &BTreeMap<BodyPartGroup, f64>,
    noise_std: f64,
    seed: u64,
) -> Result<EmbeddingSequence> {
    if group_weights.contains_key(&BodyPartGroup::WholeBody) {
        return Err(Error::InvalidParams("WholeBody is not a weightable group".into()));
    }
    if group_weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParams(
            "group weights must be finite and non-negative".into(),
        ));
    }
    if group_weights.values().all(|w| *w == 0.0) {
        return Err(Error::InvalidParams(
            "at least one group weight must be positive".into(),
        ));
    }
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::InvalidParams("noise_std must be finite and non-negative".into()));
    }
    let noise = Normal::new(0.0, noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = coupled_dim();

    let active: Vec<usize> = BodyPartGroup::PARTS
        .into_iter()
        .filter(|g| group_weights.get(g).is_some_and(|w| *w > 0.0))
        .flat_map(|g| g.members().iter().copied())
        .collect();
    let frames = seq
        .frames()
        .iter()
        .map(|pose| {
            let root = centroid(pose, &active);
            let mut v = Vec::with_capacity(dim);
            for g in BodyPartGroup::PARTS {
                let w = group_weights.get(&g).copied().unwrap_or(0.0);
                for &k in g.members() {
                    let p = pose.joint(k);
                    v.extend((0..3).map(|c| w * (p[c] - root[c])));
                }
            }
            if noise_std > 0.0 {
                for x in &mut v {
                    *x += noise.sample(&mut rng);
                }
            }
            v
        })
        .collect();
    EmbeddingSequence::new(dim, frames)
}

fn centroid(pose: &Pose, joints: &[usize]) -> Point {
    let mut c = [0.0; 3];
    for &k in joints {
        for (ci, pi) in c.iter_mut().zip(pose.joint(k)) {
            *ci += pi / joints.len() as f64;
        }
    }
    c
}

/// Weights of 1.0 on every upper-body group and `lower` on Hip, Knee, Foot.
pub fn upper_body_weights(lower: f64) -> BTreeMap<BodyPartGroup, f64> {
    BodyPartGroup::PARTS
        .into_iter()
        .map(|g| (g, if g.is_upper_body() { 1.0 } else { lower }))
        .collect()
}

/// Everything needed to synthesize one user/expert session.
#[derive(Debug, Clone)]
pub struct SessionSpec {
    pub expert: SwingParams,
    pub user: SwingParams,
    pub warp: WarpSpec,
    pub user_len: usize,
    pub group_weights: BTreeMap<BodyPartGroup, f64>,
    pub embedding_noise: f64,
    pub embedding_seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub pair: ClipPair,
    /// For each user frame, the expert frame it was resampled from.
    pub true_correspondence: Vec<usize>,
}

/// Expert = `generate_swing(expert)`; user = `generate_swing(user)` warped to
/// `user_len` frames. Both are embedded with [`coupled_embedding`] using
/// seeds `embedding_seed` (user) and `embedding_seed + 1` (expert).
pub fn synthesize_session(spec: &SessionSpec) -> Result<SyntheticSession> {
    let expert_pose = generate_swing(&spec.expert)?;
    let user_raw = generate_swing(&spec.user)?;
    if user_raw.len() != expert_pose.len() {
        return Err(Error::InvalidParams(
            "user and expert swings must share frames_per_phase".into(),
        ));
    }
    let (user_pose, true_correspondence) = apply_warp(&user_raw, &spec.warp, spec.user_len)?;
    let user_emb = coupled_embedding(
        &user_pose,
        &spec.group_weights,
        spec.embedding_noise,
        spec.embedding_seed,
    )?;
    let expert_emb = coupled_embedding(
        &expert_pose,
        &spec.group_weights,
        spec.embedding_noise,
        spec.embedding_seed.wrapping_add(1),
    )?;
    Ok(SyntheticSession {
        pair: ClipPair {
            user_pose,
            expert_pose,
            user_emb,
            expert_emb,
        },
        true_correspondence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::euclidean_distance;
    use crate::io::pose_sequence_to_json;

    #[test]
    fn fixture_loads() {
        assert_eq!(keyframes().len(), PHASE_COUNT);
    }

    #[test]
    fn deterministic_and_seed_only_drives_noise() {
        let p = SwingParams {
            seed: 11,
            noise_std: 0.02,
            ..SwingParams::default()
        };
        let a = generate_swing(&p).unwrap();
        let b = generate_swing(&p).unwrap();
        assert_eq!(pose_sequence_to_json(&a), pose_sequence_to_json(&b));
        let other_seed = generate_swing(&SwingParams { seed: 12, ..p.clone() }).unwrap();
        assert_ne!(a, other_seed);

        let clean = |seed| {
            generate_swing(&SwingParams {
                seed,
                ..SwingParams::default()
            })
            .unwrap()
        };
        assert_eq!(clean(1), clean(2));
    }

    #[test]
    fn frame_count_and_keyframes() {
        let p = SwingParams::default();
        let s = generate_swing(&p).unwrap();
        assert_eq!(s.len(), p.total_frames());
        assert_eq!(s.len(), 128);
        assert!(s.has_club());
        let kf = keyframes();
        assert_eq!(s.frames()[0].joints(), &kf[0].joints);
        assert_eq!(s.frames()[20].joints(), &kf[1].joints);
        assert_eq!(s.frames()[127].joints(), &kf[7].joints);
    }

    #[test]
    fn amplitude_scales_displacement() {
        let half = generate_swing(&SwingParams {
            upper_body_amplitude: 0.5,
            ..SwingParams::default()
        })
        .unwrap();
        let kf = keyframes();
        // top of backswing, left wrist: halfway between address and top
        let top = 20 + 18 + 16;
        let expected = lerp(kf[0].joints[13], kf[3].joints[13], 0.5);
        let got = half.frames()[top].joint(13);
        for c in 0..3 {
            assert!((got[c] - expected[c]).abs() < 1e-12);
        }
        // lower body untouched
        assert_eq!(half.frames()[top].joint(3), kf[3].joints[3]);
    }

    #[test]
    fn invalid_params() {
        let mut p = SwingParams {
            frames_per_phase: [1; 8],
            ..SwingParams::default()
        };
        assert!(matches!(generate_swing(&p), Err(Error::InvalidParams(_))));
        p.frames_per_phase = [0, 4, 4, 4, 4, 4, 4, 4];
        assert!(generate_swing(&p).is_err());
        let p = SwingParams {
            noise_std: -1.0,
            ..SwingParams::default()
        };
        assert!(generate_swing(&p).is_err());
        assert!(SwingParams::preset("nope", 0).is_err());
        for name in SwingParams::PRESETS {
            assert!(generate_swing(&SwingParams::preset(name, 3).unwrap()).is_ok());
        }
    }

    #[test]
    fn identity_warp_is_identity() {
        let s = generate_swing(&SwingParams::default()).unwrap();
        let (w, truth) = apply_warp(&s, &WarpSpec::identity(), s.len()).unwrap();
        assert_eq!(w, s);
        assert_eq!(truth, (0..s.len()).collect::<Vec<_>>());
    }

    #[test]
    fn compressing_first_half() {
        let s = generate_swing(&SwingParams::default()).unwrap();
        let n = s.len();
        let warp = WarpSpec::new(vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let (_, truth) = apply_warp(&s, &warp, n).unwrap();
        // direct evaluation: target tau in [0, 0.25] shows source 2 * tau
        for (o, &t) in truth.iter().enumerate().take(n / 4) {
            let tau = o as f64 / (n - 1) as f64;
            let expected = (2.0 * tau * (n - 1) as f64).round() as usize;
            assert_eq!(t, expected, "frame {o}");
        }
        assert_eq!(truth[10], 20);
        assert_eq!(truth[0], 0);
        assert_eq!(*truth.last().unwrap(), n - 1);
    }

    #[test]
    fn warp_parsing_and_validation() {
        assert_eq!(WarpSpec::parse("identity").unwrap(), WarpSpec::identity());
        let w = WarpSpec::parse("0.5:0.25, 0.8:0.9").unwrap();
        assert_eq!(w.control_points().len(), 4);
        assert!(matches!(WarpSpec::parse("0.5:0.6,0.4:0.7"), Err(Error::InvalidWarp(_))));
        assert!(WarpSpec::parse("0.5").is_err());
        assert!(WarpSpec::new(vec![(0.0, 0.0), (1.0, 0.9)]).is_err());
        let s = generate_swing(&SwingParams::default()).unwrap();
        assert!(apply_warp(&s, &w, 1).is_err());
    }

    #[test]
    fn warp_correspondence_monotone() {
        use rand::Rng;
        let s = generate_swing(&SwingParams::preset("compact", 0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut xs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..0.95)).collect();
            let mut ys: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..0.95)).collect();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            let mut pts = vec![(0.0, 0.0)];
            pts.extend(xs.into_iter().zip(ys));
            pts.push((1.0, 1.0));
            let Ok(w) = WarpSpec::new(pts) else { continue };
            let len = rng.gen_range(2..120);
            let (out, truth) = apply_warp(&s, &w, len).unwrap();
            assert_eq!(out.len(), len);
            assert!(truth.windows(2).all(|p| p[0] <= p[1]));
            assert_eq!(truth[0], 0);
            assert_eq!(*truth.last().unwrap(), s.len() - 1);
        }
    }

    #[test]
    fn coupled_embedding_linear_in_weights() {
        let s = generate_swing(&SwingParams::default()).unwrap();
        let all = |w: f64| BodyPartGroup::PARTS.into_iter().map(|g| (g, w)).collect();
        let e1 = coupled_embedding(&s, &all(1.0), 0.0, 0).unwrap();
        let e2 = coupled_embedding(&s, &all(2.0), 0.0, 0).unwrap();
        assert_eq!(e1.dim(), 45);
        let d1 = euclidean_distance(&e1.frames()[3], &e1.frames()[60]).unwrap();
        let d2 = euclidean_distance(&e2.frames()[3], &e2.frames()[60]).unwrap();
        assert!((d2 - 2.0 * d1).abs() < 1e-12);
        // d1 is the norm of the displacement of every joint except pelvis and
        // thorax, taken relative to those fifteen joints' mean
        let (a, b) = (&s.frames()[3], &s.frames()[60]);
        let grouped: Vec<usize> = (1..17).filter(|&k| k != 8).collect();
        let mean = |p: &Pose, c: usize| grouped.iter().map(|&k| p.joint(k)[c]).sum::<f64>() / 15.0;
        let mut sq = 0.0;
        for g in BodyPartGroup::PARTS {
            for &k in g.members() {
                for c in 0..3 {
                    let da = a.joint(k)[c] - mean(a, c);
                    let db = b.joint(k)[c] - mean(b, c);
                    sq += (da - db).powi(2);
                }
            }
        }
        assert!((d1 - sq.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unweighted_groups_are_invisible() {
        let s = generate_swing(&SwingParams::default()).unwrap();
        let base = s.frames()[10].clone();
        let mut joints = *base.joints();
        joints[3][0] += 0.3; // r_ankle
        joints[6][2] -= 0.2; // l_ankle
        let moved = Pose::new(joints, base.club().copied()).unwrap();
        let seq = PoseSequence::new(30.0, vec![base, moved], None).unwrap();
        let wrist_only = BTreeMap::from([(BodyPartGroup::Wrist, 1.0)]);
        let e = coupled_embedding(&seq, &wrist_only, 0.0, 0).unwrap();
        assert_eq!(euclidean_distance(&e.frames()[0], &e.frames()[1]).unwrap(), 0.0);
    }

    #[test]
    fn coupled_embedding_rejects_bad_weights() {
        let s = generate_swing(&SwingParams::preset("compact", 0).unwrap()).unwrap();
        assert!(coupled_embedding(&s, &BTreeMap::new(), 0.0, 0).is_err());
        assert!(coupled_embedding(&s, &BTreeMap::from([(BodyPartGroup::Hip, -1.0)]), 0.0, 0).is_err());
        assert!(coupled_embedding(&s, &BTreeMap::from([(BodyPartGroup::WholeBody, 1.0)]), 0.0, 0).is_err());
        assert!(coupled_embedding(&s, &upper_body_weights(0.3), -0.1, 0).is_err());
    }

    #[test]
    fn session_synthesis() {
        let spec = SessionSpec {
            expert: SwingParams::default(),
            user: SwingParams::default(),
            warp: WarpSpec::parse("0.4:0.5").unwrap(),
            user_len: 140,
            group_weights: upper_body_weights(0.3),
            embedding_noise: 0.0,
            embedding_seed: 5,
        };
        let s = synthesize_session(&spec).unwrap();
        assert_eq!(s.pair.user_pose.len(), 140);
        assert_eq!(s.true_correspondence.len(), 140);
        assert!(crate::model::validate_pair(&s.pair).is_empty());
    }
}
