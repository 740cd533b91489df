//! Procrustes superimposition of skeleton pairs and joint position errors.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BodyPartGroup, Point, Pose, JOINT_COUNT};

/// `x -> scale * rotation * x + translation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    /// Row-major 3x3 proper rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub scale: f64,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let r = &self.rotation;
        Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        )
    }

    pub fn apply(&self, p: Point) -> Point {
        let v = self.scale * (self.rotation_matrix() * Vector3::from(p)) + Vector3::from(self.translation);
        [v.x, v.y, v.z]
    }

    /// Transforms every joint (and club keypoint) of `pose`.
    pub fn apply_pose(&self, pose: &Pose) -> Result<Pose> {
        pose.map_points(|p| self.apply(p))
    }

    /// Largest elementwise deviation of `RᵀR` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let r = self.rotation_matrix();
        (r.transpose() * r - Matrix3::identity()).abs().max()
    }

    pub fn determinant(&self) -> f64 {
        self.rotation_matrix().determinant()
    }
}

fn to_vectors(pose: &Pose) -> [Vector3<f64>; JOINT_COUNT] {
    pose.joints().map(Vector3::from)
}

fn centroid(points: &[Vector3<f64>]) -> Vector3<f64> {
    points.iter().sum::<Vector3<f64>>() / points.len() as f64
}

/// Least-squares similarity (or rigid, when `with_scale` is false) transform
/// taking `moving`'s joints onto `reference`'s. Reflections are excluded.
pub fn procrustes_fit(reference: &Pose, moving: &Pose, with_scale: bool) -> Result<SimilarityTransform> {
    if reference.joints() == moving.joints() {
        return Ok(SimilarityTransform::identity());
    }
    let target = to_vectors(reference);
    let source = to_vectors(moving);
    let mu_t = centroid(&target);
    let mu_s = centroid(&source);

    let degenerate_below = 1e-12 * JOINT_COUNT as f64;
    let source_sq: f64 = source.iter().map(|p| (p - mu_s).norm_squared()).sum();
    if source_sq.sqrt() < degenerate_below {
        return Err(Error::DegeneratePose("moving skeleton has no spatial extent".into()));
    }
    let target_sq: f64 = target.iter().map(|p| (p - mu_t).norm_squared()).sum();
    if with_scale && target_sq.sqrt() < degenerate_below {
        return Err(Error::DegeneratePose("reference skeleton has no spatial extent".into()));
    }

    // cross-covariance sum_k (t_k - mu_t)(s_k - mu_s)^T
    let mut cov = Matrix3::<f64>::zeros();
    for (t, s) in target.iter().zip(&source) {
        cov += (t - mu_t) * (s - mu_s).transpose();
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegeneratePose("SVD did not converge".into())),
    };
    // flip the weakest axis if the raw solution is a reflection
    let mut signs = Vector3::new(1.0, 1.0, 1.0);
    if (u * v_t).determinant() < 0.0 {
        signs[svd.singular_values.imin()] = -1.0;
    }
    let rotation = u * Matrix3::from_diagonal(&signs) * v_t;

    let sv = svd.singular_values.component_mul(&signs);
    let scale = if with_scale { sv.sum() / source_sq } else { 1.0 };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::DegeneratePose(format!("fitted scale {scale} is not positive")));
    }
    let translation = mu_t - scale * (rotation * mu_s);

    let r = rotation;
    let out = SimilarityTransform {
        rotation: [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ],
        translation: [translation.x, translation.y, translation.z],
        scale,
    };
    if out.orthogonality_error() > 1e-9 || (out.determinant() - 1.0).abs() > 1e-9 {
        return Err(Error::DegeneratePose("fitted rotation is not orthonormal".into()));
    }
    Ok(out)
}

/// Fitted comparison of one user frame against its matched expert frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameComparison {
    pub user_frame: usize,
    pub expert_frame: usize,
    /// Maps the expert skeleton into the user's frame.
    pub transform: SimilarityTransform,
    pub per_joint_error: Vec<f64>,
    /// Keyed by group name, including `WholeBody`.
    pub per_group_error: BTreeMap<String, f64>,
    pub mpjpe: f64,
    pub latent_distance: f64,
}

impl FrameComparison {
    pub fn group_error(&self, group: BodyPartGroup) -> Option<f64> {
        self.per_group_error.get(group.name()).copied()
    }
}

fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn mean_over(errors: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&k| errors[k]).sum::<f64>() / members.len() as f64
}

/// Mean per-joint position error with no alignment.
pub fn raw_mpjpe(a: &Pose, b: &Pose) -> f64 {
    let errors: Vec<f64> = a
        .joints()
        .iter()
        .zip(b.joints())
        .map(|(p, q)| distance(*p, *q))
        .collect();
    mean_over(&errors, BodyPartGroup::WholeBody.members())
}

/// Fits `expert` onto `user` and measures the remaining joint errors.
/// Frame indices are left at zero for the caller to fill in.
pub fn compare_frames(user: &Pose, expert: &Pose, latent_distance: f64, with_scale: bool) -> Result<FrameComparison> {
    let transform = procrustes_fit(user, expert, with_scale)?;
    let per_joint_error: Vec<f64> = user
        .joints()
        .iter()
        .zip(expert.joints())
        .map(|(u, e)| distance(*u, transform.apply(*e)))
        .collect();
    let per_group_error = BodyPartGroup::ALL
        .into_iter()
        .map(|g| (g.name().to_string(), mean_over(&per_joint_error, g.members())))
        .collect();
    let mpjpe = mean_over(&per_joint_error, BodyPartGroup::WholeBody.members());
    Ok(FrameComparison {
        user_frame: 0,
        expert_frame: 0,
        transform,
        per_joint_error,
        per_group_error,
        mpjpe,
        latent_distance,
    })
}
