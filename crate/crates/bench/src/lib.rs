//! Deterministic inputs shared by the criterion benches.

use std::collections::BTreeMap;

use swingdiff_core::{
    distance_matrix, synthesize_session, BodyPartGroup, ClipPair, DistanceMatrix, SessionSpec, SwingParams, WarpSpec,
};

/// A warped synthetic session whose expert clip has `8 * per_phase` frames.
pub fn session(per_phase: usize) -> ClipPair {
    let params = |seed| SwingParams {
        seed,
        frames_per_phase: [per_phase; 8],
        noise_std: 0.01,
        ..SwingParams::default()
    };
    let weights: BTreeMap<BodyPartGroup, f64> = BodyPartGroup::PARTS.into_iter().map(|g| (g, 1.0)).collect();
    let spec = SessionSpec {
        expert: params(1),
        user: params(2),
        warp: WarpSpec::parse("0.3:0.4,0.7:0.75").expect("valid warp"),
        user_len: 9 * per_phase,
        group_weights: weights,
        embedding_noise: 0.01,
        embedding_seed: 3,
    };
    synthesize_session(&spec).expect("valid session").pair
}

/// Distance matrix between the user and expert embeddings of [`session`].
pub fn distances(per_phase: usize) -> DistanceMatrix {
    let pair = session(per_phase);
    distance_matrix(&pair.user_emb, &pair.expert_emb).expect("matching dims")
}
