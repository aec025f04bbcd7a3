use goalcover::persist::{
    artifact_from_bytes, artifact_to_bytes, load_artifact, load_artifact_file, roadmap_from_bytes, roadmap_to_bytes,
    save_artifact, save_artifact_file,
};
use goalcover::planners::{prm_build, PrmBudget, PrmConfig};
use goalcover::{preprocess_region, scenes, AStar, PersistError, PreprocessConfig, State};

fn artifact(seed: u64) -> (goalcover::GridWorld, goalcover::PreprocessArtifact) {
    let g = scenes::wall_split();
    let cfg = PreprocessConfig {
        seed,
        ..Default::default()
    };
    let a = preprocess_region(&g, g.start().unwrap(), &AStar, &cfg).unwrap();
    (g, a)
}

#[test]
fn save_then_load_is_identity() {
    let (g, a) = artifact(1);
    let mut buf = Vec::new();
    save_artifact(&a, &mut buf).unwrap();
    let mut back = load_artifact(buf.as_slice(), &g).unwrap();
    back.stats.preprocess_seconds = a.stats.preprocess_seconds;
    assert_eq!(back, a);
    assert_eq!(artifact_to_bytes(&back), buf);
}

#[test]
fn file_round_trip() {
    let (g, a) = artifact(2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.gcva");
    save_artifact_file(&a, &path).unwrap();
    let back = load_artifact_file(&path, &g).unwrap();
    assert_eq!(back.subregions, a.subregions);
}

#[test]
fn repeated_preprocessing_is_byte_identical() {
    let (_, a) = artifact(7);
    let (_, b) = artifact(7);
    assert_eq!(artifact_to_bytes(&a), artifact_to_bytes(&b));
}

#[test]
fn any_flipped_byte_is_rejected() {
    let (g, a) = artifact(3);
    let bytes = artifact_to_bytes(&a);
    for i in (0..bytes.len()).step_by(7) {
        let mut bad = bytes.clone();
        bad[i] ^= 0x01;
        assert!(load_artifact(bad.as_slice(), &g).is_err(), "byte {i}");
    }
    // a flip inside the path blobs specifically
    let mut bad = bytes.clone();
    let i = bytes.len() - 40;
    bad[i] ^= 0xff;
    assert!(matches!(artifact_from_bytes(&bad), Err(PersistError::ChecksumMismatch { .. })));
}

#[test]
fn moved_obstacle_changes_the_fingerprint() {
    let (g, a) = artifact(4);
    let bytes = artifact_to_bytes(&a);
    let moved = g.with_blocked([State::new(vec![20, 3])]).unwrap();
    assert!(matches!(
        load_artifact(bytes.as_slice(), &moved),
        Err(PersistError::FingerprintMismatch { .. })
    ));
}

#[test]
fn truncated_file_is_rejected() {
    let (g, a) = artifact(5);
    let bytes = artifact_to_bytes(&a);
    for cut in [0, 3, 8, bytes.len() / 2, bytes.len() - 1] {
        assert!(load_artifact(&bytes[..cut], &g).is_err());
    }
}

#[test]
fn roadmap_round_trip() {
    let g = scenes::random_grid(3);
    let map = prm_build(&g, g.start().unwrap(), &PrmConfig::new(PrmBudget::Vertices(120), 3));
    let bytes = roadmap_to_bytes(&map);
    assert_eq!(roadmap_from_bytes(&bytes, &g).unwrap(), map);
    let mut bad = bytes.clone();
    bad[20] ^= 1;
    assert!(roadmap_from_bytes(&bad, &g).is_err());
}
