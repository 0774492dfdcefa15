use std::path::Path;

use omnitrack::spherevideo::{load_manifest, CubeMapFrame, SourceError};
use omnitrack::synthetic::SyntheticSpec;

fn spec(frames: usize, face: usize) -> SyntheticSpec {
    SyntheticSpec {
        id: "seq".into(),
        frames,
        face_size: face,
        ..Default::default()
    }
}

#[test]
fn loads_written_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec(3, 16).write_dataset(dir.path()).unwrap();
    let seq = load_manifest(&path).unwrap();
    assert_eq!(seq.len(), 3);
    assert_eq!(seq.face_size(), 16);
    let built = spec(3, 16).build().unwrap();
    assert_eq!(*seq.frame(2).unwrap(), *built.frame(2).unwrap());
}

#[test]
fn annotation_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec(3, 8).write_dataset(dir.path()).unwrap();
    let ann = dir.path().join("seq.txt");
    let text = std::fs::read_to_string(&ann).unwrap();
    let two: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .take(2)
        .collect();
    std::fs::write(&ann, two.join("\n")).unwrap();
    assert!(matches!(
        load_manifest(&path),
        Err(SourceError::Consistency { .. })
    ));
}

#[test]
fn face_size_mismatch_names_frame() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec(3, 512).write_dataset(dir.path()).unwrap();
    CubeMapFrame::uniform(256, [1, 2, 3])
        .unwrap()
        .save_strip(&dir.path().join("seq/00002.png"))
        .unwrap();
    match load_manifest(&path) {
        Err(e @ SourceError::FaceSize { index: 2, .. }) => assert!(e.to_string().contains('2')),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_frame_names_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = spec(3, 8).write_dataset(dir.path()).unwrap();
    std::fs::remove_file(dir.path().join("seq/00001.png")).unwrap();
    assert!(matches!(
        load_manifest(&path),
        Err(SourceError::MissingFrame { index: 1, .. })
    ));
}

#[test]
fn six_face_ppm_layout() {
    let dir = tempfile::tempdir().unwrap();
    let frame = CubeMapFrame::from_fn(8, |d| {
        let [x, y, z] = d.to_array();
        [
            (x * 100.0 + 128.0) as u8,
            (y * 100.0 + 128.0) as u8,
            (z * 100.0 + 128.0) as u8,
        ]
    })
    .unwrap();
    std::fs::create_dir_all(dir.path().join("f")).unwrap();
    for t in 0..2 {
        for face in omnitrack::spherevideo::Face::ALL {
            let p = dir.path().join(format!("f/{t}_{}.ppm", face.suffix()));
            frame.face_image(face).save(&p).unwrap();
        }
    }
    let ann = "0,1.5,0.1,1.5,0.1,1.6,0,1.6\n0,1.5,0.1,1.5,0.1,1.6,0,1.6\n";
    std::fs::write(dir.path().join("a.txt"), ann).unwrap();
    let manifest = r#"{"id":"six","face_size":8,"frame_pattern":"f/%d.ppm","frame_count":2,
        "annotations":"a.txt","layout":"faces","attribute":"test"}"#;
    let mpath = dir.path().join("m.json");
    std::fs::write(&mpath, manifest).unwrap();
    let seq = load_manifest(Path::new(&mpath)).unwrap();
    assert_eq!(seq.attribute(), Some("test"));
    assert_eq!(*seq.frame(1).unwrap(), frame);
}

#[test]
fn unknown_manifest_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = dir.path().join("m.json");
    std::fs::write(
        &mpath,
        r#"{"id":"x","face_size":8,"frame_pattern":"%d.png","frame_count":1,"annotations":"a.txt","bogus":1}"#,
    )
    .unwrap();
    assert!(matches!(
        load_manifest(&mpath),
        Err(SourceError::Manifest(_))
    ));
}
