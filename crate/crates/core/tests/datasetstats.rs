use omnitrack::datasetstats::{fpa, inter, mac, AttributeDataset, AttributeSequence};
use proptest::prelude::*;

const VOCAB: [&str; 12] = [
    "Eb", "Eb_s", "Er_s", "Er_f", "Ed", "Es_s", "Es_f", "Es_w", "Em_s", "Em_f", "En_s", "En_l",
];

#[test]
fn generated_style_dataset() {
    // every frame carries exactly one attribute; one sequence per pattern
    let seqs = VOCAB
        .iter()
        .map(|a| AttributeSequence {
            id: format!("all-{a}"),
            frames: vec![vec![a.to_string()]; 17537],
        })
        .collect();
    let d = AttributeDataset::new(VOCAB.iter().map(|s| s.to_string()).collect(), seqs).unwrap();
    assert_eq!(mac(&d), 100.0);
    assert_eq!(inter(&d), Some(0.0));
    let f = fpa(&d);
    assert!(f.per_attribute.values().all(|&v| v == 17537.0));
    assert_eq!(f.mean, Some(17537.0));
}

fn dataset() -> impl Strategy<Value = AttributeDataset> {
    let frame = prop::collection::btree_set(0..5usize, 0..4);
    let seq = prop::collection::vec(frame, 1..30);
    prop::collection::vec(seq, 1..5).prop_map(|seqs| {
        let vocab: Vec<String> = (0..5).map(|i| format!("a{i}")).collect();
        let sequences = seqs
            .into_iter()
            .enumerate()
            .map(|(k, frames)| AttributeSequence {
                id: format!("s{k}"),
                frames: frames
                    .into_iter()
                    .map(|f| f.into_iter().map(|i| vocab[i].clone()).collect())
                    .collect(),
            })
            .collect();
        AttributeDataset::new(vocab, sequences).unwrap()
    })
}

proptest! {
    #[test]
    fn fpa_sums_to_annotated_frames(d in dataset()) {
        let total: f64 = fpa(&d).per_attribute.values().sum();
        prop_assert!((total - d.annotated_frames() as f64).abs() < 1e-9);
    }

    #[test]
    fn mac_and_inter_ignore_sequence_order(d in dataset()) {
        let mut r = d.clone();
        r.sequences.reverse();
        prop_assert_eq!(mac(&d), mac(&r));
        prop_assert_eq!(inter(&d), inter(&r));
    }
}
