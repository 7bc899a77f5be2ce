use adtn_core::rng::{stream, Stream};
use adtn_core::stats::{chi2_sf, chi2_uniform_statistic};
use adtn_core::{message_id, FrameCodec, GroupId, GroupKey, WireError};
use proptest::prelude::*;

// scipy.stats.chi2.isf(0.01, 255)
const CHI2_CRIT_255: f64 = 310.457_388_219_905_85;

fn key(group: u32, bytes: [u8; 32]) -> GroupKey {
    GroupKey::new(GroupId(group), bytes)
}

proptest! {
    #[test]
    fn round_trip(payload in prop::collection::vec(any::<u8>(), 0..=998), k in any::<[u8; 32]>(), seed in any::<u64>()) {
        let codec = FrameCodec::default();
        let key = key(0, k);
        let frame = codec.encode(&payload, &key, &mut stream(seed, Stream::Custom(0))).unwrap();
        prop_assert_eq!(frame.len(), 1024);
        let plain = codec.try_decrypt(frame.as_bytes(), &key).unwrap().unwrap();
        prop_assert_eq!(plain.id(), message_id(&payload));
        prop_assert_eq!(plain.payload, payload);
    }

    #[test]
    fn every_frame_has_the_configured_size(size in 64usize..=4096, len in 0usize..64, seed in any::<u64>()) {
        let codec = FrameCodec::new(size).unwrap();
        let mut rng = stream(seed, Stream::Custom(1));
        let payload = vec![7u8; len.min(codec.max_payload())];
        prop_assert_eq!(codec.encode(&payload, &key(0, [1; 32]), &mut rng).unwrap().len(), size);
        prop_assert_eq!(codec.cover(&mut rng).len(), size);
    }

    #[test]
    fn other_key_reads_nothing(payload in prop::collection::vec(any::<u8>(), 0..200), a in any::<[u8; 32]>(), b in any::<[u8; 32]>()) {
        prop_assume!(a != b);
        let codec = FrameCodec::default();
        let frame = codec.encode(&payload, &key(0, a), &mut stream(1, Stream::Custom(2))).unwrap();
        prop_assert_eq!(codec.try_decrypt(frame.as_bytes(), &key(1, b)).unwrap(), None);
    }

    #[test]
    fn wrong_length_is_an_error(len in 0usize..2048) {
        prop_assume!(len != 1024);
        let codec = FrameCodec::default();
        let err = codec.try_decrypt(&vec![0u8; len], &key(0, [0; 32])).unwrap_err();
        prop_assert_eq!(err, WireError::FrameLength { expected: 1024, actual: len });
    }
}

#[test]
fn hundred_thousand_false_positive_trials() {
    let codec = FrameCodec::default();
    let mut rng = stream(5, Stream::Custom(3));
    let readers: Vec<GroupKey> = (0..4).map(|g| GroupKey::generate(GroupId(g), &mut rng)).collect();
    let writer = GroupKey::generate(GroupId(9), &mut rng);
    let mut hits = 0;
    for i in 0..50_000u32 {
        let cover = codec.cover(&mut rng);
        let real = codec.encode(&i.to_be_bytes(), &writer, &mut rng).unwrap();
        let reader = &readers[i as usize % readers.len()];
        hits += codec.try_decrypt(cover.as_bytes(), reader).unwrap().is_some() as u32;
        hits += codec.try_decrypt(real.as_bytes(), reader).unwrap().is_some() as u32;
    }
    assert_eq!(hits, 0);
}

#[test]
fn cover_bytes_pass_uniformity() {
    let codec = FrameCodec::default();
    let mut rng = stream(11, Stream::Custom(4));
    let mut pooled = [0u64; 256];
    let mut positional = vec![[0u64; 256]; 1024];
    for _ in 0..10_000 {
        let f = codec.cover(&mut rng);
        for (pos, &b) in f.as_bytes().iter().enumerate() {
            pooled[b as usize] += 1;
            positional[pos][b as usize] += 1;
        }
    }
    let stat = chi2_uniform_statistic(&pooled);
    assert!(stat < CHI2_CRIT_255, "pooled chi2 {stat}");
    let sum: f64 = positional.iter().map(|c| chi2_uniform_statistic(c)).sum();
    assert!(chi2_sf(sum, 255.0 * 1024.0) > 0.01);
}

#[test]
fn real_frames_pass_uniformity_even_with_constant_payload() {
    let codec = FrameCodec::default();
    let mut rng = stream(12, Stream::Custom(5));
    let k = GroupKey::generate(GroupId(0), &mut rng);
    let mut pooled = [0u64; 256];
    for _ in 0..10_000 {
        let f = codec.encode(&[0u8; 500], &k, &mut rng).unwrap();
        for &b in f.as_bytes() {
            pooled[b as usize] += 1;
        }
    }
    assert!(chi2_uniform_statistic(&pooled) < CHI2_CRIT_255);
}
