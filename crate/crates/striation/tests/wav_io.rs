use hound::{SampleFormat, WavSpec, WavWriter};
use proptest::prelude::*;
use striation::wav::decode_wav;
use striation_core::segment::segment_intervals;

fn write(path: &std::path::Path, channels: u16, frames: &[i16]) {
    let spec = WavSpec { channels, sample_rate: 8000, bits_per_sample: 16, sample_format: SampleFormat::Int };
    let mut w = WavWriter::create(path, spec).unwrap();
    for &s in frames {
        for _ in 0..channels {
            w.write_sample(s).unwrap();
        }
    }
    w.finalize().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identical_channels_mix_to_mono(frames in prop::collection::vec(any::<i16>(), 1..2000)) {
        let dir = tempfile::tempdir().unwrap();
        let (m, s) = (dir.path().join("m.wav"), dir.path().join("s.wav"));
        write(&m, 1, &frames);
        write(&s, 2, &frames);
        prop_assert_eq!(decode_wav(&m).unwrap(), decode_wav(&s).unwrap());
    }

    #[test]
    fn intervals_tile_a_prefix(frames in prop::collection::vec(any::<i16>(), 6000..12000), ms in 100u32..700) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.wav");
        write(&p, 1, &frames);
        let sig = decode_wav(&p).unwrap();
        let ivs = segment_intervals(&sig, ms as f64 / 1000.0, "m", None).unwrap();
        let joined: Vec<f64> = ivs.iter().flat_map(|iv| iv.samples.iter().copied()).collect();
        prop_assert_eq!(&joined[..], &sig.samples[..joined.len()]);
        prop_assert!(sig.samples.len() - joined.len() < ivs[0].samples.len());
    }
}
