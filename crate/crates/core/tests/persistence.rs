mod support;

use std::sync::Arc;
use std::thread;

use gcs_core::imaging::{apply_pipeline, EdgeOperator, EnhancementOp, RgbImage};
use gcs_core::store::{
    decode_ppm, encode_ppm, encode_record, load_image, save_image, FrameBuffer, FrameError,
    SnapshotStore, StoreError, MANUAL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(rng: &mut ChaCha8Rng) -> RgbImage {
    let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
    let mut data = vec![0u8; w * h * 3];
    rng.fill(&mut data[..]);
    RgbImage::new(w, h, data).unwrap()
}

#[test]
fn ppm_round_trip_fifty_images() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x50_50);
    for i in 0..50 {
        let img = random_image(&mut rng);
        let path = dir.path().join(format!("{i}.ppm"));
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.as_bytes(), img.as_bytes());
        assert_eq!((back.width(), back.height()), (img.width(), img.height()));
        assert_eq!(std::fs::read(&path).unwrap(), encode_ppm(&img));
    }
}

#[test]
fn ppm_golden_and_rejections() {
    let white = RgbImage::filled(1, 1, [255; 3]).unwrap();
    assert_eq!(encode_ppm(&white), b"P6\n1 1\n255\n\xff\xff\xff");
    let deep = b"P6\n1 1\n65535\n\0\0\0\0\0\0";
    assert!(matches!(decode_ppm(deep), Err(StoreError::MalformedPpm(_))));
    assert!(matches!(decode_ppm(b"P6\n2 1\n255\n\0\0\0"), Err(StoreError::MalformedPpm(_))));
    assert!(matches!(decode_ppm(b"P3\n1 1\n255\n0 0 0"), Err(StoreError::MalformedPpm(_))));
}

#[test]
fn ingest_examples() {
    let buf = FrameBuffer::new();
    let img = RgbImage::from_fn(16, 16, |x, y| [x as u8, y as u8, 7]).unwrap();
    let rec = encode_record(&img).unwrap();
    let f = buf.ingest(&rec).unwrap();
    assert_eq!(f.image.as_bytes().len(), 768);

    let truncated = &rec[..rec.len() - 5];
    assert!(matches!(buf.ingest(truncated), Err(FrameError::Malformed(_))));
    assert_eq!(buf.latest().unwrap().seq, f.seq);
    assert_eq!(buf.malformed(), 1);

    let second = RgbImage::filled(16, 16, [1, 2, 3]).unwrap();
    buf.ingest(&encode_record(&second).unwrap()).unwrap();
    assert_eq!(buf.latest().unwrap().image, second);
}

#[test]
fn readers_never_see_torn_frames() {
    let buf = Arc::new(FrameBuffer::new());
    let writer = {
        let buf = buf.clone();
        thread::spawn(move || {
            for v in 0..=255u8 {
                let rec = encode_record(&RgbImage::filled(40, 30, [v; 3]).unwrap()).unwrap();
                buf.ingest(&rec).unwrap();
            }
        })
    };
    let readers: Vec<_> = (0..3)
        .map(|_| {
            let buf = buf.clone();
            thread::spawn(move || {
                let mut last = 0;
                for _ in 0..2000 {
                    if let Some(f) = buf.latest() {
                        let first = f.image.as_bytes()[0];
                        assert!(f.image.as_bytes().iter().all(|&b| b == first));
                        assert!(f.seq >= last);
                        last = f.seq;
                    }
                }
            })
        })
        .collect();
    writer.join().unwrap();
    for r in readers {
        r.join().unwrap();
    }
    assert_eq!(buf.latest().unwrap().image.as_bytes()[0], 255);
}

#[test]
fn store_restart_keeps_lineage() {
    let dir = tempfile::tempdir().unwrap();
    let frames = FrameBuffer::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ops = vec![
        EnhancementOp::Rgb2Gray,
        EnhancementOp::Edge(EdgeOperator::canny()),
    ];
    let before = {
        let store = SnapshotStore::open(dir.path()).unwrap();
        for _ in 0..3 {
            frames.publish(random_image(&mut rng));
            store.snap(&frames, MANUAL).unwrap();
        }
        let src = store.get("snap-000002").unwrap();
        let out = apply_pipeline(src.image.clone(), &ops).unwrap();
        store.save_processed(&src.meta, &out.image.to_rgb(), ops.clone()).unwrap();
        store.list().unwrap()
    };
    let store = SnapshotStore::open(dir.path()).unwrap();
    let after = store.list().unwrap();
    assert_eq!(after, before);
    assert_eq!(after[3].lineage, ops);
    assert_eq!(after[3].source_id.as_deref(), Some("snap-000002"));
    for m in &after {
        let snap = store.get(&m.id).unwrap();
        assert_eq!((snap.image.width(), snap.image.height()), (m.width, m.height));
    }
}
