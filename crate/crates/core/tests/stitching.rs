//! End-to-end stitching pipeline checks on synthetic scenes.

mod common;

use common::{color_texture, crop_color};
use wayfinder_core::stitcher::{
    check_overlap, stitch_sequence, ColorImage, StitchConfig, StitchError,
};

fn mean_abs_error(a: &ColorImage, b: &ColorImage) -> f64 {
    assert_eq!((a.width(), a.height()), (b.width(), b.height()));
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for y in 0..a.height() {
        for x in 0..a.width() {
            let pa = a.pixel(x, y);
            let pb = b.pixel(x, y);
            for c in 0..3 {
                sum += (pa[c] - pb[c]).abs() as f64;
                count += 1;
            }
        }
    }
    sum / count as f64
}

#[test]
fn two_overlapping_crops_reassemble_the_source() {
    let source = color_texture(220, 160, 77);
    let left = crop_color(&source, 0, 0, 140, 160);
    let right = crop_color(&source, 80, 0, 140, 160);

    let cfg = StitchConfig::default();
    let outcome = stitch_sequence(&[left, right], &cfg).unwrap();
    let pano = &outcome.panorama;
    assert!(outcome.low_overlap_pairs.is_empty());
    assert!(outcome.pair_overlaps[0] > 0.35);

    // the two crops overlap by 60/140; the reassembled panorama must match
    // the source region it covers
    assert!(
        pano.image.width() >= 214 && pano.image.width() <= 220,
        "panorama width {}",
        pano.image.width()
    );
    assert!(pano.image.height() >= 154 && pano.image.height() <= 160);

    // find the alignment by checking a small set of offsets
    let mut best = f64::INFINITY;
    for ox in 0..=(220 - pano.image.width()) {
        for oy in 0..=(160 - pano.image.height()) {
            let window = crop_color(&source, ox, oy, pano.image.width(), pano.image.height());
            best = best.min(mean_abs_error(&pano.image, &window));
        }
    }
    assert!(
        best <= 3.0 / 255.0,
        "best reassembly mean abs error {best} above 3/255"
    );
}

#[test]
fn repeated_frame_stitches_to_itself() {
    let frame = color_texture(150, 110, 41);
    let cfg = StitchConfig::default();
    let outcome = stitch_sequence(&[frame.clone(), frame.clone()], &cfg).unwrap();
    let pano = outcome.panorama;
    assert_eq!(pano.image.width(), 150);
    assert_eq!(pano.image.height(), 110);
    // identical frames blend to the frame itself, byte-for-byte after
    // 8-bit quantization
    assert_eq!(pano.image.to_rgb8(), frame.to_rgb8());
}

#[test]
fn three_frame_translation_chain_has_analytic_width() {
    let source = color_texture(320, 140, 55);
    let frames = vec![
        crop_color(&source, 0, 0, 140, 140),
        crop_color(&source, 90, 0, 140, 140),
        crop_color(&source, 180, 0, 140, 140),
    ];
    let cfg = StitchConfig::default();
    let outcome = stitch_sequence(&frames, &cfg).unwrap();
    // analytic union width: 180 + 140 = 320
    let width = outcome.panorama.image.width() as i64;
    assert!(
        (width - 320).abs() <= 2,
        "panorama width {width}, expected 320 +- 2"
    );
    assert_eq!(outcome.pair_overlaps.len(), 2);
    for overlap in &outcome.pair_overlaps {
        assert!((overlap - 50.0 / 140.0).abs() < 0.06, "pair overlap {overlap}");
    }
}

#[test]
fn stitching_needs_two_frames() {
    let frame = color_texture(100, 100, 3);
    assert!(matches!(
        stitch_sequence(&[frame], &StitchConfig::default()),
        Err(StitchError::TooFewFrames(1))
    ));
}

#[test]
fn unrelated_frames_fail_with_the_pair_index() {
    let a = color_texture(130, 100, 101);
    let b = color_texture(130, 100, 909);
    match stitch_sequence(&[a, b], &StitchConfig::default()) {
        Err(StitchError::PairFailed { pair_index, .. }) => assert_eq!(pair_index, 0),
        Ok(outcome) => {
            // accidental consensus is possible; it must at least be flagged
            // as a low-overlap pair
            assert_eq!(outcome.low_overlap_pairs, vec![0]);
        }
        Err(other) => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn identical_images_overlap_fully() {
    let img = color_texture(150, 110, 13);
    let report = check_overlap(&img, &img, &StitchConfig::default()).unwrap();
    assert!((report.fraction - 1.0).abs() <= 0.02, "fraction {}", report.fraction);
    assert!(!report.low);
}

#[test]
fn forty_percent_shift_overlaps_sixty_percent() {
    let source = color_texture(220, 140, 67);
    let a = crop_color(&source, 0, 0, 140, 140);
    let b = crop_color(&source, 56, 0, 140, 140);
    // H maps a into b's frame; 56/140 = 40% shift leaves 60% covered
    let report = check_overlap(&a, &b, &StitchConfig::default()).unwrap();
    assert!(
        (report.fraction - 0.60).abs() <= 0.05,
        "fraction {}",
        report.fraction
    );
}

#[test]
fn unrelated_images_no_consensus_or_low() {
    let a = color_texture(130, 100, 501);
    let b = color_texture(130, 100, 707);
    match check_overlap(&a, &b, &StitchConfig::default()) {
        Err(StitchError::NoConsensus) | Err(StitchError::DegenerateConfiguration(_)) => {}
        Ok(report) => assert!(report.low, "unrelated frames reported fraction {}", report.fraction),
        Err(other) => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn fixed_seed_gives_byte_identical_panoramas() {
    let source = color_texture(200, 120, 88);
    let frames = vec![
        crop_color(&source, 0, 0, 120, 120),
        crop_color(&source, 70, 0, 120, 120),
    ];
    let cfg = StitchConfig::default();
    let a = stitch_sequence(&frames, &cfg).unwrap();
    let b = stitch_sequence(&frames, &cfg).unwrap();
    assert_eq!(a.panorama.image.to_rgb8(), b.panorama.image.to_rgb8());
}
