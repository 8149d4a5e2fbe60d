//! Hairline extraction from a run-length encoded hair mask versus the
//! geometric fallback.
//!
//! ```text
//! cargo run --example hairline_mask
//! ```

use faceatlas::fixture;
use faceatlas::geometry::{
    align_frame, extract_hairline, unit_cun, extract_reference_points, HairMask, SemanticsConfig,
};

fn main() {
    let cfg = SemanticsConfig::default();
    let frame = fixture::canonical_frame(0);
    let aligned = align_frame(&frame, &cfg).expect("fixture aligns");

    let fallback = extract_hairline(&frame, &aligned, &cfg);
    println!("no mask:   {:?} at y = {:.4}", fallback.confidence, fallback.point.y);

    for hairline_y in [0.18, 0.22, 0.26] {
        let mask = fixture::hair_above(&frame, hairline_y);
        let rle = mask.encode_rle();
        let decoded = HairMask::decode_rle(mask.width(), mask.height(), &rle).unwrap();
        assert_eq!(decoded, mask);
        let masked = frame.clone().with_hair_mask(Some(mask)).unwrap();
        let h = extract_hairline(&masked, &aligned, &cfg);
        let refs = extract_reference_points(&aligned, &h, &cfg).unwrap();
        println!(
            "mask {hairline_y:.2}: {:?} at y = {:.4}, uc = {:.4}, rle = {rle}",
            h.confidence,
            h.point.y,
            unit_cun(&refs).unwrap().value(),
        );
    }
}
