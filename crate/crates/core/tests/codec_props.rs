mod common;

use proptest::prelude::*;

use guiforge::codec::{decode_coords, denormalize, CoordCodec, CoordMode, Coords};
use guiforge::{BBox, Point, Viewport};

fn viewport() -> impl Strategy<Value = Viewport> {
    (1u32..4000, 1u32..4000).prop_map(|(w, h)| Viewport::new(w, h))
}

/// Exact half-up rounding of p / w to three decimals, in integers.
fn exact3(p: u64, w: u64) -> String {
    let q = (2000 * p + w) / (2 * w);
    format!("{}.{:03}", q / 1000, q % 1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn point_round_trip(vp in viewport(), fx in 0.0..=1.0f64, fy in 0.0..=1.0f64) {
        let codec = CoordCodec::default();
        let p = Point::new(fx * vp.width as f64, fy * vp.height as f64);
        let text = codec.encode_point(p, vp).unwrap();
        let Ok(Coords::Point(q)) = decode_coords(&text) else { panic!("{text}") };
        prop_assert!((q.x - p.x / vp.width as f64).abs() <= codec.max_error() + 1e-12);
        prop_assert!((q.y - p.y / vp.height as f64).abs() <= codec.max_error() + 1e-12);
    }

    #[test]
    fn bbox_round_trip(vp in viewport(), a in 0.0..=1.0f64, b in 0.0..=1.0f64, c in 0.0..=1.0f64, d in 0.0..=1.0f64) {
        let (w, h) = (vp.width as f64, vp.height as f64);
        let Some(bb) = BBox::new(a.min(b) * w, c.min(d) * h, a.max(b) * w, c.max(d) * h) else { return Ok(()) };
        let codec = CoordCodec::default();
        let text = codec.encode(&bb, CoordMode::Bbox, vp).unwrap();
        let Ok(Coords::Bbox(q)) = decode_coords(&text) else { panic!("{text}") };
        let want = [bb.x1 / w, bb.y1 / h, bb.x2 / w, bb.y2 / h];
        for (g, t) in [q.x1, q.y1, q.x2, q.y2].into_iter().zip(want) {
            prop_assert!((g - t).abs() <= 0.0005 + 1e-12);
        }
        let Coords::Bbox(px) = denormalize(Coords::Bbox(q), vp) else { unreachable!() };
        prop_assert!((px.x1 - bb.x1).abs() <= 0.0005 * w + 1e-9);
    }

    #[test]
    fn integer_pixels_round_half_up_exactly(w in 1u64..5000, h in 1u64..5000, fx in 0.0..=1.0f64, fy in 0.0..=1.0f64) {
        let x = (fx * w as f64).floor() as u64;
        let y = (fy * h as f64).floor() as u64;
        let text = CoordCodec::default()
            .encode_point(Point::new(x as f64, y as f64), Viewport::new(w as u32, h as u32))
            .unwrap();
        prop_assert_eq!(text, format!("({},{})", exact3(x, w), exact3(y, h)));
    }
}

#[test]
fn every_half_step_below_2000_rounds_up() {
    let codec = CoordCodec::default();
    for w in 1..=2000u64 {
        // p / w lands on a half step when 2000 p / w is odd.
        for p in 0..=w {
            if (2000 * p) % w == 0 && ((2000 * p) / w) % 2 == 1 {
                let vp = Viewport::new(w as u32, 1);
                let got = codec.encode_point(Point::new(p as f64, 0.0), vp).unwrap();
                assert_eq!(got, format!("({},0.000)", exact3(p, w)), "p={p} w={w}");
            }
        }
    }
}
