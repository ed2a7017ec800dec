//! Regenerate the bundled 20-map synthetic corpus under
//! `tests/fixtures/corpus`. Run with
//! `cargo run -p mapdesign --example make_fixture_corpus`.

use std::fs;
use std::path::{Path, PathBuf};

use mapdesign::model::{BinaryMask, OrientedBox, PageGeometry};
use mapdesign::raster::{save_mask_png, save_png, RgbRaster};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

const PALETTE: [[u8; 3]; 8] = [
    [214, 48, 39],
    [244, 165, 60],
    [250, 230, 120],
    [90, 170, 90],
    [120, 200, 215],
    [60, 110, 190],
    [150, 90, 170],
    [200, 200, 200],
];

const SECONDARY: [&str; 9] = [
    "title",
    "legend",
    "scale_bar",
    "inset_map",
    "chart",
    "descriptive_text",
    "north_arrow",
    "picture",
    "table",
];

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

fn rounded(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn element(kind: &str, cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Value {
    json!({
        "kind": kind,
        "box": {"cx": rounded(cx), "cy": rounded(cy), "w": rounded(w), "h": rounded(h), "theta": theta}
    })
}

fn main() {
    let dir = corpus_dir();
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(dir.join("images")).unwrap();
    fs::create_dir_all(dir.join("masks")).unwrap();

    let mut rng = StdRng::seed_from_u64(20_240_601);
    let journals = ["geo_letters", "carto_review", "spatial_quarterly"];
    let mut lines = Vec::new();

    for i in 1..=20u32 {
        let map_id = format!("m{i:02}");
        let language = if i % 2 == 0 { "en" } else { "zh" };
        let journal = journals[(i as usize - 1) % journals.len()];
        let year = 2000 + ((i - 1) / 4) as i32;
        let (pw, ph) = if i % 3 == 0 { (96, 128) } else { (128, 96) };
        let page = PageGeometry::new(pw, ph).unwrap();

        let mw = rng.gen_range(0.45..0.85);
        let mh = rng.gen_range(0.45..0.85);
        let mcx = rng.gen_range(mw / 2.0..=1.0 - mw / 2.0);
        let mcy = rng.gen_range(mh / 2.0..=1.0 - mh / 2.0);
        let mut elements = vec![element("main_map", mcx, mcy, mw, mh, 0.0)];

        let mut kinds: Vec<&str> = SECONDARY.to_vec();
        kinds.shuffle(&mut rng);
        let extra = rng.gen_range(0..=4);
        for &kind in &kinds[..extra] {
            let w = rng.gen_range(0.08..0.25);
            let h = rng.gen_range(0.05..0.15);
            let cx = rng.gen_range(w / 2.0..=1.0 - w / 2.0);
            let cy = rng.gen_range(h / 2.0..=1.0 - h / 2.0);
            let theta = if kind == "descriptive_text" && i % 4 == 1 { 30.0 } else { 0.0 };
            elements.push(element(kind, cx, cy, w, h, theta));
        }

        // Parse the rounded main-map box back so pixels match the manifest.
        let main_box: OrientedBox = serde_json::from_value(elements[0]["box"].clone()).unwrap();
        let region = BinaryMask::from_box(&main_box, page);
        let n_colors = rng.gen_range(1..=4);
        let colors: Vec<[u8; 3]> = PALETTE.choose_multiple(&mut rng, n_colors).copied().collect();
        let image = RgbRaster::from_fn(pw, ph, |row, col| {
            if region.get(row, col) {
                colors[(col as usize * colors.len()) / pw as usize]
            } else {
                [255, 255, 255]
            }
        })
        .unwrap();

        let image_name = format!("images/{map_id}.png");
        let missing_image = i == 13;
        if !missing_image {
            save_png(&image, &dir.join(&image_name)).unwrap();
        }

        let with_mask = i % 5 != 0 && !missing_image;
        let mut record = json!({
            "map_id": map_id,
            "image_path": image_name,
            "language": language,
            "journal": journal,
            "year": year,
            "elements": elements,
        });
        if with_mask {
            let mut mask = region.clone();
            // A stray speck that mask refinement has to drop.
            mask.set(0, pw - 1, true);
            let mask_name = format!("masks/{map_id}.png");
            save_mask_png(&mask, &dir.join(&mask_name)).unwrap();
            record["mask_path"] = json!(mask_name);
        }
        if missing_image {
            record["page"] = json!({"width_px": pw, "height_px": ph});
        }
        lines.push(serde_json::to_string(&record).unwrap());
    }

    fs::write(dir.join("manifest.jsonl"), lines.join("\n") + "\n").unwrap();
    let articles = "journal,year,articles\n".to_string()
        + &journals
            .iter()
            .flat_map(|j| (2000..2005).map(move |y| format!("{j},{y},{}\n", 2 + (y - 2000) % 3)))
            .collect::<String>();
    fs::write(dir.join("articles.csv"), articles).unwrap();
    println!("wrote {}", dir.display());
}
