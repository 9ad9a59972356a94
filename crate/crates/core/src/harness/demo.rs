use std::fs;
use std::path::Path;

use super::run::write_png16;
use crate::corpus::{make_phantom, PhantomKind};
use crate::error::{Error, Result};
use crate::rng::{mix, mix_index};

pub const DEMO_SIZE: usize = 64;

/// Sizes of the mixed-size images placed outside `regions/`.
const ALL_IN_ONE: [(PhantomKind, usize, usize); 6] = [
    (PhantomKind::Edges, 48, 64),
    (PhantomKind::Blobs, 64, 48),
    (PhantomKind::Neurites, 80, 80),
    (PhantomKind::Edges, 56, 72),
    (PhantomKind::Blobs, 96, 64),
    (PhantomKind::Neurites, 40, 40),
];

/// Writes the phantom corpus used for desk-scale runs: 8 edges, 8 blobs,
/// 8 neurites and 2 constant images at 64x64 under `regions/`, and six
/// mixed-size images under `all_in_one/`. Returns the relative paths written.
pub fn make_demo_corpus(out_dir: &Path, seed: u64) -> Result<Vec<String>> {
    let base = mix(seed, "demo");
    let mut plan: Vec<(String, PhantomKind, usize, usize)> = Vec::new();
    for (kind, count) in [
        (PhantomKind::Edges, 8),
        (PhantomKind::Blobs, 8),
        (PhantomKind::Neurites, 8),
        (PhantomKind::Constant, 2),
    ] {
        for i in 0..count {
            plan.push((format!("regions/{}_{i:02}.png", kind.as_str()), kind, DEMO_SIZE, DEMO_SIZE));
        }
    }
    for (i, &(kind, h, w)) in ALL_IN_ONE.iter().enumerate() {
        plan.push((format!("all_in_one/{}_{i:02}_{h}x{w}.png", kind.as_str()), kind, h, w));
    }

    for dir in ["regions", "all_in_one"] {
        let d = out_dir.join(dir);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    for (i, (rel, kind, h, w)) in plan.iter().enumerate() {
        let phantom = make_phantom(*kind, *h, *w, mix_index(base, i as u64));
        write_png16(phantom.field.view(), &out_dir.join(rel))?;
    }
    Ok(plan.into_iter().map(|(rel, ..)| rel).collect())
}
