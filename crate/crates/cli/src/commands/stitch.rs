//! `wayfinder stitch` — panorama from a frame directory.

use std::path::PathBuf;

use wayfinder_core::imgio::write_ppm;
use wayfinder_core::stitcher::{stitch_sequence, StitchConfig, StitchError, DEFAULT_SEED};

use crate::util::{domain, list_images, read_color_image, usage, write_output, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// Directory of frames (PGM/PPM), stitched in lexicographic order
    #[arg(long)]
    frames: PathBuf,
    /// Output panorama (PPM)
    #[arg(long)]
    out: PathBuf,
    /// RANSAC seed; overrides the WAYFINDER_SEED environment variable
    #[arg(long)]
    seed: Option<u64>,
}

/// Seed precedence: --seed flag, then WAYFINDER_SEED, then the default.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("WAYFINDER_SEED") {
        Ok(value) => value
            .parse()
            .map_err(|_| usage(format!("WAYFINDER_SEED is not an integer: {value:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn run(args: Args) -> Result<(), CliError> {
    let paths = list_images(&args.frames)?;
    if paths.len() < 2 {
        return Err(usage(format!(
            "stitching needs at least 2 frames, found {} in {}",
            paths.len(),
            args.frames.display()
        )));
    }
    let mut frames = Vec::with_capacity(paths.len());
    for path in &paths {
        frames.push(read_color_image(path)?);
    }
    let cfg = StitchConfig {
        seed: resolve_seed(args.seed)?,
        ..StitchConfig::default()
    };
    let outcome = match stitch_sequence(&frames, &cfg) {
        Ok(outcome) => outcome,
        Err(StitchError::PairFailed {
            pair_index,
            pair_index_next,
            source,
        }) => {
            return Err(domain(format!(
                "stitch failed between frames {} and {} ({} / {}): {source}",
                pair_index,
                pair_index_next,
                paths[pair_index].display(),
                paths[pair_index_next].display(),
            )))
        }
        Err(e) => return Err(domain(e.to_string())),
    };

    for &pair in &outcome.low_overlap_pairs {
        eprintln!(
            "warning: frames {} and {} overlap only {:.0}% (expected at least {:.0}%)",
            pair,
            pair + 1,
            outcome.pair_overlaps[pair] * 100.0,
            cfg.min_overlap * 100.0
        );
    }
    let pano = outcome.panorama.image.to_rgb8();
    write_output(&args.out, &write_ppm(&pano))?;
    eprintln!(
        "panorama {}x{} from {} frames (seed {})",
        pano.width,
        pano.height,
        frames.len(),
        cfg.seed
    );
    Ok(())
}
