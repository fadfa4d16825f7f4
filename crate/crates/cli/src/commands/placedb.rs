//! `wayfinder placedb` — build a place database, or match query images
//! against one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use wayfinder_core::features::{extract_sift, SiftConfig};
use wayfinder_core::geomath::GeoCoordinate;
use wayfinder_core::imgio::NetpbmImage;
use wayfinder_core::matching::{
    load_archive, recognize_place, save_archive, DescriptorMode, IndexMode, MatchingError,
    PlaceDatabase, PlaceRecord, RecognizeConfig, VoteMode,
};
use wayfinder_core::segfilter::{
    filter_images, parse_legend_json, SegmentationMask, DEFAULT_COVERAGE_THRESHOLD,
};

use crate::util::{
    domain, list_images, read_gray_image, read_image, read_input, usage, wildcard_match,
    write_output, CliError,
};

#[derive(clap::Subcommand)]
pub enum Action {
    /// Extract SIFT features from place images and write the archive
    Build(BuildArgs),
    /// Match query images against an archive and emit the winner marker
    Match(MatchArgs),
}

#[derive(clap::Args)]
pub struct BuildArgs {
    /// Directory of place images (PGM/PPM)
    #[arg(long)]
    images: PathBuf,
    /// CSV with header place_id,name,lat,lon,images
    #[arg(long)]
    places: PathBuf,
    /// Output archive path
    #[arg(long)]
    out: PathBuf,
    /// Store descriptors quantized to bytes instead of floats
    #[arg(long, default_value_t = false)]
    quantize: bool,
}

#[derive(clap::Args)]
pub struct MatchArgs {
    /// Archive produced by `placedb build`
    #[arg(long)]
    db: PathBuf,
    /// Directory of query images (PGM/PPM)
    #[arg(long)]
    images: PathBuf,
    /// Output GeoJSON marker path
    #[arg(long)]
    out: PathBuf,
    /// Directory of segmentation masks (PGM), one per query image stem
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Legend JSON naming the mask classes
    #[arg(long)]
    legend: Option<PathBuf>,
    /// Road+pavement coverage threshold for the mask filter
    #[arg(long, default_value_t = DEFAULT_COVERAGE_THRESHOLD)]
    coverage_threshold: f64,
    /// Weight votes by good-match count instead of one vote per image
    #[arg(long, default_value_t = false)]
    weighted: bool,
    /// Use the approximate descriptor index instead of the exact scan
    #[arg(long, default_value_t = false)]
    approx: bool,
}

pub fn run(action: Action) -> Result<(), CliError> {
    match action {
        Action::Build(args) => build(args),
        Action::Match(args) => match_images(args),
    }
}

struct PlaceRow {
    place_id: String,
    name: String,
    location: GeoCoordinate,
    pattern: String,
}

fn parse_places_csv(bytes: &[u8]) -> Result<Vec<PlaceRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| domain(format!("places CSV: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let id_col = column("place_id")
        .or_else(|| column("id"))
        .ok_or_else(|| usage("places CSV needs a place_id column"))?;
    let name_col = column("name").ok_or_else(|| usage("places CSV needs a name column"))?;
    let lat_col = column("lat").ok_or_else(|| usage("places CSV needs a lat column"))?;
    let lon_col = column("lon").ok_or_else(|| usage("places CSV needs a lon column"))?;
    let images_col = column("images")
        .or_else(|| column("glob"))
        .ok_or_else(|| usage("places CSV needs an images column"))?;

    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| domain(format!("places CSV: {e}")))?;
        let field = |col: usize| record.get(col).unwrap_or("").to_owned();
        let lat: f64 = field(lat_col)
            .parse()
            .map_err(|_| domain(format!("places CSV row {}: bad lat", line + 1)))?;
        let lon: f64 = field(lon_col)
            .parse()
            .map_err(|_| domain(format!("places CSV row {}: bad lon", line + 1)))?;
        let location = GeoCoordinate::new(lat, lon)
            .map_err(|e| domain(format!("places CSV row {}: {e}", line + 1)))?;
        rows.push(PlaceRow {
            place_id: field(id_col),
            name: field(name_col),
            location,
            pattern: field(images_col),
        });
    }
    if rows.is_empty() {
        return Err(domain("places CSV contains no places"));
    }
    Ok(rows)
}

fn build(args: BuildArgs) -> Result<(), CliError> {
    let rows = parse_places_csv(&read_input(&args.places)?)?;
    let image_paths = list_images(&args.images)?;
    let sift = SiftConfig::default();

    let mut records = Vec::with_capacity(rows.len());
    for row in &rows {
        let matching_paths: Vec<&PathBuf> = image_paths
            .iter()
            .filter(|path| {
                path.file_name()
                    .and_then(|n| n.to_str())
                    .map(|name| wildcard_match(&row.pattern, name))
                    .unwrap_or(false)
            })
            .collect();
        if matching_paths.is_empty() {
            return Err(domain(format!(
                "place {:?}: no images match pattern {:?}",
                row.place_id, row.pattern
            )));
        }
        let mut features = Vec::new();
        for path in &matching_paths {
            let image = read_gray_image(path)?;
            let extracted =
                extract_sift(&image, &sift).map_err(|e| domain(format!("{}: {e}", path.display())))?;
            features.extend(extracted);
        }
        eprintln!(
            "place {:?}: {} images, {} features",
            row.place_id,
            matching_paths.len(),
            features.len()
        );
        records.push(PlaceRecord::from_features(
            row.place_id.clone(),
            row.name.clone(),
            row.location,
            features,
        ));
    }
    let db = PlaceDatabase::new(records, IndexMode::Exact).map_err(|e| domain(e.to_string()))?;
    let mode = if args.quantize {
        DescriptorMode::Quantized
    } else {
        DescriptorMode::Float
    };
    write_output(&args.out, &save_archive(&db, mode))?;
    eprintln!("archive written: {} places", db.records().len());
    Ok(())
}

fn match_images(args: MatchArgs) -> Result<(), CliError> {
    if args.masks.is_some() != args.legend.is_some() {
        return Err(usage("--masks and --legend must be given together"));
    }
    let index_mode = if args.approx {
        IndexMode::approximate()
    } else {
        IndexMode::Exact
    };
    let db_bytes = read_input(&args.db)?;
    let db = load_archive(&db_bytes, index_mode).map_err(|e| domain(e.to_string()))?;

    let image_paths = list_images(&args.images)?;
    if image_paths.is_empty() {
        return Err(domain(format!(
            "no query images found in {}",
            args.images.display()
        )));
    }

    // optional segmentation-coverage filter
    let selected_paths: Vec<PathBuf> = match (&args.masks, &args.legend) {
        (Some(masks_dir), Some(legend_path)) => {
            let legend = parse_legend_json(&read_input(legend_path)?)
                .map_err(|e| domain(e.to_string()))?;
            let mut pairs = Vec::new();
            for path in &image_paths {
                let mask = load_mask(masks_dir, path, &legend)?;
                let image_dims = read_image(path)?.dimensions();
                if mask.dimensions() != image_dims {
                    return Err(domain(format!(
                        "mask for {} is {}x{} but the image is {}x{}",
                        path.display(),
                        mask.dimensions().0,
                        mask.dimensions().1,
                        image_dims.0,
                        image_dims.1
                    )));
                }
                let id = path.display().to_string();
                pairs.push((id, mask));
            }
            let outcome = filter_images(&pairs, args.coverage_threshold)
                .map_err(|e| domain(e.to_string()))?;
            for (id, fraction) in &outcome.fractions {
                let status = if outcome.retained.contains(id) {
                    "retained"
                } else {
                    "rejected"
                };
                eprintln!("coverage {fraction:.3} {status} {id}");
            }
            if outcome.retained.is_empty() {
                return Err(domain(
                    "all query images filtered out by the coverage rule",
                ));
            }
            image_paths
                .iter()
                .filter(|p| outcome.retained.contains(&p.display().to_string()))
                .cloned()
                .collect()
        }
        _ => image_paths.clone(),
    };

    let mut images = Vec::with_capacity(selected_paths.len());
    for path in &selected_paths {
        images.push(read_gray_image(path)?);
    }
    let cfg = RecognizeConfig {
        sift: SiftConfig::default(),
        vote_mode: if args.weighted {
            VoteMode::CountWeighted
        } else {
            VoteMode::OnePerImage
        },
        ratio: None,
    };
    let (report, marker) = match recognize_place(&images, &db, &cfg) {
        Ok(result) => result,
        Err(MatchingError::AllAbstained) => {
            return Err(domain("every query image abstained (no good matches)"))
        }
        Err(e) => return Err(domain(e.to_string())),
    };

    write_output(&args.out, &marker)?;

    eprintln!("votes per image:");
    for vote in &report.per_image {
        let best = vote.best_place.as_deref().unwrap_or("(abstained)");
        eprintln!(
            "  {}: {} ({} good matches)",
            selected_paths[vote.image_index].display(),
            best,
            vote.best_count
        );
    }
    eprintln!("tally:");
    for (place, votes) in &report.tally {
        eprintln!("  {place}: {votes}");
    }
    let tie_note = if report.tie { " (tie, lexicographic pick)" } else { "" };
    eprintln!("winner: {}{tie_note}", report.winner);
    Ok(())
}

fn load_mask(
    masks_dir: &Path,
    image_path: &Path,
    legend: &BTreeMap<u8, String>,
) -> Result<SegmentationMask, CliError> {
    let stem = image_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| domain(format!("bad image file name: {}", image_path.display())))?;
    let mask_path = masks_dir.join(format!("{stem}.pgm"));
    let mask_image = match read_image(&mask_path)? {
        NetpbmImage::Gray(gray) => gray,
        NetpbmImage::Rgb(_) => {
            return Err(domain(format!(
                "mask {} must be a grayscale PGM",
                mask_path.display()
            )))
        }
    };
    SegmentationMask::new(mask_image, legend.clone())
        .map_err(|e| domain(format!("{}: {e}", mask_path.display())))
}
