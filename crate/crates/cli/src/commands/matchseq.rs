//! `wayfinder matchseq` — locate a junction-type sequence on a built map.

use std::path::PathBuf;

use wayfinder_core::geomath::GeoCoordinate;
use wayfinder_core::roadnet::load_network;
use wayfinder_core::seqmatch::{
    export_path_geojson, match_sequence, JunctionSequence, MatchConfig, MatchError,
    DEFAULT_MAX_CANDIDATES, DEFAULT_RADIUS_M,
};

use crate::util::{domain, read_input, usage, write_output, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// Serialized map produced by `buildmap`
    #[arg(long)]
    map: PathBuf,
    /// Start latitude in degrees
    #[arg(long)]
    lat: f64,
    /// Start longitude in degrees
    #[arg(long)]
    lon: f64,
    /// Comma-separated junction tokens, e.g. "T,X,Y" (T, X, Y, R, C)
    #[arg(long)]
    seq: String,
    /// Start-candidate search radius in meters
    #[arg(long, default_value_t = DEFAULT_RADIUS_M)]
    radius: f64,
    /// Maximum number of start candidates to try
    #[arg(long = "max-candidates", default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: usize,
    /// Number of path candidates to collect
    #[arg(long = "max-results", default_value_t = 1)]
    max_results: usize,
    /// Allow paths to revisit nodes
    #[arg(long = "allow-revisit", default_value_t = false)]
    allow_revisit: bool,
    /// Output GeoJSON for the best path
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let sequence = JunctionSequence::parse_text(&args.seq).map_err(|e| usage(e.to_string()))?;
    let start = GeoCoordinate::new(args.lat, args.lon).map_err(|e| usage(e.to_string()))?;
    let map_bytes = read_input(&args.map)?;
    let network = load_network(&map_bytes).map_err(|e| domain(e.to_string()))?;

    let mut cfg = MatchConfig::new(start);
    cfg.radius = args.radius;
    cfg.max_candidates = args.max_candidates;
    cfg.max_results = args.max_results.max(1);
    cfg.allow_node_revisit = args.allow_revisit;

    let candidates = match match_sequence(&network, &sequence, &cfg) {
        Ok(candidates) => candidates,
        Err(MatchError::NoCandidates) => {
            return Err(domain(format!(
                "no path: no {} intersection within {} m of the start",
                sequence.items()[0],
                cfg.radius
            )))
        }
        Err(e) => return Err(domain(e.to_string())),
    };
    let Some(best) = candidates.first() else {
        return Err(domain("no path: sequence not found in the graph"));
    };

    write_output(&args.out, &export_path_geojson(&network, best))?;

    eprintln!(
        "{} candidate path(s); best starts {:.1} m away, total length {:.1} m",
        candidates.len(),
        best.start_distance,
        best.total_length
    );
    for (rank, candidate) in candidates.iter().enumerate() {
        let nodes: Vec<String> = candidate.nodes.iter().map(|n| n.to_string()).collect();
        eprintln!(
            "  #{rank}: start {:.1} m, length {:.1} m, nodes {}",
            candidate.start_distance,
            candidate.total_length,
            nodes.join(" -> ")
        );
    }
    Ok(())
}
