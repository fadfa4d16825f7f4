//! `wayfinder buildmap` — GeoJSON roads to a serialized intersection graph.

use std::path::PathBuf;

use wayfinder_core::roadnet::{
    build_graph_with_stats, detect_roundabouts, export_annotated_geojson, parse_geojson_roads,
    save_network, validate_graph, DEFAULT_MAX_ROUNDABOUT_PERIMETER_M, DEFAULT_SNAP_TOLERANCE_M,
};

use crate::util::{domain, read_input, write_output, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// GeoJSON FeatureCollection of road line strings
    #[arg(long)]
    roads: PathBuf,
    /// Output path for the serialized map
    #[arg(long)]
    out: PathBuf,
    /// Output path for the annotated GeoJSON (nodes + edges)
    #[arg(long)]
    annotated: PathBuf,
    /// Coordinate snap tolerance in meters
    #[arg(long = "snap-tol", default_value_t = DEFAULT_SNAP_TOLERANCE_M)]
    snap_tolerance: f64,
    /// Maximum cycle perimeter in meters treated as a roundabout
    #[arg(long = "roundabout-perimeter", default_value_t = DEFAULT_MAX_ROUNDABOUT_PERIMETER_M)]
    roundabout_perimeter: f64,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let document = read_input(&args.roads)?;
    let parsed = parse_geojson_roads(&document).map_err(|e| domain(e.to_string()))?;
    let (network, stats) = build_graph_with_stats(&parsed.features, args.snap_tolerance);
    let network = detect_roundabouts(network, args.roundabout_perimeter);
    let report = validate_graph(&network);

    write_output(&args.out, &save_network(&network))?;
    write_output(&args.annotated, &export_annotated_geojson(&network))?;

    eprintln!(
        "parsed {} road features ({} non-road skipped, {} invalid skipped)",
        parsed.features.len(),
        parsed.skipped_non_road,
        parsed.skipped_invalid
    );
    eprintln!(
        "graph: {} nodes, {} edges ({} zero-length segments dropped)",
        network.nodes.len(),
        network.edges.len(),
        stats.dropped_zero_length
    );
    for (junction_type, count) in network.type_histogram() {
        eprintln!("  {junction_type}: {count}");
    }
    if report.is_clean() {
        eprintln!("validation: clean");
    } else {
        eprintln!("validation: {} findings", report.finding_count());
    }
    Ok(())
}
