//! Turán extraction, biclique certificates, Zarankiewicz sweeps and planar distance counts.

pub mod biclique;
pub mod geometry;
pub mod turan;
pub mod zarankiewicz;

pub use biclique::{contains_biclique, contains_biclique_naive, BicliqueVerdict, DEFAULT_NODE_BUDGET};
pub use geometry::{
    count_equilateral_bruteforce, count_equilateral_triangles, count_unit_distances, count_unit_distances_bruteforce,
    distance_histogram, sweep_unit_distance, DistanceSweep,
};
pub use turan::{turan_extract, TuranConfig, TuranResult, TuranStep};
pub use zarankiewicz::{comparison_curves, least_squares, zarankiewicz_sweep, LadderRow, SweepFamily, ZarankiewiczExperiment};
