//! CSV tables. Column orders are part of the interface:
//!
//! - summary: `lambda,functional,mean,sd,se,predicted,z`
//! - alternatives: `lambda,functional,convention,predicted,z`
//! - sweep: `lambda,eps,stride,mean_chi,se_chi,mean_chi_oracle,mean_checkerboard,se_checkerboard,checkerboard_per_pixel,mean_components`
//! - topology report: see [`REPORT_HEADER`]
//!
//! Floats use the shortest representation that round-trips.

use crate::experiment::{SummaryStats, SweepRow};
use exctop_core::TopologyReport;
use std::fmt::Write as _;

pub const SUMMARY_HEADER: &str = "lambda,functional,mean,sd,se,predicted,z";
pub const ALTERNATIVES_HEADER: &str = "lambda,functional,convention,predicted,z";
pub const SWEEP_HEADER: &str = "lambda,eps,stride,mean_chi,se_chi,mean_chi_oracle,mean_checkerboard,se_checkerboard,checkerboard_per_pixel,mean_components";
pub const REPORT_HEADER: &str = "rows,cols,spacing,boundary_mode,chi_bicov,chi_complex,components_4,components_8,holes_8,torus_semantics,per_u1,per_u2,per_inf,area,checkerboard_anti,checkerboard_main,n_plus,n_minus";

pub fn summary_csv(stats: &SummaryStats) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in &stats.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.lambda, r.functional, r.mean, r.sd, r.se, r.predicted, r.z
        )
        .unwrap();
    }
    out
}

pub fn alternatives_csv(stats: &SummaryStats) -> String {
    let mut out = format!("{ALTERNATIVES_HEADER}\n");
    for r in &stats.alternatives {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.lambda, r.functional, r.convention, r.predicted, r.z
        )
        .unwrap();
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.lambda,
            r.eps,
            r.stride,
            r.mean_chi,
            r.se_chi,
            r.mean_chi_oracle,
            r.mean_checkerboard,
            r.se_checkerboard,
            r.checkerboard_per_pixel,
            r.mean_components
        )
        .unwrap();
    }
    out
}

pub fn report_csv_row(r: &TopologyReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.rows,
        r.cols,
        r.spacing,
        r.boundary_mode,
        r.chi_bicov,
        r.chi_complex,
        r.components_4,
        r.components_8,
        r.holes_8,
        r.torus_semantics,
        r.per_u1,
        r.per_u2,
        r.per_inf,
        r.area,
        r.checkerboard_anti,
        r.checkerboard_main,
        r.config_counts.n_plus,
        r.config_counts.n_minus
    )
}

pub fn report_csv(r: &TopologyReport) -> String {
    format!("{REPORT_HEADER}\n{}\n", report_csv_row(r))
}
