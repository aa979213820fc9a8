#![allow(dead_code)]

use kerr_interface::fem::Rect;
use kerr_interface::harness::{DomainSpec, ExperimentKind, ModeGridSpec, RunConfig};

/// A config small enough to run in well under a second per solve.
pub fn quick(kind: ExperimentKind) -> RunConfig {
    let mut c = RunConfig::new(kind);
    c.mode_grid = ModeGridSpec { left: -20.0, right: 20.0, spacing: 0.01 };
    c.domain = DomainSpec { minus: Rect::new((-3.0, 0.0), (-3.0, 3.0)), plus: Rect::new((0.0, 3.0), (-3.0, 3.0)) };
    c.eps = vec![3e-4];
    c.h = vec![0.25];
    c
}

pub fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}
