//! Norms of the ansatz field and of the residual source `b` as eps shrinks.
//!
//! cargo run --release --example ansatz_norms

use std::sync::Arc;

use kerr_interface::ansatz::{norms, DEFAULT_RESOLUTION};
use kerr_interface::prelude::*;
use kerr_interface::quadrature::loglog_slope;

fn main() {
    let profile = DielectricProfile::fig1();
    let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
    let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().unwrap());

    for (label, eps) in [("[1e-4, 1e-3]", [1e-3, 5e-4, 2e-4, 1e-4]), ("[1e-5, 1e-4]", [1e-4, 5e-5, 2e-5, 1e-5])] {
        println!("eps in {label}");
        println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "eps", "U0_L2", "U0_L4", "b_L2", "b_L1log");
        let mut cols = [vec![], vec![], vec![], vec![]];
        for e in eps {
            let field = AnsatzField::new(mode.clone(), profile.clone(), Envelope::gaussian(5e6), e).unwrap();
            let n = norms(&field, &field.covering_domain().unwrap(), DEFAULT_RESOLUTION).unwrap();
            println!("{e:8.0e} {:12.5e} {:12.5e} {:12.5e} {:12.5e}", n.u0_l2, n.u0_l4, n.b_l2, n.b_l1log);
            for (c, v) in cols.iter_mut().zip([n.u0_l2, n.u0_l4, n.b_l2, n.b_l1log]) {
                c.push(v);
            }
        }
        let s: Vec<String> = cols.iter().map(|c| format!("{:.3}", loglog_slope(&eps, c).unwrap())).collect();
        println!("slopes: {}\n", s.join(", "));
    }
}
