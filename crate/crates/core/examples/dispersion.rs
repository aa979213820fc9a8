//! Fundamental interface mode of the built-in profile and a short dispersion curve.
//!
//! cargo run --release --example dispersion

use kerr_interface::mode::{reconstruct_mode, verify_mode};
use kerr_interface::prelude::*;

fn main() {
    let profile = DielectricProfile::fig1();
    let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();

    let mode = fundamental_mode(&profile, 3.0, &grid).unwrap().expect("fig1 supports a mode at omega0 = 3");
    let report = verify_mode(&mode, &profile);
    println!("omega0 = 3: k0 = {:.6}", mode.k0);
    println!("relative jumps: eps1*w1 {:.2e}, w2 {:.2e}, w3 {:.2e}", report.jump_eps1w1, report.jump_w2, report.jump_w3);
    println!(
        "left decay rate {:.6} (constant side predicts {:.6})",
        report.left_decay_rate,
        (mode.k0 * mode.k0 - 9.0).sqrt()
    );

    // a coarser grid is plenty for the curve
    let coarse = Grid1D::new(-30.0, 30.0, 5e-3).unwrap();
    println!("\n omega      k0      residual");
    for omega in [2.0, 2.5, 3.0, 3.5, 4.0] {
        match solve_dispersion(&profile, omega, &coarse, 1).unwrap().first() {
            Some(c) => {
                let m = reconstruct_mode(&c.w3, &coarse, &profile, omega, c.k0).unwrap();
                println!("{omega:6.2}  {:9.6}  {:.2e}", c.k0, verify_mode(&m, &profile).residual_l);
            }
            None => println!("{omega:6.2}  no localized mode"),
        }
    }

    let flat = DielectricProfile::piecewise_constant(1.0, 2.0, 1.0);
    let none = fundamental_mode(&flat, 3.0, &coarse).unwrap();
    println!("\nconstant positive permittivities: mode found = {}", none.is_some());
}
