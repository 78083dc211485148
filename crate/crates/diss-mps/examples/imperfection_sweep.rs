//! Steady-state fidelity of a pinned four-site chain against dephasing,
//! with and without the long-range loss channels of a linear-chain
//! implementation, plus the matching effective temperature.
//!
//!     cargo run --release --example imperfection_sweep

use diss_mps::aklt_mps::Boundary;
use diss_mps::rydberg_eit::{
    effective_temperature, imperfect_steady_state, EITParams, ImperfectionSpec,
};

fn main() -> diss_mps::Result<()> {
    let n = 4;
    let eit = EITParams::symmetric(0.05, 1.0, 1.0, 1.0);
    println!("{:>10} {:>14} {:>14}", "T2", "F (chain only)", "F (long range)");
    for &t2 in &[1e2, 1e3, 1e4, 1e5] {
        let f_off = imperfect_steady_state(n, t2, None, 6561)?;
        let geometry = ImperfectionSpec::linear_chain(n, t2, 1.0, eit);
        let f_on = imperfect_steady_state(n, t2, Some(&geometry), 6561)?;
        println!("{t2:>10.0} {f_off:>14.6} {f_on:>14.6}");
    }
    for &f in &[0.7, 0.9, 0.99] {
        let t = effective_temperature(f, n, Boundary::Periodic)?;
        println!(
            "F_ss = {f}: T_eff = {:.4}, finite-size gap {:.4}, ratio {:.4}",
            t.t_eff, t.gap, t.ratio
        );
    }
    Ok(())
}
