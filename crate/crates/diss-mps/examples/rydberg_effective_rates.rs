//! Effective decay rate of a blockaded pair under dark-state dressing:
//! closed form vs a six-amplitude integration of the driven level scheme,
//! and the loss-factor approximation in its window of validity.
//!
//!     cargo run --release --example rydberg_effective_rates

use diss_mps::rydberg_eit::{chi_approx, chi_exact, effective_rate, two_atom_ode_oracle, EITParams};

fn main() -> diss_mps::Result<()> {
    println!("{:>6} {:>6} {:>12} {:>12} {:>7}", "g", "U", "closed form", "integrator", "ratio");
    for &g in &[0.02, 0.05, 0.1] {
        for &u in &[0.5, 1.0, 2.0] {
            let p = EITParams::symmetric(g, 1.0, 1.0, u);
            let r = effective_rate(&p, true);
            let fit = two_atom_ode_oracle(&p, 3.0 / r.gamma_dd)?;
            println!(
                "{:>6.2} {:>6.1} {:>12.3e} {:>12.3e} {:>7.3}",
                g, u, r.gamma_dd, fit, fit / r.gamma_dd
            );
        }
    }
    println!("\nloss factor (exact vs 1/gamma + gamma/(4 omega^2)):");
    for &omega in &[1.0, 2.0, 5.0] {
        let p = EITParams::symmetric(0.05 * omega, omega, 1.0, 1.0);
        println!(
            "  omega = {omega}: exact {:.6}, approximate {:.6}",
            chi_exact(&p),
            chi_approx(&p)
        );
    }
    Ok(())
}
