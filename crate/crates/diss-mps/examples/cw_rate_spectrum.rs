//! Diagonalize the time-averaged dissipator of the continuously rotated
//! drive into its nine independent jump channels and print the rate
//! spectrum (fractions of the total rate).
//!
//!     cargo run --release --example cw_rate_spectrum

use diss_mps::liouvillian::cw_diagonalize;

fn main() -> diss_mps::Result<()> {
    let jumps = cw_diagonalize(64)?;
    println!("nine effective jump channels of the rotating drive:");
    let mut total = 0.0;
    for j in &jumps {
        println!("  {:<8} rate {:.10}  ({})", j.label, j.rate, nearest_fraction(j.rate));
        total += j.rate;
    }
    println!("total rate: {total:.12}");
    Ok(())
}

fn nearest_fraction(x: f64) -> String {
    for den in [32u32, 16, 8, 64] {
        let num = (x * den as f64).round();
        if (x - num / den as f64).abs() < 1e-9 {
            return format!("{num}/{den}", num = num as u32);
        }
    }
    format!("{x}")
}
