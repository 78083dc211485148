//! Time to build a long chain by recursive pairwise merging: Monte Carlo
//! trees against the closed-form prediction, plus the verified-connection
//! strategy whose preparation time stays polylogarithmic even with 20%
//! photon loss and dark counts.
//!
//!     cargo run --release --example parallel_scaling

use diss_mps::connection::{method1_scaling_curve, monte_carlo_tree, Method1Params, ScalingModel};

fn main() -> diss_mps::Result<()> {
    let model = ScalingModel {
        p: 2.0 / 9.0,
        tau_c: 1.0,
        tau_r: 1.0,
        t0: 0.0,
        n0: 16.0,
    };
    println!("ideal detection (closed form vs Monte Carlo, 200 trees):");
    for levels in [4u32, 6, 8, 10] {
        let trees = 200;
        let mut t = 0.0;
        let mut len = 0.0;
        for s in 0..trees {
            let sample = monte_carlo_tree(&model, levels, 42 + s);
            t += sample.lineage_time;
            len += sample.final_length;
        }
        let (t, len) = (t / trees as f64, len / trees as f64);
        println!(
            "  {:>6.0} sites: simulated T = {:>9.1}, closed form {:>9.1}",
            len,
            t,
            model.time(len)?
        );
    }

    let m1 = Method1Params {
        eta: 0.8, // 20% detection per verification window
        dark_rate: 25.0e-6,
        tau0: 1.0,
        p: 2.0 / 9.0,
    };
    let lengths: Vec<f64> = (5..=20).map(|k| 2f64.powi(k)).collect();
    println!("verified connections, error budget 1e-4:");
    for (n, t, p_keep, fidelity) in method1_scaling_curve(&m1, &model, 1e-4, &lengths)? {
        println!(
            "  n = {n:>9.0}: T = {t:>10.1}, keep probability {p_keep:.4}, fidelity {fidelity:.8}"
        );
    }
    Ok(())
}
