//! Connect two prepared segments through interface dissipation, tracked
//! entirely on the virtual edge vectors: a fired jump makes the interface
//! edges exactly orthogonal (the next attempt would be hopeless), and a
//! global π-rotation on one segment restores the success probability to
//! its maximum of 1/2.
//!
//!     cargo run --release --example connection_feedback

use diss_mps::connection::{
    apply_feedback, apply_jump_to_edges, dense_joined_state, dense_pair_state,
    success_probability, success_probability_exact, EdgeStatePair,
};
use diss_mps::aklt_mps::aklt_spec;
use diss_mps::linalg::C64;
use ndarray::array;

fn main() -> diss_mps::Result<()> {
    let theta = 2.0 * std::f64::consts::PI / 5.0;
    let axis = [0.0, 1.0, 0.0];

    let mut pair = EdgeStatePair::basis(0, 0, 0, 0, 4, 4);
    pair.alpha = array![C64::new(0.8, 0.1), C64::new(-0.3, 0.4)];
    pair.beta = array![C64::new(0.2, -0.5), C64::new(0.7, 0.2)];
    println!("attempt success probability: {:.6}", success_probability(&pair));
    println!("exact (finite segments):     {:.6}", success_probability_exact(&pair));

    // dense cross-check on 3+3 sites
    let small = EdgeStatePair { m_left: 3, m_right: 3, ..pair.clone() };
    let spec = aklt_spec();
    let psi0 = dense_pair_state(&spec, &small)?;
    let psif = dense_joined_state(&spec, &small)?;
    let n0: f64 = psi0.iter().map(|x| x.norm_sqr()).sum();
    let nf: f64 = psif.iter().map(|x| x.norm_sqr()).sum();
    let amp: C64 = psif.iter().zip(psi0.iter()).map(|(f, i)| f.conj() * i).sum();
    println!(
        "dense 3+3 sites:             {:.6} (edge formula {:.6})",
        amp.norm_sqr() / (n0 * nf),
        success_probability_exact(&small)
    );

    for label in 0..5 {
        let post = apply_jump_to_edges(&pair, label, theta, axis)?;
        let fed = apply_feedback(&post, axis);
        println!(
            "jump label {label}: p after jump {:.3e}, after feedback {:.6}",
            success_probability(&post),
            success_probability(&fed)
        );
    }
    Ok(())
}
