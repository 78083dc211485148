//! Design a minimal jump set for an arbitrary symmetric penalized
//! subspace: decompose the symmetry action on that subspace into
//! irreducible blocks numerically, read off the minimal number of jump
//! operators, and build a saturating set of sensor vectors.
//!
//!     cargo run --release --example jump_set_design

use diss_mps::spin_algebra::total_j_projectors;
use diss_mps::symmetry_general::{
    bright_manifold, construct_jump_set, decompose_rep, GroupRep,
};
use ndarray::Array2;
use num_complex::Complex64;

fn main() -> diss_mps::Result<()> {
    // two-site spin-1 rotation action, penalized subspace = total spin 2
    let rep = GroupRep::so3_two_site_spin1(24);
    let p2 = total_j_projectors().projector(2).clone();
    let basis = bright_manifold(&p2, true)?;
    let restricted = rep.restricted(&basis);
    let decomp = decompose_rep(&restricted, 5)?;
    println!("spin-1 pair, penalized subspace of dimension {}:", basis.len());
    for (dim, copies) in decomp.multiplicities() {
        println!("  irreducible block of dimension {dim} x {copies} copies");
    }
    let plan = construct_jump_set(&decomp, &restricted)?;
    println!(
        "  minimal jump count {}, coverage rank {} (one operator suffices)\n",
        plan.k_min, plan.coverage_rank
    );

    // a scrambled direct sum where several copies of one block force k > 1
    let blocks = [(0usize, 3usize), (2, 2)]; // three scalars + two triplets
    let base = GroupRep::su2_direct_sum(&blocks, 16);
    let dim = base.dim();
    let mut u = Array2::<Complex64>::eye(dim);
    // a fixed permutation-like unitary to hide the block structure
    for k in 0..dim - 1 {
        let (a, b) = ((k * 5) % dim, (k * 5 + 3) % dim);
        let col_a = u.column(a).to_owned();
        let col_b = u.column(b).to_owned();
        for r in 0..dim {
            u[(r, a)] = (col_a[r] + col_b[r]) / Complex64::new(2f64.sqrt(), 0.0);
            u[(r, b)] = (col_a[r] - col_b[r]) / Complex64::new(2f64.sqrt(), 0.0);
        }
    }
    let rep = base.conjugated(&u);
    let decomp = decompose_rep(&rep, 9)?;
    println!("scrambled direct sum (3 scalars + 2 triplets):");
    for (dim, copies) in decomp.multiplicities() {
        println!("  irreducible block of dimension {dim} x {copies} copies");
    }
    let plan = construct_jump_set(&decomp, &rep)?;
    println!(
        "  minimal jump count {} (three scalar copies cannot share one operator), coverage rank {}",
        plan.k_min, plan.coverage_rank
    );
    Ok(())
}
