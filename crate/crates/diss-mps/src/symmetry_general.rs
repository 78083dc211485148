//! Symmetry-averaged jump-set design beyond the AKLT case.
//!
//! Given a two-site "bright" subspace (the range of a parent-Hamiltonian
//! bond term) carrying a unitary representation of the protecting symmetry
//! group, this module decomposes the representation into irreducible
//! blocks, computes the minimum number of jump operators whose group
//! averages can cover the whole subspace, and constructs a saturating set.
//! It also carries a two-level (GHZ) worked example where the choice of
//! jump operator decides whether chain connection preserves entanglement,
//! and a dense steady-space report usable as a uniqueness check for small
//! chains built from arbitrary MPS tensors.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c, cr, dagger, eigh, eigh_real, exp_i_hermitian, eye, frobenius, kron, kron_vec,
    max_abs, norm2, null_space_complex, orthonormal_span, outer, psd_rank, CMat, CVec, C64,
};
use crate::many_body::{bonds, embed_two_site, index_of};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = Array2::<f64>::zeros((n, n));
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let (vals, vecs) = eigh_real(&jac);
    let nodes: Vec<f64> = vals.iter().copied().collect();
    let weights: Vec<f64> = (0..n).map(|k| 2.0 * vecs[(0, k)] * vecs[(0, k)]).collect();
    (nodes, weights)
}

/// A unitary representation given as an explicit list of matrices with
/// normalized averaging weights: finite groups carry uniform weights,
/// compact groups a Haar quadrature rule.
#[derive(Debug, Clone)]
pub struct GroupRep {
    pub matrices: Vec<CMat>,
    pub weights: Vec<f64>,
}

fn spin_ops_2j(two_j: usize) -> (CMat, CMat) {
    let dim = two_j + 1;
    let j = two_j as f64 / 2.0;
    let mut jz = CMat::zeros((dim, dim));
    let mut jy = CMat::zeros((dim, dim));
    for k in 0..dim {
        let m = j - k as f64;
        jz[(k, k)] = cr(m);
        // ⟨m+1|J₊|m⟩ couples row k-1 to column k
        if k > 0 {
            let amp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            jy[(k - 1, k)] += c(0.0, -0.5) * amp;
            jy[(k, k - 1)] += c(0.0, 0.5) * amp;
        }
    }
    (jz, jy)
}

/// Euler-angle product quadrature over SU(2): `points` uniform nodes for
/// each of the two axial angles on [0, 4π) and Gauss-Legendre nodes in
/// cos(polar angle). Exact for band-limited functions, which covers every
/// average taken here; `so3_quadrature_agrees_when_doubled` checks this.
fn euler_quadrature(points: usize, beta_points: usize, axial_period: f64) -> Vec<([f64; 3], f64)> {
    let (nodes, weights) = gauss_legendre(beta_points);
    let mut out = Vec::with_capacity(points * points * beta_points);
    for ia in 0..points {
        let alpha = axial_period * ia as f64 / points as f64;
        for (ib, &x) in nodes.iter().enumerate() {
            let beta = x.clamp(-1.0, 1.0).acos();
            for ig in 0..points {
                let gamma = axial_period * ig as f64 / points as f64;
                let w = weights[ib] / 2.0 / (points * points) as f64;
                out.push(([alpha, beta, gamma], w));
            }
        }
    }
    out
}

impl GroupRep {
    pub fn finite(matrices: Vec<CMat>) -> Self {
        let w = 1.0 / matrices.len() as f64;
        let weights = vec![w; matrices.len()];
        Self { matrices, weights }
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// Direct sum of spin representations, `blocks` listing (2j, copies).
    /// Uses the SU(2) quadrature so half-integer spins are welcome.
    pub fn su2_direct_sum(blocks: &[(usize, usize)], points: usize) -> Self {
        let per_spin: Vec<(usize, usize, CMat, CMat)> = blocks
            .iter()
            .map(|&(two_j, copies)| {
                let (jz, jy) = spin_ops_2j(two_j);
                (two_j, copies, jz, jy)
            })
            .collect();
        let total: usize = blocks.iter().map(|&(two_j, k)| (two_j + 1) * k).sum();
        let beta_points = 2 + blocks.iter().map(|&(two_j, _)| two_j + 1).max().unwrap_or(1);
        let quad = euler_quadrature(points, beta_points, 4.0 * std::f64::consts::PI);
        let mut matrices = Vec::with_capacity(quad.len());
        let mut weights = Vec::with_capacity(quad.len());
        for (angles, w) in quad {
            let mut v = CMat::zeros((total, total));
            let mut off = 0;
            for (two_j, copies, jz, jy) in &per_spin {
                let d = two_j + 1;
                let rz_a = exp_i_hermitian(jz, -angles[0]);
                let ry = exp_i_hermitian(jy, -angles[1]);
                let rz_g = exp_i_hermitian(jz, -angles[2]);
                let block = rz_a.dot(&ry).dot(&rz_g);
                for _ in 0..*copies {
                    for i in 0..d {
                        for jcol in 0..d {
                            v[(off + i, off + jcol)] = block[(i, jcol)];
                        }
                    }
                    off += d;
                }
            }
            matrices.push(v);
            weights.push(w);
        }
        Self { matrices, weights }
    }

    /// The two-site spin-1 rotation representation v(g) ⊗ v(g) (SO(3)).
    pub fn so3_two_site_spin1(points: usize) -> Self {
        let (jz, jy) = spin_ops_2j(2);
        let quad = euler_quadrature(points, 8, 2.0 * std::f64::consts::PI);
        let mut matrices = Vec::with_capacity(quad.len());
        let mut weights = Vec::with_capacity(quad.len());
        for (angles, w) in quad {
            let rz_a = exp_i_hermitian(&jz, -angles[0]);
            let ry = exp_i_hermitian(&jy, -angles[1]);
            let rz_g = exp_i_hermitian(&jz, -angles[2]);
            let v = rz_a.dot(&ry).dot(&rz_g);
            matrices.push(kron(&v, &v));
            weights.push(w);
        }
        Self { matrices, weights }
    }

    /// Basis change g ↦ U† V_g U. Handy for scrambling synthetic reps.
    pub fn conjugated(&self, u: &CMat) -> Self {
        let ud = dagger(u);
        let matrices = self.matrices.iter().map(|v| ud.dot(v).dot(u)).collect();
        Self { matrices, weights: self.weights.clone() }
    }

    /// Restriction to an invariant subspace spanned by orthonormal columns.
    pub fn restricted(&self, basis: &[CVec]) -> Self {
        let b = columns_to_matrix(self.dim(), basis);
        let bd = dagger(&b);
        let matrices = self.matrices.iter().map(|v| bd.dot(v).dot(&b)).collect();
        Self { matrices, weights: self.weights.clone() }
    }

    /// Group-average conjugation Σ_g w_g V_g X V_g†, i.e. the orthogonal
    /// projection of X onto the commutant of the representation.
    pub fn commutant_average(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(x.dim());
        for (v, &w) in self.matrices.iter().zip(&self.weights) {
            out = out + v.dot(x).dot(&dagger(v)).mapv(|z| z * cr(w));
        }
        out
    }
}

fn columns_to_matrix(rows: usize, cols: &[CVec]) -> CMat {
    let mut b = CMat::zeros((rows, cols.len()));
    for (j, v) in cols.iter().enumerate() {
        for i in 0..rows {
            b[(i, j)] = v[i];
        }
    }
    b
}

/// Q = Σ_g w_g V_g† |ψ⟩⟨ψ| V_g: the group average deciding which part of
/// the bright subspace a single jump operator with sensor ⟨ψ| can reach.
pub fn average_q(psi: &CVec, rep: &GroupRep) -> CMat {
    let n = rep.dim();
    let mut q = CMat::zeros((n, n));
    for (v, &w) in rep.matrices.iter().zip(&rep.weights) {
        let y = dagger(v).dot(psi);
        q = q + outer(&y, &y).mapv(|z| z * cr(w));
    }
    q
}

/// Orthonormal basis of range(h) for a projector-like Hermitian h.
/// With `strict` set, eigenvalues outside {0, 1} ± 1e-8 are rejected;
/// otherwise the numerical range (eigenvalue > tol) is returned as-is.
pub fn bright_manifold(h: &CMat, strict: bool) -> Result<Vec<CVec>> {
    let (vals, vecs) = eigh(h);
    let scale = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    if strict {
        for &v in vals.iter() {
            if v.abs() > 1e-8 && (v - 1.0).abs() > 1e-8 {
                return Err(Error::NotProjector(v));
            }
        }
    }
    let cut = if strict { 0.5 } else { 1e-8 * scale };
    let mut basis = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v > cut {
            basis.push(vecs.column(k).to_owned());
        }
    }
    Ok(basis)
}

/// One equivalence class of irreducible blocks: `dim` is the irrep
/// dimension, `copies` holds one full-space basis (dim(rep) × dim columns)
/// per copy, gauge-aligned so every copy carries identical block matrices.
#[derive(Debug, Clone)]
pub struct IrrepClass {
    pub dim: usize,
    pub copies: Vec<CMat>,
}

#[derive(Debug, Clone)]
pub struct IrrepDecomposition {
    pub classes: Vec<IrrepClass>,
    pub dim: usize,
}

impl IrrepDecomposition {
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        self.classes.iter().map(|cl| (cl.dim, cl.copies.len())).collect()
    }

    /// Minimum number of jump operators whose group averages can cover the
    /// whole space: max over classes of ⌈copies / dim⌉.
    pub fn k_min(&self) -> usize {
        self.classes
            .iter()
            .map(|cl| cl.copies.len().div_ceil(cl.dim))
            .max()
            .unwrap_or(0)
    }
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut x = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let xd = dagger(&x);
    (x + xd).mapv(|z| z * cr(0.5))
}

fn restricted_block(rep: &GroupRep, basis: &CMat, g: usize) -> CMat {
    dagger(basis).dot(&rep.matrices[g]).dot(basis)
}

/// Decompose a representation into gauge-aligned irreducible blocks.
///
/// A random Hermitian matrix is averaged into the commutant; its
/// eigenspaces are the irreducible invariant subspaces (one per copy,
/// generically). Equivalence of copies is decided by the character inner
/// product, and equivalent copies are rotated into a common gauge with an
/// averaged intertwiner so that all copies in a class carry identical
/// block matrices.
pub fn decompose_rep(rep: &GroupRep, seed: u64) -> Result<IrrepDecomposition> {
    let n = rep.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..4 {
        let x = random_hermitian(n, &mut rng);
        let avg = rep.commutant_average(&x);
        let herm = (&avg + &dagger(&avg)).mapv(|z| z * cr(0.5));
        let (vals, vecs) = eigh(&herm);
        let scale = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);

        // cluster eigenvalues; each cluster should span one irreducible copy
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for k in 0..n {
            match clusters.last_mut() {
                Some(cur) if (vals[k] - vals[*cur.last().unwrap()]).abs() < 1e-6 * scale => {
                    cur.push(k)
                }
                _ => clusters.push(vec![k]),
            }
        }

        let mut copies: Vec<CMat> = Vec::new();
        for cl in &clusters {
            let cols: Vec<CVec> = cl.iter().map(|&k| vecs.column(k).to_owned()).collect();
            let b = columns_to_matrix(n, &cols);
            // invariance check: the projector onto the span must already
            // lie in the commutant; accidental eigenvalue collisions fail
            // this and trigger a retry with a fresh random element
            let p = b.dot(&dagger(&b));
            let p_avg = rep.commutant_average(&p);
            if max_abs(&(&p_avg - &p)) > 1e-7 {
                continue 'attempt;
            }
            copies.push(b);
        }

        // characters decide equivalence: Σ_g w χ_i(g) χ_j(g)* is 1 for
        // equivalent irreducible blocks and 0 for inequivalent ones
        let chars: Vec<Vec<C64>> = copies
            .iter()
            .map(|b| {
                (0..rep.matrices.len())
                    .map(|g| {
                        let r = restricted_block(rep, b, g);
                        (0..r.nrows()).map(|i| r[(i, i)]).sum()
                    })
                    .collect()
            })
            .collect();
        let char_inner = |i: usize, j: usize| -> C64 {
            rep.weights
                .iter()
                .enumerate()
                .map(|(g, &w)| chars[i][g] * chars[j][g].conj() * cr(w))
                .sum()
        };
        for (i, b) in copies.iter().enumerate() {
            let self_norm = char_inner(i, i);
            if (self_norm.re - 1.0).abs() > 1e-6 || self_norm.im.abs() > 1e-6 {
                // reducible cluster (collision) — retry
                let _ = b;
                continue 'attempt;
            }
        }

        let mut classes: Vec<IrrepClass> = Vec::new();
        let mut assigned = vec![false; copies.len()];
        for i in 0..copies.len() {
            if assigned[i] {
                continue;
            }
            assigned[i] = true;
            let d = copies[i].ncols();
            let mut class = IrrepClass { dim: d, copies: vec![copies[i].clone()] };
            for j in i + 1..copies.len() {
                if assigned[j] || copies[j].ncols() != d {
                    continue;
                }
                let ip = char_inner(i, j);
                if (ip.re - 1.0).abs() < 1e-4 && ip.im.abs() < 1e-4 {
                    let aligned = align_copy(rep, &copies[i], &copies[j], &mut rng)?;
                    class.copies.push(aligned);
                    assigned[j] = true;
                } else if ip.norm() > 1e-4 {
                    continue 'attempt; // ambiguous quadrature — retry
                }
            }
            classes.push(class);
        }
        return Ok(IrrepDecomposition { classes, dim: n });
    }
    Err(Error::NoSolution(
        "irrep decomposition did not stabilize after retries".into(),
    ))
}

/// Rotate copy `b_j` so its blocks equal those of the reference copy `b_i`:
/// W = Σ_g w R_i(g) Z R_j(g)† intertwines the two blocks, and for
/// irreducible blocks its polar part U satisfies U R_j U† = R_i, so the
/// returned basis is b_j U†.
fn align_copy(rep: &GroupRep, b_i: &CMat, b_j: &CMat, rng: &mut ChaCha8Rng) -> Result<CMat> {
    let d = b_i.ncols();
    for _ in 0..4 {
        let z = random_hermitian(d, rng);
        let mut w = CMat::zeros((d, d));
        for g in 0..rep.matrices.len() {
            let ri = restricted_block(rep, b_i, g);
            let rj = restricted_block(rep, b_j, g);
            w = w + ri.dot(&z).dot(&dagger(&rj)).mapv(|v| v * cr(rep.weights[g]));
        }
        if frobenius(&w) < 1e-8 {
            continue; // unlucky Z landed near the kernel of the averaging
        }
        // polar part via (W†W)^{-1/2}
        let wtw = dagger(&w).dot(&w);
        let (vals, vecs) = eigh(&wtw);
        if vals[0] < 1e-12 * vals[d - 1].max(1e-300) {
            continue;
        }
        let mut inv_sqrt = CMat::zeros((d, d));
        for k in 0..d {
            let col = vecs.column(k).to_owned();
            inv_sqrt = inv_sqrt + outer(&col, &col).mapv(|v| v * cr(1.0 / vals[k].sqrt()));
        }
        let u = w.dot(&inv_sqrt);
        // verify the gauge: averaged R_i R_j'† must be the identity
        let aligned = b_j.dot(&dagger(&u));
        let mut check = CMat::zeros((d, d));
        for g in 0..rep.matrices.len() {
            let ri = restricted_block(rep, b_i, g);
            let rj = restricted_block(rep, &aligned, g);
            check = check + ri.dot(&dagger(&rj)).mapv(|v| v * cr(rep.weights[g]));
        }
        if max_abs(&(&check - &eye(d))) < 1e-6 {
            return Ok(aligned);
        }
    }
    Err(Error::NoSolution("intertwiner alignment failed".into()))
}

/// A minimum-size set of sensor vectors whose group averages cover the
/// whole decomposed space.
#[derive(Debug, Clone)]
pub struct JumpSetPlan {
    pub k_min: usize,
    pub vectors: Vec<CVec>,
    pub coverage_rank: usize,
}

/// Build k_min sensor vectors saturating the coverage bound: per class the
/// copies are split into groups of at most `dim`, and the μ-th vector takes
/// one distinct orthonormal component from each copy in the μ-th group of
/// every class, which kills all off-diagonal blocks of the group average.
pub fn construct_jump_set(decomp: &IrrepDecomposition, rep: &GroupRep) -> Result<JumpSetPlan> {
    let k_min = decomp.k_min();
    let n = decomp.dim;
    let mut vectors = Vec::with_capacity(k_min);
    for mu in 0..k_min {
        let mut psi = CVec::zeros(n);
        for class in &decomp.classes {
            for (t, copy) in decomp_group(class, mu) {
                let col = copy.column(t).to_owned();
                psi = psi + col;
            }
        }
        let nn = norm2(&psi);
        if nn < 1e-12 {
            return Err(Error::ConstructionFailed { got: 0, want: n });
        }
        vectors.push(psi.mapv(|v| v / cr(nn)));
    }
    let mut q = CMat::zeros((n, n));
    for psi in &vectors {
        q = q + average_q(psi, rep);
    }
    let scale = max_abs(&q).max(1e-300);
    let coverage_rank = psd_rank(&q, 1e-10 * scale * n as f64);
    if coverage_rank != n {
        return Err(Error::ConstructionFailed { got: coverage_rank, want: n });
    }
    Ok(JumpSetPlan { k_min, vectors, coverage_rank })
}

/// Copies and per-copy component indices making up group `mu` of a class.
fn decomp_group(class: &IrrepClass, mu: usize) -> Vec<(usize, &CMat)> {
    class
        .copies
        .chunks(class.dim)
        .nth(mu)
        .map(|chunk| chunk.iter().enumerate().collect())
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// GHZ worked example: a two-level non-injective MPS where the choice of jump
// operator decides whether connection keeps the state in the cat manifold.
// ---------------------------------------------------------------------------

/// The two printed jump choices. Both share the Z₂ partner obtained by
/// conjugating with σx ⊗ σx and both leave span{|0…0⟩, |1…1⟩} dark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzJump {
    /// |00⟩⟨01| — collapses every trajectory with a jump to a product state
    ProductPair,
    /// |00⟩(⟨01| + i⟨10|)/√2 — keeps trajectories inside the cat manifold
    ChiralPair,
}

/// Bond term of the two-level parent Hamiltonian, normalized to a
/// projector: (1 - σz⊗σz)/2, whose range is span{(|01⟩±|10⟩)/√2}.
pub fn ghz_bond_projector() -> CMat {
    let mut h = CMat::zeros((4, 4));
    h[(1, 1)] = cr(1.0);
    h[(2, 2)] = cr(1.0);
    h[(1, 2)] = cr(0.0);
    h
}

/// The Z₂ representation {1, σx⊗σx} on two qubits.
pub fn ghz_two_site_rep() -> GroupRep {
    let mut xx = CMat::zeros((4, 4));
    for k in 0..4 {
        xx[(k, 3 - k)] = cr(1.0);
    }
    GroupRep::finite(vec![eye(4), xx])
}

/// The chosen jump operator together with its Z₂ partner.
pub fn ghz_jump_operators(choice: GhzJump) -> Vec<CMat> {
    let mut cop = CMat::zeros((4, 4));
    match choice {
        GhzJump::ProductPair => {
            cop[(0, 1)] = cr(1.0);
        }
        GhzJump::ChiralPair => {
            let s = 1.0 / 2f64.sqrt();
            cop[(0, 1)] = cr(s);
            cop[(0, 2)] = c(0.0, s);
        }
    }
    let rep = ghz_two_site_rep();
    let xx = rep.matrices[1].clone();
    let partner = dagger(&xx).dot(&cop).dot(&xx);
    vec![cop, partner]
}

#[derive(Debug, Clone, Copy)]
pub enum GhzInit {
    /// each half starts in (|0…0⟩ + |1…1⟩)/√2
    Cat,
    /// both halves aligned to |b…b⟩
    Aligned(u8),
    /// unentangled halves α₀|0…0⟩+α₁|1…1⟩ and β₀|0…0⟩+β₁|1…1⟩
    Pair([C64; 2], [C64; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GhzOutcome {
    /// |b…b⟩
    Product(u8),
    /// (|0…0⟩ + ζ|1…1⟩)/√2 with the snapped phase ζ
    Cat(C64),
    /// anything else (should not occur for these jump sets)
    Other,
}

#[derive(Debug, Clone)]
pub struct GhzTrial {
    pub jumps: usize,
    pub outcome: GhzOutcome,
}

fn ghz_chain_state(n0: usize, coeff: [C64; 2]) -> CVec {
    let dim = 1usize << n0;
    let mut v = CVec::zeros(dim);
    v[0] = coeff[0];
    v[dim - 1] = coeff[1];
    let nn = norm2(&v);
    v.mapv(|z| z / cr(nn))
}

fn ghz_initial_state(n0: usize, init: GhzInit) -> CVec {
    let s = 1.0 / 2f64.sqrt();
    match init {
        GhzInit::Cat => kron_vec(
            &ghz_chain_state(n0, [cr(s), cr(s)]),
            &ghz_chain_state(n0, [cr(s), cr(s)]),
        ),
        GhzInit::Aligned(b) => {
            let coeff = if b == 0 { [cr(1.0), cr(0.0)] } else { [cr(0.0), cr(1.0)] };
            kron_vec(&ghz_chain_state(n0, coeff), &ghz_chain_state(n0, coeff))
        }
        GhzInit::Pair(alpha, beta) => {
            kron_vec(&ghz_chain_state(n0, alpha), &ghz_chain_state(n0, beta))
        }
    }
}

fn classify_ghz(psi: &CVec) -> GhzOutcome {
    let dim = psi.len();
    let a = psi[0];
    let b = psi[dim - 1];
    let bulk: f64 = (1..dim - 1).map(|k| psi[k].norm_sqr()).sum();
    let total = norm2(psi);
    if bulk.sqrt() > 1e-8 * total {
        return GhzOutcome::Other;
    }
    if b.norm() < 1e-8 * total {
        return GhzOutcome::Product(0);
    }
    if a.norm() < 1e-8 * total {
        return GhzOutcome::Product(1);
    }
    let zeta = b / a;
    if (zeta.norm() - 1.0).abs() > 1e-6 {
        return GhzOutcome::Other;
    }
    for cand in [cr(1.0), cr(-1.0), c(0.0, 1.0), c(0.0, -1.0)] {
        if (zeta - cand).norm() < 1e-6 {
            return GhzOutcome::Cat(cand);
        }
    }
    GhzOutcome::Cat(zeta)
}

/// Connection attempts for two length-m halves: the jump pair acts only on
/// the interface bond. Surviving the no-click period projects onto the
/// interface-dark components; a click collapses the interface pair to
/// |00⟩ or |11⟩, after which the pair is discarded and one chain gets the
/// global σx flip as feedback before the next attempt. Each trial runs
/// until a no-click success and reports the jump count with the class of
/// the final state.
///
/// Note the class statement is about this connection dynamics: with the
/// jump pair active on every bond instead, the two mirrored domain-wall
/// branches couple to different bonds after the first jump, so any second
/// jump collapses the superposition regardless of the jump choice.
pub fn ghz_connection_check(
    choice: GhzJump,
    n0: usize,
    init: GhzInit,
    trials: usize,
    seed: u64,
) -> Result<Vec<GhzTrial>> {
    if 2 * n0 > 8 {
        return Err(Error::CapExceeded(format!(
            "{} qubits exceeds the dense limit of 8",
            2 * n0
        )));
    }
    let ops = ghz_jump_operators(choice); // channel k collapses the pair to |kk⟩
    let psi0 = ghz_initial_state(n0, init);

    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let mut m = n0;
        let mut psi = psi0.clone();
        let mut count = 0usize;
        let outcome = loop {
            let n = 2 * m;
            let embedded: Vec<CMat> =
                ops.iter().map(|cop| embed_two_site(cop, n, m - 1, m, 2)).collect();
            let weights: Vec<f64> =
                embedded.iter().map(|cop| norm2(&cop.dot(&psi)).powi(2)).collect();
            // both jump pairs sense an orthonormal basis of the interface
            // span{|01⟩, |10⟩}, so Σ‖cψ‖² is the full bright weight and the
            // no-click decay is uniform on it
            let bright: f64 = weights.iter().sum();
            if rng.gen_range(0.0..1.0) >= bright {
                // survived: project out the bright interface components
                let fin = project_interface_dark(&psi, m);
                let nn = norm2(&fin);
                if nn < 1e-12 {
                    break GhzOutcome::Other;
                }
                break classify_ghz(&fin.mapv(|z| z / cr(nn)));
            }
            // click: pick the channel and collapse
            let pick = rng.gen_range(0.0..bright);
            let chan = if pick < weights[0] { 0usize } else { 1 };
            let jumped = embedded[chan].dot(&psi);
            count += 1;
            if m == 1 {
                break GhzOutcome::Product(chan as u8);
            }
            psi = discard_interface_and_flip_left(&jumped, m, chan as u8);
            let nn = norm2(&psi);
            if nn < 1e-12 {
                break GhzOutcome::Other;
            }
            psi = psi.mapv(|z| z / cr(nn));
            m -= 1;
        };
        out.push(GhzTrial { jumps: count, outcome });
    }
    Ok(out)
}

/// Keep only amplitudes whose interface pair (sites m-1, m of 2m) reads
/// 00 or 11.
fn project_interface_dark(psi: &CVec, m: usize) -> CVec {
    let n = 2 * m;
    let mut out = psi.clone();
    for k in 0..psi.len() {
        let b_lo = (k >> (n - m)) & 1; // site m-1
        let b_hi = (k >> (n - m - 1)) & 1; // site m
        if b_lo != b_hi {
            out[k] = cr(0.0);
        }
    }
    out
}

/// Drop the interface pair (known to be |bb⟩ post-jump) and apply the σx
/// feedback flip to the left chain, returning the 2(m-1)-qubit state.
fn discard_interface_and_flip_left(psi: &CVec, m: usize, b: u8) -> CVec {
    let right = m - 1; // qubits remaining on the right
    let left = m - 1;
    let mut out = CVec::zeros(1usize << (left + right));
    let left_mask = (1usize << left) - 1;
    for kl in 0..(1usize << left) {
        for kr in 0..(1usize << right) {
            let pair = (b as usize) * 3; // 00 or 11 on two qubits
            let src = (((kl << 2) | pair) << right) | kr;
            let flipped = (!kl) & left_mask;
            out[(flipped << right) | kr] = psi[src];
        }
    }
    out
}

/// Probability that the joined chain is already dark (no jump ever fires):
/// the weight of the |0…0⟩ and |1…1⟩ components of the unentangled pair.
pub fn ghz_success_probability(alpha: [C64; 2], beta: [C64; 2]) -> f64 {
    let na: f64 = alpha.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = beta.iter().map(|z| z.norm_sqr()).sum();
    ((alpha[0] * beta[0]).norm_sqr() + (alpha[1] * beta[1]).norm_sqr()) / (na * nb)
}

// ---------------------------------------------------------------------------
// Dense steady-space report: a uniqueness check for small chains with an
// arbitrary local dimension and jump set.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SteadySpaceReport {
    pub n: usize,
    /// dimension of the joint kernel of all Σ c†c terms (pure dark states)
    pub dark_dim: usize,
    /// dimension of the full Liouvillian kernel, when the dense solve fits
    pub kernel_dim: Option<usize>,
    /// kernel vectors exceeding the span of dark-state density matrices,
    /// i.e. evidence of steady states outside the dark manifold
    pub extra_steady: Option<bool>,
}

/// Count dark states and (size permitting) Liouvillian kernel dimension for
/// a chain of `n` sites with local dimension `d`, given pre-embedded jump
/// operators with rates. `dense_cap` bounds the superoperator dimension.
pub fn steady_space_report(
    d: usize,
    n: usize,
    jumps: &[(CMat, f64)],
    dense_cap: usize,
) -> Result<SteadySpaceReport> {
    let dim = d.pow(n as u32);
    if jumps.iter().any(|(cop, _)| cop.nrows() != dim) {
        return Err(Error::Validation(format!(
            "jump operators must be {dim}×{dim} for n={n}, d={d}"
        )));
    }
    let mut m = CMat::zeros((dim, dim));
    for (cop, rate) in jumps {
        m = m + dagger(cop).dot(cop).mapv(|z| z * cr(*rate));
    }
    let (vals, _) = eigh(&m);
    let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    let dark_dim = vals.iter().filter(|&&v| v < 1e-9 * scale).count();

    let sdim = dim * dim;
    if sdim > dense_cap {
        return Ok(SteadySpaceReport { n, dark_dim, kernel_dim: None, extra_steady: None });
    }
    // vec(ρ) row-major: cρc† → (c ⊗ c*) vec(ρ); anticommutator likewise
    let idm = eye(dim);
    let mut l = CMat::zeros((sdim, sdim));
    for (cop, rate) in jumps {
        let cc = dagger(cop).dot(cop);
        let r = cr(*rate);
        l = l + kron(cop, &cop.mapv(|z| z.conj())).mapv(|z| z * r);
        l = l - kron(&cc, &idm).mapv(|z| z * r * cr(0.5));
        l = l - kron(&idm, &cc.mapv(|z| z.conj())).mapv(|z| z * r * cr(0.5));
    }
    let tol = 1e-9 * frobenius(&l).max(1.0);
    let (kernel_dim, _) = null_space_complex(&l, tol);
    Ok(SteadySpaceReport {
        n,
        dark_dim,
        kernel_dim: Some(kernel_dim),
        extra_steady: Some(kernel_dim > dark_dim * dark_dim),
    })
}

/// Steady-space verdicts for a chain built from two-site jump templates on
/// every bond, over a range of sizes. This is the general-MPS hook: feed it
/// the jump set designed for any parent Hamiltonian and read off whether
/// the dark space is the only steady space at each n.
pub fn general_uniqueness_hook(
    d: usize,
    templates: &[CMat],
    periodic: bool,
    ns: &[usize],
    dense_cap: usize,
) -> Result<Vec<SteadySpaceReport>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let embedded: Vec<(CMat, f64)> = templates
            .iter()
            .flat_map(|cop| {
                bonds(n, periodic)
                    .into_iter()
                    .map(|(i, j)| (embed_two_site(cop, n, i, j, d), 1.0))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.push(steady_space_report(d, n, &embedded, dense_cap)?);
    }
    Ok(out)
}

/// Dense state ψ[s₁…s_n] = (A^{s₁}⋯A^{s_n})_{ab} for arbitrary tensors.
pub fn mps_dense_segment(tensors: &[CMat], n: usize, edge: (usize, usize)) -> CVec {
    let d = tensors.len();
    let bd = tensors[0].nrows();
    let dim = d.pow(n as u32);
    let mut psi = CVec::zeros(dim);
    let mut digits = vec![0usize; n];
    for k in 0..dim {
        let mut x = k;
        for slot in digits.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        let mut prod = eye(bd);
        for &s in &digits {
            prod = prod.dot(&tensors[s]);
        }
        psi[index_of(&digits, d)] = prod[(edge.0, edge.1)];
    }
    psi
}

/// A random injective (d, D) MPS whose transfer matrix has maximally mixed
/// fixed points on both sides: each tensor is a weighted Haar-random
/// unitary, so Σ A A† = Σ A†A = 1.
pub fn random_balanced_mps(d: usize, bond_dim: usize, seed: u64) -> Vec<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.3..1.0)).collect();
    let total: f64 = weights.iter().map(|w| w * w).sum();
    for w in &mut weights {
        *w /= total.sqrt();
    }
    (0..d)
        .map(|s| {
            let u = random_unitary(bond_dim, &mut rng);
            u.mapv(|z| z * cr(weights[s]))
        })
        .collect()
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let cols: Vec<CVec> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let u1: f64 = rng.gen_range(1e-12..1.0);
                        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                        let r = (-2.0 * u1.ln()).sqrt();
                        c(r * u2.cos(), r * u2.sin())
                    })
                    .collect()
            })
            .collect();
        let ortho = orthonormal_span(&cols, 1e-8);
        if ortho.len() == n {
            return columns_to_matrix(n, &ortho);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aklt_mps::{self, Boundary};
    use crate::liouvillian::{mp_jump_set, LiouvillianSpec, Protocol};
    use crate::spin_algebra::total_j_projectors;
    use crate::linalg::inner;
    use crate::uniqueness::{analytic_det_periodic, det_certificate_periodic, Family, Verdict};

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> CVec {
        let v: CVec = (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (-2.0 * u1.ln()).sqrt();
                c(r * u2.cos(), r * u2.sin())
            })
            .collect();
        let nn = norm2(&v);
        v.mapv(|z| z / cr(nn))
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(6);
        for k in 0..12usize {
            let quad: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x.powi(k as i32))
                .sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((quad - exact).abs() < 1e-12, "degree {k}: {quad} vs {exact}");
        }
    }

    #[test]
    fn stretched_state_average_is_quintet_projector() {
        // |++⟩ lives entirely in the 5-dim total-spin-2 block, so its
        // average must be that projector divided by the block dimension
        let rep = GroupRep::so3_two_site_spin1(24);
        let mut psi = CVec::zeros(9);
        psi[0] = cr(1.0);
        let q = average_q(&psi, &rep);
        let p2 = total_j_projectors().projector(2).clone();
        let target = p2.mapv(|z| z / cr(5.0));
        assert!(max_abs(&(&q - &target)) < 1e-6);
    }

    #[test]
    fn so3_quadrature_agrees_when_doubled() {
        let rep24 = GroupRep::so3_two_site_spin1(24);
        let rep48 = GroupRep::so3_two_site_spin1(48);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_state(9, &mut rng);
        let q1 = average_q(&psi, &rep24);
        let q2 = average_q(&psi, &rep48);
        assert!(max_abs(&(&q1 - &q2)) < 1e-10);
    }

    #[test]
    fn bright_manifold_examples() {
        let p2 = total_j_projectors().projector(2).clone();
        assert_eq!(bright_manifold(&p2, true).unwrap().len(), 5);

        let ghz = ghz_bond_projector();
        assert_eq!(bright_manifold(&ghz, true).unwrap().len(), 2);

        let zero = CMat::zeros((4, 4));
        assert!(bright_manifold(&zero, true).unwrap().is_empty());

        let stretched = p2.mapv(|z| z * cr(1.7));
        assert!(matches!(
            bright_manifold(&stretched, true),
            Err(Error::NotProjector(_))
        ));
        assert_eq!(bright_manifold(&stretched, false).unwrap().len(), 5);
    }

    #[test]
    fn aklt_bright_space_is_a_single_quintet() {
        let rep = GroupRep::so3_two_site_spin1(24);
        let p2 = total_j_projectors().projector(2).clone();
        let basis = bright_manifold(&p2, true).unwrap();
        let restricted = rep.restricted(&basis);
        let decomp = decompose_rep(&restricted, 5).unwrap();
        assert_eq!(decomp.multiplicities(), vec![(5, 1)]);
        assert_eq!(decomp.k_min(), 1);
        let plan = construct_jump_set(&decomp, &restricted).unwrap();
        assert_eq!(plan.vectors.len(), 1);
        assert_eq!(plan.coverage_rank, 5);
    }

    #[test]
    fn ghz_bright_space_splits_into_two_singlets() {
        let rep = ghz_two_site_rep();
        let basis = bright_manifold(&ghz_bond_projector(), true).unwrap();
        let restricted = rep.restricted(&basis);
        let decomp = decompose_rep(&restricted, 3).unwrap();
        let mut mult = decomp.multiplicities();
        mult.sort();
        assert_eq!(mult, vec![(1, 1), (1, 1)]);
        assert_eq!(decomp.k_min(), 1);
        // the single sensor vector must overlap both parity sectors
        let plan = construct_jump_set(&decomp, &restricted).unwrap();
        assert_eq!(plan.coverage_rank, 2);
        let psi_full: CVec = {
            let b = columns_to_matrix(4, &basis);
            b.dot(&plan.vectors[0])
        };
        let plus = ghz_jump_operators(GhzJump::ProductPair); // |01⟩, |10⟩ weights
        let _ = plus;
        let w01 = psi_full[1] + psi_full[2];
        let w10 = psi_full[1] - psi_full[2];
        assert!(w01.norm() > 1e-3 && w10.norm() > 1e-3);
    }

    #[test]
    fn seven_copies_of_a_triplet_need_three_jumps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let base = GroupRep::su2_direct_sum(&[(2, 7)], 16);
        let u = random_unitary(21, &mut rng);
        let rep = base.conjugated(&u);
        let decomp = decompose_rep(&rep, 7).unwrap();
        assert_eq!(decomp.multiplicities(), vec![(3, 7)]);
        assert_eq!(decomp.k_min(), 3);
        let plan = construct_jump_set(&decomp, &rep).unwrap();
        assert_eq!(plan.vectors.len(), 3);
        assert_eq!(plan.coverage_rank, 21);
    }

    #[test]
    fn single_average_rank_is_bounded_by_squared_irrep_dim() {
        // with 7 copies of a 3-dim irrep a single sensor vector can never
        // reach a rank above 3² = 9
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = GroupRep::su2_direct_sum(&[(2, 7)], 16);
        let u = random_unitary(21, &mut rng);
        let rep = base.conjugated(&u);
        for trial in 0..5 {
            let mut r2 = ChaCha8Rng::seed_from_u64(100 + trial);
            let psi = random_state(21, &mut r2);
            let q = average_q(&psi, &rep);
            let rank = psd_rank(&q, 1e-10 * max_abs(&q) * 21.0);
            assert!(rank <= 9, "rank {rank} exceeds d² = 9");
        }
    }

    fn regular_rep(mul: &[Vec<usize>]) -> GroupRep {
        let n = mul.len();
        let matrices = (0..n)
            .map(|g| {
                let mut m = CMat::zeros((n, n));
                for h in 0..n {
                    m[(mul[g][h], h)] = cr(1.0);
                }
                m
            })
            .collect();
        GroupRep::finite(matrices)
    }

    fn s3_multiplication() -> Vec<Vec<usize>> {
        // permutations of {0,1,2} listed once; table[g][h] = g∘h
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [0, 2, 1],
            [2, 1, 0],
            [1, 0, 2],
        ];
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        (0..6)
            .map(|g| {
                (0..6)
                    .map(|h| {
                        let p = compose(&perms[g], &perms[h]);
                        perms.iter().position(|q| *q == p).unwrap()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn averages_have_no_weight_between_inequivalent_blocks() {
        let z3 = regular_rep(&[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        let s3 = regular_rep(&s3_multiplication());
        let z2 = ghz_two_site_rep();
        let so3 = GroupRep::so3_two_site_spin1(24);
        // the swap σx⊗σx on two qubits is traceless: two trivial copies
        // (|00⟩+|11⟩, |01⟩+|10⟩) and two sign copies
        let cases: Vec<(GroupRep, Vec<(usize, usize)>)> = vec![
            (z2, vec![(1, 2), (1, 2)]),
            (z3, vec![(1, 1), (1, 1), (1, 1)]),
            (s3, vec![(1, 1), (1, 1), (2, 2)]),
            (so3, vec![(1, 1), (3, 1), (5, 1)]),
        ];
        for (idx, (rep, expected)) in cases.into_iter().enumerate() {
            let decomp = decompose_rep(&rep, 40 + idx as u64).unwrap();
            let mut mult = decomp.multiplicities();
            mult.sort();
            assert_eq!(mult, expected, "case {idx}");
            let mut rng = ChaCha8Rng::seed_from_u64(77 + idx as u64);
            let psi = random_state(rep.dim(), &mut rng);
            let q = average_q(&psi, &rep);
            for (i, ci) in decomp.classes.iter().enumerate() {
                for (j, cj) in decomp.classes.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for bi in &ci.copies {
                        for bj in &cj.copies {
                            let block = dagger(bi).dot(&q).dot(bj);
                            assert!(
                                max_abs(&block) < 1e-8,
                                "case {idx}: classes {i},{j} coupled by {}",
                                max_abs(&block)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn randomized_block_suites_saturate_the_bound() {
        use rayon::prelude::*;
        let results: Vec<Result<()>> = (0..8u64)
            .into_par_iter()
            .map(|inst| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + inst);
                let mut blocks: Vec<(usize, usize)> = Vec::new();
                let mut dim = 0usize;
                for two_j in 0..4usize {
                    let copies = rng.gen_range(0..=4usize);
                    if copies > 0 && dim + (two_j + 1) * copies <= 24 {
                        blocks.push((two_j, copies));
                        dim += (two_j + 1) * copies;
                    }
                }
                if blocks.is_empty() {
                    blocks.push((1, 2));
                    dim = 4;
                }
                let base = GroupRep::su2_direct_sum(&blocks, 16);
                let u = random_unitary(dim, &mut rng);
                let rep = base.conjugated(&u);
                let decomp = decompose_rep(&rep, 2000 + inst)?;
                let mut mult = decomp.multiplicities();
                mult.sort();
                let mut want: Vec<(usize, usize)> =
                    blocks.iter().map(|&(two_j, k)| (two_j + 1, k)).collect();
                want.sort();
                assert_eq!(mult, want, "instance {inst}");
                let expect_k = blocks
                    .iter()
                    .map(|&(two_j, k)| k.div_ceil(two_j + 1))
                    .max()
                    .unwrap();
                assert_eq!(decomp.k_min(), expect_k, "instance {inst}");
                let plan = construct_jump_set(&decomp, &rep)?;
                assert_eq!(plan.vectors.len(), expect_k, "instance {inst}");
                assert_eq!(plan.coverage_rank, dim, "instance {inst}");
                Ok(())
            })
            .collect();
        for r in results {
            r.unwrap();
        }
    }

    #[test]
    fn product_jump_collapses_connections_to_product_states() {
        let trials = ghz_connection_check(GhzJump::ProductPair, 3, GhzInit::Cat, 40, 7).unwrap();
        let mut jumped = 0;
        for t in &trials {
            if t.jumps > 0 {
                jumped += 1;
                assert!(
                    matches!(t.outcome, GhzOutcome::Product(_)),
                    "jumpy trial ended in {:?}",
                    t.outcome
                );
            } else {
                // surviving the no-click branch projects onto the cat state
                assert_eq!(t.outcome, GhzOutcome::Cat(cr(1.0)));
            }
        }
        assert!(jumped >= 8, "only {jumped} of 40 trials jumped");
    }

    #[test]
    fn chiral_jump_keeps_connections_in_the_cat_manifold() {
        let trials = ghz_connection_check(GhzJump::ChiralPair, 3, GhzInit::Cat, 40, 13).unwrap();
        let allowed = [cr(1.0), cr(-1.0), c(0.0, 1.0), c(0.0, -1.0)];
        let mut jumped = 0;
        for t in &trials {
            match t.outcome {
                GhzOutcome::Cat(z) => {
                    assert!(allowed.iter().any(|&a| (a - z).norm() < 1e-6), "phase {z}")
                }
                ref other => panic!("trial ended in {other:?}"),
            }
            if t.jumps > 0 {
                jumped += 1;
            }
        }
        assert!(jumped >= 8, "only {jumped} of 40 trials jumped");
    }

    #[test]
    fn aligned_connection_always_succeeds() {
        let trials =
            ghz_connection_check(GhzJump::ProductPair, 2, GhzInit::Aligned(0), 20, 3).unwrap();
        for t in &trials {
            assert_eq!(t.jumps, 0);
            assert_eq!(t.outcome, GhzOutcome::Product(0));
        }
        assert!((ghz_success_probability([cr(1.0), cr(0.0)], [cr(1.0), cr(0.0)]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_edge_success_averages_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples = 20_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let v = random_state(2, &mut rng);
            let w = random_state(2, &mut rng);
            acc += ghz_success_probability([v[0], v[1]], [w[0], w[1]]);
        }
        let mean = acc / samples as f64;
        // Var(p) = 1/12 for Haar edges; allow 4σ
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0f64 / samples as f64).sqrt());
    }

    #[test]
    fn no_click_rate_matches_the_edge_formula() {
        let alpha = [c(0.8, 0.1), c(0.3, -0.4)];
        let beta = [c(0.2, 0.5), c(0.7, 0.0)];
        let p = ghz_success_probability(alpha, beta);
        let trials =
            ghz_connection_check(GhzJump::ChiralPair, 2, GhzInit::Pair(alpha, beta), 600, 17)
                .unwrap();
        let survived = trials.iter().filter(|t| t.jumps == 0).count() as f64 / 600.0;
        let sigma = (p * (1.0 - p) / 600.0).sqrt();
        assert!(
            (survived - p).abs() < 4.0 * sigma + 1e-3,
            "survival {survived} vs formula {p}"
        );
    }

    #[test]
    fn ghz_steady_space_keeps_the_intrinsic_degeneracy() {
        for choice in [GhzJump::ProductPair, GhzJump::ChiralPair] {
            let templates = ghz_jump_operators(choice);
            let reports =
                general_uniqueness_hook(2, &templates, false, &[2, 3, 4], 4096).unwrap();
            for r in &reports {
                assert_eq!(r.dark_dim, 2, "n={}", r.n);
                assert_eq!(r.kernel_dim, Some(4), "n={}", r.n);
                assert_eq!(r.extra_steady, Some(false), "n={}", r.n);
            }
        }
    }

    fn aklt_embedded(n: usize, boundary: Boundary) -> Vec<(CMat, f64)> {
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let spec = LiouvillianSpec::from_templates(
            n,
            boundary,
            &mp_jump_set(5, theta, [0.0, 1.0, 0.0]),
            Protocol::Mp { pulses: 5, theta, axis: [0.0, 1.0, 0.0] },
        );
        spec.embedded_jumps()
    }

    #[test]
    fn aklt_hook_reproduces_the_uniqueness_verdicts() {
        // open chains: the 4 edge states are dark and nothing else is
        // steady, so the superoperator kernel is exactly their 4² span
        for n in [2usize, 3] {
            let embedded = aklt_embedded(n, Boundary::Open(0, 0));
            let report = steady_space_report(3, n, &embedded, 1_000_000).unwrap();
            assert_eq!(report.dark_dim, 4, "open n={n}");
            assert_eq!(report.kernel_dim, Some(16), "open n={n}");
            assert_eq!(report.extra_steady, Some(false), "open n={n}");
        }

        // the 3-site ring is the known exception: the closed-form Gram
        // determinant carries a ((-3)ⁿ + 27)⁶ factor that vanishes exactly
        // at n = 3, and the dense kernel indeed finds a second steady state
        assert!(analytic_det_periodic(3, Family::Mp).abs() < 1e-12);
        let ring3 = steady_space_report(3, 3, &aklt_embedded(3, Boundary::Periodic), 1_000_000)
            .unwrap();
        assert_eq!(ring3.dark_dim, 1);
        assert_eq!(ring3.kernel_dim, Some(2));
        assert_eq!(ring3.extra_steady, Some(true));

        // from n = 4 the certificate says unique and the dark count agrees
        let cert = det_certificate_periodic(4, Family::Mp);
        assert_eq!(cert.verdict, Verdict::Unique);
        let ring4 = steady_space_report(3, 4, &aklt_embedded(4, Boundary::Periodic), 1_000)
            .unwrap();
        assert_eq!(ring4.dark_dim, 1);
        assert_eq!(ring4.kernel_dim, None); // dense solve deliberately capped

        // ground state of the 3-ring is exactly its dark state
        let ground = aklt_mps::ground_basis(3, Boundary::Periodic).unwrap();
        assert_eq!(ground.len(), 1);
        let mut m = CMat::zeros((27, 27));
        for (cop, rate) in &aklt_embedded(3, Boundary::Periodic) {
            m = m + dagger(cop).dot(cop).mapv(|z| z * cr(*rate));
        }
        assert!(norm2(&m.dot(&ground[0])) < 1e-10);
    }

    #[test]
    fn random_injective_mps_with_full_coverage_jumps_is_unique() {
        let tensors = random_balanced_mps(3, 2, 60);
        // two-site ground space span{|A²_{ab}⟩} and its bright complement
        let mut ground2: Vec<CVec> = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                ground2.push(mps_dense_segment(&tensors, 2, (a, b)));
            }
        }
        let gbasis = orthonormal_span(&ground2, 1e-10);
        assert_eq!(gbasis.len(), 4, "injective MPS should have a 4-dim bond kernel");
        let mut h = eye(9);
        for g in &gbasis {
            h = h - outer(g, g);
        }
        let bright = bright_manifold(&h, true).unwrap();
        assert_eq!(bright.len(), 5);
        let target = gbasis[0].clone();
        let templates: Vec<CMat> = bright.iter().map(|b| outer(&target, b)).collect();
        let reports = general_uniqueness_hook(3, &templates, true, &[2, 3], 1_000_000).unwrap();
        for r in &reports {
            assert_eq!(r.dark_dim, 1, "n={}", r.n);
            assert_eq!(r.kernel_dim, Some(1), "n={}", r.n);
        }
        // dark-space count stays 1 out to n=5 where the dense kernel solve
        // no longer fits
        let wide = general_uniqueness_hook(3, &templates, true, &[4, 5], 1_000).unwrap();
        for r in &wide {
            assert_eq!(r.dark_dim, 1, "n={}", r.n);
            assert_eq!(r.kernel_dim, None);
        }
    }

    #[test]
    fn edge_trace_formula_matches_dense_overlaps() {
        // the |tr C|²/(D tr C†C) edge formula presumes maximally mixed
        // transfer fixed points, which the balanced family realizes
        let mut worst = [0.0f64; 2];
        for inst in 0..4u64 {
            let tensors = random_balanced_mps(3, 2, 70 + inst);
            // subleading transfer eigenvalue controls the correction
            let mut t = CMat::zeros((4, 4));
            for a in &tensors {
                t = t + kron(&a.mapv(|z| z.conj()), a);
            }
            let mut mags: Vec<f64> =
                crate::linalg::eigvals_general(&t).iter().map(|z| z.norm()).collect();
            mags.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let eps2 = mags[1] / mags[0];

            let mut rng = ChaCha8Rng::seed_from_u64(500 + inst);
            for (ni, &n) in [2usize, 3].iter().enumerate() {
                let mut segs_left = Vec::new();
                let mut segs_right = Vec::new();
                for e in 0..2 {
                    segs_left.push(mps_dense_segment(&tensors, n, (0, e)));
                    segs_right.push(mps_dense_segment(&tensors, n, (e, 0)));
                }
                let target = {
                    let v = mps_dense_segment(&tensors, 2 * n, (0, 0));
                    let nn = norm2(&v);
                    v.mapv(|z| z / cr(nn))
                };
                for _ in 0..6 {
                    let cmat = random_hermitian(2, &mut rng);
                    let mut psi = CVec::zeros(segs_left[0].len() * segs_right[0].len());
                    for b in 0..2 {
                        for cc in 0..2 {
                            let term = kron_vec(&segs_left[b], &segs_right[cc]);
                            psi = psi + term.mapv(|z| z * cmat[(b, cc)]);
                        }
                    }
                    let nn = norm2(&psi);
                    let psi = psi.mapv(|z| z / cr(nn));
                    let p_dense = inner(&target, &psi).norm_sqr();
                    let tr: C64 = cmat[(0, 0)] + cmat[(1, 1)];
                    let tr2: f64 = cmat.iter().map(|z| z.norm_sqr()).sum();
                    let p_edge = tr.norm_sqr() / (2.0 * tr2);
                    let dev = (p_dense - p_edge).abs() / eps2.powi(n as i32);
                    if dev > worst[ni] {
                        worst[ni] = dev;
                    }
                }
            }
        }
        assert!(
            worst[0] < 10.0 && worst[1] < 10.0,
            "scaled deviations {worst:?} exceed the correction order"
        );
    }
}
