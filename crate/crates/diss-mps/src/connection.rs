//! Probabilistic connection of prepared chain segments through the
//! engineered interface jump, tracked entirely at the level of the
//! virtual edge degrees of freedom, plus the tree-merging time model and
//! the two imperfect-detection strategies.
//!
//! A segment pair is described by four 2-component edge vectors: the
//! outer edges of each chain and the two interface edges α, β. The
//! success probability of a connection attempt (no interface jump fires)
//! is |α·β|²/(2|α|²|β|²) + O(εⁿ) with the *bilinear* dot product. When a
//! jump does fire, both interface edges transform through the rank-one
//! matrix M = Σ_s ⟨+|v|s⟩ A^s, which is nilpotent (traceless with zero
//! determinant), so the post-jump edges are exactly bilinear-orthogonal;
//! a π-feedback rotation on one chain restores p = 1/2.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aklt_mps::{aklt_spec, dense_state, overlap, Boundary, MpsSpec};
use crate::error::{Error, Result};
use crate::linalg::{cr, dagger, kron_vec, CMat, CVec, C64};
use crate::spin_algebra::{rotation_matrix, RotationSpec, KET_P};

pub const BOND_DIM: usize = 2;

/// Two prepared segments about to be connected. `x_left`/`y_right` are
/// the outer edge vectors, `alpha`/`beta` the interface edge vectors.
/// Lengths count physical sites per segment.
#[derive(Clone, Debug)]
pub struct EdgeStatePair {
    pub x_left: CVec,
    pub alpha: CVec,
    pub beta: CVec,
    pub y_right: CVec,
    pub m_left: usize,
    pub m_right: usize,
}

impl EdgeStatePair {
    /// Both segments with definite basis edges.
    pub fn basis(a: usize, b: usize, c: usize, d: usize, m_left: usize, m_right: usize) -> Self {
        let e = |i: usize| {
            let mut v: CVec = Array1::zeros(BOND_DIM);
            v[i] = cr(1.0);
            v
        };
        EdgeStatePair {
            x_left: e(a),
            alpha: e(b),
            beta: e(c),
            y_right: e(d),
            m_left,
            m_right,
        }
    }
}

fn bilinear_dot(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &CVec) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Leading-order connection success probability |α·β|²/(2|α|²|β|²).
pub fn success_probability(pair: &EdgeStatePair) -> f64 {
    bilinear_dot(&pair.alpha, &pair.beta).norm_sqr()
        / (2.0 * sq_norm(&pair.alpha) * sq_norm(&pair.beta))
}

/// Success probability |tr C|²/(D·tr C†C) for a general edge cross
/// matrix C of bond dimension D. For C = αβᵀ this reduces to the
/// two-vector form above.
pub fn general_success_probability(c: &CMat) -> f64 {
    let d = c.nrows() as f64;
    let tr: C64 = (0..c.nrows()).map(|i| c[(i, i)]).sum();
    let tcc: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    tr.norm_sqr() / (d * tcc)
}

/// Exact finite-length success probability |⟨ψ_f|ψ₀⟩|² including all εⁿ
/// corrections, contracted through the closed-form segment overlaps.
/// ψ₀ is the product of the two segments, ψ_f the joined chain with the
/// same outer edges.
pub fn success_probability_exact(pair: &EdgeStatePair) -> f64 {
    let (ml, mr) = (pair.m_left, pair.m_right);
    // ⟨Σ_{a'b'} u_{a'} w_{b'} A^n_{a'b'} | Σ_{ab} s_a t_b A^n_{ab}⟩
    let seg = |n: usize, u: &CVec, w: &CVec, s: &CVec, t: &CVec| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ap in 0..BOND_DIM {
            for bp in 0..BOND_DIM {
                for a in 0..BOND_DIM {
                    for b in 0..BOND_DIM {
                        acc += u[ap].conj() * w[bp].conj() * s[a] * t[b]
                            * overlap(n, (ap, bp), (a, b));
                    }
                }
            }
        }
        acc
    };
    let basis = |i: usize| {
        let mut v: CVec = Array1::zeros(BOND_DIM);
        v[i] = cr(1.0);
        v
    };
    let norm0 = seg(ml, &pair.x_left, &pair.alpha, &pair.x_left, &pair.alpha).re
        * seg(mr, &pair.beta, &pair.y_right, &pair.beta, &pair.y_right).re;
    // |A^{ml+mr}_{ad}⟩ = Σ_e |A^{ml}_{ae}⟩ ⊗ |A^{mr}_{ed}⟩
    let mut amp = C64::new(0.0, 0.0);
    for e in 0..BOND_DIM {
        let be = basis(e);
        amp += seg(ml, &pair.x_left, &be, &pair.x_left, &pair.alpha)
            * seg(mr, &be, &pair.y_right, &pair.beta, &pair.y_right);
    }
    let mut normf = 0.0;
    for e in 0..BOND_DIM {
        for ep in 0..BOND_DIM {
            let (be, bep) = (basis(e), basis(ep));
            normf += (seg(ml, &pair.x_left, &bep, &pair.x_left, &be)
                * seg(mr, &bep, &pair.y_right, &be, &pair.y_right))
            .re;
        }
    }
    amp.norm_sqr() / (norm0 * normf)
}

/// Edge transform matrix M = Σ_s ⟨+|v^k|s⟩ A^s of a fired interface jump,
/// where v = e^{iθ n̂·S} is the single-site pulse rotation.
pub fn jump_transform(pulse_index: usize, theta: f64, axis: [f64; 3]) -> CMat {
    let spin = aklt_spec();
    let v = rotation_matrix(&RotationSpec {
        angle: theta * pulse_index as f64,
        axis,
    });
    let mut m = CMat::zeros((BOND_DIM, BOND_DIM));
    for s in 0..3 {
        m = m + spin.a[s].mapv(|x| x * v[(KET_P, s)]);
    }
    m
}

/// Edge action of the on-site pulse family: when the jump with pulse
/// index k fires on the interface pair, the left interface edge maps
/// through M and the right one through Mᵀ, and each segment loses one
/// site.
pub fn apply_jump_to_edges(
    pair: &EdgeStatePair,
    pulse_index: usize,
    theta: f64,
    axis: [f64; 3],
) -> Result<EdgeStatePair> {
    if pair.m_left < 2 || pair.m_right < 2 {
        return Err(Error::ChainTooShort(format!(
            "segments of {} and {} sites cannot absorb an interface jump",
            pair.m_left, pair.m_right
        )));
    }
    let m = jump_transform(pulse_index, theta, axis);
    Ok(EdgeStatePair {
        x_left: pair.x_left.clone(),
        alpha: m.dot(&pair.alpha),
        beta: m.t().dot(&pair.beta),
        y_right: pair.y_right.clone(),
        m_left: pair.m_left - 1,
        m_right: pair.m_right - 1,
    })
}

/// Edge action u of a global π-rotation U = e^{iπ n̂·S} applied to every
/// site of the left segment. The right-edge vector maps through u†, the
/// outer-edge vector through uᵀ.
pub fn apply_feedback(pair: &EdgeStatePair, axis: [f64; 3]) -> EdgeStatePair {
    let u = edge_rotation(std::f64::consts::PI, axis);
    EdgeStatePair {
        x_left: u.t().dot(&pair.x_left),
        alpha: dagger(&u).dot(&pair.alpha),
        beta: pair.beta.clone(),
        y_right: pair.y_right.clone(),
        m_left: pair.m_left,
        m_right: pair.m_right,
    }
}

/// Spin-1/2 edge representation u = e^{i(aₓ,−a_y,a_z)·σ θ/2} of the
/// physical rotation e^{iθ n̂·S}.
pub fn edge_rotation(angle: f64, axis: [f64; 3]) -> CMat {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let n = [axis[0] / norm, -axis[1] / norm, axis[2] / norm];
    let half = angle / 2.0;
    let (c0, s0) = (half.cos(), half.sin());
    let i = C64::new(0.0, 1.0);
    let mut u = CMat::zeros((2, 2));
    u[(0, 0)] = cr(c0) + i * cr(s0 * n[2]);
    u[(0, 1)] = i * cr(s0 * n[0]) + cr(s0 * n[1]);
    u[(1, 0)] = i * cr(s0 * n[0]) - cr(s0 * n[1]);
    u[(1, 1)] = cr(c0) - i * cr(s0 * n[2]);
    u
}

/// Success probability of a retry after a false-negative discard of k
/// sites per segment: (1/4)(1 − ε^{2k}) with ε = −1/3.
pub fn false_negative_retry_probability(k: usize) -> f64 {
    let eps: f64 = -1.0 / 3.0;
    0.25 * (1.0 - eps.powi(2 * k as i32))
}

/// Dense product state of a segment pair: (Σ x_a α_b |A^{m}_{ab}⟩) ⊗
/// (Σ β_c y_d |A^{m'}_{cd}⟩), unnormalized.
pub fn dense_pair_state(spec: &MpsSpec, pair: &EdgeStatePair) -> Result<CVec> {
    let seg = |m: usize, left: &CVec, right: &CVec| -> Result<CVec> {
        let dim = 3usize.pow(m as u32);
        let mut acc: CVec = Array1::zeros(dim);
        for a in 0..BOND_DIM {
            for b in 0..BOND_DIM {
                let w = left[a] * right[b];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                let s = dense_state(spec, m, Boundary::Open(a, b))?;
                acc = acc + s.amplitudes.mapv(|x| x * w);
            }
        }
        Ok(acc)
    };
    let l = seg(pair.m_left, &pair.x_left, &pair.alpha)?;
    let r = seg(pair.m_right, &pair.beta, &pair.y_right)?;
    Ok(kron_vec(&l, &r))
}

/// Dense joined chain Σ x_a y_d |A^{m+m'}_{ad}⟩, unnormalized.
pub fn dense_joined_state(spec: &MpsSpec, pair: &EdgeStatePair) -> Result<CVec> {
    let n = pair.m_left + pair.m_right;
    let dim = 3usize.pow(n as u32);
    let mut acc: CVec = Array1::zeros(dim);
    for a in 0..BOND_DIM {
        for d in 0..BOND_DIM {
            let w = pair.x_left[a] * pair.y_right[d];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let s = dense_state(spec, n, Boundary::Open(a, d))?;
            acc = acc + s.amplitudes.mapv(|x| x * w);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------
// tree-merging time model

/// Parameters of the binary merging protocol: attempt success
/// probability p, connection attempt time τ_c, reset time τ_r after a
/// failed attempt, segment preparation time t0 and length n0.
#[derive(Clone, Copy, Debug)]
pub struct ScalingModel {
    pub p: f64,
    pub tau_c: f64,
    pub tau_r: f64,
    pub t0: f64,
    pub n0: f64,
}

impl ScalingModel {
    /// Critical length 2(1−p)/p below which merging loses more sites to
    /// discards than it gains.
    pub fn n_crit(&self) -> f64 {
        2.0 * (1.0 - self.p) / self.p
    }

    pub fn mean_discarded_per_connection(&self) -> f64 {
        2.0 * (1.0 - self.p) / self.p
    }

    /// Expected levels to reach length n: log₂[(n−n_c)/(n0−n_c)].
    pub fn levels(&self, n: f64) -> Result<f64> {
        let nc = self.n_crit();
        if self.n0 <= nc {
            return Err(Error::InvalidModel(format!(
                "segment length n0 = {} does not exceed the critical length {nc:.3}",
                self.n0
            )));
        }
        if n < self.n0 {
            return Err(Error::InvalidModel(format!(
                "target length {n} below segment length {}",
                self.n0
            )));
        }
        Ok(((n - nc) / (self.n0 - nc)).log2())
    }

    /// Expected total time T(n) = t0 + [(τ_c + τ_r(1−p))/p]·levels(n).
    pub fn time(&self, n: f64) -> Result<f64> {
        let per_level = (self.tau_c + self.tau_r * (1.0 - self.p)) / self.p;
        Ok(self.t0 + per_level * self.levels(n)?)
    }

    /// Expected chain length after ℓ levels: n_ℓ = 2n_{ℓ−1} − n_c.
    pub fn length_at_level(&self, levels: u32) -> f64 {
        let nc = self.n_crit();
        (self.n0 - nc) * 2f64.powi(levels as i32) + nc
    }
}

#[derive(Clone, Debug)]
pub struct TreeSample {
    /// time along the lineage of the final chain (one connection per level)
    pub lineage_time: f64,
    /// completion time when every level waits for its slowest connection
    pub sync_time: f64,
    pub final_length: f64,
    pub connections: u64,
    pub discarded: u64,
}

/// Simulate one full binary merging tree with 2^levels leaf segments.
pub fn monte_carlo_tree(model: &ScalingModel, levels: u32, seed: u64) -> TreeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = 1usize << levels;
    // (ready time, length)
    let mut layer: Vec<(f64, f64)> = vec![(model.t0, model.n0); leaves];
    let mut lineage_time = model.t0;
    let mut connections = 0u64;
    let mut discarded = 0u64;
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2);
        for pair in layer.chunks(2) {
            let attempts = sample_geometric(model.p, &mut rng);
            let cost = attempts as f64 * model.tau_c + (attempts - 1) as f64 * model.tau_r;
            let lost = 2 * (attempts - 1);
            connections += 1;
            discarded += lost;
            let t_sync = pair[0].0.max(pair[1].0) + cost;
            let len = pair[0].1 + pair[1].1 - lost as f64;
            next.push((t_sync, len));
        }
        // the lineage of the surviving chain crosses one connection per
        // level; follow the first one
        let first_attempts_cost = {
            // recover the cost spent on the first connection of this layer
            // by re-deriving it from the sync time of the first parent
            next[0].0 - layer[0].0.max(layer[1].0)
        };
        lineage_time += first_attempts_cost;
        layer = next;
    }
    TreeSample {
        lineage_time,
        sync_time: layer[0].0,
        final_length: layer[0].1,
        connections,
        discarded,
    }
}

fn sample_geometric(p: f64, rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    1 + ((1.0 - u).ln() / (1.0 - p).ln()).floor() as u64
}

// ---------------------------------------------------------------------
// imperfect detection

/// Detection strategy with a single verification window per attempt:
/// photon loss probability η per resolution window τ0, detector dark-count
/// rate r. The attempt is kept when no click is seen for the whole
/// verification time τ_c.
#[derive(Clone, Copy, Debug)]
pub struct Method1Params {
    pub eta: f64,
    pub dark_rate: f64,
    pub tau0: f64,
    pub p: f64,
}

impl Method1Params {
    fn windows(&self, tau_c: f64) -> f64 {
        tau_c / self.tau0
    }

    pub fn eta_tilde(&self) -> f64 {
        self.eta / (1.0 - self.dark_rate * self.tau0)
    }

    /// (keep probability, conditional fidelity) of one connection with
    /// verification time τ_c.
    pub fn success_and_fidelity(&self, tau_c: f64) -> (f64, f64) {
        let k = self.windows(tau_c);
        let a = (1.0 - self.p) / self.p;
        let quiet = (1.0 - self.dark_rate * self.tau0).powf(k);
        let contamination = a * self.eta_tilde().powf(k);
        let p_keep = self.p * quiet * (1.0 + contamination);
        let fidelity = 1.0 / (1.0 + contamination);
        (p_keep, fidelity)
    }

    /// Verification time (in τ0 windows, rounded up) that pushes the
    /// per-connection error below n0·E/n.
    pub fn verification_windows(&self, n: f64, n0: f64, target_error: f64) -> f64 {
        let a = (1.0 - self.p) / self.p;
        ((a * n / (n0 * target_error)).ln() / (1.0 / self.eta_tilde()).ln()).ceil()
    }

    /// Largest chain length before the dark-count exponent kills the keep
    /// probability: n_max ~ n0·E/a · (1/η̃)^{δ⁻¹·...} expressed through the
    /// exponent ratio δ = ln(1−rτ0)/ln(η̃).
    pub fn delta(&self) -> f64 {
        (1.0 - self.dark_rate * self.tau0).ln() / self.eta_tilde().ln()
    }
}

/// Direct probability-tree evaluation of the Method-1 keep probability
/// and fidelity over an integer number of windows: sums the disjoint
/// branches (success with its first dark count in window j, failure with
/// its first detection in window j) instead of using the closed forms.
pub fn method1_direct_sum(m: &Method1Params, windows: u32) -> (f64, f64) {
    // per-window click probabilities: a dark count in the quiet success
    // branch, any click (η is the total no-click probability given a
    // jump) in the failure branch
    let q_dark = m.dark_rate * m.tau0;
    let mut p_discard_success = 0.0; // success branch, first dark count in window j
    let mut p_discard_fail = 0.0; // failure branch, first click in window j
    let mut quiet = 1.0;
    let mut missed = 1.0;
    for _ in 0..windows {
        p_discard_success += quiet * q_dark;
        quiet *= 1.0 - q_dark;
        p_discard_fail += missed * (1.0 - m.eta);
        missed *= m.eta;
    }
    let kept_true = m.p * (1.0 - p_discard_success);
    let kept_false = (1.0 - m.p) * (1.0 - p_discard_fail);
    let keep = kept_true + kept_false;
    (keep, kept_true / keep)
}

/// T(n) over a range of lengths with the verification time growing
/// logarithmically in n so that the accumulated infidelity stays below E.
pub fn method1_scaling_curve(
    m: &Method1Params,
    base: &ScalingModel,
    target_error: f64,
    lengths: &[f64],
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let mut out = Vec::with_capacity(lengths.len());
    for &n in lengths {
        let w = m.verification_windows(n, base.n0, target_error);
        let tau_c = w * m.tau0;
        let (p_keep, fidelity) = m.success_and_fidelity(tau_c);
        if p_keep <= 0.0 {
            return Err(Error::NoSolution(format!(
                "keep probability vanished at n = {n}"
            )));
        }
        let model = ScalingModel {
            p: p_keep,
            tau_c,
            tau_r: base.tau_r,
            t0: base.t0,
            n0: base.n0,
        };
        out.push((n, model.time(n)?, p_keep, fidelity));
    }
    Ok(out)
}

/// Detection strategy with k verification rounds per connection and a
/// second chance to catch a missed jump in each round (probability p2
/// per round). The round schedule grows as T_s = B·s⁴ so that a missed
/// jump is exponentially unlikely to survive all remaining rounds.
/// `big_c` rescales the loss exponent per unit time and is a free model
/// constant here.
#[derive(Clone, Copy, Debug)]
pub struct Method2Params {
    pub eta: f64,
    pub dark_rate: f64,
    pub big_b: f64,
    pub big_c: f64,
    pub p2: f64,
    pub p: f64,
}

impl Method2Params {
    fn t_s(&self, s: u32) -> f64 {
        self.big_b * (s as f64).powi(4)
    }

    /// (Pr{success and keep}, Pr{fail and keep}, conditional fidelity,
    /// fidelity lower bound 1 − b(1−p2)^{k−1}ξ^{k⁴}).
    pub fn keep_probabilities(&self, k: u32) -> (f64, f64, f64, f64) {
        let b = (1.0 - self.p) / self.p;
        let xi = (self.eta.powf(self.big_c) * self.dark_rate.exp()).powf(self.big_b);
        let tk = self.t_s(k);
        let mut recovered = 0.0;
        for s in 1..k {
            recovered += (1.0 - self.p2).powi(s as i32 - 1)
                * (self.eta.powf(self.big_c) * self.dark_rate.exp()).powf(self.t_s(s));
        }
        let pr_succ = self.p * (-self.dark_rate * tk).exp() * (1.0 + b * self.p2 * recovered);
        let pr_fail = (1.0 - self.p)
            * (1.0 - self.p2).powi(k as i32 - 1)
            * self.eta.powf(self.big_c * tk);
        let keep = pr_succ + pr_fail;
        let fidelity = pr_succ / keep;
        let bound = 1.0 - b * (1.0 - self.p2).powi(k as i32 - 1) * xi.powf((k as f64).powi(4));
        (pr_succ, pr_fail, fidelity, bound)
    }
}

/// Effective temperature assigned to a chain with ground-space population
/// f, through the Gibbs weight over the full spectrum: solves
/// Σ_{k∈ground} e^{−(E_k−E0)/T} / Σ_k e^{−(E_k−E0)/T} = f by bisection.
pub fn effective_temperature(evals: &Array1<f64>, f: f64, degeneracy_tol: f64) -> Result<f64> {
    let e0 = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    let g = evals.iter().filter(|&&e| e - e0 < degeneracy_tol).count() as f64;
    let total = evals.len() as f64;
    if f >= 1.0 || f <= g / total {
        return Err(Error::NoSolution(format!(
            "population {f} outside the thermal range ({}, 1)",
            g / total
        )));
    }
    let pop = |t: f64| -> f64 {
        let z: f64 = evals.iter().map(|&e| (-(e - e0) / t).exp()).sum();
        let zg: f64 = evals
            .iter()
            .filter(|&&e| e - e0 < degeneracy_tol)
            .map(|&e| (-(e - e0) / t).exp())
            .sum();
        zg / z
    };
    let (mut lo, mut hi): (f64, f64) = (1e-6, 1e6);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if pop(mid) > f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
