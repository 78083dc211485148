//! Steady-state uniqueness certificates from the inductive-proof B-matrix:
//! assemble B for open and periodic chains, compute det(B†B), and compare
//! with the analytic closed forms in x = (−3)ⁿ.

use ndarray::Array1;

use crate::aklt_mps::{aklt_spec, dense_state, overlap, Boundary};
use crate::linalg::{cr, dagger, eigh, eye, inner, kron, kron_vec, CMat, CVec};
use crate::liouvillian::{cw_diagonalize, mp_jump_set};
use crate::spin_algebra::D_PHYS;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Pulsed family, ℓ = 5 rotated copies of the bare jump.
    Mp,
    /// Continuous-wave family, ℓ = 9 diagonalized jump operators.
    Cw,
}

impl Family {
    pub fn ell(self) -> usize {
        match self {
            Family::Mp => 5,
            Family::Cw => 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BBoundary {
    Open,
    Periodic,
}

#[derive(Clone, Debug)]
pub struct BMatrix {
    pub boundary: BBoundary,
    pub n: usize,
    pub family: Family,
    /// Open: rows (p,q,μ), 4(ℓ+1)×12 with columns (a,b,s) lexicographic.
    /// Periodic: rows (μ,ν,λ), (ℓ+1)³×4 with columns (a,b).
    pub entries: CMat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct UniquenessCertificate {
    pub n: usize,
    pub family: Family,
    pub boundary: BBoundary,
    pub det_numeric: f64,
    pub det_analytic: f64,
    pub verdict: Verdict,
}

/// The family's jump operators (unit Frobenius norm) followed by the
/// identity: f_0..f_{ℓ−1} = c̄, f_ℓ = 1.
pub fn family_ops(family: Family) -> Vec<CMat> {
    let mut ops: Vec<CMat> = match family {
        Family::Mp => {
            let theta = 2.0 * std::f64::consts::PI / 5.0;
            mp_jump_set(5, theta, [0.0, 1.0, 0.0])
                .into_iter()
                .map(|j| j.matrix)
                .collect()
        }
        Family::Cw => cw_diagonalize(64)
            .expect("CW quadrature convergence")
            .into_iter()
            .map(|j| j.matrix)
            .collect(),
    };
    ops.push(eye(D_PHYS * D_PHYS));
    ops
}

/// |A¹_{cb}⟩ as a 3-vector over the physical index.
fn a1_vec(c_idx: usize, b: usize) -> CVec {
    let spec = aklt_spec();
    Array1::from_iter((0..D_PHYS).map(|s| spec.a[s][(c_idx, b)]))
}

/// Assemble the open-boundary B-matrix for chain size n:
/// B^{abs}_{pqμ} = Σ_{cr} ⟨A^{n−1}_{pr}|A^{n−1}_{ac}⟩ · ⟨A²_{rq}|f_μ(|A¹_{cb}⟩⊗|s⟩).
pub fn assemble_open_b(n: usize, family: Family) -> BMatrix {
    assert!(n >= 2);
    let ops = family_ops(family);
    let ell1 = ops.len();
    let spec = aklt_spec();
    let a2: Vec<Vec<CVec>> = (0..2)
        .map(|r| {
            (0..2)
                .map(|q| dense_state(&spec, 2, Boundary::Open(r, q)).unwrap().amplitudes)
                .collect()
        })
        .collect();
    let mut b = CMat::zeros((4 * ell1, 12));
    for p in 0..2 {
        for q in 0..2 {
            for (mu, f) in ops.iter().enumerate() {
                let row = (p * 2 + q) * ell1 + mu;
                for a in 0..2 {
                    for bb in 0..2 {
                        for s in 0..D_PHYS {
                            let col = (a * 2 + bb) * D_PHYS + s;
                            let mut acc = cr(0.0);
                            for cc in 0..2 {
                                for r in 0..2 {
                                    let ov = overlap(n - 1, (p, r), (a, cc));
                                    if ov.norm_sqr() == 0.0 {
                                        continue;
                                    }
                                    let mut ket: CVec = Array1::zeros(D_PHYS * D_PHYS);
                                    let a1 = a1_vec(cc, bb);
                                    for t in 0..D_PHYS {
                                        ket[t * D_PHYS + s] = a1[t];
                                    }
                                    acc += ov * inner(&a2[r][q], &f.dot(&ket));
                                }
                            }
                            b[(row, col)] = acc;
                        }
                    }
                }
            }
        }
    }
    BMatrix {
        boundary: BBoundary::Open,
        n,
        family,
        entries: b,
    }
}

/// Assemble the periodic-boundary B-matrix:
/// B^{ab}_{μνλ} = Σ_{cdqr} ⟨A^{n−3}_{qr}|A^{n−3}_{cd}⟩ ·
/// ⟨A³_{rq}|(1⊗f_μ)(f_ν⊗1)(1⊗f_λ)(|A²_{db}⟩⊗|A¹_{ac}⟩), three-site space
/// ordered (n−1, n, 1).
pub fn assemble_periodic_b(n: usize, family: Family) -> BMatrix {
    assert!(n >= 4);
    let ops = family_ops(family);
    let ell1 = ops.len();
    let spec = aklt_spec();
    let id3 = eye(D_PHYS);
    let a3: Vec<Vec<CVec>> = (0..2)
        .map(|r| {
            (0..2)
                .map(|q| dense_state(&spec, 3, Boundary::Open(r, q)).unwrap().amplitudes)
                .collect()
        })
        .collect();
    let a2: Vec<Vec<CVec>> = (0..2)
        .map(|d| {
            (0..2)
                .map(|b| dense_state(&spec, 2, Boundary::Open(d, b)).unwrap().amplitudes)
                .collect()
        })
        .collect();
    let right: Vec<CMat> = ops.iter().map(|f| kron(&id3, f)).collect();
    let mid: Vec<CMat> = ops.iter().map(|f| kron(f, &id3)).collect();
    let mut b = CMat::zeros((ell1 * ell1 * ell1, 4));
    for mu in 0..ell1 {
        for nu in 0..ell1 {
            for la in 0..ell1 {
                let row = (mu * ell1 + nu) * ell1 + la;
                let op = right[mu].dot(&mid[nu]).dot(&right[la]);
                for a in 0..2 {
                    for bb in 0..2 {
                        let col = a * 2 + bb;
                        let mut acc = cr(0.0);
                        for cc in 0..2 {
                            for d in 0..2 {
                                for q in 0..2 {
                                    for r in 0..2 {
                                        let ov = overlap(n - 3, (q, r), (cc, d));
                                        if ov.norm_sqr() == 0.0 {
                                            continue;
                                        }
                                        let ket = kron_vec(&a2[d][bb], &a1_vec(a, cc));
                                        acc += ov * inner(&a3[r][q], &op.dot(&ket));
                                    }
                                }
                            }
                        }
                        b[(row, col)] = acc;
                    }
                }
            }
        }
    }
    BMatrix {
        boundary: BBoundary::Periodic,
        n,
        family,
        entries: b,
    }
}

/// det(B†B) together with the smallest eigenvalue of B†B.
pub fn gram_det(b: &BMatrix) -> (f64, f64) {
    let g = dagger(&b.entries).dot(&b.entries);
    let (vals, _) = eigh(&g);
    let det = vals.iter().product();
    (det, vals[0])
}

pub fn analytic_det_open(n: usize, family: Family) -> f64 {
    let x = (-3.0f64).powi(n as i32);
    match family {
        Family::Mp => {
            5.0f64.powi(8) * (x + 3.0).powi(6) * (x - 1.0).powi(2) * (3.0 * x + 1.0).powi(6)
                * (x * x + 27.0).powi(2)
                * (x * x - 6.0 * x + 45.0).powi(3)
                / (2.0f64.powi(40) * 9.0f64.powi(13) * x.powi(24))
        }
        Family::Cw => {
            13.0 * (x + 3.0).powi(6) * (x - 1.0).powi(2) * (3.0 * x + 1.0).powi(6)
                * (5.0 * x * x - 6.0 * x + 153.0).powi(2)
                * (13.0 * x * x - 66.0 * x + 549.0)
                * (65.0 * x * x - 342.0 * x + 2781.0).powi(2)
                / (2.0f64.powi(20) * 7.0f64.powi(4) * 9.0f64.powi(17) * x.powi(24))
        }
    }
}

pub fn analytic_det_periodic(n: usize, family: Family) -> f64 {
    let x = (-3.0f64).powi(n as i32);
    match family {
        Family::Mp => {
            5.0f64.powi(9) * 7.0f64.powi(3) * (x + 3.0).powi(2) * (x + 27.0).powi(6)
                / (2.0f64.powi(33) * 3.0f64.powi(15) * x.powi(8))
        }
        Family::Cw => {
            5.0 * 283.0f64.powi(2) * (x + 3.0).powi(2) * (x + 27.0).powi(6)
                / (2.0f64.powi(2) * 7.0f64.powi(5) * 3.0f64.powi(17) * x.powi(8))
        }
    }
}

fn certify(b: &BMatrix, analytic: f64) -> UniquenessCertificate {
    let (det, min_eig) = gram_det(b);
    let verdict = if det > 1e-20 && min_eig > 1e-12 {
        Verdict::Unique
    } else {
        Verdict::Degenerate
    };
    UniquenessCertificate {
        n: b.n,
        family: b.family,
        boundary: b.boundary,
        det_numeric: det,
        det_analytic: analytic,
        verdict,
    }
}

pub fn det_certificate_open(n: usize, family: Family) -> UniquenessCertificate {
    certify(&assemble_open_b(n, family), analytic_det_open(n, family))
}

pub fn det_certificate_periodic(n: usize, family: Family) -> UniquenessCertificate {
    certify(
        &assemble_periodic_b(n, family),
        analytic_det_periodic(n, family),
    )
}

/// Brute-force open-boundary B entry on the dense (n+1)-site space:
/// ⟨A^{n+1}_{pq}| f^{(n,n+1)} (|A^n_{ab}⟩⊗|s⟩).
pub fn dense_open_b_oracle(n: usize, family: Family) -> CMat {
    let ops = family_ops(family);
    let ell1 = ops.len();
    let spec = aklt_spec();
    let mut b = CMat::zeros((4 * ell1, 12));
    let bra: Vec<Vec<CVec>> = (0..2)
        .map(|p| {
            (0..2)
                .map(|q| dense_state(&spec, n + 1, Boundary::Open(p, q)).unwrap().amplitudes)
                .collect()
        })
        .collect();
    for a in 0..2 {
        for bb in 0..2 {
            let an = dense_state(&spec, n, Boundary::Open(a, bb)).unwrap().amplitudes;
            for s in 0..D_PHYS {
                let col = (a * 2 + bb) * D_PHYS + s;
                let mut es: CVec = Array1::zeros(D_PHYS);
                es[s] = cr(1.0);
                let ket = kron_vec(&an, &es);
                for (mu, f) in ops.iter().enumerate() {
                    let hit = crate::many_body::apply_two_site(f, &ket, n + 1, n - 1, n, D_PHYS);
                    for p in 0..2 {
                        for q in 0..2 {
                            let row = (p * 2 + q) * ell1 + mu;
                            b[(row, col)] = inner(&bra[p][q], &hit);
                        }
                    }
                }
            }
        }
    }
    b
}

/// Brute-force periodic B entry on the dense n-site space:
/// ⟨A^n| f_μ^{(n,1)} f_ν^{(n−1,n)} f_λ^{(n,1)} |A^n_{ab}⟩.
pub fn dense_periodic_b_oracle(n: usize, family: Family) -> CMat {
    let ops = family_ops(family);
    let ell1 = ops.len();
    let spec = aklt_spec();
    let bra = dense_state(&spec, n, Boundary::Periodic).unwrap().amplitudes;
    let kets: Vec<CVec> = (0..4)
        .map(|col| {
            dense_state(&spec, n, Boundary::Open(col / 2, col % 2))
                .unwrap()
                .amplitudes
        })
        .collect();
    let mut b = CMat::zeros((ell1 * ell1 * ell1, 4));
    for (col, ket) in kets.iter().enumerate() {
        // cache f_λ^{(n,1)} |ket⟩ then f_ν f_μ applications
        for la in 0..ell1 {
            let after_la = crate::many_body::apply_two_site(&ops[la], ket, n, n - 1, 0, D_PHYS);
            for nu in 0..ell1 {
                let after_nu =
                    crate::many_body::apply_two_site(&ops[nu], &after_la, n, n - 2, n - 1, D_PHYS);
                for mu in 0..ell1 {
                    let after_mu =
                        crate::many_body::apply_two_site(&ops[mu], &after_nu, n, n - 1, 0, D_PHYS);
                    let row = (mu * ell1 + nu) * ell1 + la;
                    b[(row, col)] = inner(&bra, &after_mu);
                }
            }
        }
    }
    b
}
