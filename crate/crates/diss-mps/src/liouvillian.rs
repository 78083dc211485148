//! Engineered dissipation: the bare two-site jump, its pulse-rotated
//! family, the time-averaged continuous-wave family, edge pinning jumps,
//! and dense superoperator assembly.

use ndarray::{Array1, Array2};

use crate::aklt_mps::Boundary;
use crate::error::{Error, Result};
use crate::linalg::{cr, dagger, eigh, eye, kron, CMat, CVec, C64, I};
use crate::linalg::exp_i_hermitian;
use crate::many_body::{bonds, embed_single_site, embed_two_site};
use crate::spin_algebra::{build_spin1_ops, KET_0, KET_M, KET_P, D_PHYS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteTag {
    /// Acts on the bond (i, i+1) (or the wrap bond for periodic chains).
    Bond(usize),
    /// Template: to be expanded over every bond of a chain.
    EveryBond,
    LeftEdge,
    RightEdge,
}

/// A Lindblad jump operator: a local matrix (9×9 on a bond, 3×3 on an
/// edge), its rate, and where it acts.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub matrix: CMat,
    pub rate: f64,
    pub site: SiteTag,
    pub label: String,
}

#[derive(Clone, Debug)]
pub enum Protocol {
    /// Pulsed rotations: ℓ pulses of angle θ about `axis`.
    Mp { pulses: usize, theta: f64, axis: [f64; 3] },
    /// Continuous rotation at frequency ω about y.
    Cw { omega: f64 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct LiouvillianSpec {
    pub n: usize,
    pub boundary: Boundary,
    /// Jump operators with concrete site tags (templates expanded).
    pub jumps: Vec<JumpOperator>,
    pub hamiltonian: Option<CMat>,
    pub protocol: Protocol,
}

impl LiouvillianSpec {
    /// Expand per-bond templates over all bonds of an n-site chain and
    /// keep edge-tagged operators as they are.
    pub fn from_templates(
        n: usize,
        boundary: Boundary,
        templates: &[JumpOperator],
        protocol: Protocol,
    ) -> Self {
        let periodic = matches!(boundary, Boundary::Periodic);
        let mut jumps = Vec::new();
        for t in templates {
            match t.site {
                SiteTag::EveryBond => {
                    for (k, _) in bonds(n, periodic).iter().enumerate() {
                        let mut j = t.clone();
                        j.site = SiteTag::Bond(k);
                        jumps.push(j);
                    }
                }
                _ => jumps.push(t.clone()),
            }
        }
        LiouvillianSpec {
            n,
            boundary,
            jumps,
            hamiltonian: None,
            protocol,
        }
    }

    pub fn bond_sites(&self, k: usize) -> (usize, usize) {
        let periodic = matches!(self.boundary, Boundary::Periodic);
        bonds(self.n, periodic)[k]
    }

    /// Each jump embedded into the full dⁿ space.
    pub fn embedded_jumps(&self) -> Vec<(CMat, f64)> {
        self.jumps
            .iter()
            .map(|j| {
                let m = match j.site {
                    SiteTag::Bond(k) => {
                        let (a, b) = self.bond_sites(k);
                        embed_two_site(&j.matrix, self.n, a, b, D_PHYS)
                    }
                    SiteTag::LeftEdge => embed_single_site(&j.matrix, self.n, 0, D_PHYS),
                    SiteTag::RightEdge => {
                        embed_single_site(&j.matrix, self.n, self.n - 1, D_PHYS)
                    }
                    SiteTag::EveryBond => panic!("template jump in an expanded spec"),
                };
                (m, j.rate)
            })
            .collect()
    }

    /// Embedded jumps as real matrices; errors if any jump has an
    /// imaginary part (the pulsed and averaged families here are all real).
    pub fn embedded_jumps_real(&self) -> crate::error::Result<Vec<(ndarray::Array2<f64>, f64)>> {
        self.embedded_jumps()
            .into_iter()
            .map(|(m, rate)| {
                let max_im = m.iter().map(|x| x.im.abs()).fold(0.0f64, f64::max);
                if max_im > 1e-12 {
                    return Err(crate::error::Error::InvalidModel(format!(
                        "jump has imaginary entries up to {max_im}; real fast path unavailable"
                    )));
                }
                Ok((m.mapv(|x| x.re), rate))
            })
            .collect()
    }
}

/// The bare engineered jump |00⟩⟨++| on a bond, rate Γ = 1.
pub fn bare_jump() -> JumpOperator {
    let dim = D_PHYS * D_PHYS;
    let mut m = CMat::zeros((dim, dim));
    m[(KET_0 * D_PHYS + KET_0, KET_P * D_PHYS + KET_P)] = cr(1.0);
    JumpOperator {
        matrix: m,
        rate: 1.0,
        site: SiteTag::EveryBond,
        label: "bare".into(),
    }
}

fn two_site_rotation(theta: f64, axis: [f64; 3]) -> CMat {
    let ops = build_spin1_ops();
    let v = exp_i_hermitian(&ops.along(axis), theta);
    kron(&v, &v)
}

/// Pulse-rotated jump family c̄_α = (V†)^α c V^α, α = 0..ℓ−1, each with
/// rate Γ/ℓ.
pub fn mp_jump_set(pulses: usize, theta: f64, axis: [f64; 3]) -> Vec<JumpOperator> {
    assert!(pulses >= 1);
    let v = two_site_rotation(theta, axis);
    let vd = dagger(&v);
    let c0 = bare_jump().matrix;
    let mut out = Vec::with_capacity(pulses);
    let mut left = eye(D_PHYS * D_PHYS);
    let mut right = eye(D_PHYS * D_PHYS);
    for alpha in 0..pulses {
        out.push(JumpOperator {
            matrix: left.dot(&c0).dot(&right),
            rate: 1.0 / pulses as f64,
            site: SiteTag::EveryBond,
            label: format!("mp[{alpha}]"),
        });
        left = left.dot(&vd);
        right = v.dot(&right);
    }
    out
}

/// Row-major vec of a matrix.
pub fn vec_rm(m: &CMat) -> CVec {
    let (r, cdim) = m.dim();
    Array1::from_iter(m.iter().cloned()).into_shape(r * cdim).unwrap()
}

/// Inverse of [`vec_rm`] for square matrices.
pub fn unvec_rm(v: &CVec, dim: usize) -> CMat {
    Array2::from_shape_vec((dim, dim), v.to_vec()).unwrap()
}

fn cw_superoperator(points: usize) -> CMat {
    let ops = build_spin1_ops();
    let c0 = bare_jump().matrix;
    let dim = D_PHYS * D_PHYS;
    let mut p = CMat::zeros((dim * dim, dim * dim));
    for k in 0..points {
        let phi = 2.0 * std::f64::consts::PI * (k as f64) / (points as f64);
        let v1 = exp_i_hermitian(&ops.sy, phi);
        let v = kron(&v1, &v1);
        let cphi = dagger(&v).dot(&c0).dot(&v);
        let vk = vec_rm(&cphi);
        for i in 0..dim * dim {
            if vk[i].norm_sqr() < 1e-28 {
                continue;
            }
            for j in 0..dim * dim {
                p[(i, j)] += vk[i] * vk[j].conj() / cr(points as f64);
            }
        }
    }
    p
}

fn cw_rates(p: &CMat) -> Vec<f64> {
    let (vals, _) = eigh(p);
    let mut rates: Vec<f64> = vals.iter().filter(|&&v| v > 1e-12).cloned().collect();
    rates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    rates
}

/// Time-averaged continuous-wave jump family: diagonalize the
/// angle-averaged superoperator avg_φ vec(c(φ))vec(c(φ))† and return one
/// jump operator per nonzero eigenvalue, rate = eigenvalue, operator of
/// unit Frobenius norm.
///
/// Degenerate rate blocks are resolved by simultaneously diagonalizing the
/// y-rotation charge K = J_y⊗1 − 1⊗J_yᵀ, which commutes with the average;
/// phases are fixed by making the first sizable entry real positive.
pub fn cw_diagonalize(points: usize) -> Result<Vec<JumpOperator>> {
    assert!(points >= 64);
    let mut pts = points;
    let mut p = cw_superoperator(pts);
    loop {
        let p2 = cw_superoperator(pts * 2);
        let r1 = cw_rates(&p);
        let r2 = cw_rates(&p2);
        let shift = r1
            .iter()
            .zip(r2.iter())
            .map(|(a, b)| (a - b).abs())
            .fold((r1.len() as isize - r2.len() as isize).unsigned_abs() as f64, f64::max);
        if shift <= 1e-10 {
            p = p2;
            break;
        }
        if pts >= 1 << 16 {
            return Err(Error::QuadratureTooCoarse(shift));
        }
        pts *= 2;
        p = p2;
    }

    let dim = D_PHYS * D_PHYS;
    let (vals, vecs) = eigh(&p);
    // y-rotation charge on the vectorized two-site operator space
    let ops = build_spin1_ops();
    let jy = kron(&ops.sy, &eye(D_PHYS)) + kron(&eye(D_PHYS), &ops.sy);
    let charge = kron(&jy, &eye(dim)) - kron(&eye(dim), &jy.t().to_owned());

    // group indices of nonzero eigenvalues into degenerate blocks
    let mut keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-12).collect();
    keep.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let mut out = Vec::new();
    let mut i = 0;
    while i < keep.len() {
        let mut j = i + 1;
        while j < keep.len() && (vals[keep[j]] - vals[keep[i]]).abs() < 1e-9 {
            j += 1;
        }
        let block: Vec<CVec> = keep[i..j].iter().map(|&k| vecs.column(k).to_owned()).collect();
        let resolved = if block.len() == 1 {
            block
        } else {
            // diagonalize the charge restricted to the block
            let b = block.len();
            let mut kr = CMat::zeros((b, b));
            for (r, vr) in block.iter().enumerate() {
                let kv = charge.dot(vr);
                for (s, vs) in block.iter().enumerate() {
                    kr[(s, r)] = crate::linalg::inner(vs, &kv);
                }
            }
            let (_, w) = eigh(&kr);
            (0..b)
                .map(|col| {
                    let mut acc: CVec = Array1::zeros(dim * dim);
                    for (r, vr) in block.iter().enumerate() {
                        acc = acc + vr.mapv(|x| x * w[(r, col)]);
                    }
                    acc
                })
                .collect()
        };
        for (off, v) in resolved.into_iter().enumerate() {
            // phase convention: first sizable entry real positive
            let lead = v.iter().find(|x| x.norm() > 1e-8).cloned().unwrap();
            let phase = lead / cr(lead.norm());
            let fixed = v.mapv(|x| x / phase);
            out.push(JumpOperator {
                matrix: unvec_rm(&fixed, dim),
                rate: vals[keep[i + off]],
                site: SiteTag::EveryBond,
                label: format!("cw[{}]", out.len()),
            });
        }
        i = j;
    }
    Ok(out)
}

/// Single-site pinning jumps c_L = |0⟩⟨−| on the first site and
/// c_R = |0⟩⟨+| on the last, each with rate Γ = 1.
pub fn edge_pinning_jumps() -> [JumpOperator; 2] {
    let mut cl = CMat::zeros((D_PHYS, D_PHYS));
    cl[(KET_0, KET_M)] = cr(1.0);
    let mut crj = CMat::zeros((D_PHYS, D_PHYS));
    crj[(KET_0, KET_P)] = cr(1.0);
    [
        JumpOperator {
            matrix: cl,
            rate: 1.0,
            site: SiteTag::LeftEdge,
            label: "edge-left".into(),
        },
        JumpOperator {
            matrix: crj,
            rate: 1.0,
            site: SiteTag::RightEdge,
            label: "edge-right".into(),
        },
    ]
}

/// acc += scale · (a ⊗ b), without materializing the Kronecker product.
fn add_kron_scaled(acc: &mut CMat, a: &CMat, b: &CMat, scale: C64) {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    for i1 in 0..ra {
        for j1 in 0..ca {
            let v = a[(i1, j1)] * scale;
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..rb {
                for j2 in 0..cb {
                    let w = b[(i2, j2)];
                    if w.norm_sqr() != 0.0 {
                        acc[(i1 * rb + i2, j1 * cb + j2)] += v * w;
                    }
                }
            }
        }
    }
}

/// Effective non-Hermitian Hamiltonian H − (i/2) Σ Γ_μ c_μ†c_μ on the full
/// chain space.
pub fn assemble_h_eff(spec: &LiouvillianSpec, cap: usize) -> Result<CMat> {
    let dim = D_PHYS.pow(spec.n as u32);
    if dim > cap {
        return Err(Error::CapExceeded(format!(
            "chain dimension {dim} exceeds cap {cap}"
        )));
    }
    let mut h = match &spec.hamiltonian {
        Some(m) => m.clone(),
        None => CMat::zeros((dim, dim)),
    };
    for (m, rate) in spec.embedded_jumps() {
        let cc = dagger(&m).dot(&m);
        h = h + cc.mapv(|x| x * (-I) * cr(rate / 2.0));
    }
    Ok(h)
}

/// Dense Lindblad superoperator on vec(ρ) (row-major): ρ̇ = −i[H,ρ] +
/// Σ Γ_μ (c ρ c† − ½{c†c, ρ}).
pub fn assemble_superoperator(spec: &LiouvillianSpec, cap: usize) -> Result<CMat> {
    let dim = D_PHYS.pow(spec.n as u32);
    if dim * dim > cap * cap {
        return Err(Error::CapExceeded(format!(
            "superoperator dimension {} exceeds cap {}",
            dim * dim,
            cap * cap
        )));
    }
    let h_eff = assemble_h_eff(spec, cap)?;
    let id = eye(dim);
    let mut l = CMat::zeros((dim * dim, dim * dim));
    // −i H_eff ρ + i ρ H_eff†
    add_kron_scaled(&mut l, &h_eff, &id, -I);
    add_kron_scaled(&mut l, &id, &h_eff.mapv(|x| x.conj()), I);
    for (m, rate) in spec.embedded_jumps() {
        let mc = m.mapv(|x| x.conj());
        add_kron_scaled(&mut l, &m, &mc, cr(rate));
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aklt_mps::{dense_state, aklt_spec, Boundary};
    use crate::linalg::{c, max_abs, norm2, psd_rank};
    use crate::spin_algebra::total_j_projectors;

    #[test]
    fn bare_jump_defining_action() {
        let cj = bare_jump();
        let mut pp: CVec = Array1::zeros(9);
        pp[KET_P * 3 + KET_P] = cr(1.0);
        let hit = cj.matrix.dot(&pp);
        let mut want: CVec = Array1::zeros(9);
        want[KET_0 * 3 + KET_0] = cr(1.0);
        assert!(norm2(&(&hit - &want)) < 1e-14);

        // two-site singlet is orthogonal to |++⟩
        let mut singlet: CVec = Array1::zeros(9);
        let s3 = 1.0 / 3.0f64.sqrt();
        singlet[KET_P * 3 + KET_M] = cr(s3);
        singlet[KET_M * 3 + KET_P] = cr(s3);
        singlet[KET_0 * 3 + KET_0] = cr(-s3);
        assert!(norm2(&cj.matrix.dot(&singlet)) < 1e-14);

        // c†c lies inside the J=2 sector
        let p2 = total_j_projectors().p2;
        let cc = dagger(&cj.matrix).dot(&cj.matrix);
        let proj = p2.dot(&cc).dot(&p2);
        assert!(max_abs(&(&proj - &cc)) < 1e-12);
    }

    #[test]
    fn mp_set_covers_j2_manifold() {
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let set = mp_jump_set(5, theta, [0.0, 1.0, 0.0]);
        assert_eq!(set.len(), 5);
        assert!(max_abs(&(&set[0].matrix - &bare_jump().matrix)) < 1e-14);
        let mut acc = CMat::zeros((9, 9));
        for j in &set {
            acc = acc + dagger(&j.matrix).dot(&j.matrix).mapv(|x| x * cr(j.rate));
        }
        // range(Σ c̄†c̄) is the full five-dimensional J=2 manifold
        assert_eq!(psd_rank(&acc, 1e-10), 5);
        let p2 = total_j_projectors().p2;
        assert!(max_abs(&(&p2.dot(&acc).dot(&p2) - &acc)) < 1e-12);

        let single = mp_jump_set(1, theta, [0.0, 1.0, 0.0]);
        assert_eq!(single.len(), 1);
        assert!(max_abs(&(&single[0].matrix - &bare_jump().matrix)) < 1e-14);
        assert!((single[0].rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cw_rates_match_printed_multiset() {
        let jumps = cw_diagonalize(64).unwrap();
        let want = [
            7.0 / 32.0,
            3.0 / 16.0,
            3.0 / 16.0,
            1.0 / 8.0,
            1.0 / 8.0,
            1.0 / 16.0,
            1.0 / 16.0,
            1.0 / 64.0,
            1.0 / 64.0,
        ];
        assert_eq!(jumps.len(), 9);
        for (j, w) in jumps.iter().zip(want.iter()) {
            assert!(
                (j.rate - w).abs() < 1e-9,
                "rate {} expected {}",
                j.rate,
                w
            );
            let fro = j.matrix.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!((fro - 1.0).abs() < 1e-10);
        }
        let total: f64 = jumps.iter().map(|j| j.rate).sum();
        assert!((total - 1.0).abs() < 1e-10);

        // CW set also covers the full J=2 manifold
        let mut acc = CMat::zeros((9, 9));
        for j in &jumps {
            acc = acc + dagger(&j.matrix).dot(&j.matrix).mapv(|x| x * cr(j.rate));
        }
        assert_eq!(psd_rank(&acc, 1e-10), 5);
    }

    #[test]
    fn cw_dissipator_reconstructs_average() {
        // Σ_β Λ_β vec(c̄_β)vec(c̄_β)† must reproduce the averaged
        // superoperator exactly.
        let p = cw_superoperator(128);
        let jumps = cw_diagonalize(64).unwrap();
        let mut rec = CMat::zeros((81, 81));
        for j in &jumps {
            let v = vec_rm(&j.matrix);
            for i in 0..81 {
                for k in 0..81 {
                    rec[(i, k)] += v[i] * v[k].conj() * cr(j.rate);
                }
            }
        }
        assert!(max_abs(&(&rec - &p)) < 1e-9);
    }

    #[test]
    fn cw_determinism_and_phase_convention() {
        let a = cw_diagonalize(64).unwrap();
        let b = cw_diagonalize(64).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!(max_abs(&(&x.matrix - &y.matrix)) < 1e-14);
            let lead = x.matrix.iter().find(|v| v.norm() > 1e-8).unwrap();
            assert!(lead.im.abs() < 1e-10 && lead.re > 0.0);
        }
    }

    #[test]
    fn robust_coverage_off_resonant_angles() {
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let base = 2.0 * std::f64::consts::PI / 5.0;
        for _ in 0..20 {
            // xorshift for a cheap deterministic angle draw
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            let u = (rng_state >> 11) as f64 / (1u64 << 53) as f64;
            let theta = base - 0.3 + 0.6 * u;
            let set = mp_jump_set(5, theta, [0.0, 1.0, 0.0]);
            let mut acc = CMat::zeros((9, 9));
            for j in &set {
                acc = acc + dagger(&j.matrix).dot(&j.matrix).mapv(|x| x * cr(j.rate));
            }
            assert_eq!(psd_rank(&acc, 1e-10), 5, "coverage lost at θ={theta}");
        }
    }

    #[test]
    fn edge_jumps_pin_the_up_up_state() {
        let [cl, crj] = edge_pinning_jumps();
        let mut minus: CVec = Array1::zeros(3);
        minus[KET_M] = cr(1.0);
        let hit = cl.matrix.dot(&minus);
        assert!((hit[KET_0] - cr(1.0)).norm() < 1e-14);

        let spec3 = LiouvillianSpec::from_templates(
            3,
            Boundary::Open(0, 0),
            &[cl.clone(), crj.clone()],
            Protocol::Custom,
        );
        let g_uu = dense_state(&aklt_spec(), 3, Boundary::Open(0, 0)).unwrap().amplitudes;
        let g_ud = dense_state(&aklt_spec(), 3, Boundary::Open(0, 1)).unwrap().amplitudes;
        for (m, _) in spec3.embedded_jumps() {
            assert!(norm2(&m.dot(&g_uu)) < 1e-12, "edge jump does not annihilate G_upup");
        }
        let right = embed_single_site(&crj.matrix, 3, 2, 3);
        assert!(norm2(&right.dot(&g_ud)) > 1e-3, "c_R should act on G_updown");
    }

    #[test]
    fn superoperator_is_trace_preserving_and_matches_action() {
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let templates = mp_jump_set(5, theta, [0.0, 1.0, 0.0]);
        let spec = LiouvillianSpec::from_templates(
            2,
            Boundary::Open(0, 0),
            &templates,
            Protocol::Mp { pulses: 5, theta, axis: [0.0, 1.0, 0.0] },
        );
        let l = assemble_superoperator(&spec, 6561).unwrap();
        // L applied to a random density matrix: trace of result vanishes,
        // and the action agrees with the explicit Lindblad form.
        let mut rho = CMat::zeros((9, 9));
        for i in 0..9 {
            for j in 0..9 {
                rho[(i, j)] = c(((i * 5 + j) % 7) as f64, (i as f64 - j as f64) * 0.1);
            }
        }
        let rho = rho.dot(&dagger(&rho));
        let v = vec_rm(&rho);
        let lv = l.dot(&v);
        let out = unvec_rm(&lv, 9);
        let tr: C64 = (0..9).map(|k| out[(k, k)]).sum();
        assert!(tr.norm() < 1e-10);

        let mut want = CMat::zeros((9, 9));
        for (m, rate) in spec.embedded_jumps() {
            let cc = dagger(&m).dot(&m);
            want = want
                + m.dot(&rho).dot(&dagger(&m)).mapv(|x| x * cr(rate))
                - cc.dot(&rho).mapv(|x| x * cr(rate / 2.0))
                - rho.dot(&cc).mapv(|x| x * cr(rate / 2.0));
        }
        assert!(max_abs(&(&out - &want)) < 1e-10);
    }

    #[test]
    fn choi_positivity_of_short_time_channel() {
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let templates = mp_jump_set(5, theta, [0.0, 1.0, 0.0]);
        let spec = LiouvillianSpec::from_templates(
            2,
            Boundary::Open(0, 0),
            &templates,
            Protocol::Custom,
        );
        let l = assemble_superoperator(&spec, 6561).unwrap();
        let e = crate::linalg::expm(&l.mapv(|x| x * cr(1e-3)));
        // Choi matrix in row-major vec convention:
        // C[(i k),(j l)] = E[(i j),(k l)]
        let d = 9;
        let mut choi = CMat::zeros((d * d, d * d));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for lidx in 0..d {
                        choi[(i * d + k, j * d + lidx)] = e[(i * d + j, k * d + lidx)];
                    }
                }
            }
        }
        let herm_dev = max_abs(&(&choi - &dagger(&choi)));
        assert!(herm_dev < 1e-9);
        let (vals, _) = eigh(&choi);
        assert!(vals.iter().all(|&v| v > -1e-8), "Choi eigenvalue {}", vals[0]);
    }

    #[test]
    fn ground_states_are_dark() {
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let templates = mp_jump_set(5, theta, [0.0, 1.0, 0.0]);
        for n in 2..=4 {
            let spec = LiouvillianSpec::from_templates(
                n,
                Boundary::Open(0, 0),
                &templates,
                Protocol::Custom,
            );
            for a in 0..2 {
                for b in 0..2 {
                    let g = dense_state(&aklt_spec(), n, Boundary::Open(a, b)).unwrap().amplitudes;
                    for (m, _) in spec.embedded_jumps() {
                        assert!(norm2(&m.dot(&g)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn magnus_equivalence_for_pulsed_frame() {
        // Propagating the explicitly pulsed two-site dynamics over one full
        // cycle matches exp(L̄·ℓτ) to first-order Magnus accuracy.
        let theta = 2.0 * std::f64::consts::PI / 5.0;
        let tau = 0.01;
        let pulses = 5;
        let templates = mp_jump_set(pulses, theta, [0.0, 1.0, 0.0]);
        let spec = LiouvillianSpec::from_templates(
            2,
            Boundary::Open(0, 0),
            &templates,
            Protocol::Custom,
        );
        let l_avg = assemble_superoperator(&spec, 6561).unwrap();
        let avg_prop = crate::linalg::expm(&l_avg.mapv(|x| x * cr(pulses as f64 * tau)));

        // pulsed frame: bare dissipator at full rate for time τ, then an
        // instantaneous rotation, repeated ℓ times
        let bare = LiouvillianSpec::from_templates(
            2,
            Boundary::Open(0, 0),
            &[bare_jump()],
            Protocol::Custom,
        );
        let l_bare = assemble_superoperator(&bare, 6561).unwrap();
        let step = crate::linalg::expm(&l_bare.mapv(|x| x * cr(tau)));
        let v = two_site_rotation(theta, [0.0, 1.0, 0.0]);
        let mut rot_super = CMat::zeros((81, 81));
        add_kron_scaled(&mut rot_super, &v, &v.mapv(|x| x.conj()), cr(1.0));
        let mut pulsed = eye(81);
        for _ in 0..pulses {
            pulsed = rot_super.dot(&step.dot(&pulsed));
        }
        // undo the accumulated full-cycle rotation (V⁵ with θ=2π/5 is a 2π
        // rotation, identity for integer spin)
        let dev = max_abs(&(&pulsed - &avg_prop));
        assert!(
            dev < 10.0 * (pulses as f64 * tau).powi(2),
            "Magnus mismatch {dev}"
        );
    }
}
