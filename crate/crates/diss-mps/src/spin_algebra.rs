//! Spin-1 operators, global rotations, and the two-site total-angular-momentum
//! decomposition that defines the bright manifold.
//!
//! Basis order is fixed globally as (|+⟩, |0⟩, |−⟩) in the S^z basis; every
//! other module inherits this convention.

use crate::linalg::{c, cr, exp_i_hermitian, eye, kron, CMat};
use ndarray::array;

/// Physical dimension of a spin-1 site.
pub const D_PHYS: usize = 3;

/// Basis indices in the fixed (|+⟩, |0⟩, |−⟩) order.
pub const KET_P: usize = 0;
pub const KET_0: usize = 1;
pub const KET_M: usize = 2;

/// The three spin-1 matrices (ħ = 1).
#[derive(Debug, Clone)]
pub struct SpinOps {
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

impl SpinOps {
    /// n̂·S⃗ for a real 3-vector n̂.
    pub fn along(&self, axis: [f64; 3]) -> CMat {
        let mut out = self.sx.mapv(|v| v * cr(axis[0]));
        out = &out + &self.sy.mapv(|v| v * cr(axis[1]));
        out = &out + &self.sz.mapv(|v| v * cr(axis[2]));
        out
    }
}

/// A global rotation exp(i θ n̂·S⃗) applied to a set of sites.
#[derive(Debug, Clone)]
pub struct RotationSpec {
    pub angle: f64,
    pub axis: [f64; 3],
}

impl RotationSpec {
    pub fn about_y(angle: f64) -> Self {
        Self { angle, axis: [0.0, 1.0, 0.0] }
    }

    pub fn validate(&self) -> Result<(), String> {
        let n2: f64 = self.axis.iter().map(|x| x * x).sum();
        if (n2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(format!("rotation axis must have unit norm, got {}", n2.sqrt()));
        }
        Ok(())
    }
}

/// Projectors onto the total-J sectors of two neighbouring spin-1 sites.
#[derive(Debug, Clone)]
pub struct TwoSiteDecomposition {
    pub p0: CMat,
    pub p1: CMat,
    pub p2: CMat,
}

impl TwoSiteDecomposition {
    pub fn projector(&self, j: usize) -> &CMat {
        match j {
            0 => &self.p0,
            1 => &self.p1,
            2 => &self.p2,
            _ => panic!("total J of two spin-1 sites is 0, 1 or 2"),
        }
    }
}

/// Standard spin-1 matrices in the fixed basis order.
pub fn build_spin1_ops() -> SpinOps {
    let s = std::f64::consts::SQRT_2 / 2.0; // 1/√2
    let sx = array![
        [cr(0.0), cr(s), cr(0.0)],
        [cr(s), cr(0.0), cr(s)],
        [cr(0.0), cr(s), cr(0.0)]
    ];
    let sy = array![
        [cr(0.0), c(0.0, -s), cr(0.0)],
        [c(0.0, s), cr(0.0), c(0.0, -s)],
        [cr(0.0), c(0.0, s), cr(0.0)]
    ];
    let sz = array![
        [cr(1.0), cr(0.0), cr(0.0)],
        [cr(0.0), cr(0.0), cr(0.0)],
        [cr(0.0), cr(0.0), cr(-1.0)]
    ];
    SpinOps { sx, sy, sz }
}

/// Single-site unitary exp(i θ n̂·S⃗), computed by eigendecomposition of the
/// Hermitian generator (exact for 3×3).
pub fn rotation_matrix(spec: &RotationSpec) -> CMat {
    spec.validate().expect("invalid rotation spec");
    let ops = build_spin1_ops();
    exp_i_hermitian(&ops.along(spec.axis), spec.angle)
}

/// Total-J projectors for a pair of spin-1 sites, built from the polynomial
/// of J² with eigenvalues J(J+1) ∈ {0, 2, 6}.
pub fn total_j_projectors() -> TwoSiteDecomposition {
    let ops = build_spin1_ops();
    let id = eye(D_PHYS);
    let mut j2 = CMat::zeros((9, 9));
    for s in [&ops.sx, &ops.sy, &ops.sz] {
        let tot = &kron(s, &id) + &kron(&id, s);
        j2 = &j2 + &tot.dot(&tot);
    }
    let id9 = eye(9);
    let shift = |a: &CMat, x: f64| a - &id9.mapv(|v| v * cr(x));
    // P_J = Π_{J'≠J} (J² − λ_{J'}) / (λ_J − λ_{J'})
    let p0 = shift(&j2, 2.0).dot(&shift(&j2, 6.0)).mapv(|v| v / cr((0.0 - 2.0) * (0.0 - 6.0)));
    let p1 = shift(&j2, 0.0).dot(&shift(&j2, 6.0)).mapv(|v| v / cr((2.0 - 0.0) * (2.0 - 6.0)));
    let p2 = shift(&j2, 0.0).dot(&shift(&j2, 2.0)).mapv(|v| v / cr((6.0 - 0.0) * (6.0 - 2.0)));
    TwoSiteDecomposition { p0, p1, p2 }
}

/// The two-site AKLT bond term S⃗₁·S⃗₂ + (1/3)(S⃗₁·S⃗₂)², equal to 2P₂ − 2/3.
pub fn aklt_bond_term() -> CMat {
    let ops = build_spin1_ops();
    let mut dot = CMat::zeros((9, 9));
    for s in [&ops.sx, &ops.sy, &ops.sz] {
        dot = &dot + &kron(s, s);
    }
    &dot + &dot.dot(&dot).mapv(|v| v / cr(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, eigh, max_abs, norm2, CVec, I};

    fn commutator(a: &CMat, b: &CMat) -> CMat {
        &a.dot(b) - &b.dot(a)
    }

    #[test]
    fn spin1_algebra() {
        let ops = build_spin1_ops();
        // S^z diagonal in the fixed order
        assert_eq!(ops.sz[(0, 0)], cr(1.0));
        assert_eq!(ops.sz[(1, 1)], cr(0.0));
        assert_eq!(ops.sz[(2, 2)], cr(-1.0));
        // [S^a, S^b] = i ε_abc S^c
        let pairs = [
            (&ops.sx, &ops.sy, &ops.sz),
            (&ops.sy, &ops.sz, &ops.sx),
            (&ops.sz, &ops.sx, &ops.sy),
        ];
        for (a, b, c_) in pairs {
            let lhs = commutator(a, b);
            let rhs = c_.mapv(|v| v * I);
            assert!(max_abs(&(&lhs - &rhs)) < 1e-12);
        }
        // Casimir
        let mut cas = CMat::zeros((3, 3));
        for s in [&ops.sx, &ops.sy, &ops.sz] {
            cas = &cas + &s.dot(s);
        }
        assert!(max_abs(&(&cas - &eye(3).mapv(|v| v * cr(2.0)))) < 1e-12);
    }

    #[test]
    fn rotations() {
        // θ = 2π is the identity for integer spin
        let r = rotation_matrix(&RotationSpec::about_y(2.0 * std::f64::consts::PI));
        assert!(max_abs(&(&r - &eye(3))) < 1e-12);
        let r0 = rotation_matrix(&RotationSpec::about_y(0.0));
        assert!(max_abs(&(&r0 - &eye(3))) < 1e-12);
        // fifth power of the 2π/5 rotation is the identity
        let v = rotation_matrix(&RotationSpec::about_y(2.0 * std::f64::consts::PI / 5.0));
        let mut v5 = eye(3);
        for _ in 0..5 {
            v5 = v5.dot(&v);
        }
        assert!(max_abs(&(&v5 - &eye(3))) < 1e-12);
        // unitarity
        assert!(max_abs(&(&dagger(&v).dot(&v) - &eye(3))) < 1e-12);
    }

    #[test]
    fn rotation_composition() {
        let axis = {
            let raw = [0.3, -0.7, 0.2];
            let n: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            [raw[0] / n, raw[1] / n, raw[2] / n]
        };
        for (t1, t2) in [(0.37, 1.21), (2.5, -0.9), (0.0, 3.1)] {
            let r1 = rotation_matrix(&RotationSpec { angle: t1, axis });
            let r2 = rotation_matrix(&RotationSpec { angle: t2, axis });
            let r12 = rotation_matrix(&RotationSpec { angle: t1 + t2, axis });
            assert!(max_abs(&(&r1.dot(&r2) - &r12)) < 1e-10);
        }
    }

    #[test]
    fn projector_decomposition() {
        let dec = total_j_projectors();
        let id9 = eye(9);
        let sum = &(&dec.p0 + &dec.p1) + &dec.p2;
        assert!(max_abs(&(&sum - &id9)) < 1e-12);
        for (j, p) in [(0usize, &dec.p0), (1, &dec.p1), (2, &dec.p2)] {
            // idempotent and Hermitian
            assert!(max_abs(&(&p.dot(p) - p)) < 1e-12);
            assert!(max_abs(&(p - &dagger(p))) < 1e-12);
            let tr: crate::linalg::C64 = p.diag().iter().sum();
            let expected = (2 * j + 1) as f64;
            assert!((tr.re - expected).abs() < 1e-12 && tr.im.abs() < 1e-12);
        }
        // orthogonality
        assert!(max_abs(&dec.p0.dot(&dec.p2)) < 1e-12);
        assert!(max_abs(&dec.p1.dot(&dec.p2)) < 1e-12);
        assert!(max_abs(&dec.p0.dot(&dec.p1)) < 1e-12);
    }

    #[test]
    fn p2_on_stretched_and_singlet_states() {
        let dec = total_j_projectors();
        // |++⟩ is |J=2, J^z=2⟩
        let mut pp = CVec::zeros(9);
        pp[KET_P * 3 + KET_P] = cr(1.0);
        let out = dec.p2.dot(&pp);
        assert!(norm2(&(&out - &pp).to_owned()) < 1e-12);
        // two-site singlet (|+−⟩ − |00⟩ + |−+⟩)/√3 is annihilated by P₂
        let mut singlet = CVec::zeros(9);
        let s3 = 1.0 / 3f64.sqrt();
        singlet[KET_P * 3 + KET_M] = cr(s3);
        singlet[KET_0 * 3 + KET_0] = cr(-s3);
        singlet[KET_M * 3 + KET_P] = cr(s3);
        assert!(norm2(&dec.p2.dot(&singlet)) < 1e-12);
    }

    #[test]
    fn so3_invariance_of_sectors() {
        let dec = total_j_projectors();
        for (angle, axis) in [
            (0.83, [0.0, 1.0, 0.0]),
            (2.0, [1.0, 0.0, 0.0]),
            (1.3, [0.6, 0.0, 0.8]),
        ] {
            let v = rotation_matrix(&RotationSpec { angle, axis });
            let vv = kron(&v, &v);
            for p in [&dec.p0, &dec.p1, &dec.p2] {
                let rotated = vv.dot(p).dot(&dagger(&vv));
                assert!(max_abs(&(&rotated - p)) < 1e-10);
            }
        }
    }

    #[test]
    fn bond_term_matches_projector_form() {
        let h = aklt_bond_term();
        let dec = total_j_projectors();
        let rhs = &dec.p2.mapv(|v| v * cr(2.0)) - &eye(9).mapv(|v| v * cr(2.0 / 3.0));
        assert!(max_abs(&(&h - &rhs)) < 1e-12);
    }

    #[test]
    fn hermitian_generator_eigendecomposition_is_exact() {
        // spot check exp(iθ S^x) unitarity at odd angles
        let r = rotation_matrix(&RotationSpec { angle: 1.234567, axis: [1.0, 0.0, 0.0] });
        assert!(max_abs(&(&dagger(&r).dot(&r) - &eye(3))) < 1e-12);
        let (vals, _) = eigh(&build_spin1_ops().sx);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[2] - 1.0).abs() < 1e-12);
    }
}
