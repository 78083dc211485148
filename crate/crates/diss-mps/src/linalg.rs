//! Small dense linear-algebra helpers shared by all modules.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    Array2::eye(n).mapv(|x: f64| cr(x))
}

/// Kronecker product a ⊗ b with row-major index convention
/// (a ⊗ b)[(i1*rb + i2, j1*cb + j2)] = a[(i1,j1)] * b[(i2,j2)].
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for i1 in 0..ra {
        for j1 in 0..ca {
            let aij = a[(i1, j1)];
            if aij == cr(0.0) {
                continue;
            }
            for i2 in 0..rb {
                for j2 in 0..cb {
                    out[(i1 * rb + i2, j1 * cb + j2)] = aij * b[(i2, j2)];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|x| x.conj())
}

/// |v⟩⟨w| outer product.
pub fn outer(v: &CVec, w: &CVec) -> CMat {
    let n = v.len();
    let m = w.len();
    let mut out = CMat::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            out[(i, j)] = v[i] * w[j].conj();
        }
    }
    out
}

pub fn norm2(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors in
/// columns (A = V diag(w) V†). Corrects for the row-major layout quirk of
/// the LAPACK binding, which hands back eigenvectors of Aᵀ.
pub fn eigh(a: &CMat) -> (Array1<f64>, CMat) {
    let (vals, vecs) = a.eigh(UPLO::Lower).expect("hermitian eigendecomposition failed");
    (vals, vecs.mapv(|x| x.conj()))
}

/// Real symmetric eigendecomposition, eigenvalues ascending, eigenvectors
/// in columns. Symmetry makes the layout quirk a no-op here.
pub fn eigh_real(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .expect("symmetric eigendecomposition failed");
    (vals, vecs)
}

/// exp(i s H) for Hermitian H, via eigendecomposition.
pub fn exp_i_hermitian(h: &CMat, s: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut out = CMat::zeros((n, n));
    for k in 0..n {
        let phase = (I * (s * vals[k])).exp();
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += phase * col[i] * col[j].conj();
            }
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor series.
/// Fine for the modest norms and dimensions used here.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = norm.max(1e-300).log2().ceil().max(0.0) as u32 + 1;
    let scale = cr(1.0 / 2f64.powi(s as i32));
    let x = a.mapv(|v| v * scale);
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=20 {
        term = term.dot(&x).mapv(|v| v / cr(k as f64));
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = sum.dot(&sum);
    }
    sum
}

/// Orthonormal basis of the span of the given vectors, discarding
/// directions with singular value below `tol`.
pub fn orthonormal_span(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two rounds of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for b in &basis {
                let coeff = inner(b, &w);
                w = &w - &b.mapv(|x| x * coeff);
            }
        }
        let nw = norm2(&w);
        if nw > tol {
            basis.push(w.mapv(|x| x / cr(nw)));
        }
    }
    basis
}

/// Eigenvalues of a general complex matrix, sorted by descending modulus.
/// Eigenvalues are layout-independent (spec(A) = spec(Aᵀ)), so no
/// correction is needed here, unlike the eigenvector path in `eigh`.
pub fn eigvals_general(a: &CMat) -> Vec<C64> {
    use ndarray_linalg::Eig;
    let (vals, _) = a.eig().expect("general eigendecomposition failed");
    let mut v: Vec<C64> = vals.to_vec();
    v.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap());
    // Guard against a conjugated spectrum from the binding: the sorted
    // moduli are unaffected, and callers needing phases use eig_general.
    v
}

/// Eigenpairs of a general complex matrix with residual-verified
/// eigenvectors. Returns (eigenvalue, eigenvector) pairs sorted by
/// descending modulus. Tries the layout corrections the binding may need
/// and keeps the one with small residuals.
pub fn eig_general(a: &CMat) -> Vec<(C64, CVec)> {
    use ndarray_linalg::Eig;
    let n = a.nrows();
    let scale = frobenius(a).max(1.0);
    let candidates: Vec<(Vec<C64>, CMat)> = {
        let (vals, vecs) = a.eig().expect("general eigendecomposition failed");
        vec![
            (vals.to_vec(), vecs.clone()),
            (vals.to_vec(), vecs.mapv(|x| x.conj())),
            (vals.iter().map(|x| x.conj()).collect(), vecs.clone()),
            (vals.iter().map(|x| x.conj()).collect(), vecs.mapv(|x| x.conj())),
        ]
    };
    for (vals, vecs) in candidates {
        let ok = (0..n).all(|k| {
            let v = vecs.column(k).to_owned();
            let r = a.dot(&v) - v.mapv(|x| x * vals[k]);
            norm2(&r) <= 1e-8 * scale * norm2(&v).max(1e-300)
        });
        if ok {
            let mut pairs: Vec<(C64, CVec)> = (0..n)
                .map(|k| (vals[k], vecs.column(k).to_owned()))
                .collect();
            pairs.sort_by(|x, y| y.0.norm().partial_cmp(&x.0.norm()).unwrap());
            return pairs;
        }
    }
    panic!("no layout correction yields residual-consistent eigenpairs");
}

/// Solve the complex linear system a·x = b, with an explicit residual
/// check guarding against backend layout quirks.
pub fn solve_complex(a: &CMat, b: &CVec) -> crate::error::Result<CVec> {
    use ndarray_linalg::Solve;
    let x = a
        .solve(b)
        .map_err(|e| crate::error::Error::NoSolution(format!("linear solve failed: {e}")))?;
    let res = max_abs(&(a.dot(&x) - b).insert_axis(ndarray::Axis(1)));
    let scale = b.iter().map(|v| v.norm()).fold(1e-30, f64::max);
    if res > 1e-8 * scale.max(1.0) {
        return Err(crate::error::Error::NoSolution(format!(
            "linear solve residual {res}"
        )));
    }
    Ok(x)
}

/// Rank of a Hermitian PSD matrix by eigenvalue threshold.
pub fn psd_rank(a: &CMat, tol: f64) -> usize {
    let (vals, _) = eigh(a);
    vals.iter().filter(|&&v| v > tol).count()
}

/// Kronecker product of two vectors with row-major grouping.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Singular values in descending order. Values are layout-safe
/// (σ(A) = σ(Aᵀ)).
pub fn singular_values(a: &CMat) -> Vec<f64> {
    use ndarray_linalg::SVD;
    let (_, s, _) = a.svd(false, false).expect("SVD failed");
    let mut v = s.to_vec();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    v
}

/// Null space of a general complex matrix: dimension counted from singular
/// values below `tol`, basis taken from the low eigenspace of A†A (layout
/// corrected through `eigh`).
pub fn null_space_complex(a: &CMat, tol: f64) -> (usize, Vec<CVec>) {
    let dim = singular_values(a).iter().filter(|&&s| s < tol).count();
    if dim == 0 {
        return (0, Vec::new());
    }
    let ata = dagger(a).dot(a);
    let (_, vecs) = eigh(&ata);
    let basis = (0..dim).map(|k| vecs.column(k).to_owned()).collect();
    (dim, basis)
}

/// Approximate the near-null subspace of a large real (generally
/// nonsymmetric) matrix by shifted block inverse iteration. Returns one
/// (residual ‖Av‖, v) pair per block vector, residual-sorted ascending,
/// with ‖v‖ = 1.
pub fn near_null_vectors_real(
    a: &Array2<f64>,
    shift: f64,
    block: usize,
    iters: usize,
    seed: u64,
) -> Vec<(f64, Array1<f64>)> {
    use ndarray_linalg::{Factorize, Solve};
    use rand::{Rng, SeedableRng};
    let n = a.nrows();
    let mut shifted = a.clone();
    for k in 0..n {
        shifted[(k, k)] -= shift;
    }
    let lu = shifted.factorize().expect("LU factorization failed");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut vs: Vec<Array1<f64>> = (0..block)
        .map(|_| Array1::from_iter((0..n).map(|_| rng.gen_range(-1.0..1.0))))
        .collect();
    for _ in 0..iters {
        let mut next: Vec<Array1<f64>> = Vec::with_capacity(block);
        for v in &vs {
            let mut w: Array1<f64> = lu.solve(v).expect("LU solve failed");
            // modified Gram-Schmidt against already accepted vectors
            for _ in 0..2 {
                for b in &next {
                    let coeff = w.dot(b);
                    w = &w - &b.mapv(|x: f64| x * coeff);
                }
            }
            let nw = w.dot(&w).sqrt();
            if nw > 1e-300 {
                next.push(w.mapv(|x| x / nw));
            }
        }
        vs = next;
    }
    let mut out: Vec<(f64, Array1<f64>)> = vs
        .into_iter()
        .map(|v| {
            let r = a.dot(&v);
            (r.dot(&r).sqrt(), v)
        })
        .collect();
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_eigh_smoke() {
        let sx = ndarray::array![[cr(0.0), cr(1.0)], [cr(1.0), cr(0.0)]];
        let k = kron(&sx, &sx);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[(0, 3)], cr(1.0));
        let (vals, _) = eigh(&sx);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lu_solve_and_inverse_iteration_on_nonsymmetric_matrix() {
        // 4×4 real matrix with a known one-dimensional kernel along
        // (1,1,1,1) and nonsymmetric off-kernel action.
        let mut a = ndarray::Array2::<f64>::zeros((4, 4));
        let rows = [
            [1.0, -1.0, 0.0, 0.0],
            [0.5, 1.5, -2.0, 0.0],
            [0.0, 3.0, -1.0, -2.0],
            [-1.5, -3.5, 3.0, 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] = rows[i][j];
            }
        }
        let kernel = ndarray::Array1::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
        let r = a.dot(&kernel);
        assert!(r.dot(&r).sqrt() < 1e-12, "test matrix has no kernel");
        let found = near_null_vectors_real(&a, 1e-9, 2, 3, 7);
        assert!(found[0].0 < 1e-10, "residual {}", found[0].0);
        assert!(found[1].0 > 1e-3, "kernel should be one-dimensional");
        let overlap = found[0].1.dot(&kernel).abs() / 2.0;
        assert!((overlap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn null_space_complex_finds_rank_deficiency() {
        let v = ndarray::Array1::from_vec(vec![cr(0.6), cr(0.8), cr(0.0)]);
        let mut a = CMat::zeros((3, 3));
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = v[i] * v[j].conj() + cr(if i == j && i == 2 { 2.0 } else { 0.0 });
            }
        }
        let (dim, basis) = null_space_complex(&a, 1e-10);
        assert_eq!(dim, 1);
        assert!(norm2(&a.dot(&basis[0])) < 1e-10);
    }

    #[test]
    fn expm_matches_exp_i_hermitian() {
        let sy = ndarray::array![[cr(0.0), c(0.0, -1.0)], [c(0.0, 1.0), cr(0.0)]];
        let a = sy.mapv(|v| v * I * cr(0.7));
        let e1 = expm(&a);
        let e2 = exp_i_hermitian(&sy, 0.7);
        assert!(max_abs(&(&e1 - &e2)) < 1e-12);
    }
}
