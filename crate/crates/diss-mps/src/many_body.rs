//! Index arithmetic and operator embedding for spin chains.
//!
//! A chain state lives in (C^d)^{⊗n} with site 0 as the leftmost (most
//! significant) digit: basis index x = Σ_i s_i d^{n-1-i}.

use ndarray::{Array1, Array2};

use crate::linalg::{CMat, CVec, C64};

/// Digits of a full chain index, site 0 first.
pub fn digits(mut x: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for i in (0..n).rev() {
        out[i] = x % d;
        x /= d;
    }
    out
}

/// Inverse of [`digits`].
pub fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &s| acc * d + s)
}

fn strides(n: usize, d: usize) -> Vec<usize> {
    (0..n).map(|i| d.pow((n - 1 - i) as u32)).collect()
}

/// Apply a d²×d² operator acting on sites (i, j) of an n-site chain to a
/// dense state vector. The pair need not be adjacent; (n-1, 0) covers the
/// periodic wrap bond. Row/column index of `op` is s_i * d + s_j.
pub fn apply_two_site(op: &CMat, psi: &CVec, n: usize, i: usize, j: usize, d: usize) -> CVec {
    assert_ne!(i, j);
    let dim = d.pow(n as u32);
    assert_eq!(psi.len(), dim);
    let st = strides(n, d);
    let (si, sj) = (st[i], st[j]);
    let mut out = Array1::zeros(dim);
    // Enumerate configurations with sites i and j fixed to zero, then fill
    // in all (s_i, s_j) pairs.
    let rest = dim / (d * d);
    let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let ost: Vec<usize> = others.iter().map(|&k| st[k]).collect();
    for r in 0..rest {
        let mut base = 0;
        let mut rr = r;
        for &s in ost.iter().rev() {
            base += (rr % d) * s;
            rr /= d;
        }
        for a in 0..d {
            for b in 0..d {
                let row = a * d + b;
                let mut acc = C64::new(0.0, 0.0);
                for ap in 0..d {
                    for bp in 0..d {
                        let v = op[(row, ap * d + bp)];
                        if v.norm_sqr() != 0.0 {
                            acc += v * psi[base + ap * si + bp * sj];
                        }
                    }
                }
                out[base + a * si + b * sj] = acc + out[base + a * si + b * sj];
            }
        }
    }
    out
}

/// Apply a d×d single-site operator on site i.
pub fn apply_single_site(op: &CMat, psi: &CVec, n: usize, i: usize, d: usize) -> CVec {
    let dim = d.pow(n as u32);
    assert_eq!(psi.len(), dim);
    let si = strides(n, d)[i];
    let block = si * d;
    let mut out: CVec = Array1::zeros(dim);
    for outer in (0..dim).step_by(block) {
        for inner in 0..si {
            let base = outer + inner;
            for a in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for ap in 0..d {
                    let v = op[(a, ap)];
                    if v.norm_sqr() != 0.0 {
                        acc += v * psi[base + ap * si];
                    }
                }
                out[base + a * si] = acc;
            }
        }
    }
    out
}

/// Dense embedding of a single-site operator on site i into the full
/// n-site space.
pub fn embed_single_site(op: &CMat, n: usize, i: usize, d: usize) -> CMat {
    let dim = d.pow(n as u32);
    let mut out = CMat::zeros((dim, dim));
    let si = strides(n, d)[i];
    let block = si * d;
    for outer in (0..dim).step_by(block) {
        for inner in 0..si {
            let base = outer + inner;
            for a in 0..d {
                for ap in 0..d {
                    let v = op[(a, ap)];
                    if v.norm_sqr() != 0.0 {
                        out[(base + a * si, base + ap * si)] = v;
                    }
                }
            }
        }
    }
    out
}

/// Dense embedding of a two-site operator on sites (i, j) into the full
/// n-site space.
pub fn embed_two_site(op: &CMat, n: usize, i: usize, j: usize, d: usize) -> CMat {
    let dim = d.pow(n as u32);
    let mut out = Array2::zeros((dim, dim));
    let st = strides(n, d);
    let (si, sj) = (st[i], st[j]);
    let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let ost: Vec<usize> = others.iter().map(|&k| st[k]).collect();
    let rest = dim / (d * d);
    for r in 0..rest {
        let mut base = 0;
        let mut rr = r;
        for &s in ost.iter().rev() {
            base += (rr % d) * s;
            rr /= d;
        }
        for a in 0..d {
            for b in 0..d {
                for ap in 0..d {
                    for bp in 0..d {
                        let v = op[(a * d + b, ap * d + bp)];
                        if v.norm_sqr() != 0.0 {
                            out[(base + a * si + b * sj, base + ap * si + bp * sj)] += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Real-valued variant of [`embed_two_site`], used for real symmetric
/// Hamiltonians where the dense matrix at large n would be wasteful in
/// complex storage.
pub fn embed_two_site_real(
    op: &Array2<f64>,
    n: usize,
    i: usize,
    j: usize,
    d: usize,
) -> Array2<f64> {
    let dim = d.pow(n as u32);
    let mut out = Array2::zeros((dim, dim));
    let st = strides(n, d);
    let (si, sj) = (st[i], st[j]);
    let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    let ost: Vec<usize> = others.iter().map(|&k| st[k]).collect();
    let rest = dim / (d * d);
    for r in 0..rest {
        let mut base = 0;
        let mut rr = r;
        for &s in ost.iter().rev() {
            base += (rr % d) * s;
            rr /= d;
        }
        for a in 0..d {
            for b in 0..d {
                for ap in 0..d {
                    for bp in 0..d {
                        let v = op[(a * d + b, ap * d + bp)];
                        if v != 0.0 {
                            out[(base + a * si + b * sj, base + ap * si + bp * sj)] += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// List of bond site pairs for an n-site chain.
pub fn bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic {
        v.push((n - 1, 0));
    }
    v
}
