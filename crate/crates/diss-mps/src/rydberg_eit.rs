//! Effective two-atom dissipative rates for the Rydberg-EIT level scheme:
//! adiabatic-elimination closed form, a two-atom ODE oracle in the
//! symmetric subspace, long-range rate tables, effective-temperature
//! extraction and the imperfect steady-state study (dephasing +
//! long-range pair decay).

use ndarray::{Array1, Array2};

use crate::aklt_mps::{ground_projector, parent_hamiltonian, Boundary};
use crate::error::{Error, Result};
use crate::linalg::{cr, eig_general, eigh_real, near_null_vectors_real, CMat, CVec, C64};
use crate::many_body::{embed_single_site, embed_two_site};
use crate::spin_algebra::{rotation_matrix, RotationSpec, D_PHYS, KET_P};
use crate::trajectory::{add_kron_eye_real, add_kron_real};

/// Level-scheme parameters: ground-to-excited coupling g, excited-to-
/// Rydberg coupling Ω, excited-state decay γ with branching γ_s into the
/// three spin levels, and the pair Rydberg shift U.
#[derive(Clone, Copy, Debug)]
pub struct EITParams {
    pub g: f64,
    pub omega: f64,
    pub gamma: f64,
    pub u: f64,
    pub branching: [f64; 3],
}

impl EITParams {
    pub fn symmetric(g: f64, omega: f64, gamma: f64, u: f64) -> Self {
        EITParams {
            g,
            omega,
            gamma,
            u,
            branching: [gamma / 3.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.g < 0.0 || self.omega <= 0.0 || self.gamma <= 0.0 {
            return Err(Error::Validation("rates must be nonnegative".into()));
        }
        let sum: f64 = self.branching.iter().sum();
        if (sum - self.gamma).abs() > 1e-12 * self.gamma.max(1.0) {
            return Err(Error::Validation(format!(
                "branching ratios sum to {sum}, expected γ = {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        (self.omega * self.omega + self.g * self.g).sqrt()
    }

    /// Both stated validity regimes: U ≪ (g, Ω, γ) or g ≪ (Ω, γ, U).
    pub fn in_validity_regime(&self) -> bool {
        let u_small = self.u < 0.1 * self.g.min(self.omega).min(self.gamma);
        let g_small = self.g < 0.1 * self.omega.min(self.gamma).min(self.u);
        u_small || g_small
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EffectiveRate {
    pub u_dd: C64,
    pub gamma_dd: f64,
    pub chi: f64,
    pub in_validity_regime: bool,
}

/// Exact susceptibility χ = Ω²(Ω² + (1 + 3g²/Δ²)γ²/4)/(Δ⁴γ).
pub fn chi_exact(p: &EITParams) -> f64 {
    let d2 = p.delta() * p.delta();
    let om2 = p.omega * p.omega;
    om2 * (om2 + (1.0 + 3.0 * p.g * p.g / d2) * p.gamma * p.gamma / 4.0)
        / (d2 * d2 * p.gamma)
}

/// Leading g/Ω → 0 approximation χ ≈ 1/γ + γ/(4Ω²).
pub fn chi_approx(p: &EITParams) -> f64 {
    1.0 / p.gamma + p.gamma / (4.0 * p.omega * p.omega)
}

/// Effective pair decay: U_DD = (g⁴/Δ⁴)·U/(1 + iχU), Γ_DD = −2 Im U_DD.
pub fn effective_rate(p: &EITParams, exact_chi: bool) -> EffectiveRate {
    let chi = if exact_chi { chi_exact(p) } else { chi_approx(p) };
    let d = p.delta();
    let pref = (p.g / d).powi(4);
    let u_dd = cr(pref * p.u) / (cr(1.0) + C64::new(0.0, chi * p.u));
    EffectiveRate {
        u_dd,
        gamma_dd: -2.0 * u_dd.im,
        chi,
        in_validity_regime: p.in_validity_regime(),
    }
}

/// Amplitude ordering of the symmetric-subspace two-atom system:
/// (c_DD, c_De, c_DB, c_ee, c_eB, c_BB).
fn symmetric_subspace_generator(p: &EITParams) -> CMat {
    let d = p.delta();
    let d4 = d.powi(4);
    let (g, om, ga, u) = (p.g, p.omega, p.gamma, p.u);
    let s2 = 2.0f64.sqrt();
    let i = C64::new(0.0, 1.0);
    let mut m = CMat::zeros((6, 6));
    // i dc/dt = M c
    m[(0, 0)] = cr(g.powi(4) * u / d4);
    m[(0, 2)] = cr(-s2 * g.powi(3) * om * u / d4);
    m[(0, 5)] = cr(g * g * om * om * u / d4);
    m[(1, 1)] = -i * cr(ga / 2.0);
    m[(1, 2)] = cr(d);
    m[(2, 2)] = cr(2.0 * g * g * om * om * u / d4);
    m[(2, 1)] = cr(d);
    m[(2, 0)] = cr(-s2 * g.powi(3) * om * u / d4);
    m[(2, 5)] = cr(-s2 * g * om.powi(3) * u / d4);
    m[(3, 3)] = -i * cr(ga);
    m[(3, 4)] = cr(s2 * d);
    m[(4, 4)] = -i * cr(ga / 2.0);
    m[(4, 3)] = cr(s2 * d);
    m[(4, 5)] = cr(s2 * d);
    m[(5, 5)] = cr(om.powi(4) * u / d4);
    m[(5, 4)] = cr(s2 * d);
    m[(5, 2)] = cr(-s2 * g * om.powi(3) * u / d4);
    m[(5, 0)] = cr(g * g * om * om * u / d4);
    m
}

/// Integrate the symmetric-subspace equations of motion from c_DD(0) = 1
/// (exactly, through the eigendecomposition of the constant linear
/// system) and fit |c_DD(t)|² to a decaying exponential in the late-time
/// window. Returns the fitted rate.
pub fn two_atom_ode_oracle(p: &EITParams, t_max: f64) -> Result<f64> {
    p.validate()?;
    let m = symmetric_subspace_generator(p);
    let a = m.mapv(|x| x * C64::new(0.0, -1.0)); // dc/dt = −iM c
    let pairs = eig_general(&a);
    // expand c(0) = e_DD in the eigenbasis
    let mut v = CMat::zeros((6, 6));
    for (k, (_, vec)) in pairs.iter().enumerate() {
        for r in 0..6 {
            v[(r, k)] = vec[r];
        }
    }
    let mut rhs: CVec = Array1::zeros(6);
    rhs[0] = cr(1.0);
    let coef = crate::linalg::solve_complex(&v, &rhs)?;
    let c_dd = |t: f64| -> C64 {
        pairs
            .iter()
            .enumerate()
            .map(|(k, (val, vec))| coef[k] * vec[0] * (val * cr(t)).exp())
            .sum()
    };
    // late-time window: past the excited-state transient
    let t1 = (10.0 / p.gamma).min(0.2 * t_max);
    let pts: Vec<(f64, f64)> = (0..100)
        .map(|j| {
            let t = t1 + (t_max - t1) * j as f64 / 99.0;
            (t, c_dd(t).norm_sqr())
        })
        .collect();
    if pts.iter().any(|&(_, y)| !(y.is_finite()) || y < 0.0) {
        return Err(Error::IntegratorFailure(
            "amplitude blew up in the fit window".into(),
        ));
    }
    // constant |c_DD|² (no decay) short-circuits the log fit
    let spread = pts.iter().map(|&(_, y)| y).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|&(_, y)| y).fold(f64::INFINITY, f64::min);
    if spread < 1e-12 {
        return Ok(0.0);
    }
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|&&(_, y)| y > 1e-300)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(-slope)
}

/// Sites on a line with an 1/R⁶ interaction; rates per pair follow from
/// the closed-form Γ_DD at U(R) = c6/R⁶.
#[derive(Clone, Debug)]
pub struct ImperfectionSpec {
    pub t2: f64,
    pub positions: Vec<f64>,
    pub c6: f64,
    pub eit: EITParams,
}

impl ImperfectionSpec {
    pub fn linear_chain(n: usize, t2: f64, c6: f64, eit: EITParams) -> Self {
        ImperfectionSpec {
            t2,
            positions: (0..n).map(|k| k as f64).collect(),
            c6,
            eit,
        }
    }
}

/// Γ_DD for every site pair, sorted by site indices.
pub fn longrange_rates(spec: &ImperfectionSpec) -> Vec<((usize, usize), f64)> {
    let n = spec.positions.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (spec.positions[j] - spec.positions[i]).abs();
            let mut p = spec.eit;
            p.u = spec.c6 / r.powi(6);
            out.push(((i, j), effective_rate(&p, true).gamma_dd));
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct TemperatureResult {
    pub t_eff: f64,
    pub gap: f64,
    pub ratio: f64,
}

/// Effective temperature solving tr[P_G e^{−H/T}]/Z = F_SS on the dense
/// finite-size spectrum, reported together with the finite-size gap.
pub fn effective_temperature(f_ss: f64, n: usize, boundary: Boundary) -> Result<TemperatureResult> {
    let h = parent_hamiltonian(n, boundary)?;
    let (evals, _) = eigh_real(&h);
    let t_eff = crate::connection::effective_temperature(&evals, f_ss, 1e-8)?;
    let e0 = evals[0];
    let gap = evals
        .iter()
        .find(|&&e| e - e0 > 1e-8)
        .copied()
        .ok_or_else(|| Error::NoSolution("flat spectrum".into()))?
        - e0;
    Ok(TemperatureResult {
        t_eff,
        gap,
        ratio: t_eff / gap,
    })
}

/// All nine effective pair jumps |ss'⟩⟨DD| with branching-weighted rates
/// (γ_s γ_s' / γ²), as 9×9 two-site matrices with total rate `scale`.
fn pair_jump_channels(branching: &[f64; 3], gamma: f64, scale: f64) -> Vec<(CMat, f64)> {
    let mut out = Vec::new();
    for s in 0..D_PHYS {
        for sp in 0..D_PHYS {
            let mut m = CMat::zeros((9, 9));
            m[(s * D_PHYS + sp, KET_P * D_PHYS + KET_P)] = cr(1.0);
            let rate = scale * branching[s] * branching[sp] / (gamma * gamma);
            out.push((m, rate));
        }
    }
    out
}

/// Steady state of the engineered Liouvillian with per-site dephasing
/// channels |s⟩⟨s| at rate 1/T2 and, optionally, the long-range pair
/// decays of `geometry`. Every pair jump is averaged over the 5-pulse
/// rotation protocol. Returns F_SS = tr[P_G ρ_SS].
pub fn imperfect_steady_state(
    n: usize,
    t2: f64,
    geometry: Option<&ImperfectionSpec>,
    cap: usize,
) -> Result<f64> {
    let dim = D_PHYS.pow(n as u32);
    if dim > cap {
        return Err(Error::CapExceeded(format!(
            "dense steady-state solve needs 3^{n} = {dim} > cap {cap}"
        )));
    }
    let theta = 2.0 * std::f64::consts::PI / 5.0;
    let pulses = 5usize;
    let branching = match geometry {
        Some(g) => g.eit.branching,
        None => [1.0 / 3.0; 3],
    };
    let gamma: f64 = branching.iter().sum();

    // (pair, total rate) list: bonds at rate 1, long-range pairs at their
    // Γ_DD relative to the nearest-neighbor value
    let mut pairs: Vec<((usize, usize), f64)> = Vec::new();
    match geometry {
        None => {
            for i in 0..n - 1 {
                pairs.push(((i, i + 1), 1.0));
            }
        }
        Some(g) => {
            let table = longrange_rates(g);
            let g_nn = table
                .iter()
                .map(|&(_, r)| r)
                .fold(f64::NEG_INFINITY, f64::max);
            for ((i, j), r) in table {
                pairs.push(((i, j), r / g_nn));
            }
        }
    }

    // full-dimension real jump list
    let mut jumps: Vec<(Array2<f64>, f64)> = Vec::new();
    for alpha in 0..pulses {
        let v = rotation_matrix(&RotationSpec {
            angle: theta * alpha as f64,
            axis: [0.0, 1.0, 0.0],
        });
        let v2 = crate::linalg::kron(&v, &v);
        let v2d = crate::linalg::dagger(&v2);
        for &((i, j), pair_rate) in &pairs {
            for (m, rate) in pair_jump_channels(&branching, gamma, pair_rate) {
                let rotated = v2d.dot(&m).dot(&v2);
                let full = embed_two_site(&rotated, n, i, j, D_PHYS);
                jumps.push((full.mapv(|x| x.re), rate / pulses as f64));
            }
        }
    }
    if t2.is_finite() {
        for site in 0..n {
            for s in 0..D_PHYS {
                let mut m = CMat::zeros((D_PHYS, D_PHYS));
                m[(s, s)] = cr(1.0);
                let full = embed_single_site(&m, n, site, D_PHYS);
                jumps.push((full.mapv(|x| x.re), 1.0 / t2));
            }
        }
    }

    // assemble the real superoperator and pull out its kernel
    let mut l = Array2::<f64>::zeros((dim * dim, dim * dim));
    for (c, rate) in &jumps {
        let cc = c.t().dot(c);
        add_kron_real(&mut l, c, c, *rate);
        add_kron_eye_real(&mut l, &cc, -0.5 * rate, false);
        add_kron_eye_real(&mut l, &cc.t().to_owned(), -0.5 * rate, true);
    }
    let found = near_null_vectors_real(&l, 1e-9, 1, 60, 0x9e11);
    let (residual, v) = &found[0];
    if *residual > 1e-8 {
        return Err(Error::NoSolution(format!(
            "steady-state residual {residual} above tolerance"
        )));
    }
    // reshape, Hermitize, trace-normalize
    let mut rho = Array2::<f64>::zeros((dim, dim));
    for r in 0..dim {
        for s in 0..dim {
            rho[(r, s)] = v[r * dim + s];
        }
    }
    let rho = (&rho + &rho.t()).mapv(|x| 0.5 * x);
    let tr: f64 = (0..dim).map(|k| rho[(k, k)]).sum();
    let rho = rho.mapv(|x| x / tr);
    let pg = ground_projector(n, Boundary::Open(0, 0))?;
    let mut f = 0.0;
    for r in 0..dim {
        for s in 0..dim {
            f += pg[(r, s)].re * rho[(s, r)];
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_limits_and_agreement() {
        // g → 0 collapses the exact χ onto the printed approximation
        let p0 = EITParams::symmetric(0.0, 1.0, 1.0, 1.0);
        assert!((chi_exact(&p0) - chi_approx(&p0)).abs() < 1e-14);
        // within 1% for g ≤ 0.1Ω. The leading relative deviation is
        // (g²/Ω²)·|3(γ²/4)/(Ω²+γ²/4) − 2|, so the 1% bound needs
        // γ ≳ 1.5Ω; at γ = Ω it is ≈ 1.4(g/Ω)².
        for &gamma in &[1.5, 2.0, 3.0] {
            for &g in &[0.02, 0.05, 0.1] {
                let p = EITParams::symmetric(g, 1.0, gamma, 1.0);
                let rel = (chi_exact(&p) - chi_approx(&p)).abs() / chi_exact(&p);
                assert!(rel < 0.01, "g={g} γ={gamma}: rel {rel}");
                let r_exact = effective_rate(&p, true).gamma_dd;
                let r_approx = effective_rate(&p, false).gamma_dd;
                assert!((r_exact - r_approx).abs() / r_exact < 0.01);
            }
        }
    }

    #[test]
    fn rate_limits_in_u() {
        let base = EITParams::symmetric(0.05, 1.0, 1.0, 0.0);
        let chi = chi_exact(&base);
        let pref = (base.g / base.delta()).powi(4);
        // quadratic onset
        let mut small = base;
        small.u = 1e-6;
        let r = effective_rate(&small, true).gamma_dd;
        assert!((r / (2.0 * pref * chi * small.u * small.u) - 1.0).abs() < 1e-5);
        // saturation 2g⁴/(Δ⁴χ)
        let mut large = base;
        large.u = 1e9;
        let r = effective_rate(&large, true).gamma_dd;
        assert!((r / (2.0 * pref / chi) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ode_oracle_matches_closed_form_on_grid() {
        for &g in &[0.02, 0.05, 0.1] {
            for &u in &[0.5, 1.0, 2.0] {
                let p = EITParams::symmetric(g, 1.0, 1.0, u);
                let target = effective_rate(&p, true).gamma_dd;
                let fit = two_atom_ode_oracle(&p, 3.0 / target).unwrap();
                let ratio = fit / target;
                assert!(
                    (0.9..=1.1).contains(&ratio),
                    "g={g} U={u}: Γ_fit/Γ_DD = {ratio}"
                );
            }
        }
    }

    #[test]
    fn no_interaction_means_no_decay() {
        let p = EITParams::symmetric(0.05, 1.0, 1.0, 0.0);
        let fit = two_atom_ode_oracle(&p, 1e4).unwrap();
        assert!(fit.abs() < 1e-10, "dark-state decay {fit}");
    }

    #[test]
    fn rate_scales_as_g_fourth() {
        let p1 = EITParams::symmetric(0.01, 1.0, 1.0, 1.0);
        let p2 = EITParams::symmetric(0.02, 1.0, 1.0, 1.0);
        let f1 = two_atom_ode_oracle(&p1, 3.0 / effective_rate(&p1, true).gamma_dd).unwrap();
        let f2 = two_atom_ode_oracle(&p2, 3.0 / effective_rate(&p2, true).gamma_dd).unwrap();
        let ratio = f2 / f1;
        assert!(
            (12.8..=19.2).contains(&ratio),
            "doubling g: rate ratio {ratio}"
        );
    }

    #[test]
    fn longrange_table_is_monotone_and_r12() {
        let eit = EITParams::symmetric(0.05, 1.0, 1.0, 0.0);
        let spec = ImperfectionSpec {
            t2: f64::INFINITY,
            positions: vec![0.0, 4.0, 12.0],
            c6: 1e-3, // far pairs sit in the U → 0 quadratic regime
            eit,
        };
        let table = longrange_rates(&spec);
        assert_eq!(table.len(), 3);
        // pair order (0,1),(0,2),(1,2) → distances 4, 12, 8
        let by_r: Vec<f64> = table.iter().map(|&(_, r)| r).collect();
        assert!(by_r[0] > by_r[2] && by_r[2] > by_r[1]);
        // R → 2R: ratio within [2¹⁰, 2¹⁴] of the 1/R¹² law
        let ratio = by_r[0] / by_r[2];
        assert!(
            (2f64.powi(10)..=2f64.powi(14)).contains(&ratio),
            "R-doubling ratio {ratio}"
        );
        // single pair reduces to effective_rate
        let single = ImperfectionSpec {
            positions: vec![0.0, 1.0],
            ..spec.clone()
        };
        let t = longrange_rates(&single);
        let mut p = eit;
        p.u = 1e-3;
        assert!((t[0].1 - effective_rate(&p, true).gamma_dd).abs() < 1e-15);
    }

    #[test]
    fn effective_temperature_self_consistent() {
        let n = 6;
        let res = effective_temperature(0.9, n, Boundary::Open(0, 0)).unwrap();
        // independent partition-sum evaluation at the returned T
        let h = parent_hamiltonian(n, Boundary::Open(0, 0)).unwrap();
        let (evals, _) = eigh_real(&h);
        let e0 = evals[0];
        let z: f64 = evals.iter().map(|&e| (-(e - e0) / res.t_eff).exp()).sum();
        let zg: f64 = evals
            .iter()
            .filter(|&&e| e - e0 < 1e-8)
            .map(|&e| (-(e - e0) / res.t_eff).exp())
            .sum();
        assert!((zg / z - 0.9).abs() < 1e-8);
        assert!(res.gap > 0.0 && (res.ratio - res.t_eff / res.gap).abs() < 1e-15);

        // strictly decreasing in F_SS
        let mut last = f64::INFINITY;
        for &f in &[0.3, 0.6, 0.9, 0.99] {
            let t = effective_temperature(f, 4, Boundary::Open(0, 0)).unwrap().t_eff;
            assert!(t < last);
            last = t;
        }
        // below the infinite-temperature floor there is no solution
        assert!(matches!(
            effective_temperature(4.0 / 81.0, 4, Boundary::Open(0, 0)),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn steady_state_ideal_limit_and_dephasing_monotonicity() {
        let n = 3;
        // near-ideal: very long T2, nearest-neighbor only
        let f_ideal = imperfect_steady_state(n, 1e6, None, 729).unwrap();
        assert!(f_ideal > 0.999, "near-ideal F_SS {f_ideal}");
        // monotone in T2
        let mut last = 0.0;
        for &t2 in &[30.0, 100.0, 300.0, 1000.0, 3000.0] {
            let f = imperfect_steady_state(n, t2, None, 729).unwrap();
            assert!(f >= last - 1e-9, "T2={t2}: F {f} < {last}");
            last = f;
        }
        assert!(last > 0.9);
    }

    #[test]
    fn steady_state_saturates_with_longrange() {
        let n = 3;
        let eit = EITParams::symmetric(0.05, 1.0, 1.0, 0.0);
        let geom = ImperfectionSpec::linear_chain(n, f64::INFINITY, 1.0, eit);
        let f1 = imperfect_steady_state(n, 1e7, Some(&geom), 729).unwrap();
        let f2 = imperfect_steady_state(n, 1e9, Some(&geom), 729).unwrap();
        assert!(f1 < 1.0 - 1e-6, "long-range leaves F at {f1}");
        assert!(
            (f1 - f2).abs() < 1e-4,
            "no saturation: F(1e7)={f1} F(1e9)={f2}"
        );
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            imperfect_steady_state(5, 100.0, None, 81),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn invalid_branching_is_rejected() {
        let p = EITParams {
            g: 0.05,
            omega: 1.0,
            gamma: 1.0,
            u: 1.0,
            branching: [0.5, 0.5, 0.5],
        };
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
    }
}
