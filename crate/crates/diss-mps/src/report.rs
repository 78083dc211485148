//! Self-contained verification suite: twelve numbered checks covering
//! every major capability, each returning an expected-vs-measured record.
//! The `reproduce-all` subcommand runs them at desk scale; the
//! `acceptance` integration test runs them at full scale.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aklt_mps::{
    aklt_spec, dense_state, ground_basis, overlap, parent_hamiltonian, Boundary,
};
use crate::connection::{
    apply_feedback, apply_jump_to_edges, dense_joined_state, dense_pair_state,
    false_negative_retry_probability, method1_scaling_curve, monte_carlo_tree,
    success_probability, success_probability_exact, EdgeStatePair, Method1Params, ScalingModel,
};
use crate::error::Result;
use crate::linalg::{
    c, cr, max_abs, near_null_vectors_real, null_space_complex, CVec, C64,
};
use crate::liouvillian::{
    assemble_superoperator, cw_diagonalize, edge_pinning_jumps, mp_jump_set, unvec_rm,
    JumpOperator, LiouvillianSpec, Protocol,
};
use crate::rydberg_eit::{
    chi_approx, chi_exact, effective_rate, effective_temperature, imperfect_steady_state,
    two_atom_ode_oracle, EITParams, ImperfectionSpec,
};
use crate::spin_algebra::total_j_projectors;
use crate::symmetry_general::{
    average_q, construct_jump_set, decompose_rep, ghz_connection_check, random_unitary, GhzInit,
    GhzJump, GhzOutcome, GroupRep,
};
use crate::trajectory::{
    fit_preparation_time, master_equation_evolve, run_ensemble, Backend, InitialState, Observables, TrajectoryConfig,
};
use crate::uniqueness::{
    analytic_det_periodic, dense_periodic_b_oracle, det_certificate_open,
    det_certificate_periodic, gram_det, BBoundary, BMatrix, Family, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// reduced sizes/ensembles for a quick end-to-end report
    Desk,
    /// the sizes and tolerances the checks are specified at
    Full,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
    pub wall_clock_s: f64,
}

struct Outcome {
    expected: String,
    measured: String,
    pass: bool,
}

fn ok(expected: impl Into<String>, measured: impl Into<String>, pass: bool) -> Result<Outcome> {
    Ok(Outcome {
        expected: expected.into(),
        measured: measured.into(),
        pass,
    })
}

/// Run all twelve checks in order; failures (including panics) are
/// recorded, never fatal.
pub fn run_all(scale: Scale, seed: u64) -> Vec<CriterionResult> {
    let checks: Vec<(&'static str, fn(Scale, u64) -> Result<Outcome>)> = vec![
        ("continuous-drive rate spectrum", c1_cw_rates),
        ("edge-overlap closed form vs dense", c2_overlaps),
        ("Gram-determinant uniqueness certificates", c3_certificates),
        ("dense steady-space dimensions", c4_steady_space),
        ("trajectory ensemble vs master equation", c5_trajectory_oracle),
        ("cooling convergence and time scaling", c6_cooling),
        ("edge-level connection algebra", c7_connection_algebra),
        ("merging-tree time scaling", c8_scaling_law),
        ("driven-pair effective decay rate", c9_rydberg),
        ("effective temperature and imperfections", c10_teff),
        ("minimal jump sets from symmetry", c11_jump_sets),
        ("finite-size parent-model gap", c12_gap),
    ];
    let mut out = Vec::with_capacity(checks.len());
    for (k, (name, f)) in checks.iter().enumerate() {
        let id = k + 1;
        let t0 = Instant::now();
        let crit_seed = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(id as u64);
        let result = catch_unwind(AssertUnwindSafe(|| f(scale, crit_seed)));
        let wall = t0.elapsed().as_secs_f64();
        let (expected, measured, pass) = match result {
            Ok(Ok(o)) => (o.expected, o.measured, o.pass),
            Ok(Err(e)) => ("completes".into(), format!("error: {e}"), false),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                ("completes".into(), format!("panic: {msg}"), false)
            }
        };
        out.push(CriterionResult {
            id,
            name,
            expected,
            measured,
            pass,
            wall_clock_s: wall,
        });
    }
    out
}

fn mp_templates() -> Vec<JumpOperator> {
    mp_jump_set(5, 2.0 * std::f64::consts::PI / 5.0, [0.0, 1.0, 0.0])
}

// ---------------------------------------------------------------------
// 1. rate spectrum of the continuously driven dissipator

fn c1_cw_rates(_: Scale, _: u64) -> Result<Outcome> {
    let want = {
        let mut v = vec![
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
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    };
    let jumps = cw_diagonalize(64)?;
    let mut got: Vec<f64> = jumps.iter().map(|j| j.rate).collect();
    got.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let dev = if got.len() == want.len() {
        got.iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    ok(
        "9 rates {7/32,3/16,3/16,1/8,1/8,1/16,1/16,1/64,1/64} to 1e-9",
        format!("{} rates, max deviation {dev:.2e}", got.len()),
        dev < 1e-9,
    )
}

// ---------------------------------------------------------------------
// 2. closed-form segment overlaps vs dense contractions

fn c2_overlaps(_: Scale, _: u64) -> Result<Outcome> {
    let spec = aklt_spec();
    let mut worst = 0.0f64;
    for n in 2..=8usize {
        let states: Vec<CVec> = (0..4)
            .map(|k| {
                dense_state(&spec, n, Boundary::Open(k / 2, k % 2))
                    .map(|s| s.amplitudes)
            })
            .collect::<Result<_>>()?;
        for a in 0..2 {
            for b in 0..2 {
                for ap in 0..2 {
                    for bp in 0..2 {
                        let dense: C64 = states[2 * a + b]
                            .iter()
                            .zip(states[2 * ap + bp].iter())
                            .map(|(x, y)| x.conj() * y)
                            .sum();
                        let closed = overlap(n, (a, b), (ap, bp));
                        worst = worst.max((dense - closed).norm());
                    }
                }
            }
        }
    }
    ok(
        "all 16 boundary pairs, n <= 8, to 1e-10",
        format!("max deviation {worst:.2e}"),
        worst < 1e-10,
    )
}

// ---------------------------------------------------------------------
// 3. determinant certificates against both printed closed forms

fn c3_certificates(_: Scale, _: u64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut all_unique = true;
    for family in [Family::Mp, Family::Cw] {
        for n in 2..=6usize {
            let cert = det_certificate_open(n, family);
            worst = worst.max((cert.det_numeric - cert.det_analytic).abs() / cert.det_analytic);
            all_unique &= cert.verdict == Verdict::Unique;
        }
        for n in 4..=6usize {
            let cert = det_certificate_periodic(n, family);
            worst = worst.max((cert.det_numeric - cert.det_analytic).abs() / cert.det_analytic);
            all_unique &= cert.verdict == Verdict::Unique;
        }
    }
    // ring of three: the closed form vanishes; corroborate with both the
    // dense Gram assembly and a dense generator null space of dim > 1
    let ana3 = analytic_det_periodic(3, Family::Mp).abs();
    let b3 = BMatrix {
        boundary: BBoundary::Periodic,
        n: 3,
        family: Family::Mp,
        entries: dense_periodic_b_oracle(3, Family::Mp),
    };
    let (det3, min_eig3) = gram_det(&b3);
    let spec3 = LiouvillianSpec::from_templates(
        3,
        Boundary::Periodic,
        &mp_templates(),
        Protocol::Custom,
    );
    let l3 = assemble_superoperator(&spec3, 729)?;
    let scale3 = l3.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    let (null_dim, _) = null_space_complex(&l3, 1e-9 * scale3.max(1.0));
    let degenerate3 = ana3 < 1e-30 && min_eig3.abs() < 1e-10 && null_dim > 1;
    ok(
        "rel err < 1e-8 (open n=2..6, periodic n=4..6, both families); ring n=3 degenerate with null dim > 1",
        format!(
            "worst rel err {worst:.2e}; n=3: closed form {ana3:.1e}, Gram min eig {min_eig3:.1e} (det {det3:.1e}), null dim {null_dim}"
        ),
        worst < 1e-8 && all_unique && degenerate3,
    )
}

// ---------------------------------------------------------------------
// 4. dense steady-space structure

fn c4_steady_space(_: Scale, seed: u64) -> Result<Outcome> {
    // open n=2: the full 4x4 ground sector survives
    let spec2 = LiouvillianSpec::from_templates(
        2,
        Boundary::Open(0, 0),
        &mp_templates(),
        Protocol::Custom,
    );
    let l2 = assemble_superoperator(&spec2, 81)?;
    let s2 = l2.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    let (dim2, _) = null_space_complex(&l2, 1e-10 * s2.max(1.0));

    // open n=3 with pinned edges: unique, and it is the all-up edge state
    let mut pinned = mp_templates();
    pinned.extend(edge_pinning_jumps());
    let spec3 =
        LiouvillianSpec::from_templates(3, Boundary::Open(0, 0), &pinned, Protocol::Custom);
    let l3 = assemble_superoperator(&spec3, 729)?;
    let s3 = l3.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    let (dim3, vecs3) = null_space_complex(&l3, 1e-10 * s3.max(1.0));
    let g_uu = dense_state(&aklt_spec(), 3, Boundary::Open(0, 0))?.normalized();
    let overlap_uu = if dim3 == 1 {
        let rho = unvec_rm(&vecs3[0], 27);
        let tr: C64 = (0..27).map(|k| rho[(k, k)]).sum();
        let rho = rho.mapv(|x| x / tr);
        let g = &g_uu.amplitudes;
        let mut val = C64::new(0.0, 0.0);
        for r in 0..27 {
            for s in 0..27 {
                val += g[r].conj() * rho[(r, s)] * g[s];
            }
        }
        val.re
    } else {
        0.0
    };

    // periodic n=4: unique; probed with shifted inverse iteration on the
    // real generator (dimension 6561)
    let spec4 =
        LiouvillianSpec::from_templates(4, Boundary::Periodic, &mp_templates(), Protocol::Custom);
    let dim = 81usize;
    let mut l4 = Array2::<f64>::zeros((dim * dim, dim * dim));
    for (full, rate) in spec4.embedded_jumps_real()? {
        let cc = full.t().dot(&full);
        crate::trajectory::add_kron_real(&mut l4, &full, &full, rate);
        crate::trajectory::add_kron_eye_real(&mut l4, &cc, -0.5 * rate, false);
        crate::trajectory::add_kron_eye_real(&mut l4, &cc.t().to_owned(), -0.5 * rate, true);
    }
    let probes = near_null_vectors_real(&l4, 1e-9, 3, 60, seed);
    let res: Vec<f64> = probes.iter().map(|(r, _)| *r).collect();
    let dim4 = res.iter().filter(|&&r| r < 1e-10).count();
    // the steady state must be the ring ground state
    let g4 = ground_basis(4, Boundary::Periodic)?;
    let overlap_ring = {
        let v = &probes[0].1;
        let rho = Array2::from_shape_fn((dim, dim), |(r, s)| v[r * dim + s]);
        let rho = (&rho + &rho.t()).mapv(|x| 0.5 * x);
        let tr: f64 = (0..dim).map(|k| rho[(k, k)]).sum();
        let g = &g4[0];
        let mut val = 0.0;
        for r in 0..dim {
            for s in 0..dim {
                val += (g[r].conj() * rho[(r, s)] / tr * g[s]).re;
            }
        }
        val
    };
    let pass = dim2 == 16
        && dim3 == 1
        && overlap_uu > 1.0 - 1e-8
        && dim4 == 1
        && res.len() >= 2
        && res[1] > 1e-8
        && overlap_ring > 1.0 - 1e-8;
    ok(
        "null dims 16 (open n=2), 1 (open n=3 pinned, all-up edge state), 1 (periodic n=4, ring ground state)",
        format!(
            "dims {dim2}/{dim3}/{dim4}; pinned ground population {overlap_uu:.10}; ring residuals {:.1e},{:.1e}; ring ground population {overlap_ring:.10}",
            res[0],
            res.get(1).copied().unwrap_or(f64::NAN)
        ),
        pass,
    )
}

// ---------------------------------------------------------------------
// 5. trajectory ensembles against dense master-equation evolution

fn c5_trajectory_oracle(scale: Scale, seed: u64) -> Result<Outcome> {
    let (ns, count): (&[usize], usize) = match scale {
        Scale::Desk => (&[2, 3], 400),
        Scale::Full => (&[2, 3, 4], 2000),
    };
    let t_max = 8.0;
    let mut worst_sigma = 0.0f64;
    for &n in ns {
        let spec = LiouvillianSpec::from_templates(
            n,
            Boundary::Open(0, 0),
            &mp_templates(),
            Protocol::Custom,
        );
        let ground = ground_basis(n, Boundary::Open(0, 0))?;
        let obs = Observables::fidelity_only(ground.clone());
        let cfg = TrajectoryConfig {
            spec: spec.clone(),
            t_max,
            dt: 0.005,
            seed,
            initial: InitialState::MaximallyMixed,
            record_every: 200, // one point per unit time
            backend: Backend::Spectral,
        };
        let ens = run_ensemble(&cfg, &obs, count)?;
        let dim = 3usize.pow(n as u32);
        let rho0 = crate::linalg::eye(dim).mapv(|x| x / cr(dim as f64));
        let me_dt = 0.04;
        let (times, rhos) = master_equation_evolve(&spec, &rho0, t_max, me_dt, 25)?;
        for (k, &t) in times.iter().enumerate() {
            let f_me: f64 = ground
                .iter()
                .map(|g| {
                    let mut val = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        for s in 0..dim {
                            val += g[r].conj() * rhos[k][(r, s)] * g[s];
                        }
                    }
                    val.re
                })
                .sum();
            let j = ens
                .times
                .iter()
                .position(|&tt| (tt - t).abs() < 1e-9)
                .expect("records must align");
            let se = ens.f_stderr[j].max(1e-6);
            worst_sigma = worst_sigma.max((ens.f_mean[j] - f_me).abs() / se);
        }
    }
    ok(
        format!("|F_traj - F_me| < 3 standard errors at every time, {count} trajectories"),
        format!("worst deviation {worst_sigma:.2} standard errors"),
        worst_sigma < 3.0,
    )
}

// ---------------------------------------------------------------------
// 6. cooling convergence and the preparation-time exponent

fn c6_cooling(scale: Scale, seed: u64) -> Result<Outcome> {
    // open chains, fidelity against the 4-dimensional ground manifold;
    // T is extrapolated from the exponential tail of 1 − F (the direct
    // crossing would need horizons several times longer)
    let plan: Vec<(usize, usize, f64)> = match scale {
        Scale::Desk => vec![(4, 192, 200.0), (5, 128, 300.0), (6, 96, 450.0)],
        Scale::Full => vec![
            (4, 256, 150.0),
            (5, 128, 250.0),
            (6, 96, 400.0),
            (7, 64, 800.0),
            (8, 64, 2000.0),
        ],
    };
    let mut lns = Vec::new();
    let mut lnt = Vec::new();
    let mut tail_ok = true;
    let mut fitted = Vec::new();
    for &(n, count, t_max) in &plan {
        let spec = LiouvillianSpec::from_templates(
            n,
            Boundary::Open(0, 0),
            &mp_templates(),
            Protocol::Custom,
        );
        let ground = ground_basis(n, Boundary::Open(0, 0))?;
        let obs = Observables::fidelity_only(ground);
        let dt = 0.01;
        let record_every = ((t_max / dt / 100.0).round() as usize).max(1);
        let cfg = TrajectoryConfig {
            spec,
            t_max,
            dt,
            seed: seed.wrapping_add(n as u64 * 1000),
            initial: InitialState::MaximallyMixed,
            record_every,
            backend: Backend::Spectral,
        };
        let ens = run_ensemble(&cfg, &obs, count)?;
        let last = *ens.f_mean.last().unwrap();
        match fit_preparation_time(&ens.times, &ens.f_mean, 0.9, None) {
            Ok(fit) if last > 0.6 && fit.t_target > 0.0 => {
                fitted.push((n, fit.t_target));
                lns.push((n as f64).ln());
                lnt.push(fit.t_target.ln());
            }
            _ => {
                tail_ok = false;
                fitted.push((n, f64::NAN));
            }
        }
    }
    let slope = if lns.len() == plan.len() {
        let mx = lns.iter().sum::<f64>() / lns.len() as f64;
        let my = lnt.iter().sum::<f64>() / lnt.len() as f64;
        let num: f64 = lns.iter().zip(lnt.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = lns.iter().map(|x| (x - mx).powi(2)).sum();
        num / den
    } else {
        f64::NAN
    };
    let times: Vec<String> = fitted
        .iter()
        .map(|&(n, t)| format!("T({n})={t:.0}"))
        .collect();
    ok(
        "every chain shows an exponential tail toward F >= 0.9; log-log preparation-time slope in [2.0, 4.0]",
        format!("{}; slope {slope:.2}", times.join(", ")),
        tail_ok && (2.0..=4.0).contains(&slope),
    )
}

// ---------------------------------------------------------------------
// 7. edge-level connection algebra

fn c7_connection_algebra(scale: Scale, seed: u64) -> Result<Outcome> {
    let theta = 2.0 * std::f64::consts::PI / 5.0;
    let axis = [0.0, 1.0, 0.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_edge = |rng: &mut ChaCha8Rng| {
        Array1::from_iter((0..2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
    };
    let fuzz_pairs = match scale {
        Scale::Desk => 200,
        Scale::Full => 10_000,
    };
    // (a) exact post-jump orthogonality, every pulse label
    let mut worst_orth = 0.0f64;
    let mut worst_feedback = 0.0f64;
    for _ in 0..fuzz_pairs {
        let mut pair = EdgeStatePair::basis(0, 0, 0, 0, 4, 4);
        pair.alpha = rand_edge(&mut rng);
        pair.beta = rand_edge(&mut rng);
        pair.x_left = rand_edge(&mut rng);
        pair.y_right = rand_edge(&mut rng);
        for label in 0..5 {
            let post = apply_jump_to_edges(&pair, label, theta, axis)?;
            // p = |α·β|²/(2|α|²|β|²): orthogonality to 1e-10 means p < 5e-21
            worst_orth = worst_orth.max(success_probability(&post));
            let fed = apply_feedback(&post, axis);
            worst_feedback = worst_feedback.max((success_probability(&fed) - 0.5).abs());
        }
    }
    // (b) Haar-mean success probability 1/4
    let samples = match scale {
        Scale::Desk => 20_000,
        Scale::Full => 100_000,
    };
    let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let mut pair = EdgeStatePair::basis(0, 0, 0, 0, 4, 4);
        pair.alpha = rand_edge(&mut rng);
        pair.beta = rand_edge(&mut rng);
        let p = success_probability(&pair);
        sum += p;
        sumsq += p * p;
    }
    let mean = sum / samples as f64;
    let se = ((sumsq / samples as f64 - mean * mean) / samples as f64).sqrt();
    let mean_dev = (mean - 0.25).abs() / se;
    // (c) one-site false-negative retry
    let retry = false_negative_retry_probability(1);
    let retry_exact = (retry - 2.0 / 9.0).abs();
    // (d) edge-level p against dense overlaps
    let spec = aklt_spec();
    let mut worst_dense = 0.0f64;
    for m in 2..=3usize {
        for _ in 0..6 {
            let mut pair = EdgeStatePair::basis(0, 0, 0, 0, m, m);
            pair.alpha = rand_edge(&mut rng);
            pair.beta = rand_edge(&mut rng);
            pair.x_left = rand_edge(&mut rng);
            pair.y_right = rand_edge(&mut rng);
            let p_exact = success_probability_exact(&pair);
            let psi0 = dense_pair_state(&spec, &pair)?;
            let psif = dense_joined_state(&spec, &pair)?;
            let n0: f64 = psi0.iter().map(|x| x.norm_sqr()).sum();
            let nf: f64 = psif.iter().map(|x| x.norm_sqr()).sum();
            let amp: C64 = psif.iter().zip(psi0.iter()).map(|(f, i)| f.conj() * i).sum();
            worst_dense = worst_dense.max((amp.norm_sqr() / (n0 * nf) - p_exact).abs());
        }
    }
    let pass = worst_orth < 5e-21
        && worst_feedback < 1e-9
        && mean_dev < 3.0
        && retry_exact == 0.0
        && worst_dense < 1e-10;
    ok(
        "post-jump orthogonality 1e-10; feedback p=1/2 (1e-9); Haar mean 1/4 +- 3 SE; retry 2/9 exact; dense match 1e-10 (m <= 3)",
        format!(
            "orth p {worst_orth:.1e}; feedback dev {worst_feedback:.1e}; mean {mean:.5} ({mean_dev:.2} SE); retry dev {retry_exact:.1e}; dense dev {worst_dense:.1e}"
        ),
        pass,
    )
}

// ---------------------------------------------------------------------
// 8. merging-tree scaling and imperfect-detection analytics

fn c8_scaling_law(scale: Scale, seed: u64) -> Result<Outcome> {
    let model = ScalingModel {
        p: 2.0 / 9.0,
        tau_c: 1.0,
        tau_r: 1.0,
        t0: 0.0,
        n0: 16.0,
    };
    let (levels, trees) = match scale {
        Scale::Desk => (10u32, 120u64),
        Scale::Full => (12u32, 400u64), // 16 * 2^12 = 65536 final sites
    };
    let samples: Vec<_> = (0..trees)
        .into_par_iter()
        .map(|k| monte_carlo_tree(&model, levels, seed.wrapping_add(k)))
        .collect();
    let t_mean = samples.iter().map(|s| s.lineage_time).sum::<f64>() / trees as f64;
    let len_mean = samples.iter().map(|s| s.final_length).sum::<f64>() / trees as f64;
    let expect = model.time(len_mean)?;
    let time_rel = (t_mean - expect).abs() / expect;
    let conns: f64 = samples.iter().map(|s| s.connections as f64).sum();
    let discs: f64 = samples.iter().map(|s| s.discarded as f64).sum();
    let per_conn = discs / conns;
    let nc = model.mean_discarded_per_connection();
    let se = (4.0 * (1.0 - model.p) / model.p.powi(2) / conns).sqrt();
    let disc_dev = (per_conn - nc).abs() / se;

    // detection strategy with logarithmically growing verification time
    let m1 = Method1Params {
        eta: 0.8,
        dark_rate: 25.0e-6,
        tau0: 1.0,
        p: 2.0 / 9.0,
    };
    let lengths: Vec<f64> = (5..=20).map(|k| 2f64.powi(k)).collect();
    let curve = method1_scaling_curve(&m1, &model, 1e-4, &lengths)?;
    let mut polylog = curve.last().unwrap().0 >= 1e6;
    let t: Vec<f64> = curve.iter().map(|c| c.1).collect();
    for w in t.windows(3) {
        polylog &= w[2] - w[1] < 3.0 * (w[1] - w[0]);
    }
    let (n_lo, t_lo) = (curve[0].0, curve[0].1);
    let last = curve.last().unwrap();
    polylog &= last.1 / t_lo < 0.01 * last.0 / n_lo;
    let mut budget = true;
    for &(n, _, p_keep, fidelity) in &curve {
        budget &= p_keep > 0.0 && 1.0 - fidelity <= 1.000_001 * model.n0 * 1e-4 / n;
    }
    ok(
        format!(
            "tree time within 5% of closed form at n = {:.0}; discards/connection = 7 +- 3 SE; verified protocol polylog through n = 1e6 at error budget 1e-4",
            model.n0 * 2f64.powi(levels as i32)
        ),
        format!(
            "time rel dev {time_rel:.3}; discards {per_conn:.3} ({disc_dev:.2} SE); polylog {polylog}, budget kept {budget}"
        ),
        time_rel < 0.05 && disc_dev < 3.0 && polylog && budget,
    )
}

// ---------------------------------------------------------------------
// 9. driven-pair decay rate against the six-amplitude integrator

fn c9_rydberg(_: Scale, _: u64) -> Result<Outcome> {
    let mut worst_fit = 0.0f64;
    for &g in &[0.02, 0.05, 0.1] {
        for &u in &[0.5, 1.0, 2.0] {
            let p = EITParams::symmetric(g, 1.0, 1.0, u);
            let target = effective_rate(&p, true).gamma_dd;
            let fit = two_atom_ode_oracle(&p, 3.0 / target)?;
            worst_fit = worst_fit.max((fit / target - 1.0).abs());
        }
    }
    // the leading relative deviation of the loss-factor approximation is
    // (g²/Ω²)·|3(γ²/4)/(Ω²+γ²/4) − 2|, so the 1% bound needs γ ≳ 1.5Ω
    let mut worst_chi = 0.0f64;
    for &gamma in &[1.5, 2.0, 3.0] {
        for &gfrac in &[0.02, 0.05, 0.1] {
            let p = EITParams::symmetric(gfrac, 1.0, gamma, 1.0);
            let (ce, ca) = (chi_exact(&p), chi_approx(&p));
            worst_chi = worst_chi.max((ce / ca - 1.0).abs());
        }
    }
    ok(
        "integrator rate within 10% of closed form on 3x3 grid; exact loss factor within 1% of 1/gamma + gamma/(4 omega^2) for g <= 0.1 omega, gamma >= 1.5 omega",
        format!("worst rate mismatch {:.1}%; worst loss-factor mismatch {:.2}%", 100.0 * worst_fit, 100.0 * worst_chi),
        worst_fit < 0.10 && worst_chi < 0.01,
    )
}

// ---------------------------------------------------------------------
// 10. effective temperature and imperfection sweeps

fn c10_teff(scale: Scale, _: u64) -> Result<Outcome> {
    // temperature strictly decreasing in the steady-state fidelity
    let fs = [0.5, 0.7, 0.9, 0.99];
    let ts: Vec<f64> = fs
        .iter()
        .map(|&f| effective_temperature(f, 4, Boundary::Periodic).map(|t| t.t_eff))
        .collect::<Result<_>>()?;
    let decreasing = ts.windows(2).all(|w| w[1] < w[0]);

    // fidelity monotone in the dephasing time without long-range losses
    let t2s: Vec<f64> = match scale {
        Scale::Desk => vec![1e2, 1e3, 1e4],
        Scale::Full => vec![1e2, 1e3, 1e4, 1e5],
    };
    let f_off: Vec<f64> = t2s
        .iter()
        .map(|&t2| imperfect_steady_state(4, t2, None, 6561))
        .collect::<Result<_>>()?;
    let monotone = f_off.windows(2).all(|w| w[1] > w[0]);

    // with long-range losses the fidelity saturates strictly below 1
    let eit = EITParams::symmetric(0.05, 1.0, 1.0, 1.0);
    let f_on: Vec<f64> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&t2| {
            let g = ImperfectionSpec::linear_chain(4, t2, 1.0, eit);
            imperfect_steady_state(4, t2, Some(&g), 6561)
        })
        .collect::<Result<_>>()?;
    let saturated = (f_on[2] - f_on[1]).abs() < 5.0 * (f_on[1] - f_on[0]).abs().max(1e-12)
        && f_on[2] < 1.0 - 1e-6
        && f_on[2] > f_off[0];
    ok(
        "T_eff strictly decreasing in F_ss; F_ss(T2) increasing without long-range losses and saturating below 1 with them",
        format!(
            "T_eff {:?}; F_off {:?}; F_on {:?}",
            ts.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>(),
            f_off.iter().map(|x| (x * 1e5).round() / 1e5).collect::<Vec<_>>(),
            f_on.iter().map(|x| (x * 1e7).round() / 1e7).collect::<Vec<_>>()
        ),
        decreasing && monotone && saturated,
    )
}

// ---------------------------------------------------------------------
// 11. minimal jump sets and the two dark-state jump choices

fn c11_jump_sets(scale: Scale, seed: u64) -> Result<Outcome> {
    // averaged stretched state is the penalized projector over its dim
    let rep = GroupRep::so3_two_site_spin1(24);
    let mut psi = CVec::zeros(9);
    psi[0] = cr(1.0);
    let q = average_q(&psi, &rep);
    let p2 = total_j_projectors().projector(2).clone();
    let proj_dev = max_abs(&(&q - &p2.mapv(|z| z / cr(5.0))));
    let bright = crate::symmetry_general::bright_manifold(&p2, true)?;
    let restricted = rep.restricted(&bright);
    let decomp = decompose_rep(&restricted, seed)?;
    let aklt_k = decomp.k_min();
    let aklt_plan = construct_jump_set(&decomp, &restricted)?;

    // two-component dark family: sign-symmetric pair rep
    let ghz_rep = crate::symmetry_general::ghz_two_site_rep();
    let ghz_proj = crate::symmetry_general::ghz_bond_projector();
    let ghz_bright = crate::symmetry_general::bright_manifold(&ghz_proj, true)?;
    let ghz_restricted = ghz_rep.restricted(&ghz_bright);
    let ghz_decomp = decompose_rep(&ghz_restricted, seed ^ 0xabc)?;
    let ghz_k = ghz_decomp.k_min();

    // randomized saturation suite
    let instances = match scale {
        Scale::Desk => 20u64,
        Scale::Full => 100u64,
    };
    let suite: Vec<Result<bool>> = (0..instances)
        .into_par_iter()
        .map(|inst| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(177 + inst));
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
            let decomp = decompose_rep(&rep, seed.wrapping_add(9000 + inst))?;
            let expect_k = blocks
                .iter()
                .map(|&(two_j, k)| k.div_ceil(two_j + 1))
                .max()
                .unwrap();
            let plan = construct_jump_set(&decomp, &rep)?;
            Ok(decomp.k_min() == expect_k
                && plan.vectors.len() == expect_k
                && plan.coverage_rank == dim)
        })
        .collect();
    let suite_ok = suite.iter().filter(|r| matches!(r, Ok(true))).count();

    // the two printed jump choices behave differently under connection
    let trials = match scale {
        Scale::Desk => 60,
        Scale::Full => 150,
    };
    let product_runs = ghz_connection_check(GhzJump::ProductPair, 3, GhzInit::Cat, trials, seed)?;
    let chiral_runs = ghz_connection_check(GhzJump::ChiralPair, 3, GhzInit::Cat, trials, seed)?;
    let product_classes = product_runs.iter().all(|r| {
        if r.jumps > 0 {
            matches!(r.outcome, GhzOutcome::Product(_))
        } else {
            matches!(r.outcome, GhzOutcome::Cat(_))
        }
    });
    let product_jumped = product_runs.iter().filter(|r| r.jumps > 0).count();
    let chiral_classes = chiral_runs
        .iter()
        .all(|r| matches!(r.outcome, GhzOutcome::Cat(_)));
    let chiral_jumped = chiral_runs.iter().filter(|r| r.jumps > 0).count();

    let pass = proj_dev < 1e-6
        && aklt_k == 1
        && aklt_plan.coverage_rank == 5
        && ghz_k == 1
        && suite_ok == instances as usize
        && product_classes
        && chiral_classes
        && product_jumped > 0
        && chiral_jumped > 0;
    ok(
        format!("k_min = 1 for both printed models (projector to 1e-6); {instances}/{instances} randomized saturations; jump choices separate the two outcome classes"),
        format!(
            "projector dev {proj_dev:.1e}; k_min {aklt_k}/{ghz_k}; suite {suite_ok}/{instances}; product jumps->product {} ({product_jumped} fired); chiral stays coherent {} ({chiral_jumped} fired)",
            product_classes, chiral_classes
        ),
        pass,
    )
}

// ---------------------------------------------------------------------
// 12. finite-size gap of the dense ring parent model

fn c12_gap(_: Scale, seed: u64) -> Result<Outcome> {
    let n = 8usize;
    let h = parent_hamiltonian(n, Boundary::Periodic)?;
    let g = ground_basis(n, Boundary::Periodic)?;
    let g: Array1<f64> = g[0].mapv(|x| x.re); // the ring ground state is real
    let gn = g.dot(&g).sqrt();
    let g = g.mapv(|x| x / gn);
    let e0 = g.dot(&h.dot(&g));
    // shifted inverse iteration pulls in the bottom of the spectrum;
    // the first excited level is what remains after projecting out g
    let probes = near_null_vectors_real(&h, e0 + 0.15, 5, 60, seed);
    let mut gap = f64::INFINITY;
    for (_, v) in &probes {
        let overlap = g.dot(v);
        let w = v - &g.mapv(|x| x * overlap);
        let wn = w.dot(&w).sqrt();
        if wn > 1e-6 {
            let w = w.mapv(|x| x / wn);
            let e = w.dot(&h.dot(&w));
            if e - e0 > 1e-9 {
                gap = gap.min(e - e0);
            }
        }
    }
    // the bond term is 2P₂ − 2/3; quote the gap in single-projector units
    let gap = gap / 2.0;
    let sma = 10.0 / 27.0;
    ok(
        format!("ring n=8 gap in [0.30, 0.40] in bond-projector units (single-mode estimate {sma:.4})"),
        format!("gap {gap:.6}"),
        (0.30..=0.40).contains(&gap),
    )
}
