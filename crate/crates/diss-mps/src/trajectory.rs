//! Stochastic-wavefunction (quantum jump) engine with two backends, a
//! dense master-equation oracle, observable tracking, and preparation-time
//! fits.
//!
//! Between jumps the unnormalized wavefunction evolves under
//! −iH_eff = −(1/2)ΣΓ_μ c_μ†c_μ (the simulations run in the rotating
//! frame, H = 0). A uniform draw r sets the jump time through the norm
//! decay ‖ψ̃(t)‖² = r; the jump channel is sampled proportional to
//! Γ_μ‖c_μψ‖².

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cr, dagger, eigh_real, inner, norm2, CMat, CVec, C64};
use crate::liouvillian::{LiouvillianSpec, SiteTag};
use crate::many_body::{apply_single_site, apply_two_site};
use crate::spin_algebra::D_PHYS;

#[derive(Clone, Debug)]
pub enum InitialState {
    /// Uniformly sampled computational product basis state per trajectory
    /// (an exact purification of the maximally mixed state).
    MaximallyMixed,
    /// Fixed product state given by per-site kets.
    Product(Vec<usize>),
    /// Arbitrary dense state vector.
    State(CVec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Fixed-step fourth-order Runge-Kutta on the unnormalized state.
    Rk4,
    /// Eigendecomposition of ΣΓc†c once per chain; exact norm decay and
    /// exact jump-time solving between jumps.
    Spectral,
}

#[derive(Clone, Debug)]
pub struct TrajectoryConfig {
    pub spec: LiouvillianSpec,
    pub t_max: f64,
    pub dt: f64,
    pub seed: u64,
    pub initial: InitialState,
    pub record_every: usize,
    pub backend: Backend,
}

#[derive(Clone, Debug)]
pub struct JumpEvent {
    pub time: f64,
    pub label: String,
    pub site: SiteTag,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub energy_density: Option<Vec<f64>>,
    pub jumps: Vec<JumpEvent>,
}

#[derive(Clone, Debug)]
pub struct EnsembleRecord {
    pub times: Vec<f64>,
    pub f_mean: Vec<f64>,
    pub f_stderr: Vec<f64>,
    pub e_mean: Option<Vec<f64>>,
    pub e_stderr: Option<Vec<f64>>,
    pub jumps_cum_mean: Vec<f64>,
}

/// What to track along a trajectory: fidelity against an orthonormal
/// ground basis, and optionally the bond-energy density.
#[derive(Clone)]
pub struct Observables {
    pub ground: Vec<CVec>,
    /// (9×9 bond term, bond site pairs); energy density = ⟨H⟩/#bonds.
    pub energy: Option<(CMat, Vec<(usize, usize)>)>,
}

impl Observables {
    pub fn fidelity_only(ground: Vec<CVec>) -> Self {
        Observables {
            ground,
            energy: None,
        }
    }

    fn fidelity(&self, psi: &CVec) -> f64 {
        let nsq = psi.iter().map(|x| x.norm_sqr()).sum::<f64>();
        self.ground
            .iter()
            .map(|g| inner(g, psi).norm_sqr())
            .sum::<f64>()
            / nsq
    }

    fn energy_density(&self, psi: &CVec, n: usize) -> Option<f64> {
        let (term, bonds) = self.energy.as_ref()?;
        let nsq = psi.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let mut e = 0.0;
        for &(i, j) in bonds {
            let hit = apply_two_site(term, psi, n, i, j, D_PHYS);
            e += inner(psi, &hit).re;
        }
        Some(e / (bonds.len() as f64) / nsq)
    }
}

struct Engine {
    n: usize,
    /// merged −(1/2)ΣΓc†c kernels per placement
    damp_bonds: Vec<((usize, usize), CMat)>,
    damp_sites: Vec<(usize, CMat)>,
    /// individual jump channels: placement, matrix, rate, label, tag
    channels: Vec<(Placement, CMat, f64, String, SiteTag)>,
}

#[derive(Clone, Copy)]
enum Placement {
    Pair(usize, usize),
    Single(usize),
}

impl Engine {
    fn new(spec: &LiouvillianSpec) -> Self {
        use std::collections::BTreeMap;
        let mut bond_damp: BTreeMap<(usize, usize), CMat> = BTreeMap::new();
        let mut site_damp: BTreeMap<usize, CMat> = BTreeMap::new();
        let mut channels = Vec::new();
        for j in &spec.jumps {
            let cc = dagger(&j.matrix)
                .dot(&j.matrix)
                .mapv(|x| x * cr(-0.5 * j.rate));
            let placement = match j.site {
                SiteTag::Bond(k) => {
                    let sites = spec.bond_sites(k);
                    *bond_damp
                        .entry(sites)
                        .or_insert_with(|| CMat::zeros((9, 9))) += &cc;
                    Placement::Pair(sites.0, sites.1)
                }
                SiteTag::LeftEdge => {
                    *site_damp.entry(0).or_insert_with(|| CMat::zeros((3, 3))) += &cc;
                    Placement::Single(0)
                }
                SiteTag::RightEdge => {
                    *site_damp
                        .entry(spec.n - 1)
                        .or_insert_with(|| CMat::zeros((3, 3))) += &cc;
                    Placement::Single(spec.n - 1)
                }
                SiteTag::EveryBond => panic!("template jump in an expanded spec"),
            };
            channels.push((placement, j.matrix.clone(), j.rate, j.label.clone(), j.site));
        }
        Engine {
            n: spec.n,
            damp_bonds: bond_damp.into_iter().collect(),
            damp_sites: site_damp.into_iter().collect(),
            channels,
        }
    }

    /// −iH_eff ψ = −(1/2)ΣΓc†c ψ
    fn apply_generator(&self, psi: &CVec) -> CVec {
        let mut out: CVec = Array1::zeros(psi.len());
        for ((i, j), q) in &self.damp_bonds {
            out = out + apply_two_site(q, psi, self.n, *i, *j, D_PHYS);
        }
        for (i, q) in &self.damp_sites {
            out = out + apply_single_site(q, psi, self.n, *i, D_PHYS);
        }
        out
    }

    fn apply_channel(&self, k: usize, psi: &CVec) -> CVec {
        match self.channels[k].0 {
            Placement::Pair(i, j) => apply_two_site(&self.channels[k].1, psi, self.n, i, j, D_PHYS),
            Placement::Single(i) => apply_single_site(&self.channels[k].1, psi, self.n, i, D_PHYS),
        }
    }

    /// choose a channel with probability ∝ Γ_μ‖c_μψ‖²; returns the channel
    /// index and the (unnormalized) post-jump state
    fn sample_jump(&self, psi: &CVec, rng: &mut ChaCha8Rng) -> (usize, CVec) {
        let mut hits = Vec::with_capacity(self.channels.len());
        let mut weights = Vec::with_capacity(self.channels.len());
        for k in 0..self.channels.len() {
            let hit = self.apply_channel(k, psi);
            let w = self.channels[k].2 * hit.iter().map(|x| x.norm_sqr()).sum::<f64>();
            weights.push(w);
            hits.push(hit);
        }
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "jump fired from a dark state");
        let mut draw = rng.gen_range(0.0..total);
        for (k, w) in weights.iter().enumerate() {
            if draw < *w || k == weights.len() - 1 {
                return (k, hits.swap_remove(k));
            }
            draw -= w;
        }
        unreachable!()
    }

    fn rk4_step(&self, psi: &CVec, dt: f64) -> CVec {
        let k1 = self.apply_generator(psi);
        let k2 = self.apply_generator(&(psi + &k1.mapv(|x| x * cr(dt / 2.0))));
        let k3 = self.apply_generator(&(psi + &k2.mapv(|x| x * cr(dt / 2.0))));
        let k4 = self.apply_generator(&(psi + &k3.mapv(|x| x * cr(dt))));
        psi + &(k1 + k2.mapv(|x| x * cr(2.0)) + k3.mapv(|x| x * cr(2.0)) + k4)
            .mapv(|x| x * cr(dt / 6.0))
    }
}

fn initial_state(init: &InitialState, n: usize, rng: &mut ChaCha8Rng) -> CVec {
    let dim = D_PHYS.pow(n as u32);
    match init {
        InitialState::MaximallyMixed => {
            let idx = rng.gen_range(0..dim);
            let mut psi: CVec = Array1::zeros(dim);
            psi[idx] = cr(1.0);
            psi
        }
        InitialState::Product(kets) => {
            assert_eq!(kets.len(), n);
            let idx = crate::many_body::index_of(kets, D_PHYS);
            let mut psi: CVec = Array1::zeros(dim);
            psi[idx] = cr(1.0);
            psi
        }
        InitialState::State(v) => {
            let nv = norm2(v);
            v.mapv(|x| x / cr(nv))
        }
    }
}

/// Run a single quantum-jump trajectory with the RK4 backend.
pub fn run_trajectory(cfg: &TrajectoryConfig, obs: &Observables) -> Result<TrajectoryRecord> {
    match cfg.backend {
        Backend::Rk4 => run_trajectory_rk4(cfg, obs),
        Backend::Spectral => {
            let core = SpectralCore::build(&cfg.spec)?;
            run_trajectory_spectral(cfg, obs, &core)
        }
    }
}

fn run_trajectory_rk4(cfg: &TrajectoryConfig, obs: &Observables) -> Result<TrajectoryRecord> {
    let engine = Engine::new(&cfg.spec);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut psi = initial_state(&cfg.initial, cfg.spec.n, &mut rng);
    let mut r: f64 = rng.gen_range(0.0..1.0);
    let mut t = 0.0;
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    let mut times = Vec::new();
    let mut fid_rec = Vec::new();
    let mut energy = Vec::new();
    let mut jumps = Vec::new();

    times.push(0.0);
    fid_rec.push(obs.fidelity(&psi));
    if let Some(e) = obs.energy_density(&psi, cfg.spec.n) {
        energy.push(e);
    }

    for step in 1..=steps {
        let n0: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        let mut next = engine.rk4_step(&psi, cfg.dt);
        let mut n1: f64 = next.iter().map(|x| x.norm_sqr()).sum();
        if (n0 - n1) / n0 > 0.05 {
            return Err(Error::StepTooCoarse(format!(
                "norm loss {:.3} in one step; reduce dt",
                (n0 - n1) / n0
            )));
        }
        if n1 < r {
            // linear interpolation of ‖ψ̃‖² locates the jump inside the step
            let frac = ((n0 - r) / (n0 - n1)).clamp(0.0, 1.0);
            let tj = t + frac * cfg.dt;
            let at_jump = engine.rk4_step(&psi, frac * cfg.dt);
            let (k, hit) = engine.sample_jump(&at_jump, &mut rng);
            jumps.push(JumpEvent {
                time: tj,
                label: engine.channels[k].3.clone(),
                site: engine.channels[k].4,
            });
            let nh = norm2(&hit);
            let renorm = hit.mapv(|x| x / cr(nh));
            // finish the remainder of the step from the post-jump state
            next = engine.rk4_step(&renorm, (1.0 - frac) * cfg.dt);
            n1 = next.iter().map(|x| x.norm_sqr()).sum();
            r = rng.gen_range(0.0..n1);
        }
        psi = next;
        t = step as f64 * cfg.dt;
        if step % cfg.record_every == 0 {
            times.push(t);
            fid_rec.push(obs.fidelity(&psi));
            if let Some(e) = obs.energy_density(&psi, cfg.spec.n) {
                energy.push(e);
            }
        }
    }
    Ok(TrajectoryRecord {
        times,
        fidelity: fid_rec,
        energy_density: if energy.is_empty() { None } else { Some(energy) },
        jumps,
    })
}

/// Shared eigendecomposition of M = ΣΓ_μ c_μ†c_μ (real symmetric for the
/// jump families used here). Built once per chain and shared read-only by
/// all trajectory workers.
pub struct SpectralCore {
    pub lambda: Array1<f64>,
    pub v: Array2<f64>,
    engine: Engine,
}

impl SpectralCore {
    pub fn build(spec: &LiouvillianSpec) -> Result<Self> {
        let dim = D_PHYS.pow(spec.n as u32);
        let mut m = Array2::<f64>::zeros((dim, dim));
        // accumulate ΣΓc†c by embedding the small c†c per jump; never
        // materialize the full embedded jump operators all at once
        for j in &spec.jumps {
            let cc = dagger(&j.matrix).dot(&j.matrix).mapv(|x| x * cr(j.rate));
            let max_im = cc.iter().map(|x| x.im.abs()).fold(0.0f64, f64::max);
            if max_im > 1e-12 {
                return Err(crate::error::Error::InvalidModel(format!(
                    "jump damping has imaginary entries up to {max_im}"
                )));
            }
            let cc_re = cc.mapv(|x| x.re);
            let full = match j.site {
                SiteTag::Bond(k) => {
                    let (a, b) = spec.bond_sites(k);
                    crate::many_body::embed_two_site_real(&cc_re, spec.n, a, b, D_PHYS)
                }
                SiteTag::LeftEdge => {
                    crate::many_body::embed_single_site(&cc, spec.n, 0, D_PHYS).mapv(|x| x.re)
                }
                SiteTag::RightEdge => {
                    crate::many_body::embed_single_site(&cc, spec.n, spec.n - 1, D_PHYS)
                        .mapv(|x| x.re)
                }
                SiteTag::EveryBond => panic!("template jump in an expanded spec"),
            };
            m = m + full;
        }
        let (lambda, v) = eigh_real(&m);
        Ok(SpectralCore {
            lambda,
            v,
            engine: Engine::new(spec),
        })
    }

    fn to_modes(&self, psi: &CVec) -> CVec {
        let re = psi.mapv(|x| x.re);
        let im = psi.mapv(|x| x.im);
        let ar = self.v.t().dot(&re);
        let ai = self.v.t().dot(&im);
        Array1::from_iter(ar.iter().zip(ai.iter()).map(|(&x, &y)| C64::new(x, y)))
    }

    fn from_modes(&self, a: &CVec) -> CVec {
        let re = a.mapv(|x| x.re);
        let im = a.mapv(|x| x.im);
        let vr = self.v.dot(&re);
        let vi = self.v.dot(&im);
        Array1::from_iter(vr.iter().zip(vi.iter()).map(|(&x, &y)| C64::new(x, y)))
    }

    /// squared norm after evolving modes a for time t
    fn norm_sq(&self, a: &CVec, t: f64) -> f64 {
        a.iter()
            .zip(self.lambda.iter())
            .map(|(x, &l)| x.norm_sqr() * (-l * t).exp())
            .sum()
    }

    /// solve ‖ψ̃(t)‖² = r by bisection on [0, horizon]; None if no
    /// crossing before the horizon
    fn jump_time(&self, a: &CVec, r: f64, horizon: f64) -> Option<f64> {
        if self.norm_sq(a, horizon) >= r {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, horizon);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.norm_sq(a, mid) >= r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * horizon.max(1.0) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn evolve_modes(&self, a: &CVec, t: f64) -> CVec {
        Array1::from_iter(
            a.iter()
                .zip(self.lambda.iter())
                .map(|(x, &l)| x * cr((-0.5 * l * t).exp())),
        )
    }
}

/// Spectral-backend trajectory: exact inter-jump evolution, fidelity
/// recorded against mode-projected ground vectors, no energy tracking.
pub fn run_trajectory_spectral(
    cfg: &TrajectoryConfig,
    obs: &Observables,
    core: &SpectralCore,
) -> Result<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let psi0 = initial_state(&cfg.initial, cfg.spec.n, &mut rng);
    let g_modes: Vec<CVec> = obs.ground.iter().map(|g| core.to_modes(g)).collect();

    let record_dt = cfg.dt * cfg.record_every as f64;
    let n_records = (cfg.t_max / record_dt).round() as usize;
    let mut times = Vec::with_capacity(n_records + 1);
    let mut fid = Vec::with_capacity(n_records + 1);
    let mut jumps = Vec::new();

    let mut a = core.to_modes(&psi0);
    let mut seg_start = 0.0; // segment origin time
    let mut r: f64 = rng.gen_range(0.0..1.0);
    let mut next_jump = core.jump_time(&a, r, cfg.t_max - seg_start).map(|dt| seg_start + dt);

    let fidelity_at = |a: &CVec, dt: f64, core: &SpectralCore| -> f64 {
        let nsq = core.norm_sq(a, dt);
        let mut f = 0.0;
        for g in &g_modes {
            let amp: C64 = g
                .iter()
                .zip(a.iter())
                .zip(core.lambda.iter())
                .map(|((gk, ak), &l)| gk.conj() * ak * cr((-0.5 * l * dt).exp()))
                .sum();
            f += amp.norm_sqr();
        }
        f / nsq
    };

    for j in 0..=n_records {
        let t = j as f64 * record_dt;
        // process all jumps before this record time
        while let Some(tj) = next_jump {
            if tj > t {
                break;
            }
            let at_jump = core.from_modes(&core.evolve_modes(&a, tj - seg_start));
            let (k, hit) = core.engine.sample_jump(&at_jump, &mut rng);
            jumps.push(JumpEvent {
                time: tj,
                label: core.engine.channels[k].3.clone(),
                site: core.engine.channels[k].4,
            });
            let nh = norm2(&hit);
            a = core.to_modes(&hit.mapv(|x| x / cr(nh)));
            seg_start = tj;
            r = rng.gen_range(0.0..1.0);
            next_jump = core
                .jump_time(&a, r, cfg.t_max - seg_start)
                .map(|dt| seg_start + dt);
        }
        times.push(t);
        fid.push(fidelity_at(&a, t - seg_start, core));
    }
    Ok(TrajectoryRecord {
        times,
        fidelity: fid,
        energy_density: None,
        jumps,
    })
}

/// Ensemble average over `count` trajectories with seeds seed+k, run in
/// parallel; standard errors from the per-trajectory spread.
pub fn run_ensemble(
    cfg: &TrajectoryConfig,
    obs: &Observables,
    count: usize,
) -> Result<EnsembleRecord> {
    let core = match cfg.backend {
        Backend::Spectral => Some(SpectralCore::build(&cfg.spec)?),
        Backend::Rk4 => None,
    };
    let records: Vec<TrajectoryRecord> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(k as u64);
            match &core {
                Some(core) => run_trajectory_spectral(&c, obs, core),
                None => run_trajectory_rk4(&c, obs),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(average_records(&records))
}

pub fn average_records(records: &[TrajectoryRecord]) -> EnsembleRecord {
    let m = records.len() as f64;
    let times = records[0].times.clone();
    let npts = times.len();
    let mut f_mean = vec![0.0; npts];
    let mut f2 = vec![0.0; npts];
    let has_energy = records[0].energy_density.is_some();
    let mut e_mean = vec![0.0; npts];
    let mut e2 = vec![0.0; npts];
    let mut jumps_cum = vec![0.0; npts];
    for r in records {
        for (i, &f) in r.fidelity.iter().enumerate() {
            f_mean[i] += f;
            f2[i] += f * f;
        }
        if let Some(e) = &r.energy_density {
            for (i, &v) in e.iter().enumerate() {
                e_mean[i] += v;
                e2[i] += v * v;
            }
        }
        for (i, &t) in times.iter().enumerate() {
            jumps_cum[i] += r.jumps.iter().filter(|j| j.time <= t).count() as f64;
        }
    }
    let finish = |mean: &mut Vec<f64>, sq: &Vec<f64>| -> Vec<f64> {
        let mut se = vec![0.0; npts];
        for i in 0..npts {
            mean[i] /= m;
            let var = (sq[i] / m - mean[i] * mean[i]).max(0.0);
            se[i] = (var / m).sqrt();
        }
        se
    };
    let f_stderr = finish(&mut f_mean, &f2);
    let e_stderr = finish(&mut e_mean, &e2);
    for v in jumps_cum.iter_mut() {
        *v /= m;
    }
    EnsembleRecord {
        times,
        f_mean,
        f_stderr,
        e_mean: if has_energy { Some(e_mean) } else { None },
        e_stderr: if has_energy { Some(e_stderr) } else { None },
        jumps_cum_mean: jumps_cum,
    }
}

/// Trajectory-averaged density matrices at the record times, with a
/// batch-means trace-distance standard error against the running mean.
pub fn ensemble_density_matrices(
    cfg: &TrajectoryConfig,
    obs: &Observables,
    count: usize,
    batches: usize,
) -> Result<(Vec<f64>, Vec<CMat>, Vec<Vec<CMat>>)> {
    let dim = D_PHYS.pow(cfg.spec.n as u32);
    let core = match cfg.backend {
        Backend::Spectral => Some(SpectralCore::build(&cfg.spec)?),
        Backend::Rk4 => None,
    };
    let per_batch = count / batches;
    assert!(per_batch > 0);
    let record_dt = cfg.dt * cfg.record_every as f64;
    let n_records = (cfg.t_max / record_dt).round() as usize + 1;
    let batch_rhos: Vec<Vec<CMat>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc: Vec<CMat> = (0..n_records).map(|_| CMat::zeros((dim, dim))).collect();
            for k in 0..per_batch {
                let mut c = cfg.clone();
                c.seed = cfg.seed.wrapping_add((b * per_batch + k) as u64);
                let states = match &core {
                    Some(core) => trajectory_states_spectral(&c, core),
                    None => trajectory_states_rk4(&c),
                }
                .expect("trajectory failed");
                for (i, psi) in states.iter().enumerate() {
                    let nsq: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
                    for r in 0..dim {
                        for s in 0..dim {
                            acc[i][(r, s)] += psi[r] * psi[s].conj() / cr(nsq);
                        }
                    }
                }
            }
            acc.into_iter()
                .map(|a| a.mapv(|x| x / cr(per_batch as f64)))
                .collect()
        })
        .collect();
    let times: Vec<f64> = (0..n_records).map(|j| j as f64 * record_dt).collect();
    let mut mean: Vec<CMat> = (0..n_records).map(|_| CMat::zeros((dim, dim))).collect();
    for b in &batch_rhos {
        for (i, r) in b.iter().enumerate() {
            mean[i] = &mean[i] + &r.mapv(|x| x / cr(batches as f64));
        }
    }
    let _ = obs;
    Ok((times, mean, batch_rhos))
}

fn trajectory_states_rk4(cfg: &TrajectoryConfig) -> Result<Vec<CVec>> {
    // same walk as run_trajectory_rk4, but storing states at record times
    let engine = Engine::new(&cfg.spec);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut psi = initial_state(&cfg.initial, cfg.spec.n, &mut rng);
    let mut r: f64 = rng.gen_range(0.0..1.0);
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    let mut out = vec![psi.clone()];
    for step in 1..=steps {
        let n0: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        let mut next = engine.rk4_step(&psi, cfg.dt);
        let n1: f64 = next.iter().map(|x| x.norm_sqr()).sum();
        if n1 < r {
            let frac = ((n0 - r) / (n0 - n1)).clamp(0.0, 1.0);
            let at_jump = engine.rk4_step(&psi, frac * cfg.dt);
            let (_, hit) = engine.sample_jump(&at_jump, &mut rng);
            let nh = norm2(&hit);
            let renorm = hit.mapv(|x| x / cr(nh));
            next = engine.rk4_step(&renorm, (1.0 - frac) * cfg.dt);
            let n1b: f64 = next.iter().map(|x| x.norm_sqr()).sum();
            r = rng.gen_range(0.0..n1b);
        }
        psi = next;
        if step % cfg.record_every == 0 {
            out.push(psi.clone());
        }
    }
    Ok(out)
}

fn trajectory_states_spectral(cfg: &TrajectoryConfig, core: &SpectralCore) -> Result<Vec<CVec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let psi0 = initial_state(&cfg.initial, cfg.spec.n, &mut rng);
    let record_dt = cfg.dt * cfg.record_every as f64;
    let n_records = (cfg.t_max / record_dt).round() as usize;
    let mut a = core.to_modes(&psi0);
    let mut seg_start = 0.0;
    let mut r: f64 = rng.gen_range(0.0..1.0);
    let mut next_jump = core.jump_time(&a, r, cfg.t_max).map(|dt| seg_start + dt);
    let mut out = Vec::with_capacity(n_records + 1);
    for j in 0..=n_records {
        let t = j as f64 * record_dt;
        while let Some(tj) = next_jump {
            if tj > t {
                break;
            }
            let at_jump = core.from_modes(&core.evolve_modes(&a, tj - seg_start));
            let (_, hit) = core.engine.sample_jump(&at_jump, &mut rng);
            let nh = norm2(&hit);
            a = core.to_modes(&hit.mapv(|x| x / cr(nh)));
            seg_start = tj;
            r = rng.gen_range(0.0..1.0);
            next_jump = core
                .jump_time(&a, r, cfg.t_max - seg_start)
                .map(|dt| seg_start + dt);
        }
        out.push(core.from_modes(&core.evolve_modes(&a, t - seg_start)));
    }
    Ok(out)
}

/// Dense master-equation propagation on the vectorized density matrix,
/// using the real representation valid for the (real) jump families here.
/// Returns ρ(t) at the given record times.
pub fn master_equation_evolve(
    spec: &LiouvillianSpec,
    rho0: &CMat,
    t_max: f64,
    dt: f64,
    record_every: usize,
) -> Result<(Vec<f64>, Vec<CMat>)> {
    let dim = D_PHYS.pow(spec.n as u32);
    let mut l = Array2::<f64>::zeros((dim * dim, dim * dim));
    for (full, rate) in spec.embedded_jumps_real()? {
        let cc = full.t().dot(&full);
        // c ρ c†: (c ⊗ c); −½{c†c, ρ}: −½(c†c ⊗ 1 + 1 ⊗ (c†c)ᵀ)
        add_kron_real(&mut l, &full, &full, rate);
        add_kron_eye_real(&mut l, &cc, -0.5 * rate, false);
        add_kron_eye_real(&mut l, &cc.t().to_owned(), -0.5 * rate, true);
    }
    let mut re: Array1<f64> = Array1::from_iter(rho0.iter().map(|x| x.re));
    let mut im: Array1<f64> = Array1::from_iter(rho0.iter().map(|x| x.im));
    let steps = (t_max / dt).round() as usize;
    let mut times = vec![0.0];
    let mut rhos = vec![rho0.clone()];
    let rk4 = |l: &Array2<f64>, v: &Array1<f64>, dt: f64| -> Array1<f64> {
        let k1 = l.dot(v);
        let k2 = l.dot(&(v + &k1.mapv(|x| x * dt / 2.0)));
        let k3 = l.dot(&(v + &k2.mapv(|x| x * dt / 2.0)));
        let k4 = l.dot(&(v + &k3.mapv(|x| x * dt)));
        v + &(k1 + k2.mapv(|x| x * 2.0) + k3.mapv(|x| x * 2.0) + k4).mapv(|x| x * dt / 6.0)
    };
    for step in 1..=steps {
        re = rk4(&l, &re, dt);
        im = rk4(&l, &im, dt);
        if step % record_every == 0 {
            times.push(step as f64 * dt);
            let mut rho = CMat::zeros((dim, dim));
            for r in 0..dim {
                for s in 0..dim {
                    rho[(r, s)] = C64::new(re[r * dim + s], im[r * dim + s]);
                }
            }
            rhos.push(rho);
        }
    }
    Ok((times, rhos))
}

pub(crate) fn add_kron_real(acc: &mut Array2<f64>, a: &Array2<f64>, b: &Array2<f64>, scale: f64) {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    for i1 in 0..ra {
        for j1 in 0..ca {
            let v = a[(i1, j1)] * scale;
            if v == 0.0 {
                continue;
            }
            for i2 in 0..rb {
                for j2 in 0..cb {
                    let w = b[(i2, j2)];
                    if w != 0.0 {
                        acc[(i1 * rb + i2, j1 * cb + j2)] += v * w;
                    }
                }
            }
        }
    }
}

/// acc += scale · (m ⊗ 1) or scale · (1 ⊗ m)
pub(crate) fn add_kron_eye_real(acc: &mut Array2<f64>, m: &Array2<f64>, scale: f64, right: bool) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..d {
            let v = m[(i, j)] * scale;
            if v == 0.0 {
                continue;
            }
            for k in 0..d {
                if right {
                    acc[(k * d + i, k * d + j)] += v;
                } else {
                    acc[(i * d + k, j * d + k)] += v;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreparationFit {
    pub rate: f64,
    pub t_target: f64,
    pub ci90: (f64, f64),
}

/// Fit ln(1−F) to a line over the asymptotic window (default: times after
/// F first exceeds 0.5) and solve for the time where the extrapolation
/// reaches the target fidelity. 90% confidence interval by residual
/// bootstrap.
pub fn fit_preparation_time(
    times: &[f64],
    fidelity: &[f64],
    target: f64,
    window_start: Option<f64>,
) -> Result<PreparationFit> {
    let start = match window_start {
        Some(t) => t,
        None => {
            let idx = fidelity.iter().position(|&f| f > 0.5);
            match idx {
                Some(i) => times[i],
                None => {
                    return Err(Error::FitFailed(
                        "fidelity never exceeded 0.5; no asymptotic window".into(),
                    ))
                }
            }
        }
    };
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(fidelity.iter())
        .filter(|(&t, &f)| t >= start && f < 1.0 && 1.0 - f > 0.0)
        .map(|(&t, &f)| (t, (1.0 - f).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitFailed(format!(
            "only {} usable points in the fit window",
            pts.len()
        )));
    }
    let fit_line = |pts: &[(f64, f64)]| -> (f64, f64) {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let intercept = (sy - slope * sx) / m;
        (slope, intercept)
    };
    let (slope, intercept) = fit_line(&pts);
    if slope >= 0.0 {
        return Err(Error::FitFailed("nonnegative decay slope".into()));
    }
    let target_log = (1.0 - target).ln();
    let t_target = (target_log - intercept) / slope;

    // residual bootstrap
    let residuals: Vec<f64> = pts
        .iter()
        .map(|&(t, y)| y - (slope * t + intercept))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut t_samples = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let resampled: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(t, _)| {
                let r = residuals[rng.gen_range(0..residuals.len())];
                (t, slope * t + intercept + r)
            })
            .collect();
        let (s, b) = fit_line(&resampled);
        if s < 0.0 {
            t_samples.push((target_log - b) / s);
        }
    }
    t_samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ci90 = if t_samples.len() >= 20 {
        (
            t_samples[t_samples.len() / 20],
            t_samples[t_samples.len() - 1 - t_samples.len() / 20],
        )
    } else {
        (t_target, t_target)
    };
    Ok(PreparationFit {
        rate: -slope,
        t_target,
        ci90,
    })
}

/// Trace norm ‖a‖₁ of a Hermitian matrix.
pub fn trace_norm(a: &CMat) -> f64 {
    let (vals, _) = crate::linalg::eigh(a);
    vals.iter().map(|v| v.abs()).sum()
}
