use super::{
    FemError, FemMatrices, FieldDump, QuenchComponent, QuenchEvent, Trajectory, TridiagonalLu,
};
use crate::config::{InitialData, SystemConfig};
use crate::noise::{mixed_noise, MixedNoise, NoisePath, NoiseSampler, PathSeed};
use crate::spectral::solve_robin_eigenpair;

/// One semi-implicit Euler step for both components:
///
/// `(A + δt B) a' = A (u + δt F(u) + ΔN (1 - u)) + δt β_c e_ends`
///
/// with `F₁ = λ₁₁/(1-u₁)² + λ₁₂/(1-u₂)²` and symmetrically for `F₂`.
#[derive(Debug, Clone)]
pub struct Stepper {
    mats: FemMatrices,
    lu: TridiagonalLu,
    dt: f64,
    lambda: [[f64; 2]; 2],
}

#[derive(Debug, Clone)]
struct Work {
    w: Vec<f64>,
    y: Vec<f64>,
}

impl Stepper {
    pub fn new(mats: FemMatrices, dt: f64, lambda: [[f64; 2]; 2]) -> Result<Self, FemError> {
        let lu = mats.system(dt)?;
        Ok(Self {
            mats,
            lu,
            dt,
            lambda,
        })
    }

    pub fn matrices(&self) -> &FemMatrices {
        &self.mats
    }

    fn work(&self) -> Work {
        let n = self.mats.m_elements + 1;
        Work {
            w: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    /// Advances `u` (values at every mesh node) by one step with noise
    /// increments `dn`. `step` only labels errors.
    pub fn step(&self, u: &mut [Vec<f64>; 2], dn: [f64; 2], step: usize) -> Result<(), FemError> {
        let mut work = self.work();
        self.step_with(u, dn, step, &mut work)
    }

    fn step_with(
        &self,
        u: &mut [Vec<f64>; 2],
        dn: [f64; 2],
        step: usize,
        work: &mut Work,
    ) -> Result<(), FemError> {
        let dt = self.dt;
        let l = self.lambda;
        let n = u[0].len();
        // Reaction terms use the state before either component is updated.
        let mut inv_sq = [vec![0.0; 0], vec![0.0; 0]];
        for c in 0..2 {
            inv_sq[c] = u[c]
                .iter()
                .map(|&v| {
                    let gap = 1.0 - v;
                    1.0 / (gap * gap)
                })
                .collect();
        }
        for c in 0..2 {
            let o = 1 - c;
            for j in 0..n {
                let gap = 1.0 - u[c][j];
                if !(gap > 0.0) {
                    return Err(FemError::TooCloseToQuench { step, gap });
                }
                let f = l[c][0] * inv_sq[c][j] + l[c][1] * inv_sq[o][j];
                let w = u[c][j] + dt * f + dn[c] * gap;
                if !w.is_finite() {
                    return Err(FemError::NonFinite {
                        step,
                        component: c + 1,
                    });
                }
                work.w[j] = w;
            }
            self.mats.mass_full.apply(&work.w, &mut work.y);
            let r = self.mats.unknowns.clone();
            let rhs = &mut work.y[r.clone()];
            for (v, b) in rhs.iter_mut().zip(&self.mats.boundary_load) {
                *v += dt * b;
            }
            self.lu.solve(rhs);
            u[c][r].copy_from_slice(rhs);
        }
        Ok(())
    }
}

/// Components whose maximum has reached `1 - eps`.
pub fn detect_quench(max_u: [f64; 2], eps: f64) -> Option<QuenchComponent> {
    let hit = [max_u[0] >= 1.0 - eps, max_u[1] >= 1.0 - eps];
    match hit {
        [true, true] => Some(QuenchComponent::Both),
        [true, false] => Some(QuenchComponent::First),
        [false, true] => Some(QuenchComponent::Second),
        [false, false] => None,
    }
}

/// Everything shared between realisations of one configuration.
pub struct Simulator {
    config: SystemConfig,
    stepper: Stepper,
    sampler: NoiseSampler,
    initial: [Vec<f64>; 2],
    nodes: Vec<f64>,
}

impl Simulator {
    pub fn new(config: &SystemConfig) -> Result<Self, FemError> {
        config
            .validate()
            .map_err(|e| FemError::Config(e.to_string()))?;
        let mats = FemMatrices::assemble(config.m_elements, config.bc, config.beta, config.beta_c)?;
        let nodes = mats.nodes();
        let initial = match config.initial {
            InitialData::Parabolic(c) => {
                [0, 1].map(|i| nodes.iter().map(|&x| c[i] * x * (1.0 - x)).collect())
            }
            InitialData::Psi(l) => {
                let pair = solve_robin_eigenpair(config.beta, 1e-14)
                    .map_err(|e| FemError::Config(e.to_string()))?;
                [0, 1].map(|i| nodes.iter().map(|&x| 1.0 - l[i] * pair.psi(x)).collect())
            }
        };
        let stepper = Stepper::new(mats, config.dt(), config.lambda)?;
        let sampler = NoiseSampler::new(
            config.grid(),
            config.hurst,
            config.dependence,
            config.fbm_method,
        )?;
        Ok(Self {
            config: config.clone(),
            stepper,
            sampler,
            initial,
            nodes,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn sampler(&self) -> &NoiseSampler {
        &self.sampler
    }

    pub fn noise(&self, seed: PathSeed) -> (NoisePath, MixedNoise) {
        let path = self.sampler.sample(seed);
        let mixed = mixed_noise(&path, self.config.k);
        (path, mixed)
    }

    /// Integrates until quenching is detected or the horizon is reached.
    /// Step failures end the run and are recorded in `aborted`.
    pub fn run(&self, noise: &MixedNoise, dump_every: Option<usize>) -> Trajectory {
        let eps = self.config.eps_quench;
        let dt = self.config.dt();
        let n_steps = self.config.n_steps;
        let mut u = self.initial.clone();
        let mut traj = Trajectory {
            dt,
            eps_quench: eps,
            nodes: self.nodes.clone(),
            sup_u: [
                Vec::with_capacity(n_steps + 1),
                Vec::with_capacity(n_steps + 1),
            ],
            min_z: [
                Vec::with_capacity(n_steps + 1),
                Vec::with_capacity(n_steps + 1),
            ],
            dumps: Vec::new(),
            final_u: [Vec::new(), Vec::new()],
            quench: None,
            aborted: None,
        };
        let dump_every = dump_every.filter(|&k| k > 0);
        let record = |traj: &mut Trajectory, u: &[Vec<f64>; 2], step: usize| -> [f64; 2] {
            let mut max_u = [0.0; 2];
            for c in 0..2 {
                let sup = u[c].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                max_u[c] = u[c].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                traj.sup_u[c].push(sup);
                traj.min_z[c].push(1.0 - max_u[c]);
            }
            if dump_every.is_some_and(|k| step.is_multiple_of(k)) {
                traj.dumps.push(FieldDump {
                    step,
                    t: step as f64 * dt,
                    u: u.clone(),
                });
            }
            max_u
        };

        let mut max_u = record(&mut traj, &u, 0);
        let mut work = self.stepper.work();
        let mut step = 0;
        let mut hit = detect_quench(max_u, eps);
        while hit.is_none() && step < n_steps {
            let dn = [
                noise.n1[step + 1] - noise.n1[step],
                noise.n2[step + 1] - noise.n2[step],
            ];
            if let Err(e) = self.stepper.step_with(&mut u, dn, step, &mut work) {
                traj.aborted = Some(e.to_string());
                break;
            }
            step += 1;
            max_u = record(&mut traj, &u, step);
            hit = detect_quench(max_u, eps);
        }
        if let Some(component) = hit {
            let crossing = [0, 1].map(|c| {
                if step == 0 {
                    return Some(0.0);
                }
                let z0 = traj.min_z[c][step - 1].powi(3);
                let z1 = traj.min_z[c][step].powi(3);
                let target = eps.powi(3);
                if z1 <= target && z0 <= target {
                    return Some(traj.t(step - 1));
                }
                (z1 < z0).then(|| traj.t(step - 1) + dt * (z0 - target) / (z0 - z1))
            });
            traj.quench = Some(QuenchEvent {
                step,
                time: traj.t(step),
                component,
                crossing,
            });
        }
        if dump_every.is_some() && traj.dumps.last().map(|d| d.step) != Some(step) {
            traj.dumps.push(FieldDump {
                step,
                t: traj.t(step),
                u: u.clone(),
            });
        }
        traj.final_u = u;
        traj
    }

    pub fn run_path(
        &self,
        seed: PathSeed,
        dump_every: Option<usize>,
    ) -> (NoisePath, MixedNoise, Trajectory) {
        let (path, mixed) = self.noise(seed);
        let traj = self.run(&mixed, dump_every);
        (path, mixed, traj)
    }
}

/// One realisation: noise path 0 of `seed`, then the scheme.
pub fn simulate(config: &SystemConfig, seed: u64) -> Result<Trajectory, FemError> {
    let sim = Simulator::new(config)?;
    Ok(sim.run_path(PathSeed::new(seed, 0), None).2)
}
