//! Fixed-step co-simulation of block chains and lifted models.
//!
//! Both sides integrate with classic fourth-order Runge–Kutta on the same
//! grid and see the same input samples at the same stage times: held inputs
//! stay constant across all four stages of a step, analytic inputs are
//! evaluated at the stage times. Exactness of the embedding shows up as
//! agreement of the two responses down to the integrator truncation level.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::atlas::BlockId;
use crate::embed::{PitiModel, UPowers};
use crate::error::Error;
use crate::model::{BlockChain, ChainNode};
use crate::Result;

/// Fixed-step integration settings (classic RK4).
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::Precondition(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if horizon < dt || !horizon.is_finite() {
            return Err(Error::Precondition(format!(
                "horizon must be at least dt, got {horizon}"
            )));
        }
        Ok(Self { dt, horizon })
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// Excitation signal. Held signals are zero-order-hold at the step size;
/// multisines are evaluated analytically, including at RK4 mid-stage times.
#[derive(Debug, Clone)]
pub enum InputSignal {
    /// i.i.d. Gaussian samples, `u_k ~ N(0, scale²·I)`, held over each step.
    WhiteNoise { seed: u64, scale: f64 },
    /// `u(t) = Σ_i amps[i]·sin(2π·freqs[i]·t + phases[i])` on every channel.
    Multisine {
        freqs: Vec<f64>,
        amps: Vec<f64>,
        phases: Vec<f64>,
    },
    /// Externally supplied samples (one per grid point), held over each step.
    Samples(Vec<DVector<f64>>),
}

impl InputSignal {
    /// Six equidistant tones between 0.1 and 1 Hz with descending amplitudes.
    pub fn standard_multisine() -> Self {
        InputSignal::Multisine {
            freqs: vec![0.1, 0.28, 0.46, 0.64, 0.82, 1.0],
            amps: vec![1.0, 0.8, 0.6, 0.5, 0.4, 0.3],
            phases: vec![0.0; 6],
        }
    }
}

/// Sampled signals plus per-stage evaluation.
enum StagedInput {
    Held(Vec<DVector<f64>>),
    Multisine {
        freqs: Vec<f64>,
        amps: Vec<f64>,
        phases: Vec<f64>,
        n_u: usize,
    },
}

impl StagedInput {
    fn new(spec: &InputSignal, n_u: usize, cfg: &SimConfig) -> Result<Self> {
        match spec {
            InputSignal::Multisine {
                freqs,
                amps,
                phases,
            } => {
                if freqs.len() != amps.len() || freqs.len() != phases.len() {
                    return Err(Error::Dimension(format!(
                        "multisine lists must have equal length, got {}/{}/{}",
                        freqs.len(),
                        amps.len(),
                        phases.len()
                    )));
                }
                Ok(StagedInput::Multisine {
                    freqs: freqs.clone(),
                    amps: amps.clone(),
                    phases: phases.clone(),
                    n_u,
                })
            }
            InputSignal::WhiteNoise { seed, scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let samples = (0..=cfg.steps())
                    .map(|_| {
                        DVector::from_fn(n_u, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
                    })
                    .collect();
                Ok(StagedInput::Held(samples))
            }
            InputSignal::Samples(samples) => {
                if samples.len() < cfg.steps() + 1 {
                    return Err(Error::Dimension(format!(
                        "need {} input samples for this grid, got {}",
                        cfg.steps() + 1,
                        samples.len()
                    )));
                }
                if samples.iter().any(|u| u.len() != n_u) {
                    return Err(Error::Dimension(format!(
                        "input samples must have {n_u} channels"
                    )));
                }
                Ok(StagedInput::Held(samples.clone()))
            }
        }
    }

    /// Input at a sample point.
    fn sample(&self, k: usize, t: f64) -> DVector<f64> {
        match self {
            StagedInput::Held(s) => s[k].clone(),
            StagedInput::Multisine { .. } => self.analytic(t),
        }
    }

    /// Input seen by an RK4 stage inside step `k` at time `t`. Held signals
    /// keep the step-k sample over the whole step.
    fn stage(&self, k: usize, t: f64) -> DVector<f64> {
        match self {
            StagedInput::Held(s) => s[k].clone(),
            StagedInput::Multisine { .. } => self.analytic(t),
        }
    }

    fn analytic(&self, t: f64) -> DVector<f64> {
        match self {
            StagedInput::Multisine {
                freqs,
                amps,
                phases,
                n_u,
            } => {
                let v: f64 = freqs
                    .iter()
                    .zip(amps)
                    .zip(phases)
                    .map(|((&f, &a), &p)| a * (2.0 * std::f64::consts::PI * f * t + p).sin())
                    .sum();
                DVector::from_element(*n_u, v)
            }
            StagedInput::Held(_) => unreachable!(),
        }
    }
}

/// Sample an input specification on the simulation grid (`steps + 1` points).
pub fn gen_input(spec: &InputSignal, n_u: usize, cfg: &SimConfig) -> Result<Vec<DVector<f64>>> {
    let staged = StagedInput::new(spec, n_u, cfg)?;
    Ok((0..=cfg.steps())
        .map(|k| staged.sample(k, k as f64 * cfg.dt))
        .collect())
}

/// Sampled simulation record. `states` carries the stacked block states (for
/// chains) or the lifted state (for lifted models).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub inputs: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub states: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    /// CSV export: header `t,u_1..u_m,y_1..y_p[,z_1..z_k]`, 17 significant
    /// digits per value.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let n_u = self.inputs.first().map(|u| u.len()).unwrap_or(0);
        let n_y = self.outputs.first().map(|y| y.len()).unwrap_or(0);
        write!(w, "t")?;
        for i in 1..=n_u {
            write!(w, ",u_{i}")?;
        }
        for i in 1..=n_y {
            write!(w, ",y_{i}")?;
        }
        if let Some(states) = &self.states {
            let n_z = states.first().map(|z| z.len()).unwrap_or(0);
            for i in 1..=n_z {
                write!(w, ",z_{i}")?;
            }
        }
        writeln!(w)?;
        for k in 0..self.times.len() {
            write!(w, "{:.16e}", self.times[k])?;
            for v in self.inputs[k].iter() {
                write!(w, ",{v:.16e}")?;
            }
            for v in self.outputs[k].iter() {
                write!(w, ",{v:.16e}")?;
            }
            if let Some(states) = &self.states {
                for v in states[k].iter() {
                    write!(w, ",{v:.16e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Original-vs-lifted output discrepancy statistics.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub max_abs: f64,
    pub rms: f64,
    /// maximum absolute difference per output channel
    pub per_channel: Vec<f64>,
}

impl ErrorReport {
    /// `max_abs` scaled by the larger of 1 and the reference amplitude.
    pub fn relative_to(&self, reference: &Trajectory) -> f64 {
        let scale = reference
            .outputs
            .iter()
            .map(|y| y.amax())
            .fold(1.0f64, f64::max);
        self.max_abs / scale
    }
}

/// Elementwise comparison of two trajectories on the same grid.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<ErrorReport> {
    if a.times.len() != b.times.len() {
        return Err(Error::Dimension(format!(
            "trajectories have {} and {} samples",
            a.times.len(),
            b.times.len()
        )));
    }
    let n_y = a.outputs.first().map(|y| y.len()).unwrap_or(0);
    if b.outputs.first().map(|y| y.len()).unwrap_or(0) != n_y {
        return Err(Error::Dimension(
            "trajectories have different output dimensions".into(),
        ));
    }
    let mut per_channel = vec![0.0f64; n_y];
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for k in 0..a.times.len() {
        if (a.times[k] - b.times[k]).abs() > 1e-12 {
            return Err(Error::Dimension(format!(
                "trajectory grids differ at sample {k}: {} vs {}",
                a.times[k], b.times[k]
            )));
        }
        for (i, pc) in per_channel.iter_mut().enumerate() {
            let d = (a.outputs[k][i] - b.outputs[k][i]).abs();
            *pc = pc.max(d);
            sum_sq += d * d;
            count += 1;
        }
    }
    let max_abs = per_channel.iter().copied().fold(0.0, f64::max);
    let rms = if count > 0 {
        (sum_sq / count as f64).sqrt()
    } else {
        0.0
    };
    Ok(ErrorReport {
        max_abs,
        rms,
        per_channel,
    })
}

struct Rk4Stage<'a> {
    staged: &'a StagedInput,
    step: usize,
    t: f64,
    dt: f64,
}

fn rk4_step(
    x: &DVector<f64>,
    stage: &Rk4Stage<'_>,
    f: &mut impl FnMut(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
) -> DVector<f64> {
    let h = stage.dt;
    let u0 = stage.staged.stage(stage.step, stage.t);
    let um = stage.staged.stage(stage.step, stage.t + 0.5 * h);
    let u1 = stage.staged.stage(stage.step, stage.t + h);
    let k1 = f(x, &u0);
    let k2 = f(&(x + (0.5 * h) * &k1), &um);
    let k3 = f(&(x + (0.5 * h) * &k2), &um);
    let k4 = f(&(x + h * &k3), &u1);
    x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Runtime layout of the dynamic blocks: id → (offset into the stacked state,
/// state dimension).
fn chain_layout(chain: &BlockChain) -> (BTreeMap<BlockId, (usize, usize)>, usize) {
    let mut layout = BTreeMap::new();
    let mut total = 0;
    for (id, b) in chain.dynamic_blocks() {
        layout.insert(id, (total, b.n_x()));
        total += b.n_x();
    }
    (layout, total)
}

/// Propagate a signal through the chain, accumulating state derivatives.
/// Returns the chain output. No algebraic loops exist by construction.
fn chain_flow(
    seq: &[ChainNode],
    counter: &mut usize,
    layout: &BTreeMap<BlockId, (usize, usize)>,
    x: &DVector<f64>,
    dx: &mut Option<&mut DVector<f64>>,
    signal: DVector<f64>,
) -> Result<DVector<f64>> {
    let mut s = signal;
    for node in seq {
        let id = BlockId(*counter);
        *counter += 1;
        match node {
            ChainNode::Lti(b) => {
                if b.n_x() == 0 {
                    s = b.d() * s;
                } else {
                    let (off, n_x) = layout[&id];
                    let xi = x.rows(off, n_x);
                    if let Some(dx) = dx.as_deref_mut() {
                        let dxi = b.a() * xi + b.b() * &s;
                        dx.rows_mut(off, n_x).copy_from(&dxi);
                    }
                    s = b.c() * xi + b.d() * s;
                }
            }
            ChainNode::Sn(b) => {
                s = b.eval(&s)?;
            }
            ChainNode::Parallel(branches) => {
                let mut sum: Option<DVector<f64>> = None;
                for branch in branches {
                    let out = chain_flow(branch, counter, layout, x, dx, s.clone())?;
                    sum = Some(match sum {
                        None => out,
                        Some(acc) => acc + out,
                    });
                }
                s = sum.expect("validated parallel sections have branches");
            }
        }
    }
    Ok(s)
}

fn check_finite(v: &DVector<f64>, t: f64, context: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            time: t,
            context: context.to_string(),
        });
    }
    Ok(())
}

/// Integrate the original block chain. `x0` must provide an initial state for
/// every dynamic block (see [`BlockChain::dynamic_blocks`] for the ids).
pub fn simulate_chain(
    chain: &BlockChain,
    x0: &BTreeMap<BlockId, DVector<f64>>,
    input: &InputSignal,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    chain.validate()?;
    let (layout, total) = chain_layout(chain);
    let mut x = DVector::zeros(total);
    for (&id, &(off, n_x)) in &layout {
        let xi = x0
            .get(&id)
            .ok_or_else(|| Error::Precondition(format!("missing initial state for block {id}")))?;
        if xi.len() != n_x {
            return Err(Error::Dimension(format!(
                "initial state for block {id} has length {}, expected {n_x}",
                xi.len()
            )));
        }
        x.rows_mut(off, n_x).copy_from(xi);
    }

    let staged = StagedInput::new(input, chain.n_u, cfg)?;
    let steps = cfg.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);

    let output_at = |x: &DVector<f64>, u: &DVector<f64>| -> Result<DVector<f64>> {
        let mut counter = 0usize;
        chain_flow(&chain.seq, &mut counter, &layout, x, &mut None, u.clone())
    };

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let u = staged.sample(k, t);
        let y = output_at(&x, &u)?;
        check_finite(&y, t, "chain output")?;
        times.push(t);
        inputs.push(u);
        outputs.push(y);
        states.push(x.clone());
        if k == steps {
            break;
        }

        let mut deriv = |xs: &DVector<f64>, us: &DVector<f64>| -> DVector<f64> {
            let mut dx = DVector::zeros(total);
            let mut counter = 0usize;
            chain_flow(
                &chain.seq,
                &mut counter,
                &layout,
                xs,
                &mut Some(&mut dx),
                us.clone(),
            )
            .expect("dimensions already validated");
            dx
        };
        let stage = Rk4Stage {
            staged: &staged,
            step: k,
            t,
            dt: cfg.dt,
        };
        x = rk4_step(&x, &stage, &mut deriv);
        check_finite(&x, t + cfg.dt, "chain state")?;
    }

    Ok(Trajectory {
        times,
        inputs,
        outputs,
        states: Some(states),
    })
}

/// Integrate a lifted model from the lifted initial state `z0`.
pub fn simulate_piti(
    model: &PitiModel,
    z0: &DVector<f64>,
    input: &InputSignal,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    if z0.len() != model.n_z() {
        return Err(Error::Dimension(format!(
            "initial lifted state has length {}, model has {}",
            z0.len(),
            model.n_z()
        )));
    }
    let staged = StagedInput::new(input, model.n_u, cfg)?;
    let max_deg = model.max_input_degree();
    let steps = cfg.steps();
    let mut z = z0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let u = staged.sample(k, t);
        let y = model.output(&z, &UPowers::new(&u, max_deg));
        check_finite(&y, t, "lifted output")?;
        times.push(t);
        inputs.push(u);
        outputs.push(y);
        states.push(z.clone());
        if k == steps {
            break;
        }

        let mut deriv = |zs: &DVector<f64>, us: &DVector<f64>| -> DVector<f64> {
            model.deriv(zs, &UPowers::new(us, max_deg))
        };
        let stage = Rk4Stage {
            staged: &staged,
            step: k,
            t,
            dt: cfg.dt,
        };
        z = rk4_step(&z, &stage, &mut deriv);
        check_finite(&z, t + cfg.dt, "lifted state")?;
    }

    Ok(Trajectory {
        times,
        inputs,
        outputs,
        states: Some(states),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_chain;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    fn decay_chain() -> BlockChain {
        // ẋ = −x, y = x
        let b = crate::model::LtiBlock::new(
            dmatrix![-1.0],
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![0.0],
            "decay",
        )
        .unwrap();
        BlockChain {
            n_u: 1,
            n_y: 1,
            seq: vec![ChainNode::Lti(b)],
        }
    }

    #[test]
    fn rk4_order_on_exponential_decay() {
        let chain = decay_chain();
        let mut x0 = BTreeMap::new();
        x0.insert(BlockId(0), dvector![1.0]);
        let cfg = SimConfig::new(1e-2, 1.0).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 0,
            scale: 0.0,
        };
        let traj = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
        let last = traj.outputs.last().unwrap()[0];
        assert!((last - (-1.0f64).exp()).abs() <= 1e-8, "got {last}");
    }

    #[test]
    fn pure_lti_zero_state_zero_input_stays_zero() {
        let b = crate::model::LtiBlock::new(
            dmatrix![-0.5, -0.9; 2.0, -0.3],
            dmatrix![1.2, -1.5; 0.3, 1.1],
            dmatrix![1.0, 0.0; 0.0, 1.0],
            dmatrix![-0.1, 0.5; 0.3, -0.4],
            "g",
        )
        .unwrap();
        let chain = BlockChain {
            n_u: 2,
            n_y: 2,
            seq: vec![ChainNode::Lti(b)],
        };
        let mut x0 = BTreeMap::new();
        x0.insert(BlockId(0), dvector![0.0, 0.0]);
        let cfg = SimConfig::new(1e-2, 1.0).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 1,
            scale: 0.0,
        };
        let traj = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
        assert!(traj.outputs.iter().all(|y| y.amax() == 0.0));
    }

    #[test]
    fn white_noise_is_deterministic_and_held() {
        let cfg = SimConfig::new(0.1, 1.0).unwrap();
        let spec = InputSignal::WhiteNoise {
            seed: 9,
            scale: 1.0,
        };
        let a = gen_input(&spec, 2, &cfg).unwrap();
        let b = gen_input(&spec, 2, &cfg).unwrap();
        assert_eq!(a.len(), 11);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn repeat_simulation_is_bit_identical() {
        let chain = decay_chain();
        let mut x0 = BTreeMap::new();
        x0.insert(BlockId(0), dvector![1.0]);
        let cfg = SimConfig::new(1e-2, 0.5).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 33,
            scale: 1.0,
        };
        let a = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
        let b = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
        for (ya, yb) in a.outputs.iter().zip(&b.outputs) {
            assert_eq!(ya[0].to_bits(), yb[0].to_bits());
        }
    }

    #[test]
    fn multisine_values() {
        let cfg = SimConfig::new(0.5, 1.0).unwrap();
        let spec = InputSignal::Multisine {
            freqs: vec![0.25],
            amps: vec![2.0],
            phases: vec![0.0],
        };
        let u = gen_input(&spec, 1, &cfg).unwrap();
        assert_abs_diff_eq!(u[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[2][0], 2.0, epsilon = 1e-12); // 2·sin(π/2)

        let std = InputSignal::standard_multisine();
        let u0 = gen_input(&std, 1, &cfg).unwrap();
        assert_abs_diff_eq!(u0[0][0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_chain_echoes_input() {
        let chain = BlockChain {
            n_u: 2,
            n_y: 2,
            seq: vec![],
        };
        let cfg = SimConfig::new(0.01, 0.1).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 4,
            scale: 1.0,
        };
        let traj = simulate_chain(&chain, &BTreeMap::new(), &input, &cfg).unwrap();
        for (u, y) in traj.inputs.iter().zip(&traj.outputs) {
            assert_eq!(u, y);
        }
    }

    #[test]
    fn single_lti_matches_its_lift() {
        let block = crate::model::LtiBlock::new(
            dmatrix![-0.5, -0.9; 2.0, -0.3],
            dmatrix![1.2, -1.5; 0.3, 1.1],
            dmatrix![1.0, 0.0; 0.0, 1.0],
            dmatrix![-0.1, 0.5; 0.3, -0.4],
            "g",
        )
        .unwrap();
        let chain = BlockChain {
            n_u: 2,
            n_y: 2,
            seq: vec![ChainNode::Lti(block)],
        };
        let x0 = chain.ones_initial_state();
        let model = embed_chain(&chain).unwrap();
        let z0 = model.atlas.lift(&x0).unwrap();
        let cfg = SimConfig::new(1e-3, 0.5).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 11,
            scale: 1.0,
        };
        let a = simulate_chain(&chain, &x0, &input, &cfg).unwrap();
        let b = simulate_piti(&model, &z0, &input, &cfg).unwrap();
        let rep = compare(&a, &b).unwrap();
        assert!(rep.max_abs <= 1e-12, "max_abs = {}", rep.max_abs);
        assert!(rep.max_abs >= rep.rms);
    }

    #[test]
    fn compare_rejects_grid_mismatch() {
        let t1 = Trajectory {
            times: vec![0.0, 0.1],
            inputs: vec![dvector![0.0]; 2],
            outputs: vec![dvector![0.0]; 2],
            states: None,
        };
        let mut t2 = t1.clone();
        t2.times = vec![0.0];
        t2.inputs.pop();
        t2.outputs.pop();
        assert!(compare(&t1, &t2).is_err());
    }

    #[test]
    fn divergence_reports_time() {
        // ẋ = +25x blows up quickly with large dt on a cubic readout
        let b = crate::model::LtiBlock::new(
            dmatrix![25.0],
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![0.0],
            "unstable",
        )
        .unwrap();
        let sn = crate::model::SnBlock::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.0, 0.0, 0.0, 1.0],
            "cube",
            None,
        )
        .unwrap();
        let chain = BlockChain {
            n_u: 1,
            n_y: 1,
            seq: vec![ChainNode::Lti(b), ChainNode::Sn(sn)],
        };
        let mut x0 = BTreeMap::new();
        x0.insert(BlockId(0), dvector![1e100]);
        let cfg = SimConfig::new(1.0, 50.0).unwrap();
        let input = InputSignal::WhiteNoise {
            seed: 0,
            scale: 0.0,
        };
        match simulate_chain(&chain, &x0, &input, &cfg) {
            Err(Error::NonFinite { time, .. }) => assert!(time >= 0.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_shape() {
        let t = Trajectory {
            times: vec![0.0, 0.5],
            inputs: vec![dvector![1.0], dvector![2.0]],
            outputs: vec![dvector![3.0, 4.0], dvector![5.0, 6.0]],
            states: Some(vec![dvector![7.0], dvector![8.0]]),
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,u_1,y_1,y_2,z_1");
        assert_eq!(lines.clone().count(), 2);
        assert!(lines.next().unwrap().split(',').count() == 5);
    }
}
