use super::{ComponentModel, EvalCounter, ModelError};

/// Lorenz-96 parameters. Defaults are the standard chaotic setup
/// (n = 40, F = 8, Δt = 0.025).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorenz96Config {
    pub n: usize,
    pub forcing: f64,
    pub dt: f64,
}

impl Default for Lorenz96Config {
    fn default() -> Self {
        Self {
            n: 40,
            forcing: 8.0,
            dt: 0.025,
        }
    }
}

/// Offsets of the one-step RK4 stencil: each of the four stages widens the
/// ODE stencil `{i-2, .., i+1}` once.
const STENCIL_BEHIND: usize = 8;
const STENCIL_AHEAD: usize = 4;

#[inline]
fn rhs_at(x: &[f64], i: usize, forcing: f64) -> f64 {
    let n = x.len();
    let ip1 = (i + 1) % n;
    let im1 = (i + n - 1) % n;
    let im2 = (i + n - 2) % n;
    (x[ip1] - x[im2]) * x[im1] - x[i] + forcing
}

/// `dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F` with cyclic indices.
pub fn lorenz96_rhs(x: &[f64], forcing: f64) -> Result<Vec<f64>, ModelError> {
    if x.len() < 4 {
        return Err(ModelError::TooSmall(x.len()));
    }
    Ok((0..x.len()).map(|i| rhs_at(x, i, forcing)).collect())
}

/// One classical RK4 step of the Lorenz-96 system.
pub fn rk4_step(x: &[f64], dt: f64, forcing: f64) -> Result<Vec<f64>, ModelError> {
    if x.len() < 4 {
        return Err(ModelError::TooSmall(x.len()));
    }
    let all: Vec<usize> = (0..x.len()).collect();
    let windows = [all.clone(), all.clone(), all.clone(), all];
    Ok(rk4_on_windows(x, &windows, dt, forcing))
}

/// RK4 evaluated on nested windows: `windows[0]` needs k1, `windows[1]` k2,
/// `windows[2]` k3 and `windows[3]` (the requested outputs) k4. Returns the
/// updated state at `windows[3]`, in that order.
///
/// The arithmetic per entry is identical whatever the windows are, so a
/// component evaluation is bit-identical to the full step.
fn rk4_on_windows(x: &[f64], windows: &[Vec<usize>; 4], dt: f64, forcing: f64) -> Vec<f64> {
    let n = x.len();
    let half = 0.5 * dt;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut stage = x.to_vec();

    for &i in &windows[0] {
        k1[i] = rhs_at(x, i, forcing);
    }
    for &i in &windows[0] {
        stage[i] = x[i] + half * k1[i];
    }
    for &i in &windows[1] {
        k2[i] = rhs_at(&stage, i, forcing);
    }
    for &i in &windows[1] {
        stage[i] = x[i] + half * k2[i];
    }
    for &i in &windows[2] {
        k3[i] = rhs_at(&stage, i, forcing);
    }
    for &i in &windows[2] {
        stage[i] = x[i] + dt * k3[i];
    }
    windows[3]
        .iter()
        .map(|&i| {
            let k4 = rhs_at(&stage, i, forcing);
            x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4)
        })
        .collect()
}

/// Sorted cyclic dilation of `set` by offsets `-behind..=ahead`.
fn dilate(set: &[usize], n: usize, behind: usize, ahead: usize) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &i in set {
        for d in 0..=(behind + ahead) {
            mark[(i + n * (behind / n + 1) - behind + d) % n] = true;
        }
    }
    (0..n).filter(|&i| mark[i]).collect()
}

/// Lorenz-96 discretized with RK4, with an evaluation counter.
#[derive(Debug)]
pub struct Lorenz96 {
    config: Lorenz96Config,
    counter: EvalCounter,
}

impl Lorenz96 {
    pub fn new(config: Lorenz96Config) -> Result<Self, ModelError> {
        if config.n < 4 {
            return Err(ModelError::TooSmall(config.n));
        }
        if !(config.dt > 0.0) || !config.dt.is_finite() {
            return Err(ModelError::InvalidParameter(format!("dt = {}", config.dt)));
        }
        if !config.forcing.is_finite() {
            return Err(ModelError::InvalidParameter(format!("forcing = {}", config.forcing)));
        }
        Ok(Self {
            config,
            counter: EvalCounter::default(),
        })
    }

    pub fn config(&self) -> &Lorenz96Config {
        &self.config
    }
}

impl ComponentModel for Lorenz96 {
    fn dim(&self) -> usize {
        self.config.n
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn dependency_stencil(&self, i: usize) -> Vec<usize> {
        dilate(&[i], self.config.n, STENCIL_BEHIND, STENCIL_AHEAD)
    }

    fn advance(&self, x: &[f64], n_p: usize) -> Vec<f64> {
        rk4_step(x, self.config.dt / n_p as f64, self.config.forcing).expect("dimension checked on construction")
    }

    fn advance_components(&self, x: &[f64], out: &[usize], n_p: usize) -> Vec<f64> {
        let n = self.config.n;
        let w2 = dilate(out, n, 2, 1);
        let w1 = dilate(&w2, n, 2, 1);
        let w0 = dilate(&w1, n, 2, 1);
        rk4_on_windows(x, &[w0, w1, w2, out.to_vec()], self.config.dt / n_p as f64, self.config.forcing)
    }
}
