//! Linear homogeneous Volterra integro-differential equations
//!
//! ```text
//! F'(t) + i a F(t) + c \int_0^t mu(t - s) F(s) ds = 0,   F(0) = 1
//! ```
//!
//! solved on a uniform grid by trapezoidal product integration with one
//! predictor–corrector pass per step. The free oscillation `e^{-i a dt}` is
//! applied exactly on each step, so `c = 0` yields a pure phase to rounding.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::MemoryKernel;

/// A difference kernel `mu(t)` sampled by the solver.
pub trait Kernel {
    fn eval(&self, t: f64) -> Complex64;

    /// Shortest time scale of the kernel; the grid step must not exceed a
    /// tenth of it. `None` means no constraint.
    fn resolution_time(&self) -> Option<f64> {
        None
    }
}

impl Kernel for MemoryKernel {
    fn eval(&self, t: f64) -> Complex64 {
        self.value(t)
    }

    fn resolution_time(&self) -> Option<f64> {
        (self.params().eta > 0.0).then(|| 1.0 / self.params().omega_c)
    }
}

/// `mu(t) = mu0` for all `t`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantKernel(pub Complex64);

impl Kernel for ConstantKernel {
    fn eval(&self, _t: f64) -> Complex64 {
        self.0
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, t: f64) -> Complex64 {
        (**self).eval(t)
    }

    fn resolution_time(&self) -> Option<f64> {
        (**self).resolution_time()
    }
}

/// Uniform grid `t_k = k * dt`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    count: usize,
}

impl TimeGrid {
    /// `t_max` must be an integer multiple of `dt` (to 1e-9 relative).
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be > 0, got {t_max}")));
        }
        let steps = (t_max / dt).round();
        if steps < 1.0 || ((steps * dt - t_max) / t_max).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "t_max = {t_max} is not a whole number of steps dt = {dt}"
            )));
        }
        Ok(Self { t_max, dt, count: steps as usize + 1 })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.time(k))
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.count - 1)
    }

    /// Fails unless `dt <= 0.1 * tau` for the kernel's resolution time `tau`.
    pub fn check_resolution<K: Kernel + ?Sized>(&self, kernel: &K) -> Result<()> {
        match kernel.resolution_time() {
            Some(tau) if self.dt > 0.1 * tau * (1.0 + 1e-12) => Err(Error::Config(format!(
                "dt = {} under-resolves the kernel: need dt <= {}",
                self.dt,
                0.1 * tau
            ))),
            _ => Ok(()),
        }
    }
}

/// `F' + i freq F + weight * (mu * F) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct VolterraProblem<K> {
    pub freq: f64,
    pub weight: f64,
    pub kernel: K,
}

impl<K: Kernel> VolterraProblem<K> {
    pub fn new(freq: f64, weight: f64, kernel: K) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::Domain(format!("kernel weight must be >= 0, got {weight}")));
        }
        if !freq.is_finite() {
            return Err(Error::Domain(format!("frequency must be finite, got {freq}")));
        }
        Ok(Self { freq, weight, kernel })
    }
}

/// Kernel samples `mu(k dt)` for `k = 0..len`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    dt: f64,
    values: Vec<Complex64>,
}

impl KernelTable {
    pub fn new<K: Kernel + ?Sized>(kernel: &K, dt: f64, len: usize) -> Self {
        Self { dt, values: (0..len).map(|k| kernel.eval(k as f64 * dt)).collect() }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Trapezoid weight-1 terms plus the `s = 0` endpoint: every term of the
    /// memory integral at `step` except the one involving `F(step)`.
    fn history(&self, values: &[Complex64], step: usize) -> Complex64 {
        let mu = &self.values;
        let interior: Complex64 = mu[1..step]
            .iter()
            .rev()
            .zip(&values[1..step])
            .map(|(m, f)| m * f)
            .sum();
        self.dt * (0.5 * mu[step] * values[0] + interior)
    }

    fn endpoint(&self, value: Complex64) -> Complex64 {
        0.5 * self.dt * self.values[0] * value
    }
}

/// Trapezoidal value of `\int_0^{step dt} mu(step dt - s) F(s) ds`.
///
/// `values` must hold `F` at indices `0..=step` (the last entry may be a
/// predictor). Returns zero at `step == 0`.
pub fn convolve_tail(kernel: &KernelTable, values: &[Complex64], step: usize) -> Complex64 {
    assert!(values.len() > step, "track holds {} samples, need {}", values.len(), step + 1);
    assert!(kernel.values.len() > step, "kernel table too short for step {step}");
    if step == 0 {
        return Complex64::new(0.0, 0.0);
    }
    kernel.history(values, step) + kernel.endpoint(values[step])
}

/// Sampled solution `F(t_k)` of a Volterra problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrack {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl AmplitudeTrack {
    /// Wraps precomputed samples; `values[0]` must equal 1.
    pub fn from_values(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::DimensionMismatch(values.len(), grid.count()));
        }
        if values[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::Domain(format!("amplitude track must start at 1, got {}", values[0])));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, k: usize) -> Complex64 {
        self.values[k]
    }
}

/// Marches the problem across `grid`.
pub fn solve<K: Kernel>(problem: &VolterraProblem<K>, grid: &TimeGrid) -> Result<AmplitudeTrack> {
    let n = grid.count();
    let h = grid.dt();
    let rotate = Complex64::new(0.0, -problem.freq * h).exp();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    values[0] = Complex64::new(1.0, 0.0);

    if problem.weight == 0.0 {
        for k in 1..n {
            values[k] = rotate * values[k - 1];
        }
        return AmplitudeTrack::from_values(*grid, values);
    }

    grid.check_resolution(&problem.kernel)?;
    let table = KernelTable::new(&problem.kernel, h, n);
    let c = problem.weight;
    // memory integral at the previous node
    let mut memory_prev = Complex64::new(0.0, 0.0);
    for k in 1..n {
        // In the frame co-rotating with e^{-i a t} over one step the equation
        // reduces to g' = -c e^{i a s} I(t_k + s), integrated by Heun's method.
        let history = table.history(&values, k);
        let predicted = rotate * (values[k - 1] - c * h * memory_prev);
        let memory_pred = history + table.endpoint(predicted);
        let corrected =
            rotate * values[k - 1] - 0.5 * c * h * (rotate * memory_prev + memory_pred);
        if !(corrected.re.is_finite() && corrected.im.is_finite()) {
            return Err(Error::Numerical {
                step: k,
                reason: format!("amplitude became {corrected}"),
            });
        }
        values[k] = corrected;
        memory_prev = history + table.endpoint(corrected);
    }
    AmplitudeTrack::from_values(*grid, values)
}
