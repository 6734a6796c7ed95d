//! Mode amplitudes, exact master-equation coefficients and their Markov limits.
//!
//! With equal couplings `g_1k = lambda g_2k` the centre-of-mass and relative
//! combinations decouple. `F_+` follows the relative mode (frequency
//! `omega0 - kappa`, kernel weight `1 - lambda`) and `F_-` the centre-of-mass
//! mode (frequency `omega0 + kappa`, weight `1 + lambda`). The decaying one,
//! `F_{-lambda}`, fixes every coefficient through
//! `G(t) = (1 / F_{-lambda}(t)) \int_0^t mu(t - s) F_{-lambda}(s) ds`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, MemoryKernel, SpectralParams};
use crate::volterra::{self, convolve_tail, AmplitudeTrack, KernelTable, TimeGrid, VolterraProblem};

/// Guard on `|F|` and `|u^2 - v^2|` below which coefficients are singular.
pub const SINGULAR_GUARD: f64 = 1e-8;

/// Relative phase of the two modes' couplings to the bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseBranch {
    /// `lambda = +1`
    InPhase,
    /// `lambda = -1`
    OutOfPhase,
}

impl PhaseBranch {
    pub fn sign(self) -> f64 {
        match self {
            Self::InPhase => 1.0,
            Self::OutOfPhase => -1.0,
        }
    }

    pub fn from_sign(lambda: f64) -> Result<Self> {
        if lambda == 1.0 {
            Ok(Self::InPhase)
        } else if lambda == -1.0 {
            Ok(Self::OutOfPhase)
        } else {
            Err(Error::Domain(format!("lambda must be +1 or -1, got {lambda}")))
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Self::InPhase => Self::OutOfPhase,
            Self::OutOfPhase => Self::InPhase,
        }
    }
}

impl fmt::Display for PhaseBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InPhase => "+1",
            Self::OutOfPhase => "-1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega0: f64,
    pub kappa: f64,
    pub lambda: PhaseBranch,
}

impl SystemParams {
    pub fn new(omega0: f64, kappa: f64, lambda: PhaseBranch) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
        }
        if !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be finite, got {kappa}")));
        }
        Ok(Self { omega0, kappa, lambda })
    }

    /// Internal units: `omega0 = 1`.
    pub fn normalized(kappa: f64, lambda: PhaseBranch) -> Result<Self> {
        Self::new(1.0, kappa, lambda)
    }

    fn plus_problem(&self, kernel: MemoryKernel) -> Result<VolterraProblem<MemoryKernel>> {
        VolterraProblem::new(self.omega0 - self.kappa, 1.0 - self.lambda.sign(), kernel)
    }

    fn minus_problem(&self, kernel: MemoryKernel) -> Result<VolterraProblem<MemoryKernel>> {
        VolterraProblem::new(self.omega0 + self.kappa, 1.0 + self.lambda.sign(), kernel)
    }
}

/// `F_+` and `F_-` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub f_plus: AmplitudeTrack,
    pub f_minus: AmplitudeTrack,
}

impl ModeAmplitudes {
    pub fn new(f_plus: AmplitudeTrack, f_minus: AmplitudeTrack) -> Result<Self> {
        if f_plus.grid() != f_minus.grid() {
            return Err(Error::Config("F+ and F- tracks live on different grids".into()));
        }
        Ok(Self { f_plus, f_minus })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.f_plus.grid()
    }

    /// The amplitude that carries the dissipation for this branch, `F_{-lambda}`.
    pub fn decaying(&self, lambda: PhaseBranch) -> &AmplitudeTrack {
        match lambda {
            PhaseBranch::InPhase => &self.f_minus,
            PhaseBranch::OutOfPhase => &self.f_plus,
        }
    }
}

pub fn solve_modes(sys: &SystemParams, env: &SpectralParams, grid: &TimeGrid) -> Result<ModeAmplitudes> {
    let kernel = MemoryKernel::new(*env);
    let f_plus = volterra::solve(&sys.plus_problem(kernel)?, grid)?;
    let f_minus = volterra::solve(&sys.minus_problem(kernel)?, grid)?;
    ModeAmplitudes::new(f_plus, f_minus)
}

/// `u = (F_+ + F_-) / 2`, `v = (F_+ - F_-) / 2`.
pub fn uv_from_amplitudes(m: &ModeAmplitudes) -> (Vec<Complex64>, Vec<Complex64>) {
    m.f_plus
        .values()
        .iter()
        .zip(m.f_minus.values())
        .map(|(p, q)| ((p + q) * 0.5, (p - q) * 0.5))
        .unzip()
}

/// Coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub gamma: f64,
    pub gamma_cross: f64,
    pub omega_shifted: f64,
    pub omega_cross: f64,
    pub shift: f64,
}

impl Coefficients {
    fn from_g(sys: &SystemParams, g: Complex64) -> Self {
        let l = sys.lambda.sign();
        Self {
            gamma: g.re,
            gamma_cross: l * g.re,
            omega_shifted: sys.omega0 + g.im,
            omega_cross: sys.kappa + l * g.im,
            shift: -g.im,
        }
    }

    fn lerp(&self, other: &Self, s: f64) -> Self {
        let mix = |a: f64, b: f64| a + (b - a) * s;
        Self {
            gamma: mix(self.gamma, other.gamma),
            gamma_cross: mix(self.gamma_cross, other.gamma_cross),
            omega_shifted: mix(self.omega_shifted, other.omega_shifted),
            omega_cross: mix(self.omega_cross, other.omega_cross),
            shift: mix(self.shift, other.shift),
        }
    }
}

/// Time series of `Gamma`, `Gamma'`, `Omega`, `Omega'` and `delta omega = omega0 - Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrack {
    grid: TimeGrid,
    samples: Vec<Coefficients>,
}

impl CoefficientTrack {
    pub fn from_samples(grid: TimeGrid, samples: Vec<Coefficients>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::DimensionMismatch(samples.len(), grid.count()));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Coefficients] {
        &self.samples
    }

    pub fn gamma(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|c| c.gamma)
    }

    pub fn shift(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|c| c.shift)
    }

    /// Linear interpolation between grid samples; clamps outside the grid.
    pub fn at(&self, t: f64) -> Coefficients {
        let x = (t / self.grid.dt()).max(0.0);
        let k = x.floor() as usize;
        if k + 1 >= self.samples.len() {
            return *self.samples.last().expect("grid has at least two samples");
        }
        self.samples[k].lerp(&self.samples[k + 1], x - k as f64)
    }

    /// Applies `f` to every sample; handy for negative controls.
    pub fn map(&self, f: impl Fn(Coefficients) -> Coefficients) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().copied().map(f).collect() }
    }
}

/// Ground-truth coefficients from the memory integral of `F_{-lambda}`.
pub fn coefficients_integral(
    sys: &SystemParams,
    env: &SpectralParams,
    m: &ModeAmplitudes,
) -> Result<CoefficientTrack> {
    let grid = *m.grid();
    let track = m.decaying(sys.lambda);
    let table = KernelTable::new(&MemoryKernel::new(*env), grid.dt(), grid.count());
    let values = track.values();
    let samples = (0..grid.count())
        .map(|k| {
            let f = values[k];
            if f.norm() < SINGULAR_GUARD {
                return Err(Error::SingularCoefficient { time: grid.time(k), magnitude: f.norm() });
            }
            let g = convolve_tail(&table, values, k) / f;
            Ok(Coefficients::from_g(sys, g))
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientTrack::from_samples(grid, samples)
}

/// Second-order finite-difference derivative on a uniform grid.
fn derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    if n < 3 {
        let d = (values[n - 1] - values[0]) / h;
        return vec![d; n];
    }
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h));
    out.extend(values.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)));
    out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h));
    out
}

/// Coefficients from `Gamma + i Omega = -(u u' - v v') / (u^2 - v^2)` and
/// `Gamma' + i Omega' = -(v u' - u v') / (u^2 - v^2)`, for cross-checking.
pub fn coefficients_derivative(sys: &SystemParams, m: &ModeAmplitudes) -> Result<CoefficientTrack> {
    let grid = *m.grid();
    let (u, v) = uv_from_amplitudes(m);
    let du = derivative(&u, grid.dt());
    let dv = derivative(&v, grid.dt());
    let samples = (0..grid.count())
        .map(|k| {
            let den = u[k] * u[k] - v[k] * v[k];
            if den.norm() < SINGULAR_GUARD {
                return Err(Error::SingularCoefficient { time: grid.time(k), magnitude: den.norm() });
            }
            let own = -(u[k] * du[k] - v[k] * dv[k]) / den;
            let cross = -(v[k] * du[k] - u[k] * dv[k]) / den;
            Ok(Coefficients {
                gamma: own.re,
                gamma_cross: cross.re,
                omega_shifted: own.im,
                omega_cross: cross.im,
                shift: sys.omega0 - own.im,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientTrack::from_samples(grid, samples)
}

/// `pi J(omega0)` and the principal-value shift, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovConstants {
    pub decay: f64,
    pub shift: f64,
}

impl MarkovConstants {
    pub fn new(env: &SpectralParams, omega0: f64) -> Result<Self> {
        Ok(Self {
            decay: spectral::markov_decay(env, omega0)?,
            shift: spectral::markov_shift(env, omega0)?,
        })
    }

    /// Markovian `(u, v)` at time `t`.
    pub fn uv(&self, sys: &SystemParams, t: f64) -> (Complex64, Complex64) {
        let (free, damped) = self.branches(sys, t);
        let l = sys.lambda.sign();
        ((free + damped) * 0.5, (free - damped) / (2.0 * l))
    }

    /// The undamped and damped exponentials whose half-sum is `u`.
    fn branches(&self, sys: &SystemParams, t: f64) -> (Complex64, Complex64) {
        let l = sys.lambda.sign();
        let free = Complex64::new(0.0, -(sys.omega0 - l * sys.kappa) * t).exp();
        let rate = Complex64::new(-2.0 * self.decay, -(sys.omega0 + l * sys.kappa) + 2.0 * self.shift);
        (free, (rate * t).exp())
    }

    pub fn coefficients(&self, sys: &SystemParams) -> Coefficients {
        let l = sys.lambda.sign();
        Coefficients {
            gamma: self.decay,
            gamma_cross: l * self.decay,
            omega_shifted: sys.omega0 - self.shift,
            omega_cross: sys.kappa - l * self.shift,
            shift: self.shift,
        }
    }

    /// `F_+ = u + v` and `F_- = u - v` from the Markovian solution.
    pub fn amplitudes(&self, sys: &SystemParams, grid: &TimeGrid) -> Result<ModeAmplitudes> {
        let (plus, minus): (Vec<_>, Vec<_>) = grid
            .times()
            .map(|t| {
                let (u, v) = self.uv(sys, t);
                (u + v, u - v)
            })
            .unzip();
        let mut plus = plus;
        let mut minus = minus;
        // both are exactly 1 at t = 0; pin against rounding in the sum
        plus[0] = Complex64::new(1.0, 0.0);
        minus[0] = Complex64::new(1.0, 0.0);
        ModeAmplitudes::new(
            AmplitudeTrack::from_values(*grid, plus)?,
            AmplitudeTrack::from_values(*grid, minus)?,
        )
    }
}

/// Markovian `(u, v)` at `t >= 0`.
pub fn markov_uv(sys: &SystemParams, env: &SpectralParams, t: f64) -> Result<(Complex64, Complex64)> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    Ok(MarkovConstants::new(env, sys.omega0)?.uv(sys, t))
}

/// Constant-in-time Markov coefficients laid out on `grid`.
pub fn markov_coefficients(
    sys: &SystemParams,
    env: &SpectralParams,
    grid: &TimeGrid,
) -> Result<CoefficientTrack> {
    let c = MarkovConstants::new(env, sys.omega0)?.coefficients(sys);
    CoefficientTrack::from_samples(*grid, vec![c; grid.count()])
}
