//! Independent oracle: the time-dependent master equation integrated in a
//! truncated two-mode Fock space, compared against the closed-form mixture of
//! four coherent components.
//!
//! The generator is
//!
//! ```text
//! d rho/dt = -i [H', rho]
//!            + Gamma'  sum_{k != k'} (2 a_k rho a_k'^+ - a_k^+ a_k' rho - rho a_k^+ a_k')
//!            + Gamma   sum_k       (2 a_k rho a_k^+  - a_k^+ a_k rho  - rho a_k^+ a_k)
//! H' = Omega (n_1 + n_2) + Omega' (a_1^+ a_2 + a_2^+ a_1)
//! ```
//!
//! with hbar = 1. Operators are stored as sparse real triplets; density
//! operators are dense column-major matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::{
    coefficients_integral, solve_modes, CoefficientTrack, Coefficients, ModeAmplitudes, PhaseBranch,
    SystemParams,
};
use crate::error::{Error, Result};
use crate::spectral::SpectralParams;
use crate::states::{evolved_state_params, EcsKind, EcsState, EvolvedParams};
use crate::volterra::TimeGrid;

/// Largest admissible truncated-tail norm of an embedded coherent state.
pub const TAIL_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two modes, each truncated at `cutoff` photons. Basis index of
/// `|n1, n2>` is `n1 * (cutoff + 1) + n2`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    cutoff: usize,
    dim: usize,
    sqrt: Vec<f64>,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Config("Fock cutoff must be at least 1".into()));
        }
        let side = cutoff + 1;
        Ok(Self { cutoff, dim: side * side, sqrt: (0..=side).map(|k| (k as f64).sqrt()).collect() })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.cutoff + 1) + n2
    }

    fn photons(&self, i: usize) -> usize {
        i / (self.cutoff + 1) + i % (self.cutoff + 1)
    }

    /// Dense annihilation operator of mode 0 or 1.
    pub fn annihilation(&self, mode: usize) -> DMatrix<Complex64> {
        let side = self.cutoff + 1;
        let mut a = DMatrix::from_element(self.dim, self.dim, ZERO);
        for n1 in 0..side {
            for n2 in 0..side {
                let (n, lower) = if mode == 0 { (n1, n1.checked_sub(1).map(|m| self.index(m, n2))) } else {
                    (n2, n2.checked_sub(1).map(|m| self.index(n1, m)))
                };
                if let Some(r) = lower {
                    a[(r, self.index(n1, n2))] = Complex64::new(self.sqrt[n], 0.0);
                }
            }
        }
        a
    }

    /// Normalized coherent amplitudes `e^{-|z|^2/2} z^n / sqrt(n!)`, `n <= cutoff`.
    pub fn coherent(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let deficit = tail_norm(z.norm_sqr(), self.cutoff);
        if deficit >= TAIL_TOLERANCE {
            return Err(Error::Cutoff { cutoff: self.cutoff, deficit });
        }
        let mut out = Vec::with_capacity(self.cutoff + 1);
        let mut c = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
        out.push(c);
        for n in 1..=self.cutoff {
            c = c * z / self.sqrt[n];
            out.push(c);
        }
        Ok(out)
    }

    fn product(&self, x: &[Complex64], y: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(self.dim, x.iter().flat_map(|a| y.iter().map(move |b| a * b)))
    }

    /// Master-equation right-hand side at fixed coefficients, written as a
    /// stencil on the column-major matrix: every term shifts a photon number
    /// of the row or column index by at most one.
    fn generator(&self, rho: &[Complex64], c: &Coefficients, out: &mut [Complex64]) {
        let (s, d, top, sq) = (self.cutoff + 1, self.dim, self.cutoff, &self.sqrt[..]);
        let i = Complex64::new(0.0, 1.0);
        let left_n = -i * c.omega_shifted - c.gamma;
        let right_n = i * c.omega_shifted - c.gamma;
        let left_x = -i * c.omega_cross - c.gamma_cross;
        let right_x = i * c.omega_cross - c.gamma_cross;
        let (g2, gp2) = (2.0 * c.gamma, 2.0 * c.gamma_cross);
        let column = |j: usize| &rho[j * d..(j + 1) * d];

        for (j, o) in out.chunks_exact_mut(d).enumerate() {
            let (m1, m2) = (j / s, j % s);
            let col = column(j);
            let right_diag = right_n * (m1 + m2) as f64;
            for (r, (o, x)) in o.iter_mut().zip(col).enumerate() {
                *o = (left_n * self.photons(r) as f64 + right_diag) * x;
            }
            // a1^+ a2 rho and a2^+ a1 rho, one row block of fixed n1 at a time
            for n1 in 0..s {
                let row = &mut o[n1 * s..(n1 + 1) * s];
                if n1 > 0 {
                    let src = &col[(n1 - 1) * s + 1..n1 * s];
                    for (n2, (o, x)) in row[..top].iter_mut().zip(src).enumerate() {
                        *o += left_x * (sq[n1] * sq[n2 + 1]) * x;
                    }
                }
                if n1 < top {
                    let src = &col[(n1 + 1) * s..(n1 + 1) * s + top];
                    for (n2, (o, x)) in row[1..].iter_mut().zip(src).enumerate() {
                        *o += left_x * (sq[n1 + 1] * sq[n2 + 1]) * x;
                    }
                }
            }
            if m1 > 0 && m2 < top {
                let w = right_x * (sq[m1] * sq[m2 + 1]);
                o.iter_mut().zip(column(j - s + 1)).for_each(|(o, x)| *o += w * x);
            }
            if m1 < top && m2 > 0 {
                let w = right_x * (sq[m1 + 1] * sq[m2]);
                o.iter_mut().zip(column(j + s - 1)).for_each(|(o, x)| *o += w * x);
            }
            // jump terms a_k rho a_l^+ read the columns holding one more photon
            let jumps = [
                (m1 < top).then(|| (column(j + s), sq[m1 + 1], g2, gp2)),
                (m2 < top).then(|| (column(j + 1), sq[m2 + 1], gp2, g2)),
            ];
            for (u, w, rate1, rate2) in jumps.into_iter().flatten() {
                // mode-1 lowering on the row: n1 -> n1 + 1
                let f = w * rate1;
                for n1 in 0..top {
                    let src = &u[(n1 + 1) * s..(n1 + 2) * s];
                    let c1 = f * sq[n1 + 1];
                    o[n1 * s..(n1 + 1) * s].iter_mut().zip(src).for_each(|(o, x)| *o += c1 * x);
                }
                // mode-2 lowering on the row: n2 -> n2 + 1
                let f = w * rate2;
                for n1 in 0..s {
                    let src = &u[n1 * s + 1..(n1 + 1) * s];
                    for (n2, (o, x)) in o[n1 * s..n1 * s + top].iter_mut().zip(src).enumerate() {
                        *o += (f * sq[n2 + 1]) * x;
                    }
                }
            }
        }
    }
}

/// `1 - sum_{n <= cutoff} e^{-x} x^n / n!`, summed from the tail side.
fn tail_norm(x: f64, cutoff: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // log of the first omitted Poisson weight
    let mut log_term = -x + (cutoff + 1) as f64 * x.ln()
        - (1..=cutoff + 1).map(|k| (k as f64).ln()).sum::<f64>();
    let mut sum = 0.0;
    for n in cutoff + 1..cutoff + 2000 {
        let term = log_term.exp();
        sum += term;
        if term < 1e-20 * sum.max(1e-300) && n as f64 > x {
            break;
        }
        log_term += x.ln() - ((n + 1) as f64).ln();
    }
    sum.min(1.0)
}

/// Dense two-mode density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(DMatrix<Complex64>);

impl DensityOperator {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        Ok(Self(m))
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm.is_nan() || norm <= 1e-150 {
            return Err(Error::Normalization("zero state vector".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Ok(Self(&psi * psi.adjoint()))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..j {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
            worst = worst.max(self.0[(j, j)].im.abs());
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.0.clone()).eigenvalues.min()
    }

    /// Checks Hermiticity to 1e-10, trace to 1e-8 and eigenvalues >= -1e-8.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Domain(format!("operator not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-8 {
            return Err(Error::Domain(format!("trace {tr} != 1")));
        }
        let low = self.min_eigenvalue();
        if low < -1e-8 {
            return Err(Error::Domain(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    /// Mean total photon number.
    pub fn photon_number(&self, space: &FockSpace) -> f64 {
        (0..self.dim()).map(|i| space.photons(i) as f64 * self.0[(i, i)].re).sum()
    }

    fn normalized(mut m: DMatrix<Complex64>) -> Result<Self> {
        let tr = m.trace();
        if !(tr.re > 0.0 && tr.re.is_finite()) {
            return Err(Error::Normalization(format!("trace {tr}")));
        }
        m /= tr;
        Ok(Self(m))
    }
}

/// The four-component mixture for the given evolved parameters, normalized
/// in the truncated space.
fn mixture(space: &FockSpace, params: &EvolvedParams, kind: EcsKind) -> Result<DensityOperator> {
    let plus = space.coherent(params.a)?;
    let minus = space.coherent(-params.a)?;
    let (x1, x2) = if kind.is_psi() {
        (space.product(&plus, &minus), space.product(&minus, &plus))
    } else {
        (space.product(&plus, &plus), space.product(&minus, &minus))
    };
    let wd = Complex64::new(params.w_diag, 0.0);
    let wo = Complex64::new(params.sign * params.w_off, 0.0);
    let m = (&x1 * x1.adjoint() + &x2 * x2.adjoint()) * wd + (&x1 * x2.adjoint() + &x2 * x1.adjoint()) * wo;
    DensityOperator::normalized(m)
}

/// Pure density operator of an entangled coherent state.
pub fn embed_ecs(s: &EcsState, space: &FockSpace) -> Result<DensityOperator> {
    let plus = space.coherent(s.alpha)?;
    let minus = space.coherent(-s.alpha)?;
    let (x1, x2) = if s.kind.is_psi() {
        (space.product(&plus, &minus), space.product(&minus, &plus))
    } else {
        (space.product(&plus, &plus), space.product(&minus, &minus))
    };
    let psi = x1 + x2 * Complex64::new(s.kind.sign(), 0.0);
    if psi.norm() < 1e-12 {
        return Err(Error::Normalization(format!("{} vanishes at alpha = {}", s.kind, s.alpha)));
    }
    DensityOperator::pure(&psi)
}

/// Closed-form evolved state at sample `t_index`, projected onto the space.
pub fn closed_form_in_fock(
    s: &EcsState,
    m: &ModeAmplitudes,
    t_index: usize,
    space: &FockSpace,
) -> Result<DensityOperator> {
    mixture(space, &evolved_state_params(s, m, t_index), s.kind)
}

/// Half the trace norm of `r1 - r2`.
pub fn trace_distance(r1: &DensityOperator, r2: &DensityOperator) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch(r1.dim(), r2.dim()));
    }
    let mut diff = &r1.0 - &r2.0;
    diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(diff);
    Ok((0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>()).min(1.0))
}

/// Fixed-step classical Runge–Kutta integration across `grid`, reading the
/// coefficients by linear interpolation. `observe` sees every step,
/// including the initial state at index 0.
pub fn integrate_master_observed<F>(
    rho0: &DensityOperator,
    coeffs: &CoefficientTrack,
    space: &FockSpace,
    grid: &TimeGrid,
    mut observe: F,
) -> Result<DensityOperator>
where
    F: FnMut(usize, f64, &DensityOperator) -> Result<()>,
{
    if rho0.dim() != space.dim() {
        return Err(Error::DimensionMismatch(rho0.dim(), space.dim()));
    }
    if coeffs.grid().t_max() < grid.t_max() * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "coefficient track ends at {} before the integration horizon {}",
            coeffs.grid().t_max(),
            grid.t_max()
        )));
    }
    let last = coeffs.grid().index_of(grid.t_max());
    let max_omega = coeffs.samples()[..=last]
        .iter()
        .map(|c| c.omega_shifted.abs())
        .fold(0.0, f64::max);
    if grid.dt() * max_omega > 0.1 {
        return Err(Error::Config(format!(
            "integration step {} too large for |Omega| = {max_omega}: need dt * |Omega| <= 0.1",
            grid.dt()
        )));
    }

    let n = space.dim() * space.dim();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut stage = vec![ZERO; n];
    let h = grid.dt();
    let mut current = rho0.clone();
    observe(0, 0.0, &current)?;
    for step in 1..grid.count() {
        let t = grid.time(step - 1);
        let (c0, cm, c1) = (coeffs.at(t), coeffs.at(t + 0.5 * h), coeffs.at(t + h));
        let rho = current.0.as_mut_slice();
        space.generator(rho, &c0, &mut k1);
        axpy(rho, &k1, 0.5 * h, &mut stage);
        space.generator(&stage, &cm, &mut k2);
        axpy(rho, &k2, 0.5 * h, &mut stage);
        space.generator(&stage, &cm, &mut k3);
        axpy(rho, &k3, h, &mut stage);
        space.generator(&stage, &c1, &mut k4);
        for (i, r) in rho.iter_mut().enumerate() {
            *r += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        let t_new = grid.time(step);
        let tr = current.trace();
        if !(tr.re.is_finite() && tr.im.is_finite()) || (tr - 1.0).norm() > 1e-6 {
            return Err(Error::Integration { time: t_new, reason: format!("trace drifted to {tr}") });
        }
        let herm = current.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Integration { time: t_new, reason: format!("Hermiticity lost ({herm:e})") });
        }
        observe(step, t_new, &current)?;
    }
    Ok(current)
}

fn axpy(x: &[Complex64], y: &[Complex64], a: f64, out: &mut [Complex64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + a * y;
    }
}

/// Endpoint of [`integrate_master_observed`].
pub fn integrate_master(
    rho0: &DensityOperator,
    coeffs: &CoefficientTrack,
    space: &FockSpace,
    grid: &TimeGrid,
) -> Result<DensityOperator> {
    integrate_master_observed(rho0, coeffs, space, grid, |_, _, _| Ok(()))
}

/// Settings for one oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Coefficient grid step.
    pub dt: f64,
    /// Integration horizon.
    pub t_max: f64,
    /// Runge–Kutta step as a multiple of `dt`.
    pub stride: usize,
    /// Compare every this many integrator steps.
    pub compare_every: usize,
    pub cutoff: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { dt: 2e-3, t_max: 5.0, stride: 1, compare_every: 125, cutoff: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub kind: EcsKind,
    pub lambda: PhaseBranch,
    /// `(t, trace distance)` at every comparison time.
    pub distances: Vec<(f64, f64)>,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl OracleReport {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().map(|d| d.1).fold(0.0, f64::max)
    }

    pub fn final_distance(&self) -> f64 {
        self.distances.last().map_or(0.0, |d| d.1)
    }
}

/// Integrates the master equation from `s` with the exact coefficient track
/// and measures the trace distance to the closed-form state. `tamper` may
/// modify the coefficient track first (negative controls).
pub fn run_oracle(
    s: &EcsState,
    sys: &SystemParams,
    env: &SpectralParams,
    settings: &OracleSettings,
    tamper: impl Fn(Coefficients) -> Coefficients,
) -> Result<OracleReport> {
    let coeff_grid = TimeGrid::new(settings.t_max, settings.dt)?;
    let modes = solve_modes(sys, env, &coeff_grid)?;
    let coeffs = coefficients_integral(sys, env, &modes)?.map(tamper);
    let space = FockSpace::new(settings.cutoff)?;
    let step_grid = TimeGrid::new(settings.t_max, settings.dt * settings.stride as f64)?;
    let rho0 = embed_ecs(s, &space)?;
    let mut report = OracleReport {
        kind: s.kind,
        lambda: sys.lambda,
        distances: Vec::new(),
        max_trace_drift: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    let last = step_grid.count() - 1;
    integrate_master_observed(&rho0, &coeffs, &space, &step_grid, |k, t, rho| {
        report.max_trace_drift = report.max_trace_drift.max((rho.trace() - 1.0).norm());
        if k % settings.compare_every.max(1) == 0 || k == last {
            let exact = closed_form_in_fock(s, &modes, k * settings.stride, &space)?;
            report.distances.push((t, trace_distance(rho, &exact)?));
            report.min_eigenvalue = report.min_eigenvalue.min(rho.min_eigenvalue());
        }
        Ok(())
    })?;
    Ok(report)
}
