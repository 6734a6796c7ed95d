//! Ohmic-family spectral densities and the bath correlation (memory) kernel.
//!
//! All frequencies are in units of the mode frequency, so `omega0 = 1` in
//! every caller inside this crate; the functions still take it explicitly.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Coupling to the bath: `J(w) = eta * w * (w / omega_c)^(n - 1) * exp(-w / omega_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub eta: f64,
    pub omega_c: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathClass {
    SubOhmic,
    Ohmic,
    SuperOhmic,
}

impl SpectralParams {
    pub fn new(eta: f64, omega_c: f64, n: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("eta must be >= 0, got {eta}")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::Domain(format!("omega_c must be > 0, got {omega_c}")));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("ohmicity n must be > 0, got {n}")));
        }
        Ok(Self { eta, omega_c, n })
    }

    /// Ohmic bath (`n = 1`).
    pub fn ohmic(eta: f64, omega_c: f64) -> Result<Self> {
        Self::new(eta, omega_c, 1.0)
    }

    pub fn class(&self) -> BathClass {
        if self.n == 1.0 {
            BathClass::Ohmic
        } else if self.n < 1.0 {
            BathClass::SubOhmic
        } else {
            BathClass::SuperOhmic
        }
    }

    fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..*self }
    }

    fn j_unchecked(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        let x = omega / self.omega_c;
        self.eta * omega * x.powf(self.n - 1.0) * (-x).exp()
    }

    /// Frequency beyond which `J` carries less than ~1e-16 of its weight,
    /// counted from `from`.
    fn window_end(&self, from: f64, scale: f64) -> f64 {
        from + scale * (50.0 + 5.0 * self.n) * self.omega_c
    }
}

/// Spectral density `J(omega)`.
pub fn j_omega(p: &SpectralParams, omega: f64) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::Domain(format!("frequency must be >= 0, got {omega}")));
    }
    Ok(p.j_unchecked(omega))
}

/// Bath correlation function `mu(t) = \int_0^\infty J(w) e^{-iwt} dw`, in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryKernel {
    params: SpectralParams,
    prefactor: f64,
}

impl MemoryKernel {
    pub fn new(params: SpectralParams) -> Self {
        let prefactor = params.eta * params.omega_c * params.omega_c * gamma(params.n + 1.0);
        Self { params, prefactor }
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    /// `eta * omega_c^2 * Gamma(n + 1) / (1 + i omega_c t)^(n + 1)`; valid for
    /// negative `t` as well, where it returns the conjugate of `mu(-t)`.
    pub fn value(&self, t: f64) -> Complex64 {
        if self.prefactor == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let base = Complex64::new(1.0, self.params.omega_c * t);
        self.prefactor / base.powf(self.params.n + 1.0)
    }
}

/// Closed-form kernel with domain checks, `t >= 0`.
pub fn kernel_mu(p: &SpectralParams, t: f64) -> Result<Complex64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("kernel time must be >= 0, got {t}")));
    }
    Ok(MemoryKernel::new(*p).value(t))
}

/// The same kernel by direct quadrature of its Fourier integral. Used to
/// validate [`kernel_mu`]; far too slow for the Volterra march.
pub fn kernel_mu_quadrature(p: &SpectralParams, t: f64) -> Result<Complex64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("kernel time must be >= 0, got {t}")));
    }
    if p.eta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let hi = p.window_end(0.0, 1.0);
    // One breakpoint per cutoff scale keeps the first bisections useful.
    let breaks: Vec<f64> = (1..(hi / p.omega_c) as usize)
        .map(|k| k as f64 * p.omega_c)
        .collect();
    let tol = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 200_000 };
    quad::integrate(
        |w| p.j_unchecked(w) * Complex64::new(0.0, -w * t).exp(),
        0.0,
        hi,
        &breaks,
        tol,
    )
}

/// Markovian decay rate `pi * J(omega0)`.
pub fn markov_decay(p: &SpectralParams, omega0: f64) -> Result<f64> {
    if omega0.is_nan() || omega0 <= 0.0 {
        return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
    }
    Ok(PI * p.j_unchecked(omega0))
}

/// Markovian frequency shift, the principal value `P \int_0^\infty J(w) / (w - omega0) dw`.
///
/// Computed by singularity subtraction: `[J(w) - J(omega0)] / (w - omega0)` is
/// integrated on `[0, W]`, `J(omega0) ln((W - omega0) / omega0)` supplies the
/// subtracted part, and the tail beyond `W` is below double precision. Two
/// windows are compared to certify convergence.
pub fn markov_shift(p: &SpectralParams, omega0: f64) -> Result<f64> {
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
    }
    if p.eta == 0.0 {
        return Ok(0.0);
    }
    // Linear in eta: evaluate at unit coupling and rescale.
    let unit = p.with_eta(1.0);
    let j0 = unit.j_unchecked(omega0);
    let regular = |w: f64| {
        if w == omega0 {
            0.0
        } else {
            (unit.j_unchecked(w) - j0) / (w - omega0)
        }
    };
    let windowed = |scale: f64| -> Result<f64> {
        let hi = unit.window_end(omega0, scale);
        let breaks = [omega0, 2.0 * omega0, unit.omega_c, unit.n * unit.omega_c];
        let tol = Tolerance { abs: 0.0, rel: 1e-11, max_intervals: 50_000 };
        let body = quad::integrate_real(regular, 0.0, hi, &breaks, tol)?;
        Ok(body + j0 * ((hi - omega0) / omega0).ln())
    };
    let base = windowed(1.0)?;
    let wide = windowed(1.5)?;
    let rel = (base - wide).abs() / wide.abs().max(f64::MIN_POSITIVE);
    if rel > 1e-6 {
        return Err(Error::Quadrature(format!(
            "principal value unstable under window refinement: {base} vs {wide} (rel {rel:e})"
        )));
    }
    Ok(p.eta * wide)
}
