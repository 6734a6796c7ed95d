//! Entangled coherent states, their closed-form evolution, and concurrence.
//!
//! Coherent kets are written unnormalized, `|z> = sum z^n / sqrt(n!) |n>`, so
//! `<z|w> = e^{conj(z) w}`. Every component of an evolved state shares the
//! amplitude magnitude `|a(t)|`, which lets the two-mode state be rewritten in
//! the orthonormal single-mode basis spanned by `|a>` and `|-a>`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::dynamics::{MarkovConstants, ModeAmplitudes, SystemParams};
use crate::error::{Error, Result};
use crate::spectral::SpectralParams;
use crate::dynamics::solve_modes;
use crate::volterra::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EcsKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl EcsKind {
    pub const ALL: [EcsKind; 4] = [Self::PsiPlus, Self::PsiMinus, Self::PhiPlus, Self::PhiMinus];

    /// `+1` for the symmetric superpositions, `-1` for the antisymmetric ones.
    pub fn sign(self) -> f64 {
        match self {
            Self::PsiPlus | Self::PhiPlus => 1.0,
            Self::PsiMinus | Self::PhiMinus => -1.0,
        }
    }

    /// psi states live on the relative mode and follow `F_+`.
    pub fn is_psi(self) -> bool {
        matches!(self, Self::PsiPlus | Self::PsiMinus)
    }

    /// Sign of the second mode's amplitude in the first component:
    /// `|a, -a>` for psi, `|a, a>` for phi.
    fn partner(self) -> f64 {
        if self.is_psi() { -1.0 } else { 1.0 }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PsiPlus => "psi_plus",
            Self::PsiMinus => "psi_minus",
            Self::PhiPlus => "phi_plus",
            Self::PhiMinus => "phi_minus",
        }
    }
}

impl fmt::Display for EcsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EcsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown state kind {s:?}")))
    }
}

/// `(|alpha, -+alpha> +- |-alpha, +-alpha>) / sqrt(N_+-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcsState {
    pub kind: EcsKind,
    pub alpha: Complex64,
}

impl EcsState {
    pub fn new(kind: EcsKind, alpha: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
        }
        let state = Self { kind, alpha };
        let n = state.normalization();
        if n.is_nan() || n <= 0.0 || n.is_infinite() {
            return Err(Error::Normalization(format!(
                "N = {} for {kind} at alpha = {alpha}",
                state.normalization()
            )));
        }
        Ok(state)
    }

    /// `N_+- = 2 (e^{2|alpha|^2} +- e^{-2|alpha|^2})`.
    pub fn normalization(&self) -> f64 {
        let x = 2.0 * self.alpha.norm_sqr();
        if self.kind.sign() > 0.0 {
            4.0 * x.cosh()
        } else {
            4.0 * x.sinh()
        }
    }
}

/// The four numbers fixing the evolved state before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedParams {
    pub a: Complex64,
    pub w_diag: f64,
    pub w_off: f64,
    pub sign: f64,
}

impl EvolvedParams {
    fn from_amplitude(s: &EcsState, f: Complex64) -> Self {
        let a = s.alpha * f;
        let lost = s.alpha.norm_sqr() - a.norm_sqr();
        Self { a, w_diag: (2.0 * lost).exp(), w_off: (-2.0 * lost).exp(), sign: s.kind.sign() }
    }
}

pub fn evolved_state_params(s: &EcsState, m: &ModeAmplitudes, t_index: usize) -> EvolvedParams {
    let track = if s.kind.is_psi() { &m.f_plus } else { &m.f_minus };
    EvolvedParams::from_amplitude(s, track.at(t_index))
}

type C4 = Matrix4<Complex64>;

/// Two-qubit density matrix in the basis `|00>, |01>, |10>, |11>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensityMatrix(C4);

impl QubitDensityMatrix {
    /// Checks Hermiticity and unit trace to 1e-12 and eigenvalues >= -1e-10.
    pub fn new(m: C4) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::Domain(format!("matrix not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::Domain(format!("trace {tr} != 1")));
        }
        let min_eig = SymmetricEigen::new(m).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::Domain(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self(m))
    }

    pub fn pure(psi: Vector4<Complex64>) -> Result<Self> {
        let psi = psi / Complex64::new(psi.norm(), 0.0);
        Self::new(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &C4 {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

fn kron2(x: [f64; 2], y: [f64; 2]) -> Vector4<Complex64> {
    Vector4::new(x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]).map(|r| Complex64::new(r, 0.0))
}

/// Rewrites the evolved state in the orthonormal basis
/// `|0> = e^{-|a|^2/2} |a>`, `|1> = (e^{-|a|^2/2} |-a> - p |0>) / sqrt(1 - p^2)`,
/// `p = e^{-2 |a|^2}`, and normalizes to unit trace.
pub fn qubit_embed(params: &EvolvedParams, kind: EcsKind) -> Result<QubitDensityMatrix> {
    let p = (-2.0 * params.a.norm_sqr()).exp();
    if 1.0 - p < 1e-12 {
        let mut vac = C4::zeros();
        vac[(0, 0)] = Complex64::new(1.0, 0.0);
        return QubitDensityMatrix::new(vac);
    }
    // normalized |a> -> (1, 0), |-a> -> (p, sqrt(1 - p^2))
    let plus = [1.0, 0.0];
    let minus = [p, (1.0 - p * p).sqrt()];
    let (first, second) = if kind.partner() < 0.0 {
        (kron2(plus, minus), kron2(minus, plus))
    } else {
        (kron2(plus, plus), kron2(minus, minus))
    };
    let diag = first * first.adjoint() + second * second.adjoint();
    let off = first * second.adjoint() + second * first.adjoint();
    let rho = diag * Complex64::new(params.w_diag, 0.0) + off * Complex64::new(params.sign * params.w_off, 0.0);
    let tr = rho.trace();
    if !(tr.re > 0.0 && tr.re.is_finite()) {
        return Err(Error::Normalization(format!("embedded state has trace {tr}")));
    }
    let mut rho = rho / tr;
    // Hermitian by construction; symmetrize away rounding
    rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    QubitDensityMatrix::new(rho)
}

/// Spin-flip operator `Y x Y`, real and antidiagonal `(-1, 1, 1, -1)`.
fn spin_flip() -> C4 {
    let mut yy = C4::zeros();
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    yy
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, where `l_i^2` are the
/// eigenvalues of `rho (Y x Y) rho* (Y x Y)` in decreasing order.
///
/// The `l_i` are obtained as singular values of `W^T (Y x Y) W`, with
/// `rho = W W^dagger` built from the eigenvectors of `rho`; this is the
/// square root of the Hermitian form `sqrt(rho) rho~ sqrt(rho)` without ever
/// taking square roots of rounding-level eigenvalues of the product.
pub fn concurrence(rho: &QubitDensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    let eig = SymmetricEigen::new(*m);
    let floor = 1e-13 * m.trace().re.abs();
    let mut w = C4::zeros();
    for (j, &e) in eig.eigenvalues.iter().enumerate() {
        if e > floor {
            w.set_column(j, &(eig.eigenvectors.column(j) * Complex64::new(e.sqrt(), 0.0)));
        }
    }
    let tau = w.transpose() * spin_flip() * w;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    let c = l[0] - l[1] - l[2] - l[3];
    if !c.is_finite() {
        return Err(Error::Domain("concurrence is not finite".into()));
    }
    Ok(c.clamp(0.0, 1.0))
}

/// Concurrence at every sample of a set of mode amplitudes.
pub fn concurrence_from_modes(s: &EcsState, m: &ModeAmplitudes) -> Result<Vec<f64>> {
    (0..m.grid().count())
        .map(|k| {
            let params = evolved_state_params(s, m, k);
            concurrence(&qubit_embed(&params, s.kind)?)
        })
        .collect()
}

/// Non-Markovian concurrence track.
pub fn concurrence_track(
    s: &EcsState,
    sys: &SystemParams,
    env: &SpectralParams,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    concurrence_from_modes(s, &solve_modes(sys, env, grid)?)
}

/// Concurrence under the Markov-approximated amplitudes.
pub fn markov_concurrence_track(
    s: &EcsState,
    sys: &SystemParams,
    env: &SpectralParams,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let amplitudes = MarkovConstants::new(env, sys.omega0)?.amplitudes(sys, grid)?;
    concurrence_from_modes(s, &amplitudes)
}
