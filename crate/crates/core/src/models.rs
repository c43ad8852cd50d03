//! Right-hand sides of the 1D vorticity models.
//!
//! The MHD models evolve the Elsässer vorticities `Ω` (of `p = u + B`) and
//! `ω` (of `m = u - B`), with velocities recovered from `p_x = HΩ`, `m_x = Hω`.
//! The Okamoto–Sakajo–Wunsch family evolves a single vorticity; it is carried
//! in the `ω` slot of [`MhdState`] with `Ω ≡ 0`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{derivative, hilbert, velocity_from_vorticity, Gauge, SpectralField};

#[derive(Debug, Clone)]
pub struct MhdState {
    /// `Ω`, vorticity of `p`.
    pub omega_p: SpectralField,
    /// `ω`, vorticity of `m`.
    pub omega_m: SpectralField,
    pub time: f64,
}

impl MhdState {
    pub fn new(omega_p: SpectralField, omega_m: SpectralField, time: f64) -> Result<Self> {
        if !omega_p.same_grid(&omega_m) {
            return Err(Error::GridMismatch {
                left: omega_p.len(),
                right: omega_m.len(),
            });
        }
        Ok(MhdState {
            omega_p,
            omega_m,
            time,
        })
    }

    /// Single-vorticity state for the OSW family.
    pub fn scalar(omega: SpectralField, time: f64) -> Self {
        MhdState {
            omega_p: SpectralField::zeros(omega.grid()),
            omega_m: omega,
            time,
        }
    }

    pub fn n(&self) -> usize {
        self.omega_p.len()
    }

    pub fn is_finite(&self) -> bool {
        self.omega_p.is_finite() && self.omega_m.is_finite() && self.time.is_finite()
    }

    /// Max-norm distance over both fields.
    pub fn max_abs_diff(&self, other: &MhdState) -> f64 {
        self.omega_p
            .max_abs_diff(&other.omega_p)
            .max(self.omega_m.max_abs_diff(&other.omega_m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Transport plus coupling, parameter `a` on the transport terms.
    Mhd1d,
    /// The un-reduced model including the stretching terms.
    Mhd1dFull,
    /// Pure transport, no coupling.
    Transport,
    /// `ω_t + a u ω_x - ω Hω = 0`: CLM at `a = 0`, De Gregorio at `a = 1`.
    Osw,
}

impl ModelKind {
    pub const NAMES: [&'static str; 4] = ["mhd1d", "mhd1d-full", "transport", "osw"];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mhd1d => "mhd1d",
            ModelKind::Mhd1dFull => "mhd1d-full",
            ModelKind::Transport => "transport",
            ModelKind::Osw => "osw",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mhd1d" => Ok(ModelKind::Mhd1d),
            "mhd1d-full" | "mhd1d_full" => Ok(ModelKind::Mhd1dFull),
            "transport" => Ok(ModelKind::Transport),
            "osw" => Ok(ModelKind::Osw),
            other => Err(format!(
                "unknown model `{other}`; valid models: {}",
                Self::NAMES.join(", ")
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a: f64,
    pub gauge: Gauge,
    /// Collapse the doubled transport terms of the full model into single ones.
    pub full_model_dedup: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, a: f64) -> Self {
        ModelSpec {
            kind,
            a,
            gauge: Gauge::ZeroMean,
            full_model_dedup: false,
        }
    }

    pub fn mhd1d(a: f64) -> Self {
        Self::new(ModelKind::Mhd1d, a)
    }

    pub fn mhd1d_full() -> Self {
        Self::new(ModelKind::Mhd1dFull, 1.0)
    }

    pub fn transport() -> Self {
        Self::new(ModelKind::Transport, 1.0)
    }

    pub fn osw(a: f64) -> Self {
        Self::new(ModelKind::Osw, a)
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }
}

fn checked(field: SpectralField, name: &str, time: f64) -> Result<SpectralField> {
    field.ensure_finite(name, time)?;
    Ok(field)
}

struct Velocities {
    p: SpectralField,
    m: SpectralField,
}

fn velocities(s: &MhdState, gauge: Gauge) -> Result<Velocities> {
    let t = s.time;
    Ok(Velocities {
        p: checked(velocity_from_vorticity(&s.omega_p, gauge), "p", t)?,
        m: checked(velocity_from_vorticity(&s.omega_m, gauge), "m", t)?,
    })
}

/// `dΩ = -a m Ω_x + ω p_x`, `dω = -a p ω_x + Ω m_x`.
pub fn rhs_mhd1d(s: &MhdState, spec: &ModelSpec) -> Result<(SpectralField, SpectralField)> {
    let t = s.time;
    let Velocities { p, m } = velocities(s, spec.gauge)?;
    let px = hilbert(&s.omega_p);
    let mx = hilbert(&s.omega_m);
    let big_x = derivative(&s.omega_p);
    let small_x = derivative(&s.omega_m);
    let a = spec.a;

    let d_big: Vec<f64> = (0..s.n())
        .map(|j| -a * m.values()[j] * big_x.values()[j] + s.omega_m.values()[j] * px.values()[j])
        .collect();
    let d_small: Vec<f64> = (0..s.n())
        .map(|j| -a * p.values()[j] * small_x.values()[j] + s.omega_p.values()[j] * mx.values()[j])
        .collect();
    let grid = s.omega_p.grid();
    Ok((
        checked(SpectralField::from_values(grid, d_big)?, "dOmega", t)?,
        checked(SpectralField::from_values(grid, d_small)?, "domega", t)?,
    ))
}

/// The full model with stretching terms. Without dedup the transport terms
/// appear twice: `dΩ = -2 m Ω_x + Ω m_x + ω p_x`, `dω = -2 p ω_x + ω p_x + Ω m_x`.
pub fn rhs_mhd1d_full(s: &MhdState, spec: &ModelSpec) -> Result<(SpectralField, SpectralField)> {
    let t = s.time;
    let Velocities { p, m } = velocities(s, spec.gauge)?;
    let px = hilbert(&s.omega_p);
    let mx = hilbert(&s.omega_m);
    let big_x = derivative(&s.omega_p);
    let small_x = derivative(&s.omega_m);
    let transport = if spec.full_model_dedup { 1.0 } else { 2.0 };
    let (big, small) = (s.omega_p.values(), s.omega_m.values());

    let d_big: Vec<f64> = (0..s.n())
        .map(|j| {
            -transport * m.values()[j] * big_x.values()[j]
                + big[j] * mx.values()[j]
                + small[j] * px.values()[j]
        })
        .collect();
    let d_small: Vec<f64> = (0..s.n())
        .map(|j| {
            -transport * p.values()[j] * small_x.values()[j]
                + small[j] * px.values()[j]
                + big[j] * mx.values()[j]
        })
        .collect();
    let grid = s.omega_p.grid();
    Ok((
        checked(SpectralField::from_values(grid, d_big)?, "dOmega", t)?,
        checked(SpectralField::from_values(grid, d_small)?, "domega", t)?,
    ))
}

/// `dΩ = -m Ω_x`, `dω = -p ω_x`.
pub fn rhs_transport(s: &MhdState, spec: &ModelSpec) -> Result<(SpectralField, SpectralField)> {
    let t = s.time;
    let Velocities { p, m } = velocities(s, spec.gauge)?;
    let d_big = m.zip_with(&derivative(&s.omega_p), |v, dx| -v * dx);
    let d_small = p.zip_with(&derivative(&s.omega_m), |v, dx| -v * dx);
    Ok((
        checked(d_big, "dOmega", t)?,
        checked(d_small, "domega", t)?,
    ))
}

/// `dω = -a u ω_x + ω Hω` with `u_x = Hω`.
pub fn rhs_osw(w: &SpectralField, a: f64, gauge: Gauge) -> Result<SpectralField> {
    rhs_osw_at(w, a, gauge, f64::NAN)
}

fn rhs_osw_at(w: &SpectralField, a: f64, gauge: Gauge, time: f64) -> Result<SpectralField> {
    let u = checked(velocity_from_vorticity(w, gauge), "u", time)?;
    let hw = hilbert(w);
    let wx = derivative(w);
    let out: Vec<f64> = (0..w.len())
        .map(|j| -a * u.values()[j] * wx.values()[j] + w.values()[j] * hw.values()[j])
        .collect();
    checked(SpectralField::from_values(w.grid(), out)?, "domega", time)
}

/// Dispatches on the model kind. For `Osw` the `Ω` slot has zero tendency.
pub fn rhs(s: &MhdState, spec: &ModelSpec) -> Result<(SpectralField, SpectralField)> {
    match spec.kind {
        ModelKind::Mhd1d => rhs_mhd1d(s, spec),
        ModelKind::Mhd1dFull => rhs_mhd1d_full(s, spec),
        ModelKind::Transport => rhs_transport(s, spec),
        ModelKind::Osw => {
            let d = rhs_osw_at(&s.omega_m, spec.a, spec.gauge, s.time)?;
            Ok((SpectralField::zeros(s.omega_m.grid()), d))
        }
    }
}

/// Velocities and physical fields recovered from a state.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    pub p: SpectralField,
    pub m: SpectralField,
    pub u: SpectralField,
    pub b: SpectralField,
    pub ux: SpectralField,
    pub bx: SpectralField,
}

/// `u = (p+m)/2`, `B = (p-m)/2`, `u_x = H(Ω+ω)/2`, `B_x = H(Ω-ω)/2`.
pub fn derived_fields(s: &MhdState, gauge: Gauge) -> DerivedFields {
    let p = velocity_from_vorticity(&s.omega_p, gauge);
    let m = velocity_from_vorticity(&s.omega_m, gauge);
    let u = p.zip_with(&m, |a, b| 0.5 * (a + b));
    let b = p.zip_with(&m, |a, b| 0.5 * (a - b));
    let ux = hilbert(&s.omega_p.add(&s.omega_m)).scale(0.5);
    let bx = hilbert(&s.omega_p.sub(&s.omega_m)).scale(0.5);
    DerivedFields { p, m, u, b, ux, bx }
}

/// Like [`derived_fields`], but for the OSW family the fluid velocity is `m`
/// itself (`u_x = Hω`) and there is no magnetic field.
pub fn physical_fields(s: &MhdState, spec: &ModelSpec) -> DerivedFields {
    match spec.kind {
        ModelKind::Osw => {
            let grid = s.omega_m.grid();
            let m = velocity_from_vorticity(&s.omega_m, spec.gauge);
            DerivedFields {
                p: SpectralField::zeros(grid),
                u: m.clone(),
                m,
                b: SpectralField::zeros(grid),
                ux: hilbert(&s.omega_m),
                bx: SpectralField::zeros(grid),
            }
        }
        _ => derived_fields(s, spec.gauge),
    }
}
