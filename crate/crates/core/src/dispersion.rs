//! Dielectric permittivity on the imaginary frequency axis, `ε(iζ)`.
//!
//! Three closed-form models are provided (Drude, plasma and a nondispersive
//! constant) together with tabulated data interpolated in log-log space.
//! Everything here takes SI angular frequencies in rad/s; electron-volts only
//! appear in the preset constructors.

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use thiserror::Error;

use crate::constants::EV_TO_RAD_PER_S;

/// Names accepted by [`material_preset`].
pub const PRESET_NAMES: [&str; 3] = ["Au", "Cu", "Al"];

/// Which end of a table a query fell off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DispersionError {
    #[error("imaginary frequency must be positive and finite, got {zeta} rad/s")]
    Domain { zeta: f64 },

    #[error("invalid model parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "zeta = {zeta:e} rad/s is outside the table ({bound} bound {limit:e} rad/s) and no fallback model is attached"
    )]
    OutOfRange { zeta: f64, bound: Bound, limit: f64 },

    #[error("unknown material preset {name:?}; available presets: {}", PRESET_NAMES.join(", "))]
    UnknownPreset { name: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("data row {row} (line {line}): {message}")]
    Validation { row: usize, line: u64, message: String },

    #[error("permittivity table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, DispersionError>;

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta.is_finite() {
        Ok(())
    } else {
        Err(DispersionError::Domain { zeta })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DispersionError::Parameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// Drude parameters: plasma frequency and relaxation frequency, both in rad/s.
///
/// A nonzero relaxation frequency is required; it is what removes the
/// zero-frequency TE contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    omega_p: f64,
    nu: f64,
}

impl DrudeParams {
    pub fn new(omega_p: f64, nu: f64) -> Result<Self> {
        Ok(Self {
            omega_p: positive("omega_p", omega_p)?,
            nu: positive("nu", nu)?,
        })
    }

    /// Parameters given in eV, as usually quoted for metals.
    pub fn from_ev(omega_p_ev: f64, nu_ev: f64) -> Result<Self> {
        Self::new(omega_p_ev * EV_TO_RAD_PER_S, nu_ev * EV_TO_RAD_PER_S)
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Dissipationless plasma model parameter (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaParams {
    omega_p: f64,
}

impl PlasmaParams {
    pub fn new(omega_p: f64) -> Result<Self> {
        Ok(Self {
            omega_p: positive("omega_p", omega_p)?,
        })
    }

    pub fn from_ev(omega_p_ev: f64) -> Result<Self> {
        Self::new(omega_p_ev * EV_TO_RAD_PER_S)
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }
}

/// `ε(iζ) = 1 + ω_p² / (ζ (ζ + ν))`.
pub fn drude_eps(zeta: f64, params: &DrudeParams) -> Result<f64> {
    check_zeta(zeta)?;
    let wp = params.omega_p;
    Ok(1.0 + wp * wp / (zeta * (zeta + params.nu)))
}

/// `ε(iζ) = 1 + ω_p² / ζ²`.
pub fn plasma_eps(zeta: f64, params: &PlasmaParams) -> Result<f64> {
    check_zeta(zeta)?;
    let r = params.omega_p / zeta;
    Ok(1.0 + r * r)
}

/// Sampled `ε(iζ)` with strictly increasing `ζ` and `ε > 1` at every knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityTable {
    // (ln ζ, ln(ε − 1)) knots; interpolation is linear in these coordinates.
    log_zeta: Vec<f64>,
    log_excess: Vec<f64>,
    points: Vec<(f64, f64)>,
}

impl PermittivityTable {
    /// Builds a table from `(ζ, ε)` pairs, enforcing the invariants.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(DispersionError::Table(format!(
                "at least 2 points are required, got {}",
                points.len()
            )));
        }
        for (i, &(zeta, eps)) in points.iter().enumerate() {
            let row = i + 1;
            validate_point(row, row as u64, zeta, eps)?;
            if i > 0 && zeta <= points[i - 1].0 {
                return Err(DispersionError::Validation {
                    row,
                    line: row as u64,
                    message: format!(
                        "zeta must be strictly increasing ({:e} follows {:e})",
                        zeta,
                        points[i - 1].0
                    ),
                });
            }
        }
        let log_zeta = points.iter().map(|p| p.0.ln()).collect();
        let log_excess = points.iter().map(|p| (p.1 - 1.0).ln()).collect();
        Ok(Self {
            log_zeta,
            log_excess,
            points,
        })
    }

    /// Samples `model` at `count` log-spaced frequencies covering `[zeta_min, zeta_max]`.
    pub fn sample(model: &Material, zeta_min: f64, zeta_max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(zeta_min > 0.0 && zeta_max > zeta_min) {
            return Err(DispersionError::Table(
                "sampling needs 0 < zeta_min < zeta_max and count >= 2".into(),
            ));
        }
        let (l0, l1) = (zeta_min.ln(), zeta_max.ln());
        let points = (0..count)
            .map(|i| {
                let zeta = if i == 0 {
                    zeta_min
                } else if i + 1 == count {
                    zeta_max
                } else {
                    (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()
                };
                model.eps(zeta).map(|eps| (zeta, eps))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(zeta_min, zeta_max)` in rad/s.
    pub fn range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn contains(&self, zeta: f64) -> bool {
        let (lo, hi) = self.range();
        zeta >= lo && zeta <= hi
    }
}

fn validate_point(row: usize, line: u64, zeta: f64, eps: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(DispersionError::Validation {
            row,
            line,
            message: format!("zeta must be positive and finite, got {zeta}"),
        });
    }
    if !(eps > 1.0 && eps.is_finite()) {
        return Err(DispersionError::Validation {
            row,
            line,
            message: format!("eps must be finite and greater than 1, got {eps}"),
        });
    }
    Ok(())
}

/// Log-log interpolation of a table. Exact at the knots; no extrapolation.
pub fn tabulated_eps(table: &PermittivityTable, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let (lo, hi) = table.range();
    if zeta < lo {
        return Err(DispersionError::OutOfRange {
            zeta,
            bound: Bound::Lower,
            limit: lo,
        });
    }
    if zeta > hi {
        return Err(DispersionError::OutOfRange {
            zeta,
            bound: Bound::Upper,
            limit: hi,
        });
    }
    let pts = &table.points;
    // index of the first knot with ζ >= query
    let idx = pts.partition_point(|p| p.0 < zeta);
    if pts[idx].0 == zeta {
        return Ok(pts[idx].1);
    }
    let (j0, j1) = (idx - 1, idx);
    let x = zeta.ln();
    let t = (x - table.log_zeta[j0]) / (table.log_zeta[j1] - table.log_zeta[j0]);
    let ln_excess = table.log_excess[j0] + t * (table.log_excess[j1] - table.log_excess[j0]);
    Ok(1.0 + ln_excess.exp())
}

/// Reads a permittivity CSV with header `zeta_rad_per_s,eps`.
///
/// Lines starting with `#` are ignored. Row numbers in validation errors count
/// data rows from 1; line numbers count physical lines of the input.
pub fn load_permittivity_table<R: Read>(source: R) -> Result<PermittivityTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| DispersionError::Parse {
            line: e.position().map_or(1, |p| p.line()),
            message: e.to_string(),
        })?
        .clone();
    let header_line = reader.position().line().max(1);
    if headers.len() != 2 || &headers[0] != "zeta_rad_per_s" || &headers[1] != "eps" {
        return Err(DispersionError::Parse {
            line: header_line,
            message: format!(
                "expected header `zeta_rad_per_s,eps`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut points: Vec<(f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DispersionError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(DispersionError::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parse = |field: &str, name: &str| {
            field.parse::<f64>().map_err(|_| DispersionError::Parse {
                line,
                message: format!("cannot parse {name} value {field:?}"),
            })
        };
        let zeta = parse(&record[0], "zeta")?;
        let eps = parse(&record[1], "eps")?;
        let row = points.len() + 1;
        validate_point(row, line, zeta, eps)?;
        if let Some(&(prev, _)) = points.last() {
            if zeta <= prev {
                return Err(DispersionError::Validation {
                    row,
                    line,
                    message: format!("zeta must be strictly increasing ({zeta:e} follows {prev:e})"),
                });
            }
        }
        points.push((zeta, eps));
    }
    if points.len() < 2 {
        return Err(DispersionError::Table(format!(
            "at least 2 data rows are required, got {}",
            points.len()
        )));
    }
    PermittivityTable::new(points)
}

/// Closed-form model used outside a table's range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fallback {
    Drude(DrudeParams),
    Plasma(PlasmaParams),
}

impl Fallback {
    fn eps(&self, zeta: f64) -> Result<f64> {
        match self {
            Fallback::Drude(p) => drude_eps(zeta, p),
            Fallback::Plasma(p) => plasma_eps(zeta, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionModel {
    Drude(DrudeParams),
    Plasma(PlasmaParams),
    /// Frequency-independent permittivity.
    Constant(f64),
    Tabulated {
        table: Arc<PermittivityTable>,
        fallback: Option<Fallback>,
    },
}

/// A named half-space material.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    model: DispersionModel,
    metallic: bool,
}

impl Material {
    pub fn drude(name: impl Into<String>, params: DrudeParams) -> Self {
        Self {
            name: name.into(),
            model: DispersionModel::Drude(params),
            metallic: true,
        }
    }

    pub fn plasma(name: impl Into<String>, params: PlasmaParams) -> Self {
        Self {
            name: name.into(),
            model: DispersionModel::Plasma(params),
            metallic: true,
        }
    }

    /// Nondispersive dielectric with `ε > 1`.
    pub fn constant(name: impl Into<String>, eps: f64) -> Result<Self> {
        if !(eps > 1.0 && eps.is_finite()) {
            return Err(DispersionError::Parameter {
                name: "eps",
                value: eps,
                reason: "must be finite and greater than 1",
            });
        }
        Ok(Self {
            name: name.into(),
            model: DispersionModel::Constant(eps),
            metallic: false,
        })
    }

    /// Tabulated material. It is treated as a metal (divergent `ε` at zero
    /// frequency) exactly when a fallback model is attached.
    pub fn tabulated(name: impl Into<String>, table: PermittivityTable, fallback: Option<Fallback>) -> Self {
        Self {
            name: name.into(),
            metallic: fallback.is_some(),
            model: DispersionModel::Tabulated {
                table: Arc::new(table),
                fallback,
            },
        }
    }

    /// Overrides the metallic flag used by the zero-frequency term.
    pub fn with_metallic(mut self, metallic: bool) -> Self {
        self.metallic = metallic;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &DispersionModel {
        &self.model
    }

    /// Whether `ε(iζ) → ∞` as `ζ → 0⁺`.
    pub fn is_metallic(&self) -> bool {
        self.metallic
    }

    /// `ε(iζ)` for `ζ > 0`.
    pub fn eps(&self, zeta: f64) -> Result<f64> {
        match &self.model {
            DispersionModel::Drude(p) => drude_eps(zeta, p),
            DispersionModel::Plasma(p) => plasma_eps(zeta, p),
            DispersionModel::Constant(eps) => {
                check_zeta(zeta)?;
                Ok(*eps)
            }
            DispersionModel::Tabulated { table, fallback } => match tabulated_eps(table, zeta) {
                Err(DispersionError::OutOfRange { .. }) if fallback.is_some() => fallback.as_ref().unwrap().eps(zeta),
                other => other,
            },
        }
    }

    /// Permittivity at the lowest frequency the model can evaluate without a
    /// fallback. `None` for closed-form metals, which diverge there.
    pub fn static_eps(&self) -> Option<f64> {
        match &self.model {
            DispersionModel::Drude(_) | DispersionModel::Plasma(_) => None,
            DispersionModel::Constant(eps) => Some(*eps),
            DispersionModel::Tabulated { table, .. } => Some(table.points[0].1),
        }
    }
}

/// Drude metal presets, case-insensitive: Au, Cu, Al.
pub fn material_preset(name: &str) -> Result<Material> {
    let (label, wp, nu) = match name.to_ascii_lowercase().as_str() {
        "au" => ("Au", 9.0, 0.035),
        "cu" => ("Cu", 9.05, 0.030),
        "al" => ("Al", 11.5, 0.050),
        _ => return Err(DispersionError::UnknownPreset { name: name.to_string() }),
    };
    Ok(Material::drude(label, DrudeParams::from_ev(wp, nu)?))
}
