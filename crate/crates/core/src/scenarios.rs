//! Experiment-facing observables built on the pressure solver: temperature
//! differences, relative corrections, parameter sweeps and the grouping of
//! the preset metal pairs by strength.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::constants::{EV_TO_RAD_PER_S, HBAR, K_BOLTZMANN, SPEED_OF_LIGHT};
use crate::dispersion::{material_preset, DispersionError, Material};
use crate::exec::map_ordered;
use crate::lifshitz::{casimir_pressure, LifshitzError, PlateSystem, PressureResult, SolverOptions, ThermalState};

/// Default gap window, meters.
pub const DEFAULT_GAP_RANGE: (f64, f64) = (50e-9, 3e-6);

/// Column header of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str =
    "pair,material_1,material_2,gap_m,temperature_K,pressure_Pa,tm_share,te_share,m_used";

/// Column header of the temperature-difference CSV.
pub const DIFF_CSV_HEADER: &str =
    "pair,material_1,material_2,gap_m,t_low_K,t_high_K,pressure_low_Pa,pressure_high_Pa,delta_Pa,relative_to_low";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("pressure computation at T = {temperature} K failed: {source}")]
    Solver {
        temperature: f64,
        #[source]
        source: Box<LifshitzError>,
    },

    #[error("sweep cell ({pair}, a = {gap:e} m, T = {temperature} K) failed: {source}")]
    Cell {
        pair: String,
        gap: f64,
        temperature: f64,
        #[source]
        source: Box<LifshitzError>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Material(#[from] DispersionError),

    #[error("malformed sweep CSV at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Two half-space materials, `mat1` below the gap and `mat3` above.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialPair {
    pub mat1: Material,
    pub mat3: Material,
}

impl MaterialPair {
    pub fn new(mat1: Material, mat3: Material) -> Self {
        Self { mat1, mat3 }
    }

    pub fn presets(name1: &str, name3: &str) -> Result<Self> {
        Ok(Self::new(material_preset(name1)?, material_preset(name3)?))
    }

    /// `"Au-Cu"` style label.
    pub fn label(&self) -> String {
        format!("{}-{}", self.mat1.name(), self.mat3.name())
    }

    pub fn system(&self, gap: f64) -> std::result::Result<PlateSystem, LifshitzError> {
        PlateSystem::new(self.mat1.clone(), self.mat3.clone(), gap)
    }
}

/// The six unordered pairs of the Au, Cu, Al presets.
pub fn preset_pairs() -> Vec<MaterialPair> {
    [
        ("Al", "Al"),
        ("Al", "Au"),
        ("Al", "Cu"),
        ("Au", "Au"),
        ("Au", "Cu"),
        ("Cu", "Cu"),
    ]
    .iter()
    .map(|(a, b)| MaterialPair::presets(a, b).expect("built-in preset"))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Ascending grid of gap widths (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct GapGrid(Vec<f64>);

impl GapGrid {
    pub fn new(mut gaps: Vec<f64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(ScenarioError::Argument("gap grid is empty".into()));
        }
        if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(ScenarioError::Argument(format!("gap widths must be positive, got {g}")));
        }
        gaps.sort_by(f64::total_cmp);
        gaps.dedup();
        Ok(Self(gaps))
    }

    /// `count` points from `start` to `stop` inclusive.
    pub fn spaced(start: f64, stop: f64, spacing: Spacing, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(ScenarioError::Argument("grid needs at least one point".into()));
        }
        if !(start > 0.0 && stop >= start && stop.is_finite()) {
            return Err(ScenarioError::Argument(format!(
                "grid bounds must satisfy 0 < start <= stop, got {start}..{stop}"
            )));
        }
        if count == 1 {
            return Self::new(vec![start]);
        }
        let n = (count - 1) as f64;
        let gaps = (0..count)
            .map(|i| {
                let t = i as f64 / n;
                match spacing {
                    _ if i == 0 => start,
                    _ if i == count - 1 => stop,
                    Spacing::Linear => start + (stop - start) * t,
                    Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * t).exp(),
                }
            })
            .collect();
        Self::new(gaps)
    }

    pub fn gaps(&self) -> &[f64] {
        &self.0
    }
}

/// Grid over material pairs, temperatures and gap widths.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub pairs: Vec<MaterialPair>,
    pub temperatures: Vec<f64>,
    pub gaps: GapGrid,
}

impl SweepSpec {
    pub fn new(pairs: Vec<MaterialPair>, mut temperatures: Vec<f64>, gaps: GapGrid) -> Result<Self> {
        if pairs.is_empty() {
            return Err(ScenarioError::Argument("sweep needs at least one material pair".into()));
        }
        if temperatures.is_empty() {
            return Err(ScenarioError::Argument("sweep needs at least one temperature".into()));
        }
        if let Some(t) = temperatures.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(ScenarioError::Argument(format!(
                "temperatures must be positive, got {t}"
            )));
        }
        temperatures.sort_by(f64::total_cmp);
        temperatures.dedup();
        Ok(Self {
            pairs,
            temperatures,
            gaps,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.pairs.len() * self.temperatures.len() * self.gaps.gaps().len()
    }
}

/// Pressures at two temperatures for one gap. `delta = f_low_t − f_high_t`
/// and `relative = delta / f_low_t`, where both `f` are moduli in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffResult {
    pub gap: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub f_low_t: f64,
    pub f_high_t: f64,
    pub delta: f64,
    pub relative: f64,
}

fn solve(system: &PlateSystem, kelvin: f64, opts: &SolverOptions) -> Result<PressureResult> {
    let wrap = |source: LifshitzError| ScenarioError::Solver {
        temperature: kelvin,
        source: Box::new(source),
    };
    let thermal = ThermalState::new(kelvin).map_err(wrap)?;
    casimir_pressure(system, &thermal, opts).map_err(wrap)
}

/// `|ℱ(t_low)| − |ℱ(t_high)|` at fixed gap with one shared solver
/// configuration. The labels only fix the sign convention: passing the
/// temperatures in the other order negates `delta`.
pub fn temperature_difference(
    system: &PlateSystem,
    t_low: f64,
    t_high: f64,
    opts: &SolverOptions,
) -> Result<DiffResult> {
    for t in [t_low, t_high] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ScenarioError::Argument(format!(
                "temperatures must be positive, got {t} K"
            )));
        }
    }
    if t_low == t_high {
        return Err(ScenarioError::Argument(format!(
            "the two temperatures must differ (both are {t_low} K)"
        )));
    }
    let temps = [t_low, t_high];
    let mut results = map_ordered(&temps, opts.parallel, |&t| solve(system, t, opts)).into_iter();
    let low = results.next().unwrap()?;
    let high = results.next().unwrap()?;
    let (f_low_t, f_high_t) = (low.magnitude(), high.magnitude());
    let delta = f_low_t - f_high_t;
    Ok(DiffResult {
        gap: system.gap(),
        t_low,
        t_high,
        f_low_t,
        f_high_t,
        delta,
        relative: delta / f_low_t,
    })
}

/// [`temperature_difference`] over a gap grid, in ascending gap order.
pub fn relative_correction_curve(
    pair: &MaterialPair,
    gaps: &GapGrid,
    t_low: f64,
    t_high: f64,
    opts: &SolverOptions,
) -> Result<Vec<DiffResult>> {
    map_ordered(gaps.gaps(), opts.parallel, |&gap| {
        let system = pair
            .system(gap)
            .map_err(|source: LifshitzError| ScenarioError::Solver {
                temperature: t_low,
                source: Box::new(source),
            })?;
        temperature_difference(&system, t_low, t_high, opts)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pair: String,
    pub material_1: String,
    pub material_2: String,
    pub gap: f64,
    pub temperature: f64,
    /// Modulus of the (attractive) pressure, Pa.
    pub pressure: f64,
    pub tm_share: f64,
    pub te_share: f64,
    pub m_used: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub options: SolverOptions,
}

/// Evaluates every (pair, T, a) cell. Rows are ordered by pair (as given),
/// then temperature, then gap, both ascending.
pub fn sweep(spec: &SweepSpec, opts: &SolverOptions) -> Result<SweepTable> {
    let mut cells = Vec::with_capacity(spec.cell_count());
    for pair in &spec.pairs {
        for &t in &spec.temperatures {
            for &gap in spec.gaps.gaps() {
                cells.push((pair, t, gap));
            }
        }
    }
    let rows = map_ordered(&cells, opts.parallel, |&(pair, t, gap)| {
        let fail = |source: LifshitzError| ScenarioError::Cell {
            pair: pair.label(),
            gap,
            temperature: t,
            source: Box::new(source),
        };
        let system = pair.system(gap).map_err(fail)?;
        let thermal = ThermalState::new(t).map_err(fail)?;
        let r = casimir_pressure(&system, &thermal, opts).map_err(fail)?;
        Ok(SweepRow {
            pair: pair.label(),
            material_1: pair.mat1.name().to_string(),
            material_2: pair.mat3.name().to_string(),
            gap,
            temperature: t,
            pressure: r.magnitude(),
            tm_share: r.tm_share(),
            te_share: r.te_share(),
            m_used: r.m_used,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows, options: *opts })
}

fn write_metadata<W: Write>(out: &mut W, opts: &SolverOptions) -> io::Result<()> {
    writeln!(
        out,
        "# solver: quad_tol={:e} stop_rel={:e} stop_run={} y_span={} y_split={} m_ceiling_factor={}",
        opts.quad_tol, opts.stop_rel, opts.stop_run, opts.y_span, opts.y_split, opts.m_ceiling_factor
    )?;
    writeln!(
        out,
        "# constants: hbar={HBAR:e} J*s c={SPEED_OF_LIGHT:e} m/s k_B={K_BOLTZMANN:e} J/K eV={EV_TO_RAD_PER_S:e} rad/s"
    )
}

/// Writes the sweep table as CSV. `pressure_Pa` holds the modulus of the
/// attractive pressure; shares are fractions of it carried by TM and TE.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, mut out: W) -> io::Result<()> {
    write_metadata(&mut out, &table.options)?;
    writeln!(
        out,
        "# pressure_Pa is |F| in Pa; the pressure itself is attractive (negative)"
    )?;
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            r.pair, r.material_1, r.material_2, r.gap, r.temperature, r.pressure, r.tm_share, r.te_share, r.m_used
        )?;
    }
    Ok(())
}

/// Parses CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line != SWEEP_CSV_HEADER {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    message: format!("unexpected header {line:?}"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("expected 9 fields, found {}", fields.len()),
            });
        }
        let num = |i: usize| {
            fields[i].parse::<f64>().map_err(|_| ScenarioError::Parse {
                line: line_no,
                message: format!("bad number {:?}", fields[i]),
            })
        };
        rows.push(SweepRow {
            pair: fields[0].to_string(),
            material_1: fields[1].to_string(),
            material_2: fields[2].to_string(),
            gap: num(3)?,
            temperature: num(4)?,
            pressure: num(5)?,
            tm_share: num(6)?,
            te_share: num(7)?,
            m_used: fields[8].parse().map_err(|_| ScenarioError::Parse {
                line: line_no,
                message: format!("bad m_used {:?}", fields[8]),
            })?,
        });
    }
    if !header_seen {
        return Err(ScenarioError::Parse {
            line: 0,
            message: "missing header".into(),
        });
    }
    Ok(rows)
}

/// Writes temperature-difference rows. The relative column is normalized by
/// the modulus at the first (lower) temperature.
pub fn write_diff_csv<W: Write>(
    pair: &MaterialPair,
    rows: &[DiffResult],
    opts: &SolverOptions,
    mut out: W,
) -> io::Result<()> {
    write_metadata(&mut out, opts)?;
    writeln!(
        out,
        "# delta_Pa = |F(t_low)| - |F(t_high)|; relative_to_low = delta_Pa / |F(t_low)|"
    )?;
    writeln!(out, "{DIFF_CSV_HEADER}")?;
    for d in rows {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            pair.label(),
            pair.mat1.name(),
            pair.mat3.name(),
            d.gap,
            d.t_low,
            d.t_high,
            d.f_low_t,
            d.f_high_t,
            d.delta,
            d.relative
        )?;
    }
    Ok(())
}

/// Strength group of the preset pairs: I = Al–Al, II = Al with a noble
/// metal, III = noble metals only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StrengthGroup {
    I,
    II,
    III,
}

impl StrengthGroup {
    fn of(pair: &MaterialPair) -> Result<Self> {
        let is_preset = |m: &Material| material_preset(m.name()).map(|p| p == *m).unwrap_or(false);
        if !is_preset(&pair.mat1) || !is_preset(&pair.mat3) {
            return Err(ScenarioError::Unsupported(format!(
                "group ordering is defined for the Au/Cu/Al presets only, got {}",
                pair.label()
            )));
        }
        let al = [&pair.mat1, &pair.mat3].iter().filter(|m| m.name() == "Al").count();
        Ok(match al {
            2 => StrengthGroup::I,
            1 => StrengthGroup::II,
            _ => StrengthGroup::III,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGroup {
    pub group: StrengthGroup,
    /// `(label, |ℱ|)`, strongest first.
    pub members: Vec<(String, f64)>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRanking {
    pub gap: f64,
    pub temperature: f64,
    /// Non-empty groups in I, II, III order.
    pub groups: Vec<PairGroup>,
}

impl GroupRanking {
    /// Whether the group means decrease strictly from I to III.
    pub fn is_ordered(&self) -> bool {
        self.groups.windows(2).all(|w| w[0].mean > w[1].mean)
    }
}

/// Partitions the given preset pairs into strength groups at `(gap, T)`.
pub fn group_ordering(
    pairs: &[MaterialPair],
    gap: f64,
    temperature: f64,
    opts: &SolverOptions,
) -> Result<GroupRanking> {
    if pairs.is_empty() {
        return Err(ScenarioError::Argument("no pairs to group".into()));
    }
    let groups_of = pairs.iter().map(StrengthGroup::of).collect::<Result<Vec<_>>>()?;
    let gaps = GapGrid::new(vec![gap])?;
    let spec = SweepSpec::new(pairs.to_vec(), vec![temperature], gaps)?;
    let table = sweep(&spec, opts)?;

    let mut groups: Vec<PairGroup> = Vec::new();
    for g in [StrengthGroup::I, StrengthGroup::II, StrengthGroup::III] {
        let mut members: Vec<(String, f64)> = table
            .rows
            .iter()
            .zip(&groups_of)
            .filter(|(_, &gg)| gg == g)
            .map(|(r, _)| (r.pair.clone(), r.pressure))
            .collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mean = members.iter().map(|m| m.1).sum::<f64>() / members.len() as f64;
        groups.push(PairGroup {
            group: g,
            members,
            mean,
        });
    }
    Ok(GroupRanking {
        gap,
        temperature,
        groups,
    })
}
