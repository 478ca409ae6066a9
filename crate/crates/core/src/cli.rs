//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors (bad flags, units or
//! material names), 2 when a computation fails.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::constants::EV_TO_RAD_PER_S;
use crate::dispersion::{
    load_permittivity_table, material_preset, DispersionModel, DrudeParams, Fallback, Material, PlasmaParams,
    PRESET_NAMES,
};
use crate::lifshitz::{casimir_pressure, PlateSystem, SolverOptions, ThermalState};
use crate::scenarios::{
    preset_pairs, relative_correction_curve, sweep, write_diff_csv, write_sweep_csv, GapGrid, MaterialPair, Spacing,
    SweepRow, SweepSpec, SweepTable,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: &'static str, message: String },
    #[error("{0}")]
    Compute(String),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn usage(flag: &'static str, message: impl Into<String>) -> Self {
        Self::Usage {
            flag,
            message: message.into(),
        }
    }

    fn compute(e: impl std::fmt::Display) -> Self {
        Self::Compute(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_USAGE,
            CliError::Compute(_) | CliError::Io(_) => EXIT_COMPUTE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "casimir",
    version,
    about = "Finite-temperature Casimir pressure between parallel half-spaces (Lifshitz formula)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure for one material pair, gap and temperature.
    Pressure {
        /// Material pair `A,B`; each side is a preset (Au, Cu, Al) or
        /// `drude:<wp>:<nu>`, `plasma:<wp>`, `eps:<value>`, `table:<file>[@<fallback>]`.
        #[arg(long)]
        pair: String,
        /// Gap width with unit, e.g. 200nm, 1um, 1e-6m.
        #[arg(long)]
        gap: String,
        /// Temperature, e.g. 300K.
        #[arg(long)]
        temp: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Grid over material pairs, gap widths and temperatures.
    Sweep {
        /// Pair `A,B`; repeat the flag or separate pairs with `;`. `all` selects the six preset pairs.
        #[arg(long, required = true)]
        pairs: Vec<String>,
        /// `start:stop:lin|log:count` or a comma-separated list, e.g. 50nm:3um:log:60.
        #[arg(long)]
        gaps: String,
        /// Comma-separated temperatures, e.g. 1,300,350.
        #[arg(long)]
        temps: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Pressure difference |F(T1)| - |F(T2)| over a gap grid.
    Diff {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        gaps: String,
        /// Exactly two temperatures `T1,T2`; the relative column is normalized by |F(T1)|.
        #[arg(long)]
        temps: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List the built-in metal presets.
    Materials {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Validate a permittivity CSV (`zeta_rad_per_s,eps`).
    ImportTable { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-term quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Stop the Matsubara sum after consecutive terms below this fraction of the sum.
    #[arg(long, default_value_t = 1e-9)]
    pub stop_rel: f64,
    /// Number of consecutive small terms that ends the sum.
    #[arg(long, default_value_t = 3)]
    pub stop_run: u32,
    /// Worker threads for parallel evaluation.
    #[arg(long, conflicts_with = "sequential")]
    pub jobs: Option<usize>,
    /// Evaluate everything on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

impl CommonArgs {
    fn solver_options(&self) -> Result<SolverOptions> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::usage("--tol", format!("must be in (0, 1), got {}", self.tol)));
        }
        if !(self.stop_rel > 0.0 && self.stop_rel < 1.0) {
            return Err(CliError::usage(
                "--stop-rel",
                format!("must be in (0, 1), got {}", self.stop_rel),
            ));
        }
        if self.stop_run == 0 {
            return Err(CliError::usage("--stop-run", "must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::usage("--jobs", "must be at least 1"));
        }
        Ok(SolverOptions {
            quad_tol: self.tol,
            stop_rel: self.stop_rel,
            stop_run: self.stop_run,
            parallel: !self.sequential && crate::parallel_available(),
            ..SolverOptions::default()
        })
    }
}

/// Parses `argv` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run_with<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the `casimir` binary.
pub fn run(argv: &[String]) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn execute<W: Write>(command: Command, out: &mut W) -> Result<()> {
    match command {
        Command::Pressure {
            pair,
            gap,
            temp,
            common,
        } => {
            let pair = parse_pair("--pair", &pair)?;
            let gap = parse_length("--gap", &gap)?;
            let kelvin = parse_temperature("--temp", &temp)?;
            let opts = common.solver_options()?;
            configure_jobs(&common)?;
            with_output(&common, out, |w| {
                cmd_pressure(&pair, gap, kelvin, &opts, common.format, w)
            })
        }
        Command::Sweep {
            pairs,
            gaps,
            temps,
            common,
        } => {
            let pairs = parse_pair_list(&pairs)?;
            let gaps = parse_gap_grid("--gaps", &gaps)?;
            let temps = parse_temperature_list("--temps", &temps)?;
            let opts = common.solver_options()?;
            let spec = SweepSpec::new(pairs, temps, gaps).map_err(|e| CliError::usage("--temps", e.to_string()))?;
            configure_jobs(&common)?;
            let table = sweep(&spec, &opts).map_err(CliError::compute)?;
            with_output(&common, out, |w| match common.format {
                Format::Csv => write_sweep_csv(&table, w).map_err(CliError::from),
                Format::Text => write_sweep_text(&table, w),
            })
        }
        Command::Diff {
            pair,
            gaps,
            temps,
            common,
        } => {
            let pair = parse_pair("--pair", &pair)?;
            let gaps = parse_gap_grid("--gaps", &gaps)?;
            let temps = parse_temperature_list_ordered("--temps", &temps)?;
            if temps.len() != 2 {
                return Err(CliError::usage(
                    "--temps",
                    format!("expected exactly two temperatures, got {}", temps.len()),
                ));
            }
            if temps[0] == temps[1] {
                return Err(CliError::usage("--temps", "the two temperatures must differ"));
            }
            let opts = common.solver_options()?;
            configure_jobs(&common)?;
            let rows = relative_correction_curve(&pair, &gaps, temps[0], temps[1], &opts).map_err(CliError::compute)?;
            with_output(&common, out, |w| match common.format {
                Format::Csv => write_diff_csv(&pair, &rows, &opts, w).map_err(CliError::from),
                Format::Text => {
                    writeln!(
                        w,
                        "{}: |F({} K)| - |F({} K)|, relative to |F({} K)|",
                        pair.label(),
                        temps[0],
                        temps[1],
                        temps[0]
                    )?;
                    writeln!(
                        w,
                        "{:>12} {:>14} {:>14} {:>14} {:>10}",
                        "gap", "|F1| mPa", "|F2| mPa", "dF mPa", "dF/|F1| %"
                    )?;
                    for d in &rows {
                        writeln!(
                            w,
                            "{:>12} {:>14.6} {:>14.6} {:>14.6} {:>10.4}",
                            format_gap(d.gap),
                            d.f_low_t * 1e3,
                            d.f_high_t * 1e3,
                            d.delta * 1e3,
                            d.relative * 100.0
                        )?;
                    }
                    Ok(())
                }
            })
        }
        Command::Materials { format } => cmd_materials(format, out),
        Command::ImportTable { file } => cmd_import_table(&file, out),
    }
}

fn with_output<W: Write, F>(common: &CommonArgs, out: &mut W, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match &common.output {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::usage("--output", format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

#[cfg(feature = "parallel")]
fn configure_jobs(common: &CommonArgs) -> Result<()> {
    if let Some(n) = common.jobs {
        // A second configuration attempt in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(common: &CommonArgs) -> Result<()> {
    match common.jobs {
        Some(n) if n > 1 => Err(CliError::usage("--jobs", "this build has no parallel support")),
        _ => Ok(()),
    }
}

fn cmd_pressure(
    pair: &MaterialPair,
    gap: f64,
    kelvin: f64,
    opts: &SolverOptions,
    format: Format,
    w: &mut dyn Write,
) -> Result<()> {
    let system = PlateSystem::new(pair.mat1.clone(), pair.mat3.clone(), gap)
        .map_err(|e| CliError::usage("--gap", e.to_string()))?;
    let thermal = ThermalState::new(kelvin).map_err(|e| CliError::usage("--temp", e.to_string()))?;
    let r = casimir_pressure(&system, &thermal, opts).map_err(CliError::compute)?;
    match format {
        Format::Csv => {
            let table = SweepTable {
                rows: vec![SweepRow {
                    pair: pair.label(),
                    material_1: pair.mat1.name().to_string(),
                    material_2: pair.mat3.name().to_string(),
                    gap,
                    temperature: kelvin,
                    pressure: r.magnitude(),
                    tm_share: r.tm_share(),
                    te_share: r.te_share(),
                    m_used: r.m_used,
                }],
                options: *opts,
            };
            write_sweep_csv(&table, w)?;
        }
        Format::Text => {
            writeln!(w, "{}  a = {}  T = {} K", pair.label(), format_gap(gap), kelvin)?;
            writeln!(w, "|F| = {} (attractive)", format_pressure(r.magnitude()))?;
            writeln!(w, "pressure_Pa = {:e}", r.pressure)?;
            writeln!(
                w,
                "TM share {:.4}, TE share {:.4}, zero-frequency share {:.4}",
                r.tm_share(),
                r.te_share(),
                r.zero_pressure / r.pressure
            )?;
            writeln!(
                w,
                "Matsubara terms m = 1..{} (ceiling {}), gamma = {:.6e}, y_max = {:.4}..{:.4}",
                r.m_used, r.cutoff.m_ceiling, r.gamma, r.cutoff.first_y_max, r.cutoff.last_y_max
            )?;
        }
    }
    Ok(())
}

fn write_sweep_text(table: &SweepTable, w: &mut dyn Write) -> Result<()> {
    writeln!(
        w,
        "{:<8} {:>12} {:>8} {:>16} {:>8} {:>8} {:>8}",
        "pair", "gap", "T [K]", "|F|", "TM", "TE", "m_used"
    )?;
    for r in &table.rows {
        writeln!(
            w,
            "{:<8} {:>12} {:>8} {:>16} {:>8.4} {:>8.4} {:>8}",
            r.pair,
            format_gap(r.gap),
            r.temperature,
            format_pressure(r.pressure),
            r.tm_share,
            r.te_share,
            r.m_used
        )?;
    }
    Ok(())
}

fn cmd_materials<W: Write>(format: Format, w: &mut W) -> Result<()> {
    if format == Format::Csv {
        writeln!(w, "name,model,omega_p_eV,nu_eV,omega_p_rad_per_s,nu_rad_per_s")?;
    } else {
        writeln!(w, "Drude presets (1 eV = {EV_TO_RAD_PER_S:e} rad/s):")?;
    }
    for name in PRESET_NAMES {
        let m = material_preset(name).expect("built-in preset");
        if let DispersionModel::Drude(p) = m.model() {
            let (wp, nu) = (p.omega_p(), p.nu());
            match format {
                Format::Csv => writeln!(
                    w,
                    "{name},drude,{},{},{wp:e},{nu:e}",
                    wp / EV_TO_RAD_PER_S,
                    nu / EV_TO_RAD_PER_S
                )?,
                Format::Text => writeln!(
                    w,
                    "  {name:<3} omega_p = {:>6.3} eV ({wp:.4e} rad/s)   nu = {:>5.1} meV ({nu:.4e} rad/s)",
                    wp / EV_TO_RAD_PER_S,
                    nu / EV_TO_RAD_PER_S * 1e3
                )?,
            }
        }
    }
    Ok(())
}

fn cmd_import_table<W: Write>(path: &Path, w: &mut W) -> Result<()> {
    let file = File::open(path).map_err(|e| CliError::usage("import-table", format!("{}: {e}", path.display())))?;
    let table = load_permittivity_table(io::BufReader::new(file))
        .map_err(|e| CliError::usage("import-table", format!("{}: {e}", path.display())))?;
    let (lo, hi) = table.range();
    let pts = table.points();
    writeln!(w, "{}: {} points", path.display(), table.len())?;
    writeln!(w, "zeta range [{lo:e}, {hi:e}] rad/s")?;
    writeln!(w, "eps range [{:e}, {:e}]", pts[pts.len() - 1].1, pts[0].1)?;
    let non_increasing = pts.windows(2).all(|p| p[1].1 <= p[0].1);
    if !non_increasing {
        writeln!(w, "warning: eps is not non-increasing in zeta")?;
    }
    Ok(())
}

fn format_gap(gap: f64) -> String {
    if gap < 1e-6 {
        format!("{:.4} nm", gap * 1e9)
    } else {
        format!("{:.4} um", gap * 1e6)
    }
}

fn format_pressure(p: f64) -> String {
    format!("{:.6} mPa", p * 1e3)
}

fn split_number(s: &str) -> (&str, &str) {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && s[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+')))
        })
        .map_or(s.len(), |(i, _)| i);
    (&s[..end], s[end..].trim())
}

fn parse_with_units(flag: &'static str, s: &str, units: &[(&str, f64)], what: &str) -> Result<f64> {
    let (num, unit) = split_number(s);
    let value: f64 = num
        .parse()
        .map_err(|_| CliError::usage(flag, format!("cannot parse {what} {s:?}")))?;
    let scale = units.iter().find(|(u, _)| *u == unit).map(|(_, f)| *f).ok_or_else(|| {
        let names: Vec<_> = units
            .iter()
            .map(|(u, _)| if u.is_empty() { "(none)" } else { u })
            .collect();
        CliError::usage(
            flag,
            format!("unknown unit {unit:?} in {s:?}; expected one of {}", names.join(", ")),
        )
    })?;
    let v = value * scale;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::usage(flag, format!("{what} must be positive, got {s:?}")));
    }
    Ok(v)
}

/// Length with unit `nm`, `um`/`μm` or `m` (bare numbers are meters).
pub fn parse_length(flag: &'static str, s: &str) -> Result<f64> {
    parse_with_units(
        flag,
        s,
        &[
            ("nm", 1e-9),
            ("um", 1e-6),
            ("μm", 1e-6),
            ("µm", 1e-6),
            ("m", 1.0),
            ("", 1.0),
        ],
        "length",
    )
}

/// Temperature in kelvin, with optional `K` suffix.
pub fn parse_temperature(flag: &'static str, s: &str) -> Result<f64> {
    parse_with_units(flag, s, &[("K", 1.0), ("", 1.0)], "temperature")
}

/// Angular frequency: `eV`, `meV` or `rad/s` (bare numbers are rad/s).
pub fn parse_frequency(flag: &'static str, s: &str) -> Result<f64> {
    parse_with_units(
        flag,
        s,
        &[
            ("eV", EV_TO_RAD_PER_S),
            ("meV", 1e-3 * EV_TO_RAD_PER_S),
            ("rad/s", 1.0),
            ("", 1.0),
        ],
        "frequency",
    )
}

fn parse_temperature_list_ordered(flag: &'static str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| parse_temperature(flag, t)).collect()
}

fn parse_temperature_list(flag: &'static str, s: &str) -> Result<Vec<f64>> {
    let temps = parse_temperature_list_ordered(flag, s)?;
    if temps.is_empty() {
        return Err(CliError::usage(flag, "no temperatures given"));
    }
    Ok(temps)
}

/// `start:stop:lin|log:count`, or a comma-separated list of lengths.
pub fn parse_gap_grid(flag: &'static str, s: &str) -> Result<GapGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 4 {
        let start = parse_length(flag, parts[0])?;
        let stop = parse_length(flag, parts[1])?;
        let spacing = match parts[2] {
            "lin" | "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => {
                return Err(CliError::usage(
                    flag,
                    format!("spacing must be lin or log, got {other:?}"),
                ))
            }
        };
        let count: usize = parts[3]
            .parse()
            .map_err(|_| CliError::usage(flag, format!("bad point count {:?}", parts[3])))?;
        GapGrid::spaced(start, stop, spacing, count)
    } else if parts.len() == 1 {
        let gaps = s
            .split(',')
            .map(|g| parse_length(flag, g))
            .collect::<Result<Vec<_>>>()?;
        GapGrid::new(gaps)
    } else {
        return Err(CliError::usage(
            flag,
            format!("expected start:stop:lin|log:count or a list, got {s:?}"),
        ));
    };
    grid.map_err(|e| CliError::usage(flag, e.to_string()))
}

/// Material specification: a preset name, `drude:<wp>:<nu>`, `plasma:<wp>`,
/// `eps:<value>` or `table:<file>[@<fallback>]` where the fallback is a
/// preset, `drude:..` or `plasma:..`.
pub fn parse_material(flag: &'static str, s: &str) -> Result<Material> {
    let s = s.trim();
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k.to_ascii_lowercase(), r),
        None => {
            return material_preset(s).map_err(|e| CliError::usage(flag, e.to_string()));
        }
    };
    let param = |e: crate::dispersion::DispersionError| CliError::usage(flag, e.to_string());
    match kind.as_str() {
        "drude" => {
            let (wp, nu) = rest
                .split_once(':')
                .ok_or_else(|| CliError::usage(flag, format!("expected drude:<wp>:<nu>, got {s:?}")))?;
            let params = DrudeParams::new(parse_frequency(flag, wp)?, parse_frequency(flag, nu)?).map_err(param)?;
            Ok(Material::drude(s, params))
        }
        "plasma" => {
            let params = PlasmaParams::new(parse_frequency(flag, rest)?).map_err(param)?;
            Ok(Material::plasma(s, params))
        }
        "eps" => {
            let v: f64 = rest
                .parse()
                .map_err(|_| CliError::usage(flag, format!("cannot parse permittivity {rest:?}")))?;
            Material::constant(s, v).map_err(param)
        }
        "table" => {
            let (path, fallback) = match rest.rsplit_once('@') {
                Some((p, f)) => (p, Some(parse_fallback(flag, f)?)),
                None => (rest, None),
            };
            let file = File::open(path).map_err(|e| CliError::usage(flag, format!("{path}: {e}")))?;
            let table = load_permittivity_table(io::BufReader::new(file))
                .map_err(|e| CliError::usage(flag, format!("{path}: {e}")))?;
            let name = Path::new(path)
                .file_stem()
                .map_or_else(|| path.to_string(), |n| n.to_string_lossy().into_owned());
            Ok(Material::tabulated(name, table, fallback))
        }
        other => Err(CliError::usage(
            flag,
            format!(
                "unknown material kind {other:?}; use a preset ({}) or drude:, plasma:, eps:, table:",
                PRESET_NAMES.join(", ")
            ),
        )),
    }
}

fn parse_fallback(flag: &'static str, s: &str) -> Result<Fallback> {
    let m = parse_material(flag, s)?;
    match m.model() {
        DispersionModel::Drude(p) => Ok(Fallback::Drude(*p)),
        DispersionModel::Plasma(p) => Ok(Fallback::Plasma(*p)),
        _ => Err(CliError::usage(
            flag,
            format!("fallback {s:?} must be a Drude or plasma model"),
        )),
    }
}

/// `A,B` material pair.
pub fn parse_pair(flag: &'static str, s: &str) -> Result<MaterialPair> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::usage(flag, format!("expected two materials `A,B`, got {s:?}")))?;
    Ok(MaterialPair::new(parse_material(flag, a)?, parse_material(flag, b)?))
}

fn parse_pair_list(values: &[String]) -> Result<Vec<MaterialPair>> {
    let mut pairs = Vec::new();
    for v in values {
        for item in v.split(';').filter(|s| !s.trim().is_empty()) {
            if item.trim().eq_ignore_ascii_case("all") {
                pairs.extend(preset_pairs());
            } else {
                pairs.push(parse_pair("--pairs", item)?);
            }
        }
    }
    if pairs.is_empty() {
        return Err(CliError::usage("--pairs", "no material pairs given"));
    }
    Ok(pairs)
}
