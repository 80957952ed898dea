use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CliError, Flags, Format};
use crate::analytics::{bound_set, BoundRow, BOUND_SCHEMA};
use crate::csvio::write_csv;
use crate::exponent::{
    asymptotic_exponent, chernoff_exponent, empirical_slope, log_spaced, network_size_gap,
    sweep_exponent, DEFAULT_ENVELOPE_BINS, ENVELOPE_SCHEMA, POINT_SCHEMA,
};
use crate::montecarlo::{estimate_rows, sweep_outage_vs_k, ESTIMATE_SCHEMA};
use crate::protocol::{capacity, capacity_multiantenna, converse_outage_floor, rate_profile, CastMode};

const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_GRID: usize = 100;
const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 0.999;

pub const EXACT_SCHEMA: &str = "coop-outage exact v1";
pub const FIGURE2_SCHEMA: &str = "coop-outage figure2 v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub exact_uc: f64,
    pub exact_mc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    #[serde(rename = "K")]
    pub k: usize,
    pub sim_uc: f64,
    pub sim_uc_std_err: f64,
    pub sim_mc: f64,
    pub sim_mc_std_err: f64,
    pub exact_uc: f64,
    pub exact_mc: f64,
    pub chernoff_uc: f64,
    pub chernoff_mc: f64,
    pub approx_uc: f64,
    pub approx_mc: f64,
}

fn open(path: &Option<PathBuf>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match path {
        None => f(stdout),
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| relabel(e, p))?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
    }
}

fn relabel(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Io { message, .. } => CliError::io(path, message),
        other => other,
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

/// Single-point report: JSON by default, `key value` lines for `--format text`.
fn report<T: Serialize>(flags: &Flags, stdout: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let v = serde_json::to_value(value).map_err(io_err)?;
    let format = flags.format.unwrap_or(Format::Json);
    open(&flags.out, stdout, |w| {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &v).map_err(io_err)?;
                writeln!(w).map_err(io_err)
            }
            Format::Text => write_text(w, &v),
            Format::Csv => Err(CliError::InvalidArgs("this command reports JSON or text, not CSV".into())),
        }
    })
}

fn write_text(w: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    let Value::Object(map) = v else {
        return writeln!(w, "{v}").map_err(io_err);
    };
    let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
    for (k, v) in map {
        writeln!(w, "{k:<width$}  {v}").map_err(io_err)?;
    }
    Ok(())
}

/// Sweep output: CSV by default, a JSON array for `--format json`.
fn table<T: Serialize>(
    path: &Option<PathBuf>,
    format: Option<Format>,
    schema: &str,
    stdout: &mut dyn Write,
    rows: &[T],
) -> Result<(), CliError> {
    open(path, stdout, |w| match format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(write_csv(w, schema, rows)?),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, rows).map_err(io_err)?;
            writeln!(w).map_err(io_err)
        }
        Format::Text => Err(CliError::InvalidArgs("sweeps are written as CSV or JSON".into())),
    })
}

fn k_list(flags: &Flags) -> Result<Vec<usize>, CliError> {
    let list = match (&flags.k_list, flags.k) {
        (Some(_), Some(_)) => return Err(CliError::InvalidArgs("give --k or --k-list, not both".into())),
        (Some(l), None) => l.clone(),
        (None, Some(k)) => vec![k],
        (None, None) => (1..=10).map(|i| 10 * i).collect(),
    };
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::InvalidArgs("network sizes must be at least 1".into()));
    }
    Ok(list)
}

#[derive(Serialize)]
struct RatesReport {
    alpha: f64,
    beta: f64,
    snr: f64,
    threshold: f64,
    r1: f64,
    r2: f64,
    r_eff: f64,
    capacity: f64,
    rate_fraction: f64,
    phase1_fraction: f64,
    phase2_fraction: f64,
}

pub(super) fn rates(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let r = rate_profile(&p)?;
    report(
        flags,
        stdout,
        &RatesReport {
            alpha: p.alpha(),
            beta: p.beta(),
            snr: p.snr(),
            threshold: p.threshold(),
            r1: r.r1,
            r2: r.r2,
            r_eff: r.r_eff,
            capacity: r.capacity,
            rate_fraction: r.rate_fraction,
            phase1_fraction: r.phase1_fraction,
            phase2_fraction: r.phase2_fraction,
        },
    )
}

#[derive(Serialize)]
struct CapacityReport {
    snr: f64,
    capacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<CastMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    antennas: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    array_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converse_floor: Option<f64>,
}

pub(super) fn capacity_cmd(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let snr = flags.snr();
    let mode = flags.mode.map(CastMode::from);
    let array_capacity = match &flags.antennas {
        Some(a) => Some(capacity_multiantenna(mode.unwrap_or(CastMode::Unicast), a, snr)?),
        None => None,
    };
    let converse_floor = match flags.rate {
        Some(r) => Some(converse_outage_floor(r, snr)?),
        None => None,
    };
    report(
        flags,
        stdout,
        &CapacityReport {
            snr,
            capacity: capacity(snr),
            mode: flags.antennas.as_ref().map(|_| mode.unwrap_or(CastMode::Unicast)),
            antennas: flags.antennas.clone(),
            array_capacity,
            rate: flags.rate,
            converse_floor,
        },
    )
}

pub(super) fn simulate(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let ks = k_list(flags)?;
    let pairs = sweep_outage_vs_k(
        &p,
        &ks,
        flags.trials.unwrap_or(DEFAULT_TRIALS),
        flags.seed.unwrap_or(DEFAULT_SEED),
        flags.workers(),
    )?;
    let mut rows = estimate_rows(&pairs);
    if let Some(m) = flags.mode {
        let m = CastMode::from(m);
        rows.retain(|r| r.mode == m);
    }
    table(&flags.out, flags.format, ESTIMATE_SCHEMA, stdout, &rows)
}

pub(super) fn exact(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let rows = k_list(flags)?
        .into_iter()
        .map(|k| {
            Ok(ExactRow {
                k,
                exact_uc: crate::analytics::exact_outage(&p, k, CastMode::Unicast)?,
                exact_mc: crate::analytics::exact_outage(&p, k, CastMode::Multicast)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    table(&flags.out, flags.format, EXACT_SCHEMA, stdout, &rows)
}

pub(super) fn bounds(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let rows = k_list(flags)?
        .into_iter()
        .map(|k| Ok(BoundRow::from(&bound_set(&p, k)?)))
        .collect::<crate::Result<Vec<_>>>()?;
    table(&flags.out, flags.format, BOUND_SCHEMA, stdout, &rows)
}

pub(super) fn figure2(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let ks = k_list(flags)?;
    let sims = sweep_outage_vs_k(
        &p,
        &ks,
        flags.trials.unwrap_or(DEFAULT_TRIALS),
        flags.seed.unwrap_or(DEFAULT_SEED),
        flags.workers(),
    )?;
    let rows = sims
        .iter()
        .map(|s| {
            let b = BoundRow::from(&bound_set(&p, s.k)?);
            Ok(Figure2Row {
                k: s.k,
                sim_uc: s.unicast.p_hat,
                sim_uc_std_err: s.unicast.std_err,
                sim_mc: s.multicast.p_hat,
                sim_mc_std_err: s.multicast.std_err,
                exact_uc: b.exact_uc,
                exact_mc: b.exact_mc,
                chernoff_uc: b.chernoff_uc,
                chernoff_mc: b.chernoff_mc,
                approx_uc: b.approx_uc,
                approx_mc: b.approx_mc,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    table(&flags.out, flags.format, FIGURE2_SCHEMA, stdout, &rows)
}

/// Envelope path: `--envelope-out`, else `<out stem>.envelope.csv` next to
/// `--out`, else none.
fn envelope_path(flags: &Flags) -> Option<PathBuf> {
    flags.envelope_out.clone().or_else(|| {
        let out = flags.out.as_ref()?;
        let stem = out.file_stem()?.to_string_lossy().into_owned();
        Some(out.with_file_name(format!("{stem}.envelope.csv")))
    })
}

pub(super) fn figure3(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let n = flags.grid.unwrap_or(DEFAULT_GRID);
    if n == 0 {
        return Err(CliError::InvalidArgs("--grid must be at least 1".into()));
    }
    let grid = log_spaced(GRID_LO, GRID_HI, n);
    let sweep = sweep_exponent(
        flags.snr(),
        &grid,
        &grid,
        flags.bins.unwrap_or(DEFAULT_ENVELOPE_BINS),
        flags.workers(),
    )?;
    table(&flags.out, flags.format, POINT_SCHEMA, stdout, &sweep.points)?;
    if let Some(path) = envelope_path(flags) {
        table(&Some(path), flags.format, ENVELOPE_SCHEMA, stdout, &sweep.envelope())?;
    }
    Ok(())
}

pub(super) fn required_k(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let gap = network_size_gap(&p, flags.eps.unwrap_or(1e-3))?;
    report(flags, stdout, &gap)
}

#[derive(Serialize)]
struct ExponentReport {
    alpha: f64,
    beta: f64,
    rate_fraction: f64,
    exponent: f64,
    chernoff_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_uc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_mc: Option<f64>,
}

pub(super) fn exponent(flags: &Flags, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = flags.params()?;
    let slope = |mode| flags.k.map(|k| empirical_slope(&p, k, mode)).transpose();
    report(
        flags,
        stdout,
        &ExponentReport {
            alpha: p.alpha(),
            beta: p.beta(),
            rate_fraction: rate_profile(&p)?.rate_fraction,
            exponent: asymptotic_exponent(&p)?,
            chernoff_exponent: chernoff_exponent(&p)?,
            k: flags.k,
            slope_uc: slope(CastMode::Unicast)?,
            slope_mc: slope(CastMode::Multicast)?,
        },
    )
}
