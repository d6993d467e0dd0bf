//! Run-directory layout: atomic writers, the CSV and metadata formats, and
//! the loader that rebuilds a trajectory from disk for validation.
//!
//! Layout of a run directory:
//!   diagnostics.csv              one row per snapshot, 13 scalar columns
//!   snapshots/snap_000000.csv    cell averages `eta,v` per snapshot
//!   metadata.json                config echo, termination, residual summary
//!   ell.svg, profiles.svg        only when `output.emit_svg` is set
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! a killed process never leaves a half-written artifact. Numbers are
//! printed with 17 significant digits, `.` decimal separator, LF endings;
//! parsing them back reproduces the same f64 bit patterns.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use satflux_core::dual::{
    DiagnosticsRow, DualState, SchemeConfig, Termination, Trajectory, TrajectoryEntry,
};
use satflux_core::front::{self, FrontState};
use satflux_core::validate::{self, CheckEntry, EnvelopeParams};

use crate::config::RunConfig;
use crate::fail::{io_fail, Failure};
use crate::svg::{self, Series};

pub const DIAG_HEADER: &str = "t,sigma_minus,sigma_plus,ell,mu_bar,sigma_c,mass_center,\
                               vmin,vmax,mass_law_residual,bv_seminorm,rh_minus,rh_plus";
pub const STATE_HEADER: &str = "eta,v";

/// 17 significant digits; round-trips every finite f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `content` to `path` atomically (temp sibling + rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<(), Failure> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let file = File::create(&tmp).map_err(|e| io_fail("cannot create", &tmp, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(content.as_bytes()).map_err(|e| io_fail("cannot write", &tmp, e))?;
        w.flush().map_err(|e| io_fail("cannot write", &tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_fail("cannot rename into", path, e))
}

// ---- metadata ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationMeta {
    Completed,
    PositivityLoss { t: f64 },
    BlowupThreshold { t: f64 },
}

impl From<Termination> for TerminationMeta {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Completed => TerminationMeta::Completed,
            Termination::PositivityLoss { t } => TerminationMeta::PositivityLoss { t },
            Termination::BlowupThreshold { t } => TerminationMeta::BlowupThreshold { t },
        }
    }
}

impl From<TerminationMeta> for Termination {
    fn from(t: TerminationMeta) -> Self {
        match t {
            TerminationMeta::Completed => Termination::Completed,
            TerminationMeta::PositivityLoss { t } => Termination::PositivityLoss { t },
            TerminationMeta::BlowupThreshold { t } => Termination::BlowupThreshold { t },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub termination: TerminationMeta,
    pub termination_reason: String,
    pub final_t: f64,
    pub steps_taken: u64,
    pub snapshots: usize,
    pub ell0: f64,
    pub c5_estimate: f64,
}

/// Worst-case invariant residuals of the recorded run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub mass_law_max: f64,
    pub support_law_max: f64,
    pub center_identity_max: f64,
    pub bv_max: f64,
    /// Largest Rankine-Hugoniot residual over interior snapshots; absent
    /// when the run recorded fewer than three.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rh_max: Option<f64>,
}

/// The metadata document. `config` is a complete, resolved `RunConfig`;
/// `simulate --config <run>/metadata.json` replays the run bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub config: RunConfig,
    pub run: RunMeta,
    pub residuals: ResidualSummary,
}

// ---- writing ----

pub struct RunSummary {
    pub out: PathBuf,
    pub snapshots: usize,
    pub steps: u64,
    pub termination: String,
    pub ell_first: f64,
    pub ell_last: f64,
}

/// Run a config end to end: build parameters and the initial state, drive
/// the solver, and persist the run directory at `out`.
pub fn simulate_into(cfg: &RunConfig, out: &Path) -> Result<RunSummary, Failure> {
    let params = cfg.params()?;
    let scheme = cfg.scheme();
    let state = cfg.initial_state(params)?;
    let traj = satflux_core::dual::run_from_state(state, &scheme)?;
    write_run(&traj, cfg, out)
}

fn write_run(traj: &Trajectory, cfg: &RunConfig, out: &Path) -> Result<RunSummary, Failure> {
    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| io_fail("cannot create", &snap_dir, e))?;

    for (i, e) in traj.entries.iter().enumerate() {
        let mut text = String::with_capacity(40 * e.state.v.len() + 8);
        text.push_str(STATE_HEADER);
        text.push('\n');
        let deta = e.state.deta();
        for (j, &v) in e.state.v.iter().enumerate() {
            let eta = (j as f64 + 0.5) * deta;
            text.push_str(&fmt17(eta));
            text.push(',');
            text.push_str(&fmt17(v));
            text.push('\n');
        }
        write_atomic(&snap_dir.join(format!("snap_{i:06}.csv")), &text)?;
    }

    let mut diag = String::with_capacity(300 * traj.entries.len() + 128);
    diag.push_str(DIAG_HEADER);
    diag.push('\n');
    for e in &traj.entries {
        let d = &e.diag;
        let row = [
            d.t,
            d.sigma_minus,
            d.sigma_plus,
            d.ell,
            d.mu_bar,
            d.sigma_c,
            d.mass_center,
            d.vmin,
            d.vmax,
            d.mass_law_residual,
            d.bv_seminorm,
            d.rh_minus,
            d.rh_plus,
        ];
        let cols: Vec<String> = row.iter().map(|&x| fmt17(x)).collect();
        diag.push_str(&cols.join(","));
        diag.push('\n');
    }
    write_atomic(&out.join("diagnostics.csv"), &diag)?;

    // echo the directory the run actually landed in
    let mut cfg_echo = cfg.clone();
    cfg_echo.output.directory = Some(out.to_string_lossy().into_owned());
    let meta = Metadata {
        config: cfg_echo,
        run: RunMeta {
            termination: traj.termination.into(),
            termination_reason: traj.termination.to_string(),
            final_t: traj.final_entry().state.t,
            steps_taken: traj.steps_taken,
            snapshots: traj.entries.len(),
            ell0: traj.ell0,
            c5_estimate: traj.c5_estimate,
        },
        residuals: residual_summary(traj),
    };
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Failure::Config(format!("cannot serialize metadata: {e}")))?;
    write_atomic(&out.join("metadata.json"), &(json + "\n"))?;

    if cfg.output.emit_svg {
        write_svgs(traj, out)?;
    }

    Ok(RunSummary {
        out: out.to_path_buf(),
        snapshots: traj.entries.len(),
        steps: traj.steps_taken,
        termination: traj.termination.to_string(),
        ell_first: traj.entries[0].diag.ell,
        ell_last: traj.final_entry().diag.ell,
    })
}

fn residual_summary(traj: &Trajectory) -> ResidualSummary {
    let mut bv_max = 0.0f64;
    let mut rh_max: Option<f64> = None;
    for e in &traj.entries {
        bv_max = bv_max.max(e.diag.bv_seminorm);
        let rh = e.diag.rh_minus.max(e.diag.rh_plus);
        if rh.is_finite() {
            rh_max = Some(rh_max.map_or(rh, |m| m.max(rh)));
        }
    }
    ResidualSummary {
        mass_law_max: validate::check_mass_law(traj).max_residual,
        support_law_max: validate::check_support_law(traj).max_residual,
        center_identity_max: validate::check_center_identity(traj).max_residual,
        bv_max,
        rh_max,
    }
}

fn write_svgs(traj: &Trajectory, out: &Path) -> Result<(), Failure> {
    let ell: Vec<(f64, f64)> = traj.entries.iter().map(|e| (e.diag.t, e.diag.ell)).collect();
    let plot = svg::line_plot(
        "support length",
        "t",
        "ell",
        &[Series { label: "ell(t)".into(), points: ell }],
    );
    write_atomic(&out.join("ell.svg"), &plot)?;

    let last = traj.entries.len() - 1;
    let mut picks = vec![0, last / 4, last / 2, 3 * last / 4, last];
    picks.dedup();
    let mut series = Vec::new();
    for i in picks {
        let e = &traj.entries[i];
        let snap = front::reconstruct(&e.state, e.fronts.sigma_minus);
        let points: Vec<(f64, f64)> = snap.x.iter().copied().zip(snap.u.iter().copied()).collect();
        series.push(Series { label: format!("t={:.3}", e.state.t), points });
    }
    let plot = svg::line_plot("density profiles", "x", "u", &series);
    write_atomic(&out.join("profiles.svg"), &plot)
}

// ---- reading ----

/// Parse a CSV written by this tool: exact header, then one row of
/// comma-separated floats per line.
fn parse_csv(path: &Path, header: &str, cols: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_fail("cannot read", path, e))?;
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default().trim_end();
    // the on-disk header is a single line; the constant may carry a
    // continuation split, so compare whitespace-free
    let want: String = header.split_whitespace().collect();
    if first != want {
        return Err(Failure::Config(format!(
            "{}: unexpected header `{first}` (want `{want}`)",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(cols);
        for tok in line.split(',') {
            let x: f64 = tok.parse().map_err(|_| {
                Failure::Config(format!(
                    "{}:{}: not a number: `{tok}`",
                    path.display(),
                    lineno + 2
                ))
            })?;
            row.push(x);
        }
        if row.len() != cols {
            return Err(Failure::Config(format!(
                "{}:{}: expected {cols} columns, got {}",
                path.display(),
                lineno + 2,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read a snapshot-format CSV (`eta,v`) and return the `v` column.
pub fn read_state_csv(path: &Path) -> Result<Vec<f64>, Failure> {
    Ok(parse_csv(path, STATE_HEADER, 2)?.into_iter().map(|r| r[1]).collect())
}

pub fn read_metadata(dir: &Path) -> Result<Metadata, Failure> {
    let path = dir.join("metadata.json");
    let text = fs::read_to_string(&path).map_err(|e| io_fail("cannot read", &path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Rebuild the recorded trajectory from a run directory. The scalar
/// diagnostics come from `diagnostics.csv`, the states from the snapshot
/// files, and the run-level fields from the metadata; validation then
/// recomputes every invariant from the states, so edited files are caught.
pub fn load_run(dir: &Path) -> Result<(Trajectory, Metadata), Failure> {
    let meta = read_metadata(dir)?;
    let params = meta.config.params()?;
    let scheme: SchemeConfig = meta.config.scheme();
    scheme.validate()?;

    let rows = parse_csv(&dir.join("diagnostics.csv"), DIAG_HEADER, 13)?;
    if rows.is_empty() {
        return Err(Failure::Config(format!(
            "{}: diagnostics.csv has no rows",
            dir.display()
        )));
    }

    let mut entries = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let snap_path = dir.join("snapshots").join(format!("snap_{i:06}.csv"));
        let v = read_state_csv(&snap_path)?;
        if v.len() != scheme.n {
            return Err(Failure::Config(format!(
                "{}: {} rows but grid.N = {}",
                snap_path.display(),
                v.len(),
                scheme.n
            )));
        }
        let t = r[0];
        let diag = DiagnosticsRow {
            t,
            sigma_minus: r[1],
            sigma_plus: r[2],
            ell: r[3],
            mu_bar: r[4],
            sigma_c: r[5],
            mass_center: r[6],
            vmin: r[7],
            vmax: r[8],
            mass_law_residual: r[9],
            bv_seminorm: r[10],
            rh_minus: r[11],
            rh_plus: r[12],
        };
        entries.push(TrajectoryEntry {
            state: DualState { t, params: params.clone(), v },
            fronts: FrontState { t, sigma_minus: r[1], sigma_plus: r[2] },
            diag,
        });
    }
    if meta.run.snapshots != entries.len() {
        return Err(Failure::Config(format!(
            "{}: metadata records {} snapshots but diagnostics.csv has {}",
            dir.display(),
            meta.run.snapshots,
            entries.len()
        )));
    }

    let traj = Trajectory {
        entries,
        config: scheme,
        termination: meta.run.termination.clone().into(),
        c5_estimate: meta.run.c5_estimate,
        ell0: meta.run.ell0,
        steps_taken: meta.run.steps_taken,
    };
    Ok((traj, meta))
}

// ---- validation report ----

#[derive(Debug, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub max_residual: f64,
    /// Absent for purely diagnostic entries (no finite tolerance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_eta: Option<f64>,
}

impl From<CheckEntry> for ReportEntry {
    fn from(e: CheckEntry) -> Self {
        let opt = |x: f64| x.is_finite().then_some(x);
        ReportEntry {
            name: e.name,
            max_residual: e.max_residual,
            tolerance: opt(e.tolerance),
            pass: e.pass,
            worst_t: opt(e.worst_t),
            worst_eta: opt(e.worst_eta),
        }
    }
}

/// The state-side support length and the front-ODE length move along the
/// same line up to the boundary-flux defect; a divergence beyond it means
/// the diagnostics rows and the snapshots no longer describe one run.
fn front_consistency(traj: &Trajectory) -> CheckEntry {
    let defect = 2.0 * traj.config.eps.powf(traj.config.kappa_bc);
    let t0 = traj.entries[0].state.t;
    let mut worst = 0.0f64;
    let mut worst_t = t0;
    let mut pass = true;
    for e in &traj.entries {
        let r = (e.fronts.ell() - e.state.support_length()).abs();
        if r > defect * (e.state.t - t0) + 1e-9 {
            pass = false;
        }
        if r > worst {
            worst = r;
            worst_t = e.state.t;
        }
    }
    CheckEntry {
        name: "front-consistency".into(),
        max_residual: worst,
        tolerance: defect * (worst_t - t0) + 1e-9,
        pass,
        worst_t,
        worst_eta: f64::NAN,
    }
}

/// Re-validate a run directory: rebuild the trajectory, run the standard
/// invariant battery plus the front-consistency check, and write
/// `report.json` (an array of entries) next to the data.
pub fn check_run(dir: &Path) -> Result<(Vec<ReportEntry>, bool), Failure> {
    let (traj, _meta) = load_run(dir)?;
    let params = traj.entries[0].state.params.clone();
    let env = EnvelopeParams::from_initial(&params, &traj.config, &traj.entries[0].state.v)?;

    let mut report = validate::standard_report(&traj, &env);
    report.entries.push(front_consistency(&traj));
    let pass = report.pass();

    let entries: Vec<ReportEntry> = report.entries.into_iter().map(Into::into).collect();
    let json = serde_json::to_string_pretty(&entries)
        .map_err(|e| Failure::Config(format!("cannot serialize report: {e}")))?;
    write_atomic(&dir.join("report.json"), &(json + "\n"))?;
    Ok((entries, pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips_bits() {
        for &x in &[0.0, 1.0, -1.5, 1.0 / 3.0, 6.02e23, 1e-300, f64::MIN_POSITIVE] {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {}", fmt17(x));
        }
        assert!(fmt17(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join(format!("satflux-w{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.csv");
        write_atomic(&path, "one\n").unwrap();
        write_atomic(&path, "two\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
