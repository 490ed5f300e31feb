//! Experiment configuration, the acceptance criteria A1-A10 and report files.
//!
//! Every criterion runner returns a [`CriterionRecord`] that lists its
//! measurements together with the operation that produced them, plus the
//! individual checks. Runners write their CSV tables into the output
//! directory; all floats in CSV files use a fixed `{:.17e}` format so that two
//! runs with the same configuration can be compared byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounded_solver::{
    boundary_lift, boundary_normal_derivative, local_zygmund_profile, solve, solve_disk, DiskSolve, NeumannProblem,
};
use crate::error::{Error, Result};
use crate::extension::{
    collar_velocity, convective_flux, default_battery, jump_diagnostic, pressure_flux, reflect, reflect_unchecked,
    weak_divergence_residual, TwoSided,
};
use crate::fields::{
    synth_disk_tangent, synth_lacunary_divfree, LacunaryField, LacunarySpec, LacunaryStream, RadialFactor,
    StreamSpec,
};
use crate::geometry::{disk_metric, ellipticity_constant, laplace_beltrami, CollarField};
use crate::io::write_field;
use crate::norms::{
    block_profile, default_fit_range, fit_decay_exponent, holder_norm, linear_fit, loglip_norm,
    second_difference_norm,
};
use crate::polar::{PolarField, PolarGrid};
use crate::pressure_periodic::{
    pressure_diagnostics, pressure_from_modes, solve_pressure_torus, verify_double_regularity,
};
use crate::spectral_core::{make_partition, Bump, GridField};
use crate::symbols::{diagonal_mode, disk_collar_box, identity_box, parametrix_remainder_order, parametrix_setup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Torus,
    Disk,
}

/// Pass/fail thresholds. Missing keys take the default values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed excess of a fitted slope over its predicted value.
    pub slope_margin: f64,
    pub min_r_squared: f64,
    /// Max/min of the pressure-to-velocity norm ratio across seeds.
    pub seed_ratio_spread: f64,
    /// Max/min of the borderline ratio across `J`.
    pub borderline_spread: f64,
    pub split_identity: f64,
    pub closed_form: f64,
    pub max_run_seconds: f64,
    pub loglip_spread: f64,
    pub loglip_coefficient: f64,
    /// Relative tolerance on the `|log h|` coefficient.
    pub loglip_coefficient_rel: f64,
    pub metric_exact: f64,
    pub min_order: f64,
    pub weak_divergence: f64,
    pub jump: f64,
    pub violation: f64,
    pub flat_inverse: f64,
    pub weak_form: f64,
    /// `C` in `||p - (ψ + q)||_∞ <= C h^2`.
    pub lift_constant: f64,
    pub quotient_growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope_margin: 0.15,
            min_r_squared: 0.9,
            seed_ratio_spread: 2.0,
            borderline_spread: 2.0,
            split_identity: 1e-10,
            closed_form: 1e-10,
            max_run_seconds: 120.0,
            loglip_spread: 1.1,
            loglip_coefficient: 2.0,
            loglip_coefficient_rel: 0.2,
            metric_exact: 1e-14,
            min_order: 1.8,
            weak_divergence: 1e-6,
            jump: 1e-5,
            violation: 0.1,
            flat_inverse: 1e-12,
            weak_form: 1e-6,
            lift_constant: 1.0,
            quotient_growth: 1.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub gamma_list: Vec<f64>,
    pub seeds: Vec<u64>,
    pub grid_n: usize,
    #[serde(rename = "J_max")]
    pub j_max: u32,
    pub delta: f64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    /// Shrinks the fixed-size studies (A2, A3, A5-A9) to desk-test sizes.
    pub quick: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: Geometry::Torus,
            gamma_list: vec![0.25, 0.4],
            seeds: vec![1, 2, 3, 4, 5],
            grid_n: 1024,
            j_max: 8,
            delta: 0.25,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("out"),
            quick: false,
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: String, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if self.gamma_list.is_empty() {
            return bad("gamma_list".into(), "at least one exponent is required".into());
        }
        for (i, &g) in self.gamma_list.iter().enumerate() {
            if !(g > 0.0 && g <= 0.5) {
                return bad(format!("gamma_list[{i}]"), format!("{g} outside (0, 0.5]"));
            }
        }
        if self.seeds.is_empty() {
            return bad("seeds".into(), "at least one seed is required".into());
        }
        if self.grid_n < 16 || !self.grid_n.is_power_of_two() {
            return bad("grid_n".into(), format!("{} is not a power of two >= 16", self.grid_n));
        }
        if self.j_max < 2 || self.j_max > 20 {
            return bad("J_max".into(), format!("{} outside [2, 20]", self.j_max));
        }
        if self.grid_n < 4 << self.j_max {
            return bad(
                "J_max".into(),
                format!("shells up to 2^{} need grid_n >= {}", self.j_max, 4usize << self.j_max),
            );
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad("delta".into(), format!("{} outside (0, 0.5)", self.delta));
        }
        Ok(())
    }

    /// Copy used for the determinism reruns.
    pub fn quick_variant(&self) -> Self {
        let mut c = self.clone();
        c.quick = true;
        c.seeds.truncate(2);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub operation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub id: String,
    pub title: String,
    pub module: String,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl CriterionRecord {
    fn new(c: &Criterion) -> Self {
        CriterionRecord {
            id: c.id.into(),
            title: c.title.into(),
            module: c.module.into(),
            passed: false,
            measurements: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    fn measure(&mut self, name: impl Into<String>, value: f64, operation: &str) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            operation: operation.into(),
        });
    }

    fn check(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(Check { name: name.into(), passed });
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(mut self) -> Self {
        self.passed = self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// `A1 PASS  title` style summary line.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{} {verdict}  {}", self.id, self.title);
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            s.push_str(&format!("  [failed: {}]", failed.join("; ")));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("  [error: {e}]"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Periodic,
    Disk,
}

impl ReportKind {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportKind::Periodic => "report_periodic.json",
            ReportKind::Disk => "report_disk.json",
        }
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub module: &'static str,
    pub title: &'static str,
    pub report: ReportKind,
    run: Runner,
}

type Runner = fn(&ExperimentConfig, &[&str], &mut Outputs, &mut CriterionRecord) -> Result<()>;

pub const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: "A1",
        module: "pressure_periodic",
        title: "periodic double regularity",
        report: ReportKind::Periodic,
        run: a1_double_regularity,
    },
    Criterion {
        id: "A2",
        module: "pressure_periodic",
        title: "borderline gamma = 1/2",
        report: ReportKind::Periodic,
        run: a2_borderline,
    },
    Criterion {
        id: "A3",
        module: "pressure_periodic",
        title: "splitting identity and I_N / J_N decay",
        report: ReportKind::Periodic,
        run: a3_splitting,
    },
    Criterion {
        id: "A4",
        module: "pressure_periodic",
        title: "closed-form shear pressure",
        report: ReportKind::Periodic,
        run: a4_closed_form,
    },
    Criterion {
        id: "A5",
        module: "norms",
        title: "Zygmund / log-Lipschitz separation",
        report: ReportKind::Periodic,
        run: a5_loglip,
    },
    Criterion {
        id: "A6",
        module: "geometry",
        title: "collar geometry exactness",
        report: ReportKind::Disk,
        run: a6_geometry,
    },
    Criterion {
        id: "A7",
        module: "extension",
        title: "reflection extension soundness",
        report: ReportKind::Disk,
        run: a7_extension,
    },
    Criterion {
        id: "A8",
        module: "symbols",
        title: "parametrix remainder",
        report: ReportKind::Disk,
        run: a8_parametrix,
    },
    Criterion {
        id: "A9",
        module: "bounded_solver",
        title: "disk Neumann solver",
        report: ReportKind::Disk,
        run: a9_disk_solver,
    },
    Criterion {
        id: "A10",
        module: "cli",
        title: "determinism of CSV outputs",
        report: ReportKind::Periodic,
        run: a10_determinism,
    },
];

pub const MODULES: [&str; 9] = [
    "spectral_core",
    "norms",
    "fields",
    "pressure_periodic",
    "geometry",
    "extension",
    "symbols",
    "bounded_solver",
    "cli",
];

/// Criterion ids exercised by a module filter.
pub fn criteria_for(module: &str) -> Result<Vec<&'static str>> {
    if !MODULES.contains(&module) {
        return Err(Error::Config(format!("--only: unknown module `{module}` (one of {})", MODULES.join(", "))));
    }
    // synthesis and the dyadic partition feed every periodic criterion
    let ids = match module {
        "spectral_core" | "fields" => vec!["A1", "A2", "A3", "A4", "A5"],
        m => CRITERIA.iter().filter(|c| c.module == m).map(|c| c.id).collect(),
    };
    Ok(ids)
}

/// Output directory plus the list of CSV files written so far.
pub struct Outputs {
    pub dir: PathBuf,
    pub csv: Vec<PathBuf>,
    pub fields: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            csv: Vec::new(),
            fields: Vec::new(),
        })
    }

    pub fn write_csv(&mut self, name: &str, content: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, content)?;
        self.csv.push(p);
        Ok(())
    }

    pub fn write_field(&mut self, name: &str, f: &GridField) -> Result<()> {
        let p = self.dir.join("fields").join(name);
        write_field(&p, f)?;
        self.fields.push(p);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub bump_fingerprint: String,
    pub bump_description: String,
    pub code_version: String,
    pub config: ExperimentConfig,
}

impl Provenance {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let b = Bump::shared();
        Provenance {
            bump_fingerprint: b.fingerprint(),
            bump_description: b.description().into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub report: ReportKind,
    pub provenance: Provenance,
    pub records: Vec<CriterionRecord>,
}

/// Runs one criterion; runner errors become a failed record carrying the message.
///
/// `selection` is the set of criteria that A10 reruns.
pub fn run_criterion(
    id: &str,
    cfg: &ExperimentConfig,
    selection: &[&str],
    out: &mut Outputs,
) -> Result<CriterionRecord> {
    let c = CRITERIA
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::Config(format!("unknown criterion {id}")))?;
    let mut rec = CriterionRecord::new(c);
    if let Err(e) = (c.run)(cfg, selection, out, &mut rec) {
        rec.error = Some(e.to_string());
    }
    Ok(rec.finish())
}

/// Outcome of [`run_suite`].
pub struct SuiteOutcome {
    pub records: Vec<CriterionRecord>,
    pub reports: Vec<PathBuf>,
    pub csv: Vec<PathBuf>,
}

impl SuiteOutcome {
    pub fn record(&self, id: &str) -> Option<&CriterionRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// True when some runner stopped with an error rather than a verdict.
    pub fn has_errors(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }
}

/// Runs the given criteria in order, rewriting the report files after each
/// one so an interrupted run leaves a partial report behind.
pub fn run_suite(cfg: &ExperimentConfig, ids: &[&str]) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    let prov = Provenance::new(cfg);
    let mut records: Vec<CriterionRecord> = Vec::new();
    let mut reports = Vec::new();
    for c in CRITERIA.iter().filter(|c| ids.contains(&c.id)) {
        let rec = run_criterion(c.id, cfg, ids, &mut out)?;
        records.push(rec);
        let path = out.dir.join(c.report.file_name());
        let rep = ExperimentReport {
            report: c.report,
            provenance: prov.clone(),
            records: records.iter().filter(|r| report_of(&r.id) == c.report).cloned().collect(),
        };
        fs::write(&path, serde_json::to_string_pretty(&rep)? + "\n")?;
        if !reports.contains(&path) {
            reports.push(path);
        }
    }
    Ok(SuiteOutcome {
        records,
        reports,
        csv: out.csv,
    })
}

fn report_of(id: &str) -> ReportKind {
    CRITERIA.iter().find(|c| c.id == id).map(|c| c.report).unwrap_or(ReportKind::Periodic)
}

/// The full acceptance suite, optionally restricted to one module.
pub fn verify_all(cfg: &ExperimentConfig, only: Option<&str>) -> Result<SuiteOutcome> {
    let ids: Vec<&str> = match only {
        Some(m) => criteria_for(m)?,
        None => CRITERIA.iter().map(|c| c.id).collect(),
    };
    let mut ids = ids;
    // A10 needs something to compare; with a module filter it reruns that module
    if only.is_some() && !ids.contains(&"A10") {
        ids.push("A10");
    }
    run_suite(cfg, &ids)
}

fn fmt_csv(v: f64) -> String {
    format!("{v:.17e}")
}

// A1: for every (γ, seed) cell, the pressure block profile decays like N^{-2γ}
// and ||p||_{C^{2γ}_*} / ||u||^2_{C^γ_*} is comparable across seeds.
fn a1_double_regularity(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let range = default_fit_range(cfg.j_max);
    let wide = (16, 1usize << cfg.j_max);
    rec.note(format!(
        "grid {}^2, J_max = {}, fit window [{}, {}]",
        cfg.grid_n, cfg.j_max, range.0, range.1
    ));
    let cells = verify_double_regularity(&cfg.gamma_list, &cfg.seeds, cfg.grid_n, cfg.j_max, range)?;
    let mut slowest = 0.0f64;
    for &gamma in &cfg.gamma_list {
        let mut ratios = Vec::new();
        for c in cells.iter().filter(|c| c.gamma == gamma) {
            slowest = slowest.max(c.seconds);
            let cell = format!("gamma={gamma},seed={}", c.seed);
            let op = "verify_double_regularity: fit_decay_exponent(block_profile(solve_pressure_torus(u)))";
            rec.measure(format!("slope[{cell}]"), c.p_fit.slope, op);
            rec.measure(format!("r_squared[{cell}]"), c.p_fit.r_squared, op);
            rec.measure(format!("u_slope[{cell}]"), c.u_fit.slope, "fit_decay_exponent(block_profile(u))");
            rec.measure(
                format!("ratio[{cell}]"),
                c.ratio,
                "zygmund_norm(p, 2 gamma) / zygmund_norm(u, gamma)^2",
            );
            if let Some(b) = c.borderline {
                rec.measure(format!("borderline[{cell}]"), b, "sup_N N ||p_N|| / holder_norm(u, 0.5)^2");
            }
            if let Ok(w) = fit_decay_exponent(&c.p_blocks, wide) {
                rec.measure(format!("slope_16_to_top[{cell}]"), w.slope, op);
            }
            rec.check(
                format!("slope <= -2 gamma + {} with r^2 >= {} [{cell}]", tol.slope_margin, tol.min_r_squared),
                c.p_fit.slope <= -2.0 * gamma + tol.slope_margin && c.p_fit.r_squared >= tol.min_r_squared,
            );
            ratios.push(c.ratio);
            let mut csv = String::from("level,u_sup,p_sup\n");
            for (i, l) in c.p_blocks.levels.iter().enumerate() {
                csv.push_str(&format!(
                    "{l},{},{}\n",
                    fmt_csv(c.u_blocks.sup_norms[i]),
                    fmt_csv(c.p_blocks.sup_norms[i])
                ));
            }
            out.write_csv(&format!("blocks_{gamma}_{}.csv", c.seed), &csv)?;
            if c.seed == cfg.seeds[0] {
                out.write_field(&format!("u_{gamma}_{}", c.seed), &c.u)?;
                out.write_field(&format!("p_{gamma}_{}", c.seed), &c.p)?;
            }
        }
        let spread = spread(&ratios);
        rec.measure(format!("ratio_spread[gamma={gamma}]"), spread, "max/min of ratio over seeds");
        rec.check(
            format!("ratio spread <= {} [gamma={gamma}]", tol.seed_ratio_spread),
            spread <= tol.seed_ratio_spread,
        );
    }
    rec.measure("max_run_seconds", slowest, "wall clock per (gamma, seed) cell");
    rec.check(format!("runtime <= {} s per run", tol.max_run_seconds), slowest <= tol.max_run_seconds);
    Ok(())
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}

// A2: sup_N N ||p_N|| / ||u||^2_{C^{1/2}} as the number of shells grows. The
// pressure is the exact mode-pair sum, so no dealiasing grid is needed.
fn a2_borderline(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let seed = cfg.seeds[0];
    let js: Vec<u32> = if cfg.quick { (6..=8).collect() } else { (6..=10).collect() };
    let mut csv = String::from("J,n,holder_u,sup_n_p,ratio\n");
    let mut ratios = Vec::new();
    for &j in &js {
        let n = 4usize << j;
        let field = LacunaryField::generate(&LacunarySpec { gamma: 0.5, j, seed, amplitude: 1.0 })?;
        let h = holder_norm(&field.sample(n)?, 0.5);
        let p = pressure_from_modes(&field, n)?;
        let s = block_profile(&p, &make_partition(j + 2))?.weighted_sup(1.0);
        let ratio = s / (h * h);
        rec.measure(format!("holder_u[J={j}]"), h, "holder_norm(u, 0.5)");
        rec.measure(format!("sup_N_N_pN[J={j}]"), s, "block_profile(pressure_from_modes).weighted_sup(1)");
        rec.measure(format!("ratio[J={j}]"), ratio, "sup_N N ||p_N|| / holder_norm(u, 0.5)^2");
        csv.push_str(&format!("{j},{n},{},{},{}\n", fmt_csv(h), fmt_csv(s), fmt_csv(ratio)));
        ratios.push(ratio);
    }
    out.write_csv(&format!("borderline_{seed}.csv"), &csv)?;
    let sp = spread(&ratios);
    rec.measure("ratio_spread", sp, "max/min of ratio over J");
    rec.check(
        format!("ratio stable within {}x for J = {}..{}", tol.borderline_spread, js[0], js[js.len() - 1]),
        sp <= tol.borderline_spread,
    );
    Ok(())
}

// A3: q_N = I_N + J_N and the decay of both pieces over the top four octaves.
fn a3_splitting(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let gamma = 0.4;
    let seed = cfg.seeds[0];
    let j = if cfg.quick { cfg.j_max } else { cfg.j_max + 1 };
    let n = 4usize << j;
    let part = make_partition(j);
    let u = synth_lacunary_divfree(&LacunarySpec { gamma, j, seed, amplitude: 1.0 }, n)?;
    let d = pressure_diagnostics(&u, &part)?;
    let range = (1usize << j.saturating_sub(3), 1usize << j);
    rec.note(format!("gamma = {gamma}, J = {j}, grid {n}^2, fit window [{}, {}]", range.0, range.1));
    rec.measure("identity_defect", d.identity_defect, "SplitSpectra::identity_defect");
    rec.check(
        format!("||q_N - (I_N + J_N)|| <= {} relative", tol.split_identity),
        d.identity_defect <= tol.split_identity,
    );
    for (name, prof) in [("I", &d.i_blocks), ("J", &d.j_blocks)] {
        let fit = fit_decay_exponent(prof, range)?;
        rec.measure(format!("{name}_slope"), fit.slope, "fit_decay_exponent(split_spectra profiles)");
        rec.measure(format!("{name}_r_squared"), fit.r_squared, "fit_decay_exponent(split_spectra profiles)");
        rec.check(
            format!("{name}_N slope <= -2 gamma + {}", tol.slope_margin),
            fit.slope <= -2.0 * gamma + tol.slope_margin,
        );
    }
    let mut csv = String::from("level,q_sup,I_sup,J_sup\n");
    for (i, l) in d.q_blocks.levels.iter().enumerate() {
        csv.push_str(&format!(
            "{l},{},{},{}\n",
            fmt_csv(d.q_blocks.sup_norms[i]),
            fmt_csv(d.i_blocks.sup_norms[i]),
            fmt_csv(d.j_blocks.sup_norms[i])
        ));
    }
    out.write_csv(&format!("split_{gamma}_{seed}.csv"), &csv)?;
    Ok(())
}

// A4: u = (cos ky, cos kx) has pressure sin kx sin ky.
fn a4_closed_form(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    _out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let n = 128;
    for k in [2.0f64, 8.0, 32.0] {
        let u = GridField::periodic_2d(n, 2, |x, y, c| if c == 0 { (k * y).cos() } else { (k * x).cos() })?;
        let p = solve_pressure_torus(&u)?;
        let exact = GridField::periodic_2d(n, 1, |x, y, _| (k * x).sin() * (k * y).sin())?;
        let err = p.sub(&exact).sup_norm();
        rec.measure(format!("error[k={k}]"), err, "solve_pressure_torus vs sin(kx) sin(ky)");
        rec.check(format!("error <= {} [k={k}]", cfg.tolerances.closed_form), err <= cfg.tolerances.closed_form);
    }
    Ok(())
}

// A5: u(x) = -|x| log|x| is log-Lipschitz but its second-difference quotient
// grows like 2 |log h|.
fn a5_loglip(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let exps: [u32; 3] = if cfg.quick { [10, 11, 12] } else { [12, 13, 14] };
    let mut lls = Vec::new();
    for &e in &exps {
        let n = 1usize << e;
        let f = GridField::window_1d(n, -0.5, 0.5, |x| if x == 0.0 { 0.0 } else { -x.abs() * x.abs().ln() })?;
        let ll = loglip_norm(&f);
        let (_, prof) = second_difference_norm(&f);
        let xs: Vec<f64> = prof.iter().map(|p| p.0.ln().abs()).collect();
        let ys: Vec<f64> = prof.iter().map(|p| p.1).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        rec.measure(format!("loglip[n=2^{e}]"), ll, "loglip_norm");
        rec.measure(format!("log_coefficient[n=2^{e}]"), slope, "linear_fit(|log h|, second_difference_norm profile)");
        rec.measure(format!("log_fit_r_squared[n=2^{e}]"), r2, "linear_fit");
        let mut csv = String::from("h,sup_quotient\n");
        for (h, q) in &prof {
            csv.push_str(&format!("{},{}\n", fmt_csv(*h), fmt_csv(*q)));
        }
        out.write_csv(&format!("second_difference_2e{e}.csv"), &csv)?;
        let target = tol.loglip_coefficient;
        rec.check(
            format!("|log h| coefficient = {target} +- {}% [n=2^{e}]", 100.0 * tol.loglip_coefficient_rel),
            (slope - target).abs() <= tol.loglip_coefficient_rel * target,
        );
        lls.push(ll);
    }
    let sp = spread(&lls);
    rec.measure("loglip_spread", sp, "max/min of loglip_norm over refinement");
    rec.check(format!("loglip stable within {}x", tol.loglip_spread), sp <= tol.loglip_spread);
    Ok(())
}

// A6: metric samples, Laplace-Beltrami against x^3 y + sin(2x) e^y, and c = 1.
fn a6_geometry(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let m = disk_metric(0.5, 64, 128)?;
    let mut dg = 0.0f64;
    let mut dbig = 0.0f64;
    for i in 0..m.grid.rows {
        let r = m.grid.r(i);
        for j in 0..m.grid.ntheta {
            let g = (1.0 - r).powi(-2);
            dg = dg.max((m.g_theta_theta.at(0, i, j) - g).abs() / g);
            dbig = dbig.max((m.big_g.at(0, i, j) - (1.0 - r)).abs());
        }
    }
    rec.measure("g_theta_theta_error", dg, "disk_metric vs (1 - r)^-2");
    rec.measure("G_error", dbig, "disk_metric vs 1 - r");
    rec.check("metric samples exact", dg <= tol.metric_exact && dbig <= tol.metric_exact);
    let c = ellipticity_constant(&m);
    rec.measure("ellipticity_constant", c, "ellipticity_constant(disk_metric(0.5))");
    rec.check("ellipticity constant = 1 on the r0 = 1/2 collar", (c - 1.0).abs() <= tol.metric_exact);

    let xy = |r: f64, t: f64| ((1.0 - r) * t.cos(), (1.0 - r) * t.sin());
    let nrs: Vec<usize> = if cfg.quick { vec![16, 32, 64] } else { vec![16, 32, 64, 128] };
    let mut errs = Vec::new();
    let mut csv = String::from("nr,error\n");
    for &nr in &nrs {
        let m = disk_metric(0.5, nr, 4 * nr)?;
        let p = CollarField::from_fn(m.grid, 1, |r, t, _| {
            let (x, y) = xy(r, t);
            x * x * x * y + (2.0 * x).sin() * y.exp()
        });
        let exact = CollarField::from_fn(m.grid, 1, |r, t, _| {
            let (x, y) = xy(r, t);
            6.0 * x * y - 3.0 * (2.0 * x).sin() * y.exp()
        });
        let e = laplace_beltrami(&p, &m)?.sub(&exact).sup_norm();
        rec.measure(format!("laplace_error[nr={nr}]"), e, "laplace_beltrami vs Cartesian Laplacian");
        csv.push_str(&format!("{nr},{}\n", fmt_csv(e)));
        errs.push(e);
    }
    out.write_csv("laplace_beltrami.csv", &csv)?;
    let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::MAX, f64::min);
    rec.measure("laplace_order", order, "min log2 ratio of successive errors");
    rec.check(format!("Laplace-Beltrami order >= {}", tol.min_order), order >= tol.min_order);
    Ok(())
}

/// Neumann-compatible pressure `ρ^3 (1 - 3ρ^2/5) cos 3θ` on the collar.
fn collar_test_pressure(r: f64, t: f64) -> f64 {
    let rho = 1.0 - r;
    rho.powi(3) * (1.0 - 0.6 * rho * rho) * (3.0 * t).cos()
}

// A7: the reflected field is weakly divergence free and the fluxes match
// across r = 0; broken inputs are caught.
fn a7_extension(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let n = if cfg.quick { 128 } else { 256 };
    let m = disk_metric(0.5, n / 4, n)?;
    let stream = LacunaryStream::generate(&StreamSpec {
        gamma: 0.25,
        j: 4,
        seed: cfg.seeds[0],
        boundary_factor: RadialFactor::default(),
    })?;
    let u = collar_velocity(&stream, m.grid);
    let p = CollarField::from_fn(m.grid, 1, |r, t, _| collar_test_pressure(r, t));
    let rc = reflect(&u, Some(&p), &m)?;
    let battery = default_battery(0.5);
    let w = weak_divergence_residual(&rc, &battery);
    let conv = jump_diagnostic(&convective_flux(&rc))?;
    let pflux = pressure_flux(&rc)?;
    let pj = jump_diagnostic(&pflux)?;
    rec.note(format!("collar grid {} x {}, lacunary stream gamma = 0.25, J = 4", n / 4, n));
    rec.measure("weak_divergence_residual", w, "weak_divergence_residual(reflect(u, p))");
    rec.measure("convective_jump", conv.max(), "jump_diagnostic(convective_flux)");
    rec.measure("pressure_jump", pj.max(), "jump_diagnostic(pressure_flux)");
    rec.check(format!("weak divergence residual <= {}", tol.weak_divergence), w <= tol.weak_divergence);
    rec.check(
        format!("jump diagnostics <= {}", tol.jump),
        conv.max() <= tol.jump && pj.max() <= tol.jump,
    );
    out.write_csv("jump_convective.csv", &conv.to_csv())?;
    out.write_csv("jump_pressure.csv", &pj.to_csv())?;

    let bad = CollarField::from_fn(m.grid, 2, |r, _, c| if c == 0 { 1.0 / (1.0 - r) } else { 0.0 });
    let refused = reflect(&bad, None, &m).is_err();
    let wb = weak_divergence_residual(&reflect_unchecked(&bad, None, &m)?, &battery);
    rec.measure("violation_weak_residual", wb, "weak_divergence_residual(reflect_unchecked(non-tangent u))");
    rec.check("non-tangent velocity refused by reflect", refused);
    rec.check(format!("non-tangent velocity residual >= {}", tol.violation), wb >= tol.violation);
    let flipped = TwoSided {
        neg: pflux.neg.scaled(-1.0),
        pos: pflux.pos.clone(),
    };
    let fj = jump_diagnostic(&flipped)?.max();
    rec.measure("violation_jump", fj, "jump_diagnostic(pressure flux with a sign flip)");
    rec.check(format!("sign-flipped flux jump >= {}", tol.violation), fj >= tol.violation);
    Ok(())
}

// A8: exact inversion for the flat metric, remainder decay for the disk
// collar metric, and a finite ellipticity threshold M0.
fn a8_parametrix(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let n = if cfg.quick { 64 } else { 128 };
    let modes: Vec<usize> = [8usize, 16, 32, 64]
        .into_iter()
        .filter(|&m| diagonal_mode(m)[0] < (n / 2) as i64)
        .collect();
    rec.note(format!("grid {n}^2, delta = {}, modes {modes:?}", cfg.delta));

    let flat = parametrix_setup(&identity_box(n)?, cfg.delta, 1)?;
    let fs = parametrix_remainder_order(&flat.b, &flat.e2, &flat.cut, &modes)?;
    let fmax = fs.errors.iter().map(|e| e.1).fold(0.0, f64::max);
    rec.measure("flat_max_error", fmax, "parametrix_remainder_order(identity metric)");
    rec.check(format!("flat symbol inverted to {}", tol.flat_inverse), fs.exact_inverse() && fmax <= tol.flat_inverse);
    out.write_csv("remainder_flat.csv", &fs.to_csv())?;

    let disk = parametrix_setup(&disk_collar_box(n, 1.0)?, cfg.delta, 1)?;
    rec.measure("m0", disk.m0 as f64, "verify_sharp_ellipticity");
    rec.check("sharp symbol elliptic from a finite M0", true);
    let ds = parametrix_remainder_order(&disk.b, &disk.e2, &disk.cut, &modes)?;
    for (m, e) in &ds.errors {
        rec.measure(format!("disk_error[N={m}]"), *e, "parametrix_remainder_order(disk collar metric)");
    }
    out.write_csv("remainder_disk.csv", &ds.to_csv())?;
    let fit = ds
        .fit
        .ok_or_else(|| Error::DegenerateFit("disk remainder vanished identically".into()))?;
    rec.measure("disk_slope", fit.slope, "linear fit of log error against log N");
    rec.check(
        format!("order-1 remainder slope <= -(1 - delta) + {}", tol.slope_margin),
        fit.slope <= -(1.0 - cfg.delta) + tol.slope_margin,
    );
    Ok(())
}

fn lacunary_disk_solve(gamma: f64, j: u32, seed: u64, n: usize) -> Result<DiskSolve> {
    let stream = LacunaryStream::generate(&StreamSpec {
        gamma,
        j,
        seed,
        boundary_factor: RadialFactor::default(),
    })?;
    let u = synth_disk_tangent(&stream, PolarGrid::square(n)?);
    solve_disk(&u)
}

// A9: manufactured convergence, weak form, lift decomposition and the
// near-boundary second-difference profile.
fn a9_disk_solver(
    cfg: &ExperimentConfig,
    _selection: &[&str],
    out: &mut Outputs, rec: &mut CriterionRecord) -> Result<()> {
    let tol = &cfg.tolerances;
    let seed = cfg.seeds[0];
    let ns: [usize; 3] = if cfg.quick { [32, 64, 128] } else { [64, 128, 256] };

    let mut errs = Vec::new();
    let mut csv = String::from("n,error\n");
    for &n in &ns {
        let g = PolarGrid::square(n)?;
        let data: Vec<f64> = (0..g.ntheta).map(|j| 2.0 * (2.0 * g.theta(j)).cos()).collect();
        let np = NeumannProblem::new(g, PolarField::zeros(g, 1), data)?;
        let p = solve(&np)?.p;
        let exact = PolarField::from_fn(g, 1, |r, t, _| r * r * (2.0 * t).cos());
        let e = p.sub(&exact).sup_norm();
        rec.measure(format!("manufactured_error[n={n}]"), e, "solve vs rho^2 cos 2 theta");
        csv.push_str(&format!("{n},{}\n", fmt_csv(e)));
        errs.push(e);
    }
    out.write_csv("manufactured.csv", &csv)?;
    let order = errs.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::MAX, f64::min);
    rec.measure("manufactured_order", order, "min log2 ratio of successive errors");
    rec.check(format!("manufactured order >= {}", tol.min_order), order >= tol.min_order);

    let n = ns[2];
    let j = n.trailing_zeros() - 2;
    let d = lacunary_disk_solve(0.25, j, seed, n)?;
    rec.note(format!("gamma = 0.25 input: lacunary stream J = {j} on PolarGrid::square({n})"));
    rec.measure("solve_residual", d.solution.solve_residual, "solve");
    rec.measure("weak_residual", d.weak_residual, "weak_form_residual(default_test_battery)");
    rec.check(format!("weak-form residual <= {} at n = {n}", tol.weak_form), d.weak_residual <= tol.weak_form);

    let psi = boundary_lift(&d.problem)?;
    let q = solve(&d.problem.homogeneous_problem())?.p;
    let h = d.problem.grid.h();
    let lift_gap = d.solution.p.sub(&psi).sub(&q).sup_norm();
    let dn = boundary_normal_derivative(&d.solution.p.sub(&psi))
        .into_iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    rec.measure("lift_gap", lift_gap, "||p - (boundary_lift + homogeneous solve)||_inf");
    rec.measure("lift_normal_derivative", dn, "boundary_normal_derivative(p - boundary_lift)");
    rec.measure("h", h, "grid step");
    rec.check(
        format!("lift decomposition within {} h^2", tol.lift_constant),
        lift_gap <= tol.lift_constant * h * h,
    );

    let prof = local_zygmund_profile(&d.solution.p, 0.5)?;
    out.write_csv(&format!("zygmund_disk_0.25_{n}.csv"), &prof.to_csv())?;
    rec.measure("second_difference_exponent[gamma=0.25]", prof.fit.slope, "local_zygmund_profile fit");
    rec.check(
        format!("second-difference exponent >= 0.5 - {} [gamma=0.25]", tol.slope_margin),
        prof.fit.slope >= 0.5 - tol.slope_margin,
    );

    let (j_half, ladder): (u32, [usize; 3]) = if cfg.quick { (4, [64, 128, 256]) } else { (5, [128, 256, 512]) };
    let mut quotients = Vec::new();
    for &n in &ladder {
        let d = lacunary_disk_solve(0.5, j_half, seed, n)?;
        let prof = local_zygmund_profile(&d.solution.p, 0.5)?;
        out.write_csv(&format!("zygmund_disk_0.5_{n}.csv"), &prof.to_csv())?;
        rec.measure(format!("max_quotient[gamma=0.5,n={n}]"), prof.max_quotient(), "local_zygmund_profile");
        quotients.push(prof.max_quotient());
    }
    let growth = quotients.iter().cloned().fold(0.0, f64::max) / quotients[0];
    rec.measure("quotient_growth[gamma=0.5]", growth, "max over refinement / coarsest max quotient");
    rec.check(
        format!("quotient supremum grows <= {}x under refinement [gamma=0.5]", tol.quotient_growth),
        growth <= tol.quotient_growth,
    );
    Ok(())
}

// A10: two reruns of the selected criteria in quick mode must write
// byte-identical CSV files.
fn a10_determinism(
    cfg: &ExperimentConfig,
    selection: &[&str],
    _out: &mut Outputs,
    rec: &mut CriterionRecord,
) -> Result<()> {
    let quick = cfg.quick_variant();
    let ids: Vec<&str> = selection.iter().copied().filter(|&id| id != "A10").collect();
    if ids.is_empty() {
        return Err(Error::Config("determinism check needs at least one other criterion".into()));
    }
    let base = cfg.output_dir.join("determinism");
    let mut runs = Vec::new();
    for tag in ["run_a", "run_b"] {
        let mut c = quick.clone();
        c.output_dir = base.join(tag);
        runs.push(run_suite(&c, &ids)?);
    }
    let files_a = csv_contents(&runs[0].csv, &base.join("run_a"))?;
    let files_b = csv_contents(&runs[1].csv, &base.join("run_b"))?;
    let mismatched = files_a
        .iter()
        .filter(|(name, bytes)| files_b.get(*name) != Some(bytes))
        .count()
        + files_b.keys().filter(|k| !files_a.contains_key(*k)).count();
    rec.measure("csv_files", files_a.len() as f64, "quick-mode reruns of the suite");
    rec.measure("mismatched_files", mismatched as f64, "byte comparison");
    rec.check("two runs write byte-identical CSV files", mismatched == 0 && !files_a.is_empty());
    Ok(())
}

fn csv_contents(paths: &[PathBuf], root: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut m = BTreeMap::new();
    for p in paths {
        let name = p.strip_prefix(root).unwrap_or(p).display().to_string();
        m.insert(name, fs::read(p)?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejection_names_the_field() {
        let e = ExperimentConfig::from_json(r#"{"gamma_list": [0.25, 0.7]}"#).unwrap_err();
        assert!(e.to_string().contains("gamma_list[1]"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"tolerances": {"jump": "small"}}"#).unwrap_err();
        assert!(e.to_string().contains("tolerances.jump"), "{e}");
    }

    #[test]
    fn module_filter() {
        assert_eq!(criteria_for("symbols").unwrap(), vec!["A8"]);
        assert!(criteria_for("plotting").is_err());
    }
}
