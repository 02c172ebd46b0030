use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CliError, ProjectConfig};
use crate::control::{structure, GainSchedule};
use crate::designer::{
    integrated_design_warm, phase_one_schedule, two_phase_design, two_phase_design_warm, DesignContext, DesignMode, DesignResult,
    DesignSpec,
};
use crate::loop_analysis::{bode, margins, BodePoint, LoopFilter, LoopModel, MarginReport};

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub order: Option<u8>,
    pub subcase: Option<u8>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub peak_window: Option<f64>,
    pub strict_eq12: bool,
}

impl RunOptions {
    fn spec(&self, cfg: &ProjectConfig) -> Result<DesignSpec, CliError> {
        let mut spec = cfg.design.clone();
        if let Some(o) = self.order {
            spec.filter_order = o;
        }
        if let Some(s) = self.subcase {
            spec.subcase = s;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(w) = self.peak_window {
            spec.peak_window = w;
        }
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    fn context(&self, cfg: &ProjectConfig) -> Result<DesignContext, CliError> {
        let mut ctx = cfg.context()?;
        ctx.plant.strict_eq12 = self.strict_eq12;
        Ok(ctx)
    }

    fn out_dir(&self, cfg: &ProjectConfig) -> Result<PathBuf, CliError> {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir)
    }
}

/// One entry of `margins.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMargins {
    /// Index into the flight-node sequence.
    pub node: usize,
    /// Flight time, s.
    pub t: f64,
    pub k_p: f64,
    #[serde(rename = "k_D")]
    pub k_d: f64,
    #[serde(flatten)]
    pub report: MarginReport,
}

/// `margins.json`: margins and peaks at every analysed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginsFile {
    /// `"phase-one"` (unity filter) or the mode of the analysed design.
    pub controller: String,
    pub filter_order: Option<u8>,
    pub nodes: Vec<NodeMargins>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOutput {
    pub margins: MarginsFile,
    pub files: Vec<PathBuf>,
}

/// One row of `fig9_table.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub order: u8,
    #[serde(rename = "two_phase_dB")]
    pub two_phase_db: f64,
    #[serde(rename = "subcase1_dB")]
    pub subcase1_db: f64,
    #[serde(rename = "subcase2_dB")]
    pub subcase2_db: f64,
    /// Two-phase minus Subcase 1, dB.
    #[serde(rename = "improvement1_dB")]
    pub improvement1_db: f64,
    /// Two-phase minus Subcase 2, dB.
    #[serde(rename = "improvement2_dB")]
    pub improvement2_db: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

/// Pretty JSON with keys sorted at every level.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let v = serde_json::to_value(value).map_err(|e| io_err(path, e))?;
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| io_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_design(path: &Path) -> Result<DesignResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_bode(path: &Path, pts: &[BodePoint]) -> Result<(), CliError> {
    write_csv(
        path,
        &["omega_rad_s", "mag_dB", "phase_deg"],
        pts.iter().map(|p| vec![p.omega_rad_s, p.mag_db, p.phase_deg]),
    )
}

/// Bode tables and margins of every check node.
///
/// Without a design the loop uses the Phase-1 gain schedule and no filter.
pub fn analyze(cfg: &ProjectConfig, opts: &RunOptions, design: Option<&DesignResult>) -> Result<AnalyzeOutput, CliError> {
    let ctx = opts.context(cfg)?;
    let spec = opts.spec(cfg)?;
    let dir = opts.out_dir(cfg)?;
    let (schedule, filter, check, controller, order): (GainSchedule, LoopFilter, Vec<usize>, String, Option<u8>) =
        match design {
            Some(d) => {
                d.schedule.validate().map_err(|e| CliError::Config(format!("design schedule: {e}")))?;
                d.filter.validate().map_err(|e| CliError::Config(format!("design filter: {e}")))?;
                (
                    d.schedule.clone(),
                    LoopFilter::Params(d.filter.clone()),
                    d.check_nodes.clone(),
                    d.mode.label().to_string(),
                    Some(d.filter_order),
                )
            }
            None => (
                phase_one_schedule(&ctx, &spec)?,
                LoopFilter::Unity,
                spec.check_nodes.clone().unwrap_or_else(|| (0..ctx.nodes.len()).collect()),
                "phase-one".to_string(),
                None,
            ),
        };
    if let Some(&i) = check.iter().find(|&&i| i >= ctx.nodes.len()) {
        return Err(CliError::Config(format!(
            "check node {i} out of range ({} flight nodes)",
            ctx.nodes.len()
        )));
    }

    let per_node = check
        .par_iter()
        .map(|&i| {
            let node = &ctx.nodes[i];
            let g = schedule.interpolate(node.t);
            let m = LoopModel::for_node(node, &ctx.blocks, g.kp, g.kd, filter.clone(), ctx.plant)?;
            let table = bode(&m, &ctx.grid)?;
            let report = margins(&m, &ctx.grid)?;
            Ok((
                table,
                NodeMargins {
                    node: i,
                    t: node.t,
                    k_p: g.kp,
                    k_d: g.kd,
                    report,
                },
            ))
        })
        .collect::<Result<Vec<_>, crate::loop_analysis::LoopError>>()?;

    let mut files = Vec::with_capacity(per_node.len() + 1);
    let mut nodes = Vec::with_capacity(per_node.len());
    for (table, nm) in per_node {
        let path = dir.join(format!("bode_node_{}.csv", nm.node));
        write_bode(&path, &table)?;
        files.push(path);
        nodes.push(nm);
    }
    let margins = MarginsFile {
        controller,
        filter_order: order,
        nodes,
    };
    let path = dir.join("margins.json");
    write_json(&path, &margins)?;
    files.push(path);
    Ok(AnalyzeOutput { margins, files })
}

/// Run one design; integrated designs are warm-started from the two-phase
/// result, and Subcase 2 also from Subcase 1.
fn run_design(ctx: &DesignContext, spec: &DesignSpec, mode: DesignMode) -> Result<DesignResult, CliError> {
    let tp = two_phase_design(ctx, spec)?;
    if mode == DesignMode::TwoPhase {
        return Ok(tp);
    }
    let s1_spec = DesignSpec {
        subcase: 1,
        ..spec.clone()
    };
    let s1 = integrated_design_warm(ctx, &s1_spec, &tp, None)?;
    if spec.subcase == 1 {
        return Ok(s1);
    }
    Ok(integrated_design_warm(ctx, spec, &tp, Some(&s1))?)
}

fn design_file_name(d: &DesignResult) -> String {
    format!("design_{}_{}.json", d.mode.label(), d.filter_order)
}

/// Design one controller and write its JSON, gain table and filter Bode table.
pub fn design(cfg: &ProjectConfig, opts: &RunOptions, mode: DesignMode) -> Result<(DesignResult, Vec<PathBuf>), CliError> {
    let ctx = opts.context(cfg)?;
    let spec = opts.spec(cfg)?;
    let dir = opts.out_dir(cfg)?;
    let d = run_design(&ctx, &spec, mode)?;

    let json = dir.join(design_file_name(&d));
    write_json(&json, &d)?;

    let gains = dir.join("gains.csv");
    write_csv(
        &gains,
        &["t", "k_p", "k_D"],
        ctx.nodes.iter().map(|n| {
            let g = d.schedule.interpolate(n.t);
            vec![n.t, g.kp, g.kd]
        }),
    )?;

    let fb = dir.join("filter_bode.csv");
    write_bode(&fb, &bode(&d.filter.to_tf(), &ctx.grid)?)?;
    Ok((d, vec![json, gains, fb]))
}

/// Two-phase, Subcase 1 and Subcase 2 designs for filter orders 2 to 6.
///
/// Orders run in sequence; the two-phase and Subcase 1 searches of each
/// order get an extra start at the best nested lower-order result.
pub fn compare(cfg: &ProjectConfig, opts: &RunOptions) -> Result<(Vec<CompareRow>, Vec<PathBuf>), CliError> {
    let ctx = opts.context(cfg)?;
    let base = opts.spec(cfg)?;
    let dir = opts.out_dir(cfg)?;

    let mut designs: Vec<[DesignResult; 3]> = Vec::new();
    for order in 2u8..=6 {
        let spec = DesignSpec {
            filter_order: order,
            subcase: 1,
            ..base.clone()
        };
        let lower = |k: usize| {
            designs
                .iter()
                .map(|d| &d[k])
                .filter(|d| nested(d.filter_order, order))
                .min_by(|a, b| a.objective_db.total_cmp(&b.objective_db))
        };
        let tp = two_phase_design_warm(&ctx, &spec, lower(0).map(|d| &d.filter))?;
        let s1 = integrated_design_warm(&ctx, &spec, &tp, lower(1))?;
        let s2_spec = DesignSpec { subcase: 2, ..spec };
        let s2 = integrated_design_warm(&ctx, &s2_spec, &tp, Some(&s1))?;
        designs.push([tp, s1, s2]);
    }

    let mut files = Vec::new();
    let mut rows = Vec::with_capacity(designs.len());
    for [tp, s1, s2] in &designs {
        for (d, tag) in [(tp, "two-phase"), (s1, "integrated-s1"), (s2, "integrated-s2")] {
            let path = dir.join(format!("design_{tag}_{}.json", d.filter_order));
            write_json(&path, d)?;
            files.push(path);
        }
        rows.push(CompareRow {
            order: tp.filter_order,
            two_phase_db: tp.objective_db,
            subcase1_db: s1.objective_db,
            subcase2_db: s2.objective_db,
            improvement1_db: tp.objective_db - s1.objective_db,
            improvement2_db: tp.objective_db - s2.objective_db,
        });
    }
    let table = dir.join("fig9_table.csv");
    let mut w = csv::Writer::from_path(&table).map_err(|e| io_err(&table, e))?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_err(&table, e))?;
    }
    w.flush().map_err(|e| io_err(&table, e))?;
    files.push(table);
    Ok((rows, files))
}

/// Whether an order-`from` filter is a special case of an order-`to` one.
fn nested(from: u8, to: u8) -> bool {
    match (structure(from), structure(to)) {
        (Ok((q0, r0)), Ok((q1, r1))) => from < to && q0 <= q1 && r0 <= r1,
        _ => false,
    }
}
