//! `run_experiment`: per grid point and seed, sample `H` and run every
//! enabled stage, writing one file per stage.

use std::fs;
use std::path::{Path, PathBuf};

use giantwalk_core::giant::{apoh_report, sample_giant, ApohReport, GiantSample, ModelParams, SampleStats};
use giantwalk_core::gff::{estimate_m, MEstimate};
use giantwalk_core::gw::CensusConstants;
use giantwalk_core::resistance::{max_resistance_estimate, MaxResistanceEstimate};
use giantwalk_core::seed::{derive_seed, rng_from_seed};
use giantwalk_core::skeleton::{
    build_hierarchy, dyadic_k2_pairs, validate_hierarchy, verify_budgets_for, BudgetReport, PropertyReport,
};
use giantwalk_core::walk::{cover_report, predict_cover, simulate_cover, start_panel, CoverTimeReport, PredictorConstants};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

pub const GIT_DESCRIBE: &str = env!("GIANTWALK_GIT_DESCRIBE");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage} failed at grid point {grid}, seed {seed_index}: {message}")]
    StageFailed { stage: &'static str, grid: usize, seed_index: usize, message: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Provenance stamped on every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub n: u64,
    pub eps: f64,
    pub mu: f64,
    pub big_n: f64,
    pub grid: usize,
    pub seed_index: usize,
    pub master_seed: u64,
    pub sample_seed: u64,
    pub git: String,
    pub config: String,
}

impl Header {
    pub fn comment_line(&self) -> String {
        format!(
            "# n={} eps={} mu={} N={} grid={} seed_index={} master_seed={} sample_seed={} git={} config={}",
            self.n,
            self.eps,
            self.mu,
            self.big_n,
            self.grid,
            self.seed_index,
            self.master_seed,
            self.sample_seed,
            self.git,
            self.config
        )
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    header: &'a Header,
    data: T,
}

#[derive(Serialize)]
struct ApohOutput<'a> {
    report: ApohReport,
    stats: &'a SampleStats,
    vertices: usize,
    edges: usize,
    cap_hits: usize,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct GffOutput<'a> {
    estimate: &'a MEstimate,
    /// `M √(2ε) / ln N`.
    headline_ratio: f64,
}

#[derive(Serialize)]
struct SkeletonOutput {
    kappa: u32,
    l0: u32,
    properties: PropertyReport,
    properties_ok: bool,
    budgets: BudgetReport,
    dyadic_sizes: Vec<usize>,
    dyadic_bounds: Vec<f64>,
    dyadic_bound_violations: usize,
    dyadic_i0_non_edges: usize,
    dyadic_walk_violations: usize,
    dyadic_distance_violations: usize,
}

/// Files written for one `(grid point, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

pub fn cell_dir(out: &Path, grid: usize, seed_index: usize) -> PathBuf {
    out.join(format!("p{grid:02}-s{seed_index:02}"))
}

fn write(path: PathBuf, body: &[u8], files: &mut Vec<PathBuf>) -> Result<(), ExperimentError> {
    fs::write(&path, body).map_err(|source| ExperimentError::Io { path: path.clone(), source })?;
    files.push(path);
    Ok(())
}

fn json<T: Serialize>(header: &Header, data: T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&Stamped { header, data }).expect("outputs serialize");
    v.push(b'\n');
    v
}

/// Runs every enabled stage for every grid point and seed. Files of stages
/// that completed before a failure are left in place.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellOutput>, ExperimentError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut cells = Vec::new();
    for (gi, &(n, eps)) in cfg.grid().iter().enumerate() {
        for si in 0..cfg.seeds {
            cells.push(run_cell(cfg, &hash, gi, si, n, eps)?);
        }
    }
    Ok(cells)
}

fn run_cell(
    cfg: &ExperimentConfig,
    hash: &str,
    gi: usize,
    si: usize,
    n: u64,
    eps: f64,
) -> Result<CellOutput, ExperimentError> {
    let fail = |stage: &'static str| {
        move |e: &dyn std::fmt::Display| ExperimentError::StageFailed {
            stage,
            grid: gi,
            seed_index: si,
            message: e.to_string(),
        }
    };
    let params = ModelParams::new(n, eps).map_err(|e| fail("gen")(&e))?;
    let sample_seed = derive_seed(cfg.seed, "sample", gi as u64, si as u64);
    let header = Header {
        n,
        eps,
        mu: params.mu,
        big_n: params.big_n,
        grid: gi,
        seed_index: si,
        master_seed: cfg.seed,
        sample_seed,
        git: GIT_DESCRIBE.to_string(),
        config: hash.to_string(),
    };
    let dir = cell_dir(&cfg.out, gi, si);
    fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io { path: dir.clone(), source })?;
    let mut files = Vec::new();
    let stage_seed = |stage: &str| derive_seed(cfg.seed, stage, gi as u64, si as u64);

    let gs = sample_giant(&params, sample_seed).map_err(|e| fail("gen")(&e))?;
    let st = &cfg.stages;
    if st.gen {
        write(dir.join("h.graph"), graph_text(&gs, &header).as_bytes(), &mut files)?;
    }
    if st.apoh {
        let out = ApohOutput {
            report: apoh_report(&gs, cfg.constants.gamma, &CensusConstants::default()),
            stats: &gs.stats,
            vertices: gs.graph.vertex_count(),
            edges: gs.graph.edge_count(),
            cap_hits: gs.cap_hits,
            warnings: &gs.warnings,
        };
        write(dir.join("apoh.json"), &json(&header, out), &mut files)?;
    }
    let mut resist = None;
    if st.resist {
        let mut rng = rng_from_seed(stage_seed("resist"));
        let est = max_resistance_estimate(&gs, cfg.replicas.resistance_pairs, &mut rng)
            .map_err(|e| fail("resist")(&e))?;
        write(dir.join("resistance.csv"), resistance_csv(&est, &header).as_bytes(), &mut files)?;
        resist = Some(est);
    }
    let mut m = None;
    if st.gff {
        let est = estimate_m(&gs.graph, 0, cfg.replicas.gff, stage_seed("gff")).map_err(|e| fail("gff")(&e))?;
        let ln_n = params.big_n.ln() / cfg.constants.ln_base();
        let out = GffOutput { estimate: &est, headline_ratio: est.mean * (2.0 * eps).sqrt() / ln_n };
        write(dir.join("gff.json"), &json(&header, out), &mut files)?;
        m = Some(est);
    }
    if st.cover {
        let report = cover_stage(cfg, &gs, m.as_ref(), resist.as_ref(), stage_seed("cover"))
            .map_err(|e| fail("cover")(&e))?;
        write(dir.join("cover.json"), &json(&header, report), &mut files)?;
    }
    if st.skeleton {
        let out = skeleton_stage(&gs).map_err(|e| fail("skeleton")(&e))?;
        write(dir.join("skeleton.json"), &json(&header, out), &mut files)?;
    }
    Ok(CellOutput { dir, files })
}

fn graph_text(gs: &GiantSample, header: &Header) -> String {
    let text = gs.graph.to_text();
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    format!("{first}\n{}\n{rest}", header.comment_line())
}

fn resistance_csv(est: &MaxResistanceEstimate, header: &Header) -> String {
    let mut s = header.comment_line();
    s.push_str("\ngraph,v,w,dist,reff,scaled,pairs_evaluated,distance_violations\n");
    for (name, p, scaled) in [("k2", &est.k2, est.k2_scaled), ("h", &est.h, est.h_scaled)] {
        s.push_str(&format!(
            "{name},{},{},{},{},{},{},{}\n",
            p.v, p.w, p.dist, p.reff, scaled, est.pairs_evaluated, est.distance_violations
        ));
    }
    s
}

#[derive(Serialize)]
struct CoverOutput {
    starts: Vec<(usize, u32)>,
    /// Present when both the field maximum and a resistance were measured.
    report: Option<CoverTimeReport>,
    means: Vec<f64>,
    cover: f64,
}

fn cover_stage(
    cfg: &ExperimentConfig,
    gs: &GiantSample,
    m: Option<&MEstimate>,
    resist: Option<&MaxResistanceEstimate>,
    seed: u64,
) -> Result<CoverOutput, giantwalk_core::walk::WalkError> {
    let mut rng = rng_from_seed(seed);
    let mut panel = start_panel(gs, 0, &mut rng);
    panel.truncate(cfg.replicas.cover_starts);
    let estimates = panel
        .iter()
        .map(|&s| simulate_cover(&gs.graph, s, cfg.replicas.cover, seed, None))
        .collect::<Result<Vec<_>, _>>()?;
    let means: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let cover = means.iter().copied().fold(0.0, f64::max);
    let starts = panel.iter().map(|&s| (s, gs.depth[s])).collect();
    let report = match (m, resist) {
        (Some(m), Some(r)) => {
            let c = &cfg.constants;
            let mut predictors = predict_cover(
                &gs.params,
                gs.graph.vertex_count(),
                gs.graph.edge_count(),
                m.mean,
                r.h.reff,
                &PredictorConstants { c1: c.c1, c2: c.c2 },
                &c.lambda,
            );
            predictors.headline /= c.ln_base().powi(2);
            Some(cover_report(estimates, predictors))
        }
        _ => None,
    };
    Ok(CoverOutput { starts, report, means, cover })
}

fn skeleton_stage(gs: &GiantSample) -> Result<SkeletonOutput, giantwalk_core::skeleton::SkeletonError> {
    let h = build_hierarchy(gs)?;
    let properties = validate_hierarchy(gs, &h)?;
    let budgets = verify_budgets_for(&h, &gs.params)?;
    let d = dyadic_k2_pairs(gs)?;
    Ok(SkeletonOutput {
        kappa: h.kappa,
        l0: h.l0,
        properties_ok: properties.ok(),
        properties,
        budgets,
        dyadic_sizes: d.sets.iter().map(Vec::len).collect(),
        dyadic_bounds: d.bounds,
        dyadic_bound_violations: d.bound_violations,
        dyadic_i0_non_edges: d.i0_non_edges,
        dyadic_walk_violations: d.walk_violations,
        dyadic_distance_violations: d.distance_violations,
    })
}
