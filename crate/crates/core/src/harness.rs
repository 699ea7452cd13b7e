//! Experiment orchestration: input loading, seeded stages, audits and reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::combine::{verify_combine, CombineConfig, CombineStatus, Combiner};
use crate::complex::{ComplexFile, PureComplex, Vertex};
use crate::covers::{
    build_cover, connected_components, holonomy_subgroup, link_spectra_gap, push_cocycle, pushforward_error,
    verify_cover, TreeKind,
};
use crate::groups::{
    cayley_clique_complex, normal_subgroups, quotient_group, scan_gensets, Elem, GenSet, GroupSpec, GroupTable,
};
use crate::pruning::{face_fractions, PruneConfig, PruneStatus, Pruner};
use crate::sparsify::{
    bipartite_circulant, complete_graph, random_offsets, sparsify_trial, subsample_csv, subsample_trials, trials_csv,
};
use crate::spectral::{adjacency_spectrum, is_hdx, link_spectrum, spectra_csv, trickle_down, HdxMode, WGraph};

// ---------------------------------------------------------------- seeds

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Per-stage seed: the stage name hashed into the master seed.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    splitmix64(fnv1a(stage) ^ master)
}

pub fn stage_rng(master: u64, stage: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stage_seed(master, stage))
}

// ---------------------------------------------------------------- errors and I/O

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("stage {stage}: {msg}")]
    Stage { stage: String, msg: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Stage { .. } => 3,
            _ => 4,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Input(e.to_string())
}

fn stage<E: std::fmt::Display>(name: &str) -> impl Fn(E) -> HarnessError + '_ {
    move |e| HarnessError::Stage { stage: name.to_string(), msg: e.to_string() }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: p.clone(), msg: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse { path: p, msg: e.to_string() })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io { path: dir.display().to_string(), msg: e.to_string() })?;
    }
    std::fs::write(path, text).map_err(|e| HarnessError::Io { path: path.display().to_string(), msg: e.to_string() })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn load_complex(path: &Path) -> Result<PureComplex, HarnessError> {
    let f: ComplexFile = read_json(path)?;
    f.into_complex().map_err(|e| HarnessError::Parse { path: path.display().to_string(), msg: e.to_string() })
}

pub fn load_group(path: &Path) -> Result<GroupTable, HarnessError> {
    let spec: GroupSpec = read_json(path)?;
    spec.build().map_err(|e| HarnessError::Parse { path: path.display().to_string(), msg: e.to_string() })
}

pub fn load_genset(path: &Path, g: &GroupTable) -> Result<GenSet, HarnessError> {
    let gens: Vec<Elem> = read_json(path)?;
    GenSet::new(g, &gens).map_err(|e| HarnessError::Parse { path: path.display().to_string(), msg: e.to_string() })
}

/// Graph JSON: `{"edges": [[u, v, w], ...], "left": [...]}`; a complex file is
/// read as its 1-skeleton.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub edges: Vec<(Vertex, Vertex, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<Vertex>>,
}

pub fn load_graph(path: &Path) -> Result<WGraph, HarnessError> {
    let p = path.display().to_string();
    let v: Value = read_json(path)?;
    let parse = |msg: String| HarnessError::Parse { path: p.clone(), msg };
    if v.get("dim").is_some() {
        let f: ComplexFile = serde_json::from_value(v).map_err(|e| parse(e.to_string()))?;
        let x = f.into_complex().map_err(|e| parse(e.to_string()))?;
        return x.one_skeleton().map_err(|e| parse(e.to_string()));
    }
    let f: GraphFile = serde_json::from_value(v).map_err(|e| parse(e.to_string()))?;
    let g = WGraph::from_edges(&f.edges).map_err(|e| parse(e.to_string()))?;
    match f.left {
        Some(l) => g.with_left_side(&l).map_err(|e| parse(e.to_string())),
        None => Ok(g),
    }
}

// ---------------------------------------------------------------- specs

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ComplexSource {
    Complete { n: usize, d: usize },
    Path(PathBuf),
    Inline(ComplexFile),
}

impl ComplexSource {
    pub fn load(&self) -> Result<PureComplex, HarnessError> {
        match self {
            ComplexSource::Complete { n, d } => PureComplex::complete(*n, *d).map_err(input),
            ComplexSource::Path(p) => load_complex(p),
            ComplexSource::Inline(f) => f.clone().into_complex().map_err(input),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Complete { n: u32 },
    /// `n + n` bipartite circulant with `degree` seeded offsets
    Circulant { n: u32, degree: usize, seed: u64 },
    Path(PathBuf),
}

impl GraphSource {
    pub fn load(&self) -> Result<WGraph, HarnessError> {
        match self {
            GraphSource::Complete { n } if *n >= 2 => Ok(complete_graph(*n)),
            GraphSource::Complete { n } => Err(HarnessError::Input(format!("K_{n} has no edges"))),
            GraphSource::Circulant { n, degree, seed } if *degree >= 1 && *degree <= *n as usize => {
                Ok(bipartite_circulant(*n, &random_offsets(*n, *degree, *seed)))
            }
            GraphSource::Circulant { .. } => Err(HarnessError::Input("circulant degree out of range".into())),
            GraphSource::Path(p) => load_graph(p),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PruneSpec {
    pub complex: ComplexSource,
    pub group: GroupSpec,
    pub genset: Vec<Elem>,
    pub config: PruneConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoverFamilySpec {
    #[serde(flatten)]
    pub prune: PruneSpec,
    /// largest quotient order to build
    pub max_index: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SparsifySpec {
    pub graph: GraphSource,
    /// `None`: subsample the (bipartite) input directly
    #[serde(default)]
    pub p_split: Option<f64>,
    pub p_edge: f64,
    pub trials: usize,
    pub epsilon: f64,
    /// required share of trials with `λ(H) ≤ 100λ(G)/p³`
    pub h_bound_rate: f64,
    /// optional `(threshold, required share)` for `λ(H')`
    #[serde(default)]
    pub h_prime_threshold: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CombineSpec {
    pub complex: ComplexSource,
    pub target: ComplexSource,
    pub config: CombineConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScanSpec {
    pub group: GroupSpec,
    pub d: usize,
    pub max_size: usize,
    pub eta_target: f64,
    pub max_candidates: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "pipeline", rename_all = "kebab-case")]
pub enum Pipeline {
    Prune(PruneSpec),
    CoverFamily(CoverFamilySpec),
    Sparsify(SparsifySpec),
    Combine(CombineSpec),
    Scan(ScanSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(flatten)]
    pub pipeline: Pipeline,
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Clean,
    BudgetExhausted,
    AuditFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Clean => 0,
            RunStatus::BudgetExhausted => 2,
            RunStatus::AuditFailure => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Audit {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Audit {
    fn new(name: &str, pass: bool, value: Option<f64>, witness: Option<String>) -> Self {
        Audit { name: name.into(), pass, value, witness }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StageReport {
    pub name: String,
    pub seed: u64,
    pub result: Value,
}

/// Everything but wall times, so equal specs give equal bytes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub spec: ExperimentSpec,
    pub stages: Vec<StageReport>,
    pub audits: Vec<Audit>,
    pub status: RunStatus,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

/// Extra files: `(name, contents)`.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

pub struct Run {
    pub report: RunReport,
    pub artifacts: Artifacts,
    pub timings: Timings,
}

struct Ctx {
    seed: u64,
    stages: Vec<StageReport>,
    audits: Vec<Audit>,
    artifacts: Artifacts,
    timings: Timings,
}

impl Ctx {
    fn new(seed: u64) -> Self {
        Ctx { seed, stages: vec![], audits: vec![], artifacts: Artifacts::default(), timings: Timings::default() }
    }
    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut ChaCha8Rng) -> T) -> T {
        let mut rng = stage_rng(self.seed, name);
        let t0 = Instant::now();
        let out = f(&mut rng);
        self.timings.stages.push((name.to_string(), t0.elapsed().as_secs_f64()));
        out
    }
    fn stage(&mut self, name: &str, result: Value) {
        self.stages.push(StageReport { name: name.into(), seed: stage_seed(self.seed, name), result });
    }
    fn audit(&mut self, a: Audit) {
        self.audits.push(a);
    }
    fn file(&mut self, name: &str, contents: String) {
        self.artifacts.files.push((name.into(), contents));
    }
    fn finish(self, spec: &ExperimentSpec, budget: bool) -> Run {
        let status = if budget {
            RunStatus::BudgetExhausted
        } else if self.audits.iter().all(|a| a.pass) {
            RunStatus::Clean
        } else {
            RunStatus::AuditFailure
        };
        Run {
            report: RunReport { spec: spec.clone(), stages: self.stages, audits: self.audits, status },
            artifacts: self.artifacts,
            timings: self.timings,
        }
    }
}

fn lambda_series(links: &[crate::spectral::LinkSpectrum]) -> String {
    let mut v: Vec<f64> = links.iter().map(|l| l.value).collect();
    v.sort_by(f64::total_cmp);
    let mut s = String::from("# rank lambda\n");
    for (i, x) in v.iter().enumerate() {
        s.push_str(&format!("{i} {x:.12}\n"));
    }
    s
}

// ---------------------------------------------------------------- pipelines

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Run, HarnessError> {
    match &spec.pipeline {
        Pipeline::Prune(p) => run_prune(spec, p, None),
        Pipeline::CoverFamily(c) => run_prune(spec, &c.prune, Some(c.max_index)),
        Pipeline::Sparsify(s) => run_sparsify(spec, s),
        Pipeline::Combine(c) => run_combine(spec, c),
        Pipeline::Scan(s) => run_scan(spec, s),
    }
}

fn run_prune(spec: &ExperimentSpec, p: &PruneSpec, family: Option<usize>) -> Result<Run, HarnessError> {
    // validate everything before computing
    let x = p.complex.load()?;
    let g = p.group.build().map_err(input)?;
    let s = GenSet::new(&g, &p.genset).map_err(input)?;
    let pruner = Pruner::new(&x, &g, &s).map_err(input)?;
    let cfg = &p.config;
    if !(cfg.r > 1.0 && cfg.lambda > 0.0 && cfg.lambda < 1.0 && cfg.max_resamples >= 1) {
        return Err(HarnessError::Input("need r > 1, 0 < lambda < 1, max_resamples >= 1".into()));
    }
    let mut ctx = Ctx::new(spec.seed);

    let suit = ctx.timed("suitability", |_| crate::complex::check_suitable(&x, cfg.c, cfg.r, cfg.eta));
    ctx.stage("suitability", json!({ "report": suit, "pass": suit.pass() }));

    let out = ctx.timed("prune", |rng| pruner.moser_tardos(cfg, rng));
    ctx.stage("prune", serde_json::to_value(&out).expect("serializable"));
    if out.status == PruneStatus::BudgetExhausted {
        return Ok(ctx.finish(spec, true));
    }
    let Some(y) = out.y.clone() else {
        ctx.audit(Audit::new("nonempty_pruning", false, None, None));
        return Ok(ctx.finish(spec, false));
    };
    let f = &out.labeling;
    let d = x.dim();
    let m = s.len();

    let t0 = Instant::now();
    ctx.audit(Audit::new(
        "events_clean",
        pruner.first_violated(f, cfg).is_none(),
        None,
        pruner.first_violated(f, cfg).map(|e| format!("{:?} {:?}", e.kind, e.face)),
    ));
    let hdx = is_hdx(&y, cfg.lambda, HdxMode::TwoSided);
    let worst = hdx.worst.clone();
    ctx.audit(Audit::new(
        "hdx",
        hdx.pass,
        worst.as_ref().map(|w| w.value),
        worst.as_ref().map(|w| crate::spectral::face_id(&w.face)),
    ));
    ctx.file("spectra.csv", spectra_csv(&hdx.links));
    ctx.file("lambda_dist.dat", lambda_series(&hdx.links));

    let ff = face_fractions(&x, &y, m);
    let floor = (1.0 / (2.0 * (m as f64).powi(d as i32))).powi(d as i32);
    let ff_bad = ff.iter().find(|r| !r.ok || r.fraction < floor);
    ctx.audit(Audit::new(
        "face_fraction",
        ff_bad.is_none(),
        ff.iter().map(|r| r.fraction).reduce(f64::min),
        ff_bad.map(|r| format!("level {}", r.level)),
    ));

    let mut skel_bad = None;
    for l in 0..=d - 2 {
        for sigma in y.faces(l) {
            let ys = y.link_skeleton(sigma).map_err(stage("audit"))?;
            let same = match pruner.satisfaction_graph(f, sigma) {
                Ok(sg) => {
                    let mut a: Vec<_> = ys.edge_weights_by_label().iter().map(|e| (e.0, e.1)).collect();
                    let mut b: Vec<_> = sg.graph.edge_weights_by_label().iter().map(|e| (e.0, e.1)).collect();
                    a.sort_unstable();
                    b.sort_unstable();
                    a == b && ys.labels() == sg.graph.labels()
                }
                Err(_) => false,
            };
            if !same && skel_bad.is_none() {
                skel_bad = Some(crate::spectral::face_id(sigma));
            }
        }
    }
    ctx.audit(Audit::new("skeleton_equals_satisfaction", skel_bad.is_none(), None, skel_bad));

    let w_total: Option<f64> = out.y_weights.as_ref().map(|w| w.iter().sum());
    ctx.audit(Audit::new(
        "pruned_measure_total",
        w_total.is_some_and(|t| (t - 1.0).abs() <= 1e-9),
        w_total,
        out.unmeasurable.as_ref().map(|u| format!("{u:?}")),
    ));
    let ratio = pruner.measure_ratio_audit_all(f, &y).map_err(stage("audit"))?;
    let ratio_bound = cfg.r.powi(15 * d as i32);
    ctx.audit(Audit::new("measure_ratio", ratio <= ratio_bound, Some(ratio), None));

    let gl = pruner.restrict_labeling(f, &y);
    ctx.file("pruned.json", to_json(&y.to_file()));
    ctx.file("labeling.json", to_json(&gl.labels));
    let v0 = y.vertices()[0];
    let h_bfs = holonomy_subgroup(&y, &g, &gl, v0, TreeKind::Bfs).map_err(stage("audit"))?;
    let h_dfs = holonomy_subgroup(&y, &g, &gl, v0, TreeKind::Dfs).map_err(stage("audit"))?;
    ctx.audit(Audit::new(
        "holonomy_full",
        h_bfs.len() == g.order() && h_bfs == h_dfs,
        Some(h_bfs.len() as f64),
        None,
    ));
    let cover = build_cover(&y, &g, &gl).map_err(stage("audit"))?;
    let (comps, _) = connected_components(&cover.complex);
    ctx.audit(Audit::new("cover_connected", comps == 1 && comps == g.order() / h_bfs.len(), Some(comps as f64), None));
    let vr = verify_cover(&cover.complex, &y, &|v| cover.phi(v));
    ctx.audit(Audit::new(
        "cover_verified",
        vr.pass,
        Some(vr.faces_checked as f64),
        vr.violations.first().map(|f| format!("{f:?}")),
    ));
    let pf = pushforward_error(&cover, &y);
    ctx.audit(Audit::new("pushforward", pf <= 1e-12, Some(pf), None));
    let gap = link_spectra_gap(&cover, &y);
    ctx.audit(Audit::new("inherited_spectra", gap <= 1e-9, Some(gap), None));
    let td = trickle_down(&y);
    ctx.audit(Audit::new("trickle_down", td.holds, Some(td.checks.len() as f64), None));
    ctx.timings.stages.push(("audit".into(), t0.elapsed().as_secs_f64()));
    ctx.stage(
        "audit",
        json!({
            "face_fractions": ff,
            "holonomy_order": h_bfs.len(),
            "cover_vertices": cover.complex.num_vertices(),
            "measure_ratio_bound": ratio_bound,
            "trickle_down": td,
        }),
    );

    if let Some(max_index) = family {
        let t0 = Instant::now();
        let mut quotients: Vec<(Vec<Elem>, GroupTable, Vec<Elem>)> = normal_subgroups(&g)
            .into_iter()
            .filter(|n| g.order() / n.len() <= max_index)
            .map(|n| {
                let (q, proj) = quotient_group(&g, &n).expect("normal");
                (n, q, proj)
            })
            .collect();
        quotients.sort_by_key(|(_, q, _)| std::cmp::Reverse(q.order()));
        let mut rows = Vec::new();
        for (n, q, proj) in &quotients {
            let fq = push_cocycle(&y, &g, &gl, proj).map_err(stage("cover-family"))?;
            let cq = build_cover(&y, q, &fq).map_err(stage("cover-family"))?;
            let comps = connected_components(&cq.complex).0;
            let vr = verify_cover(&cq.complex, &y, &|v| cq.phi(v));
            let gap = link_spectra_gap(&cq, &y);
            let global = cq.complex.one_skeleton().map(|sk| adjacency_spectrum(&sk).two_sided).unwrap_or(f64::NAN);
            let ok = comps == 1
                && vr.pass
                && gap <= 1e-9
                && hdx.pass
                && cq.complex.num_vertices() == y.num_vertices() * q.order();
            ctx.audit(Audit::new(&format!("cover_family_index_{}", q.order()), ok, Some(gap), None));
            rows.push(json!({
                "normal_subgroup": n,
                "quotient_order": q.order(),
                "vertices": cq.complex.num_vertices(),
                "components": comps,
                "verified": vr.pass,
                "link_spectra_gap": gap,
                "global_two_sided": global,
            }));
        }
        ctx.timings.stages.push(("cover-family".into(), t0.elapsed().as_secs_f64()));
        ctx.stage("cover-family", json!({ "covers": rows }));
    }
    Ok(ctx.finish(spec, false))
}

fn run_sparsify(spec: &ExperimentSpec, s: &SparsifySpec) -> Result<Run, HarnessError> {
    let g = s.graph.load()?;
    if !(s.p_edge > 0.0 && s.p_edge <= 1.0 && s.trials >= 1) {
        return Err(HarnessError::Input("need 0 < p_edge <= 1, trials >= 1".into()));
    }
    let mut ctx = Ctx::new(spec.seed);
    let seed = stage_seed(spec.seed, "sparsify");
    let Some(p_split) = s.p_split else {
        if !g.is_bipartite() {
            return Err(HarnessError::Input("subsampling without a split needs a bipartite graph".into()));
        }
        let rep = ctx.timed("sparsify", |_| subsample_trials(&g, s.p_edge, s.trials, seed)).map_err(stage("sparsify"))?;
        ctx.file("trials.csv", subsample_csv(&rep));
        if let Some((t, need)) = s.h_prime_threshold {
            let r = rep.rate_at_most(t);
            ctx.audit(Audit::new("h_prime_rate", r >= need, Some(r), None));
        }
        ctx.stage("sparsify", serde_json::to_value(&rep).expect("serializable"));
        return Ok(ctx.finish(spec, false));
    };
    if !(p_split > 0.0 && p_split < 0.5) {
        return Err(HarnessError::Input("need 0 < p_split < 1/2".into()));
    }
    let rep = ctx.timed("sparsify", |_| sparsify_trial(&g, p_split, s.p_edge, s.trials, s.epsilon, seed));
    ctx.file("trials.csv", trials_csv(&rep));
    let mut series = String::from("# trial lambda_h lambda_h_prime\n");
    for r in &rep.rows {
        series.push_str(&format!("{} {:.12} {:.12}\n", r.trial, r.lambda_h, r.lambda_h_prime.unwrap_or(f64::NAN)));
    }
    ctx.file("lambda_dist.dat", series);
    ctx.audit(Audit::new("h_bound_rate", rep.rate_h_within_bound >= s.h_bound_rate, Some(rep.rate_h_within_bound), None));
    if let Some((t, need)) = s.h_prime_threshold {
        let r = rep.rate_h_prime_at_most(t);
        ctx.audit(Audit::new("h_prime_rate", r >= need, Some(r), None));
    }
    ctx.stage("sparsify", serde_json::to_value(&rep).expect("serializable"));
    Ok(ctx.finish(spec, false))
}

fn run_combine(spec: &ExperimentSpec, c: &CombineSpec) -> Result<Run, HarnessError> {
    let x = c.complex.load()?;
    let target = c.target.load()?;
    let cb = Combiner::new(&x, &target).map_err(input)?;
    let mut ctx = Ctx::new(spec.seed);
    let out = ctx.timed("combine", |rng| cb.moser_tardos(&c.config, rng));
    ctx.stage("combine", serde_json::to_value(&out).expect("serializable"));
    match out.status {
        CombineStatus::BudgetExhausted => return Ok(ctx.finish(spec, true)),
        CombineStatus::Fail => {
            ctx.audit(Audit::new("non_degenerate", false, None, out.missing.as_ref().map(|m| format!("{m:?}"))));
            return Ok(ctx.finish(spec, false));
        }
        CombineStatus::Clean => {}
    }
    let y = out.y.clone().expect("clean outcome has Y");
    let t0 = Instant::now();
    let lam = c.config.lambda;
    ctx.audit(Audit::new("events_clean", cb.first_violated(&out.coloring, lam).is_none(), None, None));
    let rep = verify_combine(&cb, &out.coloring, &y, lam);
    ctx.audit(Audit::new("homomorphism", rep.homomorphism, None, rep.bad_face.as_ref().map(|f| format!("{f:?}"))));
    ctx.audit(Audit::new("non_degenerate", rep.non_degenerate, None, rep.missing.as_ref().map(|f| format!("{f:?}"))));
    ctx.audit(Audit::new("hdx", rep.hdx, Some(rep.worst_lambda), None));
    ctx.audit(Audit::new(
        "connected",
        rep.connected && rep.path_argument.failures.is_empty(),
        Some(rep.path_argument.routed as f64),
        rep.path_argument.failures.first().map(|e| format!("{e:?}")),
    ));
    ctx.audit(Audit::new("face_fraction", rep.fractions_positive, rep.face_fractions.iter().map(|f| f.fraction).reduce(f64::min), None));
    let total: f64 = y.weights().iter().sum();
    ctx.audit(Audit::new("coloring_measure_total", (total - 1.0).abs() <= 1e-9, Some(total), None));
    let td = trickle_down(&y);
    ctx.audit(Audit::new("trickle_down", td.holds, Some(td.checks.len() as f64), None));
    let hdx = is_hdx(&y, rep.hdx_threshold, HdxMode::TwoSided);
    ctx.file("spectra.csv", spectra_csv(&hdx.links));
    ctx.file("lambda_dist.dat", lambda_series(&hdx.links));
    ctx.timings.stages.push(("audit".into(), t0.elapsed().as_secs_f64()));
    ctx.stage("audit", json!({ "verify": rep, "trickle_down": td }));
    Ok(ctx.finish(spec, false))
}

fn run_scan(spec: &ExperimentSpec, s: &ScanSpec) -> Result<Run, HarnessError> {
    let g = s.group.build().map_err(input)?;
    if s.d < 1 {
        return Err(HarnessError::Input("d must be >= 1".into()));
    }
    let mut ctx = Ctx::new(spec.seed);
    let res = ctx.timed("scan", |_| scan_gensets(&g, s.d, s.max_size, s.eta_target, s.max_candidates));
    // cross-check the best candidate against the links of the full complex
    if let Some(best) = res.candidates.first() {
        let gs = GenSet::new(&g, &best.gens).map_err(stage("audit"))?;
        let c = cayley_clique_complex(&g, &gs, s.d).map_err(stage("audit"))?.complex;
        let mut full = 0.0f64;
        if s.d >= 2 {
            for l in 0..=s.d - 2 {
                for f in c.faces(l) {
                    full = full.max(link_spectrum(&c, f, HdxMode::TwoSided).value);
                }
            }
        }
        ctx.audit(Audit::new("scan_cross_check", (full - best.lambda).abs() <= 1e-9, Some(full), None));
    }
    ctx.stage("scan", serde_json::to_value(&res).expect("serializable"));
    Ok(ctx.finish(spec, false))
}

/// Write `report.json`, artifacts and `timings.json` under `dir`.
pub fn emit_report(dir: &Path, run: &Run) -> Result<(), HarnessError> {
    write_text(&dir.join("report.json"), &to_json(&run.report))?;
    for (name, text) in &run.artifacts.files {
        write_text(&dir.join(name), text)?;
    }
    write_text(&dir.join("timings.json"), &to_json(&run.timings))
}
