use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdx_cover::combine::CombineConfig;
use hdx_cover::complex::check_suitable;
use hdx_cover::covers::{build_cover, connected_components, verify_cover, GroupLabeling};
use hdx_cover::groups::{Elem, GroupSpec};
use hdx_cover::harness::{
    emit_report, load_complex, load_graph, read_json, run_experiment, to_json, write_text, CombineSpec,
    ComplexSource, CoverFamilySpec, ExperimentSpec, GraphSource, HarnessError, Pipeline, PruneSpec, ScanSpec,
    SparsifySpec,
};
use hdx_cover::pruning::PruneConfig;
use hdx_cover::spectral::{
    converse_eml_bound, eml_check, eml_discrepancy, is_hdx, lambda_report, spectra_csv, EmlStrategy, HdxMode,
};
use hdx_cover::PureComplex;
use rand::SeedableRng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hdx", about = "Random-cover high-dimensional expanders")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Out {
    /// directory for report.json and artifacts; stdout when absent
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    group: PathBuf,
    #[arg(long)]
    genset: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_resamples: Option<usize>,
    /// literal thresholds instead of the empirical ones
    #[arg(long)]
    literal_thresholds: bool,
}

impl PruneArgs {
    fn spec(&self) -> Result<PruneSpec, HarnessError> {
        let mut config =
            if self.literal_thresholds { PruneConfig::literal(self.lambda) } else { PruneConfig::empirical(self.lambda) };
        if let Some(r) = self.r {
            config.r = r;
        }
        if let Some(c) = self.c {
            config.c = c;
        }
        if let Some(eta) = self.eta {
            config.eta = eta;
        }
        if let Some(m) = self.max_resamples {
            config.max_resamples = m;
        }
        Ok(PruneSpec {
            complex: ComplexSource::Path(self.complex.clone()),
            group: read_json(&self.group)?,
            genset: read_json(&self.genset)?,
            config,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Complete d-complex on n vertices
    BuildComplete {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tensor with the complete t-partite structure
    Tensor {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    CheckSuitable {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        eta: f64,
    },
    Prune {
        #[command(flatten)]
        args: PruneArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Lift a complex along a group-valued cocycle
    Cover {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        group: PathBuf,
        /// element ids indexed by the complex's sorted edges
        #[arg(long)]
        labeling: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    CoverFamily {
        #[command(flatten)]
        args: PruneArgs,
        #[arg(long, default_value_t = 24)]
        max_index: usize,
        #[command(flatten)]
        out: Out,
    },
    VerifyHdx {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        one_sided: bool,
        #[command(flatten)]
        out: Out,
    },
    Sparsify {
        #[arg(long)]
        graph: PathBuf,
        /// omit to subsample a bipartite graph directly
        #[arg(long)]
        p_split: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        p_edge: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// λ(H') threshold audited at a 90% rate
        #[arg(long)]
        h_prime_threshold: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    Combine {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_resamples: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    ScanGensets {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value_t = 0.5)]
        eta_target: f64,
        #[arg(long, default_value_t = 20)]
        max_candidates: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Mixing-lemma discrepancy and the converse bound
    Eml {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 14)]
        exact_subset_limit: usize,
        /// sampled pairs when the graph is too large for enumeration
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment spec file
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        out: Out,
    },
}

fn emit_json(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn experiment(spec: ExperimentSpec, out: &Out) -> Result<i32, HarnessError> {
    let run = run_experiment(&spec)?;
    match &out.out_dir {
        Some(dir) => emit_report(dir, &run)?,
        None => print!("{}", to_json(&run.report)),
    }
    for a in run.report.audits.iter().filter(|a| !a.pass) {
        eprintln!("audit failed: {} {:?}", a.name, a.witness);
    }
    Ok(run.report.status.exit_code())
}

fn complex_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Input(e.to_string())
}

fn run(cmd: Cmd) -> Result<i32, HarnessError> {
    match cmd {
        Cmd::BuildComplete { n, d, out } => {
            let x = PureComplex::complete(n, d).map_err(complex_err)?;
            emit_json(out.as_deref(), &to_json(&x.to_file()))?;
            Ok(0)
        }
        Cmd::Tensor { complex, t, out } => {
            let x = load_complex(&complex)?.tensor_with_complete(t).map_err(complex_err)?;
            emit_json(out.as_deref(), &to_json(&x.to_file()))?;
            Ok(0)
        }
        Cmd::CheckSuitable { complex, c, r, eta } => {
            let rep = check_suitable(&load_complex(&complex)?, c, r, eta);
            print!("{}", to_json(&rep));
            Ok(if rep.pass() { 0 } else { 3 })
        }
        Cmd::Prune { args, out } => {
            experiment(ExperimentSpec { seed: args.seed, pipeline: Pipeline::Prune(args.spec()?) }, &out)
        }
        Cmd::CoverFamily { args, max_index, out } => {
            let prune = args.spec()?;
            experiment(
                ExperimentSpec { seed: args.seed, pipeline: Pipeline::CoverFamily(CoverFamilySpec { prune, max_index }) },
                &out,
            )
        }
        Cmd::Cover { complex, group, labeling, out } => {
            let x = load_complex(&complex)?;
            let spec: GroupSpec = read_json(&group)?;
            let g = spec.build().map_err(complex_err)?;
            let labels: Vec<Elem> = read_json(&labeling)?;
            let f = GroupLabeling::new(&x, &g, labels).map_err(complex_err)?;
            let cover = build_cover(&x, &g, &f).map_err(complex_err)?;
            let rep = verify_cover(&cover.complex, &x, &|v| cover.phi(v));
            let (components, _) = connected_components(&cover.complex);
            let report = json!({
                "vertices": cover.complex.num_vertices(),
                "tops": cover.complex.tops().len(),
                "components": components,
                "verify": rep,
            });
            match &out.out_dir {
                Some(dir) => {
                    write_text(&dir.join("cover.json"), &to_json(&cover.to_file()))?;
                    write_text(&dir.join("report.json"), &to_json(&report))?;
                }
                None => print!("{}", to_json(&report)),
            }
            Ok(if rep.pass { 0 } else { 3 })
        }
        Cmd::VerifyHdx { complex, lambda, one_sided, out } => {
            let x = load_complex(&complex)?;
            let mode = if one_sided { HdxMode::OneSided } else { HdxMode::TwoSided };
            let rep = is_hdx(&x, lambda, mode);
            let summary = json!({ "threshold": lambda, "pass": rep.pass, "worst": rep.worst, "links": rep.links.len() });
            match &out.out_dir {
                Some(dir) => {
                    write_text(&dir.join("spectra.csv"), &spectra_csv(&rep.links))?;
                    write_text(&dir.join("report.json"), &to_json(&summary))?;
                }
                None => print!("{}", to_json(&summary)),
            }
            Ok(if rep.pass { 0 } else { 3 })
        }
        Cmd::Sparsify { graph, p_split, p_edge, trials, epsilon, h_prime_threshold, seed, out } => experiment(
            ExperimentSpec {
                seed,
                pipeline: Pipeline::Sparsify(SparsifySpec {
                    graph: GraphSource::Path(graph),
                    p_split,
                    p_edge,
                    trials,
                    epsilon,
                    h_bound_rate: 0.9,
                    h_prime_threshold: h_prime_threshold.map(|t| (t, 0.9)),
                }),
            },
            &out,
        ),
        Cmd::Combine { complex, target, lambda, seed, max_resamples, out } => {
            let mut config = CombineConfig::new(lambda);
            if let Some(m) = max_resamples {
                config.max_resamples = m;
            }
            experiment(
                ExperimentSpec {
                    seed,
                    pipeline: Pipeline::Combine(CombineSpec {
                        complex: ComplexSource::Path(complex),
                        target: ComplexSource::Path(target),
                        config,
                    }),
                },
                &out,
            )
        }
        Cmd::ScanGensets { group, d, max_size, eta_target, max_candidates, out } => experiment(
            ExperimentSpec {
                seed: 0,
                pipeline: Pipeline::Scan(ScanSpec { group: read_json(&group)?, d, max_size, eta_target, max_candidates }),
            },
            &out,
        ),
        Cmd::Eml { graph, lambda, exact_subset_limit, trials, seed } => {
            let g = load_graph(&graph)?;
            let mode = if g.is_bipartite() { HdxMode::Bipartite } else { HdxMode::TwoSided };
            let lam = lambda_report(&g, mode).map_err(complex_err)?;
            let strategy = if trials > 0 { EmlStrategy::Sampled(trials) } else { EmlStrategy::Exact };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let disc = eml_discrepancy(&g, strategy, exact_subset_limit, &mut rng).map_err(complex_err)?;
            let check = match trials {
                0 => Some(eml_check(&g, lambda.unwrap_or(lam), exact_subset_limit).map_err(complex_err)?),
                _ => None,
            };
            let bound = if g.is_bipartite() { converse_eml_bound(disc.alpha).ok() } else { None };
            let holds = bound.map(|b| lam <= b);
            print!(
                "{}",
                to_json(&json!({ "lambda": lam, "discrepancy": disc, "check": check, "converse_bound": bound, "converse_holds": holds }))
            );
            let ok = check.as_ref().is_none_or(|c| c.violations == 0) && holds != Some(false);
            Ok(if ok { 0 } else { 3 })
        }
        Cmd::Run { spec, out } => experiment(read_json(&spec)?, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
