use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mmm_core::bipartite::{bipartise, planted_biclique_input, sseh_gadget, sseh_yes_matching, BalancedBipartite};
use mmm_core::blowup::{blow_up, discretize_matching};
use mmm_core::fracmatch::{build_full_with, validate, BuildOptions, F1Strategy, SingletonPolicy};
use mmm_core::gadget::{build_gadget, independent_set, GadgetGraph};
use mmm_core::graph::{Graph, Matching};
use mmm_core::harness::io::{self, parse_flavor};
use mmm_core::harness::{
    parse_topology, run_experiment, verify_lemma, ExperimentConfig, LemmaId, LemmaParams, Verdict,
};
use mmm_core::rational::{format as fmt_q, parse as parse_q, Rational};
use mmm_core::solvers::{exact_mbb, exact_min_vertex_cover, exact_mmm, SolveStatus, SolverOptions};
use mmm_core::ulc::{generate_yes, Planted, UlcInstance, YesParams};

#[derive(Parser)]
#[command(name = "mmm", version, about = "Gadgets, fractional matchings and exact checks for minimum maximal matching")]
struct Cli {
    /// Seed for every randomized step [default: 1].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Node limit for exact solvers.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a YES-type unique label cover instance with a planted labelling.
    GenUlc {
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 2)]
        colors: usize,
        #[arg(long, default_value = "0")]
        xi: String,
        /// `cycle`, `complete` or `random:<num>/<den>`.
        #[arg(long, default_value = "cycle")]
        topology: String,
    },
    /// Build the weighted gadget graph of an instance.
    BuildGadget {
        #[command(flatten)]
        gadget: GadgetArgs,
    },
    /// Build and validate the saturating fractional matching.
    Fracmatch {
        #[command(flatten)]
        gadget: GadgetArgs,
        #[arg(long, value_enum, default_value_t = F1Arg::Hamiltonian)]
        f1: F1Arg,
        #[arg(long, value_enum, default_value_t = SingletonArg::Flow)]
        singleton: SingletonArg,
    },
    /// Blow up the gadget into an unweighted graph.
    Blowup {
        #[command(flatten)]
        gadget: GadgetArgs,
        #[arg(long, default_value = "1/2")]
        rho: String,
        /// Emit the discretized maximal matching instead of the blowup.
        #[arg(long)]
        discretize: bool,
    },
    /// Bipartite double cover of a graph document.
    Bipartise {
        /// `mmm/graph` document.
        graph: PathBuf,
    },
    /// Padded complement of a random graph with a planted balanced biclique.
    Sseh {
        #[arg(long, default_value_t = 4)]
        side: usize,
        #[arg(long, default_value = "1/4")]
        epsilon: String,
        /// Emit the planted maximal matching instead of the graph.
        #[arg(long)]
        matching: bool,
    },
    /// Exact solvers on a graph document.
    Solve {
        #[arg(value_enum)]
        problem: Problem,
        /// `mmm/graph` document.
        graph: PathBuf,
        /// For `mbb`: vertices `0..side` form one side, the rest the other.
        #[arg(long)]
        side: Option<usize>,
    },
    /// Run one lemma verifier and print its report.
    VerifyLemma {
        id: String,
        /// JSON file with lemma parameters; flags below override it.
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        overrides: ParamOverrides,
    },
    /// Run a parameter sweep described by a config file.
    Experiment { config: PathBuf },
    /// Re-emit a stored document, checked, as JSON or DOT.
    Export { input: PathBuf },
}

#[derive(Args)]
struct GadgetArgs {
    /// `mmm/ulc-instance` document.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value = "extended")]
    flavor: String,
}

#[derive(Args)]
struct ParamOverrides {
    #[arg(long)]
    vars: Option<usize>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    xi: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum F1Arg {
    Hamiltonian,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum SingletonArg {
    Reject,
    Flow,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Mmm,
    Vc,
    Mbb,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn rational(text: &str) -> Result<Rational> {
    Ok(parse_q(text)?)
}

fn solver_options(cli: &Cli) -> SolverOptions {
    let mut options = SolverOptions::default();
    if let Some(budget) = cli.budget {
        options.node_limit = budget;
    }
    options
}

struct Loaded {
    instance: UlcInstance,
    gadget: GadgetGraph,
}

impl Loaded {
    fn open(args: &GadgetArgs) -> Result<Self> {
        let instance = io::import_instance(&read(&args.instance)?)?;
        let gadget = build_gadget(&instance, &rational(&args.epsilon)?, parse_flavor(&args.flavor)?)?;
        Ok(Loaded { instance, gadget })
    }

    fn planted(&self) -> Result<&Planted> {
        self.instance
            .planted()
            .ok_or_else(|| anyhow!("instance has no planted labelling"))
    }
}

fn json_only(format: Format, what: &str) -> Result<()> {
    if format != Format::Json {
        bail!("{what} is only available as json");
    }
    Ok(())
}

fn graph_out(format: Format, graph: &Graph, name: &str) -> Result<String> {
    match format {
        Format::Json => Ok(io::export_graph(graph)),
        Format::Dot => Ok(io::to_dot(graph, name, |v| v.to_string())),
        Format::Csv => bail!("graphs are exported as json or dot"),
    }
}

fn matching_json(matching: &Matching) -> Value {
    json!(matching.edges())
}

fn status(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::LimitReached => "limit_reached",
    }
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    text
}

fn lemma_params(cli: &Cli, params: &Option<PathBuf>, o: &ParamOverrides) -> Result<LemmaParams> {
    let mut p: LemmaParams = match params {
        Some(path) => serde_json::from_str(&read(path)?).context("parsing lemma parameters")?,
        None => LemmaParams::default(),
    };
    if let Some(seed) = cli.seed {
        p.seed = seed;
    }
    if let Some(b) = cli.budget {
        p.node_limit = b;
    }
    if let Some(v) = o.vars {
        p.num_vars = v;
    }
    if let Some(v) = o.colors {
        p.num_colors = v;
    }
    if let Some(v) = &o.epsilon {
        p.epsilon = rational(v)?;
    }
    if let Some(v) = &o.xi {
        p.xi = rational(v)?;
    }
    if let Some(v) = &o.rho {
        p.rho = rational(v)?;
    }
    if let Some(v) = &o.topology {
        parse_topology(v)?;
        p.topology = v.clone();
    }
    if let Some(v) = o.size {
        p.size = v;
    }
    if let Some(v) = o.samples {
        p.samples = v;
    }
    Ok(p)
}

/// Output text plus exit code.
fn run(cli: &Cli) -> Result<(String, u8)> {
    let format = cli.format;
    let out = match &cli.command {
        Command::GenUlc {
            vars,
            colors,
            xi,
            topology,
        } => {
            json_only(format, "an instance")?;
            let instance = generate_yes(&YesParams {
                num_vars: *vars,
                num_colors: *colors,
                xi: rational(xi)?,
                topology: parse_topology(topology)?,
                seed: cli.seed(),
            })?;
            io::export_instance(&instance)
        }
        Command::BuildGadget { gadget } => {
            let loaded = Loaded::open(gadget)?;
            match format {
                Format::Json => io::export_gadget(&loaded.gadget),
                Format::Dot => io::gadget_dot(&loaded.gadget),
                Format::Csv => bail!("gadgets are exported as json or dot"),
            }
        }
        Command::Fracmatch { gadget, f1, singleton } => {
            json_only(format, "a fractional matching")?;
            let loaded = Loaded::open(gadget)?;
            let planted = loaded.planted()?;
            let options = BuildOptions {
                f1: match f1 {
                    F1Arg::Hamiltonian => F1Strategy::Hamiltonian,
                    F1Arg::Uniform => F1Strategy::Uniform,
                },
                singleton: match singleton {
                    SingletonArg::Reject => SingletonPolicy::Reject,
                    SingletonArg::Flow => SingletonPolicy::Flow,
                },
            };
            let fm = build_full_with(&loaded.gadget, planted, options)?;
            let report = validate(&loaded.gadget, &fm);
            let is = independent_set(&loaded.gadget, planted)?;
            let exact = report.is_valid()
                && report.saturation.saturated.len() == loaded.gadget.num_vertices() - is.vertices.len()
                && report.saturation.saturated.iter().all(|&v| !is.contains(v));
            eprintln!(
                "saturated {} of {} vertices; independent set {}; {}",
                report.saturation.saturated.len(),
                loaded.gadget.num_vertices(),
                is.vertices.len(),
                if exact { "exact" } else { "NOT exact" }
            );
            return Ok((io::export_fractional(&fm), if exact { 0 } else { 1 }));
        }
        Command::Blowup { gadget, rho, discretize } => {
            let loaded = Loaded::open(gadget)?;
            let rho = rational(rho)?;
            let blowup = blow_up(&loaded.gadget, &rho)?;
            if *discretize {
                json_only(format, "a discretized matching")?;
                let planted = loaded.planted()?;
                let fm = build_full_with(
                    &loaded.gadget,
                    planted,
                    BuildOptions {
                        singleton: SingletonPolicy::Flow,
                        ..BuildOptions::default()
                    },
                )?;
                io::export_matching(&discretize_matching(&fm, &blowup, planted)?.matching)
            } else {
                match format {
                    Format::Json => io::export_blowup(&blowup),
                    Format::Dot => io::blowup_dot(&blowup)?,
                    Format::Csv => bail!("blowups are exported as json or dot"),
                }
            }
        }
        Command::Bipartise { graph } => {
            let base = io::import_graph(&read(graph)?)?;
            graph_out(format, bipartise(&base).graph(), "bipartisation")?
        }
        Command::Sseh {
            side,
            epsilon,
            matching,
        } => {
            let epsilon = rational(epsilon)?;
            let k = (mmm_core::rational::rat(1, 2) - &epsilon) * mmm_core::rational::from_usize(*side);
            if !k.is_integer() {
                bail!("(1/2 - epsilon)·side = {} is not an integer", fmt_q(&k));
            }
            let k: usize = k.to_integer().try_into().context("planted size")?;
            let (input, k_a, k_b) = planted_biclique_input(*side, k, 1, 2, cli.seed())?;
            let gadget = sseh_gadget(&input, &epsilon)?;
            if *matching {
                json_only(format, "a matching")?;
                io::export_matching(&sseh_yes_matching(&gadget, &k_a, &k_b)?)
            } else {
                graph_out(format, gadget.graph(), "sseh")?
            }
        }
        Command::Solve { problem, graph, side } => {
            json_only(format, "a solver result")?;
            let graph = io::import_graph(&read(graph)?)?;
            let options = solver_options(cli);
            let (value, limited) = match problem {
                Problem::Mmm => {
                    let r = exact_mmm(&graph, None, &options)?;
                    let v = json!({
                        "problem": "mmm",
                        "objective": fmt_q(&r.objective),
                        "witness": matching_json(&r.witness),
                        "nodes": r.nodes,
                        "status": status(r.status),
                    });
                    (v, !r.is_optimal())
                }
                Problem::Vc => {
                    let r = exact_min_vertex_cover(&graph, None, &options)?;
                    let v = json!({
                        "problem": "vc",
                        "objective": fmt_q(&r.objective),
                        "witness": r.witness,
                        "nodes": r.nodes,
                        "status": status(r.status),
                    });
                    (v, !r.is_optimal())
                }
                Problem::Mbb => {
                    let side = side.ok_or_else(|| anyhow!("mbb needs --side"))?;
                    let input = BalancedBipartite::from_graph(side, graph)?;
                    let r = exact_mbb(input.graph(), &input.left(), &input.right(), &options)?;
                    let v = json!({
                        "problem": "mbb",
                        "objective": fmt_q(&r.objective),
                        "witness": [r.witness.0, r.witness.1],
                        "nodes": r.nodes,
                        "status": status(r.status),
                    });
                    (v, !r.is_optimal())
                }
            };
            return Ok((pretty(&value), if limited { 2 } else { 0 }));
        }
        Command::VerifyLemma { id, params, overrides } => {
            json_only(format, "a lemma report")?;
            let id: LemmaId = id.parse()?;
            let params = lemma_params(cli, params, overrides)?;
            let report = verify_lemma(id, &params)?;
            eprintln!("{id}: {} ({} mode)", report.verdict, report.mode);
            let code = match report.verdict {
                Verdict::Pass => 0,
                Verdict::Fail => 1,
                Verdict::Inconclusive => 2,
            };
            return Ok((report.to_json(), code));
        }
        Command::Experiment { config } => {
            if format == Format::Dot {
                bail!("experiments are exported as csv or json");
            }
            let config = ExperimentConfig::from_json(&read(config)?)?;
            let table = run_experiment(&config)?;
            let text = match format {
                Format::Csv | Format::Dot => table.to_csv(),
                Format::Json => {
                    let reports: Vec<Value> = table
                        .reports
                        .iter()
                        .map(|r| serde_json::to_value(r).expect("reports serialize"))
                        .collect();
                    pretty(&Value::Array(reports))
                }
            };
            let code = if table.any_fail() {
                1
            } else if table.all_pass() {
                0
            } else {
                2
            };
            if let (Some(path), None) = (&config.output, &cli.output) {
                fs::write(path, &text).with_context(|| format!("writing {path}"))?;
                return Ok((String::new(), code));
            }
            return Ok((text, code));
        }
        Command::Export { input } => export(format, &read(input)?)?,
    };
    Ok((out, 0))
}

fn export(format: Format, text: &str) -> Result<String> {
    let doc: Value = serde_json::from_str(text).context("input is not json")?;
    let schema = doc
        .get("schema")
        .and_then(Value::as_str)
        .ok_or_else(|| anyhow!("document has no schema field"))?;
    Ok(match (schema, format) {
        (io::INSTANCE_SCHEMA, Format::Json) => io::export_instance(&io::import_instance(text)?),
        (io::GADGET_SCHEMA, Format::Json) => io::export_gadget(&io::import_gadget(text)?),
        (io::GADGET_SCHEMA, Format::Dot) => io::gadget_dot(&io::import_gadget(text)?),
        (io::BLOWUP_SCHEMA, Format::Json) => io::export_blowup(&io::import_blowup(text)?.blowup()?),
        (io::BLOWUP_SCHEMA, Format::Dot) => io::blowup_dot(&io::import_blowup(text)?.blowup()?)?,
        (io::GRAPH_SCHEMA, Format::Json | Format::Dot) => graph_out(format, &io::import_graph(text)?, "graph")?,
        (io::MATCHING_SCHEMA, Format::Json) => io::export_matching(&io::import_matching(text)?),
        (io::FRACTIONAL_SCHEMA, Format::Json) => io::export_fractional(&io::import_fractional(text)?),
        (schema, _) => bail!("cannot export `{schema}` in the requested format"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(code),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
