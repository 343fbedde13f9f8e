//! The `coopkit` command-line interface.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cdc::{dim1_matches_graph, verify_cdc};
use crate::compose::{compare_with_closed_form, Functor, KanFunctor};
use crate::cooperad::{
    check_delta_n, verify_comodule, verify_cooperad, verify_cosimplicial, verify_paren_compat, Coalgebra, Comodule,
    Cooperad, TableCooperad, Tower,
};
use crate::corpus::negative_controls;
use crate::error::{Error, Result};
use crate::graphco::{brute_force_tree_count, enumerate_trees, BasisGraph, GraphCooperad};
use crate::report::Report;
use crate::symseq::{SymFunctor, SymSeq};
use crate::wreath::{fiber_classes, FiberBounds, FinSet};
use crate::zmodule::SparseMatrix;

#[derive(Parser, Debug)]
#[command(name = "coopkit", version, about = "Exact checks for cooperads over the integers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spanning trees on small vertex sets.
    Trees {
        #[command(subcommand)]
        action: TreesCmd,
    },
    /// Chains of set maps.
    Chains {
        #[command(subcommand)]
        action: ChainsCmd,
    },
    /// Composites of symmetric sequences.
    Compose {
        #[command(subcommand)]
        action: ComposeCmd,
    },
    /// Cooperad axioms: coassociativity, counit and naturality.
    Verify(VerifyArgs),
    /// Cosimplicial identities and parenthesization compatibility.
    Cosimplicial(CosimplicialArgs),
    /// Coalgebras over a cooperad.
    Coalgebra {
        #[command(subcommand)]
        action: CoalgebraCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum TreesCmd {
    /// Counts trees per vertex count and checks them against nⁿ⁻².
    Enum {
        #[arg(long, default_value_t = 6)]
        max_set: usize,
        /// Only this vertex count, with every tree listed.
        #[arg(long)]
        n: Option<usize>,
        /// Also list every tree.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum ChainsCmd {
    /// Isomorphism classes of n-chains over a fixed top set.
    Fiber {
        /// Size of the top set.
        #[arg(long)]
        set: usize,
        /// Number of levels.
        #[arg(long, default_value_t = 2)]
        max_n: usize,
        /// Largest lower level.
        #[arg(long, default_value_t = 4)]
        max_set: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ComposeCmd {
    /// Rank of the composite of symmetric sequences (JSON files) at an arity.
    Eval {
        /// Sequence files, outermost first.
        #[arg(long = "seq", required = true)]
        seqs: Vec<PathBuf>,
        #[arg(long)]
        max_arity: usize,
        /// Compare against the closed form (two sequences only).
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Graph,
    Dirgraph,
    Cdc,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Corrupt {
    SignFlip,
    DroppedZeroCase,
    WrongCounit,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Cooperad JSON file for `custom`.
    #[arg(value_name = "FILE", conflicts_with = "cooperad")]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub max_set: usize,
    /// Truncation arity of the cooperad (defaults to --max-set).
    #[arg(long)]
    pub max_arity: Option<usize>,
    /// Cooperad JSON file for `custom`.
    #[arg(long)]
    pub cooperad: Option<PathBuf>,
    /// Maximum number of triangles for `cdc`.
    #[arg(long, default_value_t = 1)]
    pub max_tri: usize,
    /// Apply a seeded corruption to the graph cooperad.
    #[arg(long, value_enum)]
    pub corrupt: Option<Corrupt>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::Args, Debug)]
pub struct CosimplicialArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Cooperad JSON file for `custom`.
    #[arg(value_name = "FILE", conflicts_with = "cooperad")]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
    #[arg(long, default_value_t = 4)]
    pub max_set: usize,
    #[arg(long)]
    pub max_arity: Option<usize>,
    #[arg(long)]
    pub cooperad: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub corrupt: Option<Corrupt>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum CoalgebraCmd {
    /// Comodule axioms and path independence of the iterated coaction.
    Verify {
        /// Coalgebra JSON file.
        #[arg(long)]
        coalgebra: PathBuf,
        /// Base cooperad: graph, dirgraph or a cooperad JSON file.
        #[arg(long, default_value = "graph")]
        cooperad: String,
        /// Truncation arity of the base cooperad.
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        /// Largest iterate for path independence.
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 3)]
        max_set: usize,
    },
}

/// A coalgebra file: carrier basis and the coaction into each arity.
#[derive(Serialize, Deserialize)]
pub struct CoalgebraFile {
    pub carrier: Vec<String>,
    pub coaction: std::collections::BTreeMap<usize, SparseMatrix>,
}

/// The rendered output of a command and whether every check passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::arg(format!("cannot read {}: {e}", path.display())))
}

fn report_outcome(report: Report, format: Format) -> Outcome {
    let pass = report.all_pass();
    let text = match format {
        Format::Text => report.to_text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    };
    Outcome { text, pass }
}

fn render(value: serde_json::Value, text: String, format: Format, pass: bool) -> Outcome {
    let text = match format {
        Format::Text => text,
        Format::Json => serde_json::to_string_pretty(&value).expect("serializable") + "\n",
    };
    Outcome { text, pass }
}

fn graph_target(directed: bool, arity: usize, corrupt: Option<Corrupt>, seed: u64, max_set: usize) -> Result<Arc<dyn Cooperad>> {
    let Some(kind) = corrupt else {
        return Ok(Arc::new(GraphCooperad::new(arity, directed)));
    };
    if directed {
        return Err(Error::arg("corruptions apply to the undirected graph cooperad"));
    }
    let name = match kind {
        Corrupt::SignFlip => "sign-flip",
        Corrupt::DroppedZeroCase => "dropped-zero-case",
        Corrupt::WrongCounit => "wrong-counit",
    };
    let (_, op) = negative_controls(seed, max_set.min(arity))
        .into_iter()
        .find(|(n, _)| *n == name)
        .expect("every corruption is generated");
    let corruption = op.corruption.expect("corrupted");
    Ok(Arc::new(GraphCooperad::new(arity, false).corrupted(corruption)))
}

fn cooperad_target(
    target: Target,
    max_set: usize,
    max_arity: Option<usize>,
    file: Option<&Path>,
    corrupt: Option<Corrupt>,
    seed: u64,
) -> Result<Arc<dyn Cooperad>> {
    let arity = max_arity.unwrap_or(max_set);
    if corrupt.is_some() && target != Target::Graph {
        return Err(Error::arg("--corrupt needs the graph target"));
    }
    match target {
        Target::Graph => graph_target(false, arity, corrupt, seed, max_set),
        Target::Dirgraph => graph_target(true, arity, corrupt, seed, max_set),
        Target::Custom => {
            let path = file.ok_or_else(|| Error::arg("custom needs --cooperad FILE"))?;
            let name = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            Ok(Arc::new(TableCooperad::from_json(&name, &read(path)?)?))
        }
        Target::Cdc => Err(Error::arg("the cdc target is not available here")),
    }
}

fn named_cooperad(spec: &str, max_arity: usize) -> Result<Arc<dyn Cooperad>> {
    match spec {
        "graph" => Ok(Arc::new(GraphCooperad::new(max_arity, false))),
        "dirgraph" => Ok(Arc::new(GraphCooperad::new(max_arity, true))),
        path => {
            let p = Path::new(path);
            let name = p.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            Ok(Arc::new(TableCooperad::from_json(&name, &read(p)?)?))
        }
    }
}

pub fn load_coalgebra(name: &str, op: &dyn Cooperad, text: &str) -> Result<Coalgebra> {
    let raw: CoalgebraFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("{name} line {} column {}", e.line(), e.column()), e.to_string()))?;
    let entries = raw
        .coaction
        .iter()
        .map(|(&k, m)| Ok((k, m.to_dense()?)))
        .collect::<Result<Vec<_>>>()?;
    Coalgebra::new(name, op, raw.carrier, &entries)
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let format = cli.format;
    match &cli.command {
        Command::Trees {
            action: TreesCmd::Enum { max_set, n, list },
        } => {
            let mut rows = Vec::new();
            let mut text = String::new();
            let mut pass = true;
            let sizes = match n {
                Some(0) => return Err(Error::arg("--n must be at least 1")),
                Some(k) => *k..=*k,
                None => 1..=*max_set,
            };
            let list = *list || n.is_some();
            for n in sizes {
                let trees = enumerate_trees(n);
                let expected = if n == 1 { 1 } else { n.pow(n as u32 - 2) };
                let brute = (n <= 4).then(|| brute_force_tree_count(n));
                let ok = trees.len() == expected && brute.is_none_or(|b| b == trees.len());
                pass &= ok;
                let listing: Vec<String> = if list {
                    trees
                        .iter()
                        .map(|t| BasisGraph::from_tree(&FinSet::standard(n), t).to_string())
                        .collect()
                } else {
                    Vec::new()
                };
                text.push_str(&format!(
                    "{} |S| = {n}: {} trees, expected {expected}{}\n",
                    if ok { "PASS" } else { "FAIL" },
                    trees.len(),
                    brute.map_or(String::new(), |b| format!(", brute force {b}"))
                ));
                for l in &listing {
                    text.push_str(&format!("  {l}\n"));
                }
                rows.push(json!({"n": n, "count": trees.len(), "expected": expected, "brute_force": brute, "trees": listing}));
            }
            Ok(render(json!({"counts": rows, "pass": pass}), text, format, pass))
        }
        Command::Chains {
            action: ChainsCmd::Fiber { set, max_n, max_set },
        } => {
            if *max_n == 0 {
                return Err(Error::arg("--max-n must be at least 1"));
            }
            let any = |_: usize, _: usize| true;
            let fb = FiberBounds {
                level_max: vec![*max_set; max_n - 1],
                admissible: &any,
            };
            let classes = fiber_classes(&FinSet::standard(*set), *max_n, &fb);
            let mut text = format!("{} classes of {max_n}-chains over {set} elements\n", classes.len());
            let mut rows = Vec::new();
            for (c, gens) in &classes {
                text.push_str(&format!("  {c}  ({} automorphism generators)\n", gens.len()));
                rows.push(json!({"chain": c.to_string(), "automorphism_generators": gens.len()}));
            }
            Ok(render(json!({"classes": rows}), text, format, true))
        }
        Command::Compose {
            action: ComposeCmd::Eval { seqs, max_arity, oracle },
        } => {
            let loaded = seqs
                .iter()
                .map(|p| SymSeq::from_json(&read(p)?).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            if *oracle && loaded.len() != 2 {
                return Err(Error::arg("--oracle compares composites of exactly two sequences"));
            }
            let kf = KanFunctor::new(loaded.iter().map(|s| s.clone() as Functor).collect());
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut pass = true;
            for n in 0..=*max_arity {
                let rank = kf.rank(n);
                let check = oracle.then(|| compare_with_closed_form(&loaded[0], &loaded[1], n));
                let status = match &check {
                    None => String::new(),
                    Some(Ok(_)) => ", closed form agrees".into(),
                    Some(Err(w)) => {
                        pass = false;
                        format!(", closed form disagrees: {w}")
                    }
                };
                text.push_str(&format!("arity {n}: rank {rank}{status}\n"));
                rows.push(json!({
                    "arity": n,
                    "rank": rank,
                    "oracle": check.map(|c| c.map_or_else(|w| json!({"agrees": false, "witness": w}), |_| json!({"agrees": true}))),
                }));
            }
            Ok(render(json!({"arities": rows}), text, format, pass))
        }
        Command::Verify(a) => {
            let report = if a.target == Target::Cdc {
                if a.corrupt.is_some() || a.cooperad.is_some() || a.file.is_some() {
                    return Err(Error::arg("cdc takes no --corrupt or --cooperad"));
                }
                let mut r = verify_cdc(a.max_set, a.max_tri);
                r.extend(dim1_matches_graph(a.max_set, a.max_tri));
                r
            } else {
                let op = cooperad_target(a.target, a.max_set, a.max_arity, a.file.as_deref().or(a.cooperad.as_deref()), a.corrupt, a.seed)?;
                verify_cooperad(op, a.max_set)
            };
            Ok(report_outcome(report, format))
        }
        Command::Cosimplicial(a) => {
            let op = cooperad_target(a.target, a.max_set, a.max_arity, a.file.as_deref().or(a.cooperad.as_deref()), a.corrupt, a.seed)?;
            let tower = Tower::new(op);
            let mut report = verify_cosimplicial(&tower, a.max_n, a.max_set);
            report.extend(verify_paren_compat(&tower, a.max_set.min(3)));
            Ok(report_outcome(report, format))
        }
        Command::Coalgebra {
            action:
                CoalgebraCmd::Verify {
                    coalgebra,
                    cooperad,
                    max_arity,
                    max_n,
                    max_set,
                },
        } => {
            let op = named_cooperad(cooperad, *max_arity)?;
            let name = coalgebra.file_stem().map_or("coalgebra".into(), |s| s.to_string_lossy().into_owned());
            let module: Arc<dyn Comodule> = Arc::new(load_coalgebra(&name, op.as_ref(), &read(coalgebra)?)?);
            let mut report = verify_comodule(op.clone(), module.clone(), *max_set);
            report.extend(check_delta_n(&Tower::with_module(op, module), *max_n, 0));
            Ok(report_outcome(report, format))
        }
    }
}

/// Parses arguments, runs the command and writes the output. Returns the
/// process exit code: 0 when every check passes, 1 on a violation, 2 on an
/// input or usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &out.text),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if out.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Configures the global worker pool from `COOPKIT_THREADS`.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("COOPKIT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::arg(format!("COOPKIT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::arg("COOPKIT_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::arg(e.to_string()))?;
    }
    Ok(())
}
