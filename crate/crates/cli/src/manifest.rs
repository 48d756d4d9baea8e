//! Run manifests: everything needed to reproduce a run, echoed into its report.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use cylinder_core::Budget;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Build a structure and emit it as JSON.
    #[command(subcommand)]
    Construct(Construct),
    /// Run an axiom or validator suite on the input.
    Check(CheckArgs),
    /// Solve a bounded game described by a GameSpec file.
    SolveGame(SolveGameArgs),
    /// Basis fixpoints and the cylindric basis check.
    Basis(BasisArgs),
    /// The blur conditions on an instance file or a generated instance.
    BlurCheck(BlurArgs),
    /// Step-by-step representation builders.
    RepBuild(RepArgs),
    /// Generate or analyse a graph.
    Graph(GraphArgs),
    /// Run a shipped bundle of checks.
    Suite(SuiteArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Check(_) => "check",
            Command::SolveGame(_) => "solve-game",
            Command::Basis(_) => "basis",
            Command::BlurCheck(_) => "blur-check",
            Command::RepBuild(_) => "rep-build",
            Command::Graph(_) => "graph",
            Command::Suite(_) => "suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "construct", rename_all = "camelCase")]
pub enum Construct {
    /// Monk-style relation algebra over a graph.
    Monk {
        /// Graph spec such as `cycle:5` or `cliques:3x3`; defaults to the first input.
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, default_value_t = 3)]
        colours: usize,
    },
    /// The polyadic equality atom structure over a graph.
    Eta {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, default_value_t = 3)]
        dimension: usize,
    },
    /// Atoms a^k(i, j) with k below the cap, i < n − 1 and j < r.
    Bin {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Multiplicity cap; defaults to ψ(n, r).
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Rainbow structure with the given numbers of greens and reds.
    Rainbow {
        #[arg(long)]
        greens: usize,
        #[arg(long)]
        reds: usize,
    },
    /// Basic matrices over the relation structure in the first input.
    Matrices {
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// A pebble structure, e.g. `linear:4` or `mpi:1,4`.
    Pebble {
        #[arg(long)]
        spec: String,
    },
    /// Representable structure of value-permutation invariant relations.
    Quotient {
        #[arg(long, default_value_t = 3)]
        dimension: usize,
        #[arg(long, value_enum, default_value_t = QuotientChoice::EqualityTypes)]
        kind: QuotientChoice,
    },
    /// A seeded random cylindric structure.
    Random {
        #[arg(long, default_value_t = 3)]
        dimension: usize,
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
    },
    /// `Id` plus `k` atoms with every non-identity triple consistent.
    Flexible {
        #[arg(long)]
        k: usize,
    },
    /// `Id` plus `k` atoms with only monochromatic triangles forbidden.
    Monochromatic {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotientChoice {
    EqualityTypes,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckTarget {
    /// Atom structure laws (relation inputs) or an axiom list (cylindric inputs).
    Structure,
    /// A network (second input) over a cylindric structure (first input).
    Network,
    /// A coloured graph against green and red pebble structures.
    Coloured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantChoice {
    Ca,
    Pta,
    Ta,
    Pea,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = CheckTarget::Structure)]
    pub target: CheckTarget,
    /// Axiom list for cylindric inputs; defaults to the structure's flavour.
    #[arg(long, value_enum)]
    pub variant: Option<VariantChoice>,
    /// Green index structure for coloured graphs.
    #[arg(long)]
    pub greens: Option<String>,
    /// Red index structure for coloured graphs.
    #[arg(long)]
    pub reds: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveGameArgs {
    /// First pebble structure for EF games, in place of an arena input.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    /// Greatest fixpoint over networks of a cylindric structure.
    Fixpoint,
    /// Greatest fixpoint over basic matrices of a relation structure.
    Relational,
    /// Coverage, witness and amalgamation over all basic matrices.
    Cylindric,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisArgs {
    #[arg(long, value_enum, default_value_t = BasisMode::Fixpoint)]
    pub mode: BasisMode,
    /// Network size, or matrix size for the cylindric check.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlurArgs {
    /// Generate `I` = all `k` non-identity atoms of the monochromatic-forbidden structure.
    #[arg(long)]
    pub k: Option<usize>,
    /// Block size; `J` is all `l`-subsets of `I`.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Use the structure with every non-identity triple consistent instead.
    #[arg(long)]
    pub flexible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepMode {
    Prenetwork,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureChoice {
    Pta,
    Ta,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepArgs {
    #[arg(long, value_enum, default_value_t = RepMode::Prenetwork)]
    pub mode: RepMode,
    #[arg(long, value_enum, default_value_t = SignatureChoice::Pta)]
    pub signature: SignatureChoice,
    /// Rounds of the prenetwork game.
    #[arg(long, default_value_t = 30)]
    pub rounds: usize,
    /// Defects repaired by the square builder.
    #[arg(long, default_value_t = 60)]
    pub steps: usize,
    /// Matrix size when the input is a relation structure.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// A JSON list of ∀ moves replacing the fair schedule.
    #[arg(long)]
    pub moves: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphArgs {
    /// Graph spec such as `complete:3`, `interval:5,3` or `erdos:12,0.3`; defaults to the first input.
    #[arg(long)]
    pub kind: Option<String>,
    /// Skip the exact chromatic number.
    #[arg(long)]
    pub no_chromatic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Atom structure and PEA axiom suites on the Monk, binary and rainbow structures.
    PaperMonk,
    /// The ψ table.
    PaperPsi,
    /// Cylindric basis checks on Monk and rainbow matrices.
    PaperBasis,
    /// The EF table on linear orders with a clique.
    PaperEf,
    /// Fixpoint against game on a seeded random corpus.
    PaperCorpus,
    /// Triangle games on rainbow and binary structures.
    PaperRaGame,
    /// Blur conditions.
    PaperBlur,
    /// Representation builders.
    PaperRep,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SuiteArgs {
    #[arg(value_enum)]
    pub preset: Preset,
}

/// Budget fields the command line may override.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BudgetOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// Caps memoized game states and enumerated networks alike.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
}

impl BudgetOverrides {
    pub fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(a) = self.atoms {
            b.atoms = a;
        }
        if let Some(s) = self.states {
            b.states = s;
            b.matrices = s;
        }
        b
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Switches {
    pub no_strategy: bool,
    pub allow_shade: bool,
    pub full_powerset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub budget: BudgetOverrides,
    pub jobs: Option<usize>,
    pub switches: Switches,
}

/// The wire form, with the subcommand and its parameter record side by side.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ManifestJson {
    subcommand: String,
    #[serde(default)]
    params: Value,
    #[serde(default)]
    inputs: Vec<PathBuf>,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    budget: BudgetOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jobs: Option<usize>,
    #[serde(default)]
    switches: Switches,
}

impl Serialize for RunManifest {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let tagged = serde_json::to_value(&self.command).map_err(serde::ser::Error::custom)?;
        let params = tagged.get("params").cloned().unwrap_or(Value::Null);
        ManifestJson {
            subcommand: self.command.name().to_string(),
            params,
            inputs: self.inputs.clone(),
            output: self.output.clone(),
            seed: self.seed,
            budget: self.budget,
            jobs: self.jobs,
            switches: self.switches,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RunManifest {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = ManifestJson::deserialize(de)?;
        let tagged = serde_json::json!({ "subcommand": j.subcommand, "params": j.params });
        let command = serde_json::from_value(tagged).map_err(serde::de::Error::custom)?;
        Ok(RunManifest {
            command,
            inputs: j.inputs,
            output: j.output,
            seed: j.seed,
            budget: j.budget,
            jobs: j.jobs,
            switches: j.switches,
        })
    }
}
