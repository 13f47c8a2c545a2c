use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netlocal::Limits;

#[derive(Parser, Debug)]
#[command(name = "netlocal", version, about = "Bell-nonlocality computations on quantum networks", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Largest joint Hilbert-space dimension to assemble
    #[arg(long, global = true, env = "NETLOCAL_DIM_CAP")]
    pub dim_cap: Option<usize>,
    /// Exit with status 1 unless the result violates its classical bound
    #[arg(long, global = true)]
    pub assert_violation: bool,
    /// Read the command and its parameters from a JSON file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn limits(&self) -> Limits {
        let mut l = Limits::default();
        if let Some(cap) = self.dim_cap {
            l.dim_cap = cap;
        }
        l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Bell,
    Werner,
    Ghz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComposeKind {
    Lambda,
    Star,
    Hybrid,
}

const H: f64 = FRAC_1_SQRT_2;

#[derive(Subcommand, Debug)]
pub enum Command {
    /// CHSH value with θ-optimized observables
    Chsh {
        #[arg(long, value_enum, default_value_t = StateKind::Bell)]
        state: StateKind,
        /// Werner mixing weight
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Number of qubits of the GHZ state
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Amplitudes u, v of u|0…0⟩ + v|1…1⟩ (also the Werner pure part)
        #[arg(long, default_value_t = H)]
        u: f64,
        #[arg(long, default_value_t = H)]
        v: f64,
    },
    /// Hub Bell measurement on a star of pairs u|00⟩ + v|11⟩
    Swap {
        /// One pair as `u,v`; repeat for every leaf (default: two EPR pairs)
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(f64, f64)>,
    },
    /// Two-level projection circuit on Σ c_k |kk⟩
    Project {
        /// Schmidt coefficients; the local dimension is their count
        #[arg(long, value_delimiter = ',', required = true)]
        schmidt: Vec<f64>,
        /// Levels kept on the first side, e.g. `0,1`; omit with --j to search all pairs
        #[arg(long, value_delimiter = ',')]
        i: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<usize>>,
    },
    /// Λ network of two-component mixtures, post-selected on |Φ⁺⟩
    Example1 {
        #[arg(long, default_value_t = H)]
        a1: f64,
        #[arg(long, default_value_t = H)]
        b1: f64,
        #[arg(long, default_value_t = H)]
        a2: f64,
        #[arg(long, default_value_t = H)]
        b2: f64,
        #[arg(long, default_value_t = H)]
        c1: f64,
        #[arg(long, default_value_t = H)]
        d1: f64,
        #[arg(long, default_value_t = H)]
        c2: f64,
        #[arg(long, default_value_t = H)]
        d2: f64,
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
        #[arg(long, default_value_t = 1.0)]
        q1: f64,
        /// Sweep (p1, q1) over a grid with this many points per axis
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Λ network of two Werner states
    Example2 {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = H)]
        a1: f64,
        #[arg(long, default_value_t = H)]
        b1: f64,
        #[arg(long, default_value_t = H)]
        a2: f64,
        #[arg(long, default_value_t = H)]
        b2: f64,
        /// Use maximally entangled pure parts (β = 1)
        #[arg(long)]
        beta1: bool,
        /// Sweep p over [0, 1] with this many points at fixed q
        #[arg(long)]
        sweep: Option<usize>,
        /// Locate the smallest violating p at fixed q by bisection
        #[arg(long)]
        boundary: bool,
    },
    /// Compose component games into a network game
    Compose {
        #[arg(long, value_enum)]
        kind: ComposeKind,
        /// Component game as a JSON file; repeat in order (default: CHSH components)
        #[arg(long = "game")]
        games: Vec<PathBuf>,
        /// Number of CHSH leaves for a default star
        #[arg(long, default_value_t = 2)]
        leaves: usize,
        /// Value credited to the classical block of a hybrid game
        #[arg(long)]
        classical_value: Option<f64>,
        /// Also compute the exact local bound by enumeration
        #[arg(long)]
        enumerate: bool,
    },
    /// Exact local bound by enumerating deterministic strategies
    LhvBound {
        /// `chsh`, `chsh3`, `chsh<N>` or a game JSON file
        #[arg(long)]
        game: String,
    },
    /// Reduce a GHZ-source network to chains and stars connecting the targets
    Reduce {
        /// `ten-party` or a layout JSON file
        #[arg(long, default_value = "ten-party")]
        layout: String,
        /// Parties to keep connected (default for ten-party: 0,1,2,3,4)
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.8)]
        u: f64,
        #[arg(long, default_value_t = 0.6)]
        v: f64,
    },
    /// Λ network of Bell pairs against the composed CHSH bound
    Theorem1,
    /// Star network of Bell pairs against the composed CHSH bound
    Lemma1 {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Bell pair next to a classical subnetwork
    Theorem3,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `u,v`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}
