use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use knotoid::code::{parse_code, parse_gko, CodeError, OpenGaussCode};
use knotoid::invariants::{bracket, f_polynomial, knotoid_f, InvariantError};
use knotoid::moves::{apply_move, enumerate_moves, InsertionCaps, MoveError, MoveMode, MoveSite};
use knotoid::planar::{parse_pkd, ClosureKind, PlanarDiagram, PlanarError, Route};
use knotoid::search::{
    self, equivalent, min_genus_bound, SearchBudget, SearchError, StoreError, DEFAULT_MAX_CROSSINGS,
    DEFAULT_MAX_DEPTH, DEFAULT_MAX_NODES,
};
use knotoid::surface::{carrier_genus, is_classical, SurfaceError};

#[derive(Parser)]
#[command(name = "knotoid", version, about = "Classical and virtual knotoids as Gauss codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosureType {
    Under,
    Over,
    Virtual,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    UnderClosure,
}

impl From<Mode> for MoveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Standard => MoveMode::Standard,
            Mode::UnderClosure => MoveMode::UnderClosure,
        }
    }
}

#[derive(clap::Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_CROSSINGS)]
    max_crossings: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[arg(long, value_enum, default_value_t = Mode::Standard)]
    mode: Mode,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget::new(self.max_crossings, self.max_nodes, self.max_depth).with_mode(self.mode.into())
    }
}

/// Inputs are file paths (`.pkd` for planar diagrams, anything else holds a
/// Gauss code) or inline codes; the empty string is the trivial knotoid.
#[derive(Subcommand)]
enum Command {
    /// Check an input and print `ok`.
    Validate { input: String },
    /// Print the canonical code.
    Canon { input: String },
    /// Print the canonical code of the product.
    Product { left: String, right: String },
    /// Print the cyclic code of a closure.
    Closure {
        input: String,
        #[arg(long = "type", value_enum, default_value_t = ClosureType::Virtual)]
        kind: ClosureType,
        #[arg(long, default_value = "auto")]
        route: String,
    },
    /// Print the carrier genus.
    Genus { input: String },
    /// Print `true` when the carrier genus is 0.
    Classical { input: String },
    /// Print the bracket of the virtual closure.
    Bracket {
        input: String,
        /// Print the writhe-normalised polynomial instead.
        #[arg(long)]
        normalized: bool,
    },
    /// Print the normalised bracket of the virtual closure.
    F { input: String },
    /// List move sites, one per line.
    Moves {
        input: String,
        #[arg(long, default_value_t = DEFAULT_MAX_CROSSINGS)]
        max_crossings: usize,
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
    },
    /// Apply one move site and print the canonical result.
    Apply { input: String, site: String },
    /// Bounded equivalence test.
    Equiv {
        left: String,
        right: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Print the least carrier genus found and a code attaining it.
    MinGenus {
        input: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Tabulate every canonical code up to N crossings.
    Tabulate {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug)]
struct Failure {
    reason: &'static str,
    message: String,
}

impl Failure {
    fn new(reason: &'static str, message: impl ToString) -> Self {
        Failure { reason, message: message.to_string() }
    }
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::Invalid(_) => Failure::new("INVALID_CODE", e),
            _ => Failure::new("PARSE", e),
        }
    }
}

impl From<PlanarError> for Failure {
    fn from(e: PlanarError) -> Self {
        let reason = match e {
            PlanarError::NotClassical => "NOT_CLASSICAL",
            PlanarError::VirtualCrossings => "VIRTUAL_CROSSINGS",
            PlanarError::RouteInvalid(_) => "BAD_ROUTE",
            PlanarError::Syntax(..) => "PARSE",
            _ => "INVALID_DIAGRAM",
        };
        Failure::new(reason, e)
    }
}

impl From<MoveError> for Failure {
    fn from(e: MoveError) -> Self {
        let reason = match e {
            MoveError::NotClassical => "NOT_CLASSICAL",
            MoveError::StaleSite(_) => "STALE_SITE",
            MoveError::VariantMismatch(_) => "VARIANT_MISMATCH",
            MoveError::Parse(_) => "PARSE",
        };
        Failure::new(reason, e)
    }
}

impl From<InvariantError> for Failure {
    fn from(e: InvariantError) -> Self {
        Failure::new("CAP_EXCEEDED", e)
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        Failure::new("SURFACE", e)
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidBudget => Failure::new("BAD_BUDGET", e),
            SearchError::Move(m) => m.into(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Search(s) => s.into(),
            _ => Failure::new("IO", e),
        }
    }
}

enum Input {
    Code(OpenGaussCode),
    Planar(PlanarDiagram),
}

impl Input {
    fn code(&self) -> OpenGaussCode {
        match self {
            Input::Code(c) => c.clone(),
            Input::Planar(d) => d.to_open_code(),
        }
    }

    fn diagram(&self) -> Result<PlanarDiagram, Failure> {
        match self {
            Input::Code(c) => Ok(PlanarDiagram::from_classical_code(c)?),
            Input::Planar(d) => Ok(d.clone()),
        }
    }
}

fn read_input(arg: &str) -> Result<Input, Failure> {
    let path = Path::new(arg);
    if !arg.is_empty() && path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Failure::new("IO", e))?;
        if path.extension().is_some_and(|e| e == "pkd") {
            return Ok(Input::Planar(parse_pkd(&text)?));
        }
        return Ok(Input::Code(parse_gko(&text)?));
    }
    Ok(Input::Code(parse_code(arg)?))
}

fn read_code(arg: &str) -> Result<OpenGaussCode, Failure> {
    read_input(arg).map(|i| i.code())
}

fn run(cli: Cli) -> Result<String, Failure> {
    let out = match cli.command {
        Command::Validate { input } => {
            read_input(&input)?;
            "ok".to_string()
        }
        Command::Canon { input } => read_code(&input)?.canonical_text(),
        Command::Product { left, right } => read_code(&left)?.product(&read_code(&right)?).canonical_text(),
        Command::Closure { input, kind, route } => {
            let input = read_input(&input)?;
            let route: Route = route.parse()?;
            let kind = match kind {
                ClosureType::Under => ClosureKind::Under,
                ClosureType::Over => ClosureKind::Over,
                ClosureType::Virtual => ClosureKind::Virtual,
            };
            let z = match (kind, &input) {
                (ClosureKind::Virtual, Input::Code(c)) if route == Route::Auto => c.virtual_closure(),
                _ => input.diagram()?.closure(kind, &route)?,
            };
            z.canonicalize().canonical_text()
        }
        Command::Genus { input } => carrier_genus(&read_code(&input)?)?.to_string(),
        Command::Classical { input } => is_classical(&read_code(&input)?).to_string(),
        Command::Bracket { input, normalized } => {
            let z = read_code(&input)?.virtual_closure();
            if normalized { f_polynomial(&z)? } else { bracket(&z)? }.to_string()
        }
        Command::F { input } => knotoid_f(&read_code(&input)?)?.to_string(),
        Command::Moves { input, max_crossings, mode } => {
            let code = read_code(&input)?.canonicalize();
            let sites = enumerate_moves(&code, mode.into(), &InsertionCaps::crossings(max_crossings))?;
            sites.iter().map(MoveSite::to_string).collect::<Vec<_>>().join("\n")
        }
        Command::Apply { input, site } => {
            let code = read_code(&input)?.canonicalize();
            let site: MoveSite = site.parse()?;
            apply_move(&code, &site)?.canonical_text()
        }
        Command::Equiv { left, right, budget } => {
            equivalent(&read_code(&left)?, &read_code(&right)?, &budget.budget())?.to_string()
        }
        Command::MinGenus { input, budget } => {
            let (g, witness) = min_genus_bound(&read_code(&input)?, &budget.budget())?;
            format!("{g}\n{}", witness.canonical_text())
        }
        Command::Tabulate { n, out, budget } => match out {
            Some(path) => search::tabulate(n, &budget.budget(), &path)?.to_string(),
            None => {
                let text = search::store_text(&search::tabulation_records(n, &budget.budget())?);
                text.trim_end().to_string()
            }
        },
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}: {}", f.reason, f.message);
            ExitCode::from(1)
        }
    }
}
