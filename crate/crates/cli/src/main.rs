//! `jigglekit` command line.
//!
//! Exit codes: 0 success, 1 verification failed (or a jiggled outcome that
//! does not pass), 2 unreadable or malformed input, 3 invalid input,
//! 4 perturbation failure, 5 budget violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use jigglekit::engine::ModeRegistry;
use jigglekit::io::{
    builtin_complex, builtin_scenario, parse_json, read_json, render_svg, to_json, ComplexFile, IoFailure, MapFile,
    OutcomeBundle, OutcomeSet, ScenarioFile, SubdivisionFile, SCHEMA_VERSION,
};
use jigglekit::pl_maps::PLMap;
use jigglekit::simplicial::{barycentric_subdivide, crystalline_subdivide, SimplicialComplex, SubdivisionMap};
use jigglekit::transversality::{assess, AssessOptions, Distribution, DistributionRegistry, DistributionSpec, Notion, TransversalityReport};
use jigglekit::JiggleError;

const SEED_ENV: &str = "JIGGLEKIT_SEED";

#[derive(Parser)]
#[command(name = "jigglekit", version, about = "Subdivide and jiggle triangulations against tangent distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Crystalline,
    Barycentric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Euclidean,
    Tower,
    Relative,
    Subdivision,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Euclidean => "euclidean",
            ModeArg::Tower => "tower",
            ModeArg::Relative => "relative",
            ModeArg::Subdivision => "subdivision",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NotionArg {
    Transverse,
    Stratified,
    GeneralPosition,
    Report,
}

impl From<NotionArg> for Notion {
    fn from(n: NotionArg) -> Notion {
        match n {
            NotionArg::Transverse => Notion::Transverse,
            NotionArg::Stratified => Notion::Stratified,
            NotionArg::GeneralPosition => Notion::GeneralPosition,
            NotionArg::Report => Notion::Report,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Subdivide a complex file (or `builtin:NAME`).
    Subdivide {
        input: String,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, value_enum, default_value_t = Scheme::Crystalline)]
        scheme: Scheme,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Jiggle a scenario file (or `builtin:NAME`) and write the outcome bundle.
    Jiggle {
        input: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Overrides JIGGLEKIT_SEED, which overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a map (or outcome bundle) against a distribution.
    Verify {
        map: PathBuf,
        /// Distribution file; optional for outcome bundles.
        #[arg(long)]
        distribution: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = NotionArg::Report)]
        notion: NotionArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw a 2D complex, map or outcome bundle as SVG.
    Render {
        input: PathBuf,
        #[arg(long)]
        distribution: Option<PathBuf>,
        /// Highlight simplices failing this notion; needs a distribution.
        #[arg(long, value_enum)]
        notion: Option<NotionArg>,
        #[arg(long)]
        svg: PathBuf,
    },
}

enum Failure {
    Parse(String),
    Invalid(JiggleError),
}

impl From<IoFailure> for Failure {
    fn from(e: IoFailure) -> Self {
        match e {
            IoFailure::Parse(m) => Failure::Parse(m),
            IoFailure::Invalid(e) => Failure::Invalid(e),
        }
    }
}

impl From<JiggleError> for Failure {
    fn from(e: JiggleError) -> Self {
        Failure::Invalid(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Invalid(e) => match e {
                JiggleError::PerturbationFailed { .. }
                | JiggleError::EmbeddingLost
                | JiggleError::StarNotTransverse(_)
                | JiggleError::InfeasibleDimensions { .. } => 4,
                JiggleError::BudgetViolation(_) | JiggleError::LevelExhausted(_) | JiggleError::CollarTooSmall(_) => 5,
                _ => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Parse(m) => format!("parse error: {m}"),
            Failure::Invalid(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_complex(input: &str) -> std::result::Result<SimplicialComplex, Failure> {
    match input.strip_prefix("builtin:") {
        Some(name) => Ok(builtin_complex(name)?),
        None => Ok(read_json::<ComplexFile>(Path::new(input))?.to_complex()?),
    }
}

fn load_distribution(path: &Path) -> std::result::Result<Arc<dyn Distribution>, Failure> {
    let spec: DistributionSpec = read_json(path)?;
    Ok(DistributionRegistry::default().from_spec(&spec)?)
}

/// Anything with a PL map inside: an outcome bundle, a map file or a bare
/// complex (drawn through the inclusion).
enum Drawable {
    Bundle(Box<OutcomeBundle>),
    Map(PLMap),
}

fn load_drawable(path: &Path) -> std::result::Result<Drawable, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let has = |key: &str| value.get(key).is_some();
    if has("report") && has("map") {
        Ok(Drawable::Bundle(Box::new(parse_json(&text)?)))
    } else if has("images") && has("complex") {
        Ok(Drawable::Map(parse_json::<MapFile>(&text)?.to_map()?))
    } else {
        let k = parse_json::<ComplexFile>(&text)?.to_complex()?;
        Ok(Drawable::Map(PLMap::identity(&k)))
    }
}

fn subdivide(input: &str, levels: u32, scheme: Scheme, output: &Path) -> Outcome {
    let k = load_complex(input)?;
    let (out, map) = match scheme {
        Scheme::Crystalline => crystalline_subdivide(&k, levels),
        Scheme::Barycentric => {
            let mut cur = k.clone();
            let mut total = SubdivisionMap::identity(k.num_vertices());
            for _ in 0..levels {
                let (next, step) = barycentric_subdivide(&cur);
                total = total.compose(&step);
                cur = next;
            }
            (cur, total)
        }
    };
    let file = SubdivisionFile { schema_version: SCHEMA_VERSION, complex: ComplexFile::from_complex(&out), subdivision: map };
    write_file(output, &to_json(&file))?;
    Ok(true)
}

fn resolve_seed(flag: Option<u64>, config: u64) -> std::result::Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Invalid(JiggleError::Malformed(format!("{SEED_ENV} is not an unsigned integer: {v}")))),
        Err(_) => Ok(config),
    }
}

fn jiggle(input: &str, mode: Option<ModeArg>, gamma: Option<f64>, seed: Option<u64>, output: &Path) -> Outcome {
    let mut file = match input.strip_prefix("builtin:") {
        Some(name) => builtin_scenario(name)?,
        None => read_json::<ScenarioFile>(Path::new(input))?,
    };
    if let Some(m) = mode {
        file.mode = Some(m.name().into());
    }
    if let Some(g) = gamma {
        file.config.gamma = g;
    }
    file.config.seed = resolve_seed(seed, file.config.seed)?;
    let scenario = file.resolve()?;
    let outcomes = scenario.run(&ModeRegistry::default())?;
    let bundles = scenario.bundles(&outcomes);
    let pass = bundles.iter().all(|b| b.report.pass);
    let text = if scenario.mode_name() == "tower" {
        to_json(&OutcomeSet { schema_version: SCHEMA_VERSION, outcomes: bundles })
    } else {
        to_json(&bundles[0])
    };
    write_file(output, &text)?;
    Ok(pass)
}

fn verify(map: &Path, distribution: Option<&Path>, notion: NotionArg, output: Option<&Path>) -> Outcome {
    let (f, xi) = match load_drawable(map)? {
        Drawable::Bundle(b) => {
            let xi = match distribution {
                Some(p) => load_distribution(p)?,
                None => DistributionRegistry::default().from_spec(&b.distribution)?,
            };
            (b.to_outcome()?.g, xi)
        }
        Drawable::Map(f) => {
            let p = distribution.ok_or_else(|| Failure::Invalid(JiggleError::Malformed("--distribution is required".into())))?;
            (f, load_distribution(p)?)
        }
    };
    let report = assess(&f, xi.as_ref(), &AssessOptions { notion: notion.into(), ..Default::default() })?;
    let text = to_json(&report);
    match output {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(report.pass)
}

fn render(input: &Path, distribution: Option<&Path>, notion: Option<NotionArg>, svg: &Path) -> Outcome {
    let (f, spec, stored): (PLMap, Option<DistributionSpec>, Option<TransversalityReport>) = match load_drawable(input)? {
        Drawable::Bundle(b) => (b.to_outcome()?.g, Some(b.distribution.clone()), Some(b.report.clone())),
        Drawable::Map(f) => (f, None, None),
    };
    let xi = match (distribution, spec) {
        (Some(p), _) => Some(load_distribution(p)?),
        (None, Some(s)) => Some(DistributionRegistry::default().from_spec(&s)?),
        (None, None) => None,
    };
    let report = match (notion, &xi) {
        (Some(n), Some(x)) => Some(assess(&f, x.as_ref(), &AssessOptions { notion: n.into(), ..Default::default() })?),
        (Some(_), None) => {
            return Err(Failure::Invalid(JiggleError::Malformed("--notion needs a distribution".into())));
        }
        (None, _) => stored,
    };
    let text = render_svg(&f, xi.as_deref(), report.as_ref())?;
    write_file(svg, &text)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Subdivide { input, levels, scheme, output } => subdivide(input, *levels, *scheme, output),
        Command::Jiggle { input, mode, gamma, seed, output } => jiggle(input, *mode, *gamma, *seed, output),
        Command::Verify { map, distribution, notion, output } => {
            verify(map, distribution.as_deref(), *notion, output.as_deref())
        }
        Command::Render { input, distribution, notion, svg } => render(input, distribution.as_deref(), *notion, svg),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("jigglekit: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
