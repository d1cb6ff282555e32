use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use monodiag::format::{
    parse_diagram, parse_model, parse_signature, print_diagram, render_dot, term_porcelain,
    LoadError,
};
use monodiag::semantics::{default_model, default_signature};
use monodiag::{
    attach, check_coherence, check_interchange, compose_vertical, diagram_iso, eval_term, readout,
    resolve, segmentation, Diagram, LayerError, MatrixModel, ReadoutError, ResolveError, Signature,
};

#[derive(Parser)]
#[command(
    name = "monodiag",
    version,
    about = "Validate, resolve and read out monoidal diagrams"
)]
struct Cli {
    /// Keep the horizontal order exactly as written instead of closing it.
    #[arg(long, global = true)]
    raw: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the diagram axioms and list every violation.
    Validate { file: PathBuf },
    /// Print the layers of a valid diagram, each in horizontal order.
    Segment {
        file: PathBuf,
        #[arg(long)]
        porcelain: bool,
    },
    /// Resolve every layer-skipping edge and print the result.
    Resolve { file: PathBuf },
    /// Print the layered term read from a diagram.
    Readout {
        file: PathBuf,
        #[arg(long)]
        porcelain: bool,
    },
    /// Evaluate a diagram's readout to an exact matrix.
    Eval {
        file: PathBuf,
        /// Matrix model; defaults to the built-in model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        porcelain: bool,
    },
    /// Find an isomorphism between two diagrams.
    Iso { a: PathBuf, b: PathBuf },
    /// Place diagrams side by side, left to right.
    Attach {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Stack `upper` on top of `lower`.
    Compose { lower: PathBuf, upper: PathBuf },
    /// Check the unbiased tensor coherence equations.
    CheckCoherence {
        #[arg(long, default_value_t = 6)]
        max_alpha: usize,
    },
    /// Check the interchange law on random composable quadruples.
    CheckInterchange {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Signature to sample from; defaults to the built-in signature.
        #[arg(long, requires = "model")]
        sig: Option<PathBuf>,
        /// Matrix model; defaults to the built-in model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Print a diagram as a DOT digraph.
    Render { file: PathBuf },
}

/// Exit status 1: the input was understood and the property fails.
/// Exit status 2: the input could not be read or understood.
enum Failure {
    Domain(String),
    Input(String),
}

fn domain(e: impl Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn input(path: &Path, e: impl Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

impl From<ReadoutError> for Failure {
    fn from(e: ReadoutError) -> Self {
        domain(e)
    }
}

impl From<LayerError> for Failure {
    fn from(e: LayerError) -> Self {
        domain(e)
    }
}

impl From<ResolveError> for Failure {
    fn from(e: ResolveError) -> Self {
        domain(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(path, e))
}

/// Loads diagrams, sharing one signature per signature file.
#[derive(Default)]
struct Loader {
    raw: bool,
    sigs: HashMap<PathBuf, Arc<Signature>>,
}

struct Loaded {
    diagram: Diagram,
    sig_path: String,
}

impl Loader {
    fn diagram(&mut self, path: &Path) -> Result<Loaded, Failure> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut sig_path = String::new();
        let sigs = &mut self.sigs;
        let loaded = parse_diagram(
            &text,
            |p| {
                sig_path = p.to_owned();
                let full = base.join(p);
                let key = fs::canonicalize(&full).map_err(|e| e.to_string())?;
                if let Some(sig) = sigs.get(&key) {
                    return Ok(sig.clone());
                }
                let text = fs::read_to_string(&full).map_err(|e| e.to_string())?;
                let sig = Arc::new(parse_signature(&text).map_err(|e| e.to_string())?);
                sigs.insert(key, sig.clone());
                Ok(sig)
            },
            self.raw,
        );
        match loaded {
            Ok(diagram) => Ok(Loaded { diagram, sig_path }),
            Err(LoadError::Closure(e)) => Err(domain(format!("{}: {e}", path.display()))),
            Err(e) => Err(input(path, e)),
        }
    }

    fn valid(&mut self, path: &Path) -> Result<Loaded, Failure> {
        let loaded = self.diagram(path)?;
        if let Some(v) = loaded.diagram.validate().violations.first() {
            return Err(domain(format!("{}: invalid diagram: {v}", path.display())));
        }
        Ok(loaded)
    }
}

fn model(path: Option<&Path>) -> Result<MatrixModel, Failure> {
    match path {
        Some(p) => parse_model(&read(p)?).map_err(|e| input(p, e)),
        None => Ok(default_model()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut loader = Loader {
        raw: cli.raw,
        ..Loader::default()
    };
    match cli.command {
        Command::Validate { file } => {
            let report = loader.diagram(&file)?.diagram.validate();
            for v in &report.violations {
                println!("{v}");
            }
            if !report.is_valid() {
                return Err(domain(format!(
                    "{}: {} violation(s)",
                    file.display(),
                    report.violations.len()
                )));
            }
        }
        Command::Segment { file, porcelain } => {
            let seg = segmentation(&loader.diagram(&file)?.diagram)?;
            for (k, layer) in seg.layers().iter().enumerate() {
                let names: Vec<&str> = layer.iter().map(|v| v.as_str()).collect();
                if porcelain {
                    println!("layer\t{}\t{}", k + 1, names.join("\t"));
                } else {
                    println!("layer {}: {}", k + 1, names.join(" "));
                }
            }
        }
        Command::Resolve { file } => {
            let Loaded { diagram, sig_path } = loader.diagram(&file)?;
            let (resolved, trace) = resolve(&diagram)?;
            print!("{}", print_diagram(&resolved, &sig_path));
            for step in &trace.steps {
                println!(
                    "# incise {} -> {} via {} {}",
                    step.removed.id,
                    step.inserted_node,
                    step.inserted_edges.0.id,
                    step.inserted_edges.1.id
                );
            }
            println!("# resistivity {}", trace.resistivity());
        }
        Command::Readout { file, porcelain } => {
            let t = readout(&loader.diagram(&file)?.diagram)?;
            if porcelain {
                print!("{}", term_porcelain(&t));
            } else {
                print!("{t}");
            }
        }
        Command::Eval {
            file,
            model: path,
            porcelain,
        } => {
            let m = model(path.as_deref())?;
            let d = loader.diagram(&file)?.diagram;
            m.check_covers(d.signature())
                .map_err(|e| input(path.as_deref().unwrap_or(Path::new("<built-in model>")), e))?;
            let t = readout(&d)?;
            let mat = eval_term(&m, &t).map_err(domain)?;
            for r in 0..mat.rows() {
                let row: Vec<String> = (0..mat.cols()).map(|c| mat.get(r, c).to_string()).collect();
                if porcelain {
                    println!("{}", row.join("\t"));
                } else {
                    println!("{};", row.join(","));
                }
            }
        }
        Command::Iso { a, b } => {
            let (da, db) = (loader.diagram(&a)?.diagram, loader.diagram(&b)?.diagram);
            match diagram_iso(&da, &db).map_err(domain)? {
                Some(m) => {
                    for (x, y) in m {
                        println!("{x} -> {y}");
                    }
                }
                None => return Err(domain("not isomorphic")),
            }
        }
        Command::Attach { files } => {
            let mut sig_path = String::new();
            let mut ds = Vec::new();
            for f in &files {
                let l = loader.valid(f)?;
                if sig_path.is_empty() {
                    sig_path = l.sig_path;
                }
                ds.push(l.diagram);
            }
            print!("{}", print_diagram(&attach(&ds)?, &sig_path));
        }
        Command::Compose { lower, upper } => {
            let lo = loader.valid(&lower)?;
            let hi = loader.valid(&upper)?;
            let d = compose_vertical(&lo.diagram, &hi.diagram)?;
            print!("{}", print_diagram(&d, &lo.sig_path));
        }
        Command::CheckCoherence { max_alpha } => {
            let report = check_coherence(max_alpha);
            for c in &report.counterexamples {
                println!("{c}");
            }
            println!(
                "checked {} equations, {} counterexamples",
                report.checked,
                report.counterexamples.len()
            );
            if !report.counterexamples.is_empty() {
                return Err(domain("coherence fails"));
            }
        }
        Command::CheckInterchange {
            trials,
            seed,
            sig,
            model: path,
        } => {
            let sig = match &sig {
                Some(p) => parse_signature(&read(p)?).map_err(|e| input(p, e))?,
                None => default_signature(),
            };
            let m = model(path.as_deref())?;
            m.check_covers(&sig)
                .map_err(|e| input(path.as_deref().unwrap_or(Path::new("<built-in model>")), e))?;
            let report = check_interchange(&sig, &m, trials, seed).map_err(domain)?;
            for f in &report.failures {
                println!("{f}");
            }
            println!(
                "{} trials, {} failures",
                report.trials,
                report.failures.len()
            );
            if !report.failures.is_empty() {
                return Err(domain("interchange fails"));
            }
        }
        Command::Render { file } => {
            print!("{}", render_dot(&loader.diagram(&file)?.diagram)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("monodiag: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("monodiag: {msg}");
            ExitCode::from(2)
        }
    }
}
