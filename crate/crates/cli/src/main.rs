use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aarhus::diagram::EnumerationLimits;
use aarhus::gaussian::{self, LinkingMatrix, PerturbedGaussian};
use aarhus::io::{self, LabeledSum};
use aarhus::weights::{self, LieData};
use aarhus::{maps, ogl, Error, GradedSum, Kernel, Result, Space, Q};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "aarhus", version, about = "Exact computations with Jacobi diagrams and the Aarhus integral")]
struct Cli {
    /// Truncation degree.
    #[arg(long, global = true)]
    truncate: Option<usize>,
    /// Directory for cached quotient bases.
    #[arg(long, global = true, env = "AARHUS_CACHE")]
    cache: Option<PathBuf>,
    /// Comma-separated label names.
    #[arg(long, global = true, value_delimiter = ',')]
    labels: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of the graded pieces, one line per degree.
    Dims {
        #[arg(long)]
        space: String,
        #[arg(long)]
        max_degree: usize,
        /// Dimensions of primitives (Aempty only).
        #[arg(long)]
        primitives: bool,
    },
    /// Normal form of a sum over the quotient bases.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Symmetrization map B -> Aup.
    Chi {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Inverse of chi, Aup -> B.
    Sigma {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Cabling of a one-line element onto several lines.
    Cable {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        to: Vec<String>,
    },
    /// Assembles the corrected invariant from Z and nu.
    Zcheck {
        #[arg(long)]
        z: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
    /// Formal Gaussian integration of a perturbed Gaussian in B.
    Integrate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Unnormalized invariant from corrected tangle data.
    Aarhus0 {
        #[arg(long)]
        z: PathBuf,
    },
    /// Normalized invariant.
    Aarhus {
        #[arg(long)]
        z: PathBuf,
        #[arg(long)]
        uplus: PathBuf,
        #[arg(long)]
        uminus: PathBuf,
    },
    /// Signature of a linking matrix.
    Signature {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Lie algebra weight of a closed-diagram sum, graded by degree.
    Weight {
        #[arg(long)]
        lie: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Compares integration followed by the weight system with the Wick pairing.
    Wickcheck {
        #[arg(long)]
        lie: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// OGL expansion of a manifold diagram as PD link data.
    Ogl {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_parse_error() || matches!(e, Error::Io(_)) { 1 } else { 2 })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a sum container, or a single diagram taken with coefficient 1.
fn read_sum(path: &Path, truncate: Option<usize>) -> Result<LabeledSum> {
    let text = read(path)?;
    match io::parse_sum(&text) {
        Ok(s) => Ok(s),
        Err(sum_err) => match io::parse_diagram(&text) {
            Ok((space, names, d)) => {
                let n = truncate.unwrap_or(d.degree()).max(d.degree());
                Ok(LabeledSum::new(names.clone(), GradedSum::from_diagram(space, names.len(), n, &d)))
            }
            Err(_) => Err(sum_err),
        },
    }
}

fn kernel(cli: &Cli) -> Kernel {
    let k = Kernel::new(EnumerationLimits::default());
    match &cli.cache {
        Some(dir) => k.with_cache_dir(dir),
        None => k,
    }
}

fn truncate(cli: &Cli, s: &GradedSum) -> usize {
    cli.truncate.unwrap_or(s.max_degree())
}

fn lie_data(name: &str) -> Result<LieData> {
    match name {
        "so3" => Ok(LieData::so3()),
        "sl2" => Ok(LieData::sl2()),
        path => io::parse_lie(&read(Path::new(path))?),
    }
}

fn sum_out(names: &[String], sum: GradedSum) -> String {
    io::serialize_sum(&LabeledSum::new(names.to_vec(), sum))
}

fn run(cli: Cli) -> Result<String> {
    let k = kernel(&cli);
    match &cli.command {
        Command::Dims { space, max_degree, primitives } => {
            let space = Space::from_tag(space).ok_or_else(|| Error::Parse { line: 0, expected: "space Aempty, Aup or B".into() })?;
            let labels = if space == Space::Aempty { 0 } else { cli.labels.len() };
            if *primitives && space != Space::Aempty {
                return Err(Error::SpaceMismatch("--primitives applies to Aempty".into()));
            }
            let mut out = String::new();
            for m in 0..=*max_degree {
                let n = if *primitives { k.primitive_dimension(m)? } else { k.dimension(space, labels, m)? };
                out.push_str(&format!("{n}\n"));
            }
            Ok(out)
        }
        Command::Reduce { input } => {
            let s = read_sum(input, cli.truncate)?;
            Ok(sum_out(&s.names, k.normalize(&s.sum.truncated(truncate(&cli, &s.sum)))?))
        }
        Command::Chi { input } => {
            let s = read_sum(input, cli.truncate)?;
            Ok(sum_out(&s.names, maps::chi(&s.sum.truncated(truncate(&cli, &s.sum)))?))
        }
        Command::Sigma { input } => {
            let s = read_sum(input, cli.truncate)?;
            Ok(sum_out(&s.names, maps::sigma(&k, &s.sum.truncated(truncate(&cli, &s.sum)))?))
        }
        Command::Cable { input, to } => {
            let s = read_sum(input, cli.truncate)?;
            if to.is_empty() {
                return Err(Error::SpaceMismatch("--to needs at least one line".into()));
            }
            Ok(sum_out(to, maps::cable_delta(&s.sum.truncated(truncate(&cli, &s.sum)), to.len())?))
        }
        Command::Zcheck { z, nu } => {
            let z = read_sum(z, cli.truncate)?;
            let nu = read_sum(nu, cli.truncate)?;
            let n = truncate(&cli, &z.sum);
            Ok(sum_out(&z.names, maps::assemble_zcheck(&z.sum.truncated(n), &nu.sum.truncated(n))?))
        }
        Command::Integrate { input } => {
            let g = read_sum(input, cli.truncate)?;
            let pg = gaussian::split_gaussian(&k, &g.sum)?;
            Ok(sum_out(&[], gaussian::integrate_fg(&pg, truncate(&cli, &g.sum))?))
        }
        Command::Aarhus0 { z } => {
            let z = read_sum(z, None)?;
            Ok(sum_out(&[], gaussian::aarhus0(&k, &z.sum, truncate(&cli, &z.sum))?))
        }
        Command::Aarhus { z, uplus, uminus } => {
            let z = read_sum(z, None)?;
            let up = read_sum(uplus, None)?;
            let um = read_sum(uminus, None)?;
            Ok(sum_out(&[], gaussian::aarhus(&k, &z.sum, &up.sum, &um.sum, truncate(&cli, &z.sum))?))
        }
        Command::Signature { matrix } => {
            let (_, m) = io::parse_matrix(&read(matrix)?)?;
            let sig = gaussian::signature(&LinkingMatrix::new(m)?);
            Ok(format!("sigma+ {}\nsigma- {}\n", sig.sigma_plus, sig.sigma_minus))
        }
        Command::Weight { lie, input } => {
            let g = lie_data(lie)?;
            let s = read_sum(input, cli.truncate)?;
            let series = weights::rozansky_series(&g, &s.sum.truncated(truncate(&cli, &s.sum)))?;
            Ok(io::serialize_series(&series))
        }
        Command::Wickcheck { lie, input, trials, seed } => {
            let g = lie_data(lie)?;
            let s = read_sum(input, cli.truncate)?;
            let n = truncate(&cli, &s.sum);
            let pg = gaussian::split_gaussian(&k, &s.sum)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = String::new();
            let mut failures = 0;
            for t in 0..*trials {
                // trial 0 is the perturbation itself; later trials reweight its terms
                let perturbation = if t == 0 {
                    pg.perturbation.clone()
                } else {
                    let mut p = GradedSum::zero(Space::B, pg.perturbation.labels(), pg.perturbation.max_degree());
                    for (d, c) in pg.perturbation.iter() {
                        p.add_canonical(d.clone(), c * Q::from_integer(rng.gen_range(-3i64..=3).into()));
                    }
                    p
                };
                let trial = PerturbedGaussian { covariance: pg.covariance.clone(), perturbation };
                let lhs = weights::tg_closed(&g, &gaussian::integrate_fg(&trial, n)?)?;
                let rhs = weights::wick_pair(&weights::tg_open(&g, &trial.perturbation)?, &trial.covariance, &g, n)?;
                let ok = lhs == rhs;
                failures += usize::from(!ok);
                out.push_str(&format!(
                    "trial {t} integrate {} wick {} {}\n",
                    aarhus::sum::format_q(&lhs),
                    aarhus::sum::format_q(&rhs),
                    if ok { "ok" } else { "MISMATCH" }
                ));
            }
            if failures > 0 {
                eprint!("{out}");
                return Err(Error::SolveFailure(format!("{failures} of {trials} trials disagree")));
            }
            Ok(out)
        }
        Command::Ogl { input, out } => {
            let (_, _, d) = io::parse_diagram(&read(input)?)?;
            let e = ogl::ogl_expand(&d)?;
            let text = io::serialize_links(&e.terms);
            match out {
                Some(path) => {
                    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
    }
}
