use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use capgen::audit::{design_report, moment_audit, AuditSpec};
use capgen::bounds::{bound_table, to_csv};
use capgen::caps::{cap_discrepancy, Reference, SeedMode};
use capgen::config::load_config;
use capgen::error::{HarnessError, Result};
use capgen::gw::{gw_demo, Graph};
use capgen_core::pipeline::{make_schedule, GaussianGenerator, Params, SphereGenerator};
use capgen_core::prp::default_out_dim;
use capgen_core::SeedStream;

#[derive(Parser)]
#[command(name = "capgen", version, about = "Pseudorandom points on the sphere that fool spherical caps")]
struct Cli {
    /// JSON config: constants, base-case floor, generator-set overrides.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a seed into a point.
    Gen(GenArgs),
    /// Seed length and dimension ladder for (n, ε).
    Seedlen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Empirical checks of caps, projection moments and design deviation.
    #[command(subcommand)]
    Verify(Verify),
    /// CSV table of the moment-to-CDF distance bound.
    Bounds(BoundsArgs),
    /// Max-cut hyperplane rounding driven by generator outputs.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    eps: f64,
    /// Hex seed; bits past its end come from a SHA-256 expansion.
    #[arg(long)]
    seed: String,
    /// Rescale by a discretized χ_n radius.
    #[arg(long)]
    gaussian: bool,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    out: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Raw,
}

#[derive(Subcommand)]
enum Verify {
    /// Cap discrepancy of the generator against the uniform measure.
    Caps {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 50)]
        caps: usize,
        /// `exhaustive` or `sampled:M`.
        #[arg(long, default_value = "sampled:100000")]
        seed_mode: String,
        /// `exact` or `mc:M`.
        #[arg(long, default_value = "exact")]
        reference: String,
        #[arg(long, default_value_t = 1)]
        cap_seed: u64,
        /// Hex master seed for sampled seeds and Monte-Carlo references.
        #[arg(long, default_value = "00")]
        master: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Moments of projected lengths against the Beta law.
    Moments {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        design_samples: usize,
        /// Defaults to ⌈√dim⌉.
        #[arg(long)]
        mtilde: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Walk length; derived from the order and ε when omitted.
        #[arg(long)]
        walk: Option<usize>,
        #[arg(long, default_value = "00")]
        master: String,
    },
    /// Distance of the walk design from Haar.
    Design {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        walk: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value = "00")]
        master: String,
    },
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    k_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    delta_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    eps_list: Vec<f64>,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    mtilde: usize,
}

#[derive(Subcommand)]
enum Demo {
    /// Hyperplane rounding of a max-cut embedding.
    Gw {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        /// A count, or `exhaustive`.
        #[arg(long, default_value = "1000")]
        seeds: String,
        #[arg(long, default_value_t = 10_000)]
        baseline: usize,
        #[arg(long, default_value = "00")]
        master: String,
    },
}

fn hex_bytes(s: &str) -> Result<Vec<u8>> {
    Ok(SeedStream::from_hex(s, None)?.seed_bytes().to_vec())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct GenOutput<'a> {
    dim: usize,
    eps: f64,
    gaussian: bool,
    seed_length: usize,
    point: &'a [f64],
}

#[derive(Serialize)]
struct SeedlenOutput {
    dim: usize,
    eps: f64,
    seed_length: usize,
    gaussian_seed_length: usize,
    ladder: Vec<usize>,
    eps_prime: f64,
}

fn run(cli: Cli) -> Result<String> {
    let params = match &cli.config {
        Some(p) => load_config(p)?,
        None => Params::default(),
    };
    Ok(match cli.command {
        Command::Gen(a) => {
            let mut stream = SeedStream::from_hex(&a.seed, None)?;
            let (bits, x) = if a.gaussian {
                let g = GaussianGenerator::new(a.dim, a.eps, &params)?;
                (g.seed_length(), g.generate(&mut stream)?)
            } else {
                let g = SphereGenerator::new(a.dim, a.eps, &params)?;
                (g.seed_length(), g.generate(&mut stream)?)
            };
            match a.out {
                OutFormat::Json => json(&GenOutput {
                    dim: a.dim,
                    eps: a.eps,
                    gaussian: a.gaussian,
                    seed_length: bits,
                    point: &x,
                }),
                OutFormat::Raw => x.iter().map(|v| format!("{v:e}\n")).collect(),
            }
        }
        Command::Seedlen { dim, eps } => {
            let s = make_schedule(dim, eps, &params)?;
            json(&SeedlenOutput {
                dim,
                eps,
                seed_length: SphereGenerator::new(dim, eps, &params)?.seed_length(),
                gaussian_seed_length: GaussianGenerator::new(dim, eps, &params)?.seed_length(),
                ladder: s.levels,
                eps_prime: s.eps_prime,
            })
        }
        Command::Verify(Verify::Caps {
            dim,
            eps,
            caps,
            seed_mode,
            reference,
            cap_seed,
            master,
            out,
        }) => {
            let report = cap_discrepancy(
                dim,
                eps,
                &params,
                caps,
                &seed_mode.parse::<SeedMode>()?,
                &reference.parse::<Reference>()?,
                cap_seed,
                &hex_bytes(&master)?,
            )?;
            let text = json(&report);
            match out {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|source| HarnessError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    String::new()
                }
                None => text,
            }
        }
        Command::Verify(Verify::Moments {
            dim,
            order,
            design_samples,
            mtilde,
            eps,
            walk,
            master,
        }) => json(&moment_audit(
            &AuditSpec {
                m: dim,
                m_tilde: mtilde.unwrap_or_else(|| default_out_dim(dim)),
                k_mom: order,
                eps,
                walk_length: walk,
                samples: design_samples,
                master: hex_bytes(&master)?,
                direction_seed: 0,
            },
            &params,
        )?),
        Command::Verify(Verify::Design {
            dim,
            degree,
            walk,
            samples,
            master,
        }) => json(&design_report(dim, degree, walk, samples, &params, &hex_bytes(&master)?)?),
        Command::Bounds(b) => to_csv(&bound_table(&b.k_list, &b.delta_list, &b.eps_list, b.m, b.mtilde)?),
        Command::Demo(Demo::Gw {
            graph,
            eps,
            seeds,
            baseline,
            master,
        }) => {
            let g = Graph::parse(&capgen::error::read_file(&graph)?)?;
            let mode = if seeds == "exhaustive" {
                SeedMode::Exhaustive
            } else {
                let m: usize = seeds
                    .parse()
                    .ok()
                    .filter(|&m| m > 0)
                    .ok_or_else(|| capgen_core::Error::InvalidArgument(format!("bad seed count {seeds:?}")))?;
                SeedMode::Sampled(m)
            };
            json(&gw_demo(&g, eps, &mode, &params, &hex_bytes(&master)?, baseline)?)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("capgen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
