use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nearstokes::commands::{self, RunOptions};
use nearstokes::io;
use nearstokes::scene::SceneConfig;
use nearstokes::Vec3;

#[derive(Parser)]
#[command(name = "nearstokes", version, about = "Stokes flow past ellipsoids with corrected near-singular quadrature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scene file (TOML).
    scene: PathBuf,
    /// Evaluate layer potentials without near-singular corrections.
    #[arg(long)]
    no_correction: bool,
    /// Resolution multipliers applied to every chart, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    resolution: Vec<f64>,
    /// RK4 time step.
    #[arg(long)]
    dt: Option<f64>,
    /// GMRES relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Reference data: a density checkpoint (convergence) or a trace CSV (shadow).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output file; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read densities from a checkpoint instead of solving.
    #[arg(long)]
    density: Option<PathBuf>,
    /// Stop particles after this much time.
    #[arg(long)]
    t_max: Option<f64>,
}

impl Common {
    fn run(&self) -> RunOptions {
        RunOptions {
            no_correction: self.no_correction,
            dt: self.dt,
            tol: self.tol,
            t_max: self.t_max,
            density: self.density.clone(),
        }
    }

    fn scale(&self) -> nearstokes::Result<f64> {
        match self.resolution.as_slice() {
            [s] => Ok(*s),
            _ => Err(nearstokes::Error::Invalid("this command takes a single --resolution".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the densities and write a checkpoint.
    Solve(Common),
    /// Maximum velocity error against distance for each resolution.
    Convergence(Common),
    /// Trace streamlines from the seed segment.
    Streamlines(Common),
    /// Plane-to-plane particle traversal.
    Shadow(Common),
    /// Evaluate the velocity at one point and report what each body did.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Target point `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> nearstokes::Result<()> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = SceneConfig::load(&c.scene)?;
            let out = c.out.clone().unwrap_or_else(|| PathBuf::from("densities.bin"));
            let rep = commands::cmd_solve(&cfg, c.scale()?, &c.run(), &out)?;
            eprintln!(
                "{} unknowns, {} iterations, residual {:e}, wrote {}",
                rep.unknowns,
                rep.iterations,
                rep.residual,
                out.display()
            );
        }
        Command::Convergence(c) => {
            let cfg = SceneConfig::load(&c.scene)?;
            let rows = commands::cmd_convergence(&cfg, &c.resolution, c.reference.as_deref(), &c.run())?;
            commands::write_convergence(c.out.as_deref(), &rows)?;
        }
        Command::Streamlines(c) => {
            let cfg = SceneConfig::load(&c.scene)?;
            let lines = commands::cmd_streamlines(&cfg, c.scale()?, &c.run())?;
            io::write_csv(c.out.as_deref(), &io::STREAMLINE_HEADER, io::streamline_rows(&lines))?;
        }
        Command::Shadow(c) => {
            let cfg = SceneConfig::load(&c.scene)?;
            let recs = commands::cmd_shadow(&cfg, c.scale()?, c.reference.as_deref(), &c.run())?;
            io::write_csv(c.out.as_deref(), &io::TRACE_HEADER, io::trace_rows(&recs))?;
        }
        Command::Eval { common: c, at } => {
            let cfg = SceneConfig::load(&c.scene)?;
            let x = parse_point(&at)?;
            let (u, probes) = commands::cmd_eval(&cfg, c.scale()?, x, &c.run())?;
            println!("velocity {} {} {}", io::fmt(u.x), io::fmt(u.y), io::fmt(u.z));
            for p in probes {
                let f = p.flags;
                println!(
                    "body {} chart {:?} d {} d_up {} correct {} roundoff {}",
                    p.body,
                    f.chart,
                    f.d.map(io::fmt).unwrap_or_else(|| "-".into()),
                    io::fmt(f.d_up),
                    f.corrected,
                    f.roundoff
                );
            }
        }
    }
    Ok(())
}

fn parse_point(s: &str) -> nearstokes::Result<Vec3> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| nearstokes::Error::Invalid(format!("bad --at {s:?}: {e}")))?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(nearstokes::Error::Invalid(format!("--at needs three values, got {}", v.len()))),
    }
}
