use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distortion_core::scalar::Precision;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "distortion",
    version,
    about = "Verified distortion witnesses, demos and foliation splitting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Ambient dimension of planar maps.
    #[arg(long, global = true, default_value_t = 2)]
    pub dim: usize,
    /// Number of witness slots.
    #[arg(long = "nmax", global = true, default_value_t = 6)]
    pub n_max: usize,
    /// Verification tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Points per axis of verification grids.
    #[arg(long, global = true, default_value_t = 17)]
    pub grid: usize,
    /// Random sample count for sampled checks.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Input JSON document.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// JSON report path (stdout when absent for fragment and verify).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV table path (stdout when absent for plan, witness and demo).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Evaluate words in double-double arithmetic.
    #[arg(long, global = true)]
    pub double_double: bool,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Input-independent witness plan: l_n, l̃_n, k_n and the geometry checks.
    Plan {
        /// Contraction factor of the radial generator.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Verified words for the targets of a witness session document.
    Witness,
    /// Distortion demo for a rotation of the circle or the 2-sphere.
    Demo {
        #[arg(long, value_enum, default_value_t = DemoKind::Circle)]
        kind: DemoKind,
        /// Rotation angle: turns for the circle (golden mean by default),
        /// radians for the sphere (1 by default).
        #[arg(long)]
        angle: Option<f64>,
        /// Override the schedule multiplier in p(n) = (n+1) k_n scale.
        #[arg(long)]
        scale: Option<u64>,
        /// Snap p(n) to continued-fraction denominators (circle only).
        #[arg(long)]
        recurrence: bool,
    },
    /// Foliation decomposition of a map of the cube, optionally split into slab pieces.
    Fragment {
        /// Use the built-in random perturbation of this amplitude instead of --input.
        #[arg(long)]
        amplitude: Option<f64>,
        /// Number of slabs; 0 skips fragmentation.
        #[arg(long, default_value_t = 0)]
        slabs: usize,
        #[arg(long, default_value_t = 0)]
        slab_axis: usize,
        #[arg(long, default_value_t = 0.6)]
        overlap: f64,
    },
    /// Round-trip and support check of a map expression.
    Verify {
        /// Sampling radius (default: declared support + 1).
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Circle,
    Sphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Plan {
        lambda: Option<f64>,
    },
    Witness,
    Demo {
        kind: DemoKind,
        angle: f64,
        scale: Option<u64>,
        recurrence: bool,
    },
    Fragment {
        amplitude: Option<f64>,
        slabs: usize,
        slab_axis: usize,
        overlap: f64,
    },
    Verify {
        radius: Option<f64>,
    },
}

/// Everything a run depends on; echoed in JSON reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub input: Option<PathBuf>,
    pub dim: usize,
    pub n_max: usize,
    pub tol: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub precision: Precision,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let c = cli.common;
        let command = match cli.command {
            CommandArgs::Plan { lambda } => Command::Plan { lambda },
            CommandArgs::Witness => Command::Witness,
            CommandArgs::Demo {
                kind,
                angle,
                scale,
                recurrence,
            } => Command::Demo {
                kind,
                angle: angle.unwrap_or(match kind {
                    DemoKind::Circle => golden(),
                    DemoKind::Sphere => 1.0,
                }),
                scale,
                recurrence,
            },
            CommandArgs::Fragment {
                amplitude,
                slabs,
                slab_axis,
                overlap,
            } => Command::Fragment {
                amplitude,
                slabs,
                slab_axis,
                overlap,
            },
            CommandArgs::Verify { radius } => Command::Verify { radius },
        };
        RunConfig {
            command,
            input: c.input,
            dim: c.dim,
            n_max: c.n_max,
            tol: c.tol,
            grid: c.grid,
            samples: c.samples,
            seed: c.seed,
            precision: if c.double_double {
                Precision::DoubleDouble
            } else {
                Precision::Double
            },
            out: c.out,
            csv: c.csv,
        }
    }
}
