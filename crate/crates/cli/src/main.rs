//! `rmf`: command-line front end for `rmf-core`.
//!
//! Every run prints (or writes to `--out`) a JSON document holding the
//! command, library version, seed and parameters next to the results, so
//! the same invocation replays byte for byte. Exit codes: 0 success,
//! 1 computation failure or failed check, 2 parameter error, 3 resource
//! guard.

mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rmf_core::analytic::{
    lattice_nb_first_moment_bound, ln_path_increase_upper_bound, m_critical, out_of_order_bound,
    path_increase_upper_bound, regular_tree_first_moment_bound, theta_bounds, theta_critical,
};
use rmf_core::bricklayer::{
    bricks_in_x_range, compute_a, distance_gap_check, good_brick_map, goodness_probability,
    open_implies_increasing_check, simulate_bricklayer, BrickConfig,
};
use rmf_core::lattice_sim::{
    accessible_set, annotate_min_theta, crossing_probability, export_records, sweep_theta, write_csv, LatticeConfig,
    PathMode, Region,
};
use rmf_core::numfmt::sig17;
use rmf_core::tree_sim::{estimate_theta_c_tree, martingale_trace, survival_probability, Offspring, DEFAULT_CAP};
use rmf_core::{Error, LabelField, Metric};
use serde_json::{json, Value};

use output::{to_json_bytes, write_atomic, Echo};

/// Seed used when neither `--seed` nor `RMF_SEED` is given.
const DEFAULT_SEED: u64 = 2024;

/// Largest θ grid accepted by `--grid`.
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Parser)]
#[command(name = "rmf", version, about = "Accessibility percolation with random fitness labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; replica k uses a stream derived from (seed, k).
    #[arg(long, env = "RMF_SEED", default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write here instead of stdout. Written only if the run succeeds.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Non-backtracking: every step increases the distance to the origin.
    Nb,
    All,
}

impl From<Mode> for PathMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Nb => PathMode::NonBacktracking,
            Mode::All => PathMode::AllPaths,
        }
    }
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_offspring(s: &str) -> Result<Offspring, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `lo:hi:step`, inclusive of both ends.
#[derive(Clone, Debug)]
struct Grid {
    text: String,
    points: Vec<f64>,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err("expected lo:hi:step".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err("need finite lo <= hi and step > 0".into());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > MAX_GRID_POINTS {
        return Err(format!("{n} grid points exceeds the limit of {MAX_GRID_POINTS}"));
    }
    // Rounded so that 0.1 + 2·0.1 echoes as 0.3.
    let points = (0..n)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    Ok(Grid {
        text: s.to_string(),
        points,
    })
}

#[derive(Subcommand)]
enum Command {
    /// Critical mean offspring m_c(θ) and/or critical θ_c(m) of a tree.
    #[command(group(ArgGroup::new("input").required(true).multiple(true).args(["theta", "m"])))]
    Critical {
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bracket 1/(em) <= θ_c(m) <= 1 - sqrt(1 - 1/m) and θ_c itself.
    Bounds {
        #[arg(long)]
        m: f64,
        /// Branching number for the general-tree lower bound.
        #[arg(long)]
        br: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// (1+θh)^{h+1}/(h+1)! and related first-moment bounds.
    Pathbound {
        #[arg(long, visible_alias = "h")]
        horizon: u64,
        #[arg(long)]
        theta: f64,
        /// Also report the out-of-order bound for this many uniforms.
        #[arg(long)]
        n: Option<u64>,
        /// Also report the first moment for a tree with this mean offspring.
        #[arg(long)]
        m: Option<f64>,
        /// Also report the non-backtracking lattice first moment in this dimension.
        #[arg(long)]
        dim: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Survival of the accessible tree at one θ, or a θ sweep with its crossing.
    #[command(group(ArgGroup::new("at").required(true).args(["theta", "grid"])))]
    TreeSim {
        /// det:K, poisson:M, binomial:N:P or geometric:M.
        #[arg(long, default_value = "det:2", value_parser = parse_offspring)]
        offspring: Offspring,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[arg(long, default_value_t = 2000)]
        replicas: u64,
        /// Frontier cap; capped replicas count as survivors.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Per-generation mean of the additive martingale W_n.
    TreeMartingale {
        #[arg(long, default_value_t = 3.0)]
        m: f64,
        #[arg(long)]
        theta: f64,
        /// Defaults to poisson:M.
        #[arg(long, value_parser = parse_offspring)]
        offspring: Option<Offspring>,
        /// Number of generations.
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: u64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Probability that the accessible set reaches distance R.
    LatticeSim {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 500)]
        replicas: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Crossing probability over a θ grid.
    LatticeSweep {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, default_value_t = 200)]
        replicas: u64,
        #[command(flatten)]
        common: Common,
    },
    /// The accessible set of one field, optionally annotated with the
    /// smallest grid θ at which each site is accessible.
    LatticeExport {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        #[command(flatten)]
        common: Common,
    },
    /// n-bricklayer percolation frequency with witness paths.
    Bricklayer {
        #[command(flatten)]
        brick: BrickArgs,
        /// Bricks with x <= depth are explored.
        #[arg(long, default_value_t = 50)]
        depth: u64,
        #[arg(long, default_value_t = 200)]
        replicas: u64,
        /// Leave out the per-replica good-brick maps.
        #[arg(long)]
        no_maps: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Goodness probability, A_q(n), distance-gap scan and, with --theta,
    /// the open-implies-increasing check.
    BricklayerCheck {
        #[command(flatten)]
        brick: BrickArgs,
        #[arg(long)]
        theta: Option<f64>,
        /// Bricks with 2 <= x <= depth are checked.
        #[arg(long, default_value_t = 6)]
        depth: u64,
        /// Fields sampled by the increasing check.
        #[arg(long, default_value_t = 100)]
        replicas: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct LatticeArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Exponent of the ℓ^q distance; `inf` for the sup norm.
    #[arg(long, default_value = "1", value_parser = parse_metric)]
    q: Metric,
    #[arg(long, value_enum, default_value_t = Mode::Nb)]
    mode: Mode,
    #[arg(long, default_value_t = 100)]
    radius: i64,
    /// Restrict to the closed non-negative orthant.
    #[arg(long)]
    orthant: bool,
}

impl LatticeArgs {
    fn config(&self, theta: f64, seed: u64) -> Result<LatticeConfig, Error> {
        let c = LatticeConfig::new(self.dim, self.q, self.mode.into(), self.radius, theta, seed)?;
        Ok(if self.orthant { c.with_region(Region::Orthant) } else { c })
    }

    fn echo(&self) -> Value {
        json!({
            "dim": self.dim,
            "q": self.q.to_string(),
            "mode": match self.mode { Mode::Nb => "nb", Mode::All => "all" },
            "radius": self.radius,
            "region": if self.orthant { "orthant" } else { "full" },
        })
    }
}

#[derive(Args, Clone)]
struct BrickArgs {
    /// Brick width n (even, >= 4).
    #[arg(long, default_value_t = 64)]
    n_brick: u64,
    #[arg(long, default_value = "inf", value_parser = parse_metric)]
    q: Metric,
}

impl BrickArgs {
    fn config(&self) -> Result<BrickConfig, Error> {
        BrickConfig::new(self.n_brick, self.q)
    }
}

/// A finished run: bytes ready to write, and whether a check failed.
struct Rendered {
    bytes: Vec<u8>,
    check_failed: bool,
}

#[derive(Debug)]
enum Failure {
    Param(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Param(_) => 2,
            Failure::Core(Error::InvalidParameter { .. } | Error::PrecisionFloor { .. }) => 2,
            Failure::Core(Error::ResourceGuard(_) | Error::Truncated { .. }) => 3,
            Failure::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Param(s) => write!(f, "invalid parameter: {s}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn json_only(common: &Common, command: &str) -> Result<(), Failure> {
    if common.format == Format::Csv {
        return Err(Failure::Param(format!("`{command}` has JSON output only")));
    }
    Ok(())
}

fn json_out(echo: &Echo, results: Value) -> Rendered {
    Rendered {
        bytes: to_json_bytes(&echo.json(results)),
        check_failed: false,
    }
}

fn csv_out(echo: &Echo, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Rendered {
    let mut s = echo.csv_header();
    s.push_str(&header.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    Rendered {
        bytes: s.into_bytes(),
        check_failed: false,
    }
}

fn run(command: &Command) -> Result<Rendered, Failure> {
    match command {
        Command::Critical { theta, m, common } => {
            json_only(common, "critical")?;
            let echo = Echo {
                command: "critical",
                seed: common.seed,
                params: json!({ "theta": theta, "m": m }),
            };
            let mut res = serde_json::Map::new();
            if let Some(t) = theta {
                res.insert("m_c".into(), m_critical(*t)?.into());
            }
            if let Some(m) = m {
                res.insert("theta_c".into(), theta_critical(*m)?.into());
            }
            Ok(json_out(&echo, Value::Object(res)))
        }
        Command::Bounds { m, br, common } => {
            json_only(common, "bounds")?;
            let r = theta_bounds(*m, *br)?;
            let echo = Echo {
                command: "bounds",
                seed: common.seed,
                params: json!({ "m": m, "br": br }),
            };
            Ok(json_out(
                &echo,
                json!({
                    "lower": r.lower,
                    "upper": r.upper,
                    "exact": r.exact,
                    "branching_lower": r.branching_lower,
                }),
            ))
        }
        Command::Pathbound {
            horizon,
            theta,
            n,
            m,
            dim,
            common,
        } => {
            json_only(common, "pathbound")?;
            if !(0.0..=1.0).contains(theta) {
                return Err(Failure::Param(format!("theta = {theta} must lie in [0, 1]")));
            }
            let echo = Echo {
                command: "pathbound",
                seed: common.seed,
                params: json!({ "horizon": horizon, "theta": theta, "n": n, "m": m, "dim": dim }),
            };
            let mut res = json!({
                "bound": path_increase_upper_bound(*horizon, *theta),
                "ln_bound": ln_path_increase_upper_bound(*horizon, *theta),
            });
            if let Some(n) = n {
                res["out_of_order_bound"] = out_of_order_bound(*n, *horizon, *theta)?.into();
            }
            if let Some(m) = m {
                res["tree_first_moment"] = regular_tree_first_moment_bound(*m, *horizon, *theta)?.into();
            }
            if let Some(d) = dim {
                res["lattice_nb_first_moment"] = lattice_nb_first_moment_bound(*d, *horizon, *theta)?.into();
            }
            Ok(json_out(&echo, res))
        }
        Command::TreeSim {
            offspring,
            theta,
            grid,
            horizon,
            replicas,
            cap,
            common,
        } => {
            let field = LabelField::new(common.seed);
            let echo = Echo {
                command: "tree-sim",
                seed: common.seed,
                params: json!({
                    "offspring": offspring.to_string(),
                    "theta": theta,
                    "grid": grid.as_ref().map(|g| g.text.clone()),
                    "horizon": horizon,
                    "replicas": replicas,
                    "cap": cap,
                }),
            };
            if let Some(t) = theta {
                let run = survival_probability(*t, offspring, *horizon, *replicas, *cap, &field)?;
                return Ok(match common.format {
                    Format::Json => json_out(
                        &echo,
                        json!({
                            "survival": run.estimate(),
                            "alive": run.alive,
                            "truncated": run.truncated,
                        }),
                    ),
                    Format::Csv => csv_out(
                        &echo,
                        &["generation", "alive", "survival"],
                        run.alive.iter().enumerate().map(|(g, &a)| {
                            vec![g.to_string(), a.to_string(), sig17(a as f64 / *replicas as f64)]
                        }),
                    ),
                });
            }
            let grid = grid.as_ref().expect("clap requires --theta or --grid");
            let curve = estimate_theta_c_tree(offspring, &grid.points, *horizon, *replicas, *cap, &field)?;
            let half = horizon / 2;
            let ratio = |a: &[u64]| if a[half] == 0 { 0.0 } else { a[*horizon] as f64 / a[half] as f64 };
            let mean = offspring.mean();
            let reference = if mean > 1.0 { theta_critical(mean).ok() } else { None };
            Ok(match common.format {
                Format::Json => json_out(
                    &echo,
                    json!({
                        "points": curve.runs.iter().map(|r| json!({
                            "theta": r.theta,
                            "survival": r.estimate(),
                            "ratio": ratio(&r.alive),
                            "truncated": r.truncated,
                        })).collect::<Vec<_>>(),
                        "crossing": curve.crossing,
                        "crossing_grid": curve.crossing_grid,
                        "half_plateau": curve.half_plateau,
                        "theta_critical": reference,
                    }),
                ),
                Format::Csv => csv_out(
                    &echo,
                    &["theta", "survival", "stderr", "ratio", "truncated"],
                    curve.runs.iter().map(|r| {
                        let e = r.estimate();
                        vec![
                            sig17(r.theta),
                            sig17(e.value),
                            sig17(e.stderr),
                            sig17(ratio(&r.alive)),
                            r.truncated.to_string(),
                        ]
                    }),
                ),
            })
        }
        Command::TreeMartingale {
            m,
            theta,
            offspring,
            horizon,
            replicas,
            cap,
            common,
        } => {
            let offspring = match offspring {
                Some(o) => *o,
                None => Offspring::Poisson { mean: *m },
            };
            let echo = Echo {
                command: "tree-martingale",
                seed: common.seed,
                params: json!({
                    "m": m,
                    "theta": theta,
                    "offspring": offspring.to_string(),
                    "horizon": horizon,
                    "replicas": replicas,
                    "cap": cap,
                }),
            };
            let field = LabelField::new(common.seed);
            let tr = martingale_trace(*m, *theta, &offspring, *horizon, *replicas, *cap, &field)?;
            Ok(match common.format {
                Format::Json => json_out(
                    &echo,
                    json!({
                        "lambda": tr.lambda,
                        "values": tr.values,
                        "mean_frontier": tr.mean_frontier,
                        "max_deviation_sigmas": tr.max_deviation_sigmas(),
                    }),
                ),
                Format::Csv => csv_out(
                    &echo,
                    &["generation", "mean", "stderr", "mean_frontier"],
                    tr.values.iter().zip(&tr.mean_frontier).enumerate().map(|(g, (w, f))| {
                        vec![g.to_string(), sig17(w.value), sig17(w.stderr), sig17(*f)]
                    }),
                ),
            })
        }
        Command::LatticeSim {
            lattice,
            theta,
            replicas,
            common,
        } => {
            json_only(common, "lattice-sim")?;
            let mut params = lattice.echo();
            params["theta"] = (*theta).into();
            params["replicas"] = (*replicas).into();
            let echo = Echo {
                command: "lattice-sim",
                seed: common.seed,
                params,
            };
            let est = crossing_probability(&lattice.config(*theta, common.seed)?, *replicas)?;
            Ok(json_out(&echo, json!({ "probability": est.estimate })))
        }
        Command::LatticeSweep {
            lattice,
            grid,
            replicas,
            common,
        } => {
            let mut params = lattice.echo();
            params["grid"] = grid.text.clone().into();
            params["replicas"] = (*replicas).into();
            let echo = Echo {
                command: "lattice-sweep",
                seed: common.seed,
                params,
            };
            let first = *grid.points.first().expect("grid is nonempty");
            let curve = sweep_theta(&lattice.config(first, common.seed)?, &grid.points, *replicas)?;
            Ok(match common.format {
                Format::Json => json_out(
                    &echo,
                    json!({
                        "points": curve.points.iter().map(|p| json!({
                            "theta": p.theta,
                            "probability": p.estimate,
                        })).collect::<Vec<_>>(),
                        "crossing": curve.crossing,
                    }),
                ),
                Format::Csv => csv_out(
                    &echo,
                    &["theta", "probability", "stderr", "samples"],
                    curve.points.iter().map(|p| {
                        vec![
                            sig17(p.theta),
                            sig17(p.estimate.value),
                            sig17(p.estimate.stderr),
                            p.estimate.samples.to_string(),
                        ]
                    }),
                ),
            })
        }
        Command::LatticeExport {
            lattice,
            theta,
            grid,
            common,
        } => {
            let mut params = lattice.echo();
            params["theta"] = (*theta).into();
            params["grid"] = grid.as_ref().map(|g| g.text.clone()).into();
            let echo = Echo {
                command: "lattice-export",
                seed: common.seed,
                params,
            };
            let (set, min_theta) = match (theta, grid) {
                (Some(t), None) => (accessible_set(&lattice.config(*t, common.seed)?)?, None),
                (None, Some(g)) => {
                    let top = *g.points.last().expect("grid is nonempty");
                    let (set, mt) = annotate_min_theta(&lattice.config(top, common.seed)?, &g.points)?;
                    (set, Some(mt))
                }
                _ => return Err(Failure::Param("give exactly one of --theta and --grid".into())),
            };
            let records = export_records(&set, min_theta.as_deref());
            Ok(match common.format {
                Format::Json => json_out(
                    &echo,
                    json!({
                        "theta": set.config.theta,
                        "size": set.len(),
                        "frontier_reached": set.frontier_reached,
                        "sites": records,
                    }),
                ),
                Format::Csv => {
                    let mut buf = echo.csv_header().into_bytes();
                    write_csv(&records, set.config.dim, &mut buf)?;
                    Rendered {
                        bytes: buf,
                        check_failed: false,
                    }
                }
            })
        }
        Command::Bricklayer {
            brick,
            depth,
            replicas,
            no_maps,
            common,
        } => {
            json_only(common, "bricklayer")?;
            let config = brick.config()?;
            let echo = Echo {
                command: "bricklayer",
                seed: common.seed,
                params: json!({
                    "n_brick": brick.n_brick,
                    "q": brick.q.to_string(),
                    "depth": depth,
                    "replicas": replicas,
                    "maps": !no_maps,
                }),
            };
            let sim = simulate_bricklayer(&config, *depth, *replicas, common.seed)?;
            let master = LabelField::new(common.seed);
            let reps: Vec<Value> = sim
                .replicas
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let mut v = json!({
                        "percolates": r.percolates,
                        "good_bricks": r.good_bricks,
                        "bricks_evaluated": r.bricks_evaluated,
                        "witness": r.witness.as_ref().map(|w| w.iter().map(|b| json!([b.x(), b.y])).collect::<Vec<_>>()),
                        "open_path_start": r.witness.as_ref().map(|_| json!([0, 0])),
                        "open_path_verified": r.open_path_verified,
                        "open_path_len": r.open_path_len,
                    });
                    if !no_maps {
                        let map = good_brick_map(&master.replica(k as u64), &config, *depth);
                        v["good_map"] = json!(map
                            .iter()
                            .map(|row| json!({ "y": row.y, "runs": row.runs }))
                            .collect::<Vec<_>>());
                    }
                    v
                })
                .collect();
            Ok(json_out(
                &echo,
                json!({
                    "frequency": sim.frequency,
                    "goodness_probability": sim.goodness_probability,
                    "all_paths_verified": sim.all_paths_verified(),
                    "replicas": reps,
                }),
            ))
        }
        Command::BricklayerCheck {
            brick,
            theta,
            depth,
            replicas,
            common,
        } => {
            json_only(common, "bricklayer-check")?;
            let config = brick.config()?;
            let echo = Echo {
                command: "bricklayer-check",
                seed: common.seed,
                params: json!({
                    "n_brick": brick.n_brick,
                    "q": brick.q.to_string(),
                    "theta": theta,
                    "depth": depth,
                    "replicas": replicas,
                }),
            };
            let finite = !config.metric.is_infinite();
            let a = if finite { Some(compute_a(&config)?) } else { None };
            let gap = if finite {
                Some(distance_gap_check(&config, &bricks_in_x_range(2.0, *depth as f64))?)
            } else {
                None
            };
            let incr = theta
                .map(|t| open_implies_increasing_check(t, &config, *replicas, *depth as f64, common.seed))
                .transpose()?;
            let passed = gap.as_ref().map_or(true, |g| g.passed()) && incr.as_ref().map_or(true, |r| r.passed());
            let mut out = json_out(
                &echo,
                json!({
                    "goodness_probability": goodness_probability(&config)?,
                    "a_threshold": a,
                    "distance_gap": gap,
                    "open_implies_increasing": incr,
                    "passed": passed,
                }),
            );
            out.check_failed = !passed;
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Critical { common, .. }
        | Command::Bounds { common, .. }
        | Command::Pathbound { common, .. }
        | Command::TreeSim { common, .. }
        | Command::TreeMartingale { common, .. }
        | Command::LatticeSim { common, .. }
        | Command::LatticeSweep { common, .. }
        | Command::LatticeExport { common, .. }
        | Command::Bricklayer { common, .. }
        | Command::BricklayerCheck { common, .. } => common.out.clone(),
    };
    match run(&cli.command) {
        Ok(rendered) => {
            let written = match &out {
                Some(path) => write_atomic(path, &rendered.bytes),
                None => std::io::stdout().lock().write_all(&rendered.bytes),
            };
            if let Err(e) = written {
                eprintln!("rmf: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if rendered.check_failed {
                eprintln!("rmf: check failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("rmf: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
