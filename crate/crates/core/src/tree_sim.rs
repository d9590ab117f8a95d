//! RMF accessibility percolation on Bienaymé-Galton-Watson trees.
//!
//! Only the accessible part of the tree is ever materialised. A child of an
//! accessible vertex with uniform `u` is accessible iff its own uniform
//! exceeds `u - θ`. Node uniforms and offspring counts are keyed by the
//! path-encoded [`NodeId`], so for a fixed field the accessible tree grows
//! monotonically with θ and every replica replays exactly.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{lead_eigenvalue, EigenFunction};
use crate::error::{check_range, Error, Result};
use crate::rng::{CounterRng, LabelField, NodeId};
use crate::stats::{Estimate, MeanAcc};

/// Default frontier cap.
pub const DEFAULT_CAP: usize = 1_000_000;

const OFFSPRING_TAG: u64 = 0x4f46_4653_5052_4e47;

/// Offspring law `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Offspring {
    /// Exactly `k` children (the `k`-ary tree).
    Deterministic { k: u32 },
    Poisson { mean: f64 },
    Binomial { n: u32, p: f64 },
    /// `P(L = j) = p(1-p)^j` on `{0,1,...}` with `p = 1/(1+mean)`.
    Geometric { mean: f64 },
}

impl Offspring {
    pub fn mean(&self) -> f64 {
        match *self {
            Offspring::Deterministic { k } => k as f64,
            Offspring::Poisson { mean } | Offspring::Geometric { mean } => mean,
            Offspring::Binomial { n, p } => n as f64 * p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Offspring::Deterministic { k: 0 } => {
                Err(Error::invalid("offspring", "deterministic k must be >= 1"))
            }
            Offspring::Poisson { mean } | Offspring::Geometric { mean }
                if !(mean.is_finite() && mean > 0.0) =>
            {
                Err(Error::invalid("offspring", format!("mean {mean} must be > 0")))
            }
            Offspring::Binomial { n, p } if n == 0 || !(p > 0.0 && p <= 1.0) => {
                Err(Error::invalid("offspring", format!("binomial({n}, {p}) needs n >= 1, p in (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn sampler(&self) -> Result<OffspringSampler> {
        self.validate()?;
        Ok(match *self {
            Offspring::Deterministic { k } => OffspringSampler::Fixed(k),
            Offspring::Poisson { mean } => OffspringSampler::Poisson(
                Poisson::new(mean).map_err(|e| Error::invalid("offspring", e.to_string()))?,
            ),
            Offspring::Binomial { n, p } => OffspringSampler::Binomial(
                Binomial::new(n as u64, p).map_err(|e| Error::invalid("offspring", e.to_string()))?,
            ),
            Offspring::Geometric { mean } => {
                OffspringSampler::Geometric((1.0 - 1.0 / (1.0 + mean)).ln())
            }
        })
    }
}

impl fmt::Display for Offspring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Offspring::Deterministic { k } => write!(f, "det:{k}"),
            Offspring::Poisson { mean } => write!(f, "poisson:{mean}"),
            Offspring::Binomial { n, p } => write!(f, "binomial:{n}:{p}"),
            Offspring::Geometric { mean } => write!(f, "geometric:{mean}"),
        }
    }
}

impl FromStr for Offspring {
    type Err = Error;

    /// `det:K`, `poisson:M`, `binomial:N:P` or `geometric:M`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("offspring", format!("cannot parse `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
        let o = match (parts[0], parts.len()) {
            ("det" | "deterministic", 2) => Offspring::Deterministic {
                k: parts[1].parse().map_err(|_| bad())?,
            },
            ("poisson", 2) => Offspring::Poisson { mean: num(1)? },
            ("geometric", 2) => Offspring::Geometric { mean: num(1)? },
            ("binomial", 3) => Offspring::Binomial {
                n: parts[1].parse().map_err(|_| bad())?,
                p: num(2)?,
            },
            _ => return Err(bad()),
        };
        o.validate()?;
        Ok(o)
    }
}

/// A ready-to-use sampler for an [`Offspring`] law.
#[derive(Debug, Clone, Copy)]
pub enum OffspringSampler {
    Fixed(u32),
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    /// Holds `ln(1-p)`.
    Geometric(f64),
}

impl OffspringSampler {
    #[inline]
    pub fn sample(&self, rng: &mut CounterRng) -> u32 {
        match self {
            OffspringSampler::Fixed(k) => *k,
            OffspringSampler::Poisson(d) => d.sample(rng) as u32,
            OffspringSampler::Binomial(d) => d.sample(rng) as u32,
            OffspringSampler::Geometric(ln_q) => (rng.next_open01().ln() / ln_q).floor() as u32,
        }
    }

    #[inline]
    fn children(&self, field: &LabelField, id: NodeId) -> u32 {
        match self {
            OffspringSampler::Fixed(k) => *k,
            _ => self.sample(&mut field.stream(id.0, OFFSPRING_TAG)),
        }
    }
}

/// Accessible vertices of one generation, with their uniforms.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub generation: usize,
    pub nodes: Vec<(NodeId, f64)>,
    /// Set when a step hit the cap and dropped children.
    pub truncated: bool,
}

impl Frontier {
    /// Generation 0: the root with its field uniform.
    pub fn root(field: &LabelField) -> Self {
        Self::with_root_uniform(field.uniform(&NodeId::ROOT))
    }

    /// Generation 0 with a prescribed root uniform.
    pub fn with_root_uniform(u: f64) -> Self {
        Frontier {
            generation: 0,
            nodes: vec![(NodeId::ROOT, u)],
            truncated: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn uniforms(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|&(_, u)| u)
    }
}

/// Advances one generation: every child with `U' > u - θ` is kept.
pub fn step_frontier(
    frontier: &Frontier,
    theta: f64,
    sampler: &OffspringSampler,
    field: &LabelField,
    cap: usize,
) -> Frontier {
    let mut nodes = Vec::with_capacity(frontier.nodes.len() * 2);
    let mut truncated = frontier.truncated;
    'outer: for &(id, u) in &frontier.nodes {
        let threshold = u - theta;
        for i in 0..sampler.children(field, id) {
            let child = id.child(i);
            let uc = field.uniform(&child);
            if uc > threshold {
                if nodes.len() >= cap {
                    truncated = true;
                    break 'outer;
                }
                nodes.push((child, uc));
            }
        }
    }
    Frontier {
        generation: frontier.generation + 1,
        nodes,
        truncated,
    }
}

/// Outcome of one replica run to a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ReplicaOutcome {
    /// Last generation with a nonempty frontier (horizon if it survived).
    last_alive: usize,
    truncated: bool,
}

fn run_replica(theta: f64, sampler: &OffspringSampler, field: &LabelField, horizon: usize, cap: usize) -> ReplicaOutcome {
    let mut f = Frontier::root(field);
    for g in 1..=horizon {
        f = step_frontier(&f, theta, sampler, field, cap);
        if f.truncated {
            // A frontier this large has essentially no chance of dying out.
            return ReplicaOutcome {
                last_alive: horizon,
                truncated: true,
            };
        }
        if f.is_empty() {
            return ReplicaOutcome {
                last_alive: g - 1,
                truncated: false,
            };
        }
    }
    ReplicaOutcome {
        last_alive: horizon,
        truncated: false,
    }
}

/// Survival counts for every generation up to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRun {
    pub theta: f64,
    pub horizon: usize,
    pub replicas: u64,
    pub cap: usize,
    /// Replicas with a nonempty frontier at generation `g`, `g = 0..=horizon`.
    pub alive: Vec<u64>,
    /// Replicas that hit the cap (counted as survived).
    pub truncated: u64,
}

impl SurvivalRun {
    pub fn estimate(&self) -> Estimate {
        self.estimate_at(self.horizon)
    }

    pub fn estimate_at(&self, generation: usize) -> Estimate {
        Estimate::proportion(self.alive[generation.min(self.horizon)], self.replicas)
    }
}

fn check_theta01(theta: f64) -> Result<()> {
    check_range("theta", theta, 0.0, 1.0)
}

/// Fraction of replicas whose accessible frontier is nonempty at `horizon`.
/// Replica `r` uses `field.replica(r)`.
pub fn survival_probability(
    theta: f64,
    offspring: &Offspring,
    horizon: usize,
    replicas: u64,
    cap: usize,
    field: &LabelField,
) -> Result<SurvivalRun> {
    check_theta01(theta)?;
    if horizon < 1 || replicas < 1 || cap < 1 {
        return Err(Error::invalid("horizon/replicas/cap", "must all be >= 1"));
    }
    let sampler = offspring.sampler()?;
    let outcomes: Vec<ReplicaOutcome> = (0..replicas)
        .into_par_iter()
        .map(|r| run_replica(theta, &sampler, &field.replica(r), horizon, cap))
        .collect();
    let mut alive = vec![0u64; horizon + 1];
    let mut truncated = 0;
    for o in &outcomes {
        alive[..=o.last_alive].iter_mut().for_each(|a| *a += 1);
        truncated += o.truncated as u64;
    }
    Ok(SurvivalRun {
        theta,
        horizon,
        replicas,
        cap,
        alive,
        truncated,
    })
}

/// Survival curve over a θ grid and its empirical crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCurve {
    pub offspring: Offspring,
    pub horizon: usize,
    pub replicas: u64,
    pub runs: Vec<SurvivalRun>,
    /// θ at which the half-horizon ratio `S(h)/S(h/2)` reaches 1/2, linearly
    /// interpolated between the two grid points around the first crossing.
    pub crossing: Option<f64>,
    /// First grid θ at which the ratio is at least 1/2.
    pub crossing_grid: Option<f64>,
    /// First grid θ at which `S(h)` reaches half its largest value on the grid.
    pub half_plateau: Option<f64>,
}

/// Survival at `horizon` for each θ of the grid, all on the same field.
///
/// Two crossing estimates are reported. At criticality the survival
/// probability decays like `1/h`, so `S(h)/S(h/2)` passes `1/2` there; it
/// tends to 0 below and to 1 above. That ratio estimator is the primary one.
/// The half-plateau estimate is kept for comparison; it sits inside the
/// supercritical phase, since survival grows from zero only above `θ_c`.
pub fn estimate_theta_c_tree(
    offspring: &Offspring,
    theta_grid: &[f64],
    horizon: usize,
    replicas: u64,
    cap: usize,
    field: &LabelField,
) -> Result<ThetaCurve> {
    if horizon < 2 {
        return Err(Error::invalid("horizon", "must be >= 2"));
    }
    let runs = theta_grid
        .iter()
        .map(|&t| survival_probability(t, offspring, horizon, replicas, cap, field))
        .collect::<Result<Vec<_>>>()?;
    let half = horizon / 2;
    let ratio = |r: &SurvivalRun| {
        if r.alive[half] == 0 {
            0.0
        } else {
            r.alive[horizon] as f64 / r.alive[half] as f64
        }
    };
    let first = runs.iter().position(|r| ratio(r) >= 0.5);
    let crossing_grid = first.map(|i| runs[i].theta);
    let crossing = first.map(|i| {
        if i == 0 {
            return runs[0].theta;
        }
        let (a, b) = (&runs[i - 1], &runs[i]);
        let (ra, rb) = (ratio(a), ratio(b));
        a.theta + (b.theta - a.theta) * (0.5 - ra) / (rb - ra)
    });
    let plateau = runs.iter().map(|r| r.alive[horizon]).max().unwrap_or(0);
    let half_plateau = runs
        .iter()
        .find(|r| plateau > 0 && 2 * r.alive[horizon] >= plateau)
        .map(|r| r.theta);
    Ok(ThetaCurve {
        offspring: *offspring,
        horizon,
        replicas,
        runs,
        crossing,
        crossing_grid,
        half_plateau,
    })
}

/// Per-generation mean of `W_n = λ^{-n} Σ_{v ∈ N_n} f(U_v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTrace {
    pub m: f64,
    pub theta: f64,
    pub lambda: f64,
    pub generations: usize,
    pub replicas: u64,
    /// `W_n` sample mean and standard error, `n = 0..=generations`.
    pub values: Vec<Estimate>,
    /// Mean frontier size per generation.
    pub mean_frontier: Vec<f64>,
}

impl MartingaleTrace {
    /// Largest `|mean_n - mean_0|` in units of the combined standard error.
    pub fn max_deviation_sigmas(&self) -> f64 {
        let w0 = self.values[0];
        self.values
            .iter()
            .skip(1)
            .map(|w| (w.value - w0.value).abs() / (w.stderr * w.stderr + w0.stderr * w0.stderr).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Simulates the additive martingale built from the lead eigenfunction.
/// Any replica hitting `cap` makes the trace invalid and is an error.
pub fn martingale_trace(
    m: f64,
    theta: f64,
    offspring: &Offspring,
    generations: usize,
    replicas: u64,
    cap: usize,
    field: &LabelField,
) -> Result<MartingaleTrace> {
    check_theta01(theta)?;
    if replicas < 1 {
        return Err(Error::invalid("replicas", "must be >= 1"));
    }
    if (offspring.mean() - m).abs() > 1e-12 * m {
        return Err(Error::invalid(
            "m",
            format!("offspring mean {} differs from m = {m}", offspring.mean()),
        ));
    }
    let sampler = offspring.sampler()?;
    let lambda = lead_eigenvalue(m, theta)?;
    let f = EigenFunction::new(m, theta, lambda)?;

    let per_replica: Vec<Result<Vec<(f64, usize)>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let field = field.replica(r);
            let mut fr = Frontier::root(&field);
            let mut out = Vec::with_capacity(generations + 1);
            let mut scale = 1.0;
            for g in 0..=generations {
                if g > 0 {
                    fr = step_frontier(&fr, theta, &sampler, &field, cap);
                    if fr.truncated {
                        return Err(Error::Truncated { cap, generation: g });
                    }
                    scale /= lambda;
                }
                let w: f64 = fr.uniforms().map(|u| f.eval(u)).sum::<f64>() * scale;
                out.push((w, fr.len()));
            }
            Ok(out)
        })
        .collect();

    let mut acc = vec![MeanAcc::default(); generations + 1];
    let mut sizes = vec![0.0; generations + 1];
    for rep in per_replica {
        for (g, (w, n)) in rep?.into_iter().enumerate() {
            acc[g].push(w);
            sizes[g] += n as f64;
        }
    }
    Ok(MartingaleTrace {
        m,
        theta,
        lambda,
        generations,
        replicas,
        values: acc.iter().map(MeanAcc::estimate).collect(),
        mean_frontier: sizes.iter().map(|s| s / replicas as f64).collect(),
    })
}
