//! The brick coupling between RMF labels on `ℤ₊²` and oriented percolation.
//!
//! Each vertex `(x, y)` of the bricklayer lattice (`y ≥ 0`, `x - y/2 ∈ ℤ₊`)
//! becomes a block of `3(n+1)` sites of `ℤ₊²`: columns `xn..=xn+n`, rows
//! `2y..=2y+2`. A brick carries three edge sets:
//!
//! * `Hor`: unit steps right along rows `2y` and `2y+1`, open when the tail
//!   uniform lies in `(δ, 1-δ)`;
//! * `LVer`: steps up from row `2y` in the second quarter of the columns;
//! * `RVer`: steps up from row `2y+1` in the third quarter.
//!
//! Vertical steps are open when the uniform increases. A brick is good when
//! all of `Hor`, some of `LVer` and some of `RVer` are open; a directed path
//! of good bricks carries an open path of sites.
//!
//! [`BrickId`] stores `(i, y)` with `x = i + y/2`, which makes the lattice
//! literally `ℤ₊²` with steps `(i+1, y)` and `(i, y+1)`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Metric;
use crate::rng::LabelField;
use crate::stats::Estimate;

/// Upper end of the scan for `A_q(n)`.
pub const A_SCAN_MAX: u64 = 1_000_000;

/// Source of the site uniforms `U_(a,b)`.
pub trait UniformSource: Sync {
    fn uniform_at(&self, a: u64, b: u64) -> f64;
}

impl UniformSource for LabelField {
    #[inline]
    fn uniform_at(&self, a: u64, b: u64) -> f64 {
        self.uniform(&[a as i64, b as i64])
    }
}

/// Wraps a closure as a [`UniformSource`]; handy for constructed fields.
pub struct FnField<F>(pub F);

impl<F: Fn(u64, u64) -> f64 + Sync> UniformSource for FnField<F> {
    fn uniform_at(&self, a: u64, b: u64) -> f64 {
        (self.0)(a, b)
    }
}

/// A vertex of the bricklayer lattice, `x = i + y/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BrickId {
    pub i: u64,
    pub y: u64,
}

impl BrickId {
    pub const ORIGIN: BrickId = BrickId { i: 0, y: 0 };

    pub fn new(i: u64, y: u64) -> Self {
        BrickId { i, y }
    }

    /// From `(x, y)`; `x - y/2` must be a non-negative integer.
    pub fn from_xy(x: f64, y: u64) -> Result<Self> {
        let i = x - y as f64 / 2.0;
        if !(i >= 0.0 && i.fract() == 0.0) {
            return Err(Error::invalid("brick", format!("({x}, {y}) is not a bricklayer vertex")));
        }
        Ok(BrickId { i: i as u64, y })
    }

    pub fn x(&self) -> f64 {
        self.i as f64 + self.y as f64 / 2.0
    }

    /// `2x`, an integer.
    pub fn twice_x(&self) -> u64 {
        2 * self.i + self.y
    }

    /// `(x+1, y)`.
    pub fn right(&self) -> BrickId {
        BrickId::new(self.i + 1, self.y)
    }

    /// `(x+1/2, y+1)`.
    pub fn up(&self) -> BrickId {
        BrickId::new(self.i, self.y + 1)
    }

    /// Leftmost column `xn`.
    pub fn left_column(&self, n: u64) -> u64 {
        self.twice_x() * n / 2
    }
}

/// Brick width `n` and the metric exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrickConfig {
    pub n: u64,
    pub metric: Metric,
}

impl BrickConfig {
    /// `n` must be even and at least 4 (so `xn` is an integer and every
    /// vertical set is nonempty), `q > 1`, and the horizontal window must be
    /// nonempty.
    pub fn new(n: u64, metric: Metric) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid("n", format!("{n} must be even and >= 4")));
        }
        if metric.q() <= 1.0 {
            return Err(Error::invalid("q", "brick coupling needs q > 1"));
        }
        let c = BrickConfig { n, metric };
        if 2.0 * c.delta() >= 1.0 {
            return Err(Error::invalid(
                "n",
                format!("window (δ, 1-δ) is empty for n = {n}, q = {}", metric),
            ));
        }
        Ok(c)
    }

    /// `ε = 5^q / n^q` (0 for `q = ∞`).
    pub fn eps(&self) -> f64 {
        if self.metric.is_infinite() {
            0.0
        } else {
            (5.0 / self.n as f64).powf(self.metric.q())
        }
    }

    /// Half-width `δ` of the excluded tails: `3ε` for finite `q`, `n^{-2}` for `q = ∞`.
    pub fn delta(&self) -> f64 {
        if self.metric.is_infinite() {
            1.0 / (self.n * self.n) as f64
        } else {
            3.0 * self.eps()
        }
    }

    /// Column offsets of `LVer` within a brick: `⌊n/4⌋ .. n/2`.
    pub fn lver_offsets(&self) -> std::ops::Range<u64> {
        self.n / 4..self.n / 2
    }

    /// Column offsets of `RVer`: `n/2 .. ⌊3n/4⌋`.
    pub fn rver_offsets(&self) -> std::ops::Range<u64> {
        self.n / 2..3 * self.n / 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Hor,
    LVer,
    RVer,
}

/// A directed edge of `ℤ₊²`: `from → from + (1,0)` or `from → from + (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BrickEdge {
    pub from: (u64, u64),
    pub to: (u64, u64),
    pub kind: EdgeKind,
}

impl BrickEdge {
    pub fn is_horizontal(&self) -> bool {
        self.to.1 == self.from.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Brick {
    pub id: BrickId,
    pub n: u64,
    pub vertices: Vec<(u64, u64)>,
    pub hor: Vec<BrickEdge>,
    pub lver: Vec<BrickEdge>,
    pub rver: Vec<BrickEdge>,
}

impl Brick {
    pub fn edges(&self) -> impl Iterator<Item = &BrickEdge> {
        self.hor.iter().chain(&self.lver).chain(&self.rver)
    }
}

pub fn brick_build(id: BrickId, config: &BrickConfig) -> Brick {
    let n = config.n;
    let x0 = id.left_column(n);
    let b0 = 2 * id.y;
    let vertices = (b0..=b0 + 2)
        .flat_map(|b| (x0..=x0 + n).map(move |a| (a, b)))
        .collect();
    let hor = [b0, b0 + 1]
        .into_iter()
        .flat_map(|b| {
            (x0..x0 + n).map(move |a| BrickEdge {
                from: (a, b),
                to: (a + 1, b),
                kind: EdgeKind::Hor,
            })
        })
        .collect();
    let vertical = |offsets: std::ops::Range<u64>, b: u64, kind| {
        offsets
            .map(|o| BrickEdge {
                from: (x0 + o, b),
                to: (x0 + o, b + 1),
                kind,
            })
            .collect::<Vec<_>>()
    };
    Brick {
        id,
        n,
        vertices,
        hor,
        lver: vertical(config.lver_offsets(), b0, EdgeKind::LVer),
        rver: vertical(config.rver_offsets(), b0 + 1, EdgeKind::RVer),
    }
}

/// Horizontal: tail uniform inside `(δ, 1-δ)`. Vertical: uniform increases.
#[inline]
pub fn edge_open<S: UniformSource + ?Sized>(edge: &BrickEdge, field: &S, config: &BrickConfig) -> bool {
    let u = field.uniform_at(edge.from.0, edge.from.1);
    if edge.is_horizontal() {
        let d = config.delta();
        u > d && u < 1.0 - d
    } else {
        u < field.uniform_at(edge.to.0, edge.to.1)
    }
}

/// Goodness without materialising the brick.
pub fn brick_good<S: UniformSource + ?Sized>(id: BrickId, field: &S, config: &BrickConfig) -> bool {
    let n = config.n;
    let x0 = id.left_column(n);
    let b0 = 2 * id.y;
    let d = config.delta();
    let in_window = |u: f64| u > d && u < 1.0 - d;
    let rows_ok = [b0, b0 + 1]
        .iter()
        .all(|&b| (x0..x0 + n).all(|a| in_window(field.uniform_at(a, b))));
    rows_ok
        && config
            .lver_offsets()
            .any(|o| field.uniform_at(x0 + o, b0) < field.uniform_at(x0 + o, b0 + 1))
        && config
            .rver_offsets()
            .any(|o| field.uniform_at(x0 + o, b0 + 1) < field.uniform_at(x0 + o, b0 + 2))
}

/// `(1-2δ)^{2n} (1-2^{-|LVer|})(1-2^{-|RVer|})`. With `4 | n` this is
/// `(1-6·5^q/n^q)^{2n}(1-2^{-n/4})²`, or `(1-2n^{-2})^{2n}(1-2^{-n/4})²` for `q = ∞`.
pub fn goodness_probability(config: &BrickConfig) -> Result<f64> {
    let d = config.delta();
    if 2.0 * d >= 1.0 {
        return Err(Error::invalid("n", "openness window is empty"));
    }
    let nl = config.lver_offsets().count() as i32;
    let nr = config.rver_offsets().count() as i32;
    let hor = (2.0 * config.n as f64 * (-2.0 * d).ln_1p()).exp();
    Ok(hor * (1.0 - 0.5f64.powi(nl)) * (1.0 - 0.5f64.powi(nr)))
}

/// `(1 + q/a)^{1/q} ≥ 1 + (1 - 5^q/n^q)/a`.
fn a_inequality(q: f64, eps: f64, a: f64) -> bool {
    ((q / a).ln_1p() / q).exp_m1() >= (1.0 - eps) / a
}

/// Smallest `a₀` with the `A_q(n)` inequality holding on all of
/// `[a₀, 10⁶]`. Errors if it fails at the top of the window, or if it holds
/// somewhere and then fails again further up.
pub fn compute_a(config: &BrickConfig) -> Result<u64> {
    if config.metric.is_infinite() {
        return Err(Error::invalid("q", "A_q(n) is defined for finite q only"));
    }
    if config.n <= 5 {
        return Err(Error::invalid("n", "A_q(n) needs n > 5"));
    }
    let q = config.metric.q();
    let eps = config.eps();
    let mut first_ok: Option<u64> = None;
    for a in 1..=A_SCAN_MAX {
        let ok = a_inequality(q, eps, a as f64);
        match (ok, first_ok) {
            (true, None) => first_ok = Some(a),
            (false, Some(start)) => {
                return Err(Error::NonMonotone(format!(
                    "A_q(n) inequality holds from a = {start} but fails at a = {a}"
                )))
            }
            _ => {}
        }
    }
    first_ok.ok_or_else(|| Error::NoRoot(format!("A_q(n) inequality fails throughout [1, {A_SCAN_MAX}]")))
}

/// Horizontal opens, vertical opens and offending edges for one sample.
type SampleTally = (u64, u64, Vec<(u64, BrickEdge)>);

/// `d(0,(a+1,b)) - d(0,(a,b))`, written to avoid cancellation for `q = 1, 2, ∞`.
pub fn distance_gap(metric: &Metric, a: u64, b: u64) -> f64 {
    let (af, bf) = (a as f64, b as f64);
    let q = metric.q();
    match q {
        1.0 => 1.0,
        2.0 => (2.0 * af + 1.0) / ((af + 1.0).hypot(bf) + af.hypot(bf)),
        _ if q.is_infinite() => {
            if a >= b {
                1.0
            } else {
                0.0
            }
        }
        _ => metric.norm(&[a as i64 + 1, b as i64]) - metric.norm(&[a as i64, b as i64]),
    }
}

/// The bricks `{(x,y) ∈ V_𝕃 : x_min ≤ x ≤ x_max}`.
pub fn bricks_in_x_range(x_min: f64, x_max: f64) -> Vec<BrickId> {
    let hi2 = (2.0 * x_max).floor() as u64;
    let lo2 = (2.0 * x_min).ceil().max(0.0) as u64;
    let mut out = Vec::new();
    for x2 in lo2..=hi2 {
        for y in (0..=x2).filter(|y| (x2 - y) % 2 == 0) {
            out.push(BrickId::new((x2 - y) / 2, y));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub a_threshold: u64,
    pub bricks_checked: usize,
    pub vertices_checked: usize,
    /// Smallest `gap - (1 - 2ε)` seen.
    pub min_margin: f64,
    pub violations: Vec<(u64, u64, f64)>,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `d(0,(a+1,b)) - d(0,(a,b)) > 1 - 2·5^q/n^q` at every vertex with
/// `a ≥ A_q(n)` of every listed brick with `x ≥ 2`.
pub fn distance_gap_check(config: &BrickConfig, bricks: &[BrickId]) -> Result<GapReport> {
    let a0 = compute_a(config)?;
    let bound = 1.0 - 2.0 * config.eps();
    let mut report = GapReport {
        a_threshold: a0,
        bricks_checked: 0,
        vertices_checked: 0,
        min_margin: f64::INFINITY,
        violations: Vec::new(),
    };
    for id in bricks.iter().filter(|b| b.twice_x() >= 4) {
        report.bricks_checked += 1;
        for &(a, b) in brick_build(*id, config).vertices.iter().filter(|v| v.0 >= a0) {
            report.vertices_checked += 1;
            let gap = distance_gap(&config.metric, a, b);
            report.min_margin = report.min_margin.min(gap - bound);
            if gap.partial_cmp(&bound) != Some(std::cmp::Ordering::Greater) {
                report.violations.push((a, b, gap));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreasingReport {
    pub theta: f64,
    pub samples: u64,
    pub horizontal_open: u64,
    pub vertical_open: u64,
    /// Open edges whose RMF labels fail to increase: `(field index, edge)`.
    pub violations: Vec<(u64, BrickEdge)>,
}

impl IncreasingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `samples` fields and checks that every open edge of the bricks
/// with `2 ≤ x ≤ x_max` raises the RMF label `U + θ·d`: horizontal edges
/// from columns `a ≥ A_q(n)` (any column for `q = ∞`), and all vertical
/// edges. Requires `θ ∈ (1 - 5^q/n^q, 1)`, or `θ ∈ (1 - n^{-2}, 1)` for `q = ∞`.
pub fn open_implies_increasing_check(
    theta: f64,
    config: &BrickConfig,
    samples: u64,
    x_max: f64,
    seed: u64,
) -> Result<IncreasingReport> {
    let floor = if config.metric.is_infinite() {
        1.0 - config.delta()
    } else {
        1.0 - config.eps()
    };
    if !(theta > floor && theta < 1.0) {
        return Err(Error::invalid("theta", format!("{theta} not in ({floor}, 1)")));
    }
    let a0 = if config.metric.is_infinite() {
        0
    } else {
        compute_a(config)?
    };
    let bricks: Vec<Brick> = bricks_in_x_range(2.0, x_max)
        .into_iter()
        .map(|id| brick_build(id, config))
        .collect();
    let master = LabelField::new(seed);
    let metric = config.metric;
    let label = |f: &LabelField, (a, b): (u64, u64)| f.uniform_at(a, b) + theta * metric.norm(&[a as i64, b as i64]);
    let per_sample: Vec<SampleTally> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let field = master.replica(s);
            let (mut h, mut v, mut bad) = (0, 0, Vec::new());
            for brick in &bricks {
                for e in brick.edges() {
                    if e.is_horizontal() && e.from.0 < a0 {
                        continue;
                    }
                    if !edge_open(e, &field, config) {
                        continue;
                    }
                    if e.is_horizontal() {
                        h += 1;
                    } else {
                        v += 1;
                    }
                    if label(&field, e.to).partial_cmp(&label(&field, e.from)) != Some(std::cmp::Ordering::Greater) {
                        bad.push((s, *e));
                    }
                }
            }
            (h, v, bad)
        })
        .collect();
    let mut report = IncreasingReport {
        theta,
        samples,
        horizontal_open: 0,
        vertical_open: 0,
        violations: Vec::new(),
    };
    for (h, v, bad) in per_sample {
        report.horizontal_open += h;
        report.vertical_open += v;
        report.violations.extend(bad);
    }
    Ok(report)
}

/// How the open path enters a brick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    /// On row `2y` at this column (at or left of the first `LVer` column).
    Bottom(u64),
    /// On row `2y+1` at the left column `xn`.
    Middle,
}

/// Builds the open path carried by a directed path of good bricks, from the
/// bottom-left corner of the first brick to the middle-right vertex of the
/// last. Every edge is checked against [`edge_open`] and against the edge
/// sets of the brick it runs through; `None` if any check fails.
pub fn open_path_through<S: UniformSource + ?Sized>(
    bricks: &[BrickId],
    field: &S,
    config: &BrickConfig,
) -> Option<Vec<(u64, u64)>> {
    let first = bricks.first()?;
    let n = config.n;
    let mut path = vec![(first.left_column(n), 2 * first.y)];
    let mut entry = Entry::Bottom(first.left_column(n));
    for (k, id) in bricks.iter().enumerate() {
        let x0 = id.left_column(n);
        let b0 = 2 * id.y;
        let brick = brick_build(*id, config);
        let owned: HashSet<BrickEdge> = brick.edges().copied().collect();
        let walk = |to: (u64, u64), kind: EdgeKind, path: &mut Vec<(u64, u64)>| -> Option<()> {
            let from = *path.last()?;
            let e = BrickEdge { from, to, kind };
            if owned.contains(&e) && edge_open(&e, field, config) {
                path.push(to);
                Some(())
            } else {
                None
            }
        };
        if let Entry::Bottom(a_in) = entry {
            let c = config
                .lver_offsets()
                .map(|o| x0 + o)
                .find(|&c| c >= a_in && field.uniform_at(c, b0) < field.uniform_at(c, b0 + 1))?;
            for a in a_in..c {
                walk((a + 1, b0), EdgeKind::Hor, &mut path)?;
            }
            walk((c, b0 + 1), EdgeKind::LVer, &mut path)?;
        }
        let at = path.last()?.0;
        match bricks.get(k + 1) {
            Some(next) if *next == id.up() => {
                let c = config
                    .rver_offsets()
                    .map(|o| x0 + o)
                    .find(|&c| c >= at && field.uniform_at(c, b0 + 1) < field.uniform_at(c, b0 + 2))?;
                for a in at..c {
                    walk((a + 1, b0 + 1), EdgeKind::Hor, &mut path)?;
                }
                walk((c, b0 + 2), EdgeKind::RVer, &mut path)?;
                entry = Entry::Bottom(c);
            }
            Some(next) if *next == id.right() => {
                for a in at..x0 + n {
                    walk((a + 1, b0 + 1), EdgeKind::Hor, &mut path)?;
                }
                entry = Entry::Middle;
            }
            Some(_) => return None,
            None => {
                for a in at..x0 + n {
                    walk((a + 1, b0 + 1), EdgeKind::Hor, &mut path)?;
                }
            }
        }
    }
    Some(path)
}

/// Result of one bricklayer replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrickReplica {
    pub percolates: bool,
    /// Good bricks seen during the search.
    pub good_bricks: usize,
    pub bricks_evaluated: usize,
    /// Directed path of good bricks from the origin to `x ≥ depth`.
    pub witness: Option<Vec<BrickId>>,
    /// The witness was turned into an explicit open path of sites.
    pub open_path_verified: bool,
    /// Length in sites of that open path.
    pub open_path_len: usize,
}

/// Depth-first search over good bricks with `x ≤ depth`, right moves first.
/// Succeeds on reaching a good brick with `x ≥ depth`.
pub fn percolate_bricks<S: UniformSource + ?Sized>(field: &S, config: &BrickConfig, depth: u64) -> BrickReplica {
    let mut status: HashMap<BrickId, bool> = HashMap::new();
    let good = |id: BrickId, status: &mut HashMap<BrickId, bool>| {
        *status.entry(id).or_insert_with(|| brick_good(id, field, config))
    };
    let mut pred: HashMap<BrickId, BrickId> = HashMap::new();
    let mut stack = Vec::new();
    let mut found = None;
    if good(BrickId::ORIGIN, &mut status) {
        pred.insert(BrickId::ORIGIN, BrickId::ORIGIN);
        stack.push(BrickId::ORIGIN);
    }
    while let Some(b) = stack.pop() {
        if b.twice_x() >= 2 * depth {
            found = Some(b);
            break;
        }
        // Pushed in reverse so the right move is tried first.
        for next in [b.up(), b.right()] {
            if next.twice_x() > 2 * depth || pred.contains_key(&next) {
                continue;
            }
            if good(next, &mut status) {
                pred.insert(next, b);
                stack.push(next);
            }
        }
    }
    let witness = found.map(|end| {
        let mut w = vec![end];
        let mut cur = end;
        while cur != BrickId::ORIGIN {
            cur = pred[&cur];
            w.push(cur);
        }
        w.reverse();
        w
    });
    let open_path = witness.as_ref().and_then(|w| open_path_through(w, field, config));
    BrickReplica {
        percolates: witness.is_some(),
        good_bricks: status.values().filter(|&&g| g).count(),
        bricks_evaluated: status.len(),
        open_path_verified: open_path.is_some(),
        open_path_len: open_path.map_or(0, |p| p.len()),
        witness,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrickSimulation {
    pub config: BrickConfig,
    pub depth: u64,
    pub frequency: Estimate,
    pub goodness_probability: f64,
    pub replicas: Vec<BrickReplica>,
}

impl BrickSimulation {
    /// Every percolating replica produced a verified open path.
    pub fn all_paths_verified(&self) -> bool {
        self.replicas.iter().all(|r| !r.percolates || r.open_path_verified)
    }
}

/// Frequency of `n`-bricklayer percolation to `x = depth` over replicas
/// `LabelField::new(seed).replica(k)`.
pub fn simulate_bricklayer(config: &BrickConfig, depth: u64, replicas: u64, seed: u64) -> Result<BrickSimulation> {
    if depth < 1 || replicas < 1 {
        return Err(Error::invalid("depth/replicas", "must be >= 1"));
    }
    let master = LabelField::new(seed);
    let runs: Vec<BrickReplica> = (0..replicas)
        .into_par_iter()
        .map(|k| percolate_bricks(&master.replica(k), config, depth))
        .collect();
    let hits = runs.iter().filter(|r| r.percolates).count() as u64;
    Ok(BrickSimulation {
        config: *config,
        depth,
        frequency: Estimate::proportion(hits, replicas),
        goodness_probability: goodness_probability(config)?,
        replicas: runs,
    })
}

/// Fraction of good origin bricks over independent fields.
pub fn empirical_goodness(config: &BrickConfig, replicas: u64, seed: u64) -> Estimate {
    let master = LabelField::new(seed);
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|k| brick_good(BrickId::ORIGIN, &master.replica(k), config) as u64)
        .sum();
    Estimate::proportion(hits, replicas)
}

/// One row of a good-brick map, run-length encoded from `i = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleRow {
    pub y: u64,
    /// `(good, run length)` pairs.
    pub runs: Vec<(bool, u64)>,
}

/// Goodness of every brick with `x ≤ depth`, one run-length row per `y`.
pub fn good_brick_map<S: UniformSource + ?Sized>(field: &S, config: &BrickConfig, depth: u64) -> Vec<RleRow> {
    (0..=2 * depth)
        .map(|y| {
            let mut runs: Vec<(bool, u64)> = Vec::new();
            let max_i = (2 * depth - y) / 2;
            for i in 0..=max_i {
                let g = brick_good(BrickId::new(i, y), field, config);
                match runs.last_mut() {
                    Some((v, c)) if *v == g => *c += 1,
                    _ => runs.push((g, 1)),
                }
            }
            RleRow { y, runs }
        })
        .collect()
}
