//! Accessible sets of the RMF landscape on `ℤⁿ`.
//!
//! A site `w` is accessible when some accessible neighbour `v` has
//! `X_v < X_w` (and, for non-backtracking paths, `‖w‖_q > ‖v‖_q`). Sites are
//! expanded in increasing label order from the origin. Sites at distance at
//! least `R` are recorded but not expanded; reaching one is the finite-size
//! stand-in for an infinite accessible path.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::model::Metric;
use crate::numfmt::sig17;
use crate::rng::{mix64, LabelField};
use crate::stats::Estimate;

/// Largest box volume accepted: a 2D box of radius 5000.
pub const MAX_BOX_VOLUME: u64 = 10_001 * 10_001;
pub const MAX_DIM: usize = 4;

/// Which lattice paths count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Every step strictly increases `‖·‖_q`.
    NonBacktracking,
    AllPaths,
}

/// Part of `ℤⁿ` explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Full,
    /// The closed orthant with all coordinates `>= 0`.
    Orthant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub dim: usize,
    pub metric: Metric,
    pub mode: PathMode,
    pub region: Region,
    pub radius: i64,
    pub theta: f64,
    pub seed: u64,
}

impl LatticeConfig {
    pub fn new(dim: usize, metric: Metric, mode: PathMode, radius: i64, theta: f64, seed: u64) -> Result<Self> {
        let c = LatticeConfig {
            dim,
            metric,
            mode,
            region: Region::Full,
            radius,
            theta,
            seed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(Error::invalid("dim", format!("{} not in [2, {MAX_DIM}]", self.dim)));
        }
        if self.radius < 1 {
            return Err(Error::invalid("radius", "must be >= 1"));
        }
        check_range("theta", self.theta, 0.0, 1.0)?;
        let side = 2 * self.radius as u64 + 1;
        let volume = side.checked_pow(self.dim as u32).unwrap_or(u64::MAX);
        if volume > MAX_BOX_VOLUME {
            return Err(Error::ResourceGuard(format!(
                "box of radius {} in dimension {} has {volume} sites (limit {MAX_BOX_VOLUME})",
                self.radius, self.dim
            )));
        }
        Ok(())
    }
}

/// Coordinate permutation and sign flips, applied to field lookups only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteTransform {
    pub perm: Vec<usize>,
    pub signs: Vec<i64>,
}

impl SiteTransform {
    fn apply(&self, v: &[i64], out: &mut [i64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.signs[i] * v[self.perm[i]];
        }
    }
}

#[derive(Default)]
struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = mix64(self.0 ^ b as u64);
        }
    }
    fn write_u64(&mut self, n: u64) {
        self.0 = mix64(n);
    }
}

type KeyMap<V> = HashMap<u64, V, BuildHasherDefault<KeyHasher>>;

/// Sites reached from the origin, in the order they were finalised.
#[derive(Debug, Clone)]
pub struct AccessibleSet {
    pub config: LatticeConfig,
    coords: Vec<i64>,
    labels: Vec<f64>,
    preds: Vec<u32>,
    index: KeyMap<u32>,
    /// Some site with `‖v‖_q ≥ R` was reached.
    pub frontier_reached: bool,
    /// False when exploration stopped at the first frontier site.
    pub complete: bool,
}

impl AccessibleSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn site(&self, i: usize) -> &[i64] {
        &self.coords[i * self.config.dim..(i + 1) * self.config.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Index of the stored predecessor; the origin is its own predecessor.
    pub fn predecessor(&self, i: usize) -> usize {
        self.preds[i] as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.coords.chunks(self.config.dim)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.index_of(v).is_some()
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        if v.len() != self.config.dim || v.iter().any(|c| c.abs() > self.config.radius) {
            return None;
        }
        self.index.get(&pack(v, self.config.radius)).map(|&i| i as usize)
    }

    /// Indices from the origin to site `i` along stored predecessors.
    pub fn witness_path(&self, i: usize) -> Vec<usize> {
        let mut path = vec![i];
        let mut cur = i;
        while self.preds[cur] as usize != cur {
            cur = self.preds[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        path
    }
}

#[inline]
fn pack(v: &[i64], radius: i64) -> u64 {
    let side = (2 * radius + 1) as u64;
    v.iter()
        .rev()
        .fold(0u64, |acc, &c| acc * side + (c + radius) as u64)
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    label: f64,
    key: u64,
    idx: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.label
            .total_cmp(&other.label)
            .then(self.key.cmp(&other.key))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Full accessible set within the box.
pub fn accessible_set(config: &LatticeConfig) -> Result<AccessibleSet> {
    explore(config, &LabelField::new(config.seed), None, false)
}

/// Exploration with every option exposed: an explicit field, an optional
/// symmetry applied to field lookups, and early exit at the first frontier
/// site.
pub fn explore(
    config: &LatticeConfig,
    field: &LabelField,
    transform: Option<&SiteTransform>,
    stop_at_frontier: bool,
) -> Result<AccessibleSet> {
    config.validate()?;
    let dim = config.dim;
    let r = config.radius;
    let theta = config.theta;
    let metric = config.metric;
    let nb = config.mode == PathMode::NonBacktracking;
    let orthant = config.region == Region::Orthant;
    let rf = r as f64;

    let mut set = AccessibleSet {
        config: *config,
        coords: Vec::new(),
        labels: Vec::new(),
        preds: Vec::new(),
        index: KeyMap::default(),
        frontier_reached: false,
        complete: true,
    };
    // Per-site norm data, parallel to `labels`.
    let mut exact: Vec<Option<u128>> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    let mut scratch = vec![0i64; dim];

    let mut label_of = |v: &[i64], norm: f64| -> f64 {
        let u = match transform {
            Some(t) => {
                t.apply(v, &mut scratch);
                field.uniform(&scratch[..])
            }
            None => field.uniform(v),
        };
        u + theta * norm
    };

    let origin = vec![0i64; dim];
    let l0 = label_of(&origin, 0.0);
    set.coords.extend_from_slice(&origin);
    set.labels.push(l0);
    set.preds.push(0);
    exact.push(metric.exact_power(&origin));
    norms.push(0.0);
    set.index.insert(pack(&origin, r), 0);

    let mut heap = BinaryHeap::new();
    heap.push(Reverse(HeapEntry {
        label: l0,
        key: pack(&origin, r),
        idx: 0,
    }));
    let mut v = vec![0i64; dim];
    let mut w = vec![0i64; dim];
    while let Some(Reverse(e)) = heap.pop() {
        let i = e.idx as usize;
        if norms[i] >= rf {
            set.frontier_reached = true;
            if stop_at_frontier {
                set.complete = false;
                break;
            }
            continue;
        }
        v.copy_from_slice(set.site(i));
        let (xv, ev, nv) = (set.labels[i], exact[i], norms[i]);
        for axis in 0..dim {
            for step in [1i64, -1] {
                w.copy_from_slice(&v);
                w[axis] += step;
                if orthant && w[axis] < 0 {
                    continue;
                }
                let key = pack(&w, r);
                if set.index.contains_key(&key) {
                    continue;
                }
                let ew = metric.exact_power(&w);
                let nw = metric.norm(&w);
                if nb {
                    let further = match (ev, ew) {
                        (Some(a), Some(b)) => b > a,
                        _ => nw > nv,
                    };
                    if !further {
                        continue;
                    }
                }
                let xw = label_of(&w, nw);
                if xw <= xv {
                    continue;
                }
                let idx = set.labels.len() as u32;
                set.coords.extend_from_slice(&w);
                set.labels.push(xw);
                set.preds.push(i as u32);
                exact.push(ew);
                norms.push(nw);
                set.index.insert(key, idx);
                heap.push(Reverse(HeapEntry { label: xw, key, idx }));
            }
        }
    }
    Ok(set)
}

/// Crossing frequency at one θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub theta: f64,
    pub radius: i64,
    pub estimate: Estimate,
}

fn crossing_flags(config: &LatticeConfig, replicas: u64, transform: Option<&SiteTransform>) -> Result<Vec<bool>> {
    config.validate()?;
    if replicas < 1 {
        return Err(Error::invalid("replicas", "must be >= 1"));
    }
    let master = LabelField::new(config.seed);
    (0..replicas)
        .into_par_iter()
        .map(|k| explore(config, &master.replica(k), transform, true).map(|s| s.frontier_reached))
        .collect()
}

/// Fraction of replicas whose accessible set reaches `‖v‖_q ≥ R`. Replica
/// `k` uses `LabelField::new(seed).replica(k)`.
pub fn crossing_probability(config: &LatticeConfig, replicas: u64) -> Result<CrossingEstimate> {
    crossing_probability_with(config, replicas, None)
}

/// As [`crossing_probability`], with field lookups passed through `transform`.
pub fn crossing_probability_with(
    config: &LatticeConfig,
    replicas: u64,
    transform: Option<&SiteTransform>,
) -> Result<CrossingEstimate> {
    let flags = crossing_flags(config, replicas, transform)?;
    let hits = flags.iter().filter(|&&b| b).count() as u64;
    Ok(CrossingEstimate {
        theta: config.theta,
        radius: config.radius,
        estimate: Estimate::proportion(hits, replicas),
    })
}

/// Crossing curve over a θ grid; all grid points share the replica fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub config: LatticeConfig,
    pub replicas: u64,
    pub points: Vec<CrossingEstimate>,
    /// θ where the curve first reaches 1/2, interpolated between grid points.
    pub crossing: Option<f64>,
}

pub fn sweep_theta(config: &LatticeConfig, theta_grid: &[f64], replicas: u64) -> Result<SweepCurve> {
    let points = theta_grid
        .iter()
        .map(|&t| crossing_probability(&config.with_theta(t), replicas))
        .collect::<Result<Vec<_>>>()?;
    let crossing = points.iter().position(|p| p.estimate.value >= 0.5).map(|i| {
        if i == 0 {
            return points[0].theta;
        }
        let (a, b) = (&points[i - 1], &points[i]);
        let (pa, pb) = (a.estimate.value, b.estimate.value);
        a.theta + (b.theta - a.theta) * (0.5 - pa) / (pb - pa)
    });
    Ok(SweepCurve {
        config: *config,
        replicas,
        points,
        crossing,
    })
}

/// Outcome of the oriented-percolation coupling check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub theta: f64,
    pub seed: u64,
    pub radius: i64,
    /// Sites of the quadrant ball with `U_v < θ`.
    pub open_sites: usize,
    /// Open sites reachable from the origin by up/right steps through open sites.
    pub cluster_size: usize,
    pub edges_checked: usize,
    /// First edge of the open cluster whose labels do not increase.
    pub violation: Option<(Vec<i64>, Vec<i64>)>,
    /// Every cluster site is also in the non-backtracking accessible set.
    pub cluster_accessible: bool,
    pub passed: bool,
}

/// With `q = 1` on the quadrant, a site is open iff `U_v < θ`. An up/right
/// step from an open site raises the label by `U' + θ - U_v > 0`, so every
/// oriented path of open sites must be increasing. This checks that
/// implication on the sampled field for the ball `x + y ≤ R`.
pub fn oriented_coupling_check(theta: f64, seed: u64, radius: i64) -> Result<CouplingReport> {
    let config = LatticeConfig::new(2, Metric::l1(), PathMode::NonBacktracking, radius, theta, seed)?
        .with_region(Region::Orthant);
    let field = LabelField::new(seed);
    let label = |x: i64, y: i64| field.uniform(&[x, y]) + theta * (x + y) as f64;
    let open = |x: i64, y: i64| field.uniform(&[x, y]) < theta;

    let mut open_sites = 0;
    for x in 0..=radius {
        for y in 0..=radius - x {
            open_sites += open(x, y) as usize;
        }
    }

    let mut cluster: Vec<(i64, i64)> = Vec::new();
    let mut seen: KeyMap<()> = KeyMap::default();
    let mut edges_checked = 0;
    let mut violation = None;
    if open(0, 0) {
        let mut stack = vec![(0i64, 0i64)];
        seen.insert(pack(&[0, 0], radius), ());
        while let Some((x, y)) = stack.pop() {
            cluster.push((x, y));
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx + ny > radius || !open(nx, ny) {
                    continue;
                }
                edges_checked += 1;
                if label(nx, ny) <= label(x, y) && violation.is_none() {
                    violation = Some((vec![x, y], vec![nx, ny]));
                }
                if seen.insert(pack(&[nx, ny], radius), ()).is_none() {
                    stack.push((nx, ny));
                }
            }
        }
    }
    let acc = explore(&config, &field, None, false)?;
    let cluster_accessible = cluster.iter().all(|&(x, y)| acc.contains(&[x, y]));
    Ok(CouplingReport {
        theta,
        seed,
        radius,
        open_sites,
        cluster_size: cluster.len(),
        edges_checked,
        passed: violation.is_none() && cluster_accessible,
        violation,
        cluster_accessible,
    })
}

/// One exported site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub coords: Vec<i64>,
    pub label: f64,
    /// Smallest grid θ at which the site was accessible, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Records for every site of `set`, in exploration order.
pub fn export_records(set: &AccessibleSet, min_theta: Option<&[f64]>) -> Vec<ExportRecord> {
    (0..set.len())
        .map(|i| ExportRecord {
            coords: set.site(i).to_vec(),
            label: set.label(i),
            min_theta: min_theta.map(|m| m[i]),
        })
        .collect()
}

#[derive(Serialize)]
struct JsonExport<'a> {
    dim: usize,
    theta: f64,
    radius: i64,
    frontier_reached: bool,
    sites: &'a [ExportRecord],
}

/// Writes one record per site. CSV columns are `x0..x{n-1},label` plus
/// `min_theta` when annotations are given.
pub fn export_accessible<W: Write>(
    set: &AccessibleSet,
    min_theta: Option<&[f64]>,
    format: ExportFormat,
    out: W,
) -> Result<()> {
    let records = export_records(set, min_theta);
    match format {
        ExportFormat::Json => {
            serde_json::to_writer(
                out,
                &JsonExport {
                    dim: set.config.dim,
                    theta: set.config.theta,
                    radius: set.config.radius,
                    frontier_reached: set.frontier_reached,
                    sites: &records,
                },
            )?;
        }
        ExportFormat::Csv => write_csv(&records, set.config.dim, out)?,
    }
    Ok(())
}

pub fn write_csv<W: Write>(records: &[ExportRecord], dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let annotated = records.first().is_some_and(|r| r.min_theta.is_some());
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    if annotated {
        header.push("min_theta".into());
    }
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.coords.iter().map(|c| c.to_string()).collect();
        row.push(sig17(r.label));
        if let Some(m) = r.min_theta {
            row.push(sig17(m));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the CSV written by [`export_accessible`]; `#` lines are skipped.
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ExportRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = rdr.headers()?.clone();
    let dim = headers.iter().filter(|h| h.starts_with('x')).count();
    let annotated = headers.iter().any(|h| h == "min_theta");
    let bad = |what: &str| Error::invalid("csv", what.to_string());
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let coords = (0..dim)
            .map(|i| row[i].parse::<i64>().map_err(|_| bad("coordinate")))
            .collect::<Result<Vec<_>>>()?;
        let label = row[dim].parse::<f64>().map_err(|_| bad("label"))?;
        let min_theta = if annotated {
            Some(row[dim + 1].parse::<f64>().map_err(|_| bad("min_theta"))?)
        } else {
            None
        };
        out.push(ExportRecord {
            coords,
            label,
            min_theta,
        });
    }
    Ok(out)
}

/// The accessible set at the largest grid θ, with each site annotated by
/// the smallest grid θ at which it was accessible on the same field.
pub fn annotate_min_theta(config: &LatticeConfig, theta_grid: &[f64]) -> Result<(AccessibleSet, Vec<f64>)> {
    let mut grid = theta_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let top = *grid
        .last()
        .ok_or_else(|| Error::invalid("grid", "must contain at least one θ"))?;
    let sets = grid
        .iter()
        .map(|&t| accessible_set(&config.with_theta(t)))
        .collect::<Result<Vec<_>>>()?;
    let last = sets.last().expect("grid is nonempty");
    let min_theta = (0..last.len())
        .map(|i| {
            let v = last.site(i);
            grid.iter()
                .zip(&sets)
                .find(|(_, s)| s.contains(v))
                .map(|(&t, _)| t)
                .unwrap_or(top)
        })
        .collect();
    Ok((last.clone(), min_theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: PathMode, metric: Metric, r: i64, theta: f64, seed: u64) -> LatticeConfig {
        LatticeConfig::new(2, metric, mode, r, theta, seed).unwrap()
    }

    #[test]
    fn theta_one_fills_quadrant() {
        let c = cfg(PathMode::NonBacktracking, Metric::l1(), 20, 1.0, 3).with_region(Region::Orthant);
        let s = accessible_set(&c).unwrap();
        // All sites of the quadrant with x + y <= 20.
        assert_eq!(s.len(), 21 * 22 / 2);
        assert!(s.frontier_reached);
    }

    #[test]
    fn origin_first() {
        let c = cfg(PathMode::AllPaths, Metric::l2(), 10, 0.0, 1);
        let s = accessible_set(&c).unwrap();
        assert_eq!(s.site(0), &[0, 0]);
        assert_eq!(s.predecessor(0), 0);
    }

    #[test]
    fn guards() {
        assert!(matches!(
            LatticeConfig::new(2, Metric::l1(), PathMode::AllPaths, 5001, 0.5, 0),
            Err(Error::ResourceGuard(_))
        ));
        assert!(LatticeConfig::new(2, Metric::l1(), PathMode::AllPaths, 5000, 0.5, 0).is_ok());
        assert!(LatticeConfig::new(1, Metric::l1(), PathMode::AllPaths, 5, 0.5, 0).is_err());
        assert!(LatticeConfig::new(2, Metric::l1(), PathMode::AllPaths, 0, 0.5, 0).is_err());
    }

    #[test]
    fn pack_is_injective_on_box() {
        let mut seen = std::collections::HashSet::new();
        for x in -3..=3 {
            for y in -3..=3 {
                for z in -3..=3 {
                    assert!(seen.insert(pack(&[x, y, z], 3)));
                }
            }
        }
    }

    #[test]
    fn coupling_trivial_thetas() {
        let r = oriented_coupling_check(0.0, 5, 30).unwrap();
        assert!(r.passed);
        assert_eq!(r.open_sites, 0);
        let r = oriented_coupling_check(1.0, 5, 30).unwrap();
        assert!(r.passed);
        assert_eq!(r.cluster_size, 31 * 32 / 2);
    }
}
