//! Statistical estimation of tree loads over random multicast requests.
//!
//! Every cell of an experiment (one destination count) draws requests until
//! the confidence interval of every tracked mean is tight enough. All
//! variants of a cell (tree builder and diffuser budget) are evaluated on the
//! same requests, so differences and reductions between them are paired.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::dp::Solver;
use crate::error::{Error, Result};
use crate::graph::{average_degree, generate_waxman, Graph, MulticastRequest, WaxmanParams};
use crate::tree::{build_shp_tree, build_stt_tree, RootedTree};

/// Samples evaluated between two stopping checks.
const BATCH: usize = 32;

/// Below this many samples the Student-t quantile replaces the normal one.
const T_THRESHOLD: usize = 30;

pub const CSV_HEADER: &str = "builder,r,k,mean_load,ci_half,n_samples,reduction,diff_pct";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builder {
    ShortestPath,
    Steiner,
}

impl Builder {
    pub const ALL: [Builder; 2] = [Builder::ShortestPath, Builder::Steiner];

    pub fn build(self, graph: &Graph, req: &MulticastRequest) -> Result<RootedTree> {
        match self {
            Self::ShortestPath => build_shp_tree(graph, req),
            Self::Steiner => build_stt_tree(graph, req),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ShortestPath => "ShP",
            Self::Steiner => "StT",
        })
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shp" => Ok(Self::ShortestPath),
            "stt" => Ok(Self::Steiner),
            _ => Err(Error::InvalidParameter(format!(
                "unknown tree builder {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub waxman: WaxmanParams,
    pub seed: u64,
    /// Destination counts of the destination sweep.
    pub dest_counts: Vec<usize>,
    /// Budgets of the diffuser sweep and of the critical-point study.
    pub k_values: Vec<usize>,
    /// Destination count of the diffuser sweep.
    pub n_dest: usize,
    /// Destination counts scanned by the critical-point study, inclusive.
    pub r_min: usize,
    pub r_max: usize,
    /// Links per node for the degree study.
    pub m_values: Vec<usize>,
    /// Target relative half-width of every confidence interval.
    pub precision: f64,
    pub confidence: f64,
    pub min_samples: usize,
    pub max_samples: usize,
    /// Number of topologies samples are spread over.
    pub topologies: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            waxman: WaxmanParams::default(),
            seed: 42,
            dest_counts: vec![2, 4, 8, 12, 16, 20, 24, 28, 32],
            k_values: (1..=15).collect(),
            n_dest: 20,
            r_min: 2,
            r_max: 100,
            m_values: vec![2, 3, 4, 5],
            precision: 0.05,
            confidence: 0.95,
            min_samples: 30,
            max_samples: 20_000,
            topologies: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.precision > 0.0 && self.precision < 1.0) {
            return bad(format!(
                "precision must lie in (0, 1), got {}",
                self.precision
            ));
        }
        if !(self.confidence > 0.5 && self.confidence < 1.0) {
            return bad(format!(
                "confidence must lie in (0.5, 1), got {}",
                self.confidence
            ));
        }
        if self.min_samples < 2 {
            return bad("min_samples must be at least 2".into());
        }
        if self.max_samples < self.min_samples {
            return bad("max_samples must not be below min_samples".into());
        }
        if self.topologies < 1 {
            return bad("topologies must be at least 1".into());
        }
        if self.r_min < 1 || self.r_min > self.r_max {
            return bad(format!(
                "invalid destination range {}..={}",
                self.r_min, self.r_max
            ));
        }
        Ok(())
    }

    /// Applies `key=value` lines and returns the keys that were set. Blank
    /// lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<Vec<String>> {
        let mut keys = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |message: String| Error::Format {
                path: format!("{origin}:{}", no + 1),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key=value, got {line:?}")))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| at(e.to_string()))?;
            keys.push(key.trim().replace('-', "_"));
        }
        Ok(keys)
    }

    /// Sets one option by name, as used by config files and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value {value:?} for {key}")))
        }
        match key.replace('-', "_").as_str() {
            "nodes" => self.waxman.nodes = num(key, value)?,
            "alpha" => self.waxman.alpha = num(key, value)?,
            "beta" => self.waxman.beta = num(key, value)?,
            "m" => self.waxman.m = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "dest_counts" => self.dest_counts = parse_list(value)?,
            "k_values" => self.k_values = parse_list(value)?,
            "n_dest" => self.n_dest = num(key, value)?,
            "r_min" => self.r_min = num(key, value)?,
            "r_max" => self.r_max = num(key, value)?,
            "m_values" => self.m_values = parse_list(value)?,
            "precision" => self.precision = num(key, value)?,
            "confidence" => self.confidence = num(key, value)?,
            "min_samples" => self.min_samples = num(key, value)?,
            "max_samples" => self.max_samples = num(key, value)?,
            "topologies" => self.topologies = num(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// The topologies samples are drawn over, seeded from `seed`.
    pub fn graphs(&self) -> Result<Vec<Graph>> {
        self.graphs_with(&self.waxman)
    }

    fn graphs_with(&self, params: &WaxmanParams) -> Result<Vec<Graph>> {
        (0..self.topologies as u64)
            .map(|t| generate_waxman(params, self.seed.wrapping_add(t * 1000)))
            .collect()
    }
}

/// Parses `1,2,5` or an inclusive range `1..15` (ranges and items may mix).
pub fn parse_list(value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::InvalidParameter(format!("bad list item {item:?}"));
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b
                .trim_start_matches('=')
                .trim()
                .parse()
                .map_err(|_| bad())?;
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty list".into()));
    }
    Ok(out)
}

/// Estimated mean load of one (builder, destination count, budget) variant.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub builder: Builder,
    pub n_dest: usize,
    pub k: usize,
    pub mean_load: f64,
    pub ci_half_width: f64,
    pub n_samples: usize,
    /// The cell stopped at `max_samples` before reaching the target precision.
    pub hit_max_samples: bool,
}

/// An estimate plus the derived comparison columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub estimate: EstimateRow,
    /// `1 - mean(k) / mean(k = 0)` for the same builder and destination count.
    pub reduction: Option<f64>,
    /// `100 * (ShP - StT) / StT` for the same destination count and budget.
    pub diff_pct: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn half_width(&self, quantile: f64) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let var = self.m2 / (self.n - 1) as f64;
        quantile * (var / self.n as f64).sqrt()
    }
}

/// Two-sided critical value for `n` samples.
fn critical_value(confidence: f64, n: usize) -> f64 {
    let p = 0.5 + confidence / 2.0;
    if n < T_THRESHOLD {
        StudentsT::new(0.0, 1.0, (n.max(2) - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(p)
    } else {
        Normal::standard().inverse_cdf(p)
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_seed(seed: u64, n_dest: usize, index: usize) -> u64 {
    mix(mix(mix(seed) ^ n_dest as u64) ^ index as u64)
}

/// Draws the request of sample `index`: source uniform in the graph,
/// destinations uniform without replacement among the other nodes.
pub fn sample_request(
    graph: &Graph,
    n_dest: usize,
    seed: u64,
    index: usize,
) -> Result<MulticastRequest> {
    let n = graph.node_count();
    if n_dest >= n {
        return Err(Error::InvalidParameter(format!(
            "{n_dest} destinations do not fit in {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, n_dest, index));
    let source = rng.gen_range(0..n);
    let dests =
        sample(&mut rng, n - 1, n_dest)
            .into_iter()
            .map(|i| if i >= source { i + 1 } else { i });
    MulticastRequest::new(graph, source, dests)
}

/// Loads of one request for every builder and every budget `0..=k_max`.
fn evaluate_sample(
    graphs: &[Graph],
    builders: &[Builder],
    n_dest: usize,
    k_max: usize,
    seed: u64,
    index: usize,
) -> Result<Vec<Vec<u64>>> {
    let graph = &graphs[index % graphs.len()];
    let req = sample_request(graph, n_dest, seed, index)?;
    builders
        .iter()
        .map(|&b| {
            let tree = b.build(graph, &req)?;
            let loads = Solver::new(k_max).solve(&tree)?.loads();
            check_sample(b, &tree, &loads)?;
            Ok(loads)
        })
        .collect()
}

fn check_sample(builder: Builder, tree: &RootedTree, loads: &[u64]) -> Result<()> {
    let fail = |what: &str| Err(Error::InvalidTree(format!("{builder} sample: {what}")));
    let arcs = tree.arc_count() as u64;
    if loads.windows(2).any(|w| w[1] > w[0]) {
        return fail("load increases with the budget");
    }
    if loads.iter().any(|&l| l < arcs) {
        return fail("load below the arc count");
    }
    if builder == Builder::ShortestPath {
        let dense = tree.dense()?;
        let depth_sum: u64 = (0..dense.len())
            .filter(|&i| dense.is_dest[i])
            .map(|i| u64::from(dense.depth[i]))
            .sum();
        if loads[0] != depth_sum {
            return fail("unicast load differs from the sum of hop distances");
        }
    }
    Ok(())
}

/// Estimates, on paired samples, the mean load of every builder and budget
/// for one destination count.
pub fn estimate_cell(
    graphs: &[Graph],
    builders: &[Builder],
    n_dest: usize,
    ks: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Vec<EstimateRow>> {
    cfg.validate()?;
    if graphs.is_empty() || builders.is_empty() || ks.is_empty() {
        return Err(Error::InvalidParameter("empty experiment cell".into()));
    }
    if let Some(g) = graphs.iter().find(|g| n_dest >= g.node_count()) {
        return Err(Error::InvalidParameter(format!(
            "{n_dest} destinations do not fit in {} nodes",
            g.node_count()
        )));
    }
    let k_max = *ks.iter().max().expect("non-empty");
    let mut acc = vec![vec![Welford::default(); ks.len()]; builders.len()];
    let mut quantiles: Vec<f64> = (0..T_THRESHOLD + 1)
        .map(|n| critical_value(cfg.confidence, n))
        .collect();
    quantiles.shrink_to_fit();
    let quantile = |n: usize| quantiles[n.min(T_THRESHOLD)];

    let mut next = 0;
    let mut done = false;
    while !done {
        let end = (next + BATCH).min(cfg.max_samples);
        let batch: Vec<Result<Vec<Vec<u64>>>> = (next..end)
            .into_par_iter()
            .map(|i| evaluate_sample(graphs, builders, n_dest, k_max, cfg.seed, i))
            .collect();
        for sample in batch {
            let sample = sample?;
            for (bi, loads) in sample.iter().enumerate() {
                for (ki, &k) in ks.iter().enumerate() {
                    acc[bi][ki].push(loads[k] as f64);
                }
            }
            next += 1;
            let n = next;
            let precise = n >= cfg.min_samples
                && acc
                    .iter()
                    .flatten()
                    .all(|w| w.half_width(quantile(n)) <= cfg.precision * w.mean);
            if precise || n >= cfg.max_samples {
                done = true;
                break;
            }
        }
    }

    let n = next;
    let mut rows = Vec::with_capacity(builders.len() * ks.len());
    for (bi, &builder) in builders.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let w = acc[bi][ki];
            let half = w.half_width(quantile(n));
            rows.push(EstimateRow {
                builder,
                n_dest,
                k,
                mean_load: w.mean,
                ci_half_width: half,
                n_samples: n,
                hit_max_samples: half > cfg.precision * w.mean,
            });
        }
    }
    Ok(rows)
}

/// Mean load of a single builder and budget.
pub fn estimate_mean_load(
    graph: &Graph,
    builder: Builder,
    n_dest: usize,
    k: usize,
    cfg: &ExperimentConfig,
) -> Result<EstimateRow> {
    let rows = estimate_cell(std::slice::from_ref(graph), &[builder], n_dest, &[k], cfg)?;
    Ok(rows.into_iter().next().expect("one variant"))
}

/// Adds reduction and ShP-vs-StT difference columns.
pub fn derive_columns(rows: Vec<EstimateRow>) -> Vec<SweepRow> {
    let find = |b: Builder, r: usize, k: usize| {
        rows.iter()
            .find(|e| e.builder == b && e.n_dest == r && e.k == k)
            .map(|e| e.mean_load)
    };
    rows.iter()
        .map(|e| {
            let reduction = find(e.builder, e.n_dest, 0).map(|base| 1.0 - e.mean_load / base);
            let diff_pct = match (
                find(Builder::ShortestPath, e.n_dest, e.k),
                find(Builder::Steiner, e.n_dest, e.k),
            ) {
                (Some(shp), Some(stt)) => Some(100.0 * (shp - stt) / stt),
                _ => None,
            };
            SweepRow {
                estimate: e.clone(),
                reduction,
                diff_pct,
            }
        })
        .collect()
}

/// Both builders, every destination count of `cfg.dest_counts`, with no
/// diffuser and with four.
pub fn sweep_destinations(graphs: &[Graph], cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.dest_counts.is_empty() {
        return Err(Error::InvalidParameter("no destination counts".into()));
    }
    let mut rows = Vec::new();
    for &r in &cfg.dest_counts {
        rows.extend(estimate_cell(graphs, &Builder::ALL, r, &[0, 4], cfg)?);
    }
    Ok(derive_columns(sort_rows(rows)))
}

/// Both builders at `n_dest` destinations for every budget of `cfg.k_values`
/// plus the no-diffuser baseline.
pub fn sweep_diffusers(
    graphs: &[Graph],
    cfg: &ExperimentConfig,
    n_dest: usize,
) -> Result<Vec<SweepRow>> {
    if cfg.k_values.is_empty() {
        return Err(Error::InvalidParameter("no budgets".into()));
    }
    let mut ks = vec![0];
    ks.extend(cfg.k_values.iter().copied().filter(|&k| k != 0));
    ks.sort_unstable();
    ks.dedup();
    let rows = estimate_cell(graphs, &Builder::ALL, n_dest, &ks, cfg)?;
    Ok(derive_columns(sort_rows(rows)))
}

fn sort_rows(mut rows: Vec<EstimateRow>) -> Vec<EstimateRow> {
    rows.sort_by_key(|e| (e.builder, e.n_dest, e.k));
    rows
}

/// Outcome of the critical-point study.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalStudy {
    /// For each budget, the smallest destination count at which ShP trees are
    /// lighter than StT trees, if any within the scanned range.
    pub points: Vec<(usize, Option<usize>)>,
    /// Least-squares slope of the destination count against the budget.
    pub slope: Option<f64>,
    pub rows: Vec<SweepRow>,
}

/// Scans destination counts upward for every budget in `cfg.k_values`.
pub fn find_critical_points(graphs: &[Graph], cfg: &ExperimentConfig) -> Result<CriticalStudy> {
    let mut ks: Vec<usize> = cfg.k_values.clone();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InvalidParameter("no budgets".into()));
    }
    let n_max = graphs.iter().map(Graph::node_count).min().unwrap_or(0);
    let mut found: Vec<Option<usize>> = vec![None; ks.len()];
    let mut rows = Vec::new();
    for r in cfg.r_min..=cfg.r_max.min(n_max.saturating_sub(1)) {
        let cell = estimate_cell(graphs, &Builder::ALL, r, &ks, cfg)?;
        for (ki, &k) in ks.iter().enumerate() {
            if found[ki].is_some() {
                continue;
            }
            let mean = |b| {
                cell.iter()
                    .find(|e| e.builder == b && e.k == k)
                    .map(|e| e.mean_load)
            };
            if let (Some(shp), Some(stt)) = (mean(Builder::ShortestPath), mean(Builder::Steiner)) {
                if shp < stt {
                    found[ki] = Some(r);
                }
            }
        }
        rows.extend(cell);
        if found.iter().all(Option::is_some) {
            break;
        }
    }
    let points: Vec<(usize, Option<usize>)> = ks.iter().copied().zip(found).collect();
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(k, r)| r.map(|r| (k as f64, r as f64)))
        .collect();
    Ok(CriticalStudy {
        slope: least_squares_slope(&fit),
        points,
        rows: derive_columns(rows),
    })
}

/// Slope of the ordinary least-squares line through `points`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeRow {
    pub m: usize,
    pub avg_degree: f64,
    pub slope: Option<f64>,
    pub points: Vec<(usize, Option<usize>)>,
}

/// Critical-line slope for Waxman graphs of increasing density, sorted by
/// average degree.
pub fn gradient_vs_degree(cfg: &ExperimentConfig, m_values: &[usize]) -> Result<Vec<DegreeRow>> {
    let mut out = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let params = WaxmanParams { m, ..cfg.waxman };
        let graphs = cfg.graphs_with(&params)?;
        let avg_degree = graphs.iter().map(average_degree).sum::<f64>() / graphs.len() as f64;
        let study = find_critical_points(&graphs, cfg)?;
        out.push(DegreeRow {
            m,
            avg_degree,
            slope: study.slope,
            points: study.points,
        });
    }
    out.sort_by(|a, b| a.avg_degree.total_cmp(&b.avg_degree).then(a.m.cmp(&b.m)));
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

/// Writes rows under [`CSV_HEADER`].
pub fn write_rows_csv(rows: &[SweepRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        let e = &row.estimate;
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{},{},{}",
            e.builder,
            e.n_dest,
            e.k,
            e.mean_load,
            e.ci_half_width,
            e.n_samples,
            opt(row.reduction),
            opt(row.diff_pct)
        )?;
    }
    Ok(())
}

pub fn write_points_csv(
    points: &[(usize, Option<usize>)],
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "k,r_star")?;
    for &(k, r) in points {
        writeln!(w, "{k},{}", r.map_or_else(String::new, |r| r.to_string()))?;
    }
    Ok(())
}

pub fn write_degree_csv(rows: &[DegreeRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "m,avg_degree,slope")?;
    for row in rows {
        writeln!(w, "{},{:.6},{}", row.m, row.avg_degree, opt(row.slope))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            waxman: WaxmanParams {
                nodes: 60,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.precision = 1.0;
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig {
            confidence: 0.4,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig {
            min_samples: 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_text_and_lists() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# comment\nnodes = 50\nk_values=1..3, 7\n\nprecision=0.1 # tail",
            "cfg",
        )
        .unwrap();
        assert_eq!(cfg.waxman.nodes, 50);
        assert_eq!(cfg.k_values, vec![1, 2, 3, 7]);
        assert_eq!(cfg.precision, 0.1);
        let err = cfg.apply_text("nodes=5\nbogus=1", "cfg").unwrap_err();
        assert!(err.to_string().starts_with("cfg:2:"), "{err}");
        assert!(parse_list("").is_err());
        assert!(parse_list("1..x").is_err());
    }

    #[test]
    fn requests_are_uniform_and_valid() {
        let g = generate_waxman(
            &WaxmanParams {
                nodes: 20,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        for i in 0..50 {
            let req = sample_request(&g, 5, 9, i).unwrap();
            assert_eq!(req.destinations().len(), 5);
            assert!(!req.destinations().contains(&req.source()));
        }
        assert_eq!(
            sample_request(&g, 5, 9, 3).unwrap(),
            sample_request(&g, 5, 9, 3).unwrap()
        );
        assert!(sample_request(&g, 20, 9, 0).is_err());
    }

    #[test]
    fn loose_precision_stops_at_min_samples() {
        let cfg = ExperimentConfig {
            precision: 0.5,
            min_samples: 10,
            ..small_cfg()
        };
        let g = &cfg.graphs().unwrap()[0];
        let row = estimate_mean_load(g, Builder::ShortestPath, 4, 0, &cfg).unwrap();
        assert_eq!(row.n_samples, 10);
        assert!(!row.hit_max_samples);
    }

    #[test]
    fn max_samples_flag() {
        let cfg = ExperimentConfig {
            precision: 0.001,
            min_samples: 5,
            max_samples: 40,
            ..small_cfg()
        };
        let g = &cfg.graphs().unwrap()[0];
        let row = estimate_mean_load(g, Builder::Steiner, 3, 1, &cfg).unwrap();
        assert_eq!(row.n_samples, 40);
        assert!(row.hit_max_samples);
    }

    #[test]
    fn derived_columns() {
        let mk = |builder, k, mean_load| EstimateRow {
            builder,
            n_dest: 8,
            k,
            mean_load,
            ci_half_width: 0.0,
            n_samples: 1,
            hit_max_samples: false,
        };
        let rows = derive_columns(vec![
            mk(Builder::ShortestPath, 0, 10.0),
            mk(Builder::ShortestPath, 4, 7.0),
            mk(Builder::Steiner, 0, 20.0),
            mk(Builder::Steiner, 4, 5.0),
        ]);
        assert!((rows[1].reduction.unwrap() - 0.3).abs() < 1e-12);
        assert!((rows[3].reduction.unwrap() - 0.75).abs() < 1e-12);
        assert!((rows[0].diff_pct.unwrap() + 50.0).abs() < 1e-12);
        assert!((rows[1].diff_pct.unwrap() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn slope_fit() {
        assert_eq!(
            least_squares_slope(&[(1.0, 3.0), (2.0, 8.0), (3.0, 13.0)]),
            Some(5.0)
        );
        assert_eq!(least_squares_slope(&[(1.0, 3.0)]), None);
    }

    #[test]
    fn rows_csv_layout() {
        let rows = derive_columns(vec![EstimateRow {
            builder: Builder::Steiner,
            n_dest: 2,
            k: 0,
            mean_load: 4.5,
            ci_half_width: 0.25,
            n_samples: 30,
            hit_max_samples: false,
        }]);
        let mut buf = Vec::new();
        write_rows_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{CSV_HEADER}\nStT,2,0,4.500000,0.250000,30,0.000000,\n")
        );
    }
}
