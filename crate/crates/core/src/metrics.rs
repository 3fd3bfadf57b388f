//! Structural statistics of interbank networks.
//!
//! All operations are pure functions of immutable networks. Reductions
//! run in ascending bank-index order, so results are deterministic and
//! reproducible bit-for-bit.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::InterbankNetwork;

/// Which side of a directed edge a statistic looks at.
///
/// `In` is the borrower side of a bank's book (its credit exposures),
/// `Out` the creditor side (its obligations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::In => f.write_str("in"),
            Direction::Out => f.write_str("out"),
        }
    }
}

/// Probability of a link between a random pair of banks: `2K / N(N-1)`
/// for `K` directed edges over `N` banks.
pub fn link_probability(net: &InterbankNetwork) -> Result<f64> {
    let n = net.n_banks();
    if n < 2 {
        return Err(Error::TooFewBanks(format!(
            "link probability needs at least 2 banks, universe has {n}"
        )));
    }
    Ok(2.0 * net.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Mean degree `z1 = K / N` (identical for in and out by the handshake
/// identity).
pub fn mean_degree(net: &InterbankNetwork) -> Result<f64> {
    let n = net.n_banks();
    if n == 0 {
        return Err(Error::TooFewBanks("mean degree of an empty universe".into()));
    }
    Ok(net.edge_count() as f64 / n as f64)
}

/// Mean number of directed length-2 walks per vertex, following `dir`
/// twice.
///
/// Both directions yield the same number: each walk is counted at its
/// middle vertex, contributing `k_in * k_out` either way. The parameter
/// is kept so reports can label the figure they quote.
pub fn second_neighbor_count(net: &InterbankNetwork, _dir: Direction) -> f64 {
    let n = net.n_banks();
    if n == 0 {
        return 0.0;
    }
    let walks: u128 = (0..n)
        .map(|i| net.k_in(i) as u128 * net.k_out(i) as u128)
        .sum();
    walks as f64 / n as f64
}

/// The giant-component test `z2 / z1 > 2`.
pub fn giant_component_criterion(z1: f64, z2: f64) -> Result<bool> {
    if !(z1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "giant-component criterion undefined for z1 = {z1}"
        )));
    }
    Ok(z2 / z1 > 2.0)
}

/// Average clustering coefficients over in- and out-neighborhoods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusteringCoefficients {
    pub c_in: f64,
    pub c_out: f64,
    /// Vertices with at least two in-neighbors (averaged over); zero
    /// means no vertex qualified and `c_in` defaults to 0.
    pub qualifying_in: usize,
    pub qualifying_out: usize,
}

/// Clustering treats the graph as undirected for link existence: banks
/// `u`, `v` are linked when either owes the other. A vertex contributes
/// the fraction of linked pairs among its in- (out-) neighbors; vertices
/// with fewer than two neighbors are excluded from the average.
pub fn clustering_coefficients(net: &InterbankNetwork) -> ClusteringCoefficients {
    let linked = |u: usize, v: usize| {
        net.out_adj(u).binary_search_by_key(&(v as u32), |&(j, _)| j).is_ok()
            || net.out_adj(v).binary_search_by_key(&(u as u32), |&(j, _)| j).is_ok()
    };
    let average = |neighbor_sets: &dyn Fn(usize) -> Vec<usize>| {
        let mut sum = 0.0;
        let mut qualifying = 0usize;
        for v in 0..net.n_banks() {
            let neighbors = neighbor_sets(v);
            let z = neighbors.len();
            if z < 2 {
                continue;
            }
            let mut links = 0usize;
            for a in 0..z {
                for b in (a + 1)..z {
                    if linked(neighbors[a], neighbors[b]) {
                        links += 1;
                    }
                }
            }
            sum += links as f64 / (z * (z - 1) / 2) as f64;
            qualifying += 1;
        }
        if qualifying == 0 {
            (0.0, 0)
        } else {
            (sum / qualifying as f64, qualifying)
        }
    };
    let (c_in, qualifying_in) =
        average(&|v| net.in_adj(v).iter().map(|&(j, _)| j as usize).collect());
    let (c_out, qualifying_out) =
        average(&|v| net.out_adj(v).iter().map(|&(j, _)| j as usize).collect());
    ClusteringCoefficients {
        c_in,
        c_out,
        qualifying_in,
        qualifying_out,
    }
}

/// Pooled degree histogram over one or more networks, zero-degree banks
/// included.
pub fn degree_histogram<'a>(
    nets: impl IntoIterator<Item = &'a InterbankNetwork>,
    dir: Direction,
) -> BTreeMap<usize, u64> {
    let mut hist = BTreeMap::new();
    for net in nets {
        for i in 0..net.n_banks() {
            let k = match dir {
                Direction::In => net.k_in(i),
                Direction::Out => net.k_out(i),
            };
            *hist.entry(k).or_insert(0u64) += 1;
        }
    }
    hist
}

/// Power-law tail fit of a degree histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// Discrete maximum-likelihood estimate.
    pub gamma: f64,
    /// Log-log least-squares slope of the histogram, as a diagnostic.
    pub gamma_lsq: f64,
    pub k_min: usize,
    pub n_tail: u64,
}

/// Fits `P(k) ~ k^-gamma` to the histogram tail `k >= k_min` using the
/// discrete MLE `gamma = 1 + n / sum(ln(k_i / (k_min - 1/2)))`, and a
/// log-log regression of bin counts as a cross-check.
pub fn fit_tail_exponent(hist: &BTreeMap<usize, u64>, k_min: usize) -> Result<TailFit> {
    if k_min < 1 {
        return Err(Error::TailFit("k_min must be at least 1".into()));
    }
    let tail: Vec<(usize, u64)> = hist
        .iter()
        .filter(|&(&k, &c)| k >= k_min && c > 0)
        .map(|(&k, &c)| (k, c))
        .collect();
    let n_tail: u64 = tail.iter().map(|&(_, c)| c).sum();
    if n_tail < 10 {
        return Err(Error::TailFit(format!(
            "need at least 10 tail samples with k >= {k_min}, found {n_tail}"
        )));
    }
    if tail.len() < 2 {
        return Err(Error::TailFit(format!(
            "degenerate tail: all {n_tail} samples have k = {}",
            tail[0].0
        )));
    }

    let shift = k_min as f64 - 0.5;
    let log_sum: f64 = tail
        .iter()
        .map(|&(k, c)| c as f64 * (k as f64 / shift).ln())
        .sum();
    let gamma = 1.0 + n_tail as f64 / log_sum;

    // Least-squares on (ln k, ln count) over occupied bins.
    let m = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let var: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let gamma_lsq = -cov / var;

    Ok(TailFit {
        gamma,
        gamma_lsq,
        k_min,
        n_tail,
    })
}

/// Mean degree of out-neighbors as a function of the vertex out-degree.
///
/// Sums are kept as integers; the mean is derived, so pooled curves from
/// disjoint network sets combine exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorrelationCurve {
    pub points: BTreeMap<usize, CurvePoint>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub degree_sum: u128,
    pub samples: u64,
}

impl CurvePoint {
    pub fn mean(&self) -> f64 {
        self.degree_sum as f64 / self.samples as f64
    }
}

impl CorrelationCurve {
    pub fn total_samples(&self) -> u64 {
        self.points.values().map(|p| p.samples).sum()
    }
}

/// For each observed out-degree `k1`, the mean `target` degree over all
/// out-neighbors of all vertices with out-degree `k1`, pooled across
/// networks.
pub fn degree_correlation_curve<'a>(
    nets: impl IntoIterator<Item = &'a InterbankNetwork>,
    target: Direction,
) -> CorrelationCurve {
    let mut curve = CorrelationCurve::default();
    for net in nets {
        for v in 0..net.n_banks() {
            let k1 = net.k_out(v);
            if k1 == 0 {
                continue;
            }
            let point = curve.points.entry(k1).or_default();
            for &(u, _) in net.out_adj(v) {
                let k2 = match target {
                    Direction::In => net.k_in(u as usize),
                    Direction::Out => net.k_out(u as usize),
                };
                point.degree_sum += k2 as u128;
                point.samples += 1;
            }
        }
    }
    curve
}

/// A degree condition of the activity decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DegreeCondition {
    Zero,
    GreaterThan(usize),
}

impl DegreeCondition {
    pub fn matches(self, k: usize) -> bool {
        match self {
            DegreeCondition::Zero => k == 0,
            DegreeCondition::GreaterThan(t) => k > t,
        }
    }
}

impl fmt::Display for DegreeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeCondition::Zero => f.write_str("k=0"),
            DegreeCondition::GreaterThan(t) => write!(f, "k>{t}"),
        }
    }
}

impl Serialize for DegreeCondition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Bank classes of the activity decomposition. `OnlyIn` and `OnlyOut`
/// additionally require the opposite degree to be zero (pure lenders and
/// pure borrowers when the condition is `k>0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    In,
    Out,
    OnlyIn,
    OnlyOut,
}

impl Membership {
    pub const ALL: [Membership; 4] = [
        Membership::In,
        Membership::Out,
        Membership::OnlyIn,
        Membership::OnlyOut,
    ];

    fn matches(self, k_in: usize, k_out: usize, cond: DegreeCondition) -> bool {
        match self {
            Membership::In => cond.matches(k_in),
            Membership::Out => cond.matches(k_out),
            Membership::OnlyIn => cond.matches(k_in) && k_out == 0,
            Membership::OnlyOut => cond.matches(k_out) && k_in == 0,
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::In => f.write_str("In"),
            Membership::Out => f.write_str("Out"),
            Membership::OnlyIn => f.write_str("Only In"),
            Membership::OnlyOut => f.write_str("Only Out"),
        }
    }
}

/// One decomposition cell: per-day bank counts plus their mean and
/// population standard deviation across days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionCell {
    pub per_day: Vec<u64>,
    pub mean: f64,
    pub sd: f64,
}

impl DecompositionCell {
    fn from_counts(per_day: Vec<u64>) -> DecompositionCell {
        let n = per_day.len() as f64;
        let mean = per_day.iter().sum::<u64>() as f64 / n;
        let var = per_day
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        DecompositionCell {
            per_day,
            mean,
            sd: var.sqrt(),
        }
    }
}

/// Mean daily counts of banks per membership row and degree condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTable {
    pub conditions: Vec<DegreeCondition>,
    /// One entry per [`Membership::ALL`] row, cells aligned with
    /// `conditions`.
    pub rows: Vec<(Membership, Vec<DecompositionCell>)>,
    pub n_days: usize,
}

/// Counts, per day, the banks whose in/out degree satisfies each
/// condition for each membership row, then averages across days.
///
/// `thresholds` become the `k>t` conditions; `k=0` is always included.
pub fn activity_decomposition<'a>(
    nets: impl IntoIterator<Item = &'a InterbankNetwork>,
    thresholds: &[usize],
) -> Result<DecompositionTable> {
    let nets: Vec<&InterbankNetwork> = nets.into_iter().collect();
    if nets.is_empty() {
        return Err(Error::EmptyNetworkSet);
    }
    let mut conditions = vec![DegreeCondition::Zero];
    let mut ts: Vec<usize> = thresholds.to_vec();
    ts.sort_unstable();
    ts.dedup();
    conditions.extend(ts.into_iter().map(DegreeCondition::GreaterThan));

    let mut rows = Vec::new();
    for membership in Membership::ALL {
        let mut cells = Vec::new();
        for &cond in &conditions {
            let per_day: Vec<u64> = nets
                .iter()
                .map(|net| {
                    (0..net.n_banks())
                        .filter(|&i| membership.matches(net.k_in(i), net.k_out(i), cond))
                        .count() as u64
                })
                .collect();
            cells.push(DecompositionCell::from_counts(per_day));
        }
        rows.push((membership, cells));
    }
    Ok(DecompositionTable {
        conditions,
        rows,
        n_days: nets.len(),
    })
}

/// Share of total directed strength held by banks whose `dir`-degree
/// exceeds `threshold`.
///
/// With `dir = Out` this is the share of total systemic debt owed by
/// large borrowers; with `dir = In`, the share of total loans held by
/// well-diversified lenders.
pub fn weight_concentration(
    net: &InterbankNetwork,
    dir: Direction,
    threshold: usize,
) -> Result<f64> {
    let mut total: u128 = 0;
    let mut tail: u128 = 0;
    for i in 0..net.n_banks() {
        let (k, strength_atoms) = match dir {
            Direction::In => (
                net.k_in(i),
                net.in_adj(i).iter().map(|&(_, w)| w.atoms() as u128).sum::<u128>(),
            ),
            Direction::Out => (
                net.k_out(i),
                net.out_adj(i).iter().map(|&(_, w)| w.atoms() as u128).sum::<u128>(),
            ),
        };
        total += strength_atoms;
        if k > threshold {
            tail += strength_atoms;
        }
    }
    if total == 0 {
        return Err(Error::ZeroExposure {
            direction: match dir {
                Direction::In => "in",
                Direction::Out => "out",
            },
        });
    }
    Ok(tail as f64 / total as f64)
}

/// Headline structural statistics for one network.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkStats {
    pub day: String,
    pub n_total: usize,
    pub n_active: usize,
    pub n_pure_lenders: usize,
    pub n_pure_borrowers: usize,
    pub n_intermediaries: usize,
    pub edge_count: usize,
    /// `None` when the universe has fewer than 2 banks.
    pub p: Option<f64>,
    pub c_in: f64,
    pub c_out: f64,
    pub c_in_qualifying: usize,
    pub c_out_qualifying: usize,
    pub z1: f64,
    /// Mean length-2 directed-walk count per vertex (equal for the two
    /// directions under this definition; both fields kept for reports).
    pub z2_in: f64,
    pub z2_out: f64,
    pub giant_in: Option<bool>,
    pub giant_out: Option<bool>,
}

pub fn network_stats(net: &InterbankNetwork) -> Result<NetworkStats> {
    let n = net.n_banks();
    if n == 0 {
        return Err(Error::TooFewBanks("stats of an empty universe".into()));
    }
    let mut n_pure_lenders = 0;
    let mut n_pure_borrowers = 0;
    let mut n_intermediaries = 0;
    for i in 0..n {
        match (net.k_in(i) > 0, net.k_out(i) > 0) {
            (true, false) => n_pure_lenders += 1,
            (false, true) => n_pure_borrowers += 1,
            (true, true) => n_intermediaries += 1,
            (false, false) => {}
        }
    }
    let clustering = clustering_coefficients(net);
    let z1 = mean_degree(net)?;
    let z2_in = second_neighbor_count(net, Direction::In);
    let z2_out = second_neighbor_count(net, Direction::Out);
    let giant = |z2: f64| {
        if z1 > 0.0 {
            Some(z2 / z1 > 2.0)
        } else {
            None
        }
    };
    Ok(NetworkStats {
        day: net.day().to_string(),
        n_total: n,
        n_active: n_pure_lenders + n_pure_borrowers + n_intermediaries,
        n_pure_lenders,
        n_pure_borrowers,
        n_intermediaries,
        edge_count: net.edge_count(),
        p: link_probability(net).ok(),
        c_in: clustering.c_in,
        c_out: clustering.c_out,
        c_in_qualifying: clustering.qualifying_in,
        c_out_qualifying: clustering.qualifying_out,
        z1,
        z2_in,
        z2_out,
        giant_in: giant(z2_in),
        giant_out: giant(z2_out),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_util::{bid, star};
    use crate::graph::{BankId, DayLabel};
    use crate::money::Money;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn net_from_edges(n: usize, edges: &[(usize, usize)]) -> InterbankNetwork {
        let universe: Vec<BankId> = (0..n).map(|i| bid(&format!("B{i:02}"))).collect();
        InterbankNetwork::build(
            DayLabel::Tag("t".into()),
            universe.clone(),
            edges
                .iter()
                .map(|&(b, l)| (universe[b].clone(), universe[l].clone(), Money::from_units(1))),
        )
        .unwrap()
    }

    #[test]
    fn link_probability_examples() {
        assert_eq!(link_probability(&net_from_edges(3, &[(0, 1), (1, 2), (2, 0)])).unwrap(), 1.0);
        assert_eq!(link_probability(&net_from_edges(2, &[(0, 1)])).unwrap(), 1.0);
        assert!(link_probability(&net_from_edges(1, &[])).is_err());
    }

    #[test]
    fn link_probability_matches_reported_density() {
        // N = 767 banks with K = 1085 edges lands on the reported 0.0037.
        let p: f64 = 2.0 * 1085.0 / (767.0 * 766.0);
        assert!((p - 0.0037).abs() < 1e-4, "p = {p}");
        let z1: f64 = 1085.0 / 767.0;
        assert!((z1 - 1.41).abs() < 5e-3, "z1 = {z1}");
    }

    #[test]
    fn clustering_triangle() {
        // a->c, b->c, a->b: in-neighbors of c are {a, b}, which are linked.
        let net = net_from_edges(3, &[(0, 2), (1, 2), (0, 1)]);
        let c = clustering_coefficients(&net);
        assert_eq!(c.c_in, 1.0);
        assert_eq!(c.qualifying_in, 1);
    }

    #[test]
    fn clustering_star_is_zero() {
        let c = clustering_coefficients(&star());
        assert_eq!((c.c_in, c.c_out), (0.0, 0.0));
        // Only the center has >= 2 neighbors (out side).
        assert_eq!(c.qualifying_out, 1);
        assert_eq!(c.qualifying_in, 0);
    }

    #[test]
    fn clustering_of_random_graph_approaches_link_probability() {
        // Directed Erdos-Renyi: the measured undirected clustering should
        // approach the pair-link probability 2r - r^2, which is also what
        // the p estimator measures in expectation.
        let n = 120;
        let r = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut c_sum = 0.0;
        let mut p_sum = 0.0;
        let reps = 40;
        for _ in 0..reps {
            let mut edges = Vec::new();
            for b in 0..n {
                for l in 0..n {
                    if b != l && rng.gen::<f64>() < r {
                        edges.push((b, l));
                    }
                }
            }
            let net = net_from_edges(n, &edges);
            c_sum += clustering_coefficients(&net).c_in;
            p_sum += link_probability(&net).unwrap();
        }
        let c_mean = c_sum / reps as f64;
        let p_mean = p_sum / reps as f64;
        assert!(
            (c_mean - p_mean).abs() < 0.01,
            "c = {c_mean:.4}, p = {p_mean:.4}"
        );
    }

    #[test]
    fn histogram_examples() {
        let hist = degree_histogram([&star()], Direction::Out);
        assert_eq!(hist, BTreeMap::from([(0, 5), (5, 1)]));
        let empty = net_from_edges(3, &[]);
        assert_eq!(degree_histogram([&empty], Direction::In), BTreeMap::from([(0, 3)]));
        let doubled = degree_histogram([&star(), &star()], Direction::Out);
        assert_eq!(doubled, BTreeMap::from([(0, 10), (5, 2)]));
    }

    #[test]
    fn mean_degree_examples() {
        assert_eq!(mean_degree(&net_from_edges(4, &[])).unwrap(), 0.0);
        assert_eq!(mean_degree(&star()).unwrap(), 5.0 / 6.0);
    }

    #[test]
    fn second_neighbors_chain_and_star() {
        let chain = net_from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(second_neighbor_count(&chain, Direction::Out), 1.0 / 3.0);
        assert_eq!(second_neighbor_count(&chain, Direction::In), 1.0 / 3.0);
        assert_eq!(second_neighbor_count(&star(), Direction::Out), 0.0);
    }

    #[test]
    fn giant_component_examples() {
        assert!(giant_component_criterion(1.41, 28.0).unwrap());
        assert!(giant_component_criterion(1.41, 9.0).unwrap());
        assert!(!giant_component_criterion(1.0, 1.5).unwrap());
        assert!(giant_component_criterion(0.0, 1.0).is_err());
    }

    #[test]
    fn correlation_curve_star() {
        let curve = degree_correlation_curve([&star()], Direction::In);
        assert_eq!(curve.points.len(), 1);
        let point = curve.points[&5];
        assert_eq!(point.samples, 5);
        assert_eq!(point.mean(), 1.0);
    }

    #[test]
    fn correlation_curve_empty_and_pooled() {
        let empty = net_from_edges(4, &[]);
        assert!(degree_correlation_curve([&empty], Direction::Out).points.is_empty());
        let single = degree_correlation_curve([&star()], Direction::Out);
        let doubled = degree_correlation_curve([&star(), &star()], Direction::Out);
        for (k, point) in &doubled.points {
            assert_eq!(point.samples, 2 * single.points[k].samples);
            assert_eq!(point.mean(), single.points[k].mean());
        }
        // Sample counts total the pooled out-degree sum.
        assert_eq!(doubled.total_samples(), 10);
    }

    #[test]
    fn decomposition_star() {
        let table = activity_decomposition([&star()], &[0, 2, 10]).unwrap();
        let cell = |m: Membership, c: DegreeCondition| {
            let (_, cells) = table
                .rows
                .iter()
                .zip(Membership::ALL)
                .find(|&((row, _), want)| *row == want && want == m)
                .map(|(rc, _)| rc.clone())
                .unwrap();
            let idx = table.conditions.iter().position(|&x| x == c).unwrap();
            cells[idx].mean
        };
        assert_eq!(cell(Membership::OnlyOut, DegreeCondition::GreaterThan(0)), 1.0);
        assert_eq!(cell(Membership::OnlyIn, DegreeCondition::GreaterThan(0)), 5.0);
        assert_eq!(cell(Membership::In, DegreeCondition::Zero), 1.0);
        assert_eq!(cell(Membership::Out, DegreeCondition::GreaterThan(2)), 1.0);
    }

    #[test]
    fn decomposition_all_isolated() {
        let net = net_from_edges(7, &[]);
        let table = activity_decomposition([&net], &[0, 2, 10]).unwrap();
        for (membership, cells) in &table.rows {
            for (cond, cell) in table.conditions.iter().zip(cells) {
                let expected = match (membership, cond) {
                    (_, DegreeCondition::Zero) => 7.0,
                    _ => 0.0,
                };
                assert_eq!(cell.mean, expected, "{membership} {cond}");
                assert_eq!(cell.sd, 0.0);
            }
        }
    }

    #[test]
    fn decomposition_row_sums() {
        let net = net_from_edges(6, &[(0, 1), (0, 2), (3, 2), (4, 0)]);
        let table = activity_decomposition([&net], &[0]).unwrap();
        let row = |m: Membership| {
            table
                .rows
                .iter()
                .find(|(row, _)| *row == m)
                .map(|(_, cells)| cells.clone())
                .unwrap()
        };
        // Out(k=0) + Out(k>0) covers the universe.
        assert_eq!(row(Membership::Out)[0].mean + row(Membership::Out)[1].mean, 6.0);
    }

    #[test]
    fn concentration_examples() {
        let net = star();
        assert_eq!(weight_concentration(&net, Direction::Out, 4).unwrap(), 1.0);
        assert_eq!(weight_concentration(&net, Direction::Out, 5).unwrap(), 0.0);
        let empty = net_from_edges(3, &[]);
        assert!(weight_concentration(&empty, Direction::Out, 0).is_err());
    }

    #[test]
    fn concentration_monotone_in_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..12);
            let mut edges = Vec::new();
            for b in 0..n {
                for l in 0..n {
                    if b != l && rng.gen::<f64>() < 0.3 {
                        edges.push((b, l));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            let net = net_from_edges(n, &edges);
            for dir in [Direction::In, Direction::Out] {
                let mut last = f64::INFINITY;
                for t in 0..n {
                    let share = weight_concentration(&net, dir, t).unwrap();
                    assert!(share <= last + 1e-15);
                    assert!((0.0..=1.0).contains(&share));
                    last = share;
                }
            }
        }
    }

    #[test]
    fn tail_fit_recovers_known_exponent() {
        // Oracle: inverse-CDF sampler for a discrete power law on
        // k >= 5 with gamma = 2.5.
        let gamma = 2.5;
        let k_min = 5usize;
        let k_max = 1_000_000usize;
        let mut cdf = Vec::with_capacity(k_max - k_min + 1);
        let mut acc = 0.0;
        for k in k_min..=k_max {
            acc += (k as f64).powf(-gamma);
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sample = |n: usize| {
            let mut hist = BTreeMap::new();
            for _ in 0..n {
                let u = rng.gen::<f64>() * total;
                let idx = cdf.partition_point(|&c| c < u);
                *hist.entry(k_min + idx).or_insert(0u64) += 1;
            }
            hist
        };
        let fit = fit_tail_exponent(&sample(100_000), k_min).unwrap();
        assert!(
            (2.45..=2.55).contains(&fit.gamma),
            "gamma = {} (lsq {})",
            fit.gamma,
            fit.gamma_lsq
        );

        // Convergence: mean absolute error shrinks from n=1e3 to n=1e5.
        let mut err_small = 0.0;
        let mut err_large = 0.0;
        for _ in 0..5 {
            err_small += (fit_tail_exponent(&sample(1_000), k_min).unwrap().gamma - gamma).abs();
            err_large += (fit_tail_exponent(&sample(100_000), k_min).unwrap().gamma - gamma).abs();
        }
        assert!(
            err_large < err_small,
            "errors: small {err_small}, large {err_large}"
        );
    }

    #[test]
    fn tail_fit_degenerate_and_sparse_errors() {
        let degenerate = BTreeMap::from([(5usize, 50u64)]);
        assert!(fit_tail_exponent(&degenerate, 5).is_err());
        let sparse = BTreeMap::from([(5usize, 4u64), (6, 5)]);
        assert!(fit_tail_exponent(&sparse, 5).is_err());
        assert!(fit_tail_exponent(&BTreeMap::from([(5, 100)]), 0).is_err());
    }

    #[test]
    fn stats_aggregate_star() {
        let stats = network_stats(&star()).unwrap();
        assert_eq!(stats.n_total, 6);
        assert_eq!(stats.n_active, 6);
        assert_eq!(stats.n_pure_lenders, 5);
        assert_eq!(stats.n_pure_borrowers, 1);
        assert_eq!(stats.n_intermediaries, 0);
        assert_eq!(stats.z1, 5.0 / 6.0);
        assert_eq!(stats.giant_out, Some(false));
    }
}
