//! Synthetic scale-free directed networks.
//!
//! The generator targets three observables at once: power-law tails for
//! the in- and out-degree distributions, a given mean degree, and a bank
//! count far above the typical number of active banks. A pure power law
//! over `k >= 1` cannot produce a mean as low as 1.41 together with tail
//! exponents below 3, so degrees are drawn from a zero-inflated discrete
//! power law: a point mass at zero (the banks quiet that day) and a
//! `k^-gamma` positive part capped at `k_max`. The zero mass is solved
//! from the mean-degree constraint.
//!
//! Edges come from a directed configuration model: out-stubs are matched
//! against shuffled in-stubs, conflicts (self-loops, duplicate pairs) are
//! re-matched a bounded number of times, and whatever still conflicts is
//! dropped with a count in the report. Weights are log-normal around a
//! configurable median; they do not influence cascade outcomes at q = 1.
//!
//! Everything is driven by a single seeded RNG, so a config (seed
//! included) maps to a bit-identical network.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BankId, DayLabel, InterbankNetwork};
use crate::money::Money;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Number of banks (active or not).
    pub n: usize,
    /// Target in-degree tail exponent.
    pub gamma_in: f64,
    /// Target out-degree tail exponent.
    pub gamma_out: f64,
    /// Target mean degree z1 (edges per bank).
    pub mean_degree: f64,
    /// Degree cap; regularizes the diverging mean of tails with
    /// exponent below 2.
    pub k_max: usize,
    /// Median edge weight.
    pub weight_scale: Money,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Config with conventional defaults: `k_max = n - 1` and a median
    /// weight of one million currency units.
    pub fn new(n: usize, gamma_in: f64, gamma_out: f64, mean_degree: f64, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n,
            gamma_in,
            gamma_out,
            mean_degree,
            k_max: n.saturating_sub(1),
            weight_scale: Money::from_units(1_000_000),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Generator(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.gamma_in > 1.0) || !(self.gamma_out > 1.0) {
            return bad(format!(
                "tail exponents must exceed 1, got gamma_in={}, gamma_out={}",
                self.gamma_in, self.gamma_out
            ));
        }
        if !(self.mean_degree > 0.0) {
            return bad(format!("mean_degree must be positive, got {}", self.mean_degree));
        }
        if self.k_max < 1 || self.k_max > self.n - 1 {
            return bad(format!(
                "k_max must be in [1, n-1] = [1, {}], got {}",
                self.n - 1,
                self.k_max
            ));
        }
        if self.weight_scale.is_zero() {
            return bad("weight_scale must be positive".into());
        }
        Ok(())
    }
}

/// Matching diagnostics for one generated network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    /// Stub pairs that could not be placed without a self-loop or a
    /// duplicate and were deleted.
    pub dropped_stub_pairs: usize,
    /// Degree-preserving repair swaps used to place conflicting pairs.
    pub repair_swaps: usize,
    /// Directed edges in the final network.
    pub edges: usize,
}

/// Zero-inflated discrete power law on `{0} + [1, k_max]`.
struct DegreeDistribution {
    p_zero: f64,
    /// Cumulative weights of the positive part, normalized to 1.
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    fn new(gamma: f64, k_max: usize, mean_degree: f64) -> Result<DegreeDistribution> {
        let mut weights = Vec::with_capacity(k_max);
        let mut total = 0.0;
        let mut weighted = 0.0;
        for k in 1..=k_max {
            let w = (k as f64).powf(-gamma);
            weights.push(w);
            total += w;
            weighted += k as f64 * w;
        }
        let positive_mean = weighted / total;
        if mean_degree > positive_mean {
            return Err(Error::Generator(format!(
                "mean_degree {mean_degree} is unreachable for gamma={gamma}, k_max={k_max}: \
                 feasible range is (0, {positive_mean:.4}]"
            )));
        }
        // The overall mean is (1 - p_zero) * positive_mean; solve for the
        // zero mass.
        let p_zero = 1.0 - mean_degree / positive_mean;
        let mut cdf = Vec::with_capacity(k_max);
        let mut acc = 0.0;
        for w in &weights {
            acc += w / total;
            cdf.push(acc);
        }
        Ok(DegreeDistribution { p_zero, cdf })
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        if rng.gen::<f64>() < self.p_zero {
            return 0;
        }
        let u = rng.gen::<f64>();
        1 + self.cdf.partition_point(|&c| c < u)
    }
}

/// Brings `seq` to sum `target` (or as close as the caps allow) by
/// decrementing or incrementing uniformly chosen vertices. Returns the
/// achieved sum.
fn balance_to(seq: &mut [usize], target: usize, caps: &[usize], rng: &mut impl Rng) -> usize {
    let n = seq.len();
    let mut sum: usize = seq.iter().sum();
    while sum > target {
        let v = rng.gen_range(0..n);
        if seq[v] > 0 {
            seq[v] -= 1;
            sum -= 1;
        }
    }
    let capacity: usize = seq
        .iter()
        .zip(caps)
        .map(|(&k, &cap)| cap.saturating_sub(k))
        .sum();
    let achievable = target.min(sum + capacity);
    while sum < achievable {
        let v = rng.gen_range(0..n);
        if seq[v] < caps[v] {
            seq[v] += 1;
            sum += 1;
        }
    }
    sum
}

/// Draws the in- and out-degree sequences, then adjusts both stub totals
/// to `round(n * mean_degree)` by incrementally adding and removing
/// stubs at uniformly chosen vertices. Pinning both sums to the target
/// keeps realized z1 from drifting with the enormous sampling noise of a
/// sub-2 tail exponent.
///
/// Each vertex is additionally capped at the number of distinct
/// counterparties active on the opposite side: an in-degree larger than
/// the count of banks with any out-stub could never be realized as
/// simple-graph edges and would only be silently deleted at matching.
pub fn sample_degree_sequences(
    config: &GeneratorConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    config.validate()?;
    let target: usize = (config.n as f64 * config.mean_degree).round() as usize;

    let in_dist = DegreeDistribution::new(config.gamma_in, config.k_max, config.mean_degree)?;
    let out_dist = DegreeDistribution::new(config.gamma_out, config.k_max, config.mean_degree)?;
    let mut in_seq: Vec<usize> = (0..config.n).map(|_| in_dist.sample(rng)).collect();
    let mut out_seq: Vec<usize> = (0..config.n).map(|_| out_dist.sample(rng)).collect();

    let active = |seq: &[usize]| seq.iter().filter(|&&k| k > 0).count();
    let cross_caps = |seq: &mut [usize], opposite_active: usize, own: &[usize], k_max: usize| {
        let caps: Vec<usize> = own
            .iter()
            .map(|&opp| k_max.min(opposite_active.saturating_sub(usize::from(opp > 0))))
            .collect();
        for (k, &cap) in seq.iter_mut().zip(&caps) {
            *k = (*k).min(cap);
        }
        caps
    };

    // Out side first (its activity count bounds feasible in-degrees).
    let in_active = active(&in_seq);
    let out_caps = cross_caps(&mut out_seq, in_active, &in_seq, config.k_max);
    let out_sum = balance_to(&mut out_seq, target, &out_caps, rng);

    let out_active = active(&out_seq);
    let in_caps = cross_caps(&mut in_seq, out_active, &out_seq, config.k_max);
    let in_sum = balance_to(&mut in_seq, target, &in_caps, rng);

    // Capacity shortfalls are only reachable in degenerate configs; trim
    // the larger side so the stub counts agree.
    if in_sum != out_sum {
        let smaller = in_sum.min(out_sum);
        let all = vec![config.k_max; config.n];
        if in_sum > smaller {
            balance_to(&mut in_seq, smaller, &all, rng);
        } else {
            balance_to(&mut out_seq, smaller, &all, rng);
        }
    }
    Ok((in_seq, out_seq))
}

const MAX_SWAP_ATTEMPTS: usize = 200;

/// Random matching of out-stubs to in-stubs.
///
/// A conflicting pair (self-loop or duplicate) is re-matched by a
/// degree-preserving swap against a randomly chosen accepted edge:
/// `(b, l)` and `(b2, l2)` become `(b, l2)` and `(b2, l)` when both are
/// fresh. Plain re-shuffling of the conflict pool deadlocks once the
/// pool is dominated by stubs of a single in-degree hub; swapping
/// against the full edge list does not. Pairs still unplaced after the
/// attempt budget are deleted and counted.
fn match_stubs(
    in_seq: &[usize],
    out_seq: &[usize],
    rng: &mut impl Rng,
) -> Result<(Vec<(u32, u32)>, usize, usize)> {
    let expand = |seq: &[usize]| {
        let mut stubs = Vec::with_capacity(seq.iter().sum());
        for (v, &k) in seq.iter().enumerate() {
            stubs.extend(std::iter::repeat(v as u32).take(k));
        }
        stubs
    };
    let out_stubs = expand(out_seq);
    let mut in_stubs = expand(in_seq);
    debug_assert_eq!(out_stubs.len(), in_stubs.len());
    let total_stubs = out_stubs.len();

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(total_stubs);
    let mut seen: std::collections::HashSet<(u32, u32)> =
        std::collections::HashSet::with_capacity(total_stubs * 2);
    let mut conflicts: Vec<(u32, u32)> = Vec::new();

    shuffle(&mut in_stubs, rng);
    for (&b, &l) in out_stubs.iter().zip(in_stubs.iter()) {
        if b == l || seen.contains(&(b, l)) {
            conflicts.push((b, l));
        } else {
            seen.insert((b, l));
            edges.push((b, l));
        }
    }

    let mut dropped = 0usize;
    let mut swaps = 0usize;
    for (b, l) in conflicts {
        let mut placed = false;
        if !edges.is_empty() {
            for _ in 0..MAX_SWAP_ATTEMPTS {
                let idx = rng.gen_range(0..edges.len());
                let (b2, l2) = edges[idx];
                let fresh = b != l2
                    && b2 != l
                    && !seen.contains(&(b, l2))
                    && !seen.contains(&(b2, l))
                    && (b, l2) != (b2, l);
                if fresh {
                    seen.remove(&(b2, l2));
                    seen.insert((b, l2));
                    seen.insert((b2, l));
                    edges[idx] = (b, l2);
                    edges.push((b2, l));
                    swaps += 1;
                    placed = true;
                    break;
                }
            }
        }
        if !placed {
            dropped += 1;
        }
    }

    if dropped * 2 > total_stubs && total_stubs > 32 {
        return Err(Error::Generator(format!(
            "stub matching failed: {dropped} of {total_stubs} stub pairs unplaceable \
             after swap repair (degree sequence too concentrated)"
        )));
    }
    Ok((edges, dropped, swaps))
}

/// Fisher-Yates with an explicit loop so the shuffle depends only on our
/// seeded RNG stream.
fn shuffle<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

fn bank_ids(n: usize) -> Vec<BankId> {
    let width = n.to_string().len();
    (1..=n)
        .map(|i| BankId::new(format!("B{i:0width$}")).expect("generated ids are valid"))
        .collect()
}

/// Generates one network plus matching diagnostics. `stream` selects an
/// independent substream of the seed (used for multi-day generation), so
/// day `i` of a run never depends on how many days precede it.
pub fn generate_network_with_report(
    config: &GeneratorConfig,
    stream: u64,
    day: DayLabel,
) -> Result<(InterbankNetwork, GenerationReport)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let (in_seq, out_seq) = sample_degree_sequences(config, &mut rng)?;
    let (index_edges, dropped, swaps) = match_stubs(&in_seq, &out_seq, &mut rng)?;

    let weight_dist = LogNormal::new(config.weight_scale.to_f64().ln(), 1.0)
        .map_err(|e| Error::Generator(format!("bad weight distribution: {e}")))?;
    let ids = bank_ids(config.n);
    let mut edges = Vec::with_capacity(index_edges.len());
    for (b, l) in index_edges {
        let weight = Money::from_f64_round(weight_dist.sample(&mut rng))?;
        edges.push((ids[b as usize].clone(), ids[l as usize].clone(), weight));
    }
    let report = GenerationReport {
        dropped_stub_pairs: dropped,
        repair_swaps: swaps,
        edges: edges.len(),
    };
    let net = InterbankNetwork::build(day, ids, edges)?;
    Ok((net, report))
}

/// Generates a single network with the default day tag.
pub fn generate_network(config: &GeneratorConfig) -> Result<InterbankNetwork> {
    Ok(generate_network_with_report(config, 0, DayLabel::Tag("day001".into()))?.0)
}

/// Generates `days` networks labeled `day001..`, one RNG stream each.
pub fn generate_days(
    config: &GeneratorConfig,
    days: usize,
) -> Result<Vec<(InterbankNetwork, GenerationReport)>> {
    if days == 0 {
        return Err(Error::Generator("days must be at least 1".into()));
    }
    (0..days)
        .map(|i| {
            generate_network_with_report(
                config,
                i as u64,
                DayLabel::Tag(format!("day{:03}", i + 1)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    fn paper_scale_config(seed: u64) -> GeneratorConfig {
        GeneratorConfig::new(767, 1.92, 2.64, 1.41, seed)
    }

    #[test]
    fn determinism_same_seed_same_network() {
        let config = paper_scale_config(7);
        let a = generate_network(&config).unwrap();
        let b = generate_network(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_network(&paper_scale_config(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stub_totals_balance_to_target() {
        let config = paper_scale_config(7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (in_seq, out_seq) = sample_degree_sequences(&config, &mut rng).unwrap();
        let target = (767.0_f64 * 1.41).round() as usize;
        assert_eq!(in_seq.iter().sum::<usize>(), target);
        assert_eq!(out_seq.iter().sum::<usize>(), target);
        assert!(in_seq.iter().all(|&k| k <= config.k_max));
    }

    #[test]
    fn sequences_are_deterministic_per_seed() {
        let config = paper_scale_config(3);
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            sample_degree_sequences(&config, &mut rng).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn no_self_loops_or_duplicates_and_handshake_holds() {
        for seed in 0..5 {
            let net = generate_network(&paper_scale_config(seed)).unwrap();
            let mut seen = std::collections::HashSet::new();
            for (b, l, w) in net.edges() {
                assert_ne!(b, l, "self-loop in seed {seed}");
                assert!(seen.insert((b, l)), "duplicate edge in seed {seed}");
                assert!(!w.is_zero());
            }
            let degrees = net.degrees().unwrap();
            let k_in: usize = degrees.iter().map(|r| r.k_in).sum();
            let k_out: usize = degrees.iter().map(|r| r.k_out).sum();
            assert_eq!(k_in, k_out);
        }
    }

    #[test]
    fn realized_mean_degree_near_target() {
        let mut total_z1 = 0.0;
        let seeds = 5;
        for seed in 0..seeds {
            let net = generate_network(&paper_scale_config(seed)).unwrap();
            total_z1 += metrics::mean_degree(&net).unwrap();
        }
        let z1 = total_z1 / seeds as f64;
        assert!((z1 - 1.41).abs() / 1.41 < 0.05, "z1 = {z1}");
    }

    #[test]
    fn infeasible_mean_degree_reports_range() {
        // gamma = 3 over k <= 766 has positive-part mean ~1.11; a mean
        // degree of 3 cannot be reached by thinning with zeros.
        let mut config = GeneratorConfig::new(767, 3.0, 3.0, 3.0, 1);
        let err = generate_network(&config).unwrap_err().to_string();
        assert!(err.contains("feasible range"), "{err}");
        config.mean_degree = 0.8;
        generate_network(&config).unwrap();
    }

    #[test]
    fn tiny_configs_are_degenerate_but_valid() {
        // n = 2 with a vanishing mean degree rounds to zero stubs.
        let config = GeneratorConfig::new(2, 2.0, 2.0, 0.001, 5);
        let net = generate_network(&config).unwrap();
        assert_eq!(net.edge_count(), 0);
        assert_eq!(net.n_banks(), 2);

        // One stub per side: either a single edge or, if both stubs land
        // on the same bank, a dropped pair. Never a self-loop.
        for seed in 0..20 {
            let config = GeneratorConfig::new(2, 2.0, 2.0, 0.5, seed);
            let net = generate_network(&config).unwrap();
            assert!(net.edge_count() <= 1);
            for (b, l, _) in net.edges() {
                assert_ne!(b, l);
            }
        }
    }

    #[test]
    fn config_validation_errors() {
        assert!(GeneratorConfig::new(1, 2.0, 2.0, 1.0, 1).validate().is_err());
        assert!(GeneratorConfig::new(10, 1.0, 2.0, 1.0, 1).validate().is_err());
        assert!(GeneratorConfig::new(10, 2.0, 2.0, -1.0, 1).validate().is_err());
        let mut config = GeneratorConfig::new(10, 2.0, 2.0, 1.0, 1);
        config.k_max = 10;
        assert!(config.validate().is_err());
    }
}
