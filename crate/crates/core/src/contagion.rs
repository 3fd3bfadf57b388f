//! Stylized balance sheets and default-cascade simulation.
//!
//! Each bank gets a balance sheet anchored to its interbank activity:
//! the interbank side is an `alpha` share of the total, the capital
//! buffer a `kappa` share. A bank is solvent while
//!
//! ```text
//! (1 - phi) * A_ib + q * A_m - L_ib - D > 0
//! ```
//!
//! where `phi` is the fraction of its borrowers currently in default
//! (claims are uniform across borrowers, so losing `d` of `j` borrowers
//! costs `d/j` of the interbank assets) and `q` discounts illiquid assets
//! for fire sale. A surplus of exactly zero counts as a default, which is
//! why every quantity here is an exact rational: at `kappa/alpha = 1/5` a
//! bank with five borrowers must default when exactly one of them fails,
//! not depend on float rounding.
//!
//! Cascades run in synchronous rounds: the seed defaults by fiat, then
//! each round every still-solvent bank with at least one borrower
//! re-evaluates its solvency against the current default set, and all
//! newly insolvent banks default together. The process is monotone, so
//! the fixed point does not depend on evaluation order.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BankId, InterbankNetwork};
use crate::money::{parse_decimal_rational, rational_to_decimal_string};
use crate::Rational;

/// Largest denominator accepted for model parameters. Keeps every
/// intermediate rational product comfortably inside `i128`.
const MAX_PARAM_DENOM: i128 = 1_000_000_000;

/// Model parameters: interbank-asset share `alpha`, capital-buffer share
/// `kappa`, and fire-sale discount `q` (1 = no discount).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContagionParams {
    alpha: Rational,
    kappa: Rational,
    q: Rational,
}

impl ContagionParams {
    pub fn new(alpha: Rational, kappa: Rational, q: Rational) -> Result<ContagionParams> {
        let check_denom = |name: &str, r: &Rational| {
            if *r.denom() > MAX_PARAM_DENOM {
                return Err(Error::InvalidParameter(format!(
                    "{name} has more than 9 decimal places"
                )));
            }
            Ok(())
        };
        check_denom("alpha", &alpha)?;
        check_denom("kappa", &kappa)?;
        check_denom("q", &q)?;
        if !(alpha > Rational::zero() && alpha < Rational::one()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be in (0, 1), got {}",
                rational_to_decimal_string(&alpha)
            )));
        }
        if !(kappa > Rational::zero() && kappa < Rational::one()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be in (0, 1), got {}",
                rational_to_decimal_string(&kappa)
            )));
        }
        if alpha + kappa > Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "alpha + kappa must not exceed 1 (deposits would go negative), got {} + {}",
                rational_to_decimal_string(&alpha),
                rational_to_decimal_string(&kappa)
            )));
        }
        if !(q > Rational::zero() && q <= Rational::one()) {
            return Err(Error::InvalidParameter(format!(
                "q must be in (0, 1], got {}",
                rational_to_decimal_string(&q)
            )));
        }
        Ok(ContagionParams { alpha, kappa, q })
    }

    /// Parses parameters from plain decimal strings, e.g.
    /// `("0.20", "0.04", "1")`.
    pub fn from_decimal_strs(alpha: &str, kappa: &str, q: &str) -> Result<ContagionParams> {
        ContagionParams::new(
            parse_decimal_rational(alpha)?,
            parse_decimal_rational(kappa)?,
            parse_decimal_rational(q)?,
        )
    }

    /// Same alpha and q with a different capital buffer.
    pub fn with_kappa(&self, kappa: Rational) -> Result<ContagionParams> {
        ContagionParams::new(self.alpha, kappa, self.q)
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn kappa(&self) -> Rational {
        self.kappa
    }

    pub fn q(&self) -> Rational {
        self.q
    }
}

/// Per-bank stylized balance sheet. All amounts are exact rationals in
/// currency units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceSheet {
    pub bank: BankId,
    /// Interbank assets.
    pub a_ib: Rational,
    /// Illiquid assets.
    pub a_m: Rational,
    /// Interbank liabilities.
    pub l_ib: Rational,
    pub deposits: Rational,
    pub capital: Rational,
    pub total: Rational,
}

/// Builds one sheet per bank in universe order.
///
/// The total is anchored as `max(s_in, s_out) / alpha`, so both interbank
/// sides fit within the alpha share and deposits stay non-negative
/// whenever `alpha + kappa <= 1`. For a bank that borrows on the network
/// (`s_in > 0`) the interbank-asset slot is filled to the full alpha
/// share; uniform claims then make its loss from `d` of `j` defaulted
/// borrowers exactly `d/j` of that slot, so cascade outcomes depend on
/// degrees, never on the weight draw. Pure borrowers keep `a_ib = 0` and
/// isolated banks get an all-zero sheet.
pub fn build_balance_sheets(
    net: &InterbankNetwork,
    params: &ContagionParams,
) -> Result<Vec<BalanceSheet>> {
    if params.alpha + params.kappa > Rational::one() {
        return Err(Error::InvalidParameter(
            "alpha + kappa must not exceed 1".into(),
        ));
    }
    let mut sheets = Vec::with_capacity(net.n_banks());
    for (i, bank) in net.banks().iter().enumerate() {
        let s_in: u128 = net.in_adj(i).iter().map(|&(_, w)| w.atoms() as u128).sum();
        let s_out: u128 = net.out_adj(i).iter().map(|&(_, w)| w.atoms() as u128).sum();
        let s_in = Rational::new(s_in as i128, crate::money::ATOMS_PER_UNIT as i128);
        let s_out = Rational::new(s_out as i128, crate::money::ATOMS_PER_UNIT as i128);
        let interbank_side = s_in.max(s_out);
        let total = interbank_side / params.alpha;
        let a_ib = if s_in.is_zero() { Rational::zero() } else { interbank_side };
        let capital = params.kappa * total;
        let sheet = BalanceSheet {
            bank: bank.clone(),
            a_ib,
            a_m: total - a_ib,
            l_ib: s_out,
            deposits: total - capital - s_out,
            capital,
            total,
        };
        debug_assert!(sheet.a_ib + sheet.a_m == sheet.total);
        debug_assert!(sheet.capital + sheet.deposits + sheet.l_ib == sheet.total);
        debug_assert!(!sheet.deposits.is_negative());
        sheets.push(sheet);
    }
    Ok(sheets)
}

/// Solvency check: insolvent iff
/// `(1 - phi) * a_ib + q * a_m - l_ib - deposits <= 0`.
///
/// The boundary (surplus exactly zero) counts as a default. With `q = 1`
/// this is equivalent to `phi >= capital / a_ib`.
pub fn is_insolvent(sheet: &BalanceSheet, phi: Rational, q: Rational) -> bool {
    debug_assert!(!phi.is_negative() && phi <= Rational::one());
    let surplus =
        (Rational::one() - phi) * sheet.a_ib + q * sheet.a_m - sheet.l_ib - sheet.deposits;
    surplus <= Rational::zero()
}

/// Outcome of one seeded cascade. `defaulted` contains contagion
/// defaults only, never the seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CascadeResult {
    pub seed: BankId,
    pub defaulted: BTreeSet<BankId>,
    pub rounds: usize,
}

impl CascadeResult {
    /// Contagion defaults, excluding the seed.
    pub fn cluster_size(&self) -> usize {
        self.defaulted.len()
    }
}

/// How a bank reacts to borrower defaults, precomputed from its sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InfectionRule {
    /// No borrowers, or solvent at any `phi <= 1`.
    Never,
    /// Insolvent already at `phi = 0`; defaults in the first round.
    Spontaneous,
    /// Defaults once `d / j >= num / den` (den > 0).
    AtFraction { num: i128, den: i128 },
}

/// Shared precomputation for running many seeds against one
/// (network, sheets, q) configuration.
struct CascadeEngine<'n> {
    net: &'n InterbankNetwork,
    rules: Vec<InfectionRule>,
    spontaneous: Vec<u32>,
}

impl<'n> CascadeEngine<'n> {
    fn new(net: &'n InterbankNetwork, sheets: &[BalanceSheet], q: Rational) -> Result<CascadeEngine<'n>> {
        if sheets.len() != net.n_banks() {
            return Err(Error::InvalidParameter(format!(
                "expected {} balance sheets, got {}",
                net.n_banks(),
                sheets.len()
            )));
        }
        let mut rules = Vec::with_capacity(net.n_banks());
        let mut spontaneous = Vec::new();
        for (i, sheet) in sheets.iter().enumerate() {
            let rule = if net.k_in(i) == 0 {
                InfectionRule::Never
            } else {
                // Surplus is affine in phi: solvent margin at phi = 0,
                // eroded by phi * a_ib. The default threshold in phi is
                // margin / a_ib.
                let margin = sheet.a_ib + q * sheet.a_m - sheet.l_ib - sheet.deposits;
                if margin <= Rational::zero() {
                    InfectionRule::Spontaneous
                } else if sheet.a_ib.is_zero() {
                    InfectionRule::Never
                } else {
                    let threshold = margin / sheet.a_ib;
                    InfectionRule::AtFraction {
                        num: *threshold.numer(),
                        den: *threshold.denom(),
                    }
                }
            };
            if rule == InfectionRule::Spontaneous {
                spontaneous.push(i as u32);
            }
            rules.push(rule);
        }
        Ok(CascadeEngine {
            net,
            rules,
            spontaneous,
        })
    }

    /// Runs the synchronous cascade from one seed; returns defaulted
    /// indices (ascending, seed excluded) and the number of rounds that
    /// added defaults.
    fn run(&self, seed: usize) -> (Vec<u32>, usize) {
        let n = self.net.n_banks();
        let mut defaulted = vec![false; n];
        let mut d_count = vec![0u32; n];
        defaulted[seed] = true;

        let mut result: Vec<u32> = Vec::new();
        let mut rounds = 0usize;
        let mut frontier: Vec<u32> = vec![seed as u32];
        let mut first_round = true;

        while !frontier.is_empty() {
            let mut candidates: Vec<u32> = Vec::new();
            for &u in &frontier {
                for &(v, _) in self.net.out_adj(u as usize) {
                    d_count[v as usize] += 1;
                    if !defaulted[v as usize] {
                        candidates.push(v);
                    }
                }
            }
            if first_round {
                candidates.extend(self.spontaneous.iter().copied());
                first_round = false;
            }
            candidates.sort_unstable();
            candidates.dedup();

            let mut next: Vec<u32> = Vec::new();
            for &v in &candidates {
                if defaulted[v as usize] {
                    continue;
                }
                let falls = match self.rules[v as usize] {
                    InfectionRule::Never => false,
                    InfectionRule::Spontaneous => true,
                    InfectionRule::AtFraction { num, den } => {
                        let j = self.net.k_in(v as usize) as i128;
                        let d = d_count[v as usize] as i128;
                        d * den >= j * num
                    }
                };
                if falls {
                    next.push(v);
                }
            }
            if next.is_empty() {
                break;
            }
            rounds += 1;
            for &v in &next {
                defaulted[v as usize] = true;
                result.push(v);
            }
            frontier = next;
        }
        result.sort_unstable();
        (result, rounds)
    }

    fn result_for(&self, seed: usize) -> CascadeResult {
        let (indices, rounds) = self.run(seed);
        CascadeResult {
            seed: self.net.bank_at(seed).clone(),
            defaulted: indices
                .into_iter()
                .map(|i| self.net.bank_at(i as usize).clone())
                .collect(),
            rounds,
        }
    }
}

/// Defaults `seed` by fiat and propagates insolvency along outgoing
/// links until no bank changes state.
pub fn cascade(
    net: &InterbankNetwork,
    sheets: &[BalanceSheet],
    seed: &BankId,
    q: Rational,
) -> Result<CascadeResult> {
    let seed_idx = net
        .index_of(seed)
        .ok_or_else(|| Error::UnknownBank(seed.to_string()))?;
    let engine = CascadeEngine::new(net, sheets, q)?;
    Ok(engine.result_for(seed_idx))
}

/// Runs one cascade per bank in the universe, each against fresh state,
/// in ascending bank order.
pub fn all_seed_clusters(
    net: &InterbankNetwork,
    params: &ContagionParams,
) -> Result<Vec<CascadeResult>> {
    let sheets = build_balance_sheets(net, params)?;
    let engine = CascadeEngine::new(net, &sheets, params.q())?;
    Ok((0..net.n_banks()).map(|i| engine.result_for(i)).collect())
}

/// Cluster sizes (seed excluded) for every seed of one network at one
/// capital buffer. The unit of work of a sweep; pure and deterministic,
/// so cells may be computed concurrently and pooled in any order.
pub fn sweep_cell(
    net: &InterbankNetwork,
    params: &ContagionParams,
    kappa: Rational,
) -> Result<Vec<usize>> {
    let params = params.with_kappa(kappa)?;
    let sheets = build_balance_sheets(net, &params)?;
    let engine = CascadeEngine::new(net, &sheets, params.q())?;
    Ok((0..net.n_banks()).map(|i| engine.run(i).0.len()).collect())
}

/// Pooled cascade outcomes for one capital-buffer value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSweep {
    /// Exact buffer share as a decimal string (e.g. `0.04`).
    pub kappa: String,
    /// Number of (seed, day) trials pooled.
    pub trials: u64,
    /// Mean cluster size (seed excluded), derived from the histogram.
    pub mean_cluster: f64,
    /// Cluster-size frequency over all trials.
    pub histogram: BTreeMap<usize, u64>,
}

impl KappaSweep {
    pub fn kappa_rational(&self) -> Rational {
        parse_decimal_rational(&self.kappa).expect("kappa string round-trips")
    }

    /// Probability that a cluster exceeds `size`.
    pub fn prob_cluster_greater_than(&self, size: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let exceeding: u64 = self
            .histogram
            .iter()
            .filter(|&(&s, _)| s > size)
            .map(|(_, &c)| c)
            .sum();
        exceeding as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub entries: Vec<KappaSweep>,
}

/// For each buffer value: rebuild sheets, default every bank of every
/// day in turn, and pool cluster sizes into a histogram and mean.
pub fn buffer_sweep(
    nets: &[InterbankNetwork],
    params: &ContagionParams,
    kappa_grid: &[Rational],
) -> Result<SweepResult> {
    if nets.is_empty() {
        return Err(Error::EmptyNetworkSet);
    }
    if kappa_grid.is_empty() {
        return Err(Error::InvalidParameter("empty kappa grid".into()));
    }
    let mut entries = Vec::with_capacity(kappa_grid.len());
    for &kappa in kappa_grid {
        let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
        let mut trials = 0u64;
        for net in nets {
            for size in sweep_cell(net, params, kappa)? {
                *histogram.entry(size).or_insert(0) += 1;
                trials += 1;
            }
        }
        entries.push(pool_kappa_entry(kappa, trials, histogram));
    }
    Ok(SweepResult { entries })
}

/// Assembles one sweep entry from pooled histogram counts. The mean is
/// derived from the histogram so pooling order can never matter.
pub fn pool_kappa_entry(
    kappa: Rational,
    trials: u64,
    histogram: BTreeMap<usize, u64>,
) -> KappaSweep {
    let mass: u64 = histogram.values().sum();
    debug_assert_eq!(mass, trials);
    let weighted: u128 = histogram
        .iter()
        .map(|(&size, &count)| size as u128 * count as u128)
        .sum();
    let mean_cluster = if trials == 0 {
        0.0
    } else {
        weighted as f64 / trials as f64
    };
    KappaSweep {
        kappa: rational_to_decimal_string(&kappa),
        trials,
        mean_cluster,
        histogram,
    }
}
