//! Directed weighted interbank network.
//!
//! Nodes are banks; an edge runs from a borrower to a lender and its
//! weight is the borrower's total obligation to that lender for one day.
//! A bank's in-neighbors are therefore its borrowers (its credit
//! exposures) and its out-neighbors are its creditors.
//!
//! Networks are immutable after construction and safe to share across
//! threads. The universe is explicit: it may contain banks with no edges
//! at all, and every statistic that normalizes by N counts those too.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

/// Opaque stable bank identifier.
///
/// Ordering is total and lexicographic; every deterministic iteration in
/// the crate runs in ascending `BankId` order. Identifiers are restricted
/// to characters that survive the CSV schemas unescaped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BankId(String);

impl BankId {
    pub fn new(id: impl Into<String>) -> Result<BankId> {
        let id = id.into();
        let reject = |reason| Error::InvalidBankId {
            id: id.clone(),
            reason,
        };
        if id.is_empty() {
            return Err(reject("empty identifier"));
        }
        if id.starts_with('#') {
            return Err(reject("identifier may not start with '#'"));
        }
        if id != id.trim() {
            return Err(reject("identifier may not have leading or trailing whitespace"));
        }
        if id.chars().any(|c| c == ',' || c == '"' || c.is_control()) {
            return Err(reject("identifier may not contain commas, quotes, or control characters"));
        }
        Ok(BankId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BankId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for BankId {
    type Error = Error;
    fn try_from(s: String) -> Result<BankId> {
        BankId::new(s)
    }
}

impl From<BankId> for String {
    fn from(id: BankId) -> String {
        id.0
    }
}

/// A network's day: a real calendar date for ingested data, a plain tag
/// for generated or relabeled networks. Dates order before tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayLabel {
    Date(NaiveDate),
    Tag(String),
}

impl DayLabel {
    /// Parses an ISO date if possible, otherwise keeps the text as a tag.
    pub fn parse(s: &str) -> DayLabel {
        match NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            Ok(d) => DayLabel::Date(d),
            Err(_) => DayLabel::Tag(s.to_string()),
        }
    }
}

impl fmt::Display for DayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DayLabel::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            DayLabel::Tag(t) => f.write_str(t),
        }
    }
}

/// One uncollateralized overnight loan record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub date: NaiveDate,
    pub borrower: BankId,
    pub lender: BankId,
    pub amount: Money,
}

impl Transaction {
    pub fn new(date: NaiveDate, borrower: BankId, lender: BankId, amount: Money) -> Result<Transaction> {
        if amount.is_zero() {
            return Err(Error::InvalidAmount {
                text: amount.to_string(),
                reason: "transaction amount must be positive",
            });
        }
        if borrower == lender {
            return Err(Error::SelfLoop(borrower.to_string()));
        }
        Ok(Transaction {
            date,
            borrower,
            lender,
            amount,
        })
    }
}

/// Per-bank degree and strength summary.
///
/// `s_in` is the bank's interbank assets (money owed to it), `s_out` its
/// interbank liabilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeRecord {
    pub bank: BankId,
    pub k_in: usize,
    pub k_out: usize,
    pub s_in: Money,
    pub s_out: Money,
}

/// Directed weighted exposure network for one day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterbankNetwork {
    day: DayLabel,
    banks: Vec<BankId>,
    // Adjacency per bank index, sorted by neighbor index.
    out: Vec<Vec<(u32, Money)>>,
    inc: Vec<Vec<(u32, Money)>>,
    edge_count: usize,
}

impl InterbankNetwork {
    /// Builds a network from a universe and raw directed edges.
    ///
    /// Parallel edges between the same ordered pair are summed. Rejects
    /// self-loops, non-positive weights, and endpoints outside the
    /// universe.
    pub fn build(
        day: DayLabel,
        universe: impl IntoIterator<Item = BankId>,
        edges: impl IntoIterator<Item = (BankId, BankId, Money)>,
    ) -> Result<InterbankNetwork> {
        let bank_set: BTreeSet<BankId> = universe.into_iter().collect();
        let banks: Vec<BankId> = bank_set.into_iter().collect();
        let index: BTreeMap<&BankId, u32> = banks
            .iter()
            .enumerate()
            .map(|(i, b)| (b, i as u32))
            .collect();

        let mut weights: BTreeMap<(u32, u32), Money> = BTreeMap::new();
        for (borrower, lender, amount) in edges {
            if amount.is_zero() {
                return Err(Error::NonPositiveWeight {
                    borrower: borrower.to_string(),
                    lender: lender.to_string(),
                });
            }
            if borrower == lender {
                return Err(Error::SelfLoop(borrower.to_string()));
            }
            let (Some(&b), Some(&l)) = (index.get(&borrower), index.get(&lender)) else {
                return Err(Error::OutsideUniverse {
                    borrower: borrower.to_string(),
                    lender: lender.to_string(),
                    date: day.to_string(),
                });
            };
            match weights.entry((b, l)) {
                Entry::Vacant(e) => {
                    e.insert(amount);
                }
                Entry::Occupied(mut e) => {
                    let sum = e.get().checked_add(amount)?;
                    e.insert(sum);
                }
            }
        }

        let n = banks.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let edge_count = weights.len();
        for ((b, l), w) in weights {
            out[b as usize].push((l, w));
            inc[l as usize].push((b, w));
        }
        for adj in inc.iter_mut() {
            adj.sort_unstable_by_key(|&(i, _)| i);
        }
        // `out` is already sorted: BTreeMap iterates (b, l) in order.
        Ok(InterbankNetwork {
            day,
            banks,
            out,
            inc,
            edge_count,
        })
    }

    pub fn day(&self) -> &DayLabel {
        &self.day
    }

    pub fn set_day(&mut self, day: DayLabel) {
        self.day = day;
    }

    /// All banks, ascending; index in this slice is the bank's index.
    pub fn banks(&self) -> &[BankId] {
        &self.banks
    }

    pub fn n_banks(&self) -> usize {
        self.banks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn index_of(&self, bank: &BankId) -> Option<usize> {
        self.banks.binary_search(bank).ok()
    }

    pub fn bank_at(&self, index: usize) -> &BankId {
        &self.banks[index]
    }

    /// Creditors of bank `index`: `(lender index, weight)`, ascending.
    pub fn out_adj(&self, index: usize) -> &[(u32, Money)] {
        &self.out[index]
    }

    /// Borrowers of bank `index`: `(borrower index, weight)`, ascending.
    pub fn in_adj(&self, index: usize) -> &[(u32, Money)] {
        &self.inc[index]
    }

    pub fn k_out(&self, index: usize) -> usize {
        self.out[index].len()
    }

    pub fn k_in(&self, index: usize) -> usize {
        self.inc[index].len()
    }

    /// Iterates all edges as `(borrower index, lender index, weight)`,
    /// ascending by `(borrower, lender)`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, Money)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(b, adj)| adj.iter().map(move |&(l, w)| (b as u32, l, w)))
    }

    /// Sum of all edge weights.
    pub fn total_exposure(&self) -> Result<Money> {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// One record per universe member, ascending by bank id. Isolated
    /// banks appear with all-zero fields.
    pub fn degrees(&self) -> Result<Vec<DegreeRecord>> {
        let mut records = Vec::with_capacity(self.banks.len());
        for (i, bank) in self.banks.iter().enumerate() {
            let s_in: Result<Money> = self.inc[i].iter().map(|&(_, w)| w).sum();
            let s_out: Result<Money> = self.out[i].iter().map(|&(_, w)| w).sum();
            records.push(DegreeRecord {
                bank: bank.clone(),
                k_in: self.inc[i].len(),
                k_out: self.out[i].len(),
                s_in: s_in?,
                s_out: s_out?,
            });
        }
        Ok(records)
    }

    /// Banks this bank owes money to.
    pub fn out_neighbors(&self, bank: &BankId) -> Result<BTreeSet<BankId>> {
        let i = self
            .index_of(bank)
            .ok_or_else(|| Error::UnknownBank(bank.to_string()))?;
        Ok(self.out[i]
            .iter()
            .map(|&(j, _)| self.banks[j as usize].clone())
            .collect())
    }

    /// Banks that owe this bank money.
    pub fn in_neighbors(&self, bank: &BankId) -> Result<BTreeSet<BankId>> {
        let i = self
            .index_of(bank)
            .ok_or_else(|| Error::UnknownBank(bank.to_string()))?;
        Ok(self.inc[i]
            .iter()
            .map(|&(j, _)| self.banks[j as usize].clone())
            .collect())
    }
}

/// Aggregates one day's transactions into a network over `universe`.
///
/// Every transaction must be dated `date` and both parties must be in the
/// universe; parallel transactions between the same ordered pair sum.
pub fn build_daily_network(
    transactions: &[Transaction],
    date: NaiveDate,
    universe: impl IntoIterator<Item = BankId>,
) -> Result<InterbankNetwork> {
    for tx in transactions {
        if tx.date != date {
            return Err(Error::WrongDay {
                borrower: tx.borrower.to_string(),
                lender: tx.lender.to_string(),
                date: tx.date.to_string(),
                expected: date.to_string(),
            });
        }
        if tx.amount.is_zero() {
            return Err(Error::InvalidAmount {
                text: tx.amount.to_string(),
                reason: "transaction amount must be positive",
            });
        }
    }
    InterbankNetwork::build(
        DayLabel::Date(date),
        universe,
        transactions
            .iter()
            .map(|tx| (tx.borrower.clone(), tx.lender.clone(), tx.amount)),
    )
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn bid(s: &str) -> BankId {
        BankId::new(s).unwrap()
    }

    pub fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    /// Star: borrower `c` owes each of `l1..l5` one unit.
    pub fn star() -> InterbankNetwork {
        let leaves: Vec<BankId> = (1..=5).map(|i| bid(&format!("l{i}"))).collect();
        let mut universe = leaves.clone();
        universe.push(bid("c"));
        InterbankNetwork::build(
            DayLabel::Tag("star".into()),
            universe,
            leaves.iter().map(|l| (bid("c"), l.clone(), Money::from_units(1))),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bank_id_validation() {
        assert!(BankId::new("BANK_A").is_ok());
        assert!(BankId::new("Bank of X").is_ok());
        assert!(BankId::new("").is_err());
        assert!(BankId::new("#A").is_err());
        assert!(BankId::new("A,B").is_err());
        assert!(BankId::new(" A").is_err());
        assert!(BankId::new("A\"").is_err());
        assert!(BankId::new("A\nB").is_err());
    }

    #[test]
    fn parallel_transactions_sum() {
        let d = date("2011-08-01");
        let txs = vec![
            Transaction::new(d, bid("A"), bid("B"), Money::from_units(5)).unwrap(),
            Transaction::new(d, bid("A"), bid("B"), Money::from_units(3)).unwrap(),
        ];
        let net = build_daily_network(&txs, d, [bid("A"), bid("B")]).unwrap();
        assert_eq!(net.edge_count(), 1);
        let degrees = net.degrees().unwrap();
        let a = degrees.iter().find(|r| r.bank == bid("A")).unwrap();
        let b = degrees.iter().find(|r| r.bank == bid("B")).unwrap();
        assert_eq!(a.s_out, Money::from_units(8));
        assert_eq!(b.s_in, Money::from_units(8));
    }

    #[test]
    fn empty_log_preserves_universe() {
        let universe: Vec<BankId> = (0..767).map(|i| bid(&format!("B{i:04}"))).collect();
        let net = build_daily_network(&[], date("2011-08-01"), universe).unwrap();
        assert_eq!(net.n_banks(), 767);
        assert_eq!(net.edge_count(), 0);
        assert!(net.degrees().unwrap().iter().all(|r| r.k_in == 0 && r.k_out == 0));
    }

    #[test]
    fn opposite_directions_are_distinct_edges() {
        let d = date("2011-08-01");
        let txs = vec![
            Transaction::new(d, bid("A"), bid("B"), Money::from_units(5)).unwrap(),
            Transaction::new(d, bid("B"), bid("A"), Money::from_units(2)).unwrap(),
        ];
        let net = build_daily_network(&txs, d, [bid("A"), bid("B")]).unwrap();
        assert_eq!(net.edge_count(), 2);
        let a = net.index_of(&bid("A")).unwrap();
        let b = net.index_of(&bid("B")).unwrap();
        assert_eq!(net.out_adj(a), &[(b as u32, Money::from_units(5))]);
        assert_eq!(net.out_adj(b), &[(a as u32, Money::from_units(2))]);
    }

    #[test]
    fn rejects_transaction_outside_universe() {
        let d = date("2011-08-01");
        let txs = vec![Transaction::new(d, bid("A"), bid("X"), Money::from_units(1)).unwrap()];
        let err = build_daily_network(&txs, d, [bid("A"), bid("B")]).unwrap_err();
        assert!(err.to_string().contains('X'), "{err}");
    }

    #[test]
    fn rejects_wrong_date() {
        let txs =
            vec![Transaction::new(date("2011-08-02"), bid("A"), bid("B"), Money::from_units(1)).unwrap()];
        assert!(build_daily_network(&txs, date("2011-08-01"), [bid("A"), bid("B")]).is_err());
    }

    #[test]
    fn star_degrees() {
        let net = star();
        let degrees = net.degrees().unwrap();
        let c = degrees.iter().find(|r| r.bank == bid("c")).unwrap();
        assert_eq!((c.k_out, c.k_in), (5, 0));
        assert_eq!(c.s_out, Money::from_units(5));
        for i in 1..=5 {
            let l = degrees.iter().find(|r| r.bank == bid(&format!("l{i}"))).unwrap();
            assert_eq!((l.k_in, l.k_out), (1, 0));
            assert_eq!(l.s_in, Money::from_units(1));
        }
    }

    #[test]
    fn star_neighbors() {
        let net = star();
        let expected: BTreeSet<BankId> = (1..=5).map(|i| bid(&format!("l{i}"))).collect();
        assert_eq!(net.out_neighbors(&bid("c")).unwrap(), expected);
        assert_eq!(
            net.in_neighbors(&bid("l1")).unwrap(),
            BTreeSet::from([bid("c")])
        );
        assert!(net.in_neighbors(&bid("c")).unwrap().is_empty());
        let err = net.out_neighbors(&bid("nope")).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn self_loop_rejected() {
        let err = Transaction::new(date("2011-08-01"), bid("A"), bid("A"), Money::from_units(1));
        assert!(err.is_err());
        assert!(InterbankNetwork::build(
            DayLabel::Tag("x".into()),
            [bid("A")],
            [(bid("A"), bid("A"), Money::from_units(1))],
        )
        .is_err());
    }

    fn arb_transactions() -> impl Strategy<Value = Vec<(u8, u8, u32)>> {
        prop::collection::vec((0u8..6, 0u8..6, 1u32..1000), 0..40)
            .prop_map(|v| v.into_iter().filter(|(b, l, _)| b != l).collect())
    }

    proptest! {
        #[test]
        fn build_is_order_independent(txs in arb_transactions(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let d = date("2011-08-01");
            let universe: Vec<BankId> = (0..6).map(|i| bid(&format!("B{i}"))).collect();
            let mk = |list: &[(u8, u8, u32)]| {
                let txs: Vec<Transaction> = list
                    .iter()
                    .map(|&(b, l, a)| {
                        Transaction::new(
                            d,
                            bid(&format!("B{b}")),
                            bid(&format!("B{l}")),
                            Money::from_units(a as u64),
                        )
                        .unwrap()
                    })
                    .collect();
                build_daily_network(&txs, d, universe.clone()).unwrap()
            };
            let base = mk(&txs);
            let mut shuffled = txs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(base, mk(&shuffled));
        }

        #[test]
        fn handshake_and_duality(txs in arb_transactions()) {
            let d = date("2011-08-01");
            let universe: Vec<BankId> = (0..6).map(|i| bid(&format!("B{i}"))).collect();
            let txs: Vec<Transaction> = txs
                .iter()
                .map(|&(b, l, a)| {
                    Transaction::new(
                        d,
                        bid(&format!("B{b}")),
                        bid(&format!("B{l}")),
                        Money::from_units(a as u64),
                    )
                    .unwrap()
                })
                .collect();
            let net = build_daily_network(&txs, d, universe.clone()).unwrap();
            let degrees = net.degrees().unwrap();
            let k_in: usize = degrees.iter().map(|r| r.k_in).sum();
            let k_out: usize = degrees.iter().map(|r| r.k_out).sum();
            prop_assert_eq!(k_in, net.edge_count());
            prop_assert_eq!(k_out, net.edge_count());
            let s_in: Result<Money> = degrees.iter().map(|r| r.s_in).sum();
            let s_out: Result<Money> = degrees.iter().map(|r| r.s_out).sum();
            prop_assert_eq!(s_in.unwrap(), net.total_exposure().unwrap());
            prop_assert_eq!(s_out.unwrap(), net.total_exposure().unwrap());
            for b in &universe {
                for l in net.out_neighbors(b).unwrap() {
                    prop_assert!(net.in_neighbors(&l).unwrap().contains(b));
                }
            }
        }
    }
}
