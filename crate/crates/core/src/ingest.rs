//! Transaction-log and edge-list parsing, validation, and serialization.
//!
//! Two strict line-oriented CSV schemas:
//!
//! - transaction logs: header `date,borrower,lender,amount`, ISO-8601
//!   dates, plain decimal amounts;
//! - per-day edge lists: header `borrower,lender,weight`, preceded by
//!   `# key: value` metadata lines. The `day` and `universe` keys are
//!   interpreted on re-parse so a network round-trips exactly, including
//!   banks that were isolated that day.
//!
//! Field values are never quoted or escaped; identifiers that would need
//! escaping are rejected at [`BankId`] construction. Unknown columns are
//! a hard error, not a warning: silent schema drift is worse than a
//! failed load.

use std::collections::BTreeSet;
use std::io::Write;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::graph::{build_daily_network, BankId, DayLabel, InterbankNetwork, Transaction};
use crate::money::Money;

const TX_HEADER: &str = "date,borrower,lender,amount";
const EDGE_HEADER: &str = "borrower,lender,weight";

/// A validated multi-day transaction log, sorted by
/// `(date, borrower, lender, amount)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionLog {
    records: Vec<Transaction>,
    span: Option<(NaiveDate, NaiveDate)>,
}

impl TransactionLog {
    pub fn new(mut records: Vec<Transaction>) -> TransactionLog {
        records.sort_by(|a, b| {
            (a.date, &a.borrower, &a.lender, a.amount).cmp(&(
                b.date,
                &b.borrower,
                &b.lender,
                b.amount,
            ))
        });
        let span = match (records.first(), records.last()) {
            (Some(first), Some(last)) => Some((first.date, last.date)),
            _ => None,
        };
        TransactionLog { records, span }
    }

    pub fn records(&self) -> &[Transaction] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Inclusive date range, `None` for an empty log.
    pub fn span(&self) -> Option<(NaiveDate, NaiveDate)> {
        self.span
    }

    /// Union of all borrower and lender ids.
    pub fn universe(&self) -> BTreeSet<BankId> {
        self.records
            .iter()
            .flat_map(|tx| [tx.borrower.clone(), tx.lender.clone()])
            .collect()
    }

    /// Distinct dates, ascending.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self.records.iter().map(|tx| tx.date).collect();
        dates.dedup();
        dates
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Lines with 1-based numbers, trailing `\r` stripped, blank lines
/// dropped.
fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.is_empty())
}

fn parse_bank_field(line: usize, field: &str, value: &str) -> Result<BankId> {
    BankId::new(value).map_err(|e| parse_err(line, format!("bad {field}: {e}")))
}

/// Parses a transaction-log CSV. Errors carry the offending line number.
pub fn parse_transactions(input: &str) -> Result<TransactionLog> {
    let mut lines = content_lines(input).skip_while(|(_, l)| l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header == TX_HEADER => {}
        Some((n, header)) => {
            return Err(parse_err(
                n,
                format!("expected header {TX_HEADER:?}, found {header:?}"),
            ))
        }
        None => return Err(parse_err(1, format!("missing header {TX_HEADER:?}"))),
    }

    let mut records = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                n,
                format!("expected 4 fields (date,borrower,lender,amount), found {}", fields.len()),
            ));
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
            .map_err(|_| parse_err(n, format!("bad date {:?} (expected YYYY-MM-DD)", fields[0])))?;
        let borrower = parse_bank_field(n, "borrower", fields[1])?;
        let lender = parse_bank_field(n, "lender", fields[2])?;
        let amount: Money = fields[3]
            .parse()
            .map_err(|e| parse_err(n, format!("bad amount: {e}")))?;
        if amount.is_zero() {
            return Err(parse_err(n, "amount must be positive"));
        }
        if borrower == lender {
            return Err(parse_err(n, format!("borrower equals lender ({borrower})")));
        }
        records.push(Transaction {
            date,
            borrower,
            lender,
            amount,
        });
    }
    Ok(TransactionLog::new(records))
}

/// Builds one network per distinct date in the log, ascending, each over
/// the full inferred universe (so a bank inactive on some day is still an
/// isolated node that day).
pub fn daily_networks(log: &TransactionLog) -> Result<Vec<InterbankNetwork>> {
    let universe = log.universe();
    log.dates()
        .into_iter()
        .map(|date| {
            let day_txs: Vec<Transaction> = log
                .records()
                .iter()
                .filter(|tx| tx.date == date)
                .cloned()
                .collect();
            build_daily_network(&day_txs, date, universe.iter().cloned())
        })
        .collect()
}

/// Writes the edge-list CSV for one network.
///
/// Metadata lines come first (`day` and `universe` always, then
/// `extra_metadata` in order), then the header, then one row per edge in
/// ascending `(borrower, lender)` order. Output is deterministic.
pub fn export_edges(
    network: &InterbankNetwork,
    extra_metadata: &[(&str, String)],
    sink: &mut impl Write,
) -> Result<()> {
    writeln!(sink, "# day: {}", network.day())?;
    let ids: Vec<&str> = network.banks().iter().map(|b| b.as_str()).collect();
    writeln!(sink, "# universe: {}", ids.join(","))?;
    for (key, value) in extra_metadata {
        writeln!(sink, "# {key}: {value}")?;
    }
    writeln!(sink, "{EDGE_HEADER}")?;
    for (b, l, w) in network.edges() {
        writeln!(
            sink,
            "{},{},{}",
            network.bank_at(b as usize),
            network.bank_at(l as usize),
            w
        )?;
    }
    Ok(())
}

pub fn export_edges_string(network: &InterbankNetwork) -> Result<String> {
    let mut buf = Vec::new();
    export_edges(network, &[], &mut buf)?;
    Ok(String::from_utf8(buf).expect("edge export is UTF-8"))
}

/// Parses an edge-list CSV back into a network.
///
/// Honors `# day:` and `# universe:` metadata when present; otherwise the
/// universe is inferred from edge endpoints and the day is the tag
/// `unlabeled`.
pub fn parse_edges(input: &str) -> Result<InterbankNetwork> {
    let mut day: Option<DayLabel> = None;
    let mut universe: Option<Vec<BankId>> = None;

    let mut lines = content_lines(input).peekable();
    while let Some(&(n, line)) = lines.peek() {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        lines.next();
        let comment = comment.trim_start();
        if let Some(value) = comment.strip_prefix("day:") {
            day = Some(DayLabel::parse(value.trim()));
        } else if let Some(value) = comment.strip_prefix("universe:") {
            let value = value.trim();
            let mut ids = Vec::new();
            if !value.is_empty() {
                for id in value.split(',') {
                    ids.push(
                        BankId::new(id).map_err(|e| parse_err(n, format!("bad universe entry: {e}")))?,
                    );
                }
            }
            universe = Some(ids);
        }
        // Other comment keys are informational; skip them.
    }

    match lines.next() {
        Some((_, header)) if header == EDGE_HEADER => {}
        Some((n, header)) => {
            return Err(parse_err(
                n,
                format!("expected header {EDGE_HEADER:?}, found {header:?}"),
            ))
        }
        None => return Err(parse_err(1, format!("missing header {EDGE_HEADER:?}"))),
    }

    let mut edges = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                n,
                format!("expected 3 fields (borrower,lender,weight), found {}", fields.len()),
            ));
        }
        let borrower = parse_bank_field(n, "borrower", fields[0])?;
        let lender = parse_bank_field(n, "lender", fields[1])?;
        let weight: Money = fields[2]
            .parse()
            .map_err(|e| parse_err(n, format!("bad weight: {e}")))?;
        if weight.is_zero() {
            return Err(parse_err(n, "weight must be positive"));
        }
        if borrower == lender {
            return Err(parse_err(n, format!("borrower equals lender ({borrower})")));
        }
        edges.push((n, borrower, lender, weight));
    }

    let universe = universe.unwrap_or_else(|| {
        let set: BTreeSet<BankId> = edges
            .iter()
            .flat_map(|(_, b, l, _)| [b.clone(), l.clone()])
            .collect();
        set.into_iter().collect()
    });
    // Summing duplicate rows here would silently mask a malformed export,
    // so reject them instead.
    let mut seen = BTreeSet::new();
    for (n, b, l, _) in &edges {
        if !seen.insert((b.clone(), l.clone())) {
            return Err(parse_err(*n, format!("duplicate edge {b}->{l} in edge list")));
        }
    }
    InterbankNetwork::build(
        day.unwrap_or_else(|| DayLabel::Tag("unlabeled".into())),
        universe,
        edges.into_iter().map(|(_, b, l, w)| (b, l, w)),
    )
}
