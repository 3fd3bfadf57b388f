//! Plot-ready CSV and human-readable text rendering.
//!
//! Every emitted file starts with a `# key: value` metadata block that
//! records the tool version and the full parameter set of the run, so
//! any output can be regenerated from its own header. No timestamps:
//! re-running a command with the same inputs yields byte-identical
//! files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::contagion::{KappaSweep, SweepResult};
use crate::metrics::{CorrelationCurve, DecompositionTable, NetworkStats, TailFit};

/// Ordered metadata block rendered as `# key: value` lines.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(version: &str) -> Metadata {
        let mut meta = Metadata::default();
        meta.push("tool", format!("ibnet {version}"));
        meta
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            let _ = writeln!(out, "# {key}: {value}");
        }
        out
    }
}

/// `k,count` rows of a degree histogram.
pub fn histogram_csv(hist: &BTreeMap<usize, u64>, meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str("k,count\n");
    for (k, count) in hist {
        let _ = writeln!(out, "{k},{count}");
    }
    out
}

/// `k1_out,mean_k2,samples` rows of a degree-correlation curve.
pub fn curve_csv(curve: &CorrelationCurve, meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str("k1_out,mean_k2,samples\n");
    for (k1, point) in &curve.points {
        let _ = writeln!(out, "{k1},{},{}", point.mean(), point.samples);
    }
    out
}

/// `row,condition,mean,sd` rows of the activity decomposition.
pub fn decomposition_csv(table: &DecompositionTable, meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str("row,condition,mean,sd\n");
    for (membership, cells) in &table.rows {
        for (cond, cell) in table.conditions.iter().zip(cells) {
            let _ = writeln!(out, "{membership},{cond},{},{}", cell.mean, cell.sd);
        }
    }
    out
}

/// Aligned text table of the decomposition, means with standard
/// deviations in parentheses.
pub fn decomposition_text(table: &DecompositionTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "");
    for cond in &table.conditions {
        let _ = write!(out, "{:>16}", cond.to_string());
    }
    out.push('\n');
    for (membership, cells) in &table.rows {
        let _ = write!(out, "{:<10}", membership.to_string());
        for cell in cells {
            let _ = write!(out, "{:>16}", format!("{:.1} ({:.1})", cell.mean, cell.sd));
        }
        out.push('\n');
    }
    out
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

/// Per-day stats as an aligned text table.
pub fn stats_text(all: &[NetworkStats]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>12}{:>10}{:>10}{:>8}{:>10}",
        "day", "N", "active", "lend", "borrow", "both", "K", "p", "c_in", "c_out", "z1", "z2"
    );
    for s in all {
        let _ = writeln!(
            out,
            "{:<14}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>12}{:>10.5}{:>10.5}{:>8.3}{:>10.3}",
            s.day,
            s.n_total,
            s.n_active,
            s.n_pure_lenders,
            s.n_pure_borrowers,
            s.n_intermediaries,
            s.edge_count,
            fmt_opt(s.p),
            s.c_in,
            s.c_out,
            s.z1,
            s.z2_out,
        );
    }
    out
}

/// One-line summary of a tail fit for the text report.
pub fn tail_fit_line(direction: &str, fit: &Option<TailFit>) -> String {
    match fit {
        Some(fit) => format!(
            "gamma_{direction} = {:.3} (mle, k_min={}, n={}), {:.3} (least squares)",
            fit.gamma, fit.k_min, fit.n_tail, fit.gamma_lsq
        ),
        None => format!("gamma_{direction}: not enough tail samples to fit"),
    }
}

/// `kappa,trials,mean_cluster,mean_cluster_incl_seed` rows, one per
/// buffer value.
pub fn sweep_mean_csv(sweep: &SweepResult, meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str("kappa,trials,mean_cluster,mean_cluster_incl_seed\n");
    for entry in &sweep.entries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            entry.kappa,
            entry.trials,
            entry.mean_cluster,
            entry.mean_cluster + 1.0
        );
    }
    out
}

/// Cluster-size distribution at one buffer value:
/// `cluster_size,cluster_size_incl_seed,count,probability`.
///
/// Both size conventions are emitted; the seed-inclusive one is just
/// shifted by the always-defaulted seed.
pub fn sweep_histogram_csv(entry: &KappaSweep, meta: &Metadata) -> String {
    let mut out = meta.render();
    out.push_str("cluster_size,cluster_size_incl_seed,count,probability\n");
    for (&size, &count) in &entry.histogram {
        let _ = writeln!(
            out,
            "{size},{},{count},{}",
            size + 1,
            count as f64 / entry.trials as f64
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contagion::{buffer_sweep, ContagionParams};
    use crate::graph::test_util::star;
    use crate::metrics;
    use crate::money::parse_decimal_rational;

    #[test]
    fn metadata_block_renders_in_order() {
        let mut meta = Metadata::new("0.1.0");
        meta.push("seed", "7").push("alpha", "0.2");
        let text = meta.render();
        assert_eq!(text, "# tool: ibnet 0.1.0\n# seed: 7\n# alpha: 0.2\n");
    }

    #[test]
    fn histogram_csv_shape() {
        let hist = metrics::degree_histogram([&star()], metrics::Direction::Out);
        let csv = histogram_csv(&hist, &Metadata::new("0.1.0"));
        assert!(csv.contains("k,count\n0,5\n5,1\n"), "{csv}");
    }

    #[test]
    fn sweep_csvs_include_both_seed_conventions() {
        let params = ContagionParams::from_decimal_strs("0.2", "0.04", "1").unwrap();
        let grid = [parse_decimal_rational("0.04").unwrap()];
        let sweep = buffer_sweep(&[star()], &params, &grid).unwrap();
        let csv = sweep_mean_csv(&sweep, &Metadata::new("0.1.0"));
        assert!(csv.contains("kappa,trials,mean_cluster,mean_cluster_incl_seed"));
        assert!(csv.contains("0.04,6,"), "{csv}");
        let hist = sweep_histogram_csv(&sweep.entries[0], &Metadata::new("0.1.0"));
        assert!(hist.contains("5,6,1,"), "{hist}");
    }

    #[test]
    fn decomposition_text_is_aligned() {
        let table = metrics::activity_decomposition([&star()], &[0, 2, 10]).unwrap();
        let text = decomposition_text(&table);
        let first_line_len = text.lines().next().unwrap().len();
        for line in text.lines() {
            assert_eq!(line.len(), first_line_len);
        }
    }
}
