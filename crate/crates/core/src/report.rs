//! CSV result tables.
//!
//! Header is fixed; fields are comma-separated (quoted only when needed)
//! with `.` decimals, LF line endings and empty strings for inapplicable
//! values. Floats use Rust's shortest round-trip formatting so identical runs
//! give identical bytes.

use std::io::{self, Write};

use crate::config::{linear_to_db, Feedback};
use crate::montecarlo::RateSummary;

pub const CSV_HEADER: &str = "experiment,scheme,n_rx,n_tx,n_users,snr_db,coherence_block,feedback_bits,feedback_fraction,trials,mean_user_rate,sum_rate,stderr,bound_floor";

pub const CSV_COLUMNS: [&str; 14] = [
    "experiment",
    "scheme",
    "n_rx",
    "n_tx",
    "n_users",
    "snr_db",
    "coherence_block",
    "feedback_bits",
    "feedback_fraction",
    "trials",
    "mean_user_rate",
    "sum_rate",
    "stderr",
    "bound_floor",
];

/// SNR in dB, rounded to nine decimals so 1000 prints as `30`.
fn snr_db(linear: f64) -> f64 {
    (linear_to_db(linear) * 1e9).round() / 1e9
}

/// Field values of one table row, in `CSV_COLUMNS` order.
pub fn csv_record(row: &RateSummary) -> [String; 14] {
    let cfg = &row.config;
    let (bits, fraction) = match cfg.feedback {
        Feedback::Bits(b) => (b.to_string(), String::new()),
        Feedback::UplinkFraction(c) => (String::new(), c.to_string()),
    };
    let floor = row.bound_floor.map(|f| f.to_string()).unwrap_or_default();
    [
        row.experiment.clone(),
        row.scheme.label().to_string(),
        cfg.n_rx.to_string(),
        cfg.n_tx.to_string(),
        cfg.n_users.to_string(),
        snr_db(cfg.snr).to_string(),
        cfg.coherence_block.to_string(),
        bits,
        fraction,
        row.trials.to_string(),
        row.mean_user_rate.to_string(),
        row.sum_rate.to_string(),
        row.stderr.to_string(),
        floor,
    ]
}

pub fn write_csv<W: Write>(out: W, rows: &[RateSummary]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()
}

pub fn to_csv_string(rows: &[RateSummary]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv is utf-8")
}
