//! Bundled datasets.

use crate::sample::Sample;

/// Waiting times (minutes) between eruptions of the Old Faithful geyser.
pub const FAITHFUL_WAITING_CSV: &str = include_str!("../data/faithful_waiting.csv");

/// The 272 Old Faithful waiting times.
pub fn faithful() -> Sample {
    Sample::from_reader(FAITHFUL_WAITING_CSV.as_bytes())
        .expect("bundled data parses")
        .with_label("faithful")
}
