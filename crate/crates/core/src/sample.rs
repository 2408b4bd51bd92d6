use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable, sorted set of real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl Sample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample variance with divisor `n - 1`.
    pub fn variance(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewObservations { need: 2, got: n });
        }
        let mean = self.mean();
        let ss: f64 = self.values.iter().map(|x| (x - mean) * (x - mean)).sum();
        Ok(ss / (n - 1) as f64)
    }

    /// Linear-interpolation quantile of the order statistics
    /// (`h = (n - 1) q`, the "type 7" rule).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = h - lo as f64;
        self.values[lo] + frac * (self.values[hi] - self.values[lo])
    }

    /// Applies `x -> scale * x + shift` to every observation.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let values = self.values.iter().map(|x| scale * x + shift).collect();
        let mut out = Self::new(values)?;
        out.label = self.label.clone();
        Ok(out)
    }

    /// Reads one value per line. Lines starting with `#` and blank lines are
    /// skipped; only the first field of each record is used.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let Some(field) = record.get(0) else { continue };
            if field.is_empty() {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| {
                let line = record.position().map_or(0, |p| p.line());
                Error::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("line {line}: cannot parse {field:?} as a number"),
                ))
            })?;
            values.push(value);
        }
        Self::new(values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let sample = Self::from_reader(std::io::BufReader::new(file))?;
        Ok(sample.with_label(path.display().to_string()))
    }
}
