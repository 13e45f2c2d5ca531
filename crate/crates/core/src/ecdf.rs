//! Mergeable empirical distribution functions and the uniformity transform.
//!
//! An [`EmpiricalCdf`] stores the full sorted sample. Large datasets are
//! built per partition ([`EcdfPartition`]) and combined with a k-way merge,
//! so no single pass ever sorts the whole dataset at once. Pushing a
//! comparison sample through the reference ecdf maps it into [0, 1]; under
//! the hypothesis that both samples share one continuous distribution the
//! mapped values are approximately uniform, which a one-sample test can
//! check without ever pooling or sorting the reference again.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};

use crate::distributions::{fresh_seed, SeededRng};
use crate::error::{Error, Result};

/// Comparison sample at least this large relative to the reference makes
/// the transformed test noticeably miscalibrated.
pub const RATIO_WARNING_THRESHOLD: f64 = 0.2;

/// An immutable empirical distribution function over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    /// Build from raw observations; input order is irrelevant.
    pub fn build(data: &[f64]) -> Result<Self> {
        validate_sample(data)?;
        let mut values = data.to_vec();
        values.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalCdf { values })
    }

    /// Number of stored observations.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The sorted observations, duplicates retained.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Count of stored values `<= x`.
    fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Right-continuous step evaluation: `#{values <= x} / n`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteArgument {
                name: "x",
                value: x,
            });
        }
        Ok(self.count_le(x) as f64 / self.n() as f64)
    }

    /// Combine locally sorted partitions into one ecdf by k-way merge.
    ///
    /// The result is value-for-value identical to [`EmpiricalCdf::build`]
    /// over the concatenation of all partitions.
    pub fn merge_partitions(parts: &[EcdfPartition]) -> Result<Self> {
        let total: usize = parts.iter().map(|p| p.count()).sum();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        let mut heap: BinaryHeap<MergeHead> = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.count() > 0)
            .map(|(part, p)| MergeHead {
                value: p.values[0],
                part,
                pos: 0,
            })
            .collect();
        let mut values = Vec::with_capacity(total);
        while let Some(MergeHead { value, part, pos }) = heap.pop() {
            values.push(value);
            let next = pos + 1;
            if next < parts[part].count() {
                heap.push(MergeHead {
                    value: parts[part].values[next],
                    part,
                    pos: next,
                });
            }
        }
        Ok(EmpiricalCdf { values })
    }

    /// Map a comparison sample through this ecdf into [0, 1].
    ///
    /// Without dithering, element `j` maps to `#{values <= y_j} / n`. With
    /// dithering, a value with `k >= 1` reference points at or below it maps
    /// to `(k - U_j)/n` with `U_j` uniform on [0, 1), spreading it over the
    /// step `((k-1)/n, k/n]`; values below the whole reference stay at
    /// exactly 0. Each `U_j` comes from a stream derived from
    /// `(seed, element index)`, so output does not depend on evaluation
    /// order. When dithering is requested without a seed, one is drawn from
    /// OS entropy and recorded in the report.
    pub fn transform(
        &self,
        comparison: &[f64],
        dither: bool,
        seed: Option<u64>,
    ) -> Result<TransformReport> {
        validate_sample(comparison)?;
        let n = self.n() as f64;
        let seed_used = if dither {
            Some(seed.unwrap_or_else(fresh_seed))
        } else {
            None
        };
        let transformed = comparison
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                let k = self.count_le(y);
                if !dither || k == 0 {
                    k as f64 / n
                } else {
                    let u = SeededRng::new(seed_used.unwrap(), j as u64).next_uniform();
                    (k as f64 - u) / n
                }
            })
            .collect::<Vec<f64>>();
        let m = comparison.len();
        let ratio = m as f64 / n;
        Ok(TransformReport {
            transformed,
            m,
            n_reference: self.n(),
            ratio,
            dithered: dither,
            seed_used,
            ratio_warning: ratio >= RATIO_WARNING_THRESHOLD,
        })
    }

    /// Persist as text: a header `ecdf v1 n=<count>` followed by one value
    /// per line in sorted order. Values round-trip exactly.
    pub fn write_text<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "ecdf v1 n={}", self.n())?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read back a file produced by [`EmpiricalCdf::write_text`].
    pub fn read_text<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| malformed(1, "missing header"))?;
        let n: usize = header
            .strip_prefix("ecdf v1 n=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| malformed(1, "expected `ecdf v1 n=<count>`"))?;
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut values = Vec::with_capacity(n);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| malformed(lineno, "not a number"))?;
            if !v.is_finite() {
                return Err(malformed(lineno, "non-finite value"));
            }
            if let Some(&prev) = values.last() {
                if v < prev {
                    return Err(malformed(lineno, "values not sorted"));
                }
            }
            values.push(v);
        }
        if values.len() != n {
            return Err(malformed(
                values.len() + 2,
                &format!("header says n={n} but found {} values", values.len()),
            ));
        }
        Ok(EmpiricalCdf { values })
    }
}

fn malformed(line: usize, message: &str) -> Error {
    Error::MalformedFile {
        line,
        message: message.to_owned(),
    }
}

/// One locally sorted chunk of a dataset, tagged with where it came from.
#[derive(Debug, Clone)]
pub struct EcdfPartition {
    values: Vec<f64>,
    provenance: String,
}

impl EcdfPartition {
    /// Validate and locally sort one chunk. Empty chunks are allowed; they
    /// merge away.
    pub fn new(mut values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(EcdfPartition {
            values,
            provenance: provenance.into(),
        })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Min-heap entry for the k-way merge; ties broken by partition index so
/// the merge order is deterministic.
struct MergeHead {
    value: f64,
    part: usize,
    pos: usize,
}

impl PartialEq for MergeHead {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for MergeHead {}
impl PartialOrd for MergeHead {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MergeHead {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we pop the smallest value.
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.part.cmp(&self.part))
    }
}

/// A comparison sample mapped through a reference ecdf.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    /// Mapped values, in input order, all within [0, 1].
    pub transformed: Vec<f64>,
    /// Comparison sample size.
    pub m: usize,
    /// Reference sample size.
    pub n_reference: usize,
    /// `m / n_reference`.
    pub ratio: f64,
    /// Whether tie-dithering was applied.
    pub dithered: bool,
    /// The seed that drove dithering, if any.
    pub seed_used: Option<u64>,
    /// True when `ratio >= 0.2`.
    pub ratio_warning: bool,
}

fn validate_sample(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(index) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    Ok(())
}
