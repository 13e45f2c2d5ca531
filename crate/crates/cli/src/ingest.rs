//! Dataset ingestion: numeric columns from line-per-value or CSV files,
//! each file treated as one partition.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use ksdrift::EcdfPartition;
use rayon::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    /// One float per line; blank lines are ignored.
    Lines,
    /// Delimited rows; select the column with --column.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MissingPolicy {
    /// A non-numeric token aborts with its line number.
    Error,
    /// Non-numeric tokens are dropped and counted.
    Skip,
}

/// Where and how to read one dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub paths: Vec<PathBuf>,
    pub format: FileFormat,
    /// CSV column: a header name, or an all-digits positional index (the
    /// file is then read without a header row).
    pub column: Option<String>,
    pub missing: MissingPolicy,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.paths.is_empty() {
            return Err(CliError::Usage("no input paths given".to_owned()));
        }
        match (self.format, &self.column) {
            (FileFormat::Csv, None) => {
                Err(CliError::Usage("--format csv requires --column".to_owned()))
            }
            (FileFormat::Lines, Some(_)) => Err(CliError::Usage(
                "--column only applies to --format csv".to_owned(),
            )),
            _ => Ok(()),
        }
    }

    pub fn describe_paths(&self) -> String {
        self.paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// One dataset read into locally sorted partitions.
#[derive(Debug)]
pub struct Ingested {
    pub partitions: Vec<EcdfPartition>,
    pub total: usize,
    pub skipped: usize,
}

impl Ingested {
    /// All values concatenated in partition order (unsorted across
    /// partitions).
    pub fn concat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total);
        for p in &self.partitions {
            out.extend_from_slice(p.values());
        }
        out
    }
}

/// Read every path of the spec concurrently; each file becomes one
/// partition.
pub fn ingest(spec: &DatasetSpec) -> Result<Ingested, CliError> {
    spec.validate()?;
    let parsed: Vec<(Vec<f64>, usize)> = spec
        .paths
        .par_iter()
        .map(|path| parse_file(path, spec))
        .collect::<Result<_, CliError>>()?;
    let mut partitions = Vec::with_capacity(parsed.len());
    let mut total = 0;
    let mut skipped = 0;
    for (path, (values, dropped)) in spec.paths.iter().zip(parsed) {
        total += values.len();
        skipped += dropped;
        partitions.push(
            EcdfPartition::new(values, path.display().to_string())
                .expect("non-finite tokens are filtered during parsing"),
        );
    }
    Ok(Ingested {
        partitions,
        total,
        skipped,
    })
}

fn parse_file(path: &Path, spec: &DatasetSpec) -> Result<(Vec<f64>, usize), CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    match spec.format {
        FileFormat::Lines => parse_lines(path, file, spec.missing),
        FileFormat::Csv => parse_csv(path, file, spec.column.as_deref().unwrap(), spec.missing),
    }
}

fn token_error(path: &Path, line: u64, token: &str) -> CliError {
    CliError::Parse {
        path: path.to_owned(),
        line,
        message: format!("`{token}` is not a finite number"),
    }
}

fn parse_lines(
    path: &Path,
    file: File,
    missing: MissingPolicy,
) -> Result<(Vec<f64>, usize), CliError> {
    let mut values = Vec::new();
    let mut skipped = 0usize;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx as u64 + 1;
        let line = line.map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => match missing {
                MissingPolicy::Error => return Err(token_error(path, lineno, token)),
                MissingPolicy::Skip => skipped += 1,
            },
        }
    }
    Ok((values, skipped))
}

fn parse_csv(
    path: &Path,
    file: File,
    column: &str,
    missing: MissingPolicy,
) -> Result<(Vec<f64>, usize), CliError> {
    let by_index: Option<usize> = column.parse().ok();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(by_index.is_none())
        .flexible(true)
        .from_reader(file);
    let col = match by_index {
        Some(i) => i,
        None => {
            let headers = reader.headers().map_err(|e| CliError::Parse {
                path: path.to_owned(),
                line: 1,
                message: e.to_string(),
            })?;
            headers
                .iter()
                .position(|h| h == column)
                .ok_or_else(|| CliError::Parse {
                    path: path.to_owned(),
                    line: 1,
                    message: format!("no column named `{column}`"),
                })?
        }
    };
    let mut values = Vec::new();
    let mut skipped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_owned(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let lineno = record.position().map_or(0, |p| p.line());
        let token = record.get(col).unwrap_or("").trim();
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => match missing {
                MissingPolicy::Error => return Err(token_error(path, lineno, token)),
                MissingPolicy::Skip => skipped += 1,
            },
        }
    }
    Ok((values, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn lines_spec(paths: Vec<PathBuf>) -> DatasetSpec {
        DatasetSpec {
            paths,
            format: FileFormat::Lines,
            column: None,
            missing: MissingPolicy::Error,
        }
    }

    #[test]
    fn reads_lines_with_scientific_notation() {
        let f = write_temp("1.5\n\n-2e-3\n3.25E2\n");
        let got = ingest(&lines_spec(vec![f.path().to_owned()])).unwrap();
        assert_eq!(got.partitions[0].values(), &[-0.002, 1.5, 325.0]);
        assert_eq!(got.total, 3);
        assert_eq!(got.skipped, 0);
    }

    #[test]
    fn non_numeric_token_reports_line() {
        let f = write_temp("1.0\nbogus\n2.0\n");
        let err = ingest(&lines_spec(vec![f.path().to_owned()])).unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_token_is_rejected() {
        let f = write_temp("1.0\nNaN\n");
        assert!(matches!(
            ingest(&lines_spec(vec![f.path().to_owned()])),
            Err(CliError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn skip_policy_counts_drops() {
        let f = write_temp("1.0\nbogus\ninf\n2.0\n");
        let mut spec = lines_spec(vec![f.path().to_owned()]);
        spec.missing = MissingPolicy::Skip;
        let got = ingest(&spec).unwrap();
        assert_eq!(got.total, 2);
        assert_eq!(got.skipped, 2);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = ingest(&lines_spec(vec![PathBuf::from("/no/such/file.txt")])).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert!(err.to_string().contains("/no/such/file.txt"));
    }

    #[test]
    fn csv_by_header_name() {
        let f = write_temp("id,latency\na,1.5\nb,2.5\n");
        let spec = DatasetSpec {
            paths: vec![f.path().to_owned()],
            format: FileFormat::Csv,
            column: Some("latency".to_owned()),
            missing: MissingPolicy::Error,
        };
        let got = ingest(&spec).unwrap();
        assert_eq!(got.partitions[0].values(), &[1.5, 2.5]);
    }

    #[test]
    fn csv_by_index_has_no_header_row() {
        let f = write_temp("0.5,x\n1.5,y\n");
        let spec = DatasetSpec {
            paths: vec![f.path().to_owned()],
            format: FileFormat::Csv,
            column: Some("0".to_owned()),
            missing: MissingPolicy::Error,
        };
        let got = ingest(&spec).unwrap();
        assert_eq!(got.partitions[0].values(), &[0.5, 1.5]);
    }

    #[test]
    fn csv_bad_cell_reports_line() {
        let f = write_temp("v\n1.0\noops\n");
        let spec = DatasetSpec {
            paths: vec![f.path().to_owned()],
            format: FileFormat::Csv,
            column: Some("v".to_owned()),
            missing: MissingPolicy::Error,
        };
        match ingest(&spec).unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_unknown_column_fails() {
        let f = write_temp("a,b\n1,2\n");
        let spec = DatasetSpec {
            paths: vec![f.path().to_owned()],
            format: FileFormat::Csv,
            column: Some("nope".to_owned()),
            missing: MissingPolicy::Error,
        };
        assert!(matches!(ingest(&spec), Err(CliError::Parse { .. })));
    }

    #[test]
    fn column_flag_consistency_is_enforced() {
        let f = write_temp("1.0\n");
        let mut spec = lines_spec(vec![f.path().to_owned()]);
        spec.column = Some("v".to_owned());
        assert!(matches!(ingest(&spec), Err(CliError::Usage(_))));

        let mut spec = DatasetSpec {
            paths: vec![f.path().to_owned()],
            format: FileFormat::Csv,
            column: None,
            missing: MissingPolicy::Error,
        };
        assert!(matches!(ingest(&spec), Err(CliError::Usage(_))));
        spec.paths.clear();
        assert!(matches!(ingest(&spec), Err(CliError::Usage(_))));
    }

    #[test]
    fn multiple_files_become_partitions() {
        let a = write_temp("3.0\n1.0\n");
        let b = write_temp("2.0\n");
        let got = ingest(&lines_spec(vec![a.path().to_owned(), b.path().to_owned()])).unwrap();
        assert_eq!(got.partitions.len(), 2);
        assert_eq!(got.partitions[0].values(), &[1.0, 3.0]);
        assert_eq!(got.partitions[1].values(), &[2.0]);
        assert_eq!(got.concat(), vec![1.0, 3.0, 2.0]);
    }
}
