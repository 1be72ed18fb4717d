use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

use crate::chi::Chi;
use crate::error::{Error, Result};

use super::kmn::regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Treatment {
    #[serde(rename = "SIG2")]
    Sig2,
    #[serde(rename = "SIG3")]
    Sig3,
}

impl FromStr for Treatment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "SIG2" => Ok(Treatment::Sig2),
            "SIG3" => Ok(Treatment::Sig3),
            _ => Err(format!("unknown treatment {s:?}")),
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Treatment::Sig2 => "SIG2",
            Treatment::Sig3 => "SIG3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkerType {
    High,
    Low,
}

impl FromStr for WorkerType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "high" => Ok(WorkerType::High),
            "low" => Ok(WorkerType::Low),
            _ => Err(format!("worker_type must be high or low, got {s:?}")),
        }
    }
}

impl fmt::Display for WorkerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkerType::High => "high",
            WorkerType::Low => "low",
        })
    }
}

/// A block index, or the pooled row over all blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Block {
    Index(u32),
    All,
}

impl Serialize for Block {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Block::Index(i) => s.serialize_u32(*i),
            Block::All => s.serialize_str("all"),
        }
    }
}

impl FromStr for Block {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            return Ok(Block::All);
        }
        s.parse().map(Block::Index).map_err(|_| format!("block must be an index or \"all\", got {s:?}"))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Index(i) => write!(f, "{i}"),
            Block::All => f.write_str("all"),
        }
    }
}

/// Investment rate of one worker type in one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStats {
    pub treatment: Treatment,
    pub block: Block,
    pub worker_type: WorkerType,
    pub n: u32,
    pub mean: f64,
    pub sd: f64,
}

impl BlockStats {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.n < 1 {
            return Err("n must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mean) {
            return Err(format!("mean {} outside [0, 1]", self.mean));
        }
        if !(self.sd >= 0.0 && self.sd.is_finite()) {
            return Err(format!("sd {} must be non-negative", self.sd));
        }
        Ok(())
    }

    /// Investment is a yes/no choice, so a cell mean is `k / n` for a whole
    /// count `k`. When the printed mean and sd agree with some `k` to their
    /// three decimals, returns the unrounded mean and sample sd of that
    /// count.
    pub fn binary_moments(&self) -> Option<(f64, f64)> {
        let n = self.n as f64;
        let k = (self.mean * n).round();
        let mean = k / n;
        if self.n < 2 || (mean - self.mean).abs() > 5e-4 + 1e-12 {
            return None;
        }
        let sd = (k * (n - k) / (n * (n - 1.0))).sqrt();
        ((sd - self.sd).abs() <= 5e-4 + 1e-12).then_some((mean, sd))
    }
}

const HEADER: [&str; 6] = ["treatment", "block", "worker_type", "n", "mean", "sd"];

pub fn load_block_stats(path: impl AsRef<Path>) -> Result<Vec<BlockStats>> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)?;
    parse_block_stats(&src, &path.display().to_string())
}

/// Parses `treatment,block,worker_type,n,mean,sd` rows. Empty input is an
/// empty list.
pub fn parse_block_stats(src: &str, source_name: &str) -> Result<Vec<BlockStats>> {
    let err = |line: u64, message: String| Error::Csv { source_name: source_name.to_string(), line, message };
    if src.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(src.as_bytes());
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(err(1, format!("expected header {}", HEADER.join(","))));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        fn parse<T: FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {what} {s:?}"))
        }
        let parsed = (|| -> std::result::Result<BlockStats, String> {
            let stats = BlockStats {
                treatment: field(0).parse()?,
                block: field(1).parse()?,
                worker_type: field(2).parse()?,
                n: parse(field(3), "n")?,
                mean: parse(field(4), "mean")?,
                sd: parse(field(5), "sd")?,
            };
            stats.validate()?;
            Ok(stats)
        })();
        out.push(parsed.map_err(|m| err(line, m))?);
    }
    Ok(out)
}

/// Both bundled tables, first treatment first.
pub fn bundled_block_stats() -> Vec<BlockStats> {
    let mut out = parse_block_stats(include_str!("../../data/tables_sig2.csv"), "tables_sig2.csv")
        .expect("bundled table parses");
    out.extend(
        parse_block_stats(include_str!("../../data/tables_sig3.csv"), "tables_sig3.csv")
            .expect("bundled table parses"),
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
}

/// One-sample t-test of `mean` against `mu0` with sample sd `sd`.
pub fn one_sample_t(mean: f64, sd: f64, n: u32, mu0: f64) -> Result<TTest> {
    if n < 2 {
        return Err(Error::invalid("a t-test needs at least two observations"));
    }
    if sd == 0.0 {
        return Err(Error::Degenerate(format!("zero standard deviation at mean {mean}")));
    }
    if !(sd > 0.0) {
        return Err(Error::invalid(format!("sd {sd} must be positive")));
    }
    let df = (n - 1) as f64;
    let t = (mean - mu0) / (sd / (n as f64).sqrt());
    let p = if t == 0.0 { 1.0 } else { beta_reg(df / 2.0, 0.5, df / (df + t * t)) };
    Ok(TTest { t, df, p })
}

/// Two-sided `level` interval `mean +- t_q sd / sqrt(n)`.
pub fn confidence_interval(mean: f64, sd: f64, n: u32, level: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("an interval needs at least two observations"));
    }
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let half = dist.inverse_cdf(0.5 + level / 2.0) * sd / (n as f64).sqrt();
    Ok((mean - half, mean + half))
}

/// A test, or when the sample has no spread, whether it equals the
/// prediction exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    Test(TTest),
    ExactMatch(bool),
}

impl TestOutcome {
    fn run(mean: f64, sd: f64, n: u32, mu0: f64) -> Result<Self> {
        match one_sample_t(mean, sd, n, mu0) {
            Err(Error::Degenerate(_)) => Ok(TestOutcome::ExactMatch((mean - mu0).abs() < 1e-12)),
            other => other.map(TestOutcome::Test),
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            TestOutcome::Test(t) => Some(t.p),
            TestOutcome::ExactMatch(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub stats: BlockStats,
    /// Mean and sd actually tested.
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub standard_prediction: f64,
    pub standard: TestOutcome,
    pub cursed_prediction: Option<f64>,
    pub cursed: Option<TestOutcome>,
}

/// Tests every cell against the standard prediction (high types invest, low
/// types do not) and, given `chi`, against the cursed one: the hybrid
/// investment probability where a hybrid survives, otherwise no investment
/// when pooling survives and full investment when only separation does.
pub fn prediction_report(stats: &[BlockStats], chi: Option<Chi>) -> Result<Vec<PredictionRow>> {
    stats
        .iter()
        .map(|s| {
            let (mean, sd) = s.binary_moments().unwrap_or((s.mean, s.sd));
            let (ci_low, ci_high) = confidence_interval(mean, sd, s.n, 0.95)?;
            let standard_prediction = match s.worker_type {
                WorkerType::High => 1.0,
                WorkerType::Low => 0.0,
            };
            let cursed_prediction = chi.map(|chi| match s.worker_type {
                WorkerType::Low => 0.0,
                WorkerType::High => {
                    let r = regime(chi);
                    match r.hybrid_invest_prob {
                        Some(q) => q,
                        None if r.pooling_survives => 0.0,
                        None => 1.0,
                    }
                }
            });
            Ok(PredictionRow {
                stats: s.clone(),
                mean,
                sd,
                ci_low,
                ci_high,
                standard_prediction,
                standard: TestOutcome::run(mean, sd, s.n, standard_prediction)?,
                cursed_prediction,
                cursed: cursed_prediction.map(|mu| TestOutcome::run(mean, sd, s.n, mu)).transpose()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        let all = bundled_block_stats();
        assert_eq!(all.len(), 32);
        let first = &all[0];
        assert_eq!((first.treatment, first.block, first.worker_type, first.n), (Treatment::Sig2, Block::Index(1), WorkerType::High, 37));
        assert_eq!((first.mean, first.sd), (0.378, 0.492));
        let last_high = all.iter().find(|s| s.treatment == Treatment::Sig3 && s.block == Block::Index(8) && s.worker_type == WorkerType::High).unwrap();
        assert_eq!((last_high.n, last_high.mean, last_high.sd), (30, 0.833, 0.379));
    }

    #[test]
    fn t_test_basics() {
        let t = one_sample_t(0.5, 0.2, 10, 0.5).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let t = one_sample_t(0.378, 0.492, 37, 1.0).unwrap();
        assert!((t.t.abs() - 7.69).abs() < 0.01 && t.p < 1e-3);
        assert!(matches!(one_sample_t(0.0, 0.0, 38, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn t_distribution_tail_matches_reference() {
        // 97.5% quantile of Student t with 10 degrees of freedom
        let q = 2.2281388519649385;
        let t = one_sample_t(q, 11f64.sqrt(), 11, 0.0).unwrap();
        assert!((t.p - 0.05).abs() < 1e-10, "{}", t.p);
        let (lo, hi) = confidence_interval(0.0, 11f64.sqrt(), 11, 0.95).unwrap();
        assert!((hi - q).abs() < 1e-9 && (lo + q).abs() < 1e-9);
    }

    #[test]
    fn malformed_rows_report_lines() {
        let src = "treatment,block,worker_type,n,mean,sd\nSIG2,1,high,37,0.378,0.492\nSIG2,2,middle,3,0.1,0.1\n";
        match parse_block_stats(src, "x.csv") {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let src = "treatment,block,worker_type,n,mean,sd\nSIG2,1,high,37,1.5,0.492\n";
        assert!(matches!(parse_block_stats(src, "x.csv"), Err(Error::Csv { line: 2, .. })));
        assert!(parse_block_stats("", "x.csv").unwrap().is_empty());
    }

    #[test]
    fn binary_moments_recover_counts() {
        let s = BlockStats { treatment: Treatment::Sig2, block: Block::Index(3), worker_type: WorkerType::Low, n: 32, mean: 0.063, sd: 0.246 };
        let (mean, sd) = s.binary_moments().unwrap();
        assert_eq!(mean, 2.0 / 32.0);
        assert_eq!(sd, (2.0 * 30.0 / (32.0 * 31.0_f64)).sqrt());
    }
}
