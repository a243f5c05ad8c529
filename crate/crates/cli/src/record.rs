//! Benchmark records, sweep specifications and report formatting.

use std::fmt::Write as _;

use sgemm_core::gemm::KernelVariant;
use sgemm_core::matrix::{flop_count, Dims};

use crate::{Error, Result};

/// One timed measurement: a variant at a problem size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub variant: KernelVariant,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub stride: usize,
    pub reps: usize,
    /// Median wall-clock seconds of one multiply call.
    pub seconds: f64,
    pub mflops: f64,
}

impl BenchRecord {
    /// Build a record from a measured time; `seconds` is already the
    /// per-call median, so `mflops = 2*M*N*K / (seconds * 1e6)`.
    pub fn new(
        variant: KernelVariant,
        dims: Dims,
        stride: usize,
        reps: usize,
        seconds: f64,
    ) -> Result<BenchRecord> {
        if !seconds.is_finite() || seconds <= 0.0 {
            return Err(Error::Report(format!(
                "non-positive measured time {seconds}"
            )));
        }
        let flops = flop_count(dims)?;
        Ok(BenchRecord {
            variant,
            m: dims.m,
            n: dims.n,
            k: dims.k,
            stride,
            reps,
            seconds,
            mflops: flops as f64 / (seconds * 1e6),
        })
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.m, self.n, self.k)
    }
}

/// A square-size benchmark sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub size_min: usize,
    pub size_max: usize,
    pub size_step: usize,
    /// Fixed stride for every size; `None` uses stride = size.
    pub stride: Option<usize>,
    /// Permit `stride < size_max` (records then use `max(stride, size)`).
    pub allow_short_stride: bool,
    pub variants: Vec<KernelVariant>,
    pub reps: usize,
    pub flush: bool,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size_min == 0 || self.size_step == 0 || self.reps == 0 {
            return Err(Error::Report(
                "size_min, size_step and reps must be positive".into(),
            ));
        }
        if self.size_min > self.size_max {
            return Err(Error::Report(format!(
                "empty sweep: min {} > max {}",
                self.size_min, self.size_max
            )));
        }
        if self.variants.is_empty() {
            return Err(Error::Report("no variants selected".into()));
        }
        if let Some(stride) = self.stride {
            if self.size_max > stride && !self.allow_short_stride {
                return Err(Error::Report(format!(
                    "stride {} is below the largest size {}; pass the short-stride \
                     override to time with per-size strides",
                    stride, self.size_max
                )));
            }
        }
        Ok(())
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        (self.size_min..=self.size_max).step_by(self.size_step)
    }

    /// Stride used for a given size.
    pub fn stride_for(&self, size: usize) -> usize {
        match self.stride {
            Some(s) => s.max(size),
            None => size,
        }
    }
}

/// Output shapes for a set of records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    PlotData,
    Summary,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "plotdata" => Ok(ReportFormat::PlotData),
            "summary" => Ok(ReportFormat::Summary),
            other => Err(Error::Report(format!(
                "unknown format `{other}` (expected csv, plotdata or summary)"
            ))),
        }
    }
}

pub const CSV_HEADER: &str = "variant,M,N,K,stride,reps,seconds,mflops";

/// Render records in the requested format.
///
/// CSV uses the shortest float representation that parses back to the
/// same bits, so emit/parse round-trips exactly.
pub fn emit_report(records: &[BenchRecord], format: ReportFormat) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Report("no records to report".into()));
    }
    match format {
        ReportFormat::Csv => Ok(emit_csv(records)),
        ReportFormat::PlotData => Ok(emit_plotdata(records)),
        ReportFormat::Summary => Ok(emit_summary(records)),
    }
}

fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.variant, r.m, r.n, r.k, r.stride, r.reps, r.seconds, r.mflops
        );
    }
    out
}

fn variants_in_order(records: &[BenchRecord]) -> Vec<KernelVariant> {
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&r.variant) {
            seen.push(r.variant);
        }
    }
    seen
}

fn emit_plotdata(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    for variant in variants_in_order(records) {
        let _ = writeln!(out, "# variant: {variant}");
        for r in records.iter().filter(|r| r.variant == variant) {
            let _ = writeln!(out, "{} {}", r.m, r.mflops);
        }
        out.push('\n');
    }
    out
}

fn emit_summary(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "variant  mean_mflops  peak_mflops  records");
    for variant in variants_in_order(records) {
        let of_variant: Vec<&BenchRecord> =
            records.iter().filter(|r| r.variant == variant).collect();
        // headline number: mean past size 100, where setup overhead has
        // faded; fall back to all records for small-only runs
        let past_100: Vec<&BenchRecord> =
            of_variant.iter().copied().filter(|r| r.m > 100).collect();
        let pool = if past_100.is_empty() {
            &of_variant
        } else {
            &past_100
        };
        let mean = pool.iter().map(|r| r.mflops).sum::<f64>() / pool.len() as f64;
        let peak = of_variant
            .iter()
            .map(|r| r.mflops)
            .fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            out,
            "{variant:<8} {mean:>11.1} {peak:>12.1} {:>8}",
            of_variant.len()
        );
    }

    // per-size speedup of each blocked variant over the naive baseline
    let naive: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.variant == KernelVariant::Naive)
        .collect();
    if !naive.is_empty() {
        for variant in variants_in_order(records) {
            if variant == KernelVariant::Naive {
                continue;
            }
            let _ = writeln!(out, "\nsize  {variant}/naive");
            for r in records.iter().filter(|r| r.variant == variant) {
                if let Some(base) = naive.iter().find(|b| (b.m, b.n, b.k) == (r.m, r.n, r.k)) {
                    let _ = writeln!(out, "{:<5} {:.2}", r.m, r.mflops / base.mflops);
                }
            }
        }
    }
    out
}

/// Parse CSV produced by [`emit_report`] back into records.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::Report(format!(
                "bad CSV header: {:?}",
                other.unwrap_or("")
            )));
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Report(format!(
                "row {}: expected 8 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Report(format!("row {}: bad {what}", idx + 2));
        records.push(BenchRecord {
            variant: fields[0].parse()?,
            m: fields[1].parse().map_err(|_| bad("M"))?,
            n: fields[2].parse().map_err(|_| bad("N"))?,
            k: fields[3].parse().map_err(|_| bad("K"))?,
            stride: fields[4].parse().map_err(|_| bad("stride"))?,
            reps: fields[5].parse().map_err(|_| bad("reps"))?,
            seconds: fields[6].parse().map_err(|_| bad("seconds"))?,
            mflops: fields[7].parse().map_err(|_| bad("mflops"))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(variant: KernelVariant, size: usize, seconds: f64) -> BenchRecord {
        BenchRecord::new(variant, Dims::square(size), 700, 5, seconds).unwrap()
    }

    #[test]
    fn mflops_formula() {
        let r = sample(KernelVariant::BlockedVector, 320, 0.0736);
        assert_eq!(r.mflops, 65_536_000.0 / (0.0736 * 1e6));
        assert!((r.mflops - 890.4).abs() < 0.1);

        let tiny = BenchRecord::new(KernelVariant::Naive, Dims::square(1), 1, 1, 1e-7).unwrap();
        assert_eq!(tiny.mflops, 2.0 / (1e-7 * 1e6));
    }

    #[test]
    fn rejects_non_positive_seconds() {
        assert!(BenchRecord::new(KernelVariant::Naive, Dims::square(4), 4, 1, 0.0).is_err());
        assert!(BenchRecord::new(KernelVariant::Naive, Dims::square(4), 4, 1, -1.0).is_err());
        assert!(BenchRecord::new(KernelVariant::Naive, Dims::square(4), 4, 1, f64::NAN).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let records = vec![
            sample(KernelVariant::Naive, 16, 0.000001234567890123),
            sample(KernelVariant::BlockedScalar, 320, 0.0736),
            sample(KernelVariant::BlockedVector, 320, 1.0 / 3.0),
            sample(KernelVariant::BlockedVector, 700, 0.25),
        ];
        let text = emit_report(&records, ReportFormat::Csv).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), records.len());
        for (p, r) in parsed.iter().zip(records.iter()) {
            assert_eq!(p.variant, r.variant);
            assert_eq!((p.m, p.n, p.k, p.stride, p.reps), (r.m, r.n, r.k, r.stride, r.reps));
            assert_eq!(p.seconds.to_bits(), r.seconds.to_bits());
            assert_eq!(p.mflops.to_bits(), r.mflops.to_bits());
        }
    }

    #[test]
    fn csv_parser_rejects_junk() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("wrong,header\n").is_err());
        let text = format!("{CSV_HEADER}\nnaive,1,1\n");
        assert!(parse_csv(&text).is_err());
        let text = format!("{CSV_HEADER}\nwarp,1,1,1,1,1,0.5,4.0\n");
        assert!(parse_csv(&text).is_err());
    }

    #[test]
    fn single_record_is_two_lines() {
        let records = vec![sample(KernelVariant::Naive, 8, 0.5)];
        let text = emit_report(&records, ReportFormat::Csv).unwrap();
        assert_eq!(text.trim_end().lines().count(), 2);
    }

    #[test]
    fn empty_report_errors() {
        for format in [ReportFormat::Csv, ReportFormat::PlotData, ReportFormat::Summary] {
            assert!(emit_report(&[], format).is_err());
        }
    }

    #[test]
    fn plotdata_groups_by_variant() {
        let records = vec![
            sample(KernelVariant::Naive, 16, 0.001),
            sample(KernelVariant::BlockedVector, 16, 0.0005),
            sample(KernelVariant::Naive, 32, 0.002),
            sample(KernelVariant::BlockedVector, 32, 0.0006),
        ];
        let text = emit_report(&records, ReportFormat::PlotData).unwrap();
        let blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
        assert_eq!(blocks.len(), 2);
        assert!(blocks[0].starts_with("# variant: naive"));
        assert!(blocks[1].starts_with("# variant: vector"));
        assert_eq!(blocks[0].lines().count(), 3);
    }

    #[test]
    fn summary_of_constant_rate() {
        // every record at exactly 100 mflops: mean 100, peak 100
        let mut records = Vec::new();
        for size in [50usize, 120, 200] {
            let flops = flop_count(Dims::square(size)).unwrap() as f64;
            let seconds = flops / 100e6;
            records.push(
                BenchRecord::new(KernelVariant::Naive, Dims::square(size), 700, 5, seconds)
                    .unwrap(),
            );
        }
        let text = emit_report(&records, ReportFormat::Summary).unwrap();
        let line = text
            .lines()
            .find(|l| l.starts_with("naive"))
            .expect("naive row");
        assert!(line.contains("100.0"), "{line}");
    }

    #[test]
    fn summary_reports_speedup_per_size() {
        let records = vec![
            sample(KernelVariant::Naive, 200, 0.1),
            sample(KernelVariant::BlockedVector, 200, 0.05),
        ];
        let text = emit_report(&records, ReportFormat::Summary).unwrap();
        assert!(text.contains("vector/naive"));
        assert!(text.contains("200   2.00"), "{text}");
    }

    #[test]
    fn sweep_spec_validation() {
        let base = SweepSpec {
            size_min: 16,
            size_max: 64,
            size_step: 16,
            stride: Some(700),
            allow_short_stride: false,
            variants: vec![KernelVariant::Naive],
            reps: 3,
            flush: false,
            seed: 42,
        };
        base.validate().unwrap();
        assert_eq!(base.sizes().collect::<Vec<_>>(), vec![16, 32, 48, 64]);
        assert_eq!(
            (16..=700).step_by(4).count(),
            172,
            "full replication sweep is 172 sizes"
        );

        let short = SweepSpec {
            stride: Some(100),
            size_max: 200,
            ..base.clone()
        };
        assert!(short.validate().is_err());
        let overridden = SweepSpec {
            allow_short_stride: true,
            ..short
        };
        overridden.validate().unwrap();
        assert_eq!(overridden.stride_for(200), 200);
        assert_eq!(overridden.stride_for(64), 100);

        let tight = SweepSpec {
            stride: None,
            ..base.clone()
        };
        assert_eq!(tight.stride_for(48), 48);

        assert!(SweepSpec { reps: 0, ..base.clone() }.validate().is_err());
        assert!(SweepSpec { size_min: 0, ..base.clone() }.validate().is_err());
        assert!(SweepSpec {
            variants: vec![],
            ..base
        }
        .validate()
        .is_err());
    }
}
