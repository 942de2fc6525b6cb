//! Serialization of experiment runs: CSV rows, a JSON document, and a
//! gnuplot script that draws the CSV errors on log-log axes.

use serde::Serialize;

use crate::convergence::{Approach, ConvergenceReport};
use crate::exact_arith::Real;
use crate::experiments::ExperimentRun;
use crate::Result;

/// Significant digits for every serialized number.
pub const DIGITS: usize = 40;

pub const CSV_HEADER: &str = "experiment,n,c,value,target,abs_error,rel_error";

fn num(x: &Real) -> String {
    x.format_sci(DIGITS)
}

fn c_field(run: &ExperimentRun) -> String {
    run.c
        .as_ref()
        .map_or_else(String::new, |c| match c.to_real(&crate::PrecisionContext::default()) {
            Some(r) => num(&r),
            None => "inf".to_string(),
        })
}

/// All rows of all runs under one header, LF line endings.
pub fn to_csv(runs: &[ExperimentRun]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for run in runs {
        let c = c_field(run);
        for report in &run.reports {
            let target = num(&report.target);
            for row in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    report.name,
                    row.n,
                    c,
                    num(&row.value),
                    target,
                    num(&row.abs_error),
                    num(&row.rel_error)
                ));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct JsonRow {
    n: u64,
    value: String,
    abs_error: String,
    rel_error: String,
}

#[derive(Serialize)]
struct JsonRate {
    slope: String,
    r_squared: String,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    name: &'a str,
    target: String,
    notes: &'a str,
    flags: &'a [String],
    approach: &'static str,
    checked: bool,
    approach_holds: bool,
    rate: Option<JsonRate>,
    aitken_limit: Option<String>,
    rows: Vec<JsonRow>,
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    name: &'a str,
    passed: bool,
    detail: &'a str,
}

#[derive(Serialize)]
struct JsonRun<'a> {
    experiment: &'static str,
    c: Option<String>,
    precision_bits: u32,
    passed: bool,
    checks: Vec<JsonCheck<'a>>,
    reports: Vec<JsonReport<'a>>,
}

fn json_report(r: &ConvergenceReport) -> JsonReport<'_> {
    JsonReport {
        name: &r.name,
        target: num(&r.target),
        notes: &r.notes,
        flags: &r.flags,
        approach: match r.approach {
            Approach::Monotone => "monotone",
            Approach::FirstVsLast => "first-vs-last",
        },
        checked: r.checked,
        approach_holds: r.approach_holds(),
        rate: r.rate.as_ref().map(|e| JsonRate {
            slope: num(&e.slope),
            r_squared: num(&e.r_squared),
        }),
        aitken_limit: r.aitken_limit.as_ref().map(num),
        rows: r
            .rows
            .iter()
            .map(|row| JsonRow {
                n: row.n,
                value: num(&row.value),
                abs_error: num(&row.abs_error),
                rel_error: num(&row.rel_error),
            })
            .collect(),
    }
}

fn json_run(run: &ExperimentRun) -> JsonRun<'_> {
    JsonRun {
        experiment: run.experiment.name(),
        c: run.c.as_ref().map(|_| c_field(run)),
        precision_bits: run.precision_bits,
        passed: run.passed(),
        checks: run
            .checks
            .iter()
            .map(|c| JsonCheck {
                name: &c.name,
                passed: c.passed,
                detail: &c.detail,
            })
            .collect(),
        reports: run.reports.iter().map(json_report).collect(),
    }
}

/// A single run serializes as an object, several as an array. Numbers are
/// strings so no digits are lost to a float parser.
pub fn to_json(runs: &[ExperimentRun]) -> Result<String> {
    let mut text = if let [run] = runs {
        serde_json::to_string_pretty(&json_run(run))
    } else {
        serde_json::to_string_pretty(&runs.iter().map(json_run).collect::<Vec<_>>())
    }
    .map_err(|e| crate::Error::domain(format!("json serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// A gnuplot script plotting `abs_error` against `n` for every sequence in
/// `runs`, reading the CSV at `csv_path`.
pub fn gnuplot_script(runs: &[ExperimentRun], csv_path: &str) -> String {
    let names: Vec<&str> = runs
        .iter()
        .flat_map(|r| r.reports.iter().map(|s| s.name.as_str()))
        .collect();
    let file = csv_path.replace('\\', "\\\\").replace('"', "\\\"");
    let mut out = String::new();
    out.push_str("set datafile separator \",\"\n");
    out.push_str("set logscale xy\n");
    out.push_str("set format y \"%.0e\"\n");
    out.push_str("set xlabel \"n\"\n");
    out.push_str("set ylabel \"absolute error\"\n");
    out.push_str("set key outside right\n");
    out.push_str("set grid\n");
    let curves: Vec<String> = names
        .iter()
        .map(|name| {
            format!(
                "  \"{file}\" using (strcol(1) eq \"{name}\" ? $2 : 1/0):6 every ::1 with linespoints title \"{name}\""
            )
        })
        .collect();
    if curves.is_empty() {
        return out;
    }
    out.push_str("plot \\\n");
    out.push_str(&curves.join(", \\\n"));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run, Experiment, ExperimentConfig};

    fn small(e: Experiment) -> ExperimentRun {
        let config = ExperimentConfig {
            n_min: Some(1),
            n_max: Some(16),
            ..ExperimentConfig::default()
        };
        run(e, &config).unwrap()
    }

    #[test]
    fn csv_has_header_and_fixed_columns() {
        let csv = to_csv(&[small(Experiment::Stirling)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(!csv.contains('\r'));
        assert_eq!(lines.len(), 1 + 5);
        let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(ns, ["1", "2", "4", "8", "16"]);
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 7);
            assert_eq!(fields[2], "");
            assert!(fields[3].starts_with("2.") || fields[3].starts_with("3."));
            assert_eq!(fields[4], fields[4].trim());
        }
        assert!(lines[1].starts_with("stirling,1,,2.718281828459045235360287471352662497757e0,"));
    }

    #[test]
    fn csv_c_column_for_cutoff_experiments() {
        let csv = to_csv(&[small(Experiment::PoissonRatio)]);
        let first = csv.lines().nth(1).unwrap();
        assert_eq!(first.split(',').nth(2).unwrap(), format!("1.{}e0", "0".repeat(39)));
    }

    #[test]
    fn json_round_trips_through_a_parser() {
        let text = to_json(&[small(Experiment::IrwinHallBn)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["experiment"], "irwin-hall-bn");
        let flags = v["reports"][0]["flags"].as_array().unwrap();
        assert!(flags.iter().any(|f| f.as_str().unwrap().contains("exact-arithmetic")));
        assert!(v["reports"][0]["rows"][0]["value"].is_string());
        let both = to_json(&[small(Experiment::Stirling), small(Experiment::Wallis)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&both).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
    }

    #[test]
    fn gnuplot_references_each_sequence() {
        let run = small(Experiment::Trapezoid);
        let script = gnuplot_script(std::slice::from_ref(&run), "out.csv");
        assert!(script.contains("set logscale xy"));
        assert!(script.contains("strcol(1) eq \"trapezoid\""));
        assert!(script.contains("strcol(1) eq \"trapezoid/printed\""));
        assert!(script.contains("\"out.csv\""));
    }
}
