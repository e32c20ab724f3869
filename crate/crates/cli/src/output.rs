//! CSV and table formatting. All numeric fields go through the shared
//! 17-significant-digit formatter so repeated runs are byte-identical.

use plurienv_core::envelope::EnvelopeEstimate;
use plurienv_core::format_f64;
use plurienv_core::runner::CompareReport;
use plurienv_core::scenario::DiscJson;
use plurienv_core::{ComplexVector, ExtReal};

pub fn point_headers(n: usize) -> String {
    (0..n).map(|j| format!("z{j}_re,z{j}_im")).collect::<Vec<_>>().join(",")
}

pub fn point_fields(p: &ComplexVector) -> String {
    p.to_reals().iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(",")
}

fn ext_field(v: ExtReal) -> String {
    match v {
        ExtReal::Finite(x) => format_f64(x),
        other => other.to_string(),
    }
}

/// CSV quoting for the embedded best-disc JSON column.
fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn envelope_csv(
    dimension: usize,
    rows: &[(ComplexVector, Result<EnvelopeEstimate, plurienv_core::Error>)],
) -> String {
    let mut out = String::new();
    out.push_str(&point_headers(dimension));
    out.push_str(",value,feasibility_margin,starts_used,best_disc,status\n");
    for (point, result) in rows {
        out.push_str(&point_fields(point));
        match result {
            Ok(est) => {
                let disc_json = serde_json::to_string(&DiscJson::from_disc(&est.best_disc))
                    .unwrap_or_default();
                out.push_str(&format!(
                    ",{},{},{},{},ok\n",
                    ext_field(est.value),
                    format_f64(est.feasibility_margin),
                    est.starts_used,
                    quoted(&disc_json),
                ));
            }
            Err(e) => {
                out.push_str(&format!(",,,,,{}\n", quoted(&e.to_string())));
            }
        }
    }
    out
}

pub fn compare_csv(dimension: usize, report: &CompareReport) -> String {
    let mut out = String::new();
    out.push_str(&point_headers(dimension));
    out.push_str(",oracle,optimizer,gap,pass,status\n");
    for row in &report.rows {
        out.push_str(&point_fields(&row.point));
        if let Some(status) = &row.status {
            out.push_str(&format!(",,,,fail,{}\n", quoted(status)));
        } else {
            out.push_str(&format!(
                ",{},{},{},{},ok\n",
                format_f64(row.oracle_value),
                format_f64(row.optimizer_value),
                format_f64(row.gap),
                if row.pass { "pass" } else { "fail" },
            ));
        }
    }
    out
}

pub fn compare_table(report: &CompareReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>14} {:>14} {:>10}  {}\n",
        "point", "oracle", "optimizer", "gap", "pass"
    ));
    for row in &report.rows {
        let point = row
            .point
            .entries()
            .iter()
            .map(|z| format!("{:.4}{:+.4}i", z.re, z.im))
            .collect::<Vec<_>>()
            .join(", ");
        match &row.status {
            Some(status) => {
                out.push_str(&format!("{point:<28} {status:>40}\n"));
            }
            None => {
                out.push_str(&format!(
                    "{:<28} {:>14.6} {:>14.6} {:>10.6}  {}\n",
                    point,
                    row.oracle_value,
                    row.optimizer_value,
                    row.gap,
                    if row.pass { "yes" } else { "NO" },
                ));
            }
        }
    }
    out.push_str(&format!(
        "tolerance {:.6}: {}\n",
        report.tolerance,
        if report.all_pass { "all points pass" } else { "some points FAIL" }
    ));
    out
}

pub fn mollify_csv(
    dimension: usize,
    rows: &[(
        ComplexVector,
        Result<plurienv_core::mollify::MollifySweepReport, plurienv_core::Error>,
    )],
) -> String {
    let mut out = String::new();
    out.push_str(&point_headers(dimension));
    out.push_str(",delta,value,base_value,gap_to_base,lower_bound_ok,ordering_ok,status\n");
    for (point, result) in rows {
        match result {
            Ok(report) => {
                for row in &report.rows {
                    out.push_str(&point_fields(point));
                    out.push_str(&format!(
                        ",{},{},{},{},{},{},ok\n",
                        format_f64(row.delta),
                        format_f64(row.value),
                        format_f64(report.base_value),
                        format_f64(row.gap_to_base),
                        row.lower_bound_ok,
                        report.ordering_ok,
                    ));
                }
            }
            Err(e) => {
                out.push_str(&point_fields(point));
                out.push_str(&format!(",,,,,,,{}\n", quoted(&e.to_string())));
            }
        }
    }
    out
}
