//! Rendering and verification helpers for protocol records.

use qet_core::{Method, QetRecord, SweepGrid};

use crate::{json, Format};

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Sampled => "sampled",
    }
}

/// Tidy CSV: `method,site,observable,value,stderr`, or pretty JSON.
pub fn records(records: &[QetRecord], format: Format) -> String {
    if format == Format::Json {
        return json(&records);
    }
    let mut s = String::from("method,site,observable,value,stderr\n");
    for r in records {
        let m = method_name(r.method);
        let se = |v: Option<f64>| v.map(|x| format!("{x:.10}")).unwrap_or_default();
        s.push_str(&format!("{m},0,E0,{:.10},{}\n", r.e0, se(r.e0_stderr)));
        for (j, rec) in &r.receivers {
            let e = rec.energy;
            let err = rec.stderr;
            for (name, v, sv) in [
                ("HX", e.hx, err.map(|x| x.hx)),
                ("HZ", e.hz, err.map(|x| x.hz)),
                ("E", e.e, err.map(|x| x.e)),
                ("E_B", e.e_b, err.map(|x| x.e_b)),
            ] {
                s.push_str(&format!("{m},{j},{name},{v:.10},{}\n", se(sv)));
            }
            s.push_str(&format!("{m},{j},theta,{:.10},\n", rec.theta.theta));
        }
    }
    s
}

pub fn sweep_csv(grid: &SweepGrid, field_only: bool) -> String {
    let mut s = String::from(if field_only {
        "h,k,E_B,E_B_field\n"
    } else {
        "h,k,E_B\n"
    });
    for (i, h) in grid.h.iter().enumerate() {
        for (j, k) in grid.k.iter().enumerate() {
            s.push_str(&format!("{h},{k},{:.10}", grid.e_b[i][j]));
            if field_only {
                s.push_str(&format!(",{:.10}", grid.e_b_field_only[i][j]));
            }
            s.push('\n');
        }
    }
    s
}

/// Sampled values further than five standard errors from the exact record
/// (the first one).
pub fn sampling_failures(records: &[QetRecord]) -> Vec<String> {
    let Some((exact, rest)) = records.split_first() else {
        return vec![];
    };
    let mut out = Vec::new();
    for s in rest {
        if let Some(se) = s.e0_stderr {
            if (s.e0 - exact.e0).abs() > 5.0 * se {
                out.push(format!(
                    "sampled E0 {:.4}±{se:.4} vs exact {:.4}",
                    s.e0, exact.e0
                ));
            }
        }
        for (j, r) in &s.receivers {
            let (Some(se), Some(x)) = (r.stderr, exact.receivers.get(j)) else {
                continue;
            };
            for (name, v, sv, xv) in [
                ("HX", r.energy.hx, se.hx, x.energy.hx),
                ("HZ", r.energy.hz, se.hz, x.energy.hz),
                ("E", r.energy.e, se.e, x.energy.e),
            ] {
                if (v - xv).abs() > 5.0 * sv {
                    out.push(format!("sampled {name}{j} {v:.4}±{sv:.4} vs exact {xv:.4}"));
                }
            }
        }
    }
    out
}

pub fn negative_extraction(record: &QetRecord) -> Vec<String> {
    record
        .receivers
        .iter()
        .filter(|(_, r)| r.energy.e_b < -1e-12)
        .map(|(j, r)| format!("receiver {j} gains energy: E_B = {:.3e}", r.energy.e_b))
        .collect()
}
