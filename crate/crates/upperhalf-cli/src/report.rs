//! Deterministic JSON report emission.
//!
//! Reports are written with a fixed key order and floats rendered as
//! `{:.16e}` (17 significant digits), so two runs over the same problem
//! produce byte-identical output regardless of worker count or platform
//! locale. serde_json is deliberately not used here: its map type reorders
//! keys and its float rendering is shortest-round-trip, both of which make
//! byte-level comparison fragile.

use upperhalf::soliton::{GridSpec, ResidualReport, Verdict};

use crate::config::{RawConfig, RawField, RawG};

/// Renders a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Escapes a string for inclusion in a JSON document.
pub fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn float_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
    format!("[{}]", items.join(", "))
}

fn field_json(field: &RawField) -> String {
    match field {
        RawField::Killing2d { a, b, c } => format!(
            "{{\"family\": \"killing2d\", \"a\": {}, \"b\": {}, \"c\": {}}}",
            fmt_f64(*a),
            fmt_f64(*b),
            fmt_f64(*c)
        ),
        RawField::Killingnd { a, b, c } => format!(
            "{{\"family\": \"killingnd\", \"a\": {}, \"b\": {}, \"c\": {}}}",
            float_array(a),
            fmt_f64(*b),
            float_array(c)
        ),
        RawField::Constant { components } => format!(
            "{{\"family\": \"constant\", \"components\": {}}}",
            float_array(components)
        ),
        RawField::Gradient { a, b, c, e } => format!(
            "{{\"family\": \"gradient\", \"a\": {}, \"b\": {}, \"c\": {}, \"e\": {}}}",
            fmt_f64(*a),
            float_array(b),
            fmt_f64(*c),
            fmt_f64(*e)
        ),
        RawField::Custom { components } => {
            let items: Vec<String> = components
                .iter()
                .map(|s| format!("\"{}\"", escape_json(s)))
                .collect();
            format!(
                "{{\"family\": \"custom\", \"components\": [{}]}}",
                items.join(", ")
            )
        }
    }
}

fn conformal_json(g: &RawG) -> String {
    match g {
        RawG::Unit => "{\"type\": \"unit\"}".to_string(),
        RawG::DerivedFromPotential => "{\"type\": \"derived-from-potential\"}".to_string(),
        RawG::Custom { expr } => {
            format!("{{\"type\": \"custom\", \"expr\": \"{}\"}}", escape_json(expr))
        }
    }
}

fn problem_json(config: &RawConfig) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "    \"kind\": \"{}\",\n",
        config.kind.as_str()
    ));
    out.push_str(&format!("    \"dimension\": {},\n", config.dimension));
    out.push_str(&format!("    \"lambda\": {},\n", fmt_f64(config.lambda)));
    out.push_str(&format!(
        "    \"rho\": {},\n",
        fmt_f64(config.rho.unwrap_or(0.0))
    ));
    if let Some(field) = &config.field {
        out.push_str(&format!("    \"field\": {},\n", field_json(field)));
    }
    if let Some(p) = &config.potential {
        out.push_str(&format!(
            "    \"potential\": {{\"a\": {}, \"b\": {}, \"c\": {}, \"e\": {}}},\n",
            fmt_f64(p.a),
            float_array(&p.b),
            fmt_f64(p.c),
            fmt_f64(p.e)
        ));
    }
    let g = config.conformal.clone().unwrap_or(RawG::Unit);
    out.push_str(&format!("    \"G\": {}\n", conformal_json(&g)));
    out.push_str("  }");
    out
}

fn grid_json(grid: &GridSpec) -> String {
    let axes: Vec<String> = grid
        .axes()
        .iter()
        .map(|ax| {
            format!(
                "{{\"min\": {}, \"max\": {}, \"count\": {}}}",
                fmt_f64(ax.min),
                fmt_f64(ax.max),
                ax.count
            )
        })
        .collect();
    format!(
        "{{\n    \"axes\": [{}],\n    \"floor\": {}\n  }}",
        axes.join(", "),
        fmt_f64(grid.floor())
    )
}

pub struct ReportOptions {
    pub timestamp: Option<String>,
    pub dump: Option<Vec<(Vec<f64>, f64, f64)>>,
}

/// Builds the full check report document.
pub fn render_report(
    config: &RawConfig,
    grid: &GridSpec,
    report: &ResidualReport,
    options: &ReportOptions,
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"problem\": {},\n", problem_json(config)));
    out.push_str(&format!("  \"grid\": {},\n", grid_json(grid)));
    out.push_str(&format!("  \"points\": {},\n", report.points));
    out.push_str(&format!("  \"max_abs\": {},\n", fmt_f64(report.max_abs)));
    out.push_str(&format!(
        "  \"max_frobenius\": {},\n",
        fmt_f64(report.max_frobenius)
    ));
    out.push_str(&format!(
        "  \"argmax_point\": {},\n",
        float_array(&report.argmax_point)
    ));
    out.push_str(&format!("  \"tolerance\": {},\n", fmt_f64(report.tolerance)));
    let verdict = match report.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    };
    out.push_str(&format!("  \"verdict\": \"{verdict}\""));
    if let Some(ts) = &options.timestamp {
        out.push_str(&format!(",\n  \"timestamp\": \"{}\"", escape_json(ts)));
    }
    if let Some(rows) = &options.dump {
        out.push_str(",\n  \"dump\": [\n");
        let rendered: Vec<String> = rows
            .iter()
            .map(|(coords, abs, fro)| {
                format!(
                    "    {{\"point\": {}, \"max_abs\": {}, \"frobenius\": {}}}",
                    float_array(coords),
                    fmt_f64(*abs),
                    fmt_f64(*fro)
                )
            })
            .collect();
        out.push_str(&rendered.join(",\n"));
        out.push_str("\n  ]");
    }
    out.push_str("\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_with_17_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.5), "-5.0000000000000000e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn strings_escape_quotes_and_backslashes() {
        assert_eq!(escape_json("x^2"), "x^2");
        assert_eq!(escape_json("a\"b\\c"), "a\\\"b\\\\c");
        assert_eq!(escape_json("a\nb"), "a\\nb");
    }
}
