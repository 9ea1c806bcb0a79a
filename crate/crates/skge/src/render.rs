//! Human-readable tables, projection CSV, and the SVG scatter plot.

use std::fmt::Write as _;

use skge_core::analytics::{Projection2D, SimilarityResult};
use skge_core::eval::EvalReport;
use skge_core::kg::KGStats;

fn section(out: &mut String, title: &str, rows: &[(String, f64)], macro_value: Option<f64>) {
    let width = rows
        .iter()
        .map(|(k, _)| k.len())
        .chain(["macro".len()].into_iter())
        .max()
        .unwrap_or(8)
        .max(8);
    let _ = writeln!(out, "{title}");
    if rows.is_empty() {
        let _ = writeln!(out, "  (empty)");
    }
    for (key, value) in rows {
        let _ = writeln!(out, "  {key:<width$}  {value:>8.4}");
    }
    if let Some(value) = macro_value {
        let _ = writeln!(out, "  {:-<width$}  {:->8}", "", "");
        let _ = writeln!(out, "  {:<width$}  {value:>8.4}", "macro");
    }
}

/// Fixed-width per-class / per-relation table for an evaluation report.
pub fn eval_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "evaluation  algorithm={}  d={}  k={}",
        report.algorithm, report.dimension, report.k
    );
    let _ = writeln!(out);
    let rows = |map: &std::collections::BTreeMap<String, f64>| -> Vec<(String, f64)> {
        map.iter().map(|(k, v)| (k.clone(), *v)).collect()
    };
    section(
        &mut out,
        "categorization (per class)",
        &rows(&report.per_class_categorization),
        report.macro_categorization,
    );
    let _ = writeln!(out);
    section(
        &mut out,
        "coherence (per class)",
        &rows(&report.per_class_coherence),
        report.macro_coherence,
    );
    let _ = writeln!(out);
    match &report.transitional_unsupported {
        Some(reason) => {
            let _ = writeln!(out, "transitional distance (per relation)");
            let _ = writeln!(out, "  {reason}");
        }
        None => section(
            &mut out,
            "transitional distance (per relation)",
            &rows(&report.per_relation_transitional),
            report.macro_transitional,
        ),
    }
    for warning in &report.warnings {
        let _ = writeln!(out, "warning: {warning}");
    }
    out
}

pub fn stats_table(stats: &KGStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "triples:   {}", stats.triple_count);
    let _ = writeln!(out, "entities:  {}", stats.entity_count);
    let _ = writeln!(out, "relations: {}", stats.relation_count);
    let width = stats
        .per_relation_counts
        .keys()
        .map(String::len)
        .max()
        .unwrap_or(8)
        .max(8);
    for (relation, count) in &stats.per_relation_counts {
        let _ = writeln!(out, "  {relation:<width$}  {count:>8}");
    }
    out
}

pub fn similarity_table(result: &SimilarityResult) -> String {
    let mut out = String::new();
    let width_a = result.pairs.iter().map(|p| p.a.len()).max().unwrap_or(6).max(6);
    let width_b = result.pairs.iter().map(|p| p.b.len()).max().unwrap_or(6).max(6);
    let _ = writeln!(out, "{:<width_a$}  {:<width_b$}  {:>8}", "a", "b", "cosine");
    for pair in &result.pairs {
        let _ = writeln!(
            out,
            "{:<width_a$}  {:<width_b$}  {:>8.4}",
            pair.a, pair.b, pair.cosine
        );
    }
    out
}

pub fn neighbors_table(neighbors: &[(String, f64)]) -> String {
    let mut out = String::new();
    let width = neighbors.iter().map(|(l, _)| l.len()).max().unwrap_or(6).max(6);
    let _ = writeln!(out, "{:<width$}  {:>8}", "entity", "cosine");
    for (label, cosine) in neighbors {
        let _ = writeln!(out, "{label:<width$}  {cosine:>8.4}");
    }
    out
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// `label,x,y,class` with RFC-4180-style quoting; class empty when untyped.
pub fn projection_csv(projection: &Projection2D) -> String {
    let mut out = String::from("label,x,y,class\n");
    for point in &projection.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&point.label),
            point.x,
            point.y,
            csv_field(point.class.as_deref().unwrap_or("")),
        );
    }
    out
}

const SVG_COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Self-contained scatter plot with one color per class.
pub fn projection_svg(projection: &Projection2D) -> String {
    let (width, height, pad) = (800.0, 600.0, 40.0);
    let points = &projection.points;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    if points.is_empty() || !min_x.is_finite() {
        (min_x, max_x, min_y, max_y) = (0.0, 1.0, 0.0, 1.0);
    }
    let span_x = (max_x - min_x).max(1e-12);
    let span_y = (max_y - min_y).max(1e-12);

    let mut classes: Vec<&str> = points
        .iter()
        .filter_map(|p| p.class.as_deref())
        .collect();
    classes.sort_unstable();
    classes.dedup();
    let color_of = |class: Option<&str>| -> &str {
        match class {
            None => "#444444",
            Some(c) => {
                let idx = classes.iter().position(|x| *x == c).unwrap_or(0);
                SVG_COLORS[idx % SVG_COLORS.len()]
            }
        }
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="13" text-anchor="middle">{} projection ({} points)</text>"#,
        width / 2.0,
        projection.method,
        points.len()
    );
    for p in points {
        let cx = pad + (p.x - min_x) / span_x * (width - 2.0 * pad);
        let cy = height - pad - (p.y - min_y) / span_y * (height - 2.0 * pad);
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{}" fill-opacity="0.75"><title>{}</title></circle>"#,
            color_of(p.class.as_deref()),
            xml_escape(&p.label),
        );
    }
    for (i, class) in classes.iter().enumerate() {
        let y = 36.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{y:.1}" r="4" fill="{}"/>"#,
            width - 150.0,
            SVG_COLORS[i % SVG_COLORS.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
            width - 140.0,
            y + 4.0,
            xml_escape(class)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
