//! Turn saved attributions into per-query explanation figures: a signed
//! horizontal bar chart (SVG) and the same data as TSV.

use std::fs;
use std::path::PathBuf;

use rankshap::{AttributionVector, Error, Result};

use crate::common::{
    attribution_path, expect_schema, file_stem_for, index_path, read_json, AttributionRecord,
    RunIndex,
};

pub struct ReportArgs {
    pub attributions: PathBuf,
    pub out: PathBuf,
    /// Override the explanation size stored with each attribution.
    pub top_t: Option<usize>,
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let index: RunIndex = read_json(&index_path(&args.attributions)).map_err(|_| {
        Error::InvalidConfig(format!(
            "{}: no readable index.json — not an attribution directory",
            args.attributions.display()
        ))
    })?;
    expect_schema(&index.schema, &index_path(&args.attributions))?;
    fs::create_dir_all(&args.out)?;

    let mut written = 0usize;
    for entry in index.entries.iter().filter(|e| e.status == "done") {
        let record: AttributionRecord =
            read_json(&attribution_path(&args.attributions, &entry.query_id))?;
        let bars = top_bars(&record, args.top_t)?;
        let stem = file_stem_for(&record.query_id);
        fs::write(args.out.join(format!("{stem}.tsv")), render_tsv(&bars))?;
        fs::write(
            args.out.join(format!("{stem}.svg")),
            render_svg(&record.query_id, &record.method, &bars),
        )?;
        written += 1;
    }
    if written == 0 {
        return Err(Error::InvalidConfig(format!(
            "{}: no attributions to chart",
            args.attributions.display()
        )));
    }
    println!("charted {written} queries -> {}", args.out.display());
    Ok(())
}

/// The chart data: up to top_t (token, phi) pairs by |phi|, zeros dropped.
fn top_bars(record: &AttributionRecord, top_t: Option<usize>) -> Result<Vec<(String, f64)>> {
    let attribution = AttributionVector::new(
        record.phi.clone(),
        record.intercept,
        record.method.clone(),
        record.value_fn.clone(),
    )?;
    if record.tokens.len() != record.phi.len() {
        return Err(Error::AttributionSize {
            expected: record.tokens.len(),
            got: record.phi.len(),
        });
    }
    let t = top_t.unwrap_or(record.top_t);
    Ok(attribution
        .ranked_by_magnitude()
        .into_iter()
        .take(t)
        .filter(|&i| record.phi[i] != 0.0)
        .map(|i| (record.tokens[i].clone(), record.phi[i]))
        .collect())
}

/// One row per bar, same pairs and order as the SVG.
fn render_tsv(bars: &[(String, f64)]) -> String {
    let mut out = String::from("token\tphi\n");
    for (token, phi) in bars {
        out.push_str(&format!("{token}\t{phi}\n"));
    }
    out
}

const LABEL_W: f64 = 180.0;
const AXIS_W: f64 = 460.0;
const BAR_H: f64 = 22.0;
const GAP: f64 = 6.0;
const HEADER: f64 = 34.0;

fn render_svg(query_id: &str, method: &str, bars: &[(String, f64)]) -> String {
    let rows = bars.len().max(1);
    let width = LABEL_W + AXIS_W + 16.0;
    let height = HEADER + rows as f64 * (BAR_H + GAP) + 12.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"8\" y=\"20\" font-weight=\"bold\">query {} — {}</text>\n",
        escape(query_id),
        escape(method)
    ));

    if bars.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"8\" y=\"{:.1}\" fill=\"#666\">no nonzero attributions</text>\n",
            HEADER + 16.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let max_abs = bars
        .iter()
        .map(|(_, p)| p.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let x0 = LABEL_W + AXIS_W / 2.0;
    svg.push_str(&format!(
        "  <line x1=\"{x0:.1}\" y1=\"{:.1}\" x2=\"{x0:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>\n",
        HEADER - 4.0,
        height - 8.0
    ));

    for (row, (token, phi)) in bars.iter().enumerate() {
        let y = HEADER + row as f64 * (BAR_H + GAP);
        let len = phi.abs() / max_abs * (AXIS_W / 2.0 - 8.0);
        // gains point right in green, losses point left in red
        let (x, fill) = if *phi >= 0.0 {
            (x0, "#2d7a3a")
        } else {
            (x0 - len, "#b03a3a")
        };
        svg.push_str(&format!(
            "  <text x=\"8\" y=\"{:.1}\">{}</text>\n",
            y + BAR_H - 6.0,
            escape(token)
        ));
        svg.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{len:.1}\" height=\"{BAR_H:.1}\" \
             fill=\"{fill}\"><title>{}: {phi}</title></rect>\n",
            escape(token)
        ));
        let (vx, anchor) = if *phi >= 0.0 {
            (x0 + len + 4.0, "start")
        } else {
            (x0 - len - 4.0, "end")
        };
        svg.push_str(&format!(
            "  <text x=\"{vx:.1}\" y=\"{:.1}\" text-anchor=\"{anchor}\" fill=\"#444\">{phi:.4}</text>\n",
            y + BAR_H - 6.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
