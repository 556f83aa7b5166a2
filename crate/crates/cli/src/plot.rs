//! Three-panel scatter data for the input sequences natural, alt and a configured rational one.

use std::fmt::Write as _;

use anyhow::Result;

use badic_qmc::engine::{generate_block, point_to_float, write_points_csv, DigitalPoint};
use badic_qmc::inputseq::parse_sequence_spec;

use crate::config::{RunConfig, Setup};

const PANEL: f64 = 300.0;
const GAP: f64 = 20.0;
const TOP: f64 = 30.0;

/// One output file: name inside the output directory and its bytes.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// `natural.csv`, `alt.csv`, `rational.csv` and `plot.svg`, identical for any thread count.
pub fn artifacts(config: &RunConfig, setup: &Setup) -> Result<Vec<Artifact>> {
    let q = setup.set.field().order();
    let panels = [
        ("natural", parse_sequence_spec("natural", q)?),
        ("alt", parse_sequence_spec("alt", q)?),
        ("rational", setup.seq.clone()),
    ];
    let mut files = Vec::new();
    let mut svg_panels = Vec::new();
    for (name, seq) in &panels {
        let points = generate_block(&setup.set, &setup.bij, seq, config.start, config.n, config.m)?;
        let mut csv = Vec::new();
        write_points_csv(&mut csv, &points, config.start, config.mode.into())?;
        files.push(Artifact { name: format!("{name}.csv"), bytes: csv });
        svg_panels.push((seq.spec().to_string(), points));
    }
    let title = format!(
        "GF({}) {} matrices, s = {}, N = {}, m = {}",
        q,
        setup.set.convention().unwrap_or(&config.matrix),
        config.s,
        config.n,
        config.m
    );
    files.push(Artifact { name: "plot.svg".into(), bytes: svg(&title, &svg_panels).into_bytes() });
    Ok(files)
}

/// Circle centres are the float values of the exact coordinates, mapped by a panel transform.
fn svg(title: &str, panels: &[(String, Vec<DigitalPoint>)]) -> String {
    let width = GAP + panels.len() as f64 * (PANEL + GAP);
    let height = TOP + PANEL + 2.0 * GAP;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<text x="{GAP}" y="16">{}</text>"#, escape(title)).unwrap();
    for (k, (label, points)) in panels.iter().enumerate() {
        let x0 = GAP + k as f64 * (PANEL + GAP);
        let y0 = TOP + GAP;
        writeln!(s, r#"<g class="panel" data-seq="{}">"#, escape(label)).unwrap();
        writeln!(s, r#"<text x="{x0}" y="{}">{}</text>"#, y0 - 4.0, escape(label)).unwrap();
        writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#)
            .unwrap();
        writeln!(s, r#"<g transform="translate({x0} {}) scale({PANEL} -{PANEL})" fill="black">"#, y0 + PANEL).unwrap();
        for p in points {
            writeln!(s, r#"<circle cx="{}" cy="{}" r="0.005"/>"#, point_to_float(p, 1), point_to_float(p, 2)).unwrap();
        }
        s.push_str("</g>\n</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
