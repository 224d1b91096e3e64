//! Region and curve plots over the strategy square `[0, 1]²`, with `ζ₁` on
//! the horizontal axis and `ζ₂` on the vertical one.

use std::fmt::Write;

use crate::bargaining::GameSpec;
use crate::error::Result;
use crate::game::{best_response_insurer, best_response_reinsurer, BestResponse, EquilibriumReport, Interval, Lattice};
use crate::riskmeasure::RiskAversion;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 50.0;
const CURVE_SAMPLES: usize = 400;

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let full = SIZE + 2.0 * MARGIN;
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<title>{title}</title>"#);
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{full}" height="{full}" fill="white"/>"#);
        Canvas { body }
    }

    fn x(v: f64) -> f64 {
        MARGIN + v * SIZE
    }

    fn y(v: f64) -> f64 {
        MARGIN + (1.0 - v) * SIZE
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            Self::x(x0),
            Self::y(y1),
            (x1 - x0) * SIZE,
            (y1 - y0) * SIZE
        );
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"{dash}/>"#,
            Self::x(a.0),
            Self::y(a.1),
            Self::x(b.0),
            Self::y(b.1)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (k, (px, py)) in points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, Self::x(*px), Self::y(*py));
        }
        let _ = writeln!(self.body, r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="2"/>"#);
    }

    fn text(&mut self, px: f64, py: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{px:.2}" y="{py:.2}" text-anchor="{anchor}">{s}</text>"#);
    }

    fn vertical_mark(&mut self, at: f64, label: &str) {
        self.line((at, 0.0), (at, 1.0), "#555", 1.0, true);
        self.text(Self::x(at), MARGIN - 6.0, "middle", label);
    }

    fn horizontal_mark(&mut self, at: f64, label: &str) {
        self.line((0.0, at), (1.0, at), "#555", 1.0, true);
        self.text(MARGIN + SIZE + 6.0, Self::y(at) + 4.0, "start", label);
    }

    fn finish(mut self, xlabel: &str, ylabel: &str) -> String {
        let _ = writeln!(
            self.body,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let v = k as f64 / 4.0;
            let label = format!("{v}");
            let (px, py) = (Self::x(v), Self::y(v));
            let bottom = MARGIN + SIZE;
            let _ = writeln!(
                self.body,
                r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
                bottom + 5.0
            );
            self.text(px, bottom + 18.0, "middle", &label);
            let _ = writeln!(
                self.body,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="black"/>"#,
                MARGIN - 5.0
            );
            self.text(MARGIN - 8.0, py + 4.0, "end", &label);
        }
        self.text(MARGIN + SIZE / 2.0, MARGIN + SIZE + 38.0, "middle", xlabel);
        let _ = writeln!(
            self.body,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{ylabel}</text>"#,
            MARGIN + SIZE / 2.0,
            MARGIN + SIZE / 2.0
        );
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn marks(canvas: &mut Canvas, report: &EquilibriumReport, spec: &GameSpec) {
    let (g1, g2) = (spec.gamma1.value(), spec.gamma2.value());
    canvas.vertical_mark(g2, "γ₂");
    canvas.vertical_mark(g1, "γ₁");
    canvas.horizontal_mark(g2, "γ₂");
    canvas.horizontal_mark(g1, "γ₁");
    if let Some(v) = report.gamma_bar_1.and_then(|g| g.value()) {
        canvas.vertical_mark(v, "Γ₁");
    }
    if let Some(v) = report.gamma_bar_2.and_then(|g| g.value()) {
        canvas.horizontal_mark(v, "Γ₂");
    }
}

fn span(i: &Interval) -> (f64, f64) {
    (i.lo.clamp(0.0, 1.0), i.hi.clamp(0.0, 1.0))
}

/// Shaded equilibrium set: the trivial rectangles and the diagonal segment.
pub fn nash_regions(spec: &GameSpec, report: &EquilibriumReport) -> String {
    let mut c = Canvas::new("Nash equilibria");
    for a in &report.trivial_region.insurer {
        for b in &report.trivial_region.reinsurer {
            let ((x0, x1), (y0, y1)) = (span(a), span(b));
            c.rect(x0, x1, y0, y1, "#b8cfe8");
        }
    }
    if let Some(d) = report.diagonal_segment {
        c.line((d.lo, d.lo), (d.hi, d.hi), "#c0392b", 4.0, false);
    }
    if !report.every_pair {
        marks(&mut c, report, spec);
    }
    c.finish("ζ₁ (insurer)", "ζ₂ (reinsurer)")
}

/// Both best-response correspondences. Set-valued parts are shaded bands.
pub fn best_responses(spec: &GameSpec, report: &EquilibriumReport) -> Result<String> {
    let mut c = Canvas::new("Best responses");
    let step = 1.0 / CURVE_SAMPLES as f64;
    let mut br2_curve: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    let mut br1_curve: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    // Runs of samples where the response is Everything, as (first, last).
    let mut br2_bands: Vec<(f64, f64)> = Vec::new();
    let mut br1_bands: Vec<(f64, f64)> = Vec::new();
    let extend = |bands: &mut Vec<(f64, f64)>, t: f64| match bands.last_mut() {
        Some(last) if (t - last.1 - step).abs() < step / 2.0 => last.1 = t,
        _ => bands.push((t, t)),
    };
    for k in 0..=CURVE_SAMPLES {
        let t = k as f64 * step;
        let z = RiskAversion::new(t)?;
        match best_response_reinsurer(spec, z)? {
            BestResponse::Everything => {
                extend(&mut br2_bands, t);
                br2_curve.push(Vec::new());
            }
            BestResponse::Point(v) => br2_curve.last_mut().expect("nonempty").push((t, v.value())),
        }
        match best_response_insurer(spec, z)? {
            BestResponse::Everything => {
                extend(&mut br1_bands, t);
                br1_curve.push(Vec::new());
            }
            BestResponse::Point(v) => br1_curve.last_mut().expect("nonempty").push((v.value(), t)),
        }
    }
    let widen = |(a, b): (f64, f64)| ((a - step / 2.0).max(0.0), (b + step / 2.0).min(1.0));
    for band in br2_bands {
        let (a, b) = widen(band);
        c.rect(a, b, 0.0, 1.0, "#f5cba7");
    }
    for band in br1_bands {
        let (a, b) = widen(band);
        c.rect(0.0, 1.0, a, b, "#aed6f1");
    }
    for piece in &br2_curve {
        c.polyline(piece, "#d35400");
    }
    for piece in &br1_curve {
        c.polyline(piece, "#1f618d");
    }
    if !report.every_pair {
        marks(&mut c, report, spec);
    }
    Ok(c.finish("ζ₁ (insurer)", "ζ₂ (reinsurer)"))
}

/// Lattice cells where full cover is traded and both agents accept.
pub fn welfare_regions(spec: &GameSpec, report: &EquilibriumReport, lattice: &Lattice) -> String {
    let mut c = Canvas::new("Accepted contracts");
    let n = lattice.len();
    let h = 1.0 / (n - 1) as f64;
    for i in 0..n {
        let x = lattice.zetas[i];
        let mut run_start: Option<f64> = None;
        for j in 0..=n {
            let inside = j < n && lattice.welfare(spec, i, j).accepted();
            match (inside, run_start) {
                (true, None) => run_start = Some(lattice.zetas[j]),
                (false, Some(y0)) => {
                    let y1 = lattice.zetas[j - 1];
                    c.rect(
                        (x - h / 2.0).max(0.0),
                        (x + h / 2.0).min(1.0),
                        (y0 - h / 2.0).max(0.0),
                        (y1 + h / 2.0).min(1.0),
                        "#a9dfbf",
                    );
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    if !report.every_pair {
        marks(&mut c, report, spec);
    }
    c.finish("ζ₁ (insurer)", "ζ₂ (reinsurer)")
}
