//! Minimal SVG line plots, small multiples and heatmaps.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn bounds<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

impl LinePlot {
    /// Draws the plot into `out` within the box at `(x0, y0)` of size `w x h`.
    fn render(&self, out: &mut String, x0: f64, y0: f64, w: f64, h: f64) {
        let (ml, mr, mt, mb) = (62.0, 12.0, 26.0, 40.0);
        let (pw, ph) = (w - ml - mr, h - mt - mb);
        let (xlo, xhi) = bounds(self.series.iter().flat_map(|s| s.xs.iter()));
        let (ylo, yhi) = bounds(self.series.iter().flat_map(|s| s.ys.iter()));
        let sx = |x: f64| x0 + ml + (x - xlo) / (xhi - xlo) * pw;
        let sy = |y: f64| y0 + mt + ph - (y - ylo) / (yhi - ylo) * ph;

        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#, x0 + w / 2.0, y0 + 16.0, esc(&self.title));
        let _ = writeln!(out, r##"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##, x0 + ml, y0 + mt);
        for k in 0..=4 {
            let fx = xlo + (xhi - xlo) * k as f64 / 4.0;
            let fy = ylo + (yhi - ylo) * k as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, sx(fx), y0 + mt + ph + 14.0, fmt_tick(fx));
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#, x0 + ml - 4.0, sy(fy) + 3.0, fmt_tick(fy));
            let _ = writeln!(out, r##"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, x0 + ml, x0 + ml + pw, sy(fy), sy(fy));
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, x0 + ml + pw / 2.0, y0 + h - 6.0, esc(&self.x_label));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#, x0 + 12.0, y0 + mt + ph / 2.0, x0 + 12.0, y0 + mt + ph / 2.0, esc(&self.y_label));

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = s
                .xs
                .iter()
                .zip(&s.ys)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, pts.join(" "));
            for p in &pts {
                let (cx, cy) = p.split_once(',').unwrap();
                let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>"#);
            }
            let ly = y0 + mt + 12.0 + 13.0 * k as f64;
            let lx = x0 + ml + pw - 90.0;
            let _ = writeln!(out, r#"<line x1="{lx:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 14.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#, lx + 18.0, ly + 3.0, esc(&s.name));
        }
    }

    pub fn to_svg(&self, width: f64, height: f64) -> String {
        let mut out = svg_open(width, height);
        self.render(&mut out, 0.0, 0.0, width, height);
        out.push_str("</svg>\n");
        out
    }
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Grid of panels, `cols` per row.
pub fn small_multiples(panels: &[LinePlot], cols: usize, panel_w: f64, panel_h: f64) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols);
    let mut out = svg_open(panel_w * cols as f64, panel_h * rows as f64);
    for (k, p) in panels.iter().enumerate() {
        p.render(&mut out, panel_w * (k % cols) as f64, panel_h * (k / cols) as f64, panel_w, panel_h);
    }
    out.push_str("</svg>\n");
    out
}

/// Viridis-like ramp through a few anchor colors.
fn ramp(t: f64) -> String {
    const ANCHORS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (ANCHORS.len() - 1) as f64;
    let i = (t.floor() as usize).min(ANCHORS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (ANCHORS[i], ANCHORS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

#[derive(Debug, Clone)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[ix * ys.len() + iy]`; `None` cells are drawn grey.
    pub values: Vec<Option<f64>>,
}

impl Heatmap {
    pub fn to_svg(&self, width: f64, height: f64) -> String {
        let (ml, mr, mt, mb) = (64.0, 80.0, 28.0, 42.0);
        let (pw, ph) = (width - ml - mr, height - mt - mb);
        let (nx, ny) = (self.xs.len().max(1), self.ys.len().max(1));
        let (cw, ch) = (pw / nx as f64, ph / ny as f64);
        let (lo, hi) = bounds(self.values.iter().flatten());
        let mut out = svg_open(width, height);
        let _ = writeln!(out, r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">{}</text>"#, width / 2.0, esc(&self.title));
        for ix in 0..self.xs.len() {
            for iy in 0..self.ys.len() {
                let fill = match self.values[ix * self.ys.len() + iy] {
                    Some(v) if v.is_finite() => ramp((v - lo) / (hi - lo)),
                    _ => "#cccccc".to_string(),
                };
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    ml + ix as f64 * cw,
                    mt + ph - (iy + 1) as f64 * ch,
                    cw + 0.3,
                    ch + 0.3
                );
            }
        }
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xi = ((nx - 1) as f64 * f).round() as usize;
            let yi = ((ny - 1) as f64 * f).round() as usize;
            if let Some(x) = self.xs.get(xi) {
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#, ml + (xi as f64 + 0.5) * cw, mt + ph + 14.0, fmt_tick(*x));
            }
            if let Some(y) = self.ys.get(yi) {
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#, ml - 4.0, mt + ph - (yi as f64 + 0.5) * ch + 3.0, fmt_tick(*y));
            }
            let cy = mt + ph - f * ph;
            let _ = writeln!(out, r#"<rect x="{:.1}" y="{:.1}" width="14" height="{:.1}" fill="{}"/>"#, width - mr + 14.0, cy - ph / 4.0, if k < 4 { ph / 4.0 } else { 0.0 }, ramp(f + 0.125));
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#, width - mr + 32.0, cy + 3.0, fmt_tick(lo + (hi - lo) * f));
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, ml + pw / 2.0, height - 6.0, esc(&self.x_label));
        let _ = writeln!(out, r#"<text x="14" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#, mt + ph / 2.0, mt + ph / 2.0, esc(&self.y_label));
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let p = LinePlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { name: "s".into(), xs: vec![0.0, 1.0, 2.0], ys: vec![1.0, f64::NAN, 3.0] }],
        };
        let s = p.to_svg(300.0, 200.0);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn heatmap_marks_missing_cells() {
        let h = Heatmap {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            xs: vec![1.0, 2.0],
            ys: vec![0.0, 1.0],
            values: vec![Some(0.5), None, Some(0.9), Some(0.1)],
        };
        let s = h.to_svg(300.0, 200.0);
        assert_eq!(s.matches("#cccccc").count(), 1);
    }
}
