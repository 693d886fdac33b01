//! Minimal SVG charts: heatmap, line plot, scatter panels.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 90.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

/// Sequential colormap, `t` in `[0, 1]`.
pub fn colormap(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    // dark blue → teal → yellow
    let stops = [(0.0, [68.0, 1.0, 84.0]), (0.5, [33.0, 145.0, 140.0]), (1.0, [253.0, 231.0, 37.0])];
    let (a, b) = if t <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + u * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn full() -> Self {
        Frame {
            x0: MARGIN_L,
            y0: MARGIN_T,
            w: W - MARGIN_L - MARGIN_R,
            h: H - MARGIN_T - MARGIN_B,
        }
    }
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        num(w / 2.0),
        esc(title)
    );
}

fn axes(out: &mut String, f: &Frame, labels: (&str, &str), xticks: &[(f64, String)], yticks: &[(f64, String)]) {
    let (xlabel, ylabel) = labels;
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(f.x0), num(f.y0), num(f.w), num(f.h)
    );
    let bottom = f.y0 + f.h;
    for (pos, label) in xticks {
        let x = f.x0 + pos * f.w;
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
            num(x), num(bottom), num(bottom + 5.0), num(bottom + 18.0), esc(label)
        );
    }
    for (pos, label) in yticks {
        let y = bottom - pos * f.h;
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"#,
            num(f.x0 - 5.0), num(f.x0), num(y), num(f.x0 - 8.0), num(y + 4.0), esc(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(f.x0 + f.w / 2.0),
        num(bottom + 40.0),
        esc(xlabel)
    );
    let (lx, ly) = (num((f.x0 - 52.0).max(14.0)), num(f.y0 + f.h / 2.0));
    let _ = writeln!(
        out,
        r#"<text x="{lx}" y="{ly}" text-anchor="middle" transform="rotate(-90 {lx} {ly})">{}</text>"#,
        esc(ylabel)
    );
}

fn ticks(lo: f64, hi: f64, n: usize, log: bool) -> Vec<(f64, String)> {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1).max(1) as f64;
            let v = if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            };
            (t, format!("{v:.3}"))
        })
        .collect()
}

fn colorbar(out: &mut String, f: &Frame, lo: f64, hi: f64) {
    let x = f.x0 + f.w + 20.0;
    let steps = 32;
    let dh = f.h / steps as f64;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64;
        let y = f.y0 + f.h - (i + 1) as f64 * dh;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="16" height="{}" fill="{}"/>"#,
            num(x), num(y), num(dh + 0.5), colormap(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}">{:.3e}</text>"#, num(x), num(f.y0 - 4.0), hi);
    let _ = writeln!(out, r#"<text x="{}" y="{}">{:.3e}</text>"#, num(x), num(f.y0 + f.h + 14.0), lo);
}

/// `values[row][col]`, row 0 at the bottom. `None` cells are drawn grey.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub log_axes: bool,
    pub values: &'a [Vec<Option<f64>>],
}

pub fn heatmap(h: &Heatmap) -> String {
    let mut out = String::new();
    header(&mut out, W, H, h.title);
    let f = Frame::full();
    let rows = h.values.len().max(1);
    let cols = h.values.first().map_or(1, |r| r.len().max(1));
    let finite = h.values.iter().flatten().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (cw, ch) = (f.w / cols as f64, f.h / rows as f64);
    for (r, row) in h.values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let fill = match v {
                Some(v) if v.is_finite() => colormap((v - lo) / span),
                _ => "#cccccc".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(f.x0 + c as f64 * cw),
                num(f.y0 + f.h - (r + 1) as f64 * ch),
                num(cw + 0.3),
                num(ch + 0.3),
                fill
            );
        }
    }
    axes(
        &mut out,
        &f,
        (h.xlabel, h.ylabel),
        &ticks(h.x_range.0, h.x_range.1, 4, h.log_axes),
        &ticks(h.y_range.0, h.y_range.1, 4, h.log_axes),
    );
    colorbar(&mut out, &f, lo, hi);
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub name: String,
    pub points: &'a [(f64, f64)],
}

/// Line plot; with `log_y` non-positive values are clipped to `y_floor`.
pub struct LinePlot<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub log_y: bool,
    pub y_floor: f64,
    pub series: &'a [Series<'a>],
}

pub fn line_plot(p: &LinePlot) -> String {
    let mut out = String::new();
    header(&mut out, W, H, p.title);
    let f = Frame::full();
    let ty = |y: f64| if p.log_y { y.max(p.y_floor).log10() } else { y };
    let pts = p.series.iter().flat_map(|s| s.points.iter());
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(ty(y));
        yhi = yhi.max(ty(y));
    }
    if !xlo.is_finite() {
        (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
    }
    if xhi <= xlo {
        xhi = xlo + 1.0;
    }
    if yhi <= ylo {
        yhi = ylo + 1.0;
    }
    let sx = |x: f64| f.x0 + (x - xlo) / (xhi - xlo) * f.w;
    let sy = |y: f64| f.y0 + f.h - (ty(y) - ylo) / (yhi - ylo) * f.h;
    let n = p.series.len().max(1);
    for (i, s) in p.series.iter().enumerate() {
        let color = colormap(i as f64 / (n - 1).max(1) as f64 * 0.9);
        let d: Vec<String> = s.points.iter().map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y)))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            d.join(" ")
        );
        let ly = f.y0 + 12.0 + 16.0 * i as f64;
        let lx = f.x0 + f.w + 8.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x1}" y1="{y}" x2="{x2}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}">{name}</text>"#,
            x1 = num(lx),
            y = num(ly),
            x2 = num(lx + 16.0),
            tx = num(lx + 20.0),
            ty = num(ly + 4.0),
            name = esc(&s.name)
        );
    }
    let yt: Vec<(f64, String)> = (0..4)
        .map(|i| {
            let t = i as f64 / 3.0;
            let v = ylo + t * (yhi - ylo);
            (t, if p.log_y { format!("1e{v:.1}") } else { format!("{v:.3}") })
        })
        .collect();
    axes(&mut out, &f, (p.xlabel, p.ylabel), &ticks(xlo, xhi, 5, false), &yt);
    out.push_str("</svg>\n");
    out
}

/// One panel of a scatter figure: points colored by `color_by`.
pub struct ScatterPanel<'a> {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color_by: &'a [f64],
}

/// Panels laid out side by side in one SVG.
pub fn scatter_panels(title: &str, panels: &[ScatterPanel]) -> String {
    let pw = 360.0;
    let ph = 360.0;
    let total_w = pw * panels.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, total_w, ph + 40.0, title);
    for (k, p) in panels.iter().enumerate() {
        let f = Frame {
            x0: k as f64 * pw + 55.0,
            y0: 60.0,
            w: pw - 75.0,
            h: ph - 80.0,
        };
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() || hi <= lo { (lo.min(0.0), lo.max(0.0) + 1.0) } else { (lo, hi) }
        };
        let (xlo, xhi) = range(p.x);
        let (ylo, yhi) = range(p.y);
        let (clo, chi) = range(p.color_by);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="48" text-anchor="middle">{}</text>"#,
            num(f.x0 + f.w / 2.0),
            esc(&p.title)
        );
        for i in 0..p.x.len().min(p.y.len()).min(p.color_by.len()) {
            let cx = f.x0 + (p.x[i] - xlo) / (xhi - xlo) * f.w;
            let cy = f.y0 + f.h - (p.y[i] - ylo) / (yhi - ylo) * f.h;
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="2.5" fill="{}"/>"#,
                num(cx),
                num(cy),
                colormap((p.color_by[i] - clo) / (chi - clo))
            );
        }
        axes(
            &mut out,
            &f,
            (&p.xlabel, &p.ylabel),
            &ticks(xlo, xhi, 3, false),
            &ticks(ylo, yhi, 3, false),
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), "#440154");
        assert_eq!(colormap(1.0), "#fde725");
        assert_eq!(colormap(f64::NAN), "#440154");
    }

    #[test]
    fn heatmap_draws_one_rect_per_cell() {
        let values = vec![vec![Some(0.0), Some(1.0), None], vec![Some(2.0), Some(3.0), Some(4.0)]];
        let svg = heatmap(&Heatmap {
            title: "t",
            xlabel: "x",
            ylabel: "y",
            x_range: (1e-3, 1.0),
            y_range: (1e-3, 1.0),
            log_axes: true,
            values: &values,
        });
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("#cccccc").count(), 1);
        // 6 cells + frame + background + 32 colorbar steps
        assert_eq!(svg.matches("<rect").count(), 6 + 2 + 32);
    }

    #[test]
    fn line_plot_has_polyline_per_series() {
        let a = [(1.0, 1.0), (2.0, 0.1)];
        let b = [(1.0, 1.0), (2.0, 0.0)];
        let series = [
            Series { name: "N=1".into(), points: &a },
            Series { name: "N=2".into(), points: &b },
        ];
        let svg = line_plot(&LinePlot {
            title: "decay",
            xlabel: "m",
            ylabel: "energy",
            log_y: true,
            y_floor: 1e-20,
            series: &series,
        });
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn scatter_escapes_text() {
        let x = [0.0, 1.0];
        let svg = scatter_panels(
            "a<b",
            &[ScatterPanel {
                title: "f1 & axis".into(),
                xlabel: "x".into(),
                ylabel: "y".into(),
                x: &x,
                y: &x,
                color_by: &x,
            }],
        );
        assert!(svg.contains("a&lt;b") && svg.contains("f1 &amp; axis"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
