//! Native SVG rendering of scans, spectral flows, response curves and scaling fits.
//!
//! Output depends only on the input numbers: coordinates are printed with a
//! fixed precision and no timestamps or random identifiers are emitted.

use std::fmt::Write;

const PANEL_W: f64 = 560.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("empty or degenerate series")]
    Degenerate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Draw markers instead of a polyline.
    pub scatter: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            x,
            y,
            scatter: false,
        }
    }

    pub fn points(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            scatter: true,
            ..Self::line(label, x, y)
        }
    }

    fn check(&self) -> Result<(), PlotError> {
        let finite = self.x.iter().chain(&self.y).all(|v| v.is_finite());
        if self.x.len() < 2 || self.x.len() != self.y.len() || !finite {
            return Err(PlotError::Degenerate);
        }
        Ok(())
    }
}

/// Figure layout and annotations.
#[derive(Clone, Debug, PartialEq)]
pub enum PlotKind {
    /// One stacked panel per series over a shared γ axis, one dashed marker at the kink.
    Scan { kink: Option<f64> },
    /// Eigenvalues in the complex plane, one scatter series per γ.
    Flow,
    /// Response curves with a dashed marker at each kink.
    Curve { kinks: Vec<f64> },
    /// `(L, γ_YL^L)` in the single series; extrapolation in `1/L` and the log-log fit.
    Scaling(ScalingAnnotation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingAnnotation {
    pub gamma_inf: f64,
    /// Polynomial in `1/L`, constant term first.
    pub poly: Vec<f64>,
    pub alpha: f64,
    pub intercept: f64,
}

#[derive(Clone, Copy)]
struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of<'a>(values: impl Iterator<Item = &'a f64>) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            let pad = 0.5 * lo.abs().max(1.0);
            return Some(Self { lo: lo - pad, hi: hi + pad });
        }
        let pad = 0.05 * (hi - lo);
        Some(Self { lo: lo - pad, hi: hi + pad })
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }
}

/// Evenly spaced 1-2-5 ticks inside the range, with the decimals needed to print them.
fn ticks(r: Range) -> (Vec<f64>, usize) {
    let raw = (r.hi - r.lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

struct Panel<'a> {
    rect: Rect,
    xr: Range,
    yr: Range,
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
}

impl Panel<'_> {
    fn px(&self, x: f64) -> f64 {
        self.xr.map(x, self.rect.x, self.rect.x + self.rect.w)
    }

    fn py(&self, y: f64) -> f64 {
        self.yr.map(y, self.rect.y + self.rect.h, self.rect.y)
    }
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn frame(&mut self, p: &Panel) {
        let r = p.rect;
        let b = &mut self.body;
        let _ = writeln!(
            b,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
            r.x, r.y, r.w, r.h
        );
        let (xt, xd) = ticks(p.xr);
        for t in xt {
            let x = p.px(t);
            let _ = writeln!(
                b,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{t:.xd$}</text>"##,
                r.y + r.h,
                r.y + r.h + 5.0,
                r.y + r.h + 18.0
            );
        }
        let (yt, yd) = ticks(p.yr);
        for t in yt {
            let y = p.py(t);
            let _ = writeln!(
                b,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{t:.yd$}</text>"##,
                r.x - 5.0,
                r.x,
                r.x - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            b,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            r.x + r.w / 2.0,
            r.y + r.h + 38.0,
            escape(p.x_label)
        );
        let (lx, ly) = (r.x - 52.0, r.y + r.h / 2.0);
        let _ = writeln!(
            b,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
            escape(p.y_label)
        );
        let _ = writeln!(
            b,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            r.x + r.w / 2.0,
            r.y - 12.0,
            escape(p.title)
        );
    }

    fn series(&mut self, p: &Panel, s: &Series, color: &str) {
        let b = &mut self.body;
        if s.scatter {
            let _ = writeln!(b, r#"<g fill="{color}">"#);
            for (x, y) in s.x.iter().zip(&s.y) {
                let _ = writeln!(b, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, p.px(*x), p.py(*y));
            }
            let _ = writeln!(b, "</g>");
        } else {
            let pts: Vec<String> = s
                .x
                .iter()
                .zip(&s.y)
                .map(|(x, y)| format!("{:.2},{:.2}", p.px(*x), p.py(*y)))
                .collect();
            let _ = writeln!(
                b,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
    }

    fn legend(&mut self, p: &Panel, series: &[Series]) {
        for (i, s) in series.iter().enumerate() {
            if s.label.is_empty() {
                continue;
            }
            let x = p.rect.x + p.rect.w - 150.0;
            let y = p.rect.y + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{y:.2}" font-size="11">{}</text>"#,
                y - 9.0,
                PALETTE[i % PALETTE.len()],
                x + 14.0,
                escape(&s.label)
            );
        }
    }

    fn dashed_vline(&mut self, x: f64, y0: f64, y1: f64) {
        let _ = writeln!(
            self.body,
            r##"<line class="kink" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#555" stroke-dasharray="6 4"/>"##
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn rect_at(col: usize, row: usize) -> Rect {
    let cell_w = MARGIN_L + PANEL_W + MARGIN_R;
    let cell_h = MARGIN_T + PANEL_H + MARGIN_B;
    Rect {
        x: col as f64 * cell_w + MARGIN_L,
        y: row as f64 * cell_h + MARGIN_T,
        w: PANEL_W,
        h: PANEL_H,
    }
}

fn canvas(cols: usize, rows: usize) -> Canvas {
    Canvas::new(
        cols as f64 * (MARGIN_L + PANEL_W + MARGIN_R),
        rows as f64 * (MARGIN_T + PANEL_H + MARGIN_B),
    )
}

fn xy_range(series: &[Series]) -> Result<(Range, Range), PlotError> {
    let xr = Range::of(series.iter().flat_map(|s| &s.x)).ok_or(PlotError::Degenerate)?;
    let yr = Range::of(series.iter().flat_map(|s| &s.y)).ok_or(PlotError::Degenerate)?;
    Ok((xr, yr))
}

fn check_all(series: &[Series]) -> Result<(), PlotError> {
    if series.is_empty() {
        return Err(PlotError::Degenerate);
    }
    series.iter().try_for_each(Series::check)
}

pub fn render_svg(series: &[Series], kind: &PlotKind) -> Result<String, PlotError> {
    check_all(series)?;
    match kind {
        PlotKind::Scan { kink } => Ok(render_scan(series, *kink)),
        PlotKind::Flow => {
            let mut c = canvas(1, 1);
            draw_overlay(&mut c, rect_at(0, 0), series, "Spectral flow", "Re E", "Im E", &[])?;
            Ok(c.finish())
        }
        PlotKind::Curve { kinks } => {
            let mut c = canvas(1, 1);
            draw_overlay(&mut c, rect_at(0, 0), series, "Dynamical response", "γ", "M_x(T)", kinks)?;
            Ok(c.finish())
        }
        PlotKind::Scaling(fit) => {
            let mut c = canvas(2, 1);
            draw_scaling(&mut c, 0, &series[0], fit)?;
            Ok(c.finish())
        }
    }
}

/// Response curves beside both scaling panels.
pub fn render_three_panel(
    curves: &[Series],
    kinks: &[f64],
    points: &Series,
    fit: &ScalingAnnotation,
) -> Result<String, PlotError> {
    check_all(curves)?;
    points.check()?;
    let mut c = canvas(3, 1);
    draw_overlay(&mut c, rect_at(0, 0), curves, "Dynamical response", "γ", "M_x(T)", kinks)?;
    draw_scaling(&mut c, 1, points, fit)?;
    Ok(c.finish())
}

fn render_scan(series: &[Series], kink: Option<f64>) -> String {
    let mut c = canvas(1, series.len());
    let xr = Range::of(series.iter().flat_map(|s| &s.x)).expect("checked series");
    let mut top = f64::INFINITY;
    let mut bottom = f64::NEG_INFINITY;
    let mut kink_x = None;
    for (row, s) in series.iter().enumerate() {
        let rect = rect_at(0, row);
        let yr = Range::of(s.y.iter()).expect("checked series");
        let p = Panel {
            rect,
            xr,
            yr,
            title: if row == 0 { "Ground-state scan" } else { "" },
            x_label: "γ",
            y_label: &s.label,
        };
        c.frame(&p);
        c.series(&p, s, PALETTE[row % PALETTE.len()]);
        top = top.min(rect.y);
        bottom = bottom.max(rect.y + rect.h);
        if let Some(k) = kink {
            kink_x = Some(p.px(k));
        }
    }
    if let Some(x) = kink_x {
        c.dashed_vline(x, top, bottom);
    }
    c.finish()
}

fn draw_overlay(
    c: &mut Canvas,
    rect: Rect,
    series: &[Series],
    title: &str,
    x_label: &str,
    y_label: &str,
    markers: &[f64],
) -> Result<(), PlotError> {
    let (xr, yr) = xy_range(series)?;
    let p = Panel {
        rect,
        xr,
        yr,
        title,
        x_label,
        y_label,
    };
    c.frame(&p);
    for (i, s) in series.iter().enumerate() {
        c.series(&p, s, PALETTE[i % PALETTE.len()]);
    }
    for &m in markers {
        if m.is_finite() {
            c.dashed_vline(p.px(m), rect.y, rect.y + rect.h);
        }
    }
    c.legend(&p, series);
    Ok(())
}

fn draw_scaling(c: &mut Canvas, col: usize, points: &Series, fit: &ScalingAnnotation) -> Result<(), PlotError> {
    let inv: Vec<f64> = points.x.iter().map(|l| 1.0 / l).collect();
    let x_max = inv.iter().copied().fold(0.0, f64::max);
    let samples = 60;
    let xs: Vec<f64> = (0..=samples).map(|k| x_max * k as f64 / samples as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| fit.poly.iter().rev().fold(0.0, |acc, c| acc * x + c))
        .collect();
    let extrap = [
        Series::points("γ_YL(L)", inv, points.y.clone()),
        Series::line("polynomial fit", xs, ys),
        Series::points("γ_∞", vec![0.0, 0.0], vec![fit.gamma_inf, fit.gamma_inf]),
    ];
    let left = format!("1/L extrapolation: γ_∞ = {:.4}", fit.gamma_inf);
    draw_overlay(c, rect_at(col, 0), &extrap, &left, "1/L", "γ_YL", &[])?;

    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (l, g) in points.x.iter().zip(&points.y) {
        let d = g - fit.gamma_inf;
        if d > 0.0 {
            lx.push(l.ln());
            ly.push(d.ln());
        }
    }
    if lx.len() < 2 {
        return Err(PlotError::Degenerate);
    }
    let xr = Range::of(lx.iter()).ok_or(PlotError::Degenerate)?;
    let line_x = vec![xr.lo, xr.hi];
    let line_y = line_x.iter().map(|x| fit.intercept - fit.alpha * x).collect();
    let loglog = [
        Series::points("data", lx, ly),
        Series::line(format!("slope −{:.3}", fit.alpha), line_x, line_y),
    ];
    let right = format!("log-log fit: α = {:.3}", fit.alpha);
    draw_overlay(c, rect_at(col + 1, 0), &loglog, &right, "ln L", "ln(γ_YL − γ_∞)", &[])
}
