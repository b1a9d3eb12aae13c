//! Minimal standalone SVG charts: lines, shaded bands and point markers,
//! each series in one `<path>` with a stable id.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const MARKER: f64 = 3.5;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Cross,
}

#[derive(Debug, Clone)]
pub struct Chart {
    x_range: (f64, f64),
    y_range: (f64, f64),
    title: String,
    body: Vec<String>,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        let c = if lo.is_finite() { lo } else { 0.0 };
        return (c - 1.0, c + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn bounds<'a>(values: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        })
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Restricts an id suffix to characters valid in XML names.
pub fn id_suffix(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl Chart {
    /// A chart whose axes cover every value in `xs` and `ys`.
    pub fn covering<'a>(
        title: &str,
        xs: impl IntoIterator<Item = &'a f64>,
        ys: impl IntoIterator<Item = &'a f64>,
    ) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self {
            x_range: padded(x0, x1),
            y_range: padded(y0, y1),
            title: title.to_owned(),
            body: Vec::new(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
    }

    fn polyline(&self, xs: &[f64], ys: &[f64]) -> String {
        let mut d = String::new();
        for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2},{:.2} ", self.sx(*x), self.sy(*y));
        }
        d.trim_end().to_owned()
    }

    pub fn line(&mut self, id: &str, xs: &[f64], ys: &[f64], colour: &str) {
        let d = self.polyline(xs, ys);
        self.body.push(format!(
            r#"<path id="{id}" d="{d}" fill="none" stroke="{colour}" stroke-width="2"/>"#
        ));
    }

    /// The region between `lo` and `hi` over `xs`.
    pub fn band(&mut self, id: &str, xs: &[f64], lo: &[f64], hi: &[f64], colour: &str) {
        let mut d = self.polyline(xs, hi);
        for (x, y) in xs.iter().zip(lo).rev() {
            let _ = write!(d, " L{:.2},{:.2}", self.sx(*x), self.sy(*y));
        }
        d.push_str(" Z");
        self.body.push(format!(
            r#"<path id="{id}" d="{d}" fill="{colour}" fill-opacity="0.3" stroke="none"/>"#
        ));
    }

    pub fn points(&mut self, id: &str, xs: &[f64], ys: &[f64], colour: &str, marker: Marker) {
        let r = MARKER;
        let mut d = String::new();
        for (x, y) in xs.iter().zip(ys) {
            let (px, py) = (self.sx(*x), self.sy(*y));
            match marker {
                Marker::Circle => {
                    let _ = write!(
                        d,
                        "M{:.2},{py:.2} a{r},{r} 0 1,0 {},0 a{r},{r} 0 1,0 -{},0 ",
                        px - r,
                        2.0 * r,
                        2.0 * r
                    );
                }
                Marker::Cross => {
                    let _ = write!(
                        d,
                        "M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2} ",
                        px - r,
                        py - r,
                        px + r,
                        py + r,
                        px - r,
                        py + r,
                        px + r,
                        py - r
                    );
                }
            }
        }
        let fill = if marker == Marker::Circle {
            "none"
        } else {
            colour
        };
        self.body.push(format!(
            r#"<path id="{id}" d="{}" fill="{fill}" stroke="{colour}" stroke-width="1.5"/>"#,
            d.trim_end()
        ));
    }

    fn axes(&self) -> String {
        let mut s = String::new();
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = write!(
            s,
            r##"<path id="axes" d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="#333"/>"##
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let px = self.sx(xv);
            let py = self.sy(yv);
            let _ = write!(
                s,
                r#"<text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{xv:.2}</text>"#,
                y0 + 16.0
            );
            let _ = write!(
                s,
                r#"<text x="{:.2}" y="{py:.2}" font-size="11" text-anchor="end">{yv:.2}</text>"#,
                x0 - 6.0
            );
        }
        s
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(s, "{}", self.axes());
        for el in &self.body {
            let _ = writeln!(s, "{el}");
        }
        s.push_str("</svg>\n");
        s
    }
}
