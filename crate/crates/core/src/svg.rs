//! Scatter and polyline plots as standalone SVG text.

use std::fmt::Write;

const MARGIN: f64 = 16.0;

pub struct SvgPlot {
    width: f64,
    height: f64,
    lo: [f64; 2],
    hi: [f64; 2],
    body: String,
}

impl SvgPlot {
    /// Canvas mapping the data box `lo..hi` onto `width × height` pixels, y up.
    pub fn new(width: f64, height: f64, lo: [f64; 2], hi: [f64; 2]) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(lo[0], hi[0]);
        let (y0, y1) = pad(lo[1], hi[1]);
        SvgPlot {
            width,
            height,
            lo: [x0, y0],
            hi: [x1, y1],
            body: String::new(),
        }
    }

    /// Canvas fitted to the bounding box of `points`.
    pub fn fitted(width: f64, height: f64, points: &[[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        SvgPlot::new(width, height, lo, hi)
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = (self.width - 2.0 * MARGIN) / (self.hi[0] - self.lo[0]);
        let sy = (self.height - 2.0 * MARGIN) / (self.hi[1] - self.lo[1]);
        (
            MARGIN + (p[0] - self.lo[0]) * sx,
            self.height - MARGIN - (p[1] - self.lo[1]) * sy,
        )
    }

    pub fn scatter(&mut self, points: &[[f64; 2]], radius: f64, color: &str) -> &mut Self {
        let _ = writeln!(self.body, "<g fill=\"{color}\">");
        for &p in points {
            let (x, y) = self.map(p);
            let _ = writeln!(self.body, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{radius:.3}\"/>");
        }
        self.body.push_str("</g>\n");
        self
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], color: &str) -> &mut Self {
        let coords: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
            coords.join(" ")
        );
        self
    }

    pub fn title(&mut self, text: &str) -> &mut Self {
        let escaped = text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(self.body, "<title>{escaped}</title>");
        self
    }

    pub fn finish(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}
