//! Minimal hand-written SVG charts for `eval --plots`: a reconstruction
//! loss histogram, a loss-versus-window-index scatter, and the ROC
//! curve. Coordinates are formatted with fixed precision so reruns emit
//! identical bytes.

use std::fmt::Write as _;

use tsad_core::eval::RocCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 54.0;

const NORMAL_COLOR: &str = "#4878a8";
const FLAGGED_COLOR: &str = "#c4452d";

struct Canvas {
    svg: String,
}

impl Canvas {
    fn new(title: &str) -> Canvas {
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
             <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"15\">{title}</text>\n",
            WIDTH / 2.0
        );
        Canvas { svg }
    }

    /// Plot-area frame plus corner tick labels for both axes.
    fn axes(&mut self, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = write!(
            self.svg,
            "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" \
             stroke=\"black\" stroke-width=\"1\"/>\n",
            x1 - x0,
            y0 - y1
        );
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, label: String| {
            let _ = write!(
                s,
                "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" \
                 font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n"
            );
        };
        text(&mut self.svg, x0, y0 + 16.0, "middle", fmt_tick(x_range.0));
        text(&mut self.svg, x1, y0 + 16.0, "middle", fmt_tick(x_range.1));
        text(&mut self.svg, x0 - 6.0, y0 + 4.0, "end", fmt_tick(y_range.0));
        text(&mut self.svg, x0 - 6.0, y1 + 4.0, "end", fmt_tick(y_range.1));
        text(
            &mut self.svg,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            "middle",
            x_label.to_string(),
        );
        let _ = write!(
            self.svg,
            "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>\n",
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        format!("{v:.4}")
    } else {
        format!("{v:.2e}")
    }
}

/// Maps a data point into plot-area pixels.
fn scale(v: f64, range: (f64, f64), px: (f64, f64)) -> f64 {
    let span = range.1 - range.0;
    let t = if span == 0.0 { 0.5 } else { (v - range.0) / span };
    px.0 + t * (px.1 - px.0)
}

/// Histogram of window losses, flagged and unflagged windows stacked in
/// separate colors.
pub fn loss_histogram_svg(losses: &[f64], flags: &[u8]) -> String {
    const BINS: usize = 40;
    let lo = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut normal = [0usize; BINS];
    let mut flagged = [0usize; BINS];
    for (&l, &f) in losses.iter().zip(flags) {
        let bin = (((l - lo) / span) * BINS as f64).min(BINS as f64 - 1.0) as usize;
        if f == 1 {
            flagged[bin] += 1;
        } else {
            normal[bin] += 1;
        }
    }
    let peak = (0..BINS).map(|b| normal[b] + flagged[b]).max().unwrap_or(1) as f64;

    let mut canvas = Canvas::new("Reconstruction loss distribution");
    canvas.axes("loss", "windows", (lo, hi), (0.0, peak));
    let (px0, px1) = (MARGIN, WIDTH - MARGIN);
    let (py0, py1) = (HEIGHT - MARGIN, MARGIN);
    let bar_w = (px1 - px0) / BINS as f64;
    for b in 0..BINS {
        let x = px0 + b as f64 * bar_w;
        let mut base = py0;
        for (count, color) in [(normal[b], NORMAL_COLOR), (flagged[b], FLAGGED_COLOR)] {
            if count == 0 {
                continue;
            }
            let h = (count as f64 / peak) * (py0 - py1);
            let _ = write!(
                canvas.svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{color}\" stroke=\"none\"/>\n",
                x,
                base - h,
                bar_w.max(1.0) - 0.5,
                h
            );
            base -= h;
        }
    }
    canvas.finish()
}

/// Loss against window end index, one dot per window, flagged windows
/// in a contrasting color.
pub fn loss_scatter_svg(window_end_indices: &[usize], losses: &[f64], flags: &[u8]) -> String {
    let xs: Vec<f64> = window_end_indices.iter().map(|&i| i as f64).collect();
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_hi = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut canvas = Canvas::new("Reconstruction loss by window");
    canvas.axes("window end index", "loss", (x_lo, x_hi), (0.0, y_hi));
    let px = (MARGIN, WIDTH - MARGIN);
    let py = (HEIGHT - MARGIN, MARGIN);
    for ((&x, &l), &f) in xs.iter().zip(losses).zip(flags) {
        let color = if f == 1 { FLAGGED_COLOR } else { NORMAL_COLOR };
        let _ = write!(
            canvas.svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
            scale(x, (x_lo, x_hi), px),
            scale(l, (0.0, y_hi), py),
        );
    }
    canvas.finish()
}

/// ROC curve with the chance diagonal for reference.
pub fn roc_svg(curve: &RocCurve) -> String {
    let mut canvas = Canvas::new(&format!("ROC curve (AUC = {:.4})", curve.auc));
    canvas.axes("false positive rate", "true positive rate", (0.0, 1.0), (0.0, 1.0));
    let px = (MARGIN, WIDTH - MARGIN);
    let py = (HEIGHT - MARGIN, MARGIN);
    let _ = write!(
        canvas.svg,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999999\" \
         stroke-dasharray=\"4 4\"/>\n",
        px.0, py.0, px.1, py.1
    );
    let points: String = curve
        .points
        .iter()
        .map(|&(fpr, tpr)| {
            format!(
                "{:.2},{:.2}",
                scale(fpr, (0.0, 1.0), px),
                scale(tpr, (0.0, 1.0), py)
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    let _ = write!(
        canvas.svg,
        "<polyline points=\"{points}\" fill=\"none\" stroke=\"{FLAGGED_COLOR}\" \
         stroke-width=\"1.5\"/>\n"
    );
    canvas.finish()
}
