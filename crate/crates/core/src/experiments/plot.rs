use std::fmt::Write;

use super::config::Metric;
use super::sweep::SweepResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of the per-method means on a log-scaled y axis.
pub fn render_svg(res: &SweepResult) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let xs = &res.axis_values;
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let positive: Vec<f64> = res
        .summary
        .iter()
        .map(|r| r.mean)
        .filter(|m| m.is_finite() && *m > 0.0)
        .collect();
    let (mut d_lo, mut d_hi) = positive.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
        (lo.min(m.log10().floor()), hi.max(m.log10().ceil()))
    });
    if !d_lo.is_finite() {
        d_lo = -1.0;
        d_hi = 0.0;
    }
    if d_hi <= d_lo {
        d_hi = d_lo + 1.0;
    }
    let px = |x: f64| LEFT + (x - x_lo) / x_span * plot_w;
    let py = |y: f64| TOP + (d_hi - y.log10()) / (d_hi - d_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );

    let mut decade = d_lo as i32;
    while decade as f64 <= d_hi {
        let y = py(10f64.powi(decade));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
        decade += 1;
    }
    for &x in xs {
        let x_pos = px(x);
        let _ = writeln!(
            s,
            r##"<line x1="{x_pos:.2}" y1="{:.2}" x2="{x_pos:.2}" y2="{:.2}" stroke="#333"/><text x="{x_pos:.2}" y="{:.2}" text-anchor="middle">{x}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&res.axis_label)
    );
    let y_label = match res.metric {
        Metric::Error => "mean estimation error",
        Metric::NormalizedError => "mean normalized estimation error",
    };
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{y_label}</text>"#,
        TOP + plot_h / 2.0
    );

    for (i, &method) in res.methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = res
            .summary_for(method)
            .iter()
            .filter(|r| r.mean.is_finite() && r.mean > 0.0)
            .map(|r| format!("{:.2},{:.2}", px(r.axis), py(r.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 20.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{method}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
