use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{aggregate, AggregateStats, Document};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    QualityVsNfe,
    RuntimeVsAxis,
    Convergence,
    Diversity,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::QualityVsNfe,
        PlotKind::RuntimeVsAxis,
        PlotKind::Convergence,
        PlotKind::Diversity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::QualityVsNfe => "quality_vs_nfe",
            PlotKind::RuntimeVsAxis => "runtime_vs_axis",
            PlotKind::Convergence => "convergence",
            PlotKind::Diversity => "diversity",
        }
    }

    fn labels(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::QualityVsNfe => ("evaluations", "quality"),
            PlotKind::RuntimeVsAxis => ("axis value", "runtime (s)"),
            PlotKind::Convergence => ("generation", "quality"),
            PlotKind::Diversity => ("generation", "diversity"),
        }
    }

    /// Which axes are log-scaled when every value on them is positive.
    fn log_axes(self) -> (bool, bool) {
        match self {
            PlotKind::QualityVsNfe | PlotKind::RuntimeVsAxis => (true, true),
            PlotKind::Convergence => (false, true),
            PlotKind::Diversity => (false, false),
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.replace('-', "_"))
            .ok_or_else(|| Error::UnknownId {
                kind: "plot kind",
                id: s.to_string(),
            })
    }
}

/// A labelled line: mean values with an optional standard-deviation band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub std: Vec<f64>,
}

fn history_series(label: String, a: &AggregateStats, kind: PlotKind) -> PlotSeries {
    let mut s = PlotSeries {
        label,
        x: vec![],
        y: vec![],
        std: vec![],
    };
    for p in &a.series {
        let (x, y) = match kind {
            PlotKind::QualityVsNfe => (p.nfe.mean, p.quality),
            PlotKind::Convergence => (p.gen as f64, p.quality),
            PlotKind::Diversity => match p.diversity {
                Some(d) => (p.gen as f64, d),
                None => continue,
            },
            PlotKind::RuntimeVsAxis => unreachable!("runtime plots come from sweeps"),
        };
        s.x.push(x);
        s.y.push(y.mean);
        s.std.push(y.std);
    }
    s
}

/// Extracts the lines a plot of `kind` draws from a results document.
pub fn plot_series(doc: &Document, kind: PlotKind) -> Result<Vec<PlotSeries>> {
    match doc {
        Document::Experiment(e) => {
            if kind == PlotKind::RuntimeVsAxis {
                return Err(Error::Config("runtime_vs_axis needs a sweep results file".into()));
            }
            if e.runs.is_empty() {
                return Ok(vec![]);
            }
            let a = e.aggregate.clone().unwrap_or_else(|| aggregate(&e.runs));
            Ok(vec![history_series(e.spec.algorithm.as_str().to_string(), &a, kind)])
        }
        Document::Sweep(s) => {
            let label = s.spec.base.algorithm.as_str().to_string();
            match kind {
                PlotKind::RuntimeVsAxis => {
                    let mut out = vec![PlotSeries {
                        label: format!("{label} runtime"),
                        x: vec![],
                        y: vec![],
                        std: vec![],
                    }];
                    for r in &s.rows {
                        out[0].x.push(r.value as f64);
                        out[0].y.push(r.timing.elapsed_s.mean);
                        out[0].std.push(r.timing.elapsed_s.std);
                    }
                    Ok(out)
                }
                PlotKind::QualityVsNfe => Ok(s
                    .rows
                    .iter()
                    .map(|r| {
                        let a = r.throughput.as_ref().unwrap_or(&r.timing);
                        PlotSeries {
                            label: format!("{label} {}", r.value),
                            x: vec![a.nfe.mean],
                            y: vec![a.quality.mean],
                            std: vec![a.quality.std],
                        }
                    })
                    .collect()),
                _ => Ok(s
                    .rows
                    .iter()
                    .map(|r| history_series(format!("{label} {}", r.value), &r.timing, kind))
                    .collect()),
            }
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: &[f64], want_log: bool) -> (Self, Option<(f64, f64)>) {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let log = want_log && !finite.is_empty() && finite.iter().all(|&v| v > 0.0);
        let data = finite
            .iter()
            .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
                None => Some((v, v)),
                Some((a, b)) => Some((a.min(v), b.max(v))),
            });
        let (mut lo, mut hi) = match data {
            Some((a, b)) if log => (a.log10(), b.log10()),
            Some(r) => r,
            None => (0.0, 1.0),
        };
        if hi - lo <= 0.0 {
            let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1.0) };
            lo -= pad;
            hi += pad;
        }
        (Self { lo, hi, log }, data)
    }

    fn unit(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            if b >= a && b - a <= 12 {
                return (a..=b).map(|k| 10f64.powi(k)).collect();
            }
            return vec![10f64.powf(self.lo), 10f64.powf(self.hi)];
        }
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a static line chart. Output bytes depend only on the input.
///
/// The root element carries the data bounding box as `data-bbox="xmin xmax ymin ymax"`
/// (absent when there is no data) and each marker carries its data coordinates.
pub fn render_svg(series: &[PlotSeries], kind: PlotKind) -> String {
    let (xl, yl) = kind.log_axes();
    let xs: Vec<f64> = series.iter().flat_map(|s| s.x.iter().copied()).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.y.iter().copied()).collect();
    let (xa, xb) = Axis::new(&xs, xl);
    let (ya, yb) = Axis::new(&ys, yl);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + xa.unit(v) * pw;
    let py = |v: f64| TOP + (1.0 - ya.unit(v)) * ph;

    let mut o = String::new();
    let bbox = match (xb, yb) {
        (Some((x0, x1)), Some((y0, y1))) => format!(" data-bbox=\"{x0} {x1} {y0} {y1}\""),
        _ => String::new(),
    };
    let _ = writeln!(
        o,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" data-kind=\"{}\" data-log-x=\"{}\" data-log-y=\"{}\"{bbox}>",
        kind.as_str(),
        xa.log,
        ya.log
    );
    let _ = writeln!(o, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        o,
        "<g class=\"axes\" stroke=\"black\" fill=\"none\"><path d=\"M{LEFT:.2} {TOP:.2} V{:.2} H{:.2}\"/></g>",
        TOP + ph,
        LEFT + pw
    );
    let _ = writeln!(o, "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">");
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            o,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            o,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT:.2}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let (xlabel, ylabel) = kind.labels();
    let _ = writeln!(
        o,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}{}</text>",
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        xlabel,
        if xa.log { " (log)" } else { "" }
    );
    let _ = writeln!(
        o,
        "<text transform=\"translate(16 {:.2}) rotate(-90)\" text-anchor=\"middle\">{}{}</text>",
        TOP + ph / 2.0,
        ylabel,
        if ya.log { " (log)" } else { "" }
    );
    let _ = writeln!(o, "</g>");

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64, f64)> = s
            .x
            .iter()
            .zip(&s.y)
            .zip(s.std.iter().chain(std::iter::repeat(&0.0)))
            .filter(|((x, y), _)| x.is_finite() && y.is_finite())
            .map(|((&x, &y), &d)| (x, y, d))
            .collect();
        let _ = writeln!(o, "<g class=\"series\" data-label=\"{}\">", escape(&s.label));
        if pts.len() > 1 && pts.iter().any(|p| p.2 > 0.0) {
            let mut d = String::new();
            for (k, &(x, y, sd)) in pts.iter().enumerate() {
                let hi = y + sd;
                let _ = write!(d, "{}{:.2} {:.2} ", if k == 0 { "M" } else { "L" }, px(x), py(hi).clamp(TOP, TOP + ph));
            }
            for &(x, y, sd) in pts.iter().rev() {
                let lo = y - sd;
                let yy = if ya.log && lo <= 0.0 { TOP + ph } else { py(lo).clamp(TOP, TOP + ph) };
                let _ = write!(d, "L{:.2} {:.2} ", px(x), yy);
            }
            let _ = writeln!(o, "<path class=\"band\" d=\"{}Z\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>", d);
        }
        if pts.len() > 1 {
            let line: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                o,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                line.join(" ")
            );
        }
        for &(x, y, _) in &pts {
            let _ = writeln!(
                o,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\" data-x=\"{x}\" data-y=\"{y}\"/>",
                px(x),
                py(y)
            );
        }
        let ly = TOP + 16.0 * i as f64 + 8.0;
        let _ = writeln!(
            o,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            LEFT + pw + 12.0,
            ly - 8.0,
            LEFT + pw + 26.0,
            ly + 1.0,
            escape(&s.label)
        );
        let _ = writeln!(o, "</g>");
    }
    o.push_str("</svg>\n");
    o
}

/// Writes the chart for `kind` to `path`.
pub fn emit_plot(doc: &Document, kind: PlotKind, path: &Path) -> Result<()> {
    let svg = render_svg(&plot_series(doc, kind)?, kind);
    std::fs::write(path, svg)?;
    Ok(())
}

/// Writes the plotted values as `label,x,y,std` rows.
pub fn write_series_csv(series: &[PlotSeries], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["label", "x", "y", "std"])?;
    for s in series {
        for ((x, y), d) in s.x.iter().zip(&s.y).zip(&s.std) {
            w.write_record([s.label.clone(), x.to_string(), y.to_string(), d.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn attr(tag: &str, name: &str) -> Option<String> {
        let key = format!(" {name}=\"");
        let start = tag.find(&key)? + key.len();
        let end = tag[start..].find('"')? + start;
        Some(tag[start..end].to_string())
    }

    fn root(svg: &str) -> &str {
        let start = svg.find("<svg").unwrap();
        &svg[start..start + svg[start..].find('>').unwrap()]
    }

    fn series(x: Vec<f64>, y: Vec<f64>) -> PlotSeries {
        let n = x.len();
        PlotSeries {
            label: "s".into(),
            x,
            y,
            std: vec![0.1; n],
        }
    }

    #[test]
    fn empty_input_draws_axes_only() {
        let svg = render_svg(&[], PlotKind::Convergence);
        assert!(svg.contains("class=\"axes\""));
        assert!(!svg.contains("<circle") && !svg.contains("<polyline"));
        assert!(attr(root(&svg), "data-bbox").is_none());
    }

    #[test]
    fn output_is_deterministic() {
        let s = vec![series(vec![1.0, 10.0, 100.0], vec![3.0, 2.0, 0.5])];
        for kind in PlotKind::ALL {
            assert_eq!(render_svg(&s, kind), render_svg(&s, kind));
        }
    }

    #[test]
    fn log_scale_only_when_positive() {
        let pos = render_svg(&[series(vec![1.0, 100.0], vec![1.0, 0.01])], PlotKind::QualityVsNfe);
        assert_eq!(attr(root(&pos), "data-log-y").unwrap(), "true");
        let neg = render_svg(&[series(vec![1.0, 100.0], vec![-1.0, 0.01])], PlotKind::QualityVsNfe);
        assert_eq!(attr(root(&neg), "data-log-y").unwrap(), "false");
        assert_eq!(attr(root(&neg), "data-log-x").unwrap(), "true");
    }

    #[test]
    fn kinds_parse() {
        for k in PlotKind::ALL {
            assert_eq!(k.as_str().parse::<PlotKind>().unwrap(), k);
        }
        assert!("pie".parse::<PlotKind>().is_err());
    }

    proptest! {
        #[test]
        fn bounding_box_parses_back(
            pts in proptest::collection::vec((1e-3f64..1e6, 1e-3f64..1e3), 1..40),
            split in 0usize..40,
            kind in 0usize..4,
        ) {
            let kind = PlotKind::ALL[kind];
            let k = split.min(pts.len());
            let (a, b) = pts.split_at(k);
            let ss: Vec<PlotSeries> = [a, b]
                .iter()
                .filter(|p| !p.is_empty())
                .map(|p| series(p.iter().map(|q| q.0).collect(), p.iter().map(|q| q.1).collect()))
                .collect();
            let svg = render_svg(&ss, kind);
            let bbox: Vec<f64> = attr(root(&svg), "data-bbox").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
            let min = |f: fn(&(f64, f64)) -> f64| pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let max = |f: fn(&(f64, f64)) -> f64| pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(bbox, vec![min(|p| p.0), max(|p| p.0), min(|p| p.1), max(|p| p.1)]);

            let circles: Vec<&str> = svg.lines().filter(|l| l.starts_with("<circle")).collect();
            prop_assert_eq!(circles.len(), pts.len());
            let mut cx = (f64::INFINITY, f64::NEG_INFINITY);
            let mut cy = (f64::INFINITY, f64::NEG_INFINITY);
            let mut dx = (f64::INFINITY, f64::NEG_INFINITY);
            for c in &circles {
                let x: f64 = attr(c, "cx").unwrap().parse().unwrap();
                let y: f64 = attr(c, "cy").unwrap().parse().unwrap();
                let d: f64 = attr(c, "data-x").unwrap().parse().unwrap();
                cx = (cx.0.min(x), cx.1.max(x));
                cy = (cy.0.min(y), cy.1.max(y));
                dx = (dx.0.min(d), dx.1.max(d));
                prop_assert!((LEFT - 0.01..=WIDTH - RIGHT + 0.01).contains(&x));
                prop_assert!((TOP - 0.01..=HEIGHT - BOTTOM + 0.01).contains(&y));
            }
            prop_assert_eq!(dx, (min(|p| p.0), max(|p| p.0)));
            // Extremes of the data land on the edges of the plot area unless the range is degenerate.
            if min(|p| p.0) < max(|p| p.0) {
                prop_assert!((cx.0 - LEFT).abs() < 0.01 && (cx.1 - (WIDTH - RIGHT)).abs() < 0.01);
            }
            if min(|p| p.1) < max(|p| p.1) {
                prop_assert!((cy.0 - TOP).abs() < 0.01 && (cy.1 - (HEIGHT - BOTTOM)).abs() < 0.01);
            }
        }
    }
}
