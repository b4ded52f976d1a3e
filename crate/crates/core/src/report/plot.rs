use std::fmt::Write;

use crate::model::{ClusterSet, Grid, PerfFunction};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 40.0;
const CURVE_POINTS: u64 = 64;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];
const UNCLUSTERED: &str = "#bbbbbb";

fn color(cluster: Option<usize>) -> &'static str {
    cluster.map_or(UNCLUSTERED, |c| PALETTE[c % PALETTE.len()])
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
}

/// Size-vs-cost curves, one polyline per function, colored by cluster.
///
/// Output depends only on the arguments. An empty function list yields a
/// placeholder document.
pub fn emit_plot(functions: &[PerfFunction], clusters: &ClusterSet, grid: &Grid) -> String {
    let mut out = String::new();
    header(&mut out);
    if functions.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">no performance functions</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        out.push_str("</svg>\n");
        return out;
    }

    let (lo, hi) = (grid.lo as f64, grid.hi as f64);
    let step = ((hi - lo) / CURVE_POINTS as f64).max(1.0);
    let xs: Vec<f64> = {
        let mut v: Vec<f64> = (0..=CURVE_POINTS).map(|i| lo + i as f64 * step).take_while(|x| *x < hi).collect();
        v.push(hi);
        v
    };
    let curves: Vec<Vec<f64>> = functions.iter().map(|f| xs.iter().map(|x| f.eval(*x).max(0.0)).collect()).collect();
    let ymax = curves.iter().flatten().copied().filter(|y| y.is_finite()).fold(1.0, f64::max);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + if hi > lo { (x - lo) / (hi - lo) * pw } else { pw / 2.0 };
    let sy = |y: f64| TOP + ph - (y.min(ymax) / ymax) * ph;

    let base = TOP + ph;
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT} {TOP} V{base} H{:.2}" fill="none" stroke="black"/>"#,
        LEFT + pw
    );
    let _ = writeln!(out, r#"<text x="{LEFT}" y="{:.2}" text-anchor="middle">{lo}</text>"#, base + 15.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{hi}</text>"#, LEFT + pw, base + 15.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">input size</text>"#, LEFT + pw / 2.0, HEIGHT - 8.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#, LEFT - 5.0, base);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.0}</text>"#, LEFT - 5.0, TOP + 4.0, ymax);
    let _ = writeln!(
        out,
        r#"<text transform="translate(14 {:.2}) rotate(-90)" text-anchor="middle">cost</text>"#,
        TOP + ph / 2.0
    );

    for (f, ys) in functions.iter().zip(&curves) {
        let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-path="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            f.path,
            color(clusters.label(&f.path)),
            pts.join(" ")
        );
    }

    let mut legend: Vec<(Option<usize>, usize)> = Vec::new();
    for f in functions {
        let c = clusters.label(&f.path);
        match legend.iter_mut().find(|(l, _)| *l == c) {
            Some(e) => e.1 += 1,
            None => legend.push((c, 1)),
        }
    }
    legend.sort_by_key(|(c, _)| c.map_or(usize::MAX, |c| c));
    for (i, (c, n)) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let name = c.map_or("unclustered".to_string(), |c| format!("cluster {c}"));
        let _ = writeln!(
            out,
            r#"<g class="legend"><rect x="{x}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}">{name} ({n})</text></g>"#,
            y - 10.0,
            color(*c),
            x + 18.0,
            y
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PathId;
    use crate::model::FunctionKind;

    fn f(path: u64, a: f64, b: f64, kind: FunctionKind) -> PerfFunction {
        PerfFunction { path: PathId(path), kind, a, b, n_min: 1, n_max: 10, residual: 0.0, sample_count: 3 }
    }

    fn labelled(fs: &[PerfFunction], labels: &[usize]) -> ClusterSet {
        let mut c = ClusterSet::empty(Grid::new(1, 10, 1));
        c.k = labels.iter().max().map_or(0, |m| m + 1);
        c.assignment = fs.iter().zip(labels).map(|(f, l)| (f.path, *l)).collect();
        c
    }

    #[test]
    fn two_clusters_two_colors() {
        let fs = [f(1, 1.0, 0.0, FunctionKind::Linear), f(2, 1.0, 2.0, FunctionKind::PowerLaw)];
        let svg = emit_plot(&fs, &labelled(&fs, &[0, 1]), &Grid::new(1, 10, 1));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(PALETTE[0]) && svg.contains(PALETTE[1]));
        assert_eq!(svg.matches(r#"class="legend""#).count(), 2);
        assert_eq!(svg, emit_plot(&fs, &labelled(&fs, &[0, 1]), &Grid::new(1, 10, 1)));
    }

    #[test]
    fn singleton_and_empty() {
        let fs = [f(1, 1.0, 0.0, FunctionKind::Linear)];
        let svg = emit_plot(&fs, &labelled(&fs, &[0]), &Grid::new(1, 10, 1));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 1);
        let empty = emit_plot(&[], &ClusterSet::empty(Grid::new(1, 1, 1)), &Grid::new(1, 1, 1));
        assert!(empty.contains("no performance functions"));
        assert!(!empty.contains("<polyline"));
    }
}
