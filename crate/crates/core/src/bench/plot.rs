//! SVG summary plots for benchmark results.

use std::path::Path;

use plotters::prelude::*;

use super::BenchRow;
use crate::error::{Error, Result};

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::format(format!("plot rendering failed: {e}"))
}

/// Groups rows by (method, n, d) preserving first-appearance order.
fn group_rows(rows: &[BenchRow]) -> Vec<(String, Vec<f64>)> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for row in rows {
        if row.status != "ok" || !row.c_r.is_finite() {
            continue;
        }
        let label = format!("{} n={} d={}", row.method, row.n, row.d);
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, values)) => values.push(row.c_r),
            None => groups.push((label, vec![row.c_r])),
        }
    }
    groups
}

/// Interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Box plot of normalized cost per (method, n, d) group.
pub fn plot_normalized_costs(rows: &[BenchRow], path: &Path) -> Result<()> {
    let groups = group_rows(rows);
    if groups.is_empty() {
        return Err(Error::config("no successful rows to plot"));
    }
    // the boxplot element plots on f32 axes
    let all: Vec<f32> = groups.iter().flat_map(|(_, v)| v.iter().map(|&c| c as f32)).collect();
    let lo = all.iter().copied().fold(f32::INFINITY, f32::min);
    let hi = all.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let pad = ((hi - lo) * 0.15).max(0.05);
    let labels: Vec<&str> = groups.iter().map(|(l, _)| l.as_str()).collect();

    let root = SVGBackend::new(path, (240 + 90 * groups.len() as u32, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Normalized cost by method", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(70)
        .y_label_area_size(60)
        .build_cartesian_2d(
            (0..groups.len() as i32 - 1).into_segmented(),
            (lo - pad)..(hi + pad),
        )
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(groups.len())
        .x_label_formatter(&|seg: &SegmentValue<i32>| match seg {
            SegmentValue::CenterOf(i) => {
                labels.get(*i as usize).map(|s| s.to_string()).unwrap_or_default()
            }
            _ => String::new(),
        })
        .y_desc("C_r")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(groups.iter().enumerate().map(|(i, (_, values))| {
            Boxplot::new_vertical(SegmentValue::CenterOf(i as i32), &Quartiles::new(values))
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Scatter of (wall time, normalized cost) per run, with one interquartile
/// box per method across both axes.
pub fn plot_cost_vs_time(rows: &[BenchRow], path: &Path) -> Result<()> {
    let ok: Vec<&BenchRow> =
        rows.iter().filter(|r| r.status == "ok" && r.c_r.is_finite()).collect();
    if ok.is_empty() {
        return Err(Error::config("no successful rows to plot"));
    }
    let mut methods: Vec<&'static str> = Vec::new();
    for row in &ok {
        if !methods.contains(&row.method) {
            methods.push(row.method);
        }
    }

    let (mut t_hi, mut c_lo, mut c_hi) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for row in &ok {
        t_hi = t_hi.max(row.elapsed_s);
        c_lo = c_lo.min(row.c_r);
        c_hi = c_hi.max(row.c_r);
    }
    let c_pad = ((c_hi - c_lo) * 0.15).max(0.05);

    let root = SVGBackend::new(path, (900, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Cost against wall time", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(50)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..t_hi * 1.1, (c_lo - c_pad)..(c_hi + c_pad))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("wall time [s]")
        .y_desc("C_r")
        .draw()
        .map_err(plot_err)?;

    for (mi, method) in methods.iter().enumerate() {
        let color = Palette99::pick(mi).mix(0.9);
        let points: Vec<(f64, f64)> =
            ok.iter().filter(|r| r.method == *method).map(|r| (r.elapsed_s, r.c_r)).collect();
        chart
            .draw_series(points.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(plot_err)?
            .label(*method)
            .legend(move |(x, y)| Circle::new((x + 10, y), 4, color.filled()));

        // interquartile box with a median cross
        let mut ts: Vec<f64> = points.iter().map(|p| p.0).collect();
        let mut cs: Vec<f64> = points.iter().map(|p| p.1).collect();
        ts.sort_by(f64::total_cmp);
        cs.sort_by(f64::total_cmp);
        let (t1, tm, t3) = (quantile(&ts, 0.25), quantile(&ts, 0.5), quantile(&ts, 0.75));
        let (c1, cm, c3) = (quantile(&cs, 0.25), quantile(&cs, 0.5), quantile(&cs, 0.75));
        let stroke = Palette99::pick(mi).stroke_width(2);
        chart
            .draw_series([
                Rectangle::new([(t1, c1), (t3, c3)], stroke),
                Rectangle::new([(t1, cm), (t3, cm)], stroke),
                Rectangle::new([(tm, c1), (tm, c3)], stroke),
            ])
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<BenchRow> {
        let mut rows = Vec::new();
        for (mi, method) in ["wiris-ea", "baseline", "aa"].iter().enumerate() {
            for repeat in 0..4 {
                rows.push(BenchRow {
                    method,
                    n: 10,
                    d: 1.0,
                    instance_seed: 1,
                    repeat,
                    cost: 20.0 + repeat as f64,
                    c_r: 0.8 + 0.1 * mi as f64 + 0.02 * repeat as f64,
                    status: "ok",
                    elapsed_s: 0.5 + 0.3 * mi as f64 + 0.05 * repeat as f64,
                });
            }
        }
        rows.push(BenchRow {
            method: "wism-ea",
            n: 10,
            d: 1.0,
            instance_seed: 1,
            repeat: 0,
            cost: f64::NAN,
            c_r: f64::NAN,
            status: "error",
            elapsed_s: 0.1,
        });
        rows
    }

    fn assert_valid_svg(path: &Path) {
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains("<svg"), "missing svg root");
        assert!(text.trim_end().ends_with("</svg>"), "unterminated svg");
    }

    #[test]
    fn plots_render_valid_svg_and_skip_failed_rows() {
        let dir = std::env::temp_dir().join("wism-plot-test");
        std::fs::create_dir_all(&dir).unwrap();
        let rows = sample_rows();

        let boxes = dir.join("boxes.svg");
        plot_normalized_costs(&rows, &boxes).unwrap();
        assert_valid_svg(&boxes);

        let scatter = dir.join("scatter.svg");
        plot_cost_vs_time(&rows, &scatter).unwrap();
        assert_valid_svg(&scatter);

        let empty: Vec<BenchRow> = Vec::new();
        assert!(plot_normalized_costs(&empty, &dir.join("none.svg")).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let values = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&values, 0.0), 1.0);
        assert_eq!(quantile(&values, 1.0), 4.0);
        assert_eq!(quantile(&values, 0.5), 2.5);
    }
}
