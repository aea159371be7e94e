//! SVG line charts rendered from study CSV text alone.

use std::collections::BTreeSet;
use std::fmt::Write;

use anyhow::{anyhow, Context, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(csv_text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let header = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("CSV has no column `{name}`"))?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>()
                    .with_context(|| format!("column `{name}`: `{}`", r[i]))
            })
            .collect()
    }

    /// Row indices grouped by (degree, epsilon) in order of first appearance.
    fn groups(&self) -> Result<Vec<(String, Vec<usize>)>> {
        let deg = self.column("degree")?;
        let eps = self.column("epsilon")?;
        let mut keys: Vec<(u64, u64)> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.rows.len() {
            let key = (deg[i].to_bits(), eps[i].to_bits());
            match keys.iter().position(|k| *k == key) {
                Some(j) => members[j].push(i),
                None => {
                    keys.push(key);
                    members.push(vec![i]);
                }
            }
        }
        Ok(keys
            .into_iter()
            .zip(members)
            .map(|((d, e), m)| (format!("P{} ε={}", f64::from_bits(d), f64::from_bits(e)), m))
            .collect())
    }
}

struct Series {
    label: String,
    color: &'static str,
    dash: &'static str,
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
enum Scale {
    Log,
    Linear(f64, f64),
}

fn bounds(series: &[Series], pick: impl Fn(&(f64, f64)) -> f64) -> Option<(f64, f64)> {
    let vals: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(&pick))
        .collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
}

fn decade_range(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.log10().floor();
    let b = hi.log10().ceil();
    if a == b {
        (a, b + 1.0)
    } else {
        (a, b)
    }
}

fn render(title: &str, x_label: &str, y_label: &str, y_scale: Scale, series: &[Series]) -> String {
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let (x0, x1) = bounds(series, |p| p.0).map_or((0.0, 1.0), |(l, h)| decade_range(l, h));
    let (y0, y1) = match y_scale {
        Scale::Log => bounds(series, |p| p.1).map_or((0.0, 1.0), |(l, h)| decade_range(l, h)),
        Scale::Linear(l, h) => (l, h),
    };
    let ty = |v: f64| match y_scale {
        Scale::Log => v.log10(),
        Scale::Linear(..) => v,
    };
    let sx = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (ty(y) - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        LEFT + pw / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );

    for k in x0 as i32..=x1 as i32 {
        let x = LEFT + (k as f64 - x0) / (x1 - x0) * pw;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#,
            TOP + ph + 18.0
        );
    }
    let y_ticks: Vec<(f64, String)> = match y_scale {
        Scale::Log => (y0 as i32..=y1 as i32)
            .map(|k| (k as f64, format!("1e{k}")))
            .collect(),
        Scale::Linear(l, h) => (0..=5)
            .map(|i| {
                let v = l + (h - l) * i as f64 / 5.0;
                (v, format!("{v:.1}"))
            })
            .collect(),
    };
    for (v, text) in y_ticks {
        let y = TOP + ph - (v - y0) / (y1 - y0) * ph;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{y_label}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6" stroke-dasharray="{}"/>"#,
                pts.join(" "),
                ser.color,
                ser.dash
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="1.6" stroke-dasharray="{}"/>"#,
            lx + 26.0,
            ser.color,
            ser.dash
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn collect(rows: &[usize], x: &[f64], y: &[f64], keep: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|&&i| x[i] > 0.0 && keep(y[i]))
        .map(|&i| (x[i], y[i]))
        .collect()
}

/// Log-log plot of `E_circ` and the `E_ind` bounds against degrees of freedom.
pub fn convergence_svg(csv_text: &str) -> Result<String> {
    let table = Table::parse(csv_text)?;
    let dofs = table.column("dofs")?;
    let e = table.column("E_circ")?;
    let lo = table.column("eind_lower")?;
    let hi = table.column("eind_upper")?;
    let degree = table.column("degree")?;
    let positive = |v: f64| v > 0.0 && v.is_finite();

    let mut series = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, (label, rows)) in table.groups()?.into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d = degree[rows[0]] as u64;
        if seen.insert(d) {
            series.push(Series {
                label: format!("E∘ P{d}"),
                color: "black",
                dash: if d == 1 { "none" } else { "2,3" },
                points: collect(&rows, &dofs, &e, positive),
            });
        }
        series.push(Series {
            label: format!("lower {label}"),
            color,
            dash: "6,3",
            points: collect(&rows, &dofs, &lo, positive),
        });
        series.push(Series {
            label: format!("upper {label}"),
            color,
            dash: "1,3",
            points: collect(&rows, &dofs, &hi, positive),
        });
    }
    Ok(render(
        "Error components",
        "degrees of freedom",
        "error",
        Scale::Log,
        &series,
    ))
}

/// Ratio bounds on a linear axis in [0, 1].
pub fn ratios_svg(csv_text: &str) -> Result<String> {
    let table = Table::parse(csv_text)?;
    let dofs = table.column("dofs")?;
    let cols = [
        ("rho_approx_lo", "ρ∘ lo", "6,3"),
        ("rho_approx_hi", "ρ∘ hi", "none"),
        ("rho_indet_lo", "ρind lo", "1,3"),
        ("rho_indet_hi", "ρind hi", "4,2,1,2"),
    ];
    let values: Vec<Vec<f64>> = cols
        .iter()
        .map(|(c, ..)| table.column(c))
        .collect::<Result<_>>()?;
    let mut series = Vec::new();
    for (i, (label, rows)) in table.groups()?.into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for ((_, name, dash), y) in cols.iter().zip(&values) {
            series.push(Series {
                label: format!("{name} {label}"),
                color,
                dash,
                points: collect(&rows, &dofs, y, f64::is_finite),
            });
        }
    }
    Ok(render(
        "Error ratios",
        "degrees of freedom",
        "ratio",
        Scale::Linear(0.0, 1.0),
        &series,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "dofs,h,E_circ,D_F,D_G,eind_lower,eind_exact,eind_upper,eworst_lower,eworst_upper,rho_approx_lo,rho_approx_hi,rho_indet_lo,rho_indet_hi,epsilon,degree,converged\n\
        9,1.25e-1,1e-2,1e-3,9e-3,1e-4,1.1e-4,1.2e-4,1.01e-2,1.012e-2,9.9e-1,9.9e-1,1e-2,1e-2,1e-2,1,true\n\
        17,6.25e-2,2.5e-3,2e-4,2.3e-3,1e-4,1.1e-4,1.2e-4,2.6e-3,2.62e-3,9.5e-1,9.6e-1,4e-2,4e-2,1e-2,1,true\n\
        33,3.125e-2,6e-4,NaN,5e-4,0e0,0e0,0e0,6e-4,6e-4,NaN,NaN,NaN,NaN,1e-2,1,true\n";

    #[test]
    fn plots_are_deterministic_svg() {
        let a = convergence_svg(CSV).unwrap();
        assert_eq!(a, convergence_svg(CSV).unwrap());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 3);
        let r = ratios_svg(CSV).unwrap();
        assert_eq!(r.matches("<polyline").count(), 4);
    }

    #[test]
    fn missing_column_is_an_error() {
        assert!(convergence_svg("dofs,h\n1,2\n").is_err());
    }
}
