//! Standalone SVG line and filled-contour plots of CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{PlotJob, PlotKind};
use crate::error::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const LEVELS: usize = 12;

/// Numeric columns of a CSV file. Columns whose first value is not a number
/// (such as a status column) are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<&[f64], CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| CliError::config(format!("no numeric column named {name:?} (have {:?})", self.headers)))
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text).map_err(|message| CliError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_table(text: &str) -> Result<Table, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err("empty CSV: no header".to_owned());
    }
    let mut numeric: Option<Vec<bool>> = None;
    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        let mask = numeric.get_or_insert_with(|| record.iter().map(|f| f.trim().parse::<f64>().is_ok()).collect());
        for (i, field) in record.iter().enumerate() {
            if !mask[i] {
                continue;
            }
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("line {line}: column {:?}: {field:?} is not a number", headers[i]))?;
            raw[i].push(v);
        }
    }
    let Some(mask) = numeric else {
        return Err("empty CSV: no data rows".to_owned());
    };
    let (headers, columns) = headers
        .into_iter()
        .zip(raw)
        .zip(mask)
        .filter_map(|(hc, keep)| keep.then_some(hc))
        .unzip();
    Ok(Table { headers, columns })
}

pub fn render(job: &PlotJob) -> Result<String, CliError> {
    let table = read_table(&job.input)?;
    let title = job
        .title
        .clone()
        .unwrap_or_else(|| job.input.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()));
    match job.kind {
        PlotKind::Line => line_plot(&table, job, &title),
        PlotKind::Contour => contour_plot(&table, job, &title),
    }
}

#[derive(Clone, Copy, Debug)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>, log: bool, px_lo: f64, px_hi: f64) -> Result<Self, CliError> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Err(CliError::config("nothing to plot: no finite values on an axis"));
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        }
        Ok(Self {
            lo,
            hi,
            log,
            px_lo,
            px_hi,
        })
    }

    fn value(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        Some(if self.log { v.log10() } else { v })
    }

    fn px(&self, v: f64) -> Option<f64> {
        self.value(v).map(|u| self.px_of(u))
    }

    fn px_of(&self, u: f64) -> f64 {
        self.px_lo + (u - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// Tick positions in transformed units with labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            if b >= a {
                let stride = ((b - a) / 8 + 1) as usize;
                return (a..=b).step_by(stride).map(|k| (f64::from(k), format!("1e{k}"))).collect();
            }
        }
        let span = self.hi - self.lo;
        let raw = span / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last)
            .map(|k| {
                let u = k as f64 * step;
                let v = if self.log { 10f64.powf(u) } else { u };
                (u, label(v))
            })
            .collect()
    }
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_owned()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, xs: &Scale, ys: &Scale, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (u, text) in xs.ticks() {
        let x = xs.px_of(u);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.1}" stroke="black"/><text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            escape(&text)
        );
    }
    for (u, text) in ys.ticks() {
        let y = ys.px_of(u);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            escape(&text)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn axis_label(name: &str, log: bool) -> String {
    if log {
        format!("{name} (log)")
    } else {
        name.to_owned()
    }
}

fn line_plot(t: &Table, job: &PlotJob, title: &str) -> Result<String, CliError> {
    let xname = job.x.clone().unwrap_or_else(|| t.headers[0].clone());
    let xv = t.column(&xname)?;
    let ynames: Vec<String> = if job.y.is_empty() {
        t.headers.iter().filter(|h| **h != xname).cloned().collect()
    } else {
        job.y.clone()
    };
    if ynames.is_empty() {
        return Err(CliError::config("line plot needs at least one y column"));
    }
    let ys: Vec<&[f64]> = ynames.iter().map(|n| t.column(n)).collect::<Result<_, _>>()?;
    let xs = Scale::fit(xv.iter().copied(), job.log_x, LEFT, WIDTH - RIGHT)?;
    let yscale = Scale::fit(ys.iter().flat_map(|c| c.iter().copied()), job.log_y, HEIGHT - BOTTOM, TOP)?;

    let mut svg = String::new();
    header(&mut svg, title);
    axes(&mut svg, &xs, &yscale, &axis_label(&xname, job.log_x), &axis_label(&ynames.join(", "), job.log_y));
    for (k, (name, col)) in ynames.iter().zip(&ys).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (&x, &y) in xv.iter().zip(col.iter()) {
            match (xs.px(x), yscale.px(y)) {
                (Some(px), Some(py)) => {
                    let _ = write!(d, "{}{px:.2},{py:.2}", if pen_down { " L" } else { " M" });
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            d.trim_start()
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn distinct_sorted(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

/// Viridis-like ramp from dark blue to yellow.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn contour_plot(t: &Table, job: &PlotJob, title: &str) -> Result<String, CliError> {
    let xname = job.x.clone().unwrap_or_else(|| t.headers[0].clone());
    let yname = match job.y.as_slice() {
        [] => t
            .headers
            .get(1)
            .cloned()
            .ok_or_else(|| CliError::config("contour plot needs x, y and z columns"))?,
        [y] => y.clone(),
        _ => return Err(CliError::config("contour plot takes exactly one y column")),
    };
    let zname = job
        .z
        .clone()
        .or_else(|| t.headers.last().cloned())
        .ok_or_else(|| CliError::config("contour plot needs a z column"))?;
    let (xv, yv, zv) = (t.column(&xname)?, t.column(&yname)?, t.column(&zname)?);

    let gx = distinct_sorted(xv);
    let gy = distinct_sorted(yv);
    if gx.len() < 2 || gy.len() < 2 {
        return Err(CliError::config("contour plot needs at least a 2×2 grid"));
    }
    let mut grid = vec![vec![f64::NAN; gy.len()]; gx.len()];
    let find = |g: &[f64], v: f64| g.binary_search_by(|p| p.total_cmp(&v)).ok();
    for ((&x, &y), &z) in xv.iter().zip(yv).zip(zv) {
        if let (Some(i), Some(j)) = (find(&gx, x), find(&gy, y)) {
            grid[i][j] = if job.log_z {
                if z > 0.0 { z.log10() } else { f64::NAN }
            } else {
                z
            };
        }
    }
    let finite: Vec<f64> = grid.iter().flatten().copied().filter(|z| z.is_finite()).collect();
    if finite.is_empty() {
        return Err(CliError::config(format!("column {zname:?} has no finite values")));
    }
    let zmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut zmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if zmax <= zmin {
        zmax = zmin + 1.0;
    }
    let level_of = |z: f64| (((z - zmin) / (zmax - zmin)) * LEVELS as f64).floor().clamp(0.0, (LEVELS - 1) as f64);

    let xs = Scale::fit(gx.iter().copied(), job.log_x, LEFT, WIDTH - RIGHT)?;
    let ys = Scale::fit(gy.iter().copied(), job.log_y, HEIGHT - BOTTOM, TOP)?;
    let px_x: Vec<Option<f64>> = gx.iter().map(|&x| xs.px(x)).collect();
    let px_y: Vec<Option<f64>> = gy.iter().map(|&y| ys.px(y)).collect();
    // Cell edges at midpoints between grid lines in display space.
    let edges = |p: &[Option<f64>], lo: f64, hi: f64| -> Vec<(f64, f64)> {
        (0..p.len())
            .map(|k| {
                let c = p[k].unwrap_or(f64::NAN);
                let a = if k == 0 { lo } else { 0.5 * (c + p[k - 1].unwrap_or(c)) };
                let b = if k + 1 == p.len() { hi } else { 0.5 * (c + p[k + 1].unwrap_or(c)) };
                (a.min(b), a.max(b))
            })
            .collect()
    };
    let ex = edges(&px_x, xs.px_of(xs.lo), xs.px_of(xs.hi));
    let ey = edges(&px_y, ys.px_of(ys.lo), ys.px_of(ys.hi));

    let mut svg = String::new();
    header(&mut svg, title);
    for (i, &(x0, x1)) in ex.iter().enumerate() {
        for (j, &(y0, y1)) in ey.iter().enumerate() {
            if !(x0.is_finite() && y0.is_finite()) {
                continue;
            }
            let z = grid[i][j];
            let fill = if z.is_finite() {
                ramp((level_of(z) + 0.5) / LEVELS as f64)
            } else {
                "#bbbbbb".to_owned()
            };
            let _ = writeln!(
                svg,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="{fill}" stroke-width="0.5"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
    }
    // Iso-lines on the level boundaries by marching squares.
    let mut d = String::new();
    for l in 1..LEVELS {
        let level = zmin + (zmax - zmin) * l as f64 / LEVELS as f64;
        for i in 0..gx.len() - 1 {
            for j in 0..gy.len() - 1 {
                let (Some(xa), Some(xb), Some(ya), Some(yb)) = (px_x[i], px_x[i + 1], px_y[j], px_y[j + 1]) else {
                    continue;
                };
                let c = [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]];
                if c.iter().any(|z| !z.is_finite()) {
                    continue;
                }
                let p = [(xa, ya), (xb, ya), (xb, yb), (xa, yb)];
                let mut hits = Vec::with_capacity(4);
                for e in 0..4 {
                    let (za, zb) = (c[e], c[(e + 1) % 4]);
                    if (za < level) != (zb < level) {
                        let f = (level - za) / (zb - za);
                        let (pa, pb) = (p[e], p[(e + 1) % 4]);
                        hits.push((pa.0 + f * (pb.0 - pa.0), pa.1 + f * (pb.1 - pa.1)));
                    }
                }
                for seg in hits.chunks_exact(2) {
                    let _ = write!(
                        d,
                        "M{:.2},{:.2} L{:.2},{:.2} ",
                        seg[0].0, seg[0].1, seg[1].0, seg[1].1
                    );
                }
            }
        }
    }
    if !d.is_empty() {
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="black" stroke-opacity="0.45" stroke-width="0.7"/>"#,
            d.trim_end()
        );
    }
    axes(&mut svg, &xs, &ys, &axis_label(&xname, job.log_x), &axis_label(&yname, job.log_y));

    // Colour bar.
    let (bx, bw) = (WIDTH - RIGHT + 30.0, 18.0);
    let (btop, bbot) = (TOP, HEIGHT - BOTTOM);
    let bh = (bbot - btop) / LEVELS as f64;
    for l in 0..LEVELS {
        let y = bbot - (l + 1) as f64 * bh;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{y:.2}" width="{bw}" height="{bh:.2}" fill="{}"/>"#,
            ramp((l as f64 + 0.5) / LEVELS as f64)
        );
    }
    for l in (0..=LEVELS).step_by(3) {
        let z = zmin + (zmax - zmin) * l as f64 / LEVELS as f64;
        let shown = if job.log_z { 10f64.powf(z) } else { z };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.2}">{}</text>"#,
            bx + bw + 5.0,
            bbot - l as f64 * bh + 4.0,
            escape(&label(shown))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        bx + bw / 2.0,
        btop - 8.0,
        escape(&axis_label(&zname, job.log_z))
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
