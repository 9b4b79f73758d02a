//! Flat `key = value` reports, CSV tables and the columnar text formats.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::contspace::{Grid, GridFunction};
use crate::holodisc::TaylorFunction;

use super::CliError;

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn complex(z: Complex64) -> String {
    format!("{} {}", num(z.re), num(z.im))
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Ordered flat key-value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.text("command", command);
        r
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.into(), value.into()));
        self
    }

    pub fn float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.text(key, num(value))
    }

    pub fn int(&mut self, key: impl Into<String>, value: impl std::fmt::Display) -> &mut Self {
        self.text(key, value.to_string())
    }

    pub fn flag(&mut self, key: impl Into<String>, ok: bool) -> &mut Self {
        self.text(key, verdict(ok))
    }

    pub fn list(&mut self, key: impl Into<String>, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| num(*v)).collect();
        self.text(key, joined.join(","))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Whitespace- or comma-separated numeric rows; `#` starts a comment.
pub fn parse_rows(text: &str, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let row = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Invalid(format!("{what}: line {}: bad number `{s}`", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn columns(rows: Vec<Vec<f64>>, n: usize, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(CliError::Invalid(format!(
            "{what}: expected {n} columns per line, found {}",
            r.len()
        )));
    }
    Ok(rows)
}

/// One entry per line.
pub fn parse_column(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    Ok(columns(parse_rows(text, what)?, 1, what)?.into_iter().map(|r| r[0]).collect())
}

/// `1,2,3` or `1 2 3`.
pub fn parse_inline(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    Ok(parse_rows(text, what)?.into_iter().flatten().collect())
}

/// Two columns `(s, H_u(s))`, with an optional `s,H` header.
pub fn parse_moment_data(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let body = match text.split_once('\n') {
        Some((first, rest)) if first.trim().replace(' ', "") == "s,H" => rest,
        _ => text,
    };
    let rows = columns(parse_rows(body, "moment data")?, 2, "moment data")?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).unzip())
}

pub fn write_moment_data(s: &[f64], values: &[f64]) -> String {
    csv(&["s", "H"], s.iter().zip(values).map(|(a, b)| vec![num(*a), num(*b)]))
}

/// Taylor coefficients, one `re im` pair per line.
pub fn parse_taylor(text: &str) -> Result<TaylorFunction, CliError> {
    let rows = columns(parse_rows(text, "coefficients")?, 2, "coefficients")?;
    TaylorFunction::new(rows.into_iter().map(|r| Complex64::new(r[0], r[1])).collect())
        .map_err(|e| CliError::Invalid(format!("coefficients: {e}")))
}

pub fn write_taylor(f: &TaylorFunction) -> String {
    let mut out = String::from("# re im\n");
    for c in f.coeffs() {
        let _ = writeln!(out, "{}", complex(*c));
    }
    out
}

/// Header line `rows cols`, then one `row col re im` line per nonzero entry.
pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>, CliError> {
    let rows = parse_rows(text, "matrix")?;
    let (head, body) = rows
        .split_first()
        .ok_or_else(|| CliError::Invalid("matrix: empty".into()))?;
    let dim = |v: f64| -> Result<usize, CliError> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Invalid(format!("matrix: bad index {v}")))
        }
    };
    if head.len() != 2 {
        return Err(CliError::Invalid("matrix: header must be `rows cols`".into()));
    }
    let (nr, nc) = (dim(head[0])?, dim(head[1])?);
    let mut m = DMatrix::<Complex64>::zeros(nr, nc);
    for r in columns(body.to_vec(), 4, "matrix")? {
        let (i, j) = (dim(r[0])?, dim(r[1])?);
        if i >= nr || j >= nc {
            return Err(CliError::Invalid(format!("matrix: entry ({i}, {j}) out of range")));
        }
        m[(i, j)] = Complex64::new(r[2], r[3]);
    }
    Ok(m)
}

pub fn write_matrix(m: &DMatrix<Complex64>) -> String {
    let mut out = format!("# rows cols, then row col re im\n{} {}\n", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                let _ = writeln!(out, "{i} {j} {}", complex(v));
            }
        }
    }
    out
}

/// `x y re im` per node (`y = 0` on the interval).
pub fn write_grid_function(f: &GridFunction) -> String {
    let mut out = String::from("# x y re im\n");
    for (z, v) in f.grid().points().iter().zip(f.values()) {
        let _ = writeln!(out, "{} {}", complex(*z), complex(*v));
    }
    out
}

/// Reads values for `grid`, requiring the node coordinates to match.
pub fn parse_grid_function(grid: &Arc<Grid>, text: &str) -> Result<GridFunction, CliError> {
    let rows = columns(parse_rows(text, "grid function")?, 4, "grid function")?;
    if rows.len() != grid.len() {
        return Err(CliError::Invalid(format!(
            "grid function: {} rows for {} nodes",
            rows.len(),
            grid.len()
        )));
    }
    for (k, (r, z)) in rows.iter().zip(grid.points()).enumerate() {
        if (Complex64::new(r[0], r[1]) - z).norm() > 1e-12 {
            return Err(CliError::Invalid(format!("grid function: node {k} is not at {z}")));
        }
    }
    GridFunction::new(Arc::clone(grid), rows.iter().map(|r| Complex64::new(r[2], r[3])).collect())
        .map_err(|e| CliError::Invalid(format!("grid function: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contspace::Exhaustion1D;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-2.5e17), "-2.5e17");
    }

    #[test]
    fn report_round_trip() {
        let mut r = Report::new("x");
        r.float("a", 0.1).flag("b", true).list("c", &[1.0, 2.5]);
        let back = Report::parse(&r.render());
        assert_eq!(back, r);
        assert_eq!(back.get("c"), Some("1,2.5"));
    }

    #[test]
    fn matrix_and_taylor_round_trip() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 * 0.1, j as f64 - 1.0));
        assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
        let f = TaylorFunction::new(vec![Complex64::new(0.1, -0.2), Complex64::new(3.0, 1e-17)]).unwrap();
        assert_eq!(parse_taylor(&write_taylor(&f)).unwrap(), f);
        assert!(parse_matrix("2 2\n0 5 1 1\n").is_err());
        let (s, h) = parse_moment_data(&write_moment_data(&[-1.0, 0.5], &[1e-30, 0.25])).unwrap();
        assert_eq!((s, h), (vec![-1.0, 0.5], vec![1e-30, 0.25]));
    }

    #[test]
    fn grid_function_round_trip() {
        let g = Grid::interval(&Exhaustion1D::standard(), 64, &[]).unwrap();
        let f = GridFunction::from_fn(&g, |z| Complex64::new(z.re.sin(), 1.0 / z.re));
        assert_eq!(parse_grid_function(&g, &write_grid_function(&f)).unwrap(), f);
        let h = Grid::interval(&Exhaustion1D::standard(), 65, &[]).unwrap();
        assert!(parse_grid_function(&h, &write_grid_function(&f)).is_err());
    }

    #[test]
    fn columns_checked() {
        assert_eq!(parse_column("1\n# c\n2.5\n", "v").unwrap(), vec![1.0, 2.5]);
        assert!(parse_column("1 2\n", "v").is_err());
        assert_eq!(parse_inline("1,2, 3", "v").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_inline("1,x", "v").unwrap_err().to_string().contains("`x`"));
    }
}
