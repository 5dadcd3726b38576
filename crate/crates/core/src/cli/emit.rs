//! Grid and arc artifacts. Floats use the shortest representation that
//! parses back to the same value; `-0` prints as `0`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::scenario::GridFormat;
use crate::error::{Error, Result};
use crate::funcspace::Field;
use crate::geometry::{lattice_in_ball, BallRegion};
use crate::linalg::lex_cmp;
use crate::singularity::SingularArc;

pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Values of `field` on the lattice of `region`, lexicographic node order.
pub fn tabulate<F: Field + ?Sized>(field: &F, region: &BallRegion, spacing: f64) -> Result<Vec<GridRow>> {
    let mut nodes = lattice_in_ball(region, spacing);
    nodes.sort_by(|a, b| lex_cmp(a, b));
    nodes.into_iter().map(|x| Ok(GridRow { value: field.value(&x)?, x })).collect()
}

pub fn grid_header(dim: usize) -> String {
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    cols.push("value".into());
    cols.join(",")
}

pub fn grid_csv(rows: &[GridRow], dim: usize) -> String {
    let mut out = grid_header(dim);
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.x.iter().chain([&r.value]).map(|v| fmt_float(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn write_grid(rows: &[GridRow], dim: usize, format: GridFormat, path: &Path) -> Result<()> {
    let text = match format {
        GridFormat::Csv => grid_csv(rows, dim),
        GridFormat::Json => {
            let g = GridJson {
                columns: grid_header(dim).split(',').map(String::from).collect(),
                rows: rows.iter().map(|r| r.x.iter().copied().chain([r.value]).collect()).collect(),
            };
            serde_json::to_string_pretty(&g)? + "\n"
        }
    };
    fs::write(path, text)?;
    Ok(())
}

/// Tabulates and writes in one go; returns the rows written.
pub fn emit_grid<F: Field + ?Sized>(
    field: &F,
    region: &BallRegion,
    spacing: f64,
    format: GridFormat,
    path: &Path,
) -> Result<Vec<GridRow>> {
    let rows = tabulate(field, region, spacing)?;
    write_grid(&rows, region.dim(), format, path)?;
    Ok(rows)
}

/// Reads a grid written by [`write_grid`] in either format.
pub fn read_grid(path: &Path) -> Result<Vec<GridRow>> {
    let text = fs::read_to_string(path)?;
    let split = |v: Vec<f64>| -> Result<GridRow> {
        let (value, x) = v.split_last().ok_or_else(|| Error::Input("empty grid row".into()))?;
        Ok(GridRow { x: x.to_vec(), value: *value })
    };
    if path.extension().is_some_and(|e| e == "json") {
        let g: GridJson = serde_json::from_str(&text)?;
        return g.rows.into_iter().map(split).collect();
    }
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v = l
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Input(format!("bad grid cell {c:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            split(v)
        })
        .collect()
}

/// Columns `s, x1..xn, indicator, residual`; the residual is blank at `s = 0`.
pub fn arc_csv(arc: &SingularArc) -> String {
    let dim = arc.anchor.len();
    let mut cols = vec!["s".to_string()];
    cols.extend((1..=dim).map(|i| format!("x{i}")));
    cols.extend(["indicator".to_string(), "residual".to_string()]);
    let mut out = cols.join(",") + "\n";
    for smp in &arc.samples {
        let mut cells = vec![fmt_float(smp.s)];
        cells.extend(smp.point.iter().map(|v| fmt_float(*v)));
        cells.push(fmt_float(smp.indicator));
        cells.push(smp.residual.map(fmt_float).unwrap_or_default());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::FunctionSpec;

    #[test]
    fn closed_form_rows_and_zero_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let field = FunctionSpec::Quadratic { curvature: 0.0, linear: vec![0.0, 0.0], constant: 0.0 };
        let unit = BallRegion::new(vec![0.0, 0.0], 1.0).unwrap();
        emit_grid(&field, &unit, 0.5, GridFormat::Csv, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,x2,value"));
        assert!(lines.all(|l| l.ends_with(",0")));
        assert!(text.contains("\n-0.5,0,0\n"));
    }

    #[test]
    fn rows_are_lexicographic_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let unit = BallRegion::new(vec![0.0, 0.0], 1.0).unwrap();
        for format in [GridFormat::Csv, GridFormat::Json] {
            let path = dir.path().join(format!("g.{}", format.extension()));
            let rows = emit_grid(&FunctionSpec::NegSqrtX1p4X2sq, &unit, 0.1, format, &path).unwrap();
            assert!(rows.windows(2).all(|w| lex_cmp(&w[0].x, &w[1].x).is_lt()));
            assert_eq!(read_grid(&path).unwrap(), rows);
        }
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(0.1 + 0.2).parse::<f64>().unwrap(), 0.1 + 0.2);
    }
}
