//! Tabulated per-element gain patterns (e.g. measured anechoic-chamber data).
//!
//! Tables are dense rectangular grids over zenith and azimuth, one gain per
//! `(element, theta, phi)` node, loaded from CSV with the exact header
//! `element,theta_deg,phi_deg,gain_db`. Queries bilinearly interpolate in dB
//! inside the grid hull and refuse to extrapolate outside it. Grids are
//! stored in radians; degrees exist only in the file format.

use std::io::Read;

use crate::error::{Error, Result};
use crate::geometry::Direction;

const EXPECTED_HEADER: [&str; 4] = ["element", "theta_deg", "phi_deg", "gain_db"];

/// Dense gain grid for every element of an array.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPattern {
    elements: usize,
    /// Strictly increasing zenith nodes, radians, inside (-pi/2, pi/2).
    theta_grid: Vec<f64>,
    /// Strictly increasing azimuth nodes, radians.
    phi_grid: Vec<f64>,
    /// Row-major `[element][theta][phi]` gains in dB.
    gains_db: Vec<f64>,
}

impl TabulatedPattern {
    /// Builds a table from degree-valued grids, mirroring the file layout.
    /// `gains_db` is `[element][theta][phi]` flattened and must be complete.
    pub fn from_degree_grids(
        elements: usize,
        theta_deg: Vec<f64>,
        phi_deg: Vec<f64>,
        gains_db: Vec<f64>,
    ) -> Result<Self> {
        if elements == 0 {
            return Err(Error::invalid("tabulated pattern needs at least one element"));
        }
        let theta_grid = checked_axis("theta", &theta_deg)?;
        if theta_deg.iter().any(|t| t.abs() >= 90.0) {
            return Err(Error::invalid("theta nodes must lie strictly inside (-90, 90) degrees"));
        }
        let phi_grid = checked_axis("phi", &phi_deg)?;
        let want = elements * theta_grid.len() * phi_grid.len();
        if gains_db.len() != want {
            return Err(Error::invalid(format!(
                "gain grid has {} values, expected {} ({} elements x {} theta x {} phi)",
                gains_db.len(),
                want,
                elements,
                theta_grid.len(),
                phi_grid.len()
            )));
        }
        if let Some(bad) = gains_db.iter().position(|g| !g.is_finite()) {
            return Err(Error::invalid(format!("gain grid value {bad} is not finite")));
        }
        Ok(Self { elements, theta_grid, phi_grid, gains_db })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Zenith nodes in radians.
    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    /// Azimuth nodes in radians.
    pub fn phi_grid(&self) -> &[f64] {
        &self.phi_grid
    }

    /// True when `dir` lies inside the grid hull (node edges included).
    pub fn covers(&self, dir: Direction) -> bool {
        let t = dir.theta();
        let p = dir.phi();
        t >= self.theta_grid[0]
            && t <= *self.theta_grid.last().expect("nonempty axis")
            && p >= self.phi_grid[0]
            && p <= *self.phi_grid.last().expect("nonempty axis")
    }

    fn value_at(&self, element: usize, ti: usize, pi: usize) -> f64 {
        self.gains_db[(element * self.theta_grid.len() + ti) * self.phi_grid.len() + pi]
    }

    /// Bilinear dB interpolation at `dir`; exact at grid nodes. Errors when
    /// `dir` falls outside the hull or `element` is out of range.
    pub fn interpolate(&self, element: usize, dir: Direction) -> Result<f64> {
        if element >= self.elements {
            return Err(Error::invalid(format!(
                "element {element} out of range for a {}-element table",
                self.elements
            )));
        }
        if !self.covers(dir) {
            return Err(Error::OutsideGrid(format!(
                "({:.4}, {:.4}) deg is outside theta [{:.4}, {:.4}] x phi [{:.4}, {:.4}] deg",
                dir.theta().to_degrees(),
                dir.phi().to_degrees(),
                self.theta_grid[0].to_degrees(),
                self.theta_grid.last().expect("nonempty axis").to_degrees(),
                self.phi_grid[0].to_degrees(),
                self.phi_grid.last().expect("nonempty axis").to_degrees(),
            )));
        }
        let (t_lo, t_hi, tt) = bracket(&self.theta_grid, dir.theta());
        let (p_lo, p_hi, tp) = bracket(&self.phi_grid, dir.phi());
        let low = (1.0 - tp) * self.value_at(element, t_lo, p_lo)
            + tp * self.value_at(element, t_lo, p_hi);
        let high = (1.0 - tp) * self.value_at(element, t_hi, p_lo)
            + tp * self.value_at(element, t_hi, p_hi);
        Ok((1.0 - tt) * low + tt * high)
    }
}

/// Locates `q` on a sorted axis: bracketing node indices plus the linear
/// weight of the upper one. Callers guarantee `q` is inside the span.
fn bracket(grid: &[f64], q: f64) -> (usize, usize, f64) {
    if grid.len() == 1 {
        return (0, 0, 0.0);
    }
    let upper = grid.partition_point(|x| *x < q).clamp(1, grid.len() - 1);
    let lo = grid[upper - 1];
    let hi = grid[upper];
    (upper - 1, upper, (q - lo) / (hi - lo))
}

fn checked_axis(name: &str, deg: &[f64]) -> Result<Vec<f64>> {
    if deg.is_empty() {
        return Err(Error::invalid(format!("{name} grid must not be empty")));
    }
    for (i, v) in deg.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!("{name} grid node {i} is not finite")));
        }
        if i > 0 && *v <= deg[i - 1] {
            return Err(Error::invalid(format!(
                "{name} grid must be strictly increasing, node {i} repeats or reverses"
            )));
        }
    }
    Ok(deg.iter().map(|v| v.to_radians()).collect())
}

/// Loads a pattern table from CSV. The table must cover every element of a
/// `elements`-element array with a complete rectangular grid; the grids
/// themselves are inferred from the distinct angle values in the file.
pub fn load_pattern_table<R: Read>(reader: R, elements: usize) -> Result<TabulatedPattern> {
    if elements == 0 {
        return Err(Error::invalid("tabulated pattern needs at least one element"));
    }
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|e| Error::PatternTable(format!("header: {e}")))?;
    let got: Vec<&str> = header.iter().collect();
    if got != EXPECTED_HEADER {
        return Err(Error::PatternTable(format!(
            "header must be `{}`, got `{}`",
            EXPECTED_HEADER.join(","),
            got.join(",")
        )));
    }

    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1; // 1-based data row, header not counted
        let record = record.map_err(|e| Error::PatternTable(format!("row {row}: {e}")))?;
        if record.len() != 4 {
            return Err(Error::PatternTable(format!(
                "row {row}: expected 4 fields, got {}",
                record.len()
            )));
        }
        let element: usize = parse_field(&record[0], "element", row)?;
        let theta: f64 = parse_field(&record[1], "theta_deg", row)?;
        let phi: f64 = parse_field(&record[2], "phi_deg", row)?;
        let gain: f64 = parse_field(&record[3], "gain_db", row)?;
        for (label, v) in [("theta_deg", theta), ("phi_deg", phi), ("gain_db", gain)] {
            if !v.is_finite() {
                return Err(Error::PatternTable(format!("row {row}: {label} is not finite")));
            }
        }
        if element >= elements {
            return Err(Error::PatternTable(format!(
                "row {row}: element {element} out of range for a {elements}-element array"
            )));
        }
        rows.push((element, normalize_zero(theta), normalize_zero(phi), gain));
    }
    if rows.is_empty() {
        return Err(Error::PatternTable("table has no data rows".into()));
    }

    let theta_deg = distinct_sorted(rows.iter().map(|r| r.1));
    let phi_deg = distinct_sorted(rows.iter().map(|r| r.2));
    let (nt, np) = (theta_deg.len(), phi_deg.len());

    let mut gains = vec![f64::NAN; elements * nt * np];
    for (i, (element, theta, phi, gain)) in rows.iter().enumerate() {
        let ti = exact_index(&theta_deg, *theta);
        let pi = exact_index(&phi_deg, *phi);
        let slot = &mut gains[(element * nt + ti) * np + pi];
        if !slot.is_nan() {
            return Err(Error::PatternTable(format!(
                "row {}: duplicate entry for element {element} at ({theta}, {phi}) deg",
                i + 1
            )));
        }
        *slot = *gain;
    }
    for element in 0..elements {
        for (ti, theta) in theta_deg.iter().enumerate() {
            for (pi, phi) in phi_deg.iter().enumerate() {
                if gains[(element * nt + ti) * np + pi].is_nan() {
                    return Err(Error::PatternTable(format!(
                        "incomplete grid: element {element} has no entry at ({theta}, {phi}) deg"
                    )));
                }
            }
        }
    }

    TabulatedPattern::from_degree_grids(elements, theta_deg, phi_deg, gains)
}

fn parse_field<T: std::str::FromStr>(raw: &str, label: &str, row: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::PatternTable(format!("row {row}: cannot parse {label} from `{raw}`")))
}

/// Maps -0.0 to 0.0 so both spellings land on the same grid node.
fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v.dedup();
    v
}

fn exact_index(grid: &[f64], v: f64) -> usize {
    grid.binary_search_by(|x| x.partial_cmp(&v).expect("finite values")).expect("value from grid")
}
