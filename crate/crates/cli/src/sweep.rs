//! Parameter sweeps over the one-parameter families, with CSV emission
//! suitable for regenerating the closed-form curves.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use nsbox::decompose::canonical3;
use nsbox::families::{box_at, FamilyError, SweepFamily};
use nsbox::measures::{
    bell_discord, chsh_violation, mermin_discord, mermin_functions, steering_value,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Largest signed Bell combination.
    Chsh,
    /// Largest Mermin-function modulus.
    MerminMax,
    /// Largest Mermin-function modulus reported against the steering bound.
    Steering,
    /// Bell measure of the box.
    G,
    /// Mermin measure of the box.
    Q,
    /// Nonlocal-vertex weight of the 3-term decomposition.
    Mu,
    /// Mermin-family weight of the 3-term decomposition.
    Nu,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Chsh => "chsh",
            Quantity::MerminMax => "mermin",
            Quantity::Steering => "steering",
            Quantity::G => "G",
            Quantity::Q => "Q",
            Quantity::Mu => "mu",
            Quantity::Nu => "nu",
        }
    }

    pub const ALL: [Quantity; 7] = [
        Quantity::Chsh,
        Quantity::MerminMax,
        Quantity::Steering,
        Quantity::G,
        Quantity::Q,
        Quantity::Mu,
        Quantity::Nu,
    ];
}

impl FromStr for Quantity {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        Quantity::ALL
            .iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| SweepError::UnknownQuantity(s.to_string()))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    UnknownQuantity(String),
    BadGrid(String),
    Family(FamilyError),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::UnknownQuantity(q) => write!(f, "unknown quantity `{q}`"),
            SweepError::BadGrid(msg) => write!(f, "bad grid: {msg}"),
            SweepError::Family(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for SweepError {}

impl From<FamilyError> for SweepError {
    fn from(e: FamilyError) -> Self {
        SweepError::Family(e)
    }
}

/// A sweep request: family, optional preset, inclusive grid, and the
/// quantities to record at each grid point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub preset: Option<String>,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub quantities: Vec<Quantity>,
}

/// Sweep output: one row per grid point, first column the grid value.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Evaluates the sweep row by row, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    if spec.steps < 2 {
        return Err(SweepError::BadGrid(format!(
            "steps = {}, need at least 2",
            spec.steps
        )));
    }
    let (lo, hi) = spec.family.domain();
    if !(spec.start <= spec.stop && spec.start >= lo - 1e-12 && spec.stop <= hi + 1e-12) {
        return Err(SweepError::BadGrid(format!(
            "[{}, {}] outside the {} domain [{lo}, {hi}]",
            spec.start,
            spec.stop,
            spec.family.name()
        )));
    }
    if spec.quantities.is_empty() {
        return Err(SweepError::BadGrid("no quantities requested".into()));
    }

    let mut columns = vec![spec.family.grid_name().to_string()];
    columns.extend(spec.quantities.iter().map(|q| q.name().to_string()));

    let needs_decomp = spec
        .quantities
        .iter()
        .any(|q| matches!(q, Quantity::Mu | Quantity::Nu));

    let mut rows = Vec::with_capacity(spec.steps);
    for i in 0..spec.steps {
        let x = spec.start + (spec.stop - spec.start) * i as f64 / (spec.steps - 1) as f64;
        let bx = box_at(spec.family, spec.preset.as_deref(), x)?;
        let decomp = if needs_decomp {
            Some(canonical3(&bx).map_err(|e| SweepError::Family(FamilyError::Box(e)))?)
        } else {
            None
        };
        let mut row = vec![x];
        for q in &spec.quantities {
            let v = match q {
                Quantity::Chsh => chsh_violation(&bx).max,
                Quantity::MerminMax => {
                    let m = mermin_functions(&bx).m;
                    m.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                }
                Quantity::Steering => steering_value(&bx, true).max,
                Quantity::G => bell_discord(&bx).value,
                Quantity::Q => mermin_discord(&bx).value,
                Quantity::Mu => decomp.as_ref().unwrap().mu,
                Quantity::Nu => decomp.as_ref().unwrap().nu,
            };
            row.push(v);
        }
        rows.push(row);
    }

    let mut notes: Vec<String> = Vec::new();
    for q in &spec.quantities {
        if let Some(f) = closed_form(spec.family, spec.preset.as_deref(), *q) {
            notes.push(format!("{}={f}", q.name()));
        }
    }
    let mut comment = format!(
        "family={} preset={} grid={} start={} stop={} steps={}",
        spec.family.name(),
        spec.preset.as_deref().unwrap_or("-"),
        spec.family.grid_name(),
        spec.start,
        spec.stop,
        spec.steps
    );
    if !notes.is_empty() {
        comment.push_str("; expected: ");
        comment.push_str(&notes.join(", "));
    }
    Ok(SweepTable {
        comment,
        columns,
        rows,
    })
}

/// Known closed forms for the curves the sweeps regenerate; recorded in the
/// CSV header so emitted data is self-describing.
fn closed_form(family: SweepFamily, preset: Option<&str>, q: Quantity) -> Option<&'static str> {
    use Quantity::*;
    Some(match (family, preset.unwrap_or(""), q) {
        (SweepFamily::Schmidt, "tsirelson", Chsh) => "2*sqrt(2*tau)",
        (SweepFamily::Schmidt, "tsirelson", G) => "2*sqrt(2*tau)",
        (SweepFamily::Schmidt, "pr_schmidt", Chsh) => "2*sqrt(1+tau)",
        (SweepFamily::Schmidt, "pr_schmidt", G) => "4*tau/sqrt(1+tau)",
        (SweepFamily::Schmidt, "mermin", MerminMax) => "2*sqrt(tau)",
        (SweepFamily::Schmidt, "mermin", Q) => "2*sqrt(tau)",
        (SweepFamily::Schmidt, "steer_schmidt", MerminMax) => "sqrt(2)*sqrt(1+tau)",
        (SweepFamily::Schmidt, "steer_schmidt", Q) => "2*sqrt(2)*tau/sqrt(1+tau)",
        (SweepFamily::Schmidt, "bms_xy", G) => "2*sqrt(2*tau)*|s-c|, s=sqrt(tau), c=sqrt(1-tau)",
        (SweepFamily::Schmidt, "bms_xy", Q) => "sqrt(2*tau)*||c+s|-|c-s||",
        (SweepFamily::Werner, "mermin", Q) => "2*p",
        (SweepFamily::Werner, "tsirelson", G) => "2*sqrt(2)*p",
        (SweepFamily::Werner, "werner_bm", G) => "2*sqrt(2)*p*|sqrt(p)-sqrt(1-p)|",
        (SweepFamily::Werner, "werner_bm", Q) => {
            "sqrt(2)*p*|sqrt(p)+sqrt(1-p)-|sqrt(p)-sqrt(1-p)||"
        }
        (SweepFamily::PsiPlus, "interp", Mu) => "sqrt(1-p)",
        (SweepFamily::PsiPlus, "interp", Nu) => "sqrt(p)-sqrt(1-p)",
        (SweepFamily::PsiPlusCc, "pr_schmidt", Chsh) => "2*sqrt(1+p^2)",
        (SweepFamily::PsiPlusCc, "pr_schmidt", G) => "4*p^2/sqrt(1+p^2)",
        (SweepFamily::IsotropicPr, "", G) => "4*p",
        (SweepFamily::IsotropicPr, "", Chsh) => "4*p",
        (SweepFamily::IsotropicMermin, "", Q) => "2*p",
        _ => return None,
    })
}

/// Writes the table as CSV: one `#` comment line, a header line, then one
/// row per grid point at 17 significant digits, enough for every double to
/// parse back bit-identically.
pub fn write_csv<W: Write>(table: &SweepTable, mut out: W) -> io::Result<()> {
    writeln!(out, "# {}", table.comment)?;
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn csv_string(table: &SweepTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to a vec cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

/// Parses CSV produced by [`write_csv`] back into header names and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or("missing header")?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| format!("bad cell: {e}"))?);
    }
    Ok((columns, rows))
}
