//! Report rows, status rules and CSV/text rendering.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

/// Which side of the true value a reported number is known to lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Computed in closed form up to rounding.
    Exact,
    /// Certified not to exceed the true value.
    Lower,
    /// Certified not to fall below the true value.
    Upper,
    /// Statistical estimate.
    Estimate,
    /// Statistical estimate of a quantity known not to exceed the true value.
    LowerEstimate,
    /// Statistical estimate of a quantity known not to fall below it.
    UpperEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub kind: BoundKind,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Quantity { value, kind: BoundKind::Exact }
    }
    pub fn lower(value: f64) -> Self {
        Quantity { value, kind: BoundKind::Lower }
    }
    pub fn upper(value: f64) -> Self {
        Quantity { value, kind: BoundKind::Upper }
    }
    pub fn estimate(value: f64) -> Self {
        Quantity {
            value,
            kind: BoundKind::Estimate,
        }
    }

    pub fn lower_estimate(value: f64) -> Self {
        Quantity {
            value,
            kind: BoundKind::LowerEstimate,
        }
    }
    pub fn upper_estimate(value: f64) -> Self {
        Quantity {
            value,
            kind: BoundKind::UpperEstimate,
        }
    }

    /// The same number with the bound direction reversed.
    pub fn flipped(self) -> Self {
        let kind = match self.kind {
            BoundKind::Lower => BoundKind::Upper,
            BoundKind::Upper => BoundKind::Lower,
            BoundKind::LowerEstimate => BoundKind::UpperEstimate,
            BoundKind::UpperEstimate => BoundKind::LowerEstimate,
            k => k,
        };
        Quantity { kind, ..self }
    }

    pub fn is_estimate(self) -> bool {
        matches!(
            self.kind,
            BoundKind::Estimate | BoundKind::LowerEstimate | BoundKind::UpperEstimate
        )
    }

    fn bounds_below(self) -> bool {
        matches!(
            self.kind,
            BoundKind::Lower | BoundKind::Exact
        )
    }

    fn bounds_above(self) -> bool {
        matches!(
            self.kind,
            BoundKind::Upper | BoundKind::Exact
        )
    }
}

/// What a row asserts about `margin = lhs - rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs >= rhs`.
    AtLeast,
    /// `lhs <= rhs`.
    AtMost,
    /// `lhs > rhs` by more than the tolerance.
    Exceeds,
    /// `|lhs - rhs| <= tolerance`.
    Equal,
    /// Recorded, not asserted.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Info,
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Info => "info",
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub check: String,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub relation: Relation,
    /// Grid or rounding slack for certified rows, `3 σ` for statistical ones.
    pub tolerance: f64,
}

impl Row {
    pub fn new(check: impl Into<String>, lhs: Quantity, rhs: Quantity, relation: Relation, tolerance: f64) -> Self {
        Row {
            check: check.into(),
            lhs,
            rhs,
            relation,
            tolerance,
        }
    }

    pub fn info(check: impl Into<String>, value: f64) -> Self {
        Row::new(check, Quantity::exact(value), Quantity::exact(0.0), Relation::Info, 0.0)
    }

    pub fn margin(&self) -> f64 {
        self.lhs.value - self.rhs.value
    }

    pub fn statistical(&self) -> bool {
        self.lhs.is_estimate() || self.rhs.is_estimate()
    }

    /// A one-sided estimate that errs toward a shortfall: a miss then says
    /// nothing about the asserted relation.
    fn biased_against(&self) -> bool {
        use BoundKind::{LowerEstimate, UpperEstimate};
        match self.relation {
            Relation::AtLeast | Relation::Exceeds => self.lhs.kind == LowerEstimate || self.rhs.kind == UpperEstimate,
            Relation::AtMost => self.lhs.kind == UpperEstimate || self.rhs.kind == LowerEstimate,
            _ => false,
        }
    }

    /// The bound directions support the asserted relation.
    pub fn sound(&self) -> bool {
        if self.statistical() {
            return false;
        }
        match self.relation {
            Relation::AtLeast | Relation::Exceeds => self.lhs.bounds_below() && self.rhs.bounds_above(),
            Relation::AtMost => self.lhs.bounds_above() && self.rhs.bounds_below(),
            Relation::Equal => !self.statistical(),
            Relation::Info => false,
        }
    }

    fn exact(&self) -> bool {
        self.lhs.kind == BoundKind::Exact && self.rhs.kind == BoundKind::Exact
    }

    /// Pass only on sound evidence. A certified one-sided row whose margin is
    /// slightly wrong-signed, within the tolerance, is inconclusive unless
    /// both sides are exact (the tolerance is then pure rounding). Rows whose
    /// bound directions cannot support the claim are never passed.
    pub fn status(&self) -> Status {
        let m = self.margin();
        let t = self.tolerance;
        let signed = match self.relation {
            Relation::Info => return Status::Info,
            Relation::Equal => {
                return if !m.is_finite() {
                    Status::Fail
                } else if m.abs() <= t {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            Relation::Exceeds => return self.strict_status(m),
            Relation::AtLeast => m,
            Relation::AtMost => -m,
        };
        if !signed.is_finite() {
            return Status::Fail;
        }
        if self.statistical() {
            return if signed >= -t {
                Status::Pass
            } else if self.biased_against() {
                Status::Inconclusive
            } else {
                Status::Fail
            };
        }
        if !self.sound() {
            return Status::Inconclusive;
        }
        if signed >= 0.0 || (self.exact() && signed >= -t) {
            Status::Pass
        } else if signed >= -t {
            Status::Inconclusive
        } else {
            Status::Fail
        }
    }
}

impl Row {
    /// A strict gap passes only when certified beyond the tolerance. It fails
    /// when the gap is refuted: exact sides within the tolerance, or an upper
    /// bound on the left not exceeding the right by more than it.
    fn strict_status(&self, m: f64) -> Status {
        let t = self.tolerance;
        if !m.is_finite() {
            return Status::Fail;
        }
        if self.statistical() {
            return if m > t {
                Status::Pass
            } else if self.biased_against() {
                Status::Inconclusive
            } else {
                Status::Fail
            };
        }
        if self.exact() {
            return if m > t { Status::Pass } else { Status::Fail };
        }
        if self.sound() && m > t {
            return Status::Pass;
        }
        if self.lhs.bounds_above() && self.rhs.bounds_below() && m <= t {
            return Status::Fail;
        }
        Status::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(crate::Error::argument(format!("unknown format {s:?} (csv or text)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    /// SHA-256 of the canonical inputs.
    pub digest: String,
    pub seed: u64,
    pub grid: String,
    pub rows: Vec<Row>,
    /// Ordered free-form findings (partitions, discrepant atoms, ...).
    pub notes: Vec<(String, String)>,
}

pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Seventeen significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report {
    pub fn new(command: impl Into<String>, digest: String, seed: u64, grid: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            digest,
            seed,
            grid: grid.into(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn status(&self) -> Status {
        self.rows.iter().map(Row::status).max().unwrap_or(Status::Info)
    }

    /// 0 all asserted checks pass, 1 some fail, 2 some inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Fail => 1,
            Status::Inconclusive => 2,
            _ => 0,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,lhs,rhs,margin,sound,tolerance,seed,grid\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.check),
                fmt_num(r.lhs.value),
                fmt_num(r.rhs.value),
                fmt_num(r.margin()),
                r.sound(),
                fmt_num(r.tolerance),
                self.seed,
                csv_field(&self.grid)
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "inputs:  {}", self.digest);
        let _ = writeln!(s, "seed:    {}", self.seed);
        let _ = writeln!(s, "grid:    {}", self.grid);
        let width = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<width$}  {:>12}  lhs={}({:?})  rhs={}({:?})  margin={}  tol={}  sound={}",
                r.check,
                r.status().label(),
                fmt_num(r.lhs.value),
                r.lhs.kind,
                fmt_num(r.rhs.value),
                r.rhs.kind,
                fmt_num(r.margin()),
                fmt_num(r.tolerance),
                r.sound(),
            );
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k}: {v}");
        }
        let _ = writeln!(s, "status: {}", self.status().label());
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geq(lhs: Quantity, rhs: Quantity, tol: f64) -> Row {
        Row::new("c", lhs, rhs, Relation::AtLeast, tol)
    }

    #[test]
    fn certified_rows() {
        assert_eq!(geq(Quantity::lower(2.0), Quantity::exact(1.0), 0.1).status(), Status::Pass);
        assert_eq!(geq(Quantity::lower(0.95), Quantity::exact(1.0), 0.1).status(), Status::Inconclusive);
        assert_eq!(geq(Quantity::lower(0.5), Quantity::exact(1.0), 0.1).status(), Status::Fail);
        assert_eq!(geq(Quantity::exact(1.0 - 1e-15), Quantity::exact(1.0), 1e-12).status(), Status::Pass);
    }

    #[test]
    fn flipped_directions_are_refused() {
        let good = geq(Quantity::lower(2.0), Quantity::upper(1.0), 0.0);
        assert!(good.sound());
        let bad = Row {
            lhs: good.lhs.flipped(),
            ..good.clone()
        };
        assert!(!bad.sound());
        assert_eq!(bad.status(), Status::Inconclusive);
        let bad = Row {
            rhs: good.rhs.flipped(),
            ..good
        };
        assert_eq!(bad.status(), Status::Inconclusive);
        let le = Row::new("c", Quantity::upper(1.0), Quantity::lower(2.0), Relation::AtMost, 0.0);
        assert_eq!(le.status(), Status::Pass);
        let le = Row {
            lhs: le.lhs.flipped(),
            ..le
        };
        assert_eq!(le.status(), Status::Inconclusive);
    }

    #[test]
    fn statistical_rows() {
        let r = geq(Quantity::estimate(0.99), Quantity::estimate(1.0), 0.03);
        assert!(!r.sound());
        assert_eq!(r.status(), Status::Pass);
        let r = geq(Quantity::estimate(0.9), Quantity::estimate(1.0), 0.03);
        assert_eq!(r.status(), Status::Fail);
    }

    #[test]
    fn csv_layout() {
        let mut rep = Report::new("x", digest(&["a"]), 7, "circle-8");
        rep.push(geq(Quantity::lower(2.0), Quantity::exact(1.0), 0.5));
        rep.push(Row::info("n,ote", 3.0));
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "check,lhs,rhs,margin,sound,tolerance,seed,grid");
        assert_eq!(
            lines[1],
            "c,2.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,true,5.0000000000000000e-1,7,circle-8"
        );
        assert!(lines[2].starts_with("\"n,ote\","));
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&["ab", "c"]), digest(&["a", "bc"]));
        assert_eq!(digest(&["x"]).len(), 64);
    }

    #[test]
    fn strict_rows() {
        let gt = |lhs, rhs| Row::new("s", lhs, rhs, Relation::Exceeds, 1e-12).status();
        assert_eq!(gt(Quantity::lower(1.1), Quantity::exact(1.0)), Status::Pass);
        assert_eq!(gt(Quantity::exact(1.0), Quantity::exact(1.0)), Status::Fail);
        assert_eq!(gt(Quantity::exact(1.0 + 1e-15), Quantity::exact(1.0)), Status::Fail);
        assert_eq!(gt(Quantity::lower(1.0), Quantity::exact(1.0)), Status::Inconclusive);
        assert_eq!(gt(Quantity::upper(1.0), Quantity::exact(1.0)), Status::Fail);
        assert_eq!(gt(Quantity::upper(1.1), Quantity::exact(1.0)), Status::Inconclusive);
    }

    #[test]
    fn one_sided_estimates() {
        let row = |lhs, tol| Row::new("g", lhs, Quantity::estimate(1.0), Relation::AtLeast, tol);
        assert_eq!(row(Quantity::lower_estimate(0.9), 0.01).status(), Status::Inconclusive);
        assert_eq!(row(Quantity::upper_estimate(0.9), 0.01).status(), Status::Fail);
        assert_eq!(row(Quantity::estimate(0.9), 0.01).status(), Status::Fail);
        assert_eq!(row(Quantity::lower_estimate(0.995), 0.01).status(), Status::Pass);
        assert!(!row(Quantity::lower_estimate(1.0), 0.0).sound());
    }
}
