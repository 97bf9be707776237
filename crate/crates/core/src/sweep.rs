//! Grid evaluation of the named families, normalized by GHZ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::format::{fmt12, sig12, sig12_opt};
use crate::measures::MeasureReport;
use crate::states::{cluster, epr_power, family1, family2, ghz, w, wbar, PureState};

#[derive(
    Clone,
    Copy,
    Debug,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    Ghz,
    Cluster,
    W,
    Wbar,
    EprPower,
    Family1,
    Family2,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Ghz,
        Family::Cluster,
        Family::W,
        Family::Wbar,
        Family::EprPower,
        Family::Family1,
        Family::Family2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ghz => "ghz",
            Family::Cluster => "cluster",
            Family::W => "w",
            Family::Wbar => "wbar",
            Family::EprPower => "epr_power",
            Family::Family1 => "family1",
            Family::Family2 => "family2",
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(self, Family::Family1 | Family::Family2)
    }

    /// Whether the family is defined on `n` qubits.
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Family::Ghz | Family::W | Family::Wbar => n >= 2,
            Family::Cluster => n >= 4 && n.is_multiple_of(2),
            Family::EprPower => n >= 2 && n.is_multiple_of(2),
            Family::Family1 | Family::Family2 => n >= 3,
        }
    }

    /// `x` is ignored by the non-parametric families.
    pub fn build(self, n: usize, x: f64) -> Result<PureState> {
        match self {
            Family::Ghz => ghz(n),
            Family::Cluster => cluster(n),
            Family::W => w(n),
            Family::Wbar => wbar(n),
            Family::EprPower => epr_power(n),
            Family::Family1 => family1(x, n),
            Family::Family2 => family2(x, n),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `0.00, 0.05, …, 1.00`.
pub fn default_x_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

pub fn default_n_range() -> Vec<usize> {
    (2..=12).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub families: Vec<Family>,
    pub n_range: Vec<usize>,
    pub x_grid: Vec<f64>,
    pub normalize_to_ghz: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            n_range: default_n_range(),
            x_grid: default_x_grid(),
            normalize_to_ghz: true,
        }
    }
}

/// One grid point; `x` is `None` for the non-parametric families.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub family: Family,
    pub n: usize,
    pub x: Option<f64>,
    #[serde(rename = "O", serialize_with = "sig12")]
    pub o: f64,
    #[serde(rename = "M", serialize_with = "sig12")]
    pub m: f64,
    #[serde(rename = "S", serialize_with = "sig12")]
    pub s: f64,
    #[serde(rename = "MW", serialize_with = "sig12")]
    pub mw: f64,
    #[serde(rename = "O_rel", serialize_with = "sig12_opt")]
    pub o_rel: Option<f64>,
    #[serde(rename = "M_rel", serialize_with = "sig12_opt")]
    pub m_rel: Option<f64>,
    #[serde(rename = "S_rel", serialize_with = "sig12_opt")]
    pub s_rel: Option<f64>,
}

pub const CSV_HEADER: &str = "family,n,x,O,M,S,MW,O_rel,M_rel,S_rel";

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.x.map(|x| format!("{x:.2}")).unwrap_or_default(),
            fmt12(self.o),
            fmt12(self.m),
            fmt12(self.s),
            fmt12(self.mw),
            opt(self.o_rel),
            opt(self.m_rel),
            opt(self.s_rel),
        )
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return invalid("no families selected");
        }
        if let Some(n) = self.n_range.iter().find(|&&n| n < 2) {
            return invalid(format!("n must be at least 2, got {n}"));
        }
        if let Some(x) = self.x_grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return invalid(format!("x must lie in [0, 1], got {x}"));
        }
        if self.families.iter().any(|f| f.is_parametric()) && self.x_grid.is_empty() {
            return invalid("empty x grid");
        }
        Ok(())
    }

    /// Grid points in output order; `n` values a family does not accept are dropped.
    pub fn points(&self) -> Result<Vec<(Family, usize, Option<f64>)>> {
        self.validate()?;
        let mut families = self.families.clone();
        families.sort();
        families.dedup();
        let mut ns = self.n_range.clone();
        ns.sort();
        ns.dedup();
        let mut xs = self.x_grid.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut pts = Vec::new();
        for &f in &families {
            for &n in ns.iter().filter(|&&n| f.accepts(n)) {
                if f.is_parametric() {
                    pts.extend(xs.iter().map(|&x| (f, n, Some(x))));
                } else {
                    pts.push((f, n, None));
                }
            }
        }
        Ok(pts)
    }
}

fn row(family: Family, n: usize, x: Option<f64>, normalize: bool) -> Result<ReportRow> {
    let r = MeasureReport::evaluate(&family.build(n, x.unwrap_or(0.0))?)?;
    let (o_rel, m_rel, s_rel) = if normalize {
        let g = MeasureReport::evaluate(&ghz(n)?)?;
        (Some(r.o / g.o), Some(r.m / g.m), Some(r.s / g.s))
    } else {
        (None, None, None)
    };
    Ok(ReportRow {
        family,
        n,
        x,
        o: r.o,
        m: r.m,
        s: r.s,
        mw: r.mw,
        o_rel,
        m_rel,
        s_rel,
    })
}

/// Evaluate every grid point; rows come back in `(family, n, x)` order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ReportRow>> {
    let pts = spec.points()?;
    pts.into_par_iter()
        .map(|(f, n, x)| row(f, n, x, spec.normalize_to_ghz))
        .collect()
}
