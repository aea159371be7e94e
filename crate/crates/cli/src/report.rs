//! Serializable records and their CSV/JSON renderings.

use anyhow::Result;
use dualgap::solver::SolveSummary;
use dualgap::verification::{ConvergenceRow, IdentityResidual};
use dualgap::{GapBreakdown, IndeterminacyReport};
use serde::Serialize;

pub const STUDY_HEADER: [&str; 17] = [
    "dofs",
    "h",
    "E_circ",
    "D_F",
    "D_G",
    "eind_lower",
    "eind_exact",
    "eind_upper",
    "eworst_lower",
    "eworst_upper",
    "rho_approx_lo",
    "rho_approx_hi",
    "rho_indet_lo",
    "rho_indet_hi",
    "epsilon",
    "degree",
    "converged",
];

/// Shortest round-trip scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct StudyRecord {
    pub degree: usize,
    pub n_elements: usize,
    pub dofs: usize,
    pub h: f64,
    #[serde(rename = "D_F")]
    pub d_f: f64,
    #[serde(rename = "D_G")]
    pub d_g: f64,
    #[serde(flatten)]
    pub report: IndeterminacyReport,
    pub observed_rate: Option<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveSummary>,
}

impl From<&ConvergenceRow> for StudyRecord {
    fn from(r: &ConvergenceRow) -> Self {
        Self {
            degree: r.degree.order(),
            n_elements: r.n_elements,
            dofs: r.dofs,
            h: r.h,
            d_f: r.gap.d_f,
            d_g: r.gap.d_g,
            report: r.report,
            observed_rate: r.observed_rate,
            converged: r.converged(),
            solver: r.solve,
        }
    }
}

pub fn study_csv(records: &[StudyRecord]) -> Result<String> {
    csv_text(
        &STUDY_HEADER,
        records.iter().map(|r| {
            let t = &r.report;
            let mut row = vec![r.dofs.to_string()];
            row.extend(
                [
                    r.h,
                    t.e_circ,
                    r.d_f,
                    r.d_g,
                    t.eind_lower,
                    t.eind_exact,
                    t.eind_upper,
                    t.eworst_lower,
                    t.eworst_upper,
                    t.rho_approx_lower,
                    t.rho_approx_upper,
                    t.rho_indet_lower,
                    t.rho_indet_upper,
                    t.epsilon,
                ]
                .map(num),
            );
            row.push(r.degree.to_string());
            row.push(r.converged.to_string());
            row
        }),
    )
}

#[derive(Debug, Serialize)]
pub struct SolveRecord {
    pub degree: usize,
    pub n_elements: usize,
    pub dofs: usize,
    pub h: f64,
    #[serde(flatten)]
    pub gap: GapBreakdown,
    pub solver: SolveSummary,
}

pub fn solve_csv(records: &[SolveRecord]) -> Result<String> {
    csv_text(
        &[
            "degree",
            "n_elements",
            "dofs",
            "h",
            "J",
            "I_star",
            "D_F",
            "D_G",
            "E",
            "converged",
        ],
        records.iter().map(|r| {
            let mut row = vec![
                r.degree.to_string(),
                r.n_elements.to_string(),
                r.dofs.to_string(),
            ];
            row.extend([r.h, r.gap.j, r.gap.i_star, r.gap.d_f, r.gap.d_g, r.gap.e].map(num));
            row.push(r.solver.converged.to_string());
            row
        }),
    )
}

#[derive(Debug, Serialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
}

impl From<IdentityResidual> for Residual {
    fn from(r: IdentityResidual) -> Self {
        Self {
            lhs: r.lhs,
            rhs: r.rhs,
            residual: r.residual,
            relative: r.relative(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LinearRecord {
    pub degree: usize,
    pub n_elements: usize,
    pub error_equality: Residual,
    pub prager_synge: Option<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prager_synge_skipped: Option<String>,
}

impl LinearRecord {
    pub fn worst_relative(&self) -> f64 {
        let ps = self.prager_synge.as_ref().map_or(0.0, |r| r.relative);
        self.error_equality.relative.max(ps)
    }
}

pub fn linear_csv(records: &[LinearRecord]) -> Result<String> {
    let mut rows = Vec::new();
    for r in records {
        let mut push = |name: &str, res: &Residual| {
            let mut row = vec![
                r.degree.to_string(),
                r.n_elements.to_string(),
                name.to_string(),
            ];
            row.extend([res.lhs, res.rhs, res.residual, res.relative].map(num));
            rows.push(row);
        };
        push("error_equality", &r.error_equality);
        if let Some(ps) = &r.prager_synge {
            push("prager_synge", ps);
        }
    }
    csv_text(
        &[
            "degree",
            "n_elements",
            "identity",
            "lhs",
            "rhs",
            "residual",
            "relative",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678, 0.0, -2.5e-7] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "5e-1");
        assert_eq!(num(f64::NAN), "NaN");
    }
}
