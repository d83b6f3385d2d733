//! The `dims`, `gap-sweep` and `capacity-table` commands.

use serde::Serialize;
use tlchan_core::distances::{convergence_fit, isometry_gap, GapReport};
use tlchan_core::entropic::{capacity_bracket, BracketTarget, CapacityBracket, CERTIFY_TOL};
use tlchan_core::jones_wenzl::JwCache;
use tlchan_core::par::{self, Exec};
use tlchan_core::qarith::qdim;
use tlchan_core::{AdmissibleTriple, Error};

use crate::config::{Format, RunConfig};
use crate::{CliError, Output};

/// Slack on `gap <= coeff_dev + defect`.
pub const TRIANGLE_SLACK: f64 = 1e-10;

#[derive(Serialize)]
struct DimRow {
    n: usize,
    dim: u128,
}

/// Rows `n = 0..=n_max` with `dim = dim H_n`.
pub fn dims(local_dim: usize, n_max: usize, format: Format) -> Result<Output, CliError> {
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let dim = qdim(local_dim as u64, n + 1)?.to_u128().ok_or_else(|| {
            CliError::Config(format!("dim H_{n} at N={local_dim} exceeds 128 bits"))
        })?;
        rows.push(DimRow { n, dim });
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::from("n,dim\n");
            for r in &rows {
                s.push_str(&format!("{},{}\n", r.n, r.dim));
            }
            s
        }
        Format::Json => json(&rows)?,
    };
    Ok(Output::pass(text))
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cells(cfg: &RunConfig) -> Vec<(usize, AdmissibleTriple)> {
    let mut cells: Vec<_> = cfg
        .n_values
        .iter()
        .flat_map(|&n| cfg.triples.iter().map(move |&t| (n, t)))
        .collect();
    cells.sort_by_key(|&(n, t)| (n, t.l, t.m, t.k));
    cells.dedup();
    cells
}

#[derive(Serialize)]
struct GapRow {
    #[serde(rename = "N")]
    local_dim: usize,
    l: usize,
    m: usize,
    k: usize,
    gap: Option<f64>,
    defect: Option<f64>,
    coeff_dev: Option<f64>,
    triangle_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

#[derive(Serialize)]
struct FitRow {
    l: usize,
    m: usize,
    k: usize,
    points: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct GapSweep {
    rows: Vec<GapRow>,
    fits: Vec<FitRow>,
}

pub fn gap_sweep(cfg: &RunConfig, exec: Exec) -> Result<Output, CliError> {
    let cache = JwCache::new(cfg.caps);
    let cells = cells(cfg);
    let results = par::map(&cells, exec, |&(n, t)| isometry_gap(n, t, &cache));
    let slack = cfg.tol.unwrap_or(TRIANGLE_SLACK);
    let mut rows = Vec::new();
    let mut ok: Vec<GapReport> = Vec::new();
    let mut violations = Vec::new();
    for (&(n, t), res) in cells.iter().zip(results) {
        match res {
            Ok(r) => {
                if !r.satisfies_triangle(slack) {
                    violations.push(format!("triangle bound fails at N={n} {t}"));
                }
                rows.push(GapRow {
                    local_dim: n,
                    l: t.l,
                    m: t.m,
                    k: t.k,
                    gap: Some(r.gap),
                    defect: Some(r.defect),
                    coeff_dev: Some(r.coeff_dev),
                    triangle_bound: Some(r.triangle_bound),
                    skipped: None,
                });
                ok.push(r);
            }
            Err(e @ Error::CapExceeded { .. }) => rows.push(GapRow {
                local_dim: n,
                l: t.l,
                m: t.m,
                k: t.k,
                gap: None,
                defect: None,
                coeff_dev: None,
                triangle_bound: None,
                skipped: Some(e.to_string()),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let mut triples = cfg.triples.clone();
    triples.sort_by_key(|t| (t.l, t.m, t.k));
    triples.dedup();
    let fits: Vec<FitRow> = triples
        .iter()
        .map(|&t| {
            let pts: Vec<(f64, f64)> = ok
                .iter()
                .filter(|r| r.triple == t)
                .map(|r| (r.local_dim as f64, r.gap))
                .collect();
            match convergence_fit(&pts) {
                Ok(f) => FitRow {
                    l: t.l,
                    m: t.m,
                    k: t.k,
                    points: pts.len(),
                    slope: Some(f.slope),
                    intercept: Some(f.intercept),
                    residual: Some(f.residual),
                    note: None,
                },
                Err(e) => FitRow {
                    l: t.l,
                    m: t.m,
                    k: t.k,
                    points: pts.len(),
                    slope: None,
                    intercept: None,
                    residual: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    let text = match cfg.format {
        Format::Csv => gap_csv(&rows, &fits),
        Format::Json => json(&GapSweep { rows, fits })?,
    };
    Ok(Output::with_failures(text, violations))
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "skipped".to_string(), |x| x.to_string())
}

fn gap_csv(rows: &[GapRow], fits: &[FitRow]) -> String {
    let mut s = String::from("N,l,m,k,gap,defect,coeff_dev,triangle_bound\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.local_dim,
            r.l,
            r.m,
            r.k,
            cell(r.gap),
            cell(r.defect),
            cell(r.coeff_dev),
            cell(r.triangle_bound)
        ));
    }
    for f in fits {
        match (f.slope, f.intercept, f.residual) {
            (Some(a), Some(b), Some(c)) => s.push_str(&format!(
                "# fit l={} m={} k={} points={} slope={a} intercept={b} residual={c}\n",
                f.l, f.m, f.k, f.points
            )),
            _ => s.push_str(&format!(
                "# fit l={} m={} k={} points={} unavailable: {}\n",
                f.l,
                f.m,
                f.k,
                f.points,
                f.note.as_deref().unwrap_or("")
            )),
        }
    }
    s
}

#[derive(Serialize)]
struct CapacityRow {
    #[serde(rename = "N")]
    local_dim: usize,
    l: usize,
    m: usize,
    k: usize,
    psi_lower: f64,
    psi_upper: f64,
    psi_certified: bool,
    psi_c_lower: f64,
    psi_c_upper: f64,
    psi_c_certified: bool,
}

pub fn capacity_table(cfg: &RunConfig, exec: Exec) -> Result<Output, CliError> {
    let cache = JwCache::new(cfg.caps);
    let cells = cells(cfg);
    let tol = cfg.tol.unwrap_or(CERTIFY_TOL);
    let scale = cfg.log_base.from_bits();
    let results = par::map(
        &cells,
        exec,
        |&(n, t)| -> tlchan_core::Result<(CapacityBracket, CapacityBracket)> {
            Ok((
                capacity_bracket(n, t, BracketTarget::Psi, &cache)?,
                capacity_bracket(n, t, BracketTarget::PsiC, &cache)?,
            ))
        },
    );
    let certify = |b: &CapacityBracket| (b.numeric_lower - b.lower).abs() <= tol && b.is_ordered();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(n, t), res) in cells.iter().zip(results) {
        let (psi, psi_c) = res?;
        let row = CapacityRow {
            local_dim: n,
            l: t.l,
            m: t.m,
            k: t.k,
            psi_lower: psi.lower * scale,
            psi_upper: psi.upper * scale,
            psi_certified: certify(&psi),
            psi_c_lower: psi_c.lower * scale,
            psi_c_upper: psi_c.upper * scale,
            psi_c_certified: certify(&psi_c),
        };
        if !(row.psi_certified && row.psi_c_certified) {
            failures.push(format!("certification fails at N={n} {t}"));
        }
        rows.push(row);
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::from(
                "N,l,m,k,psi_lower,psi_upper,psi_certified,psi_c_lower,psi_c_upper,psi_c_certified\n",
            );
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.local_dim,
                    r.l,
                    r.m,
                    r.k,
                    r.psi_lower,
                    r.psi_upper,
                    r.psi_certified,
                    r.psi_c_lower,
                    r.psi_c_upper,
                    r.psi_c_certified
                ));
            }
            s
        }
        Format::Json => json(&rows)?,
    };
    Ok(Output::with_failures(text, failures))
}
