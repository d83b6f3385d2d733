//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tlchan_core::channels::{psi_c_closed_form, psi_closed_form, TlChannels};
use tlchan_core::distances::{
    bures_upper, convergence_fit, diamond_lower, gap_sweep, isometry_gap,
    numeric_projection_defect, projection_defect, tensor_gap_check,
};
use tlchan_core::entropic::{capacity_bracket, entropy, product_ensemble_bounds, BracketTarget};
use tlchan_core::jones_wenzl::{jw_projector, JwCache};
use tlchan_core::par::Exec;
use tlchan_core::qarith::{check_admissible, qdim};
use tlchan_core::tensorkit::{contract_cup_right, op_norm_mat};
use tlchan_core::{AdmissibleTriple, Caps, Result};

const GRID_N: [usize; 3] = [3, 4, 5];
const GRID_LM: usize = 5;
const SEED: u64 = 0x00ac_ce97;
/// Upper bound on `N · gap` over the rate sweep.
const RATE_CONSTANT: f64 = 1.5;
const SANDWICH_SLACK: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn grid() -> Vec<(usize, AdmissibleTriple)> {
    GRID_N
        .iter()
        .flat_map(|&n| {
            AdmissibleTriple::all_up_to(GRID_LM)
                .into_iter()
                .map(move |t| (n, t))
        })
        .collect()
}

fn tri(l: usize, m: usize, k: usize) -> AdmissibleTriple {
    check_admissible(l, m, k).expect("admissible")
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
    let p = &a * a.transpose();
    let t = p.trace();
    p / t
}

fn jones_wenzl_suite() -> Result<Outcome> {
    let caps = Caps::default();
    let (mut idem, mut trace, mut cup) = (0.0f64, 0.0f64, 0.0f64);
    let mut covered = Vec::new();
    for n_dim in [2usize, 3, 4, 5] {
        let mut n = 1;
        while (n_dim as u128).pow(n as u32) <= caps.max_square as u128 {
            let p = jw_projector(n_dim, n, &caps)?;
            let m = p.matrix();
            idem = idem.max(op_norm_mat(&(m * m - m)));
            let expect = qdim(n_dim as u64, n + 1)?.to_f64();
            trace = trace.max((m.trace() - expect).abs());
            for pre in 0..n.saturating_sub(1) {
                let c = contract_cup_right(m, n_dim, pre, n - pre - 2);
                cup = cup.max(op_norm_mat(&c));
            }
            n += 1;
        }
        covered.push(format!("N={n_dim}:n<={}", n - 1));
    }
    let pass = idem <= 1e-9 && trace <= 1e-6 && cup <= 1e-9;
    Ok(Outcome::new(
        pass,
        format!(
            "{}; idempotency {idem:.2e}, trace {trace:.2e}, cup {cup:.2e}",
            covered.join(" ")
        ),
    ))
}

fn isometry_suite(cache: &JwCache) -> Result<Outcome> {
    let (mut a_err, mut g_err) = (0.0f64, 0.0f64);
    for (n, t) in grid() {
        let ch = TlChannels::build(n, t, cache)?;
        a_err = a_err.max(ch.alpha.dilation().isometry_defect());
        g_err = g_err.max(ch.gamma.dilation().isometry_defect());
    }
    Ok(Outcome::new(
        a_err <= 1e-9 && g_err <= 1e-12,
        format!(
            "{} points; alpha {a_err:.2e}, gamma {g_err:.2e}",
            grid().len()
        ),
    ))
}

fn defect_suite(cache: &JwCache) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (n, t) in grid() {
        let exact = projection_defect(n, t)?;
        let numeric = numeric_projection_defect(n, t, cache)?;
        worst = worst.max((exact - numeric).abs());
    }
    Ok(Outcome::new(
        worst <= 1e-9,
        format!("max |numeric - exact| {worst:.2e}"),
    ))
}

fn psi_closed_form_suite(cache: &JwCache) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for (n, t) in grid() {
        let ch = TlChannels::build(n, t, cache)?;
        let basis = cache.basis(n, t.k)?;
        let rho = random_density(&mut rng, basis.dim());
        let direct = ch.psi().apply(&rho)?;
        let closed = psi_closed_form(n, t, &basis, &rho, cache.caps())?;
        worst = worst.max((direct.matrix() - closed.matrix()).amax());
        let direct = ch.psi_c().apply(&rho)?;
        let closed = psi_c_closed_form(n, t, &basis, &rho, cache.caps())?;
        worst = worst.max((direct.matrix() - closed.matrix()).amax());
    }
    Ok(Outcome::new(
        worst <= 1e-12,
        format!("max entry deviation {worst:.2e} (seed {SEED:#x})"),
    ))
}

fn rate_suite(cache: &JwCache) -> Result<Outcome> {
    let t = tri(2, 1, 1);
    let points: Vec<_> = (3..=12usize).map(|n| (n, t)).collect();
    let reports = gap_sweep(&points, cache, Exec::Parallel)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let defect_err = reports
        .iter()
        .map(|r| (r.defect - 1.0 / r.local_dim as f64).abs())
        .fold(0.0, f64::max);
    let fit = convergence_fit(
        &reports
            .iter()
            .map(|r| (r.local_dim as f64, r.gap))
            .collect::<Vec<_>>(),
    )?;
    let scaled = reports
        .iter()
        .map(|r| r.local_dim as f64 * r.gap)
        .fold(0.0, f64::max);
    let pass =
        defect_err <= 1e-12 && (-1.15..=-0.85).contains(&fit.slope) && scaled <= RATE_CONSTANT;
    Ok(Outcome::new(
        pass,
        format!(
            "defect err {defect_err:.2e}, slope {:.4}, max N*gap {scaled:.4} (<= {RATE_CONSTANT})",
            fit.slope
        ),
    ))
}

fn ensemble_suite(cache: &JwCache) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in 3..=8usize {
        for (t, target) in [
            (tri(2, 1, 1), BracketTarget::Psi),
            (tri(1, 1, 2), BracketTarget::Psi),
            (tri(1, 2, 1), BracketTarget::PsiC),
        ] {
            let b = capacity_bracket(n, t, target, cache)?;
            let free = match target {
                BracketTarget::Psi => t.out_free(),
                BracketTarget::PsiC => t.env_free(),
            };
            let expect = free as f64 * (n as f64 - 1.0).log2();
            worst = worst.max((b.numeric_lower - expect).abs());
            ok &= b.certified && b.is_ordered() && (b.lower - expect).abs() <= 1e-12;
        }
    }
    Ok(Outcome::new(
        ok && worst <= 1e-9,
        format!("max |coherent info - closed form| {worst:.2e}"),
    ))
}

fn product_suite(cache: &JwCache) -> Result<Outcome> {
    let t = tri(2, 1, 1);
    let (mut lower_err, mut gap_err) = (0.0f64, 0.0f64);
    let mut ok = true;
    for n in [3usize, 4, 5] {
        let gap = isometry_gap(n, t, cache)?.gap;
        for d_aux in [2usize, 3] {
            let b = product_ensemble_bounds(n, t, d_aux, cache)?;
            let expect = (n as f64 - 1.0).log2() + (d_aux as f64).log2();
            lower_err = lower_err.max((b.numeric_lower - expect).abs());
            ok &= b.certified && b.is_ordered();
            gap_err = gap_err.max((tensor_gap_check(n, t, d_aux, cache)? - gap).abs());
        }
    }
    Ok(Outcome::new(
        ok && lower_err <= 1e-9 && gap_err <= 1e-10,
        format!("lower bound err {lower_err:.2e}, tensored gap err {gap_err:.2e}"),
    ))
}

fn sandwich_suite(cache: &JwCache) -> Result<Outcome> {
    let mut worst_left = f64::NEG_INFINITY;
    let mut worst_right = f64::NEG_INFINITY;
    let (mut min_eig, mut tp) = (0.0f64, 0.0f64);
    for (n, t) in grid() {
        let ch = TlChannels::build(n, t, cache)?;
        let gap = isometry_gap(n, t, cache)?.gap;
        for (a, b) in [(ch.phi(), ch.psi()), (ch.phi_c(), ch.psi_c())] {
            let beta = bures_upper(&a, &b)?;
            let dl = diamond_lower(&a, &b)?;
            worst_left = worst_left.max(dl / 2.0 - beta);
            worst_right = worst_right.max(beta - gap);
        }
        for c in [ch.phi(), ch.phi_c(), ch.psi(), ch.psi_c()] {
            let rep = c.certify_cptp()?;
            min_eig = min_eig.min(rep.min_eigenvalue);
            tp = tp.max(rep.tp_residual);
        }
    }
    let pass = worst_left <= SANDWICH_SLACK
        && worst_right <= SANDWICH_SLACK
        && min_eig >= -1e-9
        && tp <= 1e-9;
    Ok(Outcome::new(
        pass,
        format!(
            "max(dl/2 - bures) {worst_left:.2e}, max(bures - gap) {worst_right:.2e}, min Choi eig {min_eig:.2e}, TP {tp:.2e}"
        ),
    ))
}

fn entropy_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut mixed, mut pure) = (0.0f64, 0.0f64);
    for d in 1..=64usize {
        let h = entropy(&(DMatrix::<f64>::identity(d, d) / d as f64))?;
        mixed = mixed.max((h - (d as f64).log2()).abs());
        let v = DVector::from_fn(d, |_, _| rng.gen::<f64>() - 0.5);
        let v = &v / v.norm();
        pure = pure.max(entropy(&(&v * v.transpose()))?.abs());
        let mut e = DMatrix::zeros(d, d);
        e[(d - 1, d - 1)] = 1.0;
        pure = pure.max(entropy(&e)?.abs());
    }
    Ok(Outcome::new(
        mixed <= 1e-12 && pure <= 1e-10,
        format!("mixed err {mixed:.2e}, pure entropy {pure:.2e}"),
    ))
}

fn run(
    id: usize,
    title: &str,
    limit: Option<Duration>,
    f: impl FnOnce() -> Result<Outcome>,
) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match outcome {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            pass = false;
            detail.push_str(&format!("; exceeded {}s", limit.as_secs()));
        }
    }
    println!(
        "criterion {id}: {} {title}: {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn main() -> ExitCode {
    let cache = JwCache::default();
    let results = [
        run(
            1,
            "Jones-Wenzl projectors",
            Some(Duration::from_secs(60)),
            jones_wenzl_suite,
        ),
        run(2, "isometries", None, || isometry_suite(&cache)),
        run(3, "closed-form projection defect", None, || {
            defect_suite(&cache)
        }),
        run(4, "closed-form approximating channel", None, || {
            psi_closed_form_suite(&cache)
        }),
        run(
            5,
            "gap rate for (2,1,1)",
            Some(Duration::from_secs(300)),
            || rate_suite(&cache),
        ),
        run(6, "explicit ensembles and brackets", None, || {
            ensemble_suite(&cache)
        }),
        run(7, "product ensembles and tensored gap", None, || {
            product_suite(&cache)
        }),
        run(8, "distance sandwich and CPTP", None, || {
            sandwich_suite(&cache)
        }),
        run(9, "entropy oracle", None, entropy_suite),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
