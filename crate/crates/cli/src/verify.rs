//! `verify`: invariant checks grouped into suites, reported as JSON.

use clap::ValueEnum;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tlchan_core::channels::{psi_c_closed_form, psi_closed_form, TlChannels};
use tlchan_core::distances::{
    bures_upper, convergence_fit, diamond_lower, isometry_gap, numeric_projection_defect,
    projection_defect, tensor_gap_check,
};
use tlchan_core::entropic::{capacity_bracket, entropy, product_ensemble_bounds, BracketTarget};
use tlchan_core::jones_wenzl::{jw_projector, JwCache};
use tlchan_core::qarith::{check_admissible, defect_radicand, qdim, theta, QRational};
use tlchan_core::tensorkit::{contract_cup_right, max_asymmetry, op_norm_mat};
use tlchan_core::{AdmissibleTriple, Caps};

use crate::CliError;

/// Seed for the random states used by the channel suite.
pub const VERIFY_SEED: u64 = 0x7e51_f00d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Arith,
    Jw,
    Channels,
    Entropic,
    Distances,
    All,
}

#[derive(Serialize, Debug)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub pass: bool,
    pub max_residual: f64,
    pub checks: Vec<Check>,
}

#[derive(Serialize, Debug)]
pub struct VerifyReport {
    pub pass: bool,
    pub seed: u64,
    pub tolerance_override: Option<f64>,
    pub suites: Vec<SuiteReport>,
}

struct Collector {
    tol: Option<f64>,
    checks: Vec<Check>,
}

impl Collector {
    fn new(tol: Option<f64>) -> Self {
        Collector {
            tol,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, residual: f64, default_tol: f64) {
        let tolerance = self.tol.unwrap_or(default_tol);
        self.checks.push(Check {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    }

    fn finish(self, suite: &'static str) -> SuiteReport {
        let max_residual = self.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        SuiteReport {
            suite,
            pass: self.checks.iter().all(|c| c.pass),
            max_residual,
            checks: self.checks,
        }
    }
}

fn tri(l: usize, m: usize, k: usize) -> AdmissibleTriple {
    check_admissible(l, m, k).expect("admissible")
}

fn arith(c: &mut Collector) -> Result<(), CliError> {
    let mut recurrence = 0usize;
    let mut oracle = 0.0f64;
    for n in 2..=10u64 {
        for j in 2..=30usize {
            let lhs = qdim(n, j + 1)?.into_inner();
            let rhs = qdim(n, j)?.into_inner() * n - qdim(n, j - 1)?.into_inner();
            recurrence += usize::from(lhs != rhs);
        }
        if n >= 3 {
            let nf = n as f64;
            let q = (nf + (nf * nf - 4.0).sqrt()) / 2.0;
            for j in 1..=20usize {
                let expect = (q.powi(j as i32) - q.powi(-(j as i32))) / (q - q.recip());
                let got = qdim(n, j)?.to_f64();
                oracle = oracle.max((got - expect).abs() / expect);
            }
        }
    }
    c.check(
        "quantum integer recurrence mismatches",
        recurrence as f64,
        0.0,
    );
    c.check("quantum integer closed form (relative)", oracle, 1e-12);

    let (mut sym, mut identity, mut negative, mut simple) = (0usize, 0usize, 0usize, 0usize);
    for n in 2..=9u64 {
        for t in AdmissibleTriple::all_up_to(6) {
            sym += usize::from(theta(n, t.l, t.m, t.k)? != theta(n, t.m, t.l, t.k)?);
            let rad = defect_radicand(n, &t)?;
            negative += usize::from(rad.is_negative());
            let big = qdim(n, t.k + 1)?.into_inner() * num_bigint::BigUint::from(n).pow(t.r as u32);
            let scale = QRational::new(BigInt::from(big), BigInt::from(1));
            let th = theta(n, t.l, t.m, t.k)?;
            identity +=
                usize::from((&rad * &scale).as_ratio() + th.as_ratio() != *scale.as_ratio());
        }
        let r = defect_radicand(n, &tri(2, 1, 1))?;
        simple += usize::from(r != QRational::new(BigInt::from(1), BigInt::from(n * n)));
    }
    c.check("theta symmetry mismatches", sym as f64, 0.0);
    c.check("defect identity mismatches", identity as f64, 0.0);
    c.check("negative radicands", negative as f64, 0.0);
    c.check("(2,1,1) radicand is 1/N^2 mismatches", simple as f64, 0.0);
    Ok(())
}

fn jones_wenzl(c: &mut Collector, caps: &Caps) -> Result<(), CliError> {
    let (mut idem, mut trace, mut cup, mut asym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (n_dim, n_top) in [(2usize, 8usize), (3, 5), (4, 4), (5, 4)] {
        for n in 1..=n_top {
            let p = jw_projector(n_dim, n, caps)?;
            let m = p.matrix();
            idem = idem.max(op_norm_mat(&(m * m - m)));
            trace = trace.max((m.trace() - qdim(n_dim as u64, n + 1)?.to_f64()).abs());
            asym = asym.max(max_asymmetry(m));
            for pre in 0..n.saturating_sub(1) {
                cup = cup.max(op_norm_mat(&contract_cup_right(m, n_dim, pre, n - pre - 2)));
            }
        }
    }
    c.check("idempotency", idem, 1e-9);
    c.check("trace equals dimension", trace, 1e-6);
    c.check("cup annihilation", cup, 1e-9);
    c.check("symmetry", asym, 1e-12);
    Ok(())
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
    let p = &a * a.transpose();
    let t = p.trace();
    p / t
}

fn small_grid() -> Vec<(usize, AdmissibleTriple)> {
    [3usize, 4]
        .iter()
        .flat_map(|&n| {
            AdmissibleTriple::all_up_to(4)
                .into_iter()
                .map(move |t| (n, t))
        })
        .collect()
}

fn channels(c: &mut Collector, cache: &JwCache) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let (mut alpha, mut gamma, mut closed, mut neg, mut tp) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (n, t) in small_grid() {
        let ch = TlChannels::build(n, t, cache)?;
        alpha = alpha.max(ch.alpha.dilation().isometry_defect());
        gamma = gamma.max(ch.gamma.dilation().isometry_defect());
        let basis = cache.basis(n, t.k)?;
        let rho = random_density(&mut rng, basis.dim());
        let a = psi_closed_form(n, t, &basis, &rho, cache.caps())?;
        closed = closed.max((ch.psi().apply(&rho)?.matrix() - a.matrix()).amax());
        let b = psi_c_closed_form(n, t, &basis, &rho, cache.caps())?;
        closed = closed.max((ch.psi_c().apply(&rho)?.matrix() - b.matrix()).amax());
        for chan in [ch.phi(), ch.phi_c(), ch.psi(), ch.psi_c()] {
            let rep = chan.certify_cptp()?;
            neg = neg.max(-rep.min_eigenvalue);
            tp = tp.max(rep.tp_residual);
        }
    }
    c.check("alpha isometry", alpha, 1e-9);
    c.check("gamma isometry", gamma, 1e-12);
    c.check("approximating channel closed forms", closed, 1e-12);
    c.check("Choi negativity", neg.max(0.0), 1e-9);
    c.check("trace preservation", tp, 1e-9);
    Ok(())
}

fn entropic(c: &mut Collector, cache: &JwCache) -> Result<(), CliError> {
    let (mut mixed, mut pure) = (0.0f64, 0.0f64);
    for d in 1..=64usize {
        mixed =
            mixed.max((entropy(&(DMatrix::identity(d, d) / d as f64))? - (d as f64).log2()).abs());
        let mut e = DMatrix::zeros(d, d);
        e[(0, 0)] = 1.0;
        pure = pure.max(entropy(&e)?.abs());
    }
    c.check("entropy of maximally mixed states", mixed, 1e-12);
    c.check("entropy of pure states", pure, 1e-10);

    let mut ensemble = 0.0f64;
    for n in 3..=8usize {
        for (t, target) in [
            (tri(2, 1, 1), BracketTarget::Psi),
            (tri(1, 1, 2), BracketTarget::Psi),
            (tri(1, 2, 1), BracketTarget::PsiC),
        ] {
            let b = capacity_bracket(n, t, target, cache)?;
            ensemble = ensemble.max((b.numeric_lower - b.lower).abs());
        }
    }
    c.check("explicit ensemble coherent information", ensemble, 1e-9);

    let mut product = 0.0f64;
    for n in [3usize, 4, 5] {
        for d in [2usize, 3] {
            let b = product_ensemble_bounds(n, tri(2, 1, 1), d, cache)?;
            product = product.max((b.numeric_lower - b.lower).abs());
        }
    }
    c.check("product ensemble coherent information", product, 1e-9);
    Ok(())
}

fn distances(c: &mut Collector, cache: &JwCache) -> Result<(), CliError> {
    let (mut defect, mut triangle, mut left, mut right) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (n, t) in small_grid() {
        defect =
            defect.max((numeric_projection_defect(n, t, cache)? - projection_defect(n, t)?).abs());
        let g = isometry_gap(n, t, cache)?;
        triangle = triangle.max(g.gap - g.triangle_bound);
        let ch = TlChannels::build(n, t, cache)?;
        let beta = bures_upper(&ch.phi(), &ch.psi())?;
        left = left.max(diamond_lower(&ch.phi(), &ch.psi())? / 2.0 - beta);
        right = right.max(beta - g.gap);
    }
    c.check("projection defect closed form", defect, 1e-9);
    c.check("triangle bound excess", triangle.max(0.0), 1e-10);
    c.check("diamond/Bures sandwich excess", left.max(0.0), 1e-10);
    c.check("Bures/gap excess", right.max(0.0), 1e-10);

    let t = tri(2, 1, 1);
    let mut tensor = 0.0f64;
    let mut pts = Vec::new();
    for n in 3..=12usize {
        let g = isometry_gap(n, t, cache)?.gap;
        pts.push((n as f64, g));
        if n <= 5 {
            tensor = tensor.max((tensor_gap_check(n, t, 2, cache)? - g).abs());
        }
    }
    c.check("tensored gap", tensor, 1e-10);
    let slope = convergence_fit(&pts)?.slope;
    c.check(
        "(2,1,1) slope distance from -1 beyond 0.15",
        ((slope + 1.0).abs() - 0.15).max(0.0),
        0.0,
    );
    Ok(())
}

pub fn run(suite: Suite, tol: Option<f64>, caps: Caps) -> Result<VerifyReport, CliError> {
    let cache = JwCache::new(caps);
    let selected: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Arith,
            Suite::Jw,
            Suite::Channels,
            Suite::Entropic,
            Suite::Distances,
        ],
        s => vec![s],
    };
    let mut suites = Vec::new();
    for s in selected {
        let mut c = Collector::new(tol);
        let name = match s {
            Suite::Arith => {
                arith(&mut c)?;
                "arith"
            }
            Suite::Jw => {
                jones_wenzl(&mut c, &caps)?;
                "jw"
            }
            Suite::Channels => {
                channels(&mut c, &cache)?;
                "channels"
            }
            Suite::Entropic => {
                entropic(&mut c, &cache)?;
                "entropic"
            }
            Suite::Distances => {
                distances(&mut c, &cache)?;
                "distances"
            }
            Suite::All => unreachable!("expanded above"),
        };
        suites.push(c.finish(name));
    }
    Ok(VerifyReport {
        pass: suites.iter().all(|s| s.pass),
        seed: VERIFY_SEED,
        tolerance_override: tol,
        suites,
    })
}
