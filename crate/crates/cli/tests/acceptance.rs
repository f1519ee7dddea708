//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every tolerance is a constant in this file.

use std::process::{Command, ExitCode};
use std::time::Instant;

use cf_interp::extension::{central_step, extend, solve_cf};
use cf_interp::fixture::{self, complex_gaussian, random_psd, random_unitary};
use cf_interp::format::ProblemFile;
use cf_interp::herglotz::{
    compose_reduced, eval_realization, eval_series, kernel_gram, kernel_toeplitz_approx,
    kernel_value, reduce, HerglotzSeries, Realization,
};
use cf_interp::linalg::{self, c64, CMatrix};
use cf_interp::toeplitz::{self, BoundSample, CoefficientSequence};

const BIN: &str = env!("CARGO_BIN_EXE_cf-interp");

const FIXTURE_COUNT: u64 = 50;
const FIXTURE_ORDER: usize = 8;
const POSITIVITY_TOL: f64 = 1e-8;
const ORACLE_TRUNCATION: usize = 256;
const ORACLE_SLACK: f64 = 1e-9;
const RADIUS: f64 = 0.9;
const GRID: usize = 16;
const EPS: f64 = 1e-8;
const TOL: f64 = 1e-9;
const GEOMETRIC_TOL: f64 = 1e-6;
const CENTER_TOL: f64 = 1e-12;
const CLOSURE_SEEDS: u64 = 25;
const CLOSURE_STEPS: usize = 10;
const CLOSURE_TOL: f64 = 1e-8;
const KERNEL_HORIZON: usize = 256;
const KERNEL_TOL: f64 = 1e-6;
const LIMIT_MAX_ORDER: usize = 40;
const LIMIT_TOL: f64 = 1e-3;
const RESIDUAL_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-10;
const COMPOSE_TOL: f64 = 1e-6;
const ISOMETRY_TOL: f64 = 1e-8;
const FACTOR_CASES: u64 = 100;
const SCHUR_CASES: u64 = 100;
const SCHUR_TOL: f64 = 1e-10;
const SLACK_CASES: u64 = 200;
const SLACK_TOL: f64 = 1e-9;

type Criterion = Box<dyn Fn() -> Result<Outcome, String>>;

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

fn fixture_shape(k: u64) -> (usize, usize) {
    (1 + (k % 4) as usize, 1 + ((k * 3 + k / 4) % 8) as usize)
}

fn fixtures(order: usize) -> Vec<(u64, Realization, CoefficientSequence)> {
    (0..FIXTURE_COUNT)
        .map(|k| {
            let (d, h) = fixture_shape(k);
            let (rlz, seq) = fixture::generate(k, d, h, order, false).expect("fixture");
            (k, rlz, seq)
        })
        .collect()
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn realization_positivity() -> Outcome {
    let mut min = f64::INFINITY;
    for (_, _, seq) in fixtures(FIXTURE_ORDER) {
        for r in toeplitz::positivity_profile(&seq, POSITIVITY_TOL) {
            min = min.min(r.min_eigenvalue);
        }
    }
    Outcome::new(
        min >= -POSITIVITY_TOL,
        format!("{FIXTURE_COUNT} fixtures, levels 0..={FIXTURE_ORDER}, min eigenvalue {min:.3e} >= -{POSITIVITY_TOL:e}"),
    )
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_err = 0.0f64;
    for (k, rlz, seq) in fixtures(ORACLE_TRUNCATION) {
        let phi = HerglotzSeries::new(seq, RADIUS).map_err(|e| e.to_string())?;
        let c_sq = linalg::op_norm(&rlz.c).powi(2);
        for z in fixture::random_points(&mut fixture::rng(1000 + k), GRID, RADIUS) {
            let exact = eval_realization(&rlz, z).map_err(|e| e.to_string())?;
            let approx = eval_series(&phi, z).map_err(|e| e.to_string())?.value;
            let err = linalg::op_norm(&(exact - approx));
            let r = z.norm();
            let bound =
                2.0 * c_sq * r.powi(ORACLE_TRUNCATION as i32 + 1) / (1.0 - r) + ORACLE_SLACK;
            worst_excess = worst_excess.max(err - bound);
            worst_err = worst_err.max(err);
        }
    }
    Ok(Outcome::new(
        worst_excess <= 0.0,
        format!("{FIXTURE_COUNT} fixtures x {GRID} points, max error {worst_err:.3e}, max excess over bound {worst_excess:.3e}"),
    ))
}

fn scalar_closed_forms() -> Result<Outcome, String> {
    let seq = CoefficientSequence::from_real_scalars(&[1.0, 0.5]).map_err(|e| e.to_string())?;
    let phi = solve_cf(&seq, 10, EPS, TOL).map_err(|e| e.to_string())?;
    let geo_err = worst(
        phi.seq()
            .coefficients()
            .iter()
            .enumerate()
            .map(|(n, m)| (m[(0, 0)] - c64(0.5f64.powi(n as i32), 0.0)).norm()),
    );
    let ones = CoefficientSequence::from_real_scalars(&[1.0, 1.0]).map_err(|e| e.to_string())?;
    let (_, next) = central_step(&ones, EPS, TOL).map_err(|e| e.to_string())?;
    let center_err = (next[(0, 0)] - c64(1.0 / (1.0 + EPS), 0.0)).norm();
    Ok(Outcome::new(
        geo_err <= GEOMETRIC_TOL && center_err <= CENTER_TOL,
        format!("geometric n<=10 error {geo_err:.3e} <= {GEOMETRIC_TOL:e}; all-ones center error {center_err:.3e} <= {CENTER_TOL:e}"),
    ))
}

/// Scalar and 2x2 positive data: singular realization data (few states) and
/// generic definite data (many states).
fn closure_inputs() -> Vec<CoefficientSequence> {
    let mut out = Vec::new();
    for seed in 0..CLOSURE_SEEDS {
        for d in [1, 2] {
            let h = if seed % 2 == 0 {
                1 + (seed as usize % 3)
            } else {
                8
            };
            let (_, seq) = fixture::generate(5000 + seed, d, h, 2 + (seed as usize % 3), false)
                .expect("fixture");
            out.push(seq);
        }
    }
    out
}

fn extension_closure() -> Result<Outcome, String> {
    let mut min = f64::INFINITY;
    let inputs = closure_inputs();
    for seq in &inputs {
        let ext = extend(seq, CLOSURE_STEPS, EPS, TOL, None).map_err(|e| e.to_string())?;
        if ext.coefficients()[..seq.len()] != *seq.coefficients() {
            return Ok(Outcome::new(false, "input coefficients were modified"));
        }
        for r in toeplitz::positivity_profile(&ext, CLOSURE_TOL) {
            min = min.min(r.min_eigenvalue);
        }
    }
    Ok(Outcome::new(
        min >= -CLOSURE_TOL,
        format!("{} inputs extended {CLOSURE_STEPS} steps, min prefix eigenvalue {min:.3e} >= -{CLOSURE_TOL:e}", inputs.len()),
    ))
}

fn kernel_positivity() -> Result<Outcome, String> {
    let mut min = f64::INFINITY;
    let mut count = 0;
    let inputs = fixtures(FIXTURE_ORDER)
        .into_iter()
        .map(|(_, _, s)| s)
        .chain(closure_inputs());
    for (k, seq) in inputs.enumerate() {
        let phi = solve_cf(&seq, KERNEL_HORIZON, EPS, TOL).map_err(|e| e.to_string())?;
        let pts = fixture::random_points(&mut fixture::rng(2000 + k as u64), GRID, RADIUS);
        let g = kernel_gram(&phi, &pts, None, KERNEL_TOL).map_err(|e| e.to_string())?;
        min = min.min(g.report.min_eigenvalue);
        count += 1;
    }
    Ok(Outcome::new(
        min >= -KERNEL_TOL,
        format!("{count} solutions to index {KERNEL_HORIZON}, {GRID} points, min Gram eigenvalue {min:.3e} >= -{KERNEL_TOL:e}"),
    ))
}

fn kernel_limit_convergence() -> Result<Outcome, String> {
    let ones = CoefficientSequence::from_real_scalars(&[1.0; LIMIT_MAX_ORDER + 1])
        .map_err(|e| e.to_string())?;
    let half = c64(0.5, 0.0);
    // (Φ(z) + Φ(w)*)/(1 − z w̄) with Φ(1/2) = 3
    let exact = 8.0;
    let errs = (0..=LIMIT_MAX_ORDER)
        .map(|n| {
            kernel_toeplitz_approx(&ones, half, half, n)
                .map(|m| (m[(0, 0)] - c64(exact, 0.0)).norm())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = errs[LIMIT_MAX_ORDER];
    Ok(Outcome::new(
        monotone && last <= LIMIT_TOL,
        format!("strictly decreasing: {monotone}; error at n={LIMIT_MAX_ORDER} is {last:.3e} <= {LIMIT_TOL:e}"),
    ))
}

fn reduction_suite() -> Result<Outcome, String> {
    let mut res = 0.0f64;
    let mut ident = 0.0f64;
    let mut min_t = f64::INFINITY;
    let mut compose = 0.0f64;
    let mut kernel = 0.0f64;
    for (k, _, seq) in fixtures(FIXTURE_ORDER) {
        let rf = reduce(&seq, TOL).map_err(|e| format!("fixture {k}: {e}"))?;
        res = res.max(worst(rf.residuals.iter().copied()));
        let phi = HerglotzSeries::new(seq.clone(), RADIUS).map_err(|e| e.to_string())?;
        let small = match rf.reduced_sequence() {
            Some(t) => {
                ident = ident.max((&rf.t_coeffs[0] - linalg::identity(rf.rank())).norm());
                min_t = min_t.min(toeplitz::assemble(&t).min_eigenvalue());
                Some(HerglotzSeries::new(t, RADIUS).map_err(|e| e.to_string())?)
            }
            None => None,
        };
        let pts = fixture::random_points(&mut fixture::rng(3000 + k), GRID, RADIUS);
        for (i, &z) in pts.iter().enumerate() {
            let lhs = eval_series(&phi, z).map_err(|e| e.to_string())?.value;
            let rhs = compose_reduced(&rf, small.as_ref(), z).map_err(|e| e.to_string())?;
            compose = compose.max(linalg::op_norm(&(lhs - rhs)));
            let w = pts[(i + 1) % pts.len()];
            let big = kernel_value(&phi, z, w).map_err(|e| e.to_string())?.value;
            let lifted = match &small {
                Some(s) => rf.lift(&kernel_value(s, z, w).map_err(|e| e.to_string())?.value),
                None => CMatrix::zeros(seq.block_dim(), seq.block_dim()),
            };
            kernel = kernel.max(linalg::op_norm(&(big - lifted)));
        }
    }
    let pass = res <= RESIDUAL_TOL
        && ident <= IDENTITY_TOL
        && min_t >= -POSITIVITY_TOL
        && compose <= COMPOSE_TOL
        && kernel <= COMPOSE_TOL;
    Ok(Outcome::new(
        pass,
        format!(
            "residual {res:.2e} <= {RESIDUAL_TOL:e}; t_0 - I {ident:.2e} <= {IDENTITY_TOL:e}; reduced min eigenvalue {min_t:.2e}; compose {compose:.2e} and kernel {kernel:.2e} <= {COMPOSE_TOL:e}"
        ),
    ))
}

/// A second minimal factor built independently: `G = Σ W` with a random
/// unitary `W` and singular values in `[0.5, 1.5]`, so `A = G*G`.
fn factor_suite() -> Result<Outcome, String> {
    let (mut iso, mut coiso, mut fit) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..FACTOR_CASES {
        let mut rng = fixture::rng(4000 + k);
        let n = 1 + (k % 8) as usize;
        let r = 1 + (k as usize / 8) % n;
        let w = random_unitary(&mut rng, n);
        let left = random_unitary(&mut rng, r);
        let sigma: Vec<f64> = (0..r).map(|i| 0.5 + (i as f64 + 0.5) / r as f64).collect();
        let g = &left * CMatrix::from_fn(r, n, |i, j| w[(i, j)] * sigma[i]);
        let a = linalg::hermitian_part(&(g.adjoint() * &g));
        let min = linalg::minimal_factorization(&a, linalg::DEFAULT_RANK_TOL)
            .map_err(|e| e.to_string())?;
        if min.rank != r {
            return Ok(Outcome::new(
                false,
                format!("case {k}: rank {} != {r}", min.rank),
            ));
        }
        let v = linalg::connecting_isometry(&min, &g, ISOMETRY_TOL).map_err(|e| e.to_string())?;
        iso = iso.max(linalg::isometry_defect(&v));
        coiso = coiso.max(linalg::coisometry_defect(&v));
        fit = fit.max(linalg::op_norm(&(&v * &min.t - &g)));
    }
    Ok(Outcome::new(
        iso <= ISOMETRY_TOL && coiso <= ISOMETRY_TOL && fit <= ISOMETRY_TOL,
        format!("{FACTOR_CASES} matrices: |V*V-I| {iso:.2e}, |VV*-I| {coiso:.2e}, |VT-T'| {fit:.2e} <= {ISOMETRY_TOL:e}"),
    ))
}

fn schur_suite() -> Result<Outcome, String> {
    let mut ratio = 0.0f64;
    for k in 0..SCHUR_CASES {
        let mut rng = fixture::rng(6000 + k);
        let n = 2 + (k % 9) as usize;
        let split = 1 + (k as usize / 9) % (n - 1);
        let g = complex_gaussian(&mut rng, n, n)
            + linalg::identity(n) * c64(2.0 * (n as f64).sqrt(), 0.0);
        let s = linalg::schur_split(&g, split).map_err(|e| e.to_string())?;
        let err = linalg::op_norm(&(&g - s.reconstruct()));
        ratio = ratio.max(err / (linalg::op_norm(&g) * s.condition_number));
    }
    Ok(Outcome::new(
        ratio <= SCHUR_TOL,
        format!("{SCHUR_CASES} matrices, max error/(|G| cond) {ratio:.2e} <= {SCHUR_TOL:e}"),
    ))
}

fn slack_suite() -> Result<Outcome, String> {
    let mut min = f64::INFINITY;
    for k in 0..SLACK_CASES {
        let mut rng = fixture::rng(7000 + k);
        let d = 1 + (k % 3) as usize;
        let nb = 2 + (k as usize / 3) % 3;
        let n = d * nb;
        let a = random_psd(&mut rng, n, 1 + (k as usize * 7) % n);
        let samples: Vec<BoundSample> = (0..10)
            .map(|i| BoundSample {
                row_block: i % nb,
                col_block: (i / nb + i) % nb,
                v: fixture::complex_gaussian_vector(&mut rng, d),
                w: fixture::complex_gaussian_vector(&mut rng, d),
            })
            .collect();
        let slacks = toeplitz::cross_block_bound_check_dense(&a, d, &samples, SLACK_TOL)
            .map_err(|e| e.to_string())?;
        min = min.min(slacks.into_iter().fold(f64::INFINITY, f64::min));
    }
    Ok(Outcome::new(
        min >= -SLACK_TOL,
        format!("{SLACK_CASES} matrices x 10 vector pairs, min slack {min:.3e} >= -{SLACK_TOL:e}"),
    ))
}

fn run_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let o = Command::new(BIN)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    Ok(o.stdout)
}

fn cli_round_trip() -> Result<Outcome, String> {
    let dir = std::env::temp_dir().join(format!("cf-interp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut files = 0;
    for k in 0..FIXTURE_COUNT {
        let (d, h) = fixture_shape(k);
        let seed = k.to_string();
        let args = [
            "generate",
            &d.to_string(),
            &h.to_string(),
            "8",
            "--seed",
            &seed,
        ];
        let first = run_bin(&args)?;
        let second = run_bin(&args)?;
        if first != second {
            return Ok(Outcome::new(
                false,
                format!("generate is not deterministic for seed {k}"),
            ));
        }
        let text = String::from_utf8(first.clone()).map_err(|e| e.to_string())?;
        let parsed = ProblemFile::parse(&text).map_err(|e| e.to_string())?;
        if parsed.to_canonical_string().map_err(|e| e.to_string())? != text {
            return Ok(Outcome::new(
                false,
                format!("seed {k}: serialize(parse(file)) differs"),
            ));
        }
        let expected = fixture::generate(k, d, h, 8, false)
            .map_err(|e| e.to_string())?
            .1;
        if parsed.to_sequence().map_err(|e| e.to_string())? != expected {
            return Ok(Outcome::new(
                false,
                format!("seed {k}: parsed coefficients differ from the generator"),
            ));
        }
        files += 1;
        if k % 10 == 0 {
            let path = dir.join(format!("fx{k}.json"));
            std::fs::write(&path, &first).map_err(|e| e.to_string())?;
            let p = path.to_str().unwrap();
            for cmd in [
                vec!["solve", p, "--json", "--seed", "3"],
                vec!["reduce", p],
                vec!["check", p, "--json"],
            ] {
                if run_bin(&cmd)? != run_bin(&cmd)? {
                    return Ok(Outcome::new(false, format!("{cmd:?} is not deterministic")));
                }
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Outcome::new(
        true,
        format!("{files} generated files byte-identical after parse+serialize; generate/solve/reduce/check repeat byte-identically"),
    ))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "realization positivity",
            Box::new(|| Ok(realization_positivity())),
        ),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("scalar closed forms", Box::new(scalar_closed_forms)),
        ("extension closure", Box::new(extension_closure)),
        ("kernel positivity", Box::new(kernel_positivity)),
        (
            "kernel limit convergence",
            Box::new(kernel_limit_convergence),
        ),
        ("reduction suite", Box::new(reduction_suite)),
        ("factor suite", Box::new(factor_suite)),
        ("schur ldu", Box::new(schur_suite)),
        ("cross-block bound", Box::new(slack_suite)),
        ("cli round trip and determinism", Box::new(cli_round_trip)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {name}: {} ({:.1}s)",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
