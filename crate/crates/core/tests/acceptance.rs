//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use kapitsa_core::cli::{figure_rows, FigureSpec, RunConfig};
use kapitsa_core::kapitsa::{coefficient_from, ConsistencyMode};
use kapitsa_core::kernel::{idx, Kernel};
use kapitsa_core::moments::{MomentEngine, MomentIndex, QuadratureConfig};
use kapitsa_core::oracle;
use kapitsa_core::solver::Solver;
use kapitsa_core::spectrum::{SpectrumMode, SpectrumParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const GAMMAS: [f64; 3] = [1.0, 3.0, 10.0];
const W0S: [f64; 3] = [1.0, 5.0, 20.0];
const KS: [f64; 3] = [0.1, 1.0, 5.0];

type Outcome = Result<String, String>;

fn engine(g: f64, w0: f64) -> MomentEngine {
    MomentEngine::new(g, SpectrumParams::bogoliubov(w0).unwrap(), QuadratureConfig::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn identity_suite() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut at_zero = 0.0f64;
    for g in GAMMAS {
        for w0 in W0S {
            let e = engine(g, w0);
            let kern = Kernel::new(&e);
            let (z1, z2) = kern.identity_residuals(0.0).map_err(|e| e.to_string())?;
            let r0 = kern.reduced(0.0).map_err(|e| e.to_string())?;
            at_zero = at_zero.max(z1).max(z2).max(r0.a.abs()).max(r0.d.abs());
            for k in KS {
                let (r1, r2) = kern.identity_residuals(k).map_err(|e| e.to_string())?;
                worst = worst.max(r1).max(r2);
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && at_zero == 0.0 && secs <= 30.0,
        format!("max residual {worst:.2e} (tol 1e-8), at k=0 {at_zero:e} (must be 0), {secs:.2} s (limit 30 s)"),
    )
}

fn reductions() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let g = rng.random_range(1.0..10.0);
        let w0 = rng.random_range(0.5..20.0);
        let k = rng.random_range(0.05..5.0);
        let e = engine(g, w0);
        for i in [idx::j11(g), idx::j12(g), idx::j21(g), idx::j22(g)] {
            let t = e.t(MomentIndex { m: i.m - 2.0 * g, ..i }, k).unwrap().value;
            worst = worst.max(rel(e.j(i, k, 0.0).unwrap().value, t)).max(rel(e.j(i, 0.0, k).unwrap().value, t));
        }
    }
    verdict(worst <= 1e-9, format!("max relative deviation {worst:.2e} over 10 points x 4 indices (tol 1e-9)"))
}

fn determinant() -> Outcome {
    let mut worst = 0.0f64;
    for g in GAMMAS {
        for w0 in W0S {
            let e = engine(g, w0);
            let kern = Kernel::new(&e);
            for k in KS {
                let b = kern.bundle(k).map_err(|e| e.to_string())?;
                let direct = b.lambda_mat[0][0] * b.lambda_mat[1][1] - b.lambda_mat[0][1] * b.lambda_mat[1][0];
                let via_omega = k * k * b.omega;
                worst = worst.max(rel(direct.re, via_omega)).max(direct.im.abs() / direct.norm());
            }
        }
    }
    verdict(worst <= 1e-9, format!("max |det - k^2 omega| relative {worst:.2e} (tol 1e-9)"))
}

fn oracles() -> Outcome {
    let mut worst = 0.0f64;
    for g in GAMMAS {
        for w0 in W0S {
            let e = MomentEngine::new(g, SpectrumParams::phonon(w0).unwrap(), QuadratureConfig::default()).unwrap();
            for (a, b) in oracle::scalar_pairs(e.scalars(), &oracle::phonon_scalars(g, w0)) {
                worst = worst.max(rel(a, b));
            }
        }
        let e = MomentEngine::new(g, SpectrumParams::free(), QuadratureConfig::default()).unwrap();
        for (a, b) in oracle::scalar_pairs(e.scalars(), &oracle::free_scalars(g)) {
            worst = worst.max(rel(a, b));
        }
    }
    verdict(worst <= 1e-10, format!("max relative deviation {worst:.2e} over phonon and free modes (tol 1e-10)"))
}

fn pole_elimination() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, w0) in [(1.0, 1.0), (3.0, 10.0)] {
        let e = engine(g, w0);
        let s = Solver::new(&e);
        let r0 = |eps: f64| (s.zeroth_at(1e-4, eps).unwrap().0 / s.zeroth_at(1e-2, eps).unwrap().0).abs();
        let (b0, p0) = (r0(s.eps0()), r0(1.01 * s.eps0()));
        let e1 = s.eps1().map_err(|e| e.to_string())?;
        let r1 = |eps: f64| {
            (s.first_at(1e-4, eps, &e1.zeroth).unwrap().0 / s.first_at(1e-2, eps, &e1.zeroth).unwrap().0).abs()
        };
        let (b1, p1) = (r1(e1.eps1), r1(1.01 * e1.eps1));
        for (order, b, p) in [(0, b0, p0), (1, b1, p1)] {
            let good = b < 10.0 && p > 50.0;
            ok &= good;
            parts.push(format!(
                "({g},{w0}) order {order}: {b:.3} (<10), perturbed {p:.3} (>50){}",
                if good { "" } else { " <- fails" }
            ));
        }
    }
    verdict(ok, parts.join("; "))
}

fn eps0_paths() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for g in GAMMAS {
        for w0 in W0S {
            for mode in [SpectrumMode::Bogoliubov, SpectrumMode::Phonon] {
                let e = MomentEngine::new(g, SpectrumParams::new(mode, w0).unwrap(), QuadratureConfig::default()).unwrap();
                let p = Solver::new(&e).eps0_paths().map_err(|e| e.to_string())?;
                worst = worst.max(rel(p.t_path, p.g_path));
                count += 1;
            }
        }
        let e = MomentEngine::new(g, SpectrumParams::free(), QuadratureConfig::default()).unwrap();
        let p = Solver::new(&e).eps0_paths().map_err(|e| e.to_string())?;
        worst = worst.max(rel(p.t_path, p.g_path));
        count += 1;
    }
    verdict(worst <= 1e-12, format!("max relative disagreement {worst:.2e} at {count} points (tol 1e-12)"))
}

fn curves(rows: &[(String, f64, f64)]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (label, x, c) in rows {
        match out.last_mut() {
            Some((l, v)) if l == label => v.push((*x, *c)),
            _ => out.push((label.clone(), vec![(*x, *c)])),
        }
    }
    out
}

fn increasing(v: &[(f64, f64)]) -> bool {
    v.windows(2).all(|w| w[1].1 > w[0].1)
}

fn figure_trends() -> Outcome {
    let t0 = Instant::now();
    let cfg = RunConfig::resolve(&Default::default(), 0).unwrap();
    let mut data = Vec::new();
    for id in 1..=4 {
        let spec = FigureSpec::new(id, 100).unwrap();
        data.push(curves(&figure_rows(&cfg, &spec).map_err(|e| e.to_string())?));
    }
    let secs = t0.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    // Decrease in gamma: along fig1 curves, and across fig2 and fig4 curves at equal x.
    for (label, v) in &data[0] {
        if !v.windows(2).all(|w| w[1].1 < w[0].1) {
            failures.push(format!("fig1 {label} not decreasing in gamma"));
        }
    }
    for (fig, d) in [(2, &data[1]), (4, &data[3])] {
        for j in 0..d[0].1.len() {
            if !(d[1].1[j].1 < d[0].1[j].1 && d[2].1[j].1 < d[1].1[j].1) {
                failures.push(format!("fig{fig} x={} not decreasing across gamma", d[0].1[j].0));
            }
        }
    }
    // Growth in q (fig2, fig3) and in w0 (fig4, and across fig1 and fig3 curves).
    for (fig, d) in [(2, &data[1]), (3, &data[2]), (4, &data[3])] {
        for (label, v) in d.iter() {
            if !increasing(v) {
                failures.push(format!("fig{fig} {label} not increasing"));
            }
        }
    }
    for (fig, d) in [(1, &data[0]), (3, &data[2])] {
        for j in 0..d[0].1.len() {
            if !(d[1].1[j].1 > d[0].1[j].1 && d[2].1[j].1 > d[1].1[j].1) {
                failures.push(format!("fig{fig} x={} not increasing across w0", d[0].1[j].0));
            }
        }
    }
    // C (1 - q) bounded on the q sweeps: it tends to a finite limit, at most twice C(q=0).
    let mut worst_growth = 0.0f64;
    for d in [&data[1], &data[2]] {
        for (_, v) in d.iter() {
            let c0 = v[0].1;
            for &(q, c) in v {
                worst_growth = worst_growth.max(c * (1.0 - q) / c0);
            }
        }
    }
    if !(worst_growth <= 2.0 * (1.0 + 1e-12)) {
        failures.push(format!("C(1-q)/C(0) reached {worst_growth}"));
    }
    if secs > 60.0 {
        failures.push(format!("regeneration took {secs:.1} s"));
    }
    let detail = format!(
        "4 figures x 3 curves x 100 points in {secs:.2} s (limit 60 s), max C(1-q)/C(q=0) = {worst_growth:.6}"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn prefactor() -> Outcome {
    let mut worst = 0.0f64;
    let mut mode_ratio_exact = true;
    for g in GAMMAS {
        let e = engine(g, 1.0);
        let c0 = coefficient_from(&e, 0.0, ConsistencyMode::DerivedChain).unwrap();
        for i in 1..=9 {
            let q = i as f64 / 10.0;
            let c = coefficient_from(&e, q, ConsistencyMode::DerivedChain).unwrap();
            worst = worst.max(rel(c / c0, (1.0 + q) / (1.0 - q)));
            let p = coefficient_from(&e, q, ConsistencyMode::Literal).unwrap();
            mode_ratio_exact &= c / p == 2.0;
        }
    }
    verdict(
        worst <= 1e-14 && mode_ratio_exact,
        format!("max relative deviation {worst:.2e} (tol 1e-14), mode ratio exactly 2: {mode_ratio_exact}"),
    )
}

fn brute_force() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for _ in 0..5 {
        let g: f64 = rng.random_range(1.0..5.0);
        let w0: f64 = rng.random_range(0.5..10.0);
        let k: f64 = rng.random_range(0.1..3.0);
        let family: [fn(f64) -> MomentIndex; 8] =
            [idx::lambda12, idx::lambda21, idx::a_hat, idx::d_hat, idx::t1_first, idx::j11, idx::j21, idx::j22];
        let pick = rng.random_range(0..family.len());
        let i = family[pick](g);
        let sp = SpectrumParams::bogoliubov(w0).unwrap();
        let e = MomentEngine::new(g, sp, QuadratureConfig::with_rel_tol(1e-12)).unwrap();
        let (got, want, k1) = if pick >= 5 {
            let k1 = rng.random_range(0.1..3.0);
            (e.j(i, k, k1).unwrap().value, oracle::nested_j(i, k, k1, g, &sp).map_err(|e| e.to_string())?, Some(k1))
        } else {
            (e.t(i, k).unwrap().value, oracle::nested_t(i, k, g, &sp).map_err(|e| e.to_string())?, None)
        };
        let r = rel(got, want);
        worst = worst.max(r);
        parts.push(format!("{i} gamma={g:.3} w0={w0:.3} k={k:.3} k1={k1:?}: {r:.1e}"));
    }
    verdict(worst <= 1e-8, format!("max {worst:.2e} (tol 1e-8) [{}]", parts.join("; ")))
}

fn magnitudes_note() -> Outcome {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).map_err(|e| e.to_string())?;
    verdict(
        readme.contains("magnitudes are not reproducible"),
        "README records that absolute figure magnitudes cannot be reproduced; only trends are checked".into(),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity suite", identity_suite),
        ("reduction relations", reductions),
        ("determinant consistency", determinant),
        ("closed-form oracles", oracles),
        ("pole elimination", pole_elimination),
        ("eps0 dual path", eps0_paths),
        ("figure trends", figure_trends),
        ("prefactor algebra", prefactor),
        ("brute-force equivalence", brute_force),
        ("figure magnitudes note", magnitudes_note),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS criterion {} ({name}): {d}", n + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {d}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
