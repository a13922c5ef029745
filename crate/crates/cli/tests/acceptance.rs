//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use casimir_core::expr::{is_zero, ZeroVerdict};
use casimir_core::lie_algebra::{cartan, cartan_metric, validate, RatMatrix, StructureConstants};
use casimir_core::models::bianchi2::{self, Bianchi2Model};
use casimir_core::models::family::{FamilyDoc, HarmonicFamily};
use casimir_core::models::hypergeometric::{self, BianchiHypergeometric};
use casimir_core::models::legendre::solve_plnm;
use casimir_core::models::so3::{self, So3Model};
use casimir_core::models::recertify;
use casimir_core::split::{build_invariant_metric, compute_mu, solve_invariant_frame};
use casimir_core::tensor::{random_tensor, verify_realization};
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn symbolic(v: &ZeroVerdict, what: &str) -> Result<(), String> {
    ensure(v.is_symbolic(), || format!("{what}: {v:?}"))
}

fn all_symbolic(fam: &HarmonicFamily) -> Result<(), String> {
    for c in fam.all_checks() {
        symbolic(&c.verdict, &format!("{} {:?}: {}", fam.kind, fam.labels, c.name))?;
    }
    Ok(())
}

fn algebra_identities() -> Outcome {
    let so3 = StructureConstants::so3();
    ensure(validate(&so3).violations.is_empty(), || "so(3) constants fail validation".into())?;
    let ct = cartan(&so3);
    ensure(ct.g == RatMatrix::identity(3), || format!("so(3) Cartan tensor {:?}", ct.g))?;
    let (m, killing) = cartan_metric(&so3).map_err(|e| e.to_string())?;
    ensure(killing && m.g_inv == ct.g, || "so(3) inverse metric is not the identity".into())?;
    let b2 = StructureConstants::bianchi2();
    ensure(validate(&b2).violations.is_empty(), || "Bianchi II constants fail validation".into())?;
    let ct = cartan(&b2);
    ensure(ct.is_degenerate && ct.rank == 1, || format!("Bianchi II Cartan rank {}", ct.rank))?;
    ensure(cartan_metric(&b2).is_err(), || "Bianchi II Cartan inverse should not exist".into())?;
    Ok("so(3) Cartan tensor is the identity; Bianchi II Cartan tensor has rank 1".into())
}

fn realizations() -> Outcome {
    let so3 = So3Model::new();
    let r = verify_realization(&so3.xi(&so3.sphere), &so3.sc, &so3.sphere.sample_box(0)).map_err(|e| e.to_string())?;
    ensure(r.all_symbolic(), || format!("so(3): {r:?}"))?;
    let b2 = Bianchi2Model::new();
    let r = verify_realization(&b2.xi(), &b2.sc, &b2.chart.sample_box(0)).map_err(|e| e.to_string())?;
    ensure(r.all_symbolic(), || format!("Bianchi II: {r:?}"))?;
    Ok("all brackets symbolically zero for both realizations".into())
}

fn invariant_frame_and_metric() -> Outcome {
    let b2 = Bianchi2Model::new();
    let c = &b2.chart;
    let domain = c.sample_box(0);
    let (fs, frame) = solve_invariant_frame(&b2.sc, &b2.xi(), &domain).map_err(|e| e.to_string())?;
    symbolic(&fs.invariance, "invariance equations")?;
    let p = |s: &str| c.parse(s).unwrap();
    let vectors = [["1", "0", "0"], ["-v", "1", "0"], ["0", "0", "1"]];
    let covectors = [["1", "v", "0"], ["0", "1", "0"], ["0", "0", "1"]];
    for a in 0..3 {
        for i in 0..3 {
            ensure(frame.vectors[a].components[i] == p(vectors[a][i]), || {
                format!("e_{} component {}: {}", a + 1, i + 1, frame.vectors[a].components[i])
            })?;
            ensure(frame.covectors[a].components[i] == p(covectors[a][i]), || {
                format!("e^{} component {}: {}", a + 1, i + 1, frame.covectors[a].components[i])
            })?;
        }
    }
    let g = build_invariant_metric(&fs, &domain).map_err(|e| e.to_string())?;
    let expected = [
        ["(1+v^2)*exp(2*y)", "-v*exp(y)", "0"],
        ["-v*exp(y)", "1", "0"],
        ["0", "0", "1"],
    ];
    for i in 0..3 {
        for k in 0..3 {
            let d = is_zero(&(g.g_inv.get(i, k) - &p(expected[i][k])), &domain).map_err(|e| format!("{e:?}"))?;
            symbolic(&d, &format!("g^{}{}", i + 1, k + 1))?;
        }
    }
    for (j, v) in g.killing.iter().enumerate() {
        symbolic(v, &format!("Killing residual for xi_{}", j + 1))?;
    }
    Ok("frame and coframe match exactly; 9 metric components and 3 Killing residuals symbolically zero".into())
}

fn operator_reproduction() -> Outcome {
    let so3 = So3Model::new();
    let domain = so3.sphere.sample_box(0);
    let k = so3.casimir(&so3.sphere).map_err(|e| e.to_string())?.k_operator();
    symbolic(&k.difference_verdict(&so3.laplacian(), &domain).map_err(|e| e.to_string())?, "SO(3) K vs Laplacian")?;
    let ladder = so3.ladder_casimir();
    symbolic(&ladder.difference_verdict(&k, &domain).map_err(|e| e.to_string())?, "ladder form vs delta form")?;
    let b2 = Bianchi2Model::new();
    let k = b2.casimir().map_err(|e| e.to_string())?.k_operator();
    let d = k.difference_verdict(&b2.reference_operator(), &b2.chart.sample_box(0)).map_err(|e| e.to_string())?;
    symbolic(&d, "Bianchi II K vs reference operator")?;
    Ok(format!("SO(3) K, ladder form and Bianchi II K agree coefficientwise ({} Bianchi II terms)", k.terms.len()))
}

fn mu_factors() -> Outcome {
    let so3 = So3Model::new();
    let c = &so3.sphere;
    let domain = c.sample_box(0);
    let frame = so3.frame(c).map_err(|e| e.to_string())?;
    let mu = compute_mu(&frame, &so3.ladder(c), &so3.ladder_sc, &domain).map_err(|e| e.to_string())?;
    symbolic(&mu.integrability, "integrability")?;
    for (a, s) in [(0usize, 1i64), (1, -1)] {
        for (i, sp) in [(0usize, 1i64), (1, -1)] {
            let expected = c.parse(&format!("{s}*exp({sp}*i*phi)/sin(theta)")).unwrap();
            let d = is_zero(&(mu.get(a, i) - &expected), &domain).map_err(|e| format!("{e:?}"))?;
            symbolic(&d, &format!("mu^{s}_{sp}"))?;
        }
        ensure(mu.get(a, 2).is_zero(), || format!("mu^{s}_3 = {}", mu.get(a, 2)))?;
    }
    Ok("mu^s_s' = s exp(i s' phi)/sin(theta), mu^s_3 = 0, integrability symbolically zero".into())
}

fn so3_harmonics() -> Outcome {
    let so3 = So3Model::new();
    let c = &so3.sphere;
    let domain = c.sample_box(0);
    let mut labels = 0;
    for l in 0..=3i64 {
        for n in -l..=l {
            for m in -l..=l {
                let p = solve_plnm(l, n, m).map_err(|e| e.to_string())?;
                let t = c.parse(&format!("exp({m}*i*phi)")).unwrap() * p.expr;
                let r = so3.spin_weighted_operator(n).apply(&t) + t.scale(&casimir_core::expr::Coeff::int(l * (l + 1)));
                symbolic(&is_zero(&r, &domain).map_err(|e| format!("{e:?}"))?, &format!("l={l} n={n} m={m}"))?;
                labels += 1;
            }
        }
    }
    let mut ladder_checks = 0;
    for l in 0..=3 {
        for fam in [so3::scalar_family(&so3, l), so3::tensor20_family(&so3, l)] {
            let fam = fam.map_err(|e| e.to_string())?;
            ensure(fam.lambda == (-l * (l + 1)).to_string(), || format!("lambda {}", fam.lambda))?;
            all_symbolic(&fam)?;
            ensure(fam.members.len() == (2 * l + 1) as usize, || "member count".into())?;
            ladder_checks += fam.checks.iter().filter(|c| c.name.starts_with("ladder")).count();
        }
    }
    Ok(format!("{labels} labels solve the separated equation; families l=0..3 certified with {ladder_checks} exact ladder checks"))
}

fn ladder_algebra() -> Outcome {
    let so3 = So3Model::new();
    let mut count = 0;
    for l in 0..=3 {
        for fam in [so3::scalar_family(&so3, l), so3::tensor20_family(&so3, l)] {
            let fam = fam.map_err(|e| e.to_string())?;
            for m in &fam.members {
                let c = m.checks.iter().find(|c| c.name == "ladder-algebra").ok_or("missing ladder-algebra check")?;
                symbolic(&c.verdict, &format!("{} {:?}", fam.kind, m.labels))?;
                count += 1;
            }
        }
    }
    Ok(format!("commutators hold on {count} members"))
}

fn point_series() -> Outcome {
    let b2 = Bianchi2Model::new();
    let mut members = 0;
    for n in 1..=3 {
        for nu in 0..=2 {
            let fam = bianchi2::point_series_family(&b2, n, -n, nu).map_err(|e| e.to_string())?;
            ensure(fam.lambda == (nu * nu + n * n).to_string(), || format!("lambda {}", fam.lambda))?;
            all_symbolic(&fam)?;
            let lowering = fam.checks.iter().filter(|c| c.name.starts_with("lowering")).count();
            ensure(lowering == fam.members.len() - 1, || format!("n={n}: {lowering} lowering checks"))?;
            for m in &fam.members {
                for name in ["casimir-eigen", "xi2-eigen", "xi3-eigen", "closed-form"] {
                    ensure(m.checks.iter().any(|c| c.name == name), || format!("missing {name}"))?;
                }
            }
            members += fam.members.len();
        }
    }
    Ok(format!("{members} members certified symbolically for n=1..3, nu=0..2"))
}

/// ODE residual from central differences with two Richardson steps.
fn fd_residual(p: &BianchiHypergeometric, v: f64) -> f64 {
    let f = |x: f64| p.value(x).unwrap();
    let d1 = |h: f64| (f(v + h) - f(v - h)) / (2.0 * h);
    let d2 = |h: f64| (f(v + h) - f(v) * 2.0 + f(v - h)) / (h * h);
    let h = 2e-2;
    let r1 = |h: f64| (d1(h / 2.0) * 4.0 - d1(h)) / 3.0;
    let r2 = |h: f64| (d2(h / 2.0) * 4.0 - d2(h)) / 3.0;
    let first = (r1(h / 2.0) * 16.0 - r1(h)) / 15.0;
    let second = (r2(h / 2.0) * 16.0 - r2(h)) / 15.0;
    let r = second * (1.0 + v * v) + first * ((1.0 - 2.0 * p.mu) * v) + f(v) * (p.mu * p.mu + p.nu * p.nu - p.lambda);
    r.norm()
}

fn hypergeometric_branch() -> Outcome {
    let start = Instant::now();
    let sets = [
        BianchiHypergeometric { mu: 0.0, nu: 0.0, lambda: 1.0, a_amp: 1.0, b_amp: 0.0 },
        BianchiHypergeometric { mu: 1.0, nu: 1.0, lambda: 2.0, a_amp: 1.0, b_amp: 0.0 },
        BianchiHypergeometric { mu: 0.5, nu: 1.0, lambda: 3.25, a_amp: 1.0, b_amp: 0.5 },
        BianchiHypergeometric { mu: 0.3, nu: 1.0, lambda: 0.5, a_amp: 2.0, b_amp: 0.0 },
        BianchiHypergeometric { mu: -0.7, nu: 0.2, lambda: 2.5, a_amp: 0.4, b_amp: 1.3 },
    ];
    let mut worst = 0.0f64;
    for p in &sets {
        let v = hypergeometric::family(*p).map_err(|e| e.to_string())?;
        ensure(v.passed(), || format!("{p:?}: {:?}", v.members[0].checks))?;
        for x in p.sample_points(hypergeometric::SAMPLE_POINTS) {
            let r = p.residual(x).map_err(|e| e.to_string())?.norm();
            let fd = fd_residual(p, x);
            worst = worst.max(r).max(fd);
            ensure(r < 1e-8 && fd < 1e-8, || format!("{p:?} at v={x}: residual {r:e}, finite-difference {fd:e}"))?;
        }
    }
    let flat = sets[0];
    for v in [0.1, 0.3, 0.5] {
        let d = (flat.value(v).unwrap().re - (1.0f64 + v * v).sqrt()).abs();
        ensure(d < 1e-8, || format!("flat case at v={v}: {d:e}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("sweep took {secs:.1}s"))?;
    Ok(format!("5 parameter sets, 16 points each, worst residual {worst:.2e} (series and finite-difference), {secs:.2}s"))
}

fn cross_checks() -> Outcome {
    let so3 = So3Model::new();
    let mut monomials = 0;
    for l in 0..=3 {
        let fam = so3::tensor20_family(&so3, l).map_err(|e| e.to_string())?;
        for m in &fam.members {
            let c = m.checks.iter().find(|c| c.name == "reduction-consistency").ok_or("missing reduction check")?;
            symbolic(&c.verdict, &format!("l={l} {:?}", m.labels))?;
            monomials += m.tensor.as_ref().map_or(0, |t| t.components.len());
        }
    }
    let b2 = Bianchi2Model::new();
    let fam = bianchi2::covector_family(&b2, 2, 0, 1, bianchi2::symbolic_amplitudes()).map_err(|e| e.to_string())?;
    all_symbolic(&fam)?;
    monomials += 3;

    let types = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)];
    let so3_op = so3.casimir(&so3.sphere).map_err(|e| e.to_string())?;
    let b2_op = b2.casimir().map_err(|e| e.to_string())?;
    for seed in 0..20u64 {
        let (p, q) = types[seed as usize % types.len()];
        let j = seed as usize % 3;
        let t = random_tensor(so3.sphere.clone(), p, q, seed);
        let v = so3_op.check_g_commutes(j, &t, &so3.sphere.sample_box(seed)).map_err(|e| e.to_string())?;
        ensure(v.is_zero(), || format!("SO(3) seed {seed}: {v:?}"))?;
        let t = random_tensor(b2.chart.clone(), p, q, seed);
        let v = b2_op.check_g_commutes(j, &t, &b2.chart.sample_box(seed)).map_err(|e| e.to_string())?;
        ensure(v.is_zero(), || format!("Bianchi II seed {seed}: {v:?}"))?;
    }
    Ok(format!("reduction consistent on {monomials} frame monomials; G commutes with generators on 20 seeded tensors per model"))
}

fn cli(args: &[&str]) -> (Option<i32>, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).env_remove("CASIMIR_SEED").output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), v)
}

fn cli_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &["harmonics", "so3", "--type", "2,0", "--l", "2"],
        &["harmonics", "bianchi2", "--point-series", "--n", "2", "--m", "-1", "--nu", "1"],
        &["harmonics", "bianchi2", "--hypergeometric", "--mu", "0.5", "--nu", "1", "--lambda", "3.25", "--amp-b", "0.5"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("a{k}.json"));
        let b = dir.path().join(format!("b{k}.json"));
        let with = |p: &std::path::Path| {
            let mut v = vec!["--seed", "7"];
            v.extend_from_slice(args);
            v.extend_from_slice(&["--out", p.to_str().unwrap()]);
            v.into_iter().map(String::from).collect::<Vec<_>>()
        };
        let (ca, ra) = cli(&with(&a).iter().map(String::as_str).collect::<Vec<_>>());
        let (cb, rb) = cli(&with(&b).iter().map(String::as_str).collect::<Vec<_>>());
        ensure(ca == Some(0) && cb == Some(0), || format!("{args:?} exited {ca:?}/{cb:?}"))?;
        ensure(ra["digest"] == rb["digest"], || format!("{args:?}: digests differ"))?;
        let (fa, fb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        ensure(fa == fb, || format!("{args:?}: family files differ"))?;
        let (cv, rv) = cli(&["verify", "--family", a.to_str().unwrap()]);
        ensure(cv == Some(0), || format!("{args:?}: re-certification exited {cv:?}"))?;
        let last = rv["checks"].as_array().and_then(|c| c.last()).cloned().unwrap_or(Value::Null);
        ensure(last["name"] == "verdicts-identical" && last["verdict"] == "symbolically-zero", || {
            format!("{args:?}: {last}")
        })?;
        // library path: the same document re-certifies to identical verdicts
        let doc: FamilyDoc = serde_json::from_slice(&fa).map_err(|e| e.to_string())?;
        let again = recertify(&doc).map_err(|e| e.to_string())?.to_doc();
        ensure(again == doc, || format!("{args:?}: library re-certification differs"))?;
    }
    Ok("3 families: byte-identical outputs, equal digests, verdict-identical re-certification".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("algebra identities", algebra_identities),
        ("realizations", realizations),
        ("invariant frame and metric", invariant_frame_and_metric),
        ("operator reproduction", operator_reproduction),
        ("mu-factors", mu_factors),
        ("SO(3) harmonics", so3_harmonics),
        ("ladder algebra", ladder_algebra),
        ("Bianchi II point series", point_series),
        ("hypergeometric branch", hypergeometric_branch),
        ("cross-checks", cross_checks),
        ("CLI round-trip determinism", cli_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
