//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Criteria 1 to 3 brute-force the closed forms directly;
//! the rest drive builtin scenarios in process and inspect their rows.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use distflow::dist::{distance, distance_jet};
use distflow::geom::Hypersurface;
use distflow::scalar::{baby_bound, constrained_min, epsilon_n, kappa_n};
use distflow::scenario::{builtin_config, run_battery, run_scenario, RunOptions, ScenarioArtifacts};
use distflow::verify::Status;
use distflow::{FParams, Scalar, Vector};

fn criterion(label: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {label}: pass"),
        Err(e) => {
            println!("criterion {label}: FAIL");
            resume_unwind(e);
        }
    }
}

fn run_builtin(name: &str) -> ScenarioArtifacts {
    let config = builtin_config(name).unwrap_or_else(|| panic!("{name} is a builtin"));
    run_scenario(&config, &RunOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn group<'a>(
    arts: &'a ScenarioArtifacts,
    theorem: &str,
) -> Vec<&'a distflow::verify::ResidualSample> {
    arts.rows.iter().filter(|r| r.theorem == theorem).collect()
}

fn assert_zero_failures(arts: &ScenarioArtifacts, theorem: &str) {
    let rows = group(arts, theorem);
    assert!(!rows.is_empty(), "{}: no {theorem} rows", arts.name);
    let fails = rows.iter().filter(|r| r.status == Status::Fail).count();
    let worst = rows.iter().map(|r| r.residual).fold(Scalar::INFINITY, Scalar::min);
    assert_eq!(fails, 0, "{}: {theorem} has {fails} failures, worst {worst:.3e}", arts.name);
}

#[test]
fn c01_scalar_closed_forms_vs_brute_force() {
    criterion("01 (scalar closed forms vs brute force)", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1a);
        const GRID: usize = 1_000_000;
        for _ in 0..100 {
            let b: Scalar = rng.gen_range(0.0..1.0);
            let beta: Scalar = rng.gen_range(2.0..10.0);
            let params = FParams::new(b, beta).expect("in range");
            let (sup, s0) = params.f_sup();
            let bb = baby_bound(b).expect("in range");
            let b2 = b * b;
            let mut grid_max = Scalar::NEG_INFINITY;
            for i in 0..GRID {
                let s = i as Scalar / GRID as Scalar;
                let f = params.f_eval(s).expect("s < 1");
                grid_max = grid_max.max(f);
                let g = (s * s - b2 * s) / (1.0 - s);
                assert!(g >= bb - 1e-12, "baby bound broken at s={s}, b={b}: {g} < {bb}");
            }
            assert!(
                grid_max <= sup + 1e-12,
                "grid exceeds the closed-form supremum: {grid_max} > {sup}"
            );
            assert!(
                sup - grid_max <= 1e-8,
                "closed form {sup} off the grid search {grid_max} (b={b}, beta={beta})"
            );
            assert!((0.0..=1.0).contains(&s0));
            assert!(sup <= params.f_sup_weak_bound() + 1e-12);
        }

        let obj = |xs: &[Scalar]| xs.iter().map(|x| x * x / (1.0 + x)).sum::<Scalar>();
        for n in [2usize, 3, 4] {
            for l in [0.3, 1.0, 2.0] {
                let (value, argmin) = constrained_min::<Scalar>(n, l).expect("valid");
                assert!((argmin.iter().sum::<Scalar>() - l).abs() < 1e-12);
                assert!((obj(&argmin) - value).abs() < 1e-12);
                let oracle = match n {
                    2 => obj(&[l]),
                    3 => {
                        // One free coordinate after the constraint.
                        let mut best = Scalar::INFINITY;
                        for i in 1..GRID {
                            let x = -1.0 + (l + 2.0) * i as Scalar / GRID as Scalar;
                            let y = l - x;
                            if y > -1.0 {
                                best = best.min(obj(&[x, y]));
                            }
                        }
                        best
                    }
                    _ => {
                        // Two free coordinates: shrinking grid around the
                        // best cell, three refinement stages.
                        let mut c = (l / 3.0, l / 3.0);
                        let mut half = l + 2.0;
                        let mut best = Scalar::INFINITY;
                        for _ in 0..3 {
                            let steps = 700;
                            let mut arg = c;
                            for i in 0..=steps {
                                let x = c.0 - half + 2.0 * half * i as Scalar / steps as Scalar;
                                if x <= -1.0 {
                                    continue;
                                }
                                for j in 0..=steps {
                                    let y =
                                        c.1 - half + 2.0 * half * j as Scalar / steps as Scalar;
                                    let z = l - x - y;
                                    if y <= -1.0 || z <= -1.0 {
                                        continue;
                                    }
                                    let v = obj(&[x, y, z]);
                                    if v < best {
                                        best = v;
                                        arg = (x, y);
                                    }
                                }
                            }
                            c = arg;
                            half = 4.0 * half / steps as Scalar;
                        }
                        best
                    }
                };
                assert!(
                    value <= oracle + 1e-12,
                    "closed form is not a lower bound: {value} > {oracle} (n={n}, L={l})"
                );
                assert!(
                    (value - oracle).abs() <= 1e-6,
                    "closed form {value} vs oracle {oracle} (n={n}, L={l})"
                );
            }
        }
        assert!(start.elapsed().as_secs() < 30, "took {:?}", start.elapsed());
    });
}

#[test]
fn c02_exact_constants_and_kappa_oracle() {
    criterion("02 (exact constants, kappa eigenvalue oracle)", || {
        assert_eq!(epsilon_n::<Scalar>(2).unwrap(), 1.0 / 256.0);
        assert_eq!(epsilon_n::<Scalar>(3).unwrap(), 1.0 / 4096.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0xca55e77e);
        let mut checked = 0usize;
        while checked < 100_000 {
            let n = rng.gen_range(2usize..=6);
            let mut lam: Vec<Scalar> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = lam.iter().sum::<Scalar>() / n as Scalar;
            for x in &mut lam {
                *x -= mean;
            }
            let l1 = lam.iter().cloned().fold(Scalar::INFINITY, Scalar::min);
            if l1 >= -1e-12 {
                continue;
            }
            let a_sq: Scalar = lam.iter().map(|x| x * x).sum();
            let kappa = kappa_n::<Scalar>(n).unwrap();
            assert!(
                kappa * a_sq <= l1 * l1 / (2.0 * n as Scalar) * (1.0 + 1e-12),
                "kappa_{n} violated by {lam:?}"
            );
            checked += 1;
        }
    });
}

#[test]
fn c03_distance_jet_vs_central_differences() {
    criterion("03 (distance jet vs finite differences)", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e55);
        let zero = Vector::<3>::zeros();
        let sphere = Hypersurface::sphere(zero, 2.0).unwrap();
        let cylinder = Hypersurface::cylinder(zero, 2, 1.0).unwrap();
        let tilted =
            Hypersurface::hyperplane(Vector::<3>::new(0.5, 0.0, 3.0f64.sqrt() / 2.0), 0.7)
                .unwrap();
        let unit = |rng: &mut ChaCha8Rng| loop {
            let v = Vector::<3>::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() > 0.1 && v.norm() <= 1.0 {
                break v / v.norm();
            }
        };
        let mut checked = 0usize;
        for k in 0..1000 {
            let (surface, q): (&Hypersurface<3>, Vector<3>) = match k % 3 {
                0 => {
                    let rho = if k % 2 == 0 {
                        rng.gen_range(0.6..1.8)
                    } else {
                        rng.gen_range(2.2..4.0)
                    };
                    (&sphere, unit(&mut rng) * rho)
                }
                1 => {
                    let rho = if k % 2 == 0 {
                        rng.gen_range(0.3..0.9)
                    } else {
                        rng.gen_range(1.1..2.5)
                    };
                    let phi: Scalar = rng.gen_range(0.0..std::f64::consts::TAU);
                    (
                        &cylinder,
                        Vector::<3>::new(
                            rho * phi.cos(),
                            rho * phi.sin(),
                            rng.gen_range(-2.0..2.0),
                        ),
                    )
                }
                _ => {
                    let q = loop {
                        let u = unit(&mut rng) * rng.gen_range(0.5..3.0);
                        if distance(&tilted, &u).unwrap() >= 0.1 {
                            break u;
                        }
                    };
                    (&tilted, q)
                }
            };
            let jet = distance_jet(surface, &q).expect("queries stay in the regular domain");
            let d = jet.foot.dist;

            let alpha_sum: Scalar =
                jet.foot.alphas.iter().map(|a| a / (1.0 + a)).sum();
            assert!(
                (d * jet.hessian.trace() - alpha_sum).abs() < 1e-8,
                "trace identity broken at {q:?}"
            );

            let h = 1e-4 * d;
            let u = |p: Vector<3>| distance(surface, &p).unwrap();
            let tol = 1e-3 / d;
            for i in 0..3 {
                let mut ei = Vector::<3>::zeros();
                ei[i] = h;
                let dii = (u(q + ei) - 2.0 * d + u(q - ei)) / (h * h);
                assert!(
                    (jet.hessian[(i, i)] - dii).abs() < tol,
                    "H[{i}{i}] {} vs fd {dii} at {q:?}",
                    jet.hessian[(i, i)]
                );
                for j in (i + 1)..3 {
                    let mut ej = Vector::<3>::zeros();
                    ej[j] = h;
                    let dij = (u(q + ei + ej) - u(q + ei - ej) - u(q - ei + ej)
                        + u(q - ei - ej))
                        / (4.0 * h * h);
                    assert!(
                        (jet.hessian[(i, j)] - dij).abs() < tol,
                        "H[{i}{j}] {} vs fd {dij} at {q:?}",
                        jet.hessian[(i, j)]
                    );
                }
            }
            checked += 1;
        }
        assert_eq!(checked, 1000);
        assert!(start.elapsed().as_secs() < 30, "took {:?}", start.elapsed());
    });
}

#[test]
fn c04_sphere_formula_and_sign_flip() {
    criterion("04 (shrinking-sphere box formula, sign flip)", || {
        let arts = run_builtin("sphere-negativity-threshold");
        assert!(arts.report.is_clean(), "report not clean: {:?}", arts.report.theorems);
        assert_zero_failures(&arts, "sphere-box");
        assert_zero_failures(&arts, "sphere-box-fd");
        assert_zero_failures(&arts, "sphere-box-mesh");
        assert_zero_failures(&arts, "sphere-box-threshold");
        let neg = group(&arts, "sphere-box-negativity");
        assert!(!neg.is_empty());
        for r in &neg {
            assert_eq!(r.status, Status::Fail, "negativity probe did not flip: {}", r.residual);
            assert!(r.grad_sq > 1.0 - 1e-9, "probe not tangential: {}", r.grad_sq);
        }
    });
}

#[test]
fn c05_mesh_mcf_fidelity() {
    criterion("05 (discrete flow against the exact sphere)", || {
        let arts = run_builtin("mesh-sphere-mcf");
        assert!(arts.report.is_clean());
        assert!(arts.report.t_max >= 0.15, "flow stopped at {}", arts.report.t_max);
        assert_zero_failures(&arts, "mesh-radius");
        assert_zero_failures(&arts, "mesh-box-coordsq");
        let t_final = arts.report.t_max;
        let final_rows =
            group(&arts, "mesh-box-coordsq").iter().filter(|r| r.t == t_final).count();
        assert!(final_rows >= 2562, "only {final_rows} vertices at the final time");
        let caloric = group(&arts, "mesh-caloric");
        let pass = caloric.iter().filter(|r| r.status == Status::Pass).count();
        assert!(
            pass as f64 >= 0.95 * caloric.len() as f64,
            "caloric residual passes at only {pass}/{} vertices",
            caloric.len()
        );
    });
}

#[test]
fn c06_supersolution_battery() {
    criterion("06 (supersolution residuals on minimal scenarios)", || {
        for (name, sharp_power) in [
            ("parallel-planes", "power-heat-p0.5"),
            ("tilted-plane-pair", "power-heat-p0.5"),
            ("catenoid-halfspace-n3", "power-heat-p0.3333"),
            ("n1-sharpness", "power-heat-p1"),
        ] {
            let arts = run_builtin(name);
            assert!(arts.report.aborted.is_none(), "{name} aborted");
            assert_zero_failures(&arts, "minimal-supersolution");
            assert_zero_failures(&arts, sharp_power);
            assert!(
                arts.report.skipped_fraction < 0.2,
                "{name} skipped {:.1}%",
                100.0 * arts.report.skipped_fraction
            );
        }
    });
}

#[test]
fn c07_n1_sharpness() {
    criterion("07 (caloric at p = 1, breaks at p = 1.5)", || {
        let arts = run_builtin("n1-sharpness");
        assert!(arts.report.is_clean());
        let p1 = group(&arts, "power-heat-p1");
        assert!(!p1.is_empty());
        for r in &p1 {
            assert!(r.status != Status::Skipped);
            assert!(r.residual.abs() <= 1e-8, "p=1 residual {} at {}", r.residual, r.location);
        }
        let p15 = group(&arts, "power-heat-p1.5");
        let graded = p15.iter().filter(|r| r.status != Status::Skipped).count();
        let fails = p15.iter().filter(|r| r.status == Status::Fail).count();
        assert!(
            fails as f64 >= 0.9 * graded as f64,
            "p=1.5 fired at only {fails}/{graded} samples"
        );
    });
}

#[test]
fn c08_harnack_and_control() {
    criterion("08 (weighted Harnack bound, unweighted control)", || {
        let arts = run_builtin("sphere-over-plane-harnack");
        assert!(arts.report.is_clean());
        assert_zero_failures(&arts, "harnack");
        assert_zero_failures(&arts, "local-avoidance");

        let control = run_builtin("harnack-control-unweighted");
        assert!(control.report.is_clean(), "expected violations did not fire");
        let fails = group(&control, "harnack-unweighted")
            .iter()
            .filter(|r| r.status == Status::Fail)
            .count();
        assert!(fails >= 1, "the unweighted control failed to produce a violation");
    });
}

#[test]
fn c09_two_flow_suite() {
    criterion("09 (two-flow inequality, monotone minimum)", || {
        for name in
            ["concentric-shrinking-spheres", "offset-shrinking-spheres", "offset-shrinking-spheres-mesh"]
        {
            let arts = run_builtin(name);
            assert!(arts.report.is_clean(), "{name} not clean");
            assert_zero_failures(&arts, "two-flow");
            assert_zero_failures(&arts, "two-flow-log");
            assert_zero_failures(&arts, "min-distance-monotone");
            if name != "offset-shrinking-spheres-mesh" {
                assert_zero_failures(&arts, "exp-weight");
                assert_zero_failures(&arts, "two-flow-fd");
            }
        }
    });
}

#[test]
fn c10_gradient_bound_and_quarter_barrier() {
    criterion("10 (half-space gradient bound, quarter barrier)", || {
        let arts = run_builtin("catenoid-halfspace-n3");
        assert!(arts.report.is_clean());
        let grad = group(&arts, "gradient-bound");
        let graded: Vec<_> = grad.iter().filter(|r| r.status != Status::Skipped).collect();
        assert!(graded.len() >= 10_000, "only {} graded hyperplane samples", graded.len());
        let cap = 1.0 - 1.0 / 4096.0;
        for r in &graded {
            assert!(r.status == Status::Pass);
            assert!(r.grad_sq <= cap, "gradient bound broken: {} > {cap}", r.grad_sq);
        }
        assert_zero_failures(&arts, "gradient-bound-power");
        assert_zero_failures(&arts, "quarter-barrier-subharmonic");
        assert_zero_failures(&arts, "quarter-barrier-boundary");
    });
}

#[test]
fn c11_cutoff_integral() {
    criterion("11 (integral cutoff inequality, five hats)", || {
        let arts = run_builtin("tilted-plane-pair");
        assert!(arts.report.is_clean());
        let rows = group(&arts, "cutoff-integral");
        assert_eq!(rows.len(), 5, "expected five hat functions");
        for r in &rows {
            assert!(r.residual >= 0.0, "hat {} has negative slack {}", r.location, r.residual);
        }
    });
}

fn tree_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("under root");
                out.insert(
                    rel.to_string_lossy().into_owned(),
                    std::fs::read(&path).expect("readable file"),
                );
            }
        }
    }
    out
}

#[test]
fn c12_determinism_and_budget() {
    criterion("12 (battery under five minutes, byte-reproducible)", || {
        let base = std::env::temp_dir().join(format!("distflow-acceptance-{}", std::process::id()));
        let dirs = [base.join("a"), base.join("b")];
        let started = Instant::now();
        for dir in &dirs {
            let opts = RunOptions { out_dir: Some(dir.clone()), ..RunOptions::default() };
            let artifacts = run_battery(&opts).expect("battery runs");
            assert!(artifacts.iter().all(|a| a.report.is_clean()), "battery not clean");
        }
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs() < 300, "two batteries took {elapsed:?}");
        let (a, b) = (tree_bytes(&dirs[0]), tree_bytes(&dirs[1]));
        assert!(!a.is_empty());
        assert_eq!(
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>(),
            "artifact sets differ"
        );
        for (name, bytes) in &a {
            assert_eq!(Some(bytes), b.get(name), "{name} differs between runs");
        }
        std::fs::remove_dir_all(&base).expect("cleanup");
    });
}
