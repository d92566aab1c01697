//! Acceptance criteria 1-9. Runs without the libtest harness so that every
//! criterion prints a PASS/FAIL line; exits nonzero if any fails.
//!
//! Golden SVGs live in `tests/golden`; regenerate with `UPDATE_GOLDEN=1`.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ckosc::conics::{conic_from_ab, ConicKind};
use ckosc::dynamics::{fradkin, Oscillator, PhaseState};
use ckosc::geometry::{CKParams, Chart, SpaceKind};
use ckosc::integrator::{radius, simulate, EventKind, IntegratorConfig, Trajectory};
use ckosc::orbits::{
    binet_residual, classify, fradkin_orbit_residual, orbit_from_ej, orbit_from_state, orbit_radius, period,
    state_on_orbit, OrbitSolution, Radius,
};
use ckosc::render::{
    emit_figure, figure_disk_family, figure_effective_hyperbolic, figure_potentials, Curve, Projected,
};
use ckosc::sweep::{map, period_check};

type Outcome = Result<String, String>;

fn ck(k1: f64, k2: f64) -> CKParams {
    CKParams::new(k1, k2).unwrap()
}

fn unit() -> Oscillator {
    Oscillator::new(1.0)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The twelve initial conditions of the conservation suite and their end times.
fn conservation_runs() -> Vec<(CKParams, PhaseState, f64)> {
    let cases = [
        (ck(1.0, 1.0), PhaseState::polar(0.6, 0.0, 0.4, 1.2)),
        (ck(1.0, 1.0), PhaseState::polar(0.3, 1.0, -0.2, 2.5)),
        (ck(0.0, 1.0), PhaseState::polar(1.0, 0.0, 0.3, 0.5)),
        (ck(0.0, 1.0), PhaseState::polar(0.5, 2.0, -0.4, 1.5)),
        (ck(-1.0, 1.0), PhaseState::polar(0.7, 0.2, 0.1, 0.9)),
        (ck(-1.0, 1.0), PhaseState::polar(0.5, 0.0, 1.0, 0.8)),
        (ck(1.0, -1.0), PhaseState::polar(0.5, 0.0, 0.0, 0.5)),
        (ck(1.0, -1.0), PhaseState::polar(0.4, 0.2, 0.3, 0.3)),
        (ck(0.0, -1.0), PhaseState::polar(1.0, 0.0, 0.2, 0.3)),
        (ck(0.0, -1.0), PhaseState::polar(0.5, 0.1, -0.3, 0.6)),
        (ck(-1.0, -1.0), PhaseState::polar(0.8, 0.0, 0.1, 0.4)),
        (ck(-1.0, -1.0), PhaseState::polar(0.5, -0.2, 0.4, 0.2)),
    ];
    cases
        .into_iter()
        .map(|(p, s)| {
            let e = ckosc::dynamics::energy(p, unit(), &s).unwrap();
            // ten radial periods (half the orbital period each) when bounded
            let t_end = match classify(p, unit(), e, ckosc::dynamics::noether_momenta(p, &s).j) {
                Ok(c) if c.is_bounded() => 5.0 * period(p, unit(), e).unwrap(),
                _ => 20.0,
            };
            (p, s, t_end)
        })
        .collect()
}

fn conservation_trajectories() -> Vec<Trajectory> {
    let cfg = IntegratorConfig::default();
    map(&conservation_runs(), |&(p, s, t)| simulate(p, unit(), s, t, &cfg).unwrap())
}

fn criterion_1(trajs: &[Trajectory]) -> Outcome {
    let worst = trajs.iter().map(|t| t.drift().max()).fold(0.0, f64::max);
    let n = trajs.len();
    let early = trajs.iter().filter(|t| t.boundary.is_some()).count();
    check(
        n == 12 && worst < 1e-8 && early == 0,
        format!("{n} runs, max relative drift {worst:.2e} (< 1e-8), {early} stopped early"),
    )
}

fn criterion_2(trajs: &[Trajectory]) -> Outcome {
    let along = trajs.iter().map(|t| t.max_det_residual()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_static = 0.0f64;
    for kind in SpaceKind::ALL {
        let p = CKParams::standard(kind);
        let osc = Oscillator::new(rng.gen_range(0.2..3.0));
        for _ in 0..1000 {
            let r = rng.gen_range(0.05..1.4);
            let s = PhaseState::polar(r, rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let f = fradkin(p, osc, &s).unwrap();
            worst_static = worst_static.max(f.det_residual(osc).abs() / (f.f11 * f.f22).abs().max(1.0));
        }
    }
    check(
        along < 1e-11 && worst_static < 1e-11,
        format!("trajectory residual {along:.2e}, static residual {worst_static:.2e} over 9000 states (< 1e-11)"),
    )
}

fn criterion_3() -> Outcome {
    let pairs = [
        (ck(1.0, 1.0), 1.0, 0.5),
        (ck(1.0, 1.0), 2.0, 0.8),
        (ck(1.0, 1.0), 0.8, 0.2),
        (ck(0.0, 1.0), 1.0, 0.6),
        (ck(0.0, 1.0), 2.5, 1.5),
        (ck(-1.0, 1.0), 0.4, 0.3),
        (ck(-1.0, 1.0), 0.3, 0.1),
        (ck(-1.0, 1.0), 0.45, 0.6),
    ];
    let cfg = IntegratorConfig::default();
    let (mut direct, mut binet, mut fradkin_res, mut cross) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (p, e, j) in pairs {
        let osc = unit();
        let sol = orbit_from_ej(p, osc, e, j, 0.3).unwrap();
        let t_end = 2.0 * period(p, osc, e).unwrap();
        let traj = simulate(p, osc, state_on_orbit(p, &sol, 0.3).unwrap(), t_end, &cfg).unwrap();
        let l1 = p.l1();
        let r_of = |phi: f64| orbit_radius(p, &sol, phi).map(|r| r.finite().unwrap_or(f64::NAN));
        for s in &traj.samples {
            let r = r_of(s.state.q2).unwrap();
            direct = direct.max((l1.tan(s.state.q1) - l1.tan(r)).abs());
        }
        for k in 0..50 {
            let phi = 2.0 * PI * k as f64 / 50.0;
            binet = binet.max(binet_residual(p, osc, j, r_of, phi).unwrap());
            // closed-form points on the Fradkin conic of the initial state
            let f = traj.samples[0].fradkin;
            let t = l1.tan(r_of(phi).unwrap());
            cross = cross.max(fradkin_orbit_residual(&f, t * phi.cos(), t * phi.sin()).abs());
        }
        let f0 = traj.samples[0].fradkin;
        for s in &traj.samples {
            let (x, y) = s.state.beltrami(p);
            fradkin_res = fradkin_res.max(fradkin_orbit_residual(&f0, x, y).abs());
        }
    }
    check(
        direct < 1e-7 && binet < 1e-5 && fradkin_res < 1e-8 && cross < 1e-8,
        format!(
            "8 pairs: integration vs closed form {direct:.2e}, Binet {binet:.2e} (< 1e-5), Fradkin along trajectory {fradkin_res:.2e} (< 1e-8), Fradkin on closed form {cross:.2e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = IntegratorConfig::default();
    let cases: Vec<(f64, f64)> = [(1.0, [0.3, 1.0, 2.0]), (0.5, [0.3, 1.0, 2.0]), (0.0, [0.3, 1.0, 2.0]), (-0.5, [0.2, 0.5, 0.8])]
        .into_iter()
        .flat_map(|(k1, es)| es.into_iter().map(move |e| (k1, e)))
        .collect();
    let checks = map(&cases, |&(k1, e)| (k1, period_check(ck(k1, 1.0), unit(), e, 0.5, &cfg)));
    let mut worst = 0.0f64;
    let mut euclid = 0.0f64;
    for (k1, c) in checks {
        let c = c.map_err(|err| format!("kappa1 = {k1}: {err}"))?;
        worst = worst.max(c.rel_error);
        if k1 == 0.0 {
            euclid = euclid.max((c.measured - 2.0 * PI).abs()).max((c.formula - 2.0 * PI).abs());
        }
    }
    check(
        worst < 1e-6 && euclid < 1e-8,
        format!("12 cases, max relative error {worst:.2e} (< 1e-6), Euclidean |T - 2pi| {euclid:.2e} (< 1e-8)"),
    )
}

fn max_radius(traj: &Trajectory) -> f64 {
    let p = traj.params;
    let from_samples = traj.samples.iter().map(|s| radius(p, &s.state));
    let from_events = traj.events_of(EventKind::RadialMax).map(|e| radius(p, &e.state));
    from_samples.chain(from_events).fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    let p = ck(-1.0, 1.0);
    let osc = unit();
    let cfg = IntegratorConfig::default();
    let start = |e: f64, j: f64| -> Option<PhaseState> {
        let sol = orbit_from_ej(p, osc, e, j, 0.0).ok()?;
        state_on_orbit(p, &sol, PI / 2.0).ok()
    };

    let bounded = simulate(p, osc, start(0.45, 0.3).unwrap(), 50.0, &cfg).unwrap();
    let r_max_seen = max_radius(&bounded);
    let r_max = classify(p, osc, 0.45, 0.3).unwrap().turning.unwrap().1;
    let escape = simulate(p, osc, start(0.55, 0.3).unwrap(), 50.0, &cfg).unwrap();
    let r_escape = max_radius(&escape);

    let energies: Vec<f64> = (0..10).map(|k| 0.32 + 0.05 * k as f64).collect();
    let momenta: Vec<f64> = (0..10).map(|k| 0.05 + 0.15 * k as f64).collect();
    let grid: Vec<(f64, f64)> = energies.iter().flat_map(|&e| momenta.iter().map(move |&j| (e, j))).collect();
    let verdicts = map(&grid, |&(e, j)| -> Result<bool, String> {
        let class = classify(p, osc, e, j).map_err(|err| err.to_string())?;
        let Some(init) = start(e, j) else {
            // no orbit: classification must agree
            return Ok(!class.is_bounded() && class.turning.is_none());
        };
        let sol = orbit_from_ej(p, osc, e, j, 0.0).map_err(|err| err.to_string())?;
        let conic = conic_from_ab(p, sol.a_sq, sol.b_sq).map_err(|err| err.to_string())?;
        let conic_bounded = matches!(conic.kind, ConicKind::Circle | ConicKind::Ellipse);
        let traj = simulate(p, osc, init, 120.0, &cfg).map_err(|err| err.to_string())?;
        let seen = max_radius(&traj);
        let observed_bounded = seen < 10.0;
        let r_ok = match class.turning {
            Some((_, r_max)) if r_max.is_finite() => (seen - r_max).abs() < 1e-6,
            _ => true,
        };
        Ok(class.is_bounded() == observed_bounded && conic_bounded == observed_bounded && r_ok)
    });
    let mut agree = 0;
    for v in &verdicts {
        match v {
            Ok(true) => agree += 1,
            Ok(false) => {}
            Err(err) => return Err(format!("grid run failed: {err}")),
        }
    }
    check(
        (r_max_seen - r_max).abs() < 1e-6 && r_escape > 10.0 && agree == grid.len(),
        format!(
            "E=0.45: max r {r_max_seen:.9} vs closed form {r_max:.9}; E=0.55: r reaches {r_escape:.2}; grid agreement {agree}/{}",
            grid.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = IntegratorConfig { auto_chart: false, ..Default::default() };
    let cases = [
        (ck(1.0, 1.0), PhaseState::polar(0.6, 0.3, 0.2, 0.9)),
        (ck(1.0, 1.0), PhaseState::polar(0.4, -1.0, -0.3, 1.8)),
        (ck(-1.0, 1.0), PhaseState::polar(0.7, 0.2, 0.1, 0.9)),
        (ck(-1.0, 1.0), PhaseState::polar(0.5, 2.0, 0.3, 1.1)),
    ];
    let mut worst = 0.0f64;
    for (p, polar) in cases {
        let parallel = polar.to_chart(p, Chart::ParallelUY).map_err(|e| e.to_string())?;
        let a = simulate(p, unit(), polar, 5.0, &cfg).map_err(|e| e.to_string())?;
        let b = simulate(p, unit(), parallel, 5.0, &cfg).map_err(|e| e.to_string())?;
        if a.boundary.is_some() || b.boundary.is_some() {
            return Err("run stopped at a chart boundary".into());
        }
        let (xa, ya) = a.final_sample().state.beltrami(p);
        let (xb, yb) = b.final_sample().state.beltrami(p);
        worst = worst.max((xa - xb).hypot(ya - yb));
    }
    check(worst < 1e-7, format!("4 runs, max position difference at t=5: {worst:.2e} (< 1e-7)"))
}

fn criterion_7() -> Outcome {
    let (a_sq, b_sq) = (1.0, 0.25);
    let solve = |k1: f64| {
        let p = ck(k1, 1.0);
        let (dm, dp) = (1.0 / a_sq, 1.0 / b_sq);
        (p, OrbitSolution::from_dg(p, unit(), 0.5 * (dm + dp), 0.5 * (dp - dm), 0.0))
    };
    let (p0, s0) = solve(0.0);
    let (p1, s1) = solve(1e-6);
    let mut worst = 0.0f64;
    for k in 0..64 {
        let phi = 2.0 * PI * k as f64 / 64.0;
        let r = |p, s: &OrbitSolution| match orbit_radius(p, s, phi) {
            Ok(Radius::Finite(r)) => r,
            _ => f64::NAN,
        };
        worst = worst.max((r(p0, &s0) - r(p1, &s1)).abs());
    }
    let t0 = period(p0, unit(), s0.energy).map_err(|e| e.to_string())?;
    let t1 = period(p1, unit(), s0.energy).map_err(|e| e.to_string())?;
    let dt = (t0 - t1).abs();
    check(
        worst < 1e-5 && dt < 1e-5,
        format!("orbit radius difference {worst:.2e}, period difference {dt:.2e} (< 1e-5)"),
    )
}

fn criterion_8() -> Outcome {
    let p = ck(1.0, -1.0);
    let init = PhaseState::polar(0.5, 0.0, 0.1, 0.5);
    // stay in the polar chart, which covers the time-like region
    let cfg = IntegratorConfig { auto_chart: false, ..Default::default() };
    let traj = simulate(p, unit(), init, 20.0, &cfg).map_err(|e| e.to_string())?;
    let sol = orbit_from_state(p, unit(), &init).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let t = p.l1().tan(s.state.q1);
        let want = sol.d - sol.g * (2.0 * (s.state.q2 - sol.phi0)).cosh();
        worst = worst.max((1.0 / (t * t) - want).abs() / want.abs().max(1.0));
    }
    let drift = traj.drift().max();
    check(
        worst < 1e-6 && drift < 1e-8 && traj.samples.len() > 10,
        format!(
            "{} samples to t={:.3}: closed-form residual {worst:.2e} (< 1e-6), drift {drift:.2e} (< 1e-8)",
            traj.samples.len(),
            traj.final_sample().t
        ),
    )
}

fn golden(name: &str, svg: &str) -> Result<(), String> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, svg).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want == svg {
        Ok(())
    } else {
        Err(format!("{name} differs from golden file"))
    }
}

fn y_at(c: &Curve, x: f64) -> Option<f64> {
    let pt = c.points.iter().min_by(|a, b| (a.param - x).abs().total_cmp(&(b.param - x).abs()))?;
    pt.at.point().map(|(_, y)| y)
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();

    let (pot, style) = figure_potentials(unit());
    let fig1 = emit_figure(&pot, &style).map_err(|e| e.to_string())?;
    if emit_figure(&pot, &style).unwrap() != fig1 {
        return Err("fig1 not reproducible".into());
    }
    golden("fig1.svg", &fig1.svg)?;
    // κ = 2, 1, 0.5: wall at π/(2√κ); κ = -1: plateau ½
    for (i, k) in [(0usize, 2.0f64), (1, 1.0), (2, 0.5)] {
        let wall = PI / (2.0 * k.sqrt());
        let last = pot[i].points.iter().filter(|p| p.at.point().is_some()).map(|p| p.param).fold(0.0, f64::max);
        if last >= wall {
            return Err(format!("kappa {k}: curve passes the wall"));
        }
    }
    let plateau = y_at(&pot[5], 3.0).unwrap();
    if (0.5 - plateau).abs() > 0.01 {
        return Err(format!("kappa -1 plateau {plateau}"));
    }
    notes.push(format!("fig1 plateau {plateau:.4}"));

    let (eff, style) = figure_effective_hyperbolic(unit(), &[0.5, 1.0, 1.5]);
    let fig3 = emit_figure(&eff, &style).map_err(|e| e.to_string())?;
    golden("fig3.svg", &fig3.svg)?;
    let has_min = |c: &Curve| {
        let ys: Vec<f64> = c.points.iter().filter_map(|p| p.at.point().map(|(_, y)| y)).collect();
        ys.windows(3).any(|w| w[1] < w[0] && w[1] < w[2])
    };
    if !(has_min(&eff[0]) && !has_min(&eff[2]) && eff[1].width > eff[0].width) {
        return Err("fig3 curves not separated by the thick J_inf curve".into());
    }

    let (disk, style) = figure_disk_family(0.3, 720);
    let fig4 = emit_figure(&disk, &style).map_err(|e| e.to_string())?;
    golden("fig4.svg", &fig4.svg)?;
    let at = |c: &Curve, phi: f64| {
        let pt = c.points.iter().min_by(|a, b| (a.param - phi).abs().total_cmp(&(b.param - phi).abs())).unwrap();
        match pt.at {
            Projected::Point(x, y) => x.hypot(y),
            Projected::Clipped => f64::INFINITY,
        }
    };
    let radii: Vec<f64> = disk.iter().map(|c| at(c, PI / 4.0)).collect();
    let ordered = radii.windows(2).all(|w| w[0] < w[1] || w[1].is_infinite());
    let labels: Vec<&str> = disk.iter().map(|c| c.label.as_str()).collect();
    if !ordered || labels[0] != "circle" || labels[8] != "equidistant" || labels[16] != "straight line" {
        return Err(format!("fig4 family out of order: {radii:?}"));
    }
    notes.push("fig3 split at J_inf".into());
    notes.push("fig4 circle < ellipses < equidistant < ultraellipses < line".into());
    Ok(format!("golden SVGs match; {}", notes.join("; ")))
}

fn main() {
    let started = Instant::now();
    let trajs = conservation_trajectories();
    let results: Vec<(&str, Outcome)> = vec![
        ("conservation of E, J, f11, f12, f22", criterion_1(&trajs)),
        ("Fradkin determinant identity", criterion_2(&trajs)),
        ("integration, Binet and Fradkin orbits agree", criterion_3()),
        ("period law", criterion_4()),
        ("hyperbolic regime boundaries", criterion_5()),
        ("polar and parallel charts agree", criterion_6()),
        ("Euclidean limit continuity", criterion_7()),
        ("anti de Sitter spot check", criterion_8()),
        ("figure reproduction", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed in {:.1?}", results.len() - failed, results.len(), started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
