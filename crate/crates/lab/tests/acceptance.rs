//! Acceptance run: one line per criterion.
//!
//! Runs without the test harness so every verdict is printed. The process
//! fails when a criterion fails that is not listed in `KNOWN_RED`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use lagflow_core::exec::{self, Mode};
use lagflow_core::predicates::hausdorff;
use lagflow_core::shrinker::{integrate_profile, shoot_closed, ShrinkerSpec};
use lagflow_core::{flow, FlowConfig, StopReason};
use lagflow_lab::validate::{evolution_suite, identity_suite, near_origin_suite, preservation_suite, PRESERVATION_CASES};
use lagflow_lab::{experiment, Experiment, RunConfig, ScenarioKind};

/// Criteria that fail with the current classifier and are reported, not hidden.
const KNOWN_RED: &[u32] = &[7];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, name, pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn run(kind: ScenarioKind) -> Experiment {
    experiment(&RunConfig::defaults(kind), None).unwrap_or_else(|e| panic!("{}: {e}", kind.name()))
}

fn circle_lifetime() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2u32, 3] {
        let mut cfg = RunConfig::defaults(ScenarioKind::Circle);
        cfg.scenario.n = n;
        cfg.flow.n = n;
        let start = Instant::now();
        let exp = experiment(&cfg, None).expect("circle run");
        let secs = start.elapsed().as_secs_f64();
        let r0 = cfg.scenario.radius;
        let t_exact = r0 * r0 / (2.0 * f64::from(n));
        let t = exp.report.stop.t;
        let eps = exp.report.initial.eps.unwrap_or(f64::NAN);
        let (e_t, e_eps) = (rel(t, t_exact), rel(t, 1.0 / eps));
        pass &= e_t < 1e-2 && e_eps < 1e-2 && secs < 10.0 && exp.report.stop.reason == StopReason::MinRadius;
        parts.push(format!("n={n} N={} t_stop rel {e_t:.2e}, vs 1/eps {e_eps:.2e}, {secs:.2}s", cfg.scenario.nodes));
    }
    verdict(1, "circle lifetime", pass, parts.join("; "))
}

fn area_law(runs: &BTreeMap<&str, Experiment>) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in ["circle", "perturbed_symmetric", "chekanov"] {
        let r = runs[kind].report.area_law_relative.unwrap_or(f64::NAN);
        pass &= r < 1e-3;
        parts.push(format!("{kind} {r:.2e}"));
    }
    verdict(2, "symplectic area law (< 1e-3 relative)", pass, parts.join("; "))
}

fn eps_law(runs: &BTreeMap<&str, Experiment>) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, exp) in runs {
        if !exp.report.initial.eps.is_some_and(|e| e > 0.0) {
            continue;
        }
        let r = exp.report.invariants.eps_law_residual.unwrap_or(f64::NAN);
        pass &= r < 1e-2;
        parts.push(format!("{kind} {r:.2e}"));
    }
    pass &= !parts.is_empty();
    verdict(3, "monotonicity constant (< 1e-2 relative)", pass, parts.join("; "))
}

fn shrinker_integral() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [2u32, 3] {
        for eps in [2.0, 4.0] {
            let r0 = ShrinkerSpec::circle_radius(n, eps);
            for scale in [0.7, 0.85, 1.0, 1.15, 1.3] {
                let prof = integrate_profile(&ShrinkerSpec::new(n, eps, scale * r0, (1, 1))).expect("profile");
                worst = worst.max(prof.p_drift());
            }
        }
    }
    let mut closed: f64 = 0.0;
    for n in [2u32, 3] {
        for eps in [2.0, 4.0] {
            let r = ShrinkerSpec::circle_radius(n, eps);
            let prof = integrate_profile(&ShrinkerSpec::new(n, eps, r, (1, 1))).expect("profile");
            let exact = f64::from(n) * r.powi(n as i32 - 2) * (-f64::from(n) / 2.0).exp();
            closed = closed.max(prof.p.iter().map(|p| rel(*p, exact)).fold(0.0, f64::max));
        }
    }
    let pass = worst < 1e-8 && closed < 1e-8;
    verdict(4, "shrinker first integral", pass, format!("max drift {worst:.2e}, circle closed form {closed:.2e}"))
}

fn homothety() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, eps) in [(2u32, 4.0), (3, 2.0), (2, 2.0)] {
        let r0 = ShrinkerSpec::circle_radius(n, eps);
        let sh = shoot_closed(n, eps, (1, 1), (0.7 * r0, 1.2 * r0), 512).expect("shrinker");
        let cfg = FlowConfig { t_max: Some(0.8 / eps), ..FlowConfig::with_n(n) };
        let out = flow::run(&sh.curve, &cfg).expect("flow");
        let t = out.final_state.t;
        let predicted: Vec<_> = sh.curve.points().iter().map(|p| *p * (1.0 - eps * t).sqrt()).collect();
        let d = hausdorff(Mode::Sequential, out.final_state.curve.points(), &predicted);
        let reached = t >= 0.8 / eps * (1.0 - 1e-9);
        pass &= d < 1e-2 && reached;
        parts.push(format!("n={n} eps={eps} t={t:.4} dist {d:.2e}"));
    }
    verdict(5, "self-similarity under flow", pass, parts.join("; "))
}

fn type1(exp: &Experiment, secs: f64) -> Verdict {
    let r = &exp.report;
    let is_type1 = r.singularity.as_ref().is_some_and(|s| s.type1);
    let dist = r.rescaled.as_ref().map_or(f64::NAN, |s| s.to_round);
    let pass = is_type1 && dist < 5e-2 && secs < 60.0;
    verdict(6, "type-1 perturbed circle", pass, format!("type1={is_type1}, rescaled to round {dist:.2e}, {secs:.1}s"))
}

fn type2(exp: &Experiment) -> Verdict {
    let r = &exp.report;
    let s = r.singularity.as_ref();
    let is_type1 = s.map(|s| s.type1);
    let growth = s.map_or(f64::NAN, |s| s.tail_growth);
    let area = r.stop.area / r.initial.area;
    let limit = 1.0 / r.initial.eps.unwrap_or(f64::NAN);
    let pass = is_type1 == Some(false) && area > 0.1 && r.stop.t < limit;
    let err = r.singularity_error.as_deref().map(|e| format!(", estimator: {e}")).unwrap_or_default();
    verdict(
        7,
        "type-2 dumbbell",
        pass,
        format!("type1={is_type1:?} tail growth {growth:.2}, stop area {area:.3} of initial, t_stop {:.4} < 1/eps {limit:.4}{err}", r.stop.t),
    )
}

fn preservation(cases: &[lagflow_lab::validate::PreservationCase]) -> (Verdict, Verdict) {
    let violated: Vec<_> = cases.iter().enumerate().filter(|(_, c)| !c.violations.is_empty()).map(|(i, _)| i).collect();
    let v8 = verdict(
        8,
        "preservation suite",
        violated.is_empty() && cases.len() == PRESERVATION_CASES,
        format!("{} seeds, violated: {violated:?}", cases.len()),
    );
    let elsewhere: Vec<_> = cases.iter().filter(|c| c.stop != StopReason::MinRadius).map(|c| c.stop).collect();
    let v11 = verdict(11, "starshaped singular locus", elsewhere.is_empty(), format!("{} seeds, other stops: {elsewhere:?}", cases.len()));
    (v8, v11)
}

fn residuals() -> Verdict {
    let checks: Vec<_> = identity_suite().expect("identities").into_iter().chain(evolution_suite().expect("evolution")).collect();
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.to_string()).collect();
    let worst = checks.iter().filter(|c| c.name.contains("circle")).map(|c| c.value).fold(0.0, f64::max);
    verdict(9, "residual orders", failed.is_empty(), format!("{} checks, circle dA {worst:.2e}, failed: {failed:?}", checks.len()))
}

fn near_origin() -> Verdict {
    let checks = near_origin_suite(1024).expect("near origin");
    let pass = checks.iter().all(|c| c.pass);
    let parts: Vec<String> = checks.iter().map(|c| format!("{} {:.2e}", c.name, c.value)).collect();
    verdict(10, "near-origin ratio", pass, parts.join("; "))
}

fn starshaped_scenarios(runs: &BTreeMap<&str, Experiment>) -> Vec<String> {
    runs.iter()
        .filter(|(_, e)| e.report.config.scenario.n >= 2 && e.report.initial.starshaped)
        .map(|(k, e)| format!("{k}: {:?}", e.report.stop.reason))
        .collect()
}

fn main() -> ExitCode {
    let kinds = [ScenarioKind::Circle, ScenarioKind::PerturbedSymmetric, ScenarioKind::Dumbbell, ScenarioKind::Chekanov];
    let timed = exec::map(Mode::Parallel, &kinds, |k| {
        let start = Instant::now();
        let exp = run(*k);
        (k.name(), exp, start.elapsed().as_secs_f64())
    });
    let mut secs = BTreeMap::new();
    let mut runs = BTreeMap::new();
    for (name, exp, s) in timed {
        secs.insert(name, s);
        runs.insert(name, exp);
    }

    // the perturbed run is timed alone so the runtime bound is not shared
    let start = Instant::now();
    let mut cfg = RunConfig::defaults(ScenarioKind::PerturbedSymmetric);
    (cfg.scenario.n, cfg.scenario.omega0, cfg.scenario.l, cfg.scenario.a) = (2, 1, 9, 0.1);
    cfg.flow.n = 2;
    let perturbed = experiment(&cfg, None).expect("perturbed run");
    let perturbed_secs = start.elapsed().as_secs_f64();

    let cases = preservation_suite(0, PRESERVATION_CASES, 128, Mode::Parallel).expect("preservation suite");
    let (v8, mut v11) = preservation(&cases);
    let scen = starshaped_scenarios(&runs);
    v11.pass &= runs
        .values()
        .filter(|e| e.report.config.scenario.n >= 2 && e.report.initial.starshaped)
        .all(|e| e.report.stop.reason == StopReason::MinRadius);
    v11.detail = format!("{}; scenarios: {}", v11.detail, scen.join(", "));

    let verdicts = vec![
        circle_lifetime(),
        area_law(&runs),
        eps_law(&runs),
        shrinker_integral(),
        homothety(),
        type1(&perturbed, perturbed_secs),
        type2(&runs["dumbbell"]),
        v8,
        residuals(),
        near_origin(),
        v11,
    ];

    let mut unexpected = 0;
    for v in &verdicts {
        let tag = match (v.pass, KNOWN_RED.contains(&v.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} criterion {:>2} {}: {}", v.id, v.name, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} of {} pass, {failed} fail ({unexpected} unexpected)", verdicts.len() - failed, verdicts.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
