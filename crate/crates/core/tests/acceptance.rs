//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qsteer::lhsm::{
    alice_assemblage, construct_lhsm, construct_lhsm_singular, singular_settings, validate_lhsm, EllipsoidParams,
};
use qsteer::noise::{cs_fidelity_floors, lambda_min, noise_crossing};
use qsteer::quantum::{
    bloch_to_density, density_to_bloch, BlochVector, MeasurementSetting, Outcome, Side, TwoQubitState,
};
use qsteer::steering::{
    analytic_radius_ab, analytic_radius_ba, classify, classify_from_radii, conditional_assemblage, sqhsm_radius,
    steering_radius, Direction, SteeringClass, SteeringVerdict,
};
use qsteer::tomo::{reconstruct_cs, simulate_steering_experiment, MeasuredAssemblage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose check is implemented as specified but cannot pass; the
/// README explains each one.
const KNOWN_RED: &[u32] = &[2];

type Criterion = (u32, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn xz() -> [MeasurementSetting; 2] {
    [MeasurementSetting::x(), MeasurementSetting::z()]
}

fn xy() -> [MeasurementSetting; 2] {
    [MeasurementSetting::x(), MeasurementSetting::y()]
}

fn yz() -> [MeasurementSetting; 2] {
    [MeasurementSetting::y(), MeasurementSetting::z()]
}

fn radius(theta: f64, eta: f64, d: Direction) -> SteeringVerdict {
    steering_radius(&TwoQubitState::family(theta, eta).unwrap(), d).unwrap()
}

fn within_time(elapsed: Duration, limit: Duration) -> (bool, String) {
    (
        elapsed < limit,
        format!("{:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn table_rows() -> Verdict {
    let rows = [
        (0.775, 0.989, 1.36, 1.35),
        (0.773, 0.796, 1.13, 1.09),
        (0.536, 0.816, 1.11, 1.07),
    ];
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut got = Vec::new();
    for (t, e, ab, ba) in rows {
        let r_ab = radius(t, e, Direction::AToB).radius;
        let r_ba = radius(t, e, Direction::BToA).radius;
        worst = worst.max((r_ab - ab).abs()).max((r_ba - ba).abs());
        got.push(format!("{r_ab:.4}/{r_ba:.4}"));
    }
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(10));
    verdict(
        worst < 0.08 && fast,
        format!(
            "R_ab/R_ba = {}; max |dR| = {worst:.4} (tol 0.08); {time}",
            got.join(", ")
        ),
    )
}

fn measured_anchor() -> Verdict {
    let start = Instant::now();
    let r = radius(0.429, 0.819, Direction::AToB).radius;
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(2));
    verdict(
        (1.056..=1.096).contains(&r) && fast,
        format!("R_ab(0.429, 0.819) = {r:.5}, expected in [1.056, 1.096]; {time}"),
    )
}

fn analytic_grid() -> Verdict {
    let start = Instant::now();
    let n = 30;
    let (mut worst_ab, mut worst_ba, mut two_way) = (0.0f64, 0.0f64, 0);
    for i in 0..n {
        let theta = 0.05 + (FRAC_PI_2 - 0.1) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let eta = 0.55 + (0.999 - 0.55) * j as f64 / (n - 1) as f64;
            let rho = TwoQubitState::family(theta, eta).unwrap();
            let num = sqhsm_radius(&conditional_assemblage(&rho, xz(), Side::B).unwrap()).radius;
            worst_ab = worst_ab.max((analytic_radius_ab(theta, eta).unwrap().value - num).abs());
            if classify(theta, eta).unwrap() == SteeringClass::TwoWayAsymmetric {
                two_way += 1;
                let num = steering_radius(&rho, Direction::BToA).unwrap().radius;
                worst_ba = worst_ba.max((analytic_radius_ba(theta, eta).unwrap().value - num).abs());
            }
        }
    }
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(300));
    verdict(
        worst_ab < 1e-3 && worst_ba < 1e-3 && fast,
        format!("max |dR_ab| = {worst_ab:.2e}, max |dR_ba| = {worst_ba:.2e} over {two_way} two-way points (tol 1e-3); {time}"),
    )
}

fn one_way_boundary() -> Verdict {
    let (mut worst_r, mut worst_norm) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let theta = 0.05 + (FRAC_PI_4 - 0.1) * i as f64 / 49.0;
        let mut eta = (1.0 + (2.0 * theta).cos()) / 2.0;
        // Rounding can leave |2η − 1| an ulp above |cos 2θ|.
        while classify(theta, eta).unwrap() != SteeringClass::OneWayAToB {
            eta = eta.next_down();
        }
        worst_r = worst_r.max((analytic_radius_ba(theta, eta).unwrap().value - 1.0).abs());
        let ens = construct_lhsm(theta, eta, xz()).unwrap();
        worst_norm = worst_norm.max((ens.max_norm() - 1.0).abs());
    }
    verdict(
        worst_r < 1e-9 && worst_norm < 1e-6,
        format!("max |R_ba - 1| = {worst_r:.1e} (tol 1e-9), max ||L| - 1| = {worst_norm:.1e} (tol 1e-6)"),
    )
}

fn lhsm_exactness() -> Verdict {
    let (mut worst_rec, mut worst_ell, mut models) = (0.0f64, 0.0f64, 0);
    for i in 0..20 {
        let theta = 0.03 + (FRAC_PI_2 - 0.06) * i as f64 / 19.0;
        for j in 0..20 {
            let eta = 0.5 + 0.49 * j as f64 / 19.0;
            let c = (2.0 * theta).cos().abs();
            if c < (2.0 * eta - 1.0).abs() || eta == 0.5 {
                continue;
            }
            let ell = EllipsoidParams::new(theta, eta).unwrap();
            for settings in [xz(), xy(), yz()] {
                let asm = alice_assemblage(theta, eta, settings.clone()).unwrap();
                let ens = construct_lhsm(theta, eta, settings).unwrap();
                let rep = validate_lhsm(&ens, &asm, 1e-9).unwrap();
                worst_rec = worst_rec.max(rep.max_weight_error()).max(rep.max_bloch_error());
                for e in &ens.entries {
                    worst_ell = worst_ell.max(ell.hidden_residual(e.point).abs());
                }
                for b in asm.blochs() {
                    worst_ell = worst_ell.max(ell.cs_residual(b).abs());
                }
                models += 1;
            }
        }
    }
    let sing = construct_lhsm_singular(0.328, 0.629).unwrap();
    let asm = alice_assemblage(0.328, 0.629, singular_settings(0.328).unwrap()).unwrap();
    let rep = validate_lhsm(&sing, &asm, 1e-9).unwrap();
    let sing_err = rep.max_weight_error().max(rep.max_bloch_error());
    verdict(
        worst_rec < 1e-9 && worst_ell < 1e-8 && sing.len() == 3 && sing_err < 1e-9,
        format!(
            "{models} models: reconstruction {worst_rec:.1e} (tol 1e-9), ellipsoid {worst_ell:.1e} (tol 1e-8); \
             singular model has {} states, error {sing_err:.1e}",
            sing.len()
        ),
    )
}

fn bell_radius() -> Verdict {
    let rho = TwoQubitState::family(FRAC_PI_4, 1.0).unwrap();
    let asm = conditional_assemblage(&rho, xz(), Side::B).unwrap();
    let r = sqhsm_radius(&asm).radius;
    let oracle = common::oracle_radius(asm.weights(), asm.moments().map(|m| m.to_array()));
    verdict(
        (r - SQRT_2).abs() < 1e-4 && (r - oracle).abs() < 1e-3,
        format!(
            "R = {r:.8}, |R - sqrt 2| = {:.1e} (tol 1e-4), oracle {oracle:.8} (tol 1e-3)",
            (r - SQRT_2).abs()
        ),
    )
}

fn lambda_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let eta = rng.random_range(0.55..0.999);
        let closed = lambda_min(theta, eta).unwrap().value;
        worst = worst.max((closed - noise_crossing(theta, eta).unwrap()).abs());
    }
    verdict(
        worst < 1e-3,
        format!("max |closed form - crossing| = {worst:.2e} (tol 1e-3)"),
    )
}

fn fidelity_floors() -> Verdict {
    let start = Instant::now();
    let (bob, alice) = cs_fidelity_floors(5.0 * PI / 48.0, 0.8, 64_000).unwrap();
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(120));
    verdict(
        (bob.value - 0.9937).abs() <= 0.002 && (alice.value - 0.9954).abs() <= 0.002 && fast,
        format!(
            "F_Bob = {:.5}, F_Alice = {:.5} (targets 0.9937, 0.9954, tol 0.002); {time}",
            bob.value, alice.value
        ),
    )
}

/// Difference of the two implied unconditional states, with its first-order
/// standard deviation per axis.
fn signaling_z_scores(m: &MeasuredAssemblage) -> [f64; 3] {
    let asm = &m.assemblage;
    let delta = (asm.marginal(0) - asm.marginal(1)).to_array();
    let mut var = [0.0; 3];
    for setting in &asm.settings {
        let n_s: u64 = m
            .records
            .iter()
            .filter(|r| r.setting == setting.label)
            .map(|r| r.counts)
            .sum();
        for k in Outcome::BOTH {
            let r = reconstruct_cs(&m.records, &setting.label, k).unwrap();
            let c = r.bloch.to_array();
            let tvar = r.weight * (1.0 - r.weight) / n_s as f64;
            for a in 0..3 {
                var[a] += (r.weight * r.axis_errors[a]).powi(2) + c[a] * c[a] * tvar;
            }
        }
    }
    std::array::from_fn(|a| delta[a].abs() / var[a].sqrt())
}

fn tomography() -> Verdict {
    let (theta, eta) = (0.488, 0.727);
    let sim = |n: f64, seed: u64| simulate_steering_experiment(theta, eta, Direction::AToB, xz(), n, seed).unwrap();
    let mut bounded = true;
    let mut check_bound = |m: &MeasuredAssemblage| {
        let (asm, _) = m.projected().unwrap();
        let unc = m.uncertain_radius().unwrap().radius;
        bounded &= unc <= sqhsm_radius(&asm).radius + 1e-12;
    };

    let ns = [1e3, 1e4, 1e5, 1e6];
    let mut pts = Vec::new();
    for n in ns {
        let mut sum = 0.0;
        for seed in 0..16 {
            let m = sim(n, seed);
            sum += m.error_radii().iter().sum::<f64>() / 4.0;
            check_bound(&m);
        }
        pts.push((n.ln(), (sum / 16.0).ln()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    let (mut inside, mut total) = (0, 0);
    for seed in 100..200 {
        for z in signaling_z_scores(&sim(1e5, seed)) {
            total += 1;
            inside += usize::from(z <= 3.0);
        }
    }
    let frac = inside as f64 / total as f64;

    let (mut rmin, mut rmax, mut unc_min) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for seed in 200..220 {
        let m = sim(2e5, seed);
        for r in m.error_radii() {
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        unc_min = unc_min.min(m.uncertain_radius().unwrap().radius);
        check_bound(&m);
    }
    let scenario = rmin >= 0.0063 / 2.0 && rmax <= 0.0185 * 2.0 && unc_min > 1.0;
    verdict(
        (-0.55..=-0.45).contains(&slope) && frac >= 0.99 && scenario && bounded,
        format!(
            "exponent {slope:.4} (in [-0.55, -0.45]); {inside}/{total} signaling checks within 3 sigma; \
             N = 2e5 error radii {rmin:.4}..{rmax:.4}, min uncertain radius {unc_min:.4}; \
             uncertain <= nominal: {bounded}"
        ),
    )
}

fn random_unit(rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if (0.1..=1.0).contains(&v.norm()) {
            return v.normalized().unwrap();
        }
    }
}

fn consistent(v: &SteeringVerdict, d: Direction) -> bool {
    v.direction == d
        && v.steerable == (v.radius > 1.0)
        && (v.robustness - (v.radius - 1.0)).abs() < 1e-15
        && v.minimizing_ensemble
            .as_ref()
            .is_none_or(|e| (e.probability_sum() - 1.0).abs() < 1e-12)
}

fn property_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures: Vec<String> = Vec::new();
    let mut note = |ok: bool, what: &str, case: usize| {
        if !ok && failures.len() < 5 {
            failures.push(format!("case {case}: {what}"));
        }
        ok
    };
    let mut bad = 0;
    for case in 0..1000 {
        let theta = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let eta = if rng.random_bool(0.5) {
            rng.random_range(0.0..0.45)
        } else {
            rng.random_range(0.55..1.0)
        };
        let rho = TwoQubitState::family(theta, eta).unwrap();
        let n1 = random_unit(&mut rng);
        let mut n2 = random_unit(&mut rng);
        while n1.dot(n2).abs() > 0.99 {
            n2 = random_unit(&mut rng);
        }
        let settings = [
            MeasurementSetting::new("n1", n1).unwrap(),
            MeasurementSetting::new("n2", n2).unwrap(),
        ];
        let steered = if rng.random_bool(0.5) { Side::A } else { Side::B };
        let asm = conditional_assemblage(&rho, settings, steered).unwrap();

        let mut ok = note(asm.signaling_gap() <= 1e-10, "no-signaling", case);

        let v = random_unit(&mut rng) * rng.random_range(0.0..1.0);
        let round = density_to_bloch(&bloch_to_density(v));
        ok &= note((round - v).norm() <= 1e-12, "Bloch round-trip", case);
        for b in asm.blochs() {
            ok &= note(
                (density_to_bloch(&bloch_to_density(b)) - b).norm() <= 1e-12,
                "Bloch round-trip",
                case,
            );
        }

        let w = asm.weights();
        ok &= note(
            (w[0] + w[1] - 1.0).abs() <= 1e-12 && (w[2] + w[3] - 1.0).abs() <= 1e-12,
            "weight normalization",
            case,
        );
        let fixed = sqhsm_radius(&asm);
        ok &= note(
            consistent(&fixed, asm.direction()),
            "verdict flags (fixed settings)",
            case,
        );

        let ab = steering_radius(&rho, Direction::AToB).unwrap();
        let ba = steering_radius(&rho, Direction::BToA).unwrap();
        ok &= note(
            consistent(&ab, Direction::AToB) && consistent(&ba, Direction::BToA),
            "verdict flags",
            case,
        );
        let class = classify(theta, eta).unwrap();
        ok &= note(
            classify_from_radii(ab.radius, ba.radius) == class,
            "class vs radii",
            case,
        );
        if class == SteeringClass::TwoWayAsymmetric {
            ok &= note(ab.radius >= ba.radius - 1e-9 && ba.radius >= 1.0, "asymmetry", case);
        }
        bad += usize::from(!ok);
    }
    let detail = if failures.is_empty() {
        "1000 cases, all invariants hold".to_string()
    } else {
        format!("{bad} of 1000 cases failed: {}", failures.join("; "))
    };
    verdict(bad == 0, detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "table-radii", table_rows),
        (2, "measured-anchor-radius", measured_anchor),
        (3, "analytic-vs-numeric-grid", analytic_grid),
        (4, "one-way-boundary", one_way_boundary),
        (5, "lhsm-exactness", lhsm_exactness),
        (6, "bell-radius", bell_radius),
        (7, "lambda-min-consistency", lambda_consistency),
        (8, "fidelity-floors", fidelity_floors),
        (9, "tomography", tomography),
        (10, "property-suite", property_suite),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_RED.contains(&id);
        let note = match (v.pass, known) {
            (false, true) => " [known red]",
            (true, true) => " [listed as known red but passed]",
            _ => "",
        };
        println!("{tag} {id:>2} {name}: {}{note}", v.detail);
        if v.pass == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected ({} known red)", KNOWN_RED.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected results for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
