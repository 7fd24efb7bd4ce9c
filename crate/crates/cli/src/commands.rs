use std::collections::BTreeMap;
use std::fs;

use qsteer::lhsm::{
    alice_assemblage, construct_lhsm, construct_lhsm_singular, decompose_hidden_state, singular_settings,
    validate_lhsm, EllipsoidParams,
};
use qsteer::noise::{fidelity_region_radius, noise_thresholds, FidelityFloor, SOURCE_FIDELITY_CAVEAT};
use qsteer::quantum::{apply_white_noise, BlochVector, MeasurementSetting, Side, TwoQubitState};
use qsteer::steering::{
    analytic_radius_ab, analytic_radius_ba, classify, classify_from_radii, conditional_assemblage, sqhsm_radius,
    steering_radius, steering_radius_with, Assemblage, Direction, ExhaustiveOptions, HiddenStateEnsemble,
    SettingsSearch, SteeringVerdict,
};
use qsteer::tomo::{simulate_experiment, write_counts_csv};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::document::{round12, ResultDocument, Status};
use crate::{CliError, Command, FidelityArgs, LhsmArgs, Outcome, RadiusArgs, SimulateArgs, SweepArgs};

type CmdResult = Result<Outcome, CliError>;

pub fn run(command: &Command, argv: Vec<String>) -> CmdResult {
    match command {
        Command::Radius(a) => radius(a, argv),
        Command::Sweep(a) => sweep(a, argv),
        Command::Lhsm(a) => lhsm(a, argv),
        Command::Fidelity(a) => fidelity(a, argv),
        Command::Simulate(a) => simulate(a, argv),
    }
}

fn doc(document: ResultDocument) -> CmdResult {
    Ok(Outcome {
        document: Some(document),
        csv: None,
    })
}

fn vec3(v: BlochVector) -> Value {
    json!([v.x, v.y, v.z])
}

fn settings_json(s: &[MeasurementSetting; 2]) -> Value {
    json!(s
        .iter()
        .map(|m| json!({"label": m.label, "direction": vec3(m.direction)}))
        .collect::<Vec<_>>())
}

fn ensemble_json(e: &HiddenStateEnsemble) -> Value {
    let table = e.response.table();
    let states: Vec<Value> = e
        .entries
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let activates: Vec<&str> = ["C1", "C2", "D1", "D2"]
                .iter()
                .zip(&table)
                .filter(|(_, row)| row[i] == 1)
                .map(|(l, _)| *l)
                .collect();
            json!({
                "label": h.label,
                "probability": h.probability,
                "point": vec3(h.point),
                "norm": h.point.norm(),
                "activates": activates,
            })
        })
        .collect();
    json!({
        "super_quantum": e.super_quantum,
        "max_norm": e.max_norm(),
        "states": states,
    })
}

fn verdict_json(v: &SteeringVerdict) -> Value {
    json!({
        "direction": v.direction.as_str(),
        "radius": v.radius,
        "steerable": v.steerable,
        "robustness": v.robustness,
        "converged": v.converged,
        "settings": settings_json(&v.settings),
        "ensemble": v.minimizing_ensemble.as_ref().map(ensemble_json),
    })
}

fn assemblage_json(a: &Assemblage) -> Value {
    json!(a
        .members()
        .iter()
        .map(|m| json!({
            "label": m.label(),
            "weight": m.weight,
            "bloch": vec3(m.bloch),
        }))
        .collect::<Vec<_>>())
}

fn radius(a: &RadiusArgs, argv: Vec<String>) -> CmdResult {
    let (rho, input) = match (a.theta, a.eta, &a.state) {
        (Some(t), Some(e), _) => (TwoQubitState::family(t, e)?, json!({"theta": t, "eta": e})),
        (_, _, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let rho =
                TwoQubitState::from_text(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            (rho, json!({"state_file": path.display().to_string()}))
        }
        _ => return Err(CliError::Input("give --theta and --eta, or --state".into())),
    };
    let family = rho.family_params();
    if a.analytic && family.is_none() {
        return Err(CliError::Input(
            "closed-form radii exist only for states of the (θ, η) family".into(),
        ));
    }
    let search = match (&a.settings, a.exhaustive) {
        (Some(s), _) => SettingsSearch::Fixed(s.clone()),
        (None, true) => SettingsSearch::Exhaustive(ExhaustiveOptions::default()),
        (None, false) => SettingsSearch::Auto,
    };
    let mut results = Vec::new();
    let mut radii = BTreeMap::new();
    let mut converged = true;
    for d in a.direction.directions() {
        let v = steering_radius_with(&rho, d, &search)?;
        converged &= v.converged;
        radii.insert(d.as_str(), v.radius);
        let mut entry = verdict_json(&v);
        if let (true, Some(p)) = (a.analytic, family) {
            let an = match d {
                Direction::AToB => analytic_radius_ab(p.theta, p.eta)?,
                Direction::BToA => analytic_radius_ba(p.theta, p.eta)?,
            };
            entry["analytic"] = json!({
                "radius": an.value,
                "trivial": an.trivial,
                "difference": v.radius - an.value,
            });
        }
        results.push(entry);
    }
    let class = match (family, radii.get("ab"), radii.get("ba")) {
        (Some(p), _, _) => Some(classify(p.theta, p.eta)?),
        (None, Some(&ab), Some(&ba)) => Some(classify_from_radii(ab, ba)),
        _ => None,
    };
    let mut d = ResultDocument::new(
        argv,
        json!({"state": input, "direction": format!("{:?}", a.direction).to_lowercase(),
        "search": match search {
            SettingsSearch::Auto => "auto",
            SettingsSearch::Fixed(_) => "fixed",
            SettingsSearch::Exhaustive(_) => "exhaustive",
        }}),
        json!({"radii": results, "class": class.map(|c| c.as_str())}),
    );
    if !converged {
        d.status = Status::Partial;
    }
    doc(d)
}

fn sweep(a: &SweepArgs, argv: Vec<String>) -> CmdResult {
    let thetas = a.theta.values();
    let etas = a.eta.values();
    let cells: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| etas.iter().map(move |&e| (t, e))).collect();
    let rows: Vec<(f64, f64, &'static str, f64, f64)> = cells
        .par_iter()
        .map(|&(t, e)| -> Result<_, qsteer::Error> {
            let rho = TwoQubitState::family(t, e)?;
            Ok((
                t,
                e,
                classify(t, e)?.as_str(),
                steering_radius(&rho, Direction::AToB)?.radius,
                steering_radius(&rho, Direction::BToA)?.radius,
            ))
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("theta,eta,class,R_ab,R_ba\n");
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (t, e, c, ab, ba) in &rows {
        *counts.entry(c).or_default() += 1;
        csv.push_str(&format!(
            "{},{},{c},{},{}\n",
            round12(*t),
            round12(*e),
            round12(*ab),
            round12(*ba)
        ));
    }
    match &a.out {
        None => Ok(Outcome {
            document: None,
            csv: Some(csv),
        }),
        Some(path) => {
            fs::write(path, &csv).map_err(|e| CliError::Core(qsteer::Error::Io(format!("{}: {e}", path.display()))))?;
            doc(ResultDocument::new(
                argv,
                json!({
                    "theta": [a.theta.start, a.theta.stop, a.theta.count],
                    "eta": [a.eta.start, a.eta.stop, a.eta.count],
                }),
                json!({"csv": path.display().to_string(), "rows": rows.len(), "classes": counts}),
            ))
        }
    }
}

fn lhsm(a: &LhsmArgs, argv: Vec<String>) -> CmdResult {
    let (t, e) = (a.family.theta, a.family.eta);
    let rho = TwoQubitState::family(t, e)?;
    let settings = if a.singular {
        singular_settings(t)?
    } else {
        a.settings.clone()
    };
    let direction: Direction = a.direction.into();
    let input = json!({
        "theta": t, "eta": e, "direction": direction.as_str(),
        "settings": settings_json(&settings), "singular": a.singular,
    });

    let asm = conditional_assemblage(&rho, settings.clone(), direction.steered())?;
    let model = match direction {
        Direction::BToA => {
            let built = if a.singular {
                construct_lhsm_singular(t, e)
            } else {
                construct_lhsm(t, e, settings.clone())
            };
            match built {
                Ok(ens) => Some(ens),
                Err(qsteer::Error::Region { .. }) => None,
                Err(err) => return Err(err.into()),
            }
        }
        Direction::AToB => None,
    };
    let output = match model {
        Some(ens) => {
            let asm = alice_assemblage(t, e, settings)?;
            let report = validate_lhsm(&ens, &asm, 1e-9)?;
            let ell = EllipsoidParams::new(t, e)?;
            let mut body = ensemble_json(&ens);
            for (h, slot) in ens
                .entries
                .iter()
                .zip(body["states"].as_array_mut().into_iter().flatten())
            {
                slot["ellipsoid_residual"] = json!(ell.hidden_residual(h.point));
                slot["decomposition"] = match decompose_hidden_state(h.point) {
                    Ok(dec) => json!({
                        "alpha": dec.alpha, "mu": dec.mu, "nu": dec.nu,
                        "pole": format!("{:?}", dec.pole), "azimuth": dec.azimuth,
                    }),
                    Err(_) => Value::Null,
                };
            }
            json!({
                "lhsm_exists": true,
                "model": body,
                "assemblage": assemblage_json(&asm),
                "ellipsoids": {"r_e": ell.r_e, "R_e": ell.hidden_r_e,
                    "cs_residuals": asm.blochs().map(|v| ell.cs_residual(v))},
                "validation": report,
            })
        }
        None => {
            let v = sqhsm_radius(&asm);
            let exists = !v.steerable;
            json!({
                "lhsm_exists": exists,
                "explanation": if exists {
                    "the optimal ensemble lies inside the Bloch ball and is itself a local model"
                } else {
                    "the steering radius exceeds 1, so no local hidden state model exists; the optimal super-quantum ensemble is reported instead"
                },
                "radius": v.radius,
                "model": v.minimizing_ensemble.as_ref().map(ensemble_json),
                "assemblage": assemblage_json(&asm),
            })
        }
    };
    doc(ResultDocument::new(argv, input, output))
}

fn floor_json(f: &FidelityFloor) -> Value {
    json!({
        "value": f.value, "residual": f.residual, "margin": f.margin,
        "evaluations": f.evaluations, "converged": f.converged,
    })
}

fn fidelity(a: &FidelityArgs, argv: Vec<String>) -> CmdResult {
    let (t, e) = (a.family.theta, a.family.eta);
    if a.budget == 0 {
        return Err(CliError::Input("budget must be positive".into()));
    }
    let th = noise_thresholds(t, e, a.budget)?;
    let mut d = ResultDocument::new(
        argv,
        json!({"theta": t, "eta": e, "budget": a.budget, "settings": "xz"}),
        json!({
            "lambda_min": th.lambda_min,
            "f_source_min": th.f_source_min,
            "source_caveat": SOURCE_FIDELITY_CAVEAT,
            "f_bob": floor_json(&th.f_bob),
            "f_alice": floor_json(&th.f_alice),
            "f_one_way": th.f_one_way,
        }),
    );
    if !(th.f_bob.converged && th.f_alice.converged) {
        d.status = Status::Partial;
    }
    doc(d)
}

fn simulate(a: &SimulateArgs, argv: Vec<String>) -> CmdResult {
    let (t, e) = (a.family.theta, a.family.eta);
    let direction: Direction = a.direction.into();
    let ideal = TwoQubitState::family(t, e)?;
    let actual = apply_white_noise(&ideal, a.source_lambda)?;
    let m = simulate_experiment(&actual, &ideal, direction, a.settings.clone(), a.pairs, a.seed)?;
    if let Some(path) = &a.counts_out {
        let file = fs::File::create(path)
            .map_err(|err| CliError::Core(qsteer::Error::Io(format!("{}: {err}", path.display()))))?;
        write_counts_csv(&m.records, file)?;
    }
    let (projected, _) = m.projected()?;
    let measured = sqhsm_radius(&projected);
    let uncertain = m.uncertain_radius()?;
    let nominal = sqhsm_radius(&m.nominal);
    let region = fidelity_region_radius(&m.nominal, m.fidelities, 8, a.seed)?;
    let members: Vec<Value> = m
        .assemblage
        .members()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            json!({
                "label": c.label(),
                "weight": c.weight,
                "bloch": vec3(c.bloch),
                "error_radius": m.errors[i].radius,
                "fidelity": m.fidelities[i],
                "clipped": m.clipped[i],
            })
        })
        .collect();
    let mut d = ResultDocument::new(
        argv,
        json!({
            "theta": t, "eta": e, "direction": direction.as_str(),
            "settings": settings_json(&a.settings),
            "N": if a.pairs.is_finite() { json!(a.pairs) } else { json!("inf") },
            "source_lambda": a.source_lambda,
        }),
        json!({
            "steered": match direction.steered() { Side::A => "A", Side::B => "B" },
            "total_counts": m.records.iter().map(|r| r.counts).sum::<u64>(),
            "assemblage": members,
            "signaling_gap": m.assemblage.signaling_gap(),
            "min_fidelity": m.min_fidelity(),
            "nominal_radius": nominal.radius,
            "measured_radius": measured.radius,
            "uncertainty_radius": verdict_json(&uncertain),
            "fidelity_region_radius": region.radius,
            "fidelity_region_below_uncertainty": region.radius < uncertain.radius,
        }),
    );
    d.seed = Some(a.seed);
    if !uncertain.converged {
        d.status = Status::Partial;
    }
    doc(d)
}
