//! Derivative-free minimization: a Nelder–Mead simplex with adaptive
//! coefficients, restarts, and a deterministic multi-start driver.

use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Convergence when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 20_000,
            f_tol: 1e-14,
            x_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Minimum {
    fn better_than(&self, other: &Minimum) -> bool {
        self.value < other.value
    }
}

/// Single Nelder–Mead run from `x0` with initial edge lengths `steps`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(n, steps.len(), "step vector length must match x0");
    let nf = n as f64;
    // Adaptive coefficients (Gao & Han) keep the method effective above ~5 dims.
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / nf;
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut evals = 0usize;
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if steps[i] != 0.0 { steps[i] } else { 1e-3 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let mut converged = false;
    while evals < opts.max_evals {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        if spread.abs() <= opts.f_tol * 1e-2 && values[best].is_finite() {
            // Flat region: further contraction only burns evaluations.
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / nf;
            }
        }
        for j in 0..n {
            trial[j] = centroid[j] + alpha * (centroid[j] - simplex[worst][j]);
        }
        let fr = eval(&trial, &mut evals);

        if fr < values[best] {
            for j in 0..n {
                trial2[j] = centroid[j] + gamma * (trial[j] - centroid[j]);
            }
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = fr;
            continue;
        }
        // Contraction, outside if the reflection improved on the worst point.
        let outside = fr < values[worst];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + rho * (trial[j] - centroid[j])
            } else {
                centroid[j] + rho * (simplex[worst][j] - centroid[j])
            };
        }
        let fc = eval(&trial2, &mut evals);
        let accept = if outside { fc <= fr } else { fc < values[worst] };
        if accept {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = simplex[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for j in 0..n {
                simplex[i][j] = anchor[j] + sigma * (simplex[i][j] - anchor[j]);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

/// Repeated Nelder–Mead: each restart rebuilds the simplex around the
/// incumbent with shrinking, sign-alternating steps. Stops after two
/// consecutive restarts that improve by less than `opts.f_tol`.
pub fn nelder_mead_restarts<F>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
    max_restarts: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = nelder_mead(&mut f, x0, steps, opts);
    let mut total = best.evals;
    let mut stale = 0;
    for k in 0..max_restarts {
        if total >= opts.max_evals * (max_restarts + 1) {
            break;
        }
        let scale = 0.5f64.powi(k as i32 + 1);
        let s: Vec<f64> = steps
            .iter()
            .enumerate()
            .map(|(i, &st)| {
                let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                sign * st * scale.max(1e-6)
            })
            .collect();
        let next = nelder_mead(&mut f, &best.x, &s, opts);
        total += next.evals;
        let gain = best.value - next.value;
        if next.better_than(&best) {
            best = Minimum { evals: total, ..next };
        }
        if gain <= opts.f_tol {
            stale += 1;
            if stale >= 2 {
                break;
            }
        } else {
            stale = 0;
        }
    }
    best.evals = total;
    best
}

/// Runs `nelder_mead_restarts` from every start in parallel and returns the
/// lowest value; ties go to the lowest start index, so the result does not
/// depend on scheduling.
pub fn multi_start<F>(
    f: F,
    starts: &[Vec<f64>],
    steps: &[f64],
    opts: &NelderMeadOptions,
    max_restarts: usize,
) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!starts.is_empty(), "multi_start needs at least one start");
    let results: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| nelder_mead_restarts(&f, x0, steps, opts, max_restarts))
        .collect();
    let evals: usize = results.iter().map(|m| m.evals).sum();
    let converged = results.iter().all(|m| m.converged);
    let mut best = results
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("non-empty");
    best.evals = evals;
    best.converged = best.converged || converged;
    best
}
