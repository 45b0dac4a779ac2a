//! Nelder–Mead simplex search on the unit cube. Vertices leaving the cube are
//! clamped back onto it, which keeps every evaluation inside the bounds.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadSettings {
    /// Converged once the largest vertex distance from the best vertex (unit
    /// cube coordinates, max-norm) drops below this.
    pub simplex_tolerance: f64,
    pub max_iterations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        Self { simplex_tolerance: 1e-9, max_iterations: 2000, initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub simplex_size: f64,
    /// Best value after each iteration; non-increasing.
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp_unit(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

fn simplex_size(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Minimises `f` over [0, 1]^n starting from `start`.
///
/// Non-finite objective values are treated as +∞.
pub fn minimize<F>(f: F, start: &[f64], settings: &NelderMeadSettings) -> NelderMeadOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(&x0);
    simplex.push((x0.clone(), v0));
    for i in 0..n {
        let mut x = x0.clone();
        let step = settings.initial_step;
        x[i] = if x[i] + step <= 1.0 { x[i] + step } else { x[i] - step };
        let v = eval(&x);
        simplex.push((x, v));
    }

    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut simplex);

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut size = simplex_size(&simplex);

    while iterations < settings.max_iterations {
        if size < settings.simplex_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> =
                centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect();
            clamp_unit(&mut x);
            x
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(REFLECT * CONTRACT);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-CONTRACT);
                let v = eval(&x);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + SHRINK * (*xi - bi);
                    }
                    *v = eval(x);
                }
            }
        }
        sort(&mut simplex);
        size = simplex_size(&simplex);
        history.push(simplex[0].1);
    }
    if !converged && size < settings.simplex_tolerance {
        converged = true;
    }

    let (point, value) = simplex.swap_remove(0);
    NelderMeadOutcome { point, value, iterations, evaluations, converged, simplex_size: size, history }
}
