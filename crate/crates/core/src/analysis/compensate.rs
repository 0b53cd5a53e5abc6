use super::{micromotion_metric, AnalysisError, ModelFamily};
use crate::dynamics::{simulate, ForceConfig, IonState};
use crate::trapmodel::{find_equilibrium, DriveConfig, IonSpecies};
use crate::Vec3;

/// Outcome of a bounded Nelder-Mead search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub point: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead minimization in two dimensions with trial points clamped to
/// `bounds`. Stops when the simplex diameter falls below `tol` or after
/// `max_evals` evaluations.
pub fn nelder_mead(
    mut f: impl FnMut([f64; 2]) -> f64,
    start: [[f64; 2]; 3],
    bounds: [(f64, f64); 2],
    tol: f64,
    max_evals: usize,
) -> SimplexResult {
    let clamp = |p: [f64; 2]| [p[0].clamp(bounds[0].0, bounds[0].1), p[1].clamp(bounds[1].0, bounds[1].1)];
    let mut evals = 0;
    let mut eval = |p: [f64; 2], evals: &mut usize| {
        *evals += 1;
        let v = f(p);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut s: Vec<([f64; 2], f64)> = start.iter().map(|p| {
        let p = clamp(*p);
        (p, eval(p, &mut evals))
    }).collect();
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut converged = false;
    while evals < max_evals {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = dist(s[0].0, s[1].0).max(dist(s[0].0, s[2].0)).max(dist(s[1].0, s[2].0));
        if diameter < tol {
            converged = true;
            break;
        }
        let centroid = lerp(s[0].0, s[1].0, 0.5);
        let worst = s[2];
        let reflected = clamp(lerp(worst.0, centroid, 2.0));
        let fr = eval(reflected, &mut evals);
        if fr < s[0].1 {
            let expanded = clamp(lerp(worst.0, centroid, 3.0));
            let fe = eval(expanded, &mut evals);
            s[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < s[1].1 {
            s[2] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (reflected, fr) } else { (worst.0, worst.1) };
            let contracted = clamp(lerp(centroid, target, 0.5));
            let fc = eval(contracted, &mut evals);
            if fc < ft {
                s[2] = (contracted, fc);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    let p = lerp(best, v.0, 0.5);
                    *v = (p, eval(p, &mut evals));
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult { point: s[0].0, value: s[0].1, evaluations: evals, converged }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensationOptions {
    /// Simplex diameter at which the search stops (V).
    pub tolerance: f64,
    /// RF cycles simulated per metric evaluation.
    pub rf_cycles: f64,
    pub steps_per_rf_period: usize,
    pub sample_stride: usize,
    pub max_evaluations: usize,
    /// Laser forces during each evaluation.
    pub forces: ForceConfig,
}

impl Default for CompensationOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.1,
            rf_cycles: 200.0,
            steps_per_rf_period: 200,
            sample_stride: 4,
            max_evaluations: 400,
            forces: ForceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CompensationResult {
    /// `V_C1 - V_C3` offset (V).
    pub dv13: f64,
    /// `V_C2 - V_C4` offset (V).
    pub dv24: f64,
    pub metric: f64,
    /// The optimum lies within the tolerance of the search-box edge.
    pub on_boundary: bool,
    pub evaluations: usize,
    pub converged: bool,
}

/// Micromotion metric of the ion released at its effective-potential
/// equilibrium with differential compensation voltages `(dv13, dv24)`.
pub fn compensation_metric<F: ModelFamily + ?Sized>(
    family: &F,
    ion: &IonSpecies,
    base: &DriveConfig,
    dv: [f64; 2],
    options: &CompensationOptions,
) -> Result<f64, AnalysisError> {
    let mut drive = base.clone();
    drive.set_compensation(base.comp_common(), dv[0], dv[1]);
    let model = family.build(&drive)?;
    let eq = find_equilibrium(&model, ion, &Vec3::zeros())?;
    let dt = drive.rf_period() / options.steps_per_rf_period as f64;
    let duration = options.rf_cycles * drive.rf_period();
    let traj = simulate(&model, ion, &IonState::at_rest(eq), duration, dt, &options.forces, options.sample_stride)?;
    if traj.escaped {
        return Err(AnalysisError::Escaped("during a compensation evaluation".into()));
    }
    micromotion_metric(&traj, drive.omega_rf)
}

/// Minimizes the micromotion metric over the differential compensation
/// voltages `(dv13, dv24)` inside the search box. The base drive's own
/// differential voltages are replaced; its common mode is kept.
pub fn compensate<F: ModelFamily + ?Sized>(
    family: &F,
    ion: &IonSpecies,
    base: &DriveConfig,
    box13: (f64, f64),
    box24: (f64, f64),
    options: &CompensationOptions,
) -> Result<CompensationResult, AnalysisError> {
    for (lo, hi) in [box13, box24] {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(AnalysisError::InvalidParameter(format!("search range [{lo}, {hi}] V is empty")));
        }
    }
    if !(options.tolerance > 0.0) {
        return Err(AnalysisError::InvalidParameter("tolerance must be > 0".into()));
    }
    let c = [0.5 * (box13.0 + box13.1), 0.5 * (box24.0 + box24.1)];
    let w = [box13.1 - box13.0, box24.1 - box24.0];
    let start = [c, [c[0] + 0.2 * w[0], c[1]], [c[0], c[1] + 0.2 * w[1]]];
    let res = nelder_mead(
        |p| compensation_metric(family, ion, base, p, options).unwrap_or(f64::INFINITY),
        start,
        [box13, box24],
        options.tolerance,
        options.max_evaluations,
    );
    if !res.value.is_finite() {
        return Err(AnalysisError::Escaped("no voltage in the search box gives a stable ion".into()));
    }
    let t = options.tolerance;
    let [x, y] = res.point;
    let on_boundary =
        x - box13.0 < t || box13.1 - x < t || y - box24.0 < t || box24.1 - y < t;
    Ok(CompensationResult {
        dv13: x,
        dv24: y,
        metric: res.value,
        on_boundary,
        evaluations: res.evaluations,
        converged: res.converged,
    })
}
