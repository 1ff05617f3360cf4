use nalgebra::{DMatrix, DVector};

use super::paths::{build_paths, detrend_path_with_origin, gls_path, Innovations, LimitSpec, PathBundle};
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::{numerical_rank, RngStream};
use crate::statistics::{vr_statistic, TestKind};

/// Every statistic's limit functional evaluated on one set of paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDraw {
    pub vr: f64,
    pub adf: f64,
    pub msb: f64,
    /// Undefined under GLS detrending.
    pub zalpha: Option<f64>,
}

impl LimitDraw {
    pub fn get(&self, test: TestKind) -> Result<f64> {
        match test {
            TestKind::Vr => Ok(self.vr),
            TestKind::Adf => Ok(self.adf),
            TestKind::Msb => Ok(self.msb),
            TestKind::Zalpha => self
                .zalpha
                .ok_or_else(|| Error::InvalidConfig("the Zalpha limit is only defined under OLS detrending".into())),
        }
    }
}

/// Detrended `J^c` and `W_v` with their values at `r = 0`.
struct Transformed {
    j: Vec<f64>,
    j0: f64,
    w: Vec<Vec<f64>>,
    w0: Vec<f64>,
}

fn transform(bundle: &PathBundle, case: DeterministicCase, mode: DetrendMode) -> Transformed {
    match mode {
        DetrendMode::Ols => {
            let (j, j0) = detrend_path_with_origin(&bundle.j_c, case);
            let (w, w0) = bundle.w_v.iter().map(|p| detrend_path_with_origin(p, case)).unzip();
            Transformed { j, j0, w, w0 }
        }
        DetrendMode::Gls { c_bar } => Transformed {
            j: gls_path(&bundle.j_c, case, c_bar),
            j0: 0.0,
            w: bundle.w_v.iter().map(|p| gls_path(p, case, c_bar)).collect(),
            w0: vec![0.0; bundle.w_v.len()],
        },
    }
}

/// Evaluates the VR, ADF, MSB and (OLS only) Ẑα limit functionals.
///
/// `Q = J̃ − W̃_v'γ` is the projection residual, `A = ∫Q²`, `K = κ'Dκ` with
/// `κ = [1, −γ']'`. Under OLS detrending the stochastic integral is the
/// forward Itô sum `Σ Q_{i−1}(ΔB_i − γ'ΔW_{v,i})`; under GLS the drift of the
/// detrending transform does not vanish, so `∫Q dQ` is summed directly.
pub fn limit_functionals(bundle: &PathBundle, case: DeterministicCase, mode: DetrendMode, c: f64, r_squared: f64) -> Result<LimitDraw> {
    let tr = transform(bundle, case, mode);
    let n = tr.j.len();
    let m = tr.w.len();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut cross = DVector::<f64>::zeros(m);
    for a in 0..m {
        for b in a..m {
            let s: f64 = tr.w[a].iter().zip(&tr.w[b]).map(|(x, y)| x * y).sum();
            gram[(a, b)] = s;
            gram[(b, a)] = s;
        }
        cross[a] = tr.w[a].iter().zip(&tr.j).map(|(x, y)| x * y).sum();
    }
    if numerical_rank(&gram) < m {
        return Err(Error::NumericalSingularity);
    }
    let gamma = gram.cholesky().ok_or(Error::NumericalSingularity)?.solve(&cross);

    let q: Vec<f64> = (0..n)
        .map(|i| tr.j[i] - (0..m).map(|a| gamma[a] * tr.w[a][i]).sum::<f64>())
        .collect();
    let q0 = tr.j0 - (0..m).map(|a| gamma[a] * tr.w0[a]).sum::<f64>();
    let a_int = q.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let delta = if r_squared > 0.0 { (r_squared / (1.0 - r_squared)).sqrt() / (m as f64).sqrt() } else { 0.0 };
    let k_form = 1.0 + m as f64 * delta * delta - 2.0 * delta * gamma.sum() + gamma.norm_squared();

    let vr = vr_statistic(&q)?;
    let msb = (a_int / k_form).sqrt();
    match mode {
        DetrendMode::Ols => {
            let mut prev = q0;
            let mut b_int = 0.0;
            for i in 0..n {
                let dw: f64 = (0..m).map(|a| gamma[a] * bundle.w_v_increments[a][i]).sum();
                b_int += prev * (bundle.driver_increments[i] - dw);
                prev = q[i];
            }
            Ok(LimitDraw {
                vr,
                adf: c * (a_int / k_form).sqrt() + b_int / (k_form.sqrt() * a_int.sqrt()),
                msb,
                zalpha: Some(c + b_int / a_int),
            })
        }
        DetrendMode::Gls { .. } => {
            let mut prev = 0.0;
            let mut b_star = 0.0;
            for &qi in &q {
                b_star += prev * (qi - prev);
                prev = qi;
            }
            Ok(LimitDraw { vr, adf: b_star / (k_form.sqrt() * a_int.sqrt()), msb, zalpha: None })
        }
    }
}

/// Stream used for the `attempt`-th redraw of replication `rep`.
pub(crate) fn resample_stream(rep: u64, attempt: u64) -> u64 {
    (attempt << 40) | rep
}

pub(crate) const MAX_ATTEMPTS: u64 = 16;

/// Runs `eval` on fresh innovations for replication `rep`, redrawing on a
/// numerically singular design. Returns the value and the number of redraws.
pub(crate) fn with_resampling<T>(
    seed: u64,
    rep: u64,
    n: usize,
    m: usize,
    mut eval: impl FnMut(&Innovations) -> Result<T>,
) -> Result<(T, u64)> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = RngStream::new(seed, resample_stream(rep, attempt));
        let innov = Innovations::draw(n, m, &mut rng);
        match eval(&innov) {
            Err(Error::NumericalSingularity) => continue,
            other => return other.map(|v| (v, attempt)),
        }
    }
    Err(Error::NumericalSingularity)
}

fn single_draw(spec: &LimitSpec, rng: &mut RngStream) -> Result<f64> {
    spec.validate()?;
    let innov = Innovations::draw(spec.grid_n, spec.m, rng);
    let bundle = build_paths(&innov, spec.m, spec.c, spec.r_squared);
    limit_functionals(&bundle, spec.case, spec.detrend, spec.c, spec.r_squared)?.get(spec.test)
}

/// One draw from the local-to-unity limit of VR (OLS or GLS detrending).
pub fn limit_vr_draw(spec: &LimitSpec, rng: &mut RngStream) -> Result<f64> {
    if spec.test != TestKind::Vr {
        return Err(Error::InvalidConfig(format!("limit_vr_draw called for {}", spec.test)));
    }
    single_draw(spec, rng)
}

/// One draw from the local-to-unity limit of ADF, MSB or Ẑα.
pub fn limit_competitor_draw(spec: &LimitSpec, rng: &mut RngStream) -> Result<f64> {
    if spec.test == TestKind::Vr {
        return Err(Error::InvalidConfig("use limit_vr_draw for VR".into()));
    }
    single_draw(spec, rng)
}

/// `spec.replications` draws, replication `r` on stream `r` of `spec.seed`.
pub fn limit_draws(spec: &LimitSpec, workers: usize) -> Result<(Vec<f64>, u64)> {
    spec.validate()?;
    let out = crate::parallel::par_map(workers, spec.replications, |rep| {
        with_resampling(spec.seed, rep as u64, spec.grid_n, spec.m, |innov| {
            let bundle = build_paths(innov, spec.m, spec.c, spec.r_squared);
            limit_functionals(&bundle, spec.case, spec.detrend, spec.c, spec.r_squared)?.get(spec.test)
        })
    })?;
    let mut draws = Vec::with_capacity(out.len());
    let mut resamples = 0;
    for r in out {
        let (v, a) = r?;
        draws.push(v);
        resamples += a;
    }
    Ok((draws, resamples))
}
