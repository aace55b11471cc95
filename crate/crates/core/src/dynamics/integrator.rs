//! Explicit adaptive Runge-Kutta integration of complex linear systems.
//!
//! DOP853 (Dormand-Prince 8(5,3)) is the default method; Dormand-Prince 5(4)
//! is kept as an independent cross-check. Both use Hairer's step-size
//! controller and initial-step heuristic.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Dop853,
    Dopri5,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dop853 => "dop853",
            Method::Dopri5 => "dopri5",
        }
    }

    fn order(self) -> f64 {
        match self {
            Method::Dop853 => 8.0,
            Method::Dopri5 => 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of the fastest phase period `2π/|ω|`.
    pub max_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: Method::Dop853,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step_fraction: 0.25,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// `max_step_fraction · 2π / |ω|`, unbounded when `ω = 0`.
    pub fn max_step_for(&self, fastest_frequency: f64) -> f64 {
        if fastest_frequency == 0.0 {
            f64::INFINITY
        } else {
            self.max_step_fraction * std::f64::consts::TAU / fastest_frequency.abs()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0 && self.max_step_fraction > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerances must be positive (rel {}, abs {}, max step fraction {})",
                self.rel_tol, self.abs_tol, self.max_step_fraction
            )));
        }
        Ok(())
    }
}

/// `dy/dt = f(t, y)` over complex vectors.
pub trait OdeSystem {
    fn len(&self) -> usize;
    fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct Integration {
    pub y: Vec<Complex64>,
    /// States at the requested sample times, in order.
    pub samples: Vec<(f64, Vec<Complex64>)>,
    pub stats: IntegrationStats,
}

const SAFE: f64 = 0.9;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integrates from `t0` to `t1 >= t0`. Every sample time must lie in `[t0, t1]`
/// and is hit exactly by shortening the step that would cross it.
pub fn integrate<S: OdeSystem>(
    sys: &mut S,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    spec: &IntegratorSpec,
    max_step: f64,
    sample_times: &[f64],
) -> Result<Integration> {
    spec.validate()?;
    let n = sys.len();
    if y0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y0.len(),
        });
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!(
            "final time {t1} precedes start {t0}"
        )));
    }
    let mut targets: Vec<f64> = sample_times.to_vec();
    targets.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    if targets.iter().any(|&s| s < t0 || s > t1 || !s.is_finite()) {
        return Err(Error::InvalidParameter(
            "sample times must lie inside the integration interval".into(),
        ));
    }

    let mut stepper = Stepper::new(spec.method, n);
    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let mut samples = Vec::with_capacity(targets.len());
    let mut next = 0;
    while next < targets.len() && targets[next] == t0 {
        samples.push((t0, y.clone()));
        next += 1;
    }
    if t1 == t0 {
        return Ok(Integration { y, samples, stats });
    }

    let hmax = max_step.min(t1 - t0);
    let mut t = t0;
    sys.eval(t, &y, &mut stepper.k[0]);
    stats.evaluations += 1;
    stepper.fsal_ready = true;
    let f0 = stepper.k[0].clone();
    let mut h = initial_step(sys, spec, &y, &f0, t, hmax, &mut stepper.scratch, &mut stats);
    let expo = 1.0 / spec.method.order();
    let (fac_min, fac_max) = match spec.method {
        Method::Dop853 => (1.0 / 6.0, 1.0 / 0.333),
        Method::Dopri5 => (1.0 / 10.0, 1.0 / 0.2),
    };
    let mut last_rejected = false;

    loop {
        let stop = targets.get(next).copied().unwrap_or(t1);
        let mut hit = false;
        let mut step = h.min(hmax);
        if t + step >= stop - 1e-14 * stop.abs().max(1.0) {
            step = stop - t;
            hit = true;
        }
        if stats.accepted + stats.rejected >= spec.max_steps {
            return Err(Error::Integration {
                time: t,
                reason: format!("step budget of {} exhausted", spec.max_steps),
            });
        }
        if step <= 1e-14 * t.abs().max(1e-300) || !step.is_finite() {
            return Err(Error::Integration {
                time: t,
                reason: format!("step size underflow (h = {step:e})"),
            });
        }

        let err = stepper.step(sys, t, step, &y, spec, &mut stats);
        if !err.is_finite() {
            return Err(Error::Integration {
                time: t,
                reason: "non-finite error estimate".into(),
            });
        }
        let fac11 = err.powf(expo);
        let fac = (fac11 / SAFE).clamp(fac_min, fac_max);
        let mut h_new = step / fac;
        if err <= 1.0 {
            stats.accepted += 1;
            t = if hit { stop } else { t + step };
            std::mem::swap(&mut y, &mut stepper.y_new);
            stepper.accept();
            if last_rejected {
                h_new = h_new.min(step);
            }
            last_rejected = false;
            if hit {
                if next < targets.len() {
                    samples.push((t, y.clone()));
                    next += 1;
                    while next < targets.len() && targets[next] == t {
                        samples.push((t, y.clone()));
                        next += 1;
                    }
                }
                if t >= t1 {
                    break;
                }
                // the shortened step says nothing about the natural step size
                h_new = h_new.max(h);
            }
            h = h_new.min(hmax);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = step / fac_max.min(fac11 / SAFE);
        }
    }
    Ok(Integration { y, samples, stats })
}

#[allow(clippy::too_many_arguments)]
fn initial_step<S: OdeSystem>(
    sys: &mut S,
    spec: &IntegratorSpec,
    y: &[Complex64],
    f0: &[Complex64],
    t: f64,
    hmax: f64,
    scratch: &mut [Vec<Complex64>; 2],
    stats: &mut IntegrationStats,
) -> f64 {
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for (yi, fi) in y.iter().zip(f0) {
        let sk = spec.abs_tol + spec.rel_tol * yi.norm();
        dnf += (fi.norm() / sk).powi(2);
        dny += (yi.norm() / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);
    let [y1, f1] = scratch;
    for ((a, yi), fi) in y1.iter_mut().zip(y).zip(f0) {
        *a = yi + fi * h;
    }
    sys.eval(t + h, y1, f1);
    stats.evaluations += 1;
    let mut der2 = 0.0;
    for ((yi, a), b) in y.iter().zip(f1.iter()).zip(f0) {
        let sk = spec.abs_tol + spec.rel_tol * yi.norm();
        der2 += ((a - b).norm() / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / spec.method.order())
    };
    (100.0 * h).min(h1).min(hmax)
}

struct Stepper {
    method: Method,
    k: Vec<Vec<Complex64>>,
    y_stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    scratch: [Vec<Complex64>; 2],
    fsal_ready: bool,
}

impl Stepper {
    fn new(method: Method, n: usize) -> Self {
        let stages = match method {
            Method::Dop853 => 12,
            Method::Dopri5 => 7,
        };
        Stepper {
            method,
            k: vec![vec![ZERO; n]; stages],
            y_stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
            scratch: [vec![ZERO; n], vec![ZERO; n]],
            fsal_ready: false,
        }
    }

    /// After acceptance the derivative at the new point becomes stage 1.
    fn accept(&mut self) {
        match self.method {
            Method::Dop853 => self.fsal_ready = false,
            Method::Dopri5 => {
                self.k.swap(0, 6);
                self.fsal_ready = true;
            }
        }
    }

    fn step<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        h: f64,
        y: &[Complex64],
        spec: &IntegratorSpec,
        stats: &mut IntegrationStats,
    ) -> f64 {
        match self.method {
            Method::Dop853 => self.step_dop853(sys, t, h, y, spec, stats),
            Method::Dopri5 => self.step_dopri5(sys, t, h, y, spec, stats),
        }
    }

    fn ensure_k0<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[Complex64], stats: &mut IntegrationStats) {
        if !self.fsal_ready {
            sys.eval(t, y, &mut self.k[0]);
            stats.evaluations += 1;
            self.fsal_ready = true;
        }
    }

    /// Evaluates stage `s` from the weighted earlier stages.
    fn stage<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        s: usize,
        t: f64,
        h: f64,
        y: &[Complex64],
        row: &[(usize, f64)],
        stats: &mut IntegrationStats,
    ) {
        combine(&mut self.y_stage, y, h, row, &self.k);
        sys.eval(t, &self.y_stage, &mut self.k[s]);
        stats.evaluations += 1;
    }

    fn step_dop853<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        h: f64,
        y: &[Complex64],
        spec: &IntegratorSpec,
        stats: &mut IntegrationStats,
    ) -> f64 {
        use dop853::*;
        // k[0] is f(t, y) at the start of every attempt
        self.ensure_k0(sys, t, y, stats);
        for s in 1..12 {
            let row: Vec<(usize, f64)> = A[s - 1]
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (j, *a))
                .collect();
            let c = if s == 11 { 1.0 } else { C[s] };
            self.stage(sys, s, t + c * h, h, y, &row, stats);
        }
        let b_row: Vec<(usize, f64)> = B
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, b)| (j, *b))
            .collect();
        // new solution and both error estimates in one pass
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..y.len() {
            let mut bsum = ZERO;
            for &(j, b) in &b_row {
                bsum += self.k[j][i] * b;
            }
            self.y_new[i] = y[i] + bsum * h;
            let sk = spec.abs_tol + spec.rel_tol * y[i].norm_sqr().max(self.y_new[i].norm_sqr()).sqrt();
            let inv = 1.0 / (sk * sk);
            let e2 = bsum - self.k[0][i] * BHH[0] - self.k[8][i] * BHH[1] - self.k[11][i] * BHH[2];
            err2 += e2.norm_sqr() * inv;
            let mut e = ZERO;
            for &(j, ej) in E_SPARSE {
                e += self.k[j][i] * ej;
            }
            err += e.norm_sqr() * inv;
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (y.len() as f64 * deno)).sqrt()
    }

    fn step_dopri5<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        h: f64,
        y: &[Complex64],
        spec: &IntegratorSpec,
        stats: &mut IntegrationStats,
    ) -> f64 {
        use dopri5::*;
        self.ensure_k0(sys, t, y, stats);
        for s in 1..7 {
            let row: Vec<(usize, f64)> = A[s - 1]
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, a)| (j, *a))
                .collect();
            self.stage(sys, s, t + C[s] * h, h, y, &row, stats);
        }
        // FSAL: the seventh stage sits at the 5th-order solution
        self.y_new.copy_from_slice(&self.y_stage);
        let mut err = 0.0;
        for i in 0..y.len() {
            let sk = spec.abs_tol + spec.rel_tol * y[i].norm_sqr().max(self.y_new[i].norm_sqr()).sqrt();
            let mut e = ZERO;
            for (j, ej) in E.iter().enumerate() {
                if *ej != 0.0 {
                    e += self.k[j][i] * *ej;
                }
            }
            err += e.norm_sqr() * (h / sk).powi(2);
        }
        (err / y.len() as f64).sqrt()
    }
}

/// `out = y + h Σ a_j k_j`, chunked so each output block stays in cache.
fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, row: &[(usize, f64)], k: &[Vec<Complex64>]) {
    const CHUNK: usize = 512;
    for (c, o) in out.chunks_mut(CHUNK).enumerate() {
        let lo = c * CHUNK;
        let hi = lo + o.len();
        o.copy_from_slice(&y[lo..hi]);
        for &(j, a) in row {
            let w = a * h;
            for (oi, kj) in o.iter_mut().zip(&k[j][lo..hi]) {
                *oi += kj * w;
            }
        }
    }
}

mod dop853 {
    pub const C: [f64; 12] = [
        0.0,
        0.526001519587677318785587544488e-01,
        0.789002279381515978178381316732e-01,
        0.118350341907227396726757197510e+00,
        0.281649658092772603273242802490e+00,
        0.333333333333333333333333333333e+00,
        0.25e+00,
        0.307692307692307692307692307692e+00,
        0.651282051282051282051282051282e+00,
        0.6e+00,
        0.857142857142857142857142857142e+00,
        1.0,
    ];

    pub const A: [&[f64]; 11] = [
        &[5.26001519587677318785587544488e-2],
        &[1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2],
        &[2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2],
        &[
            2.41365134159266685502369798665e-1,
            0.0,
            -8.84549479328286085344864962717e-1,
            9.24834003261792003115737966543e-1,
        ],
        &[
            3.7037037037037037037037037037e-2,
            0.0,
            0.0,
            1.70828608729473871279604482173e-1,
            1.25467687566822425016691814123e-1,
        ],
        &[
            3.7109375e-2,
            0.0,
            0.0,
            1.70252211019544039314978060272e-1,
            6.02165389804559606850219397283e-2,
            -1.7578125e-2,
        ],
        &[
            3.70920001185047927108779319836e-2,
            0.0,
            0.0,
            1.70383925712239993810214054705e-1,
            1.07262030446373284651809199168e-1,
            -1.53194377486244017527936158236e-2,
            8.27378916381402288758473766002e-3,
        ],
        &[
            6.24110958716075717114429577812e-1,
            0.0,
            0.0,
            -3.36089262944694129406857109825e0,
            -8.68219346841726006818189891453e-1,
            2.75920996994467083049415600797e1,
            2.01540675504778934086186788979e1,
            -4.34898841810699588477366255144e1,
        ],
        &[
            4.77662536438264365890433908527e-1,
            0.0,
            0.0,
            -2.48811461997166764192642586468e0,
            -5.90290826836842996371446475743e-1,
            2.12300514481811942347288949897e1,
            1.52792336328824235832596922938e1,
            -3.32882109689848629194453265587e1,
            -2.03312017085086261358222928593e-2,
        ],
        &[
            -9.3714243008598732571704021658e-1,
            0.0,
            0.0,
            5.18637242884406370830023853209e0,
            1.09143734899672957818500254654e0,
            -8.14978701074692612513997267357e0,
            -1.85200656599969598641566180701e1,
            2.27394870993505042818970056734e1,
            2.49360555267965238987089396762e0,
            -3.0467644718982195003823669022e0,
        ],
        &[
            2.27331014751653820792359768449e0,
            0.0,
            0.0,
            -1.05344954667372501984066689879e1,
            -2.00087205822486249909675718444e0,
            -1.79589318631187989172765950534e1,
            2.79488845294199600508499808837e1,
            -2.85899827713502369474065508674e0,
            -8.87285693353062954433549289258e0,
            1.23605671757943030647266201528e1,
            6.43392746015763530355970484046e-1,
        ],
    ];

    pub const B: [f64; 12] = [
        5.42937341165687622380535766363e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.45031289275240888144113950566e0,
        1.89151789931450038304281599044e0,
        -5.8012039600105847814672114227e0,
        3.1116436695781989440891606237e-1,
        -1.52160949662516078556178806805e-1,
        2.01365400804030348374776537501e-1,
        4.47106157277725905176885569043e-2,
    ];

    pub const BHH: [f64; 3] = [
        0.244094488188976377952755905512e+00,
        0.733846688281611857341361741547e+00,
        0.220588235294117647058823529412e-01,
    ];

    pub const E_SPARSE: &[(usize, f64)] = &[
        (0, 0.1312004499419488073250102996e-01),
        (5, -0.1225156446376204440720569753e+01),
        (6, -0.4957589496572501915214079952e+00),
        (7, 0.1664377182454986536961530415e+01),
        (8, -0.3503288487499736816886487290e+00),
        (9, 0.3341791187130174790297318841e+00),
        (10, 0.8192320648511571246570742613e-01),
        (11, -0.2235530786388629525884427845e-01),
    ];
}

mod dopri5 {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

    pub const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];

    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `dy/dt = i ω y` per component, with component-dependent ω.
    struct Rotor(Vec<f64>);

    impl OdeSystem for Rotor {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn eval(&mut self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            for ((d, v), w) in dy.iter_mut().zip(y).zip(&self.0) {
                *d = Complex64::new(0.0, *w) * v;
            }
        }
    }

    /// `dy/dt = cos(t) y`, solution `exp(sin t)`.
    struct Forced;

    impl OdeSystem for Forced {
        fn len(&self) -> usize {
            1
        }
        fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            dy[0] = y[0] * t.cos();
        }
    }

    #[test]
    fn rotor_matches_exponential() {
        for method in [Method::Dop853, Method::Dopri5] {
            let spec = IntegratorSpec::default().with_method(method);
            let mut sys = Rotor(vec![1.0, -3.0, 10.0]);
            let y0 = vec![Complex64::new(1.0, 0.0); 3];
            let out = integrate(&mut sys, &y0, 0.0, 2.0, &spec, f64::INFINITY, &[]).unwrap();
            for (y, w) in out.y.iter().zip(&sys.0) {
                let exact = Complex64::from_polar(1.0, w * 2.0);
                assert!((y - exact).norm() < 1e-6, "{method:?}: {y} vs {exact}");
            }
            assert!(out.stats.accepted > 0);
        }
    }

    #[test]
    fn tightening_tolerance_converges() {
        let mut errs = Vec::new();
        for rtol in [1e-6, 1e-9, 1e-12] {
            let spec = IntegratorSpec {
                rel_tol: rtol,
                abs_tol: rtol * 1e-2,
                ..IntegratorSpec::default()
            };
            let out = integrate(&mut Forced, &[Complex64::new(1.0, 0.0)], 0.0, 5.0, &spec, f64::INFINITY, &[]).unwrap();
            errs.push((out.y[0].re - 5f64.sin().exp()).abs());
        }
        assert!(errs[2] < 1e-10, "{errs:?}");
        assert!(errs[2] <= errs[0]);
    }

    #[test]
    fn samples_hit_requested_times() {
        let spec = IntegratorSpec::default();
        let times = [0.0, 0.3, 1.7, 2.5];
        let out = integrate(&mut Forced, &[Complex64::new(1.0, 0.0)], 0.0, 2.5, &spec, 0.1, &times).unwrap();
        assert_eq!(out.samples.len(), 4);
        for ((t, y), want) in out.samples.iter().zip(times) {
            assert_eq!(*t, want);
            assert_relative_eq!(y[0].re, want.sin().exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_length_interval_returns_input() {
        let spec = IntegratorSpec::default();
        let y0 = [Complex64::new(0.3, -0.2)];
        let out = integrate(&mut Forced, &y0, 1.0, 1.0, &spec, 1.0, &[]).unwrap();
        assert_eq!(out.y, y0.to_vec());
        assert_eq!(out.stats.evaluations, 0);
    }

    #[test]
    fn step_budget_reports_time() {
        let spec = IntegratorSpec {
            max_steps: 3,
            ..IntegratorSpec::default()
        };
        let mut sys = Rotor(vec![50.0]);
        match integrate(&mut sys, &[Complex64::new(1.0, 0.0)], 0.0, 10.0, &spec, 0.01, &[]) {
            Err(Error::Integration { time, .. }) => assert!(time > 0.0 && time < 10.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dop853_rows_consistent() {
        // row sums of A reproduce the nodes
        for (s, row) in dop853::A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert_relative_eq!(sum, dop853::C[s + 1], epsilon = 1e-12);
        }
        let bsum: f64 = dop853::B.iter().sum();
        assert_relative_eq!(bsum, 1.0, epsilon = 1e-12);
    }
}
