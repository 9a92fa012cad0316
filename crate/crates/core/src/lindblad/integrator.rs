use num_traits::Zero;
use serde::Serialize;

use super::model::{CompiledModel, LindbladModel};
use super::sparse::SparseOp;
use crate::error::EngineError;
use crate::fock::{Operator, QuantumState};
use crate::scalar::{Real, C};

/// Tolerances and limits for the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T: Real> {
    pub rtol: T,
    pub atol: T,
    /// First trial step; chosen from the initial derivative when `None`.
    pub initial_step: Option<T>,
    pub max_steps: usize,
    /// Largest tolerated `|tr(rho(t)) - tr(rho(0))|`.
    pub trace_bound: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-8),
            atol: T::lit(1e-10),
            initial_step: None,
            max_steps: 5_000_000,
            trace_bound: T::lit(1e-6),
        }
    }
}

/// Diagnostics collected over one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub max_trace_drift: f64,
    /// Largest `max|rho - rho^dagger|` seen at a sample time.
    pub max_hermiticity_residual: f64,
}

/// Sampled observables, one column per name, in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries<T: Real> {
    pub times: Vec<T>,
    pub columns: Vec<(String, Vec<C<T>>)>,
}

impl<T: Real> TimeSeries<T> {
    pub fn get(&self, name: &str) -> Option<&[C<T>]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Real parts of a column.
    pub fn real(&self, name: &str) -> Option<Vec<T>> {
        self.get(name).map(|v| v.iter().map(|z| z.re).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Evolution<T: Real> {
    pub series: TimeSeries<T>,
    pub final_state: QuantumState<T>,
    pub stats: RunStats,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Workspace<T: Real> {
    k: [Vec<C<T>>; 7],
    stage: Vec<C<T>>,
    scratch: Vec<C<T>>,
    y_new: Vec<C<T>>,
}

fn lin_comb<T: Real>(out: &mut [C<T>], y: &[C<T>], h: T, terms: &[(f64, &[C<T>])]) {
    out.copy_from_slice(y);
    for &(w, k) in terms {
        let s = h * T::lit(w);
        for (o, &v) in out.iter_mut().zip(k) {
            *o += v * s;
        }
    }
}

fn trace_of<T: Real>(x: &[C<T>], n: usize) -> C<T> {
    (0..n).map(|i| x[i * n + i]).sum()
}

fn hermiticity_residual<T: Real>(x: &[C<T>], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (x[i * n + j] - x[j * n + i].conj()).norm().to_f64_lossy();
            worst = worst.max(d);
        }
    }
    worst
}

fn validate_times<T: Real>(times: &[T]) -> Result<(), EngineError> {
    if times.is_empty() {
        return Err(EngineError::InvalidModel("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(EngineError::InvalidModel(
            "time grid must be finite and non-negative".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EngineError::InvalidModel(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Integrates `rho` from `t = 0` through every time in `times`, calling
/// `sampler(index, t, rho)` on arrival. Steps are clipped to land on each
/// sample time exactly.
pub fn propagate<T, F>(
    model: &LindbladModel<T>,
    initial: &QuantumState<T>,
    times: &[T],
    opts: &SolverOptions<T>,
    mut sampler: F,
) -> Result<(QuantumState<T>, RunStats), EngineError>
where
    T: Real,
    F: FnMut(usize, T, &Operator<T>) -> Result<(), EngineError>,
{
    validate_times(times)?;
    if initial.dims() != model.dims() {
        return Err(EngineError::InvalidModel(format!(
            "state dims {:?} differ from model dims {:?}",
            initial.dims(),
            model.dims()
        )));
    }
    if !(opts.rtol > T::zero() && opts.atol > T::zero()) {
        return Err(EngineError::InvalidModel(
            "tolerances must be positive".into(),
        ));
    }
    let compiled = model.compile();
    let n = compiled.n;
    let mut rho = initial.density();
    let len = n * n;
    let mut ws = Workspace {
        k: std::array::from_fn(|_| vec![C::zero(); len]),
        stage: vec![C::zero(); len],
        scratch: vec![C::zero(); len],
        y_new: vec![C::zero(); len],
    };
    let mut stats = RunStats::default();
    let trace0 = trace_of(rho.data(), n);
    let mut t = T::zero();

    compiled.rhs(t, rho.data(), &mut ws.k[0], &mut ws.scratch);
    stats.rhs_evaluations += 1;
    let span = *times.last().expect("non-empty");
    let mut h = match opts.initial_step {
        Some(h0) if h0 > T::zero() => h0,
        _ => initial_step(rho.data(), &ws.k[0], opts, span),
    };

    for (idx, &target) in times.iter().enumerate() {
        while t < target {
            if stats.accepted_steps + stats.rejected_steps >= opts.max_steps {
                return Err(EngineError::IntegrationFailure {
                    t_reached: t.to_f64_lossy(),
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let remaining = target - t;
            // Land on the sample instead of leaving a sliver behind.
            let landing = h >= remaining * T::lit(0.999_999);
            let step = if landing { remaining } else { h };
            if step < T::lit(1e-14) * t.abs().max(T::one()) {
                return Err(EngineError::IntegrationFailure {
                    t_reached: t.to_f64_lossy(),
                    reason: format!("step size underflow ({step})"),
                });
            }
            let err = dopri_step(&compiled, t, step, rho.data(), &mut ws, opts);
            stats.rhs_evaluations += 6;
            if !err.is_finite() {
                stats.rejected_steps += 1;
                h = step * T::lit(0.2);
                continue;
            }
            if err <= T::one() {
                t = if landing { target } else { t + step };
                rho.data_mut().copy_from_slice(&ws.y_new);
                ws.k.swap(0, 6);
                stats.accepted_steps += 1;
                let drift = (trace_of(rho.data(), n) - trace0).norm();
                stats.max_trace_drift = stats.max_trace_drift.max(drift.to_f64_lossy());
                if drift > opts.trace_bound {
                    return Err(EngineError::Accuracy {
                        drift: drift.to_f64_lossy(),
                        bound: opts.trace_bound.to_f64_lossy(),
                    });
                }
                let factor = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2)))
                        .max(T::lit(0.2))
                        .min(T::lit(5.0))
                };
                // A clipped landing step says nothing about the natural step size.
                h = if landing {
                    h.max(step * factor)
                } else {
                    step * factor
                };
            } else {
                stats.rejected_steps += 1;
                h = step
                    * (T::lit(0.9) * err.powf(T::lit(-0.2)))
                        .max(T::lit(0.2))
                        .min(T::one());
            }
        }
        stats.max_hermiticity_residual = stats
            .max_hermiticity_residual
            .max(hermiticity_residual(rho.data(), n));
        sampler(idx, target, &rho)?;
    }
    Ok((
        QuantumState::from_density_unchecked(rho).with_leakage(initial.leakage()),
        stats,
    ))
}

fn weighted_rms<T: Real>(x: &[C<T>], y: &[C<T>], opts: &SolverOptions<T>) -> T {
    let sum: T = x
        .iter()
        .zip(y)
        .map(|(a, s)| {
            let sc = opts.atol + opts.rtol * s.norm();
            let r = a.norm() / sc;
            r * r
        })
        .sum();
    (sum / T::from_usize_lossy(x.len())).sqrt()
}

fn initial_step<T: Real>(y: &[C<T>], f: &[C<T>], opts: &SolverOptions<T>, span: T) -> T {
    let d0 = weighted_rms(y, y, opts);
    let d1 = weighted_rms(f, y, opts);
    let h = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    if span > T::zero() {
        h.min(span)
    } else {
        h
    }
}

/// One trial step; fills `ws.y_new` and `ws.k[6]` and returns the scaled error.
fn dopri_step<T: Real>(
    m: &CompiledModel<T>,
    t: T,
    h: T,
    y: &[C<T>],
    ws: &mut Workspace<T>,
    opts: &SolverOptions<T>,
) -> T {
    let Workspace {
        k,
        stage,
        scratch,
        y_new,
    } = ws;
    let [k1, k2, k3, k4, k5, k6, k7] = k;
    lin_comb(stage, y, h, &[(A21, k1)]);
    m.rhs(t + h * T::lit(C2), stage, k2, scratch);
    lin_comb(stage, y, h, &[(A31, k1), (A32, k2)]);
    m.rhs(t + h * T::lit(C3), stage, k3, scratch);
    lin_comb(stage, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
    m.rhs(t + h * T::lit(C4), stage, k4, scratch);
    lin_comb(stage, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    m.rhs(t + h * T::lit(C5), stage, k5, scratch);
    lin_comb(
        stage,
        y,
        h,
        &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
    );
    m.rhs(t + h, stage, k6, scratch);
    lin_comb(
        y_new,
        y,
        h,
        &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)],
    );
    m.rhs(t + h, y_new, k7, scratch);

    let mut sum = T::zero();
    for i in 0..y.len() {
        let e = (k1[i] * T::lit(E1)
            + k3[i] * T::lit(E3)
            + k4[i] * T::lit(E4)
            + k5[i] * T::lit(E5)
            + k6[i] * T::lit(E6)
            + k7[i] * T::lit(E7))
            * h;
        let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
        let r = e.norm() / sc;
        sum += r * r;
    }
    (sum / T::from_usize_lossy(y.len())).sqrt()
}

/// Evolves `initial` and records `tr(O rho(t))` for each named observable.
pub fn evolve<T: Real>(
    model: &LindbladModel<T>,
    initial: &QuantumState<T>,
    times: &[T],
    observables: &[(String, Operator<T>)],
    opts: &SolverOptions<T>,
) -> Result<Evolution<T>, EngineError> {
    for (name, op) in observables {
        if op.dims() != model.dims() {
            return Err(EngineError::InvalidModel(format!(
                "observable {name} has dims {:?}, model has {:?}",
                op.dims(),
                model.dims()
            )));
        }
    }
    let sparse: Vec<SparseOp<T>> = observables
        .iter()
        .map(|(_, o)| SparseOp::from_dense(o))
        .collect();
    let mut columns: Vec<(String, Vec<C<T>>)> = observables
        .iter()
        .map(|(name, _)| (name.clone(), Vec::with_capacity(times.len())))
        .collect();
    let (final_state, stats) = propagate(model, initial, times, opts, |_, _, rho| {
        for (col, op) in columns.iter_mut().zip(&sparse) {
            col.1.push(op.trace_product(rho.data()));
        }
        Ok(())
    })?;
    Ok(Evolution {
        series: TimeSeries {
            times: times.to_vec(),
            columns,
        },
        final_state,
        stats,
    })
}

/// Same contract as [`evolve`]; the Hamiltonian is evaluated at every
/// internal stage time, so drives see no interpolation.
pub fn evolve_driven<T: Real>(
    model: &LindbladModel<T>,
    initial: &QuantumState<T>,
    times: &[T],
    observables: &[(String, Operator<T>)],
    opts: &SolverOptions<T>,
) -> Result<Evolution<T>, EngineError> {
    evolve(model, initial, times, observables, opts)
}

/// `<A>(t)` for a single operator, stored under the column name `"expectation"`.
pub fn heisenberg_expectations<T: Real>(
    model: &LindbladModel<T>,
    initial: &QuantumState<T>,
    operator: &Operator<T>,
    times: &[T],
    opts: &SolverOptions<T>,
) -> Result<TimeSeries<T>, EngineError> {
    let obs = [("expectation".to_string(), operator.clone())];
    Ok(evolve(model, initial, times, &obs, opts)?.series)
}

/// Dense state at each sample time; memory grows with the grid.
pub fn trajectory<T: Real>(
    model: &LindbladModel<T>,
    initial: &QuantumState<T>,
    times: &[T],
    opts: &SolverOptions<T>,
) -> Result<Vec<QuantumState<T>>, EngineError> {
    let mut out = Vec::with_capacity(times.len());
    propagate(model, initial, times, opts, |_, _, rho| {
        out.push(QuantumState::from_density_unchecked(rho.clone()));
        Ok(())
    })?;
    Ok(out)
}
