use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analytic::PairGenParams;
use crate::error::ScenarioError;
use crate::fock::{
    beamsplitter_matrix, coherent_state, destroy, embed, embed_pair, normal_power, number, Operator, QuantumState,
};
use crate::lindblad::{CollapseTerm, DriveTerm, Hamiltonian, LindbladModel};
use crate::scalar::{ci, cr, Real, C};

/// Largest Hilbert-space dimension accepted for the four-mode NOON model.
pub const MAX_NOON_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Collective modes `[a+, a-]`.
    TwoModeCollective,
    /// Physical waveguides `[a1, a2]` with the collective dissipator.
    TwoModePhysical,
    /// Antisymmetric mode driven by the classical decaying pump.
    SingleModeSemiclassical,
    /// `[a1, a2, a3]` with the lossy central waveguide kept explicitly.
    ThreeWaveguide,
    /// As [`ScenarioKind::ThreeWaveguide`] with couplings `g + delta`, `g - delta`.
    AsymmetricThreeWaveguide,
    /// `[a+, a-, b+, b-]`, both halves coupled by `v`.
    NoonCollective,
    /// `[a-, b-]` in the interaction picture of the `v` coupling.
    NoonReduced,
}

impl ScenarioKind {
    pub fn is_noon(self) -> bool {
        matches!(self, Self::NoonCollective | Self::NoonReduced)
    }

    pub fn needs_waveguide_coupling(self) -> bool {
        matches!(self, Self::ThreeWaveguide | Self::AsymmetricThreeWaveguide)
    }

    /// Number of truncated modes the model carries.
    pub fn mode_count(self) -> usize {
        match self {
            Self::SingleModeSemiclassical => 1,
            Self::TwoModeCollective | Self::TwoModePhysical | Self::NoonReduced => 2,
            Self::ThreeWaveguide | Self::AsymmetricThreeWaveguide => 3,
            Self::NoonCollective => 4,
        }
    }
}

/// Maps the state at time `t` to the lab frame: `rho_lab = U(t) rho U(t)^dagger`.
pub type FrameFn<T> = Arc<dyn Fn(T) -> Operator<T> + Send + Sync>;

/// A ready-to-run model with its readout.
#[derive(Clone)]
pub struct Scenario<T: Real> {
    pub kind: ScenarioKind,
    pub model: LindbladModel<T>,
    pub initial: QuantumState<T>,
    /// Two-mode parameters the closed-form curves should use.
    pub effective: PairGenParams<T>,
    /// Lab-frame observables: `n_minus`, `p0`, `p1`, `p2`, `n_plus` unless the
    /// pump is classical, and `p11`, `p20`, `p02` for NOON models.
    pub observables: Vec<(String, Operator<T>)>,
    /// Present for interaction-picture models.
    pub frame: Option<FrameFn<T>>,
    /// The pump is a c-number following `alpha0_sq e^{-(Gamma+gamma) t}`.
    pub classical_pump: bool,
}

impl<T: Real> std::fmt::Debug for Scenario<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("kind", &self.kind)
            .field("dims", &self.model.dims())
            .field("effective", &self.effective)
            .field("observables", &self.observables.iter().map(|(n, _)| n).collect::<Vec<_>>())
            .field("classical_pump", &self.classical_pump)
            .finish()
    }
}

impl<T: Real> Scenario<T> {
    pub fn observable(&self, name: &str) -> Option<&Operator<T>> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }
}

fn check_params<T: Real>(p: &PairGenParams<T>) -> Result<(), ScenarioError> {
    p.validate()?;
    Ok(())
}

fn require_dim(kind: &str, dim: usize, min: usize) -> Result<(), ScenarioError> {
    if dim < min {
        return Err(ScenarioError::InvalidConfig(format!(
            "{kind} needs at least {min} levels to resolve photon pairs, got {dim}"
        )));
    }
    Ok(())
}

fn projector<T: Real>(dim: usize, k: usize) -> Result<Operator<T>, ScenarioError> {
    Ok(Operator::diagonal(&[dim], |n| if n == k { cr(T::one()) } else { cr(T::zero()) })?)
}

fn lift<T: Real>(op: &Operator<T>, mode: usize, dims: &[usize]) -> Result<Operator<T>, ScenarioError> {
    if dims.len() == 1 {
        return Ok(op.clone());
    }
    Ok(embed(op, mode, dims)?)
}

fn pair_readout<T: Real>(
    mode: usize,
    dims: &[usize],
    out: &mut Vec<(String, Operator<T>)>,
) -> Result<(), ScenarioError> {
    out.push(("n_minus".into(), lift(&number(dims[mode])?, mode, dims)?));
    for k in 0..3 {
        out.push((format!("p{k}"), lift(&projector(dims[mode], k)?, mode, dims)?));
    }
    Ok(())
}

/// `U/4 (n+^2 + n-^2 + 4 n+ n- - n+ - n-) + U/4 (a+^dagger^2 a-^2 + h.c.)` for
/// collective annihilators already lifted to the full space.
fn collective_kerr<T: Real>(u: T, ap: &Operator<T>, am: &Operator<T>) -> Operator<T> {
    let (apd, amd) = (ap.dagger(), am.dagger());
    let np = &apd * ap;
    let nm = &amd * am;
    let diag = &(&(&(&np * &np) + &(&nm * &nm)) + &(&np * &nm).scale_real(T::lit(4.0))) - &(&np + &nm);
    let exchange = &(&apd * &apd) * &(am * am);
    let v = &exchange + &exchange.dagger();
    (&diag + &v).scale_real(u / T::lit(4.0))
}

/// Two-mode model in the collective basis: pump `coherent(alpha)` in `a+`, vacuum in `a-`.
pub fn build_two_mode<T: Real>(p: &PairGenParams<T>, dims: [usize; 2]) -> Result<Scenario<T>, ScenarioError> {
    check_params(p)?;
    require_dim("pair mode a-", dims[1], 3)?;
    let alpha = cr(p.alpha0_sq.sqrt());
    let initial = QuantumState::tensor(&[coherent_state(alpha, dims[0])?, QuantumState::vacuum(&[dims[1]])?])?;
    let ap = embed(&destroy(dims[0])?, 0, &dims)?;
    let am = embed(&destroy(dims[1])?, 1, &dims)?;
    let h = collective_kerr(p.u, &ap, &am);
    let model = LindbladModel::new(
        Hamiltonian::Static(h),
        vec![
            CollapseTerm { operator: ap.clone(), rate: p.symmetric_decay() },
            CollapseTerm { operator: am, rate: p.gamma },
        ],
    )?;
    let mut observables = vec![("n_plus".to_string(), &ap.dagger() * &ap)];
    pair_readout(1, &dims, &mut observables)?;
    Ok(Scenario {
        kind: ScenarioKind::TwoModeCollective,
        model,
        initial,
        effective: *p,
        observables,
        frame: None,
        classical_pump: false,
    })
}

/// Collective readout on physical waveguides 0 and 1 of `dims`.
///
/// `n_plus`/`n_minus` use `a+- = (a1 +- a2)/sqrt 2` directly; the pair-mode
/// populations are the port-2 projectors pulled back through a 50/50
/// beamsplitter, which is exact on blocks with fewer than `dims[0]` photons.
fn physical_readout<T: Real>(dims: &[usize]) -> Result<Vec<(String, Operator<T>)>, ScenarioError> {
    let d = dims[0];
    let a1 = lift(&destroy(d)?, 0, dims)?;
    let a2 = lift(&destroy(d)?, 1, dims)?;
    let s = T::FRAC_1_SQRT_2();
    let ap = (&a1 + &a2).scale_real(s);
    let am = (&a1 - &a2).scale_real(s);
    let pair = beamsplitter_matrix(d, T::FRAC_PI_4())?;
    let bs = if dims.len() == 2 { pair } else { embed_pair(&pair, (0, 1), dims)? };
    let bs_dag = bs.dagger();
    let mut out = vec![
        ("n_plus".to_string(), &ap.dagger() * &ap),
        ("n_minus".to_string(), &am.dagger() * &am),
    ];
    for k in 0..3 {
        let port2 = lift(&projector(d, k)?, 1, dims)?;
        out.push((format!("p{k}"), &(&bs_dag * &port2) * &bs));
    }
    Ok(out)
}

/// Physical two-waveguide model with arbitrary coherent inputs per waveguide.
pub fn build_physical_two_mode_from_inputs<T: Real>(
    p: &PairGenParams<T>,
    dims: [usize; 2],
    inputs: [C<T>; 2],
) -> Result<Scenario<T>, ScenarioError> {
    check_params(p)?;
    if dims[0] != dims[1] {
        return Err(ScenarioError::InvalidConfig(format!(
            "physical waveguides need equal truncation, got {dims:?}"
        )));
    }
    require_dim("waveguide", dims[0], 3)?;
    let initial = QuantumState::tensor(&[coherent_state(inputs[0], dims[0])?, coherent_state(inputs[1], dims[1])?])?;
    let a1 = embed(&destroy(dims[0])?, 0, &dims)?;
    let a2 = embed(&destroy(dims[1])?, 1, &dims)?;
    let kerr = &embed(&normal_power(dims[0], 2)?, 0, &dims)? + &embed(&normal_power(dims[1], 2)?, 1, &dims)?;
    let model = LindbladModel::new(
        Hamiltonian::Static(kerr.scale_real(p.u / T::lit(2.0))),
        vec![
            CollapseTerm { operator: &a1 + &a2, rate: p.big_gamma / T::lit(2.0) },
            CollapseTerm { operator: a1, rate: p.gamma },
            CollapseTerm { operator: a2, rate: p.gamma },
        ],
    )?;
    Ok(Scenario {
        kind: ScenarioKind::TwoModePhysical,
        model,
        initial,
        effective: *p,
        observables: physical_readout(&dims)?,
        frame: None,
        classical_pump: false,
    })
}

/// Physical two-waveguide model pumped with `alpha/sqrt 2` in phase in each guide.
pub fn build_physical_two_mode<T: Real>(p: &PairGenParams<T>, dims: [usize; 2]) -> Result<Scenario<T>, ScenarioError> {
    let a = cr((p.alpha0_sq / T::lit(2.0)).sqrt());
    build_physical_two_mode_from_inputs(p, dims, [a, a])
}

/// Antisymmetric mode alone, driven by the decaying classical pump.
pub fn build_semiclassical<T: Real>(p: &PairGenParams<T>, dim: usize) -> Result<Scenario<T>, ScenarioError> {
    check_params(p)?;
    require_dim("pair mode a-", dim, 3)?;
    let dims = [dim];
    let a = destroy::<T>(dim)?;
    let n = number::<T>(dim)?;
    let adag2 = &a.dagger() * &a.dagger();
    let quarter = p.u / T::lit(4.0);
    let base = (&(&n * &n) - &n).scale_real(quarter);
    let (u, a0, rate) = (p.u, p.alpha0_sq, p.symmetric_decay());
    let pump = move |t: T| a0 * (-rate * t).exp();
    let terms = vec![
        DriveTerm::hermitian(n.clone(), move |t| u * pump(t)),
        DriveTerm::with_conjugate(adag2, move |t| cr(quarter * pump(t))),
    ];
    let model = LindbladModel::new(
        Hamiltonian::Driven { base, terms },
        vec![CollapseTerm { operator: a, rate: p.gamma }],
    )?;
    let mut observables = Vec::new();
    pair_readout(0, &dims, &mut observables)?;
    Ok(Scenario {
        kind: ScenarioKind::SingleModeSemiclassical,
        model,
        initial: QuantumState::vacuum(&dims)?,
        effective: *p,
        observables,
        frame: None,
        classical_pump: true,
    })
}

/// Three waveguides with symmetric coupling `g` to the lossy centre guide.
///
/// `p.big_gamma` is not used by the model; the effective collective loss is `8 g^2 / gamma3`.
pub fn build_three_waveguide<T: Real>(
    g: T,
    gamma3: T,
    p: &PairGenParams<T>,
    dims: [usize; 3],
) -> Result<Scenario<T>, ScenarioError> {
    build_asymmetric(g, T::zero(), gamma3, p, dims).map(|mut s| {
        s.kind = ScenarioKind::ThreeWaveguide;
        s
    })
}

/// Three waveguides with couplings `g + delta` (guide 1) and `g - delta` (guide 2).
pub fn build_asymmetric<T: Real>(
    g: T,
    delta: T,
    gamma3: T,
    p: &PairGenParams<T>,
    dims: [usize; 3],
) -> Result<Scenario<T>, ScenarioError> {
    check_params(p)?;
    if !(g >= T::zero()) || !(gamma3 > T::zero()) || !(delta.abs() <= g) {
        return Err(ScenarioError::InvalidConfig(format!(
            "need g >= |delta| and gamma3 > 0, got g = {g}, delta = {delta}, gamma3 = {gamma3}"
        )));
    }
    if dims[0] != dims[1] {
        return Err(ScenarioError::InvalidConfig(format!(
            "waveguides 1 and 2 need equal truncation, got {dims:?}"
        )));
    }
    require_dim("waveguide", dims[0], 3)?;
    let a = cr((p.alpha0_sq / T::lit(2.0)).sqrt());
    let initial = QuantumState::tensor(&[
        coherent_state(a, dims[0])?,
        coherent_state(a, dims[1])?,
        QuantumState::vacuum(&[dims[2]])?,
    ])?;
    let a1 = embed(&destroy(dims[0])?, 0, &dims)?;
    let a2 = embed(&destroy(dims[1])?, 1, &dims)?;
    let a3 = embed(&destroy(dims[2])?, 2, &dims)?;
    let kerr = (&embed(&normal_power(dims[0], 2)?, 0, &dims)? + &embed(&normal_power(dims[1], 2)?, 1, &dims)?)
        .scale_real(p.u / T::lit(2.0));
    let hop = |x: &Operator<T>, k: T| {
        let h = &x.dagger() * &a3;
        (&h + &h.dagger()).scale_real(k)
    };
    let h = &(&kerr + &hop(&a1, g + delta)) + &hop(&a2, g - delta);
    let model = LindbladModel::new(
        Hamiltonian::Static(h),
        vec![
            CollapseTerm { operator: a1, rate: p.gamma },
            CollapseTerm { operator: a2, rate: p.gamma },
            CollapseTerm { operator: a3, rate: gamma3 },
        ],
    )?;
    let mut effective = *p;
    effective.big_gamma = T::lit(8.0) * g * g / gamma3;
    Ok(Scenario {
        kind: ScenarioKind::AsymmetricThreeWaveguide,
        model,
        initial,
        effective,
        observables: physical_readout(&dims)?,
        frame: None,
        classical_pump: false,
    })
}

fn noon_joint<T: Real>(
    modes: (usize, usize),
    dims: &[usize],
    out: &mut Vec<(String, Operator<T>)>,
) -> Result<(), ScenarioError> {
    for (name, (na, nb)) in [("p11", (1, 1)), ("p20", (2, 0)), ("p02", (0, 2))] {
        let pa = lift(&projector(dims[modes.0], na)?, modes.0, dims)?;
        let pb = lift(&projector(dims[modes.1], nb)?, modes.1, dims)?;
        out.push((name.to_string(), &pa * &pb));
    }
    Ok(())
}

/// NOON source: two pair generators whose waveguides are coupled at rate `p.v`.
///
/// `reduced = false` keeps all four collective modes `[a+, a-, b+, b-]` with the
/// coupling `v (a+^dagger b+ + a-^dagger b- + h.c.)`. `reduced = true` keeps
/// `[a-, b-]` only, in the interaction picture of `v (a-^dagger b- + h.c.)`, driven
/// by the classical pumps `alpha(t) = alpha(0) e^{-(Gamma+gamma)t/2 - i v t}`;
/// its readout is rotated back to the lab frame at every sample.
pub fn build_noon<T: Real>(p: &PairGenParams<T>, dims: &[usize], reduced: bool) -> Result<Scenario<T>, ScenarioError> {
    check_params(p)?;
    if reduced {
        build_noon_reduced(p, dims)
    } else {
        build_noon_collective(p, dims)
    }
}

fn build_noon_collective<T: Real>(p: &PairGenParams<T>, dims: &[usize]) -> Result<Scenario<T>, ScenarioError> {
    if dims.len() != 4 {
        return Err(ScenarioError::InvalidConfig(format!(
            "collective NOON model needs 4 mode dims, got {dims:?}"
        )));
    }
    let total: usize = dims.iter().product();
    if total > MAX_NOON_DIM {
        return Err(ScenarioError::InvalidConfig(format!(
            "collective NOON space has dimension {total}, limit is {MAX_NOON_DIM}"
        )));
    }
    require_dim("pair mode a-", dims[1], 3)?;
    require_dim("pair mode b-", dims[3], 3)?;
    let alpha = cr(p.alpha0_sq.sqrt());
    let initial = QuantumState::tensor(&[
        coherent_state(alpha, dims[0])?,
        QuantumState::vacuum(&[dims[1]])?,
        coherent_state(alpha, dims[2])?,
        QuantumState::vacuum(&[dims[3]])?,
    ])?;
    let ops = (0..4)
        .map(|m| embed(&destroy(dims[m])?, m, dims))
        .collect::<Result<Vec<_>, _>>()?;
    let (ap, am, bp, bm) = (&ops[0], &ops[1], &ops[2], &ops[3]);
    let w = &(&ap.dagger() * bp) + &(&am.dagger() * bm);
    let h = &(&collective_kerr(p.u, ap, am) + &collective_kerr(p.u, bp, bm)) + &(&w + &w.dagger()).scale_real(p.v);
    let decay = p.symmetric_decay();
    let model = LindbladModel::new(
        Hamiltonian::Static(h),
        vec![
            CollapseTerm { operator: ap.clone(), rate: decay },
            CollapseTerm { operator: am.clone(), rate: p.gamma },
            CollapseTerm { operator: bp.clone(), rate: decay },
            CollapseTerm { operator: bm.clone(), rate: p.gamma },
        ],
    )?;
    let mut observables = vec![("n_plus".to_string(), &ap.dagger() * ap)];
    pair_readout(1, dims, &mut observables)?;
    noon_joint((1, 3), dims, &mut observables)?;
    Ok(Scenario {
        kind: ScenarioKind::NoonCollective,
        model,
        initial,
        effective: *p,
        observables,
        frame: None,
        classical_pump: false,
    })
}

fn build_noon_reduced<T: Real>(p: &PairGenParams<T>, dims: &[usize]) -> Result<Scenario<T>, ScenarioError> {
    if dims.len() != 2 {
        return Err(ScenarioError::InvalidConfig(format!(
            "reduced NOON model needs 2 mode dims, got {dims:?}"
        )));
    }
    require_dim("pair mode a-", dims[0], 3)?;
    require_dim("pair mode b-", dims[1], 3)?;
    let a = embed(&destroy(dims[0])?, 0, dims)?;
    let b = embed(&destroy(dims[1])?, 1, dims)?;
    let (ad, bd) = (a.dagger(), b.dagger());
    let na = &ad * &a;
    let nb = &bd * &b;
    let quarter = p.u / T::lit(4.0);
    let base = (&(&(&na * &na) - &na) + &(&(&nb * &nb) - &nb)).scale_real(quarter);
    let self_pairs = &(&ad * &ad) + &(&bd * &bd);
    let cross_pair = &ad * &bd;
    let (u, a0, half_rate, v) = (p.u, p.alpha0_sq, p.symmetric_decay() / T::lit(2.0), p.v);
    // alpha(t)^2 = alpha(0)^2 e^{-(Gamma+gamma)t - 2ivt}
    let alpha_sq = move |t: T| Complex::new(-T::lit(2.0) * half_rate * t, -T::lit(2.0) * v * t).exp() * a0;
    let terms = vec![
        DriveTerm::hermitian(&na + &nb, move |t| u * a0 * (-T::lit(2.0) * half_rate * t).exp()),
        DriveTerm::with_conjugate(self_pairs, move |t| {
            alpha_sq(t) * (T::lit(2.0) * v * t).cos() * quarter
        }),
        DriveTerm::with_conjugate(cross_pair, move |t| {
            alpha_sq(t) * ci(T::lit(2.0) * (T::lit(2.0) * v * t).sin()) * quarter
        }),
    ];
    let model = LindbladModel::new(
        Hamiltonian::Driven { base, terms },
        vec![
            CollapseTerm { operator: a.clone(), rate: p.gamma },
            CollapseTerm { operator: b.clone(), rate: p.gamma },
        ],
    )?;
    let hop = &ad * &b;
    let w = (&hop + &hop.dagger()).scale_real(p.v);
    let frame: FrameFn<T> = Arc::new(move |t: T| w.scale(ci(-t)).expm());
    let mut observables = Vec::new();
    pair_readout(0, dims, &mut observables)?;
    noon_joint((0, 1), dims, &mut observables)?;
    Ok(Scenario {
        kind: ScenarioKind::NoonReduced,
        model,
        initial: QuantumState::vacuum(dims)?,
        effective: *p,
        observables,
        frame: Some(frame),
        classical_pump: true,
    })
}
