use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use super::sparse::SparseOp;
use crate::error::EngineError;
use crate::fock::Operator;
use crate::scalar::{ci, cr, Real, C};

/// Time-dependent complex coefficient `f(t)`.
pub type CoefficientFn<T> = Arc<dyn Fn(T) -> C<T> + Send + Sync>;

/// Builds the full Hamiltonian at time `t`.
pub type HamiltonianBuilder<T> = Arc<dyn Fn(T) -> Operator<T> + Send + Sync>;

/// `f(t) * A`, optionally with `conj(f(t)) * A^dagger` added so the term is hermitian.
#[derive(Clone)]
pub struct DriveTerm<T: Real> {
    pub operator: Operator<T>,
    pub coefficient: CoefficientFn<T>,
    pub add_conjugate: bool,
}

impl<T: Real> DriveTerm<T> {
    /// `f(t) A + h.c.`
    pub fn with_conjugate(
        operator: Operator<T>,
        coefficient: impl Fn(T) -> C<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            operator,
            coefficient: Arc::new(coefficient),
            add_conjugate: true,
        }
    }

    /// `f(t) A` with `A` hermitian and `f` real-valued.
    pub fn hermitian(
        operator: Operator<T>,
        coefficient: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            operator,
            coefficient: Arc::new(move |t| cr(coefficient(t))),
            add_conjugate: false,
        }
    }
}

#[derive(Clone)]
pub enum Hamiltonian<T: Real> {
    Static(Operator<T>),
    /// `base + sum_k terms_k(t)`.
    Driven {
        base: Operator<T>,
        terms: Vec<DriveTerm<T>>,
    },
    /// Arbitrary `t -> H(t)`, evaluated at every integrator stage.
    Builder(HamiltonianBuilder<T>),
}

impl<T: Real> Hamiltonian<T> {
    pub fn at(&self, t: T) -> Operator<T> {
        match self {
            Hamiltonian::Static(h) => h.clone(),
            Hamiltonian::Driven { base, terms } => terms.iter().fold(base.clone(), |acc, term| {
                let f = (term.coefficient)(t);
                let mut h = &acc + &term.operator.scale(f);
                if term.add_conjugate {
                    h = &h + &term.operator.dagger().scale(f.conj());
                }
                h
            }),
            Hamiltonian::Builder(b) => b(t),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        !matches!(self, Hamiltonian::Static(_))
    }
}

impl<T: Real> fmt::Debug for Hamiltonian<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Static(h) => write!(f, "Static(dim {})", h.dim()),
            Hamiltonian::Driven { terms, .. } => write!(f, "Driven({} terms)", terms.len()),
            Hamiltonian::Builder(_) => write!(f, "Builder"),
        }
    }
}

/// Collapse operator `c` with rate `r`, contributing `r (c rho c^dagger - {c^dagger c, rho}/2)`.
#[derive(Clone, Debug)]
pub struct CollapseTerm<T: Real> {
    pub operator: Operator<T>,
    pub rate: T,
}

/// Lindblad generator: Hamiltonian plus weighted dissipators on a shared space.
#[derive(Clone, Debug)]
pub struct LindbladModel<T: Real> {
    dims: Vec<usize>,
    hamiltonian: Hamiltonian<T>,
    collapse: Vec<CollapseTerm<T>>,
}

impl<T: Real> LindbladModel<T> {
    pub fn new(
        hamiltonian: Hamiltonian<T>,
        collapse: Vec<CollapseTerm<T>>,
    ) -> Result<Self, EngineError> {
        let dims = match &hamiltonian {
            Hamiltonian::Static(h) | Hamiltonian::Driven { base: h, .. } => h.dims().to_vec(),
            Hamiltonian::Builder(b) => b(T::zero()).dims().to_vec(),
        };
        if let Hamiltonian::Driven { terms, .. } = &hamiltonian {
            if let Some(t) = terms.iter().find(|t| t.operator.dims() != dims.as_slice()) {
                return Err(EngineError::InvalidModel(format!(
                    "drive operator dims {:?} differ from {:?}",
                    t.operator.dims(),
                    dims
                )));
            }
        }
        for c in &collapse {
            if !(c.rate >= T::zero()) {
                return Err(EngineError::InvalidModel(format!(
                    "negative collapse rate {}",
                    c.rate
                )));
            }
            if c.operator.dims() != dims.as_slice() {
                return Err(EngineError::InvalidModel(format!(
                    "collapse operator dims {:?} differ from {:?}",
                    c.operator.dims(),
                    dims
                )));
            }
        }
        Ok(Self {
            dims,
            hamiltonian,
            collapse,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hamiltonian(&self) -> &Hamiltonian<T> {
        &self.hamiltonian
    }

    pub fn collapse_terms(&self) -> &[CollapseTerm<T>] {
        &self.collapse
    }

    pub(crate) fn compile(&self) -> CompiledModel<T> {
        let n: usize = self.dims.iter().product();
        let mut anti = Operator::zeros(&self.dims).expect("dims validated");
        let mut jumps = Vec::new();
        for c in &self.collapse {
            if c.rate == T::zero() {
                continue;
            }
            let cdc = c
                .operator
                .dagger()
                .try_matmul(&c.operator)
                .expect("dims validated");
            anti = &anti + &cdc.scale_real(c.rate);
            jumps.push((SparseOp::from_dense(&c.operator), c.rate));
        }
        // H_eff = H0 - (i/2) sum r c^dagger c
        let damping = anti.scale(ci(-T::lit(0.5)));
        let (base, drives, builder) = match &self.hamiltonian {
            Hamiltonian::Static(h) => (&damping + h, Vec::new(), None),
            Hamiltonian::Driven { base, terms } => {
                let drives = terms
                    .iter()
                    .map(|t| CompiledDrive {
                        op: SparseOp::from_dense(&t.operator),
                        op_dag: t
                            .add_conjugate
                            .then(|| SparseOp::from_dense(&t.operator.dagger())),
                        f: t.coefficient.clone(),
                    })
                    .collect();
                (&damping + base, drives, None)
            }
            Hamiltonian::Builder(b) => (damping, Vec::new(), Some(b.clone())),
        };
        CompiledModel {
            n,
            heff: SparseOp::from_dense(&base),
            drives,
            builder,
            jumps,
        }
    }
}

pub(crate) struct CompiledDrive<T: Real> {
    op: SparseOp<T>,
    op_dag: Option<SparseOp<T>>,
    f: CoefficientFn<T>,
}

pub(crate) struct CompiledModel<T: Real> {
    pub n: usize,
    heff: SparseOp<T>,
    drives: Vec<CompiledDrive<T>>,
    builder: Option<HamiltonianBuilder<T>>,
    jumps: Vec<(SparseOp<T>, T)>,
}

impl<T: Real> CompiledModel<T> {
    /// `out = L(t) rho`; `scratch` must have length `n*n`.
    pub fn rhs(&self, t: T, rho: &[C<T>], out: &mut [C<T>], scratch: &mut [C<T>]) {
        let minus_i = ci(-T::one());
        let plus_i = ci(T::one());
        out.iter_mut().for_each(|x| *x = C::zero());
        self.heff.left_mul_acc(minus_i, rho, out);
        self.heff.right_mul_dagger_acc(plus_i, rho, out);
        for d in &self.drives {
            let f = (d.f)(t);
            d.op.left_mul_acc(minus_i * f, rho, out);
            d.op.right_mul_dagger_acc(plus_i * f.conj(), rho, out);
            if let Some(dag) = &d.op_dag {
                dag.left_mul_acc(minus_i * f.conj(), rho, out);
                dag.right_mul_dagger_acc(plus_i * f, rho, out);
            }
        }
        if let Some(b) = &self.builder {
            let h = SparseOp::from_dense(&b(t));
            h.left_mul_acc(minus_i, rho, out);
            h.right_mul_dagger_acc(plus_i, rho, out);
        }
        for (c, r) in &self.jumps {
            scratch.iter_mut().for_each(|x| *x = C::zero());
            c.left_mul_acc(C::from(T::one()), rho, scratch);
            c.right_mul_dagger_acc(cr(*r), scratch, out);
        }
    }
}

/// `-i[H(t), rho] + sum_k r_k (c_k rho c_k^dagger - {c_k^dagger c_k, rho}/2)`.
pub fn liouvillian_apply<T: Real>(
    model: &LindbladModel<T>,
    rho: &Operator<T>,
    t: T,
) -> Result<Operator<T>, EngineError> {
    if rho.dims() != model.dims() {
        return Err(EngineError::InvalidModel(format!(
            "state dims {:?} differ from model dims {:?}",
            rho.dims(),
            model.dims()
        )));
    }
    let compiled = model.compile();
    let n = compiled.n;
    let mut out = vec![C::zero(); n * n];
    let mut scratch = vec![C::zero(); n * n];
    compiled.rhs(t, rho.data(), &mut out, &mut scratch);
    Ok(Operator::from_row_major(model.dims(), out)?)
}
