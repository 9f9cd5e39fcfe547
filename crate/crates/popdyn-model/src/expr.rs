use crate::error::EvalError;

/// Arithmetic expression tree for reaction propensities.
///
/// Leaves are nonnegative literals, species counts, or parameter values,
/// both referenced by index into the owning network's declaration order.
/// Operators are `+ - * /` and integer powers; there are no other
/// functions, so every propensity is a rational function of the state.
#[derive(Debug, Clone, PartialEq)]
pub enum PropensityExpr {
    Const(f64),
    /// Count of the species with this index in the current state.
    Species(usize),
    /// Value of the parameter with this index (fixed or varying).
    Param(usize),
    Add(Box<PropensityExpr>, Box<PropensityExpr>),
    Sub(Box<PropensityExpr>, Box<PropensityExpr>),
    Mul(Box<PropensityExpr>, Box<PropensityExpr>),
    Div(Box<PropensityExpr>, Box<PropensityExpr>),
    Pow(Box<PropensityExpr>, u32),
}

impl PropensityExpr {
    /// Evaluates the expression on a state and a full parameter vector.
    ///
    /// Division by zero yields 0 when the numerator is also 0 (empty
    /// population semantics: terms like I*S/(S+I+R) vanish with the
    /// population) and is an error otherwise. Intermediate values may be
    /// negative; only the caller decides whether the result is a valid rate.
    pub fn eval(&self, state: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            PropensityExpr::Const(c) => *c,
            PropensityExpr::Species(i) => *state.get(*i).ok_or(EvalError::Arity)?,
            PropensityExpr::Param(j) => *params.get(*j).ok_or(EvalError::Arity)?,
            PropensityExpr::Add(a, b) => a.eval(state, params)? + b.eval(state, params)?,
            PropensityExpr::Sub(a, b) => a.eval(state, params)? - b.eval(state, params)?,
            PropensityExpr::Mul(a, b) => a.eval(state, params)? * b.eval(state, params)?,
            PropensityExpr::Div(a, b) => {
                let num = a.eval(state, params)?;
                let den = b.eval(state, params)?;
                if den == 0.0 {
                    if num == 0.0 {
                        0.0
                    } else {
                        return Err(EvalError::DivisionByZero);
                    }
                } else {
                    num / den
                }
            }
            PropensityExpr::Pow(base, exp) => base.eval(state, params)?.powi(*exp as i32),
        })
    }

    /// Calls `f` on every species/parameter reference in the tree.
    pub fn visit_refs(&self, f: &mut impl FnMut(RefKind, usize)) {
        match self {
            PropensityExpr::Const(_) => {}
            PropensityExpr::Species(i) => f(RefKind::Species, *i),
            PropensityExpr::Param(j) => f(RefKind::Param, *j),
            PropensityExpr::Add(a, b)
            | PropensityExpr::Sub(a, b)
            | PropensityExpr::Mul(a, b)
            | PropensityExpr::Div(a, b) => {
                a.visit_refs(f);
                b.visit_refs(f);
            }
            PropensityExpr::Pow(base, _) => base.visit_refs(f),
        }
    }
}

/// What a leaf reference points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Species,
    Param,
}
