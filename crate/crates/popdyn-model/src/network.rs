use crate::error::{EvalError, ModelError};
use crate::expr::{PropensityExpr, RefKind};

/// A model parameter: either a fixed constant or a range it varies over.
/// Only ranged parameters take part in conditioning; fixed ones are simply
/// read by the propensities.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Fixed(f64),
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: ParamValue,
}

/// Linear conservation constraint on the initial state: the listed species
/// counts must sum to `total` (all coefficients are 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub members: Vec<usize>,
    pub total: f64,
}

/// A single reaction: stoichiometry plus a propensity expression.
///
/// `update` is products minus reactants per species; the reactant and
/// product lists are kept as written so the reaction can be printed back
/// faithfully (a species may appear on both sides, e.g. a catalyst).
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    name: String,
    reactants: Vec<(usize, u32)>,
    products: Vec<(usize, u32)>,
    update: Vec<i64>,
    propensity: PropensityExpr,
}

impl Reaction {
    /// Builds a reaction from its two stoichiometry lists. Species indices
    /// must be below `n_species`; coefficients must be positive.
    pub fn new(
        name: impl Into<String>,
        n_species: usize,
        reactants: Vec<(usize, u32)>,
        products: Vec<(usize, u32)>,
        propensity: PropensityExpr,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let mut update = vec![0i64; n_species];
        for &(i, c) in &reactants {
            if i >= n_species || c == 0 {
                return Err(ModelError::Structure(format!(
                    "reaction `{name}`: bad reactant entry ({i}, {c})"
                )));
            }
            update[i] -= c as i64;
        }
        for &(i, c) in &products {
            if i >= n_species || c == 0 {
                return Err(ModelError::Structure(format!(
                    "reaction `{name}`: bad product entry ({i}, {c})"
                )));
            }
            update[i] += c as i64;
        }
        Ok(Reaction { name, reactants, products, update, propensity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn reactants(&self) -> &[(usize, u32)] {
        &self.reactants
    }

    pub fn products(&self) -> &[(usize, u32)] {
        &self.products
    }

    /// Net state change when the reaction fires.
    pub fn update(&self) -> &[i64] {
        &self.update
    }

    pub fn propensity(&self) -> &PropensityExpr {
        &self.propensity
    }

    /// Evaluates the propensity as a rate: finite and nonnegative, with the
    /// division-by-zero guard of [`PropensityExpr::eval`].
    pub fn rate(&self, state: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        let v = self.propensity.eval(state, params)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite);
        }
        if v < 0.0 {
            return Err(EvalError::Negative);
        }
        Ok(v)
    }
}

/// A validated chemical reaction network.
///
/// Construction runs structural checks (unique names, reference validity,
/// range sanity) and a numeric boundary smoke test: every reaction's
/// propensity must evaluate to exactly 0 in states where the reaction
/// would drive a consumed species negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    parameters: Vec<Parameter>,
    init_ranges: Vec<(f64, f64)>,
    constraints: Vec<Constraint>,
    observables: Vec<usize>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(
        species: Vec<String>,
        parameters: Vec<Parameter>,
        init_ranges: Vec<(f64, f64)>,
        constraints: Vec<Constraint>,
        observables: Vec<usize>,
        reactions: Vec<Reaction>,
    ) -> Result<Self, ModelError> {
        let net = ReactionNetwork {
            species,
            parameters,
            init_ranges,
            constraints,
            observables,
            reactions,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.species.is_empty() {
            return Err(ModelError::NoSpecies);
        }
        if self.reactions.is_empty() {
            return Err(ModelError::NoReactions);
        }

        // Species and parameters share one namespace so propensity
        // identifiers are unambiguous.
        let mut names: Vec<&str> = Vec::new();
        for name in self.species.iter().map(|s| s.as_str()) {
            if names.contains(&name) {
                return Err(ModelError::Structure(format!("duplicate name `{name}`")));
            }
            names.push(name);
        }
        for p in &self.parameters {
            if names.contains(&p.name.as_str()) {
                return Err(ModelError::Structure(format!("duplicate name `{}`", p.name)));
            }
            names.push(&p.name);
        }
        let mut rxn_names: Vec<&str> = Vec::new();
        for r in &self.reactions {
            if rxn_names.contains(&r.name()) {
                return Err(ModelError::Structure(format!(
                    "duplicate reaction name `{}`",
                    r.name()
                )));
            }
            rxn_names.push(r.name());
        }

        for p in &self.parameters {
            match p.value {
                ParamValue::Fixed(v) if !v.is_finite() => {
                    return Err(ModelError::Structure(format!(
                        "parameter `{}` has a non-finite value",
                        p.name
                    )));
                }
                ParamValue::Range(lo, hi) if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                    return Err(ModelError::Structure(format!(
                        "parameter `{}` has an empty or non-finite range [{lo}, {hi}]",
                        p.name
                    )));
                }
                _ => {}
            }
        }

        if self.init_ranges.len() != self.species.len() {
            return Err(ModelError::Structure(
                "init range count does not match species count".into(),
            ));
        }
        for (i, &(lo, hi)) in self.init_ranges.iter().enumerate() {
            let ok = lo.is_finite() && hi.is_finite() && lo <= hi && hi >= 0.0;
            // The initial state is an integer count vector, so the range
            // must contain at least one nonnegative integer.
            let lo_int = lo.max(0.0).ceil();
            if !ok || lo_int > hi.floor() {
                return Err(ModelError::Structure(format!(
                    "species `{}` has an unusable init range [{lo}, {hi}]",
                    self.species[i]
                )));
            }
        }

        for c in &self.constraints {
            if c.members.is_empty() {
                return Err(ModelError::Structure("empty constraint".into()));
            }
            let mut seen = Vec::new();
            for &i in &c.members {
                if i >= self.species.len() || seen.contains(&i) {
                    return Err(ModelError::Structure(
                        "constraint lists an invalid or repeated species".into(),
                    ));
                }
                seen.push(i);
            }
            if !c.total.is_finite() || c.total < 0.0 || c.total.fract() != 0.0 {
                return Err(ModelError::Structure(format!(
                    "constraint total {} is not a nonnegative integer",
                    c.total
                )));
            }
        }

        if self.observables.is_empty() {
            return Err(ModelError::Structure("observable set is empty".into()));
        }
        let mut seen = Vec::new();
        for &u in &self.observables {
            if u >= self.species.len() || seen.contains(&u) {
                return Err(ModelError::Structure(
                    "observables list an invalid or repeated species".into(),
                ));
            }
            seen.push(u);
        }

        let n = self.species.len();
        let m = self.parameters.len();
        for r in &self.reactions {
            if r.update().len() != n {
                return Err(ModelError::Structure(format!(
                    "reaction `{}` has an update vector of wrong length",
                    r.name()
                )));
            }
            let mut bad: Option<(RefKind, usize)> = None;
            r.propensity().visit_refs(&mut |kind, idx| {
                let limit = match kind {
                    RefKind::Species => n,
                    RefKind::Param => m,
                };
                if idx >= limit && bad.is_none() {
                    bad = Some((kind, idx));
                }
            });
            if bad.is_some() {
                return Err(ModelError::Structure(format!(
                    "reaction `{}` references an undeclared species or parameter",
                    r.name()
                )));
            }
        }

        self.boundary_smoke_test()
    }

    /// Numeric check that no reaction can fire out of an insufficient state:
    /// with any consumed species held below its consumption, the propensity
    /// must be exactly 0. Probes random in-range states plus the all-zero
    /// state; this is a smoke test, not a proof.
    fn boundary_smoke_test(&self) -> Result<(), ModelError> {
        let params = self.reference_params();
        let mut prng: u64 = 0x706f_7064_796e ^ 0x9e37_79b9_7f4a_7c15;
        let mut next = move || {
            prng ^= prng >> 12;
            prng ^= prng << 25;
            prng ^= prng >> 27;
            prng.wrapping_mul(0x2545F4914F6CDD1D)
        };
        let n = self.species.len();
        for r in &self.reactions {
            for d in 0..n {
                if r.update()[d] >= 0 {
                    continue;
                }
                let need = (-r.update()[d]) as u64;
                for deficit in 0..need {
                    for trial in 0..17 {
                        let mut state = vec![0.0; n];
                        if trial > 0 {
                            for (i, v) in state.iter_mut().enumerate() {
                                let (lo, hi) = self.init_ranges[i];
                                let lo = lo.max(0.0).ceil() as u64;
                                let hi = hi.floor() as u64;
                                *v = (lo + next() % (hi - lo + 1)) as f64;
                            }
                        }
                        state[d] = deficit as f64;
                        match r.rate(&state, &params) {
                            Ok(v) if v == 0.0 => {}
                            Ok(v) => {
                                return Err(ModelError::BoundaryCheck {
                                    reaction: r.name().to_string(),
                                    msg: format!(
                                        "propensity is {v} with `{}` = {deficit} (needs {need})",
                                        self.species[d]
                                    ),
                                });
                            }
                            Err(e) => {
                                return Err(ModelError::BoundaryCheck {
                                    reaction: r.name().to_string(),
                                    msg: format!(
                                        "propensity failed to evaluate with `{}` = {deficit}: {e}",
                                        self.species[d]
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Parameter vector used for validation probes: fixed values as given,
    /// ranged parameters at their range midpoint.
    fn reference_params(&self) -> Vec<f64> {
        self.parameters
            .iter()
            .map(|p| match p.value {
                ParamValue::Fixed(v) => v,
                ParamValue::Range(lo, hi) => 0.5 * (lo + hi),
            })
            .collect()
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn init_ranges(&self) -> &[(f64, f64)] {
        &self.init_ranges
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Observable species indices, in declared order.
    pub fn observables(&self) -> &[usize] {
        &self.observables
    }

    pub fn observable_names(&self) -> Vec<&str> {
        self.observables.iter().map(|&i| self.species[i].as_str()).collect()
    }

    /// Indices (into the parameter list) of ranged parameters, in order.
    pub fn varying_params(&self) -> Vec<usize> {
        self.parameters
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p.value, ParamValue::Range(..)))
            .map(|(j, _)| j)
            .collect()
    }

    /// Number of conditioning parameters (the ranged ones).
    pub fn m_cond(&self) -> usize {
        self.varying_params().len()
    }

    /// Ranges of the varying parameters, in `varying_params` order.
    pub fn varying_ranges(&self) -> Vec<(f64, f64)> {
        self.parameters
            .iter()
            .filter_map(|p| match p.value {
                ParamValue::Range(lo, hi) => Some((lo, hi)),
                ParamValue::Fixed(_) => None,
            })
            .collect()
    }

    /// Expands a varying-parameter vector `theta` into the full parameter
    /// vector expected by propensity evaluation.
    pub fn full_params(&self, theta: &[f64]) -> Result<Vec<f64>, EvalError> {
        let varying = self.varying_params();
        if theta.len() != varying.len() {
            return Err(EvalError::Arity);
        }
        let mut out: Vec<f64> = self
            .parameters
            .iter()
            .map(|p| match p.value {
                ParamValue::Fixed(v) => v,
                ParamValue::Range(..) => f64::NAN,
            })
            .collect();
        for (&j, &v) in varying.iter().zip(theta) {
            out[j] = v;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net(propensity: PropensityExpr) -> Result<ReactionNetwork, ModelError> {
        let r = Reaction::new("decay", 1, vec![(0, 1)], vec![], propensity)?;
        ReactionNetwork::new(
            vec!["X".into()],
            vec![Parameter { name: "k".into(), value: ParamValue::Fixed(1.0) }],
            vec![(0.0, 100.0)],
            vec![],
            vec![0],
            vec![r],
        )
    }

    #[test]
    fn guarded_decay_validates() {
        let p = PropensityExpr::Mul(
            Box::new(PropensityExpr::Param(0)),
            Box::new(PropensityExpr::Species(0)),
        );
        assert!(tiny_net(p).is_ok());
    }

    #[test]
    fn unguarded_propensity_fails_boundary_check() {
        // Constant rate on a consuming reaction could drive X below zero.
        let p = PropensityExpr::Param(0);
        match tiny_net(p) {
            Err(ModelError::BoundaryCheck { reaction, .. }) => assert_eq!(reaction, "decay"),
            other => panic!("expected boundary failure, got {other:?}"),
        }
    }

    #[test]
    fn unguarded_division_fails_boundary_check() {
        // k/X is undefined at X = 0.
        let p = PropensityExpr::Div(
            Box::new(PropensityExpr::Param(0)),
            Box::new(PropensityExpr::Species(0)),
        );
        assert!(matches!(tiny_net(p), Err(ModelError::BoundaryCheck { .. })));
    }

    #[test]
    fn full_params_slots_theta() {
        let r = Reaction::new("flip", 1, vec![(0, 1)], vec![(0, 1)], PropensityExpr::Species(0))
            .unwrap();
        let net = ReactionNetwork::new(
            vec!["X".into()],
            vec![
                Parameter { name: "a".into(), value: ParamValue::Fixed(2.0) },
                Parameter { name: "b".into(), value: ParamValue::Range(0.0, 1.0) },
                Parameter { name: "c".into(), value: ParamValue::Fixed(5.0) },
            ],
            vec![(0.0, 10.0)],
            vec![],
            vec![0],
            vec![r],
        )
        .unwrap();
        assert_eq!(net.m_cond(), 1);
        assert_eq!(net.full_params(&[0.25]).unwrap(), vec![2.0, 0.25, 5.0]);
        assert!(net.full_params(&[]).is_err());
    }
}
