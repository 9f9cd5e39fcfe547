//! Built-in case-study models, each with its simulation grid and default
//! dataset sizes. The sources are parsed at request time, so the library
//! goes through the same front end as user files.

use crate::error::ModelError;
use crate::grid::SimGrid;
use crate::network::ReactionNetwork;
use crate::parser::parse_model;

/// A built-in model plus its experiment defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelLibraryEntry {
    pub name: &'static str,
    pub network: ReactionNetwork,
    pub grid: SimGrid,
    /// Training set defaults: (settings, replicas per setting).
    pub train_sizes: (usize, usize),
    /// Test set defaults: (settings, replicas per setting).
    pub test_sizes: (usize, usize),
    /// The deeper generator/critic stacks are used for this model.
    pub deep_arch: bool,
}

pub const BUILTIN_NAMES: &[&str] =
    &["sir", "esirs", "esirs-1p", "toggle-switch", "oscillator", "mapk"];

const SIR: &str = "\
# Epidemic model with absorbing states: nothing moves once I = 0.
species S I R
param theta1 = 3
param theta2 = 1
init S in [30, 200]
init I in [30, 200]
init R in [30, 200]
reaction infect: S + I -> 2 I @ theta1*I*S/(S+I+R)
reaction recover: I -> R @ theta2*I
grid t0=0 dt=0.5 H=16
";

// Ergodic SIRS: external infection pressure (theta2) and waning immunity
// (theta4) remove the absorbing states of plain SIR.
const ESIRS: &str = "\
species S I R
param theta1 = 2.36
param theta2 = 1.67
param theta3 = 0.9
param theta4 = 0.64
init S in [0, 100]
init I in [0, 100]
init R in [0, 100]
constraint S + I + R = 100
observe S I
reaction infect: S + I -> 2 I @ theta1*I*S/(S+I+R) + theta2*S
reaction recover: I -> R @ theta3*I
reaction wane: R -> S @ theta4*R
grid t0=0 dt=0.1 H=32
";

const ESIRS_1P: &str = "\
species S I R
param theta1 in [0.5, 5]
param theta2 = 1.67
param theta3 = 0.9
param theta4 = 0.64
init S in [0, 100]
init I in [0, 100]
init R in [0, 100]
constraint S + I + R = 100
observe S I
reaction infect: S + I -> 2 I @ theta1*I*S/(S+I+R) + theta2*S
reaction recover: I -> R @ theta3*I
reaction wane: R -> S @ theta4*R
grid t0=0 dt=0.1 H=32
";

// Two mutually repressing genes; binding of a protein dimer switches the
// other gene off. Only the protein counts are observed.
const TOGGLE_SWITCH: &str = "\
species G1on G1off G2on G2off P1 P2
param kp1 = 1
param kp2 = 1
param kb1 = 1
param kb2 = 1
param ku1 = 1
param ku2 = 1
param kd1 = 0.01
param kd2 = 0.01
init G1on in [0, 1]
init G1off in [0, 1]
init G2on in [0, 1]
init G2off in [0, 1]
init P1 in [5, 20]
init P2 in [5, 20]
constraint G1on + G1off = 1
constraint G2on + G2off = 1
observe P1 P2
reaction prod1: G1on -> G1on + P1 @ kp1*G1on
reaction prod2: G2on -> G2on + P2 @ kp2*G2on
reaction bind1: 2 P2 + G1on -> G1off @ kb1*G1on*P2*(P2 - 1)
reaction bind2: 2 P1 + G2on -> G2off @ kb2*G2on*P1*(P1 - 1)
reaction unbind1: G1off -> G1on + 2 P2 @ ku1*G1off
reaction unbind2: G2off -> G2on + 2 P1 @ ku2*G2off
reaction deg1: P1 -> 0 @ kd1*P1
reaction deg2: P2 -> 0 @ kd2*P2
grid t0=0 dt=0.1 H=32
";

// Cyclic three-species competition; total population is conserved.
const OSCILLATOR: &str = "\
species A B C
param theta = 1
init A in [20, 100]
init B in [20, 100]
init C in [20, 100]
reaction convert_b: A + B -> 2 A @ theta*A*B/(A+B+C)
reaction convert_c: B + C -> 2 B @ theta*B*C/(A+B+C)
reaction convert_a: C + A -> 2 C @ theta*C*A/(A+B+C)
grid t0=0 dt=1 H=32
";

// Three-layer phosphorylation cascade with negative feedback from the
// output (MAPK_PP) onto the first activation step. Michaelis-Menten
// kinetics and constants follow the standard oscillatory parameterization
// of this cascade; the stimulus V1 is the varying input.
const MAPK: &str = "\
species MKKK MKKK_P MKK MKK_P MKK_PP MAPK MAPK_P MAPK_PP
param V1 in [0.5, 5]
param Ki = 9
param K1 = 10
param V2 = 0.25
param K2 = 8
param k3 = 0.025
param K3 = 15
param k4 = 0.025
param K4 = 15
param V5 = 0.75
param K5 = 15
param V6 = 0.75
param K6 = 15
param k7 = 0.025
param K7 = 15
param k8 = 0.025
param K8 = 15
param V9 = 0.5
param K9 = 15
param V10 = 0.5
param K10 = 15
init MKKK in [0, 100]
init MKKK_P in [0, 100]
init MKK in [0, 300]
init MKK_P in [0, 300]
init MKK_PP in [0, 300]
init MAPK in [0, 300]
init MAPK_P in [0, 300]
init MAPK_PP in [0, 300]
constraint MKKK + MKKK_P = 100
constraint MKK + MKK_P + MKK_PP = 300
constraint MAPK + MAPK_P + MAPK_PP = 300
observe MAPK_PP
reaction r1: MKKK -> MKKK_P @ V1*MKKK/((1 + MAPK_PP/Ki)*(K1 + MKKK))
reaction r2: MKKK_P -> MKKK @ V2*MKKK_P/(K2 + MKKK_P)
reaction r3: MKK -> MKK_P @ k3*MKKK_P*MKK/(K3 + MKK)
reaction r4: MKK_P -> MKK_PP @ k4*MKKK_P*MKK_P/(K4 + MKK_P)
reaction r5: MKK_PP -> MKK_P @ V5*MKK_PP/(K5 + MKK_PP)
reaction r6: MKK_P -> MKK @ V6*MKK_P/(K6 + MKK_P)
reaction r7: MAPK -> MAPK_P @ k7*MKK_PP*MAPK/(K7 + MAPK)
reaction r8: MAPK_P -> MAPK_PP @ k8*MKK_PP*MAPK_P/(K8 + MAPK_P)
reaction r9: MAPK_PP -> MAPK_P @ V9*MAPK_PP/(K9 + MAPK_PP)
reaction r10: MAPK_P -> MAPK @ V10*MAPK_P/(K10 + MAPK_P)
grid t0=0 dt=60 H=32
";

/// Returns the source text of a built-in model.
pub fn builtin_source(name: &str) -> Result<&'static str, ModelError> {
    match name {
        "sir" => Ok(SIR),
        "esirs" => Ok(ESIRS),
        "esirs-1p" => Ok(ESIRS_1P),
        "toggle-switch" => Ok(TOGGLE_SWITCH),
        "oscillator" => Ok(OSCILLATOR),
        "mapk" => Ok(MAPK),
        other => Err(ModelError::UnknownBuiltin(other.into())),
    }
}

/// Builds a built-in model entry by name (see [`BUILTIN_NAMES`]).
pub fn builtin_model(name: &str) -> Result<ModelLibraryEntry, ModelError> {
    let source = builtin_source(name)?;
    let parsed = parse_model(source).unwrap_or_else(|e|

        // The sources are compiled in; a parse failure is a library bug.
        panic!("built-in model `{name}` failed to parse: {e}"));
    let grid = parsed.grid.expect("built-in models declare a grid");
    // Models whose parameters vary use fewer settings with more replicas;
    // the rest use the wide fixed-parameter layout. Test sets are the same
    // everywhere: few settings, many replicas per setting.
    let varying = parsed.network.m_cond() > 0;
    let train_sizes = if varying { (1000, 50) } else { (2000, 10) };
    Ok(ModelLibraryEntry {
        name: BUILTIN_NAMES.iter().find(|&&n| n == name).copied().unwrap(),
        network: parsed.network,
        grid,
        train_sizes,
        test_sizes: (25, 2000),
        deep_arch: name == "mapk",
    })
}
