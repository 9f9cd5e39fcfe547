//! Text-format behavior: parse errors with positions, canonical printing,
//! and the parse/print round trip on the built-in library.

use popdyn_model::{
    builtin_model, builtin_source, parse_model, parse_network, print_model, ModelError,
    BUILTIN_NAMES,
};

const MINIMAL: &str = "\
species X
param k = 1
init X in [0, 100]
reaction decay: X -> 0 @ k*X
grid t0=0 dt=0.25 H=4
";

#[test]
fn parses_minimal_model() {
    let parsed = parse_model(MINIMAL).unwrap();
    assert_eq!(parsed.network.n_species(), 1);
    assert_eq!(parsed.network.reactions().len(), 1);
    let grid = parsed.grid.unwrap();
    assert_eq!(grid.dt(), 0.25);
    assert_eq!(grid.steps(), 4);
}

#[test]
fn sir_shape() {
    let net = parse_network(builtin_source("sir").unwrap()).unwrap();
    assert_eq!(net.n_species(), 3);
    assert_eq!(net.reactions().len(), 2);
    assert_eq!(net.m_cond(), 0);
}

#[test]
fn empty_reaction_block_is_an_error() {
    let src = "species X\nparam k = 1\ninit X in [0, 10]\n";
    match parse_network(src) {
        Err(ModelError::NoReactions) => {}
        other => panic!("expected a no-reactions error, got {other:?}"),
    }
}

#[test]
fn undeclared_species_is_reported_with_position() {
    let src = "\
species X
param k = 1
init X in [0, 100]
reaction decay: X -> 0 @ k*Q
";
    match parse_network(src) {
        Err(ModelError::Undeclared { line, col, name }) => {
            assert_eq!(name, "Q");
            assert_eq!(line, 4);
            assert_eq!(col, 28);
        }
        other => panic!("expected an undeclared-identifier error, got {other:?}"),
    }
}

#[test]
fn syntax_error_carries_line_and_column() {
    let src = "species X\nparam k = 1\ninit X in [0, 100]\nreaction decay: X -> @ k*X\n";
    match parse_network(src) {
        Err(ModelError::Syntax { line: 4, col, .. }) => assert!(col > 0),
        other => panic!("expected a syntax error on line 4, got {other:?}"),
    }
}

#[test]
fn duplicate_names_are_rejected() {
    let src = "species X X\nparam k = 1\ninit X in [0, 10]\nreaction d: X -> 0 @ k*X\n";
    assert!(matches!(parse_network(src), Err(ModelError::Duplicate { .. })));

    let src2 = "species X\nparam X = 1\ninit X in [0, 10]\nreaction d: X -> 0 @ X\n";
    assert!(matches!(parse_network(src2), Err(ModelError::Duplicate { .. })));
}

#[test]
fn malformed_range_is_rejected() {
    let src = "species X\nparam k in [5, 2]\ninit X in [0, 10]\nreaction d: X -> 0 @ k*X\n";
    assert!(matches!(parse_network(src), Err(ModelError::MalformedRange { .. })));
}

#[test]
fn missing_init_is_rejected() {
    let src = "species X Y\nparam k = 1\ninit X in [0, 10]\nreaction d: X -> Y @ k*X\n";
    match parse_network(src) {
        Err(ModelError::MissingInit(name)) => assert_eq!(name, "Y"),
        other => panic!("expected missing-init error, got {other:?}"),
    }
}

#[test]
fn keywords_cannot_be_names() {
    let src = "species grid\nparam k = 1\ninit grid in [0, 10]\nreaction d: grid -> 0 @ k\n";
    assert!(matches!(parse_network(src), Err(ModelError::Syntax { .. })));
}

#[test]
fn parse_print_parse_is_identity_for_builtins() {
    for &name in BUILTIN_NAMES {
        let entry = builtin_model(name).unwrap();
        let printed = print_model(&entry.network, Some(&entry.grid));
        let reparsed = parse_model(&printed)
            .unwrap_or_else(|e| panic!("reprinted `{name}` failed to parse: {e}\n{printed}"));
        assert_eq!(reparsed.network, entry.network, "network mismatch for `{name}`");
        assert_eq!(reparsed.grid.as_ref(), Some(&entry.grid), "grid mismatch for `{name}`");
        // The canonical form is a fixpoint of printing.
        let reprinted = print_model(&reparsed.network, reparsed.grid.as_ref());
        assert_eq!(reprinted, printed, "printing is not stable for `{name}`");
    }
}

#[test]
fn printer_parenthesizes_only_where_needed() {
    let src = "\
species A B
param k = 2
init A in [0, 9]
init B in [0, 9]
reaction r: A -> A + B @ k*(A + B)/(A - B + 1) + (A/B)^2*B
";
    let net = parse_network(src).unwrap();
    let printed = print_model(&net, None);
    let line = printed.lines().find(|l| l.starts_with("reaction r:")).unwrap();
    assert_eq!(line, "reaction r: A -> A + B @ k*(A + B)/(A - B + 1) + (A/B)^2*B");
    let net2 = parse_network(&printed).unwrap();
    assert_eq!(net2, net);
}

#[test]
fn subtraction_grouping_survives_round_trip() {
    // a - (b - c) must not print as a - b - c.
    let src = "\
species A B C
param k = 1
init A in [1, 9]
init B in [0, 9]
init C in [0, 9]
reaction r: A -> 0 @ k*A*(A - (B - C))^2
";
    let net = parse_network(src).unwrap();
    let printed = print_model(&net, None);
    assert!(printed.contains("(A - (B - C))^2"), "got: {printed}");
    assert_eq!(parse_network(&printed).unwrap(), net);
}

#[test]
fn unknown_builtin_name_errors() {
    assert!(matches!(builtin_model("sirs"), Err(ModelError::UnknownBuiltin(_))));
}
