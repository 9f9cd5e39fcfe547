//! Canonical text form of a network. `parse(print(net))` reproduces `net`
//! exactly; printing a freshly parsed canonical file reproduces the file.

use crate::expr::PropensityExpr;
use crate::grid::SimGrid;
use crate::network::{ParamValue, ReactionNetwork};
use std::fmt::Write;

/// Prints a network (and optionally its grid) in canonical form:
/// one `species` line, parameters and reactions in declaration order,
/// `observe` omitted when it covers all species in order, grid last.
pub fn print_model(net: &ReactionNetwork, grid: Option<&SimGrid>) -> String {
    let mut out = String::new();
    out.push_str("species");
    for s in net.species() {
        let _ = write!(out, " {s}");
    }
    out.push('\n');

    for p in net.parameters() {
        match p.value {
            ParamValue::Fixed(v) => {
                let _ = writeln!(out, "param {} = {v}", p.name);
            }
            ParamValue::Range(lo, hi) => {
                let _ = writeln!(out, "param {} in [{lo}, {hi}]", p.name);
            }
        }
    }

    for (i, &(lo, hi)) in net.init_ranges().iter().enumerate() {
        let _ = writeln!(out, "init {} in [{lo}, {hi}]", net.species()[i]);
    }

    for c in net.constraints() {
        let names: Vec<&str> = c.members.iter().map(|&i| net.species()[i].as_str()).collect();
        let _ = writeln!(out, "constraint {} = {}", names.join(" + "), c.total);
    }

    let default_obs: Vec<usize> = (0..net.n_species()).collect();
    if net.observables() != default_obs.as_slice() {
        out.push_str("observe");
        for &u in net.observables() {
            let _ = write!(out, " {}", net.species()[u]);
        }
        out.push('\n');
    }

    for r in net.reactions() {
        let _ = write!(out, "reaction {}: ", r.name());
        push_side(&mut out, net, r.reactants());
        out.push_str(" -> ");
        push_side(&mut out, net, r.products());
        out.push_str(" @ ");
        push_expr(&mut out, net, r.propensity(), 0, false);
        out.push('\n');
    }

    if let Some(g) = grid {
        let _ = writeln!(out, "grid t0={} dt={} H={}", g.t0(), g.dt(), g.steps());
    }
    out
}

fn push_side(out: &mut String, net: &ReactionNetwork, side: &[(usize, u32)]) {
    if side.is_empty() {
        out.push('0');
        return;
    }
    for (k, &(i, c)) in side.iter().enumerate() {
        if k > 0 {
            out.push_str(" + ");
        }
        if c != 1 {
            let _ = write!(out, "{c} ");
        }
        out.push_str(&net.species()[i]);
    }
}

fn prec(e: &PropensityExpr) -> u8 {
    match e {
        PropensityExpr::Add(..) | PropensityExpr::Sub(..) => 1,
        PropensityExpr::Mul(..) | PropensityExpr::Div(..) => 2,
        PropensityExpr::Pow(..) => 3,
        _ => 4,
    }
}

/// Minimal-parentheses printing: a child is wrapped when its precedence is
/// lower than the parent's, or equal on the right of `-` and `/` (both are
/// left-associative).
fn push_expr(
    out: &mut String,
    net: &ReactionNetwork,
    e: &PropensityExpr,
    parent: u8,
    right_of_nonassoc: bool,
) {
    let p = prec(e);
    let wrap = p < parent || (p == parent && right_of_nonassoc);
    if wrap {
        out.push('(');
    }
    match e {
        PropensityExpr::Const(v) => {
            let _ = write!(out, "{v}");
        }
        PropensityExpr::Species(i) => out.push_str(&net.species()[*i]),
        PropensityExpr::Param(j) => out.push_str(&net.parameters()[*j].name),
        PropensityExpr::Add(a, b) => {
            push_expr(out, net, a, p, false);
            out.push_str(" + ");
            push_expr(out, net, b, p, false);
        }
        PropensityExpr::Sub(a, b) => {
            push_expr(out, net, a, p, false);
            out.push_str(" - ");
            push_expr(out, net, b, p, true);
        }
        PropensityExpr::Mul(a, b) => {
            push_expr(out, net, a, p, false);
            out.push('*');
            push_expr(out, net, b, p, false);
        }
        PropensityExpr::Div(a, b) => {
            push_expr(out, net, a, p, false);
            out.push('/');
            push_expr(out, net, b, p, true);
        }
        PropensityExpr::Pow(base, exp) => {
            push_expr(out, net, base, 4, false);
            let _ = write!(out, "^{exp}");
        }
    }
    if wrap {
        out.push(')');
    }
}
