//! Line-oriented parser for the model text format.
//!
//! Grammar, one statement per line, `#` starts a comment:
//!
//! ```text
//! species S I R
//! param theta1 = 3            # fixed value
//! param theta2 in [0.5, 5]    # varying over a range
//! init S in [30, 200]         # one per species, integer lattice
//! constraint S + I + R = 100  # optional sum constraint on the initial state
//! observe S I                 # optional, defaults to all species
//! reaction infect: S + I -> 2 I @ theta1*I*S/(S+I+R)
//! grid t0=0 dt=0.5 H=16       # optional
//! ```
//!
//! Reaction sides are `0` (empty) or `+`-separated terms `[coeff] NAME`
//! with positive integer coefficients (default 1). The text after `@` is
//! the propensity: literals, declared names, `+ - * /`, parentheses, and
//! `expr ^ INT`. Mass action is never inferred; the expression is the rate.
//! Declarations may appear in any order; `species` and `param` lines may
//! be repeated and accumulate.

use crate::error::ModelError;
use crate::expr::PropensityExpr;
use crate::grid::SimGrid;
use crate::network::{Constraint, ParamValue, Parameter, Reaction, ReactionNetwork};

/// Result of parsing a model file: the network plus its optional grid line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedModel {
    pub network: ReactionNetwork,
    pub grid: Option<SimGrid>,
}

/// Parses a full model file.
pub fn parse_model(text: &str) -> Result<ParsedModel, ModelError> {
    Parser::new(text)?.finish()
}

/// Parses a model file, discarding the grid line if present.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ModelError> {
    parse_model(text).map(|m| m.network)
}

const KEYWORDS: &[&str] =
    &["species", "param", "init", "constraint", "observe", "reaction", "grid", "in"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    At,
    Eq,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number {v}"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::At => "`@`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Spanned>, ModelError> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| ModelError::Syntax {
                    line: line_no,
                    col,
                    msg: format!("invalid number `{text}`"),
                })?;
                out.push(Spanned { tok: Tok::Number(v), col });
            }
            '-' if i + 1 < chars.len() && chars[i + 1] == '>' => {
                out.push(Spanned { tok: Tok::Arrow, col });
                i += 2;
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '@' => Tok::At,
                    '=' => Tok::Eq,
                    other => {
                        return Err(ModelError::Syntax {
                            line: line_no,
                            col,
                            msg: format!("unexpected character `{other}`"),
                        });
                    }
                };
                out.push(Spanned { tok, col });
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Cursor over one statement's tokens.
struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.toks.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        ModelError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ModelError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = t.describe();
                Err(self.err(format!("expected {}, found {found}", want.describe())))
            }
            None => Err(self.err(format!("expected {}", want.describe()))),
        }
    }

    fn ident(&mut self) -> Result<String, ModelError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => {
                let found = t.describe();
                Err(self.err(format!("expected identifier, found {found}")))
            }
            None => Err(self.err("expected identifier")),
        }
    }

    fn name(&mut self) -> Result<String, ModelError> {
        let col = self.col();
        let s = self.ident()?;
        if KEYWORDS.contains(&s.as_str()) {
            return Err(ModelError::Syntax {
                line: self.line,
                col,
                msg: format!("`{s}` is a keyword and cannot be used as a name"),
            });
        }
        Ok(s)
    }

    fn number(&mut self) -> Result<f64, ModelError> {
        match self.peek() {
            Some(Tok::Number(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(t) => {
                let found = t.describe();
                Err(self.err(format!("expected number, found {found}")))
            }
            None => Err(self.err("expected number")),
        }
    }

    fn integer(&mut self, what: &str) -> Result<u64, ModelError> {
        let col = self.col();
        let v = self.number()?;
        if v.fract() != 0.0 || v < 0.0 || v > u64::MAX as f64 {
            return Err(ModelError::Syntax {
                line: self.line,
                col,
                msg: format!("{what} must be a nonnegative integer, got {v}"),
            });
        }
        Ok(v as u64)
    }

    fn end(&self) -> Result<(), ModelError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => {
                let found = t.describe();
                Err(self.err(format!("unexpected trailing {found}")))
            }
        }
    }

    /// `[lo, hi]`
    fn range(&mut self) -> Result<(f64, f64), ModelError> {
        let line = self.line;
        let col = self.col();
        self.expect(Tok::LBracket)?;
        let lo = self.number()?;
        self.expect(Tok::Comma)?;
        let hi = self.number()?;
        self.expect(Tok::RBracket)?;
        if lo > hi {
            return Err(ModelError::MalformedRange {
                line,
                col,
                msg: format!("lower bound {lo} exceeds upper bound {hi}"),
            });
        }
        Ok((lo, hi))
    }
}

struct RawReaction {
    name: String,
    reactants: Vec<(String, u32, usize, usize)>,
    products: Vec<(String, u32, usize, usize)>,
    prop_toks: Vec<Spanned>,
    line: usize,
}

struct Parser {
    species: Vec<String>,
    params: Vec<Parameter>,
    init: Vec<Option<(f64, f64)>>,
    constraints: Vec<(Vec<(String, usize, usize)>, f64)>,
    observe: Option<Vec<(String, usize, usize)>>,
    reactions: Vec<RawReaction>,
    grid: Option<SimGrid>,
    decl_lines: Vec<(usize, Vec<Spanned>)>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ModelError> {
        let mut p = Parser {
            species: Vec::new(),
            params: Vec::new(),
            init: Vec::new(),
            constraints: Vec::new(),
            observe: None,
            reactions: Vec::new(),
            grid: None,
            decl_lines: Vec::new(),
        };

        // First pass: declarations, so later statements can reference
        // species and parameters regardless of line order.
        let mut other_lines: Vec<(usize, Vec<Spanned>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let toks = lex_line(raw, line_no)?;
            if toks.is_empty() {
                continue;
            }
            match &toks[0].tok {
                Tok::Ident(k) if k == "species" || k == "param" => {
                    p.decl_lines.push((line_no, toks));
                }
                _ => other_lines.push((line_no, toks)),
            }
        }
        let decls = std::mem::take(&mut p.decl_lines);
        for (line_no, toks) in decls {
            let mut cur = Cursor { toks, pos: 0, line: line_no };
            let head = cur.ident()?;
            match head.as_str() {
                "species" => p.stmt_species(&mut cur)?,
                "param" => p.stmt_param(&mut cur)?,
                _ => unreachable!(),
            }
        }
        p.init = vec![None; p.species.len()];

        for (line_no, toks) in other_lines {
            let mut cur = Cursor { toks, pos: 0, line: line_no };
            let head_col = cur.col();
            let head = match cur.peek() {
                Some(Tok::Ident(s)) => s.clone(),
                _ => return Err(cur.err("expected a statement keyword")),
            };
            cur.pos += 1;
            match head.as_str() {
                "init" => p.stmt_init(&mut cur)?,
                "constraint" => p.stmt_constraint(&mut cur)?,
                "observe" => p.stmt_observe(&mut cur)?,
                "reaction" => p.stmt_reaction(&mut cur)?,
                "grid" => p.stmt_grid(&mut cur)?,
                other => {
                    return Err(ModelError::Syntax {
                        line: line_no,
                        col: head_col,
                        msg: format!("unknown statement `{other}`"),
                    });
                }
            }
        }
        Ok(p)
    }

    fn declare(&mut self, name: &str, line: usize, col: usize) -> Result<(), ModelError> {
        let clash = self.species.iter().any(|s| s == name)
            || self.params.iter().any(|q| q.name == name);
        if clash {
            return Err(ModelError::Duplicate { line, col, name: name.into() });
        }
        Ok(())
    }

    fn stmt_species(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        let mut any = false;
        while cur.peek().is_some() {
            let col = cur.col();
            let name = cur.name()?;
            self.declare(&name, cur.line, col)?;
            self.species.push(name);
            any = true;
        }
        if !any {
            return Err(cur.err("`species` needs at least one name"));
        }
        Ok(())
    }

    fn stmt_param(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        let col = cur.col();
        let name = cur.name()?;
        self.declare(&name, cur.line, col)?;
        let value = match cur.peek() {
            Some(Tok::Eq) => {
                cur.pos += 1;
                ParamValue::Fixed(cur.number()?)
            }
            Some(Tok::Ident(k)) if k == "in" => {
                cur.pos += 1;
                let (lo, hi) = cur.range()?;
                ParamValue::Range(lo, hi)
            }
            _ => return Err(cur.err("expected `= value` or `in [lo, hi]`")),
        };
        cur.end()?;
        self.params.push(Parameter { name, value });
        Ok(())
    }

    fn species_ref(&self, name: &str, line: usize, col: usize) -> Result<usize, ModelError> {
        self.species.iter().position(|s| s == name).ok_or_else(|| ModelError::Undeclared {
            line,
            col,
            name: name.into(),
        })
    }

    fn stmt_init(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        let col = cur.col();
        let name = cur.name()?;
        let idx = self.species_ref(&name, cur.line, col)?;
        match cur.peek() {
            Some(Tok::Ident(k)) if k == "in" => cur.pos += 1,
            _ => return Err(cur.err("expected `in [lo, hi]`")),
        }
        let range = cur.range()?;
        cur.end()?;
        if self.init[idx].is_some() {
            return Err(ModelError::Duplicate { line: cur.line, col, name });
        }
        self.init[idx] = Some(range);
        Ok(())
    }

    fn stmt_constraint(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        let mut members = Vec::new();
        loop {
            let col = cur.col();
            let name = cur.name()?;
            members.push((name, cur.line, col));
            match cur.next() {
                Some(Tok::Plus) => continue,
                Some(Tok::Eq) => break,
                _ => return Err(cur.err("expected `+` or `=` in constraint")),
            }
        }
        let total = cur.number()?;
        cur.end()?;
        self.constraints.push((members, total));
        Ok(())
    }

    fn stmt_observe(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        if self.observe.is_some() {
            return Err(cur.err("duplicate `observe` statement"));
        }
        let mut names = Vec::new();
        while cur.peek().is_some() {
            let col = cur.col();
            names.push((cur.name()?, cur.line, col));
        }
        if names.is_empty() {
            return Err(cur.err("`observe` needs at least one species"));
        }
        self.observe = Some(names);
        Ok(())
    }

    /// One side of a reaction: `0` or `+`-separated `[coeff] NAME` terms.
    fn side(&mut self, cur: &mut Cursor) -> Result<Vec<(String, u32, usize, usize)>, ModelError> {
        if matches!(cur.peek(), Some(Tok::Number(v)) if *v == 0.0) {
            cur.pos += 1;
            return Ok(Vec::new());
        }
        let mut terms = Vec::new();
        loop {
            let col = cur.col();
            let coeff = match cur.peek() {
                Some(Tok::Number(_)) => {
                    let c = cur.integer("stoichiometric coefficient")?;
                    if c == 0 || c > u32::MAX as u64 {
                        return Err(ModelError::Syntax {
                            line: cur.line,
                            col,
                            msg: "stoichiometric coefficient must be a positive integer".into(),
                        });
                    }
                    c as u32
                }
                _ => 1,
            };
            let name_col = cur.col();
            let name = cur.name()?;
            terms.push((name, coeff, cur.line, name_col));
            match cur.peek() {
                Some(Tok::Plus) => cur.pos += 1,
                _ => break,
            }
        }
        Ok(terms)
    }

    fn stmt_reaction(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        let name = cur.name()?;
        cur.expect(Tok::Colon)?;
        let reactants = self.side(cur)?;
        cur.expect(Tok::Arrow)?;
        let products = self.side(cur)?;
        cur.expect(Tok::At)?;
        if cur.peek().is_none() {
            return Err(cur.err("missing propensity expression after `@`"));
        }
        let prop_toks = cur.toks.split_off(cur.pos);
        self.reactions.push(RawReaction {
            name,
            reactants,
            products,
            prop_toks,
            line: cur.line,
        });
        Ok(())
    }

    fn stmt_grid(&mut self, cur: &mut Cursor) -> Result<(), ModelError> {
        if self.grid.is_some() {
            return Err(cur.err("duplicate `grid` statement"));
        }
        let mut t0 = None;
        let mut dt = None;
        let mut steps = None;
        while cur.peek().is_some() {
            let col = cur.col();
            let key = cur.ident()?;
            cur.expect(Tok::Eq)?;
            match key.as_str() {
                "t0" => t0 = Some(cur.number()?),
                "dt" => dt = Some(cur.number()?),
                "H" => steps = Some(cur.integer("H")? as usize),
                other => {
                    return Err(ModelError::Syntax {
                        line: cur.line,
                        col,
                        msg: format!("unknown grid field `{other}` (want t0, dt, H)"),
                    });
                }
            }
        }
        match (t0, dt, steps) {
            (Some(t0), Some(dt), Some(h)) => {
                self.grid = Some(SimGrid::new(t0, dt, h).map_err(|e| ModelError::Syntax {
                    line: cur.line,
                    col: 1,
                    msg: e.to_string(),
                })?);
                Ok(())
            }
            _ => Err(cur.err("grid needs all of t0, dt, H")),
        }
    }

    /// Precedence-climbing expression parser over the `@` token tail.
    fn expr(&self, cur: &mut Cursor) -> Result<PropensityExpr, ModelError> {
        let mut lhs = self.expr_term(cur)?;
        while let Some(op) = cur.peek() {
            let op = match op {
                Tok::Plus => Tok::Plus,
                Tok::Minus => Tok::Minus,
                _ => break,
            };
            cur.pos += 1;
            let rhs = self.expr_term(cur)?;
            lhs = match op {
                Tok::Plus => PropensityExpr::Add(Box::new(lhs), Box::new(rhs)),
                _ => PropensityExpr::Sub(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn expr_term(&self, cur: &mut Cursor) -> Result<PropensityExpr, ModelError> {
        let mut lhs = self.expr_factor(cur)?;
        while let Some(op) = cur.peek() {
            let op = match op {
                Tok::Star => Tok::Star,
                Tok::Slash => Tok::Slash,
                _ => break,
            };
            cur.pos += 1;
            let rhs = self.expr_factor(cur)?;
            lhs = match op {
                Tok::Star => PropensityExpr::Mul(Box::new(lhs), Box::new(rhs)),
                _ => PropensityExpr::Div(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn expr_factor(&self, cur: &mut Cursor) -> Result<PropensityExpr, ModelError> {
        let base = self.expr_atom(cur)?;
        if matches!(cur.peek(), Some(Tok::Caret)) {
            cur.pos += 1;
            let col = cur.col();
            let exp = cur.integer("exponent")?;
            if exp > u32::MAX as u64 {
                return Err(ModelError::Syntax {
                    line: cur.line,
                    col,
                    msg: "exponent too large".into(),
                });
            }
            return Ok(PropensityExpr::Pow(Box::new(base), exp as u32));
        }
        Ok(base)
    }

    fn expr_atom(&self, cur: &mut Cursor) -> Result<PropensityExpr, ModelError> {
        match cur.peek() {
            Some(Tok::Number(v)) => {
                let v = *v;
                cur.pos += 1;
                Ok(PropensityExpr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                let col = cur.col();
                cur.pos += 1;
                if let Some(i) = self.species.iter().position(|s| *s == name) {
                    Ok(PropensityExpr::Species(i))
                } else if let Some(j) = self.params.iter().position(|p| p.name == name) {
                    Ok(PropensityExpr::Param(j))
                } else {
                    Err(ModelError::Undeclared { line: cur.line, col, name })
                }
            }
            Some(Tok::LParen) => {
                cur.pos += 1;
                let inner = self.expr(cur)?;
                cur.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => {
                let found = t.describe();
                Err(cur.err(format!("expected a value, found {found}")))
            }
            None => Err(cur.err("unexpected end of expression")),
        }
    }

    fn finish(mut self) -> Result<ParsedModel, ModelError> {
        if self.species.is_empty() {
            return Err(ModelError::NoSpecies);
        }
        if self.reactions.is_empty() {
            return Err(ModelError::NoReactions);
        }

        let mut init_ranges = Vec::with_capacity(self.species.len());
        for (i, r) in self.init.iter().enumerate() {
            match r {
                Some(range) => init_ranges.push(*range),
                None => return Err(ModelError::MissingInit(self.species[i].clone())),
            }
        }

        let mut constraints = Vec::new();
        for (members, total) in std::mem::take(&mut self.constraints) {
            let mut idx = Vec::with_capacity(members.len());
            for (name, line, col) in members {
                idx.push(self.species_ref(&name, line, col)?);
            }
            constraints.push(Constraint { members: idx, total });
        }

        let observables = match std::mem::take(&mut self.observe) {
            None => (0..self.species.len()).collect(),
            Some(names) => {
                let mut idx = Vec::with_capacity(names.len());
                for (name, line, col) in names {
                    idx.push(self.species_ref(&name, line, col)?);
                }
                idx
            }
        };

        let n = self.species.len();
        let mut reactions = Vec::new();
        for raw in std::mem::take(&mut self.reactions) {
            let mut sides = [Vec::new(), Vec::new()];
            for (k, terms) in [&raw.reactants, &raw.products].into_iter().enumerate() {
                for (name, coeff, line, col) in terms {
                    sides[k].push((self.species_ref(name, *line, *col)?, *coeff));
                }
            }
            let [reactants, products] = sides;
            let mut cur = Cursor { toks: raw.prop_toks, pos: 0, line: raw.line };
            let propensity = self.expr(&mut cur)?;
            cur.end()?;
            reactions.push(
                Reaction::new(raw.name, n, reactants, products, propensity)
                    .map_err(|e| ModelError::Structure(e.to_string()))?,
            );
        }

        let network = ReactionNetwork::new(
            std::mem::take(&mut self.species),
            std::mem::take(&mut self.params),
            init_ranges,
            constraints,
            observables,
            reactions,
        )?;
        Ok(ParsedModel { network, grid: self.grid })
    }
}
