use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;

use super::lexer::{lex, Tok, Token};
use super::{
    compile::build_component, ComponentDecl, Connection, Diagnostics, Direction, Field, Key, NetworkSpec,
    ParseDiagnostic, PortRef, Span, Value,
};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> ParseDiagnostic {
        let t = self.peek();
        ParseDiagnostic::error(t.span, format!("expected {what}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek().tok {
            Tok::Number { value, integer: true } if value <= u32::MAX as f64 => {
                self.bump();
                Ok(value as usize)
            }
            _ => Err(self.unexpected("a nonnegative integer")),
        }
    }

    /// FLOAT with an optional leading sign.
    fn float(&mut self) -> PResult<f64> {
        let sign = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                -1.0
            }
            Tok::Plus => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        match self.peek().tok {
            Tok::Number { value, .. } => {
                self.bump();
                Ok(sign * value)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn complex(&mut self) -> PResult<Complex64> {
        let re = self.float()?;
        let sign = match self.peek().tok {
            Tok::Plus => 1.0,
            Tok::Minus => -1.0,
            _ => return Ok(Complex64::new(re, 0.0)),
        };
        self.bump();
        let im = match self.peek().tok {
            Tok::Number { value, .. } => {
                self.bump();
                value
            }
            _ => return Err(self.unexpected("the imaginary part")),
        };
        match &self.peek().tok {
            Tok::Ident(s) if s == "i" => {
                self.bump();
            }
            _ => return Err(self.unexpected("`i` after the imaginary part")),
        }
        Ok(Complex64::new(re, sign * im))
    }

    fn row(&mut self) -> PResult<Vec<Complex64>> {
        self.expect(Tok::LBracket, "`[` starting a matrix row")?;
        let mut row = vec![self.complex()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            row.push(self.complex()?);
        }
        self.expect(Tok::RBracket, "`,` or `]` closing the row")?;
        Ok(row)
    }

    fn value(&mut self) -> PResult<Value> {
        if self.peek().tok == Tok::LBracket {
            let open = self.bump().span;
            let mut rows = vec![self.row()?];
            while self.peek().tok == Tok::Comma {
                self.bump();
                rows.push(self.row()?);
            }
            self.expect(Tok::RBracket, "`,` or `]` closing the matrix")?;
            if rows.iter().any(|r| r.len() != rows[0].len()) {
                return Err(ParseDiagnostic::error(open, "matrix rows have different lengths"));
            }
            Ok(Value::Matrix(rows))
        } else {
            Ok(Value::Number(self.float()?))
        }
    }

    fn component(&mut self, diags: &mut Vec<ParseDiagnostic>) -> PResult<ComponentDecl> {
        let span = self.keyword("component")?;
        let (name, _) = self.ident("a component name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut fields = BTreeMap::new();
        while self.peek().tok != Tok::RBrace {
            let (key_name, kspan) = self.ident("a field name or `}`")?;
            let key = Key::from_name(&key_name).ok_or_else(|| {
                ParseDiagnostic::error(kspan, format!("unknown field `{key_name}`"))
            })?;
            self.expect(Tok::Eq, "`=`")?;
            let value = self.value()?;
            self.expect(Tok::Semi, "`;` after the field value")?;
            if fields.contains_key(&key) {
                diags.push(ParseDiagnostic::error(kspan, format!("field `{key_name}` given twice")));
                continue;
            }
            fields.insert(key, Field { value, span: kspan });
        }
        self.bump();
        Ok(ComponentDecl { name, fields, span })
    }

    fn port(&mut self) -> PResult<PortRef> {
        let (component, span) = self.ident("a component name")?;
        self.expect(Tok::Dot, "`.`")?;
        let direction = match &self.peek().tok {
            Tok::Ident(s) if s == "in" => Direction::In,
            Tok::Ident(s) if s == "out" => Direction::Out,
            _ => return Err(self.unexpected("`in` or `out`")),
        };
        self.bump();
        self.expect(Tok::LBracket, "`[`")?;
        let index = self.int()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(PortRef { component, direction, index, span })
    }

    fn connection(&mut self) -> PResult<Connection> {
        let span = self.keyword("connect")?;
        let from = self.port()?;
        if from.direction != Direction::Out {
            return Err(ParseDiagnostic::error(from.span, "the source of a connection must be an `out` port"));
        }
        self.expect(Tok::Arrow, "`->`")?;
        let to = self.port()?;
        if to.direction != Direction::In {
            return Err(ParseDiagnostic::error(to.span, "the target of a connection must be an `in` port"));
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(Connection { from, to, span })
    }

    fn externals(&mut self) -> PResult<Vec<PortRef>> {
        self.keyword("external")?;
        let mut ports = vec![self.port()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            ports.push(self.port()?);
        }
        self.expect(Tok::Semi, "`,` or `;`")?;
        Ok(ports)
    }
}

fn check_component(c: &ComponentDecl, diags: &mut Vec<ParseDiagnostic>) {
    for (key, field) in &c.fields {
        match (&field.value, key.is_integer()) {
            (Value::Matrix(_), true) => {
                diags.push(ParseDiagnostic::error(field.span, format!("`{}` must be an integer", key.name())))
            }
            (Value::Number(x), true) if *x < 0.0 || x.fract() != 0.0 => diags.push(ParseDiagnostic::error(
                field.span,
                format!("`{}` must be a nonnegative integer", key.name()),
            )),
            _ => {}
        }
    }
    if let Some(f) = c.fields.get(&Key::Dim) {
        if matches!(f.value, Value::Number(x) if x == 0.0) {
            diags.push(ParseDiagnostic::error(f.span, "`dim` must be at least 1"));
        }
    }
    let present = |ks: &[Key]| ks.iter().filter_map(|k| c.fields.get(k).map(|f| (*k, f.span))).collect::<Vec<_>>();
    let plain = present(&[Key::L, Key::H]);
    let osc = present(&[Key::C, Key::G, Key::A, Key::Z, Key::X, Key::R, Key::Omega, Key::Gamma, Key::Theta]);
    let numeric = present(&[Key::A, Key::Z, Key::X, Key::R]);
    let ham = present(&[Key::Omega, Key::Gamma, Key::Theta]);
    if let (Some(p), Some(o)) = (plain.first(), osc.first()) {
        diags.push(ParseDiagnostic::error(
            o.1,
            format!("`{}` cannot be combined with the plain block `{}`", o.0.name(), p.0.name()),
        ));
    } else if let (Some(n), Some(h)) = (numeric.first(), ham.first()) {
        diags.push(ParseDiagnostic::error(
            h.1,
            format!("`{}` cannot be combined with `{}`; give one block set", h.0.name(), n.0.name()),
        ));
    }
    if !plain.is_empty() && c.oscillators() > 0 {
        diags.push(ParseDiagnostic::error(plain[0].1, "a component with oscillators needs C, G and A..R or Omega..Theta blocks"));
    }
}

fn check_ports(spec: &NetworkSpec, diags: &mut Vec<ParseDiagnostic>) {
    let arity: HashMap<&str, usize> = spec.components.iter().map(|c| (c.name.as_str(), c.channels())).collect();
    let mut used: HashSet<(String, Direction, usize)> = HashSet::new();
    let mut check = |p: &PortRef, what: &str, diags: &mut Vec<ParseDiagnostic>| match arity.get(p.component.as_str()) {
        None => diags.push(ParseDiagnostic::error(p.span, format!("unknown component `{}`", p.component))),
        Some(&n) if p.index >= n => diags.push(ParseDiagnostic::error(
            p.span,
            format!("`{}` has {n} ports, so {p} does not exist", p.component),
        )),
        _ => {
            if !used.insert((p.component.clone(), p.direction, p.index)) {
                diags.push(ParseDiagnostic::error(p.span, format!("port {p} is {what} more than once")));
            }
        }
    };
    for c in &spec.connections {
        check(&c.from, "used", diags);
        check(&c.to, "used", diags);
    }
    for p in &spec.externals {
        check(p, "connected or listed", diags);
    }
    if !spec.externals.is_empty() {
        for c in &spec.components {
            for i in 0..c.channels() {
                for dir in [Direction::In, Direction::Out] {
                    if !used.contains(&(c.name.clone(), dir, i)) {
                        let p = PortRef { component: c.name.clone(), direction: dir, index: i, span: c.span };
                        let last = spec.externals.last().map(|e| e.span).unwrap_or_default();
                        diags.push(ParseDiagnostic::error(
                            last,
                            format!("unconnected port {p} is missing from the external list"),
                        ));
                    }
                }
            }
        }
    }
}

/// Parses and checks a network description. Every failure carries at least
/// one positioned diagnostic.
pub fn parse(source: &str) -> Result<NetworkSpec, Diagnostics> {
    let toks = lex(source).map_err(|d| Diagnostics(vec![d]))?;
    let mut p = Parser { toks, pos: 0 };
    let mut diags = Vec::new();
    let mut spec = NetworkSpec::default();
    let mut names: HashSet<String> = HashSet::new();
    loop {
        let step = match &p.peek().tok {
            Tok::Eof => break,
            Tok::Ident(s) if s == "component" => p.component(&mut diags).map(|c| {
                if !names.insert(c.name.clone()) {
                    diags.push(ParseDiagnostic::error(c.span, format!("component `{}` declared twice", c.name)));
                }
                spec.components.push(c);
            }),
            Tok::Ident(s) if s == "connect" => p.connection().map(|c| spec.connections.push(c)),
            Tok::Ident(s) if s == "external" => p.externals().map(|e| spec.externals.extend(e)),
            _ => Err(p.unexpected("`component`, `connect` or `external`")),
        };
        if let Err(d) = step {
            diags.push(d);
            return Err(Diagnostics(diags));
        }
    }
    for c in &spec.components {
        check_component(c, &mut diags);
    }
    if diags.is_empty() {
        for c in &spec.components {
            if let Err(e) = build_component(c) {
                diags.push(ParseDiagnostic::error(c.span, format!("component `{}`: {e}", c.name)));
            }
        }
    }
    if diags.is_empty() {
        check_ports(&spec, &mut diags);
    }
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(Diagnostics(diags))
    }
}
