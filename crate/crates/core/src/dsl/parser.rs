use super::ast::*;
use super::lexer::{Tok, Token};
use super::span::{Diagnostic, SourceSpan};

const TOP_LEVEL: [&str; 7] = ["box", "system", "diagram", "implement", "simulate", "check", "solve"];

/// Largest dimension, step count or state size accepted from source text.
const MAX_COUNT: f64 = 1e7;

type PResult<T> = Result<T, Diagnostic>;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            pos: 0,
            depth: 0,
            diags: Vec::new(),
        }
    }

    pub fn parse_file(mut self) -> (ModelFile, Vec<Diagnostic>) {
        let mut decls = Vec::new();
        while !self.at_eof() {
            let start = self.pos;
            self.depth = 0;
            match self.decl() {
                Ok(d) => decls.push(d),
                Err(e) => {
                    self.diags.push(e);
                    self.recover(start);
                }
            }
        }
        (ModelFile { decls }, self.diags)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        match t.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            Tok::Eof => return t,
            _ => {}
        }
        self.pos += 1;
        t
    }

    /// Skips to the next `;` or closing `}` at top level, or to the next
    /// top-level keyword, always making progress.
    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.advance();
        }
        loop {
            if self.at_eof() {
                return;
            }
            if self.depth == 0 && TOP_LEVEL.iter().any(|k| self.at_keyword(k)) {
                return;
            }
            let t = self.advance();
            if self.depth == 0 && matches!(t.tok, Tok::Semi | Tok::RBrace) {
                return;
            }
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(t.span.clone(), format!("expected {wanted}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.peek().tok == tok {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{}`", tok.symbol())))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match self.peek().tok {
            Tok::Number(x) => {
                self.advance();
                Ok(x)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn count(&mut self, what: &str) -> PResult<(usize, SourceSpan)> {
        match self.peek().tok {
            Tok::Number(x) => {
                if x < 0.0 || x.fract() != 0.0 || x > MAX_COUNT {
                    return Err(Diagnostic::error(
                        self.peek().span.clone(),
                        format!("{what} must be a non-negative integer, found `{x}`"),
                    ));
                }
                let span = self.advance().span;
                Ok((x as usize, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let kw = match &self.peek().tok {
            Tok::Ident(s) if TOP_LEVEL.contains(&s.as_str()) => s.clone(),
            _ => {
                return Err(self.unexpected(
                    "a declaration (`box`, `system`, `diagram`, `implement`, `simulate`, `check` or `solve`)",
                ))
            }
        };
        let span = self.advance().span;
        match kw.as_str() {
            "box" => self.box_decl(span).map(Decl::Box),
            "system" => self.system_decl(span).map(Decl::System),
            "diagram" => self.diagram_decl(span).map(Decl::Diagram),
            "implement" => self.implement_decl(span).map(Decl::Implement),
            "simulate" => self.simulate(span).map(Decl::Directive),
            "check" => self.check(span).map(Decl::Directive),
            _ => self.solve(span).map(Decl::Directive),
        }
    }

    /// `{ item sep item sep ... }` where each item ends in `;` (optional
    /// before the closing brace).
    fn semi_block<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        loop {
            if self.eat(Tok::RBrace) {
                return Ok(items);
            }
            items.push(item(self)?);
            if !self.eat(Tok::Semi) && self.peek().tok != Tok::RBrace {
                return Err(self.unexpected("`;` or `}`"));
            }
        }
    }

    fn box_decl(&mut self, span: SourceSpan) -> PResult<BoxDecl> {
        let name = self.ident("a box name")?;
        let ports = self.semi_block(|p| {
            let start = p.peek().span.clone();
            let direction = if p.at_keyword("in") {
                Direction::In
            } else if p.at_keyword("out") {
                Direction::Out
            } else {
                return Err(p.unexpected("`in` or `out`"));
            };
            p.advance();
            let name = p.ident("a port name")?;
            p.expect(Tok::Colon)?;
            let dim = p.port_type()?;
            Ok(PortDecl {
                direction,
                name,
                dim,
                span: start,
            })
        })?;
        Ok(BoxDecl { name, ports, span })
    }

    /// `R` or `R^n`.
    fn port_type(&mut self) -> PResult<usize> {
        if !self.at_keyword("R") {
            return Err(self.unexpected("a port type `R` or `R^n`"));
        }
        self.advance();
        if self.eat(Tok::Caret) {
            let (n, span) = self.count("dimension")?;
            if n == 0 {
                return Err(Diagnostic::error(span, "port dimension must be at least 1"));
            }
            Ok(n)
        } else {
            Ok(1)
        }
    }

    fn application(&mut self) -> PResult<Application> {
        let diagram = self.ident("a diagram name")?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.eat(Tok::RParen) {
            loop {
                args.push(self.ident("a system name")?);
                if self.eat(Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let span = diagram.span.clone();
        Ok(Application { diagram, args, span })
    }

    fn system_decl(&mut self, span: SourceSpan) -> PResult<SystemDecl> {
        let name = self.ident("a system name")?;
        if self.eat(Tok::Eq) {
            let app = self.application()?;
            self.expect(Tok::Semi)?;
            return Ok(SystemDecl {
                name,
                body: SystemBody::Composite(app),
                span,
            });
        }
        self.keyword("on")?;
        let on = self.ident("a box name")?;
        self.expect(Tok::LBrace)?;
        self.keyword("state")?;
        let (state, state_span) = self.count("state dimension")?;
        let mut matrices = Vec::new();
        loop {
            if self.eat(Tok::RBrace) {
                break;
            }
            if !self.eat(Tok::Semi) {
                return Err(self.unexpected("`;` or `}`"));
            }
            if self.eat(Tok::RBrace) {
                break;
            }
            let start = self.peek().span.clone();
            let which = match &self.peek().tok {
                Tok::Ident(s) if s == "A" => MatrixName::A,
                Tok::Ident(s) if s == "B" => MatrixName::B,
                Tok::Ident(s) if s == "C" => MatrixName::C,
                Tok::Ident(s) if s == "D" => MatrixName::D,
                _ => return Err(self.unexpected("a matrix assignment `A`, `B`, `C` or `D`")),
            };
            self.advance();
            self.expect(Tok::Eq)?;
            let value = if which == MatrixName::D && self.at_keyword("zero") {
                let span = self.advance().span;
                MatrixLit { rows: Vec::new(), span }
            } else {
                self.matrix()?
            };
            matrices.push(MatrixAssign {
                name: which,
                value,
                span: start,
            });
        }
        Ok(SystemDecl {
            name,
            body: SystemBody::Literal {
                on,
                state,
                state_span,
                matrices,
            },
            span,
        })
    }

    fn vector(&mut self) -> PResult<Vec<f64>> {
        self.expect(Tok::LBracket)?;
        let mut v = Vec::new();
        if self.eat(Tok::RBracket) {
            return Ok(v);
        }
        loop {
            v.push(self.number()?);
            if self.eat(Tok::RBracket) {
                return Ok(v);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn matrix(&mut self) -> PResult<MatrixLit> {
        let span = self.expect(Tok::LBracket)?;
        let mut rows = Vec::new();
        if !self.eat(Tok::RBracket) {
            loop {
                if self.peek().tok != Tok::LBracket {
                    return Err(self.unexpected("`[` starting a matrix row"));
                }
                rows.push(self.vector()?);
                if self.eat(Tok::RBracket) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(MatrixLit { rows, span })
    }

    fn tensor(&mut self) -> PResult<Vec<Ident>> {
        if self.peek().tok == Tok::LParen {
            self.advance();
            self.expect(Tok::RParen)?;
            return Ok(Vec::new());
        }
        let mut list = vec![self.ident("a box name or `()`")?];
        while self.eat(Tok::Tensor) {
            list.push(self.ident("a box name")?);
        }
        Ok(list)
    }

    fn port_ref(&mut self) -> PResult<PortRef> {
        let boxname = self.ident("a port reference `BOX.port`")?;
        self.expect(Tok::Dot)?;
        let port = self.ident("a port name")?;
        Ok(PortRef { boxname, port })
    }

    fn diagram_decl(&mut self, span: SourceSpan) -> PResult<DiagramDecl> {
        let name = self.ident("a diagram name")?;
        self.expect(Tok::Colon)?;
        let domain = self.tensor()?;
        self.expect(Tok::Arrow)?;
        let codomain = self.tensor()?;
        let items = self.semi_block(|p| {
            let start = p.peek().span.clone();
            if p.at_keyword("wire") {
                p.advance();
                let src = p.port_ref()?;
                p.expect(Tok::Arrow)?;
                let dst = p.port_ref()?;
                Ok(DiagramItem::Wire { src, dst, span: start })
            } else if p.at_keyword("map") {
                p.advance();
                let dst = p.port_ref()?;
                p.expect(Tok::LeftArrow)?;
                let value = p.matrix()?;
                Ok(DiagramItem::Map {
                    dst,
                    value,
                    span: start,
                })
            } else {
                Err(p.unexpected("`wire` or `map`"))
            }
        })?;
        Ok(DiagramDecl {
            name,
            domain,
            codomain,
            items,
            span,
        })
    }

    fn children(&mut self) -> PResult<Vec<ChildDecl>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(Tok::RBrace) {
            let span = self.keyword("child")?;
            let boxname = self.ident("a box name")?;
            self.keyword("by")?;
            let diagram = self.ident("a diagram name")?;
            let children = if self.peek().tok == Tok::LBrace {
                let c = self.children()?;
                self.eat(Tok::Semi);
                c
            } else {
                if self.peek().tok != Tok::RBrace {
                    self.expect(Tok::Semi)?;
                }
                Vec::new()
            };
            out.push(ChildDecl {
                boxname,
                diagram,
                children,
                span,
            });
        }
        Ok(out)
    }

    fn implement_decl(&mut self, span: SourceSpan) -> PResult<ImplementDecl> {
        let root = self.ident("a box name")?;
        self.keyword("by")?;
        let diagram = self.ident("a diagram name")?;
        let children = if self.peek().tok == Tok::LBrace {
            self.children()?
        } else {
            self.expect(Tok::Semi)?;
            Vec::new()
        };
        Ok(ImplementDecl {
            root,
            diagram,
            children,
            span,
        })
    }

    fn tol(&mut self) -> PResult<Option<f64>> {
        if !self.at_keyword("tol") {
            return Ok(None);
        }
        self.advance();
        let span = self.peek().span.clone();
        let t = self.number()?;
        if t <= 0.0 {
            return Err(Diagnostic::error(span, "tolerance must be positive"));
        }
        Ok(Some(t))
    }

    fn simulate(&mut self, span: SourceSpan) -> PResult<Directive> {
        let name = self.ident("a system name or `diagram(systems...)`")?;
        let target = if self.peek().tok == Tok::LParen {
            self.pos -= 1;
            SimTarget::Composite(self.application()?)
        } else {
            SimTarget::System(name)
        };
        self.keyword("steps")?;
        let (steps, _) = self.count("step count")?;
        let mut init = None;
        let mut input = None;
        loop {
            if self.at_keyword("init") && init.is_none() {
                self.advance();
                init = Some(self.vector()?);
            } else if self.at_keyword("input") && input.is_none() {
                self.advance();
                input = Some(self.vector()?);
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        Ok(Directive::Simulate {
            target,
            steps,
            init,
            input,
            span,
        })
    }

    fn check(&mut self, span: SourceSpan) -> PResult<Directive> {
        let application = self.application()?;
        self.keyword("against")?;
        let target = self.ident("a target system name")?;
        let tol = self.tol()?;
        self.expect(Tok::Semi)?;
        Ok(Directive::Check {
            application,
            target,
            tol,
            span,
        })
    }

    fn solve(&mut self, span: SourceSpan) -> PResult<Directive> {
        let system = self.ident("a system name")?;
        self.keyword("partition")?;
        self.expect(Tok::LParen)?;
        let mut partition = Vec::new();
        loop {
            partition.push(self.count("state-block size")?.0);
            if self.eat(Tok::RParen) {
                break;
            }
            self.expect(Tok::Comma)?;
        }
        let tol = self.tol()?;
        self.expect(Tok::Semi)?;
        Ok(Directive::Solve {
            system,
            partition,
            tol,
            span,
        })
    }
}
