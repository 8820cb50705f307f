//! Parse tree for `.wd` files. Every node carries a [`SourceSpan`]; spans are
//! ignored by `==`, so equality is structural.

use super::span::SourceSpan;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModelFile {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Box(BoxDecl),
    System(SystemDecl),
    Diagram(DiagramDecl),
    Implement(ImplementDecl),
    Directive(Directive),
}

impl Decl {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Decl::Box(d) => &d.span,
            Decl::System(d) => &d.span,
            Decl::Diagram(d) => &d.span,
            Decl::Implement(d) => &d.span,
            Decl::Directive(d) => d.span(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            span: SourceSpan::synthetic(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortDecl {
    pub direction: Direction,
    pub name: Ident,
    pub dim: usize,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDecl {
    pub name: Ident,
    pub ports: Vec<PortDecl>,
    pub span: SourceSpan,
}

/// Row-major literal. `[]` has no rows; `[[], []]` has two empty rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLit {
    pub rows: Vec<Vec<f64>>,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixName {
    A,
    B,
    C,
    D,
}

impl MatrixName {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixName::A => "A",
            MatrixName::B => "B",
            MatrixName::C => "C",
            MatrixName::D => "D",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixAssign {
    pub name: MatrixName,
    pub value: MatrixLit,
    pub span: SourceSpan,
}

/// `diagram(arg, ...)`: the diagram applied to the laxator of the arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct Application {
    pub diagram: Ident,
    pub args: Vec<Ident>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemBody {
    /// `on BOX { state n; A = ...; ... }`. Omitted matrices are zero.
    Literal {
        on: Ident,
        state: usize,
        state_span: SourceSpan,
        matrices: Vec<MatrixAssign>,
    },
    /// `= diagram(sys, ...)`.
    Composite(Application),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemDecl {
    pub name: Ident,
    pub body: SystemBody,
    pub span: SourceSpan,
}

/// `BOX.port`
#[derive(Clone, Debug, PartialEq)]
pub struct PortRef {
    pub boxname: Ident,
    pub port: Ident,
}

impl PortRef {
    pub fn new(boxname: &str, port: &str) -> Self {
        PortRef {
            boxname: Ident::new(boxname),
            port: Ident::new(port),
        }
    }

    pub fn span(&self) -> SourceSpan {
        self.boxname.span.to(&self.port.span)
    }

    pub fn qualified(&self) -> String {
        format!("{}.{}", self.boxname.name, self.port.name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiagramItem {
    Wire {
        src: PortRef,
        dst: PortRef,
        span: SourceSpan,
    },
    Map {
        dst: PortRef,
        value: MatrixLit,
        span: SourceSpan,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramDecl {
    pub name: Ident,
    /// Inner boxes; `()` is the empty tensor.
    pub domain: Vec<Ident>,
    pub codomain: Vec<Ident>,
    pub items: Vec<DiagramItem>,
    pub span: SourceSpan,
}

/// `child BOX by DIAGRAM [{ ... }]`
#[derive(Clone, Debug, PartialEq)]
pub struct ChildDecl {
    pub boxname: Ident,
    pub diagram: Ident,
    pub children: Vec<ChildDecl>,
    pub span: SourceSpan,
}

/// `implement BOX by DIAGRAM { child ...; }`. Factors without a `child`
/// line stay closed.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplementDecl {
    pub root: Ident,
    pub diagram: Ident,
    pub children: Vec<ChildDecl>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimTarget {
    System(Ident),
    Composite(Application),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Directive {
    Simulate {
        target: SimTarget,
        steps: usize,
        init: Option<Vec<f64>>,
        /// Held constant over every step.
        input: Option<Vec<f64>>,
        span: SourceSpan,
    },
    Check {
        application: Application,
        target: Ident,
        tol: Option<f64>,
        span: SourceSpan,
    },
    Solve {
        system: Ident,
        partition: Vec<usize>,
        tol: Option<f64>,
        span: SourceSpan,
    },
}

impl Directive {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Directive::Simulate { span, .. } | Directive::Check { span, .. } | Directive::Solve { span, .. } => span,
        }
    }
}
