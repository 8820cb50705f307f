use std::fmt;
use std::sync::Arc;

/// A location in a source file. Line and column are 1-based and count
/// characters, not bytes; `length` is in characters too.
///
/// Spans never take part in structural equality: two parse trees that differ
/// only in where their nodes came from compare equal.
#[derive(Clone, Debug, Default, Eq)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            file,
            line,
            column,
            length,
        }
    }

    /// Span for programmatically built nodes.
    pub fn synthetic() -> Self {
        SourceSpan::default()
    }

    /// Covers `self` through `end` when both sit on the same line; otherwise
    /// keeps `self`, which is where diagnostics should point anyway.
    pub fn to(&self, end: &SourceSpan) -> SourceSpan {
        if end.line == self.line && end.column >= self.column {
            SourceSpan {
                length: end.column + end.length.max(1) - self.column,
                ..self.clone()
            }
        } else {
            self.clone()
        }
    }
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}: {}", self.span, label, self.message)
    }
}

/// A non-empty batch of diagnostics, at least one of them an error.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Renders a diagnostic with the offending source line and a caret marker.
pub fn render(d: &Diagnostic, text: &str) -> String {
    let mut out = d.to_string();
    if let Some(line) = text.lines().nth(d.span.line.wrapping_sub(1)) {
        let pad: String = line
            .chars()
            .take(d.span.column.saturating_sub(1))
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        out.push_str(&format!("\n  {line}\n  {pad}{}", "^".repeat(d.span.length.max(1))));
    }
    out
}
