//! Command-line frontend: an expression parser for vector fields, the
//! classification driver, and a deterministic JSON report.
//!
//! Grammar (whitespace insignificant):
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := primary ('^' uint)*
//! primary  := rational | var | dvar | '(' expr ')'
//! rational := uint ('/' uint)?
//! var      := 'x' uint      (1-based)
//! dvar     := 'd' uint      (1-based)
//! ```
//! A leading unary minus is accepted so that every canonically printed
//! derivation parses back. Each parsed expression must denote a derivation:
//! a sum of terms each carrying exactly one `d` symbol (the literal `0` is
//! the zero derivation).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use liederiv::lie::{center, lower_central_series, rank_over_r};
use liederiv::{
    classify, embed_into_triangular, k_linear_reduce, Derivation, LieError, NormalFormTag,
    RatFunc,
};

// ---------------------------------------------------------------------------
// errors and exit codes
// ---------------------------------------------------------------------------

/// A parse failure with its source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// All frontend failures, each mapped to a distinct exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(ParseError),
    Lie(LieError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(e) => write!(f, "{}", e),
            CliError::Lie(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<LieError> for CliError {
    fn from(e: LieError) -> Self {
        CliError::Lie(e)
    }
}

impl CliError {
    /// Stable machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Lie(e) => match e {
                LieError::NotClosed { .. } => "NotClosed",
                LieError::NotNilpotent => "NotNilpotent",
                LieError::RankTooHigh { .. } => "RankTooHigh",
                LieError::NonRationalConstants { .. } => "NonRationalConstants",
                _ => "Internal",
            },
        }
    }

    /// Process exit code: 2 parse, 3 NotClosed, 4 NotNilpotent,
    /// 5 RankTooHigh, 6 NonRationalConstants, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Lie(e) => match e {
                LieError::NotClosed { .. } => 3,
                LieError::NotNilpotent => 4,
                LieError::RankTooHigh { .. } => 5,
                LieError::NonRationalConstants { .. } => 6,
                _ => 1,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Int(BigInt),
    Var(usize),
    DVar(usize),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(&mut i, &mut col),
            '+' => {
                out.push(Spanned { tok: Tok::Plus, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '0'..='9' => {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    advance(&mut i, &mut col);
                }
                out.push(Spanned {
                    tok: Tok::Int(s.parse().unwrap()),
                    line: tl,
                    col: tc,
                });
            }
            'x' | 'd' => {
                let kind = c;
                advance(&mut i, &mut col);
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    advance(&mut i, &mut col);
                }
                if s.is_empty() {
                    return Err(ParseError {
                        line: tl,
                        col: tc,
                        msg: format!("'{}' must be followed by a variable index", kind),
                    });
                }
                let idx: usize = s.parse().map_err(|_| ParseError {
                    line: tl,
                    col: tc,
                    msg: "variable index out of range".into(),
                })?;
                let tok = if kind == 'x' { Tok::Var(idx) } else { Tok::DVar(idx) };
                out.push(Spanned { tok, line: tl, col: tc });
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character '{}'", other),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser over the module R + Der
// ---------------------------------------------------------------------------

/// Intermediate value: a scalar plus a derivation part. Products of two
/// derivation-carrying values are rejected, which enforces exactly one
/// `d` symbol per term.
#[derive(Clone)]
struct Val {
    s: RatFunc,
    d: Derivation,
}

impl Val {
    fn scalar(s: RatFunc, nvars: usize) -> Val {
        Val {
            s,
            d: Derivation::zero(nvars),
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    nvars: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn err_here(&self, msg: &str) -> ParseError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.end_line, self.end_col),
        };
        ParseError {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Val, ParseError> {
        let mut neg = false;
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            neg = true;
        }
        let mut acc = self.term()?;
        if neg {
            acc = Val {
                s: acc.s.neg(),
                d: acc.d.neg(),
            };
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = Val {
                        s: acc.s.add(&t.s),
                        d: acc.d.add(&t.d),
                    };
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = Val {
                        s: acc.s.sub(&t.s),
                        d: acc.d.sub(&t.d),
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Val, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let f = self.factor()?;
            acc = self.mul(acc, f)?;
        }
        Ok(acc)
    }

    fn mul(&mut self, a: Val, b: Val) -> Result<Val, ParseError> {
        match (a.d.is_zero(), b.d.is_zero()) {
            (true, true) => Ok(Val::scalar(a.s.mul(&b.s), self.nvars)),
            (true, false) => {
                if !b.s.is_zero() {
                    return Err(self.err_here("cannot multiply into a mixed scalar + derivation value"));
                }
                Ok(Val {
                    s: RatFunc::zero(self.nvars),
                    d: b.d.scale(&a.s),
                })
            }
            (false, true) => {
                if !a.s.is_zero() {
                    return Err(self.err_here("cannot multiply into a mixed scalar + derivation value"));
                }
                Ok(Val {
                    s: RatFunc::zero(self.nvars),
                    d: a.d.scale(&b.s),
                })
            }
            (false, false) => Err(self.err_here("a term may contain at most one 'd' symbol")),
        }
    }

    fn factor(&mut self) -> Result<Val, ParseError> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exp = match self.bump() {
                Some(Tok::Int(n)) => n,
                _ => {
                    self.pos -= if self.pos > 0 { 1 } else { 0 };
                    return Err(self.err_here("'^' must be followed by a nonnegative integer"));
                }
            };
            if !base.d.is_zero() {
                return Err(self.err_here("cannot raise a derivation to a power"));
            }
            let e: u32 = exp
                .try_into()
                .map_err(|_| self.err_here("exponent out of range"))?;
            base = Val::scalar(base.s.pow(e), self.nvars);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Val, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.bump();
                let mut q = BigRational::from_integer(n);
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Int(den)) if !den.is_zero() => {
                            q /= BigRational::from_integer(den);
                        }
                        Some(Tok::Int(_)) => {
                            return Err(self.err_here("zero denominator"));
                        }
                        _ => {
                            return Err(self.err_here("'/' must be followed by an integer"));
                        }
                    }
                }
                Ok(Val::scalar(RatFunc::constant(self.nvars, q), self.nvars))
            }
            Some(Tok::Var(i)) => {
                self.bump();
                if i == 0 || i > self.nvars {
                    self.pos -= 1;
                    return Err(self.err_here(&format!(
                        "unknown variable x{} (nvars = {})",
                        i, self.nvars
                    )));
                }
                Ok(Val::scalar(RatFunc::var(self.nvars, i - 1), self.nvars))
            }
            Some(Tok::DVar(i)) => {
                self.bump();
                if i == 0 || i > self.nvars {
                    self.pos -= 1;
                    return Err(self.err_here(&format!(
                        "unknown derivation symbol d{} (nvars = {})",
                        i, self.nvars
                    )));
                }
                Ok(Val {
                    s: RatFunc::zero(self.nvars),
                    d: Derivation::partial(self.nvars, i - 1),
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err_here("expected ')'"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.err_here("expected a rational, variable, derivation symbol, or '('")),
        }
    }
}

/// Parse a vector-field expression into an exact `Derivation`.
pub fn parse_vector_field(text: &str, nvars: usize) -> Result<Derivation, ParseError> {
    let toks = lex(text)?;
    let end_line = 1 + text.matches('\n').count();
    let end_col = text
        .rsplit('\n')
        .next()
        .map(|l| l.chars().count() + 1)
        .unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        nvars,
        end_line,
        end_col,
    };
    if p.toks.is_empty() {
        return Err(p.err_here("empty expression"));
    }
    let v = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.err_here("unexpected trailing input"));
    }
    if !v.s.is_zero() {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "expression has a scalar part without a 'd' symbol".into(),
        });
    }
    Ok(v.d)
}

// ---------------------------------------------------------------------------
// the JSON report
// ---------------------------------------------------------------------------

#[derive(Serialize, Debug, Clone)]
pub struct Witnesses {
    pub a: Option<String>,
    pub b: Option<String>,
    #[serde(rename = "D1")]
    pub d1: Option<String>,
    #[serde(rename = "D2")]
    pub d2: Option<String>,
    #[serde(rename = "D3")]
    pub d3: Option<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct NormalFormJson {
    pub tag: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub witnesses: Witnesses,
}

#[derive(Serialize, Debug, Clone)]
pub struct Verified {
    pub brackets: bool,
    pub triangular: bool,
    pub witnesses: bool,
}

#[derive(Serialize, Debug, Clone)]
pub struct Report {
    pub input: Vec<String>,
    pub rank: usize,
    pub nilpotent: bool,
    pub class: usize,
    pub center_dim: usize,
    pub normal_form: NormalFormJson,
    pub embedding: Vec<String>,
    pub verified: Verified,
}

/// Parse the inputs, then run closure, nilpotency, rank, classification, and
/// the verified embedding.
pub fn run_classify(inputs: &[String], nvars: usize) -> Result<Report, CliError> {
    let mut gens = Vec::with_capacity(inputs.len());
    for text in inputs {
        gens.push(parse_vector_field(text, nvars)?);
    }
    let basis = k_linear_reduce(&gens)?;
    let report = classify(&basis)?;
    let emb = embed_into_triangular(&report)?;
    let (n, m) = match report.tag {
        NormalFormTag::Rank2Chain(k) => (Some(k), None),
        NormalFormTag::L1(n) => (Some(n), None),
        NormalFormTag::L2(n, m) => (Some(n), Some(m)),
        _ => (None, None),
    };
    Ok(Report {
        input: inputs.to_vec(),
        rank: report.rank,
        nilpotent: true,
        class: report.class,
        center_dim: report.center_dim,
        normal_form: NormalFormJson {
            tag: report.tag.name().to_string(),
            n,
            m,
            witnesses: Witnesses {
                a: report.a.as_ref().map(|f| f.to_canonical_string()),
                b: report.b.as_ref().map(|f| f.to_canonical_string()),
                d1: report.d1.as_ref().map(|d| d.to_canonical_string()),
                d2: report.d2.as_ref().map(|d| d.to_canonical_string()),
                d3: report.d3.as_ref().map(|d| d.to_canonical_string()),
            },
        },
        embedding: emb.images.iter().map(|d| d.to_canonical_string()).collect(),
        verified: Verified {
            brackets: emb.brackets_ok,
            triangular: emb.triangular_ok,
            witnesses: emb.witnesses_ok,
        },
    })
}

/// Lie bracket of two parsed fields, canonically printed.
pub fn run_bracket(e1: &str, e2: &str, nvars: usize) -> Result<String, CliError> {
    let a = parse_vector_field(e1, nvars)?;
    let b = parse_vector_field(e2, nvars)?;
    Ok(a.bracket(&b).to_canonical_string())
}

/// Rank over the rational-function field of the parsed generators.
pub fn run_rank(inputs: &[String], nvars: usize) -> Result<usize, CliError> {
    let mut gens = Vec::with_capacity(inputs.len());
    for text in inputs {
        gens.push(parse_vector_field(text, nvars)?);
    }
    let basis = k_linear_reduce(&gens)?;
    Ok(rank_over_r(&basis))
}

/// Basis of the center, canonically printed.
pub fn run_center(inputs: &[String], nvars: usize) -> Result<Vec<String>, CliError> {
    let mut gens = Vec::with_capacity(inputs.len());
    for text in inputs {
        gens.push(parse_vector_field(text, nvars)?);
    }
    let basis = k_linear_reduce(&gens)?;
    let z = center(&basis)?;
    Ok(z.ders().iter().map(|d| d.to_canonical_string()).collect())
}

/// Nilpotency of the parsed algebra: (nilpotent, class).
pub fn run_nilpotency(inputs: &[String], nvars: usize) -> Result<(bool, usize), CliError> {
    let mut gens = Vec::with_capacity(inputs.len());
    for text in inputs {
        gens.push(parse_vector_field(text, nvars)?);
    }
    let basis = k_linear_reduce(&gens)?;
    let series = lower_central_series(&basis)?;
    Ok((series.nilpotent, series.class))
}
