use super::{CompareOp, ComparePredicate, Conjunct, Dnf};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::schema::ClassSchema;
use crate::value::{Value, ValueKind};

/// `dnf := conj (OR conj)*`, `conj := atom (AND atom)*`,
/// `atom := TRUE | FALSE | <attr> <op> <literal>`.
pub(crate) fn parse_dnf(cur: &mut Cursor, schema: &ClassSchema) -> Result<Dnf> {
    let mut conjuncts = Vec::new();
    loop {
        if let Some(c) = parse_conj(cur, schema)? {
            conjuncts.push(c);
        }
        if !cur.eat_keyword("or") {
            break;
        }
    }
    Ok(Dnf::from_conjuncts(conjuncts))
}

fn parse_conj(cur: &mut Cursor, schema: &ClassSchema) -> Result<Option<Conjunct>> {
    let mut atoms = Vec::new();
    let mut contradiction = false;
    loop {
        if cur.eat_keyword("true") {
        } else if cur.eat_keyword("false") {
            contradiction = true;
        } else {
            atoms.push(parse_atom(cur, schema)?);
        }
        if !cur.eat_keyword("and") {
            break;
        }
    }
    if contradiction {
        return Ok(None);
    }
    Conjunct::normalize(&atoms, schema)
}

fn parse_atom(cur: &mut Cursor, schema: &ClassSchema) -> Result<ComparePredicate> {
    let (line, column) = cur.position();
    let attribute = cur.name(false)?;
    let kind = schema.kind_of(&attribute)?;
    let op = match cur.next().map(|t| t.tok) {
        Some(Tok::Sym(s)) => CompareOp::from_symbol(s),
        _ => None,
    }
    .ok_or_else(|| crate::error::ParseError::new(line, column, "expected a comparison operator after the attribute"))?;

    let mismatch = |found: ValueKind| Error::KindMismatch {
        attribute: attribute.clone(),
        expected: kind.name(),
        found: found.name(),
    };
    let err = cur.error("expected a literal");
    let (lit_line, lit_col) = cur.position();
    let bad_literal = |text: &str| crate::error::ParseError::new(lit_line, lit_col, format!("invalid {kind} literal `{text}`"));
    let constant = match cur.next().map(|t| t.tok) {
        Some(Tok::Number(n)) => match kind {
            ValueKind::Integer | ValueKind::Decimal => Value::parse(kind, &n).ok_or_else(|| bad_literal(&n))?,
            _ => {
                let found = if n.contains('.') { ValueKind::Decimal } else { ValueKind::Integer };
                return Err(mismatch(found));
            }
        },
        Some(Tok::Date(d)) => match kind {
            ValueKind::Date => Value::parse(kind, &d).ok_or_else(|| bad_literal(&d))?,
            _ => return Err(mismatch(ValueKind::Date)),
        },
        Some(Tok::Single(s)) => match kind {
            ValueKind::Text => Value::Text(s),
            ValueKind::Date => Value::parse(kind, &s).ok_or_else(|| bad_literal(&s))?,
            _ => return Err(mismatch(ValueKind::Text)),
        },
        _ => return Err(err.into()),
    };
    Ok(ComparePredicate {
        attribute,
        op,
        constant,
    })
}

impl Dnf {
    /// Parses predicate text against a class schema.
    pub fn parse(text: &str, schema: &ClassSchema) -> Result<Dnf> {
        let mut cur = Cursor::new(text)?;
        let dnf = parse_dnf(&mut cur, schema)?;
        if !cur.at_end() {
            return Err(cur.error("unexpected trailing input").into());
        }
        Ok(dnf)
    }
}
