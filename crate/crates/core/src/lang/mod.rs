//! The probabilistic language with the graph interface: syntax, concrete
//! grammar, type inference, and a few program generators.

mod parse;
mod pretty;
mod syntax;
mod typing;

pub use parse::{parse, parse_type, parse_value, submatrix, ParseError, Pos};
pub use syntax::{fresh_name, Constant, Context, Env, Name, Term, Type, Value};
pub use typing::{check, elaborate, typecheck, Elaboration, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("type `{0}` mentions vertex and has no finite enumeration")]
    NotNumeral(Type),
}

/// Parses and typechecks a closed program.
pub fn load_program(src: &str) -> Result<(Term, Type), LangError> {
    let t = parse(src)?;
    let ty = typecheck(&Context::empty(), &t)?;
    Ok((t, ty))
}

/// The program binding `n` fresh vertices and returning the `n`×`n` matrix of
/// their edge queries, row-major.
pub fn gen_t_n(n: usize) -> Term {
    let order: Vec<usize> = (0..n).collect();
    gen_t_n_permuted(n, &order)
}

/// Same matrix as [`gen_t_n`], but the vertices are allocated in the order
/// `alloc_order[0], alloc_order[1], ...` (0-based vertex labels).
pub fn gen_t_n_permuted(n: usize, alloc_order: &[usize]) -> Term {
    assert!(n >= 1, "t_n needs at least one vertex");
    assert_eq!(alloc_order.len(), n, "allocation order must list every vertex");
    let name = |i: usize| format!("x{}", i + 1);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Term::edge(Term::var(&name(i)), Term::var(&name(j))))
                .collect()
        })
        .collect();
    alloc_order
        .iter()
        .rev()
        .fold(Term::matrix(rows), |body, &i| {
            Term::let_in(&name(i), Term::new_vertex(), body)
        })
}

/// All inhabitants of a vertex-free type, in canonical order.
pub fn enumerate_inhabitants(ty: &Type) -> Result<Vec<Value>, LangError> {
    if ty.mentions_vertex() {
        return Err(LangError::NotNumeral(ty.clone()));
    }
    Ok(enumerate_with_vertices(ty, 0))
}

/// Inhabitants when `vertex` denotes `{0, ..., vertices - 1}`.
pub fn enumerate_with_vertices(ty: &Type, vertices: u32) -> Vec<Value> {
    match ty {
        Type::Unit => vec![Value::Unit],
        Type::Empty => Vec::new(),
        Type::Vertex => (0..vertices).map(Value::Vertex).collect(),
        Type::Prod(a, b) => {
            let right = enumerate_with_vertices(b, vertices);
            enumerate_with_vertices(a, vertices)
                .into_iter()
                .flat_map(|x| right.iter().map(move |y| Value::pair(x.clone(), y.clone())))
                .collect()
        }
        Type::Sum(a, b) => enumerate_with_vertices(a, vertices)
            .into_iter()
            .map(|x| Value::Inl(Box::new(x)))
            .chain(
                enumerate_with_vertices(b, vertices)
                    .into_iter()
                    .map(|y| Value::Inr(Box::new(y))),
            )
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_1_is_a_single_self_query() {
        let expected = Term::let_in(
            "x1",
            Term::new_vertex(),
            Term::edge(Term::var("x1"), Term::var("x1")),
        );
        assert_eq!(gen_t_n(1), expected);
        assert_eq!(typecheck(&Context::empty(), &gen_t_n(1)).unwrap(), Type::bool());
    }

    #[test]
    fn t_2_has_four_queries() {
        let t = gen_t_n(2);
        let mut edges = 0;
        t.visit(&mut |s| {
            if matches!(s, Term::App(Constant::Edge, _)) {
                edges += 1;
            }
        });
        assert_eq!(edges, 4);
        assert_eq!(
            parse("let x1 = new() in let x2 = new() in \
                   [[edge(x1,x1), edge(x1,x2)], [edge(x2,x1), edge(x2,x2)]]")
            .unwrap(),
            t
        );
    }

    #[test]
    fn t_3_has_type_bool_to_the_ninth() {
        let ty = typecheck(&Context::empty(), &gen_t_n(3)).unwrap();
        let row = Type::power(&Type::bool(), 3);
        assert_eq!(ty, Type::power(&row, 3));
        assert_eq!(ty.numeral_size(), Some(512));
    }

    #[test]
    fn permuted_allocation_changes_only_the_binding_order() {
        let t = gen_t_n_permuted(2, &[1, 0]);
        match &t {
            Term::Let(x, _, body) => {
                assert_eq!(x, "x2");
                assert!(matches!(body.as_ref(), Term::Let(y, _, _) if y == "x1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inhabitants_in_canonical_order() {
        assert_eq!(enumerate_inhabitants(&Type::Unit).unwrap(), vec![Value::Unit]);
        assert_eq!(
            enumerate_inhabitants(&Type::bool()).unwrap(),
            vec![Value::bool(true), Value::bool(false)]
        );
        let bb = enumerate_inhabitants(&Type::prod(Type::bool(), Type::bool())).unwrap();
        let expect: Vec<Value> = [(true, true), (true, false), (false, true), (false, false)]
            .iter()
            .map(|&(a, b)| Value::pair(Value::bool(a), Value::bool(b)))
            .collect();
        assert_eq!(bb, expect);
        assert!(enumerate_inhabitants(&Type::Vertex).is_err());
    }

    #[test]
    fn enumeration_is_sorted() {
        let ty = parse_type("(bool + unit) * (unit + bool * bool)").unwrap();
        let vs = enumerate_inhabitants(&ty).unwrap();
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(vs.len(), ty.numeral_size().unwrap());
    }
}
