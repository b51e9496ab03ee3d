use crate::error::{Error, Result};
use crate::model::{Atom, Formula, Term, Vocabulary};

/// The atoms of a vocabulary in index order.
pub fn atoms_of(vocab: &Vocabulary) -> Vec<Atom> {
    vocab.atoms().collect()
}

/// Truth value of a quantifier-free, proportion-free unary formula when each
/// term is sent to an atom by `atom_of`. Term equality is decided by `same`.
pub fn eval_unary_qf(
    f: &Formula,
    vocab: &Vocabulary,
    atom_of: &dyn Fn(&Term) -> Result<usize>,
    same: &dyn Fn(&Term, &Term) -> Result<bool>,
) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { pred, args } => {
            let i = vocab.predicate_index(pred).filter(|_| args.len() == 1);
            let Some(i) = i else { return Err(Error::NonUnary(pred.clone())) };
            vocab.atom(atom_of(&args[0])?).holds(i)
        }
        Formula::Eq(a, b) => same(a, b)?,
        Formula::Not(a) => !eval_unary_qf(a, vocab, atom_of, same)?,
        Formula::And(a, b) => eval_unary_qf(a, vocab, atom_of, same)? && eval_unary_qf(b, vocab, atom_of, same)?,
        Formula::Or(a, b) => eval_unary_qf(a, vocab, atom_of, same)? || eval_unary_qf(b, vocab, atom_of, same)?,
        Formula::Implies(a, b) => !eval_unary_qf(a, vocab, atom_of, same)? || eval_unary_qf(b, vocab, atom_of, same)?,
        Formula::Exists(..) | Formula::Forall(..) | Formula::Compare { .. } => {
            return Err(Error::NotPropositional("quantifier or proportion inside".into()))
        }
    })
}

/// Checks that `xi` is essentially propositional: quantifier-free,
/// proportion-free, constant-free, unary, and with at most one free variable.
pub fn check_essentially_propositional(xi: &Formula) -> Result<Option<String>> {
    if xi.has_quantifiers() || xi.has_proportions() {
        return Err(Error::NotPropositional("contains a quantifier or proportion".into()));
    }
    if let Some(c) = xi.constants().into_iter().next() {
        return Err(Error::NotPropositional(format!("mentions constant `{c}`")));
    }
    if let Some(r) = xi.relation_symbols().into_iter().next() {
        return Err(Error::NonUnary(r));
    }
    let free = xi.free_vars();
    if free.len() > 1 {
        return Err(Error::NotPropositional(format!("{} free variables", free.len())));
    }
    Ok(free.into_iter().next())
}

/// Indices (0-based) of the atoms `A` with `xi` equivalent to the disjunction
/// of the `A(x)`.
pub fn atom_indices(xi: &Formula, vocab: &Vocabulary) -> Result<Vec<usize>> {
    check_essentially_propositional(xi)?;
    let mut out = Vec::new();
    for j in 0..vocab.num_atoms() {
        if eval_unary_qf(xi, vocab, &|_| Ok(j), &|a, b| Ok(a == b))? {
            out.push(j);
        }
    }
    Ok(out)
}

/// The set of atoms of an essentially propositional formula.
pub fn atom_set(xi: &Formula, vocab: &Vocabulary) -> Result<Vec<Atom>> {
    Ok(atom_indices(xi, vocab)?.into_iter().map(|j| vocab.atom(j)).collect())
}

/// The atom `A_j` written as a conjunction of literals about `t`.
pub fn atom_formula(vocab: &Vocabulary, j: usize, t: &Term) -> Formula {
    let atom = vocab.atom(j);
    Formula::conj(vocab.predicates().iter().enumerate().map(|(i, p)| {
        let lit = Formula::unary(p, t.clone());
        if atom.holds(i) {
            lit
        } else {
            Formula::not(lit)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(p: &str) -> Formula {
        Formula::unary(p, Term::var("x"))
    }

    #[test]
    fn disjunction_of_two_predicates() {
        let v = Vocabulary::unary(["P1", "P2"]).unwrap();
        let set = atom_indices(&Formula::or(px("P1"), px("P2")), &v).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn trivial_cases() {
        let v = Vocabulary::unary(["P1", "P2"]).unwrap();
        assert_eq!(atom_indices(&Formula::True, &v).unwrap().len(), 4);
        let contradiction = Formula::and(px("P1"), Formula::not(px("P1")));
        assert!(atom_indices(&contradiction, &v).unwrap().is_empty());
    }

    #[test]
    fn rejects_constants_and_quantifiers() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        assert!(atom_indices(&Formula::unary("P", Term::constant("c")), &v).is_err());
        assert!(atom_indices(&Formula::exists("x", px("P")), &v).is_err());
    }

    #[test]
    fn atom_formula_selects_its_atom() {
        let v = Vocabulary::unary(["P1", "P2", "P3"]).unwrap();
        for j in 0..8 {
            let f = atom_formula(&v, j, &Term::var("x"));
            assert_eq!(atom_indices(&f, &v).unwrap(), vec![j]);
        }
    }
}
