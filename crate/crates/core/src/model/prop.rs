use std::collections::BTreeSet;

/// A propositional formula over named propositions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    True,
    False,
    Var(String),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn var(name: &str) -> Self {
        PropFormula::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: PropFormula) -> Self {
        PropFormula::Not(Box::new(a))
    }

    pub fn and(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            PropFormula::Var(v) => {
                out.insert(v.clone());
            }
            PropFormula::Not(a) => a.collect(out),
            PropFormula::And(a, b) | PropFormula::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            _ => {}
        }
    }

    pub fn eval(&self, truth: &dyn Fn(&str) -> bool) -> bool {
        match self {
            PropFormula::True => true,
            PropFormula::False => false,
            PropFormula::Var(v) => truth(v),
            PropFormula::Not(a) => !a.eval(truth),
            PropFormula::And(a, b) => a.eval(truth) && b.eval(truth),
            PropFormula::Or(a, b) => a.eval(truth) || b.eval(truth),
        }
    }
}

impl std::fmt::Display for PropFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn go(p: &PropFormula, ctx: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            let prec = match p {
                PropFormula::Or(..) => 1,
                PropFormula::And(..) => 2,
                _ => 3,
            };
            if prec < ctx {
                write!(f, "(")?;
            }
            match p {
                PropFormula::True => write!(f, "true")?,
                PropFormula::False => write!(f, "false")?,
                PropFormula::Var(v) => write!(f, "{v}")?,
                PropFormula::Not(a) => {
                    write!(f, "!")?;
                    go(a, 3, f)?
                }
                PropFormula::And(a, b) => {
                    go(a, 2, f)?;
                    write!(f, " & ")?;
                    go(b, 3, f)?
                }
                PropFormula::Or(a, b) => {
                    go(a, 1, f)?;
                    write!(f, " | ")?;
                    go(b, 2, f)?
                }
            }
            if prec < ctx {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}
