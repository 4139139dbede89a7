//! Prenex formulas, quantifier elimination and decision.

mod parse;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cylinder::{build_tree, DecodeError, Tree};
use crate::elim::{elim_chain, ElimChain, ElimConfig, ElimError, ElimLevel};
use crate::poly::{MPoly, ParseError};
use crate::sign::{Sign, SignCondition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    /// Whether `p rel 0` holds when `p` has sign `s`.
    pub fn holds(self, s: Sign) -> bool {
        match self {
            Relation::Eq => s == Sign::Zero,
            Relation::Ne => s != Sign::Zero,
            Relation::Lt => s == Sign::Neg,
            Relation::Le => s != Sign::Pos,
            Relation::Gt => s == Sign::Pos,
            Relation::Ge => s != Sign::Neg,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }

    /// The relation `p rel 0` expressing `sign(p) = s`.
    pub fn for_sign(s: Sign) -> Relation {
        match s {
            Sign::Neg => Relation::Lt,
            Sign::Zero => Relation::Eq,
            Sign::Pos => Relation::Gt,
        }
    }
}

/// `poly rel 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub poly: MPoly,
    pub rel: Relation,
}

/// Quantifier-free formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qf {
    True,
    False,
    Atom(Atom),
    Not(Box<Qf>),
    And(Box<Qf>, Box<Qf>),
    Or(Box<Qf>, Box<Qf>),
}

impl Qf {
    /// Evaluates under a sign assignment. Constant polynomials are read off
    /// directly; `None` if `signs` has no answer for some other polynomial.
    pub fn eval(&self, signs: &dyn Fn(&MPoly) -> Option<Sign>) -> Option<bool> {
        Some(match self {
            Qf::True => true,
            Qf::False => false,
            Qf::Atom(a) => {
                let s = match a.poly.constant_sign() {
                    Some(s) => s,
                    None => signs(&a.poly)?,
                };
                a.rel.holds(s)
            }
            Qf::Not(q) => !q.eval(signs)?,
            Qf::And(a, b) => a.eval(signs)? && b.eval(signs)?,
            Qf::Or(a, b) => a.eval(signs)? || b.eval(signs)?,
        })
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Qf::True | Qf::False => {}
            Qf::Atom(a) => out.push(a),
            Qf::Not(q) => q.collect_atoms(out),
            Qf::And(a, b) | Qf::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for Qf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qf::True => write!(f, "true"),
            Qf::False => write!(f, "false"),
            Qf::Atom(a) => write!(f, "{} {} 0", a.poly, a.rel.symbol()),
            Qf::Not(q) => write!(f, "~({q})"),
            Qf::And(a, b) => write!(f, "({a} /\\ {b})"),
            Qf::Or(a, b) => write!(f, "({a} \\/ {b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{line}:{column}: {message}")]
    Shape {
        line: usize,
        column: usize,
        message: String,
    },
}

/// `Qu_{i+1} x_{i+1} ... Qu_k x_k. matrix` with free variables `x1..x_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    /// Number `i` of free variables.
    pub free: usize,
    /// Total number of variables.
    pub k: usize,
    /// `quantifiers[j]` binds `x_{free + 1 + j}`.
    pub quantifiers: Vec<Quantifier>,
    pub matrix: Qf,
}

impl Formula {
    pub fn parse(src: &str) -> Result<Formula, FormulaError> {
        parse::parse(src)
    }

    pub fn is_sentence(&self) -> bool {
        self.free == 0
    }

    /// Distinct non-constant atom polynomials, in order of first occurrence.
    pub fn polynomials(&self) -> Vec<MPoly> {
        let mut out: Vec<MPoly> = Vec::new();
        for a in self.matrix.atoms() {
            if !a.poly.is_constant() && !out.contains(&a.poly) {
                out.push(a.poly.clone());
            }
        }
        out
    }
}

impl FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, q) in self.quantifiers.iter().enumerate() {
            write!(f, "{} x{}. ", q.keyword(), self.free + 1 + j)?;
        }
        write!(f, "{}", self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QeError {
    #[error(transparent)]
    Elim(#[from] ElimError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("no sign recorded for atom polynomial {0}")]
    MissingSign(String),
}

/// The outcome of eliminating the quantifiers of a formula.
#[derive(Debug, Clone)]
pub struct QfResult {
    pub formula: Formula,
    /// The family `F` the chain was built from.
    pub family: Vec<MPoly>,
    pub chain: ElimChain,
    pub tree: Tree,
    /// `truth[j][n]` for level `j >= free`: whether node `n` satisfies the
    /// formula with its first `j - free` quantifiers removed. `None` for
    /// pruned nodes and for levels below `free`.
    pub truth: Vec<Vec<Option<bool>>>,
}

impl QfResult {
    pub fn level(&self) -> usize {
        self.formula.free
    }

    /// `Elim_i(F)` for the free-variable level `i`.
    pub fn free_family(&self) -> &ElimLevel {
        self.chain.level(self.level())
    }

    /// Node ids at level `j` that are true.
    pub fn true_nodes(&self, j: usize) -> Vec<usize> {
        self.truth[j]
            .iter()
            .enumerate()
            .filter_map(|(n, t)| (*t == Some(true)).then_some(n))
            .collect()
    }

    /// The sign conditions on `Elim_i(F)` under which the formula holds.
    pub fn tphi(&self) -> Vec<&SignCondition> {
        let i = self.level();
        self.true_nodes(i)
            .into_iter()
            .map(|n| &self.tree.levels[i][n].condition)
            .collect()
    }

    /// Truth value of a sentence.
    pub fn truth_value(&self) -> bool {
        self.truth[0].first().copied().flatten().unwrap_or(false)
    }

    pub fn render(&self, style: RenderStyle) -> String {
        render(self, style)
    }
}

/// Eliminates the quantifiers of `phi`.
pub fn eliminate(phi: &Formula, config: &ElimConfig) -> Result<QfResult, QeError> {
    let mut family = phi.polynomials();
    if family.is_empty() {
        family.push(MPoly::one());
    }
    let k = phi.k;
    let chain = elim_chain(&family, k, 0, config)?;
    let tree = build_tree(&chain)?;
    let mut truth: Vec<Vec<Option<bool>>> = tree.levels.iter().map(|l| vec![None; l.len()]).collect();

    let top = chain.level(k);
    for (n, node) in tree.levels[k].iter().enumerate() {
        if node.pruned {
            continue;
        }
        let cond = node.condition.signs();
        let v = phi
            .matrix
            .eval(&|p| top.entry_index(p).map(|idx| cond[idx]))
            .ok_or_else(|| {
                let missing = phi
                    .polynomials()
                    .into_iter()
                    .find(|p| top.entry_index(p).is_none())
                    .map(|p| p.to_string())
                    .unwrap_or_default();
                QeError::MissingSign(missing)
            })?;
        truth[k][n] = Some(v);
    }
    for j in (phi.free..k).rev() {
        let q = phi.quantifiers[j - phi.free];
        for (n, node) in tree.levels[j].iter().enumerate() {
            if node.pruned {
                continue;
            }
            let mut kids: Vec<usize> = node.children.iter().map(|e| e.child).collect();
            kids.sort_unstable();
            kids.dedup();
            let mut vals = kids.iter().map(|&c| truth[j + 1][c].unwrap_or(false));
            truth[j][n] = Some(match q {
                Quantifier::Exists => vals.any(|b| b),
                Quantifier::Forall => vals.all(|b| b),
            });
        }
    }
    Ok(QfResult {
        formula: phi.clone(),
        family,
        chain,
        tree,
        truth,
    })
}

/// Decides a sentence.
pub fn decide(phi: &Formula, config: &ElimConfig) -> Result<bool, QeError> {
    debug_assert!(phi.is_sentence());
    Ok(eliminate(phi, config)?.truth_value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderStyle {
    /// `p > 0 /\ q = 0`
    #[default]
    Relations,
    /// `sign(p) = 1 /\ sign(q) = 0`
    Signs,
}

/// The quantifier-free formula: a disjunction over the true sign conditions,
/// each a conjunction over the non-constant members of `Elim_i(F)`.
pub fn render(result: &QfResult, style: RenderStyle) -> String {
    let conds = result.tphi();
    if conds.is_empty() {
        return "false".into();
    }
    let fam = result.free_family();
    let vars = fam.variable_entries();
    let disjuncts: Vec<String> = conds
        .iter()
        .map(|c| {
            if vars.is_empty() {
                return "true".to_string();
            }
            let parts: Vec<String> = vars
                .iter()
                .map(|&e| {
                    let p = &fam.entries[e].poly;
                    let s = c.0[e];
                    match style {
                        RenderStyle::Relations => format!("{p} {} 0", Relation::for_sign(s).symbol()),
                        RenderStyle::Signs => format!("sign({p}) = {}", s.to_i8()),
                    }
                })
                .collect();
            format!("({})", parts.join(" /\\ "))
        })
        .collect();
    if vars.is_empty() {
        return "true".into();
    }
    disjuncts.join(" \\/ ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn phi(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn cfg() -> ElimConfig {
        ElimConfig::default()
    }

    fn holds_at(r: &QfResult, point: &[i64]) -> bool {
        let pt: Vec<BigRational> = point.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
        let fam = r.free_family();
        let signs: Vec<Sign> = fam
            .entries
            .iter()
            .map(|e| Sign::of_rat(&e.poly.eval(&pt).unwrap()))
            .collect();
        r.tphi().iter().any(|c| c.0 == signs)
    }

    #[test]
    fn parse_shapes() {
        let f = phi("exists x2. x1*x2 + 1 = 0");
        assert_eq!((f.free, f.k, f.quantifiers.len()), (1, 2, 1));
        let f = phi("forall x1. exists x2. x2^2 - x1 > 0 \\/ ~(x1 >= 0)");
        assert!(f.is_sentence());
        let f = phi("((x1 + 1)^2 > 0) /\\ (x1 < 3 \\/ x1 = 2)");
        assert_eq!(f.polynomials().len(), 3);
        let f = phi("exists x1. x1/2 < 1/3");
        assert_eq!(f.polynomials(), vec!["3*x1 - 2".parse::<MPoly>().unwrap()]);
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "exists x1. forall x2. x1 + x2 + x3 > 0",
            "exists x2. exists x2. x2 > 0",
            "x1 > 0 /\\ exists x2. x2 > 0",
            "exists x1 x1 > 0",
            "x1 >",
            "(x1 > 0",
            "exists y. y > 0",
        ] {
            assert!(Formula::parse(bad).is_err(), "{bad}");
        }
        let e = Formula::parse("exists x1. forall x2. x1 + x2 + x3 > 0").unwrap_err();
        assert!(matches!(e, FormulaError::Shape { line: 1, column: 8, .. }), "{e}");
    }

    #[test]
    fn display_round_trips() {
        let f = phi("forall x2. ~(x2^2 + x1 > 0 /\\ x1 != 0) \\/ true");
        assert_eq!(phi(&f.to_string()), f);
    }

    #[test]
    fn quadratic_has_a_root() {
        let r = eliminate(&phi("exists x3. x3^2 + x1*x3 + x2 = 0"), &cfg()).unwrap();
        for b in -4..=4 {
            for c in -4..=4 {
                assert_eq!(holds_at(&r, &[b, c]), b * b - 4 * c >= 0, "b={b} c={c}");
            }
        }
        let back = phi(&r.render(RenderStyle::Relations));
        assert_eq!((back.free, back.k), (2, 2));
    }

    #[test]
    fn linear_examples() {
        let r = eliminate(&phi("exists x2. x2^2 + x1 = 0"), &cfg()).unwrap();
        for a in -5..=5 {
            assert_eq!(holds_at(&r, &[a]), a <= 0);
        }
        let r = eliminate(&phi("forall x2. x2^2 + x1 > 0"), &cfg()).unwrap();
        for a in -5..=5 {
            assert_eq!(holds_at(&r, &[a]), a > 0);
        }
        let r = eliminate(&phi("exists x2. x1*x2 + 1 = 0"), &cfg()).unwrap();
        for a in -5..=5 {
            assert_eq!(holds_at(&r, &[a]), a != 0);
        }
    }

    #[test]
    fn sentences() {
        assert!(decide(&phi("forall x1. exists x2. x2 - x1 > 0"), &cfg()).unwrap());
        assert!(!decide(&phi("exists x1. forall x2. x2 - x1 > 0"), &cfg()).unwrap());
        assert!(decide(&phi("exists x1. x1^2 - 2 = 0"), &cfg()).unwrap());
        assert!(!decide(&phi("exists x1. x1^2 + 1 = 0"), &cfg()).unwrap());
        assert!(decide(&phi("forall x1. 1 > 0"), &cfg()).unwrap());
        assert!(!decide(&phi("exists x1. x1 - x1 != 0"), &cfg()).unwrap());
    }

    #[test]
    fn render_shapes() {
        let r = eliminate(&phi("exists x2. x2^2 + x1 = 0"), &cfg()).unwrap();
        let text = r.render(RenderStyle::Relations);
        assert!(!text.is_empty() && text != "false", "{text}");
        let signs = r.render(RenderStyle::Signs);
        assert!(signs.contains("sign("), "{signs}");
        let r = eliminate(&phi("exists x2. x2^2 + x1^2 + 1 = 0"), &cfg()).unwrap();
        assert_eq!(r.render(RenderStyle::Relations), "false");
    }
}
