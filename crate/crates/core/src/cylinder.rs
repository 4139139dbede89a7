//! Decoding sign conditions on `Elim(G)` into the ordered cells of the
//! `x_{i+1}`-line, and the cylindrical tree of realizable sign conditions.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::elim::{ElimChain, ElimLevel, ExtraFactor, MinorKey};
use crate::hermite::{signature_from_minor_signs, HermiteError};
use crate::poly::MPoly;
use crate::sign::{Sign, SignCondition};
use crate::signdet::{thom_compare, thom_table, SignDetError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    /// The condition is not realizable; the node is pruned.
    #[error("unrealizable sign condition: {0}")]
    Unrealizable(String),
    #[error("no entry for minor {0:?}")]
    MissingMinor(MinorKey),
    #[error("no entry for polynomial {0}")]
    MissingPolynomial(String),
    #[error("sign condition has {got} entries, family has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("Tarski query failed: {0}")]
    Query(String),
    #[error(transparent)]
    Hermite(#[from] HermiteError),
}

impl From<SignDetError> for DecodeError {
    fn from(e: SignDetError) -> Self {
        match e {
            SignDetError::Inconsistent(m) => DecodeError::Unrealizable(m),
            SignDetError::Incomparable => DecodeError::Unrealizable("incomparable Thom encodings".into()),
            other => DecodeError::Query(other.to_string()),
        }
    }
}

/// Behaviour of one member of `G` over a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Effective {
    /// Identically zero in `y`.
    Zero,
    /// Nonzero and constant in `y`.
    Flat(Sign),
    /// Degree `degree >= 1` in `y` with the given leading sign.
    Poly { degree: usize, lc: Sign },
}

/// A root of one member of `G` over the parameter point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellRoot {
    pub member: usize,
    /// Signs of `T, T', ..., T^(p'-1)` and the leading sign.
    pub thom: Vec<Sign>,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellKind {
    Interval,
    Root { roots: Vec<CellRoot> },
}

/// A cell of the `x_{i+1}`-line: an open interval or a point, with the
/// signs of every member of `G` on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub kind: CellKind,
    pub signs: SignCondition,
}

impl Cell {
    pub fn is_root(&self) -> bool {
        matches!(self.kind, CellKind::Root { .. })
    }
}

/// A point on the line: sign vectors `[P_b, P_b', ..., P_b^(p_b'-1), lc_b]`
/// for every member `b` of positive effective degree.
struct Point {
    ders: Vec<Option<Vec<Sign>>>,
    roots: Vec<CellRoot>,
}

/// `TaQu(A;T)` from the signs of the minors `HMi(T;A)` in `tau`.
pub fn answer_tarski(
    level: &ElimLevel,
    tau: &[Sign],
    key_base: &MinorKey,
    lc_sign: Sign,
) -> Result<i64, DecodeError> {
    let p = key_base.trunc_degree;
    let mut signs = Vec::with_capacity(p);
    let mut a = 0;
    for j in 0..p {
        let key = MinorKey {
            minor: j,
            ..key_base.clone()
        };
        let (idx, deg) = level
            .minor_entry(&key)
            .ok_or_else(|| DecodeError::MissingMinor(key.clone()))?;
        a = deg;
        signs.push(tau[idx]);
    }
    Ok(signature_from_minor_signs(&signs, a, lc_sign)?)
}

fn sign_of(level: &ElimLevel, tau: &[Sign], poly: &MPoly) -> Result<Sign, DecodeError> {
    if let Some(s) = poly.constant_sign() {
        return Ok(s);
    }
    level
        .entry_index(poly)
        .map(|i| tau[i])
        .ok_or_else(|| DecodeError::MissingPolynomial(poly.to_string()))
}

fn effective(level: &ElimLevel, tau: &[Sign], p: &MPoly, var: usize) -> Result<Effective, DecodeError> {
    let mut cur = p.clone();
    while !cur.is_zero() {
        let lc = cur.lc_in(var);
        let s = sign_of(level, tau, &lc)?;
        if !s.is_zero() {
            let degree = cur.degree_in(var).unwrap_or(0);
            return Ok(if degree == 0 {
                Effective::Flat(s)
            } else {
                Effective::Poly { degree, lc: s }
            });
        }
        cur = cur.drop_leading(var);
    }
    Ok(Effective::Zero)
}

/// Decodes a sign condition `tau` on `Elim(G)` (with respect to `x_var`)
/// into the cells of the `x_var`-line, left to right.
pub fn decode(g: &[MPoly], level: &ElimLevel, var: usize, tau: &[Sign]) -> Result<Vec<Cell>, DecodeError> {
    if tau.len() != level.len() {
        return Err(DecodeError::WrongLength {
            expected: level.len(),
            got: tau.len(),
        });
    }
    let eff: Vec<Effective> = g
        .iter()
        .map(|p| effective(level, tau, p, var))
        .collect::<Result<_, _>>()?;

    // pool index of (member, derivative order)
    let mut pool_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (q, e) in level.pool.iter().enumerate() {
        for &o in &e.owners {
            pool_of.insert(o, q);
        }
    }

    let mut points: Vec<Point> = Vec::new();
    for (m, e) in eff.iter().enumerate() {
        let Effective::Poly { degree, lc } = *e else { continue };
        let extras = level.extras_for(m);
        let table = thom_table(degree, lc, extras.len(), |(der, extra)| {
            let key = MinorKey {
                source: m,
                trunc_degree: degree,
                der: der.to_vec(),
                extra: extra.map(|(qi, exp)| ExtraFactor {
                    pool: extras[qi],
                    exp,
                }),
                minor: 0,
            };
            answer_tarski(level, tau, &key, lc).map_err(|e| SignDetError::Query(e.to_string()))
        })?;
        let pos_in_extras: HashMap<usize, usize> =
            extras.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        for root in table.roots {
            let mut ders: Vec<Option<Vec<Sign>>> = vec![None; g.len()];
            for (b, eb) in eff.iter().enumerate() {
                let Effective::Poly { degree: pb, lc: lcb } = *eb else { continue };
                if b == m {
                    ders[b] = Some(root.extended());
                    continue;
                }
                let mut v = Vec::with_capacity(pb + 1);
                for r in 0..pb {
                    let q = pool_of[&(b, r)];
                    v.push(root.extra_signs[pos_in_extras[&q]]);
                }
                v.push(lcb);
                ders[b] = Some(v);
            }
            let cell_root = CellRoot {
                member: m,
                thom: root.extended(),
                multiplicity: root.multiplicity,
            };
            insert_point(&mut points, ders, cell_root)?;
        }
    }

    let n_points = points.len();
    let mut cells = Vec::with_capacity(2 * n_points + 1);
    let base_signs = |f: &dyn Fn(usize, usize, Sign) -> Sign| -> SignCondition {
        SignCondition(
            eff.iter()
                .enumerate()
                .map(|(b, e)| match *e {
                    Effective::Zero => Sign::Zero,
                    Effective::Flat(s) => s,
                    Effective::Poly { degree, lc } => f(b, degree, lc),
                })
                .collect(),
        )
    };
    cells.push(Cell {
        kind: CellKind::Interval,
        signs: base_signs(&|_, degree, lc| lc * Sign::Neg.pow(degree as u64)),
    });
    for pt in points {
        let ders = &pt.ders;
        cells.push(Cell {
            kind: CellKind::Root {
                roots: pt.roots.clone(),
            },
            signs: base_signs(&|b, _, _| ders[b].as_ref().unwrap()[0]),
        });
        cells.push(Cell {
            kind: CellKind::Interval,
            signs: base_signs(&|b, _, lc| {
                ders[b]
                    .as_ref()
                    .unwrap()
                    .iter()
                    .copied()
                    .find(|s| !s.is_zero())
                    .unwrap_or(lc)
            }),
        });
    }
    Ok(cells)
}

fn insert_point(
    points: &mut Vec<Point>,
    ders: Vec<Option<Vec<Sign>>>,
    root: CellRoot,
) -> Result<(), DecodeError> {
    let m = root.member;
    let mine = ders[m].clone().expect("own vector");
    for i in 0..points.len() {
        let other = points[i].ders[m].as_ref().expect("all points carry every member");
        match thom_compare(&mine, other)? {
            Ordering::Less => {
                points.insert(
                    i,
                    Point {
                        ders,
                        roots: vec![root],
                    },
                );
                return Ok(());
            }
            Ordering::Equal => {
                if points[i].ders != ders {
                    return Err(DecodeError::Unrealizable(
                        "one root with two different sign vectors".into(),
                    ));
                }
                points[i].roots.push(root);
                return Ok(());
            }
            Ordering::Greater => {}
        }
    }
    points.push(Point {
        ders,
        roots: vec![root],
    });
    Ok(())
}

/// An edge of the tree: a cell over the parent's condition and the node
/// holding the cell's sign condition.
#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub cell: Cell,
    pub child: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub condition: SignCondition,
    pub children: Vec<Edge>,
    /// Decoding showed the condition unrealizable.
    pub pruned: bool,
}

/// The cylindrical tree. Nodes of level `j` carry the distinct realizable
/// sign conditions on `Elim_j(F)`; a sign condition appears once per level
/// even when several cells realize it.
#[derive(Debug, Clone)]
pub struct Tree {
    pub levels: Vec<Vec<TreeNode>>,
}

#[derive(Serialize)]
struct NodeDump<'a> {
    id: usize,
    condition: &'a SignCondition,
    children: usize,
}

#[derive(Serialize)]
struct LevelDump<'a> {
    level: usize,
    nodes: Vec<NodeDump<'a>>,
}

impl Tree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Realizable sign conditions at level `j`, in construction order.
    pub fn conditions(&self, j: usize) -> Vec<&SignCondition> {
        self.levels[j]
            .iter()
            .filter(|n| !n.pruned)
            .map(|n| &n.condition)
            .collect()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.iter().filter(|n| !n.pruned).count())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<LevelDump> = self
            .levels
            .iter()
            .enumerate()
            .map(|(j, l)| LevelDump {
                level: j,
                nodes: l
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| !n.pruned)
                    .map(|(id, n)| NodeDump {
                        id,
                        condition: &n.condition,
                        children: n.children.len(),
                    })
                    .collect(),
            })
            .collect();
        serde_json::json!({ "levels": levels })
    }
}

/// Builds the tree from `Elim_0` up to `Elim_k = F`.
pub fn build_tree(chain: &ElimChain) -> Result<Tree, DecodeError> {
    assert_eq!(chain.lowest(), 0, "the chain must reach level 0");
    let root_level = chain.level(0);
    let mut root = Vec::with_capacity(root_level.len());
    for e in &root_level.entries {
        root.push(e.constant_sign().ok_or_else(|| {
            DecodeError::MissingPolynomial(format!("non-constant level-0 entry {}", e.poly))
        })?);
    }
    let mut levels = vec![vec![TreeNode {
        condition: SignCondition(root),
        children: Vec::new(),
        pruned: false,
    }]];
    for j in 0..chain.k {
        let lvl = chain.level(j);
        let g = chain.level(j + 1).polys();
        let decoded: Vec<Result<Vec<Cell>, DecodeError>> = levels[j]
            .par_iter()
            .map(|node| decode(&g, lvl, j + 1, node.condition.signs()))
            .collect();
        let mut next: Vec<TreeNode> = Vec::new();
        let mut index: HashMap<SignCondition, usize> = HashMap::new();
        for (node, res) in levels[j].iter_mut().zip(decoded) {
            match res {
                Ok(cells) => {
                    for cell in cells {
                        let child = *index.entry(cell.signs.clone()).or_insert_with(|| {
                            next.push(TreeNode {
                                condition: cell.signs.clone(),
                                children: Vec::new(),
                                pruned: false,
                            });
                            next.len() - 1
                        });
                        node.children.push(Edge { cell, child });
                    }
                }
                Err(DecodeError::Unrealizable(why)) => {
                    log::debug!("pruning level-{j} node {}: {why}", node.condition);
                    node.pruned = true;
                }
                Err(e) => return Err(e),
            }
        }
        levels.push(next);
    }
    prune_upwards(&mut levels);
    Ok(Tree { levels })
}

/// Drops edges into pruned nodes and prunes nodes left without children.
fn prune_upwards(levels: &mut [Vec<TreeNode>]) {
    for j in (0..levels.len() - 1).rev() {
        let (lo, hi) = levels.split_at_mut(j + 1);
        let below = &hi[0];
        for node in lo[j].iter_mut() {
            if node.pruned {
                continue;
            }
            node.children.retain(|e| !below[e.child].pruned);
            if node.children.is_empty() {
                node.pruned = true;
            }
        }
    }
}
