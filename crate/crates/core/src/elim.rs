//! Parametric elimination families and the elimination chain.
//!
//! For a family `G` in `Z[x1..x_{i+1}]`, the family `Elim(G)` in
//! `Z[x1..x_i]` consists of the relevant coefficients of every member and
//! the scaled Hermite minors `HMi(T;A)` for every truncation `T` of positive
//! degree and every product polynomial `A` needed to run sign
//! determination at the roots of `T`. Each entry records how it was built so
//! that its sign can later be read back as a Tarski query.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermite::{HermiteError, TraceTable};
use crate::poly::MPoly;
use crate::sign::Sign;
use crate::signdet::{bit, pder_count, pder_exponents, product};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElimError {
    #[error("{what} is {actual}, exceeding the cap {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        actual: u128,
    },
    #[error("level {level}: {what} is {actual}, above the bound {bound}")]
    BoundViolation {
        level: usize,
        what: &'static str,
        actual: f64,
        bound: f64,
    },
    #[error(transparent)]
    Hermite(#[from] HermiteError),
}

/// Resource limits for family construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElimConfig {
    pub max_family: usize,
    pub max_degree: usize,
}

impl Default for ElimConfig {
    fn default() -> Self {
        ElimConfig {
            max_family: 1_000_000,
            max_degree: 512,
        }
    }
}

/// A derivative `Q = P^(order)` of member `member` of the source family,
/// raised to `exp` in a product polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtraFactor {
    /// Index into the level's derivative pool.
    pub pool: usize,
    pub exp: u8,
}

/// Identifies one Hermite minor: `HMi_minor(T; A)` with `T` the truncation
/// of degree `trunc_degree` of source member `source`, and
/// `A = prod (T^(h))^der[h-1] * Q^e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinorKey {
    pub source: usize,
    pub trunc_degree: usize,
    pub der: Vec<u8>,
    pub extra: Option<ExtraFactor>,
    pub minor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Polynomial of the input family (position among the atom polynomials).
    Input { index: usize },
    RelevantCoefficient { source: usize },
    Minor {
        #[serde(flatten)]
        key: MinorKey,
        /// Degree of the product polynomial `A`.
        a: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElimEntry {
    pub poly: MPoly,
    pub provenance: Vec<Provenance>,
}

impl ElimEntry {
    /// Sign of a constant entry.
    pub fn constant_sign(&self) -> Option<Sign> {
        self.poly.constant_sign()
    }
}

/// A derivative of some source member, shared by every member that has it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub poly: MPoly,
    /// `(member, derivative order)` pairs producing this polynomial.
    pub owners: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElimStats {
    /// Truncations of positive degree processed.
    pub truncations: usize,
    /// Trace tables built; equals `truncations`.
    pub trace_tables: usize,
    /// Product polynomials `A` whose minors were computed.
    pub products: usize,
}

/// The family `Elim_i(F)` with the data needed to decode sign conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElimLevel {
    pub level: usize,
    pub entries: Vec<ElimEntry>,
    #[serde(skip)]
    pub pool: Vec<PoolEntry>,
    #[serde(skip)]
    pub stats: ElimStats,
    #[serde(skip)]
    minor_index: HashMap<MinorKey, (usize, usize)>,
    #[serde(skip)]
    poly_index: HashMap<MPoly, usize>,
}

impl ElimLevel {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn polys(&self) -> Vec<MPoly> {
        self.entries.iter().map(|e| e.poly.clone()).collect()
    }

    /// Entry index holding the given minor, with the degree of its product
    /// polynomial.
    pub fn minor_entry(&self, key: &MinorKey) -> Option<(usize, usize)> {
        self.minor_index.get(key).copied()
    }

    /// Index of the entry equal to `poly`.
    pub fn entry_index(&self, poly: &MPoly) -> Option<usize> {
        self.poly_index.get(poly).copied()
    }

    /// Indices of entries that are not constants.
    pub fn variable_entries(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| !self.entries[i].poly.is_constant())
            .collect()
    }

    /// Largest total degree among the entries.
    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|e| e.poly.total_degree()).max().unwrap_or(0)
    }

    /// Pool indices usable as extras for source member `member`: the
    /// derivatives of the other members.
    pub fn extras_for(&self, member: usize) -> Vec<usize> {
        (0..self.pool.len())
            .filter(|&q| self.pool[q].owners.iter().any(|&(m, _)| m != member))
            .collect()
    }

    fn from_entries(level: usize, raw: Vec<(MPoly, Provenance)>) -> ElimLevel {
        let mut entries: Vec<ElimEntry> = Vec::new();
        let mut seen: HashMap<MPoly, usize> = HashMap::new();
        let mut minor_index = HashMap::new();
        for (poly, prov) in raw {
            let idx = *seen.entry(poly.clone()).or_insert_with(|| {
                entries.push(ElimEntry {
                    poly,
                    provenance: Vec::new(),
                });
                entries.len() - 1
            });
            if let Provenance::Minor { key, a } = &prov {
                minor_index.insert(key.clone(), (idx, *a));
            }
            entries[idx].provenance.push(prov);
        }
        ElimLevel {
            level,
            entries,
            pool: Vec::new(),
            stats: ElimStats::default(),
            minor_index,
            poly_index: seen,
        }
    }
}

/// The top level: the input family itself.
pub fn input_level(f: &[MPoly], k: usize) -> ElimLevel {
    let raw = f
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), Provenance::Input { index: i }))
        .collect();
    ElimLevel::from_entries(k, raw)
}

/// Derivative pool of `g` with respect to `x_var`, unique by polynomial.
pub fn derivative_pool(g: &[MPoly], var: usize) -> Vec<PoolEntry> {
    let mut pool: Vec<PoolEntry> = Vec::new();
    let mut seen: HashMap<MPoly, usize> = HashMap::new();
    for (m, p) in g.iter().enumerate() {
        let Ok(ders) = p.der_list(var) else { continue };
        for (r, d) in ders.into_iter().enumerate() {
            match seen.get(&d) {
                Some(&q) => pool[q].owners.push((m, r)),
                None => {
                    seen.insert(d.clone(), pool.len());
                    pool.push(PoolEntry {
                        poly: d,
                        owners: vec![(m, r)],
                    });
                }
            }
        }
    }
    pool
}

/// Product polynomials for the truncation `t` of degree `p`: `PDer_bit(p)(T)`
/// followed by `PDer_{bit(p)-1}(T;Q)` for each extra, with their identifiers.
fn products_for(
    t: &MPoly,
    var: usize,
    extras: &[(usize, &MPoly)],
) -> Vec<(Vec<u8>, Option<ExtraFactor>, MPoly)> {
    let ders = t.der_list(var).expect("positive degree");
    let p = ders.len();
    let b = bit(p);
    let mut out = Vec::new();
    let mut cache: HashMap<Vec<u8>, MPoly> = HashMap::new();
    for e in pder_exponents(p - 1, b) {
        let a = product(&ders[1..], &e);
        cache.insert(e.clone(), a.clone());
        out.push((e, None, a));
    }
    let base = pder_exponents(p - 1, b - 1);
    for &(q, qp) in extras {
        let q2 = qp * qp;
        for e in &base {
            let a = cache.get(e).cloned().unwrap_or_else(|| product(&ders[1..], e));
            out.push((e.clone(), Some(ExtraFactor { pool: q, exp: 1 }), &a * qp));
            out.push((e.clone(), Some(ExtraFactor { pool: q, exp: 2 }), &a * &q2));
        }
    }
    out
}

/// Minor lists keyed by derivative exponents.
pub type KeyedMinors = Vec<(Vec<u8>, Vec<MPoly>)>;

/// `HMi(T;A)` for every product polynomial of `T` (no extras), keyed by
/// derivative exponents. Empty when `T` is constant in `x_var`.
pub fn thelim(t: &MPoly, var: usize) -> Result<KeyedMinors, ElimError> {
    if t.degree_in(var).unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let prods = products_for(t, var, &[]);
    let n = prods.iter().map(|(_, _, a)| a.degree_in(var).unwrap_or(0)).max().unwrap_or(0);
    let p = t.degree_in(var).unwrap();
    let table = TraceTable::build(t.coeffs_in(var), n + 2 * p - 2)?;
    prods
        .into_iter()
        .map(|(e, _, a)| Ok((e, table.hmi(&a.coeffs_in(var))?.minors)))
        .collect()
}

/// Builds `Elim(G)` with respect to `x_var`, as level `var - 1`.
pub fn elim_family(g: &[MPoly], var: usize, config: &ElimConfig) -> Result<ElimLevel, ElimError> {
    let max_deg = g.iter().filter_map(|p| p.degree_in(var)).max().unwrap_or(0);
    if max_deg > config.max_degree {
        return Err(ElimError::CapExceeded {
            what: "main-variable degree",
            limit: config.max_degree,
            actual: max_deg as u128,
        });
    }
    let pool = derivative_pool(g, var);

    struct Task {
        member: usize,
        trunc: MPoly,
        extras: Vec<usize>,
    }
    let mut rc_raw = Vec::new();
    let mut tasks = Vec::new();
    let mut estimate: u128 = 0;
    for (m, p) in g.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let rcs = p.relevant_coefficients(var);
        estimate += rcs.len() as u128;
        rc_raw.extend(rcs.into_iter().map(|c| (m, c)));
        for t in p.truncation_set(var) {
            let d = t.degree_in(var).unwrap_or(0);
            if d == 0 {
                continue;
            }
            let extras: Vec<usize> = (0..pool.len())
                .filter(|&q| pool[q].owners.iter().any(|&(o, _)| o != m))
                .collect();
            let b = bit(d);
            let n_products =
                pder_count(d - 1, b) + 2 * extras.len() as u128 * pder_count(d - 1, b - 1);
            estimate += n_products * d as u128;
            if estimate > config.max_family as u128 {
                return Err(ElimError::CapExceeded {
                    what: "estimated elimination family size",
                    limit: config.max_family,
                    actual: estimate,
                });
            }
            tasks.push(Task {
                member: m,
                trunc: t,
                extras,
            });
        }
    }

    let tables = AtomicUsize::new(0);
    let product_count = AtomicUsize::new(0);
    let results: Vec<Result<Vec<(MPoly, Provenance)>, ElimError>> = tasks
        .par_iter()
        .map(|task| {
            let t = &task.trunc;
            let p = t.degree_in(var).unwrap();
            let extras: Vec<(usize, &MPoly)> =
                task.extras.iter().map(|&q| (q, &pool[q].poly)).collect();
            let prods = products_for(t, var, &extras);
            let n = prods
                .iter()
                .map(|(_, _, a)| a.degree_in(var).unwrap_or(0))
                .max()
                .unwrap_or(0);
            let table = TraceTable::build(t.coeffs_in(var), n + 2 * p - 2)?;
            tables.fetch_add(1, Ordering::Relaxed);
            product_count.fetch_add(prods.len(), Ordering::Relaxed);
            let t_deg = t.param_degree(var);
            let mut out = Vec::with_capacity(prods.len() * p);
            for (der, extra, a) in prods {
                let h = table.hmi(&a.coeffs_in(var))?;
                if !h.within_degree_bound(t_deg, a.param_degree(var)) {
                    return Err(ElimError::BoundViolation {
                        level: var - 1,
                        what: "degree of a scaled Hermite minor",
                        actual: h.minors.iter().map(MPoly::total_degree).max().unwrap_or(0) as f64,
                        bound: (p * ((h.a + 2 * p - 2) * t_deg + a.param_degree(var))) as f64,
                    });
                }
                for (j, m) in h.minors.into_iter().enumerate() {
                    out.push((
                        m,
                        Provenance::Minor {
                            key: MinorKey {
                                source: task.member,
                                trunc_degree: p,
                                der: der.clone(),
                                extra,
                                minor: j,
                            },
                            a: h.a,
                        },
                    ));
                }
            }
            Ok(out)
        })
        .collect();

    // relevant coefficients of a member precede its minors
    let mut raw = Vec::new();
    let mut rc_iter = rc_raw.into_iter().peekable();
    let mut task_iter = tasks.iter().zip(results).peekable();
    for m in 0..g.len() {
        while let Some((_, c)) = rc_iter.next_if(|(o, _)| *o == m) {
            raw.push((c, Provenance::RelevantCoefficient { source: m }));
        }
        while let Some((_, res)) = task_iter.next_if(|(t, _)| t.member == m) {
            raw.extend(res?);
        }
    }
    let mut level = ElimLevel::from_entries(var - 1, raw);
    if level.len() > config.max_family {
        return Err(ElimError::CapExceeded {
            what: "elimination family size",
            limit: config.max_family,
            actual: level.len() as u128,
        });
    }
    level.pool = pool;
    level.stats = ElimStats {
        truncations: tasks.len(),
        trace_tables: tables.into_inner(),
        products: product_count.into_inner(),
    };
    Ok(level)
}

/// Size and degree bounds for `Elim_i(F)` when `F` has `s` members of
/// degree at most `d` in `k` variables, as base-2 logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelBounds {
    pub log2_size: f64,
    pub log2_degree: f64,
}

impl LevelBounds {
    pub fn new(s: usize, d: usize, k: usize, i: usize) -> LevelBounds {
        let e = (k - i) as i32;
        let m = d.max(2) as f64;
        let log2_size = 2f64.powi(e) * (s.max(1) as f64).log2()
            + (16f64.powi(e) - 1.0) * bit(d) as f64 * m.log2();
        let log2_degree = if d == 0 {
            f64::NEG_INFINITY
        } else {
            2.0 * (4f64.powi(e) - 1.0) / 3.0 + 4f64.powi(e) * (d as f64).log2()
        };
        LevelBounds {
            log2_size,
            log2_degree,
        }
    }

    pub fn size_ok(&self, size: usize) -> bool {
        size == 0 || (size as f64).log2() <= self.log2_size + 1e-9
    }

    pub fn degree_ok(&self, degree: usize) -> bool {
        degree == 0 || (degree as f64).log2() <= self.log2_degree + 1e-9
    }

    /// Human-readable bound, exact when small.
    pub fn describe(log2: f64) -> String {
        if log2 == f64::NEG_INFINITY {
            "0".into()
        } else if log2 < 60.0 {
            format!("{}", 2f64.powf(log2).round() as u64)
        } else {
            format!("2^{log2:.1}")
        }
    }
}

/// `Elim_k(F) = F`, `Elim_i(F) = Elim(Elim_{i+1}(F))` down to `stop`.
#[derive(Debug, Clone, Serialize)]
pub struct ElimChain {
    pub k: usize,
    pub s: usize,
    pub d: usize,
    /// `levels[i]` is `Elim_i`, for `stop <= i <= k`; lower slots are absent.
    #[serde(skip)]
    levels: Vec<Option<ElimLevel>>,
}

impl ElimChain {
    pub fn level(&self, i: usize) -> &ElimLevel {
        self.levels[i].as_ref().expect("level was computed")
    }

    pub fn lowest(&self) -> usize {
        (0..=self.k).find(|&i| self.levels[i].is_some()).unwrap()
    }

    pub fn bounds(&self, i: usize) -> LevelBounds {
        LevelBounds::new(self.s, self.d, self.k, i)
    }

    /// Levels from `k` down to the lowest computed one.
    pub fn levels(&self) -> impl Iterator<Item = &ElimLevel> {
        self.levels.iter().rev().flatten()
    }
}

/// Computes the chain for `F` in `k` variables down to `Elim_stop`.
pub fn elim_chain(
    f: &[MPoly],
    k: usize,
    stop: usize,
    config: &ElimConfig,
) -> Result<ElimChain, ElimError> {
    let top = input_level(f, k);
    let s = top.len();
    let d = f.iter().map(MPoly::total_degree).max().unwrap_or(0);
    let mut levels: Vec<Option<ElimLevel>> = vec![None; k + 1];
    levels[k] = Some(top);
    for i in (stop..k).rev() {
        let g = levels[i + 1].as_ref().unwrap().polys();
        let level = elim_family(&g, i + 1, config)?;
        let b = LevelBounds::new(s, d, k, i);
        if !b.size_ok(level.len()) {
            return Err(ElimError::BoundViolation {
                level: i,
                what: "family size",
                actual: level.len() as f64,
                bound: 2f64.powf(b.log2_size),
            });
        }
        if !b.degree_ok(level.max_degree()) {
            return Err(ElimError::BoundViolation {
                level: i,
                what: "maximal degree",
                actual: level.max_degree() as f64,
                bound: 2f64.powf(b.log2_degree),
            });
        }
        log::debug!("Elim_{i}: {} entries, max degree {}", level.len(), level.max_degree());
        levels[i] = Some(level);
    }
    Ok(ElimChain { k, s, d, levels })
}
