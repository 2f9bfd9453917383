//! Polynomial patterns over `Z_q` through the partition theorem.
//!
//! With a fim of dimension `k`, ring elements `r_1..r_k` and one polynomial
//! per letter, a space point `η` maps to `g(η) = Σ_b g_b(η(b))`, where
//! `g_b(α)` collects the monomials of `p_α(Σ_{i ∈ base b} r_i)` whose
//! variables are exactly `base b`. A monochromatic line of `d(g(·))` then
//! gives `y`, `z = Σ_{ℓ ∈ w} r_ℓ` with `{y + p_α(z)}` monochromatic.
//!
//! The identity `g(pt_L(α)) = y + p_α(z)` needs `deg p_α ≤ t` (a monomial
//! over more than `t` variables has no element to live on) and
//! `p_α(0) = 0` (constants have empty support). Both are enforced, and the
//! identity is rechecked on every line the search returns.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bounds::{f1_bound, Budget, Evaluation, Shape};
use crate::error::{Error, Result};
use crate::model::{Fim, TupleMode, Vocabulary};
use crate::search::find_mono_line;
use crate::space::{splitmix64, AlphabetSeq, Colouring, Line, Space, TypeSet};

/// The ring of integers modulo `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zq {
    q: u64,
}

impl Zq {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..=u32::MAX as u64).contains(&q) {
            return Err(Error::Polynomial(format!("modulus must be in 2..=2^32-1, got {q}")));
        }
        Ok(Zq { q })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn pow(&self, a: u64, mut e: u32) -> u64 {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }
}

/// A univariate polynomial, coefficients ascending and reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(ring: &Zq, coeffs: &[i64]) -> Self {
        let mut coeffs: Vec<u64> = coeffs.iter().map(|&c| ring.reduce(c)).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial at degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, ring: &Zq, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| ring.add(ring.mul(acc, x), c))
    }
}

/// One polynomial per letter and coordinate: `polys[α][m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySpec {
    pub ring: Zq,
    polys: Vec<Vec<Poly>>,
}

impl PolySpec {
    pub fn single(ring: Zq, polys: Vec<Poly>) -> Result<Self> {
        Self::multi(ring, polys.into_iter().map(|p| vec![p]).collect())
    }

    pub fn multi(ring: Zq, polys: Vec<Vec<Poly>>) -> Result<Self> {
        let coords = polys.first().map_or(0, Vec::len);
        if polys.is_empty() || coords == 0 {
            return Err(Error::Polynomial("need at least one letter and one coordinate".into()));
        }
        if polys.iter().any(|row| row.len() != coords) {
            return Err(Error::Polynomial("every letter needs the same number of coordinates".into()));
        }
        if u32::try_from(polys.len()).is_err() {
            return Err(Error::Polynomial("too many letters".into()));
        }
        Ok(PolySpec { ring, polys })
    }

    /// One letter per line; coordinates separated by `|`, coefficients
    /// ascending and separated by whitespace or commas. `#` starts a comment.
    pub fn parse(ring: Zq, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for part in line.split('|') {
                let mut cs = Vec::new();
                for tok in part.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                    let c: i64 = tok
                        .parse()
                        .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad coefficient `{tok}`") })?;
                    cs.push(c);
                }
                row.push(Poly::new(&ring, &cs));
            }
            rows.push(row);
        }
        Self::multi(ring, rows).map_err(|e| Error::Parse { line: text.lines().count().max(1), msg: e.to_string() })
    }

    pub fn letters(&self) -> usize {
        self.polys.len()
    }

    pub fn coords(&self) -> usize {
        self.polys[0].len()
    }

    pub fn poly(&self, letter: usize, coord: usize) -> &Poly {
        &self.polys[letter][coord]
    }

    pub fn max_degree(&self) -> usize {
        self.polys.iter().flatten().map(Poly::degree).max().unwrap_or(0)
    }

    /// Rejects constant terms and degrees above `t`.
    pub fn validate(&self, t: usize) -> Result<()> {
        for (a, row) in self.polys.iter().enumerate() {
            for (m, p) in row.iter().enumerate() {
                if p.coeffs.first().is_some_and(|&c| c != 0) {
                    return Err(Error::Polynomial(format!(
                        "letter {a} coordinate {m} has a nonzero constant term; constants have empty variable \
                         support and are lost by the element split, so normalize to p(0) = 0"
                    )));
                }
                if p.degree() > t {
                    return Err(Error::Polynomial(format!(
                        "letter {a} coordinate {m} has degree {} but t = {t}; monomials over more than t variables \
                         fall on no element, so use t >= {}",
                        p.degree(),
                        p.degree()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `coef · Π x_j^exps[j]` over variables `x_0..x_{k-1}` standing for
/// `r_1..r_k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: u64,
}

impl Monomial {
    pub fn support(&self) -> Vec<usize> {
        (0..self.exps.len()).filter(|&j| self.exps[j] > 0).collect()
    }

    pub fn eval(&self, ring: &Zq, r: &[u64]) -> u64 {
        self.exps.iter().zip(r).fold(self.coef, |acc, (&e, &x)| ring.mul(acc, ring.pow(x, e)))
    }
}

// Binomials mod q up to n by Pascal's rule.
fn pascal(ring: &Zq, n: usize) -> Vec<Vec<u64>> {
    let mut rows = vec![vec![1 % ring.q()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let row = (0..=i)
            .map(|j| {
                let a = if j > 0 { prev[j - 1] } else { 0 };
                let b = if j < i { prev[j] } else { 0 };
                ring.add(a, b)
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// Symbolic expansion of `p(Σ_{j ∈ vars} x_j)` over `k` variables, with
/// like terms merged and zero coefficients dropped.
pub fn expand(ring: &Zq, p: &Poly, vars: &[usize], k: usize) -> Vec<Monomial> {
    let binom = pascal(ring, p.degree());
    let mut acc: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for (e, &a) in p.coeffs.iter().enumerate() {
        if a == 0 {
            continue;
        }
        // Distribute e among vars; the multinomial is a product of binomials.
        let mut exps = vec![0u32; k];
        distribute(ring, &binom, vars, e, a, &mut exps, &mut acc);
    }
    acc.into_iter().filter(|(_, c)| *c != 0).map(|(exps, coef)| Monomial { exps, coef }).collect()
}

fn distribute(
    ring: &Zq,
    binom: &[Vec<u64>],
    vars: &[usize],
    left: usize,
    coef: u64,
    exps: &mut Vec<u32>,
    acc: &mut BTreeMap<Vec<u32>, u64>,
) {
    match vars.split_first() {
        None => {
            if left == 0 {
                let slot = acc.entry(exps.clone()).or_insert(0);
                *slot = ring.add(*slot, coef);
            }
        }
        Some((&v, rest)) => {
            let lo = if rest.is_empty() { left } else { 0 };
            for n in lo..=left {
                exps[v] = n as u32;
                distribute(ring, binom, rest, left - n, ring.mul(coef, binom[left][n]), exps, acc);
            }
            exps[v] = 0;
        }
    }
}

/// The monomials of `p(Σ_{j ∈ vars} x_j)` whose support is all of `vars`.
pub fn exact_support(ring: &Zq, p: &Poly, vars: &[usize], k: usize) -> Vec<Monomial> {
    expand(ring, p, vars, k).into_iter().filter(|m| m.support().len() == vars.len()).collect()
}

/// The `t`-canonical vocabulary with `coords` symbols per arity; symbol
/// `(s, m)` carries coordinate `m`. One coordinate gives `id, F2, ..., Ft`.
pub fn coordinate_vocabulary(t: usize, coords: usize) -> Result<(Vocabulary, Vec<usize>)> {
    if coords == 1 {
        return Ok((Vocabulary::canonical(t), vec![0; t.max(1)]));
    }
    let mut symbols = Vec::new();
    let mut coord = Vec::new();
    for s in 1..=t.max(1) {
        for m in 0..coords {
            let name = if s == 1 && m == 0 { "id".to_string() } else { format!("F{s}_{m}") };
            symbols.push((name, s));
            coord.push(m);
        }
    }
    Ok((Vocabulary::new(symbols)?, coord))
}

/// Letter-to-ring-value tables `g_b`, one per element, and the coordinate
/// each element feeds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GTables {
    pub coords: usize,
    pub coord_of: Vec<usize>,
    pub tables: Vec<Vec<u64>>,
}

/// Builds `g_b` for every element of `fim`, with `h` the identity on points
/// (point `i` ↦ `r_i`). Elements with a repeated base point get zero.
pub fn expand_g_tables(fim: &Fim, coord_of_symbol: &[usize], r: &[u64], spec: &PolySpec) -> Result<GTables> {
    let ring = spec.ring;
    let k = fim.dim() as usize;
    if r.len() != k {
        return Err(Error::Polynomial(format!("need {k} ring elements r_i, got {}", r.len())));
    }
    spec.validate(fim.vocab().arity())?;
    let mut coord_of = Vec::with_capacity(fim.len());
    let mut tables = Vec::with_capacity(fim.len());
    for i in 0..fim.len() {
        let el = fim.element(i);
        let m = coord_of_symbol[el.sym];
        let vars: Vec<usize> = el.base.iter().map(|&a| a as usize - 1).collect();
        let mut distinct = vars.clone();
        distinct.dedup();
        let row = if distinct.len() < vars.len() {
            vec![0; spec.letters()]
        } else {
            (0..spec.letters())
                .map(|a| {
                    exact_support(&ring, spec.poly(a, m), &vars, k)
                        .iter()
                        .fold(0, |acc, mono| ring.add(acc, mono.eval(&ring, r)))
                })
                .collect()
        };
        coord_of.push(m);
        tables.push(row);
    }
    Ok(GTables { coords: spec.coords(), coord_of, tables })
}

impl GTables {
    /// `g(η)` per coordinate.
    pub fn g_value(&self, ring: &Zq, eta: &[u32]) -> Vec<u64> {
        let mut out = vec![0; self.coords];
        for (b, &letter) in eta.iter().enumerate() {
            let m = self.coord_of[b];
            out[m] = ring.add(out[m], self.tables[b][letter as usize]);
        }
        out
    }

    /// `y_L`: the contribution of the elements off the line's support.
    pub fn line_offset(&self, ring: &Zq, line: &Line) -> Vec<u64> {
        let mut out = vec![0; self.coords];
        for (b, &letter) in line.fixed.iter().enumerate() {
            if !line.in_support(b) {
                let m = self.coord_of[b];
                out[m] = ring.add(out[m], self.tables[b][letter as usize]);
            }
        }
        out
    }

    /// Checks `g(pt_L(α)) = y_L + p_α(z)` for every constant type `α` and
    /// returns `y_L`.
    pub fn check_identity(&self, space: &Space, spec: &PolySpec, r: &[u64], line: &Line) -> Result<Vec<u64>> {
        let ring = spec.ring;
        let y = self.line_offset(&ring, line);
        let z = line.supp.iter().fold(0, |acc, &a| ring.add(acc, r[a as usize - 1]));
        for a in 0..spec.letters() {
            let eta = line.pt(space, &vec![a as u32; space.vocab().len()]);
            let lhs = self.g_value(&ring, &eta);
            let rhs: Vec<u64> = (0..self.coords).map(|m| ring.add(y[m], spec.poly(a, m).eval(&ring, z))).collect();
            if lhs != rhs {
                return Err(Error::Polynomial(format!("g(pt_L({a})) = {lhs:?} but y + p(z) = {rhs:?}")));
            }
        }
        Ok(y)
    }
}

/// A colouring of `Z_q^coords`, indexed by `Σ y_m q^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingColouring {
    pub c: u64,
    pub coords: usize,
    table: Vec<u64>,
}

impl RingColouring {
    pub fn table(ring: &Zq, coords: usize, c: u64, table: Vec<u64>) -> Result<Self> {
        let want =
            ring.q().checked_pow(coords as u32).ok_or_else(|| Error::Polynomial("ring power too large".into()))?;
        if table.len() as u64 != want {
            return Err(Error::ColouringMismatch(format!("ring colouring has {} entries, want {want}", table.len())));
        }
        if let Some(bad) = table.iter().find(|&&x| x >= c) {
            return Err(Error::ColouringMismatch(format!("colour {bad} is not below c={c}")));
        }
        Ok(RingColouring { c, coords, table })
    }

    pub fn seeded(ring: &Zq, coords: usize, c: u64, seed: u64) -> Result<Self> {
        let c = c.max(1);
        let n = ring.q().checked_pow(coords as u32).ok_or_else(|| Error::Polynomial("ring power too large".into()))?;
        Self::table(ring, coords, c, (0..n).map(|i| splitmix64(seed, i) % c).collect())
    }

    pub fn colour(&self, ring: &Zq, y: &[u64]) -> u64 {
        let idx = y.iter().rev().fold(0u64, |acc, &v| acc * ring.q() + v);
        self.table[idx as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.table
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySolution {
    pub y: Vec<u64>,
    pub z: u64,
    /// Indices `ℓ` (1-based) with `z = Σ_{ℓ ∈ w} r_ℓ`.
    pub w: Vec<u32>,
    pub colour: u64,
    pub line: Line,
}

#[derive(Clone, Debug)]
pub struct PolyOutcome {
    pub solution: Option<PolySolution>,
    /// The primitive recursive bound for this vocabulary, alphabet and `c`.
    pub bound: Evaluation,
    /// Whether `k` reaches that bound, when it fit the budget.
    pub guaranteed: Option<bool>,
}

/// Searches for `y`, `w` with `{y + p_α(z) : α}` monochromatic under `d`.
pub fn solve_polyramsey(spec: &PolySpec, t: usize, d: &RingColouring, r: &[u64], budget: u64) -> Result<PolyOutcome> {
    let ring = spec.ring;
    if d.coords != spec.coords() {
        return Err(Error::ColouringMismatch(format!(
            "colouring has {} coordinates, polys have {}",
            d.coords,
            spec.coords()
        )));
    }
    spec.validate(t)?;
    let (vocab, coord_of_symbol) = coordinate_vocabulary(t, spec.coords())?;
    let vocab = Arc::new(vocab);
    let k = u32::try_from(r.len()).map_err(|_| Error::Precondition("too many ring elements".into()))?;
    if k == 0 {
        return Err(Error::Precondition("need at least one ring element r_i".into()));
    }
    let alpha = AlphabetSeq::uniform(&vocab, spec.letters() as u32)?;
    let fim = Arc::new(Fim::new(vocab.clone(), k, TupleMode::Set));
    let tables = expand_g_tables(&fim, &coord_of_symbol, r, spec)?;
    let space = Space::new(fim, alpha.clone())?;

    let mut colours = Vec::with_capacity(space.size() as usize);
    space.for_each_point(|_, eta| colours.push(d.colour(&ring, &tables.g_value(&ring, eta))));
    let dstar = Colouring::table(d.c, colours)?;

    let bound = f1_bound(&Shape::new(&vocab, &alpha), TupleMode::Set, d.c, Budget::default())?;
    let guaranteed = bound.exact().map(|b| *b <= k.into());

    let types = TypeSet::constant(&alpha);
    let solution = match find_mono_line(&space, &dstar, &types, budget)? {
        None => None,
        Some((line, colour)) => {
            let y = tables.check_identity(&space, spec, r, &line)?;
            let z = line.supp.iter().fold(0, |acc, &a| ring.add(acc, r[a as usize - 1]));
            for a in 0..spec.letters() {
                let v: Vec<u64> = (0..spec.coords()).map(|m| ring.add(y[m], spec.poly(a, m).eval(&ring, z))).collect();
                assert_eq!(d.colour(&ring, &v), colour, "extracted pattern is not monochromatic");
            }
            Some(PolySolution { y, z, w: line.supp.clone(), colour, line })
        }
    };
    Ok(PolyOutcome { solution, bound, guaranteed })
}
