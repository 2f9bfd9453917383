//! Vocabularies and full index models.
//!
//! A full index model ("fim") over a vocabulary is determined up to
//! isomorphism by its dimension and tuple mode, so models are represented
//! freely: every element *is* its name `(symbol, base tuple)`. Points are
//! `1..=k` and the element for point `a` is `(id, [a])`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of the distinguished `id` symbol in every vocabulary.
pub const ID: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite set of symmetric function symbols; `id` always sits at index 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
}

impl Vocabulary {
    /// Builds a vocabulary, inserting `id` when it is absent.
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out = vec![Symbol { name: "id".into(), arity: 1 }];
        let mut seen = HashSet::new();
        seen.insert("id".to_string());
        for (name, arity) in symbols {
            let name = name.into();
            if name == "id" {
                if arity != 1 {
                    return Err(Error::BadIdArity(arity));
                }
                continue;
            }
            if arity == 0 {
                return Err(Error::ZeroArity(name));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateSymbol(name));
            }
            out.push(Symbol { name, arity });
        }
        Ok(Vocabulary { symbols: out })
    }

    /// `{id, F2, ..., Ft}` with `arity(Fs) = s`.
    pub fn canonical(t: usize) -> Self {
        let mut symbols = vec![Symbol { name: "id".into(), arity: 1 }];
        for s in 2..=t.max(1) {
            symbols.push(Symbol { name: format!("F{s}"), arity: s });
        }
        Vocabulary { symbols }
    }

    pub fn unary() -> Self {
        Self::canonical(1)
    }

    /// Parses the line-oriented vocabulary format: one `name arity` per line
    /// (`;` also separates entries), or a single `canonical t`. `#` starts a
    /// comment. The `id 1` entry is implicit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut line_no = 0;
        for raw_line in text.lines() {
            line_no += 1;
            let line = raw_line.split('#').next().unwrap_or("");
            for part in line.split(';') {
                let words: Vec<&str> = part.split_whitespace().collect();
                if words.is_empty() {
                    continue;
                }
                if words.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `name arity`, got `{}`", part.trim()),
                    });
                }
                let n: usize = words[1].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("`{}` is not a nonnegative integer", words[1]),
                })?;
                if words[0] == "canonical" {
                    if n == 0 {
                        return Err(Error::Parse { line: line_no, msg: "canonical needs t >= 1".into() });
                    }
                    let canon = Vocabulary::canonical(n);
                    for s in canon.symbols.into_iter().skip(1) {
                        entries.push((line_no, s.name, s.arity));
                    }
                } else {
                    entries.push((line_no, words[0].to_string(), n));
                }
            }
        }
        let mut seen = HashSet::new();
        for (line, name, arity) in &entries {
            if name == "id" && *arity != 1 {
                return Err(Error::Parse { line: *line, msg: Error::BadIdArity(*arity).to_string() });
            }
            if *arity == 0 {
                return Err(Error::Parse { line: *line, msg: Error::ZeroArity(name.clone()).to_string() });
            }
            if name != "id" && !seen.insert(name.clone()) {
                return Err(Error::Parse { line: *line, msg: Error::DuplicateSymbol(name.clone()).to_string() });
            }
        }
        Vocabulary::new(entries.into_iter().map(|(_, n, a)| (n, a)))
    }

    /// Serializes back to the text format (without the implicit `id`).
    pub fn to_text(&self) -> String {
        self.symbols[1..].iter().map(|s| format!("{} {}", s.name, s.arity)).collect::<Vec<_>>().join("\n")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, sym: usize) -> &str {
        &self.symbols[sym].name
    }

    pub fn arity_of(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Maximal arity; at least 1 because of `id`.
    pub fn arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(1)
    }

    /// Number of symbols of each arity `1..=arity()`.
    pub fn signature(&self) -> Vec<usize> {
        let mut sig = vec![0; self.arity()];
        for s in &self.symbols {
            sig[s.arity - 1] += 1;
        }
        sig
    }

    pub fn is_monic(&self) -> bool {
        *self.signature().last().unwrap() == 1
    }

    /// The unique symbol of maximal arity, if the vocabulary is monic.
    pub fn max_symbol(&self) -> Option<usize> {
        let t = self.arity();
        let mut it = self.symbols.iter().enumerate().filter(|(_, s)| s.arity == t);
        let first = it.next().map(|(i, _)| i);
        if it.next().is_some() {
            None
        } else {
            first
        }
    }

    /// Symbol indices of the given arity.
    pub fn of_arity(&self, arity: usize) -> impl Iterator<Item = usize> + '_ {
        self.symbols.iter().enumerate().filter(move |(_, s)| s.arity == arity).map(|(i, _)| i)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols.iter().map(|s| format!("{}/{}", s.name, s.arity)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// How symbols of arity `r` are applied to points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TupleMode {
    /// Strictly increasing tuples only: elements are subsets of size `r`.
    #[default]
    Set,
    /// All nondecreasing tuples: repeated arguments give distinct elements.
    Multiset,
}

impl TupleMode {
    pub fn admits(self, tuple: &[u32]) -> bool {
        tuple.windows(2).all(|w| match self {
            TupleMode::Set => w[0] < w[1],
            TupleMode::Multiset => w[0] <= w[1],
        })
    }
}

impl fmt::Display for TupleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TupleMode::Set => "set",
            TupleMode::Multiset => "multiset",
        })
    }
}

impl FromStr for TupleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "set" => Ok(TupleMode::Set),
            "multiset" => Ok(TupleMode::Multiset),
            other => Err(Error::Parse { line: 0, msg: format!("unknown tuple mode `{other}`") }),
        }
    }
}

/// An element of a fim: a symbol applied to a sorted tuple of points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub sym: usize,
    pub base: Vec<u32>,
}

impl Element {
    pub fn point(a: u32) -> Self {
        Element { sym: ID, base: vec![a] }
    }

    pub fn is_point(&self) -> bool {
        self.sym == ID
    }

    /// How many base positions hold the point `a`.
    pub fn multiplicity(&self, a: u32) -> usize {
        self.base.iter().filter(|&&b| b == a).count()
    }

    pub fn involves(&self, a: u32) -> bool {
        self.base.contains(&a)
    }

    /// Distinct base points, ascending.
    pub fn base_set(&self) -> Vec<u32> {
        let mut v = self.base.clone();
        v.dedup();
        v
    }

    pub fn render(&self, vocab: &Vocabulary) -> String {
        if self.is_point() {
            self.base[0].to_string()
        } else {
            let args: Vec<String> = self.base.iter().map(|a| a.to_string()).collect();
            format!("{}({})", vocab.name(self.sym), args.join(","))
        }
    }
}

/// All admissible `r`-tuples over points `lo..=hi`, lexicographic.
pub fn tuples_in(lo: u32, hi: u32, r: usize, mode: TupleMode) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if r == 0 {
        out.push(Vec::new());
        return out;
    }
    if lo > hi {
        return out;
    }
    let mut cur = Vec::with_capacity(r);
    fn rec(lo: u32, hi: u32, r: usize, mode: TupleMode, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let start = match (cur.last(), mode) {
            (None, _) => lo,
            (Some(&x), TupleMode::Set) => x + 1,
            (Some(&x), TupleMode::Multiset) => x,
        };
        for a in start..=hi {
            cur.push(a);
            rec(lo, hi, r, mode, cur, out);
            cur.pop();
        }
    }
    rec(lo, hi, r, mode, &mut cur, &mut out);
    out
}

pub fn tuples(k: u32, r: usize, mode: TupleMode) -> Vec<Vec<u32>> {
    tuples_in(1, k, r, mode)
}

/// A full index model.
#[derive(Clone, Debug)]
pub struct Fim {
    vocab: Arc<Vocabulary>,
    dim: u32,
    mode: TupleMode,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
}

impl PartialEq for Fim {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab && self.dim == other.dim && self.mode == other.mode
    }
}

impl Fim {
    /// Builds the free fim of dimension `k`. Elements are listed points
    /// first (ascending), then the rest sorted by `(symbol index, base)`.
    pub fn new(vocab: Arc<Vocabulary>, k: u32, mode: TupleMode) -> Self {
        let mut elements: Vec<Element> = (1..=k).map(Element::point).collect();
        for (sym, s) in vocab.symbols().iter().enumerate().skip(1) {
            for base in tuples(k, s.arity, mode) {
                elements.push(Element { sym, base });
            }
        }
        Self::from_parts(vocab, k, mode, elements)
    }

    fn from_parts(vocab: Arc<Vocabulary>, dim: u32, mode: TupleMode, elements: Vec<Element>) -> Self {
        let index = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Fim { vocab, dim, mode, elements, index }
    }

    /// A fim whose universe is an explicit, closed list of elements over
    /// points `1..=dim` (used for collapse targets that mix modes).
    pub fn with_elements(vocab: Arc<Vocabulary>, dim: u32, mode: TupleMode, mut elements: Vec<Element>) -> Self {
        elements.sort_by(|a, b| (!a.is_point(), a.sym, &a.base).cmp(&(!b.is_point(), b.sym, &b.base)));
        elements.dedup();
        Self::from_parts(vocab, dim, mode, elements)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_arc(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn mode(&self) -> TupleMode {
        self.mode
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn point_index(&self, a: u32) -> usize {
        (a - 1) as usize
    }

    pub fn points(&self) -> impl Iterator<Item = u32> {
        1..=self.dim
    }

    /// `F_{M,b}`.
    pub fn symbol_of(&self, i: usize) -> usize {
        self.elements[i].sym
    }

    /// `base_M(b)` as a set.
    pub fn base(&self, i: usize) -> Vec<u32> {
        self.elements[i].base_set()
    }

    /// `base_{M,j}(b)` for `1 <= j <= arity`.
    pub fn base_at(&self, i: usize, j: usize) -> u32 {
        self.elements[i].base[j - 1]
    }

    pub fn render(&self, i: usize) -> String {
        self.elements[i].render(&self.vocab)
    }

    fn check_points(&self, points: &[u32]) -> Result<()> {
        for &a in points {
            if a == 0 || a > self.dim {
                return Err(Error::PointOutOfRange(a));
            }
        }
        Ok(())
    }

    /// `cl_M(A)`: every element whose base lies inside `A`, as sorted
    /// element indices.
    pub fn closure(&self, points: &[u32]) -> Result<Vec<usize>> {
        self.check_points(points)?;
        let mask = self.point_mask(points);
        Ok((0..self.elements.len()).filter(|&i| self.elements[i].base.iter().all(|&a| mask[a as usize])).collect())
    }

    /// Membership mask of `cl_M(A)` over element indices.
    pub fn closure_mask(&self, points: &[u32]) -> Result<Vec<bool>> {
        self.check_points(points)?;
        let mask = self.point_mask(points);
        Ok(self.elements.iter().map(|e| e.base.iter().all(|&a| mask[a as usize])).collect())
    }

    fn point_mask(&self, points: &[u32]) -> Vec<bool> {
        let mut mask = vec![false; self.dim as usize + 1];
        for &a in points {
            mask[a as usize] = true;
        }
        mask
    }

    /// Extends a point map to the unique element map that commutes with
    /// every symbol (`Hom` when order preserving, `Hm` otherwise).
    /// `f[a - 1]` is the image of point `a`.
    pub fn extend_hom(&self, f: &[u32], target: &Fim, order_preserving: bool) -> Result<Vec<usize>> {
        if f.len() != self.dim as usize {
            return Err(Error::PointMapLength { got: f.len(), want: self.dim as usize });
        }
        if *self.vocab != *target.vocab {
            return Err(Error::VocabularyMismatch);
        }
        for &b in f {
            if b == 0 || b > target.dim {
                return Err(Error::PointOutOfRange(b));
            }
        }
        if order_preserving {
            for a in 1..self.dim as usize {
                if f[a - 1] > f[a] {
                    return Err(Error::NotOrderPreserving(a as u32, a as u32 + 1));
                }
            }
        }
        let mut out = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let mut img: Vec<u32> = e.base.iter().map(|&a| f[a as usize - 1]).collect();
            img.sort_unstable();
            let target_elem = Element { sym: e.sym, base: img };
            match target.index_of(&target_elem) {
                Some(j) => out.push(j),
                None => {
                    return Err(Error::InadmissibleImage {
                        element: e.render(&self.vocab),
                        reason: format!(
                            "{} needs repeated arguments, target is in {} mode",
                            target_elem.render(&self.vocab),
                            target.mode
                        ),
                    })
                }
            }
        }
        Ok(out)
    }
}

fn binom_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of admissible `r`-tuples over `x` points.
pub fn tuple_count(x: u64, r: usize, mode: TupleMode) -> u128 {
    match mode {
        TupleMode::Set => binom_u128(x as u128, r as u128),
        TupleMode::Multiset => {
            if x == 0 {
                u128::from(r == 0)
            } else {
                binom_u128(x as u128 + r as u128 - 1, r as u128)
            }
        }
    }
}

/// The counting polynomial: `|cl_M(u)|` for any `|u| = x`.
pub fn p_tau(vocab: &Vocabulary, x: u64, mode: TupleMode) -> u128 {
    vocab.symbols().iter().map(|s| tuple_count(x, s.arity, mode)).sum()
}

/// Number of elements of the `k`-dimensional fim.
pub fn element_count(vocab: &Vocabulary, k: u64, mode: TupleMode) -> u128 {
    p_tau(vocab, k, mode)
}

/// One symbol `F_{a1,a2}` of a derived vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    /// Symbol of the base vocabulary.
    pub symbol: usize,
    /// Parameters taken from the first block of points.
    pub left: Vec<u32>,
    /// Parameters taken from the last block of points.
    pub right: Vec<u32>,
    pub arity: usize,
}

/// `tau_{M,A1,A2}` for `M` of dimension `k0 + k1`, `A1` the first `k0`
/// points and `A2` the last `k1`.
#[derive(Clone, Debug)]
pub struct DerivedVocabulary {
    pub base: Arc<Vocabulary>,
    pub k0: u32,
    pub k1: u32,
    pub mode: TupleMode,
    /// `pieces[i]` describes symbol `i` of `vocab`.
    pub pieces: Vec<Piece>,
    pub vocab: Arc<Vocabulary>,
}

impl DerivedVocabulary {
    /// The base symbol a derived symbol projects to.
    pub fn proj(&self, sym: usize) -> usize {
        self.pieces[sym].symbol
    }

    /// Count of derived symbols per arity.
    pub fn signature(&self) -> Vec<usize> {
        self.vocab.signature()
    }

    /// Derived alphabet sizes: each piece inherits its base symbol's alphabet.
    pub fn lift_alphabet(&self, sizes: &[u32]) -> Vec<u32> {
        self.pieces.iter().map(|p| sizes[p.symbol]).collect()
    }

    /// Drops the base symbol `sym` itself (the piece with empty parameters).
    pub fn without_base_symbol(&self, sym: usize) -> DerivedVocabulary {
        let pieces: Vec<Piece> = self
            .pieces
            .iter()
            .filter(|p| !(p.symbol == sym && p.left.is_empty() && p.right.is_empty()))
            .cloned()
            .collect();
        let vocab = Vocabulary {
            symbols: pieces.iter().map(|p| Symbol { name: piece_name(&self.base, p), arity: p.arity }).collect(),
        };
        DerivedVocabulary { pieces, vocab: Arc::new(vocab), ..self.clone() }
    }
}

fn piece_name(base: &Vocabulary, p: &Piece) -> String {
    if p.left.is_empty() && p.right.is_empty() {
        return base.name(p.symbol).to_string();
    }
    let l: Vec<String> = p.left.iter().map(|a| a.to_string()).collect();
    let r: Vec<String> = p.right.iter().map(|a| a.to_string()).collect();
    format!("{}[{}|{}]", base.name(p.symbol), l.join(","), r.join(","))
}

/// Builds `tau^{[k0,k1]}`: one symbol `F_{a1,a2}` per base symbol `F`,
/// admissible `a1` from the first `k0` points and `a2` from the last `k1`
/// points with `lg(a1) + lg(a2) < arity(F)`. The pieces with empty
/// parameters come first, in base order, so the result extends the base.
pub fn derive_vocabulary(vocab: &Arc<Vocabulary>, k0: u32, k1: u32, mode: TupleMode) -> DerivedVocabulary {
    let mut pieces: Vec<Piece> = (0..vocab.len())
        .map(|symbol| Piece { symbol, left: vec![], right: vec![], arity: vocab.arity_of(symbol) })
        .collect();
    let mut extra: BTreeMap<(usize, Vec<u32>, Vec<u32>), usize> = BTreeMap::new();
    for symbol in 0..vocab.len() {
        let r = vocab.arity_of(symbol);
        for i in 0..r {
            for j in 0..(r - i) {
                if i + j == 0 {
                    continue;
                }
                for left in tuples_in(1, k0, i, mode) {
                    for right in tuples_in(k0 + 1, k0 + k1, j, mode) {
                        extra.insert((symbol, left.clone(), right), r - i - j);
                    }
                }
            }
        }
    }
    pieces.extend(extra.into_iter().map(|((symbol, left, right), arity)| Piece { symbol, left, right, arity }));
    let derived =
        Vocabulary { symbols: pieces.iter().map(|p| Symbol { name: piece_name(vocab, p), arity: p.arity }).collect() };
    DerivedVocabulary { base: vocab.clone(), k0, k1, mode, pieces, vocab: Arc::new(derived) }
}
