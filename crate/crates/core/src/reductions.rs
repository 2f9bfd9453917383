//! The constructive steps of the partition proof, each with a lift that
//! carries a monochromatic object of a derived space back to the original.
//!
//! * [`ArityReduction`] halves the arity: elements whose base tuple splits
//!   into runs of length at least 2 are renamed by a smaller vocabulary.
//! * [`CollapseStep`] squeezes a middle block of points to one point and
//!   moves the rest into a derived vocabulary with many colours.
//! * [`FixUnary`] freezes every non-unary element at a fixed type.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{derive_vocabulary, DerivedVocabulary, Element, Fim, TupleMode, Vocabulary, ID};
use crate::search::{find_mono_line, verify_mono_line};
use crate::space::{AlphabetSeq, Colouring, LambdaType, Line, Space, Subspace, TypeSet};

/// Compositions of `r` into parts of size at least 2, lexicographic.
pub fn compositions_min2(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 2..=r {
        let rest = r - first;
        if rest == 1 {
            continue;
        }
        for mut tail in compositions_min2(rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// The arity-halving vocabulary `τ*` of symbols `G_{F,e}`, one per symbol
/// `F` of arity above 1 and convex equivalence `e` on its argument places
/// with every class of size at least 2. The single-class relation of the
/// chosen maximal symbol `H` becomes `id`.
#[derive(Clone, Debug)]
pub struct ArityReduction {
    pub source: Arc<Vocabulary>,
    pub alpha: AlphabetSeq,
    pub target: Arc<Vocabulary>,
    pub alpha_star: AlphabetSeq,
    /// `(F, class sizes)` for each target symbol.
    pub generators: Vec<(usize, Vec<usize>)>,
    lookup: HashMap<(usize, Vec<usize>), usize>,
}

impl ArityReduction {
    pub fn new(source: &Arc<Vocabulary>, alpha: &AlphabetSeq) -> Result<Self> {
        let t = source.arity();
        if t <= 1 {
            return Err(Error::Precondition("arity reduction needs a symbol of arity above 1".into()));
        }
        let h = source.max_symbol().unwrap_or_else(|| source.of_arity(t).next().unwrap());
        let mut generators = vec![(h, vec![t])];
        let mut names = Vec::new();
        let mut sizes = vec![alpha.size(h)];
        for f in 0..source.len() {
            let r = source.arity_of(f);
            if r <= 1 {
                continue;
            }
            for comp in compositions_min2(r) {
                if f == h && comp.len() == 1 {
                    continue;
                }
                let parts: Vec<String> = comp.iter().map(|x| x.to_string()).collect();
                names.push((format!("G[{};{}]", source.name(f), parts.join("+")), comp.len()));
                sizes.push(alpha.size(f));
                generators.push((f, comp));
            }
        }
        let target = Arc::new(Vocabulary::new(names)?);
        let alpha_star = AlphabetSeq::new(&target, sizes)?;
        let lookup = generators.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        Ok(ArityReduction { source: source.clone(), alpha: alpha.clone(), target, alpha_star, generators, lookup })
    }

    /// The target type induced by a source type: `q(G_{F,e}) = p(F)`.
    pub fn type_map(&self, p: &[u32]) -> LambdaType {
        self.generators.iter().map(|(f, _)| p[*f]).collect()
    }

    /// The element map `g`, defined on elements whose base tuple splits into
    /// runs of equal points of length at least 2.
    pub fn g_map(&self, m: &Fim, m_star: &Fim) -> Vec<Option<usize>> {
        m.elements()
            .iter()
            .map(|e| {
                if self.source.arity_of(e.sym) <= 1 {
                    return None;
                }
                let mut runs = Vec::new();
                let mut distinct = Vec::new();
                for (i, &a) in e.base.iter().enumerate() {
                    if i > 0 && e.base[i - 1] == a {
                        *runs.last_mut().unwrap() += 1;
                    } else {
                        runs.push(1usize);
                        distinct.push(a);
                    }
                }
                if runs.iter().any(|&r| r < 2) {
                    return None;
                }
                let sym = *self.lookup.get(&(e.sym, runs))?;
                m_star.index_of(&Element { sym, base: distinct })
            })
            .collect()
    }

    /// Binds the reduction to a multiset-mode source space; the target space
    /// has the same dimension.
    pub fn bind(&self, v: &Space, star_mode: TupleMode) -> Result<BoundArity> {
        if v.fim().mode() != TupleMode::Multiset {
            return Err(Error::Precondition("arity reduction needs a multiset-mode space".into()));
        }
        if *v.vocab() != *self.source || *v.alpha() != self.alpha {
            return Err(Error::VocabularyMismatch);
        }
        let v_star = Space::build(self.target.clone(), v.fim().dim(), star_mode, self.alpha_star.clone())?;
        let g = self.g_map(v.fim(), v_star.fim());
        Ok(BoundArity { red: self.clone(), v: v.clone(), v_star, g })
    }
}

/// An [`ArityReduction`] tied to concrete spaces `V` and `V*`.
#[derive(Clone, Debug)]
pub struct BoundArity {
    pub red: ArityReduction,
    pub v: Space,
    pub v_star: Space,
    pub g: Vec<Option<usize>>,
}

impl BoundArity {
    /// The point of `V` that copies `ν` through `g` and is 0 off `Dom(g)`.
    pub fn pull_back(&self, nu: &[u32]) -> Vec<u32> {
        self.g.iter().map(|gi| gi.map_or(0, |j| nu[j])).collect()
    }

    /// `d*(ν) = d(η)` for any `η` agreeing with `ν` through `g`; well
    /// defined when `d` is `(dim, 1)`-base-invariant.
    pub fn colouring(&self, d: &Colouring) -> Colouring {
        let this = self.clone();
        let d = d.clone();
        Colouring::callback(d.colours(), move |nu| d.colour_of(&this.v, &this.pull_back(nu)))
    }

    /// Reflects a line of `V*` to a line of `V` on the same support.
    pub fn lift_line(&self, l_star: &Line) -> Result<Line> {
        let mut fixed = vec![0u32; self.v.fim().len()];
        for (i, gi) in self.g.iter().enumerate() {
            if let Some(j) = gi {
                fixed[i] = l_star.fixed[*j];
            }
        }
        Line::new(&self.v, l_star.supp.clone(), fixed)
    }

    /// Checks `d(pt_L(p)) = d*(pt_{L*}(q_p))` for every source type.
    pub fn check_lift(&self, d: &Colouring, l_star: &Line, line: &Line) -> bool {
        let d_star = self.colouring(d);
        TypeSet::full(&self.red.alpha).types().iter().all(|p| {
            let q = self.red.type_map(p);
            d.colour_of(&self.v, &line.pt(&self.v, p)) == d_star.colour_of(&self.v_star, &l_star.pt(&self.v_star, &q))
        })
    }
}

/// Outcome of a search that runs through a reduction.
#[derive(Clone, Debug)]
pub enum LiftOutcome {
    /// The inner search found a monochromatic object and the lift is a
    /// monochromatic line of the original space.
    Lifted(Line),
    /// The inner search found a monochromatic object but the lift is not
    /// monochromatic; only possible when the colouring lacks the required
    /// invariance.
    Broken(Line),
    /// The inner search found nothing.
    NoInner,
}

/// Finds a `d*`-monochromatic line of `V*` and lifts it.
pub fn arity_reduce_and_lift(bound: &BoundArity, d: &Colouring, budget: u64) -> Result<LiftOutcome> {
    let d_star = bound.colouring(d);
    let Some((l_star, _)) = find_mono_line(&bound.v_star, &d_star, &TypeSet::full(bound.v_star.alpha()), budget)?
    else {
        return Ok(LiftOutcome::NoInner);
    };
    let line = bound.lift_line(&l_star)?;
    Ok(match verify_mono_line(&bound.v, d, &TypeSet::full(bound.v.alpha()), &line) {
        Some(_) => LiftOutcome::Lifted(line),
        None => LiftOutcome::Broken(line),
    })
}

/// Excludes the `H`-elements with base inside the middle block and pins them
/// to `α*` instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exclusion {
    pub h: usize,
    pub alpha_star: u32,
}

/// The collapse construction for `M` of dimension `k = k0 + k1 - 1`: points
/// split into `w0` (first `k0 - ℓ - 1`), `w1` (next `k1`) and `w2` (last
/// `ℓ`). `K = cl(w0 ∪ w2)` keeps its letters; the rest becomes the space of
/// a derived-vocabulary fim `N` on `w1` whose colours record the whole colour
/// table over `Space(K)`.
#[derive(Clone, Debug)]
pub struct CollapseStep {
    pub v: Space,
    pub ell: u32,
    pub k0: u32,
    pub k1: u32,
    pub w0: Vec<u32>,
    pub w1: Vec<u32>,
    pub w2: Vec<u32>,
    pub exclusion: Option<Exclusion>,
    pub derived: DerivedVocabulary,
    /// `V* = Space(N)`.
    pub v_star: Space,
    /// `M`-index of each element of `N`.
    pub n_to_m: Vec<usize>,
    /// `M`-indices of `K`, ascending.
    pub k_elements: Vec<usize>,
    /// `M`-indices of the excluded elements `A*`.
    pub excluded: Vec<usize>,
    pub k_space: Space,
    pub c: u64,
    /// `c^{|Space(K)|}`.
    pub c_star: u64,
}

impl CollapseStep {
    pub fn new(v: &Space, ell: u32, k0: u32, exclusion: Option<Exclusion>, c: u64) -> Result<Self> {
        let m = v.fim();
        if m.mode() != TupleMode::Multiset {
            return Err(Error::Precondition("the collapse step needs a multiset-mode space".into()));
        }
        let k = m.dim();
        if k0 <= ell {
            return Err(Error::Precondition(format!("need k0 > ℓ, got k0={k0}, ℓ={ell}")));
        }
        if k + 1 < k0 + 1 || k < k0 {
            return Err(Error::Precondition(format!("dimension {k} is below k0={k0}")));
        }
        let k1 = k + 1 - k0;
        let n0 = k0 - ell - 1;
        let w0: Vec<u32> = (1..=n0).collect();
        let w1: Vec<u32> = (n0 + 1..=n0 + k1).collect();
        let w2: Vec<u32> = (n0 + k1 + 1..=k).collect();
        let vocab = m.vocab_arc().clone();
        if let Some(ex) = exclusion {
            if Some(ex.h) != vocab.max_symbol() {
                return Err(Error::NotMonic(vocab.to_string()));
            }
            if ex.alpha_star >= v.alpha().size(ex.h) {
                return Err(Error::LetterOutOfRange { symbol: vocab.name(ex.h).to_string(), letter: ex.alpha_star });
            }
        }
        let mut derived = derive_vocabulary(&vocab, n0, ell, TupleMode::Multiset);
        if let Some(ex) = exclusion {
            derived = derived.without_base_symbol(ex.h);
        }
        let alpha_star = AlphabetSeq::new(&derived.vocab, derived.lift_alphabet(v.alpha().sizes()))?;
        let n_fim = Arc::new(Fim::new(derived.vocab.clone(), k1, TupleMode::Multiset));
        // derived right parameters number w2 as n0+1..n0+ell; M numbers them after w1
        let shift_right = k1;
        let mut n_to_m = Vec::with_capacity(n_fim.len());
        for e in n_fim.elements() {
            let piece = &derived.pieces[e.sym];
            let mut base: Vec<u32> = piece.left.clone();
            base.extend(e.base.iter().map(|&b| b + n0));
            base.extend(piece.right.iter().map(|&b| b + shift_right));
            let me = Element { sym: piece.symbol, base };
            n_to_m.push(m.index_of(&me).expect("derived element exists in M"));
        }
        let k_mask = m.closure_mask(&w0.iter().chain(&w2).copied().collect::<Vec<_>>())?;
        let k_elements: Vec<usize> = (0..m.len()).filter(|&i| k_mask[i]).collect();
        let excluded: Vec<usize> = match exclusion {
            Some(ex) => (0..m.len())
                .filter(|&i| m.symbol_of(i) == ex.h && m.element(i).base.iter().all(|a| w1.contains(a)))
                .collect(),
            None => Vec::new(),
        };
        debug_assert_eq!(n_to_m.len() + k_elements.len() + excluded.len(), m.len());
        let k_fim = Fim::with_elements(
            vocab,
            k,
            TupleMode::Multiset,
            k_elements.iter().map(|&i| m.element(i).clone()).collect(),
        );
        let k_space = Space::new(Arc::new(k_fim), v.alpha().clone())?;
        let c_star = u32::try_from(k_space.size())
            .ok()
            .and_then(|e| c.checked_pow(e))
            .ok_or_else(|| Error::Precondition(format!("c* = {c}^{} does not fit in 64 bits", k_space.size())))?;
        let v_star = Space::new(n_fim, alpha_star)?;
        Ok(CollapseStep {
            v: v.clone(),
            ell,
            k0,
            k1,
            w0,
            w1,
            w2,
            exclusion,
            derived,
            v_star,
            n_to_m,
            k_elements,
            excluded,
            k_space,
            c,
            c_star,
        })
    }

    /// The point `η ∪ ν ∪ ϱ` of `V`.
    pub fn join(&self, eta: &[u32], nu: &[u32]) -> Vec<u32> {
        let mut out = vec![0u32; self.v.fim().len()];
        for (i, &j) in self.n_to_m.iter().enumerate() {
            out[j] = eta[i];
        }
        for (i, &j) in self.k_elements.iter().enumerate() {
            out[j] = nu[i];
        }
        if let Some(ex) = self.exclusion {
            for &j in &self.excluded {
                out[j] = ex.alpha_star;
            }
        }
        out
    }

    /// `d*(η)`: the colour table `ν ↦ d(η ∪ ν ∪ ϱ)` over `Space(K)`, encoded
    /// as a base-`c` numeral with the first `ν` least significant.
    pub fn star_colouring(&self, d: &Colouring) -> Colouring {
        let this = self.clone();
        let d = d.clone();
        Colouring::callback(self.c_star, move |eta| {
            let mut code = 0u64;
            let mut place = 1u64;
            this.k_space.for_each_point(|_, nu| {
                code += d.colour_of(&this.v, &this.join(eta, nu)) * place;
                place = place.wrapping_mul(this.c);
            });
            code
        })
    }

    /// The subspace `S = range(h)` of dimension `k0` built from a line `L*` of
    /// `V*`: the points of `w0` and `w2` stay singleton blocks, the support
    /// of `L*` collapses to one block, and the rest is frozen by `L*` (and
    /// `α*` on excluded elements).
    pub fn subspace(&self, l_star: &Line) -> Result<Subspace> {
        let mut blocks: Vec<Vec<u32>> = self.w0.iter().map(|&a| vec![a]).collect();
        blocks.push(l_star.supp.iter().map(|&b| b + self.w0.len() as u32).collect());
        blocks.extend(self.w2.iter().map(|&a| vec![a]));
        let mut fixed = vec![0u32; self.v.fim().len()];
        for (i, &j) in self.n_to_m.iter().enumerate() {
            if !l_star.in_support(i) {
                fixed[j] = l_star.fixed[i];
            }
        }
        if let Some(ex) = self.exclusion {
            for &j in &self.excluded {
                fixed[j] = ex.alpha_star;
            }
        }
        let s = Subspace::convex(&self.v, blocks, fixed)?;
        if s.target().len() != crate::model::element_count(self.v.vocab(), self.k0 as u64, TupleMode::Multiset) as usize
        {
            return Err(Error::InvalidSubspace(
                "collapsed subspace does not cover the full model of dimension k0".into(),
            ));
        }
        Ok(s)
    }

    /// `d° = d ∘ h` on `U = Space(K⁺)`.
    pub fn inner_colouring(&self, s: &Subspace, d: &Colouring) -> Colouring {
        let s = s.clone();
        let v = self.v.clone();
        let d = d.clone();
        Colouring::callback(d.colours(), move |rho| d.colour_of(&v, &s.pt(rho)))
    }

    /// `L = h(L°)` as a line of `V`.
    pub fn lift_line(&self, s: &Subspace, l_circ: &Line) -> Result<Line> {
        let mut supp = Vec::new();
        for &a in &l_circ.supp {
            supp.extend(s.blocks[(a - 1) as usize].iter().copied());
        }
        let mut fixed = s.fixed.clone();
        for (i, f) in fixed.iter_mut().enumerate() {
            if let Some(j) = s.collapse_of(i) {
                *f = if l_circ.in_support(j) { 0 } else { l_circ.fixed[j] };
            }
        }
        Line::new(&self.v, supp, fixed)
    }
}

/// Everything produced by one collapse-and-lift run.
#[derive(Clone, Debug)]
pub struct CollapseRun {
    pub l_star: Line,
    pub subspace: Subspace,
    pub l_circ: Line,
    pub line: Line,
    pub mono: bool,
}

/// Finds a `d*`-monochromatic line `L*`, builds `h`, finds a
/// `d°`-monochromatic line `L°` of `U` and lifts it. `None` when either
/// inner search fails.
pub fn collapse_and_lift(step: &CollapseStep, d: &Colouring, budget: u64) -> Result<Option<CollapseRun>> {
    let d_star = step.star_colouring(d);
    let Some((l_star, _)) = find_mono_line(&step.v_star, &d_star, &TypeSet::full(step.v_star.alpha()), budget)? else {
        return Ok(None);
    };
    let subspace = step.subspace(&l_star)?;
    let d_circ = step.inner_colouring(&subspace, d);
    let u = subspace.target_space();
    let Some((l_circ, _)) = find_mono_line(u, &d_circ, &TypeSet::full(u.alpha()), budget)? else {
        return Ok(None);
    };
    let line = step.lift_line(&subspace, &l_circ)?;
    let mono = verify_mono_line(&step.v, d, &TypeSet::full(step.v.alpha()), &line).is_some();
    Ok(Some(CollapseRun { l_star, subspace, l_circ, line, mono }))
}

/// Freezing the non-unary elements: `V*` is the space of the unary reduct and
/// `h` fills every other element with the letter `p*(F)`.
#[derive(Clone, Debug)]
pub struct FixUnary {
    pub v: Space,
    pub p_star: LambdaType,
    pub v_star: Space,
    /// `M`-index of each element of the reduct.
    pub star_to_m: Vec<usize>,
    /// Source symbol of each reduct symbol.
    pub symbol_map: Vec<usize>,
}

impl FixUnary {
    pub fn new(v: &Space, p_star: LambdaType) -> Result<Self> {
        TypeSet::new(v.alpha(), vec![p_star.clone()])?;
        let vocab = v.vocab();
        let symbol_map: Vec<usize> = vocab.of_arity(1).collect();
        let tau_star =
            Arc::new(Vocabulary::new(symbol_map.iter().skip(1).map(|&s| (vocab.name(s).to_string(), 1usize)))?);
        let alpha_star = AlphabetSeq::new(&tau_star, symbol_map.iter().map(|&s| v.alpha().size(s)).collect())?;
        let m_star = Fim::new(tau_star, v.fim().dim(), v.fim().mode());
        let star_to_m = m_star
            .elements()
            .iter()
            .map(|e| v.fim().index_of(&Element { sym: symbol_map[e.sym], base: e.base.clone() }).unwrap())
            .collect();
        let v_star = Space::new(Arc::new(m_star), alpha_star)?;
        debug_assert_eq!(symbol_map[0], ID);
        Ok(FixUnary { v: v.clone(), p_star, v_star, star_to_m, symbol_map })
    }

    /// `h(ν)`.
    pub fn h(&self, nu: &[u32]) -> Vec<u32> {
        let fim = self.v.fim();
        let mut out: Vec<u32> = (0..fim.len()).map(|i| self.p_star[fim.symbol_of(i)]).collect();
        for (i, &j) in self.star_to_m.iter().enumerate() {
            out[j] = nu[i];
        }
        out
    }

    /// `d* = d ∘ h`.
    pub fn colouring(&self, d: &Colouring) -> Colouring {
        let this = self.clone();
        let d = d.clone();
        Colouring::callback(d.colours(), move |nu| d.colour_of(&this.v, &this.h(nu)))
    }

    /// The subspace `S'` of `V` with the blocks of `S*`, unary letters frozen
    /// as in `S*` and non-unary letters off the closure frozen at `p*`.
    pub fn lift_subspace(&self, s_star: &Subspace) -> Result<Subspace> {
        let fim = self.v.fim();
        let mut fixed: Vec<u32> = (0..fim.len()).map(|i| self.p_star[fim.symbol_of(i)]).collect();
        for (i, &j) in self.star_to_m.iter().enumerate() {
            fixed[j] = s_star.fixed[i];
        }
        Subspace::new(&self.v, s_star.blocks.clone(), s_star.coords.clone(), fixed)
    }

    /// Checks, for every line `L ⊆ S'` whose points lie in `range(h)`, that
    /// `pt_L(p*)` and `pt_L(q)` share a colour whenever `q` agrees with `p*`
    /// above arity 1. Returns the number of lines checked, or the first
    /// offending line.
    pub fn check_pairs(&self, s: &Subspace, d: &Colouring) -> std::result::Result<usize, Line> {
        let vocab = self.v.vocab();
        let fim = self.v.fim();
        let qs: Vec<LambdaType> = TypeSet::full(self.v.alpha())
            .types()
            .iter()
            .filter(|q| (0..vocab.len()).all(|f| vocab.arity_of(f) == 1 || q[f] == self.p_star[f]))
            .cloned()
            .collect();
        let in_range = |l: &[u32]| {
            (0..fim.len()).all(|i| vocab.arity_of(fim.symbol_of(i)) == 1 || l[i] == self.p_star[fim.symbol_of(i)])
        };
        let mut checked = 0;
        for line in crate::space::enumerate_lines(&self.v) {
            let base = line.pt(&self.v, &self.p_star);
            if !in_range(&base) || !s.contains(&base) {
                continue;
            }
            let pts: Vec<Vec<u32>> = qs.iter().map(|q| line.pt(&self.v, q)).collect();
            if !pts.iter().all(|p| s.contains(p)) {
                continue;
            }
            let c0 = d.colour_of(&self.v, &base);
            if pts.iter().any(|p| d.colour_of(&self.v, p) != c0) {
                return Err(line);
            }
            checked += 1;
        }
        Ok(checked)
    }
}
