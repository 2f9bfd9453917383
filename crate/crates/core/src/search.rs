//! Exhaustive search for monochromatic lines and subspaces, and exact
//! partition numbers at desk scale.
//!
//! Every search is deterministic: candidates are examined in a fixed
//! canonical order and the first hit in that order is returned, whatever the
//! number of worker threads. Budgets cap the number of candidates examined
//! and are reported, never silently truncated.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Fim, TupleMode, Vocabulary};
use crate::space::{line_frames, min_support, AlphabetSeq, Colouring, Line, Space, Subspace, TypeSet};

/// Searches groups of candidates in order, each group in parallel, and
/// returns the first hit by global position among the first `budget`
/// candidates.
fn first_hit<T: Send>(counts: &[u64], budget: u64, pred: impl Fn(usize, u64) -> Option<T> + Sync) -> Result<Option<T>> {
    let mut examined = 0u64;
    for (g, &count) in counts.iter().enumerate() {
        let take = count.min(budget - examined);
        if let Some(hit) = (0..take).into_par_iter().find_map_first(|j| pred(g, j)) {
            return Ok(Some(hit));
        }
        examined += take;
        if take < count {
            return Err(Error::Budget { examined });
        }
    }
    Ok(None)
}

fn constant_on(d: &Colouring, space: &Space, points: &[u64]) -> Option<u64> {
    let first = d.colour(space, points[0]);
    points[1..].iter().all(|&p| d.colour(space, p) == first).then_some(first)
}

/// The first `d`-monochromatic `𝔭`-line in enumeration order, with its
/// colour. At most `budget` lines are examined.
pub fn find_mono_line(space: &Space, d: &Colouring, types: &TypeSet, budget: u64) -> Result<Option<(Line, u64)>> {
    d.check_space(space)?;
    let frames = line_frames(space);
    let counts: Vec<u64> = frames.iter().map(|f| f.count).collect();
    let hit = first_hit(&counts, budget, |g, j| {
        let pts = frames[g].points_of(space, j, types);
        constant_on(d, space, &pts).map(|c| (frames[g].line(j), c))
    })?;
    if let Some((line, colour)) = &hit {
        assert!(verify_mono_line(space, d, types, line) == Some(*colour), "returned line failed re-verification");
    }
    Ok(hit)
}

/// Recomputes every `pt_L(p)` letter by letter and returns the common colour.
pub fn verify_mono_line(space: &Space, d: &Colouring, types: &TypeSet, line: &Line) -> Option<u64> {
    let mut colour = None;
    for p in types.types() {
        let c = d.colour_of(space, &line.pt(space, p));
        match colour {
            None => colour = Some(c),
            Some(x) if x != c => return None,
            _ => {}
        }
    }
    colour
}

/// Every colour of the subspace's points agrees; returns that colour.
pub fn verify_mono_subspace(space: &Space, d: &Colouring, s: &Subspace) -> Option<u64> {
    let mut colour = None;
    let mut ok = true;
    s.target_space().for_each_point(|_, rho| {
        if !ok {
            return;
        }
        let c = d.colour_of(space, &s.pt(rho));
        match colour {
            None => colour = Some(c),
            Some(x) if x != c => ok = false,
            _ => {}
        }
    });
    if ok {
        colour
    } else {
        None
    }
}

/// Outcome of an exact partition-number computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionNumber {
    Exact(u32),
    /// Every dimension up to `k - 1` admits a colouring without a
    /// monochromatic line.
    AtLeast(u32),
    /// The budget ran out; dimensions up to `partial` were decided.
    Budget {
        partial: u32,
    },
}

impl PartitionNumber {
    pub fn render(&self) -> String {
        match self {
            PartitionNumber::Exact(k) => k.to_string(),
            PartitionNumber::AtLeast(k) => format!(">= {k}"),
            PartitionNumber::Budget { partial } => format!("BUDGET partial={partial}"),
        }
    }
}

/// Options for [`exact_partition_number`].
#[derive(Clone, Debug)]
pub struct ExactOptions {
    pub k_max: u32,
    /// Maximum number of backtracking nodes over all dimensions.
    pub budget: u64,
    /// Enumerate colourings up to a permutation of colours.
    pub symmetry: bool,
    /// Refuse spaces with more points than this.
    pub max_points: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { k_max: 4, budget: 50_000_000, symmetry: true, max_points: 4096 }
    }
}

/// A colouring of the `k`-dimensional space with no monochromatic
/// `𝔭`-line, or `None` when every colouring has one.
pub fn line_free_colouring(
    space: &Space,
    types: &TypeSet,
    c: u64,
    budget: &mut u64,
    symmetry: bool,
) -> Result<Option<Vec<u64>>> {
    let n = space.size() as usize;
    let frames = line_frames(space);
    // lines as sorted distinct point sets, grouped by their largest point
    let mut by_max: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n];
    for f in &frames {
        for j in 0..f.count {
            let mut pts: Vec<u32> = f.points_of(space, j, types).into_iter().map(|p| p as u32).collect();
            pts.sort_unstable();
            pts.dedup();
            let last = *pts.last().unwrap() as usize;
            by_max[last].push(pts);
        }
    }
    if by_max.iter().flatten().any(|l| l.len() == 1) {
        return Ok(None);
    }
    let mut colours = vec![0u64; n];
    let mut max_used = vec![0u64; n + 1];
    // explicit stack of next colour to try at each position
    let mut next = vec![0u64; n + 1];
    let mut pos = 0usize;
    if n == 0 {
        return Ok(Some(colours));
    }
    loop {
        let limit = if symmetry {
            let used = if pos == 0 { 0 } else { max_used[pos] + 1 };
            (used + 1).min(c)
        } else {
            c
        };
        if next[pos] >= limit {
            next[pos] = 0;
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            continue;
        }
        if *budget == 0 {
            return Err(Error::Budget { examined: 0 });
        }
        *budget -= 1;
        let col = next[pos];
        next[pos] += 1;
        colours[pos] = col;
        let mono = by_max[pos].iter().any(|l| l.iter().all(|&p| colours[p as usize] == col));
        if mono {
            continue;
        }
        let prev = if pos == 0 { 0 } else { max_used[pos] };
        max_used[pos + 1] = if pos == 0 { col } else { prev.max(col) };
        if pos + 1 == n {
            return Ok(Some(colours));
        }
        pos += 1;
        next[pos] = 0;
    }
}

/// The least `k` such that every `c`-colouring of the `k`-dimensional space
/// has a monochromatic `𝔭`-line, by exhaustive search over `k` from the
/// minimum support size up to `k_max`.
pub fn exact_partition_number(
    vocab: &Arc<Vocabulary>,
    alpha: &AlphabetSeq,
    types: Option<&TypeSet>,
    c: u64,
    mode: TupleMode,
    opts: &ExactOptions,
) -> Result<PartitionNumber> {
    if c == 0 {
        return Err(Error::Precondition("need at least one colour".into()));
    }
    let full = TypeSet::full(alpha);
    let types = types.unwrap_or(&full);
    let start = min_support(vocab, mode);
    let mut budget = opts.budget;
    let mut decided = start.saturating_sub(1);
    for k in start..=opts.k_max {
        let space = Space::build(vocab.clone(), k, mode, alpha.clone())?;
        if space.size() > opts.max_points {
            return Ok(PartitionNumber::Budget { partial: decided });
        }
        match line_free_colouring(&space, types, c, &mut budget, opts.symmetry) {
            Ok(None) => return Ok(PartitionNumber::Exact(k)),
            Ok(Some(_)) => decided = k,
            Err(Error::Budget { .. }) => return Ok(PartitionNumber::Budget { partial: decided }),
            Err(e) => return Err(e),
        }
    }
    Ok(PartitionNumber::AtLeast(opts.k_max + 1))
}

/// Block labellings of the points: `labels[a-1]` is 0 for "no block" or the
/// block number `1..=m`. Convex labellings have nondecreasing nonzero labels;
/// general ones number blocks by their least point. Every block is nonempty.
pub fn block_families(k: u32, m: usize, convex: bool) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; k as usize];
    fn rec(
        a: usize,
        k: usize,
        m: usize,
        convex: bool,
        top: usize,
        labels: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if a == k {
            if top == m {
                let mut blocks = vec![Vec::new(); m];
                for (i, &l) in labels.iter().enumerate() {
                    if l > 0 {
                        blocks[l - 1].push(i as u32 + 1);
                    }
                }
                out.push(blocks);
            }
            return;
        }
        if m - top > k - a {
            return;
        }
        labels[a] = 0;
        rec(a + 1, k, m, convex, top, labels, out);
        let lo = if convex { top.max(1) } else { 1 };
        for l in lo..=(top + 1).min(m) {
            labels[a] = l;
            rec(a + 1, k, m, convex, top.max(l), labels, out);
        }
        labels[a] = 0;
    }
    rec(0, k as usize, m, convex, 0, &mut labels, &mut out);
    out
}

/// Enumeration frame for subspaces with fixed blocks.
struct SubspaceFrame {
    template: Subspace,
    outside: Vec<usize>,
    radix: Vec<u32>,
    count: u64,
}

impl SubspaceFrame {
    fn new(space: &Space, blocks: Vec<Vec<u32>>) -> Result<Self> {
        let m = blocks.len();
        let template = Subspace::new(space, blocks, (1..=m as u32).collect(), vec![0; space.fim().len()])?;
        let outside: Vec<usize> = (0..space.fim().len()).filter(|&i| !template.in_closure(i)).collect();
        let radix: Vec<u32> = outside.iter().map(|&i| space.radix()[i]).collect();
        let count = radix.iter().map(|&r| r as u64).product();
        Ok(SubspaceFrame { template, outside, radix, count })
    }

    fn subspace(&self, mut j: u64) -> Subspace {
        let mut s = self.template.clone();
        for (&i, &r) in self.outside.iter().zip(&self.radix) {
            s.fixed[i] = (j % r as u64) as u32;
            j /= r as u64;
        }
        s
    }

    fn points(&self, space: &Space, j: u64) -> Vec<u64> {
        self.subspace(j).points(space)
    }
}

fn frames_for(space: &Space, m: usize, convex: bool) -> Result<Vec<SubspaceFrame>> {
    block_families(space.fim().dim(), m, convex).into_iter().map(|b| SubspaceFrame::new(space, b)).collect()
}

/// The first `d`-monochromatic `m`-dimensional subspace.
pub fn find_mono_subspace(
    space: &Space,
    d: &Colouring,
    m: usize,
    convex: bool,
    budget: u64,
) -> Result<Option<Subspace>> {
    if m == 0 {
        return Err(Error::Precondition("subspace dimension must be at least 1".into()));
    }
    d.check_space(space)?;
    let frames = frames_for(space, m, convex)?;
    let counts: Vec<u64> = frames.iter().map(|f| f.count).collect();
    let hit = first_hit(&counts, budget, |g, j| {
        let pts = frames[g].points(space, j);
        constant_on(d, space, &pts).map(|_| frames[g].subspace(j))
    })?;
    if let Some(s) = &hit {
        assert!(verify_mono_subspace(space, d, s).is_some(), "returned subspace failed re-verification");
    }
    Ok(hit)
}

/// Point sets (sorted indices into `outer`) of every convex `ell`-subspace
/// of the subspace `u`; points when `ell = 0`.
pub fn inner_subspaces(outer: &Space, u: &Subspace, ell: usize) -> Result<Vec<Vec<u64>>> {
    let inner = u.target_space();
    let map = |idx: u64| outer.encode(&u.pt(&inner.decode(idx)));
    if ell == 0 {
        return Ok((0..inner.size()).map(|i| vec![map(i)]).collect());
    }
    let mut out = Vec::new();
    for f in frames_for(inner, ell, true)? {
        for j in 0..f.count {
            let mut pts: Vec<u64> = f.points(inner, j).into_iter().map(map).collect();
            pts.sort_unstable();
            out.push(pts);
        }
    }
    Ok(out)
}

/// A convex `t`-dimensional subspace all of whose convex `ell`-subspaces get
/// one colour under `d_sub`, which colours subspaces by their sorted point
/// index sets.
pub fn find_mono_subspace_colouring(
    space: &Space,
    d_sub: &(dyn Fn(&[u64]) -> u64 + Sync),
    t: usize,
    ell: usize,
    budget: u64,
) -> Result<Option<Subspace>> {
    if ell >= t {
        return Err(Error::Precondition(format!("need ℓ < t, got ℓ={ell}, t={t}")));
    }
    let frames = frames_for(space, t, true)?;
    let counts: Vec<u64> = frames.iter().map(|f| f.count).collect();
    first_hit(&counts, budget, |g, j| {
        let u = frames[g].subspace(j);
        let subs = inner_subspaces(space, &u, ell).ok()?;
        let first = d_sub(&subs[0]);
        subs[1..].iter().all(|s| d_sub(s) == first).then_some(u)
    })
}

/// Convenience: the fim and space of dimension `k`.
pub fn space_of(vocab: &Arc<Vocabulary>, k: u32, mode: TupleMode, alpha: &AlphabetSeq) -> Result<Space> {
    Space::new(Arc::new(Fim::new(vocab.clone(), k, mode)), alpha.clone())
}
