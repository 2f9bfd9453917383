//! Upper-bound recursions for the partition numbers, evaluated exactly over
//! arbitrary-precision naturals.
//!
//! Every bound depends on the alphabet sizes only through the products
//! `P_s` of the sizes of the symbols of arity `s` (merge all symbols of one
//! arity into a single symbol over the product alphabet). Evaluation works
//! on that normal form in multiset mode with trailing `P_s = 1` dropped,
//! which is why singleton padding never changes a value. Set-mode values are
//! the multiset value times the arity: replacing every point by a block of
//! `t` consecutive points turns a set-mode space into a multiset one, so a
//! multiset line of dimension `k` yields a set-mode line of dimension `t*k`.
//!
//! Values never get approximated. A computation that would exceed the bit
//! or step budget stops and returns its recursion trace with the offending
//! node marked.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{TupleMode, Vocabulary};
use crate::reductions::compositions_min2;
use crate::space::AlphabetSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest bit length of any intermediate value.
    pub max_bits: u64,
    /// Largest number of recursion nodes and loop iterations.
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_bits: 65536, max_steps: 100_000 }
    }
}

/// Grzegorczyk level a bound grows within.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Class {
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Class::E4 => 4,
            Class::E5 => 5,
            Class::E6 => 6,
            Class::E7 => 7,
            Class::E8 => 8,
            Class::E9 => 9,
        };
        write!(f, "E{n}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub label: String,
    pub value: Option<BigUint>,
    /// The node where the budget ran out. Its ancestors are unfinished.
    pub over: bool,
    pub children: Vec<Trace>,
}

impl Trace {
    fn new(label: String) -> Self {
        Trace { label, value: None, over: false, children: Vec::new() }
    }

    /// Indented text, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        let value = match (&self.value, self.over) {
            (Some(v), _) => short(v),
            (None, true) => "OVER BUDGET".to_string(),
            (None, false) => "?".to_string(),
        };
        out.push_str(&format!("{}{} = {}\n", "  ".repeat(depth), self.label, value));
        for c in &self.children {
            c.render_into(depth + 1, out);
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Trace::node_count).sum::<usize>()
    }

    /// The first node marked over budget, depth first.
    pub fn first_over(&self) -> Option<&Trace> {
        if self.over {
            return Some(self);
        }
        self.children.iter().find_map(Trace::first_over)
    }
}

/// Result of one bound query: the value if it fit the budget, always the
/// trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Option<BigUint>,
    pub trace: Trace,
    pub class: Option<Class>,
}

impl Evaluation {
    pub fn exact(&self) -> Option<&BigUint> {
        self.value.as_ref()
    }

    pub fn exceeded(&self) -> bool {
        self.value.is_none()
    }

    pub fn render(&self) -> String {
        match &self.value {
            Some(v) => v.to_string(),
            None => "BUDGET".to_string(),
        }
    }
}

/// Decimal for values up to 64 bits, the bit length otherwise.
pub fn short(v: &BigUint) -> String {
    if v.bits() <= 64 {
        v.to_string()
    } else {
        format!("[{} bits]", v.bits())
    }
}

fn show(p: &[BigUint]) -> String {
    let parts: Vec<String> = p.iter().map(short).collect();
    format!("[{}]", parts.join(","))
}

/// Per-symbol arities and alphabet sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    symbols: Vec<(usize, BigUint)>,
}

impl Shape {
    pub fn new(vocab: &Vocabulary, alpha: &AlphabetSeq) -> Self {
        let symbols = (0..vocab.len()).map(|s| (vocab.arity_of(s), BigUint::from(alpha.size(s)))).collect();
        Shape { symbols }
    }

    pub fn from_parts(symbols: Vec<(usize, u64)>) -> Self {
        Shape { symbols: symbols.into_iter().map(|(a, n)| (a, BigUint::from(n))).collect() }
    }

    /// Arity of the vocabulary, singleton alphabets included.
    pub fn arity(&self) -> usize {
        self.symbols.iter().map(|s| s.0).max().unwrap_or(1)
    }

    /// The normal form `P_1, ..., P_t` with trailing ones removed.
    pub fn products(&self) -> Vec<BigUint> {
        let mut p = vec![BigUint::one(); self.arity()];
        for (a, n) in &self.symbols {
            p[a - 1] *= n;
        }
        trim(p)
    }

    /// Exactly one symbol with a non-singleton alphabet has the largest
    /// arity among such symbols.
    pub fn is_monic(&self) -> bool {
        let live: Vec<usize> = self.symbols.iter().filter(|s| !s.1.is_one()).map(|s| s.0).collect();
        match live.iter().max() {
            None => true,
            Some(t) => live.iter().filter(|a| *a == t).count() == 1,
        }
    }
}

fn trim(mut p: Vec<BigUint>) -> Vec<BigUint> {
    while p.last().is_some_and(|x| x.is_one()) {
        p.pop();
    }
    p
}

enum Stop {
    Over,
    Fail(Error),
}

type R<T> = std::result::Result<T, Stop>;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn binomial(n: &BigUint, r: usize) -> BigUint {
    if BigUint::from(r) > *n {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= n - big(i as u64);
        den *= big(i as u64 + 1);
    }
    num / den
}

/// Number of size-`r` multisets from `k` things.
fn multichoose(k: &BigUint, r: usize) -> BigUint {
    if r == 0 {
        return BigUint::one();
    }
    if k.is_zero() {
        return BigUint::zero();
    }
    binomial(&(k + big(r as u64) - 1u32), r)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Ordered set partitions of an `n`-set.
fn fubini(n: usize) -> u64 {
    let mut a = vec![1u64];
    for m in 1..=n {
        let mut s = 0u64;
        let mut c = 1u64;
        for k in 1..=m {
            c = c * (m - k + 1) as u64 / k as u64;
            s += c * a[m - k];
        }
        a.push(s);
    }
    a[n]
}

struct Ev {
    budget: Budget,
    steps: u64,
    stack: Vec<Trace>,
}

impl Ev {
    fn new(budget: Budget) -> Self {
        Ev { budget, steps: 0, stack: vec![Trace::new(String::new())] }
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.budget.max_steps {
            Err(Stop::Over)
        } else {
            Ok(())
        }
    }

    fn check(&self, v: BigUint) -> R<BigUint> {
        if v.bits() > self.budget.max_bits {
            Err(Stop::Over)
        } else {
            Ok(v)
        }
    }

    fn node(&mut self, label: String, f: impl FnOnce(&mut Self) -> R<BigUint>) -> R<BigUint> {
        self.stack.push(Trace::new(label));
        let r = self.tick().and_then(|_| f(self)).and_then(|v| self.check(v));
        let mut t = self.stack.pop().expect("trace stack");
        match &r {
            Ok(v) => t.value = Some(v.clone()),
            Err(Stop::Over) => t.over = t.children.iter().all(|c| c.value.is_some()),
            Err(Stop::Fail(_)) => {}
        }
        self.stack.last_mut().expect("trace root").children.push(t);
        r
    }

    /// `base^exp`, refusing before the multiplication when the result cannot
    /// fit.
    fn pow(&self, base: &BigUint, exp: &BigUint) -> R<BigUint> {
        if exp.is_zero() || base.is_one() {
            return Ok(BigUint::one());
        }
        if base.is_zero() {
            return Ok(BigUint::zero());
        }
        let e = match exp.to_u64() {
            Some(e) if e <= self.budget.max_bits => e,
            _ => return Err(Stop::Over),
        };
        if e.saturating_mul(base.bits() - 1) >= self.budget.max_bits {
            return Err(Stop::Over);
        }
        self.check(base.pow(e as u32))
    }

    fn count(&self, n: &BigUint) -> R<u64> {
        match n.to_u64() {
            Some(v) if v <= self.budget.max_steps => Ok(v),
            _ => Err(Stop::Over),
        }
    }

    fn finish(mut self, class: Option<Class>, r: R<BigUint>) -> Result<Evaluation> {
        let trace = self.stack.pop().and_then(|mut root| root.children.pop()).expect("one root node");
        match r {
            Ok(v) => Ok(Evaluation { value: Some(v), trace, class }),
            Err(Stop::Over) => Ok(Evaluation { value: None, trace, class }),
            Err(Stop::Fail(e)) => Err(e),
        }
    }

    // Hales-Jewett stand-in. m > 1 goes through the alphabet of m-tuples; for
    // m = 1 the number for alphabet size n is built from the one for n - 1.
    fn hj(&mut self, n: &BigUint, m: &BigUint, c: &BigUint) -> R<BigUint> {
        self.node(format!("HJ({}, {}, {})", short(n), short(m), short(c)), |ev| {
            if m.is_zero() || n.is_one() || c.is_one() {
                return Ok(m.clone());
            }
            if !m.is_one() {
                let nm = ev.pow(n, m)?;
                let h = ev.hj(&nm, &BigUint::one(), c)?;
                return ev.check(m * h);
            }
            let top = ev.count(n)?;
            let mut nn = c.clone();
            for j in 3..=top {
                nn = ev.hj_step(j, &nn, c)?;
            }
            Ok(nn)
        })
    }

    // HJ(j, 1, c) from N = HJ(j - 1, 1, c): blocks m_1..m_N with
    // m_i = c^(j^(m_1 + ... + m_{i-1} + N - i)).
    fn hj_step(&mut self, j: u64, prev: &BigUint, c: &BigUint) -> R<BigUint> {
        self.node(format!("HJ({j}, 1, {})", short(c)), |ev| {
            let n = ev.count(prev)?;
            let jb = big(j);
            let mut total = BigUint::zero();
            for i in 1..=n {
                ev.tick()?;
                let e = ev.pow(&jb, &(&total + big(n - i)))?;
                let mi = ev.pow(c, &e)?;
                total = ev.check(total + mi)?;
            }
            Ok(total)
        })
    }

    // Erdős–Rado style stepping up from the (l-1)-uniform number.
    fn ram(&mut self, t: &BigUint, l: usize, c: &BigUint) -> R<BigUint> {
        self.node(format!("RAM({}, {l}, {})", short(t), short(c)), |ev| {
            if l == 0 {
                return Ok(t.clone());
            }
            if *t < big(l as u64) {
                return Err(Stop::Fail(Error::Precondition(format!("RAM needs t >= l, got t={t}, l={l}"))));
            }
            if c.is_one() || *t == big(l as u64) {
                return Ok(t.clone());
            }
            if l == 1 {
                return Ok(c * (t - 1u32) + 1u32);
            }
            let below = ev.ram(t, l - 1, c)?;
            let len = ev.count(&(below + 1u32))?;
            let mut need = BigUint::one();
            for i in (0..len - 1).rev() {
                ev.tick()?;
                let e = binomial(&big(i), l - 2);
                let f = ev.pow(c, &e)?;
                need = ev.check(f * (need - 1u32) + 2u32)?;
            }
            Ok(need)
        })
    }

    /// Products of the vocabulary derived over `k` points:
    /// `P*_q = prod_r P_r^multichoose(k, r - q)`.
    fn derived(&self, p: &[BigUint], k: &BigUint) -> R<Vec<BigUint>> {
        let mut out = Vec::with_capacity(p.len());
        for q in 1..=p.len() {
            let mut acc = BigUint::one();
            for r in q..=p.len() {
                acc = self.check(acc * self.pow(&p[r - 1], &multichoose(k, r - q))?)?;
            }
            out.push(acc);
        }
        Ok(trim(out))
    }

    /// Number of points of the space over a `k`-dimensional fim.
    fn space_card(&self, p: &[BigUint], k: &BigUint) -> R<BigUint> {
        let mut acc = BigUint::one();
        for (s, ps) in p.iter().enumerate() {
            acc = self.check(acc * self.pow(ps, &multichoose(k, s + 1))?)?;
        }
        Ok(acc)
    }

    /// Products of the arity-halving vocabulary: one symbol per composition
    /// of `s` into parts of size at least 2, arity the number of parts.
    fn arity_star(&self, p: &[BigUint]) -> R<Vec<BigUint>> {
        let mut out = vec![BigUint::one(); p.len() / 2];
        for (i, ps) in p.iter().enumerate().skip(1) {
            for comp in compositions_min2(i + 1) {
                let q = comp.len();
                out[q - 1] = self.check(&out[q - 1] * ps)?;
            }
        }
        Ok(trim(out))
    }

    fn f7(&mut self, p: &[BigUint], steps: Option<&BigUint>, m: &BigUint, c: &BigUint) -> R<BigUint> {
        let label = match steps {
            Some(s) => format!("f7{} chain {} m={} c={}", show(p), short(s), short(m), short(c)),
            None => format!("f7{} m={} c={}", show(p), short(m), short(c)),
        };
        self.node(label, |ev| {
            let n = p.first().cloned().unwrap_or_else(BigUint::one);
            let iters = match steps {
                Some(s) => s.clone(),
                None => p.iter().skip(1).product(),
            };
            if iters.is_zero() || n.is_one() || c.is_one() {
                return Ok(m.clone());
            }
            let iters = ev.count(&iters)?;
            let mut x = m.clone();
            for _ in 0..iters {
                x = ev.hj(&n, &x, c)?;
            }
            Ok(x)
        })
    }

    fn f6star(&mut self, p: &[BigUint], j: &BigUint, t: &BigUint, c: &BigUint) -> R<BigUint> {
        self.node(format!("f6*{} j={} t={} c={}", show(p), short(j), short(t), short(c)), |ev| {
            let top = ev.count(j)?;
            let mut val = t.clone();
            for i in 1..=top {
                let prev = val.clone();
                val = ev.node(format!("f6* step {i}"), |ev| {
                    let k0 = prev.max(big(i));
                    let kk = &k0 - 1u32;
                    let pk = ev.derived(p, &kk)?;
                    let card = ev.space_card(p, &kk)?;
                    let cstar = ev.pow(c, &card)?;
                    let f = ev.f7(&pk, None, &BigUint::one(), &cstar)?;
                    Ok(k0 + f - 1u32)
                })?;
            }
            Ok(val)
        })
    }

    fn f1(&mut self, p: &[BigUint], c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f1{} c={}", show(&p), short(c)), |ev| match p.len() {
            0 => Ok(BigUint::one()),
            1 => ev.hj(&p[0], &BigUint::one(), c),
            _ => {
                let ps = ev.arity_star(&p)?;
                let lstar = ev.f1(&ps, c)?;
                ev.f6star(&p, &lstar, &lstar, c)
            }
        })
    }

    fn f6(&mut self, p: &[BigUint], l: &BigUint, c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f6{} l={} c={}", show(&p), short(l), short(c)), |ev| {
            let ps = ev.arity_star(&p)?;
            let lstar = ev.f1(&ps, c)?;
            if *l >= lstar {
                return Ok(lstar);
            }
            ev.f6star(&p, &(&lstar - l), &lstar, c)
        })
    }

    fn f1_legacy(&mut self, p: &[BigUint], c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f1-legacy{} c={}", show(&p), short(c)), |ev| match p.len() {
            0 => Ok(BigUint::one()),
            1 => ev.hj(&p[0], &BigUint::one(), c),
            _ => ev.f0(&p, &BigUint::zero(), &BigUint::zero(), c),
        })
    }

    // Triple induction: the outer loop walks n down from |Λ_H|, each row
    // walks l down from the row's l*.
    fn f0(&mut self, p: &[BigUint], n: &BigUint, l: &BigUint, c: &BigUint) -> R<BigUint> {
        self.node(format!("f0{} n={} l={} c={}", show(p), short(n), short(l), short(c)), |ev| {
            let s = p.last().cloned().unwrap_or_else(BigUint::one);
            if *n > s {
                return Err(Stop::Fail(Error::Precondition(format!("f0 needs n <= |Λ_H| = {s}, got {n}"))));
            }
            let lower = p[..p.len().saturating_sub(1)].to_vec();
            let mut star = ev.node(format!("f0 n={} l=0", short(&s)), |ev| ev.f1_legacy(&lower, c))?;
            if *n == s {
                return Ok(star);
            }
            let rows = ev.count(&(&s - n))?;
            let mut level = s.clone();
            for r in 0..rows {
                level -= 1u32;
                let target = if r + 1 == rows { l.clone() } else { BigUint::zero() };
                let lstar = star.clone();
                star = ev
                    .node(format!("f0 n={} l={} (l*={})", short(&level), short(&target), short(&lstar)), |ev| {
                        ev.f0_row(p, &lstar, &target, c)
                    })?;
            }
            Ok(star)
        })
    }

    fn f0_row(&mut self, p: &[BigUint], lstar: &BigUint, target: &BigUint, c: &BigUint) -> R<BigUint> {
        if target >= lstar {
            return Ok(lstar.clone());
        }
        let count = self.count(&(lstar - target))?;
        let mut val = lstar.clone();
        for i in 0..count {
            let l = lstar - big(i + 1);
            let prev = val.clone();
            val = self.node(format!("f0 step l={}", short(&l)), |ev| {
                let k0 = prev.max(&l + 1u32);
                let kk = &k0 - 1u32;
                let mut ps = ev.derived(p, &kk)?;
                if ps.len() == p.len() {
                    ps.pop();
                }
                let card = ev.space_card(p, &kk)?;
                let cstar = ev.pow(c, &card)?;
                let f = ev.f1_legacy(&ps, &cstar)?;
                Ok(k0 + f - 1u32)
            })?;
        }
        Ok(val)
    }

    fn f1_multi(&mut self, p: &[BigUint], m: &BigUint, c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f1-multi{} m={} c={}", show(&p), short(m), short(c)), |ev| {
            let steps = ev.count(m)?;
            let mut k = BigUint::zero();
            let mut ci = c.clone();
            for i in 0..steps {
                let pi = ev.derived(&p, &k)?;
                let step = ev.f1(&pi, &ci)?;
                let card = ev.space_card(&p, &(&k + big(steps - i)))?;
                k = ev.check(k + step)?;
                ci = ev.pow(c, &card)?;
            }
            Ok(k)
        })
    }

    fn f4(&mut self, shape: &Shape, t: &BigUint, l: usize, c: &BigUint) -> R<BigUint> {
        self.node(format!("f4 t={} l={l} c={}", short(t), short(c)), |ev| {
            let m = ev.ram(t, l, c)?;
            let steps = ev.count(&m)?;
            let mut k = BigUint::zero();
            let mut ci = c.clone();
            for i in 0..steps {
                let dim = &k + big(steps - i);
                let elements: BigUint = shape.symbols.iter().map(|(a, _)| multichoose(&dim, *a)).sum();
                let extra = ev.check(elements + big(l as u64))?;
                let mut pi = vec![BigUint::one(); shape.arity()];
                let mut card = BigUint::one();
                for (a, n) in &shape.symbols {
                    let size = n + &extra;
                    for q in 1..=*a {
                        pi[q - 1] = ev.check(&pi[q - 1] * ev.pow(&size, &multichoose(&dim, a - q))?)?;
                    }
                    card = ev.check(card * ev.pow(&size, &multichoose(&dim, *a))?)?;
                }
                let step = ev.f1(&pi, &ci)?;
                k = ev.check(k + step)?;
                ci = ev.pow(c, &card)?;
            }
            Ok(k)
        })
    }

    fn f2(&mut self, p: &[BigUint], c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f2{} c={}", show(&p), short(c)), |ev| {
            let mut po = Vec::with_capacity(p.len());
            for (i, ps) in p.iter().enumerate() {
                po.push(ev.pow(ps, &big(factorial(i + 1)))?);
            }
            ev.f1(&po, c)
        })
    }

    fn f3(&mut self, p: &[BigUint], c: &BigUint) -> R<BigUint> {
        let p = trim(p.to_vec());
        self.node(format!("f3{} c={}", show(&p), short(c)), |ev| {
            let t = p.len().max(1);
            let f2 = ev.f2(&p, c)?;
            if f2 < big(t as u64) {
                return Ok(f2);
            }
            let cstar = ev.pow(c, &big(fubini(t)))?;
            ev.ram(&f2, t, &cstar)
        })
    }

    /// Set-mode values come from the block embedding of the multiset space.
    fn in_mode(&mut self, mode: TupleMode, arity: usize, r: R<BigUint>) -> R<BigUint> {
        let v = r?;
        match mode {
            TupleMode::Multiset => Ok(v),
            TupleMode::Set => self.node(format!("set-mode blocks x{arity}"), |ev| ev.check(v * big(arity as u64))),
        }
    }
}

fn colours(c: u64) -> Result<BigUint> {
    if c == 0 {
        return Err(Error::Precondition("need at least one colour".into()));
    }
    Ok(big(c))
}

pub fn hj_bound(n: u64, m: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    if n == 0 || m == 0 {
        return Err(Error::Precondition("HJ needs n, m >= 1".into()));
    }
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.hj(&big(n), &big(m), &c);
    ev.finish(Some(Class::E5), r)
}

pub fn ram_bound(t: u64, l: usize, c: u64, budget: Budget) -> Result<Evaluation> {
    if l == 0 || t < l as u64 {
        return Err(Error::Precondition(format!("RAM needs t >= l >= 1, got t={t}, l={l}")));
    }
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.ram(&big(t), l, &c);
    ev.finish(Some(Class::E4), r)
}

/// `f7` over the first `steps` pair blocks; `None` takes all of them.
pub fn f7_bound(shape: &Shape, steps: Option<u64>, m: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f7(&shape.products(), steps.map(big).as_ref(), &big(m), &c);
    ev.finish(Some(Class::E6), r)
}

/// `f6*(j, t, c)` in multiset normal form.
pub fn f6star_bound(shape: &Shape, j: u64, t: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f6star(&shape.products(), &big(j), &big(t), &c);
    ev.finish(Some(Class::E7), r)
}

/// Bound for `(l, 1)`-base-invariant colourings, multiset mode.
pub fn f6_bound(shape: &Shape, l: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f6(&shape.products(), &big(l), &c);
    ev.finish(Some(Class::E8), r)
}

/// The primitive recursive bound on the partition number.
pub fn f1_bound(shape: &Shape, mode: TupleMode, c: u64, budget: Budget) -> Result<Evaluation> {
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f1(&shape.products(), &c);
    let r = ev.in_mode(mode, shape.arity(), r);
    ev.finish(Some(Class::E8), r)
}

/// The bound by triple induction. Known to undershoot on some inputs; see
/// the tests.
pub fn f1_bound_legacy(shape: &Shape, mode: TupleMode, c: u64, budget: Budget) -> Result<Evaluation> {
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f1_legacy(&shape.products(), &c);
    let r = ev.in_mode(mode, shape.arity(), r);
    ev.finish(None, r)
}

pub fn f0_bound(shape: &Shape, mode: TupleMode, n: u64, l: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    if !shape.is_monic() {
        return Err(Error::NotMonic(format!("{:?}", shape.symbols.iter().map(|s| s.0).collect::<Vec<_>>())));
    }
    // Unary spaces go straight to HJ; the induction has nothing to peel.
    if shape.arity() == 1 {
        return Err(Error::Precondition("f0 needs a symbol of arity >= 2".into()));
    }
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let p = shape.products();
    let r = if p.is_empty() { Ok(BigUint::one()) } else { ev.f0(&p, &big(n), &big(l), &c) };
    let r = ev.in_mode(mode, shape.arity(), r);
    ev.finish(None, r)
}

/// Bound for monochromatic `m`-dimensional subspaces.
pub fn f1_multi_bound(shape: &Shape, mode: TupleMode, m: u64, c: u64, budget: Budget) -> Result<Evaluation> {
    if m == 0 {
        return Err(Error::Precondition("subspace dimension must be >= 1".into()));
    }
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f1_multi(&shape.products(), &big(m), &c);
    let r = ev.in_mode(mode, shape.arity(), r);
    ev.finish(Some(Class::E9), r)
}

/// Bound for colourings of `l`-dimensional subspaces with a homogeneous
/// `t`-dimensional subspace.
pub fn f4_bound(shape: &Shape, mode: TupleMode, t: u64, l: usize, c: u64, budget: Budget) -> Result<Evaluation> {
    if l as u64 >= t {
        return Err(Error::Precondition(format!("f4 needs l < t, got l={l}, t={t}")));
    }
    let c = colours(c)?;
    let mut ev = Ev::new(budget);
    let r = ev.f4(shape, &big(t), l, &c);
    let r = ev.in_mode(mode, shape.arity(), r);
    ev.finish(Some(Class::E9), r)
}

/// Bounds for the fim variants with non-symmetric symbols (`f2`) and with
/// order-sensitive colourings (`f3`). The `f3` colour count is
/// `c^(ordered set partitions of the arity)`.
pub fn fim_variant_bounds(shape: &Shape, mode: TupleMode, c: u64, budget: Budget) -> Result<(Evaluation, Evaluation)> {
    let cb = colours(c)?;
    let p = shape.products();
    let mut ev = Ev::new(budget);
    let r = ev.f2(&p, &cb);
    let r = ev.in_mode(mode, shape.arity(), r);
    let f2 = ev.finish(Some(Class::E8), r)?;
    let mut ev = Ev::new(budget);
    let r = ev.f3(&p, &cb);
    let r = ev.in_mode(mode, shape.arity(), r);
    let f3 = ev.finish(Some(Class::E8), r)?;
    Ok((f2, f3))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Budget {
        Budget::default()
    }

    fn val(e: Result<Evaluation>) -> BigUint {
        e.unwrap().value.expect("within budget")
    }

    fn canon(t: usize, n: u64) -> Shape {
        Shape::from_parts((1..=t).map(|a| (a, n)).collect())
    }

    // Smallest k such that every c-colouring of k points has a class of size t.
    fn pigeonhole(t: u64, c: u64) -> u64 {
        fn has_small(k: u64, c: u64, t: u64) -> bool {
            if c == 0 {
                return k == 0;
            }
            (0..t.min(k + 1)).any(|first| has_small(k - first, c - 1, t))
        }
        (0..).find(|&k| !has_small(k, c, t)).unwrap()
    }

    #[test]
    fn hj_trivial_cases() {
        for m in 1..5 {
            assert_eq!(val(hj_bound(1, m, 3, b())), big(m));
            assert_eq!(val(hj_bound(4, m, 1, b())), big(m));
        }
        assert_eq!(val(hj_bound(2, 1, 2, b())), big(2));
        assert_eq!(val(hj_bound(2, 1, 5, b())), big(5));
    }

    #[test]
    fn hj_three_letters_two_colours() {
        // N = HJ(2,1,2) = 2 blocks: m_1 = 2^(3^1), m_2 = 2^(3^8).
        let expect = big(8) + (BigUint::one() << 6561u32);
        assert_eq!(val(hj_bound(3, 1, 2, b())), expect);
        assert!(hj_bound(4, 1, 2, b()).unwrap().exceeded());
    }

    #[test]
    fn ram_pigeonhole_matches_oracle() {
        for t in 1..=4 {
            for c in 1..=4 {
                assert_eq!(val(ram_bound(t, 1, c, b())), big(pigeonhole(t, c)), "t={t} c={c}");
            }
        }
    }

    #[test]
    fn ram_small_cases() {
        assert_eq!(val(ram_bound(5, 3, 1, b())), big(5));
        assert_eq!(val(ram_bound(3, 3, 4, b())), big(3));
        // R(3,3) = 6.
        let r = val(ram_bound(3, 2, 2, b()));
        assert_eq!(r, big(32));
        assert!(r >= big(6));
        assert!(ram_bound(2, 3, 2, b()).is_err());
    }

    #[test]
    fn f7_empty_chain_is_identity() {
        for m in 1..4 {
            assert_eq!(val(f7_bound(&canon(2, 2), Some(0), m, 2, b())), big(m));
        }
    }

    #[test]
    fn f7_chain_binary_pairs() {
        // Two pair blocks (|Λ_F2| = 2), each an HJ(2, x, 2) step from x = 1.
        let e = f7_bound(&canon(2, 2), None, 1, 2, b()).unwrap();
        let kids = &e.trace.children;
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].label, "HJ(2, 1, 2)");
        assert_eq!(kids[0].value, Some(big(2)));
        assert_eq!(kids[1].label, "HJ(2, 2, 2)");
        assert!(e.exceeded());
        assert!(e.trace.first_over().is_some());
        let one = f7_bound(&canon(2, 2), Some(1), 1, 2, b()).unwrap();
        assert_eq!(one.value, Some(big(2)));
    }

    #[test]
    fn f6star_base_case() {
        for t in 1..6 {
            assert_eq!(val(f6star_bound(&canon(2, 2), 0, t, 2, b())), big(t));
        }
    }

    #[test]
    fn f1_unary_is_hj() {
        for n in 1..=3 {
            for c in 1..=2 {
                let s = Shape::from_parts(vec![(1, n)]);
                assert_eq!(val(f1_bound(&s, TupleMode::Multiset, c, b())), val(hj_bound(n, 1, c, b())));
                assert_eq!(val(f1_bound_legacy(&s, TupleMode::Multiset, c, b())), val(hj_bound(n, 1, c, b())));
            }
        }
    }

    #[test]
    fn singleton_alphabets_give_minimum_support() {
        for t in 1..=4 {
            let s = canon(t, 1);
            assert_eq!(val(f1_bound(&s, TupleMode::Multiset, 3, b())), big(1));
            assert_eq!(val(f1_bound(&s, TupleMode::Set, 3, b())), big(t as u64));
            assert_eq!(val(f1_bound_legacy(&s, TupleMode::Set, 3, b())), big(t as u64));
        }
    }

    #[test]
    fn f1_pairs_feeds_hj_into_f6star() {
        let e = f1_bound(&canon(2, 2), TupleMode::Multiset, 2, b()).unwrap();
        let root = &e.trace;
        assert_eq!(root.label, "f1[2,2] c=2");
        assert_eq!(root.children[0].label, "f1[2] c=2");
        assert_eq!(root.children[0].value, Some(big(2)));
        assert_eq!(root.children[0].children[0].label, "HJ(2, 1, 2)");
        assert!(root.children[1].label.starts_with("f6*[2,2] j=2 t=2"));
        assert!(e.exceeded());
        assert_eq!(e.class, Some(Class::E8));
    }

    #[test]
    fn one_colour_collapses_everything() {
        for t in 1..=4 {
            for n in 1..=3 {
                assert_eq!(val(f1_bound(&canon(t, n), TupleMode::Multiset, 1, b())), big(1));
            }
        }
    }

    #[test]
    fn legacy_anchors() {
        let s = Shape::from_parts(vec![(1, 1), (2, 2)]);
        let m = TupleMode::Multiset;
        let legacy = val(f1_bound_legacy(&s, m, 2, b()));
        assert_eq!(val(f0_bound(&s, m, 0, 0, 2, b())), legacy);
        // At n = |Λ_H| the top symbol is gone.
        let lower = Shape::from_parts(vec![(1, 1)]);
        assert_eq!(val(f0_bound(&s, m, 2, 0, 2, b())), val(f1_bound_legacy(&lower, m, 2, b())));
        let lstar = val(f0_bound(&s, m, 1, 0, 2, b()));
        let l = lstar.to_u64().unwrap();
        assert_eq!(val(f0_bound(&s, m, 0, l, 2, b())), lstar);
    }

    #[test]
    fn legacy_undershoots_on_pairs() {
        // The true value is at least 3 (the parity colouring of dimension 2
        // has no monochromatic line); the triple induction yields 1.
        let s = Shape::from_parts(vec![(1, 1), (2, 2)]);
        assert_eq!(val(f1_bound_legacy(&s, TupleMode::Multiset, 2, b())), big(1));
    }

    #[test]
    fn f0_rejects_non_monic() {
        let s = Shape::from_parts(vec![(1, 2), (2, 2), (2, 3)]);
        assert!(matches!(f0_bound(&s, TupleMode::Multiset, 0, 0, 2, b()), Err(Error::NotMonic(_))));
    }

    #[test]
    fn f6_at_zero_is_f1() {
        for s in [Shape::from_parts(vec![(1, 3)]), canon(3, 2)] {
            for c in 1..=2 {
                let f6 = f6_bound(&s, 0, c, b()).unwrap();
                let f1 = f1_bound(&s, TupleMode::Multiset, c, b()).unwrap();
                assert_eq!(f6.value, f1.value);
            }
        }
    }

    #[test]
    fn multi_and_f4_single_steps() {
        for s in [Shape::from_parts(vec![(1, 2)]), canon(2, 1)] {
            let f1 = f1_bound(&s, TupleMode::Multiset, 2, b()).unwrap();
            let multi = f1_multi_bound(&s, TupleMode::Multiset, 1, 2, b()).unwrap();
            assert_eq!(multi.value, f1.value);
        }
        // m = RAM(1, 0, c) = 1: one f1 step on the derived vocabulary of
        // dimension 1, letters grown by the 1 element of M_1.
        let s = Shape::from_parts(vec![(1, 1)]);
        let e = f4_bound(&s, TupleMode::Multiset, 1, 0, 2, b()).unwrap();
        assert_eq!(e.value, Some(big(2)));
        assert_eq!(e.trace.children.len(), 2);
        assert_eq!(e.trace.children[1].label, "f1[2] c=2");
        assert!(f4_bound(&s, TupleMode::Multiset, 1, 1, 2, b()).is_err());
    }

    #[test]
    fn variants_order() {
        for n in 1..=3 {
            let s = Shape::from_parts(vec![(1, n)]);
            let f1 = val(f1_bound(&s, TupleMode::Multiset, 2, b()));
            let (f2, f3) = fim_variant_bounds(&s, TupleMode::Multiset, 2, b()).unwrap();
            let (f2, f3) = (f2.value.unwrap(), f3.value.unwrap());
            assert!(f1 <= f2 && f2 <= f3);
        }
    }

    #[test]
    fn budget_exceeded_keeps_trace_and_is_deterministic() {
        let s = canon(2, 2);
        let a = f1_bound(&s, TupleMode::Set, 2, b()).unwrap();
        let c = f1_bound(&s, TupleMode::Set, 2, b()).unwrap();
        assert!(a.exceeded());
        assert_eq!(a.trace.render(), c.trace.render());
        assert!(a.trace.render().contains("OVER BUDGET"));
    }

    #[test]
    fn helpers() {
        assert_eq!(multichoose(&big(3), 2), big(6));
        assert_eq!(multichoose(&big(0), 0), big(1));
        assert_eq!(multichoose(&big(0), 2), big(0));
        assert_eq!((0..5).map(fubini).collect::<Vec<_>>(), [1, 1, 3, 13, 75]);
        assert_eq!(binomial(&big(5), 2), big(10));
    }
}
