//! Homology of the Morse complex tensored with Z_d, Smith normal form,
//! and the weak and strong Morse inequalities.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::chains::{enumerate_chains, ChainSet};
use crate::coeff::{reduce_mod, CountRing, Ring};
use crate::error::{Error, Result};
use crate::morse::{Matching, MorseComplex};
use crate::rewrite::Trs;

/// `δ_n : C_n -> C_{n-1}`; row `i` holds the image of the `i`-th n-chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub dim: usize,
    pub rows: usize,
    pub cols: usize,
    /// 0 for integer entries, otherwise a prime.
    pub modulus: u64,
    pub entries: Vec<Vec<i64>>,
}

impl BoundaryMatrix {
    pub fn zero(dim: usize, rows: usize, cols: usize, modulus: u64) -> Self {
        BoundaryMatrix { dim, rows, cols, modulus, entries: vec![vec![0; cols]; rows] }
    }

    /// `self · next` where `next` is `δ_{n+1}`; used to check `δδ = 0`.
    pub fn composes_to_zero(&self, next: &BoundaryMatrix) -> bool {
        next.entries.iter().all(|row| {
            (0..self.cols).all(|j| {
                let s: i128 = row.iter().zip(&self.entries).map(|(a, r)| *a as i128 * r[j] as i128).sum();
                if self.modulus == 0 {
                    s == 0
                } else {
                    s.rem_euclid(self.modulus as i128) == 0
                }
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HomologyGroup {
    /// Free rank over Z, or the dimension over F_p.
    pub rank: usize,
    /// Invariant factors greater than 1, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    /// The minimum number of generators.
    pub fn s(&self) -> usize {
        self.rank + self.torsion.len()
    }

    pub fn is_zero(&self) -> bool {
        self.s() == 0
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Diagonal of the Smith normal form: nonzero invariant factors, each
/// dividing the next.
pub fn smith_normal_form(m: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot of minimal absolute value in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // Enforce divisibility by the rest of the block.
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Rank over F_p.
pub fn rank_mod_p(m: &[Vec<i64>], p: u64) -> usize {
    let p = p as i64;
    let mut a: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p)).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = mod_inverse(a[rank][c], p);
        for j in c..cols {
            a[rank][j] = a[rank][j] * inv % p;
        }
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in c..cols {
                    a[i][j] = (a[i][j] - f * a[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    let g = a.extended_gcd(&p);
    g.x.rem_euclid(p)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// Accepts `coeff` when Z_coeff is a well-defined module for a TRS of
/// the given degree and the coefficient ring is Z or a field.
pub fn check_coefficient(coeff: u64, degree: u64) -> Result<u64> {
    let ok = if coeff == 0 { degree == 0 } else { is_prime(coeff) && degree % coeff == 0 };
    if ok {
        Ok(coeff)
    } else {
        Err(Error::UnsupportedDegree(coeff))
    }
}

/// Boundary matrices of `Z_d ⊗ B^M` with their row and column bases.
#[derive(Debug, Clone)]
pub struct TensoredComplex {
    pub modulus: u64,
    /// `#Cr_n` for `n = 0..=top`.
    pub ranks: Vec<usize>,
    /// `matrices[n - 1] = δ_n` for `n = 1..=top`.
    pub matrices: Vec<BoundaryMatrix>,
}

impl TensoredComplex {
    pub fn top(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn matrix(&self, n: usize) -> Option<&BoundaryMatrix> {
        n.checked_sub(1).and_then(|k| self.matrices.get(k))
    }

    fn matrix_rank(&self, n: usize) -> usize {
        match self.matrix(n) {
            None => 0,
            Some(m) if self.modulus == 0 => smith_normal_form(&m.entries).len(),
            Some(m) => rank_mod_p(&m.entries, self.modulus),
        }
    }

    /// Whether every pair of consecutive matrices composes to zero.
    pub fn is_complex(&self) -> bool {
        self.matrices.windows(2).all(|w| w[0].composes_to_zero(&w[1]))
    }
}

/// Entries are the mod-`d` counts of the Morse differential coefficients.
pub fn tensor_zd<R: Ring>(complex: &MorseComplex<'_, R>, chains: &ChainSet, top: usize, d: u64) -> Result<TensoredComplex> {
    if d != 0 && !is_prime(d) {
        return Err(Error::UnsupportedDegree(d));
    }
    if top > chains.max_dim() {
        return Err(Error::InsufficientDimension(top));
    }
    let ranks: Vec<usize> = (0..=top).map(|n| chains.dims[n].len()).collect();
    let mut matrices = Vec::new();
    for n in 1..=top {
        let diffs = complex.differentials(chains, n)?;
        let entries: Vec<Vec<i64>> = diffs
            .par_iter()
            .map(|terms| {
                let mut row = vec![0i64; ranks[n - 1]];
                for t in terms {
                    let j = chains.position(&t.target).expect("Morse differential lands on a chain");
                    row[j] = reduce_mod(row[j] + complex.ring.count(&t.coeff, d), d);
                }
                row
            })
            .collect();
        matrices.push(BoundaryMatrix { dim: n, rows: ranks[n], cols: ranks[n - 1], modulus: d, entries });
    }
    Ok(TensoredComplex { modulus: d, ranks, matrices })
}

/// `H_n = ker δ_n / im δ_{n+1}`, with `δ_0 = 0`.
pub fn homology_group(complex: &TensoredComplex, n: usize) -> Result<HomologyGroup> {
    if n + 1 > complex.top() {
        return Err(Error::InsufficientDimension(n + 1));
    }
    let kernel = complex.ranks[n] - complex.matrix_rank(n);
    let next = complex.matrix(n + 1).expect("checked above");
    if complex.modulus == 0 {
        let diag = smith_normal_form(&next.entries);
        let torsion: Vec<BigInt> = diag.iter().filter(|x| !x.is_one()).cloned().collect();
        Ok(HomologyGroup { rank: kernel - diag.len(), torsion })
    } else {
        Ok(HomologyGroup { rank: kernel - rank_mod_p(&next.entries, complex.modulus), torsion: Vec::new() })
    }
}

/// `H_0, …, H_{top-1}`.
pub fn homology(complex: &TensoredComplex) -> Result<Vec<HomologyGroup>> {
    (0..complex.top()).map(|n| homology_group(complex, n)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub lhs: i64,
    pub rhs: i64,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityReport {
    pub dim: usize,
    pub modulus: u64,
    pub critical: Vec<usize>,
    pub homology: Vec<HomologyGroup>,
    /// `#Cr_n ≥ s(H_n)`.
    pub weak: Inequality,
    /// `Σ (-1)^{n-i} #Cr_i ≥ s(H_n) + Σ_{i<n} (-1)^{n-i} rank H_i`.
    pub strong: Inequality,
}

impl InequalityReport {
    /// `#rules ≥ #ops − #sorts + RHS`, meaningful at dimension 2 where
    /// the chain counts are those of any equivalent presentation.
    pub fn axiom_bound(&self) -> Option<i64> {
        (self.dim == 2).then(|| self.critical[1] as i64 - self.critical[0] as i64 + self.strong.rhs)
    }
}

pub fn morse_inequality_report(complex: &TensoredComplex, n: usize) -> Result<InequalityReport> {
    let homology: Vec<HomologyGroup> = (0..=n).map(|i| homology_group(complex, i)).collect::<Result<_>>()?;
    let critical: Vec<usize> = complex.ranks[..=n].to_vec();
    let sign = |i: usize| if (n - i) % 2 == 0 { 1 } else { -1 };
    let weak = Inequality { lhs: critical[n] as i64, rhs: homology[n].s() as i64 };
    let lhs = (0..=n).map(|i| sign(i) * critical[i] as i64).sum();
    let rhs = homology[n].s() as i64 + (0..n).map(|i| sign(i) * homology[i].rank as i64).sum::<i64>();
    Ok(InequalityReport { dim: n, modulus: complex.modulus, critical, homology, weak, strong: Inequality { lhs, rhs } })
}

/// Chains through `top`, the count-mode Morse complex over Z_d, and its
/// boundary matrices.
pub fn count_complex(trs: &Trs, top: usize, d: u64) -> Result<(ChainSet, TensoredComplex)> {
    let chains = enumerate_chains(trs, top)?;
    let matching = Matching::new(trs);
    let complex = MorseComplex::new(&matching, CountRing { modulus: d });
    let tensored = tensor_zd(&complex, &chains, top, d)?;
    Ok((chains, tensored))
}
