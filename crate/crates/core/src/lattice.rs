//! Sublattices of `Z^n` and finitely generated quotients.
//!
//! A [`Lattice`] is stored by its row-style Hermite basis, so two generating
//! sets of the same subgroup produce identical values (and identical hashes).
//! A [`QuotientGroup`] carries the Smith normal form data of `Z^n / L`
//! together with the coordinate change that realises it.

use alloc::vec;
use alloc::vec::Vec;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::check_len;
use crate::linalg::{self, to_big, to_i64, vec_mat};
use crate::{Error, IntVec, Result};

/// A subgroup of `Z^ambient_rank`, in canonical Hermite form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    ambient_rank: usize,
    basis: Vec<IntVec>,
}

impl Lattice {
    pub fn zero(ambient_rank: usize) -> Self {
        Lattice {
            ambient_rank,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_rank: usize) -> Self {
        let basis = (0..ambient_rank)
            .map(|i| (0..ambient_rank).map(|j| i64::from(i == j)).collect())
            .collect();
        Lattice {
            ambient_rank,
            basis,
        }
    }

    /// The lattice generated by `vectors`.
    pub fn new(ambient_rank: usize, vectors: &[IntVec]) -> Result<Self> {
        for v in vectors {
            check_len(ambient_rank, v)?;
        }
        Ok(Lattice {
            ambient_rank,
            basis: linalg::hnf(vectors, ambient_rank)?,
        })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[IntVec] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Coordinates of `v` in the Hermite basis, or `None` if `v` is not in the lattice.
    pub fn coordinates(&self, v: &[i64]) -> Result<Option<IntVec>> {
        check_len(self.ambient_rank, v)?;
        let mut residual: Vec<i128> = v.iter().map(|&x| i128::from(x)).collect();
        let mut coords = Vec::with_capacity(self.basis.len());
        for row in &self.basis {
            let p = row.iter().position(|&x| x != 0).expect("Hermite rows are nonzero");
            let pivot = i128::from(row[p]);
            if residual[p] % pivot != 0 {
                return Ok(None);
            }
            let c = residual[p] / pivot;
            if c != 0 {
                for (r, &b) in residual.iter_mut().zip(row) {
                    let delta = c.checked_mul(i128::from(b)).ok_or(Error::Overflow)?;
                    *r = r.checked_sub(delta).ok_or(Error::Overflow)?;
                }
            }
            coords.push(i64::try_from(c).map_err(|_| Error::Overflow)?);
        }
        if residual.iter().any(|&r| r != 0) {
            return Ok(None);
        }
        Ok(Some(coords))
    }

    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        Ok(self.coordinates(v)?.is_some())
    }

    /// `sum coords_i * basis_i`.
    pub fn combine(&self, coords: &[i64]) -> IntVec {
        let mut out = vec![0i64; self.ambient_rank];
        for (c, row) in coords.iter().zip(&self.basis) {
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
        out
    }

    /// `{x in Z^n : <x, b> = 0 for every basis vector b}`.
    pub fn orthogonal(&self) -> Result<Lattice> {
        Ok(Lattice {
            ambient_rank: self.ambient_rank,
            basis: linalg::kernel(&self.basis, self.ambient_rank)?,
        })
    }

    /// `span_Q(L) ∩ Z^n`.
    pub fn saturation(&self) -> Result<Lattice> {
        self.orthogonal()?.orthogonal()
    }

    /// Index of `self` inside its saturation.
    pub fn saturation_index(&self) -> Result<u64> {
        let sat = self.saturation()?;
        let coords: Vec<IntVec> = self
            .basis
            .iter()
            .map(|b| sat.coordinates(b).map(|c| c.expect("lattice lies in its saturation")))
            .collect::<Result<_>>()?;
        let d = linalg::det(&coords);
        d.magnitude().to_u64().ok_or(Error::Overflow)
    }

    pub fn contains_lattice(&self, other: &Lattice) -> Result<bool> {
        for b in &other.basis {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The lattice generated by `vectors` in canonical form.
pub fn canonicalize(vectors: &[IntVec], ambient_rank: usize) -> Result<Lattice> {
    Lattice::new(ambient_rank, vectors)
}

pub fn member(lattice: &Lattice, v: &[i64]) -> Result<bool> {
    lattice.contains(v)
}

/// gcd of the entries; `0` for the zero vector.
pub fn content(v: &[i64]) -> u64 {
    v.iter().fold(0u64, |g, &x| g.gcd(&x.unsigned_abs()))
}

/// `v / content(v)`; the zero vector is returned unchanged.
pub fn primitive(v: &[i64]) -> IntVec {
    let c = content(v) as i64;
    if c <= 1 {
        return v.to_vec();
    }
    v.iter().map(|x| x / c).collect()
}

/// `Z^ambient_rank / relations`, with Smith normal form data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientGroup {
    ambient_rank: usize,
    relations: Lattice,
    invariant_factors: Vec<i64>,
    free_rank: usize,
    /// number of unit Smith entries preceding the invariant factors
    units: usize,
    v: Vec<IntVec>,
    vinv: Vec<IntVec>,
}

pub fn quotient(ambient_rank: usize, relations: &Lattice) -> Result<QuotientGroup> {
    if relations.ambient_rank() != ambient_rank {
        return Err(Error::DimensionMismatch {
            expected: ambient_rank,
            found: relations.ambient_rank(),
        });
    }
    let s = linalg::smith(relations.basis(), ambient_rank);
    let diag: Vec<i64> = s
        .diag
        .iter()
        .map(linalg::big_to_i64)
        .collect::<Result<_>>()?;
    let units = diag.iter().take_while(|&&x| x == 1).count();
    let invariant_factors = diag[units..].to_vec();
    debug_assert!(invariant_factors.windows(2).all(|w| w[1] % w[0] == 0));
    Ok(QuotientGroup {
        ambient_rank,
        relations: relations.clone(),
        invariant_factors,
        free_rank: ambient_rank - diag.len(),
        units,
        v: s.v.iter().map(|r| to_i64(r)).collect::<Result<_>>()?,
        vinv: s.vinv.iter().map(|r| to_i64(r)).collect::<Result<_>>()?,
    })
}

impl QuotientGroup {
    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn relations(&self) -> &Lattice {
        &self.relations
    }

    /// `d_1 | d_2 | ...`, all greater than one.
    pub fn invariant_factors(&self) -> &[i64] {
        &self.invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion_order(&self) -> u64 {
        self.invariant_factors.iter().map(|&d| d as u64).product()
    }

    fn smith_coordinates(&self, x: &[i64]) -> Result<Vec<BigInt>> {
        check_len(self.ambient_rank, x)?;
        let v: Vec<_> = self.v.iter().map(|r| to_big(r)).collect();
        Ok(vec_mat(&to_big(x), &v))
    }

    /// Image of `x` in `Z^free_rank`, the quotient modulo torsion.
    pub fn free_part(&self, x: &[i64]) -> Result<IntVec> {
        let y = self.smith_coordinates(x)?;
        let r = self.units + self.invariant_factors.len();
        to_i64(&y[r..])
    }

    /// Torsion coordinates of `x`, reduced into `[0, d_i)`.
    pub fn torsion_part(&self, x: &[i64]) -> Result<IntVec> {
        let y = self.smith_coordinates(x)?;
        self.invariant_factors
            .iter()
            .enumerate()
            .map(|(i, &d)| linalg::big_to_i64(&y[self.units + i].mod_floor(&BigInt::from(d))))
            .collect()
    }

    /// Canonical label of the class of `x`: torsion coordinates then free coordinates.
    pub fn class_of(&self, x: &[i64]) -> Result<IntVec> {
        let mut t = self.torsion_part(x)?;
        t.extend(self.free_part(x)?);
        Ok(t)
    }

    /// Whether `x` lies in the relation lattice.
    pub fn is_zero(&self, x: &[i64]) -> Result<bool> {
        Ok(self.class_of(x)?.iter().all(|&c| c == 0))
    }

    /// An ambient representative of the class with the given torsion and free coordinates.
    pub fn lift(&self, torsion: &[i64], free: &[i64]) -> Result<IntVec> {
        check_len(self.invariant_factors.len(), torsion)?;
        check_len(self.free_rank, free)?;
        let mut y = vec![0i64; self.units];
        y.extend_from_slice(torsion);
        y.extend_from_slice(free);
        let vinv: Vec<_> = self.vinv.iter().map(|r| to_big(r)).collect();
        to_i64(&vec_mat(&to_big(&y), &vinv))
    }

    fn torsion_grid(&self, steps: &[(i64, i64)]) -> Result<Vec<IntVec>> {
        let free = vec![0i64; self.free_rank];
        if steps.is_empty() {
            return Ok(vec![self.lift(&[], &free)?]);
        }
        steps
            .iter()
            .map(|&(step, count)| (0..count).map(move |c| c * step))
            .multi_cartesian_product()
            .map(|t| self.lift(&t, &free))
            .collect()
    }

    /// One representative per torsion element.
    pub fn torsion_elements(&self) -> Result<Vec<IntVec>> {
        let steps: Vec<(i64, i64)> = self.invariant_factors.iter().map(|&d| (1, d)).collect();
        self.torsion_grid(&steps)
    }
}

/// One ambient representative per element of the `d`-torsion subgroup.
pub fn d_torsion_representatives(group: &QuotientGroup, d: u64) -> Result<Vec<IntVec>> {
    if d == 0 {
        return Err(crate::error::precondition!("torsion level must be positive"));
    }
    let d = d as i64;
    let steps: Vec<(i64, i64)> = group
        .invariant_factors
        .iter()
        .map(|&di| {
            let g = d.gcd(&di);
            (di / g, g)
        })
        .collect();
    group.torsion_grid(&steps)
}

/// `|det|` of a square integer matrix.
pub(crate) fn abs_det(rows: &[IntVec]) -> Result<u64> {
    let d = linalg::det(rows);
    if d == BigInt::one() || d == -BigInt::one() {
        return Ok(1);
    }
    d.magnitude().to_u64().ok_or(Error::Overflow)
}
