//! Numerical invariants of a decorated model, read off its points.
//!
//! Only height-one points contribute to traces: the stalk contribution of a
//! point of height `h` is `e_order · sum_q (-1)^q binom(h-1, q)` on the
//! `d`-th power when `e_order | d`, which vanishes for `h >= 2`.
//!
//! The zeta function follows the convention
//! `ζ(t) = prod_m det(t - φ | H^m)^{(-1)^{m+1}}`, so a point with
//! multiplicity `s` and Euler characteristic `χ` contributes `(t^{s'} - 1)^{-χ}`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::precondition;
use crate::fan::{is_snc, FanPoint};
use crate::monoid::prime_to_p;
use crate::series::Series;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceReport {
    pub traces: BTreeMap<u64, i64>,
    pub volume: i64,
    pub error_term: i64,
}

/// `prod_m (t^m - 1)^{a_m}`, zero exponents omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZetaFactorization {
    pub factors: BTreeMap<u64, i64>,
}

impl ZetaFactorization {
    fn from_terms(terms: impl IntoIterator<Item = (u64, i64)>) -> Self {
        let mut factors = BTreeMap::new();
        for (m, a) in terms {
            *factors.entry(m).or_insert(0) += a;
        }
        factors.retain(|_, a| *a != 0);
        ZetaFactorization { factors }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// The truncated power series of the product.
    pub fn series(&self, order: usize) -> Series {
        let mut z = Series::one(order);
        for (&m, &a) in &self.factors {
            let f = Series::t_power_minus_one(order, m as usize)
                .pow(a)
                .expect("t^m - 1 has a unit constant term");
            z = &z * &f;
        }
        z
    }
}

impl core::fmt::Display for ZetaFactorization {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (m, a) in &self.factors {
            if !first {
                write!(f, "·")?;
            }
            first = false;
            let base = if *m == 1 { String::from("t-1") } else { alloc::format!("t^{m}-1") };
            write!(f, "({base})^{a}")?;
        }
        Ok(())
    }
}

/// Rank data of the nearby-cycle stalk at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StalkDescriptor {
    pub point_id: String,
    /// `h - 1`
    pub n: usize,
    /// prime-to-`p` part of the content of `e_x`
    pub e_order: u64,
    /// rank in degree `q` is `e_order · binom(n, q)`
    pub rank_profile: Vec<u64>,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

impl StalkDescriptor {
    /// `sum_q (-1)^q tr(φ^d | degree q)`; `φ^d` permutes a torsor under a
    /// cyclic group of order `e_order`, with fixed points only when `e_order | d`.
    pub fn alternating_trace(&self, d: u64) -> i64 {
        if d % self.e_order != 0 {
            return 0;
        }
        self.rank_profile
            .iter()
            .enumerate()
            .map(|(q, &r)| if q % 2 == 0 { r as i64 } else { -(r as i64) })
            .sum()
    }
}

pub fn stalk_descriptor(x: &FanPoint, p: u64) -> StalkDescriptor {
    let n = x.height.saturating_sub(1);
    let e_order = prime_to_p(x.lambda, p);
    StalkDescriptor {
        point_id: x.id.clone(),
        n,
        e_order,
        rank_profile: (0..=n).map(|q| e_order * binomial(n, q)).collect(),
    }
}

fn height_one(points: &[FanPoint]) -> impl Iterator<Item = (u64, u64, i64)> + '_ {
    points
        .iter()
        .filter(|x| x.height == 1)
        .map(|x| (x.s.expect("height one"), x.s_prime.expect("height one"), x.chi))
}

/// `s'(x)` if `x` has height one and `s'(x) | d`, else 0.
pub fn stalk_trace(x: &FanPoint, d: u64) -> i64 {
    match (x.height, x.s_prime) {
        (1, Some(sp)) if d % sp == 0 => sp as i64,
        _ => 0,
    }
}

/// `sum s'(x) χ(x)` over height-one points with `s'(x) | d`.
pub fn trace(points: &[FanPoint], d: u64) -> i64 {
    height_one(points).filter(|&(_, sp, _)| d % sp == 0).map(|(_, sp, chi)| sp as i64 * chi).sum()
}

/// `sum χ(x) · (alternating stalk trace)` over all points, through the rank profiles.
pub fn trace_via_stalks(points: &[FanPoint], p: u64, d: u64) -> i64 {
    points
        .iter()
        .map(|x| x.chi * stalk_descriptor(x, p).alternating_trace(d))
        .sum()
}

/// `sum χ(x)` over height-one points with `s(x) = 1`.
pub fn rational_volume(points: &[FanPoint]) -> i64 {
    height_one(points).filter(|&(s, _, _)| s == 1).map(|(_, _, chi)| chi).sum()
}

fn is_positive_power(mut s: u64, p: u64) -> bool {
    if p < 2 || s < p {
        return false;
    }
    while s % p == 0 {
        s /= p;
    }
    s == 1
}

/// `sum χ(x)` over height-one points with `s(x) = p^r`, `r >= 1`.
pub fn error_term(points: &[FanPoint], p: u64) -> i64 {
    height_one(points).filter(|&(s, _, _)| is_positive_power(s, p)).map(|(_, _, chi)| chi).sum()
}

/// Exponents `a_m = -sum χ(x)` over height-one points with `s'(x) = m`.
pub fn zeta(points: &[FanPoint]) -> ZetaFactorization {
    ZetaFactorization::from_terms(height_one(points).map(|(_, sp, chi)| (sp, -chi)))
}

/// Traces for `d = 1..=max_d`, the volume and the error term; the identity
/// `error_term = trace(1) - volume` is checked.
pub fn trace_report(points: &[FanPoint], p: u64, max_d: u64) -> Result<TraceReport> {
    if max_d == 0 {
        return Err(precondition!("trace horizon must be positive"));
    }
    let traces: BTreeMap<u64, i64> = (1..=max_d).map(|d| (d, trace(points, d))).collect();
    let volume = rational_volume(points);
    let error_term = error_term(points, p);
    if error_term != traces[&1] - volume {
        return Err(Error::Inconsistent(alloc::format!(
            "error term {error_term} differs from trace(1) - volume = {}",
            traces[&1] - volume
        )));
    }
    Ok(TraceReport {
        traces,
        volume,
        error_term,
    })
}

/// `lcm` of the `s'` values at points with `χ != 0`, capped at 60. Points
/// with `χ = 0` add nothing to any trace, and skipping them keeps the horizon
/// stable under subdivision.
pub fn default_horizon(points: &[FanPoint]) -> u64 {
    let l = height_one(points)
        .filter(|&(_, _, chi)| chi != 0)
        .fold(1u64, |acc, (_, sp, _)| acc.lcm(&sp).min(1 << 20));
    l.min(60)
}

/// Checks, to order `order`, that `sum s'χ t^{s'} / (1 - t^{s'})` and the
/// logarithmic derivative `t ζ'/ζ` both have `trace(d)` as coefficient of `t^d`.
pub fn zeta_trace_crosscheck(points: &[FanPoint], order: usize) -> Result<bool> {
    if order == 0 {
        return Err(precondition!("series order must be positive"));
    }
    let len = order + 1;
    let q = |n: i64| BigRational::from_integer(BigInt::from(n));
    let mut direct = Series::zero(len);
    for (_, sp, chi) in height_one(points) {
        let m = sp as usize;
        let geometric = (&Series::one(len) - &Series::monomial(len, m, 1)).inverse().expect("unit constant");
        let term = &Series::monomial(len, m, 1) * &geometric;
        direct = &direct + &term.scale(&q(sp as i64 * chi));
    }
    let z = zeta(points).series(len);
    let log_derivative = &(&Series::monomial(len, 1, 1) * &z.derivative()) * &z.inverse().expect("ζ(0) = ±1");
    for d in 1..=order {
        let expected = q(trace(points, d as u64));
        for (what, s) in [("geometric expansion", &direct), ("logarithmic derivative of zeta", &log_derivative)] {
            if *s.coeff(d) != expected {
                return Err(Error::Inconsistent(alloc::format!(
                    "{what}: coefficient of t^{d} is {} but trace({d}) = {}",
                    s.coeff(d),
                    expected
                )));
            }
        }
    }
    Ok(true)
}

/// The zeta function of an SNC model from its special fibre cycle.
pub fn snc_acampo(points: &[FanPoint], p: u64) -> Result<ZetaFactorization> {
    let report = is_snc(points);
    let Some(cycle) = report.special_fibre_cycle else {
        return Err(precondition!("the model is not strict normal crossings"));
    };
    let chi: BTreeMap<&str, i64> = points.iter().map(|x| (x.id.as_str(), x.chi)).collect();
    Ok(ZetaFactorization::from_terms(
        cycle.iter().map(|(id, s)| (prime_to_p(*s, p), -chi[id.as_str()])),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub trace_one: i64,
    pub volume: i64,
}

/// `trace(1) = volume` for a model that passed the log smooth consistency check.
pub fn main_theorem_check(points: &[FanPoint]) -> Result<Verdict> {
    let v = Verdict {
        trace_one: trace(points, 1),
        volume: rational_volume(points),
    };
    if v.trace_one != v.volume {
        return Err(Error::Inconsistent(alloc::format!(
            "trace(1) = {} but volume = {}",
            v.trace_one,
            v.volume
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::fan::FaceRef;
    use crate::monoid::AffineMonoid;

    /// A synthetic point; only the fields the formulas read are meaningful.
    fn pt(height: usize, s: u64, chi: i64, p: u64) -> FanPoint {
        FanPoint {
            id: alloc::format!("x{height}-{s}-{chi}"),
            face: FaceRef::new(0, Vec::new()),
            members: Vec::new(),
            cone: Cone::zero(1),
            height,
            stalk: AffineMonoid::trivial(0),
            e_x: alloc::vec![s as i64],
            s: (height == 1).then_some(s),
            s_prime: (height == 1).then_some(prime_to_p(s, p)),
            lambda: s,
            chi,
            ray_multiplicities: Vec::new(),
        }
    }

    fn i0_star(p: u64) -> Vec<FanPoint> {
        let mut v: Vec<FanPoint> = (0..4).map(|_| pt(1, 1, 1, p)).collect();
        v.push(pt(1, 2, -2, p));
        v
    }

    #[test]
    fn stalk_trace_examples() {
        assert_eq!(stalk_trace(&pt(1, 6, 1, 3), 4), 2);
        assert_eq!(stalk_trace(&pt(2, 6, 1, 3), 4), 0);
        for d in 1..10 {
            assert_eq!(stalk_trace(&pt(1, 1, 1, 0), d), 1);
        }
    }

    #[test]
    fn i0_star_values() {
        let pts = i0_star(5);
        assert_eq!((trace(&pts, 1), trace(&pts, 2)), (4, 0));
        assert_eq!(rational_volume(&pts), 4);
        assert_eq!(error_term(&pts, 5), 0);
        assert_eq!(zeta(&pts).factors, [(1, -4), (2, 2)].into_iter().collect());
        assert_eq!(trace_via_stalks(&pts, 5, 2), 0);
        assert!(zeta_trace_crosscheck(&pts, 12).unwrap());
        let expected: Vec<i64> = (1..=12).map(|d| if d % 2 == 1 { 4 } else { 0 }).collect();
        assert_eq!((1..=12).map(|d| trace(&pts, d)).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn good_reduction() {
        let pts = alloc::vec![pt(1, 1, 3, 0)];
        assert!((1..20).all(|d| trace(&pts, d) == 3));
        assert_eq!(rational_volume(&pts), 3);
        assert_eq!(zeta(&pts).factors, [(1, -3)].into_iter().collect());
        assert!(zeta_trace_crosscheck(&pts, 20).unwrap());
        assert_eq!(main_theorem_check(&pts).unwrap(), Verdict { trace_one: 3, volume: 3 });
    }

    #[test]
    fn error_term_examples() {
        assert_eq!(error_term(&[pt(1, 3, 5, 3)], 3), 5);
        assert_eq!(error_term(&[pt(1, 9, 5, 3), pt(1, 6, 1, 3)], 3), 5);
        assert_eq!(error_term(&[pt(1, 3, 5, 3)], 0), 0);
        let pts = alloc::vec![pt(1, 3, 5, 3), pt(1, 1, 2, 3)];
        assert_eq!(error_term(&pts, 3), trace(&pts, 1) - rational_volume(&pts));
        assert!(main_theorem_check(&pts).is_err());
    }

    #[test]
    fn height_two_contributes_nothing() {
        let pts = alloc::vec![pt(2, 1, 7, 0), pt(3, 1, -2, 0)];
        for d in 1..8 {
            assert_eq!(trace(&pts, d), 0);
            assert_eq!(trace_via_stalks(&pts, 0, d), 0);
        }
        assert!(zeta(&pts).is_one());
    }

    #[test]
    fn descriptors() {
        let d = stalk_descriptor(&pt(1, 4, 1, 2), 2);
        assert_eq!((d.n, d.e_order, d.rank_profile.clone()), (0, 1, alloc::vec![1]));
        let mut x = pt(3, 1, 1, 0);
        x.lambda = 1;
        assert_eq!(stalk_descriptor(&x, 0).rank_profile, alloc::vec![1, 2, 1]);
        let mut y = pt(2, 1, 1, 0);
        y.lambda = 2;
        let d = stalk_descriptor(&y, 0);
        assert_eq!(d.rank_profile, alloc::vec![2, 2]);
        assert_eq!(d.alternating_trace(2), 0);
    }

    #[test]
    fn horizon() {
        assert_eq!(default_horizon(&i0_star(5)), 2);
        assert_eq!(default_horizon(&[pt(1, 7, 1, 0), pt(1, 11, 1, 0)]), 60);
        assert_eq!(default_horizon(&[]), 1);
        assert_eq!(default_horizon(&[pt(1, 1, 1, 0), pt(1, 7, 0, 0)]), 1);
    }

    #[test]
    fn zeta_display() {
        assert_eq!(alloc::format!("{}", zeta(&i0_star(5))), "(t-1)^-4·(t^2-1)^2");
        assert_eq!(alloc::format!("{}", ZetaFactorization::default()), "1");
    }
}
