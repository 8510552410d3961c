//! Exact prime machinery: segmented sieves, interval factorization, and the
//! integer counts every analytic estimate is checked against.
//!
//! The sieve core is a segmented sieve of Eratosthenes over odd numbers
//! only, one bit per odd integer, processed in blocks of 2^20 bits
//! (2^21 integers) so the working set stays cache-resident. The same core
//! backs three consumers:
//!
//! * [`primes_up_to`] materializes a [`PrimeTable`] (used wherever repeated
//!   trial division or membership queries are needed);
//! * [`segment_primes`] enumerates the primes of an arbitrary aligned window
//!   given a base table covering its square root — the building block the
//!   scan drivers use to parallelize by fixed segments;
//! * [`next_prime_after`] extends a scan past a range endpoint.
//!
//! Interval factorization ([`factor_interval`]) runs the dual sieve: instead
//! of crossing off multiples it divides them out, so every member of the
//! target interval ends up with its full factorization and multiplicity
//! count. Everything here is integer-exact; the only floating point is in
//! [`mertens_product`] / [`prime_reciprocal_sum`], which use compensated
//! summation of logs and reciprocals.

use num_integer::Roots;

use crate::scalar::NeumaierSum;
use crate::{Error, Result};

/// Odd-only sieve block: 2^20 bits, spanning 2^21 consecutive integers.
const SEGMENT_BITS: usize = 1 << 20;

/// Primes up to a fixed limit, stored in increasing order.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// The inclusive bound the table was sieved to.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes `<= limit`, increasing.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Largest prime in the table.
    pub fn last(&self) -> u64 {
        *self.primes.last().expect("table always contains 2")
    }

    /// Number of primes `<= x` (exact, by binary search).
    pub fn count_up_to(&self, x: u64) -> u64 {
        debug_assert!(x <= self.limit);
        self.primes.partition_point(|&p| p <= x) as u64
    }

    /// Membership test for `x <= limit`.
    pub fn contains(&self, x: u64) -> bool {
        debug_assert!(x <= self.limit);
        self.primes.binary_search(&x).is_ok()
    }
}

/// Simple (non-segmented) sieve used for base primes up to `~sqrt(limit)`.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Sieves the odd numbers of `[lo, hi)` into `bits` (bit k set = composite),
/// where `lo` is odd and `base` contains all odd primes `<= sqrt(hi - 1)`.
/// Bit `k` represents the odd number `lo + 2k`.
fn mark_odd_composites(bits: &mut [u64], lo: u64, hi: u64, base: &[u64]) {
    bits.iter_mut().for_each(|w| *w = 0);
    debug_assert!(lo % 2 == 1);
    for &p in base {
        if p == 2 {
            continue;
        }
        if p * p >= hi {
            break;
        }
        // First odd multiple of p in [max(p^2, lo), hi).
        let mut m = p * p;
        if m < lo {
            m = lo.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
        }
        while m < hi {
            let k = ((m - lo) / 2) as usize;
            bits[k / 64] |= 1 << (k % 64);
            m += 2 * p;
        }
    }
}

/// Calls `out` for every prime in `[lo, hi)`, in increasing order.
///
/// `base` must contain every prime `<= sqrt(hi - 1)`; the table returned by
/// [`primes_up_to`] on any bound at least that large qualifies. Fully
/// deterministic and self-contained per window, so disjoint windows can be
/// processed on different workers and their outputs concatenated in window
/// order.
pub fn segment_primes(lo: u64, hi: u64, base: &PrimeTable, mut out: impl FnMut(u64)) -> Result<()> {
    if hi <= lo {
        return Ok(());
    }
    let need = (hi - 1).sqrt();
    if base.limit < need {
        return Err(Error::InsufficientTable {
            needed: need,
            have: base.limit,
        });
    }
    if lo <= 2 && 2 < hi {
        out(2);
    }
    // Odd candidates only.
    let mut cur = lo.max(3);
    if cur % 2 == 0 {
        cur += 1;
    }
    let mut bits = vec![0u64; SEGMENT_BITS / 64];
    while cur < hi {
        let span_end = hi.min(cur + (SEGMENT_BITS as u64) * 2);
        let nbits = ((span_end - cur) as usize).div_ceil(2);
        mark_odd_composites(&mut bits[..nbits.div_ceil(64)], cur, span_end, base.primes());
        for k in 0..nbits {
            if bits[k / 64] & (1 << (k % 64)) == 0 {
                let p = cur + 2 * k as u64;
                if p > 1 {
                    out(p);
                }
            }
        }
        cur = span_end;
        if cur % 2 == 0 {
            cur += 1;
        }
    }
    Ok(())
}

/// Sieves all primes `<= limit` into a [`PrimeTable`].
///
/// Errors with an empty-domain message when `limit < 2` (there are no primes
/// to tabulate).
pub fn primes_up_to(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::EmptyDomain(format!(
            "primes_up_to({limit}): no primes below 2"
        )));
    }
    let base = PrimeTable {
        limit: limit.sqrt().max(2),
        primes: small_primes(limit.sqrt().max(2)),
    };
    let mut primes = Vec::new();
    segment_primes(2, limit + 1, &base, |p| primes.push(p))?;
    Ok(PrimeTable { limit, primes })
}

/// Counts primes `<= limit` without materializing them.
pub fn count_primes_up_to(limit: u64) -> Result<u64> {
    if limit < 2 {
        return Ok(0);
    }
    let base = primes_up_to(limit.sqrt().max(2))?;
    let mut n = 0u64;
    segment_primes(2, limit + 1, &base, |_| n += 1)?;
    Ok(n)
}

/// Smallest prime strictly greater than `x`.
///
/// Sieves ahead in growing windows; by Bertrand's postulate the answer is
/// below `2x + 2`, so termination is immediate in practice.
pub fn next_prime_after(x: u64) -> Result<u64> {
    let mut lo = x + 1;
    let mut width = 512u64;
    loop {
        let hi = lo.saturating_add(width);
        let base = primes_up_to((hi - 1).sqrt().max(2))?;
        let mut found = None;
        segment_primes(lo, hi, &base, |p| {
            if found.is_none() {
                found = Some(p);
            }
        })?;
        if let Some(p) = found {
            return Ok(p);
        }
        lo = hi;
        width *= 2;
    }
}

/// Number of prime factors counted with multiplicity, by trial division.
///
/// Errors on `a = 0` (every prime divides 0; the count is undefined).
/// `big_omega(1) = 0`. Runtime is governed by the second-largest prime
/// factor; intended for spot checks, not bulk counting — bulk counting goes
/// through [`factor_interval`].
pub fn big_omega(a: u128) -> Result<u32> {
    if a == 0 {
        return Err(Error::Undefined(
            "big_omega(0): prime multiplicity is undefined at 0".into(),
        ));
    }
    let mut rem = a;
    let mut count = 0u32;
    while rem % 2 == 0 {
        rem /= 2;
        count += 1;
    }
    let mut d: u128 = 3;
    while d * d <= rem {
        while rem % d == 0 {
            rem /= d;
            count += 1;
        }
        d += 2;
    }
    if rem > 1 {
        count += 1;
    }
    Ok(count)
}

/// Early-exit multiplicity probe: `Some(omega)` if `Omega(a) <= k`, else
/// `None` as soon as the count exceeds `k`.
///
/// `table` must contain every prime `<= sqrt(a)`. This is the hot inner test
/// of the direct interval verifications, where almost every candidate fails
/// low (a random integer near `10^10` has about `ln ln 10^10 ~ 3.1` factors).
pub fn omega_at_most(a: u64, k: u32, table: &PrimeTable) -> Result<Option<u32>> {
    if a == 0 {
        return Err(Error::Undefined(
            "omega_at_most(0, ..): prime multiplicity is undefined at 0".into(),
        ));
    }
    let need = a.sqrt();
    if table.limit() < need {
        return Err(Error::InsufficientTable {
            needed: need,
            have: table.limit(),
        });
    }
    let mut rem = a;
    let mut count = 0u32;
    for &p in table.primes() {
        if p * p > rem {
            break;
        }
        while rem % p == 0 {
            rem /= p;
            count += 1;
            if count > k {
                return Ok(None);
            }
        }
    }
    if rem > 1 {
        count += 1;
    }
    Ok(if count <= k { Some(count) } else { None })
}

/// The fully factored short interval `A = (N, N + 2 sqrt N)`: all integers
/// strictly between `N` and `N + 2 sqrt N`, each with its prime
/// factorization and multiplicity count.
#[derive(Debug, Clone)]
pub struct FactoredInterval {
    n: u128,
    first: u64,
    omegas: Vec<u8>,
    factors: Vec<Vec<(u64, u8)>>,
}

impl FactoredInterval {
    /// The interval parameter `N`.
    pub fn n(&self) -> u128 {
        self.n
    }

    /// Number of members; equals `2*floor-ish(sqrt N)` up to the boundary
    /// corrections the open interval forces.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Smallest member (`N + 1`).
    pub fn first(&self) -> u64 {
        self.first
    }

    /// Largest member (the greatest integer below `N + 2 sqrt N`).
    pub fn last(&self) -> u64 {
        self.first + self.omegas.len() as u64 - 1
    }

    /// Member at index `i`.
    pub fn member(&self, i: usize) -> u64 {
        self.first + i as u64
    }

    /// `Omega` of the member at index `i`.
    pub fn omega(&self, i: usize) -> u32 {
        self.omegas[i] as u32
    }

    /// Prime factorization (increasing primes with exponents) of member `i`.
    pub fn factors(&self, i: usize) -> &[(u64, u8)] {
        &self.factors[i]
    }

    /// Smallest multiplicity over all members.
    pub fn min_omega(&self) -> u32 {
        self.omegas.iter().copied().min().unwrap_or(0) as u32
    }

    /// Iterator over `(member, omega)` pairs in increasing member order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.omegas
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.first + i as u64, w as u32))
    }
}

/// Factors every integer in the open interval `(N, N + 2 sqrt N)`.
///
/// Sieve-based: for each table prime `p` up to the square root of the
/// largest member, the multiples of `p` inside the interval get `p` divided
/// out; whatever remains greater than 1 afterwards is a single prime
/// exceeding that square root. Cost is `O(|A| log log X + pi(sqrt X))`.
///
/// Preconditions: `N >= 1`, and the table must cover the square root of the
/// largest member.
pub fn factor_interval(n: u128, table: &PrimeTable) -> Result<FactoredInterval> {
    if n < 1 {
        return Err(Error::Precondition(
            "factor_interval: N must be at least 1".into(),
        ));
    }
    // Largest integer strictly below N + 2 sqrt N, via t = floor(sqrt(4N)):
    // N + t overshoots exactly when 4N is a perfect square.
    let t = (4 * n).sqrt();
    let hi = if t * t == 4 * n { n + t - 1 } else { n + t };
    let lo = n + 1;
    if hi > u64::MAX as u128 {
        return Err(Error::Precondition(format!(
            "factor_interval: members up to {hi} exceed the supported 64-bit member range"
        )));
    }
    let (lo, hi) = (lo as u64, hi as u64);
    let need = hi.sqrt();
    if table.limit() < need {
        return Err(Error::InsufficientTable {
            needed: need,
            have: table.limit(),
        });
    }
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut omegas = vec![0u8; len];
    let mut factors: Vec<Vec<(u64, u8)>> = vec![Vec::new(); len];
    for &p in table.primes() {
        if p > need {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            let mut e = 0u8;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            debug_assert!(e > 0);
            omegas[i] += e;
            factors[i].push((p, e));
            m += p;
        }
    }
    for i in 0..len {
        if rem[i] > 1 {
            omegas[i] += 1;
            factors[i].push((rem[i], 1));
        }
    }
    Ok(FactoredInterval {
        n,
        first: lo,
        omegas,
        factors,
    })
}

/// Exact count of squarefree integers `<= x` (0 for `x < 1`).
///
/// Uses the Möbius identity `sum_{d <= sqrt x} mu(d) floor(x / d^2)`; the
/// Möbius values come from a smallest-prime-factor sieve up to `sqrt x`, so
/// the whole computation is `O(sqrt x log log x)`.
pub fn squarefree_count(x: f64) -> u64 {
    if x < 1.0 {
        return 0;
    }
    let cap = x.floor() as u64;
    let s = cap.sqrt() as usize;
    // mu[d] via smallest-prime-factor sieve on [1, s].
    let mut spf = vec![0u32; s + 1];
    for i in 2..=s {
        if spf[i] == 0 {
            let mut m = i;
            while m <= s {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    let mut mu = vec![0i8; s + 1];
    if s >= 1 {
        mu[1] = 1;
    }
    for d in 2..=s {
        let p = spf[d] as usize;
        let q = d / p;
        mu[d] = if q % p == 0 { 0 } else { -mu[q] };
    }
    let mut acc: i64 = 0;
    for d in 1..=s {
        if mu[d] != 0 {
            let term = (cap / ((d as u64) * (d as u64))) as i64;
            acc += mu[d] as i64 * term;
        }
    }
    debug_assert!(acc >= 0);
    acc as u64
}

/// The Mertens-type product `I(x) = prod_{p <= x} (1 - 1/p)^{-1}`, evaluated
/// as `exp` of a compensated log sum.
///
/// Preconditions: `x >= 2` (domain of the product) and the table must cover
/// `floor(x)` (membership is an exact integer comparison after flooring).
pub fn mertens_product(x: f64, table: &PrimeTable) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Domain {
            what: "mertens_product x",
            value: x,
            range: "[2, table limit]",
        });
    }
    let cap = x.floor() as u64;
    if table.limit() < cap {
        return Err(Error::InsufficientTable {
            needed: cap,
            have: table.limit(),
        });
    }
    let mut sum = NeumaierSum::new();
    for &p in table.primes() {
        if p > cap {
            break;
        }
        sum += -(-1.0 / p as f64).ln_1p();
    }
    Ok(sum.value().exp())
}

/// Compensated `sum_{a <= p < b} 1/p` over primes in the half-open interval.
///
/// Preconditions: `2 <= a < b <= table limit + 1` (all candidate primes must
/// be covered by the table).
pub fn prime_reciprocal_sum(a: f64, b: f64, table: &PrimeTable) -> Result<f64> {
    if !(a >= 2.0) || !(b > a) {
        return Err(Error::Precondition(format!(
            "prime_reciprocal_sum: need 2 <= a < b, got a = {a}, b = {b}"
        )));
    }
    if (table.limit() as f64) + 1.0 < b {
        return Err(Error::InsufficientTable {
            needed: b.ceil() as u64,
            have: table.limit(),
        });
    }
    let start = table.primes.partition_point(|&p| (p as f64) < a);
    let mut sum = NeumaierSum::new();
    for &p in &table.primes[start..] {
        if (p as f64) >= b {
            break;
        }
        sum += 1.0 / p as f64;
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::EULER_GAMMA;

    /// Independent primality oracle: plain trial division by every odd.
    fn is_prime_naive(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        if n % 2 == 0 {
            return n == 2;
        }
        let mut d = 3;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        true
    }

    #[test]
    fn small_prime_listing() {
        let t = primes_up_to(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert_eq!(t.limit(), 10);
        let t = primes_up_to(2).unwrap();
        assert_eq!(t.primes(), &[2]);
    }

    #[test]
    fn limit_below_two_is_empty_domain() {
        assert!(matches!(primes_up_to(1), Err(Error::EmptyDomain(_))));
        assert!(matches!(primes_up_to(0), Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn prime_counts_match_trial_division_oracle() {
        let t = primes_up_to(100_000).unwrap();
        let oracle = (2..=100_000u64).filter(|&n| is_prime_naive(n)).count();
        assert_eq!(t.len(), oracle);
        assert_eq!(t.len(), 9592);
        for &p in &t.primes()[..200] {
            assert!(is_prime_naive(p));
        }
        for &p in t.primes().iter().rev().take(200) {
            assert!(is_prime_naive(p));
        }
    }

    #[test]
    fn pi_of_one_million() {
        let t = primes_up_to(1_000_000).unwrap();
        assert_eq!(t.len(), 78498);
        assert_eq!(count_primes_up_to(1_000_000).unwrap(), 78498);
    }

    #[test]
    fn largest_prime_below_12000() {
        let t = primes_up_to(12000).unwrap();
        assert_eq!(t.last(), 11987);
        assert!(is_prime_naive(11987));
        for n in 11988..=12000 {
            assert!(!is_prime_naive(n));
        }
    }

    #[test]
    fn segment_enumeration_matches_table() {
        let base = primes_up_to(1000).unwrap();
        let mut got = Vec::new();
        segment_primes(900_000, 1_000_000, &base, |p| got.push(p)).unwrap();
        let want: Vec<u64> = primes_up_to(1_000_000)
            .unwrap()
            .primes()
            .iter()
            .copied()
            .filter(|&p| (900_000..1_000_000).contains(&p))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn segment_requires_adequate_base() {
        let base = primes_up_to(100).unwrap();
        let r = segment_primes(1_000_000, 2_000_000, &base, |_| {});
        assert!(matches!(r, Err(Error::InsufficientTable { .. })));
    }

    #[test]
    fn next_prime_probes() {
        assert_eq!(next_prime_after(12000).unwrap(), 12007);
        assert_eq!(next_prime_after(2).unwrap(), 3);
        assert_eq!(next_prime_after(13).unwrap(), 17);
        assert_eq!(next_prime_after(0).unwrap(), 2);
    }

    #[test]
    fn big_omega_spot_values() {
        assert_eq!(big_omega(1).unwrap(), 0);
        assert_eq!(big_omega(2).unwrap(), 1);
        assert_eq!(big_omega(975).unwrap(), 4); // 3 * 5^2 * 13
        assert_eq!(big_omega(1u128 << 100).unwrap(), 100);
        assert!(matches!(big_omega(0), Err(Error::Undefined(_))));
    }

    #[test]
    fn big_omega_of_four_times_prime_is_three() {
        for p in [3u128, 29, 101, 9973, 104729] {
            assert_eq!(big_omega(4 * p).unwrap(), 3);
        }
    }

    #[test]
    fn big_omega_is_additive() {
        for (a, b) in [(6u128, 35), (1024, 243), (97, 89), (1, 77), (975, 975)] {
            assert_eq!(
                big_omega(a * b).unwrap(),
                big_omega(a).unwrap() + big_omega(b).unwrap()
            );
        }
    }

    #[test]
    fn omega_at_most_agrees_with_big_omega() {
        let t = primes_up_to(1000).unwrap();
        for a in 1..=5000u64 {
            let w = big_omega(a as u128).unwrap();
            for k in 0..6 {
                let got = omega_at_most(a, k, &t).unwrap();
                if w <= k {
                    assert_eq!(got, Some(w), "a = {a}, k = {k}");
                } else {
                    assert_eq!(got, None, "a = {a}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn interval_n16_members_and_multiplicities() {
        let t = primes_up_to(100).unwrap();
        let f = factor_interval(16, &t).unwrap();
        // (16, 24) with 2 sqrt 16 = 8: members 17..=23.
        assert_eq!(f.first(), 17);
        assert_eq!(f.last(), 23);
        assert_eq!(f.len(), 7);
        assert_eq!(f.omega(0), 1); // 17 is prime
        assert_eq!(f.omega(1), 3); // 18 = 2 * 3^2
    }

    #[test]
    fn interval_member_count_at_perfect_square() {
        let t = primes_up_to(2000).unwrap();
        let f = factor_interval(1_000_000, &t).unwrap();
        // N = 1000^2: the open interval (N, N + 2000) has 1999 members.
        assert_eq!(f.len(), 1999);
        assert_eq!(f.first(), 1_000_001);
        assert_eq!(f.last(), 1_001_999);
    }

    #[test]
    fn interval_n100_contains_a_prime() {
        let t = primes_up_to(100).unwrap();
        let f = factor_interval(100, &t).unwrap();
        assert_eq!(f.min_omega(), 1); // 101 is prime
    }

    #[test]
    fn interval_factorizations_reconstruct_members() {
        let t = primes_up_to(4000).unwrap();
        for n in [16u128, 100, 9999, 1_000_000, 12_345_678] {
            let f = factor_interval(n, &t).unwrap();
            for i in 0..f.len() {
                let mut prod: u128 = 1;
                let mut omega = 0u32;
                for &(p, e) in f.factors(i) {
                    prod *= (p as u128).pow(e as u32);
                    omega += e as u32;
                }
                assert_eq!(prod, f.member(i) as u128);
                assert_eq!(omega, f.omega(i));
            }
        }
    }

    #[test]
    fn interval_omegas_match_big_omega() {
        let t = primes_up_to(4000).unwrap();
        for n in [16u128, 100, 10_000, 123_456] {
            let f = factor_interval(n, &t).unwrap();
            for (m, w) in f.iter() {
                assert_eq!(w, big_omega(m as u128).unwrap(), "member {m}");
            }
        }
    }

    #[test]
    fn interval_requires_adequate_table() {
        let t = primes_up_to(10).unwrap();
        assert!(matches!(
            factor_interval(1_000_000, &t),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn squarefree_small_set() {
        // Squarefree up to 10: {1, 2, 3, 5, 6, 7, 10}.
        assert_eq!(squarefree_count(10.0), 7);
        assert_eq!(squarefree_count(1.0), 1);
        assert_eq!(squarefree_count(0.5), 0);
        assert_eq!(squarefree_count(10.9), 7);
        assert_eq!(squarefree_count(11.0), 8);
    }

    #[test]
    fn squarefree_matches_enumeration_oracle() {
        // Oracle: mark multiples of p^2 directly.
        let cap = 20_000usize;
        let mut free = vec![true; cap + 1];
        let mut p = 2usize;
        while p * p <= cap {
            let mut m = p * p;
            while m <= cap {
                free[m] = false;
                m += p * p;
            }
            p += 1;
        }
        let mut running = 0u64;
        for x in 1..=cap {
            if free[x] {
                running += 1;
            }
            if x % 977 == 0 || x == cap {
                assert_eq!(squarefree_count(x as f64), running, "x = {x}");
            }
        }
    }

    #[test]
    fn squarefree_count_at_one_million() {
        assert_eq!(squarefree_count(1e6), 607_926);
    }

    #[test]
    fn squarefree_density_bound_on_grid() {
        // |count - 6x/pi^2| <= 0.5 sqrt x + 1 across decades.
        let mut x = 10.0f64;
        while x <= 1e7 {
            let count = squarefree_count(x) as f64;
            let main = 6.0 * x.floor() / (std::f64::consts::PI * std::f64::consts::PI);
            assert!(
                (count - main).abs() <= 0.5 * x.sqrt() + 1.0,
                "x = {x}: count {count}, main {main}"
            );
            x *= 10.0;
        }
    }

    #[test]
    fn mertens_product_exact_small_values() {
        let t = primes_up_to(100).unwrap();
        // I(2) = 2, I(10) = 2 * 3/2 * 5/4 * 7/6 = 4.375.
        assert!((mertens_product(2.0, &t).unwrap() - 2.0).abs() < 1e-14);
        assert!((mertens_product(10.0, &t).unwrap() - 4.375).abs() < 1e-13);
        // Flooring: any x in [7, 11) sees the same prime set as x = 7.
        assert_eq!(
            mertens_product(10.99, &t).unwrap(),
            mertens_product(7.0, &t).unwrap()
        );
    }

    #[test]
    fn mertens_product_in_classical_band() {
        let t = primes_up_to(10_000).unwrap();
        let x = 10_000.0;
        let i = mertens_product(x, &t).unwrap();
        let lo = EULER_GAMMA.exp() * x.ln();
        let hi = lo + 2.0 * EULER_GAMMA.exp() / x.sqrt();
        assert!(lo < i && i < hi, "I(1e4) = {i} outside ({lo}, {hi})");
    }

    #[test]
    fn mertens_product_domain_and_table_errors() {
        let t = primes_up_to(100).unwrap();
        assert!(matches!(
            mertens_product(1.9, &t),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            mertens_product(1000.0, &t),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn mertens_product_telescopes_prime_by_prime() {
        let t = primes_up_to(2000).unwrap();
        let primes = t.primes();
        for w in primes.windows(2).take(100) {
            let (p, q) = (w[0], w[1]);
            let a = mertens_product(p as f64, &t).unwrap();
            let b = mertens_product(q as f64, &t).unwrap();
            let expect = a / (1.0 - 1.0 / q as f64);
            assert!((b - expect).abs() <= 1e-14 * expect, "p = {p}, q = {q}");
        }
    }

    #[test]
    fn reciprocal_sum_spot_values() {
        let t = primes_up_to(100_000).unwrap();
        assert_eq!(prime_reciprocal_sum(2.0, 3.0, &t).unwrap(), 0.5);
        let s = prime_reciprocal_sum(2.0, 10.0, &t).unwrap();
        // 1/2 + 1/3 + 1/5 + 1/7
        assert!((s - 1.1761904761904762).abs() < 1e-15);
        // Frozen against an independent arbitrary-precision summation.
        let s = prime_reciprocal_sum(1009.0, 100_000.0, &t).unwrap();
        assert!((s - 0.50719205187217660645).abs() < 1e-13, "s = {s}");
    }

    #[test]
    fn reciprocal_sum_precondition_errors() {
        let t = primes_up_to(100).unwrap();
        assert!(prime_reciprocal_sum(10.0, 10.0, &t).is_err());
        assert!(prime_reciprocal_sum(1.0, 10.0, &t).is_err());
        assert!(matches!(
            prime_reciprocal_sum(2.0, 1000.0, &t),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn reciprocal_sum_merges_across_any_split() {
        let t = primes_up_to(1_000_000).unwrap();
        let whole = prime_reciprocal_sum(2.0, 1_000_000.0, &t).unwrap();
        for split in [3.0, 1000.0, 524_287.0, 999_983.0] {
            let left = prime_reciprocal_sum(2.0, split, &t).unwrap();
            let right = prime_reciprocal_sum(split, 1_000_000.0, &t).unwrap();
            assert!(
                ((left + right) - whole).abs() <= 1e-12 * whole,
                "split at {split}"
            );
        }
    }

    #[test]
    fn interval_omegas_match_sampled_big_omega_at_scale() {
        // 100 deterministic pseudo-random N <= 1e10; members sampled.
        let t = primes_up_to(200_000).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..100 {
            let n = 1 + next() % 10_000_000_000u64;
            let f = factor_interval(n as u128, &t).unwrap();
            for _ in 0..24 {
                let i = (next() % f.len() as u64) as usize;
                assert_eq!(
                    f.omega(i),
                    big_omega(f.member(i) as u128).unwrap(),
                    "N = {n}, member {}",
                    f.member(i)
                );
            }
        }
    }
}
