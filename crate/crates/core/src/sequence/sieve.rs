//! Odd-only bit-packed sieve of Eratosthenes.

/// All primes `≤ limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<i64> {
    if limit < 2 {
        return Vec::new();
    }
    // bit i stands for the odd number 2i + 1
    let odd_count = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![0u64; odd_count.div_ceil(64)];
    let is_set = |bits: &[u64], i: usize| bits[i / 64] >> (i % 64) & 1 == 1;
    let mut i = 1usize;
    loop {
        let p = 2 * i + 1;
        if p * p > limit as usize {
            break;
        }
        if !is_set(&composite, i) {
            let mut j = p * p / 2;
            while j < odd_count {
                composite[j / 64] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_pi(limit));
    out.push(2);
    out.extend(
        (1..odd_count)
            .filter(|&i| !is_set(&composite, i))
            .map(|i| (2 * i + 1) as i64),
    );
    out
}

fn estimate_pi(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// An upper bound for the `n`-th prime (Rosser's bound for `n ≥ 6`).
pub fn nth_prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 1
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<i64> {
    let mut p = primes_up_to(nth_prime_upper_bound(count as u64));
    p.truncate(count);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: i64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_limits() {
        assert!(primes_up_to(0).is_empty());
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn matches_trial_division() {
        let sieved = primes_up_to(20_000);
        let oracle: Vec<i64> = (1..=20_000).filter(|&n| trial_division(n)).collect();
        assert_eq!(sieved, oracle);
    }

    #[test]
    fn known_counts() {
        assert_eq!(primes_up_to(100_000).len(), 9_592);
        assert_eq!(first_primes(10_000).last(), Some(&104_729));
    }
}
