//! Deterministic random numbers for the simulator.
//!
//! The generator is xoshiro256** with its state seeded by four successive
//! splitmix64 outputs of the 64-bit seed — both algorithms exactly as in
//! Blackman & Vigna's reference C code, so any implementation seeded the
//! same way reproduces the same corpus. Floating-point helpers only divide
//! 53-bit integers by 2^53, which is exact on any IEEE-754 platform.

pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Xoshiro256StarStar {
        let mut mix = SplitMix64::new(seed);
        Xoshiro256StarStar {
            s: [
                mix.next_u64(),
                mix.next_u64(),
                mix.next_u64(),
                mix.next_u64(),
            ],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, bound)`, unbiased via rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// Uniform in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        if lo == hi {
            return lo;
        }
        lo + self.below(hi - lo + 1)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn f64_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.f64_unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_equal_seeds() {
        let mut a = Xoshiro256StarStar::seed_from_u64(42);
        let mut b = Xoshiro256StarStar::seed_from_u64(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    // Anchors produced by running the published implementation in the
    // rand_xoshiro crate (seed_from_u64 there is the same splitmix64
    // expansion); the full equivalence sweep lives below.
    #[test]
    fn reference_anchor_seed_one() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(1);
        assert_eq!(rng.next_u64(), 0xb3f2_af6d_0fc7_10c5);
        assert_eq!(rng.next_u64(), 0x853b_5596_4736_4cea);
    }

    #[test]
    fn matches_published_implementation() {
        use rand_xoshiro::rand_core::{Rng, SeedableRng};

        for seed in [0u64, 1, 2, 42, 0xdead_beef, u64::MAX] {
            let mut ours = Xoshiro256StarStar::seed_from_u64(seed);
            let mut theirs = rand_xoshiro::Xoshiro256StarStar::seed_from_u64(seed);
            for i in 0..256 {
                assert_eq!(ours.next_u64(), theirs.next_u64(), "seed {seed}, step {i}");
            }
        }
    }

    #[test]
    fn below_is_in_range_and_reaches_bounds() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(7);
        let mut seen = [false; 5];
        for _ in 0..200 {
            let x = rng.below(5);
            assert!(x < 5);
            seen[x as usize] = true;
        }
        assert!(seen.iter().all(|&b| b), "all residues occur");
    }

    #[test]
    fn unit_floats_are_in_range() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(9);
        for _ in 0..1000 {
            let x = rng.f64_unit();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
