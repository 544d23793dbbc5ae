use rand::RngCore;

/// Uniform integer in `0..n` by rejection sampling; no modulo bias.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, n: u32) -> u32 {
    assert!(n > 0, "empty range");
    // Largest multiple of n that fits in u32 arithmetic; draws above it are discarded.
    let zone = u32::MAX - (u32::MAX - n + 1) % n;
    loop {
        let v = rng.next_u32();
        if v <= zone {
            return v % n;
        }
    }
}

/// In-place Fisher-Yates (Durstenfeld) shuffle.
pub fn fisher_yates<T, R: RngCore + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = uniform_below(rng, (i + 1) as u32) as usize;
        items.swap(i, j);
    }
}
