//! Counter-based uniform random numbers.
//!
//! Every value is a keyed permutation (Philox4x32-10) of its position, so a
//! stream can jump to any offset in O(1). Sample `k` of stream `s` under seed
//! `seed` is the same value no matter which worker asks for it.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// 2^-53
const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0;

#[inline(always)]
fn philox_round(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let p0 = u64::from(ctr[0]).wrapping_mul(u64::from(PHILOX_M0));
    let p1 = u64::from(ctr[2]).wrapping_mul(u64::from(PHILOX_M1));
    [
        ((p1 >> 32) as u32) ^ ctr[1] ^ key[0],
        p1 as u32,
        ((p0 >> 32) as u32) ^ ctr[3] ^ key[1],
        p0 as u32,
    ]
}

/// Philox4x32 with 10 rounds.
#[inline(always)]
pub fn philox4x32_10(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for _ in 0..10 {
        c = philox_round(c, k);
        k[0] = k[0].wrapping_add(PHILOX_W0);
        k[1] = k[1].wrapping_add(PHILOX_W1);
    }
    c
}

#[inline(always)]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * INV_2_53
}

/// A seeded, splittable stream of uniforms in `[0, 1)`.
///
/// `counter` counts uniforms, not Philox blocks: each block yields two
/// 53-bit uniforms, and the most recent block is cached.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    counter: u64,
    cached_block: u64,
    cache: [f64; 2],
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream {
            seed,
            stream_id,
            counter: 0,
            cached_block: u64::MAX,
            cache: [0.0; 2],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position of the next uniform.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Jumps to an absolute position.
    pub fn seek(&mut self, position: u64) {
        self.counter = position;
    }

    #[inline(always)]
    fn block(&self, block: u64) -> [f64; 2] {
        let key = [self.seed as u32, (self.seed >> 32) as u32];
        let ctr = [
            block as u32,
            (block >> 32) as u32,
            self.stream_id as u32,
            (self.stream_id >> 32) as u32,
        ];
        let out = philox4x32_10(ctr, key);
        [
            to_unit(u64::from(out[0]) | (u64::from(out[1]) << 32)),
            to_unit(u64::from(out[2]) | (u64::from(out[3]) << 32)),
        ]
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let block = self.counter >> 1;
        if block != self.cached_block {
            self.cache = self.block(block);
            self.cached_block = block;
        }
        let u = self.cache[(self.counter & 1) as usize];
        self.counter = self.counter.wrapping_add(1);
        u
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let mut i = 0;
        if self.counter & 1 == 1 && !out.is_empty() {
            out[0] = self.next_uniform();
            i = 1;
        }
        while i + 1 < out.len() {
            let b = self.block(self.counter >> 1);
            out[i] = b[0];
            out[i + 1] = b[1];
            self.counter = self.counter.wrapping_add(2);
            i += 2;
        }
        if i < out.len() {
            out[i] = self.next_uniform();
        }
    }
}

/// Stream assignment for one evaluation ("run").
///
/// In iteration `it`, run `r` draws its `dims` uniforms from stream
/// `it * 2^32 + r % batch_size`, starting at position
/// `(r / batch_size) * dims`. The draw depends only on
/// `(seed, batch_size, it, r)`, never on which worker executes it, and no two
/// runs share a position.
#[derive(Debug, Clone, Copy)]
pub struct RunStreams {
    pub seed: u64,
    pub batch_size: u64,
    pub dims: u64,
    pub iteration: u32,
}

/// Largest supported `batch_size`.
pub const MAX_BATCH_SIZE: u64 = 1 << 32;

impl RunStreams {
    pub fn new(seed: u64, batch_size: usize, dims: usize) -> Self {
        RunStreams {
            seed,
            batch_size: (batch_size as u64).clamp(1, MAX_BATCH_SIZE),
            dims: dims as u64,
            iteration: 0,
        }
    }

    pub fn for_iteration(self, iteration: u32) -> Self {
        RunStreams { iteration, ..self }
    }

    /// (stream id, starting position) of run `r`.
    #[inline]
    pub fn locate(&self, run: u64) -> (u64, u64) {
        (
            (u64::from(self.iteration) << 32) | (run % self.batch_size),
            (run / self.batch_size) * self.dims,
        )
    }

    pub fn stream_for(&self, run: u64) -> RngStream {
        let (id, pos) = self.locate(run);
        let mut s = RngStream::new(self.seed, id);
        s.seek(pos);
        s
    }
}

/// Run-to-stream mapping with a per-worker cache of the current stream.
pub(crate) struct RunSampler {
    streams: RunStreams,
    current: RngStream,
}

impl RunSampler {
    pub(crate) fn new(streams: RunStreams) -> Self {
        RunSampler {
            streams,
            current: RngStream::new(streams.seed, 0),
        }
    }

    /// Fills `out` with the uniforms of run `r`.
    #[inline]
    pub(crate) fn draw(&mut self, run: u64, out: &mut [f64]) {
        let (id, pos) = self.streams.locate(run);
        if self.current.stream_id != id {
            self.current = RngStream::new(self.streams.seed, id);
        }
        self.current.seek(pos);
        self.current.fill(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answer() {
        // Random123 known-answer vectors for philox4x32_10.
        assert_eq!(
            philox4x32_10([0, 0, 0, 0], [0, 0]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10(
                [0xffff_ffff, 0xffff_ffff, 0xffff_ffff, 0xffff_ffff],
                [0xffff_ffff, 0xffff_ffff]
            ),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x24126ea1]
        );
    }

    #[test]
    fn same_seed_and_id_reproduce() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_uniform().to_bits(), b.next_uniform().to_bits());
        }
    }

    #[test]
    fn neighbouring_ids_differ() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 8);
        let xs: Vec<f64> = (0..10).map(|_| a.next_uniform()).collect();
        let ys: Vec<f64> = (0..10).map(|_| b.next_uniform()).collect();
        assert!(xs.iter().zip(&ys).all(|(x, y)| x != y));
    }

    #[test]
    fn seek_matches_sequential() {
        let mut a = RngStream::new(3, 1);
        let seq: Vec<f64> = (0..20).map(|_| a.next_uniform()).collect();
        for start in [0u64, 1, 5, 13] {
            let mut b = RngStream::new(3, 1);
            b.seek(start);
            assert_eq!(b.next_uniform(), seq[start as usize]);
        }
    }

    #[test]
    fn fill_matches_sequential() {
        for start in 0..4u64 {
            for len in 0..7 {
                let mut a = RngStream::new(11, 5);
                a.seek(start);
                let want: Vec<f64> = (0..len).map(|_| a.next_uniform()).collect();
                let mut b = RngStream::new(11, 5);
                b.seek(start);
                let mut got = vec![0.0; len];
                b.fill(&mut got);
                assert_eq!(got, want);
                assert_eq!(b.next_uniform(), a.next_uniform());
            }
        }
    }

    #[test]
    fn moments_of_a_million_draws() {
        let mut s = RngStream::new(2024, 0);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let u = s.next_uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            sum2 += u * u;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((0.499..=0.501).contains(&mean), "mean {mean}");
        assert!((0.0829..=0.0837).contains(&var), "var {var}");
    }

    #[test]
    fn kolmogorov_smirnov_passes() {
        let mut s = RngStream::new(99, 5);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| s.next_uniform()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = x - i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64 - x;
                lo.max(hi)
            })
            .fold(0.0, f64::max);
        // 1% critical value: 1.628 / sqrt(n)
        assert!(d < 1.628 / (n as f64).sqrt(), "KS D = {d}");
    }

    #[test]
    fn streams_are_uncorrelated() {
        let mut a = RngStream::new(11, 0);
        let mut b = RngStream::new(11, 1);
        let n = 100_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = a.next_uniform();
            let y = b.next_uniform();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let n = n as f64;
        let cov = sab / n - sa / n * sb / n;
        let r = cov / ((saa / n - (sa / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
        assert!(r.abs() < 0.01, "r = {r}");
    }

    #[test]
    fn runs_never_share_a_position() {
        let base = RunStreams::new(1, 4, 3);
        let mut seen = std::collections::HashSet::new();
        for it in 1..4 {
            let streams = base.for_iteration(it);
            for r in 0..64 {
                let (id, pos) = streams.locate(r);
                for k in 0..3 {
                    assert!(seen.insert((id, pos + k)));
                }
            }
        }
    }
}
