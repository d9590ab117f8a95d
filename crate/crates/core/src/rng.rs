//! Counter-based uniform field.
//!
//! Every uniform is a pure function of `(seed, id)`: a lattice site or tree
//! node hashes to a 64-bit id, and the id is mixed with the seed through the
//! SplitMix64 finaliser. Nothing is stored, so lazily explored lattices and
//! trees can be replayed exactly and evaluated from any number of threads.

use rand::RngCore;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SITE_TAG: u64 = 0x5349_5445_5f49_4421;
const REPLICA_TAG: u64 = 0x5245_504c_4943_4121;
const STREAM_TAG: u64 = 0x5354_5245_414d_5f21;

/// SplitMix64 output function (Steele, Lea and Flood). Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps 64 random bits to the open interval (0, 1).
///
/// The top 52 bits are used and shifted by half a step, so the result is
/// exactly representable and never 0 or 1.
#[inline]
pub fn to_open_unit(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Anything that can address a uniform in a [`LabelField`].
pub trait FieldKey {
    fn field_id(&self) -> u64;
}

impl FieldKey for u64 {
    #[inline]
    fn field_id(&self) -> u64 {
        *self
    }
}

impl FieldKey for [i64] {
    #[inline]
    fn field_id(&self) -> u64 {
        site_id(self)
    }
}

impl<const N: usize> FieldKey for [i64; N] {
    #[inline]
    fn field_id(&self) -> u64 {
        site_id(self)
    }
}

impl FieldKey for NodeId {
    #[inline]
    fn field_id(&self) -> u64 {
        self.0
    }
}

/// Hashes lattice coordinates to a field id. The dimension is part of the
/// hash so `(1, 2)` and `(1, 2, 0)` get unrelated uniforms.
#[inline]
pub fn site_id(coords: &[i64]) -> u64 {
    let mut h = SITE_TAG ^ coords.len() as u64;
    for &c in coords {
        h = mix64(h ^ c as u64).wrapping_add(GOLDEN);
    }
    h
}

/// Path-encoded tree node id: the root is fixed and `child(i)` hashes the
/// parent id with the child index, so a node's uniform depends only on its
/// position in the tree, never on exploration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0x524f_4f54_5f4e_4f44);

    #[inline]
    pub fn child(self, index: u32) -> NodeId {
        NodeId(mix64(self.0 ^ mix64(GOLDEN.wrapping_mul(index as u64 + 1))))
    }
}

/// Deterministic map `(seed, id) -> Uniform(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelField {
    seed: u64,
    key: u64,
}

impl LabelField {
    pub fn new(seed: u64) -> Self {
        LabelField {
            seed,
            key: mix64(seed ^ GOLDEN),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64 bits for `id`.
    #[inline]
    pub fn bits(&self, id: u64) -> u64 {
        mix64(mix64(self.key ^ id).wrapping_add(GOLDEN))
    }

    /// The uniform `U_id`, always strictly inside (0, 1).
    #[inline]
    pub fn uniform<K: FieldKey + ?Sized>(&self, key: &K) -> f64 {
        to_open_unit(self.bits(key.field_id()))
    }

    /// Independent field for replica `index`. Part of the replay contract:
    /// replica `i` of a run with master seed `s` always sees the same field.
    pub fn replica(&self, index: u64) -> LabelField {
        LabelField::new(mix64(self.seed ^ REPLICA_TAG) ^ mix64(index.wrapping_add(GOLDEN)))
    }

    /// A stream of extra randomness attached to `id` (offspring counts and
    /// the like), separated from the label uniforms by `tag`.
    pub fn stream(&self, id: u64, tag: u64) -> CounterRng {
        CounterRng {
            key: mix64(self.key ^ STREAM_TAG ^ mix64(id ^ mix64(tag))),
            counter: 0,
        }
    }
}

/// Counter-mode generator: output `i` is `mix64(key + i·γ)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        to_open_unit(self.next_u64())
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let b = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&b[..chunk.len()]);
        }
    }
}
