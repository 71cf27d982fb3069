use serde::ser::{Serialize, SerializeSeq, Serializer};

use super::PlayerId;

/// Set of living players over the fixed id range `[0, R0)`.
///
/// Backed by a Fenwick tree so that "the n-th living resident in increasing
/// id order" and removal are both logarithmic; day votes address players by
/// that rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliveSet {
    flags: Vec<bool>,
    tree: Vec<u32>,
    len: usize,
    top_bit: usize,
}

impl AliveSet {
    /// All of `0..n` alive.
    pub fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let top_bit = if n == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - n.leading_zeros())
        };
        Self {
            flags: vec![true; n],
            tree,
            len: n,
            top_bit,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Size of the id universe (`R0`).
    pub fn capacity(&self) -> usize {
        self.flags.len()
    }

    pub fn contains(&self, id: PlayerId) -> bool {
        self.flags.get(id.index()).copied().unwrap_or(false)
    }

    /// Removes `id`; returns whether it was alive.
    pub fn remove(&mut self, id: PlayerId) -> bool {
        if !self.contains(id) {
            return false;
        }
        self.flags[id.index()] = false;
        self.len -= 1;
        let n = self.flags.len();
        let mut i = id.index() + 1;
        while i <= n {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
        true
    }

    /// Living player with 0-based rank `rank` in increasing id order.
    pub fn nth(&self, rank: usize) -> Option<PlayerId> {
        if rank >= self.len {
            return None;
        }
        // binary lifting: find the largest prefix whose count is <= rank
        let mut pos = 0usize;
        let mut remaining = rank as u32;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        Some(PlayerId(pos))
    }

    /// Number of living players with id strictly below `id`.
    pub fn rank_of(&self, id: PlayerId) -> usize {
        let mut i = id.index().min(self.flags.len());
        let mut acc = 0usize;
        while i > 0 {
            acc += self.tree[i] as usize;
            i -= i & i.wrapping_neg();
        }
        acc
    }

    pub fn iter(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, alive)| **alive)
            .map(|(i, _)| PlayerId(i))
    }

    pub fn to_vec(&self) -> Vec<PlayerId> {
        self.iter().collect()
    }
}

impl Serialize for AliveSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len))?;
        for id in self.iter() {
            seq.serialize_element(&id)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nth_walks_in_id_order() {
        let mut set = AliveSet::full(7);
        set.remove(PlayerId(0));
        set.remove(PlayerId(4));
        let ids: Vec<_> = (0..set.len()).map(|r| set.nth(r).unwrap().index()).collect();
        assert_eq!(ids, vec![1, 2, 3, 5, 6]);
        assert_eq!(set.nth(5), None);
        assert_eq!(set.rank_of(PlayerId(5)), 3);
    }

    #[test]
    fn removing_twice_is_a_noop() {
        let mut set = AliveSet::full(3);
        assert!(set.remove(PlayerId(1)));
        assert!(!set.remove(PlayerId(1)));
        assert!(!set.remove(PlayerId(9)));
        assert_eq!(set.len(), 2);
    }

    proptest! {
        #[test]
        fn matches_a_sorted_vec(n in 1usize..200, removals in proptest::collection::vec(0usize..200, 0..150)) {
            let mut set = AliveSet::full(n);
            let mut model: Vec<usize> = (0..n).collect();
            for r in removals {
                let id = r % n;
                let was = model.contains(&id);
                prop_assert_eq!(set.remove(PlayerId(id)), was);
                model.retain(|&x| x != id);
            }
            prop_assert_eq!(set.len(), model.len());
            for (rank, &id) in model.iter().enumerate() {
                prop_assert_eq!(set.nth(rank), Some(PlayerId(id)));
                prop_assert_eq!(set.rank_of(PlayerId(id)), rank);
            }
            prop_assert_eq!(set.to_vec().into_iter().map(|p| p.index()).collect::<Vec<_>>(), model);
        }
    }
}
