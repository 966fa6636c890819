use std::collections::{BTreeSet, HashMap};

use crate::algebra::{check_size, DEFAULT_SIZE_BOUND};
use crate::error::{Error, Result};

/// Point sets are bitmasks, so spaces have at most this many points.
pub const MAX_POINTS: usize = 63;

/// A topology on `{0, …, n-1}` given by its full list of opens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    points: usize,
    opens: Vec<u64>,
    index: HashMap<u64, usize>,
    minimal: Vec<u64>,
}

pub fn full_mask(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        u64::MAX >> (64 - n)
    }
}

pub fn members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

impl Topology {
    /// Closes `generators` under finite unions and intersections.
    pub fn generated(points: usize, generators: &[u64]) -> Result<Self> {
        if points > MAX_POINTS {
            return Err(Error::SizeBound { limit: MAX_POINTS, attempted: points });
        }
        let full = full_mask(points);
        let mut set: BTreeSet<u64> = [0, full].into_iter().collect();
        let mut queue: Vec<u64> = Vec::new();
        for &g in generators {
            if g & !full != 0 {
                return Err(Error::Input(format!("open {g:#b} mentions a point outside the space")));
            }
            if set.insert(g) {
                queue.push(g);
            }
        }
        while let Some(a) = queue.pop() {
            let current: Vec<u64> = set.iter().copied().collect();
            for b in current {
                for c in [a | b, a & b] {
                    if set.insert(c) {
                        check_size(set.len(), DEFAULT_SIZE_BOUND)?;
                        queue.push(c);
                    }
                }
            }
        }
        Ok(Self::build(points, set))
    }

    /// Checks that `opens` is already a topology.
    pub fn from_opens(points: usize, opens: &[u64]) -> Result<Self> {
        let t = Self::generated(points, opens)?;
        let given: BTreeSet<u64> = opens.iter().copied().chain([0, full_mask(points)]).collect();
        if given.len() != t.opens.len() {
            return Err(Error::Input("opens are not closed under unions and intersections".into()));
        }
        Ok(t)
    }

    pub fn discrete(points: usize) -> Result<Self> {
        let singletons: Vec<u64> = (0..points).map(|i| 1 << i).collect();
        Self::generated(points, &singletons)
    }

    fn build(points: usize, set: BTreeSet<u64>) -> Self {
        let mut opens: Vec<u64> = set.into_iter().collect();
        opens.sort_by_key(|&m| (m.count_ones(), m));
        let index = opens.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let minimal = (0..points)
            .map(|x| opens.iter().filter(|&&m| m >> x & 1 == 1).fold(full_mask(points), |acc, &m| acc & m))
            .collect();
        Topology { points, opens, index, minimal }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn full(&self) -> u64 {
        full_mask(self.points)
    }

    /// Opens sorted by size, then by mask.
    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn is_open(&self, mask: u64) -> bool {
        self.index.contains_key(&mask)
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    /// The smallest open containing `x`.
    pub fn minimal_open(&self, x: usize) -> u64 {
        self.minimal[x]
    }

    /// `y ∈ U_x`: `y` is a generization of `x`.
    pub fn generizes(&self, y: usize, x: usize) -> bool {
        self.minimal[x] >> y & 1 == 1
    }

    pub fn is_t0(&self) -> bool {
        let distinct: BTreeSet<u64> = self.minimal.iter().copied().collect();
        distinct.len() == self.points
    }

    /// Smallest open containing `mask`.
    pub fn interior_hull(&self, mask: u64) -> u64 {
        members(mask).fold(0, |acc, x| acc | self.minimal[x])
    }

    /// Open covers of `w` by the opens in `family` with no redundant member.
    pub fn irredundant_covers(&self, w: u64, family: &[u64]) -> Vec<Vec<u64>> {
        let inside: Vec<u64> = family.iter().copied().filter(|&u| u & !w == 0 && u != 0).collect();
        let mut out = Vec::new();
        let k = inside.len();
        if k > 20 {
            return out;
        }
        for pick in 0u32..(1 << k) {
            let chosen: Vec<u64> = (0..k).filter(|i| pick >> i & 1 == 1).map(|i| inside[i]).collect();
            let union = chosen.iter().fold(0, |a, &b| a | b);
            if union != w {
                continue;
            }
            let redundant = (0..chosen.len())
                .any(|i| chosen.iter().enumerate().filter(|&(j, _)| j != i).fold(0, |a, (_, &b)| a | b) == w);
            if !redundant {
                out.push(chosen);
            }
        }
        out
    }

    /// Preimage of a target-space subset under a point map.
    pub fn preimage(map: &[usize], mask: u64) -> u64 {
        map.iter().enumerate().filter(|&(_, &y)| mask >> y & 1 == 1).fold(0, |acc, (x, _)| acc | 1 << x)
    }

    /// Continuity of `map: self → other`.
    pub fn is_continuous(&self, other: &Topology, map: &[usize]) -> bool {
        other.opens.iter().all(|&v| self.is_open(Self::preimage(map, v)))
    }
}
