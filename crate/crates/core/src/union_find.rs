/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl DisjointSets {
    pub fn new(len: usize) -> Self {
        assert!(
            len <= u32::MAX as usize,
            "too many elements for u32 indices"
        );
        DisjointSets {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
            sets: len,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Number of disjoint sets currently in the forest.
    pub fn set_count(&self) -> usize {
        self.sets
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            let grand = self.parent[self.parent[i] as usize];
            self.parent[i] = grand;
            i = grand as usize;
        }
        i
    }

    /// Merges the sets of `i` and `j`; returns true if they were distinct.
    pub fn union(&mut self, i: usize, j: usize) -> bool {
        let (mut a, mut b) = (self.find(i), self.find(j));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            (a, b) = (b, a);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    /// Block label per element, numbered 0.. by first occurrence.
    pub fn labels(&mut self) -> Vec<u32> {
        let mut root_label = vec![u32::MAX; self.len()];
        let mut next = 0u32;
        (0..self.len())
            .map(|i| {
                let root = self.find(i);
                if root_label[root] == u32::MAX {
                    root_label[root] = next;
                    next += 1;
                }
                root_label[root]
            })
            .collect()
    }
}
