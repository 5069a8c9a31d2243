/// Disjoint-set forest over provisional ids `1..=len`. Id 0 is unused.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    ops: usize,
}

impl Default for DisjointSet {
    fn default() -> Self {
        DisjointSet {
            parent: vec![0],
            ops: 0,
        }
    }
}

impl DisjointSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a fresh singleton and returns its id.
    pub fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        self.ops += 1;
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Merges the sets of `a` and `b`; the smaller root id survives.
    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }

    /// Number of `find` calls so far (each union makes two).
    pub fn operations(&self) -> usize {
        self.ops
    }
}
