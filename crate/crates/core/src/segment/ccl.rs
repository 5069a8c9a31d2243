use super::{Adjacency, DisjointSet, SegmentationMap};
use crate::naming::{CategoricalMap, NODATA};

/// Work counters for the linear-time contract.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CclStats {
    pub pixel_visits: usize,
    pub union_find_ops: usize,
}

/// First pass over a block of rows: provisional ids from already-scanned
/// same-label neighbors inside the block, equivalences recorded in `uf`.
pub(crate) fn label_rows(
    labels: &[u16],
    width: usize,
    adjacency: Adjacency,
    uf: &mut DisjointSet,
    ids: &mut [u32],
) -> usize {
    let rows = labels.len() / width;
    for r in 0..rows {
        for c in 0..width {
            let i = r * width + c;
            let l = labels[i];
            if l == NODATA {
                ids[i] = 0;
                continue;
            }
            let mut assigned = 0;
            for &(dr, dc) in adjacency.backward() {
                if (dr < 0 && r == 0) || (dc < 0 && c == 0) || (dc > 0 && c + 1 == width) {
                    continue;
                }
                let n = ((r as isize + dr) as usize) * width + (c as isize + dc) as usize;
                if labels[n] == l {
                    let nid = ids[n];
                    if assigned == 0 {
                        assigned = nid;
                    } else if nid != assigned {
                        uf.union(assigned, nid);
                    }
                }
            }
            ids[i] = if assigned == 0 {
                uf.make_set()
            } else {
                assigned
            };
        }
    }
    rows * width
}

/// Unions the first row of a block with the last row of the block above.
pub(crate) fn union_seam(
    above_labels: &[u16],
    above_ids: &[u32],
    labels: &[u16],
    ids: &[u32],
    adjacency: Adjacency,
    uf: &mut DisjointSet,
) {
    let width = above_labels.len();
    for c in 0..width {
        let l = labels[c];
        if l == NODATA {
            continue;
        }
        for &(dr, dc) in adjacency.backward() {
            if dr == 0 || (dc < 0 && c == 0) || (dc > 0 && c + 1 == width) {
                continue;
            }
            let n = (c as isize + dc) as usize;
            if above_labels[n] == l {
                uf.union(ids[c], above_ids[n]);
            }
        }
    }
}

/// Second pass: maps provisional ids to dense final ids in order of first
/// appearance. `root_final` and `next` carry state across blocks.
pub(crate) fn resolve(
    ids: &mut [u32],
    uf: &mut DisjointSet,
    root_final: &mut Vec<u32>,
    next: &mut u32,
) {
    if root_final.len() <= uf.len() {
        root_final.resize(uf.len() + 1, 0);
    }
    for id in ids.iter_mut().filter(|id| **id != 0) {
        let root = uf.find(*id) as usize;
        if root_final[root] == 0 {
            *next += 1;
            root_final[root] = *next;
        }
        *id = root_final[root];
    }
}

/// Two-pass connected-component labeling of a categorical map.
pub fn connected_components(map: &CategoricalMap, adjacency: Adjacency) -> SegmentationMap {
    connected_components_with_stats(map, adjacency).0
}

pub fn connected_components_with_stats(
    map: &CategoricalMap,
    adjacency: Adjacency,
) -> (SegmentationMap, CclStats) {
    let (w, h) = (map.width(), map.height());
    let mut ids = vec![0; w * h];
    let mut uf = DisjointSet::new();
    let mut visits = label_rows(map.labels(), w, adjacency, &mut uf, &mut ids);
    let mut next = 0;
    resolve(&mut ids, &mut uf, &mut Vec::new(), &mut next);
    visits += ids.len();
    let stats = CclStats {
        pixel_visits: visits,
        union_find_ops: uf.operations(),
    };
    (SegmentationMap::from_parts(w, h, ids, next), stats)
}

/// Strip-wise labeling: each block of `strip_height` rows is labeled on its
/// own, then joined to the block above through its seam row.
pub fn connected_components_strips(
    map: &CategoricalMap,
    adjacency: Adjacency,
    strip_height: usize,
) -> SegmentationMap {
    let (w, h) = (map.width(), map.height());
    let strip_height = strip_height.max(1);
    let mut ids = vec![0; w * h];
    let mut uf = DisjointSet::new();
    let labels = map.labels();
    let mut start = 0;
    while start < h {
        let end = (start + strip_height).min(h);
        let (done, rest) = ids.split_at_mut(start * w);
        let block = &mut rest[..(end - start) * w];
        label_rows(&labels[start * w..end * w], w, adjacency, &mut uf, block);
        if start > 0 {
            union_seam(
                &labels[(start - 1) * w..start * w],
                &done[(start - 1) * w..],
                &labels[start * w..(start + 1) * w],
                &block[..w],
                adjacency,
                &mut uf,
            );
        }
        start = end;
    }
    let mut next = 0;
    resolve(&mut ids, &mut uf, &mut Vec::new(), &mut next);
    SegmentationMap::from_parts(w, h, ids, next)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::naming::LegendEntry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn map_from(width: usize, labels: Vec<u16>) -> CategoricalMap {
        let k = labels.iter().copied().max().unwrap_or(1).max(1);
        let legend = (1..=k)
            .map(|l| LegendEntry::new(l, &format!("c{l}"), [0, 0, 0]))
            .collect();
        CategoricalMap::new(width, labels.len() / width, labels, legend).unwrap()
    }

    /// Independent reference: breadth-first flood fill.
    pub(crate) fn flood_fill(map: &CategoricalMap, adjacency: Adjacency) -> (Vec<u32>, u32) {
        let (w, h) = (map.width(), map.height());
        let mut out = vec![0u32; w * h];
        let mut next = 0;
        for start in 0..w * h {
            if out[start] != 0 || map.labels()[start] == NODATA {
                continue;
            }
            next += 1;
            out[start] = next;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(p) = queue.pop_front() {
                let (r, c) = ((p / w) as isize, (p % w) as isize);
                for &(dr, dc) in adjacency.all() {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                        continue;
                    }
                    let q = nr as usize * w + nc as usize;
                    if out[q] == 0 && map.labels()[q] == map.labels()[p] {
                        out[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
        (out, next)
    }

    pub(crate) fn random_map(
        rng: &mut ChaCha8Rng,
        w: usize,
        h: usize,
        k: u16,
        nodata: bool,
    ) -> CategoricalMap {
        let lo = if nodata { 0 } else { 1 };
        map_from(w, (0..w * h).map(|_| rng.gen_range(lo..=k)).collect())
    }

    #[test]
    fn constant_map_is_one_segment() {
        let m = map_from(8, vec![3; 64]);
        for adj in [Adjacency::Four, Adjacency::Eight] {
            let s = connected_components(&m, adj);
            assert_eq!(s.segment_count(), 1);
            assert!(s.ids().iter().all(|&i| i == 1));
        }
    }

    #[test]
    fn checkerboard_depends_on_adjacency() {
        let m = map_from(2, vec![1, 2, 2, 1]);
        assert_eq!(connected_components(&m, Adjacency::Four).segment_count(), 4);
        let s8 = connected_components(&m, Adjacency::Eight);
        assert_eq!(s8.segment_count(), 2);
        assert_eq!(s8.ids(), &[1, 2, 2, 1]);
    }

    #[test]
    fn ids_follow_first_pixel_order() {
        // U shape: the right arm joins the left one only on the last row
        let m = map_from(3, vec![1, 2, 1, 1, 2, 1, 1, 1, 1]);
        let s = connected_components(&m, Adjacency::Four);
        assert_eq!(s.ids(), &[1, 2, 1, 1, 2, 1, 1, 1, 1]);
    }

    #[test]
    fn nodata_forms_no_segment() {
        let m = map_from(3, vec![1, 0, 1, 0, 0, 0]);
        let s = connected_components(&m, Adjacency::Eight);
        assert_eq!(s.ids(), &[1, 0, 2, 0, 0, 0]);
    }

    #[test]
    fn matches_flood_fill_on_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_map(&mut rng, 17, 13, 4, true);
            for adj in [Adjacency::Four, Adjacency::Eight] {
                let s = connected_components(&m, adj);
                let (oracle, n) = flood_fill(&m, adj);
                assert_eq!(s.segment_count(), n);
                // both number segments by first pixel, so they agree exactly
                assert_eq!(s.ids(), &oracle[..]);
            }
        }
    }

    #[test]
    fn strip_route_equals_whole_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let m = random_map(&mut rng, 11, 23, 3, true);
            let sh = rng.gen_range(1..30);
            for adj in [Adjacency::Four, Adjacency::Eight] {
                assert_eq!(
                    connected_components_strips(&m, adj, sh),
                    connected_components(&m, adj)
                );
            }
        }
    }

    #[test]
    fn work_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_map(&mut rng, 64, 64, 5, false);
        let (_, stats) = connected_components_with_stats(&m, Adjacency::Eight);
        assert_eq!(stats.pixel_visits, 2 * 64 * 64);
        // at most 3 unions (6 finds) per pixel in pass 1 plus one find per pixel in pass 2
        assert!(stats.union_find_ops <= 7 * 64 * 64);
    }

    #[test]
    fn relabeling_the_legend_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let m = random_map(&mut rng, 12, 9, 5, true);
            let perm = [0u16, 4, 1, 5, 3, 2];
            let relabeled = map_from(12, m.labels().iter().map(|&l| perm[l as usize]).collect());
            for adj in [Adjacency::Four, Adjacency::Eight] {
                assert_eq!(
                    connected_components(&m, adj),
                    connected_components(&relabeled, adj)
                );
                assert_eq!(
                    crate::segment::cross_aura(&m, adj),
                    crate::segment::cross_aura(&relabeled, adj)
                );
            }
        }
    }

    #[test]
    fn eight_adjacency_never_has_more_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..200 {
            let m = random_map(&mut rng, 10, 10, 5, false);
            let four = connected_components(&m, Adjacency::Four).segment_count();
            let eight = connected_components(&m, Adjacency::Eight).segment_count();
            assert!(eight <= four);
        }
    }

    #[test]
    fn three_strata_nine_segments() {
        // V = 1, B = 2, W = 3; vegetation occurs in two separate patches
        #[rustfmt::skip]
        let labels = vec![
            1, 1, 2, 2, 3, 3, 2, 3,
            1, 1, 2, 2, 3, 3, 3, 3,
            2, 2, 2, 2, 2, 2, 2, 2,
            3, 3, 2, 3, 3, 2, 1, 1,
            3, 3, 2, 3, 3, 2, 1, 1,
            2, 2, 2, 2, 2, 2, 2, 2,
            2, 3, 3, 2, 2, 3, 3, 2,
        ];
        let m = map_from(8, labels);
        let s = connected_components(&m, Adjacency::Eight);
        assert_eq!(s.segment_count(), 9);
        let v: std::collections::BTreeSet<u32> = (0..m.labels().len())
            .filter(|&p| m.labels()[p] == 1)
            .map(|p| s.ids()[p])
            .collect();
        assert_eq!(v.len(), 2);
    }
}
