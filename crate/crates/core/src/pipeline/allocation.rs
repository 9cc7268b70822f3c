/// Split `l` result slots across clusters in proportion to their sizes.
///
/// Each cluster's ideal quota is `size * l / k` (with `k` the total size).
/// Floors are handed out first; the leftover slots go one at a time to the
/// largest fractional remainders, ties to the cluster whose best document
/// ranks higher (`priority`, lower is better). No cluster receives more
/// slots than it has members. When `l >= k` every member is taken.
///
/// Remainders are compared as exact integers (`size * l mod k`).
pub fn proportional_allocation(sizes: &[usize], l: usize, priority: &[usize]) -> Vec<usize> {
    let k: usize = sizes.iter().sum();
    if l >= k {
        return sizes.to_vec();
    }
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| s * l / k).collect();
    let remainder: Vec<usize> = sizes.iter().map(|&s| s * l % k).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| {
        (
            std::cmp::Reverse(remainder[i]),
            priority.get(i).copied().unwrap_or(usize::MAX),
            i,
        )
    });

    let mut left = l - alloc.iter().sum::<usize>();
    while left > 0 {
        let before = left;
        for &i in &order {
            if left == 0 {
                break;
            }
            if alloc[i] < sizes[i] {
                alloc[i] += 1;
                left -= 1;
            }
        }
        if left == before {
            break;
        }
    }
    alloc
}
