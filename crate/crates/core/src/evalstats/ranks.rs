/// Ascending ranks starting at 1; ties share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Ranks methods within one cell: the highest score gets rank 1, ties share
/// their average rank and missing scores share the last places.
pub fn rank_methods(scores: &[Option<f64>]) -> Vec<f64> {
    let present: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_some()).collect();
    let negated: Vec<f64> = present.iter().map(|&i| -scores[i].unwrap()).collect();
    let mut ranks = vec![0.0; scores.len()];
    for (&i, r) in present.iter().zip(average_ranks(&negated)) {
        ranks[i] = r;
    }
    let n_present = present.len();
    let n_missing = scores.len() - n_present;
    let missing_rank = n_present as f64 + (n_missing as f64 + 1.0) / 2.0;
    for (r, s) in ranks.iter_mut().zip(scores) {
        if s.is_none() {
            *r = missing_rank;
        }
    }
    ranks
}
