//! Enumeration of semi-k-ary shapes, used to account for the limit mass of
//! ball shapes that a Monte-Carlo run may never observe.

use super::{CanonicalCode, SemiKaryTree};
use crate::error::{Error, Result};

#[derive(Clone)]
struct Shape {
    code: String,
    size: usize,
    height: usize,
}

/// All semi-k-ary trees of depth exactly `r` in which every even-level vertex
/// has at most `max_children` children and the total vertex count is at most
/// `max_vertices`, sorted by code.
pub fn enumerate_shapes(
    k: usize,
    r: usize,
    max_children: usize,
    max_vertices: usize,
) -> Result<Vec<SemiKaryTree>> {
    if r % 2 == 1 {
        return Err(Error::InvalidParameter(format!("depth must be even, got {r}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".to_string()));
    }
    // even[h]: even-rooted shapes of height at most 2h
    let mut even = vec![Shape {
        code: "()".to_string(),
        size: 1,
        height: 0,
    }];
    for _ in 0..r / 2 {
        let mut odd: Vec<Shape> = Vec::new();
        multisets(&even, k, k, max_vertices.saturating_sub(2), &mut |parts| {
            odd.push(join(parts));
        });
        odd.sort_by(|a, b| a.code.cmp(&b.code));
        let mut next: Vec<Shape> = Vec::new();
        multisets(&odd, 0, max_children, max_vertices.saturating_sub(1), &mut |parts| {
            next.push(join(parts));
        });
        next.sort_by(|a, b| a.code.cmp(&b.code));
        even = next;
    }
    even.into_iter()
        .filter(|s| s.height == r && s.size <= max_vertices)
        .map(|s| SemiKaryTree::from_code(k, &CanonicalCode::tree(s.code)))
        .collect()
}

fn join(parts: &[&Shape]) -> Shape {
    let mut code = String::from("(");
    let mut size = 1;
    let mut height = 0;
    for p in parts {
        code.push_str(&p.code);
        size += p.size;
        height = height.max(p.height + 1);
    }
    code.push(')');
    Shape { code, size, height }
}

/// Calls `f` on every nondecreasing selection of `min..=max` items from
/// `items` (sorted by code) whose sizes sum to at most `budget`.
fn multisets(items: &[Shape], min: usize, max: usize, budget: usize, f: &mut impl FnMut(&[&Shape])) {
    fn go<'a>(
        items: &'a [Shape],
        start: usize,
        min: usize,
        max: usize,
        budget: usize,
        chosen: &mut Vec<&'a Shape>,
        f: &mut impl FnMut(&[&Shape]),
    ) {
        if chosen.len() >= min {
            f(chosen);
        }
        if chosen.len() == max {
            return;
        }
        for i in start..items.len() {
            if items[i].size <= budget {
                chosen.push(&items[i]);
                go(items, i, min, max, budget - items[i].size, chosen, f);
                chosen.pop();
            }
        }
    }
    go(items, 0, min, max, budget, &mut Vec::new(), f);
}
