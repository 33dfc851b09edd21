use serde::Serialize;

use super::MergeTable;

/// A token and the merge that produced it. Leaves are single characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenTree {
    pub token: String,
    pub children: Vec<TokenTree>,
}

impl TokenTree {
    fn leaf(c: char) -> Self {
        TokenTree {
            token: c.to_string(),
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaf tokens in order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.token);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }

    /// Indented outline, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&self.token);
        out.push('\n');
        for child in &self.children {
            child.render_into(out, depth + 1);
        }
    }
}

/// Replays the merge list in order, applying each merge to every occurrence
/// left to right. Instead of scanning every merge, jumps straight to the next
/// merge index (after the last one applied) that matches an adjacent pair.
fn replay<T>(
    table: &MergeTable,
    mut items: Vec<(Option<u32>, T)>,
    mut combine: impl FnMut(T, T, u32) -> T,
) -> Vec<(Option<u32>, T)> {
    let mut cursor = 0u32;
    loop {
        let mut best: Option<(u32, u32, u32, u32)> = None;
        for w in items.windows(2) {
            if let (Some(l), Some(r)) = (w[0].0, w[1].0) {
                if let Some((rank, product)) = table.lookup_merge(l, r, cursor) {
                    if best.is_none_or(|b| rank < b.0) {
                        best = Some((rank, l, r, product));
                    }
                }
            }
        }
        let Some((rank, l, r, product)) = best else {
            return items;
        };
        cursor = rank + 1;
        let mut out = Vec::with_capacity(items.len());
        let mut iter = items.into_iter().peekable();
        while let Some(item) = iter.next() {
            if item.0 == Some(l) && iter.peek().is_some_and(|next| next.0 == Some(r)) {
                let right = iter.next().expect("peeked");
                out.push((Some(product), combine(item.1, right.1, product)));
            } else {
                out.push(item);
            }
        }
        items = out;
    }
}

fn char_id(table: &MergeTable, c: char) -> Option<u32> {
    let mut buf = [0u8; 4];
    table.token_id(c.encode_utf8(&mut buf))
}

pub(super) fn encode(table: &MergeTable, word: &str) -> Vec<String> {
    let items: Vec<(Option<u32>, Option<char>)> = word
        .chars()
        .map(|c| match char_id(table, c) {
            Some(id) => (Some(id), None),
            None => (None, Some(c)),
        })
        .collect();
    replay(table, items, |_, _, _| None)
        .into_iter()
        .map(|(id, unknown)| match (id, unknown) {
            (Some(id), _) => table.token(id).to_string(),
            (None, Some(c)) => c.to_string(),
            (None, None) => unreachable!("unknown symbols keep their character"),
        })
        .collect()
}

/// Merge history of `word` as a forest; the roots are the tokens that
/// [`MergeTable::encode_word`] returns.
pub fn tokenization_tree(table: &MergeTable, word: &str) -> Vec<TokenTree> {
    let items: Vec<(Option<u32>, TokenTree)> = word
        .chars()
        .map(|c| (char_id(table, c), TokenTree::leaf(c)))
        .collect();
    replay(table, items, |left, right, product| TokenTree {
        token: table.token(product).to_string(),
        children: vec![left, right],
    })
    .into_iter()
    .map(|(_, tree)| tree)
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::{Merge, Mode, Weighting};

    fn table(alphabet: &[&str], merges: &[(&str, &str)]) -> MergeTable {
        MergeTable::new(
            "xx",
            Mode::Ultimate,
            Weighting::Tf,
            alphabet.iter().map(|s| s.to_string()).collect(),
            merges.iter().map(|&(l, r)| Merge::new(l, r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn encode_examples() {
        let t = table(&["a", "b"], &[("a", "b"), ("ab", "ab")]);
        assert_eq!(t.encode_word("abab"), ["abab"]);
        assert_eq!(t.encode_word("ababa"), ["abab", "a"]);

        let plain = table(&["c", "a", "t"], &[]);
        assert_eq!(plain.encode_word("cat"), ["c", "a", "t"]);

        let latin = table(&["a", "b"], &[("a", "b")]);
        assert_eq!(latin.encode_word("aβb"), ["a", "β", "b"]);
    }

    #[test]
    fn merge_order_beats_length() {
        // "bc" is learned before "ab", so "abc" must become a|bc.
        let t = table(&["a", "b", "c"], &[("b", "c"), ("a", "b")]);
        assert_eq!(t.encode_word("abc"), ["a", "bc"]);
    }

    #[test]
    fn duplicate_product_replays_in_order() {
        // "abc" is built by ab+c (merge 1), then rebuilt by a+bc (merge 3).
        // The abc+d merge (merge 2) was already passed when a+bc fires.
        let t = table(
            &["a", "b", "c", "d"],
            &[
                ("a", "b"),
                ("ab", "c"),
                ("abc", "d"),
                ("b", "c"),
                ("a", "bc"),
            ],
        );
        assert_eq!(t.encode_word("abcd"), ["abcd"]);
        assert_eq!(t.encode_word("bcd"), ["bc", "d"]);
        let forest = tokenization_tree(&t, "abcd");
        assert_eq!(forest.len(), 1);
    }

    #[test]
    fn overlapping_pairs_merge_left_to_right() {
        let t = table(&["a"], &[("a", "a")]);
        assert_eq!(t.encode_word("aaa"), ["aa", "a"]);
        assert_eq!(t.encode_word("aaaa"), ["aa", "aa"]);
    }

    #[test]
    fn tree_examples() {
        let t = table(&["a", "b"], &[("a", "b"), ("ab", "ab")]);
        let forest = tokenization_tree(&t, "abab");
        assert_eq!(forest.len(), 1);
        let root = &forest[0];
        assert_eq!(root.token, "abab");
        assert_eq!(root.children.len(), 2);
        for child in &root.children {
            assert_eq!(child.token, "ab");
            let leaves: Vec<_> = child.children.iter().map(|c| c.token.as_str()).collect();
            assert_eq!(leaves, ["a", "b"]);
        }
        assert_eq!(
            root.render(),
            "abab\n  ab\n    a\n    b\n  ab\n    a\n    b\n"
        );

        let forest = tokenization_tree(&t, "bba");
        assert_eq!(forest.len(), 3);
        assert!(forest.iter().all(TokenTree::is_leaf));
    }

    #[test]
    fn tree_json_shape() {
        let t = table(&["a", "b"], &[("a", "b")]);
        let json = serde_json::to_string(&tokenization_tree(&t, "ab")).unwrap();
        assert_eq!(
            json,
            r#"[{"token":"ab","children":[{"token":"a","children":[]},{"token":"b","children":[]}]}]"#
        );
    }
}
