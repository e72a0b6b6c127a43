//! Dependency trees and the window extractors feeding the convolution channels.
//!
//! `ancestor(t, i, k)` is the k-th ancestor of token `i` (k = 0 is the token
//! itself). Ancestors past the root saturate at the root, so every window has
//! exactly `k` entries without a second padding mechanism.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("heads contain a cycle through token {0}")]
    Cycle(usize),
    #[error("more than one root (tokens {0} and {1})")]
    MultipleRoots(usize, usize),
    #[error("sentence has no root")]
    NoRoot,
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("index {index} out of range for {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{heads} heads for {tokens} tokens")]
    LengthMismatch { heads: usize, tokens: usize },
}

/// One sentence's dependency tree. `heads[i]` is the parent of token `i`;
/// `None` marks the single root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyTree {
    forms: Vec<String>,
    heads: Vec<Option<usize>>,
    root: usize,
    children: Vec<Vec<usize>>,
}

impl DependencyTree {
    /// Validates a head array: equal length, one root, acyclic.
    pub fn new(forms: Vec<String>, heads: Vec<Option<usize>>) -> Result<Self, TreeError> {
        if forms.len() != heads.len() {
            return Err(TreeError::LengthMismatch {
                heads: heads.len(),
                tokens: forms.len(),
            });
        }
        if heads.is_empty() {
            return Err(TreeError::NoRoot);
        }
        let n = heads.len();
        let mut root = None;
        for (i, h) in heads.iter().enumerate() {
            match h {
                None => match root {
                    None => root = Some(i),
                    Some(r) => return Err(TreeError::MultipleRoots(r, i)),
                },
                Some(p) if *p >= n => return Err(TreeError::IndexOutOfRange { index: *p, len: n }),
                Some(_) => {}
            }
        }
        // Every node must reach the root within n steps.
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = heads[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(TreeError::Cycle(start));
                }
            }
        }
        let root = root.ok_or(TreeError::NoRoot)?;
        let mut children = vec![Vec::new(); n];
        for (i, h) in heads.iter().enumerate() {
            if let Some(p) = h {
                children[*p].push(i);
            }
        }
        Ok(DependencyTree {
            forms,
            heads,
            root,
            children,
        })
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn forms(&self) -> &[String] {
        &self.forms
    }

    pub fn heads(&self) -> &[Option<usize>] {
        &self.heads
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Children of `i` in increasing surface position.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    fn check(&self, i: usize) -> Result<(), TreeError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(TreeError::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Drops the tokens whose `keep` flag is false. Each kept token is
    /// re-attached to its nearest kept ancestor; if several kept tokens are
    /// left without one, the first becomes the root and the others attach
    /// to it. Returns `None` when nothing is kept.
    pub fn retain(&self, keep: &[bool]) -> Option<DependencyTree> {
        let new_index: Vec<Option<usize>> = {
            let mut next = 0;
            keep.iter()
                .map(|&k| {
                    k.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let mut forms = Vec::new();
        let mut heads = Vec::new();
        let mut first_root: Option<usize> = None;
        for i in 0..self.len() {
            let Some(ni) = new_index[i] else { continue };
            forms.push(self.forms[i].clone());
            let mut p = self.heads[i];
            while let Some(q) = p {
                if new_index[q].is_some() {
                    break;
                }
                p = self.heads[q];
            }
            let head = match p {
                Some(q) => new_index[q],
                None => match first_root {
                    None => {
                        first_root = Some(ni);
                        None
                    }
                    Some(r) => Some(r),
                },
            };
            heads.push(head);
        }
        if forms.is_empty() {
            return None;
        }
        Some(DependencyTree::new(forms, heads).expect("contraction of a tree is a tree"))
    }

    /// Moves token `i` to surface position `to[i]`, keeping every arc.
    /// `to` must be a permutation of `0..len`.
    pub fn renumber(&self, to: &[usize]) -> Result<DependencyTree, TreeError> {
        let n = self.len();
        if to.len() != n {
            return Err(TreeError::LengthMismatch {
                heads: to.len(),
                tokens: n,
            });
        }
        let mut forms = vec![String::new(); n];
        let mut heads = vec![None; n];
        let mut seen = vec![false; n];
        for (i, &t) in to.iter().enumerate() {
            if t >= n || seen[t] {
                return Err(TreeError::IndexOutOfRange { index: t, len: n });
            }
            seen[t] = true;
            forms[t] = self.forms[i].clone();
            heads[t] = self.heads[i].map(|h| to[h]);
        }
        DependencyTree::new(forms, heads)
    }

    /// CoNLL-U serialization (FORM and HEAD columns; others `_`).
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        for (i, form) in self.forms.iter().enumerate() {
            let head = self.heads[i].map_or(0, |h| h + 1);
            let _ = writeln!(out, "{}\t{}\t_\t_\t_\t_\t{}\t_\t_\t_", i + 1, form, head);
        }
        out
    }
}

/// Parses one CoNLL-U sentence block. Comment lines are ignored; multiword
/// ranges (`1-2`) and empty nodes (`1.1`) are skipped. Only HEAD is used.
pub fn parse_conllu(block: &str) -> Result<DependencyTree, TreeError> {
    parse_conllu_at(block, 1)
}

fn parse_conllu_at(block: &str, first_line: usize) -> Result<DependencyTree, TreeError> {
    let mut forms = Vec::new();
    let mut raw_heads: Vec<(usize, usize)> = Vec::new();
    for (offset, line) in block.lines().enumerate() {
        let line_no = first_line + offset;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(TreeError::MalformedLine {
                line: line_no,
                reason: alloc::format!("expected 10 columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let bad = |reason: String| TreeError::MalformedLine { line: line_no, reason };
        let id: usize = cols[0]
            .parse()
            .map_err(|_| bad(alloc::format!("bad ID {:?}", cols[0])))?;
        if id != forms.len() + 1 {
            return Err(bad(alloc::format!(
                "ID {id} out of sequence (expected {})",
                forms.len() + 1
            )));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| bad(alloc::format!("bad HEAD {:?}", cols[6])))?;
        forms.push(cols[1].to_string());
        raw_heads.push((line_no, head));
    }
    let n = forms.len();
    let mut heads = Vec::with_capacity(n);
    for &(line, h) in &raw_heads {
        if h > n {
            return Err(TreeError::MalformedLine {
                line,
                reason: alloc::format!("HEAD {h} beyond {n} tokens"),
            });
        }
        heads.push(h.checked_sub(1));
    }
    DependencyTree::new(forms, heads)
}

/// A parsed sentence with its `# review_id = <id> sent = <n>` key, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedSentence {
    pub review_id: Option<String>,
    pub sentence: Option<usize>,
    pub tree: DependencyTree,
}

fn parse_key(comment: &str) -> Option<(String, Option<usize>)> {
    let body = comment.trim_start_matches('#').trim();
    let rest = body.strip_prefix("review_id")?.trim_start();
    let rest = rest.strip_prefix('=')?.trim();
    match rest.find(" sent") {
        Some(pos) => {
            let id = rest[..pos].trim().to_string();
            let tail = rest[pos..].trim_start().strip_prefix("sent")?.trim_start();
            let n = tail.strip_prefix('=')?.trim().parse().ok();
            Some((id, n))
        }
        None => Some((rest.to_string(), None)),
    }
}

/// Parses a multi-sentence CoNLL-U document (blocks separated by blank lines).
pub fn parse_conllu_document(text: &str) -> Result<Vec<KeyedSentence>, TreeError> {
    let mut out = Vec::new();
    let mut block = String::new();
    let mut block_start = 1;
    let mut key: Option<(String, Option<usize>)> = None;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            if !block.trim().is_empty() {
                let tree = parse_conllu_at(&block, block_start)?;
                let (review_id, sentence) = key.take().map_or((None, None), |(a, b)| (Some(a), b));
                out.push(KeyedSentence {
                    review_id,
                    sentence,
                    tree,
                });
            }
            block.clear();
            key = None;
            block_start = line_no + 1;
            continue;
        }
        if block.is_empty() {
            block_start = line_no;
        }
        if line.starts_with('#') {
            if let Some(k) = parse_key(line) {
                key = Some(k);
            }
        }
        block.push_str(line);
        block.push('\n');
    }
    if !block.trim().is_empty() {
        let tree = parse_conllu_at(&block, block_start)?;
        let (review_id, sentence) = key.take().map_or((None, None), |(a, b)| (Some(a), b));
        out.push(KeyedSentence {
            review_id,
            sentence,
            tree,
        });
    }
    Ok(out)
}

/// Left-headed chain: token `i` hangs off `i − 1`, token 0 is the root.
pub fn fallback_chain(forms: Vec<String>) -> Result<DependencyTree, TreeError> {
    if forms.is_empty() {
        return Err(TreeError::EmptySentence);
    }
    let heads = (0..forms.len()).map(|i| i.checked_sub(1)).collect();
    DependencyTree::new(forms, heads)
}

/// k-th ancestor of `i`, saturating at the root.
pub fn ancestor(tree: &DependencyTree, i: usize, k: usize) -> Result<usize, TreeError> {
    tree.check(i)?;
    let mut cur = i;
    for _ in 0..k {
        match tree.heads[cur] {
            Some(p) => cur = p,
            None => break,
        }
    }
    Ok(cur)
}

/// `[i, p(i), p²(i), …, p^{k−1}(i)]` with root saturation.
pub fn ancestor_window(tree: &DependencyTree, i: usize, k: usize) -> Result<Vec<usize>, TreeError> {
    tree.check(i)?;
    let mut out = Vec::with_capacity(k);
    let mut cur = i;
    for step in 0..k {
        if step > 0 {
            if let Some(p) = tree.heads[cur] {
                cur = p;
            }
        }
        out.push(cur);
    }
    Ok(out)
}

/// `[i, s1, s2, …]`: the token followed by the other children of its head in
/// surface order, padded with `i` to length `k`. The root has no siblings.
pub fn sibling_window(tree: &DependencyTree, i: usize, k: usize) -> Result<Vec<usize>, TreeError> {
    tree.check(i)?;
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return Ok(out);
    }
    out.push(i);
    if let Some(p) = tree.heads[i] {
        out.extend(tree.children[p].iter().copied().filter(|&s| s != i).take(k - 1));
    }
    out.resize(k, i);
    Ok(out)
}

/// Window of `k` positions centred on `i` (offset `−(k−1)/2`); `None` marks
/// padding beyond the sentence boundaries.
pub fn sequential_window(len: usize, i: usize, k: usize) -> Vec<Option<usize>> {
    let start = i as isize - ((k as isize - 1) / 2);
    (0..k as isize)
        .map(|o| {
            let p = start + o;
            (p >= 0 && (p as usize) < len).then_some(p as usize)
        })
        .collect()
}

/// Left n-gram window `[i−k+1, …, i]`; `None` before the sentence start.
pub fn left_window(i: usize, k: usize) -> Vec<Option<usize>> {
    (0..k).map(|o| (i + o + 1).checked_sub(k)).collect()
}
