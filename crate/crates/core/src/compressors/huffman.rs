//! 256-ary Huffman codes: every tree edge is one byte, so code words are
//! whole bytes and prefix-free.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const ARITY: usize = 256;

#[derive(Debug, Clone)]
enum Node {
    Leaf(u32),
    Dummy,
    Internal(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct HuffmanCode {
    codes: Vec<Vec<u8>>,
    nodes: Vec<Node>,
    root: usize,
}

/// Builds a code over tokens `0..freqs.len()`. Zero-frequency tokens still
/// receive (long) code words.
pub fn huffman_build(freqs: &[u64]) -> Result<HuffmanCode> {
    if freqs.is_empty() {
        return Err(Error::EmptyInput("huffman frequency table"));
    }
    if freqs.iter().all(|&f| f == 0) {
        return Err(Error::invalid(
            "huffman needs at least one positive frequency",
        ));
    }
    let n = freqs.len();
    // a full D-ary tree has (leaves - 1) divisible by D - 1
    let pad = if n == 1 {
        ARITY - 1
    } else {
        (ARITY - 1 - (n - 1) % (ARITY - 1)) % (ARITY - 1)
    };
    let mut nodes: Vec<Node> = (0..n as u32).map(Node::Leaf).collect();
    nodes.extend(std::iter::repeat_n(Node::Dummy, pad));
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = freqs
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0, pad))
        .enumerate()
        .map(|(i, w)| Reverse((w, i)))
        .collect();
    while heap.len() > 1 {
        let mut children = Vec::with_capacity(ARITY);
        let mut weight = 0u64;
        for _ in 0..ARITY {
            let Reverse((w, i)) = heap.pop().expect("padding keeps groups full");
            weight = weight.saturating_add(w);
            children.push(i);
        }
        nodes.push(Node::Internal(children));
        heap.push(Reverse((weight, nodes.len() - 1)));
    }
    let root = heap.pop().unwrap().0 .1;

    let mut codes = vec![Vec::new(); n];
    let mut stack = vec![(root, Vec::new())];
    while let Some((idx, prefix)) = stack.pop() {
        match &nodes[idx] {
            Node::Leaf(tok) => codes[*tok as usize] = prefix,
            Node::Dummy => {}
            Node::Internal(children) => {
                for (byte, &child) in children.iter().enumerate() {
                    let mut p = prefix.clone();
                    p.push(byte as u8);
                    stack.push((child, p));
                }
            }
        }
    }
    Ok(HuffmanCode { codes, nodes, root })
}

impl HuffmanCode {
    pub fn code(&self, token: u32) -> Option<&[u8]> {
        self.codes.get(token as usize).map(Vec::as_slice)
    }

    pub fn code_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.codes.iter().map(Vec::len)
    }

    /// `sum 256^-len` over all tokens.
    pub fn kraft_sum(&self) -> f64 {
        self.code_lengths()
            .map(|l| (ARITY as f64).powi(-(l as i32)))
            .sum()
    }

    pub fn encode(&self, tokens: &[u32]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(tokens.len());
        for &t in tokens {
            let code = self
                .code(t)
                .ok_or_else(|| Error::invalid(format!("token {t} has no huffman code")))?;
            out.extend_from_slice(code);
        }
        Ok(out)
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        let mut node = self.root;
        for (offset, &b) in bytes.iter().enumerate() {
            let Node::Internal(children) = &self.nodes[node] else {
                unreachable!("walk always rests on an internal node")
            };
            node = children[b as usize];
            match &self.nodes[node] {
                Node::Leaf(tok) => {
                    out.push(*tok);
                    node = self.root;
                }
                Node::Dummy => {
                    return Err(Error::Decode(format!(
                        "unused huffman code word at byte {offset}"
                    )));
                }
                Node::Internal(_) => {}
            }
        }
        if node != self.root {
            return Err(Error::Decode(
                "input ends inside a huffman code word".into(),
            ));
        }
        Ok(out)
    }
}
