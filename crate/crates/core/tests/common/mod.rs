//! Independent recomputations shared by the integration tests. They use the
//! machine interpreter and nothing else from the library.
#![allow(dead_code)]

use paramlat::machines::{run, Program};
use paramlat::slices::DecidedSet;
use paramlat::universe::BitString;

pub fn unpair(z: u64) -> (u64, u64) {
    let mut w = 0;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

pub fn pair(x: u64, y: u64) -> u64 {
    (x + y) * (x + y + 1) / 2 + y
}

// The string with 1-based length-lex index z + 1.
pub fn string_of(z: u64) -> BitString {
    let m = z + 2;
    let len = 63 - m.leading_zeros() as usize;
    BitString::from_bits(len, m - (1u64 << len)).unwrap()
}

pub fn budget(n: usize, exp: u64) -> u64 {
    let mut b: u64 = 1;
    for _ in 0..exp {
        b = b.saturating_mul(n as u64);
    }
    b
}

pub fn diag_table(max_code: u64) -> Vec<bool> {
    let mut a = vec![false; max_code as usize + 1];
    for z in 0..=max_code {
        let (c, _) = unpair(z);
        if c == 0 {
            continue;
        }
        let s = string_of(z);
        let n = s.len() as u64;
        let answer = |i: u64, w: u64| {
            let t = string_of(w);
            run(&Program::from_index(i), &t, budget(t.len(), 2 * c)).decision()
        };
        let mut alive: Vec<u64> = (1..=n).collect();
        for d in 1..=c {
            for y in 1..=n {
                let w = pair(d, y);
                if w >= z {
                    continue;
                }
                alive.retain(|&i| answer(i, w).is_none_or(|b| b == a[w as usize]));
            }
        }
        a[z as usize] = alive.iter().find_map(|&i| answer(i, z)).is_some_and(|b| !b);
    }
    a
}

pub fn strings(max_len: usize) -> Vec<BitString> {
    (1..=max_len)
        .flat_map(|l| (0..1u64 << l).map(move |v| BitString::from_bits(l, v).unwrap()))
        .collect()
}

pub fn ic_oracle(set: &DecidedSet, c: u32, m: usize, l: usize) -> Vec<(BitString, Option<usize>)> {
    let xs = strings(l);
    let mut best: Vec<Option<usize>> = vec![None; xs.len()];
    for p in strings(m) {
        let prog = Program::decode((0..p.len()).map(|i| p.bit(i)).collect());
        let answers: Vec<Option<bool>> = xs
            .iter()
            .map(|x| run(&prog, x, 16 * (x.len() as u64).pow(c)).decision())
            .collect();
        let sound = xs
            .iter()
            .zip(&answers)
            .all(|(x, a)| a.is_none_or(|b| b == set.decide(x)));
        if !sound {
            continue;
        }
        for (slot, a) in best.iter_mut().zip(&answers) {
            if a.is_some() && slot.is_none_or(|v| p.len() < v) {
                *slot = Some(p.len());
            }
        }
    }
    xs.into_iter().zip(best).collect()
}
