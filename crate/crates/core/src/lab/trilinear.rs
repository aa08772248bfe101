//! Space-time trilinear operator `J` and its nonresonant sum.
//!
//! With the lattice measure `w = dtau / lambda` per summed variable,
//! `J~(k, tau) = (2 pi i k / 3) w^2 NR(k, tau) - 2 pi i k w^2 R(k, tau)`, where
//! `NR` sums `u(k1,t1) v(k2,t2) w(k3,t3)` over `k1+k2+k3 = k`, `t1+t2+t3 = tau`
//! and `(k1+k2)(k2+k3)(k3+k1) != 0`, and `R = u(k) v(k) w(-k)` convolved in `tau`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::spacetime::{SpaceTimeField, SpaceTimeLattice, TauRow};
use crate::error::Result;
use crate::torus::{fft_forward, fft_inverse};

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };

/// Linear convolution of two sequences.
pub fn convolve(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![ZERO; n];
        for (i, x) in a.iter().enumerate() {
            if *x == ZERO {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let m = n.next_power_of_two();
    let mut fa = a.to_vec();
    fa.resize(m, ZERO);
    let mut fb = b.to_vec();
    fb.resize(m, ZERO);
    let fwd = fft_forward(m);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_inverse(m).process(&mut fa);
    let inv = 1.0 / m as f64;
    fa.truncate(n);
    for x in fa.iter_mut() {
        *x *= inv;
    }
    fa
}

/// Evaluation strategy for the trilinear sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrilinearPath {
    /// Row-by-row triple loop with `tau` convolutions; best for few rows.
    Sparse,
    /// Full space-time FFT convolution minus resonant planes.
    Dense,
    Auto,
}

/// Raw nonresonant and resonant sums on the tripled lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TrilinearSums {
    pub nonresonant: SpaceTimeField,
    pub resonant: SpaceTimeField,
}

fn accumulate(map: &mut BTreeMap<i64, TauRow>, j: i64, start: i64, vals: &[C]) {
    if vals.is_empty() {
        return;
    }
    let row = map.entry(j).or_insert_with(|| TauRow {
        start,
        values: Vec::new(),
    });
    if row.values.is_empty() {
        row.start = start;
        row.values = vals.to_vec();
        return;
    }
    let end = start + vals.len() as i64;
    if start < row.start {
        let mut v = vec![ZERO; (row.start - start) as usize];
        v.extend_from_slice(&row.values);
        row.values = v;
        row.start = start;
    }
    if end > row.end() {
        row.values.resize((end - row.start) as usize, ZERO);
    }
    let off = (start - row.start) as usize;
    for (k, x) in vals.iter().enumerate() {
        row.values[off + k] += x;
    }
}

fn into_field(lat: SpaceTimeLattice, map: BTreeMap<i64, TauRow>) -> Result<SpaceTimeField> {
    let mut f = SpaceTimeField::zeros(lat);
    for (j, r) in map {
        f.set_row(j, r.start, r.values)?;
    }
    Ok(f)
}

fn sums_sparse(u: &SpaceTimeField, v: &SpaceTimeField, w: &SpaceTimeField) -> Result<TrilinearSums> {
    let mut nr = BTreeMap::new();
    let mut res = BTreeMap::new();
    for (j1, r1) in u.rows() {
        for (j2, r2) in v.rows() {
            let mut ab: Option<Vec<C>> = None;
            for (j3, r3) in w.rows() {
                if (j1 + j2) * (j2 + j3) * (j3 + j1) == 0 {
                    continue;
                }
                let ab = ab.get_or_insert_with(|| convolve(&r1.values, &r2.values));
                let abc = convolve(ab, &r3.values);
                accumulate(&mut nr, j1 + j2 + j3, r1.start + r2.start + r3.start, &abc);
            }
        }
    }
    for (j, r1) in u.rows() {
        if let (Some(r2), Some(r3)) = (v.row(j), w.row(-j)) {
            let abc = convolve(&convolve(&r1.values, &r2.values), &r3.values);
            accumulate(&mut res, j, r1.start + r2.start + r3.start, &abc);
        }
    }
    let lat = u.lattice().tripled();
    Ok(TrilinearSums {
        nonresonant: into_field(lat, nr)?,
        resonant: into_field(lat, res)?,
    })
}

struct BBox {
    j0: i64,
    j1: i64,
    i0: i64,
    i1: i64,
}

fn bbox(f: &SpaceTimeField) -> Option<BBox> {
    let mut it = f.rows().filter(|(_, r)| !r.values.is_empty());
    let (j, r) = it.next()?;
    let mut b = BBox {
        j0: j,
        j1: j,
        i0: r.start,
        i1: r.end() - 1,
    };
    for (j, r) in it {
        b.j0 = b.j0.min(j);
        b.j1 = b.j1.max(j);
        b.i0 = b.i0.min(r.start);
        b.i1 = b.i1.max(r.end() - 1);
    }
    Some(b)
}

fn row_transforms(f: &SpaceTimeField, i0: i64, pi: usize) -> BTreeMap<i64, Vec<C>> {
    let fwd = fft_forward(pi);
    f.rows()
        .map(|(j, r)| {
            let mut buf = vec![ZERO; pi];
            for (k, x) in r.values.iter().enumerate() {
                buf[(r.start - i0) as usize + k] = *x;
            }
            fwd.process(&mut buf);
            (j, buf)
        })
        .collect()
}

fn sums_dense(u: &SpaceTimeField, v: &SpaceTimeField, w: &SpaceTimeField) -> Result<TrilinearSums> {
    let lat = u.lattice().tripled();
    let (ba, bb, bc) = match (bbox(u), bbox(v), bbox(w)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Ok(TrilinearSums {
                nonresonant: SpaceTimeField::zeros(lat),
                resonant: SpaceTimeField::zeros(lat),
            })
        }
    };
    let jspan = (ba.j1 - ba.j0) + (bb.j1 - bb.j0) + (bc.j1 - bc.j0) + 1;
    let ispan = (ba.i1 - ba.i0) + (bb.i1 - bb.i0) + (bc.i1 - bc.i0) + 1;
    let pj = (jspan as usize).next_power_of_two();
    let pi = (ispan as usize).next_power_of_two();
    let ra = row_transforms(u, ba.i0, pi);
    let rb = row_transforms(v, bb.i0, pi);
    let rc = row_transforms(w, bc.i0, pi);

    // Transform along j for every tau frequency and multiply.
    let fj = fft_forward(pj);
    let ij = fft_inverse(pj);
    let mut that = vec![vec![ZERO; pi]; pj];
    let mut ca = vec![ZERO; pj];
    let mut cb = vec![ZERO; pj];
    let mut cc = vec![ZERO; pj];
    for om in 0..pi {
        ca.iter_mut().for_each(|x| *x = ZERO);
        cb.iter_mut().for_each(|x| *x = ZERO);
        cc.iter_mut().for_each(|x| *x = ZERO);
        for (j, r) in &ra {
            ca[(j - ba.j0) as usize] = r[om];
        }
        for (j, r) in &rb {
            cb[(j - bb.j0) as usize] = r[om];
        }
        for (j, r) in &rc {
            cc[(j - bc.j0) as usize] = r[om];
        }
        fj.process(&mut ca);
        fj.process(&mut cb);
        fj.process(&mut cc);
        for n in 0..pj {
            ca[n] = ca[n] * cb[n] * cc[n];
        }
        ij.process(&mut ca);
        for n in 0..pj {
            that[n][om] = ca[n] / pj as f64;
        }
    }

    let pair_sum = |x: &BTreeMap<i64, Vec<C>>, y: &BTreeMap<i64, Vec<C>>| -> Vec<C> {
        let mut s = vec![ZERO; pi];
        for (j, rx) in x {
            if let Some(ry) = y.get(&-j) {
                for om in 0..pi {
                    s[om] += rx[om] * ry[om];
                }
            }
        }
        s
    };
    let s12 = pair_sum(&ra, &rb);
    let s23 = pair_sum(&rb, &rc);
    let s31 = pair_sum(&ra, &rc);

    let j_base = ba.j0 + bb.j0 + bc.j0;
    let i_base = ba.i0 + bb.i0 + bc.i0;
    let iinv = fft_inverse(pi);
    let norm = 1.0 / pi as f64;
    let mut nr = BTreeMap::new();
    let mut res = BTreeMap::new();
    let get = |m: &BTreeMap<i64, Vec<C>>, j: i64, om: usize| m.get(&j).map_or(ZERO, |r| r[om]);
    for (n, slot) in that.iter_mut().enumerate().take(jspan as usize) {
        let j = j_base + n as i64;
        let mut row = std::mem::take(slot);
        let local = ra.contains_key(&j) || rb.contains_key(&j) || rc.contains_key(&j) || j == 0;
        let mut rrow = vec![ZERO; pi];
        let mut has_res = false;
        if local {
            for om in 0..pi {
                let (a, b, c) = (get(&ra, j, om), get(&rb, j, om), get(&rc, j, om));
                let (am, bm, cm) = (get(&ra, -j, om), get(&rb, -j, om), get(&rc, -j, om));
                let planes = c * s12[om] + a * s23[om] + b * s31[om];
                let mut pairs = a * bm * c + am * b * c + a * b * cm;
                if j == 0 {
                    pairs -= a * b * c;
                }
                row[om] += pairs - planes;
                rrow[om] = a * b * cm;
                has_res |= rrow[om] != ZERO;
            }
        }
        iinv.process(&mut row);
        let vals: Vec<C> = row[..ispan as usize].iter().map(|x| x * norm).collect();
        accumulate(&mut nr, j, i_base, &vals);
        if has_res {
            iinv.process(&mut rrow);
            let vals: Vec<C> = rrow[..ispan as usize].iter().map(|x| x * norm).collect();
            accumulate(&mut res, j, i_base, &vals);
        }
    }
    Ok(TrilinearSums {
        nonresonant: into_field(lat, nr)?,
        resonant: into_field(lat, res)?,
    })
}

fn choose_path(u: &SpaceTimeField, v: &SpaceTimeField, w: &SpaceTimeField) -> TrilinearPath {
    let avg = |f: &SpaceTimeField| {
        let n = f.row_count().max(1) as f64;
        f.rows().map(|(_, r)| r.values.len() as f64).sum::<f64>() / n
    };
    let (la, lb, lc) = (avg(u), avg(v), avg(w));
    let rows = (u.row_count() * v.row_count() * w.row_count()) as f64;
    let conv = |x: f64, y: f64| if x.min(y) <= 32.0 { x * y } else { 4.0 * (x + y) * (x + y).log2() };
    let sparse = rows * conv(la + lb, lc) + (u.row_count() * v.row_count()) as f64 * conv(la, lb);
    let (ba, bb, bc) = match (bbox(u), bbox(v), bbox(w)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return TrilinearPath::Sparse,
    };
    let pj = (((ba.j1 - ba.j0) + (bb.j1 - bb.j0) + (bc.j1 - bc.j0) + 1) as f64).max(2.0);
    let pi = (((ba.i1 - ba.i0) + (bb.i1 - bb.i0) + (bc.i1 - bc.i0) + 1) as f64).max(2.0);
    let dense = 8.0 * pj * pi * (pj * pi).log2();
    if sparse <= dense {
        TrilinearPath::Sparse
    } else {
        TrilinearPath::Dense
    }
}

/// Raw trilinear sums without measure or derivative factors.
pub fn trilinear_sums(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    w: &SpaceTimeField,
    path: TrilinearPath,
) -> Result<TrilinearSums> {
    u.lattice().check_same(v.lattice(), "trilinear operator")?;
    u.lattice().check_same(w.lattice(), "trilinear operator")?;
    let path = match path {
        TrilinearPath::Auto => choose_path(u, v, w),
        p => p,
    };
    match path {
        TrilinearPath::Dense => sums_dense(u, v, w),
        _ => sums_sparse(u, v, w),
    }
}

fn combine(sums: &TrilinearSums, lat: &SpaceTimeLattice) -> Result<SpaceTimeField> {
    let w2 = lat.cell_weight().powi(2);
    let out_lat = lat.tripled();
    let mut out = SpaceTimeField::zeros(out_lat);
    let mut js: Vec<i64> = sums.nonresonant.rows().map(|(j, _)| j).collect();
    js.extend(sums.resonant.rows().map(|(j, _)| j));
    js.sort_unstable();
    js.dedup();
    for j in js {
        let ik = C::new(0.0, 2.0 * PI * lat.k(j));
        let nr = sums.nonresonant.row(j);
        let rs = sums.resonant.row(j);
        let start = nr.map_or(i64::MAX, |r| r.start).min(rs.map_or(i64::MAX, |r| r.start));
        let end = nr.map_or(i64::MIN, |r| r.end()).max(rs.map_or(i64::MIN, |r| r.end()));
        let vals: Vec<C> = (start..end)
            .map(|i| {
                let a = nr.map_or(ZERO, |r| r.get(i));
                let b = rs.map_or(ZERO, |r| r.get(i));
                (ik / 3.0 * a - ik * b) * w2
            })
            .collect();
        out.set_row(j, start, vals)?;
    }
    Ok(out)
}

/// `J[u, v, w]` on the tripled lattice.
pub fn spacetime_j(u: &SpaceTimeField, v: &SpaceTimeField, w: &SpaceTimeField) -> Result<SpaceTimeField> {
    spacetime_j_with(u, v, w, TrilinearPath::Auto)
}

pub fn spacetime_j_with(
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    w: &SpaceTimeField,
    path: TrilinearPath,
) -> Result<SpaceTimeField> {
    let sums = trilinear_sums(u, v, w, path)?;
    combine(&sums, u.lattice())
}

/// Space-time transform of `(u v - sum_l u(l) v(-l)) w` restricted to
/// nonresonant triples, with the lattice measure.
pub fn spacetime_nonresonant(u: &SpaceTimeField, v: &SpaceTimeField, w: &SpaceTimeField) -> Result<SpaceTimeField> {
    let sums = trilinear_sums(u, v, w, TrilinearPath::Auto)?;
    Ok(sums.nonresonant.scaled(u.lattice().cell_weight().powi(2)))
}
