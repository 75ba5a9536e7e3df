//! Algebra of r-th mean curvatures and Newton transformations.
//!
//! `K_r` is the unnormalized r-th elementary symmetric polynomial of the
//! principal curvatures (`K_1` is the sum, not the average; `K_n` is the
//! Gauss-Kronecker curvature `G`). Newton tensors follow the recursion
//! `T_0 = I`, `T_r = K_r I - B T_{r-1}`, equivalently the alternating sum
//! `T_r = K_r I - K_{r-1} B + ... + (-1)^r B^r`.
//!
//! Brute-force oracles built directly on the generalized Kronecker delta
//! cross-validate both routes on small matrices; they are factorial-cost by
//! design and refuse n > 5.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest matrix size the delta oracles accept.
pub const DELTA_ORACLE_MAX_N: usize = 5;

/// Principal curvatures and Newton tensors at one point: `k[r]` is K_r,
/// `t[r]` is T_r, for r = 0..=n.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub k: Vec<f64>,
    pub t: Vec<DMatrix<f64>>,
}

/// Elementary symmetric polynomials `K_0..K_n` of the principal curvatures,
/// by the coefficient recurrence for `prod (t + k_i)`.
pub fn mean_curvatures(principal: &[f64]) -> Vec<f64> {
    let n = principal.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (count, &kappa) in principal.iter().enumerate() {
        for r in (1..=count + 1).rev() {
            e[r] += kappa * e[r - 1];
        }
    }
    e
}

/// Newton recursion `T_0 = I`, `T_r = K_r I - B T_{r-1}` for an arbitrary
/// square operator matrix and precomputed invariants `k`.
pub fn newton_recursion(b: &DMatrix<f64>, k: &[f64]) -> Vec<DMatrix<f64>> {
    let n = b.nrows();
    let mut t = Vec::with_capacity(n + 1);
    t.push(DMatrix::identity(n, n));
    for r in 1..=n {
        let prev: &DMatrix<f64> = &t[r - 1];
        let mut tr = DMatrix::identity(n, n) * k[r];
        tr -= b * prev;
        t.push(tr);
    }
    t
}

fn check_symmetric(b: &DMatrix<f64>) -> Result<()> {
    if b.nrows() != b.ncols() {
        return Err(Error::ContractViolation(format!(
            "expected square matrix, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let scale = b.amax().max(1.0);
    for i in 0..b.nrows() {
        for j in (i + 1)..b.ncols() {
            if (b[(i, j)] - b[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::ContractViolation(format!(
                    "matrix not symmetric at ({i},{j}): {} vs {}",
                    b[(i, j)],
                    b[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

fn symmetric_eigenvalues(b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sym = nalgebra::SymmetricEigen::try_new(b.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalDegeneracy("symmetric eigensolver failed".into()))?;
    Ok(sym.eigenvalues.iter().copied().collect())
}

/// Mean curvatures and Newton tensors of a symmetric second-fundamental-form
/// matrix, via the recursion.
pub fn newton_tensors(b: &DMatrix<f64>) -> Result<CurvaturePack> {
    check_symmetric(b)?;
    let k = mean_curvatures(&symmetric_eigenvalues(b)?);
    let t = newton_recursion(b, &k);
    Ok(CurvaturePack { k, t })
}

/// Newton tensors by the alternating power sum; independent route used to
/// cross-check the recursion.
pub fn newton_tensors_powers(b: &DMatrix<f64>) -> Result<CurvaturePack> {
    check_symmetric(b)?;
    let n = b.nrows();
    let k = mean_curvatures(&symmetric_eigenvalues(b)?);
    let mut t = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut acc = DMatrix::<f64>::zeros(n, n);
        let mut power = DMatrix::<f64>::identity(n, n);
        for l in 0..=r {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += &power * (sign * k[r - l]);
            if l < r {
                power = b * power;
            }
        }
        t.push(acc);
    }
    Ok(CurvaturePack { k, t })
}

/// Generalized Kronecker delta `delta^J_I` in {-1, 0, 1}: nonzero only when
/// the entries of `i_idx` are distinct and `j_idx` is a permutation of them,
/// with the permutation's sign.
pub fn gen_kronecker(i_idx: &[usize], j_idx: &[usize]) -> Result<i32> {
    if i_idx.len() != j_idx.len() {
        return Err(Error::ContractViolation(format!(
            "multi-index length mismatch: {} vs {}",
            i_idx.len(),
            j_idx.len()
        )));
    }
    let q = i_idx.len();
    for a in 0..q {
        for b in (a + 1)..q {
            if i_idx[a] == i_idx[b] {
                return Ok(0);
            }
        }
    }
    // Match each j to the position of the equal i entry.
    let mut perm = Vec::with_capacity(q);
    for &j in j_idx {
        match i_idx.iter().position(|&i| i == j) {
            Some(p) => perm.push(p),
            None => return Ok(0),
        }
    }
    let mut seen = vec![false; q];
    if perm.iter().any(|&p| std::mem::replace(&mut seen[p], true)) {
        return Ok(0); // j_idx repeats an entry
    }
    // Sign from cycle decomposition.
    let mut visited = vec![false; q];
    let mut sign = 1i32;
    for start in 0..q {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut pos = start;
        while !visited[pos] {
            visited[pos] = true;
            pos = perm[pos];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|v| v as f64).product()
}

fn guard_oracle(n: usize, r: usize) -> Result<()> {
    if n > DELTA_ORACLE_MAX_N {
        return Err(Error::ContractViolation(format!(
            "delta oracle limited to n <= {DELTA_ORACLE_MAX_N}, got n = {n}"
        )));
    }
    if r > n {
        return Err(Error::ContractViolation(format!(
            "order r = {r} exceeds matrix size n = {n}"
        )));
    }
    Ok(())
}

/// Visits every ordered tuple of `len` distinct indices drawn from `0..n`.
fn for_each_distinct_tuple(n: usize, len: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, len: usize, used: &mut Vec<bool>, tuple: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if tuple.len() == len {
            f(tuple);
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                tuple.push(i);
                rec(n, len, used, tuple, f);
                tuple.pop();
                used[i] = false;
            }
        }
    }
    let mut used = vec![false; n];
    let mut tuple = Vec::with_capacity(len);
    rec(n, len, &mut used, &mut tuple, f);
}

/// Visits every permutation of `items` with its sign (Heap's algorithm).
fn for_each_permutation_with_sign(items: &[usize], f: &mut impl FnMut(&[usize], i32)) {
    let mut a = items.to_vec();
    let q = a.len();
    let mut c = vec![0usize; q];
    let mut sign = 1i32;
    f(&a, sign);
    let mut i = 0;
    while i < q {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            f(&a, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// K_r by direct summation of the generalized-delta formula. Sums only the
/// index tuples the delta itself does not annihilate, which is the same sum.
pub fn kr_via_delta(b: &DMatrix<f64>, r: usize) -> Result<f64> {
    check_symmetric(b)?;
    let n = b.nrows();
    guard_oracle(n, r)?;
    if r == 0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    for_each_distinct_tuple(n, r, &mut |i_idx| {
        for_each_permutation_with_sign(i_idx, &mut |j_idx, sign| {
            let mut prod = f64::from(sign);
            for l in 0..r {
                prod *= b[(i_idx[l], j_idx[l])];
            }
            sum += prod;
        });
    });
    Ok(sum / factorial(r))
}

/// The matrix of T_r by direct summation of the generalized-delta formula.
pub fn tr_via_delta(b: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    check_symmetric(b)?;
    let n = b.nrows();
    guard_oracle(n, r)?;
    let mut t = DMatrix::<f64>::zeros(n, n);
    // Enumerate the (r+1)-index delta with the last slots as the free (i, j).
    for_each_distinct_tuple(n, r + 1, &mut |full_i| {
        for_each_permutation_with_sign(full_i, &mut |full_j, sign| {
            let mut prod = f64::from(sign);
            for l in 0..r {
                prod *= b[(full_i[l], full_j[l])];
            }
            t[(full_i[r], full_j[r])] += prod;
        });
    });
    Ok(t / factorial(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn elementary_symmetric_basics() {
        assert_eq!(mean_curvatures(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(mean_curvatures(&[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
        // Umbilic: K_r = C(n, r) c^r.
        let c = 0.7;
        let k = mean_curvatures(&[c; 4]);
        let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
        for r in 0..=4 {
            assert!(rel_close(k[r], binom[r] * c.powi(r as i32), 1e-14));
        }
    }

    #[test]
    fn newton_diag_example() {
        let b = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0]);
        let pack = newton_tensors(&b).unwrap();
        assert!(rel_close(pack.t[1][(0, 0)], 2.0, 1e-14));
        assert!(rel_close(pack.t[1][(1, 1)], 1.0, 1e-14));
        assert!(pack.t[1][(0, 1)].abs() < 1e-14);
        assert!(pack.t[2].amax() < 1e-12);
    }

    #[test]
    fn newton_zero_matrix() {
        let b = DMatrix::<f64>::zeros(3, 3);
        let pack = newton_tensors(&b).unwrap();
        for r in 1..=3 {
            assert_eq!(pack.k[r], 0.0);
            assert!(pack.t[r].amax() == 0.0);
        }
        assert_eq!(pack.k[0], 1.0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(newton_tensors(&b).is_err());
        assert!(kr_via_delta(&b, 1).is_err());
    }

    #[test]
    fn kronecker_cases() {
        assert_eq!(gen_kronecker(&[1, 2], &[1, 2]).unwrap(), 1);
        assert_eq!(gen_kronecker(&[1, 2], &[2, 1]).unwrap(), -1);
        assert_eq!(gen_kronecker(&[1, 1], &[1, 2]).unwrap(), 0);
        assert_eq!(gen_kronecker(&[1, 2], &[1, 3]).unwrap(), 0);
        assert_eq!(gen_kronecker(&[1, 2], &[1, 1]).unwrap(), 0);
        assert_eq!(gen_kronecker(&[0, 1, 2], &[1, 2, 0]).unwrap(), 1);
        assert_eq!(gen_kronecker(&[0, 1, 2], &[1, 0, 2]).unwrap(), -1);
        assert!(gen_kronecker(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn delta_oracle_examples() {
        let b = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0, 3.0]);
        assert!(rel_close(kr_via_delta(&b, 2).unwrap(), 11.0, 1e-12));
        let id3 = DMatrix::<f64>::identity(3, 3);
        assert!(rel_close(kr_via_delta(&id3, 3).unwrap(), 1.0, 1e-12));

        let b = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0]);
        let t1 = tr_via_delta(&b, 1).unwrap();
        assert!(rel_close(t1[(0, 0)], 2.0, 1e-12));
        assert!(rel_close(t1[(1, 1)], 1.0, 1e-12));
        let t0 = tr_via_delta(&b, 0).unwrap();
        assert_eq!(t0, DMatrix::identity(2, 2));
    }

    #[test]
    fn oracle_rejects_large_matrices() {
        let b = DMatrix::<f64>::identity(6, 6);
        assert!(kr_via_delta(&b, 2).is_err());
        assert!(tr_via_delta(&b, 2).is_err());
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let mut b = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = next();
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        b
    }

    #[test]
    fn recursion_vs_powers_vs_delta() {
        for n in 2..=5 {
            for seed in 1..=8u64 {
                let b = random_symmetric(n, seed.wrapping_mul(0xabcd1234) + n as u64);
                let rec = newton_tensors(&b).unwrap();
                let pow = newton_tensors_powers(&b).unwrap();
                for r in 0..=n {
                    let scale = rec.t[r].amax().max(1.0);
                    assert!(
                        (&rec.t[r] - &pow.t[r]).amax() <= 1e-12 * scale,
                        "recursion vs powers at n={n} r={r}"
                    );
                    assert!(
                        rel_close(kr_via_delta(&b, r).unwrap(), rec.k[r], 1e-10),
                        "K_{r} delta oracle at n={n}"
                    );
                    let td = tr_via_delta(&b, r).unwrap();
                    assert!(
                        (&rec.t[r] - &td).amax() <= 1e-10 * scale,
                        "T_{r} delta oracle at n={n}"
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_identities(entries in proptest::collection::vec(-3.0..3.0f64, 10)) {
            // Symmetric 4x4 from 10 free entries.
            let n = 4;
            let mut b = DMatrix::<f64>::zeros(n, n);
            let mut it = entries.iter();
            for i in 0..n {
                for j in i..n {
                    let v = *it.next().unwrap();
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
            }
            let pack = newton_tensors(&b).unwrap();
            let scale = b.amax().max(1.0).powi(n as i32);
            for r in 0..n {
                let tr = pack.t[r].trace();
                let want = (n - r) as f64 * pack.k[r];
                prop_assert!((tr - want).abs() <= 1e-10 * scale.max(want.abs()));

                let bt = (&b * &pack.t[r]).trace();
                let want = (r + 1) as f64 * pack.k[r + 1];
                prop_assert!((bt - want).abs() <= 1e-10 * scale.max(want.abs()));
            }
            // T_n vanishes.
            prop_assert!(pack.t[n].amax() <= 1e-10 * scale);
        }
    }
}
