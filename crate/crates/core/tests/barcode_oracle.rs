use homquiver::linalg::{identity, zeros, CMat};
use homquiver::oracle::{barcode, Interval};
use homquiver::quiver::random_matrix;
use homquiver::{Chain, RankTolerance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rank(m: &CMat) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let cut = 1e-9 * sv.max().max(1.0);
    sv.iter().filter(|s| **s > cut).count()
}

fn hcat(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Map `V_a -> V_b` for `a >= b`, built by straight multiplication.
fn path(c: &Chain, a: usize, b: usize) -> CMat {
    let mut acc = identity(c.dim(a));
    for i in ((b + 1)..=a).rev() {
        acc = c.phi(i) * acc;
    }
    acc
}

/// Orthonormal-free kernel: columns spanning `ker phi_b` from the full SVD.
fn kernel(m: &CMat) -> CMat {
    let n = m.ncols();
    if m.nrows() == 0 {
        return identity(n);
    }
    let k = n - rank(m);
    if k == 0 {
        return zeros(n, 0);
    }
    // pad to square so V^† is n x n
    let mut sq = zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), m.shape()).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let mut out = zeros(n, k);
    for (col, &r) in idx[n - k..].iter().enumerate() {
        for t in 0..n {
            out[(t, col)] = vt[(r, t)].conj();
        }
    }
    out
}

fn intersect_dim(a: &CMat, b: &CMat) -> usize {
    rank(a) + rank(b) - rank(&hcat(a, b))
}

/// Bars ending at `b` that start at `a`: new image inside the kernel.
fn brute_multiplicity(c: &Chain, a: usize, b: usize) -> usize {
    let ker = if b == 0 { identity(c.dim(0)) } else { kernel(c.phi(b)) };
    let img = path(c, a, b);
    let here = intersect_dim(&img, &ker);
    let above = if a == c.m() { 0 } else { intersect_dim(&path(c, a + 1, b), &ker) };
    here - above
}

fn random_chain(rng: &mut ChaCha8Rng) -> Chain {
    let m = rng.random_range(1..=4);
    let dims: Vec<usize> = (0..=m).map(|_| rng.random_range(0..=3)).collect();
    let mut maps = Vec::new();
    for i in 1..=m {
        // low-rank maps half the time so bars actually end
        let (r, cdim) = (dims[i - 1], dims[i]);
        let k = if rng.random_bool(0.5) { rng.random_range(0..=r.min(cdim)) } else { r.min(cdim) };
        maps.push(random_matrix(r, k, rng) * random_matrix(k, cdim, rng));
    }
    Chain::new(dims, maps).unwrap()
}

#[test]
fn barcode_matches_image_kernel_oracle() {
    let tol = RankTolerance::default();
    for seed in 0..300 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_chain(&mut rng);
        let bc = barcode(&c, tol).unwrap();
        for a in 0..=c.m() {
            for b in 0..=a {
                let want = brute_multiplicity(&c, a, b);
                let got = bc.bars.get(&Interval::new(a, b).unwrap()).copied().unwrap_or(0);
                assert_eq!(got, want, "seed {seed} bar [{a},{b}] dims {:?}", c.dims());
            }
        }
        for i in 0..=c.m() {
            assert_eq!(bc.dim_at(i), c.dim(i));
        }
    }
}

#[test]
fn spec_style_examples() {
    let tol = RankTolerance::default();
    let one = CMat::from_element(1, 1, homquiver::linalg::c(1.0, 0.0));
    let c = Chain::new(vec![1, 1], vec![one.clone()]).unwrap();
    let bc = barcode(&c, tol).unwrap();
    assert_eq!(bc.bars.len(), 1);
    assert_eq!(bc.bars[&Interval::new(1, 0).unwrap()], 1);
    let z = Chain::new(vec![1, 1], vec![zeros(1, 1)]).unwrap();
    let bz = barcode(&z, tol).unwrap();
    assert_eq!(bz.num_summands(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barcode_is_additive(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let tol = RankTolerance::default();
        let mut r1 = ChaCha8Rng::seed_from_u64(s1);
        let mut r2 = ChaCha8Rng::seed_from_u64(s2);
        let c1 = random_chain(&mut r1);
        let mut c2 = random_chain(&mut r2);
        while c2.m() != c1.m() {
            c2 = random_chain(&mut r2);
        }
        let sum = c1.direct_sum(&c2).unwrap();
        let merged = barcode(&c1, tol).unwrap().merge(&barcode(&c2, tol).unwrap());
        prop_assert_eq!(barcode(&sum, tol).unwrap(), merged);
    }

    #[test]
    fn barcode_is_gauge_invariant(seed in 0u64..10_000) {
        let tol = RankTolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_chain(&mut rng);
        let moved = homquiver::sampling::scramble(&c, &mut rng);
        prop_assert_eq!(barcode(&c, tol).unwrap(), barcode(&moved, tol).unwrap());
    }

    #[test]
    fn canonical_chain_reproduces_barcode(seed in 0u64..10_000) {
        let tol = RankTolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bc = barcode(&random_chain(&mut rng), tol).unwrap();
        prop_assert_eq!(barcode(&bc.canonical_chain(), tol).unwrap(), bc);
    }
}
