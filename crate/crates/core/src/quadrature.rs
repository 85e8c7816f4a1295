//! Globally adaptive Gauss–Kronrod (7/15) integration of vector-valued
//! functions over an interval with user-supplied breakpoints.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    err: [f64; N],
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Piece<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(c)?;
    for j in 0..N {
        kron[j] = WGK[7] * fc[j];
        gauss[j] = WG[3] * fc[j];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx)?, f(c + dx)?);
        for j in 0..N {
            let s = f1[j] + f2[j];
            kron[j] += WGK[i] * s;
            if i % 2 == 1 {
                gauss[j] += WG[i / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut err = [0.0; N];
    for j in 0..N {
        value[j] = kron[j] * h;
        err[j] = ((kron[j] - gauss[j]) * h).abs();
    }
    Ok(Piece { a, b, value, err })
}

/// Integrate `f` over [points[0], points.last()] to absolute tolerance `tol`
/// in every component. Interior points are kinks of the integrand and are
/// never straddled. Returns the integral and the per-component error
/// estimate.
pub fn integrate<const N: usize, F>(mut f: F, points: &[f64], tol: f64, max_intervals: usize) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    assert!(points.len() >= 2, "need an interval");
    let mut live: Vec<Piece<N>> = Vec::new();
    let mut frozen: Vec<Piece<N>> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            live.push(gk15(&mut f, w[0], w[1])?);
        }
    }
    let total = |live: &[Piece<N>], frozen: &[Piece<N>]| {
        let mut v = [0.0; N];
        let mut e = [0.0; N];
        for p in live.iter().chain(frozen) {
            for j in 0..N {
                v[j] += p.value[j];
                e[j] += p.err[j];
            }
        }
        (v, e)
    };
    loop {
        let (value, err) = total(&live, &frozen);
        if err.iter().all(|&e| e <= tol) {
            return Ok((value, err));
        }
        let worst_err = err.iter().copied().fold(0.0, f64::max);
        if live.len() + frozen.len() >= max_intervals || live.is_empty() {
            return Err(Error::QuadratureBudget { tol, intervals: max_intervals, err: worst_err });
        }
        // bisect the piece contributing most to the worst component
        let j = (0..N).max_by(|&x, &y| (err[x] / tol).total_cmp(&(err[y] / tol))).unwrap();
        let k = (0..live.len()).max_by(|&x, &y| live[x].err[j].total_cmp(&live[y].err[j])).unwrap();
        let p = live.swap_remove(k);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || p.b - p.a < 1e-15 {
            frozen.push(p);
            continue;
        }
        live.push(gk15(&mut f, p.a, mid)?);
        live.push(gk15(&mut f, mid, p.b)?);
    }
}

/// Sorted, deduplicated breakpoints in (lo, hi) plus the endpoints.
pub fn breakpoints(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior.into_iter().filter(|x| *x > lo && *x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
