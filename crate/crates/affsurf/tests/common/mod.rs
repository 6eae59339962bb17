//! Test-side oracles, written from the defining formulas without using the library.
#![allow(dead_code)]

pub type G = [[[f64; 2]; 2]; 2];

/// `[111, 112, 121, 122, 221, 222]` into `g[i][j][k] = Γᵢⱼᵏ`.
pub fn tensor(c: [f64; 6]) -> G {
    let mut g = [[[0.0; 2]; 2]; 2];
    g[0][0] = [c[0], c[1]];
    g[0][1] = [c[2], c[3]];
    g[1][0] = [c[2], c[3]];
    g[1][1] = [c[4], c[5]];
    g
}

/// `ρⱼₖ = Σᵢ Rᵢⱼₖⁱ` with `Rᵢⱼₖˡ = ∂ᵢΓⱼₖˡ − ∂ⱼΓᵢₖˡ + ΓᵢₘˡΓⱼₖᵐ − ΓⱼₘˡΓᵢₖᵐ`.
pub fn ricci(g: &G, dg: &[G; 2]) -> [[f64; 2]; 2] {
    let mut rho = [[0.0; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..2 {
                acc += dg[i][j][k][i] - dg[j][i][k][i];
                for m in 0..2 {
                    acc += g[i][m][i] * g[j][k][m] - g[j][m][i] * g[i][k][m];
                }
            }
            rho[j][k] = acc;
        }
    }
    rho
}

pub fn ricci_type_a(c: [f64; 6]) -> [[f64; 2]; 2] {
    ricci(&tensor(c), &[[[[0.0; 2]; 2]; 2]; 2])
}

/// `Γ = C/x¹`, so `∂₁Γ = −C/(x¹)²` and `∂₂Γ = 0`.
pub fn ricci_type_b(c: [f64; 6], x1: f64) -> [[f64; 2]; 2] {
    let mut g = tensor(c);
    let mut d1 = tensor(c);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                g[i][j][k] /= x1;
                d1[i][j][k] /= -x1 * x1;
            }
        }
    }
    ricci(&g, &[d1, [[[0.0; 2]; 2]; 2]])
}

pub fn max_diff(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// `max |∂ᵢ∂ⱼf − Γᵢⱼᵏ∂ₖf + ρˢᵢⱼ|` at `p` by central differences of `f` (`with_ricci = false` drops `ρˢ`).
pub fn soliton_residual_fd(g: &G, rho: &[[f64; 2]; 2], f: &dyn Fn(f64, f64) -> f64, p: (f64, f64), with_ricci: bool) -> f64 {
    let h = 1e-4;
    let (x, y) = p;
    let d = [
        (f(x + h, y) - f(x - h, y)) / (2.0 * h),
        (f(x, y + h) - f(x, y - h)) / (2.0 * h),
    ];
    let dd = [
        [
            (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h),
            (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h),
        ],
        [0.0, (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h)],
    ];
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut v = dd[i.min(j)][i.max(j)] - g[i][j][0] * d[0] - g[i][j][1] * d[1];
            if with_ricci {
                v += 0.5 * (rho[i][j] + rho[j][i]);
            }
            worst = worst.max(v.abs());
        }
    }
    worst
}
