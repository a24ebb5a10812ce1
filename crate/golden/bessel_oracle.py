"""Golden CSV for golden/bessel_sweep.toml.

For sigma = exp(-2x) and Dirichlet data at x = 0 the half-line eigenvalues are
lambda_k = t^2 j_{nu,k}^2 with nu = sqrt(mu)/t. Zeros come from mpmath at 40
digits, independently of the Rust solver.

    python3 golden/bessel_oracle.py > golden/bessel_sweep.csv
"""

import mpmath as mp

mp.mp.dps = 40

T_GRID = ["0.5", "0.2", "0.1"]
K_MAX = 3

print("# independent oracle: lambda = t^2 j_{pi/t,k}^2 (mpmath)")
print("t,mu,k,lambda")
mu = mp.pi ** 2
for ts in T_GRID:
    t = mp.mpf(ts)
    nu = mp.sqrt(mu) / t
    for k in range(1, K_MAX + 1):
        lam = t ** 2 * mp.besseljzero(nu, k) ** 2
        print(f"{ts},{mp.nstr(mu, 17, min_fixed=1, max_fixed=0)},{k},{mp.nstr(lam, 17, min_fixed=1, max_fixed=0)}")
