"""
Reproduction number and final size on a homogeneous network
===========================================================

When every location looks the same, mobility multiplies the local
reproduction number by ``(1 + (1 + alpha*k)*n) / (1 + n)``. The final
size follows from ``r = 1 - exp(-R0 r)``.
"""
from mobsir import HomogeneousParams, final_size, homogeneous_time_of, reproduction_number

for alpha in (0.0, 0.5, 1.0):
    hp = HomogeneousParams(beta=0.5, mu=0.2, alpha=alpha, k=4, n=0.1)
    r0 = reproduction_number(hp)
    print(f"alpha={alpha:3.1f}  R0={r0:.4f}  final size={final_size(r0):.4f}")

###############################################################################
# Days until a given share of a 10 000-person location has recovered,
# starting from 10 infected.

hp = HomogeneousParams(0.5, 0.2)
for share in (0.01, 0.1, 0.5, 0.8):
    days = homogeneous_time_of(share * 10_000, hp, S0=9_990, N=10_000)
    print(f"{share:4.0%} recovered after {days:6.1f} days")
