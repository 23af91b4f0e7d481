"""Reference values for the flow and reach unit tests (mpmath, 40 digits)."""
from mpmath import mp, mpf, exp

mp.dps = 40

# x' = x from x = 1 over one step of 0.1.
print("exp_0.1", exp(mpf("0.1")))
