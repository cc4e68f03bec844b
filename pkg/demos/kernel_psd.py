"""Permanent kernel between point sets and a PSD check of its Gram matrix."""
import numpy as np

from bethe_permanent import RngSpec
from bethe_permanent.kernel import gram_psd_check, permanent_kernel

gen = RngSpec(11).generator()
a, b = gen.uniform(0, 1, (5, 4)), gen.uniform(0, 1, (5, 4))
print("k(a, b)            =", permanent_kernel(a, b, 0.5))
print("k(a, shuffled b)   =", permanent_kernel(a, b[::-1], 0.5))

psd = 0
for spec in RngSpec(12).spawn(20):
    g = spec.generator()
    report = gram_psd_check([g.uniform(0, 1, (5, 4)) for _ in range(10)], 0.5)
    psd += report.psd
print(f"PSD Gram matrices: {psd}/20, last min eigenvalue {report.min_eigenvalue:.3e}")
print(np.round(report.gram[:4, :4], 3))
