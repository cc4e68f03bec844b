"""Time BP as n grows and write runtime.csv for plotting.

Iterations level off while per-iteration cost grows roughly with n^2.
"""
from bethe_permanent import RngSpec
from bethe_permanent.bench import run_runtime_study

report = run_runtime_study(5, 60, 10, RngSpec(7), step=5)
print(f"{'n':>4} {'iters':>7} {'ms':>9} {'us/iter':>9}")
for row in report.rows:
    print(f"{row['n']:>4} {row['mean_iterations']:>7.1f} "
          f"{1e3 * row['mean_seconds']:>9.2f} {1e6 * row['iteration_seconds']:>9.1f}")

with open("runtime.csv", "w") as fh:
    fh.write(report.to_csv())
