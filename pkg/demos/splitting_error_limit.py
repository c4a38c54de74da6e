"""How wrong is one composed step?  The splitting error and its limit.

For a quadratic, the one-step composition of per-block flows at time t
differs from the exact flow by an error that does not vanish as t grows:
it converges to the norm of the product of the blocks' orthogonal
projector complements.  This script sweeps t for a 100 x 100 operator cut
into 2 and into 40 row blocks and plots the error flattening onto that
limit value.
"""

from pathlib import Path

import numpy as np

from splitopt import build_split, error_limit, error_sweep, random_full_rank
from splitopt.bounds import write_sweep_csv
from splitopt.plotting import Series, render_line_chart

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

x = random_full_rank(100, seed=0)
t_grid = np.linspace(0.0, 50.0, 51)

series = []
for blocks in (2, 40):
    ops = build_split(x, blocks)
    rows = error_sweep(ops, t_grid)
    lim = error_limit(ops)
    print(f"blocks={blocks:>2}: limit = {lim:.6f}, "
          f"error(10) = {rows[10, 1]:.6f}, error(50) = {rows[-1, 1]:.6f}")
    write_sweep_csv(rows, OUT / f"sweep_k{blocks}.csv")
    series.append(Series(f"{blocks} blocks", rows[:, 0].tolist(), rows[:, 1].tolist()))
    series.append(Series(f"limit ({blocks})", rows[:, 0].tolist(), rows[:, 2].tolist()))

chart = render_line_chart(series, "t", "spectral-norm error")
(OUT / "splitting_error.svg").write_text(chart)
print(f"wrote CSVs and {OUT / 'splitting_error.svg'}")
print("note: finite-t error can overshoot the limit; the limit is the"
      " asymptotic value, reached once every exponential has decayed.")
