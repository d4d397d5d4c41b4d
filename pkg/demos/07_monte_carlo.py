"""A small Monte Carlo table in the layout of the simulation study.

Run: python demos/07_monte_carlo.py   (under a minute)
The full reduced-scale runs are `tvstable mc demos/configs/mc_table1.yaml -o out/`.
"""

from tvstable.analysis import format_table, run_mc
from tvstable.scenarios import preset

results = [run_mc(preset("table1", T=T, R=10, S=10), master_seed=1) for T in (300, 600)]
print(format_table(results))
print(format_table(results, moments=True))
