"""Which of the ten charges survive a given potential.

Evolves a smooth datum under the free, inverse-density and cubic potentials
and prints the relative drift of every charge. Free flow conserves all ten;
the other two potentials each keep a different set of six.
"""

from fluidsym.charges import GENERATORS, conservation_report
from fluidsym.cli_io import expected_conserved
from fluidsym.dynamics import Potential, evolve, membrane_datum, standard_datum
from fluidsym.grid import Grid1D

RUNS = [
    ("free", Potential.free(), standard_datum()),
    ("inverse density", Potential.membrane(1e-3), membrane_datum()),
    ("cubic", Potential.conformal(0.1), standard_datum(Grid1D(1024, 40.0))),
]

for label, pot, datum in RUNS:
    rows = {r["generator"]: r["max_drift"] for r in conservation_report(evolve(datum, pot, 1e-3, 1.0, stride=50), pot)}
    kept = expected_conserved(pot)
    print(f"\n{label} potential")
    for g in GENERATORS:
        tag = "conserved" if g in kept else "broken"
        print(f"  {g.value:>5}  drift {rows[g.value]:.2e}  ({tag})")
