"""Conserved tensor of the free Schrodinger field, with and without its Hessian term.

A zero-free packet is evolved with the split-step solver. The divergence of
the tensor built from the hydrodynamic fields falls with the time step; with
the density Hessian term removed it stays of order one.
"""

from fluidsym.emtensor import tensor_continuity, tensor_schrodinger
from fluidsym.grid import Grid1D
from fluidsym.schrodinger import Nonlinearity, background_packet, evolve_nls

packet = background_packet(Grid1D(256, 40.0), momentum=0.7, centre=0.5)
for dt in (0.004, 0.002, 0.001):
    slices = evolve_nls(packet, Nonlinearity.linear(), dt, 0.2).slices()
    full = tensor_continuity(tensor_schrodinger(w) for w in slices).max_abs()
    cut = tensor_continuity(tensor_schrodinger(w, ablate_hessian=True) for w in slices).max_abs()
    print(f"dt={dt:.3f}  divergence {full:.3e}   without Hessian term {cut:.3e}")
