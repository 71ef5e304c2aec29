"""Gaussian-state tomography lab.

Simulation and estimation toolkit for bosonic Gaussian states: symplectic
linear algebra, closed-form state functionals, statistical distances with
brackets, exact measurement sampling, tomography algorithms, hard-instance
ensembles, a truncated-Fock brute-force oracle, and a seeded experiment
harness with CSV/figure reports.
"""

__version__ = "0.1.0"
