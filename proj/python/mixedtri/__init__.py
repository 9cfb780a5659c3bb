"""Mixed Dirichlet-Neumann triangles: eigenfunctions, positive solutions and
their qualitative properties (C++ core via pybind11)."""

from ._core import Error, continuation, eigen, run_cli, sweep_csv, triangle, verify

__all__ = ["Error", "continuation", "eigen", "run_cli", "sweep_csv", "triangle", "verify"]
