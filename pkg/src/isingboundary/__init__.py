"""Boundary states of measured 2D cluster states, three ways: dense oracle,
tensor-train evolution, and stabilizer tableaus, with complex-parameter Ising
partition functions and entanglement phase-diagram tooling on top."""

__version__ = "0.1.0"
