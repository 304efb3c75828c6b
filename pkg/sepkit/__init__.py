# sepkit Package
"""
Numerical toolkit for stochastic processes with separable covariance functions.

Packages:
  - kernels: 1-D kernels, separable products, Gram matrices, second-order properties
  - spectral: Nystrom/Mercer eigenpairs, Karhunen-Loeve sampling and projection
  - second_order: k-th-order uncorrelation, product processes, distribution diagnostics
  - emulator: regression-plus-residual GP emulator, Kronecker grid solves
  - design: Latin hypercube and axis designs, the n = 10p experiment harness
  - checks: property suites behind `sepkit check`
"""

__version__ = "0.1.0"
