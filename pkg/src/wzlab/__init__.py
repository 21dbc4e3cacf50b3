"""Dithered modulo-lattice Wyner-Ziv quantization workbench.

Library layout:
  gauss    - Gaussian conditioning, Jacobi eigendecomposition, joint sampling
  rd       - closed-form RD functions, reverse waterfilling, WZ test channel
  lattice  - modulo lattice, probabilistic shaping, entropies, distortion bound
  polar    - polar transform, 5G reliability order, list search (compiled core)
  codecs   - pcqmod / pcq / one-bit end-to-end quantizers
  vector   - eigen-transform + waterfilled parallel scalar codecs
  harness  - Monte Carlo experiment runner and CSV/JSON reports
  cli      - `wzlab` command-line entry point
"""

__version__ = "0.1.0"
