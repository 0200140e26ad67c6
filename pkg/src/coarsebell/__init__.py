"""Bell-CHSH and Leggett tests of entangled thermal states measured by
coarse-grained (inefficient, sign-binned) homodyne detection.

Three mutually cross-validating computational backends:

- ``closedform``: exact closed-form correlations for the qubit-conditioned
  entangled-thermal-state family, any variance;
- ``engine``: exact symbolic algebra over finite superpositions of two-mode
  coherent states (single phase-space branch);
- ``fock``: brute-force truncated number-basis oracle, small amplitudes only.

``thermal`` integrates the engine over the thermal phase-space distribution,
``inequalities`` assembles and optimizes the CHSH and Leggett functions, and
``cli`` exposes grid scans and the validation suite.
"""

__version__ = "0.1.0"
