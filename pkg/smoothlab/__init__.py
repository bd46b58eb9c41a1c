"""
smoothlab: numerical laboratory for rearrangements, Lorentz-type norms, moduli of smoothness,
K-functional profiles and the inequalities between them.
"""
__version__ = "0.4.0"
SCHEMA_VERSION = "1"
