"""Spectral triples on the crossed product of the 2-torus by a linear flow.

Exact normal forms for the algebra, its four-component lattice representation,
closed-form spectra, differential-calculus verification, Hankel-type sequence
classification and the rotation-algebra analogue.
"""

from .algebra import (AlgebraElement, CrossedProductAlgebra, FoliationParams, NonGenericError, RegistryMismatch,
                      TimeRegistry, equals, multiply, star)
from .calculus import RelationReport, relation_suite
from .hilbert import BlockOperator, ModeIndex, SectionVector, assemble, commutator, diff_ops, pi, to_dense
from .scalars import GaussianRational, PhaseExponent, Phased
from .spectral import (dirac_operator, linear_spectrum, mixed_spectrum, spectrum_rows, weyl_count)
from .torus import TorusElement, TorusParams, torus_ops, torus_relation_suite

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement", "CrossedProductAlgebra", "FoliationParams", "NonGenericError", "RegistryMismatch",
    "TimeRegistry", "equals", "multiply", "star",
    "RelationReport", "relation_suite",
    "BlockOperator", "ModeIndex", "SectionVector", "assemble", "commutator", "diff_ops", "pi", "to_dense",
    "GaussianRational", "PhaseExponent", "Phased",
    "dirac_operator", "linear_spectrum", "mixed_spectrum", "spectrum_rows", "weyl_count",
    "TorusElement", "TorusParams", "torus_ops", "torus_relation_suite",
]
