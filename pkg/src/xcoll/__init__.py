"""Exact verification toolkit for exceptional collections on product-quotient surfaces.

The package realizes small finite groups from presentations or permutations,
computes genera and fiber decompositions of the associated branched covers of
the line, derives linear-equivalence relations between fiber divisors, runs
section-counting reduction chains, checks mu_n-valued 2-cocycle obstructions,
and assembles everything into per-family verification reports.
"""

__version__ = "0.1.0"
