"""Finite models of Ellis semigroups of constant-length substitution subshifts."""

__version__ = "0.1.0"
