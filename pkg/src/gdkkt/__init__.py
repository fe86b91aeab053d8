"""gdkkt: exact-arithmetic gradient-descent / KKT hardness constructions."""

__version__ = "0.1.0"
