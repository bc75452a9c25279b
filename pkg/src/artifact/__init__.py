"""Exact-arithmetic toolkit for boundary strata, coordinate charts and
blowup bookkeeping on moduli of stable rational marked curves."""

__version__ = "0.1.0"
