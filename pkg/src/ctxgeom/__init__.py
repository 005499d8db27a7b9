"""Contextuality scenarios, their polytopes, and quantifiers of contextuality."""
__version__ = "0.1.0"
