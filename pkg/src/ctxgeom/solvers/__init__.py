"""Numerical back ends: linear programs, hull projections, SDP and graph invariants."""
