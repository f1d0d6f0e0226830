"""Boundary-driven symmetric exclusion with weak reservoirs."""
