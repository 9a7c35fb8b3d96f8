"""Outer polytope approximation of infinite-time reachable sets."""
