"""Koszul-complex models of Cech cohomology, local cohomology and derived completion."""
